//! Subcommand handlers. Each returns the JSON document printed on stdout.

use std::path::Path;

use anyhow::{Context, Result};
use nalgebra::DVector;
use clap::{CommandFactory, ValueEnum};
use serde_json::{json, Value};

use m2ols_core::analysis::{
    certify_instances, check_lemma_bounds, check_noiseless, check_noisy, diagnose_run,
    exact_ric_with_budget, sampled_ric_lower_bound, TheoremCheckConfig,
};
use m2ols_core::bench::{emit_to_path, run_experiment, run_experiment_with_threads, Format};
use m2ols_core::dictionary::{coherence, generate};
use m2ols_core::greedy::run;
use m2ols_core::io::{load_matrix, load_signal, load_vector, save_matrix, save_signal, save_vector};
use m2ols_core::rng::derive_seed;
use m2ols_core::signals::{add_noise_at_snr, mar, measure, random_sparse_signal_with, SignalValues};
use m2ols_core::{
    Algorithm, DictionaryKind, DictionarySpec, ExperimentSpec, GreedyConfig, RecoveryResult, SensingMatrix,
    SparseSignal,
};

use crate::{
    AlgArg, AnalyzeArgs, CheckArgs, Cli, Command, GenMatrixArgs, GenSignalArgs, RecoverArgs, RicArgs, SweepArgs,
    ValuesArg,
};

const LEMMA_TRIALS: usize = 100;
const LEMMA_ROWS: usize = 6;
const THEOREM_INSTANCES: usize = 25;

pub fn dispatch(command: Command) -> Result<Value> {
    match command {
        Command::GenMatrix(a) => gen_matrix(a),
        Command::GenSignal(a) => gen_signal(a),
        Command::Recover(a) => recover(a),
        Command::Sweep(a) => sweep(a),
        Command::Ric(a) => ric(a),
        Command::Check(a) => check(a),
        Command::Analyze(a) => analyze(a),
    }
}

/// Report a flag combination clap cannot express and exit with status 2.
fn usage(subcommand: &str, msg: impl std::fmt::Display) -> ! {
    let mut cmd = Cli::command();
    cmd.build();
    let cmd = cmd.find_subcommand_mut(subcommand).expect("known subcommand");
    cmd.error(clap::error::ErrorKind::ArgumentConflict, msg).exit()
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn resolve_algorithm(subcommand: &str, alg: AlgArg, big_n: Option<usize>, l: Option<usize>) -> Algorithm {
    let name = alg.to_possible_value().expect("no skipped variants");
    let name = name.get_name();
    let need = |v: Option<usize>, flag: &str| {
        v.unwrap_or_else(|| usage(subcommand, format!("--alg {name} requires {flag}")))
    };
    let reject = |v: Option<usize>, flag: &str| {
        if v.is_some() {
            usage(subcommand, format!("{flag} does not apply to --alg {name}"));
        }
    };
    match alg {
        AlgArg::Omp | AlgArg::Ols => {
            reject(big_n, "--big-n");
            reject(l, "--l");
            if alg == AlgArg::Omp {
                Algorithm::Omp
            } else {
                Algorithm::Ols
            }
        }
        AlgArg::Gomp => {
            reject(l, "--l");
            Algorithm::Gomp { n: need(big_n, "--big-n") }
        }
        AlgArg::Mols => {
            reject(big_n, "--big-n");
            Algorithm::Mols { l: need(l, "--l") }
        }
        AlgArg::M2ols => Algorithm::M2ols {
            n: need(big_n, "--big-n"),
            l: need(l, "--l"),
        },
    }
}

fn gen_matrix(args: GenMatrixArgs) -> Result<Value> {
    let spec = DictionarySpec {
        m: args.m,
        n: args.n,
        kind: DictionaryKind::with_offset(args.corr_t),
        seed: args.seed,
    };
    let a = generate(&spec)?;
    save_matrix(&a, &args.out)?;
    let mu = if a.n() >= 2 { Some(coherence(&a)?) } else { None };
    eprintln!("wrote {}x{} matrix to {}", a.m(), a.n(), args.out.display());
    Ok(json!({
        "command": "gen-matrix",
        "params": { "m": args.m, "n": args.n, "T": args.corr_t, "seed": args.seed, "out": path_str(&args.out) },
        "result": { "coherence": mu },
    }))
}

fn gen_signal(args: GenSignalArgs) -> Result<Value> {
    let values = match args.values {
        ValuesArg::Gaussian => SignalValues::Gaussian,
        ValuesArg::Rademacher => SignalValues::Rademacher,
    };
    let x = random_sparse_signal_with(args.n, args.k, args.seed, values)?;
    save_signal(&x, &args.out)?;
    eprintln!("wrote {}-sparse signal of length {} to {}", x.k(), x.n(), args.out.display());
    if let (Some(m), Some(y_out)) = (&args.matrix, &args.y_out) {
        let a = load_matrix(m).with_context(|| format!("reading {}", m.display()))?;
        save_vector(&measure(&a, &x)?, y_out)?;
        eprintln!("wrote measurements to {}", y_out.display());
    }
    Ok(json!({
        "command": "gen-signal",
        "params": {
            "n": args.n, "K": args.k, "seed": args.seed, "values": values,
            "out": path_str(&args.out),
            "matrix": args.matrix.as_deref().map(path_str),
            "y_out": args.y_out.as_deref().map(path_str),
        },
        "result": { "support": x.support(), "norm": x.norm(), "mar": mar(&x) },
    }))
}

struct Measurements {
    a: SensingMatrix,
    x: Option<SparseSignal>,
    y: DVector<f64>,
    achieved_snr: Option<f64>,
}

fn load_measurements(matrix: &Path, signal: Option<&Path>, y: Option<&Path>, snr: Option<f64>, noise_seed: u64) -> Result<Measurements> {
    let a = load_matrix(matrix).with_context(|| format!("reading {}", matrix.display()))?;
    if let Some(sp) = signal {
        let x = load_signal(sp).with_context(|| format!("reading {}", sp.display()))?;
        let (y, achieved) = match snr {
            Some(snr) => {
                let sample = add_noise_at_snr(&a, &x, snr, noise_seed)?;
                (sample.y, Some(sample.achieved_snr))
            }
            None => (measure(&a, &x)?, None),
        };
        Ok(Measurements { a, x: Some(x), y, achieved_snr: achieved })
    } else {
        let yp = y.expect("clap requires --signal or --y");
        let y = load_vector(yp).with_context(|| format!("reading {}", yp.display()))?;
        Ok(Measurements { a, x: None, y, achieved_snr: None })
    }
}

fn recovery_summary(res: &RecoveryResult, with_trace: bool) -> Result<Value> {
    let mut v = serde_json::to_value(res)?;
    let obj = v.as_object_mut().expect("recovery serializes as an object");
    if !with_trace {
        obj.remove("iterations");
    }
    obj.insert("iteration_count".into(), json!(res.iteration_count()));
    obj.insert("residual_norm".into(), json!(res.residual.norm()));
    Ok(v)
}

fn log_recovery(res: &RecoveryResult) {
    let verdict = match res.exact_support_match {
        Some(true) => ", support recovered",
        Some(false) => ", support missed",
        None => "",
    };
    eprintln!(
        "{}: {} iterations, converged = {}{verdict}",
        res.config.algorithm,
        res.iteration_count(),
        res.converged
    );
}

fn recover(args: RecoverArgs) -> Result<Value> {
    let alg = resolve_algorithm("recover", args.alg, args.big_n, args.l);
    let mut cfg = GreedyConfig::new(alg, args.k).with_epsilon(args.eps);
    if let Some(cap) = args.max_iter {
        cfg = cfg.with_max_iterations(cap);
    }
    let meas = load_measurements(&args.matrix, args.signal.as_deref(), args.y.as_deref(), args.snr, args.noise_seed)?;
    let mut res = run(&meas.a, &meas.y, &cfg)?;
    if let Some(x) = &meas.x {
        res = res.with_ground_truth(x.support());
    }
    log_recovery(&res);
    let mut result = recovery_summary(&res, args.json)?;
    if let Some(s) = meas.achieved_snr {
        result["achieved_snr"] = json!(s);
    }
    Ok(json!({
        "command": "recover",
        "params": {
            "matrix": path_str(&args.matrix),
            "signal": args.signal.as_deref().map(path_str),
            "y": args.y.as_deref().map(path_str),
            "algorithm": alg.to_string(),
            "K": cfg.k,
            "N": alg.big_n(),
            "L": alg.l(),
            "epsilon": cfg.epsilon,
            "max_iterations": cfg.max_iterations(),
            "snr": args.snr,
            "noise_seed": args.snr.map(|_| args.noise_seed),
        },
        "result": result,
    }))
}

fn sweep(args: SweepArgs) -> Result<Value> {
    let spec = ExperimentSpec::from_path(&args.spec)?;
    let records = match args.threads {
        Some(0) => usage("sweep", "--threads must be at least 1"),
        Some(t) => run_experiment_with_threads(&spec, t)?,
        None => run_experiment(&spec)?,
    };
    emit_to_path(&records, &args.out)?;
    for r in &records {
        eprintln!(
            "{:<12} m={:<4} K={:<3} p={:.3} ({}/{})",
            r.algorithm, r.m, r.k, r.recovery_probability, r.successes, r.trials
        );
    }
    eprintln!("wrote {} records to {}", records.len(), args.out.display());
    Ok(json!({
        "command": "sweep",
        "params": { "spec": serde_json::to_value(&spec)?, "spec_file": path_str(&args.spec) },
        "out": path_str(&args.out),
        "format": Format::from_path(&args.out),
        "result": records,
    }))
}

fn ric(args: RicArgs) -> Result<Value> {
    let a = load_matrix(&args.matrix).with_context(|| format!("reading {}", args.matrix.display()))?;
    let estimate = match args.samples {
        Some(s) => sampled_ric_lower_bound(&a, args.order, s, args.seed)?,
        None => exact_ric_with_budget(&a, args.order, args.budget)
            .context("exact enumeration failed; --samples gives a sampled lower bound")?,
    };
    eprintln!("delta_{} = {:.6} ({:?})", estimate.order, estimate.delta, estimate.method);
    Ok(json!({
        "command": "ric",
        "params": {
            "matrix": path_str(&args.matrix),
            "order": args.order,
            "samples": args.samples,
            "seed": args.samples.map(|_| args.seed),
            "budget": args.samples.is_none().then_some(args.budget),
        },
        "result": estimate,
    }))
}

fn check(args: CheckArgs) -> Result<Value> {
    if args.lemmas {
        check_lemmas(args)
    } else {
        check_theorem(args)
    }
}

fn check_lemmas(args: CheckArgs) -> Result<Value> {
    let trials = args.trials.unwrap_or(LEMMA_TRIALS);
    let m = args.m.unwrap_or(LEMMA_ROWS);
    let mut dictionaries = Vec::new();
    let (mut checks, mut violations, mut worst) = (0usize, 0usize, f64::INFINITY);
    let mut tally = |source: Value, a: &SensingMatrix, seed: u64| -> Result<()> {
        let report = check_lemma_bounds(a, trials, seed)?;
        checks += report.total_checks();
        violations += report.total_violations();
        worst = worst.min(report.worst_slack());
        dictionaries.push(json!({
            "source": source,
            "ric": report.ric.iter().map(|r| r.delta).collect::<Vec<_>>(),
            "checks": report.total_checks(),
            "violations": report.total_violations(),
            "worst_slack": report.worst_slack(),
            "sandwich_skipped": report.sandwich_skipped,
        }));
        Ok(())
    };
    let params = if let Some(path) = &args.matrix {
        let a = load_matrix(path).with_context(|| format!("reading {}", path.display()))?;
        tally(json!(path_str(path)), &a, args.seed)?;
        json!({ "matrix": path_str(path), "trials": trials, "seed": args.seed })
    } else {
        for i in 0..args.dictionaries as u64 {
            let spec = DictionarySpec {
                m,
                n: args.n,
                kind: DictionaryKind::Gaussian,
                seed: derive_seed(args.seed, &[i, 0]),
            };
            tally(json!({ "dictionary_seed": spec.seed }), &generate(&spec)?, derive_seed(args.seed, &[i, 1]))?;
        }
        json!({ "dictionaries": args.dictionaries, "m": m, "n": args.n, "trials": trials, "seed": args.seed })
    };
    eprintln!("lemma checks: {checks}, violations: {violations}, worst relative slack {worst:.3e}");
    Ok(json!({
        "command": "check",
        "check": "lemmas",
        "params": params,
        "result": { "checks": checks, "violations": violations, "worst_slack": worst, "dictionaries": dictionaries },
    }))
}

fn check_theorem(args: CheckArgs) -> Result<Value> {
    let defaults = TheoremCheckConfig::default();
    let cfg = TheoremCheckConfig {
        wanted: args.trials.unwrap_or(THEOREM_INSTANCES),
        seed: args.seed,
        m: args.m.unwrap_or(defaults.m),
        max_attempts: args.max_attempts,
        ..defaults
    };
    let cert = certify_instances(&cfg)?;
    if cert.instances.len() < cfg.wanted {
        eprintln!(
            "warning: certified {} of {} wanted instances in {} attempts",
            cert.instances.len(),
            cfg.wanted,
            cert.attempts
        );
    }
    let report = if args.theorem2 { check_noisy(&cert)? } else { check_noiseless(&cert)? };
    let name = if args.theorem2 { "theorem2" } else { "theorem1" };
    eprintln!(
        "{name}: {} certified in {} attempts, {} recovered, {} counterexamples",
        report.certified, report.attempts, report.recoveries, report.counterexamples
    );
    Ok(json!({ "command": "check", "check": name, "params": cfg, "result": report }))
}

fn analyze(args: AnalyzeArgs) -> Result<Value> {
    let alg = resolve_algorithm("analyze", args.alg, args.big_n, args.l);
    let cfg = GreedyConfig::new(alg, args.k).with_epsilon(args.eps);
    let meas = load_measurements(&args.matrix, Some(&args.signal), None, args.snr, args.noise_seed)?;
    let x = meas.x.as_ref().expect("analyze loads a signal");
    let res = run(&meas.a, &meas.y, &cfg)?.with_ground_truth(x.support());
    log_recovery(&res);
    let diagnostics = diagnose_run(&meas.a, Some(x), &meas.y, &res)?;
    Ok(json!({
        "command": "analyze",
        "params": {
            "matrix": path_str(&args.matrix),
            "signal": path_str(&args.signal),
            "algorithm": alg.to_string(),
            "K": cfg.k,
            "N": alg.big_n(),
            "L": alg.l(),
            "epsilon": cfg.epsilon,
            "snr": args.snr,
            "noise_seed": args.snr.map(|_| args.noise_seed),
        },
        "result": {
            "recovery": recovery_summary(&res, true)?,
            "achieved_snr": meas.achieved_snr,
            "diagnostics": diagnostics,
        },
    }))
}
