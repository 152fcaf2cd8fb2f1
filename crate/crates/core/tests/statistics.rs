//! Seed-ensemble checks on the random generators.

use m2ols_core::dictionary::{generate, mean_pairwise_coherence, DictionaryKind, DictionarySpec};
use m2ols_core::signals::random_sparse_signal;

#[test]
fn offsets_raise_mean_coherence() {
    let (m, n, seeds) = (128, 256, 1000u64);
    let mean = |kind: DictionaryKind| -> f64 {
        (0..seeds)
            .map(|seed| {
                let a = generate(&DictionarySpec { m, n, kind, seed }).unwrap();
                mean_pairwise_coherence(&a).unwrap()
            })
            .sum::<f64>()
            / seeds as f64
    };
    let gaussian = mean(DictionaryKind::Gaussian);
    let correlated = mean(DictionaryKind::Correlated { t: 8.0 });
    // For i.i.d. Gaussian columns E|<φ_i, φ_j>| ≈ sqrt(2 / (π m)).
    assert!((gaussian - (2.0 / (std::f64::consts::PI * m as f64)).sqrt()).abs() < 5e-3);
    assert!(correlated > gaussian, "correlated {correlated} vs gaussian {gaussian}");
}

#[test]
fn support_inclusion_is_uniform() {
    let (n, k, seeds) = (256usize, 10usize, 10_000u64);
    let mut hits = vec![0u64; n];
    for seed in 0..seeds {
        for j in random_sparse_signal(n, k, seed).unwrap().support().iter() {
            hits[j] += 1;
        }
    }
    let p = k as f64 / n as f64;
    let expected = p * seeds as f64;
    let sigma = (seeds as f64 * p * (1.0 - p)).sqrt();
    // 256 marginals at 3σ: a handful may stray; allow the binomial tail count.
    let outside = hits.iter().filter(|&&h| (h as f64 - expected).abs() > 3.0 * sigma).count();
    assert!(outside <= 4, "{outside} indices outside 3σ");
    assert!(hits.iter().all(|&h| (h as f64 - expected).abs() < 5.0 * sigma));
}
