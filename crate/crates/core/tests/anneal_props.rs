use echoplace::anneal::{anneal, permute_state, test_state, AnnealParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap()
}

#[test]
fn metropolis_acceptance_at_end_temperature() {
    let p = AnnealParams::default();
    assert!((p.t_end - 0.006514).abs() < 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draws = 100_000;
    let accepted = (0..draws).filter(|_| test_state(0.5, 0.47, p.t_end, &mut rng)).count();
    let rate = accepted as f64 / draws as f64;
    assert!((rate - 0.01).abs() <= 0.002, "{rate}");
}

#[test]
fn proposals_cover_every_candidate() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = [0usize; 100];
    let mut cur = 0;
    for _ in 0..10_000 {
        cur = permute_state(cur, 100, &mut rng).unwrap();
        counts[cur] += 1;
    }
    assert!(counts.iter().all(|&c| c > 0));
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - 100.0).powi(2) / 100.0).sum();
    // 99 degrees of freedom; 0.999 quantile is about 148.
    assert!(chi2 < 148.0, "{chi2}");
}

#[test]
fn synthetic_problems_recover_the_argmax() {
    let params = |seed| AnnealParams { alpha: 0.995, k_reject: 100, seed, ..Default::default() };
    let hits = (0..100u64)
        .filter(|&seed| {
            let t = table(seed, 50);
            anneal(50, &params(seed), |i| Ok(t[i])).unwrap().best == argmax(&t)
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn default_schedule_runs_in_the_expected_regime() {
    let t = table(0, 400);
    let out = anneal(400, &AnnealParams { k_reject: usize::MAX, ..Default::default() }, |i| Ok(t[i])).unwrap();
    assert_eq!(out.trace.iterations(), 37);
    assert!((30..=80).contains(&out.trace.iterations()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn best_never_falls_below_the_start(seed in 0u64..10_000, n in 1usize..80) {
        let t = table(seed, n);
        let out = anneal(n, &AnnealParams { seed, ..Default::default() }, |i| Ok(t[i])).unwrap();
        prop_assert!(out.best_q >= out.initial_q);
        prop_assert_eq!(out.best_q, t[out.best]);
        let mut last = f64::NEG_INFINITY;
        for r in &out.trace.rows {
            prop_assert!(r.best_q >= last);
            last = r.best_q;
        }
    }

    #[test]
    fn fixed_seed_fixes_the_trace(seed in 0u64..10_000) {
        let t = table(seed, 30);
        let a = anneal(30, &AnnealParams { seed, ..Default::default() }, |i| Ok(t[i])).unwrap();
        let b = anneal(30, &AnnealParams { seed, ..Default::default() }, |i| Ok(t[i])).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn early_stop_after_k_rejections(seed in 0u64..1000, k in 1usize..6) {
        // A flat-then-cliff objective: every move away from the start is much worse.
        let out = anneal(20, &AnnealParams { seed, k_reject: k, t0: 1e-3, t_end: 1e-9, alpha: 0.9 }, |i| Ok(if i == 0 { 1.0 } else { 0.0 })).unwrap();
        let tail = out.trace.rows.iter().rev().take_while(|r| !r.accepted).count();
        prop_assert!(tail <= k);
    }
}
