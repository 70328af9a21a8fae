use super::*;
use crate::rng::rng;
use proptest::prelude::*;

fn table_game(values: Vec<f64>) -> FnValue<impl Fn(Coalition, u64) -> f64 + Sync> {
    let n = values.len().trailing_zeros() as usize;
    FnValue::new("table", n, true, move |s: Coalition, _| {
        values[s.mask() as usize]
    })
}

fn random_values(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..1 << n).map(|_| r.random_range(-1.0..1.0)).collect()
}

fn exact(values: Vec<f64>) -> Vec<f64> {
    let g = table_game(values);
    exact_shapley(&mut Oracle::new(&g, 0), DEFAULT_PLAYER_CAP)
        .unwrap()
        .phi
}

#[test]
fn weights() {
    assert_eq!(weight(0, 5).unwrap(), 0.2);
    let w3: Vec<f64> = (0..3).map(|m| weight(m, 3).unwrap()).collect();
    assert!((w3[0] - 1.0 / 3.0).abs() < 1e-16 && (w3[1] - 1.0 / 6.0).abs() < 1e-16);
    assert!((w3[2] - 1.0 / 3.0).abs() < 1e-16);
    assert!(weight(3, 3).is_err());
    for n in 1..=12 {
        let total: f64 = (0..n)
            .map(|m| binomial(n - 1, m) * weight(m, n).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn alpha_arithmetic() {
    assert_eq!(alpha_to_n(1.0, 5).unwrap(), 16);
    assert_eq!(alpha_to_n(0.01, 21).unwrap(), 10486);
    assert_eq!(alpha_to_n(0.001, 14).unwrap(), 9);
    assert!(alpha_to_n(0.0, 3).is_err());
    assert!(alpha_to_n(1.5, 3).is_err());
}

#[test]
fn unanimity_and_additive() {
    let unanimity: Vec<f64> = (0..8).map(|m| if m == 7 { 1.0 } else { 0.0 }).collect();
    for phi in exact(unanimity) {
        assert!((phi - 1.0 / 3.0).abs() < 1e-15);
    }
    let c = [0.5, -1.25, 2.0, 0.125];
    let additive: Vec<f64> = (0..16u64)
        .map(|m| Coalition(m).players().map(|p| c[p]).sum())
        .collect();
    for (phi, ci) in exact(additive).iter().zip(c) {
        assert!((phi - ci).abs() < 1e-14);
    }
}

fn permutation_oracle(values: &[f64]) -> Vec<f64> {
    let n = values.len().trailing_zeros() as usize;
    let mut phi = vec![0.0; n];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut count = 0.0;
    // Heap's algorithm over all orders
    fn visit(k: usize, perm: &mut Vec<usize>, values: &[f64], phi: &mut [f64], count: &mut f64) {
        if k == 1 {
            let mut s = 0usize;
            for &p in perm.iter() {
                phi[p] += values[s | 1 << p] - values[s];
                s |= 1 << p;
            }
            *count += 1.0;
            return;
        }
        for i in 0..k {
            visit(k - 1, perm, values, phi, count);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            perm.swap(j, k - 1);
        }
    }
    visit(n, &mut perm, values, &mut phi, &mut count);
    phi.iter().map(|p| p / count).collect()
}

#[test]
fn matches_permutation_oracle() {
    for seed in 0..20 {
        let n = 1 + (seed % 8) as usize;
        let values = random_values(n, seed);
        let want = permutation_oracle(&values);
        for (a, b) in exact(values).iter().zip(want) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn estimate_full_reduces_to_exact_for_deterministic_games() {
    let values = random_values(5, 3);
    let g = table_game(values.clone());
    let e1 = estimate_full(&mut Oracle::new(&g, 1), 1, 24).unwrap();
    let e3 = estimate_full(&mut Oracle::new(&g, 9), 3, 24).unwrap();
    assert_eq!(e1.phi, exact(values.clone()));
    assert_eq!(e3.phi, e1.phi);
    assert_eq!(e3.evaluations, 3 * e1.evaluations);
}

#[test]
fn noisy_full_counts_every_realization() {
    let g = FnValue::new("noisy", 3, false, |s: Coalition, seed| {
        s.len() as f64 + (seed % 3) as f64
    });
    let mut o = Oracle::new(&g, 4);
    let e = estimate_full(&mut o, 2, 24).unwrap();
    assert_eq!(e.evaluations, 16);
    assert_eq!(o.computed(), 16);
    let mut o = Oracle::new(&g, 4);
    assert_eq!(estimate_full(&mut o, 1, 24).unwrap().evaluations, 8);
}

#[test]
fn sampled_is_exact_on_additive_games() {
    let c = [0.3, -0.7, 1.1, 0.0, 2.5];
    let g = deterministic_game(5, move |s| s.players().map(|p| c[p]).sum());
    for seed in 0..5 {
        let e = estimate_sampled(&mut Oracle::new(&g, seed), 3, 2).unwrap();
        for (phi, ci) in e.phi.iter().zip(c) {
            assert!((phi - ci).abs() < 1e-12);
        }
        assert_eq!(e.evaluations, 2 * 3 * 5 * 2);
    }
}

#[test]
fn sampled_noisy_uses_at_most_2nnk_samples() {
    let g = FnValue::new("noisy", 6, false, |s: Coalition, seed| {
        s.len() as f64 + (seed % 5) as f64
    });
    let mut o = Oracle::new(&g, 8);
    let e = estimate_sampled(&mut o, 4, 3).unwrap();
    assert_eq!(o.computed(), 2 * 4 * 6 * 3);
    assert_eq!(e.evaluations, 2 * 4 * 6 * 3);
    assert!(matches!(e.table, ValueTable::Sparse(_)));
}

#[test]
fn size_draws_are_uniform() {
    let mut r = rng(17);
    let mut by_size = [0u32; 6];
    for _ in 0..60_000 {
        let s = draw_coalition(&mut r, 2, 6);
        assert!(!s.contains(2));
        by_size[s.len()] += 1;
    }
    for c in by_size {
        // each size has probability 1/6, sd ≈ 91
        assert!((c as f64 - 10_000.0).abs() < 500.0, "{by_size:?}");
    }
}

#[test]
fn unanimity_marginal_distribution() {
    let unanimity: Vec<f64> = (0..8).map(|m| if m == 7 { 1.0 } else { 0.0 }).collect();
    let d = MarginalDistribution::from_table(&unanimity);
    assert_eq!(d.players[0].len(), 2);
    assert!((d.players[0][0].weight - 2.0 / 3.0).abs() < 1e-15);
    assert!((d.players[0][1].weight - 1.0 / 3.0).abs() < 1e-15);
    assert!((d.std_dev(0) - (1.0f64 / 3.0 - 1.0 / 9.0).sqrt()).abs() < 1e-15);
    let additive: Vec<f64> = (0..8u64).map(|m| Coalition(m).len() as f64).collect();
    let d = MarginalDistribution::from_table(&additive);
    assert_eq!(
        d.players[1],
        vec![Marginal {
            delta: 1.0,
            weight: 1.0
        }]
    );
    assert_eq!(d.std_dev(1), 0.0);
    assert!(marginals_to_csv(&d).starts_with("player,delta,weight\n1,1.0,1.0\n"));
}

#[test]
fn pareto_of_monotone_game_is_diagonal() {
    let values: Vec<f64> = (0..16u64).map(|m| Coalition(m).len() as f64).collect();
    let sets = value_multisets(&ValueTable::Dense(values));
    assert_eq!(sets[&0], vec![(Coalition(0), 0.0)]);
    assert_eq!(sets[&4], vec![(Coalition(15), 4.0)]);
    let rows = pareto_frontier(&sets);
    for row in &rows {
        assert_eq!(row.best, row.k as f64);
        assert_eq!(row.frontier, row.k as f64);
        assert!(row.pareto);
    }
    assert_eq!(rows[1].argmax.len(), 4);
}

#[test]
fn report_aggregates_runs() {
    let g = FnValue::new("noisy", 3, false, |s: Coalition, seed| {
        s.len() as f64 + (seed % 2) as f64
    });
    let cfg = EstimatorConfig {
        k: 2,
        runs: 3,
        seed: 1,
        ..Default::default()
    };
    let seeds: Vec<u64> = (0..cfg.runs).map(|r| cfg.run_seed(r)).collect();
    let runs: Vec<Estimate> = seeds
        .iter()
        .map(|&s| estimate(&mut Oracle::new(&g, s), &cfg).unwrap())
        .collect();
    let info: Vec<PlayerInfo> = (0..3)
        .map(|i| PlayerInfo {
            gate_index: Some(i + 1),
            name: "RY".into(),
        })
        .collect();
    let report = ShapleyReport::from_runs(&runs, &cfg, &seeds, &info).unwrap();
    assert_eq!(report.method, Method::Full);
    assert_eq!(report.evaluations, 3 * 16);
    let back = ShapleyReport::from_json_str(&report.to_json()).unwrap();
    assert_eq!(back, report);
    assert!(report.to_json().contains("\"method\": \"full-K\""));
    assert!(report.summary_csv().lines().count() == 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn efficiency(n in 1usize..=10, seed in any::<u64>()) {
        let values = random_values(n, seed);
        let total: f64 = exact(values.clone()).iter().sum();
        prop_assert!((total - (values[(1 << n) - 1] - values[0])).abs() < 1e-10);
    }

    #[test]
    fn linearity(n in 1usize..=10, seed in any::<u64>()) {
        let a = random_values(n, seed);
        let b = random_values(n, seed ^ 0x55);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (pa, pb, ps) = (exact(a), exact(b), exact(sum));
        for i in 0..n {
            prop_assert!((ps[i] - pa[i] - pb[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn dummy_and_symmetry(n in 3usize..=10, seed in any::<u64>()) {
        // player 0 is a dummy; players 1 and 2 are interchangeable
        let base = random_values(n, seed);
        let canon = |m: usize| {
            let m = m & !1;
            let (b1, b2) = (m >> 1 & 1, m >> 2 & 1);
            if b1 == 1 && b2 == 0 { m ^ 0b110 } else { m }
        };
        let values: Vec<f64> = (0..1usize << n).map(|m| base[canon(m)]).collect();
        let phi = exact(values);
        prop_assert_eq!(phi[0], 0.0);
        prop_assert!((phi[1] - phi[2]).abs() < 1e-12);
    }

    #[test]
    fn affine_invariance_of_ranking(n in 2usize..=8, seed in any::<u64>(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let values = random_values(n, seed);
        let scaled: Vec<f64> = values.iter().map(|v| a * v + b).collect();
        let (p, q) = (exact(values), exact(scaled));
        for i in 0..n {
            prop_assert!((q[i] - a * p[i]).abs() < 1e-9);
        }
        let argmax = |v: &[f64]| (0..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best });
        let gap = {
            let mut s = p.clone();
            s.sort_by(|x, y| y.total_cmp(x));
            s[0] - s[1]
        };
        if gap > 1e-9 {
            prop_assert_eq!(argmax(&p), argmax(&q));
        }
    }
}
