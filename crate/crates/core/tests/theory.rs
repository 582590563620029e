mod common;

use proptest::prelude::*;

use dcm_lab::branching::PoolOptions;
use dcm_lab::degrees::{BiDegreeSequence, JointDegreeLaw};
use dcm_lab::graph::pair_stubs;
use dcm_lab::hopcount::exact_all_pairs;
use dcm_lab::par::Execution;
use dcm_lab::theory::{dregular_cdf, exact_tail_smalln, floor_log, survival_product_p, TheoreticalHopcountLaw};
use dcm_lab::Seed;

fn small_pools() -> PoolOptions {
    PoolOptions {
        pool_size: 20_000,
        generations: 20,
    }
}

#[test]
fn limiting_cdf_is_a_distribution_function() {
    for spec in ["pp-indep", "zipf-equal:3.5,1000", "poisson-indep:2"] {
        let law: JointDegreeLaw = spec.parse().unwrap();
        let th = TheoreticalHopcountLaw::for_law(&law, 100_000, small_pools(), Seed(1), Execution::Parallel).unwrap();
        let values: Vec<f64> = (-40..=40).map(|x| th.cdf(x as f64).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "{spec}");
        // what is left at +40 comes from lineages the pool truncated to tiny W
        let tiny = th.conditioned_products.iter().filter(|&&w| w < 1e-6).count() as f64 / th.conditioned_products.len() as f64;
        assert!(values[0] < 1e-6 && 1.0 - values[80] <= tiny + 1e-9, "{spec}: {} {} ({tiny})", values[0], values[80]);
        assert_eq!(th.cdf(f64::NEG_INFINITY).unwrap(), 0.0);
        assert_eq!(th.cdf(f64::INFINITY).unwrap(), 1.0);
        // the CDF is constant between integers
        assert_eq!(th.cdf(0.3).unwrap(), th.cdf(0.0).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dregular_limit_collapses_to_closed_form(d in 2u32..7, n in 2u64..1_000_000_000) {
        let law = JointDegreeLaw::DRegular { d };
        let th = TheoreticalHopcountLaw::for_law(&law, n, PoolOptions { pool_size: 4, generations: 1 }, Seed(0), Execution::Sequential).unwrap();
        for x in -40..=40 {
            let (a, b) = (th.cdf(x as f64).unwrap(), dregular_cdf(d, n, x as f64));
            prop_assert!((a - b).abs() <= 1e-12, "x = {}: {} vs {}", x, a, b);
        }
    }

    #[test]
    fn closed_form_is_the_shifted_exponent_form(d in 2u32..7, n in 2u64..1_000_000_000, x in -40i64..40) {
        // 1 - exp(-d^{⌊log_d n⌋ + ⌊x⌋} / ((d - 1) n)) read one step later
        let shifted = |x: i64| {
            let e = floor_log(d as f64, n) + x;
            -(-(d as f64).powi(e as i32) / ((d as f64 - 1.0) * n as f64)).exp_m1()
        };
        prop_assert!((dregular_cdf(d, n, x as f64) - shifted(x + 1)).abs() <= 1e-15);
    }

    #[test]
    fn survival_product_is_a_probability_decreasing_in_marks(a in 0u64..200, b in 0u64..200, extra in 0u64..400) {
        let l = a + b + extra;
        let p = survival_product_p(a, b, l);
        prop_assert!((0.0..=1.0).contains(&p));
        if a + b < l {
            prop_assert!(survival_product_p(a, b + 1, l) <= p);
        }
    }
}

/// `P(H > k)` over all ordered distinct pairs of `graphs` pairings of `seq`,
/// with the between-graph standard error.
fn bfs_tails(seq: &BiDegreeSequence, k: usize, graphs: u64, seed: Seed) -> (Vec<f64>, Vec<f64>) {
    let n = seq.n() as f64;
    let per_graph: Vec<Vec<f64>> = (0..graphs)
        .map(|s| {
            let h = exact_all_pairs(&pair_stubs(seq, seed.derive(s)), Execution::Parallel);
            (0..=k).map(|t| 1.0 - h.counts.iter().take(t + 1).sum::<f64>() / (n * (n - 1.0))).collect()
        })
        .collect();
    let m = graphs as f64;
    let mean: Vec<f64> = (0..=k).map(|t| per_graph.iter().map(|v| v[t]).sum::<f64>() / m).collect();
    let se = (0..=k)
        .map(|t| (per_graph.iter().map(|v| (v[t] - mean[t]).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt())
        .collect();
    (mean, se)
}

#[test]
fn lazy_exploration_matches_bfs_over_pairings() {
    for (law, n, graphs, reps, k) in [("poisson-indep:1.5", 50, 1000, 200_000, 8), ("pp-indep", 1000, 40, 100_000, 10)] {
        let seq = common::sequence(law, n, Seed(70));
        let (bfs, bfs_se) = bfs_tails(&seq, k, graphs, Seed(71));
        let est = exact_tail_smalln(&seq, k, reps, Seed(72), Execution::Parallel);
        assert!(est.tail.windows(2).all(|w| w[1] <= w[0]));
        for t in 1..=k {
            let sigma = (bfs_se[t].powi(2) + est.std_error[t].powi(2)).sqrt();
            assert!((est.tail[t] - bfs[t]).abs() <= 3.0 * sigma, "{law} n = {n}, k = {t}: {} vs {} (σ {sigma})", est.tail[t], bfs[t]);
        }
    }
}

#[test]
fn lazy_exploration_matches_enumeration_at_one_step() {
    // d-regular(2) on 4 nodes: every one of the 8! stub pairings
    let seq = BiDegreeSequence::from_pairs(&[(2, 2); 4]).unwrap();
    let owner = [0usize, 0, 1, 1, 2, 2, 3, 3];
    let mut perm: Vec<usize> = (0..8).collect();
    let (mut far, mut total) = (0u64, 0u64);
    let mut c = [0usize; 8];
    let mut visit = |perm: &[usize]| {
        let mut adj = [[false; 4]; 4];
        for (o, &i) in perm.iter().enumerate() {
            adj[owner[o]][owner[i]] = true;
        }
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    total += 1;
                    far += !adj[i][j] as u64;
                }
            }
        }
    };
    // Heap's algorithm
    visit(&perm);
    let mut i = 0;
    while i < 8 {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    assert_eq!(total, 40320 * 12);
    let exact = far as f64 / total as f64;
    let est = exact_tail_smalln(&seq, 1, 1000, Seed(3), Execution::Sequential);
    assert!((est.tail[1] - exact).abs() < 1e-12, "{} vs {exact}", est.tail[1]);
}
