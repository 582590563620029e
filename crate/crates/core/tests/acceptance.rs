//! End-to-end acceptance checks.
//!
//! Desk scale by default; `DCM_FULL_SCALE=1` switches to the full sizes.
//! Each check writes one `PASS`/`FAIL` line straight to stderr so the lines
//! survive output capture, then asserts.

mod common;

use std::io::Write;
use std::time::Instant;

use dcm_lab::branching::{extinction_probability, population_dynamics, simulate_delayed_gw, tilted_laws, Direction, GWSpec, PoolOptions, EXTINCTION_TOL};
use dcm_lab::coupling::{coupled_exploration, coupling_failure_rate, CouplingConfig};
use dcm_lab::degrees::{empirical_distributions, sample_iid_bidegree, wasserstein1, DiscreteLaw, IidParams, JointDegreeLaw};
use dcm_lab::graph::{erase, pair_stubs, Digraph};
use dcm_lab::hopcount::{exact_all_pairs, neighborhood_function, Bfs, HistogramMode, HopcountHistogram, NfMode, Reachability};
use dcm_lab::par::Execution;
use dcm_lab::theory::{dregular_cdf, exact_tail_smalln, floor_log, ks_distance, survival_pair, TheoreticalHopcountLaw};
use dcm_lab::Seed;

const EXEC: Execution = Execution::Parallel;

fn full_scale() -> bool {
    std::env::var("DCM_FULL_SCALE").is_ok_and(|v| v == "1")
}

fn report(name: &str, pass: bool, detail: String, started: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("[acceptance] {verdict} {name}: {detail} ({:.1} s)\n", started.elapsed().as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{name}: {detail}");
}

fn law(spec: &str) -> JointDegreeLaw {
    spec.parse().unwrap()
}

fn iid(law: &JointDegreeLaw, n: usize) -> IidParams {
    IidParams::new(n, JointDegreeLaw::default_delta(law.default_kappa()))
}

/// One configuration-model graph per index, with its own sequence and pairing streams.
fn graph_at(law: &JointDegreeLaw, n: usize, seed: Seed, i: u64) -> Digraph {
    let seq = sample_iid_bidegree(law, iid(law, n), seed.derive2(i, 0)).unwrap();
    pair_stubs(&seq, seed.derive2(i, 1))
}

/// Pooled HyperLogLog histogram over `graphs` graphs and its KS distance
/// to the limiting law.
fn hll_ks(spec: &str, n: usize, graphs: u64, seed: Seed) -> (f64, f64) {
    let law = law(spec);
    let mut pooled = HopcountHistogram::empty(HistogramMode::HllEstimate);
    for i in 0..graphs {
        let g = graph_at(&law, n, seed, i);
        pooled.absorb(&neighborhood_function(&g, NfMode::Hll { p: 10 }, 200, seed.derive2(i, 2), EXEC).to_histogram());
    }
    let th = TheoreticalHopcountLaw::for_law(&law, n as u64, PoolOptions::default(), seed.derive(1 << 20), EXEC).unwrap();
    (ks_distance(&pooled, &th).unwrap(), pooled.finite_fraction())
}

struct Scale {
    n: usize,
    graphs: u64,
}

fn hopcount_scale() -> Scale {
    if full_scale() {
        Scale { n: 1_000_000, graphs: 20 }
    } else {
        Scale { n: 100_000, graphs: 10 }
    }
}

#[test]
fn dregular_hopcounts_follow_the_closed_form() {
    let t = Instant::now();
    let s = hopcount_scale();
    let bound = if full_scale() { 5e-3 } else { 1e-2 };
    let (ks, _) = hll_ks("dregular:3", s.n, s.graphs, Seed(1001));
    report("d-regular(3) KS", ks <= bound, format!("n = {}, {} graphs, KS = {ks:.5} <= {bound}", s.n, s.graphs), t);
}

#[test]
fn poisson_pareto_hopcounts_follow_the_limit_law() {
    let t = Instant::now();
    let s = hopcount_scale();
    let (ks, _) = hll_ks("pp-indep", s.n, s.graphs, Seed(1002));
    let (lo, hi) = if full_scale() { (0.03, 0.09) } else { (0.0, 0.12) };
    report("PP independent KS", (lo..=hi).contains(&ks), format!("n = {}, {} graphs, KS = {ks:.5} in [{lo}, {hi}]", s.n, s.graphs), t);
}

#[test]
fn zipf_hopcounts_follow_the_limit_law() {
    let t = Instant::now();
    let s = hopcount_scale();
    let (ks, _) = hll_ks("zipf-equal:3.5,1000", s.n, s.graphs, Seed(1003));
    let (lo, hi) = if full_scale() { (0.01, 0.07) } else { (0.0, 0.12) };
    report("Zipf equal KS", (lo..=hi).contains(&ks), format!("n = {}, {} graphs, KS = {ks:.5} in [{lo}, {hi}]", s.n, s.graphs), t);
}

#[test]
fn finite_fraction_is_the_survival_product() {
    let t = Instant::now();
    let law = law("pp-indep");
    let (n, graphs, pairs) = (100_000, 10u64, 100_000usize);
    let seed = Seed(1004);
    let (mut hits, mut total) = (0u64, 0u64);
    for i in 0..graphs {
        let g = graph_at(&law, n, seed, i);
        let (h, _) = Reachability::new(&g).sample_finite_fraction(pairs, seed.derive2(i, 2));
        hits += h as u64;
        total += pairs as u64;
    }
    let frac = hits as f64 / total as f64;
    let (sp, sm) = survival_pair(&law.limit_laws().unwrap());
    let gap = (frac - sp * sm).abs();
    report("PP finite fraction", gap <= 0.02, format!("{frac:.4} vs s+ s- = {:.4}, gap {gap:.4} <= 0.02", sp * sm), t);
}

#[test]
fn coupling_failures_shrink_with_n() {
    let t = Instant::now();
    let (delta, gamma, reps) = (0.5, 0.05, 500);
    let rates = |spec: &str| -> Vec<(usize, usize, f64)> {
        let law = law(spec);
        [1_000usize, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let k = CouplingConfig::max_k(n, delta, law.mu());
                let cfg = CouplingConfig { n, delta, gamma, k, reps, eps: 0.1, kappa: None };
                let r = coupling_failure_rate(&law, &cfg, Seed(1005), EXEC).unwrap().unwrap();
                (n, k, r.freq_any_deficit_exceeds)
            })
            .collect()
    };
    let show = |v: &[(usize, usize, f64)]| v.iter().map(|(n, k, f)| format!("n={n} k={k}: {f:.3}")).collect::<Vec<_>>().join(", ");
    // heavier tails, reported for reference only
    let pp = rates("pp-indep");
    let _ = std::io::stderr().write_all(format!("[acceptance] INFO coupling PP independent: {}\n", show(&pp)).as_bytes());
    let r = rates("poisson-indep:2");
    let monotone = r.windows(2).all(|w| w[1].2 <= w[0].2);
    let last = r[2].2;
    report("coupling failure rate", monotone && last <= 0.05, format!("Poisson(2) independent, {}; nonincreasing {monotone}, last <= 0.05", show(&r)), t);
}

fn floyd_warshall_matches(seed: Seed) -> bool {
    (0..50u64).all(|s| {
        let spec = ["poisson-indep:1.5", "pp-indep", "dregular:2"][s as usize % 3];
        let n = 20 + (s as usize * 37) % 181;
        let g = common::graph(spec, n, seed.derive(s));
        let mut counts = vec![0.0; n];
        for (i, row) in common::floyd_warshall(&g).iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if i != j && x != u32::MAX {
                    counts[x as usize] += 1.0;
                }
            }
        }
        let nf = neighborhood_function(&g, NfMode::Exact, n, Seed(0), EXEC);
        let h = exact_all_pairs(&g, EXEC);
        let mut within = 0.0;
        (1..n).all(|t| {
            within += counts[t];
            h.counts.get(t).copied().unwrap_or(0.0) == counts[t] && nf.values[t] - nf.values[0] == within
        })
    })
}

fn lazy_tail_matches_bfs(seed: Seed) -> (bool, f64) {
    let seq = common::sequence("pp-indep", 1000, seed);
    let (k, graphs) = (10, 40u64);
    let n = seq.n() as f64;
    let tails: Vec<Vec<f64>> = (0..graphs)
        .map(|s| {
            let h = exact_all_pairs(&pair_stubs(&seq, seed.derive(s + 1)), EXEC);
            (0..=k).map(|t| 1.0 - h.counts.iter().take(t + 1).sum::<f64>() / (n * (n - 1.0))).collect()
        })
        .collect();
    let est = exact_tail_smalln(&seq, k, 100_000, seed.derive(0), EXEC);
    let m = graphs as f64;
    let mut worst: f64 = 0.0;
    for t in 1..=k {
        let mean = tails.iter().map(|v| v[t]).sum::<f64>() / m;
        let se2 = tails.iter().map(|v| (v[t] - mean).powi(2)).sum::<f64>() / (m - 1.0) / m;
        let sigma = (se2 + est.std_error[t].powi(2)).sqrt();
        if sigma > 0.0 {
            worst = worst.max((est.tail[t] - mean).abs() / sigma);
        }
    }
    (worst <= 3.0, worst)
}

fn hll_within_five_percent(seed: Seed) -> (bool, f64) {
    let mut worst: f64 = 0.0;
    for (s, spec) in ["pp-indep", "poisson-indep:2", "dregular:3"].iter().enumerate() {
        let g = common::graph(spec, 1000, seed.derive(s as u64));
        let exact = neighborhood_function(&g, NfMode::Exact, 60, Seed(0), EXEC);
        let hll = neighborhood_function(&g, NfMode::Hll { p: 12 }, 60, seed.derive(10 + s as u64), EXEC);
        for t in 1..=60 {
            let e = exact.values[t];
            if e >= 1e4 {
                worst = worst.max((hll.values[t] - e).abs() / e);
            }
        }
    }
    (worst <= 0.05, worst)
}

#[test]
fn oracles_agree() {
    let t = Instant::now();
    let fw = floyd_warshall_matches(Seed(1006));
    let (tail, z) = lazy_tail_matches_bfs(Seed(1007));
    let (hll, rel) = hll_within_five_percent(Seed(1008));
    report(
        "oracles",
        fw && tail && hll,
        format!("Floyd-Warshall on 50 graphs {fw}; lazy tail worst {z:.2} sigma; HLL worst relative error {rel:.4}"),
        t,
    );
}

fn degrees_preserved(seed: Seed) -> bool {
    (0..30u64).all(|s| {
        let spec = ["dregular:3", "poisson-indep:2", "pp-indep"][s as usize % 3];
        let seq = common::sequence(spec, 50 + 97 * s as usize, seed.derive(s));
        let back = pair_stubs(&seq, seed.derive(100 + s)).degree_sequence();
        back.d_minus() == seq.d_minus() && back.d_plus() == seq.d_plus()
    })
}

fn sandwich_on_every_trace(seed: Seed) -> bool {
    (0..60u64).all(|s| {
        let spec = ["poisson-indep:2", "pp-indep", "zipf-equal:3.5,1000"][s as usize % 3];
        let dir = if s % 2 == 0 { Direction::Out } else { Direction::In };
        let seq = common::sequence(spec, 200 + 83 * s as usize, seed.derive(s));
        let gw = GWSpec::from_limits(&law(spec).limit_laws().unwrap(), dir);
        coupled_exploration(&seq, &gw, dir, 6, seed.derive(100 + s)).unwrap().sandwich_holds()
    })
}

/// Worst `|mean - 1| / se` of `Ẑ_k / (ν μ^{k-1})` over independent paths.
fn martingale_mean_is_one(seed: Seed) -> (bool, f64) {
    let gw = GWSpec::from_limits(&law("poisson-indep:2").limit_laws().unwrap(), Direction::Out);
    let paths: Vec<_> = (0..10_000).map(|r| simulate_delayed_gw(&gw, 10, seed.derive(r)).unwrap()).collect();
    let worst = (1..=10)
        .map(|k| {
            let w: Vec<f64> = paths.iter().map(|p| p.w[k]).collect();
            let m = w.len() as f64;
            let mean = w.iter().sum::<f64>() / m;
            let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
            (mean - 1.0).abs() / (var / m).sqrt()
        })
        .fold(0.0, f64::max);
    (worst <= 3.0, worst)
}

fn metric_axioms(seed: Seed) -> bool {
    let mut rng = seed.rng();
    (0..200).all(|_| {
        let mut draw = || {
            let w: Vec<f64> = (0..8).map(|_| rand::Rng::random::<f64>(&mut rng) + 1e-3).collect();
            DiscreteLaw::from_weights(&w).unwrap()
        };
        let (p, q, r) = (draw(), draw(), draw());
        let d = |a: &DiscreteLaw, b: &DiscreteLaw| wasserstein1(a, b).value;
        d(&p, &p) == 0.0 && d(&p, &q) == d(&q, &p) && d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12
    })
}

fn empirical_means_within_d1(seed: Seed) -> bool {
    (0..20u64).all(|s| {
        let spec = ["poisson-indep:2", "pp-indep", "zipf-equal:3.5,1000", "poisson-equal:1.5"][s as usize % 4];
        let limits = law(spec).limit_laws().unwrap();
        let emp = empirical_distributions(&common::sequence(spec, 100 + 149 * s as usize, seed.derive(s))).unwrap();
        (emp.nu_n - limits.nu).abs() <= wasserstein1(&emp.g_plus, &limits.g_plus).upper() + 1e-9
            && (emp.mu_n - limits.mu).abs() <= wasserstein1(&emp.f_plus, &limits.f_plus).upper() + 1e-9
    })
}

fn tilts_normalize() -> bool {
    ["poisson-indep:1.5", "poisson-indep:2", "pp-indep"].iter().all(|spec| {
        let gw = GWSpec::from_limits(&law(spec).limit_laws().unwrap(), Direction::Out);
        let q = extinction_probability(&gw.f, EXTINCTION_TOL).q;
        let (g, f) = tilted_laws(&gw.g, &gw.f, q).unwrap();
        [g, f].iter().all(|l| (l.pmf_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12)
    })
}

fn zero_fraction_is_extinction(seed: Seed) -> (bool, f64) {
    let gw = GWSpec::from_limits(&law("pp-indep").limit_laws().unwrap(), Direction::Out);
    let opts = PoolOptions::default();
    let q = extinction_probability(&gw.f, EXTINCTION_TOL).q;
    let extinct = 1.0 - dcm_lab::branching::survival_probability(&gw.g, q);
    let pool = population_dynamics(&gw, opts, seed, EXEC);
    let z = (pool.zero_fraction - extinct).abs() / (extinct * (1.0 - extinct) / opts.pool_size as f64).sqrt();
    (z <= 3.0, z)
}

fn erasing_keeps_distances(seed: Seed) -> bool {
    let n = 500;
    let (mut a, mut b) = (Bfs::new(n), Bfs::new(n));
    (0..10u64).all(|s| {
        let g = common::graph(["poisson-indep:2", "pp-indep"][s as usize % 2], n, seed.derive(s));
        let h = erase(&g);
        (0..n).all(|src| {
            a.run(&g, src);
            b.run(&h, src);
            (0..n).all(|v| a.dist(v) == b.dist(v))
        })
    })
}

fn dregular_theory_is_closed_form() -> bool {
    [(2u32, 1_000u64), (3, 100_000), (5, 123_456_789)].iter().all(|&(d, n)| {
        let th = TheoreticalHopcountLaw::for_law(&JointDegreeLaw::DRegular { d }, n, PoolOptions { pool_size: 4, generations: 1 }, Seed(0), EXEC).unwrap();
        let ok = (-40..=40).all(|x| (th.cdf(x as f64).unwrap() - dregular_cdf(d, n, x as f64)).abs() <= 1e-12);
        // the printed exponent, one step behind the corrected one
        let shifted = |x: i64| -(-(d as f64).powi((floor_log(d as f64, n) + x) as i32) / ((d as f64 - 1.0) * n as f64)).exp_m1();
        ok && (-40..40).all(|x| (dregular_cdf(d, n, x as f64) - shifted(x + 1)).abs() <= 1e-15)
    })
}

#[test]
fn invariants_hold() {
    let t = Instant::now();
    let (mart, mart_z) = martingale_mean_is_one(Seed(1010));
    let (zero, zero_z) = zero_fraction_is_extinction(Seed(1011));
    let checks = [
        ("degree preservation", degrees_preserved(Seed(1012))),
        ("sandwich", sandwich_on_every_trace(Seed(1013))),
        ("martingale mean", mart),
        ("d1 axioms", metric_axioms(Seed(1014))),
        ("means within d1", empirical_means_within_d1(Seed(1015))),
        ("tilt normalization", tilts_normalize()),
        ("zero fraction", zero),
        ("erase invariance", erasing_keeps_distances(Seed(1016))),
        ("d-regular closed form", dregular_theory_is_closed_form()),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    report(
        "invariants",
        failed.is_empty(),
        format!("{} checks, failed {failed:?}; martingale mean worst {mart_z:.2} sigma, zero fraction {zero_z:.2} sigma", checks.len()),
        t,
    );
}
