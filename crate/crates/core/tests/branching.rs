use dcm_lab::branching::{
    extinction_probability, population_dynamics, simulate_delayed_gw, survival_probability, tilted_laws, Direction, GWSpec, PoolOptions, EXTINCTION_TOL,
};
use dcm_lab::degrees::{DiscreteLaw, JointDegreeLaw};
use dcm_lab::par::Execution;
use dcm_lab::Seed;

fn spec(law: &str, dir: Direction) -> GWSpec {
    let law: JointDegreeLaw = law.parse().unwrap();
    GWSpec::from_limits(&law.limit_laws().unwrap(), dir)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[test]
fn normalized_generation_sizes_have_mean_one() {
    for (law, dir) in [("poisson-indep:2", Direction::Out), ("poisson-equal:1.5", Direction::In)] {
        let s = spec(law, dir);
        let paths: Vec<_> = (0..10_000).map(|r| simulate_delayed_gw(&s, 10, Seed(3).derive(r)).unwrap()).collect();
        for k in 1..=10 {
            let w: Vec<f64> = paths.iter().map(|p| p.w[k]).collect();
            let (mean, se) = mean_and_se(&w);
            assert!((mean - 1.0).abs() <= 3.0 * se, "{law} k = {k}: mean {mean}, se {se}");
        }
    }
}

#[test]
fn extinction_is_a_fixed_point_reached_from_below() {
    let geometric: Vec<f64> = (0..200).map(|i| (1.0 / 3.0) * (2.0f64 / 3.0).powi(i)).collect();
    let mut laws = vec![DiscreteLaw::from_weights(&geometric).unwrap()];
    for law in ["poisson-indep:1.5", "pp-indep", "zipf-equal:3.5,1000"] {
        laws.push(spec(law, Direction::Out).f);
    }
    for f in &laws {
        let e = extinction_probability(f, EXTINCTION_TOL);
        assert!((e.q - f.pgf(e.q)).abs() < 1e-10, "residual at q = {}", e.q);
        let coarse = extinction_probability(f, 1e-3);
        assert!(coarse.q <= e.q);
    }
    assert!((extinction_probability(&laws[0], EXTINCTION_TOL).q - 0.5).abs() < 1e-9);
}

#[test]
fn tilted_laws_normalize_and_are_subcritical() {
    for law in ["poisson-indep:1.5", "poisson-indep:2", "pp-indep"] {
        let s = spec(law, Direction::Out);
        let q = extinction_probability(&s.f, EXTINCTION_TOL).q;
        assert!(q > 0.0 && q < 1.0, "{law}: q = {q}");
        let (g_t, f_t) = tilted_laws(&s.g, &s.f, q).unwrap();
        for l in [&g_t, &f_t] {
            assert!((l.pmf_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12, "{law}");
        }
        assert!(f_t.mean() < 1.0, "{law}: tilted mean {}", f_t.mean());
    }
}

#[test]
fn pool_zero_fraction_matches_survival() {
    let opts = PoolOptions {
        pool_size: 100_000,
        generations: 30,
    };
    for (law, dir) in [("pp-indep", Direction::Out), ("poisson-indep:1.5", Direction::In)] {
        let s = spec(law, dir);
        let q = extinction_probability(&s.f, EXTINCTION_TOL).q;
        let extinct = 1.0 - survival_probability(&s.g, q);
        let pool = population_dynamics(&s, opts, Seed(11), Execution::Parallel);
        let sigma = (extinct * (1.0 - extinct) / opts.pool_size as f64).sqrt();
        assert!((pool.zero_fraction - extinct).abs() <= 3.0 * sigma, "{law}: {} vs {extinct}", pool.zero_fraction);
    }
}

#[test]
fn pool_mean_is_one() {
    // rounds resample one shared pool, so the spread of its mean is judged
    // across independent replicates rather than within a single pool
    let opts = PoolOptions {
        pool_size: 10_000,
        generations: 30,
    };
    for (law, dir) in [("poisson-indep:2", Direction::Out), ("poisson-equal:1.5", Direction::Out)] {
        let s = spec(law, dir);
        let means: Vec<f64> = (0..40).map(|r| population_dynamics(&s, opts, Seed(12).derive(r), Execution::Parallel).mean()).collect();
        let (mean, se) = mean_and_se(&means);
        assert!((mean - 1.0).abs() <= 3.0 * se, "{law}: {mean} ± {se}");
    }
}

#[test]
fn dregular_generations_are_powers() {
    let s = spec("dregular:3", Direction::Out);
    let path = simulate_delayed_gw(&s, 8, Seed(0)).unwrap();
    assert_eq!(path.z, (0..=8).map(|k| 3u64.pow(k)).collect::<Vec<_>>());
}
