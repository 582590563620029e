//! The six subcommands. Each resolves and validates its parameters before any
//! sampling starts, then writes data files plus a JSON sidecar into `--out`.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use dcm_lab::branching::{Direction, GWSpec, PoolOptions};
use dcm_lab::coupling::{coupled_exploration_with, coupling_failure_rate, CouplingConfig, ExplorationOptions};
use dcm_lab::degrees::{check_assumption, sample_iid_bidegree, AssumptionParams, BiDegreeSequence, IidParams, JointDegreeLaw};
use dcm_lab::graph::{pair_stubs, Digraph};
use dcm_lab::hopcount::{exact_all_pairs, neighborhood_function, sample_hopcounts, HopcountHistogram, NfMode};
use dcm_lab::par::Execution;
use dcm_lab::theory::{compare, dregular_cdf, prob_finite, survival_pair, TheoreticalHopcountLaw};
use dcm_lab::{Error, Seed};

use super::config::{ExperimentConfig, MeasureMode};

/// Stream tags below `1 << 32` index graphs; these sit above them.
const THEORY_STREAM: u64 = 1 << 40;
const BOOTSTRAP_STREAM: u64 = (1 << 40) + 1;
const TRACE_STREAM: u64 = (1 << 40) + 2;

#[derive(Debug)]
pub enum Failure {
    /// Bad parameters or inputs, detected before the work starts.
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidLaw(_) | Error::DegenerateLaw(_) | Error::ParameterOutOfRange(_) | Error::OutOfValidityWindow { .. } | Error::Format(_) => {
                Failure::Validation(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

fn invalid<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Validation(msg.into()))
}

/// Settings shared by every command.
pub struct Session {
    pub cfg: ExperimentConfig,
    pub exec: Execution,
    pub threads: usize,
    pub deterministic: bool,
}

impl Session {
    fn law(&self) -> Outcome<JointDegreeLaw> {
        match &self.cfg.law {
            Some(l) => Ok(l.0.clone()),
            None => invalid("--law is required"),
        }
    }

    fn seed(&self) -> Outcome<Seed> {
        match self.cfg.seed {
            Some(s) => Ok(Seed(s)),
            None => invalid("--seed is required for this command"),
        }
    }

    fn n(&self) -> Outcome<usize> {
        match self.cfg.n {
            Some(n) if n >= 2 && n <= u32::MAX as usize => Ok(n),
            Some(n) => invalid(format!("n = {n} must lie in 2..=2^32-1")),
            None => invalid("--n is required"),
        }
    }

    fn count(&self, name: &str, value: Option<usize>, default: usize) -> Outcome<usize> {
        match value.unwrap_or(default) {
            0 => invalid(format!("{name} must be at least 1")),
            v => Ok(v),
        }
    }

    fn out_dir(&self) -> Outcome<PathBuf> {
        let dir = self.cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn iid_params(&self, law: &JointDegreeLaw, n: usize) -> Outcome<IidParams> {
        let delta = self.cfg.iid_delta.unwrap_or_else(|| JointDegreeLaw::default_delta(self.cfg.kappa.unwrap_or_else(|| law.default_kappa())));
        if !(delta > 0.0 && delta < 1.0) {
            return invalid(format!("iid_delta = {delta} outside (0, 1)"));
        }
        Ok(IidParams::new(n, delta))
    }

    fn measure(&self) -> Outcome<Measure> {
        let mode = self.cfg.mode.unwrap_or(MeasureMode::Hll);
        let p = self.cfg.p.unwrap_or(12);
        if !(4..=16).contains(&p) {
            return invalid(format!("p = {p} outside 4..=16"));
        }
        Ok(Measure {
            mode,
            p,
            pairs: self.count("pairs", self.cfg.pairs, 100_000)?,
            t_max: self.count("t_max", self.cfg.t_max, 200)?,
        })
    }

    fn pool_options(&self) -> Outcome<PoolOptions> {
        let d = PoolOptions::default();
        Ok(PoolOptions {
            pool_size: self.count("pool_size", self.cfg.pool_size, d.pool_size)?,
            generations: self.count("generations", self.cfg.generations, d.generations)?,
        })
    }

    /// The resolved configuration plus run settings, for every sidecar.
    fn sidecar(&self, command: &str, body: Value) -> Value {
        json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.cfg,
            "threads": self.threads,
            "deterministic": self.deterministic,
            "result": body,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
struct Measure {
    mode: MeasureMode,
    p: u8,
    pairs: usize,
    t_max: usize,
}

impl Measure {
    fn run(&self, g: &Digraph, seed: Seed, exec: Execution) -> HopcountHistogram {
        match self.mode {
            MeasureMode::Exact => exact_all_pairs(g, exec),
            MeasureMode::Sampled => sample_hopcounts(g, self.pairs, seed),
            MeasureMode::Hll => neighborhood_function(g, NfMode::Hll { p: self.p }, self.t_max, seed, exec).to_histogram(),
        }
    }
}

struct GraphSeeds {
    sequence: Seed,
    pairing: Seed,
    measure: Seed,
}

fn graph_seeds(seed: Seed, i: usize) -> GraphSeeds {
    GraphSeeds {
        sequence: seed.derive2(i as u64, 0),
        pairing: seed.derive2(i as u64, 1),
        measure: seed.derive2(i as u64, 2),
    }
}

fn write_json(path: &Path, value: &Value) -> Outcome<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn create(path: &Path) -> Outcome<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn supercritical(law: &JointDegreeLaw) -> Outcome<()> {
    if law.is_supercritical() {
        Ok(())
    } else {
        invalid(format!("{law} has μ = {} ≤ 1: no giant component to compare against", law.mu()))
    }
}

/// `t,count,within,at_least`: the histogram with both cumulative views.
fn write_histogram(path: &Path, h: &HopcountHistogram) -> Outcome<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| Failure::Runtime(e.to_string());
    out.write_record(["t", "count", "within", "at_least"]).map_err(io)?;
    let mut within = 0.0;
    for (t, &c) in h.counts.iter().enumerate().skip(1) {
        let at_least = h.finite_pairs - within;
        within += c;
        out.serialize((t, c, within, at_least)).map_err(io)?;
    }
    out.flush()?;
    info!("wrote {}", path.display());
    Ok(())
}

fn read_sequence(path: &Path) -> Outcome<BiDegreeSequence> {
    let file = File::open(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let seq = if path.extension().is_some_and(|e| e == "csv") {
        BiDegreeSequence::read_csv(file)?
    } else {
        BiDegreeSequence::read_binary(std::io::BufReader::new(file))?
    };
    Ok(seq)
}

fn read_graph(path: &Path) -> Outcome<Digraph> {
    let file = File::open(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let reader = std::io::BufReader::new(file);
    let g = if path.extension().is_some_and(|e| e == "txt" || e == "edges") {
        Digraph::read_edge_list(reader)?
    } else {
        Digraph::read_binary(reader)?
    };
    Ok(g)
}

pub fn gen(s: &Session) -> Outcome<()> {
    let law = s.law()?;
    let n = s.n()?;
    let seed = s.seed()?;
    let graphs = s.count("graphs", s.cfg.graphs, 1)?;
    let params = s.iid_params(&law, n)?;
    let dir = s.out_dir()?;
    let mut records = Vec::new();
    for i in 0..graphs {
        let seeds = graph_seeds(seed, i);
        let seq = sample_iid_bidegree(&law, params, seeds.sequence)?;
        let g = pair_stubs(&seq, seeds.pairing);
        let seq_path = dir.join(format!("degrees_{i:03}.dcms"));
        let graph_path = dir.join(format!("graph_{i:03}.dcmg"));
        seq.write_binary(create(&seq_path)?)?;
        g.write_binary(create(&graph_path)?)?;
        info!("graph {i}: {} nodes, {} edges", g.n(), g.edge_count());
        records.push(json!({
            "degrees": seq_path.file_name().map(|f| f.to_string_lossy()),
            "graph": graph_path.file_name().map(|f| f.to_string_lossy()),
            "sequence_seed": seeds.sequence,
            "pairing_seed": seeds.pairing,
            "imbalance": seq.provenance.delta,
            "retries": seq.provenance.retries,
            "topped_up_side": seq.provenance.side,
            "topped_up_nodes": seq.provenance.modified.len(),
            "stats": g.stats(),
        }));
    }
    write_json(&dir.join("gen.json"), &s.sidecar("gen", json!({ "iid": params, "graphs": records })))
}

pub fn hopcount(s: &Session, inputs: &[PathBuf]) -> Outcome<()> {
    let measure = s.measure()?;
    let needs_seed = measure.mode != MeasureMode::Exact || inputs.is_empty();
    let seed = if needs_seed { s.seed()? } else { Seed(s.cfg.seed.unwrap_or(0)) };
    let dir = s.out_dir()?;
    let mut pooled = HopcountHistogram::empty(match measure.mode {
        MeasureMode::Exact => dcm_lab::hopcount::HistogramMode::ExactAllPairs,
        MeasureMode::Sampled => dcm_lab::hopcount::HistogramMode::SampledPairs,
        MeasureMode::Hll => dcm_lab::hopcount::HistogramMode::HllEstimate,
    });
    let mut per_graph = Vec::new();
    let mut run = |i: usize, g: &Digraph, source: Value| {
        let ms = graph_seeds(seed, i).measure;
        let h = measure.run(g, ms, s.exec);
        info!("graph {i}: finite fraction {:.4}", h.finite_fraction());
        per_graph.push(json!({ "source": source, "measure_seed": ms, "histogram": h.sidecar_json() }));
        pooled.absorb(&h);
    };
    if inputs.is_empty() {
        let law = s.law()?;
        let n = s.n()?;
        let graphs = s.count("graphs", s.cfg.graphs, 1)?;
        let params = s.iid_params(&law, n)?;
        for i in 0..graphs {
            let seeds = graph_seeds(seed, i);
            let g = pair_stubs(&sample_iid_bidegree(&law, params, seeds.sequence)?, seeds.pairing);
            run(i, &g, json!({ "sequence_seed": seeds.sequence, "pairing_seed": seeds.pairing }));
        }
    } else {
        let loaded: Vec<Digraph> = inputs.iter().map(|p| read_graph(p)).collect::<Outcome<_>>()?;
        for (i, (g, p)) in loaded.iter().zip(inputs).enumerate() {
            run(i, g, json!({ "file": p }));
        }
    }
    pooled.seed = needs_seed.then_some(seed);
    pooled.p = (measure.mode == MeasureMode::Hll).then_some(measure.p);
    pooled.t_max = (measure.mode == MeasureMode::Hll).then_some(measure.t_max);
    write_histogram(&dir.join("hopcount.csv"), &pooled)?;
    let body = json!({ "measure": measure, "pooled": pooled.sidecar_json(), "finite_fraction": pooled.finite_fraction(), "graphs": per_graph });
    write_json(&dir.join("hopcount.json"), &s.sidecar("hopcount", body))
}

fn theory_law(s: &Session, law: &JointDegreeLaw, n: usize) -> Outcome<(TheoreticalHopcountLaw, Seed)> {
    let opts = s.pool_options()?;
    // d-regular limits are deterministic, so the seed is optional there
    let seed = match law {
        JointDegreeLaw::DRegular { .. } => Seed(s.cfg.seed.unwrap_or(0)),
        _ => s.seed()?,
    };
    let pools = seed.derive(THEORY_STREAM);
    info!("building limit pools ({} samples, {} generations)", opts.pool_size, opts.generations);
    Ok((TheoreticalHopcountLaw::for_law(law, n as u64, opts, pools, s.exec)?, pools))
}

pub fn theory(s: &Session) -> Outcome<()> {
    let law = s.law()?;
    let n = s.n()?;
    supercritical(&law)?;
    let dir = s.out_dir()?;
    let (th, pools) = theory_law(s, &law, n)?;
    th.w_plus.save(&dir.join("w_plus"))?;
    th.w_minus.save(&dir.join("w_minus"))?;
    let closed = match law {
        JointDegreeLaw::DRegular { d } => Some(d),
        _ => None,
    };
    let path = dir.join("theory.csv");
    let mut out = csv::Writer::from_writer(create(&path)?);
    let io = |e: csv::Error| Failure::Runtime(e.to_string());
    out.write_record(["t", "offset", "cdf", "closed_form"]).map_err(io)?;
    for t in dcm_lab::theory::comparison_lattice(th.floor_log).filter(|&t| t >= 1) {
        let x = (t - th.floor_log) as f64;
        let cdf = th.cdf_with(x, s.exec)?;
        let exact = closed.map(|d| dregular_cdf(d, n as u64, x));
        out.serialize((t, t - th.floor_log, cdf, exact)).map_err(io)?;
    }
    out.flush()?;
    info!("wrote {}", path.display());
    let (s_plus, s_minus) = survival_pair(&law.limit_laws()?);
    let body = json!({
        "pool_seed": pools,
        "nu": th.nu,
        "mu": th.mu,
        "floor_log": th.floor_log,
        "conditioned_products": th.conditioned_products.len(),
        "s_plus": s_plus,
        "s_minus": s_minus,
        "prob_finite": prob_finite(s_plus, s_minus),
    });
    write_json(&dir.join("theory.json"), &s.sidecar("theory", body))
}

pub fn compare_cmd(s: &Session) -> Outcome<()> {
    let law = s.law()?;
    let n = s.n()?;
    supercritical(&law)?;
    let seed = s.seed()?;
    let graphs = s.count("graphs", s.cfg.graphs, 10)?;
    let params = s.iid_params(&law, n)?;
    let measure = s.measure()?;
    let bootstrap = s.cfg.bootstrap.unwrap_or(200);
    s.pool_options()?;
    let dir = s.out_dir()?;

    let mut pooled = HopcountHistogram::empty(dcm_lab::hopcount::HistogramMode::HllEstimate);
    for i in 0..graphs {
        let seeds = graph_seeds(seed, i);
        let g = pair_stubs(&sample_iid_bidegree(&law, params, seeds.sequence)?, seeds.pairing);
        let h = measure.run(&g, seeds.measure, s.exec);
        info!("graph {i}/{graphs}: finite fraction {:.4}", h.finite_fraction());
        pooled.mode = h.mode;
        pooled.absorb(&h);
    }
    let (th, pools) = theory_law(s, &law, n)?;
    let report = compare(&pooled, &th, bootstrap, seed.derive(BOOTSTRAP_STREAM), s.exec)?;
    info!("KS = {:.5} (95% interval {:.5}..{:.5})", report.ks, report.ks_ci.0, report.ks_ci.1);
    let path = dir.join("compare.csv");
    report.write_csv(create(&path)?)?;
    write_histogram(&dir.join("hopcount.csv"), &pooled)?;
    let (s_plus, s_minus) = survival_pair(&law.limit_laws()?);
    let body = json!({
        "measure": measure,
        "pool_seed": pools,
        "bootstrap_seed": seed.derive(BOOTSTRAP_STREAM),
        "bootstrap_reps": bootstrap,
        "report": report.sidecar_json(),
        "prob_finite": prob_finite(s_plus, s_minus),
        "pooled": pooled.sidecar_json(),
    });
    write_json(&dir.join("compare.json"), &s.sidecar("compare", body))
}

pub fn coupling(s: &Session) -> Outcome<()> {
    let law = s.law()?;
    let n = s.n()?;
    let seed = s.seed()?;
    supercritical(&law)?;
    let delta = s.cfg.delta.unwrap_or(0.5);
    let eps = s.cfg.eps.unwrap_or(0.1);
    let kappa = s.cfg.kappa.unwrap_or_else(|| law.default_kappa());
    let cfg = CouplingConfig {
        n,
        delta,
        gamma: s.cfg.gamma.unwrap_or(0.5 * (delta * kappa).min(eps)),
        k: s.cfg.k.unwrap_or_else(|| CouplingConfig::max_k(n, delta, law.mu())),
        reps: s.cfg.reps.unwrap_or(500),
        eps,
        kappa: Some(kappa),
    };
    cfg.validate(&law)?;
    let dir = s.out_dir()?;
    info!("coupling with k = {}, γ = {}, {} replicates", cfg.k, cfg.gamma, cfg.reps);
    let rates = coupling_failure_rate(&law, &cfg, seed, s.exec)?;

    // one illustrative pair of traces on a sequence of its own
    let trace_seed = seed.derive(TRACE_STREAM);
    let limits = law.limit_laws()?;
    let seq = sample_iid_bidegree(&law, IidParams::new(n, JointDegreeLaw::default_delta(kappa)), trace_seed.derive(0))?;
    let mut opts = ExplorationOptions::new(cfg.k);
    opts.eps = eps;
    let mut traces = Vec::new();
    for (i, dir_) in [Direction::Out, Direction::In].into_iter().enumerate() {
        let spec = GWSpec::from_limits(&limits, dir_);
        let tr = coupled_exploration_with(&seq, &spec, dir_, opts, trace_seed.derive(1 + i as u64))?;
        let name = if dir_ == Direction::Out { "trace_out.csv" } else { "trace_in.csv" };
        tr.write_csv(create(&dir.join(name))?)?;
        traces.push(json!({ "file": name, "meta": tr.sidecar_json() }));
    }
    let body = json!({ "coupling": cfg, "seed": seed, "rates": rates, "trace_seed": trace_seed, "traces": traces });
    write_json(&dir.join("coupling.json"), &s.sidecar("coupling", body))
}

pub fn check(s: &Session, degrees: Option<&Path>) -> Outcome<()> {
    let law = s.law()?;
    let kappa = s.cfg.kappa.unwrap_or_else(|| law.default_kappa());
    if !(kappa > 0.0 && kappa <= 1.0) {
        return invalid(format!("κ = {kappa} outside (0, 1]"));
    }
    let eps = s.cfg.eps.unwrap_or(0.1);
    if !(eps > 0.0 && eps < 0.5) {
        return invalid(format!("ε = {eps} outside (0, 1/2)"));
    }
    let k_kappa = match s.cfg.k_kappa {
        Some(k) if k > 0.0 => k,
        Some(k) => return invalid(format!("k_kappa = {k} must be positive")),
        None => 2.0 * law.joint_moment(kappa)?,
    };
    let (seq, source) = match degrees {
        Some(p) => (read_sequence(p)?, json!({ "file": p })),
        None => {
            let n = s.n()?;
            let seed = s.seed()?;
            let params = s.iid_params(&law, n)?;
            let seeds = graph_seeds(seed, 0);
            (sample_iid_bidegree(&law, params, seeds.sequence)?, json!({ "iid": params, "sequence_seed": seeds.sequence }))
        }
    };
    let dir = s.out_dir()?;
    let params = AssumptionParams { eps, kappa, k_kappa };
    let report = check_assumption(&seq, &law, params)?;
    info!("omega_n holds: {}", report.omega_n_holds);
    let body = json!({ "n": seq.n(), "params": params, "source": source, "report": report });
    write_json(&dir.join("check.json"), &s.sidecar("check", body))
}
