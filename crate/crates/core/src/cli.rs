//! Command-line front end: experiment configs, batch benchmarks and
//! plot-ready CSV output.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuits::{biased_hadamard_wprep, wstate_recursive_circuit, wstate_sequential_circuit, Circuit, PhaseReport};
use crate::encoding::{ColoringProblem, PenaltyUnits, SpaceKind};
use crate::error::{Error, Result};
use crate::graphs::{parse_graph6, read_graph6_lines, Graph, GraphCache, GraphSet};
use crate::mixers::{MixerFamily, MixerMode, MixerSpec};
use crate::optimize::{level_curve, LevelPoint, OptimizerConfig};
use crate::par::{self, Mode};
use crate::qaoa::{landscape_scan, linspace, Evaluator, Landscape, QaoaRunSpec, RunResult};
use crate::statesim::InitKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Largest register the W-state command simulates; beyond it only analytic figures are reported.
const WSTATE_SIM_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// prism, envelope, triangle, K<n>, C<n> or P<n>.
    Builtin(String),
    Graph6(String),
    Graph6File { path: PathBuf, #[serde(default)] index: usize },
    /// The connected graphs on n vertices with chromatic number χ.
    Enumerate { n: usize, chi: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixerConfig {
    pub family: MixerFamily,
    #[serde(default)]
    pub mode: MixerMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridAxis {
    fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    /// Mixers compared on every instance.
    pub mixers: Vec<MixerConfig>,
    /// Seeded random subset of this size; the whole set when absent.
    pub subsample: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            mixers: vec![
                MixerConfig { family: MixerFamily::XyRing, mode: MixerMode::Simultaneous },
                MixerConfig { family: MixerFamily::XyComplete, mode: MixerMode::Simultaneous },
            ],
            subsample: None,
        }
    }
}

/// One experiment. Every field has a default, so a config file only lists
/// what it changes; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    /// Number of colors; bench defaults it to χ of the enumerated set.
    pub kappa: Option<usize>,
    pub mixer: MixerConfig,
    pub init: InitKind,
    pub space: SpaceKind,
    pub alpha: f64,
    pub penalty_units: PenaltyUnits,
    /// Highest level; levels 0..=p are reported.
    pub p: usize,
    pub optimizer: OptimizerConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub gamma: GridAxis,
    pub beta: GridAxis,
    pub bench: BenchConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let pi = std::f64::consts::PI;
        ExperimentConfig {
            graph: GraphSource::Builtin("triangle".into()),
            kappa: None,
            mixer: MixerConfig { family: MixerFamily::XyRing, mode: MixerMode::Simultaneous },
            init: InitKind::WState,
            space: SpaceKind::Feasible,
            alpha: 0.0,
            penalty_units: PenaltyUnits::Scaled,
            p: 1,
            optimizer: OptimizerConfig::default(),
            output_dir: PathBuf::from("out"),
            seed: 0,
            gamma: GridAxis { min: 0.0, max: pi, points: 101 },
            beta: GridAxis { min: 0.0, max: pi, points: 101 },
            bench: BenchConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    fn validate(&self) -> Result<()> {
        let config = |e: Error| Error::Config(e.to_string());
        self.optimizer.validate()?;
        if let Some(k) = self.kappa {
            if k < 2 {
                return Err(Error::Config(format!("kappa must be at least 2, got {k}")));
            }
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::Config(format!("alpha must be finite and non-negative, got {}", self.alpha)));
        }
        if self.p > 10 {
            return Err(Error::Config(format!("p must be at most 10, got {}", self.p)));
        }
        for axis in [self.gamma, self.beta] {
            if axis.points == 0 || !axis.min.is_finite() || !axis.max.is_finite() {
                return Err(Error::Config("grid axes need finite bounds and at least one point".into()));
            }
        }
        MixerSpec::new(self.mixer.family, self.mixer.mode, self.kappa.unwrap_or(2).max(2)).map_err(config)?;
        Ok(())
    }

    fn provenance(&self) -> String {
        format!(
            "# xyqaoa {} config={} seed={}\n",
            env!("CARGO_PKG_VERSION"),
            self.hash(),
            self.seed
        )
    }

    fn single_graph(&self) -> Result<Graph> {
        match &self.graph {
            GraphSource::Builtin(name) => Graph::builtin(name).map_err(|e| Error::Config(e.to_string())),
            GraphSource::Graph6(text) => parse_graph6(text).map_err(|e| Error::Config(e.to_string())),
            GraphSource::Graph6File { path, index } => {
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                let graphs = read_graph6_lines(&text).map_err(|e| Error::Config(e.to_string()))?;
                graphs
                    .into_iter()
                    .nth(*index)
                    .ok_or_else(|| Error::Config(format!("{} has no graph at index {index}", path.display())))
            }
            GraphSource::Enumerate { .. } => Err(Error::Config("this command needs a single graph, not an enumerated set".into())),
        }
    }

    fn spec_for(&self, graph: Graph, kappa: usize, mixer: MixerConfig) -> Result<QaoaRunSpec> {
        let config = |e: Error| match e {
            Error::Resource(_) => e,
            other => Error::Config(other.to_string()),
        };
        let problem = ColoringProblem::new(graph, kappa).map_err(config)?;
        let mixer = MixerSpec::new(mixer.family, mixer.mode, kappa).map_err(config)?;
        let spec = QaoaRunSpec::new(problem, mixer, self.init.clone(), self.space)
            .map_err(config)?
            .with_units(self.penalty_units);
        spec.with_alpha(self.alpha).map_err(config)
    }

    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig { seed: self.seed, ..self.optimizer }
    }
}

#[derive(Debug, Parser)]
#[command(name = "xyqaoa", version, about = "QAOA for graph coloring with XY mixers")]
pub struct Cli {
    /// Worker threads for data-parallel work (1 gives the sequential reference mode).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Scalar overrides shared by the experiment commands.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Builtin graph name (prism, envelope, triangle, K<n>, C<n>, P<n>).
    #[arg(long)]
    pub graph: Option<String>,
    /// Graph in graph6 format.
    #[arg(long, conflicts_with = "graph")]
    pub graph6: Option<String>,
    #[arg(long)]
    pub kappa: Option<usize>,
    #[arg(long, value_enum)]
    pub mixer: Option<MixerArg>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    #[arg(long, value_enum)]
    pub space: Option<SpaceArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hops: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MixerArg {
    X,
    Ring,
    Complete,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Simultaneous,
    Parity,
    Binary,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    W,
    Plus,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpaceArg {
    Feasible,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WStateMethod {
    Sequential,
    Recursive,
    BiasedPostselect,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize one instance at levels 0..=p.
    Solve(Overrides),
    /// Run every mixer over an enumerated graph set.
    Bench {
        #[command(flatten)]
        overrides: Overrides,
        /// Vertex count of the enumerated set.
        #[arg(long)]
        n: Option<usize>,
        /// Chromatic number of the enumerated set.
        #[arg(long)]
        chi: Option<usize>,
        #[arg(long)]
        subsample: Option<usize>,
    },
    /// Scan r over a (γ, β) grid at p = 1.
    Landscape {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
        gamma_range: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
        beta_range: Option<Vec<f64>>,
        /// Grid points per axis.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Build and verify a W-state preparation circuit.
    Wstate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        method: WStateMethod,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Write the connected graphs on n vertices (optionally with chromatic number χ) as graph6.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        chi: Option<usize>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(name) = &self.graph {
            cfg.graph = GraphSource::Builtin(name.clone());
        }
        if let Some(text) = &self.graph6 {
            cfg.graph = GraphSource::Graph6(text.clone());
        }
        if let Some(k) = self.kappa {
            cfg.kappa = Some(k);
        }
        if let Some(m) = self.mixer {
            cfg.mixer.family = match m {
                MixerArg::X => MixerFamily::X,
                MixerArg::Ring => MixerFamily::XyRing,
                MixerArg::Complete => MixerFamily::XyComplete,
            };
            if m == MixerArg::X && self.space.is_none() {
                cfg.space = SpaceKind::FullBinary;
            }
        }
        if let Some(m) = self.mode {
            cfg.mixer.mode = match m {
                ModeArg::Simultaneous => MixerMode::Simultaneous,
                ModeArg::Parity => MixerMode::ParityPartitioned,
                ModeArg::Binary => MixerMode::BinaryPartitioned,
            };
        }
        if let Some(i) = self.init {
            cfg.init = match i {
                InitArg::W => InitKind::WState,
                InitArg::Plus => InitKind::PlusAll,
            };
        }
        if let Some(s) = self.space {
            cfg.space = match s {
                SpaceArg::Feasible => SpaceKind::Feasible,
                SpaceArg::Full => SpaceKind::FullBinary,
            };
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(h) = self.hops {
            cfg.optimizer.hops = h;
        }
        if let Some(r) = self.restarts {
            cfg.optimizer.restarts = r;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        Ok(cfg)
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Resource(_) | Error::Io(_) => EXIT_RESOURCE,
        _ => EXIT_CONFIG,
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(t) = cli.threads {
        par::configure_threads(t.max(1));
    }
    let mut stdout = std::io::stdout().lock();
    match execute(cli.command, &mut stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute<W: Write>(command: Command, out: &mut W) -> Result<()> {
    match command {
        Command::Solve(o) => cmd_solve(&o.resolve()?, out).map(|_| ()),
        Command::Bench { overrides, n, chi, subsample } => {
            let mut cfg = overrides.resolve()?;
            match (n, chi, &mut cfg.graph) {
                (Some(n), Some(chi), g) => *g = GraphSource::Enumerate { n, chi },
                (None, None, _) => {}
                (_, _, GraphSource::Enumerate { n: gn, chi: gc }) => {
                    *gn = n.unwrap_or(*gn);
                    *gc = chi.unwrap_or(*gc);
                }
                _ => return Err(Error::Config("bench needs both --n and --chi".into())),
            }
            if subsample.is_some() {
                cfg.bench.subsample = subsample;
            }
            cmd_bench(&cfg, out).map(|_| ())
        }
        Command::Landscape { overrides, gamma_range, beta_range, points } => {
            let mut cfg = overrides.resolve()?;
            if let Some(r) = gamma_range {
                (cfg.gamma.min, cfg.gamma.max) = (r[0], r[1]);
            }
            if let Some(r) = beta_range {
                (cfg.beta.min, cfg.beta.max) = (r[0], r[1]);
            }
            if let Some(k) = points {
                cfg.gamma.points = k;
                cfg.beta.points = k;
            }
            cmd_landscape(&cfg, out).map(|_| ())
        }
        Command::Wstate { n, method, out: dir } => cmd_wstate(n, method, &dir, out).map(|_| ()),
        Command::Enumerate { n, chi, out: path } => cmd_enumerate(n, chi, path.as_deref(), out).map(|_| ()),
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub graph6: String,
    pub kappa: usize,
    pub mixer: MixerSpec,
    pub space: SpaceKind,
    pub alpha: f64,
    pub levels: Vec<LevelPoint>,
    /// Full run at the best parameters of the highest level.
    pub result: RunResult,
}

/// Writes run_result.json, level_curve.csv and cost_distribution.csv.
pub fn cmd_solve<W: Write>(cfg: &ExperimentConfig, out: &mut W) -> Result<SolveReport> {
    cfg.validate()?;
    let graph = cfg.single_graph()?;
    let kappa = cfg.kappa.ok_or_else(|| Error::Config("kappa is required".into()))?;
    let spec = cfg.spec_for(graph.clone(), kappa, cfg.mixer)?;
    let eval = Evaluator::new(spec.clone())?;
    let levels = level_curve(&eval, cfg.p, &cfg.optimizer())?;
    let top = levels.last().expect("level 0 is always present");
    let result = eval.run(&top.params)?;
    let report = SolveReport {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        graph6: graph.to_graph6(),
        kappa,
        mixer: spec.mixer,
        space: cfg.space,
        alpha: cfg.alpha,
        levels: levels.clone(),
        result,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&cfg.output_dir, "run_result.json", json.as_bytes())?;

    let mut curve = cfg.provenance();
    curve.push_str("p,r,prob_optimal,gammas,betas\n");
    for pt in &levels {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        curve.push_str(&format!(
            "{},{:?},{:?},{},{}\n",
            pt.p,
            pt.best_r,
            pt.prob_optimal,
            join(&pt.params.gammas),
            join(&pt.params.betas)
        ));
    }
    write_file(&cfg.output_dir, "level_curve.csv", curve.as_bytes())?;

    let mut dist = cfg.provenance().into_bytes();
    report.result.cost_distribution.write_csv(&mut dist)?;
    write_file(&cfg.output_dir, "cost_distribution.csv", &dist)?;

    for pt in &levels {
        writeln!(out, "p={} r={:.6} prob_optimal={:.6}", pt.p, pt.best_r, pt.prob_optimal)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRow {
    /// Position in the enumerated set.
    pub graph_id: usize,
    pub graph6: String,
    pub mixer: MixerFamily,
    pub p: usize,
    pub r: f64,
    pub prob_optimal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub mixer: MixerFamily,
    pub p: usize,
    pub count: usize,
    pub mean_r: f64,
    pub median_r: f64,
    pub std_r: f64,
    pub mean_prob_optimal: f64,
    pub median_prob_optimal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub set_size: usize,
    pub instances: Vec<InstanceRow>,
    pub aggregate: Vec<AggregateRow>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

/// Sample standard deviation; zero for a single value.
fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Indices of a seeded subsample, sorted.
pub fn subsample_indices(len: usize, k: usize, seed: u64) -> Vec<usize> {
    if k >= len {
        return (0..len).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, len, k).into_vec();
    idx.sort_unstable();
    idx
}

pub fn load_set(n: usize, chi: usize) -> Result<GraphSet> {
    GraphCache::from_env().chromatic(n, chi)
}

/// Writes instances.csv, aggregate.csv and, when both XY mixers run, paired.csv.
pub fn cmd_bench<W: Write>(cfg: &ExperimentConfig, out: &mut W) -> Result<BenchReport> {
    cfg.validate()?;
    let GraphSource::Enumerate { n, chi } = cfg.graph else {
        return Err(Error::Config("bench needs an enumerate graph source".into()));
    };
    let set = load_set(n, chi)?;
    let kappa = cfg.kappa.unwrap_or(chi);
    let chosen = match cfg.bench.subsample {
        Some(k) => subsample_indices(set.len(), k, cfg.seed),
        None => (0..set.len()).collect(),
    };
    let jobs: Vec<(usize, MixerConfig)> = chosen
        .iter()
        .flat_map(|&i| cfg.bench.mixers.iter().map(move |&m| (i, m)))
        .collect();
    let results = par::try_map(Mode::default(), jobs, |(i, mixer)| {
        let spec = cfg.spec_for(set.members[i].clone(), kappa, mixer)?;
        let eval = Evaluator::new(spec)?;
        let curve = level_curve(&eval, cfg.p, &cfg.optimizer())?;
        Ok::<_, Error>(
            curve
                .into_iter()
                .map(|pt| InstanceRow {
                    graph_id: i,
                    graph6: set.members[i].to_graph6(),
                    mixer: mixer.family,
                    p: pt.p,
                    r: pt.best_r,
                    prob_optimal: pt.prob_optimal,
                })
                .collect::<Vec<_>>(),
        )
    })?;
    let instances: Vec<InstanceRow> = results.into_iter().flatten().collect();
    let mut aggregate = Vec::new();
    for mixer in &cfg.bench.mixers {
        for p in 0..=cfg.p {
            let rows: Vec<&InstanceRow> = instances.iter().filter(|r| r.mixer == mixer.family && r.p == p).collect();
            if rows.is_empty() {
                continue;
            }
            let rs: Vec<f64> = rows.iter().map(|r| r.r).collect();
            let ps: Vec<f64> = rows.iter().map(|r| r.prob_optimal).collect();
            aggregate.push(AggregateRow {
                mixer: mixer.family,
                p,
                count: rows.len(),
                mean_r: mean(&rs),
                median_r: median(&rs),
                std_r: std_dev(&rs),
                mean_prob_optimal: mean(&ps),
                median_prob_optimal: median(&ps),
            });
        }
    }
    let family = |f: MixerFamily| serde_json::to_value(f).expect("family serializes").as_str().unwrap_or_default().to_owned();

    let mut text = cfg.provenance();
    text.push_str("graph_id,graph6,mixer,p,r,prob_optimal\n");
    for r in &instances {
        text.push_str(&format!("{},{},{},{},{:?},{:?}\n", r.graph_id, r.graph6, family(r.mixer), r.p, r.r, r.prob_optimal));
    }
    write_file(&cfg.output_dir, "instances.csv", text.as_bytes())?;

    let mut text = cfg.provenance();
    text.push_str("mixer,p,count,mean_r,median_r,std_r,mean_prob_optimal,median_prob_optimal\n");
    for a in &aggregate {
        text.push_str(&format!(
            "{},{},{},{:?},{:?},{:?},{:?},{:?}\n",
            family(a.mixer),
            a.p,
            a.count,
            a.mean_r,
            a.median_r,
            a.std_r,
            a.mean_prob_optimal,
            a.median_prob_optimal
        ));
    }
    write_file(&cfg.output_dir, "aggregate.csv", text.as_bytes())?;

    let has = |f: MixerFamily| cfg.bench.mixers.iter().any(|m| m.family == f);
    if has(MixerFamily::XyRing) && has(MixerFamily::XyComplete) {
        let mut text = cfg.provenance();
        text.push_str("graph_id,p,r_ring,r_complete\n");
        for ring in instances.iter().filter(|r| r.mixer == MixerFamily::XyRing) {
            if let Some(comp) = instances
                .iter()
                .find(|r| r.mixer == MixerFamily::XyComplete && r.graph_id == ring.graph_id && r.p == ring.p)
            {
                text.push_str(&format!("{},{},{:?},{:?}\n", ring.graph_id, ring.p, ring.r, comp.r));
            }
        }
        write_file(&cfg.output_dir, "paired.csv", text.as_bytes())?;
    }
    writeln!(out, "set n={n} chi={chi}: {} graphs, {} run", set.len(), chosen.len())?;
    for a in &aggregate {
        writeln!(out, "{} p={} mean_r={:.6} median_r={:.6} std_r={:.6}", family(a.mixer), a.p, a.mean_r, a.median_r, a.std_r)?;
    }
    Ok(BenchReport {
        set_size: set.len(),
        instances,
        aggregate,
    })
}

/// Writes landscape.csv with one (γ, β, r) row per cell.
pub fn cmd_landscape<W: Write>(cfg: &ExperimentConfig, out: &mut W) -> Result<Landscape> {
    cfg.validate()?;
    let graph = cfg.single_graph()?;
    let kappa = cfg.kappa.ok_or_else(|| Error::Config("kappa is required".into()))?;
    let spec = cfg.spec_for(graph, kappa, cfg.mixer)?;
    let scan = landscape_scan(&spec, &cfg.gamma.values(), &cfg.beta.values())?;
    let mut text = cfg.provenance().into_bytes();
    scan.write_csv(&mut text)?;
    let path = write_file(&cfg.output_dir, "landscape.csv", &text)?;
    let (g, b, r) = scan.best();
    writeln!(
        out,
        "{} cells written to {}; best r={r:.6} at gamma={g:.6}, beta={b:.6}; {} interior local maxima",
        scan.values.len(),
        path.display(),
        scan.local_maxima().len()
    )?;
    Ok(scan)
}

#[derive(Debug, Clone, Serialize)]
pub struct WStateReport {
    pub n: usize,
    pub method: String,
    pub qubits: usize,
    pub gates: usize,
    pub depth: usize,
    pub gate_counts: std::collections::BTreeMap<String, usize>,
    /// CNOTs after lowering to {CNOT, RZ, RY, X}.
    pub cnot_count: usize,
    /// Fidelity with W_n; absent when the register is too large to simulate.
    pub fidelity: Option<f64>,
    /// Postselection success probability, analytic.
    pub success_probability: Option<f64>,
    /// Postselection success probability, simulated.
    pub simulated_success_probability: Option<f64>,
    pub circuit_file: PathBuf,
}

/// Writes the circuit text and a JSON verification report.
pub fn cmd_wstate<W: Write>(n: usize, method: WStateMethod, dir: &Path, out: &mut W) -> Result<WStateReport> {
    let config = |e: Error| match e {
        Error::Argument(m) => Error::Config(m),
        other => other,
    };
    let (name, circuit, analytic): (&str, Circuit, Option<f64>) = match method {
        WStateMethod::Sequential => ("sequential", wstate_sequential_circuit(n).map_err(config)?, None),
        WStateMethod::Recursive => ("recursive", wstate_recursive_circuit(n).map_err(config)?, None),
        WStateMethod::BiasedPostselect => {
            let (c, p) = biased_hadamard_wprep(n).map_err(config)?;
            ("biased-postselect", c, Some(p))
        }
    };
    let simulate = circuit.qubit_count() <= WSTATE_SIM_QUBITS;
    let (fidelity, simulated) = if !simulate {
        (None, None)
    } else {
        let state = circuit.simulate()?;
        match method {
            WStateMethod::Sequential => {
                // drop the ancilla, which ends in |1⟩
                let reg: Vec<num_complex::Complex64> = (0..1usize << n).map(|r| state.amplitudes()[(r << 1) | 1]).collect();
                let overlap: num_complex::Complex64 = (0..n).map(|q| reg[1 << q]).sum::<num_complex::Complex64>() / (n as f64).sqrt();
                (Some(overlap.norm_sqr()), None)
            }
            WStateMethod::Recursive => (Some(PhaseReport::of(&state).fidelity), None),
            WStateMethod::BiasedPostselect => {
                let (prob, post) = state.postselect_hamming_weight(1)?;
                (Some(PhaseReport::of(&post).fidelity), Some(prob))
            }
        }
    };
    let file = format!("wstate_{name}_n{n}.txt");
    let path = write_file(dir, &file, circuit.to_text().as_bytes())?;
    let report = WStateReport {
        n,
        method: name.into(),
        qubits: circuit.qubit_count(),
        gates: circuit.len(),
        depth: circuit.depth(),
        gate_counts: circuit.gate_counts(),
        cnot_count: circuit.cnot_count()?,
        fidelity,
        success_probability: analytic,
        simulated_success_probability: simulated,
        circuit_file: path,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(dir, &format!("wstate_{name}_n{n}.json"), json.as_bytes())?;
    writeln!(out, "{json}")?;
    Ok(report)
}

/// Writes the graph6 lines of the set and echoes the count.
pub fn cmd_enumerate<W: Write>(n: usize, chi: Option<usize>, path: Option<&Path>, out: &mut W) -> Result<usize> {
    if !(1..=7).contains(&n) {
        return Err(Error::Config(format!("enumeration supports 1 <= n <= 7, got {n}")));
    }
    let cache = GraphCache::from_env();
    let set = match chi {
        Some(chi) => cache.chromatic(n, chi)?,
        None => cache.connected(n)?,
    };
    let lines = set.to_graph6_lines();
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, &lines)?;
            writeln!(out, "{}", set.len())?;
        }
        None => {
            out.write_all(lines.as_bytes())?;
            eprintln!("{}", set.len());
        }
    }
    Ok(set.len())
}
