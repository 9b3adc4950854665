mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use commweights::graph::{erdos_renyi, make_topology, Graph, GraphFile, Topology};
use commweights::heuristics::{self, HeuristicId, HeuristicOptions};
use commweights::pep::{evaluate, FunctionClass, PepSetting, PepStatus, Rate};
use commweights::spectral::{averaging_from_weights, delta_ss_of, rtot_of, spectrum, AveragingMatrix};
use commweights::tuner::{self, AlphaGrid, AlphaTune, Comparison, CompareOptions, SearchOptions, TuneOptions, TuneResult};
use commweights::conic::Residuals;
use commweights::{Error, Result};

pub use args::Cli;
use args::{Command, CompareArgs, EvaluateArgs, GraphArgs, ProblemArgs, SearchArgs, TuneAlphaArgs, TuneArgs, WeightsArgs};

/// Resolved configuration echoed into every output file.
#[derive(Debug, Serialize)]
struct RunConfig {
    program: &'static str,
    version: &'static str,
    subcommand: &'static str,
    seed: u64,
    jobs: Option<usize>,
    args: Value,
    resolved: Value,
}

struct Context<'a> {
    cli: &'a Cli,
}

impl Context<'_> {
    fn config(&self, resolved: Value) -> Result<RunConfig> {
        let (subcommand, args) = match &self.cli.command {
            Command::Graph(a) => ("graph", serde_json::to_value(a)?),
            Command::Weights(a) => ("weights", serde_json::to_value(a)?),
            Command::Evaluate(a) => ("evaluate", serde_json::to_value(a)?),
            Command::TuneAlpha(a) => ("tune-alpha", serde_json::to_value(a)?),
            Command::Tune(a) => ("tune", serde_json::to_value(a)?),
            Command::Compare(a) => ("compare", serde_json::to_value(a)?),
        };
        Ok(RunConfig {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed: self.cli.seed,
            jobs: self.cli.jobs,
            args,
            resolved,
        })
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::InvalidParameter("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("cannot size the thread pool: {e}")))?;
    }
    let ctx = Context { cli };
    match &cli.command {
        Command::Graph(a) => graph_cmd(&ctx, a),
        Command::Weights(a) => weights_cmd(&ctx, a),
        Command::Evaluate(a) => evaluate_cmd(&ctx, a),
        Command::TuneAlpha(a) => tune_alpha_cmd(&ctx, a),
        Command::Tune(a) => tune_cmd(&ctx, a),
        Command::Compare(a) => compare_cmd(&ctx, a),
    }
}

fn with_path(path: &Path, e: io::Error) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| with_path(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| with_path(path, e))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    match path {
        Some(p) => {
            let mut out = create(p)?;
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out).map_err(|e| with_path(p, e))?;
            out.flush().map_err(|e| with_path(p, e))?;
            info!("wrote {}", p.display());
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<Graph> {
    let file: GraphFile = read_json(path)?;
    Graph::from_file(file)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WeightsInput {
    Bare(Vec<f64>),
    Document {
        weights: Vec<f64>,
        #[serde(default)]
        edges: Option<Vec<[usize; 2]>>,
    },
}

fn load_weights(path: &Path, g: &Graph) -> Result<AveragingMatrix> {
    let (weights, edges) = match read_json::<WeightsInput>(path)? {
        WeightsInput::Bare(w) => (w, None),
        WeightsInput::Document { weights, edges } => (weights, edges),
    };
    if let Some(edges) = edges {
        let same = edges.len() == g.edge_count() && edges.iter().zip(g.edges()).all(|(a, b)| (a[0], a[1]) == *b);
        if !same {
            return Err(Error::Schema(format!(
                "{}: edge list does not match the graph",
                path.display()
            )));
        }
    }
    averaging_from_weights(g, &weights)
}

fn setting_from(p: &ProblemArgs) -> Result<PepSetting> {
    let fclass = FunctionClass::new(p.mu, p.l)?;
    let mut s = PepSetting::new(p.algorithm, p.criterion, p.k, fclass);
    if let Some(t) = p.tracking_weight {
        s.tracking_weight = t;
    }
    if let Some(h) = p.heterogeneity {
        s.heterogeneity_bound = Some(h);
    }
    if let Some(t) = p.tol {
        s.solver.tol = t;
    }
    if let Some(m) = p.max_iter {
        s.solver.max_iter = m;
    }
    s.validate()?;
    Ok(s)
}

fn tune_options(s: &SearchArgs) -> Result<TuneOptions> {
    let mut opts = TuneOptions::default();
    if let Some(b) = s.budget {
        opts.search.max_evaluations = b;
    }
    if let Some(t) = s.mesh_tol {
        opts.search.mesh_tol = t;
    }
    opts.orbit_tied = !s.per_edge;
    opts.search.validate()?;
    Ok(opts)
}

#[derive(Serialize)]
struct GraphOutput {
    #[serde(flatten)]
    graph: GraphFile,
    config: RunConfig,
}

fn graph_cmd(ctx: &Context, a: &GraphArgs) -> Result<()> {
    let g = match a.topology.to_ascii_lowercase().as_str() {
        "erdos-renyi" | "er" => {
            let p = a
                .p
                .ok_or_else(|| Error::InvalidParameter("erdos-renyi needs --p".into()))?;
            erdos_renyi(a.n, p, ctx.cli.seed)?
        }
        other => {
            let kind: Topology = other.parse()?;
            make_topology(kind, a.n)?
        }
    };
    let out = GraphOutput {
        graph: g.to_file(),
        config: ctx.config(json!({}))?,
    };
    write_json(a.out.as_deref(), &out)
}

#[derive(Serialize)]
struct WeightsOutput<'a> {
    heuristic: &'a HeuristicId,
    n: usize,
    edges: Vec<[usize; 2]>,
    weights: &'a [f64],
    /// Optimal value of the heuristic's own problem.
    value: Option<f64>,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct SpectrumOutput<'a> {
    /// Descending; the first entry is the consensus eigenvalue 1.
    eigenvalues: Vec<f64>,
    slem: f64,
    #[serde(with = "commweights::extended")]
    delta_ss: f64,
    #[serde(with = "commweights::extended")]
    rtot: f64,
    config: &'a RunConfig,
}

fn weights_cmd(ctx: &Context, a: &WeightsArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let id = match (&a.heuristic, &a.gamma, a.eps) {
        (HeuristicId::MinNuclear { .. }, gamma, None) => HeuristicId::MinNuclear { gamma: gamma.clone() },
        (HeuristicId::MinRtot { .. }, None, eps) => HeuristicId::MinRtot { eps: eps.unwrap_or(0.0) },
        (id, None, None) => id.clone(),
        (id, _, _) => {
            return Err(Error::InvalidParameter(format!(
                "--gamma applies to min-nuclear and --eps to min-rtot, not {id}"
            )))
        }
    };
    let opts = HeuristicOptions {
        orbit_tied: a.orbit_tied.then_some(true),
        ..HeuristicOptions::default()
    };
    let h = heuristics::compute(&g, &id, &opts)?;
    let spec = spectrum(&h.matrix);
    let lambdas = spec.disagreement().to_vec();
    let config = ctx.config(json!({
        "heuristic": id,
        "orbit_tied": opts.orbit_tied.unwrap_or_else(|| heuristics::default_orbit_tied(g.node_count())),
        "solver": opts.solver,
        "gamma_default": "all ones",
        "eps_default": 0.0,
    }))?;
    let weights = WeightsOutput {
        heuristic: &id,
        n: g.node_count(),
        edges: g.to_file().edges,
        weights: h.weights(),
        value: h.value,
        config: &config,
    };
    let spectrum_doc = SpectrumOutput {
        slem: commweights::spectral::slem(&h.matrix),
        delta_ss: delta_ss_of(&lambdas),
        rtot: rtot_of(&lambdas),
        eigenvalues: spec.eigenvalues,
        config: &config,
    };
    match &a.out {
        Some(out) => {
            write_json(Some(out), &weights)?;
            let spath = a.spectrum_out.clone().unwrap_or_else(|| spectrum_path(out));
            write_json(Some(&spath), &spectrum_doc)
        }
        None => {
            if let Some(spath) = &a.spectrum_out {
                write_json(Some(spath), &spectrum_doc)?;
            }
            write_json(None, &json!({ "weights": weights, "spectrum": spectrum_doc }))
        }
    }
}

fn spectrum_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.spectrum.json"))
}

#[derive(Serialize)]
struct EvaluateOutput {
    #[serde(with = "commweights::extended")]
    value: f64,
    #[serde(with = "commweights::extended::option")]
    rho: Option<f64>,
    #[serde(with = "commweights::extended::option")]
    tau: Option<f64>,
    status: PepStatus,
    residuals: Option<Residuals>,
    iterations: usize,
    gram_size: usize,
    alpha: f64,
    config: RunConfig,
}

fn evaluate_cmd(ctx: &Context, a: &EvaluateArgs) -> Result<()> {
    let setting = setting_from(&a.problem)?;
    let g = load_graph(&a.problem.graph)?;
    let w = load_weights(&a.weights, &g)?;
    if !(a.alpha > 0.0 && a.alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {}", a.alpha)));
    }
    let r = evaluate(&setting, &w, a.alpha)?;
    let rate = Rate::for_setting(&setting, r.value);
    let out = EvaluateOutput {
        value: r.value,
        rho: rate.map(|r| r.rho),
        tau: rate.map(|r| r.tau),
        status: r.status,
        residuals: r.residuals,
        iterations: r.iterations,
        gram_size: r.gram_size,
        alpha: a.alpha,
        config: ctx.config(json!({ "setting": setting }))?,
    };
    write_json(a.out.as_deref(), &out)
}

#[derive(Serialize)]
struct TuneAlphaOutput {
    #[serde(flatten)]
    result: AlphaTune,
    config: RunConfig,
}

fn tune_alpha_cmd(ctx: &Context, a: &TuneAlphaArgs) -> Result<()> {
    let setting = setting_from(&a.problem)?;
    let g = load_graph(&a.problem.graph)?;
    let w = load_weights(&a.weights, &g)?;
    let grid = AlphaGrid::default();
    let mut search = SearchOptions::default();
    if let Some(b) = a.budget {
        search.max_evaluations = b;
    }
    let result = tuner::tune_alpha(&setting, &w, &grid, &search)?;
    let out = TuneAlphaOutput {
        result,
        config: ctx.config(json!({ "setting": setting, "alpha_grid": grid, "search": search }))?,
    };
    write_json(a.out.as_deref(), &out)
}

#[derive(Serialize)]
struct TuneOutput {
    edges: Vec<[usize; 2]>,
    #[serde(flatten)]
    result: TuneResult,
    config: RunConfig,
}

fn tune_cmd(ctx: &Context, a: &TuneArgs) -> Result<()> {
    let setting = setting_from(&a.problem)?;
    let g = load_graph(&a.problem.graph)?;
    let opts = tune_options(&a.search)?;
    let result = tuner::tune_weights(&setting, &g, &opts)?;
    let out = TuneOutput {
        edges: g.to_file().edges,
        result,
        config: ctx.config(json!({ "setting": setting, "tune": opts }))?,
    };
    write_json(a.out.as_deref(), &out)
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    edges: Vec<[usize; 2]>,
    #[serde(flatten)]
    comparison: &'a Comparison,
    config: &'a RunConfig,
}

fn compare_cmd(ctx: &Context, a: &CompareArgs) -> Result<()> {
    let setting = setting_from(&a.problem)?;
    let g = load_graph(&a.problem.graph)?;
    let opts = CompareOptions {
        tune: tune_options(&a.search)?,
        ..CompareOptions::default()
    };
    let comparison = tuner::compare(&setting, &g, &opts)?;
    let config = ctx.config(json!({ "setting": setting, "compare": opts }))?;

    let mut csv = create(&a.out)?;
    comparison.write_csv(&mut csv, g.node_count(), &[format!("config {}", serde_json::to_string(&config)?)])?;
    csv.flush().map_err(|e| with_path(&a.out, e))?;
    info!("wrote {}", a.out.display());

    let json_path = a.json.clone().unwrap_or_else(|| a.out.with_extension("json"));
    let out = CompareOutput {
        edges: g.to_file().edges,
        comparison: &comparison,
        config: &config,
    };
    write_json(Some(&json_path), &out)
}
