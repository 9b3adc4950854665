//! Performance estimation: the exact worst case of a decentralized method over
//! smooth strongly convex local functions, posed as an SDP in the Gram matrix
//! of iterates and gradients.

mod algorithm;
mod recover;

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use algorithm::{Algorithm, AlgorithmId, AtcDiging, Diging, Extra, GradientOracle, Trajectory};
pub use recover::{recover_worst_case, AgentTrace, WorstCase, REPLAY_TOL, TRUNCATION_TOL};

use crate::conic::{solve, Constraint, Residuals, Sense, SdpProblem, SolveStatus, SolverOptions, SymCoef};
use crate::error::{Error, Result};
use crate::spectral::{slem_of, AveragingMatrix};

/// Smoothness and strong convexity constants, `0 <= mu < L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionClass {
    pub mu: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl Default for FunctionClass {
    fn default() -> Self {
        FunctionClass { mu: 0.1, l: 1.0 }
    }
}

impl FunctionClass {
    pub fn new(mu: f64, l: f64) -> Result<Self> {
        let c = FunctionClass { mu, l };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu < self.l && self.l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= mu < L < inf, got mu={} L={}",
                self.mu, self.l
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// `(1/n) sum_i ||x_i^K - x*||^2` plus the weighted disagreement of the
    /// auxiliary state, with the same quantity at `k = 0` as the initial
    /// condition; with `K = 1` this is the squared one-step contraction factor.
    RateIterates,
    /// `f(xbar^K) - f(x*)` with `f = (1/n) sum_i f_i`.
    FunctionalAtMean,
}

impl Criterion {
    pub fn default_init(self) -> InitCondition {
        match self {
            Criterion::RateIterates => InitCondition::MeanSquare,
            Criterion::FunctionalAtMean => InitCondition::PerAgentBall,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::RateIterates => "rate",
            Criterion::FunctionalAtMean => "fmean",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "rate" | "rate-iterates" => Ok(Criterion::RateIterates),
            "fmean" | "functional-at-mean" => Ok(Criterion::FunctionalAtMean),
            other => Err(Error::InvalidParameter(format!("unknown criterion '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitCondition {
    /// `||x_i^0 - x*||^2 <= r` for every agent.
    PerAgentBall,
    /// `(1/n) sum_i ||x_i^0 - x*||^2 <= r`.
    MeanSquare,
}

impl fmt::Display for InitCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitCondition::PerAgentBall => "per-agent-ball",
            InitCondition::MeanSquare => "mean-square",
        })
    }
}

impl FromStr for InitCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "per-agent-ball" | "ball" => Ok(InitCondition::PerAgentBall),
            "mean-square" => Ok(InitCondition::MeanSquare),
            other => Err(Error::InvalidParameter(format!("unknown initial condition '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PepSetting {
    pub algorithm: AlgorithmId,
    #[serde(rename = "K")]
    pub k: usize,
    pub criterion: Criterion,
    pub fclass: FunctionClass,
    pub init: InitCondition,
    /// Right-hand side of the initial condition (a squared radius).
    pub init_bound: f64,
    /// Relative weight `kappa` of the auxiliary-state disagreement: rate mode
    /// measures `(1/n) sum_i ||x_i - x*||^2 + c (1/n) sum_i ||(s - s*)_i -
    /// mean||^2` with `c = kappa alpha / L`, in both the initial condition and
    /// the criterion.
    pub tracking_weight: f64,
    /// Bound on `(1/n) sum_i ||grad f_i(x*)||^2`, added to the initial
    /// condition when set.
    pub heterogeneity_bound: Option<f64>,
    pub solver: SolverOptions,
}

impl PepSetting {
    /// Setting with the criterion's default initial condition, unit bound
    /// and default solver options.
    pub fn new(algorithm: AlgorithmId, criterion: Criterion, k: usize, fclass: FunctionClass) -> Self {
        PepSetting {
            algorithm,
            k,
            criterion,
            fclass,
            init: criterion.default_init(),
            init_bound: 1.0,
            tracking_weight: default_tracking_weight(criterion, fclass),
            heterogeneity_bound: default_heterogeneity(criterion, fclass),
            solver: default_solver(),
        }
    }

    /// One-step contraction setting used for rates.
    pub fn rate(algorithm: AlgorithmId, fclass: FunctionClass) -> Self {
        Self::new(algorithm, Criterion::RateIterates, 1, fclass)
    }

    /// The weight `c = kappa alpha / L` of the auxiliary state at step size `alpha`.
    pub fn tracking_state_weight(&self, alpha: f64) -> f64 {
        self.tracking_weight * alpha / self.fclass.l
    }

    pub fn validate(&self) -> Result<()> {
        self.fclass.validate()?;
        if self.k < 1 {
            return Err(Error::InvalidParameter("horizon K must be at least 1".into()));
        }
        if self.criterion == Criterion::RateIterates && self.init != InitCondition::MeanSquare {
            return Err(Error::InvalidParameter(
                "the rate criterion needs the mean-square initial condition".into(),
            ));
        }
        if !(self.tracking_weight >= 0.0 && self.tracking_weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tracking weight must be non-negative, got {}",
                self.tracking_weight
            )));
        }
        if let Some(d) = self.heterogeneity_bound {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "heterogeneity bound must be non-negative, got {d}"
                )));
            }
        }
        if !(self.init_bound > 0.0 && self.init_bound.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "initial bound must be positive, got {}",
                self.init_bound
            )));
        }
        Ok(())
    }
}

/// Default `kappa` of the rate metric.
pub const DEFAULT_TRACKING_WEIGHT: f64 = 2.0;

pub fn default_tracking_weight(criterion: Criterion, _fclass: FunctionClass) -> f64 {
    match criterion {
        Criterion::RateIterates => DEFAULT_TRACKING_WEIGHT,
        Criterion::FunctionalAtMean => 0.0,
    }
}

pub fn default_heterogeneity(criterion: Criterion, fclass: FunctionClass) -> Option<f64> {
    match criterion {
        Criterion::RateIterates => None,
        Criterion::FunctionalAtMean => Some(fclass.l * fclass.l),
    }
}

pub fn default_solver() -> SolverOptions {
    SolverOptions {
        tol: 1e-7,
        max_iter: 200,
    }
}

/// One evaluation point of one agent: the iterate as a combination of basis
/// vectors, plus the indices of its gradient symbol and function value.
#[derive(Debug, Clone)]
pub(crate) struct Point {
    pub x: DVector<f64>,
    pub g: usize,
    pub f: usize,
}

/// A compiled PEP together with the bookkeeping needed to map a solution
/// back to vectors.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub problem: SdpProblem,
    /// Gram side.
    pub size: usize,
    /// Per agent: iterates `x^0..x^K`, optionally `xbar^K`, then `x*`.
    pub points: Vec<Vec<Point>>,
    /// `iterate_point[i][k]` indexes into `points[i]`.
    pub iterate_point: Vec<Vec<usize>>,
    pub mean_point: Option<Vec<usize>>,
    pub iterates: Vec<DMatrix<f64>>,
    /// Whether the tracking disagreement enters the rate criterion.
    pub tracked: bool,
}

/// Adds `c sum_i ||s_i - sbar||^2` for the rows `s_i` of `s`.
fn add_disagreement(x: &mut SymCoef, s: &DMatrix<f64>, c: f64) {
    let n = s.nrows();
    let mean = s.row_sum() / n as f64;
    for i in 0..n {
        let d: Vec<f64> = (s.row(i) - &mean).iter().copied().collect();
        x.quad(c, &d);
    }
}

/// Hands out gradient symbols and function values, reusing them when an
/// agent revisits the same point.
struct Allocator {
    n: usize,
    width: usize,
    next_g: usize,
    next_f: usize,
    points: Vec<Vec<Point>>,
}

impl Allocator {
    fn point(&mut self, agent: usize, x: DVector<f64>) -> usize {
        let scale = 1.0 + x.amax();
        if let Some(p) = self.points[agent]
            .iter()
            .position(|p| (&p.x - &x).amax() <= 1e-13 * scale)
        {
            return p;
        }
        self.points[agent].push(Point {
            x,
            g: self.next_g,
            f: self.next_f,
        });
        self.next_g += 1;
        self.next_f += 1;
        self.points[agent].len() - 1
    }

    fn gradients(&mut self, xs: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
        let mut g = DMatrix::zeros(self.n, self.width);
        let mut idx = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let p = self.point(i, xs.row(i).transpose());
            g[(i, self.points[i][p].g)] = 1.0;
            idx.push(p);
        }
        (g, idx)
    }
}

fn unit(width: usize, k: usize) -> DVector<f64> {
    let mut v = DVector::zeros(width);
    v[k] = 1.0;
    v
}

/// Compiles `setting` with the registered recursion for its algorithm.
pub(crate) fn compile(setting: &PepSetting, w: &DMatrix<f64>, alpha: f64) -> Result<Compiled> {
    compile_with(setting, setting.algorithm.implementation(), w, alpha)
}

/// Compiles `setting` with an arbitrary recursion (the extension point for
/// methods outside [`AlgorithmId`]).
pub(crate) fn compile_with(
    setting: &PepSetting,
    alg: &dyn Algorithm,
    w: &DMatrix<f64>,
    alpha: f64,
) -> Result<Compiled> {
    setting.validate()?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {alpha}")));
    }
    let n = w.nrows();
    if n == 0 || w.ncols() != n {
        return Err(Error::Dimension(format!("W is {}x{}", w.nrows(), w.ncols())));
    }
    let k = setting.k;
    let mean = setting.criterion == Criterion::FunctionalAtMean;
    // x^0, g*, then one gradient per evaluation point at most.
    let width = n * (2 + k + 1 + usize::from(mean));
    let mut alloc = Allocator {
        n,
        width,
        next_g: 2 * n,
        next_f: 0,
        points: vec![Vec::new(); n],
    };

    let mut x0 = DMatrix::zeros(n, width);
    for i in 0..n {
        x0[(i, i)] = 1.0;
    }
    let mut iterate_point = vec![Vec::with_capacity(k + 1); n];
    let traj = alg.run(w, alpha, &x0, k, &mut |_, xs| {
        let (g, idx) = alloc.gradients(xs);
        for (i, p) in idx.into_iter().enumerate() {
            iterate_point[i].push(p);
        }
        g
    });
    let iterates = traj.x;
    let mean_point = mean.then(|| {
        let xbar = iterates[k].row_sum().transpose() / n as f64;
        (0..n).map(|i| alloc.point(i, xbar.clone())).collect::<Vec<_>>()
    });
    let mut star = Vec::with_capacity(n);
    for i in 0..n {
        let f = alloc.next_f;
        alloc.next_f += 1;
        alloc.points[i].push(Point {
            x: DVector::zeros(width),
            g: n + i,
            f,
        });
        star.push(f);
    }

    let size = alloc.next_g;
    let mut points = alloc.points;
    for pts in &mut points {
        for p in pts.iter_mut() {
            p.x = p.x.rows(0, size).into_owned();
        }
    }
    let iterates: Vec<DMatrix<f64>> = iterates
        .into_iter()
        .map(|x| x.columns(0, size).into_owned())
        .collect();
    let mut g_star = DMatrix::zeros(n, width);
    for i in 0..n {
        g_star[(i, n + i)] = 1.0;
    }
    let s_opt = alg.optimal_state(&g_star);
    let tracking: Vec<DMatrix<f64>> = traj
        .s
        .into_iter()
        .map(|s| (s - &s_opt).columns(0, size).into_owned())
        .collect();
    let tracked = setting.criterion == Criterion::RateIterates && setting.tracking_weight > 0.0;
    let c = setting.tracking_state_weight(alpha);

    let mut problem = SdpProblem::new(size, alloc.next_f, Sense::Maximize);
    interpolation_rows(&mut problem, &points, size, &setting.fclass);

    let mut sum_star = DVector::zeros(size);
    for i in 0..n {
        sum_star[n + i] = 1.0;
    }
    let mut opt = SymCoef::new();
    opt.quad(1.0, sum_star.as_slice());
    problem.rows.push(Constraint::eq(opt, vec![], 0.0));

    let mut init = SymCoef::new();
    match setting.init {
        InitCondition::PerAgentBall => {
            for i in 0..n {
                let mut c = SymCoef::new();
                c.element(i, i, 1.0);
                problem.rows.push(Constraint::le(c, vec![], setting.init_bound));
            }
        }
        InitCondition::MeanSquare => {
            for i in 0..n {
                init.element(i, i, 1.0 / n as f64);
            }
        }
    }
    if tracked {
        add_disagreement(&mut init, &tracking[0], c / n as f64);
    }
    if !init.is_empty() {
        problem.rows.push(Constraint::le(init, vec![], setting.init_bound));
    }
    if let Some(d) = setting.heterogeneity_bound {
        let mut c = SymCoef::new();
        for i in 0..n {
            c.element(n + i, n + i, 1.0 / n as f64);
        }
        problem.rows.push(Constraint::le(c, vec![], d));
    }

    match (&mean_point, setting.criterion) {
        (Some(mp), Criterion::FunctionalAtMean) => {
            for i in 0..n {
                let f_mean = points[i][mp[i]].f;
                problem.objective.y.push((f_mean, 1.0 / n as f64));
                problem.objective.y.push((star[i], -1.0 / n as f64));
            }
        }
        _ => {
            for i in 0..n {
                let row: Vec<f64> = iterates[k].row(i).iter().copied().collect();
                problem.objective.x.quad(1.0 / n as f64, &row);
            }
            if tracked {
                add_disagreement(&mut problem.objective.x, &tracking[k], c / n as f64);
            }
        }
    }

    Ok(Compiled {
        problem,
        size,
        points,
        iterate_point,
        mean_point,
        iterates,
        tracked,
    })
}

/// For every ordered pair of each agent's points:
///
/// ```text
/// f_v - f_u + <g_v, x_u - x_v>
///   + c [ |g_u - g_v|^2 / L + mu |x_u - x_v|^2 - 2 mu / L <g_u - g_v, x_u - x_v> ] <= 0
/// ```
///
/// with `c = 1 / (2 (1 - mu/L))`.
fn interpolation_rows(problem: &mut SdpProblem, points: &[Vec<Point>], size: usize, fc: &FunctionClass) {
    let c = 1.0 / (2.0 * (1.0 - fc.mu / fc.l));
    for pts in points {
        for (a, u) in pts.iter().enumerate() {
            for (b, v) in pts.iter().enumerate() {
                if a == b {
                    continue;
                }
                let dx = &u.x - &v.x;
                let dg = unit(size, u.g) - unit(size, v.g);
                let gv = unit(size, v.g);
                let mut x = SymCoef::new();
                x.inner(1.0, gv.as_slice(), dx.as_slice());
                x.quad(c / fc.l, dg.as_slice());
                if fc.mu > 0.0 {
                    x.quad(c * fc.mu, dx.as_slice());
                    x.inner(-2.0 * c * fc.mu / fc.l, dg.as_slice(), dx.as_slice());
                }
                problem
                    .rows
                    .push(Constraint::le(x, vec![(v.f, 1.0), (u.f, -1.0)], 0.0));
            }
        }
    }
}

/// Iterates of a compiled recursion as linear forms over the Gram basis.
/// Column `i < n` is `x_i^0`, column `n + i` is `grad f_i(x*)`, and the rest
/// are gradients at evaluation points.
#[derive(Debug, Clone)]
pub struct SymbolicIterates {
    pub size: usize,
    /// `iterates[k]` is `n x size`; row `i` expresses `x_i^k`.
    pub iterates: Vec<DMatrix<f64>>,
    /// `gradient_column[k][i]` is the basis column of `grad f_i(x_i^k)`.
    pub gradient_column: Vec<Vec<usize>>,
}

/// Runs the compiler's symbolic pass and exposes the iterate expressions.
pub fn symbolic_iterates(setting: &PepSetting, w: &AveragingMatrix, alpha: f64) -> Result<SymbolicIterates> {
    let c = compile(setting, w.matrix(), alpha)?;
    let k = setting.k;
    let n = w.n();
    let gradient_column = (0..=k)
        .map(|j| (0..n).map(|i| c.points[i][c.iterate_point[i][j]].g).collect())
        .collect();
    Ok(SymbolicIterates {
        size: c.size,
        iterates: c.iterates,
        gradient_column,
    })
}

/// Builds the SDP of the worst case of `setting` at `(W, alpha)`.
pub fn build_pep(setting: &PepSetting, w: &AveragingMatrix, alpha: f64) -> Result<SdpProblem> {
    Ok(compile(setting, w.matrix(), alpha)?.problem)
}

/// [`build_pep`] for a user supplied recursion.
pub fn build_pep_with(
    setting: &PepSetting,
    alg: &dyn Algorithm,
    w: &AveragingMatrix,
    alpha: f64,
) -> Result<SdpProblem> {
    Ok(compile_with(setting, alg, w.matrix(), alpha)?.problem)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PepStatus {
    Optimal,
    /// The solver hit its iteration limit; the value is the last iterate's
    /// objective and may be inaccurate.
    LowAccuracy,
    Unbounded,
    /// `slem(W) >= 1`: the value is `+inf` without solving.
    NotConsensual,
}

impl fmt::Display for PepStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PepStatus::Optimal => "optimal",
            PepStatus::LowAccuracy => "low-accuracy",
            PepStatus::Unbounded => "unbounded",
            PepStatus::NotConsensual => "not-consensual",
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Solved {
    pub setting: PepSetting,
    pub w: DMatrix<f64>,
    pub alpha: f64,
    pub gram: DMatrix<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PepResult {
    #[serde(with = "crate::extended")]
    pub value: f64,
    pub status: PepStatus,
    pub residuals: Option<Residuals>,
    pub iterations: usize,
    pub gram_size: usize,
    #[serde(skip)]
    pub(crate) solved: Option<Box<Solved>>,
}

impl PepResult {
    fn infinite(status: PepStatus) -> Self {
        PepResult {
            value: f64::INFINITY,
            status,
            residuals: None,
            iterations: 0,
            gram_size: 0,
            solved: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Worst-case value of `setting` at `(W, alpha)`; `+inf` when `slem(W) >= 1`.
pub fn evaluate(setting: &PepSetting, w: &AveragingMatrix, alpha: f64) -> Result<PepResult> {
    evaluate_matrix(setting, w.matrix(), alpha)
}

/// [`evaluate`] on a raw matrix, assumed symmetric with unit row sums.
pub fn evaluate_matrix(setting: &PepSetting, w: &DMatrix<f64>, alpha: f64) -> Result<PepResult> {
    setting.validate()?;
    if slem_of(w) >= 1.0 {
        return Ok(PepResult::infinite(PepStatus::NotConsensual));
    }
    let compiled = compile(setting, w, alpha)?;
    let sol = solve(&compiled.problem, &setting.solver)?;
    let status = match sol.status {
        SolveStatus::Optimal => PepStatus::Optimal,
        SolveStatus::MaxIter => {
            warn!(
                "PEP solve stopped at the iteration limit (residuals {:?}); value is low accuracy",
                sol.residuals
            );
            PepStatus::LowAccuracy
        }
        SolveStatus::Unbounded => return Ok(PepResult::infinite(PepStatus::Unbounded)),
        SolveStatus::Infeasible => {
            return Err(Error::Solver("performance estimation problem reported infeasible".into()));
        }
    };
    Ok(PepResult {
        value: sol.objective,
        status,
        residuals: Some(sol.residuals),
        iterations: sol.iterations,
        gram_size: compiled.size,
        solved: Some(Box::new(Solved {
            setting: *setting,
            w: w.clone(),
            alpha,
            gram: sol.x,
            values: sol.y,
        })),
    })
}

/// Linear rate summary of a squared contraction factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    /// Worst-case squared contraction over the analysed horizon.
    #[serde(with = "crate::extended")]
    pub value: f64,
    #[serde(with = "crate::extended")]
    pub rho: f64,
    /// Convergence time `1 / ln(1/rho)`; infinite when `rho >= 1`.
    #[serde(with = "crate::extended")]
    pub tau: f64,
}

impl Rate {
    pub fn from_rho(value: f64, rho: f64) -> Self {
        Rate {
            value,
            rho,
            tau: convergence_time(rho),
        }
    }

    /// Rate implied by a worst-case value of `setting`, for the rate
    /// criterion only: `rho = value^{1/(2K)}`.
    pub fn for_setting(setting: &PepSetting, value: f64) -> Option<Self> {
        (setting.criterion == Criterion::RateIterates).then(|| {
            let rho = value.powf(0.5 / setting.k as f64);
            Rate::from_rho(value, rho)
        })
    }

    pub fn is_contractive(&self) -> bool {
        self.rho < 1.0
    }
}

pub fn convergence_time(rho: f64) -> f64 {
    if rho.is_nan() {
        f64::NAN
    } else if rho >= 1.0 {
        f64::INFINITY
    } else if rho <= 0.0 {
        0.0
    } else {
        1.0 / (1.0 / rho).ln()
    }
}

/// One-iteration rate `rho = sqrt(E)` of a gradient-tracking method.
pub fn rate(setting: &PepSetting, w: &AveragingMatrix, alpha: f64) -> Result<(Rate, PepResult)> {
    if setting.criterion != Criterion::RateIterates || setting.k != 1 {
        return Err(Error::InvalidParameter("rate needs the rate criterion with K = 1".into()));
    }
    if !setting.algorithm.is_gradient_tracking() {
        return Err(Error::InvalidParameter(format!(
            "one-step rates are defined for gradient-tracking methods, not {}",
            setting.algorithm
        )));
    }
    let r = evaluate(setting, w, alpha)?;
    Ok((Rate::from_rho(r.value, r.value.sqrt()), r))
}

/// K-step rate `rho = E^{1/(2K)}` from the K-iteration worst case of the
/// rate metric.
pub fn rate_k_step(setting: &PepSetting, w: &AveragingMatrix, alpha: f64) -> Result<(Rate, PepResult)> {
    if setting.criterion != Criterion::RateIterates {
        return Err(Error::InvalidParameter("K-step rates need the rate criterion".into()));
    }
    let r = evaluate(setting, w, alpha)?;
    let rate = Rate::for_setting(setting, r.value).expect("rate criterion checked above");
    Ok((rate, r))
}
