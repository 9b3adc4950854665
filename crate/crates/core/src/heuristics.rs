//! Edge-weight heuristics for averaging matrices.
//!
//! Closed-form rules (uniform, max-degree, Metropolis) are computed directly.
//! The spectral-norm, nuclear-norm and resistance problems are solved as SDPs
//! through [`crate::conic`]; the mean-square deviation is minimized with a
//! damped Newton method.

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::conic::lmi::{AffineSym, SchurLower, SdpBuilder};
use crate::conic::{solve, Constraint, Sense, SdpSolution, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::graph::{is_connected, orbits_or_trivial, Graph, OrbitPartition};
use crate::spectral::{
    averaging_from_weights, delta_ss_of, spectrum_of, validate_gamma, AveragingMatrix,
};

/// Graphs above this size tie the SDP weights to edge orbits by default.
pub const ORBIT_TIE_THRESHOLD: usize = 12;

/// Stationarity tolerance of the mean-square deviation minimizer.
pub const DELTA_SS_GRAD_TOL: f64 = 1e-7;

const NEWTON_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HeuristicId {
    MinSlem,
    UniformOptimal,
    MaxDegree,
    Metropolis,
    LazyMetropolis,
    /// `gamma = None` is the plain nuclear norm.
    MinNuclear { gamma: Option<Vec<f64>> },
    MinRtot { eps: f64 },
    MinDeltaSs,
}

impl HeuristicId {
    /// All eight heuristics with default parameters, in reporting order.
    pub fn all() -> Vec<HeuristicId> {
        vec![
            HeuristicId::MinSlem,
            HeuristicId::UniformOptimal,
            HeuristicId::MaxDegree,
            HeuristicId::Metropolis,
            HeuristicId::LazyMetropolis,
            HeuristicId::MinNuclear { gamma: None },
            HeuristicId::MinRtot { eps: 0.0 },
            HeuristicId::MinDeltaSs,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            HeuristicId::MinSlem => "min-slem",
            HeuristicId::UniformOptimal => "uniform-optimal",
            HeuristicId::MaxDegree => "max-degree",
            HeuristicId::Metropolis => "metropolis",
            HeuristicId::LazyMetropolis => "lazy-metropolis",
            HeuristicId::MinNuclear { .. } => "min-nuclear",
            HeuristicId::MinRtot { .. } => "min-rtot",
            HeuristicId::MinDeltaSs => "min-delta-ss",
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            HeuristicId::MinNuclear { gamma: Some(g) } => validate_gamma(g, n),
            HeuristicId::MinRtot { eps } => validate_eps(*eps),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for HeuristicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for HeuristicId {
    type Err = Error;

    /// Parses a label; parameterized heuristics get their defaults.
    fn from_str(s: &str) -> Result<Self> {
        let id = match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "min-slem" => HeuristicId::MinSlem,
            "uniform-optimal" => HeuristicId::UniformOptimal,
            "max-degree" => HeuristicId::MaxDegree,
            "metropolis" => HeuristicId::Metropolis,
            "lazy-metropolis" => HeuristicId::LazyMetropolis,
            "min-nuclear" => HeuristicId::MinNuclear { gamma: None },
            "min-rtot" => HeuristicId::MinRtot { eps: 0.0 },
            "min-delta-ss" => HeuristicId::MinDeltaSs,
            other => {
                return Err(Error::InvalidParameter(format!("unknown heuristic '{other}'")));
            }
        };
        Ok(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicOptions {
    /// `None` picks by graph size (see [`default_orbit_tied`]).
    pub orbit_tied: Option<bool>,
    pub solver: SolverOptions,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions {
            orbit_tied: None,
            solver: SolverOptions {
                tol: 1e-8,
                max_iter: 200,
            },
        }
    }
}

pub fn default_orbit_tied(n: usize) -> bool {
    n > ORBIT_TIE_THRESHOLD
}

/// Output of [`compute`].
#[derive(Debug, Clone)]
pub struct HeuristicWeights {
    pub id: HeuristicId,
    pub matrix: AveragingMatrix,
    /// Optimal value of the underlying problem, when there is one.
    pub value: Option<f64>,
}

impl HeuristicWeights {
    pub fn weights(&self) -> &[f64] {
        self.matrix.weights()
    }
}

/// Runs one heuristic on `g`.
pub fn compute(g: &Graph, id: &HeuristicId, opts: &HeuristicOptions) -> Result<HeuristicWeights> {
    id.validate(g.node_count())?;
    let tied = opts
        .orbit_tied
        .unwrap_or_else(|| default_orbit_tied(g.node_count()));
    let (matrix, value) = match id {
        HeuristicId::MinSlem => {
            let (_, w, t) = min_slem_with(g, tied, &opts.solver)?;
            (w, Some(t))
        }
        HeuristicId::UniformOptimal => (uniform_optimal(g)?.1, None),
        HeuristicId::MaxDegree => (max_degree(g)?.1, None),
        HeuristicId::Metropolis => (metropolis(g)?, None),
        HeuristicId::LazyMetropolis => (lazy_metropolis(g)?, None),
        HeuristicId::MinNuclear { gamma } => {
            let gamma = gamma.clone().unwrap_or_else(|| vec![1.0; g.node_count()]);
            let (_, w, v) = min_nuclear_with(g, &gamma, tied, &opts.solver)?;
            (w, Some(v))
        }
        HeuristicId::MinRtot { eps } => {
            let (_, w, v) = min_rtot_with(g, *eps, tied, &opts.solver)?;
            (w, Some(v))
        }
        HeuristicId::MinDeltaSs => {
            let (_, w) = min_delta_ss(g)?;
            let v = delta_ss_of(spectrum_of(w.matrix()).disagreement());
            (w, Some(v))
        }
    };
    Ok(HeuristicWeights {
        id: id.clone(),
        matrix,
        value,
    })
}

fn require_connected(g: &Graph) -> Result<()> {
    if is_connected(g) {
        Ok(())
    } else {
        Err(Error::Disconnected)
    }
}

fn validate_eps(eps: f64) -> Result<()> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must lie in [0, 1), got {eps}")))
    }
}

/// Laplacian eigenvalues in ascending order.
fn laplacian_eigenvalues(g: &Graph) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(g.laplacian()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `W = I - qL` with `q = 2 / (lambda_2(L) + lambda_n(L))`.
pub fn uniform_optimal(g: &Graph) -> Result<(f64, AveragingMatrix)> {
    require_connected(g)?;
    if g.node_count() == 1 {
        return Ok((0.0, averaging_from_weights(g, &[])?));
    }
    let ev = laplacian_eigenvalues(g);
    let q = 2.0 / (ev[1] + ev[ev.len() - 1]);
    Ok((q, averaging_from_weights(g, &vec![q; g.edge_count()])?))
}

/// Every edge gets `1 / (d_max + 1)`.
pub fn max_degree(g: &Graph) -> Result<(f64, AveragingMatrix)> {
    require_connected(g)?;
    let dmax = g.degrees().into_iter().max().unwrap_or(0);
    let q = 1.0 / (dmax as f64 + 1.0);
    Ok((q, averaging_from_weights(g, &vec![q; g.edge_count()])?))
}

/// `w_ij = 1 / (max(d_i, d_j) + 1)`.
pub fn metropolis(g: &Graph) -> Result<AveragingMatrix> {
    require_connected(g)?;
    let d = g.degrees();
    let w: Vec<f64> = g
        .edges()
        .iter()
        .map(|&(i, j)| 1.0 / (d[i].max(d[j]) as f64 + 1.0))
        .collect();
    averaging_from_weights(g, &w)
}

/// `(I + W_metropolis) / 2`.
pub fn lazy_metropolis(g: &Graph) -> Result<AveragingMatrix> {
    metropolis(g)?.lazy(g)
}

/// Per-orbit Laplacians `sum_{e in orbit} b_e b_e^T`.
fn orbit_laplacians(g: &Graph, part: &OrbitPartition) -> Vec<DMatrix<f64>> {
    let n = g.node_count();
    let mut out = vec![DMatrix::zeros(n, n); part.orbit_count()];
    for (&(i, j), &k) in g.edges().iter().zip(part.orbit_of_edge()) {
        let l = &mut out[k];
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
        l[(i, j)] -= 1.0;
        l[(j, i)] -= 1.0;
    }
    out
}

/// SDP variables stand for orbit weights when tied, edge weights otherwise.
fn partition(g: &Graph, tied: bool) -> OrbitPartition {
    if tied {
        orbits_or_trivial(g)
    } else {
        OrbitPartition::trivial(g.edge_count())
    }
}

/// Adds `sign * sum_k y_{first + k} L_k` to `expr`.
fn add_weighted_laplacians(
    expr: &mut AffineSym,
    laps: &[DMatrix<f64>],
    first: usize,
    sign: f64,
) -> Result<()> {
    for (k, l) in laps.iter().enumerate() {
        expr.add_free(first + k, &(l * sign))?;
    }
    Ok(())
}

fn accept(sol: &SdpSolution, what: &str) -> Result<()> {
    match sol.status {
        SolveStatus::Optimal => Ok(()),
        SolveStatus::MaxIter
            if sol.residuals.primal < 1e-6 && sol.residuals.dual < 1e-6 && sol.residuals.gap < 1e-5 =>
        {
            warn!("{what}: iteration limit reached, using the near-optimal iterate");
            Ok(())
        }
        s => Err(Error::Solver(format!(
            "{what}: solver returned {s} (residuals {:?})",
            sol.residuals
        ))),
    }
}

/// Turns solved variables into an averaging matrix. Untied solutions are
/// averaged over edge orbits when those are known; by convexity this does not
/// worsen the objective and gives automorphism-invariant weights.
fn finish_weights(g: &Graph, part: &OrbitPartition, vars: &[f64]) -> Result<(Vec<f64>, AveragingMatrix)> {
    let mut w = part.expand(vars);
    let orbits = orbits_or_trivial(g);
    if orbits.orbit_count() < part.orbit_count() {
        w = orbits.expand(&orbits.reduce_mean(&w));
    }
    let m = averaging_from_weights(g, &w)?;
    Ok((w, m))
}

/// Minimizes `||W - 11^T/n||_2`.
pub fn min_slem(g: &Graph, orbit_tied: bool) -> Result<(Vec<f64>, AveragingMatrix)> {
    let (w, m, _) = min_slem_with(g, orbit_tied, &HeuristicOptions::default().solver)?;
    Ok((w, m))
}

/// [`min_slem`] with explicit solver options; also returns the SDP optimum.
pub fn min_slem_with(
    g: &Graph,
    orbit_tied: bool,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, AveragingMatrix, f64)> {
    require_connected(g)?;
    let n = g.node_count();
    let part = partition(g, orbit_tied);
    let laps = orbit_laplacians(g, &part);
    let mut b = SdpBuilder::new(1 + laps.len(), Sense::Minimize);
    let j = DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut m = AffineSym::constant(&(DMatrix::identity(n, n) - j))?;
    add_weighted_laplacians(&mut m, &laps, 1, -1.0)?;
    b.spectral_norm_epigraph(&m, 0)?;
    b.objective_free(0, 1.0);
    let sol = solve(&b.build(), opts)?;
    accept(&sol, "min-slem")?;
    debug!("min-slem: {} iterations, t = {}", sol.iterations, sol.y[0]);
    let (w, mat) = finish_weights(g, &part, &sol.y[1..])?;
    Ok((w, mat, sol.y[0]))
}

/// Minimizes the weighted nuclear norm `sum_i gamma_i |lambda|_(i)` of `W`.
pub fn min_nuclear(g: &Graph, gamma: &[f64]) -> Result<(Vec<f64>, AveragingMatrix)> {
    let tied = default_orbit_tied(g.node_count());
    let (w, m, _) = min_nuclear_with(g, gamma, tied, &HeuristicOptions::default().solver)?;
    Ok((w, m))
}

/// [`min_nuclear`] with explicit options; also returns the optimal value.
///
/// With `W = P - N`, `P, N >= 0`, the sum of the `k` largest moduli is bounded
/// by the sum of the `k` largest eigenvalues of `P + N`, which has the
/// epigraph `k s + tr(Z)`, `Z >= 0`, `Z >= P + N - s I`. Writing
/// `gamma = sum_k (gamma_k - gamma_{k+1}) 1_{[1..k]}` gives a nonnegative
/// combination of these epigraphs.
pub fn min_nuclear_with(
    g: &Graph,
    gamma: &[f64],
    orbit_tied: bool,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, AveragingMatrix, f64)> {
    require_connected(g)?;
    let n = g.node_count();
    validate_gamma(gamma, n)?;
    if gamma.iter().all(|&x| x == 0.0) {
        let w = vec![0.0; g.edge_count()];
        let m = averaging_from_weights(g, &w)?;
        return Ok((w, m, 0.0));
    }
    let part = partition(g, orbit_tied);
    let laps = orbit_laplacians(g, &part);
    let mut b = SdpBuilder::new(laps.len(), Sense::Minimize);
    let p = b.add_block(n);
    let nb = b.add_block(n);

    // P - N - W(w) = 0
    let mut split = AffineSym::zeros(n);
    split.add_block(p, 1.0)?.add_block(nb, -1.0)?;
    split.add_constant(&(-DMatrix::identity(n, n)))?;
    add_weighted_laplacians(&mut split, &laps, 0, 1.0)?;
    b.zero(&split);

    for k in 1..=n {
        let next = if k < n { gamma[k] } else { 0.0 };
        let c = gamma[k - 1] - next;
        if c <= 0.0 {
            continue;
        }
        if k == n {
            b.objective_trace(p, c);
            b.objective_trace(nb, c);
            continue;
        }
        let s = b.add_free();
        let z = b.add_block(n);
        let mut lmi = AffineSym::zeros(n);
        lmi.add_block(z, 1.0)?
            .add_block(p, -1.0)?
            .add_block(nb, -1.0)?
            .add_free_identity(s, 1.0);
        b.psd(&lmi)?;
        b.objective_free(s, c * k as f64);
        b.objective_trace(z, c);
    }

    let sol = solve(&b.build(), opts)?;
    accept(&sol, "min-nuclear")?;
    let (w, m) = finish_weights(g, &part, &sol.y[..laps.len()])?;
    Ok((w, m, sol.objective))
}

/// Minimizes the total effective resistance subject to
/// `sum_{e ~ i} w_e <= 1 - eps` at every node.
pub fn min_rtot(g: &Graph, eps: f64) -> Result<(Vec<f64>, AveragingMatrix)> {
    let tied = default_orbit_tied(g.node_count());
    let (w, m, _) = min_rtot_with(g, eps, tied, &HeuristicOptions::default().solver)?;
    Ok((w, m))
}

/// [`min_rtot`] with explicit options; also returns the optimal `R_tot`.
pub fn min_rtot_with(
    g: &Graph,
    eps: f64,
    orbit_tied: bool,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, AveragingMatrix, f64)> {
    require_connected(g)?;
    validate_eps(eps)?;
    let n = g.node_count();
    let part = partition(g, orbit_tied);
    let laps = orbit_laplacians(g, &part);
    let mut b = SdpBuilder::new(laps.len(), Sense::Minimize);

    // I - W + J = J + sum_k w_k L_k
    let mut m = AffineSym::constant(&DMatrix::from_element(n, n, 1.0 / n as f64))?;
    add_weighted_laplacians(&mut m, &laps, 0, 1.0)?;
    let y = b.schur_block(&m, SchurLower::Variable)?;
    b.objective_trace(y, n as f64);

    for node in 0..n {
        let mut row = vec![0.0; laps.len()];
        for (&(i, j), &k) in g.edges().iter().zip(part.orbit_of_edge()) {
            if i == node || j == node {
                row[k] += 1.0;
            }
        }
        let y: Vec<(usize, f64)> = row
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0.0)
            .collect();
        if !y.is_empty() {
            b.add_row(Constraint::le(Default::default(), y, 1.0 - eps));
        }
    }

    let sol = solve(&b.build(), opts)?;
    accept(&sol, "min-rtot")?;
    let (w, mat) = finish_weights(g, &part, &sol.y)?;
    Ok((w, mat, sol.objective - n as f64))
}

/// Projections `b_e^T u_i` of the edge vectors onto the disagreement
/// eigenvectors, with their eigenvalues. `None` outside the feasible region.
fn edge_projections(g: &Graph, w: &AveragingMatrix) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let spec = spectrum_of(w.matrix());
    let lambdas = spec.disagreement().to_vec();
    if lambdas.iter().any(|l| l.abs() >= 1.0) {
        return None;
    }
    let u = spec.eigenvectors.expect("spectrum_of returns eigenvectors");
    let m = g.edge_count();
    let r = lambdas.len();
    let mut c = DMatrix::zeros(m, r);
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        for k in 0..r {
            c[(e, k)] = u[(i, k + 1)] - u[(j, k + 1)];
        }
    }
    Some((lambdas, c))
}

/// Gradient of the mean-square deviation with respect to the edge weights:
/// `d delta_ss / d w_e = -sum_{i>=2} 2 lambda_i / (1 - lambda_i^2)^2 (b_e^T u_i)^2`.
pub fn delta_ss_gradient(g: &Graph, w: &[f64]) -> Result<Vec<f64>> {
    let m = averaging_from_weights(g, w)?;
    let (lambdas, c) = edge_projections(g, &m)
        .ok_or_else(|| Error::InvalidParameter("weights outside the region |lambda| < 1".into()))?;
    Ok(gradient_from(&lambdas, &c))
}

fn gradient_from(lambdas: &[f64], c: &DMatrix<f64>) -> Vec<f64> {
    (0..c.nrows())
        .map(|e| {
            -lambdas
                .iter()
                .enumerate()
                .map(|(k, &l)| 2.0 * l / (1.0 - l * l).powi(2) * c[(e, k)].powi(2))
                .sum::<f64>()
        })
        .collect()
}

/// `H_ef = (b_e^T A^-1 b_f)(b_e^T A^-2 b_f) + (b_e^T B^-1 b_f)(b_e^T B^-2 b_f)`
/// with `A = I - W + J` and `B = I + W - J`.
fn hessian_from(lambdas: &[f64], c: &DMatrix<f64>) -> DMatrix<f64> {
    let m = c.nrows();
    let quad = |p: i32, sign: f64| {
        let d: Vec<f64> = lambdas.iter().map(|&l| (1.0 + sign * l).powi(-p)).collect();
        let mut scaled = c.clone();
        for (k, dk) in d.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*dk);
        }
        &scaled * c.transpose()
    };
    let (a1, a2) = (quad(1, -1.0), quad(2, -1.0));
    let (b1, b2) = (quad(1, 1.0), quad(2, 1.0));
    DMatrix::from_fn(m, m, |e, f| a1[(e, f)] * a2[(e, f)] + b1[(e, f)] * b2[(e, f)])
}

/// Minimizes `delta_ss` by damped Newton over orbit weights, starting from
/// the Metropolis weights.
pub fn min_delta_ss(g: &Graph) -> Result<(Vec<f64>, AveragingMatrix)> {
    require_connected(g)?;
    if g.edge_count() == 0 {
        return Ok((vec![], averaging_from_weights(g, &[])?));
    }
    let part = orbits_or_trivial(g);
    let k = part.orbit_count();
    let start = metropolis(g)?;
    let mut theta = part.reduce_mean(start.weights());
    let eval = |theta: &[f64]| -> Option<(f64, AveragingMatrix)> {
        let m = averaging_from_weights(g, &part.expand(theta)).ok()?;
        let v = delta_ss_of(spectrum_of(m.matrix()).disagreement());
        v.is_finite().then_some((v, m))
    };
    let (mut value, mut current) = eval(&theta)
        .ok_or_else(|| Error::InfeasibleStart("Metropolis weights are not strictly feasible".into()))?;

    let members = part.members();
    for iter in 0..NEWTON_MAX_ITER {
        let (lambdas, c) = edge_projections(g, &current).expect("current point is feasible");
        let ge = gradient_from(&lambdas, &c);
        let grad_norm = ge.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if grad_norm <= DELTA_SS_GRAD_TOL {
            debug!("min-delta-ss: converged after {iter} Newton steps");
            return Ok((current.weights().to_vec(), current));
        }
        let he = hessian_from(&lambdas, &c);
        let gt: Vec<f64> = members.iter().map(|es| es.iter().map(|&e| ge[e]).sum()).collect();
        let ht = DMatrix::from_fn(k, k, |a, b| {
            members[a]
                .iter()
                .flat_map(|&e| members[b].iter().map(move |&f| (e, f)))
                .map(|(e, f)| he[(e, f)])
                .sum::<f64>()
        });
        let step = newton_direction(&ht, &gt);
        let slope: f64 = step.iter().zip(&gt).map(|(d, g)| d * g).sum();

        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(x, d)| x + t * d).collect();
            if let Some((v, m)) = eval(&trial) {
                if v <= value + 1e-4 * t * slope {
                    theta = trial;
                    value = v;
                    current = m;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            debug!("min-delta-ss: line search stalled at gradient {grad_norm:e}");
            break;
        }
    }
    let (lambdas, c) = edge_projections(g, &current).expect("current point is feasible");
    let grad_norm = gradient_from(&lambdas, &c)
        .iter()
        .fold(0.0_f64, |a, x| a.max(x.abs()));
    if grad_norm > 1e-5 {
        return Err(Error::Solver(format!(
            "min-delta-ss stopped with gradient norm {grad_norm:e}"
        )));
    }
    Ok((current.weights().to_vec(), current))
}

/// Solves `H d = -g`, regularizing `H` when it is not positive definite.
fn newton_direction(h: &DMatrix<f64>, g: &[f64]) -> Vec<f64> {
    let rhs = nalgebra::DVector::from_iterator(g.len(), g.iter().map(|x| -x));
    let scale = h.diagonal().amax().max(1e-12);
    let mut shift = 0.0;
    loop {
        let mut hs = h.clone();
        for i in 0..hs.nrows() {
            hs[(i, i)] += shift;
        }
        if let Some(ch) = hs.cholesky() {
            return ch.solve(&rhs).iter().copied().collect();
        }
        shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_topology, Topology};
    use crate::spectral::{rtot, slem, weighted_nuclear_norm};
    use approx::assert_abs_diff_eq;

    fn topo(kind: Topology) -> Graph {
        make_topology(kind, 9).unwrap()
    }

    #[test]
    fn uniform_optimal_closed_forms() {
        assert_abs_diff_eq!(uniform_optimal(&topo(Topology::Complete)).unwrap().0, 1.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(uniform_optimal(&topo(Topology::Star)).unwrap().0, 0.2, epsilon = 1e-12);
        let c = (2.0 * std::f64::consts::PI / 9.0).cos();
        let c4 = (8.0 * std::f64::consts::PI / 9.0).cos();
        let q = 2.0 / (4.0 - 2.0 * c - 2.0 * c4);
        assert_abs_diff_eq!(uniform_optimal(&topo(Topology::Cycle)).unwrap().0, q, epsilon = 1e-12);
        assert_abs_diff_eq!(q, 0.460057, epsilon = 1e-6);
    }

    #[test]
    fn max_degree_and_metropolis() {
        assert_abs_diff_eq!(max_degree(&topo(Topology::Star)).unwrap().0, 1.0 / 9.0);
        assert_abs_diff_eq!(max_degree(&topo(Topology::Cycle)).unwrap().0, 1.0 / 3.0);
        let g = topo(Topology::Grid);
        let w = metropolis(&g).unwrap();
        let mut vals: Vec<f64> = w.weights().to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        assert_eq!(vals, vec![0.2, 0.25]);
        let lazy = lazy_metropolis(&topo(Topology::Star)).unwrap();
        assert_abs_diff_eq!(lazy.matrix()[(0, 0)], 5.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn disconnected_rejected() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(uniform_optimal(&g), Err(Error::Disconnected)));
        assert!(matches!(metropolis(&g), Err(Error::Disconnected)));
        assert!(matches!(min_delta_ss(&g), Err(Error::Disconnected)));
    }

    #[test]
    fn min_slem_known_optima() {
        let (_, w) = min_slem(&topo(Topology::Star), false).unwrap();
        assert_abs_diff_eq!(slem(&w), 0.8, epsilon = 1e-4);
        let (w, m) = min_slem(&topo(Topology::Complete), true).unwrap();
        assert_abs_diff_eq!(slem(&m), 0.0, epsilon = 1e-4);
        assert_abs_diff_eq!(w[0], 1.0 / 9.0, epsilon = 1e-4);
        let (w, _) = min_slem(&topo(Topology::Cycle), true).unwrap();
        assert_abs_diff_eq!(w[0], uniform_optimal(&topo(Topology::Cycle)).unwrap().0, epsilon = 1e-4);
    }

    #[test]
    fn min_rtot_complete() {
        let g = topo(Topology::Complete);
        let (w, m) = min_rtot(&g, 0.0).unwrap();
        assert_abs_diff_eq!(w[0], 0.125, epsilon = 1e-5);
        assert_abs_diff_eq!(rtot(&m), 64.0, epsilon = 1e-3);
        let (w, m) = min_rtot(&g, 0.5).unwrap();
        assert_abs_diff_eq!(w[0], 1.0 / 16.0, epsilon = 1e-5);
        assert_abs_diff_eq!(rtot(&m), 128.0, epsilon = 1e-3);
        assert!(min_rtot(&g, 1.0).is_err());
    }

    #[test]
    fn min_nuclear_complete_and_zero_gamma() {
        let g = topo(Topology::Complete);
        let (w, m, v) = min_nuclear_with(&g, &[1.0; 9], true, &HeuristicOptions::default().solver).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(w[0], 1.0 / 9.0, epsilon = 1e-3);
        assert_abs_diff_eq!(weighted_nuclear_norm(&m, &[1.0; 9]).unwrap(), 1.0, epsilon = 1e-4);
        let (w, _) = min_nuclear(&g, &[0.0; 9]).unwrap();
        assert!(w.iter().all(|&x| x == 0.0));
        let mut bad = [1.0; 9];
        bad[3] = 2.0;
        assert!(min_nuclear(&g, &bad).is_err());
    }

    #[test]
    fn min_delta_ss_complete() {
        let (w, m) = min_delta_ss(&topo(Topology::Complete)).unwrap();
        assert_abs_diff_eq!(w[0], 1.0 / 9.0, epsilon = 1e-6);
        assert_abs_diff_eq!(crate::spectral::delta_ss(&m), 8.0, epsilon = 1e-8);
    }

    #[test]
    fn labels_round_trip() {
        for id in HeuristicId::all() {
            assert_eq!(id.label().parse::<HeuristicId>().unwrap(), id);
        }
        assert!("nope".parse::<HeuristicId>().is_err());
    }
}
