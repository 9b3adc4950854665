//! Step-size and weight tuning on top of the worst-case evaluator.

mod compare;
mod search;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use compare::{compare, Comparison, ComparisonRow, CompareOptions, OPTIMAL_LABEL};
pub use search::{pattern_search, SearchOptions, SearchResult, TraceStep};

use crate::error::{Error, Result};
use crate::graph::{is_connected, orbits_or_trivial, Graph, OrbitPartition};
use crate::heuristics::{self, HeuristicId, HeuristicOptions};
use crate::pep::{evaluate, Criterion, PepSetting, Rate};
use crate::spectral::{averaging_from_weights, slem_of, AveragingMatrix};

/// Logarithmic step-size grid `[lo, hi] / L` with `points` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            lo: 1e-3,
            hi: 2.0,
            points: 25,
        }
    }
}

impl AlphaGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.hi.is_finite()) || self.points < 2 {
            return Err(Error::InvalidParameter(format!(
                "step-size grid needs 0 < lo < hi and at least 2 points, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Grid nodes for smoothness constant `l`.
    pub fn nodes(&self, l: f64) -> Vec<f64> {
        let ratio = (self.hi / self.lo).ln();
        (0..self.points)
            .map(|j| self.lo * (ratio * j as f64 / (self.points - 1) as f64).exp() / l)
            .collect()
    }

    /// Spacing of the nodes in `ln alpha`.
    pub fn log_spacing(&self) -> f64 {
        (self.hi / self.lo).ln() / (self.points - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTune {
    pub alpha: f64,
    pub value: f64,
    pub rate: Option<Rate>,
    pub evaluations: usize,
    pub grid: Vec<GridPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    #[serde(with = "crate::extended")]
    pub value: f64,
}

fn value_at(setting: &PepSetting, w: &AveragingMatrix, alpha: f64) -> f64 {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return f64::INFINITY;
    }
    match evaluate(setting, w, alpha) {
        Ok(r) => r.value,
        Err(e) => {
            warn!("evaluation at alpha={alpha} failed: {e}");
            f64::INFINITY
        }
    }
}

/// Best step size for a fixed `W`: a logarithmic grid scan followed by a
/// one-dimensional pattern search in `ln alpha` from the best node.
pub fn tune_alpha(setting: &PepSetting, w: &AveragingMatrix, grid: &AlphaGrid, search: &SearchOptions) -> Result<AlphaTune> {
    setting.validate()?;
    grid.validate()?;
    if slem_of(w.matrix()) >= 1.0 {
        return Err(Error::InfeasibleStart("W does not reach consensus (SLEM >= 1)".into()));
    }
    let nodes = grid.nodes(setting.fclass.l);
    let values: Vec<f64> = nodes.par_iter().map(|&a| value_at(setting, w, a)).collect();
    let mut best = 0;
    for (j, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = j;
        }
    }
    if values[best] == f64::INFINITY {
        return Err(Error::InfeasibleStart("every step size on the grid has an infinite worst case".into()));
    }
    if setting.criterion == Criterion::RateIterates && values[best] >= 1.0 {
        return Err(Error::InfeasibleStart(format!(
            "no contractive step size on the grid (best worst case {})",
            values[best]
        )));
    }
    let opts = SearchOptions {
        initial_mesh: grid.log_spacing() / 2.0,
        ..search.clone()
    };
    let r = pattern_search(|u| value_at(setting, w, u[0].exp()), &[nodes[best].ln()], &[1.0], &opts)?;
    let alpha = r.x[0].exp();
    Ok(AlphaTune {
        alpha,
        value: r.value,
        rate: Rate::for_setting(setting, r.value),
        evaluations: nodes.len() + r.evaluations,
        grid: nodes
            .into_iter()
            .zip(values)
            .map(|(alpha, value)| GridPoint { alpha, value })
            .collect(),
    })
}

/// A starting point for [`tune_weights`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Start {
    pub label: String,
    /// One weight per search coordinate (orbit, or edge when untied).
    pub weights: Vec<f64>,
    /// Step size; tuned with [`tune_alpha`] when absent.
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOptions {
    pub search: SearchOptions,
    pub alpha_grid: AlphaGrid,
    /// Search one weight per edge orbit (the default) or one per edge.
    pub orbit_tied: bool,
    /// Start from min-SLEM and Metropolis weights.
    pub default_starts: bool,
    pub extra_starts: Vec<Start>,
    pub heuristic: HeuristicOptions,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            search: SearchOptions::default(),
            alpha_grid: AlphaGrid::default(),
            orbit_tied: true,
            default_starts: true,
            extra_starts: Vec::new(),
            heuristic: HeuristicOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartReport {
    pub label: String,
    pub start_weights: Vec<f64>,
    pub start_alpha: f64,
    #[serde(with = "crate::extended")]
    pub start_value: f64,
    #[serde(with = "crate::extended")]
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    /// Weights expanded to one per edge.
    pub weights: Vec<f64>,
    /// Weights per search coordinate.
    pub coordinates: Vec<f64>,
    pub alpha: f64,
    pub value: f64,
    pub rate: Option<Rate>,
    pub orbit_tied: bool,
    /// Number of search variables (weights plus the step size).
    pub dimension: usize,
    pub evaluations: usize,
    /// Index into `restarts` of the winning start.
    pub best_restart: usize,
    pub restarts: Vec<RestartReport>,
    /// Accepted steps of the winning start, in `(weights, ln alpha)`
    /// coordinates.
    pub trace: Vec<TraceStep>,
}

/// Search partition for `g`: edge orbits when tied, single edges otherwise.
pub fn search_partition(g: &Graph, orbit_tied: bool) -> OrbitPartition {
    if orbit_tied {
        orbits_or_trivial(g)
    } else {
        OrbitPartition::trivial(g.edge_count())
    }
}

fn default_starts(g: &Graph, partition: &OrbitPartition, opts: &TuneOptions) -> Vec<Start> {
    let mut out = Vec::new();
    let ids = [HeuristicId::MinSlem, HeuristicId::Metropolis];
    for id in ids {
        match heuristics::compute(g, &id, &opts.heuristic) {
            Ok(h) => out.push(Start {
                label: id.label().to_string(),
                weights: partition.reduce_mean(h.weights()),
                alpha: None,
            }),
            Err(e) => warn!("skipping the {id} start: {e}"),
        }
    }
    out
}

/// Jointly minimizes the worst case over edge weights and step size.
pub fn tune_weights(setting: &PepSetting, g: &Graph, opts: &TuneOptions) -> Result<TuneResult> {
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let partition = search_partition(g, opts.orbit_tied);
    let mut starts = if opts.default_starts {
        default_starts(g, &partition, opts)
    } else {
        Vec::new()
    };
    starts.extend(opts.extra_starts.iter().cloned());
    tune_from(setting, g, &partition, &starts, opts)
}

/// [`tune_weights`] from explicit starts on an explicit partition.
pub fn tune_from(
    setting: &PepSetting,
    g: &Graph,
    partition: &OrbitPartition,
    starts: &[Start],
    opts: &TuneOptions,
) -> Result<TuneResult> {
    setting.validate()?;
    opts.search.validate()?;
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    if partition.edge_count() != g.edge_count() {
        return Err(Error::Dimension(format!(
            "partition covers {} edges, graph has {}",
            partition.edge_count(),
            g.edge_count()
        )));
    }
    if !opts.orbit_tied && g.edge_count() > 0 {
        warn!("per-edge search: the problem is not convex in the weights, results depend on the starts");
    }
    if starts.is_empty() {
        return Err(Error::InfeasibleStart("no starting points".into()));
    }
    let d = partition.orbit_count();
    let objective = |x: &[f64]| -> f64 {
        let alpha = x[d].exp();
        match averaging_from_weights(g, &partition.expand(&x[..d])) {
            Ok(w) => value_at(setting, &w, alpha),
            Err(_) => f64::INFINITY,
        }
    };

    let mut best: Option<(usize, SearchResult)> = None;
    let mut restarts = Vec::new();
    let mut evaluations = 0;
    for start in starts {
        if start.weights.len() != d {
            return Err(Error::Dimension(format!(
                "start '{}' has {} weights, the search has {d}",
                start.label,
                start.weights.len()
            )));
        }
        let alpha = match start.alpha {
            Some(a) => a,
            None => {
                let w = match averaging_from_weights(g, &partition.expand(&start.weights)) {
                    Ok(w) => w,
                    Err(e) => {
                        warn!("skipping start '{}': {e}", start.label);
                        continue;
                    }
                };
                match tune_alpha(setting, &w, &opts.alpha_grid, &opts.search) {
                    Ok(t) => {
                        evaluations += t.evaluations;
                        t.alpha
                    }
                    Err(e) => {
                        warn!("skipping start '{}': {e}", start.label);
                        continue;
                    }
                }
            }
        };
        let mut x0 = start.weights.clone();
        x0.push(alpha.ln());
        let r = match pattern_search(objective, &x0, &vec![1.0; d + 1], &opts.search) {
            Ok(r) => r,
            Err(e) => {
                warn!("skipping start '{}': {e}", start.label);
                continue;
            }
        };
        evaluations += r.evaluations;
        restarts.push(RestartReport {
            label: start.label.clone(),
            start_weights: start.weights.clone(),
            start_alpha: alpha,
            start_value: r.trace[0].value,
            value: r.value,
            evaluations: r.evaluations,
            converged: r.converged,
        });
        let idx = restarts.len() - 1;
        if best.as_ref().is_none_or(|(_, b)| r.value < b.value) {
            best = Some((idx, r));
        }
    }
    let (best_restart, r) =
        best.ok_or_else(|| Error::InfeasibleStart("no start has a finite worst case".into()))?;
    let coordinates = r.x[..d].to_vec();
    Ok(TuneResult {
        weights: partition.expand(&coordinates),
        coordinates,
        alpha: r.x[d].exp(),
        value: r.value,
        rate: Rate::for_setting(setting, r.value),
        orbit_tied: opts.orbit_tied,
        dimension: d + 1,
        evaluations,
        best_restart,
        restarts,
        trace: r.trace,
    })
}
