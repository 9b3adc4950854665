//! Generalized pattern search on an extended-real objective.
//!
//! Polling is complete: every point of the coordinate pattern `x +- delta e_i`
//! is evaluated (concurrently), and the best strict improvement wins, with
//! ties resolved by the fixed direction order. The accepted sequence is thus
//! independent of evaluation order and thread count.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub initial_mesh: f64,
    pub contraction: f64,
    pub expansion: f64,
    pub mesh_tol: f64,
    pub max_evaluations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            initial_mesh: 0.1,
            contraction: 0.5,
            expansion: 2.0,
            mesh_tol: 1e-4,
            max_evaluations: 2000,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "contraction must lie in (0, 1), got {}",
                self.contraction
            )));
        }
        if !(self.expansion > 1.0 && self.expansion.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expansion must exceed 1, got {}",
                self.expansion
            )));
        }
        if !(self.mesh_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("mesh tolerance must be positive, got {}", self.mesh_tol)));
        }
        if !(self.initial_mesh > 0.0 && self.initial_mesh.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "initial mesh must be positive, got {}",
                self.initial_mesh
            )));
        }
        if self.max_evaluations == 0 {
            return Err(Error::InvalidParameter("evaluation budget must be positive".into()));
        }
        Ok(())
    }
}

/// One accepted incumbent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub point: Vec<f64>,
    #[serde(with = "crate::extended")]
    pub value: f64,
    pub mesh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub x: Vec<f64>,
    #[serde(with = "crate::extended")]
    pub value: f64,
    pub evaluations: usize,
    pub final_mesh: f64,
    /// `true` when the mesh fell below tolerance, `false` when the budget ran out.
    pub converged: bool,
    pub trace: Vec<TraceStep>,
}

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Evaluates `f`, mapping NaN to `+inf`.
fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `x0`. `scale[i]` stretches the mesh along coordinate
/// `i` (pass ones for an isotropic pattern).
pub fn pattern_search<F>(f: F, x0: &[f64], scale: &[f64], opts: &SearchOptions) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    opts.validate()?;
    if scale.len() != x0.len() || scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter("mesh scales must be positive, one per coordinate".into()));
    }
    let mut cache: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut evaluations = 1;
    let mut value = clean(f(x0));
    if value == f64::INFINITY {
        return Err(Error::InfeasibleStart("objective is infinite at the starting point".into()));
    }
    let mut x = x0.to_vec();
    cache.insert(key(&x), value);
    let mut mesh = opts.initial_mesh;
    let mut trace = vec![TraceStep {
        point: x.clone(),
        value,
        mesh,
    }];

    let d = x.len();
    while mesh >= opts.mesh_tol && evaluations < opts.max_evaluations {
        let poll: Vec<Vec<f64>> = (0..d)
            .flat_map(|i| [1.0, -1.0].map(|sign| (i, sign)))
            .map(|(i, sign)| {
                let mut p = x.clone();
                p[i] += sign * mesh * scale[i];
                p
            })
            .collect();
        let fresh: Vec<&Vec<f64>> = poll
            .iter()
            .filter(|p| !cache.contains_key(&key(p)))
            .take(opts.max_evaluations - evaluations)
            .collect();
        let values: Vec<f64> = fresh.par_iter().map(|p| clean(f(p))).collect();
        evaluations += fresh.len();
        for (p, v) in fresh.iter().zip(values) {
            cache.insert(key(p), v);
        }

        let mut best: Option<(usize, f64)> = None;
        for (j, p) in poll.iter().enumerate() {
            if let Some(&v) = cache.get(&key(p)) {
                if v < best.map_or(value, |b| b.1) {
                    best = Some((j, v));
                }
            }
        }
        match best {
            Some((j, v)) => {
                x = poll[j].clone();
                value = v;
                mesh *= opts.expansion;
                trace.push(TraceStep {
                    point: x.clone(),
                    value,
                    mesh,
                });
            }
            None => mesh *= opts.contraction,
        }
    }
    Ok(SearchResult {
        converged: mesh < opts.mesh_tol,
        x,
        value,
        evaluations,
        final_mesh: mesh,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SearchOptions {
        SearchOptions {
            initial_mesh: 0.5,
            ..Default::default()
        }
    }

    #[test]
    fn quadratic_bowl() {
        let r = pattern_search(|x| (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2), &[0.0, 0.0], &[1.0, 1.0], &opts()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 2.0).abs() < 1e-3, "{:?}", r.x);
        assert!(r.converged);
    }

    #[test]
    fn barrier() {
        let f = |x: &[f64]| if x[0] >= 0.0 { x[0] * x[0] } else { f64::INFINITY };
        let r = pattern_search(f, &[1.0], &[1.0], &opts()).unwrap();
        assert!(r.x[0].abs() < 1e-3);
    }

    #[test]
    fn nonsmooth() {
        let r = pattern_search(|x| x[0].abs() + 2.0 * x[1].abs(), &[1.0, 1.0], &[1.0, 1.0], &opts()).unwrap();
        assert!(r.value <= 1e-3);
    }

    #[test]
    fn infinite_start_is_rejected() {
        let r = pattern_search(|_| f64::INFINITY, &[0.0], &[1.0], &opts());
        assert!(matches!(r, Err(Error::InfeasibleStart(_))));
    }

    #[test]
    fn budget_is_respected() {
        let o = SearchOptions {
            max_evaluations: 7,
            ..opts()
        };
        let r = pattern_search(|x| x[0].powi(2) + x[1].powi(2), &[3.0, 3.0], &[1.0, 1.0], &o).unwrap();
        assert!(r.evaluations <= 7);
        assert!(!r.converged);
    }

    #[test]
    fn trace_is_monotone() {
        let r = pattern_search(|x| (x[0] - 0.3).powi(2) + x[0].sin(), &[2.0], &[1.0], &opts()).unwrap();
        for pair in r.trace.windows(2) {
            assert!(pair[1].value < pair[0].value);
        }
    }

    #[test]
    fn rejects_bad_options() {
        let mut o = opts();
        o.contraction = 1.0;
        assert!(pattern_search(|x| x[0], &[0.0], &[1.0], &o).is_err());
        let mut o = opts();
        o.expansion = 0.5;
        assert!(pattern_search(|x| x[0], &[0.0], &[1.0], &o).is_err());
    }
}
