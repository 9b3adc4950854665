//! Standard-form semidefinite programs with one PSD block and free scalars.
//!
//! A problem reads
//!
//! ```text
//!   min / max   <C, X> + c_y . y
//!   s.t.        <A_k, X> + a_k . y  (= | <=)  b_k
//!               X >= 0 (s x s),  y free
//! ```
//!
//! Coefficient matrices are kept as sums of symmetrized outer products (see
//! [`SymCoef`]); this is how the performance-estimation compiler naturally
//! produces them and lets the solver factor each row cheaply.

mod dump;
mod ipm;
pub mod lmi;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dump::write_triplets;
pub use ipm::solve;

/// Sparse vector as `(index, value)` pairs.
pub type SparseVec = Vec<(usize, f64)>;

/// `coef * (u v^T + v u^T) / 2`, so that `<term, X> = coef * u^T X v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTerm {
    pub coef: f64,
    pub u: SparseVec,
    pub v: SparseVec,
}

/// A symmetric coefficient matrix stored as a sum of [`SymTerm`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymCoef {
    terms: Vec<SymTerm>,
}

fn sparsify(dense: &[f64]) -> SparseVec {
    dense
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i, *v))
        .collect()
}

impl SymCoef {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[SymTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * X[i, j]` to the linear functional.
    pub fn element(&mut self, i: usize, j: usize, c: f64) -> &mut Self {
        if c != 0.0 {
            self.terms.push(SymTerm {
                coef: c,
                u: vec![(i, 1.0)],
                v: vec![(j, 1.0)],
            });
        }
        self
    }

    /// Adds `c * u^T X v` for dense coordinate vectors `u`, `v`.
    pub fn inner(&mut self, c: f64, u: &[f64], v: &[f64]) -> &mut Self {
        let (u, v) = (sparsify(u), sparsify(v));
        if c != 0.0 && !u.is_empty() && !v.is_empty() {
            self.terms.push(SymTerm { coef: c, u, v });
        }
        self
    }

    /// Adds `c * ||u||_X^2 = c * u^T X u`.
    pub fn quad(&mut self, c: f64, u: &[f64]) -> &mut Self {
        self.inner(c, u, u)
    }

    pub fn extend(&mut self, other: &SymCoef) -> &mut Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    /// Linear functional `<M, X>` of a dense symmetric matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension("coefficient matrix must be square".into()));
        }
        let mut out = SymCoef::new();
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NonSymmetric(format!("entry ({i},{j})")));
                }
                let c = if i == j { m[(i, i)] } else { 2.0 * m[(i, j)] };
                out.element(i, j, c);
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self, s: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(s, s);
        for t in &self.terms {
            for &(i, ui) in &t.u {
                for &(j, vj) in &t.v {
                    let h = 0.5 * t.coef * ui * vj;
                    m[(i, j)] += h;
                    m[(j, i)] += h;
                }
            }
        }
        m
    }

    /// `<self, X>`.
    pub fn eval(&self, x: &DMatrix<f64>) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mut acc = 0.0;
                for &(i, ui) in &t.u {
                    for &(j, vj) in &t.v {
                        acc += ui * x[(i, j)] * vj;
                    }
                }
                t.coef * acc
            })
            .sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.u.iter().chain(&t.v).map(|&(i, _)| i))
            .max()
    }

    fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| {
            t.coef.is_finite() && t.u.iter().chain(&t.v).all(|&(_, v)| v.is_finite())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    Eq,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `<a_x, X> + a_y . y (= | <=) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub x: SymCoef,
    pub y: SparseVec,
    pub rhs: f64,
    pub kind: RowKind,
}

impl Constraint {
    pub fn eq(x: SymCoef, y: SparseVec, rhs: f64) -> Self {
        Constraint {
            x,
            y,
            rhs,
            kind: RowKind::Eq,
        }
    }

    pub fn le(x: SymCoef, y: SparseVec, rhs: f64) -> Self {
        Constraint {
            x,
            y,
            rhs,
            kind: RowKind::Le,
        }
    }

    /// Left-hand side at `(X, y)`.
    pub fn lhs(&self, x: &DMatrix<f64>, y: &[f64]) -> f64 {
        self.x.eval(x) + self.y.iter().map(|&(k, a)| a * y[k]).sum::<f64>()
    }

    /// Amount by which `(X, y)` violates the row (0 when satisfied).
    pub fn violation(&self, x: &DMatrix<f64>, y: &[f64]) -> f64 {
        let d = self.lhs(x, y) - self.rhs;
        match self.kind {
            RowKind::Eq => d.abs(),
            RowKind::Le => d.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Objective {
    pub x: SymCoef,
    pub y: SparseVec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub psd_dim: usize,
    pub free_dim: usize,
    pub objective: Objective,
    pub rows: Vec<Constraint>,
    pub sense: Sense,
}

impl SdpProblem {
    pub fn new(psd_dim: usize, free_dim: usize, sense: Sense) -> Self {
        SdpProblem {
            psd_dim,
            free_dim,
            objective: Objective::default(),
            rows: Vec::new(),
            sense,
        }
    }

    pub fn objective_value(&self, x: &DMatrix<f64>, y: &[f64]) -> f64 {
        self.objective.x.eval(x) + self.objective.y.iter().map(|&(k, c)| c * y[k]).sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        let check_coef = |c: &SymCoef, what: &str| -> Result<()> {
            if let Some(i) = c.max_index() {
                if i >= self.psd_dim {
                    return Err(Error::Dimension(format!(
                        "{what}: PSD index {i} out of range for side {}",
                        self.psd_dim
                    )));
                }
            }
            if !c.is_finite() {
                return Err(Error::InvalidParameter(format!("{what}: non-finite coefficient")));
            }
            Ok(())
        };
        let check_free = |y: &SparseVec, what: &str| -> Result<()> {
            for &(k, v) in y {
                if k >= self.free_dim {
                    return Err(Error::Dimension(format!(
                        "{what}: free index {k} out of range for {} free variables",
                        self.free_dim
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!("{what}: non-finite coefficient")));
                }
            }
            Ok(())
        };
        check_coef(&self.objective.x, "objective")?;
        check_free(&self.objective.y, "objective")?;
        for (k, r) in self.rows.iter().enumerate() {
            let what = format!("row {k}");
            check_coef(&r.x, &what)?;
            check_free(&r.y, &what)?;
            if !r.rhs.is_finite() {
                return Err(Error::InvalidParameter(format!("{what}: non-finite right-hand side")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIter => "max_iter",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Largest row violation over `1 + ||b||_inf`.
    pub primal: f64,
    /// Relative dual infeasibility of the internal (scaled) problem.
    pub dual: f64,
    /// Relative complementarity gap.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    /// Multipliers of the constraint rows, in the problem's own sign
    /// convention for a minimization.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub residuals: Residuals,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, -1.0, 0.5, 0.0, 0.5, 3.0]);
        let c = SymCoef::from_dense(&m).unwrap();
        assert_eq!(c.to_dense(3), m);
        let x = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let expected = m.component_mul(&x).sum();
        assert!((c.eval(&x) - expected).abs() < 1e-14);
    }

    #[test]
    fn non_symmetric_dense_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(SymCoef::from_dense(&m), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn inner_matches_dense() {
        let u = [1.0, 0.0, -2.0];
        let v = [0.5, 1.0, 0.0];
        let mut c = SymCoef::new();
        c.inner(3.0, &u, &v);
        let x = DMatrix::from_fn(3, 3, |i, j| 1.0 + (i * j) as f64 + (i + j) as f64);
        let x = (&x + x.transpose()) * 0.5;
        let direct: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| u[i] * x[(i, j)] * v[j])
            .sum::<f64>()
            * 3.0;
        assert!((c.eval(&x) - direct).abs() < 1e-12);
        assert!((c.to_dense(3).component_mul(&x).sum() - direct).abs() < 1e-12);
    }

    #[test]
    fn validation_catches_out_of_range() {
        let mut p = SdpProblem::new(2, 1, Sense::Minimize);
        let mut c = SymCoef::new();
        c.element(0, 2, 1.0);
        p.rows.push(Constraint::eq(c, vec![], 1.0));
        assert!(matches!(p.validate(), Err(Error::Dimension(_))));
        let mut p = SdpProblem::new(2, 1, Sense::Minimize);
        p.rows.push(Constraint::eq(SymCoef::new(), vec![(1, 1.0)], 1.0));
        assert!(matches!(p.validate(), Err(Error::Dimension(_))));
    }
}
