//! Incremental construction of single-block SDPs from linear matrix
//! inequalities.
//!
//! Each LMI gets its own diagonal sub-block of the PSD variable; the entries of
//! that sub-block are pinned to the affine expression with equality rows. The
//! cross blocks between different LMIs are left unconstrained, which does not
//! change the feasible set of the diagonal blocks.

use nalgebra::DMatrix;

use super::{Constraint, RowKind, Sense, SdpProblem, SparseVec, SymCoef};
use crate::error::{Error, Result};

/// A square sub-block of the PSD variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub offset: usize,
    pub size: usize,
}

impl Block {
    pub fn index(&self, i: usize) -> usize {
        self.offset + i
    }
}

/// One scalar entry of an affine matrix expression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineScalar {
    pub constant: f64,
    /// `(free index, coefficient)`.
    pub free: SparseVec,
    /// `(row, col, coefficient)` on entries of the PSD variable.
    pub psd: Vec<(usize, usize, f64)>,
}

/// Symmetric `k x k` matrix whose entries are affine in the free variables and
/// the PSD variable. Only the upper triangle is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSym {
    size: usize,
    entries: Vec<AffineScalar>,
}

impl AffineSym {
    pub fn zeros(size: usize) -> Self {
        AffineSym {
            size,
            entries: vec![AffineScalar::default(); size * (size + 1) / 2],
        }
    }

    pub fn constant(m: &DMatrix<f64>) -> Result<Self> {
        let mut out = Self::zeros(m.nrows());
        out.add_constant(m)?;
        Ok(out)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        i * self.size - i * (i + 1) / 2 + j
    }

    pub fn entry(&self, i: usize, j: usize) -> &AffineScalar {
        &self.entries[self.slot(i, j)]
    }

    fn check(&self, m: &DMatrix<f64>) -> Result<()> {
        if m.nrows() != self.size || m.ncols() != self.size {
            return Err(Error::Dimension(format!(
                "{}x{} term in a {}x{} expression",
                m.nrows(),
                m.ncols(),
                self.size,
                self.size
            )));
        }
        for i in 0..self.size {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NonSymmetric(format!("entry ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    pub fn add_constant(&mut self, m: &DMatrix<f64>) -> Result<&mut Self> {
        self.check(m)?;
        for i in 0..self.size {
            for j in i..self.size {
                let s = self.slot(i, j);
                self.entries[s].constant += m[(i, j)];
            }
        }
        Ok(self)
    }

    /// Adds `y_k * m`.
    pub fn add_free(&mut self, k: usize, m: &DMatrix<f64>) -> Result<&mut Self> {
        self.check(m)?;
        for i in 0..self.size {
            for j in i..self.size {
                if m[(i, j)] != 0.0 {
                    let s = self.slot(i, j);
                    self.entries[s].free.push((k, m[(i, j)]));
                }
            }
        }
        Ok(self)
    }

    /// Adds `c * I * y_k`.
    pub fn add_free_identity(&mut self, k: usize, c: f64) -> &mut Self {
        for i in 0..self.size {
            let s = self.slot(i, i);
            self.entries[s].free.push((k, c));
        }
        self
    }

    /// Adds `c * X[block]`.
    pub fn add_block(&mut self, block: Block, c: f64) -> Result<&mut Self> {
        if block.size != self.size {
            return Err(Error::Dimension(format!(
                "block of size {} in a {}x{} expression",
                block.size, self.size, self.size
            )));
        }
        for i in 0..self.size {
            for j in i..self.size {
                let s = self.slot(i, j);
                self.entries[s]
                    .psd
                    .push((block.index(i), block.index(j), c));
            }
        }
        Ok(self)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.constant *= c;
            e.free.iter_mut().for_each(|t| t.1 *= c);
            e.psd.iter_mut().for_each(|t| t.2 *= c);
        }
        out
    }
}

/// The lower-right block of a Schur LMI: either pinned to an expression or
/// left as a fresh symmetric matrix variable.
pub enum SchurLower<'a> {
    Pinned(&'a AffineSym),
    Variable,
}

/// Accumulates blocks, rows and the objective of an [`SdpProblem`].
#[derive(Debug, Clone)]
pub struct SdpBuilder {
    problem: SdpProblem,
}

impl SdpBuilder {
    pub fn new(free_dim: usize, sense: Sense) -> Self {
        SdpBuilder {
            problem: SdpProblem::new(0, free_dim, sense),
        }
    }

    pub fn add_free(&mut self) -> usize {
        self.problem.free_dim += 1;
        self.problem.free_dim - 1
    }

    pub fn free_dim(&self) -> usize {
        self.problem.free_dim
    }

    pub fn add_block(&mut self, size: usize) -> Block {
        let b = Block {
            offset: self.problem.psd_dim,
            size,
        };
        self.problem.psd_dim += size;
        b
    }

    pub fn add_row(&mut self, row: Constraint) {
        self.problem.rows.push(row);
    }

    pub fn objective_free(&mut self, k: usize, c: f64) {
        self.problem.objective.y.push((k, c));
    }

    pub fn objective_trace(&mut self, block: Block, c: f64) {
        for i in 0..block.size {
            self.problem
                .objective
                .x
                .element(block.index(i), block.index(i), c);
        }
    }

    /// Pins `X[block] = expr` entrywise.
    pub fn pin(&mut self, block: Block, expr: &AffineSym) -> Result<()> {
        if block.size != expr.size() {
            return Err(Error::Dimension(format!(
                "pinning a {}x{} expression to a block of size {}",
                expr.size(),
                expr.size(),
                block.size
            )));
        }
        for i in 0..block.size {
            for j in i..block.size {
                let e = expr.entry(i, j);
                let mut x = SymCoef::new();
                x.element(block.index(i), block.index(j), 1.0);
                for &(a, b, c) in &e.psd {
                    x.element(a, b, -c);
                }
                let y = e.free.iter().map(|&(k, c)| (k, -c)).collect();
                self.problem.rows.push(Constraint {
                    x,
                    y,
                    rhs: e.constant,
                    kind: RowKind::Eq,
                });
            }
        }
        Ok(())
    }

    /// `expr = 0` entrywise (upper triangle).
    pub fn zero(&mut self, expr: &AffineSym) {
        for i in 0..expr.size() {
            for j in i..expr.size() {
                let e = expr.entry(i, j);
                let mut x = SymCoef::new();
                for &(a, b, c) in &e.psd {
                    x.element(a, b, c);
                }
                self.problem
                    .rows
                    .push(Constraint::eq(x, e.free.clone(), -e.constant));
            }
        }
    }

    /// `expr >= 0` as a pinned block.
    pub fn psd(&mut self, expr: &AffineSym) -> Result<Block> {
        let b = self.add_block(expr.size());
        self.pin(b, expr)?;
        Ok(b)
    }

    /// `[[M, I], [I, N]] >= 0`. Returns the block holding `N` (a fresh
    /// matrix variable for [`SchurLower::Variable`]).
    pub fn schur_block(&mut self, m: &AffineSym, lower: SchurLower<'_>) -> Result<Block> {
        let k = m.size();
        if let SchurLower::Pinned(n) = &lower {
            if n.size() != k {
                return Err(Error::Dimension(format!(
                    "schur block sizes {k} and {} differ",
                    n.size()
                )));
            }
        }
        let whole = self.add_block(2 * k);
        let upper = Block {
            offset: whole.offset,
            size: k,
        };
        let lower_block = Block {
            offset: whole.offset + k,
            size: k,
        };
        self.pin(upper, m)?;
        for i in 0..k {
            for j in 0..k {
                let mut x = SymCoef::new();
                x.element(upper.index(i), lower_block.index(j), 1.0);
                let rhs = if i == j { 1.0 } else { 0.0 };
                self.problem.rows.push(Constraint::eq(x, vec![], rhs));
            }
        }
        if let SchurLower::Pinned(n) = lower {
            self.pin(lower_block, n)?;
        }
        Ok(lower_block)
    }

    /// `-t I <= M <= t I` for the free variable `t`.
    pub fn spectral_norm_epigraph(&mut self, m: &AffineSym, t: usize) -> Result<()> {
        if t >= self.problem.free_dim {
            return Err(Error::Dimension(format!("free variable {t} does not exist")));
        }
        let mut upper = m.scaled(-1.0);
        upper.add_free_identity(t, 1.0);
        let mut lower = m.clone();
        lower.add_free_identity(t, 1.0);
        self.psd(&upper)?;
        self.psd(&lower)?;
        Ok(())
    }

    pub fn build(self) -> SdpProblem {
        self.problem
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve, SolveStatus, SolverOptions};

    fn tight() -> SolverOptions {
        SolverOptions {
            tol: 1e-9,
            max_iter: 100,
        }
    }

    #[test]
    fn schur_with_identity_gives_trace_n() {
        let n = 4;
        let mut b = SdpBuilder::new(0, Sense::Minimize);
        let m = AffineSym::constant(&DMatrix::identity(n, n)).unwrap();
        let y = b.schur_block(&m, SchurLower::Variable).unwrap();
        b.objective_trace(y, 1.0);
        let p = b.build();
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - n as f64).abs() < 1e-6, "{}", sol.objective);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let mut b = SdpBuilder::new(1, Sense::Minimize);
        let m = AffineSym::constant(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            vec![3.0, -5.0],
        )))
        .unwrap();
        b.spectral_norm_epigraph(&m, 0).unwrap();
        b.objective_free(0, 1.0);
        let sol = solve(&b.build(), &tight()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 5.0).abs() < 1e-6);
        assert!((sol.y[0] - 5.0).abs() < 1e-6);
    }

    #[test]
    fn spectral_norm_of_zero_is_feasible_for_any_t() {
        for t in [0.0, 0.5, 3.0] {
            let mut b = SdpBuilder::new(1, Sense::Minimize);
            let m = AffineSym::zeros(3);
            b.spectral_norm_epigraph(&m, 0).unwrap();
            b.add_row(Constraint::eq(SymCoef::new(), vec![(0, 1.0)], t));
            let sol = solve(&b.build(), &tight()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal, "t = {t}");
        }
        // ... and infeasible for negative t.
        let mut b = SdpBuilder::new(1, Sense::Minimize);
        b.spectral_norm_epigraph(&AffineSym::zeros(2), 0).unwrap();
        b.add_row(Constraint::eq(SymCoef::new(), vec![(0, 1.0)], -1.0));
        let sol = solve(&b.build(), &tight()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn dimension_errors() {
        let mut b = SdpBuilder::new(1, Sense::Minimize);
        let m = AffineSym::zeros(2);
        let n = AffineSym::zeros(3);
        assert!(b.schur_block(&m, SchurLower::Pinned(&n)).is_err());
        assert!(b.spectral_norm_epigraph(&m, 5).is_err());
        let mut e = AffineSym::zeros(2);
        assert!(e.add_constant(&DMatrix::identity(3, 3)).is_err());
        assert!(e
            .add_constant(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]))
            .is_err());
    }
}
