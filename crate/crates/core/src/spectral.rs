//! Averaging matrices and their eigenvalue functionals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Row-sum tolerance accepted for matrices given directly.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A symmetric averaging matrix `W = I - B diag(w) B^T` over a graph.
///
/// Construction goes through the edge weights, so symmetry and the zero
/// pattern hold exactly. Weights may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingMatrix {
    matrix: DMatrix<f64>,
    weights: Vec<f64>,
}

/// Eigenvalues in descending order with the consensus eigenvalue (`1`, along
/// the all-ones vector) placed first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl AveragingMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Reads edge weights back from an explicit matrix after checking
    /// symmetry, unit row sums and the sparsity pattern of `g`.
    pub fn from_matrix(g: &Graph, w: DMatrix<f64>) -> Result<Self> {
        let n = g.node_count();
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, graph has {n} nodes",
                w.nrows(),
                w.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if w[(i, j)] != w[(j, i)] {
                    return Err(Error::NonSymmetric(format!("W[{i},{j}] != W[{j},{i}]")));
                }
                if w[(i, j)] != 0.0 && g.edge_index(i, j).is_none() {
                    return Err(Error::InvalidParameter(format!(
                        "W[{i},{j}] is nonzero but ({j},{i}) is not an edge"
                    )));
                }
            }
            let row: f64 = w.row(i).sum();
            if (row - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidParameter(format!("row {i} sums to {row}")));
            }
        }
        let weights = g.edges().iter().map(|&(i, j)| w[(i, j)]).collect();
        Ok(AveragingMatrix { matrix: w, weights })
    }

    /// `(I + W) / 2`, i.e. halved edge weights.
    pub fn lazy(&self, g: &Graph) -> Result<Self> {
        let half: Vec<f64> = self.weights.iter().map(|w| 0.5 * w).collect();
        averaging_from_weights(g, &half)
    }
}

pub fn averaging_from_weights(g: &Graph, w: &[f64]) -> Result<AveragingMatrix> {
    if w.len() != g.edge_count() {
        return Err(Error::Dimension(format!(
            "{} weights for {} edges",
            w.len(),
            g.edge_count()
        )));
    }
    let n = g.node_count();
    let mut m = DMatrix::identity(n, n);
    for (&(i, j), &we) in g.edges().iter().zip(w) {
        m[(i, i)] -= we;
        m[(j, j)] -= we;
        m[(i, j)] = we;
        m[(j, i)] = we;
    }
    Ok(AveragingMatrix {
        matrix: m,
        weights: w.to_vec(),
    })
}

/// Orthonormal basis of the complement of the all-ones vector (columns of a
/// Householder reflector that maps `e_0` onto `1/sqrt(n)`).
pub fn consensus_complement(n: usize) -> DMatrix<f64> {
    if n <= 1 {
        return DMatrix::zeros(n, 0);
    }
    let s = 1.0 / (n as f64).sqrt();
    let mut v = DVector::from_element(n, s);
    v[0] -= 1.0;
    let vv = v.dot(&v);
    let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, n - 1).into_owned()
}

/// Eigenvalues of `W` restricted to the complement of the consensus
/// direction, descending, with eigenvectors in the full space.
fn disagreement_eigen(w: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = w.nrows();
    let basis = consensus_complement(n);
    if n <= 1 {
        return (Vec::new(), DMatrix::zeros(n, 0));
    }
    let mut reduced = basis.transpose() * w * &basis;
    let sym = (&reduced + reduced.transpose()) * 0.5;
    reduced = sym;
    let eig = SymmetricEigen::new(reduced);
    let mut idx: Vec<usize> = (0..n - 1).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::zeros(n, n - 1);
    for (c, &k) in idx.iter().enumerate() {
        vecs.set_column(c, &(&basis * eig.eigenvectors.column(k)));
    }
    (values, vecs)
}

pub fn spectrum(w: &AveragingMatrix) -> Spectrum {
    spectrum_of(w.matrix())
}

/// Spectrum of any symmetric matrix with unit row sums.
pub fn spectrum_of(w: &DMatrix<f64>) -> Spectrum {
    let n = w.nrows();
    let (rest, vecs) = disagreement_eigen(w);
    let mut eigenvalues = Vec::with_capacity(n);
    eigenvalues.push(1.0);
    eigenvalues.extend(rest);
    let mut all = DMatrix::zeros(n, n);
    if n > 0 {
        all.set_column(0, &DVector::from_element(n, 1.0 / (n as f64).sqrt()));
        for c in 0..n - 1 {
            all.set_column(c + 1, &vecs.column(c));
        }
    }
    Spectrum {
        eigenvalues,
        eigenvectors: Some(all),
    }
}

impl Spectrum {
    /// `lambda_2 .. lambda_n`.
    pub fn disagreement(&self) -> &[f64] {
        &self.eigenvalues[1..]
    }
}

/// Second-largest eigenvalue modulus, equal to `||W - 11^T/n||_2`.
pub fn slem(w: &AveragingMatrix) -> f64 {
    slem_of(w.matrix())
}

pub fn slem_of(w: &DMatrix<f64>) -> f64 {
    disagreement_eigen(w)
        .0
        .iter()
        .fold(0.0_f64, |acc, l| acc.max(l.abs()))
}

/// Steady-state mean-square deviation `sum_{i>=2} 1/(1 - lambda_i^2)`;
/// infinite when some `|lambda_i| >= 1`.
pub fn delta_ss(w: &AveragingMatrix) -> f64 {
    delta_ss_of(spectrum(w).disagreement())
}

pub fn delta_ss_of(lambdas: &[f64]) -> f64 {
    let mut total = 0.0;
    for &l in lambdas {
        let d = 1.0 - l * l;
        if d <= 0.0 {
            return f64::INFINITY;
        }
        total += 1.0 / d;
    }
    total
}

/// Total effective resistance `n sum_{i>=2} 1/(1 - lambda_i)`; infinite when
/// some `lambda_i >= 1`.
pub fn rtot(w: &AveragingMatrix) -> f64 {
    rtot_of(spectrum(w).disagreement())
}

pub fn rtot_of(lambdas: &[f64]) -> f64 {
    let n = (lambdas.len() + 1) as f64;
    let mut total = 0.0;
    for &l in lambdas {
        let d = 1.0 - l;
        if d <= 0.0 {
            return f64::INFINITY;
        }
        total += 1.0 / d;
    }
    n * total
}

/// Checks that `gamma` is a valid weighting for the weighted nuclear norm:
/// one entry per eigenvalue, non-negative and non-increasing.
pub fn validate_gamma(gamma: &[f64], n: usize) -> Result<()> {
    if gamma.len() != n {
        return Err(Error::Dimension(format!("gamma has {} entries, need {n}", gamma.len())));
    }
    if gamma.iter().any(|&g| !(g >= 0.0)) {
        return Err(Error::InvalidParameter("gamma must be non-negative".into()));
    }
    if gamma.windows(2).any(|p| p[1] > p[0]) {
        return Err(Error::InvalidParameter("gamma must be non-increasing".into()));
    }
    Ok(())
}

/// `sum_i gamma_i |lambda|_(i)` with the moduli sorted descending.
pub fn weighted_nuclear_norm(w: &AveragingMatrix, gamma: &[f64]) -> Result<f64> {
    validate_gamma(gamma, w.n())?;
    let mut moduli: Vec<f64> = spectrum(w).eigenvalues.iter().map(|l| l.abs()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok(gamma.iter().zip(&moduli).map(|(g, l)| g * l).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_topology, Topology};
    use approx::assert_abs_diff_eq;

    fn uniform(kind: Topology, q: f64) -> (Graph, AveragingMatrix) {
        let g = make_topology(kind, 9).unwrap();
        let w = averaging_from_weights(&g, &vec![q; g.edge_count()]).unwrap();
        (g, w)
    }

    #[test]
    fn complete_with_one_ninth_is_averaging_projector() {
        let (_, w) = uniform(Topology::Complete, 1.0 / 9.0);
        for v in w.matrix().iter() {
            assert_abs_diff_eq!(*v, 1.0 / 9.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(slem(&w), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(delta_ss(&w), 8.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rtot(&w), 72.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            weighted_nuclear_norm(&w, &[1.0; 9]).unwrap(),
            1.0,
            epsilon = 1e-10
        );
        let sp = spectrum(&w);
        assert_eq!(sp.eigenvalues[0], 1.0);
        assert!(sp.disagreement().iter().all(|l| l.abs() < 1e-12));
    }

    #[test]
    fn zero_weights_give_identity() {
        let (g, w) = uniform(Topology::Cycle, 0.0);
        assert_eq!(w.matrix(), &DMatrix::identity(9, 9));
        assert_abs_diff_eq!(slem(&w), 1.0, epsilon = 1e-12);
        assert_eq!(delta_ss(&w), f64::INFINITY);
        assert_eq!(rtot(&w), f64::INFINITY);
        assert_abs_diff_eq!(
            weighted_nuclear_norm(&w, &[1.0; 9]).unwrap(),
            9.0,
            epsilon = 1e-10
        );
        let mut gamma = [0.0; 9];
        gamma[0] = 1.0;
        assert_abs_diff_eq!(weighted_nuclear_norm(&w, &gamma).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(g.edge_count(), w.weights().len());
    }

    #[test]
    fn cycle_third_weights() {
        let (_, w) = uniform(Topology::Cycle, 1.0 / 3.0);
        let m = w.matrix();
        for i in 0..9 {
            assert_abs_diff_eq!(m[(i, i)], 1.0 / 3.0, epsilon = 1e-15);
            assert_abs_diff_eq!(m[(i, (i + 1) % 9)], 1.0 / 3.0, epsilon = 1e-15);
            assert_eq!(m[(i, (i + 4) % 9)], 0.0);
        }
    }

    #[test]
    fn star_slem() {
        let (_, w) = uniform(Topology::Star, 0.2);
        assert_abs_diff_eq!(slem(&w), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn complete_spectrum_and_rtot() {
        let q = 0.07;
        let (_, w) = uniform(Topology::Complete, q);
        let sp = spectrum(&w);
        for l in sp.disagreement() {
            assert_abs_diff_eq!(*l, 1.0 - 9.0 * q, epsilon = 1e-12);
        }
        let (_, w) = uniform(Topology::Complete, 1.0 / 8.0);
        assert_abs_diff_eq!(rtot(&w), 64.0, epsilon = 1e-10);
    }

    #[test]
    fn lazy_maps_eigenvalues() {
        let (g, w) = uniform(Topology::Cycle, 0.45);
        let lazy = w.lazy(&g).unwrap();
        let a = spectrum(&w);
        let b = spectrum(&lazy);
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert_abs_diff_eq!((1.0 + x) / 2.0, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_diagonalize() {
        let (_, w) = uniform(Topology::Grid, 0.21);
        let sp = spectrum(&w);
        let v = sp.eigenvectors.clone().unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(sp.eigenvalues.clone()));
        let recon = &v * d * v.transpose();
        assert!((recon - w.matrix()).abs().max() < 1e-12);
        assert!((v.transpose() * &v - DMatrix::identity(9, 9)).abs().max() < 1e-12);
    }

    #[test]
    fn gamma_validation() {
        let (_, w) = uniform(Topology::Cycle, 0.3);
        assert!(weighted_nuclear_norm(&w, &[1.0; 8]).is_err());
        let mut inc = [1.0; 9];
        inc[3] = 2.0;
        assert!(weighted_nuclear_norm(&w, &inc).is_err());
        let mut neg = [0.0; 9];
        neg[0] = -1.0;
        assert!(weighted_nuclear_norm(&w, &neg).is_err());
    }

    #[test]
    fn from_matrix_checks_assumptions() {
        let g = make_topology(Topology::Cycle, 4).unwrap();
        let w = averaging_from_weights(&g, &[0.1, 0.2, 0.3, 0.25]).unwrap();
        let back = AveragingMatrix::from_matrix(&g, w.matrix().clone()).unwrap();
        assert_eq!(back.weights(), w.weights());
        let mut bad = w.matrix().clone();
        bad[(0, 2)] = 0.1;
        bad[(2, 0)] = 0.1;
        assert!(AveragingMatrix::from_matrix(&g, bad).is_err());
        let mut asym = w.matrix().clone();
        asym[(0, 1)] += 1e-3;
        assert!(AveragingMatrix::from_matrix(&g, asym).is_err());
        assert!(averaging_from_weights(&g, &[0.1]).is_err());
    }
}
