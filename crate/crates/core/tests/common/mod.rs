//! Independent oracles shared by the integration suites: hand-written
//! recursions, random quadratic instances and averaging-matrix checks.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use commweights::graph::Graph;

pub fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Gradient-tracking recursion written out directly; returns `(x, s)`.
pub fn simulate_tracking(
    atc: bool,
    w: &DMatrix<f64>,
    alpha: f64,
    x0: &DMatrix<f64>,
    k: usize,
    mut grad: impl FnMut(usize, &DMatrix<f64>) -> DMatrix<f64>,
) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let mut xs = vec![x0.clone()];
    let mut gs = vec![grad(0, x0)];
    let mut ss = vec![gs[0].clone()];
    for j in 0..k {
        let x_next = if atc {
            w * (&xs[j] - &ss[j] * alpha)
        } else {
            w * &xs[j] - &ss[j] * alpha
        };
        let g_next = grad(j + 1, &x_next);
        let s_next = if atc {
            w * (&ss[j] + &g_next - &gs[j])
        } else {
            w * &ss[j] + &g_next - &gs[j]
        };
        xs.push(x_next);
        gs.push(g_next);
        ss.push(s_next);
    }
    (xs, ss)
}

/// EXTRA in its two-step form.
pub fn simulate_extra(
    w: &DMatrix<f64>,
    alpha: f64,
    x0: &DMatrix<f64>,
    k: usize,
    mut grad: impl FnMut(usize, &DMatrix<f64>) -> DMatrix<f64>,
) -> Vec<DMatrix<f64>> {
    let n = w.nrows();
    let i_plus_w = DMatrix::identity(n, n) + w;
    let w_tilde = &i_plus_w * 0.5;
    let mut gs = vec![grad(0, x0)];
    let mut xs = vec![x0.clone()];
    if k == 0 {
        return xs;
    }
    xs.push(w * x0 - &gs[0] * alpha);
    for j in 1..k {
        gs.push(grad(j, &xs[j]));
        let next = &i_plus_w * &xs[j] - &w_tilde * &xs[j - 1] - (&gs[j] - &gs[j - 1]) * alpha;
        xs.push(next);
    }
    xs
}

/// `f_i(x) = 1/2 (x - b_i)^T A_i (x - b_i)` with `sum_i A_i b_i = 0`, so that
/// the minimizer of the average is the origin.
pub struct Quadratics {
    pub a: Vec<DMatrix<f64>>,
    pub b: Vec<DVector<f64>>,
}

impl Quadratics {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, d: usize, mu: f64, l: f64, extreme: bool) -> Self {
        let mut a = Vec::with_capacity(n);
        for _ in 0..n {
            let q = gaussian(rng, d, d).qr().q();
            let eig = DVector::from_fn(d, |_, _| {
                if extreme {
                    if rng.random_bool(0.5) {
                        mu
                    } else {
                        l
                    }
                } else {
                    rng.random_range(mu..=l)
                }
            });
            a.push(&q * DMatrix::from_diagonal(&eig) * q.transpose());
        }
        let c: Vec<DVector<f64>> = (0..n).map(|_| gaussian(rng, d, 1).column(0).into_owned()).collect();
        let mean = c.iter().fold(DVector::zeros(d), |acc, v| acc + v) / n as f64;
        let b = a
            .iter()
            .zip(&c)
            .map(|(ai, ci)| ai.clone().try_inverse().expect("mu > 0") * (ci - &mean))
            .collect();
        Quadratics { a, b }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Gradients at the rows of `x`.
    pub fn grad(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(x.nrows(), x.ncols());
        for i in 0..self.n() {
            let xi = x.row(i).transpose();
            g.set_row(i, &(&self.a[i] * (xi - &self.b[i])).transpose());
        }
        g
    }

    pub fn value(&self, i: usize, x: &DVector<f64>) -> f64 {
        let r = x - &self.b[i];
        0.5 * r.dot(&(&self.a[i] * &r))
    }

    /// `(1/n) sum_i f_i(x)`.
    pub fn mean_value(&self, x: &DVector<f64>) -> f64 {
        (0..self.n()).map(|i| self.value(i, x)).sum::<f64>() / self.n() as f64
    }

    /// `(1/n) sum_i ||grad f_i(0)||^2`.
    pub fn heterogeneity(&self) -> f64 {
        (0..self.n())
            .map(|i| (&self.a[i] * &self.b[i]).norm_squared())
            .sum::<f64>()
            / self.n() as f64
    }

    pub fn scaled(&self, t: f64) -> Self {
        Quadratics {
            a: self.a.clone(),
            b: self.b.iter().map(|b| b * t).collect(),
        }
    }
}

/// `(1/n) sum_i ||row_i||^2`.
pub fn mean_square(x: &DMatrix<f64>) -> f64 {
    x.norm_squared() / x.nrows() as f64
}

/// `(1/n) sum_i ||row_i - mean row||^2`.
pub fn disagreement(x: &DMatrix<f64>) -> f64 {
    let n = x.nrows();
    let mean = x.row_sum() / n as f64;
    (0..n).map(|i| (x.row(i) - &mean).norm_squared()).sum::<f64>() / n as f64
}

/// Symmetry, unit row sums, graph sparsity and `slem < 1`; returns the
/// first violated property.
pub fn check_averaging(g: &Graph, w: &DMatrix<f64>) -> Result<(), String> {
    let n = g.node_count();
    if w.nrows() != n || w.ncols() != n {
        return Err(format!("W is {}x{}, expected {n}x{n}", w.nrows(), w.ncols()));
    }
    for i in 0..n {
        for j in 0..n {
            if (w[(i, j)] - w[(j, i)]).abs() > 1e-12 {
                return Err(format!("W not symmetric at ({i},{j})"));
            }
            if i != j && g.edge_index(i, j).is_none() && w[(i, j)] != 0.0 {
                return Err(format!("W has weight on non-edge ({i},{j})"));
            }
        }
        let sum: f64 = w.row(i).iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(format!("row {i} sums to {sum}"));
        }
    }
    let eig = w.clone().symmetric_eigenvalues();
    let mut sorted: Vec<f64> = eig.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let slem = sorted[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if n > 1 && slem >= 1.0 - 1e-9 {
        return Err(format!("slem {slem} >= 1"));
    }
    Ok(())
}
