//! Decentralized first-order recursions.
//!
//! Every algorithm is written once against `n x c` matrices whose rows are the
//! agents' vectors. The PEP compiler runs it on coefficient rows over the Gram
//! basis; simulations and worst-case replays run it on concrete vectors.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Callback returning the stacked gradients `G^k` at the iterate `X^k`.
pub type GradientOracle<'a> = dyn FnMut(usize, &DMatrix<f64>) -> DMatrix<f64> + 'a;

/// Iterates of one run: `x` and the auxiliary state `s` (tracking variable
/// or dual variable) at every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<DMatrix<f64>>,
    pub s: Vec<DMatrix<f64>>,
}

pub trait Algorithm: Send + Sync {
    fn name(&self) -> &'static str;

    /// Runs `k` iterations from `x0` and returns `X^0 ..= X^k` (and `S^0 ..=
    /// S^k` when tracked). `grad` is queried for `G^0 ..= G^k` in order.
    fn run(
        &self,
        w: &DMatrix<f64>,
        alpha: f64,
        x0: &DMatrix<f64>,
        k: usize,
        grad: &mut GradientOracle<'_>,
    ) -> Trajectory;

    /// Value of the state variable `s` at the fixed point, given the local
    /// gradients `G*` at the optimum.
    fn optimal_state(&self, g_star: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::zeros(g_star.nrows(), g_star.ncols())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    Diging,
    AtcDiging,
    Extra,
}

impl AlgorithmId {
    pub fn all() -> [AlgorithmId; 3] {
        [AlgorithmId::Diging, AlgorithmId::AtcDiging, AlgorithmId::Extra]
    }

    pub fn implementation(self) -> &'static dyn Algorithm {
        match self {
            AlgorithmId::Diging => &Diging,
            AlgorithmId::AtcDiging => &AtcDiging,
            AlgorithmId::Extra => &Extra,
        }
    }

    /// Whether the method carries a gradient-tracking variable initialized
    /// with `s^0 = grad f(x^0)`.
    pub fn is_gradient_tracking(self) -> bool {
        matches!(self, AlgorithmId::Diging | AlgorithmId::AtcDiging)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.implementation().name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "diging" => Ok(AlgorithmId::Diging),
            "atc-diging" => Ok(AlgorithmId::AtcDiging),
            "extra" => Ok(AlgorithmId::Extra),
            other => Err(Error::InvalidParameter(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// `x^{k+1} = W x^k - alpha s^k`, `s^{k+1} = W s^k + G^{k+1} - G^k`,
/// `s^0 = G^0`.
pub struct Diging;

/// `x^{k+1} = W (x^k - alpha s^k)`, `s^{k+1} = W (s^k + G^{k+1} - G^k)`,
/// `s^0 = G^0`.
pub struct AtcDiging;

/// `x^1 = W x^0 - alpha G^0`,
/// `x^{k+2} = (I + W) x^{k+1} - W~ x^k - alpha (G^{k+1} - G^k)` with
/// `W~ = (I + W) / 2`.
pub struct Extra;

fn tracking(
    atc: bool,
    w: &DMatrix<f64>,
    alpha: f64,
    x0: &DMatrix<f64>,
    k: usize,
    grad: &mut GradientOracle<'_>,
) -> Trajectory {
    let mut g = grad(0, x0);
    let mut xs = vec![x0.clone()];
    let mut ss = vec![g.clone()];
    for j in 0..k {
        let (x, s) = (&xs[j], &ss[j]);
        let next = if atc {
            w * (x - s * alpha)
        } else {
            w * x - s * alpha
        };
        let g_next = grad(j + 1, &next);
        let innovation = &g_next - &g;
        let s_next = if atc {
            w * (s + innovation)
        } else {
            w * s + innovation
        };
        g = g_next;
        xs.push(next);
        ss.push(s_next);
    }
    Trajectory { x: xs, s: ss }
}

impl Algorithm for Diging {
    fn name(&self) -> &'static str {
        "diging"
    }

    fn run(
        &self,
        w: &DMatrix<f64>,
        alpha: f64,
        x0: &DMatrix<f64>,
        k: usize,
        grad: &mut GradientOracle<'_>,
    ) -> Trajectory {
        tracking(false, w, alpha, x0, k, grad)
    }
}

impl Algorithm for AtcDiging {
    fn name(&self) -> &'static str {
        "atc-diging"
    }

    fn run(
        &self,
        w: &DMatrix<f64>,
        alpha: f64,
        x0: &DMatrix<f64>,
        k: usize,
        grad: &mut GradientOracle<'_>,
    ) -> Trajectory {
        tracking(true, w, alpha, x0, k, grad)
    }
}

impl Algorithm for Extra {
    fn name(&self) -> &'static str {
        "extra"
    }

    /// Runs the equivalent form `x^{k+1} = W x^k - alpha (G^k + y^k)`,
    /// `y^{k+1} = y^k + (I - W) x^k / (2 alpha)`, `y^0 = 0`, and reports `y`
    /// as the state.
    fn run(
        &self,
        w: &DMatrix<f64>,
        alpha: f64,
        x0: &DMatrix<f64>,
        k: usize,
        grad: &mut GradientOracle<'_>,
    ) -> Trajectory {
        let n = w.nrows();
        let half_laplacian = (DMatrix::identity(n, n) - w) * (0.5 / alpha);
        let mut y = DMatrix::zeros(x0.nrows(), x0.ncols());
        let mut xs = vec![x0.clone()];
        let mut ss = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let g = grad(j, &xs[j]);
            ss.push(y.clone());
            if j < k {
                xs.push(w * &xs[j] - (g + &y) * alpha);
                y += &half_laplacian * &xs[j];
            }
        }
        Trajectory { x: xs, s: ss }
    }

    fn optimal_state(&self, g_star: &DMatrix<f64>) -> DMatrix<f64> {
        -g_star
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_agent_tracking_is_gradient_descent() {
        let w = DMatrix::from_element(1, 1, 1.0);
        let x0 = DMatrix::from_element(1, 1, 2.0);
        for id in AlgorithmId::all() {
            let t = id.implementation().run(&w, 0.5, &x0, 3, &mut |_, x| x * 0.2);
            assert_eq!(t.x.len(), 4);
            let mut x = 2.0;
            for xk in &t.x {
                assert!((xk[(0, 0)] - x).abs() < 1e-15, "{id}");
                x -= 0.5 * 0.2 * x;
            }
        }
    }

    #[test]
    fn gradients_are_queried_at_every_iterate() {
        let w = DMatrix::identity(2, 2);
        let x0 = DMatrix::zeros(2, 1);
        for id in AlgorithmId::all() {
            let mut asked = Vec::new();
            id.implementation().run(&w, 1.0, &x0, 4, &mut |k, x| {
                asked.push(k);
                x.clone()
            });
            assert_eq!(asked, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn extra_matches_two_step_form() {
        let w = DMatrix::from_row_slice(3, 3, &[0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5]);
        let x0 = DMatrix::from_row_slice(3, 2, &[1.0, -2.0, 0.5, 3.0, -1.0, 0.0]);
        let d = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -3.0, 0.5, 2.0, -1.0]);
        let mut grad = |_: usize, x: &DMatrix<f64>| x * 0.7 + &d;
        let (alpha, k) = (0.3, 6);
        let t = Extra.run(&w, alpha, &x0, k, &mut grad);
        let i_plus_w = DMatrix::identity(3, 3) + &w;
        let mut xs = vec![x0.clone(), &w * &x0 - grad(0, &x0) * alpha];
        for j in 1..k {
            let next = &i_plus_w * &xs[j] - &i_plus_w * &xs[j - 1] * 0.5 - (grad(j, &xs[j]) - grad(j - 1, &xs[j - 1])) * alpha;
            xs.push(next);
        }
        for (a, b) in t.x.iter().zip(&xs) {
            assert!((a - b).amax() < 1e-12);
        }
        assert_eq!(t.s.len(), k + 1);
    }

    #[test]
    fn parse_ids() {
        for id in AlgorithmId::all() {
            assert_eq!(id.to_string().parse::<AlgorithmId>().unwrap(), id);
        }
        assert!("acc-dngd".parse::<AlgorithmId>().is_err());
    }
}
