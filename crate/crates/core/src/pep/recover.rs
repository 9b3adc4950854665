use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::{compile, Criterion, FunctionClass, PepResult, PepStatus, Point};
use crate::error::{Error, Result};

/// Gram eigenvalues at or below this are dropped when factorizing.
pub const TRUNCATION_TOL: f64 = 1e-7;

/// Largest accepted mismatch between the replayed recursion and the
/// factorized iterates.
pub const REPLAY_TOL: f64 = 1e-6;

/// Points, gradients and function values of one agent's worst-case function.
#[derive(Debug, Clone, Serialize)]
pub struct AgentTrace {
    pub points: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// Index into `points` of `x^k`, for `k = 0..=K`.
    pub iterate_index: Vec<usize>,
    /// Index of `xbar^K` when the criterion uses it.
    pub mean_index: Option<usize>,
    /// Index of `x*` (always the origin).
    pub star_index: usize,
}

/// An explicit worst-case realization in dimension `dim`.
#[derive(Debug, Clone, Serialize)]
pub struct WorstCase {
    pub dim: usize,
    pub agents: Vec<AgentTrace>,
    /// Replayed iterates `X^0 ..= X^K` (rows are agents).
    #[serde(skip)]
    pub iterates: Vec<DMatrix<f64>>,
    /// The criterion evaluated on the replayed trajectory.
    pub achieved: f64,
    #[serde(with = "crate::extended")]
    pub value: f64,
    /// Largest violation of an interpolation inequality.
    pub max_interpolation_violation: f64,
    /// `|| sum_i grad f_i(x*) ||`.
    pub optimality_residual: f64,
}

fn interpolation_gap(fc: &FunctionClass, u: (&DVector<f64>, &DVector<f64>, f64), v: (&DVector<f64>, &DVector<f64>, f64)) -> f64 {
    let c = 1.0 / (2.0 * (1.0 - fc.mu / fc.l));
    let dx = u.0 - v.0;
    let dg = u.1 - v.1;
    v.2 - u.2
        + v.1.dot(&dx)
        + c * (dg.norm_squared() / fc.l + fc.mu * dx.norm_squared() - 2.0 * fc.mu / fc.l * dg.dot(&dx))
}

/// Factorizes the optimal Gram matrix into explicit vectors, replays the
/// algorithm on them and reports how well the realization matches.
pub fn recover_worst_case(result: &PepResult) -> Result<WorstCase> {
    if result.status != PepStatus::Optimal {
        return Err(Error::Recovery(format!("cannot recover from a {} result", result.status)));
    }
    let solved = result
        .solved
        .as_ref()
        .ok_or_else(|| Error::Recovery("result carries no solution".into()))?;
    let setting = &solved.setting;
    let compiled = compile(setting, &solved.w, solved.alpha)?;
    let n = solved.w.nrows();

    let eig = SymmetricEigen::new(solved.gram.clone());
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > TRUNCATION_TOL)
        .collect();
    let r = keep.len().max(1);
    let mut v = DMatrix::zeros(r, compiled.size);
    for (row, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        for j in 0..compiled.size {
            v[(row, j)] = s * eig.eigenvectors[(j, i)];
        }
    }

    let realize = |p: &Point| -> (DVector<f64>, DVector<f64>, f64) {
        (&v * &p.x, v.column(p.g).into_owned(), solved.values[p.f])
    };
    let concrete: Vec<Vec<_>> = compiled
        .points
        .iter()
        .map(|pts| pts.iter().map(realize).collect())
        .collect();

    let mut x0 = DMatrix::zeros(n, r);
    for i in 0..n {
        x0.row_mut(i).copy_from(&concrete[i][compiled.iterate_point[i][0]].0.transpose());
    }
    let traj = setting.algorithm.implementation().run(
        &solved.w,
        solved.alpha,
        &x0,
        setting.k,
        &mut |k, _| {
            let mut g = DMatrix::zeros(n, r);
            for i in 0..n {
                let p = compiled.iterate_point[i][k];
                g.row_mut(i).copy_from(&concrete[i][p].1.transpose());
            }
            g
        },
    );
    let iterates = traj.x;
    let mut mismatch = 0.0_f64;
    for (replayed, symbolic) in iterates.iter().zip(&compiled.iterates) {
        mismatch = mismatch.max((replayed - symbolic * v.transpose()).amax());
    }
    if mismatch > REPLAY_TOL {
        return Err(Error::Recovery(format!(
            "replayed iterates differ from the factorized ones by {mismatch:e}"
        )));
    }

    let k = setting.k;
    let achieved = match (setting.criterion, &compiled.mean_point) {
        (Criterion::FunctionalAtMean, Some(mp)) => {
            (0..n)
                .map(|i| {
                    let star = concrete[i].last().expect("x* is always present").2;
                    concrete[i][mp[i]].2 - star
                })
                .sum::<f64>()
                / n as f64
        }
        _ => {
            let mut a = (0..n).map(|i| iterates[k].row(i).norm_squared()).sum::<f64>() / n as f64;
            if compiled.tracked {
                let mut g_star = DMatrix::zeros(n, r);
                for i in 0..n {
                    g_star.row_mut(i).copy_from(&concrete[i].last().expect("x* is always present").1.transpose());
                }
                let s = &traj.s[k] - setting.algorithm.implementation().optimal_state(&g_star);
                let mean = s.row_sum() / n as f64;
                let d: f64 = (0..n).map(|i| (s.row(i) - &mean).norm_squared()).sum();
                a += setting.tracking_state_weight(solved.alpha) * d / n as f64;
            }
            a
        }
    };

    let mut worst = 0.0_f64;
    for pts in &concrete {
        for (a, u) in pts.iter().enumerate() {
            for (b, w) in pts.iter().enumerate() {
                if a != b {
                    let gap = interpolation_gap(&setting.fclass, (&u.0, &u.1, u.2), (&w.0, &w.1, w.2));
                    worst = worst.max(gap);
                }
            }
        }
    }
    let sum_star = concrete
        .iter()
        .map(|pts| pts.last().expect("x* is always present").1.clone())
        .fold(DVector::zeros(r), |acc, g| acc + g);

    let agents = concrete
        .iter()
        .enumerate()
        .map(|(i, pts)| AgentTrace {
            points: pts.iter().map(|p| p.0.iter().copied().collect()).collect(),
            gradients: pts.iter().map(|p| p.1.iter().copied().collect()).collect(),
            values: pts.iter().map(|p| p.2).collect(),
            iterate_index: compiled.iterate_point[i].clone(),
            mean_index: compiled.mean_point.as_ref().map(|m| m[i]),
            star_index: pts.len() - 1,
        })
        .collect();

    Ok(WorstCase {
        dim: r,
        agents,
        iterates,
        achieved,
        value: result.value,
        max_interpolation_violation: worst,
        optimality_residual: sum_star.norm(),
    })
}
