//! Primal-dual interior-point method (HKM direction, Mehrotra
//! predictor-corrector) for the single-block standard form.
//!
//! Internally the problem becomes
//!
//! ```text
//!   min <C,X> + c_f . x_f   s.t.  A(X) + A_l x_l + A_f x_f = b,
//!   X >= 0, x_l >= 0 (one slack per inequality row), x_f free
//! ```
//!
//! Each coefficient matrix is factored once as `sum_a lambda_a f_a f_a^T`, so
//! the Schur complement reduces to `(F^T X F) o (F^T Z^-1 F)` aggregated by row.
//!
//! Presolve steps:
//! * equality rows `<A, X> = 0` with `A >= 0` force `X` onto the orthogonal
//!   complement of `range(A)`; the block is restricted there (facial
//!   reduction), which restores strict feasibility;
//! * free columns are reparametrized onto the row space of `A_f`, which
//!   fixes translation-like null directions to their minimum-norm value;
//! * rows and the objective are scaled to unit norm.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, LU};

use super::{
    Residuals, RowKind, Sense, SdpProblem, SdpSolution, SolveStatus, SolverOptions, SymCoef,
};
use crate::error::{Error, Result};

const INFEAS_TOL: f64 = 1e-8;
/// Iterations without a `STALL_FACTOR` improvement of the worst residual
/// before giving up.
const STALL_ITERS: usize = 8;
const STALL_FACTOR: f64 = 0.9;

struct Factors {
    vecs: Vec<DVector<f64>>,
    lams: Vec<f64>,
}

/// Writes a symmetric coefficient as `sum lambda_a f_a f_a^T` with
/// orthogonal `f_a`.
fn factorize(c: &SymCoef, s: usize) -> Factors {
    let mut distinct: Vec<&super::SparseVec> = Vec::new();
    for t in c.terms() {
        for v in [&t.u, &t.v] {
            if !distinct.contains(&v) {
                distinct.push(v);
            }
        }
    }
    if distinct.is_empty() || s == 0 {
        return Factors {
            vecs: vec![],
            lams: vec![],
        };
    }
    let mut v: DMatrix<f64> = DMatrix::zeros(s, distinct.len());
    for (k, d) in distinct.iter().enumerate() {
        for &(i, val) in d.iter() {
            v[(i, k)] += val;
        }
    }
    let svd = v.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > 1e-12 * smax)
        .collect();
    let q = keep.len();
    let basis = DMatrix::from_fn(s, q, |i, k| u[(i, keep[k])]);
    let project = |sv: &super::SparseVec| {
        let mut out: DVector<f64> = DVector::zeros(q);
        for &(i, val) in sv {
            for k in 0..q {
                out[k] += basis[(i, k)] * val;
            }
        }
        out
    };
    let mut small: DMatrix<f64> = DMatrix::zeros(q, q);
    for t in c.terms() {
        let a = project(&t.u);
        let b = project(&t.v);
        let outer: DMatrix<f64> = &a * b.transpose();
        small += (&outer + outer.transpose()) * (0.5 * t.coef);
    }
    let eig = SymmetricEigen::new(small);
    let lmax = eig.eigenvalues.amax();
    let mut out = Factors {
        vecs: vec![],
        lams: vec![],
    };
    for k in 0..q {
        let l = eig.eigenvalues[k];
        if l.abs() > 1e-13 * lmax && l != 0.0 {
            out.vecs.push(&basis * eig.eigenvectors.column(k));
            out.lams.push(l);
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `span(vecs)`.
fn complement_basis(vecs: &[DVector<f64>], s: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(s, s);
    for v in vecs {
        k += v * v.transpose();
    }
    let eig = SymmetricEigen::new(k);
    let lmax = eig.eigenvalues.amax();
    let cols: Vec<usize> = (0..s)
        .filter(|&j| eig.eigenvalues[j] <= 1e-10 * lmax.max(1e-300))
        .collect();
    DMatrix::from_fn(s, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])])
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `alpha` with `X + alpha dX >= 0` (infinite if never violated).
fn max_step_psd(x_chol: &Cholesky<f64, nalgebra::Dyn>, dx: &DMatrix<f64>) -> f64 {
    if dx.nrows() == 0 {
        return f64::INFINITY;
    }
    let l = x_chol.l();
    let t = l
        .solve_lower_triangular(dx)
        .expect("cholesky factor is nonsingular");
    let s = l
        .solve_lower_triangular(&t.transpose())
        .expect("cholesky factor is nonsingular");
    let lmin = SymmetricEigen::new(sym(&s)).eigenvalues.min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn max_step_lp(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

/// The presolved, scaled problem.
struct Prepared {
    s: usize,
    m: usize,
    /// `X_orig = reduce * X * reduce^T` (identity when no facial reduction).
    reduce: Option<DMatrix<f64>>,
    c: DMatrix<f64>,
    cf: DVector<f64>,
    /// Factor vectors as columns, with weights and owning row.
    f: DMatrix<f64>,
    lam: Vec<f64>,
    owner: Vec<usize>,
    /// Slack `j` sits in row `slack_row[j]` with coefficient `slack_coef[j]`.
    slack_row: Vec<usize>,
    slack_coef: Vec<f64>,
    af: DMatrix<f64>,
    /// `x_f_orig = free_map * x_f`.
    free_map: DMatrix<f64>,
    b: DVector<f64>,
    /// Original index and scale of each kept row.
    row_index: Vec<usize>,
    row_scale: Vec<f64>,
    obj_scale: f64,
}

enum Presolve {
    Ready(Box<Prepared>),
    Infeasible,
    Unbounded,
}

fn presolve(p: &SdpProblem) -> Presolve {
    let s0 = p.psd_dim;
    let sgn = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let row_factors: Vec<Factors> = p.rows.iter().map(|r| factorize(&r.x, s0)).collect();

    // Facial reduction from `<A, X> = 0`, `A >= 0` rows.
    let mut nullified = Vec::new();
    let mut removed = vec![false; p.rows.len()];
    for (k, (row, fac)) in p.rows.iter().zip(&row_factors).enumerate() {
        let lmax = fac.lams.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
        if row.kind == RowKind::Eq
            && row.rhs == 0.0
            && row.y.iter().all(|&(_, v)| v == 0.0)
            && !fac.lams.is_empty()
            && fac.lams.iter().all(|&l| l >= -1e-12 * lmax)
        {
            removed[k] = true;
            for (v, &l) in fac.vecs.iter().zip(&fac.lams) {
                if l > 0.0 {
                    nullified.push(v.clone());
                }
            }
        }
    }
    let reduce = (!nullified.is_empty()).then(|| complement_basis(&nullified, s0));
    let s = reduce.as_ref().map_or(s0, |r| r.ncols());
    let map_vec = |v: &DVector<f64>| match &reduce {
        Some(r) => r.transpose() * v,
        None => v.clone(),
    };

    let c_full = p.objective.x.to_dense(s0) * sgn;
    let mut c = match &reduce {
        Some(r) => r.transpose() * &c_full * r,
        None => c_full,
    };
    let mut cf = DVector::zeros(p.free_dim);
    for &(k, v) in &p.objective.y {
        cf[k] += sgn * v;
    }

    let mut f_cols: Vec<DVector<f64>> = Vec::new();
    let mut lam = Vec::new();
    let mut owner = Vec::new();
    let mut slack_row = Vec::new();
    let mut slack_coef = Vec::new();
    let mut af_rows: Vec<DVector<f64>> = Vec::new();
    let mut b = Vec::new();
    let mut row_index = Vec::new();
    let mut row_scale = Vec::new();

    for (k, (row, fac)) in p.rows.iter().zip(&row_factors).enumerate() {
        if removed[k] {
            continue;
        }
        let vecs: Vec<DVector<f64>> = fac.vecs.iter().map(&map_vec).collect();
        let mut a_f: DVector<f64> = DVector::zeros(p.free_dim);
        for &(j, v) in &row.y {
            a_f[j] += v;
        }
        // ||A||_F^2 = sum_ab l_a l_b (f_a . f_b)^2
        let mut fro2: f64 = 0.0;
        for (a, va) in vecs.iter().enumerate() {
            for (bb, vb) in vecs.iter().enumerate() {
                let d = va.dot(vb);
                fro2 += fac.lams[a] * fac.lams[bb] * d * d;
            }
        }
        let norm = (fro2.max(0.0) + a_f.norm_squared()).sqrt();
        if norm <= 1e-14 {
            let ok = match row.kind {
                RowKind::Eq => row.rhs.abs() <= 1e-12,
                RowKind::Le => row.rhs >= -1e-12,
            };
            if ok {
                continue;
            }
            return Presolve::Infeasible;
        }
        let i = b.len();
        for (v, &l) in vecs.into_iter().zip(&fac.lams) {
            f_cols.push(v);
            lam.push(l / norm);
            owner.push(i);
        }
        if row.kind == RowKind::Le {
            slack_row.push(i);
            slack_coef.push(1.0 / norm);
        }
        af_rows.push(a_f / norm);
        b.push(row.rhs / norm);
        row_index.push(k);
        row_scale.push(norm);
    }
    let m = b.len();
    let f = if f_cols.is_empty() {
        DMatrix::zeros(s, 0)
    } else {
        DMatrix::from_columns(&f_cols)
    };

    // Free variables onto the row space of A_f.
    let mut af_full = DMatrix::zeros(m, p.free_dim);
    for (i, r) in af_rows.iter().enumerate() {
        af_full.set_row(i, &r.transpose());
    }
    let (af, free_map) = if p.free_dim == 0 {
        (DMatrix::zeros(m, 0), DMatrix::zeros(0, 0))
    } else {
        let gram = af_full.transpose() * &af_full;
        let eig = SymmetricEigen::new(gram);
        let emax = eig.eigenvalues.amax();
        let cols: Vec<usize> = (0..p.free_dim)
            .filter(|&j| eig.eigenvalues[j] > 1e-12 * emax.max(1e-300) && emax > 0.0)
            .collect();
        let vr = DMatrix::from_fn(p.free_dim, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]);
        let proj = &vr * (vr.transpose() * &cf);
        if (&cf - proj).norm() > 1e-9 * (1.0 + cf.norm()) {
            return Presolve::Unbounded;
        }
        (&af_full * &vr, vr)
    };
    let cf = free_map.transpose() * cf;

    let obj_scale = c.norm().max(cf.norm()).max(1.0);
    c /= obj_scale;
    let cf = cf / obj_scale;

    Presolve::Ready(Box::new(Prepared {
        s,
        m,
        reduce,
        c,
        cf,
        f,
        lam,
        owner,
        slack_row,
        slack_coef,
        af,
        free_map,
        b: DVector::from_vec(b),
        row_index,
        row_scale,
        obj_scale,
    }))
}

impl Prepared {
    /// `A(V)` for symmetric `V`.
    fn apply(&self, v: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        if self.f.ncols() == 0 {
            return out;
        }
        let vf = v * &self.f;
        for a in 0..self.f.ncols() {
            out[self.owner[a]] += self.lam[a] * self.f.column(a).dot(&vf.column(a));
        }
        out
    }

    /// `A*(y) = sum_i y_i A_i`.
    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        if self.f.ncols() == 0 {
            return DMatrix::zeros(self.s, self.s);
        }
        let mut scaled = self.f.clone();
        for a in 0..self.f.ncols() {
            let w = self.lam[a] * y[self.owner[a]];
            scaled.column_mut(a).scale_mut(w);
        }
        sym(&(scaled * self.f.transpose()))
    }

    fn slack_apply(&self, xl: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (j, (&r, &k)) in self.slack_row.iter().zip(&self.slack_coef).enumerate() {
            out[r] += k * xl[j];
        }
        out
    }

    fn slack_adjoint(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.slack_row.len(),
            self.slack_row
                .iter()
                .zip(&self.slack_coef)
                .map(|(&r, &k)| k * y[r]),
        )
    }
}

struct Iterate {
    x: DMatrix<f64>,
    xl: DVector<f64>,
    xf: DVector<f64>,
    y: DVector<f64>,
    z: DMatrix<f64>,
    zl: DVector<f64>,
}

struct Direction {
    dx: DMatrix<f64>,
    dxl: DVector<f64>,
    dxf: DVector<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
    dzl: DVector<f64>,
}

struct Residual {
    rp: DVector<f64>,
    rd: DMatrix<f64>,
    rdl: DVector<f64>,
    rdf: DVector<f64>,
}

/// Solves `p` to relative accuracy `opts.tol`.
///
/// Returns `Ok` with a non-optimal status for infeasible, unbounded or
/// unfinished solves; `Err` only for malformed problems.
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    p.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("solver tolerance must be positive".into()));
    }
    let pre = match presolve(p) {
        Presolve::Ready(pre) => pre,
        Presolve::Infeasible => return Ok(trivial_status(p, SolveStatus::Infeasible)),
        Presolve::Unbounded => return Ok(trivial_status(p, SolveStatus::Unbounded)),
    };
    let (it, status, resid, iterations) = run(&pre, opts);
    Ok(finish(p, &pre, &it, status, resid, iterations, opts.tol))
}

fn trivial_status(p: &SdpProblem, status: SolveStatus) -> SdpSolution {
    let inf = match (status, p.sense) {
        (SolveStatus::Infeasible, Sense::Minimize) | (SolveStatus::Unbounded, Sense::Maximize) => {
            f64::INFINITY
        }
        _ => f64::NEG_INFINITY,
    };
    SdpSolution {
        x: DMatrix::zeros(p.psd_dim, p.psd_dim),
        y: vec![0.0; p.free_dim],
        duals: vec![0.0; p.rows.len()],
        objective: inf,
        status,
        residuals: Residuals::default(),
        iterations: 0,
    }
}

fn finish(
    p: &SdpProblem,
    pre: &Prepared,
    it: &Iterate,
    status: SolveStatus,
    resid: Residuals,
    iterations: usize,
    opts_tol: f64,
) -> SdpSolution {
    if matches!(status, SolveStatus::Infeasible | SolveStatus::Unbounded) {
        let mut out = trivial_status(p, status);
        out.iterations = iterations;
        out.residuals = resid;
        return out;
    }
    let x = match &pre.reduce {
        Some(r) => sym(&(r * &it.x * r.transpose())),
        None => it.x.clone(),
    };
    let y: Vec<f64> = if p.free_dim == 0 {
        vec![]
    } else {
        (&pre.free_map * &it.xf).iter().copied().collect()
    };
    let mut duals = vec![0.0; p.rows.len()];
    for (i, (&k, &sc)) in pre.row_index.iter().zip(&pre.row_scale).enumerate() {
        duals[k] = it.y[i] * pre.obj_scale / sc;
    }
    let bmax = p.rows.iter().fold(0.0_f64, |a, r| a.max(r.rhs.abs()));
    let worst = p
        .rows
        .iter()
        .map(|r| r.violation(&x, &y))
        .fold(0.0_f64, f64::max);
    let primal = worst / (1.0 + bmax);
    // The scaled internal problem can look solved while the original rows are
    // not (e.g. free variables drifting along a near-null direction).
    let status = match status {
        SolveStatus::Optimal if primal > 1e3 * opts_tol => SolveStatus::MaxIter,
        // Stalled near the optimum: accept when the original rows meet the
        // tolerance even though the scaled residual does not.
        SolveStatus::MaxIter if primal <= opts_tol && resid.dual <= opts_tol && resid.gap <= opts_tol => {
            SolveStatus::Optimal
        }
        s => s,
    };
    SdpSolution {
        objective: p.objective_value(&x, &y),
        x,
        y,
        duals,
        status,
        residuals: Residuals {
            primal,
            ..resid
        },
        iterations,
    }
}

fn residual(pre: &Prepared, it: &Iterate) -> Residual {
    let rp = &pre.b - pre.apply(&it.x) - pre.slack_apply(&it.xl) - &pre.af * &it.xf;
    let rd = &pre.c - pre.adjoint(&it.y) - &it.z;
    let rdl = -pre.slack_adjoint(&it.y) - &it.zl;
    let rdf = &pre.cf - pre.af.transpose() * &it.y;
    Residual { rp, rd, rdl, rdf }
}

fn run(pre: &Prepared, opts: &SolverOptions) -> (Iterate, SolveStatus, Residuals, usize) {
    let s = pre.s;
    let p = pre.slack_row.len();
    let m = pre.m;
    let nf = pre.af.ncols();
    let cone_dim = (s + p).max(1) as f64;

    let bnorm = pre.b.norm();
    let cnorm = (pre.c.norm_squared() + pre.cf.norm_squared()).sqrt();

    // Starting point scaled to the data.
    let mut xi: f64 = 10.0_f64.max((s as f64).sqrt());
    for i in 0..m {
        xi = xi.max(s.max(1) as f64 * (1.0 + pre.b[i].abs()) / 2.0);
    }
    let eta: f64 = 10.0_f64.max((s as f64).sqrt()).max(cnorm);
    let mut it = Iterate {
        x: DMatrix::identity(s, s) * xi,
        xl: DVector::from_element(p, xi),
        xf: DVector::zeros(nf),
        y: DVector::zeros(m),
        z: DMatrix::identity(s, s) * eta,
        zl: DVector::from_element(p, eta),
    };

    let mut resid = Residuals::default();
    let mut stalls = 0;
    let mut best_merit = f64::INFINITY;
    let mut flat = 0;
    let mut iterations = 0;
    for iter in 0..opts.max_iter {
        iterations = iter;
        let r = residual(pre, &it);
        let pobj = pre.c.dot(&it.x) + pre.cf.dot(&it.xf);
        let dobj = pre.b.dot(&it.y);
        let comp = it.x.dot(&it.z) + it.xl.dot(&it.zl);
        let mu = comp / cone_dim;
        let dual_norm =
            (r.rd.norm_squared() + r.rdl.norm_squared() + r.rdf.norm_squared()).sqrt();
        resid = Residuals {
            primal: r.rp.norm() / (1.0 + bnorm),
            dual: dual_norm / (1.0 + cnorm),
            gap: comp.max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs()),
        };
        log::trace!(
            "ipm {iter}: pobj {pobj:.6e} dobj {dobj:.6e} mu {mu:.3e} rp {:.3e} rd {:.3e} gap {:.3e}",
            resid.primal,
            resid.dual,
            resid.gap
        );
        if resid.primal <= opts.tol && resid.dual <= opts.tol && resid.gap <= opts.tol {
            return (it, SolveStatus::Optimal, resid, iter);
        }
        let merit = resid.primal.max(resid.dual).max(resid.gap);
        if merit < STALL_FACTOR * best_merit {
            best_merit = merit;
            flat = 0;
        } else {
            flat += 1;
            if flat >= STALL_ITERS {
                return (it, SolveStatus::MaxIter, resid, iter);
            }
        }
        // Certificates: a dual ray (b.y -> inf) means primal infeasible, a
        // primal ray (<C,X> -> -inf with A(X) -> 0) means unbounded.
        if dobj > 0.0 && (cnorm + dual_norm) / dobj < INFEAS_TOL {
            return (it, SolveStatus::Infeasible, resid, iter);
        }
        let xnorm = (it.x.norm_squared() + it.xl.norm_squared() + it.xf.norm_squared()).sqrt();
        if pobj < 0.0
            && (&pre.b - &r.rp).norm() / -pobj < INFEAS_TOL
            && -pobj > 1e-6 * xnorm
        {
            return (it, SolveStatus::Unbounded, resid, iter);
        }

        let Some(z_chol) = Cholesky::new(sym(&it.z)) else {
            break;
        };
        let Some(x_chol) = Cholesky::new(sym(&it.x)) else {
            break;
        };
        let zinv = sym(&z_chol.inverse());

        // Schur complement M_ij = <A_i, X A_j Z^-1>.
        let r_cols = pre.f.ncols();
        let mut schur = DMatrix::zeros(m, m);
        if r_cols > 0 {
            let pm = pre.f.transpose() * (&it.x * &pre.f);
            let qm = pre.f.transpose() * (&zinv * &pre.f);
            for a in 0..r_cols {
                let (oa, la) = (pre.owner[a], pre.lam[a]);
                for bb in 0..r_cols {
                    schur[(oa, pre.owner[bb])] += la * pre.lam[bb] * pm[(a, bb)] * qm[(a, bb)];
                }
            }
        }
        let dl = it.xl.component_div(&it.zl);
        for (j, (&row, &k)) in pre.slack_row.iter().zip(&pre.slack_coef).enumerate() {
            schur[(row, row)] += k * k * dl[j];
        }
        let reg = 1e-14 * (1.0 + schur.diagonal().amax());
        for i in 0..m {
            schur[(i, i)] += reg;
        }
        let mut kkt = DMatrix::zeros(m + nf, m + nf);
        kkt.view_mut((0, 0), (m, m)).copy_from(&schur);
        kkt.view_mut((0, m), (m, nf)).copy_from(&pre.af);
        kkt.view_mut((m, 0), (nf, m)).copy_from(&pre.af.transpose());
        let lu = LU::new(kkt.clone());

        let solve_dir = |sigma_mu: f64,
                         corr: Option<(&DMatrix<f64>, &DVector<f64>)>|
         -> Option<Direction> {
            let mut rx = &zinv * sigma_mu - &it.x - sym(&(&it.x * &r.rd * &zinv));
            let mut rl_num = DVector::from_fn(p, |j, _| sigma_mu - it.xl[j] * it.zl[j]);
            if let Some((cm, cl)) = corr {
                rx -= sym(&(cm * &zinv));
                rl_num -= cl;
            }
            let rl = rl_num.component_div(&it.zl) - dl.component_mul(&r.rdl);
            let h = &r.rp - pre.apply(&rx) - pre.slack_apply(&rl);
            let mut rhs = DVector::zeros(m + nf);
            rhs.rows_mut(0, m).copy_from(&h);
            rhs.rows_mut(m, nf).copy_from(&r.rdf);
            let mut sol = lu.solve(&rhs)?;
            // One round of iterative refinement.
            let res = &rhs - &kkt * &sol;
            if let Some(fix) = lu.solve(&res) {
                sol += fix;
            }
            if sol.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let dy = sol.rows(0, m).into_owned();
            let dxf = sol.rows(m, nf).into_owned();
            let aty = pre.adjoint(&dy);
            let dz = &r.rd - &aty;
            let dx = rx + sym(&(&it.x * &aty * &zinv));
            let atly = pre.slack_adjoint(&dy);
            let dzl = &r.rdl - &atly;
            let dxl = rl + dl.component_mul(&atly);
            Some(Direction {
                dx,
                dxl,
                dxf,
                dy,
                dz,
                dzl,
            })
        };

        let step_lengths = |d: &Direction| -> (f64, f64) {
            let ap = max_step_psd(&x_chol, &d.dx).min(max_step_lp(&it.xl, &d.dxl));
            let ad = max_step_psd(&z_chol, &d.dz).min(max_step_lp(&it.zl, &d.dzl));
            (ap, ad)
        };

        let Some(pred) = solve_dir(0.0, None) else {
            break;
        };
        let (ap_max, ad_max) = step_lengths(&pred);
        let (ap, ad) = (ap_max.min(1.0), ad_max.min(1.0));
        let mu_aff = ((&it.x + &pred.dx * ap).dot(&(&it.z + &pred.dz * ad))
            + (&it.xl + &pred.dxl * ap).dot(&(&it.zl + &pred.dzl * ad)))
            / cone_dim;
        let expon = (3.0 * ap.min(ad).powi(2)).max(1.0);
        let sigma = (mu_aff / mu).max(0.0).powf(expon).min(1.0);

        let corr_m = &pred.dx * &pred.dz;
        let corr_l = pred.dxl.component_mul(&pred.dzl);
        let Some(dir) = solve_dir(sigma * mu, Some((&corr_m, &corr_l))) else {
            break;
        };
        let (ap_max, ad_max) = step_lengths(&dir);
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);

        it.x = sym(&(&it.x + &dir.dx * ap));
        it.xl += &dir.dxl * ap;
        it.xf += &dir.dxf * ap;
        it.y += &dir.dy * ad;
        it.z = sym(&(&it.z + &dir.dz * ad));
        it.zl += &dir.dzl * ad;

        if ap.max(ad) < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    (it, SolveStatus::MaxIter, resid, iterations + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{Constraint, SymCoef};

    fn one_by_one(kind: RowKind, coef: f64, rhs: f64) -> SdpProblem {
        let mut p = SdpProblem::new(1, 0, Sense::Minimize);
        p.objective.x.element(0, 0, 1.0);
        let mut a = SymCoef::new();
        a.element(0, 0, coef);
        p.rows.push(Constraint {
            x: a,
            y: vec![],
            rhs,
            kind,
        });
        p
    }

    #[test]
    fn scalar_lower_bound() {
        // min x s.t. x >= 2
        let p = one_by_one(RowKind::Le, -1.0, -2.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-5, "{}", sol.objective);
    }

    #[test]
    fn scalar_infeasible() {
        // x <= -1 with x >= 0
        let mut p = one_by_one(RowKind::Le, 1.0, -1.0);
        p.objective = Default::default();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_free_variable() {
        // min y, y free, no constraints on y
        let mut p = SdpProblem::new(1, 1, Sense::Minimize);
        p.objective.y.push((0, 1.0));
        let mut a = SymCoef::new();
        a.element(0, 0, 1.0);
        p.rows.push(Constraint::eq(a, vec![], 1.0));
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn unbounded_psd_ray() {
        // min -x11 s.t. x11 - x22 = 0
        let mut p = SdpProblem::new(2, 0, Sense::Minimize);
        p.objective.x.element(0, 0, -1.0);
        let mut a = SymCoef::new();
        a.element(0, 0, 1.0).element(1, 1, -1.0);
        p.rows.push(Constraint::eq(a, vec![], 0.0));
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn max_eigenvalue_problem() {
        // max <C, X> s.t. tr X = 1  ->  lambda_max(C)
        let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let mut p = SdpProblem::new(3, 0, Sense::Maximize);
        p.objective.x = SymCoef::from_dense(&c).unwrap();
        let mut tr = SymCoef::new();
        for i in 0..3 {
            tr.element(i, i, 1.0);
        }
        p.rows.push(Constraint::eq(tr, vec![], 1.0));
        let sol = solve(&p, &SolverOptions { tol: 1e-9, max_iter: 100 }).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let expected = 2.0 + 2.0_f64.sqrt();
        assert!((sol.objective - expected).abs() < 1e-7, "{}", sol.objective);
    }

    #[test]
    fn facial_reduction_row() {
        // max x11 s.t. x11 + x22 <= 1, (x11 + x22 + 2 x12) = 0  (i.e. ||e1+e2||_X^2 = 0)
        let mut p = SdpProblem::new(2, 0, Sense::Maximize);
        p.objective.x.element(0, 0, 1.0);
        let mut tr = SymCoef::new();
        tr.element(0, 0, 1.0).element(1, 1, 1.0);
        p.rows.push(Constraint::le(tr, vec![], 1.0));
        let mut z = SymCoef::new();
        z.quad(1.0, &[1.0, 1.0]);
        p.rows.push(Constraint::eq(z, vec![], 0.0));
        let sol = solve(&p, &SolverOptions { tol: 1e-9, max_iter: 100 }).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 0.5).abs() < 1e-7);
        let v = DVector::from_vec(vec![1.0, 1.0]);
        assert!((v.transpose() * &sol.x * v)[0].abs() < 1e-9);
    }

    #[test]
    fn free_variable_null_direction_is_min_norm() {
        // min t s.t. t - (y0 - y1) >= 0 written as (y0 - y1) - x11 <= 0 ... keep it simple:
        // max (y0 - y1) s.t. (y0 - y1) + x11 = 1  -> value 1 with x11 = 0; y0 = -y1 = 1/2
        let mut p = SdpProblem::new(1, 2, Sense::Maximize);
        p.objective.y = vec![(0, 1.0), (1, -1.0)];
        let mut a = SymCoef::new();
        a.element(0, 0, 1.0);
        p.rows.push(Constraint::eq(a, vec![(0, 1.0), (1, -1.0)], 1.0));
        let sol = solve(&p, &SolverOptions { tol: 1e-9, max_iter: 100 }).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-7);
        assert!((sol.y[0] + sol.y[1]).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let p = one_by_one(RowKind::Le, -1.0, -2.0);
        let a = solve(&p, &SolverOptions::default()).unwrap();
        let b = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
