//! Small dense semidefinite programs of the form
//!
//! ```text
//! maximize η  subject to  C_j + Σ_u T_ju(X_u) − c_j η I ⪰ 0   for every j
//! ```
//!
//! where the `X_u` are symmetric matrix unknowns and each `T_ju` places
//! (scaled copies of) `X_u` inside constraint `j`. Solved with an
//! infeasible-start primal-dual interior-point method using the HKM search
//! direction and Mehrotra's predictor-corrector.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::linalg::{self, Mat};

/// Default target for relative gap and infeasibilities.
pub const DEFAULT_ACCURACY: f64 = 1e-9;

/// Residual allowed on the returned point of an `OPTIMAL` solve.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const MAX_ITERATIONS: usize = 120;
const STALL_ACCEPT: f64 = 1e-6;
const INFEASIBILITY_RATIO: f64 = 1e-9;
const UNBOUNDED_ETA: f64 = 1e8;

/// One placement of an unknown inside a constraint: entry `(p, q)` of the
/// unknown, times `coeff`, is added at `(positions[p], positions[q])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub unknown: usize,
    pub coeff: f64,
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub constant: Mat,
    pub terms: Vec<Term>,
    /// Coefficient `c_j ≥ 0` of `−η I`.
    pub eta: f64,
}

/// A max-η problem over symmetric unknowns with PSD constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PsdProblem {
    unknowns: Vec<usize>,
    constraints: Vec<Constraint>,
}

impl PsdProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a symmetric `dim × dim` unknown and returns its handle.
    pub fn add_unknown(&mut self, dim: usize) -> usize {
        self.unknowns.push(dim);
        self.unknowns.len() - 1
    }

    /// Adds `constant + (terms added later) − eta·η·I ⪰ 0`.
    pub fn add_constraint(&mut self, constant: Mat, eta: f64) -> usize {
        self.constraints.push(Constraint {
            constant,
            terms: Vec::new(),
            eta,
        });
        self.constraints.len() - 1
    }

    pub fn add_term(&mut self, constraint: usize, unknown: usize, coeff: f64, positions: &[usize]) {
        self.constraints[constraint].terms.push(Term {
            unknown,
            coeff,
            positions: positions.to_vec(),
        });
    }

    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn validate(&self) -> Result<()> {
        if self.constraints.is_empty() {
            return Err(invalid!("problem has no constraints"));
        }
        let mut used = vec![false; self.unknowns.len()];
        for (j, c) in self.constraints.iter().enumerate() {
            let d = c.constant.nrows();
            if d == 0 || !c.constant.is_square() {
                return Err(invalid!("constraint {} has a non-square constant", j));
            }
            if linalg::asymmetry(&c.constant) > 1e-12 * (1.0 + linalg::max_abs(&c.constant)) {
                return Err(invalid!("constraint {} has an asymmetric constant", j));
            }
            if !(c.eta.is_finite() && c.eta >= 0.0) {
                return Err(invalid!("constraint {} has eta coefficient {}", j, c.eta));
            }
            for t in &c.terms {
                let dim = *self
                    .unknowns
                    .get(t.unknown)
                    .ok_or_else(|| invalid!("constraint {} uses unknown {}", j, t.unknown))?;
                if t.positions.len() != dim {
                    return Err(invalid!(
                        "placement of unknown {} lists {} positions for dimension {}",
                        t.unknown,
                        t.positions.len(),
                        dim
                    ));
                }
                if t.positions.iter().any(|&p| p >= d) {
                    return Err(invalid!("placement exceeds constraint {} of size {}", j, d));
                }
                if t.coeff != 0.0 {
                    used[t.unknown] = true;
                }
            }
        }
        if !self.constraints.iter().any(|c| c.eta > 0.0) {
            return Err(invalid!("eta appears in no constraint"));
        }
        if let Some(u) = used.iter().position(|&x| !x) {
            return Err(invalid!("unknown {} appears in no constraint", u));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Outcome of a solve. For `Optimal`, `eta_star` is certified: it is the
/// largest η for which the returned unknowns satisfy every constraint, so
/// the constraint residual at the reported point is zero by construction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SdpVerdict {
    pub status: SdpStatus,
    pub eta_star: Option<f64>,
    /// η certified by the last dual point. Present also when the solve
    /// stalled, in which case it is only a lower bound on the optimum.
    pub eta_lower: Option<f64>,
    /// Primal objective, an upper estimate of the optimum.
    pub eta_upper: Option<f64>,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    /// Largest violation among constraints without an η term.
    pub residual: f64,
    pub detail: Option<String>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub solution: Vec<Mat>,
}

impl SdpVerdict {
    fn failure(iterations: usize, detail: String) -> Self {
        Self {
            status: SdpStatus::NumericalFailure,
            eta_star: None,
            eta_lower: None,
            eta_upper: None,
            iterations,
            primal_infeasibility: f64::NAN,
            dual_infeasibility: f64::NAN,
            relative_gap: f64::NAN,
            residual: f64::NAN,
            detail: Some(detail),
            solution: Vec::new(),
        }
    }
}

/// Sparse symmetric matrix as `(row, col, value)` triplets, both halves.
type Triplets = Vec<(usize, usize, f64)>;

/// Problem in the standard dual form `max bᵀy s.t. C − Σ y_i A_i ⪰ 0`.
struct Standard {
    dims: Vec<usize>,
    c: Vec<Mat>,
    /// `a[i][j]`: triplets of `A_i` in block `j`.
    a: Vec<Vec<Triplets>>,
    eta_index: usize,
    unknown_dims: Vec<usize>,
    /// `(unknown, p, q)` for each scalar variable except η.
    var_map: Vec<(usize, usize, usize)>,
}

impl Standard {
    fn from_problem(p: &PsdProblem) -> Self {
        let mut var_map = Vec::new();
        let mut offsets = Vec::new();
        for (u, &d) in p.unknowns.iter().enumerate() {
            offsets.push(var_map.len());
            for q in 0..d {
                for r in q..d {
                    var_map.push((u, q, r));
                }
            }
        }
        let eta_index = var_map.len();
        let m = eta_index + 1;
        let nblocks = p.constraints.len();
        let mut a: Vec<Vec<Triplets>> = vec![vec![Vec::new(); nblocks]; m];
        for (j, con) in p.constraints.iter().enumerate() {
            for t in &con.terms {
                let d = p.unknowns[t.unknown];
                let mut idx = offsets[t.unknown];
                for q in 0..d {
                    for r in q..d {
                        // F = coeff·(E_qr + E_rq) placed; A = −F.
                        let (pq, pr) = (t.positions[q], t.positions[r]);
                        let v = -t.coeff;
                        a[idx][j].push((pq, pr, v));
                        if q != r {
                            a[idx][j].push((pr, pq, v));
                        }
                        idx += 1;
                    }
                }
            }
            if con.eta > 0.0 {
                for k in 0..con.constant.nrows() {
                    a[eta_index][j].push((k, k, con.eta));
                }
            }
        }
        for blocks in &mut a {
            for tr in blocks.iter_mut() {
                merge_triplets(tr);
            }
        }
        Self {
            dims: p.constraints.iter().map(|c| c.constant.nrows()).collect(),
            c: p.constraints.iter().map(|c| c.constant.clone()).collect(),
            a,
            eta_index,
            unknown_dims: p.unknowns.clone(),
            var_map,
        }
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    fn b(&self, i: usize) -> f64 {
        if i == self.eta_index {
            1.0
        } else {
            0.0
        }
    }

    /// `⟨A_i, W⟩` summed over blocks.
    fn apply(&self, i: usize, w: &[Mat]) -> f64 {
        self.a[i]
            .iter()
            .zip(w)
            .map(|(tr, wj)| tr.iter().map(|&(p, q, v)| v * wj[(p, q)]).sum::<f64>())
            .sum()
    }

    /// `Σ y_i A_i` per block.
    fn combine(&self, y: &DVector<f64>) -> Vec<Mat> {
        let mut out: Vec<Mat> = self.dims.iter().map(|&d| Mat::zeros(d, d)).collect();
        for (i, blocks) in self.a.iter().enumerate() {
            if y[i] == 0.0 {
                continue;
            }
            for (j, tr) in blocks.iter().enumerate() {
                for &(p, q, v) in tr {
                    out[j][(p, q)] += y[i] * v;
                }
            }
        }
        out
    }

    fn a_fro(&self, i: usize, j: usize) -> f64 {
        self.a[i][j].iter().map(|t| t.2 * t.2).sum::<f64>().sqrt()
    }
}

fn merge_triplets(tr: &mut Triplets) {
    tr.sort_by_key(|x| (x.0, x.1));
    let mut out: Triplets = Vec::with_capacity(tr.len());
    for &(p, q, v) in tr.iter() {
        match out.last_mut() {
            Some(last) if last.0 == p && last.1 == q => last.2 += v,
            _ => out.push((p, q, v)),
        }
    }
    out.retain(|t| t.2 != 0.0);
    *tr = out;
}

fn inner(a: &[Mat], b: &[Mat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn fro(a: &[Mat]) -> f64 {
    inner(a, a).sqrt()
}

fn sym_inverse(m: &Mat) -> Option<Mat> {
    let ch = Cholesky::new(m.clone())?;
    Some(linalg::symmetrize(&ch.inverse()))
}

/// Largest `α ≤ 1` keeping `X + α ΔX ⪰ 0`, before the safety factor.
fn max_step(x: &[Mat], dx: &[Mat]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xj, dxj) in x.iter().zip(dx) {
        let ch = Cholesky::new(xj.clone())?;
        let l = ch.l();
        let linv = l.clone().solve_lower_triangular(&Mat::identity(l.nrows(), l.nrows()))?;
        let w = linalg::symmetrize(&(&linv * dxj * linv.transpose()));
        let lam = linalg::min_eigenvalue(&w);
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    Some(alpha)
}

/// Solves `problem` to relative accuracy `accuracy`.
///
/// Returns an error only for malformed problems; solver trouble is reported
/// through [`SdpStatus::NumericalFailure`].
pub fn solve(problem: &PsdProblem, accuracy: f64) -> Result<SdpVerdict> {
    problem.validate()?;
    if !(accuracy > 0.0 && accuracy < 1e-2) {
        return Err(invalid!("accuracy must lie in (0, 1e-2), got {}", accuracy));
    }
    let sp = Standard::from_problem(problem);
    Ok(Solver::new(&sp).run(accuracy))
}

struct Solver<'a> {
    sp: &'a Standard,
    x: Vec<Mat>,
    z: Vec<Mat>,
    y: DVector<f64>,
}

struct Direction {
    dx: Vec<Mat>,
    dy: DVector<f64>,
    dz: Vec<Mat>,
}

impl<'a> Solver<'a> {
    fn new(sp: &'a Standard) -> Self {
        let m = sp.m();
        let mut x = Vec::new();
        let mut z = Vec::new();
        for (j, &d) in sp.dims.iter().enumerate() {
            let df = d as f64;
            let mut xi: f64 = 10.0f64.max(df.sqrt());
            let mut zeta: f64 = 10.0f64.max(df.sqrt()).max(sp.c[j].norm());
            for i in 0..m {
                let af = sp.a_fro(i, j);
                if af > 0.0 {
                    xi = xi.max(df * (1.0 + sp.b(i).abs()) / (1.0 + af));
                    zeta = zeta.max(af);
                }
            }
            x.push(Mat::identity(d, d) * xi);
            z.push(Mat::identity(d, d) * zeta);
        }
        Self {
            sp,
            x,
            z,
            y: DVector::zeros(m),
        }
    }

    fn total_dim(&self) -> f64 {
        self.sp.dims.iter().sum::<usize>() as f64
    }

    fn primal_residual(&self) -> DVector<f64> {
        DVector::from_fn(self.sp.m(), |i, _| self.sp.b(i) - self.sp.apply(i, &self.x))
    }

    fn dual_residual(&self) -> Vec<Mat> {
        let ay = self.sp.combine(&self.y);
        self.sp
            .c
            .iter()
            .zip(&ay)
            .zip(&self.z)
            .map(|((c, a), z)| c - a - z)
            .collect()
    }

    /// Schur complement `M_ik = tr(A_i X A_k Z⁻¹)`.
    fn schur(&self, zinv: &[Mat]) -> Mat {
        let m = self.sp.m();
        let mut out = Mat::zeros(m, m);
        for (j, zi) in zinv.iter().enumerate().take(self.sp.dims.len()) {
            let x = &self.x[j];
            let active: Vec<usize> = (0..m).filter(|&i| !self.sp.a[i][j].is_empty()).collect();
            for (ai, &i) in active.iter().enumerate() {
                for &k in &active[ai..] {
                    let mut s = 0.0;
                    for &(p, q, v) in &self.sp.a[i][j] {
                        for &(r, t, w) in &self.sp.a[k][j] {
                            s += v * w * x[(q, r)] * zi[(t, p)];
                        }
                    }
                    out[(i, k)] += s;
                    if i != k {
                        out[(k, i)] += s;
                    }
                }
            }
        }
        out
    }

    fn direction(
        &self,
        chol: &Cholesky<f64, nalgebra::Dyn>,
        zinv: &[Mat],
        rp: &DVector<f64>,
        rd: &[Mat],
        rc: &[Mat],
    ) -> Direction {
        let m = self.sp.m();
        // G = (Rc − X Rd) Z⁻¹
        let g: Vec<Mat> = (0..self.x.len())
            .map(|j| (&rc[j] - &self.x[j] * &rd[j]) * &zinv[j])
            .collect();
        let rhs = DVector::from_fn(m, |i, _| rp[i] - self.sp.apply(i, &g));
        let dy = chol.solve(&rhs);
        let ady = self.sp.combine(&dy);
        let dz: Vec<Mat> = rd.iter().zip(&ady).map(|(r, a)| r - a).collect();
        let dx: Vec<Mat> = (0..self.x.len())
            .map(|j| linalg::symmetrize(&((&rc[j] - &self.x[j] * &dz[j]) * &zinv[j])))
            .collect();
        Direction { dx, dy, dz }
    }

    fn run(mut self, accuracy: f64) -> SdpVerdict {
        let nd = self.total_dim();
        let c_norm = fro(&self.sp.c);
        let mut stalled = 0usize;
        let mut iterations = 0usize;
        let mut last_err = f64::INFINITY;

        loop {
            let rp = self.primal_residual();
            let rd = self.dual_residual();
            let pobj = inner(&self.sp.c, &self.x);
            let dobj = self.y[self.sp.eta_index];
            let pinf = rp.norm() / 2.0;
            let dinf = fro(&rd) / (1.0 + c_norm);
            let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            let err = pinf.max(dinf).max(gap);

            if err < accuracy {
                return self.finish(SdpStatus::Optimal, iterations, pinf, dinf, gap, None);
            }
            // Dual infeasibility certificate: X ⪰ 0 with A(X) ≈ 0, ⟨C, X⟩ < 0.
            let ax_norm = DVector::from_fn(self.sp.m(), |i, _| self.sp.apply(i, &self.x)).norm();
            if pobj < 0.0 && ax_norm / (-pobj) < INFEASIBILITY_RATIO && dinf > accuracy {
                let mut v = self.finish(SdpStatus::Infeasible, iterations, pinf, dinf, gap, None);
                v.eta_star = None;
                v.eta_lower = None;
                v.solution.clear();
                v.detail = Some(alloc::format!(
                    "primal ray with <C,X> = {:.3e}, |A(X)| = {:.3e}",
                    pobj,
                    ax_norm
                ));
                return v;
            }
            if dobj > UNBOUNDED_ETA && pinf > accuracy {
                return SdpVerdict::failure(iterations, "unbounded: eta grows without limit".into());
            }
            if iterations >= MAX_ITERATIONS || stalled >= 6 {
                return self.give_up(iterations, err, pinf, dinf, gap, "stalled");
            }
            if err < last_err * 0.95 {
                stalled = 0;
            } else {
                stalled += 1;
            }
            last_err = last_err.min(err);
            iterations += 1;

            let zinv: Option<Vec<Mat>> = self.z.iter().map(sym_inverse).collect();
            let Some(zinv) = zinv else {
                return self.give_up(iterations, err, pinf, dinf, gap, "dual slack lost definiteness");
            };
            let mut schur = self.schur(&zinv);
            let chol = match Cholesky::new(schur.clone()) {
                Some(c) => c,
                None => {
                    let bump = 1e-13 * (1.0 + schur.diagonal().amax());
                    for i in 0..schur.nrows() {
                        schur[(i, i)] += bump;
                    }
                    match Cholesky::new(schur) {
                        Some(c) => c,
                        None => {
                            return self.give_up(
                                iterations,
                                err,
                                pinf,
                                dinf,
                                gap,
                                "Schur complement is not positive definite",
                            )
                        }
                    }
                }
            };

            let mu = inner(&self.x, &self.z) / nd;
            let xz: Vec<Mat> = self.x.iter().zip(&self.z).map(|(x, z)| x * z).collect();

            // Predictor.
            let rc_aff: Vec<Mat> = xz.iter().map(|p| -p).collect();
            let aff = self.direction(&chol, &zinv, &rp, &rd, &rc_aff);
            let (Some(ap), Some(ad)) = (max_step(&self.x, &aff.dx), max_step(&self.z, &aff.dz))
            else {
                return self.give_up(iterations, err, pinf, dinf, gap, "iterate lost definiteness");
            };
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mu_aff = self
                .x
                .iter()
                .zip(&aff.dx)
                .zip(self.z.iter().zip(&aff.dz))
                .map(|((x, dx), (z, dz))| (x + dx * ap).dot(&(z + dz * ad)))
                .sum::<f64>()
                / nd;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // Corrector.
            let rc: Vec<Mat> = (0..self.x.len())
                .map(|j| {
                    let d = self.sp.dims[j];
                    Mat::identity(d, d) * (sigma * mu) - &xz[j] - &aff.dx[j] * &aff.dz[j]
                })
                .collect();
            let dir = self.direction(&chol, &zinv, &rp, &rd, &rc);
            let (Some(ap), Some(ad)) = (max_step(&self.x, &dir.dx), max_step(&self.z, &dir.dz))
            else {
                return self.give_up(iterations, err, pinf, dinf, gap, "iterate lost definiteness");
            };
            let safety = if err < 1e-4 { 0.98 } else { 0.95 };
            let (ap, ad) = ((safety * ap).min(1.0), (safety * ad).min(1.0));
            if ap < 1e-12 && ad < 1e-12 {
                stalled = usize::MAX / 2;
                continue;
            }
            // Back off if rounding leaves an iterate on the cone boundary.
            let (mut ap, mut ad) = (ap, ad);
            let mut accepted = false;
            for _ in 0..40 {
                let xn: Vec<Mat> = self.x.iter().zip(&dir.dx).map(|(x, d)| x + d * ap).collect();
                let zn: Vec<Mat> = self.z.iter().zip(&dir.dz).map(|(z, d)| z + d * ad).collect();
                let pd = |m: &Vec<Mat>| m.iter().all(|b| Cholesky::new(b.clone()).is_some());
                if pd(&xn) && pd(&zn) {
                    self.x = xn;
                    self.z = zn;
                    accepted = true;
                    break;
                }
                ap *= 0.5;
                ad *= 0.5;
            }
            if !accepted {
                return self.give_up(iterations, err, pinf, dinf, gap, "iterate lost definiteness");
            }
            self.y += &dir.dy * ad;
        }
    }

    /// Accepts the current point if it is already accurate enough,
    /// otherwise reports a numerical failure.
    fn give_up(&self, iterations: usize, err: f64, pinf: f64, dinf: f64, gap: f64, why: &str) -> SdpVerdict {
        if err < STALL_ACCEPT {
            return self.finish(
                SdpStatus::Optimal,
                iterations,
                pinf,
                dinf,
                gap,
                Some(alloc::format!("{why} at accuracy {err:.2e}")),
            );
        }
        self.finish(
            SdpStatus::NumericalFailure,
            iterations,
            pinf,
            dinf,
            gap,
            Some(alloc::format!("{why}: gap {gap:.2e}, primal {pinf:.2e}, dual {dinf:.2e}")),
        )
    }

    fn finish(
        &self,
        status: SdpStatus,
        iterations: usize,
        pinf: f64,
        dinf: f64,
        gap: f64,
        detail: Option<String>,
    ) -> SdpVerdict {
        // Rebuild the η-free part of the slack from y alone and certify η.
        let mut y0 = self.y.clone();
        y0[self.sp.eta_index] = 0.0;
        let ay = self.sp.combine(&y0);
        let mut eta = f64::INFINITY;
        let mut residual: f64 = 0.0;
        for (j, a) in ay.iter().enumerate() {
            let s = linalg::symmetrize(&(&self.sp.c[j] - a));
            let lam = linalg::min_eigenvalue(&s);
            let c = self.sp.a[self.sp.eta_index][j]
                .first()
                .map(|t| t.2)
                .unwrap_or(0.0);
            if c > 0.0 {
                eta = eta.min(lam / c);
            } else {
                residual = residual.max(-lam);
            }
        }
        let mut solution: Vec<Mat> = self.sp.unknown_dims.iter().map(|&d| Mat::zeros(d, d)).collect();
        for (i, &(u, p, q)) in self.sp.var_map.iter().enumerate() {
            solution[u][(p, q)] = self.y[i];
            solution[u][(q, p)] = self.y[i];
        }
        let (status, detail) = if status == SdpStatus::Optimal && residual > FEASIBILITY_TOL {
            (
                SdpStatus::NumericalFailure,
                Some(alloc::format!("returned point violates a constraint by {residual:.2e}")),
            )
        } else {
            (status, detail)
        };
        SdpVerdict {
            status,
            eta_star: (status == SdpStatus::Optimal).then_some(eta),
            eta_lower: (eta.is_finite() && residual <= FEASIBILITY_TOL).then_some(eta),
            eta_upper: Some(inner(&self.sp.c, &self.x)),
            iterations,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            relative_gap: gap,
            residual,
            detail,
            solution,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(d: usize) -> Vec<usize> {
        (0..d).collect()
    }

    #[test]
    fn box_problem_reaches_one() {
        // X − ηI ⪰ 0, I − X ⪰ 0.
        let mut p = PsdProblem::new();
        let x = p.add_unknown(2);
        let c0 = p.add_constraint(Mat::zeros(2, 2), 1.0);
        p.add_term(c0, x, 1.0, &all(2));
        let c1 = p.add_constraint(Mat::identity(2, 2), 0.0);
        p.add_term(c1, x, -1.0, &all(2));
        let v = solve(&p, DEFAULT_ACCURACY).unwrap();
        assert_eq!(v.status, SdpStatus::Optimal, "{v:?}");
        assert!((v.eta_star.unwrap() - 1.0).abs() < 1e-8);
        assert!(linalg::max_abs_diff(&v.solution[0], &Mat::identity(2, 2)) < 1e-6);
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        // X ⪰ ηI, X ⪰ 0, −X − I ⪰ 0.
        let mut p = PsdProblem::new();
        let x = p.add_unknown(2);
        let c0 = p.add_constraint(Mat::zeros(2, 2), 1.0);
        p.add_term(c0, x, 1.0, &all(2));
        let c1 = p.add_constraint(Mat::zeros(2, 2), 0.0);
        p.add_term(c1, x, 1.0, &all(2));
        let c2 = p.add_constraint(-Mat::identity(2, 2), 0.0);
        p.add_term(c2, x, -1.0, &all(2));
        let v = solve(&p, DEFAULT_ACCURACY).unwrap();
        assert_eq!(v.status, SdpStatus::Infeasible, "{v:?}");
        assert!(v.eta_star.is_none());
    }

    #[test]
    fn unbounded_is_numerical_failure() {
        let mut p = PsdProblem::new();
        let x = p.add_unknown(1);
        let c0 = p.add_constraint(Mat::zeros(1, 1), 1.0);
        p.add_term(c0, x, 1.0, &[0]);
        let v = solve(&p, DEFAULT_ACCURACY).unwrap();
        assert_eq!(v.status, SdpStatus::NumericalFailure, "{v:?}");
    }

    #[test]
    fn malformed_problems_rejected() {
        let mut p = PsdProblem::new();
        let x = p.add_unknown(2);
        let c0 = p.add_constraint(Mat::zeros(2, 2), 0.0);
        p.add_term(c0, x, 1.0, &all(2));
        assert!(solve(&p, DEFAULT_ACCURACY).is_err());
        let mut q = PsdProblem::new();
        let x = q.add_unknown(3);
        let c0 = q.add_constraint(Mat::zeros(2, 2), 1.0);
        q.add_term(c0, x, 1.0, &all(2));
        assert!(solve(&q, DEFAULT_ACCURACY).is_err());
        let mut r = PsdProblem::new();
        r.add_unknown(1);
        r.add_constraint(Mat::zeros(1, 1), 1.0);
        assert!(solve(&r, DEFAULT_ACCURACY).is_err());
        assert!(solve(&PsdProblem::new(), DEFAULT_ACCURACY).is_err());
    }

    #[test]
    fn triplets_merge() {
        let mut t = vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, -1.0), (1, 0, 1.0)];
        merge_triplets(&mut t);
        assert_eq!(t, vec![(1, 0, 3.0)]);
    }
}
