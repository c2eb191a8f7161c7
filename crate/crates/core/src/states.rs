//! Initial states: squeezed-vacuum circuits, the Adesso state, Werner-Wolf
//! states and random ensembles.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Mat};
use crate::symplectic::{self, beam_splitter, CovMat, SympMat, EIG_TOL};

/// Exponent convention for the squeezed inputs of the gFMSV circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SqueezeConvention {
    /// `diag(e^{2r}, e^{-2r})`; balanced angles give the closed-form FMSV.
    #[default]
    Fmsv,
    /// `diag(e^{r}, e^{-r})`, i.e. squeezing `r/2` in the default convention.
    Printed,
}

impl SqueezeConvention {
    fn exponent(self, r: f64) -> f64 {
        match self {
            Self::Fmsv => 2.0 * r,
            Self::Printed => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GfmsvParams {
    pub r: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub convention: SqueezeConvention,
}

impl GfmsvParams {
    pub fn new(r: f64, theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self {
            r,
            theta1,
            theta2,
            theta3,
            convention: SqueezeConvention::Fmsv,
        }
    }

    pub fn balanced(r: f64) -> Self {
        let q = core::f64::consts::FRAC_PI_4;
        Self::new(r, q, q, q)
    }

    pub fn with_convention(mut self, convention: SqueezeConvention) -> Self {
        self.convention = convention;
        self
    }
}

fn check_squeezing(name: &str, r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid!("{} must be finite and non-negative, got {}", name, r));
    }
    Ok(())
}

/// Sets the 2×2 block `(i, j)` and its transpose to `diag(x, y)`.
fn set_diag_block(m: &mut Mat, i: usize, j: usize, x: f64, y: f64) {
    m[(2 * i, 2 * j)] = x;
    m[(2 * i + 1, 2 * j + 1)] = y;
    m[(2 * j, 2 * i)] = x;
    m[(2 * j + 1, 2 * i + 1)] = y;
}

/// Balanced four-mode squeezed vacuum in closed form.
pub fn fmsv(r: f64) -> Result<CovMat> {
    check_squeezing("r", r)?;
    let (ch2, sh2, h) = (r.cosh().powi(2), r.sinh().powi(2), 0.5 * (2.0 * r).sinh());
    let mut m = Mat::zeros(8, 8);
    for k in 0..4 {
        set_diag_block(&mut m, k, k, ch2, ch2);
    }
    for (i, j) in [(0, 1), (0, 3), (1, 2), (2, 3)] {
        set_diag_block(&mut m, i, j, h, -h);
    }
    for (i, j) in [(0, 2), (1, 3)] {
        set_diag_block(&mut m, i, j, sh2, sh2);
    }
    CovMat::new(m)
}

/// Generalized FMSV: modes 1 and 2 squeezed in opposite quadratures, modes 3
/// and 4 in vacuum, mixed on beam splitters 12, then 24, then 13.
///
/// Each beam splitter is applied with its angle negated. This is the local
/// momentum/position sign flip `diag(1,-1,-1,1) ⊗ I₂` of the unnegated
/// circuit, so separability is unchanged, and it makes balanced angles land
/// exactly on [`fmsv`].
pub fn gfmsv(p: &GfmsvParams) -> Result<CovMat> {
    check_squeezing("r", p.r)?;
    if ![p.theta1, p.theta2, p.theta3].iter().all(|t| t.is_finite()) {
        return Err(invalid!("beam-splitter angles must be finite"));
    }
    let e = p.convention.exponent(p.r);
    let mut gamma = Mat::identity(8, 8);
    gamma[(0, 0)] = e.exp();
    gamma[(1, 1)] = (-e).exp();
    gamma[(2, 2)] = (-e).exp();
    gamma[(3, 3)] = e.exp();
    let circuit = beam_splitter(4, 0, 2, -p.theta3)?
        .then_after(&beam_splitter(4, 1, 3, -p.theta2)?)
        .then_after(&beam_splitter(4, 0, 1, -p.theta1)?);
    let s = circuit.matrix();
    CovMat::new(linalg::symmetrize(&(s * gamma * s.transpose())))
}

/// Two-mode squeezed vacua on modes (1,3) and (2,4).
pub fn tmsv_pair(r: f64) -> Result<CovMat> {
    check_squeezing("r", r)?;
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let mut m = Mat::zeros(8, 8);
    for k in 0..4 {
        set_diag_block(&mut m, k, k, c, c);
    }
    for (i, j) in [(0, 2), (1, 3)] {
        set_diag_block(&mut m, i, j, s, -s);
    }
    CovMat::new(m)
}

/// Pure state from a two-mode squeezer with parameter `s` on modes (2,3)
/// followed by squeezers with parameter `a` on (1,2) and (3,4), assembled
/// from its closed-form blocks.
pub fn adesso(s: f64, a: f64) -> Result<CovMat> {
    check_squeezing("s", s)?;
    check_squeezing("a", a)?;
    let (cha, sha) = (a.cosh(), a.sinh());
    let (c2s, s2s) = ((2.0 * s).cosh(), (2.0 * s).sinh());
    let outer = cha * cha + c2s * sha * sha;
    let inner = c2s * cha * cha + sha * sha;
    let e12 = s.cosh().powi(2) * (2.0 * a).sinh();
    let e13 = cha * sha * s2s;
    let e14 = sha * sha * s2s;
    let e23 = cha * cha * s2s;
    let mut m = Mat::zeros(8, 8);
    set_diag_block(&mut m, 0, 0, outer, outer);
    set_diag_block(&mut m, 3, 3, outer, outer);
    set_diag_block(&mut m, 1, 1, inner, inner);
    set_diag_block(&mut m, 2, 2, inner, inner);
    set_diag_block(&mut m, 0, 1, e12, -e12);
    set_diag_block(&mut m, 2, 3, e12, -e12);
    set_diag_block(&mut m, 0, 2, e13, e13);
    set_diag_block(&mut m, 1, 3, e13, e13);
    set_diag_block(&mut m, 0, 3, e14, -e14);
    set_diag_block(&mut m, 1, 2, e23, -e23);
    CovMat::new(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct GwwParams {
    pub A: f64,
    pub B: f64,
    pub C: f64,
    pub D: f64,
    pub E: f64,
    pub F: f64,
}

impl GwwParams {
    pub const WERNER_WOLF: GwwParams = GwwParams {
        A: 2.0,
        B: 1.0,
        C: 2.0,
        D: 4.0,
        E: 1.0,
        F: 1.0,
    };
}

/// The Werner-Wolf bound entangled state, entry for entry.
pub fn werner_wolf() -> CovMat {
    #[rustfmt::skip]
    let entries = [
        2., 0., 0., 0., 1., 0., 0., 0.,
        0., 1., 0., 0., 0., 0., 0., -1.,
        0., 0., 2., 0., 0., 0., -1., 0.,
        0., 0., 0., 1., 0., -1., 0., 0.,
        1., 0., 0., 0., 2., 0., 0., 0.,
        0., 0., 0., -1., 0., 4., 0., 0.,
        0., 0., -1., 0., 0., 0., 2., 0.,
        0., -1., 0., 0., 0., 0., 0., 4.,
    ];
    CovMat::from_row_slice(4, &entries).expect("constant matrix is well formed")
}

/// Assembles the generalized Werner-Wolf matrix without a physicality check.
pub(crate) fn gww_matrix(p: &GwwParams) -> Mat {
    let mut m = Mat::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![
        p.A, p.B, p.A, p.B, p.C, p.D, p.C, p.D
    ]));
    for (i, j, v) in [(0, 4, p.E), (1, 7, -p.F), (2, 6, -p.F), (3, 5, -p.F)] {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    m
}

/// Generalized Werner-Wolf state `[[𝒜, 𝒞], [𝒞, ℬ]]` with
/// `𝒜 = diag(A,B,A,B)` on modes 1,2 and `ℬ = diag(C,D,C,D)` on modes 3,4.
pub fn generalized_werner_wolf(p: &GwwParams) -> Result<CovMat> {
    let v = CovMat::new(gww_matrix(p))?;
    let t = v.physicality(EIG_TOL);
    if !t.passed {
        return Err(Error::Domain(alloc::format!(
            "parameters give an unphysical matrix (min eigenvalue {:.3e})",
            t.min_eig
        )));
    }
    Ok(v)
}

/// `(AC − E²)(BD − F²) − 2|EF| − CD − AB + 1`. Negative values certify
/// entanglement; non-negative values are inconclusive.
pub fn gww_separability_functional(p: &GwwParams) -> f64 {
    (p.A * p.C - p.E * p.E) * (p.B * p.D - p.F * p.F) - 2.0 * (p.E * p.F).abs() - p.C * p.D
        - p.A * p.B
        + 1.0
}

/// Deterministic generator for substream `stream` of `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Haar-random `n × n` unitary: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DMatrix<Complex64>> {
    if n == 0 {
        return Err(invalid!("unitary needs n >= 1"));
    }
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// `[[Re U, Im U], [−Im U, Re U]]` in `(q…, p…)` ordering, permuted to the
/// interleaved ordering. Orthogonal and symplectic for unitary `U`.
pub fn ortho_symplectic_from_unitary(u: &DMatrix<Complex64>) -> Result<SympMat> {
    if !u.is_square() || u.nrows() == 0 {
        return Err(invalid!("expected a non-empty square unitary"));
    }
    let n = u.nrows();
    let mut o = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (re, im) = (u[(i, j)].re, u[(i, j)].im);
            o[(2 * i, 2 * j)] = re;
            o[(2 * i, 2 * j + 1)] = im;
            o[(2 * i + 1, 2 * j)] = -im;
            o[(2 * i + 1, 2 * j + 1)] = re;
        }
    }
    SympMat::new(o, 1e-10)
}

pub fn haar_ortho_symplectic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SympMat> {
    ortho_symplectic_from_unitary(&haar_unitary(n, rng)?)
}

/// Random pure state `OΓOᵀ` with `Tr V = energy`. The excess `energy − 2n` is
/// split across modes by a flat Dirichlet draw in `t = cosh 2r − 1`.
pub fn random_pure<R: Rng + ?Sized>(n: usize, energy: f64, rng: &mut R) -> Result<CovMat> {
    if n == 0 {
        return Err(invalid!("random state needs n >= 1"));
    }
    let vacuum = 2.0 * n as f64;
    if !(energy.is_finite() && energy >= vacuum) {
        return Err(invalid!("energy {} is below the vacuum trace {}", energy, vacuum));
    }
    let weights: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    let budget = 0.5 * (energy - vacuum);
    let mut gamma = Mat::zeros(2 * n, 2 * n);
    for (k, w) in weights.iter().enumerate() {
        let t = budget * w / total;
        let r = 0.5 * (1.0 + t).acosh();
        gamma[(2 * k, 2 * k)] = (2.0 * r).exp();
        gamma[(2 * k + 1, 2 * k + 1)] = (-2.0 * r).exp();
    }
    let o = haar_ortho_symplectic(n, rng)?;
    let m = o.matrix();
    CovMat::new(linalg::symmetrize(&(m * gamma * m.transpose())))
}

/// `G + λ I` with `λ` the largest eigenvalue of `iΩ − G`, so that `V − iΩ`
/// is positive semidefinite and singular.
pub fn goe_shift(g: &Mat) -> Result<CovMat> {
    if !g.is_square() || g.nrows() % 2 != 0 || g.nrows() == 0 {
        return Err(invalid!("GOE seed matrix must be 2n x 2n"));
    }
    let n = g.nrows() / 2;
    let lambda = linalg::max_eigenvalue(&linalg::real_embed(&(-g), &symplectic::omega(n))?);
    CovMat::new(g + Mat::identity(2 * n, 2 * n) * lambda)
}

/// `G = (M + Mᵀ)/√2` with iid standard normal `M`, shifted by [`goe_shift`].
pub fn random_mixed_goe<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CovMat> {
    if n == 0 {
        return Err(invalid!("random state needs n >= 1"));
    }
    let d = 2 * n;
    let m = Mat::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let g = (&m + m.transpose()) * core::f64::consts::FRAC_1_SQRT_2;
    goe_shift(&g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum RandomKind {
    PureHaar { energy: f64 },
    MixedGoe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RandomSpec {
    pub modes: usize,
    pub kind: RandomKind,
    pub seed: u64,
}

impl RandomSpec {
    /// Member `index` of the ensemble, drawn from its own substream.
    pub fn sample(&self, index: u64) -> Result<CovMat> {
        let mut rng = seeded_rng(self.seed, index);
        match self.kind {
            RandomKind::PureHaar { energy } => random_pure(self.modes, energy, &mut rng),
            RandomKind::MixedGoe => random_mixed_goe(self.modes, &mut rng),
        }
    }
}
