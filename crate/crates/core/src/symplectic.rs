//! Covariance matrices, symplectic forms and elementary Gaussian circuit
//! elements. Quadratures are interleaved, `(q1, p1, q2, p2, ...)`, and the
//! vacuum covariance matrix is the identity. Mode indices are zero-based in
//! the API and printed one-based.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::Cholesky;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Mat};

/// Tolerance on eigenvalues for physicality and PPT verdicts.
pub const EIG_TOL: f64 = 1e-9;

/// The symplectic form `Ω = ⊕ ω` with `ω = [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SympForm {
    modes: usize,
    matrix: Mat,
}

impl SympForm {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(invalid!("symplectic form needs at least one mode"));
        }
        Ok(Self {
            modes,
            matrix: signed_form(modes, |_| 1.0),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }
}

/// Block-diagonal form with sign `sign(k)` on the `ω` block of mode `k`.
pub(crate) fn signed_form(modes: usize, sign: impl Fn(usize) -> f64) -> Mat {
    let mut m = Mat::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        let s = sign(k);
        m[(2 * k, 2 * k + 1)] = s;
        m[(2 * k + 1, 2 * k)] = -s;
    }
    m
}

/// `Ω` for `n` modes as a plain matrix.
pub fn omega(modes: usize) -> Mat {
    signed_form(modes, |_| 1.0)
}

/// Result of an uncertainty-relation style eigenvalue test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenTest {
    pub passed: bool,
    pub min_eig: f64,
}

/// Real symmetric `2n × 2n` covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMat {
    modes: usize,
    data: Mat,
}

impl CovMat {
    /// Wraps a matrix, symmetrizing it. Rejects odd or non-square shapes,
    /// non-finite entries and matrices that are visibly not symmetric.
    pub fn new(data: Mat) -> Result<Self> {
        if !data.is_square() || data.nrows() == 0 || data.nrows() % 2 != 0 {
            return Err(invalid!(
                "covariance matrix must be 2n x 2n, got {:?}",
                data.shape()
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid!("covariance matrix has non-finite entries"));
        }
        let scale = 1.0 + linalg::max_abs(&data);
        if linalg::asymmetry(&data) > 1e-8 * scale {
            return Err(invalid!("covariance matrix is not symmetric"));
        }
        Ok(Self {
            modes: data.nrows() / 2,
            data: linalg::symmetrize(&data),
        })
    }

    pub fn from_row_slice(modes: usize, entries: &[f64]) -> Result<Self> {
        let d = 2 * modes;
        if entries.len() != d * d {
            return Err(invalid!("expected {} entries, got {}", d * d, entries.len()));
        }
        Self::new(Mat::from_row_slice(d, d, entries))
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::scaled_identity(modes, 1.0)
    }

    pub fn scaled_identity(modes: usize, nu: f64) -> Self {
        Self {
            modes,
            data: Mat::identity(2 * modes, 2 * modes) * nu,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &Mat {
        &self.data
    }

    pub fn into_matrix(self) -> Mat {
        self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    /// Smallest eigenvalue of `V + iΩ`; physical iff it is `≥ -tol`.
    pub fn physicality(&self, tol: f64) -> EigenTest {
        let embed = linalg::real_embed(&self.data, &omega(self.modes))
            .expect("shapes agree by construction");
        let min_eig = linalg::min_eigenvalue(&embed);
        EigenTest {
            passed: min_eig >= -tol,
            min_eig,
        }
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.physicality(tol).passed
    }

    /// Williamson spectrum, ascending, one value per mode.
    ///
    /// With `V = L Lᵀ`, the antisymmetric `B = Lᵀ Ω L` is similar to `ΩV`, so
    /// the eigenvalues of `BᵀB` are the `ν_k²`, each twice.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let chol = Cholesky::new(self.data.clone())
            .ok_or_else(|| Error::Domain("covariance matrix is not positive definite".into()))?;
        let l = chol.l();
        let b = l.transpose() * omega(self.modes) * &l;
        let sq = linalg::sym_eigenvalues(&(b.transpose() * &b));
        Ok(sq
            .chunks(2)
            .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
            .collect())
    }

    /// `S V Sᵀ`.
    pub fn transformed(&self, s: &SympMat) -> Result<CovMat> {
        if s.modes != self.modes {
            return Err(invalid!(
                "symplectic acts on {} modes, state has {}",
                s.modes,
                self.modes
            ));
        }
        Ok(Self {
            modes: self.modes,
            data: linalg::symmetrize(&(&s.data * &self.data * s.data.transpose())),
        })
    }

    /// 2×2 block coupling modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> Mat {
        self.data.view((2 * i, 2 * j), (2, 2)).into_owned()
    }

    pub fn max_abs_diff(&self, other: &CovMat) -> f64 {
        linalg::max_abs_diff(&self.data, &other.data)
    }
}

/// Unordered split of the modes into two non-empty groups.
///
/// Side A is the smaller side; on ties it is the side holding mode 0. Both
/// sides are sorted, so `{A|B}` and `{B|A}` normalize to the same value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "CutRepr", into = "CutRepr")
)]
pub struct Bipartition {
    modes: usize,
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

/// Serialized form of a cut: mode count and zero-based side A.
#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct CutRepr {
    modes: usize,
    side_a: Vec<usize>,
}

#[cfg(feature = "serde")]
impl TryFrom<CutRepr> for Bipartition {
    type Error = Error;
    fn try_from(r: CutRepr) -> Result<Self> {
        Bipartition::new(r.modes, &r.side_a)
    }
}

#[cfg(feature = "serde")]
impl From<Bipartition> for CutRepr {
    fn from(b: Bipartition) -> Self {
        CutRepr {
            modes: b.modes,
            side_a: b.side_a,
        }
    }
}

impl Bipartition {
    pub fn new(modes: usize, side: &[usize]) -> Result<Self> {
        let mut in_side = alloc::vec![false; modes];
        for &m in side {
            if m >= modes {
                return Err(invalid!("mode {} out of range for {} modes", m + 1, modes));
            }
            if in_side[m] {
                return Err(invalid!("mode {} listed twice", m + 1));
            }
            in_side[m] = true;
        }
        let a: Vec<usize> = (0..modes).filter(|&m| in_side[m]).collect();
        let b: Vec<usize> = (0..modes).filter(|&m| !in_side[m]).collect();
        if a.is_empty() || b.is_empty() {
            return Err(invalid!("both sides of a bipartition must be non-empty"));
        }
        let a_first = a.len() < b.len() || (a.len() == b.len() && a[0] == 0);
        let (side_a, side_b) = if a_first { (a, b) } else { (b, a) };
        Ok(Self {
            modes,
            side_a,
            side_b,
        })
    }

    /// Parses `"12:34"`, `"1|234"` or `"1,2:3,4"` (one-based mode labels).
    pub fn parse(modes: usize, text: &str) -> Result<Self> {
        let sep = text
            .find([':', '|'])
            .ok_or_else(|| invalid!("cut {:?} needs a ':' or '|' separator", text))?;
        let (left, right) = (&text[..sep], &text[sep + 1..]);
        let parse_side = |s: &str| -> Result<Vec<usize>> {
            let s = s.trim();
            let labels: Vec<&str> = if s.contains(',') {
                s.split(',').map(str::trim).collect()
            } else {
                s.char_indices().map(|(i, c)| &s[i..i + c.len_utf8()]).collect()
            };
            labels
                .into_iter()
                .map(|l| match l.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(invalid!("bad mode label {:?} in cut {:?}", l, text)),
                })
                .collect()
        };
        let a = parse_side(left)?;
        let b = parse_side(right)?;
        let cut = Self::new(modes, &a)?;
        let mut all: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
        all.sort_unstable();
        if all != (0..modes).collect::<Vec<_>>() {
            return Err(invalid!("cut {:?} does not cover modes 1..{} exactly once", text, modes));
        }
        Ok(cut)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    pub fn contains_a(&self, mode: usize) -> bool {
        self.side_a.binary_search(&mode).is_ok()
    }

    /// True for `1:(n-1)` cuts, where PPT is equivalent to separability.
    pub fn is_single_mode(&self) -> bool {
        self.side_a.len() == 1
    }

    /// `Ω̃ = -Ω_A ⊕ Ω_B` in the global interleaved ordering.
    pub fn signed_form(&self) -> Mat {
        signed_form(self.modes, |k| if self.contains_a(k) { -1.0 } else { 1.0 })
    }

    /// Quadrature indices of side A followed by side B.
    pub fn quadrature_order(&self) -> Vec<usize> {
        self.side_a
            .iter()
            .chain(self.side_b.iter())
            .flat_map(|&m| [2 * m, 2 * m + 1])
            .collect()
    }

    pub fn label(&self) -> String {
        fn side(modes: &[usize], wide: bool) -> String {
            let parts: Vec<String> = modes.iter().map(|m| alloc::format!("{}", m + 1)).collect();
            parts.join(if wide { "," } else { "" })
        }
        let wide = self.modes >= 10;
        alloc::format!("{}:{}", side(&self.side_a, wide), side(&self.side_b, wide))
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// All distinct unordered bipartitions of `n` modes, `2 ≤ n ≤ 16`.
///
/// Ordered by the size of side A, then lexicographically. For four modes
/// this is `1:234, 2:134, 3:124, 4:123, 12:34, 13:24, 14:23`. There are
/// `2^(n-1) - 1` of them; counting each equal-size split in both orders
/// would add another `C(n, n/2)/2` for even `n`.
pub fn enumerate_bipartitions(modes: usize) -> Result<Vec<Bipartition>> {
    if !(2..=16).contains(&modes) {
        return Err(invalid!("bipartitions need 2..=16 modes, got {}", modes));
    }
    let mut cuts = Vec::new();
    for size in 1..=modes / 2 {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            if 2 * size < modes || combo[0] == 0 {
                cuts.push(Bipartition::new(modes, &combo)?);
            }
            // next combination in lexicographic order
            let mut i = size;
            while i > 0 && combo[i - 1] == modes - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    Ok(cuts)
}

fn check_cut(v: &CovMat, cut: &Bipartition) -> Result<()> {
    if cut.modes != v.modes {
        return Err(invalid!(
            "cut is over {} modes, state has {}",
            cut.modes,
            v.modes
        ));
    }
    Ok(())
}

/// `ΛVΛ` with `Λ` flipping the momentum sign on side A. An involution; the
/// result need not be physical.
pub fn partial_transpose(v: &CovMat, cut: &Bipartition) -> Result<CovMat> {
    check_cut(v, cut)?;
    let d = 2 * v.modes;
    let sign = |i: usize| {
        if i % 2 == 1 && cut.contains_a(i / 2) {
            -1.0
        } else {
            1.0
        }
    };
    let data = Mat::from_fn(d, d, |i, j| sign(i) * sign(j) * v.data[(i, j)]);
    Ok(CovMat {
        modes: v.modes,
        data,
    })
}

/// PPT test: smallest eigenvalue of `V + iΩ̃`, PPT iff `≥ -tol`.
pub fn ppt_check(v: &CovMat, cut: &Bipartition, tol: f64) -> Result<EigenTest> {
    check_cut(v, cut)?;
    let embed = linalg::real_embed(&v.data, &cut.signed_form())?;
    let min_eig = linalg::min_eigenvalue(&embed);
    Ok(EigenTest {
        passed: min_eig >= -tol,
        min_eig,
    })
}

/// Reorders modes: mode `i` of the input becomes mode `perm[i]` of the output.
pub fn permute_modes(v: &CovMat, perm: &[usize]) -> Result<CovMat> {
    let n = v.modes;
    if perm.len() != n {
        return Err(invalid!("permutation has {} entries for {} modes", perm.len(), n));
    }
    let mut seen = alloc::vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(invalid!("{:?} is not a permutation of 0..{}", perm, n));
        }
        seen[p] = true;
    }
    let mut data = Mat::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        for j in 0..2 * n {
            let (pi, pj) = (2 * perm[i / 2] + i % 2, 2 * perm[j / 2] + j % 2);
            data[(pi, pj)] = v.data[(i, j)];
        }
    }
    Ok(CovMat { modes: n, data })
}

/// Real `2n × 2n` symplectic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SympMat {
    modes: usize,
    data: Mat,
}

impl SympMat {
    pub fn identity(modes: usize) -> Self {
        Self {
            modes,
            data: Mat::identity(2 * modes, 2 * modes),
        }
    }

    /// Wraps `data` after checking `‖SΩSᵀ − Ω‖_max ≤ tol`.
    pub fn new(data: Mat, tol: f64) -> Result<Self> {
        if !data.is_square() || data.nrows() % 2 != 0 || data.nrows() == 0 {
            return Err(invalid!("symplectic matrix must be 2n x 2n"));
        }
        let s = Self {
            modes: data.nrows() / 2,
            data,
        };
        let err = s.symplectic_error();
        if err > tol {
            return Err(Error::Domain(alloc::format!(
                "matrix is not symplectic (error {err:.3e})"
            )));
        }
        Ok(s)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &Mat {
        &self.data
    }

    /// `‖SΩSᵀ − Ω‖_max`.
    pub fn symplectic_error(&self) -> f64 {
        let w = omega(self.modes);
        linalg::max_abs_diff(&(&self.data * &w * self.data.transpose()), &w)
    }

    /// `self · other`, i.e. `other` acts first.
    pub fn then_after(&self, other: &SympMat) -> SympMat {
        assert_eq!(self.modes, other.modes, "mode counts differ");
        SympMat {
            modes: self.modes,
            data: &self.data * &other.data,
        }
    }

    pub fn transpose(&self) -> SympMat {
        SympMat {
            modes: self.modes,
            data: self.data.transpose(),
        }
    }

    /// `S Sᵀ`, the covariance matrix of `S` applied to the vacuum.
    pub fn on_vacuum(&self) -> CovMat {
        CovMat {
            modes: self.modes,
            data: linalg::symmetrize(&(&self.data * self.data.transpose())),
        }
    }

    pub(crate) fn from_raw(modes: usize, data: Mat) -> Self {
        Self { modes, data }
    }
}

fn check_pair(modes: usize, i: usize, j: usize) -> Result<()> {
    if i >= modes || j >= modes {
        return Err(invalid!("modes ({}, {}) out of range for {} modes", i + 1, j + 1, modes));
    }
    if i == j {
        return Err(invalid!("two-mode element needs distinct modes, got {} twice", i + 1));
    }
    Ok(())
}

/// Beam splitter on modes `(i, j)` with transmissivity `cos²θ`:
/// `q_i → cosθ q_i + sinθ q_j`, `q_j → −sinθ q_i + cosθ q_j`, same for `p`.
pub fn beam_splitter(modes: usize, i: usize, j: usize, theta: f64) -> Result<SympMat> {
    check_pair(modes, i, j)?;
    let (s, c) = (theta.sin(), theta.cos());
    let mut m = Mat::identity(2 * modes, 2 * modes);
    for k in 0..2 {
        let (a, b) = (2 * i + k, 2 * j + k);
        m[(a, a)] = c;
        m[(b, b)] = c;
        m[(a, b)] = s;
        m[(b, a)] = -s;
    }
    Ok(SympMat::from_raw(modes, m))
}

/// Two-mode squeezer `[[cosh r, sinh r], [sinh r, cosh r]]` on `(q_i, q_j)`
/// and `[[cosh r, −sinh r], [−sinh r, cosh r]]` on `(p_i, p_j)`.
pub fn two_mode_squeezer(modes: usize, i: usize, j: usize, r: f64) -> Result<SympMat> {
    check_pair(modes, i, j)?;
    let (ch, sh) = (r.cosh(), r.sinh());
    let mut m = Mat::identity(2 * modes, 2 * modes);
    m[(2 * i, 2 * i)] = ch;
    m[(2 * j, 2 * j)] = ch;
    m[(2 * i + 1, 2 * i + 1)] = ch;
    m[(2 * j + 1, 2 * j + 1)] = ch;
    m[(2 * i, 2 * j)] = sh;
    m[(2 * j, 2 * i)] = sh;
    m[(2 * i + 1, 2 * j + 1)] = -sh;
    m[(2 * j + 1, 2 * i + 1)] = -sh;
    Ok(SympMat::from_raw(modes, m))
}

/// `diag(e^{−r}, e^{r})` on mode `i`.
pub fn single_mode_squeezer(modes: usize, i: usize, r: f64) -> Result<SympMat> {
    if i >= modes {
        return Err(invalid!("mode {} out of range for {} modes", i + 1, modes));
    }
    let mut m = Mat::identity(2 * modes, 2 * modes);
    m[(2 * i, 2 * i)] = (-r).exp();
    m[(2 * i + 1, 2 * i + 1)] = r.exp();
    Ok(SympMat::from_raw(modes, m))
}
