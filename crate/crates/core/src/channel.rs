//! Local thermal noise acting on a subset of modes, parameterized by the
//! regularized time `τ = 1 − e^{−2γt}`.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::linalg::Mat;
use crate::states::GwwParams;
use crate::symplectic::CovMat;

/// Regularized time in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct RegularizedTime(f64);

impl RegularizedTime {
    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&tau) {
            return Err(invalid!("regularized time must lie in [0, 1), got {}", tau));
        }
        Ok(Self(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `τ = 1 − e^{−2γt}`. Saturates at the largest `f64` below one for very
/// long times so the result is always a valid [`RegularizedTime`].
pub fn tau_from_time(gamma: f64, t: f64) -> Result<RegularizedTime> {
    if !(gamma >= 0.0 && t >= 0.0) {
        return Err(invalid!("rate and time must be non-negative"));
    }
    let tau = -(-2.0 * gamma * t).exp_m1();
    RegularizedTime::new(tau.min(1.0 - f64::EPSILON / 2.0))
}

/// Identical independent thermal baths with mean photon number `n_photons`
/// on each noisy mode (zero-based indices).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BathSpec {
    pub n_photons: f64,
    noisy_modes: Vec<usize>,
    pub gamma: Option<f64>,
}

impl BathSpec {
    pub fn new(n_photons: f64, noisy_modes: &[usize]) -> Result<Self> {
        if !(n_photons.is_finite() && n_photons >= 0.0) {
            return Err(invalid!("mean photon number must be finite and >= 0, got {}", n_photons));
        }
        if noisy_modes.is_empty() {
            return Err(invalid!("bath needs at least one noisy mode"));
        }
        let mut modes = noisy_modes.to_vec();
        modes.sort_unstable();
        if modes.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid!("noisy modes {:?} contain duplicates", noisy_modes));
        }
        Ok(Self {
            n_photons,
            noisy_modes: modes,
            gamma: None,
        })
    }

    /// Noise on every one of `n` modes.
    pub fn all_modes(n_photons: f64, n: usize) -> Result<Self> {
        Self::new(n_photons, &(0..n).collect::<Vec<_>>())
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn noisy_modes(&self) -> &[usize] {
        &self.noisy_modes
    }

    pub fn is_noisy(&self, mode: usize) -> bool {
        self.noisy_modes.binary_search(&mode).is_ok()
    }

    /// Same bath with mode `i` relabeled `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mapped: Vec<usize> = self
            .noisy_modes
            .iter()
            .map(|&m| perm.get(m).copied().ok_or_else(|| invalid!("mode {} not in permutation", m + 1)))
            .collect::<Result<_>>()?;
        let mut b = Self::new(self.n_photons, &mapped)?;
        b.gamma = self.gamma;
        Ok(b)
    }

    /// One-based label such as `{1,3}`.
    pub fn label(&self) -> alloc::string::String {
        let parts: Vec<alloc::string::String> =
            self.noisy_modes.iter().map(|m| alloc::format!("{}", m + 1)).collect();
        alloc::format!("{{{}}}", parts.join(","))
    }
}

/// Per-mode `(x, y)` of the map `V → XVXᵀ + Y` on a noisy mode.
pub fn noisy_mode_coefficients(n_photons: f64, tau: f64) -> (f64, f64) {
    let root = (1.0 - tau).sqrt();
    (root.sqrt(), (0.5 + n_photons) * (1.0 - root))
}

/// `V(τ) = X V Xᵀ + Y` with `X = ⊕ x_i I₂`, `Y = ⊕ y_i I₂`, where noisy modes get
/// `x = (1−τ)^{1/4}`, `y = (½+N)(1−√(1−τ))` and quiet modes `x = 1`, `y = 0`.
pub fn evolve(v0: &CovMat, bath: &BathSpec, tau: RegularizedTime) -> Result<CovMat> {
    let n = v0.modes();
    if let Some(&m) = bath.noisy_modes.last() {
        if m >= n {
            return Err(invalid!("noisy mode {} out of range for {} modes", m + 1, n));
        }
    }
    let (x, y) = noisy_mode_coefficients(bath.n_photons, tau.value());
    let scale: Vec<f64> = (0..2 * n)
        .map(|i| if bath.is_noisy(i / 2) { x } else { 1.0 })
        .collect();
    let src = v0.matrix();
    let mut out = Mat::from_fn(2 * n, 2 * n, |i, j| scale[i] * scale[j] * src[(i, j)]);
    for i in 0..2 * n {
        if bath.is_noisy(i / 2) {
            out[(i, i)] += y;
        }
    }
    CovMat::new(out)
}

/// Evolved balanced FMSV with every mode noisy, assembled from `a`, `b`, `c`.
pub fn evolved_fmsv_closed_form(r: f64, n_photons: f64, tau: RegularizedTime) -> Result<CovMat> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid!("r must be finite and non-negative"));
    }
    let root = (1.0 - tau.value()).sqrt();
    let a = (0.5 + n_photons) * (1.0 - root) + r.cosh().powi(2) * root;
    let b = 0.5 * (2.0 * r).sinh() * root;
    let c = r.sinh().powi(2) * root;
    let mut m = Mat::zeros(8, 8);
    let mut put = |i: usize, j: usize, x: f64, y: f64| {
        m[(2 * i, 2 * j)] = x;
        m[(2 * i + 1, 2 * j + 1)] = y;
        m[(2 * j, 2 * i)] = x;
        m[(2 * j + 1, 2 * i + 1)] = y;
    };
    for k in 0..4 {
        put(k, k, a, a);
    }
    for (i, j) in [(0, 1), (0, 3), (1, 2), (2, 3)] {
        put(i, j, b, -b);
    }
    for (i, j) in [(0, 2), (1, 3)] {
        put(i, j, c, c);
    }
    CovMat::new(m)
}

/// Parameters of the evolved Werner-Wolf state with every mode noisy.
pub fn evolved_werner_wolf_params(n_photons: f64, tau: RegularizedTime) -> GwwParams {
    let root = (1.0 - tau.value()).sqrt();
    let base = 0.5 + n_photons;
    let a = base + (1.5 - n_photons) * root;
    GwwParams {
        A: a,
        B: base - (n_photons - 0.5) * root,
        C: a,
        D: base + (3.5 - n_photons) * root,
        E: root,
        F: root,
    }
}

/// Evolved Werner-Wolf state with every mode noisy, from its closed-form
/// blocks.
pub fn evolved_werner_wolf_closed_form(n_photons: f64, tau: RegularizedTime) -> Result<CovMat> {
    CovMat::new(crate::states::gww_matrix(&evolved_werner_wolf_params(
        n_photons, tau,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{fmsv, werner_wolf};
    use crate::symplectic::EIG_TOL;

    fn t(x: f64) -> RegularizedTime {
        RegularizedTime::new(x).unwrap()
    }

    #[test]
    fn tau_conversion() {
        assert_eq!(tau_from_time(1.0, 0.0).unwrap().value(), 0.0);
        assert!((tau_from_time(1.0, core::f64::consts::LN_2).unwrap().value() - 0.75).abs() < 1e-15);
        let late = tau_from_time(1.0, 1e6).unwrap().value();
        assert!(late < 1.0 && late > 1.0 - 1e-15);
        assert!(tau_from_time(-1.0, 1.0).is_err());
    }

    #[test]
    fn regularized_time_range() {
        assert!(RegularizedTime::new(1.0).is_err());
        assert!(RegularizedTime::new(-0.1).is_err());
        assert!(RegularizedTime::new(f64::NAN).is_err());
    }

    #[test]
    fn bath_validation() {
        assert!(BathSpec::new(-1.0, &[0]).is_err());
        assert!(BathSpec::new(1.0, &[]).is_err());
        assert!(BathSpec::new(1.0, &[1, 1]).is_err());
        assert_eq!(BathSpec::new(2.0, &[2, 0]).unwrap().label(), "{1,3}");
        let b = BathSpec::new(2.0, &[4]).unwrap();
        assert!(evolve(&CovMat::vacuum(4), &b, t(0.5)).is_err());
    }

    #[test]
    fn zero_time_is_identity_map() {
        let v = fmsv(0.6).unwrap();
        let b = BathSpec::all_modes(4.0, 4).unwrap();
        assert_eq!(evolve(&v, &b, t(0.0)).unwrap(), v);
    }

    #[test]
    fn long_time_reaches_thermal_state() {
        let v = fmsv(0.6).unwrap();
        let b = BathSpec::all_modes(4.0, 4).unwrap();
        let late = evolve(&v, &b, t(1.0 - 1e-14)).unwrap();
        assert!(late.max_abs_diff(&CovMat::scaled_identity(4, 4.5)) < 1e-5);
    }

    #[test]
    fn fmsv_oracle_value() {
        let v = evolved_fmsv_closed_form(0.6, 4.0, t(0.6)).unwrap();
        assert!((v.matrix()[(0, 0)] - 2.542_757).abs() < 1e-5);
        assert_eq!(evolved_fmsv_closed_form(0.6, 4.0, t(0.0)).unwrap(), fmsv(0.6).unwrap());
    }

    #[test]
    fn werner_wolf_oracle_value() {
        let p = evolved_werner_wolf_params(4.0, t(0.75));
        assert!((p.A - 3.25).abs() < 1e-15);
        let v0 = evolved_werner_wolf_closed_form(4.0, t(0.0)).unwrap();
        assert_eq!(v0, werner_wolf());
    }

    #[test]
    fn quiet_blocks_untouched() {
        let v = fmsv(0.6).unwrap();
        let b = BathSpec::new(10.0, &[1]).unwrap();
        let e = evolve(&v, &b, t(0.4)).unwrap();
        for i in [0, 2, 3] {
            for j in [0, 2, 3] {
                assert_eq!(e.block(i, j), v.block(i, j));
            }
        }
        assert!(e.is_physical(EIG_TOL));
    }
}
