//! One-mode Gaussian states at the level of first and second moments.
//!
//! A state is a mean vector `m` and a covariance matrix `σ` (anticommutator
//! convention without the ½, so the vacuum has `σ = I`). The parametrised
//! view [`StateParams`] splits a state into thermal occupation `n`, squeezing
//! `ζ = |ζ| e^{iφ}` and displacement `m`:
//!
//! ```text
//! σ = (2n+1) [cosh(2|ζ|) I + sinh(2|ζ|) (sin φ σ₁ − cos φ σ₃)]
//! ```

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::linalg::{dot, norm_sq, Mat2, Vec2};
use crate::{Error, Result};

/// Slack allowed on `det σ ≥ 1` and on symmetry.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    mean: Vec2,
    cov: Mat2,
}

impl GaussianState {
    /// Builds a state after checking symmetry, positive definiteness and
    /// `det σ ≥ 1`. For one mode these are equivalent to `σ + iΩ ≥ 0`.
    pub fn new(mean: Vec2, cov: Mat2) -> Result<Self> {
        if !(mean[0].is_finite() && mean[1].is_finite()) {
            return Err(Error::Domain { what: "mean", value: mean[0] + mean[1] });
        }
        let scale = libm::fmax(1.0, libm::fmax(libm::fabs(cov.0[0][0]), libm::fabs(cov.0[1][1])));
        if cov.asymmetry() > UNCERTAINTY_TOL * scale {
            return Err(Error::Uncertainty(alloc::format!(
                "covariance is not symmetric (|σ12 - σ21| = {})",
                cov.asymmetry()
            )));
        }
        let det = cov.det();
        if !(cov.0[0][0] > 0.0 && det > 0.0) {
            return Err(Error::Uncertainty(alloc::format!(
                "covariance is not positive definite (σ11 = {}, det = {det})",
                cov.0[0][0]
            )));
        }
        // det rounds with an error proportional to σ11·σ22, not to 1.
        let det_tol = libm::fmax(UNCERTAINTY_TOL, 8.0 * f64::EPSILON * cov.0[0][0] * cov.0[1][1]);
        if det < 1.0 - det_tol {
            return Err(Error::Uncertainty(alloc::format!("det σ = {det} < 1")));
        }
        Ok(GaussianState { mean, cov })
    }

    pub fn vacuum() -> Self {
        GaussianState { mean: [0.0, 0.0], cov: Mat2::IDENTITY }
    }

    pub fn coherent(mean: Vec2) -> Self {
        GaussianState { mean, cov: Mat2::IDENTITY }
    }

    pub fn thermal(n: f64) -> Result<Self> {
        if !(n >= 0.0) {
            return Err(Error::Domain { what: "thermal photon number", value: n });
        }
        Ok(GaussianState { mean: [0.0, 0.0], cov: Mat2::scalar(2.0 * n + 1.0) })
    }

    pub fn mean(&self) -> Vec2 {
        self.mean
    }

    pub fn cov(&self) -> &Mat2 {
        &self.cov
    }

    pub fn is_pure(&self) -> bool {
        let c = &self.cov.0;
        libm::fabs(self.cov.det() - 1.0) <= libm::fmax(UNCERTAINTY_TOL, 8.0 * f64::EPSILON * c[0][0] * c[1][1])
    }

    /// `χ(z) = exp(−¼ zᵀσz + i mᵀz)`.
    pub fn char_function(&self, z: Vec2) -> Complex64 {
        let amplitude = libm::exp(-0.25 * self.cov.quadratic_form(z));
        let phase = dot(self.mean, z);
        Complex64::new(amplitude * libm::cos(phase), amplitude * libm::sin(phase))
    }

    /// Mean energy `tr(σ)/4 + |m|²/2`.
    pub fn energy(&self) -> f64 {
        self.cov.trace() / 4.0 + norm_sq(self.mean) / 2.0
    }

    /// Closed-form ergotropy `tr(σ)/4 + |m|²/2 − √det(σ)/2`.
    pub fn ergotropy(&self) -> f64 {
        self.energy() - self.thermal_gap()
    }

    /// Energy of the passive state with the same spectrum, `n + ½`.
    pub fn thermal_gap(&self) -> f64 {
        libm::sqrt(self.cov.det()) / 2.0
    }

    pub fn ergotropy_summary(&self) -> ErgotropySummary {
        let energy = self.energy();
        let thermal_gap = self.thermal_gap();
        let ergotropy = energy - thermal_gap;
        ErgotropySummary { energy, ergotropy, r0: ergotropy / energy, thermal_gap }
    }

    /// Inverts the squeezed-thermal parametrisation.
    ///
    /// The phase is recovered modulo 2π; unsqueezed states report `φ = 0`.
    pub fn params(&self) -> StateParams {
        let [[a, b], [_, d]] = self.cov.0;
        let root_det = libm::sqrt(libm::fmax(self.cov.det(), 1.0));
        let n = libm::fmax((root_det - 1.0) / 2.0, 0.0);
        let sin_part = b / root_det;
        let cos_part = (d - a) / (2.0 * root_det);
        let sinh2 = libm::hypot(sin_part, cos_part);
        let zeta_abs = libm::asinh(sinh2) / 2.0;
        let zeta_phase = if sinh2 == 0.0 {
            0.0
        } else {
            let phi = libm::atan2(sin_part, cos_part);
            if phi < 0.0 {
                phi + TAU
            } else {
                phi
            }
        };
        StateParams { n, zeta_abs, zeta_phase, mean: self.mean }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgotropySummary {
    pub energy: f64,
    pub ergotropy: f64,
    /// `ℰ / E`.
    pub r0: f64,
    /// `E − ℰ = n + ½`.
    pub thermal_gap: f64,
}

/// Squeezed, displaced thermal parametrisation of a one-mode state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateParams {
    pub n: f64,
    pub zeta_abs: f64,
    pub zeta_phase: f64,
    pub mean: Vec2,
}

impl StateParams {
    pub fn new(n: f64, zeta_abs: f64, zeta_phase: f64, mean: Vec2) -> Result<Self> {
        let p = StateParams { n, zeta_abs, zeta_phase, mean };
        p.check()?;
        Ok(p)
    }

    /// Squeezing given through `cosh(2|ζ|)`, the usual way to quote it.
    /// Displacement is along the first quadrature.
    pub fn from_cosh(n: f64, cosh2z: f64, m2: f64) -> Result<Self> {
        if !(cosh2z >= 1.0) {
            return Err(Error::Domain { what: "cosh(2|zeta|)", value: cosh2z });
        }
        if !(m2 >= 0.0) {
            return Err(Error::Domain { what: "squared displacement", value: m2 });
        }
        StateParams::new(n, libm::acosh(cosh2z) / 2.0, 0.0, [libm::sqrt(m2), 0.0])
    }

    pub fn coherent(m2: f64) -> Result<Self> {
        StateParams::from_cosh(0.0, 1.0, m2)
    }

    fn check(&self) -> Result<()> {
        if !(self.n >= 0.0) || !self.n.is_finite() {
            return Err(Error::Domain { what: "thermal photon number n", value: self.n });
        }
        if !(self.zeta_abs >= 0.0) || !self.zeta_abs.is_finite() {
            return Err(Error::Domain { what: "squeezing magnitude |zeta|", value: self.zeta_abs });
        }
        if !self.zeta_phase.is_finite() {
            return Err(Error::Domain { what: "squeezing phase", value: self.zeta_phase });
        }
        if !(self.mean[0].is_finite() && self.mean[1].is_finite()) {
            return Err(Error::Domain { what: "mean", value: self.m2() });
        }
        Ok(())
    }

    /// `2n + 1`.
    pub fn noise_factor(&self) -> f64 {
        2.0 * self.n + 1.0
    }

    pub fn cosh2z(&self) -> f64 {
        libm::cosh(2.0 * self.zeta_abs)
    }

    /// `cosh(2|ζ|) − 1`, evaluated as `2 sinh²|ζ|` to keep small squeezing exact.
    pub fn cosh2z_minus_one(&self) -> f64 {
        let s = libm::sinh(self.zeta_abs);
        2.0 * s * s
    }

    pub fn m2(&self) -> f64 {
        norm_sq(self.mean)
    }

    pub fn energy(&self) -> f64 {
        (self.noise_factor() * self.cosh2z() + self.m2()) / 2.0
    }

    /// `((2n+1)(cosh 2|ζ| − 1) + m²) / 2`.
    pub fn ergotropy(&self) -> f64 {
        (self.noise_factor() * self.cosh2z_minus_one() + self.m2()) / 2.0
    }

    pub fn to_state(&self) -> Result<GaussianState> {
        self.check()?;
        let scale = self.noise_factor();
        // cosh 2|ζ| ∓ sinh 2|ζ| cos φ written without cancellation
        let (up, down) = (libm::exp(2.0 * self.zeta_abs), libm::exp(-2.0 * self.zeta_abs));
        let (sh, ch) = (libm::sin(self.zeta_phase / 2.0), libm::cos(self.zeta_phase / 2.0));
        let (sh2, ch2) = (sh * sh, ch * ch);
        let off = scale * libm::sinh(2.0 * self.zeta_abs) * libm::sin(self.zeta_phase);
        let cov = Mat2::new(scale * (up * sh2 + down * ch2), off, off, scale * (up * ch2 + down * sh2));
        GaussianState::new(self.mean, cov)
    }
}

/// Coordinates of the iso-ergotropic manifold `z·y + x = 2ℰ`, with
/// `x = m²`, `y = cosh(2|ζ|) − 1`, `z = 2n + 1`. Each point fixes two
/// coordinates and the third is solved for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsoPoint {
    /// Given squeezing `y` and noise `z`, solve for the displacement.
    Displacement { y: f64, z: f64 },
    /// Given displacement `x` and noise `z`, solve for the squeezing.
    Squeezing { x: f64, z: f64 },
    /// Given displacement `x` and squeezing `y`, solve for the noise.
    Noise { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsoSample {
    pub states: Vec<StateParams>,
    /// Indices of grid points that would need `n < 0`, negative `m²` or
    /// negative `cosh(2|ζ|) − 1`.
    pub skipped: Vec<usize>,
}

/// Places states on the manifold of constant ergotropy `target`.
pub fn iso_ergotropy_sample(target: f64, points: &[IsoPoint]) -> Result<IsoSample> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Domain { what: "target ergotropy", value: target });
    }
    let two_e = 2.0 * target;
    let mut states = Vec::with_capacity(points.len());
    let mut skipped = Vec::new();
    for (i, point) in points.iter().enumerate() {
        let (x, y, z) = match *point {
            IsoPoint::Displacement { y, z } => (two_e - z * y, y, z),
            IsoPoint::Squeezing { x, z } => (x, (two_e - x) / z, z),
            IsoPoint::Noise { x, y } => (x, y, (two_e - x) / y),
        };
        let feasible = x >= 0.0 && y >= 0.0 && z >= 1.0 && x.is_finite() && y.is_finite() && z.is_finite();
        if !feasible {
            skipped.push(i);
            continue;
        }
        let n = (z - 1.0) / 2.0;
        // y = 2 sinh²|ζ|
        let zeta_abs = libm::asinh(libm::sqrt(y / 2.0));
        states.push(StateParams { n, zeta_abs, zeta_phase: 0.0, mean: [libm::sqrt(x), 0.0] });
    }
    Ok(IsoSample { states, skipped })
}

/// Product grid of squeezing values `y` and noise values `z`, solving each
/// point for the displacement.
pub fn iso_grid(ys: &[f64], zs: &[f64]) -> Vec<IsoPoint> {
    zs.iter().flat_map(|&z| ys.iter().map(move |&y| IsoPoint::Displacement { y, z })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn squeezed_fig() -> StateParams {
        StateParams::from_cosh(0.0, 51.0, 0.0).unwrap()
    }

    #[test]
    fn strong_squeezing_is_accepted() {
        for cosh in [1e3, 1e5, 1e7] {
            let s = StateParams::from_cosh(0.0, cosh, 0.0).unwrap().to_state().unwrap();
            assert!(s.is_pure());
        }
        let too_tight = Mat2::diag(1e5, 0.99e-5);
        assert!(GaussianState::new([0.0, 0.0], too_tight).is_err());
    }

    #[test]
    fn vacuum_from_params() {
        let s = StateParams::new(0.0, 0.0, 0.0, [0.0, 0.0]).unwrap().to_state().unwrap();
        assert_eq!(s, GaussianState::vacuum());
        assert_eq!(s.energy(), 0.5);
        assert_eq!(s.ergotropy(), 0.0);
    }

    #[test]
    fn squeezed_covariance_is_pure() {
        let s = squeezed_fig().to_state().unwrap();
        let cov = s.cov();
        let sinh = 2600f64.sqrt();
        assert_relative_eq!(cov.0[0][0], 51.0 - sinh, epsilon = 1e-12);
        assert_relative_eq!(cov.0[1][1], 51.0 + sinh, epsilon = 1e-12);
        assert_eq!(cov.0[0][1], 0.0);
        assert_relative_eq!(cov.det(), 1.0, epsilon = 1e-12);
        assert!(s.is_pure());
    }

    #[test]
    fn thermal_displaced_covariance() {
        let p = StateParams::from_cosh(10.0, 1.0, 50.0).unwrap();
        let s = p.to_state().unwrap();
        assert_eq!(*s.cov(), Mat2::scalar(21.0));
        assert_relative_eq!(s.mean()[0], 50f64.sqrt());
        assert_relative_eq!(s.ergotropy(), 25.0, epsilon = 1e-12);
    }

    #[test]
    fn params_inversion() {
        let p = GaussianState::vacuum().params();
        assert_eq!((p.n, p.zeta_abs, p.zeta_phase), (0.0, 0.0, 0.0));

        let p = GaussianState::thermal(10.0).unwrap().params();
        assert_eq!((p.n, p.zeta_abs), (10.0, 0.0));

        let p = squeezed_fig().to_state().unwrap().params();
        assert_relative_eq!(p.cosh2z(), 51.0, epsilon = 1e-10);
        assert!(p.n.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params_and_covariances() {
        assert!(matches!(StateParams::new(-0.1, 0.0, 0.0, [0.0, 0.0]), Err(Error::Domain { .. })));
        assert!(matches!(StateParams::new(0.0, -1.0, 0.0, [0.0, 0.0]), Err(Error::Domain { .. })));
        assert!(matches!(GaussianState::new([0.0, 0.0], Mat2::scalar(0.5)), Err(Error::Uncertainty(_))));
        assert!(matches!(GaussianState::new([0.0, 0.0], Mat2::new(2.0, 1.0, 0.0, 2.0)), Err(Error::Uncertainty(_))));
        assert!(matches!(GaussianState::new([0.0, 0.0], Mat2::new(-2.0, 0.0, 0.0, -2.0)), Err(Error::Uncertainty(_))));
    }

    #[test]
    fn char_function_values() {
        let vac = GaussianState::vacuum();
        assert_eq!(vac.char_function([0.0, 0.0]), Complex64::new(1.0, 0.0));
        assert_relative_eq!(vac.char_function([2.0, 0.0]).re, (-1f64).exp(), epsilon = 1e-15);

        let coh = GaussianState::coherent([50f64.sqrt(), 0.0]);
        let chi = coh.char_function([0.0, 1.0]);
        assert_relative_eq!(chi.re, (-0.25f64).exp(), epsilon = 1e-15);
        assert_eq!(chi.im, 0.0);
    }

    #[test]
    fn energies_and_ergotropies() {
        let coh = StateParams::coherent(50.0).unwrap();
        assert_relative_eq!(coh.to_state().unwrap().energy(), 25.5, epsilon = 1e-12);
        assert_relative_eq!(coh.to_state().unwrap().ergotropy(), 25.0, epsilon = 1e-12);
        let sq = squeezed_fig();
        assert_relative_eq!(sq.to_state().unwrap().energy(), 25.5, epsilon = 1e-12);
        assert_relative_eq!(sq.ergotropy(), 25.0, epsilon = 1e-12);
        assert_eq!(GaussianState::thermal(3.0).unwrap().ergotropy(), 0.0);
    }

    #[test]
    fn iso_manifold_corners() {
        let points = [
            IsoPoint::Displacement { y: 0.0, z: 1.0 },
            IsoPoint::Squeezing { x: 0.0, z: 1.0 },
            IsoPoint::Squeezing { x: 60.0, z: 0.5 },
            IsoPoint::Noise { x: 90.0, y: 20.0 },
            IsoPoint::Displacement { y: 150.0, z: 1.0 },
        ];
        let sample = iso_ergotropy_sample(50.0, &points).unwrap();
        assert_eq!(sample.skipped, alloc::vec![2, 3, 4]);
        assert_relative_eq!(sample.states[0].m2(), 100.0, epsilon = 1e-12);
        assert_relative_eq!(sample.states[1].cosh2z(), 101.0, epsilon = 1e-10);
        assert!(iso_ergotropy_sample(0.0, &points).is_err());
    }

    #[test]
    fn iso_grid_states_share_ergotropy() {
        let ys = [0.0, 0.5, 3.0, 10.0, 40.0, 99.0];
        let zs = [1.0, 1.5, 2.0, 5.0];
        let sample = iso_ergotropy_sample(50.0, &iso_grid(&ys, &zs)).unwrap();
        assert_eq!(sample.states.len() + sample.skipped.len(), 24);
        for p in &sample.states {
            assert!((p.ergotropy() - 50.0).abs() < 1e-12, "{p:?}");
            assert!((p.to_state().unwrap().ergotropy() - 50.0).abs() < 1e-10);
        }
    }

    fn arb_params() -> impl Strategy<Value = StateParams> {
        (0.0f64..20.0, 0.0f64..2.5, 0.0f64..TAU, -10.0f64..10.0, -10.0f64..10.0)
            .prop_map(|(n, z, phi, a, b)| StateParams { n, zeta_abs: z, zeta_phase: phi, mean: [a, b] })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn thermal_gap_identity(p in arb_params()) {
            let s = p.to_state().unwrap();
            let summary = s.ergotropy_summary();
            let scale = summary.energy.max(1.0);
            prop_assert!((summary.energy - summary.ergotropy - (p.n + 0.5)).abs() <= 1e-12 * scale);
            prop_assert!(summary.ergotropy >= -1e-12 * scale && summary.ergotropy <= summary.energy);
            prop_assert!((s.cov().det() - p.noise_factor().powi(2)).abs() <= 1e-12 * s.cov().trace().powi(2).max(1.0));
            prop_assert!((s.ergotropy() - p.ergotropy()).abs() <= 1e-12 * scale);
            prop_assert_eq!(s.char_function([0.0, 0.0]), Complex64::new(1.0, 0.0));
        }

        #[test]
        fn params_round_trip(p in arb_params()) {
            let back = p.to_state().unwrap().params();
            let scale = p.noise_factor() * p.cosh2z();
            prop_assert!((back.n - p.n).abs() <= 1e-10 * scale);
            prop_assert!((back.zeta_abs - p.zeta_abs).abs() <= 1e-10 * scale);
            prop_assert_eq!(back.mean, p.mean);
            if p.zeta_abs > 1e-3 {
                let d = (back.zeta_phase - p.zeta_phase).rem_euclid(TAU);
                prop_assert!(d.min(TAU - d) < 1e-8);
            }
        }
    }
}
