//! One-mode Bosonic Gaussian channels.
//!
//! A channel `(λ, X, Y)` acts on moments as
//! `m ↦ Xᵀm + λ`, `σ ↦ XᵀσX + 2Y`. For a single mode complete positivity
//! reduces to `Y ≥ 0` and `4 det Y ≥ (det X − 1)²`, because `XᵀΩX = det(X) Ω`
//! for any real 2×2 matrix.
//!
//! Composition is written `compose(first, second)`: `first` acts on the
//! state before `second`.

use crate::gaussian::GaussianState;
use crate::linalg::{add, Mat2, Vec2};
use crate::{Error, Result};

/// Slack on the CPTP inequality.
pub const CPTP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannel {
    lambda: Vec2,
    x: Mat2,
    y: Mat2,
}

impl GaussianChannel {
    pub fn new(lambda: Vec2, x: Mat2, y: Mat2) -> Result<Self> {
        let det_x = x.det();
        let det_y = y.det();
        let scale = libm::fmax(1.0, libm::fmax(libm::fabs(y.0[0][0]), libm::fabs(y.0[1][1])));
        let symmetric = y.asymmetry() <= CPTP_TOL * scale;
        let psd =
            y.0[0][0] >= -CPTP_TOL * scale && y.0[1][1] >= -CPTP_TOL * scale && det_y >= -CPTP_TOL * scale * scale;
        let gap = 4.0 * det_y - (det_x - 1.0) * (det_x - 1.0);
        let gap_scale = libm::fmax(1.0, libm::fmax(4.0 * libm::fabs(det_y), (det_x - 1.0) * (det_x - 1.0)));
        if !(symmetric && psd && gap >= -CPTP_TOL * gap_scale) {
            return Err(Error::NotCptp { det_x, det_y });
        }
        Ok(GaussianChannel { lambda, x, y })
    }

    pub fn identity() -> Self {
        GaussianChannel { lambda: [0.0, 0.0], x: Mat2::IDENTITY, y: Mat2::ZERO }
    }

    pub fn lambda(&self) -> Vec2 {
        self.lambda
    }

    pub fn x(&self) -> &Mat2 {
        &self.x
    }

    pub fn y(&self) -> &Mat2 {
        &self.y
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        let mean = add(self.x.transpose_mul_vec(state.mean()), self.lambda);
        let cov = self.x.congruence(state.cov()) + self.y.scale(2.0);
        GaussianState::new(mean, cov)
    }

    /// The channel `second ∘ first`.
    pub fn compose(first: &GaussianChannel, second: &GaussianChannel) -> GaussianChannel {
        GaussianChannel {
            lambda: add(second.x.transpose_mul_vec(first.lambda), second.lambda),
            x: first.x * second.x,
            y: second.x.congruence(&first.y) + second.y,
        }
    }
}

/// Phase-insensitive channel `Φ[g; α]`: `X = g I`, `Y = α I`, `λ = 0`.
///
/// Stores the noise `α` directly; the environment occupation `N` satisfies
/// `α = |g² − 1| (N + ½)` for `g ≠ 1` and `α = N` for `g = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainChannel {
    g: f64,
    alpha: f64,
}

impl GainChannel {
    pub fn new(g: f64, alpha: f64) -> Result<Self> {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::Domain { what: "gain g", value: g });
        }
        let floor = libm::fabs(g * g - 1.0) / 2.0;
        if !(alpha >= 0.0) || alpha < floor - CPTP_TOL * libm::fmax(1.0, floor) {
            return Err(Error::Domain { what: "noise alpha", value: alpha });
        }
        Ok(GainChannel { g, alpha })
    }

    pub fn identity() -> Self {
        GainChannel { g: 1.0, alpha: 0.0 }
    }

    /// Channel with gain `g` and environment occupation `n_env`.
    pub fn from_environment(g: f64, n_env: f64) -> Result<Self> {
        if !(n_env >= 0.0) {
            return Err(Error::Domain { what: "environment photon number", value: n_env });
        }
        let alpha = if g == 1.0 { n_env } else { libm::fabs(g * g - 1.0) * (n_env + 0.5) };
        GainChannel::new(g, alpha)
    }

    /// Beam splitter of transmissivity `eta²` against vacuum.
    pub fn pure_loss(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Domain { what: "loss transmissivity eta", value: eta });
        }
        Ok(GainChannel { g: eta, alpha: (1.0 - eta * eta) / 2.0 })
    }

    /// Quantum-limited amplifier of gain `k²`.
    pub fn pure_amp(k: f64) -> Result<Self> {
        if !(k > 1.0) || !k.is_finite() {
            return Err(Error::Domain { what: "amplifier gain k", value: k });
        }
        Ok(GainChannel { g: k, alpha: (k * k - 1.0) / 2.0 })
    }

    /// Classical additive noise of `n_add` photons.
    pub fn additive_noise(n_add: f64) -> Result<Self> {
        if !(n_add >= 0.0) || !n_add.is_finite() {
            return Err(Error::Domain { what: "additive noise N", value: n_add });
        }
        Ok(GainChannel { g: 1.0, alpha: n_add })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn environment_photons(&self) -> f64 {
        let d = libm::fabs(self.g * self.g - 1.0);
        if d == 0.0 {
            self.alpha
        } else {
            self.alpha / d - 0.5
        }
    }

    /// `second ∘ first`: `g = g₂g₁`, `α = g₂²α₁ + α₂`.
    pub fn compose(first: &GainChannel, second: &GainChannel) -> GainChannel {
        GainChannel { g: second.g * first.g, alpha: second.g * second.g * first.alpha + second.alpha }
    }

    pub fn to_channel(&self) -> GaussianChannel {
        GaussianChannel { lambda: [0.0, 0.0], x: Mat2::scalar(self.g), y: Mat2::scalar(self.alpha) }
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        self.to_channel().apply(state)
    }
}
