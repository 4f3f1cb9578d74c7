//! Run parameters and the exponent bookkeeping derived from `p`.

use crate::error::{ForgeError, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub residual: f64,
    pub psd_margin: f64,
    #[serde(rename = "match")]
    pub matching: f64,
    pub order_fit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-7,
            psd_margin: 0.0,
            matching: 1e-8,
            order_fit: 0.2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: f64,
    pub delta: f64,
    /// Bump amplitude `A`.
    pub amplitude: f64,
    /// Profile resolution `N`.
    pub n_profile: usize,
    /// Gauss–Legendre nodes per curve overlap interval.
    pub n_quad: usize,
    pub tol: Tolerances,
    /// Frozen constant for the potential upper bound.
    pub c_vpos: f64,
}

impl Params {
    pub fn new(p: f64, delta: f64, amplitude: f64, n_profile: usize) -> Result<Self> {
        let params = Params {
            p,
            delta,
            amplitude,
            n_profile,
            n_quad: 96,
            tol: Tolerances::default(),
            c_vpos: 10.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 5.0) {
            return Err(ForgeError::Params(format!(
                "supercriticality requires p > 5, got p = {}",
                self.p
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 0.25) {
            return Err(ForgeError::Params(format!(
                "delta must lie in (0, 1/4], got {}",
                self.delta
            )));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 1.0) {
            return Err(ForgeError::Params(format!(
                "amplitude A must be >= 1, got {}",
                self.amplitude
            )));
        }
        if self.n_profile < 64 || !self.n_profile.is_multiple_of(16) {
            return Err(ForgeError::Params(format!(
                "resolution must be a multiple of 16 and at least 64, got {}",
                self.n_profile
            )));
        }
        if self.n_quad < 16 {
            return Err(ForgeError::Params(format!(
                "quadrature needs at least 16 nodes, got {}",
                self.n_quad
            )));
        }
        Ok(())
    }

    /// Degree of `e₊`, `V` and the tilde energies: `-4/(p-1)`.
    pub fn alpha(&self) -> f64 {
        -4.0 / (self.p - 1.0)
    }

    /// Degree of the tilde mass: `(2p-6)/(p-1)`.
    pub fn deg_m_tilde(&self) -> f64 {
        (2.0 * self.p - 6.0) / (self.p - 1.0)
    }

    /// Degree of the lifted mass `M`.
    pub fn deg_m(&self) -> f64 {
        self.alpha()
    }

    /// Degree of the lifted energies: `-2(p+1)/(p-1)`.
    pub fn deg_energy(&self) -> f64 {
        -2.0 * (self.p + 1.0) / (self.p - 1.0)
    }

    /// Curve exponent `(p-3)/(p-1)`.
    pub fn q_f(&self) -> f64 {
        (self.p - 3.0) / (self.p - 1.0)
    }

    /// Scaling exponent of the transport residual.
    pub fn transport_scale_exponent(&self) -> f64 {
        (self.p + 3.0) / (self.p - 1.0)
    }

    pub fn with_resolution(&self, n: usize) -> Self {
        Params { n_profile: n, ..*self }
    }

    pub fn with_amplitude(&self, a: f64) -> Self {
        Params { amplitude: a, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_at_p7() {
        let p = Params::new(7.0, 0.05, 10.0, 2048).unwrap();
        assert!((p.alpha() + 2.0 / 3.0).abs() < 1e-15);
        assert!((p.deg_m_tilde() - 4.0 / 3.0).abs() < 1e-15);
        assert!((p.deg_energy() + 8.0 / 3.0).abs() < 1e-15);
        assert!((p.q_f() - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.deg_m_tilde() - 2.0 - p.deg_m()).abs() < 1e-15);
    }

    #[test]
    fn rejects_subcritical_and_bad_ranges() {
        assert!(Params::new(4.0, 0.05, 10.0, 2048).is_err());
        assert!(Params::new(5.0, 0.05, 10.0, 2048).is_err());
        assert!(Params::new(7.0, 0.3, 10.0, 2048).is_err());
        assert!(Params::new(7.0, 0.05, 0.5, 2048).is_err());
        assert!(Params::new(7.0, 0.05, 10.0, 100).is_err());
    }
}
