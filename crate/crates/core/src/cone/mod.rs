//! Homogeneous scalar fields on the 1+1 light cone `{t > 0, |r| ≤ t}`.
//!
//! A field of degree `α` is stored as its `t = 1` profile `g`, so that
//! `F(t, r) = t^α g(r/t)`. Profiles hand out jets in `ρ`, which gives every
//! partial derivative through Euler's identity.

mod profiles;
mod sampled;

pub use profiles::*;
pub use sampled::{ChebPanel, SampledProfile};

use crate::error::{ForgeError, Result};
use crate::jet::Jet;
use std::sync::Arc;

/// Number of Taylor coefficients carried by profile jets (orders 0..=5).
pub const ORDER: usize = 6;
pub type PJet = Jet<ORDER>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn times(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConePoint {
    pub t: f64,
    pub r: f64,
}

impl ConePoint {
    pub fn new(t: f64, r: f64) -> Result<Self> {
        if !(t > 0.0) || !r.is_finite() || r.abs() > t * (1.0 + 1e-14) {
            return Err(ForgeError::Domain { t, r });
        }
        Ok(ConePoint { t, r })
    }

    pub fn rho(&self) -> f64 {
        (self.r / self.t).clamp(-1.0, 1.0)
    }
}

/// A `t = 1` section. Implementations must be pure.
pub trait Profile: Send + Sync {
    fn jet(&self, rho: f64) -> PJet;
}

/// Values of a field and its partial derivatives through second order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Derivs {
    pub f: f64,
    pub ft: f64,
    pub fr: f64,
    pub ftt: f64,
    pub frr: f64,
    pub ftr: f64,
}

#[derive(Clone)]
pub struct HomogeneousField {
    pub degree: f64,
    pub parity: Parity,
    pub profile: Arc<dyn Profile>,
}

impl std::fmt::Debug for HomogeneousField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HomogeneousField")
            .field("degree", &self.degree)
            .field("parity", &self.parity)
            .finish_non_exhaustive()
    }
}

impl HomogeneousField {
    pub fn new(degree: f64, parity: Parity, profile: Arc<dyn Profile>) -> Self {
        HomogeneousField {
            degree,
            parity,
            profile,
        }
    }

    pub fn from_fn<F>(degree: f64, parity: Parity, f: F) -> Self
    where
        F: Fn(PJet) -> PJet + Send + Sync + 'static,
    {
        Self::new(degree, parity, Arc::new(FnProfile(f)))
    }

    pub fn zero(degree: f64, parity: Parity) -> Self {
        Self::new(degree, parity, Arc::new(Constant(0.0)))
    }

    pub fn constant(degree: f64, value: f64) -> Self {
        Self::new(degree, Parity::Even, Arc::new(Constant(value)))
    }

    pub fn jet(&self, rho: f64) -> PJet {
        self.profile.jet(rho)
    }

    pub fn profile_value(&self, rho: f64) -> f64 {
        self.profile.jet(rho).value()
    }

    pub fn eval(&self, pt: ConePoint) -> f64 {
        pt.t.powf(self.degree) * self.profile_value(pt.rho())
    }

    pub fn eval_at(&self, t: f64, r: f64) -> Result<f64> {
        Ok(self.eval(ConePoint::new(t, r)?))
    }

    pub fn eval_derivs(&self, pt: ConePoint) -> Derivs {
        let a = self.degree;
        let rho = pt.rho();
        let j = self.profile.jet(rho);
        let (g, g1, g2) = (j.deriv(0), j.deriv(1), j.deriv(2));
        let t0 = pt.t.powf(a);
        let t1 = t0 / pt.t;
        let t2 = t1 / pt.t;
        Derivs {
            f: t0 * g,
            fr: t1 * g1,
            ft: t1 * (a * g - rho * g1),
            frr: t2 * g2,
            ftt: t2 * (a * (a - 1.0) * g - 2.0 * (a - 1.0) * rho * g1 + rho * rho * g2),
            ftr: t2 * ((a - 1.0) * g1 - rho * g2),
        }
    }

    /// `∂_t` as a homogeneous field of degree `α − 1`.
    pub fn dt(&self) -> HomogeneousField {
        HomogeneousField::new(
            self.degree - 1.0,
            self.parity,
            Arc::new(EulerT {
                inner: self.profile.clone(),
                degree: self.degree,
            }),
        )
    }

    /// `∂_r` as a homogeneous field of degree `α − 1`.
    pub fn dr(&self) -> HomogeneousField {
        HomogeneousField::new(
            self.degree - 1.0,
            self.parity.flip(),
            Arc::new(Deriv {
                inner: self.profile.clone(),
            }),
        )
    }

    pub fn scaled(&self, s: f64) -> HomogeneousField {
        HomogeneousField::new(
            self.degree,
            self.parity,
            Arc::new(Combo(vec![(s, self.profile.clone())])),
        )
    }

    /// Linear combination of fields sharing one degree.
    pub fn combo(terms: &[(f64, &HomogeneousField)]) -> HomogeneousField {
        let degree = terms[0].1.degree;
        let parity = terms[0].1.parity;
        for (_, f) in terms {
            debug_assert!((f.degree - degree).abs() < 1e-12, "degree mismatch in combo");
        }
        HomogeneousField::new(
            degree,
            parity,
            Arc::new(Combo(terms.iter().map(|(c, f)| (*c, f.profile.clone())).collect())),
        )
    }

    /// Product of two fields; degrees add.
    pub fn times(&self, other: &HomogeneousField) -> HomogeneousField {
        HomogeneousField::new(
            self.degree + other.degree,
            self.parity.times(other.parity),
            Arc::new(Product(self.profile.clone(), other.profile.clone())),
        )
    }

    /// Division by `r^k`; the degree drops by `k`.
    pub fn over_r_pow(&self, k: i32) -> HomogeneousField {
        let parity = if k % 2 == 0 { self.parity } else { self.parity.flip() };
        HomogeneousField::new(
            self.degree - k as f64,
            parity,
            Arc::new(OverRhoPow {
                inner: self.profile.clone(),
                k,
            }),
        )
    }

    pub fn with_profile(&self, profile: Arc<dyn Profile>) -> HomogeneousField {
        HomogeneousField::new(self.degree, self.parity, profile)
    }
}

/// `g_out(ρ) = ±g_in(−ρ)` with the sign set by `parity`.
pub fn reflect(field: &HomogeneousField, parity: Parity) -> HomogeneousField {
    HomogeneousField::new(
        field.degree,
        field.parity,
        Arc::new(Mirror {
            inner: field.profile.clone(),
            sign: parity.sign(),
        }),
    )
}

/// Largest parity defect `|g(−ρ) ∓ g(ρ)|` over the given nodes.
pub fn parity_check(field: &HomogeneousField, grid: &[f64]) -> (f64, f64) {
    let s = field.parity.sign();
    let mut worst = 0.0;
    let mut at = 0.0;
    for &rho in grid {
        let d = (field.profile_value(-rho) - s * field.profile_value(rho)).abs();
        if d > worst || d.is_nan() {
            worst = d;
            at = rho;
        }
    }
    (worst, at)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VanishingOrder {
    Slope(f64),
    AllOrders,
}

impl VanishingOrder {
    pub fn slope(&self) -> f64 {
        match self {
            VanishingOrder::Slope(s) => *s,
            VanishingOrder::AllOrders => f64::INFINITY,
        }
    }
}

/// Least-squares slope of `log|f(r)|` against `log r` on log-spaced samples.
pub fn vanishing_order<F: Fn(f64) -> f64>(f: F, r_lo: f64, r_hi: f64, samples: usize) -> VanishingOrder {
    let n = samples.max(3);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let floor = 1e-3 * f64::EPSILON;
    let mut all_small = true;
    for i in 0..n {
        let lr = r_lo.ln() + (r_hi.ln() - r_lo.ln()) * i as f64 / (n - 1) as f64;
        let v = f(lr.exp()).abs();
        if v >= floor {
            all_small = false;
        }
        xs.push(lr);
        ys.push(v.max(f64::MIN_POSITIVE).ln());
    }
    if all_small {
        return VanishingOrder::AllOrders;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..n {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    VanishingOrder::Slope(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_field(alpha: f64) -> HomogeneousField {
        HomogeneousField::from_fn(alpha, Parity::Even, move |x| (x + 1.0).powf(alpha))
    }

    #[test]
    fn eval_is_homogeneous() {
        let f = power_field(-2.0 / 3.0);
        let a = f.eval(ConePoint::new(2.0, 1.0).unwrap());
        let b = 2f64.powf(-2.0 / 3.0) * f.eval(ConePoint::new(1.0, 0.5).unwrap());
        assert!((a - b).abs() < 1e-15);
        assert!((f.eval_at(1.0, -0.5).unwrap() - 0.5f64.powf(-2.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn euler_derivatives_of_closed_form() {
        // (t + r)^α
        let f = power_field(-2.0 / 3.0);
        let d = f.eval_derivs(ConePoint::new(2.0, 0.5).unwrap());
        assert!((d.ft - (-2.0 / 3.0) * 2.5f64.powf(-5.0 / 3.0)).abs() < 1e-14);
        assert!((d.ft - d.fr).abs() < 1e-14);
        assert!((d.ftt - d.frr).abs() < 1e-13);
        assert!((d.ftr - d.frr).abs() < 1e-13);
    }

    #[test]
    fn constant_profile_derivatives() {
        let f = HomogeneousField::constant(-0.5, 1.0);
        let d = f.eval_derivs(ConePoint::new(3.0, 1.0).unwrap());
        assert_eq!(d.fr, 0.0);
        assert!((d.ft - (-0.5) * 3f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(ConePoint::new(1.0, 1.5).is_err());
        assert!(ConePoint::new(-1.0, 0.0).is_err());
        assert!(ConePoint::new(1.0, -1.0).is_ok());
    }

    #[test]
    fn cubic_vanishing_order() {
        let v = vanishing_order(|r| r.powi(3), 1e-4, 1e-2, 12);
        assert!((v.slope() - 3.0).abs() < 1e-10);
        assert_eq!(vanishing_order(|_| 0.0, 1e-4, 1e-2, 5), VanishingOrder::AllOrders);
    }

    #[test]
    fn reflection_is_an_involution() {
        let f = power_field(-2.0 / 3.0);
        let g = reflect(&reflect(&f, Parity::Even), Parity::Even);
        for &rho in &[-0.9, -0.2, 0.3, 0.8] {
            assert_eq!(f.profile_value(rho), g.profile_value(rho));
        }
        let odd = HomogeneousField::from_fn(1.0, Parity::Odd, |x| x.powi(3));
        let m = reflect(&odd, Parity::Odd);
        assert!((m.profile_value(0.4) - 0.064).abs() < 1e-15);
    }
}
