//! Exterior region `|ρ| ≥ 1/2`: the mass profile and the energies it forces.

use crate::cone::{Combo, Deriv, EulerT, HomogeneousField, PJet, Parity, Profile};
use crate::jet::Jet;
use crate::params::Params;
use crate::quad::GaussRule;
use crate::smooth::step;
use std::sync::{Arc, OnceLock};

/// `h(y) = 3/32 + ∫_(1/16)^y S(16s − 1) ds`: equal to `y` for `y ≥ 1/8`,
/// constant `3/32` below `1/16`, with `0 ≤ h′ ≤ 1`.
pub fn flatten_h<const N: usize>(y: Jet<N>) -> Jet<N> {
    let yv = y.value();
    if yv >= 0.125 {
        return y;
    }
    if yv <= 0.0625 {
        return Jet::constant(3.0 / 32.0);
    }
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussRule::new(40));
    let u = 16.0 * yv - 1.0;
    let area = rule.integrate_composite(0.0, u, 4, crate::smooth::step_value);
    let value = 3.0 / 32.0 + area / 16.0;
    let in_y = step(Jet::<N>::var(yv).scale(16.0).add_scalar(-1.0)).integrate(value);
    in_y.compose(&y)
}

/// `μ((1+|ρ|)^q + h(1−|ρ|)^q)`, even in `ρ`.
#[derive(Clone, Copy, Debug)]
pub struct ExteriorMass {
    pub scale: f64,
    pub q: f64,
}

impl ExteriorMass {
    fn right<const N: usize>(&self, x: Jet<N>) -> Jet<N> {
        let a = x.add_scalar(1.0).powf(self.q);
        let b = flatten_h((-x).add_scalar(1.0)).powf(self.q);
        (a + b).scale(self.scale)
    }
}

impl Profile for ExteriorMass {
    fn jet(&self, rho: f64) -> PJet {
        if rho >= 0.0 {
            self.right(Jet::var(rho))
        } else {
            self.right::<6>(Jet::var(-rho)).mirrored()
        }
    }
}

pub fn build_exterior_m(params: &Params, scale: f64) -> HomogeneousField {
    HomogeneousField::new(
        params.deg_m_tilde(),
        Parity::Even,
        Arc::new(ExteriorMass {
            scale,
            q: params.deg_m_tilde(),
        }),
    )
}

/// `X = ½(−∂_tt + ∂_rr)M̃ − (p+1)V` as a field of degree `α`.
pub fn wave_defect(m_tilde: &HomogeneousField, v: &HomogeneousField, params: &Params) -> HomogeneousField {
    let q = m_tilde.degree;
    let mt: Arc<dyn Profile> = Arc::new(EulerT {
        inner: m_tilde.profile.clone(),
        degree: q,
    });
    let mtt: Arc<dyn Profile> = Arc::new(EulerT {
        inner: mt,
        degree: q - 1.0,
    });
    let mr: Arc<dyn Profile> = Arc::new(Deriv {
        inner: m_tilde.profile.clone(),
    });
    let mrr: Arc<dyn Profile> = Arc::new(Deriv { inner: mr });
    HomogeneousField::new(
        q - 2.0,
        Parity::Even,
        Arc::new(Combo(vec![
            (-0.5, mtt),
            (0.5, mrr),
            (-(params.p + 1.0), v.profile.clone()),
        ])),
    )
}

/// `(Ẽ_tt, Ẽ_rr)` from `Ẽ_tt + Ẽ_rr = e₊ + e₋` and `−Ẽ_tt + Ẽ_rr = X`.
pub fn build_exterior_energies(
    m_tilde: &HomogeneousField,
    v: &HomogeneousField,
    e_plus: &HomogeneousField,
    e_minus: &HomogeneousField,
    params: &Params,
) -> (HomogeneousField, HomogeneousField) {
    let x = wave_defect(m_tilde, v, params);
    let ett = HomogeneousField::combo(&[(0.5, e_plus), (0.5, e_minus), (-0.5, &x)]);
    let err = HomogeneousField::combo(&[(0.5, e_plus), (0.5, e_minus), (0.5, &x)]);
    (
        HomogeneousField {
            parity: Parity::Even,
            ..ett
        },
        HomogeneousField {
            parity: Parity::Even,
            ..err
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattening_properties() {
        let at = |y: f64| flatten_h::<3>(Jet::var(y));
        assert_eq!(at(0.3).value(), 0.3);
        assert_eq!(at(0.01).value(), 3.0 / 32.0);
        // Continuity at both ends of the blend.
        assert!((at(0.125 - 1e-12).value() - 0.125).abs() < 1e-11);
        assert!((at(0.0625 + 1e-9).value() - 3.0 / 32.0).abs() < 1e-12);
        // Chain rule through y = 1 − x.
        let x = 0.9;
        let j = flatten_h::<3>((-Jet::<3>::var(x)).add_scalar(1.0));
        let k = flatten_h::<3>(Jet::var(1.0 - x));
        assert!((j.deriv(1) + k.deriv(1)).abs() < 1e-15);
        assert!((j.deriv(2) - k.deriv(2)).abs() < 1e-12);
        for i in 1..100 {
            let y = 0.0625 + 0.0625 * i as f64 / 100.0;
            let j = at(y);
            assert!(j.value() >= 1.0 / 16.0);
            assert!((0.0..=1.0).contains(&j.deriv(1)));
        }
    }

    #[test]
    fn mir_formula_at_point_six() {
        let m = ExteriorMass {
            scale: 0.05,
            q: 4.0 / 3.0,
        };
        let v = m.jet(0.6).value();
        assert!((v - 0.10831).abs() < 1e-4, "{v}");
        assert_eq!(m.jet(-0.6).value(), v);
    }
}
