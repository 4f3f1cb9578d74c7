//! The untilded fields `M, E_tt, E_tr, E_rr, E_ωω` and the constraints on them.

use super::fd::ridders;
use super::fields::{over_r, TildeFields};
use super::report::CheckResult;
use crate::cone::{ConePoint, Derivs, HomogeneousField, PJet, Parity, Piecewise, Profile};
use crate::construct::interior::{lift_jets, rho_c, Component, CurveField, InteriorCurve, RHO_MIN};
use crate::construct::FieldBundle;
use crate::error::{ForgeError, Result};
use std::sync::Arc;

/// Spatial dimension of the radial reduction.
pub const DIM: usize = 3;

/// Initial step of the outer finite differences in (not-0)/(not-1).
pub const FD_STEP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct LiftedBundle {
    pub p: f64,
    pub m: HomogeneousField,
    pub e_tt: HomogeneousField,
    pub e_tr: HomogeneousField,
    pub e_rr: HomogeneousField,
    pub e_ww: HomogeneousField,
}

/// One lifted component computed from the tilde jets.
struct FromTilde {
    tilde: [Arc<dyn Profile>; 4],
    q: f64,
    index: usize,
}

impl Profile for FromTilde {
    fn jet(&self, rho: f64) -> PJet {
        let j = [
            self.tilde[0].jet(rho),
            self.tilde[1].jet(rho),
            self.tilde[2].jet(rho),
            self.tilde[3].jet(rho),
        ];
        lift_jets(&j, self.q, rho)[self.index]
    }
}

/// Lifts `fields`. With a curve, `|ρ| < ρ_min` is taken from its axial
/// form; without one the division formulas are used everywhere.
pub fn lift_fields(fields: &TildeFields, curve: Option<&Arc<InteriorCurve>>) -> LiftedBundle {
    let q = fields.m_tilde.degree;
    let tilde = [
        fields.m_tilde.profile.clone(),
        fields.e_tt.profile.clone(),
        fields.e_rr.profile.clone(),
        fields.e_tr.profile.clone(),
    ];
    let make = |c: Component| -> HomogeneousField {
        let outer: Arc<dyn Profile> = Arc::new(FromTilde {
            tilde: tilde.clone(),
            q,
            index: c as usize,
        });
        let profile: Arc<dyn Profile> = match curve {
            Some(curve) => Arc::new(Piecewise::new(
                vec![-RHO_MIN, RHO_MIN],
                vec![
                    outer.clone(),
                    Arc::new(CurveField {
                        curve: curve.clone(),
                        component: c,
                        lifted: true,
                    }),
                    outer,
                ],
            )),
            None => outer,
        };
        let degree = match c {
            Component::Mass => q - 2.0,
            _ => fields.e_tt.degree - 2.0,
        };
        HomogeneousField::new(degree, c.parity(), profile)
    };
    let e_tt = make(Component::Ett);
    LiftedBundle {
        p: fields.p,
        m: make(Component::Mass),
        e_ww: HomogeneousField::zero(e_tt.degree, Parity::Even),
        e_tt,
        e_tr: make(Component::Etr),
        e_rr: make(Component::Err),
    }
}

/// Lifts the bundle and guards against division blow-up near the axis:
/// every near-axis value must stay within 10× of the curve asymptotics
/// `M(1,0) = 4‖f′(1)‖²`, `E(1,0) ≲ 4‖f″(1)‖²`.
pub fn lift_untilde(b: &FieldBundle) -> Result<LiftedBundle> {
    let lifted = lift_fields(&TildeFields::from_bundle(b), Some(&b.curve));
    let inner = |i, j| b.bump.curve_inner(i, j, 1.0, 1.0).expect("valid orders");
    let m0 = 4.0 * inner(1, 1);
    let e0 = 4.0 * inner(2, 2);
    let rc = rho_c();
    let mut probes: Vec<f64> = (0..=40).map(|i| 2.0 * rc * i as f64 / 40.0 - rc).collect();
    probes.extend([-RHO_MIN, RHO_MIN, 0.5 * RHO_MIN, 1.5 * RHO_MIN]);
    for rho in probes {
        let checks = [
            ("M", lifted.m.profile_value(rho), m0),
            ("E_tt", lifted.e_tt.profile_value(rho), e0),
            ("E_rr", lifted.e_rr.profile_value(rho), e0),
            ("E_tr", lifted.e_tr.profile_value(rho), e0),
        ];
        for (name, v, a) in checks {
            if !(v.abs() <= 10.0 * a) {
                return Err(ForgeError::Lift(format!(
                    "{name}(1, {rho:e}) = {v:e} exceeds 10x the axial value {a:e}"
                )));
            }
        }
    }
    Ok(lifted)
}

/// Axial against correlated branch at `ρ_min`, lifted, orders 0..=2.
pub fn check_lift_continuity(curve: &InteriorCurve, tol: f64) -> CheckResult {
    let (axial, corr) = curve.branch_jets(RHO_MIN);
    let q = 2.0 * curve.bump.q_f;
    let from_corr = lift_jets(&corr.tilde, q, RHO_MIN);
    let mut worst = 0.0f64;
    let mut what = String::new();
    for c in Component::ALL {
        let i = c as usize;
        let scale = (0..3)
            .map(|k| axial.lifted[i].deriv(k).abs())
            .fold(0.0, f64::max)
            .max(axial.lifted[0].value().abs());
        for k in 0..3 {
            let g = (axial.lifted[i].deriv(k) - from_corr[i].deriv(k)).abs() / scale;
            if g > worst || g.is_nan() {
                worst = g;
                what = format!("{c:?} order {k}");
            }
        }
    }
    CheckResult::at_most(
        worst,
        tol,
        (1.0, RHO_MIN),
        format!("largest relative branch gap {worst:.3e} ({what})"),
    )
}

/// The constant `c` of the relaxation, from
/// `½c·(4/(p−1))·((p+3)/(p−1)) − (2d+1) = (p+1)/2`.
pub fn relaxation_constant(p: f64) -> f64 {
    let d = DIM as f64;
    ((p + 1.0) / 2.0 + 2.0 * d + 1.0) / (0.5 * (4.0 / (p - 1.0)) * ((p + 3.0) / (p - 1.0)))
}

struct Pointwise {
    m: Derivs,
    tt: Derivs,
    tr: Derivs,
    rr: Derivs,
    ww: Derivs,
}

impl LiftedBundle {
    fn at(&self, pt: ConePoint) -> Pointwise {
        Pointwise {
            m: self.m.eval_derivs(pt),
            tt: self.e_tt.eval_derivs(pt),
            tr: self.e_tr.eval_derivs(pt),
            rr: self.e_rr.eval_derivs(pt),
            ww: self.e_ww.eval_derivs(pt),
        }
    }

    fn dm1(&self) -> f64 {
        DIM as f64 - 1.0
    }

    /// Left side of (newerpos),
    /// `½(−∂_tt M + ∂_rr M + ((d−1)/r)∂_r M) + E_tt − E_rr − (d−1)E_ωω`,
    /// with the largest term magnitude.
    pub fn newerpos(&self, pt: ConePoint) -> (f64, f64) {
        let w = self.at(pt);
        let lap = over_r(w.m.fr, w.m.frr, pt.r) * self.dm1();
        let terms = [
            -0.5 * w.m.ftt,
            0.5 * w.m.frr,
            0.5 * lap,
            w.tt.f,
            -w.rr.f,
            -self.dm1() * w.ww.f,
        ];
        let lhs: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        (lhs, scale)
    }

    fn q_value(&self, t: f64, r: f64) -> f64 {
        self.newerpos(ConePoint { t, r }).0
    }

    /// Residuals of (not-0) and (not-1) with a common scale. (not-0) is
    /// `∂_t Q − (p+1)[−∂_tE_tt + ∂_rE_tr + ((d−1)/r)E_tr − ½∂_t tr E]` and
    /// (not-1) is `∂_r Q − (p+1)[−∂_tE_tr + ∂_rE_rr + ((d−1)/r)(E_rr − E_ωω) − ½∂_r tr E]`,
    /// with `Q` the (newerpos) left side and `tr E = −E_tt + E_rr + (d−1)E_ωω`.
    /// Outer derivatives of `Q` are Ridders differences. The scale is the
    /// largest term of either equation, so an equation vanishing by parity
    /// is measured against its partner.
    pub fn not_residuals(&self, pt: ConePoint) -> (f64, f64, f64) {
        let h = FD_STEP * pt.t;
        let (dqt, _) = ridders(|t| self.q_value(t, pt.r), pt.t, h);
        let (dqr, _) = ridders(|r| self.q_value(pt.t, r), pt.r, h);
        let w = self.at(pt);
        let k = self.p + 1.0;
        let d1 = self.dm1();
        let t0 = [
            -w.tt.ft,
            w.tr.fr,
            d1 * over_r(w.tr.f, w.tr.fr, pt.r),
            -0.5 * (-w.tt.ft + w.rr.ft + d1 * w.ww.ft),
        ];
        let t1 = [
            -w.tr.ft,
            w.rr.fr,
            d1 * over_r(w.rr.f - w.ww.f, w.rr.fr - w.ww.fr, pt.r),
            -0.5 * (-w.tt.fr + w.rr.fr + d1 * w.ww.fr),
        ];
        let scale = t0
            .iter()
            .chain(&t1)
            .fold(dqt.abs().max(dqr.abs()), |s, x| s.max(k * x.abs()));
        let r0 = (dqt - k * t0.iter().sum::<f64>()).abs();
        let r1 = (dqr - k * t1.iter().sum::<f64>()).abs();
        (r0, r1, scale)
    }

    pub fn not0(&self, pt: ConePoint) -> (f64, f64) {
        let (r0, _, s) = self.not_residuals(pt);
        (r0, s)
    }

    pub fn not1(&self, pt: ConePoint) -> (f64, f64) {
        let (_, r1, s) = self.not_residuals(pt);
        (r1, s)
    }

    /// The (la-2) matrix `[[M, ½∂_tM, ½∂_rM], [·, E_tt, E_tr], [·, ·, E_rr]]`.
    pub fn la2(&self, pt: ConePoint) -> [[f64; 3]; 3] {
        let w = self.at(pt);
        [
            [w.m.f, 0.5 * w.m.ft, 0.5 * w.m.fr],
            [0.5 * w.m.ft, w.tt.f, w.tr.f],
            [0.5 * w.m.fr, w.tr.f, w.rr.f],
        ]
    }

    /// The (la-3) matrix on the axis, `[[M, ½∂_tM], [·, E_tt]]`.
    pub fn la3(&self, t: f64) -> [[f64; 2]; 2] {
        let w = self.at(ConePoint { t, r: 0.0 });
        [[w.m.f, 0.5 * w.m.ft], [0.5 * w.m.ft, w.tt.f]]
    }

    /// The ε-relaxed fields: `M − cε t^α`, `E_tt − (d+1)ε t^γ`,
    /// `E_rr + ε t^γ`, `E_ωω + ε t^γ`.
    pub fn eps_perturb(&self, eps: f64) -> LiftedBundle {
        let delta = perturbation_only(self.p, self.m.degree, self.e_tt.degree, eps);
        let add = |a: &HomogeneousField, b: &HomogeneousField| HomogeneousField {
            parity: a.parity,
            ..HomogeneousField::combo(&[(1.0, a), (1.0, b)])
        };
        LiftedBundle {
            p: self.p,
            m: add(&self.m, &delta.m),
            e_tt: add(&self.e_tt, &delta.e_tt),
            e_tr: self.e_tr.clone(),
            e_rr: add(&self.e_rr, &delta.e_rr),
            e_ww: add(&self.e_ww, &delta.e_ww),
        }
    }
}

/// The ε-corrections alone, as a lifted bundle.
pub fn perturbation_only(p: f64, deg_m: f64, deg_e: f64, eps: f64) -> LiftedBundle {
    let c = relaxation_constant(p);
    let d = DIM as f64;
    LiftedBundle {
        p,
        m: HomogeneousField::constant(deg_m, -c * eps),
        e_tt: HomogeneousField::constant(deg_e, -(d + 1.0) * eps),
        e_tr: HomogeneousField::zero(deg_e, Parity::Odd),
        e_rr: HomogeneousField::constant(deg_e, eps),
        e_ww: HomogeneousField::constant(deg_e, eps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_bundle;
    use crate::Params;

    #[test]
    fn relaxation_constant_at_p7() {
        assert!((relaxation_constant(7.0) - 19.8).abs() < 1e-12);
    }

    #[test]
    fn perturbation_raises_newerpos_by_the_stated_amount() {
        let p = 7.0;
        let d = perturbation_only(p, -4.0 / 6.0, -16.0 / 6.0, 1e-3);
        for &(t, r) in &[(1.0, 0.3), (2.0, -0.5), (0.5, 0.0)] {
            let (lhs, _) = d.newerpos(ConePoint { t, r });
            let want = 0.5 * (p + 1.0) * 1e-3 * f64::powf(t, -16.0 / 6.0);
            assert!((lhs - want).abs() < 1e-12 * want, "{lhs} {want}");
            let (r0, s0) = d.not0(ConePoint { t, r });
            assert!(r0 <= 1e-8 * s0);
        }
    }

    #[test]
    fn lifted_mass_on_the_axis() {
        let b = build_bundle(&Params::new(7.0, 0.05, 10.0, 256).unwrap()).unwrap();
        let l = lift_untilde(&b).unwrap();
        assert!((l.m.profile_value(0.0) - 2.0).abs() < 1e-8);
        assert_eq!(l.e_ww.profile_value(0.3), 0.0);
        assert!((l.m.degree + 4.0 / 6.0).abs() < 1e-15);
        assert!((l.e_tt.degree + 16.0 / 6.0).abs() < 1e-15);
    }
}
