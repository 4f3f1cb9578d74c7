//! The assembled field bundle.

use super::eplus::{build_eplus_left, EplusLeft, EplusLeftReport};
use super::exterior::{build_exterior_energies, build_exterior_m};
use super::grid;
use super::interior::{rho_c, ClosedInterior, Component, CurveField, InteriorCurve};
use super::potential::{compute_v_left, eplus_panels, extend_eplus_right, v_panels, PotentialInfo};
use crate::bump::BumpCurve;
use crate::cone::{
    reflect, Constant, FnProfile, HomogeneousField, Mirror, PJet, Parity, Piecewise, Profile, SampledProfile,
};
use crate::error::{ForgeError, Result};
use crate::params::Params;
use std::sync::Arc;

/// Construction by-products kept for verification and dumping.
#[derive(Clone)]
pub struct BundleParts {
    pub eplus_left: EplusLeft,
    pub eplus_report: EplusLeftReport,
    pub v_left: Arc<SampledProfile>,
    pub potential: Option<PotentialInfo>,
    pub eplus_right: Arc<SampledProfile>,
    pub eplus_pieces: Arc<Piecewise>,
    pub v_pieces: Arc<Piecewise>,
    pub m_pieces: Arc<Piecewise>,
    pub ett_pieces: Arc<Piecewise>,
    pub err_pieces: Arc<Piecewise>,
    /// Largest relative seam mismatch found during assembly, per field.
    pub seam_gaps: Vec<(String, f64)>,
}

/// Dump names of the bundle fields, in [`FieldBundle::named_fields`] order.
pub const FIELD_NAMES: [&str; 7] = ["e_plus", "e_minus", "V", "M_tilde", "E_tt", "E_rr", "E_tr"];

#[derive(Clone)]
pub struct FieldBundle {
    pub params: Params,
    pub bump: Arc<BumpCurve>,
    pub curve: Arc<InteriorCurve>,
    pub e_plus: HomogeneousField,
    pub e_minus: HomogeneousField,
    pub v: HomogeneousField,
    pub m_tilde: HomogeneousField,
    pub e_tt: HomogeneousField,
    pub e_rr: HomogeneousField,
    pub e_tr: HomogeneousField,
    pub parts: BundleParts,
}

impl std::fmt::Debug for FieldBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldBundle")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl FieldBundle {
    /// Fields by dump name, in a fixed order.
    pub fn named_fields(&self) -> Vec<(&'static str, &HomogeneousField)> {
        vec![
            ("e_plus", &self.e_plus),
            ("e_minus", &self.e_minus),
            ("V", &self.v),
            ("M_tilde", &self.m_tilde),
            ("E_tt", &self.e_tt),
            ("E_rr", &self.e_rr),
            ("E_tr", &self.e_tr),
        ]
    }

    /// Mass scale `∫ψ²` carried by `M̃`.
    pub fn mass_scale(&self) -> f64 {
        self.bump.mass
    }
}

fn arc<P: Profile + 'static>(p: P) -> Arc<dyn Profile> {
    Arc::new(p)
}

fn power_law(alpha: f64) -> Arc<dyn Profile> {
    arc(FnProfile(move |x: PJet| x.add_scalar(1.0).powf(alpha)))
}

/// Largest relative gap of orders 0..=2 between adjacent pieces at each
/// break, measured against `max(|jet|, scale)`.
fn seam_gap(pw: &Piecewise, scale: f64) -> (f64, f64) {
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for (i, &b) in pw.breaks.iter().enumerate() {
        let l = pw.pieces[i].jet(b);
        let r = pw.pieces[i + 1].jet(b);
        for k in 0..3 {
            let s = l.deriv(k).abs().max(r.deriv(k).abs()).max(scale);
            let g = (l.deriv(k) - r.deriv(k)).abs() / s;
            if g > worst || g.is_nan() {
                worst = g;
                at = b;
            }
        }
    }
    (worst, at)
}

/// Runs the whole construction for `params`.
pub fn build_bundle(params: &Params) -> Result<FieldBundle> {
    let bump = Arc::new(BumpCurve::new(params)?);
    let (eplus_left, eplus_report) = build_eplus_left(params)?;
    let (v_left, info) = compute_v_left(&eplus_left, params)?;
    let eplus_right = extend_eplus_right(&v_left, params)?;
    assemble(params, bump, eplus_left, eplus_report, v_left, Some(info), eplus_right)
}

/// Rebuilds a bundle from the sampled node data of `V` on the left band and
/// `e₊` on the right band; everything else is closed form or recomputed.
pub fn bundle_from_samples(params: &Params, v_left: &[f64], eplus_right: &[f64]) -> Result<FieldBundle> {
    let bump = Arc::new(BumpCurve::new(params)?);
    let (eplus_left, eplus_report) = build_eplus_left(params)?;
    let expect = grid::left_band_nodes(params).len();
    for (name, vals) in [("V", v_left), ("e_plus", eplus_right)] {
        if vals.len() != expect {
            return Err(ForgeError::Assembly {
                field: name.into(),
                detail: format!("{} band samples, expected {expect}", vals.len()),
            });
        }
    }
    let v = SampledProfile::new(v_panels(&eplus_left, params, v_left));
    let e = SampledProfile::new(eplus_panels(&v, params, eplus_right));
    assemble(params, bump, eplus_left, eplus_report, v, None, e)
}

fn assemble(
    params: &Params,
    bump: Arc<BumpCurve>,
    eplus_left: EplusLeft,
    eplus_report: EplusLeftReport,
    v_left: SampledProfile,
    potential: Option<PotentialInfo>,
    eplus_right: SampledProfile,
) -> Result<FieldBundle> {
    let alpha = params.alpha();
    let q = params.deg_m_tilde();
    let d = params.delta;
    let rc = rho_c();
    let v_left = Arc::new(v_left);
    let eplus_right = Arc::new(eplus_right);

    let eplus_pieces = Arc::new(Piecewise::new(
        vec![-1.0 + d, 1.0 - d],
        vec![arc(eplus_left), power_law(alpha), eplus_right.clone()],
    ));
    let e_plus = HomogeneousField::new(alpha, Parity::Even, eplus_pieces.clone());
    // e₊ alone has no parity; only e₊ + e₋ is even. The tag is unused for it.
    let e_minus = reflect(&e_plus, Parity::Even);

    let v_left_dyn: Arc<dyn Profile> = v_left.clone();
    let v_pieces = Arc::new(Piecewise::new(
        vec![-1.0 + d, 1.0 - d],
        vec![
            v_left_dyn.clone(),
            arc(Constant(0.0)),
            arc(Mirror {
                inner: v_left_dyn,
                sign: 1.0,
            }),
        ],
    ));
    let v = HomogeneousField::new(alpha, Parity::Even, v_pieces.clone());

    let e_tr = HomogeneousField {
        parity: Parity::Odd,
        ..HomogeneousField::combo(&[(0.5, &e_plus), (-0.5, &e_minus)])
    };

    let mass = bump.mass;
    let m_ext = build_exterior_m(params, mass);
    let (ett_ext, err_ext) = build_exterior_energies(&m_ext, &v, &e_plus, &e_minus, params);
    let curve = Arc::new(InteriorCurve::new(bump.clone(), params.n_quad));
    let closed = |component| {
        arc(ClosedInterior {
            component,
            mass,
            q,
            alpha,
        })
    };
    let curve_field = |component| {
        arc(CurveField {
            curve: curve.clone(),
            component,
            lifted: false,
        })
    };
    let stitched = |ext: Arc<dyn Profile>, c: Component| {
        Arc::new(Piecewise::new(
            vec![-0.5, -rc, rc, 0.5],
            vec![ext.clone(), closed(c), curve_field(c), closed(c), ext],
        ))
    };
    let m_pieces = stitched(m_ext.profile.clone(), Component::Mass);
    let ett_pieces = stitched(ett_ext.profile.clone(), Component::Ett);
    let err_pieces = stitched(err_ext.profile.clone(), Component::Err);
    let m_tilde = HomogeneousField::new(q, Parity::Even, m_pieces.clone());
    let e_tt = HomogeneousField::new(alpha, Parity::Even, ett_pieces.clone());
    let e_rr = HomogeneousField::new(alpha, Parity::Even, err_pieces.clone());

    let mut seam_gaps = Vec::new();
    for (name, pw, scale) in [
        ("M_tilde", &m_pieces, mass),
        ("E_tt", &ett_pieces, 1.0),
        ("E_rr", &err_pieces, 1.0),
        ("e_plus", &eplus_pieces, 1.0),
        ("V", &v_pieces, 1.0),
    ] {
        let (gap, at) = seam_gap(pw, scale);
        if !(gap <= params.tol.matching) {
            return Err(ForgeError::Assembly {
                field: name.into(),
                detail: format!("seam mismatch {gap:.3e} at rho={at}"),
            });
        }
        seam_gaps.push((name.to_string(), gap));
    }
    seam_gaps.push(("curve_forms".into(), curve.form_gap()));

    Ok(FieldBundle {
        params: *params,
        bump,
        curve,
        e_plus,
        e_minus,
        v,
        m_tilde,
        e_tt,
        e_rr,
        e_tr,
        parts: BundleParts {
            eplus_left,
            eplus_report,
            v_left,
            potential,
            eplus_right,
            eplus_pieces,
            v_pieces,
            m_pieces,
            ett_pieces,
            err_pieces,
            seam_gaps,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle() -> FieldBundle {
        build_bundle(&Params::new(7.0, 0.05, 10.0, 256).unwrap()).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let b = bundle();
        assert!((b.e_plus.eval_at(1.0, -0.5).unwrap() - 1.587401).abs() < 1e-6);
        assert!((b.e_minus.eval_at(2.0, 0.5).unwrap() - 0.763143).abs() < 1e-6);
        assert!((b.e_tr.eval_at(2.0, 0.5).unwrap() + 0.1101295).abs() < 1e-6);
        assert_eq!(b.v.eval_at(1.0, -0.5).unwrap(), 0.0);
        assert_eq!(b.v.profile_value(0.97), b.v.profile_value(-0.97));
    }

    #[test]
    fn null_sum_and_parities() {
        let b = bundle();
        for &rho in &[-0.99, -0.7, -0.3, -0.004, 0.0, 0.002, 0.45, 0.8, 0.98] {
            let s = b.e_tt.profile_value(rho) + b.e_rr.profile_value(rho);
            let e = b.e_plus.profile_value(rho) + b.e_minus.profile_value(rho);
            assert!((s - e).abs() < 1e-9 * e.abs().max(1.0), "rho={rho}");
            assert_eq!(b.m_tilde.profile_value(rho), b.m_tilde.profile_value(-rho));
            assert_eq!(b.e_tr.profile_value(rho), -b.e_tr.profile_value(-rho));
        }
    }

    #[test]
    fn rebuild_from_samples_matches() {
        let b = bundle();
        let v: Vec<f64> = b.parts.v_left.node_values().into_iter().map(|(_, v)| v).collect();
        let e: Vec<f64> = b.parts.eplus_right.node_values().into_iter().map(|(_, v)| v).collect();
        let c = bundle_from_samples(&b.params, &v, &e).unwrap();
        for &rho in &[-0.99, -0.97, 0.96, 0.999] {
            assert_eq!(b.v.profile_value(rho), c.v.profile_value(rho));
            assert_eq!(b.e_plus.profile_value(rho), c.e_plus.profile_value(rho));
        }
    }

    fn shared() -> &'static FieldBundle {
        static B: std::sync::OnceLock<FieldBundle> = std::sync::OnceLock::new();
        B.get_or_init(|| build_bundle(&Params::new(7.0, 0.05, 2.0, 256).unwrap()).unwrap())
    }

    proptest::proptest! {
        // The slack covers the one-ulp change of r/t between the two points.
        #[test]
        fn homogeneous_up_to_argument_rounding(t in 0.1f64..10.0, rho in -1.0f64..=1.0, lam in 0.1f64..10.0) {
            for (name, f) in shared().named_fields() {
                let a = f.eval_at(lam * t, lam * rho * t).unwrap();
                let scale = lam.powf(f.degree) * t.powf(f.degree);
                let b = lam.powf(f.degree) * f.eval_at(t, rho * t).unwrap();
                let slack = 4.0 * f64::EPSILON * scale * f.jet(rho).deriv(1).abs();
                proptest::prop_assert!((a - b).abs() <= 1e-12 * b.abs() + slack + 1e-30, "{} {} {}", name, a, b);
            }
        }

        #[test]
        fn parities_hold(rho in 0.0f64..=1.0) {
            for (name, f) in shared().named_fields() {
                if name == "e_plus" || name == "e_minus" {
                    continue;
                }
                proptest::prop_assert_eq!(f.profile_value(-rho), f.parity.sign() * f.profile_value(rho), "{}", name);
            }
        }
    }
}
