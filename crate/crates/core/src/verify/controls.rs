//! Injected-defect controls: each one breaks a single identity and must
//! flip exactly the checks that identity feeds.

use super::constraints::equality_checks;
use super::fields::TildeFields;
use super::report::CheckResult;
use super::sweep::{parity_probes, Sweep};
use crate::cone::{reflect, Bumped, Corrupted, HomogeneousField, Parity, Profile};
use crate::construct::interior::InteriorCurve;
use crate::params::Tolerances;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub const BUMP_AMPLITUDE: f64 = 1e-3;
pub const BUMP_HALF_WIDTH: f64 = 0.05;

fn bumped(f: &HomogeneousField, center: f64, mirror_sign: f64, amplitude: f64) -> HomogeneousField {
    let inner: Arc<dyn Profile> = f.profile.clone();
    f.with_profile(Arc::new(Bumped {
        inner,
        center,
        half_width: BUMP_HALF_WIDTH,
        amplitude,
        mirror_sign,
    }))
}

pub struct Control {
    pub name: &'static str,
    pub fields: TildeFields,
    pub expected: BTreeSet<String>,
    /// Support of the defect in `ρ`, when the worst point must fall in it.
    pub support: Option<(String, f64, f64)>,
}

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn controls(f: &TildeFields) -> Vec<Control> {
    let a = BUMP_AMPLITUDE;
    let mut out = Vec::new();

    // e₊ off its transport law on the interior, with the energies kept
    // consistent so the null-sum identities survive.
    let c = -0.7;
    let mut g = f.clone();
    g.e_plus = bumped(&f.e_plus, c, 0.0, a);
    g.e_minus = reflect(&g.e_plus, Parity::Even);
    g.e_tr = HomogeneousField {
        parity: Parity::Odd,
        ..HomogeneousField::combo(&[(0.5, &g.e_plus), (-0.5, &g.e_minus)])
    };
    g.e_tt = bumped(&f.e_tt, c, 1.0, 0.5 * a);
    g.e_rr = bumped(&f.e_rr, c, 1.0, 0.5 * a);
    out.push(Control {
        name: "eplus_transport",
        fields: g,
        expected: set(&[
            "transport_interior",
            "notnew0",
            "notnew1",
            "not0_fd",
            "not1_fd",
            "eplus_closed_form",
        ]),
        support: Some(("transport_interior".into(), c - BUMP_HALF_WIDTH, c + BUMP_HALF_WIDTH)),
    });

    let mut g = f.clone();
    g.e_tt = bumped(&f.e_tt, 0.41, 1.0, a);
    g.e_rr = bumped(&f.e_rr, 0.41, 1.0, a);
    out.push(Control {
        name: "null_sum",
        fields: g,
        expected: set(&["ttrr", "notnew0", "notnew1", "not0_fd", "not1_fd"]),
        support: None,
    });

    let mut g = f.clone();
    g.e_tt = bumped(&f.e_tt, 0.345, 1.0, a);
    g.e_rr = bumped(&f.e_rr, 0.345, 1.0, -a);
    out.push(Control {
        name: "potential_definition",
        fields: g,
        expected: set(&["vdef", "not0_fd", "not1_fd"]),
        support: None,
    });

    let mut g = f.clone();
    g.e_tr = bumped(&f.e_tr, 0.25, -1.0, a);
    out.push(Control {
        name: "cross_energy",
        fields: g,
        expected: set(&["rrtt", "notnew0", "notnew1", "not0_fd", "not1_fd"]),
        support: None,
    });

    let mut g = f.clone();
    let inner: Arc<dyn Profile> = f.m_tilde.profile.clone();
    g.m_tilde = f.m_tilde.with_profile(Arc::new(Corrupted {
        inner,
        at: parity_probes()[0],
    }));
    out.push(Control {
        name: "parity",
        fields: g,
        expected: set(&["parity:M_tilde"]),
        support: None,
    });
    out
}

/// Runs every control and compares the flipped set with its target.
pub fn control_check(
    f: &TildeFields,
    curve: Option<&Arc<InteriorCurve>>,
    sweep: &Sweep,
    delta: f64,
    tol: &Tolerances,
) -> (CheckResult, BTreeMap<&'static str, BTreeSet<String>>) {
    let base: BTreeMap<String, CheckResult> = equality_checks(f, curve, sweep, delta, tol).into_iter().collect();
    let mut details = Vec::new();
    let mut misses = 0usize;
    let mut flips = BTreeMap::new();
    for c in controls(f) {
        let got: BTreeMap<String, CheckResult> = equality_checks(&c.fields, curve, sweep, delta, tol)
            .into_iter()
            .collect();
        let flipped: BTreeSet<String> = got
            .iter()
            .filter(|(k, v)| base[*k].pass && !v.pass)
            .map(|(k, _)| k.clone())
            .collect();
        let mut ok = flipped == c.expected;
        if let Some((key, lo, hi)) = &c.support {
            let r = &got[key];
            let rho = r.worst_r / r.worst_t;
            let inside = rho >= *lo && rho <= *hi;
            ok &= inside;
            details.push(format!("{}: worst of {key} at rho={rho:.4}", c.name));
        }
        if !ok {
            misses += 1;
            let unflipped: Vec<_> = c.expected.iter().filter(|k| base[*k].pass == got[*k].pass).collect();
            details.push(format!(
                "{} flipped {:?}, expected {:?}; not flipped {:?}",
                c.name, flipped, c.expected, unflipped
            ));
        } else {
            details.push(format!("{} flipped {:?}", c.name, flipped));
        }
        flips.insert(c.name, flipped);
    }
    (
        CheckResult::new(misses == 0, -(misses as f64), 1.0, 0.0, details.join("; ")),
        flips,
    )
}
