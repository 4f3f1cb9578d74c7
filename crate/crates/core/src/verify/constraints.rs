//! Transport, positivity and relaxation checks.

use super::checks::{parity_of, ORDER_WINDOW};
use super::fields::TildeFields;
use super::lift::{lift_fields, perturbation_only, LiftedBundle};
use super::linalg::{scaled_min_eig2, scaled_min_eig3};
use super::report::{CheckResult, Worst};
use super::sweep::{band_probes, eval_all, lower_bound_sweep, parity_probes, tolerance_sweep, Sweep};
use crate::cone::ConePoint;
use crate::construct::interior::InteriorCurve;
use crate::construct::FieldBundle;
use crate::params::Tolerances;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Tolerance of the finite-difference (not-0)/(not-1) samples.
pub const NOT_FD_TOL: f64 = 1e-4;

/// Sample points of the raw (not) forms: `ρ_k = (k − 12)·0.08` and `ρ = 0.97`.
pub fn not_points() -> Vec<ConePoint> {
    let mut pts: Vec<_> = (0..25)
        .map(|k| ConePoint {
            t: 1.0,
            r: (k as f64 - 12.0) * 0.08,
        })
        .collect();
    pts.push(ConePoint { t: 1.0, r: 0.97 });
    pts
}

/// The equality-type checks, evaluated the same way for the bundle, the
/// oracle and every injected defect. Parities are listed per field.
pub fn equality_checks(
    f: &TildeFields,
    curve: Option<&Arc<InteriorCurve>>,
    sweep: &Sweep,
    delta: f64,
    tol: &Tolerances,
) -> Vec<(String, CheckResult)> {
    let lifted = lift_fields(f, curve);
    let band = |r: f64| r.abs() >= 1.0 - delta;
    let inner = |r: f64| r.abs() <= 1.0 - delta;
    let mut band_pts = sweep.points(band);
    band_pts.extend(band_probes(delta, 64).into_iter().map(|r| ConePoint { t: 1.0, r }));
    let all = sweep.points(|_| true);
    let inner_pts = sweep.points(inner);
    let not_pts = not_points();
    let not_vals = eval_all(&not_pts, |pt| lifted.not_residuals(pt));
    let not_check = |which: usize, what: &str| {
        let mut w = Worst::default();
        let mut max_rel = 0.0f64;
        for (pt, (r0, r1, s)) in not_pts.iter().zip(&not_vals) {
            let r = if which == 0 { *r0 } else { *r1 };
            w.push(r - NOT_FD_TOL * s, pt.t, pt.r);
            max_rel = max_rel.max(r / s);
        }
        CheckResult::new(
            -w.value >= 0.0,
            -w.value,
            w.t,
            w.r,
            format!(
                "{what}: max relative {max_rel:.3e}, tol {NOT_FD_TOL:.0e}, {} points",
                not_pts.len()
            ),
        )
    };
    let mut out = vec![
        (
            "transport".to_string(),
            tolerance_sweep(&band_pts, tol.residual, "storp on the bands", |pt| (f.storp(pt), 1.0)),
        ),
        (
            "transport_interior".to_string(),
            tolerance_sweep(&inner_pts, tol.residual, "(dt-dr)e+ on |r| <= (1-delta)t", |pt| {
                (f.eplus_transport(pt), 1.0)
            }),
        ),
        (
            "notnew0".to_string(),
            tolerance_sweep(&all, tol.residual, "notnew0", |pt| (f.notnew0(pt), 1.0)),
        ),
        (
            "notnew1".to_string(),
            tolerance_sweep(&all, tol.residual, "notnew1", |pt| (f.notnew1(pt), 1.0)),
        ),
        ("not0_fd".to_string(), not_check(0, "not0")),
        ("not1_fd".to_string(), not_check(1, "not1")),
        (
            "ttrr".to_string(),
            tolerance_sweep(&all, tol.matching, "ttrr", |pt| f.ttrr(pt)),
        ),
        (
            "rrtt".to_string(),
            tolerance_sweep(&all, tol.matching, "rrtt", |pt| f.rrtt(pt)),
        ),
        (
            "vdef".to_string(),
            tolerance_sweep(&all, tol.residual, "vdef", |pt| f.vdef(pt)),
        ),
        (
            "eplus_closed_form".to_string(),
            tolerance_sweep(&inner_pts, tol.matching, "e+/e- against the power laws", |pt| {
                f.eplus_closed_form(pt)
            }),
        ),
    ];
    let mut grid = sweep.grid.clone();
    grid.extend(parity_probes());
    for (name, field) in f.parity_fields() {
        out.push((format!("parity:{name}"), parity_of(&field, &grid, tol.residual)));
    }
    out
}

pub fn la4_checks(f: &TildeFields, sweep: &Sweep, tol: &Tolerances) -> (CheckResult, CheckResult) {
    let pts = sweep.points(|_| true);
    let la4 = lower_bound_sweep(&pts, tol.psd_margin, true, "scaled min eigenvalue of la4", |pt| {
        scaled_min_eig3(&f.la4(pt))
    });
    let verdicts = eval_all(&pts, |pt| {
        (scaled_min_eig3(&f.la4(pt)) > 0.0, scaled_min_eig3(&f.la4_null(pt)))
    });
    let mut bad = 0usize;
    let mut at = (1.0, 0.0);
    let mut null_min = f64::INFINITY;
    for (pt, (a, e)) in pts.iter().zip(&verdicts) {
        null_min = null_min.min(*e);
        if *a != (*e > 0.0) {
            if bad == 0 {
                at = (pt.t, pt.r);
            }
            bad += 1;
        }
    }
    let cong = CheckResult::new(
        bad == 0,
        -(bad as f64),
        at.0,
        at.1,
        format!(
            "{bad} disagreements over {} points; null-frame min scaled eigenvalue {null_min:.4e}",
            pts.len()
        ),
    );
    (la4, cong)
}

/// Least-squares coefficient of `r²` in `c₂r² + c₄r⁴ + c₆r⁶` through samples
/// of an even function vanishing at the axis.
pub fn quadratic_fit(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let rs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let a = DMatrix::from_fn(n, 3, |i, j| (rs[i] / hi).powi(2 * (j as i32 + 1)));
    let y = DVector::from_iterator(n, rs.iter().map(|&r| g(r)));
    let c = a.svd(true, true).solve(&y, 1e-14).expect("full-rank fit");
    c[0] / (hi * hi)
}

/// `∂_rrM̃(1,0)` and `∂_rrẼ_tt(1,0)` three ways, and (mur).
pub fn mur_check(b: &FieldBundle) -> CheckResult {
    let p = b.params.p;
    let inner = |i, j| b.bump.curve_inner(i, j, 1.0, 1.0).expect("valid orders");
    let jm = b.m_tilde.jet(0.0).deriv(2);
    let je = b.e_tt.jet(0.0).deriv(2);
    let am = 8.0 * inner(1, 1);
    let ae = 8.0 * inner(2, 2);
    let (lo, hi) = ORDER_WINDOW;
    let fm = 2.0 * quadratic_fit(|r| b.m_tilde.profile_value(r), lo, hi, 24);
    let fe = 2.0 * quadratic_fit(|r| b.e_tt.profile_value(r), lo, hi, 24);
    let agree = [(jm, am), (jm, fm), (je, ae), (je, fe)]
        .iter()
        .map(|(a, c)| (a - c).abs() / a.abs().max(c.abs()))
        .fold(0.0, f64::max);
    let lower = (2.0 / (p - 1.0)).powi(2) * jm;
    let margin = (je - lower).min(lower).min(1e-5 - agree).min(1e-6 - (jm - 4.0).abs());
    CheckResult::new(
        je > lower && lower > 0.0 && agree <= 1e-5 && (jm - 4.0).abs() <= 1e-6,
        margin,
        1.0,
        0.0,
        format!(
            "d_rr M~(1,0): jets {jm:.10}, 8||f'||^2 {am:.10}, fit {fm:.10}; d_rr E_tt(1,0): jets {je:.6}, 8||f''||^2 {ae:.6}, fit {fe:.6}; bound {lower:.6}; route spread {agree:.2e}"
        ),
    )
}

/// Points of the lifted sweeps: the `t = 1` grid and random scales, plus
/// the axis at each scale.
fn lifted_points(sweep: &Sweep) -> (Vec<ConePoint>, Vec<f64>) {
    let pts = sweep.points(|_| true);
    let mut axis = vec![1.0];
    axis.extend(sweep.scales.iter().copied());
    (pts, axis)
}

pub struct Main5 {
    pub newerpos_weak: CheckResult,
    pub la2_weak: CheckResult,
    pub la3_weak: CheckResult,
}

pub fn main5_checks(l: &LiftedBundle, sweep: &Sweep, tol: &Tolerances) -> Main5 {
    let (pts, axis) = lifted_points(sweep);
    let mut all = pts.clone();
    all.extend(axis.iter().map(|&t| ConePoint { t, r: 0.0 }));
    let newerpos_weak = tolerance_sweep(&all, tol.residual, "newerpos deficit below zero", |pt| {
        let (lhs, scale) = l.newerpos(pt);
        ((-lhs).max(0.0), scale.max(pt.t.powf(l.e_tt.degree)))
    });
    let la2_weak = lower_bound_sweep(&pts, -tol.residual, false, "scaled min eigenvalue of la2", |pt| {
        scaled_min_eig3(&l.la2(pt))
    });
    let axis_pts: Vec<ConePoint> = axis.iter().map(|&t| ConePoint { t, r: 0.0 }).collect();
    let la3_weak = lower_bound_sweep(&axis_pts, -tol.residual, false, "scaled min eigenvalue of la3", |pt| {
        scaled_min_eig2(&l.la3(pt.t))
    });
    Main5 {
        newerpos_weak,
        la2_weak,
        la3_weak,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsChoice {
    Fixed(f64),
    /// A tenth of the largest admissible value.
    Auto,
}

pub struct EpsOutcome {
    pub eps: f64,
    pub eps_max: f64,
    pub perturbed: LiftedBundle,
    pub checks: Vec<(&'static str, CheckResult)>,
}

/// Largest ε keeping (la-2) and (la-3) strictly positive at every point,
/// by bisection on the affine family `A₀ + εA₁`.
pub fn max_admissible_eps(l: &LiftedBundle, sweep: &Sweep) -> f64 {
    let (pts, axis) = lifted_points(sweep);
    let d = perturbation_only(l.p, l.m.degree, l.e_tt.degree, 1.0);
    let base2 = eval_all(&pts, |pt| (l.la2(pt), d.la2(pt)));
    let base3: Vec<_> = axis.iter().map(|&t| (l.la3(t), d.la3(t))).collect();
    let ok = |eps: f64| {
        base2.iter().all(|(a, b)| {
            let mut m = *a;
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += eps * b[i][j];
                }
            }
            scaled_min_eig3(&m) > 0.0
        }) && base3.iter().all(|(a, b)| {
            let mut m = *a;
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += eps * b[i][j];
                }
            }
            scaled_min_eig2(&m) > 0.0
        })
    };
    let mut hi = 1e-14;
    if !ok(hi) {
        return 0.0;
    }
    while ok(hi) {
        hi *= 2.0;
        if hi > 1e3 {
            return hi;
        }
    }
    let mut lo = 0.5 * hi;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn eps_checks(l: &LiftedBundle, sweep: &Sweep, choice: EpsChoice, tol: &Tolerances) -> EpsOutcome {
    let eps_max = max_admissible_eps(l, sweep);
    let eps = match choice {
        EpsChoice::Fixed(e) => e,
        EpsChoice::Auto => 0.1 * eps_max,
    };
    let pe = l.eps_perturb(eps);
    let (pts, axis) = lifted_points(sweep);
    let axis_pts: Vec<ConePoint> = axis.iter().map(|&t| ConePoint { t, r: 0.0 }).collect();
    let mut all = pts.clone();
    all.extend(axis_pts.iter().copied());
    let mut checks = Vec::new();
    checks.push((
        "eps_admissible",
        CheckResult::new(
            eps > 0.0 && eps <= eps_max,
            eps_max - eps,
            1.0,
            0.0,
            format!("eps {eps:.6e}; largest admissible eps {eps_max:.6e}"),
        ),
    ));
    checks.push((
        "eps_la2",
        lower_bound_sweep(
            &pts,
            tol.psd_margin,
            true,
            "scaled min eigenvalue of relaxed la2",
            |pt| scaled_min_eig3(&pe.la2(pt)),
        ),
    ));
    checks.push((
        "eps_la3",
        lower_bound_sweep(
            &axis_pts,
            tol.psd_margin,
            true,
            "scaled min eigenvalue of relaxed la3",
            |pt| scaled_min_eig2(&pe.la3(pt.t)),
        ),
    ));
    checks.push((
        "eps_newerpos",
        lower_bound_sweep(&all, 0.0, true, "relaxed newerpos left side", |pt| pe.newerpos(pt).0),
    ));
    checks.push((
        "eps_eww",
        lower_bound_sweep(&all, 0.0, true, "relaxed E_ww", |pt| pe.e_ww.eval(pt)),
    ));
    let delta = perturbation_only(l.p, l.m.degree, l.e_tt.degree, eps);
    let k = 0.5 * (l.p + 1.0);
    checks.push((
        "eps_margin_increase",
        tolerance_sweep(&all, 1e-8, "newerpos increase against (p+1)/2 eps t^gamma", |pt| {
            let want = k * eps * pt.t.powf(l.e_tt.degree);
            ((delta.newerpos(pt).0 - want).abs(), want.abs())
        }),
    ));
    let np = not_points();
    let full = eval_all(&np, |pt| pe.not_residuals(pt));
    let lin = eval_all(&np, |pt| delta.not_residuals(pt));
    let mut w = Worst::default();
    let mut wl = 0.0f64;
    for (pt, ((a0, a1, s), (b0, b1, sb))) in np.iter().zip(full.iter().zip(&lin)) {
        w.push(a0.max(*a1) - NOT_FD_TOL * s, pt.t, pt.r);
        wl = wl.max(b0.max(*b1) / sb.max(f64::MIN_POSITIVE));
    }
    let margin = (-w.value).min(1e-8 - wl);
    checks.push((
        "eps_not_preserved",
        CheckResult::new(
            margin >= 0.0,
            margin,
            w.t,
            w.r,
            format!(
                "relaxed (not) residual margin {:.3e}; corrections alone: relative {wl:.2e}",
                -w.value
            ),
        ),
    ));
    EpsOutcome {
        eps,
        eps_max,
        perturbed: pe,
        checks,
    }
}
