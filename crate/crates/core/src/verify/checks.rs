//! Checks on the window curve, the field representation and the construction.

use super::fd::{central, ridders};
use super::fields::TildeFields;
use super::report::{CheckResult, Report, Worst};
use super::sweep::{band_probes, golden, lower_bound_sweep, parity_probes, tolerance_sweep, Sweep};
use crate::bump::{BumpCurve, WIDTH};
use crate::cone::{parity_check, vanishing_order, ConePoint, HomogeneousField, VanishingOrder};
use crate::construct::eplus::build_eplus_left;
use crate::construct::interior::{rho_c, InteriorCurve};
use crate::construct::potential::{compute_v_left, eplus_right_doubling_change, vpos_margins};
use crate::construct::FieldBundle;
use crate::params::Params;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Window on which vanishing orders are fitted.
pub const ORDER_WINDOW: (f64, f64) = (1e-5, 1e-4);

fn rel_gap(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub fn bump_checks(bump: &BumpCurve, params: &Params, seed: u64, out: &mut Report) {
    let inner = |i, j, s, t| bump.curve_inner(i, j, s, t).expect("valid orders");
    let origin = (1.0, 0.0);

    let outside = [-1e-3, -1e-12, 0.0, WIDTH, WIDTH + 1e-12, WIDTH + 1e-3];
    let stray = outside
        .iter()
        .map(|&x| bump.psi::<3>(x).value().abs())
        .fold(0.0, f64::max);
    let zeros = golden(997)
        .iter()
        .filter(|f| bump.psi::<1>(WIDTH * **f).value() == 0.0)
        .count();
    out.insert(
        "bump_support",
        CheckResult::new(
            stray == 0.0 && zeros == 0,
            -stray - zeros as f64,
            1.0,
            0.0,
            format!("|psi| outside (0, W): {stray:e}; interior zeros among 997 probes: {zeros}"),
        ),
    );

    let (m0, m1) = bump.norms();
    out.insert(
        "fail_normalization",
        CheckResult::at_most(
            (m0 - params.delta).abs(),
            1e-10,
            origin,
            format!("int psi^2 = {m0:.6e}, target delta = {}", params.delta),
        ),
    );
    out.insert(
        "dirichlet_normalization",
        CheckResult::at_most(
            (m1 - 0.5).abs(),
            1e-10,
            origin,
            format!("int psi'^2 = {m1:.12}, target 0.5"),
        ),
    );

    let n11 = inner(1, 1, 1.0, 1.0);
    out.insert(
        "hypo",
        CheckResult::at_most((n11 - 0.5).abs(), 1e-10, origin, format!("||f'(1)||^2 = {n11:.15}")),
    );

    let mut w = Worst::default();
    for i in 0..=40 {
        let t = (0.25f64.ln() + 16f64.ln() * i as f64 / 40.0).exp();
        let v = inner(1, 1, t, t) * t.powf(4.0 / (params.p - 1.0));
        w.push((v - 0.5).abs(), t, 0.0);
    }
    out.insert(
        "stew",
        CheckResult::at_most(w.value, 1e-9, w.at(), "||f'(t)||^2 t^(4/(p-1)) - 1/2 on [1/4, 4]"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfa57);
    let mut w = Worst::default();
    for _ in 0..50 {
        let s: f64 = rng.gen_range(0.5..2.0);
        let t = s * rng.gen_range(-0.008f64..0.008).exp();
        let lam: f64 = rng.gen_range(0.5..2.0);
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let a = inner(i, j, lam * s, lam * t);
            let b = lam.powf(2.0 * bump.q_f - (i + j) as f64) * inner(i, j, s, t);
            let norm = (inner(i, i, lam * s, lam * s) * inner(j, j, lam * t, lam * t)).sqrt();
            w.push((a - b).abs() / norm, lam * s, lam * t);
        }
    }
    out.insert(
        "fast_scaling",
        CheckResult::at_most(w.value, 1e-9, w.at(), "scaling of <f^(i)(ls), f^(j)(lt)>, 50 triples"),
    );

    let mut stray = 0.0f64;
    let mut at = origin;
    for k in 0..50 {
        let s: f64 = rng.gen_range(0.5..2.0);
        let ratio = if k == 0 {
            1.1
        } else {
            rng.gen_range(0.01f64..0.2).exp() * (1.0 + 1e-12)
        };
        for i in 0..3 {
            for j in 0..3 {
                let v = inner(i, j, s, s * ratio).abs().max(inner(i, j, s * ratio, s).abs());
                if v > stray {
                    stray = v;
                    at = (s, s * ratio);
                }
            }
        }
    }
    out.insert(
        "long_range",
        CheckResult::new(
            stray == 0.0,
            -stray,
            at.0,
            at.1,
            format!("largest inner product past e^W: {stray:e}"),
        ),
    );

    let mut w = Worst::default();
    let grid: Vec<f64> = (0..20).map(|i| 0.8 + 0.45 * i as f64 / 19.0).collect();
    for &s in &grid {
        for &t in &grid {
            if s == t {
                continue;
            }
            let g = bump.gram4(s, t);
            let diag: f64 = (0..4).map(|i| g[(i, i)]).product();
            w.push(-g.determinant() / diag, s, t);
        }
    }
    out.insert(
        "linind",
        CheckResult::above(
            -w.value,
            0.0,
            w.at(),
            "normalized Gram determinant, 20x20 grid on [0.8, 1.25]^2",
        ),
    );

    let (m_norm, m_cross) = bump.second_derivative_margins(params.p);
    out.insert(
        "mur2",
        CheckResult::new(
            m_norm > 0.0 && m_cross.abs() <= 1e-8,
            m_norm.min(1e-8 - m_cross.abs()),
            1.0,
            0.0,
            format!("||f''(1)|| - sqrt2/(p-1) = {m_norm:.6e}, <f'(1),f''(1)> + 1/(p-1) = {m_cross:.3e}"),
        ),
    );
}

pub fn cone_checks(b: &FieldBundle, f: &TildeFields, sweep: &Sweep, seed: u64, out: &mut Report) {
    let tol = b.params.tol;
    let mut grid = sweep.grid.clone();
    grid.extend(parity_probes());
    out.insert("parity", parity_results(f, &grid, tol.residual));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4040);
    let mut parts = Vec::new();
    for (name, field) in b.named_fields() {
        let mut w = Worst::default();
        for _ in 0..100 {
            let t: f64 = rng.gen_range(0.25..4.0);
            let r = t * rng.gen_range(-1.0..1.0);
            let lam: f64 = rng.gen_range(0.25..4.0);
            let a = field.eval(ConePoint { t: lam * t, r: lam * r });
            let e = lam.powf(field.degree) * field.eval(ConePoint { t, r });
            w.push((a - e).abs() - (1e-12 * e.abs() + 1e-30), t, r);
        }
        parts.push(CheckResult::at_most(w.value, 0.0, w.at(), name));
    }
    let mut h = CheckResult::all(parts);
    h.detail = format!("100 random (t, r, lambda) per field: {}", h.detail);
    out.insert("homogeneity", h);

    out.insert("derivative_consistency", derivative_consistency(b, &sweep.grid));
    out.insert("vanishing_orders", vanishing_orders(f));
}

/// Parity defect of every parity-carrying field.
pub fn parity_results(f: &TildeFields, grid: &[f64], tol: f64) -> CheckResult {
    let parts = f
        .parity_fields()
        .into_iter()
        .map(|(name, field)| {
            let (d, at) = parity_check(&field, grid);
            CheckResult::at_most(d, tol, (1.0, at), format!("{name} {d:.2e}"))
        })
        .collect();
    CheckResult::all(parts)
}

pub fn parity_of(field: &HomogeneousField, grid: &[f64], tol: f64) -> CheckResult {
    let (d, at) = parity_check(field, grid);
    CheckResult::at_most(d, tol, (1.0, at), format!("{d:.2e}"))
}

fn derivative_consistency(b: &FieldBundle, grid: &[f64]) -> CheckResult {
    let tol = b.params.tol.residual;
    let fields = b.named_fields();
    let per_field: Vec<(f64, f64)> = fields
        .iter()
        .map(|(_, field)| {
            let vals = super::sweep::eval_all(
                &grid.iter().map(|&r| ConePoint { t: 1.0, r }).collect::<Vec<_>>(),
                |pt| {
                    let room = 1.0 - pt.r.abs();
                    if room < 1e-9 {
                        return 0.0;
                    }
                    // Ridders from several initial steps; the smallest error estimate wins.
                    let (d, _) = [1e-4, 1e-5, 1e-6]
                        .iter()
                        .map(|&h: &f64| ridders(|x| field.profile_value(x), pt.r, h.min(0.5 * room)))
                        .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
                    let g1 = field.jet(pt.r).deriv(1);
                    (d - g1).abs() / g1.abs().max(1.0)
                },
            );
            let mut w = Worst::default();
            for (r, v) in grid.iter().zip(vals) {
                w.push(v, 1.0, *r);
            }
            (w.value, w.r)
        })
        .collect();
    let (mut worst, mut at, mut which) = (0.0f64, 0.0, "");
    for ((name, _), (v, r)) in fields.iter().zip(&per_field) {
        if *v > worst || v.is_nan() {
            worst = *v;
            at = *r;
            which = name;
        }
    }
    let fd = CheckResult::at_most(
        worst,
        tol,
        (1.0, at),
        format!("stored g' against Ridders differences of g: {worst:.2e} ({which})"),
    );

    let order_probe = |field: &HomogeneousField, t: f64, r: f64, h: f64| -> (f64, f64) {
        let d = field.eval_derivs(ConePoint { t, r });
        let fr = |h: f64| central(|x| field.eval(ConePoint { t, r: x }), r, h) - d.fr;
        let ft = |h: f64| central(|x| field.eval(ConePoint { t: x, r }), t, h) - d.ft;
        ((fr(h) / fr(0.5 * h)).abs().log2(), (ft(h) / ft(0.5 * h)).abs().log2())
    };
    let mut parts = vec![fd];
    let band = -1.0 + 0.75 * b.params.delta;
    for (name, field) in &fields {
        let (r, h) = if *name == "V" {
            (band, 2e-3 * b.params.delta)
        } else {
            (0.3, 1e-2)
        };
        let (or, ot) = order_probe(field, 1.0, r, h);
        let worst = (or - 2.0).abs().max((ot - 2.0).abs());
        parts.push(CheckResult::at_most(
            worst,
            0.2,
            (1.0, r),
            format!("{name} orders {or:.3}/{ot:.3}"),
        ));
    }
    CheckResult::all(parts)
}

fn slope_result(name: &str, o: VanishingOrder, expect: f64, tol: f64) -> CheckResult {
    let s = o.slope();
    CheckResult::at_most(
        (s - expect).abs(),
        tol,
        (1.0, ORDER_WINDOW.0),
        format!("{name} slope {s:.4} (expect {expect})"),
    )
}

/// Name, expected order and the expression as a function of `r`.
pub type AxisExpr<'a> = (&'static str, f64, Box<dyn Fn(f64) -> f64 + 'a>);

/// The four axis expressions: `M̃`, `Ẽ_tt`, `Ẽ_tr − ∂_tM̃/(2r)`,
/// `Ẽ_rr − ∂_rM̃/r + M̃/r²`, at `t = 1`.
pub fn axis_expressions(f: &TildeFields) -> [AxisExpr<'_>; 4] {
    let q = f.m_tilde.degree;
    [
        ("M_tilde", 2.0, Box::new(move |r| f.m_tilde.profile_value(r))),
        ("E_tt", 2.0, Box::new(move |r| f.e_tt.profile_value(r))),
        (
            "E_tr - dtM/2r",
            3.0,
            Box::new(move |r| {
                let j = f.m_tilde.jet(r);
                f.e_tr.profile_value(r) - 0.5 * (q * j.value() - r * j.deriv(1)) / r
            }),
        ),
        (
            "E_rr - drM/r + M/r^2",
            4.0,
            Box::new(move |r| {
                let j = f.m_tilde.jet(r);
                f.e_rr.profile_value(r) - j.deriv(1) / r + j.value() / (r * r)
            }),
        ),
    ]
}

fn vanishing_orders(f: &TildeFields) -> CheckResult {
    let (lo, hi) = ORDER_WINDOW;
    let mut parts = Vec::new();
    let mut wide = Vec::new();
    for (name, expect, g) in axis_expressions(f) {
        parts.push(slope_result(name, vanishing_order(&g, lo, hi, 20), expect, 0.2));
        wide.push(format!("{:.3}", vanishing_order(&g, 1e-4, 1e-2, 20).slope()));
    }
    let mut r = CheckResult::all(parts);
    r.detail = format!(
        "fit on [{lo:e}, {hi:e}]: {}; slopes on [1e-4, 1e-2]: {}",
        r.detail,
        wide.join(", ")
    );
    r
}

/// `V ≥ −10⁻¹²` on the band nodes and probes, and the upper bound with the
/// frozen constant.
pub fn vpos_check(b: &FieldBundle) -> CheckResult {
    let params = &b.params;
    let d = params.delta;
    let (vmin, ratio, at) = vpos_margins(&b.parts.v_left, params);
    let probe_min = band_probes(d, 256)
        .into_iter()
        .map(|r| b.v.profile_value(r))
        .fold(f64::INFINITY, f64::min);
    let vmin = vmin.min(probe_min);
    CheckResult::new(
        vmin >= -1e-12 && ratio <= params.c_vpos,
        (vmin + 1e-12).min(params.c_vpos - ratio),
        1.0,
        at,
        format!(
            "min V {vmin:.3e}, max V/(A delta^((p-5)/(p-1))) {ratio:.4} <= {}",
            params.c_vpos
        ),
    )
}

pub fn construct_checks(b: &FieldBundle, sweep: &Sweep, out: &mut Report) {
    let params = &b.params;
    let tol = params.tol;
    let d = params.delta;
    let inner_cone = |r: f64| r.abs() <= 1.0 - d;

    let rep = &b.parts.eplus_report;
    out.insert(
        "eplus_left",
        CheckResult::new(
            rep.big_integral >= rep.big_required && rep.junction_jump <= tol.matching,
            (rep.big_integral - rep.big_required).min(tol.matching - rep.junction_jump),
            1.0,
            -1.0 + d,
            format!(
                "big {:.6} >= {:.6}; c1 {:.4}, c2 {:.4}, c3 {:.4}; junction gap {:.2e}; fd second derivative gap {:.2e}",
                rep.big_integral, rep.big_required, rep.c1, rep.c2, rep.c3, rep.junction_jump, rep.fd_second_derivative_error
            ),
        ),
    );

    let mut zero_pts = sweep.points(inner_cone);
    zero_pts.extend(golden(200).into_iter().map(|g| ConePoint {
        t: 1.0,
        r: (1.0 - d) * (2.0 * g - 1.0),
    }));
    zero_pts.retain(|pt| pt.rho().abs() <= 1.0 - d);
    let mut w = Worst::default();
    for pt in &zero_pts {
        w.push(b.v.eval(*pt).abs(), pt.t, pt.r);
    }
    out.insert(
        "vzero",
        CheckResult::new(
            w.value == 0.0,
            -w.value,
            w.t,
            w.r,
            format!("max |V| on |r| <= (1-delta)t: {:e}", w.value),
        ),
    );

    out.insert("vpos", vpos_check(b));

    out.insert("quadrature_convergence", quadrature_convergence(b));
    out.insert("v_resolution", v_resolution(b));

    let right = sweep.points(|r| r > 0.0);
    let alpha = params.alpha();
    let mut pos = lower_bound_sweep(&right, 0.0, true, "e+ on the right half", |pt| b.e_plus.eval(pt));
    let (lo, hi) = right.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), pt| {
        let v = b.e_plus.eval(*pt) / pt.t.powf(alpha);
        (lo.min(v), hi.max(v))
    });
    pos.detail = format!("{}; {lo:.4} t^alpha <= e+ <= {hi:.4} t^alpha", pos.detail);
    out.insert("eplus_right_bounds", pos);

    let q = params.deg_m_tilde();
    let mu = b.mass_scale();
    let mass_law = |scale: f64, pt: ConePoint| scale * ((pt.t + pt.r).powf(q) + (pt.t - pt.r).powf(q));
    let mass_check = |lo: f64, hi: f64, what: &str| {
        let pts = sweep.points(|r| r.abs() >= lo && r.abs() <= hi);
        let mut c = tolerance_sweep(&pts, tol.matching, what, |pt| {
            let m = b.m_tilde.eval(pt);
            let e = mass_law(d, pt);
            ((m - e).abs(), e.abs())
        });
        let dev = pts
            .iter()
            .map(|pt| rel_gap(b.m_tilde.eval(*pt), mass_law(mu, *pt), 0.0))
            .fold(0.0, f64::max);
        c.detail = format!(
            "{}; with mass scale int psi^2 = {mu:.6e}: max relative {dev:.2e}",
            c.detail
        );
        c
    };
    out.insert(
        "mtilde_exterior",
        mass_check(0.5, 0.75, "M~ against delta((t+r)^q + (t-r)^q), 1/2 <= |r|/t <= 3/4"),
    );
    out.insert(
        "pythagoras",
        mass_check(0.25, 0.5, "M~ against delta((t+r)^q + (t-r)^q), 1/4 <= |r|/t <= 1/2"),
    );

    let worst = b
        .parts
        .seam_gaps
        .iter()
        .fold(("", 0.0f64), |w, (n, g)| if *g > w.1 { (n, *g) } else { w });
    out.insert(
        "seams",
        CheckResult::at_most(
            worst.1,
            tol.matching,
            (1.0, 0.5),
            format!(
                "orders 0..2 across every break: {}",
                b.parts
                    .seam_gaps
                    .iter()
                    .map(|(n, g)| format!("{n} {g:.2e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        ),
    );
}

fn quadrature_convergence(b: &FieldBundle) -> CheckResult {
    let params = &b.params;
    let limit = params.tol.residual / 100.0;
    let mut parts = Vec::new();
    match build_eplus_left(params).and_then(|(e, _)| compute_v_left(&e, params)) {
        Ok((_, info)) => parts.push(CheckResult::at_most(
            info.doubling_change,
            limit,
            (1.0, -1.0),
            format!("V {:.2e}", info.doubling_change),
        )),
        Err(e) => parts.push(CheckResult::new(false, f64::NEG_INFINITY, 1.0, -1.0, format!("V: {e}"))),
    }
    let ep = eplus_right_doubling_change(&b.parts.v_left, params);
    parts.push(CheckResult::at_most(
        ep,
        limit,
        (1.0, 1.0),
        format!("e+ right {ep:.2e}"),
    ));

    let fine = InteriorCurve::new(b.bump.clone(), 2 * b.curve.n_quad());
    let mut w = Worst::default();
    for r in [0.0, 3e-4, 2e-3, 0.6 * rho_c(), 0.95 * rho_c()] {
        let a = b.curve.jets(r);
        let c = fine.jets(r);
        for i in 0..4 {
            for k in 0..3 {
                // Energies share one scale: Ẽ_tr is a difference of terms of the size of Ẽ_tt.
                let scale = if i == 0 {
                    b.mass_scale()
                } else {
                    (1..4).map(|j| a.tilde[j].deriv(k).abs()).fold(1.0, f64::max)
                };
                let s = a.tilde[i].deriv(k).abs().max(c.tilde[i].deriv(k).abs()).max(scale);
                w.push((a.tilde[i].deriv(k) - c.tilde[i].deriv(k)).abs() / s, 1.0, r);
            }
        }
    }
    parts.push(CheckResult::at_most(
        w.value,
        limit,
        w.at(),
        format!("curve {:.2e}", w.value),
    ));
    let mut r = CheckResult::all(parts);
    r.detail = format!("change under node doubling: {}", r.detail);
    r
}

fn v_resolution(b: &FieldBundle) -> CheckResult {
    let params = b.params;
    let fine = params.with_resolution(2 * params.n_profile);
    let v2 = build_eplus_left(&fine).and_then(|(e, _)| compute_v_left(&e, &fine));
    let (v2, _) = match v2 {
        Ok(v) => v,
        Err(e) => return CheckResult::new(false, f64::NEG_INFINITY, 1.0, -1.0, format!("{e}")),
    };
    use crate::cone::Profile;
    let mut w = Worst::default();
    for g in golden(20) {
        let r = -1.0 + params.delta * (0.02 + 0.96 * g);
        let a = b.v.profile_value(r);
        let c = v2.jet(r).value();
        w.push((a - c).abs() / c.abs(), 1.0, r);
    }
    CheckResult::at_most(
        w.value,
        1e-8,
        w.at(),
        format!("|V_N - V_2N|/|V_2N| at 20 band probes: {:.2e}", w.value),
    )
}
