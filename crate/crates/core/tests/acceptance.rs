//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use blowup_forge::cli::{run, RunConfig, EXIT_PASS};
use blowup_forge::construct::{build_bundle, grid::profile_grid};
use blowup_forge::verify::constraints::equality_checks;
use blowup_forge::verify::sweep::Sweep;
use blowup_forge::verify::tensor::min_embedding_dim;
use blowup_forge::verify::{Report, TildeFields};
use blowup_forge::{Params, Tolerances};
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

const RESIDUAL: f64 = 1e-7;
const MATCH: f64 = 1e-8;
const ORDER_FIT: f64 = 0.2;
const TRANSPORT_RATIO: f64 = 3.0;
const VMIN: f64 = -1e-12;
const NORM_TOL: f64 = 1e-10;
const STEW_TOL: f64 = 1e-9;
const CROSS_TOL: f64 = 1e-8;
const SCHUR_SCALING_TOL: f64 = 1e-10;
const NOT_FD_TOL: f64 = 1e-4;
const ORACLE_TOL: f64 = 1e-12;
const TIME_LIMIT: Duration = Duration::from_secs(60);

struct Tally {
    failed: usize,
}

impl Tally {
    fn line(&mut self, n: u32, pass: bool, what: &str, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!(
            "{} criterion {n}: {what} | {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn config(pairs: &[(&str, &str)]) -> RunConfig {
    let map: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    RunConfig::from_map(&map).expect("valid config")
}

/// All named entries pass; the detail lists failures with margins.
fn entries(report: &Report, names: &[&str]) -> (bool, String) {
    let mut bad = Vec::new();
    for n in names {
        match report.get(n) {
            Some(r) if r.pass => {}
            Some(r) => bad.push(format!("{n} (margin {:.3e}: {})", r.margin, r.detail)),
            None => bad.push(format!("{n} missing")),
        }
    }
    if bad.is_empty() {
        (true, format!("{} checks pass", names.len()))
    } else {
        (false, bad.join("; "))
    }
}

/// Value behind an `at_most` entry with limit `limit`.
fn value_of(report: &Report, name: &str, limit: f64) -> f64 {
    report.get(name).map_or(f64::NAN, |r| limit - r.margin)
}

fn transport_residual(n: usize) -> f64 {
    let p = Params::new(7.0, 0.05, 10.0, n).expect("params");
    let b = build_bundle(&p).expect("build");
    let f = TildeFields::from_bundle(&b);
    let sweep = Sweep::new(profile_grid(&p), 0);
    let checks = equality_checks(&f, Some(&b.curve), &sweep, p.delta, &p.tol);
    let (_, r) = checks
        .into_iter()
        .find(|(k, _)| k == "transport")
        .expect("transport entry");
    p.tol.residual - r.margin
}

fn main() {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    let mut t = Tally { failed: 0 };

    let tol = Tolerances::default();
    assert_eq!(
        (tol.residual, tol.matching, tol.psd_margin, tol.order_fit),
        (RESIDUAL, MATCH, 0.0, ORDER_FIT),
        "default tolerance ladder"
    );

    let cfg = config(&[
        ("p", "7"),
        ("delta", "0.05"),
        ("A", "10"),
        ("resolution", "2048"),
        ("eps", "1e-4"),
    ]);
    let start = Instant::now();
    let out = run(&cfg);
    let elapsed = start.elapsed();
    let out = match out {
        Ok(o) => o,
        Err(e) => {
            println!("FAIL criterion 1: end-to-end run | {e}");
            std::process::exit(1);
        }
    };
    let report = &out.report;
    let b = &out.bundle;
    let failures = report.failures();
    t.line(
        1,
        out.exit_code() == EXIT_PASS && elapsed < TIME_LIMIT,
        "end-to-end pass at (7, 0.05, 10, 2048, 1e-4) under 60 s",
        format!(
            "{:.1} s, {} of {} checks fail: {}",
            elapsed.as_secs_f64(),
            failures.len(),
            report.entries.len(),
            failures.join(", ")
        ),
    );

    let fine = value_of(report, "transport", RESIDUAL);
    let coarse = transport_residual(1024);
    let ratio = coarse / fine;
    t.line(
        2,
        fine <= RESIDUAL && ratio >= TRANSPORT_RATIO,
        "transport residual <= 1e-7, halving spacing gains >= 3x",
        format!("N=2048: {fine:.3e}, N=1024: {coarse:.3e}, ratio {ratio:.1}"),
    );

    let (ok, detail) = entries(report, &["vpos", "vzero"]);
    let vmin = b
        .parts
        .v_left
        .node_values()
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    t.line(
        3,
        ok && vmin >= VMIN,
        "min V >= -1e-12, V = 0 on |rho| <= 1-delta, vpos ratio bound",
        format!("min V on band nodes {vmin:.3e}; {detail}"),
    );

    let ec = value_of(report, "eplus_closed_form", MATCH);
    let (ok, detail) = entries(report, &["eplus_closed_form", "pythagoras"]);
    t.line(
        4,
        ok && ec <= MATCH,
        "e+/e- closed forms and interior M~ = delta((t+r)^q + (t-r)^q) to 1e-8",
        detail,
    );

    let (m0, m1) = b.bump.norms();
    let mut stew = 0.0f64;
    for i in 0..=40 {
        let s = (0.25f64.ln() + 16f64.ln() * i as f64 / 40.0).exp();
        let v = b.bump.curve_inner(1, 1, s, s).expect("inner") * s.powf(4.0 / (b.params.p - 1.0));
        stew = stew.max((v - 0.5).abs());
    }
    let cross = b.bump.curve_inner(1, 2, 1.0, 1.0).expect("inner") + 1.0 / (b.params.p - 1.0);
    let pass5 = (m0 - b.params.delta).abs() <= NORM_TOL
        && (m1 - 0.5).abs() <= NORM_TOL
        && stew <= STEW_TOL
        && cross.abs() <= CROSS_TOL;
    t.line(
        5,
        pass5,
        "int psi^2 = delta, int psi'^2 = 1/2, ||f'(t)||^2 t^(4/(p-1)) = 1/2, <f'(1),f''(1)> = -1/(p-1)",
        format!(
            "int psi^2 = {m0:.6e} (delta {}), int psi'^2 = {m1:.6e}, stew dev {stew:.2e}, cross dev {cross:.2e}",
            b.params.delta
        ),
    );

    let (ok, detail) = entries(
        report,
        &[
            "la4",
            "mur",
            "eps_la2",
            "eps_la3",
            "eps_newerpos",
            "eps_eww",
            "eps_margin_increase",
        ],
    );
    t.line(6, ok, "positivity suite and margin increase to 1e-8 relative", detail);

    let vo = report.get("vanishing_orders");
    t.line(
        7,
        vo.is_some_and(|r| r.pass && r.margin >= 0.0 && r.margin <= ORDER_FIT),
        "vanishing slopes within 0.2 of {2, 2, 3, 4}",
        vo.map_or("missing".into(), |r| r.detail.clone()),
    );

    let (ok, detail) = entries(
        report,
        &[
            "tensor_la5",
            "schur_psd",
            "schur_scaling",
            "tensor_divergence",
            "not0_fd",
            "not1_fd",
        ],
    );
    let scaling = value_of(report, "schur_scaling", SCHUR_SCALING_TOL);
    let div = value_of(report, "tensor_divergence", NOT_FD_TOL);
    t.line(
        8,
        ok && scaling <= SCHUR_SCALING_TOL && div <= NOT_FD_TOL,
        "3+1 lift at 20 random points: (la) and Schur metric PSD, scaling 1e-10, FD residuals 1e-4",
        format!("scaling {scaling:.2e}, divergence {div:.2e}; {detail}"),
    );

    let dims = min_embedding_dim(3);
    t.line(
        9,
        dims == (19, 40),
        "min_embedding_dim(3) = (19, 40)",
        format!("{dims:?}"),
    );

    let oracle = value_of(report, "scalar_oracle", ORACLE_TOL);
    let (ok, detail) = entries(report, &["scalar_oracle", "negative_controls"]);
    t.line(
        10,
        ok && oracle <= ORACLE_TOL,
        "free-wave oracle to 1e-12, each control flips its target",
        format!("oracle {oracle:.2e}; {detail}"),
    );

    let mut pass11 = true;
    let mut notes = Vec::new();
    for (p, d) in [("5.5", "0.02"), ("9", "0.1")] {
        let cfg = config(&[
            ("p", p),
            ("delta", d),
            ("A", "auto"),
            ("resolution", "2048"),
            ("eps", "auto"),
        ]);
        match run(&cfg) {
            Ok(o) => {
                let esc = o.report.get("amplitude_escalation").is_some_and(|r| r.pass);
                let f = o.report.failures();
                pass11 &= esc && f.is_empty();
                notes.push(format!(
                    "(p, delta) = ({p}, {d}): A = {}, eps = {:e}, {} failed: {}",
                    o.bundle.params.amplitude,
                    o.eps.unwrap_or(f64::NAN),
                    f.len(),
                    f.join(", ")
                ));
            }
            Err(e) => {
                pass11 = false;
                notes.push(format!("(p, delta) = ({p}, {d}): {e}"));
            }
        }
    }
    t.line(
        11,
        pass11,
        "full suite at (5.5, 0.02) and (9, 0.1) with auto-escalated A",
        notes.join(" / "),
    );

    println!("{} of 11 criteria fail", t.failed);
    if t.failed > 0 {
        std::process::exit(1);
    }
}
