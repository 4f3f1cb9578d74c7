//! Verification of the constructed bundle.

pub mod checks;
pub mod constraints;
pub mod controls;
pub mod fd;
pub mod fields;
pub mod lift;
pub mod linalg;
pub mod oracle;
pub mod report;
pub mod sweep;
pub mod tensor;

pub use constraints::EpsChoice;
pub use fields::TildeFields;
pub use lift::{lift_untilde, LiftedBundle};
pub use report::{CheckResult, Report};

use crate::construct::grid::profile_grid;
use crate::construct::FieldBundle;
use crate::error::Result;
use constraints::{eps_checks, equality_checks, la4_checks, main5_checks, mur_check};
use sweep::Sweep;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub eps: EpsChoice,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            eps: EpsChoice::Fixed(1e-4),
            seed: 0,
        }
    }
}

pub struct Verification {
    pub report: Report,
    pub eps: f64,
    pub eps_max: f64,
}

pub const AMPLITUDE_START: f64 = 1.0;
pub const AMPLITUDE_CAP: f64 = 1e3;

/// One rung of the amplitude ladder.
#[derive(Clone, Debug)]
pub struct AmplitudeTrial {
    pub amplitude: f64,
    pub vpos: std::result::Result<CheckResult, String>,
}

pub struct Escalation {
    /// The first passing rung, or the last rung that built.
    pub bundle: Option<FieldBundle>,
    pub passed: bool,
    pub trials: Vec<AmplitudeTrial>,
}

impl Escalation {
    pub fn summary(&self) -> CheckResult {
        let rungs: Vec<String> = self
            .trials
            .iter()
            .map(|t| match &t.vpos {
                Ok(v) => format!("A={}: {}", t.amplitude, if v.pass { "pass" } else { "fail" }),
                Err(e) => format!("A={}: {e}", t.amplitude),
            })
            .collect();
        let last = self.trials.last().map_or(f64::NAN, |t| t.amplitude);
        let margin = match self.trials.last().map(|t| &t.vpos) {
            Some(Ok(v)) => v.margin,
            _ => f64::NAN,
        };
        CheckResult::new(
            self.passed,
            margin,
            1.0,
            -1.0,
            format!(
                "A = {last} after {} rungs (cap {AMPLITUDE_CAP}): {}",
                self.trials.len(),
                rungs.join(", ")
            ),
        )
    }
}

/// Builds with `A = 1, 2, 4, …` until the potential bound holds, up to the cap.
pub fn escalate_amplitude(params: &crate::Params) -> Escalation {
    let mut trials = Vec::new();
    let mut last = None;
    let mut a = AMPLITUDE_START;
    while a <= AMPLITUDE_CAP {
        let p = params.with_amplitude(a);
        match crate::construct::build_bundle(&p) {
            Ok(b) => {
                let v = checks::vpos_check(&b);
                let pass = v.pass;
                trials.push(AmplitudeTrial {
                    amplitude: a,
                    vpos: Ok(v),
                });
                if pass {
                    return Escalation {
                        bundle: Some(b),
                        passed: true,
                        trials,
                    };
                }
                last = Some(b);
            }
            Err(e) => trials.push(AmplitudeTrial {
                amplitude: a,
                vpos: Err(e.to_string()),
            }),
        }
        a *= 2.0;
    }
    Escalation {
        bundle: last,
        passed: false,
        trials,
    }
}

/// Checks of the window, the cone calculus and the assembled fields.
pub fn construction_report(b: &FieldBundle, seed: u64) -> Report {
    let f = TildeFields::from_bundle(b);
    let sweep = Sweep::new(profile_grid(&b.params), seed);
    let mut report = Report::default();
    checks::bump_checks(&b.bump, &b.params, seed, &mut report);
    checks::cone_checks(b, &f, &sweep, seed, &mut report);
    checks::construct_checks(b, &sweep, &mut report);
    report
}

/// Every check on `b`, the relaxation and the 3+1 lift.
pub fn run_all(b: &FieldBundle, opts: &VerifyOptions) -> Result<Verification> {
    let params = &b.params;
    let tol = params.tol;
    let f = TildeFields::from_bundle(b);
    let sweep = Sweep::new(profile_grid(params), opts.seed);
    let mut report = Report::default();

    checks::bump_checks(&b.bump, params, opts.seed, &mut report);
    checks::cone_checks(b, &f, &sweep, opts.seed, &mut report);
    checks::construct_checks(b, &sweep, &mut report);
    for (k, v) in equality_checks(&f, Some(&b.curve), &sweep, params.delta, &tol) {
        if !k.starts_with("parity:") {
            report.insert(&k, v);
        }
    }
    let (la4, cong) = la4_checks(&f, &sweep, &tol);
    report.insert("la4", la4);
    report.insert("la4_congruence", cong);
    report.insert("mur", mur_check(b));

    let lifted = lift_untilde(b)?;
    report.insert("lift_continuity", lift::check_lift_continuity(&b.curve, tol.matching));
    let m0 = lifted.m.profile_value(0.0);
    let want = 4.0 * b.bump.curve_inner(1, 1, 1.0, 1.0)?;
    report.insert(
        "lift_axis",
        CheckResult::at_most(
            (m0 - want).abs() / want,
            tol.matching,
            (1.0, 0.0),
            format!("M(1,0) = {m0:.12} against 4||f'(1)||^2 = {want:.12}"),
        ),
    );
    let m5 = main5_checks(&lifted, &sweep, &tol);
    report.insert("newerpos_weak", m5.newerpos_weak);
    report.insert("la2_weak", m5.la2_weak);
    report.insert("la3_weak", m5.la3_weak);

    let eps = eps_checks(&lifted, &sweep, opts.eps, &tol);
    for (k, v) in eps.checks {
        report.insert(k, v);
    }
    for (k, v) in tensor::tensor_checks(&eps.perturbed, opts.seed) {
        report.insert(k, v);
    }
    report.insert("scalar_oracle", oracle::oracle_check(params.p, &sweep));
    let (ctl, _) = controls::control_check(&f, Some(&b.curve), &sweep, params.delta, &tol);
    report.insert("negative_controls", ctl);
    Ok(Verification {
        report,
        eps: eps.eps,
        eps_max: eps.eps_max,
    })
}
