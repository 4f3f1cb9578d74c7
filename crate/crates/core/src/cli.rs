//! Command-line orchestration: configuration, the staged pipeline and exit codes.
//!
//! Settings come from an optional flat `key=value` file whose keys are the
//! long flag names; flags given on the command line override the file.

use crate::construct::{build_bundle, FieldBundle};
use crate::error::{ForgeError, Result};
use crate::io::{dump_bundle, load_bundle};
use crate::params::Params;
use crate::verify::{self, construction_report, escalate_amplitude, EpsChoice, Report, VerifyOptions};
use clap::Parser;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const THREADS_ENV: &str = "BLOWUP_FORGE_THREADS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Keys accepted in config files, mirroring the long flags.
pub const KEYS: [&str; 11] = [
    "p",
    "delta",
    "A",
    "resolution",
    "quad-nodes",
    "eps",
    "report",
    "dump-fields",
    "load-fields",
    "seed",
    "stage",
];

#[derive(Parser, Debug, Default)]
#[command(
    name = "blowup-forge",
    version,
    about = "Build and verify self-similar mass/energy field bundles"
)]
pub struct Cli {
    /// key=value file with defaults for any of the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Nonlinearity exponent, must exceed 5
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Bump amplitude, or `auto` to double from 1 until the potential bound holds
    #[arg(long = "A", allow_hyphen_values = true)]
    pub amplitude: Option<String>,
    #[arg(long)]
    pub resolution: Option<String>,
    #[arg(long = "quad-nodes")]
    pub quad_nodes: Option<String>,
    /// Relaxation parameter, or `auto` for a tenth of the largest admissible one
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    #[arg(long)]
    pub report: Option<String>,
    #[arg(long = "dump-fields")]
    pub dump_fields: Option<String>,
    #[arg(long = "load-fields")]
    pub load_fields: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// construct, verify or full
    #[arg(long)]
    pub stage: Option<String>,
    /// Same as `--stage verify`
    #[arg(long = "verify-only")]
    pub verify_only: bool,
}

impl Cli {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("p", &self.p),
            ("delta", &self.delta),
            ("A", &self.amplitude),
            ("resolution", &self.resolution),
            ("quad-nodes", &self.quad_nodes),
            ("eps", &self.eps),
            ("report", &self.report),
            ("dump-fields", &self.dump_fields),
            ("load-fields", &self.load_fields),
            ("seed", &self.seed),
            ("stage", &self.stage),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Construct,
    Verify,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Amplitude {
    Fixed(f64),
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: Params,
    pub amplitude: Amplitude,
    pub eps: EpsChoice,
    pub seed: u64,
    pub stage: Stage,
    pub report: Option<PathBuf>,
    pub dump_fields: Option<PathBuf>,
    pub load_fields: Option<PathBuf>,
    /// Parameter keys set explicitly; a loaded sidecar must agree on them.
    pub explicit: Vec<String>,
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ForgeError::Config(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ForgeError::Config(format!("line {}: unknown key {k:?}", i + 1)));
        }
        if v.is_empty() {
            return Err(ForgeError::Config(format!("line {}: empty value for {k}", i + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ForgeError::Config(format!("line {}: duplicate key {k}", i + 1)));
        }
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|e| ForgeError::Config(format!("{key} = {v:?}: {e}"))),
    }
}

impl RunConfig {
    /// Builds a validated configuration from merged settings.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(ForgeError::Config(format!("unknown key {k:?}")));
        }
        let amplitude = match map.get("A").map(String::as_str) {
            Some("auto") => Amplitude::Auto,
            _ => Amplitude::Fixed(num(map, "A", 10.0)?),
        };
        let eps = match map.get("eps").map(String::as_str) {
            Some("auto") => EpsChoice::Auto,
            _ => {
                let e: f64 = num(map, "eps", 1e-4)?;
                if !(e.is_finite() && e >= 0.0) {
                    return Err(ForgeError::Config(format!("eps must be a finite number >= 0, got {e}")));
                }
                EpsChoice::Fixed(e)
            }
        };
        let mut params = Params::new(
            num(map, "p", 7.0)?,
            num(map, "delta", 0.05)?,
            match amplitude {
                Amplitude::Fixed(a) => a,
                Amplitude::Auto => verify::AMPLITUDE_START,
            },
            num(map, "resolution", 2048)?,
        )?;
        params.n_quad = num(map, "quad-nodes", params.n_quad)?;
        params.validate()?;
        let stage = match map.get("stage").map(String::as_str) {
            None | Some("full") => Stage::Full,
            Some("construct") => Stage::Construct,
            Some("verify") => Stage::Verify,
            Some(s) => {
                return Err(ForgeError::Config(format!(
                    "stage must be construct, verify or full, got {s:?}"
                )))
            }
        };
        let path = |k: &str| map.get(k).map(PathBuf::from);
        let cfg = RunConfig {
            params,
            amplitude,
            eps,
            seed: num(map, "seed", 0)?,
            stage,
            report: path("report"),
            dump_fields: path("dump-fields"),
            load_fields: path("load-fields"),
            explicit: ["p", "delta", "A", "resolution", "quad-nodes"]
                .iter()
                .filter(|k| map.contains_key(**k))
                .map(|k| k.to_string())
                .collect(),
        };
        if cfg.stage == Stage::Verify && cfg.load_fields.is_none() {
            return Err(ForgeError::Config("stage verify needs --load-fields".into()));
        }
        if cfg.stage == Stage::Construct && cfg.load_fields.is_some() {
            return Err(ForgeError::Config("stage construct cannot take --load-fields".into()));
        }
        if cfg.amplitude == Amplitude::Auto && cfg.load_fields.is_some() {
            return Err(ForgeError::Config("A = auto conflicts with --load-fields".into()));
        }
        Ok(cfg)
    }

    /// Merges the config file named by `--config` with the flags.
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let mut map = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ForgeError::Config(format!("{}: {e}", path.display())))?;
                parse_config(&text).map_err(|e| ForgeError::Config(format!("{}: {e}", path.display())))?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in cli.pairs() {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        if cli.verify_only {
            map.insert("stage".into(), "verify".into());
        }
        Self::from_map(&map)
    }
}

/// A pipeline failure tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: ForgeError,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}]: {}", self.stage, self.error)
    }
}

fn at<T>(stage: &'static str, r: Result<T>) -> std::result::Result<T, StageError> {
    r.map_err(|error| StageError { stage, error })
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub bundle: FieldBundle,
    pub eps: Option<f64>,
    pub eps_max: Option<f64>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_pass() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

fn loaded(dir: &Path, cfg: &RunConfig) -> Result<FieldBundle> {
    let b = load_bundle(dir)?;
    let (f, w) = (&b.params, &cfg.params);
    let pairs = [
        ("p", f.p, w.p),
        ("delta", f.delta, w.delta),
        ("A", f.amplitude, w.amplitude),
        ("resolution", f.n_profile as f64, w.n_profile as f64),
        ("quad-nodes", f.n_quad as f64, w.n_quad as f64),
    ];
    for (k, found, want) in pairs {
        if cfg.explicit.iter().any(|e| e == k) && found != want {
            return Err(ForgeError::Load {
                file: dir.join(crate::io::SIDECAR).display().to_string(),
                detail: format!("parameter mismatch: {k} = {found} in sidecar, {want} requested"),
            });
        }
    }
    Ok(b)
}

/// Runs the configured stages and writes the requested artifacts.
pub fn run(cfg: &RunConfig) -> std::result::Result<RunOutcome, StageError> {
    let mut report = Report::default();
    let bundle = match (&cfg.load_fields, cfg.amplitude) {
        (Some(dir), _) => at("load", loaded(dir, cfg))?,
        (None, Amplitude::Fixed(_)) => at("construct", build_bundle(&cfg.params))?,
        (None, Amplitude::Auto) => {
            let esc = escalate_amplitude(&cfg.params);
            report.insert("amplitude_escalation", esc.summary());
            match esc.bundle {
                Some(b) => b,
                None => {
                    let last = esc.trials.last().and_then(|t| t.vpos.clone().err()).unwrap_or_default();
                    return Err(StageError {
                        stage: "construct",
                        error: ForgeError::Construction {
                            tag: "amplitude escalation".into(),
                            detail: format!("no amplitude up to {} built: {last}", verify::AMPLITUDE_CAP),
                        },
                    });
                }
            }
        }
    };
    if let Some(dir) = &cfg.dump_fields {
        at("dump", dump_bundle(&bundle, dir))?;
    }
    let (mut eps, mut eps_max) = (None, None);
    match cfg.stage {
        Stage::Construct => report.entries.extend(construction_report(&bundle, cfg.seed).entries),
        Stage::Verify | Stage::Full => {
            let opts = VerifyOptions {
                eps: cfg.eps,
                seed: cfg.seed,
            };
            let v = at("verify", verify::run_all(&bundle, &opts))?;
            report.entries.extend(v.report.entries);
            eps = Some(v.eps);
            eps_max = Some(v.eps_max);
        }
    }
    if let Some(path) = &cfg.report {
        at(
            "report",
            std::fs::write(path, report.to_json() + "\n").map_err(ForgeError::from),
        )?;
    }
    Ok(RunOutcome {
        report,
        bundle,
        eps,
        eps_max,
    })
}

/// Thread cap from the value of the environment variable, if set.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>> {
    let Some(v) = value else {
        return Ok(None);
    };
    v.trim()
        .parse()
        .ok()
        .filter(|n: &usize| *n > 0)
        .map(Some)
        .ok_or_else(|| ForgeError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))
}

/// Caps the global thread pool from the environment.
pub fn init_threads() -> Result<()> {
    let var = std::env::var(THREADS_ENV).ok();
    match thread_cap(var.as_deref())? {
        None => Ok(()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ForgeError::Config(e.to_string())),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let cfg = match init_threads().and_then(|_| RunConfig::from_cli(&cli)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error[config]: {e}");
            return EXIT_ERROR;
        }
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_ERROR;
        }
    };
    for (name, r) in &out.report.entries {
        println!(
            "{} {name} margin={:.3e}",
            if r.pass { "pass" } else { "FAIL" },
            r.margin
        );
    }
    let p = &out.bundle.params;
    print!("p={} delta={} A={} N={}", p.p, p.delta, p.amplitude, p.n_profile);
    if let (Some(e), Some(m)) = (out.eps, out.eps_max) {
        print!(" eps={e:e} eps_max={m:e}");
    }
    println!();
    let failed = out.report.failures();
    println!("{} checks, {} failed", out.report.entries.len(), failed.len());
    out.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn config_lines() {
        let m = parse_config("# run\np = 9\n\ndelta=0.1  # wide\nA=auto\n").unwrap();
        assert_eq!(m["p"], "9");
        assert_eq!(m["delta"], "0.1");
        assert!(parse_config("p 9").is_err());
        assert!(parse_config("q=1").is_err());
        assert!(parse_config("p=7\np=8").is_err());
        assert!(parse_config("p=").is_err());
    }

    #[test]
    fn defaults_and_choices() {
        let c = RunConfig::from_map(&map(&[])).unwrap();
        assert_eq!((c.params.p, c.params.delta, c.params.amplitude), (7.0, 0.05, 10.0));
        assert_eq!(c.params.n_profile, 2048);
        assert_eq!(c.eps, EpsChoice::Fixed(1e-4));
        assert_eq!(c.stage, Stage::Full);
        let c = RunConfig::from_map(&map(&[("A", "auto"), ("eps", "auto"), ("stage", "construct")])).unwrap();
        assert_eq!(c.amplitude, Amplitude::Auto);
        assert_eq!(c.eps, EpsChoice::Auto);
        assert_eq!(c.stage, Stage::Construct);
    }

    #[test]
    fn rejects_bad_settings() {
        let err = RunConfig::from_map(&map(&[("p", "4")])).unwrap_err();
        assert!(err.to_string().contains("p > 5"), "{err}");
        assert!(RunConfig::from_map(&map(&[("eps", "-1")])).is_err());
        assert!(RunConfig::from_map(&map(&[("stage", "verify")])).is_err());
        assert!(RunConfig::from_map(&map(&[("stage", "all")])).is_err());
        assert!(RunConfig::from_map(&map(&[("resolution", "100")])).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "p=9\ndelta=0.1\nseed=3\n").unwrap();
        let cli = Cli::try_parse_from([
            "x",
            "--config",
            path.to_str().unwrap(),
            "--p",
            "7.5",
            "--verify-only",
            "--load-fields",
            "d",
        ])
        .unwrap();
        let c = RunConfig::from_cli(&cli).unwrap();
        assert_eq!(c.params.p, 7.5);
        assert_eq!(c.params.delta, 0.1);
        assert_eq!(c.seed, 3);
        assert_eq!(c.stage, Stage::Verify);
        assert_eq!(c.explicit, vec!["p".to_string(), "delta".to_string()]);
    }

    #[test]
    fn thread_caps() {
        assert_eq!(thread_cap(None).unwrap(), None);
        assert_eq!(thread_cap(Some(" 4 ")).unwrap(), Some(4));
        assert!(thread_cap(Some("0")).is_err());
        assert!(thread_cap(Some("zero")).unwrap_err().to_string().contains(THREADS_ENV));
    }

    #[test]
    fn exit_codes() {
        let cli = |args: &[&str]| Cli::try_parse_from(std::iter::once("x").chain(args.iter().copied())).unwrap();
        assert_eq!(main_with(cli(&["--p", "4"])), EXIT_ERROR);
        assert_eq!(main_with(cli(&["--stage", "verify"])), EXIT_ERROR);
        assert_eq!(main_with(cli(&["--A", "-3"])), EXIT_ERROR);
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("none");
        assert_eq!(
            main_with(cli(&["--verify-only", "--load-fields", missing.to_str().unwrap()])),
            EXIT_ERROR
        );
    }

    #[test]
    fn construct_stage_writes_dumps_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        let fields = dir.path().join("fields");
        let report = dir.path().join("report.json");
        std::fs::write(
            &cfg,
            format!(
                "p = 7\ndelta = 0.05\nA = 2\nresolution = 1024\nreport = {}\n",
                report.display()
            ),
        )
        .unwrap();
        let cli = Cli::try_parse_from([
            "x",
            "--config",
            cfg.to_str().unwrap(),
            "--stage",
            "construct",
            "--resolution",
            "256",
            "--dump-fields",
            fields.to_str().unwrap(),
        ])
        .unwrap();
        let code = main_with(cli);
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        let obj = json.as_object().unwrap();
        assert!(obj.contains_key("vpos") && obj.contains_key("bump_support"));
        assert!(!obj.contains_key("la4"));
        let any_fail = obj.values().any(|v| v["pass"] == false);
        assert_eq!(code, if any_fail { EXIT_FAIL } else { EXIT_PASS });
        for k in ["pass", "margin", "worst_t", "worst_r", "detail"] {
            assert!(obj["vpos"].get(k).is_some(), "{k}");
        }
        let side = std::fs::read_to_string(fields.join("params.json")).unwrap();
        assert!(side.contains("\"n_profile\": 256"), "{side}");
        let psi = std::fs::read_to_string(fields.join("psi.csv")).unwrap();
        assert!(psi.starts_with("x,psi,dpsi,ddpsi\n"));
        assert_eq!(psi.lines().count(), 1002);
    }

    proptest::proptest! {
        #[test]
        fn config_parser_never_panics(text in "[a-zA-Z=#\\- .0-9\n]{0,80}") {
            if let Ok(m) = parse_config(&text) {
                let _ = RunConfig::from_map(&m);
            }
        }
    }
}
