//! Profile dumps, the parameter sidecar and reloading a bundle from disk.
//!
//! A dump directory holds one `NAME.csv` per field with header
//! `rho,value,dvalue,ddvalue` on the `t = 1` sample grid, `psi.csv` with the
//! window and its derivatives, and `params.json`. Reloading only needs the
//! band samples of `V` (left) and `e₊` (right); every other column is
//! recomputed and compared against the file.

use crate::bump::{BumpCurve, WIDTH};
use crate::construct::grid::{left_band_nodes, profile_grid};
use crate::construct::{bundle_from_samples, FieldBundle};
use crate::error::{ForgeError, Result};
use crate::params::Params;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const PROFILE_HEADER: &str = "rho,value,dvalue,ddvalue";
pub const PSI_HEADER: &str = "x,psi,dpsi,ddpsi";
pub const SIDECAR: &str = "params.json";
pub const PSI_FILE: &str = "psi.csv";
const PSI_SAMPLES: usize = 1001;

fn load_err(file: &Path, detail: impl Into<String>) -> ForgeError {
    ForgeError::Load {
        file: file.display().to_string(),
        detail: detail.into(),
    }
}

fn push_row(out: &mut String, row: &[f64; 4]) {
    let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", row[0], row[1], row[2], row[3]);
}

/// Rows `(ρ, g, g′, g″)` of every field on the sample grid.
pub fn profile_rows(b: &FieldBundle) -> Vec<(&'static str, Vec<[f64; 4]>)> {
    let grid = profile_grid(&b.params);
    b.named_fields()
        .into_iter()
        .map(|(name, f)| {
            let rows = grid
                .iter()
                .map(|&rho| {
                    let j = f.jet(rho);
                    [rho, j.deriv(0), j.deriv(1), j.deriv(2)]
                })
                .collect();
            (name, rows)
        })
        .collect()
}

pub fn format_csv(header: &str, rows: &[[f64; 4]]) -> String {
    let mut out = String::with_capacity(80 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for r in rows {
        push_row(&mut out, r);
    }
    out
}

/// Parses a four-column CSV with the given header.
pub fn parse_csv(text: &str, header: &str) -> std::result::Result<Vec<[f64; 4]>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        Some(h) => return Err(format!("header {h:?}, expected {header:?}")),
        None => return Err("empty file".into()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = [0.0; 4];
        let mut cols = line.split(',');
        for (k, slot) in row.iter_mut().enumerate() {
            let c = cols
                .next()
                .ok_or_else(|| format!("line {}: {} columns, expected 4", i + 2, k))?;
            *slot = c
                .trim()
                .parse()
                .map_err(|e| format!("line {}: column {}: {e}", i + 2, k + 1))?;
        }
        if cols.next().is_some() {
            return Err(format!("line {}: more than 4 columns", i + 2));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn psi_rows(bump: &BumpCurve) -> Vec<[f64; 4]> {
    (0..PSI_SAMPLES)
        .map(|i| {
            let x = WIDTH * i as f64 / (PSI_SAMPLES - 1) as f64;
            let d = bump.psi_derivs(x);
            [x, d[0], d[1], d[2]]
        })
        .collect()
}

pub fn format_sidecar(params: &Params) -> String {
    let mut s = serde_json::to_string_pretty(params).expect("params serialize");
    s.push('\n');
    s
}

pub fn parse_sidecar(text: &str) -> std::result::Result<Params, String> {
    let params: Params = serde_json::from_str(text).map_err(|e| e.to_string())?;
    params.validate().map_err(|e| e.to_string())?;
    Ok(params)
}

/// Writes every profile, `psi.csv` and the sidecar into `dir`.
pub fn dump_bundle(b: &FieldBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut write = |name: String, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    for (name, rows) in profile_rows(b) {
        write(format!("{name}.csv"), format_csv(PROFILE_HEADER, &rows))?;
    }
    write(PSI_FILE.into(), format_csv(PSI_HEADER, &psi_rows(&b.bump)))?;
    write(SIDECAR.into(), format_sidecar(&b.params))?;
    Ok(written)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| load_err(path, e.to_string()))
}

fn read_profile(path: &Path, grid: &[f64]) -> Result<Vec<[f64; 4]>> {
    let rows = parse_csv(&read(path)?, PROFILE_HEADER).map_err(|e| load_err(path, e))?;
    if rows.len() != grid.len() {
        return Err(load_err(
            path,
            format!(
                "{} rows, expected {} (truncated or wrong resolution)",
                rows.len(),
                grid.len()
            ),
        ));
    }
    if let Some((i, (r, g))) = rows.iter().zip(grid).enumerate().find(|(_, (r, g))| r[0] != **g) {
        return Err(load_err(
            path,
            format!("row {}: rho = {:e}, grid has {g:e}", i + 1, r[0]),
        ));
    }
    Ok(rows)
}

/// Reloads a dump directory.
pub fn load_bundle(dir: &Path) -> Result<FieldBundle> {
    let side = dir.join(SIDECAR);
    let params = parse_sidecar(&read(&side)?).map_err(|e| load_err(&side, e))?;
    load_with(dir, params)
}

fn load_with(dir: &Path, params: Params) -> Result<FieldBundle> {
    let grid = profile_grid(&params);
    let nb = left_band_nodes(&params).len();
    let mut files = Vec::new();
    for name in crate::construct::FIELD_NAMES {
        let path = dir.join(format!("{name}.csv"));
        let rows = read_profile(&path, &grid)?;
        files.push((name, path, rows));
    }
    let column = |name: &str| &files.iter().find(|f| f.0 == name).expect("known field").2;
    let v_left: Vec<f64> = column("V")[..nb].iter().map(|r| r[1]).collect();
    let e_right: Vec<f64> = column("e_plus")[grid.len() - nb..].iter().map(|r| r[1]).collect();
    let b = bundle_from_samples(&params, &v_left, &e_right)?;

    let tol = params.tol.matching;
    for ((name, fresh), (_, path, rows)) in profile_rows(&b).into_iter().zip(&files) {
        for (i, (a, f)) in fresh.iter().zip(rows).enumerate() {
            for k in 1..4 {
                let gap = (a[k] - f[k]).abs() / a[k].abs().max(1.0);
                if !(gap <= tol) {
                    return Err(load_err(
                        path,
                        format!(
                            "{name} column {} row {}: {:e} recomputes to {:e}",
                            k + 1,
                            i + 1,
                            f[k],
                            a[k]
                        ),
                    ));
                }
            }
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![[0.1, -1.0 / 3.0, 1e-300, f64::MAX], [-1.0, 0.0, -0.0, 2.5e-17]];
        let text = format_csv(PROFILE_HEADER, &rows);
        let back = parse_csv(&text, PROFILE_HEADER).unwrap();
        assert_eq!(format_csv(PROFILE_HEADER, &back), text);
        for (a, b) in rows.iter().zip(&back) {
            for k in 0..4 {
                assert_eq!(a[k].to_bits(), b[k].to_bits());
            }
        }
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(parse_csv("", PROFILE_HEADER).is_err());
        assert!(parse_csv("x,y\n", PROFILE_HEADER).is_err());
        assert!(parse_csv("rho,value,dvalue,ddvalue\n1,2,3\n", PROFILE_HEADER).is_err());
        assert!(parse_csv("rho,value,dvalue,ddvalue\n1,2,3,4,5\n", PROFILE_HEADER).is_err());
        assert!(parse_csv("rho,value,dvalue,ddvalue\n1,2,x,4\n", PROFILE_HEADER).is_err());
    }

    proptest::proptest! {
        #[test]
        fn csv_rows_round_trip(rows in proptest::collection::vec(
            proptest::array::uniform4(proptest::num::f64::NORMAL | proptest::num::f64::ZERO), 0..20)) {
            let text = format_csv(PROFILE_HEADER, &rows);
            let back = parse_csv(&text, PROFILE_HEADER).unwrap();
            proptest::prop_assert_eq!(format_csv(PROFILE_HEADER, &back), text);
        }
    }

    #[test]
    fn sidecar_round_trip() {
        let p = Params::new(7.0, 0.05, 2.0, 256).unwrap();
        assert_eq!(parse_sidecar(&format_sidecar(&p)).unwrap(), p);
        let bad = format_sidecar(&Params { p: 4.0, ..p });
        assert!(parse_sidecar(&bad).unwrap_err().contains("p > 5"));
    }
}

#[cfg(test)]
mod round_trip {
    use crate::cli::{run, RunConfig};
    use crate::construct::build_bundle;
    use crate::io::{dump_bundle, load_bundle, SIDECAR};
    use crate::verify::{run_all, VerifyOptions};
    use crate::{ForgeError, Params};
    use std::collections::BTreeMap;
    use std::fs;
    use std::path::Path;

    fn params() -> Params {
        Params::new(7.0, 0.05, 2.0, 512).unwrap()
    }

    fn dumped(dir: &Path) -> Params {
        let p = params();
        dump_bundle(&build_bundle(&p).unwrap(), dir).unwrap();
        p
    }

    fn config(pairs: &[(&str, &str)]) -> RunConfig {
        let map: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        RunConfig::from_map(&map).unwrap()
    }

    #[test]
    fn dump_load_dump_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        dumped(a.path());
        dump_bundle(&load_bundle(a.path()).unwrap(), b.path()).unwrap();
        let mut names: Vec<_> = fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert_eq!(names.len(), 9);
        for n in names {
            assert_eq!(
                fs::read(a.path().join(&n)).unwrap(),
                fs::read(b.path().join(&n)).unwrap(),
                "{n:?}"
            );
        }
    }

    #[test]
    fn loaded_report_matches_in_memory_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p = params();
        let b = build_bundle(&p).unwrap();
        dump_bundle(&b, dir.path()).unwrap();
        let opts = VerifyOptions::default();
        let first = run_all(&b, &opts).unwrap().report.to_json();
        let again = run_all(&build_bundle(&p).unwrap(), &opts).unwrap().report.to_json();
        let loaded = run_all(&load_bundle(dir.path()).unwrap(), &opts)
            .unwrap()
            .report
            .to_json();
        assert_eq!(first, again);
        assert_eq!(first, loaded);
    }

    #[test]
    fn sidecar_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        dumped(dir.path());
        let d = dir.path().to_str().unwrap();
        let err = run(&config(&[("stage", "verify"), ("load-fields", d), ("delta", "0.1")])).unwrap_err();
        assert_eq!(err.stage, "load");
        let msg = err.to_string();
        assert!(msg.contains(SIDECAR) && msg.contains("delta"), "{msg}");
    }

    #[test]
    fn edited_sidecar_disagrees_with_the_profiles() {
        let dir = tempfile::tempdir().unwrap();
        dumped(dir.path());
        let side = dir.path().join(SIDECAR);
        let text = fs::read_to_string(&side)
            .unwrap()
            .replace("\"delta\": 0.05", "\"delta\": 0.06");
        fs::write(&side, text).unwrap();
        match load_bundle(dir.path()) {
            Err(ForgeError::Load { file, .. }) => assert!(file.ends_with("e_plus.csv"), "{file}"),
            other => panic!("expected load error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_csv_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        dumped(dir.path());
        let path = dir.path().join("M_tilde.csv");
        let text = fs::read_to_string(&path).unwrap();
        let keep: Vec<&str> = text.lines().take(100).collect();
        fs::write(&path, keep.join("\n")).unwrap();
        let err = load_bundle(dir.path()).unwrap_err().to_string();
        assert!(err.contains("M_tilde.csv") && err.contains("rows"), "{err}");

        fs::write(&path, &text[..text.len() / 2]).unwrap();
        let err = load_bundle(dir.path()).unwrap_err().to_string();
        assert!(err.contains("M_tilde.csv"), "{err}");
    }

    #[test]
    fn tampered_value_is_caught() {
        let dir = tempfile::tempdir().unwrap();
        dumped(dir.path());
        let path = dir.path().join("E_tt.csv");
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let cols: Vec<&str> = lines[700].split(',').collect();
        let v: f64 = cols[1].parse().unwrap();
        lines[700] = format!("{},{:.16e},{},{}", cols[0], v * 1.001, cols[2], cols[3]);
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        let err = load_bundle(dir.path()).unwrap_err().to_string();
        assert!(err.contains("E_tt.csv") && err.contains("row 700"), "{err}");
    }

    #[test]
    fn missing_file_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        dumped(dir.path());
        fs::remove_file(dir.path().join("V.csv")).unwrap();
        let err = load_bundle(dir.path()).unwrap_err().to_string();
        assert!(err.contains("V.csv"), "{err}");
    }
}
