//! Verification report entries and their JSON form.

use serde::Serialize;
use std::collections::BTreeMap;

/// One check. `margin` is signed slack: non-negative when the check holds,
/// except for strict checks which additionally need it positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub pass: bool,
    pub margin: f64,
    pub worst_t: f64,
    pub worst_r: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn new(pass: bool, margin: f64, worst_t: f64, worst_r: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            pass,
            margin,
            worst_t,
            worst_r,
            detail: detail.into(),
        }
    }

    /// `value ≤ limit`.
    pub fn at_most(value: f64, limit: f64, at: (f64, f64), detail: impl Into<String>) -> Self {
        let margin = limit - value;
        Self::new(margin >= 0.0, margin, at.0, at.1, detail)
    }

    /// `value ≥ limit`.
    pub fn at_least(value: f64, limit: f64, at: (f64, f64), detail: impl Into<String>) -> Self {
        let margin = value - limit;
        Self::new(margin >= 0.0, margin, at.0, at.1, detail)
    }

    /// `value > limit`.
    pub fn above(value: f64, limit: f64, at: (f64, f64), detail: impl Into<String>) -> Self {
        let margin = value - limit;
        Self::new(margin > 0.0, margin, at.0, at.1, detail)
    }

    /// Combines entries: fails if any fails, keeps the smallest margin.
    pub fn all(parts: Vec<CheckResult>) -> Self {
        let mut out = parts[0].clone();
        let mut details = Vec::with_capacity(parts.len());
        for p in &parts {
            details.push(p.detail.clone());
            if less(p.margin, out.margin) {
                out.margin = p.margin;
                out.worst_t = p.worst_t;
                out.worst_r = p.worst_r;
            }
        }
        out.pass = parts.iter().all(|p| p.pass);
        out.detail = details.join("; ");
        out
    }
}

fn less(a: f64, b: f64) -> bool {
    a < b || (a.is_nan() && !b.is_nan())
}

/// Running maximum with its location; NaN counts as worse than any number.
#[derive(Clone, Copy, Debug)]
pub struct Worst {
    pub value: f64,
    pub t: f64,
    pub r: f64,
}

impl Default for Worst {
    fn default() -> Self {
        Worst {
            value: f64::NEG_INFINITY,
            t: 1.0,
            r: 0.0,
        }
    }
}

impl Worst {
    pub fn push(&mut self, value: f64, t: f64, r: f64) {
        if value > self.value || (value.is_nan() && !self.value.is_nan()) {
            *self = Worst { value, t, r };
        }
    }

    pub fn merge(mut self, o: Worst) -> Worst {
        self.push(o.value, o.t, o.r);
        self
    }

    pub fn at(&self) -> (f64, f64) {
        (self.t, self.r)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Report {
    pub entries: BTreeMap<String, CheckResult>,
}

impl Report {
    pub fn insert(&mut self, name: &str, r: CheckResult) {
        self.entries.insert(name.to_string(), r);
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.entries.get(name)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.values().all(|e| e.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, e)| !e.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_combination() {
        let a = CheckResult::at_most(1e-9, 1e-7, (1.0, 0.2), "a");
        let b = CheckResult::above(0.0, 0.0, (2.0, 0.3), "b");
        assert!(a.pass && !b.pass);
        let c = CheckResult::all(vec![a, b]);
        assert!(!c.pass);
        assert_eq!(c.worst_t, 2.0);
        assert_eq!(c.detail, "a; b");
    }

    #[test]
    fn nan_is_worst() {
        let mut w = Worst::default();
        w.push(3.0, 1.0, 0.1);
        w.push(f64::NAN, 1.0, 0.2);
        w.push(5.0, 1.0, 0.3);
        assert!(w.value.is_nan());
        assert_eq!(w.r, 0.2);
    }

    #[test]
    fn json_has_one_key_per_check() {
        let mut r = Report::default();
        r.insert("x", CheckResult::at_least(1.0, 0.0, (1.0, 0.0), ""));
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["x"]["pass"], true);
        assert_eq!(v["x"]["margin"], 1.0);
    }
}
