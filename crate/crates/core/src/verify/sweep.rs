//! Evaluation points and parallel folds for pointwise checks.

use super::report::{CheckResult, Worst};
use crate::cone::ConePoint;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Golden-ratio fractions `frac(k φ)`, `k = 1..=n`.
pub fn golden(n: usize) -> Vec<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    (1..=n).map(|k| (k as f64 * g).fract()).collect()
}

/// Points of both bands `|ρ| ∈ (1−δ, 1)` that do not depend on the grid.
pub fn band_probes(delta: f64, per_side: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * per_side);
    for f in golden(per_side) {
        let rho = 1.0 - delta * f;
        out.push(-rho);
        out.push(rho);
    }
    out
}

/// Extra points for parity checks, away from every residual node.
pub fn parity_probes() -> Vec<f64> {
    golden(32).into_iter().map(|f| 0.95 * (2.0 * f - 1.0)).collect()
}

/// The `t = 1` grid together with a subsample carried to random scales.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub grid: Vec<f64>,
    pub scales: Vec<f64>,
    stride: usize,
}

impl Sweep {
    pub fn new(grid: Vec<f64>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scales = (0..10).map(|_| rng.gen_range(-4f64.ln()..4f64.ln()).exp()).collect();
        Sweep {
            grid,
            scales,
            stride: 37,
        }
    }

    /// Points `(λ, λρ)` for `ρ` passing `keep`: every grid node at `λ = 1`,
    /// a strided subsample at each random scale.
    pub fn points(&self, keep: impl Fn(f64) -> bool) -> Vec<ConePoint> {
        let mut out: Vec<ConePoint> = self
            .grid
            .iter()
            .filter(|r| keep(**r))
            .map(|&r| ConePoint { t: 1.0, r })
            .collect();
        for &l in &self.scales {
            out.extend(
                self.grid
                    .iter()
                    .filter(|r| keep(**r))
                    .step_by(self.stride)
                    .map(|&r| ConePoint { t: l, r: l * r }),
            );
        }
        out
    }

    pub fn unit_points(&self, keep: impl Fn(f64) -> bool) -> Vec<ConePoint> {
        self.grid
            .iter()
            .filter(|r| keep(**r))
            .map(|&r| ConePoint { t: 1.0, r })
            .collect()
    }
}

/// Evaluates `f` in parallel and folds in point order.
pub fn eval_all<T: Send, F: Fn(ConePoint) -> T + Sync>(pts: &[ConePoint], f: F) -> Vec<T> {
    pts.par_iter().map(|p| f(*p)).collect()
}

/// Residual sweep: `f` returns `(residual, scale)` and the check demands
/// `residual ≤ tol · scale` at every point.
pub fn tolerance_sweep<F>(pts: &[ConePoint], tol: f64, what: &str, f: F) -> CheckResult
where
    F: Fn(ConePoint) -> (f64, f64) + Sync,
{
    let vals = eval_all(pts, &f);
    let mut worst = Worst::default();
    let mut max_res = 0.0f64;
    let mut max_rel = 0.0f64;
    for (pt, (res, scale)) in pts.iter().zip(vals) {
        worst.push(res - tol * scale, pt.t, pt.r);
        max_res = max_res.max(res);
        max_rel = max_rel.max(res / scale);
        if res.is_nan() {
            max_res = f64::NAN;
        }
    }
    let margin = -worst.value;
    CheckResult::new(
        margin >= 0.0,
        margin,
        worst.t,
        worst.r,
        format!(
            "{what}: max {max_res:.3e}, max relative {max_rel:.3e}, tol {tol:.0e}, {} points",
            pts.len()
        ),
    )
}

/// Sweep of a quantity that must stay above `floor` (strictly if `strict`).
pub fn lower_bound_sweep<F>(pts: &[ConePoint], floor: f64, strict: bool, what: &str, f: F) -> CheckResult
where
    F: Fn(ConePoint) -> f64 + Sync,
{
    let vals = eval_all(pts, &f);
    let mut worst = Worst::default();
    for (pt, v) in pts.iter().zip(vals) {
        worst.push(floor - v, pt.t, pt.r);
    }
    let min = -worst.value + floor;
    let margin = min - floor;
    let pass = if strict { margin > 0.0 } else { margin >= 0.0 };
    CheckResult::new(
        pass,
        margin,
        worst.t,
        worst.r,
        format!("{what}: min {min:.6e}, {} points", pts.len()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_lie_in_the_bands() {
        for r in band_probes(0.05, 64) {
            assert!(r.abs() > 0.95 && r.abs() < 1.0);
        }
        assert!(parity_probes().iter().all(|r| r.abs() < 0.95));
    }

    #[test]
    fn sweeps_are_deterministic() {
        let s = Sweep::new(vec![-0.5, 0.1, 0.5], 7);
        assert_eq!(s.scales, Sweep::new(vec![], 7).scales);
        let pts = s.points(|_| true);
        assert_eq!(pts.len(), 3 + 10);
        let r = tolerance_sweep(&pts, 1e-3, "x", |p| (p.r.abs() * 1e-4, 1.0));
        assert!(r.pass);
        let l = lower_bound_sweep(&pts, 0.0, true, "y", |p| p.t);
        assert!(l.pass);
    }
}
