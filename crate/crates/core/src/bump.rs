//! The window `ψ` on `[0, W]`, `W = 0.01`, and the curve
//! `f(t)(x) = t^q ψ(x − log t)` in `L²(ℝ)`.

use crate::error::{ForgeError, Result};
use crate::jet::Jet;
use crate::params::Params;
use crate::quad::GaussRule;
use crate::smooth::mollifier;
use nalgebra::{Matrix2, Matrix4};
use std::f64::consts::PI;

/// Support width of `ψ`.
pub const WIDTH: f64 = 0.01;

/// Panels of the composite rule used on window overlaps.
const PANELS: usize = 4;

#[derive(Clone, Debug)]
pub struct BumpCurve {
    pub a: f64,
    pub k: u32,
    /// Mixing angle between harmonics `k` and `k + 1`.
    pub theta: f64,
    pub q_f: f64,
    /// Achieved `∫ψ²`.
    pub mass: f64,
    /// Achieved `∫ψ′²`.
    pub dirichlet: f64,
    /// Requested `∫ψ²`.
    pub mass_target: f64,
    /// Whether `∫ψ² = δ` together with `‖f′(1)‖² = 1/2` was achievable.
    pub feasible: bool,
    rule: GaussRule,
}

/// Unnormalized window shape with unit amplitude.
fn shape<const N: usize>(k: u32, theta: f64, x: Jet<N>) -> Jet<N> {
    let xv = x.value();
    if xv <= 0.0 || xv >= WIDTH {
        return Jet::zero();
    }
    let w = mollifier(x.scale(2.0 / WIDTH).add_scalar(-1.0));
    let s1 = x.scale(k as f64 * PI / WIDTH).sin();
    let s2 = x.scale((k + 1) as f64 * PI / WIDTH).sin();
    w * (s1.scale(theta.cos()) + s2.scale(theta.sin()))
}

fn composite<F: FnMut(f64) -> f64>(rule: &GaussRule, a: f64, b: f64, f: F) -> f64 {
    rule.integrate_composite(a, b, PANELS, f)
}

/// `(∫h², ∫h′²)` for the unit-amplitude shape.
fn moments(rule: &GaussRule, k: u32, theta: f64) -> (f64, f64) {
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    let h = WIDTH / PANELS as f64;
    for i in 0..PANELS {
        let lo = i as f64 * h;
        for (x, w) in rule.mapped(lo, lo + h) {
            let j = shape::<2>(k, theta, Jet::var(x));
            m0 += w * j.c[0] * j.c[0];
            m1 += w * j.c[1] * j.c[1];
        }
    }
    (m0, m1)
}

/// Rayleigh ratio `∫h′²/∫h²` of harmonic `k` under the window.
pub fn rayleigh_ratio(rule: &GaussRule, k: u32) -> f64 {
    let (m0, m1) = moments(rule, k, 0.0);
    m1 / m0
}

/// Coefficients `c_j` with `f⁽ᵏ⁾(t)(x) = t^(q−k) Σ c_j ψ⁽ʲ⁾(x − log t)`.
pub fn derivative_coeffs(q: f64, k: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for n in 0..k {
        let mut next = vec![0.0; c.len() + 1];
        for (j, &cj) in c.iter().enumerate() {
            next[j] += (q - n as f64) * cj;
            next[j + 1] -= cj;
        }
        c = next;
    }
    c
}

impl BumpCurve {
    pub fn new(params: &Params) -> Result<Self> {
        if !(params.delta > 0.0 && params.delta < 0.25 + 1e-15) {
            return Err(ForgeError::Params(format!(
                "bump needs delta in (0, 1/4), got {}",
                params.delta
            )));
        }
        let rule = GaussRule::new(params.n_quad.max(64));
        let q = params.q_f();
        let delta = params.delta;
        // With ∫ψ² = δ, ‖f′(1)‖² = 1/2 asks for ratio (1/2 − q²δ)/δ.
        let target = (0.5 - q * q * delta) / delta;
        let r1 = rayleigh_ratio(&rule, 1);
        let (k, theta, feasible) = if target >= r1 {
            let mut k = 1u32;
            while rayleigh_ratio(&rule, k + 1) < target {
                k += 1;
                assert!(k < 1 << 20, "harmonic search diverged");
            }
            let ratio_at = |th: f64| {
                let (m0, m1) = moments(&rule, k, th);
                m1 / m0 - target
            };
            let (mut lo, mut hi) = (0.0, 0.5 * PI);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if ratio_at(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (k, 0.5 * (lo + hi), true)
        } else {
            (1, 0.0, false)
        };
        let (m0, m1) = moments(&rule, k, theta);
        // Infeasible case: keep ‖f′(1)‖² = 1/2 and let the mass follow.
        let mass = if feasible { delta } else { 0.5 / (m1 / m0 + q * q) };
        let a = (mass / m0).sqrt();
        let mut curve = BumpCurve {
            a,
            k,
            theta,
            q_f: q,
            mass: 0.0,
            dirichlet: 0.0,
            mass_target: delta,
            feasible,
            rule,
        };
        let (mm, md) = curve.norms();
        curve.mass = mm;
        curve.dirichlet = md;
        Ok(curve)
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    /// Jet of `ψ` at `x`; `N` orders are carried.
    pub fn psi<const N: usize>(&self, x: f64) -> Jet<N> {
        shape::<N>(self.k, self.theta, Jet::var(x)).scale(self.a)
    }

    pub fn psi_derivs(&self, x: f64) -> [f64; 3] {
        let j = self.psi::<3>(x);
        [j.deriv(0), j.deriv(1), j.deriv(2)]
    }

    /// `(∫ψ², ∫ψ′²)` by quadrature.
    pub fn norms(&self) -> (f64, f64) {
        let m0 = composite(&self.rule, 0.0, WIDTH, |x| self.psi::<1>(x).c[0].powi(2));
        let m1 = composite(&self.rule, 0.0, WIDTH, |x| self.psi::<2>(x).c[1].powi(2));
        (m0, m1)
    }

    /// `f⁽ⁱ⁾(t)` evaluated at the point `x`.
    pub fn curve_value(&self, i: usize, t: f64, x: f64) -> f64 {
        let c = derivative_coeffs(self.q_f, i);
        let j = self.psi::<4>(x - t.ln());
        let mut s = 0.0;
        for (n, cn) in c.iter().enumerate() {
            s += cn * j.deriv(n);
        }
        t.powf(self.q_f - i as f64) * s
    }

    /// `⟨f⁽ⁱ⁾(s), f⁽ʲ⁾(t)⟩` for derivative orders up to two.
    pub fn curve_inner(&self, i: usize, j: usize, s: f64, t: f64) -> Result<f64> {
        if i > 2 || j > 2 {
            return Err(ForgeError::Capability(format!(
                "curve inner products support derivative orders up to 2, got ({i}, {j})"
            )));
        }
        if !(s > 0.0 && t > 0.0) {
            return Err(ForgeError::Params(format!(
                "curve parameters must be positive, got s={s}, t={t}"
            )));
        }
        let (ls, lt) = (s.ln(), t.ln());
        let lo = ls.max(lt);
        let hi = ls.min(lt) + WIDTH;
        if hi <= lo {
            return Ok(0.0);
        }
        let ci = derivative_coeffs(self.q_f, i);
        let cj = derivative_coeffs(self.q_f, j);
        let v = composite(&self.rule, lo, hi, |x| {
            let a = self.psi::<3>(x - ls);
            let b = self.psi::<3>(x - lt);
            let fa: f64 = ci.iter().enumerate().map(|(n, c)| c * a.deriv(n)).sum();
            let fb: f64 = cj.iter().enumerate().map(|(n, c)| c * b.deriv(n)).sum();
            fa * fb
        });
        Ok(s.powf(self.q_f - i as f64) * t.powf(self.q_f - j as f64) * v)
    }

    fn inner(&self, i: usize, j: usize, s: f64, t: f64) -> f64 {
        self.curve_inner(i, j, s, t).expect("orders and parameters are valid")
    }

    /// Gram matrix of `{f(s), f(t), f′(s), f′(t)}`.
    pub fn gram4(&self, s: f64, t: f64) -> Matrix4<f64> {
        let v = [(0, s), (0, t), (1, s), (1, t)];
        Matrix4::from_fn(|a, b| self.inner(v[a].0, v[b].0, v[a].1, v[b].1))
    }

    pub fn gram4_det(&self, s: f64, t: f64) -> f64 {
        self.gram4(s, t).determinant()
    }

    /// Determinant of the Gram matrix of `{f(t), f′(t)}`.
    pub fn gram2_det(&self, t: f64) -> f64 {
        let g = Matrix2::new(
            self.inner(0, 0, t, t),
            self.inner(0, 1, t, t),
            self.inner(1, 0, t, t),
            self.inner(1, 1, t, t),
        );
        g.determinant()
    }

    /// `(‖f″(1)‖ − √2/(p−1), ⟨f′(1), f″(1)⟩ + 1/(p−1))`.
    pub fn second_derivative_margins(&self, p: f64) -> (f64, f64) {
        let n2 = self.inner(2, 2, 1.0, 1.0).sqrt();
        let c12 = self.inner(1, 2, 1.0, 1.0);
        (n2 - 2f64.sqrt() / (p - 1.0), c12 + 1.0 / (p - 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> BumpCurve {
        BumpCurve::new(&Params::new(7.0, 0.05, 10.0, 256).unwrap()).unwrap()
    }

    #[test]
    fn derivative_coefficients() {
        let q = 2.0 / 3.0;
        assert_eq!(derivative_coeffs(q, 1), vec![q, -1.0]);
        let c2 = derivative_coeffs(q, 2);
        assert!((c2[0] - q * (q - 1.0)).abs() < 1e-15);
        assert!((c2[1] + (2.0 * q - 1.0)).abs() < 1e-15);
        assert_eq!(c2[2], 1.0);
    }

    #[test]
    fn support_is_exact() {
        let c = curve();
        assert_eq!(c.psi::<3>(-1e-9).value(), 0.0);
        assert_eq!(c.psi::<3>(0.0100001).value(), 0.0);
        assert!(c.psi::<1>(0.003).value() != 0.0);
    }

    #[test]
    fn null_energy_normalisation() {
        let c = curve();
        for &t in &[0.5, 1.0, 2.0] {
            let v = c.curve_inner(1, 1, t, t).unwrap() * t.powf(2.0 / 3.0);
            assert!((v - 0.5).abs() < 1e-10, "t={t}: {v}");
        }
    }

    #[test]
    fn disjoint_supports_give_zero() {
        let c = curve();
        assert_eq!(c.curve_inner(0, 0, 1.0, 1.02).unwrap(), 0.0);
        assert!(c.curve_inner(3, 0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rayleigh_ratio_grows() {
        let rule = GaussRule::new(96);
        let r: Vec<f64> = (1..6).map(|k| rayleigh_ratio(&rule, k)).collect();
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        assert!(r[0] > (PI / WIDTH).powi(2));
    }

    #[test]
    fn tiny_delta_is_feasible() {
        let p = Params::new(7.0, 1e-6, 10.0, 256).unwrap();
        let c = BumpCurve::new(&p).unwrap();
        assert!(c.feasible);
        assert!((c.mass - 1e-6).abs() < 1e-15);
        let f1 = c.curve_inner(1, 1, 1.0, 1.0).unwrap();
        assert!((f1 - 0.5).abs() < 1e-10, "{f1}");
    }
}
