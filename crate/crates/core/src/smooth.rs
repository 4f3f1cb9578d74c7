//! Compactly supported smooth building blocks shared by the constructions.

use crate::jet::Jet;

/// `exp(-1/u)` for `u > 0`, zero otherwise.
fn flat_exp<const N: usize>(u: Jet<N>) -> Jet<N> {
    if u.value() <= 0.0 {
        return Jet::zero();
    }
    let e = (-u.recip()).exp();
    if !e.value().is_finite() {
        return Jet::zero();
    }
    e
}

/// Smooth step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, flat to all orders at both ends.
pub fn step<const N: usize>(u: Jet<N>) -> Jet<N> {
    let u0 = u.value();
    if u0 <= 0.0 {
        return Jet::zero();
    }
    if u0 >= 1.0 {
        return Jet::constant(1.0);
    }
    let a = flat_exp(u);
    let b = flat_exp(-u + 1.0);
    if a.value() == 0.0 {
        return Jet::zero();
    }
    if b.value() == 0.0 {
        return Jet::constant(1.0);
    }
    a / (a + b)
}

pub fn step_value(u: f64) -> f64 {
    step::<1>(Jet::constant(u)).value()
}

/// Standard mollifier `exp(1 - 1/(1-y²))` on `|y| < 1`, peak value 1 at `y = 0`.
pub fn mollifier<const N: usize>(y: Jet<N>) -> Jet<N> {
    let z = -(y * y) + 1.0;
    if z.value() <= 0.0 {
        return Jet::zero();
    }
    let e = (-z.recip() + 1.0).exp();
    if !e.value().is_finite() || e.value() == 0.0 {
        return Jet::zero();
    }
    e
}

pub fn mollifier_value(y: f64) -> f64 {
    mollifier::<1>(Jet::constant(y)).value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_endpoints_and_symmetry() {
        assert_eq!(step_value(-0.1), 0.0);
        assert_eq!(step_value(1.2), 1.0);
        for &u in &[0.1, 0.25, 0.4, 0.5] {
            assert!((step_value(u) + step_value(1.0 - u) - 1.0).abs() < 1e-15);
        }
        let d = step::<3>(Jet::var(0.5));
        assert!((d.deriv(1) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn step_slope_is_at_most_two() {
        let mut worst: f64 = 0.0;
        for i in 1..2000 {
            let u = i as f64 / 2000.0;
            worst = worst.max(step::<2>(Jet::var(u)).deriv(1));
        }
        assert!(worst <= 2.0 + 1e-12, "{worst}");
    }

    #[test]
    fn mollifier_derivative_matches_formula() {
        let y = 0.37f64;
        let j = mollifier::<2>(Jet::var(y));
        let z = 1.0 - y * y;
        let exact = (1.0 - 1.0 / z).exp() * (-2.0 * y / (z * z));
        assert!((j.deriv(1) - exact).abs() < 1e-14);
        assert_eq!(mollifier_value(1.0), 0.0);
        assert_eq!(mollifier_value(0.0), 1.0);
    }
}
