//! Ridders' extrapolated central differences.

/// Derivative of `f` at `x` from an initial step `h0`, with the tableau's
/// error estimate.
pub fn ridders<F: Fn(f64) -> f64>(f: F, x: f64, h0: f64) -> (f64, f64) {
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 10;
    const SAFE: f64 = 2.0;
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut h = h0;
    a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..NTAB {
        h /= CON;
        a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= SAFE * err {
            break;
        }
    }
    (best, err)
}

/// Plain central difference.
pub fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_smooth_functions() {
        let (d, e) = ridders(|x: f64| x.sin() * x.exp(), 0.7, 0.1);
        let exact = 0.7f64.exp() * (0.7f64.sin() + 0.7f64.cos());
        assert!((d - exact).abs() < 1e-11, "{d} {exact}");
        assert!(e < 1e-9);
    }

    #[test]
    fn central_is_second_order() {
        let f = |x: f64| x.powi(5);
        let e1 = (central(f, 1.0, 1e-2) - 5.0).abs();
        let e2 = (central(f, 1.0, 5e-3) - 5.0).abs();
        assert!(((e1 / e2).log2() - 2.0).abs() < 0.05);
    }
}
