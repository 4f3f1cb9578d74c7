//! Truncated Taylor series arithmetic.
//!
//! A `Jet<N>` holds `c[k] = f^(k)(x0) / k!` for `k < N`. Arithmetic on jets
//! propagates derivatives exactly up to the truncation order, which is how
//! every closed-form profile in the crate produces its derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub c: [f64; N],
}

impl<const N: usize> Default for Jet<N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const N: usize> Jet<N> {
    pub const fn zero() -> Self {
        Jet { c: [0.0; N] }
    }

    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Jet { c }
    }

    /// The identity function expanded at `x0`.
    pub fn var(x0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = x0;
        if N > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn from_derivs(d: &[f64]) -> Self {
        let mut c = [0.0; N];
        let mut fact = 1.0;
        for k in 0..N.min(d.len()) {
            if k > 0 {
                fact *= k as f64;
            }
            c[k] = d[k] / fact;
        }
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn deriv(&self, k: usize) -> f64 {
        if k >= N {
            return 0.0;
        }
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        self.c[k] * fact
    }

    /// Jet of the derivative; the top coefficient is lost.
    pub fn differentiate(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N.saturating_sub(1) {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c }
    }

    /// Jet of an antiderivative with the given constant term.
    pub fn integrate(&self, c0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = c0;
        for k in 1..N {
            c[k] = self.c[k - 1] / k as f64;
        }
        Jet { c }
    }

    /// Jet of `x ↦ f(-x)` expanded at `-x0`.
    pub fn mirrored(&self) -> Self {
        let mut c = self.c;
        for (k, v) in c.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
        Jet { c }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        for v in c.iter_mut() {
            *v *= s;
        }
        Jet { c }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut c = self.c;
        c[0] += s;
        Jet { c }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn exp(&self) -> Self {
        let mut e = [0.0; N];
        e[0] = self.c[0].exp();
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Jet { c: e }
    }

    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut l = [0.0; N];
        l[0] = a0.ln();
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * l[j] * self.c[k - j];
            }
            l[k] = (self.c[k] - s / k as f64) / a0;
        }
        Jet { c: l }
    }

    /// `self^alpha` for a positive constant term.
    pub fn powf(&self, alpha: f64) -> Self {
        let a0 = self.c[0];
        let mut p = [0.0; N];
        p[0] = a0.powf(alpha);
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += (alpha * j as f64 - (k - j) as f64) * self.c[j] * p[k - j];
            }
            p[k] = s / (k as f64 * a0);
        }
        Jet { c: p }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Jet::constant(1.0);
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = [0.0; N];
        let mut c = [0.0; N];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..N {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.c[j];
                ss += ja * c[k - j];
                cc += ja * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    /// Re-expand a shorter or longer jet; missing orders are zero.
    pub fn resize<const M: usize>(&self) -> Jet<M> {
        let mut c = [0.0; M];
        let n = N.min(M);
        c[..n].copy_from_slice(&self.c[..n]);
        Jet { c }
    }

    /// Evaluate the truncated polynomial at offset `h`.
    /// `self ∘ inner`, for `self` expanded at `inner.value()`.
    pub fn compose(&self, inner: &Self) -> Self {
        let d = inner.add_scalar(-inner.value());
        let mut acc = Self::constant(self.c[N - 1]);
        for k in (0..N - 1).rev() {
            acc = (acc * d).add_scalar(self.c[k]);
        }
        acc
    }

    pub fn eval_offset(&self, h: f64) -> f64 {
        let mut acc = 0.0;
        for k in (0..N).rev() {
            acc = acc * h + self.c[k];
        }
        acc
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.c;
        for k in 0..N {
            c[k] += o.c[k];
        }
        Jet { c }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.c;
        for k in 0..N {
            c[k] -= o.c[k];
        }
        Jet { c }
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for i in 0..N {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let b0 = o.c[0];
        let mut q = [0.0; N];
        for k in 0..N {
            let mut s = self.c[k];
            for i in 1..=k {
                s -= o.c[i] * q[k - i];
            }
            q[k] = s / b0;
        }
        Jet { c: q }
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(self, s: f64) -> Self {
        self.add_scalar(s)
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(self, s: f64) -> Self {
        self.add_scalar(-s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type J = Jet<6>;

    #[test]
    fn exp_matches_series() {
        let j = J::var(0.3).exp();
        for k in 0..6 {
            assert!((j.deriv(k) - 0.3f64.exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn powf_derivatives() {
        let a = -2.0 / 3.0;
        let x = 1.7f64;
        let j = J::var(x).powf(a);
        let mut coeff = 1.0;
        for k in 0..6 {
            let exact = coeff * x.powf(a - k as f64);
            assert!((j.deriv(k) - exact).abs() < 1e-12 * exact.abs().max(1.0), "k={k}");
            coeff *= a - k as f64;
        }
    }

    #[test]
    fn sin_cos_and_ln() {
        let x = 0.7f64;
        let (s, c) = J::var(x).sin_cos();
        assert!((s.deriv(3) + x.cos()).abs() < 1e-14);
        assert!((c.deriv(2) + x.cos()).abs() < 1e-14);
        let l = J::var(x).ln();
        assert!((l.deriv(3) - 2.0 / x.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = J::var(0.4).exp() + 2.0;
        let b = J::var(0.4).sin() + 3.0;
        let q = (a * b) / b;
        for k in 0..6 {
            assert!((q.c[k] - a.c[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn mirror_and_differentiate() {
        let j = J::var(0.2).powi(3);
        let d = j.differentiate();
        assert!((d.value() - 3.0 * 0.04).abs() < 1e-15);
        let m = J::var(-0.2).powi(3).mirrored();
        // (-x)^3 at x=0.2 expands like -x^3
        assert!((m.c[1] + 3.0 * 0.04).abs() < 1e-15);
    }

    #[test]
    fn composition_matches_direct_expansion() {
        // exp(sin x) at x = 0.3
        let inner = J::var(0.3).sin();
        let outer = J::var(inner.value()).exp();
        let direct = J::var(0.3).sin().exp();
        let c = outer.compose(&inner);
        for k in 0..6 {
            assert!((c.c[k] - direct.c[k]).abs() < 1e-14, "{k}");
        }
    }
}
