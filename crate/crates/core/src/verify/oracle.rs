//! Densities of the scalar free wave `φ = h(t−r) − h(t+r)`, `h(y) = yⁿ`.

use super::fields::TildeFields;
use super::report::CheckResult;
use super::sweep::{tolerance_sweep, Sweep};
use crate::cone::{HomogeneousField, PJet, Parity};

fn field(degree: f64, parity: Parity, f: impl Fn(PJet) -> PJet + Send + Sync + 'static) -> HomogeneousField {
    HomogeneousField::from_fn(degree, parity, f)
}

/// `φ`, `∂_tφ`, `∂_rφ` at `t = 1` as jets in `ρ`.
fn wave(n: u32, x: PJet) -> (PJet, PJet, PJet) {
    if n == 0 {
        return (PJet::zero(), PJet::zero(), PJet::zero());
    }
    let a = x.add_scalar(1.0);
    let b = (-x).add_scalar(1.0);
    let k = n as f64;
    (
        b.powi(n) - a.powi(n),
        (b.powi(n - 1) - a.powi(n - 1)).scale(k),
        (b.powi(n - 1) + a.powi(n - 1)).scale(-k),
    )
}

/// `n = 0` is the constant `h`, for which `φ ≡ 0`.
/// `M̃ = φ²`, `Ẽ_tt = φ_t²`, `Ẽ_rr = φ_r²`, `Ẽ_tr = φ_tφ_r`,
/// `e_± = ½(φ_t ± φ_r)²`, `V = 0`.
pub fn scalar_oracle_densities(n: u32, p: f64) -> TildeFields {
    let dm = 2.0 * n as f64;
    let de = dm - 2.0;
    let sq = |w: fn(&(PJet, PJet, PJet)) -> PJet| {
        move |x: PJet| {
            let v = w(&wave(n, x));
            v * v
        }
    };
    TildeFields {
        p,
        m_tilde: field(dm, Parity::Even, sq(|w| w.0)),
        e_tt: field(de, Parity::Even, sq(|w| w.1)),
        e_rr: field(de, Parity::Even, sq(|w| w.2)),
        e_tr: field(de, Parity::Odd, move |x| {
            let w = wave(n, x);
            w.1 * w.2
        }),
        e_plus: field(de, Parity::Even, move |x| {
            let w = wave(n, x);
            let s = w.1 + w.2;
            (s * s).scale(0.5)
        }),
        e_minus: field(de, Parity::Even, move |x| {
            let w = wave(n, x);
            let s = w.1 - w.2;
            (s * s).scale(0.5)
        }),
        v: HomogeneousField::zero(de, Parity::Even),
    }
}

/// The identities on the free waves `n = 2, 3`, plus `e₊ = 8(t+r)²` for `n = 2`.
pub fn oracle_check(p: f64, sweep: &Sweep) -> CheckResult {
    const TOL: f64 = 1e-12;
    let pts = sweep.points(|_| true);
    let mut parts = Vec::new();
    for n in [2u32, 3] {
        let f = scalar_oracle_densities(n, p);
        let unit = |pt: crate::cone::ConePoint| {
            let j: PJet = f.e_plus.jet(pt.rho());
            j.value().abs().max(j.deriv(1).abs()).max(1.0)
        };
        parts.push(tolerance_sweep(&pts, TOL, &format!("n={n} storp"), |pt| {
            (f.storp(pt), unit(pt))
        }));
        parts.push(tolerance_sweep(&pts, TOL, &format!("n={n} notnew0"), |pt| {
            (f.notnew0(pt), unit(pt))
        }));
        parts.push(tolerance_sweep(&pts, TOL, &format!("n={n} notnew1"), |pt| {
            (f.notnew1(pt), unit(pt))
        }));
        parts.push(tolerance_sweep(&pts, TOL, &format!("n={n} ttrr"), |pt| f.ttrr(pt)));
        parts.push(tolerance_sweep(&pts, TOL, &format!("n={n} rrtt"), |pt| f.rrtt(pt)));
        parts.push(tolerance_sweep(&pts, TOL, &format!("n={n} vdef"), |pt| f.vdef(pt)));
    }
    let f = scalar_oracle_densities(2, p);
    parts.push(tolerance_sweep(&pts, TOL, "n=2 e+ = 8(t+r)^2", |pt| {
        let want = 8.0 * (pt.t + pt.r).powi(2);
        ((f.e_plus.eval(pt) - want).abs(), want.max(1.0))
    }));
    CheckResult::all(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConePoint;

    #[test]
    fn quadratic_wave_values() {
        let f = scalar_oracle_densities(2, 7.0);
        let pt = ConePoint { t: 1.5, r: 0.5 };
        // φ = −4tr
        assert!((f.m_tilde.eval(pt) - 9.0).abs() < 1e-12);
        assert!((f.e_plus.eval(pt) - 32.0).abs() < 1e-12);
        assert!((f.e_tr.eval(pt) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn constant_h_gives_zero_densities() {
        let f = scalar_oracle_densities(0, 7.0);
        let pt = ConePoint { t: 2.0, r: 1.0 };
        for g in [&f.m_tilde, &f.e_tt, &f.e_rr, &f.e_tr, &f.e_plus, &f.e_minus] {
            assert_eq!(g.eval(pt), 0.0);
        }
    }
}
