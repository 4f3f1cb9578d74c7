//! `e₊` on the left half of the cone.
//!
//! With `x = 1 + ρ`: the power law `x^α` for `x ≥ δ`, the power law plus a
//! mollifier bump of height `4Aδ^α` on `[δ/2, δ]`, and a clamped power
//! `σ(x)^α` below `δ/2`, where `σ` flattens to `δ/4` at the tip.

use crate::cone::{PJet, Profile};
use crate::error::{ForgeError, Result};
use crate::jet::Jet;
use crate::params::Params;
use crate::quad::GaussRule;
use crate::smooth::{mollifier, step};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EplusLeft {
    pub alpha: f64,
    pub delta: f64,
    pub height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LeftPiece {
    Clamp,
    Bump,
    Power,
}

#[derive(Clone, Debug)]
pub struct EplusLeftReport {
    /// `min e₊ / δ^α` on the band.
    pub c1: f64,
    /// `max e₊ / (A δ^α)` on the band.
    pub c2: f64,
    /// `max |∂_ρ e₊| / (A δ^(α−1))` on the band.
    pub c3: f64,
    pub big_integral: f64,
    pub big_required: f64,
    /// Largest relative mismatch of orders 0..=2 between adjacent pieces.
    pub junction_jump: f64,
    /// Centred second difference against the analytic value at `−1+δ`.
    pub fd_second_derivative_error: f64,
}

impl EplusLeft {
    pub fn new(params: &Params) -> Self {
        let alpha = params.alpha();
        EplusLeft {
            alpha,
            delta: params.delta,
            height: 4.0 * params.amplitude * params.delta.powf(alpha),
        }
    }

    pub fn piece_at(&self, rho: f64) -> LeftPiece {
        let x = 1.0 + rho;
        if x >= self.delta {
            LeftPiece::Power
        } else if x >= 0.5 * self.delta {
            LeftPiece::Bump
        } else {
            LeftPiece::Clamp
        }
    }

    pub fn piece_jet<const N: usize>(&self, piece: LeftPiece, rho: Jet<N>) -> Jet<N> {
        let d = self.delta;
        let x = rho.add_scalar(1.0);
        match piece {
            LeftPiece::Power => x.powf(self.alpha),
            LeftPiece::Bump => {
                let y = x.add_scalar(-0.75 * d).scale(4.0 / d);
                x.powf(self.alpha) + mollifier(y).scale(self.height)
            }
            LeftPiece::Clamp => {
                let s = step(x.scale(2.0 / d));
                let sigma = x + (-s).add_scalar(1.0).scale(0.25 * d);
                sigma.powf(self.alpha)
            }
        }
    }

    pub fn jet_at<const N: usize>(&self, rho: Jet<N>) -> Jet<N> {
        self.piece_jet(self.piece_at(rho.value()), rho)
    }

    pub fn value(&self, rho: f64) -> f64 {
        self.jet_at::<1>(Jet::constant(rho)).value()
    }

    /// `(e₊, ∂_ρ e₊)` at `ρ`.
    pub fn value_slope(&self, rho: f64) -> (f64, f64) {
        let j = self.jet_at::<2>(Jet::var(rho));
        (j.c[0], j.c[1])
    }
}

impl Profile for EplusLeft {
    fn jet(&self, rho: f64) -> PJet {
        self.jet_at(Jet::var(rho))
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Builds the left profile and verifies its design properties.
pub fn build_eplus_left(params: &Params) -> Result<(EplusLeft, EplusLeftReport)> {
    let e = EplusLeft::new(params);
    let d = params.delta;
    let a = params.amplitude;
    let alpha = e.alpha;
    let lo = -1.0;
    let top = -1.0 + d;

    // Power law exactly away from the band.
    for i in 0..=64 {
        let rho = top + (0.0 - top) * i as f64 / 64.0;
        let exact = (1.0 + rho).powf(alpha);
        if e.value(rho) != exact {
            return Err(ForgeError::Construction {
                tag: "ea".into(),
                detail: format!("e+ differs from the power law at rho={rho}"),
            });
        }
    }

    let samples = 8192;
    let (mut vmin, mut vmax, mut smax) = (f64::INFINITY, 0.0f64, 0.0f64);
    for i in 0..=samples {
        let rho = lo + (top - lo) * i as f64 / samples as f64;
        let (v, s) = e.value_slope(rho);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
        smax = smax.max(s.abs());
        if rho >= -1.0 + 0.5 * d && v < (1.0 + rho).powf(alpha) {
            return Err(ForgeError::Construction {
                tag: "eb".into(),
                detail: format!("e+ below the power law at rho={rho}"),
            });
        }
    }
    let rule = GaussRule::new(48);
    let big_integral = rule.integrate_composite(-1.0 + 0.5 * d, top, 8, |r| e.value(r));
    let big_required = a * d.powf(1.0 + alpha);
    if big_integral < big_required {
        return Err(ForgeError::Construction {
            tag: "big".into(),
            detail: format!("band integral {big_integral} below {big_required}"),
        });
    }
    let c1 = vmin / d.powf(alpha);
    let c2 = vmax / (a * d.powf(alpha));
    let c3 = smax / (a * d.powf(alpha - 1.0));
    if !(c1 > 0.0 && c2.is_finite()) {
        return Err(ForgeError::Construction {
            tag: "ec".into(),
            detail: format!("value constants c1={c1}, c2={c2}"),
        });
    }
    if !c3.is_finite() {
        return Err(ForgeError::Construction {
            tag: "ed".into(),
            detail: format!("slope constant c3={c3}"),
        });
    }

    let mut junction_jump = 0.0f64;
    for (rho, l, r) in [
        (-1.0 + 0.5 * d, LeftPiece::Clamp, LeftPiece::Bump),
        (top, LeftPiece::Bump, LeftPiece::Power),
    ] {
        let jl = e.piece_jet::<3>(l, Jet::var(rho));
        let jr = e.piece_jet::<3>(r, Jet::var(rho));
        for k in 0..3 {
            junction_jump = junction_jump.max(relative_gap(jl.deriv(k), jr.deriv(k)));
        }
    }
    let h = 1e-4 * d;
    let fd = (e.value(top + h) - 2.0 * e.value(top) + e.value(top - h)) / (h * h);
    let exact = e.jet_at::<3>(Jet::var(top)).deriv(2);
    let fd_second_derivative_error = relative_gap(fd, exact);

    Ok((
        e,
        EplusLeftReport {
            c1,
            c2,
            c3,
            big_integral,
            big_required,
            junction_jump,
            fd_second_derivative_error,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Params {
        Params::new(7.0, 0.05, 10.0, 256).unwrap()
    }

    #[test]
    fn power_law_on_the_interior() {
        let (e, _) = build_eplus_left(&params()).unwrap();
        assert!((e.value(-0.5) - 0.5f64.powf(-2.0 / 3.0)).abs() < 1e-15);
        assert!((e.value(-0.5) - 1.58740).abs() < 1e-5);
    }

    #[test]
    fn band_integral_and_constants() {
        let (e, rep) = build_eplus_left(&params()).unwrap();
        assert!(rep.big_integral >= 10.0 * 0.05f64.powf(1.0 / 3.0));
        assert!((rep.big_required - 3.684).abs() < 1e-3);
        assert!(rep.junction_jump < 1e-12);
        // The clamp floors σ at δ/4, so c1 ≥ 2^α relative to δ/2.
        assert!(rep.c1 >= 2f64.powf(-2.0 / 3.0) - 1e-12);
        assert!(e.value(-1.0).is_finite());
    }

    #[test]
    fn clamp_bottoms_out_at_quarter_delta() {
        let e = EplusLeft::new(&params());
        let expect = (0.25 * 0.05f64).powf(-2.0 / 3.0);
        assert!((e.value(-1.0) - expect).abs() < 1e-12 * expect);
    }
}
