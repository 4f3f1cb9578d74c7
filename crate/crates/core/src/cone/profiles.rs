use super::{PJet, Profile};
use crate::jet::Jet;
use std::sync::Arc;

/// Closed-form profile given as a jet-valued function of the jet variable.
pub struct FnProfile<F>(pub F);

impl<F> Profile for FnProfile<F>
where
    F: Fn(PJet) -> PJet + Send + Sync,
{
    fn jet(&self, rho: f64) -> PJet {
        (self.0)(Jet::var(rho))
    }
}

pub struct Constant(pub f64);

impl Profile for Constant {
    fn jet(&self, _rho: f64) -> PJet {
        Jet::constant(self.0)
    }
}

/// Profile of `∂_t F` for a field of the given degree: `α g − ρ g′`.
pub struct EulerT {
    pub inner: Arc<dyn Profile>,
    pub degree: f64,
}

impl Profile for EulerT {
    fn jet(&self, rho: f64) -> PJet {
        let g = self.inner.jet(rho);
        let x: PJet = Jet::var(rho);
        g.scale(self.degree) - x * g.differentiate()
    }
}

pub struct Deriv {
    pub inner: Arc<dyn Profile>,
}

impl Profile for Deriv {
    fn jet(&self, rho: f64) -> PJet {
        self.inner.jet(rho).differentiate()
    }
}

pub struct Mirror {
    pub inner: Arc<dyn Profile>,
    pub sign: f64,
}

impl Profile for Mirror {
    fn jet(&self, rho: f64) -> PJet {
        self.inner.jet(-rho).mirrored().scale(self.sign)
    }
}

pub struct Combo(pub Vec<(f64, Arc<dyn Profile>)>);

impl Profile for Combo {
    fn jet(&self, rho: f64) -> PJet {
        let mut acc = Jet::zero();
        for (c, p) in &self.0 {
            if *c != 0.0 {
                acc = acc + p.jet(rho).scale(*c);
            }
        }
        acc
    }
}

pub struct Product(pub Arc<dyn Profile>, pub Arc<dyn Profile>);

impl Profile for Product {
    fn jet(&self, rho: f64) -> PJet {
        self.0.jet(rho) * self.1.jet(rho)
    }
}

pub struct OverRhoPow {
    pub inner: Arc<dyn Profile>,
    pub k: i32,
}

impl Profile for OverRhoPow {
    fn jet(&self, rho: f64) -> PJet {
        let x: PJet = Jet::var(rho);
        let mut d = Jet::constant(1.0);
        for _ in 0..self.k {
            d = d * x;
        }
        self.inner.jet(rho) / d
    }
}

/// Pieces on consecutive intervals. `breaks[i]` separates `pieces[i]` from
/// `pieces[i+1]`; a break point belongs to the piece farther from the
/// origin, which keeps the selection mirror-symmetric.
pub struct Piecewise {
    pub breaks: Vec<f64>,
    pub pieces: Vec<Arc<dyn Profile>>,
}

impl Piecewise {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Arc<dyn Profile>>) -> Self {
        assert_eq!(breaks.len() + 1, pieces.len());
        debug_assert!(breaks.windows(2).all(|w| w[0] < w[1]));
        Piecewise { breaks, pieces }
    }

    pub fn piece_index(&self, rho: f64) -> usize {
        if rho < 0.0 {
            self.breaks.iter().filter(|&&b| rho > b).count()
        } else {
            self.breaks.iter().filter(|&&b| rho >= b).count()
        }
    }
}

impl Profile for Piecewise {
    fn jet(&self, rho: f64) -> PJet {
        self.pieces[self.piece_index(rho)].jet(rho)
    }
}

/// Adds `amplitude · m((ρ − center)/half_width)` and, if `mirror_sign` is
/// non-zero, `mirror_sign` times its reflection. Used for defect injection.
pub struct Bumped {
    pub inner: Arc<dyn Profile>,
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
    pub mirror_sign: f64,
}

impl Profile for Bumped {
    fn jet(&self, rho: f64) -> PJet {
        let x: PJet = Jet::var(rho);
        let y = (x - self.center).scale(1.0 / self.half_width);
        let mut b = crate::smooth::mollifier(y);
        if self.mirror_sign != 0.0 {
            let ym = (-x - self.center).scale(1.0 / self.half_width);
            b = b + crate::smooth::mollifier(ym).scale(self.mirror_sign);
        }
        self.inner.jet(rho) + b.scale(self.amplitude)
    }
}

/// Negates the profile at one sample point. Negative control for parity.
pub struct Corrupted {
    pub inner: Arc<dyn Profile>,
    pub at: f64,
}

impl Profile for Corrupted {
    fn jet(&self, rho: f64) -> PJet {
        let j = self.inner.jet(rho);
        if (rho - self.at).abs() < 1e-15 {
            -j.add_scalar(1.0)
        } else {
            j
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_selection_is_symmetric() {
        let a: Arc<dyn Profile> = Arc::new(Constant(1.0));
        let b: Arc<dyn Profile> = Arc::new(Constant(2.0));
        let c: Arc<dyn Profile> = Arc::new(Constant(3.0));
        let p = Piecewise::new(vec![-0.5, 0.5], vec![a, b, c]);
        assert_eq!(p.jet(-0.5).value(), 1.0);
        assert_eq!(p.jet(0.5).value(), 3.0);
        assert_eq!(p.jet(0.0).value(), 2.0);
        assert_eq!(p.jet(-0.51).value(), 1.0);
        assert_eq!(p.jet(0.51).value(), 3.0);
    }

    #[test]
    fn euler_and_mirror_compose() {
        let g: Arc<dyn Profile> = Arc::new(FnProfile(|x: PJet| (x + 1.0).powf(-0.5)));
        let e = EulerT {
            inner: g.clone(),
            degree: -0.5,
        };
        // ∂_t (t+r)^(-1/2) at t=1 equals -(1/2)(1+ρ)^(-3/2)
        assert!((e.jet(0.3).value() + 0.5 * 1.3f64.powf(-1.5)).abs() < 1e-15);
        let m = Mirror { inner: g, sign: 1.0 };
        let j = m.jet(0.3);
        assert!((j.value() - 0.7f64.powf(-0.5)).abs() < 1e-15);
        assert!((j.deriv(1) - 0.5 * 0.7f64.powf(-1.5)).abs() < 1e-14);
    }
}
