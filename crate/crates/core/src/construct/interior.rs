//! Interior region `|ρ| ≤ 1/2`, generated by `φ(t, r) = f(t+r) − f(t−r)`.
//!
//! Away from the axis the two windows `f(1±ρ)` have disjoint supports and all
//! inner products reduce to closed forms. For `|ρ| < ρ_c = tanh(W/2)` they
//! overlap and are computed from
//!
//! ```text
//! φ = ρ u,   u = ∫_{−1}^{1} F′(1 + sρ) ds,   F(τ) = f(τ)(x)
//! ```
//!
//! which keeps the cancellation in `f(1+ρ) − f(1−ρ)` out of the arithmetic.
//! The lifted fields `M = ‖u‖²` etc. come out of the same sums.

use crate::bump::{derivative_coeffs, BumpCurve, WIDTH};
use crate::cone::{PJet, Parity, Profile, ORDER};
use crate::jet::Jet;
use crate::quad::GaussRule;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Half-width of the overlap region.
pub fn rho_c() -> f64 {
    (0.5 * WIDTH).tanh()
}

/// Below this `|ρ|` the fields come from the axial form `φ = ρu`; above it
/// from window autocorrelations.
pub const RHO_MIN: f64 = 1e-3;

/// `Σ c_k δ^k` for a jet `δ` without constant term.
fn compose(c: &PJet, delta: &PJet) -> PJet {
    let mut acc = PJet::constant(c.c[ORDER - 1]);
    for k in (0..ORDER - 1).rev() {
        acc = (acc * *delta).add_scalar(c.c[k]);
    }
    acc
}

/// `(M, E_tt, E_rr, E_tr)` from the tilde jets, for `ρ ≠ 0`.
pub fn lift_jets(tilde: &[PJet; 4], q: f64, rho: f64) -> [PJet; 4] {
    let x: PJet = Jet::var(rho);
    let x2 = x * x;
    let [m, ett, err, etr] = *tilde;
    let dm = m.differentiate();
    let mt = m.scale(q) - x * dm;
    [
        m / x2,
        ett / x2,
        (err - dm / x + m / x2) / x2,
        (etr - mt.scale(0.5) / x) / x2,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Component {
    Mass,
    Ett,
    Err,
    Etr,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::Mass, Component::Ett, Component::Err, Component::Etr];

    pub fn parity(self) -> Parity {
        match self {
            Component::Etr => Parity::Odd,
            _ => Parity::Even,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Disjoint-support closed forms, valid for `|ρ| ≥ ρ_c`.
#[derive(Clone, Copy, Debug)]
pub struct ClosedInterior {
    pub component: Component,
    /// `∫ψ²`.
    pub mass: f64,
    pub q: f64,
    pub alpha: f64,
}

impl Profile for ClosedInterior {
    fn jet(&self, rho: f64) -> PJet {
        let x: PJet = Jet::var(rho);
        let a = x.add_scalar(1.0);
        let b = (-x).add_scalar(1.0);
        match self.component {
            Component::Mass => (a.powf(self.q) + b.powf(self.q)).scale(self.mass),
            Component::Ett | Component::Err => (a.powf(self.alpha) + b.powf(self.alpha)).scale(0.5),
            Component::Etr => (a.powf(self.alpha) - b.powf(self.alpha)).scale(0.5),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CurveJets {
    pub tilde: [PJet; 4],
    pub lifted: [PJet; 4],
}

/// Overlap-region inner products with a per-`|ρ|` cache.
pub struct InteriorCurve {
    pub bump: Arc<BumpCurve>,
    n_quad: usize,
    coeffs: Vec<Vec<f64>>,
    x_rule: GaussRule,
    s_rule: GaussRule,
    cache: Mutex<HashMap<u64, CurveJets>>,
}

/// Highest curve derivative needed: `u_t` carries `F^(2+k)`, `k < ORDER`.
const MAX_DERIV: usize = ORDER + 1;

impl InteriorCurve {
    pub fn new(bump: Arc<BumpCurve>, n_quad: usize) -> Self {
        let q = bump.q_f;
        InteriorCurve {
            bump,
            n_quad,
            coeffs: (0..=MAX_DERIV).map(|k| derivative_coeffs(q, k)).collect(),
            x_rule: GaussRule::new(n_quad.max(16)),
            s_rule: GaussRule::new(n_quad.max(16)),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn n_quad(&self) -> usize {
        self.n_quad
    }

    /// Jets at `ρ`, mirrored from `|ρ|`.
    pub fn jets(&self, rho: f64) -> CurveJets {
        let r = rho.abs();
        let key = r.to_bits();
        let base = {
            let hit = self.cache.lock().unwrap().get(&key).copied();
            match hit {
                Some(j) => j,
                None => {
                    let j = self.compute(r);
                    self.cache.lock().unwrap().insert(key, j);
                    j
                }
            }
        };
        if rho >= 0.0 {
            return base;
        }
        let mut out = base;
        for c in Component::ALL {
            let s = c.parity().sign();
            out.tilde[c.index()] = base.tilde[c.index()].mirrored().scale(s);
            out.lifted[c.index()] = base.lifted[c.index()].mirrored().scale(s);
        }
        out
    }

    fn x_breaks(r: f64) -> Vec<f64> {
        let lb = (-r).ln_1p();
        let la = r.ln_1p();
        let mut b = vec![lb, la, lb + WIDTH, la + WIDTH];
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Ascending cuts of the `s`-range at `x`: the preimages of the window
    /// quarter points `y = jW/4` under `y = x − log(1 + sρ)`, within `[−1, 1]`.
    fn s_cuts(r: f64, x: f64) -> Option<Vec<f64>> {
        if r == 0.0 {
            return (x > 0.0 && x < WIDTH).then(|| vec![-1.0, 1.0]);
        }
        let (lo, hi) = (((x - WIDTH).exp_m1() / r).max(-1.0), (x.exp_m1() / r).min(1.0));
        if lo >= hi {
            return None;
        }
        let mut cuts = vec![lo];
        for j in (1..4).rev() {
            let s = (x - WIDTH * j as f64 / 4.0).exp_m1() / r;
            if s > lo && s < hi {
                cuts.push(s);
            }
        }
        cuts.push(hi);
        Some(cuts)
    }

    fn compute(&self, r: f64) -> CurveJets {
        if r < RHO_MIN {
            self.compute_axial(r)
        } else {
            self.compute_correlated(r)
        }
    }

    /// Taylor coefficients in `d` of `C₀(d) = ∫ψ(x)ψ(x−d)dx` and
    /// `C₁(d) = ∫χ(x)χ(x−d)dx`, `χ = q_f ψ − ψ′`, about `d0 ∈ [0, W)`.
    fn correlations(&self, d0: f64) -> (PJet, PJet) {
        let q = self.bump.q_f;
        let mut c0 = [0.0; ORDER];
        let mut c1 = [0.0; ORDER];
        let mut cuts: Vec<f64> = (0..=4)
            .flat_map(|j| [WIDTH * j as f64 / 4.0, d0 + WIDTH * j as f64 / 4.0])
            .filter(|&x| x >= d0 && x <= WIDTH)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut fact = [1.0; ORDER];
        for k in 1..ORDER {
            fact[k] = fact[k - 1] * k as f64;
        }
        for w in cuts.windows(2) {
            for (x, wx) in self.x_rule.mapped(w[0], w[1]) {
                let a = self.bump.psi::<2>(x);
                let chi_a = q * a.deriv(0) - a.deriv(1);
                let b = self.bump.psi::<{ MAX_DERIV + 1 }>(x - d0);
                let mut sign = 1.0;
                for k in 0..ORDER {
                    let w = wx * sign / fact[k];
                    c0[k] += w * a.deriv(0) * b.deriv(k);
                    c1[k] += w * chi_a * (q * b.deriv(k) - b.deriv(k + 1));
                    sign = -sign;
                }
            }
        }
        (Jet { c: c0 }, Jet { c: c1 })
    }

    fn compute_correlated(&self, r: f64) -> CurveJets {
        let q = self.bump.q_f;
        let alpha = 2.0 * q - 2.0;
        let x: PJet = Jet::var(r);
        let a = x.add_scalar(1.0);
        let b = (-x).add_scalar(1.0);
        let ab = a * b;
        let d = a.ln() - b.ln();
        let sym = (a.powf(alpha) + b.powf(alpha)).scale(0.5);
        let etr = (a.powf(alpha) - b.powf(alpha)).scale(0.5);
        let mut m = (a.powf(2.0 * q) + b.powf(2.0 * q)).scale(self.bump.mass);
        let (mut ett, mut err) = (sym, sym);
        let d0 = d.value();
        if d0 < WIDTH {
            let (c0, c1) = self.correlations(d0);
            let delta = d.add_scalar(-d0);
            m = m - (ab.powf(q) * compose(&c0, &delta)).scale(2.0);
            let cross = (ab.powf(q - 1.0) * compose(&c1, &delta)).scale(2.0);
            ett = ett - cross;
            err = err + cross;
        }
        let tilde = [m, ett, err, etr];
        CurveJets {
            tilde,
            lifted: lift_jets(&tilde, 2.0 * q, r),
        }
    }

    /// Largest mismatch of orders 0..=2 between the axial and correlated
    /// forms at `ρ = RHO_MIN`. Each order of `M̃` is measured against
    /// `max(|M̃⁽ᵏ⁾|, μ)`, each order of an energy against the largest energy
    /// derivative of that order.
    pub fn form_gap(&self) -> f64 {
        let a = self.compute_axial(RHO_MIN);
        let b = self.compute_correlated(RHO_MIN);
        let mut gap = 0.0f64;
        for k in 0..3 {
            let m_scale = b.tilde[0].deriv(k).abs().max(self.bump.mass);
            let e_scale = (1..4).map(|i| b.tilde[i].deriv(k).abs()).fold(1.0, f64::max);
            for i in 0..4 {
                let s = if i == 0 { m_scale } else { e_scale };
                gap = gap.max((a.tilde[i].deriv(k) - b.tilde[i].deriv(k)).abs() / s);
            }
        }
        gap
    }

    /// Axial and correlated forms at `|ρ| = r`, uncached.
    pub fn branch_jets(&self, r: f64) -> (CurveJets, CurveJets) {
        (self.compute_axial(r.abs()), self.compute_correlated(r.abs()))
    }

    fn compute_axial(&self, r: f64) -> CurveJets {
        let q = self.bump.q_f;
        let rho: PJet = Jet::var(r);
        let mut tilde = [PJet::zero(); 4];
        let mut lifted = [PJet::zero(); 4];
        let mut fact = [1.0; ORDER];
        for k in 1..ORDER {
            fact[k] = fact[k - 1] * k as f64;
        }
        let breaks = Self::x_breaks(r);
        for w in breaks.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let panels = ((x1 - x0) / (0.25 * WIDTH)).ceil().max(1.0) as usize;
            let h = (x1 - x0) / panels as f64;
            for pi in 0..panels {
                let (pa, pb) = (x0 + pi as f64 * h, x0 + (pi + 1) as f64 * h);
                for (x, wx) in self.x_rule.mapped(pa, pb) {
                    let cuts = match Self::s_cuts(r, x) {
                        Some(c) => c,
                        None => continue,
                    };
                    let mut u = [0.0; ORDER];
                    let mut ut = [0.0; ORDER];
                    let mut ur = [0.0; ORDER];
                    for sw in cuts.windows(2) {
                        for (s, ws) in self.s_rule.mapped(sw[0], sw[1]) {
                            let tau = 1.0 + s * r;
                            let psi = self.bump.psi::<{ MAX_DERIV + 1 }>(x - tau.ln());
                            let mut fk = [0.0; MAX_DERIV + 1];
                            for (k, f) in fk.iter_mut().enumerate().skip(1) {
                                let sum: f64 = self.coeffs[k].iter().enumerate().map(|(j, c)| c * psi.deriv(j)).sum();
                                *f = tau.powf(q - k as f64) * sum;
                            }
                            let mut sk = 1.0;
                            for k in 0..ORDER {
                                let wk = ws * sk / fact[k];
                                u[k] += wk * fk[1 + k];
                                ut[k] += wk * fk[2 + k];
                                ur[k] += wk * s * fk[2 + k];
                                sk *= s;
                            }
                        }
                    }
                    let u = Jet { c: u };
                    let ut = Jet { c: ut };
                    let ur = Jet { c: ur };
                    let phi = rho * u;
                    let phi_t = rho * ut;
                    let phi_r = u + rho * ur;
                    tilde[0] = tilde[0] + (phi * phi).scale(wx);
                    tilde[1] = tilde[1] + (phi_t * phi_t).scale(wx);
                    tilde[2] = tilde[2] + (phi_r * phi_r).scale(wx);
                    tilde[3] = tilde[3] + (phi_t * phi_r).scale(wx);
                    lifted[0] = lifted[0] + (u * u).scale(wx);
                    lifted[1] = lifted[1] + (ut * ut).scale(wx);
                    lifted[2] = lifted[2] + (ur * ur).scale(wx);
                    lifted[3] = lifted[3] + (ut * ur).scale(wx);
                }
            }
        }
        CurveJets { tilde, lifted }
    }
}

/// One component of the overlap-region fields as a profile.
pub struct CurveField {
    pub curve: Arc<InteriorCurve>,
    pub component: Component,
    pub lifted: bool,
}

impl Profile for CurveField {
    fn jet(&self, rho: f64) -> PJet {
        let j = self.curve.jets(rho);
        if self.lifted {
            j.lifted[self.component.index()]
        } else {
            j.tilde[self.component.index()]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;

    fn curve() -> Arc<InteriorCurve> {
        let params = Params::new(7.0, 0.05, 10.0, 256).unwrap();
        Arc::new(InteriorCurve::new(Arc::new(BumpCurve::new(&params).unwrap()), 96))
    }

    #[test]
    fn null_combinations_match_power_laws() {
        let c = curve();
        for &rho in &[0.0, 1e-4, 0.002, -0.003, 0.0049] {
            let j = c.jets(rho);
            let ep = 0.5 * j.tilde[1].value() + 0.5 * j.tilde[2].value() + j.tilde[3].value();
            let em = 0.5 * j.tilde[1].value() + 0.5 * j.tilde[2].value() - j.tilde[3].value();
            let a = (1.0 + rho).powf(-2.0 / 3.0);
            let b = (1.0 - rho).powf(-2.0 / 3.0);
            assert!((ep - a).abs() < 1e-9, "rho={rho}: {ep} vs {a}");
            assert!((em - b).abs() < 1e-9, "rho={rho}: {em} vs {b}");
        }
    }

    #[test]
    fn seam_with_closed_forms() {
        let c = curve();
        let rc = rho_c();
        let closed = ClosedInterior {
            component: Component::Mass,
            mass: c.bump.mass,
            q: 4.0 / 3.0,
            alpha: -2.0 / 3.0,
        };
        let a = CurveField {
            curve: c.clone(),
            component: Component::Mass,
            lifted: false,
        }
        .jet(rc);
        let b = closed.jet(rc);
        for k in 0..3 {
            assert!((a.deriv(k) - b.deriv(k)).abs() < 1e-12 * b.value(), "k={k}");
        }
    }

    #[test]
    fn axial_and_correlated_forms_agree() {
        let c = curve();
        assert!(c.form_gap() < 1e-8, "{}", c.form_gap());
    }

    #[test]
    fn axis_values() {
        let c = curve();
        let j = c.jets(0.0);
        assert!((j.lifted[0].value() - 2.0).abs() < 1e-9);
        assert_eq!(j.tilde[0].value(), 0.0);
        assert!((j.tilde[0].deriv(2) - 4.0).abs() < 1e-8);
        assert!(j.tilde[3].value().abs() < 1e-15);
    }
}
