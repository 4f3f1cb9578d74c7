//! Tilde-side fields and the pointwise identities tying them together.

use crate::cone::{ConePoint, Derivs, HomogeneousField, Parity};
use crate::construct::FieldBundle;

/// `f/r`, continued by `∂_r f` at the axis where `f` vanishes.
pub fn over_r(f: f64, fr: f64, r: f64) -> f64 {
    if r == 0.0 {
        fr
    } else {
        f / r
    }
}

/// The seven fields the identities act on, detached from the bundle so that
/// oracles and injected defects run through the same code.
#[derive(Clone, Debug)]
pub struct TildeFields {
    pub p: f64,
    pub m_tilde: HomogeneousField,
    pub e_tt: HomogeneousField,
    pub e_rr: HomogeneousField,
    pub e_tr: HomogeneousField,
    pub e_plus: HomogeneousField,
    pub e_minus: HomogeneousField,
    pub v: HomogeneousField,
}

impl TildeFields {
    pub fn from_bundle(b: &FieldBundle) -> Self {
        TildeFields {
            p: b.params.p,
            m_tilde: b.m_tilde.clone(),
            e_tt: b.e_tt.clone(),
            e_rr: b.e_rr.clone(),
            e_tr: b.e_tr.clone(),
            e_plus: b.e_plus.clone(),
            e_minus: b.e_minus.clone(),
            v: b.v.clone(),
        }
    }

    /// Fields carrying a parity; `e₊` alone has none, so its sum with `e₋`
    /// stands in for it.
    pub fn parity_fields(&self) -> Vec<(&'static str, HomogeneousField)> {
        let sum = HomogeneousField {
            parity: Parity::Even,
            ..HomogeneousField::combo(&[(1.0, &self.e_plus), (1.0, &self.e_minus)])
        };
        vec![
            ("M_tilde", self.m_tilde.clone()),
            ("E_tt", self.e_tt.clone()),
            ("E_rr", self.e_rr.clone()),
            ("E_tr", self.e_tr.clone()),
            ("V", self.v.clone()),
            ("e_sum", sum),
        ]
    }

    fn unit(&self, pt: ConePoint) -> f64 {
        pt.t.powf(self.e_plus.degree)
    }

    /// Factor carrying a first-derivative residual back to `t = 1`.
    fn first_order_scale(&self, pt: ConePoint) -> f64 {
        pt.t.powf(1.0 - self.e_plus.degree)
    }

    fn v_over_r(&self, v: &Derivs, r: f64) -> f64 {
        (self.p - 1.0) * over_r(v.f, v.fr, r)
    }

    /// `|(∂_t−∂_r)e₊ + (∂_t+∂_r)V + ((p−1)/r)V|`, scaled to `t = 1`.
    pub fn storp(&self, pt: ConePoint) -> f64 {
        let e = self.e_plus.eval_derivs(pt);
        let v = self.v.eval_derivs(pt);
        let res = (e.ft - e.fr) + (v.ft + v.fr) + self.v_over_r(&v, pt.r);
        res.abs() * self.first_order_scale(pt)
    }

    /// `|(∂_t−∂_r)e₊|`, scaled to `t = 1`.
    pub fn eplus_transport(&self, pt: ConePoint) -> f64 {
        let e = self.e_plus.eval_derivs(pt);
        (e.ft - e.fr).abs() * self.first_order_scale(pt)
    }

    /// `∂_t(½Ẽ_tt + ½Ẽ_rr + V) − ∂_rẼ_tr`.
    pub fn notnew0(&self, pt: ConePoint) -> f64 {
        let (tt, rr, tr, v) = self.energy_derivs(pt);
        let res = 0.5 * (tt.ft + rr.ft) + v.ft - tr.fr;
        res.abs() * self.first_order_scale(pt)
    }

    /// `∂_tẼ_tr − ∂_r(½Ẽ_tt + ½Ẽ_rr − V) + ((p−1)/r)V`.
    pub fn notnew1(&self, pt: ConePoint) -> f64 {
        let (tt, rr, tr, v) = self.energy_derivs(pt);
        let res = tr.ft - (0.5 * (tt.fr + rr.fr) - v.fr) + self.v_over_r(&v, pt.r);
        res.abs() * self.first_order_scale(pt)
    }

    fn energy_derivs(&self, pt: ConePoint) -> (Derivs, Derivs, Derivs, Derivs) {
        (
            self.e_tt.eval_derivs(pt),
            self.e_rr.eval_derivs(pt),
            self.e_tr.eval_derivs(pt),
            self.v.eval_derivs(pt),
        )
    }

    /// `Ẽ_tt + Ẽ_rr` against `e₊ + e₋`, as `(|difference|, scale)`.
    pub fn ttrr(&self, pt: ConePoint) -> (f64, f64) {
        let a = self.e_tt.eval(pt) + self.e_rr.eval(pt);
        let b = self.e_plus.eval(pt) + self.e_minus.eval(pt);
        ((a - b).abs(), self.unit(pt).max(a.abs()).max(b.abs()))
    }

    /// `Ẽ_tr` against `½(e₊ − e₋)`.
    pub fn rrtt(&self, pt: ConePoint) -> (f64, f64) {
        let a = self.e_tr.eval(pt);
        let b = 0.5 * (self.e_plus.eval(pt) - self.e_minus.eval(pt));
        ((a - b).abs(), self.unit(pt).max(a.abs()).max(b.abs()))
    }

    /// `½(−∂_tt + ∂_rr)M̃ + Ẽ_tt − Ẽ_rr − (p+1)V`.
    pub fn vdef(&self, pt: ConePoint) -> (f64, f64) {
        let m = self.m_tilde.eval_derivs(pt);
        let tt = self.e_tt.eval(pt);
        let rr = self.e_rr.eval(pt);
        let v = (self.p + 1.0) * self.v.eval(pt);
        let res = 0.5 * (-m.ftt + m.frr) + tt - rr - v;
        let scale = [0.5 * m.ftt, 0.5 * m.frr, tt, rr, v]
            .iter()
            .fold(self.unit(pt), |s, x| s.max(x.abs()));
        (res.abs(), scale)
    }

    /// `e₊ − (t+r)^α` and `e₋ − (t−r)^α`, the larger of the two.
    pub fn eplus_closed_form(&self, pt: ConePoint) -> (f64, f64) {
        let a = self.e_plus.degree;
        let ep = self.e_plus.eval(pt);
        let em = self.e_minus.eval(pt);
        let xp = (pt.t + pt.r).powf(a);
        let xm = (pt.t - pt.r).powf(a);
        let d = (ep - xp).abs().max((em - xm).abs());
        (d, self.unit(pt).max(xp).max(xm))
    }

    /// The (la-4) matrix `[[M̃, ½∂_tM̃, ½∂_rM̃], [·, Ẽ_tt, Ẽ_tr], [·, ·, Ẽ_rr]]`.
    pub fn la4(&self, pt: ConePoint) -> [[f64; 3]; 3] {
        let m = self.m_tilde.eval_derivs(pt);
        let tt = self.e_tt.eval(pt);
        let rr = self.e_rr.eval(pt);
        let tr = self.e_tr.eval(pt);
        [
            [m.f, 0.5 * m.ft, 0.5 * m.fr],
            [0.5 * m.ft, tt, tr],
            [0.5 * m.fr, tr, rr],
        ]
    }

    /// The same quadratic form in the null frame `{1, ∂_t+∂_r, ∂_t−∂_r}`,
    /// with the diagonal energies taken from `e₊`, `e₋`.
    pub fn la4_null(&self, pt: ConePoint) -> [[f64; 3]; 3] {
        let m = self.m_tilde.eval_derivs(pt);
        let tt = self.e_tt.eval(pt);
        let rr = self.e_rr.eval(pt);
        let ep = self.e_plus.eval(pt);
        let em = self.e_minus.eval(pt);
        let a = 0.5 * (m.ft + m.fr);
        let b = 0.5 * (m.ft - m.fr);
        [[m.f, a, b], [a, 2.0 * ep, tt - rr], [b, tt - rr, 2.0 * em]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_bundle;
    use crate::Params;

    #[test]
    fn identities_hold_on_the_interior_cone() {
        let b = build_bundle(&Params::new(7.0, 0.05, 10.0, 256).unwrap()).unwrap();
        let f = TildeFields::from_bundle(&b);
        for &r in &[-0.8, -0.3, 0.002, 0.4, 0.9] {
            let pt = ConePoint { t: 1.0, r };
            assert!(f.storp(pt) < 1e-10);
            assert!(f.notnew0(pt) < 1e-9 && f.notnew1(pt) < 1e-9, "r={r}");
            let (d, s) = f.vdef(pt);
            assert!(d < 1e-9 * s, "r={r} {d}");
            let (d, s) = f.ttrr(pt);
            assert!(d < 1e-12 * s);
        }
    }

    #[test]
    fn over_r_continues_at_the_axis() {
        assert_eq!(over_r(0.0, 3.0, 0.0), 3.0);
        assert_eq!(over_r(1.0, 3.0, 0.5), 2.0);
    }
}
