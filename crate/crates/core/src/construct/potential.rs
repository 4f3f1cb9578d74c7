//! The potential `V` on the left band and the extension of `e₊` to the right band.
//!
//! Both integrals run along characteristics. After substituting the profile
//! coordinate `ζ` of the integrand's argument they become, at `t = 1`,
//!
//! ```text
//! V(ρ)  = (1−ρ)^(p−1+α) / |ρ|^(p−1) ∫_ρ^(−1+δ) |ζ|^(p−1) (1−ζ)^(−p−α) D(ζ) dζ
//! e₊(ρ) = (1+ρ)^α [1 + ∫_(1−δ)^ρ (1+ζ)^(−α−1) K(ζ) dζ]
//! ```
//!
//! with `D = α g − (1+ζ) g′` for the left profile `g` of `e₊` and
//! `K = α v + (1−ζ) v′ + (p−1) v/ζ` for the right profile `v` of `V`.
//! Node derivatives come from these formulas through jets rather than from
//! differentiating the samples.
//! The potential carries no factor `1/2`: with it, `(∂_t+∂_r)(|r|^(p−1)V)`
//! would be `−½|r|^(p−1)(∂_t−∂_r)e₊` and the transport equation would fail.

use super::eplus::EplusLeft;
use super::grid;
use crate::cone::{ChebPanel, PJet, Profile, SampledProfile, ORDER};
use crate::error::{ForgeError, Result};
use crate::jet::Jet;
use crate::params::Params;
use crate::quad::GaussRule;

#[derive(Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

fn gap_nodes(params: &Params) -> usize {
    (params.n_quad / 8).max(4)
}

fn v_integrand(e: &EplusLeft, p: f64, zeta: f64) -> f64 {
    let j = e.jet_at::<2>(Jet::var(zeta));
    let d = e.alpha * j.c[0] - (1.0 + zeta) * j.c[1];
    zeta.abs().powf(p - 1.0) * (1.0 - zeta).powf(-p - e.alpha) * d
}

/// `V` at ascending nodes of the left band whose last node is `−1+δ`.
pub fn v_left_values(e: &EplusLeft, params: &Params, nodes: &[f64], per_gap: usize) -> Vec<f64> {
    let p = params.p;
    let rule = GaussRule::new(per_gap);
    let n = nodes.len();
    let mut out = vec![0.0; n];
    let mut acc = Kahan::default();
    for i in (0..n - 1).rev() {
        acc.add(rule.integrate(nodes[i], nodes[i + 1], |z| v_integrand(e, p, z)));
        let rho = nodes[i];
        out[i] = (1.0 - rho).powf(p - 1.0 + e.alpha) / rho.abs().powf(p - 1.0) * acc.sum;
    }
    out
}

/// Panels carrying exact node derivatives from `node_jet(ρ, value)`.
fn panels_with_jets<F: Fn(f64, f64) -> PJet>(panel_nodes: &[Vec<f64>], flat: &[f64], node_jet: F) -> Vec<ChebPanel> {
    let mut panels = Vec::with_capacity(panel_nodes.len());
    let mut start = 0;
    for nodes in panel_nodes {
        let n = nodes.len();
        let mut derivs = vec![vec![0.0; n]; ORDER];
        for (i, (&rho, &v)) in nodes.iter().zip(&flat[start..start + n]).enumerate() {
            let j = node_jet(rho, v);
            derivs[0][i] = v;
            for (k, d) in derivs.iter_mut().enumerate().skip(1) {
                d[i] = j.deriv(k);
            }
        }
        panels.push(ChebPanel::from_node_derivs(nodes[0], nodes[n - 1], derivs));
        start += n - 1;
    }
    panels
}

/// Jet of `V = P·I` at a left-band node with known value, where
/// `P = (1−ρ)^(p−1+α)/|ρ|^(p−1)` and `I′ = −w`.
fn v_node_jet(e: &EplusLeft, p: f64, rho: f64, value: f64) -> PJet {
    let x: PJet = Jet::var(rho);
    let pf = (-x).add_scalar(1.0).powf(p - 1.0 + e.alpha) * (-x).powf(-(p - 1.0));
    let g: Jet<{ ORDER + 1 }> = e.jet_at(Jet::var(rho));
    let dg: PJet = g.differentiate().resize();
    let g: PJet = g.resize();
    let d = g.scale(e.alpha) - x.add_scalar(1.0) * dg;
    let w = (-x).powf(p - 1.0) * (-x).add_scalar(1.0).powf(-p - e.alpha) * d;
    (-w).integrate(value / pf.value()) * pf
}

/// Left-band panels for `V` from its node values.
pub fn v_panels(e: &EplusLeft, params: &Params, values: &[f64]) -> Vec<ChebPanel> {
    panels_with_jets(&grid::panel_nodes(params), values, |rho, v| {
        v_node_jet(e, params.p, rho, v)
    })
}

/// Jet of `e₊ = (1+ρ)^α (1 + J)` at a right-band node with known value,
/// where `J′ = (1+ρ)^(−α−1) K`.
fn eplus_node_jet(v_left: &SampledProfile, params: &Params, rho: f64, value: f64) -> PJet {
    let alpha = params.alpha();
    let x: PJet = Jet::var(rho);
    let v = v_left.jet(-rho).mirrored();
    let k = v.scale(alpha) + (-x).add_scalar(1.0) * v.differentiate() + v.scale(params.p - 1.0) / x;
    let kint = x.add_scalar(1.0).powf(-alpha - 1.0) * k;
    let base = x.add_scalar(1.0).powf(alpha);
    base * kint.integrate(value / base.value() - 1.0).add_scalar(1.0)
}

/// Right-band panels for `e₊` from its node values.
pub fn eplus_panels(v_left: &SampledProfile, params: &Params, values: &[f64]) -> Vec<ChebPanel> {
    panels_with_jets(&right_panel_nodes(params), values, |rho, v| {
        eplus_node_jet(v_left, params, rho, v)
    })
}

#[derive(Clone, Debug)]
pub struct PotentialInfo {
    /// Largest change of a node value under doubling of the per-gap rule,
    /// relative to `max |V|`.
    pub doubling_change: f64,
    pub max_value: f64,
}

/// Left-band potential as a sampled profile on the band panels.
pub fn compute_v_left(e: &EplusLeft, params: &Params) -> Result<(SampledProfile, PotentialInfo)> {
    let nodes = grid::left_band_nodes(params);
    let k = gap_nodes(params);
    let vals = v_left_values(e, params, &nodes, k);
    let fine = v_left_values(e, params, &nodes, 2 * k);
    let max_value = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let doubling_change =
        vals.iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / max_value.max(f64::MIN_POSITIVE);
    if doubling_change > 100.0 * params.tol.residual {
        return Err(ForgeError::Resolution(format!(
            "V changes by {doubling_change:.3e} under quadrature doubling"
        )));
    }
    Ok((
        SampledProfile::new(v_panels(e, params, &vals)),
        PotentialInfo {
            doubling_change,
            max_value,
        },
    ))
}

/// `(min V, max V/(A δ^((p−5)/(p−1))))` over the given profile nodes.
pub fn vpos_margins(v_left: &SampledProfile, params: &Params) -> (f64, f64, f64) {
    let scale = params.amplitude * params.delta.powf((params.p - 5.0) / (params.p - 1.0));
    let mut vmin = f64::INFINITY;
    let mut rmax = f64::NEG_INFINITY;
    let mut at = 0.0;
    for (rho, v) in v_left.node_values() {
        if v < vmin {
            vmin = v;
            at = rho;
        }
        rmax = rmax.max(v / scale);
    }
    (vmin, rmax, at)
}

fn k_integrand(v_left: &SampledProfile, params: &Params, zeta: f64) -> f64 {
    let alpha = params.alpha();
    let j = v_left.jet(-zeta);
    let v = j.c[0];
    let dv = -j.c[1];
    let k = alpha * v + (1.0 - zeta) * dv + (params.p - 1.0) * v / zeta;
    (1.0 + zeta).powf(-alpha - 1.0) * k
}

/// Right-band node values of `e₊` at ascending nodes starting at `1−δ`.
pub fn eplus_right_values(v_left: &SampledProfile, params: &Params, nodes: &[f64], per_gap: usize) -> Vec<f64> {
    let alpha = params.alpha();
    let rule = GaussRule::new(per_gap);
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = Kahan::default();
    out.push((1.0 + nodes[0]).powf(alpha));
    for i in 1..nodes.len() {
        acc.add(rule.integrate(nodes[i - 1], nodes[i], |z| k_integrand(v_left, params, z)));
        out.push((1.0 + nodes[i]).powf(alpha) * (1.0 + acc.sum));
    }
    out
}

/// Panels of the right band: mirrors of the left band panels.
pub fn right_panel_nodes(params: &Params) -> Vec<Vec<f64>> {
    grid::panel_nodes(params)
        .into_iter()
        .rev()
        .map(|p| p.into_iter().rev().map(|x| -x).collect())
        .collect()
}

pub fn right_band_nodes(params: &Params) -> Vec<f64> {
    grid::left_band_nodes(params).into_iter().rev().map(|x| -x).collect()
}

pub fn extend_eplus_right(v_left: &SampledProfile, params: &Params) -> Result<SampledProfile> {
    let nodes = right_band_nodes(params);
    let vals = eplus_right_values(v_left, params, &nodes, gap_nodes(params));
    if let Some((i, v)) = vals.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(ForgeError::Construction {
            tag: "cruel".into(),
            detail: format!("e+ = {v} at rho={}", nodes[i]),
        });
    }
    Ok(SampledProfile::new(eplus_panels(v_left, params, &vals)))
}

/// Largest relative change of right-band `e₊` under doubling of the per-gap rule.
pub fn eplus_right_doubling_change(v_left: &SampledProfile, params: &Params) -> f64 {
    let nodes = right_band_nodes(params);
    let k = gap_nodes(params);
    let a = eplus_right_values(v_left, params, &nodes, k);
    let b = eplus_right_values(v_left, params, &nodes, 2 * k);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::eplus::build_eplus_left;

    #[test]
    fn potential_is_nonnegative_and_vanishes_at_band_edge() {
        let params = Params::new(7.0, 0.05, 10.0, 256).unwrap();
        let (e, _) = build_eplus_left(&params).unwrap();
        let (v, info) = compute_v_left(&e, &params).unwrap();
        let (vmin, ratio, _) = vpos_margins(&v, &params);
        assert!(vmin >= -1e-12, "{vmin}");
        assert!(ratio <= params.c_vpos, "{ratio}");
        assert_eq!(v.jet(-0.95).value(), 0.0);
        assert!(info.doubling_change < 1e-8);
    }

    #[test]
    fn right_extension_starts_on_the_power_law() {
        let params = Params::new(7.0, 0.05, 10.0, 256).unwrap();
        let (e, _) = build_eplus_left(&params).unwrap();
        let (v, _) = compute_v_left(&e, &params).unwrap();
        let r = extend_eplus_right(&v, &params).unwrap();
        assert_eq!(r.jet(0.95).value(), 1.95f64.powf(-2.0 / 3.0));
        assert!(r.node_values().iter().all(|(_, x)| *x > 0.0));
    }
}
