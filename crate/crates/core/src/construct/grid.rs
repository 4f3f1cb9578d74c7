//! The `t = 1` sample grid.
//!
//! Each band `|ρ| ∈ [1−δ, 1]` carries sixteen Chebyshev panels, eight on
//! each side of the clamp/bump junction at `1 + ρ = δ/2`. The middle region gets
//! `N/2` cell-centred uniform points, so `ρ = 0` is never a node.

use crate::cone::ChebPanel;
use crate::params::Params;

pub const PANELS_PER_HALF: usize = 8;

/// Panel edges within one half-band as fractions of its length, clustered
/// toward both ends where the profiles flatten.
fn half_fractions() -> Vec<f64> {
    let k = PANELS_PER_HALF;
    let mut f = vec![0.0; k + 1];
    for i in 1..=k / 2 {
        f[i] = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / k as f64).cos());
        f[k - i] = 1.0 - f[i];
    }
    f[k] = 1.0;
    f
}

/// Panel intervals of the left band, ascending.
pub fn left_band_panels(params: &Params) -> Vec<(f64, f64)> {
    let d = params.delta;
    let f = half_fractions();
    let mut edges: Vec<f64> = f.iter().map(|x| 0.5 * d * x).collect();
    edges.extend(f[1..].iter().map(|x| 0.5 * d * (1.0 + x)));
    edges[PANELS_PER_HALF] = 0.5 * d;
    edges[2 * PANELS_PER_HALF] = d;
    edges.windows(2).map(|w| (w[0] - 1.0, w[1] - 1.0)).collect()
}

/// Nodes per panel, endpoints included.
pub fn nodes_per_panel(params: &Params) -> usize {
    (params.n_profile / (4 * PANELS_PER_HALF)).max(4) + 1
}

pub fn panel_nodes(params: &Params) -> Vec<Vec<f64>> {
    let n = nodes_per_panel(params);
    left_band_panels(params)
        .into_iter()
        .map(|(lo, hi)| ChebPanel::nodes_on(lo, hi, n))
        .collect()
}

/// Left band nodes, ascending, junctions listed once.
pub fn left_band_nodes(params: &Params) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for p in panel_nodes(params) {
        let skip = usize::from(!out.is_empty());
        out.extend(p.into_iter().skip(skip));
    }
    out
}

pub fn middle_nodes(params: &Params) -> Vec<f64> {
    let m = params.n_profile / 2;
    let lo = -1.0 + params.delta;
    let h = 2.0 * (1.0 - params.delta) / m as f64;
    (0..m)
        .map(|i| {
            // Mirror the upper half exactly so the set is symmetric.
            if i < m / 2 {
                lo + (i as f64 + 0.5) * h
            } else {
                -(lo + ((m - 1 - i) as f64 + 0.5) * h)
            }
        })
        .collect()
}

/// Full ascending grid on `[−1, 1]`, symmetric under `ρ ↦ −ρ`.
pub fn profile_grid(params: &Params) -> Vec<f64> {
    let left = left_band_nodes(params);
    let mut out = left.clone();
    out.extend(middle_nodes(params));
    out.extend(left.iter().rev().map(|x| -x));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_and_sorted() {
        let p = Params::new(7.0, 0.05, 10.0, 256).unwrap();
        let g = profile_grid(&p);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let n = g.len();
        for i in 0..n {
            assert_eq!(g[i], -g[n - 1 - i]);
        }
        assert!(!g.contains(&0.0));
        assert_eq!(g[0], -1.0);
    }

    #[test]
    fn bands_hold_half_the_nodes() {
        let p = Params::new(7.0, 0.05, 10.0, 2048).unwrap();
        let band = left_band_nodes(&p);
        assert!(2 * band.len() >= p.n_profile / 2);
        assert_eq!(*band.last().unwrap(), -1.0 + 0.05);
    }
}
