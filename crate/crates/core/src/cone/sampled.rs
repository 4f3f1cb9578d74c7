//! Sampled profile segments on Chebyshev–Lobatto panels.
//!
//! Values live at the panel nodes; derivatives come from repeated
//! application of the spectral differentiation matrix and are evaluated off
//! the nodes by barycentric interpolation.

use super::{PJet, Profile, ORDER};
use crate::jet::Jet;

#[derive(Clone, Debug)]
pub struct ChebPanel {
    pub lo: f64,
    pub hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `derivs[k][i]` is the k-th derivative at node `i`.
    derivs: Vec<Vec<f64>>,
}

/// Lobatto angle `θ_j = π j/(n−1)` so that the node is `−cos θ_j`.
fn angle(j: usize, n: usize) -> f64 {
    std::f64::consts::PI * j as f64 / (n - 1) as f64
}

impl ChebPanel {
    /// Ascending Lobatto nodes on `[lo, hi]`, endpoints included exactly.
    /// The reference nodes are mirror-symmetric bit for bit, so a panel on
    /// `[−hi, −lo]` has exactly the negated nodes.
    pub fn nodes_on(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut s = vec![0.0; n];
        for j in 0..n / 2 {
            s[j] = -angle(j, n).cos();
            s[n - 1 - j] = -s[j];
        }
        (0..n)
            .map(|j| {
                if j == 0 {
                    lo
                } else if j == n - 1 {
                    hi
                } else {
                    mid + half * s[j]
                }
            })
            .collect()
    }

    fn weights(n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect()
    }

    /// Panel from exact node data: `derivs[k][i]` is the k-th derivative at
    /// node `i`, for `k < ORDER`. Each order is interpolated on its own.
    pub fn from_node_derivs(lo: f64, hi: f64, derivs: Vec<Vec<f64>>) -> Self {
        assert_eq!(derivs.len(), ORDER);
        let n = derivs[0].len();
        assert!(n >= 3, "a panel needs at least three nodes");
        ChebPanel {
            lo,
            hi,
            nodes: Self::nodes_on(lo, hi, n),
            weights: Self::weights(n),
            derivs,
        }
    }

    pub fn from_values(lo: f64, hi: f64, values: &[f64]) -> Self {
        let n = values.len();
        assert!(n >= 3, "a panel needs at least three nodes");
        let weights = Self::weights(n);
        // Reference differences x_i − x_j via the product formula.
        let mut dmat = vec![0.0; n * n];
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (ti, tj) = (angle(i, n), angle(j, n));
                let diff = 2.0 * (0.5 * (ti + tj)).sin() * (0.5 * (ti - tj)).sin();
                let v = (weights[j] / weights[i]) / diff;
                dmat[i * n + j] = v;
                diag -= v;
            }
            dmat[i * n + i] = diag;
        }
        let scale = 2.0 / (hi - lo);
        let mut derivs = vec![values.to_vec()];
        for k in 1..ORDER {
            let prev = &derivs[k - 1];
            let next: Vec<f64> = (0..n)
                .map(|i| {
                    let row = &dmat[i * n..(i + 1) * n];
                    scale * row.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect();
            derivs.push(next);
        }
        ChebPanel {
            lo,
            hi,
            nodes: Self::nodes_on(lo, hi, n),
            weights,
            derivs,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.derivs[0]
    }

    pub fn node_derivs(&self, k: usize) -> &[f64] {
        &self.derivs[k]
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.lo && rho <= self.hi
    }

    /// Derivatives `0..ORDER` at `rho`.
    pub fn eval_all(&self, rho: f64) -> [f64; ORDER] {
        let mut out = [0.0; ORDER];
        if let Some(i) = self.nodes.iter().position(|&x| x == rho) {
            for (k, o) in out.iter_mut().enumerate() {
                *o = self.derivs[k][i];
            }
            return out;
        }
        let mut den = 0.0;
        let mut num = [0.0; ORDER];
        for (i, (&x, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let c = w / (rho - x);
            den += c;
            for k in 0..ORDER {
                num[k] += c * self.derivs[k][i];
            }
        }
        for k in 0..ORDER {
            out[k] = num[k] / den;
        }
        out
    }

    pub fn jet(&self, rho: f64) -> PJet {
        Jet::from_derivs(&self.eval_all(rho))
    }
}

/// Consecutive panels covering `[lo, hi]`; evaluation outside clamps to the
/// nearest panel.
#[derive(Clone, Debug)]
pub struct SampledProfile {
    pub panels: Vec<ChebPanel>,
}

impl SampledProfile {
    pub fn new(panels: Vec<ChebPanel>) -> Self {
        assert!(!panels.is_empty());
        SampledProfile { panels }
    }

    pub fn lo(&self) -> f64 {
        self.panels[0].lo
    }

    pub fn hi(&self) -> f64 {
        self.panels[self.panels.len() - 1].hi
    }

    fn panel_for(&self, rho: f64) -> &ChebPanel {
        self.panels
            .iter()
            .find(|p| rho <= p.hi)
            .unwrap_or(&self.panels[self.panels.len() - 1])
    }

    /// All node values, junction nodes listed once.
    pub fn node_values(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (k, p) in self.panels.iter().enumerate() {
            let skip = usize::from(k > 0);
            out.extend(p.nodes().iter().copied().zip(p.values().iter().copied()).skip(skip));
        }
        out
    }
}

impl Profile for SampledProfile {
    fn jet(&self, rho: f64) -> PJet {
        self.panel_for(rho).jet(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_exponential_spectrally() {
        let nodes = ChebPanel::nodes_on(-0.3, 0.4, 24);
        let vals: Vec<f64> = nodes.iter().map(|x| (2.0 * x).exp()).collect();
        let p = ChebPanel::from_values(-0.3, 0.4, &vals);
        for &x in &[-0.3, -0.11, 0.05, 0.397, 0.4] {
            let d = p.eval_all(x);
            for (k, dk) in d.iter().enumerate().take(3) {
                let exact = 2f64.powi(k as i32) * (2.0 * x).exp();
                assert!((dk - exact).abs() < 1e-9 * exact.max(1.0), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn mirrored_panels_have_negated_nodes() {
        let a = ChebPanel::nodes_on(-0.97, -0.955, 33);
        let b = ChebPanel::nodes_on(0.955, 0.97, 33);
        for (x, y) in a.iter().zip(b.iter().rev()) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn nodes_are_ascending_with_exact_ends() {
        let n = ChebPanel::nodes_on(-1.0, -0.95, 17);
        assert_eq!(n[0], -1.0);
        assert_eq!(n[16], -0.95);
        assert!(n.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sampled_profile_clamps_and_lists_nodes_once() {
        let a = ChebPanel::from_values(0.0, 1.0, &[0.0, 0.5, 1.0]);
        let b = ChebPanel::from_values(1.0, 2.0, &[1.0, 1.5, 2.0]);
        let s = SampledProfile::new(vec![a, b]);
        assert_eq!(s.node_values().len(), 5);
        assert!((s.jet(1.5).value() - 1.5).abs() < 1e-14);
    }
}
