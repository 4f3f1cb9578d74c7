//! Gauss–Legendre rules on arbitrary intervals.

use gauss_quad::GaussLegendre;

#[derive(Clone, Debug)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let n = n.max(2);
        let gl = GaussLegendre::new(n.try_into().expect("degree is at least 2"));
        let mut pairs: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (*x, *w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Symmetrize so that odd integrands cancel exactly.
        let m = pairs.len();
        for i in 0..m / 2 {
            let x = 0.5 * (pairs[m - 1 - i].0 - pairs[i].0);
            let w = 0.5 * (pairs[m - 1 - i].1 + pairs[i].1);
            pairs[i] = (-x, w);
            pairs[m - 1 - i] = (x, w);
        }
        if m % 2 == 1 {
            pairs[m / 2].0 = 0.0;
        }
        GaussRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal subintervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for i in 0..panels {
            let lo = a + i as f64 * h;
            total += self.integrate(lo, lo + h, &mut f);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let r = GaussRule::new(8);
        let v = r.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
    }

    #[test]
    fn odd_integrands_cancel() {
        let r = GaussRule::new(33);
        let v = r.integrate(-1.0, 1.0, |x| x.powi(3) * (x * x).exp());
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn composite_matches_single() {
        let r = GaussRule::new(20);
        let a = r.integrate(0.0, 3.0, |x| x.sin());
        let b = r.integrate_composite(0.0, 3.0, 4, |x| x.sin());
        assert!((a - b).abs() < 1e-14);
        assert!((a - (1.0 - 3f64.cos())).abs() < 1e-14);
    }
}
