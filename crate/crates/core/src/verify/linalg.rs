//! Definiteness tests for small symmetric matrices.

use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenvalues of a symmetric 3×3 matrix, ascending, by the trigonometric
/// closed form.
pub fn sym3_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let tr = a[0][0] + a[1][1] + a[2][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = tr / 3.0;
    let (b00, b11, b22) = (a[0][0] - q, a[1][1] - q, a[2][2] - q);
    let p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let det = b00 * (b11 * b22 - a[1][2] * a[1][2]) - a[0][1] * (a[0][1] * b22 - a[1][2] * a[0][2])
        + a[0][2] * (a[0][1] * a[1][2] - b11 * a[0][2]);
    let r = (det / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e_hi = q + 2.0 * p * phi.cos();
    let e_lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e_mid = tr - e_hi - e_lo;
    [e_lo, e_mid, e_hi]
}

/// Smallest eigenvalue of `D^(-1/2) A D^(-1/2)` with `D = diag(A)`, which
/// shares definiteness with `A`. A non-positive diagonal entry is returned
/// directly as the verdict.
pub fn scaled_min_eig3(a: &[[f64; 3]; 3]) -> f64 {
    let d = [a[0][0], a[1][1], a[2][2]];
    if let Some(&bad) = d.iter().filter(|x| !(**x > 0.0)).min_by(|x, y| x.total_cmp(y)) {
        return bad;
    }
    let s = d.map(|x| x.sqrt().recip());
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = a[i][j] * s[i] * s[j];
        }
        b[i][i] = 1.0;
    }
    sym3_eigenvalues(&b)[0]
}

/// As [`scaled_min_eig3`] for the 2×2 case, via its closed form.
pub fn scaled_min_eig2(a: &[[f64; 2]; 2]) -> f64 {
    if !(a[0][0] > 0.0) {
        return a[0][0];
    }
    if !(a[1][1] > 0.0) {
        return a[1][1];
    }
    let c = a[0][1] / (a[0][0] * a[1][1]).sqrt();
    1.0 - c.abs()
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Jacobi-scaled smallest eigenvalue of a symmetric matrix.
pub fn scaled_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let d: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    if let Some(&bad) = d.iter().filter(|x| !(**x > 0.0)).min_by(|x, y| x.total_cmp(y)) {
        return bad;
    }
    let s: Vec<f64> = d.iter().map(|x| x.sqrt().recip()).collect();
    let b = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { m[(i, j)] * s[i] * s[j] });
    min_eigenvalue(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_iterative() {
        let a = [[4.0, 1.0, -2.0], [1.0, 3.0, 0.5], [-2.0, 0.5, 5.0]];
        let e = sym3_eigenvalues(&a);
        let m = DMatrix::from_fn(3, 3, |i, j| a[i][j]);
        let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        for k in 0..3 {
            assert!((e[k] - v[k]).abs() < 1e-12, "{e:?} vs {v:?}");
        }
    }

    #[test]
    fn diagonal_and_singular() {
        assert_eq!(
            sym3_eigenvalues(&[[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]),
            [1.0, 2.0, 3.0]
        );
        let g = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [3.0, 6.0, 9.0]];
        assert!(scaled_min_eig3(&g).abs() < 1e-14);
        assert!(scaled_min_eig2(&[[1.0, 1.0], [1.0, 1.0]]).abs() < 1e-15);
    }

    #[test]
    fn scaling_resolves_tiny_entries() {
        // Positive definite with a 1e-12 diagonal entry.
        let a = [[1e-12, 1e-7, 0.0], [1e-7, 1.0, 0.1], [0.0, 0.1, 1.0]];
        assert!(scaled_min_eig3(&a) > 0.0);
        let m = DMatrix::from_fn(3, 3, |i, j| a[i][j]);
        assert!((scaled_min_eigenvalue(&m) - scaled_min_eig3(&a)).abs() < 1e-12);
        assert!(scaled_min_eig3(&[[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]) < 0.0);
    }
}
