//! The 3+1 tensor fields, the Gram matrix (la), and the Schur metric.

use super::fd::ridders;
use super::lift::{LiftedBundle, DIM, FD_STEP};
use super::linalg::{min_eigenvalue, scaled_min_eigenvalue};
use super::report::{CheckResult, Worst};
use crate::cone::ConePoint;
use crate::error::{ForgeError, Result};
use nalgebra::{Matrix3, Matrix4, SMatrix, UnitQuaternion, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Matrix5 = SMatrix<f64, 5, 5>;

/// Fields at a point of `ℝ^{1+3}`: `M`, `(∂_tM, ∇M)` and `E_{αβ}`.
#[derive(Clone, Copy, Debug)]
pub struct Tensor3 {
    pub m: f64,
    pub dm: Vector4<f64>,
    pub e: Matrix4<f64>,
}

fn radial_point(t: f64, x: &Vector3<f64>) -> Result<(ConePoint, Vector3<f64>)> {
    let r = x.norm();
    let pt = ConePoint::new(t, r)?;
    let dir = if r == 0.0 { Vector3::zeros() } else { x / r };
    Ok((pt, dir))
}

pub fn tensorize_3d(l: &LiftedBundle, t: f64, x: &Vector3<f64>) -> Result<Tensor3> {
    let (pt, n) = radial_point(t, x)?;
    let m = l.m.eval_derivs(pt);
    let tt = l.e_tt.eval(pt);
    let tr = l.e_tr.eval(pt);
    let rr = l.e_rr.eval(pt);
    let ww = l.e_ww.eval(pt);
    let mut e = Matrix4::zeros();
    e[(0, 0)] = tt;
    for i in 0..3 {
        e[(0, i + 1)] = n[i] * tr;
        e[(i + 1, 0)] = n[i] * tr;
        for j in 0..3 {
            let k = if i == j { ww } else { 0.0 };
            e[(i + 1, j + 1)] = n[i] * n[j] * (rr - ww) + k;
        }
    }
    let dm = Vector4::new(m.ft, n[0] * m.fr, n[1] * m.fr, n[2] * m.fr);
    Ok(Tensor3 { m: m.f, dm, e })
}

impl Tensor3 {
    /// The Gram matrix with top row `(M, ½∂_αM)` over `E_{αβ}`.
    pub fn gram(&self) -> Matrix5 {
        let mut g = Matrix5::zeros();
        g[(0, 0)] = self.m;
        for a in 0..4 {
            g[(0, a + 1)] = 0.5 * self.dm[a];
            g[(a + 1, 0)] = 0.5 * self.dm[a];
            for b in 0..4 {
                g[(a + 1, b + 1)] = self.e[(a, b)];
            }
        }
        g
    }

    /// `g = (E − ∂M ∂Mᵀ/(4M))/M`.
    pub fn schur(&self) -> Result<Matrix4<f64>> {
        let gram = self.gram();
        let lam = scaled_min_eigenvalue(&nalgebra::DMatrix::from_column_slice(5, 5, gram.as_slice()));
        if !(lam > 0.0) {
            return Err(ForgeError::Precondition(format!(
                "Gram matrix not strictly positive definite (scaled min eigenvalue {lam:.3e})"
            )));
        }
        let s = self.e - self.dm * self.dm.transpose() / (4.0 * self.m);
        Ok(s / self.m)
    }
}

pub fn schur_metric(l: &LiftedBundle, t: f64, x: &Vector3<f64>) -> Result<Matrix4<f64>> {
    tensorize_3d(l, t, x)?.schur()
}

/// `D = max((d+1)(d+6)/2, (d+1)(d+4)/2 + 5)` and `m = 2D + 2`.
pub fn min_embedding_dim(d: usize) -> (usize, usize) {
    let a = (d + 1) * (d + 6) / 2;
    let b = (d + 1) * (d + 4) / 2 + 5;
    let dd = a.max(b);
    (dd, 2 * dd + 2)
}

/// Random cone points `(t, x)` with `t ∈ [½, 2]`, `|x|/t ∈ [0.02, 0.95]`.
pub fn random_points(seed: u64, n: usize) -> Vec<(f64, Vector3<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let t = rng.gen_range(0.5..2.0);
            let rho = rng.gen_range(0.02..0.95);
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).sqrt();
            (t, Vector3::new(s * phi.cos(), s * phi.sin(), z) * (rho * t))
        })
        .collect()
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let q = nalgebra::Quaternion::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

/// Residuals of `∂_αQ = (p+1)[∂^βE_{αβ} − ½∂_α tr E]`, with `Q` the
/// (newerpos) left side and `η = diag(−1, 1, 1, 1)`, relative to the
/// largest term.
pub fn divergence_residual(l: &LiftedBundle, t: f64, x: &Vector3<f64>) -> Result<f64> {
    tensorize_3d(l, t, x)?;
    let h = FD_STEP * t;
    let at = |y: &Vector4<f64>| -> Tensor3 {
        tensorize_3d(l, y[0], &Vector3::new(y[1], y[2], y[3])).expect("inside the cone")
    };
    let q = |y: &Vector4<f64>| {
        l.newerpos(ConePoint {
            t: y[0],
            r: Vector3::new(y[1], y[2], y[3]).norm(),
        })
        .0
    };
    let trace = |e: &Matrix4<f64>| -e[(0, 0)] + e[(1, 1)] + e[(2, 2)] + e[(3, 3)];
    let y0 = Vector4::new(t, x[0], x[1], x[2]);
    let partial = |g: &dyn Fn(&Vector4<f64>) -> f64, axis: usize| {
        ridders(
            |s| {
                let mut y = y0;
                y[axis] = s;
                g(&y)
            },
            y0[axis],
            h,
        )
        .0
    };
    let k = l.p + 1.0;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for a in 0..4 {
        let dq = partial(&q, a);
        let mut div = 0.0;
        for b in 0..4 {
            let eta = if b == 0 { -1.0 } else { 1.0 };
            let term = eta * partial(&|y: &Vector4<f64>| at(y).e[(a, b)], b);
            scale = scale.max(k * term.abs());
            div += term;
        }
        let dtr = partial(&|y: &Vector4<f64>| trace(&at(y).e), a);
        scale = scale.max(dq.abs()).max(0.5 * k * dtr.abs());
        worst = worst.max((dq - k * (div - 0.5 * dtr)).abs());
    }
    Ok(worst / scale)
}

/// Allowance for the determinant cross-check, in machine epsilons per unit
/// of condition number.
pub const DET_ULPS: f64 = 100.0;

/// Condition number of the Jacobi-scaled matrix.
fn scaled_condition(m: &Matrix5) -> f64 {
    let d: Vec<f64> = (0..5).map(|i| m[(i, i)].abs().sqrt().recip()).collect();
    let s = Matrix5::from_fn(|i, j| m[(i, j)] * d[i] * d[j]);
    let ev = s.symmetric_eigenvalues();
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v.abs()), hi.max(v.abs()))
    });
    hi / lo
}

fn frob(m: &Matrix4<f64>) -> f64 {
    m.norm()
}

/// Checks of the 3+1 lift on `l`, which should be the relaxed bundle.
pub fn tensor_checks(l: &LiftedBundle, seed: u64) -> Vec<(&'static str, CheckResult)> {
    let pts = random_points(seed, 20);
    let mut out = Vec::new();

    let mut w = Worst::default();
    for (t, x) in &pts {
        let g = tensorize_3d(l, *t, x).map(|z| z.gram());
        let v = match g {
            Ok(g) => -scaled_min_eigenvalue(&nalgebra::DMatrix::from_column_slice(5, 5, g.as_slice())),
            Err(_) => f64::NAN,
        };
        w.push(v, *t, x.norm());
    }
    out.push((
        "tensor_la5",
        CheckResult::new(
            -w.value > 0.0,
            -w.value,
            w.t,
            w.r,
            format!(
                "min scaled eigenvalue of the 5x5 Gram matrix over 20 points: {:.4e}",
                -w.value
            ),
        ),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut w = Worst::default();
    for (t, x) in pts.iter().take(10) {
        let u = random_rotation(&mut rng);
        let (Ok(a), Ok(b)) = (tensorize_3d(l, *t, &(u * x)), tensorize_3d(l, *t, x)) else {
            w.push(f64::NAN, *t, x.norm());
            continue;
        };
        let mut big = Matrix4::identity();
        big.fixed_view_mut::<3, 3>(1, 1).copy_from(&u);
        let rotated = big * b.e * big.transpose();
        let gap = frob(&(a.e - rotated)).max((a.dm - big * b.dm).norm()) / frob(&b.e).max(b.dm.norm());
        w.push(gap, *t, x.norm());
    }
    out.push((
        "tensor_rotation",
        CheckResult::new(
            w.value <= 1e-12,
            1e-12 - w.value,
            w.t,
            w.r,
            format!("max relative |E(Ux) - U E(x) U^T| over 10 rotations: {:.2e}", w.value),
        ),
    ));

    let mut w = Worst::default();
    for (t, x) in &pts {
        w.push(divergence_residual(l, *t, x).unwrap_or(f64::NAN), *t, x.norm());
    }
    out.push((
        "tensor_divergence",
        CheckResult::new(
            w.value <= 1e-4,
            1e-4 - w.value,
            w.t,
            w.r,
            format!(
                "max relative Cartesian divergence residual over 20 points: {:.2e}",
                w.value
            ),
        ),
    ));

    let mut psd = Worst::default();
    let mut scaling = Worst::default();
    let mut det = Worst::default();
    let mut errors = Vec::new();
    for (i, (t, x)) in pts.iter().enumerate() {
        let z = match tensorize_3d(l, *t, x) {
            Ok(z) => z,
            Err(e) => {
                psd.push(f64::NAN, *t, x.norm());
                errors.push(e.to_string());
                continue;
            }
        };
        let g = match z.schur() {
            Ok(g) => g,
            Err(e) => {
                psd.push(f64::NAN, *t, x.norm());
                scaling.push(f64::NAN, *t, x.norm());
                if i < 5 {
                    det.push(f64::NAN, *t, x.norm());
                }
                errors.push(e.to_string());
                continue;
            }
        };
        let gd = nalgebra::DMatrix::from_column_slice(4, 4, g.as_slice());
        psd.push(-scaled_min_eigenvalue(&gd), *t, x.norm());
        let s: f64 = rng.gen_range(-1.0..1.0);
        let lam = s.exp();
        let gap = match schur_metric(l, lam * t, &(x * lam)) {
            Ok(gs) => frob(&(gs - g / (lam * lam))) / frob(&(g / (lam * lam))),
            Err(_) => f64::NAN,
        };
        scaling.push(gap, *t, x.norm());
        if i < 5 {
            let gram = z.gram();
            let dl = gram.determinant();
            let dg = z.m.powi(5) * g.determinant();
            let gap = (dl - dg).abs() / dl.abs().max(dg.abs());
            let kappa = scaled_condition(&gram);
            det.push(gap / (DET_ULPS * f64::EPSILON * kappa), *t, x.norm());
        }
    }
    let note = if errors.is_empty() {
        String::new()
    } else {
        format!("; {} points rejected: {}", errors.len(), errors[0])
    };
    out.push((
        "schur_psd",
        CheckResult::new(
            -psd.value > 0.0 && errors.is_empty(),
            -psd.value,
            psd.t,
            psd.r,
            format!(
                "min scaled eigenvalue of g over 20 points: {:.4e}; min raw {:.4e}{note}",
                -psd.value,
                {
                    pts.iter()
                        .filter_map(|(t, x)| schur_metric(l, *t, x).ok())
                        .map(|g| min_eigenvalue(&nalgebra::DMatrix::from_column_slice(4, 4, g.as_slice())))
                        .fold(f64::INFINITY, f64::min)
                }
            ),
        ),
    ));
    out.push((
        "schur_scaling",
        CheckResult::new(
            scaling.value <= 1e-10,
            1e-10 - scaling.value,
            scaling.t,
            scaling.r,
            format!(
                "max relative |g(e^s t, e^s x) - e^(-2s) g(t, x)|: {:.2e}",
                scaling.value
            ),
        ),
    ));
    out.push((
        "schur_det",
        CheckResult::new(
            det.value <= 1.0,
            1.0 - det.value,
            det.t,
            det.r,
            format!(
                "max |det(la) - M^5 det g| / |det(la)| at 5 points, in units of {DET_ULPS} eps cond(la): {:.3}",
                det.value
            ),
        ),
    ));
    let (d, m) = min_embedding_dim(DIM);
    out.push((
        "embedding_dim",
        CheckResult::new(
            m <= 40,
            40.0 - m as f64,
            1.0,
            0.0,
            format!("d = {DIM}: D = {d}, m >= {m}"),
        ),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_dimensions() {
        assert_eq!(min_embedding_dim(3), (19, 40));
        assert_eq!(min_embedding_dim(1), (10, 22));
        let mut last = 0;
        for d in 1..20 {
            let (_, m) = min_embedding_dim(d);
            assert!(m > last);
            last = m;
        }
    }
}
