//! Small-matrix algebra for so(3), su(2), SO(3) and 3x3 complex matrices.
//!
//! The identification so(3) = R^3 is fixed once here: `hat(v) w = v x w`.
//! Every pointwise field operation in the crate bottoms out in this module.

use nalgebra::{Matrix2, Matrix3, Quaternion, UnitQuaternion, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// 3x3 complex matrix, the carrier of Fourier coefficients.
pub type Mat3C = Matrix3<C64>;
/// 3x3 real matrix.
pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Element of so(3): a real antisymmetric 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So3(pub Mat3);

/// Element of su(2): a traceless anti-Hermitian 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2(pub Matrix2<C64>);

/// Element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot3(pub Mat3);

/// `hat(v) w = v x w`.
pub fn hat(v: &Vec3) -> So3 {
    So3(Mat3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    ))
}

/// Inverse of [`hat`] on the antisymmetric part of `m`.
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Commutator `ab - ba`, for real or complex matrices.
pub fn bracket<T: nalgebra::ComplexField>(a: &Matrix3<T>, b: &Matrix3<T>) -> Matrix3<T> {
    a * b - b * a
}

/// `<g, h> = trace(g h^t) / 2`.
pub fn inner(g: &Mat3, h: &Mat3) -> f64 {
    0.5 * (g.component_mul(h)).sum()
}

impl So3 {
    pub fn zero() -> Self {
        So3(Mat3::zeros())
    }

    pub fn axis(&self) -> Vec3 {
        vee(&self.0)
    }

    pub fn bracket(&self, other: &So3) -> So3 {
        So3(self.0 * other.0 - other.0 * self.0)
    }

    pub fn inner(&self, other: &So3) -> f64 {
        inner(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Largest entry of `a + a^t`.
    pub fn antisymmetry_residual(m: &Mat3) -> f64 {
        (m + m.transpose()).amax()
    }

    pub fn exp(&self, t: f64) -> Rot3 {
        so3_exp(self, t)
    }
}

/// Outcome of [`unit_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitCheck {
    pub is_unit: bool,
    /// Frobenius norm of `g^3 + g`.
    pub cubic_residual: f64,
    /// `|<g,g> - 1|`.
    pub norm_residual: f64,
}

/// `g` is a unit element iff `g^3 + g = 0` and `g != 0`.
pub fn unit_check(g: &So3, tol: f64) -> UnitCheck {
    let m = &g.0;
    let cubic = (m * m * m + m).norm();
    let norm_residual = (g.inner(g) - 1.0).abs();
    UnitCheck {
        is_unit: cubic <= tol && m.norm() > tol,
        cubic_residual: cubic,
        norm_residual,
    }
}

/// The isomorphism so(3) -> su(2). With `t = g[0][1]`, `x = g[0][2]`,
/// `y = g[1][2]` it sends `g` to `1/2 [[-it, -x-iy], [x-iy, it]]`.
pub fn ell(g: &So3) -> Su2 {
    let t = g.0[(0, 1)];
    let x = g.0[(0, 2)];
    let y = g.0[(1, 2)];
    Su2(Matrix2::new(
        C64::new(0.0, -0.5 * t),
        C64::new(-0.5 * x, -0.5 * y),
        C64::new(0.5 * x, -0.5 * y),
        C64::new(0.0, 0.5 * t),
    ))
}

/// Inverse of [`ell`].
pub fn ell_inv(h: &Su2) -> So3 {
    let t = -2.0 * h.0[(0, 0)].im;
    let x = 2.0 * h.0[(1, 0)].re;
    let y = -2.0 * h.0[(1, 0)].im;
    So3(Mat3::new(
        0.0, t, x, //
        -t, 0.0, y, //
        -x, -y, 0.0,
    ))
}

impl Su2 {
    pub fn bracket(&self, other: &Su2) -> Su2 {
        Su2(self.0 * other.0 - other.0 * self.0)
    }

    /// Largest entry of `h + h*` together with `|trace h|`.
    pub fn constraint_residual(&self) -> f64 {
        (self.0 + self.0.adjoint()).camax().max(self.0.trace().norm())
    }
}

/// Rodrigues formula for `exp(t g)`.
pub fn so3_exp(g: &So3, t: f64) -> Rot3 {
    let w = g.axis() * t;
    let angle = w.norm();
    let k = hat(&w).0;
    let (a, b) = if angle < 1e-6 {
        let a2 = angle * angle;
        (1.0 - a2 / 6.0 + a2 * a2 / 120.0, 0.5 - a2 / 24.0 + a2 * a2 / 720.0)
    } else {
        (angle.sin() / angle, (1.0 - angle.cos()) / (angle * angle))
    };
    Rot3(Mat3::identity() + k * a + k * k * b)
}

impl Rot3 {
    pub fn identity() -> Self {
        Rot3(Mat3::identity())
    }

    pub fn inverse(&self) -> Rot3 {
        Rot3(self.0.transpose())
    }

    /// `|R^t R - Id|` (Frobenius) and `|det R - 1|`.
    pub fn orthogonality_residual(&self) -> (f64, f64) {
        let r = &self.0;
        ((r.transpose() * r - Mat3::identity()).norm(), (r.determinant() - 1.0).abs())
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        ((self.0.trace() - 1.0) * 0.5).clamp(-1.0, 1.0).acos()
    }

    pub fn to_quaternion(&self) -> UnitQuaternion<f64> {
        let rot = nalgebra::Rotation3::from_matrix_unchecked(self.0);
        UnitQuaternion::from_rotation_matrix(&rot)
    }
}

/// Lifts a sampled loop in SO(3) to SU(2) (unit quaternions) by sign
/// continuation and reports whether the lift closes: `+1` at `Id`, `-1` at
/// `-Id`. The first and last samples are expected to coincide.
pub fn su2_path_lift(samples: &[Rot3]) -> Result<i8> {
    const MAX_STEP: f64 = std::f64::consts::FRAC_PI_4;
    let Some(first) = samples.first() else {
        return Ok(1);
    };
    let start: Quaternion<f64> = *first.to_quaternion().quaternion();
    let mut current = start;
    for (i, w) in samples.windows(2).enumerate() {
        let step = Rot3(w[0].0.transpose() * w[1].0).angle();
        if step >= MAX_STEP {
            return Err(Error::SamplingTooCoarse { index: i, angle: step });
        }
        let mut next: Quaternion<f64> = *w[1].to_quaternion().quaternion();
        if current.dot(&next) < 0.0 {
            next = -next;
        }
        current = next;
    }
    Ok(if current.dot(&start) >= 0.0 { 1 } else { -1 })
}

/// Pointwise Frobenius norm of a complex matrix.
pub fn cnorm(m: &Mat3C) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_complex(m: &Mat3) -> Mat3C {
    m.map(|x| C64::new(x, 0.0))
}

pub fn real_part(m: &Mat3C) -> Mat3 {
    m.map(|z| z.re)
}

pub fn imag_part(m: &Mat3C) -> Mat3 {
    m.map(|z| z.im)
}

/// Nearest rotation (polar factor) of an almost orthogonal matrix.
pub fn polar_project(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut u2 = u;
        u2.column_mut(2).neg_mut();
        r = u2 * vt;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rvec(rng: &mut ChaCha8Rng) -> Vec3 {
        Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn hat_convention() {
        let h = hat(&Vec3::z()).0;
        assert_eq!(h, Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(hat(&Vec3::zeros()).0, Mat3::zeros());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (v, w) = (rvec(&mut rng), rvec(&mut rng));
            assert!((hat(&v).0 * w - v.cross(&w)).norm() < 1e-15);
        }
    }

    #[test]
    fn bracket_of_basis_against_cross_products() {
        let e = [Vec3::x(), Vec3::y(), Vec3::z()];
        for a in 0..3 {
            for b in 0..3 {
                let lhs = hat(&e[a]).bracket(&hat(&e[b])).0;
                let rhs = hat(&e[a].cross(&e[b])).0;
                assert!((lhs - rhs).norm() < 1e-15, "{a} {b}");
            }
        }
        let g = hat(&Vec3::new(0.3, -0.2, 0.9));
        assert_eq!(g.bracket(&g).0, Mat3::zeros());
    }

    #[test]
    fn inner_matches_dot() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(hat(&Vec3::x()).inner(&hat(&Vec3::y())), 0.0);
        for _ in 0..100 {
            let (v, w) = (rvec(&mut rng), rvec(&mut rng));
            assert!((hat(&v).inner(&hat(&w)) - v.dot(&w)).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_check_cases() {
        assert!(unit_check(&hat(&Vec3::z()), 1e-12).is_unit);
        assert!(!unit_check(&hat(&(2.0 * Vec3::z())), 1e-12).is_unit);
        assert!(!unit_check(&So3::zero(), 1e-12).is_unit);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = rvec(&mut rng);
            let c = unit_check(&hat(&v.normalize()), 1e-12);
            assert!(c.is_unit && c.norm_residual < 1e-14);
        }
    }

    #[test]
    fn ell_displayed_matrix_and_inverse() {
        let g = So3(Mat3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        let h = ell(&g).0;
        let expected = Matrix2::new(C64::new(0.0, -0.5), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.5));
        assert!((h - expected).norm() < 1e-16);
        assert_eq!(ell(&So3::zero()).0, Matrix2::zeros());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let g = hat(&rvec(&mut rng));
            assert!((ell_inv(&ell(&g)).0 - g.0).norm() < 1e-15);
            assert!(ell(&g).constraint_residual() < 1e-16);
        }
    }

    #[test]
    fn exp_cases() {
        let g = hat(&Vec3::new(1.0, 2.0, -0.5).normalize());
        assert!((so3_exp(&g, 0.0).0 - Mat3::identity()).norm() < 1e-15);
        assert!((so3_exp(&g, 2.0 * PI).0 - Mat3::identity()).norm() < 1e-14);
        // truncated power series oracle
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = hat(&rvec(&mut rng));
            let t = rng.gen_range(-1.5..1.5);
            let x = g.0 * t;
            let mut term = Mat3::identity();
            let mut sum = Mat3::identity();
            for k in 1..30 {
                term = term * x / k as f64;
                sum += term;
            }
            assert!((so3_exp(&g, t).0 - sum).norm() < 1e-12);
        }
    }

    #[test]
    fn exp_stays_orthogonal_for_large_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let g = hat(&rvec(&mut rng).normalize());
            let t = rng.gen_range(-100.0..100.0);
            let (o, d) = so3_exp(&g, t).orthogonality_residual();
            assert!(o < 1e-12 && d < 1e-12);
            let s = rng.gen_range(-3.0..3.0);
            let lhs = so3_exp(&g, t + s).0;
            let rhs = so3_exp(&g, t).0 * so3_exp(&g, s).0;
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    fn bending_loop(g: &So3, n: usize) -> Vec<Rot3> {
        let g2 = g.0 * g.0;
        (0..=n)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n as f64;
                Rot3(Mat3::identity() + g2 + g.0 * th.sin() - g2 * th.cos())
            })
            .collect()
    }

    #[test]
    fn su2_lift_parities() {
        let constant = vec![Rot3::identity(); 10];
        assert_eq!(su2_path_lift(&constant).unwrap(), 1);
        let g = hat(&Vec3::new(0.2, -0.4, 0.7).normalize());
        let lp = bending_loop(&g, 64);
        assert_eq!(su2_path_lift(&lp).unwrap(), -1);
        let mut twice = lp.clone();
        twice.extend_from_slice(&lp[1..]);
        assert_eq!(su2_path_lift(&twice).unwrap(), 1);
        assert!(matches!(su2_path_lift(&bending_loop(&g, 4)), Err(Error::SamplingTooCoarse { .. })));
    }

    #[test]
    fn polar_projection_recovers_rotation() {
        let r = so3_exp(&hat(&Vec3::new(0.3, 0.1, -0.2)), 1.0).0;
        let noisy = r + Mat3::from_element(1e-7);
        assert!((polar_project(&noisy) - r).norm() < 1e-6);
    }
}
