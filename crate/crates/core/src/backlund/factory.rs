//! Unit sections built from doubly periodic meromorphic functions on the
//! flat torus through the stereographic identification of `C u {inf}` with
//! the unit sphere of `so(3)`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backlund::section::{lemma_eq_residuals, LemmaEqResiduals, UnitSection};
use crate::error::{Error, Result};
use crate::lie3::{Vec3, C64};
use crate::smfield::Connection;
use crate::torus::TorusMetric;

/// Meromorphic function `zeta` on the torus `C / (Lx Z + i Ly Z)`. Complex
/// parameters are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZetaSpec {
    Constant {
        value: [f64; 2],
    },
    /// `scale * wp(z - center) + offset`
    Weierstrass {
        #[serde(default = "one")]
        scale: [f64; 2],
        #[serde(default)]
        offset: [f64; 2],
        #[serde(default)]
        center: [f64; 2],
    },
    /// `scale * th(z-a1) th(z-a2) / (th(z-b) th(z-a1-a2+b))` with `th` the odd
    /// Jacobi theta function of the lattice
    ThetaRatio {
        zeros: [[f64; 2]; 2],
        pole: [f64; 2],
        #[serde(default = "one")]
        scale: [f64; 2],
    },
}

fn one() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorySpec {
    pub zeta: ZetaSpec,
    /// use `conj(zeta)`: an antiholomorphic control that must fail validation
    #[serde(default)]
    pub conjugate: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl FactorySpec {
    pub fn new(zeta: ZetaSpec) -> Self {
        FactorySpec { zeta, conjugate: false, tolerance: default_tolerance() }
    }
}

fn c(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

const LATTICE_ROWS: i32 = 12;

/// Weierstrass `wp(z)` for the lattice `Z + tau Z` (`Im tau > 0`) from the
/// row sums `sum_m (z + m)^{-2} = pi^2 / sin^2(pi z)`.
pub fn weierstrass_p_unit(z: C64, tau: C64) -> C64 {
    let pi2 = PI * PI;
    let mut acc = C64::new(-pi2 / 3.0, 0.0);
    for n in -LATTICE_ROWS..=LATTICE_ROWS {
        let w = z + tau * n as f64;
        let s = (w * PI).sin();
        acc += pi2 / (s * s);
        if n != 0 {
            let s0 = (tau * (n as f64 * PI)).sin();
            acc -= pi2 / (s0 * s0);
        }
    }
    acc
}

/// `wp(z)` for the rectangular lattice `Lx Z + i Ly Z`.
pub fn weierstrass_p(z: C64, lx: f64, ly: f64) -> C64 {
    weierstrass_p_unit(z / lx, C64::new(0.0, ly / lx)) / (lx * lx)
}

/// Odd Jacobi theta function `2 sum_n (-1)^n q^{(n+1/2)^2} sin((2n+1) u)`.
pub fn theta1(u: C64, q: f64) -> C64 {
    let mut acc = C64::default();
    for n in 0..40 {
        let nf = n as f64;
        let w = q.powf((nf + 0.5) * (nf + 0.5));
        if w < 1e-300 {
            break;
        }
        let t = (u * (2.0 * nf + 1.0)).sin() * w;
        acc += if n % 2 == 0 { t } else { -t };
    }
    acc * 2.0
}

/// `zeta(z)`, or `None` at a pole.
pub fn eval_zeta(spec: &ZetaSpec, z: C64, lx: f64, ly: f64) -> Option<C64> {
    let v = match spec {
        ZetaSpec::Constant { value } => c(*value),
        ZetaSpec::Weierstrass { scale, offset, center } => c(*scale) * weierstrass_p(z - c(*center), lx, ly) + c(*offset),
        ZetaSpec::ThetaRatio { zeros, pole, scale } => {
            let q = (-PI * ly / lx).exp();
            let th = |w: C64| theta1(w * (PI / lx), q);
            let (a1, a2, b1) = (c(zeros[0]), c(zeros[1]), c(*pole));
            let b2 = a1 + a2 - b1;
            c(*scale) * th(z - a1) * th(z - a2) / (th(z - b1) * th(z - b2))
        }
    };
    (v.re.is_finite() && v.im.is_finite()).then_some(v)
}

/// Stereographic point `(2 Re z, 2 Im z, |z|^2 - 1) / (1 + |z|^2)`; `None`
/// is the point at infinity `(0, 0, 1)`.
pub fn stereographic(z: Option<C64>) -> Vec3 {
    match z {
        None => Vec3::z(),
        Some(z) if z.norm() <= 1.0 => {
            let r2 = z.norm_sqr();
            Vec3::new(2.0 * z.re, 2.0 * z.im, r2 - 1.0) / (1.0 + r2)
        }
        Some(z) => {
            let w = z.inv();
            let r2 = w.norm_sqr();
            Vec3::new(2.0 * w.re, -2.0 * w.im, 1.0 - r2) / (1.0 + r2)
        }
    }
}

/// Unvalidated section `hat(n(zeta(z)))`.
pub fn factory_section(metric: &Arc<TorusMetric>, spec: &FactorySpec) -> Result<UnitSection> {
    let g = metric.grid();
    let axes: Vec<Vec3> = g
        .points()
        .map(|(x, y)| {
            let z = eval_zeta(&spec.zeta, C64::new(x, y), g.lx, g.ly);
            stereographic(if spec.conjugate { z.map(|v| v.conj()) } else { z })
        })
        .collect();
    UnitSection::from_axes(metric, &axes)
}

/// Section from the factory, accepted only when all four holomorphicity
/// residuals against the trivial connection are within `spec.tolerance`.
pub fn holomorphic_g_factory(metric: &Arc<TorusMetric>, spec: &FactorySpec) -> Result<(UnitSection, LemmaEqResiduals)> {
    let g = factory_section(metric, spec)?;
    let r = lemma_eq_residuals(&g, &Connection::zero(metric));
    if !(r.max() <= spec.tolerance) {
        return Err(Error::FactoryValidationFailed(r.max()));
    }
    Ok((g, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `G_k = sum' w^{-k}` by explicit lattice rows, each summed over
    /// `|m| <= 20000`.
    fn eisenstein(k: i32, tau: C64) -> C64 {
        let mut acc = C64::default();
        for n in -15i32..=15 {
            for m in -20000i32..=20000 {
                if n == 0 && m == 0 {
                    continue;
                }
                acc += (tau * n as f64 + m as f64).powi(-k);
            }
        }
        acc
    }

    #[test]
    fn weierstrass_satisfies_its_differential_equation() {
        let tau = C64::new(0.1, 1.2);
        let g2 = eisenstein(4, tau) * 60.0;
        let g3 = eisenstein(6, tau) * 140.0;
        for &z in &[C64::new(0.31, 0.17), C64::new(0.7, 0.9), C64::new(0.05, 0.6)] {
            let p = weierstrass_p_unit(z, tau);
            let h = 1e-4;
            let dp = (weierstrass_p_unit(z - h * 2.0, tau) - weierstrass_p_unit(z - h, tau) * 8.0
                + weierstrass_p_unit(z + h, tau) * 8.0
                - weierstrass_p_unit(z + h * 2.0, tau))
                / (12.0 * h);
            let lhs = dp * dp;
            let rhs = p * p * p * 4.0 - g2 * p - g3;
            assert!((lhs - rhs).norm() < 1e-6 * rhs.norm().max(1.0), "{z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn weierstrass_is_even_doubly_periodic_with_double_pole() {
        let (lx, ly) = (1.0, 1.3);
        let z = C64::new(0.23, 0.41);
        let p = weierstrass_p(z, lx, ly);
        assert!((weierstrass_p(z + lx, lx, ly) - p).norm() < 1e-10 * p.norm());
        assert!((weierstrass_p(z + C64::new(0.0, ly), lx, ly) - p).norm() < 1e-10 * p.norm());
        assert!((weierstrass_p(-z, lx, ly) - p).norm() < 1e-10 * p.norm());
        let e = C64::new(1e-3, 2e-3);
        let lead = weierstrass_p(e, lx, ly) - e.powi(-2);
        assert!(lead.norm() < 1e-4);
    }

    #[test]
    fn theta_ratio_is_doubly_periodic() {
        let spec = ZetaSpec::ThetaRatio { zeros: [[0.2, 0.3], [0.6, 0.1]], pole: [0.4, 0.7], scale: [1.0, 0.0] };
        let (lx, ly) = (1.0, 1.0);
        let z = C64::new(0.13, 0.52);
        let v = eval_zeta(&spec, z, lx, ly).unwrap();
        for shift in [C64::new(lx, 0.0), C64::new(0.0, ly)] {
            let w = eval_zeta(&spec, z + shift, lx, ly).unwrap();
            assert!((w - v).norm() < 1e-10 * v.norm(), "{v} {w}");
        }
        assert!(eval_zeta(&spec, C64::new(0.2, 0.3), lx, ly).unwrap().norm() < 1e-12);
    }

    #[test]
    fn stereographic_is_continuous_through_infinity() {
        let a = stereographic(Some(C64::new(1e8, 3e7)));
        assert!((a - Vec3::z()).norm() < 1e-7);
        let b = stereographic(Some(C64::new(0.999_999_999, 0.0)));
        let b2 = stereographic(Some(C64::new(1.000_000_001, 0.0)));
        assert!((b - b2).norm() < 1e-8);
        for z in [C64::new(0.3, -2.0), C64::new(0.0, 0.0)] {
            assert!((stereographic(Some(z)).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_zeta_gives_constant_section() {
        let m = Arc::new(TorusMetric::flat(16, 16, 1.0, 1.0).unwrap());
        let (g, r) = holomorphic_g_factory(&m, &FactorySpec::new(ZetaSpec::Constant { value: [0.3, 0.4] })).unwrap();
        assert!(g.values().iter().all(|x| *x == g.values()[0]));
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn weierstrass_section_is_holomorphic_and_conjugate_is_not() {
        let m = Arc::new(TorusMetric::flat(64, 64, 1.0, 1.0).unwrap());
        let zeta = ZetaSpec::Weierstrass { scale: [0.05, 0.0], offset: [0.0, 0.0], center: [0.5 / 64.0, 0.5 / 64.0] };
        let (_, r) = holomorphic_g_factory(&m, &FactorySpec { zeta: zeta.clone(), conjugate: false, tolerance: 1e-6 }).unwrap();
        assert!(r.max() < 1e-6, "{r:?}");
        let bad = holomorphic_g_factory(&m, &FactorySpec { zeta, conjugate: true, tolerance: 1e-6 });
        assert!(matches!(bad, Err(Error::FactoryValidationFailed(x)) if x > 0.1));
    }
}
