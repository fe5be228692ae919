use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie3::{cnorm, hat, inner, to_complex, vee, Mat3, Mat3C, So3, Vec3, C64, I};
use crate::smfield::{commutator, Connection, FourierField};
use crate::torus::TorusMetric;

/// Largest allowed `|g^3 + g|` at any grid point.
pub const UNIT_TOLERANCE: f64 = 1e-10;
/// Largest allowed relative Fourier content in the outer tenth of the
/// spectrum of any entry.
pub const SMOOTHNESS_TOLERANCE: f64 = 1e-7;

/// Unit `so(3)`-valued section `g` (`g^3 + g = 0`) sampled on the grid.
#[derive(Debug, Clone)]
pub struct UnitSection {
    metric: Arc<TorusMetric>,
    g: Vec<Mat3>,
}

impl UnitSection {
    /// Validates unit length pointwise and spectral resolution.
    pub fn new(metric: &Arc<TorusMetric>, g: Vec<Mat3>) -> Result<Self> {
        if g.len() != metric.grid().len() {
            return Err(Error::Format(format!("section has {} samples, grid has {}", g.len(), metric.grid().len())));
        }
        let worst = g
            .iter()
            .map(|m| (m * m * m + m).norm().max(So3::antisymmetry_residual(m)))
            .fold(0.0, f64::max);
        if !(worst <= UNIT_TOLERANCE) {
            return Err(Error::NotUnit(worst));
        }
        let s = UnitSection { metric: metric.clone(), g };
        let tail = s.spectral_tail();
        if tail > SMOOTHNESS_TOLERANCE {
            return Err(Error::NotSmooth(tail));
        }
        Ok(s)
    }

    /// Section `hat(n / |n|)` from axis vectors.
    pub fn from_axes(metric: &Arc<TorusMetric>, axes: &[Vec3]) -> Result<Self> {
        if let Some(z) = axes.iter().find(|v| !(v.norm() > 0.0)) {
            return Err(Error::NotUnit(z.norm()));
        }
        Self::new(metric, axes.iter().map(|v| hat(&v.normalize()).0).collect())
    }

    pub fn constant(metric: &Arc<TorusMetric>, axis: Vec3) -> Result<Self> {
        Self::from_axes(metric, &vec![axis; metric.grid().len()])
    }

    pub fn metric(&self) -> &Arc<TorusMetric> {
        &self.metric
    }

    pub fn values(&self) -> &[Mat3] {
        &self.g
    }

    pub fn axes(&self) -> Vec<Vec3> {
        self.g.iter().map(vee).collect()
    }

    pub fn to_field(&self) -> FourierField {
        FourierField::from_real_grid(&self.metric, &self.g)
    }

    pub fn neg(&self) -> UnitSection {
        UnitSection { metric: self.metric.clone(), g: self.g.iter().map(|m| -m).collect() }
    }

    /// Largest `|g^3 + g|`.
    pub fn unit_residual(&self) -> f64 {
        self.g.iter().map(|m| (m * m * m + m).norm()).fold(0.0, f64::max)
    }

    /// Largest relative Fourier coefficient in the outer tenth of the spectrum.
    pub fn spectral_tail(&self) -> f64 {
        let grid = self.metric.grid();
        (0..9)
            .map(|k| {
                let c: Vec<C64> = self.g.iter().map(|m| C64::new(m[(k / 3, k % 3)], 0.0)).collect();
                if c.iter().all(|z| z.norm() < 1e-14) {
                    0.0
                } else {
                    grid.spectral_tail(&c, 0.9)
                }
            })
            .fold(0.0, f64::max)
    }

    /// `pi = -g (g + i Id) / 2`, the projector onto the `+i` eigenline.
    pub fn projector(&self) -> Projector {
        Projector {
            pi: self
                .g
                .iter()
                .map(|m| {
                    let c = to_complex(m);
                    -(c * (c + Mat3C::identity() * I)).scale(0.5)
                })
                .collect(),
        }
    }
}

/// Pointwise rank-one Hermitian projector.
#[derive(Debug, Clone)]
pub struct Projector {
    pub pi: Vec<Mat3C>,
}

/// Worst pointwise defects of the projector algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorResiduals {
    pub idempotent: f64,
    pub hermitian: f64,
    pub trace: f64,
    /// `pi + pi_perp - Id` with `pi_perp = Id + g (g + i Id) / 2`
    pub complement: f64,
}

impl Projector {
    pub fn complement(&self) -> Vec<Mat3C> {
        self.pi.iter().map(|p| Mat3C::identity() - p).collect()
    }

    pub fn residuals(&self, g: &UnitSection) -> ProjectorResiduals {
        let mut r = ProjectorResiduals { idempotent: 0.0, hermitian: 0.0, trace: 0.0, complement: 0.0 };
        for (p, m) in self.pi.iter().zip(g.values()) {
            let c = to_complex(m);
            let perp = Mat3C::identity() + (c * (c + Mat3C::identity() * I)).scale(0.5);
            r.idempotent = r.idempotent.max(cnorm(&(p * p - p)));
            r.hermitian = r.hermitian.max(cnorm(&(p.adjoint() - p)));
            r.trace = r.trace.max((p.trace() - C64::new(1.0, 0.0)).norm());
            r.complement = r.complement.max(cnorm(&(p + perp - Mat3C::identity())));
        }
        r
    }
}

/// Degree-one solution of `a g = V(a)`:
/// `a = r (Id + g^2 + sin(theta) g - cos(theta) g^2)`.
pub fn vertical_solution_a(g: &UnitSection, r: Option<&[Mat3]>) -> FourierField {
    let n = g.values().len();
    let id = Mat3::identity();
    let rr = |p: usize| to_complex(&r.map_or(id, |r| r[p]));
    let mut a0 = Vec::with_capacity(n);
    let mut a1 = Vec::with_capacity(n);
    let mut am = Vec::with_capacity(n);
    for (p, m) in g.values().iter().enumerate() {
        let c = to_complex(m);
        let ci = Mat3C::identity() * I;
        a0.push(rr(p) * to_complex(&(id + m * m)));
        a1.push(-(rr(p) * c * (c + ci)).scale(0.5));
        am.push(-(rr(p) * c * (c - ci)).scale(0.5));
    }
    FourierField::from_modes(g.metric(), vec![(0, a0), (1, a1), (-1, am)])
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `|X g| + |A| sup|g|`: the size of `d_A g` before any cancellation.
pub(crate) fn covariant_scale(a: &Connection, g: &FourierField) -> f64 {
    g.x_op().norm() + a.to_field().norm() * g.max_coefficient()
}

/// `|eta_- g| + |A_{-1}| sup|g|`.
fn dbar_scale(a: &Connection, g: &FourierField) -> f64 {
    let am = FourierField::from_mode(a.metric(), -1, a.mode_minus());
    g.eta_minus().norm() + am.norm() * g.max_coefficient()
}

/// `|*d_A g + [d_A g, g]|` relative to the terms of `d_A g`; zero for
/// covariantly constant `g`.
pub fn gmero_residual(g: &UnitSection, a: &Connection) -> f64 {
    let gf = g.to_field();
    let d = a.covariant_derivative(&gf);
    let star = -&d.vertical();
    ratio((&star + &commutator(&d, &gf)).norm(), covariant_scale(a, &gf))
}

/// The four equivalent holomorphicity conditions on `g`, as relative residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaEqResiduals {
    /// `-*d_A g = [d_A g, g]`
    pub gmero: f64,
    /// `dbar_A g = i [dbar_A g, g]`
    pub dbar_eigen: f64,
    /// `(dbar_A pi) pi = 0`: the `+i` eigenline is holomorphic
    pub line_bundle: f64,
    /// `pi_perp dbar_A pi = 0`
    pub projector: f64,
    /// `g (d_A g) g = 0`, a consequence of `g` being unit
    pub sandwich: f64,
}

impl LemmaEqResiduals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.gmero, self.dbar_eigen, self.line_bundle, self.projector]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }
}

pub fn lemma_eq_residuals(g: &UnitSection, a: &Connection) -> LemmaEqResiduals {
    let metric = g.metric();
    let gf = g.to_field();
    let d = a.covariant_derivative(&gf);
    let star = -&d.vertical();
    let scale = covariant_scale(a, &gf);
    let gmero = ratio((&star + &commutator(&d, &gf)).norm(), scale);

    let db = a.dbar(&gf);
    let dbar_eigen = ratio((&db - &commutator(&db, &gf).scale(I)).norm(), dbar_scale(a, &gf));

    let proj = g.projector();
    let pi = FourierField::from_mode(metric, 0, proj.pi.clone());
    let perp = FourierField::from_mode(metric, 0, proj.complement());
    let dpi = a.dbar(&pi);
    let pscale = dbar_scale(a, &pi);
    let line_bundle = ratio(dpi.mul(&pi).norm(), pscale);
    let projector = ratio(perp.mul(&dpi).norm(), pscale);

    let sandwich = ratio(gf.mul(&d).mul(&gf).norm(), scale);
    LemmaEqResiduals { gmero, dbar_eigen, line_bundle, projector, sandwich }
}

/// Pointwise `g <g, Phi>`.
pub fn project_on_section(g: &UnitSection, phi: &[Mat3]) -> Vec<Mat3> {
    g.values().iter().zip(phi).map(|(g, p)| g * inner(g, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie3::so3_exp;
    use crate::random::{random_axes, FieldRng};
    use crate::torus::{build_metric, LambdaSpec};

    fn metric() -> Arc<TorusMetric> {
        Arc::new(build_metric(32, 32, 1.0, 1.0, &LambdaSpec::single(0.1)).unwrap())
    }

    #[test]
    fn rejects_non_unit_and_unresolved_sections() {
        let m = metric();
        let n = m.grid().len();
        assert!(matches!(UnitSection::new(&m, vec![hat(&Vec3::new(0.0, 0.0, 2.0)).0; n]), Err(Error::NotUnit(_))));
        let rough: Vec<Vec3> = (0..n).map(|p| if p % 2 == 0 { Vec3::z() } else { Vec3::x() }).collect();
        assert!(matches!(UnitSection::from_axes(&m, &rough), Err(Error::NotSmooth(_))));
    }

    #[test]
    fn vertical_solution_is_rotation_about_g() {
        let m = metric();
        let g = UnitSection::constant(&m, Vec3::z()).unwrap();
        let a = vertical_solution_a(&g, None);
        for &th in &[0.0, 0.3, 2.0, 4.5] {
            let v = a.value_at(5, th);
            let oracle = so3_exp(&So3(g.values()[0]), th).0.transpose();
            let alt = so3_exp(&So3(g.values()[0]), th).0;
            let d = cnorm(&(v - to_complex(&oracle))).min(cnorm(&(v - to_complex(&alt))));
            assert!(d < 1e-14, "{th}: {d}");
        }
    }

    #[test]
    fn vertical_solution_identities() {
        let m = metric();
        let mut rng = FieldRng::seed(21);
        let axes = random_axes(m.grid(), &mut rng, 1, 0.15, Vec3::z());
        let g = UnitSection::from_axes(&m, &axes).unwrap();
        let a = vertical_solution_a(&g, None);
        let ag = a.mul(&g.to_field());
        assert!((&ag - &a.vertical()).norm() < 1e-13 * a.norm());
        assert!(a.orthogonality_residual(16) < 1e-13);
        // a_1 kills Ker g and E_{-i}
        let a1 = a.mode(1).unwrap();
        for (p, gm) in g.values().iter().enumerate().step_by(31) {
            let axis = to_complex(&Mat3::from_columns(&[vee(gm), Vec3::zeros(), Vec3::zeros()]));
            assert!(cnorm(&(a1[p] * axis)) < 1e-14);
            let c = to_complex(gm);
            let e_minus = (c * c - c * I).scale(0.5);
            // columns of g^2 - i g span E_{-i}
            assert!(cnorm(&(c * e_minus + e_minus * I)) < 1e-14);
            assert!(cnorm(&(a1[p] * e_minus)) < 1e-14);
        }
        let r = g.projector().residuals(&g);
        assert!(r.idempotent.max(r.hermitian).max(r.trace).max(r.complement) < 1e-12);
    }

    #[test]
    fn constant_section_is_holomorphic_for_trivial_connection() {
        let m = metric();
        let g = UnitSection::constant(&m, Vec3::new(1.0, 2.0, 2.0)).unwrap();
        let r = lemma_eq_residuals(&g, &Connection::zero(&m));
        assert_eq!(r.as_array(), [0.0; 4]);
        assert_eq!(gmero_residual(&g, &Connection::zero(&m)), 0.0);
    }

    #[test]
    fn random_sections_fail_every_condition() {
        let m = metric();
        let mut rng = FieldRng::seed(22);
        let axes = random_axes(m.grid(), &mut rng, 1, 0.15, Vec3::z());
        let g = UnitSection::from_axes(&m, &axes).unwrap();
        let r = lemma_eq_residuals(&g, &Connection::zero(&m));
        assert!(r.as_array().iter().all(|&x| x > 1e-2), "{r:?}");
        assert!(r.sandwich < 1e-10);
    }
}
