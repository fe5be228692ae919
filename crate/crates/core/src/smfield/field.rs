use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::lie3::{cnorm, to_complex, Mat3, Mat3C, C64, I};
use crate::torus::grid::{Grid, Symbol};
use crate::torus::{SampledField, TorusMetric};

/// Matrix-valued function on `SM` with a finite Fourier series in the fiber
/// angle: `u = sum_{|m| <= degree} u_m(x, y) e^{i m theta}`.
#[derive(Clone)]
pub struct FourierField {
    metric: Arc<TorusMetric>,
    degree: usize,
    /// `modes[m + degree]`
    modes: Vec<Vec<Mat3C>>,
}

impl fmt::Debug for FourierField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierField")
            .field("grid", self.metric.grid())
            .field("degree", &self.degree)
            .field("norm", &self.norm())
            .finish()
    }
}

fn check_same(a: &FourierField, b: &FourierField) {
    assert!(
        Arc::ptr_eq(&a.metric, &b.metric) || a.metric.grid() == b.metric.grid(),
        "fields live on different grids"
    );
}

impl FourierField {
    pub fn zeros(metric: &Arc<TorusMetric>, degree: usize) -> Self {
        let n = metric.grid().len();
        FourierField { metric: metric.clone(), degree, modes: vec![vec![Mat3C::zeros(); n]; 2 * degree + 1] }
    }

    /// Field with the single mode `m`.
    pub fn from_mode(metric: &Arc<TorusMetric>, m: i32, values: Vec<Mat3C>) -> Self {
        assert_eq!(values.len(), metric.grid().len());
        let mut f = Self::zeros(metric, m.unsigned_abs() as usize);
        *f.mode_mut(m) = values;
        f
    }

    pub fn from_modes(metric: &Arc<TorusMetric>, modes: Vec<(i32, Vec<Mat3C>)>) -> Self {
        let degree = modes.iter().map(|(m, _)| m.unsigned_abs() as usize).max().unwrap_or(0);
        let mut f = Self::zeros(metric, degree);
        for (m, v) in modes {
            assert_eq!(v.len(), metric.grid().len());
            *f.mode_mut(m) = v;
        }
        f
    }

    /// `theta`-independent real field.
    pub fn from_real_grid(metric: &Arc<TorusMetric>, values: &[Mat3]) -> Self {
        Self::from_mode(metric, 0, values.iter().map(to_complex).collect())
    }

    pub fn constant(metric: &Arc<TorusMetric>, value: Mat3C) -> Self {
        Self::from_mode(metric, 0, vec![value; metric.grid().len()])
    }

    pub fn identity(metric: &Arc<TorusMetric>) -> Self {
        Self::constant(metric, Mat3C::identity())
    }

    pub fn metric(&self) -> &Arc<TorusMetric> {
        &self.metric
    }

    pub fn grid(&self) -> &Grid {
        self.metric.grid()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mode(&self, m: i32) -> Option<&[Mat3C]> {
        if m.unsigned_abs() as usize > self.degree {
            None
        } else {
            Some(&self.modes[(m + self.degree as i32) as usize])
        }
    }

    /// Mode `m`, or zeros when `|m|` exceeds the degree.
    pub fn mode_or_zero(&self, m: i32) -> Vec<Mat3C> {
        self.mode(m).map(<[Mat3C]>::to_vec).unwrap_or_else(|| vec![Mat3C::zeros(); self.grid().len()])
    }

    /// Mutable mode `m`; panics when `|m|` exceeds the degree.
    pub fn mode_mut(&mut self, m: i32) -> &mut Vec<Mat3C> {
        assert!(m.unsigned_abs() as usize <= self.degree, "mode {m} beyond degree {}", self.degree);
        let d = self.degree as i32;
        &mut self.modes[(m + d) as usize]
    }

    /// `(m, values)` over all stored modes.
    pub fn modes(&self) -> impl Iterator<Item = (i32, &[Mat3C])> {
        let d = self.degree as i32;
        self.modes.iter().enumerate().map(move |(k, v)| (k as i32 - d, v.as_slice()))
    }

    /// Copy with storage for modes up to `degree`; higher modes are dropped.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut out = Self::zeros(&self.metric, degree);
        for (m, v) in self.modes() {
            if m.unsigned_abs() as usize <= degree {
                out.mode_mut(m).copy_from_slice(v);
            }
        }
        out
    }

    /// Keeps only the listed modes.
    pub fn project(&self, keep: &[i32]) -> Self {
        let mut out = Self::zeros(&self.metric, self.degree);
        for &m in keep {
            if let Some(v) = self.mode(m) {
                out.mode_mut(m).copy_from_slice(v);
            }
        }
        out
    }

    /// Largest `|m|` whose mode norm exceeds `tol * norm`.
    pub fn effective_degree(&self, tol: f64) -> usize {
        let total = self.norm();
        self.modes()
            .filter(|(m, _)| self.mode_norm(*m) > tol * total)
            .map(|(m, _)| m.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Applies `f(m, u_m)` to every mode.
    pub fn map_modes(&self, f: impl Fn(i32, &[Mat3C]) -> Vec<Mat3C>) -> Self {
        let modes = self.modes().map(|(m, v)| f(m, v)).collect();
        FourierField { metric: self.metric.clone(), degree: self.degree, modes }
    }

    /// Pointwise map applied to every mode coefficient.
    pub fn map_entries(&self, f: impl Fn(&Mat3C) -> Mat3C) -> Self {
        self.map_modes(|_, v| v.iter().map(&f).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_entries(|m| m * s)
    }

    /// The vertical field `V = d/dtheta`: mode `m` scaled by `i m`.
    pub fn vertical(&self) -> Self {
        self.map_modes(|m, v| {
            let s = C64::new(0.0, m as f64);
            v.iter().map(|a| a * s).collect()
        })
    }

    /// `eta_-`: mode `m` coefficient `h` goes to
    /// `e^{-(1+m) lambda} dbar(h e^{m lambda})` in mode `m - 1`.
    pub fn eta_minus(&self) -> Self {
        let mut out = Self::zeros(&self.metric, self.degree + 1);
        let lam = self.metric.lambda();
        for (m, h) in self.modes() {
            let mf = m as f64;
            let weighted: Vec<Mat3C> = h.iter().zip(lam).map(|(a, l)| a.scale((mf * l).exp())).collect();
            let d = self.grid().derive_mat1(&weighted, Symbol::Dbar);
            *out.mode_mut(m - 1) = d.iter().zip(lam).map(|(a, l)| a.scale((-(1.0 + mf) * l).exp())).collect();
        }
        out
    }

    /// `eta_+`: mode `m` coefficient `h` goes to
    /// `e^{(m-1) lambda} del(h e^{-m lambda})` in mode `m + 1`.
    pub fn eta_plus(&self) -> Self {
        let mut out = Self::zeros(&self.metric, self.degree + 1);
        let lam = self.metric.lambda();
        for (m, h) in self.modes() {
            let mf = m as f64;
            let weighted: Vec<Mat3C> = h.iter().zip(lam).map(|(a, l)| a.scale((-mf * l).exp())).collect();
            let d = self.grid().derive_mat1(&weighted, Symbol::Del);
            *out.mode_mut(m + 1) = d.iter().zip(lam).map(|(a, l)| a.scale(((mf - 1.0) * l).exp())).collect();
        }
        out
    }

    /// Geodesic vector field `X = eta_+ + eta_-`.
    pub fn x_op(&self) -> Self {
        &self.eta_plus() + &self.eta_minus()
    }

    /// Horizontal vector field `H = [V, X] = i (eta_+ - eta_-)`.
    pub fn h_op(&self) -> Self {
        (&self.eta_plus() - &self.eta_minus()).scale(I)
    }

    /// Product by mode convolution: `(uv)_m = sum_k u_k v_{m-k}`.
    pub fn mul(&self, other: &FourierField) -> Self {
        check_same(self, other);
        let mut out = Self::zeros(&self.metric, self.degree + other.degree);
        for (m1, a) in self.modes() {
            if a.iter().all(|x| *x == Mat3C::zeros()) {
                continue;
            }
            for (m2, b) in other.modes() {
                let target = out.mode_mut(m1 + m2);
                for ((t, x), y) in target.iter_mut().zip(a).zip(b) {
                    *t += x * y;
                }
            }
        }
        out
    }

    /// Pointwise transpose of the function (no conjugation).
    pub fn transpose(&self) -> Self {
        self.map_entries(|m| m.transpose())
    }

    /// Complex conjugate of the function: `(conj u)_m = conj(u_{-m})`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zeros(&self.metric, self.degree);
        for (m, v) in self.modes() {
            *out.mode_mut(-m) = v.iter().map(|a| a.map(|z| z.conj())).collect();
        }
        out
    }

    /// `sup_m |u_{-m} - conj(u_m)|` relative to the field's largest coefficient.
    pub fn reality_residual(&self) -> f64 {
        let scale = self.modes.iter().flatten().map(cnorm).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (m, v) in self.modes() {
            let w = self.mode(-m).expect("symmetric storage");
            for (a, b) in v.iter().zip(w) {
                worst = worst.max(cnorm(&(b - a.map(|z| z.conj()))));
            }
        }
        worst / scale
    }

    /// `<u, v> = int_SM trace(u v^*) dmu` with `dmu = e^{2 lambda} dx dy dtheta`.
    pub fn inner(&self, other: &FourierField) -> C64 {
        check_same(self, other);
        let lam = self.metric.lambda();
        let w = TAU * self.grid().cell_area();
        let mut acc = C64::default();
        for (m, a) in self.modes() {
            let Some(b) = other.mode(m) else { continue };
            for ((x, y), l) in a.iter().zip(b).zip(lam) {
                let tr: C64 = x.iter().zip(y.iter()).map(|(p, q)| p * q.conj()).sum();
                acc += tr * (2.0 * l).exp();
            }
        }
        acc * w
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn mode_norm(&self, m: i32) -> f64 {
        match self.mode(m) {
            None => 0.0,
            Some(v) => {
                let lam = self.metric.lambda();
                let s: f64 = v.iter().zip(lam).map(|(a, l)| a.norm_squared() * (2.0 * l).exp()).sum();
                (TAU * self.grid().cell_area() * s).sqrt()
            }
        }
    }

    /// Value at grid point `p` and fiber angle `theta`.
    pub fn value_at(&self, p: usize, theta: f64) -> Mat3C {
        self.modes().fold(Mat3C::zeros(), |acc, (m, v)| acc + v[p] * C64::new(0.0, m as f64 * theta).exp())
    }

    /// Samples at `ntheta` equispaced fiber angles.
    pub fn sample(&self, ntheta: usize) -> SampledField {
        let samples = (0..ntheta)
            .map(|k| {
                let th = TAU * k as f64 / ntheta as f64;
                let phases: Vec<(C64, &[Mat3C])> =
                    self.modes().map(|(m, v)| (C64::new(0.0, m as f64 * th).exp(), v)).collect();
                (0..self.grid().len())
                    .map(|p| phases.iter().fold(Mat3C::zeros(), |acc, (e, v)| acc + v[p] * *e))
                    .collect()
            })
            .collect();
        SampledField { ntheta, samples }
    }

    /// Fiber DFT of samples, keeping modes up to `degree`.
    pub fn from_samples(metric: &Arc<TorusMetric>, s: &SampledField, degree: usize) -> Self {
        let mut out = Self::zeros(metric, degree);
        let n = s.ntheta as f64;
        for m in -(degree as i32)..=degree as i32 {
            let target = out.mode_mut(m);
            for (k, samp) in s.samples.iter().enumerate() {
                let e = C64::new(0.0, -(m as f64) * s.theta(k)).exp() / n;
                for (t, v) in target.iter_mut().zip(samp) {
                    *t += v * e;
                }
            }
        }
        out
    }

    /// Largest `|u^t u - Id|` over grid points and `ntheta` fiber samples.
    pub fn orthogonality_residual(&self, ntheta: usize) -> f64 {
        let s = self.sample(ntheta);
        s.samples
            .iter()
            .flatten()
            .map(|u| cnorm(&(u.transpose() * u - Mat3C::identity())))
            .fold(0.0, f64::max)
    }

    /// Maximum Frobenius norm of any coefficient in any mode.
    pub fn max_coefficient(&self) -> f64 {
        self.modes.iter().flatten().map(cnorm).fold(0.0, f64::max)
    }
}

impl Add for &FourierField {
    type Output = FourierField;
    fn add(self, rhs: &FourierField) -> FourierField {
        check_same(self, rhs);
        let mut out = self.with_degree(self.degree.max(rhs.degree));
        for (m, v) in rhs.modes() {
            for (a, b) in out.mode_mut(m).iter_mut().zip(v) {
                *a += b;
            }
        }
        out
    }
}

impl Sub for &FourierField {
    type Output = FourierField;
    fn sub(self, rhs: &FourierField) -> FourierField {
        self + &(-rhs)
    }
}

impl Neg for &FourierField {
    type Output = FourierField;
    fn neg(self) -> FourierField {
        self.map_entries(|m| -m)
    }
}

impl Mul for &FourierField {
    type Output = FourierField;
    fn mul(self, rhs: &FourierField) -> FourierField {
        FourierField::mul(self, rhs)
    }
}

/// Mode `m` coefficient of a grid-pointwise commutator `[u, v]`.
pub fn commutator(u: &FourierField, v: &FourierField) -> FourierField {
    &u.mul(v) - &v.mul(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_field, FieldRng};
    use crate::torus::{build_metric, frame_apply, FrameField, LambdaSpec};

    fn metric(n: usize) -> Arc<TorusMetric> {
        Arc::new(build_metric(n, n, 1.0, 1.0, &LambdaSpec::single(0.1)).unwrap())
    }

    #[test]
    fn vertical_basics() {
        let m = metric(16);
        let mut rng = FieldRng::seed(1);
        let u0 = random_field(&m, &mut rng, &[0], 3);
        assert_eq!(u0.vertical().norm(), 0.0);
        let u = random_field(&m, &mut rng, &[-2, -1, 0, 1, 2], 3);
        let oracle = FourierField::from_samples(&m, &frame_apply(&m, FrameField::V, &u.sample(12)), 3);
        assert!((&u.vertical() - &oracle).norm() < 1e-10 * u.norm());
        // V^2 = -1 on modes +-1
        let a = random_field(&m, &mut rng, &[-1, 1], 3);
        assert!((&a.vertical().vertical() + &a).norm() < 1e-14 * a.norm());
    }

    #[test]
    fn multiply_conventions() {
        let m = metric(16);
        let mut rng = FieldRng::seed(2);
        let u = random_field(&m, &mut rng, &[-1, 0, 2], 3);
        assert!((&u.mul(&FourierField::identity(&m)) - &u).norm() == 0.0);
        let p = random_field(&m, &mut rng, &[1], 3);
        let q = random_field(&m, &mut rng, &[-1], 3);
        let pq = p.mul(&q);
        let expected: Vec<Mat3C> = p.mode(1).unwrap().iter().zip(q.mode(-1).unwrap()).map(|(a, b)| a * b).collect();
        assert_eq!(pq.mode(0).unwrap(), expected.as_slice());
        assert_eq!(pq.mode_norm(2), 0.0);
        // sample-space product oracle
        let v = random_field(&m, &mut rng, &[-2, 1], 3);
        let uv = u.mul(&v);
        let nt = 4 * (uv.degree() + 1);
        let (su, sv) = (u.sample(nt), v.sample(nt));
        let prod = su.zip_map(&sv, |a, b| a * b);
        let oracle = FourierField::from_samples(&m, &prod, uv.degree());
        assert!((&uv - &oracle).norm() < 1e-12 * uv.norm());
    }

    #[test]
    fn modes_are_orthogonal_and_identity_norm() {
        let m = metric(32);
        let mut rng = FieldRng::seed(3);
        let u = random_field(&m, &mut rng, &[1], 3);
        let v = random_field(&m, &mut rng, &[2], 3);
        assert_eq!(u.inner(&v), C64::default());
        let id = FourierField::identity(&m);
        let expected = 3.0 * TAU * m.area();
        assert!((id.inner(&id).re - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn eta_adjointness_and_reality() {
        let m = metric(32);
        let mut rng = FieldRng::seed(4);
        let u = random_field(&m, &mut rng, &[-2, -1, 0, 1, 2], 3);
        let v = random_field(&m, &mut rng, &[-3, -1, 0, 1, 3], 3);
        let lhs = u.eta_plus().inner(&v);
        let rhs = -u.inner(&v.eta_minus());
        assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0));
        // conj(eta_- u) = eta_+ conj(u)
        let d = &u.eta_minus().conj() - &u.conj().eta_plus();
        assert!(d.norm() < 1e-12 * u.norm());
    }

    #[test]
    fn flat_eta_minus_is_dbar() {
        let m = Arc::new(TorusMetric::flat(16, 16, 1.0, 1.0).unwrap());
        let mut rng = FieldRng::seed(5);
        let u = random_field(&m, &mut rng, &[2], 3);
        let e = u.eta_minus();
        let direct = m.grid().derive_mat1(u.mode(2).unwrap(), Symbol::Dbar);
        assert_eq!(e.mode(1).unwrap(), direct.as_slice());
        assert_eq!(FourierField::identity(&m).eta_minus().norm(), 0.0);
    }

    #[test]
    fn eta_matches_frame_oracle() {
        let m = metric(32);
        let mut rng = FieldRng::seed(6);
        let u = random_field(&m, &mut rng, &[-3, -1, 0, 2, 3], 3);
        let nt = 4 * (u.degree() + 2);
        let s = u.sample(nt);
        let xs = frame_apply(&m, FrameField::X, &s);
        let hs = frame_apply(&m, FrameField::H, &s);
        let plus = FourierField::from_samples(&m, &xs.zip_map(&hs, |x, h| (x - h * I).scale(0.5)), u.degree() + 1);
        let minus = FourierField::from_samples(&m, &xs.zip_map(&hs, |x, h| (x + h * I).scale(0.5)), u.degree() + 1);
        let scale = u.eta_plus().norm() + u.eta_minus().norm();
        assert!((&u.eta_plus() - &plus).norm() < 1e-8 * scale);
        assert!((&u.eta_minus() - &minus).norm() < 1e-8 * scale);
    }
}
