use std::sync::Arc;

use crate::lie3::{bracket, to_complex, Mat3, Mat3C, So3, C64, I};
use crate::smfield::field::FourierField;
use crate::torus::grid::Symbol;
use crate::torus::TorusMetric;

/// `so(3)` connection `A_{(x,v)} = a(x) cos(theta) + b(x) sin(theta)`.
///
/// With isothermal components `A = A_x dx + A_y dy` one has
/// `A_x = e^{lambda} a`, `A_y = e^{lambda} b`.
#[derive(Debug, Clone)]
pub struct Connection {
    metric: Arc<TorusMetric>,
    pub a: Vec<Mat3>,
    pub b: Vec<Mat3>,
}

/// `so(3)`-valued Higgs field on the torus.
#[derive(Debug, Clone)]
pub struct Higgs {
    metric: Arc<TorusMetric>,
    pub phi: Vec<Mat3>,
}

/// A connection together with a Higgs field.
#[derive(Debug, Clone)]
pub struct Pair {
    pub connection: Connection,
    pub higgs: Higgs,
}

fn grid_max_antisymmetry(v: &[Mat3]) -> f64 {
    v.iter().map(So3::antisymmetry_residual).fold(0.0, f64::max)
}

impl Connection {
    pub fn zero(metric: &Arc<TorusMetric>) -> Self {
        let n = metric.grid().len();
        Connection { metric: metric.clone(), a: vec![Mat3::zeros(); n], b: vec![Mat3::zeros(); n] }
    }

    pub fn new(metric: &Arc<TorusMetric>, a: Vec<Mat3>, b: Vec<Mat3>) -> Self {
        assert_eq!(a.len(), metric.grid().len());
        assert_eq!(b.len(), metric.grid().len());
        Connection { metric: metric.clone(), a, b }
    }

    /// Connection from isothermal components `A_x, A_y`.
    pub fn from_components(metric: &Arc<TorusMetric>, ax: &[Mat3], ay: &[Mat3]) -> Self {
        let lam = metric.lambda();
        let a = ax.iter().zip(lam).map(|(m, l)| m * (-l).exp()).collect();
        let b = ay.iter().zip(lam).map(|(m, l)| m * (-l).exp()).collect();
        Self::new(metric, a, b)
    }

    /// Reads the `+-1` modes of a field: `a = A_1 + A_{-1}`, `b = i (A_1 - A_{-1})`.
    /// Imaginary parts are discarded.
    pub fn from_field(f: &FourierField) -> Self {
        let p = f.mode_or_zero(1);
        let m = f.mode_or_zero(-1);
        let a = p.iter().zip(&m).map(|(x, y)| (x + y).map(|z| z.re)).collect();
        let b = p.iter().zip(&m).map(|(x, y)| ((x - y) * I).map(|z| z.re)).collect();
        Connection { metric: f.metric().clone(), a, b }
    }

    pub fn metric(&self) -> &Arc<TorusMetric> {
        &self.metric
    }

    /// `A_1 = (a - i b) / 2`.
    pub fn mode_plus(&self) -> Vec<Mat3C> {
        self.a.iter().zip(&self.b).map(|(a, b)| (to_complex(a) - to_complex(b) * I).scale(0.5)).collect()
    }

    /// `A_{-1} = (a + i b) / 2`.
    pub fn mode_minus(&self) -> Vec<Mat3C> {
        self.a.iter().zip(&self.b).map(|(a, b)| (to_complex(a) + to_complex(b) * I).scale(0.5)).collect()
    }

    pub fn to_field(&self) -> FourierField {
        FourierField::from_modes(&self.metric, vec![(1, self.mode_plus()), (-1, self.mode_minus())])
    }

    /// `A_x = e^{lambda} a`, `A_y = e^{lambda} b`.
    pub fn components(&self) -> (Vec<Mat3>, Vec<Mat3>) {
        let lam = self.metric.lambda();
        (
            self.a.iter().zip(lam).map(|(m, l)| m * l.exp()).collect(),
            self.b.iter().zip(lam).map(|(m, l)| m * l.exp()).collect(),
        )
    }

    /// Hodge star `*A = -V(A)`: `(a, b) -> (-b, a)`.
    pub fn hodge_star(&self) -> Connection {
        Connection { metric: self.metric.clone(), a: self.b.iter().map(|m| -m).collect(), b: self.a.clone() }
    }

    /// `*F_A = e^{-2 lambda} (d_x A_y - d_y A_x + [A_x, A_y])`.
    pub fn star_curvature(&self) -> Vec<Mat3> {
        let (ax, ay) = self.components();
        let g = self.metric.grid();
        let dy_ax = &g.derive_mat_real(&ax, &[Symbol::Dy])[0];
        let dx_ay = &g.derive_mat_real(&ay, &[Symbol::Dx])[0];
        (0..g.len())
            .map(|p| (dx_ay[p] - dy_ax[p] + bracket(&ax[p], &ay[p])) * (-2.0 * self.metric.lambda()[p]).exp())
            .collect()
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        grid_max_antisymmetry(&self.a).max(grid_max_antisymmetry(&self.b))
    }

    /// Gauge action `r^t d r + r^t A r`.
    pub fn gauge(&self, r: &[Mat3]) -> Connection {
        let g = self.metric.grid();
        let d = g.derive_mat_real(r, &[Symbol::Dx, Symbol::Dy]);
        let lam = self.metric.lambda();
        let a = (0..g.len())
            .map(|p| r[p].transpose() * (d[0][p] * (-lam[p]).exp() + self.a[p] * r[p]))
            .collect();
        let b = (0..g.len())
            .map(|p| r[p].transpose() * (d[1][p] * (-lam[p]).exp() + self.b[p] * r[p]))
            .collect();
        Connection { metric: self.metric.clone(), a, b }
    }

    /// `d_A g = X(g) + [A, g]` for a `theta`-independent `g`.
    pub fn covariant_derivative(&self, g: &FourierField) -> FourierField {
        let af = self.to_field();
        &g.x_op() + &crate::smfield::field::commutator(&af, g)
    }

    /// `dbar_A g = eta_-(g) + [A_{-1}, g]`, the `-1` mode of `d_A g`.
    pub fn dbar(&self, g: &FourierField) -> FourierField {
        let am = FourierField::from_mode(&self.metric, -1, self.mode_minus());
        &g.eta_minus() + &crate::smfield::field::commutator(&am, g)
    }

    /// `dbar_A g` as `(d_A g - i * d_A g) / 2` through the Hodge star.
    pub fn dbar_via_star(&self, g: &FourierField) -> FourierField {
        let d = self.covariant_derivative(g);
        // * = -V on one-forms viewed as functions on SM
        let star = -&d.vertical();
        (&d - &star.scale(I)).scale(C64::new(0.5, 0.0))
    }

    /// `mu_+ u = eta_+ u + A_1 u`.
    pub fn mu_plus(&self, u: &FourierField) -> FourierField {
        let ap = FourierField::from_mode(&self.metric, 1, self.mode_plus());
        &u.eta_plus() + &ap.mul(u)
    }

    /// `mu_- u = eta_- u + A_{-1} u`.
    pub fn mu_minus(&self, u: &FourierField) -> FourierField {
        let am = FourierField::from_mode(&self.metric, -1, self.mode_minus());
        &u.eta_minus() + &am.mul(u)
    }

    /// Relative residual of
    /// `|mu_+ u|^2 = |mu_- u|^2 + (1/2) <(i *F_A - m K) u, u>`
    /// for a field `u` supported in the single mode `m`.
    pub fn energy_identity_residual(&self, u: &FourierField, m: i32) -> f64 {
        let fa = self.star_curvature();
        let k = self.metric.curvature();
        let um = u.mode_or_zero(m);
        let cu: Vec<Mat3C> = (0..um.len())
            .map(|p| (to_complex(&fa[p]) * I - Mat3C::identity() * C64::new(m as f64 * k[p], 0.0)) * um[p])
            .collect();
        let cu = FourierField::from_mode(&self.metric, m, cu);
        let uf = FourierField::from_mode(&self.metric, m, um);
        let mp = self.mu_plus(&uf);
        let mm = self.mu_minus(&uf);
        let (ep, em) = (uf.eta_plus(), uf.eta_minus());
        let lhs = mp.norm().powi(2);
        let rhs_a = mm.norm().powi(2);
        let rhs_b = 0.5 * cu.inner(&uf);
        // sizes of mu_+- u before cancellation between eta and A
        let plus = ep.norm() + (&mp - &ep).norm();
        let minus = em.norm() + (&mm - &em).norm();
        let scale = plus * plus + minus * minus + 0.5 * cu.norm() * uf.norm();
        if scale == 0.0 {
            return 0.0;
        }
        (C64::new(lhs - rhs_a, 0.0) - rhs_b).norm() / scale
    }
}

impl Higgs {
    pub fn zero(metric: &Arc<TorusMetric>) -> Self {
        Higgs { metric: metric.clone(), phi: vec![Mat3::zeros(); metric.grid().len()] }
    }

    pub fn new(metric: &Arc<TorusMetric>, phi: Vec<Mat3>) -> Self {
        assert_eq!(phi.len(), metric.grid().len());
        Higgs { metric: metric.clone(), phi }
    }

    /// Real part of the zero mode.
    pub fn from_field(f: &FourierField) -> Self {
        let phi = f.mode_or_zero(0).iter().map(|m| m.map(|z| z.re)).collect();
        Higgs { metric: f.metric().clone(), phi }
    }

    pub fn to_field(&self) -> FourierField {
        FourierField::from_real_grid(&self.metric, &self.phi)
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        grid_max_antisymmetry(&self.phi)
    }

    pub fn gauge(&self, r: &[Mat3]) -> Higgs {
        Higgs { metric: self.metric.clone(), phi: self.phi.iter().zip(r).map(|(p, r)| r.transpose() * p * r).collect() }
    }

    /// Largest pointwise Frobenius norm.
    pub fn sup_norm(&self) -> f64 {
        self.phi.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }
}

impl Pair {
    pub fn new(connection: Connection, higgs: Higgs) -> Self {
        assert!(Arc::ptr_eq(connection.metric(), &higgs.metric) || connection.metric().same_as(&higgs.metric));
        Pair { connection, higgs }
    }

    pub fn trivial(metric: &Arc<TorusMetric>) -> Self {
        Pair { connection: Connection::zero(metric), higgs: Higgs::zero(metric) }
    }

    pub fn metric(&self) -> &Arc<TorusMetric> {
        self.connection.metric()
    }

    /// `A + Phi` as a field on `SM` (modes `-1, 0, 1`).
    pub fn transport_field(&self) -> FourierField {
        &self.connection.to_field() + &self.higgs.to_field()
    }

    /// `X(u) + (A + Phi) u`.
    pub fn transport_defect(&self, u: &FourierField) -> FourierField {
        &u.x_op() + &self.transport_field().mul(u)
    }

    /// `|X(u) + (A + Phi) u| / |u|`.
    pub fn transport_residual(&self, u: &FourierField) -> f64 {
        let n = u.norm();
        if n == 0.0 {
            return 0.0;
        }
        self.transport_defect(u).norm() / n
    }

    pub fn gauge(&self, r: &[Mat3]) -> Pair {
        Pair { connection: self.connection.gauge(r), higgs: self.higgs.gauge(r) }
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        self.connection.antisymmetry_residual().max(self.higgs.antisymmetry_residual())
    }
}

/// Complex grid of `r^t u` for a real gauge and a field.
pub fn gauge_trivializer(r: &[Mat3], u: &FourierField) -> FourierField {
    u.map_modes(|_, v| v.iter().zip(r).map(|(a, r)| to_complex(&r.transpose()) * a).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_field, random_so3_grid, FieldRng};
    use crate::torus::{build_metric, LambdaSpec};

    fn setup(seed: u64) -> (Arc<TorusMetric>, Connection, FieldRng) {
        let m = Arc::new(build_metric(32, 32, 1.0, 1.0, &LambdaSpec::single(0.1)).unwrap());
        let mut rng = FieldRng::seed(seed);
        let a = random_so3_grid(m.grid(), &mut rng, 3, 1.0);
        let b = random_so3_grid(m.grid(), &mut rng, 3, 1.0);
        let c = Connection::new(&m, a, b);
        (m, c, rng)
    }

    #[test]
    fn field_round_trip_and_star() {
        let (_, c, _) = setup(1);
        let back = Connection::from_field(&c.to_field());
        for p in 0..c.a.len() {
            assert!((back.a[p] - c.a[p]).norm() < 1e-14 && (back.b[p] - c.b[p]).norm() < 1e-14);
        }
        let star = c.hodge_star().to_field();
        assert!((&star + &c.to_field().vertical()).norm() < 1e-13);
        let ss = c.hodge_star().hodge_star();
        assert!(ss.a.iter().zip(&c.a).all(|(x, y)| (x + y).norm() == 0.0));
        assert!(c.to_field().reality_residual() < 1e-15);
    }

    #[test]
    fn dbar_routes_agree() {
        let (m, c, mut rng) = setup(2);
        let g = FourierField::from_real_grid(&m, &random_so3_grid(m.grid(), &mut rng, 3, 1.0));
        let d1 = c.dbar(&g);
        let d2 = c.dbar_via_star(&g);
        assert!((&d1 - &d2).norm() < 1e-12 * d1.norm());
        assert_eq!(d1.mode_norm(1), 0.0);
    }

    #[test]
    fn energy_identity_holds() {
        let (m, c, mut rng) = setup(3);
        for mode in [-2, 0, 1, 3] {
            let u = random_field(&m, &mut rng, &[mode], 3);
            let r = c.energy_identity_residual(&u, mode);
            assert!(r < 1e-9, "mode {mode}: {r}");
        }
    }

    #[test]
    fn mu_adjointness() {
        let (m, c, mut rng) = setup(4);
        let u = random_field(&m, &mut rng, &[1], 3);
        let v = random_field(&m, &mut rng, &[2], 3);
        let lhs = c.mu_plus(&u).inner(&v);
        let rhs = -u.inner(&c.mu_minus(&v));
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm());
    }

    #[test]
    fn flat_pure_gauge_is_flat() {
        let m = Arc::new(build_metric(64, 64, 1.0, 1.0, &LambdaSpec::single(0.2)).unwrap());
        let mut rng = FieldRng::seed(5);
        let r = crate::random::random_gauge(m.grid(), &mut rng, 1, 0.5);
        let c = Connection::zero(&m).gauge(&r);
        let f = c.star_curvature();
        let worst = f.iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
        assert!(c.antisymmetry_residual() < 1e-12);
    }
}
