//! Transport of the cocycle `C' = -(A + Phi) C` along geodesics and the
//! residuals that certify a trivializing function.

use std::fmt::Write as _;
use std::thread;

use crate::error::{Error, Result};
use crate::lie3::{cnorm, polar_project, to_complex, Mat3, Mat3C, C64};
use crate::smfield::{commutator, FourierField, Higgs, Pair};
use crate::torus::geodesic::{geodesic_rhs, plan_steps};
use crate::torus::{GeodesicPath, PeriodicInterpolant, SMPoint, TorusMetric, TrigEvaluator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    pub dt: f64,
    /// polar re-projection of `C` every this many steps
    pub reproject_every: Option<usize>,
    pub drift_tolerance: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { dt: 1e-3, reproject_every: None, drift_tolerance: 1e-6 }
    }
}

/// Samples of `C(t)` along a geodesic.
#[derive(Debug, Clone)]
pub struct CocycleResult {
    pub path: GeodesicPath,
    /// `cocycle[k]` is `C(path.times[k])`
    pub cocycle: Vec<Mat3>,
    /// `|C^t C - Id|` at each sample, measured before any re-projection
    pub drift: Vec<f64>,
    pub max_drift: f64,
    /// filled by [`triviality_residual`]
    pub comparison: Option<f64>,
}

impl CocycleResult {
    pub fn end(&self) -> Mat3 {
        *self.cocycle.last().expect("at least the initial sample")
    }

    /// CSV rows `t, c00..c22, drift`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,c00,c01,c02,c10,c11,c12,c20,c21,c22,drift\n");
        for ((t, c), d) in self.path.times.iter().zip(&self.cocycle).zip(&self.drift) {
            write!(s, "{t:.10e}").unwrap();
            for r in 0..3 {
                for k in 0..3 {
                    write!(s, ",{:.16e}", c[(r, k)]).unwrap();
                }
            }
            writeln!(s, ",{d:.6e}").unwrap();
        }
        s
    }
}

/// Off-grid evaluation of `A + Phi` by refined-grid interpolation of the
/// `cos`, `sin` and Higgs coefficients.
#[derive(Debug, Clone)]
pub struct PairSampler {
    interp: PeriodicInterpolant,
}

impl PairSampler {
    pub fn new(pair: &Pair) -> Self {
        let g = pair.metric().grid();
        let mut comps = Vec::with_capacity(27);
        for src in [&pair.connection.a, &pair.connection.b, &pair.higgs.phi] {
            for r in 0..3 {
                for c in 0..3 {
                    comps.push(src.iter().map(|m| m[(r, c)]).collect());
                }
            }
        }
        PairSampler { interp: PeriodicInterpolant::new(g, &comps) }
    }

    /// `A_{(x,v)} + Phi(x)` at `p`.
    pub fn eval(&self, p: &SMPoint) -> Mat3 {
        let mut v = [0.0; 27];
        self.interp.eval_into(p.x, p.y, &mut v);
        let (s, c) = p.theta.sin_cos();
        Mat3::from_fn(|r, k| {
            let i = r * 3 + k;
            v[i] * c + v[9 + i] * s + v[18 + i]
        })
    }
}

fn wrap_point(metric: &TorusMetric, p: &SMPoint) -> SMPoint {
    p.wrapped(metric.grid().lx, metric.grid().ly)
}

fn transport_with(metric: &TorusMetric, sampler: &PairSampler, p0: SMPoint, t_total: f64, opts: &TransportOptions) -> Result<CocycleResult> {
    let (steps, h) = plan_steps(metric, t_total, opts.dt)?;
    let (lx, ly) = (metric.grid().lx, metric.grid().ly);
    let rhs = |p: &SMPoint, c: &Mat3| -> ([f64; 3], Mat3) {
        let w = wrap_point(metric, p);
        (geodesic_rhs(metric, p), -sampler.eval(&w) * c)
    };
    let shift = |p: &SMPoint, k: &[f64; 3], s: f64| SMPoint::new(p.x + s * k[0], p.y + s * k[1], p.theta + s * k[2]);

    let mut p = p0;
    let mut c = Mat3::identity();
    let mut times = vec![0.0];
    let mut points = vec![p.wrapped(lx, ly)];
    let mut cocycle = vec![c];
    let mut drift = vec![0.0];
    let mut max_drift: f64 = 0.0;
    for step in 1..=steps {
        let (k1p, k1c) = rhs(&p, &c);
        let (k2p, k2c) = rhs(&shift(&p, &k1p, 0.5 * h), &(c + k1c * (0.5 * h)));
        let (k3p, k3c) = rhs(&shift(&p, &k2p, 0.5 * h), &(c + k2c * (0.5 * h)));
        let (k4p, k4c) = rhs(&shift(&p, &k3p, h), &(c + k3c * h));
        let kp = [0, 1, 2].map(|i| (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]) / 6.0);
        p = shift(&p, &kp, h);
        c += (k1c + k2c * 2.0 + k3c * 2.0 + k4c) * (h / 6.0);

        let d = (c.transpose() * c - Mat3::identity()).norm();
        if d > opts.drift_tolerance {
            return Err(Error::NonOrthogonalDrift(d));
        }
        max_drift = max_drift.max(d);
        if let Some(every) = opts.reproject_every {
            if every > 0 && step % every == 0 {
                c = polar_project(&c);
            }
        }
        times.push(step as f64 * h);
        points.push(p.wrapped(lx, ly));
        cocycle.push(c);
        drift.push(d);
    }
    Ok(CocycleResult { path: GeodesicPath { times, points, dt: h, order: 4 }, cocycle, drift, max_drift, comparison: None })
}

/// Integrates the geodesic and the cocycle jointly with RK4.
pub fn transport(pair: &Pair, p0: SMPoint, t_total: f64, opts: &TransportOptions) -> Result<CocycleResult> {
    transport_with(pair.metric(), &PairSampler::new(pair), p0, t_total, opts)
}

/// Independent transports from several starting points, spread over threads.
pub fn transport_many(pair: &Pair, starts: &[SMPoint], t_total: f64, opts: &TransportOptions) -> Vec<Result<CocycleResult>> {
    let sampler = PairSampler::new(pair);
    let metric = pair.metric();
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(starts.len().max(1));
    let chunk = starts.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = starts
            .chunks(chunk)
            .map(|part| {
                let sampler = &sampler;
                s.spawn(move || part.iter().map(|p| transport_with(metric, sampler, *p, t_total, opts)).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("transport worker panicked")).collect()
    })
}

/// Exact off-grid evaluation of a field: trigonometric interpolation in
/// `(x, y)` and the finite Fourier series in `theta`.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    degree: usize,
    eval: TrigEvaluator,
}

impl FieldEvaluator {
    pub fn new(u: &FourierField) -> Self {
        let mut comps = Vec::new();
        for (_, v) in u.modes() {
            for r in 0..3 {
                for c in 0..3 {
                    comps.push(v.iter().map(|m| m[(r, c)]).collect());
                }
            }
        }
        FieldEvaluator { degree: u.degree(), eval: TrigEvaluator::new(u.grid(), &comps) }
    }

    pub fn eval(&self, p: &SMPoint) -> Mat3C {
        let v = self.eval.eval(p.x, p.y);
        let d = self.degree as i32;
        let mut out = Mat3C::zeros();
        for (k, m) in (-d..=d).enumerate() {
            let e = C64::new(0.0, m as f64 * p.theta).exp();
            out += Mat3C::from_fn(|r, c| v[k * 9 + r * 3 + c]) * e;
        }
        out
    }
}

/// `max_t |C(t) - u(phi_t p0) u(p0)^{-1}|` with `u` sampled every
/// `sample_every` steps.
pub fn triviality_residual(
    pair: &Pair,
    u: &FourierField,
    p0: SMPoint,
    t_total: f64,
    opts: &TransportOptions,
    sample_every: usize,
) -> Result<CocycleResult> {
    let mut res = transport(pair, p0, t_total, opts)?;
    let ev = FieldEvaluator::new(u);
    let u0 = ev.eval(&res.path.points[0]);
    let u0_inv = u0.try_inverse().ok_or_else(|| Error::Format("trivializer is singular at the start point".into()))?;
    let mut worst: f64 = 0.0;
    let n = res.cocycle.len();
    let stride = sample_every.max(1);
    for k in (0..n).step_by(stride).chain(std::iter::once(n - 1)) {
        let predicted = ev.eval(&res.path.points[k]) * u0_inv;
        worst = worst.max(cnorm(&(predicted - to_complex(&res.cocycle[k]))));
    }
    res.comparison = Some(worst);
    Ok(res)
}

/// Closed geodesic of the flat torus through `(x0, y0)` winding `(p, q)`
/// times; returns the start point and the period.
pub fn flat_closed_geodesic(lx: f64, ly: f64, p: i32, q: i32, x0: f64, y0: f64) -> (SMPoint, f64) {
    let (dx, dy) = (p as f64 * lx, q as f64 * ly);
    (SMPoint::new(x0, y0, dy.atan2(dx)), dx.hypot(dy))
}

/// `|C(T) - Id|` around a closed orbit; fails with `NotClosed` when the orbit
/// misses its start by more than `1e-8`.
pub fn holonomy_closed(pair: &Pair, p0: SMPoint, period: f64, opts: &TransportOptions) -> Result<f64> {
    let res = transport(pair, p0, period, opts)?;
    let g = pair.metric().grid();
    let miss = res.path.end().periodic_distance(&p0.wrapped(g.lx, g.ly), g.lx, g.ly);
    if miss > 1e-8 {
        return Err(Error::NotClosed(miss));
    }
    Ok((res.end() - Mat3::identity()).norm())
}

/// `|X(u) + (A + Phi) u| / |u|` by mode calculus.
pub fn transport_residual_field(pair: &Pair, u: &FourierField) -> f64 {
    pair.transport_residual(u)
}

/// Per-mode residuals `|mu_+ u_{m-1} + mu_- u_{m+1} + Phi u_m| / |u|`.
pub fn mode_recurrence_residuals(pair: &Pair, u: &FourierField) -> Vec<(i32, f64)> {
    let n = u.norm();
    let c = &pair.connection;
    let phi = pair.higgs.to_field();
    let d = u.degree() as i32;
    (-(d + 1)..=(d + 1))
        .map(|m| {
            let single = |k: i32| FourierField::from_mode(u.metric(), k, u.mode_or_zero(k));
            let total = &(&c.mu_plus(&single(m - 1)) + &c.mu_minus(&single(m + 1))) + &phi.mul(&single(m));
            let r = total.mode_norm(m);
            (m, if n == 0.0 { 0.0 } else { r / n })
        })
        .collect()
}

/// Gauge action on pairs; `r^{-1} u` trivializes the result when `u`
/// trivializes the input.
pub fn gauge_transform(pair: &Pair, r: &[Mat3]) -> Pair {
    pair.gauge(r)
}

/// Relative residuals of `H f + V X f - [X f, f] + Psi = 0` and
/// `V Psi + [f, Psi] = 0` with `f = u^{-1} V u`, `Psi = u^{-1} Phi u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H0Residuals {
    pub first: f64,
    pub second: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn h0_first_terms(f: &FourierField) -> [FourierField; 3] {
    let xf = f.x_op();
    [f.h_op(), xf.vertical(), commutator(&xf, f)]
}

fn h0_second(f: &FourierField, psi: &FourierField, floor: f64) -> f64 {
    let vpsi = psi.vertical();
    let br = commutator(f, psi);
    ratio((&vpsi + &br).norm(), vpsi.norm() + br.norm() + floor)
}

/// Residuals for an orthogonal `u` and a Higgs field.
pub fn h0_residuals(u: &FourierField, phi: &Higgs) -> H0Residuals {
    let ut = u.transpose();
    let f = ut.mul(&u.vertical());
    let psi = ut.mul(&phi.to_field().mul(u));
    let [hf, vxf, br] = h0_first_terms(&f);
    let total = &(&(&hf + &vxf) - &br) + &psi;
    // orthogonal u has a fixed norm, which sets the scale when f and Psi vanish
    let floor = ratio(u.x_op().norm() * f.norm(), u.norm()) + u.norm();
    let first = ratio(total.norm(), hf.norm() + vxf.norm() + br.norm() + psi.norm() + floor);
    H0Residuals { first, second: h0_second(&f, &psi, floor) }
}

/// Second residual with `Psi` defined from the first equation; generic for
/// non-trivializing `u`.
pub fn h0_control_residual(u: &FourierField) -> f64 {
    let f = u.transpose().mul(&u.vertical());
    let [hf, vxf, br] = h0_first_terms(&f);
    let psi = -&(&(&hf + &vxf) - &br);
    h0_second(&f, &psi, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie3::{hat, so3_exp, So3, Vec3};
    use crate::random::{random_gauge, random_so3_grid, FieldRng};
    use crate::smfield::Connection;
    use crate::torus::{build_metric, LambdaSpec};
    use std::sync::Arc;

    fn flat(n: usize) -> Arc<TorusMetric> {
        Arc::new(TorusMetric::flat(n, n, 1.0, 1.0).unwrap())
    }

    #[test]
    fn trivial_pair_has_identity_cocycle() {
        let m = flat(16);
        let res = transport(&Pair::trivial(&m), SMPoint::new(0.1, 0.2, 0.3), 2.0, &TransportOptions::default()).unwrap();
        assert!(res.cocycle.iter().all(|c| *c == Mat3::identity()));
    }

    #[test]
    fn constant_higgs_gives_matrix_exponential() {
        let m = flat(16);
        let phi0 = 0.7;
        let h = hat(&Vec3::z()).0 * phi0;
        let pair = Pair::new(Connection::zero(&m), Higgs::new(&m, vec![h; m.grid().len()]));
        let t = 3.0;
        let res = transport(&pair, SMPoint::new(0.3, 0.1, 1.0), t, &TransportOptions::default()).unwrap();
        let oracle = so3_exp(&So3(h), -t).0;
        assert!((res.end() - oracle).norm() < 1e-12);
    }

    #[test]
    fn cocycle_composes() {
        let m = Arc::new(build_metric(32, 32, 1.0, 1.0, &LambdaSpec::single(0.1)).unwrap());
        let mut rng = FieldRng::seed(11);
        let pair = Pair::new(
            Connection::new(&m, random_so3_grid(m.grid(), &mut rng, 2, 0.5), random_so3_grid(m.grid(), &mut rng, 2, 0.5)),
            Higgs::new(&m, random_so3_grid(m.grid(), &mut rng, 2, 0.5)),
        );
        let opts = TransportOptions { reproject_every: None, drift_tolerance: 1e-6, dt: 1e-3 };
        let p0 = SMPoint::new(0.2, 0.7, 2.0);
        let whole = transport(&pair, p0, 3.0, &opts).unwrap();
        let first = transport(&pair, p0, 1.0, &opts).unwrap();
        let second = transport(&pair, first.path.end(), 2.0, &opts).unwrap();
        assert!((whole.end() - second.end() * first.end()).norm() < 1e-7);
    }

    #[test]
    fn non_orthogonal_drift_is_reported() {
        let m = flat(16);
        // a symmetric "Higgs" field is not in so(3): C leaves SO(3)
        let pair = Pair::new(Connection::zero(&m), Higgs::new(&m, vec![Mat3::identity(); m.grid().len()]));
        let r = transport(&pair, SMPoint::new(0.0, 0.0, 0.0), 1.0, &TransportOptions::default());
        assert!(matches!(r, Err(Error::NonOrthogonalDrift(_))));
    }

    #[test]
    fn closed_geodesic_check() {
        let m = flat(16);
        let (p0, t) = flat_closed_geodesic(1.0, 1.0, 1, 1, 0.1, 0.2);
        assert_eq!(holonomy_closed(&Pair::trivial(&m), p0, t, &TransportOptions::default()).unwrap(), 0.0);
        assert!(matches!(
            holonomy_closed(&Pair::trivial(&m), p0, 0.9 * t, &TransportOptions::default()),
            Err(Error::NotClosed(_))
        ));
    }

    #[test]
    fn field_evaluator_matches_grid() {
        let m = flat(16);
        let mut rng = FieldRng::seed(12);
        let u = crate::random::random_field(&m, &mut rng, &[-1, 0, 1], 3);
        let ev = FieldEvaluator::new(&u);
        let (x, y) = m.grid().point(37);
        let v = ev.eval(&SMPoint::new(x, y, 0.4));
        assert!(cnorm(&(v - u.value_at(37, 0.4))) < 1e-12);
    }

    #[test]
    fn gauge_acts_as_a_group_action() {
        let m = Arc::new(build_metric(64, 64, 1.0, 1.0, &LambdaSpec::single(0.1)).unwrap());
        let mut rng = FieldRng::seed(13);
        let pair = Pair::new(
            Connection::new(&m, random_so3_grid(m.grid(), &mut rng, 2, 0.5), random_so3_grid(m.grid(), &mut rng, 2, 0.5)),
            Higgs::new(&m, random_so3_grid(m.grid(), &mut rng, 2, 0.5)),
        );
        let r = random_gauge(m.grid(), &mut rng, 1, 0.5);
        let rinv: Vec<Mat3> = r.iter().map(|x| x.transpose()).collect();
        let back = gauge_transform(&gauge_transform(&pair, &r), &rinv);
        let diff = (0..m.grid().len())
            .map(|p| (back.connection.a[p] - pair.connection.a[p]).norm() + (back.higgs.phi[p] - pair.higgs.phi[p]).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "{diff}");
        let id = gauge_transform(&pair, &vec![Mat3::identity(); m.grid().len()]);
        assert!(id.connection.b == pair.connection.b);
    }

    #[test]
    fn identity_has_zero_h0_residuals() {
        let m = flat(16);
        let r = h0_residuals(&FourierField::identity(&m), &Higgs::zero(&m));
        assert_eq!(r, H0Residuals { first: 0.0, second: 0.0 });
    }
}
