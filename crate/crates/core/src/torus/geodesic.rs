use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::metric::TorusMetric;

/// A point `(x, y, theta)` of the unit tangent bundle; `theta` is the angle
/// from `d/dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SMPoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl SMPoint {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        SMPoint { x, y, theta }
    }

    /// Coordinates wrapped into `[0, Lx) x [0, Ly) x [0, 2 pi)`.
    pub fn wrapped(&self, lx: f64, ly: f64) -> SMPoint {
        SMPoint { x: self.x.rem_euclid(lx), y: self.y.rem_euclid(ly), theta: self.theta.rem_euclid(TAU) }
    }

    /// Distance on the flat product torus `R^2 / (Lx Z x Ly Z) x S^1`.
    pub fn periodic_distance(&self, other: &SMPoint, lx: f64, ly: f64) -> f64 {
        let d = |a: f64, b: f64, l: f64| {
            let r = (a - b).rem_euclid(l);
            r.min(l - r)
        };
        let (dx, dy, dt) = (d(self.x, other.x, lx), d(self.y, other.y, ly), d(self.theta, other.theta, TAU));
        (dx * dx + dy * dy + dt * dt).sqrt()
    }
}

/// Sampled orbit of the geodesic flow.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    /// wrapped coordinates
    pub points: Vec<SMPoint>,
    pub dt: f64,
    /// order of the one-step method
    pub order: u32,
}

impl GeodesicPath {
    pub fn end(&self) -> SMPoint {
        *self.points.last().expect("path has at least the initial point")
    }
}

/// Geodesic vector field `X` in isothermal coordinates.
pub fn geodesic_rhs(metric: &TorusMetric, p: &SMPoint) -> [f64; 3] {
    let (l, lx, ly) = metric.lambda_at(p.x, p.y);
    let e = (-l).exp();
    let (s, c) = p.theta.sin_cos();
    [e * c, e * s, e * (-lx * s + ly * c)]
}

/// Checks the step bound and returns `(steps, h)` with `steps * h = t_total`.
pub fn plan_steps(metric: &TorusMetric, t_total: f64, dt: f64) -> Result<(usize, f64)> {
    let g = metric.grid();
    let limit = 1e-2 * g.lx.min(g.ly);
    if !(dt.abs() > 0.0) || dt.abs() > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let steps = ((t_total.abs() / dt.abs()).ceil() as usize).max(1);
    Ok((steps, t_total / steps as f64))
}

pub(crate) fn rk4_geodesic_step(metric: &TorusMetric, p: &SMPoint, h: f64) -> SMPoint {
    let add = |p: &SMPoint, k: &[f64; 3], s: f64| SMPoint::new(p.x + s * k[0], p.y + s * k[1], p.theta + s * k[2]);
    let k1 = geodesic_rhs(metric, p);
    let k2 = geodesic_rhs(metric, &add(p, &k1, 0.5 * h));
    let k3 = geodesic_rhs(metric, &add(p, &k2, 0.5 * h));
    let k4 = geodesic_rhs(metric, &add(p, &k3, h));
    SMPoint::new(
        p.x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p.y + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        p.theta + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )
}

/// Integrates the geodesic flow from `p0` for time `t_total` (negative runs
/// backwards) with classical RK4 at step about `dt`.
pub fn integrate_geodesic(metric: &TorusMetric, p0: SMPoint, t_total: f64, dt: f64) -> Result<GeodesicPath> {
    let (steps, h) = plan_steps(metric, t_total, dt)?;
    let (lx, ly) = (metric.grid().lx, metric.grid().ly);
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    let mut p = p0;
    times.push(0.0);
    points.push(p.wrapped(lx, ly));
    for k in 1..=steps {
        // keep the state unwrapped between steps; only stored samples wrap
        p = rk4_geodesic_step(metric, &p, h);
        times.push(k as f64 * h);
        points.push(p.wrapped(lx, ly));
    }
    Ok(GeodesicPath { times, points, dt: h, order: 4 })
}

/// Maximum of `|e^{2 lambda}(x'^2 + y'^2) - 1|` with velocities from
/// fourth-order central differences of the stored path.
pub fn unit_speed_residual(metric: &TorusMetric, path: &GeodesicPath) -> f64 {
    let (lx, ly) = (metric.grid().lx, metric.grid().ly);
    let unwrap = |d: f64, l: f64| d - l * (d / l).round();
    let h = path.dt;
    let mut worst: f64 = 0.0;
    for w in path.points.windows(5) {
        let fd = |f: fn(&SMPoint) -> f64, l: f64| {
            let c = f(&w[2]);
            let d = |k: usize| unwrap(f(&w[k]) - c, l);
            (-d(4) + 8.0 * d(3) - 8.0 * d(1) + d(0)) / (12.0 * h)
        };
        let vx = fd(|p| p.x, lx);
        let vy = fd(|p| p.y, ly);
        let (l, _, _) = metric.lambda_at(w[2].x, w[2].y);
        worst = worst.max(((2.0 * l).exp() * (vx * vx + vy * vy) - 1.0).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::metric::{build_metric, LambdaSpec};

    #[test]
    fn flat_straight_line_closes() {
        let m = TorusMetric::flat(16, 16, 1.0, 1.0).unwrap();
        let path = integrate_geodesic(&m, SMPoint::new(0.0, 0.0, 0.0), 1.0, 1e-3).unwrap();
        assert!(path.end().periodic_distance(&SMPoint::new(0.0, 0.0, 0.0), 1.0, 1.0) < 1e-12);
    }

    #[test]
    fn flat_rational_slope_closes() {
        let (lx, ly) = (1.0, 2.0);
        let m = TorusMetric::flat(16, 16, lx, ly).unwrap();
        let th = (ly / lx).atan();
        let p0 = SMPoint::new(0.2, 0.3, th);
        let path = integrate_geodesic(&m, p0, (lx * lx + ly * ly).sqrt(), 1e-3).unwrap();
        assert!(path.end().periodic_distance(&p0, lx, ly) < 1e-12);
    }

    #[test]
    fn unit_speed_is_preserved() {
        let m = build_metric(32, 32, 1.0, 1.0, &LambdaSpec::single(0.1)).unwrap();
        let path = integrate_geodesic(&m, SMPoint::new(0.1, 0.2, 0.4), 50.0, 1e-3).unwrap();
        let r = unit_speed_residual(&m, &path);
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn step_bound_is_enforced() {
        let m = TorusMetric::flat(16, 16, 1.0, 1.0).unwrap();
        assert!(matches!(integrate_geodesic(&m, SMPoint::new(0.0, 0.0, 0.0), 1.0, 0.05), Err(Error::StepTooLarge { .. })));
    }
}
