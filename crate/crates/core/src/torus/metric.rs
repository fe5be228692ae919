use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie3::C64;
use crate::torus::grid::{signed_index, Grid, Symbol};
use crate::torus::interp::PeriodicInterpolant;

/// One term `amplitude * cos(2 pi (kx x / Lx + ky y / Ly) + phase)` of the
/// log conformal factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    pub kx: i32,
    pub ky: i32,
    #[serde(default)]
    pub phase: f64,
}

/// Log conformal factor as a finite trigonometric sum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LambdaSpec {
    #[serde(default)]
    pub harmonics: Vec<Harmonic>,
}

impl LambdaSpec {
    pub fn flat() -> Self {
        Self::default()
    }

    /// `eps * cos(2 pi x / Lx)`.
    pub fn single(eps: f64) -> Self {
        LambdaSpec { harmonics: vec![Harmonic { amplitude: eps, kx: 1, ky: 0, phase: 0.0 }] }
    }

    /// `(lambda, lambda_x, lambda_y)` at a point.
    pub fn eval(&self, x: f64, y: f64, lx: f64, ly: f64) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for h in &self.harmonics {
            let (ax, ay) = (2.0 * PI * h.kx as f64 / lx, 2.0 * PI * h.ky as f64 / ly);
            let arg = ax * x + ay * y + h.phase;
            let (s, c) = arg.sin_cos();
            out.0 += h.amplitude * c;
            out.1 -= h.amplitude * ax * s;
            out.2 -= h.amplitude * ay * s;
        }
        out
    }
}

/// How `lambda` and its gradient are evaluated away from grid points.
#[derive(Debug, Clone)]
enum OffGrid {
    /// Few Fourier terms: exact evaluation of the trigonometric sum.
    Sparse(Vec<(C64, f64, f64)>),
    /// Refined-grid Lagrange interpolation of `(lambda, lambda_x, lambda_y)`.
    Interpolated(PeriodicInterpolant),
}

/// Most complex Fourier terms (eight real harmonics plus the mean) that still
/// use exact off-grid evaluation.
const SPARSE_TERMS: usize = 17;

/// Conformally flat metric `e^{2 lambda} (dx^2 + dy^2)` on a periodic grid.
#[derive(Debug, Clone)]
pub struct TorusMetric {
    grid: Grid,
    lambda: Vec<f64>,
    lambda_x: Vec<f64>,
    lambda_y: Vec<f64>,
    curvature: Vec<f64>,
    offgrid: OffGrid,
}

/// Builds the metric for a harmonic `lambda` on an `nx x ny` grid.
pub fn build_metric(nx: usize, ny: usize, lx: f64, ly: f64, spec: &LambdaSpec) -> Result<TorusMetric> {
    if nx < 16 || ny < 16 {
        return Err(Error::InvalidGrid(format!("grid {nx}x{ny} must be at least 16x16")));
    }
    let grid = Grid::new(nx, ny, lx, ly)?;
    let lambda = grid.sample(|x, y| spec.eval(x, y, lx, ly).0);
    TorusMetric::from_lambda(grid, lambda)
}

impl TorusMetric {
    pub fn flat(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        build_metric(nx, ny, lx, ly, &LambdaSpec::flat())
    }

    /// Builds the metric from sampled `lambda`; derivatives are spectral.
    pub fn from_lambda(grid: Grid, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != grid.len() {
            return Err(Error::Format(format!("lambda has {} samples, grid has {}", lambda.len(), grid.len())));
        }
        let lc: Vec<C64> = lambda.iter().map(|&v| C64::new(v, 0.0)).collect();
        let nyq = grid.nyquist_content(&lc);
        if nyq > 1e-10 {
            return Err(Error::NonSmoothLambda(nyq));
        }
        let d = grid.derive_real(&lambda, &[Symbol::Dx, Symbol::Dy, Symbol::Laplacian]);
        let curvature: Vec<f64> = lambda.iter().zip(&d[2]).map(|(l, lap)| -(-2.0 * l).exp() * lap).collect();

        let mut spec = lc;
        grid.fft2(&mut spec);
        let n = grid.len() as f64;
        let top = spec.iter().map(|z| z.norm() / n).fold(0.0, f64::max);
        let cut = 1e-13 * top.max(1.0);
        let terms: Vec<(C64, f64, f64)> = spec
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() / n > cut)
            .map(|(p, z)| {
                let (i, j) = (p % grid.nx, p / grid.nx);
                let kx = 2.0 * PI * signed_index(i, grid.nx) as f64 / grid.lx;
                let ky = 2.0 * PI * signed_index(j, grid.ny) as f64 / grid.ly;
                (z / n, kx, ky)
            })
            .collect();
        let offgrid = if terms.len() <= SPARSE_TERMS {
            OffGrid::Sparse(terms)
        } else {
            OffGrid::Interpolated(PeriodicInterpolant::new(&grid, &[lambda.clone(), d[0].clone(), d[1].clone()]))
        };
        let mut it = d.into_iter();
        let lambda_x = it.next().expect("dx");
        let lambda_y = it.next().expect("dy");
        Ok(TorusMetric { grid, lambda, lambda_x, lambda_y, curvature, offgrid })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda_x(&self) -> &[f64] {
        &self.lambda_x
    }

    pub fn lambda_y(&self) -> &[f64] {
        &self.lambda_y
    }

    /// Gaussian curvature `K = -e^{-2 lambda} Laplacian(lambda)`.
    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    pub fn is_flat(&self) -> bool {
        self.lambda.iter().all(|&l| l == 0.0)
    }

    /// True when off-grid evaluation is an exact trigonometric sum.
    pub fn exact_off_grid(&self) -> bool {
        matches!(self.offgrid, OffGrid::Sparse(_))
    }

    /// `(lambda, lambda_x, lambda_y)` at an arbitrary point.
    pub fn lambda_at(&self, x: f64, y: f64) -> (f64, f64, f64) {
        match &self.offgrid {
            OffGrid::Sparse(terms) => {
                let mut out = (0.0, 0.0, 0.0);
                for (c, kx, ky) in terms {
                    let e = c * C64::new(0.0, kx * x + ky * y).exp();
                    out.0 += e.re;
                    out.1 -= kx * e.im;
                    out.2 -= ky * e.im;
                }
                out
            }
            OffGrid::Interpolated(ip) => {
                let mut v = [0.0; 3];
                ip.eval_into(x.rem_euclid(self.grid.lx), y.rem_euclid(self.grid.ly), &mut v);
                (v[0], v[1], v[2])
            }
        }
    }

    /// Riemannian area `sum e^{2 lambda} dx dy`.
    pub fn area(&self) -> f64 {
        self.lambda.iter().map(|l| (2.0 * l).exp()).sum::<f64>() * self.grid.cell_area()
    }

    /// Same grid and same conformal factor.
    pub fn same_as(&self, other: &TorusMetric) -> bool {
        self.grid == other.grid && self.lambda == other.lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_torus_has_zero_curvature() {
        let m = TorusMetric::flat(16, 16, 1.0, 1.0).unwrap();
        assert!(m.curvature().iter().all(|k| k.abs() < 1e-14));
        assert!(m.is_flat());
        assert!(m.exact_off_grid());
    }

    #[test]
    fn single_harmonic_curvature_matches_symbolic_formula() {
        let (eps, lx) = (0.1, 1.3);
        let m = build_metric(64, 32, lx, 0.9, &LambdaSpec::single(eps)).unwrap();
        let k0 = 2.0 * PI / lx;
        for (p, (x, _)) in m.grid().points().enumerate() {
            let l = eps * (k0 * x).cos();
            let expected = (-2.0 * l).exp() * eps * k0 * k0 * (k0 * x).cos();
            assert!((m.curvature()[p] - expected).abs() < 1e-11);
        }
    }

    #[test]
    fn curvature_is_grid_independent() {
        let spec = LambdaSpec {
            harmonics: vec![
                Harmonic { amplitude: 0.1, kx: 1, ky: 0, phase: 0.0 },
                Harmonic { amplitude: 0.05, kx: 1, ky: 2, phase: 0.3 },
            ],
        };
        let a = build_metric(32, 32, 1.0, 1.0, &spec).unwrap();
        let b = build_metric(64, 64, 1.0, 1.0, &spec).unwrap();
        for j in 0..32 {
            for i in 0..32 {
                let ka = a.curvature()[j * 32 + i];
                let kb = b.curvature()[(2 * j) * 64 + 2 * i];
                assert!((ka - kb).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn off_grid_evaluation_is_exact_for_harmonic_lambda() {
        let spec = LambdaSpec { harmonics: vec![Harmonic { amplitude: 0.2, kx: 2, ky: -1, phase: 0.7 }] };
        let m = build_metric(32, 32, 1.0, 2.0, &spec).unwrap();
        assert!(m.exact_off_grid());
        for &(x, y) in &[(0.31, 1.77), (0.9, 0.05)] {
            let (a, b) = (m.lambda_at(x, y), spec.eval(x, y, 1.0, 2.0));
            assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-13 && (a.2 - b.2).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_unresolved_lambda_and_small_grids() {
        let spec = LambdaSpec { harmonics: vec![Harmonic { amplitude: 0.1, kx: 8, ky: 0, phase: 0.0 }] };
        assert!(matches!(build_metric(16, 16, 1.0, 1.0, &spec), Err(Error::NonSmoothLambda(_))));
        assert!(matches!(build_metric(8, 16, 1.0, 1.0, &LambdaSpec::flat()), Err(Error::InvalidGrid(_))));
    }
}
