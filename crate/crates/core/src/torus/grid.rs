use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lie3::{Mat3, Mat3C, C64};

/// Fourier multipliers used by the spectral calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Dx,
    Dy,
    /// `d = (d/dx - i d/dy) / 2`
    Del,
    /// `dbar = (d/dx + i d/dy) / 2`
    Dbar,
    Laplacian,
}

/// Periodic `nx x ny` grid on `[0, lx) x [0, ly)`, row-major with `x` fastest.
#[derive(Clone)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    plans: Arc<Plans>,
    // angular wavenumbers; the Nyquist entry is kept in `*_full` only
    kx: Vec<f64>,
    ky: Vec<f64>,
    kx_full: Vec<f64>,
    ky_full: Vec<f64>,
}

struct Plans {
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }
}

fn wavenumbers(n: usize, l: f64) -> (Vec<f64>, Vec<f64>) {
    let full: Vec<f64> = (0..n)
        .map(|j| {
            let s = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            2.0 * PI * s / l
        })
        .collect();
    let mut odd = full.clone();
    if n % 2 == 0 {
        odd[n / 2] = 0.0;
    }
    (odd, full)
}

/// Signed frequency of FFT index `j` on an `n`-point axis.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidGrid(format!("{nx}x{ny} is too small")));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidGrid(format!("periods {lx} x {ly} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            fx: planner.plan_fft_forward(nx),
            ix: planner.plan_fft_inverse(nx),
            fy: planner.plan_fft_forward(ny),
            iy: planner.plan_fft_inverse(ny),
        };
        let (kx, kx_full) = wavenumbers(nx, lx);
        let (ky, ky_full) = wavenumbers(ny, ly);
        Ok(Grid { nx, ny, lx, ly, plans: Arc::new(plans), kx, ky, kx_full, ky_full })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    /// Coordinates of flat index `p`.
    pub fn point(&self, p: usize) -> (f64, f64) {
        (self.x(p % self.nx), self.y(p / self.nx))
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |p| self.point(p))
    }

    /// Samples `f` at every grid point.
    pub fn sample<T>(&self, f: impl Fn(f64, f64) -> T) -> Vec<T> {
        self.points().map(|(x, y)| f(x, y)).collect()
    }

    /// Wrap a coordinate pair into the fundamental domain.
    pub fn wrap(&self, x: f64, y: f64) -> (f64, f64) {
        (x.rem_euclid(self.lx), y.rem_euclid(self.ly))
    }

    /// Unnormalized forward 2-D DFT, in place.
    pub fn fft2(&self, data: &mut [C64]) {
        self.transform(data, &self.plans.fx, &self.plans.fy);
    }

    /// Normalized inverse 2-D DFT, in place.
    pub fn ifft2(&self, data: &mut [C64]) {
        self.transform(data, &self.plans.ix, &self.plans.iy);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn transform(&self, data: &mut [C64], px: &Arc<dyn Fft<f64>>, py: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len());
        let (nx, ny) = (self.nx, self.ny);
        px.process(data);
        let mut t = vec![C64::default(); data.len()];
        for j in 0..ny {
            for i in 0..nx {
                t[i * ny + j] = data[j * nx + i];
            }
        }
        py.process(&mut t);
        for i in 0..nx {
            for j in 0..ny {
                data[j * nx + i] = t[i * ny + j];
            }
        }
    }

    fn multiplier(&self, s: Symbol, i: usize, j: usize) -> C64 {
        let (kx, ky) = (self.kx[i], self.ky[j]);
        match s {
            Symbol::Dx => C64::new(0.0, kx),
            Symbol::Dy => C64::new(0.0, ky),
            Symbol::Del => C64::new(0.5 * ky, 0.5 * kx),
            Symbol::Dbar => C64::new(-0.5 * ky, 0.5 * kx),
            Symbol::Laplacian => {
                let (a, b) = (self.kx_full[i], self.ky_full[j]);
                C64::new(-(a * a + b * b), 0.0)
            }
        }
    }

    /// Applies each symbol to the forward spectrum `spec`.
    fn apply_to_spectrum(&self, spec: &[C64], symbols: &[Symbol]) -> Vec<Vec<C64>> {
        symbols
            .iter()
            .map(|&s| {
                let mut out: Vec<C64> = spec
                    .iter()
                    .enumerate()
                    .map(|(p, z)| z * self.multiplier(s, p % self.nx, p / self.nx))
                    .collect();
                self.ifft2(&mut out);
                out
            })
            .collect()
    }

    /// Spectral derivatives of a complex scalar grid.
    pub fn derive(&self, f: &[C64], symbols: &[Symbol]) -> Vec<Vec<C64>> {
        let mut spec = f.to_vec();
        self.fft2(&mut spec);
        self.apply_to_spectrum(&spec, symbols)
    }

    pub fn derive1(&self, f: &[C64], symbol: Symbol) -> Vec<C64> {
        self.derive(f, &[symbol]).pop().expect("one symbol")
    }

    /// Spectral derivatives of a real scalar grid (real part of the result).
    pub fn derive_real(&self, f: &[f64], symbols: &[Symbol]) -> Vec<Vec<f64>> {
        let c: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.derive(&c, symbols)
            .into_iter()
            .map(|v| v.into_iter().map(|z| z.re).collect())
            .collect()
    }

    /// Entrywise spectral derivatives of a grid of complex matrices.
    pub fn derive_mat(&self, f: &[Mat3C], symbols: &[Symbol]) -> Vec<Vec<Mat3C>> {
        let n = self.len();
        let mut out = vec![vec![Mat3C::zeros(); n]; symbols.len()];
        let mut comp = vec![C64::default(); n];
        for e in 0..9 {
            for (c, m) in comp.iter_mut().zip(f) {
                *c = m[e];
            }
            self.fft2(&mut comp);
            for (k, d) in self.apply_to_spectrum(&comp, symbols).into_iter().enumerate() {
                for (o, z) in out[k].iter_mut().zip(d) {
                    o[e] = z;
                }
            }
        }
        out
    }

    pub fn derive_mat1(&self, f: &[Mat3C], symbol: Symbol) -> Vec<Mat3C> {
        self.derive_mat(f, &[symbol]).pop().expect("one symbol")
    }

    /// Entrywise spectral derivatives of a grid of real matrices.
    pub fn derive_mat_real(&self, f: &[Mat3], symbols: &[Symbol]) -> Vec<Vec<Mat3>> {
        let c: Vec<Mat3C> = f.iter().map(crate::lie3::to_complex).collect();
        self.derive_mat(&c, symbols)
            .into_iter()
            .map(|v| v.iter().map(crate::lie3::real_part).collect())
            .collect()
    }

    /// Largest normalized Fourier coefficient on the Nyquist rows/columns.
    pub fn nyquist_content(&self, f: &[C64]) -> f64 {
        let mut spec = f.to_vec();
        self.fft2(&mut spec);
        let n = self.len() as f64;
        let mut worst: f64 = 0.0;
        for (p, z) in spec.iter().enumerate() {
            let (i, j) = (p % self.nx, p / self.nx);
            let on_edge = (self.nx % 2 == 0 && i == self.nx / 2) || (self.ny % 2 == 0 && j == self.ny / 2);
            if on_edge {
                worst = worst.max(z.norm() / n);
            }
        }
        worst
    }

    /// Largest normalized Fourier coefficient in the outer band
    /// `max(|kx|/kx_max, |ky|/ky_max) >= frac`, relative to the largest one.
    pub fn spectral_tail(&self, f: &[C64], frac: f64) -> f64 {
        let mut spec = f.to_vec();
        self.fft2(&mut spec);
        let mut tail: f64 = 0.0;
        let mut top: f64 = 0.0;
        for (p, z) in spec.iter().enumerate() {
            let (i, j) = (p % self.nx, p / self.nx);
            let sx = signed_index(i, self.nx).unsigned_abs() as f64 / (self.nx / 2) as f64;
            let sy = signed_index(j, self.ny).unsigned_abs() as f64 / (self.ny / 2) as f64;
            top = top.max(z.norm());
            if sx.max(sy) >= frac {
                tail = tail.max(z.norm());
            }
        }
        if top == 0.0 {
            0.0
        } else {
            tail / top
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_trig_polynomial_are_exact() {
        let g = Grid::new(32, 16, 2.0, 1.5).unwrap();
        let (ax, ay) = (2.0 * PI / g.lx, 2.0 * PI / g.ly);
        let f = g.sample(|x, y| C64::new((3.0 * ax * x).sin() * (2.0 * ay * y).cos(), 0.0));
        let d = g.derive(&f, &[Symbol::Dx, Symbol::Dy, Symbol::Laplacian]);
        for (p, (x, y)) in g.points().enumerate() {
            let fx = 3.0 * ax * (3.0 * ax * x).cos() * (2.0 * ay * y).cos();
            let fy = -2.0 * ay * (3.0 * ax * x).sin() * (2.0 * ay * y).sin();
            let lap = -((3.0 * ax).powi(2) + (2.0 * ay).powi(2)) * f[p].re;
            assert!((d[0][p].re - fx).abs() < 1e-11);
            assert!((d[1][p].re - fy).abs() < 1e-11);
            assert!((d[2][p].re - lap).abs() < 1e-9);
        }
    }

    #[test]
    fn del_and_dbar_on_plane_waves() {
        // on e^{2 pi i x}: del = dbar = i pi; on e^{2 pi i y}: del = pi, dbar = -pi
        let g = Grid::new(16, 16, 1.0, 1.0).unwrap();
        let f = g.sample(|x, _| C64::new(0.0, 2.0 * PI * x).exp());
        let d = g.derive(&f, &[Symbol::Del, Symbol::Dbar]);
        for p in 0..g.len() {
            assert!((d[0][p] - C64::new(0.0, PI) * f[p]).norm() < 1e-12);
            assert!((d[1][p] - C64::new(0.0, PI) * f[p]).norm() < 1e-12);
        }
        let h = g.sample(|_, y| C64::new(0.0, 2.0 * PI * y).exp());
        let d = g.derive(&h, &[Symbol::Del, Symbol::Dbar]);
        for p in 0..g.len() {
            assert!((d[0][p] - PI * h[p]).norm() < 1e-12);
            assert!((d[1][p] + PI * h[p]).norm() < 1e-12);
        }
    }

    #[test]
    fn fft_round_trip() {
        let g = Grid::new(16, 8, 1.0, 1.0).unwrap();
        let f: Vec<C64> = (0..g.len()).map(|p| C64::new(p as f64, -(p as f64).sqrt())).collect();
        let mut s = f.clone();
        g.fft2(&mut s);
        g.ifft2(&mut s);
        for (a, b) in f.iter().zip(&s) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
