//! Off-grid evaluation of periodic grid data.
//!
//! Two routes: [`TrigEvaluator`] evaluates the trigonometric interpolant
//! exactly (cost `O(nx ny)` per point), [`PeriodicInterpolant`] refines the
//! data spectrally and then uses 8-point Lagrange stencils (cost `O(64)` per
//! point, error `O(h^8)` on the refined grid).

use std::f64::consts::PI;

use crate::lie3::C64;
use crate::torus::grid::{signed_index, Grid};

/// Grid points per axis the refinement aims for.
const REFINED_TARGET: usize = 512;
const STENCIL: usize = 8;

/// Phase vector `e^{i k x}` over one axis, with the Nyquist term replaced by
/// `cos` so the interpolant of real data stays real.
fn axis_phases(n: usize, l: f64, x: f64) -> Vec<C64> {
    (0..n)
        .map(|j| {
            let k = 2.0 * PI * signed_index(j, n) as f64 / l;
            if n % 2 == 0 && j == n / 2 {
                C64::new((k * x).cos(), 0.0)
            } else {
                C64::new(0.0, k * x).exp()
            }
        })
        .collect()
}

/// Exact trigonometric interpolation of several complex components.
#[derive(Debug, Clone)]
pub struct TrigEvaluator {
    grid: Grid,
    /// normalized spectra, one per component
    spectra: Vec<Vec<C64>>,
}

impl TrigEvaluator {
    pub fn new(grid: &Grid, components: &[Vec<C64>]) -> Self {
        let n = grid.len() as f64;
        let spectra = components
            .iter()
            .map(|c| {
                let mut s = c.clone();
                grid.fft2(&mut s);
                s.iter_mut().for_each(|z| *z /= n);
                s
            })
            .collect();
        TrigEvaluator { grid: grid.clone(), spectra }
    }

    pub fn components(&self) -> usize {
        self.spectra.len()
    }

    pub fn eval(&self, x: f64, y: f64) -> Vec<C64> {
        let g = &self.grid;
        let ex = axis_phases(g.nx, g.lx, x);
        let ey = axis_phases(g.ny, g.ly, y);
        self.spectra
            .iter()
            .map(|s| {
                let mut acc = C64::default();
                for (j, eyj) in ey.iter().enumerate() {
                    let row = &s[j * g.nx..(j + 1) * g.nx];
                    let r: C64 = row.iter().zip(&ex).map(|(c, e)| c * e).sum();
                    acc += r * eyj;
                }
                acc
            })
            .collect()
    }
}

/// Spectral zero-padding of one component onto a grid `factor` times finer.
fn refine_component(grid: &Grid, fine: &Grid, f: &[C64], factor: usize) -> Vec<C64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let (mx, my) = (nx * factor, ny * factor);
    let mut spec = f.to_vec();
    grid.fft2(&mut spec);
    let mut out = vec![C64::default(); mx * my];
    // scale so that the inverse transform on the fine grid reproduces values
    let scale = (factor * factor) as f64;
    let targets = |j: usize, n: usize, m: usize| -> Vec<(usize, f64)> {
        let s = signed_index(j, n);
        if n % 2 == 0 && j == n / 2 {
            let h = (n / 2) as i64;
            vec![(h.rem_euclid(m as i64) as usize, 0.5), ((-h).rem_euclid(m as i64) as usize, 0.5)]
        } else {
            vec![(s.rem_euclid(m as i64) as usize, 1.0)]
        }
    };
    for j in 0..ny {
        let ty = targets(j, ny, my);
        for i in 0..nx {
            let tx = targets(i, nx, mx);
            let z = spec[j * nx + i] * scale;
            for &(jj, wy) in &ty {
                for &(ii, wx) in &tx {
                    out[jj * mx + ii] += z * (wx * wy);
                }
            }
        }
    }
    fine.ifft2(&mut out);
    out
}

/// Lagrange weights on nodes `-3..=4` for fractional position `t` in `[0,1)`.
fn lagrange_weights(t: f64) -> [f64; STENCIL] {
    let mut w = [0.0; STENCIL];
    for (k, wk) in w.iter_mut().enumerate() {
        let dk = k as f64 - 3.0;
        let mut num = 1.0;
        let mut den = 1.0;
        for j in 0..STENCIL {
            if j != k {
                let dj = j as f64 - 3.0;
                num *= t - dj;
                den *= dk - dj;
            }
        }
        *wk = num / den;
    }
    w
}

/// Real multi-component data on a spectrally refined periodic grid with
/// 8-point tensor Lagrange evaluation.
#[derive(Debug, Clone)]
pub struct PeriodicInterpolant {
    mx: usize,
    my: usize,
    hx: f64,
    hy: f64,
    ncomp: usize,
    /// point-major: `data[(j * mx + i) * ncomp + c]`
    data: Vec<f64>,
}

impl PeriodicInterpolant {
    /// Builds the interpolant of real components sampled on `grid`.
    pub fn new(grid: &Grid, components: &[Vec<f64>]) -> Self {
        let factor = Self::refinement_factor(grid);
        let fine = Grid::new(grid.nx * factor, grid.ny * factor, grid.lx, grid.ly).expect("refined grid is valid");
        let ncomp = components.len();
        let mut data = vec![0.0; fine.len() * ncomp];
        for (c, comp) in components.iter().enumerate() {
            let z: Vec<C64> = comp.iter().map(|&v| C64::new(v, 0.0)).collect();
            let r = if factor == 1 { z } else { refine_component(grid, &fine, &z, factor) };
            for (p, v) in r.iter().enumerate() {
                data[p * ncomp + c] = v.re;
            }
        }
        PeriodicInterpolant { mx: fine.nx, my: fine.ny, hx: fine.hx(), hy: fine.hy(), ncomp, data }
    }

    pub fn refinement_factor(grid: &Grid) -> usize {
        let mut f = 1;
        while grid.nx.min(grid.ny) * f < REFINED_TARGET {
            f *= 2;
        }
        f
    }

    pub fn components(&self) -> usize {
        self.ncomp
    }

    /// Writes all components at `(x, y)` into `out`.
    pub fn eval_into(&self, x: f64, y: f64, out: &mut [f64]) {
        let ux = x / self.hx;
        let uy = y / self.hy;
        let (fx, fy) = (ux.floor(), uy.floor());
        let wx = lagrange_weights(ux - fx);
        let wy = lagrange_weights(uy - fy);
        let (ix0, iy0) = (fx as i64 - 3, fy as i64 - 3);
        out[..self.ncomp].iter_mut().for_each(|o| *o = 0.0);
        for (b, wyb) in wy.iter().enumerate() {
            let jj = (iy0 + b as i64).rem_euclid(self.my as i64) as usize;
            for (a, wxa) in wx.iter().enumerate() {
                let ii = (ix0 + a as i64).rem_euclid(self.mx as i64) as usize;
                let w = wxa * wyb;
                let base = (jj * self.mx + ii) * self.ncomp;
                for (o, v) in out.iter_mut().zip(&self.data[base..base + self.ncomp]) {
                    *o += w * v;
                }
            }
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.ncomp];
        self.eval_into(x, y, &mut out);
        out
    }
}
