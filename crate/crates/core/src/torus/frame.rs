//! The canonical frame `{X, H, V}` of the unit tangent bundle applied to
//! fields sampled on the `(x, y, theta)` product grid. All derivatives are
//! spectral: FFT in `x, y`, DFT in `theta`.

use std::f64::consts::TAU;

use crate::lie3::{Mat3C, C64};
use crate::torus::grid::Symbol;
use crate::torus::metric::TorusMetric;

/// Frame vector fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameField {
    /// geodesic vector field
    X,
    /// horizontal vector field
    H,
    /// vertical vector field `d/dtheta`
    V,
}

/// Matrix field sampled at `ntheta` equispaced fiber angles over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub ntheta: usize,
    /// `samples[k][p]` is the value at `theta_k = 2 pi k / ntheta`, point `p`
    pub samples: Vec<Vec<Mat3C>>,
}

impl SampledField {
    pub fn theta(&self, k: usize) -> f64 {
        TAU * k as f64 / self.ntheta as f64
    }

    pub fn zip_map(&self, other: &SampledField, f: impl Fn(&Mat3C, &Mat3C) -> Mat3C) -> SampledField {
        assert_eq!(self.ntheta, other.ntheta);
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| f(u, v)).collect())
            .collect();
        SampledField { ntheta: self.ntheta, samples }
    }

    pub fn sub(&self, other: &SampledField) -> SampledField {
        self.zip_map(other, |a, b| a - b)
    }

    /// Root-mean-square Frobenius norm over all samples.
    pub fn rms(&self) -> f64 {
        let n = (self.ntheta * self.samples[0].len()) as f64;
        let s: f64 = self.samples.iter().flatten().map(|m| m.norm_squared()).sum();
        (s / n).sqrt()
    }

    /// Spectral `d/dtheta` by direct DFT over the fiber samples.
    pub fn d_theta(&self) -> SampledField {
        let n = self.ntheta;
        let npts = self.samples[0].len();
        let signed = |k: usize| if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        // dense derivative matrix D[j][k] = (1/n) sum_m (i m) e^{i m (t_j - t_k)}
        let mut d = vec![vec![C64::default(); n]; n];
        for (j, row) in d.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                let mut acc = C64::default();
                for m in 0..n {
                    if n % 2 == 0 && m == n / 2 {
                        continue;
                    }
                    let s = signed(m);
                    let ph = TAU * s * (j as f64 - k as f64) / n as f64;
                    acc += C64::new(0.0, s) * C64::new(0.0, ph).exp();
                }
                *entry = acc / n as f64;
            }
        }
        let mut out = vec![vec![Mat3C::zeros(); npts]; n];
        for (j, o) in out.iter_mut().enumerate() {
            for (k, s) in self.samples.iter().enumerate() {
                let w = d[j][k];
                if w.norm() < 1e-300 {
                    continue;
                }
                for (op, sp) in o.iter_mut().zip(s) {
                    *op += sp * w;
                }
            }
        }
        SampledField { ntheta: n, samples: out }
    }
}

/// Applies `W` by its coordinate formula:
/// `X = e^{-l}(cos t d_x + sin t d_y + (-l_x sin t + l_y cos t) d_t)`,
/// `H = e^{-l}(-sin t d_x + cos t d_y - (l_x cos t + l_y sin t) d_t)`,
/// `V = d_t`.
pub fn frame_apply(metric: &TorusMetric, w: FrameField, u: &SampledField) -> SampledField {
    let ut = u.d_theta();
    if w == FrameField::V {
        return ut;
    }
    let grid = metric.grid();
    let (lam, lx, ly) = (metric.lambda(), metric.lambda_x(), metric.lambda_y());
    let samples = (0..u.ntheta)
        .map(|k| {
            let (s, c) = u.theta(k).sin_cos();
            let d = grid.derive_mat(&u.samples[k], &[Symbol::Dx, Symbol::Dy]);
            (0..grid.len())
                .map(|p| {
                    let e = (-lam[p]).exp();
                    let (dx, dy, dt) = (&d[0][p], &d[1][p], &ut.samples[k][p]);
                    match w {
                        FrameField::X => (dx.scale(c) + dy.scale(s) + dt.scale(-lx[p] * s + ly[p] * c)).scale(e),
                        FrameField::H => (dx.scale(-s) + dy.scale(c) - dt.scale(lx[p] * c + ly[p] * s)).scale(e),
                        FrameField::V => unreachable!(),
                    }
                })
                .collect()
        })
        .collect();
    SampledField { ntheta: u.ntheta, samples }
}
