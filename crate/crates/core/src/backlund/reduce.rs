use nalgebra::Matrix3x6;
use serde::{Deserialize, Serialize};

use crate::backlund::section::{lemma_eq_residuals, vertical_solution_a, LemmaEqResiduals, UnitSection};
use crate::backlund::transform::{backlund_transform_with, BacklundCertificate, StepTolerances};
use crate::error::{Error, Result};
use crate::lie3::{real_part, imag_part, Mat3C, Vec3};
use crate::smfield::{FourierField, Pair};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionOptions {
    /// grid points where `sigma_1(b_N) < rank_threshold * max sigma_1` count as zeros
    pub rank_threshold: f64,
    /// largest fraction of zero points that is filled by interpolation
    pub max_zero_fraction: f64,
    /// bound on the modes `+-N`, `+-(N+1)` of `a b`, relative to `|a b|`
    pub degree_tolerance: f64,
    /// bound on `a_1 b_N`, `a_0 b_N`, `a_1 b_{N-1}`, relative to `|b|`
    pub constraint_tolerance: f64,
    pub step: StepTolerances,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        ReductionOptions {
            rank_threshold: 1e-8,
            max_zero_fraction: 0.01,
            degree_tolerance: 1e-8,
            constraint_tolerance: 1e-9,
            step: StepTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionDiagnostics {
    /// degree of the input trivializer
    pub degree: usize,
    pub zero_points: usize,
    /// largest `sigma_2 / sigma_1` of `b_N` away from zeros
    pub rank_two_ratio: f64,
    /// largest `1 - |x . axis(g)|` with `x` the common kernel of `C^t, D^t`
    pub kernel_alignment: f64,
    /// largest disagreement of `g` between admissible choices of `y`
    pub y_consistency: f64,
    /// `|a_1 b_N| / |b|`
    pub top_kernel: f64,
    /// `|a_0 b_N| / |b|`
    pub top_axis: f64,
    /// `|a_1 b_{N-1}| / |b|`
    pub next_kernel: f64,
    /// `|b_N^t b_{N-1}| / (|b| sup|b|)`
    pub top_orthogonality: f64,
    /// largest removed mode of `a b`, relative to `|a b|`
    pub removed_modes: f64,
    /// transport residual of the truncated trivializer
    pub transport: f64,
    pub lemma: LemmaEqResiduals,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub g: UnitSection,
    pub a: FourierField,
    /// `a b` truncated to degree `N - 1`
    pub trivializer: FourierField,
    pub pair: Pair,
    pub certificate: BacklundCertificate,
    pub diagnostics: ReductionDiagnostics,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Axis of `g` at one point: `g(Cy) = Dy`, `g(Dy) = -Cy`, so `g = hat(Cy x Dy / |Cy|^2)`.
fn axis_from_top(bn: &Mat3C) -> (Vec3, f64) {
    let c = real_part(bn);
    let d = imag_part(bn);
    let k = (0..3).max_by(|&i, &j| c.column(i).norm().total_cmp(&c.column(j).norm())).expect("three columns");
    let best = c.column(k).norm();
    let axis = c.column(k).cross(&d.column(k)).normalize();
    let mut spread: f64 = 0.0;
    for j in 0..3 {
        if j != k && c.column(j).norm() > 0.1 * best {
            let other = c.column(j).cross(&d.column(j)).normalize();
            spread = spread.max((other - axis).norm());
        }
    }
    (axis, spread)
}

/// Unit vector spanning `Ker C^t n Ker D^t`.
fn common_kernel(bn: &Mat3C) -> Vec3 {
    let (c, d) = (real_part(bn), imag_part(bn));
    let m = Matrix3x6::from_fn(|r, k| if k < 3 { c[(r, k)] } else { d[(r, k - 3)] });
    let svd = m.svd(true, false);
    let u = svd.u.expect("u requested");
    let k = (0..3).min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j])).expect("three values");
    u.column(k).into_owned()
}

/// Inverse-distance average of the nearest non-zero neighbors, renormalized.
fn fill_zero(axes: &[Option<Vec3>], nx: usize, ny: usize, p: usize) -> Option<Vec3> {
    let (i0, j0) = ((p % nx) as i64, (p / nx) as i64);
    for radius in 1..=(nx.max(ny) as i64 / 2) {
        let mut acc = Vec3::zeros();
        let mut found = false;
        for dj in -radius..=radius {
            for di in -radius..=radius {
                if di.abs().max(dj.abs()) != radius {
                    continue;
                }
                let i = (i0 + di).rem_euclid(nx as i64) as usize;
                let j = (j0 + dj).rem_euclid(ny as i64) as usize;
                if let Some(v) = axes[j * nx + i] {
                    acc += v / ((di * di + dj * dj) as f64).sqrt();
                    found = true;
                }
            }
        }
        if found && acc.norm() > 0.0 {
            return Some(acc.normalize());
        }
    }
    None
}

/// Builds `g` from the top mode of a degree-`N` trivializer `b`, applies the
/// transformation with it and returns the trivializer of degree `N - 1`.
pub fn reduce_degree(pair: &Pair, b: &FourierField, opts: &ReductionOptions) -> Result<Reduction> {
    let metric = pair.metric();
    let grid = metric.grid();
    let n = b.effective_degree(1e-12) as i32;
    if n == 0 {
        return Err(Error::ReductionFailed("trivializer already has degree 0".into()));
    }
    let top = b.mode(n).expect("degree within storage");
    let sigma: Vec<(f64, f64)> = top
        .iter()
        .map(|m| {
            let s = m.singular_values();
            let mut v = [s[0], s[1], s[2]];
            v.sort_by(|a, b| b.total_cmp(a));
            (v[0], v[1])
        })
        .collect();
    let smax = sigma.iter().map(|s| s.0).fold(0.0, f64::max);
    if smax == 0.0 {
        return Err(Error::RankDeficient { fraction: 100.0 });
    }

    let mut axes: Vec<Option<Vec3>> = Vec::with_capacity(top.len());
    let mut diag_rank: f64 = 0.0;
    let mut alignment: f64 = 0.0;
    let mut y_consistency: f64 = 0.0;
    for (m, s) in top.iter().zip(&sigma) {
        if s.0 < opts.rank_threshold * smax {
            axes.push(None);
            continue;
        }
        diag_rank = diag_rank.max(s.1 / s.0);
        let (axis, spread) = axis_from_top(m);
        y_consistency = y_consistency.max(spread);
        alignment = alignment.max(1.0 - common_kernel(m).dot(&axis).abs());
        axes.push(Some(axis));
    }
    let zeros = axes.iter().filter(|a| a.is_none()).count();
    let fraction = zeros as f64 / axes.len() as f64;
    if fraction > opts.max_zero_fraction {
        return Err(Error::RankDeficient { fraction: 100.0 * fraction });
    }
    let filled: Vec<Vec3> = (0..axes.len())
        .map(|p| axes[p].or_else(|| fill_zero(&axes, grid.nx, grid.ny, p)).ok_or(Error::RankDeficient { fraction: 100.0 }))
        .collect::<Result<_>>()?;
    let g = UnitSection::from_axes(metric, &filled)?;
    let lemma = lemma_eq_residuals(&g, &pair.connection);
    let a = vertical_solution_a(&g, None);

    let bnorm = b.norm();
    let prod = |x: &[Mat3C], y: &[Mat3C]| -> f64 {
        let v: Vec<Mat3C> = x.iter().zip(y).map(|(p, q)| p * q).collect();
        FourierField::from_mode(metric, 0, v).norm()
    };
    let (a0, a1) = (a.mode(0).expect("degree 1"), a.mode(1).expect("degree 1"));
    let below = b.mode_or_zero(n - 1);
    let top_kernel = ratio(prod(a1, top), bnorm);
    let top_axis = ratio(prod(a0, top), bnorm);
    let next_kernel = ratio(prod(a1, &below), bnorm);
    let top_t: Vec<Mat3C> = top.iter().map(|m| m.transpose()).collect();
    let top_orthogonality = ratio(prod(&top_t, &below), bnorm * b.max_coefficient());

    let certificate = backlund_transform_with(pair, b, &g, a.clone(), &opts.step)?;
    let u = &certificate.trivializer;
    let unorm = u.norm();
    let removed = [n, n + 1]
        .iter()
        .flat_map(|&k| [k, -k])
        .map(|k| ratio(u.mode_norm(k), unorm))
        .fold(0.0, f64::max);
    let trivializer = u.with_degree(n as usize - 1);
    let new_pair = certificate.output.clone();
    let transport = new_pair.transport_residual(&trivializer);
    let diagnostics = ReductionDiagnostics {
        degree: n as usize,
        zero_points: zeros,
        rank_two_ratio: diag_rank,
        kernel_alignment: alignment,
        y_consistency,
        top_kernel,
        top_axis,
        next_kernel,
        top_orthogonality,
        removed_modes: removed,
        transport,
        lemma,
    };
    let worst_constraint = top_kernel.max(top_axis).max(next_kernel);
    if worst_constraint > opts.constraint_tolerance {
        return Err(Error::ReductionFailed(format!("constraint residual {worst_constraint:.3e}")));
    }
    if removed > opts.degree_tolerance {
        return Err(Error::ReductionFailed(format!("top modes of a b remain at {removed:.3e}")));
    }
    Ok(Reduction { g, a, trivializer, pair: new_pair, certificate, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backlund::transform::backlund_transform;
    use crate::torus::{build_metric, LambdaSpec};
    use std::sync::Arc;

    #[test]
    fn undoes_a_constant_section_step() {
        let m = Arc::new(build_metric(32, 32, 1.0, 1.0, &LambdaSpec::single(0.1)).unwrap());
        let g = UnitSection::constant(&m, Vec3::new(0.0, 0.6, 0.8)).unwrap();
        let cert = backlund_transform(&Pair::trivial(&m), &FourierField::identity(&m), &g, &StepTolerances::default()).unwrap();
        let red = reduce_degree(&cert.output, &cert.trivializer, &ReductionOptions::default()).unwrap();
        let d = &red.diagnostics;
        assert_eq!(d.degree, 1);
        assert!(d.top_kernel < 1e-14 && d.top_axis < 1e-14 && d.next_kernel < 1e-14);
        assert!(d.top_orthogonality < 1e-14);
        assert!(d.rank_two_ratio < 1e-12 && d.kernel_alignment < 1e-12 && d.y_consistency < 1e-12);
        assert!((red.g.values()[0] + g.values()[0]).norm() < 1e-14);
        assert_eq!(red.trivializer.degree(), 0);
        assert!(d.transport < 1e-12, "{d:?}");
        assert!(red.pair.higgs.sup_norm() < 1e-14);
        assert!(red.pair.connection.to_field().norm() < 1e-12);
    }

    #[test]
    fn undoes_a_factory_step() {
        use crate::backlund::factory::{holomorphic_g_factory, FactorySpec, ZetaSpec};
        let m = Arc::new(crate::torus::TorusMetric::flat(64, 64, 1.0, 1.0).unwrap());
        let zeta = ZetaSpec::Weierstrass { scale: [0.05, 0.0], offset: [0.0, 0.0], center: [0.5 / 64.0, 0.5 / 64.0] };
        let (g, _) = holomorphic_g_factory(&m, &FactorySpec::new(zeta)).unwrap();
        let cert = backlund_transform(&Pair::trivial(&m), &FourierField::identity(&m), &g, &StepTolerances::default()).unwrap();
        assert!(cert.output.higgs.sup_norm() > 1e-2);
        let red = reduce_degree(&cert.output, &cert.trivializer, &ReductionOptions::default()).unwrap();
        let d = &red.diagnostics;
        assert_eq!(d.zero_points, 0);
        let dev = red.g.values().iter().zip(g.values()).map(|(a, b)| (a + b).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "{dev}");
        assert!(d.transport < 1e-9, "{d:?}");
        assert!(red.pair.higgs.sup_norm() < 1e-9);
        assert!(red.pair.connection.to_field().norm() < 1e-9);
    }

    #[test]
    fn degree_zero_input_is_rejected() {
        let m = Arc::new(build_metric(16, 16, 1.0, 1.0, &LambdaSpec::flat()).unwrap());
        let r = reduce_degree(&Pair::trivial(&m), &FourierField::identity(&m), &ReductionOptions::default());
        assert!(matches!(r, Err(Error::ReductionFailed(_))));
    }
}
