//! The residual suite run on a pair and a candidate trivializer.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::cocycle::{flat_closed_geodesic, h0_residuals, holonomy_closed, mode_recurrence_residuals, triviality_residual, TransportOptions};
use crate::error::Result;
use crate::smfield::{FourierField, Pair};
use crate::torus::SMPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyTolerances {
    pub structure: f64,
    pub orthogonality: f64,
    pub transport: f64,
    pub recurrence: f64,
    pub energy: f64,
    pub h0: f64,
    pub holonomy: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            structure: 1e-8,
            orthogonality: 1e-8,
            transport: 1e-6,
            recurrence: 1e-6,
            energy: 1e-7,
            h0: 1e-7,
            holonomy: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub tolerances: VerifyTolerances,
    /// closed geodesics on flat metrics, or sampled orbits otherwise
    pub orbits: usize,
    /// orbit length on non-flat metrics
    pub orbit_time: f64,
    pub transport: TransportOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tolerances: VerifyTolerances::default(), orbits: 5, orbit_time: 5.0, transport: TransportOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub tag: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn get(&self, tag: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.tag == tag)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            out.push_str(&format!("{mark} {:<22} {:.3e}  (tolerance {:.1e})\n", c.tag, c.value, c.tolerance));
        }
        out.push_str(if self.passed { "all checks passed\n" } else { "verification failed\n" });
        out
    }
}

/// Slopes of the closed geodesics used on flat metrics.
const SLOPES: [(i32, i32); 6] = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2)];

/// Worst orbit residual: `|C(T) - Id|` around closed geodesics when the
/// metric is flat, otherwise `|C(t) - u(phi_t p) u(p)^{-1}|` along orbits.
fn orbit_check(pair: &Pair, u: &FourierField, opts: &VerifyOptions) -> Result<(&'static str, f64)> {
    let g = pair.metric().grid();
    let n = opts.orbits;
    let start = |k: usize| {
        let s = (k as f64 + 0.5) / n.max(1) as f64;
        (s * g.lx * 0.731 % g.lx, s * g.ly * 0.377 % g.ly)
    };
    let flat = pair.metric().is_flat();
    let results: Vec<Result<f64>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..n)
            .map(|k| {
                scope.spawn(move || {
                    let (x0, y0) = start(k);
                    if flat {
                        let (p, q) = SLOPES[k % SLOPES.len()];
                        let (p0, period) = flat_closed_geodesic(g.lx, g.ly, p, q, x0, y0);
                        holonomy_closed(pair, p0, period, &opts.transport)
                    } else {
                        let p0 = SMPoint::new(x0, y0, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.3);
                        let res = triviality_residual(pair, u, p0, opts.orbit_time, &opts.transport, 10)?;
                        Ok(res.comparison.unwrap_or(0.0))
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("orbit thread")).collect()
    });
    let mut worst: f64 = 0.0;
    for r in results {
        worst = worst.max(r?);
    }
    Ok((if flat { "holonomy" } else { "cocycle_triviality" }, worst))
}

/// Runs every check; the report passes when each residual is within its
/// tolerance.
pub fn verify_pair(pair: &Pair, u: &FourierField, opts: &VerifyOptions) -> Result<VerifyReport> {
    let t = &opts.tolerances;
    let mut checks = Vec::new();
    let mut push = |tag: &str, value: f64, tolerance: f64| {
        checks.push(Check { tag: tag.to_string(), value, tolerance, passed: value <= tolerance });
    };
    let size = pair.transport_field().max_coefficient().max(1.0);
    push("antisymmetry", pair.antisymmetry_residual() / size, t.structure);
    push("trivializer_reality", u.reality_residual(), t.structure);
    push("trivializer_orthogonality", u.orthogonality_residual(8 * (u.degree() + 1)), t.orthogonality);
    push("transport_equation", pair.transport_residual(u), t.transport);
    let recurrence = mode_recurrence_residuals(pair, u).into_iter().map(|(_, r)| r).fold(0.0, f64::max);
    push("mode_recurrence", recurrence, t.recurrence);
    let d = u.degree() as i32;
    let energy = (-d..=d).map(|m| pair.connection.energy_identity_residual(u, m)).fold(0.0, f64::max);
    push("energy_identity", energy, t.energy);
    let h0 = h0_residuals(u, &pair.higgs);
    push("h0_k1", h0.first, t.h0);
    push("h0_k2", h0.second, t.h0);
    let (tag, orbit) = orbit_check(pair, u, opts)?;
    push(tag, orbit, t.holonomy);
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, passed })
}
