use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use transparent_pairs::backlund::{StepSpec, StepTolerances};
use transparent_pairs::torus::{build_metric, LambdaSpec, TorusMetric};
use transparent_pairs::verify::VerifyTolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "unit")]
    pub lx: f64,
    #[serde(default = "unit")]
    pub ly: f64,
    #[serde(default)]
    pub harmonics: Vec<transparent_pairs::torus::Harmonic>,
}

fn unit() -> f64 {
    1.0
}

/// Random gauge applied to the generated pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    pub band: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default)]
    pub step: Option<StepTolerances>,
    #[serde(default)]
    pub verify: Option<VerifyTolerances>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricConfig,
    #[serde(default)]
    pub chain: Vec<StepSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub gauge: Option<GaugeConfig>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        let m = &self.metric;
        if m.nx < 16 || m.ny < 16 {
            return Err(format!("grid {}x{} must be at least 16x16", m.nx, m.ny));
        }
        if !(m.lx > 0.0 && m.ly > 0.0) {
            return Err("periods lx, ly must be positive".into());
        }
        let mut tol = vec![];
        if let Some(s) = &self.tolerances.step {
            tol.extend([s.holomorphic, s.input]);
        }
        if let Some(v) = &self.tolerances.verify {
            tol.extend([v.structure, v.orthogonality, v.transport, v.recurrence, v.energy, v.h0, v.holonomy]);
        }
        for step in &self.chain {
            if let StepSpec::Factory(f) = step {
                tol.push(f.tolerance);
            }
        }
        if tol.iter().any(|t| !(*t > 0.0)) {
            return Err("tolerances must be positive".into());
        }
        if let Some(g) = &self.gauge {
            if !(g.amplitude >= 0.0) {
                return Err("gauge amplitude must be non-negative".into());
            }
        }
        Ok(())
    }

    pub fn metric(&self) -> Result<Arc<TorusMetric>, String> {
        let m = &self.metric;
        let spec = LambdaSpec { harmonics: m.harmonics.clone() };
        build_metric(m.nx, m.ny, m.lx, m.ly, &spec).map(Arc::new).map_err(|e| e.to_string())
    }

    pub fn step_tolerances(&self) -> StepTolerances {
        self.tolerances.step.unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let cfg = RunConfig::parse(
            r#"
            seed = 7
            out_dir = "run"
            [metric]
            nx = 32
            ny = 32
            harmonics = [{ amplitude = 0.1, kx = 1, ky = 0 }]
            [tolerances.step]
            holomorphic = 1e-6
            input = 1e-6
            [gauge]
            band = 2
            amplitude = 0.3
            [[chain]]
            kind = "constant"
            axis = [0.0, 0.0, 1.0]
            [[chain]]
            kind = "factory"
            zeta = { kind = "weierstrass", scale = [0.05, 0.0] }
            [[chain]]
            kind = "previous_q"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.chain.len(), 3);
        assert_eq!(cfg.metric.lx, 1.0);
        assert!(cfg.metric().is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "[metric]\nnx = 8\nny = 32\n",
            "[metric]\nnx = 32\nny = 32\n[tolerances.step]\nholomorphic = -1.0\ninput = 1e-6\n",
            "[metric]\nnx = 32\nny = 32\ncolour = 3\n",
            "[metric]\nnx = 32\nny = 32\n[[chain]]\nkind = \"spiral\"\n",
        ] {
            assert!(RunConfig::parse(text).is_err(), "{text}");
        }
    }
}
