use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backlund::factory::{holomorphic_g_factory, FactorySpec};
use crate::backlund::section::UnitSection;
use crate::backlund::transform::{backlund_transform, BacklundCertificate, StepTolerances};
use crate::error::{Error, Result};
use crate::lie3::Vec3;
use crate::smfield::{FourierField, Pair};
use crate::torus::TorusMetric;

/// How the section of one step is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSpec {
    /// constant section along `axis`
    Constant { axis: [f64; 3] },
    /// section from a meromorphic function
    Factory(FactorySpec),
    /// `q = a g a^{-1}` of the previous step
    PreviousQ,
}

/// A transparent pair with its trivializer and the steps that built it.
#[derive(Debug, Clone)]
pub struct Chain {
    pub pair: Pair,
    pub trivializer: FourierField,
    pub certificates: Vec<BacklundCertificate>,
}

/// Starts from the trivial pair with trivializer `Id` and applies the steps
/// in order.
pub fn generate_chain(metric: &Arc<TorusMetric>, steps: &[StepSpec], tol: &StepTolerances) -> Result<Chain> {
    let mut pair = Pair::trivial(metric);
    let mut u = FourierField::identity(metric);
    let mut certificates: Vec<BacklundCertificate> = Vec::with_capacity(steps.len());
    for step in steps {
        let g = match step {
            StepSpec::Constant { axis } => UnitSection::constant(metric, Vec3::from(*axis))?,
            StepSpec::Factory(spec) => holomorphic_g_factory(metric, spec)?.0,
            StepSpec::PreviousQ => certificates
                .last()
                .ok_or_else(|| Error::Format("previous_q needs a preceding step".into()))?
                .q()?,
        };
        let cert = backlund_transform(&pair, &u, &g, tol)?;
        pair = cert.output.clone();
        u = cert.trivializer.clone();
        certificates.push(cert);
    }
    Ok(Chain { pair, trivializer: u, certificates })
}
