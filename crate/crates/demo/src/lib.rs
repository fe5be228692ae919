//! Browser bindings: generate a pair from a Weierstrass section on the flat
//! unit torus, draw its Higgs field and transport the cocycle along a
//! geodesic.

use std::sync::Arc;

use transparent_pairs::backlund::{
    backlund_transform, factory_section, lemma_eq_residuals, FactorySpec, StepTolerances, UnitSection, ZetaSpec,
};
use transparent_pairs::cocycle::{transport, TransportOptions};
use transparent_pairs::lie3::Mat3;
use transparent_pairs::smfield::{Connection, FourierField, Pair};
use transparent_pairs::torus::{SMPoint, TorusMetric};
use wasm_bindgen::prelude::*;

fn weierstrass(scale: [f64; 2], center: [f64; 2], conjugate: bool) -> FactorySpec {
    FactorySpec { conjugate, ..FactorySpec::new(ZetaSpec::Weierstrass { scale, offset: [0.0, 0.0], center }) }
}

fn flat(n: usize) -> Result<Arc<TorusMetric>, String> {
    if !(64..=192).contains(&n) {
        return Err(format!("grid size {n} outside 64..=192"));
    }
    TorusMetric::flat(n, n, 1.0, 1.0).map(Arc::new).map_err(|e| e.to_string())
}

/// Four holomorphicity residuals of the section for `zeta` followed by the
/// four for `conj(zeta)`.
pub fn section_residuals_native(n: usize, scale: [f64; 2], center: [f64; 2]) -> Result<Vec<f64>, String> {
    let m = flat(n)?;
    let mut out = Vec::with_capacity(8);
    for conjugate in [false, true] {
        let g = factory_section(&m, &weierstrass(scale, center, conjugate)).map_err(|e| e.to_string())?;
        out.extend(lemma_eq_residuals(&g, &Connection::zero(&m)).as_array());
    }
    Ok(out)
}

/// A certified pair with its trivializer.
pub struct Generated {
    pub pair: Pair,
    pub trivializer: FourierField,
    pub transport_residual: f64,
    pub section_residual: f64,
}

pub fn generate_native(n: usize, scale: [f64; 2], center: [f64; 2]) -> Result<Generated, String> {
    let m = flat(n)?;
    let spec = weierstrass(scale, center, false);
    let g: UnitSection = factory_section(&m, &spec).map_err(|e| e.to_string())?;
    let section_residual = lemma_eq_residuals(&g, &Connection::zero(&m)).max();
    let cert = backlund_transform(&Pair::trivial(&m), &FourierField::identity(&m), &g, &StepTolerances::default()).map_err(|e| e.to_string())?;
    Ok(Generated {
        transport_residual: cert.residuals.transport,
        section_residual,
        pair: cert.output,
        trivializer: cert.trivializer,
    })
}

/// `|Phi|` (Frobenius) on the grid, row-major in `y`.
pub fn higgs_norm_native(pair: &Pair) -> Vec<f64> {
    pair.higgs.phi.iter().map(Mat3::norm).collect()
}

/// Triples `t, |C(t) - Id|, drift` along the geodesic from `(x, y, theta)`.
pub fn cocycle_curve_native(pair: &Pair, x: f64, y: f64, theta: f64, time: f64) -> Result<Vec<f64>, String> {
    if !(time > 0.0 && time <= 20.0) {
        return Err(format!("time {time} outside (0, 20]"));
    }
    let opts = TransportOptions { dt: 2e-3, ..TransportOptions::default() };
    let res = transport(pair, SMPoint::new(x, y, theta), time, &opts).map_err(|e| e.to_string())?;
    let id = Mat3::identity();
    let mut out = Vec::with_capacity(3 * res.cocycle.len());
    for ((t, c), d) in res.path.times.iter().zip(&res.cocycle).zip(&res.drift) {
        out.extend([*t, (c - id).norm(), *d]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn section_residuals(n: usize, scale_re: f64, scale_im: f64, cx: f64, cy: f64) -> Result<Vec<f64>, JsError> {
    section_residuals_native(n, [scale_re, scale_im], [cx, cy]).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub struct Demo {
    inner: Generated,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, scale_re: f64, scale_im: f64, cx: f64, cy: f64) -> Result<Demo, JsError> {
        generate_native(n, [scale_re, scale_im], [cx, cy]).map(|inner| Demo { inner }).map_err(|e| JsError::new(&e))
    }

    pub fn size(&self) -> usize {
        self.inner.pair.metric().grid().nx
    }

    pub fn higgs_norm(&self) -> Vec<f64> {
        higgs_norm_native(&self.inner.pair)
    }

    pub fn transport_residual(&self) -> f64 {
        self.inner.transport_residual
    }

    pub fn section_residual(&self) -> f64 {
        self.inner.section_residual
    }

    pub fn trivializer_degree(&self) -> usize {
        self.inner.trivializer.degree()
    }

    pub fn cocycle_curve(&self, x: f64, y: f64, theta: f64, time: f64) -> Result<Vec<f64>, JsError> {
        cocycle_curve_native(&self.inner.pair, x, y, theta, time).map_err(|e| JsError::new(&e))
    }
}
