use serde::{Deserialize, Serialize};

use crate::backlund::section::{covariant_scale, gmero_residual, project_on_section, vertical_solution_a, UnitSection};
use crate::error::{Error, Result};
use crate::lie3::{real_part, su2_path_lift, Mat3, Rot3};
use crate::smfield::{commutator, Connection, FourierField, Higgs, Pair};

/// Acceptance thresholds for the inputs of a transformation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTolerances {
    /// largest allowed gmero residual of `g`
    pub holomorphic: f64,
    /// largest allowed transport residual of the input trivializer
    pub input: f64,
}

impl Default for StepTolerances {
    fn default() -> Self {
        StepTolerances { holomorphic: 1e-6, input: 1e-6 }
    }
}

/// Every residual recorded for one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepResiduals {
    pub gmero: f64,
    pub input_transport: f64,
    /// `|X(u) + (A_g + Phi_g) u| / |u|`
    pub transport: f64,
    /// modes of the `A_g` formula outside `+-1`, relative to `|A_g| + |Phi_g|`
    pub connection_projection: f64,
    /// modes of the `Phi_g` formula outside `0`, relative to `|A_g| + |Phi_g|`
    pub higgs_projection: f64,
    /// `|V^2(A_g) + A_g|`
    pub connection_vertical: f64,
    /// `|V(Phi_g)|`
    pub higgs_vertical: f64,
    pub antisymmetry: f64,
    /// `|u_{-m} - conj(u_m)|`, relative
    pub reality: f64,
    /// `|a^t a - Id|` over fiber samples
    pub a_orthogonality: f64,
    /// `|a g - V(a)| / |a|`
    pub a_vertical: f64,
}

/// Output of one transformation step with its provenance.
#[derive(Debug, Clone)]
pub struct BacklundCertificate {
    pub input: Pair,
    pub g: UnitSection,
    pub a: FourierField,
    pub output: Pair,
    /// `u = a b`
    pub trivializer: FourierField,
    pub residuals: StepResiduals,
}

impl BacklundCertificate {
    /// `q = a g a^{-1}` as a full field (its nonzero modes beyond `0` measure
    /// the failure of `V(q) = 0`).
    pub fn q_field(&self) -> FourierField {
        self.a.mul(&self.g.to_field()).mul(&self.a.transpose())
    }

    /// Zero mode of `q`, as a unit section.
    pub fn q(&self) -> Result<UnitSection> {
        let q = Higgs::from_field(&self.q_field());
        UnitSection::new(self.g.metric(), q.phi)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Transformation with the standard vertical solution `a` of `g`.
pub fn backlund_transform(pair: &Pair, b: &FourierField, g: &UnitSection, tol: &StepTolerances) -> Result<BacklundCertificate> {
    backlund_transform_with(pair, b, g, vertical_solution_a(g, None), tol)
}

/// `Phi_g = a (g <g, Phi> + *d_A g) a^{-1}` and
/// `A_g = -X(a) a^{-1} + a (A + Phi - g <g, Phi> - *d_A g) a^{-1}` for a
/// caller-supplied orthogonal solution `a` of `a g = V(a)`.
pub fn backlund_transform_with(
    pair: &Pair,
    b: &FourierField,
    g: &UnitSection,
    a: FourierField,
    tol: &StepTolerances,
) -> Result<BacklundCertificate> {
    let metric = pair.metric();
    let conn = &pair.connection;
    let gmero = gmero_residual(g, conn);
    if !(gmero <= tol.holomorphic) {
        return Err(Error::GNotHolomorphic(gmero));
    }
    let input_transport = pair.transport_residual(b);
    if !(input_transport <= tol.input) {
        return Err(Error::InputNotCertified(input_transport));
    }

    let gf = g.to_field();
    let star_d = -&conn.covariant_derivative(&gf).vertical();
    let g_phi = FourierField::from_real_grid(metric, &project_on_section(g, &pair.higgs.phi));
    let at = a.transpose();

    let phi_formula = a.mul(&(&g_phi + &star_d)).mul(&at);
    let inner = &(&(&conn.to_field() + &pair.higgs.to_field()) - &g_phi) - &star_d;
    let conn_formula = &(-&a.x_op().mul(&at)) + &a.mul(&inner).mul(&at);

    let higgs = Higgs::from_field(&phi_formula);
    let connection = Connection::from_field(&conn_formula);
    let scale = conn_formula.norm() + phi_formula.norm();
    let connection_projection = ratio((&conn_formula - &connection.to_field()).norm(), scale);
    let higgs_projection = ratio((&phi_formula - &higgs.to_field()).norm(), scale);

    let output = Pair::new(connection, higgs);
    let u = a.mul(b);
    let af = output.connection.to_field();
    let residuals = StepResiduals {
        gmero,
        input_transport,
        transport: output.transport_residual(&u),
        connection_projection,
        higgs_projection,
        connection_vertical: (&af.vertical().vertical() + &af).norm(),
        higgs_vertical: output.higgs.to_field().vertical().norm(),
        antisymmetry: output.antisymmetry_residual(),
        reality: u.reality_residual(),
        a_orthogonality: a.orthogonality_residual(16),
        a_vertical: ratio((&a.mul(&gf) - &a.vertical()).norm(), a.norm()),
    };
    Ok(BacklundCertificate { input: pair.clone(), g: g.clone(), a, output, trivializer: u, residuals })
}

/// Residuals of the statements about `q = a g a^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QLemmaResiduals {
    /// `|V(q)| / |q|`
    pub vertical: f64,
    /// `d_{A_g} q = [a Phi a^{-1}, q]`
    pub derivative: f64,
    /// `d_{A_g} q = -[*d_{A_g} q, q]`
    pub star: f64,
}

/// Result of undoing a step.
#[derive(Debug, Clone)]
pub struct InverseResult {
    pub certificate: BacklundCertificate,
    pub q: UnitSection,
    pub q_residuals: QLemmaResiduals,
    /// `|A - A''| + |Phi - Phi''|` in field norm
    pub round_trip: f64,
}

pub fn q_lemma_residuals(cert: &BacklundCertificate) -> QLemmaResiduals {
    let qf = cert.q_field();
    let q0 = FourierField::from_mode(qf.metric(), 0, qf.mode_or_zero(0));
    let vertical = ratio(qf.vertical().norm(), qf.norm());
    let conn = &cert.output.connection;
    let dq = conn.covariant_derivative(&q0);
    let a_phi = cert.a.mul(&cert.input.higgs.to_field()).mul(&cert.a.transpose());
    let br = commutator(&a_phi, &q0);
    let scale = covariant_scale(conn, &q0);
    let derivative = ratio((&dq - &br).norm(), scale + br.norm());
    let star = -&dq.vertical();
    let br2 = commutator(&star, &q0);
    let star_res = ratio((&dq + &br2).norm(), scale + br2.norm());
    QLemmaResiduals { vertical, derivative, star: star_res }
}

/// Applies the step to the output with direction `-q` and vertical solution
/// `a^{-1}`, which should return the input pair.
pub fn inverse_backlund(cert: &BacklundCertificate, tol: &StepTolerances) -> Result<InverseResult> {
    let q = cert.q()?;
    let q_residuals = q_lemma_residuals(cert);
    let back = backlund_transform_with(&cert.output, &cert.trivializer, &q.neg(), cert.a.transpose(), tol)?;
    let diff_a = (&back.output.connection.to_field() - &cert.input.connection.to_field()).norm();
    let diff_phi = (&back.output.higgs.to_field() - &cert.input.higgs.to_field()).norm();
    Ok(InverseResult { certificate: back, q, q_residuals, round_trip: diff_a + diff_phi })
}

/// Lift parity of the fiber loop `theta -> u(p, theta)` at grid point `p`.
pub fn su2_parity(u: &FourierField, p: usize) -> Result<i8> {
    let n = 32 * (u.degree() + 1);
    let samples: Vec<Rot3> = (0..=n)
        .map(|k| Rot3(real_part(&u.value_at(p, std::f64::consts::TAU * k as f64 / n as f64))))
        .collect();
    su2_path_lift(&samples)
}

/// Two consecutive steps, with `g` and then with `q = a g a^{-1}`.
#[derive(Debug, Clone)]
pub struct TwoStep {
    pub first: BacklundCertificate,
    pub second: BacklundCertificate,
    /// `c = a_q a`
    pub c: FourierField,
    /// `|c^{-1} V(c) - 2 g| / |2 g|`
    pub c_residual: f64,
    /// largest pointwise norm of `Phi_q`
    pub phi_q: f64,
    /// `<q, Phi_g>` sup norm
    pub q_phi_inner: f64,
    pub parity_first: i8,
    pub parity_second: i8,
}

pub fn two_step_su2(pair: &Pair, b: &FourierField, g: &UnitSection, tol: &StepTolerances) -> Result<TwoStep> {
    let phi = pair.higgs.sup_norm();
    if phi > 1e-12 {
        return Err(Error::PhiNotZero(phi));
    }
    let first = backlund_transform(pair, b, g, tol)?;
    let q = first.q()?;
    let second = backlund_transform(&first.output, &first.trivializer, &q, tol)?;
    let c = second.a.mul(&first.a);
    let two_g = g.to_field().scale(crate::lie3::C64::new(2.0, 0.0));
    let c_residual = ratio((&c.transpose().mul(&c.vertical()) - &two_g).norm(), two_g.norm());
    let q_phi_inner = q
        .values()
        .iter()
        .zip(&first.output.higgs.phi)
        .map(|(q, p)| crate::lie3::inner(q, p).abs())
        .fold(0.0, f64::max);
    Ok(TwoStep {
        phi_q: second.output.higgs.sup_norm(),
        parity_first: su2_parity(&first.trivializer, 0)?,
        parity_second: su2_parity(&second.trivializer, 0)?,
        first,
        second,
        c,
        c_residual,
        q_phi_inner,
    })
}

/// `-X(a) a^{-1}` for a constant section reduces to
/// `e^{-lambda} (lambda_x sin(theta) - lambda_y cos(theta)) g`.
pub fn constant_section_connection(g: &UnitSection) -> Connection {
    let m = g.metric();
    let a: Vec<Mat3> = g.values().iter().zip(m.lambda_y()).zip(m.lambda()).map(|((g, ly), l)| g * (-ly * (-l).exp())).collect();
    let b: Vec<Mat3> = g.values().iter().zip(m.lambda_x()).zip(m.lambda()).map(|((g, lx), l)| g * (lx * (-l).exp())).collect();
    Connection::new(m, a, b)
}
