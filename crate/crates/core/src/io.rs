//! File formats: fields, pairs and certificates as JSON, heatmaps as PGM.
//!
//! A field file is
//! `{"grid": {"nx", "ny", "lx", "ly"}, "metric_lambda": [...], "degree": N,
//! "modes": [{"m", "re": [...], "im": [...]}]}` with entries row-major in
//! `(y, x)` and then 3x3 row-major. Floats are written with 17 significant
//! digits so that loading a saved field reproduces it bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backlund::{BacklundCertificate, StepResiduals, StepSpec};
use crate::error::{Error, Result};
use crate::lie3::{Mat3C, C64};
use crate::smfield::{Connection, FourierField, Higgs, Pair};
use crate::torus::grid::Grid;
use crate::torus::TorusMetric;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct ModeDoc {
    m: i32,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
struct FieldDoc {
    grid: GridDoc,
    metric_lambda: Vec<f64>,
    degree: usize,
    modes: Vec<ModeDoc>,
}

#[derive(Debug, Clone, Deserialize)]
struct PairDoc {
    connection: FieldDoc,
    higgs: FieldDoc,
}

fn push_float(out: &mut String, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Format(format!("non-finite value {v}")));
    }
    write!(out, "{v:.16e}").expect("write to string");
    Ok(())
}

fn push_array(out: &mut String, values: impl Iterator<Item = f64>) -> Result<()> {
    out.push('[');
    for (k, v) in values.enumerate() {
        if k > 0 {
            out.push(',');
        }
        push_float(out, v)?;
    }
    out.push(']');
    Ok(())
}

fn write_field(out: &mut String, f: &FourierField) -> Result<()> {
    let g = f.grid();
    out.push_str("{\"grid\":{");
    write!(out, "\"nx\":{},\"ny\":{},\"lx\":", g.nx, g.ny).expect("write to string");
    push_float(out, g.lx)?;
    out.push_str(",\"ly\":");
    push_float(out, g.ly)?;
    out.push_str("},\"metric_lambda\":");
    push_array(out, f.metric().lambda().iter().copied())?;
    write!(out, ",\"degree\":{},\"modes\":[", f.degree()).expect("write to string");
    for (k, (m, vals)) in f.modes().enumerate() {
        if k > 0 {
            out.push(',');
        }
        write!(out, "\n{{\"m\":{m},\"re\":").expect("write to string");
        push_array(out, vals.iter().flat_map(|a| (0..9).map(move |e| a[(e / 3, e % 3)].re)))?;
        out.push_str(",\"im\":");
        push_array(out, vals.iter().flat_map(|a| (0..9).map(move |e| a[(e / 3, e % 3)].im)))?;
        out.push('}');
    }
    out.push_str("]}");
    Ok(())
}

pub fn field_to_json(f: &FourierField) -> Result<String> {
    let mut out = String::new();
    write_field(&mut out, f)?;
    out.push('\n');
    Ok(out)
}

pub fn pair_to_json(pair: &Pair) -> Result<String> {
    let mut out = String::from("{\"connection\":");
    write_field(&mut out, &pair.connection.to_field())?;
    out.push_str(",\n\"higgs\":");
    write_field(&mut out, &pair.higgs.to_field())?;
    out.push_str("}\n");
    Ok(out)
}

fn doc_metric(doc: &FieldDoc) -> Result<TorusMetric> {
    let g = doc.grid;
    if g.nx < 16 || g.ny < 16 {
        return Err(Error::InvalidGrid(format!("grid {}x{} must be at least 16x16", g.nx, g.ny)));
    }
    TorusMetric::from_lambda(Grid::new(g.nx, g.ny, g.lx, g.ly)?, doc.metric_lambda.clone())
}

fn doc_field(doc: &FieldDoc, metric: &Arc<TorusMetric>) -> Result<FourierField> {
    let g = metric.grid();
    if doc.grid != (GridDoc { nx: g.nx, ny: g.ny, lx: g.lx, ly: g.ly }) || doc.metric_lambda != metric.lambda() {
        return Err(Error::MetricMismatch);
    }
    let n = g.len() * 9;
    let mut modes = Vec::with_capacity(doc.modes.len());
    for md in &doc.modes {
        if md.re.len() != n || md.im.len() != n {
            return Err(Error::Format(format!("mode {} has {} / {} entries, expected {n}", md.m, md.re.len(), md.im.len())));
        }
        if md.m.unsigned_abs() as usize > doc.degree {
            return Err(Error::Format(format!("mode {} exceeds degree {}", md.m, doc.degree)));
        }
        let vals = (0..g.len())
            .map(|p| Mat3C::from_fn(|r, c| C64::new(md.re[9 * p + 3 * r + c], md.im[9 * p + 3 * r + c])))
            .collect();
        modes.push((md.m, vals));
    }
    let mut f = FourierField::from_modes(metric, modes);
    if f.degree() < doc.degree {
        f = f.with_degree(doc.degree);
    }
    Ok(f)
}

/// Loads a field together with the metric stored in it.
pub fn field_from_json(s: &str) -> Result<FourierField> {
    let doc: FieldDoc = serde_json::from_str(s)?;
    let metric = Arc::new(doc_metric(&doc)?);
    doc_field(&doc, &metric)
}

/// Loads a field that must live on `metric`.
pub fn field_from_json_on(s: &str, metric: &Arc<TorusMetric>) -> Result<FourierField> {
    let doc: FieldDoc = serde_json::from_str(s)?;
    doc_field(&doc, metric)
}

pub fn pair_from_json(s: &str) -> Result<Pair> {
    let doc: PairDoc = serde_json::from_str(s)?;
    let metric = Arc::new(doc_metric(&doc.connection)?);
    let a = doc_field(&doc.connection, &metric)?;
    let phi = doc_field(&doc.higgs, &metric)?;
    if a.modes().any(|(m, v)| m.abs() != 1 && v.iter().any(|x| x.norm() != 0.0)) {
        return Err(Error::Format("connection has modes outside +-1".into()));
    }
    Ok(Pair::new(Connection::from_field(&a), Higgs::from_field(&phi)))
}

/// Hex SHA-256 of the serialized field.
pub fn field_hash(f: &FourierField) -> Result<String> {
    let digest = Sha256::digest(field_to_json(f)?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// JSON record of one transformation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub step: usize,
    pub spec: Option<StepSpec>,
    pub residuals: StepResiduals,
    /// largest pointwise norm of the output Higgs field
    pub higgs_sup: f64,
    pub trivializer_degree: usize,
    pub g_hash: String,
    pub connection_hash: String,
    pub higgs_hash: String,
    pub trivializer_hash: String,
}

impl CertificateRecord {
    pub fn new(step: usize, spec: Option<StepSpec>, cert: &BacklundCertificate) -> Result<Self> {
        Ok(CertificateRecord {
            step,
            spec,
            residuals: cert.residuals,
            higgs_sup: cert.output.higgs.sup_norm(),
            trivializer_degree: cert.trivializer.degree(),
            g_hash: field_hash(&cert.g.to_field())?,
            connection_hash: field_hash(&cert.output.connection.to_field())?,
            higgs_hash: field_hash(&cert.output.higgs.to_field())?,
            trivializer_hash: field_hash(&cert.trivializer)?,
        })
    }
}

pub fn save(path: impl AsRef<Path>, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

/// What to draw from a field: one mode, then one matrix entry or the
/// Frobenius norm, then a real part, imaginary part or modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selector {
    pub mode: i32,
    pub entry: Option<(usize, usize)>,
    pub part: Part,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
    Abs,
}

impl std::str::FromStr for Selector {
    type Err = Error;

    /// `MODE:norm` or `MODE:RC:PART` with `RC` two digits in `0..3` and
    /// `PART` one of `re`, `im`, `abs`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("bad selector {s:?}; expected MODE:norm or MODE:RC:re|im|abs"));
        let parts: Vec<&str> = s.split(':').collect();
        let mode: i32 = parts.first().and_then(|m| m.parse().ok()).ok_or_else(bad)?;
        match parts.as_slice() {
            [_, "norm"] => Ok(Selector { mode, entry: None, part: Part::Abs }),
            [_, rc, part] => {
                let d: Vec<usize> = rc.chars().filter_map(|c| c.to_digit(10).map(|d| d as usize)).collect();
                if rc.len() != 2 || d.len() != 2 || d[0] > 2 || d[1] > 2 {
                    return Err(bad());
                }
                let part = match *part {
                    "re" => Part::Re,
                    "im" => Part::Im,
                    "abs" => Part::Abs,
                    _ => return Err(bad()),
                };
                Ok(Selector { mode, entry: Some((d[0], d[1])), part })
            }
            _ => Err(bad()),
        }
    }
}

/// Grid values picked out by `sel`; modes beyond the degree read as zero.
pub fn select(f: &FourierField, sel: &Selector) -> Vec<f64> {
    f.mode_or_zero(sel.mode)
        .iter()
        .map(|a| match sel.entry {
            None => a.norm(),
            Some((r, c)) => match sel.part {
                Part::Re => a[(r, c)].re,
                Part::Im => a[(r, c)].im,
                Part::Abs => a[(r, c)].norm(),
            },
        })
        .collect()
}

/// Min-max scaling of a heatmap: pixel `k` stands for `min + k * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
    pub maxval: u16,
}

impl PgmScale {
    pub fn step(&self) -> f64 {
        (self.max - self.min) / self.maxval as f64
    }

    pub fn value(&self, pixel: u16) -> f64 {
        self.min + pixel as f64 * self.step()
    }

    pub fn to_text(&self) -> String {
        format!("min {:.16e}\nmax {:.16e}\nmaxval {}\nstep {:.16e}\n", self.min, self.max, self.maxval, self.step())
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut min = None;
        let mut max = None;
        let mut maxval = None;
        for line in s.lines() {
            let mut it = line.split_whitespace();
            match (it.next(), it.next()) {
                (Some("min"), Some(v)) => min = v.parse().ok(),
                (Some("max"), Some(v)) => max = v.parse().ok(),
                (Some("maxval"), Some(v)) => maxval = v.parse().ok(),
                _ => {}
            }
        }
        match (min, max, maxval) {
            (Some(min), Some(max), Some(maxval)) => Ok(PgmScale { min, max, maxval }),
            _ => Err(Error::Format("scale file needs min, max and maxval".into())),
        }
    }
}

/// Binary PGM (P5) of row-major `values`, image row `j` being grid row `y_j`.
/// A constant image has all pixels zero.
pub fn encode_pgm(values: &[f64], nx: usize, ny: usize, sixteen_bit: bool) -> Result<(Vec<u8>, PgmScale)> {
    if values.len() != nx * ny {
        return Err(Error::Format(format!("{} values for a {nx}x{ny} image", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("non-finite value in heatmap".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let maxval: u16 = if sixteen_bit { 65535 } else { 255 };
    let scale = PgmScale { min, max, maxval };
    let mut out = format!("P5\n{nx} {ny}\n{maxval}\n").into_bytes();
    for &v in values {
        let k = if max > min { ((v - min) / (max - min) * maxval as f64).round() as u16 } else { 0 };
        if sixteen_bit {
            out.extend_from_slice(&k.to_be_bytes());
        } else {
            out.push(k as u8);
        }
    }
    Ok((out, scale))
}

/// Reads a P5 image as `(width, height, maxval, pixels)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, u16, Vec<u16>)> {
    let bad = |m: &str| Error::Format(format!("PGM: {m}"));
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not ASCII"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("not a binary graymap"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    let data = &bytes[pos + 1..];
    let wide = maxval > 255;
    let need = w * h * if wide { 2 } else { 1 };
    if data.len() != need {
        return Err(bad("pixel data has the wrong length"));
    }
    let pixels = if wide {
        data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        data.iter().map(|&b| b as u16).collect()
    };
    Ok((w, h, maxval as u16, pixels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_field, FieldRng};
    use crate::torus::{build_metric, LambdaSpec};

    #[test]
    fn field_round_trip_is_exact() {
        let m = Arc::new(build_metric(16, 16, 1.0, 1.3, &LambdaSpec::single(0.1)).unwrap());
        let f = random_field(&m, &mut FieldRng::seed(3), &[-2, 0, 1], 3);
        let s = field_to_json(&f).unwrap();
        let back = field_from_json(&s).unwrap();
        assert_eq!(back.degree(), 2);
        for m in -2..=2 {
            assert_eq!(back.mode_or_zero(m), f.mode_or_zero(m));
        }
        assert_eq!(back.metric().lambda(), m.lambda());
        assert_eq!(field_to_json(&back).unwrap(), s);
    }

    #[test]
    fn mismatched_metric_is_rejected() {
        let m = Arc::new(TorusMetric::flat(16, 16, 1.0, 1.0).unwrap());
        let other = Arc::new(build_metric(16, 16, 1.0, 1.0, &LambdaSpec::single(0.1)).unwrap());
        let s = field_to_json(&FourierField::identity(&m)).unwrap();
        assert!(matches!(field_from_json_on(&s, &other), Err(Error::MetricMismatch)));
    }

    #[test]
    fn selectors_parse() {
        let s: Selector = "-1:02:im".parse().unwrap();
        assert_eq!(s, Selector { mode: -1, entry: Some((0, 2)), part: Part::Im });
        assert_eq!("0:norm".parse::<Selector>().unwrap().entry, None);
        for bad in ["", "x:norm", "0:33:re", "0:01:phase", "0:1:re"] {
            assert!(bad.parse::<Selector>().is_err(), "{bad}");
        }
    }

    #[test]
    fn pgm_round_trip_within_one_step() {
        let vals: Vec<f64> = (0..20 * 17).map(|k| (k as f64 * 0.37).sin()).collect();
        for wide in [false, true] {
            let (bytes, scale) = encode_pgm(&vals, 20, 17, wide).unwrap();
            let (w, h, maxval, px) = decode_pgm(&bytes).unwrap();
            assert_eq!((w, h, maxval), (20, 17, scale.maxval));
            let back = PgmScale::from_text(&scale.to_text()).unwrap();
            for (v, p) in vals.iter().zip(&px) {
                assert!((back.value(*p) - v).abs() <= back.step());
            }
        }
        let (bytes, _) = encode_pgm(&[2.5; 256], 16, 16, false).unwrap();
        assert!(decode_pgm(&bytes).unwrap().3.iter().all(|&p| p == 0));
    }
}
