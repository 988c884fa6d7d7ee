//! File formats and canonical textual rendering.
//!
//! One object per file, JSON encoded. Exact rationals travel as
//! `"p/q"` strings (plain integers allowed); polynomial coefficient
//! lists are lowest degree first. Series admit a small inline literal
//! syntax (`"2·z"`, `"z + 5z^3"`, `"1/2·z - z^2"`) used by the command
//! line. All rendering is deterministic: reduced rationals, monic
//! denominators, lowest-degree-first terms, fixed field order.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num::{BigRational, One};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{Chart, ChartRing, CurveError, RatFunc};
use crate::jetgroup::{JetError, TruncSeries};
use crate::liealg::{LieError, LieRealization};
use crate::matrix::Mat;
use crate::oper::{CanonicalOper, OperConnection, OperError};
use crate::poly::Poly;
use crate::ring::{QRing, Ring};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("parse error: {0}")]
    Literal(String),
    #[error("cannot read `{path}`: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Oper(#[from] OperError),
}

impl IoError {
    /// Distinguishes malformed input (exit code 2) from domain errors
    /// raised by well-formed but invalid objects (exit code 3).
    pub fn is_parse(&self) -> bool {
        matches!(self, IoError::Json { .. } | IoError::Literal(_) | IoError::File { .. })
    }
}

fn json_err(e: serde_json::Error) -> IoError {
    IoError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, IoError> {
    BigRational::from_str(s.trim())
        .map_err(|e| IoError::Literal(format!("invalid rational `{s}`: {e}")))
}

pub fn format_rational(q: &BigRational) -> String {
    q.to_string()
}

pub fn poly_from_strings(coeffs: &[String]) -> Result<Poly, IoError> {
    let cs = coeffs
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Poly::new(cs))
}

pub fn poly_to_strings(p: &Poly) -> Vec<String> {
    p.coeffs().iter().map(format_rational).collect()
}

/// A truncated series over ℚ: coefficient strings lowest degree first,
/// padded with zeros up to `order`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesFile {
    pub order: usize,
    pub coeffs: Vec<String>,
}

pub fn series_from_file_str(text: &str) -> Result<TruncSeries<QRing>, IoError> {
    let file: SeriesFile = serde_json::from_str(text).map_err(json_err)?;
    if file.coeffs.len() > file.order {
        return Err(IoError::Literal(format!(
            "series lists {} coefficients but has order {}",
            file.coeffs.len(),
            file.order
        )));
    }
    let mut cs = file
        .coeffs
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>, _>>()?;
    cs.resize(file.order, BigRational::from_integer(0.into()));
    Ok(TruncSeries::new(QRing, cs)?)
}

pub fn series_to_file(s: &TruncSeries<QRing>) -> SeriesFile {
    SeriesFile {
        order: s.order(),
        coeffs: s.coeffs().iter().map(format_rational).collect(),
    }
}

/// Inline series literal: sum of terms `c`, `c·z^k`, `c*z^k`, `cz^k`,
/// `z^k`, with `c` an exact rational.
pub fn parse_series_literal(text: &str, order: usize) -> Result<TruncSeries<QRing>, IoError> {
    if order < 1 {
        return Err(IoError::Literal("order must be positive".to_string()));
    }
    let mut coeffs = vec![BigRational::from_integer(0.into()); order];
    let text = text.trim();
    if text.is_empty() {
        return Err(IoError::Literal("empty series literal".to_string()));
    }
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut sign = false;
    for (i, ch) in text.chars().enumerate() {
        match ch {
            '+' | '-' if i > 0 => {
                if cur.trim().is_empty() {
                    return Err(IoError::Literal(format!("dangling sign in `{text}`")));
                }
                terms.push((sign, std::mem::take(&mut cur)));
                sign = ch == '-';
            }
            '-' => sign = true,
            _ => cur.push(ch),
        }
    }
    if cur.trim().is_empty() {
        return Err(IoError::Literal(format!("dangling sign in `{text}`")));
    }
    terms.push((sign, cur));
    for (negate, term) in terms {
        let (deg, coeff) = parse_term(term.trim())?;
        if deg >= order {
            return Err(IoError::Literal(format!(
                "term of degree {deg} exceeds order {order}"
            )));
        }
        let c = if negate { -coeff } else { coeff };
        coeffs[deg] += c;
    }
    Ok(TruncSeries::new(QRing, coeffs)?)
}

fn parse_term(term: &str) -> Result<(usize, BigRational), IoError> {
    let bad = || IoError::Literal(format!("invalid series term `{term}`"));
    if term.is_empty() {
        return Err(bad());
    }
    let (coeff_str, zpart) = match term.find('z') {
        None => (term, None),
        Some(pos) => (&term[..pos], Some(&term[pos..])),
    };
    let coeff_str = coeff_str.trim().trim_end_matches(['·', '*']).trim();
    let coeff = if coeff_str.is_empty() {
        if zpart.is_none() {
            return Err(bad());
        }
        BigRational::one()
    } else {
        parse_rational(coeff_str)?
    };
    let deg = match zpart {
        None => 0,
        Some("z") => 1,
        Some(z) => {
            let exp = z.strip_prefix("z^").ok_or_else(bad)?;
            exp.trim().parse::<usize>().map_err(|_| bad())?
        }
    };
    Ok((deg, coeff))
}

/// A rational function as coefficient lists, lowest degree first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatFuncRecord {
    pub num: Vec<String>,
    #[serde(default = "one_coeffs")]
    pub den: Vec<String>,
}

fn one_coeffs() -> Vec<String> {
    vec!["1".to_string()]
}

pub fn ratfunc_from_record(ring: &ChartRing, rec: &RatFuncRecord) -> Result<RatFunc, IoError> {
    let num = poly_from_strings(&rec.num)?;
    let den = poly_from_strings(&rec.den)?;
    Ok(ring.element(num, den)?)
}

pub fn ratfunc_to_record(f: &RatFunc) -> RatFuncRecord {
    RatFuncRecord {
        num: poly_to_strings(f.num()),
        den: poly_to_strings(f.den()),
    }
}

/// Chart description: variable name, localization polynomial, named
/// coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartFile {
    pub variable: String,
    #[serde(default)]
    pub localization: Vec<String>,
    #[serde(default)]
    pub coordinates: BTreeMap<String, RatFuncRecord>,
}

pub fn chart_from_file_struct(file: &ChartFile) -> Result<Chart, IoError> {
    let loc = poly_from_strings(&file.localization)?;
    let mut chart = Chart::new(&file.variable, loc)?;
    for (name, rec) in &file.coordinates {
        let f = ratfunc_from_record(chart.ring(), rec)?;
        chart.add_coordinate(name, f)?;
    }
    Ok(chart)
}

pub fn chart_from_str(text: &str) -> Result<Chart, IoError> {
    let file: ChartFile = serde_json::from_str(text).map_err(json_err)?;
    chart_from_file_struct(&file)
}

pub fn load_chart(path: &Path) -> Result<Chart, IoError> {
    chart_from_str(&read(path)?)
}

/// Reference to a Lie realization: a built-in name like `"sl2"` or a
/// realization file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LieSpec {
    Name(String),
    File { file: String },
}

/// Reference to a chart: inline description or a chart file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChartSpec {
    File { file: String },
    Inline(ChartFile),
}

/// Connection file: realization, chart, coordinate name, and the
/// matrix of `∇ = d + A dt` entry by entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionFile {
    pub lie: LieSpec,
    pub chart: ChartSpec,
    pub coordinate: String,
    pub matrix: Vec<Vec<RatFuncRecord>>,
}

/// Canonical oper file: coefficient list in centralizer-basis order
/// with the degree of each basis vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalFile {
    pub lie: LieSpec,
    pub chart: ChartSpec,
    pub coordinate: String,
    pub coefficients: Vec<CanonicalCoeff>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalCoeff {
    pub degree: i64,
    pub num: Vec<String>,
    #[serde(default = "one_coeffs")]
    pub den: Vec<String>,
}

/// Matrix realization file for algebras without a builder: the basis
/// and the Chevalley generator matrices, entries as `"p/q"` strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealizationFile {
    pub size: usize,
    pub basis: Vec<Vec<Vec<String>>>,
    pub e: Vec<Vec<Vec<String>>>,
    pub f: Vec<Vec<Vec<String>>>,
    pub h: Vec<Vec<Vec<String>>>,
}

fn matrix_from_rows(size: usize, rows: &[Vec<String>]) -> Result<Mat<QRing>, IoError> {
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(IoError::Literal(format!(
            "matrix must be {size}x{size}"
        )));
    }
    let mut data = Vec::with_capacity(size * size);
    for row in rows {
        for s in row {
            data.push(parse_rational(s)?);
        }
    }
    Ok(Mat::new(QRing, size, size, data))
}

pub fn realization_from_str(text: &str) -> Result<LieRealization, IoError> {
    let file: RealizationFile = serde_json::from_str(text).map_err(json_err)?;
    let parse_all = |ms: &[Vec<Vec<String>>]| -> Result<Vec<Mat<QRing>>, IoError> {
        ms.iter().map(|m| matrix_from_rows(file.size, m)).collect()
    };
    let basis = parse_all(&file.basis)?;
    let e = parse_all(&file.e)?;
    let f = parse_all(&file.f)?;
    let h = parse_all(&file.h)?;
    Ok(LieRealization::from_generators(file.size, basis, e, f, h)?)
}

pub fn load_realization(path: &Path) -> Result<LieRealization, IoError> {
    realization_from_str(&read(path)?)
}

/// Resolve a realization reference. `base` anchors relative file paths.
pub fn resolve_lie(spec: &LieSpec, base: &Path) -> Result<Arc<LieRealization>, IoError> {
    match spec {
        LieSpec::Name(name) => {
            let n = name
                .strip_prefix("sl")
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| {
                    IoError::Literal(format!(
                        "unknown realization `{name}` (expected slN or a file reference)"
                    ))
                })?;
            Ok(Arc::new(LieRealization::build_sl(n)?))
        }
        LieSpec::File { file } => Ok(Arc::new(load_realization(&base.join(file))?)),
    }
}

pub fn resolve_chart(spec: &ChartSpec, base: &Path) -> Result<Chart, IoError> {
    match spec {
        ChartSpec::Inline(file) => chart_from_file_struct(file),
        ChartSpec::File { file } => load_chart(&base.join(file)),
    }
}

pub fn connection_from_str(text: &str, base: &Path) -> Result<OperConnection, IoError> {
    let file: ConnectionFile = serde_json::from_str(text).map_err(json_err)?;
    let lie = resolve_lie(&file.lie, base)?;
    let chart = resolve_chart(&file.chart, base)?;
    let n = lie.size();
    if file.matrix.len() != n || file.matrix.iter().any(|r| r.len() != n) {
        return Err(IoError::Literal(format!("connection matrix must be {n}x{n}")));
    }
    let ring = chart.ring().clone();
    let mut data = Vec::with_capacity(n * n);
    for row in &file.matrix {
        for rec in row {
            data.push(ratfunc_from_record(&ring, rec)?);
        }
    }
    let mat = Mat::new(ring, n, n, data);
    Ok(OperConnection::new(lie, chart, &file.coordinate, mat)?)
}

pub fn load_connection(path: &Path) -> Result<OperConnection, IoError> {
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    connection_from_str(&read(path)?, &base)
}

pub fn canonical_from_str(text: &str, base: &Path) -> Result<CanonicalOper, IoError> {
    let file: CanonicalFile = serde_json::from_str(text).map_err(json_err)?;
    let lie = resolve_lie(&file.lie, base)?;
    let chart = resolve_chart(&file.chart, base)?;
    let degrees = lie.vcan_degrees().to_vec();
    if file.coefficients.len() != degrees.len() {
        return Err(IoError::Literal(format!(
            "expected {} coefficients, got {}",
            degrees.len(),
            file.coefficients.len()
        )));
    }
    let ring = chart.ring().clone();
    let mut coeffs = Vec::with_capacity(degrees.len());
    for (c, &d) in file.coefficients.iter().zip(&degrees) {
        if c.degree != d {
            return Err(IoError::Literal(format!(
                "coefficient degree {} does not match the basis degree {d}",
                c.degree
            )));
        }
        let rec = RatFuncRecord { num: c.num.clone(), den: c.den.clone() };
        coeffs.push(ratfunc_from_record(&ring, &rec)?);
    }
    Ok(CanonicalOper::new(lie, chart, &file.coordinate, coeffs)?)
}

pub fn load_canonical(path: &Path) -> Result<CanonicalOper, IoError> {
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    canonical_from_str(&read(path)?, &base)
}

pub fn canonical_to_file(oper: &CanonicalOper) -> CanonicalFile {
    CanonicalFile {
        lie: LieSpec::Name(format!("sl{}", oper.lie().size())),
        chart: ChartSpec::Inline(chart_to_file(oper.chart())),
        coordinate: oper.coord().to_string(),
        coefficients: oper
            .coeffs()
            .iter()
            .zip(oper.lie().vcan_degrees())
            .map(|(c, &d)| CanonicalCoeff {
                degree: d,
                num: poly_to_strings(c.num()),
                den: poly_to_strings(c.den()),
            })
            .collect(),
    }
}

pub fn chart_to_file(chart: &Chart) -> ChartFile {
    let mut coordinates = BTreeMap::new();
    for name in chart.coordinate_names() {
        if name == chart.var() {
            continue;
        }
        let f = chart.coordinate(name).expect("listed name");
        coordinates.insert(name.to_string(), ratfunc_to_record(f));
    }
    ChartFile {
        variable: chart.var().to_string(),
        localization: poly_to_strings(chart.ring().localization()),
        coordinates,
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// Deterministic rendering of a matrix over any coefficient ring:
/// `[[a, b], [c, d]]`.
pub fn display_matrix<R: Ring>(m: &Mat<R>) -> String {
    let ring = m.ring();
    let mut rows = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| ring.display(m.at(i, j))).collect();
        rows.push(format!("[{}]", row.join(", ")));
    }
    format!("[{}]", rows.join(", "))
}
