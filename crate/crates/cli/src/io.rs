//! Sample ingestion, the model file and tab-separated tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use aaatrig::polezero::PoleZeroReport;
use aaatrig::trigbary::TWO_PI;
use aaatrig::{Complex64, Parity, SampleSet, TrigModel};
use anyhow::{anyhow, bail, Context, Result};
use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn detect(path: &Path, explicit: Option<Format>) -> Format {
        explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        })
    }
}

/// Points with optional values, in file order.
pub struct RawSamples {
    pub points: Vec<Complex64>,
    pub values: Option<Vec<Complex64>>,
    /// 1-based source line of each row (CSV) or array index (JSON).
    pub rows: Vec<usize>,
}

#[derive(Deserialize)]
struct JsonSamples {
    points: Vec<[f64; 2]>,
    values: Option<Vec<[f64; 2]>>,
}

pub fn read_raw(path: &Path, format: Format, need_values: bool) -> Result<RawSamples> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw = match format {
        Format::Csv => parse_csv(&text, need_values)?,
        Format::Json => parse_json(&text)?,
    };
    if need_values && raw.values.is_none() {
        bail!("{}: no values given", path.display());
    }
    Ok(raw)
}

fn parse_csv(text: &str, need_values: bool) -> Result<RawSamples> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().context("reading CSV header")?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(rz), Some(iz)) = (col("re_z"), col("im_z")) else {
        bail!("CSV header must contain re_z and im_z, got {:?}", headers.iter().collect::<Vec<_>>());
    };
    let value_cols = match (col("re_f"), col("im_f")) {
        (Some(rf), Some(imf)) => Some((rf, imf)),
        _ if need_values => bail!("CSV header must contain re_f and im_f"),
        _ => None,
    };
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| -> Result<f64> {
            let s = record.get(i).ok_or_else(|| anyhow!("line {line}: missing column {}", i + 1))?;
            s.parse::<f64>().map_err(|_| anyhow!("line {line}: cannot parse {s:?} as a number"))
        };
        points.push(Complex64::new(field(rz)?, field(iz)?));
        if let Some((rf, imf)) = value_cols {
            values.push(Complex64::new(field(rf)?, field(imf)?));
        }
        rows.push(line);
    }
    Ok(RawSamples { points, values: value_cols.map(|_| values), rows })
}

fn parse_json(text: &str) -> Result<RawSamples> {
    let parsed: JsonSamples = serde_json::from_str(text).context("malformed JSON samples")?;
    let pair = |p: &[f64; 2]| Complex64::new(p[0], p[1]);
    let rows = (0..parsed.points.len()).collect();
    Ok(RawSamples {
        points: parsed.points.iter().map(pair).collect(),
        values: parsed.values.map(|v| v.iter().map(pair).collect()),
        rows,
    })
}

/// Reads samples, rescales the period to 2π and canonicalizes them.
pub fn ingest(path: &Path, format: Format, period: f64) -> Result<SampleSet> {
    let raw = read_raw(path, format, true)?;
    let factor = TWO_PI / period;
    let points = raw.points.iter().map(|z| z * factor).collect();
    let values = raw.values.unwrap_or_default();
    SampleSet::new(points, values).map_err(|e| match e {
        aaatrig::Error::DuplicatePoints(pairs) => {
            let listed: Vec<String> = pairs
                .iter()
                .map(|&(a, b)| format!("{} and {}", raw.rows[a], raw.rows[b]))
                .collect();
            anyhow!("duplicate points after projection onto one period: rows {}", listed.join(", "))
        }
        other => other.into(),
    })
}

/// A real number written with 17 significant digits; non-finite values are `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Num(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

pub type Pair = [Num; 2];

fn pair(z: Complex64) -> Pair {
    [Num(z.re), Num(z.im)]
}

fn unpair(p: &Pair) -> Complex64 {
    Complex64::new(p[0].0, p[1].0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityTag {
    Odd,
    Even,
}

impl From<Parity> for ParityTag {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Odd => ParityTag::Odd,
            Parity::Even => ParityTag::Even,
        }
    }
}

impl From<&ParityTag> for Parity {
    fn from(p: &ParityTag) -> Self {
        match p {
            ParityTag::Odd => Parity::Odd,
            ParityTag::Even => Parity::Even,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleBlock {
    pub poles: Vec<Pair>,
    pub residues: Vec<Pair>,
    pub zeros: Vec<Pair>,
}

/// On-disk form of a fitted model. Support points are stored in the
/// 2π-periodic variable `u = 2πz/period`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub parity: ParityTag,
    pub period: Num,
    pub scale: Num,
    pub converged: bool,
    pub support: Vec<Pair>,
    pub fvals: Vec<Pair>,
    pub weights: Vec<Pair>,
    pub err_history: Vec<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles: Option<PoleBlock>,
}

impl ModelFile {
    pub fn from_model(model: &TrigModel, period: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            parity: model.parity().into(),
            period: Num(period),
            scale: Num(model.scale()),
            converged: model.converged(),
            support: model.support().iter().copied().map(pair).collect(),
            fvals: model.fvals().iter().copied().map(pair).collect(),
            weights: model.weights().iter().copied().map(pair).collect(),
            err_history: model.err_history().iter().copied().map(Num).collect(),
            poles: None,
        }
    }

    /// Attaches poles, residues and zeros, expressed in the original variable.
    pub fn with_poles(mut self, report: &PoleZeroReport) -> Self {
        let c = self.period.0 / TWO_PI;
        self.poles = Some(PoleBlock {
            poles: report.poles.iter().map(|&p| pair(p * c)).collect(),
            residues: report.residues.iter().map(|&r| pair(r * c)).collect(),
            zeros: report.zeros.iter().map(|&z| pair(z * c)).collect(),
        });
        self
    }

    pub fn model(&self) -> Result<TrigModel> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version);
        }
        if !(self.period.0 > 0.0) {
            bail!("period must be positive");
        }
        let model = TrigModel::from_parts(
            (&self.parity).into(),
            self.support.iter().map(unpair).collect(),
            self.fvals.iter().map(unpair).collect(),
            self.weights.iter().map(unpair).collect(),
            self.err_history.iter().map(|n| n.0).collect(),
            self.scale.0,
        )?;
        Ok(model)
    }

    pub fn period(&self) -> f64 {
        self.period.0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed model file")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| path.display().to_string())
    }
}

/// Tab-separated table with a header row.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let mut text = columns.join("\t");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let parts: Vec<String> = cells.iter().map(Cell::render).collect();
        let _ = writeln!(self.text, "{}", parts.join("\t"));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub enum Cell {
    Int(usize),
    Real(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Real(x) if x.is_nan() => "nan".to_string(),
            Cell::Real(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.to_string(),
            Cell::Real(x) => format!("{x:.16e}"),
        }
    }
}

pub fn error_table(rows: &[(usize, f64)]) -> Table {
    let mut t = Table::new(&["m", "max_err"]);
    for &(m, e) in rows {
        t.row(&[Cell::Int(m), Cell::Real(e)]);
    }
    t
}
