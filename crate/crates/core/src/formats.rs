//! CSV and JSON file formats used by the command-line tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::Serialize;

use crate::curves::CurveSet;
use crate::envelope::GlobalEnvelope;
use crate::error::{Error, Result};
use crate::measures::MeasureKind;
use crate::sim::OutlierKind;
use crate::study::{PowerEstimate, PowerTable};

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: '{field}' is not a number")))
}

/// Writes `x,<x_1>,...` followed by one `curve_<i>,...` row per curve.
pub fn write_curves_csv<W: Write>(w: W, curves: &CurveSet) -> Result<()> {
    let mut out = writer(w);
    let mut record = Vec::with_capacity(curves.num_points() + 1);
    record.push("x".to_string());
    record.extend(curves.grid().iter().map(f64::to_string));
    out.write_record(&record)?;
    for (i, curve) in curves.curves().enumerate() {
        record.clear();
        record.push(format!("curve_{}", i + 1));
        record.extend(curve.iter().map(f64::to_string));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_curves_csv<R: Read>(r: R) -> Result<CurveSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty curves file".into()))??;
    if header.get(0) != Some("x") {
        return Err(Error::Parse("first header cell must be 'x'".into()));
    }
    let grid = header
        .iter()
        .skip(1)
        .enumerate()
        .map(|(k, f)| parse_f64(f, &format!("grid point {}", k + 1)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != grid.len() + 1 {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                i + 2,
                rec.len(),
                grid.len() + 1
            )));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|f| parse_f64(f, &format!("row {}", i + 2)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    CurveSet::from_rows(&rows, grid)
}

/// Writes columns `x,lower,upper,central`.
pub fn write_envelope_csv<W: Write>(
    w: W,
    grid: &[f64],
    envelope: &GlobalEnvelope,
    central: &[f64],
) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["x", "lower", "upper", "central"])?;
    for k in 0..grid.len() {
        out.write_record([
            grid[k].to_string(),
            envelope.lower[k].to_string(),
            envelope.upper[k].to_string(),
            central[k].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// JSON verdict of an envelope test; curve indices are one-based.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct EnvelopeSummary {
    pub measure: MeasureKind,
    pub alpha: f64,
    pub crit: f64,
    pub extreme_indices: Vec<usize>,
    pub s: usize,
    pub d: usize,
}

pub fn write_study_csv<W: Write>(w: W, table: &PowerTable) -> Result<()> {
    let mut out = writer(w);
    for row in &table.rows {
        out.serialize(row)?;
    }
    if table.is_empty() {
        out.write_record([
            "measure", "s", "d", "scale", "outlier", "alpha", "reps", "detections", "power",
            "ci_lo", "ci_hi", "master_seed",
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_study_csv<R: Read>(r: R) -> Result<PowerTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let rows = rdr
        .deserialize::<PowerEstimate>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(PowerTable { rows })
}

/// Row selection for [`summarize`]; `None` matches everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SummaryFilter {
    pub outlier: Option<OutlierKind>,
    pub d: Option<usize>,
    pub scale: Option<f64>,
    pub measure: Option<MeasureKind>,
}

impl SummaryFilter {
    fn matches(&self, r: &PowerEstimate) -> bool {
        self.outlier.is_none_or(|o| o == r.outlier)
            && self.d.is_none_or(|d| d == r.d)
            && self.scale.is_none_or(|x| x == r.scale)
            && self.measure.is_none_or(|m| m == r.measure)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PivotPoint {
    pub s: usize,
    pub reps: usize,
    pub detections: usize,
    pub power: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Power against `s` for one (outlier, d, scale, measure) panel line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PivotBlock {
    pub outlier: OutlierKind,
    pub d: usize,
    pub scale: f64,
    pub measure: MeasureKind,
    pub points: Vec<PivotPoint>,
}

/// Groups matching rows into blocks ordered by (outlier, d, scale, measure), points by s.
pub fn summarize(table: &PowerTable, filter: &SummaryFilter) -> Vec<PivotBlock> {
    let mut groups: BTreeMap<(OutlierKind, usize, u64, MeasureKind), Vec<PivotPoint>> =
        BTreeMap::new();
    let mut scales: BTreeMap<u64, f64> = BTreeMap::new();
    for r in table.rows.iter().filter(|r| filter.matches(r)) {
        let key = scale_key(r.scale);
        scales.insert(key, r.scale);
        groups
            .entry((r.outlier, r.d, key, r.measure))
            .or_default()
            .push(PivotPoint {
                s: r.s,
                reps: r.reps,
                detections: r.detections,
                power: r.power,
                ci_lo: r.ci_lo,
                ci_hi: r.ci_hi,
            });
    }
    groups
        .into_iter()
        .map(|((outlier, d, key, measure), mut points)| {
            points.sort_by_key(|p| p.s);
            PivotBlock { outlier, d, scale: scales[&key], measure, points }
        })
        .collect()
}

/// Order-preserving integer key for non-negative scales.
fn scale_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if x.is_sign_negative() {
        !bits
    } else {
        bits | (1 << 63)
    }
}

pub fn render_summary_text(blocks: &[PivotBlock]) -> String {
    let mut out = String::new();
    for (n, b) in blocks.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "outlier={} d={} scale={} measure={}",
            b.outlier, b.d, b.scale, b.measure
        );
        let _ = writeln!(out, "{:>8} {:>8} {:>8} {:>8}", "s", "power", "ci_lo", "ci_hi");
        for p in &b.points {
            let _ = writeln!(
                out,
                "{:>8} {:>8.4} {:>8.4} {:>8.4}",
                p.s, p.power, p.ci_lo, p.ci_hi
            );
        }
    }
    out
}
