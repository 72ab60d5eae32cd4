//! CSV writers for simulation reports.
//!
//! Every file starts with a `# {plan json}` line, followed by a header row:
//!
//! * `weights.csv`: `weight,count,binomial` (binomial pmf at that weight);
//! * `quantiles.csv`: `tail_mass,empirical,binomial`;
//! * `dfr.csv`: `x,failures,trials,log2_dfr,ci_low,ci_high,bound_log2`.
//!
//! Logarithms of zero rates are written as `-inf`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::sim::TrialReport;

pub const WEIGHTS_CSV: &str = "weights.csv";
pub const QUANTILES_CSV: &str = "quantiles.csv";
pub const DFR_CSV: &str = "dfr.csv";

fn writer<W: Write>(mut out: W, report: &TrialReport) -> Result<csv::Writer<W>> {
    writeln!(out, "# {}", report.plan.to_json())?;
    Ok(csv::Writer::from_writer(out))
}

fn num(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Histogram rows over the observed range, widened to the binomial bulk.
pub fn write_weights_csv<W: Write>(out: W, report: &TrialReport) -> Result<()> {
    let hist = report
        .outcome
        .histogram
        .as_ref()
        .ok_or_else(|| Error::invalid("report has no histogram"))?;
    let overlay = report.outcome.binomial.as_ref();
    let (mut lo, mut hi) = hist.range().unwrap_or((0, 0));
    if let Some(b) = overlay {
        lo = lo.min(b.first_weight);
        hi = hi.max(b.first_weight + b.pmf.len().saturating_sub(1));
    }
    let mut w = writer(out, report)?;
    w.write_record(["weight", "count", "binomial"])?;
    for weight in lo..=hi {
        let binomial = overlay.map_or(0.0, |b| b.pmf_at(weight));
        w.write_record([
            weight.to_string(),
            hist.count(weight).to_string(),
            num(binomial),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_quantiles_csv<W: Write>(out: W, report: &TrialReport) -> Result<()> {
    if report.outcome.quantiles.is_empty() {
        return Err(Error::invalid("report has no quantiles"));
    }
    let mut w = writer(out, report)?;
    w.write_record(["tail_mass", "empirical", "binomial"])?;
    for q in &report.outcome.quantiles {
        w.write_record([
            num(q.tail_mass),
            q.empirical.to_string(),
            q.binomial.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dfr_csv<W: Write>(out: W, report: &TrialReport) -> Result<()> {
    if report.outcome.points.is_empty() {
        return Err(Error::invalid("report has no failure counts"));
    }
    let mut w = writer(out, report)?;
    w.write_record([
        "x",
        "failures",
        "trials",
        "log2_dfr",
        "ci_low",
        "ci_high",
        "bound_log2",
    ])?;
    for p in &report.outcome.points {
        w.write_record([
            num(p.x),
            p.failures.to_string(),
            p.trials.to_string(),
            num(p.log2_dfr),
            num(p.ci_low),
            num(p.ci_high),
            num(p.bound_log2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Names of the CSV files that apply to a report.
pub fn csv_files(report: &TrialReport) -> Vec<&'static str> {
    let o = &report.outcome;
    let mut files = Vec::new();
    if o.histogram.is_some() {
        files.push(WEIGHTS_CSV);
    }
    if !o.quantiles.is_empty() {
        files.push(QUANTILES_CSV);
    }
    if !o.points.is_empty() {
        files.push(DFR_CSV);
    }
    files
}

/// Writes one of the files named by [`csv_files`].
pub fn write_csv<W: Write>(name: &str, out: W, report: &TrialReport) -> Result<()> {
    match name {
        WEIGHTS_CSV => write_weights_csv(out, report),
        QUANTILES_CSV => write_quantiles_csv(out, report),
        DFR_CSV => write_dfr_csv(out, report),
        _ => Err(Error::invalid(format!("unknown output file `{name}`"))),
    }
}
