//! CSV report rows. Rationals are split into integer columns so a row can be
//! reconstructed exactly; the score columns use the `num/den` form.

use std::io::Write;

use serde::Serialize;

use crate::engine::Mechanism;
use crate::error::{Error, Result};
use crate::systems::Instance;
use crate::verify::RatioReport;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub instance_id: String,
    pub mechanism: String,
    pub m: usize,
    pub class: String,
    pub exact_ratio_num: Option<i128>,
    pub exact_ratio_den: Option<i128>,
    pub bound_num: i128,
    pub bound_den: i128,
    pub pass: bool,
    pub expected_score: String,
    pub opt_score: String,
    pub runtime_ms: u64,
}

impl ReportRow {
    pub fn from_ratio(r: &RatioReport, runtime_ms: u64) -> Self {
        ReportRow {
            instance_id: r.instance_id.clone(),
            mechanism: r.mechanism.clone(),
            m: r.m,
            class: r.class.clone(),
            exact_ratio_num: Some(*r.ratio.numer()),
            exact_ratio_den: Some(*r.ratio.denom()),
            bound_num: *r.bound.numer(),
            bound_den: *r.bound.denom(),
            pass: r.pass,
            expected_score: r.expected_score.to_string(),
            opt_score: r.opt_score.to_string(),
            runtime_ms,
        }
    }

    /// Row for an instance whose optimum scores zero: the ratio columns stay empty.
    pub fn without_ratio(
        instance_id: &str,
        instance: &Instance,
        mechanism: &Mechanism,
        bound: Rational,
        expected: Rational,
        pass: bool,
        runtime_ms: u64,
    ) -> Self {
        ReportRow {
            instance_id: instance_id.to_string(),
            mechanism: mechanism.label(),
            m: instance.m(),
            class: instance.system.kind_name().to_string(),
            exact_ratio_num: None,
            exact_ratio_den: None,
            bound_num: *bound.numer(),
            bound_den: *bound.denom(),
            pass,
            expected_score: expected.to_string(),
            opt_score: "0".into(),
            runtime_ms,
        }
    }

    pub fn ratio(&self) -> Option<Rational> {
        Some(Rational::new(self.exact_ratio_num?, self.exact_ratio_den?))
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Parse(format!("writing report: {e}"));
    if rows.is_empty() {
        w.write_record([
            "instance_id",
            "mechanism",
            "m",
            "class",
            "exact_ratio_num",
            "exact_ratio_den",
            "bound_num",
            "bound_den",
            "pass",
            "expected_score",
            "opt_score",
            "runtime_ms",
        ])
        .map_err(io)?;
    }
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("writing report: {e}")))
}

pub fn write_csv_file(path: &std::path::Path, rows: &[ReportRow]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    write_csv(std::io::BufWriter::new(f), rows)
}
