//! Evaluation report outputs: a JSON record, a text table and histogram CSV.

use std::fmt::Write;
use std::path::Path;

use followup_core::eval::{Distribution, EvalReport};
use serde::Serialize;

use crate::jsonl::{self, FormatError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRecord<'a> {
    pub scorer: &'a str,
    #[serde(flatten)]
    pub report: &'a EvalReport,
}

pub fn render_table(report: &EvalReport, scorer: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scorer   {scorer}");
    let _ = writeln!(out, "samples  {}", report.sample_count);
    let _ = writeln!(out, "MRR      {:.4}", report.mrr);
    for (k, h) in &report.hit_ratio {
        let _ = writeln!(out, "HR@{k:<5} {h:.2}");
    }
    let d = &report.distribution;
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<20} {:>8} {:>12} {:>8} {:>8}",
        "label",
        "count",
        "above_valid",
        format!("<{}", d.theta_low),
        format!(">{}", d.theta_high)
    );
    let pct = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{:.1}%", 100.0 * v));
    for (label, r) in &d.per_label {
        let _ = writeln!(
            out,
            "{:<20} {:>8} {:>12} {:>8} {:>8}",
            label.as_str(),
            r.count,
            format!("{:.1}%", 100.0 * r.ranked_above_valid),
            pct(r.fraction_below),
            pct(r.fraction_above)
        );
    }
    if !d.probabilistic {
        let _ = writeln!(out, "(scores outside [0, 1]; score distributions not computed)");
    }
    out
}

/// `label,bin,lower,upper,count` rows; the valid candidate uses label `valid`.
pub fn write_histograms(path: &Path, d: &Distribution) -> Result<(), FormatError> {
    jsonl::write_with(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        let err = |e: csv::Error| std::io::Error::other(e);
        csv.write_record(["label", "bin", "lower", "upper", "count"]).map_err(err)?;
        let rows = d
            .per_label
            .iter()
            .filter_map(|(l, r)| r.histogram.as_ref().map(|h| (l.as_str(), h)))
            .chain(d.valid_histogram.as_ref().map(|h| ("valid", h)));
        for (label, h) in rows {
            for (i, c) in h.counts.iter().enumerate() {
                let (lo, hi) = h.edges(i);
                csv.write_record([label, &i.to_string(), &format!("{lo:.2}"), &format!("{hi:.2}"), &c.to_string()])
                    .map_err(err)?;
            }
        }
        csv.flush()
    })
}
