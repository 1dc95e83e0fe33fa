use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::run::{ComparisonTable, EvalReport};
use crate::error::{Error, Result};
use crate::kinematics::fmt_f64;

pub fn write_report_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// `variant,architecture,test,excluded_mse,reference_mse`, one row per test
/// followed by the average rows of each (variant, architecture).
pub fn write_comparison_csv<W: Write>(table: &ComparisonTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "variant,architecture,test,excluded_mse,reference_mse")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.variant,
            r.architecture.label(),
            r.test,
            opt(r.excluded_mse),
            opt(r.reference_mse)
        )?;
        let last_of_pair = table
            .rows
            .iter()
            .rev()
            .find(|x| x.variant == r.variant && x.architecture == r.architecture)
            .is_some_and(|x| std::ptr::eq(x, r));
        if last_of_pair {
            for a in table
                .averages
                .iter()
                .filter(|a| a.variant == r.variant && a.architecture == r.architecture)
            {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    a.variant,
                    a.architecture.label(),
                    a.label,
                    fmt_f64(a.mse),
                    fmt_f64(a.reference_mse)
                )?;
            }
        }
    }
    out.flush()
}

/// Best and worst excluded cycles of a report, one row per sample:
/// `which,cycle,t_s,measured,predicted,reference_predicted`.
pub fn write_profiles_csv<W: Write>(report: &EvalReport, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "which,cycle,t_s,measured,predicted,reference_predicted"
    )?;
    for (which, p) in [("best", &report.best), ("worst", &report.worst)] {
        let Some(p) = p else { continue };
        for k in 0..p.t.len() {
            writeln!(
                out,
                "{which},{},{},{},{},{}",
                p.id,
                fmt_f64(p.t[k]),
                fmt_f64(p.measured[k]),
                fmt_f64(p.predicted[k]),
                fmt_f64(p.reference_predicted[k])
            )?;
        }
    }
    out.flush()
}
