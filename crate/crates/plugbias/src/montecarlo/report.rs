//! CSV and markdown renderings of experiment reports.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use super::experiment::ExperimentReport;
use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

/// Writes a header row and one row per report.
pub fn write_csv<W: Write>(reports: &[ExperimentReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
}

/// Reads rows written by [`write_csv`]; `wall_clock_secs` comes back as zero.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ExperimentReport>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)
}

fn cell(r: Option<&ExperimentReport>) -> String {
    match r {
        Some(r) => match r.relative_bias {
            Some(b) => format!("{b:.4}"),
            None => format!("abs {:.4}", r.bias),
        },
        None => String::new(),
    }
}

/// Relative-bias tables, one per (functional, estimator): rows are
/// (distribution, run), columns are (n, p).
pub fn markdown_table(reports: &[ExperimentReport]) -> String {
    let groups: BTreeSet<(&str, &str)> = reports
        .iter()
        .map(|r| (r.functional.as_str(), r.estimator.as_str()))
        .collect();
    let mut out = String::new();
    for (functional, estimator) in groups {
        let rs: Vec<&ExperimentReport> = reports
            .iter()
            .filter(|r| r.functional == functional && r.estimator == estimator)
            .collect();
        let cols: BTreeSet<(usize, usize)> = rs.iter().map(|r| (r.n, r.p)).collect();
        let mut rows: Vec<(&str, usize)> = Vec::new();
        for r in &rs {
            if !rows.contains(&(r.distribution.as_str(), r.run)) {
                rows.push((r.distribution.as_str(), r.run));
            }
        }
        let seeds: BTreeSet<u64> = rs.iter().map(|r| r.seed).collect();
        let reps: BTreeSet<usize> = rs.iter().map(|r| r.replications).collect();
        out.push_str(&format!(
            "Relative bias of {estimator} estimates of {functional} ({} simulations per run; seeds {})\n\n",
            reps.iter().map(usize::to_string).collect::<Vec<_>>().join("/"),
            seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", "),
        ));
        out.push_str("| distribution | run |");
        for (n, p) in &cols {
            out.push_str(&format!(" n={n} p={p} |"));
        }
        out.push_str("\n|---|---|");
        out.push_str(&"---:|".repeat(cols.len()));
        out.push('\n');
        let mut last = "";
        for (dist, run) in rows {
            let label = if dist == last { "" } else { dist };
            last = dist;
            out.push_str(&format!("| {label} | Run{run} |"));
            for &(n, p) in &cols {
                let r = rs
                    .iter()
                    .find(|r| r.distribution == dist && r.run == run && r.n == n && r.p == p);
                out.push_str(&format!(" {} |", cell(r.copied())));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
