//! Gap-table and expected-utility reports as CSV or markdown pipe tables.
//!
//! Column order is stable: `Problem` first, then the algorithms present
//! in canonical order (ACS, RACS, SACS, SRM, SSAS). All numbers print
//! with four decimals so repeated runs emit identical bytes.

use std::str::FromStr;

use super::euf::EufStats;
use super::GapTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown format '{other}' (expected csv or markdown)")),
        }
    }
}

fn fmt4(value: f64) -> String {
    if value.is_infinite() {
        if value > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{value:.4}")
    }
}

fn render(header: Vec<String>, rows: Vec<Vec<String>>, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(&header).expect("in-memory write");
            for row in rows {
                writer.write_record(&row).expect("in-memory write");
            }
            String::from_utf8(writer.into_inner().expect("in-memory flush"))
                .expect("csv output is utf-8")
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str(&format!("| {} |\n", header.join(" | ")));
            out.push_str(&format!(
                "|{}\n",
                header.iter().map(|_| "---|").collect::<String>()
            ));
            for row in rows {
                out.push_str(&format!("| {} |\n", row.join(" | ")));
            }
            out
        }
    }
}

/// Per-problem mean gaps, one column per algorithm.
pub fn emit_gap_report(table: &GapTable, format: ReportFormat) -> String {
    let algorithms = table.algorithms();
    let mut header = vec!["Problem".to_string()];
    header.extend(algorithms.iter().map(|a| a.label().to_string()));
    let rows = table
        .problems()
        .into_iter()
        .map(|problem| {
            let mut row = vec![problem.to_string()];
            for &algorithm in &algorithms {
                row.push(
                    table
                        .mean_gap(problem, algorithm)
                        .map(fmt4)
                        .unwrap_or_default(),
                );
            }
            row
        })
        .collect();
    render(header, rows, format)
}

/// Expected-utility statistics table, one row per algorithm in rank order.
pub fn emit_euf_report(stats: &[EufStats], format: ReportFormat) -> String {
    let header = ["Algorithm", "x_bar", "s2", "b_hat", "c_hat", "euf", "Rk", "Note"]
        .map(String::from)
        .to_vec();
    let rows = stats
        .iter()
        .map(|s| {
            vec![
                s.algorithm.clone(),
                fmt4(s.x_bar),
                fmt4(s.s2),
                fmt4(s.b_hat),
                fmt4(s.c_hat),
                fmt4(s.euf),
                s.rank.map(|r| r.to_string()).unwrap_or_default(),
                if s.degenerate { "degenerate".into() } else { String::new() },
            ]
        })
        .collect();
    render(header, rows, format)
}
