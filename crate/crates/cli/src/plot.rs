//! Long-format CSV for external plotting: one row per `(series, x)`.

use serde::Serialize;
use torsionlab_core::homology::GrowthScan;
use torsionlab_core::walks::WalkReport;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub series: String,
    pub x: f64,
    pub y: f64,
    /// Empty when the series has no error estimate.
    pub stderr: Option<f64>,
}

pub fn growth_rows(scan: &GrowthScan) -> Vec<PlotRow> {
    let mut rows: Vec<PlotRow> = scan
        .reports
        .iter()
        .map(|r| PlotRow {
            series: "log_torsion_over_q".into(),
            x: r.q as f64,
            y: r.log_torsion_over_q,
            stderr: None,
        })
        .collect();
    if let Some(m) = &scan.mahler {
        rows.extend(scan.reports.iter().map(|r| PlotRow {
            series: "mahler_measure".into(),
            x: r.q as f64,
            y: m.log_measure,
            stderr: None,
        }));
    }
    rows
}

pub fn walk_rows(report: &WalkReport) -> Vec<PlotRow> {
    let mut rows = Vec::new();
    for p in &report.mahler {
        rows.push(PlotRow {
            series: "fraction_mahler_positive".into(),
            x: p.n as f64,
            y: p.fraction_positive,
            stderr: Some(p.stderr),
        });
    }
    for s in &report.lyapunov {
        for p in &s.points {
            rows.push(PlotRow {
                series: format!("lyapunov_q{}", s.q),
                x: p.n as f64,
                y: p.mean,
                stderr: (p.count > 0).then(|| (p.variance / p.count as f64).sqrt()),
            });
        }
    }
    for s in &report.hyperplane {
        for (k, delta) in s.deltas.iter().enumerate() {
            for p in &s.points {
                let f = p.fractions[k];
                rows.push(PlotRow {
                    series: format!("hyperplane_q{}_delta{delta:e}", s.q),
                    x: p.n as f64,
                    y: f,
                    stderr: (p.count > 0).then(|| (f * (1.0 - f) / p.count as f64).sqrt()),
                });
            }
        }
    }
    rows
}

/// CSV text with header `series,x,y,stderr`; header only for no rows.
pub fn emit_plot_data(rows: &[PlotRow]) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["series", "x", "y", "stderr"])?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
