//! CSV tables and matplotlib plot scripts.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Shortest representation that parses back to the same double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// A header plus string rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }
}

/// What a plot script should draw.
#[derive(Debug, Clone, PartialEq)]
pub enum PlotKind {
    /// Columns after `t` against time.
    Trajectory,
    /// `error` against `h` on log-log axes with a dotted reference line of
    /// the given order.
    Order { x: String, reference_order: f64 },
    /// `energy_error` against `t`.
    Energy,
    /// `error` against `wall_time`, one series per `method`.
    WorkPrecision,
}

/// `run.csv` -> `run_plot.py`.
pub fn plot_script_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    csv.with_file_name(format!("{stem}_plot.py"))
}

pub fn plot_script(csv: &Path, kind: &PlotKind, title: &str) -> String {
    let name = csv.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let image = format!(
        "{}.png",
        csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    );
    let body = match kind {
        PlotKind::Trajectory => "\
for key in cols:
    if key != 't':
        plt.plot(cols['t'], cols[key], label=key)
plt.xlabel('t')
plt.legend()
"
        .to_string(),
        PlotKind::Order { x, reference_order } => format!(
            "\
x = cols['{x}']
y = cols['error']
plt.loglog(x, y, 'o-', label='error')
ref = [y[-1] * (xi / x[-1]) ** {reference_order} for xi in x]
plt.loglog(x, ref, 'k:', label='order {reference_order}')
plt.xlabel('{x}')
plt.ylabel('error')
plt.legend()
"
        ),
        PlotKind::Energy => "\
plt.plot(cols['t'], cols['energy_error'])
plt.xlabel('t')
plt.ylabel('H(t) - H(0)')
"
        .to_string(),
        PlotKind::WorkPrecision => "\
for method in dict.fromkeys(text['method']):
    idx = [i for i, m in enumerate(text['method']) if m == method]
    plt.loglog([cols['error'][i] for i in idx], [cols['wall_time'][i] for i in idx], 'o-', label=method)
plt.xlabel('global error')
plt.ylabel('wall time [s]')
plt.legend()
"
        .to_string(),
    };
    format!(
        "\
import csv
import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, '{name}'), newline='') as f:
    rows = list(csv.DictReader(f))
text = {{k: [r[k] for r in rows] for k in rows[0]}}
cols = {{}}
for k, v in text.items():
    try:
        cols[k] = [float(x) for x in v]
    except ValueError:
        pass

plt.figure(figsize=(6, 4.5))
{body}plt.title({title:?})
plt.tight_layout()
plt.savefig(os.path.join(here, '{image}'), dpi=150)
"
    )
}

pub fn write_plot_script(csv: &Path, kind: &PlotKind, title: &str) -> Result<PathBuf> {
    let path = plot_script_path(csv);
    std::fs::write(&path, plot_script(csv, kind, title))?;
    Ok(path)
}
