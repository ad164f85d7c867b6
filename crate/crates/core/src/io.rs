//! CSV tables, JSON documents and minimal SVG line charts.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::network::OutcomeDistribution;
use crate::purity::{PurityProfile, SubsetMask, SubsetPurityMap};
use crate::variance::VarianceReport;

/// A rectangular table with a single header row.
///
/// Numbers are stored in their shortest round-trip form, missing values as
/// empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(invalid(format!("row has {} cells, table has {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Appends a row of numbers; `NaN` becomes an empty cell.
    pub fn push_numbers(&mut self, row: &[f64]) -> Result<()> {
        self.push_row(row.iter().map(|&v| format_number(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// A column parsed as numbers, empty cells as `NaN`.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name).ok_or_else(|| invalid(format!("no column {name:?}")))?;
        self.rows
            .iter()
            .map(|r| {
                let cell = r[idx].trim();
                if cell.is_empty() {
                    Ok(f64::NAN)
                } else {
                    cell.parse::<f64>().map_err(|_| invalid(format!("column {name:?}: {cell:?} is not a number")))
                }
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| invalid(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let columns = r.headers()?.iter().map(str::to_owned).collect();
        let mut table = Self { columns, rows: Vec::new() };
        for rec in r.records() {
            table.push_row(rec?.iter().map(str::to_owned).collect())?;
        }
        Ok(table)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// `k,avpur`
pub fn profile_table(profile: &PurityProfile) -> Table {
    let mut t = Table::new(["k", "avpur"]);
    for (k, v) in profile.values().iter().enumerate() {
        t.rows.push(vec![k.to_string(), format_number(*v)]);
    }
    t
}

/// `mask,size,purity`, masks written as column sets like `{1,3}`.
pub fn subset_table(map: &SubsetPurityMap) -> Result<Table> {
    let n = map.n();
    let mut t = Table::new(["mask", "size", "purity"]);
    for bits in 0..1u32 << n {
        let mask = SubsetMask::new(n, bits)?;
        t.rows.push(vec![mask.to_string(), mask.len().to_string(), format_number(map.values()[bits as usize])]);
    }
    Ok(t)
}

/// `j,P` for count distributions, `pattern,P` (bitstrings, column 1 first)
/// for sign patterns, `index,P` otherwise.
pub fn distribution_table(dist: &OutcomeDistribution) -> Table {
    use crate::network::OutcomeKind::*;
    let n = dist.n();
    let key = match dist.kind() {
        SinglesCount | PairCount | AtomCount => "j",
        SignPattern => "pattern",
        PositionMultiset => "index",
    };
    let mut t = Table::new([key, "P"]);
    for (i, p) in dist.probs().iter().enumerate() {
        let label = if dist.kind() == SignPattern { format!("{i:0n$b}") } else { i.to_string() };
        t.rows.push(vec![label, format_number(*p)]);
    }
    t
}

/// `row,c0,c1,...`
pub fn matrix_table(m: &DMatrix<f64>) -> Table {
    let mut t = Table::new(std::iter::once("row".to_string()).chain((0..m.ncols()).map(|c| format!("c{c}"))));
    for r in 0..m.nrows() {
        let mut row = vec![r.to_string()];
        row.extend(m.row(r).iter().map(|&v| format_number(v)));
        t.rows.push(row);
    }
    t
}

/// `k,V,bound,method,n,p,q` (plus `subset,sigma` when any report carries them).
pub fn variance_table(reports: &[VarianceReport]) -> Table {
    let spatial = reports.iter().any(|r| r.subset.is_some());
    let mut cols = vec!["k", "V", "bound", "method", "n", "p", "q"];
    if spatial {
        cols.extend(["subset", "sigma"]);
    }
    let mut t = Table::new(cols);
    for r in reports {
        let mut row = vec![
            r.k.to_string(),
            format_number(r.v),
            r.bound.map(format_number).unwrap_or_default(),
            r.method.clone(),
            r.n.to_string(),
            format_number(r.p),
            format_number(r.q),
        ];
        if spatial {
            let subset = r.subset.and_then(|b| SubsetMask::new(r.n, b).ok()).map(|m| m.to_string()).unwrap_or_default();
            row.extend([subset, format_number(r.sigma)]);
        }
        t.rows.push(row);
    }
    t
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// svg

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Line chart of every numeric column against the first one. The y axis is
/// logarithmic when all values are positive and span more than three decades.
pub fn render_svg(table: &Table, title: &str) -> Result<String> {
    let (w, h, margin) = (640.0, 420.0, 56.0);
    let x = table.numeric_column(&table.columns[0])?;
    let mut curves = Vec::new();
    for name in &table.columns[1..] {
        if let Ok(ys) = table.numeric_column(name) {
            curves.push((name.clone(), ys));
        }
    }
    let finite = |v: &f64| v.is_finite();
    let ys_all: Vec<f64> = curves.iter().flat_map(|(_, ys)| ys.iter().copied()).filter(finite).collect();
    let xs: Vec<f64> = x.iter().copied().filter(finite).collect();
    if xs.is_empty() || ys_all.is_empty() {
        return Err(invalid("nothing to plot"));
    }
    let (ymin, ymax) = ys_all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let log_y = ymin > 0.0 && ymax / ymin > 1e3;
    let tf = |v: f64| if log_y { v.log10() } else { v };
    let (ylo, yhi) = if (tf(ymax) - tf(ymin)).abs() < 1e-300 { (tf(ymin) - 0.5, tf(ymax) + 0.5) } else { (tf(ymin), tf(ymax)) };
    let (xlo, xhi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let xspan = if xhi > xlo { xhi - xlo } else { 1.0 };
    let px = |v: f64| margin + (v - xlo) / xspan * (w - 2.0 * margin);
    let py = |v: f64| h - margin - (tf(v) - ylo) / (yhi - ylo) * (h - 2.0 * margin);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = margin,
        b = h - margin,
        r = w - margin
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 16.0, escape(&table.columns[0]));
    let fmt_y = |t: f64| if log_y { format!("1e{t:.1}") } else { format!("{t:.3}") };
    let _ = writeln!(s, r#"<text x="4" y="{}">{}</text>"#, margin, fmt_y(yhi));
    let _ = writeln!(s, r#"<text x="4" y="{}">{}</text>"#, h - margin, fmt_y(ylo));
    let _ = writeln!(s, r#"<text x="{}" y="{}">{:.3}</text>"#, margin, h - margin + 16.0, xlo);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, w - margin, h - margin + 16.0, xhi);
    for (i, (name, ys)) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = x
            .iter()
            .zip(ys)
            .filter(|(a, b)| a.is_finite() && b.is_finite() && (!log_y || **b > 0.0))
            .map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
            w - margin + 4.0,
            margin + 14.0 * i as f64,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
