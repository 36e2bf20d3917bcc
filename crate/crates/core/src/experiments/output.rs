use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;

use super::config::Scheme;
use super::sweep::{MetricRow, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Users,
    Probability,
}

impl SweepKind {
    fn column(self) -> &'static str {
        match self {
            SweepKind::Users => "n",
            SweepKind::Probability => "p_low",
        }
    }

    fn x(self, row: &SweepRow) -> f64 {
        match self {
            SweepKind::Users => row.n.unwrap_or(0) as f64,
            SweepKind::Probability => row.p_low.unwrap_or(f64::NAN),
        }
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], kind: SweepKind, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        kind.column(),
        "scheme",
        "V0",
        "thr_low",
        "thr_high",
        "delay_low",
        "delay_high",
        "stable",
        "ic",
    ])?;
    for r in rows {
        let x = match kind {
            SweepKind::Users => opt(r.n),
            SweepKind::Probability => opt(r.p_low),
        };
        w.write_record([
            x,
            r.scheme.name().to_string(),
            r.v0.to_string(),
            r.thr_low.to_string(),
            r.thr_high.to_string(),
            opt(r.delay_low),
            opt(r.delay_high),
            r.stable.to_string(),
            opt(r.ic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics_csv<W: Write>(rows: &[MetricRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "scheme", "type", "throughput", "delay", "stable"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.scheme.name().to_string(),
            r.type_value.to_string(),
            r.throughput.to_string(),
            opt(r.delay),
            r.stable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: serde::Serialize>(rows: &[T], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line chart of `V0` against the sweep variable, one line per scheme.
pub fn plot_svg(rows: &[SweepRow], kind: SweepKind) -> String {
    let (w, h, margin) = (720.0, 440.0, 60.0);
    let mut lines: BTreeMap<Scheme, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        lines.entry(r.scheme).or_default().push((kind.x(r), r.v0));
    }
    let xs = || rows.iter().map(|r| kind.x(r));
    let (x0, x1) = (xs().fold(f64::INFINITY, f64::min), xs().fold(f64::NEG_INFINITY, f64::max));
    let y1 = rows.iter().map(|r| r.v0).fold(0.0, f64::max).max(1e-12);
    let span = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| margin + (x - x0) / span * (w - 2.0 * margin);
    let py = |y: f64| h - margin - y / y1 * (h - 2.0 * margin);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {t} V{b} H{r}" stroke="black" fill="none"/>"#,
        m = margin,
        t = margin,
        b = h - margin,
        r = w - margin
    );
    for k in 0..=4 {
        let xv = x0 + span * k as f64 / 4.0;
        let yv = y1 * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, px(xv), h - margin + 18.0, xv);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, margin - 6.0, py(yv) + 4.0, yv);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, w / 2.0, h - 16.0, kind.column());
    let _ = writeln!(s, r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">V0</text>"#, h / 2.0, h / 2.0);
    for (idx, (scheme, pts)) in lines.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "));
        let ly = margin + 16.0 * idx as f64;
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, w - margin - 150.0, w - margin - 130.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, w - margin - 124.0, ly + 4.0, scheme.name());
    }
    s.push_str("</svg>\n");
    s
}
