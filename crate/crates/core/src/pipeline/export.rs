//! Chart export as JSON, TSV and SVG.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::Chart;
use crate::novikov_ss::{Session, SsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Json,
    Tsv,
    Svg,
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::Json => "json",
            ExportFormat::Tsv => "tsv",
            ExportFormat::Svg => "svg",
        }
    }

    pub fn mime(&self) -> &'static str {
        match self {
            ExportFormat::Json => "application/json",
            ExportFormat::Tsv => "text/tab-separated-values",
            ExportFormat::Svg => "image/svg+xml",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum ExportError {
    #[error("unsupported format {format:?} (expected json, tsv or svg)")]
    UnsupportedFormat { format: String },
    #[error(transparent)]
    Session(#[from] SsError),
}

impl FromStr for ExportFormat {
    type Err = ExportError;
    fn from_str(s: &str) -> Result<ExportFormat, ExportError> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ExportFormat::Json),
            "tsv" => Ok(ExportFormat::Tsv),
            "svg" => Ok(ExportFormat::Svg),
            _ => Err(ExportError::UnsupportedFormat { format: s.to_string() }),
        }
    }
}

/// Page `r` of a session (its last page when `r` is `None`) in the given format.
pub fn export_chart(session: &Session, r: Option<u32>, format: &str) -> Result<String, ExportError> {
    let format: ExportFormat = format.parse()?;
    let chart = session.chart(r.unwrap_or_else(|| session.last_page()))?;
    Ok(render_chart(&chart, format))
}

pub fn render_chart(chart: &Chart, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => chart.to_json(),
        ExportFormat::Tsv => chart_tsv(chart),
        ExportFormat::Svg => chart_svg(chart),
    }
}

/// One `(s, t, w, dim)` row per node; `w` is blank for Ext charts.
pub fn chart_tsv(chart: &Chart) -> String {
    let mut out = String::from("s\tt\tw\tdim\n");
    for n in &chart.nodes {
        let w = n.w.map(|w| w.to_string()).unwrap_or_default();
        writeln!(out, "{}\t{}\t{w}\t{}", n.s, n.t, n.dim).unwrap();
    }
    out
}

const CELL: i64 = 40;
const MARGIN: i64 = 48;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Stem `t - s` across, filtration `s` up. Nodes sharing a lattice point
/// (different weights) are spread horizontally; color encodes the weight.
pub fn chart_svg(chart: &Chart) -> String {
    let stem = |s: u32, t: u32| t as i64 - s as i64;
    let max_stem = chart.nodes.iter().map(|n| stem(n.s, n.t)).max().unwrap_or(0).max(1);
    let min_stem = chart.nodes.iter().map(|n| stem(n.s, n.t)).min().unwrap_or(0).min(0);
    let max_s = chart.nodes.iter().map(|n| n.s as i64).max().unwrap_or(0).max(1);
    let width = (max_stem - min_stem) * CELL + 2 * MARGIN;
    let height = max_s * CELL + 2 * MARGIN;
    let x = |st: i64| MARGIN + (st - min_stem) * CELL;
    let y = |s: i64| height - MARGIN - s * CELL;

    // position of each (s, t, w) within its lattice point
    let mut at: BTreeMap<(u32, u32), Vec<Option<u32>>> = BTreeMap::new();
    for n in &chart.nodes {
        at.entry((n.s, n.t)).or_default().push(n.w);
    }
    let pos = |s: u32, t: u32, w: Option<u32>| -> (i64, i64) {
        let (cx, cy) = (x(stem(s, t)), y(s as i64));
        match at.get(&(s, t)) {
            Some(ws) if ws.len() > 1 => {
                let i = ws.iter().position(|v| *v == w).unwrap_or(0) as i64;
                let k = ws.len() as i64;
                (cx + (2 * i - (k - 1)) * 6, cy)
            }
            _ => (cx, cy),
        }
    };

    let mut out = String::new();
    writeln!(out, r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"##).unwrap();
    let page = chart.page.map(|r| format!(" E_{r}")).unwrap_or_default();
    writeln!(out, "<title>{}{page}</title>", escape(&chart.title)).unwrap();
    writeln!(out, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##).unwrap();
    writeln!(out, r##"<g class="axes" stroke="#999999" stroke-width="1" font-size="10" font-family="sans-serif">"##).unwrap();
    writeln!(out, r##"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"##, x(min_stem) - CELL / 2, y(0) + CELL / 2, x(max_stem) + CELL / 2, y(0) + CELL / 2).unwrap();
    writeln!(out, r##"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"##, x(min_stem) - CELL / 2, y(0) + CELL / 2, x(min_stem) - CELL / 2, y(max_s) - CELL / 2).unwrap();
    for st in min_stem..=max_stem {
        writeln!(out, r##"<text x="{}" y="{}" text-anchor="middle" stroke="none" fill="#333333">{st}</text>"##, x(st), y(0) + CELL / 2 + 14).unwrap();
    }
    for s in 0..=max_s {
        writeln!(out, r##"<text x="{}" y="{}" text-anchor="end" stroke="none" fill="#333333">{s}</text>"##, x(min_stem) - CELL / 2 - 6, y(s) + 4).unwrap();
    }
    writeln!(out, "</g>").unwrap();

    writeln!(out, r##"<g class="edges" stroke="#444444" stroke-width="1.2">"##).unwrap();
    for e in &chart.edges {
        let (x1, y1) = pos(e.source.s, e.source.t, e.source.w);
        for tgt in &e.target {
            let (x2, y2) = pos(tgt.s, tgt.t, tgt.w);
            writeln!(
                out,
                r##"<line class="d{}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" data-r="{}" data-provenance="{}"><title>{}</title></line>"##,
                e.r,
                e.r,
                escape(&e.provenance),
                escape(&format!("d_{}({}) = {}", e.r, e.source.label, tgt.label)),
            )
            .unwrap();
        }
    }
    writeln!(out, "</g>").unwrap();

    writeln!(out, r##"<g class="dots" stroke="none">"##).unwrap();
    for n in &chart.nodes {
        let (cx, cy) = pos(n.s, n.t, n.w);
        let color = PALETTE[n.w.unwrap_or(0) as usize % PALETTE.len()];
        let w = n.w.map(|w| w.to_string()).unwrap_or_default();
        write!(
            out,
            r##"<circle cx="{cx}" cy="{cy}" r="4" fill="{color}" data-stem="{}" data-filtration="{}" data-s="{}" data-t="{}" data-w="{w}" data-dim="{}">"##,
            stem(n.s, n.t),
            n.s,
            n.s,
            n.t,
            n.dim
        )
        .unwrap();
        writeln!(out, "<title>{}</title></circle>", escape(&format!("({}, {}) {} [{}]", n.s, n.t, n.labels.join(", "), n.provenance.join(", ")))).unwrap();
        if n.dim > 1 {
            writeln!(out, r##"<text x="{}" y="{}" font-size="8" font-family="sans-serif" fill="#000000">{}</text>"##, cx + 5, cy - 5, n.dim).unwrap();
        }
    }
    writeln!(out, "</g>").unwrap();
    out.push_str("</svg>\n");
    out
}
