//! UF table emission: CSV and an SVG force-arrow diagram.
//!
//! CSV layout, fixed:
//!
//! ```text
//! action_id,participant_id,tev_u,crash_force_n,uf_un,tuf_un,chosen
//! ```
//!
//! One row per candidate, in candidate order. Per-participant columns list
//! the participants in order, joined by `;`. Numbers use Rust's shortest
//! round-trip `f64` formatting (`3500`, `0.2`, `1e-7`). `chosen` is `true` on
//! exactly one row.

use std::fmt::Write as _;

use crate::run::DecisionReport;

pub const UF_TABLE_HEADER: [&str; 7] = [
    "action_id",
    "participant_id",
    "tev_u",
    "crash_force_n",
    "uf_un",
    "tuf_un",
    "chosen",
];

fn num(x: f64) -> String {
    format!("{x}")
}

fn joined(values: impl Iterator<Item = String>) -> String {
    values.collect::<Vec<_>>().join(";")
}

pub fn emit_uf_table(report: &DecisionReport) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(UF_TABLE_HEADER).expect("in-memory write");
    for (i, row) in report.judgment.tuf_table.iter().enumerate() {
        let p = &row.participants;
        w.write_record([
            row.action_id.clone(),
            joined(p.iter().map(|x| x.entity.clone())),
            joined(p.iter().map(|x| num(x.tev_u))),
            joined(p.iter().map(|x| num(x.crash_force_n))),
            joined(p.iter().map(|x| num(x.uf_un))),
            num(row.tuf_un),
            (i == report.judgment.chosen).to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

const WIDTH: f64 = 720.0;
const BAND: f64 = 60.0;
const ARROW_MAX: f64 = 420.0;
const LEFT: f64 = 200.0;

/// One band per candidate; each participant is an arrow whose length is its
/// UF relative to the largest UF in the table.
pub fn emit_svg(report: &DecisionReport) -> String {
    let table = &report.judgment.tuf_table;
    let max_uf = table
        .iter()
        .flat_map(|r| r.participants.iter().map(|p| p.uf_un.abs()))
        .fold(0.0_f64, f64::max);
    let bands: usize = table.iter().map(|r| r.participants.len() + 1).sum();
    let height = 40.0 + bands as f64 * BAND / 2.0 + 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="monospace" font-size="12">"#
    );
    s.push_str(
        r#"<defs><marker id="head" markerWidth="8" markerHeight="8" refX="8" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z"/></marker></defs>"#,
    );
    s.push('\n');
    let _ = writeln!(
        s,
        r#"<text x="10" y="20">{} (rulebase v{})</text>"#,
        escape(&report.scenario),
        report.rulebase_version
    );
    let mut y = 40.0;
    for (i, row) in table.iter().enumerate() {
        let chosen = i == report.judgment.chosen;
        let weight = if chosen { "bold" } else { "normal" };
        let _ = writeln!(
            s,
            r#"<text x="10" y="{}" font-weight="{weight}">{} TUF={} uN{}</text>"#,
            y + 14.0,
            escape(&row.action_id),
            num(row.tuf_un),
            if chosen { " (chosen)" } else { "" }
        );
        y += BAND / 2.0;
        for p in &row.participants {
            let len = if max_uf > 0.0 {
                p.uf_un.abs() / max_uf * ARROW_MAX
            } else {
                0.0
            };
            let mid = y + 10.0;
            let _ = writeln!(
                s,
                r#"<text x="30" y="{}">{}</text>"#,
                mid + 4.0,
                escape(&p.entity)
            );
            let colour = if chosen { "#1a7f37" } else { "#b42318" };
            let _ = writeln!(
                s,
                r#"<line x1="{LEFT}" y1="{mid}" x2="{}" y2="{mid}" stroke="{colour}" stroke-width="3" marker-end="url(#head)"/>"#,
                LEFT + len
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{} uN</text>"#,
                LEFT + len + 12.0,
                mid + 4.0,
                num(p.uf_un)
            );
            y += BAND / 2.0;
        }
    }
    s.push_str("</svg>\n");
    s
}
