//! CSV, JSON and SVG artifacts. Numbers use Rust's shortest round-trip
//! formatting (`{:?}`, which switches to exponent form for tiny and huge
//! values), so output never depends on the locale.

use std::fmt::Write as _;

use serde_json::json;

use crate::run::{RunResult, SweepRow};

pub const TRAJECTORY_HEADER: &str = "t,c,E,V";

pub const SUMMARY_HEADER: &str =
    "name,alpha,synchronized,e_initial,e_final,c_final,t_final,time_to_sync,c_plateau_delta,plateaued,c_ref,diverged_at";

pub const SWEEP_HEADER: &str = "name,alpha,synchronized,c_final,time_to_sync,e_final,error";

pub fn trajectory_csv(run: &RunResult) -> String {
    let t = &run.trajectory;
    let v = t.v_series.as_deref().unwrap_or(&[]);
    let mut out = String::with_capacity(32 * t.len());
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for k in 0..t.len() {
        let vk = v.get(k).copied().unwrap_or(f64::NAN);
        writeln!(out, "{:?},{:?},{:?},{:?}", t.times[k], t.c_series[k], t.e_series[k], vk).unwrap();
    }
    out
}

// Names are user-chosen; keep the CSV parseable.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn summary_row(run: &RunResult) -> String {
    let r = &run.report;
    format!(
        "{},{:?},{},{:?},{:?},{:?},{:?},{:?},{:?},{},{:?},{}",
        csv_field(&run.name),
        run.alpha,
        run.synchronized(),
        r.e_initial,
        r.e_final,
        r.c_final,
        r.t_final,
        r.time_to_sync,
        r.c_plateau_delta,
        r.plateaued,
        run.c_ref,
        opt(run.diverged_at),
    )
}

pub fn summary_csv(runs: &[&RunResult]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for run in runs {
        out.push_str(&summary_row(run));
        out.push('\n');
    }
    out
}

/// JSON has no infinity: `time_to_sync` is `null` when the run never settled.
pub fn summary_json(run: &RunResult) -> serde_json::Value {
    let r = &run.report;
    let finite = |v: f64| if v.is_finite() { json!(v) } else { serde_json::Value::Null };
    json!({
        "name": run.name,
        "alpha": run.alpha,
        "synchronized": run.synchronized(),
        "e_initial": finite(r.e_initial),
        "e_final": finite(r.e_final),
        "c_final": finite(r.c_final),
        "t_final": r.t_final,
        "time_to_sync": finite(r.time_to_sync),
        "c_plateau_delta": finite(r.c_plateau_delta),
        "plateaued": r.plateaued,
        "c_ref": finite(run.c_ref),
        "diverged_at": run.diverged_at,
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for row in rows {
        let name = csv_field(&row.name);
        match &row.outcome {
            Ok(run) => {
                let r = &run.report;
                writeln!(
                    out,
                    "{name},{:?},{},{:?},{:?},{:?},{}",
                    row.alpha,
                    run.synchronized(),
                    r.c_final,
                    r.time_to_sync,
                    r.e_final,
                    run.diverged_at.map(|t| csv_field(&format!("diverged after t = {t}"))).unwrap_or_default(),
                )
                .unwrap();
            }
            Err(e) => writeln!(out, "{name},{:?},false,,,,{}", row.alpha, csv_field(e)).unwrap(),
        }
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const WIDTH: f64 = 640.0;
const PANEL: f64 = 220.0;
const MARGIN: f64 = 60.0;

fn panel(out: &mut String, top: f64, label: &str, t: &[f64], y: &[f64]) {
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let finite = y.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let tspan = if t1 > t0 { t1 - t0 } else { 1.0 };
    let w = WIDTH - 2.0 * MARGIN;
    let px = |v: f64| MARGIN + (v - t0) / tspan * w;
    let py = |v: f64| top + PANEL - (v - lo) / span * PANEL;

    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{top}" width="{w}" height="{PANEL}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(out, r#"<text x="{}" y="{}" font-size="14">{label}</text>"#, MARGIN, top - 6.0).unwrap();
    for (v, y) in [(hi, top + 4.0), (lo, top + PANEL)] {
        writeln!(out, r#"<text x="{}" y="{y}" font-size="10" text-anchor="end">{v:.4}</text>"#, MARGIN - 4.0)
            .unwrap();
    }
    for (v, anchor) in [(t0, "start"), (t1, "end")] {
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="{anchor}">{v}</text>"#,
            px(v),
            top + PANEL + 14.0
        )
        .unwrap();
    }
    out.push_str(r#"<polyline fill="none" stroke="steelblue" stroke-width="1.2" points=""#);
    for (tk, yk) in t.iter().zip(y).filter(|(_, v)| v.is_finite()) {
        write!(out, "{:.2},{:.2} ", px(*tk), py(*yk)).unwrap();
    }
    out.push_str("\"/>\n");
}

/// Two stacked panels: `c(t)` above `E(t)`.
pub fn trajectory_svg(run: &RunResult) -> String {
    let t = &run.trajectory;
    let height = 2.0 * PANEL + 3.0 * MARGIN;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" font-family=\"sans-serif\">\n"
    );
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    if !t.is_empty() {
        panel(&mut out, MARGIN, &format!("{}: c(t)", xml_escape(&run.name)), &t.times, &t.c_series);
        panel(&mut out, 2.0 * MARGIN + PANEL, "E(t)", &t.times, &t.e_series);
    }
    out.push_str("</svg>\n");
    out
}
