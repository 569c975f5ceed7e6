//! SVG Gantt chart of a trace: one lane per machine, one rectangle per run
//! interval, and a marker for every stack event tied to a machine.

use std::fmt::Write;

use crate::job::{JobId, Time};
use crate::trace::{EventKind, Trace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GanttStyle {
    /// Pixels per internal tick.
    pub px_per_tick: f64,
    pub lane_height: f64,
    pub margin_left: f64,
    pub margin_top: f64,
}

impl Default for GanttStyle {
    fn default() -> Self {
        GanttStyle {
            px_per_tick: 8.0,
            lane_height: 24.0,
            margin_left: 48.0,
            margin_top: 20.0,
        }
    }
}

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f",
    "#bab0ac",
];

fn color(job: JobId) -> &'static str {
    PALETTE[job % PALETTE.len()]
}

fn marker(kind: EventKind) -> Option<(&'static str, &'static str)> {
    match kind {
        EventKind::Push => Some(("push", "#2ca02c")),
        EventKind::Replace => Some(("replace", "#d62728")),
        EventKind::CompletionPop => Some(("completion-pop", "#1f77b4")),
        EventKind::InfeasiblePop => Some(("infeasible-pop", "#7f7f7f")),
        _ => None,
    }
}

pub fn render_svg(trace: &Trace, style: &GanttStyle) -> String {
    let m = trace.header.machines;
    let end: Time = trace
        .intervals
        .iter()
        .map(|iv| iv.end)
        .chain(trace.events.iter().map(|e| e.time))
        .max()
        .unwrap_or(0);
    let x = |t: Time| style.margin_left + t as f64 * style.px_per_tick;
    let lane_y = |machine: usize| style.margin_top + machine as f64 * style.lane_height;
    let width = x(end) + 20.0;
    let height = lane_y(m) + 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(
        s,
        r#"<title>{} on {} machines (tick scale {})</title>"#,
        escape(&trace.header.policy),
        m,
        trace.header.tick_scale
    );
    s.push_str("<g class=\"lanes\">\n");
    for machine in 0..m {
        let y = lane_y(machine);
        let _ = writeln!(
            s,
            r##"<rect class="lane" x="{:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}" stroke="#dddddd"/>"##,
            style.margin_left,
            (width - 20.0 - style.margin_left).max(0.0),
            style.lane_height,
            if machine % 2 == 0 { "#fafafa" } else { "#f0f0f0" }
        );
        let _ = writeln!(
            s,
            r#"<text x="4" y="{:.1}" font-size="11">M{machine}</text>"#,
            y + style.lane_height * 0.65
        );
    }
    s.push_str("</g>\n<g class=\"intervals\">\n");
    for iv in &trace.intervals {
        let _ = writeln!(
            s,
            r#"<rect class="run" data-job="{}" x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>job {} [{}, {})</title></rect>"#,
            iv.job,
            x(iv.start),
            lane_y(iv.machine) + 2.0,
            (iv.end - iv.start) as f64 * style.px_per_tick,
            style.lane_height - 4.0,
            color(iv.job),
            iv.job,
            iv.start,
            iv.end
        );
    }
    s.push_str("</g>\n<g class=\"markers\">\n");
    for ev in &trace.events {
        let (Some((name, fill)), Some(machine)) = (marker(ev.kind), ev.machine) else {
            continue;
        };
        if machine >= m {
            continue;
        }
        let cx = x(ev.time);
        let y = lane_y(machine);
        let _ = writeln!(
            s,
            r#"<path class="{name}" d="M{:.1},{:.1} l4,-6 l-8,0 z" fill="{fill}"><title>{name} job {} at {}</title></path>"#,
            cx,
            y + 6.0,
            ev.job,
            ev.time
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
