//! SVG output: per-episode Gantt charts and makespan-vs-p curves.

use std::collections::HashMap;
use std::fmt::Write as _;

use isbjssp_core::sim::{EventKind, EventLog};
use isbjssp_core::NodeId;

use crate::report::Report;

const LEFT: f64 = 60.0;
const TOP: f64 = 30.0;
const RIGHT: f64 = 20.0;
const BOTTOM: f64 = 40.0;
const ROW_HEIGHT: f64 = 24.0;
const ROW_GAP: f64 = 6.0;
const GANTT_WIDTH: f64 = 900.0;
const CURVE_WIDTH: f64 = 640.0;
const CURVE_HEIGHT: f64 = 400.0;

/// Processing interval `[start, end)` of one operation on one machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GanttBar {
    pub machine: usize,
    pub op: NodeId,
    pub start: u64,
    pub end: u64,
}

/// Downtime `[start, end)` of a machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailureWindow {
    pub machine: usize,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GanttLayout {
    pub bars: Vec<GanttBar>,
    pub failures: Vec<FailureWindow>,
    pub num_machines: usize,
    pub horizon: u64,
}

/// Pairs starts with completions and failures with recoveries. A failure
/// still open at the end of the log is cut at the horizon.
pub fn gantt_layout(log: &EventLog) -> GanttLayout {
    let mut layout = GanttLayout::default();
    let mut open_ops: HashMap<NodeId, (usize, u64)> = HashMap::new();
    let mut open_failures: HashMap<usize, u64> = HashMap::new();
    for e in log.iter() {
        layout.num_machines = layout.num_machines.max(e.machine + 1);
        layout.horizon = layout.horizon.max(e.time);
        match (e.kind, e.op) {
            (EventKind::Start | EventKind::SwapStart, Some(op)) => {
                open_ops.insert(op, (e.machine, e.time));
            }
            (EventKind::Complete, Some(op)) => {
                if let Some((machine, start)) = open_ops.remove(&op) {
                    layout.bars.push(GanttBar { machine, op, start, end: e.time });
                }
            }
            (EventKind::Fail, _) => {
                open_failures.insert(e.machine, e.time);
            }
            (EventKind::Recover, _) => {
                if let Some(start) = open_failures.remove(&e.machine) {
                    layout.failures.push(FailureWindow { machine: e.machine, start, end: e.time });
                }
            }
            _ => {}
        }
    }
    let mut still_down: Vec<_> = open_failures.into_iter().collect();
    still_down.sort_unstable();
    for (machine, start) in still_down {
        layout.failures.push(FailureWindow { machine, start, end: layout.horizon });
    }
    layout.bars.sort_by_key(|b| (b.machine, b.start));
    layout
}

fn job_colour(job: usize) -> String {
    // golden-angle hue steps keep neighbouring jobs apart
    let hue = (job as f64 * 137.508) % 360.0;
    format!("hsl({hue:.1},65%,60%)")
}

pub fn gantt_svg(log: &EventLog, title: &str) -> String {
    let layout = gantt_layout(log);
    let horizon = layout.horizon.max(1) as f64;
    let scale = GANTT_WIDTH / horizon;
    let height = TOP + layout.num_machines as f64 * (ROW_HEIGHT + ROW_GAP) + BOTTOM;
    let width = LEFT + GANTT_WIDTH + RIGHT;
    let row_y = |m: usize| TOP + m as f64 * (ROW_HEIGHT + ROW_GAP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="monospace" font-size="10">"#
    );
    let _ = writeln!(svg, r#"<text x="{LEFT}" y="18" font-size="14">{}</text>"#, escape(title));
    for m in 0..layout.num_machines {
        let y = row_y(m) + ROW_HEIGHT / 2.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{y:.1}" text-anchor="end" dominant-baseline="middle">M{m}</text>"#,
            LEFT - 6.0
        );
    }
    for f in &layout.failures {
        let _ = writeln!(
            svg,
            r##"<rect class="failure" x="{:.2}" y="{:.2}" width="{:.2}" height="{ROW_HEIGHT}" fill="#bbbbbb" fill-opacity="0.6"><title>M{} down {}..{}</title></rect>"##,
            LEFT + f.start as f64 * scale,
            row_y(f.machine),
            (f.end - f.start) as f64 * scale,
            f.machine,
            f.start,
            f.end
        );
    }
    for b in &layout.bars {
        let _ = writeln!(
            svg,
            r#"<rect class="op" x="{:.2}" y="{:.2}" width="{:.2}" height="{ROW_HEIGHT}" fill="{}" stroke="black" stroke-width="0.5"><title>job {} op {} [{}, {})</title></rect>"#,
            LEFT + b.start as f64 * scale,
            row_y(b.machine),
            (b.end - b.start) as f64 * scale,
            job_colour(b.op.job),
            b.op.job,
            b.op.rank,
            b.start,
            b.end
        );
    }
    let axis_y = row_y(layout.num_machines) + 4.0;
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="black"/>"#,
        LEFT + GANTT_WIDTH
    );
    for tick in ticks(0.0, horizon, 10) {
        let x = LEFT + tick * scale;
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            axis_y + 14.0,
            tick_label(tick)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// `(p, total_mean, total_std)`.
pub type CurvePoint = (f64, f64, f64);

/// One curve per scheduler, sorted by `p`.
pub fn curve_points(report: &Report) -> Vec<(String, Vec<CurvePoint>)> {
    let mut curves: Vec<(String, Vec<CurvePoint>)> = Vec::new();
    for t in &report.totals {
        let point = (t.p_interrupt, t.total_mean, t.total_std);
        match curves.iter_mut().find(|(s, _)| *s == t.scheduler) {
            Some((_, pts)) => pts.push(point),
            None => curves.push((t.scheduler.clone(), vec![point])),
        }
    }
    for (_, pts) in &mut curves {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    curves
}

pub fn curves_svg(report: &Report, title: &str) -> String {
    let curves = curve_points(report);
    let all = curves.iter().flat_map(|(_, pts)| pts.iter());
    let (mut x_max, mut y_min, mut y_max) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for &(p, mean, std) in all {
        x_max = x_max.max(p);
        y_min = y_min.min(mean - std);
        y_max = y_max.max(mean + std);
    }
    if !y_min.is_finite() {
        (y_min, y_max) = (0.0, 1.0);
    }
    if x_max <= 0.0 {
        x_max = 1.0;
    }
    let pad = ((y_max - y_min) * 0.05).max(1.0);
    let (y_lo, y_hi) = (y_min - pad, y_max + pad);
    let px = |p: f64| LEFT + p / x_max * CURVE_WIDTH;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * CURVE_HEIGHT;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" font-family="monospace" font-size="10">"#,
        LEFT + CURVE_WIDTH + RIGHT + 80.0,
        TOP + CURVE_HEIGHT + BOTTOM
    );
    let _ = writeln!(svg, r#"<text x="{LEFT}" y="18" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(
        svg,
        r#"<path d="M{LEFT},{TOP} V{:.1} H{:.1}" fill="none" stroke="black"/>"#,
        TOP + CURVE_HEIGHT,
        LEFT + CURVE_WIDTH
    );
    for tick in ticks(y_lo, y_hi, 6) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            py(tick),
            tick_label(tick)
        );
    }
    for tick in ticks(0.0, x_max, 5) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(tick),
            TOP + CURVE_HEIGHT + 14.0,
            tick_label(tick)
        );
    }
    for (i, (scheduler, pts)) in curves.iter().enumerate() {
        let colour = job_colour(i);
        let path: Vec<String> = pts.iter().map(|&(p, mean, _)| format!("{:.2},{:.2}", px(p), py(mean))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="curve" data-scheduler="{}" points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            escape(scheduler),
            path.join(" ")
        );
        for &(p, mean, std) in pts {
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{colour}"/><circle cx="{x:.2}" cy="{:.2}" r="3" fill="{colour}" data-p="{p}" data-mean="{mean}" data-std="{std}"/>"#,
                py(mean - std),
                py(mean + std),
                py(mean),
                x = px(p)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" fill="{colour}">{}</text>"#,
            LEFT + CURVE_WIDTH + 8.0,
            TOP + 14.0 * (i + 1) as f64,
            escape(scheduler)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON);
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|k| k * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(value: f64) -> String {
    let text = format!("{value:.6}");
    text.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
