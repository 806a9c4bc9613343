//! Self-contained SVG Gantt chart of an evaluated solution.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::model::Instance;
use crate::schedule::{Schedule, Solution};

const ROW_H: f64 = 34.0;
const BAR_H: f64 = 22.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 20.0;
const WIDTH: f64 = 900.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One row for the truck, then one per drone that flies at least once.
pub fn gantt_svg(inst: &Instance, sol: &Solution, schedule: &Schedule) -> String {
    let mut drones: Vec<usize> = sol.operations.iter().map(|o| o.drone).collect();
    drones.sort_unstable();
    drones.dedup();
    let rows = 1 + drones.len();
    let horizon = schedule.completion_time.max(1e-9);
    let scale = (WIDTH - LEFT - 20.0) / horizon;
    let x = |t: f64| LEFT + t * scale;
    let axis_y = TOP + rows as f64 * ROW_H + 6.0;
    let height = axis_y + 40.0;

    let mut ticks: BTreeSet<i64> = BTreeSet::new();
    let key = |t: f64| (t * 100.0).round() as i64;
    ticks.insert(0);
    ticks.insert(key(schedule.completion_time));

    let mut body = String::new();
    for r in 0..rows {
        let y = TOP + r as f64 * ROW_H;
        let name = if r == 0 { "truck".to_string() } else { format!("drone {}", drones[r - 1]) };
        let _ = writeln!(
            body,
            r#"<text class="row" x="4" y="{:.1}">{}</text>"#,
            y + BAR_H * 0.7,
            esc(&name)
        );
    }
    for (t, &(i, j)) in sol.route.iter().enumerate() {
        let dep = schedule.departure_times[t];
        let arr = dep + inst.truck(i, j);
        let wait = schedule.waits[t];
        if i != j && arr > dep {
            let label = format!("{}{}", inst.label(i), inst.label(j));
            bar(&mut body, x(dep), x(arr), TOP, "move", &label);
            ticks.insert(key(dep));
            ticks.insert(key(arr));
        }
        if wait > 0.0 {
            bar(&mut body, x(arr), x(arr + wait), TOP, "wait", "wait");
            ticks.insert(key(arr + wait));
        }
    }
    for op in &sol.operations {
        let r = 1 + drones.iter().position(|&d| d == op.drone).unwrap();
        let y = TOP + r as f64 * ROW_H;
        let start = schedule.launch_time(op);
        let end = start + op.sortie.duration(inst);
        bar(&mut body, x(start), x(end), y, "flight", &op.sortie.display(inst));
        ticks.insert(key(start));
        ticks.insert(key(end));
    }
    let _ = writeln!(
        body,
        r#"<line class="axis" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/>"#,
        x(0.0),
        axis_y,
        x(horizon),
        axis_y
    );
    for (n, &k) in ticks.iter().enumerate() {
        let t = k as f64 / 100.0;
        let ty = axis_y + 14.0 + (n % 2) as f64 * 12.0;
        let _ = writeln!(
            body,
            r#"<line class="tick" x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}"/><text class="tick" x="{0:.1}" y="{3:.1}">{4:.2}</text>"#,
            x(t),
            TOP,
            axis_y + 3.0,
            ty,
            t
        );
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" data-rows="{rows}" data-completion="{:.2}">"#,
        schedule.completion_time
    );
    svg.push_str(
        "<style>text{font-family:sans-serif;font-size:11px}text.tick{font-size:9px;text-anchor:middle}\
         text.bar{text-anchor:middle;fill:#fff}rect.move{fill:#c0392b}rect.wait{fill:#999}\
         rect.flight{fill:#2c6fbb}line.axis{stroke:#000}line.tick{stroke:#ccc;stroke-dasharray:2 2}</style>\n",
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n");
    svg.push_str(&body);
    svg.push_str("</svg>\n");
    svg
}

fn bar(out: &mut String, x0: f64, x1: f64, y: f64, class: &str, label: &str) {
    let _ = writeln!(
        out,
        r#"<rect class="{class}" x="{x0:.1}" y="{y:.1}" width="{:.1}" height="{BAR_H:.1}"><title>{}</title></rect><text class="bar" x="{:.1}" y="{:.1}">{}</text>"#,
        (x1 - x0).max(0.5),
        esc(label),
        (x0 + x1) / 2.0,
        y + BAR_H * 0.7,
        esc(label)
    );
}
