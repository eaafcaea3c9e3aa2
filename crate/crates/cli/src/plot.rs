//! Minimal self-contained SVG renderers for the CSV artifacts: trajectory
//! line plots and an error-map heat grid. Plots are post-processing only;
//! every numeric consumer reads the CSV files.

use std::fmt::Write as _;

use dtsim_core::trajectory::Trajectory;
use dtsim_core::tuning::ErrorCell;

const W: f64 = 900.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn axis_frame(svg: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        svg,
        r##"<rect width="{W}" height="{H}" fill="white"/>
<rect x="{MARGIN}" y="{MARGIN}" width="{iw}" height="{ih}" fill="none" stroke="#333"/>
<text x="{cx}" y="28" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>
<text x="{cx}" y="{by}" text-anchor="middle" font-family="sans-serif" font-size="12">{x_label}</text>
<text x="16" y="{cy}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {cy})">{y_label}</text>
"##,
        iw = W - 2.0 * MARGIN,
        ih = H - 2.0 * MARGIN,
        cx = W / 2.0,
        by = H - 16.0,
        cy = H / 2.0,
    );
}

fn color(i: usize) -> &'static str {
    const PALETTE: [&str; 10] = [
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
        "#bcbd22", "#17becf",
    ];
    PALETTE[i % PALETTE.len()]
}

/// Rotor-angle traces of every machine over time.
pub fn trajectory_svg(traj: &Trajectory, title: &str) -> String {
    let (t0, t1) = (traj.times[0], *traj.times.last().unwrap());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for ch in &traj.machines {
        for &d in &ch.delta {
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |t: f64| MARGIN + (t - t0) / (t1 - t0) * (W - 2.0 * MARGIN);
    let y = |v: f64| H - MARGIN - (v - lo) / (hi - lo) * (H - 2.0 * MARGIN);

    let mut svg = format!(r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">"##);
    axis_frame(&mut svg, title, "time (s)", "rotor angle (rad)");
    for (i, ch) in traj.machines.iter().enumerate() {
        let pts: Vec<String> = traj
            .times
            .iter()
            .zip(&ch.delta)
            .map(|(&t, &d)| format!("{:.2},{:.2}", x(t), y(d)))
            .collect();
        let _ = write!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"##,
            pts.join(" "),
            color(i)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Error-map heat grid: order on the y axis, window length on the x axis,
/// log10 of the max error as the fill.
pub fn heatmap_svg(cells: &[ErrorCell], title: &str) -> String {
    let mut orders: Vec<usize> = cells.iter().map(|c| c.order).collect();
    orders.sort_unstable();
    orders.dedup();
    let mut windows: Vec<f64> = cells.iter().map(|c| c.t_w).collect();
    windows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    windows.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let logs: Vec<f64> = cells
        .iter()
        .filter(|c| c.max_err.is_finite() && c.max_err > 0.0)
        .map(|c| c.max_err.log10())
        .collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min).min(-12.0);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(0.0);

    let cw = (W - 2.0 * MARGIN) / windows.len() as f64;
    let ch = (H - 2.0 * MARGIN) / orders.len() as f64;
    let mut svg = format!(r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">"##);
    axis_frame(&mut svg, title, "window length (s)", "series order K");
    for c in cells {
        let xi = windows
            .iter()
            .position(|&w| (w - c.t_w).abs() < 1e-12)
            .unwrap();
        let yi = orders.iter().position(|&k| k == c.order).unwrap();
        // bright red (large error) to dark blue (small); gray for divergence
        let fill = if !c.max_err.is_finite() {
            "#999999".to_string()
        } else {
            let f = ((c.max_err.max(1e-300).log10() - lo) / (hi - lo)).clamp(0.0, 1.0);
            format!(
                "rgb({},{},{})",
                (255.0 * f) as u8,
                40,
                (255.0 * (1.0 - f)) as u8
            )
        };
        let _ = write!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"##,
            MARGIN + xi as f64 * cw,
            H - MARGIN - (yi + 1) as f64 * ch,
            cw,
            ch,
        );
    }
    // tick labels
    for (xi, w) in windows.iter().enumerate() {
        let _ = write!(
            svg,
            r##"<text x="{:.1}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{w:.2}</text>"##,
            MARGIN + (xi as f64 + 0.5) * cw,
            H - MARGIN + 14.0,
        );
    }
    for (yi, k) in orders.iter().enumerate() {
        let _ = write!(
            svg,
            r##"<text x="{}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="10">{k}</text>"##,
            MARGIN - 6.0,
            H - MARGIN - (yi as f64 + 0.5) * ch + 3.0,
        );
    }
    svg.push_str("</svg>\n");
    svg
}
