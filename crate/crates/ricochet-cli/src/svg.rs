//! Time-space diagram rendering: time runs left to right, distance to the
//! origin bottom to top, one line per bullet from its firing to its
//! annihilation (or the time horizon). Illustrative output only, never an
//! analysis surface; beyond `MAX_LINES` trajectories the sequence is
//! subsampled at a fixed stride.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ricochet::resolution::Resolution;

const MAX_LINES: usize = 5000;
const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 52.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 16.0;
const MARGIN_B: f64 = 40.0;

/// Render `resolution` up to time `tmax`; returns how many trajectories
/// were drawn.
pub fn render(resolution: &Resolution, tmax: f64, path: &Path) -> std::io::Result<usize> {
    // death time/place per bullet, where already decided
    let mut death: Vec<Option<(f64, f64)>> = vec![None; resolution.bullets.len()];
    for c in &resolution.collisions {
        death[c.back_index] = Some((c.time, c.position));
        death[c.front_index] = Some((c.time, c.position));
    }

    struct Line {
        t0: f64,
        t1: f64,
        x1: f64,
        alive: bool,
    }
    let stride = resolution.bullets.len().div_ceil(MAX_LINES);
    let lines: Vec<Line> = resolution
        .bullets
        .iter()
        .step_by(stride.max(1))
        .filter_map(|b| {
            let (t1, x1, alive) = match death[b.index] {
                Some((t, x)) if t <= tmax => (t, x, false),
                _ => (tmax, b.position_at(tmax), true),
            };
            (b.fire_time <= tmax).then_some(Line {
                t0: b.fire_time,
                t1,
                x1,
                alive,
            })
        })
        .collect();

    let xmax = lines.iter().map(|l| l.x1).fold(1e-9, f64::max);
    let sx = |t: f64| MARGIN_L + t / tmax * (WIDTH - MARGIN_L - MARGIN_R);
    let sy = |x: f64| HEIGHT - MARGIN_B - x / xmax * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )?;
    writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )?;

    // axes with a handful of ticks
    let axis_y = HEIGHT - MARGIN_B;
    writeln!(
        out,
        r#"<line x1="{MARGIN_L}" y1="{axis_y}" x2="{:.2}" y2="{axis_y}" stroke="black"/>"#,
        WIDTH - MARGIN_R
    )?;
    writeln!(
        out,
        r#"<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{axis_y}" stroke="black"/>"#
    )?;
    for i in 0..=5 {
        let t = tmax * i as f64 / 5.0;
        let x = sx(t);
        writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{axis_y}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            axis_y + 4.0
        )?;
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:.4}</text>"#,
            axis_y + 16.0
        )?;
        let d = xmax * i as f64 / 5.0;
        let y = sy(d);
        writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_L}" y2="{y:.2}" stroke="black"/>"#,
            MARGIN_L - 4.0
        )?;
        writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{d:.4}</text>"#,
            MARGIN_L - 7.0
        )?;
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 8.0
    )?;
    writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">distance</text>"#,
        (MARGIN_T + axis_y) / 2.0,
        (MARGIN_T + axis_y) / 2.0
    )?;

    for l in &lines {
        let color = if l.alive { "#c0392b" } else { "#444444" };
        writeln!(
            out,
            r#"<polyline points="{:.2},{:.2} {:.2},{:.2}" stroke="{color}" stroke-width="0.8" fill="none"/>"#,
            sx(l.t0),
            sy(0.0),
            sx(l.t1),
            sy(l.x1),
        )?;
    }
    writeln!(out, "</svg>")?;
    out.flush()?;
    Ok(lines.len())
}
