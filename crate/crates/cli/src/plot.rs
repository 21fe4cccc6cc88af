//! Static SVG plots: sweep curves, sweep heatmaps and the regression plot
//! of a stick-breaking mixture fit.

use std::fmt::Write;

use causens_core::estimands::{mixture_conditional_mean, Bound, MixtureComponent, SweepTable};
use causens_core::models::{stick_breaking, Dataset};

use crate::error::{CliError, Result};
use crate::io::fmt_f64;
use crate::results::DrawsTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const ARM_COLORS: [&str; 2] = ["#1f77b4", "#d62728"];

/// Creation time in RFC 3339, or `None` when stamping is disabled.
pub fn timestamp(enabled: bool) -> Option<String> {
    enabled.then(|| {
        time::OffsetDateTime::now_utc()
            .format(&time::format_description::well_known::Rfc3339)
            .unwrap_or_default()
    })
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Short label for a tick or cell value.
fn label(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    fmt_f64(if r == 0.0 { 0.0 } else { r })
}

#[derive(Debug, Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    r0: f64,
    r1: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, r0: f64, r1: f64) -> Self {
        let (lo, hi) = if hi > lo {
            let pad = 0.04 * (hi - lo);
            (lo - pad, hi + pad)
        } else {
            (lo - 1.0, hi + 1.0)
        };
        Self { d0: lo, d1: hi, r0, r1 }
    }

    fn map(&self, v: f64) -> f64 {
        self.r0 + (v - self.d0) / (self.d1 - self.d0) * (self.r1 - self.r0)
    }

    /// Round-number ticks inside the domain.
    fn ticks(&self) -> Vec<f64> {
        let span = self.d1 - self.d0;
        let raw = span / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (self.d0 / step).ceil() as i64;
        let last = (self.d1 / step).floor() as i64;
        (first..=last).map(|i| i as f64 * step).collect()
    }
}

struct Canvas {
    title: String,
    stamp: Option<String>,
    body: String,
}

impl Canvas {
    fn new(title: &str, stamp: Option<String>) -> Self {
        Self {
            title: title.to_string(),
            stamp,
            body: String::new(),
        }
    }

    fn axes(&mut self, x: &Scale, y: &Scale, x_label: &str, y_label: &str) {
        let b = &mut self.body;
        let (left, bottom) = (MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM);
        let _ = writeln!(
            b,
            r##"<g class="axes" stroke="#333" fill="none"><line x1="{left}" y1="{bottom}" x2="{}" y2="{bottom}"/><line x1="{left}" y1="{MARGIN_TOP}" x2="{left}" y2="{bottom}"/></g>"##,
            WIDTH - MARGIN_RIGHT
        );
        for t in x.ticks() {
            let px = x.map(t);
            let _ = writeln!(
                b,
                r##"<g class="tick"><line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{}" stroke="#333"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text></g>"##,
                bottom + 5.0,
                bottom + 20.0,
                label(t)
            );
        }
        for t in y.ticks() {
            let py = y.map(t);
            let _ = writeln!(
                b,
                r##"<g class="tick"><line x1="{}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end">{}</text></g>"##,
                left - 5.0,
                left - 8.0,
                py + 4.0,
                label(t)
            );
        }
        let _ = writeln!(
            b,
            r#"<text class="x-label" x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            (left + WIDTH - MARGIN_RIGHT) / 2.0,
            HEIGHT - 15.0,
            esc(x_label)
        );
        let _ = writeln!(
            b,
            r#"<text class="y-label" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            (MARGIN_TOP + bottom) / 2.0,
            (MARGIN_TOP + bottom) / 2.0,
            esc(y_label)
        );
    }

    fn finish(self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        if let Some(t) = &self.stamp {
            let _ = writeln!(out, r#"<metadata class="timestamp">{}</metadata>"#, esc(t));
        }
        let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
        let _ = writeln!(
            out,
            r#"<text class="title" x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

fn polyline(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Posterior mean and 95% CrI of the ATE along a one-axis sweep.
pub fn sweep_curve(table: &SweepTable, threshold: f64, stamp: Option<String>) -> Result<String> {
    if table.axes.len() != 1 {
        return Err(CliError::validation(format!(
            "a curve plot needs a one-axis sweep, this one has {} axes",
            table.axes.len()
        )));
    }
    let pts: Vec<(f64, f64, f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|s| (r.values[0], s.mean, s.q025, s.q975)))
        .collect();
    if pts.is_empty() {
        return Err(CliError::validation("the sweep has no successful grid points to plot"));
    }
    let xs = pts.iter().map(|p| p.0);
    let x = Scale::new(
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
        MARGIN_LEFT,
        WIDTH - MARGIN_RIGHT,
    );
    let lo = pts.iter().map(|p| p.2).fold(threshold, f64::min);
    let hi = pts.iter().map(|p| p.3).fold(threshold, f64::max);
    let y = Scale::new(lo, hi, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    let mut c = Canvas::new(&format!("ATE across {}", table.axes[0]), stamp);
    c.axes(&x, &y, &table.axes[0], "ATE (posterior mean, 95% CrI)");
    let mut band: Vec<(f64, f64)> = pts.iter().map(|p| (x.map(p.0), y.map(p.3))).collect();
    band.extend(pts.iter().rev().map(|p| (x.map(p.0), y.map(p.2))));
    let b = &mut c.body;
    let _ = writeln!(
        b,
        r##"<polygon class="cri-band" points="{}" fill="#1f77b4" fill-opacity="0.2" stroke="none"/>"##,
        polyline(&band)
    );
    let ty = y.map(threshold);
    let _ = writeln!(
        b,
        r##"<line class="threshold" x1="{MARGIN_LEFT}" y1="{ty:.2}" x2="{}" y2="{ty:.2}" stroke="#555" stroke-dasharray="5,4"/>"##,
        WIDTH - MARGIN_RIGHT
    );
    let mean: Vec<(f64, f64)> = pts.iter().map(|p| (x.map(p.0), y.map(p.1))).collect();
    let _ = writeln!(
        b,
        r##"<polyline class="mean" points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        polyline(&mean)
    );
    for p in &pts {
        let _ = writeln!(
            b,
            r##"<circle class="grid-point" cx="{:.2}" cy="{:.2}" r="4" fill="#1f77b4"><title>{} = {}: mean {}, CrI [{}, {}]</title></circle>"##,
            x.map(p.0),
            y.map(p.1),
            esc(&table.axes[0]),
            label(p.0),
            label(p.1),
            label(p.2),
            label(p.3)
        );
    }
    Ok(c.finish())
}

/// Diverging color: blue below the threshold, red above, white at it.
fn diverging(v: f64, threshold: f64, span: f64) -> String {
    let t = ((v - threshold) / span).clamp(-1.0, 1.0);
    let mix = |a: f64, b: f64, w: f64| (a + (b - a) * w).round() as u8;
    let (r, g, b) = if t >= 0.0 {
        (mix(255.0, 214.0, t), mix(255.0, 39.0, t), mix(255.0, 40.0, t))
    } else {
        (mix(255.0, 31.0, -t), mix(255.0, 119.0, -t), mix(255.0, 180.0, -t))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// One cell per grid point of a two-axis sweep, colored by a CrI bound.
pub fn sweep_heatmap(table: &SweepTable, bound: Bound, threshold: f64, stamp: Option<String>) -> Result<String> {
    if table.axes.len() != 2 {
        return Err(CliError::validation(format!(
            "a heatmap needs a two-axis sweep, this one has {} axes",
            table.axes.len()
        )));
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for r in &table.rows {
        if !xs.contains(&r.values[0]) {
            xs.push(r.values[0]);
        }
        if !ys.contains(&r.values[1]) {
            ys.push(r.values[1]);
        }
    }
    let pick = |s: &causens_core::estimands::PointStats| match bound {
        Bound::Lower => s.q025,
        Bound::Upper => s.q975,
    };
    let span = table
        .rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|s| (pick(s) - threshold).abs()))
        .fold(0.0, f64::max)
        .max(1e-12);
    let bound_name = match bound {
        Bound::Lower => "lower",
        Bound::Upper => "upper",
    };
    let mut c = Canvas::new(&format!("{bound_name} 95% CrI bound of the ATE"), stamp);
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT - 60.0);
    let (y0, y1) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let cw = (x1 - x0) / xs.len() as f64;
    let ch = (y1 - y0) / ys.len() as f64;
    let b = &mut c.body;
    for r in &table.rows {
        let i = xs.iter().position(|v| *v == r.values[0]).expect("collected");
        let j = ys.iter().position(|v| *v == r.values[1]).expect("collected");
        let (cx, cy) = (x0 + i as f64 * cw, y1 - (j + 1) as f64 * ch);
        match &r.outcome {
            Ok(s) => {
                let v = pick(s);
                let _ = writeln!(
                    b,
                    r##"<g class="cell"><rect x="{cx:.2}" y="{cy:.2}" width="{cw:.2}" height="{ch:.2}" fill="{}" stroke="#fff"/><text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text></g>"##,
                    diverging(v, threshold, span),
                    cx + cw / 2.0,
                    cy + ch / 2.0 + 4.0,
                    label((v * 100.0).round() / 100.0)
                );
            }
            Err(e) => {
                let _ = writeln!(
                    b,
                    r##"<g class="cell failed"><rect x="{cx:.2}" y="{cy:.2}" width="{cw:.2}" height="{ch:.2}" fill="#bbb" stroke="#fff"/><text x="{:.2}" y="{:.2}" text-anchor="middle">failed</text><title>{}</title></g>"##,
                    cx + cw / 2.0,
                    cy + ch / 2.0 + 4.0,
                    esc(e)
                );
            }
        }
    }
    for (i, v) in xs.iter().enumerate() {
        let _ = writeln!(
            b,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x0 + (i as f64 + 0.5) * cw,
            y1 + 18.0,
            label(*v)
        );
    }
    for (j, v) in ys.iter().enumerate() {
        let _ = writeln!(
            b,
            r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y1 - (j as f64 + 0.5) * ch + 4.0,
            label(*v)
        );
    }
    let _ = writeln!(
        b,
        r#"<text class="x-label" x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        esc(&table.axes[0])
    );
    let _ = writeln!(
        b,
        r#"<text class="y-label" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        esc(&table.axes[1])
    );
    // Legend: bound values from -span to +span around the threshold.
    let lx = WIDTH - MARGIN_RIGHT - 40.0;
    for k in 0..=10 {
        let v = threshold + span * (1.0 - k as f64 / 5.0);
        let ly = y0 + k as f64 * (y1 - y0) / 11.0;
        let _ = writeln!(
            b,
            r#"<rect class="legend" x="{lx:.2}" y="{ly:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            (y1 - y0) / 11.0,
            diverging(v, threshold, span)
        );
        if k % 5 == 0 {
            let _ = writeln!(
                b,
                r#"<text class="legend" x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 18.0,
                ly + 10.0,
                label((v * 100.0).round() / 100.0)
            );
        }
    }
    Ok(c.finish())
}

/// Mixture parameters of pooled draw `i`.
fn mixture_at(draws: &DrawsTable, k: usize, i: usize) -> Result<(Vec<MixtureComponent>, Vec<f64>)> {
    let get = |name: &str, j: usize| -> Result<f64> {
        let col = format!("{name}[{j}]");
        draws
            .index_of(&col)
            .map(|q| draws.pooled_value(q, i))
            .ok_or_else(|| CliError::validation(format!("draws have no column {col}")))
    };
    let mut comps = Vec::with_capacity(k);
    for j in 0..k {
        comps.push(MixtureComponent {
            eta: [get("eta0", j)?, get("eta1", j)?, get("eta2", j)?],
            sigma: get("sigma", j)?,
            gamma: [get("gamma0", j)?, get("gamma1", j)?],
            theta0: get("theta0", j)?,
            phi: get("phi", j)?,
        });
    }
    let v = (0..k.saturating_sub(1)).map(|j| get("v", j)).collect::<Result<Vec<f64>>>()?;
    let nu = stick_breaking(&v).map_err(|e| CliError::validation(e.to_string()))?;
    Ok((comps, nu))
}

/// Induced regression lines `E[Y | a, l]` of several posterior draws per
/// arm, their pointwise posterior mean, the observed outcomes and the
/// posterior draws of the missing outcomes.
pub fn tsb_regression(data: &Dataset, draws: &DrawsTable, curves: usize, stamp: Option<String>) -> Result<String> {
    let k = (0..)
        .take_while(|j| draws.index_of(&format!("eta0[{j}]")).is_some())
        .count();
    if k == 0 {
        return Err(CliError::validation("draws do not come from a tsb-mnar fit"));
    }
    let total = draws.n_draws();
    if total == 0 {
        return Err(CliError::validation("draws table is empty"));
    }
    let n_curves = curves.clamp(1, total);
    let picks: Vec<usize> = (0..n_curves).map(|c| c * total / n_curves).collect();
    let l = data.l();
    let (lmin, lmax) = l.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let grid: Vec<f64> = (0..=80).map(|i| lmin + (lmax - lmin) * i as f64 / 80.0).collect();

    let mut lines: Vec<[Vec<f64>; 2]> = Vec::with_capacity(n_curves);
    for &i in &picks {
        let (comps, nu) = mixture_at(draws, k, i)?;
        let arm = |a: u8| grid.iter().map(|&x| mixture_conditional_mean(&comps, &nu, a, x)).collect();
        lines.push([arm(0), arm(1)]);
    }
    let mean_line = |a: usize| -> Vec<f64> {
        (0..grid.len())
            .map(|g| lines.iter().map(|ln| ln[a][g]).sum::<f64>() / lines.len() as f64)
            .collect()
    };
    let means = [mean_line(0), mean_line(1)];

    // Missing outcome draws: the y_miss slots follow the missing rows in order.
    let missing_rows: Vec<usize> = (0..data.n()).filter(|&i| data.y()[i].is_none()).collect();
    let mut imputed: Vec<(usize, f64)> = Vec::new();
    for (slot, &row) in missing_rows.iter().enumerate() {
        let q = draws
            .index_of(&format!("y_miss[{slot}]"))
            .ok_or_else(|| CliError::validation("draws and dataset disagree on missing outcomes"))?;
        for &i in picks.iter().take(10) {
            imputed.push((row, draws.pooled_value(q, i)));
        }
    }

    let mut ys: Vec<f64> = data.y().iter().flatten().copied().collect();
    ys.extend(imputed.iter().map(|p| p.1));
    ys.extend(lines.iter().flat_map(|ln| ln.iter().flatten().copied()).filter(|v| v.is_finite()));
    let (ymin, ymax) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let x = Scale::new(lmin, lmax, MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let y = Scale::new(ymin, ymax, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    let mut c = Canvas::new("Posterior regression of Y on L by treatment arm", stamp);
    c.axes(&x, &y, "L", "Y");
    let b = &mut c.body;
    for (i, &yi) in data.y().iter().enumerate() {
        if let Some(v) = yi {
            let a = data.a()[i] as usize;
            let _ = writeln!(
                b,
                r#"<circle class="observed arm-{a}" cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.55"/>"#,
                x.map(l[i]),
                y.map(v),
                ARM_COLORS[a]
            );
        }
    }
    for &(row, v) in &imputed {
        let a = data.a()[row] as usize;
        let _ = writeln!(
            b,
            r#"<circle class="imputed arm-{a}" cx="{:.2}" cy="{:.2}" r="2" fill="none" stroke="{}" stroke-opacity="0.35"/>"#,
            x.map(l[row]),
            y.map(v),
            ARM_COLORS[a]
        );
    }
    let path = |vals: &[f64]| -> String {
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .zip(vals)
            .filter(|(_, v)| v.is_finite())
            .map(|(&g, &v)| (x.map(g), y.map(v)))
            .collect();
        polyline(&pts)
    };
    for ln in &lines {
        for (a, color) in ARM_COLORS.iter().enumerate() {
            let _ = writeln!(
                b,
                r#"<polyline class="draw-curve arm-{a}" points="{}" fill="none" stroke="{color}" stroke-opacity="0.18" stroke-width="1"/>"#,
                path(&ln[a])
            );
        }
    }
    for (a, color) in ARM_COLORS.iter().enumerate() {
        let _ = writeln!(
            b,
            r#"<polyline class="mean-curve arm-{a}" points="{}" fill="none" stroke="{color}" stroke-width="3"/>"#,
            path(&means[a])
        );
    }
    for (a, name) in ["control (a = 0)", "treated (a = 1)"].iter().enumerate() {
        let ly = MARGIN_TOP + 8.0 + 16.0 * a as f64;
        let _ = writeln!(
            b,
            r#"<g class="legend"><line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{name}</text></g>"#,
            MARGIN_LEFT + 10.0,
            MARGIN_LEFT + 30.0,
            ARM_COLORS[a],
            MARGIN_LEFT + 36.0,
            ly + 4.0
        );
    }
    Ok(c.finish())
}
