//! SVG figures rebuilt from the CSV files in a result directory.
//!
//! Every plot is a pure function of its input tables; numbers are printed
//! with fixed precision, so regenerating from the same CSVs gives the same
//! bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::output::{write_text, CsvData};

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 320.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

fn num(v: f64) -> String {
    let a = v.abs();
    if a < 1e-12 {
        "0".into()
    } else if !(1e-2..1e4).contains(&a) {
        let s = format!("{v:.2e}");
        let (m, e) = s.split_once('e').expect("exponent form");
        format!("{}e{e}", trim_zeros(m))
    } else {
        trim_zeros(&format!("{v:.3}"))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of<'a>(values: impl IntoIterator<Item = &'a f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in values {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if hi <= lo {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            return Self { lo: lo - pad, hi: hi + pad };
        }
        Self { lo, hi }
    }
}

struct Panel {
    x0: f64,
    y0: f64,
    xr: Range,
    yr: Range,
    log_y: bool,
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        self.x0 + MARGIN_L + (x - self.xr.lo) / (self.xr.hi - self.xr.lo) * (PANEL_W - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        let (y, lo, hi) = if self.log_y {
            (y.max(1e-300).log10(), self.yr.lo.log10(), self.yr.hi.log10())
        } else {
            (y, self.yr.lo, self.yr.hi)
        };
        self.y0 + PANEL_H - MARGIN_B - (y - lo) / (hi - lo) * (PANEL_H - MARGIN_T - MARGIN_B)
    }
}

struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    fn new(cols: usize, rows: usize) -> Self {
        Self {
            width: PANEL_W * cols as f64,
            height: PANEL_H * rows as f64,
            body: String::new(),
        }
    }

    fn panel(&mut self, col: usize, row: usize, xr: Range, yr: Range, log_y: bool, title: &str, xlabel: &str, ylabel: &str) -> Panel {
        let p = Panel {
            x0: col as f64 * PANEL_W,
            y0: row as f64 * PANEL_H,
            xr,
            yr,
            log_y,
        };
        let (l, r) = (p.x0 + MARGIN_L, p.x0 + PANEL_W - MARGIN_R);
        let (t, b) = (p.y0 + MARGIN_T, p.y0 + PANEL_H - MARGIN_B);
        let _ = writeln!(
            self.body,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000"/>"##,
            r - l,
            b - t
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = xr.lo + f * (xr.hi - xr.lo);
            let xp = p.px(xv);
            let _ = writeln!(
                self.body,
                r##"<line x1="{xp:.2}" y1="{b:.2}" x2="{xp:.2}" y2="{:.2}" stroke="#000"/><text x="{xp:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"##,
                b + 4.0,
                b + 16.0,
                num(xv)
            );
            let yv = if log_y {
                10f64.powf(yr.lo.log10() + f * (yr.hi.log10() - yr.lo.log10()))
            } else {
                yr.lo + f * (yr.hi - yr.lo)
            };
            let yp = p.py(yv);
            let _ = writeln!(
                self.body,
                r##"<line x1="{:.2}" y1="{yp:.2}" x2="{l:.2}" y2="{yp:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"##,
                l - 4.0,
                l - 6.0,
                yp + 3.0,
                num(yv)
            );
        }
        let _ = writeln!(
            self.body,
            r##"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"##,
            (l + r) / 2.0,
            p.y0 + 22.0,
            escape(title)
        );
        let _ = writeln!(
            self.body,
            r##"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"##,
            (l + r) / 2.0,
            b + 34.0,
            escape(xlabel)
        );
        let _ = writeln!(
            self.body,
            r##"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"##,
            p.x0 + 16.0,
            (t + b) / 2.0,
            p.x0 + 16.0,
            (t + b) / 2.0,
            escape(ylabel)
        );
        p
    }

    fn polyline(&mut self, p: &Panel, xs: &[f64], ys: &[f64], color: &str, dashed: bool) {
        if xs.is_empty() {
            return;
        }
        let pts: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(_, &y)| !p.log_y || y > 0.0)
            .map(|(&x, &y)| format!("{:.2},{:.2}", p.px(x), p.py(y)))
            .collect();
        let dash = if dashed { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        );
    }

    fn bars(&mut self, p: &Panel, xs: &[f64], ys: &[f64], width: f64, color: &str) {
        for (&x, &y) in xs.iter().zip(ys) {
            let (l, r) = (p.px(x - width / 2.0), p.px(x + width / 2.0));
            let (top, base) = (p.py(y), p.py(p.yr.lo.max(0.0)));
            let _ = writeln!(
                self.body,
                r#"<rect x="{l:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.35"/>"#,
                (r - l).max(0.5),
                (base - top).max(0.0)
            );
        }
    }

    fn arrow(&mut self, p: &Panel, x: f64, y: f64, dx: f64, dy: f64, len: f64) {
        let (sx, sy) = (p.px(x), p.py(y));
        // screen-space direction; y grows downward
        let (ux, uy) = (p.px(x + dx) - sx, p.py(y + dy) - sy);
        let norm = (ux * ux + uy * uy).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            let _ = writeln!(self.body, r##"<circle cx="{sx:.2}" cy="{sy:.2}" r="1.5" fill="#555"/>"##);
            return;
        }
        let (ex, ey) = (sx + ux / norm * len, sy + uy / norm * len);
        let (hx, hy) = (ux / norm * 4.0, uy / norm * 4.0);
        let _ = writeln!(
            self.body,
            r##"<line x1="{sx:.2}" y1="{sy:.2}" x2="{ex:.2}" y2="{ey:.2}" stroke="#555"/><polygon points="{ex:.2},{ey:.2} {:.2},{:.2} {:.2},{:.2}" fill="#555"/>"##,
            ex - hx - hy * 0.6,
            ey - hy + hx * 0.6,
            ex - hx + hy * 0.6,
            ey - hy - hx * 0.6
        );
    }

    fn legend(&mut self, p: &Panel, entries: &[(String, &str, bool)]) {
        if entries.is_empty() {
            return;
        }
        let _ = writeln!(
            self.body,
            r##"<rect x="{:.2}" y="{:.2}" width="144" height="{:.2}" fill="#fff" fill-opacity="0.85" stroke="#ccc"/>"##,
            p.x0 + PANEL_W - MARGIN_R - 154.0,
            p.y0 + MARGIN_T + 4.0,
            14.0 * entries.len() as f64 + 6.0
        );
        for (k, (label, color, dashed)) in entries.iter().enumerate() {
            let x = p.x0 + PANEL_W - MARGIN_R - 150.0;
            let y = p.y0 + MARGIN_T + 14.0 + 14.0 * k as f64;
            let dash = if *dashed { r#" stroke-dasharray="5,3""# } else { "" };
            let _ = writeln!(
                self.body,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.2}" y="{y:.2}" font-size="10">{}</text>"#,
                y - 3.0,
                x + 20.0,
                y - 3.0,
                x + 24.0,
                escape(label)
            );
        }
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Splits rows into consecutive groups sharing the same key.
fn groups(key: &[f64]) -> Vec<(f64, std::ops::Range<usize>)> {
    let mut out: Vec<(f64, std::ops::Range<usize>)> = Vec::new();
    for (i, &k) in key.iter().enumerate() {
        match out.last_mut() {
            Some((last, r)) if *last == k => r.end = i + 1,
            _ => out.push((k, i..i + 1)),
        }
    }
    out
}

/// Monomer time series with the closed-form curves.
pub fn plot_ode(data: &CsvData) -> Result<String> {
    let t = data.column("t")?;
    let n = data.column("n")?;
    let exact = data.column("n_exact")?;
    let law = data.column("n_relaxation_law")?;
    let positive = n.iter().chain(&exact).chain(&law).filter(|v| **v > 0.0);
    let yr = Range::of(positive);
    let mut svg = Svg::new(1, 1);
    let p = svg.panel(0, 0, Range::of(&t), yr, true, "Free monomer concentration", "t (s)", "n (µM)");
    svg.polyline(&p, &t, &n, PALETTE[0], false);
    svg.polyline(&p, &t, &exact, PALETTE[1], true);
    svg.polyline(&p, &t, &law, PALETTE[2], true);
    svg.legend(
        &p,
        &[
            ("RK4".into(), PALETTE[0], false),
            ("exact".into(), PALETTE[1], true),
            ("relaxation law".into(), PALETTE[2], true),
        ],
    );
    Ok(svg.finish())
}

/// Mean length over time from an ensemble or master-equation moment table.
pub fn plot_length_mean(data: &CsvData, title: &str) -> Result<String> {
    let t = data.column("t")?;
    let m = data.column("length_mean")?;
    let v = data.column("length_var")?;
    let hi: Vec<f64> = m.iter().zip(&v).map(|(m, v)| m + v.sqrt()).collect();
    let lo: Vec<f64> = m.iter().zip(&v).map(|(m, v)| m - v.sqrt()).collect();
    let mut svg = Svg::new(1, 1);
    let p = svg.panel(0, 0, Range::of(&t), Range::of(hi.iter().chain(&lo)), false, title, "t (s)", "length (monomers)");
    svg.polyline(&p, &t, &m, PALETTE[0], false);
    svg.polyline(&p, &t, &hi, PALETTE[0], true);
    svg.polyline(&p, &t, &lo, PALETTE[0], true);
    svg.legend(&p, &[("mean".into(), PALETTE[0], false), ("mean ± sd".into(), PALETTE[0], true)]);
    Ok(svg.finish())
}

fn density_panel(svg: &mut Svg, col: usize, data: &CsvData, analytic: Option<&CsvData>, title: &str) -> Result<()> {
    let t = data.column("t")?;
    let x = data.column("x")?;
    let pv = data.column("p")?;
    let a = match analytic {
        Some(d) => Some((d.column("t")?, d.column("x")?, d.column("p")?)),
        None => None,
    };
    let x_um: Vec<f64> = x.iter().map(|v| v * 1e6).collect();
    let yr = Range {
        lo: 0.0,
        hi: Range::of(pv.iter().chain(a.iter().flat_map(|a| a.2.iter()))).hi,
    };
    let p = svg.panel(col, 0, Range::of(&x_um), yr, false, title, "x (µm)", "p (1/m)");
    let mut legend = Vec::new();
    for (k, (tv, r)) in groups(&t).into_iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        svg.polyline(&p, &x_um[r.clone()], &pv[r], color, false);
        legend.push((format!("t = {}", num(tv)), color, false));
    }
    if let Some((at, ax, ap)) = &a {
        let ax_um: Vec<f64> = ax.iter().map(|v| v * 1e6).collect();
        for (k, (_, r)) in groups(at).into_iter().enumerate() {
            svg.polyline(&p, &ax_um[r.clone()], &ap[r], PALETTE[k % PALETTE.len()], true);
        }
        legend.push(("analytic".into(), "#000", true));
    }
    svg.legend(&p, &legend);
    Ok(())
}

/// Density snapshots, numeric solid and analytic dashed.
pub fn plot_density(data: &CsvData, analytic: Option<&CsvData>) -> Result<String> {
    let mut svg = Svg::new(1, 1);
    density_panel(&mut svg, 0, data, analytic, "Tip position density")?;
    Ok(svg.finish())
}

/// One density panel per rate regime.
pub fn plot_scenarios(panels: &[(String, CsvData)]) -> Result<String> {
    let mut svg = Svg::new(panels.len().max(1), 1);
    for (k, (name, data)) in panels.iter().enumerate() {
        density_panel(&mut svg, k, data, None, name)?;
    }
    Ok(svg.finish())
}

/// Arrows, nullcline and trajectories in the `(a, n)` plane.
pub fn plot_phase(field: &CsvData, nullcline: &CsvData, trajectories: Option<&CsvData>) -> Result<String> {
    let n = field.column("n")?;
    let a = field.column("a")?;
    let dn = field.column("dn")?;
    let da = field.column("da")?;
    let nn = nullcline.column("n")?;
    let na = nullcline.column("a")?;
    let mut svg = Svg::new(1, 1);
    let p = svg.panel(0, 0, Range::of(&a), Range::of(&n), false, "Phase plane", "a (µM)", "n (µM)");
    for i in 0..n.len() {
        svg.arrow(&p, a[i], n[i], da[i], dn[i], 10.0);
    }
    svg.polyline(&p, &na, &nn, "#000", true);
    let mut legend = vec![("nullcline".to_string(), "#000", true)];
    if let Some(tr) = trajectories {
        let id = tr.column("trajectory")?;
        let tn = tr.column("n")?;
        let ta = tr.column("a")?;
        for (k, (_, r)) in groups(&id).into_iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            svg.polyline(&p, &ta[r.clone()], &tn[r], color, false);
            legend.push((format!("trajectory {}", k + 1), color, false));
        }
    }
    svg.legend(&p, &legend);
    Ok(svg.finish())
}

/// Master-equation masses (bars) against drift-diffusion cell masses.
pub fn plot_lattice_overlay(data: &CsvData) -> Result<String> {
    let t = data.column("t")?;
    let x = data.column("x")?;
    let m = data.column("master")?;
    let f = data.column("fp")?;
    let x_um: Vec<f64> = x.iter().map(|v| v * 1e6).collect();
    let dx = x_um.windows(2).map(|w| (w[1] - w[0]).abs()).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    let width = if dx.is_finite() { dx * 0.8 } else { 0.01 };
    let mut svg = Svg::new(1, 1);
    let yr = Range { lo: 0.0, hi: Range::of(m.iter().chain(&f)).hi };
    let p = svg.panel(0, 0, Range::of(&x_um), yr, false, "Master equation vs drift-diffusion", "x (µm)", "probability");
    let mut legend = Vec::new();
    for (k, (tv, r)) in groups(&t).into_iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        svg.bars(&p, &x_um[r.clone()], &m[r.clone()], width, color);
        svg.polyline(&p, &x_um[r.clone()], &f[r], color, false);
        legend.push((format!("t = {}", num(tv)), color, false));
    }
    svg.legend(&p, &legend);
    Ok(svg.finish())
}

/// Regenerates every figure whose input tables are present in `dir`.
/// Returns the names of the files written.
pub fn emit_plots(dir: &Path) -> Result<Vec<String>> {
    let mut written = Vec::new();
    let read = |name: &str| -> Result<Option<CsvData>> {
        let path = dir.join(name);
        if path.exists() {
            CsvData::read(&path).map(Some)
        } else {
            Ok(None)
        }
    };
    let mut put = |name: &str, svg: String| -> Result<()> {
        write_text(&dir.join(name), &svg)?;
        written.push(name.to_string());
        Ok(())
    };

    if let Some(d) = read("ode.csv")? {
        put("ode.svg", plot_ode(&d)?)?;
    }
    if let Some(d) = read("ensemble.csv")? {
        put("ensemble.svg", plot_length_mean(&d, "Ensemble filament length")?)?;
    }
    if let Some(d) = read("master_moments.csv")? {
        put("master.svg", plot_length_mean(&d, "Master-equation filament length")?)?;
    }
    if let Some(d) = read("density.csv")? {
        let a = read("density_analytic.csv")?;
        put("density.svg", plot_density(&d, a.as_ref())?)?;
    }
    let mut panels = Vec::new();
    for name in ["growth", "balanced", "collapse"] {
        if let Some(d) = read(&format!("density_{name}.csv"))? {
            panels.push((name.to_string(), d));
        }
    }
    if !panels.is_empty() {
        put("scenarios.svg", plot_scenarios(&panels)?)?;
    }
    if let (Some(f), Some(n)) = (read("phase_field.csv")?, read("nullcline.csv")?) {
        let tr = read("phase_trajectories.csv")?;
        put("phase.svg", plot_phase(&f, &n, tr.as_ref())?)?;
    }
    if let Some(d) = read("lattice_overlay.csv")? {
        put("lattice_overlay.svg", plot_lattice_overlay(&d)?)?;
    }
    Ok(written)
}
