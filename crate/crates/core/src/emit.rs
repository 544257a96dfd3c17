//! CSV and SVG output for sweeps, and the `t,u` eigenfunction format.

use std::fmt::Write as _;
use std::path::Path;

use crate::bounds::BoundsRow;
use crate::error::{Error, Result};
use crate::grid::GridFunction;

pub const CSV_HEADER: &str = "rho,L,U,lambda,converged,cone_ok,in_interval";

/// C's `%.17g`, with `inf`, `-inf` and `nan` spelled out.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (16 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_f(x: Option<f64>) -> String {
    x.map(fmt_g17).unwrap_or_default()
}

fn opt_b(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

pub fn render_csv(rows: &[BoundsRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_g17(r.rho),
            fmt_g17(r.l),
            fmt_g17(r.u),
            opt_f(r.lambda),
            opt_b(r.converged),
            opt_b(r.cone_ok),
            opt_b(r.in_interval)
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn emit_csv(rows: &[BoundsRow], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &render_csv(rows))
}

pub fn emit_svg(rows: &[BoundsRow], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &render_svg(rows)?)
}

const W: f64 = 800.0;
const H: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

struct Frame {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, rho: f64) -> f64 {
        LEFT + (rho - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    /// `+∞` maps to the top edge of the plot
    fn y(&self, v: f64) -> f64 {
        let v = v.min(self.y1);
        H - BOTTOM - v / self.y1 * (H - TOP - BOTTOM)
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Band between `L` and `U` over `ρ`, with a marker per computed `λ`.
/// Rows whose bounds could not be computed are left out of the picture.
pub fn render_svg(rows: &[BoundsRow]) -> Result<String> {
    let mut pts: Vec<&BoundsRow> = rows.iter().filter(|r| r.l.is_finite() && !r.u.is_nan()).collect();
    if rows.is_empty() {
        return Err(Error::InvalidArgument("nothing to plot".into()));
    }
    pts.sort_by(|a, b| a.rho.total_cmp(&b.rho));

    let rhos = || pts.iter().map(|r| r.rho);
    let (mut x0, mut x1) = (rhos().fold(f64::INFINITY, f64::min), rhos().fold(f64::NEG_INFINITY, f64::max));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    } else if x0 == x1 {
        let pad = if x0 == 0.0 { 1.0 } else { 0.5 * x0.abs() };
        (x0, x1) = (x0 - pad, x1 + pad);
    }
    let top = pts
        .iter()
        .flat_map(|r| [Some(r.l), Some(r.u), r.lambda])
        .flatten()
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let y1 = if top > 0.0 { 1.1 * top } else { 1.0 };
    let fr = Frame { x0, x1, y1 };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" width="800" height="600">"#);
    s.push_str("<defs>\n");
    s.push_str(r#"<pattern id="hatch" patternUnits="userSpaceOnUse" width="8" height="8"><path d="M0,8 L8,0" stroke="steelblue" stroke-width="1.5"/></pattern>"#);
    s.push('\n');
    let _ = writeln!(
        s,
        r#"<clipPath id="plot"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"#,
        px(LEFT),
        px(TOP),
        px(W - LEFT - RIGHT),
        px(H - TOP - BOTTOM)
    );
    s.push_str("</defs>\n");
    let _ = writeln!(s, r#"<rect x="0" y="0" width="800" height="600" fill="white"/>"#);

    // axes and ticks
    let (ax, ay) = (LEFT, H - BOTTOM);
    let _ =
        writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, px(ax), px(ay), px(W - RIGHT), px(ay));
    let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, px(ax), px(ay), px(ax), px(TOP));
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let xp = fr.x(fx);
        let _ =
            writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>"#, px(xp), px(ay), px(ay + 5.0));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{:.3}</text>"#,
            px(xp),
            px(ay + 20.0),
            fx
        );
        let fy = y1 * i as f64 / 5.0;
        let yp = fr.y(fy);
        let _ =
            writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>"#, px(ax - 5.0), px(yp), px(ax));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{:.3}</text>"#,
            px(ax - 8.0),
            px(yp + 4.0),
            fy
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">rho</text>"#,
        px((LEFT + W - RIGHT) / 2.0),
        px(H - 15.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{0}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {0})">lambda</text>"#,
        px((TOP + H - BOTTOM) / 2.0)
    );

    s.push_str(r#"<g clip-path="url(#plot)">"#);
    s.push('\n');
    let distinct = pts.windows(2).any(|w| w[0].rho != w[1].rho);
    if distinct {
        let mut poly: Vec<String> = pts.iter().map(|r| format!("{},{}", px(fr.x(r.rho)), px(fr.y(r.l)))).collect();
        poly.extend(pts.iter().rev().map(|r| format!("{},{}", px(fr.x(r.rho)), px(fr.y(r.u)))));
        let _ =
            writeln!(s, r#"<polygon points="{}" fill="steelblue" fill-opacity="0.3" stroke="none"/>"#, poly.join(" "));
        for (pick, name) in [(0, "L"), (1, "U")] {
            let line: Vec<String> = pts
                .iter()
                .map(|r| format!("{},{}", px(fr.x(r.rho)), px(fr.y(if pick == 0 { r.l } else { r.u }))))
                .collect();
            let _ =
                writeln!(s, r#"<polyline class="{name}" points="{}" fill="none" stroke="steelblue"/>"#, line.join(" "));
        }
    } else {
        for r in &pts {
            let x = px(fr.x(r.rho));
            let _ = writeln!(
                s,
                r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="steelblue" stroke-opacity="0.3" stroke-width="8"/>"#,
                px(fr.y(r.l)),
                px(fr.y(r.u))
            );
        }
    }
    for r in pts.iter().filter(|r| r.u.is_infinite()) {
        let _ = writeln!(
            s,
            r#"<rect class="unbounded" x="{}" y="{}" width="12" height="12" fill="url(#hatch)" stroke="steelblue"/>"#,
            px(fr.x(r.rho) - 6.0),
            px(TOP)
        );
    }
    for r in &pts {
        if let Some(lam) = r.lambda.filter(|v| v.is_finite()) {
            let color = if r.in_interval == Some(false) { "crimson" } else { "black" };
            let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, px(fr.x(r.rho)), px(fr.y(lam)));
        }
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Parse a sweep table written by [`render_csv`].
pub fn parse_csv(text: &str, path: &Path) -> Result<Vec<BoundsRow>> {
    let bad = |line: usize, msg: String| Error::Format { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(bad(i + 1, format!("expected 7 fields, found {}", fields.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(i + 1, format!("`{s}`: {e}")));
        let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        let opt_bool = |s: &str| match s {
            "" => Ok(None),
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            other => Err(bad(i + 1, format!("`{other}` is not a boolean"))),
        };
        rows.push(BoundsRow {
            rho: num(fields[0])?,
            l: num(fields[1])?,
            u: num(fields[2])?,
            lambda: opt_num(fields[3])?,
            converged: opt_bool(fields[4])?,
            cone_ok: opt_bool(fields[5])?,
            in_interval: opt_bool(fields[6])?,
            error: None,
        });
    }
    if rows.is_empty() {
        return Err(bad(1, "no data rows".into()));
    }
    Ok(rows)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<BoundsRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

pub fn render_eigenfunction(u: &GridFunction) -> String {
    let mut out = String::from("t,u\n");
    for (t, v) in u.nodes().zip(u.values()) {
        let _ = writeln!(out, "{},{}", fmt_g17(t), fmt_g17(*v));
    }
    out
}

pub fn write_eigenfunction(u: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &render_eigenfunction(u))
}

/// Parse a `t,u` table whose `t` column is the uniform grid on `[0,1]`.
pub fn parse_eigenfunction(text: &str, path: &Path) -> Result<GridFunction> {
    let bad = |line: usize, msg: String| Error::Format { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "t,u" => {}
        Some((i, h)) => return Err(bad(i + 1, format!("expected header `t,u`, found `{h}`"))),
        None => return Err(bad(1, "empty file".into())),
    }
    let mut ts = Vec::new();
    let mut us = Vec::new();
    let mut last_line = 1;
    for (i, line) in lines {
        last_line = i + 1;
        let (t, u) = line.split_once(',').ok_or_else(|| bad(i + 1, format!("expected two columns, found `{line}`")))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(i + 1, format!("`{}`: {e}", s.trim())));
        let (t, u) = (num(t)?, num(u)?);
        if !u.is_finite() {
            return Err(bad(i + 1, format!("non-finite value {u}")));
        }
        ts.push(t);
        us.push(u);
    }
    let n = us.len();
    if n < 3 || n % 2 == 0 {
        return Err(bad(last_line, format!("need an odd number (>= 3) of samples, found {n}")));
    }
    for (k, &t) in ts.iter().enumerate() {
        let want = k as f64 / (n - 1) as f64;
        if (t - want).abs() > 1e-9 {
            return Err(bad(k + 2, format!("t = {t} is not the uniform grid node {want}")));
        }
    }
    GridFunction::new(us)
}

pub fn read_eigenfunction(path: impl AsRef<Path>) -> Result<GridFunction> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_eigenfunction(&text, path)
}
