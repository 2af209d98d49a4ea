//! CSV tables and deterministic SVG scatter plots.

use std::fmt::Write as _;
use std::io::Write;

use crate::birkhoff::Portrait;
use crate::error::{KbError, KbResult};
use crate::kepler_billiard::KeplerPortrait;
use crate::shadowing::RealizedOrbit;
use crate::tables::BoundaryTable;

fn csv_err(e: csv::Error) -> KbError {
    KbError::InvalidParameter(format!("csv output failed: {e}"))
}

fn write_rows<W: Write, const N: usize>(out: W, header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> KbResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| KbError::InvalidParameter(format!("csv output failed: {e}")))
}

/// `u,x,y,kappa` at `n` equally spaced parameters.
pub fn table_csv<W: Write>(table: &BoundaryTable, n: usize, out: W) -> KbResult<()> {
    write_rows(
        out,
        ["u", "x", "y", "kappa"],
        table.samples(n).into_iter().map(|(u, pos, kappa)| {
            [u.to_string(), pos.re.to_string(), pos.im.to_string(), kappa.to_string()]
        }),
    )
}

/// `seed_id,step,u,alpha` rows of a classical billiard portrait.
pub fn birkhoff_csv<W: Write>(p: &Portrait, out: W) -> KbResult<()> {
    write_rows(
        out,
        ["seed_id", "step", "u", "alpha"],
        p.rows.iter().map(|r| [r.seed_id.to_string(), r.step.to_string(), r.u.to_string(), r.alpha.to_string()]),
    )
}

/// `seed_id,step,u,alpha,energy_residual,min_r` rows of a Kepler portrait.
pub fn kepler_csv<W: Write>(p: &KeplerPortrait, out: W) -> KbResult<()> {
    write_rows(
        out,
        ["seed_id", "step", "u", "alpha", "energy_residual", "min_r"],
        p.rows.iter().map(|r| {
            [
                r.seed_id.to_string(),
                r.step.to_string(),
                r.u.to_string(),
                r.alpha.to_string(),
                r.energy_residual.to_string(),
                r.min_r.to_string(),
            ]
        }),
    )
}

/// One row per bounce of a realized orbit.
pub fn orbit_csv<W: Write>(o: &RealizedOrbit, table: &BoundaryTable, out: W) -> KbResult<()> {
    write_rows(
        out,
        ["bounce", "u", "x", "y", "arc_class", "reflection_residual", "r_min"],
        o.u.iter().enumerate().map(|(k, &u)| {
            let p = table.position(u);
            [
                k.to_string(),
                u.to_string(),
                p.re.to_string(),
                p.im.to_string(),
                o.classes[k].to_string(),
                o.reflection_residuals[k].to_string(),
                o.arcs[k].r_min.to_string(),
            ]
        }),
    )
}

/// Styling of a scatter plot.
#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub width: u32,
    pub height: u32,
    pub radius: f64,
    pub title: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self { width: 800, height: 600, radius: 0.6, title: String::new() }
    }
}

fn seed_color(id: usize) -> String {
    let hue = (id as f64 * 137.507_764_050_037_85) % 360.0;
    format!("hsl({hue:.1},70%,40%)")
}

/// Scatter of `(group, x, y)` points, one color per group. The viewBox is
/// fitted to the data and the bytes depend only on the input.
pub fn svg_scatter(points: &[(usize, f64, f64)], style: &SvgStyle) -> String {
    let (w, h) = (style.width as f64, style.height as f64);
    let finite: Vec<_> = points.iter().filter(|p| p.1.is_finite() && p.2.is_finite()).collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    );
    if !style.title.is_empty() {
        let t = style.title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(s, "<title>{t}</title>");
    }
    let _ = writeln!(s, r#"<rect width="{}" height="{}" fill="white"/>"#, style.width, style.height);
    if !finite.is_empty() {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &finite {
            x0 = x0.min(p.1);
            x1 = x1.max(p.1);
            y0 = y0.min(p.2);
            y1 = y1.max(p.2);
        }
        let sx = if x1 > x0 { x1 - x0 } else { 1.0 };
        let sy = if y1 > y0 { y1 - y0 } else { 1.0 };
        let pad = 10.0;
        let mut group = usize::MAX;
        for p in &finite {
            if p.0 != group {
                if group != usize::MAX {
                    s.push_str("</g>\n");
                }
                group = p.0;
                let _ = writeln!(s, r#"<g fill="{}">"#, seed_color(group));
            }
            let px = pad + (p.1 - x0) / sx * (w - 2.0 * pad);
            let py = h - pad - (p.2 - y0) / sy * (h - 2.0 * pad);
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="{}"/>"#, style.radius);
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Phase portrait `(u, alpha)` of a Kepler portrait.
pub fn kepler_svg(p: &KeplerPortrait, style: &SvgStyle) -> String {
    let pts: Vec<_> = p.rows.iter().map(|r| (r.seed_id, r.u, r.alpha)).collect();
    svg_scatter(&pts, style)
}

/// Phase portrait `(u, alpha)` of a classical billiard portrait.
pub fn birkhoff_svg(p: &Portrait, style: &SvgStyle) -> String {
    let pts: Vec<_> = p.rows.iter().map(|r| (r.seed_id, r.u, r.alpha)).collect();
    svg_scatter(&pts, style)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::make_ellipse;

    #[test]
    fn table_rows() {
        let t = make_ellipse(2.0, 1.0).unwrap();
        let mut buf = Vec::new();
        table_csv(&t, 512, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 513);
        assert_eq!(lines[0], "u,x,y,kappa");
        assert!(lines[1].starts_with("0,2,0,"));
    }

    #[test]
    fn empty_svg_is_valid() {
        let s = svg_scatter(&[], &SvgStyle::default());
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(!s.contains("<circle"));
    }

    #[test]
    fn svg_is_deterministic() {
        let pts: Vec<_> = (0..50).map(|i| (i % 3, (i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let style = SvgStyle { title: "a < b".into(), ..Default::default() };
        let a = svg_scatter(&pts, &style);
        assert_eq!(a, svg_scatter(&pts, &style));
        assert_eq!(a.matches("<circle").count(), 50);
        assert!(a.contains("a &lt; b"));
    }
}
