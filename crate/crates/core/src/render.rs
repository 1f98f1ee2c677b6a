//! SVG, ASCII and JSON pictures of the cloud, the polygon and chosen
//! supporting lines.  Output is deterministic for a fixed input.

use std::fmt::Write;

use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::equation::{CloudPoint, CoveredEquation};
use crate::polygon::{build_polygon, element, grid_denominator, PolygonError};
use crate::scalar::Scalar;
use crate::Exponent;

/// Pixels per unit in SVG output.
pub const UNIT: f64 = 32.0;
const MARGIN: f64 = 24.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Svg,
    Ascii,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "svg" => Ok(Format::Svg),
            "ascii" => Ok(Format::Ascii),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (svg, ascii, json)")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RenderOptions {
    /// Co-slopes of the supporting lines to draw.
    pub lines: Vec<Exponent>,
    pub title: Option<String>,
}

pub fn render<S: Scalar>(p: &CoveredEquation<S>, format: Format, opts: &RenderOptions) -> Result<String, PolygonError> {
    match format {
        Format::Svg => render_svg(&[(opts.title.clone().unwrap_or_default(), p.clone())], &opts.lines),
        Format::Ascii => render_ascii(p, opts),
        Format::Json => Ok(serde_json::to_string_pretty(&render_json(p, &opts.lines)?).unwrap() + "\n"),
    }
}

fn triple(e: Exponent, j: u32) -> Value {
    json!([e.numer(), e.denom(), j])
}

pub fn render_json<S: Scalar>(p: &CoveredEquation<S>, lines: &[Exponent]) -> Result<Value, PolygonError> {
    let poly = p.newton_polygon()?;
    let cloud = p.cloud_points();
    let lines: Vec<Value> = lines
        .iter()
        .map(|&mu| serde_json::to_value(element(&cloud, mu)).unwrap())
        .collect();
    Ok(json!({
        "vertices": poly.vertices().iter().map(|&(e, j)| triple(e, j)).collect::<Vec<_>>(),
        "cloud": p.cloud().iter().map(|c| json!({
            "at": triple(c.abscissa(), c.j),
            "in_a": c.in_a,
            "in_b": c.in_b,
        })).collect::<Vec<_>>(),
        "lines": lines,
    }))
}

fn fx(e: Exponent) -> f64 {
    e.to_f64().unwrap()
}

struct Frame {
    imin: Exponent,
    imax: Exponent,
    jmax: u32,
}

impl Frame {
    fn of(cloud: &[CloudPoint]) -> Frame {
        let imin = cloud.iter().map(|c| c.abscissa()).min().unwrap().floor().min(Exponent::zero());
        let imax = cloud.iter().map(|c| c.abscissa()).max().unwrap().ceil() + Exponent::from_integer(1);
        let jmax = cloud.iter().map(|c| c.j).max().unwrap() + 1;
        Frame { imin, imax, jmax }
    }

    fn width(&self) -> f64 {
        fx(self.imax - self.imin) * UNIT + 2.0 * MARGIN
    }

    fn height(&self) -> f64 {
        self.jmax as f64 * UNIT + 2.0 * MARGIN
    }

    fn x(&self, i: Exponent) -> f64 {
        MARGIN + fx(i - self.imin) * UNIT
    }

    fn xf(&self, i: f64) -> f64 {
        MARGIN + (i - fx(self.imin)) * UNIT
    }

    fn y(&self, j: f64) -> f64 {
        MARGIN + (self.jmax as f64 - j) * UNIT
    }
}

fn panel<S: Scalar>(out: &mut String, p: &CoveredEquation<S>, lines: &[Exponent], title: &str) -> Result<f64, PolygonError> {
    let cloud = p.cloud();
    if cloud.is_empty() {
        return Err(PolygonError::EmptyCloud);
    }
    let pts = p.cloud_points();
    let poly = build_polygon(&pts)?;
    let fr = Frame::of(&cloud);
    let (w, h) = (fr.width(), fr.height());
    let _ = writeln!(out, r##"<g class="panel"><title>{}</title>"##, escape(title));
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="white"/>"##);
    // Axes.
    let (x0, y0) = (fr.x(Exponent::zero()), fr.y(0.0));
    let _ = writeln!(out, r##"<line x1="{:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="#888"/>"##, MARGIN / 2.0, w - MARGIN / 2.0);
    let _ = writeln!(out, r##"<line x1="{x0:.2}" y1="{:.2}" x2="{x0:.2}" y2="{:.2}" stroke="#888"/>"##, MARGIN / 2.0, h - MARGIN / 2.0);
    if !title.is_empty() {
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"##, MARGIN, MARGIN * 0.6, escape(title));
    }
    // Boundary: vertical ray, sides, horizontal ray.
    let v = poly.vertices();
    let mut path = format!("M {:.2} {:.2}", fr.x(v[0].0), MARGIN / 2.0);
    for &(e, j) in v {
        let _ = write!(path, " L {:.2} {:.2}", fr.x(e), fr.y(j as f64));
    }
    let last = v[v.len() - 1];
    let _ = write!(path, " L {:.2} {:.2}", w - MARGIN / 2.0, fr.y(last.1 as f64));
    let _ = writeln!(out, r##"<path d="{path}" fill="none" stroke="black" stroke-width="1.5"/>"##);
    for &mu in lines {
        let e = element(&pts, mu);
        // j = α − ι/μ over the visible abscissae.
        let (ia, ib) = (fx(fr.imin) - 0.5, fx(fr.imax) + 0.5);
        let (a, m) = (fx(e.alpha), fx(mu));
        let _ = writeln!(
            out,
            r##"<line class="support" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c33" stroke-dasharray="4 3"/>"##,
            fr.xf(ia),
            fr.y(a - ia / m),
            fr.xf(ib),
            fr.y(a - ib / m)
        );
        let (le, lj) = e.bottom_point();
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" font-size="10" fill="#c33">mu={}</text>"##,
            fr.x(le) + 4.0,
            fr.y(lj as f64) - 4.0,
            crate::polygon::exponent_text(mu)
        );
    }
    for c in &cloud {
        let fill = if c.in_a { "black" } else { "white" };
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="black"/>"##,
            fr.x(c.abscissa()),
            fr.y(c.j as f64)
        );
    }
    let _ = writeln!(out, "</g>");
    Ok(w)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One or more panels side by side, each with its own frame.
pub fn render_svg<S: Scalar>(panels: &[(String, CoveredEquation<S>)], lines: &[Exponent]) -> Result<String, PolygonError> {
    let mut body = String::new();
    let mut offset = 0.0;
    let mut height: f64 = 0.0;
    for (title, p) in panels {
        let mut g = String::new();
        let w = panel(&mut g, p, lines, title)?;
        let _ = writeln!(body, r##"<g transform="translate({offset:.2} 0)">"##);
        body.push_str(&g);
        body.push_str("</g>\n");
        offset += w;
        height = height.max(Frame::of(&p.cloud()).height());
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {offset:.2} {height:.2}" width="{offset:.2}" height="{height:.2}">"##
    );
    out.push_str(&body);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Text picture on the grid (1/d)ℤ: `*` a point of A, `o` a point of B
/// only, brackets around polygon vertices, `.` on requested lines.
pub fn render_ascii<S: Scalar>(p: &CoveredEquation<S>, opts: &RenderOptions) -> Result<String, PolygonError> {
    let cloud = p.cloud();
    if cloud.is_empty() {
        return Err(PolygonError::EmptyCloud);
    }
    let pts = p.cloud_points();
    let poly = build_polygon(&pts)?;
    let mut d = grid_denominator(&pts) as i64;
    for mu in &opts.lines {
        d = num_integer::lcm(d, *mu.denom());
    }
    let fr = Frame::of(&cloud);
    let cols = ((fr.imax - fr.imin) * Exponent::from_integer(d)).to_integer() as usize + 1;
    let elems: Vec<_> = opts.lines.iter().map(|&mu| element(&pts, mu)).collect();
    let mut out = String::new();
    if let Some(t) = &opts.title {
        let _ = writeln!(out, "{t}");
    }
    for j in (0..fr.jmax).rev() {
        let _ = write!(out, "{j:>3} |");
        for c in 0..cols {
            let i = fr.imin + Exponent::new(c as i64, d);
            let here = cloud.iter().find(|q| q.abscissa() == i && q.j == j);
            let vertex = poly.vertices().contains(&(i, j));
            let on_line = elems.iter().any(|e| e.abscissa_at(j) == i);
            let mark = match here {
                Some(q) if q.in_a => '*',
                Some(_) => 'o',
                None if on_line => '.',
                None => ' ',
            };
            let cell = if vertex { format!("[{mark}]") } else { format!(" {mark} ") };
            out.push_str(&cell);
        }
        out.push('\n');
    }
    let _ = write!(out, "    +");
    out.push_str(&"---".repeat(cols));
    out.push('\n');
    let _ = write!(out, "     ");
    for c in 0..cols {
        let i = fr.imin + Exponent::new(c as i64, d);
        if i.is_integer() {
            let _ = write!(out, "{:^3}", i.to_integer());
        } else {
            out.push_str("   ");
        }
    }
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_equation;
    use crate::{ex, OperatorSpec, Rational};

    fn example() -> CoveredEquation<Rational> {
        parse_equation("y^4 + x^3*y^3 + x*y^2 - x^3*y + x^5 + (x*y^3 - x^2*y)*y1", OperatorSpec::differential())
            .unwrap()
    }

    #[test]
    fn json_layout() {
        let v = render_json(&example(), &[ex(1, 2), ex(2, 1)]).unwrap();
        assert_eq!(v["vertices"], json!([[0, 1, 4], [1, 1, 2], [5, 1, 0]]));
        assert_eq!(v["lines"][0]["points"], json!([[0, 1, 4], [1, 1, 2]]));
        assert_eq!(v["lines"][1]["mu"], json!("2"));
        assert_eq!(v["cloud"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn svg_marks_b_only_points_unfilled() {
        let s = render(&example(), Format::Svg, &RenderOptions { lines: vec![ex(1, 2), ex(2, 1)], title: None }).unwrap();
        assert!(s.starts_with("<svg"));
        assert_eq!(s.matches("<circle").count(), 5);
        assert_eq!(s.matches(r#"fill="white" stroke="black""#).count(), 0);
        assert_eq!(s.matches(r#"class="support""#).count(), 2);
        assert_eq!(s, render(&example(), Format::Svg, &RenderOptions { lines: vec![ex(1, 2), ex(2, 1)], title: None }).unwrap());
        // Without the shift, x·y³·y₁ and x²·y·y₁ land on (1,4) and (2,2) alone.
        let q: CoveredEquation<Rational> = parse_equation(
            "y^4 + x^3*y^3 + x*y^2 - x^3*y + x^5 + (x*y^3 - x^2*y)*y1",
            OperatorSpec::q_difference(Rational::from_integer(2.into())).unwrap(),
        )
        .unwrap();
        let s = render(&q, Format::Svg, &RenderOptions::default()).unwrap();
        assert_eq!(s.matches("<circle").count(), 7);
        assert_eq!(s.matches(r#"fill="white" stroke="black""#).count(), 2);
    }

    #[test]
    fn ascii_picture() {
        let a = render(&example(), Format::Ascii, &RenderOptions::default()).unwrap();
        let rows: Vec<&str> = a.lines().collect();
        assert_eq!(rows[0], "  4 |[*]                  ");
        assert_eq!(rows[2], "  2 |   [*]               ");
        assert_eq!(rows[6], "      0  1  2  3  4  5  6 ");
        let a = render(&example(), Format::Ascii, &RenderOptions { lines: vec![ex(2, 1)], title: None }).unwrap();
        assert!(a.lines().nth(3).unwrap().contains(" * "));
        assert_eq!(a.lines().nth(1).unwrap().matches('.').count(), 0);
    }
}
