//! Newton polygon of a cloud of points (ι, j) with ι ∈ ℚ, j ∈ ℕ.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::equation::CoveredEquation;
use crate::scalar::Scalar;
use crate::series::PuiseuxPoly;
use crate::Exponent;

pub type Point = (Exponent, u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolygonError {
    EmptyCloud,
    ZeroSeries,
}

impl fmt::Display for PolygonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolygonError::EmptyCloud => write!(f, "empty cloud"),
            PolygonError::ZeroSeries => write!(f, "the series is zero"),
        }
    }
}

impl std::error::Error for PolygonError {}

/// Vertices of the finite-co-slope boundary, ι increasing and j decreasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    vertices: Vec<Point>,
}

/// A side: consecutive vertices and the co-slope μ of the segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Side {
    pub mu: Exponent,
    pub left: Point,
    pub right: Point,
}

/// E_{P,μ}: the cloud points on the supporting line of co-slope μ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportElement {
    #[serde(serialize_with = "ser_exponent")]
    pub mu: Exponent,
    /// α = min (j + ι/μ).
    #[serde(serialize_with = "ser_exponent")]
    pub alpha: Exponent,
    /// Sorted by decreasing j.
    #[serde(serialize_with = "ser_points")]
    pub points: Vec<Point>,
    pub top: u32,
    pub bot: u32,
}

fn ser_exponent<S: serde::Serializer>(e: &Exponent, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&exponent_text(*e))
}

fn ser_points<S: serde::Serializer>(v: &[Point], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &(e, j) in v {
        seq.serialize_element(&(*e.numer(), *e.denom(), j))?;
    }
    seq.end()
}

pub(crate) fn exponent_text(e: Exponent) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

impl SupportElement {
    pub fn is_vertex(&self) -> bool {
        self.top == self.bot
    }

    /// The point of the element at height j, if any.
    pub fn point_at(&self, j: u32) -> Option<Point> {
        self.points.iter().find(|p| p.1 == j).copied()
    }

    pub fn top_point(&self) -> Point {
        self.points[0]
    }

    pub fn bottom_point(&self) -> Point {
        *self.points.last().unwrap()
    }

    /// Abscissa of the line L_μ at height j: μ(α − j).
    pub fn abscissa_at(&self, j: u32) -> Exponent {
        self.mu * (self.alpha - Exponent::from_integer(j as i64))
    }
}

/// (b − a) × (c − a) for points in the (ι, j) plane.
fn cross(a: Point, b: Point, c: Point) -> Exponent {
    let (ax, ay) = (a.0, Exponent::from_integer(a.1 as i64));
    let (bx, by) = (b.0, Exponent::from_integer(b.1 as i64));
    let (cx, cy) = (c.0, Exponent::from_integer(c.1 as i64));
    (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
}

pub fn build_polygon(cloud: &[Point]) -> Result<NewtonPolygon, PolygonError> {
    if cloud.is_empty() {
        return Err(PolygonError::EmptyCloud);
    }
    let mut pts = cloud.to_vec();
    pts.sort();
    // Staircase of points not dominated through the first quadrant.
    let mut stair: Vec<Point> = Vec::new();
    for p in pts {
        match stair.last() {
            Some(last) if p.1 >= last.1 => {}
            _ => stair.push(p),
        }
    }
    // Lower convex chain; collinear middle points are not vertices.
    let mut hull: Vec<Point> = Vec::new();
    for p in stair {
        while hull.len() >= 2 && !cross(hull[hull.len() - 2], hull[hull.len() - 1], p).is_positive() {
            hull.pop();
        }
        hull.push(p);
    }
    Ok(NewtonPolygon { vertices: hull })
}

impl NewtonPolygon {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn sides(&self) -> Vec<Side> {
        self.vertices
            .windows(2)
            .map(|w| Side {
                mu: (w[1].0 - w[0].0) / Exponent::from_integer(w[0].1 as i64 - w[1].1 as i64),
                left: w[0],
                right: w[1],
            })
            .collect()
    }

    pub fn leftmost(&self) -> Point {
        self.vertices[0]
    }

    /// H(P): ordinate of the leftmost vertex.
    pub fn height(&self) -> u32 {
        self.vertices[0].1
    }

    /// The element of co-slope μ, read off the hull: it equals the element
    /// of the cloud restricted to hull vertices plus collinear points.
    pub fn top_at(&self, mu: Exponent) -> u32 {
        element(&self.vertices, mu).top
    }
}

/// E_{μ} of an arbitrary cloud; μ > 0.
pub fn element(cloud: &[Point], mu: Exponent) -> SupportElement {
    assert!(mu.is_positive(), "co-slope must be positive");
    assert!(!cloud.is_empty(), "empty cloud");
    let val = |p: &Point| Exponent::from_integer(p.1 as i64) + p.0 / mu;
    let alpha = cloud.iter().map(val).min().unwrap();
    let mut points: Vec<Point> = cloud.iter().filter(|p| val(p) == alpha).copied().collect();
    points.sort_by(|a, b| b.1.cmp(&a.1));
    let top = points[0].1;
    let bot = points.last().unwrap().1;
    SupportElement { mu, alpha, points, top, bot }
}

/// Least r with every abscissa in (1/r)ℤ.
pub fn grid_denominator(cloud: &[Point]) -> u32 {
    use num_integer::Integer;
    cloud.iter().fold(1i64, |acc, p| acc.lcm(p.0.denom())) as u32
}

impl<S: Scalar> CoveredEquation<S> {
    pub fn newton_polygon(&self) -> Result<NewtonPolygon, PolygonError> {
        build_polygon(&self.cloud_points())
    }

    pub fn element(&self, mu: Exponent) -> Result<SupportElement, PolygonError> {
        let c = self.cloud_points();
        if c.is_empty() {
            return Err(PolygonError::EmptyCloud);
        }
        Ok(element(&c, mu))
    }

    /// H(P).
    pub fn height(&self) -> Result<u32, PolygonError> {
        Ok(self.newton_polygon()?.height())
    }

    /// H(P, s) = Top(E_{P, ord s}).
    pub fn relative_height(&self, s: &PuiseuxPoly<S>) -> Result<u32, PolygonError> {
        let mu = s.order().ok_or(PolygonError::ZeroSeries)?;
        if !mu.is_positive() || mu.is_zero() {
            return Err(PolygonError::ZeroSeries);
        }
        Ok(self.element(mu)?.top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::OperatorSpec;
    use crate::parser::parse_equation;
    use crate::{ex, Rational};

    fn pts(v: &[(i64, u32)]) -> Vec<Point> {
        v.iter().map(|&(a, j)| (ex(a, 1), j)).collect()
    }

    fn example() -> CoveredEquation<Rational> {
        parse_equation(
            "y^4 + x^3*y^3 + x*y^2 - x^3*y + x^5 + (x*y^3 - x^2*y)*y1",
            OperatorSpec::differential(),
        )
        .unwrap()
    }

    #[test]
    fn example_polygon_and_elements() {
        let p = example();
        let poly = p.newton_polygon().unwrap();
        assert_eq!(poly.vertices(), pts(&[(0, 4), (1, 2), (5, 0)]).as_slice());
        let e = p.element(ex(1, 2)).unwrap();
        assert_eq!((e.top, e.bot), (4, 2));
        assert_eq!(e.points, pts(&[(0, 4), (1, 2)]));
        let e = p.element(ex(2, 1)).unwrap();
        assert_eq!(e.points, pts(&[(1, 2), (3, 1), (5, 0)]));
        let e = p.element(ex(1, 1)).unwrap();
        assert!(e.is_vertex());
        assert_eq!(e.points, pts(&[(1, 2)]));
        assert_eq!(poly.sides().iter().map(|s| s.mu).collect::<Vec<_>>(), vec![ex(1, 2), ex(2, 1)]);
    }

    #[test]
    fn descent_polygon() {
        let cloud = pts(&[(0, 4), (1, 3), (2, 2), (3, 1), (4, 1), (5, 0), (7, 0)]);
        let poly = build_polygon(&cloud).unwrap();
        assert_eq!(poly.vertices(), pts(&[(0, 4), (3, 1), (5, 0)]).as_slice());
        assert_eq!(element(&cloud, ex(1, 1)).top, 4);
        let cloud = pts(&[(0, 4), (1, 3), (4, 1), (7, 0), (3, 3), (5, 1)]);
        assert_eq!(build_polygon(&cloud).unwrap().vertices(), pts(&[(0, 4), (1, 3), (4, 1), (7, 0)]).as_slice());
    }

    #[test]
    fn heights() {
        let p: CoveredEquation<Rational> =
            parse_equation("-3*x^2 + 2*y*y1", OperatorSpec::differential()).unwrap();
        assert_eq!(p.height().unwrap(), 2);
        assert_eq!(p.newton_polygon().unwrap().leftmost(), (ex(-1, 1), 2));
        let p: CoveredEquation<Rational> = parse_equation("y - x", OperatorSpec::differential()).unwrap();
        assert_eq!(p.height().unwrap(), 1);
        let single = build_polygon(&pts(&[(0, 1)])).unwrap();
        assert_eq!(single.vertices().len(), 1);
        assert!(build_polygon(&[]).is_err());
    }

    #[test]
    fn grid() {
        assert_eq!(grid_denominator(&[(ex(3, 2), 1), (ex(1, 3), 0)]), 6);
        assert_eq!(grid_denominator(&pts(&[(2, 1)])), 1);
    }
}
