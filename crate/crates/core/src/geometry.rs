//! Exact planar convex geometry.
//!
//! Everything here is decided by sign tests on exact scalars: convex hulls,
//! point containment, polygon clipping, and area bookkeeping. The clipping
//! and area routines live on rational polygons because line intersection
//! divides; the predicates are generic.
//!
//! Area is tracked as twice the signed area (`area2`) so integer-coordinate
//! polygons stay integer-valued.

use num_traits::{One, Zero};

use crate::scalar::{ceil_i64, floor_i64, Coord};
use crate::{Caps, Error, Rat, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

pub fn point2<T>(x: T, y: T) -> Point2<T> {
    Point2 { x, y }
}

/// Twice the signed area of triangle `a b c`; positive when `c` lies to the
/// left of the directed line `a -> b`.
pub fn orient2d<T: Coord>(a: &Point2<T>, b: &Point2<T>, c: &Point2<T>) -> T {
    let abx = b.x.clone() - a.x.clone();
    let aby = b.y.clone() - a.y.clone();
    let acx = c.x.clone() - a.x.clone();
    let acy = c.y.clone() - a.y.clone();
    abx * acy - aby * acx
}

/// Convex hull in counterclockwise order, collinear boundary points dropped.
/// Degenerate inputs yield fewer than three vertices.
pub fn convex_hull<T: Coord>(mut pts: Vec<Point2<T>>) -> Vec<Point2<T>> {
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let build = |iter: &mut dyn Iterator<Item = &Point2<T>>| {
        let mut chain: Vec<Point2<T>> = Vec::new();
        for p in iter {
            while chain.len() >= 2
                && orient2d(&chain[chain.len() - 2], &chain[chain.len() - 1], p) <= T::zero()
            {
                chain.pop();
            }
            chain.push(p.clone());
        }
        chain
    };
    let mut lower = build(&mut pts.iter());
    let mut upper = build(&mut pts.iter().rev());
    lower.pop();
    upper.pop();
    lower.append(&mut upper);
    if lower.len() < 3 {
        // All input points collinear: keep the extreme pair.
        let mut ends = vec![pts.first().unwrap().clone(), pts.last().unwrap().clone()];
        ends.dedup();
        return ends;
    }
    lower
}

/// Closed half-plane `a*x + b*y >= c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfPlane<T = Rat> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Coord> HalfPlane<T> {
    pub fn eval(&self, p: &Point2<T>) -> T {
        self.a.clone() * p.x.clone() + self.b.clone() * p.y.clone()
    }

    pub fn contains(&self, p: &Point2<T>) -> bool {
        self.eval(p) >= self.c
    }

    /// Closed complement; the shared boundary line belongs to both.
    pub fn complement(&self) -> Self {
        HalfPlane {
            a: self.a.clone().neg(),
            b: self.b.clone().neg(),
            c: self.c.clone().neg(),
        }
    }
}

/// Convex polygon with counterclockwise vertices. Fewer than three vertices
/// means a degenerate (zero-area) region: empty, a point, or a segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexPolygon<T = Rat> {
    verts: Vec<Point2<T>>,
}

impl<T: Coord> ConvexPolygon<T> {
    pub fn empty() -> Self {
        ConvexPolygon { verts: Vec::new() }
    }

    /// Hull of arbitrary points.
    pub fn from_points(pts: Vec<Point2<T>>) -> Self {
        ConvexPolygon {
            verts: convex_hull(pts),
        }
    }

    fn from_ccw(verts: Vec<Point2<T>>) -> Self {
        ConvexPolygon { verts }
    }

    pub fn verts(&self) -> &[Point2<T>] {
        &self.verts
    }

    pub fn is_degenerate(&self) -> bool {
        self.verts.len() < 3
    }

    /// Twice the enclosed area; zero for degenerate polygons.
    pub fn area2(&self) -> T {
        let n = self.verts.len();
        if n < 3 {
            return T::zero();
        }
        let mut acc = T::zero();
        for i in 0..n {
            let p = &self.verts[i];
            let q = &self.verts[(i + 1) % n];
            acc = acc + (p.x.clone() * q.y.clone() - q.x.clone() * p.y.clone());
        }
        acc
    }

    pub fn contains_point(&self, p: &Point2<T>) -> bool {
        match self.verts.len() {
            0 => false,
            1 => &self.verts[0] == p,
            2 => {
                let (a, b) = (&self.verts[0], &self.verts[1]);
                orient2d(a, b, p) == T::zero()
                    && p.x >= a.x.clone().min(b.x.clone())
                    && p.x <= a.x.clone().max(b.x.clone())
                    && p.y >= a.y.clone().min(b.y.clone())
                    && p.y <= a.y.clone().max(b.y.clone())
            }
            n => (0..n).all(|i| {
                orient2d(&self.verts[i], &self.verts[(i + 1) % n], p) >= T::zero()
            }),
        }
    }

    /// All vertices of `other` inside `self`; for convex `other` this decides
    /// polygon containment.
    pub fn contains_polygon(&self, other: &ConvexPolygon<T>) -> bool {
        other.verts.iter().all(|v| self.contains_point(v))
    }

    pub fn translate(&self, t: &Point2<T>) -> Self {
        ConvexPolygon {
            verts: self
                .verts
                .iter()
                .map(|p| point2(p.x.clone() + t.x.clone(), p.y.clone() + t.y.clone()))
                .collect(),
        }
    }

    /// Scales about the origin; a negative factor reverses orientation, so
    /// the vertex order flips to stay counterclockwise.
    pub fn scale(&self, f: &T) -> Self {
        let mut verts: Vec<Point2<T>> = self
            .verts
            .iter()
            .map(|p| point2(p.x.clone() * f.clone(), p.y.clone() * f.clone()))
            .collect();
        if f < &T::zero() {
            verts.reverse();
        }
        ConvexPolygon { verts }
    }

    /// The bounding half-planes, one per edge, in order.
    pub fn edges(&self) -> Vec<HalfPlane<T>> {
        let n = self.verts.len();
        if n < 3 {
            return Vec::new();
        }
        (0..n)
            .map(|i| {
                let p = &self.verts[i];
                let q = &self.verts[(i + 1) % n];
                let a = p.y.clone() - q.y.clone();
                let b = q.x.clone() - p.x.clone();
                let c = a.clone() * p.x.clone() + b.clone() * p.y.clone();
                HalfPlane { a, b, c }
            })
            .collect()
    }

    pub fn bbox(&self) -> Option<(Point2<T>, Point2<T>)> {
        let first = self.verts.first()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in &self.verts[1..] {
            if p.x < lo.x {
                lo.x = p.x.clone();
            }
            if p.y < lo.y {
                lo.y = p.y.clone();
            }
            if p.x > hi.x {
                hi.x = p.x.clone();
            }
            if p.y > hi.y {
                hi.y = p.y.clone();
            }
        }
        Some((lo, hi))
    }
}

impl ConvexPolygon<Rat> {
    /// Axis-aligned closed box as a polygon.
    pub fn rect(x0: Rat, y0: Rat, x1: Rat, y1: Rat) -> Self {
        ConvexPolygon::from_points(vec![
            point2(x0.clone(), y0.clone()),
            point2(x1.clone(), y0),
            point2(x1, y1.clone()),
            point2(x0, y1),
        ])
    }

    /// Intersection with a closed half-plane (Sutherland–Hodgman step).
    pub fn clip(&self, h: &HalfPlane<Rat>) -> Self {
        let n = self.verts.len();
        if n == 0 {
            return Self::empty();
        }
        if n < 3 {
            // Degenerate input stays degenerate; keep the inside vertices.
            let kept: Vec<_> = self.verts.iter().filter(|p| h.contains(p)).cloned().collect();
            return ConvexPolygon { verts: kept };
        }
        let mut out: Vec<Point2<Rat>> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let cur = &self.verts[i];
            let nxt = &self.verts[(i + 1) % n];
            let fc = h.eval(cur);
            let fn_ = h.eval(nxt);
            let cur_in = fc >= h.c;
            let nxt_in = fn_ >= h.c;
            if cur_in {
                out.push(cur.clone());
            }
            if cur_in != nxt_in {
                let t = (&h.c - &fc) / (&fn_ - &fc);
                let x = &cur.x + &t * (&nxt.x - &cur.x);
                let y = &cur.y + &t * (&nxt.y - &cur.y);
                out.push(point2(x, y));
            }
        }
        out.dedup();
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        ConvexPolygon::from_ccw(out)
    }

    pub fn intersect(&self, other: &ConvexPolygon<Rat>) -> Self {
        let mut cur = self.clone();
        for h in other.edges() {
            cur = cur.clip(&h);
            if cur.verts.is_empty() {
                break;
            }
        }
        cur
    }

    /// Decomposes `self \ cover` into convex pieces of positive area. Pieces
    /// overlap only on boundary lines, so their areas add exactly.
    pub fn difference_pieces(&self, cover: &ConvexPolygon<Rat>) -> Vec<ConvexPolygon<Rat>> {
        if cover.is_degenerate() {
            return if self.area2() > Rat::zero() {
                vec![self.clone()]
            } else {
                Vec::new()
            };
        }
        let mut pieces = Vec::new();
        let mut cur = self.clone();
        for h in cover.edges() {
            let outside = cur.clip(&h.complement());
            if outside.area2() > Rat::zero() {
                pieces.push(outside);
            }
            cur = cur.clip(&h);
            if cur.area2() == Rat::zero() {
                break;
            }
        }
        pieces
    }

    /// Integer points of the closed region, row by row.
    pub fn lattice_points(&self, caps: &Caps) -> Result<Vec<(i64, i64)>> {
        if self.verts.is_empty() {
            return Ok(Vec::new());
        }
        if self.verts.len() == 1 {
            let p = &self.verts[0];
            return Ok(if p.x.is_integer() && p.y.is_integer() {
                vec![(floor_i64(&p.x)?, floor_i64(&p.y)?)]
            } else {
                Vec::new()
            });
        }
        let (lo, hi) = self.bbox().unwrap();
        let y0 = ceil_i64(&lo.y)?;
        let y1 = floor_i64(&hi.y)?;
        let n = self.verts.len();
        let mut out = Vec::new();
        for yi in y0..=y1 {
            let y = Rat::from_integer(yi.into());
            let mut xmin: Option<Rat> = None;
            let mut xmax: Option<Rat> = None;
            let mut note = |x: Rat| {
                if xmin.as_ref().map_or(true, |m| &x < m) {
                    xmin = Some(x.clone());
                }
                if xmax.as_ref().map_or(true, |m| &x > m) {
                    xmax = Some(x);
                }
            };
            for i in 0..n {
                let p = &self.verts[i];
                let q = &self.verts[(i + 1) % n];
                if n == 2 && i == 1 {
                    break;
                }
                let dp = &p.y - &y;
                let dq = &q.y - &y;
                if dp.is_zero() {
                    note(p.x.clone());
                }
                if dq.is_zero() {
                    note(q.x.clone());
                }
                if (dp > Rat::zero() && dq < Rat::zero()) || (dp < Rat::zero() && dq > Rat::zero())
                {
                    let t = &dp / (&dp - &dq);
                    note(&p.x + &t * (&q.x - &p.x));
                }
            }
            let (Some(xmin), Some(xmax)) = (xmin, xmax) else {
                continue;
            };
            let xa = ceil_i64(&xmin)?;
            let xb = floor_i64(&xmax)?;
            if xb >= xa {
                let needed = out.len() as u128 + (xb - xa + 1) as u128;
                if needed > caps.max_enum as u128 {
                    return Err(Error::cap("lattice points", needed, caps.max_enum as u128));
                }
                out.extend((xa..=xb).map(|x| (x, yi)));
            }
        }
        Ok(out)
    }

    /// Whether the closed unit cell `[i, i+1] x [j, j+1]` meets the closed
    /// polygon. Separating-axis test over both shapes' edge directions.
    pub fn box_intersects(&self, i: i64, j: i64) -> bool {
        if self.verts.is_empty() {
            return false;
        }
        let corners = [
            point2(Rat::from_integer(i.into()), Rat::from_integer(j.into())),
            point2(Rat::from_integer((i + 1).into()), Rat::from_integer(j.into())),
            point2(
                Rat::from_integer((i + 1).into()),
                Rat::from_integer((j + 1).into()),
            ),
            point2(Rat::from_integer(i.into()), Rat::from_integer((j + 1).into())),
        ];
        let mut axes: Vec<(Rat, Rat)> = vec![
            (Rat::one(), Rat::zero()),
            (Rat::zero(), Rat::one()),
        ];
        let n = self.verts.len();
        for idx in 0..n {
            let p = &self.verts[idx];
            let q = &self.verts[(idx + 1) % n];
            if p == q {
                continue;
            }
            let dx = &q.x - &p.x;
            let dy = &q.y - &p.y;
            axes.push((-dy.clone(), dx.clone()));
            // Segment supports need the direction axis too.
            if n < 3 {
                axes.push((dx, dy));
            }
            if n < 3 && idx == 0 {
                break;
            }
        }
        'axis: for (ax, ay) in axes {
            let proj = |p: &Point2<Rat>| &ax * &p.x + &ay * &p.y;
            let mut b_lo = proj(&corners[0]);
            let mut b_hi = b_lo.clone();
            for c in &corners[1..] {
                let v = proj(c);
                if v < b_lo {
                    b_lo = v.clone();
                }
                if v > b_hi {
                    b_hi = v;
                }
            }
            let mut p_lo = proj(&self.verts[0]);
            let mut p_hi = p_lo.clone();
            for v in &self.verts[1..] {
                let t = proj(v);
                if t < p_lo {
                    p_lo = t.clone();
                }
                if t > p_hi {
                    p_hi = t;
                }
                if p_lo <= b_hi && b_lo <= p_hi {
                    // This axis cannot separate; try the next one.
                    continue 'axis;
                }
            }
            if p_hi < b_lo || b_hi < p_lo {
                return false;
            }
        }
        true
    }

    /// Per-row spans `(j, i_lo, i_hi)` of the unit cells whose open box
    /// meets the polygon; by convexity the cells of each row form one
    /// inclusive range. Errors on degenerate targets.
    pub fn row_ranges(&self, caps: &Caps) -> Result<Vec<(i64, i64, i64)>> {
        if self.area2() <= Rat::zero() {
            return Err(Error::InvalidParam(
                "cell enumeration needs a polygon with interior".into(),
            ));
        }
        let (lo, hi) = self.bbox().unwrap();
        // Integer t lies in the open interval (a, b) iff
        // floor(a) <= t <= ceil(b) - 1, shifted here by the unit cell width.
        let j0 = floor_i64(&lo.y)?;
        let j1 = ceil_i64(&hi.y)? - 1;
        let mut total = 0u128;
        let mut out = Vec::new();
        for j in j0..=j1 {
            let strip = self
                .clip(&HalfPlane {
                    a: Rat::zero(),
                    b: Rat::one(),
                    c: Rat::from_integer(j.into()),
                })
                .clip(&HalfPlane {
                    a: Rat::zero(),
                    b: -Rat::one(),
                    c: -Rat::from_integer((j + 1).into()),
                });
            if strip.area2() <= Rat::zero() {
                continue;
            }
            let (slo, shi) = strip.bbox().unwrap();
            let i0 = floor_i64(&slo.x)?;
            let i1 = ceil_i64(&shi.x)? - 1;
            total += (i1 - i0 + 1).max(0) as u128;
            if total > caps.max_enum as u128 {
                return Err(Error::cap("cell enumeration", total, caps.max_enum as u128));
            }
            out.push((j, i0, i1));
        }
        Ok(out)
    }

    /// Unit cells whose open box meets the polygon, row by row. For a
    /// polygon with interior, the closed boxes of exactly these cells cover
    /// it, with no boundary-touching extras. Errors on degenerate targets.
    pub fn cells_meeting(&self, caps: &Caps) -> Result<Vec<(i64, i64)>> {
        let mut out = Vec::new();
        for (j, i0, i1) in self.row_ranges(caps)? {
            out.extend((i0..=i1).map(|i| (i, j)));
        }
        Ok(out)
    }

    /// Unit cells whose closed box meets the polygon.
    pub fn cells_intersecting(&self, caps: &Caps) -> Result<Vec<(i64, i64)>> {
        let Some((lo, hi)) = self.bbox() else {
            return Ok(Vec::new());
        };
        let i0 = ceil_i64(&lo.x)? - 1;
        let i1 = floor_i64(&hi.x)?;
        let j0 = ceil_i64(&lo.y)? - 1;
        let j1 = floor_i64(&hi.y)?;
        let count = ((i1 - i0 + 1).max(0) as u128) * ((j1 - j0 + 1).max(0) as u128);
        if count > caps.max_enum as u128 {
            return Err(Error::cap("cell enumeration", count, caps.max_enum as u128));
        }
        let mut out = Vec::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                if self.box_intersects(i, j) {
                    out.push((i, j));
                }
            }
        }
        Ok(out)
    }
}

/// Exact area of `target` not covered by any of `covers`, as twice the area.
/// Zero if and only if the closed covers contain the full-dimensional part
/// of `target`.
pub fn uncovered_area2(
    target: &ConvexPolygon<Rat>,
    covers: &[ConvexPolygon<Rat>],
    caps: &Caps,
) -> Result<Rat> {
    let mut pieces = vec![target.clone()];
    for cover in covers {
        let mut next = Vec::new();
        for piece in &pieces {
            next.extend(piece.difference_pieces(cover));
        }
        if next.len() as u128 > caps.max_enum as u128 {
            return Err(Error::cap(
                "difference pieces",
                next.len() as u128,
                caps.max_enum as u128,
            ));
        }
        pieces = next;
        if pieces.is_empty() {
            break;
        }
    }
    let mut total = Rat::zero();
    for p in &pieces {
        total += p.area2();
    }
    Ok(total)
}
