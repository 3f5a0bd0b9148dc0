//! Translation surfaces as polygons glued along edges by translations.
//!
//! Edge `i` of a polygon runs from vertex `i` to vertex `i + 1`. The corner at
//! vertex `i` is swept counterclockwise from the outgoing edge direction to the
//! direction pointing back at vertex `i - 1`; crossing edge `i - 1` leads to the
//! next corner of the same vertex class.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::geom::{self, Vec2};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    pub vertices: Vec<Vec2>,
}

/// Where a point sits relative to a closed polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Interior,
    OnEdge(usize),
    AtVertex(usize),
    Outside,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Polygon {
        Polygon { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &Vec2 {
        &self.vertices[i % self.len()]
    }

    /// Vector of edge `i`.
    pub fn edge(&self, i: usize) -> Vec2 {
        self.vertex(i + 1) - self.vertex(i)
    }

    /// Direction closing the corner at vertex `i` (towards vertex `i - 1`).
    pub fn corner_end(&self, i: usize) -> Vec2 {
        let n = self.len();
        self.vertex(i + n - 1) - self.vertex(i)
    }

    pub fn area(&self) -> Scalar {
        geom::signed_area2(&self.vertices) * Scalar::ratio(1, 2)
    }

    pub fn locate(&self, p: &Vec2) -> Location {
        let n = self.len();
        if let Some(i) = self.vertices.iter().position(|v| v == p) {
            return Location::AtVertex(i);
        }
        for i in 0..n {
            if geom::on_segment(self.vertex(i), self.vertex(i + 1), p) {
                return Location::OnEdge(i);
            }
        }
        let mut inside = false;
        for i in 0..n {
            let (a, b) = (self.vertex(i), self.vertex(i + 1));
            if (a.y > p.y) != (b.y > p.y) {
                let o = (b - a).cross(&(p - a));
                if (b.y > a.y && o.is_positive()) || (b.y < a.y && o.is_negative()) {
                    inside = !inside;
                }
            }
        }
        if inside {
            Location::Interior
        } else {
            Location::Outside
        }
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        self.locate(p) != Location::Outside
    }

    /// Direction `v` points into the polygon from the boundary point `p`
    /// (interior points accept every direction; edge-parallel moves count).
    pub fn points_inward(&self, p: &Vec2, v: &Vec2) -> bool {
        match self.locate(p) {
            Location::Interior => true,
            Location::Outside => false,
            Location::OnEdge(i) => !self.edge(i).cross(v).is_negative(),
            Location::AtVertex(i) => geom::in_sector(&self.edge(i), &self.corner_end(i), v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeRef {
    pub polygon: usize,
    pub edge: usize,
}

impl EdgeRef {
    pub fn new(polygon: usize, edge: usize) -> EdgeRef {
        EdgeRef { polygon, edge }
    }
}

/// Identifies edge `a` with edge `b` (reversed); a point `x` on `a` is the
/// point `x + translation` on `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub a: EdgeRef,
    pub b: EdgeRef,
    pub translation: Vec2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedPoint {
    pub polygon: usize,
    pub position: Vec2,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    BadIndex { polygon: usize, edge: usize },
    TooFewVertices { polygon: usize },
    DegenerateVertex { polygon: usize, vertex: usize },
    NotCounterclockwise { polygon: usize },
    SelfIntersecting { polygon: usize },
    UnmatchedEdge { polygon: usize, edge: usize },
    EdgeGluedTwice { polygon: usize, edge: usize },
    NonParallelGluing { gluing: usize },
    SameOrientationGluing { gluing: usize },
    LengthMismatch { gluing: usize },
    TranslationMismatch { gluing: usize },
    FieldMismatch { found: u64 },
    ConeAngleNotMultipleOf2Pi { class: usize },
    MarkOutside { label: String },
    MarkAtSingularity { label: String },
}

/// One vertex class with its total cone angle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexClass {
    pub id: usize,
    /// Corners `(polygon, vertex)` in counterclockwise order around the point.
    pub corners: Vec<(usize, usize)>,
    /// Cone angle as a multiple of pi.
    pub angle_pi: u64,
    /// Zero order `k` with angle `2(k+1)pi`.
    pub order: i64,
    pub representative: (usize, usize),
}

impl VertexClass {
    pub fn is_singular(&self) -> bool {
        self.angle_pi != 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingularityReport {
    pub classes: Vec<VertexClass>,
}

impl SingularityReport {
    pub fn singular(&self) -> impl Iterator<Item = &VertexClass> {
        self.classes.iter().filter(|c| c.is_singular())
    }

    /// Sorted cone angles (multiples of pi) of the singular classes.
    pub fn singular_angles(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.singular().map(|c| c.angle_pi).collect();
        v.sort_unstable();
        v
    }
}

#[derive(Debug)]
struct Corners {
    class_of: HashMap<(usize, usize), usize>,
    report: std::result::Result<SingularityReport, Error>,
}

#[derive(Debug)]
pub struct Surface {
    field: u64,
    polygons: Vec<Polygon>,
    gluings: Vec<Gluing>,
    marked_points: Vec<MarkedPoint>,
    partner: HashMap<EdgeRef, (EdgeRef, Vec2)>,
    corners: OnceLock<Corners>,
}

impl Clone for Surface {
    fn clone(&self) -> Surface {
        Surface::from_parts(self.field, self.polygons.clone(), self.gluings.clone(), self.marked_points.clone())
    }
}

impl PartialEq for Surface {
    fn eq(&self, o: &Surface) -> bool {
        self.field == o.field
            && self.polygons == o.polygons
            && self.gluings == o.gluings
            && self.marked_points == o.marked_points
    }
}

impl Eq for Surface {}

impl Surface {
    /// Builds and validates a surface from edge pairs; translations are derived
    /// from the vertex coordinates and marked points are canonicalized.
    pub fn new(field: u64, polygons: Vec<Polygon>, pairs: Vec<(EdgeRef, EdgeRef)>, marks: Vec<MarkedPoint>) -> Result<Surface> {
        let mut bad = Vec::new();
        let mut gluings = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let ok = |e: &EdgeRef| e.polygon < polygons.len() && e.edge < polygons[e.polygon].len();
            if !ok(&a) {
                bad.push(Violation::BadIndex { polygon: a.polygon, edge: a.edge });
                continue;
            }
            if !ok(&b) {
                bad.push(Violation::BadIndex { polygon: b.polygon, edge: b.edge });
                continue;
            }
            let translation = polygons[b.polygon].vertex(b.edge + 1) - polygons[a.polygon].vertex(a.edge);
            gluings.push(Gluing { a, b, translation });
        }
        if !bad.is_empty() {
            return Err(Error::InvalidSurface(bad));
        }
        let s = Surface::from_parts(field, polygons, gluings, Vec::new());
        let v = s.validate();
        if !v.is_empty() {
            return Err(Error::InvalidSurface(v));
        }
        s.with_marked_points(marks)
    }

    /// Unchecked constructor; `validate` reports what is wrong.
    pub fn from_parts(field: u64, polygons: Vec<Polygon>, gluings: Vec<Gluing>, marked_points: Vec<MarkedPoint>) -> Surface {
        let mut partner = HashMap::new();
        for g in &gluings {
            partner.entry(g.a).or_insert((g.b, g.translation.clone()));
            partner.entry(g.b).or_insert((g.a, -&g.translation));
        }
        Surface { field, polygons, gluings, marked_points, partner, corners: OnceLock::new() }
    }

    /// Replaces the marked points, canonicalizing boundary positions.
    pub fn with_marked_points(&self, marks: Vec<MarkedPoint>) -> Result<Surface> {
        let mut out = Vec::with_capacity(marks.len());
        let mut bad = Vec::new();
        for m in marks {
            if m.polygon >= self.polygons.len() || !self.polygons[m.polygon].contains(&m.position) {
                bad.push(Violation::MarkOutside { label: m.label });
                continue;
            }
            if let Location::AtVertex(i) = self.polygons[m.polygon].locate(&m.position) {
                if self.class_of_corner(m.polygon, i).is_some_and(|c| self.vertex_class(c).is_singular()) {
                    bad.push(Violation::MarkAtSingularity { label: m.label });
                    continue;
                }
            }
            let (polygon, position) = self.representatives(m.polygon, &m.position).into_iter().min_by(|a, b| {
                let ka = self.rep_key(a.0, &a.1);
                let kb = self.rep_key(b.0, &b.1);
                ka.cmp(&kb)
            }).expect("at least one representative");
            out.push(MarkedPoint { polygon, position, label: m.label });
        }
        if !bad.is_empty() {
            return Err(Error::InvalidSurface(bad));
        }
        Ok(Surface::from_parts(self.field, self.polygons.clone(), self.gluings.clone(), out))
    }

    // Ordering key used for canonical representatives: smallest (polygon, edge)
    // for edge points, smallest (polygon, vertex) for vertices.
    fn rep_key(&self, polygon: usize, p: &Vec2) -> (usize, usize) {
        match self.polygons[polygon].locate(p) {
            Location::OnEdge(e) => (polygon, e),
            Location::AtVertex(v) => (polygon, v),
            _ => (polygon, 0),
        }
    }

    pub fn add_marked_point(&self, polygon: usize, position: Vec2, label: &str) -> Result<Surface> {
        let mut marks = self.marked_points.clone();
        marks.push(MarkedPoint { polygon, position, label: label.to_string() });
        self.with_marked_points(marks)
    }

    pub fn field(&self) -> u64 {
        self.field
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn polygon(&self, i: usize) -> &Polygon {
        &self.polygons[i]
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn marked_points(&self) -> &[MarkedPoint] {
        &self.marked_points
    }

    pub fn marked_point(&self, label: &str) -> Option<&MarkedPoint> {
        self.marked_points.iter().find(|m| m.label == label)
    }

    /// The edge glued to `e` and the translation carrying `e` onto it.
    pub fn partner(&self, e: EdgeRef) -> Option<(EdgeRef, &Vec2)> {
        self.partner.get(&e).map(|(f, t)| (*f, t))
    }

    /// Next corner counterclockwise around the same point.
    pub fn next_corner(&self, polygon: usize, vertex: usize) -> Option<(usize, usize)> {
        let n = self.polygons[polygon].len();
        let (f, _) = self.partner(EdgeRef::new(polygon, (vertex + n - 1) % n))?;
        Some((f.polygon, f.edge))
    }

    /// All `(polygon, position)` pairs describing the same surface point.
    pub fn representatives(&self, polygon: usize, p: &Vec2) -> Vec<(usize, Vec2)> {
        match self.polygons[polygon].locate(p) {
            Location::OnEdge(e) => {
                let mut v = vec![(polygon, p.clone())];
                if let Some((f, t)) = self.partner(EdgeRef::new(polygon, e)) {
                    v.push((f.polygon, p + t));
                }
                v
            }
            Location::AtVertex(i) => match self.class_of_corner(polygon, i) {
                Some(c) => self
                    .vertex_class(c)
                    .corners
                    .iter()
                    .map(|&(q, j)| (q, self.polygons[q].vertex(j).clone()))
                    .collect(),
                None => vec![(polygon, p.clone())],
            },
            _ => vec![(polygon, p.clone())],
        }
    }

    fn corners(&self) -> &Corners {
        self.corners.get_or_init(|| self.compute_corners())
    }

    fn compute_corners(&self) -> Corners {
        let mut class_of = HashMap::new();
        let mut classes = Vec::new();
        let mut failure = None;
        for (p, poly) in self.polygons.iter().enumerate() {
            for i in 0..poly.len() {
                if class_of.contains_key(&(p, i)) {
                    continue;
                }
                let id = classes.len();
                let mut corners = Vec::new();
                let mut cur = (p, i);
                let mut half_turns = 0u64;
                let mut closed = true;
                loop {
                    class_of.insert(cur, id);
                    corners.push(cur);
                    let poly = &self.polygons[cur.0];
                    half_turns += geom::half_turn_crossings(&poly.edge(cur.1), &poly.corner_end(cur.1));
                    let Some(next) = self.next_corner(cur.0, cur.1) else {
                        closed = false;
                        break;
                    };
                    let next_out = self.polygons[next.0].edge(next.1);
                    if !next_out.same_direction(&poly.corner_end(cur.1)) {
                        closed = false;
                    }
                    if next == (p, i) {
                        break;
                    }
                    if class_of.contains_key(&next) {
                        closed = false;
                        break;
                    }
                    cur = next;
                }
                if (!closed || half_turns % 2 != 0 || half_turns == 0) && failure.is_none() {
                    failure = Some(Error::NonMultipleOf2Pi(id));
                }
                let representative = *corners.iter().min().expect("nonempty class");
                classes.push(VertexClass {
                    id,
                    corners,
                    angle_pi: half_turns,
                    order: half_turns as i64 / 2 - 1,
                    representative,
                });
            }
        }
        let report = match failure {
            Some(e) => Err(e),
            None => Ok(SingularityReport { classes }),
        };
        Corners { class_of, report }
    }

    pub fn class_of_corner(&self, polygon: usize, vertex: usize) -> Option<usize> {
        let c = self.corners();
        c.report.as_ref().ok()?;
        c.class_of.get(&(polygon, vertex)).copied()
    }

    pub fn vertex_class(&self, id: usize) -> &VertexClass {
        &self.corners().report.as_ref().expect("valid surface").classes[id]
    }

    /// Vertex classes with exact cone angles.
    pub fn singularities(&self) -> Result<SingularityReport> {
        self.corners().report.clone()
    }

    pub fn is_singular_corner(&self, polygon: usize, vertex: usize) -> bool {
        self.class_of_corner(polygon, vertex).is_some_and(|c| self.vertex_class(c).is_singular())
    }

    pub fn euler_characteristic(&self) -> Result<i64> {
        let v = self.singularities()?.classes.len() as i64;
        Ok(v - self.gluings.len() as i64 + self.polygons.len() as i64)
    }

    /// Genus from the Euler characteristic, cross-checked against the cone angles.
    pub fn genus(&self) -> Result<i64> {
        let chi = self.euler_characteristic()?;
        let angle_sum: i64 = self.singularities()?.classes.iter().map(|c| c.order).sum();
        if chi % 2 != 0 || -chi != angle_sum {
            return Err(Error::InconsistentTopology { euler: (2 - chi) / 2, angle_sum });
        }
        Ok((2 - chi) / 2)
    }

    pub fn area(&self) -> Scalar {
        self.polygons.iter().fold(Scalar::zero(), |acc, p| acc + p.area())
    }

    /// Number of connected components of the glued complex.
    pub fn components(&self) -> usize {
        let n = self.polygons.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for g in &self.gluings {
            let (a, b) = (find(&mut parent, g.a.polygon), find(&mut parent, g.b.polygon));
            parent[a] = b;
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Checks every structural invariant; an empty list means the surface is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (p, poly) in self.polygons.iter().enumerate() {
            if poly.len() < 3 {
                out.push(Violation::TooFewVertices { polygon: p });
                continue;
            }
            for v in poly.vertices.iter() {
                if v.field() != 0 && v.field() != self.field {
                    out.push(Violation::FieldMismatch { found: v.field() });
                }
            }
            let mut degenerate = false;
            for i in 0..poly.len() {
                let (e, w) = (poly.edge(i), poly.corner_end(i));
                if e.is_zero() || w.is_zero() || e.same_direction(&w) {
                    out.push(Violation::DegenerateVertex { polygon: p, vertex: i });
                    degenerate = true;
                }
            }
            if degenerate {
                continue;
            }
            if !geom::signed_area2(&poly.vertices).is_positive() {
                out.push(Violation::NotCounterclockwise { polygon: p });
            }
            if self_intersects(poly) {
                out.push(Violation::SelfIntersecting { polygon: p });
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut seen: BTreeMap<EdgeRef, usize> = BTreeMap::new();
        for (k, g) in self.gluings.iter().enumerate() {
            for e in [g.a, g.b] {
                if e.polygon >= self.polygons.len() || e.edge >= self.polygons[e.polygon].len() {
                    out.push(Violation::BadIndex { polygon: e.polygon, edge: e.edge });
                    continue;
                }
                if seen.insert(e, k).is_some() {
                    out.push(Violation::EdgeGluedTwice { polygon: e.polygon, edge: e.edge });
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (p, poly) in self.polygons.iter().enumerate() {
            for i in 0..poly.len() {
                if !seen.contains_key(&EdgeRef::new(p, i)) {
                    out.push(Violation::UnmatchedEdge { polygon: p, edge: i });
                }
            }
        }
        for (k, g) in self.gluings.iter().enumerate() {
            let (pa, pb) = (&self.polygons[g.a.polygon], &self.polygons[g.b.polygon]);
            let (ea, eb) = (pa.edge(g.a.edge), pb.edge(g.b.edge));
            if !ea.is_parallel(&eb) {
                out.push(Violation::NonParallelGluing { gluing: k });
            } else if ea.dot(&eb).is_positive() {
                out.push(Violation::SameOrientationGluing { gluing: k });
            } else if ea != -&eb {
                out.push(Violation::LengthMismatch { gluing: k });
            } else if &(pa.vertex(g.a.edge) + &g.translation) != pb.vertex(g.b.edge + 1)
                || &(pa.vertex(g.a.edge + 1) + &g.translation) != pb.vertex(g.b.edge)
            {
                out.push(Violation::TranslationMismatch { gluing: k });
            }
        }
        if !out.is_empty() {
            return out;
        }
        if let Err(Error::NonMultipleOf2Pi(class)) = self.singularities() {
            out.push(Violation::ConeAngleNotMultipleOf2Pi { class });
        }
        out
    }
}

fn self_intersects(poly: &Polygon) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b) = (poly.vertex(i), poly.vertex(i + 1));
            let (c, d) = (poly.vertex(j), poly.vertex(j + 1));
            if adjacent {
                // adjacent edges may only share their common vertex
                let (far1, far2) = if j == i + 1 { (a, d) } else { (b, c) };
                if geom::on_segment(c, d, far1) || geom::on_segment(a, b, far2) {
                    return true;
                }
            } else if geom::segments_touch(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Polygon> {
        vec![Polygon::new(vec![Vec2::ints(0, 0), Vec2::ints(1, 0), Vec2::ints(1, 1), Vec2::ints(0, 1)])]
    }

    #[test]
    fn locate_points() {
        let p = &square()[0];
        assert_eq!(p.locate(&Vec2::new(Scalar::ratio(1, 2), Scalar::ratio(1, 2))), Location::Interior);
        assert_eq!(p.locate(&Vec2::new(Scalar::ratio(1, 2), Scalar::zero())), Location::OnEdge(0));
        assert_eq!(p.locate(&Vec2::ints(1, 1)), Location::AtVertex(2));
        assert_eq!(p.locate(&Vec2::ints(2, 0)), Location::Outside);
    }

    #[test]
    fn unglued_edge_is_reported() {
        let s = Surface::from_parts(
            0,
            square(),
            vec![Gluing { a: EdgeRef::new(0, 0), b: EdgeRef::new(0, 2), translation: Vec2::ints(0, 1) }],
            vec![],
        );
        let v = s.validate();
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| matches!(x, Violation::UnmatchedEdge { .. })));
    }

    #[test]
    fn non_parallel_gluing_is_reported() {
        let s = Surface::from_parts(
            0,
            square(),
            vec![
                Gluing { a: EdgeRef::new(0, 0), b: EdgeRef::new(0, 1), translation: Vec2::ints(1, 0) },
                Gluing { a: EdgeRef::new(0, 2), b: EdgeRef::new(0, 3), translation: Vec2::ints(0, 0) },
            ],
            vec![],
        );
        let v = s.validate();
        assert_eq!(v, vec![Violation::NonParallelGluing { gluing: 0 }, Violation::NonParallelGluing { gluing: 1 }]);
    }

    #[test]
    fn wrong_translation_is_reported() {
        let s = Surface::from_parts(
            0,
            square(),
            vec![
                Gluing { a: EdgeRef::new(0, 0), b: EdgeRef::new(0, 2), translation: Vec2::ints(0, 2) },
                Gluing { a: EdgeRef::new(0, 1), b: EdgeRef::new(0, 3), translation: Vec2::ints(-1, 0) },
            ],
            vec![],
        );
        assert_eq!(s.validate(), vec![Violation::TranslationMismatch { gluing: 0 }]);
    }

    #[test]
    fn clockwise_polygon_is_reported() {
        let mut polys = square();
        polys[0].vertices.reverse();
        let s = Surface::from_parts(0, polys, vec![], vec![]);
        assert!(s.validate().contains(&Violation::NotCounterclockwise { polygon: 0 }));
    }

    #[test]
    fn bowtie_is_self_intersecting() {
        let p = Polygon::new(vec![Vec2::ints(0, 0), Vec2::ints(2, 2), Vec2::ints(2, 0), Vec2::ints(0, 2)]);
        assert!(self_intersects(&p));
        assert!(!self_intersects(&square()[0]));
    }

    #[test]
    fn marks_on_edges_are_canonicalized() {
        let s = Surface::new(
            0,
            square(),
            vec![(EdgeRef::new(0, 0), EdgeRef::new(0, 2)), (EdgeRef::new(0, 1), EdgeRef::new(0, 3))],
            vec![MarkedPoint { polygon: 0, position: Vec2::new(Scalar::ratio(1, 3), Scalar::one()), label: "p".into() }],
        )
        .unwrap();
        // top edge (0,2) is glued to bottom edge (0,0): the bottom copy wins
        assert_eq!(s.marked_points()[0].position, Vec2::new(Scalar::ratio(1, 3), Scalar::zero()));
    }

    #[test]
    fn mark_outside_is_rejected() {
        let r = Surface::new(
            0,
            square(),
            vec![(EdgeRef::new(0, 0), EdgeRef::new(0, 2)), (EdgeRef::new(0, 1), EdgeRef::new(0, 3))],
            vec![MarkedPoint { polygon: 0, position: Vec2::ints(3, 3), label: "q".into() }],
        );
        assert!(matches!(r, Err(Error::InvalidSurface(v)) if v == vec![Violation::MarkOutside { label: "q".into() }]));
    }
}
