//! Exact straight-line flow across the polygons of a surface.
//!
//! A trajectory is advanced polygon by polygon with exact ray casting. Regular
//! identified vertices (cone angle `2pi`) are passed straight through; the walk
//! stops at singularities, optionally at marked points, on returning to its
//! start, or once the travelled length exceeds the cap. Lengths are compared
//! through squared norms so everything stays inside the field.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::action::Direction;
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::geom::{self, Vec2};
use crate::surface::{EdgeRef, Location, MarkedPoint, Polygon, Surface};

/// Hard limit on polygon crossings per trace.
pub const MAX_STEPS: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SurfacePoint {
    pub polygon: usize,
    pub position: Vec2,
}

impl SurfacePoint {
    pub fn new(polygon: usize, position: Vec2) -> SurfacePoint {
        SurfacePoint { polygon, position }
    }
}

impl From<&MarkedPoint> for SurfacePoint {
    fn from(m: &MarkedPoint) -> SurfacePoint {
        SurfacePoint::new(m.polygon, m.position.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceStart {
    /// A surface point; at a singular vertex the direction must lie in the
    /// sector of the named corner.
    Point(SurfacePoint),
    /// The outgoing sector of corner `(polygon, vertex)`.
    Corner { polygon: usize, vertex: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TraceKind {
    HitSingularity { class: usize },
    HitMarkedPoint { label: String },
    ClosedUp,
    /// Reached the goal point given in the options.
    ReachedGoal,
    CapExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub polygon: usize,
    pub entry: Vec2,
    pub exit: Vec2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: TraceKind,
    pub path: Vec<Segment>,
    /// Sum of the segment vectors.
    pub holonomy: Vec2,
    pub length_sq: Scalar,
    /// Corner `(polygon, vertex)` whose outgoing sector contains the reversed
    /// direction, when the trace ended on a vertex.
    pub end_corner: Option<(usize, usize)>,
}

impl TraceEvent {
    /// Exact length when it lies in the field.
    pub fn length(&self, field: u64) -> Option<Scalar> {
        self.length_sq.sqrt_in_field(field)
    }

    pub fn end_point(&self) -> Option<SurfacePoint> {
        self.path.last().map(|s| SurfacePoint::new(s.polygon, s.exit.clone()))
    }
}

#[derive(Clone, Debug, Default)]
pub struct TraceOptions {
    pub stop_at_marks: bool,
    /// Stop on reaching this point; it takes precedence over marks there.
    pub goal: Option<SurfacePoint>,
}

#[derive(Clone, Debug)]
pub(crate) enum Hit {
    Edge(usize),
    Vertex(usize),
}

/// First boundary contact of the ray `pos + t v`, `t > 0`, inside a polygon.
pub(crate) fn ray_cast(poly: &Polygon, pos: &Vec2, v: &Vec2) -> Option<(Scalar, Hit)> {
    let n = poly.len();
    let vv = v.dot(v);
    let mut best: Option<Scalar> = None;
    let mut best_edge = None;
    for i in 0..n {
        let a = poly.vertex(i);
        let e = poly.edge(i);
        let denom = v.cross(&e);
        let ap = a - pos;
        let candidates: Vec<Scalar> = if denom.is_zero() {
            if !ap.cross(v).is_zero() {
                continue;
            }
            [a, poly.vertex(i + 1)].iter().map(|x| (*x - pos).dot(v) / &vv).collect()
        } else {
            let t = ap.cross(&e) / &denom;
            let s = ap.cross(v) / &denom;
            if s.is_negative() || s > Scalar::one() {
                continue;
            }
            vec![t]
        };
        for t in candidates {
            if !t.is_positive() {
                continue;
            }
            if best.as_ref().is_none_or(|b| t < *b) {
                best = Some(t);
                best_edge = Some(i);
            }
        }
    }
    let t = best?;
    let hit = pos + &v.scale(&t);
    let h = match poly.vertices.iter().position(|x| *x == hit) {
        Some(j) => Hit::Vertex(j),
        None => Hit::Edge(best_edge.expect("edge recorded with best")),
    };
    Some((t, h))
}

/// Corner of a regular vertex class through which a trajectory arriving at
/// corner `(polygon, vertex)` with direction `v` continues straight.
fn continue_through_vertex(s: &Surface, polygon: usize, vertex: usize, v: &Vec2) -> Option<(usize, usize)> {
    let poly = s.polygon(polygon);
    let back = -v;
    let w = poly.corner_end(vertex);
    if !back.same_direction(&w) && geom::in_open_sector(&back, &w, v) {
        return Some((polygon, vertex));
    }
    let mut cur = s.next_corner(polygon, vertex)?;
    for _ in 0..4096 {
        let p = s.polygon(cur.0);
        if geom::in_sector(&p.edge(cur.1), &p.corner_end(cur.1), v) {
            return Some(cur);
        }
        cur = s.next_corner(cur.0, cur.1)?;
    }
    None
}

/// Corner of the class at `(polygon, vertex)` whose half-open sector holds `v`.
fn sector_corner(s: &Surface, polygon: usize, vertex: usize, v: &Vec2) -> Option<(usize, usize)> {
    let class = s.class_of_corner(polygon, vertex)?;
    s.vertex_class(class).corners.iter().copied().find(|&(q, k)| {
        let p = s.polygon(q);
        geom::in_sector(&p.edge(k), &p.corner_end(k), v)
    })
}

/// Outgoing corner for the reversed direction `-v` of a trajectory that
/// arrived at corner `(polygon, vertex)` travelling along `v`.
fn arrival_corner(s: &Surface, polygon: usize, vertex: usize, v: &Vec2) -> Option<(usize, usize)> {
    let p = s.polygon(polygon);
    if geom::in_sector(&p.edge(vertex), &p.corner_end(vertex), &-v) {
        Some((polygon, vertex))
    } else {
        s.next_corner(polygon, vertex)
    }
}

#[derive(Clone)]
enum Target {
    Start,
    Mark(String),
    Goal,
}

/// Resolves a start into a polygon position from which `v` points inward.
fn resolve_start(s: &Surface, start: &TraceStart, v: &Vec2) -> Result<(usize, Vec2, bool)> {
    match start {
        TraceStart::Corner { polygon, vertex } => {
            let p = s.polygons().get(*polygon).ok_or(Error::PointOffSurface)?;
            if *vertex >= p.len() || !geom::in_sector(&p.edge(*vertex), &p.corner_end(*vertex), v) {
                return Err(Error::AmbiguousStart);
            }
            let singular = s.is_singular_corner(*polygon, *vertex);
            Ok((*polygon, p.vertex(*vertex).clone(), singular))
        }
        TraceStart::Point(pt) => {
            let p = s.polygons().get(pt.polygon).ok_or(Error::PointOffSurface)?;
            match p.locate(&pt.position) {
                Location::Outside => Err(Error::PointOffSurface),
                Location::Interior => Ok((pt.polygon, pt.position.clone(), false)),
                Location::OnEdge(i) => {
                    if p.edge(i).cross(v).is_negative() {
                        let (f, t) = s.partner(EdgeRef::new(pt.polygon, i)).ok_or(Error::PointOffSurface)?;
                        Ok((f.polygon, &pt.position + t, false))
                    } else {
                        Ok((pt.polygon, pt.position.clone(), false))
                    }
                }
                Location::AtVertex(j) => {
                    if s.is_singular_corner(pt.polygon, j) {
                        if geom::in_sector(&p.edge(j), &p.corner_end(j), v) {
                            Ok((pt.polygon, pt.position.clone(), true))
                        } else {
                            Err(Error::AmbiguousStart)
                        }
                    } else {
                        let (q, k) = sector_corner(s, pt.polygon, j, v).ok_or(Error::PointOffSurface)?;
                        Ok((q, s.polygon(q).vertex(k).clone(), false))
                    }
                }
            }
        }
    }
}

/// Follows the straight line from `start` in direction `v` until it stops.
/// `cap` bounds the Euclidean length travelled.
pub fn trace(s: &Surface, start: &TraceStart, v: &Vec2, cap: &Scalar, opts: &TraceOptions) -> Result<TraceEvent> {
    if !cap.is_positive() {
        return Err(Error::NonPositive);
    }
    trace_sq(s, start, v, &(cap * cap), opts)
}

/// As [`trace`], with the cap given as a squared length.
pub fn trace_sq(s: &Surface, start: &TraceStart, v: &Vec2, cap_sq: &Scalar, opts: &TraceOptions) -> Result<TraceEvent> {
    if v.is_zero() {
        return Err(Error::ZeroInput);
    }
    let (mut poly_idx, mut pos, singular_start) = resolve_start(s, start, v)?;

    let mut targets: HashMap<usize, Vec<(Vec2, Target)>> = HashMap::new();
    if !singular_start {
        let (p0, x0) = match start {
            TraceStart::Point(pt) => (pt.polygon, pt.position.clone()),
            TraceStart::Corner { polygon, vertex } => (*polygon, s.polygon(*polygon).vertex(*vertex).clone()),
        };
        for (q, x) in s.representatives(p0, &x0) {
            targets.entry(q).or_default().push((x, Target::Start));
        }
    }
    if let Some(g) = &opts.goal {
        for (q, x) in s.representatives(g.polygon, &g.position) {
            targets.entry(q).or_default().push((x, Target::Goal));
        }
    }
    if opts.stop_at_marks {
        for m in s.marked_points() {
            for (q, x) in s.representatives(m.polygon, &m.position) {
                targets.entry(q).or_default().push((x, Target::Mark(m.label.clone())));
            }
        }
    }

    let vv = v.dot(v);
    let mut travelled = Scalar::zero();
    let mut path = Vec::new();
    let finish = |kind, path: Vec<Segment>, travelled: &Scalar, end_corner| {
        let holonomy = v.scale(travelled);
        let length_sq = holonomy.norm_sq();
        TraceEvent { kind, path, holonomy, length_sq, end_corner }
    };

    for _ in 0..MAX_STEPS {
        let poly = s.polygon(poly_idx);
        let (t, hit) = ray_cast(poly, &pos, v).ok_or(Error::PointOffSurface)?;

        // nearest target on (pos, pos + t v]
        let mut found: Option<(Scalar, Target, Vec2)> = None;
        if let Some(list) = targets.get(&poly_idx) {
            for (x, tag) in list {
                let d = x - &pos;
                if !d.cross(v).is_zero() {
                    continue;
                }
                let tau = d.dot(v) / &vv;
                let better = found.as_ref().is_none_or(|(b, prev, _)| {
                    tau < *b || (tau == *b && matches!(tag, Target::Goal) && !matches!(prev, Target::Goal))
                });
                if tau.is_positive() && tau <= t && better {
                    found = Some((tau, tag.clone(), x.clone()));
                }
            }
        }

        let step = found.as_ref().map(|(tau, _, _)| tau.clone()).unwrap_or_else(|| t.clone());
        let next_travelled = &travelled + &step;
        let exit = &pos + &v.scale(&step);
        path.push(Segment { polygon: poly_idx, entry: pos.clone(), exit: exit.clone() });
        if &(&next_travelled * &next_travelled) * &vv > *cap_sq {
            return Ok(finish(TraceKind::CapExceeded, path, &next_travelled, None));
        }
        travelled = next_travelled;

        if let Some((_, tag, x)) = found {
            let corner = match poly.locate(&x) {
                Location::AtVertex(j) => arrival_corner(s, poly_idx, j, v),
                _ => None,
            };
            let kind = match tag {
                Target::Start => TraceKind::ClosedUp,
                Target::Mark(label) => TraceKind::HitMarkedPoint { label },
                Target::Goal => TraceKind::ReachedGoal,
            };
            return Ok(finish(kind, path, &travelled, corner));
        }

        match hit {
            Hit::Edge(i) => {
                let (f, tr) = s.partner(EdgeRef::new(poly_idx, i)).ok_or(Error::PointOffSurface)?;
                pos = &exit + tr;
                poly_idx = f.polygon;
            }
            Hit::Vertex(j) => {
                let class = s.class_of_corner(poly_idx, j).ok_or(Error::PointOffSurface)?;
                if s.vertex_class(class).is_singular() {
                    let corner = arrival_corner(s, poly_idx, j, v);
                    return Ok(finish(TraceKind::HitSingularity { class }, path, &travelled, corner));
                }
                let (q, k) = continue_through_vertex(s, poly_idx, j, v).ok_or(Error::PointOffSurface)?;
                poly_idx = q;
                pos = s.polygon(q).vertex(k).clone();
            }
        }
    }
    Ok(finish(TraceKind::CapExceeded, path, &travelled, None))
}

/// Moves `start` along `v` for parameter time `t >= 0`, so the displacement
/// is `t v`. Fails with `OnBoundary` if the flow line runs into a singularity.
pub fn flow_point(s: &Surface, start: &SurfacePoint, v: &Vec2, t: &Scalar) -> Result<SurfacePoint> {
    if v.is_zero() {
        return Err(Error::ZeroInput);
    }
    if t.is_negative() {
        return Err(Error::NonPositive);
    }
    if t.is_zero() {
        return Ok(start.clone());
    }
    let (mut poly_idx, mut pos, singular) = resolve_start(s, &TraceStart::Point(start.clone()), v)?;
    if singular {
        return Err(Error::OnBoundary);
    }
    let mut rem = t.clone();
    for _ in 0..MAX_STEPS {
        let (th, hit) = ray_cast(s.polygon(poly_idx), &pos, v).ok_or(Error::PointOffSurface)?;
        if rem <= th {
            return Ok(SurfacePoint::new(poly_idx, &pos + &v.scale(&rem)));
        }
        rem = &rem - &th;
        let exit = &pos + &v.scale(&th);
        match hit {
            Hit::Edge(i) => {
                let (f, tr) = s.partner(EdgeRef::new(poly_idx, i)).ok_or(Error::PointOffSurface)?;
                pos = &exit + tr;
                poly_idx = f.polygon;
            }
            Hit::Vertex(j) => {
                if s.is_singular_corner(poly_idx, j) {
                    return Err(Error::OnBoundary);
                }
                let (q, k) = continue_through_vertex(s, poly_idx, j, v).ok_or(Error::PointOffSurface)?;
                poly_idx = q;
                pos = s.polygon(q).vertex(k).clone();
            }
        }
    }
    Err(Error::InvalidParams("flow exceeded the step limit".into()))
}

/// Outgoing sectors in direction `v`: corners of singular classes whose
/// half-open sector holds `v`, in class then corner order.
pub fn outgoing_sectors(s: &Surface, v: &Vec2) -> Result<Vec<(usize, usize)>> {
    let rep = s.singularities()?;
    let mut out = Vec::new();
    for class in rep.singular() {
        for &(p, i) in &class.corners {
            let poly = s.polygon(p);
            if geom::in_sector(&poly.edge(i), &poly.corner_end(i), v) {
                out.push((p, i));
            }
        }
    }
    Ok(out)
}

/// One trace per outgoing sector of every singularity in direction `v`.
pub fn separatrices(s: &Surface, v: &Vec2, cap: &Scalar) -> Result<Vec<TraceEvent>> {
    if !cap.is_positive() {
        return Err(Error::NonPositive);
    }
    separatrices_sq(s, v, &(cap * cap), &TraceOptions::default())
}

pub fn separatrices_sq(s: &Surface, v: &Vec2, cap_sq: &Scalar, opts: &TraceOptions) -> Result<Vec<TraceEvent>> {
    let sectors = outgoing_sectors(s, v)?;
    sectors
        .par_iter()
        .map(|&(p, i)| trace_sq(s, &TraceStart::Corner { polygon: p, vertex: i }, v, cap_sq, opts))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaddleConnection {
    pub start_class: usize,
    pub end_class: usize,
    pub start_corner: (usize, usize),
    pub end_corner: (usize, usize),
    pub holonomy: Vec2,
    pub length_sq: Scalar,
    pub path: Vec<Segment>,
}

/// Saddle connections of length at most `cap` in direction `v`, one per
/// outgoing sector that reaches a singularity.
pub fn saddle_connections_in_direction(s: &Surface, v: &Vec2, cap: &Scalar) -> Result<Vec<SaddleConnection>> {
    if !cap.is_positive() {
        return Err(Error::NonPositive);
    }
    saddle_connections_sq(s, v, &(cap * cap))
}

pub fn saddle_connections_sq(s: &Surface, v: &Vec2, cap_sq: &Scalar) -> Result<Vec<SaddleConnection>> {
    let sectors = outgoing_sectors(s, v)?;
    let traces = separatrices_sq(s, v, cap_sq, &TraceOptions::default())?;
    let mut out = Vec::new();
    for (&(p, i), ev) in sectors.iter().zip(traces) {
        if let TraceKind::HitSingularity { class } = ev.kind {
            out.push(SaddleConnection {
                start_class: s.class_of_corner(p, i).expect("singular corner has a class"),
                end_class: class,
                start_corner: (p, i),
                end_corner: ev.end_corner.expect("singular hit records its corner"),
                holonomy: ev.holonomy,
                length_sq: ev.length_sq,
                path: ev.path,
            });
        }
    }
    Ok(out)
}

/// Outcome of the bounded connection-point search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConnectionPointReport {
    /// Every separatrix found through the point extends to a saddle connection.
    AllExtended(usize),
    /// A separatrix through the point did not reach a singularity within the cap.
    FoundNonExtending { direction: Vec2, incoming_length_sq: Scalar },
    /// The development budget ran out before the search was complete.
    Exhausted { checked: usize },
}

/// Development budget for [`is_connection_point_up_to`].
pub const MAX_DEVELOPED_COPIES: usize = 50_000;

fn l1_extent(poly: &Polygon) -> Scalar {
    (0..poly.len()).fold(Scalar::zero(), |acc, i| {
        let e = poly.edge(i);
        acc + e.x.abs() + e.y.abs()
    })
}

/// Bounded check that every separatrix of length at most `cap` reaching `p`
/// continues to a singularity within a further length `cap`.
///
/// Candidate directions come from developing the polygons around `p` and
/// collecting singular vertices within distance `cap`; each candidate is
/// confirmed by tracing backwards from `p`.
pub fn is_connection_point_up_to(s: &Surface, p: &MarkedPoint, cap: &Scalar) -> Result<ConnectionPointReport> {
    if !cap.is_positive() {
        return Err(Error::NonPositive);
    }
    let rep = s.singularities()?;
    if rep.singular().next().is_none() {
        return Ok(ConnectionPointReport::AllExtended(0));
    }
    let cap_sq = cap * cap;
    let origin = p.position.clone();

    // development BFS over (polygon, offset) copies
    let extents: Vec<Scalar> = s.polygons().iter().map(l1_extent).collect();
    let mut seen: std::collections::HashSet<(usize, Vec2)> = Default::default();
    let mut queue = std::collections::VecDeque::new();
    let start = (p.polygon, Vec2::zero());
    seen.insert(start.clone());
    queue.push_back(start);
    let mut candidates: Vec<Vec2> = Vec::new();
    let mut exhausted = false;
    while let Some((q, off)) = queue.pop_front() {
        let poly = s.polygon(q);
        for j in 0..poly.len() {
            if s.is_singular_corner(q, j) {
                let w = &origin - &(poly.vertex(j) + &off);
                if !w.is_zero() && w.norm_sq() <= cap_sq {
                    candidates.push(w);
                }
            }
        }
        for i in 0..poly.len() {
            let Some((f, t)) = s.partner(EdgeRef::new(q, i)) else { continue };
            let next_off = &off - t;
            let np = s.polygon(f.polygon);
            let reach = cap + &extents[f.polygon];
            let near = np.vertices.iter().any(|x| (&(x + &next_off) - &origin).norm_sq() <= &reach * &reach);
            if !near {
                continue;
            }
            let key = (f.polygon, next_off);
            if seen.contains(&key) {
                continue;
            }
            if seen.len() >= MAX_DEVELOPED_COPIES {
                exhausted = true;
                break;
            }
            seen.insert(key.clone());
            queue.push_back(key);
        }
        if exhausted {
            break;
        }
    }

    // one candidate per oriented direction, shortest first
    candidates.sort_by(|a, b| a.norm_sq().cmp(&b.norm_sq()));
    let mut directions: Vec<Vec2> = Vec::new();
    for w in candidates {
        if !directions.iter().any(|d| d.same_direction(&w)) {
            directions.push(w);
        }
    }

    let opts = TraceOptions::default();
    let start = TraceStart::Point(SurfacePoint::from(p));
    let mut confirmed = 0;
    for w in &directions {
        let back = trace_sq(s, &start, &-w, &cap_sq, &opts)?;
        if !matches!(back.kind, TraceKind::HitSingularity { .. }) {
            continue;
        }
        confirmed += 1;
        let fwd = trace_sq(s, &start, w, &cap_sq, &opts)?;
        if !matches!(fwd.kind, TraceKind::HitSingularity { .. }) {
            return Ok(ConnectionPointReport::FoundNonExtending { direction: w.clone(), incoming_length_sq: back.length_sq });
        }
    }
    if exhausted {
        return Ok(ConnectionPointReport::Exhausted { checked: confirmed });
    }
    Ok(ConnectionPointReport::AllExtended(confirmed))
}

/// Convenience: canonical direction vector of a [`Direction`].
pub fn direction_vector(d: &Direction) -> &Vec2 {
    d.vector()
}
