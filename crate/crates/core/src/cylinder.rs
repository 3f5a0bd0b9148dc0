//! Cylinder decompositions in periodic directions.
//!
//! The surface is first sheared so the direction becomes vertical. Upward
//! separatrices are traced; when all of them end at singularities the
//! polygons are cut into vertical trapezoids at vertex abscissae and along
//! the saddle connections, and trapezoids are merged into cylinders across
//! every vertical line that is not part of a saddle connection.

use std::collections::VecDeque;

use serde::Serialize;

use crate::action::{apply_matrix, horocycle_matrix, normalize_to_vertical, Direction, Mat2};
use crate::error::{Error, Result};
use crate::field::{commensurability_classes, least_common_integer_multiple, Scalar};
use crate::geom::{self, Vec2};
use crate::surface::{EdgeRef, MarkedPoint, Polygon, Surface};
use crate::tracer::{self, SaddleConnection, Segment, SurfacePoint, TraceKind, TraceOptions, TraceStart};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SplitRatio {
    Inside { cylinder: usize, value: Scalar },
    OnBoundary,
}

impl SplitRatio {
    pub fn value(&self) -> Option<&Scalar> {
        match self {
            SplitRatio::Inside { value, .. } => Some(value),
            SplitRatio::OnBoundary => None,
        }
    }

    pub fn cylinder(&self) -> Option<usize> {
        match self {
            SplitRatio::Inside { cylinder, .. } => Some(*cylinder),
            SplitRatio::OnBoundary => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub id: usize,
    pub direction: Direction,
    /// Holonomy of a core curve, pointing along the direction.
    pub core: Vec2,
    pub area: Scalar,
    /// Transverse width and circumference in the sheared frame where the
    /// direction is vertical; their product is the area.
    pub normalized_width: Scalar,
    pub normalized_circumference: Scalar,
    /// `h / w`, exact in the original frame.
    pub inverse_modulus: Scalar,
    /// Indices into the decomposition's saddle connections.
    pub boundary: Vec<usize>,
    /// Marked points strictly inside, with their splitting ratios.
    pub marks: Vec<(String, Scalar)>,
}

impl Cylinder {
    pub fn circumference_sq(&self) -> Scalar {
        self.core.norm_sq()
    }

    /// Circumference, when it lies in the field.
    pub fn circumference(&self, field: u64) -> Option<Scalar> {
        self.circumference_sq().sqrt_in_field(field)
    }

    /// Transverse width, when it lies in the field.
    pub fn width(&self, field: u64) -> Option<Scalar> {
        self.circumference(field).map(|h| &self.area / &h)
    }

    pub fn modulus(&self) -> Scalar {
        self.inverse_modulus.recip().expect("inverse modulus is positive")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DecompositionStatus {
    Complete,
    Undetermined { cap: Scalar },
}

/// Vertical trapezoid of a polygon in the sheared frame.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Piece {
    polygon: usize,
    x0: Scalar,
    x1: Scalar,
    bottom: usize,
    top: usize,
    cylinder: usize,
    /// Transverse coordinate of a point is its abscissa plus this offset.
    offset: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub direction: Direction,
    pub status: DecompositionStatus,
    pub cylinders: Vec<Cylinder>,
    /// Saddle connections in the direction, in the sheared frame.
    pub saddle_connections: Vec<SaddleConnection>,
    /// Marked points lying on cylinder boundaries.
    pub boundary_marks: Vec<String>,
    normalizer: Mat2,
    normalized: Surface,
    pieces: Vec<Piece>,
    /// Left edges of cylinders in transverse coordinates; for a surface
    /// without singularities, the transverse coordinate of a base vertex.
    left: Vec<Scalar>,
    wraps: bool,
}

fn y_at(poly: &Polygon, edge: usize, x: &Scalar) -> Scalar {
    let a = poly.vertex(edge);
    let e = poly.edge(edge);
    &a.y + &(&(x - &a.x) * &e.y) / &e.x
}

fn trapezoid_area(poly: &Polygon, p: &Piece) -> Scalar {
    let h0 = y_at(poly, p.top, &p.x0) - y_at(poly, p.bottom, &p.x0);
    let h1 = y_at(poly, p.top, &p.x1) - y_at(poly, p.bottom, &p.x1);
    &(&p.x1 - &p.x0) * &(h0 + h1) * &Scalar::ratio(1, 2)
}

/// Cuts a polygon into vertical trapezoids along the given abscissae.
fn cut_polygon(poly: &Polygon, index: usize, extra: &[Scalar]) -> Vec<Piece> {
    let mut xs: Vec<Scalar> = poly.vertices.iter().map(|v| v.x.clone()).chain(extra.iter().cloned()).collect();
    xs.sort();
    xs.dedup();
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (xa, xb) = (&w[0], &w[1]);
        let xm = &(xa + xb) * &Scalar::ratio(1, 2);
        let mut crossing: Vec<(Scalar, usize)> = (0..poly.len())
            .filter(|&i| {
                let (a, b) = (&poly.vertex(i).x, &poly.vertex(i + 1).x);
                a != b && a.clone().min(b.clone()) <= *xa && a.clone().max(b.clone()) >= *xb
            })
            .map(|i| (y_at(poly, i, &xm), i))
            .collect();
        crossing.sort();
        for pair in crossing.chunks(2) {
            if let [(_, bottom), (_, top)] = pair {
                out.push(Piece {
                    polygon: index,
                    x0: xa.clone(),
                    x1: xb.clone(),
                    bottom: *bottom,
                    top: *top,
                    cylinder: 0,
                    offset: Scalar::zero(),
                });
            }
        }
    }
    out
}

fn overlap(a: (&Scalar, &Scalar), b: (&Scalar, &Scalar)) -> Option<(Scalar, Scalar)> {
    let lo = a.0.clone().max(b.0.clone());
    let hi = a.1.clone().min(b.1.clone());
    (lo < hi).then_some((lo, hi))
}

fn midpoint(lo: &Scalar, hi: &Scalar) -> Scalar {
    &(lo + hi) * &Scalar::ratio(1, 2)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let n = self.0[c];
            self.0[c] = r;
            c = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

fn on_connection(scs: &[SaddleConnection], s: &Surface, poly: usize, p: &Vec2) -> bool {
    s.representatives(poly, p).iter().any(|(q, x)| {
        scs.iter().any(|sc| sc.path.iter().any(|sg| sg.polygon == *q && geom::on_segment(&sg.entry, &sg.exit, x)))
    })
}

fn piece_contains(poly: &Polygon, piece: &Piece, x: &Vec2) -> bool {
    piece.x0 <= x.x && x.x <= piece.x1 && y_at(poly, piece.bottom, &x.x) <= x.y && x.y <= y_at(poly, piece.top, &x.x)
}

/// Pairs of trapezoids lying in the same cylinder, with the change of offset.
fn adjacencies(n: &Surface, pieces: &[Piece], scs: &[SaddleConnection]) -> Vec<(usize, usize, Scalar)> {
    let mut out = Vec::new();
    let side = |p: &Piece, x: &Scalar| {
        let poly = n.polygon(p.polygon);
        (y_at(poly, p.bottom, x), y_at(poly, p.top, x))
    };
    for (i, l) in pieces.iter().enumerate() {
        let poly = n.polygon(l.polygon);
        // across an interior vertical line
        for (j, r) in pieces.iter().enumerate() {
            if r.polygon != l.polygon || r.x0 != l.x1 {
                continue;
            }
            let (a, b) = (side(l, &l.x1), side(r, &r.x0));
            if let Some((lo, hi)) = overlap((&a.0, &a.1), (&b.0, &b.1)) {
                let m = Vec2::new(l.x1.clone(), midpoint(&lo, &hi));
                if !on_connection(scs, n, l.polygon, &m) {
                    out.push((i, j, Scalar::zero()));
                }
            }
        }
        // across the glued top edge
        if let Some((f, t)) = n.partner(EdgeRef::new(l.polygon, l.top)) {
            let (u0, u1) = (&l.x0 + &t.x, &l.x1 + &t.x);
            for (j, r) in pieces.iter().enumerate() {
                if r.polygon == f.polygon && r.bottom == f.edge && overlap((&u0, &u1), (&r.x0, &r.x1)).is_some() {
                    out.push((i, j, -&t.x));
                }
            }
        }
        // across glued vertical edges on the right
        for e in 0..poly.len() {
            let ev = poly.edge(e);
            if !ev.x.is_zero() || !ev.y.is_positive() || poly.vertex(e).x != l.x1 {
                continue;
            }
            let Some((f, t)) = n.partner(EdgeRef::new(l.polygon, e)) else { continue };
            let (ya, yb) = (&poly.vertex(e).y, &poly.vertex(e + 1).y);
            let a = side(l, &l.x1);
            let Some((lo, hi)) = overlap((&a.0, &a.1), (ya, yb)) else { continue };
            let (lo, hi) = (&lo + &t.y, &hi + &t.y);
            let q = n.polygon(f.polygon);
            let (fa, fb) = (&q.vertex(f.edge + 1).y, &q.vertex(f.edge).y);
            let xq = &l.x1 + &t.x;
            for (j, r) in pieces.iter().enumerate() {
                if r.polygon != f.polygon || r.x0 != xq {
                    continue;
                }
                let b = side(r, &r.x0);
                let Some((blo, bhi)) = overlap((&b.0, &b.1), (fa, fb)) else { continue };
                if let Some((olo, ohi)) = overlap((&lo, &hi), (&blo, &bhi)) {
                    let m = Vec2::new(xq.clone(), midpoint(&olo, &ohi));
                    if !on_connection(scs, n, f.polygon, &m) {
                        out.push((i, j, -&t.x));
                    }
                }
            }
        }
    }
    out
}

/// Decomposes `s` in direction `dir`, tracing separatrices up to length `cap`.
/// An incomplete search is reported as `Undetermined`, not as an error.
pub fn decompose(s: &Surface, dir: &Direction, cap: &Scalar) -> Result<Decomposition> {
    if !cap.is_positive() {
        return Err(Error::NonPositive);
    }
    let a = normalize_to_vertical(dir);
    let n = apply_matrix(s, &a)?;
    let ainv = a.inverse()?;
    let up = Vec2::ints(0, 1);
    // a vertical length y in the sheared frame has length y |A^-1 (0,1)| originally
    let cap_sq = &(cap * cap) / &ainv.apply(&up).norm_sq();
    let rep = n.singularities()?;

    let undetermined = |n: Surface| Decomposition {
        direction: dir.clone(),
        status: DecompositionStatus::Undetermined { cap: cap.clone() },
        cylinders: Vec::new(),
        saddle_connections: Vec::new(),
        boundary_marks: Vec::new(),
        normalizer: a.clone(),
        normalized: n,
        pieces: Vec::new(),
        left: Vec::new(),
        wraps: false,
    };

    let wraps = rep.singular().next().is_none();
    let mut scs = Vec::new();
    let mut period = None;
    if wraps {
        let start = TraceStart::Point(SurfacePoint::new(0, n.polygon(0).vertex(0).clone()));
        let ev = tracer::trace_sq(&n, &start, &up, &cap_sq, &TraceOptions::default())?;
        if ev.kind != TraceKind::ClosedUp {
            return Ok(undetermined(n));
        }
        period = Some(ev.holonomy.y);
    } else {
        let sectors = tracer::outgoing_sectors(&n, &up)?;
        scs = tracer::saddle_connections_sq(&n, &up, &cap_sq)?;
        if scs.len() != sectors.len() {
            return Ok(undetermined(n));
        }
    }

    let mut extra: Vec<Vec<Scalar>> = vec![Vec::new(); n.polygons().len()];
    for sc in &scs {
        for sg in &sc.path {
            extra[sg.polygon].push(sg.entry.x.clone());
        }
    }
    let mut pieces: Vec<Piece> = n.polygons().iter().enumerate().flat_map(|(i, p)| cut_polygon(p, i, &extra[i])).collect();

    let links = adjacencies(&n, &pieces, &scs);
    let mut uf = UnionFind((0..pieces.len()).collect());
    let mut adj: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); pieces.len()];
    for (i, j, d) in &links {
        uf.union(*i, *j);
        adj[*i].push((*j, d.clone()));
        adj[*j].push((*i, -d));
    }

    // cylinder ids in order of first trapezoid
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..pieces.len() {
        let r = uf.find(i);
        if !roots.contains(&r) {
            roots.push(r);
        }
    }
    let mut assigned = vec![false; pieces.len()];
    for (cid, &r) in roots.iter().enumerate() {
        let start = (0..pieces.len()).find(|&i| uf.find(i) == r).expect("root has a member");
        assigned[start] = true;
        pieces[start].cylinder = cid;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for (j, d) in adj[i].clone() {
                if !assigned[j] {
                    assigned[j] = true;
                    pieces[j].offset = &pieces[i].offset + &d;
                    pieces[j].cylinder = cid;
                    queue.push_back(j);
                }
            }
        }
    }

    let mut cylinders = Vec::new();
    let mut left = Vec::new();
    for cid in 0..roots.len() {
        let members: Vec<&Piece> = pieces.iter().filter(|p| p.cylinder == cid).collect();
        let area = members.iter().fold(Scalar::zero(), |acc, p| acc + trapezoid_area(n.polygon(p.polygon), p));
        let (w, h) = match &period {
            Some(h) => {
                let base = n.polygon(0).vertex(0);
                let piece = members
                    .iter()
                    .find(|p| p.polygon == 0 && piece_contains(n.polygon(0), p, base))
                    .ok_or(Error::PointOffSurface)?;
                left.push(&base.x + &piece.offset);
                (&area / h, h.clone())
            }
            None => {
                let lo = members.iter().map(|p| &p.x0 + &p.offset).min().expect("nonempty cylinder");
                let hi = members.iter().map(|p| &p.x1 + &p.offset).max().expect("nonempty cylinder");
                let w = &hi - &lo;
                left.push(lo);
                let h = &area / &w;
                (w, h)
            }
        };
        let core = ainv.apply(&Vec2::new(Scalar::zero(), h.clone()));
        let inverse_modulus = &core.norm_sq() / &area;
        cylinders.push(Cylinder {
            id: cid,
            direction: dir.clone(),
            core,
            area,
            normalized_width: w,
            normalized_circumference: h,
            inverse_modulus,
            boundary: Vec::new(),
            marks: Vec::new(),
        });
    }

    let mut dec = Decomposition {
        direction: dir.clone(),
        status: DecompositionStatus::Complete,
        cylinders,
        saddle_connections: scs,
        boundary_marks: Vec::new(),
        normalizer: a,
        normalized: n,
        pieces,
        left,
        wraps,
    };
    dec.attach_boundaries();
    dec.attach_marks()?;
    Ok(dec)
}

impl Decomposition {
    pub fn is_complete(&self) -> bool {
        self.status == DecompositionStatus::Complete
    }

    fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::NotComplete)
        }
    }

    /// The shear taking the direction to the vertical.
    pub fn normalizer(&self) -> &Mat2 {
        &self.normalizer
    }

    /// The sheared surface in which cylinders are vertical.
    pub fn normalized_surface(&self) -> &Surface {
        &self.normalized
    }

    pub fn total_area(&self) -> Scalar {
        self.cylinders.iter().fold(Scalar::zero(), |acc, c| acc + &c.area)
    }

    /// `sum w * h` over the cylinders, from the sheared-frame dimensions.
    pub fn width_times_height(&self) -> Scalar {
        self.cylinders
            .iter()
            .fold(Scalar::zero(), |acc, c| acc + &c.normalized_width * &c.normalized_circumference)
    }

    pub fn inverse_moduli(&self) -> Vec<Scalar> {
        self.cylinders.iter().map(|c| c.inverse_modulus.clone()).collect()
    }

    fn attach_boundaries(&mut self) {
        for (k, sc) in self.saddle_connections.iter().enumerate() {
            let sg = &sc.path[0];
            let m = Vec2::new(sg.entry.x.clone(), midpoint(&sg.entry.y, &sg.exit.y));
            let mut touching = Vec::new();
            for (q, x) in self.normalized.representatives(sg.polygon, &m) {
                let poly = self.normalized.polygon(q);
                for p in self.pieces.iter().filter(|p| p.polygon == q && piece_contains(poly, p, &x)) {
                    if !touching.contains(&p.cylinder) {
                        touching.push(p.cylinder);
                    }
                }
            }
            for c in touching {
                self.cylinders[c].boundary.push(k);
            }
        }
    }

    fn attach_marks(&mut self) -> Result<()> {
        let marks = self.normalized.marked_points().to_vec();
        for m in marks {
            match self.locate_normalized(m.polygon, &m.position)? {
                SplitRatio::Inside { cylinder, value } => self.cylinders[cylinder].marks.push((m.label.clone(), value)),
                SplitRatio::OnBoundary => self.boundary_marks.push(m.label.clone()),
            }
        }
        Ok(())
    }

    fn locate_normalized(&self, polygon: usize, pos: &Vec2) -> Result<SplitRatio> {
        if polygon >= self.normalized.polygons().len() {
            return Err(Error::PointOffSurface);
        }
        if !self.wraps && on_connection(&self.saddle_connections, &self.normalized, polygon, pos) {
            return Ok(SplitRatio::OnBoundary);
        }
        for (q, x) in self.normalized.representatives(polygon, pos) {
            let poly = self.normalized.polygon(q);
            if let Some(p) = self.pieces.iter().find(|p| p.polygon == q && piece_contains(poly, p, &x)) {
                let c = &self.cylinders[p.cylinder];
                let rel = &(&(&x.x + &p.offset) - &self.left[p.cylinder]) / &c.normalized_width;
                let value = if self.wraps { rel.floor_frac().1 } else { rel };
                if !self.wraps && (value.is_zero() || value == Scalar::one()) {
                    return Ok(SplitRatio::OnBoundary);
                }
                return Ok(SplitRatio::Inside { cylinder: p.cylinder, value });
            }
        }
        Err(Error::PointOffSurface)
    }

    /// Cylinder and transverse ratio of a point given in the original frame.
    /// "Left" is the side with smaller abscissa in the sheared frame.
    pub fn locate(&self, p: &SurfacePoint) -> Result<SplitRatio> {
        self.require_complete()?;
        self.locate_normalized(p.polygon, &self.normalizer.apply(&p.position))
    }

    /// Inverse moduli after cutting each cylinder along the leaves through
    /// its interior marked points.
    pub fn marked_inverse_moduli(&self) -> Result<Vec<Scalar>> {
        self.require_complete()?;
        let mut out = Vec::new();
        for c in &self.cylinders {
            let mut cuts: Vec<Scalar> = c.marks.iter().map(|(_, r)| r.clone()).collect();
            cuts.push(Scalar::zero());
            cuts.push(Scalar::one());
            cuts.sort();
            cuts.dedup();
            for w in cuts.windows(2) {
                out.push(&c.inverse_modulus / &(&w[1] - &w[0]));
            }
        }
        Ok(out)
    }
}

pub fn splitting_ratio(dec: &Decomposition, p: &MarkedPoint) -> Result<SplitRatio> {
    dec.locate(&SurfacePoint::from(p))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusSignature {
    pub m: usize,
    /// Least common positive integer multiple of each commensurability class.
    pub representatives: Vec<Scalar>,
    /// Member indices of each class.
    pub classes: Vec<Vec<usize>>,
    pub s_prime: Option<Scalar>,
}

/// Commensurability signature of a list of inverse moduli.
pub fn signature_of(inverse_moduli: &[Scalar]) -> Result<TorusSignature> {
    let classes = commensurability_classes(inverse_moduli)?;
    let representatives = classes
        .iter()
        .map(|cls| least_common_integer_multiple(&cls.iter().map(|&i| inverse_moduli[i].clone()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let s_prime = (classes.len() == 1).then(|| representatives[0].clone());
    Ok(TorusSignature { m: classes.len(), representatives, classes, s_prime })
}

pub fn torus_signature(dec: &Decomposition) -> Result<TorusSignature> {
    dec.require_complete()?;
    signature_of(&dec.inverse_moduli())
}

/// Affine twist fixing every cylinder of a parabolic decomposition: the
/// shear `[[1,0],[s,1]]` with `s` the least common integer multiple of the
/// sheared-frame inverse moduli, conjugated back to the original frame.
pub fn parabolic_twist(dec: &Decomposition) -> Result<Mat2> {
    dec.require_complete()?;
    let inv: Vec<Scalar> =
        dec.cylinders.iter().map(|c| &c.normalized_circumference / &c.normalized_width).collect();
    let s = least_common_integer_multiple(&inv)?;
    let a = &dec.normalizer;
    Ok(&(&a.inverse()? * &horocycle_matrix(&s)) * a)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DirectionClass {
    /// Certified minimal: rational surface, irrational slope.
    NotPeriodic,
    Undetermined { cap: Scalar },
    Parabolic { s_prime: Scalar },
    /// A marked point splits a cylinder irrationally.
    Fat { label: String, cylinder: usize, ratio: Scalar },
    /// Periodic, several commensurability classes, no marked-point certificate.
    PeriodicMixed { m: usize },
}

impl std::fmt::Display for DirectionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DirectionClass::NotPeriodic => write!(f, "NotPeriodic"),
            DirectionClass::Undetermined { cap } => write!(f, "Undetermined cap={cap}"),
            DirectionClass::Parabolic { s_prime } => write!(f, "Parabolic s'={s_prime}"),
            DirectionClass::Fat { label, cylinder, ratio } => write!(f, "Fat mark={label} cylinder={cylinder} ratio={ratio}"),
            DirectionClass::PeriodicMixed { m } => write!(f, "PeriodicMixed m={m}"),
        }
    }
}

fn has_rational_vertices(s: &Surface) -> bool {
    s.polygons().iter().all(|p| p.vertices.iter().all(|v| v.x.is_rational() && v.y.is_rational()))
}

fn slope_is_irrational(dir: &Direction) -> bool {
    let v = dir.vector();
    !v.x.is_zero() && !v.y.is_zero() && !(&v.y / &v.x).is_rational()
}

pub fn classify_decomposition(dec: &Decomposition) -> Result<DirectionClass> {
    if let DecompositionStatus::Undetermined { cap } = &dec.status {
        return Ok(DirectionClass::Undetermined { cap: cap.clone() });
    }
    for c in &dec.cylinders {
        if let Some((label, ratio)) = c.marks.iter().find(|(_, r)| !r.is_rational()) {
            return Ok(DirectionClass::Fat { label: label.clone(), cylinder: c.id, ratio: ratio.clone() });
        }
    }
    let sig = torus_signature(dec)?;
    Ok(match sig.s_prime {
        Some(s_prime) => DirectionClass::Parabolic { s_prime },
        None => DirectionClass::PeriodicMixed { m: sig.m },
    })
}

pub fn classify_direction(s: &Surface, dir: &Direction, cap: &Scalar) -> Result<DirectionClass> {
    if has_rational_vertices(s) && slope_is_irrational(dir) {
        return Ok(DirectionClass::NotPeriodic);
    }
    classify_decomposition(&decompose(s, dir, cap)?)
}

/// The `n`-fold Dehn twist of cylinder `cylinder` applied to `p`:
/// `(x, y) -> (x, y + n x h / w mod h)` in cylinder coordinates.
pub fn dehn_twist_point(dec: &Decomposition, cylinder: usize, p: &SurfacePoint, n: i64) -> Result<SurfacePoint> {
    let theta = match dec.locate(p)? {
        SplitRatio::OnBoundary => return Err(Error::OnBoundary),
        SplitRatio::Inside { cylinder: c, value } if c == cylinder => value,
        SplitRatio::Inside { .. } => return Err(Error::NotInCylinder),
    };
    let h = &dec.cylinders[cylinder].normalized_circumference;
    let shift = &(&theta * &Scalar::int(n)).floor_frac().1 * h;
    let start = SurfacePoint::new(p.polygon, dec.normalizer.apply(&p.position));
    let q = tracer::flow_point(&dec.normalized, &start, &Vec2::ints(0, 1), &shift)?;
    Ok(SurfacePoint::new(q.polygon, dec.normalizer.inverse()?.apply(&q.position)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistSample {
    pub n: u64,
    /// Height of the twisted point above `p` along the core of `C`.
    pub position: Scalar,
    pub point: SurfacePoint,
    /// Splitting ratio in `D`, or `None` when the image misses `D`.
    pub ratio: Option<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistOrbit {
    pub base: SurfacePoint,
    pub c: usize,
    pub d: usize,
    /// Splitting ratio of the base point in `C`.
    pub theta: Scalar,
    /// Circumference of `C` in its sheared frame.
    pub h: Scalar,
    /// First stretch of the leaf through `p` inside `D`: it starts at height
    /// `y0` above `p` and has length `lambda`; `nu = lambda / h`.
    pub y0: Option<Scalar>,
    pub lambda: Option<Scalar>,
    pub nu: Option<Scalar>,
    pub samples: Vec<TwistSample>,
}

/// Heights along the closed leaf through `start` (sheared frame of `dc`)
/// where it crosses a saddle connection of `dd`.
fn leaf_crossings(dc: &Decomposition, dd: &Decomposition, start: &SurfacePoint, h: &Scalar) -> Result<Vec<Scalar>> {
    let up = Vec2::ints(0, 1);
    let cap_sq = &(h * h) * &Scalar::int(4);
    let leaf = tracer::trace_sq(&dc.normalized, &TraceStart::Point(start.clone()), &up, &cap_sq, &TraceOptions::default())?;
    let to_c = &dc.normalizer * &dd.normalizer.inverse()?;
    let pieces: Vec<Segment> = dd
        .saddle_connections
        .iter()
        .flat_map(|sc| sc.path.iter())
        .map(|sg| Segment { polygon: sg.polygon, entry: to_c.apply(&sg.entry), exit: to_c.apply(&sg.exit) })
        .collect();
    let mut out = Vec::new();
    let mut base = Scalar::zero();
    for seg in &leaf.path {
        let x = &seg.entry.x;
        for p in pieces.iter().filter(|p| p.polygon == seg.polygon && p.entry.x != p.exit.x) {
            let s = &(x - &p.entry.x) / &(&p.exit.x - &p.entry.x);
            if s.is_negative() || s > Scalar::one() {
                continue;
            }
            let y = &p.entry.y + &(&s * &(&p.exit.y - &p.entry.y));
            if seg.entry.y <= y && y <= seg.exit.y {
                let t = (&base + &(&y - &seg.entry.y)).floor_frac();
                let pos = &(&Scalar::from_bigint(t.0) * h) + &(&t.1 * h);
                let pos = if pos >= *h { &pos - h } else { pos };
                out.push(pos);
            }
        }
        base = &base + &(&seg.exit.y - &seg.entry.y);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Twists `p` around `C` for `n = 1..=count` and records where each image
/// falls in the transverse cylinder `D`.
pub fn twist_orbit_ratios(
    dc: &Decomposition,
    c: usize,
    dd: &Decomposition,
    d: usize,
    p: &SurfacePoint,
    count: u64,
) -> Result<TwistOrbit> {
    dc.require_complete()?;
    dd.require_complete()?;
    if c >= dc.cylinders.len() || d >= dd.cylinders.len() {
        return Err(Error::NotInCylinder);
    }
    let theta = match dc.locate(p)? {
        SplitRatio::OnBoundary => return Err(Error::OnBoundary),
        SplitRatio::Inside { cylinder, value } if cylinder == c => value,
        SplitRatio::Inside { .. } => return Err(Error::NotInCylinder),
    };
    let h = dc.cylinders[c].normalized_circumference.clone();
    let start = SurfacePoint::new(p.polygon, dc.normalizer.apply(&p.position));
    let up = Vec2::ints(0, 1);
    let ainv = dc.normalizer.inverse()?;

    let cuts = leaf_crossings(dc, dd, &start, &h)?;
    let intervals: Vec<(Scalar, Scalar)> = if cuts.is_empty() {
        vec![(Scalar::zero(), h.clone())]
    } else {
        let mut v: Vec<(Scalar, Scalar)> = cuts.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        v.push((cuts[cuts.len() - 1].clone(), &cuts[0] + &h));
        v
    };
    let (mut y0, mut lambda) = (None, None);
    for (a, b) in &intervals {
        let mid = midpoint(a, b);
        let mid = if mid >= h { &mid - &h } else { mid };
        let q = tracer::flow_point(&dc.normalized, &start, &up, &mid)?;
        let q = SurfacePoint::new(q.polygon, ainv.apply(&q.position));
        if dd.locate(&q)?.cylinder() == Some(d) {
            y0 = Some(a.clone());
            lambda = Some(b - a);
            break;
        }
    }
    let nu = lambda.as_ref().map(|l| l / &h);

    let mut samples = Vec::new();
    for n in 1..=count {
        let position = &(&theta * &Scalar::int(n as i64)).floor_frac().1 * &h;
        let point = dehn_twist_point(dc, c, p, n as i64)?;
        let ratio = match dd.locate(&point)? {
            SplitRatio::Inside { cylinder, value } if cylinder == d => Some(value),
            _ => None,
        };
        samples.push(TwistSample { n, position, point, ratio });
    }
    Ok(TwistOrbit { base: p.clone(), c, d, theta, h, y0, lambda, nu, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{cross, square_torus};

    fn theta() -> Scalar {
        Scalar::golden_conjugate()
    }

    fn cross11() -> Surface {
        cross(&Scalar::one(), &Scalar::one()).unwrap()
    }

    fn sorted(mut v: Vec<Scalar>) -> Vec<Scalar> {
        v.sort();
        v
    }

    #[test]
    fn torus_vertical() {
        let s = square_torus();
        let dec = decompose(&s, &Direction::vertical(), &Scalar::int(4)).unwrap();
        assert!(dec.is_complete());
        assert_eq!(dec.cylinders.len(), 1);
        let c = &dec.cylinders[0];
        assert_eq!((c.width(0), c.circumference(0)), (Some(Scalar::one()), Some(Scalar::one())));
        assert_eq!(&c.modulus() * &c.inverse_modulus, Scalar::one());
        let sig = torus_signature(&dec).unwrap();
        assert_eq!((sig.m, sig.s_prime), (1, Some(Scalar::one())));
    }

    /// Horizontal cylinders of a square-tiled surface from its right and up
    /// permutations: strips are cycles of `r`; a strip continues upward when
    /// every top-right corner of its squares is regular, i.e. fixed by the
    /// commutator `u^-1 r^-1 u r`. Returns inverse moduli (length / stack height).
    fn origami_inverse_moduli(r: &[usize], u: &[usize]) -> Vec<Scalar> {
        let n = r.len();
        let inv = |p: &[usize]| {
            let mut q = vec![0; n];
            for (i, &j) in p.iter().enumerate() {
                q[j] = i;
            }
            q
        };
        let (ri, ui) = (inv(r), inv(u));
        let regular = |x: usize| ui[ri[u[r[x]]]] == x;
        let mut strip = vec![usize::MAX; n];
        let mut strips: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            if strip[x] == usize::MAX {
                let mut cyc = vec![x];
                strip[x] = strips.len();
                let mut y = r[x];
                while y != x {
                    strip[y] = strips.len();
                    cyc.push(y);
                    y = r[y];
                }
                strips.push(cyc);
            }
        }
        let open_above: Vec<bool> = strips.iter().map(|c| c.iter().all(|&x| regular(x))).collect();
        let mut seen = vec![false; strips.len()];
        let mut out = Vec::new();
        for k in 0..strips.len() {
            if seen[k] {
                continue;
            }
            // walk down to the bottom strip of this stack
            let mut bottom = k;
            loop {
                let below = strip[ui[strips[bottom][0]]];
                if !open_above[below] || below == k {
                    break;
                }
                bottom = below;
            }
            let mut height = 0;
            let mut cur = bottom;
            loop {
                seen[cur] = true;
                height += 1;
                if !open_above[cur] {
                    break;
                }
                cur = strip[u[strips[cur][0]]];
                if cur == bottom {
                    break;
                }
            }
            out.push(Scalar::ratio(strips[bottom].len() as i64, height));
        }
        out.sort();
        out
    }

    /// Squares of cross(1,1): 0 left, 1 centre, 2 right, 3 top, 4 bottom arm.
    fn cross_origami() -> (Vec<usize>, Vec<usize>) {
        (vec![1, 2, 0, 3, 4], vec![0, 3, 2, 4, 1])
    }

    #[test]
    fn origami_oracle_on_the_torus_cover() {
        // two squares side by side: one strip of length 2
        assert_eq!(origami_inverse_moduli(&[1, 0], &[0, 1]), vec![Scalar::int(2)]);
    }

    #[test]
    fn cross_horizontal_and_vertical() {
        let s = cross11();
        let (r, u) = cross_origami();
        let expected = origami_inverse_moduli(&r, &u);
        // the arm ends are glued through regular vertices, so the two arm
        // squares stack into one cylinder of circumference 1 and width 2
        assert_eq!(expected, vec![Scalar::ratio(1, 2), Scalar::int(3)]);
        for dir in [Direction::horizontal(), Direction::vertical()] {
            let dec = decompose(&s, &dir, &Scalar::int(4)).unwrap();
            assert!(dec.is_complete());
            assert_eq!(sorted(dec.inverse_moduli()), expected);
            let mut dims: Vec<(Scalar, Scalar)> =
                dec.cylinders.iter().map(|c| (c.width(0).unwrap(), c.circumference(0).unwrap())).collect();
            dims.sort();
            assert_eq!(dims, vec![(Scalar::one(), Scalar::int(3)), (Scalar::int(2), Scalar::one())]);
            assert_eq!(dec.total_area(), s.area());
            assert_eq!(dec.width_times_height(), s.area());
            assert_eq!(dec.saddle_connections.len(), 3);
            assert!(dec.cylinders.iter().all(|c| !c.boundary.is_empty()));
            let sig = torus_signature(&dec).unwrap();
            assert_eq!((sig.m, sig.s_prime), (1, Some(Scalar::int(3))));
        }
    }

    #[test]
    fn parabolic_twist_preserves_cylinders() {
        let s = cross11();
        let dec = decompose(&s, &Direction::horizontal(), &Scalar::int(4)).unwrap();
        let phi = parabolic_twist(&dec).unwrap();
        assert_eq!(phi, Mat2::ints(1, -3, 0, 1));
        let twisted = apply_matrix(&s, &phi).unwrap();
        let again = decompose(&twisted, &Direction::horizontal(), &Scalar::int(4)).unwrap();
        assert_eq!(sorted(again.inverse_moduli()), sorted(dec.inverse_moduli()));
        assert_eq!(again.total_area(), s.area());
    }

    #[test]
    fn slope_one_on_cross() {
        let s = cross11();
        let dir = Direction::from_ints(1, 1).unwrap();
        let small = decompose(&s, &dir, &Scalar::ratio(1, 2)).unwrap();
        assert!(!small.is_complete());
        assert_eq!(torus_signature(&small), Err(Error::NotComplete));
        let dec = decompose(&s, &dir, &Scalar::int(20)).unwrap();
        assert!(dec.is_complete());
        assert_eq!(dec.total_area(), s.area());
        assert_eq!(dec.width_times_height(), s.area());
    }

    #[test]
    fn splitting_ratios() {
        let s = square_torus().add_marked_point(0, Vec2::new(theta(), Scalar::ratio(1, 2)), "p").unwrap();
        let dec = decompose(&s, &Direction::vertical(), &Scalar::int(4)).unwrap();
        let r = splitting_ratio(&dec, s.marked_point("p").unwrap()).unwrap();
        assert_eq!(r, SplitRatio::Inside { cylinder: 0, value: theta() });
        assert!(!r.value().unwrap().is_rational());

        let s = square_torus().add_marked_point(0, Vec2::new(Scalar::ratio(1, 5), Scalar::ratio(2, 3)), "q").unwrap();
        let dec = decompose(&s, &Direction::vertical(), &Scalar::int(4)).unwrap();
        assert_eq!(splitting_ratio(&dec, s.marked_point("q").unwrap()).unwrap().value(), Some(&Scalar::ratio(1, 5)));

        // a point on the horizontal saddle connection from (1,1) to (2,1)
        let s = cross11();
        let dec = decompose(&s, &Direction::horizontal(), &Scalar::int(4)).unwrap();
        let on = SurfacePoint::new(0, Vec2::new(Scalar::ratio(3, 2), Scalar::one()));
        assert_eq!(dec.locate(&on).unwrap(), SplitRatio::OnBoundary);
        let inside = SurfacePoint::new(0, Vec2::new(Scalar::ratio(3, 2), Scalar::ratio(5, 4)));
        assert!(matches!(dec.locate(&inside).unwrap(), SplitRatio::Inside { .. }));
    }

    #[test]
    fn dehn_twists() {
        let s = square_torus();
        let dec = decompose(&s, &Direction::vertical(), &Scalar::int(4)).unwrap();
        let p = SurfacePoint::new(0, Vec2::new(theta(), Scalar::ratio(1, 3)));
        assert_eq!(dehn_twist_point(&dec, 0, &p, 0).unwrap(), p);
        let q = dehn_twist_point(&dec, 0, &SurfacePoint::new(0, Vec2::new(theta(), Scalar::zero())), 1).unwrap();
        assert_eq!(q.position.y, theta());
        // x = w/2 moves by n h / 2
        let mid = SurfacePoint::new(0, Vec2::new(Scalar::ratio(1, 2), Scalar::ratio(1, 8)));
        assert_eq!(dehn_twist_point(&dec, 0, &mid, 3).unwrap().position.y, Scalar::ratio(5, 8));
    }

    #[test]
    fn twist_orbits_on_the_torus() {
        let s = square_torus();
        let dc = decompose(&s, &Direction::vertical(), &Scalar::int(4)).unwrap();
        let dd = decompose(&s, &Direction::horizontal(), &Scalar::int(4)).unwrap();
        let p = SurfacePoint::new(0, Vec2::new(theta(), Scalar::zero()));
        let orbit = twist_orbit_ratios(&dc, 0, &dd, 0, &p, 3).unwrap();
        let expected: Vec<Scalar> = ["-1/2+1/2*sqrt(5)", "-2+sqrt(5)", "-5/2+3/2*sqrt(5)"].iter().map(|x| x.parse().unwrap()).collect();
        let got: Vec<Scalar> = orbit.samples.iter().map(|x| x.position.clone()).collect();
        assert_eq!(got, expected);
        // oracle: {n theta} computed independently through floor
        for smp in &orbit.samples {
            let nt = &theta() * &Scalar::int(smp.n as i64);
            assert_eq!(smp.position, &nt - &Scalar::from_bigint(nt.floor()));
            assert!(!smp.ratio.as_ref().unwrap().is_rational());
        }
        assert_eq!(orbit.lambda, Some(Scalar::one()));
        assert!(twist_orbit_ratios(&dc, 0, &dd, 0, &p, 0).unwrap().samples.is_empty());

        let p = SurfacePoint::new(0, Vec2::new(Scalar::ratio(1, 3), Scalar::ratio(1, 7)));
        let orbit = twist_orbit_ratios(&dc, 0, &dd, 0, &p, 6).unwrap();
        for k in 0..3 {
            assert_eq!(orbit.samples[k].position, orbit.samples[k + 3].position);
            assert_eq!(orbit.samples[k].ratio, orbit.samples[k + 3].ratio);
        }
    }

    #[test]
    fn classification_examples() {
        let cap = Scalar::int(6);
        let c = classify_direction(&square_torus(), &Direction::vertical(), &cap).unwrap();
        assert_eq!(c, DirectionClass::Parabolic { s_prime: Scalar::one() });
        let c = classify_direction(&cross11(), &Direction::horizontal(), &cap).unwrap();
        assert_eq!(c.to_string(), "Parabolic s'=3");
        let s = square_torus().add_marked_point(0, Vec2::new(theta(), Scalar::ratio(1, 2)), "p").unwrap();
        let c = classify_direction(&s, &Direction::vertical(), &cap).unwrap();
        assert_eq!(c, DirectionClass::Fat { label: "p".into(), cylinder: 0, ratio: theta() });
        let golden = Direction::new(&Vec2::new(Scalar::one(), Scalar::golden())).unwrap();
        assert_eq!(classify_direction(&s, &golden, &cap).unwrap(), DirectionClass::NotPeriodic);
    }

    #[test]
    fn synthetic_signature() {
        let sig = signature_of(&[Scalar::one(), Scalar::sqrt_of(5).unwrap()]).unwrap();
        assert_eq!(sig.m, 2);
        assert_eq!(sig.s_prime, None);
        let sig = signature_of(&[Scalar::ratio(3, 2), Scalar::ratio(1, 2), Scalar::int(2)]).unwrap();
        assert_eq!(sig.s_prime, Some(Scalar::int(6)));
    }

    #[test]
    fn marked_cylinder_splits() {
        let s = square_torus().add_marked_point(0, Vec2::new(theta(), Scalar::ratio(1, 2)), "p").unwrap();
        let dec = decompose(&s, &Direction::vertical(), &Scalar::int(4)).unwrap();
        let inv = dec.marked_inverse_moduli().unwrap();
        assert_eq!(inv.len(), 2);
        assert_eq!(signature_of(&inv).unwrap().m, 2);
    }
}
