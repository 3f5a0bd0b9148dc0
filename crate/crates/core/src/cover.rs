//! Ramified translation covers built by cutting slits and regluing sheets.
//!
//! The base polygons are first subdivided so that every slit runs along
//! polygon edges. Each slit then has a left bank (an edge pointing along the
//! slit, polygon on its left) glued to a right bank. In the cover, the left
//! bank of sheet `i` is glued to the right bank of sheet `perm(i)`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::geom::{self, Vec2};
use crate::surface::{EdgeRef, Location, MarkedPoint, Polygon, Surface};
use crate::tracer::{self, Hit, Segment, SurfacePoint, TraceKind, TraceOptions, TraceStart};

/// Straight segment on the surface; `path` lists its pieces polygon by polygon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slit {
    pub from: SurfacePoint,
    pub to: SurfacePoint,
    /// Displacement from `from` to `to`.
    pub holonomy: Vec2,
    pub path: Vec<Segment>,
}

/// Longest slit search, in steps of the direction vector.
const SLIT_CAP_SQ: i64 = 1 << 40;

impl Slit {
    /// Follows direction `dir` from `from` until `to` is reached. The interior
    /// must avoid singularities and marked points.
    pub fn new(s: &Surface, from: &SurfacePoint, to: &SurfacePoint, dir: &Vec2) -> Result<Slit> {
        let opts = TraceOptions { stop_at_marks: true, goal: Some(to.clone()) };
        let cap = &Scalar::int(SLIT_CAP_SQ) * &dir.norm_sq();
        let ev = tracer::trace_sq(s, &TraceStart::Point(from.clone()), dir, &cap, &opts)?;
        match ev.kind {
            TraceKind::ReachedGoal => Ok(Slit { from: from.clone(), to: to.clone(), holonomy: ev.holonomy, path: ev.path }),
            TraceKind::HitSingularity { .. } | TraceKind::HitMarkedPoint { .. } => Err(Error::SlitThroughSingularity),
            _ => Err(Error::SlitEndpointMismatch),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSpec {
    pub degree: usize,
    pub slits: Vec<Slit>,
    /// One permutation of `0..degree` per slit, as the list of images.
    pub perms: Vec<Vec<usize>>,
}

/// A point over which the cover may branch, with its fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchPoint {
    pub base: SurfacePoint,
    /// Cone angle of the base point, in units of pi.
    pub base_angle_pi: u64,
    /// Ramification index of each preimage.
    pub indices: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamificationProfile {
    pub points: Vec<(SurfacePoint, Vec<u64>)>,
}

#[derive(Clone, Debug)]
pub struct Cover {
    pub surface: Surface,
    pub spec: CoverSpec,
    pub branch_points: Vec<BranchPoint>,
}

impl Cover {
    pub fn profile(&self) -> RamificationProfile {
        RamificationProfile { points: self.branch_points.iter().map(|b| (b.base.clone(), b.indices.clone())).collect() }
    }
}

/// Polygons under subdivision. Every vertex carries the id of its outgoing
/// edge so gluings survive insertions.
struct Work {
    polys: Vec<Vec<(Vec2, usize)>>,
    origin: Vec<usize>,
    partner: HashMap<usize, usize>,
    next_id: usize,
}

impl Work {
    fn new(s: &Surface) -> Work {
        let mut ids = HashMap::new();
        let mut polys = Vec::new();
        let mut next_id = 0;
        for (p, poly) in s.polygons().iter().enumerate() {
            let mut v = Vec::new();
            for (i, x) in poly.vertices.iter().enumerate() {
                ids.insert((p, i), next_id);
                v.push((x.clone(), next_id));
                next_id += 1;
            }
            polys.push(v);
        }
        let mut partner = HashMap::new();
        for g in s.gluings() {
            let (a, b) = (ids[&(g.a.polygon, g.a.edge)], ids[&(g.b.polygon, g.b.edge)]);
            partner.insert(a, b);
            partner.insert(b, a);
        }
        Work { polys, origin: (0..s.polygons().len()).collect(), partner, next_id }
    }

    fn fresh(&mut self) -> usize {
        self.next_id += 1;
        self.next_id - 1
    }

    fn polygon(&self, p: usize) -> Polygon {
        Polygon::new(self.polys[p].iter().map(|(x, _)| x.clone()).collect())
    }

    fn find(&self, id: usize) -> (usize, usize) {
        for (p, v) in self.polys.iter().enumerate() {
            if let Some(i) = v.iter().position(|(_, e)| *e == id) {
                return (p, i);
            }
        }
        unreachable!("edge ids are never dropped")
    }

    fn endpoints(&self, p: usize, i: usize) -> (Vec2, Vec2) {
        let v = &self.polys[p];
        (v[i].0.clone(), v[(i + 1) % v.len()].0.clone())
    }

    /// Index of `x` as a vertex of polygon `p`, splitting the edge through it
    /// (and its partner) when needed.
    fn ensure_vertex(&mut self, p: usize, x: &Vec2) -> Result<usize> {
        if let Some(i) = self.polys[p].iter().position(|(v, _)| v == x) {
            return Ok(i);
        }
        let n = self.polys[p].len();
        let i = (0..n)
            .find(|&i| {
                let (a, b) = self.endpoints(p, i);
                geom::on_segment(&a, &b, x)
            })
            .ok_or(Error::PointOffSurface)?;
        let e = self.polys[p][i].1;
        let (_, b) = self.endpoints(p, i);
        let e2 = self.fresh();
        self.polys[p].insert(i + 1, (x.clone(), e2));
        if let Some(&f) = self.partner.get(&e) {
            let (q, j) = self.find(f);
            let (c, _) = self.endpoints(q, j);
            // f runs from b + t back to a + t
            let xq = &(x - &b) + &c;
            let f2 = self.fresh();
            self.polys[q].insert(j + 1, (xq, f2));
            self.partner.insert(e, f2);
            self.partner.insert(f2, e);
            self.partner.insert(e2, f);
            self.partner.insert(f, e2);
        }
        Ok(self.polys[p].iter().position(|(v, _)| v == x).expect("just inserted"))
    }

    /// Splits polygon `p` along the chord from vertex `i` to vertex `j`
    /// through the listed interior points (ordered from `i` to `j`). The part
    /// holding vertices `i..=j` stays at index `p`.
    fn split(&mut self, p: usize, i: usize, j: usize, interior: &[Vec2]) -> usize {
        let v = self.polys[p].clone();
        let n = v.len();
        let chord: Vec<Vec2> = std::iter::once(v[i].0.clone())
            .chain(interior.iter().cloned())
            .chain(std::iter::once(v[j].0.clone()))
            .collect();
        let m = chord.len() - 1;
        // chord edge k runs chord[k] -> chord[k+1] in the second part and back in the first
        let fwd: Vec<usize> = (0..m).map(|_| self.fresh()).collect();
        let back: Vec<usize> = (0..m).map(|_| self.fresh()).collect();
        for k in 0..m {
            self.partner.insert(fwd[k], back[k]);
            self.partner.insert(back[k], fwd[k]);
        }
        let mut first = Vec::new();
        let mut k = i;
        while k != j {
            first.push(v[k].clone());
            k = (k + 1) % n;
        }
        // from chord[m] back to chord[0]
        for t in (1..=m).rev() {
            first.push((chord[t].clone(), back[t - 1]));
        }
        let mut second = Vec::new();
        let mut k = j;
        while k != i {
            second.push(v[k].clone());
            k = (k + 1) % n;
        }
        for t in 0..m {
            second.push((chord[t].clone(), fwd[t]));
        }
        self.polys[p] = first;
        self.polys.push(second);
        self.origin.push(self.origin[p]);
        self.polys.len() - 1
    }
}

#[derive(Clone, Debug)]
struct SlitPiece {
    slit: usize,
    /// Polygon of the base surface.
    base_polygon: usize,
    /// Current polygon during cutting.
    polygon: usize,
    a: Vec2,
    b: Vec2,
}

fn half(a: &Vec2, b: &Vec2) -> Vec2 {
    (a + b).scale(&Scalar::ratio(1, 2))
}

fn slit_pieces(slits: &[Slit]) -> Vec<SlitPiece> {
    slits
        .iter()
        .enumerate()
        .flat_map(|(k, sl)| {
            sl.path.iter().map(move |sg| SlitPiece {
                slit: k,
                base_polygon: sg.polygon,
                polygon: sg.polygon,
                a: sg.entry.clone(),
                b: sg.exit.clone(),
            })
        })
        .collect()
}

fn same_point(s: &Surface, x: &SurfacePoint, y: &SurfacePoint) -> bool {
    s.representatives(x.polygon, &x.position).contains(&(y.polygon, y.position.clone()))
}

/// Fails with `OverlappingSlits` if two slits share a point.
fn check_disjoint(s: &Surface, slits: &[Slit]) -> Result<()> {
    let pieces = slit_pieces(slits);
    // every piece together with its copy across an edge it runs along
    let mut copies: Vec<(usize, usize, Vec2, Vec2)> = Vec::new();
    for pc in &pieces {
        copies.push((pc.slit, pc.polygon, pc.a.clone(), pc.b.clone()));
        let poly = s.polygon(pc.polygon);
        if let Location::OnEdge(e) = poly.locate(&half(&pc.a, &pc.b)) {
            if let Some((f, t)) = s.partner(EdgeRef::new(pc.polygon, e)) {
                copies.push((pc.slit, f.polygon, &pc.a + t, &pc.b + t));
            }
        }
    }
    for (i, x) in copies.iter().enumerate() {
        for y in &copies[i + 1..] {
            if x.0 != y.0 && x.1 == y.1 && geom::segments_touch(&x.2, &x.3, &y.2, &y.3) {
                return Err(Error::OverlappingSlits);
            }
        }
    }
    for (i, a) in slits.iter().enumerate() {
        for b in &slits[i + 1..] {
            for x in [&a.from, &a.to] {
                for y in [&b.from, &b.to] {
                    if same_point(s, x, y) {
                        return Err(Error::OverlappingSlits);
                    }
                }
            }
        }
    }
    Ok(())
}

/// Subdivides the base polygons until every slit runs along edges.
fn cut(base: &Surface, slits: &[Slit]) -> Result<Work> {
    let mut w = Work::new(base);
    let mut pieces = slit_pieces(slits);
    for idx in 0..pieces.len() {
        let pc = pieces[idx].clone();
        let p = pc.polygon;
        let poly = w.polygon(p);
        if poly.locate(&half(&pc.a, &pc.b)) != Location::Interior {
            w.ensure_vertex(p, &pc.a)?;
            w.ensure_vertex(p, &pc.b)?;
            continue;
        }
        let v = &pc.b - &pc.a;
        let reach = |from: &Vec2, dir: &Vec2| -> Result<Vec2> {
            if poly.locate(from) != Location::Interior {
                return Ok(from.clone());
            }
            let (t, _): (Scalar, Hit) = tracer::ray_cast(&poly, from, dir).ok_or(Error::PointOffSurface)?;
            Ok(from + &dir.scale(&t))
        };
        let c0 = reach(&pc.a, &-&v)?;
        let c1 = reach(&pc.b, &v)?;
        let interior: Vec<Vec2> =
            [&pc.a, &pc.b].into_iter().filter(|x| poly.locate(x) == Location::Interior).cloned().collect();
        w.ensure_vertex(p, &c0)?;
        w.ensure_vertex(p, &c1)?;
        let i = w.polys[p].iter().position(|(x, _)| *x == c0).expect("inserted");
        let j = w.polys[p].iter().position(|(x, _)| *x == c1).expect("inserted");
        let q = w.split(p, i, j, &interior);
        let kept = w.polygon(p);
        for later in pieces[idx + 1..].iter_mut().filter(|l| l.polygon == p) {
            if kept.locate(&half(&later.a, &later.b)) == Location::Outside {
                later.polygon = q;
            }
        }
    }
    Ok(w)
}

/// Left-bank edge ids of each slit.
fn banks(w: &Work, slits: &[Slit]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); slits.len()];
    for pc in slit_pieces(slits) {
        let v = &pc.b - &pc.a;
        for (p, poly) in w.polys.iter().enumerate() {
            if w.origin[p] != pc.base_polygon {
                continue;
            }
            for i in 0..poly.len() {
                let (x, y) = w.endpoints(p, i);
                if x == y || !geom::on_segment(&pc.a, &pc.b, &x) || !geom::on_segment(&pc.a, &pc.b, &y) {
                    continue;
                }
                let id = poly[i].1;
                let left = if (&y - &x).same_direction(&v) { id } else { w.partner[&id] };
                if !out[pc.slit].contains(&left) {
                    out[pc.slit].push(left);
                }
            }
        }
    }
    out
}

fn check_perm(perm: &[usize], d: usize) -> Result<()> {
    if perm.len() != d {
        return Err(Error::InvalidPermutation(format!("expected {d} images, got {}", perm.len())));
    }
    let mut seen = vec![false; d];
    for &x in perm {
        if x >= d || seen[x] {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a permutation of 0..{d}")));
        }
        seen[x] = true;
    }
    Ok(())
}

fn is_single_cycle(perm: &[usize]) -> bool {
    let mut len = 1;
    let mut x = perm[0];
    while x != 0 {
        x = perm[x];
        len += 1;
    }
    len == perm.len()
}

/// Builds the cover described by `spec` over `base`.
pub fn slit_cover(base: &Surface, spec: &CoverSpec) -> Result<Cover> {
    let d = spec.degree;
    if d < 1 {
        return Err(Error::InvalidParams("degree must be positive".into()));
    }
    if spec.perms.len() != spec.slits.len() {
        return Err(Error::InvalidParams(format!("{} slits but {} permutations", spec.slits.len(), spec.perms.len())));
    }
    for perm in &spec.perms {
        check_perm(perm, d)?;
    }
    check_disjoint(base, &spec.slits)?;
    let w = cut(base, &spec.slits)?;
    let left = banks(&w, &spec.slits);
    let mut bank_of: HashMap<usize, usize> = HashMap::new();
    for (k, ids) in left.iter().enumerate() {
        for &id in ids {
            bank_of.insert(id, k);
        }
    }

    let np = w.polys.len();
    let mut loc: HashMap<usize, (usize, usize)> = HashMap::new();
    for (p, poly) in w.polys.iter().enumerate() {
        for (i, (_, id)) in poly.iter().enumerate() {
            loc.insert(*id, (p, i));
        }
    }
    let edge = |sheet: usize, id: usize| {
        let (p, i) = loc[&id];
        EdgeRef::new(sheet * np + p, i)
    };
    let mut pairs = Vec::new();
    let mut ids: Vec<(&usize, &usize)> = w.partner.iter().filter(|(a, b)| a < b).collect();
    ids.sort();
    for (&e, &f) in ids {
        let (l, r, perm) = match (bank_of.get(&e), bank_of.get(&f)) {
            (Some(&k), _) => (e, f, Some(&spec.perms[k])),
            (_, Some(&k)) => (f, e, Some(&spec.perms[k])),
            _ => (e, f, None),
        };
        for sheet in 0..d {
            let other = perm.map_or(sheet, |p| p[sheet]);
            pairs.push((edge(sheet, l), edge(other, r)));
        }
    }
    let polygons: Vec<Polygon> = (0..d).flat_map(|_| (0..np).map(|p| w.polygon(p))).collect();
    let surface = Surface::new(base.field(), polygons, pairs, vec![])?;

    // a base point that is a vertex of the cut polygons, as (cut polygon, vertex)
    let vertex_of = |pt: &SurfacePoint| -> Option<(usize, usize)> {
        base.representatives(pt.polygon, &pt.position).iter().find_map(|(q, x)| {
            (0..np).filter(|&p| w.origin[p] == *q).find_map(|p| w.polys[p].iter().position(|(y, _)| y == x).map(|i| (p, i)))
        })
    };
    let fiber = |p: usize, i: usize| -> Vec<(usize, u64)> {
        let mut classes: Vec<(usize, u64)> = Vec::new();
        for sheet in 0..d {
            let c = surface.class_of_corner(sheet * np + p, i).expect("corner has a class");
            if !classes.iter().any(|(x, _)| *x == c) {
                classes.push((c, surface.vertex_class(c).angle_pi));
            }
        }
        classes
    };
    let base_angle = |pt: &SurfacePoint| match base.polygon(pt.polygon).locate(&pt.position) {
        Location::AtVertex(i) => base.vertex_class(base.class_of_corner(pt.polygon, i).expect("class")).angle_pi,
        _ => 2,
    };

    let mut branch_points: Vec<BranchPoint> = Vec::new();
    for sl in &spec.slits {
        for pt in [&sl.from, &sl.to] {
            if branch_points.iter().any(|b| same_point(base, &b.base, pt)) {
                continue;
            }
            let (p, i) = vertex_of(pt).ok_or(Error::PointOffSurface)?;
            let angle = base_angle(pt);
            let indices = fiber(p, i).iter().map(|(_, a)| a / angle).collect();
            branch_points.push(BranchPoint { base: pt.clone(), base_angle_pi: angle, indices });
        }
    }

    let mut marks = Vec::new();
    for m in base.marked_points() {
        let pt = SurfacePoint::from(m);
        if let Some((p, i)) = vertex_of(&pt) {
            // one mark per regular preimage; ramified preimages are cone points
            let mut seen = Vec::new();
            for sheet in 0..d {
                let c = surface.class_of_corner(sheet * np + p, i).expect("class");
                if seen.contains(&c) || surface.vertex_class(c).is_singular() {
                    continue;
                }
                seen.push(c);
                marks.push(MarkedPoint {
                    polygon: sheet * np + p,
                    position: w.polys[p][i].0.clone(),
                    label: format!("{}.{}", m.label, sheet + 1),
                });
            }
        } else {
            let p = (0..np)
                .find(|&p| w.origin[p] == m.polygon && w.polygon(p).locate(&m.position) != Location::Outside)
                .ok_or(Error::PointOffSurface)?;
            for sheet in 0..d {
                marks.push(MarkedPoint {
                    polygon: sheet * np + p,
                    position: m.position.clone(),
                    label: format!("{}.{}", m.label, sheet + 1),
                });
            }
        }
    }
    let surface = surface.with_marked_points(marks)?;
    Ok(Cover { surface, spec: spec.clone(), branch_points })
}

/// `d` sheets glued cyclically across one slit; `perm` must be a `d`-cycle.
pub fn cyclic_slit_cover(base: &Surface, slit: &Slit, perm: &[usize]) -> Result<Cover> {
    let d = perm.len();
    if d < 2 {
        return Err(Error::InvalidParams("degree must be at least 2".into()));
    }
    check_perm(perm, d)?;
    if !is_single_cycle(perm) {
        return Err(Error::NonTransitive);
    }
    slit_cover(base, &CoverSpec { degree: d, slits: vec![slit.clone()], perms: vec![perm.to_vec()] })
}

/// The `d`-cycle `i -> i + 1 mod d`.
pub fn standard_cycle(d: usize) -> Vec<usize> {
    (0..d).map(|i| (i + 1) % d).collect()
}

/// Two sheets with banks exchanged across each of an even, positive number of slits.
pub fn double_cover(base: &Surface, slits: &[Slit]) -> Result<Cover> {
    if slits.is_empty() || slits.len() % 2 != 0 {
        return Err(Error::InvalidParams(format!("need 2k slits with k >= 1, got {}", slits.len())));
    }
    slit_cover(base, &CoverSpec { degree: 2, slits: slits.to_vec(), perms: vec![vec![1, 0]; slits.len()] })
}

/// Genus predicted by Riemann-Hurwitz.
pub fn riemann_hurwitz(g_base: i64, d: u64, profile: &RamificationProfile) -> Result<i64> {
    if d == 0 || g_base < 0 {
        return Err(Error::InconsistentProfile);
    }
    let mut defect = 0i64;
    for (_, part) in &profile.points {
        if part.iter().sum::<u64>() != d || part.contains(&0) {
            return Err(Error::InconsistentProfile);
        }
        defect += part.iter().map(|&e| e as i64 - 1).sum::<i64>();
    }
    let chi = d as i64 * (2 - 2 * g_base) - defect;
    if chi % 2 != 0 || chi > 2 {
        return Err(Error::InconsistentProfile);
    }
    Ok((2 - chi) / 2)
}

/// Every preimage of every nonsingular branch point is ramified.
pub fn is_balanced(cover: &Cover) -> bool {
    cover.branch_points.iter().filter(|b| b.base_angle_pi == 2).all(|b| b.indices.iter().all(|&e| e > 1))
}

/// Ramification indices as a sorted partition, largest first.
pub fn partition(indices: &[u64]) -> Vec<u64> {
    let mut v = indices.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// Cone angles of the cover grouped by size, for quick comparison.
pub fn angle_histogram(s: &Surface) -> Result<BTreeMap<u64, usize>> {
    let mut h = BTreeMap::new();
    for c in &s.singularities()?.classes {
        *h.entry(c.angle_pi).or_insert(0) += 1;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{cross, square_torus};

    fn q(x: i64, y: i64, den: i64) -> Vec2 {
        Vec2::new(Scalar::ratio(x, den), Scalar::ratio(y, den))
    }

    fn pt(x: i64, y: i64, den: i64) -> SurfacePoint {
        SurfacePoint::new(0, q(x, y, den))
    }

    fn cross_with_centre() -> Surface {
        cross(&Scalar::one(), &Scalar::one()).unwrap().add_marked_point(0, q(3, 3, 2), "p").unwrap()
    }

    fn centre_slit(s: &Surface) -> Slit {
        Slit::new(s, &pt(1, 1, 1), &pt(3, 3, 2), &Vec2::ints(1, 1)).unwrap()
    }

    fn horizontal(s: &Surface, x0: i64, x1: i64, y: i64, den: i64) -> Slit {
        Slit::new(s, &pt(x0, y, den), &pt(x1, y, den), &Vec2::ints(1, 0)).unwrap()
    }

    #[test]
    fn cyclic_covers_of_the_cross() {
        let base = cross_with_centre();
        let slit = centre_slit(&base);
        assert_eq!(slit.holonomy, q(1, 1, 2));
        for d in 2..=5usize {
            let cover = cyclic_slit_cover(&base, &slit, &standard_cycle(d)).unwrap();
            assert!(cover.surface.validate().is_empty());
            let g = cover.surface.genus().unwrap();
            assert_eq!(g, 2 * d as i64);
            assert_eq!(riemann_hurwitz(2, d as u64, &cover.profile()).unwrap(), g);
            assert_eq!(cover.surface.area(), &base.area() * &Scalar::int(d as i64));
            assert!(is_balanced(&cover));
            // both endpoints totally ramified: 6pi lifts to 6d pi, the regular point to 2d pi
            let hist = angle_histogram(&cover.surface).unwrap();
            assert_eq!(hist.get(&(6 * d as u64)), Some(&1));
            assert_eq!(hist.get(&(2 * d as u64)).copied().unwrap_or(0) >= 1, true);
        }
    }

    #[test]
    fn double_cover_of_torus_between_regular_points() {
        let base = square_torus();
        let slit = horizontal(&base, 1, 3, 2, 4);
        let cover = cyclic_slit_cover(&base, &slit, &[1, 0]).unwrap();
        assert_eq!(cover.surface.genus().unwrap(), 2);
        assert_eq!(cover.surface.euler_characteristic().unwrap(), -2);
    }

    #[test]
    fn double_covers_with_slit_pairs() {
        let base = cross(&Scalar::one(), &Scalar::one()).unwrap();
        let mut slits = vec![horizontal(&base, 5, 7, 5, 4), horizontal(&base, 5, 7, 7, 4)];
        let c1 = double_cover(&base, &slits).unwrap();
        assert_eq!(c1.surface.genus().unwrap(), 5);
        assert!(is_balanced(&c1));
        slits.push(horizontal(&base, 1, 3, 5, 4));
        slits.push(horizontal(&base, 9, 11, 5, 4));
        let c2 = double_cover(&base, &slits).unwrap();
        assert_eq!(c2.surface.genus().unwrap(), 7);
        assert_eq!(riemann_hurwitz(2, 2, &c2.profile()).unwrap(), 7);

        let torus = square_torus();
        let slits = vec![horizontal(&torus, 1, 3, 1, 4), horizontal(&torus, 1, 3, 3, 4)];
        assert_eq!(double_cover(&torus, &slits).unwrap().surface.genus().unwrap(), 3);
        assert!(double_cover(&torus, &slits[..1]).is_err());
    }

    #[test]
    fn unbalanced_and_invalid_permutations() {
        let base = square_torus();
        let slit = horizontal(&base, 1, 3, 2, 4);
        let spec = CoverSpec { degree: 3, slits: vec![slit.clone()], perms: vec![vec![1, 0, 2]] };
        let cover = slit_cover(&base, &spec).unwrap();
        assert!(!is_balanced(&cover));
        assert_eq!(cover.surface.area(), Scalar::int(3));
        assert_eq!(cyclic_slit_cover(&base, &slit, &[1, 0, 2]).unwrap_err(), Error::NonTransitive);
        assert!(matches!(cyclic_slit_cover(&base, &slit, &[1, 1]), Err(Error::InvalidPermutation(_))));
    }

    #[test]
    fn overlapping_slits_are_rejected() {
        let base = square_torus();
        let a = horizontal(&base, 1, 3, 2, 4);
        let b = Slit::new(&base, &pt(2, 1, 4), &pt(2, 3, 4), &Vec2::ints(0, 1)).unwrap();
        assert_eq!(double_cover(&base, &[a, b]).unwrap_err(), Error::OverlappingSlits);
    }

    #[test]
    fn slit_must_avoid_singularities() {
        let base = cross(&Scalar::one(), &Scalar::one()).unwrap();
        // runs from the left arm through the singular corner at (1,2)
        let r = Slit::new(&base, &pt(1, 3, 2), &pt(3, 5, 2), &Vec2::ints(1, 1));
        assert_eq!(r.unwrap_err(), Error::SlitThroughSingularity);
    }

    #[test]
    fn riemann_hurwitz_examples() {
        let p = SurfacePoint::new(0, Vec2::zero());
        for d in 2..6u64 {
            let prof = RamificationProfile { points: vec![(p.clone(), vec![d]), (p.clone(), vec![d])] };
            assert_eq!(riemann_hurwitz(2, d, &prof).unwrap(), 2 * d as i64);
        }
        for k in 1..4i64 {
            let prof = RamificationProfile { points: vec![(p.clone(), vec![2]); 4 * k as usize] };
            assert_eq!(riemann_hurwitz(2, 2, &prof).unwrap(), 3 + 2 * k);
        }
        assert_eq!(riemann_hurwitz(3, 1, &RamificationProfile { points: vec![] }).unwrap(), 3);
        let bad = RamificationProfile { points: vec![(p.clone(), vec![2, 2])] };
        assert_eq!(riemann_hurwitz(2, 3, &bad).unwrap_err(), Error::InconsistentProfile);
    }
}
