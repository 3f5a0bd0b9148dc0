//! Standard surfaces: the square torus, the cross and the L-shaped table.

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::geom::Vec2;
use crate::surface::{EdgeRef, Polygon, Surface};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    SquareTorus,
    Cross,
    L,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Preset> {
        match s {
            "square_torus" | "torus" => Ok(Preset::SquareTorus),
            "cross" => Ok(Preset::Cross),
            "L" | "l" => Ok(Preset::L),
            other => Err(Error::InvalidParams(format!("unknown preset '{other}'"))),
        }
    }
}

fn field_of(params: &[Scalar]) -> Result<u64> {
    let mut d = 0;
    for p in params {
        if !p.is_positive() {
            return Err(Error::InvalidParams(format!("parameter {p} is not positive")));
        }
        match (d, p.field()) {
            (_, 0) => {}
            (0, f) => d = f,
            (x, f) if x == f => {}
            (x, f) => return Err(Error::FieldMismatch(x, f)),
        }
    }
    Ok(d)
}

pub fn build_preset(preset: Preset, params: &[Scalar]) -> Result<Surface> {
    let want = match preset {
        Preset::SquareTorus => 0,
        Preset::Cross => 2,
        Preset::L => 4,
    };
    if params.len() != want {
        return Err(Error::InvalidParams(format!("{preset:?} takes {want} parameters, got {}", params.len())));
    }
    match preset {
        Preset::SquareTorus => Ok(square_torus()),
        Preset::Cross => cross(&params[0], &params[1]),
        Preset::L => l_shape(&params[0], &params[1], &params[2], &params[3]),
    }
}

fn rect(x0: &Scalar, y0: &Scalar, w: &Scalar, h: &Scalar) -> Polygon {
    let (x1, y1) = (x0 + w, y0 + h);
    Polygon::new(vec![
        Vec2::new(x0.clone(), y0.clone()),
        Vec2::new(x1.clone(), y0.clone()),
        Vec2::new(x1, y1.clone()),
        Vec2::new(x0.clone(), y1),
    ])
}

fn e(p: usize, i: usize) -> EdgeRef {
    EdgeRef::new(p, i)
}

/// Unit square with opposite sides glued.
pub fn square_torus() -> Surface {
    let one = Scalar::one();
    Surface::new(0, vec![rect(&Scalar::zero(), &Scalar::zero(), &one, &one)], vec![(e(0, 0), e(0, 2)), (e(0, 1), e(0, 3))], vec![])
        .expect("square torus is valid")
}

/// The 12-gon `[0, 2a+b] x [a, a+b]  U  [a, a+b] x [0, 2a+b]`. Each arm's two
/// flanks are glued to each other, and the two pairs of arm ends are glued.
pub fn cross(a: &Scalar, b: &Scalar) -> Result<Surface> {
    let d = field_of(&[a.clone(), b.clone()])?;
    let z = Scalar::zero();
    let (ab, aab) = (a + b, a + a + b);
    let p = |x: &Scalar, y: &Scalar| Vec2::new(x.clone(), y.clone());
    let vertices = vec![
        p(a, &z),
        p(&ab, &z),
        p(&ab, a),
        p(&aab, a),
        p(&aab, &ab),
        p(&ab, &ab),
        p(&ab, &aab),
        p(a, &aab),
        p(a, &ab),
        p(&z, &ab),
        p(&z, a),
        p(a, a),
    ];
    let pairs = [(1, 11), (2, 4), (5, 7), (8, 10), (0, 6), (3, 9)].iter().map(|&(i, j)| (e(0, i), e(0, j))).collect();
    Surface::new(d, vec![Polygon::new(vertices)], pairs, vec![])
}

/// L-shaped surface from three rectangles: a `w1 x h1` base (split at `x = w2`)
/// with a `w2 x h2` column on its left part.
pub fn l_shape(w1: &Scalar, h1: &Scalar, w2: &Scalar, h2: &Scalar) -> Result<Surface> {
    let d = field_of(&[w1.clone(), h1.clone(), w2.clone(), h2.clone()])?;
    if w2 >= w1 {
        return Err(Error::InvalidParams("L needs w2 < w1".into()));
    }
    let z = Scalar::zero();
    let polys = vec![rect(&z, &z, w2, h1), rect(w2, &z, &(w1 - w2), h1), rect(&z, h1, w2, h2)];
    let pairs = vec![
        (e(0, 2), e(2, 0)),
        (e(2, 2), e(0, 0)),
        (e(1, 2), e(1, 0)),
        (e(0, 1), e(1, 3)),
        (e(1, 1), e(0, 3)),
        (e(2, 1), e(2, 3)),
    ];
    Surface::new(d, polys, pairs, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent vertex identification: union-find over the endpoint pairs
    /// that each gluing identifies, then angle bookkeeping in quarter turns for
    /// axis-parallel polygons.
    fn union_find_classes(s: &Surface) -> Vec<Vec<(usize, usize)>> {
        let ids: Vec<(usize, usize)> =
            s.polygons().iter().enumerate().flat_map(|(p, poly)| (0..poly.len()).map(move |i| (p, i))).collect();
        let idx = |c: (usize, usize)| ids.iter().position(|&x| x == c).unwrap();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for g in s.gluings() {
            let na = s.polygon(g.a.polygon).len();
            let nb = s.polygon(g.b.polygon).len();
            let pairs = [
                ((g.a.polygon, g.a.edge), (g.b.polygon, (g.b.edge + 1) % nb)),
                ((g.a.polygon, (g.a.edge + 1) % na), (g.b.polygon, g.b.edge)),
            ];
            for (x, y) in pairs {
                let (rx, ry) = (find(&mut parent, idx(x)), find(&mut parent, idx(y)));
                parent[rx] = ry;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
        for (k, &c) in ids.iter().enumerate() {
            groups.entry(find(&mut parent, k)).or_default().push(c);
        }
        groups.into_values().collect()
    }

    fn quarter_turns(s: &Surface, (p, i): (usize, usize)) -> u64 {
        let poly = s.polygon(p);
        let (u, w) = (poly.edge(i), poly.corner_end(i));
        // axis-parallel corners only: pi/2 or 3pi/2
        if u.cross(&w).is_positive() {
            1
        } else {
            3
        }
    }

    #[test]
    fn square_torus_invariants() {
        let s = square_torus();
        assert!(s.validate().is_empty());
        assert_eq!(s.genus().unwrap(), 1);
        assert_eq!(s.area(), Scalar::one());
        let rep = s.singularities().unwrap();
        assert_eq!(rep.classes.len(), 1);
        assert_eq!(rep.classes[0].angle_pi, 2);
        assert_eq!(rep.classes[0].order, 0);
        assert!(rep.singular_angles().is_empty());
    }

    #[test]
    fn cross_one_one_matches_union_find_oracle() {
        let s = cross(&Scalar::one(), &Scalar::one()).unwrap();
        assert!(s.validate().is_empty());
        let oracle = union_find_classes(&s);
        // oracle: 3 classes, quarter-turn sums 4, 4, 12
        let mut sums: Vec<u64> = oracle.iter().map(|c| c.iter().map(|&k| quarter_turns(&s, k)).sum()).collect();
        sums.sort_unstable();
        assert_eq!(sums, vec![4, 4, 12]);
        let rep = s.singularities().unwrap();
        let mut angles: Vec<u64> = rep.classes.iter().map(|c| c.angle_pi).collect();
        angles.sort_unstable();
        assert_eq!(angles, vec![2, 2, 6]);
        let mut mine: Vec<Vec<(usize, usize)>> = rep
            .classes
            .iter()
            .map(|c| {
                let mut v = c.corners.clone();
                v.sort();
                v
            })
            .collect();
        mine.sort();
        let mut theirs = oracle.clone();
        theirs.sort();
        assert_eq!(mine, theirs);
        // Euler oracle V=3, E=6, F=1
        assert_eq!(s.euler_characteristic().unwrap(), -2);
        assert_eq!(s.genus().unwrap(), 2);
        assert_eq!(s.area(), Scalar::int(5));
    }

    #[test]
    fn golden_cross_area() {
        let phi = Scalar::golden();
        let s = cross(&phi, &Scalar::one()).unwrap();
        assert_eq!(s.area(), "3+2*sqrt(5)".parse().unwrap());
        assert_eq!(s.genus().unwrap(), 2);
        assert_eq!(s.singularities().unwrap().singular_angles(), vec![6]);
    }

    #[test]
    fn l_shape_is_genus_two() {
        let s = l_shape(&Scalar::int(2), &Scalar::one(), &Scalar::one(), &Scalar::one()).unwrap();
        assert_eq!(s.genus().unwrap(), 2);
        assert_eq!(s.singularities().unwrap().singular_angles(), vec![6]);
        assert_eq!(s.area(), Scalar::int(3));
        assert!(l_shape(&Scalar::one(), &Scalar::one(), &Scalar::one(), &Scalar::one()).is_err());
    }

    #[test]
    fn cyclic_double_cover_of_torus_is_regular() {
        let one = Scalar::one();
        let polys = vec![rect(&Scalar::zero(), &Scalar::zero(), &one, &one), rect(&one, &Scalar::zero(), &one, &one)];
        let pairs = vec![(e(0, 0), e(0, 2)), (e(1, 0), e(1, 2)), (e(0, 1), e(1, 3)), (e(1, 1), e(0, 3))];
        let s = Surface::new(0, polys, pairs, vec![]).unwrap();
        let rep = s.singularities().unwrap();
        assert!(rep.classes.iter().all(|c| c.angle_pi == 2));
        assert_eq!(s.genus().unwrap(), 1);
        let oracle = union_find_classes(&s);
        assert_eq!(oracle.len(), rep.classes.len());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(build_preset(Preset::Cross, &[Scalar::one()]).is_err());
        assert!(build_preset(Preset::Cross, &[Scalar::one(), Scalar::int(-1)]).is_err());
    }
}
