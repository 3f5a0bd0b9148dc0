//! Direction census: cusp invariants of parabolic directions and sequences
//! of fat directions produced by a parabolic twist.

use rayon::prelude::*;
use serde::Serialize;

use crate::action::{boundary_point, BoundaryPoint, Direction, Mat2};
use crate::cylinder::{classify_decomposition, decompose, torus_signature, DirectionClass, SplitRatio};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::surface::Surface;
use crate::tracer::{saddle_connections_in_direction, SurfacePoint};

/// Ratios `|c_i| / |c_j|`, `i < j`, over the saddle connections in one
/// direction ordered by length; sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CuspInvariant {
    pub lengths_sq: Vec<Scalar>,
    pub ratios: Vec<Scalar>,
}

pub fn cusp_invariant(s: &Surface, dir: &Direction, cap: &Scalar) -> Result<CuspInvariant> {
    let mut scs = saddle_connections_in_direction(s, dir.vector(), cap)?;
    if scs.is_empty() {
        return Err(Error::NoConnections);
    }
    scs.sort_by(|a, b| a.length_sq.cmp(&b.length_sq));
    let mut ratios = Vec::new();
    for (i, a) in scs.iter().enumerate() {
        for b in &scs[i + 1..] {
            // parallel and equally oriented, so the length ratio is a dot product ratio
            ratios.push(&a.holonomy.dot(&b.holonomy) / &b.length_sq);
        }
    }
    ratios.sort();
    Ok(CuspInvariant { lengths_sq: scs.into_iter().map(|c| c.length_sq).collect(), ratios })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectionReport {
    pub direction: String,
    pub class: DirectionClass,
    pub boundary_point: String,
    pub m: Option<usize>,
    pub s_prime: Option<Scalar>,
    pub cusp_invariant: Option<CuspInvariant>,
}

/// Classifies one direction and attaches the invariants that apply to it.
pub fn report(s: &Surface, dir: &Direction, cap: &Scalar) -> DirectionReport {
    let xi: BoundaryPoint = boundary_point(dir);
    let mut out = DirectionReport {
        direction: dir.to_string(),
        class: DirectionClass::Undetermined { cap: cap.clone() },
        boundary_point: xi.to_string(),
        m: None,
        s_prime: None,
        cusp_invariant: None,
    };
    let class = match crate::cylinder::classify_direction(s, dir, cap) {
        Ok(DirectionClass::NotPeriodic) => DirectionClass::NotPeriodic,
        Ok(_) => match decompose(s, dir, cap) {
            Ok(dec) => {
                if let Ok(sig) = torus_signature(&dec) {
                    out.m = Some(sig.m);
                    out.s_prime = sig.s_prime;
                }
                classify_decomposition(&dec).unwrap_or(DirectionClass::Undetermined { cap: cap.clone() })
            }
            Err(_) => DirectionClass::Undetermined { cap: cap.clone() },
        },
        Err(_) => DirectionClass::Undetermined { cap: cap.clone() },
    };
    if matches!(class, DirectionClass::Parabolic { .. }) {
        out.cusp_invariant = cusp_invariant(s, dir, cap).ok();
    }
    out.class = class;
    out
}

/// One report per direction, in input order.
pub fn census(s: &Surface, directions: &[Direction], cap: &Scalar) -> Vec<DirectionReport> {
    directions.par_iter().map(|d| report(s, d, cap)).collect()
}

/// Seeds followed by their images under `phi^-n`, `n = 1..=count`, without repeats.
pub fn harvest_directions(seeds: &[Direction], phi: &Mat2, count: u32) -> Result<Vec<Direction>> {
    let inv = phi.inverse()?;
    let mut out: Vec<Direction> = Vec::new();
    for seed in seeds {
        let mut d = seed.clone();
        for n in 0..=count {
            if n > 0 {
                d = d.transform(&inv)?;
            }
            if !out.contains(&d) {
                out.push(d.clone());
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FatItem {
    pub n: u32,
    pub direction: String,
    /// `|tan|` of the angle between this direction and theta.
    pub slope_gap: Option<Scalar>,
    pub complete: bool,
    pub ratio: Option<SplitRatio>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FatSequence {
    pub theta: String,
    pub twist: String,
    pub seed: String,
    pub mark: String,
    pub items: Vec<FatItem>,
}

impl FatSequence {
    /// Slope gaps strictly decrease along the sequence.
    pub fn converges(&self) -> bool {
        let gaps: Vec<&Scalar> = self.items.iter().filter_map(|i| i.slope_gap.as_ref()).collect();
        gaps.len() == self.items.len() && gaps.windows(2).all(|w| w[1] < w[0])
    }

    /// Ratios of the completed items, in order.
    pub fn ratios(&self) -> Vec<Scalar> {
        self.items.iter().filter_map(|i| i.ratio.as_ref().and_then(|r| r.value().cloned())).collect()
    }
}

/// Determinant one, trace two, not the identity, and fixing `theta`.
pub fn is_parabolic_fixing(phi: &Mat2, theta: &Direction) -> bool {
    let two = Scalar::int(2);
    phi.det() == Scalar::one()
        && &phi.m11 + &phi.m22 == two
        && !phi.is_identity()
        && phi.apply(theta.vector()).is_parallel(theta.vector())
}

fn slope_gap(d: &Direction, theta: &Direction) -> Option<Scalar> {
    let (u, t) = (d.vector(), theta.vector());
    let dot = u.dot(t);
    (!dot.is_zero()).then(|| (&u.cross(t) / &dot).abs())
}

/// Directions `phi^-n (seed)` for `n = 1..=count`, each decomposed under
/// `cap` and, when complete, with the splitting ratio of mark `label`.
pub fn fat_sequence(
    s: &Surface,
    label: &str,
    theta: &Direction,
    phi: &Mat2,
    seed: &Direction,
    count: u32,
    cap: &Scalar,
) -> Result<FatSequence> {
    if !is_parabolic_fixing(phi, theta) {
        return Err(Error::NotParabolicMatrix);
    }
    let mark = s.marked_point(label).ok_or_else(|| Error::InvalidParams(format!("no marked point '{label}'")))?;
    let point = SurfacePoint::from(mark);
    let inv = phi.inverse()?;
    let mut dirs = Vec::new();
    let mut d = seed.clone();
    for _ in 0..count {
        d = d.transform(&inv)?;
        dirs.push(d.clone());
    }
    let items = dirs
        .par_iter()
        .enumerate()
        .map(|(k, d)| {
            let dec = decompose(s, d, cap)?;
            let complete = dec.is_complete();
            let ratio = if complete { Some(dec.locate(&point)?) } else { None };
            Ok(FatItem { n: k as u32 + 1, direction: d.to_string(), slope_gap: slope_gap(d, theta), complete, ratio })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FatSequence {
        theta: theta.to_string(),
        twist: phi.to_string(),
        seed: seed.to_string(),
        mark: label.to_string(),
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::apply_matrix;
    use crate::cylinder::parabolic_twist;
    use crate::geom::Vec2;
    use crate::presets::{cross, square_torus};

    fn cross11() -> Surface {
        cross(&Scalar::one(), &Scalar::one()).unwrap()
    }

    fn marked_cross() -> Surface {
        let y = &Scalar::one() + &Scalar::golden_conjugate();
        cross11().add_marked_point(0, Vec2::new(Scalar::ratio(3, 2), y), "p").unwrap()
    }

    #[test]
    fn cusp_invariant_of_cross_horizontal() {
        let s = cross11();
        let inv = cusp_invariant(&s, &Direction::horizontal(), &Scalar::int(4)).unwrap();
        // saddle connections of lengths 1, 1, 2
        assert_eq!(inv.lengths_sq, vec![Scalar::one(), Scalar::one(), Scalar::int(4)]);
        assert_eq!(inv.ratios, vec![Scalar::ratio(1, 2), Scalar::ratio(1, 2), Scalar::one()]);
        assert_eq!(cusp_invariant(&square_torus(), &Direction::vertical(), &Scalar::int(4)), Err(Error::NoConnections));
    }

    #[test]
    fn cusp_invariant_survives_the_twist() {
        let s = cross11();
        let cap = Scalar::int(8);
        let dir = Direction::horizontal();
        let dec = decompose(&s, &dir, &cap).unwrap();
        let phi = parabolic_twist(&dec).unwrap();
        let t = apply_matrix(&s, &phi).unwrap();
        let dir2 = dir.transform(&phi).unwrap();
        assert_eq!(dir2, dir);
        assert_eq!(cusp_invariant(&t, &dir2, &cap).unwrap(), cusp_invariant(&s, &dir, &cap).unwrap());
    }

    #[test]
    fn torus_census() {
        let s = square_torus();
        let dirs = [Direction::vertical(), Direction::horizontal(), Direction::from_ints(1, 1).unwrap()];
        let reps = census(&s, &dirs, &Scalar::int(4));
        assert_eq!(reps.len(), 3);
        assert!(reps.iter().all(|r| matches!(r.class, DirectionClass::Parabolic { .. })));
        assert!(census(&s, &[], &Scalar::one()).is_empty());
        assert_eq!(census(&s, &dirs, &Scalar::int(4)), reps);
    }

    #[test]
    fn marked_cross_census_has_fat_direction() {
        let s = marked_cross();
        let reps = census(&s, &[Direction::vertical(), Direction::horizontal()], &Scalar::int(6));
        assert!(reps.iter().any(|r| matches!(r.class, DirectionClass::Fat { .. })));
    }

    #[test]
    fn fat_sequence_directions() {
        let s = marked_cross();
        let phi = Mat2::ints(1, 3, 0, 1);
        let seq = fat_sequence(&s, "p", &Direction::horizontal(), &phi, &Direction::vertical(), 3, &Scalar::int(40)).unwrap();
        let dirs: Vec<String> = seq.items.iter().map(|i| i.direction.clone()).collect();
        let expected: Vec<String> =
            (1..=3).map(|n| Direction::from_ints(-3 * n, 1).unwrap().to_string()).collect();
        assert_eq!(dirs, expected);
        assert!(seq.converges());
        let one = fat_sequence(&s, "p", &Direction::horizontal(), &phi, &Direction::vertical(), 1, &Scalar::int(40)).unwrap();
        assert_eq!(one.items.len(), 1);
        assert_eq!(
            fat_sequence(&s, "p", &Direction::horizontal(), &Mat2::ints(2, 0, 0, 1), &Direction::vertical(), 1, &Scalar::one()),
            Err(Error::NotParabolicMatrix)
        );
    }

    #[test]
    fn harvesting_repeats_nothing() {
        let phi = Mat2::ints(1, 3, 0, 1);
        let dirs = harvest_directions(&[Direction::vertical(), Direction::horizontal()], &phi, 2).unwrap();
        assert_eq!(dirs.len(), 4);
    }
}
