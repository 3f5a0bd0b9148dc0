//! File formats: canonical surface JSON, cover specifications, census and
//! decomposition reports, and SVG drawings.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::census::DirectionReport;
use crate::cover::{CoverSpec, Slit};
use crate::cylinder::{Cylinder, Decomposition};
use crate::error::{Error, Result};
use crate::field::{json as sj, Scalar};
use crate::geom::Vec2;
use crate::surface::{EdgeRef, MarkedPoint, Polygon, Surface};
use crate::tracer::SurfacePoint;

fn point_value(v: &Vec2) -> Value {
    json!([sj::to_value(&v.x), sj::to_value(&v.y)])
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn point_from(v: &Value) -> Result<Vec2> {
    match v {
        Value::Array(xs) if xs.len() == 2 => Ok(Vec2::new(sj::from_value(&xs[0])?, sj::from_value(&xs[1])?)),
        Value::String(s) => crate::action::parse_vec2(s),
        other => Err(parse_err(format!("expected a point, got {other}"))),
    }
}

fn index(m: &Map<String, Value>, key: &str) -> Result<usize> {
    m.get(key)
        .and_then(Value::as_u64)
        .map(|n| n as usize)
        .ok_or_else(|| parse_err(format!("missing or non-integer '{key}'")))
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| parse_err(format!("{what} must be an object")))
}

fn array<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a Vec<Value>> {
    match m.get(key) {
        Some(Value::Array(xs)) => Ok(xs),
        None => Err(parse_err(format!("missing '{key}'"))),
        Some(_) => Err(parse_err(format!("'{key}' must be an array"))),
    }
}

pub fn surface_to_value(s: &Surface) -> Value {
    let polygons: Vec<Value> = s
        .polygons()
        .iter()
        .map(|p| json!({"vertices": p.vertices.iter().map(point_value).collect::<Vec<_>>()}))
        .collect();
    let gluings: Vec<Value> = s
        .gluings()
        .iter()
        .map(|g| json!({"p1": g.a.polygon, "e1": g.a.edge, "p2": g.b.polygon, "e2": g.b.edge}))
        .collect();
    let marks: Vec<Value> = s
        .marked_points()
        .iter()
        .map(|m| json!({"polygon": m.polygon, "at": point_value(&m.position), "label": m.label}))
        .collect();
    json!({"field": {"d": s.field()}, "polygons": polygons, "gluings": gluings, "marked_points": marks})
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = serde_json::to_string_pretty(v).expect("values always serialize");
    out.push('\n');
    out
}

pub fn surface_to_json(s: &Surface) -> String {
    to_canonical_json(&surface_to_value(s))
}

pub fn surface_from_value(v: &Value) -> Result<Surface> {
    let m = object(v, "surface")?;
    let field = m
        .get("field")
        .and_then(|f| f.get("d"))
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err("missing field.d"))?;
    let polygons = array(m, "polygons")?
        .iter()
        .map(|p| {
            let verts = array(object(p, "polygon")?, "vertices")?;
            Ok(Polygon::new(verts.iter().map(point_from).collect::<Result<_>>()?))
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = array(m, "gluings")?
        .iter()
        .map(|g| {
            let g = object(g, "gluing")?;
            Ok((EdgeRef::new(index(g, "p1")?, index(g, "e1")?), EdgeRef::new(index(g, "p2")?, index(g, "e2")?)))
        })
        .collect::<Result<Vec<_>>>()?;
    let marks = match m.get("marked_points") {
        None => Vec::new(),
        Some(_) => array(m, "marked_points")?
            .iter()
            .map(|p| {
                let p = object(p, "marked point")?;
                let label = p.get("label").and_then(Value::as_str).ok_or_else(|| parse_err("marked point needs a label"))?;
                Ok(MarkedPoint {
                    polygon: index(p, "polygon")?,
                    position: point_from(p.get("at").ok_or_else(|| parse_err("marked point needs 'at'"))?)?,
                    label: label.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Surface::new(field, polygons, pairs, marks)
}

pub fn surface_from_json(text: &str) -> Result<Surface> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    surface_from_value(&v)
}

fn surface_point(v: &Value) -> Result<SurfacePoint> {
    let m = object(v, "slit endpoint")?;
    Ok(SurfacePoint::new(index(m, "polygon")?, point_from(m.get("at").ok_or_else(|| parse_err("endpoint needs 'at'"))?)?))
}

/// Reads `{"degree", "slits": [{"from", "to", "dir"}], "perms"}`; endpoints are
/// `{"polygon", "at"}` and permutations list 1-based images.
pub fn cover_spec_from_json(base: &Surface, text: &str) -> Result<CoverSpec> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let m = object(&v, "cover spec")?;
    let degree = index(m, "degree")?;
    let slits = array(m, "slits")?
        .iter()
        .map(|sl| {
            let sl = object(sl, "slit")?;
            let get = |k: &str| sl.get(k).ok_or_else(|| parse_err(format!("slit needs '{k}'")));
            Slit::new(base, &surface_point(get("from")?)?, &surface_point(get("to")?)?, &point_from(get("dir")?)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let perms = match m.get("perms") {
        None => Vec::new(),
        Some(_) => array(m, "perms")?
            .iter()
            .map(|p| {
                p.as_array()
                    .ok_or_else(|| parse_err("permutation must be an array"))?
                    .iter()
                    .map(|x| match x.as_u64() {
                        Some(k) if k >= 1 => Ok(k as usize - 1),
                        _ => Err(Error::InvalidPermutation(format!("bad entry {x}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(CoverSpec { degree, slits, perms })
}

/// Exact text for a length given by its square.
pub fn exact_sqrt_string(sq: &Scalar, field: u64) -> String {
    match sq.sqrt_in_field(field) {
        Some(r) => r.to_string(),
        None => format!("sqrt({sq})"),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cylinder_width_sq(c: &Cylinder) -> Scalar {
    let a2 = &c.area * &c.area;
    &a2 / &c.circumference_sq()
}

/// One row per cylinder: circumference, width, inverse modulus and the index
/// of its commensurability class.
pub fn decomposition_csv(dec: &Decomposition, field: u64, classes: &[Vec<usize>]) -> String {
    let mut out = String::from("direction,cylinder,circumference,width,inverse_modulus,class\n");
    for c in &dec.cylinders {
        let class = classes.iter().position(|k| k.contains(&c.id)).map_or(String::new(), |k| k.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&dec.direction.to_string()),
            c.id,
            csv_field(&exact_sqrt_string(&c.circumference_sq(), field)),
            csv_field(&exact_sqrt_string(&cylinder_width_sq(c), field)),
            csv_field(&c.inverse_modulus.to_string()),
            class
        );
    }
    out
}

pub fn census_json(reports: &[DirectionReport]) -> String {
    to_canonical_json(&serde_json::to_value(reports).expect("reports serialize"))
}

pub fn census_csv(reports: &[DirectionReport]) -> String {
    use crate::cylinder::DirectionClass as C;
    let mut out = String::from("direction,class,xi,m,invariant\n");
    for r in reports {
        let (name, inv) = match &r.class {
            C::NotPeriodic => ("NotPeriodic", String::new()),
            C::Undetermined { cap } => ("Undetermined", cap.to_string()),
            C::Parabolic { s_prime } => ("Parabolic", s_prime.to_string()),
            C::Fat { ratio, .. } => ("Fat", ratio.to_string()),
            C::PeriodicMixed { .. } => ("PeriodicMixed", String::new()),
        };
        let m = r.m.map_or(String::new(), |m| m.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.direction),
            name,
            csv_field(&r.boundary_point),
            m,
            csv_field(&inv)
        );
    }
    out
}

fn fmt12(x: f64) -> String {
    let s = format!("{:.*e}", 11, x);
    let v: f64 = s.parse().unwrap_or(x);
    let mut t = format!("{v}");
    if t == "-0" {
        t = "0".to_string();
    }
    t
}

/// Draws the polygons side by side with the saddle connections of `dec`
/// (if any) and the marked points.
pub fn render_svg(s: &Surface, dec: Option<&Decomposition>) -> Result<String> {
    let polys = s.polygons();
    let mut offsets = Vec::with_capacity(polys.len());
    let (mut x_cursor, mut y_min, mut y_max) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    let gap = 0.5;
    for p in polys {
        let pts: Vec<(f64, f64)> = p.vertices.iter().map(Vec2::to_f64).collect();
        let lo = pts.iter().map(|q| q.0).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|q| q.0).fold(f64::NEG_INFINITY, f64::max);
        for q in &pts {
            y_min = y_min.min(q.1);
            y_max = y_max.max(q.1);
        }
        offsets.push(x_cursor - lo);
        x_cursor += hi - lo + gap;
    }
    if polys.is_empty() {
        y_min = 0.0;
        y_max = 0.0;
    }
    let width = (x_cursor - gap).max(0.0);
    let height = y_max - y_min;
    let pt = |k: usize, v: &(f64, f64)| (fmt12(v.0 + offsets[k]), fmt12(y_max + y_min - v.1));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        fmt12(-0.1),
        fmt12(y_min - 0.1),
        fmt12(width + 0.2),
        fmt12(height + 0.2)
    );
    out.push_str("<!-- coordinates rounded to 12 significant digits for display; not exact -->\n");
    for (k, p) in polys.iter().enumerate() {
        let pts: Vec<String> = p
            .vertices
            .iter()
            .map(|v| {
                let (x, y) = pt(k, &v.to_f64());
                format!("{x},{y}")
            })
            .collect();
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"#eef\" stroke=\"#000\" stroke-width=\"0.01\"/>",
            pts.join(" ")
        );
    }
    if let Some(dec) = dec {
        let back = dec.normalizer().inverse()?;
        for sc in &dec.saddle_connections {
            for seg in &sc.path {
                let (x1, y1) = pt(seg.polygon, &back.apply(&seg.entry).to_f64());
                let (x2, y2) = pt(seg.polygon, &back.apply(&seg.exit).to_f64());
                let _ = writeln!(
                    out,
                    "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#c00\" stroke-width=\"0.01\"/>"
                );
            }
        }
    }
    for m in s.marked_points() {
        let (x, y) = pt(m.polygon, &m.position.to_f64());
        let _ = writeln!(out, "<circle cx=\"{x}\" cy=\"{y}\" r=\"0.03\" fill=\"#06c\"><title>{}</title></circle>", m.label);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Direction;
    use crate::cylinder::decompose;
    use crate::presets::{cross, square_torus};

    #[test]
    fn surface_round_trip() {
        let marked = cross(&Scalar::one(), &Scalar::one())
            .unwrap()
            .add_marked_point(0, Vec2::new(Scalar::ratio(3, 2), Scalar::ratio(4, 3)), "p")
            .unwrap();
        for s in [marked, cross(&Scalar::golden(), &Scalar::one()).unwrap()] {
            let text = surface_to_json(&s);
            let back = surface_from_json(&text).unwrap();
            assert_eq!(back, s);
            assert_eq!(surface_to_json(&back), text);
        }
    }

    #[test]
    fn rejects_malformed_surface() {
        assert!(matches!(surface_from_json("{\"polygons\": []}"), Err(Error::Parse(_))));
        assert!(surface_from_json("not json").is_err());
    }

    #[test]
    fn cover_spec_perms_are_one_based() {
        let s = square_torus();
        let text = r#"{"degree": 2,
            "slits": [{"from": {"polygon": 0, "at": ["1/4", "1/4"]}, "to": {"polygon": 0, "at": ["1/2", "1/2"]}, "dir": [1, 1]}],
            "perms": [[2, 1]]}"#;
        let spec = cover_spec_from_json(&s, text).unwrap();
        assert_eq!(spec.perms, vec![vec![1, 0]]);
        assert_eq!(spec.slits[0].holonomy, Vec2::new(Scalar::ratio(1, 4), Scalar::ratio(1, 4)));
    }

    #[test]
    fn csv_is_exact() {
        let s = square_torus();
        let dec = decompose(&s, &Direction::from_ints(1, 1).unwrap(), &Scalar::int(4)).unwrap();
        let csv = decomposition_csv(&dec, s.field(), &[vec![0]]);
        assert_eq!(csv.lines().nth(1).unwrap(), "\"1,1\",0,sqrt(2),sqrt(1/2),2,0");
    }

    #[test]
    fn svg_has_header() {
        let s = square_torus();
        let svg = render_svg(&s, None).unwrap();
        assert!(svg.contains("12 significant digits"));
        assert!(svg.contains("<polygon points=\"0,1 1,1 1,0 0,0\""));
    }
}
