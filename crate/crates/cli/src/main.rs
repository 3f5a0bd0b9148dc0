use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tsurf::action::{parse_mat2, parse_vec2, Direction};
use tsurf::census::{census, fat_sequence, harvest_directions};
use tsurf::cover::{cyclic_slit_cover, double_cover, is_balanced, riemann_hurwitz, slit_cover};
use tsurf::cylinder::{classify_direction, decompose, twist_orbit_ratios, SplitRatio};
use tsurf::field::{commensurability_classes, Scalar};
use tsurf::io;
use tsurf::presets::{build_preset, Preset};
use tsurf::surface::Surface;
use tsurf::tracer::SurfacePoint;

#[derive(Parser)]
#[command(name = "tsurf", version, about = "Exact computations on translation surfaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverKind {
    Cyclic,
    Double,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a preset surface and write it as JSON.
    Build {
        #[arg(long)]
        preset: String,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Comma-separated parameters, for presets with more than two.
        #[arg(long)]
        params: Option<String>,
        /// Marked point `POLYGON:X,Y:LABEL`; repeatable.
        #[arg(long)]
        mark: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print genus, singularities and area.
    Info { surface: PathBuf },
    /// Cylinder decomposition in one direction.
    Decompose {
        surface: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        dir: String,
        #[arg(long, default_value = "20")]
        cap: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Classify one direction.
    Classify {
        surface: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        dir: String,
        #[arg(long, default_value = "20")]
        cap: String,
    },
    /// Twist a point around its cylinder and report splitting ratios in a transverse cylinder.
    TwistOrbit {
        surface: PathBuf,
        /// `POLYGON:X,Y`
        #[arg(long)]
        point: String,
        #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
        twist_dir: String,
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        transverse_dir: String,
        /// Index of the transverse cylinder; defaults to the one containing the point.
        #[arg(long)]
        transverse: Option<usize>,
        #[arg(long, default_value_t = 50)]
        n: u64,
        #[arg(long, default_value = "20")]
        cap: String,
    },
    /// Build a slit cover from a cover specification.
    Cover {
        kind: CoverKind,
        /// Base surface.
        surface: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify a batch of directions.
    Census {
        surface: PathBuf,
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Splitting ratios along twist images of a transverse direction.
    FatSeq {
        surface: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, allow_hyphen_values = true)]
        twist: String,
        #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
        seed: String,
        #[arg(long)]
        mark: Option<String>,
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value = "100")]
        cap: String,
    },
    /// Draw the surface and the saddle connections of one direction.
    Render {
        surface: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        dir: Option<String>,
        #[arg(long, default_value = "20")]
        cap: String,
        #[arg(long)]
        svg: PathBuf,
    },
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| anyhow!("bad output path {}", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Surface> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(io::surface_from_json(&text)?)
}

fn scalar(s: &str) -> Result<Scalar> {
    Ok(s.parse()?)
}

fn direction(s: &str) -> Result<Direction> {
    Ok(s.parse()?)
}

fn surface_point(s: &str) -> Result<SurfacePoint> {
    let (p, xy) = s.split_once(':').ok_or_else(|| anyhow!("expected POLYGON:X,Y, got '{s}'"))?;
    Ok(SurfacePoint::new(p.trim().parse().context("polygon index")?, parse_vec2(xy)?))
}

fn genus_line(s: &Surface) -> Result<String> {
    let rep = s.singularities()?;
    let angles = rep.singular_angles();
    let sing = if angles.is_empty() {
        "none".to_string()
    } else {
        angles.iter().map(|a| format!("{a}pi")).collect::<Vec<_>>().join(" ")
    };
    Ok(format!("genus {}, singularities: {}, area {}", s.genus()?, sing, s.area()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Build { preset, a, b, params, mark, output } => {
            let preset: Preset = preset.parse()?;
            let mut ps: Vec<Scalar> = Vec::new();
            for x in [a, b].into_iter().flatten() {
                ps.push(scalar(&x)?);
            }
            if let Some(list) = params {
                for x in list.split(',') {
                    ps.push(scalar(x)?);
                }
            }
            let mut s = build_preset(preset, &ps)?;
            for m in mark {
                let mut it = m.splitn(3, ':');
                let (p, xy, label) = match (it.next(), it.next(), it.next()) {
                    (Some(p), Some(xy), Some(l)) => (p, xy, l),
                    _ => bail!("expected POLYGON:X,Y:LABEL, got '{m}'"),
                };
                s = s.add_marked_point(p.trim().parse().context("polygon index")?, parse_vec2(xy)?, label)?;
            }
            emit(output.as_deref(), &io::surface_to_json(&s))
        }
        Cmd::Info { surface } => {
            let s = load(&surface)?;
            println!("{}", genus_line(&s)?);
            Ok(())
        }
        Cmd::Decompose { surface, dir, cap, csv } => {
            let s = load(&surface)?;
            let dec = decompose(&s, &direction(&dir)?, &scalar(&cap)?)?;
            let classes = commensurability_classes(&dec.inverse_moduli()).unwrap_or_default();
            if !dec.is_complete() {
                println!("undetermined: cap {cap} reached");
            }
            for c in &dec.cylinders {
                println!(
                    "cylinder {}: circumference {}, width {}, inverse modulus {}",
                    c.id,
                    io::exact_sqrt_string(&c.circumference_sq(), s.field()),
                    io::exact_sqrt_string(&(&(&c.area * &c.area) / &c.circumference_sq()), s.field()),
                    c.inverse_modulus
                );
            }
            if let Some(path) = csv {
                write_atomic(&path, &io::decomposition_csv(&dec, s.field(), &classes))?;
            }
            Ok(())
        }
        Cmd::Classify { surface, dir, cap } => {
            let s = load(&surface)?;
            println!("{}", classify_direction(&s, &direction(&dir)?, &scalar(&cap)?)?);
            Ok(())
        }
        Cmd::TwistOrbit { surface, point, twist_dir, transverse_dir, transverse, n, cap } => {
            let s = load(&surface)?;
            let cap = scalar(&cap)?;
            let p = surface_point(&point)?;
            let dc = decompose(&s, &direction(&twist_dir)?, &cap)?;
            let dd = decompose(&s, &direction(&transverse_dir)?, &cap)?;
            let c = match dc.locate(&p)? {
                SplitRatio::Inside { cylinder, .. } => cylinder,
                SplitRatio::OnBoundary => bail!("point lies on a cylinder boundary"),
            };
            let d = match transverse {
                Some(d) => d,
                None => dd.locate(&p)?.cylinder().ok_or_else(|| anyhow!("point lies on a transverse boundary"))?,
            };
            let orbit = twist_orbit_ratios(&dc, c, &dd, d, &p, n)?;
            println!("theta {}", orbit.theta);
            for smp in &orbit.samples {
                let r = smp.ratio.as_ref().map_or("-".to_string(), |r| r.to_string());
                println!("{} {} {}", smp.n, smp.position, r);
            }
            Ok(())
        }
        Cmd::Cover { kind, surface, spec, output } => {
            let base = load(&surface)?;
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec = io::cover_spec_from_json(&base, &text)?;
            let cover = match kind {
                CoverKind::Cyclic if spec.perms.is_empty() => {
                    let slit = spec.slits.first().ok_or_else(|| anyhow!("cover spec has no slit"))?;
                    cyclic_slit_cover(&base, slit, &tsurf::cover::standard_cycle(spec.degree))?
                }
                CoverKind::Cyclic => slit_cover(&base, &spec)?,
                CoverKind::Double => double_cover(&base, &spec.slits)?,
            };
            let predicted = riemann_hurwitz(base.genus()?, cover.spec.degree as u64, &cover.profile())?;
            eprintln!(
                "degree {}, genus {} (predicted {}), balanced {}",
                cover.spec.degree,
                cover.surface.genus()?,
                predicted,
                is_balanced(&cover)
            );
            emit(output.as_deref(), &io::surface_to_json(&cover.surface))
        }
        Cmd::Census { surface, seeds, json, csv } => {
            let s = load(&surface)?;
            let text = fs::read_to_string(&seeds).with_context(|| format!("reading {}", seeds.display()))?;
            let v: serde_json::Value = serde_json::from_str(&text).context("seeds file")?;
            let seeds: Vec<Direction> = v
                .get("seeds")
                .and_then(|x| x.as_array())
                .ok_or_else(|| anyhow!("seeds file needs a 'seeds' array"))?
                .iter()
                .map(|d| d.as_str().ok_or_else(|| anyhow!("seed directions are strings 'x,y'")).and_then(direction))
                .collect::<Result<_>>()?;
            let cap = scalar(v.get("cap").and_then(|c| c.as_str()).unwrap_or("20"))?;
            let dirs = match v.get("twist").and_then(|t| t.as_str()) {
                Some(t) => harvest_directions(&seeds, &parse_mat2(t)?, v.get("n").and_then(|n| n.as_u64()).unwrap_or(3) as u32)?,
                None => seeds,
            };
            let reports = census(&s, &dirs, &cap);
            if let Some(p) = &csv {
                write_atomic(p, &io::census_csv(&reports))?;
            }
            match json {
                Some(p) => write_atomic(&p, &io::census_json(&reports)),
                None if csv.is_none() => emit(None, &io::census_json(&reports)),
                None => Ok(()),
            }
        }
        Cmd::FatSeq { surface, theta, twist, seed, mark, n, cap } => {
            let s = load(&surface)?;
            let label = match mark {
                Some(l) => l,
                None => s.marked_points().first().map(|m| m.label.clone()).ok_or_else(|| anyhow!("surface has no marked point"))?,
            };
            let seq = fat_sequence(&s, &label, &direction(&theta)?, &parse_mat2(&twist)?, &direction(&seed)?, n, &scalar(&cap)?)?;
            for it in &seq.items {
                let gap = it.slope_gap.as_ref().map_or("-".to_string(), |g| g.to_string());
                let ratio = match &it.ratio {
                    Some(SplitRatio::Inside { value, .. }) => value.to_string(),
                    Some(SplitRatio::OnBoundary) => "boundary".to_string(),
                    None => "undetermined".to_string(),
                };
                println!("{} {} gap {} ratio {}", it.n, it.direction, gap, ratio);
            }
            Ok(())
        }
        Cmd::Render { surface, dir, cap, svg } => {
            let s = load(&surface)?;
            let dec = match dir {
                Some(d) => Some(decompose(&s, &direction(&d)?, &scalar(&cap)?)?),
                None => None,
            };
            write_atomic(&svg, &io::render_svg(&s, dec.as_ref())?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

