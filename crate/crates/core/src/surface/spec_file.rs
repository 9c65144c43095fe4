//! Line-oriented `key = value` surface description.
//!
//! ```text
//! # comments and blank lines are ignored
//! kind = perturbed_sphere
//! m = 2
//! a = 1, 2
//! eps = 0.1
//! ```
//!
//! Keys: `kind` (sphere | ellipsoid | perturbed_sphere), `m`, `radius`,
//! `semi_axes` (2m values), `a` (m values), `eps`.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::surface::{PerturbationParams, SupportSurface};
use crate::symplectic::Dimension;

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceSpec {
    Sphere { m: usize, radius: f64 },
    Ellipsoid { semi_axes: Vec<f64> },
    PerturbedSphere { a: Vec<f64>, eps: Option<f64> },
}

impl SurfaceSpec {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }

    /// Canonical text form; parses back to `self`.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            SurfaceSpec::Sphere { m, radius } => {
                format!("kind = sphere\nm = {m}\nradius = {radius:?}\n")
            }
            SurfaceSpec::Ellipsoid { semi_axes } => format!(
                "kind = ellipsoid\nm = {}\nsemi_axes = {}\n",
                semi_axes.len() / 2,
                list(semi_axes)
            ),
            SurfaceSpec::PerturbedSphere { a, eps } => {
                let mut s = format!("kind = perturbed_sphere\nm = {}\na = {}\n", a.len(), list(a));
                if let Some(e) = eps {
                    s.push_str(&format!("eps = {e:?}\n"));
                }
                s
            }
        }
    }
}

#[derive(Default)]
struct Fields {
    kind: Option<(usize, String)>,
    m: Option<(usize, usize)>,
    radius: Option<(usize, f64)>,
    semi_axes: Option<(usize, Vec<f64>)>,
    a: Option<(usize, Vec<f64>)>,
    eps: Option<(usize, f64)>,
}

fn spec_err(line: usize, message: impl Into<String>) -> Error {
    Error::SurfaceSpec {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| spec_err(line, format!("{key}: cannot parse number {s:?}")))?;
    if !v.is_finite() {
        return Err(spec_err(line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn parse_list(line: usize, key: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|item| parse_f64(line, key, item)).collect()
}

fn set<T>(slot: &mut Option<(usize, T)>, line: usize, key: &str, value: T) -> Result<()> {
    if let Some((first, _)) = slot {
        return Err(spec_err(line, format!("duplicate key {key} (first on line {first})")));
    }
    *slot = Some((line, value));
    Ok(())
}

impl FromStr for SurfaceSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut f = Fields::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| spec_err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kind" => set(&mut f.kind, line, key, value.to_string())?,
                "m" => {
                    let m: usize = value
                        .parse()
                        .map_err(|_| spec_err(line, format!("m: cannot parse {value:?}")))?;
                    set(&mut f.m, line, key, m)?
                }
                "radius" => set(&mut f.radius, line, key, parse_f64(line, key, value)?)?,
                "semi_axes" => set(&mut f.semi_axes, line, key, parse_list(line, key, value)?)?,
                "a" => set(&mut f.a, line, key, parse_list(line, key, value)?)?,
                "eps" => set(&mut f.eps, line, key, parse_f64(line, key, value)?)?,
                other => return Err(spec_err(line, format!("unknown key {other:?}"))),
            }
        }

        let (kind_line, kind) = f.kind.ok_or_else(|| spec_err(0, "missing key kind"))?;
        let reject = |present: bool, key: &str, line: Option<usize>| -> Result<()> {
            if present {
                Err(spec_err(
                    line.unwrap_or(kind_line),
                    format!("key {key} does not apply to kind {kind}"),
                ))
            } else {
                Ok(())
            }
        };
        match kind.as_str() {
            "sphere" => {
                reject(f.semi_axes.is_some(), "semi_axes", f.semi_axes.as_ref().map(|s| s.0))?;
                reject(f.a.is_some(), "a", f.a.as_ref().map(|s| s.0))?;
                reject(f.eps.is_some(), "eps", f.eps.as_ref().map(|s| s.0))?;
                let (_, m) = f.m.ok_or_else(|| spec_err(kind_line, "sphere requires m"))?;
                let radius = f.radius.map_or(1.0, |r| r.1);
                Ok(SurfaceSpec::Sphere { m, radius })
            }
            "ellipsoid" => {
                reject(f.radius.is_some(), "radius", f.radius.as_ref().map(|s| s.0))?;
                reject(f.a.is_some(), "a", f.a.as_ref().map(|s| s.0))?;
                reject(f.eps.is_some(), "eps", f.eps.as_ref().map(|s| s.0))?;
                let (line, semi_axes) = f
                    .semi_axes
                    .ok_or_else(|| spec_err(kind_line, "ellipsoid requires semi_axes"))?;
                if let Some((_, m)) = f.m {
                    if semi_axes.len() != 2 * m {
                        return Err(spec_err(
                            line,
                            format!("semi_axes needs 2m = {} values, got {}", 2 * m, semi_axes.len()),
                        ));
                    }
                }
                Ok(SurfaceSpec::Ellipsoid { semi_axes })
            }
            "perturbed_sphere" => {
                reject(f.radius.is_some(), "radius", f.radius.as_ref().map(|s| s.0))?;
                reject(f.semi_axes.is_some(), "semi_axes", f.semi_axes.as_ref().map(|s| s.0))?;
                let (line, a) = f
                    .a
                    .ok_or_else(|| spec_err(kind_line, "perturbed_sphere requires a"))?;
                if let Some((_, m)) = f.m {
                    if a.len() != m {
                        return Err(spec_err(
                            line,
                            format!("a needs m = {m} values, got {}", a.len()),
                        ));
                    }
                }
                Ok(SurfaceSpec::PerturbedSphere {
                    a,
                    eps: f.eps.map(|e| e.1),
                })
            }
            other => Err(spec_err(kind_line, format!("unknown kind {other:?}"))),
        }
    }
}

pub(super) fn build(spec: &SurfaceSpec) -> Result<SupportSurface> {
    match spec {
        SurfaceSpec::Sphere { m, radius } => SupportSurface::sphere(Dimension::new(*m)?, *radius),
        SurfaceSpec::Ellipsoid { semi_axes } => SupportSurface::ellipsoid(semi_axes.clone()),
        SurfaceSpec::PerturbedSphere { a, eps } => {
            let params = match eps {
                Some(e) => PerturbationParams::new(a.clone(), *e)?,
                None => PerturbationParams::with_default_eps(a.clone())?,
            };
            SupportSurface::perturbed_sphere(params)
        }
    }
}
