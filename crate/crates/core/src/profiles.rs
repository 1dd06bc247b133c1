//! Subsonic doping profiles `b(x) > 1` on `[0, 1]` and their pointwise
//! order relations.
//!
//! Profiles come either from a small analytic family or from a table of
//! samples interpolated linearly. The infimum and supremum are cached at
//! construction; a profile whose infimum does not clear the sonic value by
//! [`SUBSONIC_MARGIN`] is rejected.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimal gap between `inf b` and the sonic density 1.
pub const SUBSONIC_MARGIN: f64 = 1e-6;

/// Default number of uniform check samples used by [`profile_order`] and
/// [`profile_sup_distance`] (ten times the default solver grid).
pub const DEFAULT_CHECK_SAMPLES: usize = 4000;

/// Normalized temperature. The sound speed is `sqrt(T) = 1`.
pub const TEMPERATURE: f64 = 1.0;
/// Normalized current density.
pub const CURRENT_DENSITY: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    Constant { value: f64 },
    /// `intercept + slope * x`
    Affine { intercept: f64, slope: f64 },
    /// `base + amplitude * sin(pi x)`
    SineBump { base: f64, amplitude: f64 },
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    Tabulated { knots: Vec<(f64, f64)> },
}

/// A validated subsonic doping profile. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DopingProfile {
    #[serde(flatten)]
    kind: ProfileKind,
    inf_b: f64,
    sup_b: f64,
}

impl DopingProfile {
    pub fn new(kind: ProfileKind) -> Result<Self> {
        let (inf_b, sup_b) = match &kind {
            ProfileKind::Constant { value } => {
                check_finite(&[*value])?;
                (*value, *value)
            }
            ProfileKind::Affine { intercept, slope } => {
                check_finite(&[*intercept, *slope])?;
                let end = intercept + slope;
                (intercept.min(end), intercept.max(end))
            }
            ProfileKind::SineBump { base, amplitude } => {
                check_finite(&[*base, *amplitude])?;
                (base + amplitude.min(0.0), base + amplitude.max(0.0))
            }
            ProfileKind::PiecewiseLinear { knots } | ProfileKind::Tabulated { knots } => {
                validate_knots(knots)?;
                knots.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, b)| {
                    (lo.min(b), hi.max(b))
                })
            }
        };
        if inf_b < 1.0 + SUBSONIC_MARGIN {
            return Err(Error::NotSubsonic {
                inf_b,
                min: 1.0 + SUBSONIC_MARGIN,
            });
        }
        Ok(Self { kind, inf_b, sup_b })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(ProfileKind::Constant { value })
    }

    pub fn affine(intercept: f64, slope: f64) -> Result<Self> {
        Self::new(ProfileKind::Affine { intercept, slope })
    }

    pub fn sine_bump(base: f64, amplitude: f64) -> Result<Self> {
        Self::new(ProfileKind::SineBump { base, amplitude })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(ProfileKind::PiecewiseLinear { knots })
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(ProfileKind::Tabulated { knots })
    }

    /// Reads a two-column CSV with header `x,b`.
    pub fn from_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        if cols != ["x", "b"] {
            return Err(Error::InvalidProfile(format!(
                "expected header `x,b`, found `{}`",
                cols.join(",")
            )));
        }
        let mut knots = Vec::new();
        for record in reader.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                let field = record.get(i).unwrap_or("").trim();
                field
                    .parse()
                    .map_err(|_| Error::InvalidProfile(format!("bad number `{field}`")))
            };
            knots.push((parse(0)?, parse(1)?));
        }
        Self::tabulated(knots)
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn inf_b(&self) -> f64 {
        self.inf_b
    }

    pub fn sup_b(&self) -> f64 {
        self.sup_b
    }

    /// `b(x)` for `x` in `[0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        Ok(self.at(x))
    }

    pub(crate) fn at(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { value } => *value,
            ProfileKind::Affine { intercept, slope } => intercept + slope * x,
            ProfileKind::SineBump { base, amplitude } => base + amplitude * (PI * x).sin(),
            ProfileKind::PiecewiseLinear { knots } | ProfileKind::Tabulated { knots } => {
                interpolate(knots, x)
            }
        }
    }

    /// Profile values at the given nodes (all assumed in `[0, 1]`).
    pub fn sample(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.at(x)).collect()
    }

    fn knots(&self) -> &[(f64, f64)] {
        match &self.kind {
            ProfileKind::PiecewiseLinear { knots } | ProfileKind::Tabulated { knots } => knots,
            _ => &[],
        }
    }

    /// Short textual identifier, parseable by [`FromStr`] for analytic kinds.
    pub fn id(&self) -> String {
        self.to_string()
    }

    /// The profile `b + delta`, same family.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        let shift = |knots: &[(f64, f64)]| knots.iter().map(|&(x, b)| (x, b + delta)).collect();
        Self::new(match &self.kind {
            ProfileKind::Constant { value } => ProfileKind::Constant { value: value + delta },
            ProfileKind::Affine { intercept, slope } => ProfileKind::Affine { intercept: intercept + delta, slope: *slope },
            ProfileKind::SineBump { base, amplitude } => ProfileKind::SineBump { base: base + delta, amplitude: *amplitude },
            ProfileKind::PiecewiseLinear { knots } => ProfileKind::PiecewiseLinear { knots: shift(knots) },
            ProfileKind::Tabulated { knots } => ProfileKind::Tabulated { knots: shift(knots) },
        })
    }
}

impl fmt::Display for DopingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ProfileKind::Constant { value } => write!(f, "constant:{value}"),
            ProfileKind::Affine { intercept, slope } => write!(f, "affine:{intercept},{slope}"),
            ProfileKind::SineBump { base, amplitude } => write!(f, "sinebump:{base},{amplitude}"),
            ProfileKind::PiecewiseLinear { knots } => {
                let parts: Vec<String> = knots.iter().map(|(x, b)| format!("{x}:{b}")).collect();
                write!(f, "piecewise:{}", parts.join(","))
            }
            ProfileKind::Tabulated { knots } => write!(f, "tabulated[{} knots]", knots.len()),
        }
    }
}

impl FromStr for DopingProfile {
    type Err = Error;

    /// Accepts `constant:V`, `affine:B0,SLOPE`, `sinebump:BASE,AMP`,
    /// `piecewise:X0:B0,X1:B1,...`, `csv:PATH` or a bare path to a CSV file.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some((tag, rest)) = s.split_once(':') else {
            return Self::from_csv(s);
        };
        let numbers = |rest: &str| -> Result<Vec<f64>> {
            rest.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidProfile(format!("bad number `{t}` in `{s}`")))
                })
                .collect()
        };
        let arity = |v: &[f64], want: usize| -> Result<()> {
            if v.len() == want {
                Ok(())
            } else {
                Err(Error::InvalidProfile(format!(
                    "`{tag}` takes {want} parameter(s), got {}",
                    v.len()
                )))
            }
        };
        match tag.to_ascii_lowercase().as_str() {
            "constant" => {
                let v = numbers(rest)?;
                arity(&v, 1)?;
                Self::constant(v[0])
            }
            "affine" => {
                let v = numbers(rest)?;
                arity(&v, 2)?;
                Self::affine(v[0], v[1])
            }
            "sinebump" | "sine-bump" => {
                let v = numbers(rest)?;
                arity(&v, 2)?;
                Self::sine_bump(v[0], v[1])
            }
            "piecewise" | "piecewise-linear" => {
                let knots = rest
                    .split(',')
                    .map(|pair| {
                        let (x, b) = pair.split_once(':').ok_or_else(|| {
                            Error::InvalidProfile(format!("knot `{pair}` is not `x:b`"))
                        })?;
                        let x = x.trim().parse::<f64>();
                        let b = b.trim().parse::<f64>();
                        match (x, b) {
                            (Ok(x), Ok(b)) => Ok((x, b)),
                            _ => Err(Error::InvalidProfile(format!("bad knot `{pair}`"))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::piecewise_linear(knots)
            }
            "csv" => Self::from_csv(rest),
            _ if Path::new(s).exists() => Self::from_csv(s),
            other => Err(Error::InvalidProfile(format!("unknown profile kind `{other}`"))),
        }
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidProfile("non-finite parameter".into()))
    }
}

fn validate_knots(knots: &[(f64, f64)]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::InvalidProfile("need at least two knots".into()));
    }
    if knots.iter().any(|(x, b)| !x.is_finite() || !b.is_finite()) {
        return Err(Error::InvalidProfile("non-finite knot".into()));
    }
    if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
        return Err(Error::InvalidProfile("knots must start at x=0 and end at x=1".into()));
    }
    if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidProfile("knot abscissae must be strictly increasing".into()));
    }
    Ok(())
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    // first knot with abscissa >= x
    let idx = knots.partition_point(|&(xk, _)| xk < x);
    if idx == 0 {
        return knots[0].1;
    }
    if idx == knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (x0, b0) = knots[idx - 1];
    let (x1, b1) = knots[idx];
    b0 + (b1 - b0) * (x - x0) / (x1 - x0)
}

/// Uniform check points `k / samples` plus the knots of both profiles.
fn check_points(p1: &DopingProfile, p2: &DopingProfile, samples: usize) -> Vec<f64> {
    let samples = samples.max(1);
    let mut xs: Vec<f64> = (0..=samples).map(|k| k as f64 / samples as f64).collect();
    xs.extend(p1.knots().iter().chain(p2.knots()).map(|&(x, _)| x));
    xs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileOrder {
    Dominates,
    Dominated,
    Incomparable,
}

/// Pointwise order of `p1` relative to `p2` up to `tol`.
///
/// Equal profiles report [`ProfileOrder::Dominates`].
pub fn profile_order(p1: &DopingProfile, p2: &DopingProfile, tol: f64) -> ProfileOrder {
    profile_order_with_samples(p1, p2, tol, DEFAULT_CHECK_SAMPLES)
}

pub fn profile_order_with_samples(
    p1: &DopingProfile,
    p2: &DopingProfile,
    tol: f64,
    samples: usize,
) -> ProfileOrder {
    let pts = check_points(p1, p2, samples);
    if pts.iter().all(|&x| p1.at(x) >= p2.at(x) - tol) {
        ProfileOrder::Dominates
    } else if pts.iter().all(|&x| p2.at(x) >= p1.at(x) - tol) {
        ProfileOrder::Dominated
    } else {
        ProfileOrder::Incomparable
    }
}

/// Sampled `C[0,1]` distance `max |p1 - p2|`.
pub fn profile_sup_distance(p1: &DopingProfile, p2: &DopingProfile) -> f64 {
    profile_sup_distance_with_samples(p1, p2, DEFAULT_CHECK_SAMPLES)
}

pub fn profile_sup_distance_with_samples(
    p1: &DopingProfile,
    p2: &DopingProfile,
    samples: usize,
) -> f64 {
    check_points(p1, p2, samples)
        .into_iter()
        .map(|x| (p1.at(x) - p2.at(x)).abs())
        .fold(0.0, f64::max)
}

/// Draws a pair `(b1, b2)` with `b1 >= b2 > 1` from the analytic families.
///
/// The lower profile is drawn first; the upper one is either the same family
/// with nonnegative parameter shifts or a constant above `sup b2`.
pub fn random_ordered_pair<R: Rng + ?Sized>(rng: &mut R) -> (DopingProfile, DopingProfile) {
    let base = rng.gen_range(1.5..3.0);
    let lift = rng.gen_range(0.0..0.5);
    let mut build = || -> Result<(DopingProfile, DopingProfile)> {
        match rng.gen_range(0..4) {
            0 => Ok((DopingProfile::constant(base + lift)?, DopingProfile::constant(base)?)),
            1 => {
                let slope = rng.gen_range(-0.4..1.0);
                let extra = rng.gen_range(0.0..0.3);
                // b1 - b2 = lift + extra * x >= 0
                Ok((
                    DopingProfile::affine(base + lift, slope + extra)?,
                    DopingProfile::affine(base, slope)?,
                ))
            }
            2 => {
                let amp = rng.gen_range(-0.4..0.8);
                let extra = rng.gen_range(-lift.min(0.3)..0.3);
                // b1 - b2 = lift + extra * sin(pi x) >= lift + min(extra, 0) >= 0
                Ok((
                    DopingProfile::sine_bump(base + lift, amp + extra)?,
                    DopingProfile::sine_bump(base, amp)?,
                ))
            }
            _ => {
                let lower = DopingProfile::sine_bump(base, rng.gen_range(0.0..0.6))?;
                Ok((DopingProfile::constant(lower.sup_b() + lift)?, lower))
            }
        }
    };
    build().expect("random family parameters stay subsonic")
}

/// The relaxation parameter `alpha = 1/tau`. `T` and `J` are fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    alpha: f64,
}

impl PhysicalParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Domain(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}
