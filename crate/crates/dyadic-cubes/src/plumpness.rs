//! Interior accessibility (plumpness) checks with certificates.
//!
//! A subset `E` is plump when every ball centered on `E` contains a
//! definite-fraction sub-ball that stays inside `E`. Two flavors are checked:
//! over all radii up to a bound `R` with fraction `b`, and along a geometric
//! ladder of scales `delta^k` for `k >= m` with an inner factor `b0` and an
//! outer factor `B0`. Both checks are exact on a finite space: the radius
//! quantifier collapses to the finite set of radii where some ball changes,
//! and the ladder is truncated once the inner radius drops below the minimum
//! positive distance, where every ball is a singleton and the condition is
//! automatic.
//!
//! Verdicts carry either a full witness map (one interior ball per checked
//! pair) or the first failing pair together with, for every rejected center
//! candidate, the first point that blocks it.

use crate::metric::FiniteMetricSpace;
use crate::set::SubsetMask;
use serde::ser::{Serialize, SerializeStruct, Serializer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("subset mask is over {mask} points but the space has {space}")]
    MaskLength { mask: usize, space: usize },
}

/// All-radii plumpness parameters: radii `0 < r <= r_max`, fraction `b`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PlumpParams {
    #[serde(rename = "R")]
    pub r_max: f64,
    pub b: f64,
}

impl PlumpParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.r_max.is_finite() && self.r_max > 0.0) {
            return Err(ParamError::Invalid(format!("R must be positive and finite, got {}", self.r_max)));
        }
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(ParamError::Invalid(format!("b must lie in (0,1), got {}", self.b)));
        }
        Ok(())
    }
}

/// Scale-ladder plumpness parameters: levels `k >= m`, scale `delta^k`,
/// inner radius factor `inner` and outer radius factor `outer`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DPlumpParams {
    pub delta: f64,
    pub m: i32,
    #[serde(rename = "b0")]
    pub inner: f64,
    #[serde(rename = "B0")]
    pub outer: f64,
}

impl DPlumpParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ParamError::Invalid(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.inner.is_finite() && self.inner > 0.0) {
            return Err(ParamError::Invalid(format!("b0 must be positive and finite, got {}", self.inner)));
        }
        if !(self.outer.is_finite() && self.inner <= self.outer) {
            return Err(ParamError::Invalid(format!(
                "B0 must be finite and at least b0, got b0={} B0={}",
                self.inner, self.outer
            )));
        }
        Ok(())
    }

    /// `delta^k`, evaluated the same way everywhere in the crate.
    pub fn scale(&self, k: i32) -> f64 {
        self.delta.powi(k)
    }
}

/// Names the JSON key under which a scale serializes: ladder levels are
/// integers keyed `"k"`, radii are floats keyed `"r"`.
pub trait ScaleKey: Copy + Serialize {
    const KEY: &'static str;
}

impl ScaleKey for i32 {
    const KEY: &'static str = "k";
}

impl ScaleKey for f64 {
    const KEY: &'static str = "r";
}

/// One successful interior ball: at `(y, scale)` the ball around `z` works.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<S> {
    pub y: usize,
    pub scale: S,
    pub z: usize,
}

/// A center candidate that failed, with the first point that blocks it:
/// `blocker` lies in the candidate's inner ball but outside the target set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockedCandidate {
    pub z: usize,
    pub blocker: usize,
}

/// The first failing `(y, scale)` pair in scan order (ascending `y`, then
/// ascending scale), with every candidate's first blocking point.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample<S> {
    pub y: usize,
    pub scale: S,
    pub candidates: Vec<BlockedCandidate>,
}

/// Outcome of a plumpness check: exactly one of `witnesses` (when certified)
/// or `counterexample` (when not) is populated.
#[derive(Debug, Clone, PartialEq)]
pub struct PlumpnessVerdict<S> {
    pub certified: bool,
    pub witnesses: Vec<Witness<S>>,
    pub counterexample: Option<Counterexample<S>>,
}

pub type LevelVerdict = PlumpnessVerdict<i32>;
pub type RadiusVerdict = PlumpnessVerdict<f64>;

impl<S: ScaleKey> Serialize for Witness<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let mut s = serializer.serialize_struct("Witness", 3)?;
        s.serialize_field("y", &self.y)?;
        s.serialize_field(S::KEY, &self.scale)?;
        s.serialize_field("z", &self.z)?;
        s.end()
    }
}

impl Serialize for BlockedCandidate {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let mut s = serializer.serialize_struct("BlockedCandidate", 2)?;
        s.serialize_field("z", &self.z)?;
        s.serialize_field("blocker", &self.blocker)?;
        s.end()
    }
}

impl<S: ScaleKey> Serialize for Counterexample<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let mut s = serializer.serialize_struct("Counterexample", 3)?;
        s.serialize_field("y", &self.y)?;
        s.serialize_field(S::KEY, &self.scale)?;
        s.serialize_field("candidates", &self.candidates)?;
        s.end()
    }
}

impl<S: ScaleKey> Serialize for PlumpnessVerdict<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let mut s = serializer.serialize_struct("PlumpnessVerdict", 3)?;
        s.serialize_field("certified", &self.certified)?;
        s.serialize_field("witnesses", &self.witnesses)?;
        s.serialize_field("counterexample", &self.counterexample)?;
        s.end()
    }
}

fn check_mask(space: &FiniteMetricSpace, e: &SubsetMask) -> Result<(), ParamError> {
    if e.len() != space.n() {
        return Err(ParamError::MaskLength { mask: e.len(), space: space.n() });
    }
    Ok(())
}

/// First `z` (ascending index) whose inner ball `B(z, r_in)` lies inside
/// `B(y, r_out) ∩ e`. Any witness must itself lie in `B(y, r_out) ∩ e`
/// because `z ∈ B(z, r_in)`, so only those candidates are scanned.
fn find_witness(
    space: &FiniteMetricSpace,
    e: &SubsetMask,
    y: usize,
    r_in: f64,
    r_out: f64,
) -> Option<usize> {
    let mut candidates: Vec<u32> = space
        .ball_prefix(y, r_out)
        .iter()
        .copied()
        .filter(|&z| e.contains(z as usize))
        .collect();
    candidates.sort_unstable();
    candidates.into_iter().map(|z| z as usize).find(|&z| {
        space
            .ball_prefix(z, r_in)
            .iter()
            .all(|&p| space.dist(p as usize, y) < r_out && e.contains(p as usize))
    })
}

/// For every `z`, the first point (ascending index) in `B(z, r_in)` that
/// falls outside `B(y, r_out) ∩ e`. Called only at a failing pair, where
/// every candidate has one.
fn blocked_candidates(
    space: &FiniteMetricSpace,
    e: &SubsetMask,
    y: usize,
    r_in: f64,
    r_out: f64,
) -> Vec<BlockedCandidate> {
    (0..space.n())
        .map(|z| {
            let blocker = (0..space.n())
                .find(|&p| {
                    space.dist(p, z) < r_in && !(space.dist(p, y) < r_out && e.contains(p))
                })
                .expect("a candidate without a blocking point would be a witness");
            BlockedCandidate { z, blocker }
        })
        .collect()
}

/// Checks scale-ladder plumpness of `e`.
///
/// Certified iff for every `y` in `e` and every level `k >= m` some `z` has
/// `B(z, b0 * delta^k)` inside `B(y, B0 * delta^k) ∩ e`. The ladder is
/// checked up to the first level whose inner radius drops below the minimum
/// positive distance; beyond it, inner balls are singletons and `z = y`
/// always works, so the truncation loses nothing.
pub fn check_dplump(
    space: &FiniteMetricSpace,
    e: &SubsetMask,
    params: &DPlumpParams,
) -> Result<LevelVerdict, ParamError> {
    params.validate()?;
    check_mask(space, e)?;
    let k_hi = FiniteMetricSpace::first_level_below(
        params.inner,
        params.delta,
        params.m,
        space.min_positive_distance(),
    );
    check_dplump_levels(space, e, params, k_hi)
}

/// Ladder check with an explicit top level, exposed so tests can confirm
/// that extending the ladder past the truncation point never changes the
/// verdict. Not part of the stable API.
#[doc(hidden)]
pub fn check_dplump_levels(
    space: &FiniteMetricSpace,
    e: &SubsetMask,
    params: &DPlumpParams,
    k_hi: i32,
) -> Result<LevelVerdict, ParamError> {
    params.validate()?;
    check_mask(space, e)?;
    let mut witnesses = Vec::new();
    for y in e.iter() {
        for k in params.m..=k_hi {
            let r_in = params.inner * params.scale(k);
            let r_out = params.outer * params.scale(k);
            match find_witness(space, e, y, r_in, r_out) {
                Some(z) => witnesses.push(Witness { y, scale: k, z }),
                None => {
                    return Ok(PlumpnessVerdict {
                        certified: false,
                        witnesses: Vec::new(),
                        counterexample: Some(Counterexample {
                            y,
                            scale: k,
                            candidates: blocked_candidates(space, e, y, r_in, r_out),
                        }),
                    })
                }
            }
        }
    }
    Ok(PlumpnessVerdict { certified: true, witnesses, counterexample: None })
}

/// The finite set of radii that decides all-radii plumpness: the condition
/// at radius `r` only depends on which realized distances are below `r` and
/// below `b * r`, so it is constant between consecutive values of
/// `{d, d/b : d realized} ∪ {r_max}` and testing those values is exact.
fn critical_radii(space: &FiniteMetricSpace, params: &PlumpParams) -> Vec<f64> {
    let mut crit: Vec<f64> = Vec::with_capacity(2 * space.distinct_distances().len() + 1);
    for &d in space.distinct_distances() {
        if d <= params.r_max {
            crit.push(d);
        }
        let scaled = d / params.b;
        if scaled <= params.r_max {
            crit.push(scaled);
        }
    }
    crit.push(params.r_max);
    crit.sort_by(|a, b| a.partial_cmp(b).unwrap());
    crit.dedup();
    crit
}

/// Checks all-radii plumpness of `e`: for every `y` in `e` and every radius
/// `0 < r <= r_max`, some `z` has `B(z, b * r)` inside `B(y, r) ∩ e`.
pub fn check_plump(
    space: &FiniteMetricSpace,
    e: &SubsetMask,
    params: &PlumpParams,
) -> Result<RadiusVerdict, ParamError> {
    params.validate()?;
    check_mask(space, e)?;
    let crit = critical_radii(space, params);
    let mut witnesses = Vec::new();
    for y in e.iter() {
        for &r in &crit {
            let r_in = params.b * r;
            match find_witness(space, e, y, r_in, r) {
                Some(z) => witnesses.push(Witness { y, scale: r, z }),
                None => {
                    return Ok(PlumpnessVerdict {
                        certified: false,
                        witnesses: Vec::new(),
                        counterexample: Some(Counterexample {
                            y,
                            scale: r,
                            candidates: blocked_candidates(space, e, y, r_in, r),
                        }),
                    })
                }
            }
        }
    }
    Ok(PlumpnessVerdict { certified: true, witnesses, counterexample: None })
}

/// True iff `weaker` follows from `stronger` by parameter transport alone:
/// shrink both the radius bound and the fraction, or grow the radius bound
/// while keeping the product `R * b` from growing.
pub fn weaken_plump_params(stronger: &PlumpParams, weaker: &PlumpParams) -> bool {
    (weaker.r_max <= stronger.r_max && weaker.b <= stronger.b)
        || (weaker.r_max >= stronger.r_max && weaker.r_max * weaker.b <= stronger.r_max * stronger.b)
}

/// Canonical ladder parameters implied by all-radii plumpness: `B0 = 1`,
/// `b0 = b`, and `m` the least level with `delta^m <= R`, so that every
/// ladder ball is one of the already-certified radii.
pub fn plump_to_dplump(params: &PlumpParams, delta: f64) -> Result<DPlumpParams, ParamError> {
    params.validate()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ParamError::Invalid(format!("delta must lie in (0,1), got {delta}")));
    }
    let mut m = 0;
    while delta.powi(m) > params.r_max {
        m += 1;
    }
    while delta.powi(m - 1) <= params.r_max {
        m -= 1;
    }
    Ok(DPlumpParams { delta, m, inner: params.b, outer: 1.0 })
}

/// All-radii parameters implied by ladder plumpness: each radius
/// `r <= B0 * delta^(m-1)` is bracketed by consecutive ladder scales, and the
/// fraction shrinks by one factor of `delta` to absorb the bracketing.
pub fn dplump_to_plump(params: &DPlumpParams) -> PlumpParams {
    PlumpParams {
        r_max: params.outer * params.scale(params.m - 1),
        b: params.delta * params.inner / params.outer,
    }
}
