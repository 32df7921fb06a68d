//! Which subsets can arise as cubes: forward parameters and the deciding
//! certificate.
//!
//! Forward direction: every cube of a built system, and the complement of
//! every cube, is ladder-plump from the cube's own level with inner factor
//! `c1` and outer factor `c1 + C1`; the witness for a point is the center of
//! the cube of the appropriate level around it. A cube of positive diameter
//! is also plump at all radii up to a bound proportional to its diameter.
//!
//! Converse direction: [`certify_cube_candidate`] decides whether a subset
//! `E` arises as a cube. It checks the scale constraints, certifies ladder
//! plumpness of `E` and its complement, builds the adapted point system,
//! the parent order, and the cube system, and compares the distinguished
//! level-`m` cube with `E`. Every stage's outcome lands in the returned
//! certificate, so a rejection names the first stage that failed and an
//! acceptance carries the full construction as evidence.

use crate::cubes::{build_cube_system, Cube, CubeError, CubeParams, CubeSystem};
use crate::metric::FiniteMetricSpace;
use crate::nets::{build_adapted_points, DyadicPointSystem};
use crate::order::{build_order, descendants, ParentOrder};
use crate::plumpness::{check_dplump, DPlumpParams, LevelVerdict, PlumpParams};
use crate::set::SubsetMask;
use rayon::prelude::*;

/// Plumpness parameters satisfied by a cube at level `k`: the ladder pair
/// for the cube and its complement, and the all-radii pair for the cube
/// itself when its diameter is positive.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CubePlumpness {
    pub dplump: DPlumpParams,
    pub plump: Option<PlumpParams>,
}

/// Parameters under which the cube `(k, alpha)` and its complement are
/// plump: the ladder starts at the cube's own level with inner radius
/// factor `c1` and outer factor `c1 + C1`, and the all-radii bound scales
/// the cube's diameter.
pub fn cube_plumpness_params(
    space: &FiniteMetricSpace,
    params: &CubeParams,
    k: i32,
    cube: &Cube,
) -> CubePlumpness {
    let reach = params.inner + params.outer;
    let dplump = DPlumpParams { delta: params.delta, m: k, inner: params.inner, outer: reach };
    let diam = space.subset_diameter(&cube.members);
    let plump = (diam > 0.0).then(|| PlumpParams {
        r_max: reach / (2.0 * params.delta * params.outer) * diam,
        b: params.delta * params.inner / reach,
    });
    CubePlumpness { dplump, plump }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CubePlumpEntry {
    pub k: i32,
    pub alpha: usize,
    pub params: CubePlumpness,
    pub cube_certified: bool,
    pub complement_certified: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CubePlumpReport {
    pub all_certified: bool,
    pub entries: Vec<CubePlumpEntry>,
}

/// Certifies plumpness of every cube and every cube complement of a system,
/// in level-then-index order.
pub fn verify_all_cubes_plump(space: &FiniteMetricSpace, cubes: &CubeSystem) -> CubePlumpReport {
    let tasks: Vec<(usize, usize)> = cubes
        .levels
        .iter()
        .enumerate()
        .flat_map(|(i, level)| (0..level.cubes.len()).map(move |alpha| (i, alpha)))
        .collect();
    let entries: Vec<CubePlumpEntry> = tasks
        .par_iter()
        .map(|&(i, alpha)| {
            let level = &cubes.levels[i];
            let cube = &level.cubes[alpha];
            let params = cube_plumpness_params(space, &cubes.params, level.k, cube);
            let certified = |mask: &SubsetMask| {
                check_dplump(space, mask, &params.dplump)
                    .expect("cube plumpness parameters are valid by construction")
                    .certified
            };
            CubePlumpEntry {
                k: level.k,
                alpha,
                params,
                cube_certified: certified(&cube.members),
                complement_certified: certified(&cube.members.complement()),
            }
        })
        .collect();
    let all_certified = entries.iter().all(|e| e.cube_certified && e.complement_certified);
    CubePlumpReport { all_certified, entries }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertifyError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("the subset is empty")]
    EmptySubset,
}

/// Pipeline stage at which a candidate was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Constraints,
    Plumpness,
    Points,
    Order,
    Cubes,
    Resolution,
    Match,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Rejection {
    pub stage: Stage,
    pub detail: String,
}

/// The two scale constraints checked before anything is built: the subset
/// must fit in one outer radius at level `m`, and the ladder factors must
/// satisfy `12 B0 delta <= b0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConstraintRecord {
    pub diameter: f64,
    pub diameter_bound: f64,
    pub diameter_ok: bool,
    pub hypothesis_value: f64,
    pub hypothesis_bound: f64,
    pub hypothesis_ok: bool,
}

/// Level-`m` bracketing sets computed when the level range was capped below
/// full resolution: the closure and interior of the distinguished node,
/// derived from descendant centers of the available levels.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CappedSets {
    pub closed: SubsetMask,
    pub open: SubsetMask,
}

/// How the distinguished cube compares with the candidate subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct MatchRecord {
    pub full_resolution: bool,
    pub open_in_subset: bool,
    pub subset_in_closed: bool,
    pub equality: bool,
}

/// Complete record of a candidate run: every stage's evidence, the verdict,
/// and on rejection the first stage that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeCandidateCert {
    pub n: usize,
    pub subset: SubsetMask,
    pub params: DPlumpParams,
    pub constraints: ConstraintRecord,
    pub subset_plump: Option<LevelVerdict>,
    pub complement_plump: Option<LevelVerdict>,
    pub points: Option<DyadicPointSystem>,
    pub order: Option<ParentOrder>,
    pub cubes: Option<CubeSystem>,
    pub capped: Option<CappedSets>,
    /// The distinguished node `(m, alpha0)` once the point system exists.
    pub cube: Option<(i32, usize)>,
    pub matching: Option<MatchRecord>,
    pub accepted: bool,
    pub rejection: Option<Rejection>,
}

impl CubeCandidateCert {
    fn rejected(mut self, stage: Stage, detail: String) -> Self {
        self.rejection = Some(Rejection { stage, detail });
        self
    }
}

/// Decides whether `e` arises as a cube of an adapted system with the given
/// ladder parameters, returning the full certificate either way.
///
/// Pass `k_max` to cap the finest level; a cap below full resolution leaves
/// only the level-`m` bracketing sets computable, which cannot certify
/// equality, so such runs are rejected at the resolution stage with the
/// bracketing recorded.
pub fn certify_cube_candidate(
    space: &FiniteMetricSpace,
    e: &SubsetMask,
    params: &DPlumpParams,
    k_max: Option<i32>,
) -> Result<CubeCandidateCert, CertifyError> {
    params.validate().map_err(|err| CertifyError::InvalidParams(err.to_string()))?;
    if e.len() != space.n() {
        return Err(CertifyError::InvalidParams(format!(
            "subset mask is over {} points but the space has {}",
            e.len(),
            space.n()
        )));
    }
    if e.count() == 0 {
        return Err(CertifyError::EmptySubset);
    }

    let diameter = space.subset_diameter(e);
    let diameter_bound = params.outer * params.scale(params.m);
    let hypothesis_value = 12.0 * params.outer * params.delta;
    let constraints = ConstraintRecord {
        diameter,
        diameter_bound,
        diameter_ok: diameter <= diameter_bound,
        hypothesis_value,
        hypothesis_bound: params.inner,
        hypothesis_ok: hypothesis_value <= params.inner,
    };
    let mut cert = CubeCandidateCert {
        n: space.n(),
        subset: e.clone(),
        params: *params,
        constraints,
        subset_plump: None,
        complement_plump: None,
        points: None,
        order: None,
        cubes: None,
        capped: None,
        cube: None,
        matching: None,
        accepted: false,
        rejection: None,
    };

    if !(constraints.diameter_ok && constraints.hypothesis_ok) {
        let mut reasons = Vec::new();
        if !constraints.diameter_ok {
            reasons.push(format!("subset diameter {diameter} exceeds B0 * delta^m = {diameter_bound}"));
        }
        if !constraints.hypothesis_ok {
            reasons.push(format!(
                "scale hypothesis fails: 12 * B0 * delta = {hypothesis_value} exceeds b0 = {}",
                params.inner
            ));
        }
        return Ok(cert.rejected(Stage::Constraints, reasons.join("; ")));
    }

    let valid = "parameters were validated above";
    let subset_plump = check_dplump(space, e, params).expect(valid);
    let complement_plump = check_dplump(space, &e.complement(), params).expect(valid);
    let mut failing = Vec::new();
    for (name, verdict) in [("subset", &subset_plump), ("complement", &complement_plump)] {
        if let Some(ce) = &verdict.counterexample {
            failing.push(format!("{name} side fails at (y = {}, k = {})", ce.y, ce.scale));
        }
    }
    cert.subset_plump = Some(subset_plump);
    cert.complement_plump = Some(complement_plump);
    if !failing.is_empty() {
        return Ok(cert.rejected(Stage::Plumpness, failing.join("; ")));
    }

    let points = match build_adapted_points(space, e, params, None, k_max) {
        Ok(points) => points,
        Err(err) => return Ok(cert.rejected(Stage::Points, err.to_string())),
    };
    let order = match build_order(space, &points) {
        Ok(order) => order,
        Err(err) => {
            cert.points = Some(points);
            return Ok(cert.rejected(Stage::Order, err.to_string()));
        }
    };

    let adapted = points.adapted.as_ref().expect("adapted systems carry their info");
    let (m, alpha0) = (adapted.m, adapted.alpha0);
    cert.cube = Some((m, alpha0));

    match build_cube_system(space, &points, &order) {
        Ok(cubes) => {
            let node = &cubes.level(m).expect("level m exists").cubes[alpha0];
            let matching = MatchRecord {
                full_resolution: true,
                open_in_subset: node.open.is_subset_of(e),
                subset_in_closed: e.is_subset_of(&node.closed),
                equality: node.members == *e,
            };
            cert.matching = Some(matching);
            cert.accepted = matching.equality;
            cert.points = Some(points);
            cert.order = Some(order);
            cert.cubes = Some(cubes);
            if !cert.accepted {
                return Ok(cert.rejected(
                    Stage::Match,
                    format!("the level-{m} cube of the adapted system differs from the subset"),
                ));
            }
            Ok(cert)
        }
        Err(CubeError::IncompleteLeaves { .. }) if k_max.is_some() => {
            // Closures over the available levels still bracket the subset.
            let finest = points.params.k_max;
            let count = points.level(m).expect("level m exists").centers.len();
            let closure_of = |alpha: usize| {
                let mut closed = SubsetMask::empty(space.n());
                for l in m..=finest {
                    let centers = &points.level(l).expect("level in range").centers;
                    for beta in descendants(&order, m, alpha, l) {
                        closed.insert(centers[beta].point);
                    }
                }
                closed
            };
            let mut others = SubsetMask::empty(space.n());
            for alpha in (0..count).filter(|&a| a != alpha0) {
                others.union_with(&closure_of(alpha));
            }
            let closed = closure_of(alpha0);
            let open = others.complement();
            let matching = MatchRecord {
                full_resolution: false,
                open_in_subset: open.is_subset_of(e),
                subset_in_closed: e.is_subset_of(&closed),
                equality: closed == *e && open == *e,
            };
            cert.capped = Some(CappedSets { closed, open });
            cert.matching = Some(matching);
            cert.points = Some(points);
            cert.order = Some(order);
            Ok(cert.rejected(
                Stage::Resolution,
                format!(
                    "capped level range ends at {finest} before every point is a center; \
                     only the level-{m} bracketing was computed"
                ),
            ))
        }
        Err(err) => {
            cert.points = Some(points);
            cert.order = Some(order);
            Ok(cert.rejected(Stage::Cubes, err.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AutoParamsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("the subset is empty")]
    EmptySubset,
    #[error("no feasible b0 in [12 * B0 * delta, B0] = [{lo}, {hi}]: {detail}")]
    NoFeasibleB0 { lo: f64, hi: f64, detail: String },
}

fn next_power_of_two_at_least(v: f64) -> f64 {
    let mut b = 1.0;
    while b < v {
        b *= 2.0;
    }
    while b / 2.0 >= v {
        b /= 2.0;
    }
    b
}

/// Searches for ladder parameters under which `e` certifies, with `m = 0`.
///
/// `B0` is the smallest power of two at least `max(diam E, min positive
/// distance)` (1 on a one-point space), which makes the diameter constraint
/// automatic. Candidate values of `b0` are the realized distances scaled up
/// by powers of `1 / delta` into the feasible band `[12 B0 delta, B0]`,
/// together with the band's endpoints, tried largest first; the first value
/// whose two plumpness checks certify wins. Requires `delta <= 1/12` so
/// that the band is nonempty.
pub fn auto_params(
    space: &FiniteMetricSpace,
    e: &SubsetMask,
    delta: f64,
) -> Result<DPlumpParams, AutoParamsError> {
    if !(delta > 0.0 && delta <= 1.0 / 12.0) {
        return Err(AutoParamsError::InvalidParams(format!(
            "delta must lie in (0, 1/12], got {delta}"
        )));
    }
    if e.len() != space.n() {
        return Err(AutoParamsError::InvalidParams(format!(
            "subset mask is over {} points but the space has {}",
            e.len(),
            space.n()
        )));
    }
    if e.count() == 0 {
        return Err(AutoParamsError::EmptySubset);
    }

    let min_pos = space.min_positive_distance();
    let outer = if min_pos.is_finite() {
        next_power_of_two_at_least(space.subset_diameter(e).max(min_pos))
    } else {
        1.0
    };
    let lo = 12.0 * outer * delta;
    let hi = outer;

    let mut candidates = vec![hi, lo];
    for &d in space.distinct_distances() {
        let mut v = d;
        while v < lo {
            v /= delta;
        }
        while v <= hi {
            candidates.push(v);
            v /= delta;
        }
    }
    candidates.sort_by(|a, b| b.partial_cmp(a).unwrap());
    candidates.dedup();

    let complement = e.complement();
    let mut last_failure = String::new();
    for b0 in candidates {
        let params = DPlumpParams { delta, m: 0, inner: b0, outer };
        let valid = "candidate parameters lie in a validated band";
        let subset = check_dplump(space, e, &params).expect(valid);
        let comp = check_dplump(space, &complement, &params).expect(valid);
        if subset.certified && comp.certified {
            return Ok(params);
        }
        let ce = subset
            .counterexample
            .as_ref()
            .map(|c| ("subset", c))
            .or(comp.counterexample.as_ref().map(|c| ("complement", c)))
            .expect("an uncertified verdict carries a counterexample");
        last_failure = format!(
            "b0 = {b0} fails on the {} side at (y = {}, k = {})",
            ce.0, ce.1.y, ce.1.scale
        );
    }
    Err(AutoParamsError::NoFeasibleB0 { lo, hi, detail: last_failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::build_adapted_points;
    use crate::plumpness::check_plump;
    use crate::testutil::{grid, mask, range_mask};

    fn grid16_system() -> (FiniteMetricSpace, SubsetMask, CubeSystem) {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let points = build_adapted_points(&s, &e, &ladder, None, None).unwrap();
        let order = build_order(&s, &points).unwrap();
        let cubes = build_cube_system(&s, &points, &order).unwrap();
        (s, e, cubes)
    }

    #[test]
    fn cube_params_follow_the_cube() {
        let (s, _, cubes) = grid16_system();
        let level = cubes.level(0).unwrap();
        let p = cube_plumpness_params(&s, &cubes.params, 0, &level.cubes[0]);
        assert_eq!(p.dplump, DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 2.0, outer: 18.0 });
        let radii = p.plump.unwrap();
        assert_eq!(radii.b, (1.0 / 16.0) * 2.0 / 18.0);
        assert_eq!(radii.r_max, 63.0);

        let singleton = &cubes.level(1).unwrap().cubes[0];
        let p = cube_plumpness_params(&s, &cubes.params, 1, singleton);
        assert_eq!(p.dplump.m, 1);
        assert!(p.plump.is_none());
    }

    #[test]
    fn every_grid16_cube_is_plump() {
        let (s, _, cubes) = grid16_system();
        let report = verify_all_cubes_plump(&s, &cubes);
        assert!(report.all_certified);
        assert_eq!(report.entries.len(), 18);
        assert_eq!((report.entries[0].k, report.entries[0].alpha), (0, 0));
        assert_eq!((report.entries[17].k, report.entries[17].alpha), (1, 15));

        let radii = report.entries[0].params.plump.as_ref().unwrap();
        let cube = &cubes.level(0).unwrap().cubes[0];
        assert!(check_plump(&s, &cube.members, radii).unwrap().certified);
        assert!(report.entries[2].params.plump.is_none());
    }

    #[test]
    fn grid16_half_line_certifies() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let cert = certify_cube_candidate(&s, &e, &ladder, None).unwrap();
        assert!(cert.accepted);
        assert!(cert.rejection.is_none());
        assert!(cert.constraints.diameter_ok && cert.constraints.hypothesis_ok);
        assert_eq!(cert.cube, Some((0, 0)));
        let matching = cert.matching.unwrap();
        assert!(matching.full_resolution && matching.equality);
        assert!(matching.open_in_subset && matching.subset_in_closed);
        assert_eq!(cert.cubes.unwrap().level(0).unwrap().cubes[0].members, e);
    }

    #[test]
    fn evens_are_rejected_for_plumpness() {
        let s = grid(16);
        let e = mask(16, &[0, 2, 4, 6, 8, 10, 12, 14]);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 12.0, outer: 16.0 };
        let cert = certify_cube_candidate(&s, &e, &ladder, None).unwrap();
        assert!(!cert.accepted);
        let rejection = cert.rejection.unwrap();
        assert_eq!(rejection.stage, Stage::Plumpness);
        let ce = cert.subset_plump.unwrap().counterexample.unwrap();
        assert_eq!((ce.y, ce.scale), (0, 0));
        assert!(!cert.complement_plump.unwrap().certified);
        assert!(cert.points.is_none());
    }

    #[test]
    fn oversized_subset_is_rejected_at_constraints() {
        let s = grid(16);
        let e = mask(16, &[0, 15]);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let cert = certify_cube_candidate(&s, &e, &ladder, None).unwrap();
        assert_eq!(cert.rejection.as_ref().unwrap().stage, Stage::Constraints);
        assert!(!cert.constraints.diameter_ok);
        assert!(cert.constraints.hypothesis_ok);
        assert!(cert.subset_plump.is_none());
    }

    #[test]
    fn coarse_delta_is_rejected_at_constraints() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 8.0, m: 0, inner: 6.0, outer: 8.0 };
        let cert = certify_cube_candidate(&s, &e, &ladder, None).unwrap();
        assert_eq!(cert.rejection.as_ref().unwrap().stage, Stage::Constraints);
        assert!(cert.constraints.diameter_ok);
        assert!(!cert.constraints.hypothesis_ok);
    }

    #[test]
    fn capped_range_rejects_with_bracketing() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let cert = certify_cube_candidate(&s, &e, &ladder, Some(0)).unwrap();
        assert!(!cert.accepted);
        assert_eq!(cert.rejection.as_ref().unwrap().stage, Stage::Resolution);
        let capped = cert.capped.unwrap();
        assert_eq!(capped.closed.iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(
            capped.open.iter().collect::<Vec<_>>(),
            (0..16).filter(|&x| x != 13).collect::<Vec<_>>()
        );
        let matching = cert.matching.unwrap();
        assert!(!matching.full_resolution);
        assert!(!matching.open_in_subset && !matching.subset_in_closed);
        assert!(cert.cubes.is_none());
    }

    #[test]
    fn whole_space_certifies_as_the_root_cube() {
        let s = grid(16);
        let e = SubsetMask::full(16);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 12.0, outer: 16.0 };
        let cert = certify_cube_candidate(&s, &e, &ladder, None).unwrap();
        assert!(cert.accepted);
    }

    #[test]
    fn empty_subset_is_an_error() {
        let s = grid(16);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let err = certify_cube_candidate(&s, &SubsetMask::empty(16), &ladder, None).unwrap_err();
        assert_eq!(err, CertifyError::EmptySubset);
    }

    #[test]
    fn auto_params_on_grid16() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let params = auto_params(&s, &e, 1.0 / 16.0).unwrap();
        assert_eq!(params, DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 8.0, outer: 8.0 });
        let cert = certify_cube_candidate(&s, &e, &params, None).unwrap();
        assert!(cert.accepted);
    }

    #[test]
    fn auto_params_rejects_evens() {
        let s = grid(16);
        let e = mask(16, &[0, 2, 4, 6, 8, 10, 12, 14]);
        let err = auto_params(&s, &e, 1.0 / 16.0).unwrap_err();
        match err {
            AutoParamsError::NoFeasibleB0 { lo, hi, detail } => {
                assert_eq!((lo, hi), (12.0, 16.0));
                assert!(detail.contains("b0 = 12"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn auto_params_on_a_single_point() {
        let s = grid(1);
        let e = SubsetMask::full(1);
        let params = auto_params(&s, &e, 1.0 / 16.0).unwrap();
        assert_eq!(params, DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 1.0, outer: 1.0 });
        assert!(certify_cube_candidate(&s, &e, &params, None).unwrap().accepted);
    }

    #[test]
    fn auto_params_delta_band() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        assert!(matches!(
            auto_params(&s, &e, 0.25),
            Err(AutoParamsError::InvalidParams(_))
        ));
        assert!(auto_params(&s, &e, 1.0 / 12.0).is_ok());
    }
}
