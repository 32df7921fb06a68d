//! Leveled nets of center points, plain and subset-adapted.
//!
//! A point system fixes a scale ratio `delta` and, for each level `k` in a
//! range, a set of centers that is `c0 * delta^k`-separated and covers the
//! space within `C0 * delta^k`. Coarser centers persist to finer levels, so
//! the per-level center sets grow with `k`.
//!
//! The adapted variant takes a subset `E` and, from level `m` on, labels
//! every center with the side it serves (`E` or its complement), admits as
//! centers only points whose distance to the opposite side is at least the
//! inner plumpness radius, and keeps level `m` down to a single `E`-side
//! center so that one coarse piece can reproduce `E` exactly. Side-respecting
//! covering is verified during construction and reported as an error when it
//! fails; on sets certified by [`check_dplump`](crate::check_dplump) it
//! cannot.

use crate::metric::FiniteMetricSpace;
use crate::plumpness::DPlumpParams;
use crate::set::SubsetMask;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("the subset is empty")]
    EmptySubset,
    #[error("no point on side {side:?} is far enough from the other side to serve as a center")]
    EmptyEligibleSet { side: Side },
    #[error("point {x} on side {side:?} is not covered by any level-{k} center of its side")]
    SideCoveringFailure { k: i32, x: usize, side: Side },
}

/// Which part of the space a center serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Side {
    #[serde(rename = "E")]
    Subset,
    #[serde(rename = "complement")]
    Complement,
    #[serde(rename = "unconstrained")]
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Center {
    pub point: usize,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Level {
    pub k: i32,
    pub centers: Vec<Center>,
}

/// Extra structure carried by adapted systems: the split level `m`, the
/// index of the unique `E`-side center at that level, and the subset itself.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AdaptedInfo {
    pub m: i32,
    pub alpha0: usize,
    pub subset: SubsetMask,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NetParams {
    pub delta: f64,
    #[serde(rename = "c0")]
    pub separation: f64,
    #[serde(rename = "C0")]
    pub cover: f64,
    pub k_min: i32,
    pub k_max: i32,
}

impl NetParams {
    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(NetError::InvalidParams(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(NetError::InvalidParams(format!("c0 must be positive and finite, got {}", self.separation)));
        }
        if !(self.cover.is_finite() && self.cover >= self.separation) {
            return Err(NetError::InvalidParams(format!(
                "C0 must be finite and at least c0, got c0={} C0={}",
                self.separation, self.cover
            )));
        }
        if self.k_min > self.k_max {
            return Err(NetError::InvalidParams(format!(
                "k_min must not exceed k_max, got k_min={} k_max={}",
                self.k_min, self.k_max
            )));
        }
        Ok(())
    }

    /// Chooses the level range for a space: `k_min` is the finest level whose
    /// separation radius still exceeds the diameter, so the coarsest net is a
    /// single point, and `k_max` is the first level whose separation radius
    /// falls below the minimum positive distance, so the finest net is every
    /// point.
    pub fn with_default_range(
        space: &FiniteMetricSpace,
        delta: f64,
        separation: f64,
        cover: f64,
    ) -> Result<NetParams, NetError> {
        let mut params = NetParams { delta, separation, cover, k_min: 0, k_max: 0 };
        params.validate()?;
        if space.diameter() > 0.0 {
            let mut k = 0;
            while separation * delta.powi(k) <= space.diameter() {
                k -= 1;
            }
            while separation * delta.powi(k + 1) > space.diameter() {
                k += 1;
            }
            params.k_min = k;
        }
        params.k_max = FiniteMetricSpace::first_level_below(
            separation,
            delta,
            params.k_min,
            space.min_positive_distance(),
        );
        Ok(params)
    }

    pub fn scale(&self, k: i32) -> f64 {
        self.delta.powi(k)
    }
}

/// A leveled net of centers. `levels` runs from `k_min` to `k_max` in order;
/// a center's index within its level is its name `alpha`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DyadicPointSystem {
    pub params: NetParams,
    pub levels: Vec<Level>,
    pub adapted: Option<AdaptedInfo>,
}

impl DyadicPointSystem {
    pub fn level(&self, k: i32) -> Option<&Level> {
        let idx = k.checked_sub(self.params.k_min)?;
        self.levels.get(usize::try_from(idx).ok()?)
    }

    /// Center points of level `k` in `alpha` order. Panics if `k` is out of
    /// the system's range.
    pub fn center_points(&self, k: i32) -> Vec<usize> {
        self.level(k)
            .expect("level out of range")
            .centers
            .iter()
            .map(|c| c.point)
            .collect()
    }
}

/// What a point system verification can flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(tag = "kind")]
pub enum NetViolation {
    /// Centers `alpha < beta` of level `k` are closer than the separation radius.
    Separation { k: i32, alpha: usize, beta: usize },
    /// Point `x` is not within the covering radius of any level-`k` center.
    Covering { k: i32, x: usize },
    /// Center `alpha` of level `k` does not persist to level `k + 1`.
    Nesting { k: i32, alpha: usize },
    /// Labeled center `alpha` of level `k` sits closer to the opposite side
    /// than the inner plumpness radius (or on the wrong side outright).
    SideMargin { k: i32, alpha: usize },
    /// Point `x` on side `side` is not within the covering radius of any
    /// same-side level-`k` center.
    SideCovering { k: i32, x: usize, side: Side },
    /// Center `alpha` of level `k` carries a side label where none belongs,
    /// or lacks one where one is required.
    SideLabel { k: i32, alpha: usize },
    /// Level `m` of an adapted system must consist of exactly one subset-side
    /// center at index `alpha0`.
    LevelMUniqueness { m: i32 },
}

fn greedy_extend(
    space: &FiniteMetricSpace,
    chosen: &mut Vec<usize>,
    candidates: impl Iterator<Item = usize>,
    min_sep: f64,
) {
    for x in candidates {
        if chosen.iter().all(|&c| space.dist(x, c) >= min_sep) {
            chosen.push(x);
        }
    }
}

/// Builds a plain (unlabeled) point system: each level is a greedy maximal
/// separated set seeded by the previous level's centers, scanned in
/// ascending point order, so the result is canonical.
pub fn build_plain_points(
    space: &FiniteMetricSpace,
    params: &NetParams,
) -> Result<DyadicPointSystem, NetError> {
    params.validate()?;
    let mut levels: Vec<Level> = Vec::with_capacity((params.k_max - params.k_min + 1) as usize);
    let mut chosen: Vec<usize> = Vec::new();
    for k in params.k_min..=params.k_max {
        let min_sep = params.separation * params.scale(k);
        greedy_extend(space, &mut chosen, 0..space.n(), min_sep);
        let centers = chosen.iter().map(|&point| Center { point, side: Side::Unconstrained }).collect();
        levels.push(Level { k, centers });
        // A maximal separated set covers within its own separation radius,
        // which is at most the covering radius.
        debug_assert!((0..space.n())
            .all(|x| chosen.iter().any(|&c| space.dist(x, c) < params.cover * params.scale(k))));
    }
    Ok(DyadicPointSystem { params: *params, levels, adapted: None })
}

fn side_of(e: &SubsetMask, x: usize) -> Side {
    if e.contains(x) {
        Side::Subset
    } else {
        Side::Complement
    }
}

/// Distance from each point to the side it does not belong to; infinite when
/// the other side is empty.
fn opposite_margins(space: &FiniteMetricSpace, e: &SubsetMask) -> Vec<f64> {
    let complement = e.complement();
    (0..space.n())
        .map(|x| {
            let other = if e.contains(x) { &complement } else { e };
            space.dist_to_set(x, other.iter())
        })
        .collect()
}

/// Builds an adapted point system for the subset `e` from ladder parameters.
///
/// Levels below `m` (present only when `k_min` is passed and below `m`) are
/// plain. From level `m` on, every center is labeled, only points with
/// opposite-side distance at least `b0 * delta^k` are admitted, the
/// separation radius is `b0 * delta^k`, and level `m` keeps a single
/// subset-side center: the admissible point of maximum opposite-side
/// distance, lowest index on ties. That center comes first, so its name is
/// `alpha0 = 0`. Defaults: `k_min = m`, and `k_max` is the first level where
/// `B0 * delta^k` falls below the minimum positive distance, which makes the
/// finest level contain every point.
///
/// After building each labeled level, same-side covering within
/// `B0 * delta^k` is checked for both sides and a failure is an error.
pub fn build_adapted_points(
    space: &FiniteMetricSpace,
    e: &SubsetMask,
    ladder: &DPlumpParams,
    k_min: Option<i32>,
    k_max: Option<i32>,
) -> Result<DyadicPointSystem, NetError> {
    ladder.validate().map_err(|err| NetError::InvalidParams(err.to_string()))?;
    if e.len() != space.n() {
        return Err(NetError::InvalidParams(format!(
            "subset mask is over {} points but the space has {}",
            e.len(),
            space.n()
        )));
    }
    if e.count() == 0 {
        return Err(NetError::EmptySubset);
    }
    let m = ladder.m;
    let k_min = k_min.unwrap_or(m);
    let k_max = k_max.unwrap_or_else(|| {
        FiniteMetricSpace::first_level_below(ladder.outer, ladder.delta, m, space.min_positive_distance())
    });
    if k_min > m {
        return Err(NetError::InvalidParams(format!("k_min must not exceed m, got k_min={k_min} m={m}")));
    }
    if k_max < m {
        return Err(NetError::InvalidParams(format!("k_max must be at least m, got k_max={k_max} m={m}")));
    }
    let params = NetParams {
        delta: ladder.delta,
        separation: ladder.inner,
        cover: ladder.outer,
        k_min,
        k_max,
    };
    params.validate()?;

    let margins = opposite_margins(space, e);
    let sides: Vec<Side> = (0..space.n()).map(|x| side_of(e, x)).collect();
    let mut levels: Vec<Level> = Vec::with_capacity((k_max - k_min + 1) as usize);

    // Plain prefix below the split level.
    let mut plain: Vec<usize> = Vec::new();
    for k in k_min..m {
        greedy_extend(space, &mut plain, 0..space.n(), params.separation * params.scale(k));
        let centers = plain.iter().map(|&point| Center { point, side: Side::Unconstrained }).collect();
        levels.push(Level { k, centers });
    }

    let mut on_side: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for k in m..=k_max {
        let min_sep = params.separation * params.scale(k);
        for (slot, side) in [(0, Side::Subset), (1, Side::Complement)] {
            let eligible = (0..space.n()).filter(|&x| sides[x] == side && margins[x] >= min_sep);
            if k == m && side == Side::Subset {
                // One coarse center for the whole subset: the admissible
                // point farthest from the complement, lowest index on ties.
                let seed = eligible.reduce(|best, x| if margins[x] > margins[best] { x } else { best });
                match seed {
                    Some(x) => on_side[slot].push(x),
                    None => return Err(NetError::EmptyEligibleSet { side }),
                }
            } else {
                greedy_extend(space, &mut on_side[slot], eligible, min_sep);
                if on_side[slot].is_empty() && (0..space.n()).any(|x| sides[x] == side) {
                    return Err(NetError::EmptyEligibleSet { side });
                }
            }
        }
        let centers: Vec<Center> = [(0, Side::Subset), (1, Side::Complement)]
            .into_iter()
            .flat_map(|(slot, side)| on_side[slot].iter().map(move |&point| Center { point, side }))
            .collect();
        let max_cover = params.cover * params.scale(k);
        for x in 0..space.n() {
            let covered = centers
                .iter()
                .any(|c| c.side == sides[x] && space.dist(x, c.point) < max_cover);
            if !covered {
                return Err(NetError::SideCoveringFailure { k, x, side: sides[x] });
            }
        }
        levels.push(Level { k, centers });
    }

    Ok(DyadicPointSystem {
        params,
        levels,
        adapted: Some(AdaptedInfo { m, alpha0: 0, subset: e.clone() }),
    })
}

/// Checks every structural property of a point system and returns the sorted
/// list of violations; empty means valid.
pub fn verify_point_system(space: &FiniteMetricSpace, sys: &DyadicPointSystem) -> Vec<NetViolation> {
    let mut out = Vec::new();
    let params = &sys.params;
    let split = sys.adapted.as_ref().map(|a| a.m);
    let complement = sys.adapted.as_ref().map(|a| a.subset.complement());

    for level in &sys.levels {
        let k = level.k;
        let labeled = split.is_some_and(|m| k >= m);
        let min_sep = params.separation * params.scale(k);
        let max_cover = params.cover * params.scale(k);

        for (alpha, c) in level.centers.iter().enumerate() {
            for (beta, d) in level.centers.iter().enumerate().skip(alpha + 1) {
                if space.dist(c.point, d.point) < min_sep {
                    out.push(NetViolation::Separation { k, alpha, beta });
                }
            }
            if labeled != (c.side != Side::Unconstrained) {
                out.push(NetViolation::SideLabel { k, alpha });
            }
            if labeled && c.side != Side::Unconstrained {
                let (a, e) = (sys.adapted.as_ref().unwrap(), complement.as_ref().unwrap());
                let opposite = match c.side {
                    Side::Subset => e,
                    Side::Complement => &a.subset,
                    Side::Unconstrained => unreachable!(),
                };
                if space.dist_to_set(c.point, opposite.iter()) < min_sep {
                    out.push(NetViolation::SideMargin { k, alpha });
                }
            }
        }

        for x in 0..space.n() {
            if !level.centers.iter().any(|c| space.dist(x, c.point) < max_cover) {
                out.push(NetViolation::Covering { k, x });
            }
            if labeled {
                let a = sys.adapted.as_ref().unwrap();
                let side = side_of(&a.subset, x);
                let covered = level
                    .centers
                    .iter()
                    .any(|c| c.side == side && space.dist(x, c.point) < max_cover);
                if !covered {
                    out.push(NetViolation::SideCovering { k, x, side });
                }
            }
        }

        if level.k < params.k_max {
            let next = &sys.levels[(k - params.k_min) as usize + 1];
            let nesting_applies = split.is_none_or(|m| k >= m);
            if nesting_applies {
                for (alpha, c) in level.centers.iter().enumerate() {
                    if !next.centers.iter().any(|d| d.point == c.point) {
                        out.push(NetViolation::Nesting { k, alpha });
                    }
                }
            }
        }
    }

    if let Some(a) = &sys.adapted {
        let ok = sys.level(a.m).is_some_and(|level| {
            let subset_centers: Vec<usize> = level
                .centers
                .iter()
                .enumerate()
                .filter(|(_, c)| c.side == Side::Subset)
                .map(|(i, _)| i)
                .collect();
            subset_centers == [a.alpha0]
        });
        if !ok {
            out.push(NetViolation::LevelMUniqueness { m: a.m });
        }
    }

    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{grid, mask, range_mask};

    fn points(sys: &DyadicPointSystem, k: i32) -> Vec<usize> {
        sys.center_points(k)
    }

    #[test]
    fn grid16_plain_default_range() {
        let s = grid(16);
        let p = NetParams::with_default_range(&s, 1.0 / 16.0, 1.0, 1.0).unwrap();
        assert_eq!((p.k_min, p.k_max), (-1, 1));
        let sys = build_plain_points(&s, &p).unwrap();
        assert_eq!(points(&sys, -1), vec![0]);
        assert_eq!(points(&sys, 0), (0..16).collect::<Vec<_>>());
        assert_eq!(points(&sys, 1), (0..16).collect::<Vec<_>>());
        assert!(sys.adapted.is_none());
        assert_eq!(verify_point_system(&s, &sys), vec![]);
    }

    #[test]
    fn grid16_plain_binary_cascade() {
        let s = grid(16);
        let p = NetParams::with_default_range(&s, 0.5, 1.0, 1.0).unwrap();
        assert_eq!((p.k_min, p.k_max), (-4, 1));
        let sys = build_plain_points(&s, &p).unwrap();
        assert_eq!(points(&sys, -4), vec![0]);
        assert_eq!(points(&sys, -3), vec![0, 8]);
        // Seeds keep their coarse order; new centers append in point order.
        assert_eq!(points(&sys, -2), vec![0, 8, 4, 12]);
        assert_eq!(points(&sys, -1), vec![0, 8, 4, 12, 2, 6, 10, 14]);
        assert_eq!(points(&sys, 0).len(), 16);
        assert_eq!(verify_point_system(&s, &sys), vec![]);
    }

    #[test]
    fn singleton_space_plain() {
        let s = grid(1);
        let p = NetParams::with_default_range(&s, 0.5, 1.0, 2.0).unwrap();
        assert_eq!((p.k_min, p.k_max), (0, 0));
        let sys = build_plain_points(&s, &p).unwrap();
        assert_eq!(points(&sys, 0), vec![0]);
        assert_eq!(verify_point_system(&s, &sys), vec![]);
    }

    #[test]
    fn grid16_adapted_half_line() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let sys = build_adapted_points(&s, &e, &ladder, None, None).unwrap();
        assert_eq!((sys.params.k_min, sys.params.k_max), (0, 1));
        assert_eq!(sys.params.separation, 6.0);
        assert_eq!(sys.params.cover, 8.0);

        // Level 0: the subset seed is the point deepest inside E, index 0 on
        // the tie-free margin profile 8, 7, 6; the complement side greedily
        // keeps 13 out of its admissible points 13, 14, 15.
        let l0 = &sys.level(0).unwrap().centers;
        assert_eq!(l0.len(), 2);
        assert_eq!(l0[0], Center { point: 0, side: Side::Subset });
        assert_eq!(l0[1], Center { point: 13, side: Side::Complement });

        // Level 1: every point is admissible and separated; seeds first.
        let l1: Vec<(usize, Side)> = sys.level(1).unwrap().centers.iter().map(|c| (c.point, c.side)).collect();
        let expect_e: Vec<(usize, Side)> = (0..8).map(|p| (p, Side::Subset)).collect();
        let expect_c: Vec<(usize, Side)> =
            [13, 8, 9, 10, 11, 12, 14, 15].into_iter().map(|p| (p, Side::Complement)).collect();
        assert_eq!(l1, [expect_e, expect_c].concat());

        let a = sys.adapted.as_ref().unwrap();
        assert_eq!((a.m, a.alpha0), (0, 0));
        assert_eq!(a.subset, e);
        assert_eq!(verify_point_system(&s, &sys), vec![]);
    }

    #[test]
    fn grid16_adapted_with_coarse_prefix() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let sys = build_adapted_points(&s, &e, &ladder, Some(-1), None).unwrap();
        assert_eq!(sys.params.k_min, -1);
        let l = &sys.level(-1).unwrap().centers;
        assert_eq!(l, &vec![Center { point: 0, side: Side::Unconstrained }]);
        assert_eq!(verify_point_system(&s, &sys), vec![]);
    }

    #[test]
    fn evens_have_no_admissible_subset_center() {
        let s = grid(16);
        let e = mask(16, &[0, 2, 4, 6, 8, 10, 12, 14]);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let err = build_adapted_points(&s, &e, &ladder, None, None).unwrap_err();
        assert_eq!(err, NetError::EmptyEligibleSet { side: Side::Subset });
    }

    #[test]
    fn diameter_equal_to_cover_radius_breaks_side_covering() {
        // E = {0..8} has diameter exactly B0 * delta^m = 8, so the single
        // subset center at 0 misses the far endpoint under the strict
        // covering inequality.
        let s = grid(24);
        let e = range_mask(24, 0..9);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let err = build_adapted_points(&s, &e, &ladder, None, None).unwrap_err();
        assert_eq!(err, NetError::SideCoveringFailure { k: 0, x: 8, side: Side::Subset });
    }

    #[test]
    fn empty_subset_is_rejected() {
        let s = grid(4);
        let ladder = DPlumpParams { delta: 0.5, m: 0, inner: 1.0, outer: 1.0 };
        let err = build_adapted_points(&s, &SubsetMask::empty(4), &ladder, None, None).unwrap_err();
        assert_eq!(err, NetError::EmptySubset);
    }

    #[test]
    fn whole_space_subset_has_no_complement_side() {
        let s = grid(16);
        let e = SubsetMask::full(16);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 16.0 };
        let sys = build_adapted_points(&s, &e, &ladder, None, None).unwrap();
        let l0 = &sys.level(0).unwrap().centers;
        assert_eq!(l0.len(), 1);
        assert_eq!(l0[0].side, Side::Subset);
        assert_eq!(verify_point_system(&s, &sys), vec![]);
    }

    #[test]
    fn planted_faults_are_reported() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let good = build_adapted_points(&s, &e, &ladder, None, None).unwrap();

        // Dropping the complement center at level 0 kills covering for the
        // whole complement side.
        let mut sys = good.clone();
        sys.levels[0].centers.truncate(1);
        let v = verify_point_system(&s, &sys);
        assert!(v.contains(&NetViolation::Covering { k: 0, x: 15 }));
        assert!(v.contains(&NetViolation::SideCovering { k: 0, x: 8, side: Side::Complement }));

        // Moving the subset center to a point at margin 1 breaks its side
        // margin, and 7 is not among the level-1 centers it should nest into.
        let mut sys = good.clone();
        sys.levels[0].centers[0].point = 7;
        let v = verify_point_system(&s, &sys);
        assert!(v.contains(&NetViolation::SideMargin { k: 0, alpha: 0 }));

        // Duplicating a center breaks separation.
        let mut sys = good.clone();
        let c = sys.levels[1].centers[0];
        sys.levels[1].centers.push(c);
        let v = verify_point_system(&s, &sys);
        assert!(v.iter().any(|x| matches!(x, NetViolation::Separation { k: 1, .. })));

        // Relabeling the level-m subset center breaks uniqueness.
        let mut sys = good.clone();
        sys.levels[0].centers[0].side = Side::Complement;
        let v = verify_point_system(&s, &sys);
        assert!(v.contains(&NetViolation::LevelMUniqueness { m: 0 }));

        // A stray label below the split level is flagged.
        let mut sys = build_adapted_points(&s, &e, &ladder, Some(-1), None).unwrap();
        sys.levels[0].centers[0].side = Side::Subset;
        let v = verify_point_system(&s, &sys);
        assert!(v.contains(&NetViolation::SideLabel { k: -1, alpha: 0 }));
    }

    #[test]
    fn violations_come_out_sorted() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let mut sys = build_adapted_points(&s, &e, &ladder, None, None).unwrap();
        sys.levels[0].centers.clear();
        let v = verify_point_system(&s, &sys);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(v, sorted);
        assert!(!v.is_empty());
    }

    #[test]
    fn system_serialization_shape() {
        let s = grid(16);
        let e = range_mask(16, 0..8);
        let ladder = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
        let sys = build_adapted_points(&s, &e, &ladder, None, None).unwrap();
        let j = serde_json::to_value(&sys).unwrap();
        assert_eq!(j["params"]["c0"], serde_json::json!(6.0));
        assert_eq!(j["params"]["C0"], serde_json::json!(8.0));
        assert_eq!(j["levels"][0]["k"], serde_json::json!(0));
        assert_eq!(j["levels"][0]["centers"][0], serde_json::json!({"point": 0, "side": "E"}));
        assert_eq!(j["adapted"]["alpha0"], serde_json::json!(0));
        assert_eq!(j["adapted"]["subset"], serde_json::json!([0, 1, 2, 3, 4, 5, 6, 7]));
    }
}
