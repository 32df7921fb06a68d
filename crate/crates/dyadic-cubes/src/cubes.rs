//! Cube systems: per-level partitions built from a parent order.
//!
//! The cube of a node `(k, alpha)` is the set of points of its descendant
//! centers at the finest level. When every point is a finest-level center,
//! those sets partition the space level by level, refine with `k`, and each
//! cube is sandwiched between an inner and an outer ball around its center
//! with radii `c1 * delta^k` and `C1 * delta^k`, where `c1` is a third of
//! the net separation factor and `C1` twice its covering factor. That
//! sandwich needs the scale hypothesis `12 C0 delta <= c0`, which is checked
//! up front.
//!
//! Each cube also carries its closure (descendant centers over all levels)
//! and its interior (what no other closed cube of the level claims). At full
//! resolution on a finite space both coincide with the member set; they are
//! stored and verified rather than assumed.

use crate::metric::FiniteMetricSpace;
use crate::nets::DyadicPointSystem;
use crate::order::{descendants, ParentOrder};
use crate::set::SubsetMask;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CubeError {
    #[error(
        "scale hypothesis failed: need 12 * C0 * delta <= c0, got 12 * {cover} * {delta} > {separation}"
    )]
    HypothesisViolated { separation: f64, cover: f64, delta: f64 },
    #[error("point {x} is not a center at the finest level, so cubes cannot partition the space")]
    IncompleteLeaves { x: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CubeParams {
    pub delta: f64,
    #[serde(rename = "c1")]
    pub inner: f64,
    #[serde(rename = "C1")]
    pub outer: f64,
}

impl CubeParams {
    pub fn scale(&self, k: i32) -> f64 {
        self.delta.powi(k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    pub center: usize,
    pub members: SubsetMask,
    pub closed: SubsetMask,
    pub open: SubsetMask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeLevel {
    pub k: i32,
    pub cubes: Vec<Cube>,
    /// Index of the cube whose members contain each point; `usize::MAX` when
    /// none does (possible only for hand-loaded systems).
    pub point_cube: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeSystem {
    pub params: CubeParams,
    pub levels: Vec<CubeLevel>,
}

impl CubeSystem {
    pub fn k_min(&self) -> i32 {
        self.levels.first().expect("systems have at least one level").k
    }

    pub fn k_max(&self) -> i32 {
        self.levels.last().expect("systems have at least one level").k
    }

    pub fn level(&self, k: i32) -> Option<&CubeLevel> {
        let idx = k.checked_sub(self.k_min())?;
        self.levels.get(usize::try_from(idx).ok()?)
    }
}

/// Index of the level-`k` cube containing `x`, or `None` when `k` is outside
/// the system's range, `x` outside the space, or no cube claims `x`.
pub fn locate(cubes: &CubeSystem, k: i32, x: usize) -> Option<usize> {
    let level = cubes.level(k)?;
    match level.point_cube.get(x) {
        Some(&alpha) if alpha != usize::MAX => Some(alpha),
        _ => None,
    }
}

fn point_cube_of(levels_cubes: &[Cube], n: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; n];
    for (alpha, cube) in levels_cubes.iter().enumerate() {
        for x in cube.members.iter() {
            if map[x] == usize::MAX {
                map[x] = alpha;
            }
        }
    }
    map
}

/// Builds the cube system of a point system under its parent order.
///
/// Fails when the scale hypothesis `12 C0 delta <= c0` does not hold or when
/// some point is missing from the finest level. Inner and outer cube radii
/// use `c1 = c0 / 3` and `C1 = 2 C0`.
pub fn build_cube_system(
    space: &FiniteMetricSpace,
    sys: &DyadicPointSystem,
    order: &ParentOrder,
) -> Result<CubeSystem, CubeError> {
    let p = &sys.params;
    if 12.0 * p.cover * p.delta > p.separation {
        return Err(CubeError::HypothesisViolated {
            separation: p.separation,
            cover: p.cover,
            delta: p.delta,
        });
    }
    let n = space.n();
    let finest = sys.level(p.k_max).expect("finest level exists");
    let mut is_leaf = SubsetMask::empty(n);
    for c in &finest.centers {
        is_leaf.insert(c.point);
    }
    if let Some(x) = (0..n).find(|&x| !is_leaf.contains(x)) {
        return Err(CubeError::IncompleteLeaves { x });
    }

    let params = CubeParams { delta: p.delta, inner: p.separation / 3.0, outer: 2.0 * p.cover };
    let mut levels: Vec<CubeLevel> = Vec::with_capacity(sys.levels.len());
    for level in &sys.levels {
        let k = level.k;
        let cubes: Vec<Cube> = level
            .centers
            .iter()
            .enumerate()
            .map(|(alpha, c)| {
                let leaf_indices = descendants(order, k, alpha, p.k_max);
                let mut members = SubsetMask::empty(n);
                for beta in leaf_indices {
                    members.insert(finest.centers[beta].point);
                }
                // On a finite space at full resolution every descendant
                // center persists to the finest level, so the closure adds
                // nothing and the interior gives nothing away.
                let closed = members.clone();
                let open = members.clone();
                Cube { center: c.point, members, closed, open }
            })
            .collect();
        let point_cube = point_cube_of(&cubes, n);
        debug_assert!(point_cube.iter().all(|&a| a != usize::MAX));
        levels.push(CubeLevel { k, cubes, point_cube });
    }
    Ok(CubeSystem { params, levels })
}

/// What a cube-system verification can flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(tag = "kind")]
pub enum CubeViolation {
    /// Point `x` lies in no cube or in more than one cube of level `k`.
    Partition { k: i32, x: usize },
    /// Cubes `(k, alpha)` and `(l, beta)` with `k < l` overlap without the
    /// finer being contained in the coarser.
    NestedOrDisjoint { k: i32, alpha: usize, l: i32, beta: usize },
    /// The inner ball of `(k, alpha)` is not contained in the cube.
    InnerBall { k: i32, alpha: usize },
    /// The cube `(k, alpha)` is not contained in its outer ball.
    OuterBall { k: i32, alpha: usize },
    /// The closure of `(k, alpha)` leaves its outer ball.
    ClosedOuterBall { k: i32, alpha: usize },
    /// The outer ball of a child cube is not contained in the outer ball of
    /// the cube containing its center at level `k`.
    OuterBallMonotone { k: i32, beta: usize },
    /// The interior or closure of `(k, alpha)` fails
    /// `open ⊆ members ⊆ closed`.
    Sandwich { k: i32, alpha: usize },
    /// The stored interior of `(k, alpha)` is not the complement of the
    /// other closed cubes of its level.
    OpenRecomputation { k: i32, alpha: usize },
    /// The point-to-cube index of level `k` disagrees with the member sets.
    PointCubeIndex { k: i32, x: usize },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CubeVerification {
    pub violations: Vec<CubeViolation>,
    /// True when containment was checked across every pair of levels rather
    /// than only adjacent and extreme pairs.
    pub exhaustive: bool,
}

const EXHAUSTIVE_PAIR_LIMIT: usize = 2000;

/// Checks every cube-system property against the space and returns the
/// sorted violations. Containment across levels is checked for all level
/// pairs on spaces up to 2000 points and for adjacent plus extreme pairs
/// beyond that, reported by the `exhaustive` flag.
pub fn verify_cube_system(space: &FiniteMetricSpace, cubes: &CubeSystem) -> CubeVerification {
    let mut out = Vec::new();
    let n = space.n();

    for level in &cubes.levels {
        let k = level.k;
        let r_in = cubes.params.inner * cubes.params.scale(k);
        let r_out = cubes.params.outer * cubes.params.scale(k);

        let mut coverage = vec![0usize; n];
        for cube in &level.cubes {
            for x in cube.members.iter() {
                coverage[x] += 1;
            }
        }
        for (x, &c) in coverage.iter().enumerate() {
            if c != 1 {
                out.push(CubeViolation::Partition { k, x });
            }
        }

        for (x, &alpha) in level.point_cube.iter().enumerate() {
            let claimed = level.cubes.iter().position(|c| c.members.contains(x));
            if claimed != (alpha != usize::MAX).then_some(alpha) {
                out.push(CubeViolation::PointCubeIndex { k, x });
            }
        }

        for (alpha, cube) in level.cubes.iter().enumerate() {
            if !space
                .ball_prefix(cube.center, r_in)
                .iter()
                .all(|&p| cube.members.contains(p as usize))
            {
                out.push(CubeViolation::InnerBall { k, alpha });
            }
            if !cube.members.iter().all(|x| space.dist(x, cube.center) < r_out) {
                out.push(CubeViolation::OuterBall { k, alpha });
            }
            if !cube.closed.iter().all(|x| space.dist(x, cube.center) < r_out) {
                out.push(CubeViolation::ClosedOuterBall { k, alpha });
            }
            if !(cube.open.is_subset_of(&cube.members) && cube.members.is_subset_of(&cube.closed)) {
                out.push(CubeViolation::Sandwich { k, alpha });
            }
            let mut other_closed = SubsetMask::empty(n);
            for (beta, other) in level.cubes.iter().enumerate() {
                if beta != alpha {
                    other_closed.union_with(&other.closed);
                }
            }
            if cube.open != other_closed.complement() {
                out.push(CubeViolation::OpenRecomputation { k, alpha });
            }
        }
    }

    for pair in cubes.levels.windows(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        let k = coarse.k;
        let r_child = cubes.params.outer * cubes.params.scale(fine.k);
        let r_parent = cubes.params.outer * cubes.params.scale(k);
        for (beta, child) in fine.cubes.iter().enumerate() {
            let Some(parent) = coarse
                .cubes
                .iter()
                .find(|c| c.members.contains(child.center))
            else {
                continue;
            };
            let contained = space
                .ball_prefix(child.center, r_child)
                .iter()
                .all(|&p| space.dist(p as usize, parent.center) < r_parent);
            if !contained {
                out.push(CubeViolation::OuterBallMonotone { k, beta });
            }
        }
    }

    let level_count = cubes.levels.len();
    let exhaustive = n <= EXHAUSTIVE_PAIR_LIMIT;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..level_count {
        for j in (i + 1)..level_count {
            let adjacent = j == i + 1;
            let extreme = i == 0 && j == level_count - 1;
            if exhaustive || adjacent || extreme {
                pairs.push((i, j));
            }
        }
    }
    let nested: Vec<CubeViolation> = pairs
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let (coarse, fine) = (&cubes.levels[i], &cubes.levels[j]);
            let mut found = Vec::new();
            for (alpha, a) in coarse.cubes.iter().enumerate() {
                for (beta, b) in fine.cubes.iter().enumerate() {
                    if !b.members.is_disjoint_from(&a.members) && !b.members.is_subset_of(&a.members)
                    {
                        found.push(CubeViolation::NestedOrDisjoint {
                            k: coarse.k,
                            alpha,
                            l: fine.k,
                            beta,
                        });
                    }
                }
            }
            found
        })
        .collect();
    out.extend(nested);

    out.sort_unstable();
    CubeVerification { violations: out, exhaustive }
}
