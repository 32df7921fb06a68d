//! Finite metric spaces with validated distance matrices.
//!
//! A space is a full `n x n` matrix of pairwise distances, checked once at
//! construction: symmetry, zero diagonal, strictly positive off-diagonal
//! entries, and the triangle inequality. All balls in this crate are open,
//! `B(x, r) = {y : d(x, y) < r}`, and all threshold comparisons downstream
//! are exact floating-point comparisons, so the validated matrix is the
//! single source of truth for every later decision.

use crate::set::SubsetMask;
use serde::Serialize;

/// Slack for the triangle check only, relative to the path length being
/// compared. Distance matrices computed from floating-point coordinates can
/// miss the exact inequality by a few ulps on nearly collinear triples; real
/// violations are orders of magnitude larger. Every other comparison in the
/// crate is exact.
const TRIANGLE_RELATIVE_SLACK: f64 = 32.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "kind")]
pub enum MetricError {
    #[error("dist({i},{j}) is negative, NaN, or infinite")]
    NegativeOrNan { i: usize, j: usize },
    #[error("dist({i},{i}) must be zero")]
    NonzeroDiagonal { i: usize },
    #[error("dist({i},{j}) != dist({j},{i})")]
    Asymmetric { i: usize, j: usize },
    #[error("dist({i},{j}) is zero for distinct points")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("triangle inequality fails: dist({i},{k}) > dist({i},{j}) + dist({j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("distance matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("a metric space needs at least one point")]
    Empty,
}

/// A finite metric space over points `0, .., n-1`.
///
/// Construction validates the matrix and precomputes per-point neighbor
/// lists sorted by distance, the sorted list of distinct positive distances,
/// the diameter, and the minimum positive distance. For a single point the
/// minimum positive distance is `+inf` and the diameter is `0`.
#[derive(Debug)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    labels: Option<Vec<String>>,
    /// Per point: all point indices sorted by (distance to that point, index).
    by_distance: Vec<Vec<u32>>,
    distinct: Vec<f64>,
    min_positive: f64,
    diameter: f64,
}

impl FiniteMetricSpace {
    /// Builds a space from a row-major flattened `n x n` matrix.
    pub fn from_flat(n: usize, dist: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self, MetricError> {
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if dist.len() != n * n {
            return Err(MetricError::NotSquare { rows: dist.len() / n.max(1), cols: n });
        }
        validate_metric(n, &dist)?;

        let mut by_distance = Vec::with_capacity(n);
        for i in 0..n {
            let mut row: Vec<u32> = (0..n as u32).collect();
            row.sort_by(|&a, &b| {
                let da = dist[i * n + a as usize];
                let db = dist[i * n + b as usize];
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            });
            by_distance.push(row);
        }

        let mut distinct: Vec<f64> = dist.iter().copied().filter(|&d| d > 0.0).collect();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();

        let min_positive = distinct.first().copied().unwrap_or(f64::INFINITY);
        let diameter = distinct.last().copied().unwrap_or(0.0);

        Ok(FiniteMetricSpace { n, dist, labels, by_distance, distinct, min_positive, diameter })
    }

    /// Builds a space from row vectors of a square matrix.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self, MetricError> {
        let n = rows.len();
        for r in &rows {
            if r.len() != n {
                return Err(MetricError::NotSquare { rows: n, cols: r.len() });
            }
        }
        Self::from_flat(n, rows.into_iter().flatten().collect(), labels)
    }

    /// Builds the Euclidean metric on a list of coordinate vectors.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Self::from_flat(n, dist, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `+inf` for a single-point space.
    pub fn min_positive_distance(&self) -> f64 {
        self.min_positive
    }

    /// Distinct positive distances in ascending order.
    pub fn distinct_distances(&self) -> &[f64] {
        &self.distinct
    }

    /// Open ball `B(x, r)` as ascending point indices.
    pub fn open_ball(&self, x: usize, r: f64) -> Vec<usize> {
        let mut ball: Vec<usize> = self.ball_prefix(x, r).iter().map(|&i| i as usize).collect();
        ball.sort_unstable();
        ball
    }

    /// The members of `B(x, r)` ordered by distance to `x` (ties by index).
    #[inline]
    pub(crate) fn ball_prefix(&self, x: usize, r: f64) -> &[u32] {
        let row = &self.by_distance[x];
        let cut = row.partition_point(|&i| self.dist(x, i as usize) < r);
        &row[..cut]
    }

    pub fn ball_count(&self, x: usize, r: f64) -> usize {
        self.ball_prefix(x, r).len()
    }

    /// Distance from `x` to a point set; `+inf` for the empty set.
    pub fn dist_to_set<I: IntoIterator<Item = usize>>(&self, x: usize, set: I) -> f64 {
        set.into_iter()
            .map(|s| self.dist(x, s))
            .fold(f64::INFINITY, f64::min)
    }

    /// Diameter of a subset (`0` for empty or singleton subsets).
    pub fn subset_diameter(&self, set: &SubsetMask) -> f64 {
        let members = set.indices();
        let mut d = 0.0;
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                d = f64::max(d, self.dist(i, j));
            }
        }
        d
    }

    /// Smallest integer `k >= floor` with `factor * delta^k < threshold`.
    ///
    /// With `0 < delta < 1` the scale `factor * delta^k` decreases in `k`, so
    /// the search always terminates; `threshold = +inf` returns `floor`.
    pub(crate) fn first_level_below(factor: f64, delta: f64, floor: i32, threshold: f64) -> i32 {
        let mut k = floor;
        while factor * delta.powi(k) >= threshold {
            k += 1;
        }
        k
    }

    /// Doubling bound: the least number of half-radius balls needed to cover
    /// any ball, maximized over centers and over the realized radii and their
    /// doubles. Exact (branch-and-bound set cover) for `n <= 64`; a greedy
    /// upper bound above that.
    pub fn doubling_constant(&self) -> DoublingBound {
        if self.n == 1 {
            return DoublingBound { value: 1, exact: true };
        }
        let mut radii: Vec<f64> = Vec::with_capacity(2 * self.distinct.len());
        radii.extend_from_slice(&self.distinct);
        radii.extend(self.distinct.iter().map(|d| 2.0 * d));
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        radii.dedup();

        let exact = self.n <= 64;
        let mut instances: Vec<(usize, f64, usize)> = Vec::new();
        for x in 0..self.n {
            for &r in &radii {
                instances.push((x, r, self.greedy_cover(x, r)));
            }
        }
        if !exact {
            let value = instances.iter().map(|&(_, _, g)| g).max().unwrap_or(1);
            return DoublingBound { value, exact: false };
        }

        instances.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.partial_cmp(&b.1).unwrap()));
        let mut best = 1usize;
        for &(x, r, greedy) in &instances {
            if greedy <= best {
                break;
            }
            best = best.max(self.exact_cover(x, r, greedy));
        }
        DoublingBound { value: best, exact: true }
    }

    /// Greedy cover of `B(x, r)` by balls of radius `r/2`: repeatedly take the
    /// center covering the most uncovered points, ties to the lowest index.
    fn greedy_cover(&self, x: usize, r: f64) -> usize {
        let half = r / 2.0;
        let mut uncovered = SubsetMask::empty(self.n);
        for &p in self.ball_prefix(x, r) {
            uncovered.insert(p as usize);
        }
        let mut used = 0;
        while !uncovered.is_empty() {
            let mut best_center = 0;
            let mut best_gain = 0;
            for c in 0..self.n {
                let gain = self
                    .ball_prefix(c, half)
                    .iter()
                    .filter(|&&p| uncovered.contains(p as usize))
                    .count();
                if gain > best_gain {
                    best_gain = gain;
                    best_center = c;
                }
            }
            debug_assert!(best_gain > 0);
            for &p in self.ball_prefix(best_center, half) {
                uncovered.remove(p as usize);
            }
            used += 1;
        }
        used
    }

    /// Minimum cover size for `B(x, r)` by half-radius balls, `n <= 64` only.
    fn exact_cover(&self, x: usize, r: f64, upper: usize) -> usize {
        debug_assert!(self.n <= 64);
        let half = r / 2.0;
        let mut target = 0u64;
        for &p in self.ball_prefix(x, r) {
            target |= 1 << p;
        }
        let mut candidates: Vec<u64> = (0..self.n)
            .map(|c| {
                let mut m = 0u64;
                for &p in self.ball_prefix(c, half) {
                    m |= 1 << p;
                }
                m & target
            })
            .filter(|&m| m != 0)
            .collect();
        // Dominated candidates never help a minimum cover.
        candidates.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        let mut kept: Vec<u64> = Vec::with_capacity(candidates.len());
        for m in candidates {
            if !kept.iter().any(|&k| m & !k == 0) {
                kept.push(m);
            }
        }
        let mut best = upper;
        Self::cover_search(target, &kept, 0, &mut best);
        best
    }

    fn cover_search(uncovered: u64, candidates: &[u64], used: usize, best: &mut usize) {
        if uncovered == 0 {
            *best = (*best).min(used);
            return;
        }
        if used + 1 >= *best {
            return;
        }
        // Branch on the uncovered point with the fewest covering candidates.
        let mut pick = 0;
        let mut pick_count = usize::MAX;
        let mut rest = uncovered;
        while rest != 0 {
            let p = rest.trailing_zeros();
            rest &= rest - 1;
            let cnt = candidates.iter().filter(|&&c| c >> p & 1 == 1).count();
            if cnt < pick_count {
                pick_count = cnt;
                pick = p;
            }
        }
        if pick_count == usize::MAX {
            return;
        }
        for &c in candidates.iter().filter(|&&c| c >> pick & 1 == 1) {
            Self::cover_search(uncovered & !c, candidates, used + 1, best);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DoublingBound {
    pub value: usize,
    /// True when the value came from the exhaustive cover search.
    pub exact: bool,
}

/// Checks that a flattened `n x n` matrix is a metric: finite nonnegative
/// entries, zero exactly on the diagonal, symmetric, and triangle-consistent.
/// Returns the first violation in a fixed scan order (entry checks, then
/// diagonal, then symmetry, then zero off-diagonal, then triangles in
/// lexicographic `(i, j, k)` order, where the violated route is
/// `dist(i,k) > dist(i,j) + dist(j,k)`).
pub fn validate_metric(n: usize, dist: &[f64]) -> Result<(), MetricError> {
    assert_eq!(dist.len(), n * n, "matrix shape must be checked by the caller");
    for i in 0..n {
        for j in 0..n {
            let d = dist[i * n + j];
            if !(d.is_finite() && d >= 0.0) {
                return Err(MetricError::NegativeOrNan { i, j });
            }
        }
    }
    for i in 0..n {
        if dist[i * n + i] != 0.0 {
            return Err(MetricError::NonzeroDiagonal { i });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[i * n + j] != dist[j * n + i] {
                return Err(MetricError::Asymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[i * n + j] == 0.0 {
                return Err(MetricError::ZeroOffDiagonal { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let path = dist[i * n + j] + dist[j * n + k];
                if dist[i * n + k] > path + TRIANGLE_RELATIVE_SLACK * path {
                    return Err(MetricError::TriangleViolation { i, j, k });
                }
            }
        }
    }
    Ok(())
}
