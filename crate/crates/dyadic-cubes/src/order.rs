//! Parent links between consecutive net levels.
//!
//! Every center at level `k + 1` is assigned one parent at level `k`. A
//! center strictly inside the half separation radius of some admissible
//! level-`k` center gets that center (separation makes it unique); otherwise
//! it falls back to the nearest admissible center within the covering
//! radius, lowest index on ties. On labeled levels of an adapted system,
//! admissible means same side. The resulting forest is the partial order
//! whose descendant sets become cubes.

use crate::metric::FiniteMetricSpace;
use crate::nets::DyadicPointSystem;
use serde::ser::{Serialize, SerializeStruct, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("center {beta} at level {k} has no admissible parent within the covering radius")]
    OrphanChild { k: i32, beta: usize },
}

/// The parent forest over a point system's centers. A node is addressed as
/// `(k, alpha)`: level and index within that level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentOrder {
    k_min: i32,
    k_max: i32,
    /// `parents[i][beta]`: parent index at level `k_min + i` of center `beta`
    /// at level `k_min + i + 1`.
    parents: Vec<Vec<usize>>,
    /// `children[i][alpha]`: ascending child indices at level `k_min + i + 1`
    /// of center `alpha` at level `k_min + i`.
    children: Vec<Vec<Vec<usize>>>,
}

impl ParentOrder {
    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    /// Parent of `(k, beta)`, or `None` at the coarsest level.
    pub fn parent(&self, k: i32, beta: usize) -> Option<(i32, usize)> {
        if k <= self.k_min || k > self.k_max {
            return None;
        }
        let i = (k - 1 - self.k_min) as usize;
        Some((k - 1, self.parents[i][beta]))
    }

    /// Children of `(k, alpha)` at level `k + 1`, ascending; empty at the
    /// finest level.
    pub fn children(&self, k: i32, alpha: usize) -> &[usize] {
        if k < self.k_min || k >= self.k_max {
            return &[];
        }
        &self.children[(k - self.k_min) as usize][alpha]
    }

    /// Ancestor of `(k, alpha)` at level `l <= k`.
    pub fn ancestor_at(&self, k: i32, alpha: usize, l: i32) -> (i32, usize) {
        assert!(l <= k, "ancestor level must be at most the node level");
        let mut node = (k, alpha);
        while node.0 > l {
            node = self.parent(node.0, node.1).expect("walk stays inside the level range");
        }
        node
    }

    /// True iff `(k1, a1)` descends from (or equals) `(k2, a2)`.
    pub fn leq(&self, (k1, a1): (i32, usize), (k2, a2): (i32, usize)) -> bool {
        k1 >= k2 && self.ancestor_at(k1, a1, k2) == (k2, a2)
    }

    /// Rebuilds an order from parent rows, as when loading a document.
    /// `level_sizes[i]` is the center count at level `k_min + i`.
    pub(crate) fn from_parent_rows(
        k_min: i32,
        k_max: i32,
        parents: Vec<Vec<usize>>,
        level_sizes: &[usize],
    ) -> ParentOrder {
        let children = parents
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut kids = vec![Vec::new(); level_sizes[i]];
                for (beta, &alpha) in row.iter().enumerate() {
                    if let Some(list) = kids.get_mut(alpha) {
                        list.push(beta);
                    }
                }
                kids
            })
            .collect();
        ParentOrder { k_min, k_max, parents, children }
    }
}

impl Serialize for ParentOrder {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        #[derive(serde::Serialize)]
        struct Edge {
            child: (i32, usize),
            parent: (i32, usize),
        }
        let edges: Vec<Edge> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                let k = self.k_min + i as i32 + 1;
                row.iter()
                    .enumerate()
                    .map(move |(beta, &alpha)| Edge { child: (k, beta), parent: (k - 1, alpha) })
            })
            .collect();
        let mut s = serializer.serialize_struct("ParentOrder", 3)?;
        s.serialize_field("k_min", &self.k_min)?;
        s.serialize_field("k_max", &self.k_max)?;
        s.serialize_field("edges", &edges)?;
        s.end()
    }
}

fn labeled_at(sys: &DyadicPointSystem, k: i32) -> bool {
    sys.adapted.as_ref().is_some_and(|a| k >= a.m)
}

/// Builds the parent forest for a point system.
///
/// Call on systems that pass [`verify_point_system`](crate::verify_point_system):
/// the separation property is what makes the half-radius parent unique, and
/// covering is what rules out orphans on systems built here.
pub fn build_order(space: &FiniteMetricSpace, sys: &DyadicPointSystem) -> Result<ParentOrder, OrderError> {
    let (k_min, k_max) = (sys.params.k_min, sys.params.k_max);
    let mut parents: Vec<Vec<usize>> = Vec::with_capacity((k_max - k_min) as usize);
    let mut children: Vec<Vec<Vec<usize>>> = Vec::with_capacity((k_max - k_min) as usize);

    for k in k_min..k_max {
        let coarse = &sys.level(k).expect("level in range").centers;
        let fine = &sys.level(k + 1).expect("level in range").centers;
        let restrict = labeled_at(sys, k);
        let half = 0.5 * sys.params.separation * sys.params.scale(k);
        let max_cover = sys.params.cover * sys.params.scale(k);

        let mut row = Vec::with_capacity(fine.len());
        for (beta, child) in fine.iter().enumerate() {
            let admissible = |c: &crate::nets::Center| !restrict || c.side == child.side;
            let mut snapped = coarse
                .iter()
                .enumerate()
                .filter(|(_, c)| admissible(c) && space.dist(child.point, c.point) < half);
            let parent = match snapped.next() {
                Some((alpha, _)) => {
                    assert!(
                        snapped.next().is_none(),
                        "two admissible parents inside the half separation radius; \
                         the system violates separation"
                    );
                    alpha
                }
                None => {
                    let mut best: Option<(usize, f64)> = None;
                    for (alpha, c) in coarse.iter().enumerate() {
                        if !admissible(c) {
                            continue;
                        }
                        let d = space.dist(child.point, c.point);
                        if d < max_cover && best.is_none_or(|(_, held)| d < held) {
                            best = Some((alpha, d));
                        }
                    }
                    best.map(|(alpha, _)| alpha)
                        .ok_or(OrderError::OrphanChild { k: k + 1, beta })?
                }
            };
            row.push(parent);
        }

        let mut kids = vec![Vec::new(); coarse.len()];
        for (beta, &alpha) in row.iter().enumerate() {
            kids[alpha].push(beta);
        }
        parents.push(row);
        children.push(kids);
    }

    Ok(ParentOrder { k_min, k_max, parents, children })
}

/// Indices at level `l` of all descendants of `(k, alpha)`, ascending.
/// `l = k` returns the node itself.
pub fn descendants(order: &ParentOrder, k: i32, alpha: usize, l: i32) -> Vec<usize> {
    assert!(l >= k, "descendant level must be at least the node level");
    let mut frontier = vec![alpha];
    for level in k..l {
        frontier = frontier
            .iter()
            .flat_map(|&a| order.children(level, a).iter().copied())
            .collect();
    }
    frontier.sort_unstable();
    frontier
}

/// What a parent-order verification can flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(tag = "kind")]
pub enum OrderViolation {
    /// Parent index of `(k, beta)` is out of range for level `k - 1`.
    ParentRange { k: i32, beta: usize },
    /// `(k, beta)` is not within the covering radius of its parent.
    UpperBound { k: i32, beta: usize },
    /// Some admissible center holds `(k, beta)` inside the half separation
    /// radius but is not its parent.
    HalfRule { k: i32, beta: usize },
    /// Parent and child sit on different sides of a labeled level pair.
    SideMatch { k: i32, beta: usize },
    /// Stored child list of `(k, alpha)` disagrees with the parent map.
    ChildListMismatch { k: i32, alpha: usize },
    /// Two distinct nodes descend from each other.
    Antisymmetry { k1: i32, a1: usize, k2: i32, a2: usize },
    /// A node does not compare below one of its own ancestors.
    Transitivity { k: i32, alpha: usize, l: i32 },
}

/// Cross-checks a parent order against its point system and returns the
/// sorted violations; empty means valid.
pub fn verify_order(
    space: &FiniteMetricSpace,
    sys: &DyadicPointSystem,
    order: &ParentOrder,
) -> Vec<OrderViolation> {
    let mut out = Vec::new();
    let (k_min, k_max) = (order.k_min, order.k_max);

    for k in (k_min + 1)..=k_max {
        let coarse = &sys.level(k - 1).expect("level in range").centers;
        let fine = &sys.level(k).expect("level in range").centers;
        let restrict = labeled_at(sys, k - 1);
        let half = 0.5 * sys.params.separation * sys.params.scale(k - 1);
        let max_cover = sys.params.cover * sys.params.scale(k - 1);

        for (beta, child) in fine.iter().enumerate() {
            let (_, alpha) = order.parent(k, beta).expect("non-root levels have parents");
            if alpha >= coarse.len() {
                out.push(OrderViolation::ParentRange { k, beta });
                continue;
            }
            let parent = &coarse[alpha];
            if space.dist(child.point, parent.point) >= max_cover {
                out.push(OrderViolation::UpperBound { k, beta });
            }
            if restrict && parent.side != child.side {
                out.push(OrderViolation::SideMatch { k, beta });
            }
            let snapped = coarse.iter().enumerate().find(|(_, c)| {
                (!restrict || c.side == child.side) && space.dist(child.point, c.point) < half
            });
            if let Some((gamma, _)) = snapped {
                if gamma != alpha {
                    out.push(OrderViolation::HalfRule { k, beta });
                }
            }
        }

        let i = (k - 1 - k_min) as usize;
        let mut expect = vec![Vec::new(); coarse.len()];
        for (beta, &alpha) in order.parents[i].iter().enumerate() {
            if alpha < coarse.len() {
                expect[alpha].push(beta);
            }
        }
        for (alpha, kids) in expect.iter().enumerate() {
            if order.children[i].get(alpha) != Some(kids) {
                out.push(OrderViolation::ChildListMismatch { k: k - 1, alpha });
            }
        }
    }

    // The parent map is a forest, which already forces a partial order; the
    // checks below exercise the comparison function itself. Antisymmetry
    // scans all node pairs while that stays cheap.
    let nodes: Vec<(i32, usize)> = sys
        .levels
        .iter()
        .flat_map(|l| (0..l.centers.len()).map(move |a| (l.k, a)))
        .collect();
    if nodes.len() <= 2000 {
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if order.leq(a, b) && order.leq(b, a) {
                    out.push(OrderViolation::Antisymmetry { k1: a.0, a1: a.1, k2: b.0, a2: b.1 });
                }
            }
        }
    }
    for &(k, alpha) in &nodes {
        for l in k_min..=k {
            let anc = order.ancestor_at(k, alpha, l);
            if !order.leq((k, alpha), anc) {
                out.push(OrderViolation::Transitivity { k, alpha, l });
            }
        }
    }

    out.sort_unstable();
    out
}
