//! The adaptive partition of `S × A` kept for each step of the horizon.
//!
//! A partition is a finite subtree of the dyadic hierarchy over the product
//! space. Leaves are the active balls; a ball at level `ℓ` has an `S`-cell and
//! an `A`-cell, both at level `ℓ`. Nodes live in an arena and refer to each
//! other by [`NodeId`]. The `2^d` children of a node occupy consecutive ids,
//! ordered state-bits first, so the children sharing a given state sub-cell
//! form one contiguous run of `2^{d_A}` ids.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::adamb::split_transition;
use crate::error::{Error, Result};
use crate::geometry::{cell_children, index_at_level, DyadicCell, MetricSpec, Point, MAX_DEPTH};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Empirical reward and level-matched transition estimates of a ball.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelStats<T> {
    pub rbar: T,
    /// Sparse distribution over state cells at the ball's level. Absent keys carry no mass.
    pub tbar: BTreeMap<DyadicCell, T>,
}

impl<T: Real> ModelStats<T> {
    pub fn mass(&self) -> T {
        self.tbar.values().copied().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallNode<T> {
    pub s_cell: DyadicCell,
    pub a_cell: DyadicCell,
    /// Visits of this ball and its ancestors.
    pub count: u64,
    pub qhat: T,
    pub parent: Option<NodeId>,
    pub model: Option<ModelStats<T>>,
    first_child: Option<NodeId>,
}

impl<T: Real> BallNode<T> {
    pub fn level(&self) -> u32 {
        self.s_cell.level
    }

    pub fn diameter(&self) -> T {
        T::dyadic(self.level())
    }

    pub fn is_leaf(&self) -> bool {
        self.first_child.is_none()
    }

    /// Center of the ball's action cell, the action played when it is selected.
    pub fn action(&self) -> Point<T> {
        crate::geometry::cell_center(&self.a_cell)
    }
}

/// Splitting threshold `Conf(n) = scale / n^(1/exponent)`; a ball splits once `Conf ≤ diam`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRule<T> {
    pub scale: T,
    pub exponent: u32,
}

impl<T: Real> SplitRule<T> {
    pub fn new(scale: T, exponent: u32) -> Result<Self> {
        if !(scale > T::zero()) || exponent == 0 {
            return Err(Error::InvalidParameter(format!(
                "split rule needs scale > 0 and exponent >= 1 (got {scale}, {exponent})"
            )));
        }
        Ok(Self { scale, exponent })
    }

    pub fn conf(&self, n: u64) -> Result<T> {
        if n == 0 {
            return Err(Error::ZeroCount);
        }
        Ok(self.scale / T::from_count(n).root(self.exponent))
    }

    /// `(scale / (2·diam))^γ`: the fewest visits a child ball at `level` can have.
    pub fn n_min(&self, level: u32) -> T {
        (self.scale / (T::lit(2.0) * T::dyadic(level))).powi(self.exponent as i32)
    }

    /// `(scale / diam)^γ`: visits after which a ball at `level` is due to split.
    pub fn n_max(&self, level: u32) -> T {
        (self.scale / T::dyadic(level)).powi(self.exponent as i32)
    }

    /// The constant `φ` in the partition size bound, taken as `scale^γ · 2^-γ`.
    pub fn phi(&self) -> T {
        (self.scale * T::lit(0.5)).powi(self.exponent as i32)
    }
}

/// `Conf ≤ diam`.
pub fn should_split<T: Real>(conf: T, diameter: T) -> bool {
    conf <= diameter
}

/// Worst-case number of leaves after `k` samples: `4^d (k/φ)^{d/(d+γ)}`.
pub fn size_bound<T: Real>(k: u64, dim: usize, exponent: u32, phi: T) -> T {
    let d = T::from_count(dim as u64);
    let g = T::from_count(u64::from(exponent));
    T::lit(4.0).powi(dim as i32) * (T::from_count(k) / phi).powf(d / (d + g))
}

/// One line of a partition dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LeafRecord {
    pub h: usize,
    pub level: u32,
    pub s_cell_index: Vec<u32>,
    pub a_cell_index: Vec<u32>,
    pub n: u64,
    pub qhat: f64,
}

#[derive(Debug, Clone)]
pub struct AdaptivePartition<T> {
    spec: MetricSpec,
    step: usize,
    rule: SplitRule<T>,
    max_depth: u32,
    nodes: Vec<BallNode<T>>,
    leaves: usize,
}

impl<T: Real> AdaptivePartition<T> {
    /// The singleton partition `{S × A}` for step `step`, with the root estimate set to
    /// `initial_q`. When `model_based` is set every ball carries [`ModelStats`].
    pub fn new(
        spec: MetricSpec,
        step: usize,
        rule: SplitRule<T>,
        initial_q: T,
        model_based: bool,
    ) -> Self {
        let root = BallNode {
            s_cell: DyadicCell::root(spec.state_dim),
            a_cell: DyadicCell::root(spec.action_dim),
            count: 0,
            qhat: initial_q,
            parent: None,
            model: model_based.then(ModelStats::default),
            first_child: None,
        };
        Self {
            spec,
            step,
            rule,
            max_depth: MAX_DEPTH,
            nodes: vec![root],
            leaves: 1,
        }
    }

    /// Caps the depth of the tree; balls at `max_depth` never split.
    pub fn with_max_depth(mut self, max_depth: u32) -> Self {
        self.max_depth = max_depth.min(MAX_DEPTH);
        self
    }

    pub fn spec(&self) -> MetricSpec {
        self.spec
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn rule(&self) -> SplitRule<T> {
        self.rule
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &BallNode<T> {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut BallNode<T> {
        &mut self.nodes[id.index()]
    }

    /// Total nodes in the arena, internal ones included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of active balls.
    pub fn node_count(&self) -> usize {
        self.leaves
    }

    pub fn children(&self, id: NodeId) -> Option<Range<u32>> {
        let fanout = 1u32 << self.spec.dim();
        self.node(id).first_child.map(|c| c.0..c.0 + fanout)
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_leaf())
            .map(|(i, _)| NodeId(i as u32))
    }

    /// Strict ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.node(id).parent, move |p| self.node(*p).parent)
    }

    /// All leaves whose state cell contains `x`.
    ///
    /// Descends from the root; at each internal node only the `2^{d_A}` children
    /// sharing the state sub-cell of `x` are visited.
    pub fn relevant(&self, x: &Point<T>) -> Vec<NodeId> {
        debug_assert_eq!(x.dim(), self.spec.state_dim);
        let d_a = self.spec.action_dim;
        let mut out = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(id) = stack.pop() {
            let node = self.node(id);
            match node.first_child {
                None => out.push(id),
                Some(first) => {
                    let s_off = index_at_level(x.coords(), node.level() + 1)
                        .fold(0u32, |acc, i| (acc << 1) | (i & 1));
                    let start = first.0 + (s_off << d_a);
                    stack.extend((start..start + (1 << d_a)).rev().map(NodeId));
                }
            }
        }
        out
    }

    /// Greedy selection: the relevant leaf with the largest estimate.
    ///
    /// Ties go to the deeper ball and then to the lexicographically smallest action cell.
    pub fn select_ball(&self, x: &Point<T>) -> NodeId {
        self.relevant(x)
            .into_iter()
            .reduce(|best, cand| if self.prefer(cand, best) { cand } else { best })
            .expect("relevant set is never empty")
    }

    fn prefer(&self, cand: NodeId, best: NodeId) -> bool {
        let (c, b) = (self.node(cand), self.node(best));
        if c.qhat != b.qhat {
            return c.qhat > b.qhat;
        }
        if c.level() != b.level() {
            return c.level() > b.level();
        }
        c.a_cell.index < b.a_cell.index
    }

    pub fn record_visit(&mut self, id: NodeId) -> Result<u64> {
        let node = self.node_mut(id);
        if !node.is_leaf() {
            return Err(Error::NotALeaf(id));
        }
        node.count += 1;
        Ok(node.count)
    }

    /// `Conf` of a ball at its current count.
    pub fn conf(&self, id: NodeId) -> Result<T> {
        self.rule.conf(self.node(id).count)
    }

    /// Whether `id` is a leaf that has reached its splitting threshold and may still be refined.
    pub fn wants_split(&self, id: NodeId) -> Result<bool> {
        let node = self.node(id);
        if !node.is_leaf() {
            return Ok(false);
        }
        let conf = self.conf(id)?;
        Ok(node.level() < self.max_depth && should_split(conf, node.diameter()))
    }

    /// Replaces the leaf `id` by its `2^d` children, each inheriting the count, the
    /// estimate and the reward average; transition estimates are refined onto the
    /// children's level.
    pub fn split(&mut self, id: NodeId) -> Result<Range<u32>> {
        let parent = self.node(id).clone();
        if !parent.is_leaf() {
            return Err(Error::NotALeaf(id));
        }
        let s_kids = cell_children(&parent.s_cell, self.max_depth)?;
        let a_kids = cell_children(&parent.a_cell, self.max_depth)?;
        let child_model = parent.model.as_ref().map(|m| ModelStats {
            rbar: m.rbar,
            tbar: split_transition(&m.tbar),
        });
        let first = NodeId(self.nodes.len() as u32);
        for s in &s_kids {
            for a in &a_kids {
                self.nodes.push(BallNode {
                    s_cell: s.clone(),
                    a_cell: a.clone(),
                    count: parent.count,
                    qhat: parent.qhat,
                    parent: Some(id),
                    model: child_model.clone(),
                    first_child: None,
                });
            }
        }
        self.node_mut(id).first_child = Some(first);
        self.leaves += s_kids.len() * a_kids.len() - 1;
        Ok(first.0..self.nodes.len() as u32)
    }

    /// Splits `id` if [`Self::wants_split`]; returns whether it did.
    pub fn maybe_split(&mut self, id: NodeId) -> Result<bool> {
        if self.wants_split(id)? {
            self.split(id)?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Splits every leaf until all leaves sit at `depth`.
    pub fn refine_uniform(&mut self, depth: u32) -> Result<()> {
        loop {
            let shallow: Vec<_> = self
                .leaves()
                .filter(|&id| self.node(id).level() < depth)
                .collect();
            if shallow.is_empty() {
                return Ok(());
            }
            for id in shallow {
                self.split(id)?;
            }
        }
    }

    /// The finest state cells among the leaves' projections: a leaf's state cell is
    /// kept iff no other leaf has a strictly smaller state cell inside it. The result
    /// is sorted, disjoint and covers `S`.
    pub fn induced_state_partition(&self) -> Vec<DyadicCell> {
        let cells: BTreeSet<DyadicCell> = self
            .leaves()
            .map(|id| self.node(id).s_cell.clone())
            .collect();
        let mut coarse = BTreeSet::new();
        for c in &cells {
            let mut cur = c.parent();
            while let Some(p) = cur {
                if !coarse.insert(p.clone()) {
                    break;
                }
                cur = p.parent();
            }
        }
        cells.into_iter().filter(|c| !coarse.contains(c)).collect()
    }

    pub fn dump(&self) -> Vec<LeafRecord> {
        self.leaves()
            .map(|id| {
                let n = self.node(id);
                LeafRecord {
                    h: self.step,
                    level: n.level(),
                    s_cell_index: n.s_cell.index.clone(),
                    a_cell_index: n.a_cell.index.clone(),
                    n: n.count,
                    qhat: n.qhat.as_f64(),
                }
            })
            .collect()
    }
}
