//! Two-phase tree matching: greedy top-down isomorphic subtrees, then
//! bottom-up container matching with last-chance recovery among children.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashSet};
use std::hash::{Hash, Hasher};

use crate::syntax::{NodeId, SyntaxTree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatcherParams {
    pub min_height: u32,
    pub similarity_threshold: f64,
}

impl Default for MatcherParams {
    fn default() -> Self {
        Self {
            min_height: 2,
            similarity_threshold: 0.5,
        }
    }
}

/// Partial one-to-one mapping between before-tree and after-tree nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMapping {
    to_after: Vec<Option<NodeId>>,
    to_before: Vec<Option<NodeId>>,
}

impl NodeMapping {
    pub fn new(before_len: usize, after_len: usize) -> Self {
        Self {
            to_after: vec![None; before_len],
            to_before: vec![None; after_len],
        }
    }

    pub fn link(&mut self, before: NodeId, after: NodeId) {
        debug_assert!(self.to_after[before].is_none() && self.to_before[after].is_none());
        self.to_after[before] = Some(after);
        self.to_before[after] = Some(before);
    }

    pub fn after_of(&self, before: NodeId) -> Option<NodeId> {
        self.to_after.get(before).copied().flatten()
    }

    pub fn before_of(&self, after: NodeId) -> Option<NodeId> {
        self.to_before.get(after).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.to_after.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mapped `(before, after)` pairs in before-preorder.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.to_after
            .iter()
            .enumerate()
            .filter_map(|(b, a)| a.map(|a| (b, a)))
    }
}

pub fn map_trees(before: &SyntaxTree, after: &SyntaxTree) -> NodeMapping {
    map_trees_with(before, after, &MatcherParams::default())
}

pub fn map_trees_with(before: &SyntaxTree, after: &SyntaxTree, params: &MatcherParams) -> NodeMapping {
    let mut m = Matcher {
        t1: before,
        t2: after,
        h1: subtree_hashes(before),
        h2: subtree_hashes(after),
        map: NodeMapping::new(before.len(), after.len()),
        params: *params,
    };
    if before.is_empty() || after.is_empty() {
        return m.map;
    }
    m.top_down();
    m.bottom_up();
    m.map
}

fn subtree_hashes(tree: &SyntaxTree) -> Vec<u64> {
    let mut out = vec![0u64; tree.len()];
    for id in (0..tree.len()).rev() {
        let node = tree.node(id);
        let mut h = DefaultHasher::new();
        node.kind.hash(&mut h);
        node.label.hash(&mut h);
        for &c in &node.children {
            out[c].hash(&mut h);
        }
        out[id] = h.finish();
    }
    out
}

struct Matcher<'a> {
    t1: &'a SyntaxTree,
    t2: &'a SyntaxTree,
    h1: Vec<u64>,
    h2: Vec<u64>,
    map: NodeMapping,
    params: MatcherParams,
}

fn height(t: &SyntaxTree, id: NodeId) -> u32 {
    t.node(id).depth
}

fn peek_max(t: &SyntaxTree, list: &[NodeId]) -> u32 {
    list.iter().map(|&n| height(t, n)).max().unwrap_or(0)
}

fn pop_max(t: &SyntaxTree, list: &mut Vec<NodeId>, h: u32) -> Vec<NodeId> {
    let (popped, rest): (Vec<_>, Vec<_>) = list.iter().partition(|&&n| height(t, n) == h);
    *list = rest;
    popped
}

fn open(t: &SyntaxTree, list: &mut Vec<NodeId>, id: NodeId) {
    list.extend(t.node(id).children.iter().copied());
}

impl Matcher<'_> {
    fn iso(&self, a: NodeId, b: NodeId) -> bool {
        self.h1[a] == self.h2[b] && self.t1.isomorphic(a, self.t2, b)
    }

    /// Map two isomorphic subtrees node by node; their preorder layouts coincide.
    fn link_subtrees(&mut self, a: NodeId, b: NodeId) {
        let n = self.t1.node(a).size as usize;
        for k in 0..n {
            self.map.link(a + k, b + k);
        }
    }

    fn dice(&self, a: Option<NodeId>, b: Option<NodeId>) -> f64 {
        let (Some(a), Some(b)) = (a, b) else { return 0.0 };
        let d1 = self.t1.descendants(a);
        let d2 = self.t2.descendants(b);
        let total = d1.len() + d2.len();
        if total == 0 {
            return 0.0;
        }
        let common = d1
            .filter(|&d| self.map.after_of(d).is_some_and(|x| d2.contains(&x)))
            .count();
        2.0 * common as f64 / total as f64
    }

    fn top_down(&mut self) {
        let (t1, t2) = (self.t1, self.t2);
        let mut l1 = vec![SyntaxTree::ROOT];
        let mut l2 = vec![SyntaxTree::ROOT];
        let mut candidates: Vec<(NodeId, NodeId)> = Vec::new();
        loop {
            let (p1, p2) = (peek_max(t1, &l1), peek_max(t2, &l2));
            if p1.min(p2) < self.params.min_height {
                break;
            }
            if p1 != p2 {
                if p1 > p2 {
                    for n in pop_max(t1, &mut l1, p1) {
                        open(t1, &mut l1, n);
                    }
                } else {
                    for n in pop_max(t2, &mut l2, p2) {
                        open(t2, &mut l2, n);
                    }
                }
                continue;
            }
            let hs1 = pop_max(t1, &mut l1, p1);
            let hs2 = pop_max(t2, &mut l2, p2);
            let mut buckets: BTreeMap<u64, (Vec<NodeId>, Vec<NodeId>)> = BTreeMap::new();
            for &a in &hs1 {
                buckets.entry(self.h1[a]).or_default().0.push(a);
            }
            for &b in &hs2 {
                buckets.entry(self.h2[b]).or_default().1.push(b);
            }
            let mut kept1 = HashSet::new();
            let mut kept2 = HashSet::new();
            for (xs, ys) in buckets.values() {
                let pairs: Vec<_> = xs
                    .iter()
                    .flat_map(|&a| ys.iter().map(move |&b| (a, b)))
                    .filter(|&(a, b)| self.iso(a, b))
                    .collect();
                if pairs.len() == 1 && xs.len() == 1 && ys.len() == 1 {
                    let (a, b) = pairs[0];
                    self.link_subtrees(a, b);
                } else {
                    candidates.extend(pairs.iter().copied());
                }
                for &(a, b) in &pairs {
                    kept1.insert(a);
                    kept2.insert(b);
                }
            }
            for a in hs1 {
                if !kept1.contains(&a) {
                    open(t1, &mut l1, a);
                }
            }
            for b in hs2 {
                if !kept2.contains(&b) {
                    open(t2, &mut l2, b);
                }
            }
        }
        // ambiguous candidates: prefer pairs whose parents are most alike
        let mut scored: Vec<_> = candidates
            .into_iter()
            .map(|(a, b)| (self.dice(t1.node(a).parent, t2.node(b).parent), a, b))
            .collect();
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        for (_, a, b) in scored {
            if self.map.after_of(a).is_none() && self.map.before_of(b).is_none() {
                self.link_subtrees(a, b);
            }
        }
    }

    fn bottom_up(&mut self) {
        let (t1, t2) = (self.t1, self.t2);
        for a in t1.postorder(SyntaxTree::ROOT) {
            if a == SyntaxTree::ROOT {
                break;
            }
            if self.map.after_of(a).is_some() || t1.is_leaf(a) {
                continue;
            }
            let mut seen = HashSet::new();
            let mut cands = Vec::new();
            for d in t1.descendants(a) {
                let Some(p) = self.map.after_of(d) else { continue };
                for anc in t2.ancestors(p) {
                    if !seen.insert(anc) {
                        break;
                    }
                    if self.map.before_of(anc).is_none() && t2.node(anc).kind == t1.node(a).kind {
                        cands.push(anc);
                    }
                }
            }
            cands.sort_unstable();
            let mut best: Option<(f64, NodeId)> = None;
            for b in cands {
                let s = self.dice(Some(a), Some(b));
                if best.is_none_or(|(bs, _)| s > bs) {
                    best = Some((s, b));
                }
            }
            if let Some((s, b)) = best {
                if s > self.params.similarity_threshold {
                    self.map.link(a, b);
                    self.recover(a, b);
                }
            }
        }
        let (r1, r2) = (SyntaxTree::ROOT, SyntaxTree::ROOT);
        if t1.node(r1).kind == t2.node(r2).kind {
            if self.map.after_of(r1).is_none() && self.map.before_of(r2).is_none() {
                self.map.link(r1, r2);
            }
            if self.map.after_of(r1) == Some(r2) {
                self.recover(r1, r2);
            }
        }
    }

    /// Last-chance matching among the unmatched children of a matched pair.
    fn recover(&mut self, a: NodeId, b: NodeId) {
        let (t1, t2) = (self.t1, self.t2);
        let kids1 = t1.node(a).children.clone();
        let kids2 = t2.node(b).children.clone();
        let free1 = |m: &NodeMapping, c: NodeId| m.after_of(c).is_none();
        let free2 = |m: &NodeMapping, c: NodeId| m.before_of(c).is_none();

        for &c1 in &kids1 {
            if !free1(&self.map, c1) || !t1.descendants(c1).all(|d| free1(&self.map, d)) {
                continue;
            }
            if let Some(&c2) = kids2.iter().find(|&&c2| {
                free2(&self.map, c2) && t2.descendants(c2).all(|d| free2(&self.map, d)) && self.iso(c1, c2)
            }) {
                self.link_subtrees(c1, c2);
            }
        }

        let mut recurse = Vec::new();
        for same_label in [true, false] {
            for &c1 in &kids1 {
                if !free1(&self.map, c1) {
                    continue;
                }
                let n1 = t1.node(c1);
                if let Some(&c2) = kids2.iter().find(|&&c2| {
                    let n2 = t2.node(c2);
                    free2(&self.map, c2) && n2.kind == n1.kind && (!same_label || n2.label == n1.label)
                }) {
                    self.map.link(c1, c2);
                    recurse.push((c1, c2));
                }
            }
        }
        for (c1, c2) in recurse {
            self.recover(c1, c2);
        }
    }
}
