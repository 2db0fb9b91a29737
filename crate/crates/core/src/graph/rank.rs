use std::collections::BTreeMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::{CallGraph, FunctionId, GraphNode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankParams<T> {
    pub damping: T,
    pub tol: T,
    pub max_iter: usize,
    pub decay: T,
}

impl<T: Scalar> Default for RankParams<T> {
    fn default() -> Self {
        Self {
            damping: T::of(0.85),
            tol: T::of(1e-8),
            max_iter: 200,
            decay: T::of(0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRank<T> {
    pub scores: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration where rank flows from caller to callee along `edges`.
/// Duplicate edges count once; the mass of nodes without callees is spread uniformly.
pub fn pagerank_indexed<T: Scalar>(n: usize, edges: &[(usize, usize)], damping: T, tol: T, max_iter: usize) -> PageRank<T> {
    if n == 0 {
        return PageRank {
            scores: Vec::new(),
            iterations: 0,
            converged: true,
        };
    }
    let mut edges = edges.to_vec();
    edges.sort_unstable();
    edges.dedup();
    let mut out_deg = vec![0usize; n];
    for &(a, _) in &edges {
        out_deg[a] += 1;
    }
    let nf = T::of_count(n);
    let mut r = vec![T::one() / nf; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let dangling: T = (0..n).filter(|&i| out_deg[i] == 0).map(|i| r[i]).sum();
        let base = (T::one() - damping) / nf + damping * dangling / nf;
        let mut next = vec![base; n];
        for &(a, b) in &edges {
            next[b] += damping * r[a] / T::of_count(out_deg[a]);
        }
        let delta: T = next.iter().zip(&r).map(|(x, y)| (*x - *y).abs()).sum();
        r = next;
        if delta < tol {
            converged = true;
            break;
        }
    }
    PageRank {
        scores: r,
        iterations,
        converged,
    }
}

/// Backward propagation with decay over `children` (caller -> callees).
///
/// Returns `(tmp, out)` with `out = pr + tmp`. A node without callees keeps
/// its own rank as `tmp`; otherwise `tmp` is the decayed sum of its callees'
/// `tmp`. Strongly connected components act as single nodes: a component
/// with no outside callees gets the sum of its members' rank, and the
/// component's `tmp` is shared equally by its members while callers see the
/// component total.
pub fn propagate_indexed<T: Scalar>(children: &[Vec<usize>], pr: &[T], decay: T) -> (Vec<T>, Vec<T>) {
    let n = children.len();
    let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
    let idx: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for (a, cs) in children.iter().enumerate() {
        for &b in cs {
            g.add_edge(idx[a], idx[b], ());
        }
    }
    // components come out callees-first
    let sccs = tarjan_scc(&g);
    let mut comp = vec![usize::MAX; n];
    for (k, members) in sccs.iter().enumerate() {
        for m in members {
            comp[m.index()] = k;
        }
    }
    let mut total = vec![T::zero(); sccs.len()];
    let mut tmp = vec![T::zero(); n];
    for (k, members) in sccs.iter().enumerate() {
        let mut outside: Vec<usize> = members
            .iter()
            .flat_map(|m| children[m.index()].iter().map(|&c| comp[c]))
            .filter(|&c| c != k)
            .collect();
        outside.sort_unstable();
        outside.dedup();
        total[k] = if outside.is_empty() {
            members.iter().map(|m| pr[m.index()]).sum()
        } else {
            outside.iter().map(|&c| decay * total[c]).sum()
        };
        let share = total[k] / T::of_count(members.len());
        for m in members {
            tmp[m.index()] = share;
        }
    }
    let out = pr.iter().zip(&tmp).map(|(p, t)| *p + *t).collect();
    (tmp, out)
}

/// Rank, propagated and combined scores per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactScores<T> {
    pub pr: BTreeMap<GraphNode, T>,
    pub tmp: BTreeMap<GraphNode, T>,
    pub out: BTreeMap<GraphNode, T>,
    pub converged: bool,
}

impl<T: Scalar> ImpactScores<T> {
    /// Raw inter-function impact; 0 for functions absent from the graph.
    pub fn inter_impact(&self, id: &FunctionId) -> T {
        self.out
            .get(&GraphNode::Function(id.clone()))
            .copied()
            .unwrap_or_else(T::zero)
    }
}

struct Indexed {
    nodes: Vec<GraphNode>,
    edges: Vec<(usize, usize)>,
}

fn index(graph: &CallGraph) -> Indexed {
    let nodes: Vec<GraphNode> = graph.nodes().into_iter().collect();
    let pos: BTreeMap<&GraphNode, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let edges = graph.edges().iter().map(|(a, b)| (pos[a], pos[b])).collect();
    Indexed { nodes, edges }
}

pub fn pagerank<T: Scalar>(graph: &CallGraph, damping: T, tol: T, max_iter: usize) -> (BTreeMap<GraphNode, T>, bool) {
    let ix = index(graph);
    let r = pagerank_indexed(ix.nodes.len(), &ix.edges, damping, tol, max_iter);
    if !r.converged {
        log::warn!("pagerank did not converge within {max_iter} iterations; using the last iterate");
    }
    (ix.nodes.into_iter().zip(r.scores).collect(), r.converged)
}

pub fn backward_propagate<T: Scalar>(graph: &CallGraph, map_pr: &BTreeMap<GraphNode, T>, decay: T) -> ImpactScores<T> {
    let ix = index(graph);
    let mut children = vec![Vec::new(); ix.nodes.len()];
    for &(a, b) in &ix.edges {
        children[a].push(b);
    }
    let pr: Vec<T> = ix.nodes.iter().map(|n| map_pr.get(n).copied().unwrap_or_else(T::zero)).collect();
    let (tmp, out) = propagate_indexed(&children, &pr, decay);
    let zip = |v: Vec<T>| ix.nodes.iter().cloned().zip(v).collect();
    ImpactScores {
        pr: zip(pr),
        tmp: zip(tmp),
        out: zip(out),
        converged: true,
    }
}

/// PageRank followed by backward propagation.
pub fn impact_scores<T: Scalar>(graph: &CallGraph, params: &RankParams<T>) -> ImpactScores<T> {
    let (pr, converged) = pagerank(graph, params.damping, params.tol, params.max_iter);
    let mut s = backward_propagate(graph, &pr, params.decay);
    s.converged = converged;
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pagerank_trivial_cases() {
        let r = pagerank_indexed::<f64>(1, &[], 0.85, 1e-8, 200);
        assert!((r.scores[0] - 1.0).abs() < 1e-12);
        let r = pagerank_indexed::<f64>(2, &[(0, 1), (1, 0)], 0.85, 1e-8, 200);
        assert!((r.scores[0] - 0.5).abs() < 1e-12 && (r.scores[1] - 0.5).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn callees_accrue_rank() {
        let r = pagerank_indexed::<f64>(4, &[(0, 3), (1, 3), (2, 3)], 0.85, 1e-10, 500);
        assert!(r.scores[3] > r.scores[0]);
        assert!((r.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = pagerank_indexed::<f64>(3, &[(0, 1), (1, 2)], 0.85, 0.0, 3);
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn propagation_on_a_chain() {
        let (a, b, c) = (0.2, 0.3, 0.5);
        let (tmp, out) = propagate_indexed(&[vec![1], vec![2], vec![]], &[a, b, c], 0.5);
        assert_eq!(out[2], 2.0 * c);
        assert_eq!(out[1], b + 0.5 * c);
        assert_eq!(out[0], a + 0.25 * c);
        assert_eq!(tmp[2], c);
    }

    #[test]
    fn single_node_leaf_rule() {
        let (tmp, out) = propagate_indexed(&[vec![]], &[1.0f32], 0.5);
        assert_eq!((tmp[0], out[0]), (1.0, 2.0));
    }

    #[test]
    fn cycle_splits_leaf_mass() {
        // X <-> Y, both call L
        let l = 0.4;
        let (tmp, out) = propagate_indexed(&[vec![1, 2], vec![0, 2], vec![]], &[0.3, 0.3, l], 0.5);
        assert_eq!(tmp[0], 0.5 * l / 2.0);
        assert_eq!(tmp[1], tmp[0]);
        assert_eq!(out[0], 0.3 + tmp[0]);
    }

    #[test]
    fn zero_decay_keeps_only_leaf_rank() {
        let (tmp, _) = propagate_indexed(&[vec![1], vec![]], &[0.6, 0.4], 0.0);
        assert_eq!(tmp, vec![0.0, 0.4]);
    }
}
