//! Edit-script generation over a working copy of the before-tree.
//!
//! Both trees get a virtual root so that root insertions and deletions are
//! ordinary child edits. The after-tree is visited breadth-first; each node
//! is inserted, relabelled or moved into place, then its children are
//! aligned via a longest common subsequence. Unmapped leftovers are deleted
//! bottom-up.

use crate::syntax::{NodeId, SyntaxTree};

use super::NodeMapping;

/// One primitive edit on the working tree. Node ids index the working tree:
/// 0 is the virtual root, `b + 1` is before-node `b`, inserted nodes follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitive {
    Insert {
        node: usize,
        after: NodeId,
        kind: &'static str,
        label: Option<String>,
        parent: usize,
        pos: usize,
    },
    Update {
        node: usize,
        after: NodeId,
        label: Option<String>,
    },
    Move {
        node: usize,
        after: NodeId,
        parent: usize,
        pos: usize,
    },
    Delete {
        node: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct WorkNode {
    kind: &'static str,
    label: Option<String>,
    parent: Option<usize>,
    children: Vec<usize>,
}

/// Mutable labelled ordered tree with a virtual root at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkTree {
    nodes: Vec<WorkNode>,
}

impl WorkTree {
    pub fn from_tree(tree: &SyntaxTree) -> Self {
        let mut nodes = Vec::with_capacity(tree.len() + 1);
        nodes.push(WorkNode {
            kind: "<root>",
            label: None,
            parent: None,
            children: if tree.is_empty() { vec![] } else { vec![1] },
        });
        for n in &tree.nodes {
            nodes.push(WorkNode {
                kind: n.kind,
                label: n.label.clone(),
                parent: Some(n.parent.map_or(0, |p| p + 1)),
                children: n.children.iter().map(|c| c + 1).collect(),
            });
        }
        Self { nodes }
    }

    fn detach(&mut self, w: usize) {
        if let Some(p) = self.nodes[w].parent.take() {
            self.nodes[p].children.retain(|&c| c != w);
        }
    }

    fn attach(&mut self, w: usize, parent: usize, pos: usize) {
        let pos = pos.min(self.nodes[parent].children.len());
        self.nodes[parent].children.insert(pos, w);
        self.nodes[w].parent = Some(parent);
    }

    fn position(&self, w: usize) -> usize {
        let p = self.nodes[w].parent.expect("attached node");
        self.nodes[p].children.iter().position(|&c| c == w).expect("child of its parent")
    }

    /// Apply one primitive. Inserted nodes must be applied in id order.
    pub fn apply(&mut self, p: &Primitive) {
        match p {
            Primitive::Insert {
                node,
                kind,
                label,
                parent,
                pos,
                ..
            } => {
                assert_eq!(*node, self.nodes.len(), "inserts are applied in allocation order");
                self.nodes.push(WorkNode {
                    kind,
                    label: label.clone(),
                    parent: None,
                    children: Vec::new(),
                });
                self.attach(*node, *parent, *pos);
            }
            Primitive::Update { node, label, .. } => self.nodes[*node].label = label.clone(),
            Primitive::Move { node, parent, pos, .. } => {
                self.detach(*node);
                self.attach(*node, *parent, *pos);
            }
            Primitive::Delete { node } => {
                assert!(self.nodes[*node].children.is_empty(), "only leaves are deleted");
                self.detach(*node);
            }
        }
    }

    /// Whether the tree under the virtual root equals `tree` in shape, kinds and labels.
    pub fn isomorphic_to(&self, tree: &SyntaxTree) -> bool {
        let roots = &self.nodes[0].children;
        if tree.is_empty() {
            return roots.is_empty();
        }
        roots.len() == 1 && self.iso(roots[0], tree, SyntaxTree::ROOT)
    }

    fn iso(&self, w: usize, tree: &SyntaxTree, n: NodeId) -> bool {
        let (x, y) = (&self.nodes[w], tree.node(n));
        x.kind == y.kind
            && x.label == y.label
            && x.children.len() == y.children.len()
            && x.children.iter().zip(&y.children).all(|(&c, &d)| self.iso(c, tree, d))
    }
}

/// Replay primitives on a fresh copy of `before`.
pub fn replay(before: &SyntaxTree, script: &[Primitive]) -> WorkTree {
    let mut w = WorkTree::from_tree(before);
    for p in script {
        w.apply(p);
    }
    w
}

struct Generator<'a> {
    after: &'a SyntaxTree,
    work: WorkTree,
    /// work id -> after id (+1, 0 for the virtual root)
    w2a: Vec<Option<usize>>,
    a2w: Vec<Option<usize>>,
    w_in_order: Vec<bool>,
    a_in_order: Vec<bool>,
    out: Vec<Primitive>,
}

pub(crate) fn generate(before: &SyntaxTree, after: &SyntaxTree, mapping: &NodeMapping) -> Vec<Primitive> {
    let work = WorkTree::from_tree(before);
    let mut w2a = vec![None; work.nodes.len()];
    let mut a2w = vec![None; after.len() + 1];
    w2a[0] = Some(0);
    a2w[0] = Some(0);
    for (b, a) in mapping.pairs() {
        w2a[b + 1] = Some(a + 1);
        a2w[a + 1] = Some(b + 1);
    }
    let mut g = Generator {
        after,
        w_in_order: vec![false; work.nodes.len()],
        a_in_order: vec![false; after.len() + 1],
        work,
        w2a,
        a2w,
        out: Vec::new(),
    };
    g.run();
    g.out
}

impl Generator<'_> {
    fn a_parent(&self, a: usize) -> usize {
        self.after.node(a - 1).parent.map_or(0, |p| p + 1)
    }

    fn a_children(&self, a: usize) -> Vec<usize> {
        if a == 0 {
            if self.after.is_empty() {
                vec![]
            } else {
                vec![1]
            }
        } else {
            self.after.node(a - 1).children.iter().map(|c| c + 1).collect()
        }
    }

    fn run(&mut self) {
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(a) = queue.pop_front() {
            queue.extend(self.a_children(a));
            if a == 0 {
                self.align(0, 0);
            } else {
                self.visit(a);
            }
        }
        // deletions, children before parents
        let mut order = Vec::new();
        let mut stack = vec![(0usize, false)];
        while let Some((w, done)) = stack.pop() {
            if done {
                order.push(w);
            } else {
                stack.push((w, true));
                for &c in self.work.nodes[w].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        for w in order {
            if self.w2a[w].is_none() {
                let p = Primitive::Delete { node: w };
                self.work.apply(&p);
                self.out.push(p);
            }
        }
    }

    fn visit(&mut self, a: usize) {
        let z = self.a2w[self.a_parent(a)].expect("parent visited first");
        let node = self.after.node(a - 1);
        let w = match self.a2w[a] {
            None => {
                let k = self.find_pos(a);
                let w = self.work.nodes.len();
                let p = Primitive::Insert {
                    node: w,
                    after: a - 1,
                    kind: node.kind,
                    label: node.label.clone(),
                    parent: z,
                    pos: k,
                };
                self.work.apply(&p);
                self.out.push(p);
                self.w2a.push(Some(a));
                self.w_in_order.push(false);
                self.a2w[a] = Some(w);
                w
            }
            Some(w) => {
                if self.work.nodes[w].label != node.label {
                    let p = Primitive::Update {
                        node: w,
                        after: a - 1,
                        label: node.label.clone(),
                    };
                    self.work.apply(&p);
                    self.out.push(p);
                }
                if self.work.nodes[w].parent != Some(z) {
                    self.work.detach(w);
                    let k = self.find_pos(a);
                    let p = Primitive::Move {
                        node: w,
                        after: a - 1,
                        parent: z,
                        pos: k,
                    };
                    self.work.attach(w, z, k);
                    self.out.push(p);
                }
                w
            }
        };
        self.w_in_order[w] = true;
        self.a_in_order[a] = true;
        self.align(w, a);
    }

    fn align(&mut self, w: usize, a: usize) {
        let wc = self.work.nodes[w].children.clone();
        let ac = self.a_children(a);
        for &c in &wc {
            self.w_in_order[c] = false;
        }
        for &c in &ac {
            self.a_in_order[c] = false;
        }
        let s1: Vec<usize> = wc
            .iter()
            .copied()
            .filter(|&c| self.w2a[c].is_some_and(|p| p != 0 && self.a_parent(p) == a))
            .collect();
        let s2: Vec<usize> = ac
            .iter()
            .copied()
            .filter(|&c| self.a2w[c].is_some_and(|q| self.work.nodes[q].parent == Some(w)))
            .collect();
        for (x, y) in lcs(&s1, &s2, |x, y| self.w2a[x] == Some(y)) {
            self.w_in_order[x] = true;
            self.a_in_order[y] = true;
        }
        for &y in &s2 {
            if self.a_in_order[y] {
                continue;
            }
            let x = self.a2w[y].expect("mapped");
            self.work.detach(x);
            let k = self.find_pos(y);
            self.work.attach(x, w, k);
            self.out.push(Primitive::Move {
                node: x,
                after: y - 1,
                parent: w,
                pos: k,
            });
            self.w_in_order[x] = true;
            self.a_in_order[y] = true;
        }
    }

    /// Target index in the working parent for after-node `a`: just right of the
    /// partner of its rightmost in-order left sibling.
    fn find_pos(&self, a: usize) -> usize {
        let sibs = self.a_children(self.a_parent(a));
        let mut v = None;
        for &c in &sibs {
            if c == a {
                break;
            }
            if self.a_in_order[c] {
                v = Some(c);
            }
        }
        match v {
            None => 0,
            Some(v) => {
                let u = self.a2w[v].expect("in-order nodes are mapped");
                self.work.position(u) + 1
            }
        }
    }
}

fn lcs(xs: &[usize], ys: &[usize], eq: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let (n, m) = (xs.len(), ys.len());
    let mut t = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            t[i][j] = if eq(xs[i], ys[j]) {
                t[i + 1][j + 1] + 1
            } else {
                t[i + 1][j].max(t[i][j + 1])
            };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < n && j < m {
        if eq(xs[i], ys[j]) {
            out.push((xs[i], ys[j]));
            i += 1;
            j += 1;
        } else if t[i + 1][j] >= t[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}
