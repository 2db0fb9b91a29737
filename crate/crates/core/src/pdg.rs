//! Statement-level program dependence graphs and change impact.
//!
//! Nodes are simple statements plus the headers of compound statements
//! (branch conditions, loop headers, switch selectors, catch clauses, ...).
//! Data dependences come from reaching definitions over variable names, with
//! every definition inside a loop reaching every use inside the same loop.
//! Control dependences follow syntactic nesting: a statement depends on the
//! innermost enclosing branch, loop, switch or catch header.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::diff::{EditAction, NodeMapping};
use crate::scalar::Scalar;
use crate::syntax::{squash, Construct, FunctionUnit, NodeId, Role, Span, SyntaxTree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdgNode {
    /// Statement (or compound statement, for headers) in the syntax tree.
    pub syntax: Option<NodeId>,
    /// Full extent of the statement.
    pub span: Span,
    /// Extent owned by this node alone: the whole statement, or just the header.
    pub own: Span,
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
    pub predicate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FunctionPDG {
    pub nodes: Vec<PdgNode>,
    pub ddg_edges: BTreeSet<(usize, usize)>,
    pub cdg_edges: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactRange<T> {
    pub ddg_impact: T,
    pub cdg_impact: T,
    pub ir: T,
}

impl<T: Scalar> ImpactRange<T> {
    pub fn new(ddg_impact: T, cdg_impact: T) -> Self {
        Self {
            ddg_impact,
            cdg_impact,
            ir: impact_range(ddg_impact, cdg_impact),
        }
    }

    /// The range of a change with no prior context.
    pub fn none() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

/// `1 + sqrt(ddg) + sqrt(cdg)`.
pub fn impact_range<T: Scalar>(ddg_impact: T, cdg_impact: T) -> T {
    T::one() + ddg_impact.sqrt() + cdg_impact.sqrt()
}

impl FunctionPDG {
    /// A graph over `n` anonymous nodes with the given edges.
    pub fn from_edges(n: usize, ddg: &[(usize, usize)], cdg: &[(usize, usize)]) -> Self {
        let node = PdgNode {
            syntax: None,
            span: Span::default(),
            own: Span::default(),
            defs: BTreeSet::new(),
            uses: BTreeSet::new(),
            predicate: false,
        };
        assert!(ddg.iter().chain(cdg).all(|&(a, b)| a < n && b < n), "edge endpoint out of range");
        Self {
            nodes: vec![node; n],
            ddg_edges: ddg.iter().copied().collect(),
            cdg_edges: cdg.iter().copied().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cdg_successors(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.cdg_edges.range((n, 0)..(n + 1, 0)).map(|&(_, b)| b)
    }

    fn node_for_syntax(&self, id: NodeId) -> Option<usize> {
        self.nodes.iter().position(|n| n.syntax == Some(id))
    }
}

enum Flow {
    Stmt(usize),
    Seq(Vec<Flow>),
    Branch { pred: usize, arms: Vec<Flow>, exhaustive: bool },
    Loop { header: Option<usize>, body: Box<Flow> },
    Try { body: Box<Flow>, catches: Vec<(usize, Flow)>, finally: Option<Box<Flow>> },
}

struct Builder<'a> {
    tree: &'a SyntaxTree,
    pdg: FunctionPDG,
}

pub fn build_pdg(tree: &SyntaxTree, function: &FunctionUnit) -> FunctionPDG {
    let mut b = Builder {
        tree,
        pdg: FunctionPDG::default(),
    };
    let Some(body) = function.body else {
        return b.pdg;
    };
    let flow = if tree.node(body).construct == Construct::Block {
        b.block(body, None)
    } else {
        // expression-bodied lambda
        let n = b.add_simple(body, None);
        Flow::Stmt(n)
    };
    let mut state = Defs::new();
    b.reach(&flow, &mut state);
    b.pdg
}

type Defs = BTreeMap<String, BTreeSet<usize>>;

impl Builder<'_> {
    fn push(&mut self, node: PdgNode, control: Option<usize>) -> usize {
        let id = self.pdg.nodes.len();
        self.pdg.nodes.push(node);
        if let Some(c) = control {
            self.pdg.cdg_edges.insert((c, id));
        }
        id
    }

    fn add_simple(&mut self, stmt: NodeId, control: Option<usize>) -> usize {
        let span = self.tree.node(stmt).span;
        let (defs, uses) = self.defs_uses(&[stmt]);
        self.push(
            PdgNode {
                syntax: Some(stmt),
                span,
                own: span,
                defs,
                uses,
                predicate: false,
            },
            control,
        )
    }

    /// Header node of a compound statement: everything except the given body parts.
    fn add_header(&mut self, stmt: NodeId, parts: &[NodeId], own: Span, control: Option<usize>) -> usize {
        let (defs, uses) = self.defs_uses(parts);
        self.push(
            PdgNode {
                syntax: Some(stmt),
                span: self.tree.node(stmt).span,
                own,
                defs,
                uses,
                predicate: true,
            },
            control,
        )
    }

    fn block(&mut self, block: NodeId, control: Option<usize>) -> Flow {
        let kids = self.tree.node(block).children.clone();
        Flow::Seq(kids.into_iter().filter_map(|c| self.statement(c, control)).collect())
    }

    fn statement(&mut self, id: NodeId, control: Option<usize>) -> Option<Flow> {
        let t = self.tree;
        let node = t.node(id);
        let span = node.span;
        let body = t.child_with_role(id, Role::Body);
        let header_to = |end: usize| Span::new(span.start, end);
        Some(match node.construct {
            Construct::Statement => Flow::Stmt(self.add_simple(id, control)),
            Construct::Block => self.block(id, control),
            Construct::Labeled => {
                let inner: Vec<_> = node.children.iter().copied().filter(|&c| t.node(c).construct.is_statement_like()).collect();
                Flow::Seq(inner.into_iter().filter_map(|c| self.statement(c, control)).collect())
            }
            Construct::Branch => {
                let cond = t.child_with_role(id, Role::Condition)?;
                let p = self.add_header(id, &[cond], header_to(t.node(cond).span.end), control);
                let mut arms = Vec::new();
                for role in [Role::Body, Role::Alternative] {
                    if let Some(arm) = t.child_with_role(id, role) {
                        arms.extend(self.statement(arm, Some(p)));
                    }
                }
                let exhaustive = arms.len() == 2;
                Flow::Branch { pred: p, arms, exhaustive }
            }
            Construct::Loop => {
                let body = body?;
                let parts: Vec<_> = node.children.iter().copied().filter(|&c| c != body).collect();
                let own = if node.kind == "do_statement" {
                    Span::new(t.node(body).span.end, span.end)
                } else {
                    header_to(t.node(body).span.start)
                };
                let h = self.add_header(id, &parts, own, control);
                let inner = self.statement(body, Some(h)).unwrap_or(Flow::Seq(Vec::new()));
                Flow::Loop {
                    header: Some(h),
                    body: Box::new(Flow::Seq(vec![Flow::Stmt(h), inner])),
                }
            }
            Construct::Switch => {
                let cond = t.child_with_role(id, Role::Condition)?;
                let block = body?;
                let p = self.add_header(id, &[cond], header_to(t.node(block).span.start), control);
                let groups = t.node(block).children.clone();
                let mut arms = Vec::new();
                for g in groups {
                    let stmts: Vec<_> = t
                        .node(g)
                        .children
                        .iter()
                        .copied()
                        .filter(|&c| t.node(c).construct != Construct::CaseLabel && t.node(c).kind != "switch_label")
                        .collect();
                    let mut seq = Vec::new();
                    for s in stmts {
                        if t.node(s).construct.is_statement_like() {
                            seq.extend(self.statement(s, Some(p)));
                        } else {
                            // arrow-form case with a bare expression
                            seq.push(Flow::Stmt(self.add_simple(s, Some(p))));
                        }
                    }
                    arms.push(Flow::Seq(seq));
                }
                Flow::Branch {
                    pred: p,
                    arms,
                    exhaustive: false,
                }
            }
            Construct::Try => {
                let block = body?;
                let mut seq = Vec::new();
                if let Some(res) = t.child_with_role(id, Role::Resources) {
                    let h = self.add_header(id, &[res], header_to(t.node(block).span.start), control);
                    seq.push(Flow::Stmt(h));
                }
                let main = self.statement(block, control).unwrap_or(Flow::Seq(Vec::new()));
                seq.push(main);
                let mut catches = Vec::new();
                let mut finally = None;
                for &c in &node.children {
                    match t.node(c).construct {
                        Construct::Catch => {
                            let cbody = t.child_with_role(c, Role::Body)?;
                            let parts: Vec<_> = t.node(c).children.iter().copied().filter(|&x| x != cbody).collect();
                            let own = Span::new(t.node(c).span.start, t.node(cbody).span.start);
                            let h = self.add_header(c, &parts, own, control);
                            let inner = self.statement(cbody, Some(h)).unwrap_or(Flow::Seq(Vec::new()));
                            catches.push((h, inner));
                        }
                        Construct::Finally => {
                            let fb = t.node(c).children.iter().copied().find(|&x| t.node(x).construct == Construct::Block)?;
                            finally = self.statement(fb, control).map(Box::new);
                        }
                        _ => {}
                    }
                }
                Flow::Try {
                    body: Box::new(Flow::Seq(seq)),
                    catches,
                    finally,
                }
            }
            Construct::Guarded => {
                let block = body?;
                let parts: Vec<_> = node.children.iter().copied().filter(|&c| c != block).collect();
                let h = self.add_header(id, &parts, header_to(t.node(block).span.start), control);
                let inner = self.statement(block, control).unwrap_or(Flow::Seq(Vec::new()));
                Flow::Seq(vec![Flow::Stmt(h), inner])
            }
            _ => return None,
        })
    }

    /// Variables defined and used by the given subtrees; nested functions and classes are opaque.
    fn defs_uses(&self, roots: &[NodeId]) -> (BTreeSet<String>, BTreeSet<String>) {
        let t = self.tree;
        let mut defs = BTreeSet::new();
        let mut uses = BTreeSet::new();
        let mut stack: Vec<NodeId> = roots.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            let node = t.node(n);
            match node.construct {
                Construct::Function(_) | Construct::Container => continue,
                Construct::Name => {
                    let name = node.label.clone().unwrap_or_default();
                    let parent = node.parent.map(|p| t.node(p));
                    let pc = parent.map(|p| p.construct);
                    match (node.role, pc) {
                        (Role::Name, Some(Construct::Declarator | Construct::Loop | Construct::Parameter)) => {
                            defs.insert(name);
                        }
                        (Role::Target, _) => {
                            if parent.and_then(|p| p.label.as_deref()) != Some("=") {
                                uses.insert(name.clone());
                            }
                            defs.insert(name);
                        }
                        (_, Some(Construct::Increment)) => {
                            uses.insert(name.clone());
                            defs.insert(name);
                        }
                        (Role::Name | Role::Field, _) => {}
                        _ if matches!(
                            parent.map(|p| p.kind),
                            Some("labeled_statement" | "break_statement" | "continue_statement")
                        ) => {}
                        _ => {
                            uses.insert(name);
                        }
                    }
                    continue;
                }
                Construct::FieldAccess => {
                    let text = squash(t.node_text(n));
                    if node.role == Role::Target {
                        defs.insert(text);
                    } else {
                        uses.insert(text);
                    }
                    if let Some(obj) = t.child_with_role(n, Role::Receiver) {
                        stack.push(obj);
                    }
                    continue;
                }
                Construct::ArrayAccess if node.role == Role::Target => {
                    if let Some(base) = t.child_with_role(n, Role::Receiver) {
                        defs.insert(squash(t.node_text(base)));
                    }
                }
                _ => {}
            }
            stack.extend(node.children.iter().rev().copied());
        }
        (defs, uses)
    }

    fn reach(&mut self, flow: &Flow, state: &mut Defs) {
        match flow {
            Flow::Stmt(n) => self.transfer(*n, state),
            Flow::Seq(items) => {
                for f in items {
                    self.reach(f, state);
                }
            }
            Flow::Branch { pred, arms, exhaustive } => {
                self.transfer(*pred, state);
                let entry = state.clone();
                let mut out = if *exhaustive { Defs::new() } else { entry.clone() };
                for arm in arms {
                    let mut s = entry.clone();
                    self.reach(arm, &mut s);
                    merge(&mut out, &s);
                }
                *state = out;
            }
            Flow::Loop { body, .. } => {
                let mut members = Vec::new();
                collect(body, &mut members);
                let mut loop_defs = Defs::new();
                for &m in &members {
                    for v in &self.pdg.nodes[m].defs {
                        loop_defs.entry(v.clone()).or_default().insert(m);
                    }
                }
                for &m in &members {
                    let uses = self.pdg.nodes[m].uses.clone();
                    for u in uses {
                        let sources = state.get(&u).into_iter().flatten().chain(loop_defs.get(&u).into_iter().flatten());
                        for &d in sources {
                            if d != m {
                                self.pdg.ddg_edges.insert((d, m));
                            }
                        }
                    }
                }
                merge(state, &loop_defs);
            }
            Flow::Try { body, catches, finally } => {
                let entry = state.clone();
                self.reach(body, state);
                let mut handler_entry = entry;
                let mut members = Vec::new();
                collect(body, &mut members);
                for m in members {
                    for v in &self.pdg.nodes[m].defs {
                        handler_entry.entry(v.clone()).or_default().insert(m);
                    }
                }
                let mut out = state.clone();
                for (h, inner) in catches {
                    let mut s = handler_entry.clone();
                    self.transfer(*h, &mut s);
                    self.reach(inner, &mut s);
                    merge(&mut out, &s);
                }
                *state = out;
                if let Some(f) = finally {
                    self.reach(f, state);
                }
            }
        }
    }

    fn transfer(&mut self, n: usize, state: &mut Defs) {
        let uses = self.pdg.nodes[n].uses.clone();
        for u in &uses {
            if let Some(ds) = state.get(u) {
                for &d in ds {
                    if d != n {
                        self.pdg.ddg_edges.insert((d, n));
                    }
                }
            }
        }
        for v in self.pdg.nodes[n].defs.clone() {
            state.insert(v, BTreeSet::from([n]));
        }
    }
}

fn merge(into: &mut Defs, other: &Defs) {
    for (k, v) in other {
        into.entry(k.clone()).or_default().extend(v.iter().copied());
    }
}

fn collect(flow: &Flow, out: &mut Vec<usize>) {
    match flow {
        Flow::Stmt(n) => out.push(*n),
        Flow::Seq(items) => items.iter().for_each(|f| collect(f, out)),
        Flow::Branch { pred, arms, .. } => {
            out.push(*pred);
            arms.iter().for_each(|f| collect(f, out));
        }
        Flow::Loop { header, body } => {
            if let Some(h) = header {
                if !out.contains(h) {
                    out.push(*h);
                }
            }
            collect(body, out);
        }
        Flow::Try { body, catches, finally } => {
            collect(body, out);
            for (h, f) in catches {
                out.push(*h);
                collect(f, out);
            }
            if let Some(f) = finally {
                collect(f, out);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
}

/// After-PDG nodes touched by a function's edits.
///
/// After-side spans mark the nodes whose own extent they overlap (or, failing
/// that, the innermost node containing them). Before-side spans are located in
/// the before-PDG and carried over through the node mapping; a statement that
/// no longer exists is represented by the next surviving statement, or the
/// previous one when it was last.
pub fn changed_pdg_nodes(
    pdg_before: &FunctionPDG,
    pdg_after: &FunctionPDG,
    actions: &[EditAction],
    mapping: &NodeMapping,
) -> BTreeSet<usize> {
    let mut changed = BTreeSet::new();
    let mark = |pdg: &FunctionPDG, span: Span| -> Vec<usize> {
        let hits: Vec<usize> = (0..pdg.len()).filter(|&i| pdg.nodes[i].own.overlaps(&span)).collect();
        if !hits.is_empty() || span.is_empty() {
            return hits;
        }
        (0..pdg.len())
            .filter(|&i| pdg.nodes[i].span.contains(&span))
            .min_by_key(|&i| pdg.nodes[i].span.end - pdg.nodes[i].span.start)
            .into_iter()
            .collect()
    };
    let carry = |b: usize| -> Option<usize> {
        let survivor = |i: usize| {
            pdg_before.nodes[i]
                .syntax
                .and_then(|s| mapping.after_of(s))
                .and_then(|a| pdg_after.node_for_syntax(a))
        };
        survivor(b)
            .or_else(|| (b + 1..pdg_before.len()).find_map(survivor))
            .or_else(|| (0..b).rev().find_map(survivor))
    };
    for a in actions {
        if let Some(span) = a.after_span {
            changed.extend(mark(pdg_after, span));
        }
        if let Some(span) = a.before_span {
            for b in mark(pdg_before, span) {
                changed.extend(carry(b));
            }
        }
    }
    changed
}

fn reach_from(n: usize, starts: &BTreeSet<usize>, edges: &BTreeSet<(usize, usize)>, forward: bool) -> BTreeSet<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        if forward {
            adj[a].push(b);
        } else {
            adj[b].push(a);
        }
    }
    let mut seen: BTreeSet<usize> = starts.clone();
    let mut queue: VecDeque<usize> = starts.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Share of nodes on a forward or backward data-dependence path through a changed node.
pub fn ddg_impact(pdg: &FunctionPDG, changed: &BTreeSet<usize>) -> f64 {
    if changed.is_empty() || pdg.is_empty() {
        return 0.0;
    }
    let fwd = reach_from(pdg.len(), changed, &pdg.ddg_edges, true);
    let bwd = reach_from(pdg.len(), changed, &pdg.ddg_edges, false);
    fwd.union(&bwd).count() as f64 / pdg.len() as f64
}

/// Share of nodes controlled by a changed node with more than one control successor (itself included).
pub fn cdg_impact(pdg: &FunctionPDG, changed: &BTreeSet<usize>) -> f64 {
    if pdg.is_empty() {
        return 0.0;
    }
    let qualifying: BTreeSet<usize> = changed
        .iter()
        .copied()
        .filter(|&c| pdg.cdg_successors(c).count() > 1)
        .collect();
    if qualifying.is_empty() {
        return 0.0;
    }
    reach_from(pdg.len(), &qualifying, &pdg.cdg_edges, true).len() as f64 / pdg.len() as f64
}
