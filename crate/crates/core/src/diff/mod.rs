//! Tree differencing and weighted edit size.
//!
//! [`map_trees`] matches nodes, [`edit_script`] turns the mapping into
//! primitive edits plus scoring-level [`EditAction`]s, [`group_by_function`]
//! partitions actions by the function they touch, and [`delta_ast`] sums
//! `weight(kind) * subtree_depth * name_factor` over a changeset.

mod matcher;
mod script;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::syntax::{inside_log_statement, Blacklist, Construct, FunctionUnit, NodeCategory, NodeId, Span, SyntaxTree};

pub use matcher::{map_trees, map_trees_with, MatcherParams, NodeMapping};
pub use script::{replay, Primitive, WorkTree};

/// Changeset name for edits outside every function.
pub const FILE_SCOPE: &str = "<file-scope>";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaWeights<T> {
    pub add: T,
    pub update: T,
    #[serde(rename = "move")]
    pub move_: T,
    pub delete: T,
    pub name_only_factor: T,
}

impl<T: Scalar> Default for DeltaWeights<T> {
    fn default() -> Self {
        Self {
            add: T::of(1.0),
            update: T::of(1.0),
            move_: T::of(0.1),
            delete: T::of(0.01),
            name_only_factor: T::of(0.01),
        }
    }
}

impl<T: Scalar> DeltaWeights<T> {
    pub fn weight(&self, kind: EditKind) -> T {
        match kind {
            EditKind::Insert => self.add,
            EditKind::Update => self.update,
            EditKind::Move => self.move_,
            EditKind::Delete => self.delete,
        }
    }

    /// Every kind weight multiplied by `c`; the name factor is unchanged.
    pub fn scaled(&self, c: T) -> Self {
        Self {
            add: self.add * c,
            update: self.update * c,
            move_: self.move_ * c,
            delete: self.delete * c,
            name_only_factor: self.name_only_factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditKind {
    Insert,
    Update,
    Delete,
    Move,
}

/// One scored edit: the root of a changed subtree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditAction {
    pub kind: EditKind,
    /// Subtree root in the before-tree (Delete, Update, Move source).
    pub before: Option<NodeId>,
    /// Subtree root in the after-tree (Insert, Update, Move target).
    pub after: Option<NodeId>,
    pub before_span: Option<Span>,
    pub after_span: Option<Span>,
    pub subtree_depth: u32,
    pub only_name_or_modifier: bool,
    pub blacklisted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditScript {
    pub actions: Vec<EditAction>,
    pub primitives: Vec<Primitive>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionChangeSet {
    pub function: String,
    pub file: String,
    pub actions: Vec<EditAction>,
}

/// Build the edit script for a mapped tree pair.
///
/// Inserted (deleted) nodes form regions: maximal connected sets of
/// after-only (before-only) nodes, cut at function declarations so that a
/// nested function is its own region. Each region is one action whose depth
/// is the region's height. Relabels are depth-1 updates; moves carry the
/// depth of the whole moved subtree.
pub fn edit_script(
    mapping: &NodeMapping,
    before: &SyntaxTree,
    after: &SyntaxTree,
    blacklist: &Blacklist,
) -> EditScript {
    let primitives = script::generate(before, after, mapping);
    let mut actions = Vec::new();

    let mut moved = HashSet::new();
    for p in &primitives {
        match p {
            Primitive::Update { node, after: a, .. } => {
                let b = node - 1;
                let name_like = |t: &SyntaxTree, n: NodeId| {
                    matches!(t.node(n).category, NodeCategory::NameBearing | NodeCategory::Modifier)
                };
                actions.push(EditAction {
                    kind: EditKind::Update,
                    before: Some(b),
                    after: Some(*a),
                    before_span: Some(before.node(b).span),
                    after_span: Some(after.node(*a).span),
                    subtree_depth: 1,
                    only_name_or_modifier: name_like(before, b) && name_like(after, *a),
                    blacklisted: inside_log_statement(before, b, blacklist)
                        || inside_log_statement(after, *a, blacklist),
                });
            }
            Primitive::Move { node, after: a, .. } if moved.insert(*node) => {
                let b = node - 1;
                actions.push(EditAction {
                    kind: EditKind::Move,
                    before: Some(b),
                    after: Some(*a),
                    before_span: Some(before.node(b).span),
                    after_span: Some(after.node(*a).span),
                    subtree_depth: before.node(b).depth,
                    only_name_or_modifier: all_leaves_modifier(before, b, |_| true),
                    blacklisted: inside_log_statement(before, b, blacklist)
                        || inside_log_statement(after, *a, blacklist),
                });
            }
            _ => {}
        }
    }

    for (root, depth, only) in regions(after, |n| mapping.before_of(n).is_none()) {
        actions.push(EditAction {
            kind: EditKind::Insert,
            before: None,
            after: Some(root),
            before_span: None,
            after_span: Some(after.node(root).span),
            subtree_depth: depth,
            only_name_or_modifier: only,
            blacklisted: inside_log_statement(after, root, blacklist),
        });
    }
    for (root, depth, only) in regions(before, |n| mapping.after_of(n).is_none()) {
        actions.push(EditAction {
            kind: EditKind::Delete,
            before: Some(root),
            after: None,
            before_span: Some(before.node(root).span),
            after_span: None,
            subtree_depth: depth,
            only_name_or_modifier: only,
            blacklisted: inside_log_statement(before, root, blacklist),
        });
    }
    EditScript { actions, primitives }
}

fn is_function(t: &SyntaxTree, n: NodeId) -> bool {
    matches!(t.node(n).construct, Construct::Function(_))
}

/// Leaves of the subtree at `root` restricted to nodes accepted by `keep`; true iff
/// there is at least one and all are modifiers.
fn all_leaves_modifier(t: &SyntaxTree, root: NodeId, keep: impl Fn(NodeId) -> bool) -> bool {
    let mut any = false;
    for n in std::iter::once(root).chain(t.descendants(root)) {
        if keep(n) && t.is_leaf(n) {
            if t.node(n).category != NodeCategory::Modifier {
                return false;
            }
            any = true;
        }
    }
    any
}

/// `(root, height, only_modifiers)` of every region of nodes satisfying `member`.
fn regions(t: &SyntaxTree, member: impl Fn(NodeId) -> bool) -> Vec<(NodeId, u32, bool)> {
    if t.is_empty() {
        return Vec::new();
    }
    let inside = |n: NodeId| member(n);
    // region-restricted height, computed children first
    let mut height = vec![0u32; t.len()];
    for n in (0..t.len()).rev() {
        if !inside(n) {
            continue;
        }
        let h = t
            .node(n)
            .children
            .iter()
            .filter(|&&c| inside(c) && !is_function(t, c))
            .map(|&c| height[c])
            .max()
            .unwrap_or(0);
        height[n] = h + 1;
    }
    let mut out = Vec::new();
    for n in 0..t.len() {
        if !inside(n) {
            continue;
        }
        let root = t.node(n).parent.is_none_or(|p| !inside(p)) || is_function(t, n);
        if !root {
            continue;
        }
        // region members: descendants reachable through members without crossing a function
        let mut members = HashSet::new();
        let mut stack = vec![n];
        while let Some(x) = stack.pop() {
            members.insert(x);
            for &c in &t.node(x).children {
                if inside(c) && !is_function(t, c) {
                    stack.push(c);
                }
            }
        }
        let only = members
            .iter()
            .filter(|&&m| t.is_leaf(m))
            .fold(None, |acc: Option<bool>, &m| {
                Some(acc.unwrap_or(true) && t.node(m).category == NodeCategory::Modifier)
            })
            .unwrap_or(false);
        out.push((n, height[n], only));
    }
    out
}

/// Attribute each action to the innermost function whose span contains it.
///
/// Delete and Move sources use the before version, Insert, Update and Move
/// targets the after version. A move whose source and target lie in
/// different functions is listed in both. Everything else lands in
/// [`FILE_SCOPE`].
pub fn group_by_function(
    actions: &[EditAction],
    functions_before: &[FunctionUnit],
    functions_after: &[FunctionUnit],
    file: &str,
) -> Vec<FunctionChangeSet> {
    let innermost = |fs: &[FunctionUnit], span: Span| -> String {
        fs.iter()
            .filter(|f| f.span.contains(&span))
            .min_by_key(|f| (f.span.end - f.span.start, std::cmp::Reverse(f.node)))
            .map(|f| f.qualified_name.clone())
            .unwrap_or_else(|| FILE_SCOPE.to_string())
    };
    let mut groups: BTreeMap<String, Vec<EditAction>> = BTreeMap::new();
    for a in actions {
        let mut owners = Vec::new();
        match a.kind {
            EditKind::Delete => owners.push(innermost(functions_before, a.before_span.expect("delete source"))),
            EditKind::Insert | EditKind::Update => {
                owners.push(innermost(functions_after, a.after_span.expect("after side")))
            }
            EditKind::Move => {
                owners.push(innermost(functions_before, a.before_span.expect("move source")));
                owners.push(innermost(functions_after, a.after_span.expect("move target")));
                owners.dedup();
            }
        }
        for o in owners {
            groups.entry(o).or_default().push(a.clone());
        }
    }
    groups
        .into_iter()
        .map(|(function, actions)| FunctionChangeSet {
            function,
            file: file.to_string(),
            actions,
        })
        .collect()
}

/// Weighted edit size of a list of actions.
pub fn delta_ast<T: Scalar>(actions: &[EditAction], weights: &DeltaWeights<T>) -> T {
    let mut total = T::zero();
    for a in actions {
        if a.blacklisted {
            continue;
        }
        let factor = if a.only_name_or_modifier {
            weights.name_only_factor
        } else {
            T::one()
        };
        total += weights.weight(a.kind) * T::of(f64::from(a.subtree_depth)) * factor;
    }
    total
}
