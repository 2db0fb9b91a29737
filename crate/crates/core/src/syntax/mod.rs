//! Language-neutral syntax trees.
//!
//! A grammar adapter turns source text into a [`SyntaxTree`]: an arena of
//! [`SyntaxNode`]s in preorder (node 0 is the root, and the descendants of
//! node `i` are exactly `i + 1 .. i + size(i)`). Comments never become nodes;
//! they are kept on the side for comment metrics. Adapters tag nodes with a
//! [`Construct`] and a [`Role`] so that complexity, dependence and call-graph
//! analysis can run without knowing the grammar.

mod java;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use java::JavaAdapter;

pub type NodeId = usize;

/// Half-open byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionKind {
    Method,
    Constructor,
    Lambda,
    Initializer,
}

/// Grammar-independent meaning of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construct {
    Unit,
    Container,
    Function(FunctionKind),
    Block,
    /// Simple statement (no nested statements of its own).
    Statement,
    Branch,
    Loop,
    Switch,
    CaseGroup,
    /// A `case` label; `default` labels are `Other`.
    CaseLabel,
    Try,
    Catch,
    Finally,
    /// Statement with a header expression and a body that is not conditional (e.g. `synchronized`).
    Guarded,
    Labeled,
    /// Ternary conditional expression.
    Conditional,
    /// Short-circuit boolean operator (`&&`, `||`).
    ShortCircuit,
    Assignment,
    Increment,
    Declarator,
    Parameter,
    Parameters,
    FieldAccess,
    ArrayAccess,
    Name,
    Modifiers,
    Annotation,
    Other,
}

impl Construct {
    pub fn is_function(self) -> bool {
        matches!(self, Construct::Function(_))
    }

    /// Statement-level constructs that become dependence-graph nodes or carry statements.
    pub fn is_statement_like(self) -> bool {
        matches!(
            self,
            Construct::Statement
                | Construct::Branch
                | Construct::Loop
                | Construct::Switch
                | Construct::Try
                | Construct::Guarded
                | Construct::Labeled
                | Construct::Block
        )
    }
}

/// Position of a node within its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    None,
    Name,
    Condition,
    Body,
    Alternative,
    Target,
    Value,
    Receiver,
    Arguments,
    Parameters,
    Type,
    Init,
    Update,
    Field,
    Index,
    Operand,
    Resources,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeCategory {
    NameBearing,
    Modifier,
    Comment,
    LogStatement,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallInfo {
    pub name: String,
    pub receiver: Option<String>,
    pub arity: usize,
}

impl CallInfo {
    /// Dotted callee path, e.g. `System.out.println`.
    pub fn callee_path(&self) -> String {
        match &self.receiver {
            Some(r) => format!("{r}.{}", self.name),
            None => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxNode {
    pub kind: &'static str,
    pub construct: Construct,
    pub role: Role,
    pub label: Option<String>,
    /// Structural category: `NameBearing`, `Modifier` or `Other`.
    pub category: NodeCategory,
    pub span: Span,
    /// 1 for leaves, otherwise 1 + max child depth.
    pub depth: u32,
    /// Number of nodes in this subtree, including the node itself.
    pub size: u32,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub call: Option<CallInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenClass {
    Operator,
    Operand,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub span: Span,
    pub class: TokenClass,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxTree {
    pub language: &'static str,
    pub source: String,
    pub nodes: Vec<SyntaxNode>,
    pub comments: Vec<Span>,
    /// Lexical tokens (comments excluded) in source order, classified for Halstead counting.
    pub tokens: Vec<Token>,
    line_starts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {line}:{column} (byte {offset}): {message}")]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl SyntaxTree {
    pub(crate) fn new(
        language: &'static str,
        source: String,
        mut nodes: Vec<SyntaxNode>,
        comments: Vec<Span>,
        tokens: Vec<Token>,
    ) -> Self {
        // preorder: children always have larger ids than their parent
        for id in (0..nodes.len()).rev() {
            let (depth, size) = nodes[id]
                .children
                .iter()
                .fold((0u32, 1u32), |(d, s), &c| (d.max(nodes[c].depth), s + nodes[c].size));
            nodes[id].depth = depth + 1;
            nodes[id].size = size;
        }
        let line_starts = std::iter::once(0)
            .chain(source.match_indices('\n').map(|(i, _)| i + 1))
            .collect();
        Self {
            language,
            source,
            nodes,
            comments,
            tokens,
            line_starts,
        }
    }

    /// Build a tree from `(parent, kind, label)` triples listed in preorder.
    ///
    /// Spans are synthetic (`id .. id + size`) and the source is blank. Meant
    /// for exercising tree algorithms on shapes no grammar would produce.
    pub fn from_preorder(items: &[(Option<NodeId>, &'static str, Option<String>)]) -> Self {
        let mut nodes: Vec<SyntaxNode> = items
            .iter()
            .map(|(parent, kind, label)| SyntaxNode {
                kind,
                construct: Construct::Other,
                role: Role::None,
                label: label.clone(),
                category: match *kind {
                    "identifier" => NodeCategory::NameBearing,
                    "modifier" => NodeCategory::Modifier,
                    _ => NodeCategory::Other,
                },
                span: Span::default(),
                depth: 1,
                size: 1,
                parent: *parent,
                children: Vec::new(),
                call: None,
            })
            .collect();
        for id in 0..nodes.len() {
            if let Some(p) = nodes[id].parent {
                assert!(p < id, "parents must precede children in preorder");
                nodes[p].children.push(id);
            }
        }
        let mut tree = Self::new("synthetic", " ".repeat(items.len() + 1), nodes, Vec::new(), Vec::new());
        for id in 0..tree.nodes.len() {
            let size = tree.nodes[id].size as usize;
            tree.nodes[id].span = Span::new(id, id + size);
        }
        tree
    }

    pub const ROOT: NodeId = 0;

    pub fn root(&self) -> &SyntaxNode {
        &self.nodes[Self::ROOT]
    }

    pub fn node(&self, id: NodeId) -> &SyntaxNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn text(&self, span: Span) -> &str {
        &self.source[span.start..span.end]
    }

    pub fn node_text(&self, id: NodeId) -> &str {
        self.text(self.nodes[id].span)
    }

    /// Ids of the proper descendants of `id`.
    pub fn descendants(&self, id: NodeId) -> std::ops::Range<NodeId> {
        id + 1..id + self.nodes[id].size as usize
    }

    pub fn is_descendant(&self, node: NodeId, ancestor: NodeId) -> bool {
        self.descendants(ancestor).contains(&node)
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.nodes[id].parent, move |&p| self.nodes[p].parent)
    }

    /// Postorder over the subtree rooted at `id`.
    pub fn postorder(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes[id].size as usize);
        let mut stack = vec![(id, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                out.push(n);
            } else {
                stack.push((n, true));
                for &c in self.nodes[n].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    pub fn child_with_role(&self, id: NodeId, role: Role) -> Option<NodeId> {
        self.nodes[id].children.iter().copied().find(|&c| self.nodes[c].role == role)
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id].children.is_empty()
    }

    /// Zero-based line containing byte `offset`.
    pub fn line_of(&self, offset: usize) -> usize {
        self.line_starts.partition_point(|&s| s <= offset) - 1
    }

    /// Inclusive line range covered by `span`, or `None` for an empty span.
    pub fn line_range(&self, span: Span) -> Option<(usize, usize)> {
        if span.is_empty() {
            return None;
        }
        Some((self.line_of(span.start), self.line_of(span.end - 1)))
    }

    /// Whether two subtrees have the same shape, kinds and labels.
    pub fn isomorphic(&self, a: NodeId, other: &SyntaxTree, b: NodeId) -> bool {
        let (x, y) = (&self.nodes[a], &other.nodes[b]);
        x.kind == y.kind
            && x.label == y.label
            && x.size == y.size
            && x.children.len() == y.children.len()
            && x.children
                .iter()
                .zip(&y.children)
                .all(|(&c, &d)| self.isomorphic(c, other, d))
    }

    /// Innermost function node strictly enclosing `id` (or `id` itself when it is one).
    pub fn enclosing_function(&self, id: NodeId) -> Option<NodeId> {
        std::iter::once(id)
            .chain(self.ancestors(id))
            .find(|&n| self.nodes[n].construct.is_function())
    }
}

/// Grammar adapter: parses one language into the neutral tree model.
pub trait LanguageAdapter: Send + Sync {
    fn id(&self) -> &'static str;
    fn extensions(&self) -> &'static [&'static str];
    fn parse(&self, text: &str) -> Result<SyntaxTree, ParseError>;
}

/// Adapters keyed by file extension.
pub struct LanguageRegistry {
    adapters: Vec<Box<dyn LanguageAdapter>>,
    by_extension: HashMap<&'static str, usize>,
}

impl Default for LanguageRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(JavaAdapter));
        registry
    }
}

impl std::fmt::Debug for LanguageRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LanguageRegistry")
            .field("languages", &self.adapters.iter().map(|a| a.id()).collect::<Vec<_>>())
            .finish()
    }
}

impl LanguageRegistry {
    pub fn empty() -> Self {
        Self {
            adapters: Vec::new(),
            by_extension: HashMap::new(),
        }
    }

    pub fn register(&mut self, adapter: Box<dyn LanguageAdapter>) {
        let idx = self.adapters.len();
        for ext in adapter.extensions() {
            self.by_extension.insert(ext, idx);
        }
        self.adapters.push(adapter);
    }

    pub fn for_path(&self, path: &str) -> Option<&dyn LanguageAdapter> {
        let ext = Path::new(path).extension()?.to_str()?;
        self.by_extension.get(ext).map(|&i| self.adapters[i].as_ref())
    }

    pub fn by_id(&self, id: &str) -> Option<&dyn LanguageAdapter> {
        self.adapters.iter().find(|a| a.id() == id).map(|a| a.as_ref())
    }
}

/// Parse `text` with the adapter registered under `language`.
pub fn parse_source(text: &str, language: &str) -> Result<SyntaxTree, ParseError> {
    match language {
        "java" => JavaAdapter.parse(text),
        other => Err(ParseError {
            offset: 0,
            line: 0,
            column: 0,
            message: format!("no grammar adapter for language `{other}`"),
        }),
    }
}

/// A method, constructor, initializer or lambda within one file version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionUnit {
    /// Container path plus name and parameter types, e.g. `Outer.Inner.f(int,String)`.
    pub qualified_name: String,
    pub name: String,
    pub kind: FunctionKind,
    pub file: String,
    pub span: Span,
    pub node: NodeId,
    pub body: Option<NodeId>,
    /// Qualified name of the innermost enclosing function, for nested units.
    pub enclosing: Option<String>,
    /// Dotted path of enclosing containers.
    pub container: String,
    pub arity: usize,
}

/// Extract every function unit, including nested and anonymous ones.
///
/// Lambdas are named `<enclosing>$lambda<i>` and anonymous classes
/// `<enclosing>$anon<i>`, numbered in source order per enclosing function.
pub fn extract_functions(tree: &SyntaxTree, file: &str) -> Vec<FunctionUnit> {
    let mut out = Vec::new();
    let mut counters: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut stack: Vec<(NodeId, String, Option<String>)> = vec![(SyntaxTree::ROOT, String::new(), None)];
    // explicit stack; each frame carries (node, container path, enclosing function)
    while let Some((id, container, enclosing)) = stack.pop() {
        let node = tree.node(id);
        let (next_container, next_enclosing) = match node.construct {
            Construct::Container => {
                let name = tree
                    .child_with_role(id, Role::Name)
                    .and_then(|n| tree.node(n).label.clone());
                let name = match (name, &enclosing) {
                    (Some(n), None) => n,
                    (Some(n), Some(f)) => format!("{f}${n}"),
                    (None, Some(f)) => {
                        let c = counters.entry(f.clone()).or_default();
                        c.1 += 1;
                        format!("{f}$anon{}", c.1 - 1)
                    }
                    (None, None) => "$anon".to_string(),
                };
                let path = if enclosing.is_some() || container.is_empty() {
                    name
                } else {
                    format!("{container}.{name}")
                };
                (path, None)
            }
            Construct::Function(kind) => {
                let (name, qualified) = match kind {
                    FunctionKind::Lambda => {
                        let parent = enclosing.clone().unwrap_or_else(|| {
                            if container.is_empty() {
                                "<file>".to_string()
                            } else {
                                container.clone()
                            }
                        });
                        let c = counters.entry(parent.clone()).or_default();
                        c.0 += 1;
                        let name = format!("lambda{}", c.0 - 1);
                        let q = format!("{parent}${name}");
                        (name, q)
                    }
                    FunctionKind::Initializer => {
                        let q = join(&container, "<clinit>()");
                        ("<clinit>".to_string(), q)
                    }
                    _ => {
                        let name = tree
                            .child_with_role(id, Role::Name)
                            .and_then(|n| tree.node(n).label.clone())
                            .unwrap_or_else(|| "<anonymous>".to_string());
                        let sig = signature(tree, id).join(",");
                        let q = join(&container, &format!("{name}({sig})"));
                        (name, q)
                    }
                };
                let qualified = match seen.get_mut(&qualified) {
                    Some(n) => {
                        *n += 1;
                        format!("{qualified}#{n}")
                    }
                    None => {
                        seen.insert(qualified.clone(), 1);
                        qualified
                    }
                };
                let body = tree.child_with_role(id, Role::Body).or_else(|| {
                    node.children
                        .iter()
                        .copied()
                        .find(|&c| tree.node(c).construct == Construct::Block)
                });
                out.push(FunctionUnit {
                    qualified_name: qualified.clone(),
                    name,
                    kind,
                    file: file.to_string(),
                    span: node.span,
                    node: id,
                    body,
                    enclosing: enclosing.clone(),
                    container: container.clone(),
                    arity: signature(tree, id).len(),
                });
                (container.clone(), Some(qualified))
            }
            _ => (container.clone(), enclosing.clone()),
        };
        for &c in node.children.iter().rev() {
            stack.push((c, next_container.clone(), next_enclosing.clone()));
        }
    }
    out.sort_by_key(|f| f.node);
    out
}

fn join(container: &str, item: &str) -> String {
    if container.is_empty() {
        item.to_string()
    } else {
        format!("{container}.{item}")
    }
}

/// Parameter type texts (whitespace removed) of a function node.
fn signature(tree: &SyntaxTree, function: NodeId) -> Vec<String> {
    let Some(params) = tree.child_with_role(function, Role::Parameters) else {
        return Vec::new();
    };
    let params_node = tree.node(params);
    if params_node.construct != Construct::Parameters {
        // single untyped lambda parameter
        return vec![String::new()];
    }
    params_node
        .children
        .iter()
        .filter_map(|&p| {
            let node = tree.node(p);
            match node.construct {
                Construct::Parameter => {
                    let ty = tree.child_with_role(p, Role::Type).map(|t| squash(tree.node_text(t)));
                    Some(ty.unwrap_or_else(|| {
                        // variadic parameter: type is the first non-modifier child
                        node.children
                            .iter()
                            .find(|&&c| {
                                !matches!(
                                    tree.node(c).construct,
                                    Construct::Modifiers | Construct::Annotation | Construct::Declarator
                                )
                            })
                            .map(|&c| format!("{}...", squash(tree.node_text(c))))
                            .unwrap_or_default()
                    }))
                }
                Construct::Name => Some(String::new()),
                _ => None,
            }
        })
        .collect()
}

pub(crate) fn squash(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Callee patterns whose call statements are ignored when scoring.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Blacklist {
    patterns: Vec<String>,
}

impl Blacklist {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Self {
        Self {
            patterns: patterns.iter().map(|p| p.as_ref().to_ascii_lowercase()).collect(),
        }
    }

    /// A dotted callee matches when a pattern equals one of its segments or one of its dotted prefixes.
    pub fn matches(&self, callee: &str) -> bool {
        if self.patterns.is_empty() {
            return false;
        }
        let lower = callee.to_ascii_lowercase();
        let segments: Vec<&str> = lower.split('.').collect();
        (1..=segments.len()).any(|k| {
            let prefix = segments[..k].join(".");
            let seg = segments[k - 1];
            self.patterns.iter().any(|p| *p == prefix || *p == seg)
        })
    }
}

/// Category of a node for edit weighting.
pub fn classify_node(tree: &SyntaxTree, id: NodeId, blacklist: &Blacklist) -> NodeCategory {
    if is_log_statement(tree, id, blacklist) {
        return NodeCategory::LogStatement;
    }
    tree.node(id).category
}

fn is_log_statement(tree: &SyntaxTree, id: NodeId, blacklist: &Blacklist) -> bool {
    let node = tree.node(id);
    if node.construct != Construct::Statement {
        return false;
    }
    let call = node.call.as_ref().or_else(|| {
        node.children
            .iter()
            .find_map(|&c| tree.node(c).call.as_ref())
    });
    call.is_some_and(|c| blacklist.matches(&c.callee_path()))
}

/// Whether `id` or one of its ancestors is a blacklisted call statement.
pub fn inside_log_statement(tree: &SyntaxTree, id: NodeId, blacklist: &Blacklist) -> bool {
    std::iter::once(id)
        .chain(tree.ancestors(id))
        .any(|n| is_log_statement(tree, n, blacklist))
}

/// `(comment_lines, total_lines)` over the physical lines touched by `span`.
pub fn comment_metrics(tree: &SyntaxTree, span: Span) -> (usize, usize) {
    let Some((first, last)) = tree.line_range(span) else {
        return (0, 0);
    };
    let mut commented = vec![false; last - first + 1];
    for c in tree.comments.iter().filter(|c| c.overlaps(&span)) {
        let Some((a, b)) = tree.line_range(*c) else { continue };
        for line in a.max(first)..=b.min(last) {
            commented[line - first] = true;
        }
    }
    (commented.iter().filter(|&&c| c).count(), last - first + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn java(src: &str) -> SyntaxTree {
        parse_source(src, "java").expect("parses")
    }

    #[test]
    fn empty_source_has_bare_root_and_no_functions() {
        let t = java("");
        assert_eq!(t.len(), 1);
        assert!(t.root().children.is_empty());
        assert!(extract_functions(&t, "A.java").is_empty());
    }

    #[test]
    fn single_function_with_return() {
        let t = java("class A { int f() { return 1; } }");
        let fs = extract_functions(&t, "A.java");
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].qualified_name, "A.f()");
        assert_eq!(fs[0].kind, FunctionKind::Method);
    }

    #[test]
    fn invalid_text_is_a_parse_error() {
        let err = parse_source("class A { void f( { }", "java").unwrap_err();
        assert!(err.message.contains("syntax"));
        assert!(parse_source("class A {}", "cobol").is_err());
    }

    #[test]
    fn two_methods_and_overloads() {
        let t = java("class A { void f(int x) {} void f(String s) {} void g() {} }");
        let names: Vec<_> = extract_functions(&t, "A.java")
            .into_iter()
            .map(|f| f.qualified_name)
            .collect();
        assert_eq!(names, vec!["A.f(int)", "A.f(String)", "A.g()"]);
    }

    #[test]
    fn nested_lambda_and_anonymous_class_names() {
        let src = r#"
class A {
  void m() {
    Runnable r = () -> go();
    Runnable s = new Runnable() { public void run() { stop(); } };
    list.forEach(x -> x.y(z -> z));
  }
}"#;
        let t = java(src);
        let names: Vec<_> = extract_functions(&t, "A.java")
            .into_iter()
            .map(|f| f.qualified_name)
            .collect();
        assert_eq!(
            names,
            vec![
                "A.m()",
                "A.m()$lambda0",
                "A.m()$anon0.run()",
                "A.m()$lambda1",
                "A.m()$lambda1$lambda0"
            ]
        );
        let fs = extract_functions(&t, "A.java");
        assert_eq!(fs[1].enclosing.as_deref(), Some("A.m()"));
        assert!(fs[1].qualified_name.ends_with("m()$lambda0"));
    }

    #[test]
    fn constructors_static_init_and_inner_classes() {
        let src = "class A { A(int a) {} static { x = 1; } class B { void h(int[] a, String... r) {} } }";
        let names: Vec<_> = extract_functions(&java(src), "A.java")
            .into_iter()
            .map(|f| f.qualified_name)
            .collect();
        assert_eq!(names, vec!["A.A(int)", "A.<clinit>()", "A.B.h(int[],String...)"]);
    }

    #[test]
    fn classification_of_names_modifiers_and_log_calls() {
        let src = r#"class A { @Override public void f() { int count = 0; log.debug("x"); g(count); } }"#;
        let t = java(src);
        let bl = Blacklist::new(&["log", "logger", "print", "println", "System.out", "System.err"]);
        let find = |kind: &str, text: &str| {
            (0..t.len())
                .find(|&i| t.node(i).kind == kind && t.node_text(i) == text)
                .unwrap_or_else(|| panic!("no {kind} {text}"))
        };
        assert_eq!(classify_node(&t, find("identifier", "count"), &bl), NodeCategory::NameBearing);
        assert_eq!(classify_node(&t, find("marker_annotation", "@Override"), &bl), NodeCategory::Modifier);
        assert_eq!(classify_node(&t, find("modifier", "public"), &bl), NodeCategory::Modifier);
        let log = find("expression_statement", "log.debug(\"x\");");
        assert_eq!(classify_node(&t, log, &bl), NodeCategory::LogStatement);
        let call = find("expression_statement", "g(count);");
        assert_eq!(classify_node(&t, call, &bl), NodeCategory::Other);
        assert_eq!(classify_node(&t, log, &Blacklist::default()), NodeCategory::Other);
    }

    #[test]
    fn blacklist_matching_rules() {
        let bl = Blacklist::new(&["log", "logger", "print", "println", "System.out", "System.err"]);
        assert!(bl.matches("System.out.println"));
        assert!(bl.matches("LOG.info"));
        assert!(bl.matches("this.logger.warn"));
        assert!(bl.matches("System.err.printf"));
        assert!(!bl.matches("catalog.get"));
        assert!(!bl.matches("System.exit"));
    }

    #[test]
    fn comments_stay_out_of_the_tree() {
        let a = java("class A { int f() { return 1; } }");
        let b = java("class A {\n  // hello\n  int f() { /* x */ return 1; }\n}");
        assert_eq!(a.len(), b.len());
        assert!(a.isomorphic(0, &b, 0));
        assert_eq!(b.comments.len(), 2);
        assert!(b.nodes.iter().all(|n| !n.kind.contains("comment")));
    }

    #[test]
    fn depth_rule_holds_everywhere() {
        let t = java("class A { int f(int x) { if (x > 1 && x < 5) { return g(x + 1); } return -x; } }");
        for n in &t.nodes {
            let expected = 1 + n.children.iter().map(|&c| t.node(c).depth).max().unwrap_or(0);
            assert_eq!(n.depth, expected);
            for &c in &n.children {
                assert!(n.span.contains(&t.node(c).span));
            }
        }
    }

    #[test]
    fn reparsing_is_deterministic() {
        let src = "class A { void f() { for (int i = 0; i < n; i++) { s += i; } } }";
        assert_eq!(java(src), java(src));
    }

    #[test]
    fn comment_metrics_counts() {
        let plain = "class A {\n void f() {\n  a();\n\n  b();\n  c();\n\n  d();\n  e();\n }\n}";
        let t = java(plain);
        let f = &extract_functions(&t, "A.java")[0];
        assert_eq!(comment_metrics(&t, f.span), (0, 9));

        let block = "class A {\nvoid f() {\n/* one\n two\n three */\na();\nb();\nc();\nd();\ne();\ng();\n}\n}";
        let t = java(block);
        let f = &extract_functions(&t, "A.java")[0];
        assert_eq!(comment_metrics(&t, f.span), (3, 11));

        let t = java("class A {}\n// a\n// b\n// c\n");
        let span = Span::new(t.source.find("// a").unwrap(), t.source.len() - 1);
        assert_eq!(comment_metrics(&t, span), (3, 3));
        assert_eq!(comment_metrics(&t, Span::new(3, 3)), (0, 0));
    }

    #[test]
    fn call_info_for_invocations() {
        let t = java("class A { A() { this(2); } void f() { System.out.println(a, b); new Foo<T>(1); } }");
        let calls: Vec<_> = t.nodes.iter().filter_map(|n| n.call.clone()).collect();
        assert_eq!(calls[0].name, "this");
        assert_eq!(calls[1].callee_path(), "System.out.println");
        assert_eq!(calls[1].arity, 2);
        assert_eq!(calls[2].name, "Foo");
        assert_eq!(calls[2].arity, 1);
    }

    #[test]
    fn registry_resolves_by_extension() {
        let reg = LanguageRegistry::default();
        assert_eq!(reg.for_path("src/a/B.java").map(|a| a.id()), Some("java"));
        assert!(reg.for_path("README.md").is_none());
        assert!(reg.for_path("Makefile").is_none());
    }
}
