use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::syntax::{extract_functions, SyntaxTree};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FunctionId {
    pub file: String,
    pub qualified_name: String,
}

impl FunctionId {
    pub fn new(file: impl Into<String>, qualified_name: impl Into<String>) -> Self {
        Self {
            file: file.into(),
            qualified_name: qualified_name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GraphNode {
    Function(FunctionId),
    /// Callee that matched no project function.
    External(String),
}

impl GraphNode {
    pub fn is_external(&self) -> bool {
        matches!(self, GraphNode::External(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub qualified_name: String,
    pub name: String,
    pub container: String,
    pub arity: usize,
    pub enclosing: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallSite {
    pub caller: String,
    pub name: String,
    pub receiver: Option<String>,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FileEntry {
    pub functions: Vec<FunctionDecl>,
    pub sites: Vec<CallSite>,
    /// Resolved target of each call site, index-aligned with `sites`.
    pub targets: Vec<GraphNode>,
    /// Set when the latest version of the file failed to parse.
    pub stale: bool,
}

impl FileEntry {
    pub fn extract(path: &str, tree: &SyntaxTree) -> Self {
        let units = extract_functions(tree, path);
        let functions = units
            .iter()
            .map(|u| FunctionDecl {
                qualified_name: u.qualified_name.clone(),
                name: u.name.clone(),
                container: u.container.clone(),
                arity: u.arity,
                enclosing: u.enclosing.clone(),
            })
            .collect();
        let mut sites = Vec::new();
        for (id, node) in tree.nodes.iter().enumerate() {
            let Some(call) = &node.call else { continue };
            // innermost unit whose subtree holds the call
            let Some(owner) = units
                .iter()
                .filter(|u| u.node <= id && id < u.node + tree.node(u.node).size as usize)
                .max_by_key(|u| u.node)
            else {
                continue;
            };
            sites.push(CallSite {
                caller: owner.qualified_name.clone(),
                name: call.name.clone(),
                receiver: call.receiver.clone(),
                arity: call.arity,
            });
        }
        Self {
            functions,
            sites,
            targets: Vec::new(),
            stale: false,
        }
    }
}

/// New state of one file for an incremental update.
#[derive(Debug, Clone, Copy)]
pub enum FileState<'a> {
    Parsed(&'a SyntaxTree),
    Unparseable,
    Removed,
}

/// Project call graph, indexed per file.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CallGraph {
    files: BTreeMap<String, FileEntry>,
    /// simple name -> declaring functions
    by_name: BTreeMap<String, BTreeSet<FunctionId>>,
    /// callee simple name -> files with such call sites
    sites_by_name: BTreeMap<String, BTreeSet<String>>,
}

pub fn build_call_graph<'a>(files: impl IntoIterator<Item = (&'a str, FileState<'a>)>) -> CallGraph {
    let mut g = CallGraph::default();
    g.update(files);
    g
}

pub fn update_call_graph<'a>(
    graph: &CallGraph,
    changed: impl IntoIterator<Item = (&'a str, FileState<'a>)>,
) -> CallGraph {
    let mut g = graph.clone();
    g.update(changed);
    g
}

impl CallGraph {
    pub fn files(&self) -> impl Iterator<Item = (&String, &FileEntry)> {
        self.files.iter()
    }

    pub fn file(&self, path: &str) -> Option<&FileEntry> {
        self.files.get(path)
    }

    pub fn is_stale(&self, path: &str) -> bool {
        self.files.get(path).is_some_and(|f| f.stale)
    }

    pub fn contains(&self, id: &FunctionId) -> bool {
        self.files
            .get(&id.file)
            .is_some_and(|f| f.functions.iter().any(|d| d.qualified_name == id.qualified_name))
    }

    /// All nodes: declared functions plus external callees.
    pub fn nodes(&self) -> BTreeSet<GraphNode> {
        let mut out = BTreeSet::new();
        for (path, entry) in &self.files {
            for d in &entry.functions {
                out.insert(GraphNode::Function(FunctionId::new(path, &d.qualified_name)));
            }
            out.extend(entry.targets.iter().cloned());
        }
        out
    }

    /// Distinct caller -> callee edges, including enclosing -> nested function edges.
    pub fn edges(&self) -> BTreeSet<(GraphNode, GraphNode)> {
        let mut out = BTreeSet::new();
        for (path, entry) in &self.files {
            for (site, target) in entry.sites.iter().zip(&entry.targets) {
                out.insert((
                    GraphNode::Function(FunctionId::new(path, &site.caller)),
                    target.clone(),
                ));
            }
            for d in &entry.functions {
                if let Some(e) = &d.enclosing {
                    out.insert((
                        GraphNode::Function(FunctionId::new(path, e)),
                        GraphNode::Function(FunctionId::new(path, &d.qualified_name)),
                    ));
                }
            }
        }
        out
    }

    /// Replace the given files and re-resolve every call site that could be affected.
    pub fn update<'a>(&mut self, changed: impl IntoIterator<Item = (&'a str, FileState<'a>)>) {
        let mut touched_files = BTreeSet::new();
        let mut touched_names = BTreeSet::new();
        for (path, state) in changed {
            if let Some(old) = self.files.remove(path) {
                self.unindex(path, &old, &mut touched_names);
            }
            let entry = match state {
                FileState::Parsed(tree) => Some(FileEntry::extract(path, tree)),
                FileState::Unparseable => Some(FileEntry {
                    stale: true,
                    ..FileEntry::default()
                }),
                FileState::Removed => None,
            };
            if let Some(entry) = entry {
                self.index(path, &entry, &mut touched_names);
                self.files.insert(path.to_string(), entry);
            }
            touched_files.insert(path.to_string());
        }
        for name in &touched_names {
            if let Some(files) = self.sites_by_name.get(name) {
                touched_files.extend(files.iter().cloned());
            }
        }
        for path in touched_files {
            let Some(entry) = self.files.get(&path) else { continue };
            let targets = entry.sites.iter().map(|s| self.resolve(&path, s)).collect();
            self.files.get_mut(&path).expect("present").targets = targets;
        }
    }

    fn index(&mut self, path: &str, entry: &FileEntry, touched: &mut BTreeSet<String>) {
        for d in &entry.functions {
            self.by_name
                .entry(d.name.clone())
                .or_default()
                .insert(FunctionId::new(path, &d.qualified_name));
            touched.insert(d.name.clone());
        }
        for s in &entry.sites {
            self.sites_by_name.entry(s.name.clone()).or_default().insert(path.to_string());
        }
    }

    fn unindex(&mut self, path: &str, entry: &FileEntry, touched: &mut BTreeSet<String>) {
        for d in &entry.functions {
            if let Some(set) = self.by_name.get_mut(&d.name) {
                set.remove(&FunctionId::new(path, &d.qualified_name));
                if set.is_empty() {
                    self.by_name.remove(&d.name);
                }
            }
            touched.insert(d.name.clone());
        }
        for s in &entry.sites {
            if let Some(set) = self.sites_by_name.get_mut(&s.name) {
                set.remove(path);
                if set.is_empty() {
                    self.sites_by_name.remove(&s.name);
                }
            }
        }
    }

    fn decl(&self, id: &FunctionId) -> &FunctionDecl {
        self.files[&id.file]
            .functions
            .iter()
            .find(|d| d.qualified_name == id.qualified_name)
            .expect("indexed function exists")
    }

    /// Same file first, then project-wide; among same-named candidates prefer
    /// matching arity. A capitalised receiver restricts candidates to that container.
    fn resolve(&self, file: &str, site: &CallSite) -> GraphNode {
        let Some(all) = self.by_name.get(&site.name) else {
            return GraphNode::External(site.name.clone());
        };
        let type_receiver = site
            .receiver
            .as_deref()
            .filter(|r| !matches!(*r, "this" | "super"))
            .and_then(|r| r.rsplit('.').next())
            .filter(|r| r.starts_with(|c: char| c.is_ascii_uppercase()));
        let fits = |id: &&FunctionId| {
            type_receiver.is_none_or(|ty| {
                let c = &self.decl(id).container;
                c == ty || c.ends_with(&format!(".{ty}"))
            })
        };
        let pick = |cands: Vec<&FunctionId>| -> Option<FunctionId> {
            let exact: Vec<_> = cands
                .iter()
                .filter(|id| self.decl(id).arity == site.arity)
                .collect();
            exact.first().map(|id| (**id).clone()).or_else(|| cands.first().map(|id| (*id).clone()))
        };
        let local: Vec<_> = all.iter().filter(|id| id.file == file).filter(fits).collect();
        if let Some(id) = pick(local) {
            return GraphNode::Function(id);
        }
        let global: Vec<_> = all.iter().filter(fits).collect();
        match pick(global) {
            Some(id) => GraphNode::Function(id),
            None => GraphNode::External(site.name.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_source;

    fn parse(src: &str) -> SyntaxTree {
        parse_source(src, "java").unwrap()
    }

    fn f(file: &str, q: &str) -> GraphNode {
        GraphNode::Function(FunctionId::new(file, q))
    }

    #[test]
    fn single_file_call_and_external_fallback() {
        let t = parse("class A { void f() { g(); h(); } void g() {} }");
        let g = build_call_graph([("A.java", FileState::Parsed(&t))]);
        let edges = g.edges();
        assert!(edges.contains(&(f("A.java", "A.f()"), f("A.java", "A.g()"))));
        assert!(edges.contains(&(f("A.java", "A.f()"), GraphNode::External("h".into()))));
        assert_eq!(edges.len(), 2);
        assert_eq!(g.nodes().len(), 3);
    }

    #[test]
    fn resolution_prefers_same_file_then_project() {
        let a = parse("class A { void f() { g(); Util.k(1); } void g() {} }");
        let b = parse("class B { void g() {} }");
        let u = parse("class Util { static void k(int x) {} static void k() {} }");
        let g = build_call_graph([
            ("A.java", FileState::Parsed(&a)),
            ("B.java", FileState::Parsed(&b)),
            ("Util.java", FileState::Parsed(&u)),
        ]);
        let e = g.edges();
        assert!(e.contains(&(f("A.java", "A.f()"), f("A.java", "A.g()"))));
        assert!(e.contains(&(f("A.java", "A.f()"), f("Util.java", "Util.k(int)"))));
    }

    #[test]
    fn deleting_a_callee_file_rewires_to_external() {
        let a = parse("class A { void f() { g(); } }");
        let b = parse("class B { void g() {} }");
        let mut g = build_call_graph([("A.java", FileState::Parsed(&a)), ("B.java", FileState::Parsed(&b))]);
        assert!(g.edges().contains(&(f("A.java", "A.f()"), f("B.java", "B.g()"))));
        g.update([("B.java", FileState::Removed)]);
        assert!(g.edges().contains(&(f("A.java", "A.f()"), GraphNode::External("g".into()))));
        assert_eq!(g, build_call_graph([("A.java", FileState::Parsed(&a))]));
    }

    #[test]
    fn no_source_change_leaves_graph_identical() {
        let a = parse("class A { void f() { g(); } void g() {} }");
        let g0 = build_call_graph([("A.java", FileState::Parsed(&a))]);
        let g1 = update_call_graph(&g0, std::iter::empty());
        assert_eq!(g0, g1);
    }

    #[test]
    fn unparseable_file_is_stale_and_empty() {
        let a = parse("class A { void f() { g(); } }");
        let b = parse("class B { void g() {} }");
        let mut g = build_call_graph([("A.java", FileState::Parsed(&a)), ("B.java", FileState::Parsed(&b))]);
        g.update([("B.java", FileState::Unparseable)]);
        assert!(g.is_stale("B.java"));
        assert!(!g.contains(&FunctionId::new("B.java", "B.g()")));
        assert!(g.edges().contains(&(f("A.java", "A.f()"), GraphNode::External("g".into()))));
    }

    #[test]
    fn lambdas_hang_off_their_enclosing_function() {
        let a = parse("class A { void f() { run(() -> g()); } void g() {} }");
        let g = build_call_graph([("A.java", FileState::Parsed(&a))]);
        let e = g.edges();
        assert!(e.contains(&(f("A.java", "A.f()"), f("A.java", "A.f()$lambda0"))));
        assert!(e.contains(&(f("A.java", "A.f()$lambda0"), f("A.java", "A.g()"))));
    }
}
