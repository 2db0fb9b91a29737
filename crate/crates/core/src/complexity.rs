//! Per-function size and understandability metrics.
//!
//! Halstead token classification (applied to the function body only):
//!
//! | class | tokens |
//! |-------|--------|
//! | operand | identifiers, type names, literals (string and char literals are one token each), `this`, `super`, `true`, `false`, `null` |
//! | operator | keywords (including primitive type names), operator and punctuation symbols, `.`, `(` counted as `()`, `[` counted as `[]` |
//! | ignored | `;` `,` `)` `]` `{` `}` and comments |

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::syntax::{comment_metrics, Construct, FunctionUnit, SyntaxTree, TokenClass};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexityRaw {
    pub loc: usize,
    pub cc: usize,
    pub hv: f64,
    pub pcom: f64,
}

pub fn measure(tree: &SyntaxTree, function: &FunctionUnit) -> ComplexityRaw {
    ComplexityRaw {
        loc: loc(tree, function),
        cc: cyclomatic(tree, function),
        hv: halstead_volume(tree, function),
        pcom: comment_percentage(tree, function),
    }
}

/// Physical lines touched by the function span.
pub fn loc(tree: &SyntaxTree, function: &FunctionUnit) -> usize {
    tree.line_range(function.span).map_or(0, |(a, b)| b - a + 1)
}

/// 1 + branches, loop headers, `case` labels, catch clauses, ternaries and short-circuit operators.
pub fn cyclomatic(tree: &SyntaxTree, function: &FunctionUnit) -> usize {
    let decisions = tree
        .descendants(function.node)
        .filter(|&n| {
            matches!(
                tree.node(n).construct,
                Construct::Branch
                    | Construct::Loop
                    | Construct::CaseLabel
                    | Construct::Catch
                    | Construct::Conditional
                    | Construct::ShortCircuit
            )
        })
        .count();
    1 + decisions
}

/// `N * log2(eta)` over the body tokens; 0 when `eta <= 1` or there is no body.
pub fn halstead_volume(tree: &SyntaxTree, function: &FunctionUnit) -> f64 {
    let Some(body) = function.body else { return 0.0 };
    let span = tree.node(body).span;
    let lo = tree.tokens.partition_point(|t| t.span.start < span.start);
    let hi = tree.tokens.partition_point(|t| t.span.start < span.end);
    let tokens = &tree.tokens[lo..hi];
    let n = tokens.len();
    let distinct: HashSet<(TokenClass, &str)> = tokens.iter().map(|t| (t.class, t.text.as_str())).collect();
    let eta = distinct.len();
    if eta <= 1 {
        return 0.0;
    }
    n as f64 * (eta as f64).log2()
}

/// Comment lines over total lines of the function span.
pub fn comment_percentage(tree: &SyntaxTree, function: &FunctionUnit) -> f64 {
    let (comments, total) = comment_metrics(tree, function.span);
    if total == 0 {
        0.0
    } else {
        comments as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{extract_functions, parse_source};

    fn first(src: &str) -> (SyntaxTree, FunctionUnit) {
        let t = parse_source(src, "java").unwrap();
        let f = extract_functions(&t, "A.java").remove(0);
        (t, f)
    }

    #[test]
    fn loc_counts_physical_lines() {
        let (t, f) = first("class A { void f() { g(); } }");
        assert_eq!(loc(&t, &f), 1);
        let (t, f) = first("class A {\nvoid f() {\n  a();\n\n  b();\n\n  c();\n\n  d();\n}\n}");
        assert_eq!(loc(&t, &f), 9);
    }

    #[test]
    fn cyclomatic_counts_decision_points() {
        let (t, f) = first("class A { void f() { a = 1; b(); } }");
        assert_eq!(cyclomatic(&t, &f), 1);
        let (t, f) = first("class A { void f() { if (x) { a(); } } }");
        assert_eq!(cyclomatic(&t, &f), 2);
        let (t, f) = first("class A { void f() { if (a && b) { g(); } for (int i = 0; i < n; i++) { h(); } } }");
        assert_eq!(cyclomatic(&t, &f), 4);
        let src = "class A { int f(int x) { switch (x) { case 1: return 1; case 2: return 2; default: return x > 0 ? 1 : 0; } } }";
        let (t, f) = first(src);
        assert_eq!(cyclomatic(&t, &f), 4);
        let src = "class A { void f() { try { g(); } catch (E e) { h(); } catch (F e) { } while (p || q) {} do {} while (r); } }";
        let (t, f) = first(src);
        assert_eq!(cyclomatic(&t, &f), 6);
    }

    #[test]
    fn halstead_examples() {
        let (t, f) = first("class A { void f() { } }");
        assert_eq!(halstead_volume(&t, &f), 0.0);
        let (t, f) = first("class A { void f() { a = b + c; } }");
        assert_eq!(halstead_volume(&t, &f), 5.0 * 5f64.log2());
        let (t, g) = first("class A { void f() { a = b + c; a = b + c; } }");
        assert_eq!(halstead_volume(&t, &g), 2.0 * 5.0 * 5f64.log2());
    }

    #[test]
    fn comment_line_only_moves_loc_and_pcom() {
        let (t, f) = first("class A {\nvoid f() {\n  if (a) { b = c + 1; }\n}\n}");
        let (u, g) = first("class A {\nvoid f() {\n  // why\n  if (a) { b = c + 1; }\n}\n}");
        let (m, n) = (measure(&t, &f), measure(&u, &g));
        assert_eq!(m.cc, n.cc);
        assert_eq!(m.hv, n.hv);
        assert_eq!(n.loc, m.loc + 1);
        assert_eq!(m.pcom, 0.0);
        assert_eq!(n.pcom, 0.25);
    }

    #[test]
    fn comment_percentage_boundaries() {
        let src = "class A {\nvoid f() {\n/* a\nb\nc */\nx();\nx();\nx();\nx();\nx();\nx();\nx();\n}\n}";
        let (t, f) = first(src);
        assert_eq!(comment_percentage(&t, &f), 0.25);
    }
}
