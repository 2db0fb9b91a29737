//! Java grammar adapter backed by tree-sitter.

use std::cell::RefCell;

use tree_sitter::{Node, Parser};

use super::{
    squash, CallInfo, Construct, FunctionKind, LanguageAdapter, NodeCategory, ParseError, Role, Span,
    SyntaxNode, SyntaxTree, Token, TokenClass,
};

thread_local! {
    static PARSER: RefCell<Parser> = RefCell::new({
        let mut p = Parser::new();
        p.set_language(&tree_sitter_java::LANGUAGE.into())
            .expect("java grammar is compatible with the linked runtime");
        p
    });
}

#[derive(Debug, Clone, Copy, Default)]
pub struct JavaAdapter;

impl LanguageAdapter for JavaAdapter {
    fn id(&self) -> &'static str {
        "java"
    }

    fn extensions(&self) -> &'static [&'static str] {
        &["java"]
    }

    fn parse(&self, text: &str) -> Result<SyntaxTree, ParseError> {
        let ts = PARSER
            .with(|p| p.borrow_mut().parse(text, None))
            .ok_or_else(|| ParseError {
                offset: 0,
                line: 0,
                column: 0,
                message: "parser gave up".into(),
            })?;
        let root = ts.root_node();
        if root.has_error() {
            return Err(first_error(root));
        }
        let mut b = Builder {
            src: text,
            nodes: Vec::new(),
            comments: Vec::new(),
            tokens: Vec::new(),
        };
        b.build(root, None, Role::None, false);
        b.collect_tokens(root);
        let Builder {
            nodes, comments, tokens, ..
        } = b;
        Ok(SyntaxTree::new("java", text.to_string(), nodes, comments, tokens))
    }
}

fn first_error(root: Node) -> ParseError {
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        if n.is_error() || n.is_missing() {
            let p = n.start_position();
            let message = if n.is_missing() {
                format!("syntax error: missing `{}`", n.kind())
            } else {
                "syntax error: unexpected input".to_string()
            };
            return ParseError {
                offset: n.start_byte(),
                line: p.row + 1,
                column: p.column + 1,
                message,
            };
        }
        let mut cursor = n.walk();
        let children: Vec<_> = n.children(&mut cursor).filter(|c| c.has_error()).collect();
        stack.extend(children.into_iter().rev());
    }
    ParseError {
        offset: 0,
        line: 1,
        column: 1,
        message: "syntax error".into(),
    }
}

/// Nodes kept as leaves, labelled with their source text.
const ATOMIC: &[&str] = &[
    "identifier",
    "type_identifier",
    "scoped_type_identifier",
    "decimal_integer_literal",
    "hex_integer_literal",
    "octal_integer_literal",
    "binary_integer_literal",
    "decimal_floating_point_literal",
    "hex_floating_point_literal",
    "string_literal",
    "character_literal",
    "true",
    "false",
    "null_literal",
    "this",
    "super",
    "integral_type",
    "floating_point_type",
    "boolean_type",
    "void_type",
    "asterisk",
];

/// Halstead operands. Everything else that is not ignored punctuation counts as an operator.
const OPERANDS: &[&str] = &[
    "identifier",
    "type_identifier",
    "decimal_integer_literal",
    "hex_integer_literal",
    "octal_integer_literal",
    "binary_integer_literal",
    "decimal_floating_point_literal",
    "hex_floating_point_literal",
    "string_literal",
    "character_literal",
    "true",
    "false",
    "null_literal",
    "this",
    "super",
];

/// Closing halves of paired operators and separators; not counted.
const IGNORED: &[&str] = &[";", ",", ")", "]", "{", "}"];

fn is_comment(kind: &str) -> bool {
    matches!(kind, "line_comment" | "block_comment" | "comment")
}

fn construct_of(kind: &str, parent_kind: Option<&str>) -> Construct {
    use Construct::*;
    match kind {
        "program" => Unit,
        "class_declaration" | "interface_declaration" | "enum_declaration" | "record_declaration"
        | "annotation_type_declaration" => Container,
        "class_body" if matches!(parent_kind, Some("object_creation_expression" | "enum_constant")) => Container,
        "method_declaration" => Function(FunctionKind::Method),
        "constructor_declaration" | "compact_constructor_declaration" => Function(FunctionKind::Constructor),
        "lambda_expression" => Function(FunctionKind::Lambda),
        "static_initializer" => Function(FunctionKind::Initializer),
        "block" | "constructor_body" | "switch_block" => Block,
        "expression_statement" | "local_variable_declaration" | "return_statement" | "throw_statement"
        | "break_statement" | "continue_statement" | "yield_statement" | "assert_statement"
        | "explicit_constructor_invocation" => Statement,
        "if_statement" => Branch,
        "for_statement" | "enhanced_for_statement" | "while_statement" | "do_statement" => Loop,
        "switch_expression" => Switch,
        "switch_block_statement_group" | "switch_rule" => CaseGroup,
        "try_statement" | "try_with_resources_statement" => Try,
        "catch_clause" => Catch,
        "finally_clause" => Finally,
        "synchronized_statement" => Guarded,
        "labeled_statement" => Labeled,
        "ternary_expression" => Conditional,
        "assignment_expression" => Assignment,
        "update_expression" => Increment,
        "variable_declarator" | "resource" => Declarator,
        "formal_parameter" | "spread_parameter" | "catch_formal_parameter" => Parameter,
        "formal_parameters" | "inferred_parameters" => Parameters,
        "field_access" => FieldAccess,
        "array_access" => ArrayAccess,
        "identifier" => Name,
        "modifiers" => Modifiers,
        "marker_annotation" | "annotation" => Annotation,
        _ => Other,
    }
}

fn role_of(parent_kind: &str, field: Option<&str>) -> Role {
    match field {
        Some("name" | "constructor" | "key") => Role::Name,
        Some("condition") => Role::Condition,
        Some("body" | "consequence") => Role::Body,
        Some("alternative") => Role::Alternative,
        Some("left") if parent_kind == "assignment_expression" => Role::Target,
        Some("right") if parent_kind == "assignment_expression" => Role::Value,
        Some("left" | "right" | "operand") => Role::Operand,
        Some("value") => Role::Value,
        Some("object" | "array" | "scope") => Role::Receiver,
        Some("arguments") => Role::Arguments,
        Some("parameters") => Role::Parameters,
        Some("type" | "element") => Role::Type,
        Some("init") => Role::Init,
        Some("update") => Role::Update,
        Some("field") => Role::Field,
        Some("index") => Role::Index,
        Some("resources") => Role::Resources,
        _ => Role::None,
    }
}

fn is_operator_token(kind: &str) -> bool {
    !kind.is_empty()
        && !kind.starts_with(|c: char| c.is_alphanumeric() || c == '_' || c == '@')
        && !matches!(kind, "(" | ")" | "{" | "}" | "[" | "]" | ";" | "," | "." | "\"")
}

struct Builder<'a> {
    src: &'a str,
    nodes: Vec<SyntaxNode>,
    comments: Vec<Span>,
    tokens: Vec<Token>,
}

impl Builder<'_> {
    fn text(&self, n: Node) -> &str {
        &self.src[n.start_byte()..n.end_byte()]
    }

    fn push(&mut self, node: SyntaxNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn build(&mut self, ts: Node, parent: Option<usize>, role: Role, in_modifier: bool) -> usize {
        let kind = ts.kind();
        let parent_kind = parent.map(|p| self.nodes[p].kind);
        let span = Span::new(ts.start_byte(), ts.end_byte());
        let mut construct = construct_of(kind, parent_kind);
        let id = self.push(SyntaxNode {
            kind,
            construct,
            role,
            label: None,
            category: NodeCategory::Other,
            span,
            depth: 1,
            size: 1,
            parent,
            children: Vec::new(),
            call: None,
        });
        let modifier_scope = in_modifier || matches!(construct, Construct::Modifiers | Construct::Annotation);

        if ATOMIC.contains(&kind) {
            let node = &mut self.nodes[id];
            node.label = Some(self.src[span.start..span.end].to_string());
            node.category = if modifier_scope {
                NodeCategory::Modifier
            } else if kind == "identifier" {
                NodeCategory::NameBearing
            } else {
                NodeCategory::Other
            };
            return id;
        }

        let mut children = Vec::new();
        let mut ops: Vec<&'static str> = Vec::new();
        let mut cursor = ts.walk();
        if cursor.goto_first_child() {
            loop {
                let child = cursor.node();
                let field = cursor.field_name();
                let ck = child.kind();
                if is_comment(ck) {
                    self.comments.push(Span::new(child.start_byte(), child.end_byte()));
                } else if !child.is_named() {
                    if kind == "modifiers" {
                        let text = self.text(child).to_string();
                        let leaf = self.push(SyntaxNode {
                            kind: "modifier",
                            construct: Construct::Other,
                            role: Role::None,
                            label: Some(text),
                            category: NodeCategory::Modifier,
                            span: Span::new(child.start_byte(), child.end_byte()),
                            depth: 1,
                            size: 1,
                            parent: Some(id),
                            children: Vec::new(),
                            call: None,
                        });
                        children.push(leaf);
                    } else if is_operator_token(ck) {
                        ops.push(ck);
                    }
                } else {
                    let c = self.build(child, Some(id), role_of(kind, field), modifier_scope);
                    children.push(c);
                }
                if !cursor.goto_next_sibling() {
                    break;
                }
            }
        }

        if kind == "binary_expression" && ops.iter().any(|o| matches!(*o, "&&" | "||")) {
            construct = Construct::ShortCircuit;
        }
        if kind == "switch_label" && self.src[span.start..span.end].trim_start().starts_with("case") {
            construct = Construct::CaseLabel;
        }
        let call = self.call_info(kind, &children);
        let node = &mut self.nodes[id];
        node.construct = construct;
        node.children = children;
        node.label = (!ops.is_empty()).then(|| ops.join(" "));
        node.category = if modifier_scope {
            NodeCategory::Modifier
        } else {
            NodeCategory::Other
        };
        node.call = call;
        id
    }

    fn call_info(&self, kind: &str, children: &[usize]) -> Option<CallInfo> {
        let with_role = |r: Role| children.iter().copied().find(|&c| self.nodes[c].role == r);
        let arity = with_role(Role::Arguments)
            .map(|a| self.nodes[a].children.len())
            .unwrap_or(0);
        let text = |id: usize| squash(&self.src[self.nodes[id].span.start..self.nodes[id].span.end]);
        match kind {
            "method_invocation" | "explicit_constructor_invocation" => Some(CallInfo {
                name: with_role(Role::Name).map(text)?,
                receiver: with_role(Role::Receiver).map(text),
                arity,
            }),
            "object_creation_expression" => {
                let ty = text(with_role(Role::Type)?);
                let base = ty.split('<').next().unwrap_or(&ty);
                let name = base.rsplit('.').next().unwrap_or(base).to_string();
                Some(CallInfo {
                    name,
                    receiver: None,
                    arity,
                })
            }
            _ => None,
        }
    }

    fn collect_tokens(&mut self, root: Node) {
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            let kind = n.kind();
            if is_comment(kind) {
                continue;
            }
            let span = Span::new(n.start_byte(), n.end_byte());
            let unit = matches!(kind, "string_literal" | "character_literal");
            if unit || n.child_count() == 0 {
                if span.is_empty() {
                    continue;
                }
                let text = &self.src[span.start..span.end];
                if IGNORED.contains(&text) {
                    continue;
                }
                let (class, text) = if n.is_named() && OPERANDS.contains(&kind) {
                    (TokenClass::Operand, text.to_string())
                } else {
                    let t = match text {
                        "(" => "()",
                        "[" => "[]",
                        t => t,
                    };
                    (TokenClass::Operator, t.to_string())
                };
                self.tokens.push(Token { span, class, text });
                continue;
            }
            let mut cursor = n.walk();
            let children: Vec<_> = n.children(&mut cursor).collect();
            stack.extend(children.into_iter().rev());
        }
    }
}
