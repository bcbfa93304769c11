//! Text format for decision trees.
//!
//! Grammar (whitespace-insensitive, `#` starts a comment to end of line):
//!
//! ```text
//! tree   ::= node | leaf
//! leaf   ::= '(' 'leaf' class-name ')'
//! node   ::= '(' feature-name branch+ ')'
//! branch ::= '(' value-name tree ')'
//! ```
//!
//! Every value of a node's feature must appear in exactly one branch.
//! Parsing resolves names against a caller-supplied [`FeatureSpace`] and
//! reports line/column positions on malformed input.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::space::{FeatureSpace, ValueId};
use crate::tree::{DecisionTree, NodeId, TreeBuilder, TreeError};

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl ParseError {
    fn new(pos: Pos, message: String) -> Self {
        ParseError {
            line: pos.line,
            column: pos.column,
            message,
        }
    }
}

/// Serializes a tree to a single line of the grammar above.
pub fn serialize_tree(tree: &DecisionTree) -> String {
    let mut out = String::new();
    write_node(tree, tree.root(), &mut out);
    out
}

fn write_node(tree: &DecisionTree, n: NodeId, out: &mut String) {
    let space = tree.space();
    match tree.feature_at(n) {
        None => {
            out.push_str("(leaf ");
            out.push_str(space.class_name(tree.class_at(n).expect("leaf has a class")));
            out.push(')');
        }
        Some(f) => {
            out.push('(');
            out.push_str(space.feature_name(f));
            for v in space.value_ids(f) {
                out.push_str(" (");
                out.push_str(space.value_name(f, v));
                out.push(' ');
                write_node(tree, tree.child(n, v).expect("internal node is total"), out);
                out.push(')');
            }
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: u32,
    column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    /// Next token with its starting position, skipping whitespace and
    /// `#`-comments.
    fn next_token(&mut self) -> Result<Option<(Token, Pos)>, ParseError> {
        loop {
            match self.chars.peek() {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('(') => {
                    let pos = self.pos;
                    self.bump();
                    return Ok(Some((Token::Open, pos)));
                }
                Some(')') => {
                    let pos = self.pos;
                    self.bump();
                    return Ok(Some((Token::Close, pos)));
                }
                Some(&c) => {
                    let pos = self.pos;
                    if !(c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')) {
                        return Err(ParseError::new(
                            pos,
                            alloc::format!("unexpected character {c:?}"),
                        ));
                    }
                    let mut atom = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-') {
                            atom.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    return Ok(Some((Token::Atom(atom), pos)));
                }
            }
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    space: Arc<FeatureSpace>,
    builder: TreeBuilder,
    /// Features used on the current path, for early duplicate detection.
    on_path: Vec<bool>,
}

impl<'a> Parser<'a> {
    fn expect(&mut self, what: &str) -> Result<(Token, Pos), ParseError> {
        match self.lexer.next_token()? {
            Some(t) => Ok(t),
            None => Err(ParseError::new(
                self.lexer.pos,
                alloc::format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    fn expect_atom(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.expect(what)? {
            (Token::Atom(a), pos) => Ok((a, pos)),
            (tok, pos) => Err(ParseError::new(
                pos,
                alloc::format!("expected {what}, found {}", describe(&tok)),
            )),
        }
    }

    fn expect_close(&mut self, what: &str) -> Result<(), ParseError> {
        match self.expect("')'")? {
            (Token::Close, _) => Ok(()),
            (tok, pos) => Err(ParseError::new(
                pos,
                alloc::format!("expected ')' to close {what}, found {}", describe(&tok)),
            )),
        }
    }

    fn parse_tree(&mut self) -> Result<NodeId, ParseError> {
        let (tok, pos) = self.expect("'('")?;
        if tok != Token::Open {
            return Err(ParseError::new(
                pos,
                alloc::format!("expected '(', found {}", describe(&tok)),
            ));
        }
        let (head, head_pos) = self.expect_atom("'leaf' or a feature name")?;
        if head == "leaf" {
            let (class_name, class_pos) = self.expect_atom("a class name")?;
            let class = self.space.class_by_name(&class_name).ok_or_else(|| {
                ParseError::new(class_pos, alloc::format!("unknown class {class_name:?}"))
            })?;
            self.expect_close("the leaf")?;
            self.builder
                .leaf(class)
                .map_err(|e| builder_error(head_pos, e))
        } else {
            let feature = self.space.feature_by_name(&head).ok_or_else(|| {
                ParseError::new(head_pos, alloc::format!("unknown feature {head:?}"))
            })?;
            if self.on_path[feature.index()] {
                return Err(ParseError::new(
                    head_pos,
                    alloc::format!("feature {head:?} repeated on a path"),
                ));
            }
            self.on_path[feature.index()] = true;

            let arity = self.space.num_values(feature);
            let mut children: Vec<Option<NodeId>> = alloc::vec![None; arity];
            loop {
                match self.expect("a branch or ')'")? {
                    (Token::Close, close_pos) => {
                        if let Some(missing) = children.iter().position(|c| c.is_none()) {
                            let name = self.space.value_name(feature, ValueId(missing as u16));
                            return Err(ParseError::new(
                                close_pos,
                                alloc::format!(
                                    "node for feature {head:?} is missing a branch for value {name:?}"
                                ),
                            ));
                        }
                        break;
                    }
                    (Token::Open, _) => {
                        let (value_name, value_pos) = self.expect_atom("a value name")?;
                        let value =
                            self.space.value_by_name(feature, &value_name).ok_or_else(|| {
                                ParseError::new(
                                    value_pos,
                                    alloc::format!(
                                        "unknown value {value_name:?} for feature {head:?}"
                                    ),
                                )
                            })?;
                        if children[value.index()].is_some() {
                            return Err(ParseError::new(
                                value_pos,
                                alloc::format!("duplicate branch for value {value_name:?}"),
                            ));
                        }
                        let child = self.parse_tree()?;
                        self.expect_close("the branch")?;
                        children[value.index()] = Some(child);
                    }
                    (tok, pos) => {
                        return Err(ParseError::new(
                            pos,
                            alloc::format!("expected a branch or ')', found {}", describe(&tok)),
                        ));
                    }
                }
            }
            self.on_path[feature.index()] = false;
            let children: Vec<NodeId> = children.into_iter().map(|c| c.expect("checked")).collect();
            self.builder
                .internal(feature, children)
                .map_err(|e| builder_error(head_pos, e))
        }
    }
}

fn describe(tok: &Token) -> String {
    match tok {
        Token::Open => "'('".to_owned(),
        Token::Close => "')'".to_owned(),
        Token::Atom(a) => alloc::format!("{a:?}"),
    }
}

fn builder_error(pos: Pos, e: TreeError) -> ParseError {
    ParseError::new(pos, alloc::format!("{e}"))
}

/// Parses one tree against `space`. Extra tokens after the tree are
/// rejected; `#` comment lines (including `#space` headers) are skipped.
pub fn parse_tree(text: &str, space: &Arc<FeatureSpace>) -> Result<DecisionTree, ParseError> {
    let mut parser = Parser {
        lexer: Lexer::new(text),
        space: space.clone(),
        builder: TreeBuilder::new(space.clone()),
        on_path: alloc::vec![false; space.num_features()],
    };
    let root = parser.parse_tree()?;
    if let Some((tok, pos)) = parser.lexer.next_token()? {
        return Err(ParseError::new(
            pos,
            alloc::format!("trailing input after the tree: {}", describe(&tok)),
        ));
    }
    let end = parser.lexer.pos;
    parser.builder.build(root).map_err(|e| builder_error(end, e))
}
