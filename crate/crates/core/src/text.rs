//! Canonical text form for process trees.
//!
//! Grammar (whitespace between tokens is insignificant):
//!
//! ```text
//! tree     := node deps?
//! node     := "'" label "'"              activity leaf, label free of ' and \
//!           | "tau"                      silent leaf
//!           | "->" "(" nodes ")"         sequence
//!           | "X"  weights? "(" nodes ")"  exclusive choice
//!           | "+"  "(" nodes ")"         parallel
//!           | "O"  weights? "(" nodes ")"  inclusive choice
//!           | "*" "[" float "]" "(" node "," node ")"   loop: body, redo; the
//!                                        bracket holds the exit probability
//! nodes    := node ("," node)*
//! weights  := "[" float (":" float)* "]"   one weight per child, positive
//! deps     := "deps" dep ("," dep)*
//! dep      := nodeid "." branch "->" nodeid "." branch
//! ```
//!
//! Node ids in `deps` are preorder indices (root = 0, children depth-first,
//! loop body before redo). Writing always emits weights and the loop exit
//! probability, so `write_tree` output is canonical and round-trips exactly.

use crate::tree::{LongTermDep, ProcessTree, TreeNode};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("parse error at byte {0}: {1}")]
    Parse(usize, String),
    #[error("label {0:?} contains a quote or backslash")]
    BadLabel(String),
}

/// Renders a tree in canonical text form.
pub fn write_tree(tree: &ProcessTree) -> Result<String, TextError> {
    let mut out = String::new();
    write_node(&tree.root, &mut out)?;
    if !tree.ltdeps.is_empty() {
        out.push_str(" deps ");
        for (i, dep) in tree.ltdeps.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(
                out,
                "{}.{}->{}.{}",
                dep.source.0, dep.source.1, dep.target.0, dep.target.1
            );
        }
    }
    Ok(out)
}

fn write_node(node: &TreeNode, out: &mut String) -> Result<(), TextError> {
    match node {
        TreeNode::Activity(label) => {
            if label.contains('\'') || label.contains('\\') {
                return Err(TextError::BadLabel(label.clone()));
            }
            let _ = write!(out, "'{label}'");
        }
        TreeNode::Silent => out.push_str("tau"),
        TreeNode::Seq(cs) => write_op("->", None, cs, out)?,
        TreeNode::And(cs) => write_op("+", None, cs, out)?,
        TreeNode::Xor { children, weights } => write_op("X", Some(weights), children, out)?,
        TreeNode::Or { children, weights } => write_op("O", Some(weights), children, out)?,
        TreeNode::Loop {
            body,
            redo,
            exit_prob,
        } => {
            let _ = write!(out, "*[{exit_prob}]( ");
            write_node(body, out)?;
            out.push_str(", ");
            write_node(redo, out)?;
            out.push_str(" )");
        }
    }
    Ok(())
}

fn write_op(
    tag: &str,
    weights: Option<&[f64]>,
    children: &[TreeNode],
    out: &mut String,
) -> Result<(), TextError> {
    out.push_str(tag);
    if let Some(ws) = weights {
        out.push('[');
        for (i, w) in ws.iter().enumerate() {
            if i > 0 {
                out.push(':');
            }
            let _ = write!(out, "{w}");
        }
        out.push(']');
    }
    out.push_str("( ");
    for (i, c) in children.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_node(c, out)?;
    }
    out.push_str(" )");
    Ok(())
}

/// Parses the canonical text form back into a tree (validated).
pub fn parse_tree(input: &str) -> Result<ProcessTree, TextError> {
    let mut p = Parser {
        bytes: input.as_bytes(),
        pos: 0,
    };
    let root = p.node()?;
    p.skip_ws();
    let mut ltdeps = Vec::new();
    if p.eat_word("deps") {
        loop {
            ltdeps.push(p.dep()?);
            p.skip_ws();
            if !p.eat(b',') {
                break;
            }
        }
    }
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("trailing input"));
    }
    ProcessTree::new(root, ltdeps).map_err(|e| TextError::Parse(0, e.to_string()))
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> TextError {
        TextError::Parse(self.pos, msg.to_string())
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), TextError> {
        self.skip_ws();
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {:?}", b as char)))
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        if self.bytes[self.pos..].starts_with(word.as_bytes()) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64, TextError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_digit() || b == b'.' || b == b'-' || b == b'+' || b == b'e' || b == b'E' {
                self.pos += 1;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("expected number"))
    }

    fn integer(&mut self) -> Result<usize, TextError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("expected integer"))
    }

    fn node(&mut self) -> Result<TreeNode, TextError> {
        self.skip_ws();
        match self.peek() {
            Some(b'\'') => {
                self.pos += 1;
                let start = self.pos;
                while let Some(b) = self.peek() {
                    if b == b'\'' {
                        break;
                    }
                    if b == b'\\' {
                        return Err(self.err("backslash in label"));
                    }
                    self.pos += 1;
                }
                let label = std::str::from_utf8(&self.bytes[start..self.pos])
                    .map_err(|_| self.err("label is not utf-8"))?
                    .to_string();
                if !self.eat(b'\'') {
                    return Err(self.err("unterminated label"));
                }
                Ok(TreeNode::Activity(label))
            }
            Some(b't') if self.eat_word("tau") => Ok(TreeNode::Silent),
            Some(b'-') if self.eat_word("->") => Ok(TreeNode::Seq(self.child_list(None)?.0)),
            Some(b'+') => {
                self.pos += 1;
                Ok(TreeNode::And(self.child_list(None)?.0))
            }
            Some(b'X') => {
                self.pos += 1;
                let ws = self.opt_weights()?;
                let (children, weights) = self.child_list(ws)?;
                Ok(TreeNode::Xor { children, weights })
            }
            Some(b'O') => {
                self.pos += 1;
                let ws = self.opt_weights()?;
                let (children, weights) = self.child_list(ws)?;
                Ok(TreeNode::Or { children, weights })
            }
            Some(b'*') => {
                self.pos += 1;
                self.expect(b'[')?;
                let exit_prob = self.number()?;
                self.expect(b']')?;
                self.expect(b'(')?;
                let body = self.node()?;
                self.expect(b',')?;
                let redo = self.node()?;
                self.expect(b')')?;
                Ok(TreeNode::Loop {
                    body: Box::new(body),
                    redo: Box::new(redo),
                    exit_prob,
                })
            }
            _ => Err(self.err("expected node")),
        }
    }

    fn opt_weights(&mut self) -> Result<Option<Vec<f64>>, TextError> {
        self.skip_ws();
        if !self.eat(b'[') {
            return Ok(None);
        }
        let mut ws = vec![self.number()?];
        loop {
            self.skip_ws();
            if self.eat(b':') {
                ws.push(self.number()?);
            } else {
                break;
            }
        }
        self.expect(b']')?;
        Ok(Some(ws))
    }

    /// Parses "( node, node, ... )", pairing explicit weights when given and
    /// defaulting to uniform weights otherwise.
    fn child_list(
        &mut self,
        weights: Option<Vec<f64>>,
    ) -> Result<(Vec<TreeNode>, Vec<f64>), TextError> {
        self.expect(b'(')?;
        let mut children = vec![self.node()?];
        loop {
            self.skip_ws();
            if self.eat(b',') {
                children.push(self.node()?);
            } else {
                break;
            }
        }
        self.expect(b')')?;
        let weights = match weights {
            Some(ws) => {
                if ws.len() != children.len() {
                    return Err(self.err("weight count does not match child count"));
                }
                ws
            }
            None => vec![1.0; children.len()],
        };
        Ok((children, weights))
    }

    fn dep(&mut self) -> Result<LongTermDep, TextError> {
        let src_node = self.integer()?;
        self.expect(b'.')?;
        let src_branch = self.integer()?;
        self.skip_ws();
        if !self.eat_word("->") {
            return Err(self.err("expected ->"));
        }
        let tgt_node = self.integer()?;
        self.expect(b'.')?;
        let tgt_branch = self.integer()?;
        Ok(LongTermDep {
            source: (src_node, src_branch),
            target: (tgt_node, tgt_branch),
        })
    }
}
