//! Reader for the TPDB-style concrete syntax:
//!
//! ```text
//! spec  := block+
//! block := "(VAR" ident* ")" | "(RULES" rule* ")" | "(COMMENT" any* ")"
//! rule  := term "->" term | term "->=" term
//! term  := ident | ident "(" term ("," term)* ")"
//! ```
//!
//! `STRATEGY` and `STARTTERM` blocks found in TPDB files are skipped.

use std::collections::BTreeSet;

use super::{Pos, Rule, Term, Trs, TrsError};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Comma,
    Arrow,
    WeakArrow,
    Ident(String),
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Open => f.write_str("`(`"),
            Tok::Close => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::WeakArrow => f.write_str("`->=`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
        }
    }
}

struct Lexer {
    chars: Vec<char>,
    at: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            at: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = *self.chars.get(self.at)?;
        self.at += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.at).is_some_and(|c| c.is_whitespace()) {
            self.bump();
        }
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.chars.get(self.at + i) == Some(&c))
    }

    fn peek(&mut self) -> Option<(Tok, Pos)> {
        let (save_at, save_line, save_col) = (self.at, self.line, self.col);
        let t = self.next_tok();
        self.at = save_at;
        self.line = save_line;
        self.col = save_col;
        t
    }

    fn next_tok(&mut self) -> Option<(Tok, Pos)> {
        self.skip_ws();
        let pos = self.pos();
        let c = *self.chars.get(self.at)?;
        let tok = match c {
            '(' => {
                self.bump();
                Tok::Open
            }
            ')' => {
                self.bump();
                Tok::Close
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            _ if self.starts_with("->=") => {
                (0..3).for_each(|_| {
                    self.bump();
                });
                Tok::WeakArrow
            }
            _ if self.starts_with("->") => {
                (0..2).for_each(|_| {
                    self.bump();
                });
                Tok::Arrow
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.get(self.at) {
                    if c.is_whitespace()
                        || c == '('
                        || c == ')'
                        || c == ','
                        || self.starts_with("->")
                    {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Tok::Ident(s)
            }
        };
        Some((tok, pos))
    }

    /// Skips raw text up to and including the parenthesis closing the current block.
    fn skip_block(&mut self) -> Result<(), TrsError> {
        let start = self.pos();
        let mut depth = 1usize;
        while let Some(c) = self.bump() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                _ => {}
            }
        }
        Err(TrsError::Syntax {
            pos: start,
            msg: "unterminated block".into(),
        })
    }
}

struct Parser {
    lex: Lexer,
    vars: BTreeSet<String>,
}

fn syntax(pos: Pos, msg: impl Into<String>) -> TrsError {
    TrsError::Syntax {
        pos,
        msg: msg.into(),
    }
}

impl Parser {
    fn term(&mut self) -> Result<(Term, Pos), TrsError> {
        let (name, pos) = match self.lex.next_tok() {
            Some((Tok::Ident(s), pos)) => (s, pos),
            Some((t, pos)) => return Err(syntax(pos, format!("expected a term, found {t}"))),
            None => {
                return Err(syntax(
                    self.lex.pos(),
                    "expected a term, found end of input",
                ))
            }
        };
        let has_args = matches!(self.lex.peek(), Some((Tok::Open, _)));
        if self.vars.contains(&name) {
            if has_args {
                return Err(TrsError::VariableApplied {
                    var: name,
                    pos: Some(pos),
                });
            }
            return Ok((Term::var(&name), pos));
        }
        if !has_args {
            return Ok((Term::constant(&name), pos));
        }
        self.lex.next_tok();
        let mut args = Vec::new();
        if matches!(self.lex.peek(), Some((Tok::Close, _))) {
            self.lex.next_tok();
            return Ok((Term::app(&name, args), pos));
        }
        loop {
            args.push(self.term()?.0);
            match self.lex.next_tok() {
                Some((Tok::Comma, _)) => continue,
                Some((Tok::Close, _)) => break,
                Some((t, p)) => return Err(syntax(p, format!("expected `,` or `)`, found {t}"))),
                None => return Err(syntax(self.lex.pos(), "unclosed argument list")),
            }
        }
        Ok((Term::app(&name, args), pos))
    }

    fn parse(mut self) -> Result<Vec<(Rule, Option<Pos>)>, TrsError> {
        let mut rules = Vec::new();
        let mut blocks = 0;
        while let Some((tok, pos)) = self.lex.next_tok() {
            if tok != Tok::Open {
                return Err(syntax(
                    pos,
                    format!("expected `(` opening a block, found {tok}"),
                ));
            }
            blocks += 1;
            let (kw, kw_pos) = match self.lex.next_tok() {
                Some((Tok::Ident(s), p)) => (s, p),
                Some((t, p)) => {
                    return Err(syntax(p, format!("expected block keyword, found {t}")))
                }
                None => return Err(syntax(self.lex.pos(), "expected block keyword")),
            };
            match kw.as_str() {
                "VAR" => loop {
                    match self.lex.next_tok() {
                        Some((Tok::Ident(x), _)) => {
                            self.vars.insert(x);
                        }
                        Some((Tok::Close, _)) => break,
                        Some((t, p)) => {
                            return Err(syntax(p, format!("expected variable name, found {t}")))
                        }
                        None => return Err(syntax(self.lex.pos(), "unterminated VAR block")),
                    }
                },
                "RULES" => loop {
                    match self.lex.peek() {
                        Some((Tok::Close, _)) => {
                            self.lex.next_tok();
                            break;
                        }
                        None => return Err(syntax(self.lex.pos(), "unterminated RULES block")),
                        _ => {}
                    }
                    let (lhs, rule_pos) = self.term()?;
                    let strict = match self.lex.next_tok() {
                        Some((Tok::Arrow, _)) => true,
                        Some((Tok::WeakArrow, _)) => false,
                        Some((t, p)) => {
                            return Err(syntax(p, format!("expected `->` or `->=`, found {t}")))
                        }
                        None => return Err(syntax(self.lex.pos(), "expected `->` or `->=`")),
                    };
                    let (rhs, _) = self.term()?;
                    rules.push((Rule { lhs, rhs, strict }, Some(rule_pos)));
                },
                "COMMENT" | "STRATEGY" | "STARTTERM" => self.lex.skip_block()?,
                other => return Err(syntax(kw_pos, format!("unknown block `{other}`"))),
            }
        }
        if blocks == 0 {
            return Err(syntax(self.lex.pos(), "empty input"));
        }
        Ok(rules)
    }
}

/// Parses a (relative) TRS and classifies its signature.
pub fn parse_trs(text: &str) -> Result<Trs, TrsError> {
    let parser = Parser {
        lex: Lexer::new(text),
        vars: BTreeSet::new(),
    };
    let rules = parser.parse()?;
    Trs::with_positions(rules, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trs::Symbol;

    #[test]
    fn minimal_input() {
        let trs = parse_trs("(VAR x)(RULES f(x) -> x)").unwrap();
        assert_eq!(trs.rules().len(), 1);
        assert!(trs.rules()[0].strict);
        assert!(trs.is_defined(&Symbol::new("f")));
        assert_eq!(trs.constructors().count(), 0);
    }

    #[test]
    fn variable_lhs_is_rejected() {
        let err = parse_trs("(VAR x)(RULES x -> f(x))").unwrap_err();
        assert!(matches!(err, TrsError::VariableLhs { .. }), "{err}");
    }

    #[test]
    fn extra_variable_is_rejected() {
        let err = parse_trs("(VAR x y)(RULES f(x) -> y)").unwrap_err();
        assert!(
            matches!(err, TrsError::ExtraVariable { ref var, .. } if var == "y"),
            "{err}"
        );
    }

    #[test]
    fn arity_clash_is_rejected() {
        let err = parse_trs("(VAR x)(RULES f(x) -> f(x, x))").unwrap_err();
        assert!(
            matches!(
                err,
                TrsError::ArityClash {
                    expected: 1,
                    found: 2,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn syntax_errors_report_positions() {
        let err = parse_trs("(VAR x)\n(RULES f(x -> x)").unwrap_err();
        match err {
            TrsError::Syntax { pos, .. } => assert_eq!(pos.line, 2),
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            parse_trs("(RULES f(a) -> )"),
            Err(TrsError::Syntax { .. })
        ));
        assert!(matches!(parse_trs(""), Err(TrsError::Syntax { .. })));
        assert!(matches!(parse_trs("(FOO a)"), Err(TrsError::Syntax { .. })));
    }

    #[test]
    fn weak_rules_comments_and_strategy() {
        let trs = parse_trs(
            "(COMMENT nested (parens) are fine)\n(VAR x)\n(STRATEGY INNERMOST)\n(RULES f(x) ->= g(x) g(a) -> a)",
        )
        .unwrap();
        assert!(!trs.rules()[0].strict);
        assert!(trs.rules()[1].strict);
    }

    #[test]
    fn arrows_need_no_surrounding_space() {
        let trs = parse_trs("(VAR x)(RULES f(x)->x g(x)->=x)").unwrap();
        assert!(trs.rules()[0].strict && !trs.rules()[1].strict);
    }

    #[test]
    fn applied_variable_is_rejected() {
        assert!(matches!(
            parse_trs("(VAR x)(RULES f(x) -> x(a))"),
            Err(TrsError::VariableApplied { .. })
        ));
    }
}
