//! Text syntax for programs.
//!
//! ```text
//! 0.05::burglary.                    % probability label
//! 0.5,0.3,0.2,0.5::foo(a,b).        % opinion label ⟨b,d,u,a⟩
//! alarm :- burglary.                 % background clause
//! smokes(X) :- friend(X,Y), smokes(Y).
//! path :- edge, \+blocked.           % negation on algebraic facts only
//! friend(a,b).                       % deterministic clause (empty body)
//! query(alarm).
//! evidence(smokes(a), true).
//! ```
//!
//! `%` starts a comment running to the end of the line. Identifiers start
//! with a lowercase letter, variables with an uppercase letter or `_`.

use crate::error::{Error, Result};
use crate::opinion::Opinion;
use crate::program::{Atom, Clause, LabelExpr, Literal, Program, Term};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    Variable(String),
    Number(f64),
    LabelSep,  // ::
    ClauseSep, // :-
    Negation,  // \+
    Comma,
    Dot,
    LParen,
    RParen,
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    token: Token,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '%' {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(&c) = self.chars.peek() else {
                out.push(Spanned {
                    token: Token::Eof,
                    line,
                    col,
                });
                return Ok(out);
            };
            let token = match c {
                '(' => {
                    self.bump();
                    Token::LParen
                }
                ')' => {
                    self.bump();
                    Token::RParen
                }
                ',' => {
                    self.bump();
                    Token::Comma
                }
                '.' => {
                    self.bump();
                    Token::Dot
                }
                ':' => {
                    self.bump();
                    match self.chars.peek() {
                        Some(':') => {
                            self.bump();
                            Token::LabelSep
                        }
                        Some('-') => {
                            self.bump();
                            Token::ClauseSep
                        }
                        _ => return Err(self.error("expected '::' or ':-'")),
                    }
                }
                '\\' => {
                    self.bump();
                    if self.chars.peek() == Some(&'+') {
                        self.bump();
                        Token::Negation
                    } else {
                        return Err(self.error("expected '\\+'"));
                    }
                }
                c if c.is_ascii_digit() => {
                    let mut s = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_digit() || c == '.' {
                            // A dot not followed by a digit terminates the
                            // statement rather than the number.
                            if c == '.' {
                                let mut ahead = self.chars.clone();
                                ahead.next();
                                if !ahead.peek().is_some_and(|d| d.is_ascii_digit()) {
                                    break;
                                }
                            }
                            s.push(c);
                            self.bump();
                        } else if c == 'e' || c == 'E' {
                            s.push(c);
                            self.bump();
                            if let Some(&sign) = self.chars.peek() {
                                if sign == '+' || sign == '-' {
                                    s.push(sign);
                                    self.bump();
                                }
                            }
                        } else {
                            break;
                        }
                    }
                    let value: f64 = s
                        .parse()
                        .map_err(|_| self.error(format!("invalid number '{s}'")))?;
                    Token::Number(value)
                }
                c if c.is_ascii_lowercase() => {
                    let mut s = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            s.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Token::Ident(s)
                }
                c if c.is_ascii_uppercase() || c == '_' => {
                    let mut s = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            s.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Token::Variable(s)
                }
                other => return Err(self.error(format!("unexpected character '{other}'"))),
            };
            out.push(Spanned { token, line, col });
        }
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, at: &Spanned, message: impl Into<String>) -> Error {
        Error::Parse {
            line: at.line,
            col: at.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<()> {
        let t = self.next();
        if t.token == token {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("expected {what}, found {:?}", t.token)))
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let t = self.next();
        let Token::Ident(predicate) = t.token else {
            return Err(self.error_at(&t, format!("expected an atom, found {:?}", t.token)));
        };
        let mut args = Vec::new();
        if self.peek().token == Token::LParen {
            self.next();
            loop {
                let t = self.next();
                match &t.token {
                    Token::Ident(c) => args.push(Term::Constant(c.clone())),
                    Token::Variable(v) => args.push(Term::Variable(v.clone())),
                    other => {
                        let msg = format!("expected a term, found {other:?}");
                        return Err(self.error_at(&t, msg));
                    }
                }
                let t = self.next();
                match &t.token {
                    Token::Comma => continue,
                    Token::RParen => break,
                    other => {
                        let msg = format!("expected ',' or ')', found {other:?}");
                        return Err(self.error_at(&t, msg));
                    }
                }
            }
        }
        Ok(Atom { predicate, args })
    }

    fn ground_atom(&mut self, context: &str) -> Result<Atom> {
        let at = self.peek().clone();
        let atom = self.atom()?;
        if !atom.is_ground() {
            return Err(self.error_at(&at, format!("{context} must be ground")));
        }
        Ok(atom)
    }

    fn labelled_fact(&mut self) -> Result<(Atom, LabelExpr)> {
        let at = self.peek().clone();
        let mut numbers = Vec::new();
        loop {
            let t = self.next();
            let Token::Number(v) = t.token else {
                return Err(self.error_at(&t, format!("expected a number, found {:?}", t.token)));
            };
            numbers.push(v);
            let t = self.next();
            match &t.token {
                Token::Comma => continue,
                Token::LabelSep => break,
                other => {
                    let msg = format!("expected ',' or '::', found {other:?}");
                    return Err(self.error_at(&t, msg));
                }
            }
        }
        let label = match numbers.as_slice() {
            [p] => {
                if !(0.0..=1.0).contains(p) {
                    return Err(self.error_at(&at, format!("label {p} outside [0, 1]")));
                }
                LabelExpr::Prob(*p)
            }
            [b, d, u, a] => {
                let op =
                    Opinion::new(*b, *d, *u, *a).map_err(|e| self.error_at(&at, e.to_string()))?;
                LabelExpr::Opinion(op)
            }
            other => {
                return Err(self.error_at(
                    &at,
                    format!(
                        "a label has 1 (probability) or 4 (opinion) numbers, found {}",
                        other.len()
                    ),
                ))
            }
        };
        let atom = self.ground_atom("an algebraic fact")?;
        self.expect(Token::Dot, "'.'")?;
        Ok((atom, label))
    }

    fn clause(&mut self) -> Result<Clause> {
        let head = self.atom()?;
        let t = self.next();
        match &t.token {
            Token::Dot => Ok(Clause {
                head,
                body: Vec::new(),
            }),
            Token::ClauseSep => {
                let mut body = Vec::new();
                loop {
                    let negated = if self.peek().token == Token::Negation {
                        self.next();
                        true
                    } else {
                        false
                    };
                    let atom = self.atom()?;
                    body.push(Literal { atom, negated });
                    let t = self.next();
                    match &t.token {
                        Token::Comma => continue,
                        Token::Dot => break,
                        other => {
                            let msg = format!("expected ',' or '.', found {other:?}");
                            return Err(self.error_at(&t, msg));
                        }
                    }
                }
                Ok(Clause { head, body })
            }
            other => {
                let msg = format!("expected '.' or ':-', found {other:?}");
                Err(self.error_at(&t, msg))
            }
        }
    }

    fn program(&mut self) -> Result<Program> {
        let mut program = Program::default();
        loop {
            match &self.peek().token {
                Token::Eof => break,
                Token::Number(_) => {
                    let (atom, label) = self.labelled_fact()?;
                    program.facts.push((atom, label));
                }
                Token::Ident(name) if name == "query" => {
                    self.next();
                    self.expect(Token::LParen, "'('")?;
                    let atom = self.ground_atom("a query")?;
                    self.expect(Token::RParen, "')'")?;
                    self.expect(Token::Dot, "'.'")?;
                    program.queries.push(atom);
                }
                Token::Ident(name) if name == "evidence" => {
                    self.next();
                    self.expect(Token::LParen, "'('")?;
                    let atom = self.ground_atom("an evidence atom")?;
                    self.expect(Token::Comma, "','")?;
                    let t = self.next();
                    let value = match &t.token {
                        Token::Ident(v) if v == "true" => true,
                        Token::Ident(v) if v == "false" => false,
                        other => {
                            return Err(self.error_at(
                                &t,
                                format!("expected 'true' or 'false', found {other:?}"),
                            ))
                        }
                    };
                    self.expect(Token::RParen, "')'")?;
                    self.expect(Token::Dot, "'.'")?;
                    program.evidence.push((atom, value));
                }
                Token::Ident(_) => {
                    let clause = self.clause()?;
                    program.clauses.push(clause);
                }
                other => {
                    let t = self.peek().clone();
                    return Err(self.error_at(&t, format!("unexpected {other:?}")));
                }
            }
        }
        Ok(program)
    }
}

/// Parses a program from text. Ground structural constraints (duplicate
/// facts, clause heads unifying with facts, negation on ground non-facts)
/// are checked here; variable clauses are checked after grounding.
pub fn parse_program(text: &str) -> Result<Program> {
    let tokens = Lexer::new(text).tokens()?;
    let mut parser = Parser { tokens, pos: 0 };
    let program = parser.program()?;
    if program.is_ground() {
        program.validate()?;
    } else {
        // Validate what is already ground; grounding re-validates the rest.
        let ground_only = Program {
            facts: program.facts.clone(),
            clauses: program
                .clauses
                .iter()
                .filter(|c| c.head.is_ground() && c.body.iter().all(|l| l.atom.is_ground()))
                .cloned()
                .collect(),
            queries: program.queries.clone(),
            evidence: program.evidence.clone(),
        };
        ground_only.validate()?;
    }
    Ok(program)
}
