use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::query::ast::{Formula, Query, Term};

/// Symbols a query may mention.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    pub relations: BTreeMap<String, usize>,
    pub functions: BTreeSet<String>,
    pub colors: BTreeSet<String>,
}

impl Schema {
    pub fn relations<'a>(rels: impl IntoIterator<Item = (&'a str, usize)>) -> Self {
        Self {
            relations: rels.into_iter().map(|(n, a)| (n.to_string(), a)).collect(),
            ..Self::default()
        }
    }

    pub fn functional<'a>(
        funcs: impl IntoIterator<Item = &'a str>,
        colors: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        Self {
            relations: BTreeMap::new(),
            functions: funcs.into_iter().map(str::to_string).collect(),
            colors: colors.into_iter().map(str::to_string).collect(),
        }
    }

    fn atom_arity(&self, name: &str) -> Option<usize> {
        self.relations
            .get(name)
            .copied()
            .or_else(|| self.colors.contains(name).then_some(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Not,
    Eq,
    Neq,
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '&' => Tok::And,
            '|' => Tok::Or,
            '~' => Tok::Not,
            '=' => Tok::Eq,
            '!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Neq
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(Error::QuerySyntax {
                    pos: i,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        };
        i += 1;
        out.push((start, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

/// Either a term or an atom application, decided by what follows.
enum Piece {
    Name(String),
    Call(String, Vec<Piece>),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::QuerySyntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.and()?];
        while *self.peek() == Tok::Or {
            self.bump();
            parts.push(self.and()?);
        }
        Ok(Formula::or(parts))
    }

    fn and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.or()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Ident(k) if k == "exists" || k == "forall" => {
                self.bump();
                let mut vars = Vec::new();
                while let Tok::Ident(v) = self.peek().clone() {
                    if is_keyword(&v) {
                        return self.fail(format!("keyword {v:?} used as a variable"));
                    }
                    self.bump();
                    vars.push(v);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    }
                }
                if vars.is_empty() {
                    return self.fail("expected a variable after quantifier");
                }
                self.expect(Tok::Dot, "'.' after quantified variables")?;
                let mut body = self.or()?;
                for v in vars.into_iter().rev() {
                    body = if k == "exists" {
                        Formula::exists(v, body)
                    } else {
                        Formula::forall(v, body)
                    };
                }
                Ok(body)
            }
            Tok::Ident(k) if k == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(k) if k == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(_) => self.atomic(),
            _ => self.fail("expected a formula"),
        }
    }

    fn piece(&mut self) -> Result<Piece> {
        let name = match self.bump() {
            Tok::Ident(n) if !is_keyword(&n) => n,
            _ => {
                self.at = self.at.saturating_sub(1);
                return self.fail("expected an identifier");
            }
        };
        if *self.peek() != Tok::LParen {
            return Ok(Piece::Name(name));
        }
        self.bump();
        let mut args = vec![self.piece()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.piece()?);
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(Piece::Call(name, args))
    }

    fn term(&self, p: Piece, pos: usize) -> Result<Term> {
        match p {
            Piece::Name(v) => Ok(Term::Var(v)),
            Piece::Call(f, mut args) if args.len() == 1 => {
                Ok(Term::app(f, self.term(args.pop().unwrap(), pos)?))
            }
            Piece::Call(f, _) => Err(Error::QuerySyntax {
                pos,
                msg: format!("{f} applied to several arguments inside a term"),
            }),
        }
    }

    fn atomic(&mut self) -> Result<Formula> {
        let pos = self.pos();
        let left = self.piece()?;
        match self.peek() {
            Tok::Eq | Tok::Neq => {
                let neg = *self.peek() == Tok::Neq;
                self.bump();
                let rpos = self.pos();
                let right = self.piece()?;
                let eq = Formula::eq(self.term(left, pos)?, self.term(right, rpos)?);
                Ok(if neg { Formula::not(eq) } else { eq })
            }
            _ => match left {
                Piece::Call(r, args) => Ok(Formula::Atom(
                    r,
                    args.into_iter()
                        .map(|a| self.term(a, pos))
                        .collect::<Result<_>>()?,
                )),
                Piece::Name(n) => Err(Error::QuerySyntax {
                    pos,
                    msg: format!("bare identifier {n:?} is not a formula"),
                }),
            },
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "exists" | "forall" | "true" | "false")
}

/// Parses a formula without checking it against a schema.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.or()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(f)
}

/// Parses a query and resolves its symbols against `schema`.
pub fn parse_query(text: &str, schema: &Schema) -> Result<Query> {
    let f = parse_formula(text)?;
    check(&f, schema)?;
    Ok(Query::new(f))
}

/// Checks symbols, arities and the no-shadowing rule.
pub fn check(f: &Formula, schema: &Schema) -> Result<()> {
    let mut bound = HashSet::new();
    for v in f.bound_vars() {
        if !bound.insert(v) {
            return Err(Error::Shadowing(v.to_string()));
        }
    }
    if let Some(v) = f.free_vars().into_iter().find(|v| bound.contains(v.as_str())) {
        return Err(Error::Shadowing(v));
    }
    let mut err = None;
    let term = |t: &Term| -> Result<()> {
        for g in t.chain() {
            if !schema.functions.contains(g) {
                return Err(Error::UnknownSymbol(g.to_string()));
            }
        }
        Ok(())
    };
    f.walk(&mut |g| {
        if err.is_some() {
            return;
        }
        let r = match g {
            Formula::Atom(name, args) => match schema.atom_arity(name) {
                None => Err(Error::UnknownSymbol(name.clone())),
                Some(a) if a != args.len() => Err(Error::Arity {
                    name: name.clone(),
                    expected: a,
                    got: args.len(),
                }),
                Some(_) => args.iter().try_for_each(&term),
            },
            Formula::Eq(a, b) => term(a).and_then(|_| term(b)),
            _ => Ok(()),
        };
        if let Err(e) = r {
            err = Some(e);
        }
    });
    err.map_or(Ok(()), Err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph() -> Schema {
        Schema::relations([("E", 2), ("P", 1)])
    }

    #[test]
    fn distance_two() {
        let q = parse_query("exists z. E(x,z) & E(z,y)", &graph()).unwrap();
        assert_eq!(q.free, vec!["x", "y"]);
        assert_eq!(q.formula.quantifier_rank(), 1);
    }

    #[test]
    fn induced_path() {
        let q = parse_query("E(x,y) & E(y,z) & ~E(x,z)", &graph()).unwrap();
        assert_eq!(q.free, vec!["x", "y", "z"]);
    }

    #[test]
    fn forall_is_dualized() {
        let q = parse_query("forall x. P(x)", &graph()).unwrap();
        let expected = Formula::not(Formula::exists(
            "x",
            Formula::not(Formula::atom("P", vec![Term::var("x")])),
        ));
        assert_eq!(q.formula, expected);
    }

    #[test]
    fn precedence() {
        let f = parse_formula("~P(x) & P(y) | P(z)").unwrap();
        let p = |v: &str| Formula::atom("P", vec![Term::var(v)]);
        assert_eq!(
            f,
            Formula::Or(vec![Formula::And(vec![Formula::not(p("x")), p("y")]), p("z")])
        );
    }

    #[test]
    fn function_terms() {
        let s = Schema::functional(["f", "g"], ["C"]);
        let q = parse_query("f(g(x)) = y & x != y & C(f(y))", &s).unwrap();
        assert_eq!(q.free, vec!["x", "y"]);
        let Formula::And(parts) = &q.formula else { panic!() };
        assert_eq!(parts[0], Formula::eq(Term::app("f", Term::app("g", Term::var("x"))), Term::var("y")));
        assert!(matches!(&parts[1], Formula::Not(_)));
    }

    #[test]
    fn rejections() {
        let s = graph();
        assert!(matches!(parse_query("E(x)", &s), Err(Error::Arity { .. })));
        assert!(matches!(parse_query("R(x)", &s), Err(Error::UnknownSymbol(_))));
        assert!(matches!(parse_query("f(x) = y", &s), Err(Error::UnknownSymbol(_))));
        assert!(matches!(
            parse_query("exists x. exists x. P(x)", &s),
            Err(Error::Shadowing(_))
        ));
        assert!(matches!(parse_query("P(x) & exists x. P(x)", &s), Err(Error::Shadowing(_))));
        assert!(matches!(parse_query("E(x,", &s), Err(Error::QuerySyntax { .. })));
        assert!(matches!(parse_query("x", &s), Err(Error::QuerySyntax { .. })));
        assert!(matches!(parse_query("P(x) P(y)", &s), Err(Error::QuerySyntax { .. })));
    }

    #[test]
    fn display_round_trips() {
        let s = graph();
        for text in [
            "exists z. E(x,z) & E(z,y)",
            "E(x,y) & E(y,z) & ~E(x,z)",
            "P(x) & (exists y. E(x,y) | x = y) & x != z",
            "~(P(x) | P(y))",
        ] {
            let q = parse_query(text, &s).unwrap();
            let again = parse_query(&q.to_string(), &s).unwrap();
            assert_eq!(q, again, "{text}");
        }
    }
}
