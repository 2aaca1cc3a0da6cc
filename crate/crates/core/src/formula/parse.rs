//! Recursive-descent parser for the surface syntax.
//!
//! ```text
//! formula  := iff
//! iff      := imp ("<->" imp)*            left associative
//! imp      := or ("->" imp)?              right associative
//! or       := and ("|" and)*
//! and      := unary ("&" unary)*
//! unary    := "!" unary | "B" NAT unary | "E" "{" natlist "}" ("^" NAT)? unary
//!           | "CB" "{" natlist "}" unary | atom
//! atom     := IDENT | IDENT "@" NAT | "true" | "false" | "(" formula ")" | probcmp
//! probcmp  := term ("+" term)* (">=" | "<=" | "=" | ">" | "<") rational
//! term     := (rational "*")? "Pr" NAT "(" formula ")"
//! rational := "-"? NAT ("/" NAT)?
//! ```
//!
//! `B1`, `Pr2` and friends may be written with or without a space before the
//! agent number.

use super::{
    AgentId, AgentSet, CmpOp, IndexedPropId, PropId, SurfaceFormula, SurfaceProb, SurfaceTerm,
};
use crate::rational::Rational;
use num_bigint::BigInt;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown agent {index} at byte {offset}: agents are numbered from 1")]
    UnknownAgent { offset: usize, index: String },
    #[error("probability terms at byte {offset} mix agents {first} and {second}")]
    MixedAgents {
        offset: usize,
        first: AgentId,
        second: AgentId,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownAgent { offset, .. }
            | ParseError::MixedAgents { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(String),
    /// `B`, optionally with the agent glued on (`B2`).
    B(Option<String>),
    Pr(Option<String>),
    Cb,
    E,
    True,
    False,
    Bang,
    Amp,
    Bar,
    Arrow,
    DArrow,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Caret,
    At,
    Plus,
    Star,
    Slash,
    Minus,
    Cmp(CmpOp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Nat(s) => format!("number `{s}`"),
            Tok::B(None) => "`B`".into(),
            Tok::B(Some(n)) => format!("`B{n}`"),
            Tok::Pr(None) => "`Pr`".into(),
            Tok::Pr(Some(n)) => format!("`Pr{n}`"),
            Tok::Cb => "`CB`".into(),
            Tok::E => "`E`".into(),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DArrow => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Caret => "`^`".into(),
            Tok::At => "`@`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, word(&text[start..i])));
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((start, Tok::Nat(text[start..i].to_string())));
            continue;
        }
        let rest = &text[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::DArrow, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with(">=") {
            (Tok::Cmp(CmpOp::Ge), 2)
        } else if rest.starts_with("<=") {
            (Tok::Cmp(CmpOp::Le), 2)
        } else {
            let t = match c {
                b'>' => Tok::Cmp(CmpOp::Gt),
                b'<' => Tok::Cmp(CmpOp::Lt),
                b'=' => Tok::Cmp(CmpOp::Eq),
                b'!' => Tok::Bang,
                b'&' => Tok::Amp,
                b'|' => Tok::Bar,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b',' => Tok::Comma,
                b'^' => Tok::Caret,
                b'@' => Tok::At,
                b'+' => Tok::Plus,
                b'*' => Tok::Star,
                b'/' => Tok::Slash,
                b'-' => Tok::Minus,
                _ => {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(ParseError::Syntax {
                        offset: start,
                        expected: vec!["a formula token"],
                        found: format!("character `{ch}`"),
                    });
                }
            };
            (t, 1)
        };
        out.push((start, tok));
        i += len;
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

fn word(w: &str) -> Tok {
    let numbered = |prefix: &str| {
        w.strip_prefix(prefix)
            .filter(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
            .map(str::to_string)
    };
    match w {
        "true" => Tok::True,
        "false" => Tok::False,
        "CB" => Tok::Cb,
        "E" => Tok::E,
        "B" => Tok::B(None),
        "Pr" => Tok::Pr(None),
        _ => {
            if let Some(n) = numbered("B") {
                Tok::B(Some(n))
            } else if let Some(n) = numbered("Pr") {
                Tok::Pr(Some(n))
            } else {
                Tok::Ident(w.to_string())
            }
        }
    }
}

/// Parses a formula in the surface syntax.
pub fn parse(text: &str) -> Result<SurfaceFormula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(f)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, t: Tok, what: &'static str) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(vec![what]))
        }
    }

    fn formula(&mut self) -> Result<SurfaceFormula, ParseError> {
        let mut lhs = self.implication()?;
        while self.eat(&Tok::DArrow) {
            let rhs = self.implication()?;
            lhs = SurfaceFormula::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<SurfaceFormula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(SurfaceFormula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<SurfaceFormula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.conjunction()?;
            lhs = SurfaceFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<SurfaceFormula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = SurfaceFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<SurfaceFormula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(SurfaceFormula::Not(Box::new(self.unary()?)))
            }
            Tok::B(glued) => {
                self.bump();
                let agent = self.agent(glued)?;
                Ok(SurfaceFormula::B(agent, Box::new(self.unary()?)))
            }
            Tok::Cb => {
                self.bump();
                let group = self.group()?;
                Ok(SurfaceFormula::Cb(group, Box::new(self.unary()?)))
            }
            Tok::E => {
                self.bump();
                let group = self.group()?;
                let mut power = 1;
                if self.eat(&Tok::Caret) {
                    let at = self.offset();
                    let n = self.nat()?;
                    power = match n.parse::<u32>() {
                        Ok(k) if k >= 1 => k,
                        _ => {
                            return Err(ParseError::Syntax {
                                offset: at,
                                expected: vec!["a positive exponent"],
                                found: format!("number `{n}`"),
                            })
                        }
                    };
                }
                Ok(SurfaceFormula::Eb(group, power, Box::new(self.unary()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<SurfaceFormula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                let prop = PropId::new(&name).expect("lexer only yields valid identifiers");
                if self.eat(&Tok::At) {
                    let agent = self.agent(None)?;
                    return Ok(SurfaceFormula::Indexed(IndexedPropId::new(prop, agent)));
                }
                Ok(SurfaceFormula::Prop(prop))
            }
            Tok::True => {
                self.bump();
                Ok(SurfaceFormula::True)
            }
            Tok::False => {
                self.bump();
                Ok(SurfaceFormula::False)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Pr(_) | Tok::Nat(_) | Tok::Minus => self.probcmp(),
            _ => Err(self.error(vec![
                "a proposition",
                "`true`",
                "`false`",
                "`(`",
                "`!`",
                "`B`",
                "`E`",
                "`CB`",
                "a probability term",
            ])),
        }
    }

    fn probcmp(&mut self) -> Result<SurfaceFormula, ParseError> {
        let mut terms = Vec::new();
        let mut agent: Option<AgentId> = None;
        loop {
            let at = self.offset();
            let (term_agent, term) = self.term()?;
            match agent {
                Some(first) if first != term_agent => {
                    return Err(ParseError::MixedAgents {
                        offset: at,
                        first,
                        second: term_agent,
                    })
                }
                _ => agent = Some(term_agent),
            }
            terms.push(term);
            if !self.eat(&Tok::Plus) {
                break;
            }
        }
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => return Err(self.error(vec!["`+`", "a comparison operator"])),
        };
        self.bump();
        let bound = self.rational()?;
        Ok(SurfaceFormula::Prob(SurfaceProb {
            agent: agent.expect("at least one term"),
            terms,
            op,
            bound,
        }))
    }

    fn term(&mut self) -> Result<(AgentId, SurfaceTerm), ParseError> {
        let coeff = if matches!(self.peek(), Tok::Pr(_)) {
            Rational::from_integer(BigInt::from(1))
        } else {
            let c = self.rational()?;
            self.expect(Tok::Star, "`*`")?;
            c
        };
        let glued = match self.peek().clone() {
            Tok::Pr(g) => {
                self.bump();
                g
            }
            _ => return Err(self.error(vec!["`Pr`"])),
        };
        let agent = self.agent(glued)?;
        self.expect(Tok::LParen, "`(`")?;
        let arg = self.formula()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok((
            agent,
            SurfaceTerm {
                coeff,
                arg: Box::new(arg),
            },
        ))
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let neg = self.eat(&Tok::Minus);
        let num = self.nat()?;
        let den = if self.eat(&Tok::Slash) {
            let at = self.offset();
            let d = self.nat()?;
            let d: BigInt = d.parse().expect("digits");
            if d.is_zero() {
                return Err(ParseError::Syntax {
                    offset: at,
                    expected: vec!["a nonzero denominator"],
                    found: "number `0`".into(),
                });
            }
            d
        } else {
            BigInt::from(1)
        };
        let r = Rational::new(num.parse::<BigInt>().expect("digits"), den);
        Ok(if neg { -r } else { r })
    }

    fn nat(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(vec!["a number"])),
        }
    }

    /// Agent number, either glued to the keyword or as the next token.
    fn agent(&mut self, glued: Option<String>) -> Result<AgentId, ParseError> {
        let at = if glued.is_some() {
            self.toks[self.pos - 1].0
        } else {
            self.offset()
        };
        let digits = match glued {
            Some(d) => d,
            None => self.nat()?,
        };
        digits
            .parse::<u32>()
            .ok()
            .and_then(AgentId::new)
            .ok_or(ParseError::UnknownAgent {
                offset: at,
                index: digits,
            })
    }

    fn group(&mut self) -> Result<AgentSet, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut agents = vec![self.agent(None)?];
        while self.eat(&Tok::Comma) {
            agents.push(self.agent(None)?);
        }
        self.expect(Tok::RBrace, "`,` or `}`")?;
        Ok(AgentSet::new(agents).expect("nonempty"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn prop(n: &str) -> Box<SurfaceFormula> {
        Box::new(SurfaceFormula::Prop(PropId::new(n).unwrap()))
    }

    fn agent(n: u32) -> AgentId {
        AgentId::new(n).unwrap()
    }

    #[test]
    fn atomic() {
        assert_eq!(parse("p").unwrap(), *prop("p"));
        assert_eq!(
            parse("p@2").unwrap(),
            SurfaceFormula::Indexed(IndexedPropId::new(PropId::new("p").unwrap(), agent(2)))
        );
    }

    #[test]
    fn linear_probability_formula() {
        let f = parse("2/3*Pr1(p) + 1/3*Pr1(q) >= 1/2").unwrap();
        let expected = SurfaceFormula::Prob(SurfaceProb {
            agent: agent(1),
            terms: vec![
                SurfaceTerm {
                    coeff: ratio(2, 3),
                    arg: prop("p"),
                },
                SurfaceTerm {
                    coeff: ratio(1, 3),
                    arg: prop("q"),
                },
            ],
            op: CmpOp::Ge,
            bound: ratio(1, 2),
        });
        assert_eq!(f, expected);
    }

    #[test]
    fn common_belief_of_disagreement() {
        let f = parse("CB{1,2}(B1 p & B2 !p)").unwrap();
        let expected = SurfaceFormula::Cb(
            AgentSet::from_numbers(&[1, 2]).unwrap(),
            Box::new(SurfaceFormula::And(
                Box::new(SurfaceFormula::B(agent(1), prop("p"))),
                Box::new(SurfaceFormula::B(
                    agent(2),
                    Box::new(SurfaceFormula::Not(prop("p"))),
                )),
            )),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn spacing_is_irrelevant() {
        assert_eq!(parse("B 1 p").unwrap(), parse("B1 p").unwrap());
        assert_eq!(parse("Pr 2 ( p ) >= 1").unwrap(), parse("Pr2(p)>=1").unwrap());
        assert_eq!(parse("p @ 1").unwrap(), parse("p@1").unwrap());
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse("p -> q -> r").unwrap();
        assert_eq!(
            f,
            SurfaceFormula::Implies(
                prop("p"),
                Box::new(SurfaceFormula::Implies(prop("q"), prop("r")))
            )
        );
        let g = parse("p & q | r").unwrap();
        assert_eq!(
            g,
            SurfaceFormula::Or(Box::new(SurfaceFormula::And(prop("p"), prop("q"))), prop("r"))
        );
        let h = parse("!p & q").unwrap();
        assert_eq!(
            h,
            SurfaceFormula::And(Box::new(SurfaceFormula::Not(prop("p"))), prop("q"))
        );
    }

    #[test]
    fn negative_coefficients_and_bounds() {
        let f = parse("-1/2*Pr1(p) + Pr1(q) >= -1").unwrap();
        match f {
            SurfaceFormula::Prob(p) => {
                assert_eq!(p.terms[0].coeff, ratio(-1, 2));
                assert_eq!(p.terms[1].coeff, int(1));
                assert_eq!(p.bound, int(-1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eb_power() {
        match parse("E{2,1}^3 p").unwrap() {
            SurfaceFormula::Eb(g, 3, _) => assert_eq!(g, AgentSet::from_numbers(&[1, 2]).unwrap()),
            other => panic!("{other:?}"),
        }
        assert!(parse("E{1}^0 p").is_err());
    }

    #[test]
    fn error_offsets() {
        let cases: &[(&str, usize)] = &[
            ("p &", 3),
            ("(p", 2),
            ("p q", 2),
            ("Pr1(p) >= ", 10),
            ("Pr1(p) + q >= 1", 9),
            ("CB{} p", 3),
            ("p # q", 2),
            ("1/0*Pr1(p) >= 1", 2),
            ("Pr1(p)", 6),
        ];
        for (text, offset) in cases {
            let err = parse(text).unwrap_err();
            assert_eq!(err.offset(), *offset, "{text}: {err}");
        }
    }

    #[test]
    fn non_positive_agents_are_rejected() {
        assert!(matches!(
            parse("B0 p"),
            Err(ParseError::UnknownAgent { offset: 0, .. })
        ));
        assert!(matches!(
            parse("Pr 0(p) >= 1"),
            Err(ParseError::UnknownAgent { offset: 3, .. })
        ));
        assert!(matches!(
            parse("CB{1,0} p"),
            Err(ParseError::UnknownAgent { offset: 5, .. })
        ));
        assert!(matches!(parse("p@0"), Err(ParseError::UnknownAgent { .. })));
    }

    #[test]
    fn mixed_agents_are_rejected() {
        let err = parse("Pr1(p) + Pr2(q) >= 1").unwrap_err();
        assert_eq!(
            err,
            ParseError::MixedAgents {
                offset: 9,
                first: agent(1),
                second: agent(2)
            }
        );
    }
}
