//! Canonical printer; inverse of the parser on ASTs.

use super::{SurfaceFormula, SurfaceProb};
use crate::rational::format_rational;
use num_traits::One;

const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;
const ATOM: u8 = 6;

fn precedence(f: &SurfaceFormula) -> u8 {
    match f {
        SurfaceFormula::Iff(..) => IFF,
        SurfaceFormula::Implies(..) => IMPLIES,
        SurfaceFormula::Or(..) => OR,
        SurfaceFormula::And(..) => AND,
        SurfaceFormula::Not(_)
        | SurfaceFormula::B(..)
        | SurfaceFormula::Eb(..)
        | SurfaceFormula::Cb(..) => UNARY,
        _ => ATOM,
    }
}

pub(super) fn print(f: &SurfaceFormula) -> String {
    let mut out = String::new();
    write(f, &mut out);
    out
}

fn write(f: &SurfaceFormula, out: &mut String) {
    match f {
        SurfaceFormula::Prop(p) => out.push_str(p.as_str()),
        SurfaceFormula::Indexed(ip) => out.push_str(&ip.to_string()),
        SurfaceFormula::True => out.push_str("true"),
        SurfaceFormula::False => out.push_str("false"),
        SurfaceFormula::Not(g) => {
            out.push('!');
            operand(g, out);
        }
        SurfaceFormula::B(agent, g) => {
            out.push_str(&format!("B{agent}"));
            spaced_operand(g, out);
        }
        SurfaceFormula::Eb(group, k, g) => {
            out.push_str(&format!("E{group}"));
            if *k != 1 {
                out.push_str(&format!("^{k}"));
            }
            spaced_operand(g, out);
        }
        SurfaceFormula::Cb(group, g) => {
            out.push_str(&format!("CB{group}"));
            spaced_operand(g, out);
        }
        SurfaceFormula::And(a, b) => binary(a, b, AND, false, " & ", out),
        SurfaceFormula::Or(a, b) => binary(a, b, OR, false, " | ", out),
        SurfaceFormula::Implies(a, b) => binary(a, b, IMPLIES, true, " -> ", out),
        SurfaceFormula::Iff(a, b) => binary(a, b, IFF, false, " <-> ", out),
        SurfaceFormula::Prob(p) => prob(p, out),
    }
}

fn parenthesized(f: &SurfaceFormula, out: &mut String) {
    out.push('(');
    write(f, out);
    out.push(')');
}

/// Operand of a prefix operator, glued on (`!p`, `!(p & q)`).
fn operand(f: &SurfaceFormula, out: &mut String) {
    if precedence(f) < UNARY {
        parenthesized(f, out);
    } else {
        write(f, out);
    }
}

/// Operand of a keyword operator: `B1 p`, but `B1(p & q)`.
fn spaced_operand(f: &SurfaceFormula, out: &mut String) {
    if precedence(f) < UNARY {
        parenthesized(f, out);
    } else {
        out.push(' ');
        write(f, out);
    }
}

fn binary(
    a: &SurfaceFormula,
    b: &SurfaceFormula,
    level: u8,
    right_assoc: bool,
    sep: &str,
    out: &mut String,
) {
    let (pa, pb) = (precedence(a), precedence(b));
    let left_parens = if right_assoc { pa <= level } else { pa < level };
    let right_parens = if right_assoc { pb < level } else { pb <= level };
    if left_parens {
        parenthesized(a, out);
    } else {
        write(a, out);
    }
    out.push_str(sep);
    if right_parens {
        parenthesized(b, out);
    } else {
        write(b, out);
    }
}

fn prob(p: &SurfaceProb, out: &mut String) {
    for (k, t) in p.terms.iter().enumerate() {
        if k > 0 {
            out.push_str(" + ");
        }
        if !t.coeff.is_one() {
            out.push_str(&format_rational(&t.coeff));
            out.push('*');
        }
        out.push_str(&format!("Pr{}(", p.agent));
        write(&t.arg, out);
        out.push(')');
    }
    out.push_str(&format!(" {} {}", p.op.symbol(), format_rational(&p.bound)));
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    fn canon(text: &str) -> String {
        parse(text).unwrap().print()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canon("p"), "p");
        assert_eq!(canon("B1 p"), "B1 p");
        assert_eq!(canon("Pr2(p) >= 2/4"), "Pr2(p) >= 1/2");
        assert_eq!(canon("1*Pr2(p)>=1"), "Pr2(p) >= 1");
        assert_eq!(canon("CB{2,1}((B1 p) & (B2 !p))"), "CB{1,2}(B1 p & B2 !p)");
        assert_eq!(canon("CB{1,2} p@1"), "CB{1,2} p@1");
        assert_eq!(canon("E{1}^1 p"), "E{1} p");
        assert_eq!(canon("E{1,3}^2 (p | q)"), "E{1,3}^2(p | q)");
        assert_eq!(canon("(p -> q) -> r"), "(p -> q) -> r");
        assert_eq!(canon("p -> (q -> r)"), "p -> q -> r");
        assert_eq!(canon("p & (q & r)"), "p & (q & r)");
        assert_eq!(canon("(p & q) & r"), "p & q & r");
        assert_eq!(canon("!(Pr1(p) >= 1) | false"), "!Pr1(p) >= 1 | false");
        assert_eq!(canon("-2*Pr3(p <-> q) + Pr3(true) < -1/3"), "-2*Pr3(p <-> q) + Pr3(true) < -1/3");
    }
}
