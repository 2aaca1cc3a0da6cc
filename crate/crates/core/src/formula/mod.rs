//! Syntax of the epistemic probability language.
//!
//! Two ASTs live here. [`SurfaceFormula`] is what the parser produces and the
//! printer consumes: it keeps the abbreviations (`B`, `E`, `true`, `|`, `->`,
//! comparisons other than `>=`). [`Formula`] is the core language that the
//! evaluator and translators work on: atoms, `!`, `&`, linear probability
//! inequalities `a1*Prj(f1) + ... >= b` over a single agent `j`, and `CB_G`.
//! Core subterms are held in [`Arc`] so that expansion and translation can
//! share repeated subformulas instead of copying them.

mod parse;
mod print;

pub use parse::{parse, ParseError};

use crate::rational::{int, Rational};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

/// A player, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(u32);

impl AgentId {
    pub fn new(n: u32) -> Option<AgentId> {
        (n >= 1).then_some(AgentId(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based position, for indexing per-agent tables.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> AgentId {
        AgentId(i as u32 + 1)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A nonempty set of agents, as used by `CB_G` and `E_G`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentSet(BTreeSet<AgentId>);

impl AgentSet {
    pub fn new(agents: impl IntoIterator<Item = AgentId>) -> Option<AgentSet> {
        let set: BTreeSet<_> = agents.into_iter().collect();
        (!set.is_empty()).then_some(AgentSet(set))
    }

    pub fn from_numbers(agents: &[u32]) -> Option<AgentSet> {
        let ids: Option<Vec<_>> = agents.iter().map(|&n| AgentId::new(n)).collect();
        AgentSet::new(ids?)
    }

    /// `{1, ..., n}`.
    pub fn all(n: usize) -> AgentSet {
        AgentSet((0..n.max(1)).map(AgentId::from_index).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.0.contains(&agent)
    }

    pub fn max(&self) -> AgentId {
        *self.0.iter().next_back().expect("agent sets are nonempty")
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Name of a primitive proposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropId(String);

impl PropId {
    /// Accepts identifiers `[A-Za-z_][A-Za-z0-9_]*` that are not reserved words
    /// of the grammar (`true`, `false`, `CB`, `E`, `B`, `Bn`, `Pr`, `Prn`).
    pub fn new(name: &str) -> Option<PropId> {
        is_plain_ident(name).then(|| PropId(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PropId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_plain_ident(name: &str) -> bool {
    let mut bytes = name.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    if !bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return false;
    }
    !is_reserved(name)
}

fn is_reserved(name: &str) -> bool {
    let numbered = |prefix: &str| {
        name.strip_prefix(prefix)
            .is_some_and(|rest| rest.bytes().all(|b| b.is_ascii_digit()))
    };
    matches!(name, "true" | "false" | "CB" | "E") || numbered("B") || numbered("Pr")
}

/// Agent `agent`'s reading of proposition `base`, written `base@agent`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexedPropId {
    pub base: PropId,
    pub agent: AgentId,
}

impl IndexedPropId {
    pub fn new(base: PropId, agent: AgentId) -> Self {
        IndexedPropId { base, agent }
    }

    /// Parses `name@n`.
    pub fn parse(text: &str) -> Option<IndexedPropId> {
        let (base, agent) = text.split_once('@')?;
        if agent.is_empty() || !agent.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let agent = AgentId::new(agent.parse().ok()?)?;
        Some(IndexedPropId::new(PropId::new(base)?, agent))
    }
}

impl fmt::Display for IndexedPropId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.base, self.agent)
    }
}

/// An atomic proposition of either kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Plain(PropId),
    Indexed(IndexedPropId),
}

impl Atom {
    pub fn parse(text: &str) -> Option<Atom> {
        if text.contains('@') {
            IndexedPropId::parse(text).map(Atom::Indexed)
        } else {
            PropId::new(text).map(Atom::Plain)
        }
    }

    pub fn to_formula(&self) -> Formula {
        match self {
            Atom::Plain(p) => Formula::Prop(p.clone()),
            Atom::Indexed(ip) => Formula::Indexed(ip.clone()),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Plain(p) => p.fmt(f),
            Atom::Indexed(ip) => ip.fmt(f),
        }
    }
}

/// One summand `coeff * Pr_j(arg)` of a probability formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: Rational,
    pub arg: Arc<Formula>,
}

/// `sum_k coeff_k * Pr_agent(arg_k) >= bound`. All terms share one agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProbGe {
    pub agent: AgentId,
    pub terms: Vec<Term>,
    pub bound: Rational,
}

/// Core formulas.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Prop(PropId),
    Indexed(IndexedPropId),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Prob(ProbGe),
    Cb(AgentSet, Arc<Formula>),
}

impl Formula {
    pub fn prop(name: &str) -> Formula {
        Formula::Prop(PropId::new(name).expect("valid proposition name"))
    }

    pub fn not(f: impl Into<Arc<Formula>>) -> Formula {
        Formula::Not(f.into())
    }

    pub fn and(a: impl Into<Arc<Formula>>, b: impl Into<Arc<Formula>>) -> Formula {
        Formula::And(a.into(), b.into())
    }

    /// `Pr_agent(arg) >= 1`, the core encoding of `B_agent arg`.
    pub fn believes(agent: AgentId, arg: impl Into<Arc<Formula>>) -> Formula {
        Formula::Prob(ProbGe {
            agent,
            terms: vec![Term {
                coeff: int(1),
                arg: arg.into(),
            }],
            bound: int(1),
        })
    }

    pub fn cb(group: AgentSet, body: impl Into<Arc<Formula>>) -> Formula {
        Formula::Cb(group, body.into())
    }

    /// True iff only propositions, negation and conjunction occur.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Prop(_) => true,
            Formula::Not(f) => f.is_propositional(),
            Formula::And(a, b) => a.is_propositional() && b.is_propositional(),
            Formula::Indexed(_) | Formula::Prob(_) | Formula::Cb(..) => false,
        }
    }

    pub fn contains_indexed(&self) -> bool {
        match self {
            Formula::Prop(_) => false,
            Formula::Indexed(_) => true,
            Formula::Not(f) | Formula::Cb(_, f) => f.contains_indexed(),
            Formula::And(a, b) => a.contains_indexed() || b.contains_indexed(),
            Formula::Prob(p) => p.terms.iter().any(|t| t.arg.contains_indexed()),
        }
    }

    pub(crate) fn children(&self) -> Vec<&Arc<Formula>> {
        match self {
            Formula::Prop(_) | Formula::Indexed(_) => vec![],
            Formula::Not(f) | Formula::Cb(_, f) => vec![f],
            Formula::And(a, b) => vec![a, b],
            Formula::Prob(p) => p.terms.iter().map(|t| &t.arg).collect(),
        }
    }

    /// Subformulas in post-order, each shared node once. Structurally equal
    /// but separately allocated subformulas are listed separately.
    pub fn subformulas(&self) -> Vec<&Formula> {
        fn walk<'a>(f: &'a Formula, seen: &mut HashSet<*const Formula>, out: &mut Vec<&'a Formula>) {
            for c in f.children() {
                if seen.insert(Arc::as_ptr(c)) {
                    walk(c, seen, out);
                }
            }
            out.push(f);
        }
        let mut out = Vec::new();
        walk(self, &mut HashSet::new(), &mut out);
        out
    }

    /// Number of nodes counted as a tree (shared subterms counted per use).
    pub fn tree_size(&self) -> usize {
        1 + self.children().iter().map(|c| c.tree_size()).sum::<usize>()
    }

    /// Number of distinct allocations reachable from this node.
    pub fn dag_size(&self) -> usize {
        fn walk(f: &Formula, seen: &mut HashSet<*const Formula>) {
            for c in f.children() {
                if seen.insert(Arc::as_ptr(c)) {
                    walk(c, seen);
                }
            }
        }
        let mut seen = HashSet::new();
        walk(self, &mut seen);
        seen.len() + 1
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Plain propositions occurring in the formula, sorted.
    pub fn props(&self) -> BTreeSet<PropId> {
        let mut out = BTreeSet::new();
        for f in self.subformulas() {
            if let Formula::Prop(p) = f {
                out.insert(p.clone());
            }
        }
        out
    }

    /// Largest agent index mentioned by a probability or `CB` node.
    pub fn max_agent(&self) -> Option<AgentId> {
        self.subformulas()
            .into_iter()
            .filter_map(|f| match f {
                Formula::Prob(p) => Some(p.agent),
                Formula::Cb(g, _) => Some(g.max()),
                Formula::Indexed(ip) => Some(ip.agent),
                _ => None,
            })
            .max()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::print(&SurfaceFormula::resugar(self)))
    }
}

/// Comparison operator of a surface probability formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Ge,
    Le,
    Eq,
    Gt,
    Lt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SurfaceTerm {
    pub coeff: Rational,
    pub arg: Box<SurfaceFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SurfaceProb {
    pub agent: AgentId,
    pub terms: Vec<SurfaceTerm>,
    pub op: CmpOp,
    pub bound: Rational,
}

/// Formulas as written, abbreviations included.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SurfaceFormula {
    Prop(PropId),
    Indexed(IndexedPropId),
    True,
    False,
    Not(Box<SurfaceFormula>),
    And(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Or(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Implies(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Iff(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Prob(SurfaceProb),
    B(AgentId, Box<SurfaceFormula>),
    /// `E_G^k f`, with `k >= 1`.
    Eb(AgentSet, u32, Box<SurfaceFormula>),
    Cb(AgentSet, Box<SurfaceFormula>),
}

impl SurfaceFormula {
    /// Canonical text; `parse(&f.print())` gives back `f`.
    pub fn print(&self) -> String {
        print::print(self)
    }

    /// Literal embedding of a core formula, no abbreviations introduced.
    pub fn from_core(f: &Formula) -> SurfaceFormula {
        Self::lift(f, false)
    }

    /// Like [`SurfaceFormula::from_core`], but writes `Prj(f) >= 1` as `Bj f`.
    pub fn resugar(f: &Formula) -> SurfaceFormula {
        Self::lift(f, true)
    }

    fn lift(f: &Formula, sugar: bool) -> SurfaceFormula {
        let rec = |g: &Formula| Box::new(Self::lift(g, sugar));
        match f {
            Formula::Prop(p) => SurfaceFormula::Prop(p.clone()),
            Formula::Indexed(ip) => SurfaceFormula::Indexed(ip.clone()),
            Formula::Not(g) => SurfaceFormula::Not(rec(g)),
            Formula::And(a, b) => SurfaceFormula::And(rec(a), rec(b)),
            Formula::Cb(g, body) => SurfaceFormula::Cb(g.clone(), rec(body)),
            Formula::Prob(p) => {
                let one = int(1);
                if sugar && p.terms.len() == 1 && p.terms[0].coeff == one && p.bound == one {
                    return SurfaceFormula::B(p.agent, rec(&p.terms[0].arg));
                }
                SurfaceFormula::Prob(SurfaceProb {
                    agent: p.agent,
                    terms: p
                        .terms
                        .iter()
                        .map(|t| SurfaceTerm {
                            coeff: t.coeff.clone(),
                            arg: rec(&t.arg),
                        })
                        .collect(),
                    op: CmpOp::Ge,
                    bound: p.bound.clone(),
                })
            }
        }
    }

    /// Rewrites abbreviations into the core language.
    ///
    /// `tautology` is the proposition used for `true := t | !t`; a structure
    /// designates its first declared proposition for this role.
    pub fn expand(&self, tautology: &Atom) -> Formula {
        let t = Arc::new(tautology.to_formula());
        let truth = or(t.clone(), not(t));
        Expander { truth }.run(self).as_ref().clone()
    }

    /// The atom that `true`/`false` should expand over when no structure is
    /// available: the first proposition occurring in the formula.
    pub fn first_atom(&self) -> Option<Atom> {
        match self {
            SurfaceFormula::Prop(p) => Some(Atom::Plain(p.clone())),
            SurfaceFormula::Indexed(ip) => Some(Atom::Indexed(ip.clone())),
            SurfaceFormula::True | SurfaceFormula::False => None,
            SurfaceFormula::Not(f)
            | SurfaceFormula::B(_, f)
            | SurfaceFormula::Eb(_, _, f)
            | SurfaceFormula::Cb(_, f) => f.first_atom(),
            SurfaceFormula::And(a, b)
            | SurfaceFormula::Or(a, b)
            | SurfaceFormula::Implies(a, b)
            | SurfaceFormula::Iff(a, b) => a.first_atom().or_else(|| b.first_atom()),
            SurfaceFormula::Prob(p) => p.terms.iter().find_map(|t| t.arg.first_atom()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SurfaceFormula::Prop(_)
            | SurfaceFormula::Indexed(_)
            | SurfaceFormula::True
            | SurfaceFormula::False => 1,
            SurfaceFormula::Not(f)
            | SurfaceFormula::B(_, f)
            | SurfaceFormula::Eb(_, _, f)
            | SurfaceFormula::Cb(_, f) => 1 + f.depth(),
            SurfaceFormula::And(a, b)
            | SurfaceFormula::Or(a, b)
            | SurfaceFormula::Implies(a, b)
            | SurfaceFormula::Iff(a, b) => 1 + a.depth().max(b.depth()),
            SurfaceFormula::Prob(p) => 1 + p.terms.iter().map(|t| t.arg.depth()).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for SurfaceFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::print(self))
    }
}

impl From<&Formula> for SurfaceFormula {
    fn from(f: &Formula) -> Self {
        SurfaceFormula::from_core(f)
    }
}

fn not(f: Arc<Formula>) -> Arc<Formula> {
    Arc::new(Formula::Not(f))
}

fn and(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
    Arc::new(Formula::And(a, b))
}

fn or(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
    not(and(not(a), not(b)))
}

fn implies(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
    not(and(a, not(b)))
}

fn ge(agent: AgentId, terms: Vec<Term>, bound: Rational) -> Arc<Formula> {
    Arc::new(Formula::Prob(ProbGe {
        agent,
        terms,
        bound,
    }))
}

fn negated_terms(terms: &[Term]) -> Vec<Term> {
    terms
        .iter()
        .map(|t| Term {
            coeff: -t.coeff.clone(),
            arg: t.arg.clone(),
        })
        .collect()
}

/// `E^1_G f = /\_{j in G} B_j f`, left-nested, sharing `f`.
pub fn everyone_believes(group: &AgentSet, f: &Arc<Formula>) -> Arc<Formula> {
    group
        .iter()
        .map(|j| Arc::new(Formula::believes(j, f.clone())))
        .reduce(and)
        .expect("agent sets are nonempty")
}

/// `E^k_G f`, unfolded as `E^{m+1} f = E^m (E^1 f)`.
pub fn everyone_believes_k(group: &AgentSet, k: u32, f: &Arc<Formula>) -> Arc<Formula> {
    let mut cur = f.clone();
    for _ in 0..k.max(1) {
        cur = everyone_believes(group, &cur);
    }
    cur
}

struct Expander {
    truth: Arc<Formula>,
}

impl Expander {
    fn run(&self, f: &SurfaceFormula) -> Arc<Formula> {
        match f {
            SurfaceFormula::Prop(p) => Arc::new(Formula::Prop(p.clone())),
            SurfaceFormula::Indexed(ip) => Arc::new(Formula::Indexed(ip.clone())),
            SurfaceFormula::True => self.truth.clone(),
            SurfaceFormula::False => not(self.truth.clone()),
            SurfaceFormula::Not(g) => not(self.run(g)),
            SurfaceFormula::And(a, b) => and(self.run(a), self.run(b)),
            SurfaceFormula::Or(a, b) => or(self.run(a), self.run(b)),
            SurfaceFormula::Implies(a, b) => implies(self.run(a), self.run(b)),
            SurfaceFormula::Iff(a, b) => {
                let (a, b) = (self.run(a), self.run(b));
                and(implies(a.clone(), b.clone()), implies(b, a))
            }
            SurfaceFormula::B(agent, g) => Arc::new(Formula::believes(*agent, self.run(g))),
            SurfaceFormula::Eb(group, k, g) => everyone_believes_k(group, *k, &self.run(g)),
            SurfaceFormula::Cb(group, g) => Arc::new(Formula::Cb(group.clone(), self.run(g))),
            SurfaceFormula::Prob(p) => {
                let terms: Vec<Term> = p
                    .terms
                    .iter()
                    .map(|t| Term {
                        coeff: t.coeff.clone(),
                        arg: self.run(&t.arg),
                    })
                    .collect();
                let b = p.bound.clone();
                match p.op {
                    CmpOp::Ge => ge(p.agent, terms, b),
                    CmpOp::Le => ge(p.agent, negated_terms(&terms), -b),
                    CmpOp::Eq => {
                        let neg = negated_terms(&terms);
                        and(ge(p.agent, terms, b.clone()), ge(p.agent, neg, -b))
                    }
                    CmpOp::Gt => not(ge(p.agent, negated_terms(&terms), -b)),
                    CmpOp::Lt => not(ge(p.agent, terms, b)),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn a(n: u32) -> AgentId {
        AgentId::new(n).unwrap()
    }

    fn p() -> Formula {
        Formula::prop("p")
    }

    fn taut() -> Atom {
        Atom::Plain(PropId::new("p").unwrap())
    }

    fn ge1(agent: u32, arg: Formula) -> Formula {
        Formula::Prob(ProbGe {
            agent: a(agent),
            terms: vec![Term {
                coeff: int(1),
                arg: Arc::new(arg),
            }],
            bound: int(1),
        })
    }

    #[test]
    fn b_expands_to_prob_at_least_one() {
        let f = parse("B2 p").unwrap().expand(&taut());
        assert_eq!(f, ge1(2, p()));
    }

    #[test]
    fn eb1_is_conjunction_of_beliefs() {
        let f = parse("E{1,2} p").unwrap().expand(&taut());
        assert_eq!(f, Formula::and(ge1(1, p()), ge1(2, p())));
    }

    #[test]
    fn eb2_unfolds_by_hand() {
        let f = parse("E{1}^2 p").unwrap().expand(&taut());
        assert_eq!(f, ge1(1, ge1(1, p())));
    }

    #[test]
    fn eq_and_strict_sugar() {
        let t = taut();
        let eq = parse("Pr1(p) = 1/2").unwrap().expand(&t);
        let expected_eq = Formula::and(
            parse("Pr1(p) >= 1/2").unwrap().expand(&t),
            parse("-1*Pr1(p) >= -1/2").unwrap().expand(&t),
        );
        assert_eq!(eq, expected_eq);
        let gt = parse("Pr1(p) > 1/2").unwrap().expand(&t);
        assert_eq!(gt, Formula::not(parse("-1*Pr1(p) >= -1/2").unwrap().expand(&t)));
        let lt = parse("Pr1(p) < 1/2").unwrap().expand(&t);
        assert_eq!(lt, Formula::not(parse("Pr1(p) >= 1/2").unwrap().expand(&t)));
        let le = parse("Pr1(p) <= 1/3").unwrap().expand(&t);
        match le {
            Formula::Prob(pg) => {
                assert_eq!(pg.terms[0].coeff, int(-1));
                assert_eq!(pg.bound, ratio(-1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn true_is_tautology_over_designated_prop() {
        let f = parse("true").unwrap().expand(&taut());
        // p | !p  ==  !(!p & !!p)
        let expected = Formula::not(Formula::and(Formula::not(p()), Formula::not(Formula::not(p()))));
        assert_eq!(f, expected);
        assert!(f.is_propositional());
    }

    #[test]
    fn propositional_classification() {
        let t = taut();
        assert!(parse("!(p & q)").unwrap().expand(&t).is_propositional());
        assert!(!parse("Pr1(p) >= 1").unwrap().expand(&t).is_propositional());
        assert!(!parse("CB{1} p").unwrap().expand(&t).is_propositional());
        assert!(!parse("p@1").unwrap().expand(&t).is_propositional());
    }

    #[test]
    fn subformulas_post_order() {
        let q = Formula::prop("q");
        let f = Formula::and(p(), q.clone());
        assert_eq!(f.subformulas(), vec![&p(), &q, &f]);
        let n = Formula::not(p());
        assert_eq!(n.subformulas(), vec![&p(), &n]);
        assert_eq!(p().subformulas(), vec![&p()]);
        let dup = Formula::and(p(), p());
        assert_eq!(dup.subformulas().len(), 3);
        let shared = Arc::new(p());
        let dup = Formula::and(shared.clone(), shared);
        assert_eq!(dup.subformulas().len(), 2);
    }

    #[test]
    fn eb_expansion_shares_subterms() {
        let f = parse("E{1,2,3}^6 (p & q)").unwrap().expand(&taut());
        // Tree size grows like 3^6; the DAG stays linear.
        assert!(f.tree_size() > 1000);
        assert!(f.dag_size() < 60, "dag size {}", f.dag_size());
    }

    #[test]
    fn reserved_names_are_not_props() {
        for bad in ["B1", "Pr2", "CB", "E", "true", "false", "B", "Pr", "1p", "a-b", ""] {
            assert!(PropId::new(bad).is_none(), "{bad}");
        }
        for good in ["p", "B1x", "Prq", "p_1_c0", "_x", "CBx"] {
            assert!(PropId::new(good).is_some(), "{good}");
        }
    }

    #[test]
    fn display_resugars_beliefs() {
        let f = Formula::cb(
            AgentSet::from_numbers(&[1, 2]).unwrap(),
            Formula::and(ge1(1, p()), ge1(2, Formula::not(p()))),
        );
        assert_eq!(f.to_string(), "CB{1,2}(B1 p & B2 !p)");
    }
}
