//! Compilation of ambiguous formulas into the indexed language.
//!
//! The indexed proposition `p@i` stands for "p as agent i reads it". Lifting
//! a structure replaces its propositions by all such pairs under one shared
//! interpretation, after which the two translations below capture the
//! innermost and outermost semantics classically:
//!
//! | formula              | `in` at `i`                          | `ou` at `i`            |
//! |----------------------|--------------------------------------|------------------------|
//! | `p`                  | `p@i`                                | `p@i`                  |
//! | `!f`, `f & g`        | homomorphic                          | homomorphic            |
//! | `sum a Prj(f) >= b`  | arguments at `j`                     | arguments at `i`       |
//! | `CB_G f`             | `CB_G(/\_{j in G} Bj f_j)`           | `CB_G f_i`             |
//!
//! Translations are memoized per (subformula, agent), so shared input
//! subterms yield shared output subterms.

use crate::formula::{AgentId, Formula, IndexedPropId, ProbGe, Term};
use crate::semantics::{Checker, EvalError, EvalMode};
use crate::stateset::StateSet;
use crate::structure::{Structure, StructureError, StructureParts};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslationError {
    #[error("formula already contains the indexed proposition `{0}`")]
    AlreadyIndexed(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Which translation to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Innermost,
    Outermost,
    /// `CB_G f` at `i` becomes `CB_G f_i`, keeping innermost clauses
    /// elsewhere. Not sound; kept to exhibit why the real clause is needed.
    NaiveInnermost,
}

impl Scheme {
    /// The ambiguous mode the scheme is meant to capture.
    pub fn source_mode(self) -> EvalMode {
        match self {
            Scheme::Outermost => EvalMode::Outermost,
            Scheme::Innermost | Scheme::NaiveInnermost => EvalMode::Innermost,
        }
    }
}

/// `M_c`: same states, partitions and beliefs; propositions `p@i` for every
/// declared `p` and agent `i` (p-major), all read as `pi_i` reads `p`.
pub fn lift_to_indexed(m: &Structure) -> Result<Structure, TranslationError> {
    if let Some(p) = m.props().iter().find(|p| p.contains('@')) {
        return Err(TranslationError::AlreadyIndexed(p.clone()));
    }
    let mut props = Vec::with_capacity(m.props().len() * m.n_agents());
    let mut shared: Vec<StateSet> = Vec::with_capacity(props.capacity());
    for (p, name) in m.props().iter().enumerate() {
        for i in m.agents() {
            props.push(Structure::indexed_name(name, i));
            shared.push(m.interpretation(i, p).clone());
        }
    }
    let signals = match m.signals() {
        None => None,
        Some(rows) => Some(
            m.agents()
                .map(|i| {
                    rows[i.index()]
                        .iter()
                        .map(|f| translate(f, i, Scheme::Innermost))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    let parts = m.to_parts();
    Ok(Structure::new(StructureParts {
        props,
        interpretations: vec![shared; m.n_agents()],
        signals,
        ..parts
    })?)
}

/// `f_i^in`.
pub fn translate_in(f: &Formula, i: AgentId) -> Result<Formula, TranslationError> {
    translate(f, i, Scheme::Innermost)
}

/// `f_i^ou`.
pub fn translate_ou(f: &Formula, i: AgentId) -> Result<Formula, TranslationError> {
    translate(f, i, Scheme::Outermost)
}

pub fn translate(f: &Formula, i: AgentId, scheme: Scheme) -> Result<Formula, TranslationError> {
    let out = Translator::new(scheme).run(f, i)?;
    Ok(Arc::unwrap_or_clone(out))
}

/// Memo keys hold formula addresses, valid because inputs are borrowed for `'f`.
struct Translator<'f> {
    scheme: Scheme,
    memo: HashMap<(*const Formula, u32), Arc<Formula>>,
    _f: std::marker::PhantomData<&'f Formula>,
}

impl<'f> Translator<'f> {
    fn new(scheme: Scheme) -> Self {
        Translator {
            scheme,
            memo: HashMap::new(),
            _f: std::marker::PhantomData,
        }
    }

    fn run(&mut self, f: &'f Formula, i: AgentId) -> Result<Arc<Formula>, TranslationError> {
        // Innermost clauses for modal formulas never consult `i`; sharing the
        // cache entry across agents makes that independence structural.
        let agent_free = match f {
            Formula::Prob(_) => self.scheme != Scheme::Outermost,
            Formula::Cb(..) => self.scheme == Scheme::Innermost,
            _ => false,
        };
        let key = (f as *const Formula, if agent_free { 0 } else { i.get() });
        if let Some(out) = self.memo.get(&key) {
            return Ok(out.clone());
        }
        let out = match f {
            Formula::Prop(p) => Arc::new(Formula::Indexed(IndexedPropId::new(p.clone(), i))),
            Formula::Indexed(ip) => return Err(TranslationError::AlreadyIndexed(ip.to_string())),
            Formula::Not(g) => Arc::new(Formula::Not(self.run(g, i)?)),
            Formula::And(a, b) => Arc::new(Formula::And(self.run(a, i)?, self.run(b, i)?)),
            Formula::Prob(p) => {
                let reader = match self.scheme {
                    Scheme::Outermost => i,
                    Scheme::Innermost | Scheme::NaiveInnermost => p.agent,
                };
                let terms = p
                    .terms
                    .iter()
                    .map(|t| {
                        Ok(Term {
                            coeff: t.coeff.clone(),
                            arg: self.run(&t.arg, reader)?,
                        })
                    })
                    .collect::<Result<Vec<_>, TranslationError>>()?;
                Arc::new(Formula::Prob(ProbGe {
                    agent: p.agent,
                    terms,
                    bound: p.bound.clone(),
                }))
            }
            Formula::Cb(group, body) => {
                let inner = match self.scheme {
                    Scheme::Innermost => {
                        let mut conj: Option<Arc<Formula>> = None;
                        for j in group.iter() {
                            let bj = Arc::new(Formula::believes(j, self.run(body, j)?));
                            conj = Some(match conj {
                                None => bj,
                                Some(c) => Arc::new(Formula::And(c, bj)),
                            });
                        }
                        conj.expect("agent sets are nonempty")
                    }
                    Scheme::Outermost | Scheme::NaiveInnermost => self.run(body, i)?,
                };
                Arc::new(Formula::Cb(group.clone(), inner))
            }
        };
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

/// One disagreement between a formula and its translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranslationMismatch {
    pub scheme: Scheme,
    pub formula: String,
    pub translated: String,
    pub state: String,
    pub agent: u32,
    /// Truth in the ambiguous model under the scheme's source mode.
    pub ambiguous: bool,
    /// Truth of the translation in the lifted model.
    pub indexed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranslationReport {
    /// Number of (scheme, formula, state, agent) comparisons.
    pub comparisons: usize,
    pub mismatches: Vec<TranslationMismatch>,
}

impl TranslationReport {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks `(M,w,i) |=in f <-> (M_c,w) |= f_i^in` and the outermost
/// counterpart for every formula, state and agent.
pub fn verify_theorem2(m: &Structure, corpus: &[Formula]) -> Result<TranslationReport, TranslationError> {
    verify_translation(m, corpus, &[Scheme::Innermost, Scheme::Outermost])
}

pub fn verify_translation(
    m: &Structure,
    corpus: &[Formula],
    schemes: &[Scheme],
) -> Result<TranslationReport, TranslationError> {
    let lifted = lift_to_indexed(m)?;
    let indexed = Checker::new(&lifted, EvalMode::Common)?;
    let mut report = TranslationReport {
        comparisons: 0,
        mismatches: Vec::new(),
    };
    for &scheme in schemes {
        let source = Checker::new(m, scheme.source_mode())?;
        for f in corpus {
            for i in m.agents() {
                let translated = translate(f, i, scheme)?;
                let left = source.extension(f, i)?;
                let right = indexed.extension(&translated, i)?;
                for s in 0..m.n_states() {
                    report.comparisons += 1;
                    if left.contains(s) != right.contains(s) {
                        report.mismatches.push(TranslationMismatch {
                            scheme,
                            formula: f.to_string(),
                            translated: translated.to_string(),
                            state: m.state_name(s).to_string(),
                            agent: i.get(),
                            ambiguous: left.contains(s),
                            indexed: right.contains(s),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Atom};
    use crate::structure::fixtures::m_red;

    fn a(n: u32) -> AgentId {
        AgentId::new(n).unwrap()
    }

    fn f(text: &str) -> Formula {
        parse(text).unwrap().expand(&Atom::parse("p").unwrap())
    }

    fn tr_in(text: &str, i: u32) -> String {
        translate_in(&f(text), a(i)).unwrap().to_string()
    }

    fn tr_ou(text: &str, i: u32) -> String {
        translate_ou(&f(text), a(i)).unwrap().to_string()
    }

    #[test]
    fn innermost_clauses() {
        assert_eq!(tr_in("CB{1,2} p", 1), "CB{1,2}(B1 p@1 & B2 p@2)");
        assert_eq!(tr_in("Pr2(p) >= 1/2", 1), "Pr2(p@2) >= 1/2");
        assert_eq!(tr_in("p & !q", 3), "p@3 & !q@3");
    }

    #[test]
    fn outermost_clauses() {
        assert_eq!(tr_ou("CB{1,2} p", 1), "CB{1,2} p@1");
        assert_eq!(tr_ou("Pr2(p) >= 1/2", 1), "Pr2(p@1) >= 1/2");
        assert_eq!(tr_ou("p", 2), "p@2");
    }

    #[test]
    fn indexed_input_is_rejected() {
        assert_eq!(
            translate_in(&f("p@1 & q"), a(1)),
            Err(TranslationError::AlreadyIndexed("p@1".into()))
        );
        assert!(translate_ou(&f("B1 p@2"), a(1)).is_err());
    }

    #[test]
    fn innermost_modal_translations_ignore_the_agent() {
        for text in ["Pr2(p & Pr1(q) >= 1/3) >= 1/2", "CB{1,3}(p | B2 q)", "E{1,2}^2 p"] {
            let one = translate_in(&f(text), a(1)).unwrap();
            for i in 2..=3 {
                assert_eq!(translate_in(&f(text), a(i)).unwrap(), one, "{text}");
            }
        }
    }

    #[test]
    fn everyone_believes_translates_to_its_definition() {
        let lhs = translate_in(&f("E{1,2} p"), a(3)).unwrap();
        assert_eq!(lhs, f("B1 p@1 & B2 p@2"));
    }

    #[test]
    fn translation_is_linear_in_shared_input() {
        let mut text = "p".to_string();
        for _ in 0..12 {
            text = format!("CB{{1,2,3}}({text} <-> q)");
        }
        let input = f(&text);
        let out = translate_in(&input, a(1)).unwrap();
        assert!(out.dag_size() <= 12 * input.dag_size() * 3);
    }

    #[test]
    fn lifting_m_red() {
        let lifted = lift_to_indexed(&m_red()).unwrap();
        assert_eq!(lifted.props(), ["p@1", "p@2"]);
        assert!(lifted.is_common_interpretation());
        assert_eq!(lifted.interpretation(a(1), 0).len(), 1);
        assert_eq!(lifted.interpretation(a(1), 1).len(), 2);
        assert_eq!(lifted.partition(a(2)), m_red().partition(a(2)));
        assert_eq!(lifted.belief(a(2), 0), m_red().belief(a(2), 0));
    }

    #[test]
    fn theorem2_on_m_red() {
        let corpus: Vec<Formula> = ["p", "B2 p", "Pr2(p) >= 1/2", "CB{1,2} p"]
            .iter()
            .map(|t| f(t))
            .collect();
        let report = verify_theorem2(&m_red(), &corpus).unwrap();
        assert!(report.is_ok(), "{report:?}");
        assert_eq!(report.comparisons, 2 * 4 * 2 * 2);
    }

    #[test]
    fn naive_clause_fails_on_m_red() {
        let report = verify_translation(&m_red(), &[f("CB{1,2} p")], &[Scheme::NaiveInnermost]).unwrap();
        let hit = report
            .mismatches
            .iter()
            .find(|x| x.state == "w1" && x.agent == 2)
            .expect("counterexample at (w1, 2)");
        assert!(!hit.ambiguous);
        assert!(hit.indexed);
    }
}
