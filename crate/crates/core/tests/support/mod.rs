//! Shared test helpers: a brute-force evaluator and fixture loading.
#![allow(dead_code)]

pub mod brute;

use ambilogic::{parse, AgentId, Formula, Structure};
use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> Structure {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    Structure::from_json(&text).expect("fixture loads")
}

pub fn agent(n: u32) -> AgentId {
    AgentId::new(n).unwrap()
}

/// Parses `text` and expands it against `m`'s designated proposition.
pub fn formula(m: &Structure, text: &str) -> Formula {
    parse(text).unwrap().expand(&m.designated_atom())
}

/// A hand-derived query result on one of the fixture models.
pub struct Example {
    pub model: &'static str,
    /// Add priors from `generate_priors` before evaluating.
    pub with_priors: bool,
    pub mode: ambilogic::EvalMode,
    pub formula: &'static str,
    pub state: &'static str,
    pub agent: u32,
    pub expected: bool,
    /// Left-hand side of a top-level probability formula.
    pub lhs: Option<&'static str>,
}

pub fn load_example_model(e: &Example) -> Structure {
    let m = fixture(e.model);
    if e.with_priors {
        let priors = m.generate_priors().unwrap();
        m.with_priors(Some(priors)).unwrap()
    } else {
        m
    }
}

pub fn hand_derived() -> Vec<Example> {
    use ambilogic::EvalMode::*;
    let ex = |model, with_priors, mode, formula, state, agent, expected, lhs| Example {
        model,
        with_priors,
        mode,
        formula,
        state,
        agent,
        expected,
        lhs,
    };
    vec![
        ex("m_red", false, Outermost, "Pr2(p) >= 1", "w1", 1, false, Some("1/2")),
        ex("m_red", false, Outermost, "Pr2(p) = 1/2", "w1", 1, true, None),
        ex("m_red", false, Outermost, "Pr2(p) = 1/2", "w2", 1, true, None),
        ex("m_red", false, Outermost, "Pr2(p) >= 1/2", "w1", 1, true, Some("1/2")),
        ex("m_red", false, Outermost, "Pr2(p) >= 1/2", "w2", 2, true, Some("1")),
        ex("m_red", false, Innermost, "Pr2(p) >= 1", "w1", 1, true, Some("1")),
        ex("m_red", false, Outermost, "p", "w1", 1, true, None),
        ex("m_red", false, Outermost, "p", "w2", 1, false, None),
        ex("m_red", false, Outermost, "p", "w2", 2, true, None),
        ex("m_red", false, Outermost, "CB{1,2} p", "w1", 2, true, None),
        ex("m_red", false, Outermost, "CB{1,2} p", "w2", 2, true, None),
        ex("m_red", false, Outermost, "CB{1,2} p", "w1", 1, false, None),
        ex("m_red", false, Innermost, "CB{1,2} p", "w1", 1, false, None),
        ex("m_red", false, Innermost, "CB{1,2} p", "w2", 1, false, None),
        ex("m_red", false, Innermost, "E{2} p", "w1", 1, true, None),
        ex("m_red", false, Innermost, "E{2} p", "w2", 1, true, None),
        ex("m_red", false, Outermost, "E{1} p", "w1", 1, true, None),
        ex("m_red", false, Outermost, "E{1} p", "w2", 1, false, None),
        ex("m_red", false, Innermost, "true", "w2", 2, true, None),
        ex("m_ck", false, Common, "CB{1,2} p", "w1", 1, false, None),
        ex("m_ck", false, Common, "B1 p", "w1", 2, true, Some("1")),
        ex("m_ck", false, Common, "Pr2(p) = 1/2", "w2", 1, true, None),
        ex("m_ai", false, OutermostAi, "Pr1(p) >= 1", "a", 2, true, Some("1")),
        ex("m_ai", false, InnermostAi, "Pr1(p) >= 1", "a", 2, false, Some("1/2")),
        ex("m_ai", false, InnermostAi, "Pr1(p) = 1/2", "a", 2, true, None),
        ex("m_ai", false, OutermostAi, "Pr1(p) >= 1", "b", 2, false, Some("0")),
        ex("m_ai", false, OutermostAi, "Pr1(p) = 1/2", "a", 1, true, None),
        ex("m_sig", true, OutermostAi, "Pr1(p) >= 1", "w1", 1, true, Some("1")),
        ex("m_sig", true, OutermostAi, "Pr1(p) >= 1", "w2", 1, false, Some("0")),
        ex("m_sig", true, InnermostAi, "Pr2(p) >= 1", "w1", 2, true, Some("1")),
        ex("m_sig", true, OutermostAi, "Pr2(p) = 1/2", "w1", 1, true, None),
    ]
}
