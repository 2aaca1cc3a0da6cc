//! Truth relations.
//!
//! A query is a judgment `(M, w, i) |= f`: formula `f` at state `w`
//! according to agent `i`. The five modes differ in who interprets the
//! arguments of a probability formula about agent `j`, and which measure is
//! used:
//!
//! | mode      | argument reader | measure                        |
//! |-----------|-----------------|--------------------------------|
//! | `common`  | `i` (= anyone)  | `mu_{j,w}`                     |
//! | `ou`      | `i`             | `mu_{j,w}`                     |
//! | `in`      | `j`             | `mu_{j,w}`                     |
//! | `ou-ai`   | `i`             | `nu_j( . \| [[sig_{j,w}]]_i)`  |
//! | `in-ai`   | `j`             | `nu_j( . \| [[sig_{j,w}]]_j)`  |
//!
//! Evaluation is pointwise and memoized per top-level call, so only the states
//! a query actually depends on are visited. Common belief is decided by a
//! search over belief edges labelled with the believing agent.

use crate::formula::{everyone_believes, AgentId, AgentSet, Formula, ProbGe};
use crate::rational::Rational;
use crate::stateset::StateSet;
use crate::structure::{Structure, StructureError, Violation};
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use rustc_hash::{FxHashMap, FxHashSet};
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::marker::PhantomData;
use std::rc::Rc;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EvalMode {
    Common,
    Outermost,
    Innermost,
    OutermostAi,
    InnermostAi,
}

impl EvalMode {
    pub const ALL: [EvalMode; 5] = [
        EvalMode::Common,
        EvalMode::Outermost,
        EvalMode::Innermost,
        EvalMode::OutermostAi,
        EvalMode::InnermostAi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EvalMode::Common => "common",
            EvalMode::Outermost => "ou",
            EvalMode::Innermost => "in",
            EvalMode::OutermostAi => "ou-ai",
            EvalMode::InnermostAi => "in-ai",
        }
    }

    pub fn is_ai(self) -> bool {
        matches!(self, EvalMode::OutermostAi | EvalMode::InnermostAi)
    }

    /// Modes where the believing agent reads the arguments.
    pub fn is_innermost(self) -> bool {
        matches!(self, EvalMode::Innermost | EvalMode::InnermostAi)
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for EvalMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EvalMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected common, ou, in, ou-ai or in-ai)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error(
        "undefined conditional: agent {agent}'s signal `{signal}` at {state}, read by agent {reader}, is the event {{{}}} of prior mass 0",
        event.join(",")
    )]
    UndefinedConditional {
        agent: AgentId,
        state: String,
        reader: AgentId,
        signal: String,
        event: Vec<String>,
    },
    #[error("mode {mode} is unavailable: {reason}")]
    ModePrereqMissing { mode: EvalMode, reason: String },
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("unknown agent {0}")]
    UnknownAgent(u32),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error(
        "agent {agent}'s cell at {state} cannot measure {{{}}}",
        event.join(",")
    )]
    NonMeasurable {
        agent: AgentId,
        state: String,
        event: Vec<String>,
    },
    #[error("indexed proposition `{0}` outside common-interpretation mode")]
    IndexedOutsideCommon(String),
}

/// Evaluates formulas over one structure in one mode.
#[derive(Debug, Clone, Copy)]
pub struct Checker<'m> {
    m: &'m Structure,
    mode: EvalMode,
}

/// Result of [`Checker::valid_in_model`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Validity {
    pub valid: bool,
    /// First failing (state, agent), in state-major order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<(String, u32)>,
}

fn prereq(mode: EvalMode, reason: impl Into<String>) -> EvalError {
    EvalError::ModePrereqMissing {
        mode,
        reason: reason.into(),
    }
}

impl<'m> Checker<'m> {
    /// Fails unless the structure supports `mode`: a common interpretation for
    /// `common`; priors, propositional signals and A5 for the ai modes, plus A6
    /// for `ou-ai`.
    pub fn new(m: &'m Structure, mode: EvalMode) -> Result<Checker<'m>, EvalError> {
        match mode {
            EvalMode::Common if !m.is_common_interpretation() => {
                return Err(prereq(mode, "interpretations differ across agents"));
            }
            EvalMode::OutermostAi | EvalMode::InnermostAi => {
                if m.priors().is_none() {
                    return Err(prereq(mode, "structure has no priors"));
                }
                let report = m
                    .validate_signals()
                    .map_err(|e| prereq(mode, e.to_string()))?;
                let blocking = report.violations.iter().find(|v| match v {
                    Violation::SignalNotPropositional { .. } | Violation::A5 { .. } => true,
                    v => mode == EvalMode::OutermostAi && v.is_a6(),
                });
                if let Some(v) = blocking {
                    return Err(prereq(mode, v.to_string()));
                }
            }
            _ => {}
        }
        Ok(Checker { m, mode })
    }

    pub fn structure(&self) -> &'m Structure {
        self.m
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    fn run<'f>(&self) -> Eval<'m, 'f> {
        Eval {
            m: self.m,
            mode: self.mode,
            memo: FxHashMap::default(),
            succ: FxHashMap::default(),
            cond: FxHashMap::default(),
            _f: PhantomData,
        }
    }

    fn state(&self, name: &str) -> Result<usize, EvalError> {
        self.m
            .state_index(name)
            .ok_or_else(|| EvalError::UnknownState(name.to_string()))
    }

    /// `(M, state, agent) |= f`.
    pub fn eval(&self, f: &Formula, state: usize, agent: AgentId) -> Result<bool, EvalError> {
        self.check_query(f, agent)?;
        if state >= self.m.n_states() {
            return Err(EvalError::UnknownState(state.to_string()));
        }
        self.run().holds(f, state, agent)
    }

    pub fn eval_named(&self, f: &Formula, state: &str, agent: AgentId) -> Result<bool, EvalError> {
        self.eval(f, self.state(state)?, agent)
    }

    /// `[[f]]_agent` in this mode.
    pub fn extension(&self, f: &Formula, agent: AgentId) -> Result<StateSet, EvalError> {
        self.check_query(f, agent)?;
        self.run().extension(f, agent)
    }

    /// A session that answers many queries from one cache. Formulas queried
    /// through it must outlive it; shared subformulas are evaluated once.
    pub fn batch<'f>(&self) -> Batch<'m, 'f> {
        Batch {
            checker: *self,
            eval: self.run(),
            checked: FxHashSet::default(),
        }
    }

    /// States where `CB_group f` holds for the outer agent.
    pub fn common_belief_set(
        &self,
        group: &AgentSet,
        f: &Arc<Formula>,
        outer: AgentId,
    ) -> Result<StateSet, EvalError> {
        let cb = Formula::Cb(group.clone(), f.clone());
        self.extension(&cb, outer)
    }

    /// Extension of the literal expansion of `E^k_group f`.
    pub fn eb_k(
        &self,
        group: &AgentSet,
        f: &Arc<Formula>,
        k: u32,
        outer: AgentId,
    ) -> Result<StateSet, EvalError> {
        Ok(self
            .eb_levels(group, f, k, outer)?
            .pop()
            .expect("at least one level"))
    }

    /// Extensions of `E^1 f, ..., E^k_max f`, sharing one evaluation cache.
    pub fn eb_levels(
        &self,
        group: &AgentSet,
        f: &Arc<Formula>,
        k_max: u32,
        outer: AgentId,
    ) -> Result<Vec<StateSet>, EvalError> {
        self.check_query(&Formula::Cb(group.clone(), f.clone()), outer)?;
        let mut levels = Vec::with_capacity(k_max as usize);
        let mut cur = f.clone();
        for _ in 0..k_max.max(1) {
            cur = everyone_believes(group, &cur);
            levels.push(cur.clone());
        }
        let mut eval = self.run();
        levels.iter().map(|e| eval.extension(e, outer)).collect()
    }

    /// Whether `f` holds at every state for every agent.
    pub fn valid_in_model(&self, f: &Formula) -> Result<Validity, EvalError> {
        let mut eval = self.run();
        for agent in self.m.agents() {
            self.check_query(f, agent)?;
        }
        for s in 0..self.m.n_states() {
            for agent in self.m.agents() {
                if !eval.holds(f, s, agent)? {
                    return Ok(Validity {
                        valid: false,
                        counterexample: Some((self.m.state_name(s).to_string(), agent.get())),
                    });
                }
            }
        }
        Ok(Validity {
            valid: true,
            counterexample: None,
        })
    }

    /// Left-hand side `sum_k a_k Pr_j(f_k)` of a probability formula.
    pub fn prob_value(&self, p: &ProbGe, state: usize, agent: AgentId) -> Result<Rational, EvalError> {
        self.check_query(&Formula::Prob(p.clone()), agent)?;
        self.run().prob_lhs(p, state, agent)
    }

    fn check_query(&self, f: &Formula, agent: AgentId) -> Result<(), EvalError> {
        self.check_agent(agent)?;
        f.subformulas().into_iter().try_for_each(|g| self.check_node(g))
    }

    fn check_agent(&self, a: AgentId) -> Result<(), EvalError> {
        if a.get() as usize <= self.m.n_agents() {
            Ok(())
        } else {
            Err(EvalError::UnknownAgent(a.get()))
        }
    }

    /// Names and agents used directly by `g`, not by its children.
    fn check_node(&self, g: &Formula) -> Result<(), EvalError> {
        match g {
            Formula::Prop(_) => {
                self.m.atom_index(g).map_err(to_eval_error)?;
            }
            Formula::Indexed(ip) => {
                if self.mode != EvalMode::Common {
                    return Err(EvalError::IndexedOutsideCommon(ip.to_string()));
                }
                self.m.atom_index(g).map_err(to_eval_error)?;
            }
            Formula::Prob(p) => self.check_agent(p.agent)?,
            Formula::Cb(group, _) => group.iter().try_for_each(|a| self.check_agent(a))?,
            Formula::Not(_) | Formula::And(..) => {}
        }
        Ok(())
    }
}

fn to_eval_error(e: StructureError) -> EvalError {
    match e {
        StructureError::UnknownProp(p) => EvalError::UnknownProp(p),
        StructureError::UnknownAgent(a) => EvalError::UnknownAgent(a),
        other => EvalError::UnknownProp(other.to_string()),
    }
}

/// See [`Checker::batch`].
pub struct Batch<'m, 'f> {
    checker: Checker<'m>,
    eval: Eval<'m, 'f>,
    /// Nodes whose whole subformula has been checked.
    checked: FxHashSet<*const Formula>,
}

impl<'m, 'f> Batch<'m, 'f> {
    fn check(&mut self, f: &'f Formula, agent: AgentId) -> Result<(), EvalError> {
        self.checker.check_agent(agent)?;
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            if self.checked.insert(g as *const Formula) {
                self.checker.check_node(g)?;
                stack.extend(g.children().into_iter().map(|c| c.as_ref()));
            }
        }
        Ok(())
    }

    pub fn eval(&mut self, f: &'f Formula, state: usize, agent: AgentId) -> Result<bool, EvalError> {
        self.check(f, agent)?;
        if state >= self.checker.m.n_states() {
            return Err(EvalError::UnknownState(state.to_string()));
        }
        self.eval.holds(f, state, agent)
    }

    pub fn extension(&mut self, f: &'f Formula, agent: AgentId) -> Result<StateSet, EvalError> {
        self.check(f, agent)?;
        self.eval.extension(f, agent)
    }
}

/// Successor sets of agent `j`'s belief relation, one per state, as seen by
/// `outer` in `mode`.
pub fn belief_edges(
    m: &Structure,
    mode: EvalMode,
    outer: AgentId,
    j: AgentId,
) -> Result<Vec<StateSet>, EvalError> {
    let checker = Checker::new(m, mode)?;
    for a in [outer, j] {
        if a.index() >= m.n_agents() {
            return Err(EvalError::UnknownAgent(a.get()));
        }
    }
    let mut eval = checker.run();
    (0..m.n_states())
        .map(|s| eval.successors(j, s, outer).map(|r| (*r).clone()))
        .collect()
}

/// One evaluation run. Keys hold formula addresses, which stay valid because
/// every formula visited is borrowed for `'f`.
struct Eval<'m, 'f> {
    m: &'m Structure,
    mode: EvalMode,
    memo: FxHashMap<(*const Formula, u32, usize), bool>,
    succ: FxHashMap<(u32, u32, usize), Rc<StateSet>>,
    cond: FxHashMap<(u32, u32, usize), Rc<(StateSet, Rational)>>,
    _f: PhantomData<&'f Formula>,
}

impl<'m, 'f> Eval<'m, 'f> {
    fn extension(&mut self, f: &'f Formula, agent: AgentId) -> Result<StateSet, EvalError> {
        let mut out = self.m.empty_set();
        for s in 0..self.m.n_states() {
            if self.holds(f, s, agent)? {
                out.insert(s);
            }
        }
        Ok(out)
    }

    /// Who reads the arguments of a probability formula about `j`.
    fn reader(&self, outer: AgentId, j: AgentId) -> AgentId {
        if self.mode.is_innermost() {
            j
        } else {
            outer
        }
    }

    fn holds(&mut self, f: &'f Formula, state: usize, agent: AgentId) -> Result<bool, EvalError> {
        // Under innermost readings, modal formulas do not depend on the outer agent.
        let key_agent = match f {
            Formula::Prob(_) | Formula::Cb(..) if self.mode.is_innermost() => 0,
            _ => agent.get(),
        };
        let key = (f as *const Formula, key_agent, state);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = match f {
            Formula::Prop(_) | Formula::Indexed(_) => {
                let p = self.m.atom_index(f).map_err(to_eval_error)?;
                self.m.interpretation(agent, p).contains(state)
            }
            Formula::Not(g) => !self.holds(g, state, agent)?,
            Formula::And(a, b) => self.holds(a, state, agent)? && self.holds(b, state, agent)?,
            Formula::Prob(p) => {
                let v = self.prob_lhs(p, state, agent)? >= p.bound;
                if !self.mode.is_ai() {
                    // Cell measures make the value constant on j's cell.
                    for s in self.m.cell(p.agent, state).iter() {
                        self.memo.insert((key.0, key_agent, s), v);
                    }
                }
                v
            }
            Formula::Cb(group, body) => self.common_belief(group, body, state, agent)?,
        };
        self.memo.insert(key, v);
        Ok(v)
    }

    fn prob_lhs(&mut self, p: &'f ProbGe, state: usize, outer: AgentId) -> Result<Rational, EvalError> {
        let j = p.agent;
        let reader = self.reader(outer, j);
        let mut value = Rational::zero();
        if self.mode.is_ai() {
            let cond = self.condition(j, state, reader)?;
            let (event, mass) = &*cond;
            let prior = self.m.prior(j).expect("ai modes have priors");
            for t in &p.terms {
                let mut num = Rational::zero();
                for s in event.iter() {
                    if prior[s].is_positive() && self.holds(&t.arg, s, reader)? {
                        num += &prior[s];
                    }
                }
                value += &t.coeff * num / mass;
            }
        } else {
            let c = self.m.partition(j).cell_of(state);
            let cell = &self.m.partition(j).cells()[c];
            for t in &p.terms {
                let mut event = self.m.empty_set();
                for s in cell.iter() {
                    if self.holds(&t.arg, s, reader)? {
                        event.insert(s);
                    }
                }
                let mass = self
                    .m
                    .measure(j, c, &event)
                    .ok_or_else(|| EvalError::NonMeasurable {
                        agent: j,
                        state: self.m.state_name(state).to_string(),
                        event: self.m.names_of(&event),
                    })?;
                if t.coeff.is_one() {
                    value += mass;
                } else {
                    value += &t.coeff * mass;
                }
            }
        }
        Ok(value)
    }

    /// `[[sig_{j,state}]]_reader` and its `nu_j` mass, which must be positive.
    fn condition(
        &mut self,
        j: AgentId,
        state: usize,
        reader: AgentId,
    ) -> Result<Rc<(StateSet, Rational)>, EvalError> {
        let key = (j.get(), reader.get(), state);
        if let Some(c) = self.cond.get(&key) {
            return Ok(c.clone());
        }
        let signal = self.m.signal(j, state).expect("ai modes have signals");
        let event = self
            .m
            .prop_extension(reader, signal)
            .map_err(to_eval_error)?;
        let mass = self.m.prior_mass(j, &event).expect("ai modes have priors");
        if !mass.is_positive() {
            return Err(EvalError::UndefinedConditional {
                agent: j,
                state: self.m.state_name(state).to_string(),
                reader,
                signal: signal.to_string(),
                event: self.m.names_of(&event),
            });
        }
        let c = Rc::new((event, mass));
        self.cond.insert(key, c.clone());
        Ok(c)
    }

    /// States agent `j` considers possible at `state`.
    fn successors(&mut self, j: AgentId, state: usize, outer: AgentId) -> Result<Rc<StateSet>, EvalError> {
        let reader = if self.mode.is_ai() { self.reader(outer, j) } else { j };
        let key = (j.get(), reader.get(), state);
        if let Some(s) = self.succ.get(&key) {
            return Ok(s.clone());
        }
        let out = if self.mode.is_ai() {
            let cond = self.condition(j, state, reader)?;
            let prior = self.m.prior(j).expect("ai modes have priors");
            let mut out = self.m.empty_set();
            for s in cond.0.iter().filter(|&s| prior[s].is_positive()) {
                out.insert(s);
            }
            out
        } else {
            self.m.belief_at(j, state).support()
        };
        let out = Rc::new(out);
        self.succ.insert(key, out.clone());
        Ok(out)
    }

    /// Every state reached from `state` by one or more belief edges of `group`
    /// must satisfy `body`, read by the outer agent or, in innermost modes,
    /// by the agent of the last edge.
    fn common_belief(
        &mut self,
        group: &AgentSet,
        body: &'f Formula,
        state: usize,
        outer: AgentId,
    ) -> Result<bool, EvalError> {
        let mut seen: HashSet<(usize, AgentId)> = HashSet::new();
        let mut queue = VecDeque::new();
        for j in group.iter() {
            for t in self.successors(j, state, outer)?.iter() {
                if seen.insert((t, j)) {
                    queue.push_back((t, j));
                }
            }
        }
        while let Some((s, last)) = queue.pop_front() {
            let reader = if self.mode.is_innermost() { last } else { outer };
            if !self.holds(body, s, reader)? {
                return Ok(false);
            }
            for j in group.iter() {
                for t in self.successors(j, s, outer)?.iter() {
                    if seen.insert((t, j)) {
                        queue.push_back((t, j));
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Formats a state set by name, e.g. `{w1,w2}`.
pub fn format_set(m: &Structure, set: &StateSet) -> String {
    format!("{{{}}}", m.names_of(set).join(","))
}
