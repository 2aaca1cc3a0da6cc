//! Finite epistemic probability structures.
//!
//! A structure has a finite state space, and for every agent an information
//! partition, a probability space on each partition cell, and an
//! interpretation of the primitive propositions. Optional extras are a prior
//! per agent and a signal formula per (agent, state), which the
//! ambiguous-information semantics need.
//!
//! Each cell carries a finite algebra, given by its atoms; the measure of a
//! measurable set is the sum of the weights of the atoms it contains.

mod io;
mod validate;

pub use crate::semantics::belief_edges;
pub use io::{CellBeliefFile, StructureFile};
pub use validate::{Report, Violation};

use crate::formula::{AgentId, AgentSet, Atom, Formula, IndexedPropId};
use crate::rational::{int, Rational};
use crate::stateset::StateSet;
use num_traits::{Signed, Zero};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("invalid model file: {0}")]
    Json(String),
    #[error("a structure needs at least one {0}")]
    Empty(&'static str),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("invalid proposition name `{0}`")]
    InvalidPropName(String),
    #[error("duplicate proposition `{0}`")]
    DuplicateProp(String),
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("expected {expected} entries for `{what}`, found {found}")]
    Arity {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("partition of agent {agent} is malformed: {detail}")]
    BadPartition { agent: AgentId, detail: String },
    #[error("beliefs of agent {agent}, cell {cell}: {detail}")]
    BadBelief {
        agent: AgentId,
        cell: usize,
        detail: String,
    },
    #[error("{0}")]
    BadRational(#[from] crate::rational::RationalParseError),
    #[error("signal of agent {agent} at `{state}` does not parse: {error}")]
    BadSignal {
        agent: AgentId,
        state: String,
        error: crate::formula::ParseError,
    },
    #[error("formula `{0}` is not propositional")]
    NotPropositional(String),
    #[error("structure has no signals")]
    MissingSignals,
    #[error("structure has no priors")]
    MissingPriors,
    #[error("A1-A3 do not hold: {0}")]
    CoreInvalid(String),
    #[error("structure is not a common-interpretation structure")]
    NotCommonInterpretation,
    #[error("unknown agent {0}")]
    UnknownAgent(u32),
}

/// The probability space of one agent on one partition cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellBelief {
    /// Atoms of the cell's algebra; a partition of the cell.
    pub atoms: Vec<StateSet>,
    /// Measure of each atom.
    pub weights: Vec<Rational>,
}

impl CellBelief {
    /// Powerset algebra with the given per-state masses.
    pub fn singletons(universe: usize, masses: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let (atoms, weights) = masses
            .into_iter()
            .map(|(s, w)| (StateSet::from_indices(universe, [s]), w))
            .unzip();
        CellBelief { atoms, weights }
    }

    /// Atoms ordered by their least state, so equal algebras compare equal.
    fn canonical(self) -> Self {
        if self.atoms.windows(2).all(|w| w[0].iter().lt(w[1].iter())) {
            return self;
        }
        let mut pairs: Vec<_> = self.atoms.into_iter().zip(self.weights).collect();
        pairs.sort_by(|(a, _), (b, _)| a.iter().cmp(b.iter()));
        let (atoms, weights) = pairs.into_iter().unzip();
        CellBelief { atoms, weights }
    }

    pub fn atom_of(&self, state: usize) -> Option<usize> {
        self.atoms.iter().position(|a| a.contains(state))
    }

    /// States lying in an atom of positive measure.
    pub fn support(&self) -> StateSet {
        let universe = self.atoms.first().map_or(0, |a| a.universe());
        let mut out = StateSet::empty(universe);
        for (atom, w) in self.atoms.iter().zip(&self.weights) {
            if w.is_positive() {
                out.union_with(atom);
            }
        }
        out
    }

    pub fn is_powerset(&self) -> bool {
        self.atoms.iter().all(|a| a.len() == 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<StateSet>,
    cell_of: Vec<usize>,
}

impl Partition {
    pub fn cells(&self) -> &[StateSet] {
        &self.cells
    }

    pub fn cell_of(&self, state: usize) -> usize {
        self.cell_of[state]
    }

    pub fn cell_containing(&self, state: usize) -> &StateSet {
        &self.cells[self.cell_of[state]]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Raw material for [`Structure::new`]. States are referred to by position.
#[derive(Debug, Clone)]
pub struct StructureParts {
    pub agents: usize,
    pub states: Vec<String>,
    pub props: Vec<String>,
    /// Per agent, the list of cells.
    pub partitions: Vec<Vec<StateSet>>,
    /// Per agent, per cell (same order as `partitions`).
    pub beliefs: Vec<Vec<CellBelief>>,
    /// Per agent, per proposition: the states where the agent reads it as true.
    pub interpretations: Vec<Vec<StateSet>>,
    /// Per agent, per state.
    pub priors: Option<Vec<Vec<Rational>>>,
    /// Per agent, per state.
    pub signals: Option<Vec<Vec<Formula>>>,
}

/// A finite epistemic probability structure. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    agents: usize,
    states: Vec<String>,
    state_index: HashMap<String, usize>,
    props: Vec<String>,
    prop_index: HashMap<String, usize>,
    partitions: Vec<Partition>,
    beliefs: Vec<Vec<CellBelief>>,
    interpretations: Vec<Vec<StateSet>>,
    priors: Option<Vec<Vec<Rational>>>,
    signals: Option<Vec<Vec<Formula>>>,
}

fn arity(what: &'static str, expected: usize, found: usize) -> Result<(), StructureError> {
    if expected == found {
        Ok(())
    } else {
        Err(StructureError::Arity {
            what,
            expected,
            found,
        })
    }
}

impl Structure {
    /// Checks shape and well-formedness (names, partitions, table sizes).
    /// Probabilistic assumptions are left to [`Structure::validate_core`].
    pub fn new(parts: StructureParts) -> Result<Structure, StructureError> {
        let StructureParts {
            agents,
            states,
            props,
            partitions,
            beliefs,
            interpretations,
            priors,
            signals,
        } = parts;
        if agents == 0 {
            return Err(StructureError::Empty("agent"));
        }
        if states.is_empty() {
            return Err(StructureError::Empty("state"));
        }
        if props.is_empty() {
            return Err(StructureError::Empty("proposition"));
        }
        let n = states.len();
        let mut state_index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(StructureError::UnknownState(s.clone()));
            }
            if state_index.insert(s.clone(), i).is_some() {
                return Err(StructureError::DuplicateState(s.clone()));
            }
        }
        let mut prop_index = HashMap::new();
        for (i, p) in props.iter().enumerate() {
            if Atom::parse(p).is_none() {
                return Err(StructureError::InvalidPropName(p.clone()));
            }
            if prop_index.insert(p.clone(), i).is_some() {
                return Err(StructureError::DuplicateProp(p.clone()));
            }
        }
        arity("partitions", agents, partitions.len())?;
        let mut parts_out = Vec::with_capacity(agents);
        for (a, cells) in partitions.into_iter().enumerate() {
            let agent = AgentId::from_index(a);
            let mut cell_of = vec![usize::MAX; n];
            for (c, cell) in cells.iter().enumerate() {
                if cell.universe() != n {
                    return Err(StructureError::BadPartition {
                        agent,
                        detail: format!("cell {c} is over the wrong universe"),
                    });
                }
                if cell.is_empty() {
                    return Err(StructureError::BadPartition {
                        agent,
                        detail: format!("cell {c} is empty"),
                    });
                }
                for s in cell.iter() {
                    if cell_of[s] != usize::MAX {
                        return Err(StructureError::BadPartition {
                            agent,
                            detail: format!("state `{}` lies in two cells", states[s]),
                        });
                    }
                    cell_of[s] = c;
                }
            }
            if let Some(s) = cell_of.iter().position(|&c| c == usize::MAX) {
                return Err(StructureError::BadPartition {
                    agent,
                    detail: format!("state `{}` is in no cell", states[s]),
                });
            }
            parts_out.push(Partition { cells, cell_of });
        }
        arity("beliefs", agents, beliefs.len())?;
        for (a, per_cell) in beliefs.iter().enumerate() {
            let agent = AgentId::from_index(a);
            arity("belief cells", parts_out[a].len(), per_cell.len())?;
            for (c, b) in per_cell.iter().enumerate() {
                let bad = |detail: &str| StructureError::BadBelief {
                    agent,
                    cell: c,
                    detail: detail.to_string(),
                };
                if b.atoms.len() != b.weights.len() {
                    return Err(bad("atom and weight counts differ"));
                }
                if b.atoms.is_empty() {
                    return Err(bad("no atoms"));
                }
                if b.atoms.iter().any(|at| at.universe() != n) {
                    return Err(bad("atom over the wrong universe"));
                }
            }
        }
        arity("interpretations", agents, interpretations.len())?;
        for per_prop in &interpretations {
            arity("interpreted propositions", props.len(), per_prop.len())?;
            if per_prop.iter().any(|s| s.universe() != n) {
                return Err(StructureError::Arity {
                    what: "interpretation universe",
                    expected: n,
                    found: per_prop.iter().map(|s| s.universe()).max().unwrap_or(0),
                });
            }
        }
        if let Some(pr) = &priors {
            arity("priors", agents, pr.len())?;
            for row in pr {
                arity("prior entries", n, row.len())?;
            }
        }
        if let Some(sig) = &signals {
            arity("signals", agents, sig.len())?;
            for row in sig {
                arity("signal entries", n, row.len())?;
            }
        }
        let beliefs = beliefs
            .into_iter()
            .map(|row| row.into_iter().map(CellBelief::canonical).collect())
            .collect();
        Ok(Structure {
            agents,
            states,
            state_index,
            props,
            prop_index,
            partitions: parts_out,
            beliefs,
            interpretations,
            priors,
            signals,
        })
    }

    /// Decomposes into parts, e.g. to build a modified copy.
    pub fn to_parts(&self) -> StructureParts {
        StructureParts {
            agents: self.agents,
            states: self.states.clone(),
            props: self.props.clone(),
            partitions: self.partitions.iter().map(|p| p.cells.clone()).collect(),
            beliefs: self.beliefs.clone(),
            interpretations: self.interpretations.clone(),
            priors: self.priors.clone(),
            signals: self.signals.clone(),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.agents
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.agents).map(AgentId::from_index)
    }

    pub fn all_agents(&self) -> AgentSet {
        AgentSet::all(self.agents)
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.states[state]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn names_of(&self, set: &StateSet) -> Vec<String> {
        set.iter().map(|s| self.states[s].clone()).collect()
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.prop_index.get(name).copied()
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.n_states())
    }

    pub fn full_set(&self) -> StateSet {
        StateSet::full(self.n_states())
    }

    pub fn check_agent(&self, agent: AgentId) -> Result<(), StructureError> {
        if agent.index() < self.agents {
            Ok(())
        } else {
            Err(StructureError::UnknownAgent(agent.get()))
        }
    }

    pub fn partition(&self, agent: AgentId) -> &Partition {
        &self.partitions[agent.index()]
    }

    /// `Pi_agent(state)`.
    pub fn cell(&self, agent: AgentId, state: usize) -> &StateSet {
        self.partitions[agent.index()].cell_containing(state)
    }

    pub fn belief(&self, agent: AgentId, cell: usize) -> &CellBelief {
        &self.beliefs[agent.index()][cell]
    }

    /// The probability space the agent uses at `state`.
    pub fn belief_at(&self, agent: AgentId, state: usize) -> &CellBelief {
        let c = self.partitions[agent.index()].cell_of(state);
        &self.beliefs[agent.index()][c]
    }

    /// `[[p]]_agent` for the proposition at position `prop`.
    pub fn interpretation(&self, agent: AgentId, prop: usize) -> &StateSet {
        &self.interpretations[agent.index()][prop]
    }

    pub fn priors(&self) -> Option<&Vec<Vec<Rational>>> {
        self.priors.as_ref()
    }

    pub fn prior(&self, agent: AgentId) -> Option<&[Rational]> {
        self.priors.as_ref().map(|p| p[agent.index()].as_slice())
    }

    pub fn signals(&self) -> Option<&Vec<Vec<Formula>>> {
        self.signals.as_ref()
    }

    pub fn signal(&self, agent: AgentId, state: usize) -> Option<&Formula> {
        self.signals.as_ref().map(|s| &s[agent.index()][state])
    }

    pub fn with_priors(&self, priors: Option<Vec<Vec<Rational>>>) -> Result<Structure, StructureError> {
        let mut parts = self.to_parts();
        parts.priors = priors;
        Structure::new(parts)
    }

    pub fn with_signals(&self, signals: Option<Vec<Vec<Formula>>>) -> Result<Structure, StructureError> {
        let mut parts = self.to_parts();
        parts.signals = signals;
        Structure::new(parts)
    }

    /// The proposition `true` expands over: the first one declared.
    pub fn designated_atom(&self) -> Atom {
        Atom::parse(&self.props[0]).expect("validated at construction")
    }

    /// Position of an atomic formula's proposition.
    pub fn atom_index(&self, f: &Formula) -> Result<usize, StructureError> {
        let name = match f {
            Formula::Prop(p) => p.as_str().to_string(),
            Formula::Indexed(ip) => ip.to_string(),
            other => return Err(StructureError::NotPropositional(other.to_string())),
        };
        self.prop_index(&name)
            .ok_or(StructureError::UnknownProp(name))
    }

    /// `mu_{agent,cell}(event)`; `None` when the event cuts through an atom.
    pub fn measure(&self, agent: AgentId, cell: usize, event: &StateSet) -> Option<Rational> {
        let b = self.belief(agent, cell);
        let mut total = Rational::zero();
        for (atom, w) in b.atoms.iter().zip(&b.weights) {
            if atom.is_subset(event) {
                total += w;
            } else if !atom.is_disjoint(event) {
                return None;
            }
        }
        Some(total)
    }

    /// `nu_agent(event)`.
    pub fn prior_mass(&self, agent: AgentId, event: &StateSet) -> Option<Rational> {
        let prior = self.prior(agent)?;
        Some(event.iter().map(|s| &prior[s]).sum())
    }

    /// `[[f]]_agent` for a propositional formula.
    pub fn prop_extension(&self, agent: AgentId, f: &Formula) -> Result<StateSet, StructureError> {
        self.check_agent(agent)?;
        match f {
            Formula::Prop(_) => Ok(self.interpretation(agent, self.atom_index(f)?).clone()),
            Formula::Not(g) => Ok(self.prop_extension(agent, g)?.complement()),
            Formula::And(a, b) => Ok(self
                .prop_extension(agent, a)?
                .intersection(&self.prop_extension(agent, b)?)),
            other => Err(StructureError::NotPropositional(other.to_string())),
        }
    }

    /// States reachable from `state` by chains of `group` members' cells.
    pub fn reachable(&self, group: &AgentSet, state: usize) -> StateSet {
        let mut seen = StateSet::from_indices(self.n_states(), [state]);
        let mut frontier = vec![state];
        while let Some(s) = frontier.pop() {
            for agent in group.iter() {
                if agent.index() >= self.agents {
                    continue;
                }
                for t in self.cell(agent, s).iter() {
                    if !seen.contains(t) {
                        seen.insert(t);
                        frontier.push(t);
                    }
                }
            }
        }
        seen
    }

    /// True iff all agents interpret every proposition identically.
    pub fn is_common_interpretation(&self) -> bool {
        self.interpretations.windows(2).all(|w| w[0] == w[1])
    }

    /// True iff priors are present and identical across agents.
    pub fn has_identical_priors(&self) -> bool {
        self.priors
            .as_ref()
            .is_some_and(|p| p.windows(2).all(|w| w[0] == w[1]))
    }

    /// Priors generating the beliefs: every cell gets mass `1/N_i`, spread
    /// over the cell by its measure (uniformly within an atom).
    pub fn generate_priors(&self) -> Result<Vec<Vec<Rational>>, StructureError> {
        let report = self.validate_core();
        if let Some(v) = report.violations.iter().find(|v| v.blocks_prior_generation()) {
            return Err(StructureError::CoreInvalid(v.to_string()));
        }
        let mut priors = Vec::with_capacity(self.agents);
        for agent in self.agents() {
            let mut nu = vec![Rational::zero(); self.n_states()];
            let cells = self.partition(agent).len() as i64;
            for c in 0..self.partition(agent).len() {
                let b = self.belief(agent, c);
                for (atom, w) in b.atoms.iter().zip(&b.weights) {
                    let share = w / int(cells * atom.len() as i64);
                    for s in atom.iter() {
                        nu[s] = share.clone();
                    }
                }
            }
            priors.push(nu);
        }
        Ok(priors)
    }

    /// Lifted name of `p` as read by `agent`, i.e. `p@agent`.
    pub fn indexed_name(base: &str, agent: AgentId) -> String {
        format!("{}", IndexedPropId::new(crate::formula::PropId::new(base).expect("plain"), agent))
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    //! In-code copies of the hand-built fixture models.
    use super::*;
    use crate::rational::ratio;

    pub fn set(n: usize, idx: &[usize]) -> StateSet {
        StateSet::from_indices(n, idx.iter().copied())
    }

    /// Two states; agent 1 knows the state, agent 2 does not. Agent 1 reads
    /// `p` as true only at w1, agent 2 at both states.
    pub fn m_red() -> Structure {
        Structure::new(StructureParts {
            agents: 2,
            states: vec!["w1".into(), "w2".into()],
            props: vec!["p".into()],
            partitions: vec![vec![set(2, &[0]), set(2, &[1])], vec![set(2, &[0, 1])]],
            beliefs: vec![
                vec![
                    CellBelief::singletons(2, [(0, int(1))]),
                    CellBelief::singletons(2, [(1, int(1))]),
                ],
                vec![CellBelief::singletons(2, [(0, ratio(1, 2)), (1, ratio(1, 2))])],
            ],
            interpretations: vec![vec![set(2, &[0])], vec![set(2, &[0, 1])]],
            priors: None,
            signals: None,
        })
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::formula::parse;
    use crate::rational::ratio;

    fn a(n: u32) -> AgentId {
        AgentId::new(n).unwrap()
    }

    fn ext(m: &Structure, agent: u32, text: &str) -> Vec<usize> {
        let f = parse(text).unwrap().expand(&m.designated_atom());
        m.prop_extension(a(agent), &f).unwrap().iter().collect()
    }

    #[test]
    fn propositional_extensions() {
        let m = m_red();
        assert_eq!(ext(&m, 1, "p"), vec![0]);
        assert_eq!(ext(&m, 2, "p"), vec![0, 1]);
        assert!(ext(&m, 1, "p & !p").is_empty());
        assert!(ext(&m, 2, "p & !p").is_empty());
        assert_eq!(ext(&m, 1, "true"), vec![0, 1]);
    }

    #[test]
    fn prop_extension_rejects_modal_formulas() {
        let m = m_red();
        let f = parse("B1 p").unwrap().expand(&m.designated_atom());
        assert!(matches!(
            m.prop_extension(a(1), &f),
            Err(StructureError::NotPropositional(_))
        ));
    }

    #[test]
    fn reachability() {
        let m = m_red();
        let both = AgentSet::from_numbers(&[1, 2]).unwrap();
        let one = AgentSet::from_numbers(&[1]).unwrap();
        assert_eq!(m.reachable(&both, 0).iter().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(m.reachable(&one, 0).iter().collect::<Vec<_>>(), vec![0]);
        let two = AgentSet::from_numbers(&[2]).unwrap();
        assert_eq!(m.reachable(&two, 1).len(), 2);
    }

    #[test]
    fn common_interpretation_predicate() {
        let m = m_red();
        assert!(!m.is_common_interpretation());
        let mut parts = m.to_parts();
        parts.interpretations[1] = parts.interpretations[0].clone();
        assert!(Structure::new(parts).unwrap().is_common_interpretation());
        let mut single = m.to_parts();
        single.agents = 1;
        single.partitions.truncate(1);
        single.beliefs.truncate(1);
        single.interpretations.truncate(1);
        assert!(Structure::new(single).unwrap().is_common_interpretation());
    }

    #[test]
    fn generated_priors_for_m_red() {
        let m = m_red();
        let nu = m.generate_priors().unwrap();
        assert_eq!(nu[0], vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(nu[1], vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn generated_priors_are_uniform_under_symmetry() {
        let parts = StructureParts {
            agents: 1,
            states: vec!["a".into(), "b".into(), "c".into()],
            props: vec!["p".into()],
            partitions: vec![vec![set(3, &[0]), set(3, &[1]), set(3, &[2])]],
            beliefs: vec![(0..3).map(|s| CellBelief::singletons(3, [(s, int(1))])).collect()],
            interpretations: vec![vec![set(3, &[0])]],
            priors: None,
            signals: None,
        };
        let m = Structure::new(parts).unwrap();
        assert_eq!(m.generate_priors().unwrap()[0], vec![ratio(1, 3); 3]);
    }

    #[test]
    fn generate_priors_requires_core_assumptions() {
        let mut parts = m_red().to_parts();
        parts.beliefs[1][0].weights = vec![ratio(1, 2), ratio(49, 100)];
        let m = Structure::new(parts).unwrap();
        assert!(matches!(m.generate_priors(), Err(StructureError::CoreInvalid(_))));
    }

    #[test]
    fn coarse_atoms_split_prior_mass_evenly() {
        let mut parts = m_red().to_parts();
        let coarse = CellBelief {
            atoms: vec![set(2, &[0, 1])],
            weights: vec![int(1)],
        };
        // Both agents get the coarse cell so that A3 and A4 hold.
        parts.partitions[0] = vec![set(2, &[0, 1])];
        parts.beliefs = vec![vec![coarse.clone()], vec![coarse]];
        parts.interpretations = vec![vec![set(2, &[0, 1])]; 2];
        let m = Structure::new(parts).unwrap();
        assert!(m.validate_core().is_ok());
        assert_eq!(m.generate_priors().unwrap()[1], vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(m.measure(a(2), 0, &set(2, &[0])), None);
        assert_eq!(m.measure(a(2), 0, &set(2, &[0, 1])), Some(int(1)));
    }

    #[test]
    fn malformed_partitions_are_rejected() {
        let mut parts = m_red().to_parts();
        parts.partitions[0] = vec![set(2, &[0]), set(2, &[0, 1])];
        assert!(matches!(Structure::new(parts), Err(StructureError::BadPartition { .. })));
        let mut parts = m_red().to_parts();
        parts.partitions[0] = vec![set(2, &[0])];
        parts.beliefs[0].truncate(1);
        assert!(matches!(Structure::new(parts), Err(StructureError::BadPartition { .. })));
    }
}
