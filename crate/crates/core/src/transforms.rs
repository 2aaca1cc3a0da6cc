//! Model constructions relating the ambiguous semantics to the classical one,
//! and verifiers that replay their correctness claims on concrete models.
//!
//! - [`fix_interpretation`]: everyone adopts agent `i`'s interpretation;
//!   outermost truth for `i` becomes classical truth.
//! - [`disjoint_copies`]: one copy of the state space per agent, copy `j`
//!   carrying `j`'s interpretation and every agent's beliefs landing in its own
//!   copy; innermost truth for `j` becomes classical truth at copy `j`.
//! - [`label_partitions`]: restrict a common-interpretation model to the
//!   states reachable from a root and name every cell by a fresh proposition
//!   used as the signal, so the ambiguous-information semantics apply.

use crate::formula::{AgentId, Formula, PropId};
use crate::rational::Rational;
use crate::semantics::{Checker, EvalError, EvalMode};
use crate::stateset::StateSet;
use crate::structure::{CellBelief, Structure, StructureError, StructureParts};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("structure is not a common-interpretation structure")]
    NotCommonInterpretation,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown agent {0}")]
    UnknownAgent(u32),
    #[error("state map does not fit the claim: {0}")]
    ClaimSpecMismatch(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Where a state of a constructed model comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappedState {
    pub state: String,
    pub source: String,
    /// The copy index, for [`disjoint_copies`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<u32>,
}

/// New state -> (old state, copy tag). Total on the new model and injective.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateMap {
    pub states: Vec<MappedState>,
}

impl StateMap {
    pub fn identity(m: &Structure) -> StateMap {
        StateMap {
            states: m
                .state_names()
                .iter()
                .map(|s| MappedState {
                    state: s.clone(),
                    source: s.clone(),
                    tag: None,
                })
                .collect(),
        }
    }
}

/// A proposition introduced by [`label_partitions`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreshProp {
    pub prop: String,
    pub agent: u32,
    pub cell: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labelling {
    pub root: String,
    pub map: StateMap,
    pub fresh: Vec<FreshProp>,
}

/// `M'_i`: `M` with every interpretation replaced by agent `i`'s.
pub fn fix_interpretation(m: &Structure, i: AgentId) -> Result<Structure, TransformError> {
    m.check_agent(i)?;
    let mut parts = m.to_parts();
    let pi = parts.interpretations[i.index()].clone();
    parts.interpretations = vec![pi; m.n_agents()];
    Ok(Structure::new(parts)?)
}

/// Name of copy `j` of `state`.
pub fn copy_name(state: &str, j: AgentId) -> String {
    format!("{state}#{j}")
}

/// One copy of `M` per agent, with a common interpretation.
pub fn disjoint_copies(m: &Structure) -> Result<(Structure, StateMap), TransformError> {
    let n = m.n_agents();
    let size = m.n_states() * n;
    let copy = |s: usize, j: AgentId| s * n + j.index();
    let all: Vec<AgentId> = m.agents().collect();
    let lift = |set: &StateSet, tags: &[AgentId]| {
        let mut out = StateSet::empty(size);
        for s in set.iter() {
            for &j in tags {
                out.insert(copy(s, j));
            }
        }
        out
    };

    let mut states = Vec::with_capacity(size);
    let mut map = StateMap::default();
    for s in 0..m.n_states() {
        for j in m.agents() {
            let name = copy_name(m.state_name(s), j);
            map.states.push(MappedState {
                state: name.clone(),
                source: m.state_name(s).to_string(),
                tag: Some(j.get()),
            });
            states.push(name);
        }
    }

    let partitions = m
        .agents()
        .map(|i| {
            m.partition(i)
                .cells()
                .iter()
                .map(|c| lift(c, &all))
                .collect()
        })
        .collect();

    let beliefs = m
        .agents()
        .map(|i| {
            (0..m.partition(i).len())
                .map(|c| {
                    let b = m.belief(i, c);
                    let mut atoms = Vec::new();
                    let mut weights = Vec::new();
                    for l in m.agents() {
                        for (atom, w) in b.atoms.iter().zip(&b.weights) {
                            atoms.push(lift(atom, &[l]));
                            weights.push(if l == i { w.clone() } else { Rational::zero() });
                        }
                    }
                    CellBelief { atoms, weights }
                })
                .collect()
        })
        .collect();

    let shared: Vec<StateSet> = (0..m.props().len())
        .map(|p| {
            let mut out = StateSet::empty(size);
            for j in m.agents() {
                for s in m.interpretation(j, p).iter() {
                    out.insert(copy(s, j));
                }
            }
            out
        })
        .collect();

    let priors = m.priors().map(|rows| {
        m.agents()
            .map(|i| {
                let mut nu = vec![Rational::zero(); size];
                for (s, v) in rows[i.index()].iter().enumerate() {
                    nu[copy(s, i)] = v.clone();
                }
                nu
            })
            .collect()
    });

    let out = Structure::new(StructureParts {
        agents: n,
        states,
        props: m.props().to_vec(),
        partitions,
        beliefs,
        interpretations: vec![shared; n],
        priors,
        signals: None,
    })?;
    Ok((out, map))
}

/// Restriction of a common-interpretation `M` to the states reachable from
/// `root`, with one fresh proposition per cell serving as the signal.
pub fn label_partitions(m: &Structure, root: &str) -> Result<(Structure, Labelling), TransformError> {
    if !m.is_common_interpretation() {
        return Err(TransformError::NotCommonInterpretation);
    }
    let r = m
        .state_index(root)
        .ok_or_else(|| TransformError::UnknownState(root.to_string()))?;
    let keep: Vec<usize> = m.reachable(&m.all_agents(), r).iter().collect();
    let size = keep.len();
    let restrict = |set: &StateSet| {
        StateSet::from_indices(
            size,
            keep.iter().enumerate().filter(|(_, &s)| set.contains(s)).map(|(k, _)| k),
        )
    };
    let kept = StateSet::from_indices(m.n_states(), keep.iter().copied());

    let mut partitions = Vec::with_capacity(m.n_agents());
    let mut beliefs = Vec::with_capacity(m.n_agents());
    for i in m.agents() {
        let mut cells = Vec::new();
        let mut bs = Vec::new();
        for (c, cell) in m.partition(i).cells().iter().enumerate() {
            if cell.is_subset(&kept) {
                cells.push(restrict(cell));
                let b = m.belief(i, c);
                bs.push(CellBelief {
                    atoms: b.atoms.iter().map(restrict).collect(),
                    weights: b.weights.clone(),
                });
            }
        }
        partitions.push(cells);
        beliefs.push(bs);
    }

    let mut props = m.props().to_vec();
    let mut taken: HashSet<String> = props.iter().cloned().collect();
    let mut fresh = Vec::new();
    let mut label_of: Vec<Vec<usize>> = Vec::new();
    for i in m.agents() {
        let mut labels = Vec::new();
        for (c, cell) in partitions[i.index()].iter().enumerate() {
            let base = format!("p_{i}_c{c}");
            let mut name = base.clone();
            let mut k = 1;
            while taken.contains(&name) {
                name = format!("{base}_{k}");
                k += 1;
            }
            taken.insert(name.clone());
            labels.push(props.len());
            props.push(name.clone());
            fresh.push(FreshProp {
                prop: name,
                agent: i.get(),
                cell: cell.iter().map(|s| m.state_name(keep[s]).to_string()).collect(),
            });
        }
        label_of.push(labels);
    }

    let mut shared: Vec<StateSet> = (0..m.props().len())
        .map(|p| restrict(m.interpretation(AgentId::from_index(0), p)))
        .collect();
    for i in m.agents() {
        shared.extend(partitions[i.index()].iter().cloned());
    }

    let signals = m
        .agents()
        .map(|i| {
            (0..size)
                .map(|s| {
                    let c = partitions[i.index()]
                        .iter()
                        .position(|cell| cell.contains(s))
                        .expect("restricted cells cover the restricted states");
                    let name = &props[label_of[i.index()][c]];
                    Formula::Prop(PropId::new(name).expect("fresh names are identifiers"))
                })
                .collect()
        })
        .collect();

    let bare = Structure::new(StructureParts {
        agents: m.n_agents(),
        states: keep.iter().map(|&s| m.state_name(s).to_string()).collect(),
        props,
        partitions,
        beliefs,
        interpretations: vec![shared; m.n_agents()],
        priors: None,
        signals: Some(signals),
    })?;
    let priors = bare.generate_priors()?;
    let out = bare.with_priors(Some(priors))?;
    let labelling = Labelling {
        root: root.to_string(),
        map: StateMap::identity(&out),
        fresh,
    };
    Ok((out, labelling))
}

/// Which correctness claim to replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "kebab-case")]
pub enum Claim {
    /// `(M,w,i) |=ou f` iff `(M'_i,w,i) |= f`.
    FixInterpretation { agent: u32 },
    /// `(M',w#j) |= f` iff `(M,w,j) |=in f`.
    DisjointCopies,
    /// `(M,w,i) |= f` iff `(M',w,i) |= f` for reachable `w`, in the classical
    /// and both ambiguous-information semantics of `M'`.
    LabelPartitions { root: String },
}

/// A single disagreement between the two sides of a claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformMismatch {
    pub formula: String,
    pub agent: u32,
    pub original_state: String,
    pub original_mode: EvalMode,
    pub original_value: bool,
    pub new_state: String,
    pub new_agent: u32,
    pub new_mode: EvalMode,
    pub new_value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformReport {
    pub claim: Claim,
    /// Number of compared truth values.
    pub comparisons: usize,
    pub mismatches: Vec<TransformMismatch>,
}

impl TransformReport {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn mismatch(reason: impl Into<String>) -> TransformError {
    TransformError::ClaimSpecMismatch(reason.into())
}

/// Sources of the mapped states, by index in `m`, in the order of `m2`'s states.
fn resolve_map(
    m: &Structure,
    m2: &Structure,
    map: &StateMap,
) -> Result<Vec<(usize, Option<AgentId>)>, TransformError> {
    if map.states.len() != m2.n_states() {
        return Err(mismatch(format!(
            "map has {} entries, new model has {} states",
            map.states.len(),
            m2.n_states()
        )));
    }
    let mut out = vec![None; m2.n_states()];
    let mut seen = HashSet::new();
    for e in &map.states {
        let new = m2
            .state_index(&e.state)
            .ok_or_else(|| mismatch(format!("`{}` is not a state of the new model", e.state)))?;
        let old = m
            .state_index(&e.source)
            .ok_or_else(|| mismatch(format!("`{}` is not a state of the original model", e.source)))?;
        let tag = match e.tag {
            None => None,
            Some(t) => Some(
                AgentId::new(t)
                    .filter(|a| a.index() < m.n_agents())
                    .ok_or_else(|| mismatch(format!("tag {t} is not an agent")))?,
            ),
        };
        if !seen.insert((old, tag)) {
            return Err(mismatch(format!("`{}` is mapped to twice", e.source)));
        }
        out[new] = Some((old, tag));
    }
    Ok(out.into_iter().map(|e| e.expect("every new state mapped")).collect())
}

/// Replays `claim` for every formula at every relevant (state, agent).
pub fn verify_transform_equivalence(
    m: &Structure,
    m2: &Structure,
    map: &StateMap,
    formulas: &[Formula],
    claim: &Claim,
) -> Result<TransformReport, TransformError> {
    let sources = resolve_map(m, m2, map)?;
    if !m2.is_common_interpretation() {
        return Err(mismatch("the constructed model must have a common interpretation"));
    }
    let tagged = sources.iter().filter(|(_, t)| t.is_some()).count();
    let mut report = TransformReport {
        claim: claim.clone(),
        comparisons: 0,
        mismatches: Vec::new(),
    };
    match claim {
        Claim::FixInterpretation { agent } => {
            let i = AgentId::new(*agent)
                .filter(|a| a.index() < m.n_agents())
                .ok_or(TransformError::UnknownAgent(*agent))?;
            if tagged != 0 || m2.n_states() != m.n_states() {
                return Err(mismatch("expected an untagged map onto the same states"));
            }
            let left = Checker::new(m, EvalMode::Outermost)?;
            let right = Checker::new(m2, EvalMode::Common)?;
            for f in formulas {
                let l = left.extension(f, i)?;
                let r = right.extension(f, i)?;
                for (new, &(old, _)) in sources.iter().enumerate() {
                    report.compare(f, (m, old, i, EvalMode::Outermost, l.contains(old)), (
                        m2,
                        new,
                        i,
                        EvalMode::Common,
                        r.contains(new),
                    ));
                }
            }
        }
        Claim::DisjointCopies => {
            if tagged != m2.n_states() || m2.n_states() != m.n_states() * m.n_agents() {
                return Err(mismatch("expected one tagged copy per (state, agent)"));
            }
            let left = Checker::new(m, EvalMode::Innermost)?;
            let right = Checker::new(m2, EvalMode::Common)?;
            for f in formulas {
                let l: Vec<StateSet> = m
                    .agents()
                    .map(|j| left.extension(f, j))
                    .collect::<Result<_, _>>()?;
                for reader in m2.agents() {
                    let r = right.extension(f, reader)?;
                    for (new, &(old, tag)) in sources.iter().enumerate() {
                        let j = tag.expect("all states tagged");
                        report.compare(
                            f,
                            (m, old, j, EvalMode::Innermost, l[j.index()].contains(old)),
                            (m2, new, reader, EvalMode::Common, r.contains(new)),
                        );
                    }
                }
            }
        }
        Claim::LabelPartitions { root } => {
            let r = m
                .state_index(root)
                .ok_or_else(|| TransformError::UnknownState(root.clone()))?;
            let reach = m.reachable(&m.all_agents(), r);
            let covered = StateSet::from_indices(m.n_states(), sources.iter().map(|(s, _)| *s));
            if tagged != 0 || covered != reach {
                return Err(mismatch("expected an untagged map onto the reachable states"));
            }
            let left = Checker::new(m, EvalMode::Common)?;
            let rights = [EvalMode::Common, EvalMode::OutermostAi, EvalMode::InnermostAi]
                .into_iter()
                .map(|mode| Checker::new(m2, mode))
                .collect::<Result<Vec<_>, _>>()?;
            for f in formulas {
                for i in m.agents() {
                    let l = left.extension(f, i)?;
                    for right in &rights {
                        let rx = right.extension(f, i)?;
                        for (new, &(old, _)) in sources.iter().enumerate() {
                            report.compare(
                                f,
                                (m, old, i, EvalMode::Common, l.contains(old)),
                                (m2, new, i, right.mode(), rx.contains(new)),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

type Side<'a> = (&'a Structure, usize, AgentId, EvalMode, bool);

impl TransformReport {
    fn compare(&mut self, f: &Formula, left: Side, right: Side) {
        self.comparisons += 1;
        if left.4 != right.4 {
            self.mismatches.push(TransformMismatch {
                formula: f.to_string(),
                agent: left.2.get(),
                original_state: left.0.state_name(left.1).to_string(),
                original_mode: left.3,
                original_value: left.4,
                new_state: right.0.state_name(right.1).to_string(),
                new_agent: right.2.get(),
                new_mode: right.3,
                new_value: right.4,
            });
        }
    }
}
