//! Checks of the structural assumptions, reported with named witnesses.

use super::{Structure, StructureError};
use crate::formula::AgentId;
use crate::rational::{format_rational, Rational};
use crate::stateset::StateSet;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;

/// One violated assumption. States and sets are given by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    /// The atoms of a cell's algebra do not partition the cell.
    A1 {
        agent: u32,
        cell: Vec<String>,
        detail: String,
    },
    NegativeMeasure {
        agent: u32,
        cell: Vec<String>,
        atom: Vec<String>,
        value: String,
    },
    MeasureSum {
        agent: u32,
        cell: Vec<String>,
        sum: String,
    },
    /// `Pi_agent(state) & Pi_other(other_state)` is not agent-measurable.
    A3 {
        agent: u32,
        other_agent: u32,
        state: String,
        other_state: String,
        set: Vec<String>,
    },
    /// `Pi_agent(state) & [[prop]]_agent` is not agent-measurable.
    A4 {
        agent: u32,
        state: String,
        prop: String,
        set: Vec<String>,
    },
    PriorNegative {
        agent: u32,
        state: String,
        value: String,
    },
    PriorSum {
        agent: u32,
        sum: String,
    },
    /// Conditioning the prior on a cell of positive prior mass does not give
    /// the cell's measure.
    PriorMismatch {
        agent: u32,
        cell: Vec<String>,
        atom: Vec<String>,
        conditional: String,
        measure: String,
    },
    SignalNotPropositional {
        agent: u32,
        state: String,
        signal: String,
    },
    /// `[[signal]]_agent` differs from `Pi_agent(state)`.
    A5 {
        agent: u32,
        state: String,
        signal: String,
        extension: Vec<String>,
        cell: Vec<String>,
    },
    /// `state` is not in `[[signal of signal_agent at state]]_interpreting_agent`.
    A6Membership {
        signal_agent: u32,
        interpreting_agent: u32,
        state: String,
        signal: String,
        extension: Vec<String>,
    },
    /// The interpreted signal events of `signal_agent` do not partition the states.
    A6NotPartition {
        signal_agent: u32,
        interpreting_agent: u32,
        detail: String,
    },
}

impl Violation {
    /// Violations that make prior generation meaningless (A1-A3 and normalization).
    pub(crate) fn blocks_prior_generation(&self) -> bool {
        matches!(
            self,
            Violation::A1 { .. }
                | Violation::NegativeMeasure { .. }
                | Violation::MeasureSum { .. }
                | Violation::A3 { .. }
        )
    }

    pub fn is_a6(&self) -> bool {
        matches!(self, Violation::A6Membership { .. } | Violation::A6NotPartition { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |s: &[String]| format!("{{{}}}", s.join(","));
        match self {
            Violation::A1 { agent, cell, detail } => {
                write!(f, "A1: agent {agent}, cell {}: {detail}", set(cell))
            }
            Violation::NegativeMeasure { agent, atom, value, .. } => {
                write!(f, "agent {agent} gives atom {} negative measure {value}", set(atom))
            }
            Violation::MeasureSum { agent, cell, sum } => {
                write!(f, "agent {agent}, cell {}: measure sums to {sum}", set(cell))
            }
            Violation::A3 {
                agent,
                other_agent,
                state,
                other_state,
                set: s,
            } => write!(
                f,
                "A3: cell of agent {agent} at {state} meets cell of agent {other_agent} at {other_state} in non-measurable {}",
                set(s)
            ),
            Violation::A4 {
                agent,
                state,
                prop,
                set: s,
            } => write!(
                f,
                "A4: agent {agent}, cell at {state}, proposition {prop}: {} is not measurable",
                set(s)
            ),
            Violation::PriorNegative { agent, state, value } => {
                write!(f, "prior of agent {agent} gives {state} negative mass {value}")
            }
            Violation::PriorSum { agent, sum } => write!(f, "prior of agent {agent} sums to {sum}"),
            Violation::PriorMismatch {
                agent,
                atom,
                conditional,
                measure,
                ..
            } => write!(
                f,
                "prior of agent {agent} gives {} conditional mass {conditional}, cell measure is {measure}",
                set(atom)
            ),
            Violation::SignalNotPropositional { agent, state, signal } => {
                write!(f, "signal `{signal}` of agent {agent} at {state} is not propositional")
            }
            Violation::A5 {
                agent,
                state,
                signal,
                extension,
                cell,
            } => write!(
                f,
                "A5: agent {agent} at {state}: [[{signal}]] = {} but the cell is {}",
                set(extension),
                set(cell)
            ),
            Violation::A6Membership {
                signal_agent,
                interpreting_agent,
                state,
                signal,
                extension,
            } => write!(
                f,
                "A6: {state} is not in agent {interpreting_agent}'s reading {} of agent {signal_agent}'s signal `{signal}`",
                set(extension)
            ),
            Violation::A6NotPartition {
                signal_agent,
                interpreting_agent,
                detail,
            } => write!(
                f,
                "A6: agent {interpreting_agent}'s readings of agent {signal_agent}'s signals are not a partition: {detail}"
            ),
        }
    }
}

/// Outcome of a validation pass; empty iff every checked assumption holds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn extend(&mut self, other: Report) {
        self.violations.extend(other.violations);
    }
}

impl Structure {
    fn is_measurable(&self, agent: AgentId, cell: usize, set: &StateSet) -> bool {
        self.belief(agent, cell).atoms.iter().all(|atom| {
            let inside = atom.intersection(set).len();
            inside == 0 || inside == atom.len()
        })
    }

    /// Checks A1-A4, measure normalization, and (when present) that the priors
    /// are probability measures generating the cell measures.
    pub fn validate_core(&self) -> Report {
        let mut out = Vec::new();
        for agent in self.agents() {
            let a = agent.get();
            for (c, cell) in self.partition(agent).cells().iter().enumerate() {
                let names = self.names_of(cell);
                let b = self.belief(agent, c);
                let mut covered = self.empty_set();
                let mut a1 = None;
                for atom in &b.atoms {
                    if atom.is_empty() {
                        a1 = Some("empty atom".to_string());
                    } else if !atom.is_subset(cell) {
                        a1 = Some(format!(
                            "atom {{{}}} leaves the cell",
                            self.names_of(atom).join(",")
                        ));
                    } else if !atom.is_disjoint(&covered) {
                        a1 = Some(format!(
                            "atom {{{}}} overlaps another atom",
                            self.names_of(atom).join(",")
                        ));
                    }
                    covered.union_with(atom);
                }
                if a1.is_none() && covered != *cell {
                    a1 = Some(format!(
                        "atoms miss {{{}}}",
                        self.names_of(&cell.difference(&covered)).join(",")
                    ));
                }
                if let Some(detail) = a1 {
                    out.push(Violation::A1 {
                        agent: a,
                        cell: names.clone(),
                        detail,
                    });
                }
                let mut sum = Rational::zero();
                for (atom, w) in b.atoms.iter().zip(&b.weights) {
                    if w.is_negative() {
                        out.push(Violation::NegativeMeasure {
                            agent: a,
                            cell: names.clone(),
                            atom: self.names_of(atom),
                            value: format_rational(w),
                        });
                    }
                    sum += w;
                }
                if !sum.is_one() {
                    out.push(Violation::MeasureSum {
                        agent: a,
                        cell: names.clone(),
                        sum: format_rational(&sum),
                    });
                }
                let here = cell.first().expect("cells are nonempty");
                for other in self.agents() {
                    if other == agent {
                        continue;
                    }
                    for d in self.partition(other).cells() {
                        let meet = cell.intersection(d);
                        if !meet.is_empty() && !self.is_measurable(agent, c, &meet) {
                            out.push(Violation::A3 {
                                agent: a,
                                other_agent: other.get(),
                                state: self.state_name(here).to_string(),
                                other_state: self.state_name(d.first().unwrap()).to_string(),
                                set: self.names_of(&meet),
                            });
                        }
                    }
                }
                for (p, name) in self.props().iter().enumerate() {
                    let meet = cell.intersection(self.interpretation(agent, p));
                    if !self.is_measurable(agent, c, &meet) {
                        out.push(Violation::A4 {
                            agent: a,
                            state: self.state_name(here).to_string(),
                            prop: name.clone(),
                            set: self.names_of(&meet),
                        });
                    }
                }
            }
        }
        if let Some(priors) = self.priors() {
            for agent in self.agents() {
                let nu = &priors[agent.index()];
                let a = agent.get();
                for (s, v) in nu.iter().enumerate() {
                    if v.is_negative() {
                        out.push(Violation::PriorNegative {
                            agent: a,
                            state: self.state_name(s).to_string(),
                            value: format_rational(v),
                        });
                    }
                }
                let sum: Rational = nu.iter().sum();
                if !sum.is_one() {
                    out.push(Violation::PriorSum {
                        agent: a,
                        sum: format_rational(&sum),
                    });
                }
                for (c, cell) in self.partition(agent).cells().iter().enumerate() {
                    let mass = self.prior_mass(agent, cell).expect("priors present");
                    if !mass.is_positive() {
                        continue;
                    }
                    let b = self.belief(agent, c);
                    for (atom, w) in b.atoms.iter().zip(&b.weights) {
                        let conditional = self.prior_mass(agent, atom).unwrap() / &mass;
                        if conditional != *w {
                            out.push(Violation::PriorMismatch {
                                agent: a,
                                cell: self.names_of(cell),
                                atom: self.names_of(atom),
                                conditional: format_rational(&conditional),
                                measure: format_rational(w),
                            });
                        }
                    }
                }
            }
        }
        Report { violations: out }
    }

    /// Checks that signals are propositional, A5, and A6 for every ordered
    /// pair of agents.
    pub fn validate_signals(&self) -> Result<Report, StructureError> {
        let signals = self.signals().ok_or(StructureError::MissingSignals)?;
        let mut out = Vec::new();
        let mut usable = true;
        for agent in self.agents() {
            for (s, sig) in signals[agent.index()].iter().enumerate() {
                if !sig.is_propositional() {
                    usable = false;
                    out.push(Violation::SignalNotPropositional {
                        agent: agent.get(),
                        state: self.state_name(s).to_string(),
                        signal: sig.to_string(),
                    });
                }
            }
        }
        if !usable {
            return Ok(Report { violations: out });
        }
        // extensions[i][j][s] = [[signal_{i,s}]]_j
        let mut extensions = Vec::with_capacity(self.n_agents());
        for i in self.agents() {
            let mut per_reader = Vec::with_capacity(self.n_agents());
            for j in self.agents() {
                let row = signals[i.index()]
                    .iter()
                    .map(|sig| self.prop_extension(j, sig))
                    .collect::<Result<Vec<_>, _>>()?;
                per_reader.push(row);
            }
            extensions.push(per_reader);
        }
        for i in self.agents() {
            for s in 0..self.n_states() {
                let ext = &extensions[i.index()][i.index()][s];
                let cell = self.cell(i, s);
                if ext != cell {
                    out.push(Violation::A5 {
                        agent: i.get(),
                        state: self.state_name(s).to_string(),
                        signal: signals[i.index()][s].to_string(),
                        extension: self.names_of(ext),
                        cell: self.names_of(cell),
                    });
                }
            }
        }
        for i in self.agents() {
            for j in self.agents() {
                let row = &extensions[i.index()][j.index()];
                for (s, ext) in row.iter().enumerate() {
                    if !ext.contains(s) {
                        out.push(Violation::A6Membership {
                            signal_agent: i.get(),
                            interpreting_agent: j.get(),
                            state: self.state_name(s).to_string(),
                            signal: signals[i.index()][s].to_string(),
                            extension: self.names_of(ext),
                        });
                    }
                }
                if let Some(detail) = self.partition_defect(row, signals, i) {
                    out.push(Violation::A6NotPartition {
                        signal_agent: i.get(),
                        interpreting_agent: j.get(),
                        detail,
                    });
                }
            }
        }
        Ok(Report { violations: out })
    }

    /// Why the distinct sets in `row` fail to partition the states, if they do.
    fn partition_defect(
        &self,
        row: &[StateSet],
        signals: &[Vec<crate::formula::Formula>],
        agent: AgentId,
    ) -> Option<String> {
        let mut blocks: Vec<&StateSet> = Vec::new();
        for (s, ext) in row.iter().enumerate() {
            if ext.is_empty() {
                return Some(format!(
                    "signal `{}` at {} has an empty extension",
                    signals[agent.index()][s],
                    self.state_name(s)
                ));
            }
            if !blocks.contains(&ext) {
                blocks.push(ext);
            }
        }
        let mut covered = self.empty_set();
        for b in &blocks {
            if !b.is_disjoint(&covered) {
                return Some(format!(
                    "{{{}}} overlaps another block",
                    self.names_of(b).join(",")
                ));
            }
            covered.union_with(b);
        }
        if covered != self.full_set() {
            return Some(format!(
                "{{{}}} is not covered",
                self.names_of(&covered.complement()).join(",")
            ));
        }
        None
    }
}
