//! JSON model files.
//!
//! ```json
//! {
//!   "agents": 2,
//!   "states": ["w1", "w2"],
//!   "props": ["p"],
//!   "partitions": [[["w1"], ["w2"]], [["w1", "w2"]]],
//!   "interpretations": [{"p": ["w1"]}, {"p": ["w1", "w2"]}],
//!   "beliefs": [
//!     [{"measure": {"w1": "1"}}, {"measure": {"w2": "1"}}],
//!     [{"measure": {"w1": "1/2", "w2": "1/2"}}]
//!   ]
//! }
//! ```
//!
//! Beliefs follow the order of the agent's cells. Without `"atoms"` the
//! algebra is the powerset of the cell and the measure is keyed by state;
//! with `"atoms"` it is keyed by atom position. Omitted measure, prior and
//! interpretation entries are zero / empty. Optional `"priors"` map states to
//! rationals, optional `"signals"` map states to propositional formulas.
//! Rationals are strings; JSON numbers are rejected.

use super::{CellBelief, Structure, StructureError, StructureParts};
use crate::formula::{parse, AgentId};
use crate::rational::{ExactRational, Rational};
use crate::stateset::StateSet;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub agents: usize,
    pub states: Vec<String>,
    pub props: Vec<String>,
    pub partitions: Vec<Vec<Vec<String>>>,
    pub interpretations: Vec<BTreeMap<String, Vec<String>>>,
    pub beliefs: Vec<Vec<CellBeliefFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<BTreeMap<String, ExactRational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signals: Option<Vec<BTreeMap<String, String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellBeliefFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<Vec<String>>>,
    pub measure: BTreeMap<String, ExactRational>,
}

struct Names<'a> {
    index: BTreeMap<&'a str, usize>,
    n: usize,
}

impl<'a> Names<'a> {
    fn new(states: &'a [String]) -> Self {
        Names {
            index: states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect(),
            n: states.len(),
        }
    }

    fn get(&self, name: &str) -> Result<usize, StructureError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| StructureError::UnknownState(name.to_string()))
    }

    fn set(&self, names: &[String]) -> Result<StateSet, StructureError> {
        let mut out = StateSet::empty(self.n);
        for name in names {
            out.insert(self.get(name)?);
        }
        Ok(out)
    }
}

impl Structure {
    pub fn from_json(text: &str) -> Result<Structure, StructureError> {
        let file: StructureFile =
            serde_json::from_str(text).map_err(|e| StructureError::Json(e.to_string()))?;
        Structure::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model files always serialize")
    }

    pub fn from_file(file: &StructureFile) -> Result<Structure, StructureError> {
        let names = Names::new(&file.states);
        let check = |what, expected, found| super::arity(what, expected, found);
        check("partitions", file.agents, file.partitions.len())?;
        check("beliefs", file.agents, file.beliefs.len())?;
        check("interpretations", file.agents, file.interpretations.len())?;

        let partitions = file
            .partitions
            .iter()
            .map(|cells| cells.iter().map(|c| names.set(c)).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;

        let mut beliefs = Vec::with_capacity(file.agents);
        for (a, per_cell) in file.beliefs.iter().enumerate() {
            let agent = AgentId::from_index(a);
            check("belief cells", partitions[a].len(), per_cell.len())?;
            let mut out = Vec::with_capacity(per_cell.len());
            for (c, cb) in per_cell.iter().enumerate() {
                out.push(cell_belief(&names, agent, c, &partitions[a][c], cb)?);
            }
            beliefs.push(out);
        }

        let mut interpretations = Vec::with_capacity(file.agents);
        for table in &file.interpretations {
            let mut row = vec![StateSet::empty(names.n); file.props.len()];
            for (prop, states) in table {
                let p = file
                    .props
                    .iter()
                    .position(|q| q == prop)
                    .ok_or_else(|| StructureError::UnknownProp(prop.clone()))?;
                row[p] = names.set(states)?;
            }
            interpretations.push(row);
        }

        let priors = match &file.priors {
            None => None,
            Some(rows) => {
                check("priors", file.agents, rows.len())?;
                let mut out = Vec::with_capacity(rows.len());
                for row in rows {
                    let mut nu = vec![Rational::zero(); names.n];
                    for (state, v) in row {
                        nu[names.get(state)?] = v.0.clone();
                    }
                    out.push(nu);
                }
                Some(out)
            }
        };

        let mut parts = StructureParts {
            agents: file.agents,
            states: file.states.clone(),
            props: file.props.clone(),
            partitions,
            beliefs,
            interpretations,
            priors,
            signals: None,
        };
        if let Some(rows) = &file.signals {
            check("signals", file.agents, rows.len())?;
            // Signals need the designated proposition, so build without them first.
            let bare = Structure::new(parts.clone())?;
            let tautology = bare.designated_atom();
            let mut out = Vec::with_capacity(rows.len());
            for (a, row) in rows.iter().enumerate() {
                let agent = AgentId::from_index(a);
                let mut sigs = Vec::with_capacity(names.n);
                for state in &file.states {
                    let text = row.get(state).ok_or(StructureError::Arity {
                        what: "signal entries",
                        expected: names.n,
                        found: row.len(),
                    })?;
                    let surface = parse(text).map_err(|error| StructureError::BadSignal {
                        agent,
                        state: state.clone(),
                        error,
                    })?;
                    sigs.push(surface.expand(&tautology));
                }
                if let Some(extra) = row.keys().find(|k| names.get(k).is_err()) {
                    return Err(StructureError::UnknownState(extra.clone()));
                }
                out.push(sigs);
            }
            parts.signals = Some(out);
        }
        Structure::new(parts)
    }

    pub fn to_file(&self) -> StructureFile {
        let names = |set: &StateSet| self.names_of(set);
        let partitions = self
            .agents()
            .map(|a| self.partition(a).cells().iter().map(names).collect())
            .collect();
        let interpretations = self
            .agents()
            .map(|a| {
                self.props()
                    .iter()
                    .enumerate()
                    .map(|(p, name)| (name.clone(), names(self.interpretation(a, p))))
                    .collect()
            })
            .collect();
        let beliefs = self
            .agents()
            .map(|a| {
                (0..self.partition(a).len())
                    .map(|c| {
                        let b = self.belief(a, c);
                        if b.is_powerset() {
                            CellBeliefFile {
                                atoms: None,
                                measure: b
                                    .atoms
                                    .iter()
                                    .zip(&b.weights)
                                    .map(|(at, w)| {
                                        let s = at.first().unwrap();
                                        (self.state_name(s).to_string(), ExactRational(w.clone()))
                                    })
                                    .collect(),
                            }
                        } else {
                            CellBeliefFile {
                                atoms: Some(b.atoms.iter().map(names).collect()),
                                measure: b
                                    .weights
                                    .iter()
                                    .enumerate()
                                    .map(|(k, w)| (k.to_string(), ExactRational(w.clone())))
                                    .collect(),
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        let priors = self.priors().map(|rows| {
            rows.iter()
                .map(|nu| {
                    nu.iter()
                        .enumerate()
                        .map(|(s, v)| (self.state_name(s).to_string(), ExactRational(v.clone())))
                        .collect()
                })
                .collect()
        });
        let signals = self.signals().map(|rows| {
            rows.iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(s, f)| (self.state_name(s).to_string(), f.to_string()))
                        .collect()
                })
                .collect()
        });
        StructureFile {
            agents: self.n_agents(),
            states: self.state_names().to_vec(),
            props: self.props().to_vec(),
            partitions,
            interpretations,
            beliefs,
            priors,
            signals,
        }
    }
}

fn cell_belief(
    names: &Names,
    agent: AgentId,
    c: usize,
    cell: &StateSet,
    file: &CellBeliefFile,
) -> Result<CellBelief, StructureError> {
    let bad = |detail: String| StructureError::BadBelief {
        agent,
        cell: c,
        detail,
    };
    match &file.atoms {
        None => {
            let mut weights = vec![Rational::zero(); cell.len()];
            let states: Vec<usize> = cell.iter().collect();
            for (key, v) in &file.measure {
                let s = names.get(key)?;
                let k = states
                    .iter()
                    .position(|&t| t == s)
                    .ok_or_else(|| bad(format!("state `{key}` is outside the cell")))?;
                weights[k] = v.0.clone();
            }
            Ok(CellBelief {
                atoms: states
                    .iter()
                    .map(|&s| StateSet::from_indices(names.n, [s]))
                    .collect(),
                weights,
            })
        }
        Some(atoms) => {
            let atoms = atoms
                .iter()
                .map(|a| names.set(a))
                .collect::<Result<Vec<_>, _>>()?;
            let mut weights = vec![Rational::zero(); atoms.len()];
            for (key, v) in &file.measure {
                let k: usize = key
                    .parse()
                    .ok()
                    .filter(|&k| k < atoms.len())
                    .ok_or_else(|| bad(format!("measure key `{key}` is not an atom index")))?;
                weights[k] = v.0.clone();
            }
            Ok(CellBelief { atoms, weights })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const M_RED: &str = r#"{
        "agents": 2,
        "states": ["w1", "w2"],
        "props": ["p"],
        "partitions": [[["w1"], ["w2"]], [["w1", "w2"]]],
        "interpretations": [{"p": ["w1"]}, {"p": ["w1", "w2"]}],
        "beliefs": [
            [{"measure": {"w1": "1"}}, {"measure": {"w2": "1"}}],
            [{"measure": {"w1": "1/2", "w2": "1/2"}}]
        ]
    }"#;

    #[test]
    fn loads_the_reference_model() {
        let m = Structure::from_json(M_RED).unwrap();
        assert_eq!(m, super::super::fixtures::m_red());
    }

    #[test]
    fn json_round_trip() {
        let m = Structure::from_json(M_RED).unwrap();
        let m = m.with_priors(Some(m.generate_priors().unwrap())).unwrap();
        let again = Structure::from_json(&m.to_json()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn floats_are_rejected() {
        let text = M_RED.replace(r#""1/2", "w2""#, r#"0.5, "w2""#);
        assert!(matches!(Structure::from_json(&text), Err(StructureError::Json(_))));
    }

    #[test]
    fn signals_round_trip() {
        let text = M_RED.replace(
            r#""beliefs""#,
            r#""signals": [{"w1": "p", "w2": "!p"}, {"w1": "true", "w2": "p | !p"}],
            "beliefs""#,
        );
        let m = Structure::from_json(&text).unwrap();
        assert_eq!(Structure::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn explicit_atoms() {
        let text = M_RED.replace(
            r#"[{"measure": {"w1": "1/2", "w2": "1/2"}}]"#,
            r#"[{"atoms": [["w1", "w2"]], "measure": {"0": "1"}}]"#,
        );
        let m = Structure::from_json(&text).unwrap();
        let b = m.belief(AgentId::new(2).unwrap(), 0);
        assert_eq!(b.atoms.len(), 1);
        assert_eq!(b.weights, vec![ratio(1, 1)]);
        assert_eq!(Structure::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn measure_outside_cell_is_rejected() {
        let text = M_RED.replace(r#"{"measure": {"w1": "1"}}"#, r#"{"measure": {"w2": "1"}}"#);
        assert!(matches!(
            Structure::from_json(&text),
            Err(StructureError::BadBelief { .. })
        ));
    }
}
