//! Seeded randomized verification campaigns.
//!
//! Every (check, trial) pair draws from its own ChaCha8 stream derived from
//! the campaign seed, so reports are reproducible and independent of which
//! other checks were selected.

use crate::formula::{AgentId, Formula};
use crate::generate::{self, Bounds};
use crate::rational::{format_rational, int, Rational};
use crate::semantics::{Checker, EvalError, EvalMode};
use crate::structure::{Structure, StructureFile};
use crate::transforms::{self, Claim, StateMap, TransformError, TransformReport};
use crate::translation::{self, Scheme, TranslationError, TranslationReport};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKind {
    Thm1Ab,
    Thm1Ac,
    Thm1Da,
    Thm2In,
    Thm2Ou,
    Prop1,
    ModeAgreement,
    InaiEqIn,
    CbOracle,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        CheckKind::Thm1Ab,
        CheckKind::Thm1Ac,
        CheckKind::Thm1Da,
        CheckKind::Thm2In,
        CheckKind::Thm2Ou,
        CheckKind::Prop1,
        CheckKind::ModeAgreement,
        CheckKind::InaiEqIn,
        CheckKind::CbOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Thm1Ab => "thm1-ab",
            CheckKind::Thm1Ac => "thm1-ac",
            CheckKind::Thm1Da => "thm1-da",
            CheckKind::Thm2In => "thm2-in",
            CheckKind::Thm2Ou => "thm2-ou",
            CheckKind::Prop1 => "prop1",
            CheckKind::ModeAgreement => "mode-agreement",
            CheckKind::InaiEqIn => "inai-eq-in",
            CheckKind::CbOracle => "cb-oracle",
        }
    }

    fn stream(self) -> u64 {
        CheckKind::ALL.iter().position(|&c| c == self).unwrap() as u64
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = CampaignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CampaignError::Invalid(format!("unknown check `{s}`")))
    }
}

impl Serialize for CheckKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Parses a comma-separated list; `all` selects every check.
pub fn parse_checks(list: &str) -> Result<Vec<CheckKind>, CampaignError> {
    if list.trim() == "all" {
        return Ok(CheckKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim) {
        let c: CheckKind = part.parse()?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(CampaignError::Invalid("no checks selected".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CampaignError {
    #[error("invalid campaign: {0}")]
    Invalid(String),
    #[error("{check} trial {trial}: {message}")]
    Internal {
        check: CheckKind,
        trial: u64,
        message: String,
    },
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub seed: u64,
    pub trials: u64,
    pub bounds: Bounds,
    pub checks: Vec<CheckKind>,
    /// Formulas drawn per trial.
    pub corpus_size: usize,
    /// Test hook: run `thm2-in` against the unsound CB clause.
    pub naive_translation: bool,
}

impl Campaign {
    pub fn new(seed: u64, trials: u64) -> Self {
        Campaign {
            seed,
            trials,
            bounds: Bounds::default(),
            checks: CheckKind::ALL.to_vec(),
            corpus_size: 4,
            naive_translation: false,
        }
    }

    fn validate(&self) -> Result<(), CampaignError> {
        let b = &self.bounds;
        if self.trials == 0 {
            return Err(CampaignError::Invalid("trials must be at least 1".into()));
        }
        if [b.max_states, b.max_agents, b.max_props, b.max_depth].contains(&0) {
            return Err(CampaignError::Invalid("bounds must be at least 1".into()));
        }
        if self.checks.is_empty() {
            return Err(CampaignError::Invalid("no checks selected".into()));
        }
        Ok(())
    }

    /// The generator for one (check, trial) pair.
    pub fn trial_rng(&self, check: CheckKind, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((check.stream() << 48) ^ trial);
        rng
    }

    pub fn run(&self) -> Result<CampaignReport, CampaignError> {
        self.validate()?;
        let mut checks = Vec::new();
        for &check in &self.checks {
            checks.push(self.run_check(check)?);
        }
        Ok(CampaignReport {
            seed: self.seed,
            trials: self.trials,
            bounds: self.bounds,
            checks,
        })
    }

    pub fn run_check(&self, check: CheckKind) -> Result<CheckReport, CampaignError> {
        let start = Instant::now();
        let mut report = CheckReport {
            check,
            trials: self.trials,
            passed: 0,
            failed: 0,
            comparisons: 0,
            counterexample: None,
            elapsed_ms: 0,
        };
        for trial in 0..self.trials {
            let mut rng = self.trial_rng(check, trial);
            let outcome = self.run_trial(check, &mut rng).map_err(|message| CampaignError::Internal {
                check,
                trial,
                message,
            })?;
            report.comparisons += outcome.comparisons as u64;
            match outcome.failure {
                None => report.passed += 1,
                Some(mut cex) => {
                    report.failed += 1;
                    if report.counterexample.is_none() {
                        cex.trial = trial;
                        report.counterexample = Some(cex);
                    }
                }
            }
        }
        report.elapsed_ms = start.elapsed().as_millis() as u64;
        Ok(report)
    }

    fn run_trial(&self, check: CheckKind, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
        let b = &self.bounds;
        let corpus = |rng: &mut ChaCha8Rng, m: &Structure| {
            generate::random_corpus(rng, m, b.max_depth, self.corpus_size)
        };
        match check {
            CheckKind::Thm1Ab => {
                let m = generate::random_structure(rng, b, false);
                let fs = corpus(rng, &m);
                let i = AgentId::from_index(rng.gen_range(0..m.n_agents()));
                let m2 = transforms::fix_interpretation(&m, i).map_err(err)?;
                let claim = Claim::FixInterpretation { agent: i.get() };
                transform_trial(&m, &m2, &StateMap::identity(&m), &fs, &claim)
            }
            CheckKind::Thm1Ac => {
                let m = generate::random_structure(rng, b, false);
                let fs = corpus(rng, &m);
                let (m2, map) = transforms::disjoint_copies(&m).map_err(err)?;
                transform_trial(&m, &m2, &map, &fs, &Claim::DisjointCopies)
            }
            CheckKind::Thm1Da => {
                let m = generate::random_structure(rng, b, true);
                let fs = corpus(rng, &m);
                let root = m.state_name(rng.gen_range(0..m.n_states())).to_string();
                let (m2, lab) = transforms::label_partitions(&m, &root).map_err(err)?;
                transform_trial(&m, &m2, &lab.map, &fs, &Claim::LabelPartitions { root })
            }
            CheckKind::Thm2In | CheckKind::Thm2Ou => {
                let m = generate::random_structure(rng, b, false);
                let fs = corpus(rng, &m);
                let scheme = match check {
                    CheckKind::Thm2Ou => Scheme::Outermost,
                    _ if self.naive_translation => Scheme::NaiveInnermost,
                    _ => Scheme::Innermost,
                };
                let report = translation::verify_translation(&m, &fs, &[scheme]).map_err(err)?;
                translation_outcome(&m, report)
            }
            CheckKind::Prop1 => {
                let m = generate::random_coarse_structure(rng, b);
                prop1_trial(&m)
            }
            CheckKind::ModeAgreement => {
                let m = generate::random_structure(rng, b, true);
                let fs = corpus(rng, &m);
                agreement_trial(&m, &fs, &[EvalMode::Common, EvalMode::Outermost, EvalMode::Innermost])
            }
            CheckKind::InaiEqIn => {
                let cross = rng.gen_bool(0.5);
                let m = generate::random_ai_structure(rng, b, cross);
                let fs = corpus(rng, &m);
                agreement_trial(&m, &fs, &[EvalMode::Innermost, EvalMode::InnermostAi])
            }
            CheckKind::CbOracle => {
                let cross = rng.gen_bool(0.5);
                let m = generate::random_ai_structure(rng, b, cross);
                let fs = corpus(rng, &m);
                let groups: Vec<_> = fs
                    .iter()
                    .map(|_| generate::random_group(rng, m.n_agents()))
                    .collect();
                let bodies: Vec<_> = fs.into_iter().map(Arc::new).zip(groups).collect();
                cb_oracle(&m, &bodies, &cb_modes(&m))
            }
        }
    }
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

/// Modes whose prerequisites `m` satisfies.
pub fn cb_modes(m: &Structure) -> Vec<EvalMode> {
    EvalMode::ALL
        .into_iter()
        .filter(|&mode| Checker::new(m, mode).is_ok())
        .collect()
}

#[derive(Debug, Default)]
struct Outcome {
    comparisons: usize,
    failure: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub trials: u64,
    pub bounds: Bounds,
    pub checks: Vec<CheckReport>,
}

impl CampaignReport {
    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(|c| c.failed == 0)
    }

    /// The report with timing fields zeroed.
    pub fn without_timing(&self) -> CampaignReport {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.elapsed_ms = 0;
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: CheckKind,
    pub trials: u64,
    pub passed: u64,
    pub failed: u64,
    /// Individual (formula, state, agent, mode) comparisons made.
    pub comparisons: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    pub elapsed_ms: u64,
}

/// The first failing trial, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: u64,
    pub detail: String,
    /// The generated model, when the failure is not a query disagreement.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<StructureFile>,
    pub queries: Vec<Query>,
}

/// One evaluation: `formula` at `state` for `agent` under `mode` on `model`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Query {
    pub model: StructureFile,
    pub formula: String,
    pub state: String,
    pub agent: u32,
    pub mode: EvalMode,
    pub value: bool,
}

fn transform_trial(
    m: &Structure,
    m2: &Structure,
    map: &StateMap,
    fs: &[Formula],
    claim: &Claim,
) -> Result<Outcome, String> {
    let report: TransformReport =
        transforms::verify_transform_equivalence(m, m2, map, fs, claim).map_err(|e: TransformError| e.to_string())?;
    let failure = report.mismatches.first().map(|x| Counterexample {
        trial: 0,
        detail: format!("transform claim broken for `{}`", x.formula),
        model: None,
        queries: vec![
            Query {
                model: m.to_file(),
                formula: x.formula.clone(),
                state: x.original_state.clone(),
                agent: x.agent,
                mode: x.original_mode,
                value: x.original_value,
            },
            Query {
                model: m2.to_file(),
                formula: x.formula.clone(),
                state: x.new_state.clone(),
                agent: x.new_agent,
                mode: x.new_mode,
                value: x.new_value,
            },
        ],
    });
    Ok(Outcome {
        comparisons: report.comparisons,
        failure,
    })
}

fn translation_outcome(m: &Structure, report: TranslationReport) -> Result<Outcome, String> {
    let failure = match report.mismatches.first() {
        None => None,
        Some(x) => {
            let lifted = translation::lift_to_indexed(m).map_err(|e: TranslationError| e.to_string())?;
            Some(Counterexample {
                trial: 0,
                detail: format!("translation `{}` of `{}` disagrees", x.translated, x.formula),
                model: None,
                queries: vec![
                    Query {
                        model: m.to_file(),
                        formula: x.formula.clone(),
                        state: x.state.clone(),
                        agent: x.agent,
                        mode: x.scheme.source_mode(),
                        value: x.ambiguous,
                    },
                    Query {
                        model: lifted.to_file(),
                        formula: x.translated.clone(),
                        state: x.state.clone(),
                        agent: x.agent,
                        mode: EvalMode::Common,
                        value: x.indexed,
                    },
                ],
            })
        }
    };
    Ok(Outcome {
        comparisons: report.comparisons,
        failure,
    })
}

/// Checks the generated priors directly: positive cell mass and conditionals
/// equal to the cell measure on every atom.
fn prop1_trial(m: &Structure) -> Result<Outcome, String> {
    let priors = m.generate_priors().map_err(err)?;
    let mut comparisons = 0;
    for i in m.agents() {
        let nu = &priors[i.index()];
        let mass = |set: &crate::stateset::StateSet| set.iter().fold(Rational::zero(), |acc, s| acc + &nu[s]);
        for (c, cell) in m.partition(i).cells().iter().enumerate() {
            let total = mass(cell);
            comparisons += 1;
            let fail = |detail: String, comparisons: usize| {
                Ok(Outcome {
                    comparisons,
                    failure: Some(Counterexample {
                        trial: 0,
                        detail,
                        model: Some(m.with_priors(Some(priors.clone())).map_err(err)?.to_file()),
                        queries: Vec::new(),
                    }),
                })
            };
            if total <= int(0) {
                return fail(format!(
                    "agent {i}: prior of cell {:?} is {}",
                    m.names_of(cell),
                    format_rational(&total)
                ), comparisons);
            }
            let b = m.belief(i, c);
            for (atom, w) in b.atoms.iter().zip(&b.weights) {
                comparisons += 1;
                let cond = mass(atom) / &total;
                if &cond != w {
                    return fail(format!(
                        "agent {i}: conditional of {:?} is {}, cell measure gives {}",
                        m.names_of(atom),
                        format_rational(&cond),
                        format_rational(w)
                    ), comparisons);
                }
            }
        }
    }
    Ok(Outcome {
        comparisons,
        failure: None,
    })
}

/// All `modes` must give identical extensions for every formula and agent.
fn agreement_trial(m: &Structure, fs: &[Formula], modes: &[EvalMode]) -> Result<Outcome, String> {
    let checkers: Vec<Checker> = modes
        .iter()
        .map(|&mode| Checker::new(m, mode))
        .collect::<Result<_, EvalError>>()
        .map_err(err)?;
    let (base, rest) = checkers.split_first().expect("at least one mode");
    let mut comparisons = 0;
    for f in fs {
        for i in m.agents() {
            let want = base.extension(f, i).map_err(err)?;
            for other in rest {
                let got = other.extension(f, i).map_err(err)?;
                comparisons += m.n_states();
                if got != want {
                    let s = want
                        .difference(&got)
                        .union(&got.difference(&want))
                        .first()
                        .expect("sets differ");
                    let query = |c: &Checker, set: &crate::stateset::StateSet| Query {
                        model: m.to_file(),
                        formula: f.to_string(),
                        state: m.state_name(s).to_string(),
                        agent: i.get(),
                        mode: c.mode(),
                        value: set.contains(s),
                    };
                    return Ok(Outcome {
                        comparisons,
                        failure: Some(Counterexample {
                            trial: 0,
                            detail: format!("{} and {} disagree", base.mode(), other.mode()),
                            model: None,
                            queries: vec![query(base, &want), query(other, &got)],
                        }),
                    });
                }
            }
        }
    }
    Ok(Outcome {
        comparisons,
        failure: None,
    })
}

/// Compares `CB_G f` with the intersection of `E^k_G f` for
/// `k = 1..=|states|*|G|+1`, per mode and outer agent.
fn cb_oracle(
    m: &Structure,
    bodies: &[(Arc<Formula>, crate::formula::AgentSet)],
    modes: &[EvalMode],
) -> Result<Outcome, String> {
    let mut comparisons = 0;
    for &mode in modes {
        let c = Checker::new(m, mode).map_err(err)?;
        for (f, g) in bodies {
            let k = (m.n_states() * g.len() + 1) as u32;
            for i in m.agents() {
                let cb = c.common_belief_set(g, f, i).map_err(err)?;
                let levels = c.eb_levels(g, f, k, i).map_err(err)?;
                let mut meet = m.full_set();
                for l in &levels {
                    meet.intersect_with(l);
                }
                comparisons += m.n_states();
                if cb == meet {
                    continue;
                }
                let s = cb
                    .difference(&meet)
                    .union(&meet.difference(&cb))
                    .first()
                    .expect("sets differ");
                let level = levels.iter().position(|l| !l.contains(s)).map_or(k, |p| p as u32 + 1);
                let cb_formula = Formula::Cb(g.clone(), f.clone());
                let eb = crate::formula::SurfaceFormula::Eb(
                    g.clone(),
                    level,
                    Box::new(crate::formula::SurfaceFormula::from_core(f)),
                );
                let q = |formula: String, value: bool| Query {
                    model: m.to_file(),
                    formula,
                    state: m.state_name(s).to_string(),
                    agent: i.get(),
                    mode,
                    value,
                };
                return Ok(Outcome {
                    comparisons,
                    failure: Some(Counterexample {
                        trial: 0,
                        detail: format!("CB differs from the meet of E^1..E^{k} under {mode}"),
                        model: None,
                        queries: vec![
                            q(cb_formula.to_string(), cb.contains(s)),
                            q(eb.print(), levels[level as usize - 1].contains(s)),
                        ],
                    }),
                });
            }
        }
    }
    Ok(Outcome {
        comparisons,
        failure: None,
    })
}
