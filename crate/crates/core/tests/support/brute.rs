//! Clause-by-clause evaluator with no caching and no reachability search.
//!
//! Every probability is recomputed from the cell measure or the prior, and
//! `CB_G f` is checked as the conjunction of `E^k_G f` for
//! `k = 1..=|states|*|G|+1`, each level rebuilt as an explicit formula.

use ambilogic::formula::{ProbGe, Term};
use ambilogic::rational::{int, Rational};
use ambilogic::{AgentId, AgentSet, EvalMode, Formula, Structure};
use num_traits::Zero;
use std::sync::Arc;

pub struct Brute<'a> {
    pub m: &'a Structure,
    pub mode: EvalMode,
}

impl<'a> Brute<'a> {
    pub fn new(m: &'a Structure, mode: EvalMode) -> Self {
        Brute { m, mode }
    }

    pub fn holds(&self, f: &Formula, w: usize, i: AgentId) -> Result<bool, String> {
        match f {
            Formula::Prop(p) => {
                let k = self
                    .m
                    .prop_index(p.as_str())
                    .ok_or_else(|| format!("unknown proposition {p}"))?;
                Ok(self.m.interpretation(i, k).contains(w))
            }
            Formula::Indexed(ip) => {
                let k = self
                    .m
                    .prop_index(&ip.to_string())
                    .ok_or_else(|| format!("unknown proposition {ip}"))?;
                Ok(self.m.interpretation(i, k).contains(w))
            }
            Formula::Not(g) => Ok(!self.holds(g, w, i)?),
            Formula::And(a, b) => Ok(self.holds(a, w, i)? && self.holds(b, w, i)?),
            Formula::Prob(p) => Ok(self.lhs(p, w, i)? >= p.bound),
            Formula::Cb(g, body) => {
                let k_max = self.m.n_states() * g.len() + 1;
                let mut level: Arc<Formula> = body.clone();
                for _ in 0..k_max {
                    level = Arc::new(everyone(g, &level));
                    if !self.holds(&level, w, i)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// Every state where `f` holds for `reader`.
    fn extension(&self, f: &Formula, reader: AgentId) -> Result<Vec<bool>, String> {
        (0..self.m.n_states()).map(|s| self.holds(f, s, reader)).collect()
    }

    pub fn lhs(&self, p: &ProbGe, w: usize, i: AgentId) -> Result<Rational, String> {
        let j = p.agent;
        let reader = match self.mode {
            EvalMode::Innermost | EvalMode::InnermostAi => j,
            _ => i,
        };
        let mut total = Rational::zero();
        match self.mode {
            EvalMode::Common | EvalMode::Outermost | EvalMode::Innermost => {
                for t in &p.terms {
                    let ext = self.extension(&t.arg, reader)?;
                    total += &t.coeff * self.cell_measure(j, w, &ext)?;
                }
            }
            EvalMode::OutermostAi | EvalMode::InnermostAi => {
                let prior = self.m.prior(j).ok_or("no priors")?;
                let signal = self.m.signal(j, w).ok_or("no signals")?;
                let cond = self.extension(signal, reader)?;
                let mass = |ev: &[bool]| {
                    (0..ev.len())
                        .filter(|&s| ev[s])
                        .fold(Rational::zero(), |acc, s| acc + &prior[s])
                };
                let denom = mass(&cond);
                if denom.is_zero() {
                    return Err(format!("conditioning on a null event at {}", self.m.state_name(w)));
                }
                for t in &p.terms {
                    let ext = self.extension(&t.arg, reader)?;
                    let both: Vec<bool> = ext.iter().zip(&cond).map(|(a, b)| *a && *b).collect();
                    total += &t.coeff * (mass(&both) / &denom);
                }
            }
        }
        Ok(total)
    }

    /// `mu_{j,w}` of the part of `event` inside `j`'s cell at `w`.
    fn cell_measure(&self, j: AgentId, w: usize, event: &[bool]) -> Result<Rational, String> {
        let cell = self.m.cell(j, w);
        let belief = self.m.belief_at(j, w);
        let mut total = Rational::zero();
        for (atom, weight) in belief.atoms.iter().zip(&belief.weights) {
            let inside = atom.iter().filter(|&s| cell.contains(s) && event[s]).count();
            if inside == atom.len() {
                total += weight;
            } else if inside > 0 {
                return Err(format!("agent {j} cannot measure the event at {}", self.m.state_name(w)));
            }
        }
        Ok(total)
    }
}

/// `E_G f` as the conjunction of `Pr_j(f) >= 1` over `j` in `G`, left nested.
pub fn everyone(g: &AgentSet, f: &Arc<Formula>) -> Formula {
    let believes = |j: AgentId| {
        Formula::Prob(ProbGe {
            agent: j,
            terms: vec![Term {
                coeff: int(1),
                arg: f.clone(),
            }],
            bound: int(1),
        })
    };
    let mut agents = g.iter();
    let first = believes(agents.next().expect("groups are nonempty"));
    agents.fold(first, |acc, j| Formula::And(Arc::new(acc), Arc::new(believes(j))))
}
