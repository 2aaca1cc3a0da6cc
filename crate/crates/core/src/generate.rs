//! Seeded random structures and formulas.
//!
//! Measures use singleton atoms with integer weights in `[0, 8]`, normalized
//! exactly; cells whose weights are all zero are redrawn. Formulas are
//! grammar-directed under a depth budget, with half of the non-leaf nodes
//! being probability or belief operators.

use crate::formula::{AgentId, AgentSet, Atom, CmpOp, IndexedPropId, PropId, SurfaceFormula, SurfaceProb, SurfaceTerm};
use crate::rational::{int, ratio, Rational};
use crate::stateset::StateSet;
use crate::structure::{CellBelief, Structure, StructureParts};
use crate::formula::Formula;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

/// Size limits for generated models and formulas. All must be at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub max_states: usize,
    pub max_agents: usize,
    pub max_props: usize,
    pub max_depth: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_states: 5,
            max_agents: 3,
            max_props: 3,
            max_depth: 4,
        }
    }
}

const PROP_NAMES: [&str; 6] = ["p", "q", "r", "u", "v", "x"];

fn prop_name(k: usize) -> String {
    PROP_NAMES
        .get(k)
        .map_or_else(|| format!("p{k}"), |s| s.to_string())
}

/// A uniformly drawn restricted-growth labelling of `items`, as blocks in
/// order of first element.
fn random_blocks<R: Rng>(rng: &mut R, items: &[usize], universe: usize) -> Vec<StateSet> {
    let mut blocks: Vec<StateSet> = Vec::new();
    for &s in items {
        let k = rng.gen_range(0..=blocks.len());
        if k == blocks.len() {
            blocks.push(StateSet::empty(universe));
        }
        blocks[k].insert(s);
    }
    blocks
}

/// Integer weights in `[0, 8]`, not all zero, normalized.
fn random_weights<R: Rng>(rng: &mut R, len: usize) -> Vec<Rational> {
    loop {
        let raw: Vec<i64> = (0..len).map(|_| rng.gen_range(0..=8)).collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return raw.into_iter().map(|w| ratio(w, total)).collect();
        }
    }
}

fn random_subset<R: Rng>(rng: &mut R, n: usize) -> StateSet {
    StateSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.5)))
}

/// A structure with exactly the given sizes and the powerset algebra on every
/// cell. With `common`, every agent reads every proposition the same way.
pub fn random_structure_sized<R: Rng>(
    rng: &mut R,
    states: usize,
    agents: usize,
    props: usize,
    common: bool,
) -> Structure {
    let all: Vec<usize> = (0..states).collect();
    let partitions: Vec<Vec<StateSet>> = (0..agents).map(|_| random_blocks(rng, &all, states)).collect();
    let beliefs = partitions
        .iter()
        .map(|cells| {
            cells
                .iter()
                .map(|c| {
                    let w = random_weights(rng, c.len());
                    CellBelief::singletons(states, c.iter().zip(w))
                })
                .collect()
        })
        .collect();
    let first: Vec<StateSet> = (0..props).map(|_| random_subset(rng, states)).collect();
    let interpretations = (0..agents)
        .map(|a| {
            if a == 0 || common {
                first.clone()
            } else {
                (0..props).map(|_| random_subset(rng, states)).collect()
            }
        })
        .collect();
    let m = Structure::new(StructureParts {
        agents,
        states: (1..=states).map(|s| format!("w{s}")).collect(),
        props: (0..props).map(prop_name).collect(),
        partitions,
        beliefs,
        interpretations,
        priors: None,
        signals: None,
    })
    .expect("generated structures are well formed");
    debug_assert!(m.validate_core().is_ok());
    m
}

fn sizes<R: Rng>(rng: &mut R, b: &Bounds) -> (usize, usize, usize) {
    (
        rng.gen_range(1..=b.max_states),
        rng.gen_range(1..=b.max_agents),
        rng.gen_range(1..=b.max_props),
    )
}

/// A structure within `bounds`; ambiguous unless `common`.
pub fn random_structure<R: Rng>(rng: &mut R, bounds: &Bounds, common: bool) -> Structure {
    let (s, a, p) = sizes(rng, bounds);
    random_structure_sized(rng, s, a, p, common)
}

/// A structure whose cell algebras are random coarsenings of the powerset
/// that still satisfy A1-A3: atoms refine the traces of other agents' cells.
/// A4 is not enforced.
pub fn random_coarse_structure<R: Rng>(rng: &mut R, bounds: &Bounds) -> Structure {
    let common = rng.gen_bool(0.5);
    let base = random_structure(rng, bounds, common);
    let n = base.n_states();
    let mut parts = base.to_parts();
    for i in base.agents() {
        for (c, cell) in base.partition(i).cells().iter().enumerate() {
            let mut meet = vec![cell.clone()];
            for j in base.agents().filter(|&j| j != i) {
                meet = meet
                    .iter()
                    .flat_map(|b| base.partition(j).cells().iter().map(move |d| b.intersection(d)))
                    .filter(|b| !b.is_empty())
                    .collect();
            }
            let atoms: Vec<StateSet> = meet
                .iter()
                .flat_map(|b| {
                    let items: Vec<usize> = b.iter().collect();
                    random_blocks(rng, &items, n)
                })
                .collect();
            let weights = random_weights(rng, atoms.len());
            parts.beliefs[i.index()][c] = CellBelief { atoms, weights };
        }
    }
    Structure::new(parts).expect("coarsened structures are well formed")
}

/// A structure with priors generated from its beliefs and signals built from
/// fresh cell-label propositions, so that A5 and A6 hold and every
/// conditioning event has positive prior mass.
///
/// With `cross`, each cell is split into blocks with one signal proposition
/// per block. The owner reads every block's proposition as the whole cell;
/// every other agent reads all of a cell's propositions either as the whole
/// cell or each as its own block.
pub fn random_ai_structure<R: Rng>(rng: &mut R, bounds: &Bounds, cross: bool) -> Structure {
    let base = random_structure(rng, bounds, false);
    let n = base.n_states();
    let mut parts = base.to_parts();
    let mut signals: Vec<Vec<Option<Formula>>> = vec![vec![None; n]; base.n_agents()];
    for i in base.agents() {
        for (k, cell) in base.partition(i).cells().iter().enumerate() {
            let items: Vec<usize> = cell.iter().collect();
            let blocks = if cross {
                random_blocks(rng, &items, n)
            } else {
                vec![cell.clone()]
            };
            let b = base.belief(i, k);
            let positive = |block: &StateSet| {
                b.atoms
                    .iter()
                    .zip(&b.weights)
                    .any(|(a, w)| w > &int(0) && a.is_subset(block))
            };
            let fine_ok = blocks.iter().all(positive);
            let fine: Vec<bool> = base
                .agents()
                .map(|j| j != i && fine_ok && blocks.len() > 1 && rng.gen_bool(0.5))
                .collect();
            for (bi, block) in blocks.iter().enumerate() {
                let name = format!("s{i}_{k}_{bi}");
                parts.props.push(name.clone());
                for j in base.agents() {
                    let ext = if fine[j.index()] { block.clone() } else { cell.clone() };
                    parts.interpretations[j.index()].push(ext);
                }
                let prop = Formula::Prop(PropId::new(&name).expect("signal names are identifiers"));
                for s in block.iter() {
                    signals[i.index()][s] = Some(prop.clone());
                }
            }
        }
    }
    parts.signals = Some(
        signals
            .into_iter()
            .map(|row| row.into_iter().map(|f| f.expect("cells cover the states")).collect())
            .collect(),
    );
    let m = Structure::new(parts).expect("signal props are fresh");
    let priors = m.generate_priors().expect("generated beliefs satisfy A1-A3");
    let m = m.with_priors(Some(priors)).expect("priors have the right shape");
    debug_assert!(m.validate_signals().map(|r| r.is_ok()).unwrap_or(false));
    m
}

/// Knobs for [`random_formula`].
#[derive(Debug, Clone)]
pub struct FormulaOptions {
    pub props: Vec<PropId>,
    pub agents: usize,
    pub depth: usize,
    /// Also produce `p@i` atoms.
    pub indexed: bool,
    /// Probability that an inner node is a probability or belief operator.
    pub modal_bias: f64,
    pub max_terms: usize,
    pub max_power: u32,
}

impl FormulaOptions {
    pub fn for_structure(m: &Structure, depth: usize) -> Self {
        FormulaOptions {
            props: m
                .props()
                .iter()
                .filter_map(|p| match Atom::parse(p) {
                    Some(Atom::Plain(id)) => Some(id),
                    _ => None,
                })
                .collect(),
            agents: m.n_agents(),
            depth,
            indexed: false,
            modal_bias: 0.5,
            max_terms: 2,
            max_power: 2,
        }
    }
}

const COEFFS: [(i64, i64); 9] = [(1, 1), (1, 1), (1, 2), (2, 1), (-1, 1), (1, 3), (2, 3), (-1, 2), (3, 1)];
const BOUNDS: [(i64, i64); 8] = [(0, 1), (1, 3), (1, 2), (2, 3), (1, 1), (-1, 2), (1, 4), (3, 4)];
const OPS: [CmpOp; 5] = [CmpOp::Ge, CmpOp::Ge, CmpOp::Le, CmpOp::Eq, CmpOp::Gt];

fn pick_rational<R: Rng>(rng: &mut R, table: &[(i64, i64)]) -> Rational {
    let &(n, d) = table.choose(rng).expect("nonempty table");
    ratio(n, d)
}

fn random_agent<R: Rng>(rng: &mut R, agents: usize) -> AgentId {
    AgentId::from_index(rng.gen_range(0..agents))
}

pub fn random_group<R: Rng>(rng: &mut R, agents: usize) -> AgentSet {
    loop {
        let picked: Vec<AgentId> = (0..agents)
            .filter(|_| rng.gen_bool(0.5))
            .map(AgentId::from_index)
            .collect();
        if let Some(g) = AgentSet::new(picked) {
            return g;
        }
    }
}

fn random_atom<R: Rng>(rng: &mut R, o: &FormulaOptions) -> SurfaceFormula {
    let roll: f64 = rng.gen();
    if roll < 0.06 {
        return SurfaceFormula::True;
    }
    if roll < 0.1 {
        return SurfaceFormula::False;
    }
    let p = o.props.choose(rng).expect("at least one proposition").clone();
    if o.indexed && rng.gen_bool(0.3) {
        let agent = AgentId::new(rng.gen_range(1..=o.agents.max(1) as u32 + 1)).unwrap();
        SurfaceFormula::Indexed(IndexedPropId::new(p, agent))
    } else {
        SurfaceFormula::Prop(p)
    }
}

/// A random surface formula of depth at most `o.depth`.
pub fn random_formula<R: Rng>(rng: &mut R, o: &FormulaOptions) -> SurfaceFormula {
    gen(rng, o, o.depth)
}

fn gen<R: Rng>(rng: &mut R, o: &FormulaOptions, depth: usize) -> SurfaceFormula {
    if depth <= 1 || rng.gen_bool(0.15) {
        return random_atom(rng, o);
    }
    let sub = |rng: &mut R| Box::new(gen(rng, o, depth - 1));
    if rng.gen_bool(o.modal_bias) {
        match rng.gen_range(0..4) {
            0 => SurfaceFormula::B(random_agent(rng, o.agents), sub(rng)),
            1 => {
                let g = random_group(rng, o.agents);
                let k = rng.gen_range(1..=o.max_power);
                SurfaceFormula::Eb(g, k, sub(rng))
            }
            2 => SurfaceFormula::Cb(random_group(rng, o.agents), sub(rng)),
            _ => {
                let n = rng.gen_range(1..=o.max_terms);
                let terms = (0..n)
                    .map(|_| SurfaceTerm {
                        coeff: pick_rational(rng, &COEFFS),
                        arg: sub(rng),
                    })
                    .collect();
                SurfaceFormula::Prob(SurfaceProb {
                    agent: random_agent(rng, o.agents),
                    terms,
                    op: *OPS.choose(rng).unwrap(),
                    bound: pick_rational(rng, &BOUNDS),
                })
            }
        }
    } else {
        match rng.gen_range(0..6) {
            0 | 1 => SurfaceFormula::Not(sub(rng)),
            2 => SurfaceFormula::And(sub(rng), sub(rng)),
            3 => SurfaceFormula::Or(sub(rng), sub(rng)),
            4 => SurfaceFormula::Implies(sub(rng), sub(rng)),
            _ => SurfaceFormula::Iff(sub(rng), sub(rng)),
        }
    }
}

/// `count` random formulas over `m`'s plain propositions, expanded.
pub fn random_corpus<R: Rng>(rng: &mut R, m: &Structure, depth: usize, count: usize) -> Vec<Formula> {
    let o = FormulaOptions::for_structure(m, depth);
    let tautology = m.designated_atom();
    (0..count)
        .map(|_| random_formula(rng, &o).expand(&tautology))
        .collect()
}
