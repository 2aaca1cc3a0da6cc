mod support;

use ambilogic::formula::SurfaceFormula;
use ambilogic::generate::{self, Bounds, FormulaOptions};
use ambilogic::{parse, Checker, EvalMode, Structure};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::brute::Brute;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SMALL: Bounds = Bounds {
    max_states: 3,
    max_agents: 2,
    max_props: 2,
    max_depth: 3,
};

fn applicable(m: &Structure) -> Vec<EvalMode> {
    EvalMode::ALL
        .into_iter()
        .filter(|&mode| Checker::new(m, mode).is_ok())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn checker_matches_brute_force(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = match seed % 3 {
            0 => generate::random_structure(&mut r, &SMALL, true),
            1 => generate::random_structure(&mut r, &SMALL, false),
            _ => generate::random_ai_structure(&mut r, &SMALL, true),
        };
        let corpus = generate::random_corpus(&mut r, &m, SMALL.max_depth, 3);
        for mode in applicable(&m) {
            let c = Checker::new(&m, mode).unwrap();
            let b = Brute::new(&m, mode);
            for f in &corpus {
                for i in m.agents() {
                    for s in 0..m.n_states() {
                        prop_assert_eq!(c.eval(f, s, i).unwrap(), b.holds(f, s, i).unwrap(),
                            "{} at {} for {} [{}]", f, m.state_name(s), i, mode);
                    }
                }
            }
        }
    }

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let o = FormulaOptions {
            props: ["p", "q", "Bq", "Prx", "Ex", "CBx", "trueish", "x_1", "_a"]
                .iter()
                .map(|s| ambilogic::formula::PropId::new(s).unwrap())
                .collect(),
            agents: 4,
            depth: 6,
            indexed: true,
            modal_bias: 0.5,
            max_terms: 3,
            max_power: 3,
        };
        for _ in 0..20 {
            let f = generate::random_formula(&mut r, &o);
            let text = f.print();
            let back = parse(&text);
            prop_assert_eq!(back, Ok(f), "{}", text);
        }
    }

    #[test]
    fn expansion_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = generate::random_structure(&mut r, &Bounds::default(), false);
        let atom = m.designated_atom();
        for f in generate::random_corpus(&mut r, &m, 4, 5) {
            prop_assert_eq!(SurfaceFormula::from_core(&f).expand(&atom), f);
        }
    }

    #[test]
    fn propositional_formulas_ignore_the_mode(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = generate::random_ai_structure(&mut r, &Bounds::default(), true);
        let mut o = FormulaOptions::for_structure(&m, 4);
        o.modal_bias = 0.0;
        let atom = m.designated_atom();
        for _ in 0..5 {
            let f = generate::random_formula(&mut r, &o).expand(&atom);
            prop_assert!(f.is_propositional());
            for i in m.agents() {
                let base = Checker::new(&m, EvalMode::Outermost).unwrap().extension(&f, i).unwrap();
                for mode in applicable(&m) {
                    prop_assert_eq!(&Checker::new(&m, mode).unwrap().extension(&f, i).unwrap(), &base);
                }
            }
        }
    }

    #[test]
    fn structures_survive_json(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = if seed % 2 == 0 {
            generate::random_ai_structure(&mut r, &Bounds::default(), true)
        } else {
            generate::random_coarse_structure(&mut r, &Bounds::default())
        };
        prop_assert_eq!(Structure::from_json(&m.to_json()).unwrap(), m);
    }
}

#[test]
fn generated_models_pass_validation() {
    let mut r = rng(1);
    for _ in 0..300 {
        let m = generate::random_structure(&mut r, &Bounds::default(), false);
        assert!(m.validate_core().is_ok());
        let a = generate::random_ai_structure(&mut r, &Bounds::default(), true);
        assert!(a.validate_core().is_ok());
        assert!(a.validate_signals().unwrap().is_ok());
    }
}

#[test]
fn truth_does_not_entail_belief() {
    // Search generated models for a query where f holds but B_i f fails.
    let mut r = rng(2024);
    for _ in 0..200 {
        let m = generate::random_structure(&mut r, &Bounds::default(), false);
        let c = Checker::new(&m, EvalMode::Innermost).unwrap();
        for f in generate::random_corpus(&mut r, &m, 2, 3) {
            for i in m.agents() {
                let believed = ambilogic::Formula::believes(i, f.clone());
                let holds = c.extension(&f, i).unwrap();
                let b = c.extension(&believed, i).unwrap();
                if !holds.is_subset(&b) {
                    return;
                }
            }
        }
    }
    panic!("no model separates truth from belief");
}
