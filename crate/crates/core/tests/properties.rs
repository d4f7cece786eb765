use std::rc::Rc;

use proptest::prelude::*;

use cps_hierarchy::arith::{self, AExp};
use cps_hierarchy::compare;
use cps_hierarchy::corpus;
use cps_hierarchy::dynamic;
use cps_hierarchy::gen::{self, GenConfig};
use cps_hierarchy::machine::{subst, SConfig};
use cps_hierarchy::nbe;
use cps_hierarchy::redsem;
use cps_hierarchy::syntax::{concat, SubstFrame, SubstTower};
use cps_hierarchy::{
    parse_term, print_term, run_observable, with_stack, Backend, Observable, Outcome, OutcomeClass, Term,
};

const FUEL: u64 = 20_000;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

fn program(seed: u64, n: usize) -> Term {
    gen::program(&mut gen::rng(seed), GenConfig::new(n))
}

fn frame() -> impl Strategy<Value = SubstFrame> {
    prop_oneof![
        Just(SubstFrame::Succ),
        (-5i64..5).prop_map(|m| SubstFrame::AddRight(Term::Lit(m))),
        (-5i64..5).prop_map(|m| SubstFrame::AddLeft(Rc::new(Term::Lit(m)), ())),
        (-5i64..5).prop_map(|m| SubstFrame::ConsTail(Term::Lit(m))),
    ]
}

fn frames() -> impl Strategy<Value = Vec<SubstFrame>> {
    prop::collection::vec(frame(), 0..5)
}

fn level1(frames: Vec<SubstFrame>) -> SubstTower {
    let mut t = SubstTower::empty(1);
    t.frames = frames;
    t
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn print_then_parse_is_identity(seed: u64, n in 1usize..4) {
        with_stack(move || {
            let t = program(seed, n);
            assert_eq!(parse_term(&print_term(&t)).unwrap(), t);
        });
    }

    #[test]
    fn concat_is_associative(a in frames(), b in frames(), c in frames()) {
        prop_assert_eq!(concat(&concat(&a, &b), &c), concat(&a, &concat(&b, &c)));
        prop_assert_eq!(concat(&a, &Vec::new()), a.clone());
        prop_assert_eq!(concat(&Vec::new(), &a), a);
    }

    #[test]
    fn plugging_a_concatenation_plugs_twice(a in frames(), b in frames(), m in -5i64..5) {
        let hole = Term::Lit(m);
        let whole = redsem::plug(&level1(concat(&a, &b)), &hole);
        let twice = redsem::plug(&level1(b), &redsem::plug(&level1(a), &hole));
        prop_assert_eq!(whole, twice);
    }

    #[test]
    fn machine_towers_keep_their_shape(seed: u64, n in 1usize..4) {
        with_stack(move || {
            let t = program(seed, n);
            subst::run_with(&t, n, FUEL, false, subst::Control::Static, |_, c: &SConfig| {
                if let Some(tower) = c.tower() {
                    assert_eq!(tower.height(), n + 1);
                    assert!(tower.check_shape());
                }
            });
        });
    }

    #[test]
    fn machine_and_reduction_visit_the_same_terms(seed: u64, n in 1usize..4) {
        with_stack(move || {
            let t = program(seed, n);
            let (o1, machine) = compare::plugged_machine_sequence(&t, n, FUEL);
            if o1.class() == OutcomeClass::Timeout {
                return;
            }
            let (o2, reduction) = compare::reduction_terms(&t, n, FUEL);
            // the machine's plugged configurations contain the reduction
            // sequence in order
            let mut rest = machine.iter();
            for r in &reduction {
                assert!(rest.any(|m| m == r), "{} missing from the machine run", print_term(r));
            }
            assert_eq!(o1.class(), o2.class());
            assert_eq!(o1.value(), o2.value());
        });
    }

    #[test]
    fn fuel_units_are_ordered(seed: u64, n in 1usize..4) {
        with_stack(move || {
            let t = program(seed, n);
            let env = run_observable(Backend::Env, &t, n, FUEL);
            if env.outcome.class() == OutcomeClass::Value {
                assert!(run_observable(Backend::Cps, &t, n, FUEL).steps <= env.steps);
                assert!(run_observable(Backend::Redsem, &t, n, FUEL).steps <= env.steps);
            }
        });
    }

    #[test]
    fn raising_the_level_changes_nothing(seed: u64, n in 1usize..3, extra in 1usize..3) {
        with_stack(move || {
            let t = program(seed, n);
            for b in Backend::ALL {
                let lo = run_observable(b, &t, n, FUEL).outcome;
                let hi = run_observable(b, &t, n + extra, FUEL).outcome;
                assert_eq!(lo.class(), hi.class());
                assert_eq!(lo.value(), hi.value());
            }
        });
    }

    #[test]
    fn prefix_programs_match_the_oracles(threshold in 0i64..10, xs in prop::collection::vec(0i64..10, 0..10)) {
        with_stack(move || {
            let p = |m: i64| m > threshold;
            for prog in corpus::load_dir(&corpus::corpus_dir()).unwrap() {
                let want = match prog.name.as_str() {
                    "prefix_first" => Observable::from_int_list(&corpus::ref_find_first_prefix(p, &xs)),
                    "prefix_all" => Observable::from_int_lists(&corpus::ref_find_all_prefixes(p, &xs)),
                    _ => continue,
                };
                let t = corpus::with_inputs(&prog.term, Some(threshold), &xs).unwrap();
                for b in Backend::ALL {
                    assert_eq!(
                        run_observable(b, &t, 1, 1_000_000).outcome,
                        Outcome::Value(want.clone()),
                        "{} on {}",
                        prog.name,
                        b.name()
                    );
                }
            }
        });
    }

    #[test]
    fn dynamic_traversal_reverses(xs in prop::collection::vec(-20i64..20, 0..12)) {
        with_stack(move || {
            let traverse = corpus::load(&corpus::corpus_dir().join("traverse.cps")).unwrap();
            let t = corpus::with_inputs(&traverse.term, None, &xs).unwrap();
            let rev: Vec<i64> = xs.iter().rev().copied().collect();
            let st = subst::run(&t, 1, FUEL, false).outcome.map(|v| subst::observe(&v));
            let dy = dynamic::run(&t, FUEL, false).outcome.map(|v| subst::observe(&v));
            assert_eq!(st, Outcome::Value(Observable::from_int_list(&xs)));
            assert_eq!(dy, Outcome::Value(Observable::from_int_list(&rev)));
        });
    }

    #[test]
    fn arith_reduction_takes_one_step_per_addition(seed: u64) {
        let e = gen::aexp(&mut gen::rng(seed), 6);
        fn pluses(e: &AExp) -> usize {
            match e {
                AExp::Num(_) => 0,
                AExp::Plus(a, b) => 1 + pluses(a) + pluses(b),
            }
        }
        let (v, seq) = arith::reduce_all(&e).unwrap();
        prop_assert_eq!(seq.len(), pluses(&e));
        prop_assert_eq!(Ok(v), arith::eval_direct(&e));
        let m = arith::run_machine(&e).unwrap();
        prop_assert_eq!(m.redexes.len(), pluses(&e));
        prop_assert_eq!(m.redexes, seq);
    }

    #[test]
    fn hierarchical_normal_forms_are_stable(seed: u64, n in 1usize..6) {
        let t = gen::mon_term(&mut gen::rng(seed), n, 3, 3);
        let u = nbe::normalize_hier(&t, n);
        prop_assert!(nbe::grammar_check_nf(&u, n));
        prop_assert_eq!(nbe::normalize_hier(&nbe::embed(&u), n), u.clone());
        if n == 1 {
            prop_assert_eq!(nbe::nf_vars(&u), nbe::oracle_flatten(&t));
        }
        if n == 2 {
            let vars: Vec<Rc<str>> = (0..3).map(|i| format!("x{i}").into()).collect();
            prop_assert!(nbe::oracle_truth_equiv(&t, &u, &vars));
        }
    }
}

#[test]
fn corpus_programs_meet_their_expectations() {
    with_stack(|| {
        for p in corpus::load_dir(&corpus::corpus_dir()).unwrap() {
            let expect = p.expect.clone().expect("every corpus program states its expectation");
            for b in Backend::ALL {
                let o = run_observable(b, &p.term, p.level, 100_000).outcome;
                assert!(expect.matches(&o), "{} on {}: {o:?}", p.name, b.name());
            }
        }
    });
}

#[test]
fn machine_sequence_matches_reduction_on_the_corpus() {
    with_stack(|| {
        for p in corpus::load_dir(&corpus::corpus_dir()).unwrap() {
            if p.name == "loop" {
                continue;
            }
            let (o1, m) = compare::plugged_machine_sequence(&p.term, p.level, 100_000);
            let (o2, r) = compare::reduction_terms(&p.term, p.level, 100_000);
            assert_eq!(o1.class(), o2.class(), "{}", p.name);
            let mut rest = m.iter();
            for t in &r {
                assert!(rest.any(|x| x == t), "{}: {} not visited", p.name, print_term(t));
            }
        }
    });
}

#[test]
fn shift_at_level_one_only_reaches_the_nearest_reset() {
    with_stack(|| {
        let t = parse_term("(reset 1 (add 1 (reset 1 (add 10 (shift 1 (k) (k (k 100)))))))").unwrap();
        for b in Backend::ALL {
            assert_eq!(run_observable(b, &t, 1, 1000).outcome, Outcome::Value(Observable::Int(121)));
        }
    });
}

#[test]
fn stuck_programs_report_the_same_kind() {
    with_stack(|| {
        for src in ["(1 2)", "(succ nil)", "(lcase 3 0 (h t) h)", "(add nil 1)"] {
            let t = parse_term(src).unwrap();
            let kinds: Vec<_> = Backend::ALL
                .iter()
                .map(|&b| match run_observable(b, &t, 1, 1000).outcome {
                    Outcome::Stuck(s) => s.kind,
                    o => panic!("{src} on {}: {o:?}", b.name()),
                })
                .collect();
            assert!(kinds.windows(2).all(|w| w[0] == w[1]), "{src}: {kinds:?}");
        }
    });
}

#[test]
fn tower_operations_round_trip() {
    let mut t = SubstTower::empty(3);
    t.frames.push(SubstFrame::Succ);
    t.reset(1);
    assert!(t.frames.is_empty());
    assert_eq!(t.stack(2).len(), 1);
    t.frames.push(SubstFrame::AddRight(Term::Lit(1)));
    let k = t.capture(2);
    assert_eq!(k.height(), 2);
    assert!(t.level_is_empty(1) && t.level_is_empty(2));
    t.resume(k.clone());
    assert_eq!(t.stack(3).len(), 1);
    assert_eq!(t.frames, k.frames);
    assert!(t.check_shape());
    let mut u = SubstTower::empty(2);
    assert!(!u.pop_level(2));
}
