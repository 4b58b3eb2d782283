use proptest::prelude::*;

use roc_core::corpus::{random_corpus, RandomSpec};
use roc_core::grammar::{count_finite_derivations, export_grammar, finite_member, parse_grammar, triple_pair_construct};
use roc_core::omega::{behavior_omega_member, check_behavior_lasso, find_behavior_lasso};
use roc_core::oracle::{oracle_count_runs, oracle_omega_member, replay_pump, replay_run, RunBounds};
use roc_core::{finite_behavior, weight_of_word, DerivCount, RocAutomaton, SquareMatrix, UPWord, Weight, WeightDomain};

fn automaton(domain: WeightDomain) -> impl Strategy<Value = RocAutomaton> {
    any::<u64>().prop_map(move |seed| random_corpus(seed, 1, &RandomSpec::new(domain)).remove(0))
}

fn any_automaton() -> impl Strategy<Value = RocAutomaton> {
    prop_oneof![automaton(WeightDomain::Bool), automaton(WeightDomain::NatInf)]
}

fn word(max: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..2usize, 0..=max)
}

fn up_word(max: usize) -> impl Strategy<Value = UPWord> {
    (word(max), prop::collection::vec(0..2usize, 1..=max)).prop_map(|(u, v)| UPWord::new(u, v).unwrap())
}

fn nat_weight() -> impl Strategy<Value = Weight> {
    prop_oneof![Just(Weight::Nat(0)), Just(Weight::Nat(1)), Just(Weight::Inf), (0..1u128 << 40).prop_map(Weight::Nat)]
}

fn matrix(n: usize, domain: WeightDomain) -> impl Strategy<Value = SquareMatrix> {
    let cell = match domain {
        WeightDomain::Bool => any::<bool>().prop_map(Weight::Bool).boxed(),
        WeightDomain::NatInf => {
            prop_oneof![3 => Just(Weight::Nat(0)), 2 => (1..4u128).prop_map(Weight::Nat), 1 => Just(Weight::Inf)].boxed()
        }
    };
    prop::collection::vec(prop::collection::vec(cell, n), n).prop_map(|rows| SquareMatrix::from_rows(rows).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn natinf_distributes_and_stars(a in nat_weight(), b in nat_weight(), c in nat_weight()) {
        prop_assert_eq!(a.mul(b.add(c)?)?, a.mul(b)?.add(a.mul(c)?)?);
        prop_assert_eq!(a.mul(b)?.mul(c)?, a.mul(b.mul(c)?)?);
        prop_assert_eq!(a.star(), Weight::Nat(1).add(a.mul(a.star())?)?);
    }

    #[test]
    fn matrix_star_is_a_fixpoint(m in (1..=4usize).prop_flat_map(|n| prop_oneof![matrix(n, WeightDomain::Bool), matrix(n, WeightDomain::NatInf)])) {
        let star = m.star()?;
        let id = SquareMatrix::identity(m.n(), m.domain());
        prop_assert_eq!(&star, &id.add(&m.mul(&star)?)?);
        prop_assert_eq!(&star, &id.add(&star.mul(&m)?)?);
    }

    #[test]
    fn omega_k_is_monotone(m in (1..=4usize).prop_flat_map(|n| matrix(n, WeightDomain::Bool))) {
        let n = m.n();
        prop_assert!(m.omega_k(0)?.iter().all(|w| w.is_zero()));
        for k in 0..n {
            let (lo, hi) = (m.omega_k(k)?, m.omega_k(k + 1)?);
            prop_assert!(lo.iter().zip(&hi).all(|(l, h)| l.is_zero() || !h.is_zero()));
        }
    }

    #[test]
    fn text_format_round_trips(aut in any_automaton()) {
        prop_assert_eq!(RocAutomaton::parse(&aut.to_text())?, aut);
    }

    #[test]
    fn grammar_export_round_trips(aut in any_automaton()) {
        let g = triple_pair_construct(&aut);
        prop_assert_eq!(parse_grammar(&export_grammar(&g))?, g);
    }

    #[test]
    fn truncation_is_coherent(aut in any_automaton(), short in 0..=4usize) {
        let long = finite_behavior(&aut, 6)?;
        prop_assert_eq!(long.restrict(short), finite_behavior(&aut, short)?);
    }

    #[test]
    fn lasso_search_agrees_with_membership(aut in any_automaton(), w in up_word(3)) {
        let member = behavior_omega_member(&aut, &w)?;
        let cert = find_behavior_lasso(&aut, &w)?;
        prop_assert_eq!(cert.is_some(), member);
        if let Some(cert) = cert {
            prop_assert!(check_behavior_lasso(&aut, &w, &cert));
        }
    }

    #[test]
    fn complete_omega_oracle_agrees(aut in any_automaton(), w in up_word(3)) {
        let report = oracle_omega_member(&aut, &w, None, None)?;
        let member = behavior_omega_member(&aut, &w)?;
        if report.accepted {
            prop_assert!(member);
        } else if report.complete {
            prop_assert!(!member);
        }
    }

    #[test]
    fn run_witnesses_replay(aut in automaton(WeightDomain::NatInf), w in word(5)) {
        let bounds = RunBounds { witnesses: 4, ..RunBounds::default() };
        let report = oracle_count_runs(&aut, &w, bounds)?;
        for run in &report.witnesses {
            prop_assert!(replay_run(&aut, &w, run, true));
            prop_assert_eq!(run.letters(), w.clone());
        }
        if let Some(pump) = &report.pump {
            prop_assert!(replay_pump(&aut, &w, pump, true));
        }
        prop_assert_eq!(oracle_count_runs(&aut, &w, bounds)?, report);
    }

    #[test]
    fn unit_weight_counts_agree(aut in automaton(WeightDomain::NatInf), w in word(5)) {
        let report = oracle_count_runs(&aut, &w, RunBounds { witnesses: 0, ..RunBounds::default() })?;
        let d = count_finite_derivations(&triple_pair_construct(&aut), &w)?;
        let c = weight_of_word(&aut, &w)?;
        prop_assert_eq!(c.to_count(), d);
        if report.complete {
            prop_assert_eq!(report.count, d);
        }
    }

    #[test]
    fn grammar_membership_is_support(aut in any_automaton(), w in word(6)) {
        let member = finite_member(&triple_pair_construct(&aut), &w)?;
        prop_assert_eq!(member, !weight_of_word(&aut, &w)?.is_zero());
    }

    #[test]
    fn fewer_repeated_states_accept_less(aut in any_automaton(), w in up_word(3)) {
        for k in 0..aut.k() {
            if behavior_omega_member(&aut.with_k(k)?, &w)? {
                prop_assert!(behavior_omega_member(&aut.with_k(k + 1)?, &w)?);
            }
        }
    }
}

#[test]
fn zero_repeated_states_accept_nothing() {
    for aut in random_corpus(5, 40, &RandomSpec::new(WeightDomain::Bool)) {
        let aut = aut.with_k(0).unwrap();
        for w in roc_core::checks::up_words(2, 2) {
            assert!(!behavior_omega_member(&aut, &w).unwrap());
        }
    }
}

#[test]
fn infinite_counts_come_with_pumps() {
    for aut in random_corpus(8, 40, &RandomSpec::new(WeightDomain::NatInf)) {
        for w in [vec![], vec![0], vec![1], vec![0, 1], vec![1, 1, 0]] {
            let r = oracle_count_runs(&aut, &w, RunBounds::default()).unwrap();
            if r.count == DerivCount::Infinite {
                assert!(r.pump.is_some());
            }
        }
    }
}
