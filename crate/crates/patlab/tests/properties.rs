//! Property tests over random patterns, formulas, regexes and automata.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{language_by_substitutions, words_upto, NaiveRegex};
use patlab::automata::{
    bounded_accepting_computations, decode_computation, encode_computation, is_accepting_computation,
    is_good_structure, step, valc_bounded, Configuration, EncodingParams, TwoCounterAutomaton,
};
use patlab::constraints::{evaluate, feasible_assignments_bounded, from_dnf, to_dnf, Formula, LinearInequality, Rel};
use patlab::langops::{bounded_equivalence, bounded_inclusion, enumerate_language, BoundedVerdict, Side};
use patlab::matcher::{conjunctive_membership, membership, verify_certificate, ConjunctiveQuery};
use patlab::pattern::{
    apply_symbol_morphism, to_erasing_equivalent, to_terminal_free, Alphabet, ConstrainedPattern, Mode, Pattern,
    Substitution, Symbol, SymbolMorphism, VarDefault,
};
use patlab::reductions::{assemble_right, build_appd, first_satisfied, predicate_satisfied};
use patlab::regular::{FiniteAutomaton, Regex, RegularConstraintMap};
use proptest::prelude::*;

const VARS: [&str; 3] = ["x1", "x2", "x3"];

fn ab() -> Alphabet {
    Alphabet::parse("ab").unwrap()
}

fn symbols() -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec(0..5usize, 1..=5).prop_map(|v| {
        v.into_iter()
            .map(|k| match k {
                0 => Symbol::Term('a'),
                1 => Symbol::Term('b'),
                k => Symbol::var(VARS[k - 2]),
            })
            .collect()
    })
}

fn inequality(vars: Vec<String>) -> impl Strategy<Value = Option<LinearInequality>> {
    (prop::collection::vec(-2i64..=3, vars.len()), 0..3usize, 0i64..=5).prop_map(move |(cs, rel, k)| {
        let terms: Vec<(i64, &str)> =
            cs.iter().zip(&vars).filter(|(c, _)| **c != 0).map(|(c, v)| (*c, v.as_str())).collect();
        if terms.is_empty() {
            return None;
        }
        LinearInequality::from_terms(&terms, [Rel::Le, Rel::Ge, Rel::Eq][rel], k).ok()
    })
}

fn formula(vars: Vec<String>) -> BoxedStrategy<Formula> {
    if vars.is_empty() {
        return Just(Formula::truth()).boxed();
    }
    (prop::collection::vec(inequality(vars), 0..=3), any::<bool>())
        .prop_map(|(ls, disj)| {
            let leaves: Vec<Formula> = ls.into_iter().flatten().map(Formula::leaf).collect();
            match (leaves.len(), disj) {
                (0, _) => Formula::truth(),
                (1, _) => leaves[0].clone(),
                (_, true) => {
                    let (first, rest) = leaves.split_at(1);
                    Formula::or(vec![first[0].clone(), Formula::and(rest.to_vec())])
                }
                (_, false) => Formula::and(leaves),
            }
        })
        .boxed()
}

fn constrained() -> impl Strategy<Value = ConstrainedPattern> {
    (symbols(), any::<bool>()).prop_flat_map(|(syms, ne)| {
        let p = Pattern::new(syms, &ab()).unwrap();
        let vars: Vec<String> = p.vars().into_iter().collect();
        let mode = if ne { Mode::NE } else { Mode::E };
        formula(vars)
            .prop_map(move |f| ConstrainedPattern::new(p.clone(), f, RegularConstraintMap::new(), mode).unwrap())
    })
}

fn regex_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![Just("0".to_owned()), Just("#".to_owned()), Just("[0#]".to_owned())];
    leaf.prop_recursive(4, 16, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}|{b})")),
            inner.clone().prop_map(|a| format!("({a})*")),
            inner.prop_map(|a| format!("({a})+")),
        ]
    })
}

fn automaton() -> impl Strategy<Value = TwoCounterAutomaton> {
    (1..=3usize).prop_flat_map(|n| {
        let mv = (0..n, 0..2u8, 0..2u8, 0..n, -1i8..=1, -1i8..=1);
        (prop::collection::vec(any::<bool>(), n), prop::collection::vec(mv, 0..8)).prop_map(move |(fin, moves)| {
            let finals: Vec<usize> = (0..n).filter(|&q| fin[q]).collect();
            let delta: Vec<(usize, u8, u8, Vec<(usize, i8, i8)>)> = moves
                .into_iter()
                .filter(|&(_, c1, c2, _, r1, r2)| (c1 == 1 || r1 >= 0) && (c2 == 1 || r2 >= 0))
                .map(|(q, c1, c2, t, r1, r2)| (q, c1, c2, vec![(t, r1, r2)]))
                .collect();
            TwoCounterAutomaton::new(n, finals, delta).unwrap()
        })
    })
}

fn assignment(vars: &[&str], vals: &[u64]) -> BTreeMap<String, u64> {
    vars.iter().zip(vals).map(|(v, x)| (v.to_string(), *x)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn substitution_is_a_homomorphism(p in symbols(), q in symbols(), imgs in prop::collection::vec("[ab]{0,3}", 3)) {
        let mut h = Substitution::new();
        for (v, w) in VARS.iter().zip(&imgs) {
            h.insert(*v, w.as_str());
        }
        let whole: Vec<Symbol> = p.iter().chain(&q).cloned().collect();
        prop_assert_eq!(h.apply_fragment(&whole).unwrap(), h.apply_fragment(&p).unwrap() + &h.apply_fragment(&q).unwrap());
    }

    #[test]
    fn morphism_variables_come_from_images(p in symbols(), pick in prop::collection::vec(0..3usize, 3)) {
        let p = Pattern::new(p, &ab()).unwrap();
        let images = [vec![Symbol::var("y")], vec![Symbol::Term('a')], vec![Symbol::var("y"), Symbol::var("z")]];
        let mut m = SymbolMorphism::new(VarDefault::Undefined);
        for (v, k) in VARS.iter().zip(&pick) {
            m.set(Symbol::var(*v), images[*k].clone());
        }
        let out = apply_symbol_morphism(&m, &p);
        let mut expected = BTreeSet::new();
        for v in p.vars() {
            let k = pick[VARS.iter().position(|x| *x == v).unwrap()];
            expected.extend(images[k].iter().filter_map(|s| s.as_var().map(str::to_owned)));
        }
        match out {
            Ok(img) => prop_assert_eq!(img.vars(), expected),
            // Every symbol may have been erased.
            Err(_) => prop_assert!(p.symbols().iter().all(|s| s.as_var().is_some())),
        }
    }

    #[test]
    fn erasing_conversion_keeps_the_language(cp in constrained()) {
        let ne = cp.with_mode(Mode::NE);
        let e = to_erasing_equivalent(&ne);
        prop_assert_eq!(e.mode(), Mode::E);
        prop_assert!(bounded_equivalence(&ne, &e, 9).unwrap().holds());
    }

    #[test]
    fn terminal_free_conversion_keeps_the_language(cp in constrained()) {
        let tf = to_terminal_free(&cp);
        prop_assert!(tf.pattern().is_terminal_free());
        prop_assert!(bounded_equivalence(&cp, &tf, 8).unwrap().holds());
    }

    #[test]
    fn normal_form_agrees_with_the_tree(f in formula(vec!["x1".into(), "x2".into(), "x3".into(), "x4".into()])) {
        let dnf = to_dnf(&f, 1 << 12).unwrap();
        let back = from_dnf(&dnf);
        let vars = ["x1", "x2", "x3", "x4"];
        for n in 0..5u64.pow(4) {
            let vals = [n % 5, n / 5 % 5, n / 25 % 5, n / 125];
            let a = assignment(&vars, &vals);
            prop_assert_eq!(evaluate(&back, &a).unwrap(), evaluate(&f, &a).unwrap());
        }
    }

    #[test]
    fn feasible_stream_satisfies_and_grows(f in formula(vec!["x1".into(), "x2".into(), "x3".into()]), b in 0u64..4) {
        let vars: BTreeSet<String> = VARS.iter().map(|v| v.to_string()).collect();
        let small: Vec<BTreeMap<String, u64>> = feasible_assignments_bounded(&f, &vars, b, &[]).collect();
        let large: BTreeSet<BTreeMap<String, u64>> = feasible_assignments_bounded(&f, &vars, b + 1, &[]).collect();
        for a in &small {
            prop_assert!(evaluate(&f, a).unwrap());
            prop_assert!(large.contains(a));
        }
        let mut sorted = small.clone();
        sorted.sort();
        prop_assert_eq!(sorted, small);
    }

    #[test]
    fn compiled_regex_agrees_with_backtracking(r in regex_text()) {
        let b = Alphabet::binary();
        let fa = FiniteAutomaton::compile(&Regex::parse(&r).unwrap(), &b).unwrap();
        let oracle = NaiveRegex::new(&r);
        let dfa = fa.determinize();
        let twice = fa.complement().complement();
        for w in words_upto(&['0', '#'], 10) {
            let expected = oracle.is_match(&w);
            prop_assert_eq!(fa.accepts(&w), expected, "{} on {}", r, w);
            prop_assert_eq!(dfa.accepts(&w), expected);
            if w.len() <= 8 {
                prop_assert_eq!(twice.accepts(&w), expected);
            }
        }
    }

    #[test]
    fn matcher_is_sound_and_complete(cp in constrained()) {
        let oracle = language_by_substitutions(&cp, 6);
        for w in words_upto(&['a', 'b'], 6) {
            let got = membership(&w, &cp);
            prop_assert_eq!(got.is_some(), oracle.contains(&w), "{}", w);
            if let Some(c) = got {
                prop_assert!(verify_certificate(&w, &cp, &c.substitution));
                let e = membership(&w, &cp.with_mode(Mode::E));
                prop_assert!(e.is_some());
            }
        }
    }

    #[test]
    fn single_pair_query_is_membership(cp in constrained(), w in "[ab]{0,6}") {
        let q = ConjunctiveQuery::new(
            vec![(cp.pattern().clone(), w.clone())],
            cp.length().clone(),
            cp.regular().clone(),
            cp.mode(),
        ).unwrap();
        prop_assert_eq!(conjunctive_membership(&q).is_some(), membership(&w, &cp).is_some());
    }

    #[test]
    fn enumeration_and_verdicts(a in constrained(), b in constrained()) {
        let n = 6;
        let la: BTreeSet<String> = enumerate_language(&a, n).into_iter().collect();
        let lb: BTreeSet<String> = enumerate_language(&b, n).into_iter().collect();
        let filtered: BTreeSet<String> = words_upto(&['a', 'b'], n).into_iter().filter(|w| membership(w, &a).is_some()).collect();
        prop_assert_eq!(&la, &filtered);
        let eq = bounded_equivalence(&a, &b, n).unwrap();
        prop_assert_eq!(eq.holds(), la == lb);
        let both = bounded_inclusion(&a, &b, n).unwrap().holds() && bounded_inclusion(&b, &a, n).unwrap().holds();
        prop_assert_eq!(both, eq.holds());
        if let BoundedVerdict::Counterexample { word, side } = eq {
            let (in_a, in_b) = (membership(&word, &a).is_some(), membership(&word, &b).is_some());
            prop_assert!(in_a != in_b);
            prop_assert_eq!(in_a, side == Side::A);
        }
    }

    #[test]
    fn computations_round_trip_and_check(a in automaton()) {
        let p = EncodingParams::default();
        let comps = bounded_accepting_computations(&a, 4, 2);
        for c in &comps {
            prop_assert!(is_accepting_computation(&a, c));
            prop_assert_eq!(&decode_computation(p, &encode_computation(p, c)).unwrap(), c);
            for cfg in c {
                prop_assert!(step(&a, *cfg).iter().all(|n| n.m1 <= cfg.m1 + 1 && n.m2 <= cfg.m2 + 1));
            }
        }
        for w in valc_bounded(&a, p, 4, 2) {
            prop_assert!(is_good_structure(&w));
        }
        // The checker accepts exactly the searched computations.
        let mut paths = vec![vec![Configuration::initial()]];
        let mut all = Vec::new();
        while let Some(path) = paths.pop() {
            all.push(path.clone());
            if path.len() < 4 {
                for s in 0..a.states() {
                    for m1 in 0..=2 {
                        for m2 in 0..=2 {
                            let mut next = path.clone();
                            next.push(Configuration::new(s, m1, m2));
                            paths.push(next);
                        }
                    }
                }
            }
        }
        let accepted: BTreeSet<Vec<Configuration>> = all.into_iter().filter(|c| is_accepting_computation(&a, c)).collect();
        let searched: BTreeSet<Vec<Configuration>> = comps.into_iter().collect();
        prop_assert_eq!(accepted, searched);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tester_pairs_have_disjoint_namespaces(a in automaton()) {
        prop_assert!(build_appd(&a).unwrap().namespaces_disjoint());
    }

    #[test]
    fn satisfied_predicate_reproduces_the_generator_word(a in automaton(), u in "[0#]{1,12}") {
        let pair = build_appd(&a).unwrap();
        let h = Substitution::new().with("a1", u.as_str());
        if let Some((i, tau)) = first_satisfied(&pair, &h).unwrap() {
            let hp = assemble_right(&pair, i, &h, &tau).unwrap();
            let w = h.apply(pair.left.pattern()).unwrap();
            prop_assert!(verify_certificate(&w, &pair.right, &hp));
            prop_assert!(predicate_satisfied(&pair, i, &h).unwrap().is_some());
        }
    }
}
