//! Named verification suites. Each suite runs bounded checks of one engine or
//! construction against an independent oracle and reports one entry per
//! property, with counterexample payloads on failure.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::automata::{
    bounded_accepting_computations, decode_computation, encode_computation, is_accepting_computation,
    is_good_structure, step, valc_bounded, Configuration, EncodingParams, TwoCounterAutomaton,
};
use crate::constraints::{evaluate, feasible_assignments_bounded, Formula, LinearInequality, Rel};
use crate::error::{Error, Result};
use crate::langops::{all_words, bounded_equivalence};
use crate::matcher::{membership, verify_certificate};
use crate::pattern::{
    to_erasing_equivalent, to_terminal_free, Alphabet, ConstrainedPattern, Mode, Pattern, Substitution, Symbol,
};
use crate::reductions::{
    assemble_right, assignment_certificate, build_3sat, build_appb, build_appd, build_subsetsum, first_satisfied,
    predicate_satisfied, toy_predicate, witness_counterexample, Clause, ConstructionPair, PredicateInfo,
};
use crate::regular::{Dfa, RegularConstraint, RegularConstraintMap, RegularSource};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: &str) -> Self {
        Report { suite: suite.to_owned(), checks: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: Value) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> =
            self.checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail })).collect();
        json!({ "suite": self.suite, "passed": self.passed(), "checks": checks })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Example1,
    MatcherOracle,
    Conversions,
    Regular,
    AppB,
    AppD,
    AppE,
    SubsetSum,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Example1,
        Suite::MatcherOracle,
        Suite::Conversions,
        Suite::Regular,
        Suite::AppB,
        Suite::AppD,
        Suite::AppE,
        Suite::SubsetSum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Example1 => "example1",
            Suite::MatcherOracle => "matcher-oracle",
            Suite::Conversions => "conversions",
            Suite::Regular => "regular",
            Suite::AppB => "appB",
            Suite::AppD => "appD",
            Suite::AppE => "appE",
            Suite::SubsetSum => "subsetsum",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Instance(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub seed: u64,
    pub threads: usize,
    /// Boolean variables of the exhaustive 3SAT sweep.
    pub max_vars: usize,
    /// Word bound of the matcher oracle.
    pub max_word: usize,
    /// Sampled substitutions per property.
    pub samples: usize,
    /// Random patterns of the matcher oracle.
    pub patterns: usize,
    /// Random patterns per conversion.
    pub conversions: usize,
    /// Configurations per computation in the App D sweeps.
    pub max_steps: usize,
    pub max_counter: u64,
    /// Mutated encodings in the App D sweep.
    pub mutations: usize,
    pub automata: Vec<(String, TwoCounterAutomaton)>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            seed: 0,
            threads: 1,
            max_vars: 3,
            max_word: 7,
            samples: 100,
            patterns: 200,
            conversions: 20,
            max_steps: 4,
            max_counter: 2,
            mutations: 250,
            automata: default_automata(),
        }
    }
}

/// One automaton without final states, one that accepts after a single step,
/// and one that counts up and back down before accepting.
pub fn default_automata() -> Vec<(String, TwoCounterAutomaton)> {
    let auto = |s, f: Vec<usize>, d: Vec<(usize, u8, u8, Vec<(usize, i8, i8)>)>| {
        TwoCounterAutomaton::new(s, f, d).expect("fixed automaton")
    };
    vec![
        ("no-finals".to_owned(), auto(1, vec![], vec![])),
        ("one-step".to_owned(), auto(2, vec![1], vec![(0, 0, 0, vec![(1, 1, 0)])])),
        (
            "counting".to_owned(),
            auto(2, vec![1], vec![(0, 0, 0, vec![(0, 1, 0)]), (0, 1, 0, vec![(1, -1, 0), (0, 1, 0)])]),
        ),
    ]
}

pub fn run(suite: Suite, params: &SuiteParams) -> Result<Report> {
    match suite {
        Suite::Example1 => example1(),
        Suite::MatcherOracle => matcher_oracle(params),
        Suite::Conversions => conversions(params),
        Suite::Regular => regular(),
        Suite::AppB => appb(params),
        Suite::AppD => appd(params),
        Suite::AppE => appe(params),
        Suite::SubsetSum => subsetsum(params),
    }
}

/// Maps `f` over `items` on up to `threads` scoped threads, keeping order.
fn par_map<T: Sync, R: Send>(threads: usize, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if threads <= 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> =
            items.chunks(chunk).map(|c| s.spawn(move || c.iter().map(f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread")).collect()
    })
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

fn random_word(rng: &mut ChaCha8Rng, ab: &Alphabet, len: usize) -> String {
    (0..len).map(|_| *ab.letters().choose(rng).expect("nonempty alphabet")).collect()
}

// ---------------------------------------------------------------------------

pub fn example1_pattern() -> ConstrainedPattern {
    let ab = Alphabet::parse("ab").expect("letters");
    let p = Pattern::parse("x1 a x2 a x1", &ab).expect("pattern");
    let f = Formula::parse("2*x1 + x2 <= 5 and x2 >= 1").expect("formula");
    ConstrainedPattern::new(p, f, RegularConstraintMap::new(), Mode::E).expect("constrained pattern")
}

fn example1() -> Result<Report> {
    let t = Instant::now();
    let cp = example1_pattern();
    let mut rep = Report::new("example1");
    for (w, expected) in [("bbababb", true), ("bababab", true), ("aa", false), ("bbaaaabb", false)] {
        let got = membership(w, &cp);
        let ok = got.is_some() == expected && got.as_ref().is_none_or(|c| verify_certificate(w, &cp, &c.substitution));
        let cert = got.map(|c| crate::json::substitution_to_json(&c.substitution));
        rep.push(format!("membership {w}"), ok, json!({ "expected": expected, "certificate": cert }));
    }
    let ms = elapsed_ms(t);
    rep.push("runtime under 1 s", ms < 1000, json!({ "ms": ms }));
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// Random formula over `vars` with up to `max_ineq` inequalities.
fn random_formula(rng: &mut ChaCha8Rng, vars: &[String], max_ineq: usize) -> Formula {
    if vars.is_empty() {
        return Formula::truth();
    }
    let k = rng.gen_range(0..=max_ineq);
    let mut leaves = Vec::new();
    for _ in 0..k {
        let n = rng.gen_range(1..=vars.len().min(2));
        let chosen: Vec<&String> = vars.choose_multiple(rng, n).collect();
        let terms: Vec<(i64, &str)> =
            chosen.iter().map(|v| (*[-2i64, -1, 1, 2, 3].choose(rng).unwrap(), v.as_str())).collect();
        let rel = *[Rel::Le, Rel::Ge, Rel::Eq].choose(rng).unwrap();
        let c = rng.gen_range(0..=6);
        leaves.push(Formula::leaf(LinearInequality::from_terms(&terms, rel, c).expect("distinct variables")));
    }
    match leaves.len() {
        0 => Formula::truth(),
        1 => leaves.pop().unwrap(),
        2 => {
            if rng.gen_bool(0.5) {
                Formula::and(leaves)
            } else {
                Formula::or(leaves)
            }
        }
        _ => {
            let first = leaves.remove(0);
            let rest = if rng.gen_bool(0.5) { Formula::or(leaves) } else { Formula::and(leaves) };
            if rng.gen_bool(0.5) {
                Formula::and(vec![first, rest])
            } else {
                Formula::or(vec![first, rest])
            }
        }
    }
}

fn random_symbols(rng: &mut ChaCha8Rng, ab: &Alphabet, max_syms: usize, max_vars: usize) -> Vec<Symbol> {
    let n = rng.gen_range(1..=max_syms);
    let nv = rng.gen_range(1..=max_vars);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.35) {
                Symbol::Term(*ab.letters().choose(rng).unwrap())
            } else {
                Symbol::Var(format!("x{}", rng.gen_range(1..=nv)))
            }
        })
        .collect()
}

fn random_regular(rng: &mut ChaCha8Rng, vars: &[String], ab: &Alphabet) -> RegularConstraintMap {
    let pool = || {
        vec![
            RegularSource::regex("a*"),
            RegularSource::regex("b(a|b)*"),
            RegularSource::regex("(ab)*"),
            RegularSource::words(["", "a", "bb"]),
            RegularSource::complement(RegularSource::regex("a*")),
        ]
    };
    let mut m = RegularConstraintMap::new();
    for v in vars {
        if rng.gen_bool(0.3) {
            let s = pool().choose(rng).unwrap().clone();
            m.insert(v.clone(), RegularConstraint::new(s, ab).expect("pool languages use a and b"));
        }
    }
    m
}

fn random_constrained(
    rng: &mut ChaCha8Rng,
    ab: &Alphabet,
    max_syms: usize,
    max_vars: usize,
    max_ineq: usize,
    with_regular: bool,
) -> ConstrainedPattern {
    let syms = random_symbols(rng, ab, max_syms, max_vars);
    let p = Pattern::new(syms, ab).expect("nonempty");
    let vars: Vec<String> = p.vars().into_iter().collect();
    let f = random_formula(rng, &vars, max_ineq);
    let reg = if with_regular { random_regular(rng, &vars, ab) } else { RegularConstraintMap::new() };
    let mode = if rng.gen_bool(0.5) { Mode::E } else { Mode::NE };
    ConstrainedPattern::new(p, f, reg, mode).expect("constraint variables come from the pattern")
}

/// The language up to `max_len` by enumerating every substitution whose
/// images fit, independent of the matcher.
pub fn brute_force_language(cp: &ConstrainedPattern, max_len: usize) -> BTreeSet<String> {
    let p = cp.pattern();
    let ab = cp.alphabet();
    let occ: Vec<(String, usize)> = p.occurrences().into_iter().collect();
    let terms = p.terminal_count();
    let mut out = BTreeSet::new();
    if terms > max_len {
        return out;
    }
    let min = cp.mode().min_len() as usize;
    let mut lens = vec![0usize; occ.len()];
    fn rec(
        k: usize,
        budget: usize,
        min: usize,
        occ: &[(String, usize)],
        lens: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if k == occ.len() {
            f(lens);
            return;
        }
        let mut l = min;
        while l * occ[k].1 <= budget {
            lens[k] = l;
            rec(k + 1, budget - l * occ[k].1, min, occ, lens, f);
            l += 1;
        }
    }
    let mut visit = |lens: &[usize]| {
        let a: BTreeMap<String, u64> = occ.iter().zip(lens).map(|((v, _), &l)| (v.clone(), l as u64)).collect();
        if !evaluate(cp.length(), &a).unwrap_or(false) {
            return;
        }
        let choices: Vec<Vec<String>> = occ
            .iter()
            .zip(lens)
            .map(|((v, _), &l)| {
                all_words(ab, l)
                    .into_iter()
                    .filter(|w| w.chars().count() == l && cp.regular().accepts(v, w, ab))
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; occ.len()];
        if choices.iter().any(Vec::is_empty) {
            return;
        }
        loop {
            let h: Substitution =
                occ.iter().zip(&idx).enumerate().map(|(k, ((v, _), &i))| (v.clone(), choices[k][i].clone())).collect();
            out.insert(h.apply(p).expect("all variables bound"));
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    };
    rec(0, max_len - terms, min, &occ, &mut lens, &mut visit);
    out
}

fn matcher_oracle(params: &SuiteParams) -> Result<Report> {
    let t = Instant::now();
    let ab = Alphabet::parse("ab")?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let patterns: Vec<ConstrainedPattern> =
        (0..params.patterns).map(|_| random_constrained(&mut rng, &ab, 6, params.max_vars.max(1), 3, false)).collect();
    let words = all_words(&ab, params.max_word);
    let results = par_map(params.threads, &patterns, |cp| {
        let lang = brute_force_language(cp, params.max_word);
        let mut bad = Vec::new();
        for w in &words {
            let got = membership(w, cp);
            let ok = match &got {
                Some(c) => lang.contains(w) && verify_certificate(w, cp, &c.substitution),
                None => !lang.contains(w),
            };
            if !ok {
                bad.push(json!({ "pattern": crate::json::constrained_to_json(cp), "word": w, "oracle": lang.contains(w) }));
            }
        }
        bad
    });
    let disagreements: Vec<Value> = results.into_iter().flatten().collect();
    let mut rep = Report::new("matcher-oracle");
    rep.push(
        "membership agrees with substitution enumeration",
        disagreements.is_empty(),
        json!({
            "patterns": params.patterns,
            "words_per_pattern": words.len(),
            "disagreements": disagreements.len(),
            "first": disagreements.into_iter().take(5).collect::<Vec<_>>(),
        }),
    );
    let ms = elapsed_ms(t);
    rep.push("runtime under 5 min", ms < 300_000, json!({ "ms": ms }));
    Ok(rep)
}

// ---------------------------------------------------------------------------

fn conversions(params: &SuiteParams) -> Result<Report> {
    let ab = Alphabet::parse("ab")?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rep = Report::new("conversions");
    let bound = 8;

    let mut failures = Vec::new();
    for _ in 0..params.conversions {
        let cp = random_constrained(&mut rng, &ab, 5, 3, 2, true).with_mode(Mode::NE);
        let e = to_erasing_equivalent(&cp);
        let v = bounded_equivalence(&cp, &e, bound)?;
        if e.mode() != Mode::E || !v.holds() {
            failures.push(json!({ "pattern": crate::json::constrained_to_json(&cp), "verdict": crate::json::verdict_to_json(&v) }));
        }
    }
    rep.push(
        "erasing equivalent has the same language",
        failures.is_empty(),
        json!({ "patterns": params.conversions, "bound": bound, "failures": failures }),
    );

    let mut failures = Vec::new();
    let mut made = 0;
    while made < params.conversions {
        let cp = random_constrained(&mut rng, &ab, 5, 3, 2, true);
        if cp.pattern().is_terminal_free() {
            continue;
        }
        made += 1;
        let tf = to_terminal_free(&cp);
        let v = bounded_equivalence(&cp, &tf, bound)?;
        if !tf.pattern().is_terminal_free() || !v.holds() {
            failures.push(json!({ "pattern": crate::json::constrained_to_json(&cp), "verdict": crate::json::verdict_to_json(&v) }));
        }
    }
    rep.push(
        "terminal-free conversion has the same language",
        failures.is_empty(),
        json!({ "patterns": params.conversions, "bound": bound, "failures": failures }),
    );
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// `(##0⁺#0⁺#0⁺)⁺##` by splitting on `##`.
fn good_structure_oracle(w: &str) -> bool {
    let Some(inner) = w.strip_prefix("##").and_then(|r| r.strip_suffix("##")) else {
        return false;
    };
    !inner.is_empty()
        && inner.split("##").all(|block| {
            let parts: Vec<&str> = block.split('#').collect();
            parts.len() == 3 && parts.iter().all(|p| !p.is_empty() && p.chars().all(|c| c == '0'))
        })
}

/// Words that do not start with the initial block followed by good structure.
fn bad_start_oracle(w: &str) -> bool {
    match w.strip_prefix("##0#0#0") {
        Some(rest) => !(rest == "##" || good_structure_oracle(rest)),
        None => true,
    }
}

fn regular() -> Result<Report> {
    let ab = Alphabet::binary();
    let lg = RegularConstraint::regex("(##0+#0+#0+)+##", &ab)?;
    let lgs = RegularConstraint::new(RegularSource::complement(RegularSource::regex("##0#0#0(##0+#0+#0+)*##")), &ab)?;
    let words = all_words(&ab, 10);
    let mut rep = Report::new("regular");
    for (name, c, oracle) in [
        ("good structure automaton", &lg, good_structure_oracle as fn(&str) -> bool),
        ("bad start automaton", &lgs, bad_start_oracle),
    ] {
        let bad: Vec<&String> = words.iter().filter(|w| c.accepts(w) != oracle(w)).collect();
        let members = words.iter().filter(|w| oracle(w)).count();
        rep.push(
            name,
            bad.is_empty(),
            json!({ "words": words.len(), "members": members, "disagreements": bad.iter().take(5).collect::<Vec<_>>() }),
        );
    }
    let bad: Vec<&String> = words.iter().filter(|w| is_good_structure(w) != good_structure_oracle(w)).collect();
    rep.push("good structure test", bad.is_empty(), json!({ "disagreements": bad.iter().take(5).collect::<Vec<_>>() }));
    Ok(rep)
}

// ---------------------------------------------------------------------------

fn appb(params: &SuiteParams) -> Result<Report> {
    let ab = Alphabet::binary();
    let a = TwoCounterAutomaton::new(2, [1], [(0, 0, 0, vec![(1, 1, 0)])])?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rep = Report::new("appB");
    for (label, preds) in [("mu=0", vec![]), ("mu=1", vec![toy_predicate(&ab)?])] {
        let pair = build_appb(&a, &preds, &ab)?;
        let f = pair.right.length();
        let assignments: Vec<BTreeMap<String, u64>> = feasible_assignments_bounded(f, &f.vars(), 5, &[]).collect();

        // Exactly one block is selected: its x has length 5, its z-variables 1.
        let mut bad = Vec::new();
        for a in &assignments {
            let fives: Vec<&String> = a.iter().filter(|(k, v)| k.ends_with(".x") && **v == 5).map(|(k, _)| k).collect();
            let ok = fives.len() == 1 && {
                let block = fives[0].trim_end_matches('x');
                a.iter().all(|(k, v)| {
                    let expected = if k.starts_with(block) { if k.ends_with(".x") { 5 } else { 1 } } else { 0 };
                    *v == expected
                })
            };
            if !ok {
                bad.push(json!(a));
            }
        }
        rep.push(
            format!("{label}: valid length assignments select one block"),
            bad.is_empty() && assignments.len() == pair.predicates.len(),
            json!({ "assignments": assignments.len(), "predicates": pair.predicates.len(), "failures": bad }),
        );

        // Tester words lie in the generator language.
        let mut bad = Vec::new();
        for _ in 0..params.samples {
            let chosen = assignments.choose(&mut rng).expect("at least one assignment");
            let mut h = Substitution::new();
            for v in pair.right.vars() {
                let len = match chosen.get(&v) {
                    Some(&l) => l as usize,
                    None => rng.gen_range(0..=3),
                };
                h.insert(v, random_word(&mut rng, &ab, len));
            }
            let w = h.apply(pair.right.pattern())?;
            if !verify_certificate(&w, &pair.right, &h) || membership(&w, &pair.left).is_none() {
                bad.push(json!({ "word": w, "substitution": crate::json::substitution_to_json(&h) }));
            }
        }
        rep.push(
            format!("{label}: tester language inside generator language"),
            bad.is_empty(),
            json!({ "samples": params.samples, "failures": bad }),
        );

        // The collision predicate holds iff h(z) = h(z').
        let coll = pair
            .predicates
            .iter()
            .find(|p| p.family == "collision")
            .expect("binary builds have one collision predicate")
            .index;
        let mut bad = Vec::new();
        let mut checked = 0;
        for _ in 0..params.samples.div_ceil(4) {
            let base = generator_sample(&mut rng, &ab);
            for (z, zp) in [("0", "0"), ("0", "#"), ("#", "0"), ("#", "#")] {
                let h = base.clone().with("z", z).with("zp", zp);
                checked += 1;
                if predicate_satisfied(&pair, coll, &h)?.is_some() != (z == zp) {
                    bad.push(crate::json::substitution_to_json(&h));
                }
            }
        }
        rep.push(
            format!("{label}: collision predicate holds iff h(z) = h(z')"),
            bad.is_empty(),
            json!({ "checked": checked, "failures": bad }),
        );

        // With h(z) = h(z') the generator word is a tester word.
        let mut bad = Vec::new();
        for _ in 0..params.samples {
            let c = random_word(&mut rng, &ab, 1);
            let h = generator_sample(&mut rng, &ab).with("z", c.clone()).with("zp", c);
            let w = h.apply(pair.left.pattern())?;
            if membership(&w, &pair.right).is_none() {
                bad.push(json!({ "word": w }));
            }
        }
        rep.push(
            format!("{label}: equal z images give tester words"),
            bad.is_empty(),
            json!({ "samples": params.samples, "failures": bad }),
        );
    }
    Ok(rep)
}

/// Generator images with short `α_1`, `α_2`, `y_1`, `y_2` and a random `x_v`
/// of length 5.
fn generator_sample(rng: &mut ChaCha8Rng, ab: &Alphabet) -> Substitution {
    let mut h = Substitution::new();
    for v in ["a1", "a2", "y1", "y2"] {
        let l = rng.gen_range(0..=3);
        h.insert(v, random_word(rng, ab, l));
    }
    h.insert("xv", random_word(rng, ab, 5));
    h
}

// ---------------------------------------------------------------------------

const MUTATION_CLASSES: [&str; 5] =
    ["bad-structure", "wrong-init", "non-final-end", "counter-jump", "invalid-transition"];

/// Computations from the initial configuration with at most `max_len`
/// configurations and counters at most `max_counter`.
fn reachable_paths(a: &TwoCounterAutomaton, max_len: usize, max_counter: u64) -> Vec<Vec<Configuration>> {
    let mut out = vec![vec![Configuration::initial()]];
    let mut frontier = out.clone();
    for _ in 1..max_len {
        let mut next = Vec::new();
        for p in &frontier {
            for c in step(a, *p.last().unwrap()) {
                if c.m1 <= max_counter && c.m2 <= max_counter {
                    let mut q = p.clone();
                    q.push(c);
                    next.push(q);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn flag(m: u64) -> u8 {
    u8::from(m > 0)
}

fn mutate(
    class: &str,
    a: &TwoCounterAutomaton,
    paths: &[Vec<Configuration>],
    rng: &mut ChaCha8Rng,
) -> Option<String> {
    let p = EncodingParams::default();
    let mut path = paths.choose(rng)?.clone();
    match class {
        "bad-structure" => {
            let mut w: Vec<char> = encode_computation(p, &path).chars().collect();
            for _ in 0..rng.gen_range(1..=3) {
                let i = rng.gen_range(0..w.len());
                match rng.gen_range(0..4) {
                    0 => w[i] = if w[i] == '0' { '#' } else { '0' },
                    1 if w.len() > 1 => {
                        w.remove(i);
                    }
                    2 => w.insert(i, if rng.gen_bool(0.5) { '0' } else { '#' }),
                    _ => w.truncate(i.max(1)),
                }
            }
            let w: String = w.into_iter().collect();
            (!is_good_structure(&w)).then_some(w)
        }
        "wrong-init" => {
            let c = Configuration::new(rng.gen_range(0..=a.states()), rng.gen_range(0..=2), rng.gen_range(0..=2));
            if c == Configuration::initial() {
                return None;
            }
            path[0] = c;
            Some(encode_computation(p, &path))
        }
        "non-final-end" => {
            let open: Vec<&Vec<Configuration>> =
                paths.iter().filter(|q| !a.is_final(q.last().unwrap().state)).collect();
            open.choose(rng).map(|q| encode_computation(p, q))
        }
        "counter-jump" => {
            let last = *path.last().unwrap();
            let d = rng.gen_range(2..=3u64);
            let up = rng.gen_bool(0.5);
            let second = rng.gen_bool(0.5);
            let m = if second { last.m2 } else { last.m1 };
            let m2 = if up {
                m + d
            } else if m >= d {
                m - d
            } else {
                return None;
            };
            let q = rng.gen_range(0..a.states());
            let c = if second { Configuration::new(q, last.m1, m2) } else { Configuration::new(q, m2, last.m2) };
            path.push(c);
            random_tail(a, &mut path, rng);
            Some(encode_computation(p, &path))
        }
        "invalid-transition" => {
            let last = *path.last().unwrap();
            let (c1, c2) = (flag(last.m1), flag(last.m2));
            let mut options = Vec::new();
            for q in 0..a.states() {
                for r1 in -1..=1i8 {
                    for r2 in -1..=1i8 {
                        if (last.m1 == 0 && r1 < 0) || (last.m2 == 0 && r2 < 0) {
                            continue;
                        }
                        if !a.has_move(last.state, c1, c2, (q, r1, r2)) {
                            let n1 = (last.m1 as i64 + r1 as i64) as u64;
                            let n2 = (last.m2 as i64 + r2 as i64) as u64;
                            options.push(Configuration::new(q, n1, n2));
                        }
                    }
                }
            }
            path.push(*options.choose(rng)?);
            random_tail(a, &mut path, rng);
            Some(encode_computation(p, &path))
        }
        _ => None,
    }
}

/// Appends up to two arbitrary configurations after a defect.
fn random_tail(a: &TwoCounterAutomaton, path: &mut Vec<Configuration>, rng: &mut ChaCha8Rng) {
    for _ in 0..rng.gen_range(0..=2) {
        path.push(Configuration::new(rng.gen_range(0..a.states()), rng.gen_range(0..=2), rng.gen_range(0..=2)));
    }
}

fn is_valc(a: &TwoCounterAutomaton, w: &str) -> bool {
    decode_computation(EncodingParams::default(), w).is_ok_and(|c| is_accepting_computation(a, &c))
}

/// Samples images for the variables of predicate `p` that satisfy its regular
/// and length constraints. Lengths are drawn from the few shortest accepted
/// lengths of each variable and rejected until the length condition holds.
fn sample_predicate(p: &PredicateInfo, ab: &Alphabet, rng: &mut ChaCha8Rng) -> Option<Substitution> {
    const CAP: usize = 48;
    let vars: Vec<String> = p.gamma.vars().into_iter().collect();
    let langs: Vec<Option<(std::sync::Arc<Dfa>, Vec<Vec<u128>>, Vec<usize>)>> = vars
        .iter()
        .map(|v| {
            p.regular.get(v).map(|c| {
                let d = c.dfa();
                let counts = d.completion_counts(CAP);
                let lens: Vec<usize> = d
                    .accepted_lengths(CAP)
                    .into_iter()
                    .enumerate()
                    .filter(|&(l, ok)| ok && l >= 1)
                    .map(|(l, _)| l)
                    .take(6)
                    .collect();
                (d, counts, lens)
            })
        })
        .collect();
    for _ in 0..500 {
        let mut lens = BTreeMap::new();
        for (v, lang) in vars.iter().zip(&langs) {
            let l = match lang {
                Some((_, _, ls)) => *ls.choose(rng)?,
                None => rng.gen_range(1..=3),
            };
            lens.insert(v.clone(), l as u64);
        }
        if !evaluate(&p.local, &lens).unwrap_or(false) {
            continue;
        }
        let mut h = Substitution::new();
        for (v, lang) in vars.iter().zip(&langs) {
            let l = lens[v] as usize;
            let w = match lang {
                Some((d, counts, _)) => ab.decode(&sample_dfa_word(d, counts, l, rng)),
                None => random_word(rng, ab, l),
            };
            h.insert(v.clone(), w);
        }
        return Some(h);
    }
    None
}

/// A uniformly random accepted word of length `l`.
fn sample_dfa_word(d: &Dfa, counts: &[Vec<u128>], l: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut s = d.start();
    let mut out = Vec::with_capacity(l);
    for rem in (1..=l).rev() {
        let total = counts[rem][s as usize];
        let mut r = rng.gen_range(0..total);
        for a in 0..d.letters() as u8 {
            let c = counts[rem - 1][d.step(s, a) as usize];
            if r < c {
                out.push(a);
                s = d.step(s, a);
                break;
            }
            r -= c;
        }
    }
    out
}

fn appd(params: &SuiteParams) -> Result<Report> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rep = Report::new("appD");
    let enc = EncodingParams::default();
    let builds: Vec<(String, TwoCounterAutomaton, ConstructionPair)> = params
        .automata
        .iter()
        .map(|(n, a)| Ok((n.clone(), a.clone(), build_appd(a)?)))
        .collect::<Result<_>>()?;

    // (a) tester words lie in the generator language.
    for (name, _, pair) in &builds {
        let ab = pair.alphabet().clone();
        let mut bad = Vec::new();
        let mut per_family: BTreeMap<String, usize> = BTreeMap::new();
        let mut drawn = 0;
        let mut attempts = 0;
        while drawn < params.samples && attempts < params.samples * 20 {
            attempts += 1;
            let p = pair.predicates.choose(&mut rng).expect("predicates");
            let Some(tau) = sample_predicate(p, &ab, &mut rng) else { continue };
            drawn += 1;
            *per_family.entry(p.family.clone()).or_default() += 1;
            let h = assemble_right(pair, p.index, &Substitution::new(), &tau)?;
            let w = h.apply(pair.right.pattern())?;
            if !verify_certificate(&w, &pair.right, &h) || membership(&w, &pair.left).is_none() {
                bad.push(json!({ "predicate": p.index, "images": crate::json::substitution_to_json(&tau) }));
            }
        }
        rep.push(
            format!("{name}: tester language inside generator language"),
            bad.is_empty() && drawn == params.samples,
            json!({ "samples": drawn, "families": per_family, "failures": bad }),
        );
    }

    // (b) encodings of accepting computations satisfy no predicate.
    for (name, a, pair) in &builds {
        let words = valc_bounded(a, enc, params.max_steps, params.max_counter);
        let hits: Vec<Value> = par_map(params.threads, &words, |u| {
            let h = Substitution::new().with("a1", u.clone());
            first_satisfied(pair, &h).map(|r| r.map(|(i, _)| json!({ "word": u, "predicate": i })))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
        rep.push(
            format!("{name}: accepting computations are uncovered"),
            hits.is_empty(),
            json!({ "words": words.len(), "covered": hits }),
        );
    }

    // (c) mutated encodings are covered.
    let paths: Vec<Vec<Vec<Configuration>>> =
        builds.iter().map(|(_, a, _)| reachable_paths(a, params.max_steps, params.max_counter)).collect();
    let mut mutants: Vec<(usize, &'static str, String)> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut attempts = 0;
    while mutants.len() < params.mutations && attempts < params.mutations * 200 {
        let class = MUTATION_CLASSES[attempts % MUTATION_CLASSES.len()];
        let bi = attempts / MUTATION_CLASSES.len() % builds.len();
        attempts += 1;
        let a = &builds[bi].1;
        if let Some(w) = mutate(class, a, &paths[bi], &mut rng) {
            if !w.is_empty() && !is_valc(a, &w) && seen.insert((bi, w.clone())) {
                mutants.push((bi, class, w));
            }
        }
    }
    let found = par_map(params.threads, &mutants, |(bi, _, w)| {
        let pair = &builds[*bi].2;
        first_satisfied(pair, &Substitution::new().with("a1", w.clone()))
            .map(|r| r.map(|(i, _)| (i, pair.predicates[i - 1].family.clone())))
    });
    let mut log = Vec::new();
    let mut missed = Vec::new();
    let mut by_class: BTreeMap<&str, BTreeMap<String, usize>> = BTreeMap::new();
    for ((bi, class, w), r) in mutants.iter().zip(found) {
        match r? {
            Some((i, family)) => {
                *by_class.entry(class).or_default().entry(family.clone()).or_default() += 1;
                log.push(json!({ "automaton": builds[*bi].0, "class": class, "word": w, "predicate": i, "family": family }));
            }
            None => missed.push(json!({ "automaton": builds[*bi].0, "class": class, "word": w })),
        }
    }
    let classes: BTreeSet<&str> = mutants.iter().map(|(_, c, _)| *c).collect();
    rep.push(
        "mutated encodings are covered",
        missed.is_empty() && mutants.len() >= params.mutations.min(200) && classes.len() == MUTATION_CLASSES.len(),
        json!({ "mutations": mutants.len(), "families_by_class": by_class, "missed": missed, "log": log }),
    );

    // (d) the witness of an accepting computation is uncovered.
    let mut witnessed = 0;
    for (name, a, pair) in &builds {
        let comps = bounded_accepting_computations(a, 3, params.max_counter);
        match comps.first() {
            Some(comp) => {
                witnessed += 1;
                let (w, h) = witness_counterexample(pair, comp, None)?;
                let hit = first_satisfied(pair, &h)?;
                let in_left = verify_certificate(&w, &pair.left, &h);
                rep.push(
                    format!("{name}: witness is uncovered"),
                    hit.is_none() && in_left,
                    json!({ "computation": comp.iter().map(crate::json::configuration_to_json).collect::<Vec<_>>(),
                            "length": w.len(), "covered_by": hit.map(|(i, _)| i) }),
                );
            }
            None => {
                let err = witness_counterexample(pair, &[Configuration::initial()], None).is_err();
                rep.push(format!("{name}: witness needs an accepting computation"), err, json!({}));
            }
        }
    }
    rep.push("some automaton accepts within 3 steps", witnessed > 0, json!({ "automata": witnessed }));
    let ms = elapsed_ms(t);
    rep.push("runtime under 10 min", ms < 600_000, json!({ "ms": ms }));
    Ok(rep)
}

// ---------------------------------------------------------------------------

fn brute_sat(clauses: &[Clause]) -> Option<Vec<bool>> {
    let n = clauses.iter().flatten().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
    (0..1u32 << n).find_map(|mask| {
        let val: Vec<bool> = (0..n).map(|j| mask >> j & 1 == 1).collect();
        let lit = |l: i64| {
            let b = val[l.unsigned_abs() as usize - 1];
            if l > 0 {
                b
            } else {
                !b
            }
        };
        clauses.iter().all(|c| c.iter().any(|&l| lit(l))).then_some(val)
    })
}

fn check_3sat(clauses: &[Clause]) -> Result<Option<Value>> {
    let pair = build_3sat(clauses)?;
    let bound = 7 * clauses.len();
    let v = bounded_equivalence(&pair.left, &pair.right, bound)?;
    let sat = brute_sat(clauses);
    let mut ok = v.holds() == sat.is_some();
    if let Some(val) = &sat {
        let h = assignment_certificate(clauses, val)?;
        ok &= verify_certificate(&"0".repeat(bound), &pair.left, &h);
    }
    Ok((!ok).then(|| json!({ "clauses": clauses, "verdict": crate::json::verdict_to_json(&v), "sat": sat.is_some() })))
}

fn appe(params: &SuiteParams) -> Result<Report> {
    let t = Instant::now();
    let mut rep = Report::new("appE");
    let m = params.max_vars as i64;
    let lits: Vec<i64> = (-m..=m).filter(|&l| l != 0).collect();
    let mut clauses: Vec<Clause> = Vec::new();
    for &a in &lits {
        for &b in &lits {
            for &c in &lits {
                clauses.push([a, b, c]);
            }
        }
    }
    let instances: Vec<[Clause; 2]> = clauses.iter().flat_map(|&c1| clauses.iter().map(move |&c2| [c1, c2])).collect();
    let bad: Vec<Value> = par_map(params.threads, &instances, |inst| check_3sat(inst))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    rep.push(
        "two-clause instances: equivalence iff satisfiable",
        bad.is_empty(),
        json!({ "instances": instances.len(), "max_vars": params.max_vars, "failures": bad.iter().take(5).collect::<Vec<_>>() }),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let random: Vec<Vec<Clause>> = (0..50)
        .map(|_| {
            let n = rng.gen_range(2..=4);
            let atoms = rng.gen_range(1..=3);
            (0..n)
                .map(|_| {
                    let mut c = [0i64; 3];
                    for l in &mut c {
                        *l = rng.gen_range(1..=atoms) * if rng.gen_bool(0.5) { 1 } else { -1 };
                    }
                    c
                })
                .collect()
        })
        .collect();
    let bad: Vec<Value> = par_map(params.threads, &random, |inst| check_3sat(inst))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let sat = random.iter().filter(|c| brute_sat(c).is_some()).count();
    rep.push(
        "random instances: equivalence iff satisfiable",
        bad.is_empty(),
        json!({ "instances": random.len(), "satisfiable": sat, "failures": bad }),
    );
    rep.push("runtime", true, json!({ "ms": elapsed_ms(t) }));
    Ok(rep)
}

// ---------------------------------------------------------------------------

fn subset_exists(s: &[u64], t: u64) -> bool {
    (0..1u32 << s.len()).any(|mask| s.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x).sum::<u64>() == t)
}

fn subsetsum(params: &SuiteParams) -> Result<Report> {
    let t = Instant::now();
    let mut rep = Report::new("subsetsum");
    let mut instances: Vec<(Vec<u64>, u64)> = Vec::new();
    let mut lists: Vec<Vec<u64>> = vec![vec![]];
    for _ in 0..5 {
        lists = lists.iter().flat_map(|l| (1..=5).map(move |x| [l.clone(), vec![x]].concat())).collect();
        for l in &lists {
            for target in 0..=15 {
                instances.push((l.clone(), target));
            }
        }
    }
    let bad: Vec<Value> = par_map(params.threads, &instances, |(s, target)| -> Result<Option<Value>> {
        let pair = build_subsetsum(s, *target)?;
        let v = bounded_equivalence(&pair.left, &pair.right, *target as usize + s.len())?;
        let exists = subset_exists(s, *target);
        Ok((v.holds() != exists)
            .then(|| json!({ "S": s, "T": target, "verdict": crate::json::verdict_to_json(&v), "exists": exists })))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?
    .into_iter()
    .flatten()
    .collect();
    rep.push(
        "equivalence iff a subset hits the target",
        bad.is_empty(),
        json!({ "instances": instances.len(), "failures": bad.iter().take(5).collect::<Vec<_>>() }),
    );
    let ms = elapsed_ms(t);
    rep.push("runtime under 1 min", ms < 60_000, json!({ "ms": ms }));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles_on_hand_picked_words() {
        assert!(good_structure_oracle("##0#00#00##"));
        assert!(good_structure_oracle("##0#0#0##00#0#0##"));
        assert!(!good_structure_oracle("##0#0##"));
        assert!(!good_structure_oracle("##"));
        assert!(!bad_start_oracle("##0#0#0##"));
        assert!(bad_start_oracle("#0#"));
        assert!(bad_start_oracle("##00#0#0##"));
    }

    #[test]
    fn brute_force_language_of_a_small_pattern() {
        let ab = Alphabet::parse("ab").unwrap();
        let p = Pattern::parse("x a x", &ab).unwrap();
        let cp = ConstrainedPattern::plain(p, Mode::NE);
        let l: Vec<String> = brute_force_language(&cp, 3).into_iter().collect();
        assert_eq!(l, ["aaa", "bab"]);
    }

    #[test]
    fn brute_sat_examples() {
        assert!(brute_sat(&[[1, 2, 3], [-1, -2, -3]]).is_some());
        assert!(brute_sat(&[[1, 1, 1], [-1, -1, -1]]).is_none());
    }

    #[test]
    fn reachable_paths_of_counting_automaton() {
        let a = &default_automata()[2].1;
        let paths = reachable_paths(a, 3, 2);
        assert!(paths.contains(&vec![Configuration::new(0, 0, 0), Configuration::new(0, 1, 0), Configuration::new(1, 0, 0)]));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.as_str()).unwrap(), s);
        }
        assert!(Suite::parse("nope").is_err());
    }

    #[test]
    fn small_runs_pass() {
        let p = SuiteParams { patterns: 5, samples: 5, conversions: 3, ..SuiteParams::default() };
        for s in [Suite::Example1, Suite::MatcherOracle, Suite::Conversions, Suite::Regular] {
            let r = run(s, &p).unwrap();
            assert!(r.passed(), "{}", r.to_json());
        }
    }
}
