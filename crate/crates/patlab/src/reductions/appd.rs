//! Non-erasing equivalence pair with regular constraints: the generator
//! `t v 0 α1 0 v t t` and the tester `r_1 v γ_1 v r_2 … v γ_μ v r_{μ+1}`,
//! where each `γ_i` is a predicate that recognises one kind of defect in the
//! encoding `u` of a computation through the word `0u0`.

use std::collections::BTreeMap;

use super::{var, Construction, ConstructionPair, PredicateInfo};
use crate::automata::{encode_computation, Configuration, EncodingParams, TwoCounterAutomaton};
use crate::constraints::{Formula, LinearInequality};
use crate::error::{Error, Result};
use crate::pattern::{Alphabet, ConstrainedPattern, Mode, Pattern, Substitution, Symbol};
use crate::regular::{RegularConstraint, RegularConstraintMap, RegularSource};

pub const V: &str = "0###0";
const S: &str = "[0#]";
const NO3: &str = "(0|#0|##0)*(ε|#|##)";

fn z(n: usize) -> String {
    "0".repeat(n)
}

struct Row {
    family: &'static str,
    label: String,
    /// Local variable names with their languages, in first-occurrence order.
    langs: Vec<(&'static str, RegularSource)>,
    gamma: Vec<&'static str>,
    /// Conjoin `(all = 1) ∨ (all y ≥ 2)`.
    split: bool,
}

fn re(s: String) -> RegularSource {
    RegularSource::Regex(s)
}

fn words(ws: &[String]) -> RegularSource {
    RegularSource::Words(ws.to_vec())
}

fn bad_structure(states: usize) -> Row {
    let start = RegularSource::complement(re("##0#0#0(##0+#0+#0+)*##".into()));
    let out_of_range = re(format!("{S}*##{}0*#{S}*", z(states + 1)));
    let inner = RegularSource::Intersect(vec![RegularSource::Union(vec![start, out_of_range]), re(format!("{S}+"))]);
    let lang = RegularSource::Union(vec![
        words(&["0".into()]),
        RegularSource::Concat(vec![words(&["0".into()]), inner, words(&["0".into()])]),
    ]);
    Row {
        family: "bad-structure",
        label: "bad structure, wrong start or state out of range".into(),
        langs: vec![("y", lang)],
        gamma: vec!["y"],
        split: false,
    }
}

fn non_final(j: usize) -> Row {
    Row {
        family: "non-final",
        label: format!("ends in non-final q{j}"),
        langs: vec![("y", re(format!("0|0{S}*##{}#0+#0+##0", z(1 + j))))],
        gamma: vec!["y"],
        split: false,
    }
}

fn counter_jump(counter: u8, increase: bool) -> Row {
    let y1 = format!("0|0{NO3}0#");
    let (y2, y3) = match (counter, increase) {
        (1, true) => ("0|#0+##0+#00+".to_owned(), format!("0|#{NO3}0")),
        (1, false) => ("0|00+#0+##0+#".to_owned(), format!("0|#{NO3}0")),
        (_, true) => ("0|##0+#0+#00+".to_owned(), format!("0|##0|##0{NO3}0")),
        (_, false) => ("0|00+##0+#0+#".to_owned(), format!("0|##0|##0{NO3}0")),
    };
    Row {
        family: "counter-jump",
        label: format!("counter {counter} {} by more than one", if increase { "increases" } else { "decreases" }),
        langs: vec![("y1", re(y1)), ("x1", re("0+".into())), ("y2", re(y2)), ("y3", re(y3))],
        gamma: vec!["y1", "x1", "y2", "x1", "y3"],
        split: true,
    }
}

/// The factor `##0^{1+j}#C1#C2##0^{1+k}#C1'#C2'##` of an invalid step is cut
/// as `y1 | x1 y2 | x2 y3 | x1 y4 | x2 y5`, with `x1 = 0#0^t` straddling the
/// state/counter border so that both counter-1 blocks share `t` zeros.
fn invalid_step(j: usize, c1: u8, c2: u8, k: usize, r1: i8, r2: i8) -> Row {
    let rest1 = (1 - r1.min(0)) as usize;
    let rest1p = (1 + r1.max(0)) as usize;
    let x1 = if c1 == 0 {
        words(&["0".into(), "0#".into()])
    } else {
        re(format!("0|0#{}0*", z(if r1 == -1 { 0 } else { 1 })))
    };
    let x2 = if c2 == 1 { re("0+".into()) } else { words(&["0".into()]) };
    let c2 = c2 as usize;
    let tail = (c2 as i64 + r2 as i64) as usize;
    Row {
        family: "invalid-transition",
        label: format!("(q{j},{c1},{c2}) -> (q{k},{r1},{r2}) is not a transition"),
        langs: vec![
            ("y1", re(format!("0|(ε|0{S}*)0##{}", z(j)))),
            ("x1", x1),
            ("y2", words(&["0".into(), format!("{}#", z(rest1))])),
            ("x2", x2),
            ("y3", words(&["0".into(), format!("{}##{}", z(c2), z(k))])),
            ("y4", words(&["0".into(), format!("{}#", z(rest1p))])),
            ("y5", re(format!("0|{}##0(ε|{S}*0)", z(tail)))),
        ],
        gamma: vec!["y1", "x1", "y2", "x2", "y3", "x1", "y4", "x2", "y5"],
        split: true,
    }
}

fn rows(a: &TwoCounterAutomaton) -> Vec<Row> {
    let mut out = vec![bad_structure(a.states())];
    out.extend((0..a.states()).filter(|q| !a.is_final(*q)).map(non_final));
    for counter in [1, 2] {
        for increase in [true, false] {
            out.push(counter_jump(counter, increase));
        }
    }
    out.extend(a.invalid_tuples().into_iter().map(|(j, c1, c2, k, r1, r2)| invalid_step(j, c1, c2, k, r1, r2)));
    out
}

/// `ψ(r_i β̂_i … r_{μ+1})` for the block lengths `lens` (1-based `i`).
fn psi_suffix(lens: &[usize], i: usize) -> String {
    let mut w = String::from("0");
    for &l in &lens[i - 1..] {
        w.push_str(V);
        w.push_str(&z(l));
        w.push_str(V);
        w.push('0');
    }
    w
}

/// `ψ(r_1 β̂_1 … β̂_{i-1} r_i)`.
fn psi_prefix(lens: &[usize], i: usize) -> String {
    let mut w = String::new();
    for &l in &lens[..i - 1] {
        w.push('0');
        w.push_str(V);
        w.push_str(&z(l));
        w.push_str(V);
    }
    w.push('0');
    w
}

fn gamma_lens(preds: &[PredicateInfo]) -> Vec<usize> {
    preds.iter().map(|p| p.gamma.len()).collect()
}

/// The word `t = ψ(β)`.
pub fn t_word(pair: &ConstructionPair) -> String {
    psi_suffix(&gamma_lens(&pair.predicates), 1)
}

pub fn build_appd(a: &TwoCounterAutomaton) -> Result<ConstructionPair> {
    build_appd_over(a, &Alphabet::binary())
}

/// Over a larger alphabet every variable is restricted to `{0,#}*`.
pub fn build_appd_over(a: &TwoCounterAutomaton, ab: &Alphabet) -> Result<ConstructionPair> {
    if !ab.contains('0') || !ab.contains('#') {
        return Err(Error::Alphabet("the construction needs the letters 0 and #".into()));
    }
    let rows = rows(a);
    let mu = rows.len();
    let lens: Vec<usize> = rows.iter().map(|r| r.gamma.len()).collect();
    let t = psi_suffix(&lens, 1);
    let r = |i: usize| format!("r{i}");

    let mut regular = RegularConstraintMap::new();
    for i in 1..=mu + 1 {
        let mut ws = vec!["0".to_owned(), psi_suffix(&lens, i), format!("{t}{}", psi_prefix(&lens, i))];
        ws.sort();
        ws.dedup();
        regular.insert(r(i), RegularConstraint::words(ws, ab)?);
    }

    let mut beta: Vec<Symbol> = Vec::new();
    let mut predicates = Vec::new();
    let mut ones = Vec::new();
    for (n, row) in rows.into_iter().enumerate() {
        let i = n + 1;
        let name = |v: &str| format!("p{i}.{v}");
        let mut local_regular = RegularConstraintMap::new();
        for (v, lang) in row.langs.iter() {
            let c = RegularConstraint::new(lang.clone(), ab)?;
            local_regular.insert(name(v), c.clone());
            regular.insert(name(v), c);
        }
        let vars: Vec<String> = row.langs.iter().map(|(v, _)| name(v)).collect();
        let gamma = Pattern::new(row.gamma.iter().map(|v| var(name(v))).collect(), ab)?;
        beta.push(var(r(i)));
        beta.extend(super::terms(V));
        beta.extend_from_slice(gamma.symbols());
        beta.extend(super::terms(V));

        let all_one = Formula::and_leaves(vars.iter().map(|v| LinearInequality::var_eq(v, 1)).collect());
        let extra = if row.split {
            let ys = vars.iter().filter(|v| v.rsplit('.').next().is_some_and(|s| s.starts_with('y')));
            Formula::or(vec![all_one.clone(), Formula::and_leaves(ys.map(|v| LinearInequality::var_ge(v, 2)).collect())])
        } else {
            Formula::truth()
        };
        let choice = Formula::or(vars.iter().map(|v| Formula::leaf(LinearInequality::var_ge(v, 2))).collect());
        let local = Formula::and(vec![choice, extra.clone()]);
        ones.push(all_one);
        predicates.push(PredicateInfo {
            index: i,
            family: row.family.to_owned(),
            label: row.label,
            gamma,
            delta: None,
            eta: None,
            regular: local_regular,
            extra,
            local,
        });
    }
    beta.push(var(r(mu + 1)));

    let mut disjuncts = Vec::new();
    for (n, p) in predicates.iter().enumerate() {
        let i = n + 1;
        let mut rs = Vec::new();
        for k in 1..=mu + 1 {
            let val = if k == i {
                psi_suffix(&lens, i).len()
            } else if k == i + 1 {
                t.len() + psi_prefix(&lens, i + 1).len()
            } else {
                1
            };
            rs.push(LinearInequality::var_eq(&r(k), val as i64));
        }
        let mut common = vec![Formula::and_leaves(rs)];
        common.extend(ones.iter().enumerate().filter(|(k, _)| *k != n).map(|(_, f)| f.clone()));
        let common = Formula::and(common);
        let mut seen = Vec::new();
        for s in p.gamma.symbols() {
            let v = s.as_var().expect("terminal-free predicate");
            if seen.contains(&v) {
                continue;
            }
            seen.push(v);
            disjuncts.push(Formula::and(vec![
                common.clone(),
                Formula::leaf(LinearInequality::var_ge(v, 2)),
                p.extra.clone(),
            ]));
        }
    }
    let right = ConstrainedPattern::new(Pattern::new(beta, ab)?, Formula::or(disjuncts), regular, Mode::NE)?;

    let mut alpha = super::terms(&t);
    alpha.extend(super::terms(V));
    alpha.push(Symbol::Term('0'));
    alpha.push(var("a1"));
    alpha.push(Symbol::Term('0'));
    alpha.extend(super::terms(V));
    alpha.extend(super::terms(&t));
    alpha.extend(super::terms(&t));
    let mut left_regular = RegularConstraintMap::new();
    if ab.len() > 2 {
        left_regular.insert("a1", RegularConstraint::regex(&format!("{S}+"), ab)?);
    }
    let left = ConstrainedPattern::new(Pattern::new(alpha, ab)?, Formula::truth(), left_regular, Mode::NE)?;

    let distinguished: BTreeMap<String, String> = [("alpha1".to_owned(), "a1".to_owned())].into();
    Ok(ConstructionPair {
        construction: Construction::AppD,
        left,
        right,
        predicates,
        distinguished,
        fragments: BTreeMap::new(),
        automaton: Some(a.clone()),
    })
}

pub(crate) fn witness(_pair: &ConstructionPair, comp: &[Configuration]) -> Result<Substitution> {
    Ok(Substitution::new().with("a1", encode_computation(EncodingParams::default(), comp)))
}

/// `r_i` takes the part of `t` after the selected block's position, `r_{i+1}`
/// the whole `t` followed by the part before, every other block collapses to
/// its ψ-image.
pub(crate) fn assemble(pair: &ConstructionPair, i: usize, _h: &Substitution, tau: &Substitution) -> Result<Substitution> {
    let lens = gamma_lens(&pair.predicates);
    let mu = lens.len();
    let t = psi_suffix(&lens, 1);
    let mut out = Substitution::new();
    for k in 1..=mu + 1 {
        let w = if k == i {
            psi_suffix(&lens, i)
        } else if k == i + 1 {
            format!("{t}{}", psi_prefix(&lens, i + 1))
        } else {
            "0".to_owned()
        };
        out.insert(format!("r{k}"), w);
    }
    for p in &pair.predicates {
        for v in p.gamma.vars() {
            let w = if p.index == i {
                tau.get(&v).ok_or_else(|| Error::MissingImage(v.clone()))?.to_owned()
            } else {
                "0".to_owned()
            };
            out.insert(v, w);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{encode_computation, valc_bounded};
    use crate::matcher::verify_certificate;
    use crate::reductions::{assemble_right, predicate_satisfied, witness_counterexample};

    fn empty_one_state() -> TwoCounterAutomaton {
        TwoCounterAutomaton::new(1, [], []).unwrap()
    }

    fn counting() -> TwoCounterAutomaton {
        TwoCounterAutomaton::new(2, [1], [(0, 0, 0, vec![(0, 1, 0)]), (0, 1, 0, vec![(1, -1, 0), (0, 1, 0)])]).unwrap()
    }

    fn h(u: &str) -> Substitution {
        Substitution::new().with("a1", u)
    }

    fn matching(pair: &ConstructionPair, u: &str) -> Vec<usize> {
        (1..=pair.predicates.len()).filter(|&i| predicate_satisfied(pair, i, &h(u)).unwrap().is_some()).collect()
    }

    #[test]
    fn one_state_predicate_table() {
        let pair = build_appd(&empty_one_state()).unwrap();
        let fams: Vec<&str> = pair.predicates.iter().map(|p| p.family.as_str()).collect();
        assert_eq!(pair.predicates.len(), 1 + 1 + 4 + 25);
        assert_eq!(&fams[..6], ["bad-structure", "non-final", "counter-jump", "counter-jump", "counter-jump", "counter-jump"]);
        assert!(fams[6..].iter().all(|f| *f == "invalid-transition"));
        let t = t_word(&pair);
        assert_eq!(t.len(), 32 + 31 * 10 + 2 + 20 + 25 * 9);
        assert!(t.chars().all(|c| c == '0' || c == '#'));
        assert!(pair.namespaces_disjoint());
    }

    #[test]
    fn no_variable_language_contains_the_separator() {
        let pair = build_appd(&counting()).unwrap();
        for (v, c) in pair.right.regular().iter() {
            assert!(!c.accepts("#"), "{v}");
            assert!(c.accepts("0"), "{v}");
        }
    }

    #[test]
    fn bad_structure_predicate_matches_short_garbage() {
        let pair = build_appd(&empty_one_state()).unwrap();
        assert!(predicate_satisfied(&pair, 1, &h("#0#")).unwrap().is_some());
        assert!(predicate_satisfied(&pair, 1, &h("##0#0#0##")).unwrap().is_none());
        assert!(predicate_satisfied(&pair, 1, &h("##0#0#0##00#0#0##")).unwrap().is_some());
    }

    #[test]
    fn valid_encodings_match_no_predicate() {
        let a = counting();
        let pair = build_appd(&a).unwrap();
        let valc = valc_bounded(&a, EncodingParams::default(), 4, 2);
        assert!(!valc.is_empty());
        for u in valc {
            assert_eq!(matching(&pair, &u), Vec::<usize>::new(), "{u}");
        }
    }

    #[test]
    fn counter_jump_of_two_is_caught() {
        let pair = build_appd(&counting()).unwrap();
        let u = "##0#0#0##0#000#0##";
        let hits = matching(&pair, u);
        assert!(hits.contains(&3), "{hits:?}");
        let tau = predicate_satisfied(&pair, 3, &h(u)).unwrap().unwrap();
        assert_eq!(tau.get("p3.y2"), Some("#0##0#00"));
        let jump3 = "##0#0#0##0#0000#0##";
        assert!(matching(&pair, jump3).contains(&3));
        let down = "##0#0#0##0#000#0##0#0#0##";
        assert!(matching(&pair, down).contains(&4));
    }

    #[test]
    fn invalid_transition_is_caught() {
        let pair = build_appd(&counting()).unwrap();
        // (q0,0,0) -> (q1,0,0) is not a transition.
        let u = encode_computation(EncodingParams::default(), &[Configuration::new(0, 0, 0), Configuration::new(1, 0, 0)]);
        let hits = matching(&pair, &u);
        assert!(hits.iter().any(|&i| pair.predicates[i - 1].label == "(q0,0,0) -> (q1,0,0) is not a transition"), "{hits:?}");
    }

    #[test]
    fn satisfied_predicate_assembles_a_tester_substitution() {
        let pair = build_appd(&empty_one_state()).unwrap();
        let g = h("##0#0#0##0#0#0##");
        let (i, tau) = crate::reductions::first_satisfied(&pair, &g).unwrap().unwrap();
        let hp = assemble_right(&pair, i, &g, &tau).unwrap();
        let w = g.apply(pair.left.pattern()).unwrap();
        assert!(verify_certificate(&w, &pair.right, &hp));
    }

    #[test]
    fn witness_for_an_initially_accepting_automaton() {
        let a = TwoCounterAutomaton::new(1, [0], []).unwrap();
        let pair = build_appd(&a).unwrap();
        let (w, g) = witness_counterexample(&pair, &[Configuration::initial()], None).unwrap();
        let t = t_word(&pair);
        assert_eq!(w, format!("{t}{V}0##0#0#0##0{V}{t}{t}"));
        assert!(verify_certificate(&w, &pair.left, &g));
        assert!(matching(&pair, g.get("a1").unwrap()).is_empty());
        let none = build_appd(&empty_one_state()).unwrap();
        assert!(witness_counterexample(&none, &[Configuration::initial()], None).is_err());
    }
}
