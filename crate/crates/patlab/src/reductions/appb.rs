//! Erasing equivalence pair: the generator
//! `y1 xv α1 xv α2 xv y2 xv z z' z' (z_a z_a)* z xv` and a tester built from
//! predicate triples `(γ_i, δ_i, η_i)` selected by `x_i`.

use std::collections::{BTreeMap, BTreeSet};

use super::{namespaced, three_longest_runs, var, Construction, ConstructionPair, PredicateInfo};
use crate::automata::{encode_computation, Configuration, EncodingParams, TwoCounterAutomaton};
use crate::constraints::{Formula, LinearInequality, Rel};
use crate::error::{Error, Result};
use crate::pattern::{Alphabet, ConstrainedPattern, Mode, Pattern, Substitution, Symbol};
use crate::regular::RegularConstraintMap;

/// An external predicate. Its patterns may use `z`, `zp` and `za1`, `za2`, …
/// to refer to the predicate's own copies of the generator's letter variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalPredicate {
    pub gamma: Pattern,
    pub delta: Pattern,
}

/// `γ = w1 zp zp zp w2`, `δ = w3`: satisfied when `h(α_1)` contains
/// `h(z')³`.
pub fn toy_predicate(ab: &Alphabet) -> Result<ExternalPredicate> {
    Ok(ExternalPredicate {
        gamma: Pattern::new(vec![var("w1"), var("zp"), var("zp"), var("zp"), var("w2")], ab)?,
        delta: Pattern::new(vec![var("w3")], ab)?,
    })
}

fn extra_letters(ab: &Alphabet) -> Result<Vec<char>> {
    if !ab.contains('0') || !ab.contains('#') {
        return Err(Error::Alphabet("the construction needs the letters 0 and #".into()));
    }
    Ok(ab.letters().iter().copied().filter(|&c| c != '0' && c != '#').collect())
}

fn z_names(sigma: usize) -> Vec<String> {
    let mut out = vec!["z".to_owned(), "zp".to_owned()];
    out.extend((1..=sigma).map(|k| format!("za{k}")));
    out
}

/// `z z' z' z_{a1} z_{a1} … z`.
fn z_shape(names: &[String]) -> Vec<String> {
    let mut out = vec![names[0].clone()];
    for n in &names[1..] {
        out.push(n.clone());
        out.push(n.clone());
    }
    out.push(names[0].clone());
    out
}

pub(crate) fn z_block(pair: &ConstructionPair) -> Vec<Symbol> {
    let sigma = pair.alphabet().len() - 2;
    z_shape(&z_names(sigma)).into_iter().map(var).collect()
}

struct Row {
    family: &'static str,
    label: String,
    gamma: Pattern,
    delta: Pattern,
    shape: Vec<String>,
}

pub fn build_appb(a: &TwoCounterAutomaton, preds: &[ExternalPredicate], ab: &Alphabet) -> Result<ConstructionPair> {
    let extra = extra_letters(ab)?;
    let names = z_names(extra.len());
    let shape = z_shape(&names);

    let mut l: Vec<Symbol> = ["y1", "xv", "a1", "xv", "a2", "xv", "y2", "xv"].iter().map(|s| var(*s)).collect();
    l.extend(shape.iter().map(var));
    l.push(var("xv"));
    let mut left_leaves = vec![LinearInequality::var_eq("xv", 5)];
    left_leaves.extend(names.iter().map(|n| LinearInequality::var_eq(n, 1)));
    let left = ConstrainedPattern::new(
        Pattern::new(l, ab)?,
        Formula::and_leaves(left_leaves),
        RegularConstraintMap::new(),
        Mode::E,
    )?;

    let one = |n: &str| Pattern::new(vec![var(n)], ab);
    let mut rows: Vec<Row> = Vec::new();
    for (k, p) in preds.iter().enumerate() {
        if p.gamma.alphabet() != ab || p.delta.alphabet() != ab {
            return Err(Error::AlphabetMismatch);
        }
        rows.push(Row {
            family: "external",
            label: format!("external predicate {}", k + 1),
            gamma: p.gamma.clone(),
            delta: p.delta.clone(),
            shape: shape.clone(),
        });
    }
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let s: Vec<String> = shape.iter().map(|n| if *n == names[j] { names[i].clone() } else { n.clone() }).collect();
            rows.push(Row {
                family: "collision",
                label: format!("h({}) = h({})", names[i], names[j]),
                gamma: one("y")?,
                delta: one("yp")?,
                shape: s,
            });
        }
    }
    for (k, c) in extra.iter().enumerate() {
        let za = &names[2 + k];
        rows.push(Row {
            family: "letter",
            label: format!("letter {c} in α1"),
            gamma: Pattern::new(vec![var("y1"), var(za), var("y2")], ab)?,
            delta: one("y3")?,
            shape: shape.clone(),
        });
        rows.push(Row {
            family: "letter",
            label: format!("letter {c} in α2"),
            gamma: one("y1")?,
            delta: Pattern::new(vec![var("y2"), var(za), var("y3")], ab)?,
            shape: shape.clone(),
        });
    }

    let reserved: BTreeSet<String> = ["x".to_owned()].into();
    let mut hat: Vec<Symbol> = vec![var("yb1")];
    let mut dot: Vec<Symbol> = vec![var("yb2")];
    let mut zs = Vec::new();
    let mut zps = Vec::new();
    let mut xs = Vec::new();
    let mut leaves = Vec::new();
    let mut predicates = Vec::new();
    for (n, row) in rows.into_iter().enumerate() {
        let i = n + 1;
        let x = format!("p{i}.x");
        let gamma = namespaced(&row.gamma, i, &reserved)?;
        let delta = namespaced(&row.delta, i, &reserved)?;
        let eta_vars: Vec<String> = row.shape.iter().map(|s| format!("p{i}.{s}")).collect();
        let eta = Pattern::new(eta_vars.iter().map(var).collect(), ab)?;
        hat.push(var(&x));
        hat.extend_from_slice(gamma.symbols());
        hat.push(var(&x));
        hat.extend_from_slice(delta.symbols());
        hat.push(var(&x));
        dot.push(var(&x));
        dot.extend_from_slice(eta.symbols());
        dot.push(var(&x));

        let zi = format!("p{i}.z");
        let zpi = format!("p{i}.zp");
        leaves.push(LinearInequality::from_terms(&[(1, x.as_str()), (-5, zi.as_str())], Rel::Eq, 0)?);
        let mut distinct: Vec<&String> = Vec::new();
        for v in &eta_vars {
            if !distinct.contains(&v) {
                distinct.push(v);
            }
        }
        if distinct.contains(&&zpi) {
            zps.push(zpi.clone());
        }
        for v in distinct.into_iter().filter(|v| **v != zi) {
            leaves.push(LinearInequality::from_terms(&[(1, zi.as_str()), (-1, v.as_str())], Rel::Eq, 0)?);
        }
        zs.push(zi);
        xs.push(x);
        predicates.push(PredicateInfo {
            index: i,
            family: row.family.to_owned(),
            label: row.label,
            gamma,
            delta: Some(delta),
            eta: Some(eta),
            regular: RegularConstraintMap::new(),
            extra: Formula::truth(),
            local: Formula::truth(),
        });
    }
    let mut system = vec![LinearInequality::sum(&zs, Rel::Eq, 1)?];
    if !zps.is_empty() {
        system.push(LinearInequality::sum(&zps, Rel::Le, 1)?);
    }
    system.push(LinearInequality::sum(&xs, Rel::Eq, 5)?);
    system.extend(leaves);

    let mut beta = hat;
    beta.extend(dot);
    let right =
        ConstrainedPattern::new(Pattern::new(beta, ab)?, Formula::and_leaves(system), RegularConstraintMap::new(), Mode::E)?;

    let mut distinguished: BTreeMap<String, String> = [
        ("alpha1", "a1"),
        ("alpha2", "a2"),
        ("x_v", "xv"),
        ("y1", "y1"),
        ("y2", "y2"),
        ("y1'", "yb1"),
        ("y2'", "yb2"),
        ("z", "z"),
        ("z'", "zp"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    for (k, c) in extra.iter().enumerate() {
        distinguished.insert(format!("z_{c}"), names[2 + k].clone());
    }
    Ok(ConstructionPair {
        construction: Construction::AppB,
        left,
        right,
        predicates,
        distinguished,
        fragments: BTreeMap::new(),
        automaton: Some(a.clone()),
    })
}

pub(crate) fn witness(pair: &ConstructionPair, comp: &[Configuration], filler: Option<usize>) -> Result<Substitution> {
    let enc = encode_computation(EncodingParams::default(), comp);
    let k = filler.unwrap_or_else(|| three_longest_runs(&enc, '0') + 1);
    let mut h = Substitution::new()
        .with("y1", "")
        .with("y2", "")
        .with("xv", "0###0")
        .with("z", "0")
        .with("zp", "#")
        .with("a2", "0".repeat(k));
    let extra = extra_letters(pair.alphabet())?;
    for (k, c) in extra.iter().enumerate() {
        h.insert(format!("za{}", k + 1), c.to_string());
    }
    h.insert("a1", enc);
    Ok(h)
}

pub(crate) fn assemble(pair: &ConstructionPair, i: usize, h: &Substitution, tau: &Substitution) -> Result<Substitution> {
    let get = |v: &str| h.get(v).map(str::to_owned).ok_or_else(|| Error::MissingImage(v.to_owned()));
    let mut out: Substitution = pair.right.vars().into_iter().map(|v| (v, String::new())).collect();
    out.insert("yb1", get("y1")?);
    out.insert("yb2", get("y2")?);
    out.insert(format!("p{i}.x"), get("xv")?);
    for (v, w) in tau.iter() {
        out.insert(v.clone(), w.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::TwoCounterAutomaton;
    use crate::constraints::feasible_assignments_bounded;
    use crate::matcher::{membership, verify_certificate};
    use crate::reductions::{assemble_right, predicate_satisfied, witness_counterexample};

    fn accepting() -> TwoCounterAutomaton {
        TwoCounterAutomaton::new(2, [1], [(0, 0, 0, vec![(1, 1, 0)])]).unwrap()
    }

    #[test]
    fn binary_without_external_predicates_has_one_collision_predicate() {
        let pair = build_appb(&accepting(), &[], &Alphabet::binary()).unwrap();
        assert_eq!(pair.predicates.len(), 1);
        let p = &pair.predicates[0];
        assert_eq!(p.eta.as_ref().unwrap().to_string(), "p1.z p1.z p1.z p1.z");
        assert_eq!(pair.left.pattern().to_string(), "y1 xv a1 xv a2 xv y2 xv z zp zp z xv");
        assert_eq!(
            pair.right.pattern().to_string(),
            "yb1 p1.x p1.y p1.x p1.yp p1.x yb2 p1.x p1.z p1.z p1.z p1.z p1.x"
        );
        assert!(pair.namespaces_disjoint());
    }

    #[test]
    fn tester_system_lists_the_five_families() {
        let ab = Alphabet::binary();
        let pair = build_appb(&accepting(), &[toy_predicate(&ab).unwrap()], &ab).unwrap();
        let text = pair.right.length().to_string();
        assert!(text.contains("p1.z + p2.z = 1"), "{text}");
        assert!(text.contains("p1.zp <= 1"), "{text}");
        assert!(text.contains("p1.x + p2.x = 5"), "{text}");
        assert!(text.contains("p1.x - 5*p1.z = 0"), "{text}");
        assert!(text.contains("p1.z - p1.zp = 0"), "{text}");
    }

    #[test]
    fn valid_length_assignments_select_one_block() {
        let ab = Alphabet::binary();
        let pair = build_appb(&accepting(), &[toy_predicate(&ab).unwrap()], &ab).unwrap();
        let f = pair.right.length();
        let all: Vec<_> = feasible_assignments_bounded(f, &f.vars(), 5, &[]).collect();
        assert_eq!(all.len(), 2);
        for a in all {
            let fives: Vec<_> = a.iter().filter(|(k, v)| k.ends_with(".x") && **v == 5).collect();
            assert_eq!(fives.len(), 1);
            let i = fives[0].0.trim_end_matches(".x");
            for (k, v) in &a {
                let expected = if k.starts_with(&format!("{i}.")) { if k.ends_with(".x") { 5 } else { 1 } } else { 0 };
                assert_eq!(*v, expected, "{k} in {a:?}");
            }
        }
    }

    #[test]
    fn collision_predicate_tracks_equal_letters() {
        let pair = build_appb(&accepting(), &[], &Alphabet::binary()).unwrap();
        let base = Substitution::new().with("a1", "0#").with("a2", "00").with("xv", "0###0").with("y1", "").with("y2", "");
        let same = base.clone().with("z", "0").with("zp", "0");
        assert!(predicate_satisfied(&pair, 1, &same).unwrap().is_some());
        let diff = base.with("z", "0").with("zp", "#");
        assert!(predicate_satisfied(&pair, 1, &diff).unwrap().is_none());
        assert_eq!(predicate_satisfied(&pair, 2, &diff), Err(Error::UnknownPredicate(2)));
    }

    #[test]
    fn satisfied_predicate_reproduces_the_generator_word() {
        let ab = Alphabet::binary();
        let pair = build_appb(&accepting(), &[toy_predicate(&ab).unwrap()], &ab).unwrap();
        let h = Substitution::new()
            .with("a1", "0###0")
            .with("a2", "#")
            .with("xv", "0#0#0")
            .with("y1", "0")
            .with("y2", "")
            .with("z", "0")
            .with("zp", "#");
        let (i, tau) = crate::reductions::first_satisfied(&pair, &h).unwrap().unwrap();
        assert_eq!(i, 1);
        let hp = assemble_right(&pair, i, &h, &tau).unwrap();
        let w = h.apply(pair.left.pattern()).unwrap();
        assert!(verify_certificate(&w, &pair.right, &hp));
        assert!(membership(&w, &pair.right).is_some());
    }

    #[test]
    fn witness_uses_the_block_encoding() {
        let pair = build_appb(&accepting(), &[], &Alphabet::binary()).unwrap();
        let comp = [Configuration::new(0, 0, 0), Configuration::new(1, 1, 0)];
        let (w, h) = witness_counterexample(&pair, &comp, None).unwrap();
        assert_eq!(h.get("a1"), Some("##0#0#0##00#00#0##"));
        assert_eq!(h.get("a2"), Some("000000"));
        assert!(verify_certificate(&w, &pair.left, &h));
        assert!(predicate_satisfied(&pair, 1, &h).unwrap().is_none());
        assert!(membership(&w, &pair.right).is_none());
        let bad = [Configuration::new(0, 0, 0)];
        assert!(witness_counterexample(&pair, &bad, None).is_err());
    }

    #[test]
    fn larger_alphabet_adds_collision_and_letter_predicates() {
        let ab = Alphabet::parse("0#a").unwrap();
        let pair = build_appb(&accepting(), &[], &ab).unwrap();
        let fams: Vec<&str> = pair.predicates.iter().map(|p| p.family.as_str()).collect();
        assert_eq!(fams, ["collision", "collision", "collision", "letter", "letter"]);
        assert_eq!(pair.left.pattern().to_string(), "y1 xv a1 xv a2 xv y2 xv z zp zp za1 za1 z xv");
        let h = Substitution::new()
            .with("a1", "0a#")
            .with("a2", "0")
            .with("xv", "0###0")
            .with("y1", "")
            .with("y2", "")
            .with("z", "0")
            .with("zp", "#")
            .with("za1", "a");
        let (i, tau) = crate::reductions::first_satisfied(&pair, &h).unwrap().unwrap();
        assert_eq!(pair.predicates[i - 1].family, "letter");
        let hp = assemble_right(&pair, i, &h, &tau).unwrap();
        assert!(verify_certificate(&h.apply(pair.left.pattern()).unwrap(), &pair.right, &hp));
    }

    #[test]
    fn dotted_names_are_rejected() {
        let ab = Alphabet::binary();
        let bad = ExternalPredicate {
            gamma: Pattern::new(vec![var("p9.w")], &ab).unwrap(),
            delta: Pattern::new(vec![var("w")], &ab).unwrap(),
        };
        assert!(matches!(build_appb(&accepting(), &[bad], &ab), Err(Error::NamespaceCollision(_))));
    }
}
