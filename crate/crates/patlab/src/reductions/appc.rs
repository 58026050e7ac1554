//! Terminal-free non-erasing inclusion skeleton. Terminals of the supplied
//! inner patterns are replaced by the letter variables `x_0` and `x_#`; over
//! larger alphabets the prefix `P = x_0 x_# x_{a1} … x_{aσ}` is added together
//! with letter and collision predicates.

use std::collections::{BTreeMap, BTreeSet};

use super::{var, Construction, ConstructionPair, PredicateInfo};
use crate::constraints::{Formula, LinearInequality};
use crate::error::{Error, Result};
use crate::pattern::{Alphabet, ConstrainedPattern, Mode, Pattern, Substitution, Symbol};
use crate::regular::RegularConstraintMap;

/// A predicate supplied by the caller, possibly with terminals `0` and `#`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerPredicate {
    pub gamma: Pattern,
    pub delta: Pattern,
}

/// One inner predicate `γ' = δ' = u`, `α_1 = ##0##x#`, `α_2 = w`, `|I| = 1`.
pub fn toy_inner(ab: &Alphabet) -> Result<(Vec<InnerPredicate>, Pattern, Pattern, usize)> {
    let u = Pattern::new(vec![var("u")], ab)?;
    let mut a1 = super::terms("##0##");
    a1.push(var("x"));
    a1.push(Symbol::Term('#'));
    Ok((
        vec![InnerPredicate { gamma: u.clone(), delta: u }],
        Pattern::new(a1, ab)?,
        Pattern::new(vec![var("w")], ab)?,
        1,
    ))
}

fn letter_var(c: char) -> String {
    format!("x_{c}")
}

/// `x_0`, `x_#`, then the extra letters in alphabet order.
fn letter_order(ab: &Alphabet) -> Result<Vec<char>> {
    if !ab.contains('0') || !ab.contains('#') {
        return Err(Error::Alphabet("the construction needs the letters 0 and #".into()));
    }
    let mut out = vec!['0', '#'];
    out.extend(ab.letters().iter().copied().filter(|&c| c != '0' && c != '#'));
    Ok(out)
}

pub(crate) fn letter_vars(pair: &ConstructionPair) -> Vec<String> {
    letter_order(pair.alphabet()).map(|v| v.into_iter().map(letter_var).collect()).unwrap_or_default()
}

fn is_skeleton_name(v: &str) -> bool {
    let indexed = |p: char| v.strip_prefix(p).is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()));
    v == "xa" || v == "xb" || v.starts_with("x_") || indexed('s') || indexed('r')
}

/// Rewrites terminals through `τ(a) = x_a`, rejecting skeleton names.
fn tau(p: &Pattern, letters: &[char]) -> Result<Vec<Symbol>> {
    let mut out = Vec::with_capacity(p.len());
    for s in p.symbols() {
        match s {
            Symbol::Term(c) if *c == '0' || *c == '#' => out.push(var(letter_var(*c))),
            Symbol::Term(c) => {
                debug_assert!(letters.contains(c));
                return Err(Error::Instance(format!("inner patterns may only use the terminals 0 and #, found {c}")));
            }
            Symbol::Var(v) if is_skeleton_name(v) || v.contains('.') => {
                return Err(Error::NamespaceCollision(v.clone()))
            }
            v => out.push(v.clone()),
        }
    }
    Ok(out)
}

/// Prefixes with `P`, keeping a leading `x_0` in front: `x_0 P rest` when the
/// pattern starts with `x_0`, `P γ` otherwise.
fn with_prefix(f: Vec<Symbol>, prefix: &[Symbol]) -> Vec<Symbol> {
    if prefix.is_empty() {
        return f;
    }
    let x0 = var(letter_var('0'));
    let mut out = Vec::new();
    let rest = if f.first() == Some(&x0) {
        out.push(x0);
        &f[1..]
    } else {
        &f[..]
    };
    out.extend_from_slice(prefix);
    out.extend_from_slice(rest);
    out
}

struct Row {
    family: &'static str,
    label: String,
    gamma: Vec<Symbol>,
    delta: Vec<Symbol>,
}

/// Namespaces the non-letter variables of a fragment under `p{i}.`.
fn own(f: &[Symbol], i: usize, letters: &BTreeSet<String>) -> Vec<Symbol> {
    f.iter()
        .map(|s| match s {
            Symbol::Var(v) if !letters.contains(v) => var(format!("p{i}.{v}")),
            s => s.clone(),
        })
        .collect()
}

pub fn build_appc_skeleton(
    inner: &[InnerPredicate],
    alpha1: &Pattern,
    alpha2: &Pattern,
    i_len: usize,
    ab: &Alphabet,
) -> Result<ConstructionPair> {
    let letters = letter_order(ab)?;
    let sigma = letters.len() - 2;
    let lv: Vec<String> = letters.iter().map(|&c| letter_var(c)).collect();
    let letter_set: BTreeSet<String> = lv.iter().cloned().collect();
    let x0 = var(&lv[0]);
    let xh = var(&lv[1]);
    let prefix: Vec<Symbol> = if sigma > 0 { lv.iter().map(var).collect() } else { Vec::new() };

    let mut rows = Vec::new();
    for (k, p) in inner.iter().enumerate() {
        if p.gamma.alphabet() != ab || p.delta.alphabet() != ab {
            return Err(Error::AlphabetMismatch);
        }
        rows.push(Row {
            family: "inner",
            label: format!("inner predicate {}", k + 1),
            gamma: with_prefix(tau(&p.gamma, &letters)?, &prefix),
            delta: with_prefix(tau(&p.delta, &letters)?, &prefix),
        });
    }
    let mut g = vec![x0.clone(); i_len + 5];
    g.push(var("y"));
    rows.push(Row {
        family: "equal-letters",
        label: format!("h({}) = h({})", lv[0], lv[1]),
        gamma: with_prefix(g, &prefix),
        delta: vec![var("yp")],
    });
    for (k, c) in letters[2..].iter().enumerate() {
        let xa = var(&lv[2 + k]);
        let mut head = vec![x0.clone()];
        head.extend_from_slice(&prefix);
        let mut g1 = head.clone();
        g1.extend([var("y1"), xa.clone(), var("y2")]);
        rows.push(Row { family: "letter", label: format!("letter {c} in α1"), gamma: g1, delta: vec![var("yp")] });
        let mut d2 = head;
        d2.extend([var("y1p"), xa, var("y2p")]);
        rows.push(Row { family: "letter", label: format!("letter {c} in α2"), gamma: vec![var("y")], delta: d2 });
    }
    if sigma > 0 {
        for i in 0..lv.len() {
            for j in i + 1..lv.len() {
                let mut head = vec![x0.clone()];
                head.extend(lv.iter().map(|v| var(if *v == lv[j] { &lv[i] } else { v })));
                let mut gg = head.clone();
                gg.push(var("y"));
                let mut dd = head;
                dd.push(var("yp"));
                rows.push(Row { family: "collision", label: format!("h({}) = h({})", lv[i], lv[j]), gamma: gg, delta: dd });
            }
        }
    }

    let m = rows.len();
    let s = |i: usize| format!("s{i}");
    let r = |i: usize| format!("r{i}");
    let mut beta: Vec<Symbol> = prefix.clone();
    beta.extend([x0.clone(), var("xa"), var("xb")]);
    beta.extend(std::iter::repeat_n(xh.clone(), 5));
    beta.push(var("xa"));
    beta.extend((1..=m).map(|i| var(s(i))));
    beta.push(var("xb"));
    beta.extend(std::iter::repeat_n(xh.clone(), 5));
    let mut tail: Vec<Symbol> = Vec::new();
    let mut predicates = Vec::new();
    for (n, row) in rows.into_iter().enumerate() {
        let i = n + 1;
        let gamma = Pattern::new(own(&row.gamma, i, &letter_set), ab)?;
        let delta = Pattern::new(own(&row.delta, i, &letter_set), ab)?;
        let sel = [x0.clone(), var(s(i)), var(s(i)), var(s(i)), var(s(i)), x0.clone()];
        tail.push(var(r(i)));
        tail.extend_from_slice(&sel);
        tail.extend_from_slice(gamma.symbols());
        tail.extend_from_slice(&sel);
        tail.extend_from_slice(delta.symbols());
        tail.extend_from_slice(&sel);
        predicates.push(PredicateInfo {
            index: i,
            family: row.family.to_owned(),
            label: row.label,
            gamma,
            delta: Some(delta),
            eta: None,
            regular: RegularConstraintMap::new(),
            extra: Formula::truth(),
            local: Formula::truth(),
        });
    }
    tail.push(var(r(m + 1)));
    beta.extend_from_slice(&tail);

    let mut lb: Vec<LinearInequality> = lv.iter().map(|v| LinearInequality::var_eq(v, 1)).collect();
    lb.extend((1..=m).map(|i| LinearInequality::var_eq(&s(i), 1)));
    lb.push(LinearInequality::sum(&["xa", "xb"], crate::constraints::Rel::Eq, m as i64 + 1)?);
    let right = ConstrainedPattern::new(Pattern::new(beta, ab)?, Formula::and_leaves(lb), RegularConstraintMap::new(), Mode::NE)?;

    let psi = |f: &[Symbol]| -> Vec<Symbol> {
        f.iter()
            .map(|s| match s {
                Symbol::Var(v) if letter_set.contains(v) => s.clone(),
                _ => x0.clone(),
            })
            .collect()
    };
    let t = psi(&tail);
    let v: Vec<Symbol> = vec![x0.clone(), xh.clone(), xh.clone(), xh.clone(), xh.clone(), x0.clone()];
    let mut a1 = prefix.clone();
    a1.extend(tau(alpha1, &letters)?);
    let mut a2 = prefix.clone();
    a2.extend(tau(alpha2, &letters)?);
    let mut alpha: Vec<Symbol> = prefix.clone();
    alpha.extend(std::iter::repeat_n(x0.clone(), m + 2));
    alpha.extend(std::iter::repeat_n(xh.clone(), 5));
    alpha.extend(std::iter::repeat_n(x0.clone(), m));
    alpha.push(xh.clone());
    alpha.extend(std::iter::repeat_n(x0.clone(), m));
    alpha.extend(std::iter::repeat_n(xh.clone(), 5));
    alpha.extend_from_slice(&t);
    alpha.extend_from_slice(&v);
    alpha.push(x0.clone());
    alpha.extend_from_slice(&a1);
    alpha.push(x0.clone());
    alpha.extend_from_slice(&v);
    alpha.push(x0.clone());
    alpha.extend_from_slice(&a2);
    alpha.push(x0.clone());
    alpha.extend_from_slice(&v);
    alpha.extend_from_slice(&t);
    let la: Vec<LinearInequality> = lv.iter().map(|v| LinearInequality::var_eq(v, 1)).collect();
    let left = ConstrainedPattern::new(Pattern::new(alpha, ab)?, Formula::and_leaves(la), RegularConstraintMap::new(), Mode::NE)?;

    let distinguished: BTreeMap<String, String> = lv.iter().map(|v| (v.clone(), v.clone())).collect();
    let fragments: BTreeMap<String, Pattern> =
        [("alpha1".to_owned(), Pattern::new(a1, ab)?), ("alpha2".to_owned(), Pattern::new(a2, ab)?)].into();
    Ok(ConstructionPair {
        construction: Construction::AppC,
        left,
        right,
        predicates,
        distinguished,
        fragments,
        automaton: None,
    })
}

/// The selected block reads `v x_0 α1' x_0 v x_0 α2' x_0 v`; the selector
/// variables split the `0^{M}#0^{M}` part of the prefix around position `i`.
pub(crate) fn assemble(pair: &ConstructionPair, i: usize, h: &Substitution, tau: &Substitution) -> Result<Substitution> {
    let get = |v: &str| h.get(v).map(str::to_owned).ok_or_else(|| Error::MissingImage(v.to_owned()));
    let lv = letter_vars(pair);
    let c0 = get(&lv[0])?;
    let ch = get(&lv[1])?;
    let m = pair.predicates.len();
    let mut out = Substitution::new();
    for v in &lv {
        out.insert(v.clone(), get(v)?);
    }
    for k in 1..=m {
        out.insert(format!("s{k}"), if k == i { ch.clone() } else { c0.clone() });
    }
    out.insert("xa", c0.repeat(m - i + 1));
    out.insert("xb", c0.repeat(i));
    for p in &pair.predicates {
        for v in pair.own_vars(p) {
            let w = if p.index == i {
                tau.get(&v).ok_or_else(|| Error::MissingImage(v.clone()))?.to_owned()
            } else {
                c0.clone()
            };
            out.insert(v, w);
        }
    }
    // ψ-images of the blocks before and after the selected one.
    let letters: BTreeSet<&String> = lv.iter().collect();
    let block_image = |p: &PredicateInfo| -> Result<String> {
        let psi = |f: &Pattern| -> Result<String> {
            f.symbols()
                .iter()
                .map(|s| match s {
                    Symbol::Var(v) if letters.contains(v) => get(v),
                    _ => Ok(c0.clone()),
                })
                .collect()
        };
        let g = psi(&p.gamma)?;
        let d = psi(p.delta.as_ref().expect("two-sided predicate"))?;
        let b = c0.repeat(6);
        Ok(format!("{b}{g}{b}{d}{b}"))
    };
    let mut before = String::new();
    let mut after = String::new();
    for p in &pair.predicates {
        let img = block_image(p)?;
        if p.index < i {
            before.push_str(&c0);
            before.push_str(&img);
        } else if p.index > i {
            after.push_str(&c0);
            after.push_str(&img);
        }
    }
    let own_block = block_image(pair.predicate(i)?)?;
    for k in 1..=m + 1 {
        let w = if k == i {
            // r_i ... r_{M+1} under ψ.
            format!("{c0}{own_block}{after}{c0}")
        } else if k == i + 1 {
            format!("{before}{c0}{own_block}{c0}")
        } else {
            c0.clone()
        };
        out.insert(format!("r{k}"), w);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::verify_certificate;
    use crate::reductions::{assemble_right, first_satisfied};

    fn toy(ab: &Alphabet) -> ConstructionPair {
        let (inner, a1, a2, i) = toy_inner(ab).unwrap();
        build_appc_skeleton(&inner, &a1, &a2, i, ab).unwrap()
    }

    #[test]
    fn binary_skeleton_shape() {
        let pair = toy(&Alphabet::binary());
        assert_eq!(pair.predicates.len(), 2);
        assert!(pair.left.pattern().is_terminal_free());
        assert!(pair.right.pattern().is_terminal_free());
        let text = pair.right.pattern().to_string();
        assert!(text.starts_with("x_0 xa xb x_# x_# x_# x_# x_# xa s1 s2 xb x_# x_# x_# x_# x_# r1 x_0 s1 s1 s1 s1 x_0 p1.u"), "{text}");
        assert_eq!(pair.predicates[1].gamma.to_string(), "x_0 x_0 x_0 x_0 x_0 x_0 p2.y");
        assert!(pair.right.length().to_string().contains("xa + xb = 3"));
        let left = pair.left.pattern().to_string();
        assert!(left.starts_with("x_0 x_0 x_0 x_0 x_# x_# x_# x_# x_# x_0 x_0 x_# x_0 x_0 x_# x_# x_# x_# x_#"), "{left}");
        assert!(pair.namespaces_disjoint());
    }

    fn sample(pair: &ConstructionPair, c0: &str, ch: &str, x: &str, w: &str) -> Substitution {
        let mut h = Substitution::new().with("x_0", c0).with("x_#", ch).with("x", x).with("w", w);
        for (k, v) in letter_vars(pair).into_iter().enumerate().skip(2) {
            h.insert(v, ["a", "b", "c"][k - 2]);
        }
        h
    }

    #[test]
    fn equal_letters_route_assembles() {
        let pair = toy(&Alphabet::binary());
        let h = sample(&pair, "0", "0", "#0", "##");
        let (i, tau) = first_satisfied(&pair, &h).unwrap().unwrap();
        assert_eq!(pair.predicates[i - 1].family, "equal-letters");
        let hp = assemble_right(&pair, i, &h, &tau).unwrap();
        let word = h.apply(pair.left.pattern()).unwrap();
        assert!(verify_certificate(&word, &pair.right, &hp));
    }

    #[test]
    fn inner_route_assembles() {
        let pair = toy(&Alphabet::binary());
        // α1 and α2 images agree, so the toy inner predicate applies.
        let h = sample(&pair, "0", "#", "0", "##0##0#");
        let (i, tau) = first_satisfied(&pair, &h).unwrap().unwrap();
        assert_eq!(i, 1);
        let hp = assemble_right(&pair, i, &h, &tau).unwrap();
        assert!(verify_certificate(&h.apply(pair.left.pattern()).unwrap(), &pair.right, &hp));
        let other = sample(&pair, "0", "#", "0", "0");
        assert!(first_satisfied(&pair, &other).unwrap().is_none());
    }

    #[test]
    fn larger_alphabet_collisions() {
        let ab = Alphabet::parse("0#a").unwrap();
        let pair = toy(&ab);
        let fams: Vec<&str> = pair.predicates.iter().map(|p| p.family.as_str()).collect();
        assert_eq!(fams, ["inner", "equal-letters", "letter", "letter", "collision", "collision", "collision"]);
        assert!(pair.right.pattern().to_string().starts_with("x_0 x_# x_a x_0 xa xb"));
        let mut h = sample(&pair, "0", "#", "0", "0");
        h.insert("x_a", "0");
        let (i, tau) = first_satisfied(&pair, &h).unwrap().unwrap();
        assert_eq!(pair.predicates[i - 1].family, "letter");
        let hp = assemble_right(&pair, i, &h, &tau).unwrap();
        assert!(verify_certificate(&h.apply(pair.left.pattern()).unwrap(), &pair.right, &hp));
        let coll = pair.predicates.iter().find(|p| p.label == "h(x_0) = h(x_a)").unwrap().index;
        let tau = crate::reductions::predicate_satisfied(&pair, coll, &h).unwrap().unwrap();
        let hp = assemble_right(&pair, coll, &h, &tau).unwrap();
        assert!(verify_certificate(&h.apply(pair.left.pattern()).unwrap(), &pair.right, &hp));
        h.insert("x_a", "#0");
        assert!(crate::reductions::predicate_satisfied(&pair, coll, &h).unwrap().is_none());
    }

    #[test]
    fn psi_keeps_letter_variables() {
        let ab = Alphabet::parse("0#a").unwrap();
        let pair = toy(&ab);
        let mut vars = pair.left.vars();
        for v in ["x", "w", "x_0", "x_#", "x_a"] {
            assert!(vars.remove(v), "{v}");
        }
        assert!(vars.is_empty(), "{vars:?}");
    }

    #[test]
    fn skeleton_names_are_rejected() {
        let ab = Alphabet::binary();
        let (_, a1, a2, i) = toy_inner(&ab).unwrap();
        let bad = InnerPredicate {
            gamma: Pattern::new(vec![var("x_0")], &ab).unwrap(),
            delta: Pattern::new(vec![var("q")], &ab).unwrap(),
        };
        assert!(matches!(build_appc_skeleton(&[bad], &a1, &a2, i, &ab), Err(Error::NamespaceCollision(_))));
        let bad_alpha = Pattern::new(vec![var("s1")], &ab).unwrap();
        assert!(build_appc_skeleton(&[], &bad_alpha, &a2, i, &ab).is_err());
    }
}
