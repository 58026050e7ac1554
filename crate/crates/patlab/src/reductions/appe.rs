//! 3SAT to bounded equivalence over a unary alphabet. A literal variable of
//! length 2 reads as true, length 1 as false.

use std::collections::BTreeMap;

use super::{var, Construction, ConstructionPair};
use crate::constraints::{Formula, LinearInequality, Rel};
use crate::error::{Error, Result};
use crate::pattern::{Alphabet, ConstrainedPattern, Mode, Pattern, Substitution};
use crate::regular::RegularConstraintMap;

/// Three nonzero literals; `-j` is the negation of `X_j`.
pub type Clause = [i64; 3];

fn literal_var(l: i64) -> String {
    if l > 0 {
        format!("u{l}")
    } else {
        format!("v{}", -l)
    }
}

fn check(clauses: &[Clause]) -> Result<()> {
    if clauses.is_empty() {
        return Err(Error::Instance("a 3SAT instance needs at least one clause".into()));
    }
    if clauses.iter().flatten().any(|&l| l == 0) {
        return Err(Error::Instance("literals must be nonzero".into()));
    }
    Ok(())
}

/// The pair `(α, β)` with `β = z`, `|z| = 7n`. The generator is nonempty iff
/// the instance is satisfiable, and then its language is `{0^{7n}}`.
pub fn build_3sat(clauses: &[Clause]) -> Result<ConstructionPair> {
    check(clauses)?;
    let ab = Alphabet::unary();
    let n = clauses.len() as i64;
    let mut symbols = Vec::new();
    let mut leaves = Vec::new();
    let mut total: BTreeMap<String, i64> = BTreeMap::new();
    for (i, c) in clauses.iter().enumerate() {
        let y = format!("y{}", i + 1);
        let mut coeffs: BTreeMap<String, i64> = BTreeMap::new();
        for &l in c {
            let v = literal_var(l);
            symbols.push(var(&v));
            *coeffs.entry(v).or_default() += 1;
        }
        symbols.push(var(&y));
        coeffs.insert(y.clone(), 1);
        leaves.push(LinearInequality::var_le(&y, 3));
        for (v, k) in &coeffs {
            *total.entry(v.clone()).or_default() += k;
        }
        let terms: Vec<(i64, &str)> = coeffs.iter().map(|(v, k)| (*k, v.as_str())).collect();
        leaves.push(LinearInequality::from_terms(&terms, Rel::Eq, 7)?);
    }
    let mut atoms: Vec<i64> = clauses.iter().flatten().map(|l| l.abs()).collect();
    atoms.sort_unstable();
    atoms.dedup();
    for j in atoms {
        let (u, v) = (format!("u{j}"), format!("v{j}"));
        match (total.contains_key(&u), total.contains_key(&v)) {
            (true, true) => leaves.push(LinearInequality::sum(&[u, v], Rel::Eq, 3)?),
            (true, false) => leaves.push(LinearInequality::var_le(&u, 2)),
            _ => leaves.push(LinearInequality::var_le(&v, 2)),
        }
    }
    let terms: Vec<(i64, &str)> = total.iter().map(|(v, k)| (*k, v.as_str())).collect();
    leaves.push(LinearInequality::from_terms(&terms, Rel::Eq, 7 * n)?);
    let left = ConstrainedPattern::new(Pattern::new(symbols, &ab)?, Formula::and_leaves(leaves), RegularConstraintMap::new(), Mode::NE)?;
    let right = ConstrainedPattern::new(
        Pattern::new(vec![var("z")], &ab)?,
        Formula::leaf(LinearInequality::var_eq("z", 7 * n)),
        RegularConstraintMap::new(),
        Mode::NE,
    )?;
    Ok(ConstructionPair {
        construction: Construction::ThreeSat,
        left,
        right,
        predicates: Vec::new(),
        distinguished: BTreeMap::new(),
        fragments: BTreeMap::new(),
        automaton: None,
    })
}

/// The generator substitution of an assignment (`assignment[j-1]` is the value
/// of `X_j`): true literals get `00`, false ones `0`, and each `y_i` pads its
/// clause to 7.
pub fn assignment_certificate(clauses: &[Clause], assignment: &[bool]) -> Result<Substitution> {
    check(clauses)?;
    let value = |l: i64| -> Result<bool> {
        let b = *assignment
            .get(l.unsigned_abs() as usize - 1)
            .ok_or_else(|| Error::Instance(format!("no value for X{}", l.abs())))?;
        Ok(if l > 0 { b } else { !b })
    };
    let mut h = Substitution::new();
    for (i, c) in clauses.iter().enumerate() {
        let mut used = 0;
        for &l in c {
            let len = if value(l)? { 2 } else { 1 };
            used += len;
            h.insert(literal_var(l), "0".repeat(len));
        }
        h.insert(format!("y{}", i + 1), "0".repeat(7usize.saturating_sub(used)));
    }
    Ok(h)
}

/// Reads the assignment back from a generator substitution.
pub fn decode_assignment(h: &Substitution, atoms: usize) -> Vec<bool> {
    (1..=atoms)
        .map(|j| match h.get(&format!("u{j}")) {
            Some(w) => w.len() == 2,
            None => h.get(&format!("v{j}")).is_some_and(|w| w.len() == 1),
        })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::langops::{bounded_equivalence, BoundedVerdict};
    use crate::matcher::verify_certificate;

    #[test]
    fn satisfiable_instance_is_equivalent_at_fourteen() {
        let pair = build_3sat(&[[1, 2, 3], [-1, -2, -3]]).unwrap();
        assert_eq!(bounded_equivalence(&pair.left, &pair.right, 14).unwrap(), BoundedVerdict::Holds(14));
    }

    #[test]
    fn unsatisfiable_instance_has_empty_generator() {
        let pair = build_3sat(&[[1, 1, 1], [-1, -1, -1]]).unwrap();
        assert!(pair.left.length().to_string().contains("3*u1 + y1 = 7"));
        match bounded_equivalence(&pair.left, &pair.right, 14).unwrap() {
            BoundedVerdict::Counterexample { word, .. } => assert_eq!(word, "0".repeat(14)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn assignment_certificate_is_valid() {
        let clauses = [[1, 2, 3], [-1, -2, -3]];
        let pair = build_3sat(&clauses).unwrap();
        let h = assignment_certificate(&clauses, &[true, false, false]).unwrap();
        assert_eq!(h.get("u1"), Some("00"));
        assert_eq!(h.get("v1"), Some("0"));
        let w = h.apply(pair.left.pattern()).unwrap();
        assert_eq!(w, "0".repeat(14));
        assert!(verify_certificate(&w, &pair.left, &h));
        assert_eq!(decode_assignment(&h, 3), [true, false, false]);
    }

    #[test]
    fn malformed_instances_are_rejected() {
        assert!(build_3sat(&[]).is_err());
        assert!(build_3sat(&[[1, 0, 2]]).is_err());
    }
}
