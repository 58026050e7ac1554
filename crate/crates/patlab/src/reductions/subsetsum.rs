//! Subset sum to bounded equivalence over a unary alphabet: `x_i` has length
//! `S_i + 1` when `S_i` is picked and 1 otherwise.

use std::collections::BTreeMap;

use super::{var, Construction, ConstructionPair};
use crate::constraints::{Formula, LinearInequality, Rel};
use crate::error::{Error, Result};
use crate::pattern::{Alphabet, ConstrainedPattern, Mode, Pattern};
use crate::regular::RegularConstraintMap;

pub fn build_subsetsum(s: &[u64], t: u64) -> Result<ConstructionPair> {
    if s.is_empty() || s.contains(&0) {
        return Err(Error::Instance("subset sum needs a nonempty list of positive integers".into()));
    }
    let ab = Alphabet::unary();
    let n = s.len() as i64;
    let xs: Vec<String> = (1..=s.len()).map(|i| format!("x{i}")).collect();
    let mut parts: Vec<Formula> = xs
        .iter()
        .zip(s)
        .map(|(x, &si)| {
            Formula::or(vec![
                Formula::leaf(LinearInequality::var_eq(x, si as i64 + 1)),
                Formula::leaf(LinearInequality::var_eq(x, 1)),
            ])
        })
        .collect();
    parts.push(Formula::leaf(LinearInequality::sum(&xs, Rel::Eq, t as i64 + n)?));
    let left = ConstrainedPattern::new(
        Pattern::new(xs.iter().map(var).collect(), &ab)?,
        Formula::and(parts),
        RegularConstraintMap::new(),
        Mode::NE,
    )?;
    let right = ConstrainedPattern::new(
        Pattern::new(vec![var("y")], &ab)?,
        Formula::leaf(LinearInequality::var_eq("y", t as i64 + n)),
        RegularConstraintMap::new(),
        Mode::NE,
    )?;
    Ok(ConstructionPair {
        construction: Construction::SubsetSum,
        left,
        right,
        predicates: Vec::new(),
        distinguished: BTreeMap::new(),
        fragments: BTreeMap::new(),
        automaton: None,
    })
}
