//! Builders that compile counter automata, 3SAT formulas and subset-sum
//! instances into pairs of constrained patterns, plus the helpers used to
//! check the pairs: predicate queries, counterexample witnesses and the
//! assembly of tester-side substitutions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::automata::{check_computation, Configuration, TwoCounterAutomaton};
use crate::constraints::Formula;
use crate::error::{Error, Result};
use crate::matcher::{ConjunctiveQuery, Matcher};
use crate::pattern::{Alphabet, ConstrainedPattern, Pattern, Substitution, Symbol};
use crate::regular::RegularConstraintMap;

pub mod appb;
pub mod appc;
pub mod appd;
pub mod appe;
pub mod subsetsum;

pub use appb::{build_appb, toy_predicate, ExternalPredicate};
pub use appc::{build_appc_skeleton, toy_inner, InnerPredicate};
pub use appd::build_appd;
pub use appe::{assignment_certificate, build_3sat, decode_assignment, Clause};
pub use subsetsum::build_subsetsum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Construction {
    AppB,
    AppC,
    AppD,
    ThreeSat,
    SubsetSum,
}

impl Construction {
    pub fn as_str(self) -> &'static str {
        match self {
            Construction::AppB => "appB",
            Construction::AppC => "appC",
            Construction::AppD => "appD",
            Construction::ThreeSat => "3sat",
            Construction::SubsetSum => "subsetsum",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "appB" => Construction::AppB,
            "appC" => Construction::AppC,
            "appD" => Construction::AppD,
            "3sat" => Construction::ThreeSat,
            "subsetsum" => Construction::SubsetSum,
            _ => return Err(Error::Instance(format!("unknown construction `{s}`"))),
        })
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One predicate of a tester pattern.
#[derive(Clone, Debug)]
pub struct PredicateInfo {
    /// 1-based position in the tester.
    pub index: usize,
    pub family: String,
    pub label: String,
    pub gamma: Pattern,
    pub delta: Option<Pattern>,
    pub eta: Option<Pattern>,
    /// Regular constraints of the predicate's own variables.
    pub regular: RegularConstraintMap,
    /// Extra length fragment conjoined into this predicate's disjuncts.
    pub extra: Formula,
    /// Length condition of the predicate query (disjunction over the
    /// predicate's `x ≥ 2` choices with `extra`).
    pub local: Formula,
}

impl PredicateInfo {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = self.gamma.vars();
        if let Some(d) = &self.delta {
            out.extend(d.vars());
        }
        if let Some(e) = &self.eta {
            out.extend(e.vars());
        }
        out
    }
}

/// A generator pattern (`left`) and a tester pattern (`right`) over one
/// alphabet and mode, with the predicate table.
#[derive(Clone, Debug)]
pub struct ConstructionPair {
    pub construction: Construction,
    pub left: ConstrainedPattern,
    pub right: ConstrainedPattern,
    pub predicates: Vec<PredicateInfo>,
    /// Role name → variable name.
    pub distinguished: BTreeMap<String, String>,
    /// Role name → generator fragment, for roles that are not one variable.
    pub fragments: BTreeMap<String, Pattern>,
    pub automaton: Option<TwoCounterAutomaton>,
}

impl ConstructionPair {
    pub fn alphabet(&self) -> &Alphabet {
        self.left.alphabet()
    }

    pub fn predicate(&self, i: usize) -> Result<&PredicateInfo> {
        if i == 0 || i > self.predicates.len() {
            return Err(Error::UnknownPredicate(i));
        }
        Ok(&self.predicates[i - 1])
    }

    fn role<'a>(&'a self, r: &'a str) -> &'a str {
        self.distinguished.get(r).map(String::as_str).unwrap_or(r)
    }

    /// Variables of the tester that belong to no predicate.
    pub fn skeleton_vars(&self) -> BTreeSet<String> {
        let mut vars = self.right.vars();
        for p in &self.predicates {
            for v in p.vars() {
                vars.remove(&v);
            }
        }
        vars
    }

    /// Variables of predicate `p` other than the shared letter variables.
    pub fn own_vars(&self, p: &PredicateInfo) -> BTreeSet<String> {
        let shared: BTreeSet<&String> = self.distinguished.values().collect();
        p.vars().into_iter().filter(|v| !shared.contains(v)).collect()
    }

    /// Whether the own variables of the predicates are pairwise disjoint, with
    /// every own variable of predicate `i` living under `p{i}.`.
    pub fn namespaces_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.predicates.iter().all(|p| {
            let prefix = format!("p{}.", p.index);
            self.own_vars(p)
                .into_iter()
                .all(|v| v.starts_with(&prefix) && !v[prefix.len()..].contains('.') && seen.insert(v))
        })
    }
}

pub(crate) fn var(name: impl Into<String>) -> Symbol {
    Symbol::Var(name.into())
}

pub(crate) fn terms(w: &str) -> Vec<Symbol> {
    w.chars().map(Symbol::Term).collect()
}

/// Prefixes every variable of `p` with `p{i}.`; names already containing a
/// dot or listed in `reserved` are rejected.
pub(crate) fn namespaced(p: &Pattern, i: usize, reserved: &BTreeSet<String>) -> Result<Pattern> {
    let mut out = Vec::with_capacity(p.len());
    for s in p.symbols() {
        out.push(match s {
            Symbol::Var(v) => {
                if v.contains('.') || reserved.contains(v) {
                    return Err(Error::NamespaceCollision(v.clone()));
                }
                var(format!("p{i}.{v}"))
            }
            t => t.clone(),
        });
    }
    Pattern::new(out, p.alphabet())
}

fn image(h: &Substitution, v: &str) -> Result<String> {
    h.get(v).map(str::to_owned).ok_or_else(|| Error::MissingImage(v.to_owned()))
}

/// The conjunctive query behind predicate `i` for the generator substitution
/// `h`.
pub fn predicate_query(pair: &ConstructionPair, i: usize, h: &Substitution) -> Result<ConjunctiveQuery> {
    let p = pair.predicate(i)?;
    match pair.construction {
        Construction::AppB => {
            let a1 = image(h, pair.role("alpha1"))?;
            let a2 = image(h, pair.role("alpha2"))?;
            let eta_target = h.apply_fragment(&appb::z_block(pair))?;
            let mut pairs = vec![(p.gamma.clone(), a1)];
            if let Some(d) = &p.delta {
                pairs.push((d.clone(), a2));
            }
            if let Some(e) = &p.eta {
                pairs.push((e.clone(), eta_target));
            }
            ConjunctiveQuery::new(pairs, Formula::truth(), RegularConstraintMap::new(), pair.right.mode())
        }
        Construction::AppD => {
            let w = format!("0{}0", image(h, pair.role("alpha1"))?);
            ConjunctiveQuery::new(vec![(p.gamma.clone(), w)], p.local.clone(), p.regular.clone(), pair.right.mode())
        }
        Construction::AppC => {
            let ab = pair.alphabet();
            let x0 = var(pair.role("x_0"));
            let a1 = pair.left_fragment("alpha1")?;
            let a2 = pair.left_fragment("alpha2")?;
            let wrap = |f: &[Symbol]| {
                let mut s = vec![x0.clone()];
                s.extend_from_slice(f);
                s.push(x0.clone());
                s
            };
            let mut pairs = vec![(p.gamma.clone(), h.apply_fragment(&wrap(&a1))?)];
            if let Some(d) = &p.delta {
                pairs.push((d.clone(), h.apply_fragment(&wrap(&a2))?));
            }
            // Letter variables shared with the skeleton keep their images.
            let mut letter_vars: BTreeSet<String> = p.gamma.vars();
            if let Some(d) = &p.delta {
                letter_vars.extend(d.vars());
            }
            for v in appc::letter_vars(pair) {
                if letter_vars.contains(&v) {
                    pairs.push((Pattern::new(vec![var(&v)], ab)?, image(h, &v)?));
                }
            }
            ConjunctiveQuery::new(pairs, Formula::truth(), RegularConstraintMap::new(), pair.right.mode())
        }
        Construction::ThreeSat | Construction::SubsetSum => Err(Error::UnknownPredicate(i)),
    }
}

impl ConstructionPair {
    /// The generator-side fragment stored under a role (App C keeps its
    /// `α_1'`/`α_2'` as fragments of the left pattern).
    pub(crate) fn left_fragment(&self, role: &str) -> Result<Vec<Symbol>> {
        match self.fragments.get(role) {
            Some(p) => Ok(p.symbols().to_vec()),
            None => Ok(vec![var(self.role(role))]),
        }
    }
}

/// Whether `h` satisfies predicate `i`; returns the predicate-side morphism.
pub fn predicate_satisfied(pair: &ConstructionPair, i: usize, h: &Substitution) -> Result<Option<Substitution>> {
    let q = predicate_query(pair, i, h)?;
    Matcher::new().solve(&q)
}

/// First predicate satisfied by `h`, with its morphism.
pub fn first_satisfied(pair: &ConstructionPair, h: &Substitution) -> Result<Option<(usize, Substitution)>> {
    for i in 1..=pair.predicates.len() {
        if let Some(tau) = predicate_satisfied(pair, i, h)? {
            return Ok(Some((i, tau)));
        }
    }
    Ok(None)
}

/// Builds the tester-side substitution that reproduces `h(left)` from a
/// satisfied predicate `i` with morphism `tau`.
pub fn assemble_right(pair: &ConstructionPair, i: usize, h: &Substitution, tau: &Substitution) -> Result<Substitution> {
    pair.predicate(i)?;
    match pair.construction {
        Construction::AppB => appb::assemble(pair, i, h, tau),
        Construction::AppC => appc::assemble(pair, i, h, tau),
        Construction::AppD => appd::assemble(pair, i, h, tau),
        _ => Err(Error::UnknownPredicate(i)),
    }
}

/// The distinguished generator substitution for an accepting computation,
/// and the word it produces. `filler` overrides the length of `h(α_2)` in
/// the App B construction.
pub fn witness_counterexample(
    pair: &ConstructionPair,
    comp: &[Configuration],
    filler: Option<usize>,
) -> Result<(String, Substitution)> {
    let a = pair
        .automaton
        .as_ref()
        .ok_or_else(|| Error::Instance(format!("{} pairs carry no automaton", pair.construction)))?;
    check_computation(a, comp)?;
    let h = match pair.construction {
        Construction::AppB => appb::witness(pair, comp, filler)?,
        Construction::AppD => appd::witness(pair, comp)?,
        c => return Err(Error::Instance(format!("no witness for {c} pairs"))),
    };
    let w = h.apply(pair.left.pattern())?;
    Ok((w, h))
}

/// Sum of the three longest maximal runs of `c` in `w`.
pub fn three_longest_runs(w: &str, c: char) -> usize {
    let mut runs: Vec<usize> = Vec::new();
    let mut cur = 0;
    for x in w.chars() {
        if x == c {
            cur += 1;
        } else if cur > 0 {
            runs.push(cur);
            cur = 0;
        }
    }
    if cur > 0 {
        runs.push(cur);
    }
    runs.sort_unstable_by(|a, b| b.cmp(a));
    runs.iter().take(3).sum()
}
