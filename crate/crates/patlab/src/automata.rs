//! Nondeterministic two-counter automata without input: one-step semantics,
//! bounded search for accepting computations, the block encoding of
//! computations and the good-structure test on encodings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::langops::word_order;
use crate::pattern::Alphabet;
use crate::regular::{Dfa, FiniteAutomaton, Regex};

/// Successor entry: target state and counter updates in `{-1, 0, 1}`.
pub type Move = (usize, i8, i8);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoCounterAutomaton {
    states: usize,
    finals: BTreeSet<usize>,
    delta: BTreeMap<(usize, u8, u8), BTreeSet<Move>>,
}

impl TwoCounterAutomaton {
    /// `delta` lists `(from, c1, c2, moves)`; repeated keys are merged.
    pub fn new(
        states: usize,
        finals: impl IntoIterator<Item = usize>,
        delta: impl IntoIterator<Item = (usize, u8, u8, Vec<Move>)>,
    ) -> Result<Self> {
        if states == 0 {
            return Err(Error::Automaton("at least one state is required".into()));
        }
        let finals: BTreeSet<usize> = finals.into_iter().collect();
        if let Some(&f) = finals.iter().find(|&&f| f >= states) {
            return Err(Error::Automaton(format!("final state {f} out of range")));
        }
        let mut map: BTreeMap<(usize, u8, u8), BTreeSet<Move>> = BTreeMap::new();
        for (from, c1, c2, moves) in delta {
            if from >= states {
                return Err(Error::Automaton(format!("state {from} out of range")));
            }
            if c1 > 1 || c2 > 1 {
                return Err(Error::Automaton(format!("zero flags must be 0 or 1, got ({c1},{c2})")));
            }
            for &(to, r1, r2) in &moves {
                if to >= states {
                    return Err(Error::Automaton(format!("state {to} out of range")));
                }
                if !(-1..=1).contains(&r1) || !(-1..=1).contains(&r2) {
                    return Err(Error::Automaton(format!("counter updates must be in {{-1,0,1}}, got ({r1},{r2})")));
                }
                if c1 == 0 && r1 == -1 {
                    return Err(Error::ZeroTestViolation { state: from, counter: 1 });
                }
                if c2 == 0 && r2 == -1 {
                    return Err(Error::ZeroTestViolation { state: from, counter: 2 });
                }
            }
            map.entry((from, c1, c2)).or_default().extend(moves);
        }
        map.retain(|_, v| !v.is_empty());
        Ok(TwoCounterAutomaton { states, finals, delta: map })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals.contains(&q)
    }

    pub fn moves(&self, q: usize, c1: u8, c2: u8) -> impl Iterator<Item = &Move> {
        self.delta.get(&(q, c1, c2)).into_iter().flatten()
    }

    pub fn has_move(&self, q: usize, c1: u8, c2: u8, m: Move) -> bool {
        self.delta.get(&(q, c1, c2)).is_some_and(|s| s.contains(&m))
    }

    /// Nonempty rows of the transition relation in key order.
    pub fn rows(&self) -> impl Iterator<Item = (&(usize, u8, u8), &BTreeSet<Move>)> {
        self.delta.iter()
    }

    /// Every zero-test-consistent tuple `(q_j, c1, c2, q_k, r1, r2)` that is not
    /// a transition.
    pub fn invalid_tuples(&self) -> Vec<(usize, u8, u8, usize, i8, i8)> {
        let mut out = Vec::new();
        for j in 0..self.states {
            for c1 in 0..=1u8 {
                for c2 in 0..=1u8 {
                    for k in 0..self.states {
                        for r1 in -1..=1i8 {
                            for r2 in -1..=1i8 {
                                if (c1 == 0 && r1 == -1) || (c2 == 0 && r2 == -1) {
                                    continue;
                                }
                                if !self.has_move(j, c1, c2, (k, r1, r2)) {
                                    out.push((j, c1, c2, k, r1, r2));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: usize,
    pub m1: u64,
    pub m2: u64,
}

impl Configuration {
    pub fn new(state: usize, m1: u64, m2: u64) -> Self {
        Configuration { state, m1, m2 }
    }

    pub fn initial() -> Self {
        Configuration::new(0, 0, 0)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q{},{},{})", self.state, self.m1, self.m2)
    }
}

pub type Computation = Vec<Configuration>;

/// One step of the automaton; the zero flags are read off the counters.
pub fn step(a: &TwoCounterAutomaton, cfg: Configuration) -> Vec<Configuration> {
    let c1 = (cfg.m1 > 0) as u8;
    let c2 = (cfg.m2 > 0) as u8;
    let mut out: BTreeSet<Configuration> = BTreeSet::new();
    for &(q, r1, r2) in a.moves(cfg.state, c1, c2) {
        let n1 = cfg.m1 as i64 + r1 as i64;
        let n2 = cfg.m2 as i64 + r2 as i64;
        if n1 >= 0 && n2 >= 0 {
            out.insert(Configuration::new(q, n1 as u64, n2 as u64));
        }
    }
    out.into_iter().collect()
}

/// All accepting computations with at most `max_steps` configurations and
/// counters bounded by `max_counter`, by length and then successor order.
pub fn bounded_accepting_computations(a: &TwoCounterAutomaton, max_steps: usize, max_counter: u64) -> Vec<Computation> {
    let mut out = Vec::new();
    let mut layer: Vec<Computation> = vec![vec![Configuration::initial()]];
    for n in 1..=max_steps {
        for c in &layer {
            if a.is_final(c.last().unwrap().state) {
                out.push(c.clone());
            }
        }
        if n == max_steps {
            break;
        }
        let mut next = Vec::new();
        for c in &layer {
            for s in step(a, *c.last().unwrap()) {
                if s.m1 <= max_counter && s.m2 <= max_counter {
                    let mut d = c.clone();
                    d.push(s);
                    next.push(d);
                }
            }
        }
        layer = next;
    }
    out
}

/// Checks initial configuration, consecutive steps and final state.
pub fn check_computation(a: &TwoCounterAutomaton, comp: &[Configuration]) -> Result<()> {
    let first = comp.first().ok_or_else(|| Error::InvalidComputation("empty computation".into()))?;
    if *first != Configuration::initial() {
        return Err(Error::InvalidComputation(format!("starts with {first}, not (q0,0,0)")));
    }
    for (i, w) in comp.windows(2).enumerate() {
        if w[0].state >= a.states() || !step(a, w[0]).contains(&w[1]) {
            return Err(Error::InvalidComputation(format!("step {} from {} to {} is not a transition", i + 1, w[0], w[1])));
        }
    }
    let last = comp.last().unwrap();
    if !a.is_final(last.state) {
        return Err(Error::InvalidComputation(format!("ends in non-final {last}")));
    }
    Ok(())
}

pub fn is_accepting_computation(a: &TwoCounterAutomaton, comp: &[Configuration]) -> bool {
    check_computation(a, comp).is_ok()
}

/// Offsets of the block encoding: state `q_j` is `0^{x+j}`, counter value `m`
/// is `0^{c+y·m}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodingParams {
    pub x: u64,
    pub c: u64,
    pub y: u64,
}

impl Default for EncodingParams {
    fn default() -> Self {
        EncodingParams { x: 1, c: 1, y: 1 }
    }
}

impl EncodingParams {
    pub fn new(x: u64, c: u64, y: u64) -> Result<Self> {
        if x == 0 || c == 0 || y == 0 {
            return Err(Error::Automaton("encoding parameters must be at least 1".into()));
        }
        Ok(EncodingParams { x, c, y })
    }
}

fn zeros(n: u64) -> String {
    "0".repeat(n as usize)
}

pub fn encode_configuration(p: EncodingParams, cfg: Configuration) -> String {
    format!("{}#{}#{}", zeros(p.x + cfg.state as u64), zeros(p.c + p.y * cfg.m1), zeros(p.c + p.y * cfg.m2))
}

/// `## enc(C_1) ## ... ## enc(C_n) ##`.
pub fn encode_computation(p: EncodingParams, comp: &[Configuration]) -> String {
    let mut w = String::from("##");
    for c in comp {
        w.push_str(&encode_configuration(p, *c));
        w.push_str("##");
    }
    w
}

pub fn decode_computation(p: EncodingParams, w: &str) -> Result<Computation> {
    let inner = w
        .strip_prefix("##")
        .and_then(|r| r.strip_suffix("##"))
        .filter(|r| !r.is_empty())
        .ok_or_else(|| Error::Decode("expected ## ... ##".into()))?;
    let mut out = Vec::new();
    for block in inner.split("##") {
        let parts: Vec<&str> = block.split('#').collect();
        if parts.len() != 3 || parts.iter().any(|s| s.is_empty() || s.chars().any(|c| c != '0')) {
            return Err(Error::Decode(format!("malformed configuration `{block}`")));
        }
        let n: Vec<u64> = parts.iter().map(|s| s.len() as u64).collect();
        if n[0] < p.x {
            return Err(Error::Decode(format!("state block too short in `{block}`")));
        }
        let counter = |k: u64| -> Result<u64> {
            if k < p.c || !(k - p.c).is_multiple_of(p.y) {
                return Err(Error::Decode(format!("counter block of length {k} in `{block}`")));
            }
            Ok((k - p.c) / p.y)
        };
        out.push(Configuration::new((n[0] - p.x) as usize, counter(n[1])?, counter(n[2])?));
    }
    Ok(out)
}

/// Encodings of the bounded accepting computations, deduplicated, shortlex.
pub fn valc_bounded(a: &TwoCounterAutomaton, p: EncodingParams, max_steps: usize, max_counter: u64) -> Vec<String> {
    let mut v: Vec<String> =
        bounded_accepting_computations(a, max_steps, max_counter).iter().map(|c| encode_computation(p, c)).collect();
    v.sort_by(|a, b| word_order(a, b));
    v.dedup();
    v
}

/// Counter-block variant of the good-structure language.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CounterBlocks {
    /// `0⁺`, which admits the initial configuration's single-letter blocks.
    #[default]
    OnePlus,
    /// `00⁺`.
    TwoPlus,
}

impl CounterBlocks {
    pub fn regex(self) -> &'static str {
        match self {
            CounterBlocks::OnePlus => "(##0+#0+#0+)+##",
            CounterBlocks::TwoPlus => "(##0+#00+#00+)+##",
        }
    }
}

fn good_structure_dfa(v: CounterBlocks) -> &'static Dfa {
    static ONE: OnceLock<Dfa> = OnceLock::new();
    static TWO: OnceLock<Dfa> = OnceLock::new();
    let cell = match v {
        CounterBlocks::OnePlus => &ONE,
        CounterBlocks::TwoPlus => &TWO,
    };
    cell.get_or_init(|| {
        let r = Regex::parse(v.regex()).expect("fixed regex");
        FiniteAutomaton::compile(&r, &Alphabet::binary()).expect("binary letters").to_dfa()
    })
}

/// Membership in `(##0⁺#0⁺#0⁺)⁺##`.
pub fn is_good_structure(w: &str) -> bool {
    is_good_structure_with(w, CounterBlocks::OnePlus)
}

pub fn is_good_structure_with(w: &str, v: CounterBlocks) -> bool {
    match Alphabet::binary().encode(w) {
        Ok(idx) => good_structure_dfa(v).accepts(&idx),
        Err(_) => false,
    }
}
