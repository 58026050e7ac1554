//! Bounded language semantics: enumeration up to a length bound, bounded
//! inclusion and bounded equivalence.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::constraints::{feasible_assignments_bounded, LinearInequality, Rel};
use crate::error::{Error, Result};
use crate::matcher::Matcher;
use crate::pattern::{Alphabet, ConstrainedPattern, Mode, Symbol};
use crate::regular::{Dfa, FiniteAutomaton, Regex};

/// Which of the two compared languages a counterexample belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::A => "a",
            Side::B => "b",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundedVerdict {
    /// The relation holds for all words up to this length.
    Holds(usize),
    /// `word` belongs to `side` only.
    Counterexample { word: String, side: Side },
}

impl BoundedVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, BoundedVerdict::Holds(_))
    }
}

/// Shortlex order: by length, then letter by letter by code point.
pub fn word_order(a: &str, b: &str) -> Ordering {
    a.chars().count().cmp(&b.chars().count()).then_with(|| a.cmp(b))
}

/// Enumeration options: an optional word-shape filter and the matcher used for
/// membership queries.
#[derive(Clone, Debug, Default)]
pub struct LangOptions {
    pub shape: Option<Arc<Dfa>>,
    pub matcher: Matcher,
}

impl LangOptions {
    /// Restricts enumeration to words matching `regex` over `alphabet`.
    pub fn with_shape(mut self, regex: &str, alphabet: &Alphabet) -> Result<Self> {
        let fa = FiniteAutomaton::compile(&Regex::parse(regex)?, alphabet)?;
        self.shape = Some(Arc::new(fa.to_dfa()));
        Ok(self)
    }
}

/// All words of length at most `max_len` in `L(cp)`, in shortlex order.
pub fn enumerate_language(cp: &ConstrainedPattern, max_len: usize) -> Vec<String> {
    enumerate_language_with(cp, max_len, &LangOptions::default())
}

pub fn enumerate_language_with(cp: &ConstrainedPattern, max_len: usize, opts: &LangOptions) -> Vec<String> {
    let ab = cp.alphabet();
    let pat = cp.pattern();
    let terms = pat.terminal_count();
    if terms > max_len {
        return Vec::new();
    }
    let occ = pat.occurrences();
    let vars: Vec<String> = occ.keys().cloned().collect();
    let mut extra = Vec::new();
    if !vars.is_empty() {
        let t: Vec<(i64, &str)> = occ.iter().map(|(v, &c)| (c as i64, v.as_str())).collect();
        extra.push(LinearInequality::from_terms(&t, Rel::Le, (max_len - terms) as i64).expect("distinct variables"));
    }
    if cp.mode() == Mode::NE {
        extra.extend(vars.iter().map(|v| LinearInequality::var_ge(v, 1)));
    }
    let var_set = vars.iter().cloned().collect();

    let dfas: Vec<Option<(Arc<Dfa>, Vec<Vec<bool>>)>> = vars
        .iter()
        .map(|v| {
            cp.regular().get(v).map(|c| {
                let d = c.dfa();
                let reach = d
                    .completion_counts(max_len)
                    .into_iter()
                    .map(|row| row.into_iter().map(|n| n > 0).collect())
                    .collect();
                (d, reach)
            })
        })
        .collect();
    let syms: Vec<Sym> = pat
        .symbols()
        .iter()
        .map(|s| match s {
            Symbol::Term(c) => Sym::T(ab.index(*c).unwrap()),
            Symbol::Var(v) => Sym::V(vars.binary_search(v).unwrap()),
        })
        .collect();

    let mut out: BTreeSet<(usize, String)> = BTreeSet::new();
    let bound = (max_len - terms) as u64;
    for a in feasible_assignments_bounded(cp.length(), &var_set, bound, &extra) {
        let lens: Vec<usize> = vars.iter().map(|v| a[v] as usize).collect();
        let mut gen = Expander {
            syms: &syms,
            lens: &lens,
            dfas: &dfas,
            shape: opts.shape.as_deref(),
            k: ab.len() as u8,
            images: vec![None; vars.len()],
            word: Vec::new(),
            out: &mut out,
            ab,
        };
        let s0 = gen.shape.map(|d| d.start());
        gen.expand(0, s0);
    }
    out.into_iter().map(|(_, w)| w).collect()
}

/// The definitional form: filters all of `Σ^{≤max_len}` by membership.
pub fn enumerate_by_filter(cp: &ConstrainedPattern, max_len: usize) -> Vec<String> {
    let m = Matcher::new();
    all_words(cp.alphabet(), max_len).into_iter().filter(|w| m.membership(w, cp).is_some()).collect()
}

/// `Σ^{≤max_len}` in shortlex order.
pub fn all_words(ab: &Alphabet, max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * ab.len());
        for w in &layer {
            for &c in ab.letters() {
                let mut x = w.clone();
                x.push(c);
                next.push(x);
            }
        }
        next.sort();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[derive(Clone, Copy)]
enum Sym {
    T(u8),
    V(usize),
}

struct Expander<'a> {
    syms: &'a [Sym],
    lens: &'a [usize],
    dfas: &'a [Option<(Arc<Dfa>, Vec<Vec<bool>>)>],
    shape: Option<&'a Dfa>,
    k: u8,
    images: Vec<Option<Vec<u8>>>,
    word: Vec<u8>,
    out: &'a mut BTreeSet<(usize, String)>,
    ab: &'a Alphabet,
}

impl Expander<'_> {
    fn feed(&self, s: Option<u32>, letters: &[u8]) -> Option<Option<u32>> {
        match (self.shape, s) {
            (Some(d), Some(mut q)) => {
                for &a in letters {
                    q = d.step(q, a);
                }
                d.is_live(q).then_some(Some(q))
            }
            _ => Some(None),
        }
    }

    fn expand(&mut self, si: usize, shape: Option<u32>) {
        if si == self.syms.len() {
            if let (Some(d), Some(q)) = (self.shape, shape) {
                if !d.is_accepting(q) {
                    return;
                }
            }
            let w = self.ab.decode(&self.word);
            self.out.insert((self.word.len(), w));
            return;
        }
        match self.syms[si] {
            Sym::T(a) => {
                if let Some(s) = self.feed(shape, &[a]) {
                    self.word.push(a);
                    self.expand(si + 1, s);
                    self.word.pop();
                }
            }
            Sym::V(x) => {
                if let Some(img) = self.images[x].clone() {
                    if let Some(s) = self.feed(shape, &img) {
                        let n = self.word.len();
                        self.word.extend_from_slice(&img);
                        self.expand(si + 1, s);
                        self.word.truncate(n);
                    }
                    return;
                }
                let l = self.lens[x];
                let start = self.dfas[x].as_ref().map(|(d, _)| d.start());
                let mut img = Vec::with_capacity(l);
                self.image(si, x, l, start, shape, &mut img);
            }
        }
    }

    /// Generates the image of `x` letter by letter, then continues.
    fn image(&mut self, si: usize, x: usize, rem: usize, st: Option<u32>, shape: Option<u32>, img: &mut Vec<u8>) {
        if let (Some((_, reach)), Some(q)) = (&self.dfas[x], st) {
            if !reach[rem][q as usize] {
                return;
            }
        }
        if rem == 0 {
            let n = self.word.len();
            self.word.extend_from_slice(img);
            self.images[x] = Some(img.clone());
            self.expand(si + 1, shape);
            self.images[x] = None;
            self.word.truncate(n);
            return;
        }
        for a in 0..self.k {
            let nst = match (&self.dfas[x], st) {
                (Some((d, _)), Some(q)) => Some(d.step(q, a)),
                _ => None,
            };
            let Some(ns) = self.feed(shape, &[a]) else { continue };
            img.push(a);
            self.image(si, x, rem - 1, nst, ns, img);
            img.pop();
        }
    }
}

fn check_alphabets(a: &ConstrainedPattern, b: &ConstrainedPattern) -> Result<()> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    Ok(())
}

/// Whether every word of `L(a)` up to `max_len` lies in `L(b)`.
pub fn bounded_inclusion(a: &ConstrainedPattern, b: &ConstrainedPattern, max_len: usize) -> Result<BoundedVerdict> {
    bounded_inclusion_with(a, b, max_len, &LangOptions::default())
}

pub fn bounded_inclusion_with(
    a: &ConstrainedPattern,
    b: &ConstrainedPattern,
    max_len: usize,
    opts: &LangOptions,
) -> Result<BoundedVerdict> {
    check_alphabets(a, b)?;
    for w in enumerate_language_with(a, max_len, opts) {
        if opts.matcher.membership(&w, b).is_none() {
            return Ok(BoundedVerdict::Counterexample { word: w, side: Side::A });
        }
    }
    Ok(BoundedVerdict::Holds(max_len))
}

/// Bounded equality of `L(a)` and `L(b)`; the counterexample is the first
/// word of the symmetric difference in shortlex order.
pub fn bounded_equivalence(a: &ConstrainedPattern, b: &ConstrainedPattern, max_len: usize) -> Result<BoundedVerdict> {
    bounded_equivalence_with(a, b, max_len, &LangOptions::default())
}

pub fn bounded_equivalence_with(
    a: &ConstrainedPattern,
    b: &ConstrainedPattern,
    max_len: usize,
    opts: &LangOptions,
) -> Result<BoundedVerdict> {
    check_alphabets(a, b)?;
    let la = enumerate_language_with(a, max_len, opts);
    let lb = enumerate_language_with(b, max_len, opts);
    let (mut i, mut j) = (0, 0);
    while i < la.len() || j < lb.len() {
        let ord = match (la.get(i), lb.get(j)) {
            (Some(x), Some(y)) => word_order(x, y),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match ord {
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            Ordering::Less => return Ok(BoundedVerdict::Counterexample { word: la[i].clone(), side: Side::A }),
            Ordering::Greater => return Ok(BoundedVerdict::Counterexample { word: lb[j].clone(), side: Side::B }),
        }
    }
    Ok(BoundedVerdict::Holds(max_len))
}
