//! Independent oracles shared by the integration tests. None of them call
//! the matcher or the automaton compiler.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use patlab::constraints::evaluate;
use patlab::pattern::{ConstrainedPattern, Mode, Symbol};

/// Every word over `letters` of length at most `n`, shortest first.
pub fn words_upto(letters: &[char], n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for &c in letters {
                let mut v = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// The language of `cp` up to `max_len` by trying every substitution whose
/// images are at most `max_len` long. Regular constraints are checked through
/// the constraint objects themselves.
pub fn language_by_substitutions(cp: &ConstrainedPattern, max_len: usize) -> BTreeSet<String> {
    let vars: Vec<String> = cp.vars().into_iter().collect();
    let letters = cp.alphabet().letters().to_vec();
    let min = if cp.mode() == Mode::NE { 1 } else { 0 };
    let pool: Vec<String> = words_upto(&letters, max_len).into_iter().filter(|w| w.chars().count() >= min).collect();
    let mut out = BTreeSet::new();
    let mut pick = vec![0usize; vars.len()];
    loop {
        let h: BTreeMap<&str, &str> = vars.iter().zip(&pick).map(|(v, &i)| (v.as_str(), pool[i].as_str())).collect();
        let mut w = String::new();
        for s in cp.pattern().symbols() {
            match s {
                Symbol::Term(c) => w.push(*c),
                Symbol::Var(v) => w.push_str(h[v.as_str()]),
            }
        }
        if w.chars().count() <= max_len {
            let lens: BTreeMap<String, u64> = h.iter().map(|(k, v)| (k.to_string(), v.chars().count() as u64)).collect();
            let regular_ok = h.iter().all(|(k, v)| cp.regular().get(k).is_none_or(|c| c.accepts(v)));
            if regular_ok && evaluate(cp.length(), &lens).unwrap() {
                out.insert(w);
            }
        }
        let mut k = 0;
        loop {
            if k == pick.len() {
                return out;
            }
            pick[k] += 1;
            if pick[k] < pool.len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug)]
enum Re {
    Empty,
    Lit(char),
    Class(Vec<char>),
    Cat(Vec<Re>),
    Alt(Vec<Re>),
    Star(Box<Re>),
    Plus(Box<Re>),
}

/// A small backtracking regex matcher: literals, `|`, `*`, `+`, groups and
/// `[...]` classes.
pub struct NaiveRegex(Re);

impl NaiveRegex {
    pub fn new(src: &str) -> Self {
        let cs: Vec<char> = src.chars().collect();
        let mut i = 0;
        let r = alt(&cs, &mut i);
        assert_eq!(i, cs.len(), "trailing input in {src}");
        NaiveRegex(r)
    }

    pub fn is_match(&self, w: &str) -> bool {
        let cs: Vec<char> = w.chars().collect();
        ends(&self.0, &cs, 0).contains(&cs.len())
    }
}

fn alt(cs: &[char], i: &mut usize) -> Re {
    let mut arms = vec![cat(cs, i)];
    while *i < cs.len() && cs[*i] == '|' {
        *i += 1;
        arms.push(cat(cs, i));
    }
    if arms.len() == 1 {
        arms.pop().unwrap()
    } else {
        Re::Alt(arms)
    }
}

fn cat(cs: &[char], i: &mut usize) -> Re {
    let mut items = Vec::new();
    while *i < cs.len() && cs[*i] != '|' && cs[*i] != ')' {
        let mut atom = match cs[*i] {
            '(' => {
                *i += 1;
                let r = alt(cs, i);
                assert_eq!(cs[*i], ')');
                *i += 1;
                r
            }
            '[' => {
                let close = cs[*i..].iter().position(|&c| c == ']').unwrap() + *i;
                let set = cs[*i + 1..close].to_vec();
                *i = close + 1;
                Re::Class(set)
            }
            c => {
                *i += 1;
                Re::Lit(c)
            }
        };
        while *i < cs.len() && (cs[*i] == '*' || cs[*i] == '+') {
            atom = if cs[*i] == '*' { Re::Star(Box::new(atom)) } else { Re::Plus(Box::new(atom)) };
            *i += 1;
        }
        items.push(atom);
    }
    if items.is_empty() {
        Re::Empty
    } else {
        Re::Cat(items)
    }
}

fn ends(r: &Re, w: &[char], at: usize) -> BTreeSet<usize> {
    match r {
        Re::Empty => BTreeSet::from([at]),
        Re::Lit(c) => (w.get(at) == Some(c)).then_some(at + 1).into_iter().collect(),
        Re::Class(s) => w.get(at).filter(|c| s.contains(c)).map(|_| at + 1).into_iter().collect(),
        Re::Cat(items) => {
            let mut cur = BTreeSet::from([at]);
            for it in items {
                cur = cur.iter().flat_map(|&p| ends(it, w, p)).collect();
            }
            cur
        }
        Re::Alt(arms) => arms.iter().flat_map(|a| ends(a, w, at)).collect(),
        Re::Star(inner) => {
            let mut seen = BTreeSet::from([at]);
            let mut todo = vec![at];
            while let Some(p) = todo.pop() {
                for q in ends(inner, w, p) {
                    if seen.insert(q) {
                        todo.push(q);
                    }
                }
            }
            seen
        }
        Re::Plus(inner) => {
            let first = ends(inner, w, at);
            let mut seen = first.clone();
            let mut todo: Vec<usize> = first.into_iter().collect();
            while let Some(p) = todo.pop() {
                for q in ends(inner, w, p) {
                    if seen.insert(q) {
                        todo.push(q);
                    }
                }
            }
            seen
        }
    }
}

/// Satisfiability of a clause list by trying every assignment.
pub fn sat(clauses: &[[i64; 3]]) -> bool {
    let n = clauses.iter().flatten().map(|l| l.unsigned_abs()).max().unwrap_or(0) as u32;
    (0..1u64 << n).any(|bits| {
        clauses.iter().all(|c| c.iter().any(|&l| ((bits >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0)))
    })
}

/// Whether some subset of `s` sums to `t`.
pub fn subset_sum(s: &[u64], t: u64) -> bool {
    (0..1u64 << s.len()).any(|bits| s.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, x)| x).sum::<u64>() == t)
}
