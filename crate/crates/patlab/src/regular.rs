//! Regular constraints: regex syntax, Thompson construction, subset
//! construction and the boolean operations on finite automata.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::pattern::Alphabet;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Regex {
    Empty,
    Epsilon,
    Lit(char),
    /// Any single letter from the listed set.
    Class(Vec<char>),
    /// Any single letter of the alphabet (`.`).
    Any,
    Concat(Vec<Regex>),
    Union(Vec<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Repeat(Box<Regex>, u32),
}

const META: &str = "|*+?(){}[].\\";

impl Regex {
    /// Parses literals, `|`, `*`, `+`, `?`, `(...)`, `[0#]`, `.`, `{k}`, `{k,}`,
    /// `ε` and `∅`. A backslash escapes a metacharacter.
    pub fn parse(s: &str) -> Result<Regex> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = RegexParser { chars, pos: 0 };
        let r = p.union()?;
        if p.pos != p.chars.len() {
            return Err(Error::RegexSyntax(format!("unexpected `{}` at {}", p.chars[p.pos], p.pos)));
        }
        Ok(r)
    }

    /// Letters named explicitly by the expression.
    pub fn letters(&self) -> Vec<char> {
        let mut out = Vec::new();
        self.collect_letters(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_letters(&self, out: &mut Vec<char>) {
        match self {
            Regex::Lit(c) => out.push(*c),
            Regex::Class(cs) => out.extend(cs),
            Regex::Concat(v) | Regex::Union(v) => v.iter().for_each(|r| r.collect_letters(out)),
            Regex::Star(r) | Regex::Plus(r) | Regex::Repeat(r, _) => r.collect_letters(out),
            _ => {}
        }
    }
}

fn write_escaped(f: &mut fmt::Formatter<'_>, c: char) -> fmt::Result {
    if META.contains(c) || c == 'ε' || c == '∅' {
        write!(f, "\\{c}")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regex::Empty => write!(f, "∅"),
            Regex::Epsilon => write!(f, "ε"),
            Regex::Lit(c) => write_escaped(f, *c),
            Regex::Class(cs) => {
                write!(f, "[")?;
                for c in cs {
                    write_escaped(f, *c)?;
                }
                write!(f, "]")
            }
            Regex::Any => write!(f, "."),
            Regex::Concat(v) => {
                for r in v {
                    if matches!(r, Regex::Union(_)) {
                        write!(f, "({r})")?;
                    } else {
                        write!(f, "{r}")?;
                    }
                }
                Ok(())
            }
            Regex::Union(v) => {
                for (i, r) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    write!(f, "{r}")?;
                }
                Ok(())
            }
            Regex::Star(r) | Regex::Plus(r) | Regex::Repeat(r, _) => {
                if matches!(**r, Regex::Lit(_) | Regex::Class(_) | Regex::Any | Regex::Epsilon | Regex::Empty) {
                    write!(f, "{r}")?;
                } else {
                    write!(f, "({r})")?;
                }
                match self {
                    Regex::Star(_) => write!(f, "*"),
                    Regex::Plus(_) => write!(f, "+"),
                    Regex::Repeat(_, k) => write!(f, "{{{k}}}"),
                    _ => unreachable!(),
                }
            }
        }
    }
}

struct RegexParser {
    chars: Vec<char>,
    pos: usize,
}

impl RegexParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn union(&mut self) -> Result<Regex> {
        let mut alts = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            alts.push(self.concat()?);
        }
        Ok(if alts.len() == 1 { alts.pop().unwrap() } else { Regex::Union(alts) })
    }

    fn concat(&mut self) -> Result<Regex> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            parts.push(self.postfix()?);
        }
        Ok(match parts.len() {
            0 => Regex::Epsilon,
            1 => parts.pop().unwrap(),
            _ => Regex::Concat(parts),
        })
    }

    fn number(&mut self) -> Result<u32> {
        let st = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[st..self.pos].iter().collect();
        s.parse().map_err(|_| Error::RegexSyntax(format!("expected a number at {st}")))
    }

    fn postfix(&mut self) -> Result<Regex> {
        let mut r = self.atom()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    r = Regex::Star(Box::new(r));
                }
                Some('+') => {
                    self.pos += 1;
                    r = Regex::Plus(Box::new(r));
                }
                Some('?') => {
                    self.pos += 1;
                    r = Regex::Union(vec![r, Regex::Epsilon]);
                }
                Some('{') => {
                    self.pos += 1;
                    let k = self.number()?;
                    let open = if self.peek() == Some(',') {
                        self.pos += 1;
                        true
                    } else {
                        false
                    };
                    if self.peek() != Some('}') {
                        return Err(Error::RegexSyntax("expected `}`".into()));
                    }
                    self.pos += 1;
                    let rep = Regex::Repeat(Box::new(r.clone()), k);
                    r = if open { Regex::Concat(vec![rep, Regex::Star(Box::new(r))]) } else { rep };
                }
                _ => return Ok(r),
            }
        }
    }

    fn atom(&mut self) -> Result<Regex> {
        let c = self.peek().ok_or_else(|| Error::RegexSyntax("unexpected end".into()))?;
        self.pos += 1;
        match c {
            '(' => {
                let r = self.union()?;
                if self.peek() != Some(')') {
                    return Err(Error::RegexSyntax("missing `)`".into()));
                }
                self.pos += 1;
                Ok(r)
            }
            '[' => {
                let mut cs = Vec::new();
                loop {
                    match self.peek() {
                        None => return Err(Error::RegexSyntax("missing `]`".into())),
                        Some(']') => {
                            self.pos += 1;
                            break;
                        }
                        Some('\\') => {
                            self.pos += 1;
                            let e = self.peek().ok_or_else(|| Error::RegexSyntax("dangling escape".into()))?;
                            self.pos += 1;
                            cs.push(e);
                        }
                        Some(x) => {
                            self.pos += 1;
                            cs.push(x);
                        }
                    }
                }
                if cs.is_empty() {
                    return Ok(Regex::Empty);
                }
                Ok(Regex::Class(cs))
            }
            '.' => Ok(Regex::Any),
            'ε' => Ok(Regex::Epsilon),
            '∅' => Ok(Regex::Empty),
            '\\' => {
                let e = self.peek().ok_or_else(|| Error::RegexSyntax("dangling escape".into()))?;
                self.pos += 1;
                Ok(Regex::Lit(e))
            }
            c if META.contains(c) => Err(Error::RegexSyntax(format!("unexpected `{c}` at {}", self.pos - 1))),
            c => Ok(Regex::Lit(c)),
        }
    }
}

// ---------------------------------------------------------------------------

/// An ε-free finite automaton over an explicit alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAutomaton {
    alphabet: Alphabet,
    /// `trans[state][letter]` lists successor states, sorted and deduplicated.
    trans: Vec<Vec<Vec<u32>>>,
    initial: Vec<u32>,
    accepting: Vec<bool>,
}

struct EpsNfa {
    eps: Vec<Vec<u32>>,
    edges: Vec<Vec<(u8, u32)>>,
}

impl EpsNfa {
    fn add(&mut self) -> u32 {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        (self.eps.len() - 1) as u32
    }

    fn build(&mut self, r: &Regex, ab: &Alphabet) -> Result<(u32, u32)> {
        let letter = |c: char| ab.index(c).ok_or(Error::ForeignLetter(c));
        Ok(match r {
            Regex::Empty => (self.add(), self.add()),
            Regex::Epsilon => {
                let s = self.add();
                let e = self.add();
                self.eps[s as usize].push(e);
                (s, e)
            }
            Regex::Lit(c) => {
                let a = letter(*c)?;
                let s = self.add();
                let e = self.add();
                self.edges[s as usize].push((a, e));
                (s, e)
            }
            Regex::Class(cs) => {
                let s = self.add();
                let e = self.add();
                for c in cs {
                    let a = letter(*c)?;
                    self.edges[s as usize].push((a, e));
                }
                (s, e)
            }
            Regex::Any => {
                let s = self.add();
                let e = self.add();
                for a in 0..ab.len() {
                    self.edges[s as usize].push((a as u8, e));
                }
                (s, e)
            }
            Regex::Concat(v) => {
                let s = self.add();
                let mut cur = s;
                for part in v {
                    let (ps, pe) = self.build(part, ab)?;
                    self.eps[cur as usize].push(ps);
                    cur = pe;
                }
                (s, cur)
            }
            Regex::Union(v) => {
                let s = self.add();
                let e = self.add();
                for part in v {
                    let (ps, pe) = self.build(part, ab)?;
                    self.eps[s as usize].push(ps);
                    self.eps[pe as usize].push(e);
                }
                (s, e)
            }
            Regex::Star(inner) | Regex::Plus(inner) => {
                let s = self.add();
                let e = self.add();
                let (ps, pe) = self.build(inner, ab)?;
                self.eps[s as usize].push(ps);
                self.eps[pe as usize].push(ps);
                self.eps[pe as usize].push(e);
                if matches!(r, Regex::Star(_)) {
                    self.eps[s as usize].push(e);
                }
                (s, e)
            }
            Regex::Repeat(inner, k) => {
                let s = self.add();
                let mut cur = s;
                for _ in 0..*k {
                    let (ps, pe) = self.build(inner, ab)?;
                    self.eps[cur as usize].push(ps);
                    cur = pe;
                }
                (s, cur)
            }
        })
    }

    fn closure(&self, s: u32) -> Vec<u32> {
        let mut seen = vec![false; self.eps.len()];
        let mut stack = vec![s];
        let mut out = Vec::new();
        seen[s as usize] = true;
        while let Some(q) = stack.pop() {
            out.push(q);
            for &t in &self.eps[q as usize] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn sorted_dedup(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v.dedup();
    v
}

impl FiniteAutomaton {
    /// Thompson construction followed by ε-elimination and trimming.
    pub fn compile(r: &Regex, alphabet: &Alphabet) -> Result<FiniteAutomaton> {
        let mut e = EpsNfa { eps: Vec::new(), edges: Vec::new() };
        let (start, end) = e.build(r, alphabet)?;
        let n = e.eps.len();
        let k = alphabet.len();
        let closures: Vec<Vec<u32>> = (0..n as u32).map(|s| e.closure(s)).collect();
        let mut trans = vec![vec![Vec::new(); k]; n];
        let mut accepting = vec![false; n];
        for s in 0..n {
            for &p in &closures[s] {
                if p == end {
                    accepting[s] = true;
                }
                for &(a, t) in &e.edges[p as usize] {
                    trans[s][a as usize].extend(closures[t as usize].iter().copied());
                }
            }
            for row in trans[s].iter_mut() {
                *row = sorted_dedup(std::mem::take(row));
            }
        }
        let fa = FiniteAutomaton { alphabet: alphabet.clone(), trans, initial: vec![start], accepting };
        Ok(fa.trim())
    }

    /// Automaton for a finite word list.
    pub fn from_words<S: AsRef<str>>(alphabet: &Alphabet, words: &[S]) -> Result<FiniteAutomaton> {
        // a trie
        let k = alphabet.len();
        let mut trans: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); k]];
        let mut accepting = vec![false];
        for w in words {
            let mut s = 0usize;
            for c in w.as_ref().chars() {
                let a = alphabet.index(c).ok_or(Error::ForeignLetter(c))? as usize;
                s = match trans[s][a].first() {
                    Some(&t) => t as usize,
                    None => {
                        trans.push(vec![Vec::new(); k]);
                        accepting.push(false);
                        let t = trans.len() - 1;
                        trans[s][a].push(t as u32);
                        t
                    }
                };
            }
            accepting[s] = true;
        }
        Ok(FiniteAutomaton { alphabet: alphabet.clone(), trans, initial: vec![0], accepting })
    }

    /// The automaton accepting all of Σ*.
    pub fn universal(alphabet: &Alphabet) -> FiniteAutomaton {
        let k = alphabet.len();
        FiniteAutomaton { alphabet: alphabet.clone(), trans: vec![vec![vec![0]; k]], initial: vec![0], accepting: vec![true] }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.trans.len()
    }

    pub fn initial(&self) -> &[u32] {
        &self.initial
    }

    pub fn is_accepting(&self, s: u32) -> bool {
        self.accepting[s as usize]
    }

    pub fn successors(&self, s: u32, letter: u8) -> &[u32] {
        &self.trans[s as usize][letter as usize]
    }

    pub fn is_deterministic(&self) -> bool {
        self.initial.len() == 1 && self.trans.iter().all(|row| row.iter().all(|t| t.len() <= 1))
    }

    pub fn is_complete(&self) -> bool {
        self.is_deterministic() && self.trans.iter().all(|row| row.iter().all(|t| t.len() == 1))
    }

    /// Membership; a letter outside the alphabet rejects.
    pub fn accepts(&self, w: &str) -> bool {
        match self.alphabet.encode(w) {
            Ok(idx) => self.accepts_indices(&idx),
            Err(_) => false,
        }
    }

    pub fn accepts_indices(&self, w: &[u8]) -> bool {
        let n = self.states();
        let mut cur = vec![false; n];
        for &s in &self.initial {
            cur[s as usize] = true;
        }
        for &a in w {
            let mut next = vec![false; n];
            let mut any = false;
            for s in 0..n {
                if cur[s] {
                    for &t in &self.trans[s][a as usize] {
                        next[t as usize] = true;
                        any = true;
                    }
                }
            }
            if !any {
                return false;
            }
            cur = next;
        }
        (0..n).any(|s| cur[s] && self.accepting[s])
    }

    /// Keeps the states that are reachable and co-reachable.
    pub fn trim(&self) -> FiniteAutomaton {
        let n = self.states();
        let mut reach = vec![false; n];
        let mut stack: Vec<u32> = self.initial.clone();
        for &s in &stack {
            reach[s as usize] = true;
        }
        while let Some(s) = stack.pop() {
            for row in &self.trans[s as usize] {
                for &t in row {
                    if !reach[t as usize] {
                        reach[t as usize] = true;
                        stack.push(t);
                    }
                }
            }
        }
        let co = self.coreachable();
        let keep: Vec<bool> = (0..n).map(|s| reach[s] && co[s]).collect();
        let mut map = vec![u32::MAX; n];
        let mut next = 0u32;
        for s in 0..n {
            if keep[s] {
                map[s] = next;
                next += 1;
            }
        }
        if next == 0 {
            return FiniteAutomaton::empty(&self.alphabet);
        }
        let mut trans = Vec::with_capacity(next as usize);
        let mut accepting = Vec::with_capacity(next as usize);
        for s in 0..n {
            if !keep[s] {
                continue;
            }
            trans.push(
                self.trans[s]
                    .iter()
                    .map(|row| row.iter().filter(|&&t| keep[t as usize]).map(|&t| map[t as usize]).collect())
                    .collect(),
            );
            accepting.push(self.accepting[s]);
        }
        let initial = self.initial.iter().filter(|&&s| keep[s as usize]).map(|&s| map[s as usize]).collect();
        FiniteAutomaton { alphabet: self.alphabet.clone(), trans, initial, accepting }
    }

    fn coreachable(&self) -> Vec<bool> {
        let n = self.states();
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
        for s in 0..n {
            for row in &self.trans[s] {
                for &t in row {
                    rev[t as usize].push(s as u32);
                }
            }
        }
        let mut co = self.accepting.clone();
        let mut stack: Vec<u32> = (0..n as u32).filter(|&s| co[s as usize]).collect();
        while let Some(s) = stack.pop() {
            for &p in &rev[s as usize] {
                if !co[p as usize] {
                    co[p as usize] = true;
                    stack.push(p);
                }
            }
        }
        co
    }

    pub fn empty(alphabet: &Alphabet) -> FiniteAutomaton {
        FiniteAutomaton {
            alphabet: alphabet.clone(),
            trans: vec![vec![Vec::new(); alphabet.len()]],
            initial: vec![0],
            accepting: vec![false],
        }
    }

    pub fn is_empty(&self) -> bool {
        let t = self.trim();
        !t.accepting.iter().any(|&a| a)
    }

    /// Subset construction; the result is deterministic and complete.
    pub fn determinize(&self) -> FiniteAutomaton {
        let k = self.alphabet.len();
        let start = sorted_dedup(self.initial.clone());
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut sets: Vec<Vec<u32>> = Vec::new();
        let mut queue = VecDeque::new();
        ids.insert(start.clone(), 0);
        sets.push(start);
        queue.push_back(0u32);
        let mut trans: Vec<Vec<Vec<u32>>> = Vec::new();
        while let Some(id) = queue.pop_front() {
            let set = sets[id as usize].clone();
            let mut row = Vec::with_capacity(k);
            for a in 0..k {
                let mut tgt: Vec<u32> = Vec::new();
                for &s in &set {
                    tgt.extend_from_slice(&self.trans[s as usize][a]);
                }
                let tgt = sorted_dedup(tgt);
                let tid = match ids.get(&tgt) {
                    Some(&t) => t,
                    None => {
                        let t = sets.len() as u32;
                        ids.insert(tgt.clone(), t);
                        sets.push(tgt);
                        queue.push_back(t);
                        t
                    }
                };
                row.push(vec![tid]);
            }
            if trans.len() <= id as usize {
                trans.resize(id as usize + 1, Vec::new());
            }
            trans[id as usize] = row;
        }
        let accepting = sets.iter().map(|set| set.iter().any(|&s| self.accepting[s as usize])).collect();
        FiniteAutomaton { alphabet: self.alphabet.clone(), trans, initial: vec![0], accepting }
    }

    /// Complement with respect to Σ* of the automaton's alphabet.
    pub fn complement(&self) -> FiniteAutomaton {
        let mut d = if self.is_complete() { self.clone() } else { self.determinize() };
        for a in d.accepting.iter_mut() {
            *a = !*a;
        }
        d
    }

    fn check_alphabet(&self, other: &FiniteAutomaton) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    pub fn intersect(&self, other: &FiniteAutomaton) -> Result<FiniteAutomaton> {
        self.check_alphabet(other)?;
        let k = self.alphabet.len();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut initial = Vec::new();
        for &a in &self.initial {
            for &b in &other.initial {
                let id = pairs.len() as u32;
                ids.insert((a, b), id);
                pairs.push((a, b));
                initial.push(id);
            }
        }
        let mut trans: Vec<Vec<Vec<u32>>> = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (a, b) = pairs[i];
            let mut row = Vec::with_capacity(k);
            for x in 0..k {
                let mut tgt = Vec::new();
                for &ta in &self.trans[a as usize][x] {
                    for &tb in &other.trans[b as usize][x] {
                        let id = *ids.entry((ta, tb)).or_insert_with(|| {
                            pairs.push((ta, tb));
                            (pairs.len() - 1) as u32
                        });
                        tgt.push(id);
                    }
                }
                row.push(sorted_dedup(tgt));
            }
            trans.push(row);
            i += 1;
        }
        let accepting =
            pairs.iter().map(|&(a, b)| self.accepting[a as usize] && other.accepting[b as usize]).collect();
        Ok(FiniteAutomaton { alphabet: self.alphabet.clone(), trans, initial, accepting }.trim())
    }

    pub fn union(&self, other: &FiniteAutomaton) -> Result<FiniteAutomaton> {
        self.check_alphabet(other)?;
        let off = self.states() as u32;
        let mut trans = self.trans.clone();
        for row in &other.trans {
            trans.push(row.iter().map(|t| t.iter().map(|&s| s + off).collect()).collect());
        }
        let mut initial = self.initial.clone();
        initial.extend(other.initial.iter().map(|&s| s + off));
        let mut accepting = self.accepting.clone();
        accepting.extend_from_slice(&other.accepting);
        Ok(FiniteAutomaton { alphabet: self.alphabet.clone(), trans, initial, accepting })
    }

    pub fn concat(&self, other: &FiniteAutomaton) -> Result<FiniteAutomaton> {
        self.check_alphabet(other)?;
        let k = self.alphabet.len();
        let off = self.states() as u32;
        let b_eps = other.initial.iter().any(|&s| other.accepting[s as usize]);
        let a_eps = self.initial.iter().any(|&s| self.accepting[s as usize]);
        let mut trans = Vec::with_capacity(self.states() + other.states());
        let mut accepting = Vec::new();
        for s in 0..self.states() {
            let mut row = self.trans[s].clone();
            if self.accepting[s] {
                for (x, cell) in row.iter_mut().enumerate().take(k) {
                    for &i in &other.initial {
                        cell.extend(other.trans[i as usize][x].iter().map(|&t| t + off));
                    }
                    *cell = sorted_dedup(std::mem::take(cell));
                }
            }
            trans.push(row);
            accepting.push(self.accepting[s] && b_eps);
        }
        for s in 0..other.states() {
            trans.push(other.trans[s].iter().map(|t| t.iter().map(|&q| q + off).collect()).collect());
            accepting.push(other.accepting[s]);
        }
        let mut initial = self.initial.clone();
        if a_eps {
            initial.extend(other.initial.iter().map(|&s| s + off));
        }
        Ok(FiniteAutomaton { alphabet: self.alphabet.clone(), trans, initial, accepting }.trim())
    }

    /// Dense deterministic form used by the search loops.
    pub fn to_dfa(&self) -> Dfa {
        let d = if self.is_complete() { self.clone() } else { self.determinize() };
        let k = d.alphabet.len();
        let n = d.states();
        let mut trans = Vec::with_capacity(n * k);
        for s in 0..n {
            for a in 0..k {
                trans.push(d.trans[s][a][0]);
            }
        }
        let live = d.coreachable();
        Dfa { k, trans, accepting: d.accepting.clone(), live, start: d.initial[0] }
    }
}

/// A complete DFA in table form, with the set of states that can still reach
/// an accepting state.
#[derive(Clone, Debug)]
pub struct Dfa {
    k: usize,
    trans: Vec<u32>,
    accepting: Vec<bool>,
    live: Vec<bool>,
    start: u32,
}

impl Dfa {
    pub fn start(&self) -> u32 {
        self.start
    }

    #[inline]
    pub fn step(&self, s: u32, a: u8) -> u32 {
        self.trans[s as usize * self.k + a as usize]
    }

    #[inline]
    pub fn is_accepting(&self, s: u32) -> bool {
        self.accepting[s as usize]
    }

    #[inline]
    pub fn is_live(&self, s: u32) -> bool {
        self.live[s as usize]
    }

    pub fn states(&self) -> usize {
        self.accepting.len()
    }

    pub fn letters(&self) -> usize {
        self.k
    }

    pub fn run(&self, w: &[u8]) -> u32 {
        w.iter().fold(self.start, |s, &a| self.step(s, a))
    }

    pub fn accepts(&self, w: &[u8]) -> bool {
        self.is_accepting(self.run(w))
    }

    /// `out[l]` is true when some word of length `l` (for `l <= n`) is accepted.
    pub fn accepted_lengths(&self, n: usize) -> Vec<bool> {
        let m = self.states();
        let mut cur = vec![false; m];
        cur[self.start as usize] = true;
        let mut out = Vec::with_capacity(n + 1);
        for l in 0..=n {
            out.push((0..m).any(|s| cur[s] && self.accepting[s]));
            if l == n {
                break;
            }
            let mut next = vec![false; m];
            for s in 0..m {
                if cur[s] && self.live[s] {
                    for a in 0..self.k {
                        next[self.step(s as u32, a as u8) as usize] = true;
                    }
                }
            }
            cur = next;
        }
        out
    }

    /// `table[l][s]` = number of words of length `l` leading from `s` to acceptance
    /// (saturating).
    pub fn completion_counts(&self, n: usize) -> Vec<Vec<u128>> {
        let m = self.states();
        let mut table = vec![self.accepting.iter().map(|&a| a as u128).collect::<Vec<_>>()];
        for l in 1..=n {
            let prev = &table[l - 1];
            let mut row = vec![0u128; m];
            for (s, slot) in row.iter_mut().enumerate() {
                let mut c: u128 = 0;
                for a in 0..self.k {
                    c = c.saturating_add(prev[self.step(s as u32, a as u8) as usize]);
                }
                *slot = c;
            }
            table.push(row);
        }
        table
    }

    /// All accepted words of exactly length `l`, in letter-index order.
    pub fn words_of_length(&self, l: usize) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(l);
        self.words_rec(self.start, l, &mut cur, &mut out);
        out
    }

    fn words_rec(&self, s: u32, rem: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if !self.is_live(s) {
            return;
        }
        if rem == 0 {
            if self.is_accepting(s) {
                out.push(cur.clone());
            }
            return;
        }
        for a in 0..self.k as u8 {
            cur.push(a);
            self.words_rec(self.step(s, a), rem - 1, cur, out);
            cur.pop();
        }
    }
}

// ---------------------------------------------------------------------------

/// Serializable description of a regular language.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RegularSource {
    Regex(String),
    Words(Vec<String>),
    Complement(Box<RegularSource>),
    Intersect(Vec<RegularSource>),
    Union(Vec<RegularSource>),
    Concat(Vec<RegularSource>),
}

impl RegularSource {
    pub fn regex(s: impl Into<String>) -> Self {
        RegularSource::Regex(s.into())
    }

    pub fn words<S: Into<String>>(ws: impl IntoIterator<Item = S>) -> Self {
        RegularSource::Words(ws.into_iter().map(Into::into).collect())
    }

    pub fn complement(inner: RegularSource) -> Self {
        RegularSource::Complement(Box::new(inner))
    }

    fn validate(&self, ab: &Alphabet) -> Result<()> {
        match self {
            RegularSource::Regex(s) => {
                let r = Regex::parse(s)?;
                for c in r.letters() {
                    if !ab.contains(c) {
                        return Err(Error::ForeignLetter(c));
                    }
                }
                Ok(())
            }
            RegularSource::Words(ws) => {
                for w in ws {
                    ab.encode(w)?;
                }
                Ok(())
            }
            RegularSource::Complement(inner) => inner.validate(ab),
            RegularSource::Intersect(v) | RegularSource::Union(v) | RegularSource::Concat(v) => {
                if v.is_empty() {
                    return Err(Error::RegexSyntax("empty operand list".into()));
                }
                v.iter().try_for_each(|s| s.validate(ab))
            }
        }
    }

    fn build(&self, ab: &Alphabet) -> Result<FiniteAutomaton> {
        match self {
            RegularSource::Regex(s) => FiniteAutomaton::compile(&Regex::parse(s)?, ab),
            RegularSource::Words(ws) => FiniteAutomaton::from_words(ab, ws),
            RegularSource::Complement(inner) => Ok(inner.build(ab)?.complement().trim()),
            RegularSource::Intersect(v) => {
                let mut acc = v[0].build(ab)?;
                for s in &v[1..] {
                    acc = acc.intersect(&s.build(ab)?)?;
                }
                Ok(acc)
            }
            RegularSource::Union(v) => {
                let mut acc = v[0].build(ab)?;
                for s in &v[1..] {
                    acc = acc.union(&s.build(ab)?)?;
                }
                Ok(acc)
            }
            RegularSource::Concat(v) => {
                let mut acc = v[0].build(ab)?;
                for s in &v[1..] {
                    acc = acc.concat(&s.build(ab)?)?;
                }
                Ok(acc)
            }
        }
    }
}

/// A per-variable regular constraint; the automaton is built on first use.
#[derive(Clone, Debug)]
pub struct RegularConstraint {
    source: RegularSource,
    alphabet: Alphabet,
    nfa: OnceLock<FiniteAutomaton>,
    dfa: OnceLock<Arc<Dfa>>,
}

impl PartialEq for RegularConstraint {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.alphabet == other.alphabet
    }
}

impl Eq for RegularConstraint {}

impl RegularConstraint {
    pub fn new(source: RegularSource, alphabet: &Alphabet) -> Result<Self> {
        source.validate(alphabet)?;
        Ok(RegularConstraint { source, alphabet: alphabet.clone(), nfa: OnceLock::new(), dfa: OnceLock::new() })
    }

    pub fn regex(s: &str, alphabet: &Alphabet) -> Result<Self> {
        Self::new(RegularSource::regex(s), alphabet)
    }

    pub fn words<S: Into<String>>(ws: impl IntoIterator<Item = S>, alphabet: &Alphabet) -> Result<Self> {
        Self::new(RegularSource::words(ws), alphabet)
    }

    pub fn source(&self) -> &RegularSource {
        &self.source
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn automaton(&self) -> &FiniteAutomaton {
        self.nfa.get_or_init(|| self.source.build(&self.alphabet).expect("validated at construction"))
    }

    pub fn dfa(&self) -> Arc<Dfa> {
        self.dfa.get_or_init(|| Arc::new(self.automaton().to_dfa())).clone()
    }

    pub fn accepts(&self, w: &str) -> bool {
        match self.alphabet.encode(w) {
            Ok(idx) => self.dfa().accepts(&idx),
            Err(_) => false,
        }
    }
}

/// Variable → regular constraint; absent variables are constrained to Σ*.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegularConstraintMap(BTreeMap<String, RegularConstraint>);

impl RegularConstraintMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, var: impl Into<String>, c: RegularConstraint) {
        self.0.insert(var.into(), c);
    }

    pub fn get(&self, var: &str) -> Option<&RegularConstraint> {
        self.0.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &RegularConstraint)> {
        self.0.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Membership of `w` in the language of `var`, defaulting to Σ*.
    pub fn accepts(&self, var: &str, w: &str, alphabet: &Alphabet) -> bool {
        match self.0.get(var) {
            Some(c) => c.accepts(w),
            None => alphabet.encode(w).is_ok(),
        }
    }

    pub fn extend(&mut self, other: RegularConstraintMap) {
        self.0.extend(other.0);
    }
}

impl FromIterator<(String, RegularConstraint)> for RegularConstraintMap {
    fn from_iter<I: IntoIterator<Item = (String, RegularConstraint)>>(iter: I) -> Self {
        RegularConstraintMap(iter.into_iter().collect())
    }
}
