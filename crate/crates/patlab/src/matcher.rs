//! Membership for constrained pattern languages, certificate checking and
//! conjunctive (multi-pattern) matching.
//!
//! The engine walks the patterns left to right, binding each variable at its
//! first occurrence and trying image lengths in ascending order. Length bounds
//! are propagated through the top-level inequalities and the per-pair length
//! equations, regular constraints are run incrementally on their DFAs, and
//! failed subtrees are memoized on the state that determines their outcome.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::constraints::{evaluate, propagate, CLeaf, CNode, Formula, LengthAssignment, Rel, Tri};
use crate::error::{Error, Result};
use crate::pattern::{Alphabet, ConstrainedPattern, Mode, Pattern, Substitution, Symbol};
use crate::regular::{Dfa, RegularConstraintMap};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchCertificate {
    pub substitution: Substitution,
    pub lengths: LengthAssignment,
}

impl MatchCertificate {
    fn from_substitution(substitution: Substitution) -> Self {
        let lengths = substitution.lengths();
        MatchCertificate { substitution, lengths }
    }
}

/// Patterns with target words that must be matched by one substitution under
/// shared constraints.
#[derive(Clone, Debug)]
pub struct ConjunctiveQuery {
    alphabet: Alphabet,
    pairs: Vec<(Pattern, String)>,
    length: Formula,
    regular: RegularConstraintMap,
    mode: Mode,
}

impl ConjunctiveQuery {
    pub fn new(pairs: Vec<(Pattern, String)>, length: Formula, regular: RegularConstraintMap, mode: Mode) -> Result<Self> {
        let alphabet = match pairs.first() {
            Some((p, _)) => p.alphabet().clone(),
            None => return Err(Error::EmptyPattern),
        };
        let mut vars = BTreeSet::new();
        for (p, _) in &pairs {
            if p.alphabet() != &alphabet {
                return Err(Error::AlphabetMismatch);
            }
            vars.extend(p.vars());
        }
        for v in length.vars() {
            if !vars.contains(&v) {
                return Err(Error::ConstraintVariableNotInPattern(v));
            }
        }
        for (v, c) in regular.iter() {
            if !vars.contains(v) {
                return Err(Error::ConstraintVariableNotInPattern(v.clone()));
            }
            if c.alphabet() != &alphabet {
                return Err(Error::AlphabetMismatch);
            }
        }
        Ok(ConjunctiveQuery { alphabet, pairs, length, regular, mode })
    }

    pub fn single(cp: &ConstrainedPattern, w: &str) -> Self {
        ConjunctiveQuery {
            alphabet: cp.alphabet().clone(),
            pairs: vec![(cp.pattern().clone(), w.to_owned())],
            length: cp.length().clone(),
            regular: cp.regular().clone(),
            mode: cp.mode(),
        }
    }

    pub fn pairs(&self) -> &[(Pattern, String)] {
        &self.pairs
    }

    pub fn length(&self) -> &Formula {
        &self.length
    }

    pub fn regular(&self) -> &RegularConstraintMap {
        &self.regular
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.pairs.iter().flat_map(|(p, _)| p.vars()).collect()
    }

    /// Whether `h` maps every pattern onto its target under the constraints.
    pub fn check(&self, h: &Substitution) -> bool {
        let vars = self.vars();
        for v in &vars {
            let Some(img) = h.get(v) else { return false };
            if self.alphabet.encode(img).is_err() {
                return false;
            }
            if self.mode == Mode::NE && img.is_empty() {
                return false;
            }
            if !self.regular.accepts(v, img, &self.alphabet) {
                return false;
            }
        }
        for (p, w) in &self.pairs {
            match h.apply(p) {
                Ok(x) if &x == w => {}
                _ => return false,
            }
        }
        let lengths = h.restrict(&vars).lengths();
        matches!(evaluate(&self.length, &lengths), Ok(true))
    }
}

/// Matching engine configuration.
#[derive(Clone, Copy, Debug)]
pub struct Matcher {
    threads: usize,
    memo_cap: usize,
}

impl Default for Matcher {
    fn default() -> Self {
        Matcher { threads: 1, memo_cap: 1 << 19 }
    }
}

impl Matcher {
    pub fn new() -> Self {
        Self::default()
    }

    /// Splits the first branching variable's lengths across `n` workers. The
    /// result is the same as with one thread.
    pub fn with_threads(n: usize) -> Self {
        Matcher { threads: n.max(1), ..Self::default() }
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn solve(&self, q: &ConjunctiveQuery) -> Result<Option<Substitution>> {
        let Some(prob) = Problem::build(q)? else { return Ok(None) };
        if self.threads <= 1 {
            let mut st = Search::new(&prob, 1, self.memo_cap, None);
            st.run();
            return Ok(st.solutions.pop().map(|s| prob.substitution(&s)));
        }
        let n = self.threads;
        let results: Vec<Option<(i128, Vec<Img>)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..n)
                .map(|id| {
                    let prob = &prob;
                    let cap = self.memo_cap;
                    scope.spawn(move || {
                        let mut st = Search::new(prob, 1, cap, Some((n, id)));
                        st.run();
                        st.solutions.pop().map(|s| (st.root_choice.unwrap_or(-1), s))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("matcher worker panicked")).collect()
        });
        Ok(results.into_iter().flatten().min_by_key(|(k, _)| *k).map(|(_, s)| prob.substitution(&s)))
    }

    /// Every solution, up to `cap`, in search order.
    pub fn solve_all(&self, q: &ConjunctiveQuery, cap: usize) -> Result<Vec<Substitution>> {
        let Some(prob) = Problem::build(q)? else { return Ok(Vec::new()) };
        if cap == 0 {
            return Ok(Vec::new());
        }
        let mut st = Search::new(&prob, cap, self.memo_cap, None);
        st.run();
        Ok(st.solutions.iter().map(|s| prob.substitution(s)).collect())
    }

    pub fn try_membership(&self, w: &str, cp: &ConstrainedPattern) -> Result<Option<MatchCertificate>> {
        Ok(self.solve(&ConjunctiveQuery::single(cp, w))?.map(MatchCertificate::from_substitution))
    }

    pub fn membership(&self, w: &str, cp: &ConstrainedPattern) -> Option<MatchCertificate> {
        self.try_membership(w, cp).ok().flatten()
    }
}

/// A certificate for `w ∈ L(cp)`, or `None`. Words with foreign letters are
/// not members.
pub fn membership(w: &str, cp: &ConstrainedPattern) -> Option<MatchCertificate> {
    Matcher::new().membership(w, cp)
}

/// Like [`membership`] but reports foreign letters as an error.
pub fn try_membership(w: &str, cp: &ConstrainedPattern) -> Result<Option<MatchCertificate>> {
    Matcher::new().try_membership(w, cp)
}

pub fn verify_certificate(w: &str, cp: &ConstrainedPattern, h: &Substitution) -> bool {
    ConjunctiveQuery::single(cp, w).check(h)
}

pub fn conjunctive_membership(q: &ConjunctiveQuery) -> Option<Substitution> {
    Matcher::new().solve(q).ok().flatten()
}

pub fn all_certificates(w: &str, cp: &ConstrainedPattern, cap: usize) -> Vec<MatchCertificate> {
    Matcher::new()
        .solve_all(&ConjunctiveQuery::single(cp, w), cap)
        .unwrap_or_default()
        .into_iter()
        .map(MatchCertificate::from_substitution)
        .collect()
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sym {
    T(u8),
    V(u32),
}

/// Image of a variable as a slice of one of the target words.
type Img = (u32, u32, u32);

struct Problem {
    names: Vec<String>,
    pairs: Vec<(Vec<Sym>, Vec<u8>)>,
    alphabet: Alphabet,
    dfas: Vec<Option<Arc<Dfa>>>,
    allowed: Vec<Option<Vec<bool>>>,
    compiled: Option<Arc<CNode>>,
    exact: Formula,
    leaves: Vec<CLeaf>,
    lo0: Vec<i128>,
    hi0: Vec<i128>,
    /// Per (pair, symbol): bound variables whose image matters later, and
    /// bound formula variables that only matter through their length.
    key_img: Vec<Vec<Vec<u32>>>,
    key_len: Vec<Vec<Vec<u32>>>,
}

impl Problem {
    /// `None` when the instance is trivially unsatisfiable.
    fn build(q: &ConjunctiveQuery) -> Result<Option<Problem>> {
        let ab = &q.alphabet;
        let names: Vec<String> = q.vars().into_iter().collect();
        let index: HashMap<String, usize> = names.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let n = names.len();

        let mut pairs = Vec::with_capacity(q.pairs.len());
        for (p, w) in &q.pairs {
            let syms = p
                .symbols()
                .iter()
                .map(|s| match s {
                    Symbol::Term(c) => Sym::T(ab.index(*c).expect("pattern letters are in the alphabet")),
                    Symbol::Var(v) => Sym::V(index[v] as u32),
                })
                .collect::<Vec<_>>();
            pairs.push((syms, ab.encode(w)?));
        }
        pairs.sort_by_key(|(_, w)| w.len());

        let mut lo0 = vec![q.mode.min_len() as i128; n];
        let mut hi0 = vec![i128::MAX; n];
        let mut leaves = Vec::new();
        for (syms, w) in &pairs {
            let mut occ = vec![0i128; n];
            let mut terms = 0i128;
            for s in syms {
                match s {
                    Sym::T(_) => terms += 1,
                    Sym::V(x) => occ[*x as usize] += 1,
                }
            }
            let k = w.len() as i128 - terms;
            if k < 0 {
                return Ok(None);
            }
            let lterms: Vec<(i128, usize)> = occ.iter().enumerate().filter(|(_, &c)| c > 0).map(|(v, &c)| (c, v)).collect();
            for &(c, v) in &lterms {
                hi0[v] = hi0[v].min(k / c);
            }
            if lterms.is_empty() {
                if k != 0 {
                    return Ok(None);
                }
            } else {
                leaves.push(CLeaf { terms: lterms, rel: Rel::Eq, k });
            }
        }

        let compiled = CNode::compile(&q.length, &index);
        if let Some(c) = &compiled {
            leaves.extend(c.top_leaves());
        }

        let mut dfas = vec![None; n];
        let mut allowed = vec![None; n];
        for (v, c) in q.regular.iter() {
            let i = index[v];
            let d = c.dfa();
            let lens = d.accepted_lengths(hi0[i].max(0) as usize);
            match lens.iter().enumerate().skip(lo0[i] as usize).find(|(_, &ok)| ok) {
                Some((l, _)) => lo0[i] = l as i128,
                None => return Ok(None),
            }
            if let Some((l, _)) = lens.iter().enumerate().rev().find(|(_, &ok)| ok) {
                hi0[i] = hi0[i].min(l as i128);
            }
            allowed[i] = Some(lens);
            dfas[i] = Some(d);
        }

        if !propagate(&leaves, &mut lo0, &mut hi0) {
            return Ok(None);
        }
        if let Some(c) = &compiled {
            if c.tri(&lo0, &hi0) == Tri::False {
                return Ok(None);
            }
        }

        let formula_vars: HashSet<usize> = q.length.vars().iter().map(|v| index[v]).collect();
        let (key_img, key_len) = memo_layout(&pairs, n, &formula_vars);

        Ok(Some(Problem {
            names,
            pairs,
            alphabet: ab.clone(),
            dfas,
            allowed,
            compiled,
            exact: q.length.clone(),
            leaves,
            lo0,
            hi0,
            key_img,
            key_len,
        }))
    }

    fn image(&self, img: Img) -> &[u8] {
        let (p, s, l) = img;
        &self.pairs[p as usize].1[s as usize..(s + l) as usize]
    }

    fn substitution(&self, imgs: &[Img]) -> Substitution {
        self.names.iter().zip(imgs).map(|(n, &i)| (n.clone(), self.alphabet.decode(self.image(i)))).collect()
    }
}

fn memo_layout(pairs: &[(Vec<Sym>, Vec<u8>)], n: usize, formula_vars: &HashSet<usize>) -> (Vec<Vec<Vec<u32>>>, Vec<Vec<Vec<u32>>>) {
    // last position (pair, symbol) at which each variable occurs
    let mut last: Vec<Option<(usize, usize)>> = vec![None; n];
    for (pi, (syms, _)) in pairs.iter().enumerate() {
        for (si, s) in syms.iter().enumerate() {
            if let Sym::V(x) = s {
                last[*x as usize] = Some((pi, si));
            }
        }
    }
    let mut bound = vec![false; n];
    let mut key_img = Vec::with_capacity(pairs.len());
    let mut key_len = Vec::with_capacity(pairs.len());
    for (pi, (syms, _)) in pairs.iter().enumerate() {
        let mut ki = Vec::with_capacity(syms.len());
        let mut kl = Vec::with_capacity(syms.len());
        for (si, s) in syms.iter().enumerate() {
            if matches!(s, Sym::V(x) if !bound[*x as usize]) {
                let mut img = Vec::new();
                let mut len = Vec::new();
                for v in 0..n {
                    if !bound[v] {
                        continue;
                    }
                    if last[v].is_some_and(|l| l >= (pi, si)) {
                        img.push(v as u32);
                    } else if formula_vars.contains(&v) {
                        len.push(v as u32);
                    }
                }
                ki.push(img);
                kl.push(len);
            } else {
                ki.push(Vec::new());
                kl.push(Vec::new());
            }
            if let Sym::V(x) = s {
                bound[*x as usize] = true;
            }
        }
        key_img.push(ki);
        key_len.push(kl);
    }
    (key_img, key_len)
}

struct Search<'a> {
    p: &'a Problem,
    img: Vec<Img>,
    bound: Vec<bool>,
    memo: HashSet<Vec<u8>>,
    memo_cap: usize,
    cap: usize,
    solutions: Vec<Vec<Img>>,
    split: Option<(usize, usize)>,
    at_root: bool,
    root_choice: Option<i128>,
}

impl<'a> Search<'a> {
    fn new(p: &'a Problem, cap: usize, memo_cap: usize, split: Option<(usize, usize)>) -> Self {
        let n = p.names.len();
        Search {
            p,
            img: vec![(0, 0, 0); n],
            bound: vec![false; n],
            memo: HashSet::new(),
            memo_cap,
            cap,
            solutions: Vec::new(),
            split,
            at_root: true,
            root_choice: None,
        }
    }

    fn run(&mut self) {
        let lo = self.p.lo0.clone();
        let hi = self.p.hi0.clone();
        if self.suffix_ok(0, 0, 0) {
            self.search(0, 0, 0, &lo, &hi);
        }
    }

    /// Checks the trailing run of terminals and bound variables of the current
    /// pattern against the end of its word.
    fn suffix_ok(&self, pi: usize, si: usize, pos: usize) -> bool {
        let Some((syms, w)) = self.p.pairs.get(pi) else { return true };
        let mut end = w.len();
        for s in syms[si..].iter().rev() {
            match *s {
                Sym::T(a) => {
                    if end <= pos || w[end - 1] != a {
                        return false;
                    }
                    end -= 1;
                }
                Sym::V(x) if self.bound[x as usize] => {
                    let im = self.p.image(self.img[x as usize]);
                    if end < pos + im.len() || &w[end - im.len()..end] != im {
                        return false;
                    }
                    end -= im.len();
                }
                Sym::V(_) => return true,
            }
        }
        true
    }

    fn memo_key(&self, pi: usize, si: usize, pos: usize) -> Vec<u8> {
        let mut key = Vec::with_capacity(16);
        key.extend_from_slice(&(pi as u32).to_le_bytes());
        key.extend_from_slice(&(si as u32).to_le_bytes());
        key.extend_from_slice(&(pos as u32).to_le_bytes());
        for &v in &self.p.key_img[pi][si] {
            let im = self.p.image(self.img[v as usize]);
            key.extend_from_slice(&(im.len() as u32).to_le_bytes());
            key.extend_from_slice(im);
        }
        for &v in &self.p.key_len[pi][si] {
            key.extend_from_slice(&self.img[v as usize].2.to_le_bytes());
        }
        key
    }

    fn accept_final(&self, lo: &[i128]) -> bool {
        match &self.p.compiled {
            Some(c) => c.tri(lo, lo) == Tri::True,
            None => {
                let a: LengthAssignment =
                    self.p.names.iter().cloned().zip(self.img.iter().map(|i| i.2 as u64)).collect();
                matches!(evaluate(&self.p.exact, &a), Ok(true))
            }
        }
    }

    /// Returns true when the search should stop.
    fn search(&mut self, mut pi: usize, mut si: usize, mut pos: usize, lo: &[i128], hi: &[i128]) -> bool {
        let p = self.p;
        let x = loop {
            if pi == p.pairs.len() {
                if self.accept_final(lo) {
                    self.solutions.push(self.img.clone());
                }
                return self.solutions.len() >= self.cap;
            }
            let (syms, w) = &p.pairs[pi];
            if si == syms.len() {
                if pos != w.len() {
                    return false;
                }
                pi += 1;
                si = 0;
                pos = 0;
                if !self.suffix_ok(pi, 0, 0) {
                    return false;
                }
                continue;
            }
            match syms[si] {
                Sym::T(a) => {
                    if pos < w.len() && w[pos] == a {
                        si += 1;
                        pos += 1;
                    } else {
                        return false;
                    }
                }
                Sym::V(x) if self.bound[x as usize] => {
                    let im = p.image(self.img[x as usize]);
                    if pos + im.len() <= w.len() && &w[pos..pos + im.len()] == im {
                        si += 1;
                        pos += im.len();
                    } else {
                        return false;
                    }
                }
                Sym::V(x) => break x as usize,
            }
        };

        let key = self.memo_key(pi, si, pos);
        if self.memo.contains(&key) {
            return false;
        }
        let before = self.solutions.len();
        let root = std::mem::replace(&mut self.at_root, false);

        let w = &p.pairs[pi].1;
        let max = hi[x].min((w.len() - pos) as i128);
        let dfa = p.dfas[x].as_deref();
        let mut state = dfa.map(|d| d.start());
        let mut walked = 0i128;
        let mut l = lo[x];
        let mut stop = false;
        while l <= max {
            if let (Some(d), Some(s)) = (dfa, state.as_mut()) {
                while walked < l {
                    *s = d.step(*s, w[pos + walked as usize]);
                    walked += 1;
                }
                if !d.is_live(*s) {
                    break;
                }
                if !d.is_accepting(*s) {
                    l += 1;
                    continue;
                }
            }
            if let Some(a) = &p.allowed[x] {
                if !a.get(l as usize).copied().unwrap_or(false) {
                    l += 1;
                    continue;
                }
            }
            if root {
                if let Some((n, id)) = self.split {
                    if (l - lo[x]) as usize % n != id {
                        l += 1;
                        continue;
                    }
                }
            }
            let mut lo2 = lo.to_vec();
            let mut hi2 = hi.to_vec();
            lo2[x] = l;
            hi2[x] = l;
            let feasible = propagate(&p.leaves, &mut lo2, &mut hi2)
                && p.compiled.as_ref().is_none_or(|c| c.tri(&lo2, &hi2) != Tri::False);
            if feasible {
                self.bound[x] = true;
                self.img[x] = (pi as u32, pos as u32, l as u32);
                if self.suffix_ok(pi, si + 1, pos + l as usize) {
                    let found_before = self.solutions.len();
                    stop = self.search(pi, si + 1, pos + l as usize, &lo2, &hi2);
                    if root && self.root_choice.is_none() && self.solutions.len() > found_before {
                        self.root_choice = Some(l);
                    }
                }
                self.bound[x] = false;
                if stop {
                    break;
                }
            }
            l += 1;
        }
        if root {
            self.at_root = true;
        }
        if !stop && self.solutions.len() == before && self.memo.len() < self.memo_cap {
            self.memo.insert(key);
        }
        stop
    }
}
