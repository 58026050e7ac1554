//! Alphabets, patterns, substitutions, symbol morphisms and constrained
//! patterns, with the erasing and terminal-free conversions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::constraints::{Formula, LengthAssignment, LinearInequality};
use crate::error::{Error, Result};
use crate::regular::{RegularConstraint, RegularConstraintMap};

/// Ordered set of single-character letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<char>,
}

impl Alphabet {
    pub fn new(letters: impl IntoIterator<Item = char>) -> Result<Self> {
        let letters: Vec<char> = letters.into_iter().collect();
        if letters.is_empty() {
            return Err(Error::Alphabet("alphabet must be nonempty".into()));
        }
        if letters.len() > u8::MAX as usize {
            return Err(Error::Alphabet("alphabet too large".into()));
        }
        for (i, c) in letters.iter().enumerate() {
            if letters[..i].contains(c) {
                return Err(Error::Alphabet(format!("duplicate letter `{c}`")));
            }
            if c.is_whitespace() {
                return Err(Error::Alphabet("whitespace is not a letter".into()));
            }
        }
        Ok(Alphabet { letters })
    }

    /// Each character of `s` is one letter.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(s.chars())
    }

    /// `{0, #}`.
    pub fn binary() -> Self {
        Alphabet { letters: vec!['0', '#'] }
    }

    /// `{0}`.
    pub fn unary() -> Self {
        Alphabet { letters: vec!['0'] }
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, c: char) -> bool {
        self.letters.contains(&c)
    }

    pub fn index(&self, c: char) -> Option<u8> {
        self.letters.iter().position(|&l| l == c).map(|i| i as u8)
    }

    pub fn letter(&self, i: u8) -> char {
        self.letters[i as usize]
    }

    pub fn encode(&self, w: &str) -> Result<Vec<u8>> {
        w.chars().map(|c| self.index(c).ok_or(Error::ForeignLetter(c))).collect()
    }

    pub fn decode(&self, w: &[u8]) -> String {
        w.iter().map(|&i| self.letter(i)).collect()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Term(char),
    Var(String),
}

impl Symbol {
    pub fn var(name: impl Into<String>) -> Self {
        Symbol::Var(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Symbol::Var(v) => Some(v),
            Symbol::Term(_) => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Term(c) => write!(f, "{c}"),
            Symbol::Var(v) => write!(f, "{v}"),
        }
    }
}

/// Possibly empty symbol sequence; the image of a symbol under a morphism.
pub type Fragment = Vec<Symbol>;

/// Terminals `w` as a fragment.
pub fn terminals(w: &str) -> Fragment {
    w.chars().map(Symbol::Term).collect()
}

/// `name` repeated `k` times.
pub fn var_power(name: &str, k: usize) -> Fragment {
    vec![Symbol::var(name); k]
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    symbols: Vec<Symbol>,
    alphabet: Alphabet,
}

impl Pattern {
    pub fn new(symbols: Vec<Symbol>, alphabet: &Alphabet) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyPattern);
        }
        for s in &symbols {
            match s {
                Symbol::Term(c) if !alphabet.contains(*c) => return Err(Error::ForeignLetter(*c)),
                Symbol::Var(v) if v.is_empty() => return Err(Error::Alphabet("empty variable name".into())),
                _ => {}
            }
        }
        Ok(Pattern { symbols, alphabet: alphabet.clone() })
    }

    /// Whitespace-separated tokens. A token made only of letters of the
    /// alphabet is a run of terminals; anything else is a variable.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let mut symbols = Vec::new();
        for tok in text.split_whitespace() {
            if tok.chars().all(|c| alphabet.contains(c)) {
                symbols.extend(terminals(tok));
            } else {
                symbols.push(Symbol::var(tok));
            }
        }
        Pattern::new(symbols, alphabet)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.symbols.iter().filter_map(|s| s.as_var().map(str::to_owned)).collect()
    }

    /// `|α|_x` for every variable `x`.
    pub fn occurrences(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for s in &self.symbols {
            if let Symbol::Var(v) = s {
                *m.entry(v.clone()).or_insert(0) += 1;
            }
        }
        m
    }

    pub fn terminal_count(&self) -> usize {
        self.symbols.iter().filter(|s| matches!(s, Symbol::Term(_))).count()
    }

    pub fn is_terminal_free(&self) -> bool {
        self.terminal_count() == 0
    }

    pub fn concat(&self, other: &Pattern) -> Result<Pattern> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Ok(Pattern { symbols, alphabet: self.alphabet.clone() })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Variable → word. Terminals are never remapped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<String, String>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, var: impl Into<String>, image: impl Into<String>) {
        self.0.insert(var.into(), image.into());
    }

    pub fn with(mut self, var: impl Into<String>, image: impl Into<String>) -> Self {
        self.insert(var, image);
        self
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.0
    }

    /// Image lengths in letters.
    pub fn lengths(&self) -> LengthAssignment {
        self.0.iter().map(|(k, v)| (k.clone(), v.chars().count() as u64)).collect()
    }

    /// Keeps only the listed variables.
    pub fn restrict(&self, vars: &BTreeSet<String>) -> Substitution {
        Substitution(self.0.iter().filter(|(k, _)| vars.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect())
    }

    pub fn apply(&self, p: &Pattern) -> Result<String> {
        self.apply_fragment(p.symbols())
    }

    pub fn apply_fragment(&self, symbols: &[Symbol]) -> Result<String> {
        let mut out = String::new();
        for s in symbols {
            match s {
                Symbol::Term(c) => out.push(*c),
                Symbol::Var(v) => out.push_str(self.get(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?),
            }
        }
        Ok(out)
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Substitution(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

pub fn apply_substitution(h: &Substitution, p: &Pattern) -> Result<String> {
    h.apply(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Erasing: images may be empty.
    E,
    /// Non-erasing: every image is nonempty.
    NE,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::E => "E",
            Mode::NE => "NE",
        }
    }

    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "E" | "e" => Ok(Mode::E),
            "NE" | "ne" => Ok(Mode::NE),
            _ => Err(Error::Json(format!("unknown mode `{s}`"))),
        }
    }

    /// Smallest image length allowed.
    pub fn min_len(self) -> u64 {
        match self {
            Mode::E => 0,
            Mode::NE => 1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a morphism treats variables it has no explicit entry for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarDefault {
    Undefined,
    Identity,
    Const(Fragment),
}

/// Symbol → fragment. Terminals map to themselves unless remapped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolMorphism {
    map: HashMap<Symbol, Fragment>,
    vars: VarDefault,
}

impl SymbolMorphism {
    pub fn new(vars: VarDefault) -> Self {
        SymbolMorphism { map: HashMap::new(), vars }
    }

    pub fn identity() -> Self {
        Self::new(VarDefault::Identity)
    }

    pub fn set(&mut self, s: Symbol, image: Fragment) -> &mut Self {
        self.map.insert(s, image);
        self
    }

    pub fn with(mut self, s: Symbol, image: Fragment) -> Self {
        self.map.insert(s, image);
        self
    }

    pub fn image(&self, s: &Symbol) -> Result<Fragment> {
        if let Some(f) = self.map.get(s) {
            return Ok(f.clone());
        }
        match (s, &self.vars) {
            (Symbol::Term(_), _) | (Symbol::Var(_), VarDefault::Identity) => Ok(vec![s.clone()]),
            (Symbol::Var(_), VarDefault::Const(f)) => Ok(f.clone()),
            (Symbol::Var(v), VarDefault::Undefined) => Err(Error::UndefinedSymbol(v.clone())),
        }
    }

    pub fn apply_fragment(&self, symbols: &[Symbol]) -> Result<Fragment> {
        let mut out = Vec::new();
        for s in symbols {
            out.extend(self.image(s)?);
        }
        Ok(out)
    }
}

/// Homomorphic image of `p`; the result uses `p`'s alphabet.
pub fn apply_symbol_morphism(m: &SymbolMorphism, p: &Pattern) -> Result<Pattern> {
    Pattern::new(m.apply_fragment(p.symbols())?, p.alphabet())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstrainedPattern {
    pattern: Pattern,
    length: Formula,
    regular: RegularConstraintMap,
    mode: Mode,
}

impl ConstrainedPattern {
    pub fn new(pattern: Pattern, length: Formula, regular: RegularConstraintMap, mode: Mode) -> Result<Self> {
        let vars = pattern.vars();
        for v in length.vars() {
            if !vars.contains(v.as_str()) {
                return Err(Error::ConstraintVariableNotInPattern(v.clone()));
            }
        }
        for (v, c) in regular.iter() {
            if !vars.contains(v) {
                return Err(Error::ConstraintVariableNotInPattern(v.clone()));
            }
            if c.alphabet() != pattern.alphabet() {
                return Err(Error::AlphabetMismatch);
            }
        }
        Ok(ConstrainedPattern { pattern, length, regular, mode })
    }

    /// No length or regular constraints.
    pub fn plain(pattern: Pattern, mode: Mode) -> Self {
        ConstrainedPattern { pattern, length: Formula::truth(), regular: RegularConstraintMap::new(), mode }
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.pattern.alphabet()
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

    pub fn with_mode(&self, mode: Mode) -> Self {
        ConstrainedPattern { mode, ..self.clone() }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.pattern.vars()
    }
}

/// Rewrites a non-erasing constrained pattern into an erasing one by adding
/// `x >= 1` for every variable. Erasing input is returned unchanged.
pub fn to_erasing_equivalent(cp: &ConstrainedPattern) -> ConstrainedPattern {
    if cp.mode == Mode::E {
        return cp.clone();
    }
    let mut parts = vec![cp.length.clone()];
    parts.extend(cp.vars().iter().map(|v| Formula::leaf(LinearInequality::var_ge(v, 1))));
    ConstrainedPattern { length: Formula::and(parts), mode: Mode::E, ..cp.clone() }
}

/// First name of the form `base`, `base_1`, `base_2`, ... not in `taken`.
pub fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_owned();
    }
    (1..).map(|i| format!("{base}_{i}")).find(|n| !taken.contains(n)).unwrap()
}

/// Replaces every terminal `a` by a variable `x_a` with `L(x_a) = {a}` and
/// `x_a = 1`. Terminal-free input is returned unchanged.
pub fn to_terminal_free(cp: &ConstrainedPattern) -> ConstrainedPattern {
    if cp.pattern.is_terminal_free() {
        return cp.clone();
    }
    let ab = cp.alphabet().clone();
    let mut taken = cp.vars();
    let mut names: BTreeMap<char, String> = BTreeMap::new();
    for &a in ab.letters() {
        if cp.pattern.symbols.contains(&Symbol::Term(a)) {
            let n = fresh_name(&format!("x_{a}"), &taken);
            taken.insert(n.clone());
            names.insert(a, n);
        }
    }
    let symbols = cp
        .pattern
        .symbols
        .iter()
        .map(|s| match s {
            Symbol::Term(a) => Symbol::Var(names[a].clone()),
            v => v.clone(),
        })
        .collect();
    let mut regular = cp.regular.clone();
    let mut parts = vec![cp.length.clone()];
    for &a in ab.letters() {
        if let Some(n) = names.get(&a) {
            regular.insert(n.clone(), RegularConstraint::words([a.to_string()], &ab).expect("letter of alphabet"));
            parts.push(Formula::leaf(LinearInequality::var_eq(n, 1)));
        }
    }
    ConstrainedPattern {
        pattern: Pattern { symbols, alphabet: ab },
        length: Formula::and(parts),
        regular,
        mode: cp.mode,
    }
}
