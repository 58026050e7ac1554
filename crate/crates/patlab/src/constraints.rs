//! Length constraints: positive AND/OR trees of linear inequalities over the
//! lengths of variable images.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Map from variable name to the length of its image.
pub type LengthAssignment = BTreeMap<String, u64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

impl Rel {
    pub fn as_str(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Ge => ">=",
            Rel::Eq => "=",
        }
    }

    pub fn parse(s: &str) -> Option<Rel> {
        match s {
            "<=" | "≤" => Some(Rel::Le),
            ">=" | "≥" => Some(Rel::Ge),
            "=" | "==" => Some(Rel::Eq),
            _ => None,
        }
    }

    fn holds<T: PartialOrd>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Rel::Le => lhs <= rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Eq => lhs == rhs,
        }
    }
}

/// `Σ coeff·var  rel  constant` with at least one term and distinct variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearInequality {
    terms: Vec<(BigInt, String)>,
    rel: Rel,
    constant: BigInt,
}

impl LinearInequality {
    pub fn new(terms: Vec<(BigInt, String)>, rel: Rel, constant: BigInt) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInequality("no terms".into()));
        }
        let mut seen = BTreeSet::new();
        for (_, v) in &terms {
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidInequality(format!("variable `{v}` repeated")));
            }
        }
        Ok(LinearInequality { terms, rel, constant })
    }

    /// Sum of `coeff·var` with repeated variables merged; zero coefficients are kept.
    pub fn from_terms<S: AsRef<str>>(terms: &[(i64, S)], rel: Rel, constant: i64) -> Result<Self> {
        let mut merged: Vec<(BigInt, String)> = Vec::new();
        for (c, v) in terms {
            let v = v.as_ref();
            match merged.iter_mut().find(|(_, n)| n == v) {
                Some(slot) => slot.0 += BigInt::from(*c),
                None => merged.push((BigInt::from(*c), v.to_string())),
            }
        }
        Self::new(merged, rel, BigInt::from(constant))
    }

    pub fn var_eq(var: &str, c: i64) -> Self {
        Self::single(var, Rel::Eq, c)
    }

    pub fn var_ge(var: &str, c: i64) -> Self {
        Self::single(var, Rel::Ge, c)
    }

    pub fn var_le(var: &str, c: i64) -> Self {
        Self::single(var, Rel::Le, c)
    }

    fn single(var: &str, rel: Rel, c: i64) -> Self {
        LinearInequality {
            terms: vec![(BigInt::one(), var.to_string())],
            rel,
            constant: BigInt::from(c),
        }
    }

    /// `Σ vars  rel  c` with unit coefficients (repeats merged).
    pub fn sum<S: AsRef<str>>(vars: &[S], rel: Rel, c: i64) -> Result<Self> {
        let terms: Vec<(i64, &str)> = vars.iter().map(|v| (1, v.as_ref())).collect();
        Self::from_terms(&terms, rel, c)
    }

    pub fn terms(&self) -> &[(BigInt, String)] {
        &self.terms
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn constant(&self) -> &BigInt {
        &self.constant
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(_, v)| v.as_str())
    }

    pub fn holds(&self, a: &LengthAssignment) -> Result<bool> {
        let mut lhs = BigInt::zero();
        for (c, v) in &self.terms {
            let val = a.get(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
            lhs += c * BigInt::from(*val);
        }
        Ok(self.rel.holds(&lhs, &self.constant))
    }
}

impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, v)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
        }
        write!(f, " {} {}", self.rel.as_str(), self.constant)
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    Leaf(LinearInequality),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

/// A constraint formula. Subtrees are reference counted so builders can share
/// them; clones are cheap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Formula(Arc<Node>);

impl Default for Formula {
    fn default() -> Self {
        Formula::truth()
    }
}

impl From<LinearInequality> for Formula {
    fn from(l: LinearInequality) -> Self {
        Formula::leaf(l)
    }
}

impl Formula {
    pub fn truth() -> Self {
        Formula(Arc::new(Node::True))
    }

    pub fn leaf(l: LinearInequality) -> Self {
        Formula(Arc::new(Node::Leaf(l)))
    }

    /// Conjunction; `True` children are dropped and an empty list gives `True`.
    pub fn and(children: Vec<Formula>) -> Self {
        let kids: Vec<Formula> = children.into_iter().filter(|c| !c.is_true()).collect();
        match kids.len() {
            0 => Formula::truth(),
            1 => kids.into_iter().next().unwrap(),
            _ => Formula(Arc::new(Node::And(kids))),
        }
    }

    /// Disjunction. A `True` child makes the whole node `True`.
    pub fn or(children: Vec<Formula>) -> Self {
        if children.iter().any(|c| c.is_true()) || children.is_empty() {
            return Formula::truth();
        }
        if children.len() == 1 {
            return children.into_iter().next().unwrap();
        }
        Formula(Arc::new(Node::Or(children)))
    }

    pub fn and_leaves(leaves: Vec<LinearInequality>) -> Self {
        Formula::and(leaves.into_iter().map(Formula::leaf).collect())
    }

    /// Builds the node exactly as given, without simplification.
    pub fn raw(node: Node) -> Result<Self> {
        match &node {
            Node::And(c) | Node::Or(c) if c.is_empty() => {
                Err(Error::FormulaSyntax("and/or node needs at least one child".into()))
            }
            _ => Ok(Formula(Arc::new(node))),
        }
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn is_true(&self) -> bool {
        matches!(*self.0, Node::True)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut seen = std::collections::HashSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>, seen: &mut std::collections::HashSet<*const Node>) {
        if !seen.insert(Arc::as_ptr(&self.0)) {
            return;
        }
        match self.node() {
            Node::True => {}
            Node::Leaf(l) => out.extend(l.vars().map(str::to_string)),
            Node::And(c) | Node::Or(c) => c.iter().for_each(|k| k.collect_vars(out, seen)),
        }
    }

    /// Conjunctive leaves reachable from the root through `And` nodes only.
    pub fn top_level_leaves(&self) -> Vec<&LinearInequality> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f.node() {
                Node::Leaf(l) => out.push(l),
                Node::And(c) => stack.extend(c.iter().rev()),
                _ => {}
            }
        }
        out
    }

    /// Number of leaves in the tree view (shared subtrees counted every time).
    pub fn leaf_count(&self) -> usize {
        match self.node() {
            Node::True => 0,
            Node::Leaf(_) => 1,
            Node::And(c) | Node::Or(c) => c.iter().map(Formula::leaf_count).sum(),
        }
    }

    /// Parses the text syntax: inequalities such as `2*x1 + x2 <= 5`, joined by
    /// `and` or newlines, blocks joined by `or`, parentheses for nesting.
    pub fn parse(text: &str) -> Result<Formula> {
        text::parse(text)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::True => write!(f, "true"),
            Node::Leaf(l) => write!(f, "{l}"),
            Node::And(c) => {
                for (i, k) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, " and ")?;
                    }
                    if matches!(k.node(), Node::Or(_)) {
                        write!(f, "({k})")?;
                    } else {
                        write!(f, "{k}")?;
                    }
                }
                Ok(())
            }
            Node::Or(c) => {
                for (i, k) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, " or ")?;
                    }
                    if matches!(k.node(), Node::And(_) | Node::Or(_)) {
                        write!(f, "({k})")?;
                    } else {
                        write!(f, "{k}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Evaluates `f` under `a`. Every variable of `f` must be bound, even ones a
/// short-circuit would skip.
pub fn evaluate(f: &Formula, a: &LengthAssignment) -> Result<bool> {
    match f.node() {
        Node::True => Ok(true),
        Node::Leaf(l) => l.holds(a),
        Node::And(c) => {
            let mut all = true;
            for k in c {
                all &= evaluate(k, a)?;
            }
            Ok(all)
        }
        Node::Or(c) => {
            let mut any = false;
            for k in c {
                any |= evaluate(k, a)?;
            }
            Ok(any)
        }
    }
}

/// Expands `f` into a list of conjunctive systems. Fails once more than `cap`
/// systems would be produced.
pub fn to_dnf(f: &Formula, cap: usize) -> Result<Vec<Vec<LinearInequality>>> {
    match f.node() {
        Node::True => Ok(vec![vec![]]),
        Node::Leaf(l) => Ok(vec![vec![l.clone()]]),
        Node::Or(c) => {
            let mut out = Vec::new();
            for k in c {
                out.extend(to_dnf(k, cap)?);
                if out.len() > cap {
                    return Err(Error::DnfTooLarge(cap));
                }
            }
            Ok(out)
        }
        Node::And(c) => {
            let mut acc: Vec<Vec<LinearInequality>> = vec![vec![]];
            for k in c {
                let part = to_dnf(k, cap)?;
                if acc.len().saturating_mul(part.len()) > cap {
                    return Err(Error::DnfTooLarge(cap));
                }
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for p in &part {
                        let mut sys = a.clone();
                        sys.extend(p.iter().cloned());
                        next.push(sys);
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}

/// Re-assembles a DNF list as an OR of ANDs.
pub fn from_dnf(systems: &[Vec<LinearInequality>]) -> Formula {
    if systems.is_empty() {
        // an empty disjunction is unsatisfiable: 0·x >= 1 has no solution
        let l = LinearInequality::new(vec![(BigInt::zero(), "_".into())], Rel::Ge, BigInt::one()).unwrap();
        return Formula::leaf(l);
    }
    Formula::or(systems.iter().map(|s| Formula::and_leaves(s.clone())).collect())
}

// ---------------------------------------------------------------------------
// Machine-integer form used by the search loops.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tri {
    False,
    Unknown,
    True,
}

#[derive(Debug, Clone)]
pub(crate) struct CLeaf {
    pub terms: Vec<(i128, usize)>,
    pub rel: Rel,
    pub k: i128,
}

#[derive(Debug)]
pub(crate) enum CNode {
    True,
    Leaf(CLeaf),
    And(Vec<Arc<CNode>>),
    Or(Vec<Arc<CNode>>),
}

fn to_i128(b: &BigInt) -> Option<i128> {
    let v = b.to_i64()?;
    Some(v as i128)
}

impl CLeaf {
    pub fn from_ineq(l: &LinearInequality, index: &HashMap<String, usize>) -> Option<CLeaf> {
        let mut terms = Vec::with_capacity(l.terms.len());
        for (c, v) in &l.terms {
            terms.push((to_i128(c)?, *index.get(v)?));
        }
        Some(CLeaf { terms, rel: l.rel, k: to_i128(&l.constant)? })
    }

    fn range(&self, lo: &[i128], hi: &[i128]) -> (i128, i128) {
        let mut mn: i128 = 0;
        let mut mx: i128 = 0;
        for &(c, v) in &self.terms {
            let a = c.saturating_mul(lo[v]);
            let b = c.saturating_mul(hi[v]);
            mn = mn.saturating_add(a.min(b));
            mx = mx.saturating_add(a.max(b));
        }
        (mn, mx)
    }

    pub fn tri(&self, lo: &[i128], hi: &[i128]) -> Tri {
        let (mn, mx) = self.range(lo, hi);
        let k = self.k;
        match self.rel {
            Rel::Le if mx <= k => Tri::True,
            Rel::Le if mn > k => Tri::False,
            Rel::Ge if mn >= k => Tri::True,
            Rel::Ge if mx < k => Tri::False,
            Rel::Eq if mn == k && mx == k => Tri::True,
            Rel::Eq if k < mn || k > mx => Tri::False,
            _ => Tri::Unknown,
        }
    }

    /// Bounds-consistency step; returns (changed, feasible).
    fn tighten(&self, lo: &mut [i128], hi: &mut [i128]) -> (bool, bool) {
        let mut changed = false;
        let upper = matches!(self.rel, Rel::Le | Rel::Eq);
        let lower = matches!(self.rel, Rel::Ge | Rel::Eq);
        for pass in 0..2 {
            // pass 0: Σ c·x <= k; pass 1: Σ c·x >= k (i.e. Σ -c·x <= -k)
            if (pass == 0 && !upper) || (pass == 1 && !lower) {
                continue;
            }
            let sign: i128 = if pass == 0 { 1 } else { -1 };
            let k = sign * self.k;
            let mut mins = Vec::with_capacity(self.terms.len());
            let mut total: i128 = 0;
            for &(c, v) in &self.terms {
                let c = sign * c;
                let m = c.saturating_mul(lo[v]).min(c.saturating_mul(hi[v]));
                mins.push(m);
                total = total.saturating_add(m);
            }
            if total > k {
                return (changed, false);
            }
            for (idx, &(c, v)) in self.terms.iter().enumerate() {
                let c = sign * c;
                if c == 0 {
                    continue;
                }
                let rest = total.saturating_sub(mins[idx]);
                let slack = k.saturating_sub(rest);
                if c > 0 {
                    let ub = slack.div_euclid(c);
                    if ub < hi[v] {
                        hi[v] = ub;
                        changed = true;
                    }
                } else {
                    // c·x <= slack with c < 0  ⇔  x >= ceil(slack / c)
                    let lb = ceil_div(slack, c);
                    if lb > lo[v] {
                        lo[v] = lb;
                        changed = true;
                    }
                }
                if lo[v] > hi[v] {
                    return (changed, false);
                }
            }
        }
        (changed, true)
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    // div_euclid leaves a nonnegative remainder, which is already the ceiling for b < 0
    let q = a.div_euclid(b);
    if b > 0 && q * b != a {
        q + 1
    } else {
        q
    }
}

/// Runs bounds propagation to a fixpoint (bounded number of rounds).
pub(crate) fn propagate(leaves: &[CLeaf], lo: &mut [i128], hi: &mut [i128]) -> bool {
    for v in 0..lo.len() {
        if lo[v] > hi[v] {
            return false;
        }
    }
    for _ in 0..64 {
        let mut changed = false;
        for l in leaves {
            let (c, ok) = l.tighten(lo, hi);
            if !ok {
                return false;
            }
            changed |= c;
        }
        if !changed {
            break;
        }
    }
    true
}

impl CNode {
    pub fn compile(f: &Formula, index: &HashMap<String, usize>) -> Option<Arc<CNode>> {
        let mut memo: HashMap<*const Node, Arc<CNode>> = HashMap::new();
        Self::compile_memo(f, index, &mut memo)
    }

    fn compile_memo(
        f: &Formula,
        index: &HashMap<String, usize>,
        memo: &mut HashMap<*const Node, Arc<CNode>>,
    ) -> Option<Arc<CNode>> {
        let key = Arc::as_ptr(&f.0);
        if let Some(c) = memo.get(&key) {
            return Some(c.clone());
        }
        let out = Arc::new(match f.node() {
            Node::True => CNode::True,
            Node::Leaf(l) => CNode::Leaf(CLeaf::from_ineq(l, index)?),
            Node::And(c) => CNode::And(
                c.iter().map(|k| Self::compile_memo(k, index, memo)).collect::<Option<Vec<_>>>()?,
            ),
            Node::Or(c) => CNode::Or(
                c.iter().map(|k| Self::compile_memo(k, index, memo)).collect::<Option<Vec<_>>>()?,
            ),
        });
        memo.insert(key, out.clone());
        Some(out)
    }

    pub fn tri(&self, lo: &[i128], hi: &[i128]) -> Tri {
        match self {
            CNode::True => Tri::True,
            CNode::Leaf(l) => l.tri(lo, hi),
            CNode::And(c) => {
                let mut all = true;
                for k in c {
                    match k.tri(lo, hi) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => all = false,
                        Tri::True => {}
                    }
                }
                if all {
                    Tri::True
                } else {
                    Tri::Unknown
                }
            }
            CNode::Or(c) => {
                let mut none = true;
                for k in c {
                    match k.tri(lo, hi) {
                        Tri::True => return Tri::True,
                        Tri::Unknown => none = false,
                        Tri::False => {}
                    }
                }
                if none {
                    Tri::False
                } else {
                    Tri::Unknown
                }
            }
        }
    }

    pub fn top_leaves(&self) -> Vec<CLeaf> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            match n {
                CNode::Leaf(l) => out.push(l.clone()),
                CNode::And(c) => stack.extend(c.iter().map(|a| a.as_ref())),
                _ => {}
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Bounded feasibility stream.

/// Lazily enumerates the assignments of `[0, bound]^vars` satisfying a formula
/// and extra inequalities, in lexicographic order (variables ordered by name).
pub struct FeasibleAssignments {
    vars: Vec<String>,
    exact: Formula,
    compiled: Option<(Arc<CNode>, Vec<CLeaf>)>,
    stack: Vec<Frame>,
    done: bool,
}

struct Frame {
    lo: Vec<i128>,
    hi: Vec<i128>,
    next: i128,
}

/// Streams the assignments over `vars ∪ var(f) ∪ var(extra)` with every value
/// in `[0, bound]` that satisfy `f` and all of `extra`.
pub fn feasible_assignments_bounded(
    f: &Formula,
    vars: &BTreeSet<String>,
    bound: u64,
    extra: &[LinearInequality],
) -> FeasibleAssignments {
    let mut all: BTreeSet<String> = vars.clone();
    all.extend(f.vars());
    for e in extra {
        all.extend(e.vars().map(str::to_string));
    }
    let vars: Vec<String> = all.into_iter().collect();
    let mut kids = vec![f.clone()];
    kids.extend(extra.iter().cloned().map(Formula::leaf));
    let exact = Formula::and(kids);
    let index: HashMap<String, usize> = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let compiled = CNode::compile(&exact, &index).map(|c| {
        let leaves = c.top_leaves();
        (c, leaves)
    });
    let n = vars.len();
    let mut lo = vec![0i128; n];
    let mut hi = vec![bound as i128; n];
    let mut it = FeasibleAssignments { vars, exact, compiled, stack: Vec::new(), done: false };
    if let Some((c, leaves)) = &it.compiled {
        if !propagate(leaves, &mut lo, &mut hi) || c.tri(&lo, &hi) == Tri::False {
            it.done = true;
            return it;
        }
    }
    let next = if n > 0 { lo[0] } else { 0 };
    it.stack.push(Frame { lo, hi, next });
    it
}

impl FeasibleAssignments {
    fn assignment(&self, lo: &[i128]) -> LengthAssignment {
        self.vars.iter().cloned().zip(lo.iter().map(|&v| v as u64)).collect()
    }

    fn accept(&self, lo: &[i128]) -> bool {
        match &self.compiled {
            Some((c, _)) => c.tri(lo, lo) == Tri::True,
            None => evaluate(&self.exact, &self.assignment(lo)).unwrap_or(false),
        }
    }
}

impl Iterator for FeasibleAssignments {
    type Item = LengthAssignment;

    fn next(&mut self) -> Option<LengthAssignment> {
        let n = self.vars.len();
        if n == 0 {
            if self.done {
                return None;
            }
            self.done = true;
            let lo = self.stack.pop().map(|f| f.lo).unwrap_or_default();
            return if self.accept(&lo) { Some(LengthAssignment::new()) } else { None };
        }
        while !self.done {
            let d = match self.stack.len() {
                0 => {
                    self.done = true;
                    return None;
                }
                k => k - 1,
            };
            let top = self.stack.last_mut().unwrap();
            if top.next > top.hi[d] {
                self.stack.pop();
                continue;
            }
            let v = top.next;
            top.next += 1;
            let mut lo = top.lo.clone();
            let mut hi = top.hi.clone();
            lo[d] = v;
            hi[d] = v;
            if let Some((c, leaves)) = &self.compiled {
                if !propagate(leaves, &mut lo, &mut hi) || c.tri(&lo, &hi) == Tri::False {
                    continue;
                }
            }
            if d + 1 == n {
                if self.accept(&lo) {
                    return Some(self.assignment(&lo));
                }
                continue;
            }
            let next = lo[d + 1];
            self.stack.push(Frame { lo, hi, next });
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Text syntax.

mod text {
    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    enum Tok {
        Int(BigInt),
        Ident(String),
        Star,
        Plus,
        Minus,
        Rel(Rel),
        And,
        Or,
        True,
        LParen,
        RParen,
        Nl,
    }

    fn is_ident_char(c: char) -> bool {
        !c.is_whitespace() && !"*+-<>=()≤≥,".contains(c)
    }

    fn lex(s: &str) -> Result<Vec<Tok>> {
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        let mut out = Vec::new();
        while i < chars.len() {
            let c = chars[i];
            match c {
                '\n' | ';' => {
                    out.push(Tok::Nl);
                    i += 1;
                }
                c if c.is_whitespace() => i += 1,
                '*' => {
                    out.push(Tok::Star);
                    i += 1;
                }
                '+' => {
                    out.push(Tok::Plus);
                    i += 1;
                }
                '-' => {
                    out.push(Tok::Minus);
                    i += 1;
                }
                '(' => {
                    out.push(Tok::LParen);
                    i += 1;
                }
                ')' => {
                    out.push(Tok::RParen);
                    i += 1;
                }
                '≤' => {
                    out.push(Tok::Rel(Rel::Le));
                    i += 1;
                }
                '≥' => {
                    out.push(Tok::Rel(Rel::Ge));
                    i += 1;
                }
                '<' | '>' | '=' => {
                    let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
                    if let Some(r) = Rel::parse(&two) {
                        out.push(Tok::Rel(r));
                        i += 2;
                    } else if c == '=' {
                        out.push(Tok::Rel(Rel::Eq));
                        i += 1;
                    } else {
                        return Err(Error::FormulaSyntax(format!("strict relation `{c}` not supported")));
                    }
                }
                c if c.is_ascii_digit() => {
                    let st = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let digits: String = chars[st..i].iter().collect();
                    out.push(Tok::Int(digits.parse().unwrap()));
                }
                c if is_ident_char(c) => {
                    let st = i;
                    while i < chars.len() && is_ident_char(chars[i]) {
                        i += 1;
                    }
                    let w: String = chars[st..i].iter().collect();
                    out.push(match w.as_str() {
                        "and" | "AND" | "&&" => Tok::And,
                        "or" | "OR" | "||" => Tok::Or,
                        "true" | "TRUE" => Tok::True,
                        _ => Tok::Ident(w),
                    });
                }
                other => return Err(Error::FormulaSyntax(format!("unexpected `{other}`"))),
            }
        }
        Ok(out)
    }

    struct P {
        toks: Vec<Tok>,
        pos: usize,
    }

    impl P {
        fn peek(&self) -> Option<&Tok> {
            self.toks.get(self.pos)
        }

        fn skip_nl(&mut self) {
            while self.peek() == Some(&Tok::Nl) {
                self.pos += 1;
            }
        }

        fn or_expr(&mut self) -> Result<Formula> {
            let mut kids = vec![self.and_expr()?];
            loop {
                let save = self.pos;
                self.skip_nl();
                if self.peek() == Some(&Tok::Or) {
                    self.pos += 1;
                    self.skip_nl();
                    kids.push(self.and_expr()?);
                } else {
                    self.pos = save;
                    break;
                }
            }
            Ok(if kids.len() == 1 { kids.pop().unwrap() } else { Formula::or(kids) })
        }

        fn and_expr(&mut self) -> Result<Formula> {
            self.skip_nl();
            let mut kids = vec![self.atom()?];
            loop {
                let save = self.pos;
                let mut saw_nl = false;
                while self.peek() == Some(&Tok::Nl) {
                    self.pos += 1;
                    saw_nl = true;
                }
                match self.peek() {
                    Some(Tok::And) => {
                        self.pos += 1;
                        self.skip_nl();
                        kids.push(self.atom()?);
                    }
                    Some(Tok::Or) | Some(Tok::RParen) | None => {
                        self.pos = save;
                        break;
                    }
                    Some(_) if saw_nl => kids.push(self.atom()?),
                    Some(t) => return Err(Error::FormulaSyntax(format!("unexpected {t:?}"))),
                }
            }
            Ok(Formula::and(kids))
        }

        fn atom(&mut self) -> Result<Formula> {
            match self.peek() {
                Some(Tok::True) => {
                    self.pos += 1;
                    Ok(Formula::truth())
                }
                Some(Tok::LParen) => {
                    // could be a parenthesised formula; inequalities never start with `(`
                    self.pos += 1;
                    let f = self.or_expr()?;
                    self.skip_nl();
                    if self.peek() != Some(&Tok::RParen) {
                        return Err(Error::FormulaSyntax("missing `)`".into()));
                    }
                    self.pos += 1;
                    Ok(f)
                }
                _ => Ok(Formula::leaf(self.ineq()?)),
            }
        }

        /// Returns (terms, constant) of a linear expression.
        fn expr(&mut self) -> Result<(Vec<(BigInt, String)>, BigInt)> {
            let mut terms: Vec<(BigInt, String)> = Vec::new();
            let mut constant = BigInt::zero();
            let mut first = true;
            loop {
                let mut sign = BigInt::one();
                match self.peek() {
                    Some(Tok::Plus) if !first => self.pos += 1,
                    Some(Tok::Minus) => {
                        self.pos += 1;
                        sign = -sign;
                    }
                    _ if first => {}
                    _ => break,
                }
                first = false;
                match self.peek().cloned() {
                    Some(Tok::Int(n)) => {
                        self.pos += 1;
                        if self.peek() == Some(&Tok::Star) {
                            self.pos += 1;
                            match self.peek().cloned() {
                                Some(Tok::Ident(v)) => {
                                    self.pos += 1;
                                    push_term(&mut terms, sign * n, v);
                                }
                                t => return Err(Error::FormulaSyntax(format!("expected variable, got {t:?}"))),
                            }
                        } else if let Some(Tok::Ident(v)) = self.peek().cloned() {
                            self.pos += 1;
                            push_term(&mut terms, sign * n, v);
                        } else {
                            constant += sign * n;
                        }
                    }
                    Some(Tok::Ident(v)) => {
                        self.pos += 1;
                        push_term(&mut terms, sign, v);
                    }
                    t => return Err(Error::FormulaSyntax(format!("expected term, got {t:?}"))),
                }
            }
            Ok((terms, constant))
        }

        fn ineq(&mut self) -> Result<LinearInequality> {
            let (mut lt, lc) = self.expr()?;
            let rel = match self.peek() {
                Some(Tok::Rel(r)) => *r,
                t => return Err(Error::FormulaSyntax(format!("expected relation, got {t:?}"))),
            };
            self.pos += 1;
            let (rt, rc) = self.expr()?;
            for (c, v) in rt {
                push_term(&mut lt, -c, v);
            }
            LinearInequality::new(lt, rel, rc - lc)
        }
    }

    fn push_term(terms: &mut Vec<(BigInt, String)>, c: BigInt, v: String) {
        match terms.iter_mut().find(|(_, n)| *n == v) {
            Some(slot) => slot.0 += c,
            None => terms.push((c, v)),
        }
    }

    pub fn parse(s: &str) -> Result<Formula> {
        let toks = lex(s)?;
        let mut p = P { toks, pos: 0 };
        p.skip_nl();
        if p.peek().is_none() {
            return Ok(Formula::truth());
        }
        let f = p.or_expr()?;
        p.skip_nl();
        if p.pos != p.toks.len() {
            return Err(Error::FormulaSyntax(format!("trailing input at token {}", p.pos)));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(pairs: &[(&str, u64)]) -> LengthAssignment {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn example1() -> Formula {
        Formula::parse("2*x1 + x2 <= 5 and x2 >= 1").unwrap()
    }

    #[test]
    fn evaluate_example1() {
        assert!(evaluate(&example1(), &a(&[("x1", 2), ("x2", 1)])).unwrap());
        assert!(!evaluate(&example1(), &a(&[("x1", 2), ("x2", 2)])).unwrap());
        assert!(evaluate(&Formula::truth(), &a(&[])).unwrap());
    }

    #[test]
    fn evaluate_names_unbound_variable() {
        let e = evaluate(&example1(), &a(&[("x1", 2)])).unwrap_err();
        assert_eq!(e, Error::UnboundVariable("x2".into()));
        // also under an OR whose first branch already holds
        let f = Formula::parse("x1 >= 0 or y >= 0").unwrap();
        assert_eq!(evaluate(&f, &a(&[("x1", 1)])).unwrap_err(), Error::UnboundVariable("y".into()));
    }

    #[test]
    fn inequality_rejects_repeated_variable() {
        let t = vec![(BigInt::one(), "x".to_string()), (BigInt::one(), "x".to_string())];
        assert!(LinearInequality::new(t, Rel::Le, BigInt::zero()).is_err());
        assert!(LinearInequality::new(vec![], Rel::Le, BigInt::zero()).is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        let f = Formula::parse("2*x1 + x2 <= 5\nx2 >= 1\nor\nx1 = 3").unwrap();
        let shown = f.to_string();
        assert_eq!(shown, "(2*x1 + x2 <= 5 and x2 >= 1) or x1 = 3");
        assert_eq!(Formula::parse(&shown).unwrap(), f);
        let g = Formula::parse("x + 3 >= 2*y - 1").unwrap();
        assert_eq!(g.to_string(), "x - 2*y >= -4");
    }

    #[test]
    fn dnf_distributes() {
        let f = Formula::parse("(x1 = 1 or x1 = 2) and x2 = 3").unwrap();
        let d = to_dnf(&f, 100).unwrap();
        let shown: Vec<String> =
            d.iter().map(|s| s.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")).collect();
        assert_eq!(shown, vec!["x1 = 1, x2 = 3", "x1 = 2, x2 = 3"]);
        let g = Formula::parse("x >= 1 and y <= 2").unwrap();
        assert_eq!(to_dnf(&g, 1).unwrap().len(), 1);
    }

    #[test]
    fn dnf_cap_is_enforced() {
        let f = Formula::parse("(a = 1 or a = 2) and (b = 1 or b = 2) and (c = 1 or c = 2)").unwrap();
        assert_eq!(to_dnf(&f, 7).unwrap_err(), Error::DnfTooLarge(7));
        assert_eq!(to_dnf(&f, 8).unwrap().len(), 8);
    }

    #[test]
    fn dnf_of_subset_sum_embedding_agrees_with_evaluate() {
        // S = {1, 2}, T = 3, n = 2
        let f = Formula::parse("(x1 = 2 or x1 = 1) and (x2 = 3 or x2 = 1) and x1 + x2 = 5").unwrap();
        let d = to_dnf(&f, 64).unwrap();
        assert_eq!(d.len(), 4);
        let g = from_dnf(&d);
        for x1 in 0..=6 {
            for x2 in 0..=6 {
                let asg = a(&[("x1", x1), ("x2", x2)]);
                assert_eq!(evaluate(&f, &asg).unwrap(), evaluate(&g, &asg).unwrap());
            }
        }
    }

    #[test]
    fn feasible_stream_examples() {
        let extra = LinearInequality::from_terms(&[(2, "x1"), (1, "x2")], Rel::Eq, 5).unwrap();
        let vars: BTreeSet<String> = ["x1", "x2"].iter().map(|s| s.to_string()).collect();
        let got: Vec<_> = feasible_assignments_bounded(&example1(), &vars, 5, &[extra]).collect();
        assert!(got.contains(&a(&[("x1", 2), ("x2", 1)])));
        for g in &got {
            assert!(evaluate(&example1(), g).unwrap());
        }

        let contra = Formula::parse("x = 1 and x = 2").unwrap();
        assert_eq!(feasible_assignments_bounded(&contra, &BTreeSet::new(), 10, &[]).count(), 0);

        let vars: BTreeSet<String> = ["x".to_string()].into();
        let got: Vec<_> = feasible_assignments_bounded(&Formula::truth(), &vars, 1, &[]).collect();
        assert_eq!(got, vec![a(&[("x", 0)]), a(&[("x", 1)])]);
    }

    #[test]
    fn feasible_stream_is_lexicographic() {
        let f = Formula::parse("a + b <= 2 or a = 3").unwrap();
        let got: Vec<_> = feasible_assignments_bounded(&f, &BTreeSet::new(), 3, &[]).collect();
        let as_vec: Vec<Vec<u64>> = got.iter().map(|m| m.values().copied().collect()).collect();
        let mut sorted = as_vec.clone();
        sorted.sort();
        assert_eq!(as_vec, sorted);
        let mut expected = Vec::new();
        for x in 0..=3u64 {
            for y in 0..=3u64 {
                if x + y <= 2 || x == 3 {
                    expected.push(vec![x, y]);
                }
            }
        }
        assert_eq!(as_vec, expected);
    }

    #[test]
    fn propagation_tightens_with_negative_coefficients() {
        let l = CLeaf { terms: vec![(1, 0), (-2, 1)], rel: Rel::Ge, k: 1 };
        let mut lo = vec![0, 0];
        let mut hi = vec![10, 10];
        assert!(propagate(&[l], &mut lo, &mut hi));
        // x - 2y >= 1: x >= 1, y <= 4
        assert_eq!((lo[0], hi[1]), (1, 4));
    }

    #[test]
    fn ceil_div_matches_definition() {
        for a in -20i128..=20 {
            for b in [-7i128, -3, -1, 1, 2, 5] {
                let want = (a as f64 / b as f64).ceil() as i128;
                assert_eq!(ceil_div(a, b), want, "{a}/{b}");
            }
        }
    }
}
