//! JSON encodings of patterns, formulas, regular constraints, automata,
//! construction pairs and results. Objects are written with sorted keys, so
//! identical values serialize to identical bytes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::automata::{Configuration, TwoCounterAutomaton};
use crate::constraints::{Formula, LinearInequality, Node, Rel};
use crate::error::{Error, Result};
use crate::langops::BoundedVerdict;
use crate::matcher::MatchCertificate;
use crate::pattern::{Alphabet, ConstrainedPattern, Mode, Pattern, Substitution, Symbol};
use crate::reductions::{
    build_3sat, build_appb, build_appc_skeleton, build_appd, build_subsetsum, toy_inner, toy_predicate, Clause,
    Construction, ConstructionPair, InnerPredicate, ExternalPredicate,
};
use crate::regular::{RegularConstraint, RegularConstraintMap, RegularSource};

fn err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Json(format!("{path}: {msg}"))
}

/// Parses JSON text; syntax errors carry line and column.
pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}

/// Compact, key-sorted serialization.
pub fn to_string(v: &Value) -> String {
    serde_json::to_string(v).expect("values built here always serialize")
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| err(path, format!("missing field `{key}`")))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| err(path, "expected a string"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn as_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| err(path, "expected a nonnegative integer"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| err(path, "expected an integer"))
}

fn bigint(v: &Value, path: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| err(path, "expected an integer")),
        Value::String(s) => s.parse().map_err(|_| err(path, "expected an integer")),
        _ => Err(err(path, "expected an integer")),
    }
}

fn bigint_value(n: &BigInt) -> Value {
    match i64::try_from(n) {
        Ok(k) => json!(k),
        Err(_) => json!(n.to_string()),
    }
}

pub fn alphabet_to_json(ab: &Alphabet) -> Value {
    Value::Array(ab.letters().iter().map(|c| json!(c.to_string())).collect())
}

pub fn alphabet_from_json(v: &Value, path: &str) -> Result<Alphabet> {
    let mut letters = Vec::new();
    for (k, l) in as_array(v, path)?.iter().enumerate() {
        let s = as_str(l, &format!("{path}[{k}]"))?;
        let mut cs = s.chars();
        match (cs.next(), cs.next()) {
            (Some(c), None) => letters.push(c),
            _ => return Err(err(&format!("{path}[{k}]"), "letters are single characters")),
        }
    }
    Alphabet::new(letters)
}

pub fn symbol_to_json(s: &Symbol) -> Value {
    match s {
        Symbol::Term(c) => json!({ "t": c.to_string() }),
        Symbol::Var(v) => json!({ "v": v }),
    }
}

fn symbol_from_json(v: &Value, path: &str) -> Result<Symbol> {
    if let Some(t) = v.get("t") {
        let s = as_str(t, path)?;
        let mut cs = s.chars();
        return match (cs.next(), cs.next()) {
            (Some(c), None) => Ok(Symbol::Term(c)),
            _ => Err(err(path, "terminals are single letters")),
        };
    }
    if let Some(x) = v.get("v") {
        return Ok(Symbol::Var(as_str(x, path)?.to_owned()));
    }
    Err(err(path, "a symbol is {\"t\": letter} or {\"v\": name}"))
}

pub fn pattern_to_json(p: &Pattern) -> Value {
    json!({
        "alphabet": alphabet_to_json(p.alphabet()),
        "symbols": p.symbols().iter().map(symbol_to_json).collect::<Vec<_>>(),
    })
}

fn symbols_from_json(v: &Value, ab: &Alphabet, path: &str) -> Result<Pattern> {
    match v {
        Value::String(s) => Pattern::parse(s, ab),
        _ => {
            let syms = as_array(v, path)?
                .iter()
                .enumerate()
                .map(|(k, s)| symbol_from_json(s, &format!("{path}[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            Pattern::new(syms, ab)
        }
    }
}

/// A pattern object; `alphabet` may be omitted when `default` is given.
/// `symbols` is a symbol list or pattern text.
pub fn pattern_from_json(v: &Value, default: Option<&Alphabet>, path: &str) -> Result<Pattern> {
    let ab = match (v.get("alphabet"), default) {
        (Some(a), _) => alphabet_from_json(a, &format!("{path}.alphabet"))?,
        (None, Some(d)) => d.clone(),
        (None, None) => return Err(err(path, "missing field `alphabet`")),
    };
    symbols_from_json(field(v, "symbols", path)?, &ab, &format!("{path}.symbols"))
}

pub fn inequality_to_json(l: &LinearInequality) -> Value {
    let terms: Vec<Value> = l.terms().iter().map(|(c, v)| json!([bigint_value(c), v])).collect();
    json!({ "ineq": { "const": bigint_value(l.constant()), "rel": l.rel().as_str(), "terms": terms } })
}

pub fn formula_to_json(f: &Formula) -> Value {
    match f.node() {
        Node::True => json!({ "op": "true" }),
        Node::Leaf(l) => inequality_to_json(l),
        Node::And(c) => json!({ "op": "and", "args": c.iter().map(formula_to_json).collect::<Vec<_>>() }),
        Node::Or(c) => json!({ "op": "or", "args": c.iter().map(formula_to_json).collect::<Vec<_>>() }),
    }
}

/// A formula tree, or formula text.
pub fn formula_from_json(v: &Value, path: &str) -> Result<Formula> {
    if let Value::String(s) = v {
        return Formula::parse(s);
    }
    if let Some(q) = v.get("ineq") {
        let p = format!("{path}.ineq");
        let rel_s = as_str(field(q, "rel", &p)?, &format!("{p}.rel"))?;
        let rel = Rel::parse(rel_s).ok_or_else(|| err(&format!("{p}.rel"), format!("unknown relation `{rel_s}`")))?;
        let mut terms = Vec::new();
        for (k, t) in as_array(field(q, "terms", &p)?, &format!("{p}.terms"))?.iter().enumerate() {
            let tp = format!("{p}.terms[{k}]");
            match t.as_array().map(Vec::as_slice) {
                Some([c, x]) => terms.push((bigint(c, &tp)?, as_str(x, &tp)?.to_owned())),
                _ => return Err(err(&tp, "a term is [coefficient, variable]")),
            }
        }
        let c = bigint(field(q, "const", &p)?, &format!("{p}.const"))?;
        return Ok(Formula::leaf(LinearInequality::new(terms, rel, c)?));
    }
    let op = as_str(field(v, "op", path)?, &format!("{path}.op"))?;
    let args = || -> Result<Vec<Formula>> {
        as_array(field(v, "args", path)?, &format!("{path}.args"))?
            .iter()
            .enumerate()
            .map(|(k, a)| formula_from_json(a, &format!("{path}.args[{k}]")))
            .collect()
    };
    match op {
        "true" => Ok(Formula::truth()),
        "and" => Formula::raw(Node::And(args()?)),
        "or" => Formula::raw(Node::Or(args()?)),
        _ => Err(err(&format!("{path}.op"), format!("unknown operator `{op}`"))),
    }
}

pub fn regular_to_json(s: &RegularSource) -> Value {
    let list = |v: &[RegularSource]| Value::Array(v.iter().map(regular_to_json).collect());
    match s {
        RegularSource::Regex(r) => json!(r),
        RegularSource::Words(ws) => json!({ "words": ws }),
        RegularSource::Complement(inner) => json!({ "complement": regular_to_json(inner) }),
        RegularSource::Intersect(v) => json!({ "intersect": list(v) }),
        RegularSource::Union(v) => json!({ "union": list(v) }),
        RegularSource::Concat(v) => json!({ "concat": list(v) }),
    }
}

/// A regex string, a word list (bare or under `words`), or a `complement`,
/// `intersect`, `union` or `concat` node.
pub fn regular_from_json(v: &Value, path: &str) -> Result<RegularSource> {
    let words = |a: &Value, p: &str| -> Result<RegularSource> {
        let ws = as_array(a, p)?
            .iter()
            .enumerate()
            .map(|(k, w)| as_str(w, &format!("{p}[{k}]")).map(str::to_owned))
            .collect::<Result<Vec<_>>>()?;
        Ok(RegularSource::Words(ws))
    };
    let list = |a: &Value, p: &str| -> Result<Vec<RegularSource>> {
        as_array(a, p)?.iter().enumerate().map(|(k, x)| regular_from_json(x, &format!("{p}[{k}]"))).collect()
    };
    match v {
        Value::String(s) => Ok(RegularSource::Regex(s.clone())),
        Value::Array(_) => words(v, path),
        Value::Object(m) if m.len() == 1 => {
            let (k, x) = m.iter().next().expect("one entry");
            let p = format!("{path}.{k}");
            match k.as_str() {
                "words" => words(x, &p),
                "complement" => Ok(RegularSource::complement(regular_from_json(x, &p)?)),
                "intersect" => Ok(RegularSource::Intersect(list(x, &p)?)),
                "union" => Ok(RegularSource::Union(list(x, &p)?)),
                "concat" => Ok(RegularSource::Concat(list(x, &p)?)),
                _ => Err(err(&p, format!("unknown regular operator `{k}`"))),
            }
        }
        _ => Err(err(path, "expected a regex string, a word list or an operator object")),
    }
}

pub fn regular_map_to_json(m: &RegularConstraintMap) -> Value {
    Value::Object(m.iter().map(|(k, c)| (k.clone(), regular_to_json(c.source()))).collect())
}

pub fn constrained_to_json(cp: &ConstrainedPattern) -> Value {
    let mut v = pattern_to_json(cp.pattern());
    let o = v.as_object_mut().expect("object");
    o.insert("mode".into(), json!(cp.mode().as_str()));
    o.insert("length".into(), formula_to_json(cp.length()));
    o.insert("regular".into(), regular_map_to_json(cp.regular()));
    v
}

/// A constrained pattern; `mode` defaults to `E`, `length` to true and
/// `regular` to no constraints.
pub fn constrained_from_json(v: &Value, path: &str) -> Result<ConstrainedPattern> {
    let p = pattern_from_json(v, None, path)?;
    let mode = match v.get("mode") {
        Some(m) => Mode::parse(as_str(m, &format!("{path}.mode"))?)?,
        None => Mode::E,
    };
    let length = match v.get("length") {
        Some(f) => formula_from_json(f, &format!("{path}.length"))?,
        None => Formula::truth(),
    };
    let mut regular = RegularConstraintMap::new();
    if let Some(r) = v.get("regular") {
        let m = r.as_object().ok_or_else(|| err(&format!("{path}.regular"), "expected an object"))?;
        for (x, s) in m {
            let rp = format!("{path}.regular.{x}");
            regular.insert(x.clone(), RegularConstraint::new(regular_from_json(s, &rp)?, p.alphabet())?);
        }
    }
    ConstrainedPattern::new(p, length, regular, mode)
}

pub fn automaton_to_json(a: &TwoCounterAutomaton) -> Value {
    let delta: Vec<Value> = a
        .rows()
        .map(|(&(from, c1, c2), moves)| {
            let to: Vec<Value> = moves.iter().map(|&(q, r1, r2)| json!([q, r1, r2])).collect();
            json!({ "from": from, "c1": c1, "c2": c2, "to": to })
        })
        .collect();
    json!({ "states": a.states(), "finals": a.finals().iter().collect::<Vec<_>>(), "delta": delta })
}

pub fn automaton_from_json(v: &Value, path: &str) -> Result<TwoCounterAutomaton> {
    let states = as_u64(field(v, "states", path)?, &format!("{path}.states"))? as usize;
    let finals = as_array(field(v, "finals", path)?, &format!("{path}.finals"))?
        .iter()
        .enumerate()
        .map(|(k, f)| as_u64(f, &format!("{path}.finals[{k}]")).map(|x| x as usize))
        .collect::<Result<Vec<_>>>()?;
    let mut delta = Vec::new();
    let empty = Value::Array(Vec::new());
    for (k, row) in as_array(v.get("delta").unwrap_or(&empty), &format!("{path}.delta"))?.iter().enumerate() {
        let rp = format!("{path}.delta[{k}]");
        let num = |key: &str| -> Result<u64> { as_u64(field(row, key, &rp)?, &format!("{rp}.{key}")) };
        let flag = |key: &str| -> Result<u8> {
            u8::try_from(num(key)?).map_err(|_| err(&format!("{rp}.{key}"), "zero flags must be 0 or 1"))
        };
        let (from, c1, c2) = (num("from")? as usize, flag("c1")?, flag("c2")?);
        let mut moves = Vec::new();
        for (m, t) in as_array(field(row, "to", &rp)?, &format!("{rp}.to"))?.iter().enumerate() {
            let tp = format!("{rp}.to[{m}]");
            let update = |x: &Value| -> Result<i8> {
                i8::try_from(as_i64(x, &tp)?).map_err(|_| err(&tp, "counter updates must be in {-1,0,1}"))
            };
            match t.as_array().map(Vec::as_slice) {
                Some([q, r1, r2]) => moves.push((as_u64(q, &tp)? as usize, update(r1)?, update(r2)?)),
                _ => return Err(err(&tp, "a move is [state, r1, r2]")),
            }
        }
        delta.push((from, c1, c2, moves));
    }
    TwoCounterAutomaton::new(states, finals, delta)
}

pub fn configuration_to_json(c: &Configuration) -> Value {
    json!([c.state, c.m1, c.m2])
}

pub fn substitution_to_json(h: &Substitution) -> Value {
    Value::Object(h.iter().map(|(k, w)| (k.clone(), json!(w))).collect())
}

pub fn certificate_to_json(c: &MatchCertificate) -> Value {
    json!({ "lengths": c.lengths, "substitution": substitution_to_json(&c.substitution) })
}

pub fn verdict_to_json(v: &BoundedVerdict) -> Value {
    match v {
        BoundedVerdict::Holds(n) => json!({ "verdict": "holds", "max_len": n }),
        BoundedVerdict::Counterexample { word, side } => {
            json!({ "verdict": "counterexample", "word": word, "side": side.as_str() })
        }
    }
}

pub fn pair_to_json(pair: &ConstructionPair) -> Value {
    let predicates: Vec<Value> = pair
        .predicates
        .iter()
        .map(|p| {
            let mut o = Map::new();
            o.insert("index".into(), json!(p.index));
            o.insert("family".into(), json!(p.family));
            o.insert("label".into(), json!(p.label));
            o.insert("gamma".into(), json!(p.gamma.symbols().iter().map(symbol_to_json).collect::<Vec<_>>()));
            if let Some(d) = &p.delta {
                o.insert("delta".into(), json!(d.symbols().iter().map(symbol_to_json).collect::<Vec<_>>()));
            }
            if let Some(e) = &p.eta {
                o.insert("eta".into(), json!(e.symbols().iter().map(symbol_to_json).collect::<Vec<_>>()));
            }
            o.insert("extra".into(), formula_to_json(&p.extra));
            Value::Object(o)
        })
        .collect();
    let fragments: BTreeMap<&String, Value> = pair
        .fragments
        .iter()
        .map(|(k, p)| (k, json!(p.symbols().iter().map(symbol_to_json).collect::<Vec<_>>())))
        .collect();
    let mut o = Map::new();
    o.insert("construction".into(), json!(pair.construction.as_str()));
    o.insert("left".into(), constrained_to_json(&pair.left));
    o.insert("right".into(), constrained_to_json(&pair.right));
    o.insert("predicates".into(), Value::Array(predicates));
    o.insert("distinguished".into(), json!(pair.distinguished));
    if !fragments.is_empty() {
        o.insert("fragments".into(), json!(fragments));
    }
    if let Some(a) = &pair.automaton {
        o.insert("automaton".into(), automaton_to_json(a));
    }
    Value::Object(o)
}

fn alphabet_or(v: &Value, default: Alphabet) -> Result<Alphabet> {
    match v.get("alphabet") {
        Some(a) => alphabet_from_json(a, "alphabet"),
        None => Ok(default),
    }
}

fn automaton_of_instance(v: &Value) -> Result<TwoCounterAutomaton> {
    match v.get("automaton") {
        Some(a) => automaton_from_json(a, "automaton"),
        None => automaton_from_json(v, "$"),
    }
}

fn flag(v: &Value, key: &str) -> bool {
    v.get(key).and_then(Value::as_bool).unwrap_or(false)
}

/// Builds a construction from its instance file.
///
/// * `3sat`: `{"clauses": [[1,2,3], ...]}`
/// * `subsetsum`: `{"S": [...], "T": n}`
/// * `appD`: an automaton, or `{"automaton": ...}`
/// * `appB`: an automaton, or `{"automaton", "alphabet"?, "predicates"?: [{"gamma","delta"}], "toy"?}`
/// * `appC`: `{"toy": true}` or `{"alphabet"?, "inner": [{"gamma","delta"}], "alpha1", "alpha2", "i_len"}`
pub fn build_from_instance(c: Construction, v: &Value) -> Result<ConstructionPair> {
    match c {
        Construction::ThreeSat => {
            let mut clauses: Vec<Clause> = Vec::new();
            for (k, cl) in as_array(field(v, "clauses", "$")?, "clauses")?.iter().enumerate() {
                let p = format!("clauses[{k}]");
                let lits = as_array(cl, &p)?;
                if lits.len() != 3 {
                    return Err(err(&p, "a clause has exactly three literals"));
                }
                let mut out = [0i64; 3];
                for (m, l) in lits.iter().enumerate() {
                    out[m] = as_i64(l, &format!("{p}[{m}]"))?;
                }
                clauses.push(out);
            }
            build_3sat(&clauses)
        }
        Construction::SubsetSum => {
            let s = as_array(field(v, "S", "$")?, "S")?
                .iter()
                .enumerate()
                .map(|(k, x)| as_u64(x, &format!("S[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            let t = as_u64(field(v, "T", "$")?, "T")?;
            build_subsetsum(&s, t)
        }
        Construction::AppD => build_appd(&automaton_of_instance(v)?),
        Construction::AppB => {
            let ab = alphabet_or(v, Alphabet::binary())?;
            let a = automaton_of_instance(v)?;
            let mut preds = Vec::new();
            if flag(v, "toy") {
                preds.push(toy_predicate(&ab)?);
            }
            if let Some(ps) = v.get("predicates") {
                for (k, p) in as_array(ps, "predicates")?.iter().enumerate() {
                    let pp = format!("predicates[{k}]");
                    preds.push(ExternalPredicate {
                        gamma: pattern_from_json(field(p, "gamma", &pp)?, Some(&ab), &format!("{pp}.gamma"))?,
                        delta: pattern_from_json(field(p, "delta", &pp)?, Some(&ab), &format!("{pp}.delta"))?,
                    });
                }
            }
            build_appb(&a, &preds, &ab)
        }
        Construction::AppC => {
            let ab = alphabet_or(v, Alphabet::binary())?;
            if flag(v, "toy") {
                let (inner, a1, a2, i) = toy_inner(&ab)?;
                return build_appc_skeleton(&inner, &a1, &a2, i, &ab);
            }
            let mut inner = Vec::new();
            for (k, p) in as_array(field(v, "inner", "$")?, "inner")?.iter().enumerate() {
                let pp = format!("inner[{k}]");
                inner.push(InnerPredicate {
                    gamma: pattern_from_json(field(p, "gamma", &pp)?, Some(&ab), &format!("{pp}.gamma"))?,
                    delta: pattern_from_json(field(p, "delta", &pp)?, Some(&ab), &format!("{pp}.delta"))?,
                });
            }
            let a1 = pattern_from_json(field(v, "alpha1", "$")?, Some(&ab), "alpha1")?;
            let a2 = pattern_from_json(field(v, "alpha2", "$")?, Some(&ab), "alpha2")?;
            let i = as_u64(field(v, "i_len", "$")?, "i_len")? as usize;
            build_appc_skeleton(&inner, &a1, &a2, i, &ab)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Value {
        parse(
            r#"{"alphabet":["a","b"],"symbols":[{"v":"x1"},{"t":"a"},{"v":"x2"},{"t":"b"},{"v":"x2"},{"v":"x1"}],
                "mode":"E",
                "length":{"op":"and","args":[{"ineq":{"terms":[[1,"x1"]],"rel":">=","const":2}}]},
                "regular":{"x1":"b*","x2":{"words":["ab","a"]}}}"#,
        )
        .unwrap()
    }

    #[test]
    fn constrained_pattern_round_trips() {
        let cp = constrained_from_json(&example(), "$").unwrap();
        let v = constrained_to_json(&cp);
        let again = constrained_from_json(&v, "$").unwrap();
        assert_eq!(to_string(&v), to_string(&constrained_to_json(&again)));
        assert!(to_string(&v).starts_with(r#"{"alphabet":["a","b"],"length":"#));
    }

    #[test]
    fn foreign_constraint_variable_is_rejected() {
        let mut v = example();
        v["regular"]["x3"] = json!("a");
        let e = constrained_from_json(&v, "$").unwrap_err();
        assert!(e.to_string().contains("must occur in α"), "{e}");
    }

    #[test]
    fn empty_pattern_is_rejected() {
        let v = json!({"alphabet":["a"],"symbols":[]});
        assert_eq!(pattern_from_json(&v, None, "$").unwrap_err(), Error::EmptyPattern);
    }

    #[test]
    fn field_paths_in_diagnostics() {
        let v = json!({"alphabet":["a"],"symbols":[{"v":"x"},{"q":1}]});
        let e = pattern_from_json(&v, None, "$").unwrap_err().to_string();
        assert!(e.contains("$.symbols[1]"), "{e}");
        let e = parse("{\n\"a\": }").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn zero_test_violation_is_named() {
        let v = json!({"states":1,"finals":[],"delta":[{"from":0,"c1":0,"c2":1,"to":[[0,-1,0]]}]});
        let e = automaton_from_json(&v, "$").unwrap_err();
        assert_eq!(e, Error::ZeroTestViolation { state: 0, counter: 1 });
    }

    #[test]
    fn automaton_round_trips() {
        let text = r#"{"delta":[{"c1":0,"c2":0,"from":0,"to":[[1,1,0]]}],"finals":[1],"states":2}"#;
        let a = automaton_from_json(&parse(text).unwrap(), "$").unwrap();
        assert_eq!(to_string(&automaton_to_json(&a)), text);
    }

    #[test]
    fn formula_text_and_tree_agree() {
        let t = formula_from_json(&json!("2*x1 + x2 <= 5"), "$").unwrap();
        let tree = formula_from_json(
            &json!({"op":"and","args":[{"ineq":{"terms":[[2,"x1"],[1,"x2"]],"rel":"<=","const":5}}]}),
            "$",
        )
        .unwrap();
        assert_eq!(t.to_string(), tree.to_string());
        assert_eq!(
            to_string(&formula_to_json(&t)),
            r#"{"ineq":{"const":5,"rel":"<=","terms":[[2,"x1"],[1,"x2"]]}}"#
        );
    }

    #[test]
    fn regular_sources_round_trip() {
        let v = json!({"complement":{"union":["0#",{"words":["0"]}]}});
        let s = regular_from_json(&v, "$").unwrap();
        assert_eq!(regular_to_json(&s), v);
        assert_eq!(regular_from_json(&json!(["0", "#"]), "$").unwrap(), RegularSource::words(["0", "#"]));
    }

    #[test]
    fn instances_build() {
        let p = build_from_instance(Construction::ThreeSat, &json!({"clauses":[[1,2,3],[-1,-2,-3]]})).unwrap();
        assert_eq!(p.construction, Construction::ThreeSat);
        let p = build_from_instance(Construction::SubsetSum, &json!({"S":[1,2],"T":3})).unwrap();
        assert_eq!(p.left.pattern().len(), 2);
        let a = json!({"states":1,"finals":[],"delta":[]});
        let d = build_from_instance(Construction::AppD, &a).unwrap();
        assert_eq!(d.predicates.len(), 31);
        let b = build_from_instance(Construction::AppB, &json!({"automaton": a, "toy": true})).unwrap();
        assert_eq!(b.predicates[0].family, "external");
        let c = build_from_instance(Construction::AppC, &json!({"toy": true})).unwrap();
        assert_eq!(c.predicates.len(), 2);
        assert!(build_from_instance(Construction::ThreeSat, &json!({"clauses":[[1,2]]})).is_err());
    }
}
