//! Runs every acceptance criterion at its stated size and time limit and
//! prints one line per criterion. Exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use patlab::json as pj;
use patlab::suites::{self, Report, Suite, SuiteParams};

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn suite(name: &'static str, s: Suite, params: &SuiteParams, limit: Option<Duration>) -> Outcome {
    let t = Instant::now();
    let report = suites::run(s, params);
    let elapsed = t.elapsed();
    match report {
        Ok(r) => {
            let in_time = limit.is_none_or(|l| elapsed < l);
            Outcome { name, passed: r.passed() && in_time, detail: summary(&r, elapsed, limit) }
        }
        Err(e) => Outcome { name, passed: false, detail: format!("error: {e}") },
    }
}

fn summary(r: &Report, elapsed: Duration, limit: Option<Duration>) -> String {
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let mut s = format!("{} checks, {:.2}s", r.checks.len(), elapsed.as_secs_f64());
    if let Some(l) = limit {
        s.push_str(&format!(" (limit {}s)", l.as_secs()));
    }
    if !failed.is_empty() {
        s.push_str(&format!("; failed: {}", failed.join(", ")));
    }
    s
}

fn reduce_twice() -> Outcome {
    let name = "reduce --construction appD is byte-identical across runs";
    let dir = std::env::temp_dir().join(format!("patlc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let mut detail = Vec::new();
    let mut passed = true;
    for (label, a) in suites::default_automata() {
        let path = dir.join(format!("{label}.json"));
        std::fs::write(&path, pj::to_string(&pj::automaton_to_json(&a))).expect("write automaton");
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_patlc"))
                .args(["reduce", "--construction", "appD", "--in", path.to_str().unwrap()])
                .output()
                .expect("run patlc")
        };
        let (first, second) = (run(), run());
        let same = first.status.success() && !first.stdout.is_empty() && first.stdout == second.stdout;
        passed &= same;
        detail.push(format!("{label}: {} bytes{}", first.stdout.len(), if same { "" } else { " DIFFER" }));
    }
    let _ = std::fs::remove_dir_all(&dir);
    Outcome { name, passed, detail: detail.join(", ") }
}

fn main() -> ExitCode {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let base = SuiteParams { threads, ..SuiteParams::default() };
    let secs = Duration::from_secs;
    let outcomes = vec![
        suite("example verdicts for x1 a x2 a x1", Suite::Example1, &base, Some(secs(1))),
        suite(
            "matcher agrees with substitution enumeration (200 patterns, words up to 7)",
            Suite::MatcherOracle,
            &SuiteParams { patterns: 200, max_word: 7, ..base.clone() },
            Some(secs(300)),
        ),
        suite(
            "erasing and terminal-free conversions keep the language (bound 8, 20 patterns each)",
            Suite::Conversions,
            &SuiteParams { conversions: 20, ..base.clone() },
            None,
        ),
        suite("erasing pair: block selection, containment, collision test", Suite::AppB, &base, None),
        suite(
            "nonerasing pair: containment, valid encodings, mutations, witness",
            Suite::AppD,
            &SuiteParams { samples: 100, mutations: 250, max_steps: 4, max_counter: 2, ..base.clone() },
            Some(secs(600)),
        ),
        suite(
            "3SAT pair equivalence at 14 matches satisfiability",
            Suite::AppE,
            &SuiteParams { max_vars: 3, ..base.clone() },
            None,
        ),
        suite("subset sum pair equivalence matches subset existence", Suite::SubsetSum, &base, Some(secs(60))),
        suite("good-structure and bad-start automata match regex oracles up to 10", Suite::Regular, &base, None),
        reduce_twice(),
    ];
    let mut all = true;
    for (i, o) in outcomes.iter().enumerate() {
        all &= o.passed;
        println!("{} [{}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.name, o.detail);
    }
    println!("{}", if all { "all criteria passed" } else { "some criteria failed" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
