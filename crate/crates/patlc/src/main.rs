//! `patlc`: command-line frontend for the patlab engine.
//!
//! Exit codes: 0 success or the relation holds, 1 counterexample or failed
//! check, 2 usage or input error.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use patlab::automata::{bounded_accepting_computations, valc_bounded, EncodingParams};
use patlab::json as pj;
use patlab::langops::{bounded_equivalence_with, bounded_inclusion_with, enumerate_language_with, LangOptions};
use patlab::matcher::Matcher;
use patlab::pattern::{to_erasing_equivalent, to_terminal_free, Alphabet, ConstrainedPattern};
use patlab::reductions::Construction;
use patlab::suites::{self, Suite, SuiteParams};
use patlab::Error;

#[derive(Parser)]
#[command(name = "patlc", version, about = "Constrained pattern languages: matching, enumeration, comparison and reductions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed of the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
    /// Print words over the unary alphabet as `0^k`.
    #[arg(long, global = true)]
    compact: bool,
    /// Print every result as JSON, including negative answers.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide membership of a word and print a certificate.
    Match {
        /// Constrained pattern file; `file.json#left` selects a field.
        #[arg(long)]
        pattern: String,
        /// The word; `c^k` groups are expanded.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// List the language up to a length bound in shortlex order.
    Enumerate {
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        max_len: usize,
        /// Only list words matching this regex.
        #[arg(long)]
        shape: Option<String>,
    },
    /// Bounded inclusion or equivalence of two languages.
    Compare {
        #[arg(long, value_enum)]
        mode: CompareMode,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        shape: Option<String>,
    },
    /// Build a pattern pair from an instance file.
    Reduce {
        #[arg(long)]
        construction: String,
        #[arg(long = "in")]
        input: String,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<String>,
    },
    /// Bounded accepting computations of a two-counter automaton.
    Automaton(AutomatonArgs),
    /// Rewrite a constrained pattern.
    Convert {
        #[arg(long)]
        pattern: String,
        #[arg(long, value_enum)]
        to: Conversion,
    },
    /// Run a verification suite and print its report.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareMode {
    Equiv,
    Incl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conversion {
    /// Erasing pattern with `x >= 1` constraints.
    Erasing,
    /// Terminals replaced by constrained variables.
    TerminalFree,
}

#[derive(Args)]
#[command(group(ArgGroup::new("output").required(true).args(["run", "valc"])))]
struct AutomatonArgs {
    #[arg(long)]
    automaton: String,
    /// Print the accepting computations.
    #[arg(long)]
    run: bool,
    /// Print their encodings.
    #[arg(long)]
    valc: bool,
    /// Configurations per computation.
    #[arg(long)]
    max_steps: usize,
    #[arg(long)]
    max_counter: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// example1, matcher-oracle, conversions, regular, appB, appD, appE or subsetsum.
    #[arg(long)]
    suite: String,
    /// Boolean variables of the exhaustive 3SAT sweep.
    #[arg(long)]
    max_vars: Option<usize>,
    /// Word bound of the matcher oracle.
    #[arg(long)]
    max_word: Option<usize>,
    /// Automaton for the App D suite, replacing the built-in ones.
    #[arg(long)]
    automaton: Option<String>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    max_counter: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    patterns: Option<usize>,
    #[arg(long)]
    mutations: Option<usize>,
}

struct Out {
    compact: bool,
    json: bool,
}

impl Out {
    fn word(&self, w: &str, ab: &Alphabet) -> Value {
        if self.compact && ab.len() == 1 && !w.is_empty() {
            json!(format!("{}^{}", ab.letters()[0], w.chars().count()))
        } else {
            json!(w)
        }
    }
}

fn read_json(source: &str) -> Result<Value, Error> {
    let (path, key) = if Path::new(source).exists() {
        (source, None)
    } else {
        match source.rsplit_once('#') {
            Some((p, k)) => (p, Some(k)),
            None => (source, None),
        }
    };
    let text = fs::read_to_string(path).map_err(|e| Error::Instance(format!("{path}: {e}")))?;
    let v = pj::parse(&text).map_err(|e| Error::Json(format!("{path}: {e}")))?;
    match key {
        Some(k) => v.get(k).cloned().ok_or_else(|| Error::Json(format!("{path}: no field `{k}`"))),
        None => Ok(v),
    }
}

fn load_pattern(source: &str) -> Result<ConstrainedPattern, Error> {
    pj::constrained_from_json(&read_json(source)?, source)
}

/// Expands `c^k` groups: `0^3#` is `000#`.
fn expand_word(w: &str) -> Result<String, Error> {
    let cs: Vec<char> = w.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < cs.len() {
        if i + 1 < cs.len() && cs[i + 1] == '^' {
            let digits: String = cs[i + 2..].iter().take_while(|c| c.is_ascii_digit()).collect();
            let k: usize = digits.parse().map_err(|_| Error::Instance(format!("bad repetition in `{w}`")))?;
            out.extend(std::iter::repeat_n(cs[i], k));
            i += 2 + digits.len();
        } else {
            out.push(cs[i]);
            i += 1;
        }
    }
    Ok(out)
}

fn print(v: &Value) {
    println!("{}", pj::to_string(v));
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let out = Out { compact: cli.compact, json: cli.json };
    let threads = cli.threads as usize;
    match cli.command {
        Command::Match { pattern, word } => {
            let cp = load_pattern(&pattern)?;
            let w = expand_word(&word)?;
            match Matcher::with_threads(threads).try_membership(&w, &cp)? {
                Some(c) => {
                    let mut v = pj::certificate_to_json(&c);
                    if out.compact {
                        for (_, img) in v["substitution"].as_object_mut().expect("object").iter_mut() {
                            *img = out.word(img.as_str().unwrap_or_default(), cp.alphabet());
                        }
                    }
                    print(&v);
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    if out.json {
                        print(&json!({ "match": false }));
                    } else {
                        println!("NO");
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Enumerate { pattern, max_len, shape } => {
            let cp = load_pattern(&pattern)?;
            let opts = options(shape.as_deref(), cp.alphabet(), threads)?;
            let words = enumerate_language_with(&cp, max_len, &opts);
            print(&Value::Array(words.iter().map(|w| out.word(w, cp.alphabet())).collect()));
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { mode, a, b, max_len, shape } => {
            let (a, b) = (load_pattern(&a)?, load_pattern(&b)?);
            let opts = options(shape.as_deref(), a.alphabet(), threads)?;
            let v = match mode {
                CompareMode::Equiv => bounded_equivalence_with(&a, &b, max_len, &opts)?,
                CompareMode::Incl => bounded_inclusion_with(&a, &b, max_len, &opts)?,
            };
            let mut j = pj::verdict_to_json(&v);
            if let Some(w) = j.get("word").and_then(Value::as_str).map(str::to_owned) {
                j["word"] = out.word(&w, a.alphabet());
            }
            print(&j);
            Ok(if v.holds() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Reduce { construction, input, out: dest } => {
            let c = Construction::parse(&construction)?;
            let pair = pj::build_from_instance(c, &read_json(&input)?)?;
            let text = format!("{}\n", pj::to_string(&pj::pair_to_json(&pair)));
            match dest {
                Some(path) => fs::write(&path, text).map_err(|e| Error::Instance(format!("{path}: {e}")))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Automaton(args) => {
            let a = pj::automaton_from_json(&read_json(&args.automaton)?, &args.automaton)?;
            let v = if args.run {
                let comps = bounded_accepting_computations(&a, args.max_steps, args.max_counter);
                json!(comps
                    .iter()
                    .map(|c| c.iter().map(pj::configuration_to_json).collect::<Vec<_>>())
                    .collect::<Vec<_>>())
            } else {
                json!(valc_bounded(&a, EncodingParams::default(), args.max_steps, args.max_counter))
            };
            print(&v);
            Ok(ExitCode::SUCCESS)
        }
        Command::Convert { pattern, to } => {
            let cp = load_pattern(&pattern)?;
            let converted = match to {
                Conversion::Erasing => to_erasing_equivalent(&cp),
                Conversion::TerminalFree => to_terminal_free(&cp),
            };
            print(&pj::constrained_to_json(&converted));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let suite = Suite::parse(&args.suite)?;
            let mut p = SuiteParams { seed: cli.seed, threads, ..SuiteParams::default() };
            if let Some(path) = &args.automaton {
                let a = pj::automaton_from_json(&read_json(path)?, path)?;
                p.automata = vec![(path.clone(), a)];
            }
            p.max_vars = args.max_vars.unwrap_or(p.max_vars);
            p.max_word = args.max_word.unwrap_or(p.max_word);
            p.max_steps = args.max_steps.unwrap_or(p.max_steps);
            p.max_counter = args.max_counter.unwrap_or(p.max_counter);
            p.samples = args.samples.unwrap_or(p.samples);
            p.patterns = args.patterns.unwrap_or(p.patterns);
            p.mutations = args.mutations.unwrap_or(p.mutations);
            let report = suites::run(suite, &p)?;
            print(&report.to_json());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn options(shape: Option<&str>, ab: &Alphabet, threads: usize) -> Result<LangOptions, Error> {
    let opts = LangOptions { matcher: Matcher::with_threads(threads), ..LangOptions::default() };
    match shape {
        Some(r) => opts.with_shape(r, ab),
        None => Ok(opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
