use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparsefo::augment::{expansion_profile, DEFAULT_SYMBOL_CAP};
use sparsefo::compiler::{Limits, DEFAULT_DISJUNCT_CAP, DEFAULT_MAX_LEVEL};
use sparsefo::cost;
use sparsefo::engine::Engine;
use sparsefo::model::RelationalStructure;
use sparsefo::oracle::{naive_check, naive_count, naive_positions, naive_test, DEFAULT_BUDGET};
use sparsefo::Error;

#[derive(Parser, Debug)]
#[command(name = "sparsefo", version, about = "First-order queries over sparse structures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print whether the query has at least one answer.
    Check(QueryArgs),
    /// Print every answer in lexicographic order, one per line.
    Enumerate {
        #[command(flatten)]
        q: QueryArgs,
        /// Stop after this many answers.
        #[arg(long)]
        limit: Option<usize>,
        /// Append the steps spent on each answer; totals go to standard error.
        #[arg(long)]
        steps: bool,
    },
    /// Print the number of answers.
    Count(QueryArgs),
    /// Print whether a tuple of node ids is an answer.
    Test {
        #[command(flatten)]
        q: QueryArgs,
        /// Node ids separated by commas or spaces.
        tuple: String,
    },
    /// Augmentation statistics of the input.
    Augment {
        input: PathBuf,
        /// Print the per-level profile as CSV.
        #[arg(long)]
        stats: bool,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Compile a query and report its elimination stages.
    Compile {
        #[command(flatten)]
        q: QueryArgs,
        /// Print the stage report and the compiled formula.
        #[arg(long)]
        dump: bool,
    },
}

#[derive(Args, Debug)]
struct QueryArgs {
    /// Structure file.
    input: PathBuf,
    /// Query text, or the path of a file holding it.
    query: String,
    /// Compare with the brute-force evaluator; exit nonzero on disagreement.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_LEVEL)]
    max_level: usize,
    #[arg(long, default_value_t = DEFAULT_SYMBOL_CAP)]
    symbol_cap: usize,
    #[arg(long, default_value_t = DEFAULT_DISJUNCT_CAP)]
    disjunct_cap: usize,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            symbol_cap: self.symbol_cap,
            disjunct_cap: self.disjunct_cap,
            max_level: self.max_level,
        }
    }
}

enum Failure {
    Engine(Error),
    Io(String),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

fn load(path: &Path) -> Result<RelationalStructure, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(RelationalStructure::parse(&text)?)
}

fn query_text(q: &str) -> Result<String, Failure> {
    let p = Path::new(q);
    if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{q}: {e}")))
    } else {
        Ok(q.to_string())
    }
}

fn parse_tuple(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Failure::Engine(Error::Parse { line: 1, msg: format!("bad node id {t:?}") }))
        })
        .collect()
}

fn line(out: &mut impl Write, s: impl std::fmt::Display) {
    let _ = writeln!(out, "{s}");
}

fn mismatch(what: &str, engine: impl std::fmt::Debug, oracle: impl std::fmt::Debug) -> Failure {
    Failure::Mismatch(format!("{what}: engine {engine:?}, oracle {oracle:?}"))
}

fn run(cli: Cli, out: &mut impl Write, err: &mut impl Write) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Check(a) => {
            let s = load(&a.input)?;
            let mut e = Engine::new(&s, a.limits.limits())?;
            let q = e.parse(&query_text(&a.query)?)?;
            let got = e.check(&q)?;
            line(out, got);
            if a.oracle {
                let want = naive_check(&q, &s, DEFAULT_BUDGET)?;
                if got != want {
                    return Err(mismatch("check", got, want));
                }
                return Ok(0);
            }
            Ok(if got { 0 } else { 1 })
        }
        Cmd::Enumerate { q: a, limit, steps } => {
            let s = load(&a.input)?;
            cost::reset();
            let mut e = Engine::new(&s, a.limits.limits())?;
            let q = e.parse(&query_text(&a.query)?)?;
            let p = e.prepare(&q)?;
            let en = e.enumerator(&p)?;
            let pre = cost::steps();
            let mut c = en.cursor();
            let mut got = Vec::new();
            let mut delay = 0;
            while limit.map_or(true, |l| got.len() < l) {
                let (t, d) = cost::measure(|| c.try_next());
                delay = delay.max(d);
                let Some(t) = t? else { break };
                let ids: Vec<String> = e.ids(&t).iter().map(u64::to_string).collect();
                if steps {
                    line(out, format!("{}\tsteps={d}", ids.join(" ")));
                } else {
                    line(out, ids.join(" "));
                }
                got.push(t);
            }
            if steps {
                line(err, format!("preprocessing_steps {pre}"));
                line(err, format!("max_delay_steps {delay}"));
            }
            if a.oracle {
                let mut want = naive_positions(&q, &s, DEFAULT_BUDGET)?;
                if let Some(l) = limit {
                    want.truncate(l);
                }
                if got != want {
                    return Err(mismatch("enumerate", got.len(), want.len()));
                }
            }
            Ok(0)
        }
        Cmd::Count(a) => {
            let s = load(&a.input)?;
            let mut e = Engine::new(&s, a.limits.limits())?;
            let q = e.parse(&query_text(&a.query)?)?;
            let got = e.count(&q)?;
            line(out, &got);
            if a.oracle {
                let want = naive_count(&q, &s, DEFAULT_BUDGET)?;
                if got != want.into() {
                    return Err(mismatch("count", got, want));
                }
            }
            Ok(0)
        }
        Cmd::Test { q: a, tuple } => {
            let s = load(&a.input)?;
            let mut e = Engine::new(&s, a.limits.limits())?;
            let q = e.parse(&query_text(&a.query)?)?;
            let ids = parse_tuple(&tuple)?;
            let p = e.prepare(&q)?;
            let got = e.test(&p, &ids)?;
            line(out, got);
            if a.oracle {
                let pos = e.positions(&ids)?;
                let want = naive_test(&q, &s, &pos)?;
                if got != want {
                    return Err(mismatch("test", got, want));
                }
            }
            Ok(0)
        }
        Cmd::Augment { input, stats, limits } => {
            let s = load(&input)?;
            let e = Engine::new(&s, limits.limits())?;
            let prof = expansion_profile(e.graph(), limits.max_level, limits.symbol_cap)?;
            if stats {
                let _ = write!(out, "{}", prof.to_csv());
            } else {
                let last = prof.max_indegree.len() - 1;
                line(out, format!("levels {} max_indegree {}", last, prof.max_indegree[last]));
            }
            Ok(0)
        }
        Cmd::Compile { q: a, dump } => {
            let s = load(&a.input)?;
            let mut e = Engine::new(&s, a.limits.limits())?;
            let q = e.parse(&query_text(&a.query)?)?;
            let p = e.prepare(&q)?;
            if dump {
                let _ = write!(out, "{}", p.compiled.dump(e.workspace()));
            } else {
                line(out, format!("stages {}", p.compiled.stages.len()));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    match run(cli, &mut out, &mut err) {
        Ok(c) => ExitCode::from(c),
        Err(f) => {
            let (code, msg, exit) = match f {
                Failure::Engine(e) => {
                    let exit = match e.code() {
                        "resource" | "internal" => 3,
                        _ => 2,
                    };
                    (e.code(), e.to_string(), exit)
                }
                Failure::Io(m) => ("io", m, 2),
                Failure::Mismatch(m) => ("mismatch", m, 1),
            };
            let _ = out.flush();
            line(&mut err, format!("error: {code}: {msg}"));
            ExitCode::from(exit)
        }
    }
}
