//! `inqkh`: command-line front end.
//!
//! Results are JSON lines on stdout (`--pretty` for indented text).
//! Exit codes: 0 success or a true verdict, 1 a false verdict, 2 usage or
//! input errors, 3 resource limits, 4 internal consistency failures.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use inqkh::decide::{self, EntailmentMode, Verdict};
use inqkh::fuzz::{fuzz_equivalence, FuzzConfig};
use inqkh::proof::{check_proof, parse_proof};
use inqkh::resolution::{
    resolution_space, resolution_space_size, resolutions_at, uniform_resolutions, DEFAULT_CAP,
};
use inqkh::semantics::{self, EvalOptions, Evaluator, Route};
use inqkh::transform::{
    eliminate_box_traced, eliminate_kh_traced, rl, rl_translation, s5_normal_form_with_limit,
    DEFAULT_CLAUSE_LIMIT,
};
use inqkh::{full_model, parse_formula, Error, Formula, Model, ModelDocument, State};

#[derive(Parser)]
#[command(name = "inqkh", version, about = "Inquisitive logic and knowing-how: evaluate, reduce, decide, check proofs")]
struct Cli {
    /// Indented, human-readable output instead of JSON lines.
    #[arg(long, global = true)]
    pretty: bool,
    /// Cap on resolution-space sizes.
    #[arg(long, global = true, env = "INQKH_CAP", default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Cap on normal-form clauses.
    #[arg(long, global = true, env = "INQKH_CLAUSE_LIMIT", default_value_t = DEFAULT_CLAUSE_LIMIT)]
    clause_limit: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and re-render a formula.
    Parse { formula: String },
    /// Truth of a formula at the worlds of a model.
    Eval {
        formula: String,
        #[arg(long)]
        model: PathBuf,
        /// Only this world.
        #[arg(long)]
        world: Option<String>,
        /// Evaluate in the submodel induced by these worlds.
        #[arg(long, value_delimiter = ',')]
        state: Option<Vec<String>>,
        #[arg(long, default_value = "auto", value_parser = parse_route)]
        route: Route,
    },
    /// Support of a PL formula at a state (the whole model by default).
    Support {
        formula: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',')]
        state: Option<Vec<String>>,
    },
    /// The resolution space, or the resolutions at a world or state.
    Resolutions {
        formula: String,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        world: Option<String>,
        #[arg(long, value_delimiter = ',')]
        state: Option<Vec<String>>,
    },
    /// Maximal supporting states.
    Alternatives {
        formula: String,
        /// Defaults to the full model over the formula's atoms.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Informative / inquisitive / question / statement.
    Classify {
        formula: String,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Remove Kh (del), then [] (el), or compute the S5 normal form (nf).
    Reduce {
        formula: String,
        #[arg(long, value_enum, default_value = "el")]
        target: Target,
    },
    /// RL resolutions of a PL formula and its S5 translation.
    TranslateRl { formula: String },
    /// Decide validity or membership.
    Decide {
        formula: String,
        #[arg(long, value_enum)]
        class: Class,
    },
    /// Entailment from premises listed one per line in FILE.
    Entails {
        formula: String,
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long, value_enum, default_value = "support")]
        mode: Mode,
    },
    /// Check a derivation script.
    CheckProof { file: PathBuf },
    /// Seeded cross-check of the Kh routes and the rewrite pipeline.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_worlds: usize,
        #[arg(long, default_value_t = 3)]
        max_atoms: usize,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        #[arg(long, default_value_t = 2)]
        max_imp_nesting: usize,
        /// Routes compared against support.
        #[arg(long = "route", value_delimiter = ',', value_parser = parse_route,
              default_value = "resolution,rl,reduced")]
        routes: Vec<Route>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Del,
    El,
    Nf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    Taut,
    S5,
    Inqb,
    Delkh,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Support,
    Knowhow,
}

fn parse_route(s: &str) -> Result<Route, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Records to print and, for verdict-style commands, the verdict.
struct Output {
    records: Vec<Value>,
    verdict: Option<bool>,
}

impl Output {
    fn one(record: Value) -> Output {
        Output {
            records: vec![record],
            verdict: None,
        }
    }

    fn verdict(record: Value, v: bool) -> Output {
        Output {
            records: vec![record],
            verdict: Some(v),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.pretty;
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            for r in &out.records {
                let line = if pretty {
                    serde_json::to_string_pretty(r).expect("serializable")
                } else {
                    r.to_string()
                };
                // A closed pipe (e.g. `| head`) is not an error worth reporting.
                if writeln!(stdout, "{line}").is_err() {
                    break;
                }
            }
            ExitCode::from(if out.verdict == Some(false) { 1 } else { 0 })
        }
        Err(e) => {
            let code = match &e {
                Error::Resource(_) => 3,
                Error::Internal(_) => 4,
                _ => 2,
            };
            eprintln!("{}", json!({ "error": e.to_string() }));
            ExitCode::from(code)
        }
    }
}

fn formula(text: &str) -> Result<Formula, Error> {
    parse_formula(text)
}

fn load_model(path: &Path) -> Result<Model, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    let doc: ModelDocument = serde_json::from_str(&text)
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    Model::from_document(&doc)
}

fn model_or_full(path: Option<&Path>, phi: &Formula) -> Result<Model, Error> {
    match path {
        Some(p) => load_model(p),
        None => full_model(&phi.atoms()),
    }
}

fn state_of(m: &Model, ids: Option<&[String]>) -> Result<State, Error> {
    match ids {
        None => Ok(m.full_state()),
        Some(ids) => {
            let s = m.state_from_ids(ids)?;
            if s.is_empty() {
                return Err(Error::EmptyState);
            }
            Ok(s)
        }
    }
}

fn fragment(phi: &Formula) -> &'static str {
    if phi.is_pl() {
        "pl"
    } else if !phi.has_knowhow() && !phi.has_update() {
        "el"
    } else {
        "delkh"
    }
}

fn verdict_record(v: &Verdict, elapsed: Instant) -> Value {
    let mut r = serde_json::to_value(v).expect("serializable");
    r["elapsed_ms"] = json!(elapsed.elapsed().as_secs_f64() * 1e3);
    r
}

fn run(cli: Cli) -> Result<Output, Error> {
    let cap = cli.cap;
    let limits = decide::Limits {
        cap,
        clause_limit: cli.clause_limit,
        ..decide::Limits::default()
    };
    let started = Instant::now();
    Ok(match cli.cmd {
        Cmd::Parse { formula: text } => {
            let phi = formula(&text)?;
            Output::one(json!({
                "formula": phi.to_string(),
                "fragment": fragment(&phi),
                "atoms": phi.atoms(),
                "modal_depth": phi.modal_depth(),
                "size": phi.size(),
            }))
        }
        Cmd::Eval {
            formula: text,
            model,
            world,
            state,
            route,
        } => {
            let phi = formula(&text)?;
            let m = load_model(&model)?;
            let s = state_of(&m, state.as_deref())?;
            let worlds: Vec<usize> = match &world {
                Some(w) => {
                    let i = m.index_of(w)?;
                    if !s.contains(i) {
                        return Err(Error::Invalid(format!("world `{w}` is outside the state")));
                    }
                    vec![i]
                }
                None => s.indices().collect(),
            };
            let mut ev = Evaluator::new(&m, EvalOptions { route, cap });
            let mut records = Vec::new();
            let mut all = true;
            for i in worlds {
                let v = ev.eval_in(&phi, s, i)?;
                all &= v;
                records.push(json!({ "world": m.world_id(i), "value": v }));
            }
            records.push(json!({
                "formula": phi.to_string(),
                "state": m.state_ids(s),
                "all": all,
                "stats": ev.stats(),
                "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
            }));
            Output {
                records,
                verdict: Some(all),
            }
        }
        Cmd::Support {
            formula: text,
            model,
            state,
        } => {
            let phi = formula(&text)?;
            let m = load_model(&model)?;
            let s = state.as_deref().map_or(Ok(m.full_state()), |ids| m.state_from_ids(ids))?;
            let (v, stats) = semantics::supports_with_stats(&m, s, &phi)?;
            Output::verdict(
                json!({
                    "formula": phi.to_string(),
                    "state": m.state_ids(s),
                    "supports": v,
                    "stats": stats,
                }),
                v,
            )
        }
        Cmd::Resolutions {
            formula: text,
            model,
            world,
            state,
        } => {
            let phi = formula(&text)?;
            let show = |rs: Vec<inqkh::resolution::Resolution>| -> Vec<String> {
                rs.iter().map(ToString::to_string).collect()
            };
            match (model, world, state) {
                (None, None, None) => {
                    let size = resolution_space_size(&phi)?;
                    let mut r = json!({ "formula": phi.to_string(), "size": size.to_string() });
                    match resolution_space(&phi, cap) {
                        Ok(space) => r["elements"] = json!(show(space.elements)),
                        Err(e) if e.is_resource() => r["elements"] = Value::Null,
                        Err(e) => return Err(e),
                    }
                    Output::one(r)
                }
                (Some(path), Some(w), None) => {
                    let m = load_model(&path)?;
                    let rs = resolutions_at(&m, &w, &phi, cap)?;
                    Output::one(json!({ "formula": phi.to_string(), "world": w, "resolutions": show(rs) }))
                }
                (Some(path), None, state) => {
                    let m = load_model(&path)?;
                    let s = state_of(&m, state.as_deref())?;
                    let rs = uniform_resolutions(&m, s, &phi, cap)?;
                    let nonempty = !rs.is_empty();
                    Output::verdict(
                        json!({
                            "formula": phi.to_string(),
                            "state": m.state_ids(s),
                            "uniform": show(rs),
                        }),
                        nonempty,
                    )
                }
                _ => {
                    return Err(Error::Invalid(
                        "use --model with either --world or --state (or neither)".into(),
                    ))
                }
            }
        }
        Cmd::Alternatives {
            formula: text,
            model,
        } => {
            let phi = formula(&text)?;
            let m = model_or_full(model.as_deref(), &phi)?;
            let alts = semantics::alternatives(&m, &phi)?;
            Output::one(json!({
                "formula": phi.to_string(),
                "model": m.to_document(),
                "alternatives": alts.iter().map(|&s| m.state_ids(s)).collect::<Vec<_>>(),
            }))
        }
        Cmd::Classify {
            formula: text,
            model,
        } => {
            let phi = formula(&text)?;
            let m = model_or_full(model.as_deref(), &phi)?;
            let c = semantics::classify(&m, &phi)?;
            let mut r = serde_json::to_value(&c).expect("serializable");
            r["formula"] = json!(phi.to_string());
            r["alternatives"] = json!(c.alternatives.iter().map(|&s| m.state_ids(s)).collect::<Vec<_>>());
            r["uncovered_world"] = json!(c.uncovered_world.map(|i| m.world_id(i)));
            r["witness_submodel"] = json!(c.witness_submodel.map(|s| m.state_ids(s)));
            Output::one(r)
        }
        Cmd::Reduce {
            formula: text,
            target,
        } => {
            let phi = formula(&text)?;
            phi.check_well_formed()?;
            let (no_kh, mut trace) = eliminate_kh_traced(&phi);
            let mut r = json!({ "input": phi.to_string() });
            let out = match target {
                Target::Del => no_kh,
                Target::El | Target::Nf => {
                    let (el, more) = eliminate_box_traced(&no_kh, cli.clause_limit)?;
                    trace.extend(more);
                    if let Target::Nf = target {
                        let nf = s5_normal_form_with_limit(&el, cli.clause_limit)?;
                        r["clauses"] = serde_json::to_value(&nf.clauses).expect("serializable");
                        nf.to_formula()
                    } else {
                        el
                    }
                }
            };
            r["output"] = json!(out.to_string());
            r["trace"] = serde_json::to_value(&trace).expect("serializable");
            Output::one(r)
        }
        Cmd::TranslateRl { formula: text } => {
            let phi = formula(&text)?;
            let rs = rl(&phi, cap)?;
            Output::one(json!({
                "formula": phi.to_string(),
                "rl": rs.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "translation": rl_translation(&phi, cap)?.to_string(),
            }))
        }
        Cmd::Decide {
            formula: text,
            class,
        } => {
            let phi = formula(&text)?;
            let v = match class {
                Class::Taut => decide::taut_with(&phi, &limits)?,
                Class::S5 => decide::s5_valid_with(&phi, &limits)?,
                Class::Inqb => decide::inqb_member_with(&phi, &limits)?,
                Class::Delkh => decide::delkh_valid_with(&phi, &limits)?,
            };
            let mut r = verdict_record(&v, started);
            r["formula"] = json!(phi.to_string());
            Output::verdict(r, v.result)
        }
        Cmd::Entails {
            formula: text,
            gamma,
            mode,
        } => {
            let alpha = formula(&text)?;
            let text = std::fs::read_to_string(&gamma)
                .map_err(|e| Error::Invalid(format!("{}: {e}", gamma.display())))?;
            let premises = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(formula)
                .collect::<Result<Vec<_>, _>>()?;
            let mode = match mode {
                Mode::Support => EntailmentMode::Support,
                Mode::Knowhow => EntailmentMode::Knowhow,
            };
            let v = decide::entails_with(&premises, &alpha, mode, &limits)?;
            let mut r = verdict_record(&v, started);
            r["premises"] = json!(premises.iter().map(ToString::to_string).collect::<Vec<_>>());
            r["conclusion"] = json!(alpha.to_string());
            Output::verdict(r, v.result)
        }
        Cmd::CheckProof { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Error::Invalid(format!("{}: {e}", file.display())))?;
            let report = check_proof(&parse_proof(&text)?);
            let accepted = report.accepted;
            Output::verdict(serde_json::to_value(&report).expect("serializable"), accepted)
        }
        Cmd::Fuzz {
            trials,
            seed,
            max_worlds,
            max_atoms,
            max_depth,
            max_imp_nesting,
            routes,
        } => {
            let cfg = FuzzConfig {
                seed,
                trials,
                max_worlds,
                max_atoms,
                max_depth,
                max_imp_nesting,
                routes: routes.into_iter().fold(Vec::new(), |mut acc, r| {
                    if !acc.contains(&r) {
                        acc.push(r);
                    }
                    acc
                }),
                cap,
            };
            let report = fuzz_equivalence(&cfg)?;
            let clean = report.is_clean();
            Output::verdict(serde_json::to_value(&report).expect("serializable"), clean)
        }
    })
}
