use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use epsem::calculus::{axioms_of, check_derivation, check_proof, derivation_corpus, Calculus, Proof};
use epsem::formula::{Formula, FormulaTable};
use epsem::ge_model::{GEModel, LogicVariant, ModelFile, NoGru, SemValue};
use epsem::kripke::{KripkeFile, TopicKripkeModel};
use epsem::par::Execution;
use epsem::search::{check_validity, find_separation, search_first, Judge, Outcome, SearchBounds};
use epsem::soundness::generic_sweep;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "epsem", version, about = "Set-assignment semantics workbench")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads for enumeration.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula and print its canonical form.
    Parse {
        formula: String,
        #[arg(long, default_value = "PAI")]
        logic: String,
    },
    /// Evaluate formulas in a model file.
    Eval {
        #[arg(long)]
        model: String,
        formulas: Vec<String>,
        /// Check `premises |- goal` in the model instead of printing values.
        #[arg(long)]
        goal: Option<String>,
        #[arg(long = "premise")]
        premises: Vec<String>,
    },
    /// Decide `premises |- goal` up to the search bounds.
    Check(Query),
    /// Print the first countermodel (or separating model) as a model file.
    Countermodel {
        #[command(flatten)]
        query: Query,
        /// Look for a model where two formulas get different values instead.
        #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with_all = ["goal", "premises"])]
        separate: Option<Vec<String>>,
    },
    /// Check a proof file.
    Prove {
        #[arg(long)]
        calculus: String,
        #[arg(long)]
        file: String,
        #[arg(long = "premise")]
        premises: Vec<String>,
        #[arg(long)]
        goal: Option<String>,
    },
    /// Turn a Kripke model into the gE-model rooted at a world.
    Bridge {
        #[arg(long)]
        file: String,
        #[arg(long, default_value = "w0")]
        root: String,
        /// Also compare forcing at the root with the gE value of every formula to this depth.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Check every bundled derivation.
    Corpus,
    /// List the axiom schemata and rules of a calculus.
    Axioms {
        #[arg(long)]
        calculus: String,
    },
    /// Check a calculus' schemata against every algebra pair within bounds.
    Sweep {
        #[arg(long)]
        logic: String,
        #[command(flatten)]
        bounds: BoundArgs,
    },
}

#[derive(Args)]
struct Query {
    #[arg(long)]
    logic: String,
    #[arg(long)]
    goal: Option<String>,
    #[arg(long = "premise")]
    premises: Vec<String>,
    #[command(flatten)]
    bounds: BoundArgs,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, default_value_t = 3)]
    max_worlds: usize,
    #[arg(long, default_value_t = 4)]
    max_topics: usize,
    #[arg(long)]
    no_dedup: bool,
    /// `i/k`: search only the i-th of k interleaved slices.
    #[arg(long)]
    shard: Option<String>,
    #[arg(long)]
    sequential: bool,
}

/// Failure with exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Res = Result<(Value, String, u8), InputError>;

fn bounds(b: &BoundArgs) -> Result<SearchBounds, InputError> {
    let shard = match &b.shard {
        None => None,
        Some(s) => {
            let (i, k) = s
                .split_once('/')
                .ok_or_else(|| InputError(format!("--shard: expected i/k, got {s:?}")))?;
            Some((
                i.trim().parse().map_err(|_| InputError(format!("--shard: bad index {i:?}")))?,
                k.trim().parse().map_err(|_| InputError(format!("--shard: bad count {k:?}")))?,
            ))
        }
    };
    let out = SearchBounds {
        max_worlds: b.max_worlds,
        max_topics: b.max_topics,
        dedup_iso: !b.no_dedup,
        shard,
        execution: if b.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        ..SearchBounds::default()
    };
    out.validate().map_err(|e| InputError(format!("--max-worlds/--max-topics/--shard: {e}")))?;
    Ok(out)
}

fn variant(name: &str) -> Result<LogicVariant, InputError> {
    name.parse().map_err(|e| InputError(format!("--logic: {e}")))
}

fn formula(v: LogicVariant, src: &str, flag: &str) -> Result<Formula, InputError> {
    v.parse(src).map_err(|e| InputError(format!("{flag}: {e}")))
}

fn read(path: &str, flag: &str) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{flag}: {path}: {e}")))
}

fn bounds_json(b: &SearchBounds, v: LogicVariant) -> Value {
    json!({
        "max_worlds": b.max_worlds,
        "max_topics": b.topics_for(v),
        "dedup_iso": b.dedup_iso,
        "shard": b.shard.map(|(i, k)| format!("{i}/{k}")),
    })
}

fn sem_json(v: SemValue) -> Value {
    json!({"truth": v.truth, "content": v.content})
}

fn run_parse(src: &str, logic: &str) -> Res {
    let v = variant(logic)?;
    let f = formula(v, src, "formula")?;
    let vars: Vec<String> = f.variables().into_iter().collect();
    let text = f.to_string();
    Ok((
        json!({"formula": text, "depth": f.depth(), "size": f.size(), "variables": vars}),
        text,
        0,
    ))
}

fn run_eval(model: &str, formulas: &[String], goal: &Option<String>, premises: &[String]) -> Res {
    let file: ModelFile = serde_json::from_str(&read(model, "--model")?).map_err(|e| InputError(format!("--model: {e}")))?;
    let m = GEModel::from_file(&file).map_err(|e| InputError(format!("--model: {e}")))?;
    let v = m.variant();
    if let Some(g) = goal {
        let goal = formula(v, g, "--goal")?;
        let ps = premises
            .iter()
            .map(|p| formula(v, p, "--premise"))
            .collect::<Result<Vec<_>, _>>()?;
        let holds = m.consequence(&ps, &goal)?;
        let text = if holds { "holds" } else { "fails" };
        return Ok((
            json!({"logic": v.name(), "consequence": format!("{:?}", v.consequence()).to_lowercase(), "holds": holds}),
            format!("{v}: consequence {text} in this model"),
            if holds { 0 } else { 1 },
        ));
    }
    let mut rows = Vec::new();
    let mut text = Vec::new();
    for src in formulas {
        let f = formula(v, src, "formula")?;
        let sv = m.sem_value(&f)?;
        text.push(format!("{f}\ttruth={} content={}", sv.truth, sv.content));
        rows.push(json!({"formula": f.to_string(), "value": sem_json(sv)}));
    }
    Ok((json!({"logic": v.name(), "results": rows}), text.join("\n"), 0))
}

fn outcome(v: LogicVariant, b: &SearchBounds, out: Outcome, what: &str) -> (Value, String, u8) {
    match out {
        Outcome::Exhausted { models, explored } => (
            json!({
                "logic": v.name(),
                "result": "valid",
                "models": models.to_string(),
                "explored": explored,
                "bounds": bounds_json(b, v),
            }),
            format!("{v}: no {what} up to bounds ({models} models, {explored} evaluations)"),
            0,
        ),
        Outcome::Found(c) => {
            let file = c.to_file();
            let text = format!(
                "{v}: {what} at index {}\n{}",
                c.index,
                serde_json::to_string_pretty(&file).expect("serializable")
            );
            (
                json!({
                    "logic": v.name(),
                    "result": "countermodel",
                    "countermodel": file,
                    "bounds": bounds_json(b, v),
                }),
                text,
                1,
            )
        }
    }
}

fn run_check(q: &Query) -> Res {
    let v = variant(&q.logic)?;
    let b = bounds(&q.bounds)?;
    let goal = formula(v, q.goal.as_deref().ok_or_else(|| InputError("--goal is required".into()))?, "--goal")?;
    let ps = q
        .premises
        .iter()
        .map(|p| formula(v, p, "--premise"))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(outcome(v, &b, check_validity(v, &ps, &goal, &b)?, "countermodel"))
}

fn run_countermodel(q: &Query, separate: &Option<Vec<String>>) -> Res {
    let v = variant(&q.logic)?;
    let b = bounds(&q.bounds)?;
    let out = match separate {
        Some(pair) => {
            let (x, y) = (formula(v, &pair[0], "--separate")?, formula(v, &pair[1], "--separate")?);
            find_separation(v, &x, &y, &b)?
        }
        None => {
            let goal = formula(v, q.goal.as_deref().ok_or_else(|| InputError("--goal or --separate is required".into()))?, "--goal")?;
            let mut fs = q
                .premises
                .iter()
                .map(|p| formula(v, p, "--premise"))
                .collect::<Result<Vec<_>, _>>()?;
            fs.push(goal);
            search_first(v, &fs, Judge::Consequence(v.consequence()), &b)?
        }
    };
    Ok(match out {
        Outcome::Found(c) => {
            let file = serde_json::to_value(c.to_file()).expect("serializable");
            let text = serde_json::to_string_pretty(&file).expect("serializable");
            (file, text, 1)
        }
        other => {
            let (j, t, code) = outcome(v, &b, other, "countermodel");
            (j, t, code)
        }
    })
}

fn run_prove(calculus: &str, file: &str, premises: &[String], goal: &Option<String>) -> Res {
    let calc = Calculus::by_name(calculus).map_err(|e| InputError(format!("--calculus: {e}")))?;
    let proof = Proof::from_json_lines(&read(file, "--file")?, &calc).map_err(|e| InputError(format!("--file: {e}")))?;
    let ps = premises
        .iter()
        .map(|p| calc.parse(p).map_err(|e| InputError(format!("--premise: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    // Premises default to the formulas on premise lines, in citation order.
    let ps = if ps.is_empty() { premises_from(&proof) } else { ps };
    let res = match goal {
        Some(g) => {
            let g = calc.parse(g).map_err(|e| InputError(format!("--goal: {e}")))?;
            check_derivation(&calc, &ps, &g, &proof).map(|_| g)
        }
        None => check_proof(&calc, &ps, &proof),
    };
    Ok(match res {
        Ok(f) => (
            json!({"calculus": calc.name.to_string(), "result": "ok", "proves": f.to_string(), "lines": proof.lines.len()}),
            format!("ok: {f} ({} lines)", proof.lines.len()),
            0,
        ),
        Err(r) => (
            json!({"calculus": calc.name.to_string(), "result": "rejected", "line": r.line, "reason": r.reason.code(), "detail": r.detail}),
            format!("rejected: {r}"),
            1,
        ),
    })
}

fn premises_from(proof: &Proof) -> Vec<Formula> {
    use epsem::calculus::Justification;
    let mut out: Vec<Option<Formula>> = Vec::new();
    for l in &proof.lines {
        if let Justification::Premise(i) = l.just {
            if out.len() <= i {
                out.resize(i + 1, None);
            }
            out[i].get_or_insert_with(|| l.formula.clone());
        }
    }
    // Unused premise slots get a formula no line can match.
    out.into_iter()
        .map(|f| f.unwrap_or_else(|| Formula::atom("_")))
        .collect()
}

fn run_bridge(file: &str, root: &str, depth: Option<usize>) -> Res {
    let kf: KripkeFile = serde_json::from_str(&read(file, "--file")?).map_err(|e| InputError(format!("--file: {e}")))?;
    let km = TopicKripkeModel::from_file(&kf).map_err(|e| InputError(format!("--file: {e}")))?;
    let r: usize = root
        .strip_prefix('w')
        .and_then(|s| s.parse().ok())
        .filter(|&w| w < km.worlds())
        .ok_or_else(|| InputError(format!("--root: no world {root:?}")))?;
    let ge = km.to_ge_model(r)?;
    let file = ge.to_file();
    let Some(d) = depth else {
        let text = serde_json::to_string_pretty(&file).expect("serializable");
        return Ok((serde_json::to_value(file).expect("serializable"), text, 0));
    };
    let atoms: Vec<String> = km.valuation().keys().cloned().collect();
    let names: Vec<&str> = atoms.iter().map(String::as_str).collect();
    let table = FormulaTable::enumerate(&names, d, true);
    let ext = km.extensions(&table.nodes, &atoms)?;
    let sem = ge.semantics();
    let sv: Vec<SemValue> = atoms
        .iter()
        .map(|a| SemValue {
            truth: ge.values()[a],
            content: ge.contents()[a],
        })
        .collect();
    let mut vals = Vec::new();
    sem.eval_nodes(&table.nodes, &sv, None, &NoGru, &mut vals)
        .map_err(|_| InputError("bridge models must be fine".into()))?;
    // The root is point 0 of the generated submodel.
    let first = (0..table.len()).find(|&i| ext.forced(i, r) != (vals[i].truth & 1 == 1));
    let checked = table.len();
    Ok(match first {
        None => (
            json!({"result": "agree", "formulas": checked, "model": file}),
            format!("forcing at {root} agrees with the gE-model on {checked} formulas"),
            0,
        ),
        Some(i) => {
            let f = table.formula(i);
            (
                json!({"result": "mismatch", "formula": f.to_string(), "forced": ext.forced(i, r), "model": file}),
                format!("mismatch on {f}: forced at {root} is {}", ext.forced(i, r)),
                1,
            )
        }
    })
}

fn run_corpus() -> Res {
    let mut rows = Vec::new();
    let mut text = Vec::new();
    let mut all = true;
    for item in derivation_corpus() {
        let calc = Calculus::new(item.calculus);
        let res = check_derivation(&calc, &item.premises, &item.goal, &item.proof);
        let as_expected = res.is_ok() == item.expect_ok;
        all &= as_expected;
        let status = match &res {
            Ok(()) => "ok".to_string(),
            Err(r) => format!("rejected ({})", r.reason),
        };
        text.push(format!(
            "{} [{}] {}: {status}{}",
            if as_expected { "PASS" } else { "FAIL" },
            calc.name,
            item.name,
            if item.expect_ok { "" } else { ", expected" }
        ));
        rows.push(json!({
            "name": item.name,
            "calculus": calc.name.to_string(),
            "lines": item.proof.lines.len(),
            "ok": res.is_ok(),
            "expected_ok": item.expect_ok,
            "reason": res.err().map(|r| r.reason.code()),
        }));
    }
    Ok((json!({"items": rows, "all_as_expected": all}), text.join("\n"), if all { 0 } else { 1 }))
}

fn run_axioms(calculus: &str) -> Res {
    let calc = Calculus::by_name(calculus).map_err(|e| InputError(format!("--calculus: {e}")))?;
    let axioms: Vec<Value> = axioms_of(&calc)
        .iter()
        .map(|(n, f)| json!({"name": n, "schema": f.to_string()}))
        .collect();
    let rules: Vec<String> = calc.rules.iter().map(|r| r.to_string()).collect();
    let mut text: Vec<String> = axioms_of(&calc).iter().map(|(n, f)| format!("({n}) {f}")).collect();
    text.push(format!("rules: {}", rules.join(", ")));
    Ok((
        json!({"calculus": calc.name.to_string(), "axioms": axioms, "rules": rules}),
        text.join("\n"),
        0,
    ))
}

fn run_sweep(logic: &str, b: &BoundArgs) -> Res {
    let v = variant(logic)?;
    let b = bounds(b)?;
    let r = generic_sweep(v, &Calculus::for_variant(v), &b)?;
    let bad: Vec<&str> = r.violations.iter().map(|x| x.schema).collect();
    Ok((
        json!({
            "logic": v.name(),
            "structures": r.structures,
            "evaluations": r.evaluations,
            "violations": bad,
            "bounds": bounds_json(&b, v),
        }),
        format!(
            "{v}: {} violations over {} algebra pairs ({} evaluations){}",
            bad.len(),
            r.structures,
            r.evaluations,
            if bad.is_empty() { String::new() } else { format!(": {}", bad.join(", ")) }
        ),
        if bad.is_empty() { 0 } else { 1 },
    ))
}

/// Writes a line to stdout; a closed pipe is not an error worth reporting.
fn say(s: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --jobs: {e}");
            return ExitCode::from(2);
        }
    }
    let res = match &cli.cmd {
        Cmd::Parse { formula, logic } => run_parse(formula, logic),
        Cmd::Eval {
            model,
            formulas,
            goal,
            premises,
        } => run_eval(model, formulas, goal, premises),
        Cmd::Check(q) => run_check(q),
        Cmd::Countermodel { query, separate } => run_countermodel(query, separate),
        Cmd::Prove {
            calculus,
            file,
            premises,
            goal,
        } => run_prove(calculus, file, premises, goal),
        Cmd::Bridge { file, root, depth } => run_bridge(file, root, *depth),
        Cmd::Corpus => run_corpus(),
        Cmd::Axioms { calculus } => run_axioms(calculus),
        Cmd::Sweep { logic, bounds } => run_sweep(logic, bounds),
    };
    match res {
        Ok((mut j, text, code)) => {
            match cli.format {
                Format::Json => {
                    if let Value::Object(m) = &mut j {
                        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
                    }
                    say(&serde_json::to_string_pretty(&j).expect("serializable"));
                }
                Format::Text => say(&text),
            }
            ExitCode::from(code)
        }
        Err(InputError(msg)) => {
            match cli.format {
                Format::Json => say(&json!({"schema_version": SCHEMA_VERSION, "result": "error", "error": msg}).to_string()),
                Format::Text => eprintln!("error: {msg}"),
            }
            ExitCode::from(2)
        }
    }
}
