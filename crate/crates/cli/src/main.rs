use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use leafglue::block_gluing::{model_from_delta, reconstruct_leaf, survey_generic};
use leafglue::circle_diffeo::{cauchy_check, injectivity_check, pair_errors, DiffeoChain};
use leafglue::end_space::{classify, classify_truncations, compare, table1_matrix, TruncationRecord};
use leafglue::surface_assembly::{
    assemble_from_schedule, handle_surgery, oracle_check_with_cap, schedule_gluing_with_cap, truncate_pieces,
    GluingSchedule, SurfaceInvariants, Truncation,
};
use leafglue::tree_codec::{check_conditions, decompose_branches, parse_tree_spec, unroll_with_cap, Side, TreeAutomaton};
use serde_json::{json, Value};

/// Environment variable overriding the caps, e.g. `depth=20,steps=14`.
const CAPS_VAR: &str = "LEAFGLUE_CAPS";

#[derive(Parser)]
#[command(name = "leafglue", version, about = "Surface codings, gluing schedules and matching circle maps")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide conditions (★) and (★★) for a coding.
    Check { file: PathBuf },
    /// Branch decomposition of the unrolled tree.
    Decompose {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Gluing schedule as JSON lines.
    Schedule {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Invariants of the schedule assembly; a `.jsonl` input is read as a
    /// schedule, anything else as a coding.
    Assemble {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Surface type at finite resolution.
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Compare two codings up to a resolution.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 8)]
        resolution: usize,
    },
    /// Build the matching circle map for a coding's schedule.
    Diffeo {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Schedule, circle map, glued model, leaf reconstruction and survey.
    Glue {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        samples: u64,
        #[arg(long, default_value_t = 4)]
        radius: u32,
    },
    /// Add a handle to every piece of the tree truncations.
    Surgery {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Conditions and types of the named codings.
    Table1 {
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Text rendering of a JSON report.
    Render { report: PathBuf },
}

struct Failure {
    code: u8,
    kind: String,
    message: String,
    detail: Value,
}

impl From<leafglue::Error> for Failure {
    fn from(e: leafglue::Error) -> Self {
        let detail = match &e {
            leafglue::Error::StarViolated { witness } => json!({ "witness": witness }),
            leafglue::Error::DepthCap { requested, cap } => json!({ "requested": requested, "cap": cap }),
            _ => Value::Null,
        };
        Failure {
            code: if e.is_precondition() { 2 } else { 1 },
            kind: e.kind().to_string(),
            message: e.to_string(),
            detail,
        }
    }
}

impl Failure {
    fn new(code: u8, kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code,
            kind: kind.to_string(),
            message: message.into(),
            detail: Value::Null,
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Caps {
    depth: usize,
    steps: usize,
}

impl Caps {
    fn from_env() -> Outcome<Caps> {
        let mut caps = Caps { depth: 16, steps: 12 };
        let Ok(spec) = std::env::var(CAPS_VAR) else {
            return Ok(caps);
        };
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || Failure::new(1, "invalid_caps", format!("cannot read {CAPS_VAR} entry {item:?}"));
            let (key, value) = item.split_once('=').ok_or_else(bad)?;
            let value: usize = value.trim().parse().map_err(|_| bad())?;
            match key.trim() {
                "depth" => caps.depth = value,
                "steps" => caps.steps = value,
                _ => return Err(bad()),
            }
        }
        Ok(caps)
    }

    fn depth(&self, d: usize) -> Outcome<usize> {
        if d > self.depth {
            return Err(leafglue::Error::DepthCap { requested: d, cap: self.depth }.into());
        }
        Ok(d)
    }

    fn steps(&self, s: usize) -> Outcome<usize> {
        if s > self.steps {
            let mut f = Failure::new(2, "steps_cap", format!("steps {s} exceed the configured cap {}", self.steps));
            f.detail = json!({ "requested": s, "cap": self.steps });
            return Err(f);
        }
        Ok(s)
    }
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(1, "io", format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Outcome<TreeAutomaton> {
    Ok(parse_tree_spec(&read(path)?)?)
}

fn invariants_json(inv: &SurfaceInvariants) -> Value {
    serde_json::to_value(inv).expect("invariants serialize")
}

fn chain_summary(chain: &DiffeoChain) -> Outcome<Value> {
    let errors = pair_errors(chain);
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    let cauchy = cauchy_check(chain, 3)?;
    Ok(json!({
        "rotation": chain.rotation,
        "factors": chain.factors.len(),
        "pairs": chain.matched_pairs.len(),
        "max_pair_error": max_error,
        "budgets_ok": chain.budget_log.iter().all(|e| e.ok),
        "snapped_steps": chain.budget_log.iter().filter(|e| e.snapped).count(),
        "orientation_preserving": chain.is_orientation_preserving(1 << 14),
        "injective": injectivity_check(chain),
        "cauchy_ok": cauchy.iter().all(|r| r.ok),
        "cauchy": cauchy,
        "budget_log": chain.budget_log,
        "matched_pairs": chain.matched_pairs,
    }))
}

fn default_steps(s: &GluingSchedule) -> usize {
    s.entries
        .iter()
        .map(|e| e.lhs_piece.max(e.rhs_piece).max(e.lhs_index).max(e.rhs_index))
        .max()
        .unwrap_or(1) as usize
}

enum Report {
    Json(Value),
    Text(String),
}

fn run(cli: &Cli) -> Outcome<Report> {
    let caps = Caps::from_env()?;
    let report = match &cli.command {
        Command::Check { file } => {
            let aut = load(file)?;
            let mut v = serde_json::to_value(check_conditions(&aut)).expect("report serializes");
            v["kind"] = json!("conditions");
            v
        }
        Command::Decompose { file, depth } => {
            let tree = unroll_with_cap(&load(file)?, caps.depth(*depth)?, caps.depth)?;
            let d = decompose_branches(&tree)?;
            json!({ "kind": "branches", "depth": depth, "branches": d.branches })
        }
        Command::Schedule { file, depth } => {
            let s = schedule_gluing_with_cap(&load(file)?, caps.depth(*depth)?, caps.depth)?;
            return Ok(Report::Text(s.to_jsonl()));
        }
        Command::Assemble { file, depth } => {
            if file.extension().is_some_and(|e| e == "jsonl") {
                let s = GluingSchedule::from_jsonl(&read(file)?)?;
                let inv = assemble_from_schedule(&s, Truncation::Watermark)?.invariants()?;
                json!({ "kind": "invariants", "invariants": invariants_json(&inv) })
            } else {
                let aut = load(file)?;
                let o = oracle_check_with_cap(&aut, caps.depth(*depth)?, caps.depth)?;
                json!({
                    "kind": "invariants",
                    "depth": depth,
                    "invariants": invariants_json(&o.assembly),
                    "oracle": { "tree": invariants_json(&o.tree), "matches": o.matches },
                })
            }
        }
        Command::Classify { file, depth } => {
            let class = classify(&load(file)?, caps.depth(*depth)?)?;
            let mut v = serde_json::to_value(&class).expect("report serializes");
            v["kind"] = json!("classification");
            v["type"] = json!(class.tag.to_string());
            v
        }
        Command::Compare { a, b, resolution } => {
            let c = compare(&load(a)?, &load(b)?, caps.depth(*resolution)?)?;
            let mut v = serde_json::to_value(c).expect("report serializes");
            v["kind"] = json!("comparison");
            v
        }
        Command::Diffeo { file, depth, steps, seed } => {
            let s = schedule_gluing_with_cap(&load(file)?, caps.depth(*depth)?, caps.depth)?;
            let steps = caps.steps(steps.unwrap_or_else(|| default_steps(&s).min(caps.steps)))?;
            let model = model_from_delta(&s.delta(), steps, *seed)?;
            let mut v = chain_summary(&model.chain)?;
            v["kind"] = json!("diffeo");
            v["depth"] = json!(depth);
            v["steps"] = json!(steps);
            v["seed"] = json!(seed);
            v["schedule_entries"] = json!(s.entries.len());
            v["adjacency_consistent"] = json!(model.consistent_with(&s.delta(), steps as u32));
            v
        }
        Command::Glue { file, depth, steps, seed, samples, radius } => {
            let aut = load(file)?;
            let depth = caps.depth(*depth)?;
            let oracle = (0..=depth)
                .map(|d| {
                    let o = oracle_check_with_cap(&aut, d, caps.depth)?;
                    Ok(json!({ "depth": d, "matches": o.matches, "genus": o.assembly.genus }))
                })
                .collect::<Outcome<Vec<_>>>()?;
            let s = schedule_gluing_with_cap(&aut, depth, caps.depth)?;
            let steps = caps.steps(steps.unwrap_or_else(|| default_steps(&s).min(caps.steps)))?;
            let model = model_from_delta(&s.delta(), steps, *seed)?;
            let full = assemble_from_schedule(&s, Truncation::Watermark)?.invariants()?;
            let leaf = reconstruct_leaf(&model, (Side::Right, 1), steps as u32)?.invariants()?;
            let survey = survey_generic(&model, *samples, *radius, *seed)?;
            let mut chain = chain_summary(&model.chain)?;
            chain.as_object_mut().unwrap().remove("matched_pairs");
            json!({
                "kind": "glue",
                "depth": depth,
                "steps": steps,
                "seed": seed,
                "oracle": oracle,
                "oracle_ok": oracle.iter().all(|o| o["matches"] == json!(true)),
                "chain": chain,
                "adjacency_consistent": model.consistent_with(&s.delta(), steps as u32),
                "leaf": {
                    "radius": steps,
                    "invariants": invariants_json(&leaf),
                    "assembly": invariants_json(&full),
                    "equal": (leaf.genus, leaf.euler_characteristic, leaf.boundary_count, leaf.component_count)
                        == (full.genus, full.euler_characteristic, full.boundary_count, full.component_count),
                },
                "survey": survey,
            })
        }
        Command::Surgery { file, depth } => {
            let aut = load(file)?;
            let depth = caps.depth(*depth)?;
            let mut rows = Vec::new();
            let mut before = Vec::new();
            let mut after = Vec::new();
            for d in 1..=depth {
                let k = truncate_pieces(&unroll_with_cap(&aut, d, caps.depth)?);
                let pieces: Vec<usize> = (0..k.pieces.len()).collect();
                let h = handle_surgery(&k, &pieces)?;
                let (gi, go) = (k.invariants()?.genus, h.invariants()?.genus);
                rows.push(json!({ "depth": d, "handles": pieces.len(), "genus_before": gi, "genus_after": go }));
                before.push(TruncationRecord::from_complex(d, &k)?);
                after.push(TruncationRecord::from_complex(d, &h)?);
            }
            json!({
                "kind": "surgery",
                "rows": rows,
                "before": classify_truncations(&before).to_string(),
                "after": classify_truncations(&after).to_string(),
            })
        }
        Command::Table1 { depth } => {
            json!({ "kind": "table1", "depth": depth, "rows": table1_matrix(caps.depth(*depth)?)? })
        }
        Command::Render { report } => {
            let v: Value = serde_json::from_str(&read(report)?)
                .map_err(|e| Failure::new(1, "schema", format!("{}: {e}", report.display())))?;
            return Ok(Report::Text(render(&v)?));
        }
    };
    Ok(Report::Json(report))
}

fn render(v: &Value) -> Outcome<String> {
    let schema = |what: &str| Failure::new(1, "schema", format!("report lacks {what}"));
    let kind = v["kind"].as_str().ok_or_else(|| schema("a kind"))?;
    let mut out = String::new();
    match kind {
        "invariants" => {
            let comps = v["invariants"]["components"].as_array().ok_or_else(|| schema("components"))?;
            writeln!(out, "{:>9} {:>6} {:>6} {:>4} {:>4}", "component", "pieces", "χ", "b", "g").unwrap();
            for (i, c) in comps.iter().enumerate() {
                writeln!(
                    out,
                    "{:>9} {:>6} {:>6} {:>4} {:>4}",
                    i,
                    c["pieces"].as_array().map_or(0, Vec::len),
                    c["euler_characteristic"].to_string(),
                    c["boundary_count"].to_string(),
                    c["genus"].to_string()
                )
                .unwrap();
            }
        }
        "diffeo" => {
            let log = v["budget_log"].as_array().ok_or_else(|| schema("budget_log"))?;
            writeln!(out, "{:>4} {:>5} {:>12} {:>10} {:>3} {:>7}", "k", "order", "estimate", "bound", "ok", "snapped").unwrap();
            for e in log {
                writeln!(
                    out,
                    "{:>4} {:>5} {:>12.4e} {:>10.6} {:>3} {:>7}",
                    e["step"].to_string(),
                    e["order"].to_string(),
                    e["estimate"].as_f64().unwrap_or(f64::NAN),
                    e["bound"].as_f64().unwrap_or(f64::NAN),
                    if e["ok"] == json!(true) { "yes" } else { "no" },
                    if e["snapped"] == json!(true) { "yes" } else { "no" },
                )
                .unwrap();
            }
        }
        "table1" => {
            let rows = v["rows"].as_array().ok_or_else(|| schema("rows"))?;
            writeln!(out, "{:<26} | {:<24} | {:<5} | {:<5} | {}", "coding", "generic leaf type", "(★)", "(★★)", "leaf topology").unwrap();
            for r in rows {
                let tag: leafglue::end_space::SurfaceTag =
                    serde_json::from_value(r["tag"].clone()).map_err(|_| schema("a valid tag"))?;
                let req: leafglue::end_space::LeafRequirement =
                    serde_json::from_value(r["requirement"].clone()).map_err(|_| schema("a valid requirement"))?;
                writeln!(
                    out,
                    "{:<26} | {:<24} | {:<5} | {:<5} | {}",
                    r["coding"].as_str().unwrap_or("?"),
                    tag.to_string(),
                    r["star"].to_string(),
                    r["star_star"].to_string(),
                    req.label()
                )
                .unwrap();
            }
        }
        _ => {
            let obj = v.as_object().ok_or_else(|| schema("an object body"))?;
            let keys: BTreeSet<&String> = obj.keys().collect();
            for k in keys {
                writeln!(out, "{k}: {}", obj[k]).unwrap();
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|report| {
        let text = match report {
            Report::Json(v) => serde_json::to_string_pretty(&v).expect("report serializes") + "\n",
            Report::Text(t) => t,
        };
        match &cli.out {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::new(1, "io", format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let mut err = json!({ "kind": f.kind, "message": f.message });
            if !f.detail.is_null() {
                err["detail"] = f.detail;
            }
            eprintln!("{}", json!({ "error": err }));
            ExitCode::from(f.code)
        }
    }
}
