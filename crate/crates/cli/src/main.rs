mod play;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use coinweigh::bounds::{self, EpsilonMode, Subject};
use coinweigh::model::Instance;
use coinweigh::solver::{
    close_arrow, find_arrow, solve_exact, ArrowResult, ArrowSpec, LeafProfile, SearchBudget,
    SearchResult, SolverOptions,
};
use coinweigh::strategy::{self, verify, Strategy};

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;
const EXHAUSTED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "coinweigh",
    version,
    about = "Counterfeit coins with several sets: solver, verifier and bound auditor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct BudgetArgs {
    /// Deepest strategy to try (default: information bound + 2)
    #[arg(long)]
    max_depth: Option<u32>,
    /// Wall-clock limit in seconds
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Maximum number of expanded search nodes
    #[arg(long, default_value_t = 100_000_000)]
    node_limit: u64,
    /// Worker threads for sibling search
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Turn off canonical keys, class reduction and partition dedupe
    #[arg(long)]
    unreduced: bool,
}

impl BudgetArgs {
    fn budget(&self, lower: u32) -> SearchBudget {
        SearchBudget {
            max_depth: self.max_depth.unwrap_or(lower + 2),
            node_limit: self.node_limit,
            time_limit: Duration::from_secs_f64(self.time_limit),
        }
    }

    fn options(&self) -> SolverOptions {
        let base = if self.unreduced {
            SolverOptions::unreduced()
        } else {
            SolverOptions::default()
        };
        SolverOptions {
            threads: self.threads.max(1),
            ..base
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact minimum number of weighings for an instance such as `5,5` or `4^7`
    Solve {
        instance: Instance,
        /// Write the optimal strategy to this file
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Include the strategy tree in the JSON report
        #[arg(long)]
        tree: bool,
        /// Leave wall time out of the report
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        json: bool,
    },
    /// Check a strategy file against every candidate of its instance
    Verify {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Lower and upper bounds for k sets of n coins
    Bounds {
        n: u64,
        k: u32,
        #[arg(long)]
        json: bool,
    },
    /// The rate table for n = 1..81 next to recomputed logarithms
    Table {
        #[arg(long)]
        json: bool,
    },
    /// Audit the claims database
    Audit {
        /// Claims file (default: the bundled one)
        #[arg(long)]
        claims: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Search for a prefix tree whose leaves meet the given profiles
    Arrow {
        instance: Instance,
        /// Leaf profile such as `one-rep:4@3`, `two-rep:2x7@3`, `singleton@2`
        #[arg(long = "profile", required = true)]
        profiles: Vec<LeafProfile>,
        /// Close 1-representable leaves and write the full strategy here
        #[arg(long)]
        emit: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        json: bool,
    },
    /// Execute a strategy step by step, reading outcomes from stdin
    Play { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Solve {
            instance,
            emit,
            tree,
            no_timing,
            budget,
            json,
        } => solve(&instance, emit.as_deref(), tree, no_timing, &budget, json),
        Command::Verify { file, json } => verify_file(&file, json),
        Command::Bounds { n, k, json } => bounds_cmd(n, k, json),
        Command::Table { json } => table(json),
        Command::Audit { claims, json } => audit(claims.as_deref(), json),
        Command::Arrow {
            instance,
            profiles,
            emit,
            budget,
            json,
        } => arrow(instance, profiles, emit.as_deref(), &budget, json),
        Command::Play { file } => {
            let s = load_strategy(&file)?;
            let stdin = io::stdin();
            let mut input = stdin.lock();
            let mut out = io::stdout().lock();
            let end = play::play(&s.tree, &mut input, &mut out)?;
            out.flush()?;
            Ok(match end {
                play::PlayEnd::Identified(_) => OK,
                play::PlayEnd::Inconsistent => FAILED,
                play::PlayEnd::Eof => USAGE,
            })
        }
    }
}

fn load_strategy(path: &Path) -> Result<Strategy> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    strategy::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn solve(
    inst: &Instance,
    emit: Option<&Path>,
    with_tree: bool,
    no_timing: bool,
    args: &BudgetArgs,
    json: bool,
) -> Result<u8> {
    let lower = bounds::info_lower_bound(inst.sizes());
    let report = solve_exact(inst, args.budget(lower), args.options())?;
    let (status, depth, upper, code) = match &report.result {
        SearchResult::Optimal { depth, .. } => ("optimal", Some(*depth), Some(*depth), OK),
        SearchResult::Infeasible { .. } => ("infeasible", None, None, FAILED),
        SearchResult::Exhausted { upper_bound, .. } => ("exhausted", None, *upper_bound, EXHAUSTED),
    };
    let refuted_below = match &report.result {
        SearchResult::Optimal { depth, .. } => *depth,
        SearchResult::Infeasible { max_depth } => max_depth + 1,
        SearchResult::Exhausted { lower_bound, .. } => *lower_bound,
    };
    let tree = match &report.result {
        SearchResult::Optimal { tree, .. } => Some(tree),
        _ => None,
    };
    if let (Some(path), Some(tree)) = (emit, tree) {
        let text = strategy::serialize(&Strategy {
            instance: inst.clone(),
            tree: tree.clone(),
        });
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        let mut v = json!({
            "instance": inst.sizes(),
            "candidates": inst.space_size().to_string(),
            "information_bound": lower,
            "status": status,
            "depth": depth,
            "proven_lower_bound": refuted_below,
            "upper_bound": upper,
            "nodes": report.stats.nodes,
            "memo_hits": report.stats.memo_hits,
            "memo_entries": report.stats.memo_entries,
        });
        if !no_timing {
            v["wall_time_ms"] = json!(report.stats.wall_time_ms);
        }
        if with_tree {
            if let Some(t) = tree {
                v["tree"] = serde_json::from_str(&strategy::serialize_tree(t))?;
            }
        }
        print_json(&v);
    } else {
        println!("instance           {inst}");
        println!("candidates         {}", inst.space_size());
        println!("information bound  {lower}");
        match &report.result {
            SearchResult::Optimal { depth, .. } => {
                println!("result             optimal, depth {depth}")
            }
            SearchResult::Infeasible { max_depth } => {
                println!("result             no strategy of depth <= {max_depth}")
            }
            SearchResult::Exhausted {
                lower_bound,
                upper_bound,
                ..
            } => {
                println!("result             budget exhausted; depth >= {lower_bound}");
                if let Some(u) = upper_bound {
                    println!("known upper bound  {u}");
                }
            }
        }
        println!("nodes              {}", report.stats.nodes);
        println!("memo hits          {}", report.stats.memo_hits);
        println!("memo entries       {}", report.stats.memo_entries);
        if !no_timing {
            println!("wall time          {} ms", report.stats.wall_time_ms);
        }
        if let (Some(path), Some(_)) = (emit, tree) {
            println!("strategy written   {}", path.display());
        }
    }
    Ok(code)
}

fn verify_file(path: &Path, json: bool) -> Result<u8> {
    let s = load_strategy(path)?;
    let report = verify(&s.tree, &s.instance)?;
    let lower = bounds::info_lower_bound(s.instance.sizes());
    if report.ok() && (report.depth as u32) < lower {
        eprintln!(
            "warning: depth {} is below the information bound {lower}",
            report.depth
        );
    }
    if json {
        let mut v = serde_json::to_value(&report)?;
        v["instance"] = json!(s.instance.sizes());
        v["information_bound"] = json!(lower);
        print_json(&v);
    } else {
        println!("instance           {}", s.instance);
        println!("sound              {}", report.sound);
        println!("complete           {}", report.complete);
        println!("depth              {}", report.depth);
        println!("information bound  {lower}");
        let census: Vec<String> = report.leaf_census.iter().map(|c| c.to_string()).collect();
        println!("leaves by depth    {}", census.join(" "));
        for f in report.failures.iter().take(20) {
            let reason = match &f.reason {
                strategy::FailureReason::WrongAnswer(a) => format!("answers {a}"),
                strategy::FailureReason::NoLeaf => "reaches an unreachable branch".into(),
            };
            println!(
                "failure            {} via [{}] {reason}",
                f.candidate,
                f.path.join(",")
            );
        }
        if report.failures.len() > 20 {
            println!(
                "                   ... {} failures in total",
                report.failures.len()
            );
        }
    }
    Ok(if report.ok() { OK } else { FAILED })
}

fn bounds_cmd(n: u64, k: u32, json: bool) -> Result<u8> {
    if n == 0 || k == 0 {
        anyhow::bail!("n and k must be positive");
    }
    let lower = bounds::info_lower_bound_power(n, k);
    let prop1 = bounds::upper_bound_prop1(n, k).ok();
    let stated = bounds::upper_bound_prop2(n, k, EpsilonMode::Paper)?;
    let derived = bounds::upper_bound_prop2(n, k, EpsilonMode::Derived)?;
    let reduction = bounds::reduce_large_n(n).ok();
    if json {
        print_json(&json!({
            "n": n,
            "k": k,
            "information_bound": lower,
            "mu": bounds::mu(n).ok().map(|m| m.to_string()),
            "prop1": prop1,
            "prop2_stated": stated.value,
            "prop2_derived": derived.value,
            "constructive": stated.constructive,
            "reduction": reduction,
        }));
        return Ok(OK);
    }
    println!("subject              ({n}|{k})");
    println!("information bound    {lower}");
    match &prop1 {
        Some(p) => {
            println!("mu(n)                {}", bounds::mu(n)?);
            println!("ceil(k mu(n))        {} ({:?})", p.value, p.status);
        }
        None => println!("mu(n)                not tabulated (n > 81)"),
    }
    if let Some(r) = &reduction {
        println!(
            "reduction            l={} lambda={} j={} d={} d_j={}",
            r.l, r.lambda, r.j, r.d, r.d_j
        );
    }
    println!("eps = 0.076          {}", stated.value);
    println!("eps = eps*           {}", derived.value);
    if let Some(c) = stated.constructive {
        println!("constructive route   {c}");
    }
    Ok(OK)
}

fn table(json: bool) -> Result<u8> {
    let rows = bounds::table_rows();
    let ok = rows
        .iter()
        .all(|r| r.mu_at_least_log && r.printed_within != Some(false));
    if json {
        print_json(&json!({ "rows": rows, "all_within": ok }));
    } else {
        println!(
            "{:>3}  {:>6}  {:>3}  {:>8}  {:>8}  {:>8}  check",
            "n", "mu", "k0", "log3 n", "printed", "delta"
        );
        for r in &rows {
            let printed = r.printed.unwrap_or("-");
            let delta = r
                .delta
                .map(|d| format!("{d:+.5}"))
                .unwrap_or_else(|| "-".into());
            let flag = match (r.mu_at_least_log, r.printed_within) {
                (false, _) => "mu < log3 n",
                (true, Some(false)) => "off by > 0.001",
                _ => "ok",
            };
            println!(
                "{:>3}  {:>6}  {:>3}  {:>8.5}  {:>8}  {:>8}  {flag}",
                r.n,
                r.mu.to_string(),
                r.k0,
                r.log3,
                printed,
                delta
            );
        }
    }
    Ok(if ok { OK } else { FAILED })
}

fn audit(path: Option<&Path>, json: bool) -> Result<u8> {
    let db = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            bounds::parse_claims(&text)?
        }
        None => bounds::bundled_claims(),
    };
    let report = bounds::audit_claims(&db);
    let gaps = bounds::gap_report();
    let composition = bounds::derive_bound(&db, &Subject::Sizes(vec![4, 4, 5, 2, 19, 19]));
    if json {
        print_json(&json!({
            "audit": report,
            "gaps": gaps,
            "derived": bounds::derive_bounds(&db),
        }));
    } else {
        println!(
            "{:<6} {:<16} {:>5} {:>4} {:>6}  derivation without the claim",
            "tag", "subject", "value", "IT", "tight"
        );
        for c in &report.claims {
            println!(
                "{:<6} {:<16} {:>5} {:>4} {:>6}  {}",
                c.tag,
                c.subject,
                c.value,
                c.info_bound,
                if c.it_tight { "yes" } else { "NO" },
                c.derivation.as_deref().unwrap_or("-")
            );
        }
        println!();
        for r in &report.rate_checks {
            println!(
                "rate n={:<3} mu={:<6} k0={:<3} mu*k0={:<3} {}={} {}",
                r.n,
                r.mu,
                r.k0,
                r.mu_k0,
                r.tag,
                r.claimed,
                if r.consistent { "ok" } else { "MISMATCH" }
            );
        }
        for b in &report.better_than_table {
            println!(
                "{} has rate {} below the table's mu = {}",
                b.tag, b.rate, b.mu
            );
        }
        println!(
            "not reproduced by R1-R4: {}",
            report.not_reproduced.join(" ")
        );
        if let Some(d) = composition {
            println!("example composition: {}", d.render());
        }
        println!();
        println!(
            "{:>2} {:>4} {:>4} {:>6} {:>9}  > 0.076",
            "i", "d-1", "d", "mu", "gap"
        );
        for e in &gaps.entries {
            println!(
                "{:>2} {:>4} {:>4} {:>6} {:>9.6}  {}",
                e.i,
                e.d_prev,
                e.d,
                e.mu.to_string(),
                e.gap,
                if e.exceeds_stated { "yes" } else { "no" }
            );
        }
        let top = gaps.max_entry();
        println!(
            "eps* = {:.6} in [{}, {}) at d = {}; {} the constant 0.076",
            gaps.epsilon_star,
            gaps.epsilon_star_bracket.0,
            gaps.epsilon_star_bracket.1,
            top.d,
            if gaps.exceeds_stated {
                "exceeds"
            } else {
                "within"
            }
        );
        println!("certified: {}", report.certified);
    }
    Ok(if report.certified { OK } else { FAILED })
}

fn arrow(
    instance: Instance,
    profiles: Vec<LeafProfile>,
    emit: Option<&Path>,
    args: &BudgetArgs,
    json: bool,
) -> Result<u8> {
    let spec = ArrowSpec::new(instance, profiles)?;
    let result = find_arrow(&spec, args.budget(spec.max_depth()), args.options())?;
    let profiles: Vec<String> = spec.profiles.iter().map(|p| p.to_string()).collect();
    let (status, code) = match &result {
        ArrowResult::Found { .. } => ("found", OK),
        ArrowResult::Infeasible { .. } => ("infeasible", FAILED),
        ArrowResult::Exhausted { .. } => ("exhausted", EXHAUSTED),
    };
    let mut v = json!({
        "instance": spec.instance.sizes(),
        "profiles": profiles,
        "status": status,
    });
    if let ArrowResult::Exhausted { nodes } = &result {
        v["nodes"] = json!(nodes);
    }
    if let ArrowResult::Found {
        prefix,
        depth,
        leaves,
    } = &result
    {
        v["prefix_depth"] = json!(depth);
        let open = prefix.open_leaves();
        let classes: Vec<Value> = open
            .iter()
            .zip(leaves)
            .filter(|((_, d), _)| !d.is_empty())
            .map(|((at, d), c)| json!({"depth": at, "size": d.len(), "class": c.to_string()}))
            .collect();
        v["leaves"] = json!(classes);
        match close_arrow(prefix) {
            Ok(tree) => {
                let report = verify(&tree, &spec.instance)?;
                v["closed_depth"] = json!(report.depth);
                v["closed_verified"] = json!(report.ok());
                if let Some(path) = emit {
                    let text = strategy::serialize(&Strategy {
                        instance: spec.instance.clone(),
                        tree,
                    });
                    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
                }
            }
            Err(e) => v["closed"] = json!(format!("not closed: {e}")),
        }
    }
    if json {
        print_json(&v);
    } else {
        println!("instance      {}", spec.instance);
        println!(
            "profiles      {}",
            v["profiles"]
                .as_array()
                .map(|a| a
                    .iter()
                    .map(|p| p.as_str().unwrap_or(""))
                    .collect::<Vec<_>>()
                    .join(" "))
                .unwrap_or_default()
        );
        println!("result        {status}");
        if let Some(d) = v.get("prefix_depth") {
            println!("prefix depth  {d}");
            let mut census = std::collections::BTreeMap::<String, usize>::new();
            for l in v["leaves"].as_array().into_iter().flatten() {
                *census
                    .entry(l["class"].as_str().unwrap_or("").to_string())
                    .or_default() += 1;
            }
            for (class, count) in census {
                println!("leaves        {count} x {class}");
            }
        }
        if let Some(d) = v.get("closed_depth") {
            println!("closed depth  {d} (verified: {})", v["closed_verified"]);
        }
        if let Some(c) = v.get("closed") {
            println!("{}", c.as_str().unwrap_or(""));
        }
    }
    Ok(code)
}
