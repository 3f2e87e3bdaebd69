//! The `icd` command line.
//!
//! Exit codes: 0 solved or verified, 1 verification failure or certified
//! infeasibility, 2 inconclusive at the node limit, 64 usage error.

use std::ffi::OsString;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::fractions::{
    case2_chain, enclosing_adjacent_pair, farey_sequence, is_adjacent, lower_bound_cuts, qstar_member,
    thomae_coefficient, upper_bound_cuts,
};
use crate::generators::{gen_lower_bound, gen_random, gen_sat_gadget, read_dimacs};
use crate::io::{read_instance, read_json, to_json, InstanceDocument};
use crate::measures::{verify, Division, Domain, TargetSpec};
use crate::necklace::{instance_to_necklace, necklace_to_instance, solve_necklace, Necklace, NecklaceOutcome};
use crate::pipelines::{ckd_via_carving, more_cuts_solve, upper_bound_solve, PipelineOptions};
use crate::ratio::Ratio;
use crate::solver::{min_cuts, solve, MinCuts, SearchConfig, DEFAULT_NODE_LIMIT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "icd", version, about = "Exact imbalanced consensus division")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Search nodes per solver call before giving up
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_LIMIT)]
    pub node_limit: u64,
    /// Worker threads for the solver (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Leave the timestamp out of artifact metadata
    #[arg(long, global = true)]
    pub reproducible: bool,
    /// Add floating-point view columns next to exact values
    #[arg(long, global = true)]
    pub render_floats: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate instances
    #[command(subcommand)]
    Gen(GenCommand),
    /// Decide whether a division within the cut budget exists
    Solve(SolveArgs),
    /// Check a division against the targets
    Verify(VerifyArgs),
    /// Smallest cut count for an imbalanced division
    MinCuts(MinCutsArgs),
    /// Fraction utilities
    #[command(subcommand)]
    Frac(FracCommand),
    /// Lower and upper cut bounds for a ratio
    Bounds(BoundsArgs),
    /// Constructive upper-bound pipelines
    #[command(subcommand)]
    Pipeline(PipelineCommand),
    /// Necklace conversions and splitting
    #[command(subcommand)]
    Necklace(NecklaceCommand),
    /// Cut coefficient for every Farey fraction as CSV
    Thomae(ThomaeArgs),
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// Hard instance for a ratio
    LowerBound {
        #[arg(long)]
        alpha: Ratio,
        #[arg(long)]
        agents: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reduction gadget from an exactly-1 3-CNF formula
    Sat {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        alpha: Ratio,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Seeded random instance
    Random {
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        blocks: usize,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub cuts: usize,
    /// Number of labels; targets default to uniform
    #[arg(long)]
    pub labels: Option<usize>,
    /// Comma-separated targets, e.g. "2/5,3/5"
    #[arg(long)]
    pub targets: Option<String>,
    #[arg(long, default_value = "0")]
    pub epsilon: Ratio,
    #[arg(long)]
    pub mode: Option<Domain>,
    /// Where to write the certificate (stdout otherwise)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub division: PathBuf,
    #[arg(long)]
    pub targets: Option<String>,
    /// Imbalanced targets `alpha, 1 - alpha`
    #[arg(long)]
    pub alpha: Option<Ratio>,
    #[arg(long, default_value = "0")]
    pub epsilon: Ratio,
}

#[derive(Args, Debug)]
pub struct MinCutsArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub alpha: Ratio,
    #[arg(long)]
    pub max: usize,
    #[arg(long)]
    pub mode: Option<Domain>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum FracCommand {
    /// Whether two fractions are Farey neighbours
    Adjacent { a: Ratio, b: Ratio },
    /// The adjacent pair enclosing a fraction
    Enclose { a: Ratio },
    /// Membership in Q* with its generating chain
    Qstar { a: Ratio },
    /// Remainder chain down to Q*
    Chain { a: Ratio },
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub alpha: Ratio,
    #[arg(long)]
    pub agents: u64,
}

#[derive(Subcommand, Debug)]
pub enum PipelineCommand {
    /// Exact division along the Q* or remainder chain
    UpperBound {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        alpha: Ratio,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Approximate division through the Q_p ladder
    MoreCuts {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        alpha: Ratio,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value = "1/16")]
        accuracy: Ratio,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Approximate consensus k-division by repeated carving
    CkdCarve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value = "1/16")]
        accuracy: Ratio,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum NecklaceCommand {
    /// Necklace JSON to instance JSON
    ToIcd {
        #[arg(long)]
        necklace: PathBuf,
        #[arg(long)]
        alpha: Option<Ratio>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Instance JSON to necklace JSON
    FromIcd {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        alpha: Ratio,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fewest-cut imbalanced split
    Solve {
        #[arg(long)]
        necklace: PathBuf,
        #[arg(long)]
        alpha: Ratio,
        #[arg(long)]
        max_cuts: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ThomaeArgs {
    #[arg(long)]
    pub max_den: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// CSV of `2(k-1)/k` at every reduced `l/k` with `k <= max_den`.
pub fn emit_thomae_csv(max_den: u64, render_floats: bool) -> String {
    let mut out = String::from("alpha_num,alpha_den,coefficient_num,coefficient_den");
    if render_floats {
        out.push_str(",coefficient_float");
    }
    out.push('\n');
    for a in farey_sequence(max_den.max(1)) {
        let c = thomae_coefficient(&a);
        out.push_str(&format!("{},{},{},{}", a.numer(), a.denom(), c.numer(), c.denom()));
        if render_floats {
            out.push_str(&format!(",{}", c.to_f64()));
        }
        out.push('\n');
    }
    out
}

/// Parse `argv` and run; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Inconclusive { .. } => EXIT_INCONCLUSIVE,
                Error::NotASolution(_) | Error::NotSatisfying | Error::SubProblemInfeasible(_) => EXIT_FAIL,
                _ => EXIT_USAGE,
            }
        }
    }
}

struct Ctx<'a> {
    global: &'a GlobalArgs,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit<T: Serialize>(&mut self, path: Option<&Path>, value: &T) -> Result<()> {
        let text = to_json(value)?;
        self.emit_text(path, &text)
    }

    fn emit_text(&mut self, path: Option<&Path>, text: &str) -> Result<()> {
        match path {
            Some(p) => std::fs::write(p, text)?,
            None => self.out.write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn stamp(&self, doc: InstanceDocument) -> InstanceDocument {
        if self.global.reproducible {
            return doc;
        }
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        doc.with_meta("created_unix", now)
    }

    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            node_limit: self.global.node_limit,
            threads: self.global.threads,
        }
    }

    fn float(&self, r: &Ratio) -> Option<f64> {
        self.global.render_floats.then(|| r.to_f64())
    }
}

fn parse_targets(s: &str) -> Result<Vec<Ratio>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let mut ctx = Ctx { global: &cli.global, out };
    match &cli.command {
        Command::Gen(g) => gen(&mut ctx, g),
        Command::Solve(a) => cmd_solve(&mut ctx, a),
        Command::Verify(a) => cmd_verify(&mut ctx, a),
        Command::MinCuts(a) => cmd_min_cuts(&mut ctx, a),
        Command::Frac(f) => frac(&mut ctx, f),
        Command::Bounds(a) => bounds(&mut ctx, a),
        Command::Pipeline(p) => pipeline(&mut ctx, p),
        Command::Necklace(n) => necklace(&mut ctx, n),
        Command::Thomae(a) => {
            let csv = emit_thomae_csv(a.max_den, ctx.global.render_floats);
            ctx.emit_text(a.output.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }
    }
}

fn gen(ctx: &mut Ctx, g: &GenCommand) -> Result<i32> {
    match g {
        GenCommand::LowerBound { alpha, agents, output } => {
            let layout = gen_lower_bound(alpha, *agents)?;
            let doc = InstanceDocument::new(&layout.instance, Some(alpha.clone()))
                .with_meta("generator", "lower-bound")
                .with_meta("enclosing", [&layout.enclosing.0, &layout.enclosing.1])
                .with_meta("copies", layout.copies)
                .with_meta("dummies", layout.dummies)
                .with_meta("roles", &layout.roles)
                .with_meta("guaranteed_min_cuts", layout.guaranteed_min_cuts);
            let doc = ctx.stamp(doc);
            ctx.emit(output.as_deref(), &doc)?;
        }
        GenCommand::Sat { cnf, alpha, output } => {
            let file = std::fs::File::open(cnf)?;
            let (formula, exactly_one) = read_dimacs(BufReader::new(file))?;
            let layout = gen_sat_gadget(&formula, alpha)?;
            let clauses: Vec<Vec<i64>> = formula
                .clauses
                .iter()
                .map(|c| c.iter().map(|l| l.to_signed()).collect())
                .collect();
            let doc = InstanceDocument::new(&layout.instance, Some(alpha.clone()))
                .with_meta("generator", "sat")
                .with_meta("exactly_one_flag", exactly_one)
                .with_meta("variables", formula.vars)
                .with_meta("clauses", clauses)
                .with_meta("k", layout.k)
                .with_meta("grid_extent", &layout.extent)
                .with_meta("target_cuts", layout.target_cuts)
                .with_meta("boundary_case", layout.boundary_case);
            let doc = ctx.stamp(doc);
            ctx.emit(output.as_deref(), &doc)?;
        }
        GenCommand::Random {
            agents,
            blocks,
            seed,
            output,
        } => {
            let inst = gen_random(*agents, *blocks, *seed)?;
            let doc = InstanceDocument::new(&inst, None)
                .with_meta("generator", "random")
                .with_meta("seed", seed)
                .with_meta("blocks", blocks);
            let doc = ctx.stamp(doc);
            ctx.emit(output.as_deref(), &doc)?;
        }
    }
    Ok(EXIT_OK)
}

fn resolve_targets(
    targets: Option<&str>,
    labels: Option<usize>,
    alpha: Option<&Ratio>,
    epsilon: &Ratio,
) -> Result<TargetSpec> {
    let spec = match (targets, labels, alpha) {
        (Some(t), _, _) => TargetSpec::new(parse_targets(t)?, Ratio::zero())?,
        (None, Some(m), _) => TargetSpec::uniform(m)?,
        (None, None, Some(a)) => TargetSpec::imbalanced(a)?,
        (None, None, None) => TargetSpec::uniform(2)?,
    };
    if let (Some(m), Some(_)) = (labels, targets) {
        if m != spec.label_count() {
            return Err(Error::InvalidArgument(format!(
                "--labels {m} disagrees with {} targets",
                spec.label_count()
            )));
        }
    }
    Ok(spec.with_epsilon(epsilon.clone()))
}

fn cmd_solve(ctx: &mut Ctx, a: &SolveArgs) -> Result<i32> {
    let (inst, doc) = read_instance(&a.instance)?;
    let spec = resolve_targets(a.targets.as_deref(), a.labels, doc.alpha.as_ref(), &a.epsilon)?;
    let domain = a.mode.unwrap_or(inst.domain);
    let cfg = SearchConfig::new(a.cuts, spec, domain)
        .with_node_limit(ctx.global.node_limit)
        .with_threads(ctx.global.threads);
    let cert = solve(&inst.with_domain(domain), &cfg)?;
    ctx.emit(a.output.as_deref(), &cert)?;
    Ok(if cert.is_feasible() {
        EXIT_OK
    } else if cert.is_infeasible() {
        EXIT_FAIL
    } else {
        EXIT_INCONCLUSIVE
    })
}

fn cmd_verify(ctx: &mut Ctx, a: &VerifyArgs) -> Result<i32> {
    let (inst, doc) = read_instance(&a.instance)?;
    let div: Division = read_json(&a.division)?;
    let alpha = a.alpha.as_ref().or(doc.alpha.as_ref().filter(|_| div.label_count == 2));
    let labels = (a.targets.is_none() && alpha.is_none()).then_some(div.label_count);
    let spec = resolve_targets(a.targets.as_deref(), labels, alpha, &a.epsilon)?;
    let report = verify(&inst.with_domain(div.domain), &div, &spec)?;
    let mut value = serde_json::to_value(&report)?;
    if ctx.global.render_floats {
        value["worst_deviation_float"] = json!(report.worst_deviation.to_f64());
    }
    ctx.emit(None, &value)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_min_cuts(ctx: &mut Ctx, a: &MinCutsArgs) -> Result<i32> {
    let (inst, _) = read_instance(&a.instance)?;
    let domain = a.mode.unwrap_or(inst.domain);
    let cfg = SearchConfig::new(a.max, TargetSpec::imbalanced(&a.alpha)?, domain)
        .with_node_limit(ctx.global.node_limit)
        .with_threads(ctx.global.threads);
    let report = min_cuts(&inst.with_domain(domain), &cfg, a.max)?;
    ctx.emit(a.output.as_deref(), &report)?;
    Ok(match report.result {
        MinCuts::Found { .. } => EXIT_OK,
        MinCuts::Bracket { .. } => EXIT_INCONCLUSIVE,
        MinCuts::NotFound { complete: true, .. } => EXIT_FAIL,
        MinCuts::NotFound { complete: false, .. } => EXIT_INCONCLUSIVE,
    })
}

fn frac(ctx: &mut Ctx, f: &FracCommand) -> Result<i32> {
    let value = match f {
        FracCommand::Adjacent { a, b } => json!({ "a": a, "b": b, "adjacent": is_adjacent(a, b)? }),
        FracCommand::Enclose { a } => {
            let (lo, hi) = enclosing_adjacent_pair(a)?;
            json!({ "alpha": a, "lower": lo, "upper": hi })
        }
        FracCommand::Qstar { a } => {
            let witness = qstar_member(a);
            json!({ "alpha": a, "member": witness.is_some(), "witness": witness })
        }
        FracCommand::Chain { a } => serde_json::to_value(case2_chain(a)?)?,
    };
    ctx.emit(None, &value)?;
    Ok(EXIT_OK)
}

fn bounds(ctx: &mut Ctx, a: &BoundsArgs) -> Result<i32> {
    let lower = lower_bound_cuts(&a.alpha, a.agents)?;
    let upper = upper_bound_cuts(&a.alpha, a.agents)?;
    let coefficient = thomae_coefficient(&a.alpha);
    let lower_coefficient = (&coefficient * &Ratio::int(a.agents as i64)).floor();
    let mut value = json!({
        "alpha": a.alpha,
        "agents": a.agents,
        "lower": lower,
        "upper": upper.value,
        "upper_tag": upper.tag,
        "c_alpha": upper.c_alpha,
        "fallback": upper.fallback,
        "thomae_cuts": lower_coefficient.to_u64(),
    });
    if let Some(f) = ctx.float(&coefficient) {
        value["coefficient_float"] = json!(f);
    }
    ctx.emit(None, &value)?;
    Ok(EXIT_OK)
}

fn pipeline(ctx: &mut Ctx, p: &PipelineCommand) -> Result<i32> {
    let opts = ctx.options();
    match p {
        PipelineCommand::UpperBound { instance, alpha, output } => {
            let (inst, _) = read_instance(instance)?;
            let res = upper_bound_solve(&inst, alpha, &opts)?;
            ctx.emit(output.as_deref(), &res)?;
            Ok(if res.report.pass { EXIT_OK } else { EXIT_FAIL })
        }
        PipelineCommand::MoreCuts {
            instance,
            alpha,
            p,
            accuracy,
            output,
        } => {
            let (inst, _) = read_instance(instance)?;
            let res = more_cuts_solve(&inst, alpha, *p, accuracy, &opts)?;
            ctx.emit(output.as_deref(), &res)?;
            Ok(if res.result.report.pass { EXIT_OK } else { EXIT_FAIL })
        }
        PipelineCommand::CkdCarve {
            instance,
            k,
            p,
            accuracy,
            output,
        } => {
            let (inst, _) = read_instance(instance)?;
            let res = ckd_via_carving(&inst, *k, *p, accuracy, &opts)?;
            ctx.emit(output.as_deref(), &res)?;
            Ok(if res.report.pass { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

fn necklace(ctx: &mut Ctx, n: &NecklaceCommand) -> Result<i32> {
    match n {
        NecklaceCommand::ToIcd {
            necklace,
            alpha,
            output,
        } => {
            let neck: Necklace = read_json(necklace)?;
            if let Some(a) = alpha {
                neck.quotas(a)?;
            }
            let inst = necklace_to_instance(&neck)?;
            let doc = InstanceDocument::new(&inst, alpha.clone())
                .with_meta("generator", "necklace")
                .with_meta("beads", &neck.beads);
            let doc = ctx.stamp(doc);
            ctx.emit(output.as_deref(), &doc)?;
            Ok(EXIT_OK)
        }
        NecklaceCommand::FromIcd { instance, alpha, output } => {
            let (inst, _) = read_instance(instance)?;
            let neck = instance_to_necklace(&inst, alpha)?;
            ctx.emit(output.as_deref(), &neck)?;
            Ok(EXIT_OK)
        }
        NecklaceCommand::Solve {
            necklace,
            alpha,
            max_cuts,
            output,
        } => {
            let neck: Necklace = read_json(necklace)?;
            let outcome = solve_necklace(&neck, alpha, *max_cuts)?;
            ctx.emit(output.as_deref(), &outcome)?;
            Ok(match outcome {
                NecklaceOutcome::Split { .. } => EXIT_OK,
                NecklaceOutcome::Infeasible { .. } => EXIT_FAIL,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("icd").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn thomae_small() {
        assert_eq!(
            emit_thomae_csv(2, false),
            "alpha_num,alpha_den,coefficient_num,coefficient_den\n0,1,0,1\n1,2,1,1\n1,1,0,1\n"
        );
    }

    #[test]
    fn bounds_example() {
        let (code, text) = run_capture(&["bounds", "--alpha", "2/5", "--agents", "5"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["lower"], 6);
        assert_eq!(v["upper"], 9);
        assert_eq!(v["fallback"], 10);
        assert_eq!(v["upper_tag"], "non_qstar");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["bounds", "--alpha", "2/5"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["no-such-command"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bounds", "--alpha", "7/5", "--agents", "2"]).0, EXIT_USAGE);
    }
}
