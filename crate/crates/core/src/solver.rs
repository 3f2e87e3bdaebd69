//! Exact division search under a cut budget.
//!
//! A candidate fixes, for every cut, the refinement cell holding it, and a
//! label for every piece. Inside a cell every density is constant, so each
//! agent's measure of each label is affine in the cut offsets and the
//! candidate is decided by one exact linear feasibility problem.
//!
//! Candidates are enumerated depth first in the order of the key
//! `(label_0, cell_1, label_1, cell_2, ...)`, so the first feasible candidate
//! is the lexicographically smallest one. Cuts are only placed in cells where
//! some agent has positive density: a cut inside a region worth nothing to
//! everybody can slide to the nearest valued cell without changing any measure.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Feasibility, LinearSystem, Relation};
use crate::measures::{refine_cells, verify, Division, Domain, Instance, TargetSpec};
use crate::ratio::Ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneFlags {
    /// Interval bounds on each label's running measure.
    pub bounds: bool,
    /// Label-permutation canonicalization when all targets are equal.
    pub symmetry: bool,
    /// Exact linear relaxation at internal nodes.
    pub relaxation: bool,
}

impl Default for PruneFlags {
    fn default() -> Self {
        PruneFlags {
            bounds: true,
            symmetry: true,
            relaxation: true,
        }
    }
}

impl PruneFlags {
    pub fn none() -> Self {
        PruneFlags {
            bounds: false,
            symmetry: false,
            relaxation: false,
        }
    }
}

pub const DEFAULT_NODE_LIMIT: u64 = 20_000_000;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub cut_budget: usize,
    pub targets: TargetSpec,
    pub domain: Domain,
    pub prune: PruneFlags,
    pub node_limit: u64,
    /// Worker threads; 1 runs on the calling thread.
    pub threads: usize,
}

impl SearchConfig {
    pub fn new(cut_budget: usize, targets: TargetSpec, domain: Domain) -> Self {
        SearchConfig {
            cut_budget,
            targets,
            domain,
            prune: PruneFlags::default(),
            node_limit: DEFAULT_NODE_LIMIT,
            threads: 1,
        }
    }

    pub fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = limit;
        self
    }

    pub fn with_prune(mut self, prune: PruneFlags) -> Self {
        self.prune = prune;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn label_count(&self) -> usize {
        self.targets.label_count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Feasible { division: Division },
    Infeasible,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub cut_budget: usize,
    /// Exact cut counts that were enumerated.
    pub levels: Vec<usize>,
    pub nodes_explored: u64,
    pub lp_calls: u64,
    /// True when every candidate at every level was refuted or a witness found.
    pub enumeration_complete: bool,
}

impl Certificate {
    pub fn division(&self) -> Option<&Division> {
        match &self.verdict {
            Verdict::Feasible { division } => Some(division),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.verdict, Verdict::Feasible { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self.verdict, Verdict::Infeasible) && self.enumeration_complete
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self.verdict, Verdict::Inconclusive)
    }
}

/// Exact cut counts whose search covers every division with at most
/// `budget` cuts. Two cuts stacked at one point add a zero-length piece, so
/// counts `t` and `t - 1` reach every smaller count by parity. On the circle a
/// single cut is the same as none, and with two labels only even counts can
/// alternate around the circle.
pub fn levels_for_budget(budget: usize, domain: Domain, labels: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for t in [budget.checked_sub(1), Some(budget)].into_iter().flatten() {
        let ok = match domain {
            Domain::Interval => true,
            Domain::Circle => t != 1 && !(labels == 2 && t % 2 == 1),
        };
        if ok && !out.contains(&t) {
            out.push(t);
        }
    }
    if domain == Domain::Circle && out.is_empty() {
        out.push(0);
    }
    out
}

/// Decide whether a division with at most `cfg.cut_budget` cuts meets the targets.
pub fn solve(inst: &Instance, cfg: &SearchConfig) -> Result<Certificate> {
    let levels = levels_for_budget(cfg.cut_budget, cfg.domain, cfg.label_count());
    let mut nodes = 0u64;
    let mut lp_calls = 0u64;
    let mut searched = Vec::new();
    for &t in &levels {
        let remaining = cfg.node_limit.saturating_sub(nodes);
        let out = search_exact(inst, cfg, t, remaining)?;
        nodes += out.nodes;
        lp_calls += out.lp_calls;
        searched.push(t);
        match out.result {
            LevelResult::Feasible(division) => {
                return Ok(Certificate {
                    verdict: Verdict::Feasible { division },
                    cut_budget: cfg.cut_budget,
                    levels: searched,
                    nodes_explored: nodes,
                    lp_calls,
                    enumeration_complete: true,
                });
            }
            LevelResult::Exhausted => {}
            LevelResult::LimitHit => {
                return Ok(Certificate {
                    verdict: Verdict::Inconclusive,
                    cut_budget: cfg.cut_budget,
                    levels: searched,
                    nodes_explored: nodes,
                    lp_calls,
                    enumeration_complete: false,
                });
            }
        }
    }
    Ok(Certificate {
        verdict: Verdict::Infeasible,
        cut_budget: cfg.cut_budget,
        levels: searched,
        nodes_explored: nodes,
        lp_calls,
        enumeration_complete: true,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MinCuts {
    /// Every smaller count is certified infeasible.
    Found { cuts: usize, division: Division },
    /// Some smaller count was inconclusive: the minimum lies in `[lower, cuts]`.
    Bracket {
        lower: usize,
        cuts: usize,
        division: Division,
    },
    /// Nothing up to the budget; `complete` says whether every level was exhausted.
    NotFound { max_budget: usize, lower: usize, complete: bool },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinCutsReport {
    pub result: MinCuts,
    /// `(cut count, verdict kind)` per level searched.
    pub levels: Vec<(usize, String)>,
    pub nodes_explored: u64,
}

/// Smallest cut count admitting a division, searching exact counts upward.
/// `cfg.cut_budget` is ignored; `max_budget` caps the search.
pub fn min_cuts(inst: &Instance, cfg: &SearchConfig, max_budget: usize) -> Result<MinCutsReport> {
    let mut levels = Vec::new();
    let mut nodes = 0u64;
    // smallest count not yet certified infeasible
    let mut lower: Option<usize> = None;
    let mut certified_below = 0usize;
    for t in 0..=max_budget {
        if cfg.domain == Domain::Circle && (t == 1 || (cfg.label_count() == 2 && t % 2 == 1)) {
            if lower.is_none() {
                certified_below = t + 1;
            }
            continue;
        }
        let out = search_exact(inst, cfg, t, cfg.node_limit)?;
        nodes += out.nodes;
        match out.result {
            LevelResult::Feasible(division) => {
                levels.push((t, "feasible".to_string()));
                let result = match lower {
                    None => MinCuts::Found { cuts: t, division },
                    Some(lo) => MinCuts::Bracket {
                        lower: lo,
                        cuts: t,
                        division,
                    },
                };
                return Ok(MinCutsReport {
                    result,
                    levels,
                    nodes_explored: nodes,
                });
            }
            LevelResult::Exhausted => {
                levels.push((t, "infeasible".to_string()));
                if lower.is_none() {
                    certified_below = t + 1;
                }
            }
            LevelResult::LimitHit => {
                levels.push((t, "inconclusive".to_string()));
                lower.get_or_insert(t);
            }
        }
    }
    Ok(MinCutsReport {
        result: MinCuts::NotFound {
            max_budget,
            lower: lower.unwrap_or(certified_below),
            complete: lower.is_none(),
        },
        levels,
        nodes_explored: nodes,
    })
}

/// Outcome of the search at one exact cut count.
#[derive(Clone, Debug)]
pub enum LevelResult {
    Feasible(Division),
    Exhausted,
    LimitHit,
}

#[derive(Clone, Debug)]
pub struct LevelOutcome {
    pub result: LevelResult,
    pub nodes: u64,
    pub lp_calls: u64,
}

/// Search divisions with exactly `cuts` cuts (degenerate placements allowed).
pub fn search_exact(inst: &Instance, cfg: &SearchConfig, cuts: usize, node_limit: u64) -> Result<LevelOutcome> {
    let problem = Problem::new(inst, cfg, cuts)?;
    Ok(problem.run(node_limit, cfg.threads))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneRule {
    /// A label already holds more than its target plus tolerance.
    Overfull,
    /// A label can no longer reach its target minus tolerance.
    Unreachable,
    /// Labels are interchangeable and this sequence is not the canonical one.
    Symmetry,
    /// The exact relaxation of the partial candidate is infeasible.
    Relaxation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneDecision {
    Keep,
    Cut(PruneRule),
}

/// Apply the sound pruning rules to a partial candidate: `cells[s]` is the
/// index (into the refinement of `inst`) of cut `s + 1` and `labels` holds
/// the labels of the first `cells.len() + 1` pieces.
pub fn prune_candidate(
    inst: &Instance,
    cfg: &SearchConfig,
    cells: &[usize],
    labels: &[usize],
) -> Result<PruneDecision> {
    let problem = Problem::new(inst, cfg, cells.len().max(cfg.cut_budget))?;
    if labels.len() != cells.len() + 1 {
        return Err(Error::InvalidArgument("need one more label than cells".into()));
    }
    let mut eligible = Vec::with_capacity(cells.len());
    for &c in cells {
        match problem.cells.iter().position(|e| e.index == c) {
            Some(p) => eligible.push(p),
            None => return Err(Error::InvalidArgument(format!("cell {c} carries no value"))),
        }
    }
    if problem.symmetric {
        let mut next = 0;
        for &l in labels {
            if l > next {
                return Ok(PruneDecision::Cut(PruneRule::Symmetry));
            }
            if l == next {
                next += 1;
            }
        }
    }
    let mut stats = Stats::default();
    Ok(match problem.check_partial(&eligible, labels, &mut stats) {
        None => PruneDecision::Keep,
        Some(rule) => PruneDecision::Cut(rule),
    })
}

/// A refinement cell where some agent has positive density.
struct EligibleCell {
    /// Index in the full refinement.
    index: usize,
    start: Ratio,
    len: Ratio,
    /// Per agent.
    density: Vec<Ratio>,
    /// Per agent: measure of `[0, start]`.
    before: Vec<Ratio>,
}

struct Problem<'a> {
    inst: &'a Instance,
    cells: Vec<EligibleCell>,
    cuts: usize,
    labels: usize,
    targets: Vec<Ratio>,
    epsilon: Ratio,
    wrap: bool,
    symmetric: bool,
    prune: PruneFlags,
    spec: TargetSpec,
    domain: Domain,
}

#[derive(Default)]
struct Stats {
    nodes: u64,
    lp_calls: u64,
}

/// `constant + sum coefs[s] * y_s`
#[derive(Clone, Debug)]
struct Affine {
    constant: Ratio,
    coefs: Vec<Ratio>,
}

impl Affine {
    fn new(vars: usize) -> Self {
        Affine {
            constant: Ratio::zero(),
            coefs: vec![Ratio::zero(); vars],
        }
    }

    fn min_max(&self, lens: &[&Ratio]) -> (Ratio, Ratio) {
        let mut lo = self.constant.clone();
        let mut hi = self.constant.clone();
        for (c, len) in self.coefs.iter().zip(lens) {
            if c.is_positive() {
                hi += c * *len;
            } else if c.is_negative() {
                lo += c * *len;
            }
        }
        (lo, hi)
    }

    fn terms(&self) -> Vec<(usize, Ratio)> {
        self.coefs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(s, c)| (s, c.clone()))
            .collect()
    }
}

enum TaskResult {
    Feasible(Division),
    Exhausted,
    LimitHit,
    Skipped,
}

struct Task {
    first_label: usize,
    first_cut: Option<(usize, usize)>,
}

impl<'a> Problem<'a> {
    fn new(inst: &'a Instance, cfg: &SearchConfig, cuts: usize) -> Result<Self> {
        if !inst.extent.is_one() {
            return Err(Error::InvalidArgument("the solver expects a normalized instance".into()));
        }
        let m = cfg.label_count();
        if m < 2 {
            return Err(Error::InvalidArgument("at least two labels are required".into()));
        }
        let n = inst.agent_count();
        let mut before = vec![Ratio::zero(); n];
        let mut cells = Vec::new();
        for (index, cell) in refine_cells(inst).into_iter().enumerate() {
            let len = cell.len();
            let masses: Vec<Ratio> = (0..n).map(|i| cell.mass(i)).collect();
            if !cell.is_empty() {
                cells.push(EligibleCell {
                    index,
                    start: cell.start.clone(),
                    len,
                    density: cell.densities.clone(),
                    before: before.clone(),
                });
            }
            for (b, m) in before.iter_mut().zip(masses) {
                *b += m;
            }
        }
        let wrap = cfg.domain == Domain::Circle && cuts >= 2;
        Ok(Problem {
            inst,
            cells,
            cuts,
            labels: m,
            targets: cfg.targets.targets.clone(),
            epsilon: cfg.targets.epsilon.clone(),
            wrap,
            symmetric: cfg.prune.symmetry && cfg.targets.all_equal(),
            prune: cfg.prune,
            spec: cfg.targets.clone(),
            domain: cfg.domain,
        })
    }

    fn totals(&self) -> Vec<Ratio> {
        self.inst.agents.iter().map(|a| a.total()).collect()
    }

    /// `F_i(x_s)` for cut `s` (1-based) as an affine function of the offsets.
    fn cum_at_cut(&self, agent: usize, cells: &[usize], s: usize, vars: usize) -> Affine {
        let cell = &self.cells[cells[s - 1]];
        let mut a = Affine::new(vars);
        a.constant = cell.before[agent].clone();
        a.coefs[s - 1] = cell.density[agent].clone();
        a
    }

    /// Per agent and label: measure of the closed pieces as an affine
    /// function of the offsets of the placed cuts. With `leaf` every piece is
    /// closed.
    fn label_measures(&self, cells: &[usize], labels: &[usize], leaf: bool) -> Vec<Vec<Affine>> {
        let j = cells.len();
        let totals = self.totals();
        (0..self.inst.agent_count())
            .map(|i| {
                let mut per_label: Vec<Affine> = (0..self.labels).map(|_| Affine::new(j)).collect();
                let closed = if leaf { j + 1 } else { j };
                for s in 0..closed {
                    let l = labels[s];
                    let target = &mut per_label[l];
                    // piece s spans [x_s, x_{s+1}] with x_0 = 0 and x_{j+1} = 1
                    if s < j {
                        let end = self.cum_at_cut(i, cells, s + 1, j);
                        target.constant += &end.constant;
                        target.coefs[s] += &end.coefs[s];
                    } else {
                        target.constant += &totals[i];
                    }
                    if s > 0 {
                        let start = self.cum_at_cut(i, cells, s, j);
                        target.constant -= &start.constant;
                        target.coefs[s - 1] -= &start.coefs[s - 1];
                    }
                }
                per_label
            })
            .collect()
    }

    fn offset_system(&self, cells: &[usize]) -> LinearSystem {
        let j = cells.len();
        let mut sys = LinearSystem::new(j);
        for (s, &c) in cells.iter().enumerate() {
            sys.bound(s, Some(Ratio::zero()), Some(self.cells[c].len.clone()));
            if s > 0 && cells[s - 1] == c {
                sys.add(
                    vec![(s - 1, Ratio::one()), (s, -Ratio::one())],
                    Relation::Le,
                    Ratio::zero(),
                );
            }
        }
        sys
    }

    /// `None` keeps the node.
    fn check_partial(&self, cells: &[usize], labels: &[usize], stats: &mut Stats) -> Option<PruneRule> {
        if !self.prune.bounds && !self.prune.relaxation {
            return None;
        }
        let j = cells.len();
        if j == 0 {
            return None;
        }
        let measures = self.label_measures(cells, labels, false);
        let totals = self.totals();
        let lens: Vec<&Ratio> = cells.iter().map(|&c| &self.cells[c].len).collect();
        // rest_i = total_i - F_i(x_j)
        let rests: Vec<Affine> = (0..self.inst.agent_count())
            .map(|i| {
                let mut r = self.cum_at_cut(i, cells, j, j);
                r.constant = &totals[i] - &r.constant;
                r.coefs[j - 1] = -&r.coefs[j - 1];
                r
            })
            .collect();
        if self.prune.bounds {
            for (i, per_label) in measures.iter().enumerate() {
                let (_, rest_hi) = rests[i].min_max(&lens);
                for (l, expr) in per_label.iter().enumerate() {
                    let (lo, hi) = expr.min_max(&lens);
                    if lo > &self.targets[l] + &self.epsilon {
                        return Some(PruneRule::Overfull);
                    }
                    if hi + &rest_hi < &self.targets[l] - &self.epsilon {
                        return Some(PruneRule::Unreachable);
                    }
                }
            }
        }
        if self.prune.relaxation {
            let mut sys = self.offset_system(cells);
            for (i, per_label) in measures.iter().enumerate() {
                for (l, expr) in per_label.iter().enumerate() {
                    let terms = expr.terms();
                    sys.add(
                        terms.clone(),
                        Relation::Le,
                        &self.targets[l] + &self.epsilon - &expr.constant,
                    );
                    let mut with_rest = expr.clone();
                    with_rest.constant += &rests[i].constant;
                    with_rest.coefs[j - 1] += &rests[i].coefs[j - 1];
                    sys.add(
                        with_rest.terms(),
                        Relation::Ge,
                        &self.targets[l] - &self.epsilon - &with_rest.constant,
                    );
                }
            }
            stats.lp_calls += 1;
            if !sys.solve().is_feasible() {
                return Some(PruneRule::Relaxation);
            }
        }
        None
    }

    fn solve_leaf(&self, cells: &[usize], labels: &[usize], stats: &mut Stats) -> Option<Division> {
        let measures = self.label_measures(cells, labels, true);
        let lens: Vec<&Ratio> = cells.iter().map(|&c| &self.cells[c].len).collect();
        for per_label in &measures {
            for (l, expr) in per_label.iter().enumerate() {
                let (lo, hi) = expr.min_max(&lens);
                if lo > &self.targets[l] + &self.epsilon || hi < &self.targets[l] - &self.epsilon {
                    return None;
                }
            }
        }
        let mut sys = self.offset_system(cells);
        for per_label in &measures {
            for (l, expr) in per_label.iter().enumerate() {
                let terms = expr.terms();
                let target = &self.targets[l] - &expr.constant;
                if self.epsilon.is_zero() {
                    sys.add(terms, Relation::Eq, target);
                } else {
                    sys.add(terms.clone(), Relation::Le, &target + &self.epsilon);
                    sys.add(terms, Relation::Ge, &target - &self.epsilon);
                }
            }
        }
        stats.lp_calls += 1;
        let Feasibility::Feasible(offsets) = sys.solve() else {
            return None;
        };
        let positions: Vec<Ratio> = cells
            .iter()
            .zip(&offsets)
            .map(|(&c, y)| &self.cells[c].start + y)
            .collect();
        let interval = Division {
            cuts: positions,
            labels: labels.to_vec(),
            label_count: self.labels,
            domain: Domain::Interval,
        };
        let division = match self.domain {
            Domain::Interval => interval.canonicalize(),
            Domain::Circle => interval_to_circle(&interval),
        };
        let report = verify(self.inst, &division, &self.spec).expect("solver builds well-formed divisions");
        assert!(
            report.pass,
            "solver produced a division that fails verification: {:?}",
            report.failures
        );
        Some(division)
    }

    fn label_allowed(&self, labels: &[usize], l: usize) -> bool {
        let j = labels.len(); // index of the piece being labeled
        if let Some(&prev) = labels.last() {
            if prev == l {
                return false;
            }
        }
        if self.wrap && j == self.cuts && l != labels[0] {
            return false;
        }
        if self.wrap && j + 1 == self.cuts && l == labels[0] {
            return false;
        }
        if self.symmetric {
            let next = labels.iter().max().map(|m| m + 1).unwrap_or(0);
            if l > next {
                return false;
            }
        }
        true
    }

    fn tasks(&self) -> Vec<Task> {
        let mut out = Vec::new();
        for l0 in 0..self.labels {
            if !self.label_allowed(&[], l0) {
                continue;
            }
            if self.cuts == 0 {
                out.push(Task {
                    first_label: l0,
                    first_cut: None,
                });
                continue;
            }
            for c in 0..self.cells.len() {
                for l1 in 0..self.labels {
                    if self.label_allowed(&[l0], l1) {
                        out.push(Task {
                            first_label: l0,
                            first_cut: Some((c, l1)),
                        });
                    }
                }
            }
        }
        out
    }

    fn run(&self, node_limit: u64, threads: usize) -> LevelOutcome {
        let tasks = self.tasks();
        let best = AtomicUsize::new(usize::MAX);
        let run_task = |idx: usize, task: &Task, limit: u64| -> (TaskResult, Stats) {
            let mut stats = Stats::default();
            if best.load(Ordering::Relaxed) < idx {
                return (TaskResult::Skipped, stats);
            }
            let mut cells = Vec::with_capacity(self.cuts);
            let mut labels = vec![task.first_label];
            if let Some((c, l1)) = task.first_cut {
                cells.push(c);
                labels.push(l1);
            }
            let cancel = || best.load(Ordering::Relaxed) < idx;
            let r = self.dfs(&mut cells, &mut labels, &mut stats, limit, &cancel);
            if let TaskResult::Feasible(_) = r {
                best.fetch_min(idx, Ordering::Relaxed);
            }
            (r, stats)
        };

        let results: Vec<(TaskResult, Stats)> = if threads > 1 && tasks.len() > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool");
            pool.install(|| {
                tasks
                    .par_iter()
                    .enumerate()
                    .map(|(i, t)| run_task(i, t, node_limit))
                    .collect()
            })
        } else {
            // Sequential runs give each task only what is left of the budget;
            // a task that overruns it would overrun the global limit too.
            let mut used = 0u64;
            let mut out = Vec::with_capacity(tasks.len());
            for (i, t) in tasks.iter().enumerate() {
                let r = run_task(i, t, node_limit.saturating_sub(used));
                used += r.1.nodes;
                let stop = !matches!(r.0, TaskResult::Exhausted);
                out.push(r);
                if stop {
                    break;
                }
            }
            out
        };

        // Replay in task order with cumulative accounting so the outcome is
        // the one a single sequential sweep would report.
        let mut nodes = 0u64;
        let mut lp_calls = 0u64;
        for (result, stats) in results {
            nodes += stats.nodes;
            lp_calls += stats.lp_calls;
            let over = nodes > node_limit;
            match result {
                _ if over => {
                    return LevelOutcome {
                        result: LevelResult::LimitHit,
                        nodes: node_limit,
                        lp_calls,
                    }
                }
                TaskResult::Feasible(d) => {
                    return LevelOutcome {
                        result: LevelResult::Feasible(d),
                        nodes,
                        lp_calls,
                    }
                }
                TaskResult::LimitHit => {
                    return LevelOutcome {
                        result: LevelResult::LimitHit,
                        nodes: node_limit,
                        lp_calls,
                    }
                }
                TaskResult::Exhausted => {}
                TaskResult::Skipped => unreachable!("skipped tasks follow a feasible one"),
            }
        }
        LevelOutcome {
            result: LevelResult::Exhausted,
            nodes,
            lp_calls,
        }
    }

    /// Explore the subtree below the partial candidate; the node for the
    /// candidate itself is counted here.
    fn dfs(
        &self,
        cells: &mut Vec<usize>,
        labels: &mut Vec<usize>,
        stats: &mut Stats,
        limit: u64,
        cancel: &dyn Fn() -> bool,
    ) -> TaskResult {
        stats.nodes += 1;
        if stats.nodes > limit {
            return TaskResult::LimitHit;
        }
        let j = cells.len();
        if j == self.cuts {
            return match self.solve_leaf(cells, labels, stats) {
                Some(d) => TaskResult::Feasible(d),
                None => TaskResult::Exhausted,
            };
        }
        if self.check_partial(cells, labels, stats).is_some() {
            return TaskResult::Exhausted;
        }
        if stats.nodes % 256 == 0 && cancel() {
            return TaskResult::Exhausted;
        }
        let from = cells.last().copied().unwrap_or(0);
        for c in from..self.cells.len() {
            for l in 0..self.labels {
                if !self.label_allowed(labels, l) {
                    continue;
                }
                cells.push(c);
                labels.push(l);
                let r = self.dfs(cells, labels, stats, limit, cancel);
                cells.pop();
                labels.pop();
                match r {
                    TaskResult::Exhausted => {}
                    other => return other,
                }
            }
        }
        TaskResult::Exhausted
    }
}

/// Read an interval division as a circle division, joining the last piece
/// to the first through `1 ≡ 0`.
pub fn interval_to_circle(div: &Division) -> Division {
    let canon = Division {
        domain: Domain::Interval,
        ..div.clone()
    }
    .canonicalize();
    let (cuts, labels) = if canon.labels.first() == canon.labels.last() {
        (canon.cuts.clone(), canon.labels[1..].to_vec())
    } else {
        let mut cuts = vec![Ratio::zero()];
        cuts.extend(canon.cuts.iter().cloned());
        (cuts, canon.labels.clone())
    };
    let labels = if cuts.is_empty() { vec![canon.labels[0]] } else { labels };
    Division {
        cuts,
        labels,
        label_count: div.label_count,
        domain: Domain::Circle,
    }
    .canonicalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Agent, ValueBlock};

    fn r(n: i64, d: i64) -> Ratio {
        Ratio::frac(n, d)
    }

    fn uniform(n: usize) -> Instance {
        let agents = (0..n)
            .map(|i| {
                Agent::new(
                    format!("u{i}"),
                    vec![ValueBlock::new(r(0, 1), r(1, 1), r(1, 1)).unwrap()],
                )
            })
            .collect();
        Instance::new(agents, Domain::Interval, Ratio::one()).unwrap()
    }

    #[test]
    fn single_uniform_agent() {
        let inst = uniform(1);
        let cfg = SearchConfig::new(1, TargetSpec::imbalanced(&r(1, 3)).unwrap(), Domain::Interval);
        let cert = solve(&inst, &cfg).unwrap();
        let d = cert.division().unwrap();
        assert_eq!(d.cuts, vec![r(1, 3)]);
        assert_eq!(d.labels, vec![0, 1]);
    }

    #[test]
    fn zero_cuts_infeasible_for_imbalance() {
        let inst = uniform(1);
        let cfg = SearchConfig::new(0, TargetSpec::imbalanced(&r(1, 3)).unwrap(), Domain::Interval);
        assert!(solve(&inst, &cfg).unwrap().is_infeasible());
    }

    #[test]
    fn three_way_uniform() {
        let inst = uniform(1);
        let cfg = SearchConfig::new(2, TargetSpec::uniform(3).unwrap(), Domain::Interval);
        let d = solve(&inst, &cfg).unwrap().division().unwrap().clone();
        assert_eq!(d.cuts, vec![r(1, 3), r(2, 3)]);
    }

    #[test]
    fn circle_halving() {
        let inst = uniform(1).with_domain(Domain::Circle);
        let cfg = SearchConfig::new(2, TargetSpec::uniform(2).unwrap(), Domain::Circle);
        let cert = solve(&inst, &cfg).unwrap();
        assert_eq!(cert.division().unwrap().cut_count(), 2);
    }

    #[test]
    fn parallel_matches_sequential() {
        let inst = Instance::new(
            vec![
                Agent::new("a", vec![ValueBlock::new(r(0, 1), r(1, 2), r(1, 1)).unwrap()]),
                Agent::new(
                    "b",
                    vec![
                        ValueBlock::new(r(1, 4), r(3, 4), r(1, 2)).unwrap(),
                        ValueBlock::new(r(3, 4), r(1, 1), r(1, 2)).unwrap(),
                    ],
                ),
            ],
            Domain::Interval,
            Ratio::one(),
        )
        .unwrap();
        let cfg = SearchConfig::new(3, TargetSpec::imbalanced(&r(2, 5)).unwrap(), Domain::Interval);
        let seq = solve(&inst, &cfg).unwrap();
        let par = solve(&inst, &cfg.clone().with_threads(4)).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn levels_cover_budget() {
        assert_eq!(levels_for_budget(0, Domain::Interval, 2), vec![0]);
        assert_eq!(levels_for_budget(3, Domain::Interval, 2), vec![2, 3]);
        assert_eq!(levels_for_budget(3, Domain::Circle, 2), vec![2]);
        assert_eq!(levels_for_budget(1, Domain::Circle, 3), vec![0]);
        assert_eq!(levels_for_budget(3, Domain::Circle, 3), vec![2, 3]);
    }
}
