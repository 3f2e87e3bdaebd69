//! Constructive upper-bound pipelines.
//!
//! Every pipeline works with a positive set on the circle `[0, 1)` and
//! refines it by running a consensus `k`-division on the cake obtained by
//! gluing the positive arcs end to end. The arc count of the kept label
//! classes is what the cut bounds are about; the final set is read off as an
//! interval division with label `0` for "+" and `1` for "-".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractions::{
    case2_chain, nearest_qp_ratio, qp_factor, qstar_member, upper_bound_cuts, QpApproximation, QpRule,
};
use crate::measures::{verify, Agent, Division, Domain, Instance, TargetSpec, ValueBlock, VerificationReport};
use crate::ratio::Ratio;
use crate::solver::{search_exact, LevelResult, SearchConfig, DEFAULT_NODE_LIMIT};

/// Limits passed to every sub-solver call.
#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub node_limit: u64,
    pub threads: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            node_limit: DEFAULT_NODE_LIMIT,
            threads: 0,
        }
    }
}

/// A closed subset of `[0, 1]` kept as sorted, disjoint, non-touching parts.
/// Read on the circle, a part ending at `1` and one starting at `0` form a
/// single arc.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcSet {
    pub parts: Vec<(Ratio, Ratio)>,
}

impl ArcSet {
    pub fn empty() -> Self {
        ArcSet { parts: Vec::new() }
    }

    pub fn full() -> Self {
        ArcSet {
            parts: vec![(Ratio::zero(), Ratio::one())],
        }
    }

    pub fn from_parts(mut parts: Vec<(Ratio, Ratio)>) -> Self {
        parts.retain(|(a, b)| a < b);
        parts.sort();
        let mut merged: Vec<(Ratio, Ratio)> = Vec::with_capacity(parts.len());
        for (a, b) in parts {
            match merged.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        ArcSet { parts: merged }
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.parts.len() == 1 && self.parts[0].0.is_zero() && self.parts[0].1.is_one()
    }

    pub fn length(&self) -> Ratio {
        self.parts.iter().map(|(a, b)| b - a).sum()
    }

    pub fn complement(&self) -> ArcSet {
        let mut out = Vec::new();
        let mut cursor = Ratio::zero();
        for (a, b) in &self.parts {
            if *a > cursor {
                out.push((cursor.clone(), a.clone()));
            }
            cursor = b.clone();
        }
        if cursor < Ratio::one() {
            out.push((cursor, Ratio::one()));
        }
        ArcSet { parts: out }
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        ArcSet::from_parts(self.parts.iter().chain(&other.parts).cloned().collect())
    }

    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut out = Vec::new();
        for (a, b) in &self.parts {
            for (c, d) in &other.parts {
                let lo = Ratio::max_of(a, c);
                let hi = Ratio::min_of(b, d);
                if lo < hi {
                    out.push((lo, hi));
                }
            }
        }
        ArcSet::from_parts(out)
    }

    /// Arcs on the circle, each as one or two parts in traversal order. The
    /// arc through `0` comes last, starting with its part that ends at `1`.
    pub fn arcs(&self) -> Vec<Vec<(Ratio, Ratio)>> {
        let n = self.parts.len();
        let wraps = n >= 2 && self.parts[0].0.is_zero() && self.parts[n - 1].1.is_one();
        if !wraps {
            return self.parts.iter().map(|p| vec![p.clone()]).collect();
        }
        let mut out: Vec<Vec<(Ratio, Ratio)>> = self.parts[1..n - 1].iter().map(|p| vec![p.clone()]).collect();
        out.push(vec![self.parts[n - 1].clone(), self.parts[0].clone()]);
        out
    }

    pub fn arc_count(&self) -> usize {
        self.arcs().len()
    }

    /// Cuts needed on the circle: two per arc unless the set is empty or full.
    pub fn circle_cuts(&self) -> usize {
        if self.is_empty() || self.is_full() {
            0
        } else {
            2 * self.arc_count()
        }
    }

    /// Boundary points strictly inside `(0, 1)`.
    pub fn interval_cuts(&self) -> usize {
        self.parts
            .iter()
            .map(|(a, b)| usize::from(a.is_positive()) + usize::from(*b < Ratio::one()))
            .sum()
    }

    pub fn measure(&self, agent: &Agent) -> Ratio {
        agent.measure_of(&self.parts).expect("parts are disjoint")
    }

    /// Interval division with label `0` on the set and `1` elsewhere.
    pub fn to_division(&self) -> Division {
        let mut cuts = Vec::new();
        for (a, b) in &self.parts {
            if a.is_positive() {
                cuts.push(a.clone());
            }
            if *b < Ratio::one() {
                cuts.push(b.clone());
            }
        }
        let first = if self.parts.first().is_some_and(|p| p.0.is_zero()) { 0 } else { 1 };
        let labels = (0..=cuts.len()).map(|i| (first + i) % 2).collect();
        Division::new(cuts, labels, 2, Domain::Interval).expect("alternating labels")
    }
}

/// The agents' measures restricted to `set`, glued end to end and rescaled
/// to a unit interval. Returns the glued cake together with the map back.
struct Glued {
    instance: Instance,
    /// `(original start, original end, offset in the glued cake)`
    segments: Vec<(Ratio, Ratio, Ratio)>,
    length: Ratio,
}

impl Glued {
    fn new(inst: &Instance, set: &ArcSet) -> Result<Glued> {
        let mut segments = Vec::new();
        let mut offset = Ratio::zero();
        for arc in set.arcs() {
            for (a, b) in arc {
                let len = &b - &a;
                segments.push((a, b, offset.clone()));
                offset += len;
            }
        }
        let length = offset;
        let mut agents = Vec::with_capacity(inst.agents.len());
        for agent in &inst.agents {
            let mut blocks = Vec::new();
            for (s, e, off) in &segments {
                for blk in &agent.blocks {
                    let lo = Ratio::max_of(s, &blk.start);
                    let hi = Ratio::min_of(e, &blk.end);
                    if lo < hi {
                        blocks.push(ValueBlock {
                            weight: blk.measure_of(&lo, &hi),
                            start: off + &(&lo - s),
                            end: off + &(&hi - s),
                        });
                    }
                }
            }
            if blocks.is_empty() {
                return Err(Error::ZeroWeightAgent(agent.name.clone()));
            }
            agents.push(Agent::new(agent.name.clone(), blocks));
        }
        let instance = Instance::new(agents, Domain::Interval, length.clone())?.normalize()?;
        Ok(Glued {
            instance,
            segments,
            length,
        })
    }

    /// Original parts covered by the glued interval `[u0, u1]` (unit scale).
    fn map_back(&self, u0: &Ratio, u1: &Ratio) -> Vec<(Ratio, Ratio)> {
        let v0 = u0 * &self.length;
        let v1 = u1 * &self.length;
        let mut out = Vec::new();
        for (s, e, off) in &self.segments {
            let end_off = off + &(e - s);
            let lo = Ratio::max_of(&v0, off);
            let hi = Ratio::min_of(&v1, &end_off);
            if lo < hi {
                out.push((s + &(&lo - off), s + &(&hi - off)));
            }
        }
        out
    }
}

/// Consensus `k`-division of the glued cake with at most `budget` cuts.
/// Returns the label classes mapped back to `[0, 1]` and the cut count used.
fn split_set(
    inst: &Instance,
    set: &ArcSet,
    k: usize,
    budget: usize,
    opts: &PipelineOptions,
    stage: &str,
) -> Result<(Vec<ArcSet>, usize)> {
    let glued = Glued::new(inst, set)?;
    let targets = TargetSpec::uniform(k)?;
    let cfg = SearchConfig::new(budget, targets, Domain::Interval)
        .with_node_limit(opts.node_limit)
        .with_threads(opts.threads);
    // The exact count `budget` also reaches `budget - 2`, `budget - 4`, ...;
    // the other parity is only tried when that search is exhausted.
    let mut levels = vec![budget];
    if budget > 0 {
        levels.push(budget - 1);
    }
    let mut found = None;
    for t in levels {
        match search_exact(&glued.instance, &cfg, t, opts.node_limit)?.result {
            LevelResult::Feasible(div) => {
                found = Some(div);
                break;
            }
            LevelResult::Exhausted => {}
            LevelResult::LimitHit => {
                return Err(Error::Inconclusive {
                    stage: stage.to_string(),
                    bound: Some(budget as u64),
                    partial: None,
                })
            }
        }
    }
    let div = found.ok_or_else(|| Error::SubProblemInfeasible(stage.to_string()))?;
    let mut classes = vec![Vec::new(); k];
    for piece in div.pieces() {
        for (a, b) in &piece.parts {
            classes[piece.label].extend(glued.map_back(a, b));
        }
    }
    let classes = classes.into_iter().map(ArcSet::from_parts).collect();
    Ok((classes, div.cut_count()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceStep {
    /// What the step does, e.g. `split 3, keep 1`.
    pub operation: String,
    /// Ratio the positive set carries after the step.
    pub ratio: Ratio,
    /// Number of labels in the sub-division (`1` for a bare complement).
    pub labels: usize,
    pub cuts_added: usize,
    pub arcs_before: usize,
    /// Arc count of each label class of the sub-division.
    pub label_arcs: Vec<usize>,
    pub kept: Vec<usize>,
    pub complemented: bool,
    pub arcs_after: usize,
    /// `kept / labels * (arcs_before + cuts_added)`, which the kept classes
    /// may not exceed.
    pub averaging_bound: Ratio,
    pub averaging_holds: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub target: Ratio,
    pub agents: usize,
    pub steps: Vec<TraceStep>,
    pub final_arcs: usize,
    pub circle_cuts: usize,
    pub total_cuts: usize,
    /// Cut bound the construction claims, when one applies.
    pub bound_claimed: Option<u64>,
    pub within_bound: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineResult {
    /// Interval division; label `0` is "+", label `1` is "-".
    pub division: Division,
    pub positive: ArcSet,
    pub report: VerificationReport,
    pub trace: PipelineTrace,
}

/// Working state shared by the pipelines.
struct Run<'a> {
    inst: &'a Instance,
    opts: &'a PipelineOptions,
    set: ArcSet,
    ratio: Ratio,
    trace: PipelineTrace,
}

impl<'a> Run<'a> {
    fn new(inst: &'a Instance, opts: &'a PipelineOptions, target: &Ratio, root: &Ratio) -> Self {
        let set = if root.is_zero() { ArcSet::empty() } else { ArcSet::full() };
        Run {
            inst,
            opts,
            set,
            ratio: root.clone(),
            trace: PipelineTrace {
                target: target.clone(),
                agents: inst.agent_count(),
                ..PipelineTrace::default()
            },
        }
    }

    /// Split the positive set into `k` classes with at most `(k-1)n` cuts,
    /// keep the `keep` classes with the fewest arcs, then optionally take the
    /// complement. `ratio` is what the positive set carries afterwards.
    fn step(&mut self, k: usize, keep: usize, complement: bool, ratio: Ratio) -> Result<()> {
        let arcs_before = self.set.arc_count();
        let budget = (k - 1) * self.inst.agent_count();
        let stage = format!("split {k} towards {ratio}");
        let (classes, cuts) = match split_set(self.inst, &self.set, k, budget, self.opts, &stage) {
            Err(Error::Inconclusive { stage, bound, .. }) => {
                return Err(Error::Inconclusive {
                    stage,
                    bound,
                    partial: Some(Box::new(self.trace.clone())),
                })
            }
            other => other?,
        };
        let label_arcs: Vec<usize> = classes.iter().map(ArcSet::arc_count).collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| (label_arcs[i], i));
        let mut kept: Vec<usize> = order[..keep].to_vec();
        kept.sort_unstable();
        let mut next = ArcSet::empty();
        for &i in &kept {
            next = next.union(&classes[i]);
        }
        let kept_arcs: usize = kept.iter().map(|&i| label_arcs[i]).sum();
        let averaging_bound = Ratio::frac(keep as i64, k as i64) * Ratio::int((arcs_before + cuts) as i64);
        let averaging_holds = Ratio::int(kept_arcs as i64) <= averaging_bound;
        if complement {
            next = next.complement();
        }
        self.set = next;
        self.ratio = ratio.clone();
        self.trace.steps.push(TraceStep {
            operation: format!("split {k}, keep {keep}"),
            ratio,
            labels: k,
            cuts_added: cuts,
            arcs_before,
            label_arcs,
            kept,
            complemented: complement,
            arcs_after: self.set.arc_count(),
            averaging_bound,
            averaging_holds,
        });
        Ok(())
    }

    fn complement(&mut self, ratio: Ratio) {
        let arcs_before = self.set.arc_count();
        self.set = self.set.complement();
        self.ratio = ratio.clone();
        self.trace.steps.push(TraceStep {
            operation: "complement".into(),
            ratio,
            labels: 1,
            cuts_added: 0,
            arcs_before,
            label_arcs: Vec::new(),
            kept: Vec::new(),
            complemented: true,
            arcs_after: self.set.arc_count(),
            averaging_bound: Ratio::int(arcs_before as i64),
            averaging_holds: true,
        });
    }

    /// Verify the positive set against `target` exactly and close the trace.
    fn finish(mut self, target: &Ratio, bound: Option<u64>) -> Result<PipelineResult> {
        let division = self.set.to_division();
        let report = verify(self.inst, &division, &TargetSpec::imbalanced(target)?)?;
        if !report.pass {
            return Err(Error::NotASolution(format!(
                "pipeline output misses {target} by {}",
                report.worst_deviation
            )));
        }
        self.trace.final_arcs = self.set.arc_count();
        self.trace.circle_cuts = self.set.circle_cuts();
        self.trace.total_cuts = division.cut_count();
        self.trace.bound_claimed = bound;
        self.trace.within_bound = bound.map_or(true, |b| division.cut_count() as u64 <= b);
        Ok(PipelineResult {
            division,
            positive: self.set,
            report,
            trace: self.trace,
        })
    }
}

fn checked(inst: &Instance, alpha: &Ratio) -> Result<()> {
    if !alpha.is_unit() {
        return Err(Error::OutOfUnitRange(alpha.clone()));
    }
    if !inst.is_normalized() {
        return Err(Error::InvalidArgument("pipelines need a normalized instance".into()));
    }
    Ok(())
}

fn prime_usize(p: u64) -> Result<usize> {
    usize::try_from(p).map_err(|_| Error::InvalidArgument(format!("{p} labels is too many")))
}

/// Exact `alpha`-division following the upper-bound construction: the `Q*`
/// generating chain when `alpha` is a member, otherwise the remainder chain
/// down to a member followed by complement-and-split steps back up.
pub fn upper_bound_solve(inst: &Instance, alpha: &Ratio, opts: &PipelineOptions) -> Result<PipelineResult> {
    checked(inst, alpha)?;
    let n = inst.agent_count() as u64;
    let bound = upper_bound_cuts(alpha, n)?;
    if alpha.is_zero() || alpha.is_one() {
        return Run::new(inst, opts, alpha, alpha).finish(alpha, Some(bound.value));
    }
    let (member, chain) = match qstar_member(alpha) {
        Some(_) => (alpha.clone(), None),
        None => {
            let chain = case2_chain(alpha)?;
            (chain.last().clone(), Some(chain))
        }
    };
    let witness = qstar_member(&member).expect("chain ends in Q*");
    let mut run = Run::new(inst, opts, alpha, &witness.root);
    for step in &witness.steps {
        run.step(prime_usize(step.prime)?, 1, step.complement, step.to.clone())?;
    }
    if let Some(chain) = chain {
        run.trace
            .notes
            .push(format!("remainder chain {:?} with divisors {:?}", chain.ratios, chain.divisors));
        for i in (0..chain.divisors.len()).rev() {
            let d = prime_usize(chain.divisors[i])?;
            let target = chain.ratios[i].clone();
            let complement = Ratio::int(d as i64) * &target;
            run.complement(complement);
            if d > 1 {
                run.step(d, 1, false, target)?;
            }
        }
    }
    run.finish(alpha, Some(bound.value))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MoreCutsResult {
    pub approximation: QpApproximation,
    pub result: PipelineResult,
    /// `2(p-1) ceil(p/2) / floor(p/2) * n`, rounded down.
    pub bound: u64,
}

/// `2(p-1) ceil(p/2) / floor(p/2) * n`, rounded down.
pub fn more_cuts_bound(p: u64, n: u64) -> u64 {
    let v = Ratio::frac(2 * (p as i64 - 1) * p.div_ceil(2) as i64, (p / 2) as i64) * Ratio::int(n as i64);
    v.floor().try_into().unwrap_or(u64::MAX)
}

/// Approximate `alpha`-division through the `Q_p` ladder: snap `alpha` to the
/// nearest ladder member within `accuracy` and replay its generation chain,
/// each step splitting into `p` classes and keeping the `ceil(p/2)` with the
/// fewest arcs.
pub fn more_cuts_solve(
    inst: &Instance,
    alpha: &Ratio,
    p: u64,
    accuracy: &Ratio,
    opts: &PipelineOptions,
) -> Result<MoreCutsResult> {
    checked(inst, alpha)?;
    let approximation = nearest_qp_ratio(alpha, p, accuracy)?;
    let n = inst.agent_count() as u64;
    let bound = more_cuts_bound(p, n);
    let k = prime_usize(p)?;
    let keep = k.div_ceil(2);
    let root = approximation
        .chain
        .first()
        .map(|s| s.from.clone())
        .unwrap_or_else(|| approximation.ratio.clone());
    let mut run = Run::new(inst, opts, alpha, &root);
    run.trace.notes.push(format!(
        "snapped {alpha} to {} at level {} (factor {})",
        approximation.ratio,
        approximation.level,
        qp_factor(p)
    ));
    for step in &approximation.chain {
        run.step(k, keep, step.rule == QpRule::ComplementScale, step.to.clone())?;
    }
    let result = run.finish(&approximation.ratio, Some(bound))?;
    Ok(MoreCutsResult {
        approximation,
        result,
        bound,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CarvingResult {
    /// Interval division with labels `0..k`.
    pub division: Division,
    /// Sum of the snapping errors; every label lies within it of `1/k`.
    pub tolerance: Ratio,
    pub approximations: Vec<QpApproximation>,
    pub traces: Vec<PipelineTrace>,
    pub report: VerificationReport,
    /// `2(k-1)(p-1) ceil(p/2) / floor(p/2) * n`, rounded down.
    pub bound: u64,
}

/// Clip every agent to `region` and rescale its weight to 1.
fn restrict(inst: &Instance, region: &ArcSet) -> Result<Instance> {
    let mut agents = Vec::with_capacity(inst.agents.len());
    for agent in &inst.agents {
        let mut blocks = Vec::new();
        for blk in &agent.blocks {
            for (a, b) in &region.parts {
                let lo = Ratio::max_of(a, &blk.start);
                let hi = Ratio::min_of(b, &blk.end);
                if lo < hi {
                    blocks.push(ValueBlock {
                        weight: blk.measure_of(&lo, &hi),
                        start: lo,
                        end: hi,
                    });
                }
            }
        }
        if blocks.is_empty() {
            return Err(Error::ZeroWeightAgent(agent.name.clone()));
        }
        agents.push(Agent::new(agent.name.clone(), blocks));
    }
    Instance::new(agents, Domain::Interval, Ratio::one())?.normalize()
}

/// Approximate consensus `k`-division: carve off labels one at a time, the
/// `i`-th as a `1/(k-i+1)`-division of what is left, each through
/// [`more_cuts_solve`]. The last label takes the remainder.
pub fn ckd_via_carving(
    inst: &Instance,
    k: usize,
    p: u64,
    accuracy: &Ratio,
    opts: &PipelineOptions,
) -> Result<CarvingResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    checked(inst, &Ratio::zero())?;
    let n = inst.agent_count() as u64;
    let mut left = ArcSet::full();
    let mut classes = Vec::with_capacity(k);
    let mut approximations = Vec::new();
    let mut traces = Vec::new();
    let mut tolerance = Ratio::zero();
    for i in 1..k {
        let ratio = Ratio::frac(1, (k - i + 1) as i64);
        let sub = restrict(inst, &left)?;
        let out = more_cuts_solve(&sub, &ratio, p, accuracy, opts)?;
        tolerance += out.approximation.error();
        let carved = out.result.positive.intersect(&left);
        left = left.intersect(&carved.complement());
        classes.push(carved);
        approximations.push(out.approximation);
        traces.push(out.result.trace);
    }
    classes.push(left);
    let mut parts: Vec<(Ratio, Ratio, usize)> = Vec::new();
    for (label, class) in classes.iter().enumerate() {
        for (a, b) in &class.parts {
            parts.push((a.clone(), b.clone(), label));
        }
    }
    parts.sort();
    let mut cuts = Vec::new();
    let mut labels = Vec::new();
    for (idx, (a, _, label)) in parts.iter().enumerate() {
        if idx > 0 {
            cuts.push(a.clone());
        }
        labels.push(*label);
    }
    let division = Division::new(cuts, labels, k, Domain::Interval)?.canonicalize();
    let spec = TargetSpec::uniform(k)?.with_epsilon(tolerance.clone());
    let report = verify(inst, &division, &spec)?;
    let bound = more_cuts_bound(p, n).saturating_mul(k as u64 - 1);
    Ok(CarvingResult {
        division,
        tolerance,
        approximations,
        traces,
        report,
        bound,
    })
}

/// Exact consensus `k`-division with at most `budget` cuts on the instance's
/// own domain, through the exhaustive solver.
pub fn ckd_solve(inst: &Instance, k: usize, budget: usize, opts: &PipelineOptions) -> Result<Division> {
    let cfg = SearchConfig::new(budget, TargetSpec::uniform(k)?, inst.domain)
        .with_node_limit(opts.node_limit)
        .with_threads(opts.threads);
    let cert = crate::solver::solve(inst, &cfg)?;
    if cert.is_inconclusive() {
        return Err(Error::Inconclusive {
            stage: format!("consensus {k}-division"),
            bound: Some(budget as u64),
            partial: None,
        });
    }
    cert.division()
        .cloned()
        .ok_or_else(|| Error::SubProblemInfeasible(format!("consensus {k}-division with {budget} cuts")))
}
