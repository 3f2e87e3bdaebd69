//! Piecewise-constant measures on an interval or circle, divisions of the
//! domain into labeled pieces, and exact verification of a division against
//! per-label targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// An interval on which an agent's density is constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueBlock {
    pub start: Ratio,
    pub end: Ratio,
    /// Total measure of the block.
    pub weight: Ratio,
}

impl ValueBlock {
    pub fn new(start: Ratio, end: Ratio, weight: Ratio) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidBlock(format!("empty block [{start}, {end}]")));
        }
        if !weight.is_positive() {
            return Err(Error::InvalidBlock(format!(
                "block [{start}, {end}] has non-positive weight {weight}"
            )));
        }
        Ok(ValueBlock { start, end, weight })
    }

    pub fn len(&self) -> Ratio {
        &self.end - &self.start
    }

    pub fn density(&self) -> Ratio {
        &self.weight / self.len()
    }

    /// Measure of `[lo, hi]` under this block alone.
    pub fn measure_of(&self, lo: &Ratio, hi: &Ratio) -> Ratio {
        let a = Ratio::max_of(lo, &self.start);
        let b = Ratio::min_of(hi, &self.end);
        if a >= b {
            Ratio::zero()
        } else {
            self.density() * (b - a)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub name: String,
    pub blocks: Vec<ValueBlock>,
}

impl Agent {
    pub fn new(name: impl Into<String>, blocks: Vec<ValueBlock>) -> Self {
        Agent {
            name: name.into(),
            blocks,
        }
    }

    pub fn total(&self) -> Ratio {
        self.blocks.iter().map(|b| &b.weight).sum()
    }

    /// Density at a point strictly inside a cell (blocks are closed intervals
    /// that may touch; a midpoint never sits on a boundary of a refinement cell).
    pub fn density_at(&self, x: &Ratio) -> Ratio {
        self.blocks
            .iter()
            .find(|b| &b.start <= x && x < &b.end)
            .map(|b| b.density())
            .unwrap_or_else(Ratio::zero)
    }

    /// Exact measure of a union of pieces, rejecting overlapping pieces.
    pub fn measure_of(&self, pieces: &[(Ratio, Ratio)]) -> Result<Ratio> {
        let mut sorted: Vec<&(Ratio, Ratio)> = pieces.iter().collect();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::OverlappingPieces(
                    w[0].0.clone(),
                    w[0].1.clone(),
                    w[1].0.clone(),
                    w[1].1.clone(),
                ));
            }
        }
        Ok(pieces
            .iter()
            .flat_map(|(lo, hi)| self.blocks.iter().map(move |b| b.measure_of(lo, hi)))
            .sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Interval,
    Circle,
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(Domain::Interval),
            "circle" => Ok(Domain::Circle),
            other => Err(Error::Parse(format!("unknown domain {other:?}"))),
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Domain::Interval => "interval",
            Domain::Circle => "circle",
        })
    }
}

/// Agents over the domain `[0, extent]`; normalized instances have extent 1
/// and unit total weight per agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub agents: Vec<Agent>,
    pub domain: Domain,
    pub extent: Ratio,
    /// Coordinate span before normalization.
    pub raw_extent: Ratio,
}

impl Instance {
    /// Validates and sorts each agent's blocks.
    pub fn new(mut agents: Vec<Agent>, domain: Domain, extent: Ratio) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::InvalidArgument("an instance needs at least one agent".into()));
        }
        if !extent.is_positive() {
            return Err(Error::InvalidArgument(format!("extent {extent} must be positive")));
        }
        for agent in &mut agents {
            agent.blocks.sort_by(|a, b| a.start.cmp(&b.start));
            for b in &agent.blocks {
                if b.start >= b.end || !b.weight.is_positive() {
                    return Err(Error::InvalidBlock(format!(
                        "agent {:?}: block [{}, {}] weight {}",
                        agent.name, b.start, b.end, b.weight
                    )));
                }
                if b.start.is_negative() || b.end > extent {
                    return Err(Error::InvalidBlock(format!(
                        "agent {:?}: block [{}, {}] leaves [0, {extent}]",
                        agent.name, b.start, b.end
                    )));
                }
            }
            for w in agent.blocks.windows(2) {
                if w[1].start < w[0].end {
                    return Err(Error::InvalidBlock(format!(
                        "agent {:?}: blocks [{}, {}] and [{}, {}] overlap",
                        agent.name, w[0].start, w[0].end, w[1].start, w[1].end
                    )));
                }
            }
        }
        Ok(Instance {
            agents,
            domain,
            raw_extent: extent.clone(),
            extent,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.extent.is_one() && self.agents.iter().all(|a| a.total().is_one())
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// Rescale coordinates onto `[0, 1]` and every agent's weights to sum 1.
    pub fn normalize(&self) -> Result<Instance> {
        let scale = self.extent.recip();
        let mut agents = Vec::with_capacity(self.agents.len());
        for agent in &self.agents {
            let total = agent.total();
            if !total.is_positive() {
                return Err(Error::ZeroWeightAgent(agent.name.clone()));
            }
            let blocks = agent
                .blocks
                .iter()
                .map(|b| ValueBlock {
                    start: &b.start * &scale,
                    end: &b.end * &scale,
                    weight: &b.weight / &total,
                })
                .collect();
            agents.push(Agent::new(agent.name.clone(), blocks));
        }
        Ok(Instance {
            agents,
            domain: self.domain,
            extent: Ratio::one(),
            raw_extent: self.raw_extent.clone(),
        })
    }

    /// All block boundaries plus the domain ends, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<Ratio> {
        let mut pts: Vec<Ratio> = vec![Ratio::zero(), self.extent.clone()];
        for a in &self.agents {
            for b in &a.blocks {
                pts.push(b.start.clone());
                pts.push(b.end.clone());
            }
        }
        pts.sort();
        pts.dedup();
        pts
    }
}

/// A maximal interval on which every agent's density is constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub start: Ratio,
    pub end: Ratio,
    /// One density per agent.
    pub densities: Vec<Ratio>,
}

impl Cell {
    pub fn len(&self) -> Ratio {
        &self.end - &self.start
    }

    pub fn is_empty(&self) -> bool {
        self.densities.iter().all(|d| d.is_zero())
    }

    /// Mass of agent `i` inside the cell.
    pub fn mass(&self, i: usize) -> Ratio {
        &self.densities[i] * self.len()
    }
}

/// Common refinement of all agents' breakpoints. Consecutive cells always
/// differ in at least one density.
pub fn refine_cells(inst: &Instance) -> Vec<Cell> {
    let pts = inst.breakpoints();
    let two = Ratio::int(2);
    let mut cells: Vec<Cell> = Vec::new();
    for w in pts.windows(2) {
        let mid = (&w[0] + &w[1]) / &two;
        let densities: Vec<Ratio> = inst.agents.iter().map(|a| a.density_at(&mid)).collect();
        match cells.last_mut() {
            Some(last) if last.densities == densities => last.end = w[1].clone(),
            _ => cells.push(Cell {
                start: w[0].clone(),
                end: w[1].clone(),
                densities,
            }),
        }
    }
    cells
}

/// Labeled pieces of the domain `[0, 1]`.
///
/// On the interval there are `cuts + 1` pieces, piece `i` running from cut
/// `i - 1` to cut `i`. On the circle piece `i` runs from cut `i` to cut
/// `i + 1`, the last piece wrapping through `1 ≡ 0`; a circle with no cuts
/// is a single piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Division {
    pub cuts: Vec<Ratio>,
    pub labels: Vec<usize>,
    pub label_count: usize,
    pub domain: Domain,
}

/// A piece as one or two intervals (two when it wraps on the circle).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub label: usize,
    pub parts: Vec<(Ratio, Ratio)>,
}

impl Piece {
    pub fn len(&self) -> Ratio {
        self.parts.iter().map(|(a, b)| b - a).sum()
    }
}

impl Division {
    pub fn new(cuts: Vec<Ratio>, labels: Vec<usize>, label_count: usize, domain: Domain) -> Result<Self> {
        let d = Division {
            cuts,
            labels,
            label_count,
            domain,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedDivision(m));
        if self.label_count < 1 {
            return bad("label count must be positive".into());
        }
        for w in self.cuts.windows(2) {
            if w[1] < w[0] {
                return bad(format!("cuts not sorted: {} after {}", w[1], w[0]));
            }
        }
        for c in &self.cuts {
            let inside = match self.domain {
                Domain::Interval => c.is_unit(),
                Domain::Circle => c.is_unit() && !c.is_one(),
            };
            if !inside {
                return bad(format!("cut {c} lies outside the domain"));
            }
        }
        let expected = self.piece_count();
        if self.labels.len() != expected {
            return bad(format!(
                "{} labels for {} pieces",
                self.labels.len(),
                expected
            ));
        }
        if let Some(l) = self.labels.iter().find(|&&l| l >= self.label_count) {
            return bad(format!("label {l} out of range for {} labels", self.label_count));
        }
        Ok(())
    }

    pub fn piece_count(&self) -> usize {
        match self.domain {
            Domain::Interval => self.cuts.len() + 1,
            Domain::Circle => self.cuts.len().max(1),
        }
    }

    pub fn cut_count(&self) -> usize {
        self.cuts.len()
    }

    pub fn pieces(&self) -> Vec<Piece> {
        let zero = Ratio::zero();
        let one = Ratio::one();
        match self.domain {
            Domain::Interval => {
                let mut bounds = Vec::with_capacity(self.cuts.len() + 2);
                bounds.push(&zero);
                bounds.extend(self.cuts.iter());
                bounds.push(&one);
                bounds
                    .windows(2)
                    .zip(&self.labels)
                    .map(|(w, &label)| Piece {
                        label,
                        parts: vec![(w[0].clone(), w[1].clone())],
                    })
                    .collect()
            }
            Domain::Circle => {
                let c = self.cuts.len();
                if c == 0 {
                    return vec![Piece {
                        label: self.labels[0],
                        parts: vec![(zero, one)],
                    }];
                }
                let mut out = Vec::with_capacity(c);
                for i in 0..c - 1 {
                    out.push(Piece {
                        label: self.labels[i],
                        parts: vec![(self.cuts[i].clone(), self.cuts[i + 1].clone())],
                    });
                }
                let mut parts = vec![(self.cuts[c - 1].clone(), one)];
                if !self.cuts[0].is_zero() {
                    parts.push((zero, self.cuts[0].clone()));
                }
                out.push(Piece {
                    label: self.labels[c - 1],
                    parts,
                });
                out
            }
        }
    }

    /// Intervals carrying `label`, in coordinate order, with touching
    /// intervals merged.
    pub fn label_set(&self, label: usize) -> Vec<(Ratio, Ratio)> {
        let mut parts: Vec<(Ratio, Ratio)> = self
            .pieces()
            .into_iter()
            .filter(|p| p.label == label)
            .flat_map(|p| p.parts)
            .filter(|(a, b)| a < b)
            .collect();
        parts.sort();
        let mut merged: Vec<(Ratio, Ratio)> = Vec::new();
        for (a, b) in parts {
            match merged.last_mut() {
                Some(last) if last.1 >= a => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        merged
    }

    /// Drop zero-length pieces and merge neighbours that share a label. On the
    /// circle the first and last pieces are neighbours too.
    pub fn canonicalize(&self) -> Division {
        match self.domain {
            Domain::Interval => {
                let pieces = self.pieces();
                let mut kept: Vec<(Ratio, Ratio, usize)> = Vec::new();
                for p in pieces {
                    let (a, b) = p.parts[0].clone();
                    if a == b {
                        continue;
                    }
                    match kept.last_mut() {
                        Some(last) if last.2 == p.label => last.1 = b,
                        _ => kept.push((a, b, p.label)),
                    }
                }
                if kept.is_empty() {
                    // the domain has positive length, so this cannot happen
                    return self.clone();
                }
                Division {
                    cuts: kept.iter().skip(1).map(|(a, _, _)| a.clone()).collect(),
                    labels: kept.iter().map(|p| p.2).collect(),
                    label_count: self.label_count,
                    domain: Domain::Interval,
                }
            }
            Domain::Circle => {
                let c = self.cuts.len();
                if c <= 1 {
                    return Division {
                        cuts: vec![],
                        labels: vec![self.labels[0]],
                        label_count: self.label_count,
                        domain: Domain::Circle,
                    };
                }
                // piece i starts at cut i
                let mut starts: Vec<(Ratio, usize)> = Vec::new();
                for i in 0..c {
                    let end = if i + 1 < c {
                        self.cuts[i + 1].clone()
                    } else {
                        &self.cuts[0] + Ratio::one()
                    };
                    if self.cuts[i] == end {
                        continue;
                    }
                    starts.push((self.cuts[i].clone(), self.labels[i]));
                }
                let mut merged: Vec<(Ratio, usize)> = Vec::new();
                for (s, l) in starts {
                    match merged.last() {
                        Some(last) if last.1 == l => {}
                        _ => merged.push((s, l)),
                    }
                }
                while merged.len() > 1 && merged.first().unwrap().1 == merged.last().unwrap().1 {
                    merged.remove(0);
                }
                if merged.len() <= 1 {
                    let label = merged.first().map(|m| m.1).unwrap_or(self.labels[0]);
                    return Division {
                        cuts: vec![],
                        labels: vec![label],
                        label_count: self.label_count,
                        domain: Domain::Circle,
                    };
                }
                Division {
                    cuts: merged.iter().map(|m| m.0.clone()).collect(),
                    labels: merged.iter().map(|m| m.1).collect(),
                    label_count: self.label_count,
                    domain: Domain::Circle,
                }
            }
        }
    }

    /// Maximal arcs per label on the circle (or maximal intervals on the
    /// interval) after canonicalization.
    pub fn components_of(&self, label: usize) -> usize {
        let canon = self.canonicalize();
        canon.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Unroll a circle division at coordinate 0. The cut at 0, if any, becomes
/// the left end of the interval; otherwise the piece through 0 is split in
/// two pieces of the same label.
pub fn circle_to_interval(div: &Division) -> Division {
    if div.domain == Domain::Interval {
        return div.clone();
    }
    let pieces = div.pieces();
    let mut parts: Vec<(Ratio, Ratio, usize)> = pieces
        .into_iter()
        .flat_map(|p| {
            let l = p.label;
            p.parts.into_iter().map(move |(a, b)| (a, b, l))
        })
        .collect();
    parts.sort();
    Division {
        cuts: parts.iter().skip(1).map(|p| p.0.clone()).collect(),
        labels: parts.iter().map(|p| p.2).collect(),
        label_count: div.label_count,
        domain: Domain::Interval,
    }
}

/// Per-label target fractions and a tolerance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub targets: Vec<Ratio>,
    pub epsilon: Ratio,
}

impl TargetSpec {
    pub fn new(targets: Vec<Ratio>, epsilon: Ratio) -> Result<Self> {
        if targets.len() < 2 {
            return Err(Error::InvalidArgument("at least two labels are required".into()));
        }
        if targets.iter().any(|t| t.is_negative()) {
            return Err(Error::InvalidArgument("targets must be non-negative".into()));
        }
        let sum: Ratio = targets.iter().sum();
        if !sum.is_one() {
            return Err(Error::InvalidArgument(format!("targets sum to {sum}, not 1")));
        }
        if epsilon.is_negative() {
            return Err(Error::InvalidArgument("epsilon must be non-negative".into()));
        }
        Ok(TargetSpec { targets, epsilon })
    }

    /// Label 0 ("+") gets `alpha`, label 1 ("−") gets `1 - alpha`.
    pub fn imbalanced(alpha: &Ratio) -> Result<Self> {
        if !alpha.is_unit() {
            return Err(Error::OutOfUnitRange(alpha.clone()));
        }
        TargetSpec::new(vec![alpha.clone(), alpha.complement()], Ratio::zero())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument("at least two labels are required".into()));
        }
        let t = Ratio::frac(1, k as i64);
        TargetSpec::new(vec![t; k], Ratio::zero())
    }

    pub fn with_epsilon(mut self, epsilon: Ratio) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn label_count(&self) -> usize {
        self.targets.len()
    }

    pub fn all_equal(&self) -> bool {
        self.targets.windows(2).all(|w| w[0] == w[1])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub agent: usize,
    pub label: usize,
    pub measure: Ratio,
    pub target: Ratio,
    pub deviation: Ratio,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    /// `measures[agent][label]`.
    pub measures: Vec<Vec<Ratio>>,
    pub cuts: usize,
    pub canonical_cuts: usize,
    pub worst_deviation: Ratio,
    /// Entries whose deviation exceeds epsilon.
    pub failures: Vec<Deviation>,
}

pub fn measures_by_label(inst: &Instance, div: &Division) -> Result<Vec<Vec<Ratio>>> {
    let sets: Vec<Vec<(Ratio, Ratio)>> = (0..div.label_count)
        .map(|l| {
            div.pieces()
                .into_iter()
                .filter(|p| p.label == l)
                .flat_map(|p| p.parts)
                .collect()
        })
        .collect();
    inst.agents
        .iter()
        .map(|a| sets.iter().map(|s| a.measure_of(s)).collect())
        .collect()
}

pub fn verify(inst: &Instance, div: &Division, spec: &TargetSpec) -> Result<VerificationReport> {
    div.validate()?;
    if div.label_count != spec.label_count() {
        return Err(Error::MalformedDivision(format!(
            "division has {} labels, targets have {}",
            div.label_count,
            spec.label_count()
        )));
    }
    if !inst.extent.is_one() {
        return Err(Error::InvalidArgument("verify expects a normalized instance".into()));
    }
    let measures = measures_by_label(inst, div)?;
    let mut worst = Ratio::zero();
    let mut failures = Vec::new();
    for (i, row) in measures.iter().enumerate() {
        for (l, m) in row.iter().enumerate() {
            let dev = (m - &spec.targets[l]).abs();
            if dev > spec.epsilon {
                failures.push(Deviation {
                    agent: i,
                    label: l,
                    measure: m.clone(),
                    target: spec.targets[l].clone(),
                    deviation: dev.clone(),
                });
            }
            if dev > worst {
                worst = dev;
            }
        }
    }
    Ok(VerificationReport {
        pass: failures.is_empty(),
        measures,
        cuts: div.cut_count(),
        canonical_cuts: div.canonicalize().cut_count(),
        worst_deviation: worst,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Ratio {
        Ratio::frac(n, d)
    }

    fn block(a: Ratio, b: Ratio, w: Ratio) -> ValueBlock {
        ValueBlock::new(a, b, w).unwrap()
    }

    fn uniform() -> Instance {
        Instance::new(
            vec![Agent::new("u", vec![block(r(0, 1), r(1, 1), r(1, 1))])],
            Domain::Interval,
            Ratio::one(),
        )
        .unwrap()
    }

    #[test]
    fn measure_examples() {
        let u = &uniform().agents[0];
        assert_eq!(u.measure_of(&[(r(0, 1), r(1, 4))]).unwrap(), r(1, 4));
        let half = Agent::new("h", vec![block(r(0, 1), r(1, 2), r(1, 1))]);
        assert_eq!(half.measure_of(&[(r(1, 4), r(3, 4))]).unwrap(), r(1, 2));
        let two = Agent::new(
            "t",
            vec![block(r(0, 1), r(1, 4), r(1, 2)), block(r(1, 2), r(1, 1), r(1, 2))],
        );
        assert_eq!(two.measure_of(&[(r(1, 8), r(3, 4))]).unwrap(), r(1, 2));
        assert!(two
            .measure_of(&[(r(0, 1), r(1, 2)), (r(1, 4), r(3, 4))])
            .is_err());
    }

    #[test]
    fn refine_examples() {
        assert_eq!(refine_cells(&uniform()).len(), 1);
        let inst = Instance::new(
            vec![Agent::new("a", vec![block(r(1, 4), r(1, 2), r(1, 1))])],
            Domain::Interval,
            Ratio::one(),
        )
        .unwrap();
        let cells = refine_cells(&inst);
        assert_eq!(cells.len(), 3);
        assert!(cells[0].is_empty() && !cells[1].is_empty() && cells[2].is_empty());
    }

    #[test]
    fn normalize_examples() {
        let inst = Instance::new(
            vec![Agent::new("a", vec![block(r(0, 1), r(10, 1), r(2, 1))])],
            Domain::Interval,
            r(10, 1),
        )
        .unwrap();
        let n = inst.normalize().unwrap();
        assert_eq!(n.agents[0].blocks[0].end, r(1, 1));
        assert_eq!(n.agents[0].blocks[0].weight, r(1, 1));
        assert_eq!(n.raw_extent, r(10, 1));
        assert!(n.is_normalized());
    }

    #[test]
    fn verify_examples() {
        let inst = uniform();
        let spec = TargetSpec::uniform(2).unwrap();
        let div = Division::new(vec![r(1, 2)], vec![0, 1], 2, Domain::Interval).unwrap();
        assert!(verify(&inst, &div, &spec).unwrap().pass);
        let div = Division::new(vec![r(1, 3)], vec![0, 1], 2, Domain::Interval).unwrap();
        let rep = verify(&inst, &div, &spec).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.worst_deviation, r(1, 6));
        let bad = Division {
            cuts: vec![r(1, 2), r(1, 3)],
            labels: vec![0, 1, 0],
            label_count: 2,
            domain: Domain::Interval,
        };
        assert!(verify(&inst, &bad, &spec).is_err());
    }

    #[test]
    fn canonicalize_interval() {
        let div = Division::new(
            vec![r(0, 1), r(1, 4), r(1, 4), r(1, 2)],
            vec![1, 0, 1, 1, 0],
            2,
            Domain::Interval,
        )
        .unwrap();
        let c = div.canonicalize();
        assert_eq!(c.cuts, vec![r(1, 4), r(1, 2)]);
        assert_eq!(c.labels, vec![0, 1, 0]);
    }

    #[test]
    fn canonicalize_circle() {
        let div = Division::new(
            vec![r(0, 1), r(1, 4), r(1, 2), r(3, 4)],
            vec![0, 1, 1, 0],
            2,
            Domain::Circle,
        )
        .unwrap();
        let c = div.canonicalize();
        assert_eq!(c.cuts, vec![r(1, 4), r(3, 4)]);
        assert_eq!(c.labels, vec![1, 0]);
        let one = Division::new(vec![r(1, 3)], vec![0], 2, Domain::Circle).unwrap();
        assert_eq!(one.canonicalize().cut_count(), 0);
    }

    #[test]
    fn circle_unrolling() {
        let div = Division::new(vec![r(1, 4), r(3, 4)], vec![0, 1], 2, Domain::Circle).unwrap();
        let i = circle_to_interval(&div);
        assert_eq!(i.cuts, vec![r(1, 4), r(3, 4)]);
        assert_eq!(i.labels, vec![1, 0, 1]);
        let div = Division::new(vec![r(0, 1), r(1, 2)], vec![0, 1], 2, Domain::Circle).unwrap();
        let i = circle_to_interval(&div);
        assert_eq!(i.cuts, vec![r(1, 2)]);
        assert_eq!(i.piece_count(), div.piece_count());
        let inst = uniform();
        assert_eq!(
            measures_by_label(&inst, &div).unwrap(),
            measures_by_label(&inst, &i).unwrap()
        );
    }
}
