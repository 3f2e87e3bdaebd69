//! Instances that force many cuts at a given ratio, and a checker for the
//! counting argument behind that bound.
//!
//! For `α = ℓ/k` with enclosing pair `ℓ1/k1 < α < ℓ2/k2`, one copy holds `k1`
//! "wide" agents with `k2` blocks each and `k2` "narrow" agents with `k1`
//! blocks each, their blocks alternating left to right and starting with a
//! narrow agent. Naming follows the usual convention: wide agents are type 1
//! and narrow agents are type 2.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractions::{enclosing_adjacent_pair, lower_bound_cuts};
use crate::measures::{circle_to_interval, verify, Agent, Division, Domain, Instance, TargetSpec, ValueBlock};
use crate::ratio::Ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Type1,
    Type2,
    Dummy,
}

/// Where an agent sits in the layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRole {
    pub kind: AgentKind,
    /// `None` for dummies.
    pub copy: Option<usize>,
    /// Index among agents of the same kind in the same copy.
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct LowerBoundLayout {
    pub alpha: Ratio,
    pub enclosing: (Ratio, Ratio),
    pub copies: usize,
    pub dummies: usize,
    /// Normalized instance; agents are listed copy by copy (type 1 then
    /// type 2), then the dummies.
    pub instance: Instance,
    pub roles: Vec<AgentRole>,
    pub guaranteed_min_cuts: u64,
}

impl LowerBoundLayout {
    pub fn k(&self) -> usize {
        small(self.enclosing.0.denom()).unwrap() + small(self.enclosing.1.denom()).unwrap()
    }

    fn agents_of(&self, copy: usize, kind: AgentKind) -> impl Iterator<Item = usize> + '_ {
        self.roles
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.copy == Some(copy) && r.kind == kind)
            .map(|(i, _)| i)
    }
}

fn small(r: &BigInt) -> Result<usize> {
    r.to_usize()
        .ok_or_else(|| Error::InvalidArgument(format!("{r} is too large for a layout")))
}

pub fn gen_lower_bound(alpha: &Ratio, n: usize) -> Result<LowerBoundLayout> {
    if n < 1 {
        return Err(Error::InvalidArgument("at least one agent is required".into()));
    }
    if !alpha.is_unit() || alpha.is_zero() || alpha.is_one() {
        return Err(Error::InvalidArgument(format!("{alpha} is not in (0, 1)")));
    }
    let (lo, hi) = enclosing_adjacent_pair(alpha)?;
    let k1 = small(lo.denom())?;
    let k2 = small(hi.denom())?;
    let k = k1 + k2;
    let copies = n / k;
    let dummies = n - copies * k;
    let per_copy = 2 * k1 * k2;

    let slot = |g: usize| -> (Ratio, Ratio) {
        let s = Ratio::int(2 * g as i64);
        (s.clone(), s + Ratio::one())
    };

    let mut agents = Vec::with_capacity(n);
    let mut roles = Vec::with_capacity(n);
    for c in 0..copies {
        let base = c * per_copy;
        // odd slots belong to type-1 agents, k2 consecutive ones each
        for b in 0..k1 {
            let blocks = (0..k2)
                .map(|j| {
                    let (s, e) = slot(base + 2 * (b * k2 + j) + 1);
                    ValueBlock::new(s, e, Ratio::frac(1, k2 as i64))
                })
                .collect::<Result<Vec<_>>>()?;
            agents.push(Agent::new(format!("c{}-type1-{}", c + 1, b + 1), blocks));
            roles.push(AgentRole {
                kind: AgentKind::Type1,
                copy: Some(c),
                rank: b,
            });
        }
        // even slots belong to type-2 agents, k1 consecutive ones each
        for a in 0..k2 {
            let blocks = (0..k1)
                .map(|j| {
                    let (s, e) = slot(base + 2 * (a * k1 + j));
                    ValueBlock::new(s, e, Ratio::frac(1, k1 as i64))
                })
                .collect::<Result<Vec<_>>>()?;
            agents.push(Agent::new(format!("c{}-type2-{}", c + 1, a + 1), blocks));
            roles.push(AgentRole {
                kind: AgentKind::Type2,
                copy: Some(c),
                rank: a,
            });
        }
    }
    for d in 0..dummies {
        let (s, e) = slot(copies * per_copy + d);
        agents.push(Agent::new(
            format!("dummy-{}", d + 1),
            vec![ValueBlock::new(s, e, Ratio::one())?],
        ));
        roles.push(AgentRole {
            kind: AgentKind::Dummy,
            copy: None,
            rank: d,
        });
    }
    let slots = copies * per_copy + dummies;
    let extent = Ratio::int(2 * slots as i64 - 1);
    let instance = Instance::new(agents, Domain::Interval, extent)?.normalize()?;
    Ok(LowerBoundLayout {
        alpha: alpha.clone(),
        enclosing: (lo, hi),
        copies,
        dummies,
        instance,
        roles,
        guaranteed_min_cuts: lower_bound_cuts(alpha, n as u64)?,
    })
}

/// Counts for one `+` interval restricted to one copy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCounts {
    pub start: Ratio,
    pub end: Ratio,
    /// Type-2 blocks of the copy meeting the interval in positive length.
    pub type2_hit: usize,
    /// Type-1 blocks of the copy entirely inside the interval.
    pub type1_inside: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyReport {
    pub copy: usize,
    pub intervals: Vec<IntervalCounts>,
    /// Each interval holds at least `type2_hit - 1` whole type-1 blocks.
    pub alternation_ok: bool,
    /// Per type-1 agent: whole blocks inside the `+` set (at most `ℓ2 - 1`).
    pub type1_inside_per_agent: Vec<usize>,
    /// Per type-2 agent: blocks meeting the `+` set (at least `ℓ1 + 1`).
    pub type2_hit_per_agent: Vec<usize>,
    pub observation_ok: bool,
    /// `Σ max(a_i - 1, 0)` against `(ℓ2 - 1)·k1`.
    pub excess_sum: usize,
    pub excess_cap: usize,
    /// `Σ a_i` against `(ℓ1 + 1)·k2`.
    pub hit_sum: usize,
    pub hit_need: usize,
    pub inequalities_ok: bool,
    /// `+` intervals meeting a type-2 block of this copy, against `k - 1`.
    pub positive_intervals: usize,
    pub interval_need: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub copies: Vec<CopyReport>,
    pub pass: bool,
}

/// Check the counting argument on a division that solves the layout exactly.
pub fn check_counting_certificate(layout: &LowerBoundLayout, div: &Division) -> Result<CertificateReport> {
    let spec = TargetSpec::imbalanced(&layout.alpha)?;
    let report = verify(&layout.instance, div, &spec)?;
    if !report.pass {
        return Err(Error::NotASolution(format!(
            "worst deviation {} at target {}",
            report.worst_deviation, layout.alpha
        )));
    }
    let interval = circle_to_interval(div).canonicalize();
    let positive = interval.label_set(0);
    let l1 = small(layout.enclosing.0.numer())?;
    let l2 = small(layout.enclosing.1.numer())?;
    let k1 = small(layout.enclosing.0.denom())?;
    let k2 = small(layout.enclosing.1.denom())?;
    let k = k1 + k2;

    let inside = |b: &ValueBlock, iv: &(Ratio, Ratio)| iv.0 <= b.start && b.end <= iv.1;
    let meets = |b: &ValueBlock, iv: &(Ratio, Ratio)| {
        Ratio::max_of(&iv.0, &b.start) < Ratio::min_of(&iv.1, &b.end)
    };

    let mut copies = Vec::new();
    for c in 0..layout.copies {
        let type1: Vec<usize> = layout.agents_of(c, AgentKind::Type1).collect();
        let type2: Vec<usize> = layout.agents_of(c, AgentKind::Type2).collect();
        let blocks_of = |ids: &[usize]| -> Vec<ValueBlock> {
            ids.iter()
                .flat_map(|&i| layout.instance.agents[i].blocks.iter().cloned())
                .collect()
        };
        let t1_blocks = blocks_of(&type1);
        let t2_blocks = blocks_of(&type2);

        let mut intervals = Vec::new();
        for iv in &positive {
            let hit = t2_blocks.iter().filter(|b| meets(b, iv)).count();
            let whole = t1_blocks.iter().filter(|b| inside(b, iv)).count();
            if hit > 0 || whole > 0 {
                intervals.push(IntervalCounts {
                    start: iv.0.clone(),
                    end: iv.1.clone(),
                    type2_hit: hit,
                    type1_inside: whole,
                });
            }
        }
        let alternation_ok = intervals
            .iter()
            .all(|c| c.type1_inside + 1 >= c.type2_hit);
        let type1_inside_per_agent: Vec<usize> = type1
            .iter()
            .map(|&i| {
                layout.instance.agents[i]
                    .blocks
                    .iter()
                    .filter(|b| positive.iter().any(|iv| inside(b, iv)))
                    .count()
            })
            .collect();
        let type2_hit_per_agent: Vec<usize> = type2
            .iter()
            .map(|&i| {
                layout.instance.agents[i]
                    .blocks
                    .iter()
                    .filter(|b| positive.iter().any(|iv| meets(b, iv)))
                    .count()
            })
            .collect();
        let observation_ok = type1_inside_per_agent.iter().all(|&x| x < l2)
            && type2_hit_per_agent.iter().all(|&x| x >= l1 + 1);
        let excess_sum: usize = intervals.iter().map(|c| c.type2_hit.saturating_sub(1)).sum();
        let hit_sum: usize = intervals.iter().map(|c| c.type2_hit).sum();
        let excess_cap = (l2 - 1) * k1;
        let hit_need = (l1 + 1) * k2;
        let inequalities_ok = excess_sum <= excess_cap && hit_sum >= hit_need;
        let positive_intervals = intervals.iter().filter(|c| c.type2_hit > 0).count();
        let interval_need = k - 1;
        let pass = alternation_ok && observation_ok && inequalities_ok && positive_intervals >= interval_need;
        copies.push(CopyReport {
            copy: c,
            intervals,
            alternation_ok,
            type1_inside_per_agent,
            type2_hit_per_agent,
            observation_ok,
            excess_sum,
            excess_cap,
            hit_sum,
            hit_need,
            inequalities_ok,
            positive_intervals,
            interval_need,
            pass,
        });
    }
    let pass = copies.iter().all(|c| c.pass);
    Ok(CertificateReport { copies, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Ratio {
        Ratio::frac(n, d)
    }

    /// Owner kind of every block, left to right.
    fn block_sequence(layout: &LowerBoundLayout) -> Vec<(Ratio, AgentKind, usize)> {
        let mut seq: Vec<(Ratio, AgentKind, usize)> = layout
            .instance
            .agents
            .iter()
            .zip(&layout.roles)
            .enumerate()
            .flat_map(|(i, (a, role))| a.blocks.iter().map(move |b| (b.start.clone(), role.kind, i)))
            .collect();
        seq.sort();
        seq
    }

    #[test]
    fn two_fifths_layout() {
        let l = gen_lower_bound(&r(2, 5), 5).unwrap();
        assert_eq!(l.guaranteed_min_cuts, 6);
        let t1: Vec<_> = l.roles.iter().filter(|r| r.kind == AgentKind::Type1).collect();
        let t2: Vec<_> = l.roles.iter().filter(|r| r.kind == AgentKind::Type2).collect();
        assert_eq!((t1.len(), t2.len()), (3, 2));
        for (a, role) in l.instance.agents.iter().zip(&l.roles) {
            let (count, w) = match role.kind {
                AgentKind::Type1 => (2, r(1, 2)),
                AgentKind::Type2 => (3, r(1, 3)),
                AgentKind::Dummy => unreachable!(),
            };
            assert_eq!(a.blocks.len(), count);
            assert!(a.blocks.iter().all(|b| b.weight == w));
        }
    }

    #[test]
    fn blocks_alternate_starting_with_type2() {
        for (alpha, n) in [(r(2, 5), 5), (r(3, 7), 7), (r(1, 3), 7), (r(5, 8), 16)] {
            let l = gen_lower_bound(&alpha, n).unwrap();
            let seq = block_sequence(&l);
            let copy_blocks: Vec<_> = seq.iter().filter(|s| s.1 != AgentKind::Dummy).collect();
            let per_copy = copy_blocks.len() / l.copies.max(1);
            for chunk in copy_blocks.chunks(per_copy) {
                for (i, s) in chunk.iter().enumerate() {
                    let want = if i % 2 == 0 { AgentKind::Type2 } else { AgentKind::Type1 };
                    assert_eq!(s.1, want);
                }
                // agents of one kind appear in increasing order
                for kind in [AgentKind::Type1, AgentKind::Type2] {
                    let owners: Vec<usize> = chunk.iter().filter(|s| s.1 == kind).map(|s| s.2).collect();
                    assert!(owners.windows(2).all(|w| w[0] <= w[1]));
                }
            }
            // dummies come last
            let first_dummy = seq.iter().position(|s| s.1 == AgentKind::Dummy);
            if let Some(p) = first_dummy {
                assert!(seq[p..].iter().all(|s| s.1 == AgentKind::Dummy));
            }
        }
    }

    #[test]
    fn copies_and_dummies() {
        let l = gen_lower_bound(&r(1, 3), 7).unwrap();
        assert_eq!((l.copies, l.dummies, l.guaranteed_min_cuts), (2, 1, 7));
        let l = gen_lower_bound(&r(1, 3), 3).unwrap();
        assert_eq!(l.instance.agent_count(), 3);
        assert_eq!(l.guaranteed_min_cuts, 2);
        assert!(gen_lower_bound(&r(1, 3), 0).is_err());
    }
}
