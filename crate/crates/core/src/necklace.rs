//! Imbalanced necklace splitting and its conversions to and from
//! piecewise-constant instances.

use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::sat::check_disjoint;
use crate::measures::{Agent, Division, Domain, Instance, ValueBlock};
use crate::ratio::Ratio;

/// An open necklace; colors are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Necklace {
    pub colors: usize,
    pub beads: Vec<usize>,
}

impl Necklace {
    pub fn new(colors: usize, beads: Vec<usize>) -> Result<Self> {
        let neck = Necklace { colors, beads };
        neck.validate()?;
        Ok(neck)
    }

    pub fn validate(&self) -> Result<()> {
        if self.colors == 0 {
            return Err(Error::InvalidNecklace("at least one color is needed".into()));
        }
        if let Some(b) = self.beads.iter().find(|&&b| b == 0 || b > self.colors) {
            return Err(Error::InvalidNecklace(format!("bead color {b} outside 1..={}", self.colors)));
        }
        if let Some(c) = self.color_counts().iter().position(|&a| a == 0) {
            return Err(Error::InvalidNecklace(format!("color {} has no beads", c + 1)));
        }
        Ok(())
    }

    /// `a_i` for each color.
    pub fn color_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.colors];
        for &b in &self.beads {
            if (1..=self.colors).contains(&b) {
                counts[b - 1] += 1;
            }
        }
        counts
    }

    /// `alpha * a_i` per color, or an error when one is not an integer.
    pub fn quotas(&self, alpha: &Ratio) -> Result<Vec<usize>> {
        if !alpha.is_unit() {
            return Err(Error::OutOfUnitRange(alpha.clone()));
        }
        self.color_counts()
            .iter()
            .enumerate()
            .map(|(c, &a)| {
                let q = alpha * &Ratio::int(a as i64);
                if !q.denom().is_one() {
                    return Err(Error::InvalidNecklace(format!(
                        "{alpha} of the {a} beads of color {} is not a whole number",
                        c + 1
                    )));
                }
                Ok(q.floor().to_usize().expect("bounded by bead count"))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// Cuts sit between beads: cut `j` separates bead `j` from bead `j + 1`
/// (1-based beads). Pieces alternate sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecklaceSplit {
    pub cuts: Vec<usize>,
    pub sides: Vec<Side>,
}

impl NecklaceSplit {
    /// The same split on the necklace's continuous image.
    pub fn to_division(&self, neck: &Necklace) -> Division {
        let t = neck.beads.len() as i64;
        let cuts = self.cuts.iter().map(|&j| Ratio::frac(j as i64, t)).collect();
        let labels = self.sides.iter().map(|s| usize::from(*s == Side::Minus)).collect();
        Division::new(cuts, labels, 2, Domain::Interval).expect("split is well formed")
    }

    /// Beads of each color on the "+" side.
    pub fn plus_counts(&self, neck: &Necklace) -> Vec<usize> {
        let mut counts = vec![0; neck.colors];
        let mut piece = 0;
        for (j, &b) in neck.beads.iter().enumerate() {
            while piece < self.cuts.len() && self.cuts[piece] <= j {
                piece += 1;
            }
            if self.sides[piece] == Side::Plus {
                counts[b - 1] += 1;
            }
        }
        counts
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NecklaceOutcome {
    /// A split with the fewest cuts.
    Split { split: NecklaceSplit },
    /// No split with at most `max_cuts` cuts exists.
    Infeasible { max_cuts: usize },
}

/// Bead `j` becomes the block `[j, j+1]` with weight `1/a_i` for its color's
/// agent; the result is normalized to `[0, 1]`.
pub fn necklace_to_instance(neck: &Necklace) -> Result<Instance> {
    neck.validate()?;
    let counts = neck.color_counts();
    let mut blocks: Vec<Vec<ValueBlock>> = vec![Vec::new(); neck.colors];
    for (j, &b) in neck.beads.iter().enumerate() {
        blocks[b - 1].push(ValueBlock {
            start: Ratio::int(j as i64),
            end: Ratio::int(j as i64 + 1),
            weight: Ratio::frac(1, counts[b - 1] as i64),
        });
    }
    let agents = blocks
        .into_iter()
        .enumerate()
        .map(|(c, bl)| Agent::new(format!("color-{}", c + 1), bl))
        .collect();
    Instance::new(agents, Domain::Interval, Ratio::int(neck.beads.len() as i64))?.normalize()
}

/// Discretize an instance whose agents' blocks are pairwise disjoint. Agent
/// `i` gets `a_i = lcm(weight denominators, den(alpha))` beads, so each block
/// holds a whole number of beads and `alpha * a_i` is whole; the beads of a
/// block are laid out in block order.
pub fn instance_to_necklace(inst: &Instance, alpha: &Ratio) -> Result<Necklace> {
    if !alpha.is_unit() {
        return Err(Error::OutOfUnitRange(alpha.clone()));
    }
    check_disjoint(inst).map_err(|e| Error::InvalidNecklace(format!("agents must not overlap: {e}")))?;
    let mut placed: Vec<(Ratio, usize, usize)> = Vec::new();
    for (i, agent) in inst.agents.iter().enumerate() {
        let total = agent.total();
        if !total.is_positive() {
            return Err(Error::ZeroWeightAgent(agent.name.clone()));
        }
        let weights: Vec<Ratio> = agent.blocks.iter().map(|b| &b.weight / &total).collect();
        let granularity = weights
            .iter()
            .fold(alpha.denom().clone(), |acc, w| acc.lcm(w.denom()));
        for (blk, w) in agent.blocks.iter().zip(&weights) {
            let beads = (w * &Ratio::int(granularity.clone()))
                .floor()
                .to_usize()
                .ok_or_else(|| Error::InvalidNecklace("bead count overflow".into()))?;
            placed.push((blk.start.clone(), i + 1, beads));
        }
    }
    placed.sort();
    let beads = placed
        .into_iter()
        .flat_map(|(_, color, count)| std::iter::repeat(color).take(count))
        .collect();
    Necklace::new(inst.agent_count(), beads)
}

/// Fewest-cut split with the "+" side holding exactly `alpha * a_i` beads of
/// every color, by exhaustive search over cut positions with increasing cut
/// counts.
pub fn solve_necklace(neck: &Necklace, alpha: &Ratio, max_cuts: usize) -> Result<NecklaceOutcome> {
    neck.validate()?;
    let quotas = neck.quotas(alpha)?;
    let t = neck.beads.len();
    // prefix[j][c]: beads of color c among the first j
    let mut prefix = vec![vec![0usize; neck.colors]; t + 1];
    for (j, &b) in neck.beads.iter().enumerate() {
        prefix[j + 1] = prefix[j].clone();
        prefix[j + 1][b - 1] += 1;
    }
    let gaps = t.saturating_sub(1);
    for c in 0..=max_cuts.min(gaps) {
        let mut cuts: Vec<usize> = (1..=c).collect();
        loop {
            for first in [Side::Plus, Side::Minus] {
                if plus_matches(&prefix, &cuts, first, &quotas, t) {
                    let sides = (0..=c)
                        .map(|i| if (i % 2 == 0) == (first == Side::Plus) { Side::Plus } else { Side::Minus })
                        .collect();
                    return Ok(NecklaceOutcome::Split {
                        split: NecklaceSplit { cuts, sides },
                    });
                }
            }
            if !next_combination(&mut cuts, gaps) {
                break;
            }
        }
    }
    Ok(NecklaceOutcome::Infeasible { max_cuts })
}

fn plus_matches(prefix: &[Vec<usize>], cuts: &[usize], first: Side, quotas: &[usize], t: usize) -> bool {
    let mut got = vec![0usize; quotas.len()];
    let mut lo = 0;
    let mut plus = first == Side::Plus;
    for &hi in cuts.iter().chain(std::iter::once(&t)) {
        if plus {
            for (c, g) in got.iter_mut().enumerate() {
                *g += prefix[hi][c] - prefix[lo][c];
            }
        }
        plus = !plus;
        lo = hi;
    }
    got == quotas
}

/// Advance a strictly increasing selection from `1..=max` in lexicographic order.
fn next_combination(sel: &mut [usize], max: usize) -> bool {
    let c = sel.len();
    for i in (0..c).rev() {
        if sel[i] < max - (c - 1 - i) {
            sel[i] += 1;
            for j in i + 1..c {
                sel[j] = sel[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{verify, TargetSpec};

    fn half() -> Ratio {
        Ratio::frac(1, 2)
    }

    #[test]
    fn conversion_examples() {
        let inst = necklace_to_instance(&Necklace::new(1, vec![1, 1]).unwrap()).unwrap();
        assert_eq!(inst.agent_count(), 1);
        assert_eq!(inst.agents[0].blocks.len(), 2);
        assert!(inst.agents[0].blocks.iter().all(|b| b.weight == half()));

        let neck = Necklace::new(2, vec![1, 2, 2, 1, 2, 1]).unwrap();
        let inst = necklace_to_instance(&neck).unwrap();
        assert_eq!(inst.agent_count(), 2);
        assert!(inst.agents.iter().flat_map(|a| &a.blocks).all(|b| b.weight == Ratio::frac(1, 3)));
        assert_eq!(neck.quotas(&Ratio::frac(1, 3)).unwrap(), vec![1, 1]);

        let bad = Necklace::new(2, vec![1, 2, 1]).unwrap();
        assert!(necklace_to_instance(&bad).is_ok());
        assert!(bad.quotas(&half()).is_err());
    }

    #[test]
    fn back_to_beads() {
        let agent = Agent::new(
            "a",
            vec![
                ValueBlock::new(Ratio::zero(), half(), half()).unwrap(),
                ValueBlock::new(half(), Ratio::one(), half()).unwrap(),
            ],
        );
        let inst = Instance::new(vec![agent], Domain::Interval, Ratio::one()).unwrap();
        let neck = instance_to_necklace(&inst, &half()).unwrap();
        assert_eq!(neck.beads, vec![1, 1]);
    }

    #[test]
    fn solve_examples() {
        let neck = Necklace::new(1, vec![1, 1, 1, 1]).unwrap();
        match solve_necklace(&neck, &half(), 3).unwrap() {
            NecklaceOutcome::Split { split } => assert_eq!(split.cuts, vec![2]),
            other => panic!("{other:?}"),
        }
        let neck = Necklace::new(2, vec![1, 2, 1, 2]).unwrap();
        match solve_necklace(&neck, &half(), 3).unwrap() {
            NecklaceOutcome::Split { split } => {
                assert_eq!(split.cuts, vec![2]);
                assert_eq!(split.plus_counts(&neck), vec![1, 1]);
                let inst = necklace_to_instance(&neck).unwrap();
                let report = verify(&inst, &split.to_division(&neck), &TargetSpec::imbalanced(&half()).unwrap()).unwrap();
                assert!(report.pass);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            solve_necklace(&neck, &half(), 0).unwrap(),
            NecklaceOutcome::Infeasible { max_cuts: 0 }
        );
    }

    #[test]
    fn round_trip_keeps_counts() {
        let neck = Necklace::new(3, vec![1, 2, 3, 3, 2, 1, 1, 2, 3]).unwrap();
        let alpha = Ratio::frac(1, 3);
        let back = instance_to_necklace(&necklace_to_instance(&neck).unwrap(), &alpha).unwrap();
        assert_eq!(back.color_counts(), neck.color_counts());
        assert_eq!(back.beads, neck.beads);
    }
}
