//! Seeded random instances on an integer grid.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measures::{Agent, Domain, Instance, ValueBlock};
use crate::ratio::Ratio;

/// `n` agents with `blocks` disjoint blocks each. Block endpoints are drawn
/// from a grid of `4 * blocks` units and weights from `1..=4` before
/// normalization. Deterministic per seed.
pub fn gen_random(n: usize, blocks: usize, seed: u64) -> Result<Instance> {
    if n < 1 || blocks < 1 {
        return Err(Error::InvalidArgument("need at least one agent and one block".into()));
    }
    let grid = 4 * blocks;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = (0..n)
        .map(|a| {
            let mut points = sample(&mut rng, grid + 1, 2 * blocks).into_vec();
            points.sort_unstable();
            let bs = points
                .chunks(2)
                .map(|p| {
                    let w: i64 = rng.gen_range(1..=4);
                    ValueBlock::new(Ratio::int(p[0] as i64), Ratio::int(p[1] as i64), Ratio::int(w))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Agent::new(format!("agent-{}", a + 1), bs))
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(agents, Domain::Interval, Ratio::int(grid as i64))?.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block() {
        let inst = gen_random(1, 1, 3).unwrap();
        assert_eq!(inst.agents[0].blocks.len(), 1);
        assert!(inst.agents[0].blocks[0].weight.is_one());
    }

    #[test]
    fn deterministic() {
        assert_eq!(gen_random(2, 3, 7).unwrap(), gen_random(2, 3, 7).unwrap());
        assert_ne!(gen_random(2, 3, 7).unwrap(), gen_random(2, 3, 8).unwrap());
    }

    #[test]
    fn invariants_hold() {
        let inst = gen_random(3, 4, 1).unwrap();
        assert!(inst.is_normalized());
        for a in &inst.agents {
            assert_eq!(a.blocks.len(), 4);
            for w in a.blocks.windows(2) {
                assert!(w[0].end < w[1].start);
            }
        }
    }
}
