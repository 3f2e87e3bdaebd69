//! Adjacent pairs, `Q*` witnesses and remainder chains for a few ratios.
//!
//! ```text
//! cargo run --example fraction_theory
//! ```

use icd::fractions::{case2_chain, enclosing_adjacent_pair, lower_bound_cuts, qstar_member, upper_bound_cuts};
use icd::Ratio;

fn main() -> icd::Result<()> {
    let n = 5;
    for alpha in [Ratio::frac(1, 3), Ratio::frac(2, 5), Ratio::frac(3, 7), Ratio::frac(5, 12)] {
        let (lo, hi) = enclosing_adjacent_pair(&alpha)?;
        println!("{alpha}: between {lo} and {hi}");
        match qstar_member(&alpha) {
            Some(w) => {
                let path: Vec<String> = w.ratios().iter().map(|r| r.to_string()).collect();
                println!("  in Q*, generated by {}", path.join(" -> "));
            }
            None => {
                let chain = case2_chain(&alpha)?;
                let path: Vec<String> = chain.ratios.iter().map(|r| r.to_string()).collect();
                println!("  outside Q*, chain {} with divisors {:?}", path.join(" -> "), chain.divisors);
            }
        }
        let upper = upper_bound_cuts(&alpha, n)?;
        println!("  n = {n}: at least {} cuts, at most {} ({:?})", lower_bound_cuts(&alpha, n)?, upper.value, upper.tag);
    }
    Ok(())
}
