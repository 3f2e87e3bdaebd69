//! Split a two-colour necklace in ratio 1/3 and map the split onto the
//! matching division instance.

use icd::measures::{verify, TargetSpec};
use icd::necklace::{necklace_to_instance, solve_necklace, Necklace, NecklaceOutcome};
use icd::Ratio;

fn main() -> icd::Result<()> {
    let neck = Necklace::new(2, vec![1, 1, 2, 1, 2, 2, 1, 2, 2, 1, 1, 2])?;
    let alpha = Ratio::frac(1, 3);
    println!("colour counts {:?}, quotas {:?}", neck.color_counts(), neck.quotas(&alpha)?);
    match solve_necklace(&neck, &alpha, neck.beads.len())? {
        NecklaceOutcome::Split { split } => {
            println!("cuts after beads {:?}, sides {:?}", split.cuts, split.sides);
            let inst = necklace_to_instance(&neck)?;
            let div = split.to_division(&neck);
            println!("as a division: verified {}", verify(&inst, &div, &TargetSpec::imbalanced(&alpha)?)?.pass);
        }
        NecklaceOutcome::Infeasible { max_cuts } => println!("no split with at most {max_cuts} cuts"),
    }
    Ok(())
}
