//! Reduce a tiny exactly-1 3-SAT formula to a division instance, build the
//! division for its satisfying assignment and read the assignment back.

use icd::generators::{build_sat_solution, exactly1_3sat_oracle, gen_sat_gadget, read_assignment, Formula};
use icd::measures::{verify, TargetSpec};
use icd::Ratio;

fn main() -> icd::Result<()> {
    // (x1 or x2 or x3) and (not x1 or x2 or x4), exactly one literal per clause
    let formula = Formula::new(4, vec![vec![1, 2, 3], vec![-1, 2, 4]])?;
    let alpha = Ratio::frac(2, 5);
    let layout = gen_sat_gadget(&formula, &alpha)?;
    println!(
        "{} agents, target {} cuts",
        layout.instance.agent_count(),
        layout.target_cuts
    );

    let Some(assignment) = exactly1_3sat_oracle(&formula, 20)? else {
        println!("formula is not exactly-1 satisfiable");
        return Ok(());
    };
    println!("assignment {assignment:?}");
    let div = build_sat_solution(&layout, &assignment)?;
    let report = verify(&layout.instance, &div, &TargetSpec::imbalanced(&alpha)?)?;
    println!("division with {} cuts verifies: {}", div.cut_count(), report.pass);
    println!("read back {:?}", read_assignment(&layout, &div)?);
    Ok(())
}
