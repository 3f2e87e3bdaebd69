//! The constructive upper-bound pipeline on a random instance, printing the
//! trace of every split.

use icd::generators::gen_random;
use icd::pipelines::{upper_bound_solve, PipelineOptions};
use icd::Ratio;

fn main() -> icd::Result<()> {
    let inst = gen_random(2, 3, 5)?;
    for alpha in [Ratio::frac(1, 3), Ratio::frac(2, 5)] {
        let res = upper_bound_solve(&inst, &alpha, &PipelineOptions::default())?;
        let trace = &res.trace;
        println!("{alpha}: {} cuts (bound {:?}), verified {}", trace.total_cuts, trace.bound_claimed, res.report.pass);
        for step in &trace.steps {
            println!(
                "  {} at {}: {} labels, arcs {} -> {}, kept {:?}{}",
                step.operation,
                step.ratio,
                step.labels,
                step.arcs_before,
                step.arcs_after,
                step.kept,
                if step.complemented { ", complemented" } else { "" }
            );
        }
    }
    Ok(())
}
