//! Snap a ratio onto the `Q_3` ladder and divide with the snapped value.

use icd::fractions::{hole_sizes, nearest_qp_ratio, qp_set};
use icd::generators::gen_random;
use icd::pipelines::{more_cuts_solve, PipelineOptions};
use icd::Ratio;

fn main() -> icd::Result<()> {
    let ladder = qp_set(3, 2)?;
    let members: Vec<String> = ladder.members().iter().map(|m| m.to_string()).collect();
    println!("Q_3 level 2: {}", members.join(" "));
    let holes: Vec<String> = hole_sizes(&ladder).iter().map(|h| h.to_string()).collect();
    println!("holes: {}", holes.join(" "));

    let alpha = Ratio::frac(47, 100);
    let accuracy = Ratio::frac(1, 16);
    let approx = nearest_qp_ratio(&alpha, 3, &accuracy)?;
    println!("{alpha} snaps to {} at level {} (error {})", approx.ratio, approx.level, approx.error());

    let inst = gen_random(2, 3, 3)?;
    let out = more_cuts_solve(&inst, &alpha, 3, &accuracy, &PipelineOptions::default())?;
    println!(
        "division for {}: {} cuts (bound {}), verified {}",
        out.approximation.ratio,
        out.result.division.cut_count(),
        out.bound,
        out.result.report.pass
    );
    Ok(())
}
