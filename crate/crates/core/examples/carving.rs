//! Three-way consensus division by carving off one third at a time.

use icd::generators::gen_random;
use icd::measures::measures_by_label;
use icd::pipelines::{ckd_via_carving, PipelineOptions};
use icd::Ratio;

fn main() -> icd::Result<()> {
    let inst = gen_random(2, 3, 11)?;
    let out = ckd_via_carving(&inst, 3, 3, &Ratio::frac(1, 16), &PipelineOptions::default())?;
    let snapped: Vec<String> = out.approximations.iter().map(|a| format!("{} -> {}", a.target, a.ratio)).collect();
    println!("carves: {}", snapped.join(", "));
    println!("{} cuts (bound {}), tolerance {}", out.division.cut_count(), out.bound, out.tolerance);
    for (i, row) in measures_by_label(&inst, &out.division)?.iter().enumerate() {
        let row: Vec<String> = row.iter().map(|m| format!("{:.4}", m.to_f64())).collect();
        println!("  agent {i}: {}", row.join(" "));
    }
    Ok(())
}
