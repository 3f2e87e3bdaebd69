//! Exact search for a 2/5 division of a random instance, with the minimum
//! cut count and an independent check of the result.

use icd::generators::gen_random;
use icd::measures::{measures_by_label, verify, TargetSpec};
use icd::solver::{min_cuts, MinCuts, SearchConfig};
use icd::{Domain, Ratio};

fn main() -> icd::Result<()> {
    let inst = gen_random(3, 3, 42)?;
    for agent in &inst.agents {
        let blocks: Vec<String> = agent.blocks.iter().map(|b| format!("[{}, {}) x {}", b.start, b.end, b.weight)).collect();
        println!("{}: {}", agent.name, blocks.join(", "));
    }

    let spec = TargetSpec::imbalanced(&Ratio::frac(2, 5))?;
    let cfg = SearchConfig::new(0, spec.clone(), Domain::Interval);
    let report = min_cuts(&inst, &cfg, 6)?;
    println!("searched {} nodes", report.nodes_explored);
    match report.result {
        MinCuts::Found { cuts, division } => {
            let cut_list: Vec<String> = division.cuts.iter().map(|c| c.to_string()).collect();
            println!("minimum {cuts} cuts at {}", cut_list.join(", "));
            println!("labels {:?}", division.labels);
            for (i, row) in measures_by_label(&inst, &division)?.iter().enumerate() {
                let row: Vec<String> = row.iter().map(|m| m.to_string()).collect();
                println!("  agent {i}: {}", row.join(" / "));
            }
            println!("verified: {}", verify(&inst, &division, &spec)?.pass);
        }
        other => println!("{other:?}"),
    }
    Ok(())
}
