//! Build the hard instance for 1/3 with three agents and let the solver
//! confirm that nothing below the guaranteed count works.

use icd::generators::{check_counting_certificate, gen_lower_bound};
use icd::measures::TargetSpec;
use icd::solver::{min_cuts, MinCuts, SearchConfig};
use icd::{Domain, Ratio};

fn main() -> icd::Result<()> {
    let alpha = Ratio::frac(1, 3);
    let layout = gen_lower_bound(&alpha, 3)?;
    println!(
        "{} agents ({} copies, {} dummies), guaranteed minimum {} cuts",
        layout.instance.agent_count(),
        layout.copies,
        layout.dummies,
        layout.guaranteed_min_cuts
    );

    let cfg = SearchConfig::new(0, TargetSpec::imbalanced(&alpha)?, Domain::Interval);
    let report = min_cuts(&layout.instance, &cfg, layout.guaranteed_min_cuts as usize + 2)?;
    for (cuts, verdict) in &report.levels {
        println!("  {cuts} cuts: {verdict}");
    }
    if let MinCuts::Found { cuts, division } = report.result {
        let cert = check_counting_certificate(&layout, &division)?;
        println!("minimum {cuts}; counting certificate holds: {}", cert.pass);
    }
    Ok(())
}
