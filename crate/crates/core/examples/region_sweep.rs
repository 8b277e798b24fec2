// Traces all four sets on DSBS(0.1) at D = (0.05, 0.05), writes their CSVs and
// checks that they nest.

use std::time::Instant;

use mtrd::feasibility::SetId;
use mtrd::regions::{compare_regions, trace_regions, RegionProblem, TraceConfig, DEFAULT_EPSILON};
use mtrd::SourceModel;

fn main() -> mtrd::Result<()> {
    let budget = std::env::var("MTRD_BUDGET").ok().and_then(|s| s.parse().ok()).unwrap_or(30);
    let problem = RegionProblem::with_default_sizes(SourceModel::dsbs(0.1)?, [0.05, 0.05])?;
    let start = Instant::now();
    let boundaries = trace_regions(&problem, &SetId::ALL, &TraceConfig::new(9, budget, 2024))?;
    let report = compare_regions(&boundaries, DEFAULT_EPSILON)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "theta", "in", "cap13", "out1", "out3");
    for w in &report.weights {
        let cell = |s| w.values[&s].map_or("-".to_string(), |v: f64| format!("{v:.6}"));
        println!(
            "{:>6.3} {:>10} {:>10} {:>10} {:>10}",
            w.theta,
            cell(SetId::In),
            cell(SetId::Cap13),
            cell(SetId::Out1),
            cell(SetId::Out3)
        );
    }
    let dir = std::env::temp_dir().join("mtrd-region-sweep");
    std::fs::create_dir_all(&dir)?;
    for b in &boundaries {
        let path = dir.join(format!("region_{}.csv", b.metadata.set));
        b.write_csv(std::fs::File::create(&path)?)?;
        println!("{}: {} points, {} hull vertices -> {}", b.metadata.set, b.points.len(), b.hull.len(), path.display());
    }
    println!("ordering holds: {}  ({:.1?})", report.ok, start.elapsed());
    Ok(())
}
