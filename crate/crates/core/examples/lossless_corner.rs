// Minimum sum rate for exact reconstruction of DSBS(0.1), set by set.

use mtrd::feasibility::SetId;
use mtrd::probkit::binary_entropy;
use mtrd::regions::{minimize_weighted_rate, RegionProblem};
use mtrd::SourceModel;

fn main() -> mtrd::Result<()> {
    let problem = RegionProblem::new(SourceModel::dsbs(0.1)?, [0.0, 0.0], 2, 2)?;
    println!("1 + h(0.1) = {:.6}", 1.0 + binary_entropy(0.1));
    for set in SetId::ALL {
        let outcome = minimize_weighted_rate(&problem, set, [1.0, 1.0], 100, 42)?;
        match outcome.minimum() {
            Some(m) => println!("{set:>6}: {:.6}  (R1 = {:.4}, R2 = {:.4})", m.value, m.point.r1, m.point.r2),
            None => println!("{set:>6}: nothing feasible within budget"),
        }
    }
    Ok(())
}
