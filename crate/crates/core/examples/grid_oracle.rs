// The optimizer against exhaustive search over long-chain channels on a 0.25 grid.

use mtrd::feasibility::SetId;
use mtrd::oracle::grid_search_weighted_rate;
use mtrd::regions::{minimize_weighted_rate, RegionProblem};
use mtrd::SourceModel;

fn main() -> mtrd::Result<()> {
    let src = SourceModel::dsbs(0.1)?;
    for d in [[0.0, 0.0], [0.5, 0.5], [0.1, 0.2]] {
        let problem = RegionProblem::new(src.clone(), d, 2, 2)?;
        for w in [[1.0, 1.0], [1.0, 0.4]] {
            let grid = grid_search_weighted_rate(&src, d, 2, 2, w, 0.25)?.value();
            let opt = minimize_weighted_rate(&problem, SetId::In, w, 200, 1)?.value();
            println!("D = {d:?}, w = {w:?}: grid {grid:?}, optimizer {opt:?}");
        }
    }
    Ok(())
}
