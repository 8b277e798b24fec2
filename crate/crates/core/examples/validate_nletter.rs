// Induced first-letter channels of random two-letter schemes pass the spectral
// conditions; a channel with common information does not.

use mtrd::oracle::{common_info_channel, validate_single_letter_conditions, ValidationConfig};
use mtrd::SourceModel;

fn main() -> mtrd::Result<()> {
    let src = SourceModel::dsbs(0.1)?;
    for n in [1, 2] {
        let cfg = ValidationConfig {
            n,
            x1: 3,
            x2: 3,
            trials: 100,
            seed: 5,
            tolerance: 1e-7,
        };
        let r = validate_single_letter_conditions(&src, &cfg, &[])?;
        println!("n = {n}: {} failures, worst margin {:.6}, worst short-chain defect {:.2e}", r.failures.len(), r.worst_margin, r.worst_out1_defect);
    }
    let cfg = ValidationConfig {
        n: 2,
        x1: 3,
        x2: 3,
        trials: 10,
        seed: 5,
        tolerance: 1e-7,
    };
    let bad = common_info_channel(&[0, 1], &[0, 1], 2)?;
    let r = validate_single_letter_conditions(&src, &cfg, &[bad])?;
    println!("with an injected common-information channel: {} failure(s)", r.failures.len());
    Ok(())
}
