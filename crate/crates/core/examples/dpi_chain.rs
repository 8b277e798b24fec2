// Spectral data processing on a Markov chain and on a triple that is not one.

use mtrd::spectral::{dpi_check, DpiVerdict};
use mtrd::ProbTensor;

fn bsc(p: f64) -> [[f64; 2]; 2] {
    [[1.0 - p, p], [p, 1.0 - p]]
}

fn main() -> mtrd::Result<()> {
    // X uniform, Y = BSC(0.1)(X), Z = BSC(0.2)(Y)
    let (a, b) = (bsc(0.1), bsc(0.2));
    let mut values = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                values.push(0.5 * a[x][y] * b[y][z]);
            }
        }
    }
    let chain = ProbTensor::new(["X", "Y", "Z"], vec![2, 2, 2], values)?;
    let report = dpi_check(&chain)?;
    let e = &report.entries[0];
    println!("chain: lambda2(XZ) = {:.12}, lambda2(XY) * lambda2(YZ) = {:.12}", e.lambda_xz, e.lambda_xy * e.lambda2_yz);
    assert_eq!(report.verdict, DpiVerdict::NecessaryConditionHolds);

    // X = Z a shared fair bit, Y constant: X and Z are dependent through nothing
    let common = ProbTensor::new(["X", "Y", "Z"], vec![2, 1, 2], vec![0.5, 0.0, 0.0, 0.5])?;
    let report = dpi_check(&common)?;
    println!("common bit: verdict {:?}, min slack {:?}", report.verdict, report.min_slack);
    Ok(())
}
