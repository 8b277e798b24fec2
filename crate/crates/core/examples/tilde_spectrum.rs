// Singular values of the normalized joint for the doubly symmetric binary source.

use mtrd::spectral::{singular_spectrum, tilde};
use mtrd::SourceModel;

fn main() -> mtrd::Result<()> {
    println!("{:>5} {:>12} {:>12} {:>12}", "p", "lambda1", "lambda2", "|1 - 2p|");
    for k in 0..=10 {
        let p = 0.05 * k as f64;
        let src = SourceModel::dsbs(p)?;
        let s = singular_spectrum(&tilde(src.joint())?)?;
        println!("{p:>5.2} {:>12.9} {:>12.9} {:>12.9}", s.lambda(1), s.lambda(2), (1.0 - 2.0 * p).abs());
    }
    Ok(())
}
