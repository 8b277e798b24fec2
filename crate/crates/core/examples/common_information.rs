// A channel whose outputs share a common random part satisfies the short Markov
// chains but breaks the spectral conditions.

use mtrd::feasibility::{in_s_out1, in_s_out3, DEFAULT_TOLERANCE};
use mtrd::oracle::common_info_channel;
use mtrd::probkit::{join, X1, X2};
use mtrd::spectral::maximal_correlation;
use mtrd::SourceModel;

fn main() -> mtrd::Result<()> {
    let src = SourceModel::dsbs(0.1)?;
    let ch = common_info_channel(&[0, 1], &[0, 1], 2)?;
    let x1x2 = join(src.joint(), &ch)?.marginal(&[X1, X2])?;
    println!("lambda2(UV) = {:.6}", maximal_correlation(src.joint())?);
    println!("lambda2(X1X2) = {:.6}", maximal_correlation(&x1x2)?);
    println!("short chains: {:?}", in_s_out1(&ch, DEFAULT_TOLERANCE).verdict);
    let out3 = in_s_out3(&ch, &src, DEFAULT_TOLERANCE)?;
    println!("spectral: {:?}, worst margin {:.6}", out3.verdict, out3.margins.map_or(f64::NAN, |m| m.worst()));
    Ok(())
}
