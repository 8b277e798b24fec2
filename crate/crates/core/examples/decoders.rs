// Optimal reconstruction maps compared with brute-force enumeration.

use mtrd::oracle::exhaustive_decoder_check;
use mtrd::probkit::join;
use mtrd::regions::sample_channel;
use mtrd::feasibility::SetId;
use mtrd::rng::rng_from_seed;
use mtrd::{ChannelSizes, SourceModel};

fn main() -> mtrd::Result<()> {
    let src = SourceModel::dsbs(0.1)?;
    let mut rng = rng_from_seed(8);
    for _ in 0..5 {
        let ch = sample_channel(SetId::Out3, ChannelSizes::new(2, 2, 2, 2), &src, &mut rng)?;
        let c = exhaustive_decoder_check(&join(src.joint(), &ch)?, &src)?;
        println!(
            "u_hat {:?} v_hat {:?}  Ed = ({:.6}, {:.6})  matches: {}",
            c.optimal.decoders.u_hat, c.optimal.decoders.v_hat, c.optimal.ed1, c.optimal.ed2, c.matches
        );
    }
    Ok(())
}
