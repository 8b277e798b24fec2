// Membership reports for a few channels against every feasible set.

use mtrd::feasibility::{check_membership, SetId, DEFAULT_TOLERANCE};
use mtrd::oracle::common_info_channel;
use mtrd::regions::sample_channel;
use mtrd::rng::rng_from_seed;
use mtrd::{AuxChannel, ChannelSizes, SourceModel};

fn main() -> mtrd::Result<()> {
    let src = SourceModel::dsbs(0.1)?;
    let sizes = ChannelSizes::new(2, 2, 3, 3);
    let mut rng = rng_from_seed(3);
    let channels: Vec<(&str, AuxChannel)> = vec![
        ("identity", AuxChannel::deterministic(&[0, 1], &[0, 1], 2, 2)?),
        ("long chain draw", sample_channel(SetId::In, sizes, &src, &mut rng)?),
        ("short chains draw", sample_channel(SetId::Out1, sizes, &src, &mut rng)?),
        ("common information", common_info_channel(&[0, 1], &[0, 1], 2)?),
    ];
    println!("{:<20} {:>10} {:>10} {:>10} {:>10}", "channel", "in", "cap13", "out1", "out3");
    for (name, ch) in &channels {
        let cells: Vec<String> = SetId::ALL
            .iter()
            .map(|&set| {
                let r = check_membership(set, ch, &src, DEFAULT_TOLERANCE)?;
                Ok(format!("{:>10}", if r.is_accepted() { "yes" } else { "no" }))
            })
            .collect::<mtrd::Result<_>>()?;
        println!("{name:<20} {}", cells.join(" "));
    }
    Ok(())
}
