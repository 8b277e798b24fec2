// The normalized joint of an i.i.d. block is a Kronecker power of the single-letter one.

use mtrd::oracle::random_joint;
use mtrd::rng::rng_from_seed;
use mtrd::spectral::{kronecker_power, tilde, tilde_grouped};
use mtrd::probkit::letter_axis;

fn main() -> mtrd::Result<()> {
    let mut rng = rng_from_seed(11);
    let p = random_joint(&mut rng, ["A", "B"], vec![2, 3])?;
    let single = tilde(&p)?;
    for k in [2, 3] {
        let ext = p.iid_extend(k)?;
        let rows: Vec<String> = (1..=k).map(|i| letter_axis("A", i)).collect();
        let cols: Vec<String> = (1..=k).map(|i| letter_axis("B", i)).collect();
        let block = tilde_grouped(&ext, &rows, &cols)?;
        let gap = (block.values() - kronecker_power(single.values(), k)).amax();
        let s = block.spectrum()?;
        let lambda2 = single.spectrum()?.lambda(2);
        let multiplicity = s.values().iter().filter(|v| (*v - lambda2).abs() < 1e-9).count();
        println!("k = {k}: max entry gap {gap:.2e}, lambda2 = {lambda2:.6} with multiplicity {multiplicity}");
    }
    Ok(())
}
