//! Truncated signatures of a polyline: Chen's identity, the logarithm and
//! factorial decay of the levels.

use roughkit::path::{signature, SampledPath};
use roughkit::tensor::GroupElement;

fn main() -> roughkit::Result<()> {
    let first = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![0.5, 1.5]];
    let second = vec![vec![0.5, 1.5], vec![-0.5, 1.0], vec![0.0, 0.0]];
    let level = 4;

    let a = signature(&SampledPath::polyline(&first, 1)?, level);
    let b = signature(&SampledPath::polyline(&second, 1)?, level);
    let mut joined = first.clone();
    joined.extend(second[1..].iter().cloned());
    let whole = SampledPath::polyline(&joined, 1)?;
    let s = signature(&whole, level);

    println!("Chen: |S(a * b) - S(a) S(b)| = {:.2e}", s.max_abs_diff(&a.try_mul(&b)?));
    println!("closed loop, so level one vanishes: {:?}", s.level_slice(1));
    let area = 0.5 * (s.level_slice(2)[1] - s.level_slice(2)[2]);
    println!("signed area (antisymmetric level two): {area:.6}");

    let log = s.log()?;
    let back = GroupElement::exp_lie(&log)?;
    println!("exp(log S) round trip: {:.2e}", back.tensor().max_abs_diff(&s));

    let len = whole.length();
    let mut fact = 1.0;
    for k in 1..=level {
        fact *= k as f64;
        let norm = s.level_slice(k).iter().map(|x| x * x).sum::<f64>().sqrt();
        println!("level {k}: |pi_k S| = {norm:.4e} <= L^k/k! = {:.4e}", len.powi(k as i32) / fact);
    }
    Ok(())
}
