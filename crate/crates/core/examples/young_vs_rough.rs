//! For a smooth driver the rough integral and the Young integral coincide.

use std::sync::Arc;

use roughkit::funcs::{Builtin, BuiltinKind, FieldMap, LipFunction};
use roughkit::integrate::{compose_integrand, rough_integral, young_integral, DominatedPath};
use roughkit::path::{SampledPath, SampledRoughPath};

fn main() -> roughkit::Result<()> {
    let f = LipFunction::new(FieldMap::Builtin(Builtin::new(BuiltinKind::Cos, 1, 1, vec![1.0], vec![0.0])?), 3.5)?;
    for n in [64, 256, 1024] {
        let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let sigma = SampledPath::new(times.clone(), times.iter().map(|&t| vec![(3.0 * t).sin() + t * t]).collect())?;
        let g = Arc::new(SampledRoughPath::lift(&sigma, 1.5, Some(3))?);
        let rough = rough_integral(&compose_integrand(&f, &DominatedPath::driver(g, sigma.value(0))?)?);
        let tau = SampledPath::new(times, sigma.values().iter().map(|x| vec![x[0].cos()]).collect())?;
        let young = young_integral(&tau, &sigma, 1.5, 1.5)?;
        let exact = sigma.value(n)[0].sin() - sigma.value(0)[0].sin();
        println!(
            "n = {n:5}: rough {:.12} young {:.12} (extrapolated {:.12}) exact {exact:.12}",
            rough.endpoint()[0],
            young.values[n][0],
            young.extrapolated[0]
        );
    }
    Ok(())
}
