//! Two independently computed solutions agree, and the solution moves
//! continuously with the driver.

use roughkit::funcs::{FieldMap, LipFunction, PolyMap};
use roughkit::integrate::DominatedPath;
use roughkit::path::{SampledPath, SampledRoughPath};
use roughkit::rde::{continuity_probe, rescale_problem, solve, uniqueness_probe, RdeProblem, SolveOptions};

fn field() -> roughkit::Result<LipFunction> {
    // V1(y) = (-y2, y1), V2(y) = (0.5 y1 y2, 0.3)
    let mut lin = vec![0.0; 8];
    lin[1] = -1.0;
    lin[4] = 1.0;
    let mut quad = vec![0.0; 16];
    quad[4 + 1] = 0.25;
    quad[4 + 2] = 0.25;
    LipFunction::new(FieldMap::Poly(PolyMap::new(2, 4, vec![vec![0.0, 0.0, 0.0, 0.3], lin, quad])?), 3.5)
}

fn main() -> roughkit::Result<()> {
    let vertices = vec![vec![0.0, 0.0], vec![0.5, 0.2], vec![0.3, 0.6], vec![0.8, 0.4]];
    let lift = |v: &[Vec<f64>]| SampledRoughPath::lift(&SampledPath::polyline(v, 30).unwrap(), 3.0, None).unwrap();
    let xi = vec![0.5, -0.2];
    let problem = RdeProblem::new(field()?, lift(&vertices), xi.clone())?;

    // solve directly, and through the rescaled equation mapped back
    let a = solve(&problem, &SolveOptions::default())?;
    let (hat, c) = rescale_problem(&problem, 0.5, 2.0)?;
    let b = solve(&hat, &SolveOptions { tol: 1e-12, ..SolveOptions::default() })?;
    let b_path = DominatedPath::new(b.path.values.clone(), b.path.form.rescaled(1.0 / c, problem.driver().clone())?)?;
    let report = uniqueness_probe(&problem, &a.path, &b_path, 8, 1e-8)?;
    println!("rescale factor c = {c:.3}, sup |y - y_hat| = {:.2e}", report.sup_distance);
    for (n, (r, bound)) in report.rho_sup.iter().zip(&report.bounds).enumerate() {
        println!("  n = {}: sup|rho^n| = {r:.3e}, bound {bound:.3e}", n + 1);
    }

    let perturbed: Vec<SampledRoughPath> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&d| {
            let v: Vec<Vec<f64>> = vertices
                .iter()
                .enumerate()
                .map(|(i, x)| if i == 0 { x.clone() } else { vec![x[0] + d * (i as f64).sin(), x[1] - d] })
                .collect();
            lift(&v)
        })
        .collect();
    let cont = continuity_probe(&field()?, &xi, problem.driver(), &perturbed, &SolveOptions::default())?;
    for (d, s) in cont.driver_distances.iter().zip(&cont.solution_distances) {
        println!("driver distance {d:.3e} -> solution distance {s:.3e}");
    }
    println!("local orders {:?}", cont.orders);
    Ok(())
}
