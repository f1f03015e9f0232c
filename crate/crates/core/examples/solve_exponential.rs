//! `dy = y dx` along a polyline: the solution is `xi exp(x_t - x_0)`.

use roughkit::funcs::{FieldMap, LipFunction, PolyMap};
use roughkit::path::{SampledPath, SampledRoughPath};
use roughkit::rde::{solve, RdeProblem, SolveOptions};

fn main() -> roughkit::Result<()> {
    let vertices = vec![vec![0.0], vec![0.4], vec![-0.1], vec![0.6]];
    let f = LipFunction::new(FieldMap::Poly(PolyMap::linear(1, 1, vec![1.0])?), 3.5)?;
    for n in [25, 50, 100, 200] {
        let g = SampledRoughPath::lift(&SampledPath::polyline(&vertices, n)?, 3.0, None)?;
        let sol = solve(&RdeProblem::new(f.clone(), g, vec![1.0])?, &SolveOptions::default())?;
        let exact = 0.6f64.exp();
        println!(
            "{n:4} steps/segment: y_T = {:.15}, rel err {:.2e}, {} iterations, fitted C {:.4}",
            sol.endpoint()[0],
            (sol.endpoint()[0] - exact).abs() / exact,
            sol.iterations,
            sol.report.fitted_c
        );
    }
    Ok(())
}
