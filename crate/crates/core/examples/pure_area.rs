//! A driver with no first level and pure area `a [e1, e2]` moves linear
//! fields along their bracket. Linear fields compose in reverse order, so
//! `y_T = exp(a [A2, A1]) xi`.

use roughkit::funcs::{FieldMap, LipFunction, PolyMap};
use roughkit::path::pure_area_path;
use roughkit::rde::{solve, RdeProblem, SolveOptions};

fn main() -> roughkit::Result<()> {
    // A1 = [[0,1],[0,0]], A2 = [[0,0],[1,0]], [A2, A1] = diag(-1, 1)
    let mut lin = vec![0.0; 8];
    lin[1] = 1.0;
    lin[6] = 1.0;
    let f = LipFunction::new(FieldMap::Poly(PolyMap::linear(2, 4, lin)?), 3.0)?;
    let area = 0.5;
    let xi = vec![1.0, 1.0];
    for n in [50, 100, 250] {
        let g = pure_area_path(area, n, 2.5)?;
        let sol = solve(&RdeProblem::new(f.clone(), g, xi.clone())?, &SolveOptions::default())?;
        println!("n = {n:3}: y_T = {:?}", sol.endpoint());
    }
    println!("exp(a [A2, A1]) xi = [{}, {}]", (-area).exp(), area.exp());
    Ok(())
}
