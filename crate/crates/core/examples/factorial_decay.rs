//! Picard differences decay factorially; the iterated-integral paths
//! `eta^{l,n}` make the mechanism visible.

use roughkit::funcs::{FieldMap, LipFunction, PolyMap};
use roughkit::path::{SampledPath, SampledRoughPath};
use roughkit::rde::{eta_recursion, picard_iterates, PicardState, RdeProblem};

fn main() -> roughkit::Result<()> {
    // V1(y) = (y2, -y1 + 0.2 y1^3), V2(y) = (0.3 y1 y2^2, 1 - 0.1 y2^3)
    let i3 = |o: usize, a: usize, b: usize, c: usize| o * 8 + a * 4 + b * 2 + c;
    let mut cubic = vec![0.0; 32];
    cubic[i3(2, 0, 0, 0)] = 0.2;
    cubic[i3(1, 0, 1, 1)] = 0.3;
    cubic[i3(3, 1, 1, 1)] = -0.1;
    let mut lin = vec![0.0; 8];
    lin[1] = 1.0;
    lin[4] = -1.0;
    let poly = PolyMap::new(2, 4, vec![vec![0.0, 0.0, 0.0, 1.0], lin, vec![0.0; 16], cubic])?;
    let f = LipFunction::new(FieldMap::Poly(poly), 3.5)?;
    let vertices = vec![vec![0.0, 0.0], vec![0.5, 0.2], vec![0.3, 0.6], vec![0.8, 0.4]];
    let g = SampledRoughPath::lift(&SampledPath::polyline(&vertices, 40)?, 3.0, None)?;
    let problem = RdeProblem::new(f, g, vec![0.5, -0.2])?;

    let mut state = PicardState::new(&problem);
    println!("  n   Delta_n      ratio");
    let mut prev: Option<f64> = None;
    for _ in 0..12 {
        let delta = state.advance(&problem)?;
        let ratio = prev.map(|p| format!("{:.3}", delta / p)).unwrap_or_default();
        println!("{:3}   {delta:.3e}   {ratio}", state.n);
        prev = Some(delta);
    }

    let its = picard_iterates(&problem, 7)?;
    let table = eta_recursion(&problem, &its, 2, 6, &[0])?;
    println!("  l  n   sup|eta^(l,n)|  |beta^(l,n)|");
    for e in &table.summary {
        println!("{:3}{:3}   {:.3e}      {:.3e}", e.l, e.n, e.max_norm, e.form_norm);
    }
    Ok(())
}
