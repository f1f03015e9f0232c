//! A polynomial one-form lifted to a cocyclic form on the group, and its
//! exact integral along a rough path.

use roughkit::funcs::PolyMap;
use roughkit::oneform::lift_polynomial_one_form;
use roughkit::path::{signature, SampledPath, SampledRoughPath};

fn main() -> roughkit::Result<()> {
    // p(x) v = (x1^2 + 0.5 x2) v1 + (x1 x2 - 1) v2
    let mut quadratic = vec![0.0; 8];
    quadratic[0] = 1.0;
    quadratic[5] = 1.0;
    let poly = PolyMap::new(2, 2, vec![vec![0.0, -1.0], vec![0.0, 0.5, 0.0, 0.0], quadratic])?;
    let form = lift_polynomial_one_form(poly, 3, vec![0.0, 0.0])?;

    let seg = |v: &[[f64; 2]]| {
        let v: Vec<Vec<f64>> = v.iter().map(|x| x.to_vec()).collect();
        signature(&SampledPath::polyline(&v, 1).unwrap(), 3)
    };
    let a = seg(&[[0.0, 0.0], [0.3, 0.1]]);
    let b = seg(&[[0.0, 0.0], [0.2, -0.4], [0.5, 0.0]]);
    let c = seg(&[[0.0, 0.0], [-0.1, 0.6]]);
    let left: Vec<f64> = form
        .evaluate(&a, &b)?
        .iter()
        .zip(form.evaluate(&a.try_mul(&b)?, &c)?)
        .map(|(x, y)| x + y)
        .collect();
    let right = form.evaluate(&a, &b.try_mul(&c)?)?;
    println!("cocycle: beta(a,b) + beta(ab,c) = {left:?}");
    println!("         beta(a,bc)             = {right:?}");

    // out and back along the same polyline integrates to zero
    let there = vec![vec![0.0, 0.0], vec![0.7, 0.2], vec![0.4, 0.9], vec![1.0, 1.0]];
    let mut loop_path = there.clone();
    loop_path.extend(there.iter().rev().skip(1).cloned());
    let g = SampledRoughPath::lift(&SampledPath::polyline(&loop_path, 1)?, 3.0, None)?;
    println!("integral over a retraced path: {:?}", form.integrate_along(&g)?);

    let x_dx = lift_polynomial_one_form(PolyMap::linear(1, 1, vec![1.0])?, 2, vec![0.0])?;
    let g = SampledRoughPath::lift(&SampledPath::polyline(&[vec![0.0], vec![1.0], vec![3.0]], 1)?, 2.0, None)?;
    println!("int_0^3 x dx = {}", x_dx.integrate_along(&g)?[0]);
    Ok(())
}
