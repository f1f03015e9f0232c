//! p-variation of a sampled path and the control it induces on a rough lift.

use roughkit::path::{Control, SampledPath, SampledRoughPath};

fn main() -> roughkit::Result<()> {
    let n = 200;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    // a rough-looking curve: a sum of oscillations with decaying amplitude
    let values: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            let x: f64 = (0..8).map(|j| (2f64.powi(j) * 7.0 * t).sin() / 2f64.powf(0.45 * j as f64)).sum();
            let y: f64 = (0..8).map(|j| (2f64.powi(j) * 5.0 * t).cos() / 2f64.powf(0.45 * j as f64)).sum();
            vec![x, y]
        })
        .collect();
    let path = SampledPath::new(times, values)?;

    for p in [1.0, 1.5, 2.0, 2.5, 3.0] {
        println!("|x|_{{{p}-var}} = {:.4}", path.p_variation(p));
    }

    let g = SampledRoughPath::lift(&path, 2.5, None)?;
    let omega = Control::from_pvar(&g);
    let last = g.len() - 1;
    println!("omega(0, T) = {:.4}", omega.omega(0, last));
    println!("omega(0, T/2) + omega(T/2, T) = {:.4}", omega.omega(0, last / 2) + omega.omega(last / 2, last));
    println!("superadditivity defect = {:.2e}", omega.superadditivity_defect());
    println!("omega controls the lift: {}", omega.controls(&g, 1e-12));
    Ok(())
}
