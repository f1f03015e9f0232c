//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use common::*;
use rayon::prelude::*;
use roughkit::funcs::{Builtin, BuiltinKind, FieldMap, LipFunction, PolyMap, SmoothMap};
use roughkit::integrate::{
    compose_integrand, function_expansion, integrate_controlled, rough_integral, young_integral, DominatedPath,
};
use roughkit::oneform::lift_polynomial_one_form;
use roughkit::path::{pure_area_path, signature, Control, SampledPath, SampledRoughPath};
use roughkit::rde::{rescale_problem, solve, solve_unchecked, uniqueness_probe, RdeProblem, SolveOptions};
use roughkit::tensor::{IPrime, TruncatedTensor};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn chen_identity() -> Outcome {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = random_vertices(&mut r, 3, 4, 1.0);
        let mut q = random_vertices(&mut r, 3, 3, 1.0);
        let shift = p.last().unwrap().clone();
        for v in q.iter_mut() {
            v.iter_mut().zip(&shift).for_each(|(a, b)| *a += b);
        }
        let mut joined = p.clone();
        joined.extend(q[1..].iter().cloned());
        let oracle = oracle_signature(&joined, 4);
        let prod = signature(&polyline(&p), 4).try_mul(&signature(&polyline(&q), 4)).unwrap();
        for (k, lv) in oracle.iter().enumerate() {
            worst = worst.max(max_diff(prod.level_slice(k), lv));
        }
    }
    outcome(worst <= 1e-12, format!("max abs err {worst:.3e} (tol 1e-12)"))
}

fn signature_decay() -> Outcome {
    let mut r = rng(2);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let v = random_vertices(&mut r, 3, 6, 1.0);
        let path = polyline(&v);
        let len = path.length();
        let sig = signature(&path, 6);
        let mut fact = 1.0;
        for k in 1..=6 {
            fact *= k as f64;
            let norm = sig.level_slice(k).iter().map(|x| x * x).sum::<f64>().sqrt();
            let bound = len.powi(k as i32) / fact;
            worst = worst.max(norm / bound);
            if norm > bound * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations, max |pi_k| k!/len^k = {worst:.4}"),
    )
}

fn i_prime_identity() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let d = 2 + i % 2;
        let a = signature(&polyline(&random_vertices(&mut r, d, 3, 1.0)), 4);
        let b = signature(&polyline(&random_vertices(&mut r, d, 3, 1.0)), 4);
        let lhs = a.try_mul(&b).unwrap().i_prime();
        let rhs = a
            .i_prime()
            .add(&b.i_prime().left_mul(&a).unwrap())
            .add(&IPrime::from_pair(&a, b.level_slice(1)).unwrap());
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    let unit = TruncatedTensor::one(3, 4).i_prime();
    let unit_zero = unit.max_abs_diff(&IPrime::zeros(3, 4)) == 0.0;
    outcome(
        worst <= 1e-10 && unit_zero,
        format!("residual {worst:.3e} (tol 1e-10), I'(1) = 0: {unit_zero}"),
    )
}

fn closed_lift() -> Outcome {
    let mut r = rng(4);
    // p(x) v = (x1^2 + 0.5 x2) v1 + (x1 x2 - 1) v2, a non-exact quadratic form
    let mut b0 = vec![0.0; 2];
    b0[1] = -1.0;
    let mut b1 = vec![0.0; 4];
    b1[1] = 0.5;
    let mut b2 = vec![0.0; 8];
    b2[0] = 1.0;
    b2[4 + 1] = 1.0;
    let poly = PolyMap::new(2, 2, vec![b0, b1, b2]).unwrap();
    let lift = lift_polynomial_one_form(poly.clone(), 3, vec![0.3, -0.2]).unwrap();
    let mut cocycle = 0.0f64;
    for _ in 0..100 {
        let g: Vec<TruncatedTensor> = (0..3)
            .map(|_| signature(&polyline(&random_vertices(&mut r, 2, 3, 0.8)), 3))
            .collect();
        let (a, b, c) = (&g[0], &g[1], &g[2]);
        let ab = a.try_mul(b).unwrap();
        let bc = b.try_mul(c).unwrap();
        let lhs: Vec<f64> = lift
            .evaluate(a, b)
            .unwrap()
            .iter()
            .zip(lift.evaluate(&ab, c).unwrap())
            .map(|(x, y)| x + y)
            .collect();
        cocycle = cocycle.max(max_diff(&lhs, &lift.evaluate(a, &bc).unwrap()));
    }
    let mut there = random_vertices(&mut r, 2, 5, 1.0);
    let back: Vec<Vec<f64>> = there.iter().rev().skip(1).cloned().collect();
    there.extend(back);
    let g = SampledRoughPath::lift(&polyline(&there), 3.0, None).unwrap();
    let loop_sum = lift.integrate_along(&g).unwrap().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let x_dx = lift_polynomial_one_form(PolyMap::linear(1, 1, vec![1.0]).unwrap(), 2, vec![0.0]).unwrap();
    let g = SampledRoughPath::lift(&polyline(&[vec![0.0], vec![1.0], vec![3.0]]), 2.0, None).unwrap();
    let exact = (x_dx.integrate_along(&g).unwrap()[0] - 4.5).abs();
    outcome(
        cocycle <= 1e-10 && loop_sum <= 1e-10 && exact <= 1e-12,
        format!("cocycle {cocycle:.3e}, loop {loop_sum:.3e}, int x dx err {exact:.3e}"),
    )
}

fn young_agreement() -> Outcome {
    let n = 1024;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    // 2-d smooth curve with a linear non-exact form
    let sigma2 = SampledPath::new(
        times.clone(),
        times
            .iter()
            .map(|&t| vec![(2.0 * t).sin() + 0.3 * t, (3.0 * t).cos() * t])
            .collect(),
    )
    .unwrap();
    let a = vec![0.2, 1.0, -0.7, 0.4];
    let f = LipFunction::new(FieldMap::Poly(PolyMap::linear(2, 2, a.clone()).unwrap()), 2.5).unwrap();
    let g = Arc::new(SampledRoughPath::lift(&sigma2, 1.5, Some(2)).unwrap());
    let rough = rough_integral(&compose_integrand(&f, &DominatedPath::driver(g, sigma2.value(0)).unwrap()).unwrap());
    let tau = SampledPath::new(
        times.clone(),
        sigma2
            .values()
            .iter()
            .map(|x| (0..2).map(|i| (0..2).map(|j| a[i * 2 + j] * x[j]).sum()).collect())
            .collect(),
    )
    .unwrap();
    let young = young_integral(&tau, &sigma2, 1.5, 1.5).unwrap();
    let linear_gap = (rough.endpoint()[0] - young.values.last().unwrap()[0]).abs();
    // 1-d: int cos(sigma) d sigma, Richardson-extrapolated trapezoid
    let sigma1 = SampledPath::new(
        times.clone(),
        times.iter().map(|&t| vec![(3.0 * t).sin() + t * t]).collect(),
    )
    .unwrap();
    let cosf = LipFunction::new(
        FieldMap::Builtin(Builtin::new(BuiltinKind::Cos, 1, 1, vec![1.0], vec![0.0]).unwrap()),
        3.5,
    )
    .unwrap();
    let g1 = Arc::new(SampledRoughPath::lift(&sigma1, 1.5, Some(3)).unwrap());
    let rough1 = rough_integral(&compose_integrand(&cosf, &DominatedPath::driver(g1, sigma1.value(0)).unwrap()).unwrap());
    let tau1 = SampledPath::new(times.clone(), sigma1.values().iter().map(|x| vec![x[0].cos()]).collect()).unwrap();
    let young1 = young_integral(&tau1, &sigma1, 1.5, 1.5).unwrap();
    let cos_gap = (rough1.endpoint()[0] - young1.extrapolated[0]).abs();
    // int sigma d sigma against the closed form
    let idf = LipFunction::new(FieldMap::Poly(PolyMap::linear(1, 1, vec![1.0]).unwrap()), 2.5).unwrap();
    let g1 = Arc::new(SampledRoughPath::lift(&sigma1, 1.5, Some(2)).unwrap());
    let rs = rough_integral(&compose_integrand(&idf, &DominatedPath::driver(g1, sigma1.value(0)).unwrap()).unwrap());
    let ys = young_integral(&sigma1, &sigma1, 1.5, 1.5).unwrap();
    let (s0, s1) = (sigma1.value(0)[0], sigma1.value(n)[0]);
    let closed = 0.5 * (s1 * s1 - s0 * s0);
    let closed_err = (rs.endpoint()[0] - closed).abs().max((ys.values[n][0] - closed).abs());
    outcome(
        linear_gap <= 1e-8 && cos_gap <= 1e-8 && closed_err <= 1e-10,
        format!("linear {linear_gap:.3e}, cos {cos_gap:.3e} (tol 1e-8); int s ds {closed_err:.3e} (tol 1e-10)"),
    )
}

/// Largest quotient `|(eta_t - eta_s)(g_t, .)|_k / omega^{(gamma + 1 - k)/p}`,
/// relative to `|beta|_gamma`, for the integral of `phi = f(y)` whose
/// expansion `beta` has regularity `gamma = gamma_f - 1`.
fn integrable_constant(f: &LipFunction, y: &DominatedPath) -> f64 {
    let g = y.form.base();
    let omega = Control::from_pvar(g);
    let gamma = f.gamma() - 1.0;
    let phi: Vec<Vec<f64>> = y.values.iter().map(|v| f.eval(v).unwrap()).collect();
    let beta = function_expansion(f, y, g.level() - 1).unwrap();
    let eta = integrate_controlled(&phi, &beta).unwrap();
    let holder = eta.operator_norm(gamma + 1.0, &omega).unwrap().holder;
    let beta_norm = beta.operator_norm(gamma, &omega).unwrap().value;
    holder.iter().cloned().fold(0.0, f64::max) / beta_norm
}

fn controlled_integrable() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let sinf = LipFunction::new(
        FieldMap::Builtin(Builtin::new(BuiltinKind::Sin, 2, 2, vec![1.0, 0.5, -0.3, 1.0], vec![0.1, 0.0]).unwrap()),
        2.5,
    )
    .unwrap();
    let curve = |n: usize| {
        let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        SampledPath::new(
            times.clone(),
            times.iter().map(|&t| vec![(4.0 * t).sin(), t * t - (2.0 * t).cos()]).collect(),
        )
        .unwrap()
    };
    let zigzag_vertices = random_vertices(&mut rng(6), 2, 40, 0.15);
    let zigzag = |n: usize| SampledPath::polyline(&zigzag_vertices, n / 40).unwrap();
    let fixtures: Vec<(&str, &dyn Fn(usize) -> SampledPath)> = vec![("smooth", &curve), ("zigzag", &zigzag)];
    for (name, make) in fixtures {
        let c: Vec<f64> = [80, 160, 320]
            .iter()
            .map(|&n| {
                let path = make(n);
                let g = Arc::new(SampledRoughPath::lift(&path, 2.2, None).unwrap());
                integrable_constant(&sinf, &DominatedPath::driver(g, path.value(0)).unwrap())
            })
            .collect();
        let ok = c.iter().all(|x| x.is_finite()) && c[2] <= 1.05 * c[1];
        pass &= ok;
        lines.push(format!("{name} C = {:.3} / {:.3} / {:.3}", c[0], c[1], c[2]));
    }
    // controlled path = solution of the pure-area equation
    let (f, _, _) = sl2_field(3.0);
    let c: Vec<f64> = [60, 120, 240]
        .iter()
        .map(|&n| {
            let g = pure_area_path(0.5, n, 2.5).unwrap();
            let problem = RdeProblem::new(f.clone(), g, vec![1.0, 1.0]).unwrap();
            let y = solve(&problem, &SolveOptions::default()).unwrap().path;
            integrable_constant(&f, &y)
        })
        .collect();
    pass &= c.iter().all(|x| x.is_finite() && *x > 0.0) && c[2] <= 1.05 * c[1];
    lines.push(format!("pure-area solution C = {:.3} / {:.3} / {:.3}", c[0], c[1], c[2]));
    outcome(pass, lines.join(", "))
}

fn exp_problem(n: usize) -> RdeProblem {
    let g = SampledRoughPath::lift(&SampledPath::polyline(&exp_vertices(), n).unwrap(), 3.0, None).unwrap();
    RdeProblem::new(exp_field(), g, vec![1.0]).unwrap()
}

fn cubic_problem(n: usize) -> RdeProblem {
    let g = SampledRoughPath::lift(&SampledPath::polyline(&cubic_vertices(), n).unwrap(), 3.0, None).unwrap();
    RdeProblem::new(cubic_field(), g, vec![0.5, -0.2]).unwrap()
}

fn rde_classical() -> Outcome {
    let sol = solve(&exp_problem(200), &SolveOptions::default()).unwrap();
    let exact = 0.6f64.exp();
    let exp_err = (sol.endpoint()[0] - exact).abs() / exact;
    let sol = solve(&cubic_problem(100), &SolveOptions::default()).unwrap();
    let oracle = rk4_polyline(&cubic_classical, &cubic_vertices(), &[0.5, -0.2], 4000);
    let cubic_err = rel_err(sol.endpoint(), &oracle);
    outcome(
        exp_err <= 1e-8 && cubic_err <= 1e-6,
        format!("exponential rel err {exp_err:.3e} (tol 1e-8), cubic vs RK4 {cubic_err:.3e} (tol 1e-6)"),
    )
}

fn pure_area_flow() -> Outcome {
    let (f, a1, a2) = sl2_field(3.0);
    let area = 0.5;
    let xi = vec![1.0, 1.0];
    let g = pure_area_path(area, 250, 2.5).unwrap();
    let sol = solve(&RdeProblem::new(f, g, xi.clone()).unwrap(), &SolveOptions::default()).unwrap();
    let oracle = lollipop_flow(&a1, &a2, &xi, area, 4000, 12);
    let coarse = lollipop_flow(&a1, &a2, &xi, area, 2000, 12);
    let oracle_spread = rel_err(&coarse, &oracle);
    let err = rel_err(sol.endpoint(), &oracle);
    outcome(
        err <= 1e-3 && oracle_spread <= 1e-4,
        format!("rel err {err:.3e} (tol 1e-3), oracle self-spread {oracle_spread:.1e}"),
    )
}

fn decay_certificate() -> Outcome {
    let opts = SolveOptions {
        tol: 0.0,
        max_iter: 13,
        ..SolveOptions::default()
    };
    let mut lines = Vec::new();
    let mut pass = true;
    let fixtures: [(&str, fn(usize) -> RdeProblem, usize); 2] = [("exp", exp_problem, 100), ("cubic", cubic_problem, 50)];
    for (name, make, n) in fixtures {
        let coarse = solve_unchecked(&make(n), &opts, None).unwrap();
        let fine = solve_unchecked(&make(2 * n), &opts, None).unwrap();
        let r = &coarse.report;
        let from = r.floor_p + 2;
        let decreasing = r.ratios_decreasing_from(from) && fine.report.ratios_decreasing_from(from);
        let last = *r.deltas.last().unwrap();
        let (c1, c2) = (r.fitted_c, fine.report.fitted_c);
        let stable = c1.is_finite() && c1 > 0.0 && ((c2 - c1) / c1).abs() <= 0.2;
        let ok = decreasing && last <= 1e-8 && stable && r.deltas.len() == 13;
        pass &= ok;
        lines.push(format!(
            "{name}: Delta_12 {last:.2e}, ratios decreasing {decreasing}, C {c1:.4} -> {c2:.4}"
        ));
    }
    outcome(pass, lines.join("; "))
}

fn uniqueness() -> Outcome {
    let problem = cubic_problem(50);
    let a = solve(&problem, &SolveOptions::default()).unwrap();
    let (hat, c) = rescale_problem(&problem, 0.5, 2.0).unwrap();
    let opts = SolveOptions {
        tol: 0.0,
        max_iter: a.iterations + 4,
        rescale: 2.0,
        ..SolveOptions::default()
    };
    let b = solve_unchecked(&hat, &opts, None).unwrap();
    let back_form = b.path.form.rescaled(1.0 / c, problem.driver().clone()).unwrap();
    let b_path = DominatedPath::new(b.path.values.clone(), back_form).unwrap();
    let report = uniqueness_probe(&problem, &a.path, &b_path, 10, 1e-8).unwrap();
    let bound10 = report.bounds[9];
    let decreasing = report.rho_sup.windows(2).skip(2).all(|w| w[1] < w[0]);
    outcome(
        report.sup_distance <= 1e-8 && bound10 < 1e-10 && decreasing,
        format!(
            "sup distance {:.3e} (tol 1e-8), rho bound at n=10 {bound10:.3e} (tol 1e-10), |rho^10| {:.3e}, c = {c:.3}",
            report.sup_distance,
            report.rho_sup[9]
        ),
    )
}

fn continuity() -> Outcome {
    let n = 30;
    let base = cubic_vertices();
    let bump: Vec<Vec<f64>> = (0..base.len())
        .map(|i| vec![(i as f64 * 1.7).sin(), (i as f64 * 0.9).cos() - 0.6])
        .collect();
    let lift = |v: &[Vec<f64>]| SampledRoughPath::lift(&SampledPath::polyline(v, n).unwrap(), 3.0, None).unwrap();
    let reference = lift(&base);
    let deltas = [1e-1, 1e-2, 1e-3];
    let perturbed: Vec<SampledRoughPath> = deltas
        .iter()
        .map(|&d| {
            let v: Vec<Vec<f64>> = base
                .iter()
                .zip(&bump)
                .enumerate()
                .map(|(i, (b, w))| if i == 0 { b.clone() } else { vec![b[0] + d * w[0], b[1] + d * w[1]] })
                .collect();
            lift(&v)
        })
        .collect();
    let report = roughkit::rde::continuity_probe(
        &cubic_field(),
        &[0.5, -0.2],
        &reference,
        &perturbed,
        &SolveOptions::default(),
    )
    .unwrap();
    let s = &report.solution_distances;
    let orders: Vec<f64> = s.windows(2).map(|w| (w[0] / w[1]).log10()).collect();
    let pass = s.windows(2).all(|w| w[1] < w[0]) && orders.iter().all(|&o| o >= 0.9);
    outcome(
        pass,
        format!(
            "sup distances {:?}, orders in delta {:?}",
            s.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>(),
            orders.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn golden_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_roughkit");
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");
    let scratch = tempfile::tempdir().expect("temp dir");
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for case in golden_cases() {
        for (run, threads) in [None, None, Some("1"), Some("3")].into_iter().enumerate() {
            let out_dir = scratch.path().join(format!("{}-{run}", case.golden));
            std::fs::create_dir_all(&out_dir).unwrap();
            let out_str = out_dir.to_str().unwrap();
            let mut cmd = Command::new(bin);
            if let Some(t) = threads {
                cmd.args(["--threads", t]);
            }
            cmd.args(case.args.iter().map(|a| a.replace("{data}", data).replace("{out}", out_str)));
            let out = cmd.output().expect("binary runs");
            let mut produced = vec![(case.golden.to_string(), out.stdout)];
            for f in case.files {
                produced.push((f.to_string(), std::fs::read(out_dir.join(f)).unwrap_or_default()));
            }
            for (name, bytes) in produced {
                let golden = std::fs::read(format!("{data}/golden/{name}")).expect("golden file present");
                compared += 1;
                if bytes != golden || out.status.code() != Some(0) {
                    mismatches.push(format!("{name} (threads {threads:?})"));
                }
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{compared} outputs compared byte-for-byte, mismatches: {mismatches:?}"),
    )
}

struct GoldenCase {
    golden: &'static str,
    args: &'static [&'static str],
    /// Extra output files written into `{out}`, compared against goldens of the same name.
    files: &'static [&'static str],
}

fn golden_cases() -> Vec<GoldenCase> {
    vec![
        GoldenCase {
            golden: "signature_spiral.json",
            args: &["signature", "{data}/spiral.csv", "--level", "4"],
            files: &[],
        },
        GoldenCase {
            golden: "integrate_gradient.json",
            args: &[
                "integrate", "{data}/spiral.csv", "--form", "{data}/form_gradient.json", "--p", "2.5", "--gamma", "3.5",
                "--level", "3",
            ],
            files: &[],
        },
        GoldenCase {
            golden: "solve_exp.json",
            args: &[
                "solve", "{data}/exp_driver.csv", "--field", "{data}/field_exp.json", "--xi", "1", "--p", "3", "--gamma",
                "3.5", "--solution", "{out}/solve_exp_solution.csv", "--decay", "{out}/solve_exp_decay.csv",
            ],
            files: &["solve_exp_solution.csv", "solve_exp_decay.csv"],
        },
        GoldenCase {
            golden: "solve_area.json",
            args: &[
                "solve", "--pure-area", "0.5", "--samples", "120", "--field", "{data}/field_sl2.json", "--xi", "1,1", "--p",
                "2.5", "--gamma", "3",
            ],
            files: &[],
        },
    ]
}

fn main() {
    let start = Instant::now();
    let criteria: Vec<(usize, &str, fn() -> Outcome)> = vec![
        (1, "Chen identity", chen_identity),
        (2, "signature factorial decay", signature_decay),
        (3, "I' group identity", i_prime_identity),
        (4, "closed lift", closed_lift),
        (5, "Young/rough agreement", young_agreement),
        (6, "controlled path is integrable", controlled_integrable),
        (7, "RDE vs classical", rde_classical),
        (8, "pure-area bracket flow", pure_area_flow),
        (9, "factorial decay certificate", decay_certificate),
        (10, "uniqueness probe", uniqueness),
        (11, "continuity in the driver", continuity),
        (12, "CLI determinism", golden_determinism),
    ];
    let results: Vec<(usize, &str, Outcome, f64)> = criteria
        .into_par_iter()
        .map(|(id, name, run)| {
            let t = Instant::now();
            let o = std::panic::catch_unwind(run).unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panicked: {msg}"))
            });
            (id, name, o, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut failed = 0;
    for (id, name, o, secs) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {id:>2} {tag} {name} [{secs:.1}s]: {}", o.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
