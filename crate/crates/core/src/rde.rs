//! Rough differential equations `dy = f(y) dx` solved by Picard iteration
//! on one-forms, with factorial-decay diagnostics and the uniqueness and
//! continuity probes.

use std::sync::Arc;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::funcs::{divide, floor_strict, DivisionMap, LipFunction, SmoothMap};
use crate::integrate::{
    compose_integrand, function_expansion, integrate_controlled, product_expansion, rough_integral,
    DominatedPath,
};
use crate::oneform::OneFormPath;
use crate::path::{rough_distance, Control, SampledRoughPath};

/// `dy = f(y) dx`, `y_0 = xi`, with `f: R^m -> L(R^d, R^m)`.
#[derive(Clone, Debug)]
pub struct RdeProblem {
    field: LipFunction,
    driver: Arc<SampledRoughPath>,
    xi: Vec<f64>,
    control: Arc<Control>,
    warnings: Vec<String>,
}

impl RdeProblem {
    /// Validates shapes and regularity; the control defaults to the
    /// p-variation control of the driver.
    pub fn new(field: LipFunction, driver: SampledRoughPath, xi: Vec<f64>) -> Result<Self> {
        let control = Control::from_pvar(&driver);
        Self::with_control(field, Arc::new(driver), xi, Arc::new(control))
    }

    pub fn with_control(
        field: LipFunction,
        driver: Arc<SampledRoughPath>,
        xi: Vec<f64>,
        control: Arc<Control>,
    ) -> Result<Self> {
        let m = xi.len();
        let d = driver.dim();
        if field.in_dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: field.in_dim(),
            });
        }
        if field.out_dim() != m * d {
            return Err(Error::DimensionMismatch {
                expected: m * d,
                found: field.out_dim(),
            });
        }
        if control.len() != driver.len() {
            return Err(Error::DimensionMismatch {
                expected: driver.len(),
                found: control.len(),
            });
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial value".into()));
        }
        let (p, gamma) = (driver.p(), field.gamma());
        let mut warnings = Vec::new();
        if gamma <= p - 1.0 {
            return Err(Error::Regularity(format!(
                "gamma = {gamma} must exceed p - 1 = {} for the integral to be defined",
                p - 1.0
            )));
        }
        if gamma <= p {
            warnings.push(format!(
                "gamma = {gamma} <= p = {p}: existence and uniqueness are not certified"
            ));
        }
        Ok(RdeProblem {
            field,
            driver,
            xi,
            control,
            warnings,
        })
    }

    pub fn field(&self) -> &LipFunction {
        &self.field
    }

    pub fn driver(&self) -> &Arc<SampledRoughPath> {
        &self.driver
    }

    pub fn control(&self) -> &Arc<Control> {
        &self.control
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// State dimension `m`.
    pub fn m(&self) -> usize {
        self.xi.len()
    }

    pub fn p(&self) -> f64 {
        self.driver.p()
    }

    pub fn gamma(&self) -> f64 {
        self.field.gamma()
    }

    /// Constant path `xi` with zero one-form: the Picard starting point.
    pub fn initial_iterate(&self) -> DominatedPath {
        let form = OneFormPath::zeros(self.driver.clone(), self.m(), self.driver.level());
        DominatedPath::new(vec![self.xi.clone(); self.driver.len()], form).expect("consistent shapes")
    }
}

/// One Picard step: `zeta' = form of int f(y) dx`, `y' = xi + int zeta'`.
pub fn picard_step(problem: &RdeProblem, y: &DominatedPath) -> Result<DominatedPath> {
    let form = compose_integrand(&problem.field, y)?;
    let integral = rough_integral(&form);
    let values = integral
        .values
        .iter()
        .map(|v| v.iter().zip(&problem.xi).map(|(a, b)| a + b).collect())
        .collect();
    DominatedPath::new(values, form)
}

/// `f_hat = f / c`, `g_hat = delta_c g` with `c = |f|_{Lip} / lambda`
/// (the norm bounded on the ball of the given radius). The solution path is
/// unchanged; returns the rescaled problem and `c`.
pub fn rescale_problem(problem: &RdeProblem, lambda: f64, radius: f64) -> Result<(RdeProblem, f64)> {
    if !(lambda > 0.0) {
        return Err(Error::param("target norm must be positive"));
    }
    let norm = problem.field.lip_norm_bound(radius);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::param("field norm must be positive and finite"));
    }
    let c = norm / lambda;
    Ok((rescale_by(problem, c)?, c))
}

/// Rescale by an explicit factor `c`.
pub fn rescale_by(problem: &RdeProblem, c: f64) -> Result<RdeProblem> {
    let field = problem.field.scaled(1.0 / c);
    let driver = Arc::new(problem.driver.dilate(c));
    let control = Arc::new(problem.control.scaled(c.powf(problem.p())));
    RdeProblem::with_control(field, driver, problem.xi.clone(), control)
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Stop once `Delta_n` drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Double the rescaling factor when `Delta` grows twice in a row.
    pub auto_rescale: bool,
    pub max_rescales: usize,
    /// Initial rescaling factor `c` for the norms.
    pub rescale: f64,
    /// Divergence is declared when `Delta` exceeds this.
    pub norm_cap: f64,
    pub keep_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 50,
            auto_rescale: true,
            max_rescales: 4,
            rescale: 1.0,
            norm_cap: 1e12,
            keep_iterates: false,
        }
    }
}

/// Difference norms and the factorial model fitted to them.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub p: f64,
    pub floor_p: usize,
    pub gamma: f64,
    /// Rescaling factor the norms were measured with.
    pub rescale_c: f64,
    /// `Delta_n = |zeta^{n+1} - zeta^n|_gamma`, `n = 0, 1, ..`.
    pub deltas: Vec<f64>,
    /// `Delta_{n+1} / Delta_n`.
    pub ratios: Vec<f64>,
    /// Smallest `C` with `Delta_n <= C^{n-[p]} / ((n-[p])/p)!` for all `n > [p]`.
    pub fitted_c: f64,
    /// The fitted bound at each `n` (`None` for `n <= [p]`).
    pub bounds: Vec<Option<f64>>,
    /// Sum of the fitted bound beyond the last iteration.
    pub tail_bound: f64,
}

/// `C^e / Gamma(e/p + 1)`.
fn factorial_bound(c: f64, e: usize, p: f64) -> f64 {
    ((e as f64) * c.ln() - ln_gamma(e as f64 / p + 1.0)).exp()
}

impl DecayReport {
    pub fn from_deltas(deltas: Vec<f64>, p: f64, gamma: f64, rescale_c: f64) -> Self {
        Self::with_offset(deltas, p, gamma, rescale_c, p.floor() as usize)
    }

    /// Fit `Delta_n <= C^{n-offset} / ((n-offset)/p)!` over `n > offset`.
    pub fn with_offset(deltas: Vec<f64>, p: f64, gamma: f64, rescale_c: f64, offset: usize) -> Self {
        let ratios = deltas
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::NAN })
            .collect();
        let dmax = deltas.iter().cloned().fold(0.0, f64::max);
        let floor = 1e-14 * dmax;
        let mut fitted = 0.0f64;
        for (n, &dn) in deltas.iter().enumerate() {
            if n <= offset || !(dn > floor) {
                continue;
            }
            let e = (n - offset) as f64;
            let c = ((dn.ln() + ln_gamma(e / p + 1.0)) / e).exp();
            fitted = fitted.max(c);
        }
        let bounds = (0..deltas.len())
            .map(|n| (n > offset).then(|| factorial_bound(fitted, n - offset, p)))
            .collect();
        let mut tail = 0.0;
        if fitted > 0.0 {
            let mut n = deltas.len().max(offset + 1);
            loop {
                let b = factorial_bound(fitted, n - offset, p);
                tail += b;
                n += 1;
                if b < 1e-18 * tail.max(1e-300) || n > deltas.len() + 10_000 {
                    break;
                }
            }
        }
        DecayReport {
            p,
            floor_p: offset,
            gamma,
            rescale_c,
            deltas,
            ratios,
            fitted_c: fitted,
            bounds,
            tail_bound: tail,
        }
    }

    /// Are the ratios non-increasing from index `from` on?
    pub fn ratios_decreasing_from(&self, from: usize) -> bool {
        self.ratios
            .iter()
            .skip(from)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] <= w[0])
    }
}

/// Domination data of the solution one-form.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    /// `sup_t |zeta_t(g_t, .)|`.
    #[serde(rename = "M")]
    pub m: f64,
    /// `gamma / p`.
    pub theta: f64,
    /// Smallest `lambda` such that the differences are bounded by `(lambda omega)^{theta - k/p}`.
    pub control_scale: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub path: DominatedPath,
    pub report: DecayReport,
    pub iterations: usize,
    pub converged: bool,
    pub fixed_point_residual: f64,
    pub certificate: Certificate,
    pub warnings: Vec<String>,
    /// All iterates `y^0, y^1, ..` when requested.
    pub iterates: Vec<DominatedPath>,
}

impl Solution {
    pub fn values(&self) -> &[Vec<f64>] {
        &self.path.values
    }

    pub fn endpoint(&self) -> &[f64] {
        self.path.values.last().expect("non-empty grid")
    }
}

/// Norm geometry for a rescaling factor `c`.
struct Geometry {
    c: f64,
    base: Arc<SampledRoughPath>,
    omega: Control,
}

impl Geometry {
    fn new(problem: &RdeProblem, c: f64) -> Self {
        if c == 1.0 {
            return Geometry {
                c,
                base: problem.driver.clone(),
                omega: (*problem.control).clone(),
            };
        }
        Geometry {
            c,
            base: Arc::new(problem.driver.dilate(c)),
            omega: problem.control.scaled(c.powf(problem.p())),
        }
    }

    fn delta(&self, a: &OneFormPath, b: &OneFormPath, gamma: f64) -> Result<f64> {
        let diff = a.sub(b)?;
        let diff = if self.c == 1.0 {
            diff
        } else {
            diff.rescaled(self.c, self.base.clone())?
        };
        Ok(diff.operator_norm(gamma, &self.omega)?.value)
    }
}

/// Run Picard iteration, returning the solution and diagnostics whether or
/// not the tolerance was reached.
pub fn solve_unchecked(problem: &RdeProblem, opts: &SolveOptions, warm: Option<DominatedPath>) -> Result<Solution> {
    let gamma = problem.gamma();
    let mut geom = Geometry::new(problem, opts.rescale);
    let mut rescales = 0;
    let mut history = vec![warm.unwrap_or_else(|| problem.initial_iterate())];
    let mut deltas: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut warnings = problem.warnings.clone();
    while deltas.len() < opts.max_iter {
        let next = picard_step(problem, history.last().unwrap())?;
        let delta = geom.delta(&next.form, &history.last().unwrap().form, gamma)?;
        history.push(next);
        deltas.push(delta);
        if !delta.is_finite() || delta > opts.norm_cap {
            warnings.push(format!(
                "operator norm {delta:e} exceeds the cap; try rescaling the field or shortening the driver"
            ));
            break;
        }
        if delta < opts.tol {
            converged = true;
            break;
        }
        let n = deltas.len();
        if opts.auto_rescale
            && rescales < opts.max_rescales
            && n >= 3
            && deltas[n - 1] > deltas[n - 2]
            && deltas[n - 2] > deltas[n - 3]
        {
            rescales += 1;
            geom = Geometry::new(problem, geom.c * 2.0);
            deltas = history
                .windows(2)
                .map(|w| geom.delta(&w[1].form, &w[0].form, gamma))
                .collect::<Result<_>>()?;
            if let Some(&last) = deltas.last() {
                if last < opts.tol {
                    converged = true;
                    break;
                }
            }
        }
    }
    let last = history.last().unwrap().clone();
    let check = picard_step(problem, &last)?;
    let fixed_point_residual = check.sup_distance(&last);
    let omega = &problem.control;
    let theta = gamma / problem.p();
    let certificate = Certificate {
        m: last.form.sup_norm_from(0),
        theta,
        control_scale: last.form.control_scale(theta, omega)?,
    };
    let report = DecayReport::from_deltas(deltas, problem.p(), gamma, geom.c);
    let iterations = report.deltas.len();
    Ok(Solution {
        path: last,
        report,
        iterations,
        converged,
        fixed_point_residual,
        certificate,
        warnings,
        iterates: if opts.keep_iterates { history } else { Vec::new() },
    })
}

/// Picard iteration to tolerance; non-convergence is an error.
pub fn solve(problem: &RdeProblem, opts: &SolveOptions) -> Result<Solution> {
    let sol = solve_unchecked(problem, opts, None)?;
    if !sol.converged {
        return Err(Error::NoConvergence {
            iterations: sol.iterations,
            last_delta: sol.report.deltas.last().cloned().unwrap_or(f64::NAN),
            hint: "; consider rescaling the field or refining the driver".into(),
        });
    }
    Ok(sol)
}

/// Picard iteration started from a given dominated path instead of `xi`.
pub fn solve_from(problem: &RdeProblem, opts: &SolveOptions, start: DominatedPath) -> Result<Solution> {
    let sol = solve_unchecked(problem, opts, Some(start))?;
    if !sol.converged {
        return Err(Error::NoConvergence {
            iterations: sol.iterations,
            last_delta: sol.report.deltas.last().cloned().unwrap_or(f64::NAN),
            hint: String::new(),
        });
    }
    Ok(sol)
}

/// Run exactly `n` Picard steps from `xi`, returning `y^0, .., y^n`.
pub fn picard_iterates(problem: &RdeProblem, n: usize) -> Result<Vec<DominatedPath>> {
    let mut out = vec![problem.initial_iterate()];
    for _ in 0..n {
        let next = picard_step(problem, out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

/// Step-by-step view of the Picard iteration.
#[derive(Clone, Debug)]
pub struct PicardState {
    /// Number of steps taken.
    pub n: usize,
    /// Current iterate `y^n` with its form `zeta^n`.
    pub current: DominatedPath,
    /// `Delta_k` for `k < n`, measured at the rescaling factor `rescale_c`.
    pub deltas: Vec<f64>,
    pub rescale_c: f64,
}

impl PicardState {
    /// `y^0 = xi`, `zeta^0 = 0`.
    pub fn new(problem: &RdeProblem) -> Self {
        PicardState {
            n: 0,
            current: problem.initial_iterate(),
            deltas: Vec::new(),
            rescale_c: 1.0,
        }
    }

    /// Advance one step; returns the new `Delta`.
    pub fn advance(&mut self, problem: &RdeProblem) -> Result<f64> {
        let geom = Geometry::new(problem, self.rescale_c);
        let next = picard_step(problem, &self.current)?;
        let delta = geom.delta(&next.form, &self.current.form, problem.gamma())?;
        self.current = next;
        self.deltas.push(delta);
        self.n += 1;
        Ok(delta)
    }
}

/// `h(y^n, y^{n-1})` along the grid with its expansion form.
fn division_along(h: &DivisionMap, a: &DominatedPath, b: &DominatedPath, depth: usize) -> Result<DominatedPath> {
    let y = a.stack(b)?;
    let values = y.values.iter().map(|v| h.eval(v)).collect::<Result<_>>()?;
    let form = if depth == 0 {
        OneFormPath::zeros(y.form.base().clone(), h.out_dim(), 0)
    } else {
        function_expansion(h, &y, depth)?
    };
    DominatedPath::new(values, form)
}

/// `int_s^. h q dx` with `q` an `m x cols` dominated path vanishing before `s`.
fn product_integral(
    h: &DominatedPath,
    q: &DominatedPath,
    m: usize,
    cols: usize,
    start: usize,
) -> Result<DominatedPath> {
    let base = h.form.base().clone();
    let depth = base.level().saturating_sub(1);
    let (phi, expansion) = product_expansion(h, q, m, cols, depth)?;
    let form = integrate_controlled(&phi, &expansion)?;
    let values = cumulative_from(&form, start);
    DominatedPath::new(values, form)
}

fn cumulative_from(form: &OneFormPath, start: usize) -> Vec<Vec<f64>> {
    let w = form.out_dim();
    let mut values = vec![vec![0.0; w]; form.len()];
    let mut acc = vec![crate::linalg::CompensatedSum::default(); w];
    for t in start..form.len() - 1 {
        for (a, v) in acc.iter_mut().zip(form.step(t)) {
            a.add(v);
        }
        values[t + 1] = acc.iter().map(|a| a.value()).collect();
    }
    values
}

fn identity_path(base: &Arc<SampledRoughPath>, m: usize, start: usize) -> DominatedPath {
    let mut ident = vec![0.0; m * m];
    for i in 0..m {
        ident[i * m + i] = 1.0;
    }
    let values = (0..base.len())
        .map(|t| if t >= start { ident.clone() } else { vec![0.0; m * m] })
        .collect();
    let form = OneFormPath::zeros(base.clone(), m * m, base.level().saturating_sub(1));
    DominatedPath::new(values, form).expect("consistent shapes")
}

/// Values and forms of `eta^{l,n}_{s,.}` for a set of start indices.
#[derive(Clone, Debug)]
pub struct EtaTable {
    pub l_max: usize,
    pub n_max: usize,
    pub starts: Vec<usize>,
    m: usize,
    /// `paths[si][(l, n)]`; `l = 0` entries are vectors, others `m x m`.
    paths: Vec<std::collections::BTreeMap<(usize, usize), DominatedPath>>,
    pub summary: Vec<EtaEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaEntry {
    pub l: usize,
    pub n: usize,
    /// `max_{s,t} |eta^{l,n}_{s,t}|`.
    pub max_norm: f64,
    /// Smallest `M` with `|eta_{s,t}| <= (M omega)^e / (beta e!)`, `e = (n-l+1)/p`, `beta = 3p`.
    pub fitted_m: f64,
    /// `|beta^{l,n}_{s,.}|_gamma` for the first start index.
    pub form_norm: f64,
}

impl EtaTable {
    /// `eta^{l,n}_{s,t}` (flattened) for start `s` (must be one of the starts).
    pub fn value(&self, l: usize, n: usize, s: usize, t: usize) -> Option<&[f64]> {
        let si = self.starts.iter().position(|&x| x == s)?;
        self.paths[si].get(&(l, n)).map(|p| p.values[t].as_slice())
    }

    pub fn path(&self, l: usize, n: usize, s: usize) -> Option<&DominatedPath> {
        let si = self.starts.iter().position(|&x| x == s)?;
        self.paths[si].get(&(l, n))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Fitted constant for `|beta^{l,n}|_gamma <= C^{n-[p]-l} / ((n-[p]-l)/p)!`.
    pub fn fitted_form_constant(&self, p: f64) -> f64 {
        let fp = p.floor() as usize;
        let mut c = 0.0f64;
        for e in &self.summary {
            if e.n < e.l + fp + 1 || !(e.form_norm > 0.0) {
                continue;
            }
            let k = (e.n - e.l - fp) as f64;
            c = c.max(((e.form_norm.ln() + ln_gamma(k / p + 1.0)) / k).exp());
        }
        c
    }
}

/// Build `eta^{l,n}` from Picard iterates `y^0..y^{n_max}` (at least `n_max + 1`
/// of them) for `0 <= l <= min(l_max, n) <= n <= n_max`.
pub fn eta_recursion(
    problem: &RdeProblem,
    iterates: &[DominatedPath],
    l_max: usize,
    n_max: usize,
    starts: &[usize],
) -> Result<EtaTable> {
    if iterates.len() < n_max + 1 {
        return Err(Error::param(format!(
            "eta recursion to n = {n_max} needs {} iterates, got {}",
            n_max + 1,
            iterates.len()
        )));
    }
    if n_max > 170 {
        return Err(Error::param("n_max above 170 overflows the factorial bounds"));
    }
    let base = problem.driver.clone();
    let (m, d) = (problem.m(), base.dim());
    let depth = base.level().saturating_sub(1);
    let h = divide(&problem.field)?;
    let p = problem.p();
    let gamma = problem.gamma();
    let hs: Vec<Option<DominatedPath>> = (0..=n_max)
        .map(|n| {
            if n == 0 {
                Ok(None)
            } else {
                division_along(&h, &iterates[n], &iterates[n - 1], depth).map(Some)
            }
        })
        .collect::<Result<_>>()?;
    let fxi = problem.field.eval(&problem.xi)?;
    let mut paths = Vec::with_capacity(starts.len());
    for &s in starts {
        if s >= base.len() {
            return Err(Error::param(format!("start index {s} outside the grid")));
        }
        let mut map = std::collections::BTreeMap::new();
        // eta^{0,0}_{s,t} = f(xi)(x_t - x_s)
        let x_s = base.point(s).tensor().level_slice(1).to_vec();
        let values = (0..base.len())
            .map(|t| {
                if t < s {
                    return vec![0.0; m];
                }
                let x_t = base.point(t).tensor().level_slice(1);
                (0..m)
                    .map(|o| (0..d).map(|i| fxi[o * d + i] * (x_t[i] - x_s[i])).sum())
                    .collect()
            })
            .collect();
        let form = OneFormPath::from_fn(base.clone(), m, base.level(), |t| {
            let mut lv: Vec<Vec<f64>> = (1..=base.level())
                .map(|k| vec![0.0; m * crate::tensor::level_size(d, k)])
                .collect();
            if t >= s {
                lv[0].copy_from_slice(&fxi);
            }
            Ok(lv)
        })?;
        map.insert((0, 0), DominatedPath::new(values, form)?);
        for l in 0..=l_max.min(n_max) {
            if l >= 1 {
                let hl = hs[l].as_ref().expect("l >= 1");
                let q = identity_path(&base, m, s);
                map.insert((l, l), product_integral(hl, &q, m, m, s)?);
            }
            let cols = if l == 0 { 1 } else { m };
            for n in l..n_max {
                let hn = hs[n + 1].as_ref().expect("n + 1 >= 1");
                let prev = &map[&(l, n)];
                let next = product_integral(hn, prev, m, cols, s)?;
                map.insert((l, n + 1), next);
            }
        }
        paths.push(map);
    }
    let omega = &problem.control;
    let beta_const = 3.0 * p;
    let mut summary = Vec::new();
    for l in 0..=l_max.min(n_max) {
        for n in l..=n_max {
            let e = (n - l + 1) as f64 / p;
            let mut max_norm = 0.0f64;
            let mut fitted_m = 0.0f64;
            for (si, &s) in starts.iter().enumerate() {
                let path = &paths[si][&(l, n)];
                for t in s + 1..base.len() {
                    let v = crate::tensor::level_norm(&path.values[t]);
                    max_norm = max_norm.max(v);
                    let w = omega.omega(s, t);
                    if v > 0.0 && w > 0.0 {
                        let mm = ((v.ln() + beta_const.ln() + ln_gamma(e + 1.0)) / e).exp() / w;
                        fitted_m = fitted_m.max(mm);
                    }
                }
            }
            let s0 = starts[0];
            let form_norm = paths[0][&(l, n)].form.operator_norm_from(gamma, omega, s0)?.value;
            summary.push(EtaEntry {
                l,
                n,
                max_norm,
                fitted_m,
                form_norm,
            });
        }
    }
    Ok(EtaTable {
        l_max,
        n_max,
        starts: starts.to_vec(),
        m,
        paths,
        summary,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    /// `sup_t |rho^n_t|`, `n = 1..`.
    pub rho_sup: Vec<f64>,
    /// `|beta^{rho^n}|_gamma`.
    pub rho_form_norms: Vec<f64>,
    /// Implied bound on `sup |y - y_hat|`: the dominated norm of `rho^n`
    /// times the dominated norm of `y - y_hat`.
    pub bounds: Vec<f64>,
    pub sup_distance: f64,
    /// Dominated norm of `y - y_hat`.
    pub difference_norm: f64,
    pub equal: bool,
}

/// Check that a candidate is a dominated solution: starts at `xi`,
/// reproduces its values from its form, and is a Picard fixed point.
pub fn check_solution(problem: &RdeProblem, y: &DominatedPath, tol: f64) -> Result<()> {
    let start = y.values[0]
        .iter()
        .zip(&problem.xi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if start > tol {
        return Err(Error::NotDominated(format!(
            "candidate starts {start:e} away from the initial value"
        )));
    }
    let integral = rough_integral(&y.form);
    let consistency = integral
        .values
        .iter()
        .zip(&y.values)
        .flat_map(|(i, v)| i.iter().zip(v).zip(&y.values[0]).map(|((a, b), c)| (a + c - b).abs()))
        .fold(0.0, f64::max);
    if consistency > tol {
        return Err(Error::NotDominated(format!(
            "values are not the integral of the form (defect {consistency:e})"
        )));
    }
    let omega = &problem.control;
    let norm = y.form.operator_norm(problem.gamma(), omega)?.value;
    if !norm.is_finite() {
        return Err(Error::NotDominated("one-form has infinite operator norm".into()));
    }
    let residual = picard_step(problem, y)?.sup_distance(y);
    if residual > tol {
        return Err(Error::NotDominated(format!(
            "candidate is not a fixed point (residual {residual:e})"
        )));
    }
    Ok(())
}

/// `rho^{n+1} = int h(y, y_hat) rho^n dx`, `rho^0 = I`; reports factorial
/// decay of `rho^n` and the implied bound on `y - y_hat`.
pub fn uniqueness_probe(
    problem: &RdeProblem,
    y: &DominatedPath,
    y_hat: &DominatedPath,
    n_max: usize,
    tol: f64,
) -> Result<UniquenessReport> {
    check_solution(problem, y, tol)?;
    check_solution(problem, y_hat, tol)?;
    let base = problem.driver.clone();
    let m = problem.m();
    let gamma = problem.gamma();
    let omega = &problem.control;
    let h = divide(&problem.field)?;
    let hy = division_along(&h, y, y_hat, base.level().saturating_sub(1))?;
    let diff = DominatedPath::new(
        y.values
            .iter()
            .zip(&y_hat.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, z)| x - z).collect())
            .collect(),
        y.form.sub(&y_hat.form)?,
    )?;
    let sup_distance = y.sup_distance(y_hat);
    let difference_norm = sup_distance + diff.form.operator_norm(gamma, omega)?.value;
    let mut rho = identity_path(&base, m, 0);
    let mut rho_sup = Vec::new();
    let mut rho_form_norms = Vec::new();
    let mut bounds = Vec::new();
    for _ in 0..n_max {
        rho = product_integral(&hy, &rho, m, m, 0)?;
        let sup = rho
            .values
            .iter()
            .map(|v| crate::tensor::level_norm(v))
            .fold(0.0, f64::max);
        let fnorm = rho.form.operator_norm(gamma, omega)?.value;
        rho_sup.push(sup);
        rho_form_norms.push(fnorm);
        bounds.push((sup + fnorm) * difference_norm);
    }
    let equal = bounds.last().map(|&b| b < tol).unwrap_or(false) || sup_distance == 0.0;
    Ok(UniquenessReport {
        rho_sup,
        rho_form_norms,
        bounds,
        sup_distance,
        difference_norm,
        equal,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    /// Rough-path distance of each perturbed driver to the reference.
    pub driver_distances: Vec<f64>,
    /// `sup |y - y_i|` for each perturbed driver.
    pub solution_distances: Vec<f64>,
    /// Local orders `log(s_i / s_{i+1}) / log(d_i / d_{i+1})`.
    pub orders: Vec<f64>,
}

/// Solve against a reference driver and perturbed drivers on the same grid,
/// tabulating driver distance against solution distance.
pub fn continuity_probe(
    field: &LipFunction,
    xi: &[f64],
    reference: &SampledRoughPath,
    perturbed: &[SampledRoughPath],
    opts: &SolveOptions,
) -> Result<ContinuityReport> {
    let base = solve(&RdeProblem::new(field.clone(), reference.clone(), xi.to_vec())?, opts)?;
    let mut driver_distances = Vec::new();
    let mut solution_distances = Vec::new();
    for g in perturbed {
        driver_distances.push(rough_distance(reference, g)?);
        let sol = solve(&RdeProblem::new(field.clone(), g.clone(), xi.to_vec())?, opts)?;
        solution_distances.push(base.path.sup_distance(&sol.path));
    }
    let orders = driver_distances
        .windows(2)
        .zip(solution_distances.windows(2))
        .map(|(d, s)| (s[0] / s[1]).ln() / (d[0] / d[1]).ln())
        .collect();
    Ok(ContinuityReport {
        driver_distances,
        solution_distances,
        orders,
    })
}

/// Number of derivatives the problem's field exposes.
pub fn field_order(problem: &RdeProblem) -> usize {
    floor_strict(problem.gamma())
}
