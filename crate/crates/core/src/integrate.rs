//! Young and rough integration on the grid, and the one-forms of integrands
//! built from dominated paths.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcs::SmoothMap;
use crate::linalg::{contract, CompensatedSum};
use crate::oneform::OneFormPath;
use crate::path::{coarse_indices, Control, SampledPath, SampledRoughPath};
use crate::tensor::{index_of, level_size, set_partitions, subsets, word_of};

/// A dominated path: grid values together with a one-form on the same grid.
#[derive(Clone, Debug)]
pub struct DominatedPath {
    pub values: Vec<Vec<f64>>,
    pub form: OneFormPath,
}

impl DominatedPath {
    pub fn new(values: Vec<Vec<f64>>, form: OneFormPath) -> Result<Self> {
        if values.len() != form.len() {
            return Err(Error::DimensionMismatch {
                expected: form.len(),
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| v.len() != form.out_dim()) {
            return Err(Error::DimensionMismatch {
                expected: form.out_dim(),
                found: v.len(),
            });
        }
        Ok(DominatedPath { values, form })
    }

    /// The first level of the base path, `x_t = x0 + pi_1(g_t)`, with its
    /// canonical form `alpha_t = pi_1`.
    pub fn driver(base: Arc<SampledRoughPath>, x0: &[f64]) -> Result<Self> {
        let d = base.dim();
        if x0.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x0.len(),
            });
        }
        let values = base
            .points()
            .iter()
            .map(|g| g.tensor().level_slice(1).iter().zip(x0).map(|(a, b)| a + b).collect())
            .collect();
        let mut ident = vec![0.0; d * d];
        for i in 0..d {
            ident[i * d + i] = 1.0;
        }
        let form = OneFormPath::from_fn(base, d, 1, |_| Ok(vec![ident.clone()]))?;
        Self::new(values, form)
    }

    /// Stack two dominated paths into one with concatenated values.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().chain(b).cloned().collect())
            .collect();
        Self::new(values, self.form.stack(&other.form)?)
    }

    /// Largest difference of values, `sup_t |x_t - y_t|`.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Expansion one-form of `F(rho)` along a dominated path `rho`, levels
/// `1..=depth`. At level `j` and word `W` it sums, over set partitions of
/// the letters of `W`, `D^{#blocks} F(rho_s)` applied to the `rho`-form of
/// each block's sub-word. Partitions with more blocks than the available
/// derivative order are dropped.
pub fn function_expansion(f: &dyn SmoothMap, rho: &DominatedPath, depth: usize) -> Result<OneFormPath> {
    let base = rho.form.base().clone();
    let d = base.dim();
    let in_dim = f.in_dim();
    if rho.form.out_dim() != in_dim {
        return Err(Error::DimensionMismatch {
            expected: in_dim,
            found: rho.form.out_dim(),
        });
    }
    let out = f.out_dim();
    let max_l = f.max_order().min(depth);
    let partitions: Vec<Vec<Vec<Vec<usize>>>> = (0..=depth).map(set_partitions).collect();
    let rho_depth = rho.form.depth();
    OneFormPath::from_fn(base, out, depth, |t| {
        let x = &rho.values[t];
        let derivs: Vec<Vec<f64>> = (0..=max_l).map(|l| f.derivative(l, x)).collect::<Result<_>>()?;
        let mut levels = Vec::with_capacity(depth);
        for j in 1..=depth {
            let nj = level_size(d, j);
            let mut m = vec![0.0; out * nj];
            for widx in 0..nj {
                let word = word_of(d, j, widx);
                for part in &partitions[j] {
                    let l = part.len();
                    if l > max_l || part.iter().any(|b| b.len() > rho_depth) {
                        continue;
                    }
                    let cols: Vec<Vec<f64>> = part
                        .iter()
                        .map(|block| {
                            let sub: Vec<usize> = block.iter().map(|&p| word[p]).collect();
                            let k = block.len();
                            let nk = level_size(d, k);
                            let col = index_of(d, &sub);
                            let a = rho.form.level(t, k);
                            (0..in_dim).map(|r| a[r * nk + col]).collect()
                        })
                        .collect();
                    if cols.iter().all(|c| c.iter().all(|&v| v == 0.0)) {
                        continue;
                    }
                    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
                    let v = contract(&derivs[l], in_dim, &refs);
                    for o in 0..out {
                        m[o * nj + widx] += v[o];
                    }
                }
            }
            levels.push(m);
        }
        Ok(levels)
    })
}

/// One-form of `int phi dx` for an integrand `phi_t` in `L(R^d, R^w)`
/// (flat `(o, i)` at `o d + i`) with expansion one-form `expansion`:
/// `eta_t(v) = phi_t pi_1(v) + [expansion_t (x) pi_1] I'(v)`.
pub fn integrate_controlled(phi: &[Vec<f64>], expansion: &OneFormPath) -> Result<OneFormPath> {
    let base = expansion.base().clone();
    let d = base.dim();
    let level = base.level();
    if !expansion.out_dim().is_multiple_of(d) || phi.len() != base.len() {
        return Err(Error::param("integrand must be L(R^d, R^w)-valued on the driver grid"));
    }
    let w = expansion.out_dim() / d;
    if let Some(v) = phi.iter().find(|v| v.len() != w * d) {
        return Err(Error::DimensionMismatch {
            expected: w * d,
            found: v.len(),
        });
    }
    let exp_depth = expansion.depth();
    OneFormPath::from_fn(base, w, level, |t| {
        let mut levels = Vec::with_capacity(level);
        levels.push(phi[t].clone());
        for k in 2..=level {
            let nprev = level_size(d, k - 1);
            let mut m = vec![0.0; w * nprev * d];
            if k - 1 <= exp_depth {
                let e = expansion.level(t, k - 1);
                for o in 0..w {
                    for i in 0..d {
                        let row = &e[(o * d + i) * nprev..(o * d + i + 1) * nprev];
                        for (word, &v) in row.iter().enumerate() {
                            m[o * nprev * d + word * d + i] = v;
                        }
                    }
                }
            }
            levels.push(m);
        }
        Ok(levels)
    })
}

/// One-form of `int f(rho) dx` for `f: R^m -> L(R^d, R^w)`.
pub fn compose_integrand(f: &dyn SmoothMap, rho: &DominatedPath) -> Result<OneFormPath> {
    let level = rho.form.base().level();
    let phi: Vec<Vec<f64>> = rho
        .values
        .par_iter()
        .map(|x| f.eval(x))
        .collect::<Result<_>>()?;
    let depth = level.saturating_sub(1);
    let expansion = if depth == 0 {
        OneFormPath::zeros(rho.form.base().clone(), f.out_dim(), 0)
    } else {
        function_expansion(f, rho, depth)?
    };
    integrate_controlled(&phi, &expansion)
}

/// Product integrand `Phi = h . q` where `h_t` is in `L(R^m, L(R^d, R^m))`
/// (flat `((o d + i) m + j)`) and `q_t` is an `m x c` matrix (flat `j c + col`).
/// Returns `Phi` in `L(R^d, R^{m c})` (flat `((o c + col) d + i)`) with its
/// expansion: `dh q + h dq + (dh (x) dq)` over deshuffles of each word.
pub fn product_expansion(
    h: &DominatedPath,
    q: &DominatedPath,
    m: usize,
    cols: usize,
    depth: usize,
) -> Result<(Vec<Vec<f64>>, OneFormPath)> {
    let base = h.form.base().clone();
    let d = base.dim();
    if h.form.out_dim() != m * d * m || q.form.out_dim() != m * cols {
        return Err(Error::param("product shapes do not match"));
    }
    let hidx = |o: usize, i: usize, j: usize| (o * d + i) * m + j;
    let pidx = |o: usize, c: usize, i: usize| (o * cols + c) * d + i;
    let n = base.len();
    let phi: Vec<Vec<f64>> = (0..n)
        .map(|t| {
            let (hv, qv) = (&h.values[t], &q.values[t]);
            let mut out = vec![0.0; m * cols * d];
            for o in 0..m {
                for i in 0..d {
                    for c in 0..cols {
                        out[pidx(o, c, i)] = (0..m).map(|j| hv[hidx(o, i, j)] * qv[j * cols + c]).sum();
                    }
                }
            }
            out
        })
        .collect();
    let splits: Vec<Vec<Vec<Vec<usize>>>> = (0..=depth)
        .map(|k| (0..=k).map(|k1| subsets(k, k1)).collect())
        .collect();
    let (hd, qd) = (h.form.depth(), q.form.depth());
    let out_dim = m * cols * d;
    let expansion = OneFormPath::from_fn(base, out_dim, depth, |t| {
        let (hv, qv) = (&h.values[t], &q.values[t]);
        let mut levels = Vec::with_capacity(depth);
        for k in 1..=depth {
            let nk = level_size(d, k);
            let mut lm = vec![0.0; out_dim * nk];
            let hk = (k <= hd).then(|| h.form.level(t, k));
            let qk = (k <= qd).then(|| q.form.level(t, k));
            for o in 0..m {
                for i in 0..d {
                    for c in 0..cols {
                        let row = pidx(o, c, i);
                        for w in 0..nk {
                            let mut acc = 0.0;
                            for j in 0..m {
                                if let Some(hk) = hk {
                                    acc += hk[hidx(o, i, j) * nk + w] * qv[j * cols + c];
                                }
                                if let Some(qk) = qk {
                                    acc += hv[hidx(o, i, j)] * qk[(j * cols + c) * nk + w];
                                }
                            }
                            lm[row * nk + w] += acc;
                        }
                    }
                }
            }
            // cross term over deshuffles of each word
            for k1 in 1..k {
                let k2 = k - k1;
                if k1 > hd || k2 > qd {
                    continue;
                }
                let (h1, q2) = (h.form.level(t, k1), q.form.level(t, k2));
                let (n1, n2) = (level_size(d, k1), level_size(d, k2));
                for w in 0..nk {
                    let word = word_of(d, k, w);
                    for set in &splits[k][k1] {
                        let mut w1 = 0;
                        let mut w2 = 0;
                        for (pos, &letter) in word.iter().enumerate() {
                            if set.contains(&pos) {
                                w1 = w1 * d + letter;
                            } else {
                                w2 = w2 * d + letter;
                            }
                        }
                        for o in 0..m {
                            for i in 0..d {
                                for c in 0..cols {
                                    let v: f64 = (0..m)
                                        .map(|j| h1[hidx(o, i, j) * n1 + w1] * q2[(j * cols + c) * n2 + w2])
                                        .sum();
                                    lm[pidx(o, c, i) * nk + w] += v;
                                }
                            }
                        }
                    }
                }
            }
            levels.push(lm);
        }
        Ok(levels)
    })?;
    Ok((phi, expansion))
}

/// How the grid sum is accumulated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Summation {
    /// Left-to-right compensated sum; bit-reproducible.
    #[default]
    Sequential,
    /// Parallel tree reduction of the endpoint; rounding depends on the thread count.
    Parallel,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoughIntegral {
    /// Cumulative integral at every grid point, starting at zero.
    pub values: Vec<Vec<f64>>,
    /// `max |I_fine - I_coarse|` over the coarse grid points, where the
    /// coarse sum uses every other grid point.
    pub discrepancy: f64,
    /// Set when no finite operator norm at an admissible exponent was established.
    pub uncertified: bool,
    pub operator_norm: Option<f64>,
}

impl RoughIntegral {
    pub fn endpoint(&self) -> &[f64] {
        self.values.last().expect("non-empty grid")
    }
}

/// Cumulative sums `sum_{k < n} beta_{t_k}(g_{t_k}, g_{t_k, t_{k+1}})`.
pub fn rough_integral(beta: &OneFormPath) -> RoughIntegral {
    rough_integral_with(beta, Summation::Sequential)
}

pub fn rough_integral_with(beta: &OneFormPath, summation: Summation) -> RoughIntegral {
    let n = beta.len();
    let w = beta.out_dim();
    let steps: Vec<Vec<f64>> = (0..n - 1).into_par_iter().map(|k| beta.step(k)).collect();
    let values = cumulative(&steps, w);
    let mut values = values;
    if summation == Summation::Parallel {
        let end: Vec<f64> = (0..w)
            .map(|o| steps.par_iter().map(|s| s[o]).sum::<f64>())
            .collect();
        *values.last_mut().expect("non-empty") = end;
    }
    // dyadic coarsening: every other grid point
    let idx = coarse_indices(n, 2);
    let base = beta.base();
    let coarse_steps: Vec<Vec<f64>> = idx
        .windows(2)
        .map(|win| {
            let inc = base.increment(win[0], win[1]).without_scalar();
            beta.apply(win[0], &inc)
        })
        .collect();
    let coarse = cumulative(&coarse_steps, w);
    let discrepancy = idx
        .iter()
        .zip(&coarse)
        .flat_map(|(&i, c)| values[i].iter().zip(c).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    RoughIntegral {
        values,
        discrepancy,
        uncertified: true,
        operator_norm: None,
    }
}

/// Rough integral plus the certification check: the form must have a finite
/// operator norm at an exponent `gamma > p`.
pub fn rough_integral_checked(beta: &OneFormPath, gamma: f64, omega: &Control) -> Result<RoughIntegral> {
    let mut res = rough_integral(beta);
    let p = beta.base().p();
    let norm = beta.operator_norm(gamma, omega)?.value;
    res.operator_norm = Some(norm);
    res.uncertified = !(gamma > p && norm.is_finite());
    Ok(res)
}

fn cumulative(steps: &[Vec<f64>], w: usize) -> Vec<Vec<f64>> {
    let mut acc = vec![CompensatedSum::default(); w];
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(vec![0.0; w]);
    for s in steps {
        for (a, v) in acc.iter_mut().zip(s) {
            a.add(*v);
        }
        out.push(acc.iter().map(|a| a.value()).collect());
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct YoungIntegral {
    pub values: Vec<Vec<f64>>,
    /// `|I_fine - I_coarse|` at the endpoint (coarse grid: every other point).
    pub discrepancy: f64,
    /// Richardson estimate of the fine-grid error, assuming second order.
    pub richardson_error: f64,
    /// Endpoint after one Richardson step, `I_fine + (I_fine - I_coarse) / 3`.
    pub extrapolated: Vec<f64>,
    pub sigma_pvar: f64,
    pub tau_qvar: f64,
}

/// `int tau d sigma` by trapezoidal Riemann-Stieltjes sums; `tau` takes
/// values in `L(R^d, R^w)` (flat `(o, i)`), `sigma` in `R^d`.
pub fn young_integral(tau: &SampledPath, sigma: &SampledPath, q: f64, p: f64) -> Result<YoungIntegral> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::param("variation exponents must be >= 1"));
    }
    if tau.times() != sigma.times() {
        return Err(Error::param("integrand and integrator must share a grid"));
    }
    let d = sigma.dim();
    if !tau.dim().is_multiple_of(d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: tau.dim(),
        });
    }
    let sigma_pvar = sigma.p_variation(p);
    let tau_qvar = tau.p_variation(q);
    if 1.0 / p + 1.0 / q <= 1.0 {
        return Err(Error::Regularity(format!(
            "1/p + 1/q = {} <= 1 (p = {p}, q = {q}; measured p-var of sigma {sigma_pvar:e}, q-var of tau {tau_qvar:e})",
            1.0 / p + 1.0 / q
        )));
    }
    let w = tau.dim() / d;
    let sum_on = |idx: &[usize]| -> Vec<Vec<f64>> {
        let steps: Vec<Vec<f64>> = idx
            .windows(2)
            .map(|win| {
                let (a, b) = (win[0], win[1]);
                let ds = sigma.increment(a, b);
                (0..w)
                    .map(|o| {
                        (0..d)
                            .map(|i| 0.5 * (tau.value(a)[o * d + i] + tau.value(b)[o * d + i]) * ds[i])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        cumulative(&steps, w)
    };
    let fine_idx: Vec<usize> = (0..sigma.len()).collect();
    let values = sum_on(&fine_idx);
    let coarse = sum_on(&coarse_indices(sigma.len(), 2));
    let (fine_end, coarse_end) = (values.last().unwrap(), coarse.last().unwrap());
    let discrepancy = fine_end
        .iter()
        .zip(coarse_end)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let extrapolated = fine_end.iter().zip(coarse_end).map(|(a, b)| a + (a - b) / 3.0).collect();
    Ok(YoungIntegral {
        extrapolated,
        values,
        discrepancy,
        richardson_error: discrepancy / 3.0,
        sigma_pvar,
        tau_qvar,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ControlledIntegral {
    #[serde(skip)]
    pub form: OneFormPath,
    /// `sup |phi_t - phi_s - expansion_s(g_s, g_{s,t})| / omega^{gamma/p}` over grid pairs.
    pub remainder_constant: f64,
    /// Set when the remainder constant exceeds `m |expansion|_gamma`.
    pub flagged: bool,
}

/// `integrate_controlled` together with the controlled-path remainder check.
pub fn integrate_controlled_checked(
    phi: &[Vec<f64>],
    expansion: &OneFormPath,
    gamma: f64,
    omega: &Control,
    m: f64,
) -> Result<ControlledIntegral> {
    let form = integrate_controlled(phi, expansion)?;
    let base = expansion.base();
    let p = base.p();
    let n = base.len();
    let per_s: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut worst = 0.0f64;
            for t in s + 1..n {
                let inc = base.increment(s, t).without_scalar();
                let pred = expansion.apply(s, &inc);
                let r = phi[t]
                    .iter()
                    .zip(&phi[s])
                    .zip(&pred)
                    .map(|((a, b), c)| (a - b - c).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let w = omega.omega(s, t);
                let q = if w > 0.0 {
                    r / w.powf(gamma / p)
                } else if r == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(q);
            }
            worst
        })
        .collect();
    let remainder_constant = per_s.into_iter().fold(0.0, f64::max);
    let norm = expansion.operator_norm(gamma, omega)?.value;
    Ok(ControlledIntegral {
        form,
        remainder_constant,
        flagged: remainder_constant > m * norm * (1.0 + 1e-9),
    })
}
