//! Time-varying cocyclic one-forms sampled on the grid of a rough path.
//!
//! At grid time `t` the form is a linear functional `alpha_t` on the
//! truncated tensor algebra (levels one and up), stored as one `out x d^k`
//! matrix per level. It acts by `beta_t(a, b) = alpha_t(g_t^{-1} a (b - 1))`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcs::{floor_strict, SmoothMap};
use crate::linalg::spectral_norm;
use crate::path::{Control, SampledRoughPath};
use crate::tensor::{level_size, TruncatedTensor};

#[derive(Clone, Debug)]
pub struct OneFormPath {
    base: Arc<SampledRoughPath>,
    out_dim: usize,
    depth: usize,
    /// `slots[t][k - 1]` is the level-`k` matrix at grid time `t`.
    slots: Vec<Vec<Vec<f64>>>,
}

impl OneFormPath {
    pub fn new(
        base: Arc<SampledRoughPath>,
        out_dim: usize,
        depth: usize,
        slots: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if depth > base.level() {
            return Err(Error::LevelMismatch {
                left: depth,
                right: base.level(),
            });
        }
        if slots.len() != base.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                found: slots.len(),
            });
        }
        let d = base.dim();
        for slot in &slots {
            if slot.len() != depth {
                return Err(Error::DimensionMismatch {
                    expected: depth,
                    found: slot.len(),
                });
            }
            for (k, m) in slot.iter().enumerate() {
                let n = out_dim * level_size(d, k + 1);
                if m.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: m.len(),
                    });
                }
            }
        }
        Ok(OneFormPath {
            base,
            out_dim,
            depth,
            slots,
        })
    }

    pub fn zeros(base: Arc<SampledRoughPath>, out_dim: usize, depth: usize) -> Self {
        let d = base.dim();
        let slot: Vec<Vec<f64>> = (1..=depth)
            .map(|k| vec![0.0; out_dim * level_size(d, k)])
            .collect();
        let slots = vec![slot; base.len()];
        OneFormPath {
            base,
            out_dim,
            depth,
            slots,
        }
    }

    /// Build slot by slot from a generator returning the level matrices.
    pub fn from_fn<F>(base: Arc<SampledRoughPath>, out_dim: usize, depth: usize, f: F) -> Result<Self>
    where
        F: Fn(usize) -> Result<Vec<Vec<f64>>> + Sync,
    {
        let slots: Vec<Vec<Vec<f64>>> = (0..base.len())
            .into_par_iter()
            .map(&f)
            .collect::<Result<_>>()?;
        Self::new(base, out_dim, depth, slots)
    }

    /// The closed form of a polynomial `p: R^d -> L(R^d, R^w)` along the base
    /// path started at `x0`: `alpha_t^{(k+1)}` is `D^k p(x_t)` with the
    /// form slot last.
    pub fn from_polynomial_form(
        base: Arc<SampledRoughPath>,
        p: &dyn SmoothMap,
        x0: &[f64],
    ) -> Result<Self> {
        let d = base.dim();
        if p.in_dim() != d || !p.out_dim().is_multiple_of(d) || x0.len() != d {
            return Err(Error::param("polynomial form must map R^d into L(R^d, R^w)"));
        }
        let w = p.out_dim() / d;
        let depth = base.level();
        let b = base.clone();
        Self::from_fn(base, w, depth, move |t| {
            let x: Vec<f64> = b
                .point(t)
                .tensor()
                .level_slice(1)
                .iter()
                .zip(x0)
                .map(|(a, c)| a + c)
                .collect();
            let mut levels = Vec::with_capacity(depth);
            for k in 0..depth {
                let dk = if k <= p.max_order() {
                    p.derivative(k, &x)?
                } else {
                    vec![0.0; p.out_dim() * level_size(d, k)]
                };
                levels.push(rebracket_form(&dk, w, d, k));
            }
            Ok(levels)
        })
    }

    pub fn base(&self) -> &Arc<SampledRoughPath> {
        &self.base
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Number of stored levels (levels above are zero).
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Level-`k` matrix (`out x d^k`) at grid time `t`.
    pub fn level(&self, t: usize, k: usize) -> &[f64] {
        &self.slots[t][k - 1]
    }

    pub fn slot(&self, t: usize) -> &[Vec<f64>] {
        &self.slots[t]
    }

    pub fn slot_mut(&mut self, t: usize) -> &mut Vec<Vec<f64>> {
        &mut self.slots[t]
    }

    /// `alpha_t(v)` for `v` with zero scalar part.
    pub fn apply(&self, t: usize, v: &TruncatedTensor) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim];
        for k in 1..=self.depth.min(v.level()) {
            let m = self.level(t, k);
            let x = v.level_slice(k);
            let n = x.len();
            for (o, acc) in out.iter_mut().enumerate() {
                *acc += m[o * n..(o + 1) * n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
        }
        out
    }

    /// `beta_t(a, b) = alpha_t(g_t^{-1} a (b - 1))`.
    pub fn evaluate(&self, t: usize, a: &TruncatedTensor, b: &TruncatedTensor) -> Result<Vec<f64>> {
        let c = self.base.inverse_point(t).try_mul(a)?;
        let w = c.try_mul(&b.without_scalar())?;
        Ok(self.apply(t, &w))
    }

    /// `beta_t(g_t, g_{t,t+1})`, the increment used by the grid sum.
    pub fn step(&self, t: usize) -> Vec<f64> {
        let inc = self.base.increment(t, t + 1).without_scalar();
        self.apply(t, &inc)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.out_dim != other.out_dim || self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.out_dim,
                found: other.out_dim,
            });
        }
        Ok(())
    }

    /// `self - other`; the result keeps the larger depth.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let depth = self.depth.max(other.depth);
        let d = self.base.dim();
        let slots = (0..self.len())
            .map(|t| {
                (1..=depth)
                    .map(|k| {
                        let mut m = vec![0.0; self.out_dim * level_size(d, k)];
                        if k <= self.depth {
                            m.copy_from_slice(self.level(t, k));
                        }
                        if k <= other.depth {
                            m.iter_mut()
                                .zip(other.level(t, k))
                                .for_each(|(a, b)| *a += sign * b);
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        Ok(OneFormPath {
            base: self.base.clone(),
            out_dim: self.out_dim,
            depth,
            slots,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.slots
            .iter_mut()
            .flatten()
            .flatten()
            .for_each(|a| *a *= c);
        out
    }

    /// The same form seen through the dilated driver `delta_c g`: level `k`
    /// is multiplied by `c^{-k}` so that `beta_hat(delta_c a, delta_c b) = beta(a, b)`.
    pub fn rescaled(&self, c: f64, dilated: Arc<SampledRoughPath>) -> Result<Self> {
        if dilated.len() != self.base.len() || dilated.level() != self.base.level() {
            return Err(Error::param("dilated base must share grid and level"));
        }
        let mut out = self.clone();
        out.base = dilated;
        for slot in out.slots.iter_mut() {
            for (k, m) in slot.iter_mut().enumerate() {
                let f = c.powi(-(k as i32 + 1));
                m.iter_mut().for_each(|a| *a *= f);
            }
        }
        Ok(out)
    }

    /// Same coefficients on another base path with the same grid.
    pub fn with_base(&self, base: Arc<SampledRoughPath>) -> Result<Self> {
        Self::new(base, self.out_dim, self.depth, self.slots.clone())
    }

    /// Stack the outputs of two forms on the same base.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let depth = self.depth.max(other.depth);
        let d = self.base.dim();
        let out_dim = self.out_dim + other.out_dim;
        let slots = (0..self.len())
            .map(|t| {
                (1..=depth)
                    .map(|k| {
                        let n = level_size(d, k);
                        let mut m = Vec::with_capacity(out_dim * n);
                        for f in [self, other] {
                            if k <= f.depth {
                                m.extend_from_slice(f.level(t, k));
                            } else {
                                m.extend(std::iter::repeat_n(0.0, f.out_dim * n));
                            }
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        Ok(OneFormPath {
            base: self.base.clone(),
            out_dim,
            depth,
            slots,
        })
    }

    /// Level-`k` matrix of `(beta_t - beta_s)(g_t, .)`, given `g_{s,t}`.
    pub fn difference_matrix(&self, s: usize, t: usize, k: usize, gst: &TruncatedTensor) -> Vec<f64> {
        let d = self.base.dim();
        let nk = level_size(d, k);
        let mut b = self.level(t, k).to_vec();
        for j in k..=self.depth {
            let a = self.level(s, j);
            let g = gst.level_slice(j - k);
            let nj = level_size(d, j);
            for o in 0..self.out_dim {
                let row = &a[o * nj..(o + 1) * nj];
                let dst = &mut b[o * nk..(o + 1) * nk];
                for (jj, &gv) in g.iter().enumerate() {
                    if gv == 0.0 {
                        continue;
                    }
                    let src = &row[jj * nk..(jj + 1) * nk];
                    dst.iter_mut().zip(src).for_each(|(x, y)| *x -= gv * y);
                }
            }
        }
        b
    }

    /// `sup_t |beta_t(g_t, .)|` over `t >= start`: the largest level operator norm.
    pub fn sup_norm_from(&self, start: usize) -> f64 {
        let d = self.base.dim();
        (start..self.len())
            .map(|t| {
                (1..=self.depth)
                    .map(|k| spectral_norm(self.out_dim, level_size(d, k), self.level(t, k)))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// For every pair `start <= s < t` and level `k <= kmax`, feed
    /// `|(beta_t - beta_s)(g_t, .)|_k` to `visit`; returns one accumulator per `s`.
    fn scan_differences<R, I, V>(&self, start: usize, kmax: usize, init: I, visit: V) -> Vec<R>
    where
        R: Send,
        I: Fn() -> R + Sync,
        V: Fn(&mut R, usize, usize, usize, f64) + Sync,
    {
        let d = self.base.dim();
        let n = self.len();
        (start..n)
            .into_par_iter()
            .map(|s| {
                let mut acc = init();
                for t in s + 1..n {
                    let gst = self.base.increment(s, t);
                    for k in 1..=kmax {
                        let b = self.difference_matrix(s, t, k, &gst);
                        let norm = spectral_norm(self.out_dim, level_size(d, k), &b);
                        visit(&mut acc, s, t, k, norm);
                    }
                }
                acc
            })
            .collect()
    }

    /// `|beta|_gamma` on the grid, restricted to times `>= start`.
    pub fn operator_norm_from(&self, gamma: f64, omega: &Control, start: usize) -> Result<OperatorNorm> {
        if omega.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: omega.len(),
            });
        }
        let p = self.base.p();
        let kmax = floor_strict(gamma).min(self.depth);
        let sup_part = self.sup_norm_from(start);
        let init = || vec![(0.0f64, None::<(usize, usize)>); kmax];
        let per_s = self.scan_differences(start, kmax, init, |acc, s, t, k, norm| {
            let q = quotient(norm, omega.omega(s, t), (gamma - k as f64) / p);
            if q > acc[k - 1].0 {
                acc[k - 1] = (q, Some((s, t)));
            }
        });
        let mut holder = vec![0.0f64; kmax];
        let mut worst = vec![None; kmax];
        for acc in per_s {
            for (k, (q, loc)) in acc.into_iter().enumerate() {
                if q > holder[k] {
                    holder[k] = q;
                    worst[k] = loc;
                }
            }
        }
        let value = sup_part + holder.iter().cloned().fold(0.0, f64::max);
        Ok(OperatorNorm {
            value,
            sup_part,
            holder,
            worst,
        })
    }

    pub fn operator_norm(&self, gamma: f64, omega: &Control) -> Result<OperatorNorm> {
        self.operator_norm_from(gamma, omega, 0)
    }

    /// Check `sup_t |beta_t(g_t,.)| <= m` and
    /// `|(beta_t - beta_s)(g_t,.)|_k <= omega(s,t)^{theta - k/p}` on all grid pairs.
    pub fn check_domination(&self, m: f64, theta: f64, omega: &Control, tol: f64) -> Result<DominationReport> {
        if omega.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: omega.len(),
            });
        }
        let p = self.base.p();
        let kmax = self.depth;
        let sup_part = self.sup_norm_from(0);
        let init = || (0.0f64, None::<(usize, usize, usize)>, Vec::<Violation>::new());
        let per_s = self.scan_differences(0, kmax, init, |acc, s, t, k, norm| {
            let q = quotient(norm, omega.omega(s, t), theta - k as f64 / p);
            if q > acc.0 {
                acc.0 = q;
                acc.1 = Some((s, t, k));
            }
            if q > 1.0 + tol {
                acc.2.push(Violation { s, t, k, quotient: q });
            }
        });
        let mut worst = 0.0f64;
        let mut location = None;
        let mut violations = Vec::new();
        for (q, loc, v) in per_s {
            if q > worst {
                worst = q;
                location = loc;
            }
            violations.extend(v);
        }
        Ok(DominationReport {
            m_bound: m,
            theta,
            sup_norm: sup_part,
            worst_quotient: worst,
            worst_location: location,
            dominated: sup_part <= m * (1.0 + tol) && violations.is_empty(),
            violations,
        })
    }

    /// Smallest `lambda` with `|(beta_t - beta_s)(g_t,.)|_k <= (lambda omega)^{theta - k/p}`
    /// on all grid pairs; infinite when some exponent is not positive.
    pub fn control_scale(&self, theta: f64, omega: &Control) -> Result<f64> {
        let p = self.base.p();
        if (1..=self.depth).any(|k| theta - k as f64 / p <= 0.0) {
            return Ok(f64::INFINITY);
        }
        let per_s = self.scan_differences(0, self.depth, || 0.0f64, |acc, s, t, k, norm| {
            let e = theta - k as f64 / p;
            let q = quotient(norm, omega.omega(s, t), e);
            *acc = acc.max(q.powf(1.0 / e));
        });
        Ok(per_s.into_iter().fold(0.0, f64::max))
    }
}

/// `norm / omega^e`, treating a vanishing control as infinitely demanding
/// unless the numerator vanishes too.
fn quotient(norm: f64, omega: f64, e: f64) -> f64 {
    if omega > 0.0 {
        norm / omega.powf(e)
    } else if norm <= 1e-300 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Move the form slot of `D^k p` (flat `(w d) x d^k`) to the end of the word,
/// giving an `out x d^{k+1}` level matrix.
fn rebracket_form(dk: &[f64], w: usize, d: usize, k: usize) -> Vec<f64> {
    let nk = level_size(d, k);
    let mut m = vec![0.0; w * nk * d];
    for o in 0..w {
        for i in 0..d {
            for word in 0..nk {
                m[o * nk * d + word * d + i] = dk[(o * d + i) * nk + word];
            }
        }
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorNorm {
    pub value: f64,
    pub sup_part: f64,
    /// Worst difference quotient per level `k = 1..`.
    pub holder: Vec<f64>,
    #[serde(skip)]
    pub worst: Vec<Option<(usize, usize)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub s: usize,
    pub t: usize,
    pub k: usize,
    pub quotient: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub m_bound: f64,
    pub theta: f64,
    pub sup_norm: f64,
    pub worst_quotient: f64,
    pub worst_location: Option<(usize, usize, usize)>,
    pub dominated: bool,
    pub violations: Vec<Violation>,
}

/// The cocyclic one-form `beta_p(a, b) = sum_k D^k p(x_a)[pi_{k+1}(b)]` of a
/// polynomial `p: R^d -> L(R^d, R^w)`, where `x_a = x0 + pi_1(a)` and the last
/// letter of each word feeds the form. Exact along polylines when the degree
/// is below the truncation level.
#[derive(Clone, Debug)]
pub struct PolynomialOneForm<P: SmoothMap> {
    p: P,
    level: usize,
    x0: Vec<f64>,
}

pub fn lift_polynomial_one_form<P: SmoothMap>(p: P, level: usize, x0: Vec<f64>) -> Result<PolynomialOneForm<P>> {
    let d = p.in_dim();
    if x0.len() != d || !p.out_dim().is_multiple_of(d) {
        return Err(Error::param("polynomial form must map R^d into L(R^d, R^w)"));
    }
    if level == 0 {
        return Err(Error::param("closed lift needs level >= 1"));
    }
    Ok(PolynomialOneForm { p, level, x0 })
}

impl<P: SmoothMap> PolynomialOneForm<P> {
    pub fn out_dim(&self) -> usize {
        self.p.out_dim() / self.p.in_dim()
    }

    pub fn evaluate(&self, a: &TruncatedTensor, b: &TruncatedTensor) -> Result<Vec<f64>> {
        let d = self.p.in_dim();
        if a.level() != self.level || b.level() != self.level || a.dim() != d || b.dim() != d {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: b.level(),
            });
        }
        let w = self.out_dim();
        let x: Vec<f64> = a.level_slice(1).iter().zip(&self.x0).map(|(u, v)| u + v).collect();
        let mut out = vec![0.0; w];
        for k in 0..self.level {
            if k > self.p.max_order() {
                break;
            }
            let dk = self.p.derivative(k, &x)?;
            let m = rebracket_form(&dk, w, d, k);
            let blk = b.level_slice(k + 1);
            let n = blk.len();
            for (o, acc) in out.iter_mut().enumerate() {
                *acc += m[o * n..(o + 1) * n].iter().zip(blk).map(|(u, v)| u * v).sum::<f64>();
            }
        }
        Ok(out)
    }

    /// Sum of `beta_p(g_{t_k}, g_{t_k, t_{k+1}})` along a rough path.
    pub fn integrate_along(&self, g: &SampledRoughPath) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.out_dim()];
        for k in 0..g.len() - 1 {
            let v = self.evaluate(g.point(k).tensor(), &g.increment(k, k + 1))?;
            acc.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
        }
        Ok(acc)
    }
}
