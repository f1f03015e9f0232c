//! Sampled paths, their signature lifts and controls.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::fmt_f64;
use crate::tensor::{level_norm, GroupElement, TruncatedTensor};

/// A vector-valued path sampled on a strictly increasing time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    dim: usize,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: times.len(),
        });
    }
    for (i, t) in times.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::NonFinite(format!("time at index {i}")));
        }
        if i > 0 && *t <= times[i - 1] {
            return Err(Error::NonIncreasingTimes(i));
        }
    }
    Ok(())
}

impl SampledPath {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_times(&times)?;
        if values.len() != times.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(Error::param("path values must have positive dimension"));
        }
        for (i, v) in values.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("sample at index {i}")));
            }
        }
        Ok(SampledPath { times, values, dim })
    }

    /// Polyline through `vertices`, each segment subdivided into `per_segment`
    /// equal pieces; time runs from 0 in unit steps per vertex.
    pub fn polyline(vertices: &[Vec<f64>], per_segment: usize) -> Result<Self> {
        if vertices.len() < 2 || per_segment == 0 {
            return Err(Error::TooFewSamples {
                needed: 2,
                found: vertices.len(),
            });
        }
        let mut times = vec![0.0];
        let mut values = vec![vertices[0].clone()];
        for (seg, w) in vertices.windows(2).enumerate() {
            for j in 1..=per_segment {
                let s = j as f64 / per_segment as f64;
                times.push(seg as f64 + s);
                values.push(w[0].iter().zip(&w[1]).map(|(a, b)| a + s * (b - a)).collect());
            }
        }
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn increment(&self, i: usize, j: usize) -> Vec<f64> {
        self.values[j]
            .iter()
            .zip(&self.values[i])
            .map(|(b, a)| b - a)
            .collect()
    }

    /// Euclidean length of the polyline through the samples.
    pub fn length(&self) -> f64 {
        (1..self.len())
            .map(|i| level_norm(&self.increment(i - 1, i)))
            .sum()
    }

    /// Same samples on a different time grid.
    pub fn with_times(&self, times: Vec<f64>) -> Result<Self> {
        Self::new(times, self.values.clone())
    }

    /// Keep every `stride`-th sample (and the last one).
    pub fn coarsen(&self, stride: usize) -> Result<Self> {
        let idx = coarse_indices(self.len(), stride);
        Self::new(
            idx.iter().map(|&i| self.times[i]).collect(),
            idx.iter().map(|&i| self.values[i].clone()).collect(),
        )
    }

    /// Discrete p-variation over grid partitions, Euclidean increments.
    pub fn p_variation(&self, p: f64) -> f64 {
        let n = self.len();
        let cost = |u: usize, t: usize| level_norm(&self.increment(u, t)).powf(p);
        pvar_dp(n, 0, n - 1, &cost).powf(1.0 / p)
    }
}

pub(crate) fn coarse_indices(n: usize, stride: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).step_by(stride.max(1)).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    idx
}

/// Exact maximisation of `sum cost(t_k, t_{k+1})` over grid partitions of `[i, j]`.
fn pvar_dp(_n: usize, i: usize, j: usize, cost: &dyn Fn(usize, usize) -> f64) -> f64 {
    let mut best = vec![0.0f64; j - i + 1];
    for t in i + 1..=j {
        let mut b = f64::NEG_INFINITY;
        for u in i..t {
            b = b.max(best[u - i] + cost(u, t));
        }
        best[t - i] = b;
    }
    best[j - i]
}

/// A path in the group of the truncated tensor algebra, sampled on a grid.
#[derive(Clone, Debug)]
pub struct SampledRoughPath {
    times: Vec<f64>,
    points: Vec<GroupElement>,
    inverses: Vec<TruncatedTensor>,
    p: f64,
}

impl SampledRoughPath {
    pub fn new(times: Vec<f64>, points: Vec<GroupElement>, p: f64) -> Result<Self> {
        check_times(&times)?;
        if points.len() != times.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: points.len(),
            });
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::param(format!("p must be finite and >= 1, got {p}")));
        }
        let (d, level) = (points[0].dim(), points[0].level());
        if level < p.floor() as usize {
            return Err(Error::param(format!(
                "truncation level {level} is below the integer part of p = {p}"
            )));
        }
        for g in &points {
            if g.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: g.dim(),
                });
            }
            if g.level() != level {
                return Err(Error::LevelMismatch {
                    left: level,
                    right: g.level(),
                });
            }
        }
        let inverses = points.iter().map(|g| g.inverse().into_tensor()).collect();
        Ok(SampledRoughPath {
            times,
            points,
            inverses,
            p,
        })
    }

    /// Signature lift of a sampled path read as a polyline. The level
    /// defaults to the integer part of `p`.
    pub fn lift(path: &SampledPath, p: f64, level: Option<usize>) -> Result<Self> {
        let level = level.unwrap_or(p.floor() as usize).max(1);
        let mut points = Vec::with_capacity(path.len());
        let mut g = GroupElement::identity(path.dim(), level);
        points.push(g.clone());
        for i in 1..path.len() {
            g = g.mul(&GroupElement::exp_vector(&path.increment(i - 1, i), level))?;
            points.push(g.clone());
        }
        Self::new(path.times().to_vec(), points, p)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[GroupElement] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &GroupElement {
        &self.points[i]
    }

    pub fn inverse_point(&self, i: usize) -> &TruncatedTensor {
        &self.inverses[i]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Integer part of `p`.
    pub fn floor_p(&self) -> usize {
        self.p.floor() as usize
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn level(&self) -> usize {
        self.points[0].level()
    }

    /// `g_{t_i, t_j} = g_{t_i}^{-1} g_{t_j}`.
    pub fn increment(&self, i: usize, j: usize) -> TruncatedTensor {
        let mut t = self.inverses[i].mul_unchecked(self.points[j].tensor());
        t.set_scalar(1.0);
        t
    }

    /// Level-one projection of the samples, re-based at the origin.
    pub fn first_level(&self) -> SampledPath {
        let values = self
            .points
            .iter()
            .map(|g| g.tensor().level_slice(1).to_vec())
            .collect();
        SampledPath::new(self.times.clone(), values).expect("validated grid")
    }

    /// Grid index of time `t`, if `t` is a grid point.
    pub fn index_of_time(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| s == t)
    }

    /// `delta_c g`; the dilated path is controlled by `c^p omega`.
    pub fn dilate(&self, c: f64) -> Self {
        let points = self.points.iter().map(|g| g.dilate(c)).collect();
        Self::new(self.times.clone(), points, self.p).expect("dilation keeps structure")
    }

    /// Same group elements on a different time grid.
    pub fn with_times(&self, times: Vec<f64>) -> Result<Self> {
        Self::new(times, self.points.clone(), self.p)
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.times.clone(), self.points.clone(), p)
    }

    /// Keep every `stride`-th sample (and the last one).
    pub fn coarsen(&self, stride: usize) -> Self {
        let idx = coarse_indices(self.len(), stride);
        Self::new(
            idx.iter().map(|&i| self.times[i]).collect(),
            idx.iter().map(|&i| self.points[i].clone()).collect(),
            self.p,
        )
        .expect("sub-grid of a valid path")
    }

    /// Endpoint signature `g_{t_0, t_N}`.
    pub fn endpoint(&self) -> TruncatedTensor {
        self.increment(0, self.len() - 1)
    }

    /// Discrete p-variation over grid partitions of `[s, t]` (homogeneous norm).
    pub fn p_variation(&self, s: f64, t: f64) -> Result<f64> {
        let (i, j) = match (self.index_of_time(s), self.index_of_time(t)) {
            (Some(i), Some(j)) if i <= j => (i, j),
            _ => return Err(Error::OffGrid(s, t)),
        };
        if i == j {
            return Ok(0.0);
        }
        let p = self.p;
        let cost = |u: usize, v: usize| self.increment(u, v).homogeneous_norm().powf(p);
        Ok(pvar_dp(self.len(), i, j, &cost).powf(1.0 / p))
    }
}

/// Signature of a sampled path over its whole grid.
pub fn signature(path: &SampledPath, level: usize) -> TruncatedTensor {
    let mut g = GroupElement::identity(path.dim(), level);
    for i in 1..path.len() {
        g = g
            .mul(&GroupElement::exp_vector(&path.increment(i - 1, i), level))
            .expect("consistent dims");
    }
    g.into_tensor()
}

/// Pure-area driver: `g_i = exp(i (a / n) [e1, e2])` in dimension two, level two,
/// on the grid `i / n`. Its first level is identically zero.
pub fn pure_area_path(a: f64, n: usize, p: f64) -> Result<SampledRoughPath> {
    if n == 0 {
        return Err(Error::param("pure-area path needs at least one step"));
    }
    if !(2.0..3.0).contains(&p) {
        return Err(Error::param(format!(
            "pure-area driver lives at level two, so p must lie in [2, 3), got {p}"
        )));
    }
    let mut points = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let c = i as f64 * a / n as f64;
        let mut x = TruncatedTensor::zeros(2, 2);
        x.level_slice_mut(2).copy_from_slice(&[0.0, c, -c, 0.0]);
        points.push(GroupElement::exp_lie(&x)?);
    }
    let times = (0..=n).map(|i| i as f64 / n as f64).collect();
    SampledRoughPath::new(times, points, p)
}

/// A control `omega(s, t)` tabulated on grid pairs.
#[derive(Clone, Debug)]
pub struct Control {
    n: usize,
    table: Vec<f64>,
    kind: ControlKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControlKind {
    /// `omega(s,t) = |g|_{p-var,[s,t]}^p`
    PVariation,
    /// `omega(s,t) = K (t - s)`
    Holder(f64),
}

impl Control {
    /// `omega(s, t) = ||g||_{p-var, [s,t]}^p`, exact over grid partitions.
    pub fn from_pvar(g: &SampledRoughPath) -> Self {
        let n = g.len();
        let p = g.p();
        let cost: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|u| {
                (0..n)
                    .map(|t| {
                        if t > u {
                            g.increment(u, t).homogeneous_norm().powf(p)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|s| {
                let mut best = vec![0.0f64; n];
                for t in s + 1..n {
                    let mut b = 0.0f64;
                    for u in s..t {
                        b = b.max(best[u] + cost[u][t]);
                    }
                    best[t] = b;
                }
                best
            })
            .collect();
        Control {
            n,
            table: rows.concat(),
            kind: ControlKind::PVariation,
        }
    }

    /// `omega(s, t) = K (t - s)`.
    pub fn holder(times: &[f64], k: f64) -> Self {
        let n = times.len();
        let mut table = vec![0.0; n * n];
        for s in 0..n {
            for t in s..n {
                table[s * n + t] = k * (times[t] - times[s]);
            }
        }
        Control {
            n,
            table,
            kind: ControlKind::Holder(k),
        }
    }

    pub fn kind(&self) -> ControlKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn omega(&self, s: usize, t: usize) -> f64 {
        self.table[s * self.n + t]
    }

    /// `lambda omega`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Control {
            n: self.n,
            table: self.table.iter().map(|w| w * lambda).collect(),
            kind: self.kind,
        }
    }

    /// Keep the rows and columns of a coarser sub-grid.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut table = vec![0.0; m * m];
        for (a, &s) in idx.iter().enumerate() {
            for (b, &t) in idx.iter().enumerate() {
                table[a * m + b] = self.omega(s, t);
            }
        }
        Control {
            n: m,
            table,
            kind: self.kind,
        }
    }

    /// Largest violation of `omega(s,u) + omega(u,t) <= omega(s,t)`.
    pub fn superadditivity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for s in 0..n {
            for u in s..n {
                for t in u..n {
                    let d = self.omega(s, u) + self.omega(u, t) - self.omega(s, t);
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    /// Does `g` satisfy `|g_{s,t}|^p <= omega(s,t)` on all grid pairs (up to `tol`)?
    pub fn controls(&self, g: &SampledRoughPath, tol: f64) -> bool {
        let p = g.p();
        (0..self.n).all(|s| {
            (s + 1..self.n).all(|t| {
                g.increment(s, t).homogeneous_norm().powf(p) <= self.omega(s, t) * (1.0 + tol) + tol
            })
        })
    }
}

/// Inhomogeneous p-variation distance between two lifts on the same grid:
/// `max_k (sup_D sum |pi_k(g_{u,v}) - pi_k(h_{u,v})|^{p/k})^{k/p}`.
pub fn rough_distance(g: &SampledRoughPath, h: &SampledRoughPath) -> Result<f64> {
    if g.times() != h.times() {
        return Err(Error::param("rough distance needs a common time grid"));
    }
    if g.level() != h.level() || g.dim() != h.dim() {
        return Err(Error::LevelMismatch {
            left: g.level(),
            right: h.level(),
        });
    }
    let n = g.len();
    let p = g.p();
    let level = g.level();
    let diffs: Vec<Vec<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|u| {
            (0..n)
                .map(|v| {
                    if v <= u {
                        return vec![0.0; level + 1];
                    }
                    let a = g.increment(u, v);
                    let b = h.increment(u, v);
                    (0..=level)
                        .map(|k| {
                            let da: Vec<f64> = a
                                .level_slice(k)
                                .iter()
                                .zip(b.level_slice(k))
                                .map(|(x, y)| x - y)
                                .collect();
                            level_norm(&da)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut worst = 0.0f64;
    for k in 1..=level {
        let e = p / k as f64;
        let cost = |u: usize, v: usize| diffs[u][v][k].powf(e);
        worst = worst.max(pvar_dp(n, 0, n - 1, &cost).powf(1.0 / e));
    }
    Ok(worst)
}

/// Read a path from CSV with header `t,x1,..,xd`.
pub fn read_path_csv<R: Read>(reader: R) -> Result<SampledPath> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 2 || names[0] != "t" {
        return Err(Error::Parse {
            line: 1,
            message: "header must be t,x1,...,xd".into(),
        });
    }
    for (i, name) in names.iter().enumerate().skip(1) {
        if *name != format!("x{i}") {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected column x{i}, found '{name}'"),
            });
        }
    }
    let d = names.len() - 1;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != d + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", d + 1, rec.len()),
            });
        }
        let mut row = Vec::with_capacity(d + 1);
        for field in rec.iter() {
            let x: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("'{field}' is not a number"),
            })?;
            if !x.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value '{field}'"),
                });
            }
            row.push(x);
        }
        if let Some(&prev) = times.last() {
            if row[0] <= prev {
                return Err(Error::Parse {
                    line,
                    message: "time column must be strictly increasing".into(),
                });
            }
        }
        times.push(row[0]);
        values.push(row[1..].to_vec());
    }
    SampledPath::new(times, values).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })
}

/// Write samples as CSV with header `t,<prefix>1,..`.
pub fn write_path_csv<W: Write>(
    mut w: W,
    times: &[f64],
    values: &[Vec<f64>],
    prefix: &str,
) -> Result<()> {
    let d = values.first().map(|v| v.len()).unwrap_or(0);
    let mut header = String::from("t");
    for i in 1..=d {
        header.push_str(&format!(",{prefix}{i}"));
    }
    writeln!(w, "{header}")?;
    for (t, v) in times.iter().zip(values) {
        let mut line = fmt_f64(*t);
        for x in v {
            line.push(',');
            line.push_str(&fmt_f64(*x));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
