//! Smooth maps with exact derivatives, the Lip(gamma) wrapper and the
//! divided-difference map `h(x, y) = int_0^1 Df(y + t(x - y)) dt`.
//!
//! Derivatives are flat tensors of shape `out x in^l`, row-major with the
//! output index outermost. Vector fields `f: R^m -> L(R^d, R^m)` use
//! `out = m d` with entry `(o, i)` at `o d + i`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{contract, gauss_legendre_unit};
use crate::tensor::{level_size, word_of};

/// Largest integer strictly below `gamma`.
pub fn floor_strict(gamma: f64) -> usize {
    (gamma.ceil() as usize).saturating_sub(1)
}

/// A map `R^in -> R^out` with derivatives up to some order.
pub trait SmoothMap: Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    /// Highest derivative order that can be evaluated.
    fn max_order(&self) -> usize;
    /// `D^l F(x)` as a flat `out x in^l` tensor; `l = 0` is the value.
    fn derivative(&self, l: usize, x: &[f64]) -> Result<Vec<f64>>;

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.derivative(0, x)
    }
}

fn check_point(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("evaluation point".into()));
    }
    Ok(())
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn falling(l: usize, j: usize) -> f64 {
    ((l - j + 1)..=l).map(|v| v as f64).product()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// `f(y) = sum_l A_l[y, .., y]` with symmetric coefficient tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    in_dim: usize,
    out_dim: usize,
    blocks: Vec<Vec<f64>>,
}

impl PolyMap {
    /// `blocks[l]` holds `A_l` (`out x in^l`); each block is symmetrised.
    pub fn new(in_dim: usize, out_dim: usize, blocks: Vec<Vec<f64>>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::param("polynomial dimensions must be positive"));
        }
        if blocks.is_empty() {
            return Err(Error::param("polynomial needs at least a constant block"));
        }
        let mut sym = Vec::with_capacity(blocks.len());
        for (l, b) in blocks.into_iter().enumerate() {
            let n = out_dim * level_size(in_dim, l);
            if b.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: b.len(),
                });
            }
            if b.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("coefficient block {l}")));
            }
            sym.push(symmetrize(in_dim, out_dim, l, &b));
        }
        Ok(PolyMap {
            in_dim,
            out_dim,
            blocks: sym,
        })
    }

    /// The linear map `y -> A y` (`A` is `out x in`, row-major).
    pub fn linear(in_dim: usize, out_dim: usize, a: Vec<f64>) -> Result<Self> {
        Self::new(in_dim, out_dim, vec![vec![0.0; out_dim], a])
    }

    pub fn degree(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    fn sup_derivative(&self, j: usize, radius: f64) -> f64 {
        (j..self.blocks.len())
            .map(|l| falling(l, j) * frobenius(&self.blocks[l]) * radius.powi((l - j) as i32))
            .sum()
    }
}

fn symmetrize(in_dim: usize, out_dim: usize, l: usize, block: &[f64]) -> Vec<f64> {
    if l < 2 {
        return block.to_vec();
    }
    let per = level_size(in_dim, l);
    let mut groups: HashMap<(usize, Vec<usize>), (f64, usize)> = HashMap::new();
    for o in 0..out_dim {
        for idx in 0..per {
            let mut w = word_of(in_dim, l, idx);
            w.sort_unstable();
            let e = groups.entry((o, w)).or_insert((0.0, 0));
            e.0 += block[o * per + idx];
            e.1 += 1;
        }
    }
    let mut out = vec![0.0; block.len()];
    for o in 0..out_dim {
        for idx in 0..per {
            let mut w = word_of(in_dim, l, idx);
            w.sort_unstable();
            let (s, c) = groups[&(o, w)];
            out[o * per + idx] = s / c as f64;
        }
    }
    out
}

impl SmoothMap for PolyMap {
    fn in_dim(&self) -> usize {
        self.in_dim
    }

    fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn derivative(&self, j: usize, x: &[f64]) -> Result<Vec<f64>> {
        check_point(self.in_dim, x)?;
        let mut out = vec![0.0; self.out_dim * level_size(self.in_dim, j)];
        for l in j..self.blocks.len() {
            let ys: Vec<&[f64]> = (0..l - j).map(|_| x).collect();
            let part = contract(&self.blocks[l], self.in_dim, &ys);
            let c = falling(l, j);
            out.iter_mut().zip(&part).for_each(|(o, p)| *o += c * p);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinKind {
    Sin,
    Cos,
    Affine,
}

/// Componentwise `f_o(y) = phi(sum_i a[o,i] y_i + b_o)` with `phi` one of
/// sin, cos or the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Builtin {
    kind: BuiltinKind,
    in_dim: usize,
    out_dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Builtin {
    pub fn new(kind: BuiltinKind, in_dim: usize, out_dim: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != in_dim * out_dim {
            return Err(Error::DimensionMismatch {
                expected: in_dim * out_dim,
                found: a.len(),
            });
        }
        if b.len() != out_dim {
            return Err(Error::DimensionMismatch {
                expected: out_dim,
                found: b.len(),
            });
        }
        Ok(Builtin {
            kind,
            in_dim,
            out_dim,
            a,
            b,
        })
    }

    fn row(&self, o: usize) -> &[f64] {
        &self.a[o * self.in_dim..(o + 1) * self.in_dim]
    }

    /// `phi^{(j)}(z)`, hand-coded up to order three.
    fn phi(&self, j: usize, z: f64) -> f64 {
        match (self.kind, j) {
            (BuiltinKind::Sin, 0) => z.sin(),
            (BuiltinKind::Sin, 1) => z.cos(),
            (BuiltinKind::Sin, 2) => -z.sin(),
            (BuiltinKind::Sin, 3) => -z.cos(),
            (BuiltinKind::Cos, 0) => z.cos(),
            (BuiltinKind::Cos, 1) => -z.sin(),
            (BuiltinKind::Cos, 2) => -z.cos(),
            (BuiltinKind::Cos, 3) => z.sin(),
            (BuiltinKind::Affine, 0) => z,
            (BuiltinKind::Affine, 1) => 1.0,
            (BuiltinKind::Affine, _) => 0.0,
            _ => unreachable!("order checked by caller"),
        }
    }

    fn sup_derivative(&self, j: usize, radius: f64) -> f64 {
        let rows = (0..self.out_dim).map(|o| {
            let na = frobenius(self.row(o));
            match self.kind {
                BuiltinKind::Affine => match j {
                    0 => na * radius + self.b[o].abs(),
                    1 => na,
                    _ => 0.0,
                },
                _ => na.powi(j as i32),
            }
        });
        rows.map(|r| r * r).sum::<f64>().sqrt()
    }
}

impl SmoothMap for Builtin {
    fn in_dim(&self) -> usize {
        self.in_dim
    }

    fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn max_order(&self) -> usize {
        match self.kind {
            BuiltinKind::Affine => usize::MAX,
            _ => 3,
        }
    }

    fn derivative(&self, j: usize, x: &[f64]) -> Result<Vec<f64>> {
        check_point(self.in_dim, x)?;
        if j > self.max_order() {
            return Err(Error::OrderTooHigh {
                requested: j,
                available: self.max_order(),
            });
        }
        let per = level_size(self.in_dim, j);
        let mut out = vec![0.0; self.out_dim * per];
        for o in 0..self.out_dim {
            let row = self.row(o);
            let z: f64 = row.iter().zip(x).map(|(a, y)| a * y).sum::<f64>() + self.b[o];
            let c = self.phi(j, z);
            if c == 0.0 {
                continue;
            }
            for idx in 0..per {
                let w = word_of(self.in_dim, j, idx);
                out[o * per + idx] = c * w.iter().map(|&i| row[i]).product::<f64>();
            }
        }
        Ok(out)
    }
}

/// Closed algebra of smooth maps used for vector fields.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldMap {
    Poly(PolyMap),
    Builtin(Builtin),
    Sum(Vec<FieldMap>),
    /// Componentwise product of two maps with equal shapes.
    Product(Box<FieldMap>, Box<FieldMap>),
    Scaled(f64, Box<FieldMap>),
}

impl FieldMap {
    /// Degree when the map is polynomial.
    pub fn poly_degree(&self) -> Option<usize> {
        match self {
            FieldMap::Poly(p) => Some(p.degree()),
            FieldMap::Builtin(b) => (b.kind == BuiltinKind::Affine).then_some(1),
            FieldMap::Sum(ts) => ts.iter().map(|t| t.poly_degree()).try_fold(0, |acc, d| d.map(|d| acc.max(d))),
            FieldMap::Product(a, b) => Some(a.poly_degree()? + b.poly_degree()?),
            FieldMap::Scaled(_, f) => f.poly_degree(),
        }
    }

    /// Upper bound on the Frobenius norm of `D^j f` over the ball of radius `r`.
    pub fn sup_derivative(&self, j: usize, r: f64) -> f64 {
        match self {
            FieldMap::Poly(p) => p.sup_derivative(j, r),
            FieldMap::Builtin(b) => b.sup_derivative(j, r),
            FieldMap::Sum(ts) => ts.iter().map(|t| t.sup_derivative(j, r)).sum(),
            FieldMap::Product(a, b) => (0..=j)
                .map(|i| binomial(j, i) * a.sup_derivative(i, r) * b.sup_derivative(j - i, r))
                .sum(),
            FieldMap::Scaled(c, f) => c.abs() * f.sup_derivative(j, r),
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        FieldMap::Scaled(c, Box::new(self))
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self> {
        Ok(match spec {
            FieldSpec::Poly {
                in_dim,
                out_dim,
                degree,
                coeffs,
            } => {
                if coeffs.len() != degree + 1 {
                    return Err(Error::param(format!(
                        "degree {degree} needs {} coefficient blocks, found {}",
                        degree + 1,
                        coeffs.len()
                    )));
                }
                FieldMap::Poly(PolyMap::new(*in_dim, *out_dim, coeffs.clone())?)
            }
            FieldSpec::Builtin {
                name,
                in_dim,
                out_dim,
                a,
                b,
            } => {
                let b = b.clone().unwrap_or_else(|| vec![0.0; *out_dim]);
                FieldMap::Builtin(Builtin::new(*name, *in_dim, *out_dim, a.clone(), b)?)
            }
            FieldSpec::Sum { terms } => {
                let ts: Vec<FieldMap> = terms.iter().map(Self::from_spec).collect::<Result<_>>()?;
                if ts.is_empty() {
                    return Err(Error::param("sum needs at least one term"));
                }
                for t in &ts[1..] {
                    if t.in_dim() != ts[0].in_dim() || t.out_dim() != ts[0].out_dim() {
                        return Err(Error::param("sum terms must share dimensions"));
                    }
                }
                FieldMap::Sum(ts)
            }
            FieldSpec::Product { factors } => {
                let a = Self::from_spec(&factors[0])?;
                let b = Self::from_spec(&factors[1])?;
                if a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim() {
                    return Err(Error::param("product factors must share dimensions"));
                }
                FieldMap::Product(Box::new(a), Box::new(b))
            }
            FieldSpec::Scaled { factor, field } => Self::from_spec(field)?.scaled(*factor),
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

impl SmoothMap for FieldMap {
    fn in_dim(&self) -> usize {
        match self {
            FieldMap::Poly(p) => p.in_dim(),
            FieldMap::Builtin(b) => b.in_dim(),
            FieldMap::Sum(ts) => ts[0].in_dim(),
            FieldMap::Product(a, _) => a.in_dim(),
            FieldMap::Scaled(_, f) => f.in_dim(),
        }
    }

    fn out_dim(&self) -> usize {
        match self {
            FieldMap::Poly(p) => p.out_dim(),
            FieldMap::Builtin(b) => b.out_dim(),
            FieldMap::Sum(ts) => ts[0].out_dim(),
            FieldMap::Product(a, _) => a.out_dim(),
            FieldMap::Scaled(_, f) => f.out_dim(),
        }
    }

    fn max_order(&self) -> usize {
        match self {
            FieldMap::Poly(p) => p.max_order(),
            FieldMap::Builtin(b) => b.max_order(),
            FieldMap::Sum(ts) => ts.iter().map(|t| t.max_order()).min().unwrap_or(0),
            FieldMap::Product(a, b) => a.max_order().min(b.max_order()),
            FieldMap::Scaled(_, f) => f.max_order(),
        }
    }

    fn derivative(&self, l: usize, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            FieldMap::Poly(p) => p.derivative(l, x),
            FieldMap::Builtin(b) => b.derivative(l, x),
            FieldMap::Sum(ts) => {
                let mut acc = ts[0].derivative(l, x)?;
                for t in &ts[1..] {
                    let d = t.derivative(l, x)?;
                    acc.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
                }
                Ok(acc)
            }
            FieldMap::Product(a, b) => product_derivative(a.as_ref(), b.as_ref(), l, x),
            FieldMap::Scaled(c, f) => Ok(f.derivative(l, x)?.into_iter().map(|v| c * v).collect()),
        }
    }
}

/// Leibniz rule: `D^l(fg)[s] = sum_{S subset slots} D^|S| f[s_S] D^{l-|S|} g[s_{S^c}]`.
fn product_derivative(a: &FieldMap, b: &FieldMap, l: usize, x: &[f64]) -> Result<Vec<f64>> {
    let (m, out) = (a.in_dim(), a.out_dim());
    let da: Vec<Vec<f64>> = (0..=l).map(|j| a.derivative(j, x)).collect::<Result<_>>()?;
    let db: Vec<Vec<f64>> = (0..=l).map(|j| b.derivative(j, x)).collect::<Result<_>>()?;
    let per = level_size(m, l);
    let mut res = vec![0.0; out * per];
    for idx in 0..per {
        let w = word_of(m, l, idx);
        for mask in 0u32..(1 << l) {
            let (mut ia, mut ib, mut ka, mut kb) = (0usize, 0usize, 0usize, 0usize);
            for (pos, &letter) in w.iter().enumerate() {
                if mask & (1 << pos) != 0 {
                    ia = ia * m + letter;
                    ka += 1;
                } else {
                    ib = ib * m + letter;
                    kb += 1;
                }
            }
            let (pa, pb) = (level_size(m, ka), level_size(m, kb));
            for o in 0..out {
                res[o * per + idx] += da[ka][o * pa + ia] * db[kb][o * pb + ib];
            }
        }
    }
    Ok(res)
}

/// JSON description of a field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSpec {
    Poly {
        in_dim: usize,
        out_dim: usize,
        degree: usize,
        coeffs: Vec<Vec<f64>>,
    },
    Builtin {
        name: BuiltinKind,
        in_dim: usize,
        out_dim: usize,
        a: Vec<f64>,
        #[serde(default)]
        b: Option<Vec<f64>>,
    },
    Sum {
        terms: Vec<FieldSpec>,
    },
    Product {
        factors: Box<[FieldSpec; 2]>,
    },
    Scaled {
        factor: f64,
        field: Box<FieldSpec>,
    },
}

/// A map together with a regularity index `gamma`; derivatives are exposed
/// up to `floor_strict(gamma)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LipFunction {
    map: FieldMap,
    gamma: f64,
}

impl LipFunction {
    pub fn new(map: FieldMap, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::param(format!("gamma must be positive, got {gamma}")));
        }
        let n = floor_strict(gamma);
        if map.max_order() < n {
            return Err(Error::OrderTooHigh {
                requested: n,
                available: map.max_order(),
            });
        }
        Ok(LipFunction { map, gamma })
    }

    pub fn from_json(text: &str, gamma: f64) -> Result<Self> {
        let spec: FieldSpec = serde_json::from_str(text)?;
        Self::new(FieldMap::from_spec(&spec)?, gamma)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Number of derivatives available, `floor_strict(gamma)`.
    pub fn order(&self) -> usize {
        floor_strict(self.gamma)
    }

    pub fn map(&self) -> &FieldMap {
        &self.map
    }

    /// `c f`.
    pub fn scaled(&self, c: f64) -> Self {
        LipFunction {
            map: self.map.clone().scaled(c),
            gamma: self.gamma,
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        Self::new(
            FieldMap::Sum(vec![self.map.clone(), other.map.clone()]),
            self.gamma.min(other.gamma),
        )
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.in_dim() != other.in_dim() || self.out_dim() != other.out_dim() {
            return Err(Error::param("product factors must share dimensions"));
        }
        Self::new(
            FieldMap::Product(Box::new(self.map.clone()), Box::new(other.map.clone())),
            self.gamma.min(other.gamma),
        )
    }

    /// Certified bound on the Lip(gamma) norm over the ball of radius `r`:
    /// the sup of the derivatives up to order `n` plus a bound on the Taylor
    /// remainder quotients obtained from `sup |D^{n+1} f|`.
    pub fn lip_norm_bound(&self, r: f64) -> f64 {
        let n = self.order();
        let value = (0..=n)
            .map(|j| self.map.sup_derivative(j, r))
            .fold(0.0, f64::max);
        let top = self.map.sup_derivative(n + 1, r);
        let rem = (0..=n)
            .map(|j| top * (2.0 * r).powf(n as f64 + 1.0 - self.gamma) / factorial(n + 1 - j))
            .fold(0.0, f64::max);
        value + rem
    }

    /// Sampled estimate of the same norm from random pairs in the ball.
    /// This is only an estimate, not a certificate.
    pub fn lip_norm_sampled(&self, points: &[Vec<f64>]) -> Result<f64> {
        let n = self.order();
        let mut value = 0.0f64;
        for x in points {
            for j in 0..=n {
                value = value.max(frobenius(&self.derivative(j, x)?));
            }
        }
        let mut rem = 0.0f64;
        for (i, x) in points.iter().enumerate() {
            for y in &points[i + 1..] {
                rem = rem.max(self.taylor_remainder_check(x, y)?);
            }
        }
        Ok(value + rem)
    }

    /// `max_j |D^j f(x) - D^j P_y(x)| / |x - y|^{gamma - j}` where `P_y` is
    /// the Taylor polynomial of order `n` at `y`.
    pub fn taylor_remainder_check(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let n = self.order();
        let m = self.in_dim();
        let h: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let dist = frobenius(&h);
        if dist == 0.0 {
            return Ok(0.0);
        }
        let dx: Vec<Vec<f64>> = (0..=n).map(|j| self.derivative(j, x)).collect::<Result<_>>()?;
        let dy: Vec<Vec<f64>> = (0..=n).map(|j| self.derivative(j, y)).collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for j in 0..=n {
            let mut diff = dx[j].clone();
            for (k, dk) in dy.iter().enumerate().skip(j) {
                let hs: Vec<&[f64]> = (0..k - j).map(|_| h.as_slice()).collect();
                let term = contract(dk, m, &hs);
                let c = 1.0 / factorial(k - j);
                diff.iter_mut().zip(&term).for_each(|(d, t)| *d -= c * t);
            }
            worst = worst.max(frobenius(&diff) / dist.powf(self.gamma - j as f64));
        }
        Ok(worst)
    }
}

impl SmoothMap for LipFunction {
    fn in_dim(&self) -> usize {
        self.map.in_dim()
    }

    fn out_dim(&self) -> usize {
        self.map.out_dim()
    }

    fn max_order(&self) -> usize {
        self.order()
    }

    fn derivative(&self, l: usize, x: &[f64]) -> Result<Vec<f64>> {
        if l > self.order() {
            return Err(Error::OrderTooHigh {
                requested: l,
                available: self.order(),
            });
        }
        self.map.derivative(l, x)
    }
}

/// `h(x, y) = int_0^1 Df(y + t(x - y)) dt`, so that `f(x) - f(y) = h(x,y)(x - y)`.
///
/// Input is the concatenation `(x, y)`; output index `(f_out, j)` sits at
/// `f_out * in + j`. Quadrature is Gauss-Legendre with enough nodes to be
/// exact for polynomial maps.
#[derive(Clone, Debug)]
pub struct DivisionMap {
    f: LipFunction,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Node count used for non-polynomial maps.
const BUILTIN_NODES: usize = 24;

pub fn divide(f: &LipFunction) -> Result<DivisionMap> {
    if f.order() < 1 {
        return Err(Error::OrderTooHigh {
            requested: 1,
            available: f.order(),
        });
    }
    let n = match f.map().poly_degree() {
        Some(deg) => deg / 2 + 1,
        None => BUILTIN_NODES,
    };
    let (nodes, weights) = gauss_legendre_unit(n);
    Ok(DivisionMap {
        f: f.clone(),
        nodes,
        weights,
    })
}

impl DivisionMap {
    pub fn gamma(&self) -> f64 {
        self.f.gamma() - 1.0
    }

    pub fn field(&self) -> &LipFunction {
        &self.f
    }
}

impl SmoothMap for DivisionMap {
    fn in_dim(&self) -> usize {
        2 * self.f.in_dim()
    }

    fn out_dim(&self) -> usize {
        self.f.out_dim() * self.f.in_dim()
    }

    fn max_order(&self) -> usize {
        self.f.order() - 1
    }

    fn derivative(&self, l: usize, xy: &[f64]) -> Result<Vec<f64>> {
        check_point(self.in_dim(), xy)?;
        if l > self.max_order() {
            return Err(Error::OrderTooHigh {
                requested: l,
                available: self.max_order(),
            });
        }
        let m = self.f.in_dim();
        let (x, y) = xy.split_at(m);
        let fo = self.f.out_dim() * m; // rows of h
        let per_in = level_size(m, l);
        let per_out = level_size(2 * m, l);
        let mut res = vec![0.0; fo * per_out];
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| b + t * (a - b)).collect();
            let d = self.f.map().derivative(l + 1, &z)?;
            for a_idx in 0..per_out {
                let word = word_of(2 * m, l, a_idx);
                let mut weight = w;
                let mut b_idx = 0;
                for &letter in &word {
                    weight *= if letter < m { t } else { 1.0 - t };
                    b_idx = b_idx * m + letter % m;
                }
                for row in 0..fo {
                    res[row * per_out + a_idx] += weight * d[row * per_in + b_idx];
                }
            }
        }
        Ok(res)
    }
}
