//! Truncated tensor algebra `T^(L)(R^d)`.
//!
//! Coefficients are stored densely, level by level, in one flat buffer. A word
//! `(i_1, .., i_k)` at level `k` lives at offset `i_1 d^{k-1} + .. + i_k`
//! inside the level block, i.e. the last letter varies fastest.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// `d^k`, the number of coefficients at level `k`.
pub fn level_size(dim: usize, k: usize) -> usize {
    dim.pow(k as u32)
}

/// Offset of level `k` in the flat buffer.
fn level_offset(dim: usize, k: usize) -> usize {
    (0..k).map(|j| level_size(dim, j)).sum()
}

/// Decode a level-`k` index into its letters.
pub fn word_of(dim: usize, k: usize, mut idx: usize) -> Vec<usize> {
    let mut w = vec![0; k];
    for slot in w.iter_mut().rev() {
        *slot = idx % dim;
        idx /= dim;
    }
    w
}

/// Encode letters into a level index.
pub fn index_of(dim: usize, word: &[usize]) -> usize {
    word.iter().fold(0, |acc, &l| acc * dim + l)
}

#[derive(Clone, PartialEq)]
pub struct TruncatedTensor {
    dim: usize,
    level: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for TruncatedTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("TruncatedTensor");
        s.field("dim", &self.dim).field("level", &self.level);
        let levels: Vec<&[f64]> = (0..=self.level).map(|k| self.level_slice(k)).collect();
        s.field("levels", &levels).finish()
    }
}

impl TruncatedTensor {
    pub fn zeros(dim: usize, level: usize) -> Self {
        assert!(dim > 0, "tensor dimension must be positive");
        TruncatedTensor {
            dim,
            level,
            coeffs: vec![0.0; level_offset(dim, level + 1)],
        }
    }

    /// The unit `1` (scalar part one, everything else zero).
    pub fn one(dim: usize, level: usize) -> Self {
        let mut t = Self::zeros(dim, level);
        t.coeffs[0] = 1.0;
        t
    }

    /// Build from explicit level blocks; block `k` must have `d^k` entries.
    pub fn from_levels(dim: usize, levels: &[Vec<f64>]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::param("at least the scalar level is required"));
        }
        let level = levels.len() - 1;
        let mut t = Self::zeros(dim, level);
        for (k, block) in levels.iter().enumerate() {
            let n = level_size(dim, k);
            if block.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: block.len(),
                });
            }
            t.level_slice_mut(k).copy_from_slice(block);
        }
        Ok(t)
    }

    /// Embed a vector at level one.
    pub fn from_vector(v: &[f64], level: usize) -> Self {
        let mut t = Self::zeros(v.len(), level);
        if level >= 1 {
            t.level_slice_mut(1).copy_from_slice(v);
        }
        t
    }

    /// Basis tensor `e_w` for a word `w` (the empty word is the unit).
    pub fn basis(dim: usize, level: usize, word: &[usize]) -> Result<Self> {
        if word.len() > level {
            return Err(Error::param(format!(
                "word of length {} exceeds level {level}",
                word.len()
            )));
        }
        if let Some(&l) = word.iter().find(|&&l| l >= dim) {
            return Err(Error::param(format!("letter {l} out of range for dim {dim}")));
        }
        let mut t = Self::zeros(dim, level);
        let idx = index_of(dim, word);
        t.level_slice_mut(word.len())[idx] = 1.0;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn level_slice(&self, k: usize) -> &[f64] {
        let off = level_offset(self.dim, k);
        &self.coeffs[off..off + level_size(self.dim, k)]
    }

    pub fn level_slice_mut(&mut self, k: usize) -> &mut [f64] {
        let off = level_offset(self.dim, k);
        let n = level_size(self.dim, k);
        &mut self.coeffs[off..off + n]
    }

    pub fn scalar(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn set_scalar(&mut self, c: f64) {
        self.coeffs[0] = c;
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(a, b)| *a += b);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a *= c);
        out
    }

    /// Truncated product: `pi_k(ab) = sum_j pi_j(a) (x) pi_{k-j}(b)`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.dim;
        let mut out = Self::zeros(d, self.level);
        for k in 0..=self.level {
            let off_k = level_offset(d, k);
            for j in 0..=k {
                let a = self.level_slice(j);
                let b = other.level_slice(k - j);
                let nb = b.len();
                for (ia, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    let base = off_k + ia * nb;
                    let dst = &mut out.coeffs[base..base + nb];
                    for (o, &bv) in dst.iter_mut().zip(b) {
                        *o += av * bv;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Truncated exponential series. A non-zero scalar part `c` contributes `e^c`.
    pub fn exp(&self) -> Self {
        let c = self.scalar();
        let mut u = self.clone();
        u.set_scalar(0.0);
        // Horner: 1 + u(1 + u/2(1 + u/3(...)))
        let mut r = Self::one(self.dim, self.level);
        for n in (1..=self.level).rev() {
            r = u.mul_unchecked(&r).scale(1.0 / n as f64);
            r.coeffs[0] += 1.0;
        }
        if c != 0.0 {
            r = r.scale(c.exp());
        }
        r
    }

    /// Truncated logarithm; requires a strictly positive scalar part.
    pub fn log(&self) -> Result<Self> {
        let c = self.scalar();
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::param(format!(
                "logarithm needs a positive scalar part, found {c}"
            )));
        }
        let mut u = self.scale(1.0 / c);
        u.set_scalar(0.0);
        let mut acc = Self::zeros(self.dim, self.level);
        let mut pow = u.clone();
        for n in 1..=self.level {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            acc.coeffs
                .iter_mut()
                .zip(&pow.coeffs)
                .for_each(|(a, p)| *a += sign * p / n as f64);
            pow = pow.mul_unchecked(&u);
        }
        acc.coeffs[0] = c.ln();
        Ok(acc)
    }

    /// Multiplicative inverse; requires a non-zero scalar part.
    pub fn inverse(&self) -> Result<Self> {
        let c = self.scalar();
        if c == 0.0 || !c.is_finite() {
            return Err(Error::param(format!(
                "inverse needs a non-zero scalar part, found {c}"
            )));
        }
        let mut u = self.scale(1.0 / c);
        u.set_scalar(0.0);
        // (1+u)^{-1} = 1 - u(1 - u(1 - ...))
        let mut r = Self::one(self.dim, self.level);
        for _ in 0..self.level {
            r = u.mul_unchecked(&r).scale(-1.0);
            r.coeffs[0] += 1.0;
        }
        Ok(r.scale(1.0 / c))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        self.try_mul(other).expect("operands share dim and level")
    }

    /// `sum_k |pi_k a|` with the Euclidean norm on each level.
    pub fn norm(&self) -> f64 {
        (0..=self.level).map(|k| level_norm(self.level_slice(k))).sum()
    }

    /// Homogeneous norm `sum_{k>=1} |pi_k a|^{1/k}`.
    pub fn homogeneous_norm(&self) -> f64 {
        (1..=self.level)
            .map(|k| level_norm(self.level_slice(k)).powf(1.0 / k as f64))
            .sum()
    }

    /// Dilation `pi_k -> c^k pi_k`.
    pub fn dilate(&self, c: f64) -> Self {
        let mut out = self.clone();
        let mut ck = 1.0;
        for k in 0..=self.level {
            out.level_slice_mut(k).iter_mut().for_each(|a| *a *= ck);
            ck *= c;
        }
        out
    }

    /// Same coefficients truncated (or zero-extended) to another level.
    pub fn with_level(&self, level: usize) -> Self {
        let mut out = Self::zeros(self.dim, level);
        let n = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    /// Everything above the scalar level, i.e. `a - pi_0(a)`.
    pub fn without_scalar(&self) -> Self {
        let mut out = self.clone();
        out.set_scalar(0.0);
        out
    }

    /// Rebracket levels `k >= 2` as `V^{(k-1)} (x) V`; levels 0 and 1 are dropped.
    pub fn i_prime(&self) -> IPrime {
        let blocks = (2..=self.level)
            .map(|k| self.level_slice(k).to_vec())
            .collect();
        IPrime {
            dim: self.dim,
            level: self.level,
            blocks,
        }
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn level_norm(block: &[f64]) -> f64 {
    block.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Add for &TruncatedTensor {
    type Output = TruncatedTensor;
    fn add(self, rhs: Self) -> TruncatedTensor {
        self.try_add(rhs).expect("incompatible tensors")
    }
}

impl Sub for &TruncatedTensor {
    type Output = TruncatedTensor;
    fn sub(self, rhs: Self) -> TruncatedTensor {
        self.try_sub(rhs).expect("incompatible tensors")
    }
}

impl Mul for &TruncatedTensor {
    type Output = TruncatedTensor;
    fn mul(self, rhs: Self) -> TruncatedTensor {
        self.try_mul(rhs).expect("incompatible tensors")
    }
}

/// An element of `sum_{k=1}^{L-1} V^{(k)} (x) V`, the target of the
/// rebracketing map. `blocks[k-1]` has shape `d^k x d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct IPrime {
    dim: usize,
    level: usize,
    blocks: Vec<Vec<f64>>,
}

impl IPrime {
    pub fn zeros(dim: usize, level: usize) -> Self {
        let blocks = (2..=level).map(|k| vec![0.0; level_size(dim, k)]).collect();
        IPrime { dim, level, blocks }
    }

    /// `(x - pi_0 x) (x) v` with the left factor truncated to level `L-1`.
    pub fn from_pair(x: &TruncatedTensor, v: &[f64]) -> Result<Self> {
        if v.len() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: v.len(),
            });
        }
        let mut out = Self::zeros(x.dim(), x.level());
        for k in 1..x.level() {
            let left = x.level_slice(k);
            let dst = &mut out.blocks[k - 1];
            for (i, &l) in left.iter().enumerate() {
                for (j, &r) in v.iter().enumerate() {
                    dst[i * x.dim() + j] = l * r;
                }
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Block with left factor at level `k` (shape `d^k x d`).
    pub fn block(&self, k: usize) -> &[f64] {
        &self.blocks[k - 1]
    }

    /// Left action `u (x) v -> (a u) (x) v`, truncated.
    pub fn left_mul(&self, a: &TruncatedTensor) -> Result<Self> {
        if a.dim() != self.dim || a.level() != self.level {
            return Err(Error::LevelMismatch {
                left: a.level(),
                right: self.level,
            });
        }
        let d = self.dim;
        let mut out = Self::zeros(d, self.level);
        for k in 1..self.level {
            for m in 1..=k {
                let src = &self.blocks[m - 1];
                let aj = a.level_slice(k - m);
                let dst = &mut out.blocks[k - 1];
                let n = src.len();
                for (ia, &av) in aj.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    for (o, &s) in dst[ia * n..(ia + 1) * n].iter_mut().zip(src) {
                        *o += av * s;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.blocks.iter_mut().zip(&other.blocks) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        out
    }

    /// Flatten back into a tensor (levels 0 and 1 zero).
    pub fn to_tensor(&self) -> TruncatedTensor {
        let mut t = TruncatedTensor::zeros(self.dim, self.level);
        for k in 2..=self.level {
            t.level_slice_mut(k).copy_from_slice(&self.blocks[k - 2]);
        }
        t
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// An element with scalar part exactly one, optionally certified group-like.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    tensor: TruncatedTensor,
    grouplike: bool,
}

impl GroupElement {
    pub fn new(tensor: TruncatedTensor) -> Result<Self> {
        if tensor.scalar() != 1.0 {
            return Err(Error::NotUnital(tensor.scalar()));
        }
        if !tensor.is_finite() {
            return Err(Error::NonFinite("group element coefficients".into()));
        }
        Ok(GroupElement {
            tensor,
            grouplike: false,
        })
    }

    pub fn identity(dim: usize, level: usize) -> Self {
        GroupElement {
            tensor: TruncatedTensor::one(dim, level),
            grouplike: true,
        }
    }

    /// `exp(v)` for a vector increment; always group-like.
    pub fn exp_vector(v: &[f64], level: usize) -> Self {
        let d = v.len();
        let mut t = TruncatedTensor::one(d, level);
        let mut prev = vec![1.0];
        for k in 1..=level {
            let mut cur = vec![0.0; prev.len() * d];
            for (i, &p) in prev.iter().enumerate() {
                for (j, &x) in v.iter().enumerate() {
                    cur[i * d + j] = p * x / k as f64;
                }
            }
            t.level_slice_mut(k).copy_from_slice(&cur);
            prev = cur;
        }
        GroupElement {
            tensor: t,
            grouplike: true,
        }
    }

    /// `exp` of a Lie-type element (scalar part zero); flagged group-like.
    pub fn exp_lie(x: &TruncatedTensor) -> Result<Self> {
        if x.scalar() != 0.0 {
            return Err(Error::param("exp_lie needs a zero scalar part"));
        }
        Ok(GroupElement {
            tensor: x.exp(),
            grouplike: true,
        })
    }

    /// Check the shuffle relation at level two and mark as group-like if it holds.
    pub fn certify_grouplike(mut self, tol: f64) -> Result<Self> {
        if self.tensor.level() >= 2 {
            let d = self.tensor.dim();
            let x = self.tensor.level_slice(1).to_vec();
            let a2 = self.tensor.level_slice(2);
            for i in 0..d {
                for j in 0..d {
                    let sym = a2[i * d + j] + a2[j * d + i];
                    if (sym - x[i] * x[j]).abs() > tol {
                        return Err(Error::param(format!(
                            "shuffle relation fails at ({i},{j}) by {:e}",
                            (sym - x[i] * x[j]).abs()
                        )));
                    }
                }
            }
        }
        self.grouplike = true;
        Ok(self)
    }

    pub fn is_grouplike(&self) -> bool {
        self.grouplike
    }

    pub fn tensor(&self) -> &TruncatedTensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> TruncatedTensor {
        self.tensor
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn level(&self) -> usize {
        self.tensor.level()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut t = self.tensor.try_mul(&other.tensor)?;
        t.set_scalar(1.0);
        Ok(GroupElement {
            tensor: t,
            grouplike: self.grouplike && other.grouplike,
        })
    }

    pub fn inverse(&self) -> Self {
        let mut t = self.tensor.inverse().expect("scalar part is one");
        t.set_scalar(1.0);
        GroupElement {
            tensor: t,
            grouplike: self.grouplike,
        }
    }

    /// `self^{-1} other`.
    pub fn increment_to(&self, other: &Self) -> Result<Self> {
        self.inverse().mul(other)
    }

    pub fn dilate(&self, c: f64) -> Self {
        GroupElement {
            tensor: self.tensor.dilate(c),
            grouplike: self.grouplike,
        }
    }

    pub fn homogeneous_norm(&self) -> f64 {
        self.tensor.homogeneous_norm()
    }

    pub fn with_level(&self, level: usize) -> Self {
        GroupElement {
            tensor: self.tensor.with_level(level),
            grouplike: self.grouplike,
        }
    }
}

/// The map `sigma_{k_1} * .. * sigma_{k_l}` from `V^{(k_1+..+k_l)}` into
/// `V^{(k_1)} (x) .. (x) V^{(k_l)}`.
///
/// It is the component of the deshuffle coproduct singled out by the part
/// sizes, so that on a group-like `a` the image of `pi_{k_1+..+k_l}(a)` is
/// `pi_{k_1}(a) (x) .. (x) pi_{k_l}(a)`. A single part is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionSplit {
    parts: Vec<usize>,
    /// For each admissible assignment, the part receiving each position.
    assignments: Vec<Vec<usize>>,
}

impl CompositionSplit {
    pub fn new(parts: &[usize]) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::param("split parts must be non-empty and positive"));
        }
        let total: usize = parts.iter().sum();
        let mut assignments = Vec::new();
        let mut current = Vec::with_capacity(total);
        let mut remaining = parts.to_vec();
        enumerate_assignments(&mut remaining, total, &mut current, &mut assignments);
        Ok(CompositionSplit {
            parts: parts.to_vec(),
            assignments,
        })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Apply to a level block of size `d^total`; the output is the flattened
    /// tensor product, first part outermost.
    pub fn apply(&self, dim: usize, block: &[f64]) -> Result<Vec<f64>> {
        let total = self.total();
        let n = level_size(dim, total);
        if block.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: block.len(),
            });
        }
        let mut out = vec![0.0; n];
        let mut sub: Vec<Vec<usize>> = self.parts.iter().map(|&k| Vec::with_capacity(k)).collect();
        for (idx, &v) in block.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let word = word_of(dim, total, idx);
            for assign in &self.assignments {
                sub.iter_mut().for_each(Vec::clear);
                for (pos, &part) in assign.iter().enumerate() {
                    sub[part].push(word[pos]);
                }
                let target = sub
                    .iter()
                    .fold(0, |acc, w| acc * level_size(dim, w.len()) + index_of(dim, w));
                out[target] += v;
            }
        }
        Ok(out)
    }
}

fn enumerate_assignments(
    remaining: &mut [usize],
    total: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == total {
        out.push(current.clone());
        return;
    }
    for p in 0..remaining.len() {
        if remaining[p] > 0 {
            remaining[p] -= 1;
            current.push(p);
            enumerate_assignments(remaining, total, current, out);
            current.pop();
            remaining[p] += 1;
        }
    }
}

/// Subsets of `{0..n}` of size `k`, each as a sorted position list, in
/// lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Unordered set partitions of `{0..n}`; blocks are sorted and listed by
/// their smallest element.
pub(crate) fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, n, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exp_of_basis_vector() {
        let e1 = TruncatedTensor::from_vector(&[1.0, 0.0], 3);
        let g = e1.exp();
        assert_eq!(g.level_slice(1), &[1.0, 0.0]);
        assert_eq!(g.level_slice(2), &[0.5, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(g.level_slice(3)[0], 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn homogeneous_norm_of_exp_e1() {
        let g = TruncatedTensor::from_vector(&[1.0, 0.0], 2).exp();
        assert_abs_diff_eq!(g.homogeneous_norm(), 1.0 + 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn log_of_scalar_zero_fails() {
        let t = TruncatedTensor::zeros(2, 2);
        assert!(t.log().is_err());
        assert!(t.inverse().is_err());
    }

    #[test]
    fn level_mismatch_is_rejected() {
        let a = TruncatedTensor::one(2, 2);
        let b = TruncatedTensor::one(2, 3);
        assert!(matches!(a.try_mul(&b), Err(Error::LevelMismatch { .. })));
        let c = TruncatedTensor::one(3, 2);
        assert!(matches!(a.try_add(&c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn group_element_requires_unit_scalar() {
        let t = TruncatedTensor::zeros(2, 2);
        assert!(matches!(GroupElement::new(t), Err(Error::NotUnital(_))));
    }

    #[test]
    fn i_prime_of_exp_e1() {
        let g = TruncatedTensor::from_vector(&[1.0, 0.0], 2).exp();
        let ip = g.i_prime();
        assert_eq!(ip.block(1), &[0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn split_one_one_on_e12() {
        let s = CompositionSplit::new(&[1, 1]).unwrap();
        let out = s.apply(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        // e1 (x) e2 + e2 (x) e1
        assert_eq!(out, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn single_part_split_is_identity() {
        let s = CompositionSplit::new(&[3]).unwrap();
        let block: Vec<f64> = (0..8).map(|i| i as f64).collect();
        assert_eq!(s.apply(2, &block).unwrap(), block);
    }

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        let counts: Vec<usize> = (0..6).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52]);
        assert_eq!(subsets(4, 2).len(), 6);
    }
}
