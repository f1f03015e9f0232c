//! Small dense helpers shared by the one-form and function modules.

use nalgebra::{DMatrix, SymmetricEigen};

/// Largest singular value of a row-major `rows x cols` matrix.
pub fn spectral_norm(rows: usize, cols: usize, a: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    if rows == 1 || cols == 1 {
        return a.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    // Gram matrix on the smaller side.
    let (n, gram) = if rows <= cols {
        let mut g = vec![0.0; rows * rows];
        for i in 0..rows {
            for j in i..rows {
                let s: f64 = (0..cols).map(|c| a[i * cols + c] * a[j * cols + c]).sum();
                g[i * rows + j] = s;
                g[j * rows + i] = s;
            }
        }
        (rows, g)
    } else {
        let mut g = vec![0.0; cols * cols];
        for i in 0..cols {
            for j in i..cols {
                let s: f64 = (0..rows).map(|r| a[r * cols + i] * a[r * cols + j]).sum();
                g[i * cols + j] = s;
                g[j * cols + i] = s;
            }
        }
        (cols, g)
    };
    let lambda = if n == 2 {
        let (p, q, r) = (gram[0], gram[1], gram[3]);
        let mean = 0.5 * (p + r);
        let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        mean + disc
    } else {
        let m = DMatrix::from_row_slice(n, n, &gram);
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    };
    lambda.max(0.0).sqrt()
}

/// Contract a flat `out x in^l` tensor with `l` vectors, one per input slot.
pub fn contract(tensor: &[f64], in_dim: usize, vectors: &[&[f64]]) -> Vec<f64> {
    let mut cur = tensor.to_vec();
    for v in vectors.iter().rev() {
        debug_assert_eq!(v.len(), in_dim);
        let n = cur.len() / in_dim;
        let mut next = vec![0.0; n];
        for (i, slot) in next.iter_mut().enumerate() {
            let row = &cur[i * in_dim..(i + 1) * in_dim];
            *slot = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        cur = next;
    }
    cur
}

/// Gauss-Legendre nodes and weights on `[0, 1]` (Golub-Welsch).
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let w = 2.0 * eig.eigenvectors[(0, i)].powi(2);
            (0.5 * (x + 1.0), 0.5 * w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
