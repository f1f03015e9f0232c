//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughkit::funcs::{FieldMap, LipFunction, PolyMap};
use roughkit::path::SampledPath;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random polyline vertices with `segments` steps of size at most `scale` per coordinate.
pub fn random_vertices(rng: &mut ChaCha8Rng, d: usize, segments: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut v = vec![vec![0.0; d]];
    for _ in 0..segments {
        let last = v.last().unwrap().clone();
        v.push(last.iter().map(|x| x + scale * rng.gen_range(-1.0..1.0)).collect());
    }
    v
}

pub fn polyline(vertices: &[Vec<f64>]) -> SampledPath {
    SampledPath::polyline(vertices, 1).unwrap()
}

/// Signature of a polyline by direct word-indexed iterated sums, written
/// independently of the library's tensor product. Levels `0..=level`, each
/// a map from word index (first letter most significant) to coefficient.
pub fn oracle_signature(vertices: &[Vec<f64>], level: usize) -> Vec<Vec<f64>> {
    let d = vertices[0].len();
    let words = |k: usize| -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (0..d).map(move |c| {
                        let mut w2 = w.clone();
                        w2.push(c);
                        w2
                    })
                })
                .collect();
        }
        out
    };
    let all: Vec<Vec<Vec<usize>>> = (0..=level).map(words).collect();
    let index = |w: &[usize]| w.iter().fold(0usize, |acc, &c| acc * d + c);
    let mut sig: Vec<Vec<f64>> = (0..=level).map(|k| vec![0.0; d.pow(k as u32)]).collect();
    sig[0][0] = 1.0;
    for seg in vertices.windows(2) {
        let delta: Vec<f64> = (0..d).map(|i| seg[1][i] - seg[0][i]).collect();
        let mut next = sig.clone();
        for k in 1..=level {
            for w in &all[k] {
                // sum over splits w = u v with |v| >= 1: S[u] * prod(delta_v) / |v|!
                let mut acc = 0.0;
                for cut in 0..k {
                    let (u, v) = w.split_at(cut);
                    let mut term = sig[cut][index(u)];
                    let mut fact = 1.0;
                    for (j, &c) in v.iter().enumerate() {
                        term *= delta[c];
                        fact *= (j + 1) as f64;
                    }
                    acc += term / fact;
                }
                next[k][index(w)] = sig[k][index(w)] + acc;
            }
        }
        sig = next;
    }
    sig
}

/// Classical RK4 along a polyline for `dy = F(y) dx`, `F(y)` an `m x d` matrix
/// (row-major), with `steps` substeps per segment.
pub fn rk4_polyline(
    field: &dyn Fn(&[f64]) -> Vec<f64>,
    vertices: &[Vec<f64>],
    y0: &[f64],
    steps: usize,
) -> Vec<f64> {
    let m = y0.len();
    let d = vertices[0].len();
    let mut y = y0.to_vec();
    for seg in vertices.windows(2) {
        let dx: Vec<f64> = (0..d).map(|i| (seg[1][i] - seg[0][i]) / steps as f64).collect();
        let rhs = |y: &[f64]| -> Vec<f64> {
            let f = field(y);
            (0..m).map(|o| (0..d).map(|i| f[o * d + i] * dx[i]).sum()).collect()
        };
        for _ in 0..steps {
            let k1 = rhs(&y);
            let y2: Vec<f64> = (0..m).map(|i| y[i] + 0.5 * k1[i]).collect();
            let k2 = rhs(&y2);
            let y3: Vec<f64> = (0..m).map(|i| y[i] + 0.5 * k2[i]).collect();
            let k3 = rhs(&y3);
            let y4: Vec<f64> = (0..m).map(|i| y[i] + k3[i]).collect();
            let k4 = rhs(&y4);
            for i in 0..m {
                y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
            }
        }
    }
    y
}

/// `exp(M)` for a small square matrix by a long Taylor series.
fn expm(m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    let mut term = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = 1.0;
        term[i * n + i] = 1.0;
    }
    for k in 1..30 {
        let mut next = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                next[i * n + j] = (0..n).map(|l| term[i * n + l] * m[l * n + j]).sum::<f64>() / k as f64;
            }
        }
        term = next;
        out.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
    }
    out
}

/// Flow of `dy = A_1 y dx^1 + A_2 y dx^2` along a sequence of shrinking loops
/// with total signed area `area`: each loop is a stick from the base point to
/// a vertex of a regular `sides`-gon centred at the base point, once round the
/// polygon counter-clockwise, and back. Start vertices rotate from loop to
/// loop so the third-order terms of the sticks cancel on average.
pub fn lollipop_flow(a1: &[f64], a2: &[f64], y0: &[f64], area: f64, loops: usize, sides: usize) -> Vec<f64> {
    let n = y0.len();
    let per = area / loops as f64;
    let two_pi = std::f64::consts::TAU;
    let r = (2.0 * per.abs() / (sides as f64 * (two_pi / sides as f64).sin())).sqrt();
    let orient = per.signum();
    let step = |y: &[f64], dx: [f64; 2]| -> Vec<f64> {
        let gen: Vec<f64> = a1.iter().zip(a2).map(|(u, v)| u * dx[0] + v * dx[1]).collect();
        let e = expm(&gen, n);
        (0..n).map(|i| (0..n).map(|j| e[i * n + j] * y[j]).sum()).collect()
    };
    let mut y = y0.to_vec();
    for l in 0..loops {
        let phase = two_pi * l as f64 / loops as f64;
        let vert = |k: usize| {
            let th = phase + orient * two_pi * k as f64 / sides as f64;
            [r * th.cos(), r * th.sin()]
        };
        let mut pos = [0.0, 0.0];
        let mut go = |y: &mut Vec<f64>, to: [f64; 2]| {
            *y = step(y, [to[0] - pos[0], to[1] - pos[1]]);
            pos = to;
        };
        go(&mut y, vert(0));
        for k in 1..=sides {
            go(&mut y, vert(k % sides));
        }
        go(&mut y, [0.0, 0.0]);
    }
    y
}

/// Linear vector fields `A_1 = [[0,1],[0,0]]`, `A_2 = [[0,0],[1,0]]` as a
/// field `R^2 -> L(R^2, R^2)` (flat `(o d + i) m + j`).
pub fn sl2_field(gamma: f64) -> (LipFunction, Vec<f64>, Vec<f64>) {
    let a1 = vec![0.0, 1.0, 0.0, 0.0];
    let a2 = vec![0.0, 0.0, 1.0, 0.0];
    let mut lin = vec![0.0; 8];
    for o in 0..2 {
        for j in 0..2 {
            lin[(o * 2) * 2 + j] = a1[o * 2 + j];
            lin[(o * 2 + 1) * 2 + j] = a2[o * 2 + j];
        }
    }
    let f = LipFunction::new(FieldMap::Poly(PolyMap::linear(2, 4, lin).unwrap()), gamma).unwrap();
    (f, a1, a2)
}

/// `V_1(y) = (y2, -y1 + 0.2 y1^3)`, `V_2(y) = (0.3 y1 y2^2, 1 - 0.1 y2^3)`.
pub fn cubic_poly() -> PolyMap {
    let w = 4;
    let mut b0 = vec![0.0; w];
    let mut b1 = vec![0.0; w * 2];
    let mut b3 = vec![0.0; w * 8];
    let i3 = |a: usize, b: usize, c: usize| a * 4 + b * 2 + c;
    b1[1] = 1.0; // o=0,i=0: y2
    b1[(2) * 2] = -1.0; // o=1,i=0: -y1
    b3[2 * 8 + i3(0, 0, 0)] = 0.2;
    b3[8 + i3(0, 1, 1)] = 0.3; // o=0,i=1
    b0[3] = 1.0; // o=1,i=1
    b3[3 * 8 + i3(1, 1, 1)] = -0.1;
    PolyMap::new(2, 4, vec![b0, b1, vec![0.0; w * 4], b3]).unwrap()
}

pub fn cubic_classical(y: &[f64]) -> Vec<f64> {
    let (a, b) = (y[0], y[1]);
    // rows: state component o, columns: driver i
    vec![b, 0.3 * a * b * b, -a + 0.2 * a * a * a, 1.0 - 0.1 * b * b * b]
}

pub fn cubic_field() -> LipFunction {
    LipFunction::new(FieldMap::Poly(cubic_poly()), 3.5).unwrap()
}

pub fn exp_field() -> LipFunction {
    LipFunction::new(FieldMap::Poly(PolyMap::linear(1, 1, vec![1.0]).unwrap()), 3.5).unwrap()
}

pub const EXP_VERTICES: [[f64; 1]; 4] = [[0.0], [0.4], [-0.1], [0.6]];
pub const CUBIC_VERTICES: [[f64; 2]; 4] = [[0.0, 0.0], [0.5, 0.2], [0.3, 0.6], [0.8, 0.4]];

pub fn exp_vertices() -> Vec<Vec<f64>> {
    EXP_VERTICES.iter().map(|v| v.to_vec()).collect()
}

pub fn cubic_vertices() -> Vec<Vec<f64>> {
    CUBIC_VERTICES.iter().map(|v| v.to_vec()).collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}
