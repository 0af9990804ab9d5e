//! Reference computations written from scratch in plain `f64` / complex
//! arithmetic, independent of the library's own routines.

#![allow(dead_code)]

use num_complex::Complex64;
use povm_ascent::linalg::CMatrix;

pub type Real3 = [[f64; 3]; 3];

/// The two-state qutrit ensemble, typed in directly.
pub fn adhoc_states() -> [Real3; 2] {
    let a = [[0.0, 0.0, 0.0], [0.0, 5.0, 2.0], [0.0, 2.0, 10.0]];
    let b = [[5.0, 2.0, 0.0], [2.0, 25.0, 0.0], [0.0, 0.0, 0.0]];
    let scale = |m: Real3, s: f64| m.map(|row| row.map(|x| x / s));
    [scale(a, 30.0), scale(b, 60.0)]
}

/// Mutual information in nats of a joint table given as rows.
pub fn mi_nats(p: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = p.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..p[0].len())
        .map(|k| p.iter().map(|r| r[k]).sum())
        .collect();
    let mut total = 0.0;
    for (j, row) in p.iter().enumerate() {
        for (k, &x) in row.iter().enumerate() {
            if x > 0.0 {
                total += x * (x / (rows[j] * cols[k])).ln();
            }
        }
    }
    total
}

fn expectation(m: &Real3, v: &[f64; 3]) -> f64 {
    (0..3)
        .map(|i| (0..3).map(|j| v[i] * m[i][j] * v[j]).sum::<f64>())
        .sum()
}

/// Columns of `Rz(a) Ry(b) Rz(c)`.
fn basis(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    let rz = |t: f64| {
        [
            [t.cos(), -t.sin(), 0.0],
            [t.sin(), t.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ]
    };
    let ry = |t: f64| {
        [
            [t.cos(), 0.0, t.sin()],
            [0.0, 1.0, 0.0],
            [-t.sin(), 0.0, t.cos()],
        ]
    };
    let mul = |x: Real3, y: Real3| {
        let mut z = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                z[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        z
    };
    let r = mul(mul(rz(a), ry(b)), rz(c));
    [0, 1, 2].map(|k| [r[0][k], r[1][k], r[2][k]])
}

fn basis_information(x: &[f64]) -> f64 {
    let states = adhoc_states();
    let vs = basis(x[0], x[1], x[2]);
    let p: Vec<Vec<f64>> = states
        .iter()
        .map(|s| vs.iter().map(|v| expectation(s, v)).collect())
        .collect();
    mi_nats(&p)
}

/// Rank-one projector plus its complement.
fn split_information(x: &[f64]) -> f64 {
    let states = adhoc_states();
    let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if norm < 1e-9 {
        return f64::NEG_INFINITY;
    }
    let v = [x[0] / norm, x[1] / norm, x[2] / norm];
    let p: Vec<Vec<f64>> = states
        .iter()
        .map(|s| {
            let tr: f64 = (0..3).map(|i| s[i][i]).sum();
            let on = expectation(s, &v);
            vec![on, tr - on]
        })
        .collect();
    mi_nats(&p)
}

/// Grid search over `[lo, lo + width)^n` followed by compass search down
/// to step `1e-11`.
fn maximize(f: impl Fn(&[f64]) -> f64, n: usize, grid: usize, lo: f64, width: f64) -> f64 {
    let h = width / grid as f64;
    let mut best = vec![0.0; n];
    let mut best_value = f64::NEG_INFINITY;
    let total = grid.pow(n as u32);
    for index in 0..total {
        let mut rest = index;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let i = rest % grid;
                rest /= grid;
                lo + i as f64 * h
            })
            .collect();
        let v = f(&x);
        if v > best_value {
            best_value = v;
            best = x;
        }
    }
    let mut step = h;
    while step > 1e-11 {
        let mut improved = false;
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut y = best.clone();
                y[i] += sign * step;
                let v = f(&y);
                if v > best_value {
                    best_value = v;
                    best = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best_value
}

/// Best mutual information over von Neumann measurements in real bases.
pub fn best_real_basis_nats() -> f64 {
    maximize(basis_information, 3, 40, 0.0, std::f64::consts::TAU)
}

/// Best mutual information over two-outcome measurements made of a real
/// rank-one projector and its complement.
pub fn best_split_nats() -> f64 {
    maximize(split_information, 3, 21, -1.0, 2.0)
}

/// `(|01⟩ − |10⟩)/√2` with the first qubit most significant.
pub fn singlet_by_hand() -> Vec<Complex64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(r, 0.0),
        Complex64::new(-r, 0.0),
        Complex64::new(0.0, 0.0),
    ]
}

/// Reduced state of qubits `(2, 3)` (or `(0, 1)`) of a four-qubit operator.
pub fn trace_out_pair(m: &CMatrix, keep_last: bool) -> CMatrix {
    CMatrix::from_fn(4, 4, |r, c| {
        (0..4)
            .map(|t| {
                let (i, j) = if keep_last {
                    (t * 4 + r, t * 4 + c)
                } else {
                    (r * 4 + t, c * 4 + t)
                };
                m[(i, j)]
            })
            .sum()
    })
}

pub fn single_qubit_pauli(axis: usize) -> [[Complex64; 2]; 2] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match axis {
        0 => [[z, one], [one, z]],
        1 => [[z, -i], [i, z]],
        _ => [[one, z], [z, -one]],
    }
}

/// `(1 + sign σ) / 6` on the most significant of four qubits, identity
/// elsewhere.
pub fn alice_outcome(axis: usize, sign: f64) -> CMatrix {
    let s = single_qubit_pauli(axis);
    CMatrix::from_fn(16, 16, |r, c| {
        if r % 8 != c % 8 {
            return Complex64::new(0.0, 0.0);
        }
        let delta = if r / 8 == c / 8 { 1.0 } else { 0.0 };
        (Complex64::new(delta, 0.0) + s[r / 8][c / 8] * sign) / 6.0
    })
}
