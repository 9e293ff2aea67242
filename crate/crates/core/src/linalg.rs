//! Small dense matrix helpers for the discretization rules (state sizes are
//! tiny, so everything here is plain O(N^3) code).

use crate::error::{M2dError, Result};
use crate::tensor::Scalar;

/// Infinity norm (max absolute row sum) of a square matrix.
pub fn inf_norm<T: Scalar>(a: &[T], n: usize) -> f64 {
    (0..n)
        .map(|i| {
            a[i * n..(i + 1) * n]
                .iter()
                .map(|v| v.abs().to_f64().unwrap())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

pub fn mat_mul<T: Scalar>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn mat_vec<T: Scalar>(a: &[T], x: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    for i in 0..n {
        let mut acc = T::zero();
        for j in 0..n {
            acc += a[i * n + j] * x[j];
        }
        out[i] = acc;
    }
    out
}

pub fn identity<T: Scalar>(n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        out[i * n + i] = T::one();
    }
    out
}

/// Matrix exponential by scaling-and-squaring over a Taylor series.
pub fn mat_exp<T: Scalar>(a: &[T], n: usize) -> Vec<T> {
    // Scale until the norm is comfortably inside the series radius.
    let norm = inf_norm(a, n);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = T::from_f64(1.0 / (1u64 << s) as f64).unwrap();
    let scaled: Vec<T> = a.iter().map(|&v| v * scale).collect();

    // exp(X) = sum X^k / k!, truncated when terms vanish.
    let mut result = identity::<T>(n);
    let mut term = identity::<T>(n);
    for k in 1..=24 {
        term = mat_mul(&term, &scaled, n);
        let inv_k = T::from_f64(1.0 / k as f64).unwrap();
        for t in term.iter_mut() {
            *t = *t * inv_k;
        }
        for (r, &t) in result.iter_mut().zip(&term) {
            *r = *r + t;
        }
        if inf_norm(&term, n) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = mat_mul(&result, &result, n);
    }
    result
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<T: Scalar>(a: &[T], b: &[T], n: usize) -> Result<Vec<T>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs().to_f64().unwrap() < 1e-300 {
            return Err(M2dError::Numeric("singular matrix in solve".into()));
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                let v = m[col * n + j];
                m[r * n + j] = m[r * n + j] - f * v;
            }
            let xc = x[col];
            x[r] = x[r] - f * xc;
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc = acc - m[i * n + j] * x[j];
        }
        x[i] = acc / m[i * n + i];
    }
    Ok(x)
}
