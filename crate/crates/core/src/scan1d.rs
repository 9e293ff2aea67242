//! Reference sequential 1D selective scan: `h_t = Ab_t h_{t-1} + Bb_t x_t`,
//! `y_t = C_t . h_t + D x_t`. Used as a baseline and as the reduction target
//! for single-row / single-column 2D inputs.

use crate::error::{M2dError, Result};
use crate::tensor::{Scalar, Tensor};

/// Inputs for one scan: all step counts must equal `L`. The step matrices and
/// vectors are shared across the `D` channels; the prior state is zero.
#[derive(Clone, Debug)]
pub struct Scan1dInput<T: Scalar> {
    /// `[L, D]` input sequence.
    pub x: Tensor<T>,
    /// `[L, N, N]` per-step state transition.
    pub a_bar: Tensor<T>,
    /// `[L, N]` per-step input vector.
    pub b_bar: Tensor<T>,
    /// `[L, N]` per-step output vector.
    pub c: Tensor<T>,
    /// `[D]` skip weights.
    pub d_skip: Tensor<T>,
}

/// Sequential scan over all channels; output `[L, D]`.
pub fn selective_scan_1d<T: Scalar>(input: &Scan1dInput<T>) -> Result<Tensor<T>> {
    let l = input.x.shape().first().copied().unwrap_or(0);
    let d = input.x.shape().get(1).copied().unwrap_or(0);
    if l == 0 {
        return Err(M2dError::Dimension("selective_scan_1d requires L >= 1".into()));
    }
    let n = input.b_bar.shape()[1];
    if input.a_bar.shape() != [l, n, n]
        || input.b_bar.shape() != [l, n]
        || input.c.shape() != [l, n]
        || input.d_skip.shape() != [d]
    {
        return Err(M2dError::Dimension(format!(
            "selective_scan_1d: inconsistent step counts (x {:?}, a {:?}, b {:?}, c {:?}, d {:?})",
            input.x.shape(),
            input.a_bar.shape(),
            input.b_bar.shape(),
            input.c.shape(),
            input.d_skip.shape()
        )));
    }

    let xv = input.x.data();
    let av = input.a_bar.data();
    let bv = input.b_bar.data();
    let cv = input.c.data();
    let dv = input.d_skip.data();

    let mut y = vec![T::zero(); l * d];
    let mut h = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    for ch in 0..d {
        h.iter_mut().for_each(|v| *v = T::zero());
        for t in 0..l {
            let a_t = &av[t * n * n..(t + 1) * n * n];
            let b_t = &bv[t * n..(t + 1) * n];
            let c_t = &cv[t * n..(t + 1) * n];
            let xs = xv[t * d + ch];
            for i in 0..n {
                let mut acc = T::zero();
                for j in 0..n {
                    acc += a_t[i * n + j] * h[j];
                }
                next[i] = acc + b_t[i] * xs;
            }
            h.copy_from_slice(&next);
            let mut out = T::zero();
            for i in 0..n {
                out += c_t[i] * h[i];
            }
            y[t * d + ch] = out + dv[ch] * xs;
        }
    }
    Tensor::new(vec![l, d], y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_input(l: usize, n: usize, d: usize, seed: u64) -> Scan1dInput<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Scan1dInput {
            x: Tensor::rand_uniform(&[l, d], -1.0, 1.0, &mut rng),
            a_bar: Tensor::rand_uniform(&[l, n, n], -0.6, 0.6, &mut rng),
            b_bar: Tensor::rand_uniform(&[l, n], -1.0, 1.0, &mut rng),
            c: Tensor::rand_uniform(&[l, n], -1.0, 1.0, &mut rng),
            d_skip: Tensor::rand_uniform(&[d], -1.0, 1.0, &mut rng),
        }
    }

    /// Independent re-implementation retaining the whole state history.
    fn naive_scan(input: &Scan1dInput<f64>) -> Vec<f64> {
        let l = input.x.shape()[0];
        let d = input.x.shape()[1];
        let n = input.b_bar.shape()[1];
        let mut y = vec![0.0; l * d];
        for ch in 0..d {
            let mut history: Vec<Vec<f64>> = vec![vec![0.0; n]];
            for t in 0..l {
                let prev = history.last().unwrap().clone();
                let mut h = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        h[i] += input.a_bar.data()[(t * n + i) * n + j] * prev[j];
                    }
                    h[i] += input.b_bar.data()[t * n + i] * input.x.data()[t * d + ch];
                }
                let mut out = 0.0;
                for i in 0..n {
                    out += input.c.data()[t * n + i] * h[i];
                }
                y[t * d + ch] = out + input.d_skip.data()[ch] * input.x.data()[t * d + ch];
                history.push(h);
            }
        }
        y
    }

    #[test]
    fn length_one_is_pure_injection() {
        let input = random_input(1, 3, 2, 0);
        let y = selective_scan_1d(&input).unwrap();
        for ch in 0..2 {
            let x0 = input.x.data()[ch];
            let mut want = input.d_skip.data()[ch] * x0;
            for i in 0..3 {
                want += input.c.data()[i] * input.b_bar.data()[i] * x0;
            }
            assert!((y.data()[ch] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn two_step_scalar_hand_expansion() {
        // N=1, constant a, b, c, D=0, x=[1,1]: y = [cb, c(ab+b)]
        let (a, b, c) = (0.7f64, 0.4f64, 1.3f64);
        let input = Scan1dInput {
            x: Tensor::new(vec![2, 1], vec![1.0, 1.0]).unwrap(),
            a_bar: Tensor::new(vec![2, 1, 1], vec![a, a]).unwrap(),
            b_bar: Tensor::new(vec![2, 1], vec![b, b]).unwrap(),
            c: Tensor::new(vec![2, 1], vec![c, c]).unwrap(),
            d_skip: Tensor::new(vec![1], vec![0.0]).unwrap(),
        };
        let y = selective_scan_1d(&input).unwrap();
        assert!((y.data()[0] - c * b).abs() < 1e-15);
        assert!((y.data()[1] - c * (a * b + b)).abs() < 1e-15);
    }

    #[test]
    fn matches_naive_history_oracle() {
        let input = random_input(16, 4, 3, 42);
        let y = selective_scan_1d(&input).unwrap();
        let want = naive_scan(&input);
        for (got, want) in y.data().iter().zip(&want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn causality_of_perturbations() {
        let base = random_input(10, 3, 2, 5);
        let y0 = selective_scan_1d(&base).unwrap();
        let mut bumped = base.clone();
        let t_hit = 6;
        bumped.x.data_mut()[t_hit * 2] += 0.25;
        let y1 = selective_scan_1d(&bumped).unwrap();
        for t in 0..t_hit {
            for ch in 0..2 {
                assert_eq!(y0.data()[t * 2 + ch], y1.data()[t * 2 + ch]);
            }
        }
        assert_ne!(y0.data()[t_hit * 2], y1.data()[t_hit * 2]);
    }

    #[test]
    fn linear_in_input_for_fixed_parameters() {
        let base = random_input(8, 2, 2, 9);
        let mut scaled = base.clone();
        for v in scaled.x.data_mut() {
            *v *= 3.0;
        }
        let y1 = selective_scan_1d(&base).unwrap();
        let y3 = selective_scan_1d(&scaled).unwrap();
        for (a, b) in y1.data().iter().zip(y3.data()) {
            assert!((3.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_step_counts() {
        let mut input = random_input(4, 2, 2, 1);
        input.c = Tensor::zeros(&[3, 2]);
        assert!(matches!(selective_scan_1d(&input), Err(M2dError::Dimension(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let _ = rng.gen_range(0.0..1.0);
    }
}
