//! The 2D averaged recurrence at the core of the model:
//!
//! ```text
//! h(i,j) = 1/2 [ (h(i-1,j) + dt*A_t h(i-1,j)) + (h(i,j-1) + dz*A_z h(i,j-1))
//!                + dt*Bt x(i,j) + dz*Bz x(i,j) ]
//! y(i,j) = C(i,j) . h(i,j) + D x(i,j)
//! ```
//!
//! with out-of-range hidden states taken as zero vectors and the 1/2 factor
//! kept uniformly, including at the edges. Provided as a sequential oracle
//! ([`scan2d_sequential`]), a wavefront-parallel forward
//! ([`wavefront::scan2d_wavefront`]), a hand-derived wavefront backward
//! ([`backward::scan2d_backward`]), a closed-form path-sum oracle and
//! influence-map extraction ([`influence`]).

pub mod backward;
pub mod influence;
pub mod op;
pub mod schedule;
pub mod wavefront;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{M2dError, Result};
use crate::ssm::ScanField;
use crate::tensor::{lit, Scalar, Tensor};

pub use backward::{scan2d_backward, Scan2dGrads};
pub use schedule::WavefrontSchedule;
pub use wavefront::scan2d_wavefront;

/// Borrowed operands of one 2D scan.
#[derive(Clone, Copy)]
pub struct Scan2dInput<'a, T: Scalar> {
    /// `[H, W, D]` features.
    pub x: &'a Tensor<T>,
    /// Per-position Bt, Bz, C, dt, dz.
    pub field: &'a ScanField<T>,
    /// `[D, N, N]` vertical-axis state matrices.
    pub a_t: &'a Tensor<T>,
    /// `[D, N, N]` horizontal-axis state matrices.
    pub a_z: &'a Tensor<T>,
    /// `[D]` skip weights.
    pub d_skip: &'a Tensor<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Dims {
    pub h: usize,
    pub w: usize,
    pub d: usize,
    pub n: usize,
}

impl<'a, T: Scalar> Scan2dInput<'a, T> {
    pub(crate) fn dims(&self) -> Result<Dims> {
        let sh = self.x.shape();
        if sh.len() != 3 || sh[0] == 0 || sh[1] == 0 || sh[2] == 0 {
            return Err(M2dError::Dimension(format!("scan input shape {sh:?}")));
        }
        let (h, w, d) = (sh[0], sh[1], sh[2]);
        let n = match self.field.bt.shape() {
            [fh, fw, n] if *fh == h && *fw == w => *n,
            other => {
                return Err(M2dError::Dimension(format!(
                    "field Bt shape {other:?} vs input {sh:?}"
                )))
            }
        };
        for (name, t, want) in [
            ("Bz", &self.field.bz, vec![h, w, n]),
            ("C", &self.field.c, vec![h, w, n]),
            ("dt", &self.field.dt, vec![h, w, d]),
            ("dz", &self.field.dz, vec![h, w, d]),
            ("A_t", self.a_t, vec![d, n, n]),
            ("A_z", self.a_z, vec![d, n, n]),
            ("D_skip", self.d_skip, vec![d]),
        ] {
            if t.shape() != want {
                return Err(M2dError::Dimension(format!(
                    "{name} shape {:?}, expected {want:?}",
                    t.shape()
                )));
            }
        }
        if self.field.dt.data().iter().chain(self.field.dz.data()).any(|&v| v <= T::zero()) {
            return Err(M2dError::Domain("scan2d requires dt, dz > 0 everywhere".into()));
        }
        Ok(Dims { h, w, d, n })
    }
}

/// Full grid of hidden states, retained for the backward pass.
/// Layout: `h[((i*W + j)*D + ch)*N + n]`; states at row -1 / column -1 are
/// zero vectors by convention (never stored).
#[derive(Clone, Debug)]
pub struct HiddenGrid<T: Scalar> {
    pub(crate) h: Vec<T>,
    pub(crate) dims: Dims,
}

impl<T: Scalar> HiddenGrid<T> {
    /// Hidden state vector at `(i, j)` for one channel.
    pub fn state(&self, i: usize, j: usize, ch: usize) -> &[T] {
        let Dims { w, d, n, .. } = self.dims;
        let off = ((i * w + j) * d + ch) * n;
        &self.h[off..off + n]
    }

    pub fn extent(&self) -> (usize, usize, usize, usize) {
        (self.dims.h, self.dims.w, self.dims.d, self.dims.n)
    }
}

/// One cell of the recurrence; shared verbatim by the sequential and
/// wavefront kernels so both produce bitwise-identical results.
///
/// Writes the new state into `out` (length N) and returns the output scalar
/// `C . h + D x`.
#[inline]
pub(crate) fn eval_cell<T: Scalar>(
    a_t_ch: &[T],
    a_z_ch: &[T],
    bt: &[T],
    bz: &[T],
    c: &[T],
    dt_s: T,
    dz_s: T,
    xs: T,
    d_sk: T,
    up: Option<&[T]>,
    left: Option<&[T]>,
    out: &mut [T],
) -> T {
    let n = out.len();
    let half = lit::<T>(0.5);
    for row in 0..n {
        let mut acc = T::zero();
        if let Some(u) = up {
            let mut av = T::zero();
            for k in 0..n {
                av += a_t_ch[row * n + k] * u[k];
            }
            acc += u[row] + dt_s * av;
        }
        if let Some(l) = left {
            let mut av = T::zero();
            for k in 0..n {
                av += a_z_ch[row * n + k] * l[k];
            }
            acc += l[row] + dz_s * av;
        }
        acc += dt_s * bt[row] * xs;
        acc += dz_s * bz[row] * xs;
        out[row] = half * acc;
    }
    let mut y = T::zero();
    for row in 0..n {
        y += c[row] * out[row];
    }
    y + d_sk * xs
}

/// Sequential raster-order evaluation; the oracle for every other kernel.
pub fn scan2d_sequential<T: Scalar>(
    input: &Scan2dInput<'_, T>,
) -> Result<(Tensor<T>, HiddenGrid<T>)> {
    let dims = input.dims()?;
    let Dims { h, w, d, n } = dims;
    let mut grid = vec![T::zero(); h * w * d * n];
    let mut y = vec![T::zero(); h * w * d];

    let xv = input.x.data();
    let btv = input.field.bt.data();
    let bzv = input.field.bz.data();
    let cv = input.field.c.data();
    let dtv = input.field.dt.data();
    let dzv = input.field.dz.data();
    let atv = input.a_t.data();
    let azv = input.a_z.data();
    let dskv = input.d_skip.data();

    for i in 0..h {
        for j in 0..w {
            let pos = i * w + j;
            for ch in 0..d {
                let cell_off = (pos * d + ch) * n;
                let (done, rest) = grid.split_at_mut(cell_off);
                let up = (i > 0).then(|| {
                    let off = (((i - 1) * w + j) * d + ch) * n;
                    &done[off..off + n]
                });
                let left = (j > 0).then(|| {
                    let off = ((pos - 1) * d + ch) * n;
                    &done[off..off + n]
                });
                let out = &mut rest[..n];
                let yv = eval_cell(
                    &atv[ch * n * n..(ch + 1) * n * n],
                    &azv[ch * n * n..(ch + 1) * n * n],
                    &btv[pos * n..(pos + 1) * n],
                    &bzv[pos * n..(pos + 1) * n],
                    &cv[pos * n..(pos + 1) * n],
                    dtv[pos * d + ch],
                    dzv[pos * d + ch],
                    xv[pos * d + ch],
                    dskv[ch],
                    up,
                    left,
                    out,
                );
                if !out.iter().all(|v| v.is_finite()) || !yv.is_finite() {
                    return Err(M2dError::Numeric(format!(
                        "non-finite hidden state at cell ({i}, {j}), channel {ch}"
                    )));
                }
                y[pos * d + ch] = yv;
            }
        }
    }
    Ok((Tensor::new(vec![h, w, d], y)?, HiddenGrid { h: grid, dims }))
}

/// Owned scan operands; convenience for tests, benchmarks, and the CLI.
#[derive(Clone, Debug)]
pub struct Scan2dCase<T: Scalar> {
    pub x: Tensor<T>,
    pub field: ScanField<T>,
    pub a_t: Tensor<T>,
    pub a_z: Tensor<T>,
    pub d_skip: Tensor<T>,
}

impl<T: Scalar> Scan2dCase<T> {
    pub fn input(&self) -> Scan2dInput<'_, T> {
        Scan2dInput {
            x: &self.x,
            field: &self.field,
            a_t: &self.a_t,
            a_z: &self.a_z,
            d_skip: &self.d_skip,
        }
    }

    /// Seeded random instance with well-conditioned step sizes.
    pub fn random(h: usize, w: usize, d: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dt_of = |rng: &mut ChaCha8Rng| {
            let data = (0..h * w * d)
                .map(|_| lit::<T>(crate::ssm::softplus_f64(rng.gen_range(-2.0..0.5))))
                .collect();
            Tensor::new(vec![h, w, d], data).unwrap()
        };
        Scan2dCase {
            x: Tensor::rand_uniform(&[h, w, d], -1.0, 1.0, &mut rng),
            field: ScanField {
                bt: Tensor::rand_uniform(&[h, w, n], -1.0, 1.0, &mut rng),
                bz: Tensor::rand_uniform(&[h, w, n], -1.0, 1.0, &mut rng),
                c: Tensor::rand_uniform(&[h, w, n], -1.0, 1.0, &mut rng),
                dt: dt_of(&mut rng),
                dz: dt_of(&mut rng),
            },
            a_t: Tensor::rand_uniform(&[d, n, n], -1.0, 1.0, &mut rng),
            a_z: Tensor::rand_uniform(&[d, n, n], -1.0, 1.0, &mut rng),
            d_skip: Tensor::rand_uniform(&[d], -1.0, 1.0, &mut rng),
        }
    }

    /// Constant-parameter regime used by the path-sum oracle: N = 1,
    /// `A_t = [[a_t]]`, `A_z = [[a_z]]`, Bt = Bz = 1, dt = dz = 1, C = 1,
    /// D_skip = 0, x = ones.
    pub fn constant(h: usize, w: usize, d: usize, a_t: f64, a_z: f64) -> Self {
        Scan2dCase {
            x: Tensor::ones(&[h, w, d]),
            field: ScanField {
                bt: Tensor::ones(&[h, w, 1]),
                bz: Tensor::ones(&[h, w, 1]),
                c: Tensor::ones(&[h, w, 1]),
                dt: Tensor::ones(&[h, w, d]),
                dz: Tensor::ones(&[h, w, d]),
            },
            a_t: Tensor::full(&[d, 1, 1], lit::<T>(a_t)),
            a_z: Tensor::full(&[d, 1, 1], lit::<T>(a_z)),
            d_skip: Tensor::zeros(&[d]),
        }
    }
}
