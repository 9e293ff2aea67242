//! Recorded-operation tape for reverse-mode differentiation.
//!
//! A [`Graph`] owns every tensor produced while building a computation; ops
//! return [`Var`] handles. Values stay in their slots until the graph is
//! dropped, so backward rules only store handles. Replaying the tape in
//! reverse visits each recorded output exactly once (its gradient is taken,
//! consumed, and never needed again).

use crate::error::{M2dError, Result};

use super::parallel::{self, tree_sum};
use super::scalar::{lit, Scalar};
use super::Tensor;

/// Handle to a tensor slot inside a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

pub(crate) struct Slot<T: Scalar> {
    value: Tensor<T>,
    grad: Option<Vec<T>>,
    needs_grad: bool,
}

/// Borrowed view of the slot table handed to backward rules.
pub(crate) struct Slots<'a, T: Scalar>(&'a mut [Slot<T>]);

impl<'a, T: Scalar> Slots<'a, T> {
    pub(crate) fn value(&self, v: Var) -> &Tensor<T> {
        &self.0[v.0].value
    }

    pub(crate) fn needs(&self, v: Var) -> bool {
        self.0[v.0].needs_grad
    }

    pub(crate) fn take_grad(&mut self, v: Var) -> Option<Vec<T>> {
        self.0[v.0].grad.take()
    }

    /// Accumulate `contrib` into the gradient of `v` (allocating zeros first
    /// if the slot has none yet).
    pub(crate) fn add_grad(&mut self, v: Var, contrib: &[T]) {
        let slot = &mut self.0[v.0];
        let g = slot.grad.get_or_insert_with(|| vec![T::zero(); slot.value.numel()]);
        debug_assert_eq!(g.len(), contrib.len());
        for (gi, &ci) in g.iter_mut().zip(contrib) {
            *gi += ci;
        }
    }
}

pub(crate) trait TapeOp<T: Scalar> {
    fn backward(&self, slots: &mut Slots<T>);
}

/// Operation tape plus the tensor arena it operates on. Single-owner; not
/// shared across threads (kernels may fan out internally).
pub struct Graph<T: Scalar> {
    slots: Vec<Slot<T>>,
    ops: Vec<Box<dyn TapeOp<T>>>,
    recording: bool,
}

impl<T: Scalar> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Graph<T> {
    pub fn new() -> Self {
        Graph { slots: Vec::new(), ops: Vec::new(), recording: true }
    }

    /// A graph that never records backward rules (forward-only evaluation).
    pub fn inference() -> Self {
        Graph { slots: Vec::new(), ops: Vec::new(), recording: false }
    }

    /// Insert a tensor as a leaf; its `requires_grad` flag decides whether
    /// gradients flow to it.
    pub fn leaf(&mut self, t: Tensor<T>) -> Var {
        let needs = self.recording && t.requires_grad;
        self.push_slot(t, needs)
    }

    /// Leaf that never receives gradients.
    pub fn constant(&mut self, t: Tensor<T>) -> Var {
        self.push_slot(t, false)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.slots[v.0].value
    }

    pub fn grad(&self, v: Var) -> Option<&[T]> {
        self.slots[v.0].grad.as_deref()
    }

    pub fn zero_grads(&mut self) {
        for s in &mut self.slots {
            s.grad = None;
        }
    }

    /// Drop every recorded operation and tensor.
    pub fn clear(&mut self) {
        self.slots.clear();
        self.ops.clear();
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    fn push_slot(&mut self, t: Tensor<T>, needs_grad: bool) -> Var {
        self.slots.push(Slot { value: t, grad: None, needs_grad });
        Var(self.slots.len() - 1)
    }

    fn finish_op(
        &mut self,
        out: Tensor<T>,
        needs: bool,
        op: impl FnOnce(Var) -> Box<dyn TapeOp<T>>,
        what: &str,
    ) -> Result<Var> {
        #[cfg(debug_assertions)]
        if !out.is_finite() {
            return Err(M2dError::Numeric(format!("{what} produced a non-finite value")));
        }
        #[cfg(not(debug_assertions))]
        let _ = what;
        let needs = needs && self.recording;
        let v = self.push_slot(out, needs);
        if needs {
            self.ops.push(op(v));
        }
        Ok(v)
    }

    /// Entry point for fused ops defined in other modules.
    pub(crate) fn push_custom(
        &mut self,
        out: Tensor<T>,
        inputs_need: bool,
        op: impl FnOnce(Var) -> Box<dyn TapeOp<T>>,
        what: &str,
    ) -> Result<Var> {
        self.finish_op(out, inputs_need, op, what)
    }

    pub(crate) fn any_needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.slots[v.0].needs_grad)
    }

    // ---- backward ------------------------------------------------------

    /// Reverse-mode sweep from a scalar root. Every reachable `requires_grad`
    /// leaf ends up with an accumulated gradient; repeated calls without
    /// `zero_grads` keep accumulating.
    pub fn backward(&mut self, root: Var) -> Result<()> {
        if self.slots[root.0].value.numel() != 1 {
            return Err(M2dError::Contract(format!(
                "backward root must be scalar, got shape {:?}",
                self.slots[root.0].value.shape()
            )));
        }
        {
            let mut slots = Slots(&mut self.slots);
            slots.add_grad(root, &[T::one()]);
        }
        let ops = std::mem::take(&mut self.ops);
        {
            let mut slots = Slots(&mut self.slots);
            for op in ops.iter().rev() {
                op.backward(&mut slots);
            }
        }
        self.ops = ops;
        // Leaves not reachable from the root still report a zero gradient.
        for s in &mut self.slots {
            if s.value.requires_grad && s.grad.is_none() {
                s.grad = Some(vec![T::zero(); s.value.numel()]);
            }
        }
        Ok(())
    }

    // ---- elementwise ----------------------------------------------------

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, BinKind::Add)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, BinKind::Sub)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, BinKind::Mul)
    }

    fn binary(&mut self, a: Var, b: Var, kind: BinKind) -> Result<Var> {
        let bc = Bcast::new(self.value(a).shape(), self.value(b).shape())?;
        let (av, bv) = (self.value(a).data(), self.value(b).data());
        let mut out = vec![T::zero(); bc.numel()];
        bc.for_each(|o, ai, bi| {
            out[o] = match kind {
                BinKind::Add => av[ai] + bv[bi],
                BinKind::Sub => av[ai] - bv[bi],
                BinKind::Mul => av[ai] * bv[bi],
            }
        });
        let out = Tensor::new(bc.out_shape.clone(), out)?;
        let needs = self.any_needs(&[a, b]);
        self.finish_op(out, needs, |o| Box::new(BinOp { a, b, out: o, kind }), "elementwise")
    }

    pub fn exp(&mut self, a: Var) -> Result<Var> {
        self.unary(a, UnKind::Exp)
    }

    /// softplus(v) = ln(1 + e^v), evaluated in overflow-safe form.
    pub fn softplus(&mut self, a: Var) -> Result<Var> {
        self.unary(a, UnKind::Softplus)
    }

    /// GELU, tanh approximation.
    pub fn gelu(&mut self, a: Var) -> Result<Var> {
        self.unary(a, UnKind::Gelu)
    }

    fn unary(&mut self, a: Var, kind: UnKind) -> Result<Var> {
        let data = self.value(a).data().iter().map(|&x| kind.eval(x)).collect();
        let out = Tensor::new(self.value(a).shape().to_vec(), data)?;
        let needs = self.any_needs(&[a]);
        self.finish_op(out, needs, |o| Box::new(UnOp { a, out: o, kind }), kind.name())
    }

    /// Multiply by a compile-time constant scalar.
    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let k = lit::<T>(c);
        let data = self.value(a).data().iter().map(|&x| x * k).collect();
        let out = Tensor::new(self.value(a).shape().to_vec(), data)?;
        let needs = self.any_needs(&[a]);
        self.finish_op(out, needs, |o| Box::new(ScaleOp { a, out: o, k }), "scale")
    }

    // ---- matmul ----------------------------------------------------------

    /// `[M,K] x [K,P] -> [M,P]`. Rows are distributed over the worker pool;
    /// each dot product uses the fixed pairwise tree order, so results are
    /// bitwise identical for any worker count.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ash, bsh) = (self.value(a).shape(), self.value(b).shape());
        if ash.len() != 2 || bsh.len() != 2 || ash[1] != bsh[0] {
            return Err(M2dError::Dimension(format!(
                "matmul shapes {ash:?} x {bsh:?}"
            )));
        }
        let (m, k, p) = (ash[0], ash[1], bsh[1]);
        let out = matmul_raw(self.value(a).data(), self.value(b).data(), m, k, p);
        let out = Tensor::new(vec![m, p], out)?;
        let needs = self.any_needs(&[a, b]);
        self.finish_op(out, needs, |o| Box::new(MatmulOp { a, b, out: o, m, k, p }), "matmul")
    }

    // ---- shape ops -------------------------------------------------------

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let out = self.value(a).reshaped(shape)?;
        let needs = self.any_needs(&[a]);
        self.finish_op(out, needs, |o| Box::new(ReshapeOp { a, out: o }), "reshape")
    }

    pub fn transpose2d(&mut self, a: Var) -> Result<Var> {
        let sh = self.value(a).shape();
        if sh.len() != 2 {
            return Err(M2dError::Dimension(format!("transpose2d on shape {sh:?}")));
        }
        let (r, c) = (sh[0], sh[1]);
        let av = self.value(a).data();
        let mut data = vec![T::zero(); r * c];
        for i in 0..r {
            for j in 0..c {
                data[j * r + i] = av[i * c + j];
            }
        }
        let out = Tensor::new(vec![c, r], data)?;
        let needs = self.any_needs(&[a]);
        self.finish_op(out, needs, |o| Box::new(TransposeOp { a, out: o, r, c }), "transpose2d")
    }

    /// Copying slice of `len` indices starting at `start` along `axis`.
    pub fn narrow(&mut self, a: Var, axis: usize, start: usize, len: usize) -> Result<Var> {
        let sh = self.value(a).shape().to_vec();
        if axis >= sh.len() || start + len > sh[axis] {
            return Err(M2dError::Dimension(format!(
                "narrow axis {axis} [{start}..{}] of shape {sh:?}",
                start + len
            )));
        }
        let (outer, mid, inner) = split3(&sh, axis);
        let av = self.value(a).data();
        let mut data = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            let base = (o * mid + start) * inner;
            data.extend_from_slice(&av[base..base + len * inner]);
        }
        let mut osh = sh.clone();
        osh[axis] = len;
        let out = Tensor::new(osh, data)?;
        let needs = self.any_needs(&[a]);
        self.finish_op(
            out,
            needs,
            |o| Box::new(NarrowOp { a, out: o, axis, start, len }),
            "narrow",
        )
    }

    pub fn concat(&mut self, axis: usize, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(M2dError::Dimension("concat of zero tensors".into()));
        }
        let base = self.value(parts[0]).shape().to_vec();
        let mut total = 0;
        for &p in parts {
            let sh = self.value(p).shape();
            if sh.len() != base.len()
                || sh.iter().zip(&base).enumerate().any(|(i, (x, y))| i != axis && x != y)
            {
                return Err(M2dError::Dimension(format!(
                    "concat shapes {:?} vs {:?} along axis {axis}",
                    sh, base
                )));
            }
            total += sh[axis];
        }
        let mut osh = base.clone();
        osh[axis] = total;
        let (outer, _, inner) = split3(&osh, axis);
        let mut data = vec![T::zero(); outer * total * inner];
        for o in 0..outer {
            let mut at = 0;
            for &p in parts {
                let psh = self.value(p).shape();
                let plen = psh[axis];
                let pv = self.value(p).data();
                let src = o * plen * inner;
                let dst = (o * total + at) * inner;
                data[dst..dst + plen * inner].copy_from_slice(&pv[src..src + plen * inner]);
                at += plen;
            }
        }
        let out = Tensor::new(osh, data)?;
        let needs = self.any_needs(parts);
        let parts = parts.to_vec();
        self.finish_op(out, needs, |o| Box::new(ConcatOp { parts, out: o, axis }), "concat")
    }

    // ---- reductions ------------------------------------------------------

    /// Full reduction to a rank-0 scalar (fixed pairwise tree order).
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s = tree_sum(self.value(a).data());
        let out = Tensor::scalar(s);
        let needs = self.any_needs(&[a]);
        self.finish_op(out, needs, |o| Box::new(SumOp { a, out: o }), "sum")
    }

    /// Column means of a `[R,C]` matrix -> `[C]`.
    pub fn mean_axis0(&mut self, a: Var) -> Result<Var> {
        let sh = self.value(a).shape();
        if sh.len() != 2 {
            return Err(M2dError::Dimension(format!("mean_axis0 on shape {sh:?}")));
        }
        let (r, c) = (sh[0], sh[1]);
        let av = self.value(a).data();
        let inv = lit::<T>(1.0 / r as f64);
        let data: Vec<T> = (0..c)
            .map(|j| parallel::tree_sum_strided(av, j, c, r) * inv)
            .collect();
        let out = Tensor::new(vec![c], data)?;
        let needs = self.any_needs(&[a]);
        self.finish_op(out, needs, |o| Box::new(MeanAxis0Op { a, out: o, r, c }), "mean_axis0")
    }

    /// Row-wise softmax of a `[R,C]` matrix.
    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let sh = self.value(a).shape();
        if sh.len() != 2 {
            return Err(M2dError::Dimension(format!("softmax_rows on shape {sh:?}")));
        }
        let (r, c) = (sh[0], sh[1]);
        let av = self.value(a).data();
        let mut data = vec![T::zero(); r * c];
        for i in 0..r {
            let row = &av[i * c..(i + 1) * c];
            let m = row.iter().cloned().fold(T::neg_infinity(), T::max);
            let out_row = &mut data[i * c..(i + 1) * c];
            for (o, &x) in out_row.iter_mut().zip(row) {
                *o = (x - m).exp();
            }
            let z = tree_sum(out_row);
            for o in out_row.iter_mut() {
                *o = *o / z;
            }
        }
        let out = Tensor::new(vec![r, c], data)?;
        let needs = self.any_needs(&[a]);
        self.finish_op(out, needs, |o| Box::new(SoftmaxOp { a, out: o, r, c }), "softmax")
    }
}

// ---- shared kernels -------------------------------------------------------

/// Plain matmul kernel shared by forward and backward rules.
pub(crate) fn matmul_raw<T: Scalar>(a: &[T], b: &[T], m: usize, k: usize, p: usize) -> Vec<T> {
    let mut out = vec![T::zero(); m * p];
    let workers = parallel::workers();
    parallel::for_each_row(&mut out, m, p, workers, |i, row| {
        for (j, o) in row.iter_mut().enumerate() {
            *o = parallel::tree_dot2(a, i * k, 1, b, j, p, k);
        }
    });
    out
}

fn split3(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

/// Right-aligned (trailing-dimension) broadcasting between two shapes.
pub(crate) struct Bcast {
    pub out_shape: Vec<usize>,
    a_stride: Vec<usize>,
    b_stride: Vec<usize>,
}

impl Bcast {
    pub(crate) fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        let rank = a.len().max(b.len());
        let mut out_shape = vec![0usize; rank];
        for i in 0..rank {
            let ad = if i < rank - a.len() { 1 } else { a[i - (rank - a.len())] };
            let bd = if i < rank - b.len() { 1 } else { b[i - (rank - b.len())] };
            out_shape[i] = if ad == bd {
                ad
            } else if ad == 1 {
                bd
            } else if bd == 1 {
                ad
            } else {
                return Err(M2dError::Dimension(format!(
                    "broadcast mismatch: {a:?} vs {b:?}"
                )));
            };
        }
        let to_strides = |sh: &[usize]| {
            let mut st = vec![0usize; rank];
            let mut acc = 1usize;
            for i in (0..sh.len()).rev() {
                let pos = rank - sh.len() + i;
                st[pos] = if sh[i] == 1 { 0 } else { acc };
                acc *= sh[i];
            }
            st
        };
        Ok(Bcast { a_stride: to_strides(a), b_stride: to_strides(b), out_shape })
    }

    pub(crate) fn numel(&self) -> usize {
        self.out_shape.iter().product()
    }

    /// Visit `(out_index, a_index, b_index)` in row-major output order.
    pub(crate) fn for_each(&self, mut f: impl FnMut(usize, usize, usize)) {
        let rank = self.out_shape.len();
        if rank == 0 {
            f(0, 0, 0);
            return;
        }
        let mut idx = vec![0usize; rank];
        let (mut ai, mut bi) = (0usize, 0usize);
        let n = self.numel();
        for o in 0..n {
            f(o, ai, bi);
            for d in (0..rank).rev() {
                idx[d] += 1;
                ai += self.a_stride[d];
                bi += self.b_stride[d];
                if idx[d] < self.out_shape[d] {
                    break;
                }
                idx[d] = 0;
                ai -= self.a_stride[d] * self.out_shape[d];
                bi -= self.b_stride[d] * self.out_shape[d];
            }
        }
    }
}

// ---- op structs -------------------------------------------------------------

#[derive(Clone, Copy)]
enum BinKind {
    Add,
    Sub,
    Mul,
}

struct BinOp {
    a: Var,
    b: Var,
    out: Var,
    kind: BinKind,
}

impl<T: Scalar> TapeOp<T> for BinOp {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        let bc = Bcast::new(s.value(self.a).shape(), s.value(self.b).shape()).unwrap();
        if s.needs(self.a) {
            let mut da = vec![T::zero(); s.value(self.a).numel()];
            match self.kind {
                BinKind::Add | BinKind::Sub => bc.for_each(|o, ai, _| da[ai] += dout[o]),
                BinKind::Mul => {
                    let bv = s.value(self.b).data();
                    bc.for_each(|o, ai, bi| da[ai] += dout[o] * bv[bi]);
                }
            }
            s.add_grad(self.a, &da);
        }
        if s.needs(self.b) {
            let mut db = vec![T::zero(); s.value(self.b).numel()];
            match self.kind {
                BinKind::Add => bc.for_each(|o, _, bi| db[bi] += dout[o]),
                BinKind::Sub => bc.for_each(|o, _, bi| db[bi] += -dout[o]),
                BinKind::Mul => {
                    let av = s.value(self.a).data();
                    bc.for_each(|o, ai, bi| db[bi] += dout[o] * av[ai]);
                }
            }
            s.add_grad(self.b, &db);
        }
    }
}

#[derive(Clone, Copy)]
enum UnKind {
    Exp,
    Softplus,
    Gelu,
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

impl UnKind {
    fn name(self) -> &'static str {
        match self {
            UnKind::Exp => "exp",
            UnKind::Softplus => "softplus",
            UnKind::Gelu => "gelu",
        }
    }

    fn eval<T: Scalar>(self, x: T) -> T {
        match self {
            UnKind::Exp => x.exp(),
            UnKind::Softplus => {
                // ln(1+e^x); for large x this is x + ln(1+e^-x).
                if x > lit::<T>(20.0) {
                    x + x.neg().exp().ln_1p()
                } else {
                    x.exp().ln_1p()
                }
            }
            UnKind::Gelu => {
                let u = lit::<T>(GELU_C) * (x + lit::<T>(GELU_A) * x * x * x);
                lit::<T>(0.5) * x * (T::one() + u.tanh())
            }
        }
    }

    fn deriv<T: Scalar>(self, x: T, y: T) -> T {
        match self {
            UnKind::Exp => y,
            UnKind::Softplus => T::one() / (T::one() + x.neg().exp()),
            UnKind::Gelu => {
                let u = lit::<T>(GELU_C) * (x + lit::<T>(GELU_A) * x * x * x);
                let t = u.tanh();
                let du = lit::<T>(GELU_C) * (T::one() + lit::<T>(3.0 * GELU_A) * x * x);
                lit::<T>(0.5) * (T::one() + t) + lit::<T>(0.5) * x * (T::one() - t * t) * du
            }
        }
    }
}

struct UnOp {
    a: Var,
    out: Var,
    kind: UnKind,
}

impl<T: Scalar> TapeOp<T> for UnOp {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        if !s.needs(self.a) {
            return;
        }
        let av = s.value(self.a).data();
        let yv = s.value(self.out).data();
        let da: Vec<T> = dout
            .iter()
            .zip(av.iter().zip(yv))
            .map(|(&g, (&x, &y))| g * self.kind.deriv(x, y))
            .collect();
        s.add_grad(self.a, &da);
    }
}

struct ScaleOp<T> {
    a: Var,
    out: Var,
    k: T,
}

impl<T: Scalar> TapeOp<T> for ScaleOp<T> {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        if !s.needs(self.a) {
            return;
        }
        let da: Vec<T> = dout.iter().map(|&g| g * self.k).collect();
        s.add_grad(self.a, &da);
    }
}

struct MatmulOp {
    a: Var,
    b: Var,
    out: Var,
    m: usize,
    k: usize,
    p: usize,
}

impl<T: Scalar> TapeOp<T> for MatmulOp {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        let (m, k, p) = (self.m, self.k, self.p);
        if s.needs(self.a) {
            // da[i,l] = sum_j dout[i,j] * b[l,j]
            let bv = s.value(self.b).data();
            let mut da = vec![T::zero(); m * k];
            for i in 0..m {
                for l in 0..k {
                    da[i * k + l] = parallel::tree_dot2(&dout, i * p, 1, bv, l * p, 1, p);
                }
            }
            s.add_grad(self.a, &da);
        }
        if s.needs(self.b) {
            // db[l,j] = sum_i a[i,l] * dout[i,j]
            let av = s.value(self.a).data();
            let mut db = vec![T::zero(); k * p];
            for l in 0..k {
                for j in 0..p {
                    db[l * p + j] = parallel::tree_dot2(av, l, k, &dout, j, p, m);
                }
            }
            s.add_grad(self.b, &db);
        }
    }
}

struct ReshapeOp {
    a: Var,
    out: Var,
}

impl<T: Scalar> TapeOp<T> for ReshapeOp {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        if s.needs(self.a) {
            s.add_grad(self.a, &dout);
        }
    }
}

struct TransposeOp {
    a: Var,
    out: Var,
    r: usize,
    c: usize,
}

impl<T: Scalar> TapeOp<T> for TransposeOp {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        if !s.needs(self.a) {
            return;
        }
        let mut da = vec![T::zero(); self.r * self.c];
        for j in 0..self.c {
            for i in 0..self.r {
                da[i * self.c + j] = dout[j * self.r + i];
            }
        }
        s.add_grad(self.a, &da);
    }
}

struct NarrowOp {
    a: Var,
    out: Var,
    axis: usize,
    start: usize,
    len: usize,
}

impl<T: Scalar> TapeOp<T> for NarrowOp {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        if !s.needs(self.a) {
            return;
        }
        let sh = s.value(self.a).shape().to_vec();
        let (outer, mid, inner) = split3(&sh, self.axis);
        let mut da = vec![T::zero(); s.value(self.a).numel()];
        for o in 0..outer {
            let dst = (o * mid + self.start) * inner;
            let src = o * self.len * inner;
            for t in 0..self.len * inner {
                da[dst + t] += dout[src + t];
            }
        }
        s.add_grad(self.a, &da);
    }
}

struct ConcatOp {
    parts: Vec<Var>,
    out: Var,
    axis: usize,
}

impl<T: Scalar> TapeOp<T> for ConcatOp {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        let osh = s.value(self.out).shape().to_vec();
        let (outer, total, inner) = split3(&osh, self.axis);
        let mut at = 0usize;
        for &p in &self.parts {
            let plen = s.value(p).shape()[self.axis];
            if s.needs(p) {
                let mut dp = vec![T::zero(); s.value(p).numel()];
                for o in 0..outer {
                    let src = (o * total + at) * inner;
                    let dst = o * plen * inner;
                    dp[dst..dst + plen * inner]
                        .copy_from_slice(&dout[src..src + plen * inner]);
                }
                s.add_grad(p, &dp);
            }
            at += plen;
        }
    }
}

struct SumOp {
    a: Var,
    out: Var,
}

impl<T: Scalar> TapeOp<T> for SumOp {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        if !s.needs(self.a) {
            return;
        }
        let da = vec![dout[0]; s.value(self.a).numel()];
        s.add_grad(self.a, &da);
    }
}

struct MeanAxis0Op {
    a: Var,
    out: Var,
    r: usize,
    c: usize,
}

impl<T: Scalar> TapeOp<T> for MeanAxis0Op {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        if !s.needs(self.a) {
            return;
        }
        let inv = lit::<T>(1.0 / self.r as f64);
        let mut da = vec![T::zero(); self.r * self.c];
        for i in 0..self.r {
            for j in 0..self.c {
                da[i * self.c + j] = dout[j] * inv;
            }
        }
        s.add_grad(self.a, &da);
    }
}

struct SoftmaxOp {
    a: Var,
    out: Var,
    r: usize,
    c: usize,
}

impl<T: Scalar> TapeOp<T> for SoftmaxOp {
    fn backward(&self, s: &mut Slots<T>) {
        let Some(dout) = s.take_grad(self.out) else { return };
        if !s.needs(self.a) {
            return;
        }
        let y = s.value(self.out).data();
        let mut da = vec![T::zero(); self.r * self.c];
        for i in 0..self.r {
            let yr = &y[i * self.c..(i + 1) * self.c];
            let dr = &dout[i * self.c..(i + 1) * self.c];
            let dot: Vec<T> = yr.iter().zip(dr).map(|(&a, &b)| a * b).collect();
            let sum = tree_sum(&dot);
            for j in 0..self.c {
                da[i * self.c + j] = yr[j] * (dr[j] - sum);
            }
        }
        s.add_grad(self.a, &da);
    }
}
