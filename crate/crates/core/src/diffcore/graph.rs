//! Reverse-mode autodiff over a Wengert tape of 2-D tensors.
//!
//! Forward values are computed eagerly as nodes are pushed. `backward` emits
//! the adjoint computation as further tape nodes, so gradients are themselves
//! differentiable and Hessian-vector products come from backing through a
//! gradient-vector dot product a second time.

use std::rc::Rc;

use super::tensor::Tensor;
use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    MatMul { a: NodeId, b: NodeId, ta: bool, tb: bool },
    Scale(NodeId, f64),
    AddScalar(NodeId, f64),
    Relu(NodeId),
    Tanh(NodeId),
    Exp(NodeId),
    Ln(NodeId),
    Recip(NodeId),
    Square(NodeId),
    Softmax(NodeId),
    LogSoftmax(NodeId),
    SumAll(NodeId),
    SumRows(NodeId),
    SumDown(NodeId),
    BroadcastRow(NodeId),
    BroadcastCol(NodeId),
    BroadcastScalar(NodeId),
    TakePerRow { x: NodeId, idx: Rc<Vec<usize>> },
    ScatterPerRow { x: NodeId, idx: Rc<Vec<usize>> },
    ConcatCols(Vec<NodeId>),
    SliceCols { x: NodeId, start: usize },
    PadCols { x: NodeId, offset: usize },
    Clamp { x: NodeId, lo: f64, hi: f64 },
}

struct Node {
    op: Op,
    value: Tensor,
    requires_grad: bool,
}

/// Adjoint nodes produced by one `backward` pass, indexed by forward node id.
pub struct Adjoints {
    of: Vec<Option<NodeId>>,
}

impl Adjoints {
    pub fn of(&self, id: NodeId) -> Option<NodeId> {
        self.of.get(id).copied().flatten()
    }
}

pub struct Graph {
    nodes: Vec<Node>,
    check_finite: bool,
    clamp_events: usize,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::with_capacity(64), check_finite: false, clamp_events: 0 }
    }

    /// A graph that panics as soon as any op produces a non-finite value.
    /// Used in tests and oracles; training paths check at the loss boundary.
    pub fn new_checked() -> Self {
        Graph { nodes: Vec::with_capacity(64), check_finite: true, clamp_events: 0 }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Elements that hit a `clamp` bound during forward evaluation.
    pub fn clamp_events(&self) -> usize {
        self.clamp_events
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        self.nodes[id].value.item()
    }

    pub fn requires_grad(&self, id: NodeId) -> bool {
        self.nodes[id].requires_grad
    }

    fn push(&mut self, op: Op, value: Tensor, requires_grad: bool) -> NodeId {
        if self.check_finite {
            assert!(value.all_finite(), "non-finite value produced by {op:?}");
        }
        let id = self.nodes.len();
        self.nodes.push(Node { op, value, requires_grad });
        id
    }

    fn rg(&self, id: NodeId) -> bool {
        self.nodes[id].requires_grad
    }

    // ----- leaves -----

    /// Constant leaf: no gradient flows into it.
    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf, value, false)
    }

    pub fn constant_scalar(&mut self, v: f64) -> NodeId {
        self.constant(Tensor::scalar(v))
    }

    /// Differentiable leaf (parameter binding or any input whose gradient is
    /// wanted).
    pub fn var(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf, value, true)
    }

    // ----- elementwise -----

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        assert_eq!(va.shape(), vb.shape(), "add shape mismatch");
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x + y).collect();
        let t = Tensor::new(va.rows(), va.cols(), data);
        let rg = self.rg(a) || self.rg(b);
        self.push(Op::Add(a, b), t, rg)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        assert_eq!(va.shape(), vb.shape(), "sub shape mismatch");
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x - y).collect();
        let t = Tensor::new(va.rows(), va.cols(), data);
        let rg = self.rg(a) || self.rg(b);
        self.push(Op::Sub(a, b), t, rg)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        assert_eq!(va.shape(), vb.shape(), "mul shape mismatch");
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x * y).collect();
        let t = Tensor::new(va.rows(), va.cols(), data);
        let rg = self.rg(a) || self.rg(b);
        self.push(Op::Mul(a, b), t, rg)
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let r = self.recip(b);
        self.mul(a, r)
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> NodeId {
        let v = &self.nodes[x].value;
        let data = v.data().iter().map(|a| a * c).collect();
        let t = Tensor::new(v.rows(), v.cols(), data);
        let rg = self.rg(x);
        self.push(Op::Scale(x, c), t, rg)
    }

    pub fn neg(&mut self, x: NodeId) -> NodeId {
        self.scale(x, -1.0)
    }

    pub fn add_scalar(&mut self, x: NodeId, c: f64) -> NodeId {
        let v = &self.nodes[x].value;
        let data = v.data().iter().map(|a| a + c).collect();
        let t = Tensor::new(v.rows(), v.cols(), data);
        let rg = self.rg(x);
        self.push(Op::AddScalar(x, c), t, rg)
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let data = v.data().iter().map(|&a| if a > 0.0 { a } else { 0.0 }).collect();
        let t = Tensor::new(v.rows(), v.cols(), data);
        let rg = self.rg(x);
        self.push(Op::Relu(x), t, rg)
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let data = v.data().iter().map(|a| a.tanh()).collect();
        let t = Tensor::new(v.rows(), v.cols(), data);
        let rg = self.rg(x);
        self.push(Op::Tanh(x), t, rg)
    }

    pub fn exp(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let data = v.data().iter().map(|a| a.exp()).collect();
        let t = Tensor::new(v.rows(), v.cols(), data);
        let rg = self.rg(x);
        self.push(Op::Exp(x), t, rg)
    }

    pub fn ln(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let data = v.data().iter().map(|a| a.ln()).collect();
        let t = Tensor::new(v.rows(), v.cols(), data);
        let rg = self.rg(x);
        self.push(Op::Ln(x), t, rg)
    }

    pub fn recip(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let data = v.data().iter().map(|a| 1.0 / a).collect();
        let t = Tensor::new(v.rows(), v.cols(), data);
        let rg = self.rg(x);
        self.push(Op::Recip(x), t, rg)
    }

    pub fn square(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let data = v.data().iter().map(|a| a * a).collect();
        let t = Tensor::new(v.rows(), v.cols(), data);
        let rg = self.rg(x);
        self.push(Op::Square(x), t, rg)
    }

    pub fn clamp(&mut self, x: NodeId, lo: f64, hi: f64) -> NodeId {
        let v = &self.nodes[x].value;
        let mut events = 0usize;
        let data = v
            .data()
            .iter()
            .map(|&a| {
                if a < lo {
                    events += 1;
                    lo
                } else if a > hi {
                    events += 1;
                    hi
                } else {
                    a
                }
            })
            .collect();
        let t = Tensor::new(v.rows(), v.cols(), data);
        self.clamp_events += events;
        let rg = self.rg(x);
        self.push(Op::Clamp { x, lo, hi }, t, rg)
    }

    // ----- linear algebra -----

    /// op(a) * op(b) where `ta`/`tb` transpose their operand.
    pub fn matmul_t(&mut self, a: NodeId, b: NodeId, ta: bool, tb: bool) -> NodeId {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        let (m, k) = if ta { (va.cols(), va.rows()) } else { (va.rows(), va.cols()) };
        let (kb, n) = if tb { (vb.cols(), vb.rows()) } else { (vb.rows(), vb.cols()) };
        assert_eq!(k, kb, "matmul inner dimension mismatch");
        let mut out = vec![0.0; m * n];
        super::blas::dgemm(
            va.data(),
            va.rows(),
            va.cols(),
            ta,
            vb.data(),
            vb.rows(),
            vb.cols(),
            tb,
            &mut out,
        );
        let t = Tensor::new(m, n, out);
        let rg = self.rg(a) || self.rg(b);
        self.push(Op::MatMul { a, b, ta, tb }, t, rg)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.matmul_t(a, b, false, false)
    }

    // ----- softmax family (row-wise, numerically stable) -----

    pub fn softmax(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let (r, c) = (v.rows(), v.cols());
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            let row = v.row_slice(i);
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for j in 0..c {
                let e = (row[j] - m).exp();
                data[i * c + j] = e;
                z += e;
            }
            for j in 0..c {
                data[i * c + j] /= z;
            }
        }
        let t = Tensor::new(r, c, data);
        let rg = self.rg(x);
        self.push(Op::Softmax(x), t, rg)
    }

    pub fn log_softmax(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let (r, c) = (v.rows(), v.cols());
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            let row = v.row_slice(i);
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = row.iter().map(|a| (a - m).exp()).sum();
            let lz = m + z.ln();
            for j in 0..c {
                data[i * c + j] = row[j] - lz;
            }
        }
        let t = Tensor::new(r, c, data);
        let rg = self.rg(x);
        self.push(Op::LogSoftmax(x), t, rg)
    }

    // ----- reductions and broadcasts -----

    pub fn sum_all(&mut self, x: NodeId) -> NodeId {
        let s: f64 = self.nodes[x].value.data().iter().sum();
        let rg = self.rg(x);
        self.push(Op::SumAll(x), Tensor::scalar(s), rg)
    }

    pub fn mean_all(&mut self, x: NodeId) -> NodeId {
        let n = self.nodes[x].value.len().max(1);
        let s = self.sum_all(x);
        self.scale(s, 1.0 / n as f64)
    }

    /// B x N -> B x 1.
    pub fn sum_rows(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let (r, c) = (v.rows(), v.cols());
        let data = (0..r).map(|i| v.row_slice(i).iter().sum()).collect();
        let rg = self.rg(x);
        self.push(Op::SumRows(x), Tensor::new(r, 1, data), rg)
    }

    /// B x N -> 1 x N (sum over the batch dimension).
    pub fn sum_down(&mut self, x: NodeId) -> NodeId {
        let v = &self.nodes[x].value;
        let (r, c) = (v.rows(), v.cols());
        let mut data = vec![0.0; c];
        for i in 0..r {
            for (j, a) in v.row_slice(i).iter().enumerate() {
                data[j] += a;
            }
        }
        let rg = self.rg(x);
        self.push(Op::SumDown(x), Tensor::new(1, c, data), rg)
    }

    /// 1 x N -> B x N.
    pub fn broadcast_row(&mut self, x: NodeId, rows: usize) -> NodeId {
        let v = &self.nodes[x].value;
        assert_eq!(v.rows(), 1, "broadcast_row expects a single-row tensor");
        let mut data = Vec::with_capacity(rows * v.cols());
        for _ in 0..rows {
            data.extend_from_slice(v.data());
        }
        let t = Tensor::new(rows, v.cols(), data);
        let rg = self.rg(x);
        self.push(Op::BroadcastRow(x), t, rg)
    }

    /// B x 1 -> B x N.
    pub fn broadcast_col(&mut self, x: NodeId, cols: usize) -> NodeId {
        let v = &self.nodes[x].value;
        assert_eq!(v.cols(), 1, "broadcast_col expects a single-column tensor");
        let mut data = Vec::with_capacity(v.rows() * cols);
        for i in 0..v.rows() {
            let a = v.data()[i];
            data.extend(std::iter::repeat(a).take(cols));
        }
        let t = Tensor::new(v.rows(), cols, data);
        let rg = self.rg(x);
        self.push(Op::BroadcastCol(x), t, rg)
    }

    /// 1 x 1 -> B x N.
    pub fn broadcast_scalar(&mut self, x: NodeId, rows: usize, cols: usize) -> NodeId {
        let a = self.nodes[x].value.item();
        let t = Tensor::full(rows, cols, a);
        let rg = self.rg(x);
        self.push(Op::BroadcastScalar(x), t, rg)
    }

    // ----- per-row gather/scatter -----

    /// Pick element `idx[i]` from each row: B x N -> B x 1.
    pub fn take_per_row(&mut self, x: NodeId, idx: Rc<Vec<usize>>) -> NodeId {
        let v = &self.nodes[x].value;
        assert_eq!(v.rows(), idx.len(), "take_per_row index length mismatch");
        let data = idx.iter().enumerate().map(|(i, &j)| v.at(i, j)).collect();
        let t = Tensor::new(v.rows(), 1, data);
        let rg = self.rg(x);
        self.push(Op::TakePerRow { x, idx }, t, rg)
    }

    /// Place each row's single value at column `idx[i]` of a zero B x N tensor.
    pub fn scatter_per_row(&mut self, x: NodeId, idx: Rc<Vec<usize>>, cols: usize) -> NodeId {
        let v = &self.nodes[x].value;
        assert_eq!(v.cols(), 1, "scatter_per_row expects a single-column tensor");
        assert_eq!(v.rows(), idx.len(), "scatter_per_row index length mismatch");
        let mut data = vec![0.0; v.rows() * cols];
        for (i, &j) in idx.iter().enumerate() {
            data[i * cols + j] = v.data()[i];
        }
        let t = Tensor::new(v.rows(), cols, data);
        let rg = self.rg(x);
        self.push(Op::ScatterPerRow { x, idx }, t, rg)
    }

    // ----- column layout -----

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty());
        let rows = self.nodes[parts[0]].value.rows();
        let total: usize = parts.iter().map(|&p| self.nodes[p].value.cols()).sum();
        let mut data = Vec::with_capacity(rows * total);
        for i in 0..rows {
            for &p in parts {
                let v = &self.nodes[p].value;
                assert_eq!(v.rows(), rows, "concat_cols row mismatch");
                data.extend_from_slice(v.row_slice(i));
            }
        }
        let t = Tensor::new(rows, total, data);
        let rg = parts.iter().any(|&p| self.rg(p));
        self.push(Op::ConcatCols(parts.to_vec()), t, rg)
    }

    pub fn slice_cols(&mut self, x: NodeId, start: usize, len: usize) -> NodeId {
        let v = &self.nodes[x].value;
        assert!(start + len <= v.cols(), "slice_cols out of range");
        let mut data = Vec::with_capacity(v.rows() * len);
        for i in 0..v.rows() {
            data.extend_from_slice(&v.row_slice(i)[start..start + len]);
        }
        let t = Tensor::new(v.rows(), len, data);
        let rg = self.rg(x);
        self.push(Op::SliceCols { x, start }, t, rg)
    }

    /// Embed B x L into a zero B x `total` block starting at column `offset`.
    pub fn pad_cols(&mut self, x: NodeId, total: usize, offset: usize) -> NodeId {
        let v = &self.nodes[x].value;
        assert!(offset + v.cols() <= total, "pad_cols out of range");
        let mut data = vec![0.0; v.rows() * total];
        for i in 0..v.rows() {
            data[i * total + offset..i * total + offset + v.cols()]
                .copy_from_slice(v.row_slice(i));
        }
        let t = Tensor::new(v.rows(), total, data);
        let rg = self.rg(x);
        self.push(Op::PadCols { x, offset }, t, rg)
    }

    // ----- reverse pass -----

    /// Build the adjoint computation for every differentiable ancestor of
    /// `loss`. The adjoints are regular tape nodes, so they can be reduced
    /// and backed through again for Hessian-vector products.
    pub fn backward(&mut self, loss: NodeId) -> Result<Adjoints> {
        if self.nodes[loss].value.shape() != [1, 1] {
            return Err(Error::LossNotScalar);
        }
        if !self.nodes[loss].value.all_finite() {
            return Err(Error::NonFinite("loss"));
        }
        let frontier = loss + 1;
        let mut adj: Vec<Option<NodeId>> = vec![None; frontier];
        adj[loss] = Some(self.constant_scalar(1.0));
        for id in (0..frontier).rev() {
            let Some(dy) = adj[id] else { continue };
            if !self.nodes[id].requires_grad {
                continue;
            }
            let op = self.nodes[id].op.clone();
            match op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    self.accumulate(&mut adj, a, dy);
                    self.accumulate(&mut adj, b, dy);
                }
                Op::Sub(a, b) => {
                    self.accumulate(&mut adj, a, dy);
                    let n = self.neg(dy);
                    self.accumulate(&mut adj, b, n);
                }
                Op::Mul(a, b) => {
                    if self.rg(a) {
                        let g = self.mul(dy, b);
                        self.accumulate(&mut adj, a, g);
                    }
                    if self.rg(b) {
                        let g = self.mul(dy, a);
                        self.accumulate(&mut adj, b, g);
                    }
                }
                Op::MatMul { a, b, ta, tb } => {
                    if self.rg(a) {
                        let g = if !ta {
                            self.matmul_t(dy, b, false, !tb)
                        } else {
                            self.matmul_t(b, dy, tb, true)
                        };
                        self.accumulate(&mut adj, a, g);
                    }
                    if self.rg(b) {
                        let g = if !tb {
                            self.matmul_t(a, dy, !ta, false)
                        } else {
                            self.matmul_t(dy, a, true, ta)
                        };
                        self.accumulate(&mut adj, b, g);
                    }
                }
                Op::Scale(x, c) => {
                    let g = self.scale(dy, c);
                    self.accumulate(&mut adj, x, g);
                }
                Op::AddScalar(x, _) => self.accumulate(&mut adj, x, dy),
                Op::Relu(x) => {
                    let mask: Vec<f64> = self.nodes[x]
                        .value
                        .data()
                        .iter()
                        .map(|&a| if a > 0.0 { 1.0 } else { 0.0 })
                        .collect();
                    let v = &self.nodes[x].value;
                    let m = self.constant(Tensor::new(v.rows(), v.cols(), mask));
                    let g = self.mul(dy, m);
                    self.accumulate(&mut adj, x, g);
                }
                Op::Tanh(x) => {
                    let y2 = self.square(id);
                    let d = self.scale(y2, -1.0);
                    let d = self.add_scalar(d, 1.0);
                    let g = self.mul(dy, d);
                    self.accumulate(&mut adj, x, g);
                }
                Op::Exp(x) => {
                    let g = self.mul(dy, id);
                    self.accumulate(&mut adj, x, g);
                }
                Op::Ln(x) => {
                    let r = self.recip(x);
                    let g = self.mul(dy, r);
                    self.accumulate(&mut adj, x, g);
                }
                Op::Recip(x) => {
                    let y2 = self.square(id);
                    let g = self.mul(dy, y2);
                    let g = self.neg(g);
                    self.accumulate(&mut adj, x, g);
                }
                Op::Square(x) => {
                    let g = self.mul(dy, x);
                    let g = self.scale(g, 2.0);
                    self.accumulate(&mut adj, x, g);
                }
                Op::Softmax(x) => {
                    let cols = self.nodes[id].value.cols();
                    let t = self.mul(dy, id);
                    let s = self.sum_rows(t);
                    let sb = self.broadcast_col(s, cols);
                    let d = self.sub(dy, sb);
                    let g = self.mul(id, d);
                    self.accumulate(&mut adj, x, g);
                }
                Op::LogSoftmax(x) => {
                    let cols = self.nodes[id].value.cols();
                    let p = self.exp(id);
                    let s = self.sum_rows(dy);
                    let sb = self.broadcast_col(s, cols);
                    let d = self.mul(p, sb);
                    let g = self.sub(dy, d);
                    self.accumulate(&mut adj, x, g);
                }
                Op::SumAll(x) => {
                    let [r, c] = self.nodes[x].value.shape();
                    let g = self.broadcast_scalar(dy, r, c);
                    self.accumulate(&mut adj, x, g);
                }
                Op::SumRows(x) => {
                    let cols = self.nodes[x].value.cols();
                    let g = self.broadcast_col(dy, cols);
                    self.accumulate(&mut adj, x, g);
                }
                Op::SumDown(x) => {
                    let rows = self.nodes[x].value.rows();
                    let g = self.broadcast_row(dy, rows);
                    self.accumulate(&mut adj, x, g);
                }
                Op::BroadcastRow(x) => {
                    let g = self.sum_down(dy);
                    self.accumulate(&mut adj, x, g);
                }
                Op::BroadcastCol(x) => {
                    let g = self.sum_rows(dy);
                    self.accumulate(&mut adj, x, g);
                }
                Op::BroadcastScalar(x) => {
                    let g = self.sum_all(dy);
                    self.accumulate(&mut adj, x, g);
                }
                Op::TakePerRow { x, idx } => {
                    let cols = self.nodes[x].value.cols();
                    let g = self.scatter_per_row(dy, idx, cols);
                    self.accumulate(&mut adj, x, g);
                }
                Op::ScatterPerRow { x, idx } => {
                    let g = self.take_per_row(dy, idx);
                    self.accumulate(&mut adj, x, g);
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let len = self.nodes[p].value.cols();
                        if self.rg(p) {
                            let g = self.slice_cols(dy, offset, len);
                            self.accumulate(&mut adj, p, g);
                        }
                        offset += len;
                    }
                }
                Op::SliceCols { x, start } => {
                    let total = self.nodes[x].value.cols();
                    let g = self.pad_cols(dy, total, start);
                    self.accumulate(&mut adj, x, g);
                }
                Op::PadCols { x, offset } => {
                    let len = self.nodes[x].value.cols();
                    let g = self.slice_cols(dy, offset, len);
                    self.accumulate(&mut adj, x, g);
                }
                Op::Clamp { x, lo, hi } => {
                    let mask: Vec<f64> = self.nodes[x]
                        .value
                        .data()
                        .iter()
                        .map(|&a| if a >= lo && a <= hi { 1.0 } else { 0.0 })
                        .collect();
                    let v = &self.nodes[x].value;
                    let m = self.constant(Tensor::new(v.rows(), v.cols(), mask));
                    let g = self.mul(dy, m);
                    self.accumulate(&mut adj, x, g);
                }
            }
        }
        Ok(Adjoints { of: adj })
    }

    fn accumulate(&mut self, adj: &mut [Option<NodeId>], node: NodeId, contrib: NodeId) {
        if !self.nodes[node].requires_grad {
            return;
        }
        adj[node] = Some(match adj[node] {
            Some(existing) => self.add(existing, contrib),
            None => contrib,
        });
    }
}
