//! Reverse-mode automatic differentiation over a flat operation tape.
//!
//! A [`Tape`] records every operation in construction order (which is already
//! a topological order), [`Tape::backward`] walks it in reverse accumulating
//! vector-Jacobian products, and gradients are then read off per variable.
//! The op set is exactly what a clipped-surrogate actor-critic loss over
//! diagonal Gaussian policies needs.

use crate::tensor::{self, Tensor};
use crate::{PolicyError, Result};

/// Handle to a value on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Matmul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    /// `x (r x c) + row (1 x c)`, broadcasting the row.
    AddRow(Var, Var),
    /// `x (r x c) * row (1 x c)`, broadcasting the row.
    MulRow(Var, Var),
    Scale(Var, f64),
    AddConst(Var, f64),
    Tanh(Var),
    Exp(Var),
    Neg(Var),
    /// `r x c -> r x 1`.
    RowSum(Var),
    /// `r x c -> 1 x 1`.
    Sum(Var),
    /// `r x c -> 1 x 1`.
    Mean(Var),
    Clamp(Var, f64, f64),
    /// Elementwise minimum; gradient follows the smaller operand.
    Min(Var, Var),
}

struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Records a computation and replays it backwards for gradients.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A leaf that does not receive gradients (observations, actions,
    /// advantages, stored log-probs).
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// A leaf that accumulates gradients (network parameters).
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    /// Gradient of the last [`Tape::backward`] loss w.r.t. `var`, if any
    /// gradient reached it.
    pub fn grad(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(|g| g.as_ref())
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push_op(&mut self, value: Tensor, op: Op, parents: &[Var]) -> Var {
        let needs_grad = parents.iter().any(|p| self.nodes[p.0].needs_grad);
        self.push(value, op, needs_grad)
    }

    fn shape_err(context: &'static str, expected: (usize, usize), actual: (usize, usize)) -> PolicyError {
        PolicyError::ShapeMismatch {
            context,
            expected,
            actual,
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ar, ac) = self.value(a).shape();
        let (br, bc) = self.value(b).shape();
        if ac != br {
            return Err(Self::shape_err("matmul", (ac, ac), (br, bc)));
        }
        let _ = ar;
        let value = tensor::matmul(self.value(a), self.value(b));
        Ok(self.push_op(value, Op::Matmul(a, b), &[a, b]))
    }

    fn binary_same_shape(
        &mut self,
        context: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Self::shape_err(
                context,
                self.value(a).shape(),
                self.value(b).shape(),
            ));
        }
        let value = tensor::zip(self.value(a), self.value(b), f);
        Ok(self.push_op(value, op, &[a, b]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary_same_shape("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary_same_shape("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary_same_shape("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn min(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary_same_shape("min", a, b, f64::min, Op::Min(a, b))
    }

    fn row_broadcast(
        &mut self,
        context: &'static str,
        x: Var,
        row: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        let (rr, rc) = self.value(row).shape();
        if rr != 1 || rc != self.value(x).cols() {
            return Err(Self::shape_err(context, (1, self.value(x).cols()), (rr, rc)));
        }
        let value = tensor::zip_row(self.value(x), self.value(row), f);
        Ok(self.push_op(value, op, &[x, row]))
    }

    pub fn add_row(&mut self, x: Var, row: Var) -> Result<Var> {
        self.row_broadcast("add_row", x, row, |a, b| a + b, Op::AddRow(x, row))
    }

    pub fn mul_row(&mut self, x: Var, row: Var) -> Result<Var> {
        self.row_broadcast("mul_row", x, row, |a, b| a * b, Op::MulRow(x, row))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let value = self.value(x).map(|v| v * factor);
        self.push_op(value, Op::Scale(x, factor), &[x])
    }

    pub fn add_const(&mut self, x: Var, constant: f64) -> Var {
        let value = self.value(x).map(|v| v + constant);
        self.push_op(value, Op::AddConst(x, constant), &[x])
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let value = self.value(x).map(f64::tanh);
        self.push_op(value, Op::Tanh(x), &[x])
    }

    pub fn exp(&mut self, x: Var) -> Var {
        let value = self.value(x).map(f64::exp);
        self.push_op(value, Op::Exp(x), &[x])
    }

    pub fn neg(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| -v);
        self.push_op(value, Op::Neg(x), &[x])
    }

    pub fn row_sum(&mut self, x: Var) -> Var {
        let value = tensor::row_sum(self.value(x));
        self.push_op(value, Op::RowSum(x), &[x])
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let value = Tensor::scalar(self.value(x).iter().sum());
        self.push_op(value, Op::Sum(x), &[x])
    }

    pub fn mean(&mut self, x: Var) -> Var {
        let len = self.value(x).len() as f64;
        let value = Tensor::scalar(self.value(x).iter().sum::<f64>() / len);
        self.push_op(value, Op::Mean(x), &[x])
    }

    pub fn clamp(&mut self, x: Var, lo: f64, hi: f64) -> Result<Var> {
        if lo > hi {
            return Err(PolicyError::InvalidArgument(format!(
                "clamp bounds inverted: [{lo}, {hi}]"
            )));
        }
        let value = self.value(x).map(|v| v.clamp(lo, hi));
        Ok(self.push_op(value, Op::Clamp(x, lo, hi), &[x]))
    }

    /// Accumulate `d loss / d node` for every parameter reachable from
    /// `loss`, which must be a `1 x 1` tensor.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let loss_shape = self.value(loss).shape();
        if loss_shape != (1, 1) {
            return Err(PolicyError::NonScalar {
                rows: loss_shape.0,
                cols: loss_shape.1,
            });
        }
        let mut grads: Vec<Option<Tensor>> = Vec::with_capacity(self.nodes.len());
        grads.resize_with(self.nodes.len(), || None);
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=loss.0).rev() {
            if !self.nodes[idx].needs_grad {
                grads[idx] = None;
                continue;
            }
            // Parents always precede their children on the tape, so the grad
            // buffer splits cleanly at `idx`.
            let (lower, upper) = grads.split_at_mut(idx);
            let Some(g) = upper[0].as_ref() else { continue };
            let node = &self.nodes[idx];
            match node.op {
                Op::Leaf => {}
                Op::Matmul(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        let da = tensor::matmul_nt(g, &self.nodes[b.0].value);
                        add_grad(&mut lower[a.0], da);
                    }
                    if self.nodes[b.0].needs_grad {
                        let db = tensor::matmul_tn(&self.nodes[a.0].value, g);
                        add_grad(&mut lower[b.0], db);
                    }
                }
                Op::Add(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        add_grad(&mut lower[a.0], g.clone());
                    }
                    if self.nodes[b.0].needs_grad {
                        add_grad(&mut lower[b.0], g.clone());
                    }
                }
                Op::Sub(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        add_grad(&mut lower[a.0], g.clone());
                    }
                    if self.nodes[b.0].needs_grad {
                        add_grad(&mut lower[b.0], g.map(|v| -v));
                    }
                }
                Op::Mul(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        add_grad(&mut lower[a.0], tensor::zip(g, &self.nodes[b.0].value, |x, y| x * y));
                    }
                    if self.nodes[b.0].needs_grad {
                        add_grad(&mut lower[b.0], tensor::zip(g, &self.nodes[a.0].value, |x, y| x * y));
                    }
                }
                Op::AddRow(x, row) => {
                    if self.nodes[x.0].needs_grad {
                        add_grad(&mut lower[x.0], g.clone());
                    }
                    if self.nodes[row.0].needs_grad {
                        add_grad(&mut lower[row.0], tensor::col_sum(g));
                    }
                }
                Op::MulRow(x, row) => {
                    if self.nodes[x.0].needs_grad {
                        add_grad(
                            &mut lower[x.0],
                            tensor::zip_row(g, &self.nodes[row.0].value, |gv, rv| gv * rv),
                        );
                    }
                    if self.nodes[row.0].needs_grad {
                        let gx = tensor::zip(g, &self.nodes[x.0].value, |gv, xv| gv * xv);
                        add_grad(&mut lower[row.0], tensor::col_sum(&gx));
                    }
                }
                Op::Scale(x, factor) => {
                    if self.nodes[x.0].needs_grad {
                        add_grad(&mut lower[x.0], g.map(|v| v * factor));
                    }
                }
                Op::AddConst(x, _) => {
                    if self.nodes[x.0].needs_grad {
                        add_grad(&mut lower[x.0], g.clone());
                    }
                }
                Op::Tanh(x) => {
                    if self.nodes[x.0].needs_grad {
                        add_grad(
                            &mut lower[x.0],
                            tensor::zip(g, &node.value, |gv, y| gv * (1.0 - y * y)),
                        );
                    }
                }
                Op::Exp(x) => {
                    if self.nodes[x.0].needs_grad {
                        add_grad(&mut lower[x.0], tensor::zip(g, &node.value, |gv, y| gv * y));
                    }
                }
                Op::Neg(x) => {
                    if self.nodes[x.0].needs_grad {
                        add_grad(&mut lower[x.0], g.map(|v| -v));
                    }
                }
                Op::RowSum(x) => {
                    if self.nodes[x.0].needs_grad {
                        let src = &self.nodes[x.0].value;
                        let mut dx = Tensor::zeros(src.rows(), src.cols());
                        for i in 0..src.rows() {
                            let gi = g.get(i, 0);
                            for j in 0..src.cols() {
                                dx.set(i, j, gi);
                            }
                        }
                        add_grad(&mut lower[x.0], dx);
                    }
                }
                Op::Sum(x) => {
                    if self.nodes[x.0].needs_grad {
                        let src = &self.nodes[x.0].value;
                        let gv = g.get(0, 0);
                        add_grad(&mut lower[x.0], src.map(|_| gv));
                    }
                }
                Op::Mean(x) => {
                    if self.nodes[x.0].needs_grad {
                        let src = &self.nodes[x.0].value;
                        let gv = g.get(0, 0) / src.len() as f64;
                        add_grad(&mut lower[x.0], src.map(|_| gv));
                    }
                }
                Op::Clamp(x, lo, hi) => {
                    if self.nodes[x.0].needs_grad {
                        let dx = tensor::zip(g, &self.nodes[x.0].value, |gv, xv| {
                            if (lo..=hi).contains(&xv) {
                                gv
                            } else {
                                0.0
                            }
                        });
                        add_grad(&mut lower[x.0], dx);
                    }
                }
                Op::Min(a, b) => {
                    let va = &self.nodes[a.0].value;
                    let vb = &self.nodes[b.0].value;
                    if self.nodes[a.0].needs_grad {
                        let da = three_way(g, va, vb, |gv, x, y| if x <= y { gv } else { 0.0 });
                        add_grad(&mut lower[a.0], da);
                    }
                    if self.nodes[b.0].needs_grad {
                        let db = three_way(g, va, vb, |gv, x, y| if x <= y { 0.0 } else { gv });
                        add_grad(&mut lower[b.0], db);
                    }
                }
            }
        }
        self.grads = grads;
        Ok(())
    }
}

fn add_grad(slot: &mut Option<Tensor>, addend: Tensor) {
    match slot {
        Some(existing) => tensor::accumulate(existing, &addend),
        None => *slot = Some(addend),
    }
}

fn three_way(g: &Tensor, a: &Tensor, b: &Tensor, f: impl Fn(f64, f64, f64) -> f64) -> Tensor {
    let mut out = Tensor::zeros(g.rows(), g.cols());
    for i in 0..g.len() {
        out.data_mut()[i] = f(g.data()[i], a.data()[i], b.data()[i]);
    }
    out
}
