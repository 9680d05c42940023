//! Trainable parameter storage, MLP construction, and the flat-vector
//! gradient / Hessian-vector-product entry points.

use super::graph::{Adjoints, Graph, NodeId};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Rng;

pub type SlotId = usize;

#[derive(Debug, Clone)]
struct ParamEntry {
    name: String,
    rows: usize,
    cols: usize,
    offset: usize,
}

/// Registry of trainable tensors backed by one flat vector. Slot order is
/// the registration order, which fixes the flat layout across runs.
#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    entries: Vec<ParamEntry>,
    data: Vec<f64>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_with(
        &mut self,
        name: &str,
        rows: usize,
        cols: usize,
        mut init: impl FnMut() -> f64,
    ) -> SlotId {
        let offset = self.data.len();
        self.data.extend((0..rows * cols).map(|_| init()));
        self.entries.push(ParamEntry { name: name.to_string(), rows, cols, offset });
        self.entries.len() - 1
    }

    pub fn register(&mut self, name: &str, value: Tensor) -> SlotId {
        let offset = self.data.len();
        let [rows, cols] = value.shape();
        self.data.extend_from_slice(value.data());
        self.entries.push(ParamEntry { name: name.to_string(), rows, cols, offset });
        self.entries.len() - 1
    }

    pub fn slot_count(&self) -> usize {
        self.entries.len()
    }

    /// Total number of scalar parameters.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn set_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.data.len() {
            return Err(Error::DimensionMismatch {
                context: "ParamSet::set_flat",
                len_a: values.len(),
                len_b: self.data.len(),
            });
        }
        self.data.copy_from_slice(values);
        Ok(())
    }

    pub fn add_scaled(&mut self, direction: &[f64], scale: f64) -> Result<()> {
        if direction.len() != self.data.len() {
            return Err(Error::DimensionMismatch {
                context: "ParamSet::add_scaled",
                len_a: direction.len(),
                len_b: self.data.len(),
            });
        }
        for (p, d) in self.data.iter_mut().zip(direction) {
            *p += scale * d;
        }
        Ok(())
    }

    pub fn slot_name(&self, slot: SlotId) -> &str {
        &self.entries[slot].name
    }

    pub fn slot_shape(&self, slot: SlotId) -> [usize; 2] {
        [self.entries[slot].rows, self.entries[slot].cols]
    }

    pub fn slot_range(&self, slot: SlotId) -> std::ops::Range<usize> {
        let e = &self.entries[slot];
        e.offset..e.offset + e.rows * e.cols
    }

    pub fn tensor(&self, slot: SlotId) -> Tensor {
        let e = &self.entries[slot];
        Tensor::new(e.rows, e.cols, self.data[self.slot_range(slot)].to_vec())
    }

    pub fn slot_values(&self, slot: SlotId) -> &[f64] {
        &self.data[self.slot_range(slot)]
    }

    pub fn slot_values_mut(&mut self, slot: SlotId) -> &mut [f64] {
        let r = self.slot_range(slot);
        &mut self.data[r]
    }

    /// Bind every slot as a differentiable leaf of `g`.
    pub fn bind(&self, g: &mut Graph) -> Binding {
        let leaves = (0..self.slot_count()).map(|s| g.var(self.tensor(s))).collect();
        Binding { leaves, trainable: true }
    }

    /// Bind every slot as a constant leaf: forward-only, no gradients.
    pub fn bind_frozen(&self, g: &mut Graph) -> Binding {
        let leaves = (0..self.slot_count()).map(|s| g.constant(self.tensor(s))).collect();
        Binding { leaves, trainable: false }
    }
}

/// Per-graph leaf nodes for a `ParamSet`, in slot order.
pub struct Binding {
    leaves: Vec<NodeId>,
    trainable: bool,
}

impl Binding {
    pub fn node(&self, slot: SlotId) -> NodeId {
        self.leaves[slot]
    }

    pub fn is_trainable(&self) -> bool {
        self.trainable
    }

    /// Assemble the flat gradient in registry order; slots the loss never
    /// touched get exact zeros.
    pub fn flat_grad(&self, g: &Graph, adj: &Adjoints, ps: &ParamSet) -> Vec<f64> {
        let mut out = vec![0.0; ps.len()];
        for slot in 0..ps.slot_count() {
            if let Some(node) = adj.of(self.leaves[slot]) {
                out[ps.slot_range(slot)].copy_from_slice(g.value(node).data());
            }
        }
        out
    }
}

/// d(loss)/d(params) as a flat vector in registry order.
pub fn gradient(g: &mut Graph, loss: NodeId, binding: &Binding, ps: &ParamSet) -> Result<Vec<f64>> {
    let adj = g.backward(loss)?;
    Ok(binding.flat_grad(g, &adj, ps))
}

/// (d2 loss / d params2) . v without materializing the Hessian, by taking
/// the gradient of grad . v.
pub fn hessian_vector_product(
    g: &mut Graph,
    loss: NodeId,
    binding: &Binding,
    ps: &ParamSet,
    v: &[f64],
) -> Result<Vec<f64>> {
    if v.len() != ps.len() {
        return Err(Error::DimensionMismatch {
            context: "hessian_vector_product",
            len_a: v.len(),
            len_b: ps.len(),
        });
    }
    let adj = g.backward(loss)?;
    let mut gv: Option<NodeId> = None;
    for slot in 0..ps.slot_count() {
        let Some(grad) = adj.of(binding.node(slot)) else { continue };
        let [r, c] = ps.slot_shape(slot);
        let vc = g.constant(Tensor::new(r, c, v[ps.slot_range(slot)].to_vec()));
        let m = g.mul(grad, vc);
        let s = g.sum_all(m);
        gv = Some(match gv {
            Some(acc) => g.add(acc, s),
            None => s,
        });
    }
    let Some(gv) = gv else {
        return Ok(vec![0.0; ps.len()]);
    };
    let adj2 = g.backward(gv)?;
    Ok(binding.flat_grad(g, &adj2, ps))
}

// ---------------------------------------------------------------------------
// MLPs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum HiddenActivation {
    ReLU,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OutputActivation {
    Identity,
    Tanh,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_sizes: Vec<usize>,
    pub output_dim: usize,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
}

impl MlpSpec {
    pub fn relu(input_dim: usize, hidden: &[usize], output_dim: usize, out: OutputActivation) -> Self {
        MlpSpec {
            input_dim,
            hidden_sizes: hidden.to_vec(),
            output_dim,
            hidden_activation: HiddenActivation::ReLU,
            output_activation: out,
        }
    }
}

/// A fully-connected net whose weights live in a `ParamSet`.
#[derive(Debug, Clone)]
pub struct Mlp {
    spec: MlpSpec,
    weights: Vec<SlotId>,
    biases: Vec<SlotId>,
}

impl Mlp {
    /// Register weights for `spec`. Hidden layers use uniform(-1/sqrt(fan_in),
    /// +1/sqrt(fan_in)); the final layer is additionally scaled by
    /// `final_scale` (1e-2 for policy heads so initial actions start near
    /// uniform / centered, 1.0 for critics).
    pub fn init(ps: &mut ParamSet, name: &str, spec: MlpSpec, rng: &mut Rng, final_scale: f64) -> Mlp {
        let mut dims = vec![spec.input_dim];
        dims.extend_from_slice(&spec.hidden_sizes);
        dims.push(spec.output_dim);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let layers = dims.len() - 1;
        for l in 0..layers {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let bound = (1.0 / (fan_in.max(1) as f64).sqrt())
                * if l == layers - 1 { final_scale } else { 1.0 };
            let w = ps.register_with(&format!("{name}.w{l}"), fan_in, fan_out, || {
                rng.uniform_in(-bound, bound)
            });
            let b = ps.register_with(&format!("{name}.b{l}"), 1, fan_out, || 0.0);
            weights.push(w);
            biases.push(b);
        }
        Mlp { spec, weights, biases }
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn slots(&self) -> impl Iterator<Item = SlotId> + '_ {
        self.weights.iter().chain(self.biases.iter()).copied()
    }

    /// Forward pass for a batch (rows are samples). Errors if the input
    /// width disagrees with the spec or the output is non-finite.
    pub fn forward(&self, g: &mut Graph, bind: &Binding, x: NodeId) -> Result<NodeId> {
        let got = g.value(x).cols();
        if got != self.spec.input_dim {
            return Err(Error::ShapeMismatch {
                context: "Mlp::forward",
                expected: format!("input width {}", self.spec.input_dim),
                got: format!("{got}"),
            });
        }
        let rows = g.value(x).rows();
        let mut h = x;
        let layers = self.weights.len();
        for l in 0..layers {
            let z = g.matmul(h, bind.node(self.weights[l]));
            let b = g.broadcast_row(bind.node(self.biases[l]), rows);
            let z = g.add(z, b);
            h = if l < layers - 1 {
                match self.spec.hidden_activation {
                    HiddenActivation::ReLU => g.relu(z),
                    HiddenActivation::Tanh => g.tanh(z),
                }
            } else {
                match self.spec.output_activation {
                    OutputActivation::Identity => z,
                    OutputActivation::Tanh => g.tanh(z),
                    OutputActivation::Softmax => g.softmax(z),
                }
            };
        }
        g.value(h).check_finite("Mlp::forward output")?;
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let den = a
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .max(b.iter().map(|x| x * x).sum::<f64>().sqrt())
            .max(1e-12);
        num / den
    }

    /// Central finite differences of a parametric scalar loss.
    pub(crate) fn fd_gradient(
        ps: &mut ParamSet,
        eval: &mut dyn FnMut(&ParamSet) -> f64,
        eps: f64,
    ) -> Vec<f64> {
        let n = ps.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let orig = ps.flat()[i];
            ps.flat_mut()[i] = orig + eps;
            let hi = eval(ps);
            ps.flat_mut()[i] = orig - eps;
            let lo = eval(ps);
            ps.flat_mut()[i] = orig;
            out[i] = (hi - lo) / (2.0 * eps);
        }
        out
    }

    #[test]
    fn identity_mlp_with_zero_weights_outputs_zero() {
        let mut ps = ParamSet::new();
        let mut rng = Rng::seeded(0);
        let spec = MlpSpec::relu(2, &[3], 2, OutputActivation::Identity);
        let mlp = Mlp::init(&mut ps, "net", spec, &mut rng, 1.0);
        for v in ps.flat_mut() {
            *v = 0.0;
        }
        let mut g = Graph::new_checked();
        let bind = ps.bind(&mut g);
        let x = g.constant(Tensor::row(vec![1.0, 2.0]));
        let y = mlp.forward(&mut g, &bind, x).unwrap();
        assert_eq!(g.value(y).data(), &[0.0, 0.0]);
    }

    #[test]
    fn softmax_head_on_zero_logits_is_uniform() {
        let mut ps = ParamSet::new();
        let mut rng = Rng::seeded(0);
        let spec = MlpSpec::relu(2, &[4], 3, OutputActivation::Softmax);
        let mlp = Mlp::init(&mut ps, "net", spec, &mut rng, 0.0);
        let mut g = Graph::new_checked();
        let bind = ps.bind(&mut g);
        let x = g.constant(Tensor::row(vec![0.7, -0.3]));
        let y = mlp.forward(&mut g, &bind, x).unwrap();
        for &p in g.value(y).data() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_tanh_unit_matches_direct_evaluation() {
        let mut ps = ParamSet::new();
        let mut rng = Rng::seeded(0);
        let spec = MlpSpec {
            input_dim: 1,
            hidden_sizes: vec![],
            output_dim: 1,
            hidden_activation: HiddenActivation::Tanh,
            output_activation: OutputActivation::Tanh,
        };
        let mlp = Mlp::init(&mut ps, "net", spec, &mut rng, 1.0);
        ps.flat_mut()[0] = 1.0; // weight
        let mut g = Graph::new_checked();
        let bind = ps.bind(&mut g);
        let x = g.constant(Tensor::row(vec![0.5]));
        let y = mlp.forward(&mut g, &bind, x).unwrap();
        assert!((g.scalar(y) - 0.5_f64.tanh()).abs() < 1e-15);
        assert!((g.scalar(y) - 0.462_117_157_260_009_76).abs() < 1e-12);
    }

    #[test]
    fn forward_rejects_wrong_input_width() {
        let mut ps = ParamSet::new();
        let mut rng = Rng::seeded(0);
        let mlp = Mlp::init(&mut ps, "net", MlpSpec::relu(3, &[4], 2, OutputActivation::Identity), &mut rng, 1.0);
        let mut g = Graph::new();
        let bind = ps.bind(&mut g);
        let x = g.constant(Tensor::row(vec![1.0, 2.0]));
        assert!(mlp.forward(&mut g, &bind, x).is_err());
    }

    #[test]
    fn gradients_match_finite_differences_on_random_mlps() {
        // randomized small nets, all activation combinations
        for (seed, out_act) in [
            (1u64, OutputActivation::Identity),
            (2, OutputActivation::Tanh),
            (3, OutputActivation::Softmax),
        ] {
            let mut rng = Rng::seeded(seed);
            let mut ps = ParamSet::new();
            let spec = MlpSpec {
                input_dim: 3,
                hidden_sizes: vec![5, 4],
                output_dim: 3,
                hidden_activation: if seed % 2 == 0 { HiddenActivation::ReLU } else { HiddenActivation::Tanh },
                output_activation: out_act,
            };
            let mlp = Mlp::init(&mut ps, "net", spec, &mut rng, 1.0);
            assert!(ps.len() <= 100, "gradient-check nets stay small");
            let inputs: Vec<f64> = (0..6).map(|_| rng.uniform_in(-1.0, 1.0)).collect();

            let mut eval = |ps: &ParamSet| {
                let mut g = Graph::new();
                let bind = ps.bind(&mut g);
                let x = g.constant(Tensor::new(2, 3, inputs.clone()));
                let y = mlp.forward(&mut g, &bind, x).unwrap();
                // smooth scalar of the outputs
                let t = g.tanh(y);
                let sq = g.square(t);
                let s = g.mean_all(sq);
                g.scalar(s)
            };

            let mut g = Graph::new();
            let bind = ps.bind(&mut g);
            let x = g.constant(Tensor::new(2, 3, inputs.clone()));
            let y = mlp.forward(&mut g, &bind, x).unwrap();
            let t = g.tanh(y);
            let sq = g.square(t);
            let loss = g.mean_all(sq);
            let grad = gradient(&mut g, loss, &bind, &ps).unwrap();

            let fd = fd_gradient(&mut ps, &mut eval, 1e-5);
            let err = rel_err(&grad, &fd);
            assert!(err < 1e-6, "seed {seed}: rel err {err}");
        }
    }

    #[test]
    fn hvp_matches_fd_of_gradients_on_random_net() {
        let mut rng = Rng::seeded(9);
        let mut ps = ParamSet::new();
        let spec = MlpSpec {
            input_dim: 2,
            hidden_sizes: vec![4],
            output_dim: 2,
            hidden_activation: HiddenActivation::Tanh,
            output_activation: OutputActivation::Identity,
        };
        let mlp = Mlp::init(&mut ps, "net", spec, &mut rng, 1.0);
        let inputs: Vec<f64> = (0..4).map(|_| rng.uniform_in(-1.0, 1.0)).collect();

        let build = |g: &mut Graph, bind: &Binding| {
            let x = g.constant(Tensor::new(2, 2, inputs.clone()));
            let y = mlp.forward(g, bind, x).unwrap();
            let t = g.tanh(y);
            let sq = g.square(t);
            g.mean_all(sq)
        };

        let v: Vec<f64> = (0..ps.len()).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5).collect();

        let mut g = Graph::new();
        let bind = ps.bind(&mut g);
        let loss = build(&mut g, &bind);
        let hvp = hessian_vector_product(&mut g, loss, &bind, &ps, &v).unwrap();

        // finite difference of gradients oracle
        let eps = 1e-6;
        let grad_at = |ps: &ParamSet| {
            let mut g = Graph::new();
            let bind = ps.bind(&mut g);
            let loss = build(&mut g, &bind);
            gradient(&mut g, loss, &bind, ps).unwrap()
        };
        let mut psp = ps.clone();
        psp.add_scaled(&v, eps).unwrap();
        let gp = grad_at(&psp);
        let mut psm = ps.clone();
        psm.add_scaled(&v, -eps).unwrap();
        let gm = grad_at(&psm);
        let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();

        let err = rel_err(&hvp, &fd);
        assert!(err < 1e-4, "rel err {err}");
    }

    #[test]
    fn hvp_dimension_mismatch_is_error() {
        let mut ps = ParamSet::new();
        ps.register("w", Tensor::row(vec![1.0, 2.0]));
        let mut g = Graph::new();
        let bind = ps.bind(&mut g);
        let w = bind.node(0);
        let sq = g.square(w);
        let loss = g.sum_all(sq);
        let bad = vec![1.0; 3];
        assert!(hessian_vector_product(&mut g, loss, &bind, &ps, &bad).is_err());
    }

    #[test]
    fn deterministic_construction_bitwise() {
        let build = || {
            let mut rng = Rng::seeded(77);
            let mut ps = ParamSet::new();
            let mlp = Mlp::init(
                &mut ps,
                "net",
                MlpSpec::relu(4, &[8, 8], 3, OutputActivation::Softmax),
                &mut rng,
                1e-2,
            );
            let mut g = Graph::new();
            let bind = ps.bind(&mut g);
            let x = g.constant(Tensor::row(vec![0.1, -0.2, 0.3, -0.4]));
            let y = mlp.forward(&mut g, &bind, x).unwrap();
            let lsm = g.log_softmax(y);
            let s = g.sum_all(lsm);
            let grad = gradient(&mut g, s, &bind, &ps).unwrap();
            (g.value(y).data().to_vec(), grad)
        };
        let (y1, g1) = build();
        let (y2, g2) = build();
        assert_eq!(y1, y2);
        assert_eq!(g1, g2);
    }
}
