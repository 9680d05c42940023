//! Minimal reverse-mode automatic differentiation over dense f64 arrays:
//! enough for MLP policies and critics, flat-vector gradients, and
//! Hessian-vector products of scalar losses.

pub mod adam;
pub mod blas;
pub mod graph;
pub mod nn;
pub mod snapshot;
pub mod tensor;

pub use adam::{adam_step, AdamState};
pub use graph::{Adjoints, Graph, NodeId};
pub use nn::{
    gradient, hessian_vector_product, Binding, HiddenActivation, Mlp, MlpSpec, OutputActivation,
    ParamSet, SlotId,
};
pub use tensor::Tensor;
