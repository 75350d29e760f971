//! Discrete p, A, L, E1, H on a radial grid, exact-identity residuals and quadratic forms.

mod forms;
mod identities;
mod operator;
mod state;

pub use forms::{quadratic_form, FormKind, FormRegistry, FormRequest};
pub use identities::{decomposition_residual, dl_identity_residual, Residual};
pub use operator::{
    assemble_a, assemble_a_explicit, assemble_l_e1_h, assemble_p, multiplication, DiscreteOperator,
    OpLabel, OperatorSet,
};
pub use state::{boundary_touch, GaussianPacket, StateVector};
