//! BSS-ANOVA covariance functions, the shared Karhunen-Loeve basis,
//! categorical bases, the functional-component catalog, and design
//! matrices.

pub mod catalog;
pub mod design;
pub mod kernels;
pub mod kl;
pub mod vars;

pub use catalog::{
    enumerate_discrepancy_components, enumerate_emulator_components, eval_categorical_basis,
    select_interaction_terms, Catalog, CatalogPolicy, ComponentDescriptor, ComponentKind,
};
pub use design::{design_matrix, design_row, eval_term};
pub use kernels::{bernoulli, k1, k2, kd};
pub use kl::{EigenScaling, KlBasis};
pub use vars::{VarKind, VarRole, VariableSpec};
