//! Model-level types: datasets, output transforms, native/unit scaling,
//! priors, and sampler state.

pub mod dataset;
pub mod prior;
pub mod scale;
pub mod state;
pub mod transform;

pub use dataset::{validate_dataset, Dataset};
pub use prior::{ln_gamma, PriorSpec, ThetaPrior, WishartPrior};
pub use scale::{scale_point, scale_to_unit, unscale_from_unit};
pub use state::{init_state, ParameterState, ThetaValue};
pub use transform::{apply_transforms, invert_transforms, OutputTransform};
