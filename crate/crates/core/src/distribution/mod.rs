//! Distributions: finite-support joints, threshold scenarios, the
//! lower-bound families, packings and KL utilities.

mod continuous;
mod examples;
mod family;
mod joint;
pub mod kl;
mod packing;
mod pair;

pub use continuous::{ContinuousJoint, Density1D};
pub use examples::{example3_source, example_scenario, ExampleParams, Scenario};
pub use family::{
    build_theorem3_family, build_theorem4_family, default_tau, family_class, sigma_hypothesis, theorem3_epsilon,
    theorem3_pair, theorem4_d, FamilyParams, SigmaChoice, SigmaFamily,
};
pub use joint::DiscreteJoint;
pub use kl::{chi2_bound, kl_bernoulli, kl_product};
pub use packing::{full_cube, hamming, packing_distance, packing_size, vg_packing, Sign};
pub use pair::{Certified, DensitySpec, Distribution, ScenarioDoc, TransferPair};
