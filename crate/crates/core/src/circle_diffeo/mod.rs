mod build;
mod bump;
mod chain;
mod family;
mod norm;
mod perturb;

pub use bump::{bump_flow_eval, circle_offset, psi, BumpFlow, FLOW_TOLERANCE};
pub use chain::{BudgetEntry, DiffeoChain, MatchedPair, Pass};
pub use family::{make_orbit_family, DensePointFamily, DEFAULT_HORIZON, MAX_DENOMINATOR};
pub use norm::{ck_norm_estimate, NormEstimate, MAX_ORDER, MIN_GRID};
pub use perturb::{perturb_to_match, Perturbation, MAX_RADIUS, SAFETY, SNAP_DISTANCE};
pub use build::{build_matching_diffeo, build_matching_diffeo_with, cauchy_check, injectivity_check, pair_errors, BuildConfig, CauchyRow, Slot};
