//! Step-kernel exchangeable measures: exact evaluation, conditioning on a
//! type, sampling, and random panels.

mod eval;
mod panel;
mod rooted;
mod sample;
mod step;

pub use eval::{ensemble_average, exact_hom, exact_hom_flag, Evaluator};
pub use panel::{random_kernel, standard_panel, uniform_kernel, DEFAULT_PANEL_SIZE};
pub use rooted::{condition_ensemble, restrict_root, Ensemble, Restricted, RootedKernel};
pub use sample::{disjoint_pair_density, mc_hom, sample_model, sample_rooted, SampleSeed};
pub(crate) use step::tuple_of;
pub use step::{default_max_check, validate_kernel, ColorDistribution, StepKernel, ValidationReport, Violation};
