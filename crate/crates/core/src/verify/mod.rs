//! Executable checks of the algebra/measure dictionary and a checker for
//! sum-of-squares positivity certificates.

mod cert;
mod checks;
mod report;

pub use cert::{CertTerm, Certificate};
pub use checks::{
    check_cauchy_schwarz, check_iterated_expectation, check_multiplicativity, check_product_asymptotics,
    AsymptoticConfig, Verifier,
};
pub use report::{CheckReport, Counterexample, Residual, Verdict};
