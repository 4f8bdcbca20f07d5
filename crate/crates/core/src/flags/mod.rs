//! Types, rooted flags, flag bases and the density coefficients that drive
//! the algebra.

mod basis;
mod density;
mod empirical;

pub use basis::{enumerate_flags, enumerate_flags_with, Flag, FlagBasis, TypeSigma};
pub use density::{density_p, joint_density_p2, q_normalizer};
pub(crate) use density::{density_counts as density_counts_for, joint_counts as joint_counts_for};
pub use empirical::{empirical_density, empirical_density_exact, empirical_density_mc, Density, DensityMode, Estimate};
