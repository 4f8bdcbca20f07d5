use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{ensure_input, Error, Result};
use crate::flags::TypeSigma;
use crate::rational::{self, Rational};

use super::step::{tuple_of, StepKernel};

/// A step kernel conditioned on its first `k` vertices having the given
/// types and realizing `sigma` exactly.
#[derive(Clone)]
pub struct RootedKernel {
    base: Arc<StepKernel>,
    root_types: Vec<usize>,
    sigma: TypeSigma,
    sigma_prob: Rational,
}

impl fmt::Debug for RootedKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RootedKernel")
            .field("root_types", &self.root_type_names())
            .field("sigma", &self.sigma)
            .finish()
    }
}

impl PartialEq for RootedKernel {
    fn eq(&self, other: &Self) -> bool {
        self.root_types == other.root_types && self.sigma == other.sigma && *self.base == *other.base
    }
}

impl RootedKernel {
    pub fn new(base: Arc<StepKernel>, root_types: Vec<usize>, sigma: TypeSigma) -> Result<Self> {
        base.theory().check_model(sigma.model())?;
        ensure_input!(
            root_types.len() == sigma.size(),
            "{} root types given for a type on {} vertices",
            root_types.len(),
            sigma.size()
        );
        ensure_input!(root_types.iter().all(|&t| t < base.type_count()), "unknown root type");
        let sigma_prob = base.color_probability(sigma.model(), &root_types);
        if sigma_prob.is_zero() {
            return Err(Error::Conditioning(format!(
                "root types {root_types:?} realize the type with probability zero"
            )));
        }
        Ok(RootedKernel { base, root_types, sigma, sigma_prob })
    }

    /// The kernel itself, with the empty root.
    pub fn unrooted(base: Arc<StepKernel>) -> Self {
        let sigma = TypeSigma::empty(base.theory());
        RootedKernel { base, root_types: Vec::new(), sigma, sigma_prob: Rational::one() }
    }

    pub fn base(&self) -> &Arc<StepKernel> {
        &self.base
    }

    pub fn root_types(&self) -> &[usize] {
        &self.root_types
    }

    pub fn root_type_names(&self) -> Vec<&str> {
        self.root_types.iter().map(|&t| self.base.type_names()[t].as_str()).collect()
    }

    pub fn sigma(&self) -> &TypeSigma {
        &self.sigma
    }

    /// Probability that the root supports realize the type, given the root
    /// types.
    pub fn sigma_probability(&self) -> &Rational {
        &self.sigma_prob
    }

    pub fn is_unrooted(&self) -> bool {
        self.root_types.is_empty()
    }
}

/// Result of dropping root vertices: either still rooted or the base.
#[derive(Debug, Clone, PartialEq)]
pub enum Restricted {
    Rooted(RootedKernel),
    Base(Arc<StepKernel>),
}

impl Restricted {
    pub fn into_rooted(self) -> RootedKernel {
        match self {
            Restricted::Rooted(r) => r,
            Restricted::Base(b) => RootedKernel::unrooted(b),
        }
    }
}

/// Keep only the first `k` root vertices.
pub fn restrict_root(kernel: &RootedKernel, k: usize) -> Result<Restricted> {
    ensure_input!(k <= kernel.sigma.size(), "cannot keep {k} of {} root vertices", kernel.sigma.size());
    if k == 0 {
        return Ok(Restricted::Base(kernel.base.clone()));
    }
    if k == kernel.sigma.size() {
        return Ok(Restricted::Rooted(kernel.clone()));
    }
    let sigma = kernel.sigma.restrict(k)?;
    RootedKernel::new(kernel.base.clone(), kernel.root_types[..k].to_vec(), sigma).map(Restricted::Rooted)
}

/// Finite ergodic decomposition of a conditioned kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<(Rational, RootedKernel)>,
    /// Probability that the first `k` vertices realize the type.
    pub sigma_probability: Rational,
}

impl Ensemble {
    pub fn sigma(&self) -> &TypeSigma {
        self.members[0].1.sigma()
    }
}

/// Condition the kernel on its first vertices realizing `sigma` and split by
/// root types.
pub fn condition_ensemble(kernel: &Arc<StepKernel>, sigma: &TypeSigma) -> Result<Ensemble> {
    kernel.theory().check_model(sigma.model())?;
    let q = kernel.type_count();
    let k = sigma.size();
    let mut raw = Vec::new();
    let mut z = Rational::zero();
    for idx in 0..q.pow(k as u32) {
        let types = tuple_of(idx, k, q);
        let w: Rational = types.iter().map(|&t| &kernel.weights()[t]).product::<Rational>()
            * kernel.color_probability(sigma.model(), &types);
        if w.is_zero() {
            continue;
        }
        z += &w;
        raw.push((w, types));
    }
    if z.is_zero() {
        return Err(Error::Conditioning(
            "the kernel realizes the type with probability zero".to_string(),
        ));
    }
    let members = raw
        .into_iter()
        .map(|(w, types)| Ok((w / &z, RootedKernel::new(kernel.clone(), types, sigma.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble { members, sigma_probability: z })
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z = {}", rational::format(&self.sigma_probability))?;
        for (w, m) in &self.members {
            write!(f, "; {} @ {:?}", rational::format(w), m.root_type_names())?;
        }
        Ok(())
    }
}
