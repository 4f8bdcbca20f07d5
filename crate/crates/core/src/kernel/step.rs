use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{ensure_input, Result};
use crate::model::{permutations, Model, Theory};
use crate::rational::{self, Rational};

/// Mass function over the colors of one arity.
pub type ColorDistribution = Vec<(u64, Rational)>;

/// Exchangeable measure given by finitely many vertex types.
///
/// Vertices draw i.i.d. types with the given weights; every support of
/// arity `i` then draws its color independently from the distribution
/// attached to the ordered tuple of its vertices' types (vertices listed in
/// increasing order).
#[derive(Clone)]
pub struct StepKernel {
    theory: Arc<Theory>,
    types: Vec<String>,
    weights: Vec<Rational>,
    /// `dists[arity - 1][tuple_index]`; empty for inactive arities.
    dists: Vec<Vec<ColorDistribution>>,
}

impl fmt::Debug for StepKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StepKernel")
            .field("theory", &self.theory.name())
            .field("types", &self.types)
            .field("weights", &self.weights.iter().map(rational::format).collect::<Vec<_>>())
            .finish()
    }
}

impl PartialEq for StepKernel {
    fn eq(&self, other: &Self) -> bool {
        *self.theory == *other.theory
            && self.types == other.types
            && self.weights == other.weights
            && self.dists == other.dists
    }
}

/// Mixed-radix index of a type tuple (first position most significant).
pub(crate) fn tuple_index(tuple: &[usize], types: usize) -> usize {
    tuple.iter().fold(0, |acc, &t| acc * types + t)
}

pub(crate) fn tuple_of(mut index: usize, arity: usize, types: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = index % types;
        index /= types;
    }
    out
}

/// Type tuple after moving position `j` to `tau[j]`.
pub(crate) fn transport(tuple: &[usize], tau: &[usize]) -> Vec<usize> {
    let mut out = vec![0; tuple.len()];
    for (j, &t) in tau.iter().enumerate() {
        out[t] = tuple[j];
    }
    out
}

impl StepKernel {
    /// Builds a kernel; structural problems (unknown types, colors that do
    /// not fit, negative masses) are errors, while sums, equivariance and
    /// theory support are left to [`StepKernel::validate`].
    pub fn new(
        theory: Arc<Theory>,
        types: Vec<String>,
        weights: Vec<Rational>,
        dists: BTreeMap<usize, BTreeMap<Vec<usize>, ColorDistribution>>,
    ) -> Result<Self> {
        ensure_input!(!types.is_empty(), "a kernel needs at least one vertex type");
        ensure_input!(types.len() == weights.len(), "one weight per type is required");
        let mut names = std::collections::HashSet::new();
        for t in &types {
            ensure_input!(names.insert(t.as_str()), "duplicate type name {t}");
        }
        for w in &weights {
            ensure_input!(!w.is_negative(), "negative type weight {w}");
        }
        let sig = theory.signature().clone();
        let q = types.len();
        let mut table: Vec<Vec<ColorDistribution>> = vec![Vec::new(); sig.arity_bound()];
        for arity in sig.active_arities() {
            table[arity - 1] = vec![Vec::new(); q.pow(arity as u32)];
        }
        for (arity, per_tuple) in dists {
            ensure_input!(
                arity >= 1 && arity <= sig.arity_bound() && sig.color_bits(arity) > 0,
                "no predicates of arity {arity}"
            );
            for (tuple, dist) in per_tuple {
                ensure_input!(tuple.len() == arity, "type tuple {tuple:?} has the wrong length for arity {arity}");
                ensure_input!(tuple.iter().all(|&t| t < q), "type tuple {tuple:?} names an unknown type");
                let mut merged: BTreeMap<u64, Rational> = BTreeMap::new();
                for (color, mass) in dist {
                    sig.check_color(arity, color)?;
                    ensure_input!(!mass.is_negative(), "negative mass {mass}");
                    *merged.entry(color).or_insert_with(Rational::zero) += mass;
                }
                table[arity - 1][tuple_index(&tuple, q)] =
                    merged.into_iter().filter(|(_, m)| !m.is_zero()).collect();
            }
        }
        Ok(StepKernel { theory, types, weights, dists: table })
    }

    /// Graphon-style kernel for a theory with a single symmetric binary
    /// predicate: `edge[a][b]` is the edge probability between types.
    pub fn graphon(theory: Arc<Theory>, weights: Vec<Rational>, edge: Vec<Vec<Rational>>) -> Result<Self> {
        let sig = theory.signature();
        ensure_input!(
            sig.predicates().len() == 1 && sig.color_bits(2) == 1 && sig.active_arities().eq([2]),
            "graphon kernels need a theory with exactly one symmetric binary predicate"
        );
        let q = weights.len();
        ensure_input!(edge.len() == q && edge.iter().all(|r| r.len() == q), "edge matrix must be {q}×{q}");
        let mut pairs = BTreeMap::new();
        for a in 0..q {
            for b in 0..q {
                let p = edge[a][b].clone();
                pairs.insert(vec![a, b], vec![(0, Rational::one() - &p), (1, p)]);
            }
        }
        let types = (0..q).map(|i| format!("t{i}")).collect();
        StepKernel::new(theory, types, weights, BTreeMap::from([(2, pairs)]))
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn type_names(&self) -> &[String] {
        &self.types
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn distribution(&self, tuple: &[usize]) -> &ColorDistribution {
        &self.dists[tuple.len() - 1][tuple_index(tuple, self.types.len())]
    }

    pub(crate) fn distributions(&self, arity: usize) -> &[ColorDistribution] {
        &self.dists[arity - 1]
    }

    /// Mass of one color for a type tuple.
    pub fn mass(&self, tuple: &[usize], color: u64) -> Rational {
        self.distribution(tuple)
            .iter()
            .find(|(c, _)| *c == color)
            .map_or_else(Rational::zero, |(_, m)| m.clone())
    }

    /// Probability that supports inside `model` take exactly its colors
    /// when vertex `v` has type `types[v]`.
    pub(crate) fn color_probability(&self, model: &Model, types: &[usize]) -> Rational {
        let mut p = Rational::one();
        for arity in self.theory.signature().active_arities() {
            for s in crate::model::supports(model.n(), arity) {
                let tuple: Vec<usize> = s.iter().map(|&v| types[v]).collect();
                p *= self.mass(&tuple, model.color(&s));
                if p.is_zero() {
                    return p;
                }
            }
        }
        p
    }

    pub fn validate(&self, max_check: usize) -> ValidationReport {
        validate_kernel(self, max_check)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveWeight { type_name: String },
    WeightSum { sum: Rational },
    DistributionSum { arity: usize, tuple: Vec<String>, sum: Rational },
    Equivariance { arity: usize, tuple: Vec<String>, permutation: Vec<usize>, color: u64 },
    ForbiddenReachable { forbidden: usize, types: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveWeight { type_name } => write!(f, "type {type_name} has zero weight"),
            Violation::WeightSum { sum } => write!(f, "weight-sum violation: weights sum to {}", rational::format(sum)),
            Violation::DistributionSum { arity, tuple, sum } => {
                write!(f, "distribution for arity {arity} tuple {tuple:?} sums to {}", rational::format(sum))
            }
            Violation::Equivariance { arity, tuple, permutation, color } => write!(
                f,
                "equivariance fails for arity {arity} tuple {tuple:?} under {permutation:?} at color {color:#b}"
            ),
            Violation::ForbiddenReachable { forbidden, types } => {
                write!(f, "forbidden model #{forbidden} has positive probability with types {types:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Default size for the theory-support check.
pub fn default_max_check(theory: &Theory) -> usize {
    2 * theory.signature().arity_bound() + 2
}

/// Exact sums, equivariance, and reachability of forbidden models on up to
/// `max_check` vertices.
pub fn validate_kernel(kernel: &StepKernel, max_check: usize) -> ValidationReport {
    let mut violations = Vec::new();
    let q = kernel.type_count();
    let names = |t: &[usize]| t.iter().map(|&i| kernel.types[i].clone()).collect::<Vec<_>>();
    for (name, w) in kernel.types.iter().zip(&kernel.weights) {
        if !w.is_positive() {
            violations.push(Violation::NonPositiveWeight { type_name: name.clone() });
        }
    }
    let total: Rational = kernel.weights.iter().sum();
    if !total.is_one() {
        violations.push(Violation::WeightSum { sum: total });
    }
    let sig = kernel.theory.signature().clone();
    for arity in sig.active_arities() {
        let perms = permutations(arity);
        for (idx, dist) in kernel.dists[arity - 1].iter().enumerate() {
            let tuple = tuple_of(idx, arity, q);
            let sum: Rational = dist.iter().map(|(_, m)| m).sum();
            if !sum.is_one() {
                violations.push(Violation::DistributionSum { arity, tuple: names(&tuple), sum });
            }
            'perm: for tau in &perms {
                let moved = transport(&tuple, tau);
                for &(color, ref mass) in dist {
                    let image = sig.permute_color(arity, color, tau);
                    if kernel.mass(&moved, image) != *mass {
                        violations.push(Violation::Equivariance {
                            arity,
                            tuple: names(&tuple),
                            permutation: tau.clone(),
                            color,
                        });
                        break 'perm;
                    }
                }
            }
        }
    }
    // A forbidden model shows up in some larger outcome only if it already
    // has positive probability on its own vertex count.
    for (fi, f) in kernel.theory.forbidden().iter().enumerate() {
        if f.n() > max_check {
            continue;
        }
        let assignments = q.pow(f.n() as u32);
        for a in 0..assignments {
            let types = tuple_of(a, f.n(), q);
            if !kernel.color_probability(f, &types).is_zero() {
                violations.push(Violation::ForbiddenReachable { forbidden: fi, types: names(&types) });
                break;
            }
        }
    }
    ValidationReport { violations }
}
