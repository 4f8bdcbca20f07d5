//! Exact evaluation of flags and elements under (rooted) step kernels.
//!
//! For a flag `F` on `m` vertices with root `k`, the measure of its class is
//! the number of distinct labelings of the non-root vertices times the
//! probability of one fixed labeling; the latter is a sum over type
//! assignments of products of type weights and support-color masses. All
//! masses are scaled to integers by per-arity common denominators, so the
//! inner loop runs in `u128` whenever the worst-case magnitude fits and falls
//! back to big integers otherwise.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::AlgebraElement;
use crate::error::{ensure_input, Error, Result};
use crate::flags::Flag;
use crate::model::{automorphism_count, supports, Encoding};
use crate::rational::Rational;

use super::rooted::{Ensemble, RootedKernel};
use super::step::tuple_index;

const MAX_DENSE_COLORS: u64 = 1 << 12;

trait Acc: Clone {
    fn nothing() -> Self;
    fn from_big(x: &BigUint) -> Self;
    fn mul(&self, x: &Self) -> Self;
    fn add_to(&mut self, x: &Self);
    fn vanishes(&self) -> bool;
    fn into_big(self) -> BigUint;
}

impl Acc for u128 {
    fn nothing() -> Self {
        0
    }
    fn from_big(x: &BigUint) -> Self {
        x.to_u128().expect("checked against the bound")
    }
    fn mul(&self, x: &Self) -> Self {
        self * x
    }
    fn add_to(&mut self, x: &Self) {
        *self += x;
    }
    fn vanishes(&self) -> bool {
        *self == 0
    }
    fn into_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Acc for BigUint {
    fn nothing() -> Self {
        Zero::zero()
    }
    fn from_big(x: &BigUint) -> Self {
        x.clone()
    }
    fn mul(&self, x: &Self) -> Self {
        self * x
    }
    fn add_to(&mut self, x: &Self) {
        *self += x;
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn into_big(self) -> BigUint {
        self
    }
}

/// Integer-scaled tables of one kernel.
struct Scaled {
    alpha: Vec<BigUint>,
    alpha_den: BigUint,
    /// `[arity - 1][tuple][color]` numerators.
    dist: Vec<Vec<Vec<BigUint>>>,
    dist_den: Vec<BigUint>,
    max_alpha: BigUint,
    max_dist: Vec<BigUint>,
}

fn lcm_of<'a>(xs: impl Iterator<Item = &'a Rational>) -> BigUint {
    xs.fold(BigUint::one(), |acc, r| acc.lcm(&r.denom().magnitude().clone()))
}

fn scale(r: &Rational, den: &BigUint) -> BigUint {
    let v = r * Rational::from_integer(den.clone().into());
    v.to_integer().magnitude().clone()
}

impl Scaled {
    fn new(kernel: &RootedKernel) -> Result<Self> {
        let base = kernel.base();
        let sig = base.theory().signature().clone();
        let alpha_den = lcm_of(base.weights().iter());
        let alpha: Vec<BigUint> = base.weights().iter().map(|w| scale(w, &alpha_den)).collect();
        let mut dist = vec![Vec::new(); sig.arity_bound()];
        let mut dist_den = vec![BigUint::one(); sig.arity_bound()];
        let mut max_dist = vec![BigUint::zero(); sig.arity_bound()];
        for arity in sig.active_arities() {
            let colors = sig.color_count(arity);
            if colors > MAX_DENSE_COLORS {
                return Err(Error::Resource(format!(
                    "arity {arity} has {colors} colors, too many for exact evaluation"
                )));
            }
            let ds = base.distributions(arity);
            let den = lcm_of(ds.iter().flat_map(|d| d.iter().map(|(_, m)| m)));
            let table: Vec<Vec<BigUint>> = ds
                .iter()
                .map(|d| {
                    let mut row = vec![BigUint::zero(); colors as usize];
                    for (c, m) in d {
                        row[*c as usize] = scale(m, &den);
                    }
                    row
                })
                .collect();
            max_dist[arity - 1] = table.iter().flatten().max().cloned().unwrap_or_default();
            dist[arity - 1] = table;
            dist_den[arity - 1] = den;
        }
        let max_alpha = alpha.iter().max().cloned().unwrap_or_default();
        Ok(Scaled { alpha, alpha_den, dist, dist_den, max_alpha, max_dist })
    }
}

/// A support ending at a non-root vertex: its arity, the other vertices and
/// the color the flag requires.
struct Need {
    arity: usize,
    others: Vec<usize>,
    color: u64,
}

/// Memoizing exact evaluator for one (rooted) kernel.
pub struct Evaluator<'a> {
    kernel: &'a RootedKernel,
    scaled: Scaled,
    cache: HashMap<Encoding, Rational>,
}

impl std::fmt::Debug for Evaluator<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Evaluator").field("kernel", self.kernel).field("cached", &self.cache.len()).finish()
    }
}

impl<'a> Evaluator<'a> {
    pub fn new(kernel: &'a RootedKernel) -> Result<Self> {
        Ok(Evaluator { kernel, scaled: Scaled::new(kernel)?, cache: HashMap::new() })
    }

    pub fn kernel(&self) -> &RootedKernel {
        self.kernel
    }

    fn check_type(&self, flag: &Flag) -> Result<()> {
        ensure_input!(
            flag.root_size() == self.kernel.sigma().size()
                && flag.root_model() == *self.kernel.sigma().model(),
            "flag type does not match the kernel's root"
        );
        Ok(())
    }

    /// Probability that the vertices `0..m` carry exactly the flag's labeled
    /// model, given the conditioned root.
    pub fn labeled_probability(&self, flag: &Flag) -> Result<Rational> {
        self.check_type(flag)?;
        let model = flag.model();
        let (m, k) = (model.n(), flag.root_size());
        let sig = model.signature().clone();
        let q = self.kernel.base().type_count();
        let mut needs: Vec<Vec<Need>> = Vec::with_capacity(m - k);
        let mut support_counts = vec![0u32; sig.arity_bound()];
        for v in k..m {
            let mut list = Vec::new();
            for arity in sig.active_arities() {
                for mut others in supports(v, arity - 1) {
                    others.push(v);
                    let color = model.color(&others);
                    others.pop();
                    list.push(Need { arity, others, color });
                    support_counts[arity - 1] += 1;
                }
            }
            needs.push(list);
        }
        let s = &self.scaled;
        let mut bound = s.max_alpha.pow((m - k) as u32) * BigUint::from(q).pow((m - k) as u32);
        for arity in sig.active_arities() {
            bound *= s.max_dist[arity - 1].pow(support_counts[arity - 1]);
        }
        let total = if bound <= BigUint::from(u128::MAX) {
            self.sum_over_types::<u128>(&needs, k, m)
        } else {
            self.sum_over_types::<BigUint>(&needs, k, m)
        };
        let mut den = s.alpha_den.pow((m - k) as u32);
        for arity in sig.active_arities() {
            den *= s.dist_den[arity - 1].pow(support_counts[arity - 1]);
        }
        Ok(Rational::new(total.into(), den.into()))
    }

    fn sum_over_types<T: Acc>(&self, needs: &[Vec<Need>], k: usize, m: usize) -> BigUint {
        let s = &self.scaled;
        let q = self.kernel.base().type_count();
        let alpha: Vec<T> = s.alpha.iter().map(T::from_big).collect();
        let dist: Vec<Vec<Vec<T>>> =
            s.dist.iter().map(|a| a.iter().map(|row| row.iter().map(T::from_big).collect()).collect()).collect();
        let mut types = vec![0usize; m];
        types[..k].copy_from_slice(self.kernel.root_types());
        let one = T::from_big(&BigUint::one());
        let mut total = T::nothing();
        #[allow(clippy::too_many_arguments)]
        fn rec<T: Acc>(
            depth: usize,
            k: usize,
            q: usize,
            needs: &[Vec<Need>],
            alpha: &[T],
            dist: &[Vec<Vec<T>>],
            types: &mut Vec<usize>,
            partial: &T,
            total: &mut T,
        ) {
            if depth == needs.len() {
                total.add_to(partial);
                return;
            }
            let v = k + depth;
            let mut tuple = Vec::with_capacity(8);
            for t in 0..q {
                if alpha[t].vanishes() {
                    continue;
                }
                types[v] = t;
                let mut acc = partial.mul(&alpha[t]);
                for need in &needs[depth] {
                    tuple.clear();
                    tuple.extend(need.others.iter().map(|&u| types[u]));
                    tuple.push(t);
                    acc = acc.mul(&dist[need.arity - 1][tuple_index(&tuple, q)][need.color as usize]);
                    if acc.vanishes() {
                        break;
                    }
                }
                if !acc.vanishes() {
                    rec(depth + 1, k, q, needs, alpha, dist, types, &acc, total);
                }
            }
        }
        rec(0, k, q, needs, &alpha, &dist, &mut types, &one, &mut total);
        total.into_big()
    }

    /// Measure of the flag's isomorphism class.
    pub fn flag(&mut self, flag: &Flag) -> Result<Rational> {
        self.check_type(flag)?;
        let key = flag.key()?;
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        let k = flag.root_size();
        let free = (flag.size() - k) as u64;
        let labelings = (1..=free).product::<u64>() / automorphism_count(flag.model(), k)?;
        let value = self.labeled_probability(flag)? * Rational::from_integer(labelings.into());
        self.cache.insert(key, value.clone());
        Ok(value)
    }

    pub fn element(&mut self, a: &AlgebraElement) -> Result<Rational> {
        ensure_input!(a.sigma() == self.kernel.sigma(), "element type does not match the kernel's root");
        let mut total = Rational::zero();
        for (f, c) in a.terms() {
            total += self.flag(f)? * c;
        }
        Ok(total)
    }
}

/// `φ_K(a)` for an element.
pub fn exact_hom(kernel: &RootedKernel, a: &AlgebraElement) -> Result<Rational> {
    Evaluator::new(kernel)?.element(a)
}

/// `φ_K(F)` for a single flag.
pub fn exact_hom_flag(kernel: &RootedKernel, flag: &Flag) -> Result<Rational> {
    Evaluator::new(kernel)?.flag(flag)
}

/// Barycentre of an ensemble applied to an element.
pub fn ensemble_average(ensemble: &Ensemble, a: &AlgebraElement) -> Result<Rational> {
    ensure_input!(a.sigma() == ensemble.sigma(), "element type does not match the ensemble");
    let mut total = Rational::zero();
    for (w, member) in &ensemble.members {
        total += exact_hom(member, a)? * w;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::FlagAlgebra;
    use crate::kernel::condition_ensemble;
    use crate::presets as p;
    use crate::rational::{int, ratio};

    #[test]
    fn graphon_densities() {
        let g = p::graphs();
        let k = RootedKernel::unrooted(Arc::new(p::kernel_three_quarters(&g)));
        assert_eq!(exact_hom_flag(&k, &p::edge(&g)).unwrap(), ratio(3, 4));
        assert_eq!(exact_hom_flag(&k, &p::k3(&g)).unwrap(), ratio(27, 64));
        assert_eq!(exact_hom_flag(&k, &p::p3(&g)).unwrap(), ratio(27, 64));
        assert_eq!(exact_hom_flag(&k, &p::one_edge3(&g)).unwrap(), ratio(9, 64));
        assert_eq!(exact_hom_flag(&k, &p::c4(&g)).unwrap(), ratio(3 * 81, 256) * ratio(1, 16));
    }

    #[test]
    fn two_type_kernel() {
        let g = p::graphs();
        let base = Arc::new(p::kernel_two_type(&g));
        let k = RootedKernel::unrooted(base.clone());
        assert_eq!(exact_hom_flag(&k, &p::edge(&g)).unwrap(), ratio(1, 2));
        assert_eq!(exact_hom_flag(&k, &p::k3(&g)).unwrap(), int(0));
        let rooted = RootedKernel::new(base, vec![0], p::vertex_type(&g)).unwrap();
        assert_eq!(exact_hom_flag(&rooted, &p::rooted_edge(&g)).unwrap(), ratio(1, 2));
        assert_eq!(exact_hom_flag(&rooted, &p::cherry_at_center(&g)).unwrap(), ratio(1, 4));
        assert!(exact_hom_flag(&rooted, &p::edge(&g)).is_err());
    }

    #[test]
    fn worked_square_is_a_quarter_at_three_quarters() {
        let g = p::graphs();
        let alg = FlagAlgebra::new(g.clone());
        let e1 = alg.from_flag(&p::rooted_edge(&g)).unwrap();
        let ne1 = alg.from_flag(&p::rooted_non_edge(&g)).unwrap();
        let f = alg.sub(&e1, &ne1).unwrap();
        let avg = alg.downward(&alg.multiply(&f, &f).unwrap(), 0).unwrap();
        let k = RootedKernel::unrooted(Arc::new(p::kernel_three_quarters(&g)));
        assert_eq!(exact_hom(&k, &avg).unwrap(), ratio(1, 4));
    }

    #[test]
    fn ensemble_recovers_unrooted_value() {
        let g = p::graphs();
        let alg = FlagAlgebra::new(g.clone());
        let base = Arc::new(p::kernel_two_type_skewed(&g));
        let sigma = p::vertex_type(&g);
        let ens = condition_ensemble(&base, &sigma).unwrap();
        let e1 = alg.from_flag(&p::rooted_edge(&g)).unwrap();
        let sq = alg.multiply(&e1, &e1).unwrap();
        let down = alg.downward(&sq, 0).unwrap();
        let lhs = exact_hom(&RootedKernel::unrooted(base), &down).unwrap();
        let rhs = ensemble_average(&ens, &sq).unwrap() * &ens.sigma_probability;
        assert_eq!(lhs, rhs);
        assert_eq!(rhs, ratio(1, 3) * ratio(4, 9) + ratio(2, 3) * ratio(1, 9));
    }

    #[test]
    fn hypergraph_flags_partition_unity() {
        let g = p::hypergraphs3();
        let panel = crate::kernel::standard_panel(&g, 12, 3, crate::par::Exec::Sequential).unwrap();
        let k5 = crate::flags::enumerate_flags(&g, &crate::flags::TypeSigma::empty(&g), 5).unwrap();
        for kernel in panel.iter().skip(8) {
            let rk = RootedKernel::unrooted(kernel.clone());
            let mut ev = Evaluator::new(&rk).unwrap();
            let total: Rational = k5.flags().iter().map(|f| ev.flag(f).unwrap()).sum();
            assert_eq!(total, int(1));
        }
    }
}
