//! Random step kernels and the fixed panel used by the verifier.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{permutations, supports, Theory};
use crate::par::Exec;
use crate::rational::{self, Rational};

use super::sample::SampleSeed;
use super::step::{default_max_check, transport, tuple_of, StepKernel, Violation};

pub const DEFAULT_PANEL_SIZE: usize = 50;
const MAX_RANDOM_COLORS: u64 = 256;
const MAX_REPAIRS: usize = 10_000;

/// Single type, every color of every arity equally likely.
pub fn uniform_kernel(theory: &Arc<Theory>) -> Result<StepKernel> {
    let sig = theory.signature().clone();
    let mut dists = BTreeMap::new();
    for arity in sig.active_arities() {
        let count = sig.color_count(arity);
        let mass = rational::ratio(1, count as i64);
        dists.insert(arity, BTreeMap::from([(vec![0; arity], (0..count).map(|c| (c, mass.clone())).collect())]));
    }
    StepKernel::new(theory.clone(), vec!["t0".to_string()], vec![Rational::one()], dists)
}

/// Dense distributions on sorted type tuples, kept invariant under the
/// tuple's stabilizer.
struct Draft {
    q: usize,
    weights: Vec<Rational>,
    /// arity -> sorted tuple -> masses by color.
    sorted: BTreeMap<usize, BTreeMap<Vec<usize>, Vec<Rational>>>,
}

fn sorted_tuples(q: usize, arity: usize) -> Vec<Vec<usize>> {
    (0..q.pow(arity as u32)).map(|i| tuple_of(i, arity, q)).filter(|t| t.windows(2).all(|w| w[0] <= w[1])).collect()
}

impl Draft {
    fn random(theory: &Theory, q: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        let sig = theory.signature().clone();
        let raw: Vec<i64> = (0..q).map(|_| rng.random_range(1..=4)).collect();
        let total: i64 = raw.iter().sum();
        let weights = raw.iter().map(|&w| rational::ratio(w, total)).collect();
        let mut sorted = BTreeMap::new();
        for arity in sig.active_arities() {
            let count = sig.color_count(arity);
            if count > MAX_RANDOM_COLORS {
                return Err(Error::Resource(format!("arity {arity} has {count} colors, too many for random kernels")));
            }
            let perms = permutations(arity);
            let mut per = BTreeMap::new();
            for s in sorted_tuples(q, arity) {
                let mut masses: Vec<i64> = (0..count).map(|_| rng.random_range(0..=4)).collect();
                if masses.iter().all(|&m| m == 0) {
                    masses[rng.random_range(0..count as usize)] = 1;
                }
                let stab: Vec<&Vec<usize>> = perms.iter().filter(|tau| transport(&s, tau) == s).collect();
                let sym: Vec<Rational> = (0..count)
                    .map(|c| {
                        let sum: i64 = stab.iter().map(|tau| masses[sig.permute_color(arity, c, tau) as usize]).sum();
                        Rational::from_integer(sum.into())
                    })
                    .collect();
                per.insert(s, normalized(sym).expect("some mass is positive"));
            }
            sorted.insert(arity, per);
        }
        Ok(Draft { q, weights, sorted })
    }

    fn kernel(&self, theory: &Arc<Theory>) -> Result<StepKernel> {
        let sig = theory.signature().clone();
        let mut dists = BTreeMap::new();
        for (&arity, per) in &self.sorted {
            let perms = permutations(arity);
            let mut all = BTreeMap::new();
            for i in 0..self.q.pow(arity as u32) {
                let t = tuple_of(i, arity, self.q);
                let mut s = t.clone();
                s.sort_unstable();
                let tau = perms.iter().find(|tau| transport(&s, tau) == t).expect("some permutation sorts");
                let d: Vec<(u64, Rational)> = per[&s]
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| !m.is_zero())
                    .map(|(c, m)| (sig.permute_color(arity, c as u64, tau), m.clone()))
                    .collect();
                all.insert(t, d);
            }
            dists.insert(arity, all);
        }
        let types = (0..self.q).map(|i| format!("t{i}")).collect();
        StepKernel::new(theory.clone(), types, self.weights.clone(), dists)
    }

    /// Forbid color `color` on the support with type tuple `t`. When that
    /// would leave no color, either give up or (with `reset`) spread the
    /// mass evenly over every other color.
    fn forbid(&mut self, theory: &Theory, t: &[usize], color: u64, reset: bool) -> bool {
        let sig = theory.signature();
        let arity = t.len();
        let mut s = t.to_vec();
        s.sort_unstable();
        let perms = permutations(arity);
        let dist = self.sorted.get_mut(&arity).and_then(|m| m.get_mut(&s)).expect("drafted tuple");
        let mut next = dist.clone();
        for tau in perms.iter().filter(|tau| transport(&s, tau) == t) {
            for (c, m) in next.iter_mut().enumerate() {
                if sig.permute_color(arity, c as u64, tau) == color {
                    *m = Rational::zero();
                }
            }
        }
        let removed: Vec<bool> = next.iter().zip(dist.iter()).map(|(n, d)| n.is_zero() && !d.is_zero()).collect();
        let next = match normalized(next) {
            Some(d) => d,
            None if reset => {
                let spread: Vec<Rational> =
                    removed.iter().map(|&r| if r { Rational::zero() } else { Rational::one() }).collect();
                match normalized(spread) {
                    Some(d) => d,
                    None => return false,
                }
            }
            None => return false,
        };
        *dist = next;
        true
    }
}

fn normalized(masses: Vec<Rational>) -> Option<Vec<Rational>> {
    let total: Rational = masses.iter().sum();
    if total.is_zero() {
        return None;
    }
    Some(masses.into_iter().map(|m| m / &total).collect())
}

/// Random kernel with `q` types. For theories with forbidden models, colors
/// that make a forbidden model reachable are removed until the kernel is
/// valid.
pub fn random_kernel(theory: &Arc<Theory>, q: usize, rng: &mut ChaCha8Rng) -> Result<StepKernel> {
    let mut draft = Draft::random(theory, q, rng)?;
    let max_check = default_max_check(theory);
    for _ in 0..MAX_REPAIRS {
        let kernel = draft.kernel(theory)?;
        let report = kernel.validate(max_check);
        let Some(Violation::ForbiddenReachable { forbidden, types }) =
            report.violations.iter().find(|v| matches!(v, Violation::ForbiddenReachable { .. })).cloned()
        else {
            return Ok(kernel);
        };
        let f = &theory.forbidden()[forbidden];
        let types: Vec<usize> = types.iter().map(|n| n[1..].parse().expect("generated type name")).collect();
        let mut candidates: Vec<(Vec<usize>, u64)> = Vec::new();
        for arity in theory.signature().active_arities() {
            for s in supports(f.n(), arity) {
                candidates.push((s.iter().map(|&v| types[v]).collect(), f.color(&s)));
            }
        }
        let start = rng.random_range(0..candidates.len());
        let repaired = [false, true].into_iter().any(|reset| {
            (0..candidates.len()).any(|i| {
                let (t, c) = &candidates[(start + i) % candidates.len()];
                draft.forbid(theory, t, *c, reset)
            })
        });
        if !repaired {
            break;
        }
    }
    Err(Error::Resource(format!("could not draw a kernel supported by theory {}", theory.name())))
}

/// Number of kernels with one, two and three types in a panel of `size`.
fn composition(size: usize) -> [usize; 3] {
    let one = (size * 2).div_ceil(5);
    let two = (size * 2 / 5).min(size - one);
    [one, two, size - one - two]
}

/// Deterministic panel of `size` kernels. Kernel 0 is the uniform kernel when
/// the theory allows it; kernel `i` otherwise draws from stream `i`.
pub fn standard_panel(theory: &Arc<Theory>, size: usize, seed: u64, exec: Exec) -> Result<Vec<Arc<StepKernel>>> {
    let [one, two, _] = composition(size);
    let max_check = default_max_check(theory);
    exec.map_range(size, |i| {
        if i == 0 {
            let u = uniform_kernel(theory)?;
            if u.validate(max_check).is_valid() {
                return Ok(Arc::new(u));
            }
        }
        let q = if i < one {
            1
        } else if i < one + two {
            2
        } else {
            3
        };
        let mut rng = SampleSeed::new(seed, i as u64).rng();
        random_kernel(theory, q, &mut rng).map(Arc::new)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets as p;

    #[test]
    fn panel_kernels_are_valid() {
        for theory in [p::graphs(), p::triangle_free(), p::digraphs(), p::hypergraphs3()] {
            let panel = standard_panel(&theory, 10, 11, Exec::Sequential).unwrap();
            assert_eq!(panel.len(), 10);
            for k in &panel {
                let report = k.validate(default_max_check(&theory));
                assert!(report.is_valid(), "{}: {:?}", theory.name(), report.violations);
            }
        }
    }

    #[test]
    fn panel_is_deterministic_and_mixed() {
        let g = p::graphs();
        let a = standard_panel(&g, DEFAULT_PANEL_SIZE, 5, Exec::Sequential).unwrap();
        let b = standard_panel(&g, DEFAULT_PANEL_SIZE, 5, Exec::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(*a[0], uniform_kernel(&g).unwrap());
        let counts = [1, 2, 3].map(|q| a.iter().filter(|k| k.type_count() == q).count());
        assert_eq!(counts, [20, 20, 10]);
    }

    #[test]
    fn composition_covers_size() {
        for size in 1..60 {
            assert_eq!(composition(size).iter().sum::<usize>(), size);
        }
        assert_eq!(composition(50), [20, 20, 10]);
    }
}
