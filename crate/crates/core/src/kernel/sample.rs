//! Drawing finite models from a (rooted) step kernel and Monte-Carlo flag
//! densities.

use std::collections::HashMap;
use std::ops::ControlFlow;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_input, Error, Result};
use crate::flags::{Estimate, Flag};
use crate::model::{supports, Model, Pattern};
use crate::par::Exec;
use crate::rational::{binomial, to_f64};

use super::rooted::RootedKernel;
use super::step::{tuple_index, StepKernel};

/// Seed plus stream selector for a ChaCha8 generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SampleSeed {
    pub seed: u64,
    pub stream: u64,
}

impl SampleSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        SampleSeed { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Cumulative tables in `f64`, built once per kernel.
struct Tables {
    types: Vec<f64>,
    /// `[arity - 1][tuple]` -> (colors, cumulative masses).
    colors: Vec<Vec<(Vec<u64>, Vec<f64>)>>,
}

fn draw(rng: &mut ChaCha8Rng, cdf: &[f64]) -> usize {
    let u: f64 = rng.random();
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

impl Tables {
    fn new(kernel: &StepKernel) -> Self {
        let mut acc = 0.0;
        let mut types = Vec::new();
        let mut last_positive = 0;
        for (i, w) in kernel.weights().iter().enumerate() {
            acc += to_f64(w);
            types.push(acc);
            if to_f64(w) > 0.0 {
                last_positive = i;
            }
        }
        // Rounding must never make the draw land on a zero-weight type.
        for c in types.iter_mut().skip(last_positive) {
            *c = f64::INFINITY;
        }
        let sig = kernel.theory().signature().clone();
        let mut colors = vec![Vec::new(); sig.arity_bound()];
        for arity in sig.active_arities() {
            colors[arity - 1] = kernel
                .distributions(arity)
                .iter()
                .map(|d| {
                    let positive: Vec<_> = d.iter().filter(|(_, m)| to_f64(m) > 0.0).collect();
                    let mut acc = 0.0;
                    let mut cdf: Vec<f64> = positive
                        .iter()
                        .map(|(_, m)| {
                            acc += to_f64(m);
                            acc
                        })
                        .collect();
                    if let Some(last) = cdf.last_mut() {
                        *last = f64::INFINITY;
                    }
                    (positive.iter().map(|(c, _)| *c).collect(), cdf)
                })
                .collect();
        }
        Tables { types, colors }
    }

    fn sample(&self, kernel: &RootedKernel, n: usize, rng: &mut ChaCha8Rng) -> Result<Model> {
        let k = kernel.sigma().size();
        ensure_input!(n >= k, "cannot sample {n} vertices above a {k}-vertex root");
        let base = kernel.base();
        let sig = base.theory().signature().clone();
        let q = base.type_count();
        let mut types: Vec<usize> = kernel.root_types().to_vec();
        types.extend((k..n).map(|_| draw(rng, &self.types)));
        let root = kernel.sigma().model();
        let mut colors = vec![Vec::new(); sig.arity_bound()];
        let mut tuple = Vec::with_capacity(sig.arity_bound());
        for arity in sig.active_arities() {
            let mut out = Vec::with_capacity(binomial(n, arity) as usize);
            for s in supports(n, arity) {
                if s[arity - 1] < k {
                    out.push(root.color(&s));
                    continue;
                }
                tuple.clear();
                tuple.extend(s.iter().map(|&v| types[v]));
                let (cs, cdf) = &self.colors[arity - 1][tuple_index(&tuple, q)];
                if cs.is_empty() {
                    return Err(Error::Consistency(format!("type tuple {tuple:?} has no color with positive mass")));
                }
                out.push(cs[draw(rng, cdf)]);
            }
            colors[arity - 1] = out;
        }
        let model = Model::from_parts(sig, n, colors)?;
        if !base.theory().forbidden().is_empty() && !base.theory().satisfies(&model)? {
            return Err(Error::Consistency(format!(
                "sampled model violates theory {}; the kernel does not respect it",
                base.theory().name()
            )));
        }
        Ok(model)
    }
}

/// Draw an `n`-vertex model from the kernel.
pub fn sample_model(kernel: &StepKernel, n: usize, seed: SampleSeed) -> Result<Model> {
    let rooted = RootedKernel::unrooted(std::sync::Arc::new(kernel.clone()));
    sample_rooted(&rooted, n, seed)
}

/// Draw an `n`-vertex model whose first vertices carry the kernel's root
/// types and realize its type exactly.
pub fn sample_rooted(kernel: &RootedKernel, n: usize, seed: SampleSeed) -> Result<Model> {
    Tables::new(kernel.base()).sample(kernel, n, &mut seed.rng())
}

/// Mean exact flag density over `trials` sampled `n`-vertex models; trial
/// `t` uses stream `seed.stream + t`.
pub fn mc_hom(
    kernel: &RootedKernel,
    flag: &Flag,
    n: usize,
    trials: usize,
    seed: SampleSeed,
    exec: Exec,
) -> Result<Estimate> {
    ensure_input!(trials > 0, "at least one trial is needed");
    ensure_input!(n >= flag.size(), "sample size {n} is below the flag size {}", flag.size());
    ensure_input!(
        flag.root_size() == kernel.sigma().size() && flag.sigma() == *kernel.sigma(),
        "flag type does not match the kernel's root"
    );
    let tables = Tables::new(kernel.base());
    let pattern = Pattern::new(flag.model(), flag.root_size())?;
    let denom = binomial(n - flag.root_size(), flag.size() - flag.root_size()) as f64;
    let xs = exec.map_range(trials, |t| -> Result<f64> {
        let mut rng = SampleSeed::new(seed.seed, seed.stream.wrapping_add(t as u64)).rng();
        let host = tables.sample(kernel, n, &mut rng)?;
        Ok(pattern.count_in(&host)? as f64 / denom)
    });
    let xs = xs.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&xs))
}

/// Fraction of ordered pairs of disjoint non-root vertex sets `(A, B)` with
/// `|A| = |f1| - k`, `|B| = |f2| - k` such that `root ∪ A` and `root ∪ B`
/// induce `f1` and `f2`.
pub fn disjoint_pair_density(f1: &Flag, f2: &Flag, host: &Model) -> Result<f64> {
    let k = f1.root_size();
    ensure_input!(f2.root_size() == k && f1.sigma() == f2.sigma(), "flags are over different types");
    let (a, b) = (f1.size() - k, f2.size() - k);
    ensure_input!(host.n() >= k + a + b, "host is too small for a disjoint pair");
    let collect = |f: &Flag| -> Result<Vec<Vec<usize>>> {
        let pattern = Pattern::new(f.model(), k)?;
        let mut out = Vec::new();
        let _ = pattern.for_each_copy(host, |s| {
            out.push(s.to_vec());
            ControlFlow::<()>::Continue(())
        })?;
        Ok(out)
    };
    let first = collect(f1)?;
    let second = collect(f2)?;
    // Copies of f2 containing each vertex subset, for inclusion-exclusion.
    let mut containing: HashMap<Vec<usize>, i64> = HashMap::new();
    for s in &second {
        for mask in 1u32..(1 << s.len()) {
            let sub: Vec<usize> = (0..s.len()).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
            *containing.entry(sub).or_insert(0) += 1;
        }
    }
    let mut overlapping: i64 = 0;
    for s in &first {
        for mask in 1u32..(1 << s.len()) {
            let sub: Vec<usize> = (0..s.len()).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
            let sign = if sub.len() % 2 == 1 { 1 } else { -1 };
            overlapping += sign * containing.get(&sub).copied().unwrap_or(0);
        }
    }
    let pairs = first.len() as i64 * second.len() as i64 - overlapping;
    let free = host.n() - k;
    Ok(pairs as f64 / (binomial(free, a) as f64 * binomial(free - a, b) as f64))
}
