use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_input, Result};
use crate::model::{canonical_form, Model, Pattern};
use crate::rational::{binomial, Rational};

use super::basis::Flag;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Estimate { mean, stderr: (var / n.max(1) as f64).sqrt(), trials: n }
    }

    /// Whether `value` lies within `z` standard errors; a zero standard
    /// error demands an exact match up to rounding.
    pub fn covers(&self, value: f64, z: f64) -> bool {
        (self.mean - value).abs() <= z * self.stderr + 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Exact(Rational),
    Estimate(Estimate),
}

/// Density of the flag in a host model whose first `k` vertices realize the
/// flag's type.
pub fn empirical_density(flag: &Flag, host: &Model, mode: DensityMode) -> Result<Density> {
    match mode {
        DensityMode::Exact => empirical_density_exact(flag, host).map(Density::Exact),
        DensityMode::MonteCarlo { trials, seed } => {
            empirical_density_mc(flag, host, trials, seed).map(Density::Estimate)
        }
    }
}

pub fn empirical_density_exact(flag: &Flag, host: &Model) -> Result<Rational> {
    ensure_input!(host.n() >= flag.size(), "host has fewer vertices than the flag");
    let pattern = Pattern::new(flag.model(), flag.root_size())?;
    let count = pattern.count_in(host)?;
    let k = flag.root_size();
    Ok(Rational::new(count.into(), binomial(host.n() - k, flag.size() - k).into()))
}

/// Estimate from `trials` uniformly random vertex sets; trial `t` draws from
/// its own stream of the seed.
pub fn empirical_density_mc(flag: &Flag, host: &Model, trials: usize, seed: u64) -> Result<Estimate> {
    ensure_input!(host.n() >= flag.size(), "host has fewer vertices than the flag");
    ensure_input!(trials > 0, "at least one trial is needed");
    let k = flag.root_size();
    let root: Vec<usize> = (0..k).collect();
    ensure_input!(
        host.induced_sorted(&root) == flag.root_model(),
        "host does not extend the flag's type"
    );
    let target = flag.key()?;
    let extra = flag.size() - k;
    let mut xs = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut s: Vec<usize> = sample(&mut rng, host.n() - k, extra).into_iter().map(|v| v + k).collect();
        s.sort_unstable();
        let mut all = root.clone();
        all.extend(s);
        let sub = host.induced_sorted(&all);
        xs.push(if canonical_form(&sub, k)?.encoding == target { 1.0 } else { 0.0 });
    }
    Ok(Estimate::from_samples(&xs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets as p;
    use crate::rational::ratio;

    #[test]
    fn exact_densities_in_small_hosts() {
        let g = p::graphs();
        let c4 = p::c4(&g);
        assert_eq!(empirical_density_exact(&p::edge(&g), c4.model()).unwrap(), ratio(2, 3));
        assert_eq!(empirical_density_exact(&p::k3(&g), p::k4(&g).model()).unwrap(), ratio(1, 1));
        let empty = g.empty_model(10);
        assert_eq!(empirical_density_exact(&p::edge(&g), &empty).unwrap(), ratio(0, 1));
        assert!(empirical_density_exact(&p::k4(&g), p::k3(&g).model()).is_err());
    }

    #[test]
    fn rooted_density_requires_matching_prefix() {
        let g = p::graphs();
        // a rooted edge type (two adjacent roots) cannot sit on a non-edge
        let f = p::edge_type_flag_with_pendant(&g);
        let host = g.empty_model(4);
        assert!(empirical_density_exact(&f, &host).is_err());
    }

    #[test]
    fn monte_carlo_is_reproducible_and_close() {
        let g = p::graphs();
        let c5 = crate::model::Model::graph(g.signature(), 5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let a = empirical_density_mc(&p::edge(&g), &c5, 2000, 7).unwrap();
        let b = empirical_density_mc(&p::edge(&g), &c5, 2000, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.covers(0.5, 4.0), "{a:?}");
    }
}
