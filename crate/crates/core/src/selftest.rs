//! The acceptance suite as a library routine, at two scales.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::algebra::{AlgebraElement, FlagAlgebra};
use crate::error::{Error, Result};
use crate::flags::{joint_density_p2, density_p, Flag, TypeSigma};
use crate::kernel::{
    condition_ensemble, ensemble_average, mc_hom, standard_panel, Evaluator, RootedKernel, SampleSeed, StepKernel,
};
use crate::model::{enumerate_models, permutations, Theory};
use crate::par::Exec;
use crate::presets as p;
use crate::rational::{self, int, ratio, Rational};
use crate::verify::{check_product_asymptotics, AsymptoticConfig, Certificate, Residual, Verifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Small,
    Full,
}

impl Scale {
    fn pick<T>(self, small: T, full: T) -> T {
        match self {
            Scale::Small => small,
            Scale::Full => full,
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.pick("small", "full"))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SelftestConfig {
    pub scale: Scale,
    pub seed: u64,
    pub exec: Exec,
}

impl SelftestConfig {
    pub fn new(scale: Scale, seed: u64) -> Self {
        SelftestConfig { scale, seed, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} [{verdict}] {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub scale: Scale,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "scale": self.scale.to_string(),
            "seed": self.seed,
            "verdict": if self.passed() { "pass" } else { "fail" },
            "criteria": self.criteria.iter().map(|c| json!({
                "id": c.id,
                "name": c.name,
                "verdict": if c.passed { "pass" } else { "fail" },
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

pub const CRITERIA: [&str; 10] = [
    "enumeration",
    "chain rule",
    "partition of unity and joint densities",
    "multiplicativity",
    "downward worked example",
    "ergodic decomposition",
    "iterated expectations",
    "sampling convergence",
    "certificate checker",
    "basis rank",
];

type Outcome = Result<(bool, String)>;

/// Run one criterion (1-based).
pub fn run_criterion(id: usize, cfg: &SelftestConfig) -> CriterionResult {
    let outcome = match id {
        1 => enumeration(cfg),
        2 => chain_rule(cfg),
        3 => partition_of_unity(cfg),
        4 => multiplicativity(cfg),
        5 => worked_example(cfg),
        6 => ergodic_decomposition(cfg),
        7 => iterated(cfg),
        8 => sampling(cfg),
        9 => certificates(cfg),
        10 => basis_rank(cfg),
        _ => Err(Error::Input(format!("no criterion {id}"))),
    };
    let name = CRITERIA.get(id.wrapping_sub(1)).copied().unwrap_or("unknown");
    match outcome {
        Ok((passed, detail)) => CriterionResult { id, name, passed, detail },
        Err(e) => CriterionResult { id, name, passed: false, detail: format!("error: {e}") },
    }
}

pub fn run_selftest(cfg: &SelftestConfig) -> SelftestReport {
    SelftestReport {
        scale: cfg.scale,
        seed: cfg.seed,
        criteria: (1..=CRITERIA.len()).map(|id| run_criterion(id, cfg)).collect(),
    }
}

fn panel(theory: &Arc<Theory>, cfg: &SelftestConfig, full: usize) -> Result<Vec<Arc<StepKernel>>> {
    standard_panel(theory, cfg.scale.pick(10, full), cfg.seed, cfg.exec)
}

/// Isomorphism classes of graphs on `n` vertices by exhaustive search over
/// edge bitmasks and vertex permutations.
fn brute_force_graph_classes(n: usize, triangle_free: bool) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let index = |a: usize, b: usize| pairs.iter().position(|&(x, y)| (x, y) == (a.min(b), a.max(b))).unwrap();
    let perms = permutations(n);
    let mut classes = BTreeSet::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edge = |a: usize, b: usize| mask >> index(a, b) & 1 == 1;
        if triangle_free {
            let has_triangle = (0..n).any(|a| {
                (a + 1..n).any(|b| (b + 1..n).any(|c| edge(a, b) && edge(a, c) && edge(b, c)))
            });
            if has_triangle {
                continue;
            }
        }
        let canon = perms
            .iter()
            .map(|pi| {
                pairs.iter().enumerate().fold(0u32, |acc, (i, &(a, b))| {
                    if mask >> i & 1 == 1 {
                        acc | 1 << index(pi[a], pi[b])
                    } else {
                        acc
                    }
                })
            })
            .min()
            .unwrap();
        classes.insert(canon);
    }
    classes.len()
}

fn enumeration(_cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let tf = p::triangle_free();
    let mut ok = true;
    let mut parts = Vec::new();
    for (theory, n, expected, free) in [(&g, 2, 2, false), (&g, 3, 4, false), (&g, 4, 11, false), (&tf, 3, 3, true)] {
        let got = enumerate_models(theory, n)?.len();
        let oracle = brute_force_graph_classes(n, free);
        ok &= got == expected && oracle == expected;
        parts.push(format!("{}/{n}: {got}", theory.name()));
    }
    Ok((ok, parts.join(", ")))
}

fn chain_rule(cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let alg = FlagAlgebra::with_exec(g.clone(), cfg.exec);
    let lifted = alg.lift(&alg.from_flag(&p::edge(&g))?, 3)?;
    let expected = [(p::empty3(&g), int(0)), (p::one_edge3(&g), ratio(1, 3)), (p::p3(&g), ratio(2, 3)), (p::k3(&g), int(1))];
    let mut ok = true;
    for (f, c) in &expected {
        ok &= lifted.coeff_of(f)? == *c;
    }
    let verifier = Verifier::with_panel(alg, panel(&g, cfg, 50)?, cfg.seed);
    let empty = TypeSigma::empty(&g);
    let top = cfg.scale.pick(4, 5);
    let mut checks = 0;
    for m in 2..=3 {
        for level in m..=top {
            let r = verifier.check_chain_rule(&empty, m, level)?;
            ok &= r.passed();
            checks += 1;
        }
    }
    Ok((ok, format!("lift(edge,3) = (0,1/3,2/3,1); {checks} chain-rule checks up to level {top} on {} kernels", verifier.panel().len())))
}

fn partition_of_unity(cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let alg = FlagAlgebra::with_exec(g.clone(), cfg.exec);
    let top = cfg.scale.pick(4, 5);
    let mut ok = true;
    let mut identities = 0usize;
    for sigma in [TypeSigma::empty(&g), p::vertex_type(&g), p::edge_type(&g)] {
        let k = sigma.size();
        for level in k.max(1)..=top {
            let big = alg.basis(&sigma, level)?;
            for f in big.flags() {
                for m in k..=level {
                    let small = alg.basis(&sigma, m)?;
                    let total: Rational = small.flags().iter().map(|s| density_p(s, f)).sum::<Result<Rational>>()?;
                    ok &= total.is_one();
                    identities += 1;
                }
                for a in 1..=(level - k) {
                    for b in 1..=(level - k - a) {
                        let fa = alg.basis(&sigma, k + a)?;
                        let fb = alg.basis(&sigma, k + b)?;
                        for f1 in fa.flags() {
                            let mut marginal = Rational::zero();
                            for f2 in fb.flags() {
                                marginal += joint_density_p2(f1, f2, f)?;
                            }
                            ok &= marginal == density_p(f1, f)?;
                            identities += 1;
                        }
                    }
                }
            }
        }
    }
    Ok((ok, format!("{identities} identities for |F| ≤ {top} over empty, vertex and edge types")))
}

fn single_flags(alg: &FlagAlgebra, sigma: &TypeSigma, top: usize) -> Result<Vec<AlgebraElement>> {
    let mut out = Vec::new();
    for level in sigma.size().max(1)..=top {
        for f in alg.basis(sigma, level)?.flags() {
            out.push(alg.from_flag(f)?);
        }
    }
    Ok(out)
}

fn multiplicativity(cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let alg = FlagAlgebra::with_exec(g.clone(), cfg.exec);
    let kernels = panel(&g, cfg, 50)?;
    let mut ok = true;
    let mut checks = 0usize;
    for sigma in [TypeSigma::empty(&g), p::vertex_type(&g)] {
        let flags = single_flags(&alg, &sigma, 3)?;
        let mut products = Vec::new();
        for i in 0..flags.len() {
            for j in i..flags.len() {
                products.push((i, j, alg.multiply(&flags[i], &flags[j])?));
            }
        }
        let mut rooted = Vec::new();
        for k in &kernels {
            if sigma.size() == 0 {
                rooted.push(RootedKernel::unrooted(k.clone()));
            } else {
                rooted.extend(condition_ensemble(k, &sigma)?.members.into_iter().map(|(_, m)| m));
            }
        }
        let outcomes = cfg.exec.map(&rooted, |kernel| -> Result<(bool, usize)> {
            let mut ev = Evaluator::new(kernel)?;
            let values = flags.iter().map(|f| ev.element(f)).collect::<Result<Vec<_>>>()?;
            let mut ok = true;
            for (i, j, prod) in &products {
                ok &= ev.element(prod)? == &values[*i] * &values[*j];
            }
            Ok((ok, products.len()))
        });
        for o in outcomes {
            let (good, n) = o?;
            ok &= good;
            checks += n;
        }
    }
    let half = RootedKernel::unrooted(Arc::new(p::kernel_half(&g)));
    let e = alg.from_flag(&p::edge(&g))?;
    let r = crate::verify::check_multiplicativity(&alg, &half, &e, &e)?;
    ok &= r.passed() && r.residuals["lhs"] == Residual::Exact(ratio(1, 4));
    Ok((ok, format!("{checks} exact product identities; e·e at p=1/2 gives 1/4 on both sides")))
}

fn worked_square(alg: &FlagAlgebra) -> Result<AlgebraElement> {
    let g = alg.theory();
    let e1 = alg.from_flag(&p::rooted_edge(g))?;
    let ne1 = alg.from_flag(&p::rooted_non_edge(g))?;
    let f = alg.sub(&e1, &ne1)?;
    alg.downward(&alg.multiply(&f, &f)?, 0)
}

fn worked_example(cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let alg = FlagAlgebra::with_exec(g.clone(), cfg.exec);
    let sq = worked_square(&alg)?;
    let expected = [(p::k3(&g), int(1)), (p::p3(&g), ratio(-1, 3)), (p::one_edge3(&g), ratio(-1, 3)), (p::empty3(&g), int(1))];
    let mut ok = sq.coeffs().len() == 4;
    for (f, c) in &expected {
        ok &= sq.coeff_of(f)? == *c;
    }
    let mut values = Vec::new();
    for (num, den) in [(1, 2), (3, 4), (0, 1), (1, 3), (1, 1)] {
        let pr = ratio(num, den);
        let k = StepKernel::graphon(g.clone(), vec![int(1)], vec![vec![pr.clone()]])?;
        let v = Evaluator::new(&RootedKernel::unrooted(Arc::new(k)))?.element(&sq)?;
        let want = (&pr * int(2) - int(1)) * (&pr * int(2) - int(1));
        ok &= v == want;
        values.push(format!("p={} -> {}", rational::format(&pr), rational::format(&v)));
    }
    Ok((ok, format!("K3 - 1/3 P3 - 1/3 one-edge + empty3; {}", values.join(", "))))
}

fn ergodic_decomposition(cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let alg = FlagAlgebra::with_exec(g.clone(), cfg.exec);
    let kernels = standard_panel(&g, cfg.scale.pick(6, 20), cfg.seed, cfg.exec)?;
    let mut ok = true;
    let mut checks = 0usize;
    for sigma in [p::vertex_type(&g), p::edge_type(&g)] {
        let elements: Vec<AlgebraElement> = (sigma.size()..=3)
            .flat_map(|level| alg.basis(&sigma, level).map(|b| b.flags().to_vec()).unwrap_or_default())
            .map(|f| alg.from_flag(&f))
            .collect::<Result<_>>()?;
        let downs = elements.iter().map(|a| alg.downward(a, 0)).collect::<Result<Vec<_>>>()?;
        let unit_down = alg.downward(&alg.unit(&sigma)?, 0)?;
        let outcomes = cfg.exec.map(&kernels, |k| -> Result<bool> {
            let rooted = RootedKernel::unrooted(k.clone());
            let mut ev = Evaluator::new(&rooted)?;
            let mass = ev.element(&unit_down)?;
            let ensemble = match condition_ensemble(k, &sigma) {
                Ok(e) => Some(e),
                Err(Error::Conditioning(_)) => None,
                Err(e) => return Err(e),
            };
            let mut ok = true;
            for (a, down) in elements.iter().zip(&downs) {
                let lhs = ev.element(down)?;
                let rhs = match &ensemble {
                    Some(e) => {
                        ok &= e.sigma_probability == mass;
                        &mass * ensemble_average(e, a)?
                    }
                    None => Rational::zero(),
                };
                ok &= lhs == rhs;
            }
            Ok(ok)
        });
        for o in outcomes {
            ok &= o?;
            checks += elements.len();
        }
    }
    Ok((ok, format!("{checks} exact identities on {} kernels for vertex and edge types", kernels.len())))
}

fn iterated(cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let alg = FlagAlgebra::with_exec(g.clone(), cfg.exec);
    let sigma = p::edge_type(&g);
    let basis = alg.basis(&sigma, 3)?;
    let mut ok = true;
    let mut elements: Vec<AlgebraElement> = basis.flags().iter().map(|f| alg.from_flag(f)).collect::<Result<_>>()?;
    let mixed: Vec<(Rational, &Flag)> =
        basis.flags().iter().enumerate().map(|(i, f)| (ratio(2 * i as i64 - 3, i as i64 + 2), f)).collect();
    elements.push(alg.from_terms(&sigma, 3, mixed)?);
    for a in &elements {
        ok &= crate::verify::check_iterated_expectation(&alg, a, 1, 0)?.passed();
    }
    Ok((ok, format!("{} level-3 elements over the edge type, 2 -> 1 -> 0", elements.len())))
}

fn sampling(cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let batches: usize = cfg.scale.pick(10, 100);
    let trials = cfg.scale.pick(40, 400);
    let n = cfg.scale.pick(100, 200);
    let allowed = batches.div_ceil(100);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, kernel) in [("p=1/2", p::kernel_half(&g)), ("two-type", p::kernel_two_type(&g))] {
        let rk = RootedKernel::unrooted(Arc::new(kernel));
        for flag in [p::edge(&g), p::k3(&g)] {
            let exact = rational::to_f64(&Evaluator::new(&rk)?.flag(&flag)?);
            let mut misses = 0;
            for b in 0..batches {
                let seed = SampleSeed::new(cfg.seed, (b * trials) as u64);
                let est = mc_hom(&rk, &flag, n, trials, seed, cfg.exec)?;
                if !est.covers(exact, 4.0) {
                    misses += 1;
                }
            }
            ok &= misses <= allowed;
            parts.push(format!("{name} {}v: {}/{batches}", flag.size(), batches - misses));
        }
    }
    let half = RootedKernel::unrooted(Arc::new(p::kernel_half(&g)));
    let asym = AsymptoticConfig {
        sizes: cfg.scale.pick(vec![50, 100, 200], vec![50, 100, 200, 400]),
        trials: cfg.scale.pick(5, 20),
        seed: cfg.seed,
        constant: 10.0,
        z: 4.0,
    };
    let r = check_product_asymptotics(&half, &p::edge(&g), &p::edge(&g), &asym, cfg.exec)?;
    ok &= r.passed();
    parts.push(format!("product asymptotics {}", r.verdict));
    Ok((ok, format!("n={n}, {trials} trials per batch; {}", parts.join(", "))))
}

fn certificates(cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let verifier = Verifier::with_panel(FlagAlgebra::with_exec(g.clone(), cfg.exec), panel(&g, cfg, 50)?, cfg.seed);
    let alg = verifier.algebra();
    let e1 = alg.from_flag(&p::rooted_edge(&g))?;
    let ne1 = alg.from_flag(&p::rooted_non_edge(&g))?;
    let f = alg.sub(&e1, &ne1)?;
    let good = verifier.check_certificate(&Certificate::square(alg, &f)?)?;
    let nonneg_panel = matches!(good.residuals.get("min_panel_value"), Some(Residual::Exact(v)) if !v.is_negative());
    let zero_residual = good.residuals["residual_support"] == Residual::Count(0);
    let bad = verifier.check_certificate(&Certificate::negative_unit(alg)?)?;
    let kernel_witness = matches!(
        &bad.counterexample,
        Some(crate::verify::Counterexample::Kernel { value, .. }) if *value == int(-1)
    );
    let ok = good.passed() && zero_residual && nonneg_panel && !bad.passed() && kernel_witness;
    Ok((ok, format!("self-certificate {} with zero residual; -1 certificate {} with a kernel witness", good.verdict, bad.verdict)))
}

/// Rank of a rational matrix by Gaussian elimination.
pub(crate) fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let mut r = 0;
    let cols = rows.first().map_or(0, |x| x.len());
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = &rows[i][c] / &rows[r][c];
                for j in c..cols {
                    let sub = &factor * &rows[r][j];
                    rows[i][j] -= sub;
                }
            }
        }
        r += 1;
    }
    r
}

fn basis_rank(cfg: &SelftestConfig) -> Outcome {
    let g = p::graphs();
    let kernels = standard_panel(&g, 8, cfg.seed, cfg.exec)?;
    let basis = crate::flags::enumerate_flags(&g, &TypeSigma::empty(&g), 3)?;
    let rows = kernels
        .iter()
        .map(|k| {
            let rooted = RootedKernel::unrooted(k.clone());
            let mut ev = Evaluator::new(&rooted)?;
            basis.flags().iter().map(|f| ev.flag(f)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let r = rank(rows);
    Ok((r == 4, format!("rank {r} for {} flags under 8 kernels", basis.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_oracle_counts() {
        assert_eq!(brute_force_graph_classes(4, false), 11);
        assert_eq!(brute_force_graph_classes(4, true), 7);
        assert_eq!(brute_force_graph_classes(5, false), 34);
    }

    #[test]
    fn rank_of_small_matrices() {
        let m = vec![vec![int(1), int(2)], vec![int(2), int(4)], vec![int(0), int(1)]];
        assert_eq!(rank(m), 2);
        assert_eq!(rank(vec![vec![int(0), int(0)]]), 0);
    }

    #[test]
    fn unknown_criterion_fails() {
        let r = run_criterion(11, &SelftestConfig::new(Scale::Small, 1));
        assert!(!r.passed);
    }
}
