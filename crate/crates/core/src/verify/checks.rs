use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::algebra::{AlgebraElement, FlagAlgebra};
use crate::error::{ensure_input, Error, Result};
use crate::flags::{Estimate, Flag, TypeSigma};
use crate::io;
use crate::kernel::{
    condition_ensemble, disjoint_pair_density, exact_hom, sample_rooted, standard_panel, Evaluator, RootedKernel,
    SampleSeed, StepKernel,
};
use crate::model::Pattern;
use crate::par::Exec;
use crate::rational::{binomial, Rational};

use super::cert::Certificate;
use super::report::{CheckReport, Counterexample, Residual};

fn kernel_inputs(k: &RootedKernel) -> Value {
    json!({
        "kernel": io::kernel_to_json(k.base()),
        "root_types": k.root_type_names(),
    })
}

/// Panel-based checks over one theory.
#[derive(Debug)]
pub struct Verifier {
    alg: FlagAlgebra,
    panel: Vec<Arc<StepKernel>>,
    panel_seed: u64,
}

impl Verifier {
    pub fn new(alg: FlagAlgebra, panel_size: usize, panel_seed: u64) -> Result<Self> {
        let panel = standard_panel(alg.theory(), panel_size, panel_seed, alg.exec())?;
        Ok(Verifier { alg, panel, panel_seed })
    }

    pub fn with_panel(alg: FlagAlgebra, panel: Vec<Arc<StepKernel>>, panel_seed: u64) -> Self {
        Verifier { alg, panel, panel_seed }
    }

    pub fn algebra(&self) -> &FlagAlgebra {
        &self.alg
    }

    pub fn panel(&self) -> &[Arc<StepKernel>] {
        &self.panel
    }

    pub fn panel_seed(&self) -> u64 {
        self.panel_seed
    }

    /// Every ensemble member of every panel kernel that realizes `sigma`
    /// with positive probability, tagged with the panel index.
    pub fn conditioned_panel(&self, sigma: &TypeSigma) -> Result<Vec<(usize, RootedKernel)>> {
        let mut out = Vec::new();
        for (i, k) in self.panel.iter().enumerate() {
            if sigma.size() == 0 {
                out.push((i, RootedKernel::unrooted(k.clone())));
                continue;
            }
            match condition_ensemble(k, sigma) {
                Ok(ens) => out.extend(ens.members.into_iter().map(|(_, m)| (i, m))),
                Err(Error::Conditioning(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// Every flag of `F^σ_m` evaluates like its lift to level `level` on
    /// every conditioned panel kernel.
    pub fn check_chain_rule(&self, sigma: &TypeSigma, m: usize, level: usize) -> Result<CheckReport> {
        let k = sigma.size();
        ensure_input!(k <= m && m <= level, "need k ≤ m ≤ level, got k={k}, m={m}, level={level}");
        let inputs = json!({
            "theory": self.alg.theory().name(),
            "sigma": io::model_to_json(sigma.model()),
            "m": m,
            "level": level,
            "panel_size": self.panel.len(),
        });
        let mut report = CheckReport::new("chain-rule", Some(self.panel_seed), inputs);
        let small = self.alg.basis(sigma, m)?;
        let lifted = small
            .flags()
            .iter()
            .map(|f| Ok((f.clone(), self.alg.lift(&self.alg.from_flag(f)?, level)?)))
            .collect::<Result<Vec<_>>>()?;
        let kernels = self.conditioned_panel(sigma)?;
        let outcomes = self.alg.exec().map(&kernels, |(idx, kernel)| -> Result<_> {
            let mut ev = Evaluator::new(kernel)?;
            let mut worst = Rational::zero();
            let mut bad = None;
            for (f, l) in &lifted {
                let diff = (ev.flag(f)? - ev.element(l)?).abs();
                if diff > worst {
                    worst = diff.clone();
                    bad.get_or_insert((*idx, kernel.clone(), diff));
                }
            }
            Ok((worst, bad))
        });
        let mut worst = Rational::zero();
        for outcome in outcomes {
            let (w, bad) = outcome?;
            worst = worst.max(w);
            if let Some((idx, kernel, diff)) = bad {
                report.fail(Counterexample::Kernel { index: Some(idx), kernel, value: diff });
            }
        }
        report.residual("max_abs_difference", Residual::Exact(worst));
        report.residual("kernels", Residual::Count(kernels.len() as u64));
        report.residual("flags", Residual::Count(lifted.len() as u64));
        Ok(report)
    }

    /// Coefficientwise check of the residual, then a panel spot-check of
    /// the target.
    pub fn check_certificate(&self, cert: &Certificate) -> Result<CheckReport> {
        let theory = self.alg.theory();
        let inputs = json!({
            "certificate": io::certificate_to_json(theory, cert),
            "panel_size": self.panel.len(),
        });
        let mut report = CheckReport::new("cert", Some(self.panel_seed), inputs);
        let r = cert.residual(&self.alg)?;
        let negative: Vec<(Flag, Rational)> =
            r.terms().filter(|(_, c)| c.is_negative()).map(|(f, c)| (f.clone(), c.clone())).collect();
        let min = r.coeffs().values().cloned().fold(Rational::zero(), |a, b| a.min(b));
        report.residual("min_coefficient", Residual::Exact(min));
        report.residual("negative_coefficients", Residual::Count(negative.len() as u64));
        report.residual("residual_level", Residual::Count(r.level() as u64));
        report.residual("residual_support", Residual::Count(r.coeffs().len() as u64));
        let values = self.alg.exec().map(&self.panel, |k| exact_hom(&RootedKernel::unrooted(k.clone()), &cert.target));
        let mut min_phi: Option<Rational> = None;
        let mut witness = None;
        for (i, v) in values.into_iter().enumerate() {
            let v = v?;
            if v.is_negative() && witness.is_none() {
                witness = Some(Counterexample::kernel(Some(i), &self.panel[i], v.clone()));
            }
            min_phi = Some(min_phi.map_or(v.clone(), |m| m.min(v)));
        }
        if let Some(m) = min_phi {
            report.residual("min_panel_value", Residual::Exact(m));
        }
        if let Some(w) = witness {
            report.fail(w);
        }
        if let Some((flag, coefficient)) = negative.into_iter().next() {
            report.fail(Counterexample::Coefficient { flag, coefficient });
        }
        Ok(report)
    }
}

/// `φ(a·b) = φ(a)·φ(b)` for one kernel.
pub fn check_multiplicativity(
    alg: &FlagAlgebra,
    kernel: &RootedKernel,
    a: &AlgebraElement,
    b: &AlgebraElement,
) -> Result<CheckReport> {
    ensure_input!(a.sigma() == b.sigma(), "elements are over different types");
    let theory = alg.theory();
    let inputs = json!({
        "a": io::element_to_json(theory, a),
        "b": io::element_to_json(theory, b),
        "kernel": kernel_inputs(kernel),
    });
    let mut report = CheckReport::new("mult", None, inputs);
    let mut ev = Evaluator::new(kernel)?;
    let lhs = ev.element(&alg.multiply(a, b)?)?;
    let rhs = ev.element(a)? * ev.element(b)?;
    let residual = &lhs - &rhs;
    report.residual("lhs", Residual::Exact(lhs));
    report.residual("rhs", Residual::Exact(rhs));
    report.residual("residual", Residual::Exact(residual.clone()));
    if !residual.is_zero() {
        report.fail(Counterexample::Kernel { index: None, kernel: kernel.clone(), value: residual });
    }
    Ok(report)
}

/// `φ(⟦f⟧)² ≤ φ(⟦f²⟧)·φ(⟦1⟧)` for an unrooted kernel.
pub fn check_cauchy_schwarz(alg: &FlagAlgebra, kernel: &Arc<StepKernel>, f: &AlgebraElement) -> Result<CheckReport> {
    let theory = alg.theory();
    let rooted = RootedKernel::unrooted(kernel.clone());
    let inputs = json!({
        "f": io::element_to_json(theory, f),
        "kernel": kernel_inputs(&rooted),
    });
    let mut report = CheckReport::new("cs", None, inputs);
    let mut ev = Evaluator::new(&rooted)?;
    let mean = ev.element(&alg.downward(f, 0)?)?;
    let second = ev.element(&alg.downward(&alg.multiply(f, f)?, 0)?)?;
    let mass = ev.element(&alg.downward(&alg.unit(f.sigma())?, 0)?)?;
    let lhs = &mean * &mean;
    let rhs = second * mass;
    let gap = &rhs - &lhs;
    report.residual("lhs", Residual::Exact(lhs));
    report.residual("rhs", Residual::Exact(rhs));
    report.residual("gap", Residual::Exact(gap.clone()));
    if gap.is_negative() {
        report.fail(Counterexample::Kernel { index: None, kernel: rooted, value: gap });
    }
    Ok(report)
}

/// `⟦⟦a⟧_{k'}⟧_{k''} = ⟦a⟧_{k''}` coefficientwise.
pub fn check_iterated_expectation(alg: &FlagAlgebra, a: &AlgebraElement, k1: usize, k2: usize) -> Result<CheckReport> {
    let k = a.sigma().size();
    ensure_input!(k2 <= k1 && k1 <= k, "need k'' ≤ k' ≤ k, got k''={k2}, k'={k1}, k={k}");
    let inputs = json!({
        "a": io::element_to_json(alg.theory(), a),
        "k_prime": k1,
        "k_double_prime": k2,
    });
    let mut report = CheckReport::new("iterated", None, inputs);
    let twice = alg.downward(&alg.downward(a, k1)?, k2)?;
    let once = alg.downward(a, k2)?;
    let diff = alg.sub(&twice, &once)?;
    let worst = diff.coeffs().values().map(|c| c.abs()).fold(Rational::zero(), |a, b| a.max(b));
    report.residual("mismatched_coefficients", Residual::Count(diff.coeffs().len() as u64));
    report.residual("max_abs_difference", Residual::Exact(worst));
    if let Some((flag, c)) = diff.terms().next() {
        report.fail(Counterexample::Coefficient { flag: flag.clone(), coefficient: c.clone() });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticConfig {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Bound `Δ_n ≤ constant / n`.
    pub constant: f64,
    /// Slack, in combined standard errors, for the monotonicity test.
    pub z: f64,
}

impl Default for AsymptoticConfig {
    fn default() -> Self {
        AsymptoticConfig { sizes: vec![50, 100, 200, 400], trials: 20, seed: 0, constant: 10.0, z: 4.0 }
    }
}

/// `Δ_n = E|p(F1,G_n)·p(F2,G_n) − Σ_F p2(F1,F2;F)·p(F,G_n)|` over sampled
/// models, against `C/n` and for monotonicity in `n`. The inner sum is the
/// density of disjoint pairs of copies, computed directly.
pub fn check_product_asymptotics(
    kernel: &RootedKernel,
    f1: &Flag,
    f2: &Flag,
    cfg: &AsymptoticConfig,
    exec: Exec,
) -> Result<CheckReport> {
    let k = kernel.sigma().size();
    ensure_input!(
        f1.sigma() == *kernel.sigma() && f2.sigma() == *kernel.sigma(),
        "flags must be over the kernel's type"
    );
    ensure_input!(cfg.trials > 0, "at least one trial is needed");
    ensure_input!(!cfg.sizes.is_empty(), "at least one sample size is needed");
    ensure_input!(cfg.sizes.windows(2).all(|w| w[0] < w[1]), "sample sizes must increase");
    let need = f1.size() + f2.size() - k;
    ensure_input!(cfg.sizes[0] >= need, "sample size {} is below {need}", cfg.sizes[0]);
    let inputs = json!({
        "kernel": kernel_inputs(kernel),
        "f1": io::flag_to_json(f1),
        "f2": io::flag_to_json(f2),
        "sizes": cfg.sizes,
        "trials": cfg.trials,
        "constant": cfg.constant,
    });
    let mut report = CheckReport::new("asymptotic", Some(cfg.seed), inputs);
    let (p1, p2) = (Pattern::new(f1.model(), k)?, Pattern::new(f2.model(), k)?);
    let mut previous: Option<Estimate> = None;
    for (i, &n) in cfg.sizes.iter().enumerate() {
        let d1 = binomial(n - k, f1.size() - k) as f64;
        let d2 = binomial(n - k, f2.size() - k) as f64;
        let deltas = exec.map_range(cfg.trials, |t| -> Result<f64> {
            let stream = (i * cfg.trials + t) as u64;
            let g = sample_rooted(kernel, n, SampleSeed::new(cfg.seed, stream))?;
            let product = p1.count_in(&g)? as f64 / d1 * (p2.count_in(&g)? as f64 / d2);
            Ok((product - disjoint_pair_density(f1, f2, &g)?).abs())
        });
        let deltas = deltas.into_iter().collect::<Result<Vec<_>>>()?;
        let est = Estimate::from_samples(&deltas);
        report.residual(format!("delta_n{n:06}"), Residual::Statistical(est));
        let bound = cfg.constant / n as f64;
        if est.mean > bound {
            report.fail(Counterexample::Sample { n, estimate: est, bound });
        }
        if let Some(prev) = previous {
            let slack = cfg.z * (prev.stderr.powi(2) + est.stderr.powi(2)).sqrt() + 1e-12;
            if est.mean > prev.mean + slack {
                report.fail(Counterexample::Sample { n, estimate: est, bound: prev.mean + slack });
            }
        }
        previous = Some(est);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets as p;
    use crate::rational::{int, ratio};

    fn verifier() -> Verifier {
        let g = p::graphs();
        Verifier::new(FlagAlgebra::new(g), 10, 1).unwrap()
    }

    #[test]
    fn chain_rule_examples() {
        let v = verifier();
        let g = v.algebra().theory().clone();
        let empty = TypeSigma::empty(&g);
        assert!(v.check_chain_rule(&empty, 2, 3).unwrap().passed());
        assert!(v.check_chain_rule(&empty, 2, 4).unwrap().passed());
        assert!(v.check_chain_rule(&p::vertex_type(&g), 2, 3).unwrap().passed());
        assert!(v.check_chain_rule(&empty, 3, 2).is_err());
    }

    #[test]
    fn multiplicativity_examples() {
        let g = p::graphs();
        let alg = FlagAlgebra::new(g.clone());
        let half = RootedKernel::unrooted(Arc::new(p::kernel_half(&g)));
        let e = alg.from_flag(&p::edge(&g)).unwrap();
        let r = check_multiplicativity(&alg, &half, &e, &e).unwrap();
        assert!(r.passed());
        assert_eq!(r.residuals["lhs"], Residual::Exact(ratio(1, 4)));
        let two = RootedKernel::unrooted(Arc::new(p::kernel_two_type(&g)));
        let k3 = alg.from_flag(&p::k3(&g)).unwrap();
        let r = check_multiplicativity(&alg, &two, &e, &k3).unwrap();
        assert!(r.passed());
        assert_eq!(r.residuals["lhs"], Residual::Exact(int(0)));
        let e1 = alg.from_flag(&p::rooted_edge(&g)).unwrap();
        assert!(check_multiplicativity(&alg, &half, &e, &e1).is_err());
    }

    #[test]
    fn cauchy_schwarz_examples() {
        let g = p::graphs();
        let alg = FlagAlgebra::new(g.clone());
        let e1 = alg.from_flag(&p::rooted_edge(&g)).unwrap();
        let ne1 = alg.from_flag(&p::rooted_non_edge(&g)).unwrap();
        let f = alg.sub(&e1, &ne1).unwrap();
        let r = check_cauchy_schwarz(&alg, &Arc::new(p::kernel_half(&g)), &f).unwrap();
        assert_eq!(r.residuals["gap"], Residual::Exact(int(0)));
        assert_eq!(r.residuals["rhs"], Residual::Exact(int(0)));
        let r = check_cauchy_schwarz(&alg, &Arc::new(p::kernel_three_quarters(&g)), &f).unwrap();
        assert_eq!(r.residuals["lhs"], Residual::Exact(ratio(1, 4)));
        assert_eq!(r.residuals["gap"], Residual::Exact(int(0)));
        let r = check_cauchy_schwarz(&alg, &Arc::new(p::kernel_two_type_skewed(&g)), &e1).unwrap();
        assert!(r.passed());
        assert!(matches!(&r.residuals["gap"], Residual::Exact(x) if x.is_positive()));
    }

    #[test]
    fn iterated_examples() {
        let g = p::graphs();
        let alg = FlagAlgebra::new(g.clone());
        let sigma = p::edge_type(&g);
        let basis = alg.basis(&sigma, 3).unwrap();
        let terms: Vec<(Rational, &Flag)> =
            basis.flags().iter().enumerate().map(|(i, f)| (ratio(i as i64 + 1, 3), f)).collect();
        let a = alg.from_terms(&sigma, 3, terms).unwrap();
        assert!(check_iterated_expectation(&alg, &a, 1, 0).unwrap().passed());
        assert!(check_iterated_expectation(&alg, &alg.unit(&sigma).unwrap(), 2, 1).unwrap().passed());
        assert!(check_iterated_expectation(&alg, &a, 0, 1).is_err());
    }

    #[test]
    fn certificates() {
        let v = verifier();
        let alg = v.algebra();
        let g = alg.theory().clone();
        let e1 = alg.from_flag(&p::rooted_edge(&g)).unwrap();
        let ne1 = alg.from_flag(&p::rooted_non_edge(&g)).unwrap();
        let f = alg.sub(&e1, &ne1).unwrap();
        let r = v.check_certificate(&Certificate::square(alg, &f).unwrap()).unwrap();
        assert!(r.passed(), "{:?}", r.to_json());
        assert_eq!(r.residuals["residual_support"], Residual::Count(0));
        let r = v.check_certificate(&Certificate::negative_unit(alg).unwrap()).unwrap();
        assert!(!r.passed());
        match r.counterexample.unwrap() {
            Counterexample::Kernel { index, kernel, value } => {
                assert_eq!(index, Some(0));
                assert_eq!(value, int(-1));
                assert_eq!(**kernel.base(), p::kernel_half(&g));
            }
            other => panic!("{other:?}"),
        }
        let unit3 = alg.lift(&alg.unit(&TypeSigma::empty(&g)).unwrap(), 3).unwrap();
        let slack: Vec<_> = unit3.terms().map(|(f, c)| (f.clone(), c.clone() / int(2))).collect();
        let cert = Certificate { target: unit3, terms: Vec::new(), slack };
        assert!(v.check_certificate(&cert).unwrap().passed());
    }

    #[test]
    fn asymptotics_for_degenerate_kernels() {
        let g = p::graphs();
        let full = RootedKernel::unrooted(Arc::new(
            StepKernel::graphon(g.clone(), vec![int(1)], vec![vec![int(1)]]).unwrap(),
        ));
        let empty = RootedKernel::unrooted(Arc::new(
            StepKernel::graphon(g.clone(), vec![int(1)], vec![vec![int(0)]]).unwrap(),
        ));
        let cfg = AsymptoticConfig { sizes: vec![10, 20], trials: 3, ..Default::default() };
        for k in [&full, &empty] {
            let r = check_product_asymptotics(k, &p::edge(&g), &p::edge(&g), &cfg, Exec::Sequential).unwrap();
            assert!(r.passed());
            for v in r.residuals.values() {
                assert!(matches!(v, Residual::Statistical(e) if e.mean == 0.0));
            }
        }
        let bad = AsymptoticConfig { sizes: vec![20, 10], ..cfg };
        assert!(check_product_asymptotics(&full, &p::edge(&g), &p::edge(&g), &bad, Exec::Sequential).is_err());
    }

    #[test]
    fn asymptotics_at_one_half() {
        let g = p::graphs();
        let half = RootedKernel::unrooted(Arc::new(p::kernel_half(&g)));
        let cfg = AsymptoticConfig { sizes: vec![50, 100, 200], trials: 5, seed: 3, ..Default::default() };
        let r = check_product_asymptotics(&half, &p::edge(&g), &p::edge(&g), &cfg, Exec::default()).unwrap();
        assert!(r.passed(), "{}", io::render(&r.to_json()));
    }

    #[test]
    fn reports_render_with_sorted_keys() {
        let g = p::graphs();
        let alg = FlagAlgebra::new(g.clone());
        let e = alg.from_flag(&p::edge(&g)).unwrap();
        let half = RootedKernel::unrooted(Arc::new(p::kernel_half(&g)));
        let text = io::render(&check_multiplicativity(&alg, &half, &e, &e).unwrap().to_json());
        let keys: Vec<usize> = ["\"check\"", "\"counterexample\"", "\"inputs\"", "\"residuals\"", "\"seed\"", "\"verdict\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
