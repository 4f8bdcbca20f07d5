//! Exact evaluation against a brute-force oracle that enumerates every
//! labeled model and every type assignment.

use std::sync::Arc;

use flagcalc::flags::{enumerate_flags, Flag, TypeSigma};
use flagcalc::kernel::{exact_hom_flag, standard_panel, RootedKernel, StepKernel};
use flagcalc::model::{supports, Model, Theory};
use flagcalc::par::Exec;
use flagcalc::presets as p;
use flagcalc::rational::{one, zero, Rational};

/// Every labeled model on `n` vertices whose first `sigma.n()` vertices
/// induce exactly `sigma`.
fn labeled_extensions(theory: &Theory, sigma: &Model, n: usize) -> Vec<Model> {
    let sig = theory.signature();
    let k = sigma.n();
    let mut slots: Vec<(Vec<usize>, u64)> = Vec::new();
    for arity in sig.active_arities() {
        for s in supports(n, arity) {
            if s.iter().all(|&v| v < k) {
                continue;
            }
            slots.push((s, sig.color_count(arity)));
        }
    }
    let mut base = theory.empty_model(n);
    for arity in sig.active_arities() {
        for s in supports(k, arity) {
            base.set_color(&s, sigma.color(&s)).unwrap();
        }
    }
    let mut out = Vec::new();
    let mut digits = vec![0u64; slots.len()];
    loop {
        let mut m = base.clone();
        for ((s, _), &c) in slots.iter().zip(&digits) {
            m.set_color(s, c).unwrap();
        }
        out.push(m);
        let mut i = 0;
        loop {
            if i == digits.len() {
                return out;
            }
            digits[i] += 1;
            if digits[i] < slots[i].1 {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn all_permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut tail in all_permutations(rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn same_flag(a: &Model, b: &Model, k: usize) -> bool {
    let n = a.n();
    all_permutations((k..n).collect()).into_iter().any(|tail| {
        let perm: Vec<usize> = (0..k).chain(tail).collect();
        a.relabel(&perm) == *b
    })
}

/// Probability of the exact labeled model given a full type assignment.
fn model_probability(kernel: &StepKernel, m: &Model, types: &[usize]) -> Rational {
    let sig = kernel.theory().signature();
    let mut prob = one();
    for arity in sig.active_arities() {
        for s in supports(m.n(), arity) {
            let tuple: Vec<usize> = s.iter().map(|&v| types[v]).collect();
            prob *= kernel.mass(&tuple, m.color(&s));
        }
    }
    prob
}

/// Sum over the non-root type assignments of their weight times the model
/// probability.
fn averaged_probability(kernel: &StepKernel, m: &Model, roots: &[usize]) -> Rational {
    let q = kernel.type_count();
    let free = m.n() - roots.len();
    let mut total = zero();
    for code in 0..q.pow(free as u32) {
        let mut types = roots.to_vec();
        let mut c = code;
        let mut w = one();
        for _ in 0..free {
            types.push(c % q);
            w *= &kernel.weights()[c % q];
            c /= q;
        }
        total += w * model_probability(kernel, m, &types);
    }
    total
}

fn oracle(kernel: &StepKernel, flag: &Flag, roots: &[usize]) -> Rational {
    let theory = kernel.theory();
    let k = flag.root_size();
    let sigma = flag.sigma().model().clone();
    let sigma_prob = model_probability(kernel, &sigma, roots);
    let hits: Rational = labeled_extensions(theory, &sigma, flag.size())
        .iter()
        .filter(|h| same_flag(h, flag.model(), k))
        .map(|h| averaged_probability(kernel, h, roots))
        .sum();
    hits / sigma_prob
}

fn check_theory(theory: &Arc<Theory>, sigmas: &[TypeSigma], top: usize, panel: usize) {
    let kernels = standard_panel(theory, panel, 11, Exec::Sequential).unwrap();
    for kernel in &kernels {
        for sigma in sigmas {
            let k = sigma.size();
            let q = kernel.type_count();
            for code in 0..q.pow(k as u32) {
                let roots: Vec<usize> = (0..k).map(|i| code / q.pow(i as u32) % q).collect();
                let Ok(rooted) = RootedKernel::new(kernel.clone(), roots.clone(), sigma.clone()) else {
                    continue;
                };
                for level in k.max(1)..=top {
                    let basis = enumerate_flags(theory, sigma, level).unwrap();
                    let mut total = zero();
                    for f in basis.flags() {
                        let got = exact_hom_flag(&rooted, f).unwrap();
                        assert_eq!(got, oracle(kernel, f, &roots), "{} {f:?} roots {roots:?}", theory.name());
                        total += got;
                    }
                    assert_eq!(total, one());
                }
            }
        }
    }
}

#[test]
fn graphs_match_the_oracle() {
    let g = p::graphs();
    check_theory(&g, &[TypeSigma::empty(&g), p::vertex_type(&g), p::edge_type(&g)], 4, 6);
}

#[test]
fn presets_match_the_oracle() {
    let g = p::graphs();
    let sigmas = [TypeSigma::empty(&g), p::vertex_type(&g), p::edge_type(&g)];
    for kernel in [p::kernel_half(&g), p::kernel_three_quarters(&g), p::kernel_two_type_skewed(&g)] {
        let kernel = Arc::new(kernel);
        for sigma in &sigmas {
            let roots = vec![0; sigma.size()];
            let Ok(rooted) = RootedKernel::new(kernel.clone(), roots.clone(), sigma.clone()) else {
                continue;
            };
            for f in enumerate_flags(&g, sigma, 4).unwrap().flags() {
                assert_eq!(exact_hom_flag(&rooted, f).unwrap(), oracle(&kernel, f, &roots));
            }
        }
    }
}

#[test]
fn triangle_free_graphs_match_the_oracle() {
    let t = p::triangle_free();
    check_theory(&t, &[TypeSigma::empty(&t), p::vertex_type(&t)], 4, 4);
}

#[test]
fn digraphs_match_the_oracle() {
    let d = p::digraphs();
    check_theory(&d, &[TypeSigma::empty(&d), p::vertex_type(&d)], 3, 4);
}

#[test]
fn hypergraphs_match_the_oracle() {
    let h = p::hypergraphs3();
    check_theory(&h, &[TypeSigma::empty(&h)], 4, 4);
}
