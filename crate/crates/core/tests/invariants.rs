use std::sync::Arc;

use flagcalc::algebra::{AlgebraElement, FlagAlgebra};
use flagcalc::flags::{density_p, enumerate_flags, Flag, TypeSigma};
use flagcalc::kernel::{exact_hom, random_kernel, restrict_root, RootedKernel, StepKernel};
use flagcalc::model::{canonical_form, Model, Theory};
use flagcalc::presets as p;
use flagcalc::rational::{one, ratio, Rational};
use proptest::prelude::*;
use proptest::sample::Index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(n: usize, mask: u64) -> Model {
    let g = p::graphs();
    let mut edges = Vec::new();
    let mut bit = 0;
    for a in 0..n {
        for b in a + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((a, b));
            }
            bit += 1;
        }
    }
    Model::graph(g.signature(), n, &edges).unwrap()
}

fn digraph(n: usize, mask: u64) -> Model {
    let d = p::digraphs();
    let mut m = d.empty_model(n);
    let mut bit = 0;
    for a in 0..n {
        for b in a + 1..n {
            m.set_color(&[a, b], mask >> bit & 3).unwrap();
            bit += 2;
        }
    }
    m
}

fn shuffle(n: usize, keys: &[Index]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, keys[i].index(i + 1));
    }
    perm
}

fn kernel(theory: &Arc<Theory>, q: usize, seed: u64) -> Arc<StepKernel> {
    Arc::new(random_kernel(theory, q, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap())
}

fn element(alg: &FlagAlgebra, sigma: &TypeSigma, level: usize, coeffs: &[i64]) -> AlgebraElement {
    let basis = alg.basis(sigma, level).unwrap();
    let terms: Vec<(Rational, AlgebraElement)> = basis
        .flags()
        .iter()
        .zip(coeffs.iter().cycle())
        .map(|(f, &c)| (ratio(c, 3), alg.from_flag(f).unwrap()))
        .collect();
    let refs: Vec<_> = terms.iter().map(|(c, a)| (c.clone(), a)).collect();
    alg.linear_combine(&refs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_idempotent(n in 1usize..=6, mask in any::<u64>(), k in 0usize..=2) {
        let k = k.min(n);
        let m = graph(n, mask);
        let c = canonical_form(&m, k).unwrap();
        let again = canonical_form(&c.model, k).unwrap();
        prop_assert_eq!(&again.encoding, &c.encoding);
        prop_assert!(again.model == c.model);
    }

    #[test]
    fn canonical_form_ignores_labels(n in 1usize..=6, mask in any::<u64>(), keys in prop::collection::vec(any::<Index>(), 6)) {
        let m = graph(n, mask);
        let perm = shuffle(n, &keys);
        prop_assert_eq!(canonical_form(&m, 0).unwrap().encoding, canonical_form(&m.relabel(&perm), 0).unwrap().encoding);
    }

    #[test]
    fn canonical_form_ignores_labels_of_digraphs(n in 1usize..=5, mask in any::<u64>(), keys in prop::collection::vec(any::<Index>(), 5)) {
        let m = digraph(n, mask);
        let perm = shuffle(n, &keys);
        prop_assert_eq!(canonical_form(&m, 0).unwrap().encoding, canonical_form(&m.relabel(&perm), 0).unwrap().encoding);
    }

    #[test]
    fn rooted_labels_are_respected(n in 2usize..=6, mask in any::<u64>(), keys in prop::collection::vec(any::<Index>(), 6)) {
        // Only non-root vertices may move.
        let m = graph(n, mask);
        let tail = shuffle(n - 1, &keys);
        let perm: Vec<usize> = std::iter::once(0).chain(tail.iter().map(|&v| v + 1)).collect();
        prop_assert_eq!(canonical_form(&m, 1).unwrap().encoding, canonical_form(&m.relabel(&perm), 1).unwrap().encoding);
    }

    #[test]
    fn densities_partition_unity(n in 2usize..=6, mask in any::<u64>(), m in 1usize..=4) {
        let g = p::graphs();
        let m = m.min(n);
        let host = Flag::new(&g, graph(n, mask), 0).unwrap();
        let total: Rational = enumerate_flags(&g, &TypeSigma::empty(&g), m)
            .unwrap()
            .flags()
            .iter()
            .map(|f| density_p(f, &host).unwrap())
            .sum();
        prop_assert_eq!(total, one());
    }

    #[test]
    fn evaluation_is_multiplicative(seed in any::<u64>(), q in 1usize..=3, a in prop::collection::vec(-3i64..=3, 4), b in prop::collection::vec(-3i64..=3, 4)) {
        let g = p::graphs();
        let alg = FlagAlgebra::new(g.clone());
        let sigma = p::vertex_type(&g);
        let x = element(&alg, &sigma, 2, &a);
        let y = element(&alg, &sigma, 3, &b);
        let k = kernel(&g, q, seed);
        for t in 0..q {
            let Ok(rk) = RootedKernel::new(k.clone(), vec![t], sigma.clone()) else { continue };
            let lhs = exact_hom(&rk, &alg.multiply(&x, &y).unwrap()).unwrap();
            prop_assert_eq!(lhs, exact_hom(&rk, &x).unwrap() * exact_hom(&rk, &y).unwrap());
        }
    }

    #[test]
    fn unrooting_composes(seed in any::<u64>(), coeffs in prop::collection::vec(-3i64..=3, 6)) {
        // Averaging over the edge type down to one root, then to none, is
        // the same as averaging straight down.
        let g = p::graphs();
        let alg = FlagAlgebra::new(g.clone());
        let a = element(&alg, &p::edge_type(&g), 3, &coeffs);
        let steps = alg.downward(&alg.downward(&a, 1).unwrap(), 0).unwrap();
        prop_assert!(alg.equal(&steps, &alg.downward(&a, 0).unwrap()).unwrap());
        let k = kernel(&g, 2, seed);
        let direct = alg.downward(&a, 0).unwrap();
        prop_assert_eq!(exact_hom(&RootedKernel::unrooted(k.clone()), &steps).unwrap(), exact_hom(&RootedKernel::unrooted(k), &direct).unwrap());
    }

    #[test]
    fn root_restriction_composes(seed in any::<u64>(), r0 in 0usize..2, r1 in 0usize..2) {
        let g = p::graphs();
        let k = kernel(&g, 2, seed);
        let Ok(rk) = RootedKernel::new(k, vec![r0, r1], p::edge_type(&g)) else { return Ok(()) };
        let once = restrict_root(&rk, 1).unwrap().into_rooted();
        let twice = restrict_root(&once, 0).unwrap().into_rooted();
        let direct = restrict_root(&rk, 0).unwrap().into_rooted();
        prop_assert_eq!(once.root_types(), &[r0][..]);
        prop_assert!(twice.is_unrooted() && direct.is_unrooted());
        prop_assert_eq!(once.sigma().size(), 1);
    }

    #[test]
    fn lifting_preserves_values(seed in any::<u64>(), coeffs in prop::collection::vec(-3i64..=3, 4), extra in 1usize..=2) {
        let g = p::graphs();
        let alg = FlagAlgebra::new(g.clone());
        let a = element(&alg, &TypeSigma::empty(&g), 3, &coeffs);
        let rk = RootedKernel::unrooted(kernel(&g, 3, seed));
        prop_assert_eq!(exact_hom(&rk, &alg.lift(&a, 3 + extra).unwrap()).unwrap(), exact_hom(&rk, &a).unwrap());
    }
}
