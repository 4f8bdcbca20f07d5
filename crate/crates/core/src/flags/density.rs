use std::collections::HashMap;

use crate::error::{ensure_input, Result};
use crate::model::{canonical_form, permutations, supports, Encoding};
use crate::rational::{binomial, falling, Rational};

use super::basis::Flag;

fn check_same_type(a: &Flag, b: &Flag) -> Result<()> {
    a.model().check_same_signature(b.model())?;
    ensure_input!(
        a.root_size() == b.root_size() && a.root_model() == b.root_model(),
        "flags are over different types"
    );
    Ok(())
}

/// Canonical keys of all subflags of `host` with `extra` non-root vertices,
/// keyed by the chosen vertex set.
pub(crate) fn subflag_keys(host: &Flag, extra: usize) -> Result<Vec<(Vec<usize>, Encoding)>> {
    let k = host.root_size();
    supports(host.size() - k, extra)
        .map(|s| {
            let s: Vec<usize> = s.into_iter().map(|v| v + k).collect();
            let key = host.subflag(&s).key()?;
            Ok((s, key))
        })
        .collect()
}

/// Probability that a uniform random set of `|small| - k` non-root vertices
/// of `big`, together with the root, induces a copy of `small`.
pub fn density_p(small: &Flag, big: &Flag) -> Result<Rational> {
    check_same_type(small, big)?;
    ensure_input!(
        small.size() <= big.size(),
        "density of a {}-vertex flag in a smaller {}-vertex flag",
        small.size(),
        big.size()
    );
    let k = big.root_size();
    let target = small.key()?;
    let hits = subflag_keys(big, small.size() - k)?.into_iter().filter(|(_, key)| *key == target).count();
    Ok(Rational::new(hits.into(), binomial(big.size() - k, small.size() - k).into()))
}

/// Probability that disjoint random sets `S1` (then `S2` from the rest) of
/// non-root vertices of `big` induce copies of `f1` and `f2`.
pub fn joint_density_p2(f1: &Flag, f2: &Flag, big: &Flag) -> Result<Rational> {
    check_same_type(f1, big)?;
    check_same_type(f2, big)?;
    let k = big.root_size();
    let (a, b) = (f1.size() - k, f2.size() - k);
    ensure_input!(
        big.size() >= k + a + b,
        "host flag has {} vertices, needs at least {}",
        big.size(),
        k + a + b
    );
    let (t1, t2) = (f1.key()?, f2.key()?);
    let first: Vec<Vec<usize>> =
        subflag_keys(big, a)?.into_iter().filter(|(_, key)| *key == t1).map(|(s, _)| s).collect();
    let second: Vec<Vec<usize>> =
        subflag_keys(big, b)?.into_iter().filter(|(_, key)| *key == t2).map(|(s, _)| s).collect();
    let hits = first
        .iter()
        .flat_map(|s1| second.iter().filter(move |s2| s2.iter().all(|v| !s1.contains(v))))
        .count();
    let free = big.size() - k;
    let denom = binomial(free, a) * binomial(free - a, b);
    Ok(Rational::new(hits.into(), denom.into()))
}

/// Fraction of injective placements of type vertices `k'..k` into the
/// non-`0..k'` vertices of the flag that re-root it to an isomorphic flag.
pub fn q_normalizer(flag: &Flag, target_root: usize) -> Result<Rational> {
    let k = flag.root_size();
    ensure_input!(target_root <= k, "target root {target_root} exceeds the type size {k}");
    let m = flag.size();
    let key = flag.key()?;
    let placed = k - target_root;
    let mut good: u64 = 0;
    for chosen in supports(m - target_root, placed) {
        let chosen: Vec<usize> = chosen.into_iter().map(|v| v + target_root).collect();
        for order in permutations(placed) {
            let mut perm: Vec<usize> = (0..target_root).collect();
            perm.extend(order.iter().map(|&i| chosen[i]));
            perm.extend((target_root..m).filter(|v| !chosen.contains(v)));
            let moved = Flag::from_parts(flag.model().relabel(&perm), k);
            if canonical_form(moved.model(), k)?.encoding == key {
                good += 1;
            }
        }
    }
    Ok(Rational::new(good.into(), falling(m - target_root, placed).into()))
}

/// Sparse `p(F̃, F)` row: for each basis flag of the smaller level (by
/// key), the number of good subsets; divide by the binomial for the value.
pub(crate) fn density_counts(big: &Flag, extra: usize) -> Result<HashMap<Encoding, u64>> {
    let mut counts = HashMap::new();
    for (_, key) in subflag_keys(big, extra)? {
        *counts.entry(key).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Ordered pairs of disjoint subsets grouped by their pair of keys.
pub(crate) fn joint_counts(big: &Flag, a: usize, b: usize) -> Result<HashMap<(Encoding, Encoding), u64>> {
    let first = subflag_keys(big, a)?;
    let second = if a == b { first.clone() } else { subflag_keys(big, b)? };
    let mut counts = HashMap::new();
    for (s1, k1) in &first {
        for (s2, k2) in &second {
            if s2.iter().all(|v| !s1.contains(v)) {
                *counts.entry((k1.clone(), k2.clone())).or_insert(0) += 1;
            }
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{self as p};
    use crate::rational::ratio;

    #[test]
    fn single_densities() {
        let g = p::graphs();
        assert_eq!(density_p(&p::edge(&g), &p::k3(&g)).unwrap(), ratio(1, 1));
        assert_eq!(density_p(&p::edge(&g), &p::p3(&g)).unwrap(), ratio(2, 3));
        assert_eq!(density_p(&p::rooted_edge(&g), &p::cherry_at_center(&g)).unwrap(), ratio(1, 1));
        assert_eq!(density_p(&p::k3(&g), &p::k3(&g)).unwrap(), ratio(1, 1));
        assert!(density_p(&p::k3(&g), &p::edge(&g)).is_err());
        assert!(density_p(&p::rooted_edge(&g), &p::k3(&g)).is_err());
    }

    #[test]
    fn joint_densities() {
        let g = p::graphs();
        let e = p::edge(&g);
        assert_eq!(joint_density_p2(&e, &e, &p::k4(&g)).unwrap(), ratio(1, 1));
        assert_eq!(joint_density_p2(&e, &e, &p::c4(&g)).unwrap(), ratio(2, 3));
        let e1 = p::rooted_edge(&g);
        assert_eq!(joint_density_p2(&e1, &e1, &p::rooted_k3(&g)).unwrap(), ratio(1, 1));
        assert!(joint_density_p2(&e, &e, &p::k3(&g)).is_err());
    }

    #[test]
    fn normalizers() {
        let g = p::graphs();
        assert_eq!(q_normalizer(&p::rooted_edge(&g), 0).unwrap(), ratio(1, 1));
        assert_eq!(q_normalizer(&p::cherry_at_center(&g), 0).unwrap(), ratio(1, 3));
        assert_eq!(q_normalizer(&p::rooted_k3(&g), 0).unwrap(), ratio(1, 1));
        assert_eq!(q_normalizer(&p::cherry_at_center(&g), 1).unwrap(), ratio(1, 1));
        assert!(q_normalizer(&p::rooted_edge(&g), 2).is_err());
    }
}
