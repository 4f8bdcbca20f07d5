//! Canonical labeling by exhaustive branch-and-bound over prefix-fixing
//! permutations.
//!
//! The encoding of a labeled model lists, for each vertex `v` in order and
//! each active arity, the colors of the supports whose largest vertex is
//! `v`. The canonical form is the relabeling with the lexicographically
//! smallest encoding. Branches whose encoding prefix already exceeds the best
//! found so far are cut, and at every level only one vertex per twin class
//! (vertices whose transposition is an automorphism) is tried.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use crate::error::{ensure_input, Error, Result};
use crate::rational::binomial;

use super::model::{supports_ending_at, Model};

static SIZE_LIMIT: AtomicUsize = AtomicUsize::new(DEFAULT_SIZE_LIMIT);

pub const DEFAULT_SIZE_LIMIT: usize = 10;

/// Largest vertex count accepted by canonical labeling and enumeration.
pub fn size_limit() -> usize {
    SIZE_LIMIT.load(AtomicOrdering::Relaxed)
}

/// Adjust the size cap (the `--max-size` switch of the CLI).
pub fn set_size_limit(n: usize) {
    SIZE_LIMIT.store(n, AtomicOrdering::Relaxed);
}

pub(crate) fn check_size(n: usize) -> Result<()> {
    let limit = size_limit();
    if n > limit {
        return Err(Error::Resource(format!("model size {n} exceeds the configured limit {limit}")));
    }
    Ok(())
}

/// Total-order key; equal keys mean isomorphic models.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Encoding(pub(crate) Vec<u8>);

impl Encoding {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalModel {
    pub model: Model,
    pub encoding: Encoding,
    /// Canonical vertex `j` is vertex `witness[j]` of the input.
    pub witness: Vec<usize>,
}

fn chunk_start(model: &Model, v: usize) -> usize {
    model
        .signature()
        .active_arities()
        .map(|a| binomial(v, a) as usize)
        .sum()
}

/// Colors of the supports ending at `placed.len() - 1`, new labels mapped to
/// old vertices through `placed`.
fn push_chunk(model: &Model, placed: &[usize], out: &mut Vec<u64>) {
    let v = placed.len() - 1;
    for arity in model.signature().active_arities() {
        for t in supports_ending_at(v, arity) {
            out.push(model.mapped_color(arity, &t, placed));
        }
    }
}

/// Encoding of the model as labeled (no search).
pub(crate) fn raw_colors(model: &Model) -> Vec<u64> {
    let ident: Vec<usize> = (0..model.n()).collect();
    let mut out = Vec::new();
    for v in 0..model.n() {
        push_chunk(model, &ident[..=v], &mut out);
    }
    out
}

fn to_bytes(model: &Model, prefix: usize, colors: &[u64]) -> Encoding {
    let sig = model.signature();
    let widths: Vec<(usize, usize)> = sig
        .active_arities()
        .map(|a| (a, sig.color_bits(a).div_ceil(8) as usize))
        .collect();
    let mut bytes = vec![model.n() as u8, prefix as u8];
    let mut it = colors.iter();
    for v in 0..model.n() {
        for &(arity, width) in &widths {
            for _ in 0..binomial(v, arity - 1) {
                let c = it.next().expect("color list matches layout");
                bytes.extend_from_slice(&c.to_be_bytes()[8 - width..]);
            }
        }
    }
    Encoding(bytes)
}

/// Encoding of the model under its current labeling.
pub fn labeled_encoding(model: &Model, prefix: usize) -> Encoding {
    to_bytes(model, prefix, &raw_colors(model))
}

fn swap_is_automorphism(model: &Model, u: usize, w: usize) -> bool {
    let mut perm: Vec<usize> = (0..model.n()).collect();
    perm.swap(u, w);
    model.relabel(&perm) == *model
}

/// Twin class id per vertex; prefix vertices get their own classes.
fn twin_classes(model: &Model, prefix: usize) -> Vec<usize> {
    let n = model.n();
    let mut class: Vec<usize> = (0..n).collect();
    for u in prefix..n {
        if class[u] != u {
            continue;
        }
        for w in u + 1..n {
            if class[w] == w && swap_is_automorphism(model, u, w) {
                class[w] = u;
            }
        }
    }
    class
}

struct Search<'a> {
    model: &'a Model,
    prefix: usize,
    twins: Vec<usize>,
    starts: Vec<usize>,
    placed: Vec<usize>,
    used: Vec<bool>,
    cur: Vec<u64>,
    best: Option<(Vec<u64>, Vec<usize>)>,
}

impl Search<'_> {
    fn candidates(&self, depth: usize) -> Vec<usize> {
        if depth < self.prefix {
            return vec![depth];
        }
        let n = self.model.n();
        let mut seen_class = vec![false; n];
        let mut out = Vec::new();
        for u in self.prefix..n {
            if self.used[u] || seen_class[self.twins[u]] {
                continue;
            }
            seen_class[self.twins[u]] = true;
            out.push(u);
        }
        out
    }

    fn run(&mut self, depth: usize) {
        let n = self.model.n();
        if depth == n {
            let better = match &self.best {
                None => true,
                Some((b, _)) => self.cur < *b,
            };
            if better {
                self.best = Some((self.cur.clone(), self.placed.clone()));
            }
            return;
        }
        for u in self.candidates(depth) {
            self.placed.push(u);
            self.used[u] = true;
            self.cur.truncate(self.starts[depth]);
            push_chunk(self.model, &self.placed, &mut self.cur);
            let end = self.starts[depth + 1];
            let prune = match &self.best {
                Some((b, _)) => self.cur[..end].cmp(&b[..end]) == Ordering::Greater,
                None => false,
            };
            if !prune {
                self.run(depth + 1);
            }
            self.used[u] = false;
            self.placed.pop();
        }
    }
}

/// Lexicographically least relabeling among permutations fixing
/// `0..prefix` pointwise.
pub fn canonical_form(model: &Model, prefix: usize) -> Result<CanonicalModel> {
    ensure_input!(prefix <= model.n(), "prefix {prefix} longer than the model ({})", model.n());
    check_size(model.n())?;
    let n = model.n();
    let mut search = Search {
        model,
        prefix,
        twins: twin_classes(model, prefix),
        starts: (0..=n).map(|v| chunk_start(model, v)).collect(),
        placed: Vec::with_capacity(n),
        used: vec![false; n],
        cur: Vec::new(),
        best: None,
    };
    search.run(0);
    let (colors, witness) = search.best.expect("at least one labeling exists");
    let canon = model.relabel(&witness);
    Ok(CanonicalModel { encoding: to_bytes(model, prefix, &colors), model: canon, witness })
}

/// Whether a color-preserving bijection fixing `0..prefix` exists.
pub fn isomorphic(a: &Model, b: &Model, prefix: usize) -> Result<bool> {
    a.check_same_signature(b)?;
    if a.n() != b.n() {
        return Ok(false);
    }
    Ok(canonical_form(a, prefix)?.encoding == canonical_form(b, prefix)?.encoding)
}

/// Number of automorphisms fixing `0..prefix` pointwise.
pub fn automorphism_count(model: &Model, prefix: usize) -> Result<u64> {
    ensure_input!(prefix <= model.n(), "prefix {prefix} longer than the model");
    check_size(model.n())?;
    let target = raw_colors(model);
    let n = model.n();
    let starts: Vec<usize> = (0..=n).map(|v| chunk_start(model, v)).collect();
    fn rec(
        model: &Model,
        prefix: usize,
        target: &[u64],
        starts: &[usize],
        placed: &mut Vec<usize>,
        used: &mut [bool],
        cur: &mut Vec<u64>,
    ) -> u64 {
        let depth = placed.len();
        if depth == model.n() {
            return 1;
        }
        let cands: Vec<usize> = if depth < prefix {
            vec![depth]
        } else {
            (prefix..model.n()).filter(|&u| !used[u]).collect()
        };
        let mut total = 0;
        for u in cands {
            placed.push(u);
            used[u] = true;
            cur.truncate(starts[depth]);
            push_chunk(model, placed, cur);
            if cur[starts[depth]..] == target[starts[depth]..starts[depth + 1]] {
                total += rec(model, prefix, target, starts, placed, used, cur);
            }
            used[u] = false;
            placed.pop();
        }
        total
    }
    Ok(rec(model, prefix, &target, &starts, &mut Vec::new(), &mut vec![false; n], &mut Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PredicateSpec, Signature};
    use std::sync::Arc;

    fn graphs() -> Arc<Signature> {
        Arc::new(Signature::new(2, vec![PredicateSpec::symmetric("E", 2)]).unwrap())
    }

    #[test]
    fn relabeled_squares_share_an_encoding() {
        let sig = graphs();
        let a = Model::graph(&sig, 4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let b = Model::graph(&sig, 4, &[(0, 2), (2, 1), (1, 3), (3, 0)]).unwrap();
        assert_eq!(canonical_form(&a, 0).unwrap().encoding, canonical_form(&b, 0).unwrap().encoding);
    }

    #[test]
    fn path_and_edge_plus_isolated_differ() {
        let sig = graphs();
        let p3 = Model::graph(&sig, 3, &[(0, 1), (1, 2)]).unwrap();
        let e1 = Model::graph(&sig, 3, &[(0, 1)]).unwrap();
        assert!(!isomorphic(&p3, &e1, 0).unwrap());
        let k3 = Model::graph(&sig, 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(!isomorphic(&p3, &k3, 0).unwrap());
        assert!(isomorphic(&k3, &k3.relabel(&[2, 0, 1]), 0).unwrap());
    }

    #[test]
    fn root_fixing_separates_rooted_flags() {
        let sig = graphs();
        let edge = Model::graph(&sig, 2, &[(0, 1)]).unwrap();
        let non = Model::graph(&sig, 2, &[]).unwrap();
        assert_ne!(canonical_form(&edge, 1).unwrap().encoding, canonical_form(&non, 1).unwrap().encoding);
        // cherry rooted at the center versus at an end
        let center = Model::graph(&sig, 3, &[(0, 1), (0, 2)]).unwrap();
        let end = Model::graph(&sig, 3, &[(0, 1), (1, 2)]).unwrap();
        assert!(isomorphic(&center, &end, 0).unwrap());
        assert!(!isomorphic(&center, &end, 1).unwrap());
    }

    #[test]
    fn automorphisms_of_small_graphs() {
        let sig = graphs();
        let c4 = Model::graph(&sig, 4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(automorphism_count(&c4, 0).unwrap(), 8);
        assert_eq!(automorphism_count(&c4, 1).unwrap(), 2);
        let empty = Model::empty(sig, 5);
        assert_eq!(automorphism_count(&empty, 0).unwrap(), 120);
    }

    #[test]
    fn size_cap_is_enforced() {
        let sig = graphs();
        let big = Model::empty(sig, DEFAULT_SIZE_LIMIT + 1);
        assert!(matches!(canonical_form(&big, 0), Err(Error::Resource(_))));
    }

    #[test]
    fn empty_graph_on_ten_vertices_is_fast() {
        let sig = graphs();
        let m = Model::empty(sig, 10);
        let c = canonical_form(&m, 0).unwrap();
        assert_eq!(c.model, m);
    }
}
