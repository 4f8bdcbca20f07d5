//! Search for induced copies of a small rooted pattern inside a host model.
//!
//! The pattern is compiled into a trie of its distinct relabelings (root
//! vertices stay fixed). Copies are explored by choosing host vertices in
//! increasing order and following the trie, so only prefixes that can still
//! complete to a copy are extended. When every predicate has arity at most
//! two the candidate sets for the next vertex are computed with bitsets.

use std::collections::{HashMap, HashSet};
use std::ops::ControlFlow;

use crate::error::{ensure_input, Result};

use super::canonical::raw_colors;
use super::model::{supports_ending_at, Model};
use super::signature::permutations;

#[derive(Debug, Default)]
struct Node {
    children: HashMap<Vec<u64>, usize>,
}

/// Compiled pattern: a model whose first `root` vertices are pinned to the
/// first `root` host vertices.
#[derive(Debug)]
pub struct Pattern {
    size: usize,
    root: usize,
    root_model: Model,
    nodes: Vec<Node>,
}

impl Pattern {
    pub fn new(model: &Model, root: usize) -> Result<Self> {
        ensure_input!(root <= model.n(), "root size {root} exceeds pattern size {}", model.n());
        super::canonical::check_size(model.n())?;
        let size = model.n();
        let free = size - root;
        let mut labeled = HashSet::new();
        for p in permutations(free) {
            let perm: Vec<usize> = (0..root).chain(p.iter().map(|&x| x + root)).collect();
            labeled.insert(raw_colors(&model.relabel(&perm)));
        }
        let chunk_bounds: Vec<usize> = (0..=size)
            .map(|v| {
                model
                    .signature()
                    .active_arities()
                    .map(|a| crate::rational::binomial(v, a) as usize)
                    .sum()
            })
            .collect();
        let mut nodes = vec![Node::default()];
        for colors in &labeled {
            let mut at = 0;
            for pos in root..size {
                let chunk = colors[chunk_bounds[pos]..chunk_bounds[pos + 1]].to_vec();
                let next = nodes.len();
                at = *nodes[at].children.entry(chunk).or_insert(next);
                if at == next {
                    nodes.push(Node::default());
                }
            }
        }
        Ok(Pattern { size, root, root_model: model.induced_sorted(&(0..root).collect::<Vec<_>>()), nodes })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn root(&self) -> usize {
        self.root
    }

    fn check_host(&self, host: &Model) -> Result<()> {
        host.check_same_signature(&self.root_model)?;
        ensure_input!(host.n() >= self.root, "host has fewer vertices than the root");
        let prefix: Vec<usize> = (0..self.root).collect();
        ensure_input!(
            host.induced_sorted(&prefix) == self.root_model,
            "host does not extend the root type on its first {} vertices",
            self.root
        );
        Ok(())
    }

    /// Number of vertex sets `S` outside the root with `host[root ∪ S]`
    /// isomorphic to the pattern (root fixed).
    pub fn count_in(&self, host: &Model) -> Result<u64> {
        self.check_host(host)?;
        if host.n() < self.size {
            return Ok(0);
        }
        if self.root == self.size {
            return Ok(1);
        }
        if let Some(bits) = HostBits::build(host) {
            let mut chosen: Vec<usize> = (0..self.root).collect();
            return Ok(self.count_bits(&bits, host, 0, &mut chosen));
        }
        let mut total = 0u64;
        let _ = self.walk_generic(host, &mut |_| {
            total += 1;
            ControlFlow::<()>::Continue(())
        });
        Ok(total)
    }

    /// Visit every copy; the slice holds the chosen non-root vertices.
    pub fn for_each_copy<B>(
        &self,
        host: &Model,
        mut visit: impl FnMut(&[usize]) -> ControlFlow<B>,
    ) -> Result<ControlFlow<B>> {
        self.check_host(host)?;
        if host.n() < self.size {
            return Ok(ControlFlow::Continue(()));
        }
        if self.root == self.size {
            return Ok(visit(&[]));
        }
        if let Some(bits) = HostBits::build(host) {
            let mut chosen: Vec<usize> = (0..self.root).collect();
            return Ok(self.walk_bits(&bits, host, 0, &mut chosen, &mut visit));
        }
        Ok(self.walk_generic(host, &mut visit))
    }

    pub fn occurs_in(&self, host: &Model) -> Result<bool> {
        Ok(self.for_each_copy(host, |_| ControlFlow::Break(()))?.is_break())
    }

    fn walk_generic<B>(&self, host: &Model, visit: &mut impl FnMut(&[usize]) -> ControlFlow<B>) -> ControlFlow<B> {
        let mut chosen: Vec<usize> = (0..self.root).collect();
        self.generic_rec(host, 0, &mut chosen, visit)
    }

    fn generic_rec<B>(
        &self,
        host: &Model,
        node: usize,
        chosen: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        let depth = chosen.len();
        if depth == self.size {
            return visit(&chosen[self.root..]);
        }
        let remaining = self.size - depth;
        let start = chosen.last().map_or(0, |&v| v + 1).max(self.root);
        let sig = host.signature().clone();
        let mut chunk = Vec::new();
        for w in start..=host.n() - remaining {
            chunk.clear();
            chosen.push(w);
            for arity in sig.active_arities() {
                for t in supports_ending_at(depth, arity) {
                    let support: Vec<usize> = t.iter().map(|&i| chosen[i]).collect();
                    chunk.push(host.color(&support));
                }
            }
            if let Some(&child) = self.nodes[node].children.get(&chunk) {
                self.generic_rec(host, child, chosen, visit)?;
            }
            chosen.pop();
        }
        ControlFlow::Continue(())
    }

    /// Candidate set for the child reached through `chunk` at the current
    /// depth.
    fn candidates(&self, bits: &HostBits, chunk: &[u64], chosen: &[usize], start: usize) -> Vec<u64> {
        let mut cand = bits.above(start);
        let mut it = chunk.iter();
        if bits.unary.is_some() {
            let c = *it.next().unwrap();
            and_into(&mut cand, bits.unary_set(c));
        }
        if bits.binary {
            for (&p, &c) in chosen.iter().zip(it) {
                and_into(&mut cand, bits.fwd_set(p, c));
            }
        }
        cand
    }

    fn count_bits(&self, bits: &HostBits, host: &Model, node: usize, chosen: &mut Vec<usize>) -> u64 {
        let depth = chosen.len();
        let start = chosen.last().map_or(0, |&v| v + 1).max(self.root);
        let mut total = 0;
        for (chunk, &child) in &self.nodes[node].children {
            let cand = self.candidates(bits, chunk, chosen, start);
            if depth + 1 == self.size {
                total += cand.iter().map(|w| w.count_ones() as u64).sum::<u64>();
                continue;
            }
            for w in iter_bits(&cand, host.n()) {
                chosen.push(w);
                total += self.count_bits(bits, host, child, chosen);
                chosen.pop();
            }
        }
        total
    }

    fn walk_bits<B>(
        &self,
        bits: &HostBits,
        host: &Model,
        node: usize,
        chosen: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        if chosen.len() == self.size {
            return visit(&chosen[self.root..]);
        }
        let start = chosen.last().map_or(0, |&v| v + 1).max(self.root);
        // children in a fixed order so visits are deterministic
        let mut kids: Vec<(&Vec<u64>, &usize)> = self.nodes[node].children.iter().collect();
        kids.sort();
        let mut found: Vec<(usize, usize)> = Vec::new();
        for (chunk, &child) in kids {
            let cand = self.candidates(bits, chunk, chosen, start);
            found.extend(iter_bits(&cand, host.n()).map(|w| (w, child)));
        }
        found.sort_unstable();
        for (w, child) in found {
            chosen.push(w);
            self.walk_bits(bits, host, child, chosen, visit)?;
            chosen.pop();
        }
        ControlFlow::Continue(())
    }
}

fn and_into(acc: &mut [u64], other: &[u64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a &= b;
    }
}

fn iter_bits(set: &[u64], n: usize) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(move |(i, &word)| {
        let mut w = word;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(i * 64 + b)
        })
        .filter(move |&v| v < n)
    })
}

/// Per-color vertex sets of a host whose predicates all have arity ≤ 2.
struct HostBits {
    words: usize,
    n: usize,
    unary: Option<Vec<Vec<u64>>>,
    binary: bool,
    colors2: usize,
    /// `fwd[v * colors2 + c]`: vertices `w > v` with color `c` on `{v, w}`.
    fwd: Vec<Vec<u64>>,
}

impl HostBits {
    fn build(host: &Model) -> Option<Self> {
        let sig = host.signature();
        if sig.active_arities().any(|a| a > 2) || sig.color_bits(1) > 12 || sig.color_bits(2) > 12 {
            return None;
        }
        let n = host.n();
        let words = n.div_ceil(64).max(1);
        let unary = (sig.color_bits(1) > 0).then(|| {
            let mut sets = vec![vec![0u64; words]; sig.color_count(1) as usize];
            for (v, &c) in host.colors(1).iter().enumerate() {
                sets[c as usize][v / 64] |= 1 << (v % 64);
            }
            sets
        });
        let binary = sig.color_bits(2) > 0;
        let colors2 = if binary { sig.color_count(2) as usize } else { 0 };
        let mut fwd = vec![vec![0u64; words]; n * colors2];
        if binary {
            let table = host.colors(2);
            for w in 0..n {
                let base = w * (w.saturating_sub(1)) / 2;
                for v in 0..w {
                    let c = table[base + v] as usize;
                    fwd[v * colors2 + c][w / 64] |= 1 << (w % 64);
                }
            }
        }
        Some(HostBits { words, n, unary, binary, colors2, fwd })
    }

    fn above(&self, start: usize) -> Vec<u64> {
        let mut s = vec![0u64; self.words];
        for v in start..self.n {
            s[v / 64] |= 1 << (v % 64);
        }
        s
    }

    fn unary_set(&self, c: u64) -> &[u64] {
        &self.unary.as_ref().unwrap()[c as usize]
    }

    fn fwd_set(&self, v: usize, c: u64) -> &[u64] {
        &self.fwd[v * self.colors2 + c as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{canonical_form, PredicateSpec, Signature};
    use std::sync::Arc;

    fn brute_count(pattern: &Model, root: usize, host: &Model) -> u64 {
        let target = canonical_form(pattern, root).unwrap().encoding;
        let free: Vec<usize> = (root..host.n()).collect();
        let k = pattern.n() - root;
        let mut count = 0;
        for mask in 0u32..(1 << free.len()) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let mut s: Vec<usize> = (0..root).collect();
            s.extend(free.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v));
            let sub = host.induced_sorted(&s);
            if canonical_form(&sub, root).unwrap().encoding == target {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn counts_match_brute_force_on_graphs() {
        let sig = Arc::new(Signature::new(2, vec![PredicateSpec::symmetric("E", 2)]).unwrap());
        let host = Model::graph(
            &sig,
            8,
            &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 0), (1, 5), (2, 6)],
        )
        .unwrap();
        let patterns = [
            (Model::graph(&sig, 3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), 0),
            (Model::graph(&sig, 3, &[(0, 1), (1, 2)]).unwrap(), 0),
            (Model::graph(&sig, 3, &[(0, 1), (0, 2)]).unwrap(), 1),
            (Model::graph(&sig, 4, &[(0, 1), (1, 2), (2, 3)]).unwrap(), 0),
            (Model::graph(&sig, 2, &[]).unwrap(), 0),
        ];
        for (p, root) in &patterns {
            let pat = Pattern::new(p, *root).unwrap();
            assert_eq!(pat.count_in(&host).unwrap(), brute_count(p, *root, &host), "{p:?}");
            let mut listed = 0;
            let _ = pat.for_each_copy(&host, |_| {
                listed += 1;
                ControlFlow::<()>::Continue(())
            });
            assert_eq!(listed, brute_count(p, *root, &host));
        }
    }

    #[test]
    fn counts_match_brute_force_on_three_uniform_hypergraphs() {
        let sig = Arc::new(Signature::new(3, vec![PredicateSpec::symmetric("H", 3)]).unwrap());
        let mut host = Model::empty(sig.clone(), 7);
        for t in [[0, 1, 2], [0, 1, 3], [1, 2, 3], [2, 4, 5], [3, 5, 6], [0, 5, 6], [1, 4, 6]] {
            host.set_color(&t, 1).unwrap();
        }
        let mut p = Model::empty(sig, 4);
        p.set_color(&[0, 1, 2], 1).unwrap();
        p.set_color(&[0, 1, 3], 1).unwrap();
        let pat = Pattern::new(&p, 0).unwrap();
        assert_eq!(pat.count_in(&host).unwrap(), brute_count(&p, 0, &host));
        let pat1 = Pattern::new(&p, 1).unwrap();
        // vertex 0 of the host has the same (empty) root type
        assert_eq!(pat1.count_in(&host).unwrap(), brute_count(&p, 1, &host));
    }

    #[test]
    fn host_must_extend_root() {
        let sig = Arc::new(Signature::new(2, vec![PredicateSpec::symmetric("E", 2)]).unwrap());
        let rooted_edge = Model::graph(&sig, 3, &[(0, 1)]).unwrap();
        let pat = Pattern::new(&rooted_edge, 2).unwrap();
        let host = Model::graph(&sig, 4, &[(1, 2)]).unwrap();
        assert!(pat.count_in(&host).is_err());
    }
}
