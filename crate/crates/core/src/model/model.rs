use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_input, Error, Result};
use crate::rational::binomial;

use super::signature::Signature;

/// A finite relational structure on vertices `0..n`.
///
/// Colors are stored per arity on increasing vertex tuples in colex order,
/// so the supports whose largest vertex is `v` form one contiguous block
/// that follows all supports inside `0..v`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Model {
    sig: Arc<Signature>,
    n: usize,
    colors: Vec<Vec<u64>>,
}

impl std::hash::Hash for Signature {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.arity_bound().hash(state);
        self.predicates().hash(state);
    }
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Model");
        d.field("n", &self.n);
        for arity in self.sig.active_arities() {
            let entries: Vec<String> = supports(self.n, arity)
                .zip(&self.colors[arity - 1])
                .filter(|(_, &c)| c != 0)
                .map(|(s, c)| format!("{s:?}:{c:b}"))
                .collect();
            d.field(&format!("arity{arity}"), &entries);
        }
        d.finish()
    }
}

/// Colex rank of an increasing tuple.
pub fn colex_rank(support: &[usize]) -> usize {
    support
        .iter()
        .enumerate()
        .map(|(j, &v)| binomial(v, j + 1) as usize)
        .sum()
}

/// All increasing `arity`-tuples of `0..n`, in colex order.
pub fn supports(n: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Vec<usize> = (0..arity).collect();
    let mut done = arity > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = cur.clone();
        // colex successor: bump the first entry that can move up
        let mut j = 0;
        loop {
            if j == arity {
                done = true;
                break;
            }
            let limit = if j + 1 < arity { cur[j + 1] } else { n };
            if cur[j] + 1 < limit {
                cur[j] += 1;
                for (i, slot) in cur.iter_mut().enumerate().take(j) {
                    *slot = i;
                }
                break;
            }
            j += 1;
        }
        Some(out)
    })
}

/// Increasing `(arity - 1)`-subsets of `prefix` extended by `v`, in colex
/// order: exactly the supports whose largest vertex is `v` when `prefix`
/// is `0..v`.
pub(crate) fn supports_ending_at(v: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    supports(v, arity - 1).map(move |mut s| {
        s.push(v);
        s
    })
}

impl Model {
    /// A model with every color zero.
    pub fn empty(sig: Arc<Signature>, n: usize) -> Self {
        let colors = (1..=sig.arity_bound())
            .map(|a| {
                if sig.color_bits(a) > 0 {
                    vec![0; binomial(n, a) as usize]
                } else {
                    Vec::new()
                }
            })
            .collect();
        Model { sig, n, colors }
    }

    pub(crate) fn from_parts(sig: Arc<Signature>, n: usize, colors: Vec<Vec<u64>>) -> Result<Self> {
        ensure_input!(colors.len() == sig.arity_bound(), "color table has wrong arity count");
        for arity in 1..=sig.arity_bound() {
            let want = if sig.color_bits(arity) > 0 { binomial(n, arity) as usize } else { 0 };
            ensure_input!(
                colors[arity - 1].len() == want,
                "arity {arity} needs {want} colors, got {}",
                colors[arity - 1].len()
            );
            for &c in &colors[arity - 1] {
                sig.check_color(arity, c)?;
            }
        }
        Ok(Model { sig, n, colors })
    }

    /// Simple graph on `n` vertices from a 0-based edge list; the signature
    /// must have a single symmetric binary predicate.
    pub fn graph(sig: &Arc<Signature>, n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut m = Model::empty(sig.clone(), n);
        for &(u, v) in edges {
            ensure_input!(u != v && u < n && v < n, "bad edge ({u},{v})");
            m.set_color(&[u.min(v), u.max(v)], 1)?;
        }
        Ok(m)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn colors(&self, arity: usize) -> &[u64] {
        &self.colors[arity - 1]
    }

    /// Color of an increasing support.
    pub fn color(&self, support: &[usize]) -> u64 {
        let arity = support.len();
        if self.sig.color_bits(arity) == 0 {
            return 0;
        }
        self.colors[arity - 1][colex_rank(support)]
    }

    pub fn set_color(&mut self, support: &[usize], color: u64) -> Result<()> {
        let arity = support.len();
        ensure_input!(arity >= 1 && arity <= self.sig.arity_bound(), "support arity {arity} out of range");
        ensure_input!(
            support.windows(2).all(|w| w[0] < w[1]) && support.iter().all(|&v| v < self.n),
            "support {support:?} is not an increasing tuple of vertices"
        );
        self.sig.check_color(arity, color)?;
        if self.sig.color_bits(arity) == 0 {
            return Ok(());
        }
        self.colors[arity - 1][colex_rank(support)] = color;
        Ok(())
    }

    /// Truth value of a predicate on an arbitrary vertex tuple.
    pub fn holds(&self, pred: usize, tuple: &[usize]) -> bool {
        let spec = &self.sig.predicates()[pred];
        assert_eq!(tuple.len(), spec.arity);
        let mut sorted = tuple.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return spec.diagonal == super::Diagonal::ConstantTrue;
        }
        let (offset, width) = self.sig.predicate_slot(pred);
        let color = self.color(&sorted);
        let bit = if width == 1 {
            0
        } else {
            let tau: Vec<usize> = tuple
                .iter()
                .map(|v| sorted.iter().position(|s| s == v).unwrap())
                .collect();
            self.sig.perm_index(spec.arity, &tau).unwrap()
        };
        color >> (offset + bit as u32) & 1 == 1
    }

    /// The submodel induced on `subset` (0-based), renumbered in increasing
    /// order.
    pub fn induced_submodel(&self, subset: &[usize]) -> Result<Model> {
        ensure_input!(!subset.is_empty(), "induced submodel of an empty vertex set");
        let mut s = subset.to_vec();
        s.sort_unstable();
        ensure_input!(s.windows(2).all(|w| w[0] < w[1]), "repeated vertex in {subset:?}");
        ensure_input!(s.iter().all(|&v| v < self.n), "vertex out of range in {subset:?}");
        Ok(self.induced_sorted(&s))
    }

    /// Induced submodel on an increasing vertex list, without validation.
    /// The empty list yields the empty model.
    pub(crate) fn induced_sorted(&self, s: &[usize]) -> Model {
        let k = s.len();
        let mut colors = Vec::with_capacity(self.sig.arity_bound());
        for arity in 1..=self.sig.arity_bound() {
            if self.sig.color_bits(arity) == 0 {
                colors.push(Vec::new());
                continue;
            }
            let mut buf = vec![0usize; arity];
            let v: Vec<u64> = supports(k, arity)
                .map(|t| {
                    for (b, &i) in buf.iter_mut().zip(&t) {
                        *b = s[i];
                    }
                    self.colors[arity - 1][colex_rank(&buf)]
                })
                .collect();
            colors.push(v);
        }
        Model { sig: self.sig.clone(), n: k, colors }
    }

    /// Relabel: new vertex `j` is old vertex `perm[j]`.
    pub fn relabel(&self, perm: &[usize]) -> Model {
        debug_assert_eq!(perm.len(), self.n);
        let mut colors = Vec::with_capacity(self.sig.arity_bound());
        for arity in 1..=self.sig.arity_bound() {
            if self.sig.color_bits(arity) == 0 {
                colors.push(Vec::new());
                continue;
            }
            let v: Vec<u64> = supports(self.n, arity)
                .map(|t| self.mapped_color(arity, &t, perm))
                .collect();
            colors.push(v);
        }
        Model { sig: self.sig.clone(), n: self.n, colors }
    }

    /// Color that the new support `t` gets when new vertex `j` is old vertex
    /// `map[j]` (`t` increasing in new labels).
    pub(crate) fn mapped_color(&self, arity: usize, t: &[usize], map: &[usize]) -> u64 {
        let old: Vec<usize> = t.iter().map(|&j| map[j]).collect();
        if arity == 1 {
            return self.colors[0][old[0]];
        }
        let mut sorted = old.clone();
        sorted.sort_unstable();
        let c = self.colors[arity - 1][colex_rank(&sorted)];
        if !self.sig.is_directed(arity) || sorted == old {
            return c;
        }
        // old sorted position -> new position
        let tau: Vec<usize> = sorted
            .iter()
            .map(|v| old.iter().position(|o| o == v).unwrap())
            .collect();
        self.sig.permute_color(arity, c, &tau)
    }

    /// Append one vertex whose supports take the given colors, listed per
    /// active arity in colex order of the new supports.
    pub(crate) fn extend(&self, new_colors: &[Vec<u64>]) -> Model {
        let mut colors = self.colors.clone();
        for (arity, extra) in (1..=self.sig.arity_bound()).zip(new_colors) {
            colors[arity - 1].extend_from_slice(extra);
        }
        Model { sig: self.sig.clone(), n: self.n + 1, colors }
    }

    pub fn same_signature(&self, other: &Model) -> bool {
        Arc::ptr_eq(&self.sig, &other.sig) || *self.sig == *other.sig
    }

    pub(crate) fn check_same_signature(&self, other: &Model) -> Result<()> {
        if self.same_signature(other) {
            Ok(())
        } else {
            Err(Error::input("models belong to different theories"))
        }
    }
}
