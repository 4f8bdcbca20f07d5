use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{ensure_input, Error, Result};
use crate::par::Exec;
use crate::rational::binomial;

use super::canonical::{canonical_form, check_size, CanonicalModel, Encoding};
use super::model::Model;
use super::pattern::Pattern;
use super::signature::{PredicateSpec, Signature};

/// A universal theory: a signature plus forbidden induced submodels.
#[derive(Debug)]
pub struct Theory {
    name: String,
    sig: Arc<Signature>,
    forbidden: Vec<Model>,
    forbidden_keys: Vec<Encoding>,
    patterns: Vec<Pattern>,
}

impl PartialEq for Theory {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && *self.sig == *other.sig && self.forbidden_keys == other.forbidden_keys
    }
}

impl Theory {
    pub fn new(name: &str, sig: Arc<Signature>, forbidden: Vec<Model>) -> Result<Self> {
        ensure_input!(!name.is_empty(), "theory name must not be empty");
        let mut keys = Vec::with_capacity(forbidden.len());
        let mut patterns = Vec::with_capacity(forbidden.len());
        for f in &forbidden {
            ensure_input!(
                Arc::ptr_eq(f.signature(), &sig) || *f.signature() == sig,
                "forbidden model uses a different signature"
            );
            ensure_input!(f.n() >= 1, "forbidden models must have at least one vertex");
            keys.push(canonical_form(f, 0)?.encoding);
            patterns.push(Pattern::new(f, 0)?);
        }
        Ok(Theory { name: name.to_string(), sig, forbidden, forbidden_keys: keys, patterns })
    }

    /// Free theory over the given predicates.
    pub fn free(name: &str, arity_bound: usize, predicates: Vec<PredicateSpec>) -> Result<Self> {
        Theory::new(name, Arc::new(Signature::new(arity_bound, predicates)?), Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn forbidden(&self) -> &[Model] {
        &self.forbidden
    }

    pub fn empty_model(&self, n: usize) -> Model {
        Model::empty(self.sig.clone(), n)
    }

    /// True iff no vertex subset induces a forbidden model.
    pub fn satisfies(&self, model: &Model) -> Result<bool> {
        for p in &self.patterns {
            if p.occurs_in(model)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Like [`Theory::satisfies`] but only looks at vertex sets containing
    /// the last vertex, assuming the rest already satisfies the theory.
    pub(crate) fn satisfies_with_last(&self, model: &Model) -> bool {
        let n = model.n();
        for (f, key) in self.forbidden.iter().zip(&self.forbidden_keys) {
            let size = f.n();
            if size > n {
                continue;
            }
            for mut s in super::model::supports(n - 1, size - 1) {
                s.push(n - 1);
                let sub = model.induced_sorted(&s);
                if canonical_form(&sub, 0).map(|c| c.encoding == *key).unwrap_or(false) {
                    return false;
                }
            }
        }
        true
    }

    pub(crate) fn check_model(&self, model: &Model) -> Result<()> {
        ensure_input!(
            Arc::ptr_eq(model.signature(), &self.sig) || *model.signature() == self.sig,
            "model does not belong to theory {}",
            self.name
        );
        Ok(())
    }
}

const MAX_EXTENSIONS: u64 = 1 << 22;

/// All one-vertex extensions of `base` that satisfy the theory, as
/// canonical forms fixing `prefix`, keyed by encoding.
pub(crate) fn extend_by_one(
    theory: &Theory,
    bases: &[Model],
    prefix: usize,
    exec: Exec,
) -> Result<BTreeMap<Encoding, CanonicalModel>> {
    let sig = theory.signature();
    let mut out = BTreeMap::new();
    let Some(first) = bases.first() else {
        return Ok(out);
    };
    let n = first.n();
    check_size(n + 1)?;
    // (arity, number of new supports, colors per support)
    let slots: Vec<(usize, usize, u64)> = (1..=sig.arity_bound())
        .map(|a| {
            let count = if sig.color_bits(a) > 0 { binomial(n, a - 1) as usize } else { 0 };
            (a, count, sig.color_count(a))
        })
        .collect();
    let mut combos: u64 = 1;
    for &(_, count, colors) in &slots {
        for _ in 0..count {
            combos = combos.saturating_mul(colors);
        }
    }
    if combos > MAX_EXTENSIONS {
        return Err(Error::Resource(format!(
            "{combos} one-vertex extensions at size {} exceed the enumeration budget",
            n + 1
        )));
    }
    let per_base = exec.map(bases, |base| -> Result<Vec<CanonicalModel>> {
        let mut found = Vec::new();
        for code in 0..combos {
            let mut rest = code;
            let new_colors: Vec<Vec<u64>> = slots
                .iter()
                .map(|&(_, count, colors)| {
                    (0..count)
                        .map(|_| {
                            let c = rest % colors;
                            rest /= colors;
                            c
                        })
                        .collect()
                })
                .collect();
            let ext = base.extend(&new_colors);
            if theory.satisfies_with_last(&ext) {
                found.push(canonical_form(&ext, prefix)?);
            }
        }
        Ok(found)
    });
    for batch in per_base {
        for c in batch? {
            out.entry(c.encoding.clone()).or_insert(c);
        }
    }
    Ok(out)
}

/// One canonical representative per isomorphism class of `n`-vertex models
/// of the theory, sorted by encoding.
pub fn enumerate_models(theory: &Theory, n: usize) -> Result<Vec<CanonicalModel>> {
    enumerate_models_with(theory, n, Exec::default())
}

pub fn enumerate_models_with(theory: &Theory, n: usize, exec: Exec) -> Result<Vec<CanonicalModel>> {
    check_size(n)?;
    let empty = theory.empty_model(0);
    let mut level = vec![canonical_form(&empty, 0)?];
    for _ in 0..n {
        let bases: Vec<Model> = level.into_iter().map(|c| c.model).collect();
        level = extend_by_one(theory, &bases, 0, exec)?.into_values().collect();
    }
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn counts_of_small_graphs() {
        let g = presets::graphs();
        let counts: Vec<usize> = (0..=5).map(|n| enumerate_models(&g, n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 11, 34]);
        let tf = presets::triangle_free();
        assert_eq!(enumerate_models(&tf, 3).unwrap().len(), 3);
        assert_eq!(enumerate_models(&tf, 4).unwrap().len(), 7);
    }

    #[test]
    fn other_theories() {
        // oriented-or-not digraphs: 3 classes on 2 vertices (none, one arc, both arcs)
        assert_eq!(enumerate_models(&presets::digraphs(), 2).unwrap().len(), 3);
        assert_eq!(enumerate_models(&presets::digraphs(), 3).unwrap().len(), 16);
        assert_eq!(enumerate_models(&presets::hypergraphs3(), 4).unwrap().len(), 5);
    }

    #[test]
    fn enumeration_is_sorted_and_deterministic() {
        let g = presets::graphs();
        let a = enumerate_models_with(&g, 4, Exec::Sequential).unwrap();
        let b = enumerate_models_with(&g, 4, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].encoding < w[1].encoding));
    }

    #[test]
    fn satisfies_checks_forbidden_copies() {
        let g = presets::graphs();
        let tf = presets::triangle_free();
        let sig = g.signature();
        let k3 = Model::graph(sig, 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let c5 = Model::graph(sig, 5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert!(!tf.satisfies(&k3).unwrap());
        assert!(tf.satisfies(&c5).unwrap());
        assert!(g.satisfies(&k3).unwrap());
    }

    #[test]
    fn too_large_is_a_resource_error() {
        let g = presets::graphs();
        assert!(matches!(enumerate_models(&g, 11), Err(Error::Resource(_))));
    }
}
