use std::collections::HashMap;
use std::fmt;

use crate::error::{ensure_input, Result};
use crate::model::{canonical_form, extend_by_one, labeled_encoding, Encoding, Model, Theory};
use crate::par::Exec;

/// A fully labeled model on `0..k`; equality is labeled equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TypeSigma {
    model: Model,
}

impl fmt::Debug for TypeSigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeSigma({:?})", self.model)
    }
}

impl TypeSigma {
    pub fn new(theory: &Theory, model: Model) -> Result<Self> {
        theory.check_model(&model)?;
        ensure_input!(theory.satisfies(&model)?, "type violates theory {}", theory.name());
        Ok(TypeSigma { model })
    }

    /// The empty type `0`.
    pub fn empty(theory: &Theory) -> Self {
        TypeSigma { model: theory.empty_model(0) }
    }

    pub fn size(&self) -> usize {
        self.model.n()
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// The type on the first `k` vertices.
    pub fn restrict(&self, k: usize) -> Result<TypeSigma> {
        ensure_input!(k <= self.size(), "cannot restrict a type of size {} to {k}", self.size());
        Ok(TypeSigma { model: self.model.induced_sorted(&(0..k).collect::<Vec<_>>()) })
    }
}

/// A model whose first `root` vertices carry the type.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Flag {
    model: Model,
    root: usize,
}

impl fmt::Debug for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Flag(root={}, {:?})", self.root, self.model)
    }
}

impl Flag {
    pub fn new(theory: &Theory, model: Model, root: usize) -> Result<Self> {
        theory.check_model(&model)?;
        ensure_input!(root <= model.n(), "root size {root} exceeds flag size {}", model.n());
        ensure_input!(theory.satisfies(&model)?, "flag violates theory {}", theory.name());
        Ok(Flag { model, root })
    }

    pub(crate) fn from_parts(model: Model, root: usize) -> Self {
        Flag { model, root }
    }

    /// The type itself viewed as a flag.
    pub fn of_type(sigma: &TypeSigma) -> Self {
        Flag { model: sigma.model.clone(), root: sigma.size() }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn size(&self) -> usize {
        self.model.n()
    }

    pub fn root_size(&self) -> usize {
        self.root
    }

    pub fn sigma(&self) -> TypeSigma {
        TypeSigma { model: self.model.induced_sorted(&(0..self.root).collect::<Vec<_>>()) }
    }

    pub(crate) fn root_model(&self) -> Model {
        self.sigma().model
    }

    /// Canonical representative of the flag's isomorphism class.
    pub fn canonical(&self) -> Result<Flag> {
        Ok(Flag { model: canonical_form(&self.model, self.root)?.model, root: self.root })
    }

    /// Canonical encoding: equal iff the flags are isomorphic (root fixed).
    pub fn key(&self) -> Result<Encoding> {
        Ok(canonical_form(&self.model, self.root)?.encoding)
    }

    /// The same model with a shorter root.
    pub fn reroot(&self, k: usize) -> Result<Flag> {
        ensure_input!(k <= self.root, "cannot re-root a {}-rooted flag at {k}", self.root);
        Ok(Flag { model: self.model.clone(), root: k })
    }

    /// Induced subflag on the root plus `extra` (increasing, all ≥ root).
    pub(crate) fn subflag(&self, extra: &[usize]) -> Flag {
        let mut s: Vec<usize> = (0..self.root).collect();
        s.extend_from_slice(extra);
        Flag { model: self.model.induced_sorted(&s), root: self.root }
    }
}

/// All σ-flags of one size, one canonical representative per class, sorted
/// by canonical encoding.
#[derive(Debug)]
pub struct FlagBasis {
    sigma: TypeSigma,
    level: usize,
    flags: Vec<Flag>,
    keys: Vec<Encoding>,
    index: HashMap<Encoding, usize>,
}

impl FlagBasis {
    pub fn sigma(&self) -> &TypeSigma {
        &self.sigma
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn keys(&self) -> &[Encoding] {
        &self.keys
    }

    pub fn index_of_key(&self, key: &Encoding) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Position of a flag (any labeling) in the basis.
    pub fn index_of(&self, flag: &Flag) -> Result<usize> {
        ensure_input!(
            flag.root == self.sigma.size() && flag.size() == self.level,
            "flag of size {} rooted at {} does not belong to a basis of level {} over a {}-vertex type",
            flag.size(),
            flag.root,
            self.level,
            self.sigma.size()
        );
        ensure_input!(flag.root_model() == self.sigma.model, "flag has a different type");
        let key = flag.key()?;
        self.index_of_key(&key).ok_or_else(|| crate::error::Error::input("flag is not a model of the theory"))
    }
}

/// `F^σ_ℓ`: all σ-flags on `level` vertices satisfying the theory.
pub fn enumerate_flags(theory: &Theory, sigma: &TypeSigma, level: usize) -> Result<FlagBasis> {
    enumerate_flags_with(theory, sigma, level, Exec::default())
}

pub fn enumerate_flags_with(theory: &Theory, sigma: &TypeSigma, level: usize, exec: Exec) -> Result<FlagBasis> {
    let k = sigma.size();
    ensure_input!(level >= k, "level {level} is below the type size {k}");
    theory.check_model(&sigma.model)?;
    crate::model::check_size(level)?;
    let mut current = vec![sigma.model.clone()];
    let mut keys = vec![labeled_encoding(&sigma.model, k)];
    for _ in k..level {
        let next = extend_by_one(theory, &current, k, exec)?;
        keys = next.keys().cloned().collect();
        current = next.into_values().map(|c| c.model).collect();
    }
    let flags: Vec<Flag> = current.into_iter().map(|model| Flag { model, root: k }).collect();
    let index = keys.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    Ok(FlagBasis { sigma: sigma.clone(), level, flags, keys, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn basis_sizes_for_graphs() {
        let g = presets::graphs();
        let empty = TypeSigma::empty(&g);
        let vertex = presets::vertex_type(&g);
        let edge = presets::edge_type(&g);
        assert_eq!(enumerate_flags(&g, &empty, 2).unwrap().len(), 2);
        assert_eq!(enumerate_flags(&g, &empty, 4).unwrap().len(), 11);
        assert_eq!(enumerate_flags(&g, &vertex, 2).unwrap().len(), 2);
        assert_eq!(enumerate_flags(&g, &vertex, 3).unwrap().len(), 6);
        assert_eq!(enumerate_flags(&g, &edge, 3).unwrap().len(), 4);
        let unit = enumerate_flags(&g, &edge, 2).unwrap();
        assert_eq!(unit.len(), 1);
        assert_eq!(unit.flags()[0], Flag::of_type(&edge));
        assert!(enumerate_flags(&g, &edge, 1).is_err());
    }

    #[test]
    fn index_lookup_accepts_any_labeling() {
        let g = presets::graphs();
        let basis = enumerate_flags(&g, &TypeSigma::empty(&g), 3).unwrap();
        let p3 = presets::p3(&g);
        let relabeled = Flag::new(&g, p3.model().relabel(&[1, 2, 0]), 0).unwrap();
        assert_eq!(basis.index_of(&p3).unwrap(), basis.index_of(&relabeled).unwrap());
    }

    #[test]
    fn triangle_free_types_are_checked() {
        let tf = presets::triangle_free();
        let k3 = presets::k3(&presets::graphs());
        assert!(TypeSigma::new(&tf, k3.model().clone()).is_err());
    }
}
