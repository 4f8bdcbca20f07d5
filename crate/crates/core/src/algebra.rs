//! Chain-rule normal forms of flag-algebra elements.
//!
//! An element lives at a level `ℓ` as an exact coefficient vector over the
//! basis `F^σ_ℓ`. Two elements are equal in the algebra iff their lifts to a
//! common level coincide, so the quotient by the chain-rule relations never
//! has to be represented.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::error::{ensure_input, Error, Result};
use crate::flags::{enumerate_flags_with, q_normalizer, Flag, FlagBasis, TypeSigma};
use crate::model::Theory;
use crate::par::Exec;
use crate::rational::{binomial, Rational};

/// Exact combination of basis flags at one level.
#[derive(Clone)]
pub struct AlgebraElement {
    basis: Arc<FlagBasis>,
    coeffs: BTreeMap<usize, Rational>,
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.coeffs.iter().map(|(i, c)| format!("{c}*F{i}")).collect();
        write!(f, "AlgebraElement(level={}, k={}, [{}])", self.level(), self.sigma().size(), terms.join(" + "))
    }
}

impl PartialEq for AlgebraElement {
    /// Coefficient equality at the same level; use [`FlagAlgebra::equal`]
    /// to compare across levels.
    fn eq(&self, other: &Self) -> bool {
        self.level() == other.level() && self.sigma() == other.sigma() && self.coeffs == other.coeffs
    }
}

impl AlgebraElement {
    pub fn basis(&self) -> &Arc<FlagBasis> {
        &self.basis
    }

    pub fn level(&self) -> usize {
        self.basis.level()
    }

    pub fn sigma(&self) -> &TypeSigma {
        self.basis.sigma()
    }

    /// Nonzero coefficients by basis index.
    pub fn coeffs(&self) -> &BTreeMap<usize, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, index: usize) -> Rational {
        self.coeffs.get(&index).cloned().unwrap_or_else(Rational::zero)
    }

    /// Dense coefficient vector over the basis.
    pub fn dense(&self) -> Vec<Rational> {
        (0..self.basis.len()).map(|i| self.coeff(i)).collect()
    }

    /// Coefficient of a flag of this element's level (any labeling).
    pub fn coeff_of(&self, flag: &Flag) -> Result<Rational> {
        Ok(self.coeff(self.basis.index_of(flag)?))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Flag, &Rational)> {
        self.coeffs.iter().map(|(&i, c)| (&self.basis.flags()[i], c))
    }

    pub fn is_zero_vector(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn from_dense(basis: Arc<FlagBasis>, dense: impl IntoIterator<Item = Rational>) -> Self {
        let coeffs = dense.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        AlgebraElement { basis, coeffs }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let coeffs = if c.is_zero() {
            BTreeMap::new()
        } else {
            self.coeffs.iter().map(|(&i, x)| (i, x * c)).collect()
        };
        AlgebraElement { basis: self.basis.clone(), coeffs }
    }
}

type LiftTable = Vec<Vec<(usize, Rational)>>;
type ProductTable = Vec<Vec<((usize, usize), Rational)>>;

/// Memoizing context for one theory: bases, chain-rule tables and product
/// tables are computed once and shared.
pub struct FlagAlgebra {
    theory: Arc<Theory>,
    exec: Exec,
    bases: Mutex<HashMap<(TypeSigma, usize), Arc<FlagBasis>>>,
    lifts: Mutex<HashMap<(TypeSigma, usize, usize), Arc<LiftTable>>>,
    products: Mutex<HashMap<(TypeSigma, usize, usize), Arc<ProductTable>>>,
}

impl fmt::Debug for FlagAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlagAlgebra").field("theory", &self.theory.name()).field("exec", &self.exec).finish()
    }
}

impl FlagAlgebra {
    pub fn new(theory: Arc<Theory>) -> Self {
        Self::with_exec(theory, Exec::default())
    }

    pub fn with_exec(theory: Arc<Theory>, exec: Exec) -> Self {
        FlagAlgebra {
            theory,
            exec,
            bases: Mutex::default(),
            lifts: Mutex::default(),
            products: Mutex::default(),
        }
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn basis(&self, sigma: &TypeSigma, level: usize) -> Result<Arc<FlagBasis>> {
        let key = (sigma.clone(), level);
        if let Some(b) = self.bases.lock().unwrap().get(&key) {
            return Ok(b.clone());
        }
        let basis = Arc::new(enumerate_flags_with(&self.theory, sigma, level, self.exec)?);
        Ok(self.bases.lock().unwrap().entry(key).or_insert(basis).clone())
    }

    pub fn zero(&self, sigma: &TypeSigma, level: usize) -> Result<AlgebraElement> {
        Ok(AlgebraElement { basis: self.basis(sigma, level)?, coeffs: BTreeMap::new() })
    }

    /// The unit `1_σ`, i.e. the type as a flag.
    pub fn unit(&self, sigma: &TypeSigma) -> Result<AlgebraElement> {
        self.from_flag(&Flag::of_type(sigma))
    }

    pub fn from_flag(&self, flag: &Flag) -> Result<AlgebraElement> {
        self.from_terms(&flag.sigma(), flag.size(), [(Rational::one(), flag)])
    }

    /// Element at `level` from flags of exactly that level.
    pub fn from_terms<'a>(
        &self,
        sigma: &TypeSigma,
        level: usize,
        terms: impl IntoIterator<Item = (Rational, &'a Flag)>,
    ) -> Result<AlgebraElement> {
        let basis = self.basis(sigma, level)?;
        let mut dense = vec![Rational::zero(); basis.len()];
        for (c, f) in terms {
            dense[basis.index_of(f)?] += c;
        }
        Ok(AlgebraElement::from_dense(basis, dense))
    }

    fn same_type(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<()> {
        ensure_input!(a.sigma() == b.sigma(), "elements are over different types");
        Ok(())
    }

    fn lift_table(&self, sigma: &TypeSigma, from: usize, to: usize) -> Result<Arc<LiftTable>> {
        let key = (sigma.clone(), from, to);
        if let Some(t) = self.lifts.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let small = self.basis(sigma, from)?;
        let big = self.basis(sigma, to)?;
        let k = sigma.size();
        let denom = Rational::from_integer(binomial(to - k, from - k).into());
        let rows = self.exec.map(big.flags(), |f| -> Result<Vec<(usize, Rational)>> {
            let counts = crate::flags::density_counts_for(f, from - k)?;
            let mut row: Vec<(usize, Rational)> = counts
                .into_iter()
                .map(|(key, c)| {
                    let i = small.index_of_key(&key).expect("subflags of a model are models");
                    (i, Rational::from_integer(c.into()) / &denom)
                })
                .collect();
            row.sort_by_key(|(i, _)| *i);
            Ok(row)
        });
        let table = Arc::new(rows.into_iter().collect::<Result<Vec<_>>>()?);
        Ok(self.lifts.lock().unwrap().entry(key).or_insert(table).clone())
    }

    /// Rewrite at a higher level with `c'_F = Σ c_F̃ p(F̃, F)`.
    pub fn lift(&self, a: &AlgebraElement, level: usize) -> Result<AlgebraElement> {
        ensure_input!(level >= a.level(), "cannot lift from level {} down to {level}", a.level());
        if level == a.level() {
            return Ok(a.clone());
        }
        let table = self.lift_table(a.sigma(), a.level(), level)?;
        let big = self.basis(a.sigma(), level)?;
        let dense = table.iter().map(|row| {
            row.iter()
                .filter_map(|(i, p)| a.coeffs.get(i).map(|c| c * p))
                .fold(Rational::zero(), |acc, x| acc + x)
        });
        Ok(AlgebraElement::from_dense(big, dense))
    }

    /// Σ c_i a_i after lifting every term to the largest level.
    pub fn linear_combine(&self, terms: &[(Rational, &AlgebraElement)]) -> Result<AlgebraElement> {
        let first = terms.first().ok_or_else(|| Error::input("empty linear combination"))?;
        for (_, t) in terms {
            self.same_type(first.1, t)?;
        }
        let level = terms.iter().map(|(_, t)| t.level()).max().unwrap();
        let basis = self.basis(first.1.sigma(), level)?;
        let mut dense = vec![Rational::zero(); basis.len()];
        for (c, t) in terms {
            for (i, x) in self.lift(t, level)?.coeffs {
                dense[i] += x * c;
            }
        }
        Ok(AlgebraElement::from_dense(basis, dense))
    }

    pub fn add(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.linear_combine(&[(Rational::one(), a), (Rational::one(), b)])
    }

    pub fn sub(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.linear_combine(&[(Rational::one(), a), (-Rational::one(), b)])
    }

    fn product_table(&self, sigma: &TypeSigma, m1: usize, m2: usize) -> Result<Arc<ProductTable>> {
        let key = (sigma.clone(), m1, m2);
        if let Some(t) = self.products.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let k = sigma.size();
        let (a, b) = (m1 - k, m2 - k);
        let level = m1 + m2 - k;
        let b1 = self.basis(sigma, m1)?;
        let b2 = self.basis(sigma, m2)?;
        let big = self.basis(sigma, level)?;
        let denom = Rational::from_integer((binomial(a + b, a) * binomial(b, b)).into());
        let rows = self.exec.map(big.flags(), |f| -> Result<Vec<((usize, usize), Rational)>> {
            let counts = crate::flags::joint_counts_for(f, a, b)?;
            let mut row: Vec<((usize, usize), Rational)> = counts
                .into_iter()
                .map(|((k1, k2), c)| {
                    let i1 = b1.index_of_key(&k1).expect("subflag in basis");
                    let i2 = b2.index_of_key(&k2).expect("subflag in basis");
                    ((i1, i2), Rational::from_integer(c.into()) / &denom)
                })
                .collect();
            row.sort_by_key(|x| x.0);
            Ok(row)
        });
        let table = Arc::new(rows.into_iter().collect::<Result<Vec<_>>>()?);
        Ok(self.products.lock().unwrap().entry(key).or_insert(table).clone())
    }

    /// Bilinear extension of `F1·F2 = Σ p(F1, F2; F) F`.
    pub fn multiply(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_type(x, y)?;
        let k = x.sigma().size();
        let level = x.level() + y.level() - k;
        let table = self.product_table(x.sigma(), x.level(), y.level())?;
        let big = self.basis(x.sigma(), level)?;
        let dense = table.iter().map(|row| {
            row.iter()
                .filter_map(|((i1, i2), p)| {
                    let c1 = x.coeffs.get(i1)?;
                    let c2 = y.coeffs.get(i2)?;
                    Some(c1 * c2 * p)
                })
                .fold(Rational::zero(), |acc, v| acc + v)
        });
        Ok(AlgebraElement::from_dense(big, dense))
    }

    /// Zero in the algebra: the normal form vanishes.
    pub fn is_zero(&self, a: &AlgebraElement) -> bool {
        a.is_zero_vector()
    }

    /// Equality in the algebra, deciding by lifting to a common level.
    pub fn equal(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<bool> {
        Ok(self.sub(a, b)?.is_zero_vector())
    }

    /// Averaging operator onto the type on the first `target_root` vertices:
    /// `F ↦ q(F, k') · F` re-rooted.
    pub fn downward(&self, a: &AlgebraElement, target_root: usize) -> Result<AlgebraElement> {
        let k = a.sigma().size();
        ensure_input!(target_root <= k, "cannot average down to {target_root} from a type of size {k}");
        let target = a.sigma().restrict(target_root)?;
        let basis = self.basis(&target, a.level())?;
        let contributions = self.exec.map(&a.coeffs.iter().collect::<Vec<_>>(), |(&i, c)| {
            let f = &a.basis.flags()[i];
            let q = q_normalizer(f, target_root)?;
            let j = basis.index_of(&f.reroot(target_root)?)?;
            Ok::<_, Error>((j, q * *c))
        });
        let mut dense = vec![Rational::zero(); basis.len()];
        for r in contributions {
            let (j, v) = r?;
            dense[j] += v;
        }
        Ok(AlgebraElement::from_dense(basis, dense))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets as p;
    use crate::rational::{int, ratio};

    fn setup() -> (Arc<Theory>, FlagAlgebra) {
        let g = p::graphs();
        (g.clone(), FlagAlgebra::new(g))
    }

    #[test]
    fn lift_of_edge_to_three_vertices() {
        let (g, alg) = setup();
        let e = alg.from_flag(&p::edge(&g)).unwrap();
        let l = alg.lift(&e, 3).unwrap();
        assert_eq!(l.coeff_of(&p::empty3(&g)).unwrap(), int(0));
        assert_eq!(l.coeff_of(&p::one_edge3(&g)).unwrap(), ratio(1, 3));
        assert_eq!(l.coeff_of(&p::p3(&g)).unwrap(), ratio(2, 3));
        assert_eq!(l.coeff_of(&p::k3(&g)).unwrap(), int(1));
        assert_eq!(alg.lift(&e, 2).unwrap(), e);
        assert!(alg.lift(&l, 2).is_err());
    }

    #[test]
    fn unit_lifts_to_all_ones() {
        let (g, alg) = setup();
        for sigma in [TypeSigma::empty(&g), p::vertex_type(&g), p::edge_type(&g)] {
            let u = alg.unit(&sigma).unwrap();
            let l = alg.lift(&u, 4).unwrap();
            assert!(l.dense().iter().all(|c| *c == int(1)));
        }
    }

    #[test]
    fn linear_combinations() {
        let (g, alg) = setup();
        let e = alg.from_flag(&p::edge(&g)).unwrap();
        let ne = alg.from_flag(&p::non_edge(&g)).unwrap();
        let s = alg.add(&e, &ne).unwrap();
        let unit = alg.lift(&alg.unit(&TypeSigma::empty(&g)).unwrap(), 2).unwrap();
        assert_eq!(s, unit);
        assert!(alg.linear_combine(&[(int(0), &e)]).unwrap().is_zero_vector());
        assert!(alg.sub(&e, &e).unwrap().is_zero_vector());
        assert!(!alg.is_zero(&alg.sub(&e, &ne).unwrap()));
        let e1 = alg.from_flag(&p::rooted_edge(&g)).unwrap();
        assert!(alg.add(&e, &e1).is_err());
    }

    #[test]
    fn products() {
        let (g, alg) = setup();
        let e1 = alg.from_flag(&p::rooted_edge(&g)).unwrap();
        let sq = alg.multiply(&e1, &e1).unwrap();
        assert_eq!(sq.coeffs().len(), 2);
        assert_eq!(sq.coeff_of(&p::cherry_at_center(&g)).unwrap(), int(1));
        assert_eq!(sq.coeff_of(&p::rooted_k3(&g)).unwrap(), int(1));
        let e = alg.from_flag(&p::edge(&g)).unwrap();
        let ee = alg.multiply(&e, &e).unwrap();
        assert_eq!(ee.level(), 4);
        assert_eq!(ee.coeff_of(&p::k4(&g)).unwrap(), int(1));
        assert_eq!(ee.coeff_of(&p::c4(&g)).unwrap(), ratio(2, 3));
        let unit = alg.unit(&TypeSigma::empty(&g)).unwrap();
        assert_eq!(alg.multiply(&unit, &e).unwrap(), e);
    }

    #[test]
    fn averaging_the_square_of_the_rooted_edge_difference() {
        let (g, alg) = setup();
        let e1 = alg.from_flag(&p::rooted_edge(&g)).unwrap();
        let ne1 = alg.from_flag(&p::rooted_non_edge(&g)).unwrap();
        let f = alg.sub(&e1, &ne1).unwrap();
        let avg = alg.downward(&alg.multiply(&f, &f).unwrap(), 0).unwrap();
        assert_eq!(avg.coeff_of(&p::k3(&g)).unwrap(), int(1));
        assert_eq!(avg.coeff_of(&p::p3(&g)).unwrap(), ratio(-1, 3));
        assert_eq!(avg.coeff_of(&p::one_edge3(&g)).unwrap(), ratio(-1, 3));
        assert_eq!(avg.coeff_of(&p::empty3(&g)).unwrap(), int(1));
        assert_eq!(alg.downward(&e1, 0).unwrap(), alg.from_flag(&p::edge(&g)).unwrap());
        assert!(alg.downward(&e1, 2).is_err());
    }
}
