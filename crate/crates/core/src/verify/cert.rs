use num_traits::{One, Signed};

use crate::algebra::{AlgebraElement, FlagAlgebra};
use crate::error::{ensure_input, Result};
use crate::flags::{Flag, TypeSigma};

/// One square `c · ⟦f·f⟧` in a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CertTerm {
    pub f: AlgebraElement,
    pub c: crate::rational::Rational,
}

/// Claim that `target - Σ c_j ⟦f_j²⟧ - Σ s_F F` has nonnegative
/// coefficients, which makes `target` nonnegative under every evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub target: AlgebraElement,
    pub terms: Vec<CertTerm>,
    pub slack: Vec<(Flag, crate::rational::Rational)>,
}

impl Certificate {
    /// `⟦f·f⟧` certified by itself.
    pub fn square(alg: &FlagAlgebra, f: &AlgebraElement) -> Result<Self> {
        let target = alg.downward(&alg.multiply(f, f)?, 0)?;
        Ok(Certificate { target, terms: vec![CertTerm { f: f.clone(), c: One::one() }], slack: Vec::new() })
    }

    /// `-1`, which no certificate can prove nonnegative.
    pub fn negative_unit(alg: &FlagAlgebra) -> Result<Self> {
        let unit = alg.unit(&TypeSigma::empty(alg.theory()))?;
        Ok(Certificate { target: unit.scale(&-crate::rational::one()), terms: Vec::new(), slack: Vec::new() })
    }

    pub fn validate(&self) -> Result<()> {
        ensure_input!(self.target.sigma().size() == 0, "the target must be over the empty type");
        for (j, t) in self.terms.iter().enumerate() {
            ensure_input!(!t.c.is_negative(), "term {j} has a negative multiplier");
        }
        for (f, s) in &self.slack {
            ensure_input!(f.root_size() == 0, "slack flags must be unrooted");
            ensure_input!(!s.is_negative(), "slack coefficients must be nonnegative");
        }
        Ok(())
    }

    /// `target - Σ c_j ⟦f_j²⟧ - Σ s_F F` at a common level.
    pub fn residual(&self, alg: &FlagAlgebra) -> Result<AlgebraElement> {
        self.validate()?;
        let mut parts = vec![(crate::rational::one(), self.target.clone())];
        for t in &self.terms {
            let sq = alg.downward(&alg.multiply(&t.f, &t.f)?, 0)?;
            parts.push((-t.c.clone(), sq));
        }
        for (f, s) in &self.slack {
            parts.push((-s.clone(), alg.from_flag(f)?));
        }
        let refs: Vec<_> = parts.iter().map(|(c, a)| (c.clone(), a)).collect();
        alg.linear_combine(&refs)
    }
}
