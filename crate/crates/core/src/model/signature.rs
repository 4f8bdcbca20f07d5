//! Predicate signatures and the reduced per-support color encoding.
//!
//! A color for arity `i` is a bit vector packed into a `u64`. Predicates of
//! that arity take consecutive bit slots in declaration order: one bit for a
//! symmetric predicate, `i!` bits for a non-symmetric one (bit `j` holds the
//! truth value on the `j`-th ordering of the support in lexicographic
//! permutation order).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_input, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Diagonal {
    #[serde(rename = "constant-false")]
    ConstantFalse,
    #[serde(rename = "constant-true")]
    ConstantTrue,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateSpec {
    pub name: String,
    pub arity: usize,
    pub symmetric: bool,
    pub diagonal: Diagonal,
}

impl PredicateSpec {
    pub fn symmetric(name: &str, arity: usize) -> Self {
        PredicateSpec {
            name: name.to_string(),
            arity,
            symmetric: true,
            diagonal: Diagonal::ConstantFalse,
        }
    }

    pub fn directed(name: &str, arity: usize) -> Self {
        PredicateSpec {
            name: name.to_string(),
            arity,
            symmetric: false,
            diagonal: Diagonal::ConstantFalse,
        }
    }

    pub(crate) fn width(&self) -> u32 {
        if self.symmetric {
            1
        } else {
            factorial(self.arity) as u32
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Slot {
    pub pred: usize,
    pub offset: u32,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ArityLayout {
    pub bits: u32,
    pub slots: Vec<Slot>,
    pub directed: bool,
    /// All permutations of `0..arity` in lexicographic order.
    pub perms: Vec<Vec<usize>>,
    /// `compose[t][p]` is the index of `perms[t] ∘ perms[p]`.
    pub compose: Vec<Vec<usize>>,
}

/// The color layout shared by every model of a theory.
#[derive(Debug, Clone)]
pub struct Signature {
    arity_bound: usize,
    predicates: Vec<PredicateSpec>,
    layouts: Vec<ArityLayout>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.arity_bound == other.arity_bound && self.predicates == other.predicates
    }
}

impl Eq for Signature {}

const MAX_DIRECTED_ARITY: usize = 5;

impl Signature {
    pub fn new(arity_bound: usize, predicates: Vec<PredicateSpec>) -> Result<Self> {
        ensure_input!(arity_bound >= 1, "arity bound must be at least 1");
        let mut seen = std::collections::HashSet::new();
        for p in &predicates {
            ensure_input!(
                (1..=arity_bound).contains(&p.arity),
                "predicate {} has arity {} outside [1, {}]",
                p.name,
                p.arity,
                arity_bound
            );
            ensure_input!(
                p.arity > 1 || p.symmetric,
                "unary predicate {} must be symmetric",
                p.name
            );
            ensure_input!(
                p.symmetric || p.arity <= MAX_DIRECTED_ARITY,
                "non-symmetric predicate {} has arity above {}",
                p.name,
                MAX_DIRECTED_ARITY
            );
            ensure_input!(seen.insert(p.name.clone()), "duplicate predicate name {}", p.name);
        }
        let mut layouts = Vec::with_capacity(arity_bound);
        for arity in 1..=arity_bound {
            let mut slots = Vec::new();
            let mut offset = 0u32;
            for (pred, p) in predicates.iter().enumerate().filter(|(_, p)| p.arity == arity) {
                let width = p.width();
                slots.push(Slot { pred, offset, width });
                offset += width;
            }
            ensure_input!(offset <= 64, "arity {arity} needs {offset} color bits (max 64)");
            let directed = slots.iter().any(|s| s.width > 1);
            let perms = if directed { permutations(arity) } else { Vec::new() };
            let index: HashMap<&[usize], usize> =
                perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
            let compose = perms
                .iter()
                .map(|t| {
                    perms
                        .iter()
                        .map(|p| {
                            let tp: Vec<usize> = p.iter().map(|&x| t[x]).collect();
                            index[tp.as_slice()]
                        })
                        .collect()
                })
                .collect();
            layouts.push(ArityLayout { bits: offset, slots, directed, perms, compose });
        }
        Ok(Signature { arity_bound, predicates, layouts })
    }

    pub fn arity_bound(&self) -> usize {
        self.arity_bound
    }

    pub fn predicates(&self) -> &[PredicateSpec] {
        &self.predicates
    }

    /// Number of color bits for supports of the given arity (0 if unused).
    pub fn color_bits(&self, arity: usize) -> u32 {
        self.layouts.get(arity - 1).map_or(0, |l| l.bits)
    }

    /// Number of distinct colors for the arity.
    pub fn color_count(&self, arity: usize) -> u64 {
        1u64 << self.color_bits(arity)
    }

    /// Arities that carry at least one predicate.
    pub fn active_arities(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.arity_bound).filter(|&a| self.color_bits(a) > 0)
    }

    pub(crate) fn layout(&self, arity: usize) -> &ArityLayout {
        &self.layouts[arity - 1]
    }

    pub fn is_directed(&self, arity: usize) -> bool {
        self.layout(arity).directed
    }

    /// Re-index a color after the support's positions are permuted:
    /// `tau[j]` is the new position of the vertex that sat at position `j`.
    pub fn permute_color(&self, arity: usize, color: u64, tau: &[usize]) -> u64 {
        let layout = self.layout(arity);
        if !layout.directed || tau.iter().enumerate().all(|(i, &t)| i == t) {
            return color;
        }
        let t = layout
            .perms
            .iter()
            .position(|p| p.as_slice() == tau)
            .expect("tau is a permutation of the support positions");
        self.permute_color_by_index(arity, color, t)
    }

    pub(crate) fn permute_color_by_index(&self, arity: usize, color: u64, t: usize) -> u64 {
        let layout = self.layout(arity);
        let mut out = 0u64;
        for slot in &layout.slots {
            if slot.width == 1 {
                out |= color & (1 << slot.offset);
                continue;
            }
            for (p, &tp) in layout.compose[t].iter().enumerate() {
                if color >> (slot.offset + p as u32) & 1 == 1 {
                    out |= 1 << (slot.offset + tp as u32);
                }
            }
        }
        out
    }

    /// Index of a position permutation in the lexicographic list, for
    /// directed arities.
    pub(crate) fn perm_index(&self, arity: usize, tau: &[usize]) -> Option<usize> {
        self.layout(arity).perms.iter().position(|p| p.as_slice() == tau)
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == name)
    }

    /// Slot (bit offset, width) of a predicate inside its arity's color.
    pub fn predicate_slot(&self, pred: usize) -> (u32, u32) {
        let arity = self.predicates[pred].arity;
        let slot = self.layout(arity).slots.iter().find(|s| s.pred == pred).unwrap();
        (slot.offset, slot.width)
    }

    pub(crate) fn check_color(&self, arity: usize, color: u64) -> Result<()> {
        let bits = self.color_bits(arity);
        if bits < 64 && color >> bits != 0 {
            return Err(Error::input(format!(
                "color {color:#b} does not fit the {bits} bits of arity {arity}"
            )));
        }
        Ok(())
    }
}

pub(crate) fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_predicates() {
        assert!(Signature::new(2, vec![PredicateSpec::symmetric("E", 3)]).is_err());
        assert!(Signature::new(2, vec![PredicateSpec::directed("U", 1)]).is_err());
        assert!(Signature::new(
            2,
            vec![PredicateSpec::symmetric("E", 2), PredicateSpec::symmetric("E", 2)]
        )
        .is_err());
        assert!(Signature::new(0, vec![]).is_err());
    }

    #[test]
    fn directed_pair_swaps_bits() {
        let sig = Signature::new(2, vec![PredicateSpec::directed("A", 2)]).unwrap();
        assert_eq!(sig.color_bits(2), 2);
        // bit 0: A(u,v), bit 1: A(v,u); swapping positions exchanges them
        assert_eq!(sig.permute_color(2, 0b01, &[1, 0]), 0b10);
        assert_eq!(sig.permute_color(2, 0b11, &[1, 0]), 0b11);
        assert_eq!(sig.permute_color(2, 0b01, &[0, 1]), 0b01);
    }

    #[test]
    fn ternary_permutation_action_is_a_group_action() {
        let sig = Signature::new(3, vec![PredicateSpec::directed("R", 3)]).unwrap();
        let perms = permutations(3);
        for c in [0b000001u64, 0b100100, 0b011010] {
            for s in &perms {
                for t in &perms {
                    let ts: Vec<usize> = s.iter().map(|&x| t[x]).collect();
                    let two_steps = sig.permute_color(3, sig.permute_color(3, c, s), t);
                    assert_eq!(two_steps, sig.permute_color(3, c, &ts));
                }
            }
        }
    }
}
