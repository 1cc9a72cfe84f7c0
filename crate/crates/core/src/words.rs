//! Normal-form arithmetic in the free product `G = A_1 * ... * A_n`.
//!
//! A reduced word alternates factors and never carries a factor identity.
//! Words hold no reference to the factor system; every operation takes the
//! system as context.

use crate::groups::{Elem, FactorSystem};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("letter ({factor},{elem}) is not valid for this factor system")]
    InvalidLetter { factor: usize, elem: usize },
}

/// A single syllable: a non-identity element of one factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    /// 0-based factor index.
    pub factor: usize,
    pub elem: Elem,
}

/// A reduced word of `G`; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Single-letter word. The caller guarantees `elem != 0`.
    pub fn letter(factor: usize, elem: Elem) -> Self {
        debug_assert!(elem != 0);
        Word(vec![Letter { factor, elem }])
    }

    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Self {
        Word(letters)
    }
}

/// Shortlex: by length, then per-letter (factor, elem).
impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Streaming stack reducer. Pushing letters keeps the buffer reduced.
#[derive(Debug, Clone)]
pub(crate) struct Reducer<'a> {
    sys: &'a FactorSystem,
    stack: Vec<Letter>,
}

impl<'a> Reducer<'a> {
    pub fn new(sys: &'a FactorSystem) -> Self {
        Reducer {
            sys,
            stack: Vec::new(),
        }
    }

    pub fn push(&mut self, factor: usize, elem: Elem) {
        if elem == 0 {
            return;
        }
        match self.stack.last().copied() {
            Some(top) if top.factor == factor => {
                let prod = self.sys.factor(factor).mul(top.elem, elem);
                self.stack.pop();
                if prod != 0 {
                    self.stack.push(Letter {
                        factor,
                        elem: prod,
                    });
                }
            }
            _ => self.stack.push(Letter { factor, elem }),
        }
    }

    pub fn push_word(&mut self, w: &Word) {
        for l in w.letters() {
            self.push(l.factor, l.elem);
        }
    }

    pub fn push_inverse(&mut self, w: &Word) {
        for l in w.letters().iter().rev() {
            self.push(l.factor, self.sys.factor(l.factor).inv(l.elem));
        }
    }

    pub fn finish(self) -> Word {
        Word(self.stack)
    }
}

/// Reduces a raw letter sequence to the unique normal form. Identity letters
/// are permitted in the input and dropped.
pub fn reduce(sys: &FactorSystem, raw: &[(usize, Elem)]) -> Result<Word, WordError> {
    let mut r = Reducer::new(sys);
    for &(factor, elem) in raw {
        if factor >= sys.n() || elem as usize >= sys.factor(factor).order() {
            return Err(WordError::InvalidLetter {
                factor,
                elem: elem as usize,
            });
        }
        r.push(factor, elem);
    }
    Ok(r.finish())
}

/// Checks that a word's letters all reference this system and are reduced.
pub fn validate_word(sys: &FactorSystem, w: &Word) -> Result<(), WordError> {
    let mut prev: Option<usize> = None;
    for l in w.letters() {
        if l.factor >= sys.n() || l.elem == 0 || (l.elem as usize) >= sys.factor(l.factor).order() {
            return Err(WordError::InvalidLetter {
                factor: l.factor,
                elem: l.elem as usize,
            });
        }
        if prev == Some(l.factor) {
            return Err(WordError::InvalidLetter {
                factor: l.factor,
                elem: l.elem as usize,
            });
        }
        prev = Some(l.factor);
    }
    Ok(())
}

pub fn mul(sys: &FactorSystem, a: &Word, b: &Word) -> Word {
    let mut r = Reducer::new(sys);
    r.push_word(a);
    r.push_word(b);
    r.finish()
}

pub fn inv(sys: &FactorSystem, w: &Word) -> Word {
    let mut r = Reducer::new(sys);
    r.push_inverse(w);
    r.finish()
}

/// Conjugation `w g w^{-1}`.
pub fn conj(sys: &FactorSystem, g: &Word, w: &Word) -> Word {
    let mut r = Reducer::new(sys);
    r.push_word(w);
    r.push_word(g);
    r.push_inverse(w);
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{cyclic, FactorSystem};
    use proptest::prelude::*;

    fn c2x2() -> FactorSystem {
        FactorSystem::new(vec![cyclic(2).unwrap(), cyclic(2).unwrap()]).unwrap()
    }

    fn c2x3() -> FactorSystem {
        FactorSystem::new(vec![cyclic(2).unwrap(), cyclic(2).unwrap(), cyclic(2).unwrap()])
            .unwrap()
    }

    /// Independent oracle: repeatedly scan for an adjacent same-factor pair or
    /// an identity letter and rewrite, until no rule applies.
    fn naive_reduce(sys: &FactorSystem, raw: &[(usize, Elem)]) -> Vec<(usize, Elem)> {
        let mut v: Vec<(usize, Elem)> = raw.to_vec();
        loop {
            if let Some(i) = v.iter().position(|&(_, e)| e == 0) {
                v.remove(i);
                continue;
            }
            let mut changed = false;
            for i in 0..v.len().saturating_sub(1) {
                if v[i].0 == v[i + 1].0 {
                    let prod = sys.factor(v[i].0).mul(v[i].1, v[i + 1].1);
                    let f = v[i].0;
                    v.splice(i..=i + 1, (prod != 0).then_some((f, prod)));
                    changed = true;
                    break;
                }
            }
            if !changed {
                return v;
            }
        }
    }

    #[test]
    fn reduce_examples() {
        let sys = c2x2();
        let a = (0usize, 1u16);
        let b = (1usize, 1u16);
        assert!(reduce(&sys, &[a, a]).unwrap().is_empty());
        assert!(reduce(&sys, &[a, b, b, a]).unwrap().is_empty());
        // aba·ab: interior a·a cancels, then b·b.
        let w = reduce(&sys, &[a, b, a, a, b]).unwrap();
        let expected = naive_reduce(&sys, &[a, b, a, a, b]);
        assert_eq!(
            w.letters()
                .iter()
                .map(|l| (l.factor, l.elem))
                .collect::<Vec<_>>(),
            expected
        );
        assert_eq!(w, Word::letter(0, 1));
    }

    #[test]
    fn reduce_rejects_bad_letters() {
        let sys = c2x2();
        assert!(reduce(&sys, &[(2, 1)]).is_err());
        assert!(reduce(&sys, &[(0, 2)]).is_err());
    }

    #[test]
    fn mul_inv_conj_examples() {
        let sys = c2x2();
        let a = Word::letter(0, 1);
        let b = Word::letter(1, 1);
        let x = mul(&sys, &a, &b);
        assert_eq!(mul(&sys, &Word::empty(), &x), x);
        // Over C2 factors every letter is its own inverse; inv reverses.
        assert_eq!(inv(&sys, &x), mul(&sys, &b, &a));
        // conj(b, a) = a b a^{-1}; expected value from brute-force reduction.
        let expected = naive_reduce(&sys, &[(0, 1), (1, 1), (0, 1)]);
        let got = conj(&sys, &b, &a);
        assert_eq!(
            got.letters()
                .iter()
                .map(|l| (l.factor, l.elem))
                .collect::<Vec<_>>(),
            expected
        );
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn shortlex_order() {
        let a = Word::letter(0, 1);
        let ab = Word::from_reduced(vec![
            Letter { factor: 0, elem: 1 },
            Letter { factor: 1, elem: 1 },
        ]);
        assert!(Word::empty() < a);
        assert!(a < Word::letter(1, 1));
        assert!(Word::letter(1, 1) < ab);
    }

    /// Exhaustive check for words of length <= 4 over C2*C2*C2:
    /// associativity of mul and the anti-homomorphism law for inv.
    #[test]
    fn exhaustive_small_word_laws() {
        let sys = c2x3();
        let mut all: Vec<Word> = vec![Word::empty()];
        let mut frontier = vec![Word::empty()];
        for _ in 0..4 {
            let mut next = Vec::new();
            for w in &frontier {
                for f in 0..3 {
                    if w.last().map(|l| l.factor) != Some(f) {
                        let mut letters = w.letters().to_vec();
                        letters.push(Letter { factor: f, elem: 1 });
                        next.push(Word::from_reduced(letters));
                    }
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        for x in &all {
            for y in &all {
                assert_eq!(
                    mul(&sys, &inv(&sys, &mul(&sys, x, y)), &Word::empty()),
                    mul(&sys, &inv(&sys, y), &inv(&sys, x))
                );
                for z in all.iter().take(10) {
                    assert_eq!(
                        mul(&sys, &mul(&sys, x, y), z),
                        mul(&sys, x, &mul(&sys, y, z))
                    );
                }
            }
        }
    }

    fn raw_strategy() -> impl Strategy<Value = Vec<(usize, Elem)>> {
        prop::collection::vec((0usize..3, 0u16..2), 0..24)
    }

    proptest! {
        /// reduce is idempotent and agrees with the naive rewriting oracle.
        #[test]
        fn reduce_idempotent_and_matches_oracle(raw in raw_strategy()) {
            let sys = c2x3();
            let w = reduce(&sys, &raw).unwrap();
            let again = reduce(
                &sys,
                &w.letters().iter().map(|l| (l.factor, l.elem)).collect::<Vec<_>>(),
            )
            .unwrap();
            prop_assert_eq!(&again, &w);
            let oracle = naive_reduce(&sys, &raw);
            prop_assert_eq!(
                w.letters().iter().map(|l| (l.factor, l.elem)).collect::<Vec<_>>(),
                oracle
            );
        }

        /// Normal-form uniqueness: inserting identity letters and re-bracketing
        /// the same product reduces to the identical word.
        #[test]
        fn normal_form_unique(raw in raw_strategy(), cut in 0usize..24) {
            let sys = c2x3();
            let w = reduce(&sys, &raw).unwrap();
            let k = cut.min(raw.len());
            let (lo, hi) = raw.split_at(k);
            let mut padded: Vec<(usize, Elem)> = lo.to_vec();
            padded.push((0, 0));
            padded.extend_from_slice(hi);
            let x = reduce(&sys, lo).unwrap();
            let y = reduce(&sys, hi).unwrap();
            prop_assert_eq!(mul(&sys, &x, &y), w.clone());
            prop_assert_eq!(reduce(&sys, &padded).unwrap(), w);
        }
    }
}
