//! The generator automorphisms `F_{A_i}^w`, their compositions, evaluation,
//! innerness and outer-equality decisions, and their action on markings.
//!
//! An automorphism is stored as a word in the generators, never as a full
//! map; evaluation happens on demand. For a generator with conjugator `w`,
//! letters of the chosen factor are conjugated by `w` and everything else is
//! fixed. Compositions follow the rule "leftmost generator applied last", so
//! the generator word for conjugator `uv` is the composition of the `v`
//! generator after the `u` generator.

use crate::gog::{GraphOfGroups, VertexLabel};
use crate::groups::FactorSystem;
use crate::words::{self, Letter, Reducer, Word};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutoError {
    #[error("generator conjugator reduces to the identity")]
    IdentityGenerator,
    #[error("invalid factor index {got} for a system with {n} factors")]
    InvalidFactor { got: usize, n: usize },
    #[error("word does not belong to this factor system")]
    SystemMismatch,
    #[error("image of a factor element is not a conjugate of a factor element")]
    MalformedImage,
}

/// One generator `(i, w, ±1)`: conjugation of factor `i` by `w^{±1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AutoGen {
    pub factor: usize,
    pub conj: Word,
    pub exponent: i8,
}

impl AutoGen {
    fn effective_conj(&self, sys: &FactorSystem) -> Word {
        if self.exponent >= 0 {
            self.conj.clone()
        } else {
            words::inv(sys, &self.conj)
        }
    }
}

/// A composition of generators, leftmost applied last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct OuterAutoWord {
    pub gens: Vec<AutoGen>,
}

impl OuterAutoWord {
    pub fn identity() -> Self {
        OuterAutoWord { gens: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }
}

/// Single-generator automorphism conjugating factor `i` by `w`.
pub fn generator(sys: &FactorSystem, i: usize, w: &Word) -> Result<OuterAutoWord, AutoError> {
    if i >= sys.n() {
        return Err(AutoError::InvalidFactor { got: i, n: sys.n() });
    }
    words::validate_word(sys, w).map_err(|_| AutoError::SystemMismatch)?;
    if w.is_empty() {
        return Err(AutoError::IdentityGenerator);
    }
    Ok(OuterAutoWord {
        gens: vec![AutoGen {
            factor: i,
            conj: w.clone(),
            exponent: 1,
        }],
    })
}

/// True iff this is one of the standard generators: a single-letter
/// conjugator from a different factor.
pub fn is_standard_generator(g: &AutoGen) -> bool {
    g.conj.len() == 1 && g.conj.letters()[0].factor != g.factor
}

/// Expands a composition into single-letter generators of the
/// conjugacy-preserving subgroup, preserving the map. A generator with
/// conjugator `l_1 l_2 ... l_s` becomes the sequence
/// `[(i, l_s), ..., (i, l_1)]` (leftmost applied last).
pub fn to_standard_generators(sys: &FactorSystem, f: &OuterAutoWord) -> Vec<AutoGen> {
    let mut out = Vec::new();
    for g in &f.gens {
        let w = g.effective_conj(sys);
        for l in w.letters().iter().rev() {
            out.push(AutoGen {
                factor: g.factor,
                conj: Word::letter(l.factor, l.elem),
                exponent: 1,
            });
        }
    }
    out
}

/// `compose(f, g)` is `f` after `g`.
pub fn compose(f: &OuterAutoWord, g: &OuterAutoWord) -> OuterAutoWord {
    let mut gens = f.gens.clone();
    gens.extend(g.gens.iter().cloned());
    OuterAutoWord { gens }
}

/// Formal inverse: reversed sequence with flipped exponents.
pub fn invert(f: &OuterAutoWord) -> OuterAutoWord {
    OuterAutoWord {
        gens: f
            .gens
            .iter()
            .rev()
            .map(|g| AutoGen {
                factor: g.factor,
                conj: g.conj.clone(),
                exponent: -g.exponent,
            })
            .collect(),
    }
}

/// Raises `f` to an integer power.
pub fn power(f: &OuterAutoWord, k: i32) -> OuterAutoWord {
    let base = if k < 0 { invert(f) } else { f.clone() };
    let mut out = OuterAutoWord::identity();
    for _ in 0..k.unsigned_abs() {
        out = compose(&out, &base);
    }
    out
}

fn apply_single(sys: &FactorSystem, factor: usize, w: &Word, x: &Word) -> Word {
    let mut r = Reducer::new(sys);
    for l in x.letters() {
        if l.factor == factor {
            r.push_word(w);
            r.push(l.factor, l.elem);
            r.push_inverse(w);
        } else {
            r.push(l.factor, l.elem);
        }
    }
    r.finish()
}

/// Image of `g` under the composed automorphism, in reduced form.
pub fn apply(sys: &FactorSystem, f: &OuterAutoWord, g: &Word) -> Result<Word, AutoError> {
    words::validate_word(sys, g).map_err(|_| AutoError::SystemMismatch)?;
    let mut cur = g.clone();
    for gen in f.gens.iter().rev() {
        if gen.factor >= sys.n() {
            return Err(AutoError::InvalidFactor {
                got: gen.factor,
                n: sys.n(),
            });
        }
        let w = gen.effective_conj(sys);
        cur = apply_single(sys, gen.factor, &w, &cur);
    }
    Ok(cur)
}

/// Splits a reduced word of the form `c a c^{-1}` (single conjugated letter)
/// into `(c, a)`. Fails when the word is not of that shape.
pub fn split_conjugate_letter(sys: &FactorSystem, w: &Word) -> Result<(Word, Letter), AutoError> {
    let letters = w.letters();
    if letters.len().is_multiple_of(2) {
        return Err(AutoError::MalformedImage);
    }
    let s = letters.len() / 2;
    for i in 0..s {
        let a = letters[i];
        let b = letters[letters.len() - 1 - i];
        if a.factor != b.factor || sys.factor(a.factor).mul(a.elem, b.elem) != 0 {
            return Err(AutoError::MalformedImage);
        }
    }
    let prefix = Word::from_reduced(letters[..s].to_vec());
    Ok((prefix, letters[s]))
}

/// The conjugator `c` with `f(A_k) = c A_k c^{-1}`, normalized to not end in
/// a factor-`k` letter. Errors with `MalformedImage` when the image of some
/// element of `A_k` is not a conjugated letter of factor `k`.
pub fn factor_conjugator(
    sys: &FactorSystem,
    f: &OuterAutoWord,
    k: usize,
) -> Result<Word, AutoError> {
    if k >= sys.n() {
        return Err(AutoError::InvalidFactor { got: k, n: sys.n() });
    }
    if sys.factor(k).order() < 2 {
        return Ok(Word::empty());
    }
    let a = Word::letter(k, 1);
    let image = apply(sys, f, &a)?;
    let (c, mid) = split_conjugate_letter(sys, &image)?;
    if mid.factor != k {
        return Err(AutoError::MalformedImage);
    }
    Ok(crate::gog::normalize_conjugator(sys, k, &c))
}

/// Decides innerness. Returns the conjugator `h` with `f(x) = h x h^{-1}` for
/// every factor element `x`, when one exists.
pub fn is_inner(sys: &FactorSystem, f: &OuterAutoWord) -> Result<Option<Word>, AutoError> {
    // Anchor on the first nontrivial factor; a candidate conjugator is
    // determined up to right multiplication by that factor.
    let anchor = match (0..sys.n()).find(|&i| sys.factor(i).order() > 1) {
        Some(i) => i,
        None => return Ok(Some(Word::empty())),
    };
    let image = apply(sys, f, &Word::letter(anchor, 1))?;
    let (prefix, mid) = split_conjugate_letter(sys, &image)?;
    if mid.factor != anchor {
        return Err(AutoError::MalformedImage);
    }
    let u = crate::gog::normalize_conjugator(sys, anchor, &prefix);
    'cand: for a in sys.factor(anchor).elements() {
        let mut h = u.clone();
        if a != 0 {
            h = words::mul(sys, &u, &Word::letter(anchor, a));
        }
        for j in 0..sys.n() {
            for x in sys.factor(j).nontrivial() {
                let lhs = apply(sys, f, &Word::letter(j, x))?;
                let rhs = words::conj(sys, &Word::letter(j, x), &h);
                if lhs != rhs {
                    continue 'cand;
                }
            }
        }
        return Ok(Some(h));
    }
    Ok(None)
}

/// True iff `f` and `g` define the same outer class.
pub fn outer_equal(
    sys: &FactorSystem,
    f: &OuterAutoWord,
    g: &OuterAutoWord,
) -> Result<bool, AutoError> {
    Ok(is_inner(sys, &compose(f, &invert(g)))?.is_some())
}

/// Action of an outer automorphism on a marking.
///
/// The new marking carries, at the factor-`k` vertex, the stabilizer of that
/// vertex for the twisted action, which is the preimage `f^{-1}(w A_k w^{-1})`
/// of the old stabilizer.
pub fn act_on_gog(
    sys: &FactorSystem,
    f: &OuterAutoWord,
    x: &GraphOfGroups,
) -> Result<GraphOfGroups, AutoError> {
    let inv_f = invert(f);
    let mut conjugators: Vec<Option<Word>> = vec![None; sys.n()];
    let mut labels = Vec::with_capacity(x.labels.len());
    for label in &x.labels {
        match label {
            VertexLabel::Trivial => labels.push(VertexLabel::Trivial),
            VertexLabel::Peripheral { factor, conj } => {
                let k = *factor;
                if conjugators[k].is_none() {
                    conjugators[k] = Some(factor_conjugator(sys, &inv_f, k)?);
                }
                let c_k = conjugators[k].as_ref().unwrap();
                let image_w = apply(sys, &inv_f, conj)?;
                let new_conj = words::mul(sys, &image_w, c_k);
                labels.push(VertexLabel::peripheral(sys, k, &new_conj));
            }
        }
    }
    Ok(GraphOfGroups {
        labels,
        edges: x.edges.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{cyclic, Elem, FactorSystem};

    fn sys_n(n: usize) -> FactorSystem {
        FactorSystem::new((0..n).map(|_| cyclic(2).unwrap()).collect()).unwrap()
    }

    fn a(k: usize) -> Word {
        Word::letter(k, 1)
    }

    #[test]
    fn generator_images() {
        let sys = sys_n(3);
        // F_{A_1}^{a_2}(a_1) = a_2 a_1 a_2^{-1}; fixed on other factors.
        let f = generator(&sys, 0, &a(1)).unwrap();
        let img = apply(&sys, &f, &a(0)).unwrap();
        assert_eq!(img, words::conj(&sys, &a(0), &a(1)));
        assert_eq!(img.len(), 3);
        assert_eq!(apply(&sys, &f, &a(1)).unwrap(), a(1));
    }

    #[test]
    fn generator_word_decomposition() {
        let sys = sys_n(3);
        // Conjugator a_2 a_3 equals the composition of the a_3 generator
        // after the a_2 generator, on every factor letter.
        let w = words::mul(&sys, &a(1), &a(2));
        let f = generator(&sys, 0, &w).unwrap();
        let g = compose(
            &generator(&sys, 0, &a(2)).unwrap(),
            &generator(&sys, 0, &a(1)).unwrap(),
        );
        for j in 0..3 {
            assert_eq!(
                apply(&sys, &f, &a(j)).unwrap(),
                apply(&sys, &g, &a(j)).unwrap()
            );
        }
    }

    #[test]
    fn generator_rejects_identity_and_bad_factor() {
        let sys = sys_n(2);
        assert!(matches!(
            generator(&sys, 0, &Word::empty()),
            Err(AutoError::IdentityGenerator)
        ));
        assert!(matches!(
            generator(&sys, 5, &a(1)),
            Err(AutoError::InvalidFactor { .. })
        ));
    }

    #[test]
    fn apply_word_examples() {
        let sys = sys_n(4);
        // Identity composition.
        let id = OuterAutoWord::identity();
        let w = words::mul(&sys, &a(0), &a(2));
        assert_eq!(apply(&sys, &id, &w).unwrap(), w);

        // f = gen(3,[a1]) ∘ gen(3,[a2]): single-letter oracle composition.
        // Leftmost applied last, so a3 maps first to a2·a3·a2^{-1} and then the
        // factor-3 letter inside is conjugated by a1.
        let f = compose(
            &generator(&sys, 2, &a(0)).unwrap(),
            &generator(&sys, 2, &a(1)).unwrap(),
        );
        let step1 = words::conj(&sys, &a(2), &a(1));
        let oracle = {
            // Conjugate only the factor-3 letter by a1.
            let mut r = Reducer::new(&sys);
            for l in step1.letters() {
                if l.factor == 2 {
                    r.push(0, 1);
                    r.push(l.factor, l.elem);
                    r.push(0, 1);
                } else {
                    r.push(l.factor, l.elem);
                }
            }
            r.finish()
        };
        assert_eq!(apply(&sys, &f, &a(2)).unwrap(), oracle);
        assert_eq!(
            oracle,
            reduce_pairs(&sys, &[(1, 1), (0, 1), (2, 1), (0, 1), (1, 1)])
        );

        // f = gen(1,[a2]) on word [a1,a3] -> [a2,a1,a2,a3].
        let f = generator(&sys, 0, &a(1)).unwrap();
        let img = apply(&sys, &f, &words::mul(&sys, &a(0), &a(2))).unwrap();
        assert_eq!(
            img,
            reduce_pairs(&sys, &[(1, 1), (0, 1), (1, 1), (2, 1)])
        );
    }

    fn reduce_pairs(sys: &FactorSystem, pairs: &[(usize, Elem)]) -> Word {
        words::reduce(sys, pairs).unwrap()
    }

    #[test]
    fn compose_invert_laws() {
        let sys = sys_n(4);
        let f = compose(
            &generator(&sys, 0, &words::mul(&sys, &a(1), &a(2))).unwrap(),
            &generator(&sys, 3, &a(0)).unwrap(),
        );
        let fi = compose(&f, &invert(&f));
        for j in 0..4 {
            assert_eq!(apply(&sys, &fi, &a(j)).unwrap(), a(j));
        }
        // invert(gen(i,w)) applied to x in A_i gives w^{-1} x w.
        let g = generator(&sys, 1, &words::mul(&sys, &a(0), &a(2))).unwrap();
        let w_inv = words::inv(&sys, &words::mul(&sys, &a(0), &a(2)));
        assert_eq!(
            apply(&sys, &invert(&g), &a(1)).unwrap(),
            words::conj(&sys, &a(1), &w_inv)
        );
    }

    #[test]
    fn different_base_generators_commute() {
        let sys = sys_n(4);
        // k=1, m=2 with conjugators avoiding factors 1,2.
        let f = generator(&sys, 0, &a(2)).unwrap();
        let g = generator(&sys, 1, &a(3)).unwrap();
        for j in 0..4 {
            assert_eq!(
                apply(&sys, &compose(&f, &g), &a(j)).unwrap(),
                apply(&sys, &compose(&g, &f), &a(j)).unwrap()
            );
        }
    }

    #[test]
    fn inner_identities() {
        let sys = sys_n(4);
        // Empty composition is inner with trivial conjugator.
        assert_eq!(
            is_inner(&sys, &OuterAutoWord::identity()).unwrap(),
            Some(Word::empty())
        );
        // The product of gen(k,[a1]) over all k conjugates everything by a1.
        let mut f = OuterAutoWord::identity();
        for k in 0..4 {
            f = compose(&f, &generator(&sys, k, &a(0)).unwrap());
        }
        assert_eq!(is_inner(&sys, &f).unwrap(), Some(a(0)));
        // Over C2*C2 conjugation by b fixes the abelian A_2 pointwise, so
        // F_{A_1}^b coincides with the inner automorphism by b.
        let sys2 = sys_n(2);
        let g = generator(&sys2, 0, &Word::letter(1, 1)).unwrap();
        assert_eq!(is_inner(&sys2, &g).unwrap(), Some(Word::letter(1, 1)));
        // With a third factor present the same twist is no longer inner.
        let sys3 = sys_n(3);
        let g = generator(&sys3, 0, &Word::letter(1, 1)).unwrap();
        assert_eq!(is_inner(&sys3, &g).unwrap(), None);
    }

    #[test]
    fn outer_equality() {
        let sys = sys_n(4);
        let f = generator(&sys, 0, &a(1)).unwrap();
        assert!(outer_equal(&sys, &f, &f).unwrap());
        assert!(!outer_equal(
            &sys,
            &generator(&sys, 0, &a(1)).unwrap(),
            &generator(&sys, 0, &a(2)).unwrap()
        )
        .unwrap());
        // From the inner identity: gen(1,[a2])∘gen(3,[a2])∘gen(4,[a2])
        // equals invert(gen(2,[a2])) in Out.
        let lhs = compose(
            &compose(
                &generator(&sys, 0, &a(1)).unwrap(),
                &generator(&sys, 2, &a(1)).unwrap(),
            ),
            &generator(&sys, 3, &a(1)).unwrap(),
        );
        let rhs = invert(&generator(&sys, 1, &a(1)).unwrap());
        assert!(outer_equal(&sys, &lhs, &rhs).unwrap());
    }

    #[test]
    fn homomorphism_and_conjugacy_preservation() {
        let sys = sys_n(4);
        let f = compose(
            &generator(&sys, 0, &a(1)).unwrap(),
            &generator(&sys, 2, &words::mul(&sys, &a(0), &a(3))).unwrap(),
        );
        let g = generator(&sys, 1, &a(2)).unwrap();
        let x = reduce_pairs(&sys, &[(0, 1), (1, 1), (2, 1)]);
        let y = reduce_pairs(&sys, &[(3, 1), (0, 1)]);
        // Homomorphism in the composition.
        assert_eq!(
            apply(&sys, &compose(&f, &g), &x).unwrap(),
            apply(&sys, &f, &apply(&sys, &g, &x).unwrap()).unwrap()
        );
        // Products are preserved.
        assert_eq!(
            apply(&sys, &f, &words::mul(&sys, &x, &y)).unwrap(),
            words::mul(
                &sys,
                &apply(&sys, &f, &x).unwrap(),
                &apply(&sys, &f, &y).unwrap()
            )
        );
        // Every factor maps to a conjugate of itself.
        for k in 0..4 {
            let c = factor_conjugator(&sys, &f, k).unwrap();
            for e in sys.factor(k).nontrivial() {
                assert_eq!(
                    apply(&sys, &f, &Word::letter(k, e)).unwrap(),
                    words::conj(&sys, &Word::letter(k, e), &c)
                );
            }
        }
    }
}
