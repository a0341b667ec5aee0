//! Framed braid words and the `Z^n ⋊ B_n` decomposition.
//!
//! Generators are `σ_1..σ_{n-1}` (crossings) and `τ_1..τ_n` (ribbon twists),
//! subject to the braid relations, commuting twists, and
//! `σ_i τ_j = τ_{s_i(j)} σ_i` with `s_i` the transposition `(i i+1)`.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("bad token {0:?}: expected s<i> or t<i>, optionally followed by ^-1 or ^1")]
    BadToken(String),
    #[error("generator {generator} index {index} out of range for n = {n}")]
    IndexOutOfRange {
        generator: char,
        index: usize,
        n: usize,
    },
    #[error("strand count must be at least 1")]
    NoStrands,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Sigma(usize),
    Tau(usize),
}

impl Generator {
    pub fn index(self) -> usize {
        match self {
            Generator::Sigma(i) | Generator::Tau(i) => i,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Sigma(i) => write!(f, "s{i}"),
            Generator::Tau(i) => write!(f, "t{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: Generator,
    /// `+1` or `-1`.
    pub exponent: i8,
}

impl Letter {
    pub fn new(generator: Generator, exponent: i8) -> Self {
        debug_assert!(exponent == 1 || exponent == -1);
        Self {
            generator,
            exponent,
        }
    }

    pub fn inverse(self) -> Self {
        Self::new(self.generator, -self.exponent)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent < 0 {
            write!(f, "{}^-1", self.generator)
        } else {
            write!(f, "{}", self.generator)
        }
    }
}

/// A word in the framed braid group `FB_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FramedBraidWord {
    n: usize,
    letters: Vec<Letter>,
}

fn check_letter(n: usize, letter: Letter) -> Result<(), WordError> {
    let (ok, index, generator) = match letter.generator {
        Generator::Sigma(i) => (i >= 1 && i < n, i, 's'),
        Generator::Tau(i) => (i >= 1 && i <= n, i, 't'),
    };
    if ok {
        Ok(())
    } else {
        Err(WordError::IndexOutOfRange { generator, index, n })
    }
}

impl FramedBraidWord {
    pub fn new(n: usize, letters: Vec<Letter>) -> Result<Self, WordError> {
        if n == 0 {
            return Err(WordError::NoStrands);
        }
        for &l in &letters {
            check_letter(n, l)?;
        }
        Ok(Self { n, letters })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n: n.max(1),
            letters: Vec::new(),
        }
    }

    pub fn single(n: usize, generator: Generator, exponent: i8) -> Result<Self, WordError> {
        Self::new(n, vec![Letter::new(generator, exponent)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "strand counts differ");
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self { n: self.n, letters }
    }

    pub fn inverse(&self) -> Self {
        Self {
            n: self.n,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Conjugate `g · self · g⁻¹`.
    pub fn conjugate_by(&self, g: &Self) -> Self {
        g.concat(self).concat(&g.inverse())
    }

    /// Image in the symmetric group: `perm[j-1]` is the image of strand `j`
    /// under `π(σ_{i_1}) ∘ ... ∘ π(σ_{i_k})` (twists map to the identity).
    pub fn underlying_permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (1..=self.n).collect();
        for l in &self.letters {
            if let Generator::Sigma(i) = l.generator {
                // perm ← perm ∘ s_i
                perm.swap(i - 1, i);
            }
        }
        perm
    }

    pub fn semidirect_form(&self) -> SemidirectForm {
        let mut framing = vec![0i64; self.n];
        let mut braid = Vec::new();
        // running permutation of the braid prefix; β τ_j = τ_{perm(j)} β
        let mut perm: Vec<usize> = (1..=self.n).collect();
        for &l in &self.letters {
            match l.generator {
                Generator::Sigma(i) => {
                    braid.push(l);
                    perm.swap(i - 1, i);
                }
                Generator::Tau(j) => framing[perm[j - 1] - 1] += l.exponent as i64,
            }
        }
        SemidirectForm {
            framing,
            braid: FramedBraidWord { n: self.n, letters: braid },
        }
    }
}

impl fmt::Display for FramedBraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Serialize, Deserialize)]
struct WordJson {
    n: usize,
    letters: Vec<(String, usize, i8)>,
}

impl Serialize for FramedBraidWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WordJson {
            n: self.n,
            letters: self
                .letters
                .iter()
                .map(|l| match l.generator {
                    Generator::Sigma(i) => ("s".to_string(), i, l.exponent),
                    Generator::Tau(i) => ("t".to_string(), i, l.exponent),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FramedBraidWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = WordJson::deserialize(d)?;
        let mut letters = Vec::with_capacity(raw.letters.len());
        for (kind, i, e) in raw.letters {
            let generator = match kind.as_str() {
                "s" => Generator::Sigma(i),
                "t" => Generator::Tau(i),
                other => return Err(D::Error::custom(format!("unknown generator kind {other:?}"))),
            };
            if e != 1 && e != -1 {
                return Err(D::Error::custom(format!("exponent must be ±1, got {e}")));
            }
            letters.push(Letter::new(generator, e));
        }
        FramedBraidWord::new(raw.n, letters).map_err(D::Error::custom)
    }
}

/// `τ_1^{l_1}···τ_n^{l_n} · β` with `β` a pure σ-word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemidirectForm {
    pub framing: Vec<i64>,
    pub braid: FramedBraidWord,
}

impl SemidirectForm {
    /// Rebuild a framed word with all twists on the left.
    pub fn recombine(&self) -> FramedBraidWord {
        let n = self.braid.n;
        let mut letters = Vec::new();
        for (idx, &l) in self.framing.iter().enumerate() {
            let e: i8 = if l < 0 { -1 } else { 1 };
            for _ in 0..l.unsigned_abs() {
                letters.push(Letter::new(Generator::Tau(idx + 1), e));
            }
        }
        letters.extend_from_slice(&self.braid.letters);
        FramedBraidWord { n, letters }
    }
}

/// Action of a braid on framing vectors: `(σ·l)_k = l_{σ(k)}`.
pub fn act_on_framing(braid: &FramedBraidWord, framing: &[i64]) -> Vec<i64> {
    let perm = braid.underlying_permutation();
    perm.iter().map(|&p| framing[p - 1]).collect()
}

/// Parse whitespace-separated tokens `s<i>`, `t<i>`, optionally suffixed by `^-1`/`^1`.
pub fn parse_word(text: &str, n: usize) -> Result<FramedBraidWord, WordError> {
    let mut letters = Vec::new();
    for token in text.split_whitespace() {
        let bad = || WordError::BadToken(token.to_string());
        let (body, exponent) = match token.split_once('^') {
            Some((b, "-1")) => (b, -1),
            Some((b, "1")) | Some((b, "+1")) => (b, 1),
            Some(_) => return Err(bad()),
            None => (token, 1),
        };
        let mut chars = body.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let index: usize = digits.parse().map_err(|_| bad())?;
        let generator = match kind {
            's' | 'S' => Generator::Sigma(index),
            't' | 'T' => Generator::Tau(index),
            _ => return Err(bad()),
        };
        letters.push(Letter::new(generator, exponent));
    }
    FramedBraidWord::new(n, letters)
}

/// A defining relation `lhs = rhs` of `FB_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub lhs: FramedBraidWord,
    pub rhs: FramedBraidWord,
}

/// Every instance of the defining relations for `n` strands.
pub fn defining_relations(n: usize) -> Vec<Relation> {
    let s = |i: usize| Letter::new(Generator::Sigma(i), 1);
    let t = |i: usize| Letter::new(Generator::Tau(i), 1);
    let word = |letters: Vec<Letter>| FramedBraidWord { n, letters };
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        out.push(Relation {
            name: format!("s{i} s{} s{i} = s{} s{i} s{}", i + 1, i + 1, i + 1),
            lhs: word(vec![s(i), s(i + 1), s(i)]),
            rhs: word(vec![s(i + 1), s(i), s(i + 1)]),
        });
    }
    for i in 1..n {
        for j in (i + 2)..n {
            out.push(Relation {
                name: format!("s{i} s{j} = s{j} s{i}"),
                lhs: word(vec![s(i), s(j)]),
                rhs: word(vec![s(j), s(i)]),
            });
        }
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            out.push(Relation {
                name: format!("t{i} t{j} = t{j} t{i}"),
                lhs: word(vec![t(i), t(j)]),
                rhs: word(vec![t(j), t(i)]),
            });
        }
    }
    for i in 1..n {
        for j in 1..=n {
            let k = if j == i {
                i + 1
            } else if j == i + 1 {
                i
            } else {
                j
            };
            out.push(Relation {
                name: format!("s{i} t{j} = t{k} s{i}"),
                lhs: word(vec![s(i), t(j)]),
                rhs: word(vec![t(k), s(i)]),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let w = parse_word("s1 t2^-1", 2).unwrap();
        assert_eq!(
            w.letters(),
            &[
                Letter::new(Generator::Sigma(1), 1),
                Letter::new(Generator::Tau(2), -1)
            ]
        );
        assert!(parse_word("", 3).unwrap().is_empty());
        assert_eq!(
            parse_word("s3", 3),
            Err(WordError::IndexOutOfRange {
                generator: 's',
                index: 3,
                n: 3
            })
        );
        assert!(matches!(parse_word("x1", 3), Err(WordError::BadToken(_))));
        assert!(matches!(parse_word("s1^2", 3), Err(WordError::BadToken(_))));
        assert!(matches!(parse_word("t0", 3), Err(WordError::IndexOutOfRange { .. })));
    }

    #[test]
    fn semidirect_examples() {
        let f = parse_word("s1 t1", 2).unwrap().semidirect_form();
        assert_eq!(f.framing, vec![0, 1]);
        assert_eq!(f.braid.to_string(), "s1");
        let f = parse_word("t1 t2 t1", 2).unwrap().semidirect_form();
        assert_eq!(f.framing, vec![2, 1]);
        assert!(f.braid.is_empty());
        let f = parse_word("s1 t2", 2).unwrap().semidirect_form();
        assert_eq!(f.framing, vec![1, 0]);
    }

    #[test]
    fn permutation_examples() {
        assert_eq!(parse_word("s1", 2).unwrap().underlying_permutation(), vec![2, 1]);
        assert_eq!(parse_word("t3", 3).unwrap().underlying_permutation(), vec![1, 2, 3]);
        let a = parse_word("s1 s2 s1", 3).unwrap().underlying_permutation();
        let b = parse_word("s2 s1 s2", 3).unwrap().underlying_permutation();
        assert_eq!(a, vec![3, 2, 1]);
        assert_eq!(a, b);
    }

    #[test]
    fn json_form() {
        let w = parse_word("s1 t2^-1", 2).unwrap();
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"{"n":2,"letters":[["s",1,1],["t",2,-1]]}"#);
        let back: FramedBraidWord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<FramedBraidWord>(r#"{"n":2,"letters":[["s",2,1]]}"#).is_err());
    }

    #[test]
    fn relation_count() {
        // n=3: 1 braid, 0 far, 3 tau-tau, 6 sigma-tau
        assert_eq!(defining_relations(3).len(), 10);
        assert_eq!(defining_relations(1).len(), 0);
    }

    fn arb_word(n: usize, len: usize) -> impl Strategy<Value = FramedBraidWord> {
        let gen = (0..(2 * n - 1), prop::bool::ANY).prop_map(move |(g, inv)| {
            let generator = if g < n - 1 { Generator::Sigma(g + 1) } else { Generator::Tau(g - (n - 1) + 1) };
            Letter::new(generator, if inv { -1 } else { 1 })
        });
        prop::collection::vec(gen, 0..len).prop_map(move |letters| FramedBraidWord::new(n, letters).unwrap())
    }

    /// Apply a random rewrite that preserves the group element: insert g g⁻¹
    /// or replace one relation side by the other at a random position.
    fn rewrite(w: &FramedBraidWord, choice: usize, pos: usize) -> FramedBraidWord {
        let n = w.n();
        let rels = defining_relations(n);
        let mut letters = w.letters().to_vec();
        let pos = pos % (letters.len() + 1);
        if rels.is_empty() || choice.is_multiple_of(3) {
            let g = if n > 1 && choice.is_multiple_of(2) { Generator::Sigma(1 + choice % (n - 1)) } else { Generator::Tau(1 + choice % n) };
            let l = Letter::new(g, 1);
            letters.splice(pos..pos, [l, l.inverse()]);
        } else {
            let rel = &rels[choice % rels.len()];
            let (from, to) = if choice.is_multiple_of(2) { (&rel.lhs, &rel.rhs) } else { (&rel.rhs, &rel.lhs) };
            // insert from⁻¹·to, which is the identity element
            let ins: Vec<Letter> = from.inverse().letters().iter().chain(to.letters()).copied().collect();
            letters.splice(pos..pos, ins);
        }
        FramedBraidWord::new(n, letters).unwrap()
    }

    proptest! {
        #[test]
        fn normal_data_invariant_under_relations(
            (n, w) in (2usize..=5).prop_flat_map(|n| (Just(n), arb_word(n, 40))),
            moves in prop::collection::vec((0usize..1000, 0usize..1000), 1..6),
        ) {
            let base = w.semidirect_form();
            let mut current = w.clone();
            for (c, p) in moves {
                current = rewrite(&current, c, p);
            }
            let after = current.semidirect_form();
            prop_assert_eq!(&base.framing, &after.framing);
            prop_assert_eq!(
                base.braid.underlying_permutation(),
                after.braid.underlying_permutation()
            );
            prop_assert_eq!(base.braid.underlying_permutation(), w.underlying_permutation());
            prop_assert_eq!(current.n(), n);
        }

        #[test]
        fn framing_sum_preserved(
            w in (2usize..=5).prop_flat_map(|n| arb_word(n, 30)),
            framing in prop::collection::vec(-5i64..5, 5),
        ) {
            let f = &framing[..w.n()];
            let acted = act_on_framing(&w.semidirect_form().braid, f);
            prop_assert_eq!(acted.iter().sum::<i64>(), f.iter().sum::<i64>());
        }

        #[test]
        fn recombine_keeps_normal_data(w in (1usize..=5).prop_flat_map(|n| arb_word(n, 30))) {
            let sd = w.semidirect_form();
            prop_assert_eq!(sd.recombine().semidirect_form(), sd);
        }
    }
}
