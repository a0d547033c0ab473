use std::fmt;

use serde::{Deserialize, Serialize};

/// Reduced word in the free group on `g` generators.
///
/// Letter `+i` stands for generator `i` (1-based) and `-i` for its inverse.
/// The word `s1 s2 … sn` acts as `γ_{s1} ∘ γ_{s2} ∘ … ∘ γ_{sn}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupWord {
    letters: Vec<i32>,
}

impl GroupWord {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Freely reduces the given letters. Zero letters are rejected.
    pub fn new(letters: impl IntoIterator<Item = i32>) -> Self {
        let mut out: Vec<i32> = Vec::new();
        for s in letters {
            assert!(s != 0, "letter 0 is not a generator");
            if out.last() == Some(&-s) {
                out.pop();
            } else {
                out.push(s);
            }
        }
        Self { letters: out }
    }

    pub fn generator(i: usize, inverse: bool) -> Self {
        let s = i as i32;
        Self { letters: vec![if inverse { -s } else { s }] }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn last(&self) -> Option<i32> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> Self {
        Self { letters: self.letters.iter().rev().map(|s| -s).collect() }
    }

    /// `self ∘ other`, reduced.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Appends one letter on the right, reducing.
    pub fn push(&self, s: i32) -> Self {
        let mut letters = self.letters.clone();
        if letters.last() == Some(&-s) {
            letters.pop();
        } else {
            letters.push(s);
        }
        Self { letters }
    }

    /// Largest generator index used.
    pub fn max_generator(&self) -> usize {
        self.letters.iter().map(|s| s.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|&s| if s > 0 { format!("g{s}") } else { format!("g{}^-1", -s) })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// `2g(2g-1)^{ℓ-1}` for `ℓ ≥ 1`, `1` for `ℓ = 0`.
pub fn word_count(g: usize, len: usize) -> u128 {
    match (g, len) {
        (_, 0) => 1,
        (0, _) => 0,
        _ => 2 * g as u128 * (2 * g as u128 - 1).pow(len as u32 - 1),
    }
}

/// All `2g` one-letter alphabet symbols in a fixed order.
pub fn alphabet(g: usize) -> Vec<i32> {
    (1..=g as i32).flat_map(|i| [i, -i]).collect()
}

/// Breadth-first enumeration of reduced words up to a maximum length.
///
/// Each length block is generated from the previous one by appending every
/// letter except the inverse of the last letter.
#[derive(Clone, Debug)]
pub struct WordEnumerator {
    g: usize,
    max_len: usize,
    layer: Vec<GroupWord>,
    layer_len: usize,
    pos: usize,
}

impl WordEnumerator {
    pub fn new(g: usize, max_len: usize) -> Self {
        Self { g, max_len, layer: vec![GroupWord::identity()], layer_len: 0, pos: 0 }
    }

    fn advance_layer(&mut self) -> bool {
        if self.layer_len >= self.max_len || self.g == 0 {
            return false;
        }
        let letters = alphabet(self.g);
        let next: Vec<GroupWord> = self
            .layer
            .iter()
            .flat_map(|w| {
                let last = w.last();
                letters.iter().filter(move |&&s| Some(-s) != last).map(move |&s| w.push(s))
            })
            .collect();
        self.layer = next;
        self.layer_len += 1;
        self.pos = 0;
        true
    }
}

impl Iterator for WordEnumerator {
    type Item = GroupWord;

    fn next(&mut self) -> Option<GroupWord> {
        while self.pos >= self.layer.len() {
            if !self.advance_layer() {
                return None;
            }
        }
        self.pos += 1;
        Some(self.layer[self.pos - 1].clone())
    }
}

/// Words of length at most `max_len`, grouped by length.
pub fn enumerate_words(g: usize, max_len: usize) -> Vec<Vec<GroupWord>> {
    let mut blocks = vec![Vec::new(); max_len + 1];
    for w in WordEnumerator::new(g, max_len) {
        blocks[w.len()].push(w);
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn counts_small_cases() {
        let blocks = enumerate_words(2, 2);
        assert_eq!(blocks[0].len(), 1);
        assert_eq!(blocks[1].len(), 4);
        assert_eq!(blocks[2].len(), 12);
        let g1 = enumerate_words(1, 5);
        assert_eq!(g1[5], vec![GroupWord::new([1; 5]), GroupWord::new([-1; 5])]);
    }

    #[test]
    fn counts_match_formula_and_are_distinct() {
        for g in 1..=3 {
            let max = if g == 3 { 6 } else { 8 };
            let blocks = enumerate_words(g, max);
            let mut seen = HashSet::new();
            for (len, block) in blocks.iter().enumerate() {
                assert_eq!(block.len() as u128, word_count(g, len), "g={g} len={len}");
                for w in block {
                    assert_eq!(GroupWord::new(w.letters().iter().copied()), *w);
                    assert!(seen.insert(w.clone()));
                }
            }
        }
    }

    #[test]
    fn display() {
        assert_eq!(GroupWord::identity().to_string(), "1");
        assert_eq!(GroupWord::new([1, -2]).to_string(), "g1 g2^-1");
    }

    fn arb_word() -> impl Strategy<Value = GroupWord> {
        prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2, 3, -3]), 0..12).prop_map(GroupWord::new)
    }

    proptest! {
        #[test]
        fn word_times_inverse_is_identity(w in arb_word()) {
            prop_assert!(w.compose(&w.inverse()).is_identity());
            prop_assert!(w.inverse().compose(&w).is_identity());
            prop_assert_eq!(w.len(), w.inverse().len());
        }

        #[test]
        fn composition_length_subadditive(u in arb_word(), v in arb_word()) {
            prop_assert!(u.compose(&v).len() <= u.len() + v.len());
        }

        #[test]
        fn composition_associative(u in arb_word(), v in arb_word(), w in arb_word()) {
            prop_assert_eq!(u.compose(&v).compose(&w), u.compose(&v.compose(&w)));
        }
    }
}
