use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;

use super::element::GroupElement;
use crate::error::{Error, Result};
use crate::Tolerances;

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

/// A word in the generators; the leftmost letter acts last.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Free reduction: cancels adjacent `x x^-1` pairs.
    pub fn reduced(&self) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    /// Renders with generator names, grouping runs as powers: `A B^-1 A^2`.
    pub fn display(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "e".to_string();
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == l {
                run += 1;
            }
            let name = &names[l.generator];
            let exp = if l.inverse { -(run as i64) } else { run as i64 };
            if exp == 1 {
                parts.push(name.clone());
            } else {
                parts.push(format!("{name}^{exp}"));
            }
            i += run;
        }
        parts.join(" ")
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.0.iter().map(|l| l.generator + 1).max().unwrap_or(0))
            .map(|i| format!("g{i}"))
            .collect();
        write!(f, "{}", self.display(&names))
    }
}

/// A finitely generated subgroup of PU(1,n) given by named generators.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    n: usize,
    names: Vec<String>,
    generators: Vec<GroupElement>,
    tolerances: Tolerances,
}

impl GroupSpec {
    pub fn new(
        n: usize,
        generators: Vec<(String, GroupElement)>,
        tolerances: Tolerances,
    ) -> Result<Self> {
        if n < 1 {
            return Err(Error::Argument("n must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        let mut names = Vec::new();
        let mut elems = Vec::new();
        for (i, (name, g)) in generators.into_iter().enumerate() {
            if g.dim() != n + 1 {
                return Err(Error::Dimension {
                    expected: n + 1,
                    got: g.dim(),
                });
            }
            if name.is_empty() || name.contains(char::is_whitespace) || name.contains('^') {
                return Err(Error::Argument(format!("invalid generator name {name:?}")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Argument(format!(
                    "duplicate generator name {name:?}"
                )));
            }
            let letter = Letter {
                generator: i,
                inverse: false,
            };
            elems.push(g.with_word(Word(vec![letter])));
            names.push(name);
        }
        Ok(Self {
            n,
            names,
            generators: elems,
            tolerances,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// Letters in shortlex order: `g0, g0^-1, g1, g1^-1, ...`.
    pub fn alphabet(&self) -> Vec<Letter> {
        (0..self.generators.len())
            .flat_map(|i| {
                [false, true].map(|inverse| Letter {
                    generator: i,
                    inverse,
                })
            })
            .collect()
    }

    pub fn letter_element(&self, l: Letter) -> GroupElement {
        let g = &self.generators[l.generator];
        if l.inverse {
            g.inverse()
        } else {
            g.clone()
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.dim(), self.tolerances)
    }

    /// Product of the letters, left to right.
    pub fn evaluate(&self, word: &Word) -> GroupElement {
        let mut acc = self.identity();
        for &l in word.letters().iter().rev() {
            acc = self.letter_element(l).compose(&acc);
        }
        acc.with_word(word.clone())
    }

    pub fn display_word(&self, word: &Word) -> String {
        word.display(&self.names)
    }
}

/// Parses `A B^-1 A^2`-style words: whitespace-separated generator names,
/// each with an optional integer power.
pub fn parse_word(spec: &GroupSpec, text: &str) -> Result<Word> {
    let mut letters = Vec::new();
    for token in text.split_whitespace() {
        let (name, exp) = match token.split_once('^') {
            Some((name, e)) => {
                let exp: i64 = e
                    .parse()
                    .map_err(|_| Error::Argument(format!("bad exponent in {token:?}")))?;
                (name, exp)
            }
            None => (token, 1),
        };
        let generator = spec
            .names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Argument(format!("unknown generator {name:?}")))?;
        let letter = Letter {
            generator,
            inverse: exp < 0,
        };
        letters.extend(std::iter::repeat_n(letter, exp.unsigned_abs() as usize));
    }
    Ok(Word(letters))
}

/// All freely reduced words of length `<= depth` in shortlex order, with
/// their elements. Elements are built by left multiplication of a letter
/// onto a shorter word; coincidences from group relations are kept.
pub fn words(spec: &GroupSpec, depth: usize) -> Vec<GroupElement> {
    let alphabet = spec.alphabet();
    let letter_elems: Vec<GroupElement> =
        alphabet.iter().map(|&l| spec.letter_element(l)).collect();
    let mut out = vec![spec.identity()];
    let mut level: Vec<GroupElement> = out.clone();
    for _ in 0..depth {
        let pairs: Vec<(usize, usize)> = alphabet
            .iter()
            .enumerate()
            .flat_map(|(ai, &a)| {
                level
                    .iter()
                    .enumerate()
                    .filter(move |(_, w)| w.word().letters().first() != Some(&a.inv()))
                    .map(move |(wi, _)| (ai, wi))
            })
            .collect();
        let next: Vec<GroupElement> = pairs
            .par_iter()
            .map(|&(ai, wi)| {
                let w = &level[wi];
                let word = Word(vec![alphabet[ai]]).concat(w.word());
                letter_elems[ai].compose(w).with_word(word)
            })
            .collect();
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::make_element;
    use crate::linalg::ComplexMatrix;

    fn hyperbolic(t: f64, axis: usize) -> ComplexMatrix {
        let mut rows = vec![vec![0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        rows[0][0] = t.cosh();
        rows[axis][axis] = t.cosh();
        rows[0][axis] = t.sinh();
        rows[axis][0] = t.sinh();
        ComplexMatrix::from_real_rows(&rows).unwrap()
    }

    fn spec(k: usize) -> GroupSpec {
        let tol = Tolerances::default();
        let gens = [
            ("A", hyperbolic(2f64.ln(), 1)),
            ("B", hyperbolic(4f64.ln(), 2)),
        ]
        .into_iter()
        .take(k)
        .map(|(n, m)| (n.to_string(), make_element(&m, &tol).unwrap()))
        .collect();
        GroupSpec::new(2, gens, tol).unwrap()
    }

    #[test]
    fn word_counts() {
        let one = spec(1);
        let w: Vec<String> = words(&one, 2)
            .iter()
            .map(|g| one.display_word(g.word()))
            .collect();
        assert_eq!(w, ["e", "A", "A^-1", "A^2", "A^-2"]);

        let two = spec(2);
        let w: Vec<String> = words(&two, 1)
            .iter()
            .map(|g| two.display_word(g.word()))
            .collect();
        assert_eq!(w, ["e", "A", "A^-1", "B", "B^-1"]);
        assert_eq!(words(&two, 2).len(), 17);
        assert_eq!(words(&two, 3).len(), 17 + 36);
    }

    #[test]
    fn shortlex_order_within_levels() {
        let two = spec(2);
        let all = words(&two, 3);
        for pair in all.windows(2) {
            let (a, b) = (pair[0].word(), pair[1].word());
            assert!(a.len() < b.len() || (a.len() == b.len() && a < b));
        }
        for g in &all {
            assert_eq!(g.word().reduced(), *g.word());
        }
    }

    #[test]
    fn word_elements_match_evaluation() {
        let two = spec(2);
        for g in words(&two, 3) {
            let direct = two.evaluate(g.word());
            let s = crate::linalg::sup_entry_norm(g.lift()).unwrap();
            assert!(g.lift().max_abs_diff(direct.lift()) < 1e-12 * s);
        }
    }

    #[test]
    fn parse_and_display() {
        let two = spec(2);
        let w = parse_word(&two, "A B^-1 A^2").unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(two.display_word(&w), "A B^-1 A^2");
        assert!(parse_word(&two, "C").is_err());
        assert!(parse_word(&two, "A^x").is_err());
        let e = parse_word(&two, "A A^-1").unwrap();
        assert!(e.reduced().is_empty());
        assert!(parse_word(&two, "A^0").unwrap().is_empty());
    }

    #[test]
    fn rejects_duplicate_names() {
        let tol = Tolerances::default();
        let g = make_element(&hyperbolic(1.0, 1), &tol).unwrap();
        let r = GroupSpec::new(2, vec![("A".into(), g.clone()), ("A".into(), g)], tol);
        assert!(r.is_err());
    }
}
