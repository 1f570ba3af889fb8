//! Words in the free product `G ∗ F_n ∗ ℤ` and their homomorphic images in
//! permutation groups.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::EnumeratedGroup;
use crate::perm::Permutation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("cannot parse word {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("G element {0} out of range")]
    GOutOfRange(usize),
    #[error("free letter f{0} out of range")]
    LetterOutOfRange(usize),
    #[error("the free product has no ℤ factor")]
    NoZFactor,
    #[error("ball of radius {radius} exceeds the cap of {cap} words; sizes by radius so far: {growth:?}")]
    BallOverCap { radius: usize, cap: usize, growth: Vec<usize> },
    #[error("assignment is not a homomorphism on G: generator {generator} times element {element}")]
    NotHomomorphism { generator: usize, element: usize },
    #[error("assignment arity mismatch: {0}")]
    Arity(String),
}

/// One factor's worth of a free-product word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Syllable {
    /// A non-identity element of `G`, by index.
    G(usize),
    /// A freely reduced nonempty word: `(letter, exponent)` with zero-based letters.
    Free(Vec<(u32, i32)>),
    /// A nonzero power of the `ℤ` generator `t`.
    Z(i64),
}

impl Syllable {
    fn tag(&self) -> u8 {
        match self {
            Syllable::G(_) => 0,
            Syllable::Free(_) => 1,
            Syllable::Z(_) => 2,
        }
    }
}

/// A word in normal form, or a raw syllable list before reduction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<Syllable>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.0
    }

    pub fn g(x: usize) -> Self {
        Word(vec![Syllable::G(x)])
    }

    /// Free letter `letter` (zero-based) to the power `exp`.
    pub fn letter(letter: u32, exp: i32) -> Self {
        Word(vec![Syllable::Free(vec![(letter, exp)])])
    }

    pub fn t(exp: i64) -> Self {
        Word(vec![Syllable::Z(exp)])
    }
}

/// The free product `G ∗ F_n ∗ ℤ` (the `ℤ` factor is optional).
#[derive(Debug, Clone)]
pub struct FreeProduct {
    g: Arc<EnumeratedGroup>,
    letters: usize,
    has_z: bool,
}

fn push_free(stack: &mut Vec<(u32, i32)>, letter: u32, exp: i32) {
    if exp == 0 {
        return;
    }
    match stack.last_mut() {
        Some(top) if top.0 == letter => {
            top.1 += exp;
            if top.1 == 0 {
                stack.pop();
            }
        }
        _ => stack.push((letter, exp)),
    }
}

impl FreeProduct {
    pub fn new(g: Arc<EnumeratedGroup>, letters: usize, has_z: bool) -> Self {
        FreeProduct { g, letters, has_z }
    }

    pub fn g(&self) -> &Arc<EnumeratedGroup> {
        &self.g
    }

    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn has_z(&self) -> bool {
        self.has_z
    }

    pub fn check(&self, w: &Word) -> Result<(), WordError> {
        for s in &w.0 {
            match s {
                Syllable::G(x) if *x >= self.g.order() => return Err(WordError::GOutOfRange(*x)),
                Syllable::Free(ls) => {
                    for &(l, _) in ls {
                        if l as usize >= self.letters {
                            return Err(WordError::LetterOutOfRange(l as usize + 1));
                        }
                    }
                }
                Syllable::Z(_) if !self.has_z => return Err(WordError::NoZFactor),
                _ => {}
            }
        }
        Ok(())
    }

    /// Reduces a raw syllable list: merges neighbours from the same factor,
    /// drops identities and freely reduces free-group payloads.
    pub fn normal_form(&self, raw: &Word) -> Word {
        let mut out: Vec<Syllable> = Vec::with_capacity(raw.0.len());
        for s in &raw.0 {
            self.push(&mut out, s.clone());
        }
        Word(out)
    }

    fn push(&self, out: &mut Vec<Syllable>, s: Syllable) {
        let s = match s {
            Syllable::G(0) | Syllable::Z(0) => return,
            Syllable::Free(ls) => {
                let mut red = Vec::with_capacity(ls.len());
                for (l, e) in ls {
                    push_free(&mut red, l, e);
                }
                if red.is_empty() {
                    return;
                }
                Syllable::Free(red)
            }
            other => other,
        };
        match out.last_mut() {
            Some(top) if top.tag() == s.tag() => {
                let merged = match (top.clone(), s) {
                    (Syllable::G(a), Syllable::G(b)) => Syllable::G(self.g.mul(a, b)),
                    (Syllable::Z(a), Syllable::Z(b)) => Syllable::Z(a + b),
                    (Syllable::Free(mut a), Syllable::Free(b)) => {
                        for (l, e) in b {
                            push_free(&mut a, l, e);
                        }
                        Syllable::Free(a)
                    }
                    _ => unreachable!("tags match"),
                };
                out.pop();
                let empty = matches!(&merged, Syllable::G(0) | Syllable::Z(0))
                    || matches!(&merged, Syllable::Free(v) if v.is_empty());
                if !empty {
                    out.push(merged);
                }
            }
            _ => out.push(s),
        }
    }

    pub fn mul(&self, a: &Word, b: &Word) -> Word {
        let mut out = a.0.clone();
        for s in &b.0 {
            self.push(&mut out, s.clone());
        }
        Word(out)
    }

    pub fn inverse(&self, w: &Word) -> Word {
        Word(
            w.0.iter()
                .rev()
                .map(|s| match s {
                    Syllable::G(x) => Syllable::G(self.g.inv(*x)),
                    Syllable::Z(k) => Syllable::Z(-k),
                    Syllable::Free(ls) => Syllable::Free(ls.iter().rev().map(|&(l, e)| (l, -e)).collect()),
                })
                .collect(),
        )
    }

    /// `V ∪ V⁻¹` without the identity and without duplicates, in first-seen order.
    pub fn symmetrize(&self, v: &[Word]) -> Vec<Word> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for w in v {
            let w = self.normal_form(w);
            for x in [w.clone(), self.inverse(&w)] {
                if !x.is_identity() && seen.insert(x.clone()) {
                    out.push(x);
                }
            }
        }
        out
    }

    /// Breadth-first enumeration of all elements of `V`-length at most `radius`.
    pub fn ball(&self, v: &[Word], radius: usize, cap: usize) -> Result<Ball, WordError> {
        let gens = self.symmetrize(v);
        let mut words = vec![Word::identity()];
        let mut lengths = vec![0usize];
        let mut parent = vec![None];
        let mut index: HashMap<Word, usize> = HashMap::from([(Word::identity(), 0)]);
        let mut growth = vec![1usize];
        let mut frontier = 0..1;
        for r in 1..=radius {
            let start = words.len();
            for x in frontier.clone() {
                for (k, gk) in gens.iter().enumerate() {
                    let y = self.mul(&words[x], gk);
                    if index.contains_key(&y) {
                        continue;
                    }
                    if words.len() >= cap {
                        growth.push(words.len() - start);
                        return Err(WordError::BallOverCap { radius: r, cap, growth });
                    }
                    index.insert(y.clone(), words.len());
                    words.push(y);
                    lengths.push(r);
                    parent.push(Some((k, x)));
                }
            }
            growth.push(words.len() - start);
            frontier = start..words.len();
            if frontier.is_empty() {
                break;
            }
        }
        Ok(Ball { generators: gens, words, lengths, parent, growth })
    }

    /// `ℓ_V(w)`, or `None` if `w` is not a product of at most `cap` elements of `V ∪ V⁻¹`.
    pub fn reduced_length(&self, w: &Word, v: &[Word], cap: usize, ball_cap: usize) -> Result<Option<usize>, WordError> {
        let target = self.normal_form(w);
        if target.is_identity() {
            return Ok(Some(0));
        }
        let gens = self.symmetrize(v);
        let mut seen: HashSet<Word> = HashSet::from([Word::identity()]);
        let mut frontier = vec![Word::identity()];
        for r in 1..=cap {
            let mut next = Vec::new();
            for x in &frontier {
                for g in &gens {
                    let y = self.mul(x, g);
                    if y == target {
                        return Ok(Some(r));
                    }
                    if seen.insert(y.clone()) {
                        if seen.len() > ball_cap {
                            return Err(WordError::BallOverCap { radius: r, cap: ball_cap, growth: vec![seen.len()] });
                        }
                        next.push(y);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(None)
    }

    pub fn parse(&self, text: &str) -> Result<Word, WordError> {
        let w = parse_word(text)?;
        self.check(&w)?;
        Ok(self.normal_form(&w))
    }
}

/// The elements of a word ball with breadth-first parent pointers:
/// `words[i] = words[parent] · generators[k]` for `parent[i] = Some((k, parent))`.
#[derive(Debug, Clone)]
pub struct Ball {
    pub generators: Vec<Word>,
    pub words: Vec<Word>,
    pub lengths: Vec<usize>,
    pub parent: Vec<Option<(usize, usize)>>,
    /// Number of new words at each radius, starting with radius 0.
    pub growth: Vec<usize>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Images of every ball element under `hom`, computed along parent pointers.
    pub fn images(&self, hom: &Homomorphism) -> Vec<Permutation> {
        let mut out = Vec::with_capacity(self.words.len());
        self.for_each_image(hom, |_, p| {
            out.push(p.clone());
            true
        });
        out
    }

    /// Visits `(index, image)` in breadth-first order until `visit` returns
    /// false. Only images of words that can be parents are retained.
    pub fn for_each_image(&self, hom: &Homomorphism, mut visit: impl FnMut(usize, &Permutation) -> bool) {
        let gen_images: Vec<Permutation> = self.generators.iter().map(|g| hom.evaluate(g)).collect();
        let last = self.lengths.last().copied().unwrap_or(0);
        let mut kept: Vec<Permutation> = Vec::new();
        for (i, p) in self.parent.iter().enumerate() {
            let img = match p {
                None => Permutation::identity(hom.degree()),
                Some((k, x)) => kept[*x].compose(&gen_images[*k]),
            };
            if !visit(i, &img) {
                return;
            }
            if self.lengths[i] < last {
                kept.push(img);
            }
        }
    }
}

fn parse_word(text: &str) -> Result<Word, WordError> {
    let err = |reason: &str| WordError::Parse { text: text.to_string(), reason: reason.to_string() };
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "e" {
        return Ok(Word::identity());
    }
    let mut out = Vec::new();
    for token in trimmed.split('*') {
        let token = token.trim();
        let (head, exp) = match token.split_once('^') {
            Some((h, e)) => (h, e.trim().parse::<i64>().map_err(|_| err("bad exponent"))?),
            None => (token, 1),
        };
        let mut chars = head.chars();
        let kind = chars.next().ok_or_else(|| err("empty factor"))?;
        let rest = chars.as_str();
        match kind {
            'e' if rest.is_empty() => {}
            'g' => {
                if exp != 1 {
                    return Err(err("G elements take no exponent"));
                }
                out.push(Syllable::G(rest.parse().map_err(|_| err("bad G index"))?));
            }
            'f' => {
                let l: u32 = rest.parse().map_err(|_| err("bad letter index"))?;
                if l == 0 {
                    return Err(err("free letters are numbered from 1"));
                }
                let e = i32::try_from(exp).map_err(|_| err("exponent too large"))?;
                out.push(Syllable::Free(vec![(l - 1, e)]));
            }
            't' if rest.is_empty() => out.push(Syllable::Z(exp)),
            _ => return Err(err("expected g<k>, f<k>[^e] or t[^e]")),
        }
    }
    Ok(Word(out))
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let mut parts = Vec::new();
        for s in &self.0 {
            match s {
                Syllable::G(x) => parts.push(format!("g{x}")),
                Syllable::Z(1) => parts.push("t".to_string()),
                Syllable::Z(k) => parts.push(format!("t^{k}")),
                Syllable::Free(ls) => {
                    for &(l, e) in ls {
                        if e == 1 {
                            parts.push(format!("f{}", l + 1));
                        } else {
                            parts.push(format!("f{}^{e}", l + 1));
                        }
                    }
                }
            }
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// A homomorphism from `G ∗ F_n ∗ ℤ` into `Sym(degree)`, given by the image of
/// every element of `G`, of every free letter and of `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homomorphism {
    pub degree: usize,
    pub g_images: Vec<Permutation>,
    pub letters: Vec<Permutation>,
    pub t: Option<Permutation>,
}

impl Homomorphism {
    /// Extends images of `G`'s generators along its enumeration and checks the
    /// result is a homomorphism.
    pub fn from_generators(
        g: &EnumeratedGroup,
        g_gen_images: &[Permutation],
        letters: Vec<Permutation>,
        t: Option<Permutation>,
    ) -> Result<Self, WordError> {
        if g_gen_images.len() != g.generators().len() {
            return Err(WordError::Arity(format!(
                "{} images for {} generators of G",
                g_gen_images.len(),
                g.generators().len()
            )));
        }
        let degree = letters
            .first()
            .or(t.as_ref())
            .or(g_gen_images.first())
            .map_or(1, Permutation::degree);
        for p in g_gen_images.iter().chain(&letters).chain(t.iter()) {
            if p.degree() != degree {
                return Err(WordError::Arity(format!("degree {} vs {degree}", p.degree())));
            }
        }
        let mut g_images = Vec::with_capacity(g.order());
        for x in 0..g.order() {
            let mut img = Permutation::identity(degree);
            for &k in g.word_for(x).iter().rev() {
                img = g_gen_images[k].compose(&img);
            }
            g_images.push(img);
        }
        let gens = g.generator_indices();
        for (k, &s) in gens.iter().enumerate() {
            for x in 0..g.order() {
                if g_images[g.mul(s, x)] != g_gen_images[k].compose(&g_images[x]) {
                    return Err(WordError::NotHomomorphism { generator: k, element: x });
                }
            }
        }
        Ok(Homomorphism { degree, g_images, letters, t })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn evaluate(&self, w: &Word) -> Permutation {
        let mut out = Permutation::identity(self.degree);
        for s in &w.0 {
            let p = match s {
                Syllable::G(x) => self.g_images[*x].clone(),
                Syllable::Z(k) => self.t.as_ref().expect("ℤ factor assigned").pow(*k),
                Syllable::Free(ls) => {
                    let mut p = Permutation::identity(self.degree);
                    for &(l, e) in ls {
                        p = p.compose(&self.letters[l as usize].pow(e as i64));
                    }
                    p
                }
            };
            out = out.compose(&p);
        }
        out
    }

    /// All images of the generators of the target group: `G`'s generators,
    /// the letters and `t`.
    pub fn generator_images(&self, g: &EnumeratedGroup) -> Vec<Permutation> {
        let mut out: Vec<Permutation> = g.generator_indices().iter().map(|&k| self.g_images[k].clone()).collect();
        out.extend(self.letters.iter().cloned());
        out.extend(self.t.iter().cloned());
        out
    }
}
