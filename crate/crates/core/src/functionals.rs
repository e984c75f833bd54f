//! Truncated joint distributions of two-faced families.
//!
//! A [`MomentFunctional`] is a dense table of moments: one complex value for
//! every word over the alphabet up to a truncation order, with the empty word
//! pinned to 1.  A [`CumulantFunctional`] has the same shape with the empty
//! word pinned to 0.  The two are related by the bi-non-crossing partition
//! sums
//!
//! ```text
//! kappa(w)  = sum over pi in P^chi(n) of  phi_pi(w) * mu(s_chi^-1 pi, 1_n)
//! phi(w)    = sum over pi in P^chi(n) of  prod over blocks V of kappa(w|V)
//! ```
//!
//! where `chi` is the face pattern of the word.  Both transforms enumerate
//! `NC(n)` once and transport through `s_chi`, so they agree with the free
//! moment/cumulant formulas on single-face words.
//!
//! Words are the primary keys; the face pattern is always derived from the
//! letters, never stored separately.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{
    chi_permutation, is_bnc, noncrossing_with_mobius, transport_partition, ChiWord, Face,
    SetPartition,
};

pub type Scalar = Complex64;

/// One symbol of the alphabet: a face plus a label distinguishing variables
/// on the same face.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Letter {
    face: Face,
    label: String,
}

impl Letter {
    pub fn new(face: Face, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(Error::Schema(format!(
                "letter label {label:?} must be nonempty and free of whitespace"
            )));
        }
        Ok(Letter { face, label })
    }

    pub fn left(label: impl Into<String>) -> Result<Self> {
        Letter::new(Face::Left, label)
    }

    pub fn right(label: impl Into<String>) -> Result<Self> {
        Letter::new(Face::Right, label)
    }

    pub fn face(&self) -> Face {
        self.face
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// A finite sequence of letters; the empty word denotes the unit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn single(letter: Letter) -> Self {
        Word(vec![letter])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// The face pattern of the word; errors on the empty word.
    pub fn chi(&self) -> Result<ChiWord> {
        ChiWord::new(self.0.iter().map(Letter::face).collect())
    }

    /// Subword at the given 1-based positions (ascending).
    pub fn subword(&self, positions: &[usize]) -> Word {
        Word(positions.iter().map(|&i| self.0[i - 1].clone()).collect())
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<T: IntoIterator<Item = Letter>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, letter) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// All words of the given length over a sorted alphabet, lexicographic.
pub fn words_of_length(alphabet: &[Letter], len: usize) -> Vec<Word> {
    if len == 0 {
        return vec![Word::empty()];
    }
    if alphabet.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(alphabet.len().pow(len as u32));
    let mut idx = vec![0usize; len];
    loop {
        out.push(idx.iter().map(|&i| alphabet[i].clone()).collect());
        let mut pos = len;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < alphabet.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// All nonempty words of length `1..=max_len`, shortest first.
pub fn words_up_to(alphabet: &[Letter], max_len: usize) -> Vec<Word> {
    (1..=max_len)
        .flat_map(|len| words_of_length(alphabet, len))
        .collect()
}

fn normalize_alphabet(mut alphabet: Vec<Letter>) -> Result<Vec<Letter>> {
    alphabet.sort();
    alphabet.dedup();
    // Labels key the file format, so they must be unique across faces too.
    for pair in alphabet.windows(2) {
        if pair[0].label() == pair[1].label() {
            return Err(Error::Schema(format!(
                "duplicate label \"{}\" in alphabet",
                pair[0].label()
            )));
        }
    }
    Ok(alphabet)
}

const ONE: Scalar = Complex64::new(1.0, 0.0);
const ZERO: Scalar = Complex64::new(0.0, 0.0);

/// A dense truncated moment table; the carrier of the state `phi`.
#[derive(Clone, Debug)]
pub struct MomentFunctional {
    alphabet: Vec<Letter>,
    max_order: usize,
    table: HashMap<Word, Scalar>,
}

impl MomentFunctional {
    /// Build from an explicit table.  Every word of length `1..=max_order`
    /// over the alphabet must be present; an empty-word entry, if given, must
    /// be exactly 1.
    pub fn new(
        alphabet: Vec<Letter>,
        max_order: usize,
        mut table: HashMap<Word, Scalar>,
    ) -> Result<Self> {
        let alphabet = normalize_alphabet(alphabet)?;
        match table.get(&Word::empty()) {
            Some(&v) if v != ONE => {
                return Err(Error::Schema(
                    "moment of the empty word must be exactly 1".into(),
                ))
            }
            _ => {
                table.insert(Word::empty(), ONE);
            }
        }
        for w in words_up_to(&alphabet, max_order) {
            if !table.contains_key(&w) {
                return Err(Error::MissingEntry(w.to_string()));
            }
        }
        Ok(MomentFunctional {
            alphabet,
            max_order,
            table,
        })
    }

    /// Build the dense table by evaluating `f` on every word up to the
    /// truncation order.
    pub fn from_fn(
        alphabet: Vec<Letter>,
        max_order: usize,
        mut f: impl FnMut(&Word) -> Result<Scalar>,
    ) -> Result<Self> {
        let alphabet = normalize_alphabet(alphabet)?;
        let mut table = HashMap::new();
        table.insert(Word::empty(), ONE);
        for w in words_up_to(&alphabet, max_order) {
            let v = f(&w)?;
            table.insert(w, v);
        }
        Ok(MomentFunctional {
            alphabet,
            max_order,
            table,
        })
    }

    pub fn alphabet(&self) -> &[Letter] {
        &self.alphabet
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// The moment of a word; 1 on the empty word.
    pub fn moment(&self, w: &Word) -> Result<Scalar> {
        if w.len() > self.max_order {
            return Err(Error::Truncation {
                len: w.len(),
                max_order: self.max_order,
            });
        }
        match self.table.get(w) {
            Some(&v) => Ok(v),
            None => {
                for letter in w.letters() {
                    if !self.alphabet.contains(letter) {
                        return Err(Error::UnknownLetter(letter.label().into()));
                    }
                }
                Err(Error::MissingEntry(w.to_string()))
            }
        }
    }

    /// `phi_pi`: the product over blocks of `p` of the moment of the subword
    /// at the block's positions (in increasing order).
    pub fn phi_partitioned(&self, w: &Word, p: &SetPartition) -> Result<Scalar> {
        if w.len() != p.n() {
            return Err(Error::SizeMismatch {
                left: w.len(),
                right: p.n(),
            });
        }
        let mut acc = ONE;
        for block in p.blocks() {
            acc *= self.moment(&w.subword(block))?;
        }
        Ok(acc)
    }

    /// The bi-free cumulant of a nonempty word, via the Moebius-weighted sum
    /// over bi-non-crossing partitions.
    pub fn cumulant(&self, w: &Word) -> Result<Scalar> {
        let n = w.len();
        if n == 0 {
            return Err(Error::EmptyWord);
        }
        if n > self.max_order {
            return Err(Error::Truncation {
                len: n,
                max_order: self.max_order,
            });
        }
        let s = chi_permutation(&w.chi()?);
        let mut acc = ZERO;
        for (sigma, mu) in noncrossing_with_mobius(n)?.iter() {
            let pi = transport_partition(&s, sigma)?;
            acc += self.phi_partitioned(w, &pi)? * (*mu as f64);
        }
        Ok(acc)
    }

    /// `kappa_{chi,pi}`: the product over blocks of `p` of the cumulant of the
    /// subword at the block's positions.  `p` must be bi-non-crossing for the
    /// face pattern of `w`.
    pub fn cumulant_partitioned(&self, w: &Word, p: &SetPartition) -> Result<Scalar> {
        let chi = w.chi()?;
        if !is_bnc(&chi, p)? {
            return Err(Error::NotBiNonCrossing {
                partition: p.to_string(),
                chi: chi.to_string(),
            });
        }
        if w.len() > self.max_order {
            return Err(Error::Truncation {
                len: w.len(),
                max_order: self.max_order,
            });
        }
        let mut acc = ONE;
        for block in p.blocks() {
            acc *= self.cumulant(&w.subword(block))?;
        }
        Ok(acc)
    }

    /// The full cumulant table of the same truncation order.
    pub fn to_cumulants(&self) -> Result<CumulantFunctional> {
        let mut table = HashMap::new();
        for w in words_up_to(&self.alphabet, self.max_order) {
            let v = self.cumulant(&w)?;
            table.insert(w, v);
        }
        CumulantFunctional::new(self.alphabet.clone(), self.max_order, table)
    }
}

/// A dense truncated cumulant table; the carrier of `kappa`.
#[derive(Clone, Debug)]
pub struct CumulantFunctional {
    alphabet: Vec<Letter>,
    max_order: usize,
    table: HashMap<Word, Scalar>,
}

impl CumulantFunctional {
    /// Build from a (possibly sparse) table; absent entries are zero.  An
    /// empty-word entry, if given, must be 0.
    pub fn new(
        alphabet: Vec<Letter>,
        max_order: usize,
        mut table: HashMap<Word, Scalar>,
    ) -> Result<Self> {
        let alphabet = normalize_alphabet(alphabet)?;
        if let Some(&v) = table.get(&Word::empty()) {
            if v != ZERO {
                return Err(Error::Schema("cumulant of the empty word must be 0".into()));
            }
        }
        table.remove(&Word::empty());
        for w in table.keys() {
            if w.len() > max_order {
                return Err(Error::Truncation {
                    len: w.len(),
                    max_order,
                });
            }
            for letter in w.letters() {
                if !alphabet.contains(letter) {
                    return Err(Error::UnknownLetter(letter.label().into()));
                }
            }
        }
        for w in words_up_to(&alphabet, max_order) {
            table.entry(w).or_insert(ZERO);
        }
        Ok(CumulantFunctional {
            alphabet,
            max_order,
            table,
        })
    }

    /// The zero table.
    pub fn zero(alphabet: Vec<Letter>, max_order: usize) -> Result<Self> {
        CumulantFunctional::new(alphabet, max_order, HashMap::new())
    }

    pub fn alphabet(&self) -> &[Letter] {
        &self.alphabet
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// The cumulant of a word; 0 on the empty word by convention.
    pub fn entry(&self, w: &Word) -> Result<Scalar> {
        if w.is_empty() {
            return Ok(ZERO);
        }
        if w.len() > self.max_order {
            return Err(Error::Truncation {
                len: w.len(),
                max_order: self.max_order,
            });
        }
        match self.table.get(w) {
            Some(&v) => Ok(v),
            None => {
                for letter in w.letters() {
                    if !self.alphabet.contains(letter) {
                        return Err(Error::UnknownLetter(letter.label().into()));
                    }
                }
                Err(Error::MissingEntry(w.to_string()))
            }
        }
    }

    /// The moment of a word via the bi-non-crossing partition sum; 1 on the
    /// empty word.
    pub fn moment(&self, w: &Word) -> Result<Scalar> {
        let n = w.len();
        if n == 0 {
            return Ok(ONE);
        }
        if n > self.max_order {
            return Err(Error::Truncation {
                len: n,
                max_order: self.max_order,
            });
        }
        let s = chi_permutation(&w.chi()?);
        let mut acc = ZERO;
        for (sigma, _) in noncrossing_with_mobius(n)?.iter() {
            let pi = transport_partition(&s, sigma)?;
            let mut term = ONE;
            for block in pi.blocks() {
                term *= self.entry(&w.subword(block))?;
                if term == ZERO {
                    break;
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// The full moment table of the same truncation order.
    pub fn to_moments(&self) -> Result<MomentFunctional> {
        MomentFunctional::from_fn(self.alphabet.clone(), self.max_order, |w| self.moment(w))
    }

    /// Entrywise sum: the cumulants of the sum of bi-free families.
    pub fn convolve(&self, other: &CumulantFunctional) -> Result<CumulantFunctional> {
        if self.alphabet != other.alphabet || self.max_order != other.max_order {
            return Err(Error::AlphabetMismatch);
        }
        let mut table = self.table.clone();
        for (w, v) in &other.table {
            *table.entry(w.clone()).or_insert(ZERO) += v;
        }
        CumulantFunctional::new(self.alphabet.clone(), self.max_order, table)
    }

    /// Entrywise scaling by a real factor.
    pub fn scale(&self, t: f64) -> CumulantFunctional {
        self.scale_by_order(|_| t)
    }

    /// Entrywise scaling by a per-order real factor.
    pub fn scale_by_order(&self, factor: impl Fn(usize) -> f64) -> CumulantFunctional {
        let table = self
            .table
            .iter()
            .map(|(w, &v)| (w.clone(), v * factor(w.len())))
            .collect();
        CumulantFunctional {
            alphabet: self.alphabet.clone(),
            max_order: self.max_order,
            table,
        }
    }

    /// Largest absolute entry difference against another table of the same
    /// shape.
    pub fn max_abs_diff(&self, other: &CumulantFunctional) -> Result<f64> {
        if self.alphabet != other.alphabet || self.max_order != other.max_order {
            return Err(Error::AlphabetMismatch);
        }
        let mut worst = 0.0f64;
        for (w, &v) in &self.table {
            worst = worst.max((v - other.entry(w)?).norm());
        }
        Ok(worst)
    }
}

/// Outcome of the mixed-cumulant bi-freeness test.
#[derive(Clone, Debug, Serialize)]
pub struct BifreeReport {
    pub max_abs: f64,
    pub worst_word: Option<Word>,
    pub words_checked: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Evaluate every mixed cumulant of order `2..=max_order` (words whose
/// letters span at least two groups) and report the largest modulus.  The
/// families are numerically bi-free iff all mixed cumulants vanish.
pub fn bifreeness_test(
    mf: &MomentFunctional,
    grouping: &BTreeMap<String, String>,
    max_order: usize,
    tol: f64,
) -> Result<BifreeReport> {
    if max_order > mf.max_order() {
        return Err(Error::Truncation {
            len: max_order,
            max_order: mf.max_order(),
        });
    }
    for letter in mf.alphabet() {
        if !grouping.contains_key(letter.label()) {
            return Err(Error::UnknownLetter(letter.label().into()));
        }
    }
    let mut max_abs = 0.0f64;
    let mut worst_word = None;
    let mut words_checked = 0usize;
    for len in 2..=max_order {
        for w in words_of_length(mf.alphabet(), len) {
            let first = &grouping[w.letters()[0].label()];
            if w.letters()
                .iter()
                .all(|letter| &grouping[letter.label()] == first)
            {
                continue;
            }
            words_checked += 1;
            let kappa = mf.cumulant(&w)?.norm();
            if kappa > max_abs {
                max_abs = kappa;
                worst_word = Some(w);
            }
        }
    }
    Ok(BifreeReport {
        max_abs,
        worst_word,
        words_checked,
        tol,
        pass: max_abs <= tol,
    })
}

// ---------------------------------------------------------------------------
// Table file format
// ---------------------------------------------------------------------------

/// Fix floats to 12 significant digits so canonical documents are
/// byte-reproducible and exact inverse pairs round-trip identically.
pub fn canon(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("canonical float")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LetterDoc {
    pub label: String,
    pub face: Face,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Moments,
    Cumulants,
}

/// On-disk form of a moment or cumulant table.  Keys of `table` are
/// space-separated label strings; the empty string keys the empty word.
/// Absent entries are an error for `moments`, zero for `cumulants`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableDoc {
    pub alphabet: Vec<LetterDoc>,
    pub max_order: usize,
    pub kind: TableKind,
    pub table: BTreeMap<String, [f64; 2]>,
}

impl TableDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable document");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    fn alphabet_letters(&self) -> Result<Vec<Letter>> {
        self.alphabet
            .iter()
            .map(|l| Letter::new(l.face, l.label.clone()))
            .collect()
    }

    fn parse_table(&self) -> Result<HashMap<Word, Scalar>> {
        let letters = self.alphabet_letters()?;
        let by_label: HashMap<&str, &Letter> = letters.iter().map(|l| (l.label(), l)).collect();
        if by_label.len() != letters.len() {
            return Err(Error::Schema("duplicate label in alphabet".into()));
        }
        let mut out = HashMap::with_capacity(self.table.len());
        for (key, &[re, im]) in &self.table {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Schema(format!("non-finite value at \"{key}\"")));
            }
            let word: Word = key
                .split_whitespace()
                .map(|label| {
                    by_label
                        .get(label)
                        .map(|&l| l.clone())
                        .ok_or_else(|| Error::UnknownLetter(label.into()))
                })
                .collect::<Result<Vec<Letter>>>()?
                .into_iter()
                .collect();
            if word.len() > self.max_order {
                return Err(Error::Truncation {
                    len: word.len(),
                    max_order: self.max_order,
                });
            }
            out.insert(word, Complex64::new(re, im));
        }
        Ok(out)
    }

    pub fn to_moments(&self) -> Result<MomentFunctional> {
        if self.kind != TableKind::Moments {
            return Err(Error::Schema("expected a table of kind \"moments\"".into()));
        }
        MomentFunctional::new(
            self.alphabet_letters()?,
            self.max_order,
            self.parse_table()?,
        )
    }

    pub fn to_cumulants(&self) -> Result<CumulantFunctional> {
        if self.kind != TableKind::Cumulants {
            return Err(Error::Schema(
                "expected a table of kind \"cumulants\"".into(),
            ));
        }
        CumulantFunctional::new(
            self.alphabet_letters()?,
            self.max_order,
            self.parse_table()?,
        )
    }

    pub fn from_moments(mf: &MomentFunctional) -> TableDoc {
        let mut table = BTreeMap::new();
        table.insert(String::new(), [1.0, 0.0]);
        for w in words_up_to(mf.alphabet(), mf.max_order()) {
            let v = mf.moment(&w).expect("dense table");
            table.insert(w.to_string(), [canon(v.re), canon(v.im)]);
        }
        TableDoc {
            alphabet: mf
                .alphabet()
                .iter()
                .map(|l| LetterDoc {
                    label: l.label().into(),
                    face: l.face(),
                })
                .collect(),
            max_order: mf.max_order(),
            kind: TableKind::Moments,
            table,
        }
    }

    pub fn from_cumulants(cf: &CumulantFunctional) -> TableDoc {
        let mut table = BTreeMap::new();
        for w in words_up_to(cf.alphabet(), cf.max_order()) {
            let v = cf.entry(&w).expect("dense table");
            table.insert(w.to_string(), [canon(v.re), canon(v.im)]);
        }
        TableDoc {
            alphabet: cf
                .alphabet()
                .iter()
                .map(|l| LetterDoc {
                    label: l.label().into(),
                    face: l.face(),
                })
                .collect(),
            max_order: cf.max_order(),
            kind: TableKind::Cumulants,
            table,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn lx() -> Letter {
        Letter::left("x").unwrap()
    }
    fn ly() -> Letter {
        Letter::left("y").unwrap()
    }
    fn rz() -> Letter {
        Letter::right("z").unwrap()
    }

    fn word(letters: &[&Letter]) -> Word {
        letters.iter().map(|&l| l.clone()).collect()
    }

    fn random_moments(alphabet: Vec<Letter>, max_order: usize, seed: u64) -> MomentFunctional {
        let mut rng = StdRng::seed_from_u64(seed);
        MomentFunctional::from_fn(alphabet, max_order, |_| {
            Ok(Complex64::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ))
        })
        .unwrap()
    }

    /// Two-letter Gaussian cumulant table: unit variances, cross-covariance c.
    fn gaussian_pair(c: f64, max_order: usize) -> CumulantFunctional {
        let al = Letter::left("a_l").unwrap();
        let ar = Letter::right("a_r").unwrap();
        let mut table = HashMap::new();
        table.insert(word(&[&al, &al]), Complex64::new(1.0, 0.0));
        table.insert(word(&[&ar, &ar]), Complex64::new(1.0, 0.0));
        table.insert(word(&[&al, &ar]), Complex64::new(c, 0.0));
        table.insert(word(&[&ar, &al]), Complex64::new(c, 0.0));
        CumulantFunctional::new(vec![al, ar], max_order, table).unwrap()
    }

    #[test]
    fn phi_partitioned_examples() {
        let x = lx();
        let y = ly();
        let z = rz();
        let mut table = HashMap::new();
        for w in words_up_to(&[x.clone(), y.clone(), z.clone()], 3) {
            table.insert(w, Complex64::new(0.0, 0.0));
        }
        table.insert(word(&[&x, &y]), Complex64::new(2.0, 0.0));
        table.insert(word(&[&z]), Complex64::new(3.0, 0.0));
        let w = word(&[&x, &y, &z]);
        table.insert(w.clone(), Complex64::new(7.0, 0.0));
        let mf = MomentFunctional::new(vec![x.clone(), y.clone(), z.clone()], 3, table).unwrap();

        let full = SetPartition::full(3).unwrap();
        assert_eq!(
            mf.phi_partitioned(&w, &full).unwrap(),
            Complex64::new(7.0, 0.0)
        );

        let split = SetPartition::new(3, vec![vec![1, 2], vec![3]]).unwrap();
        assert_eq!(
            mf.phi_partitioned(&w, &split).unwrap(),
            Complex64::new(6.0, 0.0)
        );

        let singles = SetPartition::singletons(3).unwrap();
        assert_eq!(
            mf.phi_partitioned(&w, &singles).unwrap(),
            Complex64::new(0.0, 0.0)
        );

        assert!(mf
            .phi_partitioned(&w, &SetPartition::full(2).unwrap())
            .is_err());
    }

    #[test]
    fn first_and_second_order_cumulants() {
        let mf = random_moments(vec![lx(), rz()], 4, 7);
        let x = lx();
        let z = rz();
        for letter in [&x, &z] {
            let w = word(&[letter]);
            assert_eq!(mf.cumulant(&w).unwrap(), mf.moment(&w).unwrap());
        }
        // every face combination at order 2: kappa = phi(w) - phi(w1) phi(w2)
        for a in [&x, &z] {
            for b in [&x, &z] {
                let w = word(&[a, b]);
                let expect = mf.moment(&w).unwrap()
                    - mf.moment(&word(&[a])).unwrap() * mf.moment(&word(&[b])).unwrap();
                assert!((mf.cumulant(&w).unwrap() - expect).norm() < 1e-14);
            }
        }
        assert!(matches!(mf.cumulant(&Word::empty()), Err(Error::EmptyWord)));
    }

    #[test]
    fn gaussian_fourth_order_cumulants_vanish() {
        let mf = gaussian_pair(0.7, 4).to_moments().unwrap();
        for w in words_of_length(mf.alphabet(), 4) {
            assert!(
                mf.cumulant(&w).unwrap().norm() <= 1e-12,
                "kappa({w}) should vanish"
            );
        }
    }

    #[test]
    fn gaussian_pair_moment_example() {
        // word (a_l, a_l, a_r, a_r): surviving pair partitions {{1,2},{3,4}}
        // and {{1,3},{2,4}} give 1 + c^2.
        let c = 0.3;
        let cf = gaussian_pair(c, 4);
        let al = Letter::left("a_l").unwrap();
        let ar = Letter::right("a_r").unwrap();
        let m = cf.moment(&word(&[&al, &al, &ar, &ar])).unwrap();
        assert!((m - Complex64::new(1.0 + c * c, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cumulant_partitioned_examples() {
        let cf = gaussian_pair(0.5, 4);
        let mf = cf.to_moments().unwrap();
        let al = Letter::left("a_l").unwrap();
        let ar = Letter::right("a_r").unwrap();
        let w = word(&[&al, &al, &ar, &ar]);

        let full = SetPartition::full(4).unwrap();
        let k_full = mf.cumulant_partitioned(&w, &full).unwrap();
        assert!((k_full - mf.cumulant(&w).unwrap()).norm() < 1e-14);

        let pairs = SetPartition::new(4, vec![vec![1, 2], vec![3, 4]]).unwrap();
        let k_pairs = mf.cumulant_partitioned(&w, &pairs).unwrap();
        assert!((k_pairs - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        // {{1,4},{2,3}} is not bi-non-crossing for chi = llrr
        let nested = SetPartition::new(4, vec![vec![1, 4], vec![2, 3]]).unwrap();
        assert!(matches!(
            mf.cumulant_partitioned(&w, &nested),
            Err(Error::NotBiNonCrossing { .. })
        ));

        let singles = SetPartition::singletons(4).unwrap();
        let k0 = mf.cumulant_partitioned(&w, &singles).unwrap();
        assert!(k0.norm() < 1e-14, "means are zero");
    }

    #[test]
    fn moment_from_cumulants_basics() {
        let cf = gaussian_pair(0.4, 4);
        assert_eq!(cf.moment(&Word::empty()).unwrap(), Complex64::new(1.0, 0.0));
        let al = Letter::left("a_l").unwrap();
        assert_eq!(
            cf.moment(&Word::single(al.clone())).unwrap(),
            cf.entry(&Word::single(al)).unwrap()
        );
    }

    #[test]
    fn zero_cumulants_give_unit_moments() {
        let cf = CumulantFunctional::zero(vec![lx(), rz()], 3).unwrap();
        let mf = cf.to_moments().unwrap();
        assert_eq!(mf.moment(&Word::empty()).unwrap(), Complex64::new(1.0, 0.0));
        for w in words_up_to(mf.alphabet(), 3) {
            assert_eq!(mf.moment(&w).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn transforms_are_mutually_inverse() {
        for seed in 0..5 {
            let mf = random_moments(vec![lx(), rz()], 5, seed);
            let back = mf.to_cumulants().unwrap().to_moments().unwrap();
            for w in words_up_to(mf.alphabet(), 5) {
                let diff = (mf.moment(&w).unwrap() - back.moment(&w).unwrap()).norm();
                assert!(diff <= 1e-12, "word {w}: diff {diff:.3e}");
            }
        }
    }

    #[test]
    fn convolve_and_scale() {
        let cf = gaussian_pair(0.25, 4);
        let doubled = cf.convolve(&cf).unwrap();
        assert_eq!(doubled.max_abs_diff(&cf.scale(2.0)).unwrap(), 0.0);

        let zeroed = cf.scale(0.0);
        for w in words_up_to(cf.alphabet(), 4) {
            assert_eq!(zeroed.entry(&w).unwrap(), Complex64::new(0.0, 0.0));
        }

        let other = CumulantFunctional::zero(vec![lx()], 4).unwrap();
        assert!(matches!(cf.convolve(&other), Err(Error::AlphabetMismatch)));
    }

    #[test]
    fn semicircle_convolution_doubles_variance() {
        // kappa_2 = 1 each; the sum has even moments 2^k C_k.
        let x = lx();
        let mut table = HashMap::new();
        table.insert(word(&[&x, &x]), Complex64::new(1.0, 0.0));
        let cf = CumulantFunctional::new(vec![x.clone()], 6, table).unwrap();
        let sum = cf.convolve(&cf).unwrap();
        let mf = sum.to_moments().unwrap();
        let catalan = [1.0, 1.0, 2.0, 5.0];
        for k in 1..=3usize {
            let w: Word = std::iter::repeat_n(x.clone(), 2 * k).collect();
            let expect = 2f64.powi(k as i32) * catalan[k];
            assert!((mf.moment(&w).unwrap() - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn bifreeness_detects_duplicated_letter() {
        // two "groups" that are copies of the same variable: kappa(z', z'')
        // equals kappa_2 != 0, so the test must fail at order 2.
        let z1 = lx();
        let z2 = ly();
        let alphabet = vec![z1.clone(), z2.clone()];
        let mut rng = StdRng::seed_from_u64(11);
        let base: HashMap<usize, Complex64> = (1..=4)
            .map(|len| {
                (
                    len,
                    Complex64::new(rng.gen_range(0.5..1.0), rng.gen_range(-0.5..0.5)),
                )
            })
            .collect();
        // moments depend only on word length: identical copies of one variable
        let mf = MomentFunctional::from_fn(alphabet, 4, |w| Ok(base[&w.len()])).unwrap();
        let grouping: BTreeMap<String, String> = [("x", "1"), ("y", "2")]
            .iter()
            .map(|&(l, g)| (l.into(), g.into()))
            .collect();
        let report = bifreeness_test(&mf, &grouping, 4, 1e-9).unwrap();
        assert!(!report.pass);
        let kappa2 = base[&2] - base[&1] * base[&1];
        assert!(report.max_abs >= kappa2.norm() - 1e-12);
    }

    #[test]
    fn bifreeness_vacuous_pass_on_zero_moments() {
        let mf = MomentFunctional::from_fn(vec![lx(), ly()], 4, |_| Ok(Complex64::new(0.0, 0.0)))
            .unwrap();
        let grouping: BTreeMap<String, String> = [("x", "1"), ("y", "2")]
            .iter()
            .map(|&(l, g)| (l.into(), g.into()))
            .collect();
        let report = bifreeness_test(&mf, &grouping, 4, 1e-9).unwrap();
        assert!(report.pass);
        assert_eq!(report.max_abs, 0.0);
    }

    #[test]
    fn unit_letter_kills_longer_cumulants() {
        // extend a random table with a unit letter u: phi(w u w') = phi(w w');
        // every cumulant of order >= 2 containing u must vanish.
        for u_face in [Face::Left, Face::Right] {
            let x = lx();
            let z = rz();
            let u = Letter::new(u_face, "u").unwrap();
            let base = random_moments(vec![x.clone(), z.clone()], 4, 23);
            let extended =
                MomentFunctional::from_fn(vec![x.clone(), z.clone(), u.clone()], 4, |w| {
                    let stripped: Word = w.letters().iter().filter(|l| *l != &u).cloned().collect();
                    base.moment(&stripped)
                })
                .unwrap();
            for len in 2..=4usize {
                for w in words_of_length(extended.alphabet(), len) {
                    if w.letters().iter().any(|l| l == &u) {
                        let kappa = extended.cumulant(&w).unwrap().norm();
                        assert!(kappa <= 1e-12, "kappa({w}) = {kappa:.3e}");
                    }
                }
            }
        }
    }

    #[test]
    fn cumulants_are_multilinear_in_each_slot() {
        // extend the alphabet with a formal combination y = alpha*x + beta*z
        // (same face) at the moment level and check additivity slot by slot.
        let x = lx();
        let z = Letter::left("z").unwrap();
        let y = ly();
        let alpha = Complex64::new(0.7, -0.2);
        let beta = Complex64::new(-0.4, 0.5);
        let base = random_moments(vec![x.clone(), z.clone()], 4, 31);
        let extended = MomentFunctional::from_fn(vec![x.clone(), z.clone(), y.clone()], 4, |w| {
            // expand every occurrence of y linearly
            let mut acc = Complex64::new(0.0, 0.0);
            let slots: Vec<usize> = (0..w.len()).filter(|&i| w.letters()[i] == y).collect();
            for mask in 0..(1usize << slots.len()) {
                let mut coef = Complex64::new(1.0, 0.0);
                let mut letters = w.letters().to_vec();
                for (bit, &slot) in slots.iter().enumerate() {
                    if mask >> bit & 1 == 0 {
                        letters[slot] = x.clone();
                        coef *= alpha;
                    } else {
                        letters[slot] = z.clone();
                        coef *= beta;
                    }
                }
                acc += coef * base.moment(&Word::new(letters))?;
            }
            Ok(acc)
        })
        .unwrap();

        for len in 1..=4usize {
            for w in words_of_length(&[x.clone(), z.clone()], len) {
                for slot in 0..len {
                    let mut with_y = w.letters().to_vec();
                    with_y[slot] = y.clone();
                    let mut with_x = with_y.clone();
                    with_x[slot] = x.clone();
                    let mut with_z = with_y.clone();
                    with_z[slot] = z.clone();
                    let lhs = extended.cumulant(&Word::new(with_y)).unwrap();
                    let rhs = alpha * extended.cumulant(&Word::new(with_x)).unwrap()
                        + beta * extended.cumulant(&Word::new(with_z)).unwrap();
                    assert!((lhs - rhs).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn table_doc_round_trip() {
        let cf = gaussian_pair(0.5, 3);
        let doc = TableDoc::from_cumulants(&cf);
        let text = doc.to_json();
        let parsed = TableDoc::from_json(&text).unwrap().to_cumulants().unwrap();
        assert_eq!(parsed.max_abs_diff(&cf).unwrap(), 0.0);

        let mf = cf.to_moments().unwrap();
        let mdoc = TableDoc::from_moments(&mf);
        let mparsed = TableDoc::from_json(&mdoc.to_json()).unwrap().to_moments();
        assert!(mparsed.is_ok());
    }

    #[test]
    fn truncation_and_unknown_letters_are_reported() {
        let mf = random_moments(vec![lx(), rz()], 3, 17);
        let too_long: Word = std::iter::repeat_n(lx(), 4).collect();
        assert!(matches!(
            mf.cumulant(&too_long),
            Err(Error::Truncation { .. })
        ));
        assert!(matches!(
            mf.moment(&Word::single(ly())),
            Err(Error::UnknownLetter(_))
        ));

        let cf = mf.to_cumulants().unwrap();
        assert!(matches!(
            cf.moment(&too_long),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn duplicate_labels_across_faces_are_rejected() {
        // labels key the file format, so "x" on both faces is ambiguous
        let result = MomentFunctional::from_fn(
            vec![Letter::left("x").unwrap(), Letter::right("x").unwrap()],
            2,
            |_| Ok(Complex64::new(0.0, 0.0)),
        );
        assert!(matches!(result, Err(Error::Schema(_))));
    }

    #[test]
    fn moment_doc_missing_entry_is_an_error() {
        let mf = random_moments(vec![lx()], 2, 3);
        let mut doc = TableDoc::from_moments(&mf);
        doc.table.remove("x x");
        assert!(matches!(doc.to_moments(), Err(Error::MissingEntry(_))));
        // absent entries are fine for cumulants: they read as zero
        let cdoc = TableDoc {
            kind: TableKind::Cumulants,
            table: BTreeMap::new(),
            ..doc
        };
        let cf = cdoc.to_cumulants().unwrap();
        assert_eq!(
            cf.entry(&Word::single(lx())).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }
}
