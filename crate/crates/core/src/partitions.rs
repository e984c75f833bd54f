//! Set partitions, non-crossing partitions, and bi-non-crossing partitions.
//!
//! A partition of `{1..n}` is stored in canonical form: blocks sorted by their
//! minimum element, elements ascending within each block, so structural
//! equality is partition equality.  The bi-non-crossing partitions attached to
//! a face word `chi` are the images of the non-crossing partitions `NC(n)`
//! under the permutation `s_chi` that lists left positions in increasing order
//! followed by right positions in decreasing order.
//!
//! The Moebius function of the non-crossing lattice is computed by the
//! defining recursion (sum over coarser non-crossing partitions), memoized per
//! ground-set size.  Values are exact integers.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Enumeration guard: Bell(12) is about 4.2 million, the desk-scale ceiling.
pub const MAX_GROUND_SET: usize = 12;

/// Left or right face of a two-faced family.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Face {
    #[serde(rename = "l")]
    Left,
    #[serde(rename = "r")]
    Right,
}

impl Face {
    pub fn opposite(self) -> Face {
        match self {
            Face::Left => Face::Right,
            Face::Right => Face::Left,
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Face::Left => write!(f, "l"),
            Face::Right => write!(f, "r"),
        }
    }
}

/// A face word `chi : {1..n} -> {l, r}`, always nonempty.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ChiWord {
    faces: Vec<Face>,
}

impl ChiWord {
    pub fn new(faces: Vec<Face>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(ChiWord { faces })
    }

    /// The constant face word of length `n`.
    pub fn constant(face: Face, n: usize) -> Result<Self> {
        ChiWord::new(vec![face; n])
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    /// Face words are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, i: usize) -> Face {
        self.faces[i]
    }

    /// All `2^n` face words of length `n`.
    pub fn enumerate(n: usize) -> Result<Vec<ChiWord>> {
        if n == 0 {
            return Err(Error::EmptyWord);
        }
        let mut out = Vec::with_capacity(1 << n);
        for bits in 0..(1usize << n) {
            let faces = (0..n)
                .map(|i| {
                    if bits >> i & 1 == 0 {
                        Face::Left
                    } else {
                        Face::Right
                    }
                })
                .collect();
            out.push(ChiWord { faces });
        }
        Ok(out)
    }
}

impl fmt::Display for ChiWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for face in &self.faces {
            write!(f, "{face}")?;
        }
        Ok(())
    }
}

/// A permutation of `{1..n}`, stored as the image sequence.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty image sequence".into()));
        }
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v < 1 || v > n || seen[v] {
                return Err(Error::InvalidPermutation(format!(
                    "images {images:?} are not a bijection of 1..={n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Permutation::new((1..=n).collect())
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// Image of `i` (1-based).
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { images: inv }
    }
}

/// A partition of `{1..n}` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition(
                "ground set must be nonempty".into(),
            ));
        }
        let mut seen = vec![false; n + 1];
        let mut count = 0usize;
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &e in block {
                if e < 1 || e > n {
                    return Err(Error::InvalidPartition(format!(
                        "element {e} outside 1..={n}"
                    )));
                }
                if seen[e] {
                    return Err(Error::InvalidPartition(format!("element {e} repeated")));
                }
                seen[e] = true;
                count += 1;
            }
        }
        if count != n {
            return Err(Error::InvalidPartition(format!(
                "blocks cover {count} of {n} elements"
            )));
        }
        Ok(Self::from_disjoint_blocks(n, blocks))
    }

    /// Canonicalize blocks known to be disjoint and covering.
    fn from_disjoint_blocks(n: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        SetPartition { n, blocks }
    }

    /// The one-block partition `1_n`.
    pub fn full(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition(
                "ground set must be nonempty".into(),
            ));
        }
        Ok(SetPartition {
            n,
            blocks: vec![(1..=n).collect()],
        })
    }

    /// The all-singletons partition `0_n`.
    pub fn singletons(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition(
                "ground set must be nonempty".into(),
            ));
        }
        Ok(SetPartition {
            n,
            blocks: (1..=n).map(|i| vec![i]).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing each element; entry `e-1` for element `e`.
    pub fn block_indices(&self) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &e in block {
                idx[e - 1] = b;
            }
        }
        idx
    }

    /// True iff there are no `a < b < c < d` with `a, c` in one block and
    /// `b, d` in a different block.
    pub fn is_noncrossing(&self) -> bool {
        let idx = self.block_indices();
        let n = self.n;
        for a in 0..n {
            for b in (a + 1)..n {
                if idx[b] == idx[a] {
                    continue;
                }
                for c in (b + 1)..n {
                    if idx[c] != idx[a] {
                        continue;
                    }
                    for d in (c + 1)..n {
                        if idx[d] == idx[b] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Refinement order: true iff every block of `self` lies inside a block
    /// of `other`.
    pub fn refines(&self, other: &SetPartition) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let idx = other.block_indices();
        Ok(self
            .blocks
            .iter()
            .all(|block| block.iter().all(|&e| idx[e - 1] == idx[block[0] - 1])))
    }
}

impl fmt::Display for SetPartition {
    /// Serialized as sorted block lists, e.g. `[[1,3],[2,4]]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, e) in block.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_GROUND_SET {
        return Err(Error::SizeLimit {
            n,
            max: MAX_GROUND_SET,
        });
    }
    Ok(())
}

/// All partitions of `{1..n}`, enumerated via restricted growth strings.
/// The count is the Bell number `B(n)`.
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    check_size(n)?;
    let mut out = Vec::new();
    // rgs[i] = block id of element i+1; ids appear in first-use order, so the
    // resulting block lists are already canonical.
    let mut rgs = vec![0usize; n];
    loop {
        let num_blocks = rgs.iter().copied().max().unwrap() + 1;
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); num_blocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i + 1);
        }
        out.push(SetPartition { n, blocks });

        // advance to the next restricted growth string
        let mut i = n;
        loop {
            if i == 1 {
                return Ok(out);
            }
            i -= 1;
            let cap = rgs[..i].iter().copied().max().unwrap() + 1;
            if rgs[i] < cap {
                rgs[i] += 1;
                for v in rgs[i + 1..].iter_mut() {
                    *v = 0;
                }
                break;
            }
        }
    }
}

fn nc_cache() -> &'static Mutex<HashMap<usize, Arc<Vec<SetPartition>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<SetPartition>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached list of `NC(n)`; partitions of segments reuse the list for their
/// length with shifted labels.
pub(crate) fn noncrossing_cached(n: usize) -> Result<Arc<Vec<SetPartition>>> {
    check_size(n)?;
    if let Some(hit) = nc_cache().lock().unwrap().get(&n) {
        return Ok(hit.clone());
    }
    let list = Arc::new(build_noncrossing(n));
    nc_cache().lock().unwrap().insert(n, list.clone());
    Ok(list)
}

/// All non-crossing partitions of `{1..n}`; count is the Catalan number `C_n`.
pub fn enumerate_noncrossing(n: usize) -> Result<Vec<SetPartition>> {
    Ok(noncrossing_cached(n)?.as_ref().clone())
}

/// Recursive construction: pick the block of element 1; the gaps between its
/// members must be partitioned independently, which is exactly the
/// non-crossing condition.
fn build_noncrossing(n: usize) -> Vec<SetPartition> {
    fn shifted(len: usize, offset: usize) -> Vec<Vec<Vec<usize>>> {
        if len == 0 {
            return vec![vec![]];
        }
        let base = noncrossing_cached(len).expect("len within guard");
        base.iter()
            .map(|p| {
                p.blocks()
                    .iter()
                    .map(|b| b.iter().map(|e| e + offset).collect())
                    .collect()
            })
            .collect()
    }

    // Choose members of block(1) among 2..=n; segments are the maximal runs
    // between consecutive members.
    fn choose(
        n: usize,
        from: usize,
        block: &mut Vec<usize>,
        segments: &mut Vec<(usize, usize)>, // half-open element ranges
        out: &mut Vec<SetPartition>,
    ) {
        // Close the block here; the tail segment runs to n.
        {
            let mut all_segments = segments.clone();
            all_segments.push((from, n + 1));
            let mut combos: Vec<Vec<Vec<usize>>> = vec![vec![block.clone()]];
            for &(lo, hi) in &all_segments {
                let seg_parts = shifted(hi - lo, lo - 1);
                let mut next = Vec::with_capacity(combos.len() * seg_parts.len());
                for partial in &combos {
                    for seg in &seg_parts {
                        let mut merged = partial.clone();
                        merged.extend(seg.iter().cloned());
                        next.push(merged);
                    }
                }
                combos = next;
            }
            for blocks in combos {
                out.push(SetPartition::from_disjoint_blocks(n, blocks));
            }
        }
        // Or extend the block with a later element `j`.
        for j in from..=n {
            segments.push((from, j));
            block.push(j);
            choose(n, j + 1, block, segments, out);
            block.pop();
            segments.pop();
        }
    }

    let mut out = Vec::new();
    let mut block = vec![1usize];
    let mut segments = Vec::new();
    choose(n, 2, &mut block, &mut segments, &mut out);
    out
}

/// The permutation `s_chi`: left positions in increasing order first, then
/// right positions in decreasing order.
pub fn chi_permutation(chi: &ChiWord) -> Permutation {
    let lefts: Vec<usize> = (1..=chi.len())
        .filter(|&i| chi.face(i - 1) == Face::Left)
        .collect();
    let rights: Vec<usize> = (1..=chi.len())
        .filter(|&i| chi.face(i - 1) == Face::Right)
        .collect();
    let mut images = lefts;
    images.extend(rights.into_iter().rev());
    Permutation { images }
}

/// Map every element of `p` through `s`.
pub fn transport_partition(s: &Permutation, p: &SetPartition) -> Result<SetPartition> {
    if s.n() != p.n() {
        return Err(Error::SizeMismatch {
            left: s.n(),
            right: p.n(),
        });
    }
    let blocks = p
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&e| s.apply(e)).collect())
        .collect();
    Ok(SetPartition::from_disjoint_blocks(p.n(), blocks))
}

/// The bi-non-crossing partitions for `chi`: the image of `NC(n)` under
/// `s_chi`.  Count equals the Catalan number `C_n`.
pub fn enumerate_bnc(chi: &ChiWord) -> Result<Vec<SetPartition>> {
    let s = chi_permutation(chi);
    let nc = noncrossing_cached(chi.len())?;
    nc.iter().map(|p| transport_partition(&s, p)).collect()
}

/// Membership test for the bi-non-crossing set of `chi`.
pub fn is_bnc(chi: &ChiWord, p: &SetPartition) -> Result<bool> {
    if chi.len() != p.n() {
        return Err(Error::SizeMismatch {
            left: chi.len(),
            right: p.n(),
        });
    }
    let inv = chi_permutation(chi).inverse();
    Ok(transport_partition(&inv, p)?.is_noncrossing())
}

type MobiusTable = HashMap<SetPartition, i64>;

fn mobius_cache() -> &'static Mutex<HashMap<usize, Arc<MobiusTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<MobiusTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn mobius_table(n: usize) -> Result<Arc<MobiusTable>> {
    if let Some(hit) = mobius_cache().lock().unwrap().get(&n) {
        return Ok(hit.clone());
    }
    let nc = noncrossing_cached(n)?;
    // Strict coarsening decreases the block count, so processing by block
    // count ascending makes the defining recursion a single sweep:
    //   mu(1_n) = 1,   mu(sigma) = -sum_{tau > sigma} mu(tau).
    let mut order: Vec<&SetPartition> = nc.iter().collect();
    order.sort_by_key(|p| p.num_blocks());
    let mut table: MobiusTable = HashMap::with_capacity(nc.len());
    for sigma in order {
        let mut acc = 0i64;
        for (tau, &mu_tau) in table.iter() {
            if sigma.refines(tau)? {
                acc += mu_tau;
            }
        }
        let mu = if sigma.num_blocks() == 1 { 1 } else { -acc };
        table.insert(sigma.clone(), mu);
    }
    let table = Arc::new(table);
    mobius_cache().lock().unwrap().insert(n, table.clone());
    Ok(table)
}

/// `mu_n(sigma, 1_n)` on the non-crossing lattice, by the defining recursion
/// `sum_{sigma <= tau <= 1_n} mu_n(tau, 1_n) = [sigma = 1_n]` with the sum
/// over non-crossing `tau` only.  Exact integer arithmetic, memoized per `n`.
pub fn mobius_to_top(sigma: &SetPartition) -> Result<i64> {
    if !sigma.is_noncrossing() {
        return Err(Error::Crossing(sigma.to_string()));
    }
    let table = mobius_table(sigma.n())?;
    Ok(*table.get(sigma).expect("partition is in NC(n)"))
}

type WeightedPartitions = Arc<Vec<(SetPartition, i64)>>;

/// Cached `(sigma, mu_n(sigma, 1_n))` pairs over `NC(n)`, the inner loop of
/// every moment/cumulant transform.
pub(crate) fn noncrossing_with_mobius(n: usize) -> Result<WeightedPartitions> {
    static CACHE: OnceLock<Mutex<HashMap<usize, WeightedPartitions>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return Ok(hit.clone());
    }
    let nc = noncrossing_cached(n)?;
    let table = mobius_table(n)?;
    let pairs: Vec<(SetPartition, i64)> = nc.iter().map(|p| (p.clone(), table[p])).collect();
    let pairs = Arc::new(pairs);
    cache.lock().unwrap().insert(n, pairs.clone());
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(n: usize, blocks: &[&[usize]]) -> SetPartition {
        SetPartition::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    fn bell(n: usize) -> u64 {
        // B(n+1) = sum_k C(n,k) B(k)
        let mut b = vec![1u64];
        for n in 0..n {
            let mut next = 0u64;
            let mut binom = 1u64;
            for k in 0..=n {
                next += binom * b[k];
                binom = binom * (n as u64 - k as u64) / (k as u64 + 1);
            }
            b.push(next);
        }
        b[n]
    }

    const CATALAN: [usize; 9] = [1, 1, 2, 5, 14, 42, 132, 429, 1430];

    #[test]
    fn set_partition_counts_match_bell_numbers() {
        assert_eq!(enumerate_set_partitions(1).unwrap().len(), 1);
        assert_eq!(enumerate_set_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_set_partitions(4).unwrap().len(), 15);
        for n in 1..=8 {
            assert_eq!(
                enumerate_set_partitions(n).unwrap().len() as u64,
                bell(n),
                "n={n}"
            );
        }
    }

    #[test]
    fn set_partition_enumeration_is_canonical_and_duplicate_free() {
        let parts = enumerate_set_partitions(5).unwrap();
        let set: std::collections::HashSet<_> = parts.iter().cloned().collect();
        assert_eq!(set.len(), parts.len());
        for p in &parts {
            let rebuilt = SetPartition::new(5, p.blocks().to_vec()).unwrap();
            assert_eq!(&rebuilt, p);
        }
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            enumerate_set_partitions(0),
            Err(Error::SizeLimit { .. })
        ));
        assert!(matches!(
            enumerate_set_partitions(13),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn noncrossing_detection() {
        assert!(!part(4, &[&[1, 3], &[2, 4]]).is_noncrossing());
        assert!(part(4, &[&[1, 4], &[2, 3]]).is_noncrossing());
        for p in enumerate_set_partitions(3).unwrap() {
            assert!(p.is_noncrossing());
        }
    }

    #[test]
    fn noncrossing_counts_match_catalan() {
        for n in 1..=6 {
            assert_eq!(enumerate_noncrossing(n).unwrap().len(), CATALAN[n], "n={n}");
            // cross-check against filtering the full partition list
            let filtered = enumerate_set_partitions(n)
                .unwrap()
                .into_iter()
                .filter(|p| p.is_noncrossing())
                .count();
            assert_eq!(filtered, CATALAN[n]);
        }
    }

    #[test]
    fn chi_permutation_matches_definition() {
        let all_l = ChiWord::constant(Face::Left, 3).unwrap();
        assert_eq!(chi_permutation(&all_l).images(), &[1, 2, 3]);

        let all_r = ChiWord::constant(Face::Right, 3).unwrap();
        assert_eq!(chi_permutation(&all_r).images(), &[3, 2, 1]);

        let lrl = ChiWord::new(vec![Face::Left, Face::Right, Face::Left]).unwrap();
        assert_eq!(chi_permutation(&lrl).images(), &[1, 3, 2]);

        for n in 1..=8 {
            let id = chi_permutation(&ChiWord::constant(Face::Left, n).unwrap());
            assert_eq!(id, Permutation::identity(n).unwrap());
            let rev = chi_permutation(&ChiWord::constant(Face::Right, n).unwrap());
            let expect: Vec<usize> = (1..=n).rev().collect();
            assert_eq!(rev.images(), &expect[..]);
        }
    }

    #[test]
    fn transport_examples() {
        let p = part(3, &[&[1, 2], &[3]]);
        let id = Permutation::identity(3).unwrap();
        assert_eq!(transport_partition(&id, &p).unwrap(), p);

        let s = Permutation::new(vec![1, 3, 2]).unwrap();
        assert_eq!(
            transport_partition(&s, &p).unwrap(),
            part(3, &[&[1, 3], &[2]])
        );

        let s = Permutation::new(vec![1, 2, 4, 3]).unwrap();
        let q = part(4, &[&[1, 3], &[2, 4]]);
        assert_eq!(
            transport_partition(&s, &q).unwrap(),
            part(4, &[&[1, 4], &[2, 3]])
        );

        let wrong_size = Permutation::identity(2).unwrap();
        assert!(transport_partition(&wrong_size, &p).is_err());
    }

    #[test]
    fn bnc_counts_and_membership() {
        // every face word up to length 6: the transport is a bijection from
        // NC(n), so the census is Catalan
        for n in 1..=6 {
            for chi in ChiWord::enumerate(n).unwrap() {
                let bnc = enumerate_bnc(&chi).unwrap();
                assert_eq!(bnc.len(), CATALAN[n], "chi={chi}");
                let set: std::collections::HashSet<_> = bnc.iter().cloned().collect();
                assert_eq!(set.len(), bnc.len(), "transport must be a bijection");
            }
        }
        for chi in ChiWord::enumerate(4).unwrap() {
            for p in &enumerate_bnc(&chi).unwrap() {
                assert!(is_bnc(&chi, p).unwrap());
            }
        }

        let llrr = ChiWord::new(vec![Face::Left, Face::Left, Face::Right, Face::Right]).unwrap();
        let crossing = part(4, &[&[1, 3], &[2, 4]]);
        let nested = part(4, &[&[1, 4], &[2, 3]]);
        assert!(is_bnc(&llrr, &crossing).unwrap());
        assert!(!is_bnc(&llrr, &nested).unwrap());
        let bnc = enumerate_bnc(&llrr).unwrap();
        assert!(bnc.contains(&crossing));
        assert!(!bnc.contains(&nested));
    }

    #[test]
    fn refinement_order() {
        let q = part(4, &[&[1, 3], &[2, 4]]);
        assert!(SetPartition::singletons(4).unwrap().refines(&q).unwrap());
        assert!(q.refines(&SetPartition::full(4).unwrap()).unwrap());
        let p = part(4, &[&[1, 2], &[3, 4]]);
        assert!(!p.refines(&q).unwrap());
    }

    #[test]
    fn mobius_examples() {
        for n in 1..=5 {
            assert_eq!(mobius_to_top(&SetPartition::full(n).unwrap()).unwrap(), 1);
        }
        assert_eq!(
            mobius_to_top(&SetPartition::singletons(2).unwrap()).unwrap(),
            -1
        );
        assert_eq!(
            mobius_to_top(&SetPartition::singletons(4).unwrap()).unwrap(),
            -5
        );
        assert!(matches!(
            mobius_to_top(&part(4, &[&[1, 3], &[2, 4]])),
            Err(Error::Crossing(_))
        ));
    }

    #[test]
    fn mobius_recursion_identity() {
        // sum_{tau >= sigma} mu(tau, 1_n) = [sigma = 1_n], exactly.
        for n in 1..=6 {
            let nc = enumerate_noncrossing(n).unwrap();
            for sigma in &nc {
                let mut total = 0i64;
                for tau in &nc {
                    if sigma.refines(tau).unwrap() {
                        total += mobius_to_top(tau).unwrap();
                    }
                }
                let expect = if sigma.num_blocks() == 1 { 1 } else { 0 };
                assert_eq!(total, expect, "n={n}, sigma={sigma}");
            }
        }
    }

    #[test]
    fn mobius_bottom_is_signed_catalan() {
        for n in 1..=7 {
            let sign = if n % 2 == 0 { -1 } else { 1 };
            let expect = sign * CATALAN[n - 1] as i64;
            assert_eq!(
                mobius_to_top(&SetPartition::singletons(n).unwrap()).unwrap(),
                expect,
                "n={n}"
            );
        }
    }

    #[test]
    fn partition_display_round_trip() {
        let p = part(4, &[&[2, 4], &[1, 3]]);
        assert_eq!(p.to_string(), "[[1,3],[2,4]]");
    }

    #[test]
    fn bnc_enumeration_respects_the_size_guard() {
        let chi = ChiWord::constant(Face::Left, 13).unwrap();
        assert!(matches!(enumerate_bnc(&chi), Err(Error::SizeLimit { .. })));
    }
}
