//! Truncated full Fock space over a finite-dimensional inner-product space.
//!
//! A Fock basis element is a sequence of `H`-basis indices of length
//! `0..=depth`; the empty sequence is the vacuum.  Operators act lazily on
//! sparse vectors; no operator matrices are ever materialized:
//!
//! ```text
//! l(f) Omega = f          l(f) xi = f (x) xi
//! r(f) Omega = f          r(f) xi = xi (x) f
//! gauge_l(T) Omega = 0    gauge_l(T) xi = (T xi_1) (x) xi_2 (x) ... (x) xi_n
//! gauge_r(T) Omega = 0    gauge_r(T) xi = xi_1 (x) ... (x) (T xi_n)
//! ```
//!
//! Adjoints are the inner-product transposes (annihilation contracts the
//! first/last slot).  Every operator changes the tensor degree by at most
//! one, so an `n`-fold vacuum expectation is exact on a space of depth `n`;
//! applications that would exceed the depth raise an overflow error rather
//! than silently truncating.

pub mod model;

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::{Letter, MomentFunctional, Scalar, Word};
use crate::partitions::Face;

pub type HVector = DVector<Complex64>;
pub type HMatrix = DMatrix<Complex64>;

/// Inner product, linear in the first argument.
pub fn inner(a: &HVector, b: &HVector) -> Scalar {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

fn is_hermitian(t: &HMatrix, tol: f64) -> bool {
    if t.nrows() != t.ncols() {
        return false;
    }
    let adj = t.adjoint();
    t.iter().zip(adj.iter()).all(|(a, b)| (a - b).norm() <= tol)
}

/// The truncated Fock space: dimension of `H`, maximum tensor degree, and a
/// declared decomposition of the `H`-basis into named summands.
#[derive(Clone, Debug)]
pub struct FockSpace {
    dim_h: usize,
    depth: usize,
    summands: BTreeMap<String, Vec<usize>>,
}

impl FockSpace {
    /// A space whose `H` is a single summand named `"h"`.
    pub fn new(dim_h: usize, depth: usize) -> FockSpace {
        let mut summands = BTreeMap::new();
        summands.insert("h".to_string(), (0..dim_h).collect());
        FockSpace {
            dim_h,
            depth,
            summands,
        }
    }

    /// A space with a declared orthogonal decomposition `H = (+) H_i`.
    /// The index lists must be disjoint and cover `0..dim_h`.
    pub fn with_summands(
        dim_h: usize,
        depth: usize,
        summands: BTreeMap<String, Vec<usize>>,
    ) -> Result<FockSpace> {
        let mut seen = vec![false; dim_h];
        for (name, indices) in &summands {
            for &i in indices {
                if i >= dim_h {
                    return Err(Error::Model(format!(
                        "summand {name} index {i} outside 0..{dim_h}"
                    )));
                }
                if seen[i] {
                    return Err(Error::Model(format!(
                        "summand {name} reuses basis index {i}"
                    )));
                }
                seen[i] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Model("summands do not cover the basis of H".into()));
        }
        Ok(FockSpace {
            dim_h,
            depth,
            summands,
        })
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn summands(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.summands
    }

    pub fn vacuum(&self) -> FockVector {
        let mut v = FockVector::zero();
        v.add(Vec::new(), Complex64::new(1.0, 0.0));
        v
    }

    /// Exact sparse action of an operator; exceeding the depth is an error.
    pub fn apply(&self, op: &FockOp, v: &FockVector) -> Result<FockVector> {
        self.apply_impl(op, v, Limit::Strict(self.depth))
    }

    fn apply_impl(&self, op: &FockOp, v: &FockVector, limit: Limit) -> Result<FockVector> {
        match op {
            FockOp::LeftCreate(f) => self.create(f, v, limit, Side::Left),
            FockOp::RightCreate(f) => self.create(f, v, limit, Side::Right),
            FockOp::LeftGauge(t) => self.gauge(t, v, Side::Left),
            FockOp::RightGauge(t) => self.gauge(t, v, Side::Right),
            FockOp::Scalar(z) => Ok(v.scaled(*z)),
            FockOp::Sum(parts) => {
                let mut acc = FockVector::zero();
                for part in parts {
                    acc.add_vector(&self.apply_impl(part, v, limit)?);
                }
                Ok(acc)
            }
            FockOp::Product(parts) => {
                let mut state = v.clone();
                for (k, part) in parts.iter().enumerate().rev() {
                    // entries may rise above the final limit as long as the
                    // parts still to come can bring them back down
                    let headroom: usize = parts[..k].iter().map(FockOp::capacity).sum();
                    let inner_limit = match limit {
                        Limit::Strict(d) => Limit::Strict(d),
                        Limit::Prune(c) => Limit::Prune(c + headroom),
                    };
                    state = self.apply_impl(part, &state, inner_limit)?;
                }
                Ok(state)
            }
            FockOp::Adjoint(inner) => self.apply_adjoint(inner, v, limit),
        }
    }

    fn apply_adjoint(&self, inner: &FockOp, v: &FockVector, limit: Limit) -> Result<FockVector> {
        match inner {
            FockOp::LeftCreate(f) => self.annihilate(f, v, Side::Left),
            FockOp::RightCreate(f) => self.annihilate(f, v, Side::Right),
            FockOp::LeftGauge(t) => self.gauge(&t.adjoint(), v, Side::Left),
            FockOp::RightGauge(t) => self.gauge(&t.adjoint(), v, Side::Right),
            FockOp::Scalar(z) => Ok(v.scaled(z.conj())),
            FockOp::Adjoint(op) => self.apply_impl(op, v, limit),
            FockOp::Sum(parts) => {
                let mut acc = FockVector::zero();
                for part in parts {
                    acc.add_vector(&self.apply_adjoint(part, v, limit)?);
                }
                Ok(acc)
            }
            FockOp::Product(parts) => {
                let reversed: Vec<FockOp> = parts
                    .iter()
                    .rev()
                    .map(|p| FockOp::Adjoint(Box::new(p.clone())))
                    .collect();
                self.apply_impl(&FockOp::Product(reversed), v, limit)
            }
        }
    }

    fn create(&self, f: &HVector, v: &FockVector, limit: Limit, side: Side) -> Result<FockVector> {
        if f.len() != self.dim_h {
            return Err(Error::SizeMismatch {
                left: f.len(),
                right: self.dim_h,
            });
        }
        let mut out = FockVector::zero();
        for (seq, &coeff) in v.iter() {
            let new_degree = seq.len() + 1;
            match limit {
                Limit::Strict(depth) if new_degree > depth => {
                    return Err(Error::DepthOverflow {
                        needed: new_degree,
                        depth,
                    })
                }
                Limit::Prune(cap) if new_degree > cap => continue,
                _ => {}
            }
            for (i, fi) in f.iter().enumerate() {
                if *fi == Complex64::ZERO {
                    continue;
                }
                let mut new_seq = Vec::with_capacity(new_degree);
                match side {
                    Side::Left => {
                        new_seq.push(i);
                        new_seq.extend_from_slice(seq);
                    }
                    Side::Right => {
                        new_seq.extend_from_slice(seq);
                        new_seq.push(i);
                    }
                }
                out.add(new_seq, coeff * fi);
            }
        }
        Ok(out)
    }

    fn annihilate(&self, f: &HVector, v: &FockVector, side: Side) -> Result<FockVector> {
        if f.len() != self.dim_h {
            return Err(Error::SizeMismatch {
                left: f.len(),
                right: self.dim_h,
            });
        }
        let mut out = FockVector::zero();
        for (seq, &coeff) in v.iter() {
            if seq.is_empty() {
                continue;
            }
            let (slot, rest): (usize, Vec<usize>) = match side {
                Side::Left => (seq[0], seq[1..].to_vec()),
                Side::Right => (seq[seq.len() - 1], seq[..seq.len() - 1].to_vec()),
            };
            let pairing = f[slot].conj();
            if pairing != Complex64::ZERO {
                out.add(rest, coeff * pairing);
            }
        }
        Ok(out)
    }

    fn gauge(&self, t: &HMatrix, v: &FockVector, side: Side) -> Result<FockVector> {
        if t.nrows() != self.dim_h || t.ncols() != self.dim_h {
            return Err(Error::SizeMismatch {
                left: t.nrows(),
                right: self.dim_h,
            });
        }
        let mut out = FockVector::zero();
        for (seq, &coeff) in v.iter() {
            if seq.is_empty() {
                continue;
            }
            let slot_pos = match side {
                Side::Left => 0,
                Side::Right => seq.len() - 1,
            };
            let i = seq[slot_pos];
            for j in 0..self.dim_h {
                let tji = t[(j, i)];
                if tji == Complex64::ZERO {
                    continue;
                }
                let mut new_seq = seq.clone();
                new_seq[slot_pos] = j;
                out.add(new_seq, coeff * tji);
            }
        }
        Ok(out)
    }

    /// Vacuum expectation of an operator product, applied right to left.
    /// Requires enough depth for the summed degree capacity of the sequence;
    /// under that guard the value is exact.
    pub fn vacuum_expectation(&self, ops: &[FockOp]) -> Result<Scalar> {
        let total: usize = ops.iter().map(FockOp::capacity).sum();
        if total > self.depth {
            return Err(Error::DepthOverflow {
                needed: total,
                depth: self.depth,
            });
        }
        let mut state = self.vacuum();
        for (k, op) in ops.iter().enumerate().rev() {
            // entries that cannot come back to degree 0 within the remaining
            // applications never contribute to the vacuum coefficient
            let reachable: usize = ops[..k].iter().map(FockOp::capacity).sum();
            state = self.apply_impl(op, &state, Limit::Prune(reachable))?;
            if state.is_zero() {
                return Ok(Complex64::ZERO);
            }
        }
        Ok(state.vacuum_coefficient())
    }

    /// Dense moment table of a two-faced family of operators, one letter per
    /// declared label.  Words are evaluated by a depth-first walk over
    /// suffixes so each operator application is shared across extensions.
    pub fn two_faced_moments(
        &self,
        left_ops: &BTreeMap<String, FockOp>,
        right_ops: &BTreeMap<String, FockOp>,
        n_max: usize,
    ) -> Result<MomentFunctional> {
        let mut letters = Vec::new();
        let mut ops: Vec<(Letter, &FockOp)> = Vec::new();
        for (label, op) in left_ops {
            let letter = Letter::new(Face::Left, label.clone())?;
            letters.push(letter.clone());
            ops.push((letter, op));
        }
        for (label, op) in right_ops {
            let letter = Letter::new(Face::Right, label.clone())?;
            letters.push(letter.clone());
            ops.push((letter, op));
        }
        let max_cap = ops.iter().map(|(_, op)| op.capacity()).max().unwrap_or(0);
        if n_max * max_cap > self.depth {
            return Err(Error::DepthOverflow {
                needed: n_max * max_cap,
                depth: self.depth,
            });
        }

        let mut table: HashMap<Word, Scalar> = HashMap::new();
        // rev_word holds the word right-to-left: ops apply to the vacuum in
        // that order, so children share the parent's state.
        fn walk(
            space: &FockSpace,
            ops: &[(Letter, &FockOp)],
            state: &FockVector,
            rev_word: &mut Vec<Letter>,
            n_max: usize,
            max_cap: usize,
            table: &mut HashMap<Word, Scalar>,
        ) -> Result<()> {
            if rev_word.len() == n_max {
                return Ok(());
            }
            let remaining = n_max - rev_word.len() - 1;
            for (letter, op) in ops {
                let next = space.apply_impl(op, state, Limit::Prune(remaining * max_cap))?;
                rev_word.push(letter.clone());
                let word: Word = rev_word.iter().rev().cloned().collect();
                table.insert(word, next.vacuum_coefficient());
                if !next.is_zero() {
                    walk(space, ops, &next, rev_word, n_max, max_cap, table)?;
                } else {
                    // all extensions of an annihilated state stay zero
                    fill_zero(ops, rev_word, n_max, table);
                }
                rev_word.pop();
            }
            Ok(())
        }

        fn fill_zero(
            ops: &[(Letter, &FockOp)],
            rev_word: &mut Vec<Letter>,
            n_max: usize,
            table: &mut HashMap<Word, Scalar>,
        ) {
            if rev_word.len() == n_max {
                return;
            }
            for (letter, _) in ops {
                rev_word.push(letter.clone());
                table.insert(rev_word.iter().rev().cloned().collect(), Complex64::ZERO);
                fill_zero(ops, rev_word, n_max, table);
                rev_word.pop();
            }
        }

        let vacuum = self.vacuum();
        let mut rev_word = Vec::new();
        walk(
            self,
            &ops,
            &vacuum,
            &mut rev_word,
            n_max,
            max_cap,
            &mut table,
        )?;
        MomentFunctional::new(letters, n_max, table)
    }

    /// Largest singular value of the compression of `op` to the truncated
    /// space.  Intended for small spaces; the basis has `dim_h^0 + ... +
    /// dim_h^depth` elements and is capped at 4096.
    pub fn compression_norm(&self, op: &FockOp) -> Result<f64> {
        let mut size = 1usize;
        let mut layer = 1usize;
        for _ in 0..self.depth {
            layer = layer.saturating_mul(self.dim_h);
            size = size.saturating_add(layer);
            if size > 4096 {
                return Err(Error::SizeLimit { n: size, max: 4096 });
            }
        }
        let basis = self.enumerate_basis();
        let index: HashMap<Vec<usize>, usize> = basis
            .iter()
            .enumerate()
            .map(|(i, seq)| (seq.clone(), i))
            .collect();
        // apply in a one-deeper space, then restrict rows to the basis
        let bigger = FockSpace {
            dim_h: self.dim_h,
            depth: self.depth + 1,
            summands: self.summands.clone(),
        };
        let mut matrix = DMatrix::<Complex64>::zeros(basis.len(), basis.len());
        for (col, seq) in basis.iter().enumerate() {
            let mut e = FockVector::zero();
            e.add(seq.clone(), Complex64::new(1.0, 0.0));
            let image = bigger.apply(op, &e)?;
            for (out_seq, &coeff) in image.iter() {
                if let Some(&row) = index.get(out_seq) {
                    matrix[(row, col)] += coeff;
                }
            }
        }
        Ok(matrix.singular_values().max())
    }

    fn enumerate_basis(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        let mut current = vec![Vec::new()];
        for _ in 0..self.depth {
            let mut next = Vec::new();
            for seq in &current {
                for i in 0..self.dim_h {
                    let mut s = seq.clone();
                    s.push(i);
                    next.push(s);
                }
            }
            out.extend(next.iter().cloned());
            current = next;
        }
        out
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy)]
enum Limit {
    /// Error when an application would exceed this degree.
    Strict(usize),
    /// Silently drop entries above this degree (valid only when the caller
    /// has proved they cannot contribute).
    Prune(usize),
}

/// A sparse vector of the truncated Fock space: basis sequence -> coefficient.
#[derive(Clone, Debug, Default)]
pub struct FockVector {
    entries: HashMap<Vec<usize>, Scalar>,
}

impl FockVector {
    pub fn zero() -> FockVector {
        FockVector {
            entries: HashMap::new(),
        }
    }

    /// A degree-1 vector with the given `H`-coordinates.
    pub fn from_h(f: &HVector) -> FockVector {
        let mut v = FockVector::zero();
        for (i, fi) in f.iter().enumerate() {
            if *fi != Complex64::ZERO {
                v.add(vec![i], *fi);
            }
        }
        v
    }

    pub fn add(&mut self, seq: Vec<usize>, coeff: Scalar) {
        if coeff == Complex64::ZERO {
            return;
        }
        match self.entries.entry(seq) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                // keep the map sparse when terms cancel exactly
                if *e.get() == Complex64::ZERO {
                    e.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
        }
    }

    pub fn add_vector(&mut self, other: &FockVector) {
        for (seq, &coeff) in other.iter() {
            self.add(seq.clone(), coeff);
        }
    }

    pub fn scaled(&self, z: Scalar) -> FockVector {
        if z == Complex64::ZERO {
            return FockVector::zero();
        }
        FockVector {
            entries: self
                .entries
                .iter()
                .map(|(seq, &c)| (seq.clone(), c * z))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &Scalar)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn coefficient(&self, seq: &[usize]) -> Scalar {
        self.entries.get(seq).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn vacuum_coefficient(&self) -> Scalar {
        self.coefficient(&[])
    }

    /// Inner product, linear in the first argument.
    pub fn inner(&self, other: &FockVector) -> Scalar {
        let (small, big, flip) = if self.entries.len() <= other.entries.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::ZERO;
        for (seq, &c) in small.iter() {
            let d = big.coefficient(seq);
            acc += if flip { d * c.conj() } else { c * d.conj() };
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_degree(&self) -> usize {
        self.entries.keys().map(Vec::len).max().unwrap_or(0)
    }
}

/// A lazily applied operator expression.
///
/// `Product` composes right to left: `Product([A, B])` acts as `A(B(v))`.
#[derive(Clone, Debug)]
pub enum FockOp {
    LeftCreate(HVector),
    RightCreate(HVector),
    LeftGauge(HMatrix),
    RightGauge(HMatrix),
    Scalar(Scalar),
    Adjoint(Box<FockOp>),
    Sum(Vec<FockOp>),
    Product(Vec<FockOp>),
}

impl FockOp {
    pub fn left_create(f: HVector) -> FockOp {
        FockOp::LeftCreate(f)
    }

    pub fn right_create(f: HVector) -> FockOp {
        FockOp::RightCreate(f)
    }

    pub fn left_gauge(t: HMatrix) -> FockOp {
        FockOp::LeftGauge(t)
    }

    pub fn right_gauge(t: HMatrix) -> FockOp {
        FockOp::RightGauge(t)
    }

    pub fn scalar(z: Scalar) -> FockOp {
        FockOp::Scalar(z)
    }

    pub fn real(x: f64) -> FockOp {
        FockOp::Scalar(Complex64::new(x, 0.0))
    }

    pub fn adjoint(self) -> FockOp {
        match self {
            FockOp::Adjoint(inner) => *inner,
            other => FockOp::Adjoint(Box::new(other)),
        }
    }

    pub fn sum(parts: Vec<FockOp>) -> FockOp {
        FockOp::Sum(parts)
    }

    pub fn product(parts: Vec<FockOp>) -> FockOp {
        FockOp::Product(parts)
    }

    /// `l(f) + l(f)*`, the self-adjoint left field operator.
    pub fn left_field(f: HVector) -> FockOp {
        FockOp::Sum(vec![
            FockOp::LeftCreate(f.clone()),
            FockOp::LeftCreate(f).adjoint(),
        ])
    }

    /// `r(f) + r(f)*`, the self-adjoint right field operator.
    pub fn right_field(f: HVector) -> FockOp {
        FockOp::Sum(vec![
            FockOp::RightCreate(f.clone()),
            FockOp::RightCreate(f).adjoint(),
        ])
    }

    /// Maximum tensor-degree shift the operator can cause.
    pub fn capacity(&self) -> usize {
        match self {
            FockOp::LeftCreate(_) | FockOp::RightCreate(_) => 1,
            FockOp::LeftGauge(_) | FockOp::RightGauge(_) | FockOp::Scalar(_) => 0,
            FockOp::Adjoint(inner) => inner.capacity(),
            FockOp::Sum(parts) => parts.iter().map(FockOp::capacity).max().unwrap_or(0),
            FockOp::Product(parts) => parts.iter().map(FockOp::capacity).sum(),
        }
    }
}

// ---------------------------------------------------------------------------
// Amplification to H^(+)N
// ---------------------------------------------------------------------------

/// The direct-sum amplification `H -> H^(+)N` with hatted data
/// `f_hat = (f (+) ... (+) f)/sqrt(N)` and `T_hat = T (+) ... (+) T`,
/// plus the per-copy coordinate slices.
#[derive(Clone, Debug)]
pub struct Amplification {
    base_dim: usize,
    copies: usize,
}

impl Amplification {
    pub fn new(base_dim: usize, copies: usize) -> Result<Amplification> {
        if copies == 0 {
            return Err(Error::Model("amplification needs at least one copy".into()));
        }
        Ok(Amplification { base_dim, copies })
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn dim(&self) -> usize {
        self.base_dim * self.copies
    }

    /// Space over `H^(+)N` with one named summand per copy.
    pub fn space(&self, depth: usize) -> FockSpace {
        let mut summands = BTreeMap::new();
        for c in 0..self.copies {
            summands.insert(
                format!("copy{c}"),
                (c * self.base_dim..(c + 1) * self.base_dim).collect(),
            );
        }
        FockSpace {
            dim_h: self.dim(),
            depth,
            summands,
        }
    }

    pub fn hat_vector(&self, f: &HVector) -> HVector {
        let scale = 1.0 / (self.copies as f64).sqrt();
        HVector::from_fn(self.dim(), |i, _| f[i % self.base_dim] * scale)
    }

    /// The `i`-th coordinate slice of `f_hat`: `f` in copy `i`, scaled by
    /// `1/sqrt(N)`.
    pub fn slice_vector(&self, f: &HVector, copy: usize) -> HVector {
        let scale = 1.0 / (self.copies as f64).sqrt();
        HVector::from_fn(self.dim(), |i, _| {
            if i / self.base_dim == copy {
                f[i % self.base_dim] * scale
            } else {
                Complex64::ZERO
            }
        })
    }

    pub fn hat_matrix(&self, t: &HMatrix) -> HMatrix {
        HMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i / self.base_dim == j / self.base_dim {
                t[(i % self.base_dim, j % self.base_dim)]
            } else {
                Complex64::ZERO
            }
        })
    }

    /// The block of `T_hat` supported on copy `i` alone.
    pub fn slice_matrix(&self, t: &HMatrix, copy: usize) -> HMatrix {
        HMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i / self.base_dim == copy && j / self.base_dim == copy {
                t[(i % self.base_dim, j % self.base_dim)]
            } else {
                Complex64::ZERO
            }
        })
    }
}

/// Hatted families for a list of vectors and gauge matrices.
#[derive(Clone, Debug)]
pub struct AmplifiedFamilies {
    pub amp: Amplification,
    pub f_hats: Vec<HVector>,
    pub g_hats: Vec<HVector>,
    pub t_hats: Vec<HMatrix>,
}

/// Amplify creation vectors `f_list`, annihilation vectors `g_list`, and
/// gauge matrices `t_list` to `H^(+)N`.
pub fn amplify(
    f_list: &[HVector],
    g_list: &[HVector],
    t_list: &[HMatrix],
    copies: usize,
) -> Result<AmplifiedFamilies> {
    let base_dim = f_list
        .iter()
        .map(HVector::len)
        .chain(g_list.iter().map(HVector::len))
        .chain(t_list.iter().map(HMatrix::nrows))
        .next()
        .unwrap_or(0);
    for f in f_list.iter().chain(g_list.iter()) {
        if f.len() != base_dim {
            return Err(Error::SizeMismatch {
                left: f.len(),
                right: base_dim,
            });
        }
    }
    for t in t_list {
        if t.nrows() != base_dim || t.ncols() != base_dim {
            return Err(Error::SizeMismatch {
                left: t.nrows(),
                right: base_dim,
            });
        }
    }
    let amp = Amplification::new(base_dim, copies)?;
    Ok(AmplifiedFamilies {
        f_hats: f_list.iter().map(|f| amp.hat_vector(f)).collect(),
        g_hats: g_list.iter().map(|g| amp.hat_vector(g)).collect(),
        t_hats: t_list.iter().map(|t| amp.hat_matrix(t)).collect(),
        amp,
    })
}

// ---------------------------------------------------------------------------
// The standard infinitely divisible pair
// ---------------------------------------------------------------------------

pub const LEFT_LABEL: &str = "a_l";
pub const RIGHT_LABEL: &str = "a_r";

/// The two-faced pair
/// `a = (l(f) + l(f)* + gauge_l(T1) + lambda1, r(g) + r(g)* + gauge_r(T2) + lambda2)`.
#[derive(Clone, Debug)]
pub struct InfDivPair {
    f: HVector,
    g: HVector,
    t1: HMatrix,
    t2: HMatrix,
    lambda1: f64,
    lambda2: f64,
}

/// Build the standard infinitely divisible pair; the gauge matrices must be
/// self-adjoint so both faces are self-adjoint operators.
pub fn infdiv_pair(
    f: HVector,
    g: HVector,
    t1: HMatrix,
    t2: HMatrix,
    lambda1: f64,
    lambda2: f64,
) -> Result<InfDivPair> {
    let dim = f.len();
    if g.len() != dim {
        return Err(Error::SizeMismatch {
            left: g.len(),
            right: dim,
        });
    }
    for (name, t) in [("T1", &t1), ("T2", &t2)] {
        if t.nrows() != dim || t.ncols() != dim {
            return Err(Error::SizeMismatch {
                left: t.nrows(),
                right: dim,
            });
        }
        if !is_hermitian(t, 1e-12) {
            return Err(Error::NotSelfAdjoint(name.into()));
        }
    }
    Ok(InfDivPair {
        f,
        g,
        t1,
        t2,
        lambda1,
        lambda2,
    })
}

impl InfDivPair {
    pub fn dim_h(&self) -> usize {
        self.f.len()
    }

    pub fn left_op(&self) -> FockOp {
        FockOp::Sum(vec![
            FockOp::left_field(self.f.clone()),
            FockOp::LeftGauge(self.t1.clone()),
            FockOp::real(self.lambda1),
        ])
    }

    pub fn right_op(&self) -> FockOp {
        FockOp::Sum(vec![
            FockOp::right_field(self.g.clone()),
            FockOp::RightGauge(self.t2.clone()),
            FockOp::real(self.lambda2),
        ])
    }

    pub fn space(&self, depth: usize) -> FockSpace {
        FockSpace::new(self.dim_h(), depth)
    }

    /// Dense moments of the pair under the vacuum state, letters
    /// `a_l` / `a_r`.
    pub fn moments(&self, n_max: usize) -> Result<MomentFunctional> {
        let space = self.space(n_max);
        let mut left = BTreeMap::new();
        left.insert(LEFT_LABEL.to_string(), self.left_op());
        let mut right = BTreeMap::new();
        right.insert(RIGHT_LABEL.to_string(), self.right_op());
        space.two_faced_moments(&left, &right, n_max)
    }

    /// The `N`-fold bi-free decomposition on `H^(+)N`: the pair equals the
    /// sum of the returned summand pairs, which live on orthogonal copies.
    pub fn decompose(&self, copies: usize) -> Result<InfDivDecomposition> {
        let amp = Amplification::new(self.dim_h(), copies)?;
        let mut parts = Vec::with_capacity(copies);
        for c in 0..copies {
            let f_c = amp.slice_vector(&self.f, c);
            let g_c = amp.slice_vector(&self.g, c);
            let t1_c = amp.slice_matrix(&self.t1, c);
            let t2_c = amp.slice_matrix(&self.t2, c);
            let left = FockOp::Sum(vec![
                FockOp::left_field(f_c),
                FockOp::LeftGauge(t1_c),
                FockOp::real(self.lambda1 / copies as f64),
            ]);
            let right = FockOp::Sum(vec![
                FockOp::right_field(g_c),
                FockOp::RightGauge(t2_c),
                FockOp::real(self.lambda2 / copies as f64),
            ]);
            parts.push((left, right));
        }
        Ok(InfDivDecomposition { amp, parts })
    }
}

/// One bi-free summand pair per copy; their sum reproduces the hatted pair.
#[derive(Clone, Debug)]
pub struct InfDivDecomposition {
    pub amp: Amplification,
    pub parts: Vec<(FockOp, FockOp)>,
}
