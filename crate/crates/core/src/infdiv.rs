//! Infinite divisibility of a two-faced pair, decided from its cumulants.
//!
//! The cumulant set of a pair `a = (a_l, a_r)` is arranged into a Gram form
//! over face words: the entry for `(chi_n, chi_m)` is the cumulant of the
//! joined pattern `chi_n ⊔ chi_m` (first word verbatim, second reversed).
//! Infinite divisibility is equivalent to this form being conditionally
//! non-negative definite and conditionally bounded; when it is, the pair has
//! a Fock realization
//!
//! ```text
//! b_l = l(X_l) + l(X_l)* + gauge_l(X_l·) + kappa(a_l) 1
//! b_r = r(X_r) + r(X_r)* + gauge_r(X_r·) + kappa(a_r) 1
//! ```
//!
//! on the Hilbert space obtained by factoring the Gram form, with `X_lambda·`
//! the right-multiplication operator of the word algebra.  (The gauge on the
//! right face is taken as a right gauge, by left/right symmetry.)
//! [`reconstruct`] builds that realization at a finite truncation and
//! verifies that it reproduces the cumulants; [`levy_realize`] extends it to
//! a bi-free Levy process on a finite time grid, where the continuum
//! `L^2(R_+)` is replaced by the span of grid-cell indicators with
//! `<ind_[s,t), ind_[s,t)> = t - s`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::linalg::{SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockOp, FockSpace, HMatrix, HVector};
use crate::functionals::{bifreeness_test, BifreeReport, CumulantFunctional, Letter, Scalar, Word};
use crate::partitions::{ChiWord, Face};

/// Default tolerance for conditional non-negative definiteness.
pub const CND_TOL: f64 = 1e-9;
/// Default tolerance for cumulant-matching checks.
pub const MATCH_TOL: f64 = 1e-8;
/// Eigenvalues below this are treated as the kernel of the Gram form.
pub const KERNEL_TOL: f64 = 1e-10;
/// Residual bound for the right-multiplication least-squares system.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Cumulants of a single two-faced pair: exactly one left and one right
/// letter, dense up to `max_order`.
#[derive(Clone, Debug)]
pub struct PairCumulants {
    cf: CumulantFunctional,
    left: Letter,
    right: Letter,
}

impl PairCumulants {
    pub fn new(cf: CumulantFunctional) -> Result<Self> {
        let lefts: Vec<&Letter> = cf
            .alphabet()
            .iter()
            .filter(|l| l.face() == Face::Left)
            .collect();
        let rights: Vec<&Letter> = cf
            .alphabet()
            .iter()
            .filter(|l| l.face() == Face::Right)
            .collect();
        if lefts.len() != 1 || rights.len() != 1 {
            return Err(Error::Schema(format!(
                "pair cumulants need exactly one left and one right letter, \
                 found {} left and {} right",
                lefts.len(),
                rights.len()
            )));
        }
        let left = lefts[0].clone();
        let right = rights[0].clone();
        Ok(PairCumulants { cf, left, right })
    }

    pub fn cumulants(&self) -> &CumulantFunctional {
        &self.cf
    }

    pub fn max_order(&self) -> usize {
        self.cf.max_order()
    }

    pub fn letter(&self, face: Face) -> &Letter {
        match face {
            Face::Left => &self.left,
            Face::Right => &self.right,
        }
    }

    /// The word realizing a face pattern.
    pub fn word_for(&self, chi: &ChiWord) -> Word {
        chi.faces()
            .iter()
            .map(|&f| self.letter(f).clone())
            .collect()
    }

    /// Cumulant of the word realizing `chi`.
    pub fn entry(&self, chi: &ChiWord) -> Result<Scalar> {
        self.cf.entry(&self.word_for(chi))
    }

    /// First-order cumulant of one face.
    pub fn mean(&self, face: Face) -> Result<Scalar> {
        self.cf.entry(&Word::single(self.letter(face).clone()))
    }

    /// Largest cumulant modulus over all orders `1..=max_order`.
    pub fn max_abs(&self) -> f64 {
        let mut worst = 0.0f64;
        for chi in chi_words_up_to(self.max_order()) {
            worst = worst.max(self.entry(&chi).expect("dense").norm());
        }
        worst
    }

    pub fn scale(&self, t: f64) -> PairCumulants {
        PairCumulants {
            cf: self.cf.scale(t),
            left: self.left.clone(),
            right: self.right.clone(),
        }
    }
}

/// `chi_n ⊔ chi_m`: the first word verbatim followed by the second reversed.
pub fn concat_chi(chi_n: &ChiWord, chi_m: &ChiWord) -> ChiWord {
    let mut faces = chi_n.faces().to_vec();
    faces.extend(chi_m.faces().iter().rev());
    ChiWord::new(faces).expect("nonempty by construction")
}

/// All face words of length `1..=cap`, shortest first, `l` before `r`.
pub fn chi_words_up_to(cap: usize) -> Vec<ChiWord> {
    let mut out = Vec::new();
    for len in 1..=cap {
        for bits in 0..(1usize << len) {
            let faces = (0..len)
                .map(|i| {
                    if bits >> (len - 1 - i) & 1 == 0 {
                        Face::Left
                    } else {
                        Face::Right
                    }
                })
                .collect();
            out.push(ChiWord::new(faces).unwrap());
        }
    }
    out
}

/// The cumulant Gram form over face words up to a length cap:
/// `matrix[(n, m)] = kappa_{chi_n ⊔ chi_m}(a)`.
#[derive(Clone, Debug)]
pub struct GramForm {
    pub words: Vec<ChiWord>,
    pub matrix: HMatrix,
}

impl GramForm {
    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> HMatrix {
        (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

fn gram_with_insert(pc: &PairCumulants, cap: usize, insert: Option<Face>) -> Result<GramForm> {
    let extra = if insert.is_some() { 2 } else { 0 };
    if 2 * cap + extra > pc.max_order() {
        return Err(Error::Truncation {
            len: 2 * cap + extra,
            max_order: pc.max_order(),
        });
    }
    let words = chi_words_up_to(cap);
    let k = words.len();
    let mut matrix = HMatrix::zeros(k, k);
    for (n, chi_n) in words.iter().enumerate() {
        for (m, chi_m) in words.iter().enumerate() {
            let (row, col) = match insert {
                None => (chi_n.clone(), chi_m.clone()),
                Some(face) => {
                    let mut a = chi_n.faces().to_vec();
                    a.push(face);
                    let mut b = chi_m.faces().to_vec();
                    b.push(face);
                    (ChiWord::new(a)?, ChiWord::new(b)?)
                }
            };
            matrix[(n, m)] = pc.entry(&concat_chi(&row, &col))?;
        }
    }
    Ok(GramForm { words, matrix })
}

/// Gram form over all face words of length `1..=length_cap`; requires the
/// cumulant table to be dense to order `2*length_cap`.
pub fn gram_matrix(pc: &PairCumulants, length_cap: usize) -> Result<GramForm> {
    gram_with_insert(pc, length_cap, None)
}

/// Diagnostics of the infinite-divisibility checks.  `psd` holds iff the
/// Gram form is Hermitian and its smallest eigenvalue is at least `-tol`.
#[derive(Clone, Debug, Serialize)]
pub struct InfDivReport {
    pub min_eigenvalue: f64,
    pub psd: bool,
    pub hermitian_defect: f64,
    pub gram_cap: usize,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(rename = "bound_L", skip_serializing_if = "Option::is_none")]
    pub bound_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levy: Option<LevyReport>,
    /// Reconstruction convention: the gauge of the right face acts on the
    /// last tensor slot (a right gauge), mirroring the left face.
    pub gauge_convention: &'static str,
    pub pass: bool,
}

pub const GAUGE_CONVENTION: &str =
    "right face uses gauge_r(X_r), the mirror of the left face's gauge_l(X_l)";

/// Conditional non-negative definiteness: eigen-decompose the Gram form and
/// test the smallest eigenvalue against `-tol`.
pub fn check_cnd(pc: &PairCumulants, length_cap: usize, tol: f64) -> Result<InfDivReport> {
    let gram = gram_matrix(pc, length_cap)?;
    let defect = gram.hermitian_defect();
    let scale = gram.matrix.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let defect_ok = defect <= 1e-12 * (1.0 + scale);

    let (min_eig, mut witness) = if gram.words.is_empty() {
        (0.0, None)
    } else {
        let eig = SymmetricEigen::new(gram.hermitian_part());
        let (mut min_idx, mut min_eig) = (0usize, f64::INFINITY);
        for (i, &v) in eig.eigenvalues.iter().enumerate() {
            if v < min_eig {
                min_eig = v;
                min_idx = i;
            }
        }
        let witness = if min_eig < -tol {
            // prefer a failing 1x1 principal minor as the witness
            let diag_min = (0..gram.words.len())
                .min_by(|&i, &j| {
                    gram.matrix[(i, i)]
                        .re
                        .partial_cmp(&gram.matrix[(j, j)].re)
                        .unwrap()
                })
                .unwrap();
            if gram.matrix[(diag_min, diag_min)].re < -tol {
                Some(format!(
                    "Gram diagonal for word pattern \"{}\" is {:.6e}",
                    gram.words[diag_min],
                    gram.matrix[(diag_min, diag_min)].re
                ))
            } else {
                let vec = eig.eigenvectors.column(min_idx);
                let dominant = (0..gram.words.len())
                    .max_by(|&i, &j| vec[i].norm().partial_cmp(&vec[j].norm()).unwrap())
                    .unwrap();
                Some(format!(
                    "eigenvalue {:.6e} on a vector dominated by word pattern \"{}\"",
                    min_eig, gram.words[dominant]
                ))
            }
        } else {
            None
        };
        (min_eig, witness)
    };

    if !defect_ok && witness.is_none() {
        witness = Some(format!("Gram form is not Hermitian (defect {defect:.3e})"));
    }
    let psd = min_eig >= -tol && defect_ok;
    Ok(InfDivReport {
        min_eigenvalue: min_eig,
        psd,
        hermitian_defect: defect,
        gram_cap: length_cap,
        tol,
        witness,
        bound_l: None,
        reconstruction_error: None,
        levy: None,
        gauge_convention: GAUGE_CONVENTION,
        pass: psd,
    })
}

fn max_abs(m: &HMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Conditional boundedness at one face: the least `L` dominating the form
/// with `a_face^2` inserted by `L` times the plain form.  Solved as a
/// generalized eigenvalue problem restricted to the numerical range of the
/// base form; the inserted form must vanish on the kernel, otherwise no `L`
/// exists at this truncation.
pub fn check_cbound(pc: &PairCumulants, face: Face, length_cap: usize, tol: f64) -> Result<f64> {
    let base = gram_with_insert(pc, length_cap, None)?.hermitian_part();
    let inserted = gram_with_insert(pc, length_cap, Some(face))?.hermitian_part();
    let k = base.nrows();
    if k == 0 {
        return Ok(0.0);
    }
    let eig = SymmetricEigen::new(base);
    let positive: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > tol).collect();

    // component of the inserted form outside range(base) must vanish
    let mut projector = HMatrix::zeros(k, k);
    for &i in &positive {
        let u = eig.eigenvectors.column(i);
        projector += u * u.adjoint();
    }
    let leak = max_abs(&(&inserted - &projector * &inserted * &projector));
    if leak > tol.max(1e-12 * (1.0 + max_abs(&inserted))) {
        return Err(Error::NotConditionallyBounded { leak });
    }
    if positive.is_empty() {
        return Ok(0.0);
    }

    // W = D^{-1/2} U+* G_ins U+ D^{-1/2}; L = lambda_max(W)
    let p = positive.len();
    let mut u_pos = HMatrix::zeros(k, p);
    for (col, &i) in positive.iter().enumerate() {
        u_pos.set_column(col, &eig.eigenvectors.column(i));
    }
    let compressed = u_pos.adjoint() * &inserted * &u_pos;
    let mut w = HMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            let da = eig.eigenvalues[positive[a]].sqrt();
            let db = eig.eigenvalues[positive[b]].sqrt();
            w[(a, b)] = compressed[(a, b)] / (da * db);
        }
    }
    let w = (&w + w.adjoint()) * Complex64::new(0.5, 0.0);
    let bound = SymmetricEigen::new(w)
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
    Ok(bound.max(0.0))
}

/// A truncated Fock realization recovered from a cumulant set.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// Dimension of the factored inner-product space `H`.
    pub space_dim: usize,
    pub left_vector: HVector,
    pub right_vector: HVector,
    pub left_gauge: HMatrix,
    pub right_gauge: HMatrix,
    pub mean_left: Scalar,
    pub mean_right: Scalar,
    pub verify_order: usize,
    /// Largest deviation of the realized cumulants from the input, over all
    /// face words of length `1..=verify_order`.
    pub reconstruction_error: f64,
}

impl Reconstruction {
    pub fn left_op(&self) -> FockOp {
        FockOp::Sum(vec![
            FockOp::left_field(self.left_vector.clone()),
            FockOp::left_gauge(self.left_gauge.clone()),
            FockOp::scalar(self.mean_left),
        ])
    }

    pub fn right_op(&self) -> FockOp {
        FockOp::Sum(vec![
            FockOp::right_field(self.right_vector.clone()),
            FockOp::right_gauge(self.right_gauge.clone()),
            FockOp::scalar(self.mean_right),
        ])
    }

    pub fn space(&self, depth: usize) -> FockSpace {
        FockSpace::new(self.space_dim, depth)
    }
}

/// Cumulants of a two-faced pair of Fock operators, read off a dense moment
/// table.
fn pair_cumulants_of_ops(
    left: &FockOp,
    right: &FockOp,
    dim_h: usize,
    n_max: usize,
) -> Result<PairCumulants> {
    let space = FockSpace::new(dim_h, n_max * left.capacity().max(right.capacity()).max(1));
    let mut left_map = BTreeMap::new();
    left_map.insert(crate::fock::LEFT_LABEL.to_string(), left.clone());
    let mut right_map = BTreeMap::new();
    right_map.insert(crate::fock::RIGHT_LABEL.to_string(), right.clone());
    let mf = space.two_faced_moments(&left_map, &right_map, n_max)?;
    PairCumulants::new(mf.to_cumulants()?)
}

/// Factor the Gram form at cap `verify_order - 1`, build the right
/// multiplication operators on the modeled span, assemble the operator pair,
/// and verify its cumulants against the input.
pub fn reconstruct(pc: &PairCumulants, verify_order: usize) -> Result<Reconstruction> {
    if verify_order == 0 {
        return Err(Error::EmptyWord);
    }
    let cap = verify_order - 1;
    let cnd = check_cnd(pc, cap, CND_TOL)?;
    if !cnd.psd {
        return Err(Error::CndFailed {
            min_eigenvalue: cnd.min_eigenvalue,
            witness: cnd.witness.unwrap_or_default(),
        });
    }

    let gram = gram_matrix(pc, cap)?;
    let words = gram.words.clone();
    let n_words = words.len();
    // inner product matrix: IP[n][m] = <X_{chi_n}, X_{chi_m}> = G[m][n]
    let ip = {
        let t = gram.matrix.transpose();
        (&t + t.adjoint()) * Complex64::new(0.5, 0.0)
    };

    // coordinates of [X_chi] in the factored space: column n of D^{1/2} U^T,
    // restricted to eigenvalues above the kernel tolerance
    let (space_dim, coords) = if n_words == 0 {
        (0usize, Vec::new())
    } else {
        let eig = SymmetricEigen::new(ip);
        let kept: Vec<usize> = (0..n_words)
            .filter(|&i| eig.eigenvalues[i] > KERNEL_TOL)
            .collect();
        let dim = kept.len();
        let coords: Vec<HVector> = (0..n_words)
            .map(|n| {
                HVector::from_fn(dim, |row, _| {
                    let i = kept[row];
                    eig.eigenvalues[i].sqrt() * eig.eigenvectors[(n, i)]
                })
            })
            .collect();
        (dim, coords)
    };

    let index_of: HashMap<ChiWord, usize> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();

    // right multiplication by X_lambda maps [X_chi] to [X_{chi lambda}] on
    // words of length <= cap - 1; solve the matrix least-squares system and
    // reject inconsistent systems (the cumulant data escapes the span)
    let right_mult = |face: Face| -> Result<HMatrix> {
        if space_dim == 0 {
            return Ok(HMatrix::zeros(0, 0));
        }
        let domain: Vec<usize> = words
            .iter()
            .enumerate()
            .filter(|(_, w)| w.len() < cap)
            .map(|(i, _)| i)
            .collect();
        if domain.is_empty() {
            return Ok(HMatrix::zeros(space_dim, space_dim));
        }
        let p = domain.len();
        let mut a = HMatrix::zeros(space_dim, p);
        let mut b = HMatrix::zeros(space_dim, p);
        for (col, &i) in domain.iter().enumerate() {
            a.set_column(col, &coords[i]);
            let mut extended = words[i].faces().to_vec();
            extended.push(face);
            let target = index_of[&ChiWord::new(extended)?];
            b.set_column(col, &coords[target]);
        }
        // M A = B  <=>  A* M* = B*
        let svd = SVD::new(a.adjoint(), true, true);
        let m_adj = svd
            .solve(&b.adjoint(), 1e-13)
            .map_err(|e| Error::Model(format!("least squares failed: {e}")))?;
        let m = m_adj.adjoint();
        let residual = max_abs(&(&m * &a - &b));
        if residual > RESIDUAL_TOL {
            return Err(Error::RightMultInconsistent { residual });
        }
        Ok(m)
    };

    let left_gauge = right_mult(Face::Left)?;
    let right_gauge = right_mult(Face::Right)?;
    let chi_l = ChiWord::constant(Face::Left, 1)?;
    let chi_r = ChiWord::constant(Face::Right, 1)?;
    let left_vector = index_of
        .get(&chi_l)
        .map(|&i| coords[i].clone())
        .unwrap_or_else(|| HVector::zeros(space_dim));
    let right_vector = index_of
        .get(&chi_r)
        .map(|&i| coords[i].clone())
        .unwrap_or_else(|| HVector::zeros(space_dim));

    let mut rec = Reconstruction {
        space_dim,
        left_vector,
        right_vector,
        left_gauge,
        right_gauge,
        mean_left: pc.mean(Face::Left)?,
        mean_right: pc.mean(Face::Right)?,
        verify_order,
        reconstruction_error: f64::NAN,
    };

    let realized = pair_cumulants_of_ops(&rec.left_op(), &rec.right_op(), space_dim, verify_order)?;
    let mut worst = 0.0f64;
    for chi in chi_words_up_to(verify_order) {
        let diff = (realized.entry(&chi)? - pc.entry(&chi)?).norm();
        worst = worst.max(diff);
    }
    rec.reconstruction_error = worst;
    Ok(rec)
}

/// The marginal cumulants of the Levy process at time `t >= 0`: every entry
/// scales linearly.
pub fn levy_marginal(pc: &PairCumulants, t: f64) -> Result<PairCumulants> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    Ok(pc.scale(t))
}

/// Grid realization report of the Levy process.
#[derive(Clone, Debug, Serialize)]
pub struct LevyReport {
    pub grid: Vec<f64>,
    pub verify_order: usize,
    /// Largest deviation of increment cumulants from `(t - s) * kappa`.
    pub increment_error: f64,
    /// Mixed cumulants across disjoint grid cells.
    pub bifree: BifreeReport,
    /// `(t, max |kappa| of the marginal at t)` along `t = 1, 1/2, 1/4, 1/8`.
    pub decay: Vec<(f64, f64)>,
    pub decay_monotone: bool,
    pub pass: bool,
}

/// Realize the process on a finite grid: `K = (grid cells) (x) H` with the
/// reconstruction's `H` and increments supported on their own cell.  Verifies
/// increment scaling, bi-freeness of disjoint increments, and marginal decay.
pub fn levy_realize(pc: &PairCumulants, grid: &[f64], verify_order: usize) -> Result<LevyReport> {
    if grid.len() < 2 || grid[0] != 0.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadGrid);
    }
    let rec = reconstruct(pc, verify_order)?;
    let k = rec.space_dim;
    let cells: Vec<(f64, f64)> = grid.windows(2).map(|w| (w[0], w[1])).collect();
    let n_cells = cells.len();
    let dim_k = n_cells * k;

    let embed_vector = |v: &HVector, cell: usize, weight: f64| -> HVector {
        HVector::from_fn(dim_k, |i, _| {
            if k > 0 && i / k == cell {
                v[i % k] * weight
            } else {
                Complex64::ZERO
            }
        })
    };
    let embed_matrix = |m: &HMatrix, cell: usize| -> HMatrix {
        HMatrix::from_fn(dim_k, dim_k, |i, j| {
            if k > 0 && i / k == cell && j / k == cell {
                m[(i % k, j % k)]
            } else {
                Complex64::ZERO
            }
        })
    };

    // increment over cell [s, t): vectors scaled by sqrt(t-s), gauge acting
    // within the cell, scalar part (t-s) * kappa^1
    let increment_ops = |cell: usize| -> (FockOp, FockOp) {
        let (s, t) = cells[cell];
        let w = (t - s).sqrt();
        let left = FockOp::Sum(vec![
            FockOp::left_field(embed_vector(&rec.left_vector, cell, w)),
            FockOp::left_gauge(embed_matrix(&rec.left_gauge, cell)),
            FockOp::scalar(rec.mean_left * (t - s)),
        ]);
        let right = FockOp::Sum(vec![
            FockOp::right_field(embed_vector(&rec.right_vector, cell, w)),
            FockOp::right_gauge(embed_matrix(&rec.right_gauge, cell)),
            FockOp::scalar(rec.mean_right * (t - s)),
        ]);
        (left, right)
    };

    // (i) increment cumulants equal (t-s) * kappa
    let mut increment_error = 0.0f64;
    for (cell, &(s, t)) in cells.iter().enumerate() {
        let (left, right) = increment_ops(cell);
        let realized = pair_cumulants_of_ops(&left, &right, dim_k, verify_order)?;
        let target = pc.scale(t - s);
        for chi in chi_words_up_to(verify_order) {
            let diff = (realized.entry(&chi)? - target.entry(&chi)?).norm();
            increment_error = increment_error.max(diff);
        }
    }

    // (ii) increments over disjoint cells are bi-free
    let bifree_order = verify_order.clamp(2, 4);
    let space = FockSpace::new(dim_k, bifree_order);
    let mut left_map = BTreeMap::new();
    let mut right_map = BTreeMap::new();
    let mut grouping = BTreeMap::new();
    for cell in 0..n_cells {
        let (left, right) = increment_ops(cell);
        let l_label = format!("a_l@{cell}");
        let r_label = format!("a_r@{cell}");
        grouping.insert(l_label.clone(), format!("cell{cell}"));
        grouping.insert(r_label.clone(), format!("cell{cell}"));
        left_map.insert(l_label, left);
        right_map.insert(r_label, right);
    }
    let joint = space.two_faced_moments(&left_map, &right_map, bifree_order)?;
    let bifree = bifreeness_test(&joint, &grouping, bifree_order, CND_TOL)?;

    // (iii) marginal cumulants vanish entrywise as t -> 0+
    let mut decay = Vec::new();
    for &t in &[1.0, 0.5, 0.25, 0.125] {
        decay.push((t, levy_marginal(pc, t)?.max_abs()));
    }
    let decay_monotone = decay.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15);

    let pass = increment_error <= CND_TOL && bifree.pass && decay_monotone;
    Ok(LevyReport {
        grid: grid.to_vec(),
        verify_order,
        increment_error,
        bifree,
        decay,
        decay_monotone,
        pass,
    })
}

/// Caps and tolerances for the composite infinite-divisibility check.
#[derive(Clone, Copy, Debug)]
pub struct AnalyzeConfig {
    pub cnd_cap: usize,
    pub cbound_cap: Option<usize>,
    pub verify_order: usize,
    pub cnd_tol: f64,
    pub match_tol: f64,
}

impl AnalyzeConfig {
    /// Largest caps a table of the given order supports: the plain Gram needs
    /// order `2*cap`, the inserted one `2*cap + 2`, and reconstruction at
    /// `verify_order` needs the Gram at `verify_order - 1`.
    pub fn for_order(max_order: usize) -> Result<AnalyzeConfig> {
        if max_order < 2 {
            return Err(Error::Truncation { len: 2, max_order });
        }
        let cnd_cap = max_order / 2;
        let cbound_cap = if max_order >= 4 {
            Some((max_order - 2) / 2)
        } else {
            None
        };
        Ok(AnalyzeConfig {
            cnd_cap,
            cbound_cap,
            verify_order: cnd_cap + 1,
            cnd_tol: CND_TOL,
            match_tol: MATCH_TOL,
        })
    }
}

/// Run the full battery: conditional non-negative definiteness, conditional
/// boundedness at both faces, then reconstruction.  `pass` requires all of
/// them.
pub fn analyze(pc: &PairCumulants, config: &AnalyzeConfig) -> Result<InfDivReport> {
    let mut report = check_cnd(pc, config.cnd_cap, config.cnd_tol)?;
    if !report.psd {
        report.pass = false;
        return Ok(report);
    }
    if let Some(cap) = config.cbound_cap {
        let mut bound = 0.0f64;
        let mut failed = None;
        for face in [Face::Left, Face::Right] {
            match check_cbound(pc, face, cap, config.cnd_tol) {
                Ok(l) => bound = bound.max(l),
                Err(Error::NotConditionallyBounded { leak }) => {
                    failed = Some(format!(
                        "not conditionally bounded at face {face} (kernel leak {leak:.3e})"
                    ));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match failed {
            Some(msg) => {
                report.witness = Some(msg);
                report.pass = false;
                return Ok(report);
            }
            None => report.bound_l = Some(bound),
        }
    }
    let rec = reconstruct(pc, config.verify_order)?;
    report.reconstruction_error = Some(rec.reconstruction_error);
    report.pass = rec.reconstruction_error <= config.match_tol;
    Ok(report)
}
