//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;

use bifree::fock::{FockOp, HMatrix, HVector};
use bifree::functionals::{MomentFunctional, Word};
use bifree::partitions::enumerate_noncrossing;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rand_hvec(dim: usize, rng: &mut StdRng) -> HVector {
    HVector::from_fn(dim, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn rand_matrix(dim: usize, rng: &mut StdRng) -> HMatrix {
    HMatrix::from_fn(dim, dim, |_, _| {
        c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7))
    })
}

pub fn rand_hermitian(dim: usize, rng: &mut StdRng) -> HMatrix {
    let raw = rand_matrix(dim, rng);
    (raw.clone() + raw.adjoint()) * c(0.5, 0.0)
}

/// Embed a `sub`-dimensional vector at a coordinate offset of a larger space.
pub fn embed_vec(v: &HVector, offset: usize, dim: usize) -> HVector {
    HVector::from_fn(dim, |i, _| {
        if i >= offset && i < offset + v.len() {
            v[i - offset]
        } else {
            Complex64::ZERO
        }
    })
}

/// Embed a block matrix at a diagonal offset of a larger space.
pub fn embed_mat(m: &HMatrix, offset: usize, dim: usize) -> HMatrix {
    HMatrix::from_fn(dim, dim, |i, j| {
        let n = m.nrows();
        if i >= offset && i < offset + n && j >= offset && j < offset + n {
            m[(i - offset, j - offset)]
        } else {
            Complex64::ZERO
        }
    })
}

/// Self-adjoint two-faced pair data `(f, g, T, S)` on a `sub_dim` space:
/// `a_l = l(f) + l(f)* + gauge_l(T)`, `a_r = r(g) + r(g)* + gauge_r(S)`.
pub struct PairData {
    pub f: HVector,
    pub g: HVector,
    pub t: HMatrix,
    pub s: HMatrix,
}

impl PairData {
    pub fn random(sub_dim: usize, rng: &mut StdRng) -> PairData {
        PairData {
            f: rand_hvec(sub_dim, rng),
            g: rand_hvec(sub_dim, rng),
            t: rand_hermitian(sub_dim, rng),
            s: rand_hermitian(sub_dim, rng),
        }
    }

    pub fn left_op(&self) -> FockOp {
        FockOp::Sum(vec![
            FockOp::left_field(self.f.clone()),
            FockOp::left_gauge(self.t.clone()),
        ])
    }

    pub fn right_op(&self) -> FockOp {
        FockOp::Sum(vec![
            FockOp::right_field(self.g.clone()),
            FockOp::right_gauge(self.s.clone()),
        ])
    }

    /// The same pair embedded at a coordinate offset of a larger space.
    pub fn embedded(&self, offset: usize, dim: usize) -> PairData {
        PairData {
            f: embed_vec(&self.f, offset, dim),
            g: embed_vec(&self.g, offset, dim),
            t: embed_mat(&self.t, offset, dim),
            s: embed_mat(&self.s, offset, dim),
        }
    }
}

/// Two self-adjoint pairs hosted on orthogonal summands of `C^(2*sub_dim)`,
/// with the grouping that declares them as separate families.
pub struct TwoGroupFamily {
    pub dim: usize,
    pub groups: [PairData; 2],
    pub left_ops: BTreeMap<String, FockOp>,
    pub right_ops: BTreeMap<String, FockOp>,
    pub grouping: BTreeMap<String, String>,
}

pub fn two_group_family(sub_dim: usize, rng: &mut StdRng) -> TwoGroupFamily {
    let dim = 2 * sub_dim;
    let base = [
        PairData::random(sub_dim, rng),
        PairData::random(sub_dim, rng),
    ];
    let groups = [base[0].embedded(0, dim), base[1].embedded(sub_dim, dim)];
    let mut left_ops = BTreeMap::new();
    let mut right_ops = BTreeMap::new();
    let mut grouping = BTreeMap::new();
    for (i, pair) in groups.iter().enumerate() {
        let l_label = format!("a_l{}", i + 1);
        let r_label = format!("a_r{}", i + 1);
        grouping.insert(l_label.clone(), format!("g{}", i + 1));
        grouping.insert(r_label.clone(), format!("g{}", i + 1));
        left_ops.insert(l_label, pair.left_op());
        right_ops.insert(r_label, pair.right_op());
    }
    TwoGroupFamily {
        dim,
        groups,
        left_ops,
        right_ops,
        grouping,
    }
}

/// Independent free-cumulant oracle over `NC(n)` alone: the defining
/// recursion `kappa(w) = phi(w) - sum over proper non-crossing partitions of
/// the product of lower cumulants`, with no Moebius weights and no face
/// machinery.
pub struct FreeCumulantOracle<'a> {
    mf: &'a MomentFunctional,
    memo: HashMap<Word, Complex64>,
}

impl<'a> FreeCumulantOracle<'a> {
    pub fn new(mf: &'a MomentFunctional) -> Self {
        FreeCumulantOracle {
            mf,
            memo: HashMap::new(),
        }
    }

    pub fn cumulant(&mut self, w: &Word) -> Complex64 {
        if let Some(&hit) = self.memo.get(w) {
            return hit;
        }
        let n = w.len();
        assert!(n >= 1);
        let mut value = self.mf.moment(w).expect("dense table");
        for pi in enumerate_noncrossing(n).expect("size guard") {
            if pi.num_blocks() == 1 {
                continue;
            }
            let mut term = c(1.0, 0.0);
            for block in pi.blocks() {
                term *= self.cumulant(&w.subword(block));
            }
            value -= term;
        }
        self.memo.insert(w.clone(), value);
        value
    }
}

/// Dense random moment table with entries of modulus at most 1.
pub fn random_moments(
    alphabet: Vec<bifree::functionals::Letter>,
    max_order: usize,
    rng: &mut StdRng,
) -> MomentFunctional {
    MomentFunctional::from_fn(alphabet, max_order, |_| {
        let radius = rng.gen_range(0.0..1.0f64);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        Ok(c(radius * angle.cos(), radius * angle.sin()))
    })
    .unwrap()
}
