//! Numerical verification of the triangular-array limit theorem and the
//! bi-free central limit theorem.
//!
//! The limit theorem says a row sum `S_N` of `N` bi-free identically
//! distributed pairs converges in distribution exactly when the rescaled row
//! moments `N * phi(a_{chi(1),N,1} ... a_{chi(n),N,1})` converge, and the
//! limit cumulants are those limits.  [`limit_theorem_check`] tests that
//! statement on declared per-row moment tables; [`clt_check`] specializes to
//! the `1/sqrt(N)` embedding with centered rows, whose limit is the bi-free
//! centered Gaussian distribution of [`gaussian_moments`].

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    words_up_to, CumulantFunctional, Letter, MomentFunctional, Scalar, TableDoc, Word,
};
use crate::partitions::{chi_permutation, noncrossing_with_mobius, transport_partition};

/// A triangular array whose row element at size `N` has cumulant table
/// `base * N^order_scaling(order)` (exponent 0 when unspecified).
#[derive(Clone, Debug)]
pub struct ArraySpec {
    pub base: CumulantFunctional,
    pub order_scaling: BTreeMap<usize, f64>,
    pub row_sizes: Vec<usize>,
}

impl ArraySpec {
    pub fn new(
        base: CumulantFunctional,
        order_scaling: BTreeMap<usize, f64>,
        row_sizes: Vec<usize>,
    ) -> Result<Self> {
        if row_sizes.is_empty() || row_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schema(
                "row sizes must be nonempty and strictly increasing".into(),
            ));
        }
        Ok(ArraySpec {
            base,
            order_scaling,
            row_sizes,
        })
    }

    /// Cumulants of one row element at size `N`.
    pub fn base_at(&self, n: usize) -> CumulantFunctional {
        self.base.scale_by_order(|order| {
            let e = self.order_scaling.get(&order).copied().unwrap_or(0.0);
            (n as f64).powf(e)
        })
    }

    /// Per-row moment tables for every declared row size.
    pub fn rows(&self) -> Result<Vec<(usize, MomentFunctional)>> {
        self.row_sizes
            .iter()
            .map(|&n| Ok((n, self.base_at(n).to_moments()?)))
            .collect()
    }
}

/// Moments of the row sum `S_N`: cumulants add across bi-free summands, so
/// the table is `N * base_at(N)` pushed through the partition sum.
pub fn row_sum_moments(spec: &ArraySpec, n: usize) -> Result<MomentFunctional> {
    if !spec.row_sizes.contains(&n) {
        return Err(Error::Schema(format!("row size {n} is not declared")));
    }
    spec.base_at(n).scale(n as f64).to_moments()
}

/// Convergence record for one word.
#[derive(Clone, Debug, Serialize)]
pub struct WordConvergence {
    pub word: Word,
    pub errors: Vec<f64>,
    pub decreasing: bool,
    pub final_error: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Outcome of the triangular-array limit check.
#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub row_sizes: Vec<usize>,
    pub words: Vec<WordConvergence>,
    pub max_final_error: f64,
    pub pass: bool,
}

fn decreasing_within_slack(errors: &[f64]) -> bool {
    errors
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-14)
}

/// Compare `N * (row moment at N)` against the predicted limit cumulants,
/// word by word.  A word passes when its error sequence is non-increasing
/// and the final error is within the per-order tolerance.
pub fn limit_theorem_check(
    rows: &[(usize, MomentFunctional)],
    predicted: &CumulantFunctional,
    max_order: usize,
    tol_schedule: &BTreeMap<usize, f64>,
    default_tol: f64,
) -> Result<LimitReport> {
    if rows.is_empty() || rows.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::Schema(
            "row tables must come in strictly increasing sizes".into(),
        ));
    }
    if max_order > predicted.max_order() {
        return Err(Error::Truncation {
            len: max_order,
            max_order: predicted.max_order(),
        });
    }
    let mut words = Vec::new();
    let mut max_final_error = 0.0f64;
    for w in words_up_to(predicted.alphabet(), max_order) {
        let target = predicted.entry(&w)?;
        let mut errors = Vec::with_capacity(rows.len());
        for (n, mf) in rows {
            let value = mf.moment(&w)? * (*n as f64);
            errors.push((value - target).norm());
        }
        let tol = tol_schedule.get(&w.len()).copied().unwrap_or(default_tol);
        let final_error = *errors.last().unwrap();
        let decreasing = decreasing_within_slack(&errors);
        let pass = decreasing && final_error <= tol;
        max_final_error = max_final_error.max(final_error);
        words.push(WordConvergence {
            word: w,
            errors,
            decreasing,
            final_error,
            tol,
            pass,
        });
    }
    Ok(LimitReport {
        row_sizes: rows.iter().map(|&(n, _)| n).collect(),
        pass: words.iter().all(|w| w.pass),
        words,
        max_final_error,
    })
}

/// On-disk form of an array spec: base and predicted cumulant tables plus the
/// scaling exponents and row sizes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArraySpecDoc {
    pub base: TableDoc,
    #[serde(default)]
    pub order_scaling: BTreeMap<String, f64>,
    pub row_sizes: Vec<usize>,
    pub predicted: TableDoc,
}

impl ArraySpecDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable document");
        s.push('\n');
        s
    }

    pub fn into_parts(&self) -> Result<(ArraySpec, CumulantFunctional)> {
        let mut order_scaling = BTreeMap::new();
        for (key, &e) in &self.order_scaling {
            let order: usize = key
                .parse()
                .map_err(|_| Error::Schema(format!("bad order key \"{key}\"")))?;
            order_scaling.insert(order, e);
        }
        let spec = ArraySpec::new(
            self.base.to_cumulants()?,
            order_scaling,
            self.row_sizes.clone(),
        )?;
        let predicted = self.predicted.to_cumulants()?;
        Ok((spec, predicted))
    }
}

/// A bi-free centered Gaussian distribution, given by its covariance on
/// ordered letter pairs.
#[derive(Clone, Debug)]
pub struct GaussianSpec {
    covariance: HashMap<(Letter, Letter), Scalar>,
}

impl GaussianSpec {
    /// Requires Hermitian consistency `cov(k, l) = conj(cov(l, k))` (within
    /// 1e-9), as holds for self-adjoint letters.
    pub fn new(covariance: HashMap<(Letter, Letter), Scalar>) -> Result<Self> {
        for ((a, b), &v) in &covariance {
            let mirrored = covariance
                .get(&(b.clone(), a.clone()))
                .copied()
                .unwrap_or(Complex64::ZERO);
            if (v - mirrored.conj()).norm() > 1e-9 {
                return Err(Error::Schema(format!(
                    "covariance is not Hermitian-consistent at ({a}, {b})"
                )));
            }
        }
        Ok(GaussianSpec { covariance })
    }

    /// Covariance read off the order-2 entries of a cumulant table.
    pub fn from_order_two(cf: &CumulantFunctional) -> Result<Self> {
        let mut covariance = HashMap::new();
        for a in cf.alphabet() {
            for b in cf.alphabet() {
                let w = Word::new(vec![a.clone(), b.clone()]);
                covariance.insert((a.clone(), b.clone()), cf.entry(&w)?);
            }
        }
        GaussianSpec::new(covariance)
    }

    pub fn covariance(&self, a: &Letter, b: &Letter) -> Scalar {
        self.covariance
            .get(&(a.clone(), b.clone()))
            .copied()
            .unwrap_or(Complex64::ZERO)
    }
}

/// Gaussian moments: the sum over bi-non-crossing pair partitions of the
/// product of covariances.  Odd lengths vanish; the empty word is 1.
pub fn gaussian_moments(g: &GaussianSpec, w: &Word) -> Result<Scalar> {
    let n = w.len();
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if n % 2 == 1 {
        return Ok(Complex64::ZERO);
    }
    let s = chi_permutation(&w.chi()?);
    let mut acc = Complex64::ZERO;
    for (sigma, _) in noncrossing_with_mobius(n)?.iter() {
        if sigma.blocks().iter().any(|b| b.len() != 2) {
            continue;
        }
        let pi = transport_partition(&s, sigma)?;
        let mut term = Complex64::new(1.0, 0.0);
        for block in pi.blocks() {
            let (p, q) = (block[0], block[1]);
            term *= g.covariance(&w.letters()[p - 1], &w.letters()[q - 1]);
        }
        acc += term;
    }
    Ok(acc)
}

/// Outcome of the central-limit check.
#[derive(Clone, Debug, Serialize)]
pub struct CltReport {
    pub row_sizes: Vec<usize>,
    pub max_order: usize,
    /// Largest deviation of order-2 cumulants of `S_N` from the base, over
    /// all `N` (exact scaling predicts 0).
    pub order2_deviation: f64,
    /// Largest deviation of `kappa_n(S_N) * N^{n/2 - 1}` from the base
    /// cumulant, over all orders and `N`.
    pub cumulant_scaling_deviation: f64,
    /// Two routes to the limit moments: order-2-only partition sum vs the
    /// pair-partition oracle.
    pub gaussian_oracle_deviation: f64,
    /// `(N, max over words of |moment(S_N) - gaussian limit|)`.
    pub moment_errors: Vec<(usize, f64)>,
    pub moments_converge: bool,
    /// Observed order-3 error ratios between consecutive row sizes, and
    /// whether they track `N^{-1/2}` within the given factor.
    pub order3_ratios: Vec<f64>,
    pub order3_rate_ok: bool,
    pub rate_factor: f64,
    pub pass: bool,
}

/// The bi-free CLT for the `1/sqrt(N)` embedding of a centered family:
/// order-2 cumulants of `S_N` are invariant, higher cumulants decay as
/// `N^{1 - n/2}`, and moments converge to the Gaussian limit with the
/// order-3 deviation shrinking like `N^{-1/2}`.
pub fn clt_check(
    base: &CumulantFunctional,
    row_sizes: &[usize],
    max_order: usize,
) -> Result<CltReport> {
    if row_sizes.len() < 2 || row_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Schema(
            "need at least two strictly increasing row sizes".into(),
        ));
    }
    if max_order > base.max_order() {
        return Err(Error::Truncation {
            len: max_order,
            max_order: base.max_order(),
        });
    }
    for letter in base.alphabet() {
        let mean = base.entry(&Word::single(letter.clone()))?;
        if mean.norm() > 1e-12 {
            return Err(Error::NonzeroMean(letter.label().into()));
        }
    }

    // kappa_n(S_N) = N^{1 - n/2} kappa_n(base)
    let scaled = |n: usize| -> CumulantFunctional {
        base.scale_by_order(|order| (n as f64).powf(1.0 - order as f64 / 2.0))
    };

    let mut order2_deviation = 0.0f64;
    let mut cumulant_scaling_deviation = 0.0f64;
    for &n in row_sizes {
        let sn = scaled(n);
        for w in words_up_to(base.alphabet(), max_order) {
            let kappa_sn = sn.entry(&w)?;
            let back = kappa_sn * (n as f64).powf(w.len() as f64 / 2.0 - 1.0);
            cumulant_scaling_deviation =
                cumulant_scaling_deviation.max((back - base.entry(&w)?).norm());
            if w.len() == 2 {
                order2_deviation = order2_deviation.max((kappa_sn - base.entry(&w)?).norm());
            }
        }
    }

    // Gaussian limit, two routes
    let limit_table = base.scale_by_order(|order| if order <= 2 { 1.0 } else { 0.0 });
    let limit_moments = limit_table.to_moments()?;
    let gspec = GaussianSpec::from_order_two(base)?;
    let mut gaussian_oracle_deviation = 0.0f64;
    for w in words_up_to(base.alphabet(), max_order) {
        let via_table = limit_moments.moment(&w)?;
        let via_pairs = gaussian_moments(&gspec, &w)?;
        gaussian_oracle_deviation = gaussian_oracle_deviation.max((via_table - via_pairs).norm());
    }

    // moment convergence and the order-3 rate
    let mut moment_errors = Vec::new();
    let mut order3 = Vec::new();
    for &n in row_sizes {
        let mf = scaled(n).to_moments()?;
        let mut worst = 0.0f64;
        let mut worst3 = 0.0f64;
        for w in words_up_to(base.alphabet(), max_order) {
            let err = (mf.moment(&w)? - limit_moments.moment(&w)?).norm();
            worst = worst.max(err);
            if w.len() == 3 {
                worst3 = worst3.max(err);
            }
        }
        moment_errors.push((n, worst));
        order3.push(worst3);
    }
    let moments_converge =
        decreasing_within_slack(&moment_errors.iter().map(|&(_, e)| e).collect::<Vec<_>>());

    let rate_factor = 1.6;
    let mut order3_ratios = Vec::new();
    let mut order3_rate_ok = true;
    for i in 0..row_sizes.len() - 1 {
        if order3[i] <= 1e-13 {
            continue; // no third-order content to measure
        }
        let ratio = order3[i + 1] / order3[i];
        let predicted = (row_sizes[i + 1] as f64 / row_sizes[i] as f64).powf(-0.5);
        order3_ratios.push(ratio);
        if ratio > predicted * rate_factor || ratio < predicted / rate_factor {
            order3_rate_ok = false;
        }
    }

    let pass = order2_deviation <= 1e-12
        && cumulant_scaling_deviation <= 1e-12
        && gaussian_oracle_deviation <= 1e-12
        && moments_converge
        && order3_rate_ok;
    Ok(CltReport {
        row_sizes: row_sizes.to_vec(),
        max_order,
        order2_deviation,
        cumulant_scaling_deviation,
        gaussian_oracle_deviation,
        moment_errors,
        moments_converge,
        order3_ratios,
        order3_rate_ok,
        rate_factor,
        pass,
    })
}
