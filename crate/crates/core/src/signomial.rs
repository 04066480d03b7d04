//! Signomials `Σ_j c_j exp(A_j · x)` and the exponent lattice used by modulation.
//!
//! A [`Signomial`] pairs an `ℓ × n` exponent matrix with a length-`ℓ`
//! coefficient vector. Rows are kept as plain `Vec<f64>`; comparison of rows
//! during canonicalization is bitwise (after folding `-0.0` into `0.0`) unless
//! a tolerance is requested explicitly.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignomialError {
    #[error("signomial needs at least one term")]
    NoTerms,
    #[error("signomial needs ambient dimension n >= 1")]
    ZeroDimension,
    #[error("exponent row {row} has length {found}, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{rows} exponent rows but {coeffs} coefficients")]
    LengthMismatch { rows: usize, coeffs: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Sparse real signomial `x ↦ Σ_j c_j exp(A_j · x)`.
///
/// Rows may be *pinned*: a pinned row survives [`Signomial::canonicalize`]
/// even when its coefficient is zero. Pins are not part of the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignomialJson", into = "SignomialJson")]
pub struct Signomial {
    exponents: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
    pinned: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct SignomialJson {
    exponents: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
}

impl TryFrom<SignomialJson> for Signomial {
    type Error = SignomialError;

    fn try_from(raw: SignomialJson) -> Result<Self, Self::Error> {
        Signomial::new(raw.exponents, raw.coeffs)
    }
}

impl From<Signomial> for SignomialJson {
    fn from(f: Signomial) -> Self {
        SignomialJson {
            exponents: f.exponents,
            coeffs: f.coeffs,
        }
    }
}

fn normalize_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Lexicographic order on exponent rows using IEEE total order.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match normalize_zero(*x).total_cmp(&normalize_zero(*y)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

fn rows_equal(a: &[f64], b: &[f64], tol: f64) -> bool {
    if tol == 0.0 {
        a.iter()
            .zip(b)
            .all(|(x, y)| normalize_zero(*x).to_bits() == normalize_zero(*y).to_bits())
    } else {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }
}

/// Hashable bitwise key for an exponent row.
pub(crate) fn row_key(row: &[f64]) -> Vec<u64> {
    row.iter().map(|x| normalize_zero(*x).to_bits()).collect()
}

impl Signomial {
    pub fn new(exponents: Vec<Vec<f64>>, coeffs: Vec<f64>) -> Result<Self, SignomialError> {
        if exponents.is_empty() {
            return Err(SignomialError::NoTerms);
        }
        if exponents.len() != coeffs.len() {
            return Err(SignomialError::LengthMismatch {
                rows: exponents.len(),
                coeffs: coeffs.len(),
            });
        }
        let n = exponents[0].len();
        if n == 0 {
            return Err(SignomialError::ZeroDimension);
        }
        for (row, r) in exponents.iter().enumerate() {
            if r.len() != n {
                return Err(SignomialError::RaggedRow {
                    row,
                    expected: n,
                    found: r.len(),
                });
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(SignomialError::NonFinite("exponents"));
            }
        }
        if coeffs.iter().any(|x| !x.is_finite()) {
            return Err(SignomialError::NonFinite("coeffs"));
        }
        let pinned = vec![false; coeffs.len()];
        Ok(Signomial {
            exponents,
            coeffs,
            pinned,
        })
    }

    /// The constant signomial `value · exp(0 · x)` on `R^n`.
    pub fn constant(n: usize, value: f64) -> Result<Self, SignomialError> {
        Signomial::new(vec![vec![0.0; n]], vec![value])
    }

    /// `Σ_j exp(A_j · x)`: all-ones coefficients on the given rows.
    pub fn ones(exponents: Vec<Vec<f64>>) -> Result<Self, SignomialError> {
        let c = vec![1.0; exponents.len()];
        Signomial::new(exponents, c)
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim(&self) -> usize {
        self.exponents[0].len()
    }

    pub fn exponents(&self) -> &[Vec<f64>] {
        &self.exponents
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_pinned(&self, row: usize) -> bool {
        self.pinned[row]
    }

    /// Returns a copy with the coefficient vector replaced.
    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Result<Self, SignomialError> {
        if coeffs.len() != self.coeffs.len() {
            return Err(SignomialError::LengthMismatch {
                rows: self.exponents.len(),
                coeffs: coeffs.len(),
            });
        }
        if coeffs.iter().any(|x| !x.is_finite()) {
            return Err(SignomialError::NonFinite("coeffs"));
        }
        Ok(Signomial {
            exponents: self.exponents.clone(),
            coeffs,
            pinned: self.pinned.clone(),
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, SignomialError> {
        if x.len() != self.dim() {
            return Err(SignomialError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self
            .exponents
            .iter()
            .zip(&self.coeffs)
            .map(|(row, c)| c * dot(row, x).exp())
            .sum())
    }

    /// Merges exactly-equal rows, sorts rows lexicographically and drops
    /// unpinned zero-coefficient rows.
    pub fn canonicalize(&self) -> Signomial {
        self.canonicalize_with_tol(0.0)
    }

    /// Like [`canonicalize`](Self::canonicalize) but rows whose entries all lie
    /// within `tol` of the previous kept row (in sorted order) are merged into
    /// it. `tol = 0` is the exact mode.
    pub fn canonicalize_with_tol(&self, tol: f64) -> Signomial {
        let mut order: Vec<usize> = (0..self.coeffs.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(&self.exponents[a], &self.exponents[b]));

        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(order.len());
        let mut coeffs: Vec<f64> = Vec::with_capacity(order.len());
        let mut pinned: Vec<bool> = Vec::with_capacity(order.len());
        for j in order {
            let row = &self.exponents[j];
            match rows.last() {
                Some(prev) if rows_equal(prev, row, tol) => {
                    *coeffs.last_mut().unwrap() += self.coeffs[j];
                    *pinned.last_mut().unwrap() |= self.pinned[j];
                }
                _ => {
                    rows.push(row.iter().map(|x| normalize_zero(*x)).collect());
                    coeffs.push(self.coeffs[j]);
                    pinned.push(self.pinned[j]);
                }
            }
        }

        let keep: Vec<usize> = (0..rows.len())
            .filter(|&k| coeffs[k] != 0.0 || pinned[k])
            .collect();
        if keep.is_empty() {
            // Everything cancelled: the zero signomial, kept as a pinned constant row.
            return Signomial {
                exponents: vec![vec![0.0; self.dim()]],
                coeffs: vec![0.0],
                pinned: vec![true],
            };
        }
        Signomial {
            exponents: keep.iter().map(|&k| rows[k].clone()).collect(),
            coeffs: keep.iter().map(|&k| coeffs[k]).collect(),
            pinned: keep.iter().map(|&k| pinned[k]).collect(),
        }
    }

    /// Canonicalized product; exponent rows `A_j + B_k`, coefficients `c_j d_k`.
    pub fn multiply(&self, other: &Signomial) -> Result<Signomial, SignomialError> {
        if self.dim() != other.dim() {
            return Err(SignomialError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let mut exponents = Vec::with_capacity(self.num_terms() * other.num_terms());
        let mut coeffs = Vec::with_capacity(exponents.capacity());
        for (a, c) in self.exponents.iter().zip(&self.coeffs) {
            for (b, d) in other.exponents.iter().zip(&other.coeffs) {
                exponents.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
                coeffs.push(c * d);
            }
        }
        let pinned = vec![false; coeffs.len()];
        Ok(Signomial {
            exponents,
            coeffs,
            pinned,
        }
        .canonicalize())
    }

    /// `(Σ_j exp(A_j · x))^p · f` where `A` are this signomial's rows.
    ///
    /// Every row of the result lies in `E_{p+1}(A)`. `modulate(0)` equals
    /// [`canonicalize`](Self::canonicalize).
    pub fn modulate(&self, p: usize) -> Signomial {
        if p == 0 {
            return self.canonicalize();
        }
        let map = ModulationMap::new(&self.exponents, p);
        let coeffs = map.apply(&self.coeffs);
        Signomial {
            pinned: vec![false; coeffs.len()],
            exponents: map.lattice.rows.clone(),
            coeffs,
        }
        .canonicalize()
    }

    /// Guarantees a zero exponent row and returns its index.
    ///
    /// An existing zero row is pinned in place; otherwise a pinned row with
    /// coefficient `0` is appended.
    pub fn ensure_constant_term(&self) -> (Signomial, usize) {
        let mut out = self.clone();
        if let Some(k) = self
            .exponents
            .iter()
            .position(|row| row.iter().all(|x| *x == 0.0))
        {
            out.pinned[k] = true;
            return (out, k);
        }
        out.exponents.push(vec![0.0; self.dim()]);
        out.coeffs.push(0.0);
        out.pinned.push(true);
        let k = out.coeffs.len() - 1;
        (out, k)
    }

    /// Index of the first all-zero exponent row, if any.
    pub fn constant_row(&self) -> Option<usize> {
        self.exponents
            .iter()
            .position(|row| row.iter().all(|x| *x == 0.0))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `E_p(A)`: distinct sums of exactly `p` rows of `A`, chosen with repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentLattice {
    pub base: Vec<Vec<f64>>,
    pub degree: usize,
    /// Distinct rows, sorted lexicographically.
    pub rows: Vec<Vec<f64>>,
    /// `tuple_index[j_1 + ℓ j_2 + … + ℓ^{p-1} j_p]` is the row holding
    /// `A_{j_1} + … + A_{j_p}`.
    pub tuple_index: Vec<usize>,
}

impl ExponentLattice {
    /// Enumerates `E_p(A)` for `p >= 1`.
    ///
    /// Sums are accumulated in nondecreasing index order so that every
    /// permutation of a multiset produces a bitwise-identical row.
    ///
    /// # Panics
    ///
    /// Panics if `p == 0` or `base` is empty.
    pub fn new(base: &[Vec<f64>], p: usize) -> Self {
        assert!(p >= 1, "exponent lattice degree must be positive");
        assert!(!base.is_empty(), "exponent lattice needs at least one row");
        let ell = base.len();
        let n = base[0].len();

        let mut sums: Vec<Vec<f64>> = Vec::new();
        let mut multiset_row: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut tuple = vec![0usize; p];
        loop {
            let mut row = vec![0.0; n];
            for &j in &tuple {
                for (r, a) in row.iter_mut().zip(&base[j]) {
                    *r += a;
                }
            }
            let key = row_key(&row);
            let id = *seen.entry(key).or_insert_with(|| {
                sums.push(row.iter().map(|x| normalize_zero(*x)).collect());
                sums.len() - 1
            });
            multiset_row.insert(tuple.clone(), id);
            if !next_multiset(&mut tuple, ell) {
                break;
            }
        }

        let mut order: Vec<usize> = (0..sums.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(&sums[a], &sums[b]));
        let mut rank = vec![0usize; sums.len()];
        for (r, &id) in order.iter().enumerate() {
            rank[id] = r;
        }
        let rows: Vec<Vec<f64>> = order.iter().map(|&id| sums[id].clone()).collect();

        let total = ell.pow(p as u32);
        let mut tuple_index = Vec::with_capacity(total);
        let mut digits = vec![0usize; p];
        for code in 0..total {
            let mut rest = code;
            for d in digits.iter_mut() {
                *d = rest % ell;
                rest /= ell;
            }
            let mut sorted = digits.clone();
            sorted.sort_unstable();
            tuple_index.push(rank[multiset_row[&sorted]]);
        }

        ExponentLattice {
            base: base.to_vec(),
            degree: p,
            rows,
            tuple_index,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row index for an explicit tuple `(j_1, …, j_p)`.
    pub fn row_of(&self, tuple: &[usize]) -> usize {
        let ell = self.base.len();
        let code = tuple.iter().rev().fold(0usize, |acc, &j| acc * ell + j);
        self.tuple_index[code]
    }

    /// Position of an exact row in the lattice.
    pub fn find(&self, row: &[f64]) -> Option<usize> {
        self.rows.binary_search_by(|probe| lex_cmp(probe, row)).ok()
    }
}

// Advances a nondecreasing tuple over {0..ell}; false when exhausted.
fn next_multiset(tuple: &mut [usize], ell: usize) -> bool {
    let p = tuple.len();
    let mut k = p;
    while k > 0 {
        k -= 1;
        if tuple[k] + 1 < ell {
            let v = tuple[k] + 1;
            for t in tuple[k..].iter_mut() {
                *t = v;
            }
            return true;
        }
    }
    false
}

/// Linear map `c ↦ coeffs((Σ_j exp(A_j x))^p · Sig(c, A))` onto the rows of
/// `E_{p+1}(A)`.
///
/// Entry `(r, j)` counts the ordered `p`-tuples `t` with `A_j + Σ_k A_{t_k}`
/// equal to lattice row `r`.
#[derive(Debug, Clone)]
pub struct ModulationMap {
    pub level: usize,
    pub lattice: ExponentLattice,
    /// Sparse rows: for each lattice row, `(j, count)` pairs.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl ModulationMap {
    pub fn new(base: &[Vec<f64>], p: usize) -> Self {
        let ell = base.len();
        let lattice = ExponentLattice::new(base, p + 1);
        let mut dense: Vec<HashMap<usize, f64>> = vec![HashMap::new(); lattice.len()];
        // Tuple codes put j_1 in the lowest digit, so `code % ell` is the
        // index of the original term and the remaining digits are the
        // modulating factor's p-tuple.
        for (code, &r) in lattice.tuple_index.iter().enumerate() {
            *dense[r].entry(code % ell).or_insert(0.0) += 1.0;
        }
        let rows = dense
            .into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().collect();
                v.sort_by_key(|(j, _)| *j);
                v
            })
            .collect();
        ModulationMap {
            level: p,
            lattice,
            rows,
        }
    }

    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(j, w)| w * c[*j]).sum())
            .collect()
    }

    /// Image of the unit vector `e_j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .find(|(k, _)| *k == j)
                    .map(|(_, w)| *w)
                    .unwrap_or(0.0)
            })
            .collect()
    }
}
