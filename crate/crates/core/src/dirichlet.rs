//! Dirichlet polynomials and their Bohr lifts.
//!
//! A Dirichlet polynomial `f(s) = sum_n a_n n^{-s}` lifts to the polynomial
//! `F(z) = sum_beta b_beta z^beta` with `b_beta = a_n` whenever
//! `n = prod p_j^{beta_j}`; substituting `z_j = p_j^{-s}` recovers `f`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{dirichlet_convolve, CoefficientMap, MultiIndex, PrimeTable};
use crate::error::{Error, Result};
use crate::quadrature::ExpSum;

/// Finite Dirichlet polynomial `sum_n a_n n^{-s}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DirichletPolynomial {
    coeffs: CoefficientMap,
}

impl DirichletPolynomial {
    pub fn new(coeffs: CoefficientMap) -> Self {
        Self { coeffs }
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        Ok(Self::new(CoefficientMap::from_pairs(pairs)?))
    }

    pub fn from_real(pairs: &[(u64, f64)]) -> Result<Self> {
        Ok(Self::new(CoefficientMap::from_real(pairs)?))
    }

    /// `a_n` for `n` in `1..=coeffs.len()`.
    pub fn from_dense(coeffs: &[Complex64]) -> Result<Self> {
        Self::from_pairs(coeffs.iter().enumerate().map(|(i, &c)| (i as u64 + 1, c)))
    }

    pub fn coefficients(&self) -> &CoefficientMap {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest index in the support, `N`; 0 for the zero polynomial.
    pub fn max_index(&self) -> u64 {
        self.coeffs.max_index().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `f(s) = sum a_n exp(-s ln n)`.
    pub fn evaluate(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().map(|(n, a)| a * (-s * (n as f64).ln()).exp()).sum()
    }

    /// `t -> f(sigma + i t)` as an exponential sum with precomputed logarithms.
    pub fn vertical_line(&self, sigma: f64) -> ExpSum {
        let (coeffs, freqs) = self
            .coeffs
            .iter()
            .map(|(n, a)| {
                let ln = (n as f64).ln();
                (a * (-sigma * ln).exp(), ln)
            })
            .unzip();
        ExpSum::new(coeffs, freqs)
    }

    /// Coefficient energy `sum |a_n|^2 n^{-2 sigma}`.
    pub fn weighted_energy(&self, sigma: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(n, a)| a.norm_sqr() * (n as f64).powf(-2.0 * sigma))
            .sum()
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(dirichlet_convolve(&self.coeffs, &other.coeffs)?))
    }

    /// `f^k` by `k - 1` convolutions; `f^0 = 1`.
    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::from_real(&[(1, 1.0)])?;
        for _ in 0..k {
            acc = acc.multiply(self)?;
        }
        Ok(acc)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.map_values(|_, a| a * c))
    }

    /// Vertical translation: `a_n -> a_n n^{-i theta}`.
    pub fn shift_vertically(&self, theta: f64) -> Self {
        Self::new(
            self.coeffs
                .map_values(|n, a| a * Complex64::cis(-theta * (n as f64).ln())),
        )
    }

    pub fn to_records(&self) -> Vec<CoefficientRecord> {
        self.coeffs
            .iter()
            .map(|(n, c)| CoefficientRecord { n, re: c.re, im: c.im })
            .collect()
    }

    /// Parse the polynomial file format: a JSON array of `{"n", "re", "im"}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<CoefficientRecord> = serde_json::from_str(text)?;
        let mut seen = BTreeSet::new();
        let mut map = CoefficientMap::new();
        for r in records {
            if !seen.insert(r.n) {
                return Err(Error::Format(format!("duplicate coefficient index n = {}", r.n)));
            }
            if !r.re.is_finite() || !r.im.is_finite() {
                return Err(Error::Format(format!("non-finite coefficient at n = {}", r.n)));
            }
            map.insert(r.n, Complex64::new(r.re, r.im))?;
        }
        Ok(Self::new(map))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_records()).expect("records serialize")
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// One entry of the polynomial file format.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub n: u64,
    pub re: f64,
    pub im: f64,
}

/// Polynomial in finitely many of the variables `z_1, z_2, ...`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolytorusPolynomial {
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl PolytorusPolynomial {
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (beta, c) in terms {
            *coeffs.entry(beta).or_default() += c;
        }
        coeffs.retain(|_, c| *c != Complex64::default());
        Self { coeffs }
    }

    /// Number of variables actually used.
    pub fn dimension(&self) -> usize {
        self.coeffs.keys().map(MultiIndex::support_len).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, Complex64)> + '_ {
        self.coeffs.iter().map(|(b, &c)| (b, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, beta: &MultiIndex) -> Complex64 {
        self.coeffs.get(beta).copied().unwrap_or_default()
    }

    /// `sum |b_beta|^2`.
    pub fn coefficient_energy(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// `F(z) = sum b_beta z^beta`; `z` must cover every used variable.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        let d = self.dimension();
        if z.len() < d {
            return Err(Error::Domain(format!(
                "point has {} coordinates, polynomial uses {d} variables",
                z.len()
            )));
        }
        Ok(self.evaluator().eval(&z[..d]))
    }

    /// Precomputed term layout for repeated evaluation.
    pub fn evaluator(&self) -> TorusEvaluator {
        TorusEvaluator::new(self)
    }

    pub fn to_json(&self) -> String {
        let records: Vec<_> = self
            .coeffs
            .iter()
            .map(|(b, c)| serde_json::json!({ "beta": b, "re": c.re, "im": c.im }))
            .collect();
        serde_json::to_string_pretty(&records).expect("records serialize")
    }
}

/// Evaluates a [`PolytorusPolynomial`] from per-variable power tables.
#[derive(Clone, Debug)]
pub struct TorusEvaluator {
    dim: usize,
    max_exp: Vec<u32>,
    terms: Vec<(Vec<(usize, u32)>, Complex64)>,
}

impl TorusEvaluator {
    fn new(poly: &PolytorusPolynomial) -> Self {
        let dim = poly.dimension();
        let mut max_exp = vec![0u32; dim];
        let terms = poly
            .iter()
            .map(|(beta, c)| {
                let factors: Vec<(usize, u32)> = beta
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(j, &e)| {
                        max_exp[j] = max_exp[j].max(e);
                        (j, e)
                    })
                    .collect();
                (factors, c)
            })
            .collect();
        Self { dim, max_exp, terms }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Evaluate at `z` (length at least the dimension).
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut powers = Vec::new();
        self.eval_with(z, &mut powers)
    }

    /// Evaluate reusing a scratch buffer for the power tables.
    pub fn eval_with(&self, z: &[Complex64], powers: &mut Vec<Vec<Complex64>>) -> Complex64 {
        powers.resize_with(self.dim, Vec::new);
        for j in 0..self.dim {
            let row = &mut powers[j];
            row.clear();
            let mut acc = Complex64::new(1.0, 0.0);
            row.push(acc);
            for _ in 0..self.max_exp[j] {
                acc *= z[j];
                row.push(acc);
            }
        }
        self.terms
            .iter()
            .map(|(factors, c)| factors.iter().fold(*c, |acc, &(j, e)| acc * powers[j][e as usize]))
            .sum()
    }

    /// Evaluate at the torus point with the given angles.
    pub fn eval_angles(&self, angles: &[f64], powers: &mut Vec<Vec<Complex64>>) -> Complex64 {
        let z: Vec<Complex64> = angles.iter().map(|&a| Complex64::cis(a)).collect();
        self.eval_with(&z, powers)
    }
}

/// Bohr lift `f -> F` over the shared prime table.
pub fn bohr_lift(f: &DirichletPolynomial) -> Result<PolytorusPolynomial> {
    bohr_lift_with(f, PrimeTable::global())
}

pub fn bohr_lift_with(f: &DirichletPolynomial, table: &PrimeTable) -> Result<PolytorusPolynomial> {
    let terms = f
        .coefficients()
        .iter()
        .map(|(n, a)| Ok((table.factorize(n)?, a)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PolytorusPolynomial::from_terms(terms))
}

/// Inverse of [`bohr_lift`].
pub fn bohr_push(big_f: &PolytorusPolynomial) -> Result<DirichletPolynomial> {
    let table = PrimeTable::global();
    let pairs = big_f
        .iter()
        .map(|(beta, c)| Ok((table.to_integer(beta)?, c)))
        .collect::<Result<Vec<_>>>()?;
    DirichletPolynomial::from_pairs(pairs)
}

/// The point `(p_1^{-s}, ..., p_d^{-s})` at which a lift reproduces `f(s)`.
pub fn bohr_point(s: Complex64, d: usize) -> Result<Vec<Complex64>> {
    let table = PrimeTable::global();
    (1..=d).map(|j| Ok((-s * (table.nth(j)? as f64).ln()).exp())).collect()
}
