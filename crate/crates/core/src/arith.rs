//! Integer, prime and multi-index arithmetic behind the Bohr correspondence.
//!
//! An integer `n = 2^b1 * 3^b2 * 5^b3 * ...` is identified with its exponent
//! vector `(b1, b2, b3, ...)`, a [`MultiIndex`]. Dirichlet series multiply by
//! convolving their coefficient maps over this factorization.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of primes in the shared default table.
pub const DEFAULT_PRIME_COUNT: usize = 10_000;

/// The first `K` primes, in increasing order.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    primes: Vec<u64>,
}

impl PrimeTable {
    /// Sieve the first `count` primes.
    pub fn new(count: usize) -> Self {
        if count == 0 {
            return Self { primes: Vec::new() };
        }
        // p_k < k (ln k + ln ln k) for k >= 6
        let k = count.max(6) as f64;
        let limit = (k * (k.ln() + k.ln().ln())).ceil() as usize + 16;
        let mut composite = vec![false; limit + 1];
        let mut primes = Vec::with_capacity(count);
        for i in 2..=limit {
            if composite[i] {
                continue;
            }
            primes.push(i as u64);
            if primes.len() == count {
                break;
            }
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
        debug_assert_eq!(primes.len(), count);
        Self { primes }
    }

    /// Shared table of [`DEFAULT_PRIME_COUNT`] primes, built on first use.
    pub fn global() -> &'static PrimeTable {
        static TABLE: OnceLock<PrimeTable> = OnceLock::new();
        TABLE.get_or_init(|| PrimeTable::new(DEFAULT_PRIME_COUNT))
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn largest(&self) -> u64 {
        self.primes.last().copied().unwrap_or(1)
    }

    /// The `j`-th prime, 1-based: `nth(1) == 2`.
    pub fn nth(&self, j: usize) -> Result<u64> {
        if j == 0 || j > self.primes.len() {
            return Err(Error::Capacity(format!(
                "prime index {j} outside table of {} primes (need at least {j})",
                self.primes.len()
            )));
        }
        Ok(self.primes[j - 1])
    }

    /// 1-based slot of a prime in the table.
    pub fn slot_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok().map(|i| i + 1)
    }

    /// Prime factorization of `n` as an exponent vector over the table.
    pub fn factorize(&self, n: u64) -> Result<MultiIndex> {
        if n == 0 {
            return Err(Error::Domain("cannot factorize 0".into()));
        }
        let mut exps: Vec<u32> = Vec::new();
        let mut rest = n;
        for (i, &p) in self.primes.iter().enumerate() {
            if p.saturating_mul(p) > rest {
                break;
            }
            if rest % p == 0 {
                let mut e = 0;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                if exps.len() <= i {
                    exps.resize(i + 1, 0);
                }
                exps[i] = e;
            }
        }
        if rest > 1 {
            let largest = self.largest();
            if largest.saturating_mul(largest) < rest && self.slot_of(rest).is_none() {
                return Err(Error::Capacity(format!(
                    "cannot certify cofactor {rest} of {n} with primes up to {largest}"
                )));
            }
            let slot = self.slot_of(rest).ok_or_else(|| {
                Error::Capacity(format!(
                    "prime factor {rest} of {n} exceeds the table (largest prime {largest})"
                ))
            })?;
            if exps.len() < slot {
                exps.resize(slot, 0);
            }
            exps[slot - 1] += 1;
        }
        Ok(MultiIndex::new(exps))
    }

    /// `prod_j p_j^{beta_j}` with overflow checking.
    pub fn to_integer(&self, beta: &MultiIndex) -> Result<u64> {
        let mut acc: u64 = 1;
        for (j, &e) in beta.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let p = self.nth(j + 1)?;
            let pow = p.checked_pow(e).ok_or_else(|| overflow(beta))?;
            acc = acc.checked_mul(pow).ok_or_else(|| overflow(beta))?;
        }
        if acc > MAX_INDEX {
            return Err(overflow(beta));
        }
        Ok(acc)
    }
}

fn overflow(beta: &MultiIndex) -> Error {
    Error::Capacity(format!("integer for multi-index {beta} exceeds 2^63 - 1"))
}

/// Largest admissible coefficient index.
pub const MAX_INDEX: u64 = i64::MAX as u64;

/// `j`-th prime from the shared table.
pub fn nth_prime(j: usize) -> Result<u64> {
    PrimeTable::global().nth(j)
}

/// Factorization of `n` over the shared table.
pub fn factorize(n: u64) -> Result<MultiIndex> {
    PrimeTable::global().factorize(n)
}

/// Inverse of [`factorize`].
pub fn multiindex_to_integer(beta: &MultiIndex) -> Result<u64> {
    PrimeTable::global().to_integer(beta)
}

/// Exponent vector of a prime factorization, trimmed so the last entry is
/// non-zero. The empty index stands for the integer 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        MultiIndex(exps)
    }

    pub fn one() -> Self {
        MultiIndex(Vec::new())
    }

    /// Number of prime slots up to the last non-zero exponent.
    pub fn support_len(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0.get(j).copied().unwrap_or(0)
    }

    /// Total degree `|beta| = sum beta_j`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        let len = self.0.len().max(rhs.0.len());
        MultiIndex::new((0..len).map(|j| self.get(j) + rhs.get(j)).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Finite map `n -> a_n` with keys `>= 1` and no stored zeros.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientMap {
    entries: BTreeMap<u64, Complex64>,
}

impl CoefficientMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from `(n, a_n)` pairs; duplicate indices are summed.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        let mut map = Self::new();
        for (n, c) in pairs {
            map.add(n, c)?;
        }
        Ok(map)
    }

    /// Real coefficients, convenient for tests and examples.
    pub fn from_real(pairs: &[(u64, f64)]) -> Result<Self> {
        Self::from_pairs(pairs.iter().map(|&(n, c)| (n, Complex64::new(c, 0.0))))
    }

    fn check_key(n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::Domain("coefficient index must be >= 1".into()));
        }
        if n > MAX_INDEX {
            return Err(Error::Capacity(format!("index {n} exceeds 2^63 - 1")));
        }
        Ok(())
    }

    /// Set `a_n`, removing the entry when `c == 0`.
    pub fn insert(&mut self, n: u64, c: Complex64) -> Result<()> {
        Self::check_key(n)?;
        if c == Complex64::new(0.0, 0.0) {
            self.entries.remove(&n);
        } else {
            self.entries.insert(n, c);
        }
        Ok(())
    }

    /// `a_n += c`, keeping the map canonical.
    pub fn add(&mut self, n: u64, c: Complex64) -> Result<()> {
        Self::check_key(n)?;
        let sum = self.get(n) + c;
        self.insert(n, sum)
    }

    pub fn get(&self, n: u64) -> Complex64 {
        self.entries.get(&n).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.entries.iter().map(|(&n, &c)| (n, c))
    }

    pub fn keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn map_values(&self, mut f: impl FnMut(u64, Complex64) -> Complex64) -> Self {
        let mut out = Self::new();
        for (n, c) in self.iter() {
            // keys already validated
            let _ = out.insert(n, f(n, c));
        }
        out
    }
}

/// Dirichlet convolution `c_n = sum_{d e = n} a_d b_e`.
pub fn dirichlet_convolve(a: &CoefficientMap, b: &CoefficientMap) -> Result<CoefficientMap> {
    let mut acc: BTreeMap<u64, Complex64> = BTreeMap::new();
    for (d, ad) in a.iter() {
        for (e, be) in b.iter() {
            let n = d
                .checked_mul(e)
                .filter(|&n| n <= MAX_INDEX)
                .ok_or_else(|| Error::Capacity(format!("product index {d} * {e} exceeds 2^63 - 1")))?;
            *acc.entry(n).or_default() += ad * be;
        }
    }
    CoefficientMap::from_pairs(acc)
}
