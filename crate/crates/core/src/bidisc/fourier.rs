//! Trigonometric polynomials on the 2-torus, stored by Fourier coefficients.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for conjugate symmetry when a datum is declared real.
pub const REAL_TOL: f64 = 1e-12;

/// Fourier coefficients `(m, n) -> c` of a function on `T^2`, held densely on
/// the window `|m|, |n| <= band`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierDatum2 {
    band: usize,
    data: Vec<Complex64>,
    real: bool,
}

/// JSON record `{"m", "n", "re", "im"}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierRecord {
    pub m: i64,
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

impl FourierDatum2 {
    pub fn zeros(band: usize) -> Self {
        let w = 2 * band + 1;
        Self {
            band,
            data: vec![Complex64::default(); w * w],
            real: true,
        }
    }

    /// The constant function `c`.
    pub fn constant(c: f64) -> Self {
        let mut d = Self::zeros(0);
        d.data[0] = Complex64::new(c, 0.0);
        d
    }

    /// Sums duplicate keys. The result is not flagged real; see [`FourierDatum2::into_real`].
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, i64, Complex64)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let band = terms
            .iter()
            .map(|&(m, n, _)| m.unsigned_abs().max(n.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0);
        let mut d = Self::zeros(band);
        d.real = false;
        for (m, n, c) in terms {
            let i = d.index(m, n).expect("inside window");
            d.data[i] += c;
        }
        d
    }

    /// Checks conjugate symmetry `c(-m, -n) = conj c(m, n)` and sets the real flag.
    pub fn into_real(mut self) -> Result<Self> {
        let asym = self.asymmetry();
        let scale = self.data.iter().map(|c| c.norm()).fold(1.0, f64::max);
        if asym > REAL_TOL * scale {
            return Err(Error::Domain(format!(
                "datum is not real: conjugate asymmetry {asym:e}"
            )));
        }
        self.real = true;
        Ok(self)
    }

    fn asymmetry(&self) -> f64 {
        let b = self.band as i64;
        let mut worst = 0.0f64;
        for m in -b..=b {
            for n in -b..=b {
                worst = worst.max((self.get(m, n) - self.get(-m, -n).conj()).norm());
            }
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn band(&self) -> usize {
        self.band
    }

    fn width(&self) -> usize {
        2 * self.band + 1
    }

    fn index(&self, m: i64, n: i64) -> Option<usize> {
        let b = self.band as i64;
        (m.abs() <= b && n.abs() <= b).then(|| ((m + b) as usize) * self.width() + (n + b) as usize)
    }

    pub fn get(&self, m: i64, n: i64) -> Complex64 {
        self.index(m, n).map(|i| self.data[i]).unwrap_or_default()
    }

    /// Adds `c` at `(m, n)`, growing the window if needed; clears the real flag
    /// unless the caller restores symmetry.
    pub fn add_at(&mut self, m: i64, n: i64, c: Complex64) {
        let need = m.unsigned_abs().max(n.unsigned_abs()) as usize;
        if need > self.band {
            *self = self.with_band(need);
        }
        let i = self.index(m, n).expect("inside window");
        self.data[i] += c;
    }

    pub(crate) fn set_real_flag(&mut self, real: bool) {
        self.real = real;
    }

    /// Copy re-windowed to `|m|, |n| <= band`, dropping what falls outside.
    pub fn with_band(&self, band: usize) -> Self {
        let mut out = Self::zeros(band);
        out.real = self.real;
        let b = self.band.min(band) as i64;
        for m in -b..=b {
            for n in -b..=b {
                let i = out.index(m, n).unwrap();
                out.data[i] = self.get(m, n);
            }
        }
        out
    }

    /// Nonzero coefficients in `(m, n)` order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let b = self.band as i64;
        let w = self.width();
        self.data
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::default())
            .map(move |(i, &c)| ((i / w) as i64 - b, (i % w) as i64 - b, c))
    }

    /// Largest `|m| + |n|` over nonzero coefficients.
    pub fn degree(&self) -> u64 {
        self.iter()
            .map(|(m, n, _)| m.unsigned_abs() + n.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Largest `max(|m|, |n|)` over nonzero coefficients.
    pub fn coordinate_degree(&self) -> u64 {
        self.iter()
            .map(|(m, n, _)| m.unsigned_abs().max(n.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    /// `int f dm_2`.
    pub fn mean(&self) -> Complex64 {
        self.get(0, 0)
    }

    /// `sum |c(m, n)|^2` over `m n < 0`.
    pub fn mixed_quadrant_energy(&self) -> f64 {
        self.iter()
            .filter(|&(m, n, _)| m * n < 0)
            .map(|(_, _, c)| c.norm_sqr())
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            band: self.band,
            data: self.data.iter().map(|c| c * s).collect(),
            real: self.real,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let band = self.band.max(other.band);
        let mut out = self.with_band(band);
        let b = other.band as i64;
        for m in -b..=b {
            for n in -b..=b {
                let i = out.index(m, n).unwrap();
                out.data[i] += other.get(m, n);
            }
        }
        out.real = self.real && other.real;
        out
    }

    /// Fejer smoothing of order `order`: weights `(1 - |m|/(M+1)) (1 - |n|/(M+1))`.
    pub fn fejer(&self, order: usize) -> Self {
        let mut out = self.with_band(self.band.min(order));
        let b = out.band as i64;
        let w = out.width();
        for m in -b..=b {
            for n in -b..=b {
                let i = (m + b) as usize * w + (n + b) as usize;
                out.data[i] *= fejer_weight(m, order) * fejer_weight(n, order);
            }
        }
        out
    }

    /// Boundary value `sum c(m,n) e^{i(m x + n y)}`.
    pub fn evaluate(&self, x: f64, y: f64) -> Complex64 {
        self.iter()
            .map(|(m, n, c)| c * Complex64::cis(m as f64 * x + n as f64 * y))
            .sum()
    }

    /// Values on the `l x l` grid `(2 pi a / l, 2 pi b / l)` of
    /// `sum c(m, n) w(m, n) e^{i(m x + n y)}`, row-major in `a`.
    pub fn grid_values(&self, l: usize, weight: impl Fn(i64, i64) -> f64) -> Vec<Complex64> {
        grid_from_terms(l, self.iter().map(|(m, n, c)| (m, n, c * weight(m, n))))
    }

    /// Minimum of the real part on the `l x l` boundary grid.
    pub fn grid_min(&self, l: usize) -> f64 {
        self.grid_values(l, |_, _| 1.0)
            .iter()
            .map(|v| v.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_records(&self) -> Vec<FourierRecord> {
        self.iter()
            .map(|(m, n, c)| FourierRecord {
                m,
                n,
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_records()).expect("records serialize")
    }

    /// Parses the record format, rejecting duplicate `(m, n)` and non-finite
    /// values. The real flag is set when the data are conjugate symmetric.
    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<FourierRecord> = serde_json::from_str(text)?;
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert((r.m, r.n)) {
                return Err(Error::Format(format!("duplicate coefficient ({}, {})", r.m, r.n)));
            }
            if !r.re.is_finite() || !r.im.is_finite() {
                return Err(Error::Format(format!("non-finite coefficient at ({}, {})", r.m, r.n)));
            }
        }
        let d = Self::from_terms(records.iter().map(|r| (r.m, r.n, Complex64::new(r.re, r.im))));
        Ok(d.clone().into_real().unwrap_or(d))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

pub fn fejer_weight(m: i64, order: usize) -> f64 {
    (1.0 - m.unsigned_abs() as f64 / (order as f64 + 1.0)).max(0.0)
}

/// `(1/2 pi) int_{x0}^{x1} e^{-i m x} dx` for `|m| <= order`, index `m + order`.
pub fn interval_coefficients(x0: f64, x1: f64, order: usize) -> Vec<Complex64> {
    let o = order as i64;
    (-o..=o)
        .map(|m| {
            if m == 0 {
                Complex64::new((x1 - x0) / TAU, 0.0)
            } else {
                let mf = m as f64;
                (Complex64::cis(-mf * x0) - Complex64::cis(-mf * x1)) / Complex64::new(0.0, TAU * mf)
            }
        })
        .collect()
}

/// Fourier coefficients of the indicator of `[x0, x1) x [y0, y1)`, truncated
/// to `|m|, |n| <= order`.
pub fn rectangle_coefficients(x0: f64, x1: f64, y0: f64, y1: f64, order: usize) -> FourierDatum2 {
    let cx = interval_coefficients(x0, x1, order);
    let cy = interval_coefficients(y0, y1, order);
    let mut d = FourierDatum2::zeros(order);
    let w = d.width();
    for (a, &u) in cx.iter().enumerate() {
        for (b, &v) in cy.iter().enumerate() {
            d.data[a * w + b] = u * v;
        }
    }
    d
}

/// Inverse 2-D DFT of the given coefficients onto an `l x l` grid; indices
/// are reduced mod `l`, which is exact at the grid points.
pub fn grid_from_terms(l: usize, terms: impl Iterator<Item = (i64, i64, Complex64)>) -> Vec<Complex64> {
    let mut buf = vec![Complex64::default(); l * l];
    let li = l as i64;
    for (m, n, c) in terms {
        buf[m.rem_euclid(li) as usize * l + n.rem_euclid(li) as usize] += c;
    }
    inverse_fft2(&mut buf, l);
    buf
}

/// In-place unnormalized inverse DFT along both axes of a row-major `l x l` buffer.
pub fn inverse_fft2(buf: &mut [Complex64], l: usize) {
    let fft = FftPlanner::new().plan_fft_inverse(l);
    buf.par_chunks_mut(l).for_each(|row| fft.process(row));
    let mut t = transpose(buf, l);
    t.par_chunks_mut(l).for_each(|row| fft.process(row));
    buf.copy_from_slice(&transpose(&t, l));
}

fn transpose(buf: &[Complex64], l: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); l * l];
    out.par_chunks_mut(l).enumerate().for_each(|(b, row)| {
        for (a, v) in row.iter_mut().enumerate() {
            *v = buf[a * l + b];
        }
    });
    out
}

/// Grid angle `2 pi a / l`.
pub fn grid_angle(a: usize, l: usize) -> f64 {
    TAU * a as f64 / l as f64
}

/// Circular distance between two angles.
pub fn angle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}
