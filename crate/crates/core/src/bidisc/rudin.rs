//! Rudin's construction on the bidisc: a non-negative boundary function is
//! split into trigonometric polynomials `p_j`, each paired with the singular
//! measure `p_j lambda_{k_j}`, so that `sum_j P(p_j - p_j lambda_{k_j})` is
//! the real part of an analytic `H`; then `G = exp(K (H - 1))`.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cover::{DyadicSquare, DyadicSquareSet};
use super::fourier::{fejer_weight, grid_angle, grid_from_terms, interval_coefficients, FourierDatum2, FourierRecord};
use super::poisson::{DENSITY_CHECK_GRID, NEGATIVITY_TOL};
use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;

/// Mixed-quadrant energy tolerated by [`pluriharmonic_complete`].
pub const PLURIHARMONIC_TOL: f64 = 1e-12;

/// One piece `p_j = s * Fejer(chi_{squares}) + constant`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LscPiece {
    pub squares: Vec<DyadicSquare>,
    pub constant: f64,
}

/// Splitting of `chi_U + (eps/2) chi_{U^c}` into `J` non-negative
/// trigonometric polynomials of order `M`, kept in factored form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LscDecomposition {
    pub eps: f64,
    pub order: usize,
    /// Weight `1 - eps/2` of the smoothed indicators.
    pub scale: f64,
    pub pieces: Vec<LscPiece>,
}

impl LscDecomposition {
    /// Squares are taken in canonical order and dealt to `p_2, ..., p_J` in
    /// runs of roughly equal mass, never exceeding `j^{-2}`; whatever does not
    /// fit goes to `p_1`, which also carries the constant `eps/2`.
    pub fn new(u: &DyadicSquareSet, eps: f64, j: usize, order: usize) -> Result<Self> {
        if j == 0 {
            return Err(Error::Domain("J must be >= 1".into()));
        }
        if !(eps > 0.0 && eps < 2.0) {
            return Err(Error::Domain(format!("eps must lie in (0, 2) (got {eps})")));
        }
        let scale = 1.0 - 0.5 * eps;
        let mut pieces = vec![
            LscPiece {
                squares: Vec::new(),
                constant: 0.0,
            };
            j
        ];
        pieces[0].constant = 0.5 * eps;
        let total: f64 = scale * u.normalized_area();
        let share = if j > 1 { total / (j - 1) as f64 } else { 0.0 };
        let mut g = 1;
        let mut mass = 0.0;
        for sq in u.squares() {
            let m = scale * sq.normalized_area();
            while g < j {
                let cap = 1.0 / ((g + 1) * (g + 1)) as f64;
                let fits = mass + m <= cap && (mass + m <= share * (1.0 + 1e-9) || mass == 0.0);
                if fits {
                    break;
                }
                g += 1;
                mass = 0.0;
            }
            if g < j {
                pieces[g].squares.push(*sq);
                mass += m;
            } else {
                pieces[0].squares.push(*sq);
            }
        }
        Ok(Self {
            eps,
            order,
            scale,
            pieces,
        })
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// `int p_j dm_2`, with `j` 1-based.
    pub fn mass(&self, j: usize) -> f64 {
        let p = &self.pieces[j - 1];
        self.scale * p.squares.iter().map(DyadicSquare::normalized_area).sum::<f64>() + p.constant
    }

    /// Fourier coefficients of `p_j` (1-based).
    pub fn datum(&self, j: usize) -> FourierDatum2 {
        let p = &self.pieces[j - 1];
        let mut d = smoothed_indicator(&p.squares, self.order, self.scale);
        d.add_at(0, 0, Complex64::new(p.constant, 0.0));
        d
    }

    /// All pieces as coefficient maps.
    pub fn data(&self) -> Vec<FourierDatum2> {
        (1..=self.len()).map(|j| self.datum(j)).collect()
    }

    /// `sum_j p_j = (1 - eps/2) Fejer(chi_U) + eps/2`.
    pub fn sum_datum(&self) -> FourierDatum2 {
        let all: Vec<DyadicSquare> = self.pieces.iter().flat_map(|p| p.squares.iter().copied()).collect();
        let mut d = smoothed_indicator(&all, self.order, self.scale);
        d.add_at(0, 0, Complex64::new(self.pieces.iter().map(|p| p.constant).sum(), 0.0));
        d
    }

    /// Smallest grid value of each `p_j`; fails if one is below `-1e-9`.
    pub fn verify_nonnegative(&self, grid: usize) -> Result<Vec<f64>> {
        (1..=self.len())
            .map(|j| {
                let min = self.datum(j).grid_min(grid);
                if min < -NEGATIVITY_TOL {
                    Err(Error::Construction(format!(
                        "p_{j} takes the negative value {min:e} after smoothing"
                    )))
                } else {
                    Ok(min)
                }
            })
            .collect()
    }

    /// `int |sum_j p_j - (chi_U + (eps/2) chi_{U^c})| dm_2` on an `l x l` grid.
    pub fn l1_error(&self, l: usize) -> f64 {
        let all = DyadicSquareSet::new(self.pieces.iter().flat_map(|p| p.squares.iter().copied()))
            .expect("pieces partition a valid set");
        let index = all.index();
        let g = self.sum_datum().grid_values(l, |_, _| 1.0);
        let err: Vec<f64> = g
            .par_iter()
            .enumerate()
            .map(|(i, v)| {
                let (x, y) = (grid_angle(i / l, l), grid_angle(i % l, l));
                let target = if index.contains(x, y) { 1.0 } else { 0.5 * self.eps };
                (v.re - target).abs()
            })
            .collect();
        pairwise_sum(&err) / (l * l) as f64
    }
}

/// `scale * Fejer_M(chi_{union of squares})` as a dense coefficient window.
fn smoothed_indicator(squares: &[DyadicSquare], order: usize, scale: f64) -> FourierDatum2 {
    let mut d = FourierDatum2::zeros(order);
    if squares.is_empty() {
        return d;
    }
    // aggregate the y-factors of squares sharing an x-interval
    let mut columns: BTreeMap<(u32, u32), Vec<Complex64>> = BTreeMap::new();
    for sq in squares {
        let (y0, y1) = sq.y_range();
        let cy = interval_coefficients(y0, y1, order);
        let acc = columns
            .entry((sq.level, sq.i))
            .or_insert_with(|| vec![Complex64::default(); cy.len()]);
        acc.iter_mut().zip(cy).for_each(|(a, c)| *a += c);
    }
    let o = order as i64;
    let w: Vec<f64> = (-o..=o).map(|m| fejer_weight(m, order)).collect();
    let cols: Vec<(Vec<Complex64>, Vec<Complex64>)> = columns
        .into_iter()
        .map(|((level, i), ys)| {
            let sq = DyadicSquare { level, i, j: 0 };
            let (x0, x1) = sq.x_range();
            (interval_coefficients(x0, x1, order), ys)
        })
        .collect();
    let width = 2 * order + 1;
    let mut data = vec![Complex64::default(); width * width];
    data.par_chunks_mut(width).enumerate().for_each(|(a, row)| {
        for (cx, ys) in &cols {
            let u = cx[a] * (w[a] * scale);
            for (b, v) in row.iter_mut().enumerate() {
                *v += u * ys[b] * w[b];
            }
        }
    });
    for (a, row) in data.chunks(width).enumerate() {
        for (b, &v) in row.iter().enumerate() {
            if v != Complex64::default() {
                d.add_at(a as i64 - o, b as i64 - o, v);
            }
        }
    }
    d.set_real_flag(true);
    d
}

/// Split `chi_U + (eps/2) chi_{U^c}` into `J` non-negative trigonometric
/// polynomials of order `M` with `int p_j <= j^{-2}` for `j >= 2`.
pub fn decompose_lsc(u: &DyadicSquareSet, eps: f64, j: usize, order: usize) -> Result<Vec<FourierDatum2>> {
    let dec = LscDecomposition::new(u, eps, j, order)?;
    dec.verify_nonnegative(DENSITY_CHECK_GRID.max(2 * order + 1))?;
    Ok(dec.data())
}

/// `k_j = max(deg p_j, 2^j)`.
pub fn ring_orders(degrees: &[u64]) -> Vec<u64> {
    degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| d.max(1u64 << (i + 1).min(62)))
        .collect()
}

fn ceil_div(a: i64, k: i64) -> i64 {
    -((-a).div_euclid(k))
}

/// Subtract the shifts `l != 0` of `p` along `(k, k)` that land in the window.
fn subtract_shifts(out: &mut FourierDatum2, p: &FourierDatum2, k: u64) {
    let b = out.band() as i64;
    let k = k as i64;
    for (m, n, c) in p.iter() {
        let lo = ceil_div(-b - m, k).max(ceil_div(-b - n, k));
        let hi = (b - m).div_euclid(k).min((b - n).div_euclid(k));
        for l in lo..=hi {
            if l != 0 {
                out.add_at(m + k * l, n + k * l, -c);
            }
        }
    }
}

/// Fourier coefficients of `sum_j (p_j - p_j lambda_{k_j})` on `|a|, |b| <= band`.
///
/// Requires `k_j >= deg p_j` (total degree); the unshifted copy cancels
/// `p_j` exactly and every other copy lies in the closed first or third
/// quadrant.
pub fn rudin_datum(p_list: &[FourierDatum2], k_list: &[u64], band: usize) -> Result<FourierDatum2> {
    if p_list.len() != k_list.len() {
        return Err(Error::Domain(format!(
            "{} polynomials but {} ring orders",
            p_list.len(),
            k_list.len()
        )));
    }
    let mut out = FourierDatum2::zeros(band);
    for (j, (p, &k)) in p_list.iter().zip(k_list).enumerate() {
        let deg = p.degree();
        if k == 0 || k < deg {
            return Err(Error::Precondition(format!(
                "k_{} = {k} is below deg p_{} = {deg}",
                j + 1,
                j + 1
            )));
        }
        subtract_shifts(&mut out, p, k);
    }
    let real = p_list.iter().all(FourierDatum2::is_real);
    out.set_real_flag(real);
    let energy = out.mixed_quadrant_energy();
    if energy != 0.0 {
        return Err(Error::Construction(format!(
            "mixed-quadrant energy {energy:e} after cancellation"
        )));
    }
    Ok(out)
}

/// Taylor coefficients `(m, n) -> c`, `m, n >= 0`, of total degree at most `bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct BidiscAnalytic {
    bound: usize,
    coeffs: Vec<Complex64>,
}

impl BidiscAnalytic {
    pub fn zeros(bound: usize) -> Self {
        Self {
            bound,
            coeffs: vec![Complex64::default(); (bound + 1) * (bound + 1)],
        }
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let bound = terms.iter().map(|&(a, b, _)| a + b).max().unwrap_or(0);
        let mut g = Self::zeros(bound);
        for (a, b, c) in terms {
            g.coeffs[a * (bound + 1) + b] += c;
        }
        g
    }

    /// Capacity in total degree.
    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        if a + b > self.bound {
            Complex64::default()
        } else {
            self.coeffs[a * (self.bound + 1) + b]
        }
    }

    fn set(&mut self, a: usize, b: usize, c: Complex64) {
        self.coeffs[a * (self.bound + 1) + b] = c;
    }

    /// Nonzero coefficients in `(m, n)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        let w = self.bound + 1;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::default())
            .map(move |(i, &c)| (i / w, i % w, c))
    }

    /// Actual total degree.
    pub fn degree(&self) -> usize {
        self.iter().map(|(a, b, _)| a + b).max().unwrap_or(0)
    }

    /// Terms of total degree at most `d`.
    pub fn truncate(&self, d: usize) -> Self {
        let mut out = Self::zeros(d);
        for (a, b, c) in self.iter().filter(|&(a, b, _)| a + b <= d) {
            out.set(a, b, c);
        }
        out
    }

    pub fn evaluate(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        let n = self.bound + 1;
        let mut p2 = vec![Complex64::new(1.0, 0.0); n];
        for b in 1..n {
            p2[b] = p2[b - 1] * z2;
        }
        let mut acc = Complex64::default();
        let mut p1 = Complex64::new(1.0, 0.0);
        for a in 0..n {
            let row: Complex64 = (0..n - a).map(|b| self.coeffs[a * n + b] * p2[b]).sum();
            acc += p1 * row;
            p1 *= z1;
        }
        acc
    }

    /// `sum |c|^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Energy of the homogeneous part of degree `d`.
    pub fn homogeneous_energy(&self, d: usize) -> f64 {
        (0..=d.min(self.bound)).map(|a| self.get(a, d - a).norm_sqr()).sum()
    }

    pub fn to_records(&self) -> Vec<FourierRecord> {
        self.iter()
            .map(|(a, b, c)| FourierRecord {
                m: a as i64,
                n: b as i64,
                re: c.re,
                im: c.im,
            })
            .collect()
    }
}

/// `H` with `Re H = P(datum)`: `H(0,0) = c(0,0)` and `H(m,n) = 2 c(m,n)` on
/// the rest of the closed first quadrant.
pub fn pluriharmonic_complete(datum: &FourierDatum2) -> Result<BidiscAnalytic> {
    if !datum.is_real() {
        datum.clone().into_real()?;
    }
    let energy = datum.mixed_quadrant_energy();
    if energy > PLURIHARMONIC_TOL {
        return Err(Error::NotPluriharmonic { energy });
    }
    let band = datum.band();
    let mut h = BidiscAnalytic::zeros(2 * band);
    for (m, n, c) in datum.iter().filter(|&(m, n, _)| m >= 0 && n >= 0) {
        let v = if (m, n) == (0, 0) {
            Complex64::new(c.re, 0.0)
        } else {
            2.0 * c
        };
        h.set(m as usize, n as usize, v);
    }
    Ok(h)
}

/// Truncated `exp(K (H - 1))` with an indication of the neglected tail.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpSeries {
    pub g: BidiscAnalytic,
    /// Coefficient energy of the top homogeneous degree.
    pub tail_estimate: f64,
}

/// Taylor coefficients of `G = exp(K (H - 1))` up to total degree `D`, from
/// `n G_n = sum_{j=1}^n j A_j G_{n-j}` on homogeneous parts, `A = K (H - 1)`.
pub fn exp_series(h: &BidiscAnalytic, k: f64, d: usize) -> Result<ExpSeries> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("K must be positive (got {k})")));
    }
    if h.degree() > d {
        return Err(Error::Precondition(format!(
            "degree bound {d} is below deg H = {}",
            h.degree()
        )));
    }
    let a = |i: usize, j: usize| -> Complex64 {
        if (i, j) == (0, 0) {
            (h.get(0, 0) - 1.0) * k
        } else {
            h.get(i, j) * k
        }
    };
    let mut g = BidiscAnalytic::zeros(d);
    g.set(0, 0, a(0, 0).exp());
    for n in 1..=d {
        let row: Vec<Complex64> = (0..=n)
            .into_par_iter()
            .map(|p| {
                let q = n - p;
                let mut acc = Complex64::default();
                for j in 1..=n {
                    for c in j.saturating_sub(q)..=j.min(p) {
                        let av = a(c, j - c);
                        if av != Complex64::default() {
                            acc += av * g.get(p - c, q - (j - c)) * j as f64;
                        }
                    }
                }
                acc / n as f64
            })
            .collect();
        for (p, v) in row.into_iter().enumerate() {
            g.set(p, n - p, v);
        }
    }
    let tail_estimate = g.homogeneous_energy(d);
    Ok(ExpSeries { g, tail_estimate })
}

/// `(sum |c|^2)^{1/2}`; the `H^2(D^2)` norm, equal to `||g||_{H^2}` for
/// `g(s) = G(2^{-s}, 3^{-s})`.
pub fn h2_norm_bidisc(g: &BidiscAnalytic) -> f64 {
    g.energy().sqrt()
}

/// One point of a modulus trace along the image of a vertical line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub modulus: f64,
}

/// `(2^{-s}, 3^{-s})` at `s = sigma + it`, pulled in to radius `1 - delta`
/// on the boundary line `sigma = 0`.
pub fn curve_point(sigma: f64, t: f64, delta: f64) -> (Complex64, Complex64) {
    let shrink = if sigma == 0.0 { 1.0 - delta } else { 1.0 };
    let z = |ln: f64| Complex64::from_polar((-sigma * ln).exp() * shrink, -t * ln);
    (z(LN_2), z(3f64.ln()))
}

fn sample_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t0];
    }
    (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect()
}

/// `|G(2^{-sigma-it}, 3^{-sigma-it})|` at `n` equispaced `t` in `[t0, t1]`.
pub fn curve_trace(g: &BidiscAnalytic, sigma: f64, t0: f64, t1: f64, n: usize, delta: f64) -> Result<Vec<TraceSample>> {
    if !(sigma >= 0.0) || n == 0 {
        return Err(Error::Domain(format!("need sigma >= 0 and n >= 1 (got {sigma}, {n})")));
    }
    if sigma == 0.0 && !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1) (got {delta})")));
    }
    Ok(sample_times(t0, t1, n)
        .par_iter()
        .map(|&t| {
            let (z1, z2) = curve_point(sigma, t, delta);
            TraceSample {
                t,
                modulus: g.evaluate(z1, z2).norm(),
            }
        })
        .collect())
}

/// Closed form of the analytic function built from an [`LscDecomposition`].
///
/// With `k_j >= deg p_j` the completion of the ring part sums to
/// `H(z) = -2 sum_j W_j Q_j(z) / (1 - W_j)`, `W_j = (z_1 z_2)^{k_j}` and
/// `Q_j(z) = sum p_hat_j(m, n) z_1^m z_2^n`, which is exact at any interior
/// point. `Re H` tends to `sum_j p_j` on the torus away from the rings.
#[derive(Clone, Debug)]
pub struct RudinFunction {
    dec: LscDecomposition,
    ks: Vec<u64>,
    /// `w_m c_i(m)` for each distinct x-interval, index `m + M`.
    columns: Vec<Vec<Complex64>>,
    rows: Vec<Vec<Complex64>>,
    /// Per piece: `(column, row)` of each square.
    cells: Vec<Vec<(usize, usize)>>,
}

impl RudinFunction {
    pub fn new(dec: LscDecomposition, ks: Vec<u64>) -> Result<Self> {
        if ks.len() != dec.len() {
            return Err(Error::Domain("one ring order per piece required".into()));
        }
        let order = dec.order;
        for (j, &k) in ks.iter().enumerate() {
            let deg = if dec.pieces[j].squares.is_empty() {
                0
            } else {
                2 * order as u64
            };
            if k < deg || k == 0 {
                return Err(Error::Precondition(format!(
                    "k_{} = {k} is below deg p_{} = {deg}",
                    j + 1,
                    j + 1
                )));
            }
        }
        let o = order as i64;
        let weighted = |x0: f64, x1: f64| -> Vec<Complex64> {
            interval_coefficients(x0, x1, order)
                .into_iter()
                .zip(-o..=o)
                .map(|(c, m)| c * fejer_weight(m, order))
                .collect()
        };
        let mut col_keys: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        let mut row_keys: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        let mut columns = Vec::new();
        let mut rows = Vec::new();
        let mut cells = Vec::new();
        for piece in &dec.pieces {
            let mut pc = Vec::with_capacity(piece.squares.len());
            for sq in &piece.squares {
                let ci = *col_keys.entry((sq.level, sq.i)).or_insert_with(|| {
                    let (x0, x1) = sq.x_range();
                    columns.push(weighted(x0, x1));
                    columns.len() - 1
                });
                let ri = *row_keys.entry((sq.level, sq.j)).or_insert_with(|| {
                    let (y0, y1) = sq.y_range();
                    rows.push(weighted(y0, y1));
                    rows.len() - 1
                });
                pc.push((ci, ri));
            }
            cells.push(pc);
        }
        Ok(Self {
            dec,
            ks,
            columns,
            rows,
            cells,
        })
    }

    pub fn decomposition(&self) -> &LscDecomposition {
        &self.dec
    }

    pub fn ring_orders(&self) -> &[u64] {
        &self.ks
    }

    /// `H(z_1, z_2)` for `|z_1|, |z_2| < 1`.
    pub fn evaluate(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        let order = self.dec.order;
        // shifted powers z^{m + M}, all with non-negative exponent
        let powers = |z: Complex64| -> Vec<Complex64> {
            let mut p = vec![Complex64::new(1.0, 0.0); 2 * order + 1];
            for i in 1..p.len() {
                p[i] = p[i - 1] * z;
            }
            p
        };
        let (p1, p2) = (powers(z1), powers(z2));
        let dot = |c: &Vec<Complex64>, p: &Vec<Complex64>| -> Complex64 { c.iter().zip(p).map(|(a, b)| a * b).sum() };
        let colv: Vec<Complex64> = self.columns.iter().map(|c| dot(c, &p1)).collect();
        let rowv: Vec<Complex64> = self.rows.iter().map(|c| dot(c, &p2)).collect();
        let zz = z1 * z2;
        let mut h = Complex64::default();
        for (j, piece) in self.dec.pieces.iter().enumerate() {
            let k = self.ks[j];
            let w = zz.powu(k as u32);
            // W Q_j(z), the square part carried as (z1 z2)^{k - M} (z1 z2)^M Q
            let mut wq = w * piece.constant;
            if !self.cells[j].is_empty() {
                let sq: Complex64 = self.cells[j].iter().map(|&(c, r)| colv[c] * rowv[r]).sum();
                wq += zz.powu((k - order as u64) as u32) * sq * self.dec.scale;
            }
            h += -2.0 * wq / (1.0 - w);
        }
        h
    }

    /// `|G| = exp(K (Re H - 1))` along `t -> (1 - delta)(2^{-it}, 3^{-it})`.
    pub fn trace(&self, k_gain: f64, t0: f64, t1: f64, n: usize, delta: f64) -> Vec<TraceSample> {
        sample_times(t0, t1, n)
            .par_iter()
            .map(|&t| {
                let (z1, z2) = curve_point(0.0, t, delta);
                TraceSample {
                    t,
                    modulus: (k_gain * (self.evaluate(z1, z2).re - 1.0)).exp(),
                }
            })
            .collect()
    }

    /// `Re H` on the torus of radius `r` (both radii equal), at the angles of
    /// [`RudinFunction::grid_angles`].
    pub fn re_h_grid(&self, r: f64, l: usize) -> Vec<f64> {
        let (ax, ay) = self.grid_shift(l);
        let mut acc = vec![0.0; l * l];
        for j in 1..=self.dec.len() {
            let p = self.dec.datum(j);
            let k = self.ks[j - 1];
            // r^{m + n + 2k} stays <= 1 because m + n >= -deg p >= -k
            let s = grid_from_terms(
                l,
                p.iter().map(|(m, n, c)| {
                    let shift = Complex64::cis(m as f64 * ax + n as f64 * ay);
                    (m, n, c * shift * r.powf((m + n + 2 * k as i64) as f64))
                }),
            );
            let rk = r.powf(2.0 * k as f64);
            acc.par_chunks_mut(l).enumerate().for_each(|(a, row)| {
                let x = grid_angle(a, l) + ax;
                for (b, v) in row.iter_mut().enumerate() {
                    let phase = Complex64::cis(k as f64 * (x + grid_angle(b, l) + ay));
                    let w = phase * rk;
                    *v += -2.0 * (phase * s[a * l + b] / (1.0 - w)).re;
                }
            });
        }
        acc
    }

    // Offsets by irrational fractions of a cell keep the nodes off the rings
    // `k (x + y) = 0 mod 2 pi`, which a dyadic grid would sit on exactly.
    fn grid_shift(&self, l: usize) -> (f64, f64) {
        let cell = std::f64::consts::TAU / l as f64;
        (cell * 0.618_033_988_749_894_8, cell * 0.414_213_562_373_095_1)
    }

    /// Angles `(x_a, y_b)` of grid node `(a, b)` used by [`RudinFunction::re_h_grid`].
    pub fn grid_angles(&self, a: usize, b: usize, l: usize) -> (f64, f64) {
        let (ax, ay) = self.grid_shift(l);
        (grid_angle(a, l) + ax, grid_angle(b, l) + ay)
    }

    /// `b = sum_j p_j` on the `l x l` boundary grid.
    pub fn boundary_grid(&self, l: usize) -> Vec<f64> {
        self.dec
            .sum_datum()
            .grid_values(l, |_, _| 1.0)
            .into_iter()
            .map(|v| v.re)
            .collect()
    }

    /// `||G||_{H^2}` from the boundary modulus `exp(K (b - 1))` on an `l x l` grid.
    pub fn h2_boundary(&self, k_gain: f64, boundary: &[f64]) -> f64 {
        let v: Vec<f64> = boundary.par_iter().map(|&b| (2.0 * k_gain * (b - 1.0)).exp()).collect();
        (pairwise_sum(&v) / boundary.len() as f64).sqrt()
    }

    /// Fourier data of the truncated Rudin datum on `|a|, |b| <= band`.
    pub fn truncated_datum(&self, band: usize) -> Result<FourierDatum2> {
        let mut out = FourierDatum2::zeros(band);
        for j in 1..=self.dec.len() {
            subtract_shifts(&mut out, &self.dec.datum(j), self.ks[j - 1]);
        }
        out.set_real_flag(true);
        Ok(out)
    }
}
