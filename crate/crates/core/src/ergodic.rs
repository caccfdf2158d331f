//! Vertical-line means, the Kronecker flow and boundary approach on the torus.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::PrimeTable;
use crate::dirichlet::{DirichletPolynomial, PolytorusPolynomial};
use crate::error::{Error, Result};
use crate::norms::ErrorBound;
use crate::quadrature::{panel_count, panel_width};
use crate::reduce::blocked_sum;

const UNIMODULAR_TOL: f64 = 1e-9;

/// `ln p_1, ..., ln p_d`.
pub fn prime_logs(d: usize) -> Result<Vec<f64>> {
    let table = PrimeTable::global();
    (1..=d).map(|j| Ok((table.nth(j)? as f64).ln())).collect()
}

fn check_unimodular(tau: &[Complex64]) -> Result<()> {
    match tau.iter().position(|z| (z.norm() - 1.0).abs() > UNIMODULAR_TOL) {
        Some(j) => Err(Error::Domain(format!(
            "coordinate {} has modulus {}, expected 1",
            j + 1,
            tau[j].norm()
        ))),
        None => Ok(()),
    }
}

/// A point of the torus moved by the Kronecker flow `T_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KroneckerOrbit {
    pub base_point: Vec<Complex64>,
    pub frequencies: Vec<f64>,
}

impl KroneckerOrbit {
    pub fn new(base_point: Vec<Complex64>) -> Result<Self> {
        check_unimodular(&base_point)?;
        let frequencies = prime_logs(base_point.len())?;
        Ok(Self {
            base_point,
            frequencies,
        })
    }

    pub fn dimension(&self) -> usize {
        self.base_point.len()
    }

    /// `T_t(base_point)`.
    pub fn at(&self, t: f64) -> Vec<Complex64> {
        self.base_point
            .iter()
            .zip(&self.frequencies)
            .map(|(&z, &w)| {
                let v = z * Complex64::cis(-t * w);
                v / v.norm()
            })
            .collect()
    }
}

/// `T_t(tau) = (p_j^{-it} tau_j)_j`.
pub fn kronecker_flow(tau: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    Ok(KroneckerOrbit::new(tau.to_vec())?.at(t))
}

/// `b_theta(tau) = (p_j^{-theta} tau_j)_j`, a point inside the polydisc.
pub fn b_theta(tau: &[Complex64], theta: f64) -> Result<Vec<Complex64>> {
    if !(theta >= 0.0) {
        return Err(Error::Domain(format!("theta must be >= 0 (got {theta})")));
    }
    let logs = prime_logs(tau.len())?;
    Ok(tau.iter().zip(&logs).map(|(&z, &w)| z * (-theta * w).exp()).collect())
}

/// One row of a mean-value experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma: f64,
    pub p: f64,
    pub value: f64,
    pub target: Option<f64>,
    pub error_bound: ErrorBound,
    /// `|value - target| <= error_bound`, present when a target is known and
    /// the bound is not heuristic.
    pub flag: Option<bool>,
    pub notes: String,
}

impl MeanReport {
    pub const CSV_HEADER: &'static str = "T,sigma,p,value,target,error_kind,error_bound,flag";

    fn new(
        t: f64,
        sigma: f64,
        p: f64,
        value: f64,
        target: Option<f64>,
        error_bound: ErrorBound,
        notes: String,
    ) -> Self {
        let flag = match (target, error_bound.is_heuristic()) {
            (Some(target), false) => Some((value - target).abs() <= error_bound.value()),
            _ => None,
        };
        Self {
            t,
            sigma,
            p,
            value,
            target,
            error_bound,
            flag,
            notes,
        }
    }

    /// CSV row in the order of [`MeanReport::CSV_HEADER`]; absent fields are
    /// left empty.
    pub fn csv_row(&self) -> String {
        let target = self.target.map(|v| format!("{v:e}")).unwrap_or_default();
        let flag = self.flag.map(|f| f.to_string()).unwrap_or_default();
        format!(
            "{:e},{:e},{:e},{:e},{},{},{:e},{}",
            self.t,
            self.sigma,
            self.p,
            self.value,
            target,
            self.error_bound.kind(),
            self.error_bound.value(),
            flag
        )
    }
}

/// Header plus one line per report.
pub fn reports_to_csv(reports: &[MeanReport]) -> String {
    let mut out = String::from(MeanReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// `(1/T) int_0^T |f(sigma + it)|^p dt` with the heuristic error of one
/// refinement of the panel width.
pub fn integral_mean(f: &DirichletPolynomial, sigma: f64, t: f64, p: f64) -> Result<MeanReport> {
    let (value, err) = mean_with_error(f, sigma, t, p)?;
    Ok(MeanReport::new(
        t,
        sigma,
        p,
        value,
        None,
        ErrorBound::Heuristic(err),
        "quadrature refinement".into(),
    ))
}

fn mean_with_error(f: &DirichletPolynomial, sigma: f64, t: f64, p: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("T must be positive and finite (got {t})")));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("p must be positive (got {p})")));
    }
    let line = f.vertical_line(sigma);
    let n = panel_count(t, panel_width(f.max_index(), p));
    let r = line.integrate_power_refined(0.0, t, p, n);
    Ok((r.value / t, r.error / t))
}

/// `(2/T) sum_{m != n} |a_m| |a_n| (mn)^{-sigma} / |ln(m/n)|`, which bounds the
/// distance between the mean of `|f(sigma + it)|^2` over `[0, T]` and
/// `sum |a_n|^2 n^{-2 sigma}`.
pub fn carlson_cross_term_bound(f: &DirichletPolynomial, sigma: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("T must be positive (got {t})")));
    }
    let terms: Vec<(f64, f64)> = f
        .coefficients()
        .iter()
        .map(|(n, a)| {
            let ln = (n as f64).ln();
            (ln, a.norm() * (-sigma * ln).exp())
        })
        .collect();
    // each unordered pair counted twice
    let pairs = blocked_sum(terms.len(), 16, |s, e| {
        let mut acc = 0.0;
        for i in s..e {
            let (li, wi) = terms[i];
            for &(lj, wj) in &terms[i + 1..] {
                acc += wi * wj / (lj - li);
            }
        }
        acc
    });
    Ok(4.0 * pairs / t)
}

fn check_horizons(t_list: &[f64]) -> Result<()> {
    if t_list.is_empty() {
        return Err(Error::Domain("T list is empty".into()));
    }
    if t_list.iter().any(|&t| !(t > 0.0)) || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("T list must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Compare the mean of `|f(sigma + it)|^2` on `[0, T]` with the weighted
/// coefficient energy for each `T`.
pub fn carlson_check(f: &DirichletPolynomial, sigma: f64, t_list: &[f64]) -> Result<Vec<MeanReport>> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be >= 0 (got {sigma})")));
    }
    check_horizons(t_list)?;
    let target = f.weighted_energy(sigma);
    t_list
        .iter()
        .map(|&t| {
            let (value, quad) = mean_with_error(f, sigma, t, 2.0)?;
            let cross = carlson_cross_term_bound(f, sigma, t)?;
            Ok(MeanReport::new(
                t,
                sigma,
                2.0,
                value,
                Some(target),
                ErrorBound::Rigorous(cross + quad),
                format!("cross-term bound {cross:e}, quadrature {quad:e}"),
            ))
        })
        .collect()
}

/// [`carlson_check`] on the critical line `sigma = 1/2`.
pub fn pmeans_check(f: &DirichletPolynomial, t_list: &[f64]) -> Result<Vec<MeanReport>> {
    carlson_check(f, 0.5, t_list)
}

const DISCREPANCY_GRID: usize = 32;
const DISCREPANCY_BLOCK: usize = 8192;

/// Amount by which the grid estimate of [`weyl_discrepancy`] can fall short
/// of the star discrepancy: an anchored box lies between two grid boxes whose
/// volumes differ by at most `d / 32`.
pub fn discrepancy_resolution(d: usize) -> f64 {
    d as f64 / DISCREPANCY_GRID as f64
}

/// Star discrepancy, estimated over grid-anchored boxes `[0, k/32)^d`, of the
/// points `(t_i ln p_j mod 2 pi) / 2 pi` at midpoint times `t_i = (i + 1/2) T / n`.
pub fn weyl_discrepancy(d: usize, t: f64, n_samples: usize) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::Domain(format!("discrepancy supports d = 1..3 (got {d})")));
    }
    if !(t > 0.0) || n_samples == 0 {
        return Err(Error::Domain("need T > 0 and n_samples >= 1".into()));
    }
    let logs = prime_logs(d)?;
    let g = DISCREPANCY_GRID;
    let cells = g.pow(d as u32);
    let dt = t / n_samples as f64;

    let counts: Vec<u64> = (0..n_samples.div_ceil(DISCREPANCY_BLOCK))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|b| (b * DISCREPANCY_BLOCK, ((b + 1) * DISCREPANCY_BLOCK).min(n_samples)))
        .map(|(s, e)| {
            let mut c = vec![0u64; cells];
            for i in s..e {
                let ti = (i as f64 + 0.5) * dt;
                let mut cell = 0;
                for &w in &logs {
                    let x = (ti * w).rem_euclid(TAU) / TAU;
                    cell = cell * g + ((x * g as f64) as usize).min(g - 1);
                }
                c[cell] += 1;
            }
            c
        })
        .fold(vec![0u64; cells], |mut acc, c| {
            acc.iter_mut().zip(c).for_each(|(a, v)| *a += v);
            acc
        });

    // inclusive prefix sums along each axis
    let mut cum = counts;
    let mut stride = 1;
    for _ in 0..d {
        for idx in 0..cells {
            if (idx / stride) % g != 0 {
                cum[idx] += cum[idx - stride];
            }
        }
        stride *= g;
    }
    let n = n_samples as f64;
    let mut worst = 0.0f64;
    for (idx, &c) in cum.iter().enumerate() {
        let mut vol = 1.0;
        let mut rest = idx;
        for _ in 0..d {
            vol *= ((rest % g) + 1) as f64 / g as f64;
            rest /= g;
        }
        worst = worst.max((c as f64 / n - vol).abs());
    }
    Ok(worst)
}

/// Radial limits along `b_theta` at sampled points of a Kronecker orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FatouRow {
    pub t: f64,
    /// `F(b_theta(T_t tau))` for each theta.
    pub approach: Vec<Complex64>,
    /// `F(T_t tau)`.
    pub limit: Complex64,
    /// Deviation at the smallest theta.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FatouReport {
    pub thetas: Vec<f64>,
    pub rows: Vec<FatouRow>,
    pub max_deviation: f64,
    /// `sum |b_beta| |1 - prod p_j^{-theta beta_j}|` at the smallest theta.
    pub continuity_bound: f64,
}

pub fn fatou_orbit_check(
    big_f: &PolytorusPolynomial,
    tau: &[Complex64],
    thetas: &[f64],
    t_samples: &[f64],
) -> Result<FatouReport> {
    if thetas.is_empty() || thetas.iter().any(|&x| !(x > 0.0)) || thetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain(
            "theta list must be positive and strictly decreasing".into(),
        ));
    }
    let d = big_f.dimension();
    if tau.len() < d {
        return Err(Error::Domain(format!(
            "base point has {} coordinates, polynomial uses {d} variables",
            tau.len()
        )));
    }
    let orbit = KroneckerOrbit::new(tau.to_vec())?;
    let eval = big_f.evaluator();
    let mut powers = Vec::new();
    let mut rows = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let z = orbit.at(t);
        let limit = eval.eval_with(&z[..d], &mut powers);
        let approach = thetas
            .iter()
            .map(|&th| Ok(eval.eval_with(&b_theta(&z[..d], th)?, &mut powers)))
            .collect::<Result<Vec<_>>>()?;
        let deviation = (approach[approach.len() - 1] - limit).norm();
        rows.push(FatouRow {
            t,
            approach,
            limit,
            deviation,
        });
    }
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let theta = thetas[thetas.len() - 1];
    let logs = prime_logs(d)?;
    let continuity_bound = big_f
        .iter()
        .map(|(beta, c)| {
            let e: f64 = beta.exponents().iter().zip(&logs).map(|(&b, &w)| b as f64 * w).sum();
            c.norm() * (1.0 - (-theta * e).exp())
        })
        .sum();
    Ok(FatouReport {
        thetas: thetas.to_vec(),
        rows,
        max_deviation,
        continuity_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::bohr_lift;

    fn poly(pairs: &[(u64, f64)]) -> DirichletPolynomial {
        DirichletPolynomial::from_real(pairs).unwrap()
    }

    fn ones(d: usize) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); d]
    }

    #[test]
    fn flow_examples() {
        let tau = ones(2);
        let z = kronecker_flow(&tau, TAU / 2f64.ln()).unwrap();
        assert!((z[0] - 1.0).norm() < 1e-12);
        assert_eq!(kronecker_flow(&tau, 0.0).unwrap(), tau);
        let tau = vec![Complex64::cis(0.3), Complex64::cis(-2.0), Complex64::cis(1.0)];
        let a = kronecker_flow(&kronecker_flow(&tau, 1.7).unwrap(), -4.2).unwrap();
        let b = kronecker_flow(&tau, 1.7 - 4.2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
            assert!((x.norm() - 1.0).abs() < 1e-15);
        }
        assert!(kronecker_flow(&[Complex64::new(0.5, 0.0)], 1.0).is_err());
    }

    #[test]
    fn b_theta_examples() {
        let tau = ones(3);
        assert_eq!(b_theta(&tau, 0.0).unwrap(), tau);
        let z = b_theta(&tau, 0.5).unwrap();
        for (zj, p) in z.iter().zip([2.0f64, 3.0, 5.0]) {
            assert!((zj.re - p.powf(-0.5)).abs() < 1e-15);
        }
        assert!(b_theta(&tau, -1.0).is_err());
        // commutes with the flow
        let tau = vec![Complex64::cis(0.1), Complex64::cis(2.0)];
        let a = b_theta(&kronecker_flow(&tau, 3.3).unwrap(), 0.2).unwrap();
        let b: Vec<Complex64> = b_theta(&tau, 0.2)
            .unwrap()
            .iter()
            .zip(prime_logs(2).unwrap())
            .map(|(&z, w)| z * Complex64::cis(-3.3 * w))
            .collect();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn integral_mean_examples() {
        let r = integral_mean(&poly(&[(2, 3.0)]), 0.5, 13.0, 2.0).unwrap();
        assert!((r.value - 4.5).abs() < 1e-12);
        let f = poly(&[(1, 1.0), (2, 1.0)]);
        let t = 5000.0;
        let r = integral_mean(&f, 0.0, t, 2.0).unwrap();
        let exact = 2.0 + 2.0 * (t * 2f64.ln()).sin() / (t * 2f64.ln());
        assert!((r.value - exact).abs() < 1e-11);
        let r = integral_mean(&f, 1.0, 1e4, 2.0).unwrap();
        assert!((r.value - 1.25).abs() < 1e-3);
        assert!(integral_mean(&f, 0.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn cross_term_examples() {
        assert_eq!(carlson_cross_term_bound(&poly(&[(5, 2.0)]), 0.0, 10.0).unwrap(), 0.0);
        let f = poly(&[(1, 1.0), (2, 1.0)]);
        let b = carlson_cross_term_bound(&f, 0.0, 10.0).unwrap();
        assert!((b - 4.0 / (10.0 * 2f64.ln())).abs() < 1e-15);
        let b2 = carlson_cross_term_bound(&f, 0.0, 20.0).unwrap();
        assert!((b2 - b / 2.0).abs() < 1e-16);
    }

    #[test]
    fn carlson_examples() {
        let r = carlson_check(&poly(&[(3, 2.0)]), 1.0, &[10.0, 100.0]).unwrap();
        for row in &r {
            assert_eq!(row.target, Some(4.0 / 9.0));
            assert!((row.value - 4.0 / 9.0).abs() < 1e-12);
            assert_eq!(row.flag, Some(true));
        }
        let r = carlson_check(&poly(&[(1, 1.0), (2, 1.0)]), 0.0, &[1e4]).unwrap();
        assert!((r[0].value - 2.0).abs() <= 4.0 / (1e4 * 2f64.ln()));
        assert_eq!(r[0].flag, Some(true));
        assert!(carlson_check(&poly(&[(1, 1.0)]), 0.0, &[]).is_err());
        assert!(carlson_check(&poly(&[(1, 1.0)]), 0.0, &[10.0, 5.0]).is_err());
        assert!(carlson_check(&poly(&[(1, 1.0)]), -0.1, &[10.0]).is_err());
    }

    #[test]
    fn pmeans_targets() {
        let r = pmeans_check(&poly(&[(2, 1.0)]), &[10.0]).unwrap();
        assert!((r[0].target.unwrap() - 0.5).abs() < 1e-15);
        let r = pmeans_check(&poly(&[(1, 1.0), (2, 1.0), (3, 1.0)]), &[10.0]).unwrap();
        assert!((r[0].target.unwrap() - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let r = carlson_check(&poly(&[(3, 2.0)]), 1.0, &[10.0]).unwrap();
        let csv = reports_to_csv(&r);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(MeanReport::CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!((row[5], row[7]), ("rigorous", "true"));
        let h = integral_mean(&poly(&[(3, 2.0)]), 1.0, 10.0, 3.0).unwrap();
        let row = h.csv_row();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!((fields[4], fields[5], fields[7]), ("", "heuristic", ""));
        assert!(fields[6].parse::<f64>().unwrap() >= 0.0);
    }

    #[test]
    fn discrepancy_tiny_horizon_is_large() {
        let d = weyl_discrepancy(2, 0.01, 1000).unwrap();
        assert!(d > 0.9, "{d}");
        assert!(weyl_discrepancy(4, 1.0, 10).is_err());
        assert!(weyl_discrepancy(0, 1.0, 10).is_err());
    }

    #[test]
    fn fatou_examples() {
        let c = PolytorusPolynomial::from_terms([(crate::arith::MultiIndex::one(), Complex64::new(2.0, 1.0))]);
        let r = fatou_orbit_check(&c, &[], &[0.1, 0.01], &[0.0, 1.0]).unwrap();
        assert_eq!(r.max_deviation, 0.0);

        let big_f = bohr_lift(&poly(&[(1, 1.0), (2, 1.0)])).unwrap();
        let tau = ones(1);
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.7).collect();
        let r = fatou_orbit_check(&big_f, &tau, &[0.1, 0.01, 1e-3], &ts).unwrap();
        assert!(r.max_deviation <= 1.0 - 2f64.powf(-1e-3) + 1e-15);
        assert!(r.max_deviation < 7e-4);
        assert!(r.max_deviation <= r.continuity_bound + 1e-15);
        assert!(r.rows[0].deviation > 0.0);
    }
}
