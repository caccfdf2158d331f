//! `H^p` norms of Dirichlet polynomials.
//!
//! For `p = 2k` the norm is exact: `||f||_{2k} = ||f^k||_2^{1/k}`, the `H^2`
//! norm being the coefficient energy. Other exponents are estimated either by
//! a long vertical-line mean (`flow`) or by sampling the lift on the torus
//! (`monte-carlo`); both always carry an error bound.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{bohr_lift, DirichletPolynomial, PolytorusPolynomial};
use crate::ergodic::carlson_cross_term_bound;
use crate::error::{Error, Result};
use crate::quadrature::{panel_count, panel_width};
use crate::reduce::{blocked_sum, par_map, Moments};

/// How an estimate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    ExactEven,
    Flow,
    MonteCarlo,
    /// Sup norm lower bound from grid search plus local ascent.
    GridAscent,
}

impl NormMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMethod::ExactEven => "exact-even",
            NormMethod::Flow => "flow",
            NormMethod::MonteCarlo => "monte-carlo",
            NormMethod::GridAscent => "grid-ascent",
        }
    }
}

/// Size of an error bar together with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum ErrorBound {
    /// Proven bound (up to floating point and converged quadrature).
    Rigorous(f64),
    /// Confidence half-width of a sampling estimate.
    Statistical(f64),
    /// Indicative only, e.g. a refinement difference.
    Heuristic(f64),
}

impl ErrorBound {
    pub fn value(self) -> f64 {
        match self {
            ErrorBound::Rigorous(v) | ErrorBound::Statistical(v) | ErrorBound::Heuristic(v) => v,
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            ErrorBound::Rigorous(_) => "rigorous",
            ErrorBound::Statistical(_) => "statistical",
            ErrorBound::Heuristic(_) => "heuristic",
        }
    }

    pub fn is_heuristic(self) -> bool {
        matches!(self, ErrorBound::Heuristic(_))
    }
}

/// Result of a norm computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// The norm itself (`p`-th root scale).
    pub value: f64,
    /// The `p`-th power of the norm, i.e. the integral that was estimated.
    pub power_mean: f64,
    pub p: f64,
    pub method: NormMethod,
    /// Error on the `value` scale.
    pub error_bound: ErrorBound,
    /// Sample count for Monte Carlo and grid search.
    pub samples: Option<u64>,
    /// Half-length `T` of the averaging window for the flow method.
    pub horizon: Option<f64>,
    /// Set when `value` is only a lower bound for the true norm.
    pub lower_bound: bool,
}

/// `||f||_2 = (sum |a_n|^2)^{1/2}`.
pub fn l2_norm(f: &DirichletPolynomial) -> f64 {
    f.weighted_energy(0.0).sqrt()
}

/// Exact `||f||_{2k}` through the `k`-th convolution power.
pub fn hp_norm_even(f: &DirichletPolynomial, k: u32) -> Result<NormEstimate> {
    if k == 0 {
        return Err(Error::Domain("even exponent index k must be >= 1".into()));
    }
    let energy = f.pow(k)?.weighted_energy(0.0);
    let p = 2.0 * k as f64;
    Ok(NormEstimate {
        value: energy.powf(1.0 / p),
        power_mean: energy,
        p,
        method: NormMethod::ExactEven,
        error_bound: ErrorBound::Rigorous(0.0),
        samples: None,
        horizon: None,
        lower_bound: false,
    })
}

/// `Some(k)` when `p = 2k` for a positive integer `k`.
pub fn even_index(p: f64) -> Option<u32> {
    let k = p / 2.0;
    (k >= 1.0 && k.fract() == 0.0 && k <= u32::MAX as f64).then_some(k as u32)
}

/// Error interval of `m^{1/p}` given `|m_hat - m| <= e`.
fn root_interval_error(m: f64, e: f64, p: f64) -> f64 {
    let v = m.max(0.0).powf(1.0 / p);
    let hi = (m + e).max(0.0).powf(1.0 / p) - v;
    let lo = v - (m - e).max(0.0).powf(1.0 / p);
    hi.max(lo)
}

/// `(1/2T) int_{-T}^{T} |f(it)|^p dt` with its quadrature error.
fn symmetric_flow_mean(f: &DirichletPolynomial, p: f64, t: f64) -> (f64, f64) {
    let line = f.vertical_line(0.0);
    let n = panel_count(2.0 * t, panel_width(f.max_index(), p));
    let r = line.integrate_power_refined(-t, t, p, n);
    (r.value / (2.0 * t), r.error / (2.0 * t))
}

/// Estimate `||f||_p` by the symmetric mean of `|f(it)|^p` over `[-T, T]`.
///
/// Even `p` gets a rigorous bound: the cross terms of `f^{p/2}` integrate to
/// at most `1 / (T |ln(m/n)|)` each. Other `p` report the change between
/// horizons `T/2` and `T` as a heuristic error.
pub fn hp_norm_flow(f: &DirichletPolynomial, p: f64, t: f64) -> Result<NormEstimate> {
    if !(t > 0.0) || !(p > 0.0) {
        return Err(Error::Domain(format!(
            "flow norm needs T > 0 and p > 0 (got T = {t}, p = {p})"
        )));
    }
    let (m, quad_err) = symmetric_flow_mean(f, p, t);
    let error_bound = match even_index(p) {
        Some(k) => {
            let cross = carlson_cross_term_bound(&f.pow(k)?, 0.0, 2.0 * t)?;
            ErrorBound::Rigorous(root_interval_error(m, cross + quad_err, p))
        }
        None => {
            let (m_half, quad_half) = symmetric_flow_mean(f, p, 0.5 * t);
            let e = (m - m_half).abs() + quad_err + quad_half;
            ErrorBound::Heuristic(root_interval_error(m, e, p))
        }
    };
    Ok(NormEstimate {
        value: m.max(0.0).powf(1.0 / p),
        power_mean: m,
        p,
        method: NormMethod::Flow,
        error_bound,
        samples: None,
        horizon: Some(t),
        lower_bound: false,
    })
}

const MC_BLOCK: usize = 4096;

/// Deterministic Monte Carlo moments of `|F|^p` over uniform torus points.
fn mc_moments(big_f: &PolytorusPolynomial, p: f64, n_samples: usize, seed: u64) -> Moments {
    let eval = big_f.evaluator();
    let d = eval.dimension();
    blocked_sum(n_samples, MC_BLOCK, |s, e| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((s / MC_BLOCK) as u64);
        let mut z = vec![Complex64::default(); d];
        let mut powers = Vec::new();
        let mut acc = Moments::default();
        for _ in s..e {
            for zj in z.iter_mut() {
                *zj = Complex64::cis(rng.gen::<f64>() * TAU);
            }
            let v = eval.eval_with(&z, &mut powers).norm_sqr().powf(0.5 * p);
            acc.sum += v;
            acc.sum_sq += v * v;
        }
        acc
    })
}

/// Monte Carlo estimate of `int |F|^p dm` with its `3 sd / sqrt(n)` bar plus
/// a rounding floor.
pub fn mc_power_mean(f: &DirichletPolynomial, p: f64, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    if n_samples < 2 {
        return Err(Error::Domain("Monte Carlo needs at least 2 samples".into()));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("p must be positive (got {p})")));
    }
    let big_f = bohr_lift(f)?;
    let mom = mc_moments(&big_f, p, n_samples, seed);
    let n = n_samples as f64;
    let mean = mom.sum / n;
    let var = ((mom.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    // floor for constant |F|, where the sample variance vanishes; blocks are
    // summed sequentially
    let terms = f.len().max(1) as f64;
    let rounding = 4.0 * f64::EPSILON * (terms + p.max(1.0) + MC_BLOCK as f64 + n.log2()) * mean;
    Ok((mean, 3.0 * var.sqrt() / n.sqrt() + rounding))
}

/// Monte Carlo estimate of `||F||_{H^p}` over `T^d`, `d` the number of prime
/// slots used by `f`. The bar is `3 sd / sqrt(n)` on the `p`-th power scale,
/// carried to the norm scale to first order.
pub fn hp_norm_mc(f: &DirichletPolynomial, p: f64, n_samples: usize, seed: u64) -> Result<NormEstimate> {
    let (mean, err_pow) = mc_power_mean(f, p, n_samples, seed)?;
    let value = mean.powf(1.0 / p);
    let err = if mean > 0.0 {
        value / (p * mean) * err_pow
    } else {
        err_pow.powf(1.0 / p)
    };
    Ok(NormEstimate {
        value,
        power_mean: mean,
        p,
        method: NormMethod::MonteCarlo,
        error_bound: ErrorBound::Statistical(err),
        samples: Some(n_samples as u64),
        horizon: None,
        lower_bound: false,
    })
}

/// Additive recurrence `frac(0.5 + i alpha)` with `alpha_j = phi_d^{-j}`,
/// `phi_d` the positive root of `x^{d+1} = x + 1`.
fn kronecker_point(i: usize, alphas: &[f64]) -> Vec<f64> {
    alphas.iter().map(|&a| (0.5 + i as f64 * a).fract() * TAU).collect()
}

fn generalized_golden_ratio(d: usize) -> f64 {
    let mut x = 2.0f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

const ASCENT_STARTS: usize = 8;
const ASCENT_ROUNDS: usize = 50;
const ASCENT_SCAN: usize = 16;
const GOLDEN_ITERS: usize = 48;

/// Coordinate-wise maximization of `|F|` over the torus angles.
fn ascend(big_f: &PolytorusPolynomial, start: Vec<f64>) -> (f64, Vec<f64>) {
    let eval = big_f.evaluator();
    let mut powers = Vec::new();
    let mut angles = start;
    let modulus = |angles: &[f64], powers: &mut Vec<Vec<Complex64>>| eval.eval_angles(angles, powers).norm();
    let mut best = modulus(&angles, &mut powers);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..ASCENT_ROUNDS {
        let before = best;
        for j in 0..angles.len() {
            let keep = angles[j];
            let at = |x: f64, angles: &mut Vec<f64>, powers: &mut Vec<Vec<Complex64>>| {
                angles[j] = x;
                modulus(angles, powers)
            };
            // coarse scan on the circle, then golden section around the winner
            let mut center = keep;
            let mut center_val = best;
            for s in 0..ASCENT_SCAN {
                let x = keep + TAU * s as f64 / ASCENT_SCAN as f64;
                let v = at(x, &mut angles, &mut powers);
                if v > center_val {
                    center_val = v;
                    center = x;
                }
            }
            let width = TAU / ASCENT_SCAN as f64;
            let (mut lo, mut hi) = (center - width, center + width);
            let mut x1 = hi - inv_phi * (hi - lo);
            let mut x2 = lo + inv_phi * (hi - lo);
            let mut f1 = at(x1, &mut angles, &mut powers);
            let mut f2 = at(x2, &mut angles, &mut powers);
            for _ in 0..GOLDEN_ITERS {
                if f1 < f2 {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = at(x2, &mut angles, &mut powers);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = at(x1, &mut angles, &mut powers);
                }
            }
            let (gx, gv) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
            if gv > center_val {
                center = gx;
                center_val = gv;
            }
            if center_val > best {
                best = center_val;
                angles[j] = center.rem_euclid(TAU);
            } else {
                angles[j] = keep;
            }
        }
        if best - before <= 1e-15 * best.max(1.0) {
            break;
        }
    }
    (best, angles)
}

/// Lower bound for `||f||_infty = sup_torus |F|` from `n_grid` quasi-random
/// torus points followed by local ascent from the best few.
pub fn hinf_norm_estimate(f: &DirichletPolynomial, n_grid: usize) -> Result<NormEstimate> {
    if n_grid == 0 {
        return Err(Error::Domain("n_grid must be >= 1".into()));
    }
    let big_f = bohr_lift(f)?;
    let d = big_f.dimension();
    let estimate = |value: f64, samples: u64, bound: ErrorBound| NormEstimate {
        value,
        power_mean: value,
        p: f64::INFINITY,
        method: NormMethod::GridAscent,
        error_bound: bound,
        samples: Some(samples),
        horizon: None,
        lower_bound: true,
    };
    if d == 0 {
        let c = big_f.iter().map(|(_, c)| c.norm()).sum::<f64>();
        return Ok(estimate(c, 0, ErrorBound::Rigorous(0.0)));
    }
    let g = generalized_golden_ratio(d);
    let alphas: Vec<f64> = (1..=d).map(|j| g.powi(-(j as i32)).fract()).collect();
    let eval = big_f.evaluator();
    let grid: Vec<(f64, usize)> = (0..n_grid)
        .collect::<Vec<_>>()
        .chunks(1024)
        .flat_map(|chunk| {
            let mut powers = Vec::new();
            chunk
                .iter()
                .map(|&i| (eval.eval_angles(&kronecker_point(i, &alphas), &mut powers).norm(), i))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut ranked = grid;
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let starts: Vec<Vec<f64>> = ranked
        .iter()
        .take(ASCENT_STARTS)
        .map(|&(_, i)| kronecker_point(i, &alphas))
        .collect();
    let grid_best = ranked[0].0;
    let results = par_map(&starts, |s| ascend(&big_f, s.clone()).0);
    let best = results.iter().copied().fold(grid_best, f64::max);
    // the triangle inequality caps the sup
    let cap: f64 = big_f.iter().map(|(_, c)| c.norm()).sum();
    Ok(estimate(
        best.min(cap),
        n_grid as u64,
        ErrorBound::Heuristic((cap - best).max(0.0)),
    ))
}

/// Size of point evaluation at `sigma > 1/2`. For `p = 2` this is the norm of
/// the truncated reproducing kernel `(sum_{n <= N} n^{-2 sigma})^{1/2}`; other
/// `p` return the reference growth curve `(sigma - 1/2)^{-1/p}`.
pub fn point_eval_bound(sigma: f64, p: f64, n: u64) -> Result<f64> {
    if !(sigma > 0.5) {
        return Err(Error::Domain(format!(
            "point evaluation is unbounded for sigma = {sigma} <= 1/2"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("p must be positive (got {p})")));
    }
    if p == 2.0 {
        // summing small terms first
        let s: f64 = (1..=n.max(1)).rev().map(|k| (k as f64).powf(-2.0 * sigma)).sum();
        Ok(s.sqrt())
    } else {
        Ok((sigma - 0.5).powf(-1.0 / p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pairs: &[(u64, f64)]) -> DirichletPolynomial {
        DirichletPolynomial::from_real(pairs).unwrap()
    }

    #[test]
    fn l2_examples() {
        assert!((l2_norm(&poly(&[(1, 1.0), (2, 1.0)])) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(l2_norm(&DirichletPolynomial::default()), 0.0);
        assert_eq!(l2_norm(&poly(&[(2, 3.0)])), 3.0);
    }

    #[test]
    fn even_norm_examples() {
        // f^2 = {1:1, 2:2, 4:1} has energy 6
        let f = poly(&[(1, 1.0), (2, 1.0)]);
        let e = hp_norm_even(&f, 2).unwrap();
        assert!((e.value - 6f64.powf(0.25)).abs() < 1e-14);
        assert_eq!(e.error_bound, ErrorBound::Rigorous(0.0));
        assert_eq!(e.method, NormMethod::ExactEven);
        assert!((hp_norm_even(&f, 1).unwrap().value - l2_norm(&f)).abs() < 1e-15);

        let mono = DirichletPolynomial::from_pairs([(12, Complex64::new(0.6, -0.8))]).unwrap();
        for k in 1..5 {
            assert!((hp_norm_even(&mono, k).unwrap().value - 1.0).abs() < 1e-14);
        }
        assert!(hp_norm_even(&f, 0).is_err());
    }

    #[test]
    fn flow_constant_integrand() {
        let f = poly(&[(2, 3.0)]);
        for p in [1.0, 2.5, 4.0] {
            let e = hp_norm_flow(&f, p, 17.0).unwrap();
            assert!((e.power_mean - 3f64.powf(p)).abs() < 1e-12 * 3f64.powf(p));
            assert!((e.value - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flow_two_terms_closed_form() {
        let f = poly(&[(1, 1.0), (2, 1.0)]);
        for t in [10.0, 100.0, 1000.0] {
            let e = hp_norm_flow(&f, 2.0, t).unwrap();
            // (1/2T) int_{-T}^{T} (2 + 2 cos(t ln 2)) dt = 2 + 2 sin(T ln 2) / (T ln 2)
            let exact = 2.0 + 2.0 * (t * 2f64.ln()).sin() / (t * 2f64.ln());
            assert!((e.power_mean - exact).abs() < 1e-12);
            assert!((e.power_mean - 2.0).abs() <= 4.0 / (t * 2f64.ln()));
            assert!((e.value - 2f64.sqrt()).abs() <= e.error_bound.value());
        }
    }

    #[test]
    fn mc_examples() {
        let mono = DirichletPolynomial::from_pairs([(30, Complex64::new(0.0, 2.0))]).unwrap();
        let e = hp_norm_mc(&mono, 3.0, 1000, 7).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
        assert!(e.error_bound.value() < 1e-10);

        let f = poly(&[(1, 1.0), (2, 1.0)]);
        let e2 = hp_norm_mc(&f, 2.0, 100_000, 11).unwrap();
        assert!((e2.value - 2f64.sqrt()).abs() <= e2.error_bound.value());
        let e4 = hp_norm_mc(&f, 4.0, 100_000, 12).unwrap();
        assert!((e4.value - 6f64.powf(0.25)).abs() <= e4.error_bound.value());
        assert!(hp_norm_mc(&f, 2.0, 1, 0).is_err());
    }

    #[test]
    fn mc_is_seed_deterministic() {
        let f = poly(&[(1, 0.3), (2, -1.0), (3, 0.5), (10, 0.25)]);
        let a = hp_norm_mc(&f, 3.0, 20_000, 99).unwrap();
        let b = hp_norm_mc(&f, 3.0, 20_000, 99).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let c = hp_norm_mc(&f, 3.0, 20_000, 100).unwrap();
        assert_ne!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn hinf_examples() {
        let e = hinf_norm_estimate(&poly(&[(1, 1.0), (2, 1.0)]), 256).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9, "{}", e.value);
        assert!(e.lower_bound);
        let e = hinf_norm_estimate(&poly(&[(1, 1.0), (2, -1.0)]), 256).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9);
        let e = hinf_norm_estimate(&poly(&[(1, 1.0), (2, 1.0), (3, 1.0)]), 256).unwrap();
        assert!((e.value - 3.0).abs() < 1e-9);
        let e = hinf_norm_estimate(&poly(&[(1, -2.5)]), 4).unwrap();
        assert_eq!(e.value, 2.5);
    }

    #[test]
    fn point_eval_examples() {
        assert_eq!(point_eval_bound(0.9, 2.0, 1).unwrap(), 1.0);
        assert!((point_eval_bound(60.0, 2.0, 1000).unwrap() - 1.0).abs() < 1e-15);
        // partial zeta sum: zeta(2) - sum_{n <= N} n^{-2} lies in (1/(N+1), 1/N)
        let n = 1_000_000u64;
        let v = point_eval_bound(1.0, 2.0, n).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(v * v < zeta2 - 1.0 / (n as f64 + 1.0) + 1e-12);
        assert!(v * v > zeta2 - 1.0 / n as f64 - 1e-12);
        assert!((point_eval_bound(0.75, 4.0, 1).unwrap() - 4f64.powf(0.25)).abs() < 1e-15);
        assert!(matches!(point_eval_bound(0.5, 2.0, 10), Err(Error::Domain(_))));
    }
}
