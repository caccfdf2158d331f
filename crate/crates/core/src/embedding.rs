//! Local `L^p` integrals on the critical line against `H^p` norms.
//!
//! Everything here is exploratory: ratios are estimates with error bars, and
//! the search only produces lower bounds for the best constant.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::CoefficientMap;
use crate::dirichlet::{CoefficientRecord, DirichletPolynomial};
use crate::ergodic::integral_mean;
use crate::error::{Error, Result};
use crate::norms::{even_index, hp_norm_even, mc_power_mean, NormMethod};
use crate::quadrature::{panel_count, panel_width};
use crate::reduce::par_map;

/// Monte Carlo sample count for non-even denominators.
pub const DENOMINATOR_SAMPLES: usize = 50_000;
/// Seed of the Monte Carlo denominator, fixed so the ratio is a deterministic
/// function of the coefficients.
pub const DENOMINATOR_SEED: u64 = 0x5eed_0f_d1c;
/// Box constraint on coefficient moduli during the search.
pub const COEFFICIENT_BOX: f64 = 8.0;
/// Largest support accepted by [`embedding_search`].
pub const MAX_SEARCH_LENGTH: u64 = 4096;

/// `int_0^1 |f(1/2 + it)|^p dt` divided by `||f||_p^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub p: f64,
    pub numerator: f64,
    pub numerator_error: f64,
    pub denominator: f64,
    pub denominator_error: f64,
    pub ratio: f64,
    /// Ratio range implied by both error bars.
    pub ratio_low: f64,
    pub ratio_high: f64,
    pub denominator_method: NormMethod,
}

/// [`embedding_ratio_with`] using the default Monte Carlo settings.
pub fn embedding_ratio(f: &DirichletPolynomial, p: f64) -> Result<EmbeddingResult> {
    embedding_ratio_with(f, p, DENOMINATOR_SAMPLES, DENOMINATOR_SEED)
}

pub fn embedding_ratio_with(
    f: &DirichletPolynomial,
    p: f64,
    mc_samples: usize,
    mc_seed: u64,
) -> Result<EmbeddingResult> {
    if f.is_zero() {
        return Err(Error::Domain("embedding ratio of the zero polynomial".into()));
    }
    let num = integral_mean(f, 0.5, 1.0, p)?;
    let (numerator, numerator_error) = (num.value, num.error_bound.value());
    let (denominator, denominator_error, denominator_method) = match even_index(p) {
        Some(k) => (hp_norm_even(f, k)?.power_mean, 0.0, NormMethod::ExactEven),
        None => {
            let (m, e) = mc_power_mean(f, p, mc_samples, mc_seed)?;
            (m, e, NormMethod::MonteCarlo)
        }
    };
    let ratio_low = (numerator - numerator_error).max(0.0) / (denominator + denominator_error);
    let ratio_high = if denominator > denominator_error {
        (numerator + numerator_error) / (denominator - denominator_error)
    } else {
        f64::INFINITY
    };
    Ok(EmbeddingResult {
        p,
        numerator,
        numerator_error,
        denominator,
        denominator_error,
        ratio: numerator / denominator,
        ratio_low,
        ratio_high,
        denominator_method,
    })
}

/// Explicit bound for the `p = 2` ratio over polynomials of length `N`.
///
/// Expanding the square, `int_0^1 |f(1/2+it)|^2 dt` is a quadratic form in
/// `|a_n|` with kernel `min(1, 2 / |ln(m/n)|) / sqrt(mn)`; the Schur test
/// bounds its norm by the largest row sum.
pub fn embedding_constant_bound(n: u64) -> f64 {
    let logs: Vec<f64> = (1..=n).map(|k| (k as f64).ln()).collect();
    logs.iter()
        .map(|&ln_m| {
            logs.iter()
                .map(|&ln_k| (2.0 / (ln_m - ln_k).abs()).min(1.0) * (-0.5 * (ln_m + ln_k)).exp())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// One step of a search trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub step: usize,
    /// Best score seen so far across all restarts processed up to this entry.
    pub best_ratio: f64,
    /// Index into [`SearchTrace::snapshots`] of the polynomial achieving it.
    pub snapshot: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub seed: u64,
    pub strategy: String,
    pub iterations: Vec<TraceEntry>,
    pub snapshots: Vec<Vec<CoefficientRecord>>,
}

impl SearchTrace {
    pub const CSV_HEADER: &'static str = "restart,step,best_ratio,snapshot";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.iterations {
            out.push_str(&format!("{},{},{:e},{}\n", e.restart, e.step, e.best_ratio, e.snapshot));
        }
        out
    }
}

/// Search output; serializes as `{p, N, seed, best_ratio, coefficients, trace}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub p: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
    pub best_ratio: f64,
    pub coefficients: Vec<CoefficientRecord>,
    pub trace: SearchTrace,
}

impl SearchResult {
    pub fn polynomial(&self) -> Result<DirichletPolynomial> {
        records_to_polynomial(&self.coefficients)
    }
}

fn records_to_polynomial(records: &[CoefficientRecord]) -> Result<DirichletPolynomial> {
    DirichletPolynomial::from_pairs(records.iter().map(|r| (r.n, Complex64::new(r.re, r.im))))
}

fn unit_disc(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen::<f64>() * TAU)
}

/// Score used to accept steps: the ratio for even `p`, else the lower end of
/// its confidence range.
fn score(coeffs: &[Complex64], p: f64) -> Result<f64> {
    let f = DirichletPolynomial::from_dense(coeffs)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let r = embedding_ratio(&f, p)?;
    Ok(if even_index(p).is_some() { r.ratio } else { r.ratio_low })
}

struct RestartRun {
    /// Best score after each step, step 0 being the initial draw.
    history: Vec<f64>,
    /// Coefficients whenever the best improved, keyed by step.
    improvements: Vec<(usize, Vec<Complex64>)>,
}

fn run_restart(p: f64, n: usize, n_steps: usize, seed: u64) -> Result<RestartRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs: Vec<Complex64> = (0..n).map(|_| unit_disc(&mut rng)).collect();
    let mut best = score(&coeffs, p)?;
    let mut history = vec![best];
    let mut improvements = vec![(0, coeffs.clone())];
    for step in 1..=n_steps {
        let j = rng.gen_range(0..n);
        let keep = coeffs[j];
        let mut trial = keep + unit_disc(&mut rng) * 0.5;
        if trial.norm() > COEFFICIENT_BOX {
            trial *= COEFFICIENT_BOX / trial.norm();
        }
        coeffs[j] = trial;
        let s = score(&coeffs, p)?;
        if s > best {
            best = s;
            improvements.push((step, coeffs.clone()));
        } else {
            coeffs[j] = keep;
        }
        history.push(best);
    }
    Ok(RestartRun { history, improvements })
}

/// Random restarts plus single-coefficient perturbation ascent over
/// polynomials supported on `1..=N`. Restart `r` uses the stream seeded by
/// `seed ^ r`; the winner is the restart with the largest score, the lower
/// index winning ties.
pub fn embedding_search(p: f64, n: u64, n_restarts: usize, n_steps: usize, seed: u64) -> Result<SearchResult> {
    if n == 0 || n_restarts == 0 {
        return Err(Error::Domain("search needs N >= 1 and at least one restart".into()));
    }
    if n > MAX_SEARCH_LENGTH {
        return Err(Error::Capacity(format!(
            "search length {n} exceeds {MAX_SEARCH_LENGTH}"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("p must be positive (got {p})")));
    }
    let restarts: Vec<usize> = (0..n_restarts).collect();
    let runs = par_map(&restarts, |&r| run_restart(p, n as usize, n_steps, seed ^ r as u64))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let to_records =
        |c: &[Complex64]| -> Result<Vec<CoefficientRecord>> { Ok(DirichletPolynomial::from_dense(c)?.to_records()) };
    let mut snapshots = Vec::new();
    let mut iterations = Vec::new();
    let mut global = f64::NEG_INFINITY;
    for (r, run) in runs.iter().enumerate() {
        let mut next = run.improvements.iter().peekable();
        for (step, &best) in run.history.iter().enumerate() {
            let mut improved_coeffs = None;
            while let Some((s, c)) = next.peek() {
                if *s <= step {
                    improved_coeffs = Some(c);
                    next.next();
                } else {
                    break;
                }
            }
            if best > global {
                global = best;
                let c = improved_coeffs.expect("improvement recorded for every new best");
                snapshots.push(to_records(c)?);
            }
            iterations.push(TraceEntry {
                restart: r,
                step,
                best_ratio: global,
                snapshot: snapshots.len() - 1,
            });
        }
    }
    let coefficients = snapshots.last().cloned().unwrap_or_default();
    Ok(SearchResult {
        p,
        n,
        seed,
        best_ratio: global,
        coefficients,
        trace: SearchTrace {
            seed,
            strategy: "random-restart-coordinate-ascent".into(),
            iterations,
            snapshots,
        },
    })
}

/// `int_0^T |f(it)|^p dt / (N^{p/2 + eps} (T + N^{p/2}))` with its parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MontgomeryReport {
    pub ratio: f64,
    pub numerator: f64,
    /// Heuristic quadrature error of the numerator.
    pub numerator_error: f64,
    #[serde(rename = "N")]
    pub n: u64,
}

/// Ratio in the large-values inequality for `|a_n| <= 1` and `2 <= p <= 4`.
pub fn montgomery_ratio(f: &DirichletPolynomial, p: f64, t: f64, eps: f64) -> Result<MontgomeryReport> {
    if let Some((n, a)) = f.coefficients().iter().find(|(_, a)| a.norm() > 1.0 + 1e-12) {
        return Err(Error::Domain(format!("coefficient a_{n} has modulus {} > 1", a.norm())));
    }
    if !(2.0..=4.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [2, 4] (got {p})")));
    }
    if !(t > 1.0) || !(eps > 0.0) {
        return Err(Error::Domain(format!(
            "need T > 1 and eps > 0 (got T = {t}, eps = {eps})"
        )));
    }
    let n = f.max_index().max(1);
    let line = f.vertical_line(0.0);
    let panels = panel_count(t, panel_width(n, p));
    let r = line.integrate_power_refined(0.0, t, p, panels);
    let nf = n as f64;
    let scale = nf.powf(0.5 * p + eps) * (t + nf.powf(0.5 * p));
    Ok(MontgomeryReport {
        ratio: r.value / scale,
        numerator: r.value,
        numerator_error: r.error,
        n,
    })
}

/// Samples `g(k / (M - 1))`, `k = 0..M`, of a function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    samples: Vec<Complex64>,
}

pub const MIN_SAMPLES: usize = 16;

impl SampledFunction {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::Domain(format!(
                "need at least {MIN_SAMPLES} samples (got {})",
                samples.len()
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(m: usize, g: impl Fn(f64) -> Complex64) -> Result<Self> {
        let h = 1.0 / (m.max(2) - 1) as f64;
        Self::new((0..m).map(|k| g(k as f64 * h)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = 1.0 / (self.samples.len() - 1) as f64;
        (0..self.samples.len()).map(move |k| k as f64 * h)
    }
}

/// Composite Simpson weights on `m` equispaced nodes of `[0, 1]`, closing with
/// the 3/8 rule when the interval count is odd.
pub fn simpson_weights(m: usize) -> Vec<f64> {
    let n = m - 1;
    let h = 1.0 / n as f64;
    let mut w = vec![0.0; m];
    let simpson_end = if n % 2 == 0 { n } else { n - 3 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if simpson_end < n {
        let s = simpson_end;
        for (k, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[s + k] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

fn trapezoid_weights(m: usize) -> Vec<f64> {
    let h = 1.0 / (m - 1) as f64;
    let mut w = vec![h; m];
    w[0] = 0.5 * h;
    w[m - 1] = 0.5 * h;
    w
}

/// `A g = sum_{n <= N} n^{-1/2} g_hat(ln n) n^{-s}` with
/// `g_hat(xi) = int_0^1 g(t) e^{i xi t} dt`, the transform for which `A` is
/// the adjoint of restricting `f` to `1/2 + i[0, 1]`.
pub fn adjoint_a(g: &SampledFunction, n: u64) -> Result<DirichletPolynomial> {
    Ok(adjoint_a_with_error(g, n)?.0)
}

/// [`adjoint_a`] together with `|Simpson - trapezoid|` for each coefficient,
/// a pessimistic size of its quadrature error.
pub fn adjoint_a_with_error(g: &SampledFunction, n: u64) -> Result<(DirichletPolynomial, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Domain("N must be >= 1".into()));
    }
    let w = simpson_weights(g.len());
    let trap = trapezoid_weights(g.len());
    let nodes: Vec<f64> = g.nodes().collect();
    let mut coeffs = CoefficientMap::new();
    let mut errors = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let ln = (k as f64).ln();
        let (mut g_hat, mut g_trap) = (Complex64::default(), Complex64::default());
        for (((&gk, &wk), &tk), &t) in g.samples.iter().zip(&w).zip(&trap).zip(&nodes) {
            let v = gk * Complex64::cis(ln * t);
            g_hat += v * wk;
            g_trap += v * tk;
        }
        let scale = (k as f64).powf(-0.5);
        coeffs.insert(k, g_hat * scale)?;
        errors.push((g_hat - g_trap).norm() * scale);
    }
    Ok((DirichletPolynomial::new(coeffs), errors))
}

/// Both sides of `int_0^1 f(1/2 + it) conj(g(t)) dt = sum_n a_n conj((A g)_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub left: Complex64,
    pub right: Complex64,
    pub difference: f64,
    /// Simpson against trapezoid on the left side; a pessimistic size for the
    /// discretization error shared by both sides.
    pub quadrature_error: f64,
}

pub fn duality_probe(f: &DirichletPolynomial, g: &SampledFunction) -> Result<DualityReport> {
    let values: Vec<Complex64> = g
        .nodes()
        .zip(&g.samples)
        .map(|(t, &gk)| f.evaluate(Complex64::new(0.5, t)) * gk.conj())
        .collect();
    let dot = |w: &[f64]| -> Complex64 { values.iter().zip(w).map(|(&v, &wk)| v * wk).sum() };
    let left = dot(&simpson_weights(g.len()));
    let trap = dot(&trapezoid_weights(g.len()));
    let ag = adjoint_a(g, f.max_index().max(1))?;
    let right: Complex64 = f
        .coefficients()
        .iter()
        .map(|(n, a)| a * ag.coefficients().get(n).conj())
        .sum();
    Ok(DualityReport {
        left,
        right,
        difference: (left - right).norm(),
        quadrature_error: (left - trap).norm(),
    })
}
