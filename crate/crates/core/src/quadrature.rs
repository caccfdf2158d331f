//! Composite Gauss-Legendre quadrature for vertical-line integrals.
//!
//! Integrands along a vertical line are exponential sums
//! `t -> sum_n c_n exp(-i t ln n)`, entire and band-limited by `ln N`. Panels
//! of fixed width with 8 nodes each integrate them to near machine precision
//! once the width resolves the fastest oscillation. Within a block of panels
//! the phases are advanced by multiplication instead of re-evaluating `cis`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::reduce::blocked_sum;

/// Gauss-Legendre nodes on `[-1, 1]`.
pub const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];

/// Gauss-Legendre weights matching [`GL_NODES`].
pub const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Panels per parallel block; phases are recomputed exactly at each block start.
const PANELS_PER_BLOCK: usize = 64;

/// Largest admissible panel width for an exponential sum with top frequency
/// `ln max_index`, raised to the power `p`.
pub fn panel_width(max_index: u64, p: f64) -> f64 {
    let ln_n = (max_index.max(1) as f64).ln();
    let base = if ln_n > 0.0 {
        (PI / (4.0 * ln_n)).min(0.25)
    } else {
        0.25
    };
    base / (p / 2.0).max(1.0)
}

/// Number of panels of width at most `h_max` covering an interval of length `len`.
pub fn panel_count(len: f64, h_max: f64) -> usize {
    ((len / h_max).ceil() as usize).max(1)
}

/// Plain composite Gauss-Legendre of a complex integrand.
pub fn gauss_legendre<F>(f: F, a: f64, b: f64, n_panels: usize) -> Complex64
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let n_panels = n_panels.max(1);
    let h = (b - a) / n_panels as f64;
    let half = 0.5 * h;
    blocked_sum(n_panels, PANELS_PER_BLOCK, |s, e| {
        let mut acc = Complex64::default();
        for i in s..e {
            let mid = a + (i as f64 + 0.5) * h;
            let mut panel = Complex64::default();
            for k in 0..8 {
                panel += f(mid + half * GL_NODES[k]) * GL_WEIGHTS[k];
            }
            acc += panel * half;
        }
        acc
    })
}

/// Real-valued variant of [`gauss_legendre`].
pub fn gauss_legendre_real<F>(f: F, a: f64, b: f64, n_panels: usize) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    gauss_legendre(|t| Complex64::new(f(t), 0.0), a, b, n_panels).re
}

/// Integral value with a heuristic error from one halving of the panel width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refined {
    pub value: f64,
    pub error: f64,
}

/// An exponential sum `t -> sum_k c_k exp(-i t freq_k)`, typically a
/// Dirichlet polynomial restricted to a vertical line.
#[derive(Clone, Debug)]
pub struct ExpSum {
    coeffs: Vec<Complex64>,
    freqs: Vec<f64>,
}

impl ExpSum {
    pub fn new(coeffs: Vec<Complex64>, freqs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), freqs.len());
        Self { coeffs, freqs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn value(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&self.freqs)
            .map(|(&c, &w)| c * Complex64::cis(-t * w))
            .sum()
    }

    /// `int_a^b |S(t)|^p dt` over `n_panels` equal panels.
    pub fn integrate_power(&self, a: f64, b: f64, p: f64, n_panels: usize) -> f64 {
        let n_panels = n_panels.max(1);
        let h = (b - a) / n_panels as f64;
        let half = 0.5 * h;
        // per-term phase factors at the nodes relative to the panel start, and
        // the per-panel step
        let node_factors: Vec<[Complex64; 8]> = self
            .freqs
            .iter()
            .map(|&w| {
                let mut f = [Complex64::default(); 8];
                for k in 0..8 {
                    f[k] = Complex64::cis(-w * half * (1.0 + GL_NODES[k]));
                }
                f
            })
            .collect();
        let steps: Vec<Complex64> = self.freqs.iter().map(|&w| Complex64::cis(-w * h)).collect();
        let power = |z: Complex64| -> f64 {
            let m2 = z.norm_sqr();
            if p == 2.0 {
                m2
            } else {
                m2.powf(0.5 * p)
            }
        };

        blocked_sum(n_panels, PANELS_PER_BLOCK, |s, e| {
            let t0 = a + s as f64 * h;
            let mut base: Vec<Complex64> = self
                .coeffs
                .iter()
                .zip(&self.freqs)
                .map(|(&c, &w)| c * Complex64::cis(-w * t0))
                .collect();
            let mut acc = 0.0;
            for _ in s..e {
                let mut vals = [Complex64::default(); 8];
                for (j, b) in base.iter_mut().enumerate() {
                    let nf = &node_factors[j];
                    for k in 0..8 {
                        vals[k] += *b * nf[k];
                    }
                    *b *= steps[j];
                }
                let mut panel = 0.0;
                for k in 0..8 {
                    panel += GL_WEIGHTS[k] * power(vals[k]);
                }
                acc += panel * half;
            }
            acc
        })
    }

    /// [`ExpSum::integrate_power`] at `n_panels` and `2 n_panels`; the finer
    /// value is returned with the difference plus a rounding allowance as error.
    pub fn integrate_power_refined(&self, a: f64, b: f64, p: f64, n_panels: usize) -> Refined {
        let coarse = self.integrate_power(a, b, p, n_panels);
        let fine = self.integrate_power(a, b, p, 2 * n_panels);
        Refined {
            value: fine,
            error: (fine - coarse).abs() + self.rounding_allowance(b - a, p, 2 * n_panels),
        }
    }

    /// Floating-point error of [`ExpSum::integrate_power`] over an interval of
    /// length `len`, scaled by `sup |S|^p <= (sum |c_n|)^p`. Counts the term
    /// sum, the phase recurrence within a block and the pairwise panel sum.
    pub fn rounding_allowance(&self, len: f64, p: f64, n_panels: usize) -> f64 {
        let sup: f64 = self.coeffs.iter().map(|c| c.norm()).sum();
        let ops = (self.len() + PANELS_PER_BLOCK) as f64 + (n_panels.max(2) as f64).log2() + 8.0 * p.max(1.0);
        16.0 * f64::EPSILON * ops * len.abs() * sup.powf(p)
    }
}
