//! Poisson kernels on the bidisc and the ring measures `lambda_k`.

use num_complex::Complex64;

use super::fourier::FourierDatum2;
use crate::error::{Error, Result};

/// Grid used to certify that ring densities are non-negative.
pub const DENSITY_CHECK_GRID: usize = 2048;
/// Largest negative value tolerated on that grid.
pub const NEGATIVITY_TOL: f64 = 1e-9;

fn check_radius(r: f64) -> Result<()> {
    if (0.0..1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius must lie in [0, 1) (got {r})")))
    }
}

/// `P_r(tau) = (1 - r^2)^2 / (|1 - r tau_1|^2 |1 - r tau_2|^2)`.
pub fn poisson_kernel2(r: f64, tau: (Complex64, Complex64)) -> Result<f64> {
    check_radius(r)?;
    let a = (Complex64::new(1.0, 0.0) - tau.0 * r).norm_sqr();
    let b = (Complex64::new(1.0, 0.0) - tau.1 * r).norm_sqr();
    let q = 1.0 - r * r;
    Ok(q * q / (a * b))
}

/// `d(tau, tau') = max(|tau_1 - tau'_1|, |tau_2 - tau'_2|)`.
pub fn torus_distance(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> f64 {
    (a.0 - b.0).norm().max((a.1 - b.1).norm())
}

/// The majorant `16 d(tau, (1,1))^{-2}` of `P_r(tau)`.
pub fn poisson_majorant(tau: (Complex64, Complex64)) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    16.0 / torus_distance(tau, (one, one)).powi(2)
}

/// A point `(r_1 e^{i theta_1}, r_2 e^{i theta_2})` of the bidisc in polar form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarPoint {
    pub r1: f64,
    pub theta1: f64,
    pub r2: f64,
    pub theta2: f64,
}

impl PolarPoint {
    pub fn new(r1: f64, theta1: f64, r2: f64, theta2: f64) -> Self {
        Self { r1, theta1, r2, theta2 }
    }

    pub fn z(&self) -> (Complex64, Complex64) {
        (
            Complex64::from_polar(self.r1, self.theta1),
            Complex64::from_polar(self.r2, self.theta2),
        )
    }

    fn check(&self) -> Result<()> {
        check_radius(self.r1)?;
        check_radius(self.r2)
    }
}

/// `sum c(m, n) r_1^{|m|} r_2^{|n|} e^{i(m theta_1 + n theta_2)}`.
pub fn poisson_extend(datum: &FourierDatum2, z: PolarPoint) -> Result<Complex64> {
    z.check()?;
    let (p1, p2) = (
        radial_powers(z.r1, z.theta1, datum.band()),
        radial_powers(z.r2, z.theta2, datum.band()),
    );
    let b = datum.band() as i64;
    let mut acc = Complex64::default();
    let mut scale = 0.0;
    for (m, n, c) in datum.iter() {
        let w = p1[(m + b) as usize] * p2[(n + b) as usize];
        acc += c * w;
        scale += c.norm() * w.norm();
    }
    if datum.is_real() {
        if acc.im.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::Construction(format!(
                "extension of a real datum has imaginary part {:e}",
                acc.im
            )));
        }
        acc.im = 0.0;
    }
    Ok(acc)
}

/// `r^{|m|} e^{i m theta}` for `m` in `-band..=band`.
fn radial_powers(r: f64, theta: f64, band: usize) -> Vec<Complex64> {
    let b = band as i64;
    let step = Complex64::from_polar(r, theta);
    let mut pos = vec![Complex64::new(1.0, 0.0); band + 1];
    for k in 1..=band {
        pos[k] = pos[k - 1] * step;
    }
    (-b..=b)
        .map(|m| {
            if m >= 0 {
                pos[m as usize]
            } else {
                pos[(-m) as usize].conj()
            }
        })
        .collect()
}

/// Poisson extension of `lambda_k` in closed form: with `rho = (r_1 r_2)^k`,
/// `(1 - rho^2) / (1 - 2 rho cos(k phi) + rho^2)`, `phi = theta_1 + theta_2`.
pub fn lambda_extend(k: u64, r1: f64, r2: f64, phi: f64) -> Result<f64> {
    check_radius(r1)?;
    check_radius(r2)?;
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    let rho = (r1 * r2).powf(k as f64);
    let c = (k as f64 * (phi % std::f64::consts::TAU)).cos();
    Ok((1.0 - rho * rho) / (1.0 - 2.0 * rho * c + rho * rho))
}

/// The measure `p lambda_k` for a non-negative trigonometric polynomial `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct RingMeasure {
    k: u64,
    density: FourierDatum2,
}

impl RingMeasure {
    /// Checks that `p` is real and non-negative on the verification grid.
    pub fn new(k: u64, density: FourierDatum2) -> Result<Self> {
        Self::with_check_grid(k, density, DENSITY_CHECK_GRID)
    }

    pub fn with_check_grid(k: u64, density: FourierDatum2, grid: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("k must be >= 1".into()));
        }
        let density = if density.is_real() {
            density
        } else {
            density.into_real()?
        };
        let min = density.grid_min(grid);
        if min < -NEGATIVITY_TOL {
            return Err(Error::Domain(format!("ring density takes the negative value {min:e}")));
        }
        Ok(Self { k, density })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn density(&self) -> &FourierDatum2 {
        &self.density
    }

    /// Total mass `p_hat(0, 0)`.
    pub fn mass(&self) -> f64 {
        self.density.mean().re
    }

    /// `sum_l p_hat(a - k l, b - k l)`.
    pub fn coefficient(&self, a: i64, b: i64) -> Complex64 {
        let k = self.k as i64;
        let band = self.density.band() as i64;
        // l ranges over shifts landing inside the density window
        let lo = ((a - band) as f64 / k as f64)
            .ceil()
            .max(((b - band) as f64 / k as f64).ceil()) as i64;
        let hi = ((a + band) as f64 / k as f64)
            .floor()
            .min(((b + band) as f64 / k as f64).floor()) as i64;
        (lo..=hi).map(|l| self.density.get(a - k * l, b - k * l)).sum()
    }

    /// Poisson extension `P(p lambda_k)(z)`.
    ///
    /// For `k >= deg p` the shifted copies of `p` sort into the two analytic
    /// quadrants and the geometric series in `W = (z_1 z_2)^k` sums in closed
    /// form: `P(p)(z) + 2 Re[Q(z) W / (1 - W)]` with
    /// `Q(z) = sum p_hat(m, n) z_1^m z_2^n`. Otherwise the shifts are summed
    /// directly until the weights drop below roundoff.
    pub fn poisson_extend(&self, z: PolarPoint) -> Result<f64> {
        z.check()?;
        if self.k >= self.density.degree() {
            let base = poisson_extend(&self.density, z)?.re;
            let (z1, z2) = z.z();
            let w = (z1 * z2).powu(self.k as u32);
            let q: Complex64 = self
                .density
                .iter()
                .map(|(m, n, c)| {
                    c * z.r1.powi(m as i32)
                        * z.r2.powi(n as i32)
                        * Complex64::cis(m as f64 * z.theta1 + n as f64 * z.theta2)
                })
                .sum();
            Ok(base + 2.0 * (q * w / (1.0 - w)).re)
        } else {
            let rho = (z.r1 * z.r2).powf(self.k as f64);
            let mut total = poisson_extend(&self.density, z)?.re;
            let mut l = 1i64;
            let k = self.k as i64;
            while rho.powi(l as i32) > 1e-17 && l < 1_000_000 {
                for sign in [1i64, -1] {
                    let shift = sign * k * l;
                    for (m, n, c) in self.density.iter() {
                        let (a, b) = (m + shift, n + shift);
                        let w = z.r1.powi(a.abs() as i32) * z.r2.powi(b.abs() as i32);
                        total += (c * w * Complex64::cis(a as f64 * z.theta1 + b as f64 * z.theta2)).re;
                    }
                }
                l += 1;
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(theta: f64) -> Complex64 {
        Complex64::cis(theta)
    }

    #[test]
    fn kernel_examples() {
        let one = unit(0.0);
        assert!((poisson_kernel2(0.5, (one, one)).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(poisson_kernel2(0.0, (unit(1.0), unit(2.0))).unwrap(), 1.0);
        assert!(poisson_kernel2(1.0, (one, one)).is_err());
        let tau = (unit(0.4), unit(-2.0));
        for r in [0.1, 0.5, 0.9, 0.999] {
            assert!(poisson_kernel2(r, tau).unwrap() <= poisson_majorant(tau));
        }
    }

    #[test]
    fn extension_examples() {
        let c = FourierDatum2::constant(1.0);
        let z = PolarPoint::new(0.7, 1.0, 0.2, -3.0);
        assert_eq!(poisson_extend(&c, z).unwrap(), Complex64::new(1.0, 0.0));
        let rect = super::super::fourier::rectangle_coefficients(0.0, 1.0, 2.0, 4.0, 12);
        let v = poisson_extend(&rect, PolarPoint::new(0.0, 0.3, 0.0, 1.0)).unwrap();
        assert!((v.re - 2.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!(poisson_extend(&c, PolarPoint::new(1.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_extend(3, 0.0, 0.0, 1.0).unwrap(), 1.0);
        assert!((lambda_extend(1, 0.5, 0.5, 0.0).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        let v = lambda_extend(4, 0.9999, 0.9999, PI / 4.0).unwrap();
        assert!(v < 1e-3);
    }

    #[test]
    fn lambda_matches_truncated_series() {
        // lambda_1 truncated to |j| <= J on the anti-diagonal theta_1 + theta_2 = 0
        let r: f64 = 0.8;
        let jmax = 60i64;
        let trunc = FourierDatum2::from_terms((-jmax..=jmax).map(|j| (j, j, Complex64::new(1.0, 0.0))))
            .into_real()
            .unwrap();
        let v = poisson_extend(&trunc, PolarPoint::new(r, 0.7, r, -0.7)).unwrap().re;
        let rho = r * r;
        let partial = 1.0 + 2.0 * rho * (1.0 - rho.powi(jmax as i32)) / (1.0 - rho);
        assert!((v - partial).abs() < 1e-12);
        assert!((v - lambda_extend(1, r, r, 0.0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn ring_closed_form_matches_direct_shift_sum() {
        let p = FourierDatum2::from_terms([
            (0, 0, Complex64::new(1.0, 0.0)),
            (1, -1, Complex64::new(0.25, 0.1)),
            (-1, 1, Complex64::new(0.25, -0.1)),
            (2, 0, Complex64::new(0.1, 0.0)),
            (-2, 0, Complex64::new(0.1, 0.0)),
        ])
        .into_real()
        .unwrap();
        let closed = RingMeasure::with_check_grid(3, p.clone(), 64).unwrap();
        let z = PolarPoint::new(0.9, 0.4, 0.8, 2.2);
        // direct: densify lambda_3 coefficients up to a large window
        let direct: f64 = (-200i64..=200)
            .flat_map(|a| (-200i64..=200).map(move |b| (a, b)))
            .filter(|&(a, b)| (a - b).abs() <= 4)
            .map(|(a, b)| {
                let c = closed.coefficient(a, b);
                (c * z.r1.powi(a.abs() as i32)
                    * z.r2.powi(b.abs() as i32)
                    * Complex64::cis(a as f64 * z.theta1 + b as f64 * z.theta2))
                .re
            })
            .sum();
        assert!((closed.poisson_extend(z).unwrap() - direct).abs() < 1e-10);
        assert_eq!(closed.mass(), 1.0);
        assert_eq!(closed.coefficient(3, 3), Complex64::new(1.0, 0.0));
        assert_eq!(closed.coefficient(4, 2), Complex64::new(0.25, 0.1));
    }

    #[test]
    fn negative_density_rejected() {
        let p = FourierDatum2::from_terms([(1, 0, Complex64::new(1.0, 0.0)), (-1, 0, Complex64::new(1.0, 0.0))]);
        assert!(RingMeasure::with_check_grid(2, p, 64).is_err());
    }
}
