//! End-to-end runs of the two bidisc constructions: a function of tiny `H^2`
//! norm whose modulus stays near 1 along a segment of the boundary curve, and
//! one whose finite vertical-line means oscillate.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cover::{curve_angles, curve_cells, neighbourhood_cover, strip_cover, DyadicSquare, DyadicSquareSet};
use super::rudin::{
    curve_point, exp_series, h2_norm_bidisc, pluriharmonic_complete, ring_orders, LscDecomposition, RudinFunction,
    TraceSample,
};
use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;

/// Trace level regarded as "near 1".
pub const TRACE_THRESHOLD: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1IIParams {
    pub eps: f64,
    pub t_max: f64,
    /// Number of pieces `J`.
    pub pieces: usize,
    /// Fejer order `M` of the smoothed indicators.
    pub order: usize,
    /// Total-degree bound `D` of the Taylor truncation.
    pub degree: usize,
    pub k_init: f64,
    pub max_doublings: u32,
    pub delta: f64,
    /// Coarsest level tried by the strip cover.
    pub start_level: u32,
    pub trace_samples: usize,
    pub boundary_grid: usize,
    pub interior_grid: usize,
    pub interior_radii: Vec<f64>,
    pub check_grid: usize,
}

impl Default for Theorem1IIParams {
    fn default() -> Self {
        Self {
            eps: 0.1,
            t_max: 10.0,
            pieces: 12,
            order: 256,
            degree: 64,
            k_init: 1.0,
            max_doublings: 20,
            delta: 1e-4,
            start_level: 0,
            trace_samples: 4000,
            boundary_grid: 1024,
            interior_grid: 1024,
            interior_radii: vec![0.5, 0.9, 0.99, 1.0 - 1e-4],
            check_grid: 2048,
        }
    }
}

/// One value of the exponent `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KStep {
    pub k: f64,
    /// `(int exp(2K(b - 1)) dm_2)^{1/2}`.
    pub h2_boundary: f64,
    /// Coefficient norm of the degree-`D` Taylor truncation, a lower bound.
    pub h2_taylor: f64,
    pub taylor_tail: f64,
    pub interior_sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub samples: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub threshold: f64,
    pub fraction_above: f64,
}

impl TraceStats {
    pub fn from_samples(trace: &[TraceSample], threshold: f64) -> Self {
        let m: Vec<f64> = trace.iter().map(|s| s.modulus).collect();
        let above = m.iter().filter(|&&v| v >= threshold).count();
        Self {
            samples: m.len(),
            mean: pairwise_sum(&m) / m.len().max(1) as f64,
            min: m.iter().copied().fold(f64::INFINITY, f64::min),
            max: m.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            threshold,
            fraction_above: above as f64 / m.len().max(1) as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusMax {
    pub r: f64,
    pub re_h_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1IIReport {
    pub params: Theorem1IIParams,
    pub cover_level: u32,
    pub cover_squares: usize,
    pub cover_area: f64,
    pub masses: Vec<f64>,
    pub ring_orders: Vec<u64>,
    pub density_minima: Vec<f64>,
    pub l1_error: f64,
    /// Nonzero Taylor coefficients of `H` up to degree `D`.
    pub taylor_terms: usize,
    pub re_h_max: Vec<RadiusMax>,
    pub steps: Vec<KStep>,
    pub converged: bool,
    pub k: f64,
    pub h2_norm: f64,
    pub h2_taylor: f64,
    pub taylor_tail: f64,
    pub interior_sup: f64,
    pub trace_stats: TraceStats,
    pub trace: Vec<TraceSample>,
}

fn check_common(eps: f64, order: usize, pieces: usize, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1) (got {eps})")));
    }
    if order == 0 || pieces == 0 {
        return Err(Error::Domain("order and number of pieces must be positive".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1) (got {delta})")));
    }
    Ok(())
}

fn build(dec: LscDecomposition, check_grid: usize) -> Result<(RudinFunction, Vec<f64>)> {
    let minima = dec.verify_nonnegative(check_grid.max(2 * dec.order + 1))?;
    let degrees: Vec<u64> = dec
        .pieces
        .iter()
        .map(|p| if p.squares.is_empty() { 0 } else { 2 * dec.order as u64 })
        .collect();
    let ks = ring_orders(&degrees);
    Ok((RudinFunction::new(dec, ks)?, minima))
}

/// Strip cover, decomposition, ring completion, then `G = exp(K (H - 1))`
/// with `K` doubled until the boundary `H^2` norm is at most `eps`.
///
/// `H^2` norms come from the boundary modulus `exp(K(b - 1))`; the Taylor
/// truncation at degree `D` is reported alongside as a lower bound. Traces
/// and interior suprema use the closed form of `H`.
pub fn theorem1_ii_demo(params: &Theorem1IIParams) -> Result<Theorem1IIReport> {
    let p = params;
    check_common(p.eps, p.order, p.pieces, p.delta)?;
    if !(p.t_max >= 0.0) || !(p.k_init > 0.0) || p.trace_samples == 0 {
        return Err(Error::Domain("need t_max >= 0, K_init > 0 and trace samples".into()));
    }
    let cover = strip_cover(p.eps, p.t_max, p.start_level)?;
    let cover_level = cover.squares().first().map_or(p.start_level, |s| s.level);
    let dec = LscDecomposition::new(&cover, p.eps, p.pieces, p.order)?;
    let masses: Vec<f64> = (1..=dec.len()).map(|j| dec.mass(j)).collect();
    let l1_error = dec.l1_error(p.boundary_grid);
    let (f, density_minima) = build(dec, p.check_grid)?;

    let h = pluriharmonic_complete(&f.truncated_datum(p.degree)?)?.truncate(p.degree);
    let taylor_terms = h.iter().count();

    let re_h_max: Vec<RadiusMax> = p
        .interior_radii
        .iter()
        .map(|&r| RadiusMax {
            r,
            re_h_max: f
                .re_h_grid(r, p.interior_grid)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();
    let h_max = re_h_max.iter().map(|m| m.re_h_max).fold(f64::NEG_INFINITY, f64::max);
    let boundary = f.boundary_grid(p.boundary_grid);

    let mut steps = Vec::new();
    let mut k = p.k_init;
    let mut converged = false;
    for _ in 0..=p.max_doublings {
        let g = exp_series(&h, k, p.degree)?;
        let step = KStep {
            k,
            h2_boundary: f.h2_boundary(k, &boundary),
            h2_taylor: h2_norm_bidisc(&g.g),
            taylor_tail: g.tail_estimate,
            interior_sup: (k * (h_max - 1.0)).exp(),
        };
        converged = step.h2_boundary <= p.eps;
        steps.push(step);
        if converged {
            break;
        }
        k *= 2.0;
    }
    let last = steps.last().expect("at least one step").clone();
    let trace = f.trace(last.k, 0.0, p.t_max, p.trace_samples, p.delta);
    Ok(Theorem1IIReport {
        params: p.clone(),
        cover_level,
        cover_squares: cover.len(),
        cover_area: cover.normalized_area(),
        masses,
        ring_orders: f.ring_orders().to_vec(),
        density_minima,
        l1_error,
        taylor_terms,
        re_h_max,
        steps,
        converged,
        k: last.k,
        h2_norm: last.h2_boundary,
        h2_taylor: last.h2_taylor,
        taylor_tail: last.taylor_tail,
        interior_sup: last.interior_sup,
        trace_stats: TraceStats::from_samples(&trace, TRACE_THRESHOLD),
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1IParams {
    pub eps: f64,
    pub stages: usize,
    /// `t_1`; later stage times are found by scanning.
    pub first_time: f64,
    /// Coarsest level tried for each stage set.
    pub first_level: u32,
    pub max_level: u32,
    pub order: usize,
    pub pieces: usize,
    pub k: f64,
    pub delta: f64,
    /// Spacing of candidate stage times.
    pub scan_step: f64,
    /// Largest stage time tried.
    pub t_limit: f64,
    /// Midpoint spacing for occupancy and vertical-line means.
    pub sample_step: f64,
    pub boundary_grid: usize,
    pub check_grid: usize,
    /// Further radii `1 - delta` at which the stage means are repeated.
    pub delta_sweep: Vec<f64>,
}

impl Default for Theorem1IParams {
    fn default() -> Self {
        Self {
            eps: 0.2,
            stages: 2,
            first_time: 1.0,
            first_level: 4,
            max_level: 10,
            order: 64,
            pieces: 4,
            k: 0.75,
            delta: 1e-4,
            scan_step: 0.5,
            t_limit: 200.0,
            sample_step: 1e-3,
            boundary_grid: 512,
            check_grid: 1024,
            delta_sweep: vec![1e-5, 1e-6, 1e-7],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub index: usize,
    /// Odd stages carry the target value 1, even stages are only kept clear.
    pub raised: bool,
    pub t: f64,
    pub level: u32,
    pub squares: usize,
    pub area: f64,
    /// Fraction of `[0, t]` spent by the curve inside this stage set.
    pub occupancy: f64,
    /// `(1/t) int_0^t |g(iu)|^2 du`.
    pub mean: f64,
}

/// Stage means recomputed at another radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaMeans {
    pub delta: f64,
    pub means: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1IReport {
    pub params: Theorem1IParams,
    pub stages: Vec<Stage>,
    pub masses: Vec<f64>,
    pub ring_orders: Vec<u64>,
    pub density_minima: Vec<f64>,
    pub total_area: f64,
    pub raised_area: f64,
    pub min_distance: f64,
    pub h2_norm: f64,
    pub oscillation: f64,
    pub delta_sweep: Vec<DeltaMeans>,
    pub trace: Vec<TraceSample>,
}

fn midpoints(t: f64, step: f64) -> Vec<f64> {
    let n = (t / step).ceil().max(1.0) as usize;
    let h = t / n as f64;
    (0..n).map(|i| (i as f64 + 0.5) * h).collect()
}

/// Fraction of midpoint samples on `[0, t]` whose curve point lies in `set`.
fn occupancy_fraction(set: &DyadicSquareSet, t: f64, step: f64) -> f64 {
    let index = set.index();
    let ts = midpoints(t, step);
    let hits = ts
        .par_iter()
        .filter(|&&u| {
            let (x, y) = curve_angles(u);
            index.contains(x, y)
        })
        .count();
    hits as f64 / ts.len() as f64
}

/// Cells of `level` touching the closure of some square of `taken`.
fn blocked_cells(level: u32, taken: &[DyadicSquareSet]) -> BTreeSet<(u32, u32)> {
    let n = 1i64 << level;
    let mut out = BTreeSet::new();
    for set in taken {
        for sq in set.squares() {
            // children (or the ancestor) of sq at this level, dilated by one cell
            let (lo_i, hi_i, lo_j, hi_j) = if sq.level <= level {
                let f = 1i64 << (level - sq.level);
                (
                    sq.i as i64 * f,
                    (sq.i as i64 + 1) * f - 1,
                    sq.j as i64 * f,
                    (sq.j as i64 + 1) * f - 1,
                )
            } else {
                let f = 1i64 << (sq.level - level);
                let (i, j) = (sq.i as i64 / f, sq.j as i64 / f);
                (i, i, j, j)
            };
            for i in lo_i - 1..=hi_i + 1 {
                for j in lo_j - 1..=hi_j + 1 {
                    out.insert((i.rem_euclid(n) as u32, j.rem_euclid(n) as u32));
                }
            }
        }
    }
    out
}

/// Time in `[0, t]` that the curve spends in blocked cells, from midpoint samples.
fn blocked_time_prefix(level: u32, blocked: &BTreeSet<(u32, u32)>, t_limit: f64, step: f64) -> Vec<f64> {
    let ts = midpoints(t_limit, step);
    let h = t_limit / ts.len() as f64;
    let flags: Vec<bool> = ts
        .par_iter()
        .map(|&u| {
            let (x, y) = curve_angles(u);
            let sq = DyadicSquare::containing(level, x, y);
            blocked.contains(&(sq.i, sq.j))
        })
        .collect();
    let mut prefix = Vec::with_capacity(flags.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for f in flags {
        acc += if f { h } else { 0.0 };
        prefix.push(acc);
    }
    prefix
}

/// Stage `n >= 2`: the earliest scanned `t >= n` at which the curve cells of
/// `[0, t]` away from earlier stages hold more than `(1 - eps/2) t` of the
/// time, at the coarsest level keeping this parity's area below `eps/2`.
fn next_stage(
    p: &Theorem1IParams,
    index: usize,
    t_prev: f64,
    taken: &[DyadicSquareSet],
    family_area: f64,
) -> Result<(f64, DyadicSquareSet)> {
    let t_start = (index as f64).max(t_prev + p.scan_step);
    for level in p.first_level..=p.max_level {
        let blocked = blocked_cells(level, taken);
        let prefix = blocked_time_prefix(level, &blocked, p.t_limit, p.sample_step);
        let h = p.t_limit / (prefix.len() - 1) as f64;
        let mut t = t_start;
        while t <= p.t_limit {
            let idx = ((t / h).round() as usize).min(prefix.len() - 1);
            if prefix[idx] < 0.5 * p.eps * t {
                let cells = curve_cells(level, 0.0, t)?;
                let set = DyadicSquareSet::new(
                    cells
                        .into_iter()
                        .filter(|c| !blocked.contains(c))
                        .map(|(i, j)| DyadicSquare { level, i, j }),
                )?;
                if family_area + set.normalized_area() < 0.5 * p.eps {
                    return Ok((t, set));
                }
                break;
            }
            t += p.scan_step;
        }
    }
    Err(Error::Construction(format!(
        "stage {index}: no level up to {} reaches occupancy {} within t <= {}",
        p.max_level,
        1.0 - 0.5 * p.eps,
        p.t_limit
    )))
}

/// Alternating stage sets along the curve with target `chi_U + (eps/2) chi_{U^c}`,
/// `U` the union of the odd stages; reports the means `(1/t_n) int_0^{t_n} |g|^2`.
pub fn theorem1_i_demo(params: &Theorem1IParams) -> Result<Theorem1IReport> {
    let p = params;
    check_common(p.eps, p.order, p.pieces, p.delta)?;
    if p.stages < 2 {
        return Err(Error::Domain(format!("need at least 2 stages (got {})", p.stages)));
    }
    if !(p.first_time > 0.0) || !(p.scan_step > 0.0) || !(p.sample_step > 0.0) || !(p.k > 0.0) {
        return Err(Error::Domain("times, steps and K must be positive".into()));
    }

    let mut first = None;
    for level in p.first_level..=p.max_level {
        let set = neighbourhood_cover(level, p.first_time)?;
        if set.normalized_area() < 0.5 * p.eps {
            first = Some(set);
            break;
        }
    }
    let first = first.ok_or_else(|| Error::Construction("no level gives a small enough first stage".into()))?;
    let mut sets = vec![first];
    let mut times = vec![p.first_time];
    let mut family_area = [sets[0].normalized_area(), 0.0];
    for index in 2..=p.stages {
        let parity = (index + 1) % 2;
        let (t, set) = next_stage(p, index, times[index - 2], &sets, family_area[parity])?;
        family_area[parity] += set.normalized_area();
        sets.push(set);
        times.push(t);
    }

    let mut raised = DyadicSquareSet::default();
    for set in sets.iter().step_by(2) {
        raised = raised.union(set)?;
    }
    let dec = LscDecomposition::new(&raised, p.eps, p.pieces, p.order)?;
    let masses: Vec<f64> = (1..=dec.len()).map(|j| dec.mass(j)).collect();
    let (f, density_minima) = build(dec, p.check_grid)?;

    let t_last = *times.last().expect("stages");
    let ts = midpoints(t_last, p.sample_step);
    let h = t_last / ts.len() as f64;
    let squared = |delta: f64| -> Vec<f64> {
        ts.par_iter()
            .map(|&t| {
                let (z1, z2) = curve_point(0.0, t, delta);
                (2.0 * p.k * (f.evaluate(z1, z2).re - 1.0)).exp()
            })
            .collect()
    };
    let mean_to = |sq: &[f64], t: f64| -> f64 {
        let n = ((t / h).round() as usize).clamp(1, sq.len());
        pairwise_sum(&sq[..n]) / n as f64
    };
    let sq = squared(p.delta);

    let stages: Vec<Stage> = sets
        .iter()
        .zip(&times)
        .enumerate()
        .map(|(i, (set, &t))| Stage {
            index: i + 1,
            raised: i % 2 == 0,
            t,
            level: set.squares().first().map_or(0, |s| s.level),
            squares: set.len(),
            area: set.normalized_area(),
            occupancy: occupancy_fraction(set, t, p.sample_step),
            mean: mean_to(&sq, t),
        })
        .collect();
    let mut min_distance = f64::INFINITY;
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            min_distance = min_distance.min(sets[a].distance(&sets[b]));
        }
    }
    let trace_every = (sq.len() / 4000).max(1);
    let trace = ts
        .iter()
        .zip(&sq)
        .step_by(trace_every)
        .map(|(&t, &v)| TraceSample { t, modulus: v.sqrt() })
        .collect();
    let delta_sweep = p
        .delta_sweep
        .iter()
        .map(|&delta| {
            let sq = squared(delta);
            DeltaMeans {
                delta,
                means: times.iter().map(|&t| mean_to(&sq, t)).collect(),
            }
        })
        .collect();
    let boundary = f.boundary_grid(p.boundary_grid);
    let means: Vec<f64> = stages.iter().map(|s| s.mean).collect();
    let oscillation = means.windows(2).map(|w| (w[0] - w[1]).abs()).fold(0.0, f64::max);
    Ok(Theorem1IReport {
        params: p.clone(),
        masses,
        ring_orders: f.ring_orders().to_vec(),
        density_minima,
        total_area: sets.iter().map(DyadicSquareSet::normalized_area).sum(),
        raised_area: raised.normalized_area(),
        min_distance,
        h2_norm: f.h2_boundary(p.k, &boundary),
        oscillation,
        delta_sweep,
        trace,
        stages,
    })
}

/// `t,modulus` rows.
pub fn trace_csv(trace: &[TraceSample]) -> String {
    let mut out = String::from("t,modulus\n");
    for s in trace {
        out.push_str(&format!("{:e},{:e}\n", s.t, s.modulus));
    }
    out
}
