//! Dyadic squares in `[0, 2 pi)^2` and covers of the boundary curve
//! `t -> (2^{-it}, 3^{-it})`.

use std::collections::{BTreeSet, HashSet};
use std::f64::consts::{LN_2, TAU};

use serde::{Deserialize, Serialize};

use super::fourier::{angle_distance, interval_coefficients};
use crate::error::{Error, Result};

/// Angles of `(2^{-it}, 3^{-it})` in `[0, 2 pi)`.
pub fn curve_angles(t: f64) -> (f64, f64) {
    ((-t * LN_2).rem_euclid(TAU), (-t * 3f64.ln()).rem_euclid(TAU))
}

/// Speed of the curve in angle space, `|(ln 2, ln 3)|`.
pub fn curve_speed() -> f64 {
    LN_2.hypot(3f64.ln())
}

/// `[2 pi i / 2^level, 2 pi (i+1) / 2^level) x [same for j]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub level: u32,
    pub i: u32,
    pub j: u32,
}

impl DyadicSquare {
    pub fn side(&self) -> f64 {
        TAU / (1u64 << self.level) as f64
    }

    pub fn x_range(&self) -> (f64, f64) {
        let s = self.side();
        (self.i as f64 * s, (self.i + 1) as f64 * s)
    }

    pub fn y_range(&self) -> (f64, f64) {
        let s = self.side();
        (self.j as f64 * s, (self.j + 1) as f64 * s)
    }

    /// `m_2` of the square.
    pub fn normalized_area(&self) -> f64 {
        0.25f64.powi(self.level as i32)
    }

    pub fn parent(&self) -> Option<DyadicSquare> {
        (self.level > 0).then(|| DyadicSquare {
            level: self.level - 1,
            i: self.i / 2,
            j: self.j / 2,
        })
    }

    /// Cell of the given level containing the point.
    pub fn containing(level: u32, x: f64, y: f64) -> DyadicSquare {
        let n = 1u64 << level;
        let cell = |v: f64| ((v.rem_euclid(TAU) / TAU * n as f64) as u64).min(n - 1) as u32;
        DyadicSquare {
            level,
            i: cell(x),
            j: cell(y),
        }
    }

    /// Fourier coefficients of the indicator along each axis, `|m| <= order`.
    pub fn axis_coefficients(&self, order: usize) -> (Vec<num_complex::Complex64>, Vec<num_complex::Complex64>) {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        (
            interval_coefficients(x0, x1, order),
            interval_coefficients(y0, y1, order),
        )
    }

    /// Distance between closures in the max-of-circular-gaps metric.
    pub fn distance(&self, other: &DyadicSquare) -> f64 {
        let gap = |a: (f64, f64), b: (f64, f64)| -> f64 {
            let (la, lb) = (a.1 - a.0, b.1 - b.0);
            let ca = 0.5 * (a.0 + a.1);
            let cb = 0.5 * (b.0 + b.1);
            (angle_distance(ca, cb) - 0.5 * (la + lb)).max(0.0)
        };
        gap(self.x_range(), other.x_range()).max(gap(self.y_range(), other.y_range()))
    }
}

/// A finite union of pairwise disjoint dyadic squares.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DyadicSquareSet {
    squares: Vec<DyadicSquare>,
}

impl DyadicSquareSet {
    pub fn new(squares: impl IntoIterator<Item = DyadicSquare>) -> Result<Self> {
        let set: BTreeSet<DyadicSquare> = squares.into_iter().collect();
        for sq in &set {
            if sq.level > 30 || sq.i >= 1 << sq.level || sq.j >= 1 << sq.level {
                return Err(Error::Domain(format!("invalid dyadic square {sq:?}")));
            }
            let mut p = sq.parent();
            while let Some(a) = p {
                if set.contains(&a) {
                    return Err(Error::Domain(format!("squares {sq:?} and {a:?} overlap")));
                }
                p = a.parent();
            }
        }
        Ok(Self {
            squares: set.into_iter().collect(),
        })
    }

    pub fn squares(&self) -> &[DyadicSquare] {
        &self.squares
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    /// Total area `sum 4 pi^2 4^{-level}`.
    pub fn area(&self) -> f64 {
        TAU * TAU * self.normalized_area()
    }

    /// `m_2` of the union.
    pub fn normalized_area(&self) -> f64 {
        self.squares.iter().map(DyadicSquare::normalized_area).sum()
    }

    pub fn index(&self) -> SquareIndex {
        let mut levels: Vec<(u32, HashSet<(u32, u32)>)> = Vec::new();
        for sq in &self.squares {
            match levels.iter_mut().find(|(l, _)| *l == sq.level) {
                Some((_, set)) => {
                    set.insert((sq.i, sq.j));
                }
                None => levels.push((sq.level, HashSet::from([(sq.i, sq.j)]))),
            }
        }
        SquareIndex { levels }
    }

    /// Smallest distance between the closures of the two unions.
    pub fn distance(&self, other: &DyadicSquareSet) -> f64 {
        self.squares
            .iter()
            .flat_map(|a| other.squares.iter().map(move |b| a.distance(b)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Union of two sets; fails if they overlap.
    pub fn union(&self, other: &DyadicSquareSet) -> Result<DyadicSquareSet> {
        Self::new(self.squares.iter().chain(&other.squares).copied())
    }
}

/// Point-membership lookup for a [`DyadicSquareSet`].
#[derive(Clone, Debug)]
pub struct SquareIndex {
    levels: Vec<(u32, HashSet<(u32, u32)>)>,
}

impl SquareIndex {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.levels.iter().any(|(l, set)| {
            let c = DyadicSquare::containing(*l, x, y);
            set.contains(&(c.i, c.j))
        })
    }
}

/// Fraction of `t in [0, t_max]` with the curve point inside the set,
/// sampled at midpoints with spacing `dt`.
pub fn occupancy(index: &SquareIndex, t_max: f64, dt: f64) -> f64 {
    let n = ((t_max / dt).ceil() as usize).max(1);
    let h = t_max / n as f64;
    let hits = (0..n)
        .filter(|&i| {
            let (x, y) = curve_angles((i as f64 + 0.5) * h);
            index.contains(x, y)
        })
        .count();
    hits as f64 / n as f64
}

/// Largest number of cell crossings [`curve_cells`] will walk.
pub const MAX_CELL_CROSSINGS: f64 = 5e7;

/// Cells of the given level met by the curve on `[t0, t1]`, found by walking
/// the grid crossings of the line exactly.
pub fn curve_cells(level: u32, t0: f64, t1: f64) -> Result<BTreeSet<(u32, u32)>> {
    let side = TAU / (1u64 << level) as f64;
    let n = 1i64 << level;
    let (w1, w2) = (LN_2, 3f64.ln());
    let crossings = (t1 - t0) * (w1 + w2) / side;
    if crossings > MAX_CELL_CROSSINGS {
        return Err(Error::Budget(format!(
            "walking {crossings:.3e} cell crossings at level {level} exceeds the budget"
        )));
    }
    // unwrapped coordinates decrease: x(t) = -t w1, y(t) = -t w2
    let x0 = -t0 * w1;
    let y0 = -t0 * w2;
    let mut ix = (x0 / side).floor() as i64;
    let mut iy = (y0 / side).floor() as i64;
    let mut tx = t0 + (x0 - ix as f64 * side) / w1;
    let mut ty = t0 + (y0 - iy as f64 * side) / w2;
    let (dtx, dty) = (side / w1, side / w2);
    let mut cells = BTreeSet::new();
    loop {
        cells.insert((ix.rem_euclid(n) as u32, iy.rem_euclid(n) as u32));
        let next = tx.min(ty);
        if next >= t1 {
            break;
        }
        if tx <= ty {
            ix -= 1;
            tx += dtx;
        } else {
            iy -= 1;
            ty += dty;
        }
    }
    Ok(cells)
}

/// Number of curve points checked by [`strip_cover`].
pub const COVER_CHECK_SAMPLES: usize = 10_000;

/// Finest level whose squares still contain every ball `B(phi(t), eps/100)`
/// when taken with their 8 neighbours.
pub fn strip_max_level(eps: f64) -> u32 {
    (TAU / (eps / 100.0)).log2().floor().max(0.0) as u32
}

/// Cover of the curve segment `t in [0, t_max]` by the squares of one level
/// met by the curve together with their 8 neighbours.
pub fn neighbourhood_cover(level: u32, t_max: f64) -> Result<DyadicSquareSet> {
    let n = 1i64 << level;
    let mut squares = BTreeSet::new();
    for (i, j) in curve_cells(level, 0.0, t_max)? {
        for di in -1..=1 {
            for dj in -1..=1 {
                squares.insert(DyadicSquare {
                    level,
                    i: (i as i64 + di).rem_euclid(n) as u32,
                    j: (j as i64 + dj).rem_euclid(n) as u32,
                });
            }
        }
    }
    DyadicSquareSet::new(squares)
}

/// Dyadic cover of `{phi(it) : 0 <= t <= t_max}` containing the balls of
/// radius `eps / (100 (1 + t)^2)` around it, with `m_2 <= eps / 2`.
///
/// Each curve point is at distance at least one side from the complement, so
/// the side must be at least `eps / 100`; the level is raised from `level`
/// until the area budget holds.
pub fn strip_cover(eps: f64, t_max: f64, level: u32) -> Result<DyadicSquareSet> {
    if !(eps > 0.0) || !(t_max >= 0.0) {
        return Err(Error::Domain(format!(
            "need eps > 0 and t_max >= 0 (got {eps}, {t_max})"
        )));
    }
    let max_level = strip_max_level(eps);
    if level > max_level {
        return Err(Error::Precondition(format!(
            "level {level} squares are narrower than the ball radius eps/100; use level <= {max_level}"
        )));
    }
    for lev in level..=max_level.min(24) {
        let cover = neighbourhood_cover(lev, t_max)?;
        if cover.normalized_area() <= 0.5 * eps {
            verify_cover(&cover, t_max)?;
            return Ok(cover);
        }
    }
    Err(Error::Capacity(format!(
        "no level up to {max_level} covers t in [0, {t_max}] within area eps/2 = {}",
        0.5 * eps
    )))
}

fn verify_cover(cover: &DyadicSquareSet, t_max: f64) -> Result<()> {
    let index = cover.index();
    for k in 0..COVER_CHECK_SAMPLES {
        let t = t_max * k as f64 / (COVER_CHECK_SAMPLES - 1) as f64;
        let (x, y) = curve_angles(t);
        if !index.contains(x, y) {
            return Err(Error::Construction(format!("curve point at t = {t} is not covered")));
        }
    }
    Ok(())
}
