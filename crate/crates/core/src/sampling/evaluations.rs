//! Random evaluation matrices: interval sampling and common scales for
//! criteria measured on heterogeneous units.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSampling {
    #[default]
    Continuous,
    Integer,
}

/// A closed evaluation interval; a point evaluation has `lo == hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(v: f64) -> Result<Self> {
        Interval::new(v, v)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Integer range `⌈lo⌉..=⌊hi⌋`.
    pub fn integer_range(&self) -> Result<(i64, i64)> {
        let a = libm::ceil(self.lo);
        let b = libm::floor(self.hi);
        if a > b {
            return Err(Error::NoIntegerInInterval { lo: self.lo, hi: self.hi });
        }
        Ok((a as i64, b as i64))
    }

    pub fn sample<R: Rng + ?Sized>(&self, mode: EvalSampling, rng: &mut R) -> Result<f64> {
        match mode {
            EvalSampling::Continuous => {
                if self.is_point() {
                    Ok(self.lo)
                } else {
                    let u: f64 = rng.random();
                    Ok(self.lo + u * (self.hi - self.lo))
                }
            }
            EvalSampling::Integer => {
                let (a, b) = self.integer_range()?;
                Ok(rng.random_range(a..=b) as f64)
            }
        }
    }
}

/// Alternatives × criteria matrix of intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalMatrix {
    criteria: usize,
    rows: Vec<Vec<Interval>>,
}

impl IntervalMatrix {
    pub fn new(criteria: usize, rows: Vec<Vec<Interval>>) -> Result<Self> {
        for row in &rows {
            if row.len() != criteria {
                return Err(Error::DimensionMismatch { expected: criteria, got: row.len() });
            }
            for iv in row {
                if iv.lo < 0.0 {
                    return Err(Error::NegativeEvaluation { value: iv.lo });
                }
            }
        }
        Ok(IntervalMatrix { criteria, rows })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let criteria = points.first().map_or(0, Vec::len);
        let rows = points
            .iter()
            .map(|r| r.iter().map(|&v| Interval::point(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        IntervalMatrix::new(criteria, rows)
    }

    pub fn criteria(&self) -> usize {
        self.criteria
    }

    pub fn alternatives(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Interval>] {
        &self.rows
    }

    pub fn is_point(&self) -> bool {
        self.rows.iter().flatten().all(Interval::is_point)
    }

    /// Lower ends, which equal the evaluations when every interval is a point.
    pub fn lower(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.iter().map(|iv| iv.lo).collect()).collect()
    }

    /// Fails early if some interval cannot be sampled in `mode`.
    pub fn check_mode(&self, mode: EvalSampling) -> Result<()> {
        if mode == EvalSampling::Integer {
            for iv in self.rows.iter().flatten() {
                iv.integer_range()?;
            }
        }
        Ok(())
    }
}

/// Draws one point matrix, row by row.
pub fn sample_eval_matrix<R: Rng + ?Sized>(
    intervals: &IntervalMatrix,
    mode: EvalSampling,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    intervals.rows.iter().map(|row| row.iter().map(|iv| iv.sample(mode, rng)).collect()).collect()
}

/// Writes a sampled matrix into `out` (same shape), without allocating.
pub fn sample_eval_matrix_into<R: Rng + ?Sized>(
    intervals: &IntervalMatrix,
    mode: EvalSampling,
    rng: &mut R,
    out: &mut [Vec<f64>],
) -> Result<()> {
    for (row, dst) in intervals.rows.iter().zip(out.iter_mut()) {
        for (iv, slot) in row.iter().zip(dst.iter_mut()) {
            *slot = iv.sample(mode, rng)?;
        }
    }
    Ok(())
}

/// Scale for one criterion: raw levels (ascending) and their values in (0,1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleColumn {
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScaleColumn {
    /// Scale value of a raw level; `None` if the level is unknown.
    pub fn value_of(&self, raw: f64) -> Option<f64> {
        self.levels.iter().position(|&l| l == raw).map(|k| self.values[k])
    }
}

/// One scale column per criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonScale {
    pub columns: Vec<ScaleColumn>,
}

impl CommonScale {
    /// Maps a raw alternatives × criteria matrix onto the scale.
    pub fn apply(&self, raw: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        raw.iter()
            .map(|row| {
                if row.len() != self.columns.len() {
                    return Err(Error::DimensionMismatch { expected: self.columns.len(), got: row.len() });
                }
                row.iter()
                    .zip(&self.columns)
                    .map(|(&v, col)| {
                        col.value_of(v)
                            .ok_or_else(|| Error::InvalidInput(alloc::format!("raw level {v} is not on the scale")))
                    })
                    .collect()
            })
            .collect()
    }
}

/// Distinct raw levels of a column, ascending.
pub fn distinct_levels(column: &[f64]) -> Vec<f64> {
    let mut levels = column.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
}

/// Assigns sorted draws to levels by preference order: the least preferred
/// level gets the smallest draw. `levels` and `sorted_draws` are ascending.
pub fn assign_scale(levels: &[f64], direction: Direction, sorted_draws: &[f64]) -> Result<ScaleColumn> {
    if levels.len() != sorted_draws.len() {
        return Err(Error::DimensionMismatch { expected: levels.len(), got: sorted_draws.len() });
    }
    let mut values = sorted_draws.to_vec();
    if direction == Direction::Minimize {
        values.reverse();
    }
    Ok(ScaleColumn { levels: levels.to_vec(), values })
}

/// `k` distinct uniform draws in `(0,1)`, ascending. Duplicates and exact
/// zeros are redrawn.
pub fn distinct_uniform<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(k);
    while out.len() < k {
        let u: f64 = rng.random();
        if u > 0.0 && !out.contains(&u) {
            out.push(u);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn sample_scale_column<R: Rng + ?Sized>(column: &[f64], direction: Direction, rng: &mut R) -> ScaleColumn {
    let levels = distinct_levels(column);
    let draws = distinct_uniform(levels.len(), rng);
    assign_scale(&levels, direction, &draws).expect("one draw per level")
}

/// Samples a scale for every criterion of a raw alternatives × criteria matrix.
pub fn sample_common_scale<R: Rng + ?Sized>(
    raw: &[Vec<f64>],
    directions: &[Direction],
    rng: &mut R,
) -> Result<CommonScale> {
    let n = directions.len();
    for row in raw {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
    }
    let columns = (0..n)
        .map(|i| {
            let column: Vec<f64> = raw.iter().map(|r| r[i]).collect();
            sample_scale_column(&column, directions[i], rng)
        })
        .collect();
    Ok(CommonScale { columns })
}
