//! Derivative-free maximization over a box of at most two parameters:
//! a coarse grid scan followed by coordinate-wise golden-section refinement
//! around the best grid point.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use serde::Serialize;

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const GOLDEN_MAX_ITERS: usize = 200;

/// Inclusive range of one parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::OutOfRange {
                name: "interval",
                value: hi - lo,
                range: "finite, lo <= hi",
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// `n` evenly spaced points including both ends; the midpoint when `n == 1`.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![0.5 * (self.lo + self.hi)],
            _ => (0..n)
                .map(|i| self.lo + self.width() * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Golden-section rounds over all axes after the grid scan; zero disables refinement.
    pub refine_rounds: usize,
    /// Stop a golden-section search once the bracket is this fraction of the axis width.
    pub rel_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            refine_rounds: 2,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best: Evaluation,
    /// Every evaluation in order: grid points first (row-major), then refinement.
    pub trace: Vec<Evaluation>,
    /// Best value seen during the grid scan alone.
    pub best_grid_value: f64,
}

/// Maximizes `f` over the box `bounds` with `points[i]` grid samples on axis `i`.
///
/// Deterministic for a deterministic `f`; grid evaluations may run in
/// parallel but are recorded in grid order.
pub fn maximize<F>(f: F, bounds: &[Interval], points: &[usize], config: SearchConfig) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if bounds.is_empty() {
        return Err(Error::Empty("parameter set"));
    }
    if bounds.len() > 2 {
        return Err(Error::DimensionMismatch(
            "grid search supports at most two parameters".into(),
        ));
    }
    if points.len() != bounds.len() || points.contains(&0) {
        return Err(Error::DimensionMismatch(
            "one positive grid size per axis is required".into(),
        ));
    }

    let axes: Vec<Vec<f64>> = bounds.iter().zip(points).map(|(b, &n)| b.linspace(n)).collect();
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for axis in &axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }

    let eval = |p: &Vec<f64>| Evaluation {
        value: f(p),
        params: p.clone(),
    };
    #[cfg(feature = "parallel")]
    let mut trace: Vec<Evaluation> = grid.par_iter().map(eval).collect();
    #[cfg(not(feature = "parallel"))]
    let mut trace: Vec<Evaluation> = grid.iter().map(eval).collect();

    let mut best = best_of(&trace).clone();
    let best_grid_value = best.value;

    let spacing: Vec<f64> = bounds
        .iter()
        .zip(points)
        .map(|(b, &n)| {
            if n > 1 {
                b.width() / (n - 1) as f64
            } else {
                0.5 * b.width()
            }
        })
        .collect();

    for _ in 0..config.refine_rounds {
        for axis in 0..bounds.len() {
            let lo = (best.params[axis] - spacing[axis]).max(bounds[axis].lo);
            let hi = (best.params[axis] + spacing[axis]).min(bounds[axis].hi);
            if hi - lo <= 0.0 {
                continue;
            }
            let tol = (config.rel_tol * bounds[axis].width()).max(f64::EPSILON * hi.abs().max(1.0));
            let at = |x: f64| {
                let mut p = best.params.clone();
                p[axis] = x;
                p
            };
            golden_section(
                |x| f(&at(x)),
                lo,
                hi,
                tol,
                |x, v| {
                    trace.push(Evaluation {
                        params: at(x),
                        value: v,
                    })
                },
            );
            let candidate = best_of(&trace);
            if candidate.value > best.value {
                best = candidate.clone();
            }
        }
    }

    Ok(SearchOutcome {
        best,
        trace,
        best_grid_value,
    })
}

/// First evaluation attaining the maximum; NaN values never win.
fn best_of(trace: &[Evaluation]) -> &Evaluation {
    let mut best = &trace[0];
    for e in &trace[1..] {
        if e.value > best.value || best.value.is_nan() {
            best = e;
        }
    }
    best
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`, reporting every
/// evaluation to `record`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, mut record: impl FnMut(f64, f64)) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    record(x1, f1);
    let mut f2 = f(x2);
    record(x2, f2);
    for _ in 0..GOLDEN_MAX_ITERS {
        if hi - lo <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
            record(x1, f1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
            record(x2, f2);
        }
    }
}

/// Golden-section maximum of `f` on `[lo, hi]`, also checking both ends.
pub fn maximize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let mut best = (lo, f(lo));
    let f_hi = f(hi);
    if f_hi > best.1 {
        best = (hi, f_hi);
    }
    golden_section(&f, lo, hi, tol, |x, v| {
        if v > best.1 {
            best = (x, v);
        }
    });
    best
}
