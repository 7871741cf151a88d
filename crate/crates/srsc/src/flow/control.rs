//! Piecewise-constant controls.

use crate::{Error, Result};

/// A piecewise-constant control `(v1, v2)` on `[0, s]`.
///
/// Values are constant on the cells of a strictly increasing breakpoint
/// partition `breaks[0] = 0 < ... < breaks[k] = s`. Uniform partitions are
/// the normal case (and what the discretized quadratic forms use); general
/// breakpoints exist so that the reparametrization map and its inverse are
/// *exact* on piecewise-constant data — their time changes move breakpoints
/// off the uniform grid.
#[derive(Debug, Clone)]
pub struct Control {
    /// Horizon `s > 0`.
    pub s: f64,
    /// Cell boundaries, length `cells + 1`, from `0` to `s`.
    pub breaks: Vec<f64>,
    /// Per-cell `v1` values.
    pub v1: Vec<f64>,
    /// Per-cell `v2` values.
    pub v2: Vec<f64>,
}

impl Control {
    /// Build a control on `cells` uniform cells.
    pub fn uniform(s: f64, v1: Vec<f64>, v2: Vec<f64>) -> Result<Control> {
        let n = v1.len();
        if n == 0 || v2.len() != n {
            return Err(Error::Grid(format!(
                "v1 ({}) and v2 ({}) must have equal positive length",
                v1.len(),
                v2.len()
            )));
        }
        let breaks = (0..=n).map(|j| s * j as f64 / n as f64).collect();
        Control { s, breaks, v1, v2 }.validated()
    }

    /// The zero control on `cells` uniform cells.
    pub fn zero(s: f64, cells: usize) -> Control {
        Control::uniform(s, vec![0.0; cells], vec![0.0; cells]).expect("valid by construction")
    }

    /// Build from an explicit breakpoint partition.
    pub fn with_breaks(s: f64, breaks: Vec<f64>, v1: Vec<f64>, v2: Vec<f64>) -> Result<Control> {
        Control { s, breaks, v1, v2 }.validated()
    }

    /// Re-check the structural invariants (for values mutated in place).
    pub fn validate(&self) -> Result<()> {
        self.clone().validated().map(|_| ())
    }

    fn validated(self) -> Result<Control> {
        if !(self.s > 0.0) || !self.s.is_finite() {
            return Err(Error::Grid(format!("horizon must be positive, got {}", self.s)));
        }
        let k = self.v1.len();
        if k == 0 || self.v2.len() != k || self.breaks.len() != k + 1 {
            return Err(Error::Grid("breakpoint/value lengths inconsistent".into()));
        }
        if self.breaks[0] != 0.0 || (self.breaks[k] - self.s).abs() > 1e-12 * self.s {
            return Err(Error::Grid("breakpoints must run from 0 to s".into()));
        }
        for w in self.breaks.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Grid("breakpoints must be strictly increasing".into()));
            }
        }
        if self.v1.iter().chain(self.v2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Grid("control values must be finite".into()));
        }
        Ok(self)
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.v1.len()
    }

    /// Cell widths.
    pub fn widths(&self) -> Vec<f64> {
        self.breaks.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Index of the cell containing `t` (right-continuous; `t >= s` maps to
    /// the last cell).
    pub fn cell_of(&self, t: f64) -> usize {
        match self.breaks.binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.cells() - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.cells() - 1),
        }
    }

    /// Control values at time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let j = self.cell_of(t);
        (self.v1[j], self.v2[j])
    }

    /// Length-weighted mean of `v1` — the constant part `v1_C` of the
    /// decomposition `v1 = v1_C + v1_Z`.
    pub fn mean_v1(&self) -> f64 {
        let ws = self.widths();
        self.v1.iter().zip(&ws).map(|(v, w)| v * w).sum::<f64>() / self.s
    }

    /// Per-cell zero-mean part `v1_Z = v1 − mean(v1)`.
    pub fn zero_mean_v1(&self) -> Vec<f64> {
        let m = self.mean_v1();
        self.v1.iter().map(|v| v - m).collect()
    }

    /// The comparison control `(v1_C, 0, v2)`: `v1` replaced by its mean.
    pub fn with_constant_v1(&self) -> Control {
        let m = self.mean_v1();
        Control {
            s: self.s,
            breaks: self.breaks.clone(),
            v1: vec![m; self.cells()],
            v2: self.v2.clone(),
        }
    }

    /// Exact `L²` distance between two controls on the same horizon,
    /// computed on the merged partition.
    pub fn l2_distance(&self, other: &Control) -> f64 {
        let merged = merge_breaks(&self.breaks, &other.breaks, self.s);
        let mut acc = 0.0;
        for w in merged.windows(2) {
            let tm = 0.5 * (w[0] + w[1]);
            let (a1, a2) = self.eval(tm);
            let (b1, b2) = other.eval(tm);
            acc += ((a1 - b1).powi(2) + (a2 - b2).powi(2)) * (w[1] - w[0]);
        }
        acc.sqrt()
    }

    /// `L²` projection onto `cells` uniform cells (cellwise averages).
    pub fn resample_uniform(&self, cells: usize) -> Control {
        let h = self.s / cells as f64;
        let mut v1 = vec![0.0; cells];
        let mut v2 = vec![0.0; cells];
        let grid: Vec<f64> = (0..=cells).map(|j| j as f64 * h).collect();
        let merged = merge_breaks(&self.breaks, &grid, self.s);
        for w in merged.windows(2) {
            let tm = 0.5 * (w[0] + w[1]);
            let j = ((tm / h) as usize).min(cells - 1);
            let (a1, a2) = self.eval(tm);
            v1[j] += a1 * (w[1] - w[0]) / h;
            v2[j] += a2 * (w[1] - w[0]) / h;
        }
        Control::uniform(self.s, v1, v2).expect("valid by construction")
    }
}

/// Sorted union of two breakpoint lists with duplicates (within a relative
/// tolerance) removed; endpoints pinned to `0` and `s`.
pub(crate) fn merge_breaks(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let tol = 1e-13 * s.max(1.0);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for t in all {
        if out.last().map_or(true, |&last| t - last > tol) {
            out.push(t);
        }
    }
    if let Some(first) = out.first_mut() {
        *first = 0.0;
    }
    if let Some(last) = out.last_mut() {
        *last = s;
    }
    out
}
