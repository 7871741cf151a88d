//! Reparametrization map `ρ` and its inverse.
//!
//! Split `v1` into its mean `c` and zero-mean part `z`, and let `φ` be the
//! time reparametrization with `φ' = 1 + z`, `φ(0) = 0`, `φ(s) = s`.  Then
//!
//! * `ρ(v)` has first component `c + (1 + c) z(t)` and second component
//!   `φ'(t) v2(φ(t))`;
//! * the endpoint of `ρ(v)` coincides with the endpoint of the control
//!   `(v1 ≡ c, v2)`: the zero-mean part is absorbed into time.
//!
//! For piecewise-constant controls `φ` is piecewise linear and strictly
//! increasing (admissibility requires `1 + z > α`), so both maps are exact
//! on a merged breakpoint grid and compose to the identity.

use crate::flow::control::{merge_breaks, Control};
use crate::{Error, Result};

/// Piecewise-linear strictly increasing reparametrization on `[0, s]`.
struct PiecewiseLinear {
    /// Domain breakpoints (the control's breaks).
    t: Vec<f64>,
    /// Values at the breakpoints; `phi[0] = 0`, `phi[last] = s`.
    phi: Vec<f64>,
    /// Slope on each cell.
    slope: Vec<f64>,
}

impl PiecewiseLinear {
    /// Build from cell slopes; the final value is pinned to `s` (the
    /// slopes come from a zero-mean function, so the drift is rounding
    /// noise only).
    fn from_slopes(breaks: &[f64], slope: Vec<f64>, s: f64) -> Self {
        let mut phi = Vec::with_capacity(breaks.len());
        phi.push(0.0);
        for (j, sl) in slope.iter().enumerate() {
            let prev = *phi.last().unwrap();
            phi.push(prev + sl * (breaks[j + 1] - breaks[j]));
        }
        *phi.last_mut().unwrap() = s;
        PiecewiseLinear { t: breaks.to_vec(), phi, slope }
    }

    fn cell_of_domain(&self, t: f64) -> usize {
        match self.t.binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.slope.len() - 1),
            Err(i) => (i - 1).min(self.slope.len() - 1),
        }
    }

    fn cell_of_range(&self, y: f64) -> usize {
        match self.phi.binary_search_by(|b| b.partial_cmp(&y).unwrap()) {
            Ok(i) => i.min(self.slope.len() - 1),
            Err(i) => (i - 1).min(self.slope.len() - 1),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let i = self.cell_of_domain(t);
        self.phi[i] + self.slope[i] * (t - self.t[i])
    }

    fn eval_inverse(&self, y: f64) -> f64 {
        let i = self.cell_of_range(y);
        self.t[i] + (y - self.phi[i]) / self.slope[i]
    }

    fn slope_at(&self, t: f64) -> f64 {
        self.slope[self.cell_of_domain(t)]
    }
}

fn zero_mean_part(v1: &[f64], c: f64, alpha: f64) -> Result<Vec<f64>> {
    let z: Vec<f64> = v1.iter().map(|&a| a - c).collect();
    for (j, &zj) in z.iter().enumerate() {
        if 1.0 + zj <= alpha {
            return Err(Error::Admissibility(format!(
                "1 + zero-mean(v1) = {} on cell {j} violates the lower bound {alpha}",
                1.0 + zj
            )));
        }
    }
    Ok(z)
}

/// Absorb the zero-mean part of `v1` into a time reparametrization.
pub fn rho(v: &Control, alpha: f64) -> Result<Control> {
    v.validate()?;
    let c = v.mean_v1();
    let z = zero_mean_part(&v.v1, c, alpha)?;
    let slopes: Vec<f64> = z.iter().map(|&zj| 1.0 + zj).collect();
    let phi = PiecewiseLinear::from_slopes(&v.breaks, slopes, v.s);

    // New breakpoints: where the slope jumps (original breaks) and where
    // v2 composed with phi jumps (preimages of original breaks).
    let preimages: Vec<f64> =
        v.breaks[1..v.breaks.len() - 1].iter().map(|&b| phi.eval_inverse(b)).collect();
    let breaks = merge_breaks(&v.breaks, &preimages, v.s);

    let cells = breaks.len() - 1;
    let mut w1 = Vec::with_capacity(cells);
    let mut w2 = Vec::with_capacity(cells);
    for j in 0..cells {
        let tm = 0.5 * (breaks[j] + breaks[j + 1]);
        let zi = phi.slope_at(tm) - 1.0;
        w1.push(c + (1.0 + c) * zi);
        let sigma = phi.eval(tm);
        w2.push(phi.slope_at(tm) * v.v2[v.cell_of(sigma)]);
    }
    Control::with_breaks(v.s, breaks, w1, w2)
}

/// Inverse of [`rho`] on its image.
pub fn rho_inverse(w: &Control, alpha: f64) -> Result<Control> {
    w.validate()?;
    let c = w.mean_v1();
    if 1.0 + c <= 1e-9 {
        return Err(Error::Admissibility(format!(
            "mean(v1) = {c} makes the reparametrization non-invertible"
        )));
    }
    let z: Vec<f64> = w.v1.iter().map(|&a| (a - c) / (1.0 + c)).collect();
    for (j, &zj) in z.iter().enumerate() {
        if 1.0 + zj <= alpha {
            return Err(Error::Admissibility(format!(
                "recovered zero-mean part on cell {j} violates the lower bound {alpha}"
            )));
        }
    }
    let slopes: Vec<f64> = z.iter().map(|&zj| 1.0 + zj).collect();
    let phi = PiecewiseLinear::from_slopes(&w.breaks, slopes.clone(), w.s);

    let images: Vec<f64> =
        w.breaks[1..w.breaks.len() - 1].iter().map(|&b| phi.eval(b)).collect();
    let breaks = merge_breaks(&w.breaks, &images, w.s);

    let cells = breaks.len() - 1;
    let mut v1 = Vec::with_capacity(cells);
    let mut v2 = Vec::with_capacity(cells);
    for j in 0..cells {
        let sm = 0.5 * (breaks[j] + breaks[j + 1]);
        // v1 is read back at identity time, v2 through the inverse map.
        v1.push(c + z[w.cell_of(sm)]);
        let t = phi.eval_inverse(sm);
        let i = w.cell_of(t);
        v2.push(w.v2[i] / slopes[i]);
    }
    Control::with_breaks(w.s, breaks, v1, v2)
}
