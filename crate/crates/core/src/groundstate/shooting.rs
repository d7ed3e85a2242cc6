use crate::numerics::{RadialGrid, RadialProfile};
use crate::{Error, Result};

/// Outcome of integrating the radial ODE from a trial central value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fate {
    /// `Q` changed sign: the central value is too large.
    Over,
    /// `Q'` turned positive while `Q > 0`: too small.
    Under,
    /// Reached the end of the grid without either.
    Undecided,
}

/// Result of bisection shooting on a uniform grid of spacing `h`.
#[derive(Debug, Clone)]
pub struct Shot {
    pub a: f64,
    h: f64,
    /// Trajectory of the final central value, cut where it departs from the
    /// decaying branch.
    values: Vec<f64>,
}

fn rhs(r: f64, q: f64, p: f64) -> (f64, f64) {
    (p, -p / r + q - q * q * q)
}

/// Integrates from the origin with step `h` for at most `n` steps, returning
/// the fate and the values at `r_0..=r_k`.
fn integrate(a: f64, h: f64, n: usize) -> (Fate, Vec<f64>) {
    // Series start: Q = a + c r² + d r⁴.
    let c = (a - a * a * a) / 4.0;
    let d = c * (1.0 - 3.0 * a * a) / 16.0;
    let mut q = a + c * h * h + d * h.powi(4);
    let mut p = 2.0 * c * h + 4.0 * d * h.powi(3);
    let mut out = vec![a, q];
    for i in 1..n {
        let r = i as f64 * h;
        let (k1q, k1p) = rhs(r, q, p);
        let (k2q, k2p) = rhs(r + h / 2.0, q + h / 2.0 * k1q, p + h / 2.0 * k1p);
        let (k3q, k3p) = rhs(r + h / 2.0, q + h / 2.0 * k2q, p + h / 2.0 * k2p);
        let (k4q, k4p) = rhs(r + h, q + h * k3q, p + h * k3p);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if q < 0.0 {
            return (Fate::Over, out);
        }
        if p > 0.0 {
            return (Fate::Under, out);
        }
        out.push(q);
    }
    (Fate::Undecided, out)
}

/// Bisection on `Q(0) ∈ [lo, hi]` with RK4 steps of size `h`.
pub fn shoot(h: f64, n: usize, lo: f64, hi: f64) -> Result<Shot> {
    let (flo, _) = integrate(lo, h, n);
    let (fhi, _) = integrate(hi, h, n);
    if flo != Fate::Under || fhi != Fate::Over {
        return Err(Error::ShootingBracket { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match integrate(mid, h, n).0 {
            Fate::Over => hi = mid,
            Fate::Under => lo = mid,
            Fate::Undecided => {
                lo = mid;
                hi = mid;
            }
        }
    }
    let a = 0.5 * (lo + hi);
    let (_, mut values) = integrate(a, h, n);
    // The last few e-foldings before departure carry O(1) relative error.
    let keep = values.len().saturating_sub((3.0 / h).ceil() as usize).max(2);
    values.truncate(keep);
    Ok(Shot { a, h, values })
}

impl Shot {
    /// Samples the shot onto `grid`, continuing past the cut with `e^{-r}/√r`.
    pub fn profile_on(&self, grid: RadialGrid) -> Result<RadialProfile> {
        if (grid.spacing() - self.h).abs() > 1e-14 * self.h {
            return Err(Error::GridMismatch("shot computed with another spacing".into()));
        }
        let k = self.values.len() - 1;
        let rk = k as f64 * self.h;
        let qk = self.values[k];
        let full: Vec<f64> = (0..=grid.len())
            .map(|i| {
                if i <= k {
                    self.values[i]
                } else {
                    let r = grid.r(i);
                    qk * (rk / r).sqrt() * (-(r - rk)).exp()
                }
            })
            .collect();
        RadialProfile::from_full(grid, &full)
    }
}
