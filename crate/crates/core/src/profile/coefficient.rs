use std::f64::consts::E;

use crate::{Error, Result};

/// Built-in families for the coefficient `k` of the focusing nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KFamily {
    /// `exp(-(k1 x1² + k2 x2²)/2)`
    QuadraticGaussian,
    /// `1 - (k1 x1² + k2 x2²)/2` near the origin, ramped smoothly onto a floor.
    PureQuadraticCapped,
    /// `exp(-(k1 x1² + k2 x2²)/2 - c|x|²/ln(e + 1/|x|))`: `C²` but not `C^{2,a}`.
    RoughC2,
}

impl KFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KFamily::QuadraticGaussian => "quadratic_gaussian",
            KFamily::PureQuadraticCapped => "pure_quadratic_capped",
            KFamily::RoughC2 => "rough_c2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quadratic_gaussian" => Some(KFamily::QuadraticGaussian),
            "pure_quadratic_capped" => Some(KFamily::PureQuadraticCapped),
            "rough_c2" => Some(KFamily::RoughC2),
            _ => None,
        }
    }
}

const CAP_FLOOR: f64 = 0.1;
const CAP_WIDTH: f64 = 0.2;
const DEFAULT_ROUGH_MODULUS: f64 = 0.5;

/// Coefficient `k` with `k(0) = 1`, `∇k(0) = 0` and `∇²k(0) = diag(-k1, -k2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientK {
    pub family: KFamily,
    pub k1: f64,
    pub k2: f64,
    pub rough_modulus: f64,
}

impl CoefficientK {
    pub fn new(family: KFamily, k1: f64, k2: f64, rough_modulus: Option<f64>) -> Result<Self> {
        if !(k1.is_finite() && k2.is_finite() && k1 >= 0.0 && k2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "k1, k2 must be finite and non-negative, got ({k1}, {k2})"
            )));
        }
        let rough_modulus = rough_modulus.unwrap_or(DEFAULT_ROUGH_MODULUS);
        if !(rough_modulus.is_finite() && rough_modulus >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rough modulus must be non-negative, got {rough_modulus}"
            )));
        }
        Ok(Self {
            family,
            k1,
            k2,
            rough_modulus,
        })
    }

    pub fn quadratic_gaussian(k1: f64, k2: f64) -> Result<Self> {
        Self::new(KFamily::QuadraticGaussian, k1, k2, None)
    }

    /// `k ≡ 1`, the homogeneous equation.
    pub fn homogeneous() -> Self {
        Self {
            family: KFamily::QuadraticGaussian,
            k1: 0.0,
            k2: 0.0,
            rough_modulus: 0.0,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.k1 == 0.0
            && self.k2 == 0.0
            && (self.family != KFamily::RoughC2 || self.rough_modulus == 0.0)
    }

    fn q(&self, x: [f64; 2]) -> f64 {
        0.5 * (self.k1 * x[0] * x[0] + self.k2 * x[1] * x[1])
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self.family {
            KFamily::QuadraticGaussian => (-self.q(x)).exp(),
            KFamily::PureQuadraticCapped => CAP_FLOOR + ramp(1.0 - self.q(x) - CAP_FLOOR).0,
            KFamily::RoughC2 => {
                let r = x[0].hypot(x[1]);
                (-self.q(x) - self.rough_modulus * rough_weight(r).0).exp()
            }
        }
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let dq = [self.k1 * x[0], self.k2 * x[1]];
        match self.family {
            KFamily::QuadraticGaussian => {
                let k = self.eval(x);
                [-k * dq[0], -k * dq[1]]
            }
            KFamily::PureQuadraticCapped => {
                let s = ramp(1.0 - self.q(x) - CAP_FLOOR).1;
                [-s * dq[0], -s * dq[1]]
            }
            KFamily::RoughC2 => {
                let k = self.eval(x);
                let r = x[0].hypot(x[1]);
                let dw = if r > 0.0 {
                    self.rough_modulus * rough_weight(r).1 / r
                } else {
                    0.0
                };
                [-k * (dq[0] + dw * x[0]), -k * (dq[1] + dw * x[1])]
            }
        }
    }

    pub fn hessian_at_origin(&self) -> [[f64; 2]; 2] {
        [[-self.k1, 0.0], [0.0, -self.k2]]
    }

    /// `∇²k(0)(u, v)`.
    pub fn hessian_form(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        -self.k1 * u[0] * v[0] - self.k2 * u[1] * v[1]
    }
}

/// `C²` ramp: `0` for `z ≤ 0`, `z` for `z ≥ w`, quintic in between.
/// Returns the value and the derivative.
fn ramp(z: f64) -> (f64, f64) {
    let w = CAP_WIDTH;
    if z <= 0.0 {
        (0.0, 0.0)
    } else if z >= w {
        (z, 1.0)
    } else {
        let u = z / w;
        let u2 = u * u;
        (
            w * u2 * u * (6.0 - 8.0 * u + 3.0 * u2),
            u2 * (18.0 - 32.0 * u + 15.0 * u2),
        )
    }
}

/// `r²/ln(e + 1/r)` and its derivative in `r`.
fn rough_weight(r: f64) -> (f64, f64) {
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let l = (E + 1.0 / r).ln();
    let v = r * r / l;
    let d = 2.0 * r / l + 1.0 / (l * l * (E + 1.0 / r));
    (v, d)
}

/// Rotates a symmetric negative-definite Hessian `h` to diagonal form.
///
/// Returns `(k1, k2, θ)` with `h = R(θ) diag(-k1, -k2) R(θ)ᵀ`, so that
/// `k(R(θ) x)` has Hessian `diag(-k1, -k2)` at the origin.
pub fn diagonalize_hessian(h: [[f64; 2]; 2]) -> (f64, f64, f64) {
    let (a, b, c) = (h[0][0], 0.5 * (h[0][1] + h[1][0]), h[1][1]);
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = theta.sin_cos();
    let l1 = a * co * co + 2.0 * b * s * co + c * s * s;
    let l2 = a * s * s - 2.0 * b * s * co + c * co * co;
    (-l1, -l2, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<CoefficientK> {
        vec![
            CoefficientK::new(KFamily::QuadraticGaussian, 1.0, 2.0, None).unwrap(),
            CoefficientK::new(KFamily::PureQuadraticCapped, 1.0, 2.0, None).unwrap(),
            CoefficientK::new(KFamily::RoughC2, 1.0, 2.0, None).unwrap(),
        ]
    }

    #[test]
    fn normalization_and_bounds() {
        for k in families() {
            assert_eq!(k.eval([0.0, 0.0]), 1.0);
            for i in -40..=40 {
                for j in -40..=40 {
                    let x = [i as f64 * 0.2, j as f64 * 0.2];
                    let v = k.eval(x);
                    assert!(v > 0.0 && v <= 1.0, "{:?} at {x:?}: {v}", k.family);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for k in families() {
            for x in [[0.3, -0.2], [1.1, 0.4], [-0.05, 0.9], [2.0, 2.0]] {
                let g = k.gradient(x);
                let h = 1e-6;
                for a in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[a] += h;
                    xm[a] -= h;
                    let fd = (k.eval(xp) - k.eval(xm)) / (2.0 * h);
                    assert!((fd - g[a]).abs() < 1e-7, "{:?} {x:?}", k.family);
                }
            }
        }
    }

    #[test]
    fn hessian_at_origin_by_differences() {
        for k in families() {
            let h = 1e-3;
            let d11 = (k.eval([h, 0.0]) - 2.0 + k.eval([-h, 0.0])) / (h * h);
            let d22 = (k.eval([0.0, h]) - 2.0 + k.eval([0.0, -h])) / (h * h);
            // The rough family converges only logarithmically.
            let tol = if k.family == KFamily::RoughC2 { 0.2 } else { 1e-5 };
            assert!((d11 + 1.0).abs() < tol, "{:?}: {d11}", k.family);
            assert!((d22 + 2.0).abs() < tol, "{:?}: {d22}", k.family);
        }
    }

    #[test]
    fn ramp_is_c2() {
        let w = CAP_WIDTH;
        let (v0, d0) = ramp(1e-12);
        let (v1, d1) = ramp(w - 1e-12);
        assert!(v0.abs() < 1e-20 && d0.abs() < 1e-20);
        assert!((v1 - w).abs() < 1e-10 && (d1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_diagonalizes() {
        let theta: f64 = 0.4;
        let (s, c) = theta.sin_cos();
        let (k1, k2) = (1.5, 0.5);
        // R diag(-k1, -k2) Rᵀ
        let h = [
            [-(k1 * c * c + k2 * s * s), -(k1 - k2) * s * c],
            [-(k1 - k2) * s * c, -(k1 * s * s + k2 * c * c)],
        ];
        let (a, b, t) = diagonalize_hessian(h);
        let (s2, c2) = t.sin_cos();
        let back = [
            [-(a * c2 * c2 + b * s2 * s2), -(a - b) * s2 * c2],
            [-(a - b) * s2 * c2, -(a * s2 * s2 + b * c2 * c2)],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!((back[i][j] - h[i][j]).abs() < 1e-12);
            }
        }
        let mut got = [a, b];
        got.sort_by(f64::total_cmp);
        assert!((got[0] - k2).abs() < 1e-12 && (got[1] - k1).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_curvature_parameters() {
        assert!(CoefficientK::quadratic_gaussian(-1.0, 1.0).is_err());
        assert!(CoefficientK::new(KFamily::RoughC2, 1.0, 1.0, Some(-0.1)).is_err());
    }
}
