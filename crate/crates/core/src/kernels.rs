//! Radial kernels `k_q`, the Riesz kernel `K_{d−2}` and dimensional constants.

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Ambient dimension `d ≥ 1`; the kernel index is `q = d − 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub d: usize,
}

impl KernelConfig {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        Ok(KernelConfig { d })
    }

    pub fn q(&self) -> i32 {
        self.d as i32 - 2
    }

    /// `k_{d−2}(t)` for `t > 0`.
    pub fn radial(&self, t: f64) -> f64 {
        k_radial(self.q() as f64, t)
    }

    pub fn kernel(&self, x: &Point, y: &Point) -> ExtReal {
        riesz_kernel(*self, x, y)
    }

    pub fn normalizer(&self) -> f64 {
        riesz_normalizer(self.d)
    }
}

/// `k_q(t) = ln t` for `q = 0`, `−sgn(q)·t^{−q}` otherwise.
pub fn k_eval(q: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("k_q needs t > 0, got {t}")));
    }
    Ok(k_radial(q, t))
}

#[inline]
fn k_radial(q: f64, t: f64) -> f64 {
    if q == 0.0 {
        t.ln()
    } else {
        -q.signum() * t.powf(-q)
    }
}

/// `K_{d−2}(x, y)`: `k_{d−2}(|x−y|)` off the diagonal, `−∞` on it for `d ≥ 2`
/// and `0` on it for `d = 1`.
pub fn riesz_kernel(cfg: KernelConfig, x: &Point, y: &Point) -> ExtReal {
    let t = x.dist(y);
    if t == 0.0 {
        if cfg.d == 1 {
            ExtReal::Finite(0.0)
        } else {
            ExtReal::NegInf
        }
    } else {
        ExtReal::Finite(cfg.radial(t))
    }
}

/// Gamma function (Lanczos approximation).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Surface area `s_{d−1} = 2π^{d/2} / Γ(d/2)` of the unit sphere in `ℝ^d`.
pub fn sphere_area(d: usize) -> f64 {
    assert!(d >= 1);
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// `c_d = Γ(d/2) / (2π^{d/2} · max{1, d−2})`, so that `c_d·Δ K_{d−2}(·, y) = δ_y`.
pub fn riesz_normalizer(d: usize) -> f64 {
    assert!(d >= 1);
    let m = if d > 3 { (d - 2) as f64 } else { 1.0 };
    gamma(d as f64 / 2.0) / (2.0 * PI.powf(d as f64 / 2.0) * m)
}

/// Volume `b_p` of the unit ball in `ℝ^p`: 1, 2 for `p = 0, 1`, `s_{p−1}/p` after.
pub fn unit_ball_volume(p: usize) -> f64 {
    match p {
        0 => 1.0,
        1 => 2.0,
        _ => sphere_area(p) / p as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_eval_examples() {
        assert!((k_eval(0.0, std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(k_eval(1.0, 2.0).unwrap(), -0.5);
        assert_eq!(k_eval(-1.0, 3.0).unwrap(), 3.0);
        assert!(k_eval(0.0, 0.0).is_err());
        assert!(k_eval(1.0, -1.0).is_err());
    }

    #[test]
    fn riesz_kernel_examples() {
        let c2 = KernelConfig::new(2).unwrap();
        let v = riesz_kernel(c2, &Point::xy(0.0, 0.0), &Point::xy(2.0, 0.0));
        assert!((v.to_f64() - 2f64.ln()).abs() < 1e-15);
        let p3 = Point::xyz(1.0, 2.0, 3.0);
        assert_eq!(
            riesz_kernel(KernelConfig::new(3).unwrap(), &p3, &p3),
            ExtReal::NegInf
        );
        let p1 = Point::new(&[0.3]);
        assert_eq!(
            riesz_kernel(KernelConfig::new(1).unwrap(), &p1, &p1),
            ExtReal::Finite(0.0)
        );
    }

    #[test]
    fn normalizer_examples() {
        assert!((riesz_normalizer(2) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((riesz_normalizer(3) - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((riesz_normalizer(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ball_volume_examples() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }
}
