//! Deterministic quadrature rules on spheres, balls and shells.
//!
//! Rules return unit directions or points with weights summing to one, so
//! applying a rule computes an average.

use crate::error::{Error, Result};
use crate::geometry::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Node counts used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    /// Trapezoid nodes on circles (d = 2).
    pub circle: usize,
    /// Gauss–Legendre order in `cos θ` on 2-spheres.
    pub sphere: usize,
    /// Azimuthal trapezoid nodes on 2-spheres; 0 means `2·sphere`.
    pub sphere_azimuth: usize,
    /// Gauss–Legendre order in the radial variable for balls and shells.
    pub radial: usize,
    /// Angular nodes per radial node for ball rules in d = 2.
    pub ball_circle: usize,
    /// Gauss–Legendre order in `cos θ` for ball rules in d = 3.
    pub ball_sphere: usize,
}

impl Resolution {
    pub const DEFAULT: Resolution = Resolution {
        circle: 2048,
        sphere: 32,
        sphere_azimuth: 0,
        radial: 48,
        ball_circle: 256,
        ball_sphere: 16,
    };

    /// Boundary rule for Poisson-kernel integrals: 2^12 nodes in d = 2 and d = 3.
    pub const POISSON: Resolution = Resolution {
        circle: 4096,
        sphere: 64,
        sphere_azimuth: 64,
        ..Resolution::DEFAULT
    };

    /// Half the angular resolution, used to estimate quadrature error.
    pub fn coarser(&self) -> Resolution {
        Resolution {
            circle: (self.circle / 2).max(8),
            sphere: (self.sphere / 2).max(4),
            sphere_azimuth: self.sphere_azimuth / 2,
            radial: (self.radial / 2).max(4),
            ball_circle: (self.ball_circle / 2).max(8),
            ball_sphere: (self.ball_sphere / 2).max(4),
        }
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution::DEFAULT
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, cached per order.
pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let r = Arc::new(compute_gauss_legendre(n));
    cache.lock().unwrap().insert(n, r.clone());
    r
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Nodes and weights for `∫_a^b f(s) ds`.
pub fn gauss_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    gl.0.iter()
        .zip(&gl.1)
        .map(|(x, w)| (c + h * x, h * w))
        .collect()
}

/// An orthonormal frame whose last vector is `axis` (d = 3).
fn frame_3d(axis: &Point) -> [Point; 3] {
    let e3 = *axis * (1.0 / axis.norm());
    let helper = if e3[0].abs() < 0.9 {
        Point::xyz(1.0, 0.0, 0.0)
    } else {
        Point::xyz(0.0, 1.0, 0.0)
    };
    let mut e1 = helper - e3 * helper.dot(&e3);
    e1 = e1 * (1.0 / e1.norm());
    let e2 = Point::xyz(
        e3[1] * e1[2] - e3[2] * e1[1],
        e3[2] * e1[0] - e3[0] * e1[2],
        e3[0] * e1[1] - e3[1] * e1[0],
    );
    [e1, e2, e3]
}

/// Unit directions with weights averaging over the sphere `S^{d−1}`.
///
/// d = 2 uses the periodic trapezoid rule, d = 3 a Gauss–Legendre × trapezoid
/// product rule with polar axis `axis` (default `e_3`).
pub fn sphere_rule(d: usize, res: &Resolution, axis: Option<&Point>) -> Result<Vec<(Point, f64)>> {
    match d {
        1 => Ok(vec![(Point::new(&[-1.0]), 0.5), (Point::new(&[1.0]), 0.5)]),
        2 => {
            let n = res.circle;
            let phase = axis.map_or(0.0, |a| a[1].atan2(a[0]));
            Ok((0..n)
                .map(|k| {
                    let t = phase + 2.0 * PI * k as f64 / n as f64;
                    (Point::xy(t.cos(), t.sin()), 1.0 / n as f64)
                })
                .collect())
        }
        3 => {
            let default_axis = Point::xyz(0.0, 0.0, 1.0);
            let [e1, e2, e3] = frame_3d(axis.unwrap_or(&default_axis));
            let gl = gauss_legendre(res.sphere);
            let nphi = if res.sphere_azimuth == 0 {
                2 * res.sphere
            } else {
                res.sphere_azimuth
            };
            let mut out = Vec::with_capacity(res.sphere * nphi);
            for (t, w) in gl.0.iter().zip(&gl.1) {
                let s = (1.0 - t * t).sqrt();
                for k in 0..nphi {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
                    let p = e1 * (s * phi.cos()) + e2 * (s * phi.sin()) + e3 * *t;
                    out.push((p, 0.5 * w / nphi as f64));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Domain(format!(
            "sphere quadrature implemented for d <= 3, got {d}"
        ))),
    }
}

/// Points and weights averaging over the shell `inner ≤ |x−c| ≤ outer` (uniform
/// volume density); `inner = 0` gives the ball.
pub fn shell_rule(
    c: &Point,
    inner: f64,
    outer: f64,
    res: &Resolution,
) -> Result<Vec<(Point, f64)>> {
    let d = c.dim();
    let dirs = ball_directions(d, res)?;
    // Radial density ∝ s^{d−1} on [inner, outer].
    let norm = (outer.powi(d as i32) - inner.powi(d as i32)) / d as f64;
    let mut out = Vec::with_capacity(res.radial * dirs.len());
    for (s, ws) in gauss_interval(res.radial, inner, outer) {
        let wr = ws * s.powi(d as i32 - 1) / norm;
        for (u, wu) in &dirs {
            out.push((*c + *u * s, wr * wu));
        }
    }
    Ok(out)
}

/// Points and weights for a radial density `ρ(|x−c|)` on `B(c, r)`, normalized
/// so the weights sum to one. `profile` receives `s/r ∈ [0, 1]`.
pub fn radial_rule(
    c: &Point,
    r: f64,
    profile: impl Fn(f64) -> f64,
    res: &Resolution,
) -> Result<Vec<(Point, f64)>> {
    let d = c.dim();
    let dirs = ball_directions(d, res)?;
    let radial: Vec<(f64, f64)> = gauss_interval(res.radial, 0.0, 1.0)
        .into_iter()
        .map(|(t, w)| (t, w * t.powi(d as i32 - 1) * profile(t)))
        .collect();
    let total: f64 = radial.iter().map(|p| p.1).sum();
    let mut out = Vec::with_capacity(radial.len() * dirs.len());
    for (t, w) in radial {
        for (u, wu) in &dirs {
            out.push((*c + *u * (t * r), w / total * wu));
        }
    }
    Ok(out)
}

fn ball_directions(d: usize, res: &Resolution) -> Result<Vec<(Point, f64)>> {
    let r = Resolution {
        circle: res.ball_circle,
        sphere: res.ball_sphere,
        sphere_azimuth: 0,
        ..*res
    };
    sphere_rule(d, &r, None)
}

/// Neumaier-compensated sum; keeps many small weights added to a large total exact to a few ulps.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() {
            (s - t) + x
        } else {
            (x - t) + s
        };
        s = t;
    }
    s + c
}

/// Deterministic random stream derived from a global seed and a call index.
pub fn stream(seed: u64, call: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(call);
    rng
}

/// `n` stratified samples on the unit sphere `S^{d−1}` (equal weights).
pub fn stratified_sphere(d: usize, n: usize, rng: &mut impl Rng) -> Result<Vec<Point>> {
    match d {
        1 => Ok((0..n)
            .map(|k| Point::new(&[if k % 2 == 0 { -1.0 } else { 1.0 }]))
            .collect()),
        2 => {
            let off: f64 = rng.gen();
            Ok((0..n)
                .map(|k| {
                    let t = 2.0 * PI * (k as f64 + off) / n as f64;
                    Point::xy(t.cos(), t.sin())
                })
                .collect())
        }
        3 => {
            let m = ((n as f64).sqrt().round() as usize).max(1);
            let mut out = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    let z = -1.0 + 2.0 * (i as f64 + rng.gen::<f64>()) / m as f64;
                    let phi = 2.0 * PI * (j as f64 + rng.gen::<f64>()) / m as f64;
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    out.push(Point::xyz(s * phi.cos(), s * phi.sin(), z));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Domain(format!(
            "sampling implemented for d <= 3, got {d}"
        ))),
    }
}

/// `n` stratified samples of the uniform distribution on the unit ball.
pub fn stratified_ball(d: usize, n: usize, rng: &mut impl Rng) -> Result<Vec<Point>> {
    let dirs = stratified_sphere(d, n, rng)?;
    let m = dirs.len();
    Ok(dirs
        .into_iter()
        .enumerate()
        .map(|(k, u)| {
            // Radii stratified in s^d, paired with a shuffled index.
            let j = (k * 7919) % m;
            let v = (j as f64 + rng.gen::<f64>()) / m as f64;
            u * v.powf(1.0 / d as f64)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 48] {
            let gl = gauss_legendre(n);
            for k in 0..(2 * n) {
                let q: f64 =
                    gl.0.iter()
                        .zip(&gl.1)
                        .map(|(x, w)| w * x.powi(k as i32))
                        .sum();
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "n={n} k={k}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn sphere_rules_are_normalized() {
        for d in 1..=3 {
            let r = sphere_rule(d, &Resolution::DEFAULT, None).unwrap();
            let s: f64 = r.iter().map(|p| p.1).sum();
            assert!((s - 1.0).abs() < 1e-13);
            for (u, _) in &r {
                assert!((u.norm() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn shell_rule_second_moment() {
        // Mean of |x|² over the unit ball in d dims is d/(d+2).
        for d in 1..=3 {
            let r = shell_rule(&Point::origin(d), 0.0, 1.0, &Resolution::DEFAULT).unwrap();
            let m: f64 = r.iter().map(|(p, w)| w * p.norm_sq()).sum();
            assert!((m - d as f64 / (d as f64 + 2.0)).abs() < 1e-12);
        }
    }
}
