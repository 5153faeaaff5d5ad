use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Largest ambient dimension supported by [`Point`].
pub const MAX_DIM: usize = 8;

/// A point of `ℝ^d`, `1 ≤ d ≤ MAX_DIM`, stored inline so it is `Copy`.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    c: [f64; MAX_DIM],
    d: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Point {
        assert!(
            (1..=MAX_DIM).contains(&coords.len()),
            "point dimension must be in 1..={MAX_DIM}"
        );
        debug_assert!(
            coords.iter().all(|x| x.is_finite()),
            "non-finite coordinate"
        );
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point {
            c,
            d: coords.len() as u8,
        }
    }

    pub fn origin(d: usize) -> Point {
        Point::new(&vec![0.0; d])
    }

    pub fn xy(x: f64, y: f64) -> Point {
        Point::new(&[x, y])
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Point {
        Point::new(&[x, y, z])
    }

    /// The unit vector along axis `axis` in dimension `d`.
    pub fn unit(d: usize, axis: usize) -> Point {
        let mut p = Point::origin(d);
        p.c[axis] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.d as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.d as usize]
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        assert!(i < self.dim());
        &self.c[i]
    }
}

impl IndexMut<usize> for Point {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        assert!(i < self.dim());
        &mut self.c[i]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(mut self, rhs: Point) -> Point {
        debug_assert_eq!(self.d, rhs.d);
        for i in 0..self.dim() {
            self.c[i] += rhs.c[i];
        }
        self
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(mut self, rhs: Point) -> Point {
        debug_assert_eq!(self.d, rhs.d);
        for i in 0..self.dim() {
            self.c[i] -= rhs.c[i];
        }
        self
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(mut self, a: f64) -> Point {
        for i in 0..self.dim() {
            self.c[i] *= a;
        }
        self
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self * -1.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Point, D::Error> {
        let v = Vec::<f64>::deserialize(de)?;
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "point must have between 1 and {MAX_DIM} coordinates"
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(serde::de::Error::custom("point coordinates must be finite"));
        }
        Ok(Point::new(&v))
    }
}

/// A point of the one-point compactification `ℝ^d ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtPoint {
    Finite(Point),
    Infinity,
}

impl ExtPoint {
    pub fn finite(self) -> Option<Point> {
        match self {
            ExtPoint::Finite(p) => Some(p),
            ExtPoint::Infinity => None,
        }
    }
}
