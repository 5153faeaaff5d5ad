use super::Point;
use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A set represented by a boolean mask on a uniform lattice of cubical cells.
///
/// Cell `(i_0, …, i_{d−1})` is the cube with lower corner
/// `origin + h·(i_0, …, i_{d−1})`; its representative point is the cell centre.
/// Linear indices run with axis 0 fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDomain {
    origin: Point,
    spacing: f64,
    shape: Vec<usize>,
    mask: Vec<bool>,
}

impl GridDomain {
    pub fn new(origin: Point, spacing: f64, shape: Vec<usize>, mask: Vec<bool>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Domain(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        if shape.len() != origin.dim() {
            return Err(Error::Mismatch(
                "grid shape and origin dimensions differ".into(),
            ));
        }
        let n: usize = shape.iter().product();
        if n == 0 || mask.len() != n {
            return Err(Error::Domain(format!(
                "mask has {} cells, shape implies {n}",
                mask.len()
            )));
        }
        Ok(GridDomain {
            origin,
            spacing,
            shape,
            mask,
        })
    }

    /// A fully masked box of `shape` cells.
    pub fn full(origin: Point, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        let n = shape.iter().product();
        GridDomain::new(origin, spacing, shape, vec![true; n])
    }

    /// A box of `n` cells per axis covering `[lo, lo + n·h]^d`, masked by `pred` on cell centres.
    pub fn from_predicate(
        origin: Point,
        spacing: f64,
        shape: Vec<usize>,
        pred: impl Fn(&Point) -> bool,
    ) -> Result<Self> {
        let mut g = GridDomain::full(origin, spacing, shape)?;
        for i in 0..g.len() {
            let c = g.center(i);
            g.mask[i] = pred(&c);
        }
        Ok(g)
    }

    /// Square/cubic window of side `2·half_width` centred at `center` with `n` cells per axis.
    pub fn centered_box(center: Point, half_width: f64, n: usize) -> Result<Self> {
        let d = center.dim();
        let lo = center - Point::new(&vec![half_width; d]);
        GridDomain::full(lo, 2.0 * half_width / n as f64, vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.mask[i] = v;
    }

    pub fn with_mask(&self, mask: Vec<bool>) -> Result<Self> {
        GridDomain::new(self.origin, self.spacing, self.shape.clone(), mask)
    }

    pub fn same_lattice(&self, other: &GridDomain) -> bool {
        self.shape == other.shape && self.spacing == other.spacing && self.origin == other.origin
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        for &n in &self.shape {
            out.push(i % n);
            i /= n;
        }
        out
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        let mut i = 0;
        for k in (0..self.dim()).rev() {
            i = i * self.shape[k] + idx[k];
        }
        i
    }

    pub fn center(&self, i: usize) -> Point {
        let idx = self.multi_index(i);
        let mut p = self.origin;
        for (k, &ik) in idx.iter().enumerate() {
            p[k] += (ik as f64 + 0.5) * self.spacing;
        }
        p
    }

    /// Index of the cell containing `x`, if `x` lies in the lattice box.
    pub fn locate(&self, x: &Point) -> Option<usize> {
        if x.dim() != self.dim() {
            return None;
        }
        let mut idx = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let t = ((x[k] - self.origin[k]) / self.spacing).floor();
            if t < 0.0 || t >= self.shape[k] as f64 {
                return None;
            }
            idx.push(t as usize);
        }
        Some(self.linear_index(&idx))
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.locate(x).is_some_and(|i| self.mask[i])
    }

    /// Face neighbours (4 in d=2, 6 in d=3); `None` marks the lattice frame.
    pub fn face_neighbors(&self, i: usize) -> Vec<Option<usize>> {
        let idx = self.multi_index(i);
        let mut stride = 1;
        let mut out = Vec::with_capacity(2 * self.dim());
        for k in 0..self.dim() {
            out.push(if idx[k] > 0 { Some(i - stride) } else { None });
            out.push(if idx[k] + 1 < self.shape[k] {
                Some(i + stride)
            } else {
                None
            });
            stride *= self.shape[k];
        }
        out
    }

    /// Masked cells with an unmasked face neighbour or on the lattice frame.
    pub fn boundary_cells(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                self.mask[i]
                    && self
                        .face_neighbors(i)
                        .iter()
                        .any(|n| n.is_none_or(|j| !self.mask[j]))
            })
            .collect()
    }

    /// Euclidean distance from `x` to the nearest unmasked cell centre (or the frame).
    pub fn boundary_distance(&self, x: &Point) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for k in 0..self.dim() {
            let lo = x[k] - self.origin[k];
            let hi = self.origin[k] + self.shape[k] as f64 * self.spacing - x[k];
            best = best.min(lo).min(hi);
        }
        for i in 0..self.len() {
            if !self.mask[i] {
                best = best.min(self.center(i).dist(x) - 0.5 * self.spacing);
            }
        }
        best.max(0.0)
    }

    /// A copy with `pad` extra unmasked cells on every side.
    pub fn padded(&self, pad: usize) -> GridDomain {
        let d = self.dim();
        let shape: Vec<usize> = self.shape.iter().map(|n| n + 2 * pad).collect();
        let origin = self.origin - Point::new(&vec![pad as f64 * self.spacing; d]);
        let mut out = GridDomain::new(
            origin,
            self.spacing,
            shape.clone(),
            vec![false; shape.iter().product()],
        )
        .expect("padding preserves validity");
        for i in 0..self.len() {
            if self.mask[i] {
                let idx: Vec<usize> = self.multi_index(i).iter().map(|v| v + pad).collect();
                let j = out.linear_index(&idx);
                out.mask[j] = true;
            }
        }
        out
    }

    /// Run lengths of the mask, alternating unmasked/masked and starting with unmasked.
    pub fn mask_rle(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut cur = false;
        let mut n = 0;
        for &m in &self.mask {
            if m == cur {
                n += 1;
            } else {
                runs.push(n);
                cur = m;
                n = 1;
            }
        }
        runs.push(n);
        runs
    }

    pub fn mask_from_rle(runs: &[usize], len: usize) -> Result<Vec<bool>> {
        let mut out = Vec::with_capacity(len);
        let mut cur = false;
        for &r in runs {
            out.extend(std::iter::repeat_n(cur, r));
            cur = !cur;
        }
        if out.len() != len {
            return Err(Error::Domain(format!(
                "run-length mask decodes to {} cells, expected {len}",
                out.len()
            )));
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    origin: Point,
    spacing: f64,
    shape: Vec<usize>,
    mask_rle: Vec<usize>,
}

impl Serialize for GridDomain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridRepr {
            origin: self.origin,
            spacing: self.spacing,
            shape: self.shape.clone(),
            mask_rle: self.mask_rle(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridDomain {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = GridRepr::deserialize(de)?;
        let len = r.shape.iter().product();
        let mask = GridDomain::mask_from_rle(&r.mask_rle, len).map_err(D::Error::custom)?;
        GridDomain::new(r.origin, r.spacing, r.shape, mask).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = GridDomain::full(Point::xyz(0.0, 0.0, 0.0), 1.0, vec![3, 4, 5]).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.linear_index(&g.multi_index(i)), i);
            assert_eq!(g.locate(&g.center(i)), Some(i));
        }
    }

    #[test]
    fn rle_round_trip() {
        let g = GridDomain::from_predicate(Point::xy(-1.0, -1.0), 0.1, vec![20, 20], |p| {
            p.norm() < 0.7
        })
        .unwrap();
        let back = GridDomain::mask_from_rle(&g.mask_rle(), g.len()).unwrap();
        assert_eq!(back, g.mask());
    }

    #[test]
    fn boundary_of_full_box_is_its_frame() {
        let g = GridDomain::full(Point::xy(0.0, 0.0), 1.0, vec![4, 4]).unwrap();
        assert_eq!(g.boundary_cells().len(), 12);
    }
}
