use super::ScalarField;
use crate::error::{precondition, Result};
use crate::extreal::ExtReal;
use crate::geometry::GridDomain;
use crate::kernels::riesz_normalizer;
use crate::measures::{Component, Measure};
use serde::{Deserialize, Serialize};

/// Riesz measure recovered from lattice samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszMeasure {
    /// `c_d △_h v · h^d` per interior cell, as one grid density.
    pub measure: Measure,
    /// Cells whose stencil sees a non-finite value; they carry no mass and
    /// mark where atoms of the true Riesz measure may sit.
    pub singular_cells: Vec<usize>,
}

impl RieszMeasure {
    pub fn masses(&self) -> &[f64] {
        match self.measure.components().first() {
            Some(Component::GridDensity { masses, .. }) => masses,
            _ => &[],
        }
    }
}

/// `c_d △v` by the `2d+1`-point stencil at the masked cells of `grid`, excluding
/// the boundary ring.
pub fn riesz_measure(v: &ScalarField, grid: &GridDomain) -> Result<RieszMeasure> {
    riesz_measure_from_samples(grid, &v.sample(grid))
}

pub fn riesz_measure_from_samples(grid: &GridDomain, values: &[ExtReal]) -> Result<RieszMeasure> {
    precondition!(
        values.len() == grid.len(),
        "{} samples for a grid of {} cells",
        values.len(),
        grid.len()
    );
    let d = grid.dim();
    let h = grid.spacing();
    let scale = riesz_normalizer(d) * h.powi(d as i32 - 2);
    let mut masses = vec![0.0; grid.len()];
    let mut singular = Vec::new();
    for i in 0..grid.len() {
        if !grid.is_masked(i) {
            continue;
        }
        let nbrs = grid.face_neighbors(i);
        if nbrs.iter().any(|n| n.is_none_or(|j| !grid.is_masked(j))) {
            continue;
        }
        let centre = values[i].finite();
        let mut lap = 0.0;
        let mut ok = centre.is_some();
        for j in nbrs.into_iter().flatten() {
            match (values[j].finite(), centre) {
                (Some(a), Some(c)) => lap += a - c,
                _ => ok = false,
            }
        }
        if ok {
            masses[i] = scale * lap;
        } else {
            singular.push(i);
        }
    }
    let mask: Vec<bool> = (0..grid.len()).map(|i| grid.is_masked(i)).collect();
    let grid = grid.with_mask(mask)?;
    Ok(RieszMeasure {
        measure: Measure::single(Component::GridDensity { grid, masses }),
        singular_cells: singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn paraboloid_has_uniform_density() {
        let g = GridDomain::centered_box(Point::xy(0.0, 0.0), 1.0, 50).unwrap();
        let v = ScalarField::on_space(2, |p| p.norm_sq());
        let rm = riesz_measure(&v, &g).unwrap();
        let cell = g.cell_volume();
        let target = 2.0 / std::f64::consts::PI;
        for (i, m) in rm.masses().iter().enumerate() {
            if *m != 0.0 {
                assert!((m / cell - target).abs() < 1e-8, "cell {i}: {}", m / cell);
            }
        }
        assert!(rm.singular_cells.is_empty());
    }
}
