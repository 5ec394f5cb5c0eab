//! Interior and boundary collocation points with their fill distance.

use crate::error::{Error, Result};

/// Resolution of the candidate grid used for the fill-distance supremum;
/// the induced error is at most half a grid cell, 5e-5.
const FILL_DISTANCE_GRID: usize = 10_000;

/// N interior points in `(0,1)` plus M boundary points in `{0,1}`, all
/// pairwise distinct.
#[derive(Debug, Clone)]
pub struct CollocationSet {
    interior: Vec<f64>,
    boundary: Vec<f64>,
    fill_distance: f64,
}

impl CollocationSet {
    /// Uniform interior grid `x_j = j/(n+1)` with the full boundary `{0,1}`.
    pub fn uniform(n_interior: usize) -> Result<Self> {
        if n_interior == 0 {
            return Err(Error::InvalidParameter(
                "at least one interior collocation point is required".into(),
            ));
        }
        let interior = (1..=n_interior)
            .map(|j| j as f64 / (n_interior + 1) as f64)
            .collect();
        Self::new(interior, vec![0.0, 1.0])
    }

    pub fn new(interior: Vec<f64>, boundary: Vec<f64>) -> Result<Self> {
        if interior.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one interior collocation point is required".into(),
            ));
        }
        for &x in &interior {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "interior point {x} is not strictly inside (0,1)"
                )));
            }
        }
        for &x in &boundary {
            if x != 0.0 && x != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "boundary point {x} is not in {{0,1}}"
                )));
            }
        }
        let mut all: Vec<f64> = interior.iter().chain(boundary.iter()).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(
                "collocation points must be pairwise distinct".into(),
            ));
        }
        let fill_distance = fill_distance(&all);
        Ok(Self {
            interior,
            boundary,
            fill_distance,
        })
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    pub fn boundary(&self) -> &[f64] {
        &self.boundary
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn len(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Point by global index: interior points first, then boundary.
    pub fn point(&self, index: usize) -> f64 {
        if index < self.interior.len() {
            self.interior[index]
        } else {
            self.boundary[index - self.interior.len()]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.interior.iter().chain(self.boundary.iter()).copied()
    }

    /// Largest distance from a domain point to its nearest collocation point,
    /// taken over a dense candidate grid.
    pub fn fill_distance(&self) -> f64 {
        self.fill_distance
    }
}

fn fill_distance(points: &[f64]) -> f64 {
    let mut sup: f64 = 0.0;
    for i in 0..=FILL_DISTANCE_GRID {
        let z = i as f64 / FILL_DISTANCE_GRID as f64;
        let nearest = points
            .iter()
            .map(|p| (p - z).abs())
            .fold(f64::INFINITY, f64::min);
        sup = sup.max(nearest);
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_interior_point() {
        let set = CollocationSet::uniform(1).unwrap();
        assert_eq!(set.interior(), &[0.5]);
        assert_eq!(set.boundary(), &[0.0, 1.0]);
        assert!((set.fill_distance() - 0.25).abs() <= 5e-5);
    }

    #[test]
    fn paper_profile_counts() {
        let set = CollocationSet::uniform(58).unwrap();
        assert_eq!(set.n_interior(), 58);
        assert_eq!(set.n_boundary(), 2);
        // Uniform grid with boundary points: half the spacing.
        assert!((set.fill_distance() - 0.5 / 59.0).abs() <= 5e-5);
    }

    #[test]
    fn zero_points_rejected() {
        assert!(CollocationSet::uniform(0).is_err());
    }

    #[test]
    fn validation_catches_bad_points() {
        assert!(CollocationSet::new(vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(CollocationSet::new(vec![0.5], vec![0.25]).is_err());
        assert!(CollocationSet::new(vec![0.5, 0.5], vec![]).is_err());
    }

    #[test]
    fn indexing_covers_interior_then_boundary() {
        let set = CollocationSet::uniform(3).unwrap();
        assert_eq!(set.point(0), 0.25);
        assert_eq!(set.point(2), 0.75);
        assert_eq!(set.point(3), 0.0);
        assert_eq!(set.point(4), 1.0);
        assert_eq!(set.len(), 5);
    }
}
