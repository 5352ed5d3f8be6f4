use super::LocalizationError;
use crate::geometry::Vec2;
use crate::world::{GridGeometry, OccupancyGrid};

/// Beam-endpoint likelihood as a function of distance to the nearest
/// occupied cell center: `(1 - p_rand)·exp(-d²/2σ²) + p_rand`.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodField {
    geometry: GridGeometry,
    distance: Vec<f64>,
    values: Vec<f64>,
    pub sigma_hit: f64,
    pub p_rand: f64,
}

impl LikelihoodField {
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Distance in meters from each cell center to the nearest occupied cell center.
    pub fn distances(&self) -> &[f64] {
        &self.distance
    }

    pub fn value(&self, ix: i64, iy: i64) -> f64 {
        self.geometry.index(ix, iy).map_or(self.p_rand, |i| self.values[i])
    }

    /// Field value at a map-frame point; `p_rand` outside the map.
    pub fn at(&self, p: Vec2) -> f64 {
        let (ix, iy) = self.geometry.world_to_cell(p);
        self.value(ix, iy)
    }
}

pub fn build_likelihood_field(map: &OccupancyGrid, sigma_hit: f64, p_rand: f64) -> Result<LikelihoodField, LocalizationError> {
    if map.occupied_count() == 0 {
        return Err(LocalizationError::NoObstacles);
    }
    assert!(sigma_hit > 0.0 && (0.0..1.0).contains(&p_rand), "sigma_hit > 0, p_rand in [0, 1)");
    let res = map.resolution();
    let distance: Vec<f64> = map.occupied_distance_sq().iter().map(|d2| d2.sqrt() * res).collect();
    let z_hit = 1.0 - p_rand;
    let values = distance
        .iter()
        .map(|d| z_hit * (-(d * d) / (2.0 * sigma_hit * sigma_hit)).exp() + p_rand)
        .collect();
    Ok(LikelihoodField {
        geometry: *map.geometry(),
        distance,
        values,
        sigma_hit,
        p_rand,
    })
}
