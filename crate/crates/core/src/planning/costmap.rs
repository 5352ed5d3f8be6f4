use serde::{Deserialize, Serialize};

use super::PlanningError;
use crate::geometry::Vec2;
use crate::world::{squared_distance_transform, Cell, GridGeometry, OccupancyGrid};

pub const FREE_COST: u64 = 1;
pub const INFLATED_COST: u64 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostCell {
    Free,
    Inflated,
    Lethal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Costmap {
    geometry: GridGeometry,
    cells: Vec<CostCell>,
    inflation_radius: f64,
    /// Meters from each cell center to the nearest lethal cell center.
    lethal_distance: Vec<f64>,
}

impl Costmap {
    pub fn from_cells(geometry: GridGeometry, cells: Vec<CostCell>, inflation_radius: f64) -> Self {
        assert_eq!(cells.len(), geometry.len());
        let lethal: Vec<bool> = cells.iter().map(|c| *c == CostCell::Lethal).collect();
        let lethal_distance = squared_distance_transform(geometry.width, geometry.height, &lethal)
            .into_iter()
            .map(|d| d.sqrt() * geometry.resolution)
            .collect();
        Self {
            geometry,
            cells,
            inflation_radius,
            lethal_distance,
        }
    }

    /// Lower bound on the distance from `p` to any lethal cell, counting the
    /// space outside the map as lethal; `None` outside the map.
    pub fn lethal_clearance_bound(&self, p: Vec2) -> Option<f64> {
        let g = &self.geometry;
        let (ix, iy) = g.world_to_cell(p);
        let i = g.index(ix, iy)?;
        let local = p - g.origin.position();
        let edge = local
            .x
            .min(local.y)
            .min(g.width as f64 * g.resolution - local.x)
            .min(g.height as f64 * g.resolution - local.y);
        Some((self.lethal_distance[i] - std::f64::consts::SQRT_2 * g.resolution).min(edge))
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn cells(&self) -> &[CostCell] {
        &self.cells
    }

    pub fn inflation_radius(&self) -> f64 {
        self.inflation_radius
    }

    /// Out-of-range cells are lethal.
    pub fn get(&self, ix: i64, iy: i64) -> CostCell {
        self.geometry
            .index(ix, iy)
            .map_or(CostCell::Lethal, |i| self.cells[i])
    }

    pub fn is_lethal(&self, ix: i64, iy: i64) -> bool {
        self.get(ix, iy) == CostCell::Lethal
    }

    pub fn cell_at(&self, p: Vec2) -> CostCell {
        let (ix, iy) = self.geometry.world_to_cell(p);
        self.get(ix, iy)
    }

    /// Traversal cost of entering a cell; `None` for lethal cells.
    pub fn cost(&self, ix: i64, iy: i64) -> Option<u64> {
        match self.get(ix, iy) {
            CostCell::Free => Some(FREE_COST),
            CostCell::Inflated => Some(INFLATED_COST),
            CostCell::Lethal => None,
        }
    }

    pub fn lethal_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == CostCell::Lethal).count()
    }
}

/// Lethal cells are occupied or unknown ones. Non-lethal cells whose center lies
/// within `radius` of a lethal cell center become inflated.
pub fn inflate(map: &OccupancyGrid, radius: f64) -> Result<Costmap, PlanningError> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(PlanningError::InvalidConfig(format!("inflation radius {radius}")));
    }
    let g = *map.geometry();
    let lethal: Vec<bool> = map.cells().iter().map(|c| *c != Cell::Free).collect();
    let d2 = squared_distance_transform(g.width, g.height, &lethal);
    let r_cells = radius / g.resolution;
    let limit = r_cells * r_cells;
    let cells = lethal
        .iter()
        .zip(&d2)
        .map(|(&l, &d)| {
            if l {
                CostCell::Lethal
            } else if d <= limit {
                CostCell::Inflated
            } else {
                CostCell::Free
            }
        })
        .collect();
    Ok(Costmap::from_cells(g, cells, radius))
}
