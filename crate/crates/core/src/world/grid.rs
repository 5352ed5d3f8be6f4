//! Occupancy grid, grid ray traversal and the exact Euclidean distance transform.

use serde::{Deserialize, Serialize};

use super::WorldError;
use crate::geometry::{Aabb, Pose2D, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Free,
    Occupied,
    Unknown,
}

/// Grid geometry. Cell `(ix, iy)` covers
/// `[ix·res, (ix+1)·res) × [iy·res, (iy+1)·res)` offset by the origin.
/// The origin is the (0,0) corner and must be axis-aligned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: Pose2D,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Pose2D) -> Result<Self, WorldError> {
        if width == 0 || height == 0 {
            return Err(WorldError::InvalidGrid(format!("{width}x{height} grid")));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(WorldError::InvalidGrid(format!("resolution {resolution}")));
        }
        if origin.theta != 0.0 {
            return Err(WorldError::InvalidGrid("rotated grid origins are not supported".into()));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn in_bounds(&self, ix: i64, iy: i64) -> bool {
        ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height
    }

    pub fn index(&self, ix: i64, iy: i64) -> Option<usize> {
        self.in_bounds(ix, iy)
            .then(|| iy as usize * self.width + ix as usize)
    }

    pub fn coords(&self, index: usize) -> (i64, i64) {
        ((index % self.width) as i64, (index / self.width) as i64)
    }

    /// Continuous grid coordinates in cell units.
    pub fn world_to_grid(&self, p: Vec2) -> Vec2 {
        self.origin.inverse().transform_point(p) * (1.0 / self.resolution)
    }

    pub fn world_to_cell(&self, p: Vec2) -> (i64, i64) {
        let g = self.world_to_grid(p);
        (g.x.floor() as i64, g.y.floor() as i64)
    }

    pub fn cell_center(&self, ix: i64, iy: i64) -> Vec2 {
        let local = Vec2::new(
            (ix as f64 + 0.5) * self.resolution,
            (iy as f64 + 0.5) * self.resolution,
        );
        self.origin.transform_point(local)
    }

    /// Cell footprint as a world-frame rectangle.
    pub fn cell_rect(&self, ix: i64, iy: i64) -> Aabb {
        let r = self.resolution;
        let o = self.origin.position();
        Aabb::new(
            Vec2::new(o.x + ix as f64 * r, o.y + iy as f64 * r),
            Vec2::new(o.x + (ix + 1) as f64 * r, o.y + (iy + 1) as f64 * r),
        )
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        let (ix, iy) = self.world_to_cell(p);
        self.in_bounds(ix, iy)
    }

    /// Inclusive cell-index range covered by a world-frame rectangle.
    pub fn cell_range(&self, rect: &Aabb) -> (i64, i64, i64, i64) {
        let a = self.world_to_grid(rect.min);
        let b = self.world_to_grid(rect.max);
        (
            a.x.min(b.x).floor() as i64,
            a.y.min(b.y).floor() as i64,
            a.x.max(b.x).floor() as i64,
            a.y.max(b.y).floor() as i64,
        )
    }

    pub fn same_shape(&self, other: &GridGeometry) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.resolution == other.resolution
            && self.origin == other.origin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    geometry: GridGeometry,
    cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Pose2D, fill: Cell) -> Result<Self, WorldError> {
        let geometry = GridGeometry::new(width, height, resolution, origin)?;
        Ok(Self {
            cells: vec![fill; geometry.len()],
            geometry,
        })
    }

    pub fn from_cells(geometry: GridGeometry, cells: Vec<Cell>) -> Result<Self, WorldError> {
        if cells.len() != geometry.len() {
            return Err(WorldError::InvalidGrid(format!(
                "expected {} cells, got {}",
                geometry.len(),
                cells.len()
            )));
        }
        Ok(Self { geometry, cells })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn resolution(&self) -> f64 {
        self.geometry.resolution
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Out-of-range queries return `Cell::Unknown`.
    pub fn get(&self, ix: i64, iy: i64) -> Cell {
        self.geometry
            .index(ix, iy)
            .map_or(Cell::Unknown, |i| self.cells[i])
    }

    pub fn set(&mut self, ix: i64, iy: i64, cell: Cell) -> bool {
        match self.geometry.index(ix, iy) {
            Some(i) => {
                self.cells[i] = cell;
                true
            }
            None => false,
        }
    }

    pub fn is_occupied(&self, ix: i64, iy: i64) -> bool {
        self.get(ix, iy) == Cell::Occupied
    }

    pub fn cell_at(&self, p: Vec2) -> Cell {
        let (ix, iy) = self.geometry.world_to_cell(p);
        self.get(ix, iy)
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Occupied).count()
    }

    pub fn free_cells(&self) -> Vec<(i64, i64)> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Cell::Free)
            .map(|(i, _)| self.geometry.coords(i))
            .collect()
    }

    /// Squared distance (in cells²) from every cell center to the nearest occupied cell center.
    pub fn occupied_distance_sq(&self) -> Vec<f64> {
        let mask: Vec<bool> = self.cells.iter().map(|c| *c == Cell::Occupied).collect();
        squared_distance_transform(self.geometry.width, self.geometry.height, &mask)
    }
}

/// One cell visited by a ray, with the entry and exit distances in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayCell {
    pub ix: i64,
    pub iy: i64,
    pub t_enter: f64,
    pub t_exit: f64,
}

/// Cell-by-cell traversal of a ray (Amanatides–Woo). Yields cells in order of
/// distance until the ray leaves the grid or passes `max_t`.
pub struct RayCells<'a> {
    geometry: &'a GridGeometry,
    ix: i64,
    iy: i64,
    step_x: i64,
    step_y: i64,
    t_max_x: f64,
    t_max_y: f64,
    t_delta_x: f64,
    t_delta_y: f64,
    t: f64,
    max_t: f64,
    done: bool,
}

impl<'a> RayCells<'a> {
    pub fn new(geometry: &'a GridGeometry, origin: Vec2, angle: f64, max_t: f64) -> Self {
        let res = geometry.resolution;
        let g = geometry.world_to_grid(origin);
        let dir = Vec2::from_angle(angle - geometry.origin.theta);
        let ix = g.x.floor() as i64;
        let iy = g.y.floor() as i64;
        let axis = |pos: f64, cell: i64, d: f64| -> (i64, f64, f64) {
            if d > 0.0 {
                (1, ((cell + 1) as f64 - pos) / d * res, res / d)
            } else if d < 0.0 {
                (-1, (pos - cell as f64) / -d * res, res / -d)
            } else {
                (0, f64::INFINITY, f64::INFINITY)
            }
        };
        let (step_x, t_max_x, t_delta_x) = axis(g.x, ix, dir.x);
        let (step_y, t_max_y, t_delta_y) = axis(g.y, iy, dir.y);
        Self {
            geometry,
            ix,
            iy,
            step_x,
            step_y,
            t_max_x,
            t_max_y,
            t_delta_x,
            t_delta_y,
            t: 0.0,
            max_t,
            done: false,
        }
    }
}

impl Iterator for RayCells<'_> {
    type Item = RayCell;

    fn next(&mut self) -> Option<RayCell> {
        if self.done || self.t > self.max_t || !self.geometry.in_bounds(self.ix, self.iy) {
            self.done = true;
            return None;
        }
        let t_exit = self.t_max_x.min(self.t_max_y);
        let out = RayCell {
            ix: self.ix,
            iy: self.iy,
            t_enter: self.t,
            t_exit,
        };
        if self.t_max_x < self.t_max_y {
            self.ix += self.step_x;
            self.t = self.t_max_x;
            self.t_max_x += self.t_delta_x;
        } else {
            self.iy += self.step_y;
            self.t = self.t_max_y;
            self.t_max_y += self.t_delta_y;
        }
        if !t_exit.is_finite() {
            self.done = true;
        }
        Some(out)
    }
}

/// Exact squared Euclidean distance transform (separable lower-envelope
/// method, one pass over columns then one over rows). Entries are in cells²;
/// cells with no feature anywhere get `f64::INFINITY`.
pub fn squared_distance_transform(width: usize, height: usize, features: &[bool]) -> Vec<f64> {
    assert_eq!(features.len(), width * height);
    let mut columns = vec![f64::INFINITY; width * height];
    let mut f = vec![0.0; height];
    let mut out = vec![0.0; height];
    for x in 0..width {
        for y in 0..height {
            f[y] = if features[y * width + x] { 0.0 } else { f64::INFINITY };
        }
        lower_envelope_1d(&f, &mut out);
        for y in 0..height {
            columns[y * width + x] = out[y];
        }
    }
    let mut result = vec![f64::INFINITY; width * height];
    let mut out = vec![0.0; width];
    for y in 0..height {
        let row = &columns[y * width..(y + 1) * width];
        lower_envelope_1d(row, &mut out);
        result[y * width..(y + 1) * width].copy_from_slice(&out);
    }
    result
}

/// 1D squared-distance transform of a sampled function: `out[q] = min_p (q-p)² + f[p]`
/// over sites with finite `f[p]`.
fn lower_envelope_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&p| f[p].is_finite()).collect();
    if sites.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut v: Vec<usize> = Vec::with_capacity(sites.len());
    let mut z: Vec<f64> = Vec::with_capacity(sites.len() + 1);
    let intersect = |q: usize, p: usize| -> f64 {
        let (qf, pf) = (q as f64, p as f64);
        ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf)
    };
    for &q in &sites {
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.clear();
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let s = intersect(q, p);
                    if s <= z[v.len() - 1] {
                        v.pop();
                        z.pop();
                        if v.is_empty() {
                            continue;
                        }
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    z.push(f64::INFINITY);
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k] as f64;
        *o = (qf - p) * (qf - p) + f[v[k]];
    }
}
