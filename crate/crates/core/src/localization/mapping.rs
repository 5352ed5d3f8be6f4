use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Pose2D;
use crate::world::{cast_lidar, Cell, GridGeometry, LidarScan, LidarSpec, OccupancyGrid, RayCells, WorldError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogOddsParams {
    pub l_occ: f64,
    pub l_free: f64,
    pub l_min: f64,
    pub l_max: f64,
}

impl Default for LogOddsParams {
    fn default() -> Self {
        Self {
            l_occ: 0.85,
            l_free: -0.4,
            l_min: -5.0,
            l_max: 5.0,
        }
    }
}

/// Per-cell occupancy log-odds; zero means no information.
#[derive(Debug, Clone, PartialEq)]
pub struct LogOddsGrid {
    geometry: GridGeometry,
    cells: Vec<f64>,
    params: LogOddsParams,
}

impl LogOddsGrid {
    pub fn new(geometry: GridGeometry, params: LogOddsParams) -> Self {
        Self {
            cells: vec![0.0; geometry.len()],
            geometry,
            params,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn params(&self) -> &LogOddsParams {
        &self.params
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, ix: i64, iy: i64) -> Option<f64> {
        self.geometry.index(ix, iy).map(|i| self.cells[i])
    }

    fn add(&mut self, ix: i64, iy: i64, delta: f64) {
        if let Some(i) = self.geometry.index(ix, iy) {
            self.cells[i] = (self.cells[i] + delta).clamp(self.params.l_min, self.params.l_max);
        }
    }

    /// Integrates one scan taken by a sensor at `sensor_pose`.
    pub fn integrate(&mut self, sensor_pose: &Pose2D, scan: &LidarScan) {
        let origin = sensor_pose.position();
        let (l_free, l_occ) = (self.params.l_free, self.params.l_occ);
        for (i, &r) in scan.ranges.iter().enumerate() {
            let angle = sensor_pose.theta + scan.beam_angle(i);
            let hit = r < scan.max_range;
            let geometry = self.geometry;
            for c in RayCells::new(&geometry, origin, angle, r) {
                if c.t_enter > r || (!hit && c.t_enter >= r) {
                    break;
                }
                if hit && r < c.t_exit {
                    self.add(c.ix, c.iy, l_occ);
                    break;
                }
                self.add(c.ix, c.iy, l_free);
            }
        }
    }

    /// Positive log-odds map to occupied, negative to free, zero to unknown.
    pub fn threshold(&self) -> OccupancyGrid {
        let cells = self
            .cells
            .iter()
            .map(|&l| {
                if l > 0.0 {
                    Cell::Occupied
                } else if l < 0.0 {
                    Cell::Free
                } else {
                    Cell::Unknown
                }
            })
            .collect();
        OccupancyGrid::from_cells(self.geometry, cells).expect("same geometry")
    }
}

/// Functional form of [`LogOddsGrid::integrate`] with the scan taken at `pose`.
pub fn update_map(grid: &LogOddsGrid, pose: &Pose2D, scan: &LidarScan) -> LogOddsGrid {
    let mut out = grid.clone();
    out.integrate(pose, scan);
    out
}

/// Maps `truth` by scanning from each robot pose (ground-truth poses).
pub fn build_map<R: Rng + ?Sized>(
    truth: &OccupancyGrid,
    robot_poses: &[Pose2D],
    spec: &LidarSpec,
    lidar_extrinsics: &Pose2D,
    params: LogOddsParams,
    noise: &mut R,
) -> Result<OccupancyGrid, WorldError> {
    let mut grid = LogOddsGrid::new(*truth.geometry(), params);
    for pose in robot_poses {
        let sensor = pose.compose(lidar_extrinsics);
        let scan = cast_lidar(truth, &sensor, spec, noise)?;
        grid.integrate(&sensor, &scan);
    }
    Ok(grid.threshold())
}
