use serde::{Deserialize, Serialize};

use super::PlanningError;
use crate::geometry::{ConvexPolygon, Pose2D, Vec2};
use crate::perception::ReachBox;

/// Robot body first, then the user boundary when one is present.
/// Polygons are checked separately; their union is never built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeFootprint {
    polygons: Vec<ConvexPolygon>,
}

impl CompositeFootprint {
    pub fn new(polygons: Vec<ConvexPolygon>) -> Result<Self, PlanningError> {
        if polygons.is_empty() || polygons.len() > 2 {
            return Err(PlanningError::InvalidFootprint(format!(
                "expected 1 or 2 polygons, got {}",
                polygons.len()
            )));
        }
        Ok(Self { polygons })
    }

    /// Builds from raw vertex lists, rejecting anything non-convex or degenerate.
    pub fn from_vertices(lists: Vec<Vec<Vec2>>) -> Result<Self, PlanningError> {
        let polygons = lists
            .into_iter()
            .map(ConvexPolygon::new)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(polygons)
    }

    pub fn polygons(&self) -> &[ConvexPolygon] {
        &self.polygons
    }

    pub fn robot(&self) -> &ConvexPolygon {
        &self.polygons[0]
    }

    pub fn user(&self) -> Option<&ConvexPolygon> {
        self.polygons.get(1)
    }

    pub fn robot_only(&self) -> CompositeFootprint {
        CompositeFootprint {
            polygons: vec![self.polygons[0].clone()],
        }
    }

    pub fn transformed(&self, pose: &Pose2D) -> Vec<ConvexPolygon> {
        self.polygons.iter().map(|p| p.transformed(pose)).collect()
    }
}

pub fn merge_footprint(robot: &ConvexPolygon, user_boundary: Option<&ConvexPolygon>) -> CompositeFootprint {
    let mut polygons = vec![robot.clone()];
    polygons.extend(user_boundary.cloned());
    CompositeFootprint { polygons }
}

/// Stand-in user box for when no estimate is live: the reach box grown by
/// `margin`, centered on the grip anchor and aligned with the robot.
pub fn lost_user_box(anchor_offset: Vec2, reach: &ReachBox, margin: f64) -> Result<ConvexPolygon, PlanningError> {
    let grown = reach
        .grown(margin)
        .map_err(|e| PlanningError::InvalidFootprint(e.to_string()))?;
    Ok(ConvexPolygon::rectangle(anchor_offset, grown.depth(), grown.width())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn robot() -> ConvexPolygon {
        ConvexPolygon::regular(Vec2::ZERO, 0.2, 8).unwrap()
    }

    #[test]
    fn merge_orders_polygons() {
        assert_eq!(merge_footprint(&robot(), None).polygons().len(), 1);
        let user = ConvexPolygon::rectangle(Vec2::new(-0.5, -0.4), 0.7, 0.7).unwrap();
        let fp = merge_footprint(&robot(), Some(&user));
        assert_eq!(fp.polygons(), &[robot(), user.clone()]);
        assert_eq!(fp.user(), Some(&user));
        assert_eq!(fp.robot_only().polygons().len(), 1);
    }

    #[test]
    fn non_convex_boundary_rejected() {
        let body: Vec<Vec2> = robot().vertices().to_vec();
        let dart = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.5),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.3, 0.5),
        ];
        assert!(CompositeFootprint::from_vertices(vec![body.clone(), dart]).is_err());
        assert!(CompositeFootprint::new(vec![]).is_err());
        assert!(CompositeFootprint::new(vec![robot(), robot(), robot()]).is_err());
        assert!(CompositeFootprint::from_vertices(vec![body]).is_ok());
    }

    #[test]
    fn lost_box_sits_on_anchor() {
        let anchor = Vec2::new(-0.55, -0.35);
        let b = lost_user_box(anchor, &ReachBox::default(), 0.1).unwrap();
        assert!((b.area() - 0.81).abs() < 1e-12);
        assert!(b.centroid_of_vertices().distance(anchor) < 1e-12);
    }
}
