use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use super::{Costmap, PlanningError, FREE_COST};
use crate::geometry::{Pose2D, Vec2};

/// Path cost `straight + diagonal·√2`, kept as two integer sums so that
/// comparisons are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PathCost {
    pub straight: u64,
    pub diagonal: u64,
}

impl PathCost {
    pub const ZERO: PathCost = PathCost {
        straight: 0,
        diagonal: 0,
    };

    pub fn new(straight: u64, diagonal: u64) -> Self {
        Self { straight, diagonal }
    }

    pub fn value(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    /// Octile distance between two cells at unit cost per cell.
    pub fn octile(a: (i64, i64), b: (i64, i64)) -> Self {
        let dx = a.0.abs_diff(b.0);
        let dy = a.1.abs_diff(b.1);
        let (lo, hi) = (dx.min(dy), dx.max(dy));
        Self::new((hi - lo) * FREE_COST, lo * FREE_COST)
    }
}

impl Add for PathCost {
    type Output = PathCost;
    fn add(self, o: PathCost) -> PathCost {
        PathCost::new(self.straight + o.straight, self.diagonal + o.diagonal)
    }
}

impl Ord for PathCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of x + y·√2
        let x = self.straight as i128 - other.straight as i128;
        let y = self.diagonal as i128 - other.diagonal as i128;
        match (x.cmp(&0), y.cmp(&0)) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            (Ordering::Greater, Ordering::Less) => (x * x).cmp(&(2 * y * y)),
            (Ordering::Less, Ordering::Greater) => (2 * y * y).cmp(&(x * x)),
        }
    }
}

impl PartialOrd for PathCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalPath {
    pub cells: Vec<(i64, i64)>,
    /// Cell centers in the map frame.
    pub waypoints: Vec<Vec2>,
    pub cost: PathCost,
    pub total_cost: f64,
}

/// 8-neighborhood in a fixed order. Diagonal moves must not cut a lethal corner.
fn neighbors(cm: &Costmap, (ix, iy): (i64, i64)) -> impl Iterator<Item = ((i64, i64), PathCost)> + '_ {
    const STEPS: [(i64, i64); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];
    STEPS.iter().filter_map(move |&(dx, dy)| {
        let n = (ix + dx, iy + dy);
        let c = cm.cost(n.0, n.1)?;
        if dx != 0 && dy != 0 {
            if cm.is_lethal(ix + dx, iy) || cm.is_lethal(ix, iy + dy) {
                return None;
            }
            Some((n, PathCost::new(0, c)))
        } else {
            Some((n, PathCost::new(c, 0)))
        }
    })
}

/// Minimum-cost 8-connected path. Open-list ties go to the smaller f, then the
/// smaller h, then the smaller row-major cell index.
pub fn astar(cm: &Costmap, start: &Pose2D, goal: &Pose2D) -> Result<GlobalPath, PlanningError> {
    let g = cm.geometry();
    let s = g.world_to_cell(start.position());
    let t = g.world_to_cell(goal.position());
    if cm.is_lethal(s.0, s.1) {
        return Err(PlanningError::StartBlocked(s.0, s.1));
    }
    if cm.is_lethal(t.0, t.1) {
        return Err(PlanningError::GoalBlocked(t.0, t.1));
    }
    let idx = |c: (i64, i64)| g.index(c.0, c.1).expect("non-lethal cells are in bounds");
    let n = g.len();
    let mut best: Vec<Option<PathCost>> = vec![None; n];
    let mut parent: Vec<usize> = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let (si, ti) = (idx(s), idx(t));
    best[si] = Some(PathCost::ZERO);
    let h0 = PathCost::octile(s, t);
    open.push(Reverse((h0, h0, si)));

    while let Some(Reverse((_, _, i))) = open.pop() {
        if closed[i] {
            continue;
        }
        closed[i] = true;
        if i == ti {
            break;
        }
        let gi = best[i].expect("queued cells have a cost");
        let c = g.coords(i);
        for (nc, step) in neighbors(cm, c) {
            let j = idx(nc);
            if closed[j] {
                continue;
            }
            let cand = gi + step;
            if best[j].is_none_or(|b| cand < b) {
                best[j] = Some(cand);
                parent[j] = i;
                let h = PathCost::octile(nc, t);
                open.push(Reverse((cand + h, h, j)));
            }
        }
    }

    let cost = match best[ti] {
        Some(c) if closed[ti] => c,
        _ => return Err(PlanningError::NoPath),
    };
    let mut chain = vec![ti];
    while *chain.last().unwrap() != si {
        chain.push(parent[*chain.last().unwrap()]);
    }
    chain.reverse();
    let cells: Vec<(i64, i64)> = chain.iter().map(|&i| g.coords(i)).collect();
    let waypoints = cells.iter().map(|&(x, y)| g.cell_center(x, y)).collect();
    Ok(GlobalPath {
        cells,
        waypoints,
        cost,
        total_cost: cost.value(),
    })
}
