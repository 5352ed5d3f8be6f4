use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wayfinder::geometry::{linspace, normalize_angle, ConvexPolygon, Pose2D, Twist2D, Vec2};
use wayfinder::perception::ReachBox;
use wayfinder::planning::{
    astar, dwa_plan, evaluate_commands, inflate, merge_footprint, CompositeFootprint, CostCell, Costmap, DwaConfig,
    GlobalPath, PlanningError,
};
use wayfinder::world::{step_robot, Cell, OccupancyGrid};

pub fn random_grid(rng: &mut ChaCha8Rng, n: usize, density: f64, res: f64) -> OccupancyGrid {
    let mut g = OccupancyGrid::new(n, n, res, Pose2D::identity(), Cell::Free).unwrap();
    for iy in 0..n as i64 {
        for ix in 0..n as i64 {
            if rng.random::<f64>() < density {
                g.set(ix, iy, Cell::Occupied);
            }
        }
    }
    g
}

pub fn random_open_cell(rng: &mut ChaCha8Rng, cm: &Costmap) -> (i64, i64) {
    let g = cm.geometry();
    loop {
        let c = (rng.random_range(0..g.width as i64), rng.random_range(0..g.height as i64));
        if !cm.is_lethal(c.0, c.1) {
            return c;
        }
    }
}

pub fn center(cm: &Costmap, c: (i64, i64)) -> Pose2D {
    Pose2D::from_position(cm.geometry().cell_center(c.0, c.1), 0.0)
}

/// Cost of entering a cell, as plain f64.
pub fn entry_cost(cm: &Costmap, c: (i64, i64)) -> Option<f64> {
    match cm.get(c.0, c.1) {
        CostCell::Lethal => None,
        CostCell::Inflated => Some(25.0),
        CostCell::Free => Some(1.0),
    }
}

/// Dijkstra over the 8-neighborhood with no lethal corner cutting; costs as
/// (straight, diagonal) integer pairs ordered by their real value.
pub fn dijkstra(cm: &Costmap, s: (i64, i64), t: (i64, i64)) -> Option<(u64, u64)> {
    let g = cm.geometry();
    let w = g.width as i64;
    let key = |c: (u64, u64)| c.0 as f64 + c.1 as f64 * 2f64.sqrt();
    let mut dist = vec![None::<(u64, u64)>; g.len()];
    let mut heap = BinaryHeap::new();
    dist[(s.1 * w + s.0) as usize] = Some((0, 0));
    heap.push(Reverse((ordered(key((0, 0))), 0u64, 0u64, s.0, s.1)));
    while let Some(Reverse((_, a, b, x, y))) = heap.pop() {
        if dist[(y * w + x) as usize] != Some((a, b)) {
            continue;
        }
        if (x, y) == t {
            return Some((a, b));
        }
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let n = (x + dx, y + dy);
                let Some(c) = entry_cost(cm, n) else { continue };
                let diag = dx != 0 && dy != 0;
                if diag && (cm.is_lethal(x + dx, y) || cm.is_lethal(x, y + dy)) {
                    continue;
                }
                let cand = if diag { (a, b + c as u64) } else { (a + c as u64, b) };
                let slot = &mut dist[(n.1 * w + n.0) as usize];
                if slot.is_none_or(|old| key(cand) < key(old)) {
                    *slot = Some(cand);
                    heap.push(Reverse((ordered(key(cand)), cand.0, cand.1, n.0, n.1)));
                }
            }
        }
    }
    None
}

pub fn ordered(x: f64) -> u64 {
    x.to_bits()
}

pub fn octile(a: (i64, i64), b: (i64, i64)) -> f64 {
    let dx = (a.0 - b.0).abs() as f64;
    let dy = (a.1 - b.1).abs() as f64;
    dx.max(dy) - dx.min(dy) + dx.min(dy) * 2f64.sqrt()
}

pub fn room_with_boxes(rng: &mut ChaCha8Rng) -> OccupancyGrid {
    let n = 60;
    let mut g = OccupancyGrid::new(n, n, 0.1, Pose2D::identity(), Cell::Free).unwrap();
    for i in 0..n as i64 {
        for (x, y) in [(i, 0), (i, n as i64 - 1), (0, i), (n as i64 - 1, i)] {
            g.set(x, y, Cell::Occupied);
        }
    }
    for _ in 0..rng.random_range(3..9) {
        let (x0, y0) = (rng.random_range(2..50), rng.random_range(2..50));
        let (w, h) = (rng.random_range(1..8), rng.random_range(1..8));
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                g.set(x, y, Cell::Occupied);
            }
        }
    }
    g
}

pub fn user_box(offset: Vec2, heading: f64, reach: &ReachBox) -> ConvexPolygon {
    let pose = Pose2D::from_position(offset, heading);
    ConvexPolygon::new(reach.corners().iter().map(|c| pose.transform_point(*c)).collect()).unwrap()
}

pub struct Scene {
    pub cm: Costmap,
    pub pose: Pose2D,
    pub current: Twist2D,
    pub path: GlobalPath,
    pub fp: CompositeFootprint,
}

pub fn random_scene(rng: &mut ChaCha8Rng) -> Scene {
    loop {
        let g = room_with_boxes(rng);
        let cm = inflate(&g, 0.2).unwrap();
        let pose = Pose2D::new(rng.random_range(0.5..5.5), rng.random_range(0.5..5.5), rng.random_range(-3.1..3.1));
        let goal = Pose2D::new(rng.random_range(0.5..5.5), rng.random_range(0.5..5.5), 0.0);
        let body = ConvexPolygon::regular(Vec2::ZERO, 0.18, 8).unwrap();
        if wayfinder::planning::footprint_collides(&cm, &merge_footprint(&body, None), &pose) {
            continue;
        }
        let Ok(path) = astar(&cm, &pose, &goal) else { continue };
        let cfg = DwaConfig::default();
        let current = Twist2D::new(
            rng.random_range(0.0..cfg.limits.v_max),
            rng.random_range(-cfg.limits.omega_max..cfg.limits.omega_max),
        );
        let user = if rng.random_bool(0.8) {
            let off = Vec2::new(rng.random_range(-0.8..-0.4), rng.random_range(-0.5..-0.2));
            Some(user_box(off, rng.random_range(-0.5..0.5), &ReachBox::default()))
        } else {
            None
        };
        let fp = merge_footprint(&body, user.as_ref());
        return Scene { cm, pose, current, path, fp };
    }
}

/// Time of the first dense sample whose footprint overlaps a lethal cell,
/// checking every lethal cell of the map.
pub fn dense_collision(cm: &Costmap, pose: &Pose2D, cmd: &Twist2D, fp: &CompositeFootprint, horizon: f64, dt: f64) -> Option<f64> {
    let g = cm.geometry();
    let lethal: Vec<_> = (0..g.len()).filter(|&i| cm.cells()[i] == CostCell::Lethal).map(|i| g.coords(i)).collect();
    let steps = (horizon / dt).round() as usize;
    (1..=steps).map(|k| k as f64 * dt).find(|&t| {
        let p = step_robot(pose, cmd, t);
        fp.polygons().iter().any(|poly| {
            let w = poly.transformed(&p);
            lethal.iter().any(|&(x, y)| w.overlaps_rect(&g.cell_rect(x, y)))
        })
    })
}

/// Exhaustive scorer written against the definitions, not the planner internals.
pub fn oracle_command(s: &Scene, cfg: &DwaConfig) -> Twist2D {
    let l = &cfg.limits;
    let axis = |cur: f64, step: f64, lo: f64, hi: f64| {
        let (a, b) = ((cur - step).max(lo), (cur + step).min(hi));
        if a <= b { (a, b) } else { (cur.clamp(lo, hi), cur.clamp(lo, hi)) }
    };
    let (v0, v1) = axis(s.current.v, l.a_max * cfg.dt_cmd, l.v_min, l.v_max);
    let (w0, w1) = axis(s.current.omega, l.alpha_max * cfg.dt_cmd, -l.omega_max, l.omega_max);

    let here = s.pose.position();
    let wps = &s.path.waypoints;
    let nearest = (0..wps.len())
        .fold((0, f64::INFINITY), |(bi, bd), i| {
            let d = wps[i].distance(here);
            if d < bd { (i, d) } else { (bi, bd) }
        })
        .0;
    let target = wps[nearest..]
        .iter()
        .take_while(|w| w.distance(here) <= cfg.lookahead)
        .last()
        .copied()
        .unwrap_or(wps[nearest]);

    let g = s.cm.geometry();
    let lethal: Vec<_> = (0..g.len()).filter(|&i| s.cm.cells()[i] == CostCell::Lethal).map(|i| g.coords(i)).collect();
    let steps = (cfg.horizon / cfg.dt_rollout).round() as usize;
    struct Cand { cmd: Twist2D, h: f64, c: f64, v: f64 }
    let mut cands = Vec::new();
    for v in linspace(v0, v1, cfg.v_samples) {
        for w in linspace(w0, w1, cfg.omega_samples) {
            let cmd = Twist2D::new(v, w);
            let ttc = (1..=steps).map(|k| k as f64 * cfg.dt_rollout).find(|&t| {
                let p = step_robot(&s.pose, &cmd, t);
                s.fp.polygons().iter().any(|poly| {
                    let wp = poly.transformed(&p);
                    lethal.iter().any(|&(x, y)| wp.overlaps_rect(&g.cell_rect(x, y)))
                })
            });
            if let Some(t) = ttc {
                if v * v / (2.0 * l.a_max) > v.abs() * t || w * w / (2.0 * l.alpha_max) > w.abs() * t {
                    continue;
                }
            }
            let p = step_robot(&s.pose, &cmd, cfg.heading_time);
            let d = target - p.position();
            let h = 1.0 - normalize_angle(d.y.atan2(d.x) - p.theta).abs() / std::f64::consts::PI;
            let c = ttc.unwrap_or(cfg.horizon).min(cfg.horizon) / cfg.horizon;
            cands.push(Cand { cmd, h, c, v });
        }
    }
    if cands.is_empty() {
        let d = target - here;
        let e = normalize_angle(d.y.atan2(d.x) - s.pose.theta);
        return Twist2D::new(0.0, if e < 0.0 { -cfg.recovery_omega } else { cfg.recovery_omega });
    }
    let range = |f: &dyn Fn(&Cand) -> f64| {
        let lo = cands.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = cands.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let norm = |x: f64, (lo, hi): (f64, f64)| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 };
    let (rh, rc, rv) = (range(&|c| c.h), range(&|c| c.c), range(&|c| c.v));
    let scores: Vec<f64> = cands
        .iter()
        .map(|k| cfg.alpha * norm(k.h, rh) + cfg.beta * norm(k.c, rc) + cfg.gamma * norm(k.v, rv))
        .collect();
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * (cfg.alpha + cfg.beta + cfg.gamma);
    let mut pick: Option<Twist2D> = None;
    for (k, sc) in cands.iter().zip(&scores) {
        if *sc < best - tol {
            continue;
        }
        let better = match pick {
            None => true,
            Some(p) => (k.cmd.omega.abs(), k.cmd.v, k.cmd.omega) < (p.omega.abs(), p.v, p.omega),
        };
        if better {
            pick = Some(k.cmd);
        }
    }
    pick.unwrap()
}

pub fn dwa_oracle_trials(n: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = DwaConfig::default();
    (0..n)
        .filter(|_| {
            let s = random_scene(&mut rng);
            dwa_plan(&s.pose, &s.current, &s.path, &s.cm, &s.fp, &cfg) == oracle_command(&s, &cfg)
        })
        .count()
}

pub fn admissible_set(s: &Scene, fp: &CompositeFootprint, cfg: &DwaConfig) -> Vec<Twist2D> {
    evaluate_commands(&s.pose, &s.current, &s.path, &s.cm, fp, cfg)
        .into_iter()
        .filter(|c| c.admissible)
        .map(|c| c.cmd)
        .collect()
}

/// A* against the Dijkstra oracle on seeded random grids. Returns the number
/// of trials that ended in NoPath.
pub fn check_astar(trials: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut no_path = 0;
    for trial in 0..trials {
        let g = random_grid(&mut rng, 20, 0.3, 1.0);
        let cm = inflate(&g, if trial % 2 == 0 { 0.0 } else { 1.0 }).unwrap();
        if cm.lethal_count() == cm.cells().len() {
            continue;
        }
        let (s, t) = (random_open_cell(&mut rng, &cm), random_open_cell(&mut rng, &cm));
        let oracle = dijkstra(&cm, s, t);
        match astar(&cm, &center(&cm, s), &center(&cm, t)) {
            Ok(path) => {
                let o = oracle.ok_or(format!("trial {trial}: oracle found no path"))?;
                if (path.cost.straight, path.cost.diagonal) != o {
                    return Err(format!("trial {trial}: cost {:?} vs oracle {o:?}", path.cost));
                }
                if path.cells.first() != Some(&s) || path.cells.last() != Some(&t) {
                    return Err(format!("trial {trial}: endpoints"));
                }
                // consecutive cells adjacent, heuristic below the remaining cost
                let mut remaining = path.total_cost;
                for pair in path.cells.windows(2) {
                    let (a, b) = (pair[0], pair[1]);
                    if !((a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1 && a != b) {
                        return Err(format!("trial {trial}: {a:?} -> {b:?} not adjacent"));
                    }
                    if octile(a, t) > remaining + 1e-9 {
                        return Err(format!("trial {trial}: heuristic overestimates at {a:?}"));
                    }
                    let c = entry_cost(&cm, b).unwrap();
                    remaining -= if a.0 != b.0 && a.1 != b.1 { c * 2f64.sqrt() } else { c };
                }
                if remaining.abs() > 1e-9 {
                    return Err(format!("trial {trial}: total cost off by {remaining}"));
                }
            }
            Err(PlanningError::NoPath) => {
                if oracle.is_some() {
                    return Err(format!("trial {trial}: NoPath but oracle found {oracle:?}"));
                }
                no_path += 1;
            }
            Err(e) => return Err(format!("trial {trial}: {e}")),
        }
    }
    Ok(no_path)
}

/// Inflation against brute-force disk membership. Returns the number of cells compared.
pub fn check_inflation(trials: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = 0;
    for trial in 0..trials {
        let n = rng.random_range(5..30);
        let density = rng.random_range(0.0..0.2);
        let mut g = random_grid(&mut rng, n, density, 0.1);
        if trial % 5 == 0 {
            g.set(0, 0, Cell::Unknown);
        }
        let radius = rng.random_range(0..6) as f64 * 0.05;
        let cm = inflate(&g, radius).unwrap();
        let lethal: Vec<(i64, i64)> = (0..n as i64)
            .flat_map(|y| (0..n as i64).map(move |x| (x, y)))
            .filter(|&(x, y)| g.get(x, y) != Cell::Free)
            .collect();
        for y in 0..n as i64 {
            for x in 0..n as i64 {
                let expected = if g.get(x, y) != Cell::Free {
                    CostCell::Lethal
                } else {
                    let near = lethal.iter().any(|&(lx, ly)| {
                        let d2 = ((lx - x).pow(2) + (ly - y).pow(2)) as f64;
                        d2 <= (radius / 0.1) * (radius / 0.1)
                    });
                    if near { CostCell::Inflated } else { CostCell::Free }
                };
                if cm.get(x, y) != expected {
                    return Err(format!("trial {trial} cell ({x}, {y}): {:?} vs {expected:?}", cm.get(x, y)));
                }
                cells += 1;
            }
        }
    }
    Ok(cells)
}
