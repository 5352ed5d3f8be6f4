use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LikelihoodField, LocalizationError};
use crate::geometry::{normalize_angle, Pose2D, Vec2};
use crate::rng::gaussian;
use crate::world::{Cell, LidarScan, OccupancyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub pose: Pose2D,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    pub w_slow: f64,
    pub w_fast: f64,
}

impl ParticleSet {
    /// `n` equally weighted particles spread uniformly over the free cells of `map`.
    pub fn uniform<R: Rng + ?Sized>(n: usize, map: &OccupancyGrid, rng: &mut R) -> Result<Self, LocalizationError> {
        if n < 2 {
            return Err(LocalizationError::TooFewParticles(n));
        }
        let free = map.free_cells();
        if free.is_empty() {
            return Err(LocalizationError::NoFreeSpace);
        }
        let w = 1.0 / n as f64;
        let particles = (0..n)
            .map(|_| Particle {
                pose: random_free_pose(map, &free, rng),
                weight: w,
            })
            .collect();
        Ok(Self {
            particles,
            w_slow: 0.0,
            w_fast: 0.0,
        })
    }

    /// `n` particles at one known pose.
    pub fn at_pose(n: usize, pose: Pose2D) -> Result<Self, LocalizationError> {
        if n < 2 {
            return Err(LocalizationError::TooFewParticles(n));
        }
        Ok(Self {
            particles: vec![Particle { pose, weight: 1.0 / n as f64 }; n],
            w_slow: 0.0,
            w_fast: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    pub fn effective_sample_size(&self) -> f64 {
        let s: f64 = self.particles.iter().map(|p| p.weight * p.weight).sum();
        1.0 / s
    }
}

fn random_free_pose<R: Rng + ?Sized>(map: &OccupancyGrid, free: &[(i64, i64)], rng: &mut R) -> Pose2D {
    let (ix, iy) = free[rng.random_range(0..free.len())];
    let res = map.resolution();
    let corner = map.geometry().cell_center(ix, iy) - Vec2::new(res / 2.0, res / 2.0);
    let p = corner + Vec2::new(rng.random::<f64>() * res, rng.random::<f64>() * res);
    let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    Pose2D::from_position(p, theta)
}

/// Odometry motion model noise: `alpha1` rotation from rotation, `alpha2`
/// rotation from translation, `alpha3` translation from translation,
/// `alpha4` translation from rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionNoise {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
}

impl MotionNoise {
    pub const ZERO: MotionNoise = MotionNoise {
        alpha1: 0.0,
        alpha2: 0.0,
        alpha3: 0.0,
        alpha4: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MclConfig {
    pub motion: MotionNoise,
    /// Beams used per update, evenly spaced over the scan.
    pub beams_used: usize,
    pub alpha_slow: f64,
    pub alpha_fast: f64,
    /// Resample when the effective sample size drops below this fraction of N.
    pub resample_fraction: f64,
    /// Particles outside free map cells get zero likelihood.
    pub reject_non_free: bool,
    /// Exponent applied to each scan likelihood before weighting.
    pub likelihood_exponent: f64,
}

impl Default for MclConfig {
    fn default() -> Self {
        Self {
            motion: MotionNoise {
                alpha1: 0.05,
                alpha2: 0.02,
                alpha3: 0.05,
                alpha4: 0.02,
            },
            beams_used: 30,
            alpha_slow: 0.001,
            alpha_fast: 0.1,
            resample_fraction: 0.5,
            reject_non_free: true,
            likelihood_exponent: 1.0,
        }
    }
}

fn sample_motion<R: Rng + ?Sized>(pose: &Pose2D, delta: &Pose2D, noise: &MotionNoise, rng: &mut R) -> Pose2D {
    let mut trans = delta.x.hypot(delta.y);
    let mut rot1 = if trans < 1e-9 { 0.0 } else { delta.y.atan2(delta.x) };
    // Backward motion: keep rot1 small and let the translation carry the sign.
    if rot1.abs() > std::f64::consts::FRAC_PI_2 {
        rot1 = normalize_angle(rot1 + std::f64::consts::PI);
        trans = -trans;
    }
    let rot2 = normalize_angle(delta.theta - rot1);
    let n = noise;
    let r1 = rot1 - gaussian(rng, (n.alpha1 * rot1 * rot1 + n.alpha2 * trans * trans).sqrt());
    let t = trans - gaussian(rng, (n.alpha3 * trans * trans + n.alpha4 * (rot1 * rot1 + rot2 * rot2)).sqrt());
    let r2 = rot2 - gaussian(rng, (n.alpha1 * rot2 * rot2 + n.alpha2 * trans * trans).sqrt());
    let heading = pose.theta + r1;
    Pose2D::new(pose.x + t * heading.cos(), pose.y + t * heading.sin(), heading + r2)
}

/// Systematic resampling: `m` indices drawn with one random offset.
pub fn low_variance_resample<R: Rng + ?Sized>(weights: &[f64], m: usize, rng: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(m);
    if m == 0 || weights.is_empty() {
        return out;
    }
    let total: f64 = weights.iter().sum();
    let step = total / m as f64;
    let r = rng.random::<f64>() * step;
    let mut c = weights[0];
    let mut i = 0;
    for k in 0..m {
        let u = r + k as f64 * step;
        while u > c && i + 1 < weights.len() {
            i += 1;
            c += weights[i];
        }
        out.push(i);
    }
    out
}

/// Product of endpoint likelihoods and the number of beams that contributed.
fn scan_likelihood(
    pose: &Pose2D,
    scan: &LidarScan,
    beams: &[usize],
    lidar_extrinsics: &Pose2D,
    field: &LikelihoodField,
) -> (f64, usize) {
    let sensor = pose.compose(lidar_extrinsics);
    let origin = sensor.position();
    let mut q = 1.0;
    let mut k = 0;
    for &i in beams {
        let r = scan.ranges[i];
        if r >= scan.max_range {
            continue;
        }
        let end = origin + Vec2::from_angle(sensor.theta + scan.beam_angle(i)) * r;
        q *= field.at(end);
        k += 1;
    }
    (q, k)
}

fn decimate(n_beams: usize, used: usize) -> Vec<usize> {
    if used == 0 || n_beams == 0 {
        return Vec::new();
    }
    let used = used.min(n_beams);
    (0..used).map(|k| k * n_beams / used).collect()
}

/// Low-variance resampling with uniform injection at rate `max(0, 1 - w_fast/w_slow)`.
fn resample<R: Rng + ?Sized>(ps: &ParticleSet, map: &OccupancyGrid, rng: &mut R) -> Result<Vec<Particle>, LocalizationError> {
    let n = ps.len();
    let p_inject = if ps.w_slow > 0.0 { (1.0 - ps.w_fast / ps.w_slow).max(0.0) } else { 0.0 };
    let inject: Vec<bool> = (0..n).map(|_| p_inject > 0.0 && rng.random::<f64>() < p_inject).collect();
    let n_inject = inject.iter().filter(|b| **b).count();
    let weights: Vec<f64> = ps.particles.iter().map(|p| p.weight).collect();
    let mut picks = low_variance_resample(&weights, n - n_inject, rng).into_iter();
    let free = if n_inject > 0 { map.free_cells() } else { Vec::new() };
    if n_inject > 0 && free.is_empty() {
        return Err(LocalizationError::NoFreeSpace);
    }
    let w = 1.0 / n as f64;
    Ok(inject
        .iter()
        .map(|&injected| Particle {
            pose: if injected {
                random_free_pose(map, &free, rng)
            } else {
                ps.particles[picks.next().expect("one pick per kept slot")].pose
            },
            weight: w,
        })
        .collect())
}

/// One cycle of augmented MCL.
///
/// The resampling decided by the previous update (effective sample size
/// below `resample_fraction·N`) is carried out at the start of this one, so
/// the returned set always carries the weights of the latest scan and
/// freshly injected particles never count at full weight in the estimate.
#[allow(clippy::too_many_arguments)]
pub fn mcl_step<R: Rng + ?Sized>(
    ps: &ParticleSet,
    odom_delta: &Pose2D,
    scan: Option<&LidarScan>,
    field: &LikelihoodField,
    map: &OccupancyGrid,
    lidar_extrinsics: &Pose2D,
    cfg: &MclConfig,
    rng: &mut R,
) -> Result<ParticleSet, LocalizationError> {
    let n = ps.len();
    if n < 2 {
        return Err(LocalizationError::TooFewParticles(n));
    }
    let mut particles = if ps.effective_sample_size() < cfg.resample_fraction * n as f64 {
        resample(ps, map, rng)?
    } else {
        ps.particles.clone()
    };
    for p in &mut particles {
        p.pose = sample_motion(&p.pose, odom_delta, &cfg.motion, rng);
    }
    let Some(scan) = scan else {
        return Ok(ParticleSet {
            particles,
            ..ps.clone()
        });
    };

    let beams = decimate(scan.n_beams, cfg.beams_used);
    let prior_total: f64 = particles.iter().map(|p| p.weight).sum();
    let mut w_avg = 0.0;
    for p in &mut particles {
        let (mut q, k) = scan_likelihood(&p.pose, scan, &beams, lidar_extrinsics, field);
        if cfg.reject_non_free && map.cell_at(p.pose.position()) != Cell::Free {
            q = 0.0;
        }
        // per-beam geometric mean, so the averages do not swing with the valid beam count
        let per_beam = if k > 0 { q.powf(1.0 / k as f64) } else { q };
        w_avg += p.weight / prior_total * per_beam;
        p.weight *= if cfg.likelihood_exponent == 1.0 { q } else { q.powf(cfg.likelihood_exponent) };
    }
    let total: f64 = particles.iter().map(|p| p.weight).sum();
    if !(total > 0.0) || !total.is_finite() {
        let reinitialized = ParticleSet::uniform(n, map, rng)?;
        return Err(LocalizationError::DegenerateBelief { reinitialized });
    }
    for p in &mut particles {
        p.weight /= total;
    }
    let (w_slow, w_fast) = if ps.w_slow == 0.0 && ps.w_fast == 0.0 {
        (w_avg, w_avg)
    } else {
        (
            ps.w_slow + cfg.alpha_slow * (w_avg - ps.w_slow),
            ps.w_fast + cfg.alpha_fast * (w_avg - ps.w_fast),
        )
    };
    Ok(ParticleSet {
        particles,
        w_slow,
        w_fast,
    })
}

/// Weighted mean position and circular weighted mean heading.
pub fn estimate_pose(ps: &ParticleSet) -> Pose2D {
    let (mut x, mut y, mut s, mut c, mut w) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in &ps.particles {
        x += p.weight * p.pose.x;
        y += p.weight * p.pose.y;
        s += p.weight * p.pose.theta.sin();
        c += p.weight * p.pose.theta.cos();
        w += p.weight;
    }
    Pose2D::new(x / w, y / w, s.atan2(c))
}
