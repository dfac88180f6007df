//! Maximal separated nets on a patch of hyperbolic space.
//!
//! The sampler throws darts uniformly into the domain ball, keeping those
//! at least epsilon from every accepted point, then walks a canonical probe
//! lattice and greedily inserts every probe still uncovered by the epsilon
//! balls. The result is epsilon-separated and, by construction, leaves no
//! probe point of the domain farther than epsilon from a sample. Everything
//! is deterministic given the seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GeomError, Result};
use crate::grid::BucketGrid;
use crate::kernel::{from_poincare, hdist, mdot, to_poincare, translate_along, HPoint};
use crate::volume::ball_volume;

/// A geodesic ball domain with a boundary margin band. Quality guarantees
/// apply only to the shrunk ball of radius `radius - margin`.
#[derive(Debug, Clone)]
pub struct PatchDomain {
    pub center: HPoint,
    pub radius: f64,
    pub margin: f64,
}

impl PatchDomain {
    pub fn new(center: HPoint, radius: f64, margin: f64) -> Result<Self> {
        if !(radius.is_finite() && margin.is_finite() && radius > margin && margin > 0.0) {
            return Err(GeomError::InvalidArgument(format!(
                "patch domain needs radius > margin > 0, got radius={radius} margin={margin}"
            )));
        }
        Ok(PatchDomain {
            center,
            radius,
            margin,
        })
    }

    /// Radius of the region carrying quality guarantees.
    pub fn shrunk_radius(&self) -> f64 {
        self.radius - self.margin
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Whether a point lies in the shrunk (guaranteed) region.
    pub fn is_interior(&self, p: &HPoint) -> bool {
        hdist(&self.center, p) <= self.shrunk_radius()
    }
}

/// An indexed point set with its separation parameter and sampling seed.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub points: Vec<HPoint>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Draws a radius in `[0, r_max]` with density proportional to the sphere
/// area, i.e. uniformly in hyperbolic volume, by bisecting the volume CDF.
fn sample_radius(rng: &mut ChaCha8Rng, n: usize, r_max: f64) -> f64 {
    let total = ball_volume(n, r_max);
    let target = rng.random::<f64>() * total;
    let (mut lo, mut hi) = (0.0, r_max);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ball_volume(n, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Uniform direction on the unit sphere of the tangent space.
fn sample_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Point at hyperbolic distance `r` from the origin in direction `u`.
fn point_at(n: usize, r: f64, u: &[f64]) -> HPoint {
    let mut c = Vec::with_capacity(n + 1);
    c.push(r.cosh());
    c.extend(u.iter().map(|x| r.sinh() * x));
    HPoint::new(c).expect("radial point is on the hyperboloid")
}

/// Uniform point in the hyperbolic ball of radius `r_max` around the origin.
pub(crate) fn sample_in_origin_ball(rng: &mut ChaCha8Rng, n: usize, r_max: f64) -> HPoint {
    let r = sample_radius(rng, n, r_max);
    let u = sample_direction(rng, n);
    point_at(n, r, &u)
}

/// The canonical probe lattice for a ball of radius `radius` around the
/// origin: a Euclidean lattice in Poincaré coordinates whose spacing keeps
/// neighboring probes within hyperbolic distance `epsilon / 10`. Calls
/// `visit` with each probe's Poincaré coordinates, in lexicographic order.
fn for_each_probe(n: usize, radius: f64, epsilon: f64, mut visit: impl FnMut(&[f64])) {
    let s_max = (radius / 2.0).tanh();
    // Euclidean step g: segment of length g at |x| <= s_max has hyperbolic
    // length at most 2g/(1 - s_max^2); keep that below epsilon/10.
    let g = 0.99 * (epsilon / 10.0) * (1.0 - s_max * s_max) / 2.0;
    let steps = (s_max / g).ceil() as i64;
    let mut idx = vec![-steps; n];
    let mut x = vec![0.0; n];
    'outer: loop {
        let mut norm2 = 0.0;
        for i in 0..n {
            x[i] = idx[i] as f64 * g;
            norm2 += x[i] * x[i];
        }
        if norm2 < s_max * s_max {
            visit(&x);
        }
        for i in 0..n {
            idx[i] += 1;
            if idx[i] <= steps {
                continue 'outer;
            }
            idx[i] = -steps;
        }
        break;
    }
}

/// Generates a maximal epsilon-separated net on the domain ball.
///
/// Dart throwing seeds the set; a sweep over the canonical probe lattice
/// then inserts every probe farther than epsilon from all samples, which
/// makes the set maximal at the probe resolution (spacing epsilon/10).
/// Deterministic for a fixed `(domain, epsilon, seed)`.
pub fn sample_maximal_net(domain: &PatchDomain, epsilon: f64, seed: u64) -> Result<PointSet> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(GeomError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let n = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = BucketGrid::new(n, epsilon);
    let mut points: Vec<HPoint> = Vec::new();

    let try_accept = |grid: &mut BucketGrid, points: &mut Vec<HPoint>, p: HPoint| -> bool {
        let x = to_poincare(&p);
        for id in grid.euclid_neighbors(&x, epsilon / 2.0) {
            if hdist(&points[id as usize], &p) < epsilon {
                return false;
            }
        }
        let id = points.len() as u32;
        grid.insert(id, x);
        points.push(p);
        true
    };

    // Phase 1: dart throwing.
    let cover_est = ball_volume(n, domain.radius + epsilon) / ball_volume(n, epsilon / 2.0);
    let darts = ((4.0 * cover_est) as usize + 64).min(2_000_000);
    for _ in 0..darts {
        let p = sample_in_origin_ball(&mut rng, n, domain.radius);
        try_accept(&mut grid, &mut points, p);
    }

    // Phase 2: greedy insertion at uncovered probes.
    for_each_probe(n, domain.radius, epsilon, |x| {
        let p = from_poincare(x).expect("probe lies inside the ball");
        try_accept(&mut grid, &mut points, p);
    });

    // Translate out of the origin frame if the domain is centered elsewhere.
    let origin = HPoint::origin(n);
    if hdist(&origin, &domain.center) > 0.0 {
        for p in points.iter_mut() {
            *p = translate_along(&origin, &domain.center, p);
        }
    }

    Ok(PointSet {
        n,
        epsilon,
        seed,
        points,
    })
}

/// Smallest pairwise distance of the set (infinite for fewer than 2 points).
pub fn min_pairwise_distance(ps: &PointSet) -> f64 {
    let mut grid = BucketGrid::new(ps.n, ps.epsilon * 4.0);
    for (i, p) in ps.points.iter().enumerate() {
        grid.insert(i as u32, to_poincare(p));
    }
    let mut best = f64::INFINITY;
    for (i, p) in ps.points.iter().enumerate() {
        let x = to_poincare(p);
        for j in grid.euclid_neighbors(&x, ps.epsilon * 2.0) {
            if (j as usize) > i {
                best = best.min(hdist(p, &ps.points[j as usize]));
            }
        }
    }
    best
}

/// Checks the separation invariant: pairwise distances >= epsilon - 1e-12.
pub fn verify_separation(ps: &PointSet) -> bool {
    min_pairwise_distance(ps) >= ps.epsilon - 1e-12
}

/// Checks maximality against the canonical probe lattice of the domain:
/// every probe within `region_radius` of the center must be within epsilon
/// of a sample. Verified with an independently built index. The lattice is
/// the one the sampler itself walks, so maximality is exact at the probe
/// resolution rather than depending on how a smaller region re-grids.
pub fn verify_maximality(ps: &PointSet, domain: &PatchDomain, region_radius: f64) -> bool {
    let n = ps.n;
    let origin = HPoint::origin(n);
    let recenter = hdist(&origin, &domain.center) > 0.0;
    let mut grid = BucketGrid::new(n, ps.epsilon);
    for (i, p) in ps.points.iter().enumerate() {
        let q = if recenter {
            translate_along(&domain.center, &origin, p)
        } else {
            p.clone()
        };
        grid.insert(i as u32, to_poincare(&q));
    }
    let s_region = (region_radius / 2.0).tanh();
    let mut ok = true;
    for_each_probe(n, domain.radius, ps.epsilon, |x| {
        if !ok {
            return;
        }
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        if norm2 >= s_region * s_region {
            return;
        }
        let probe = from_poincare(x).expect("probe inside ball");
        let mut covered = false;
        for id in grid.euclid_neighbors(x, ps.epsilon / 2.0) {
            let sample = from_poincare(grid.coords_of(id)).expect("sample inside ball");
            if hdist(&sample, &probe) <= ps.epsilon {
                covered = true;
                break;
            }
        }
        if !covered {
            ok = false;
        }
    });
    ok
}

/// Displaces every point by at most `magnitude` to break exact degeneracies
/// (co-sphericity), re-verifying separation afterwards.
///
/// The effective displacement is additionally capped at a third of the
/// separation slack `min_pairwise - epsilon`, so the separation invariant
/// survives the jitter; `magnitude` remains an upper bound either way.
pub fn genericity_jitter(ps: &PointSet, magnitude: f64, seed: u64) -> Result<PointSet> {
    let delta = ps.epsilon / 10.0;
    if magnitude < 0.0 || magnitude > delta / 1000.0 {
        return Err(GeomError::InvalidArgument(format!(
            "jitter magnitude must lie in [0, delta/1000] = [0, {}], got {magnitude}",
            delta / 1000.0
        )));
    }
    if magnitude == 0.0 || ps.points.len() < 1 {
        return Ok(ps.clone());
    }
    let slack = (min_pairwise_distance(ps) - ps.epsilon).max(0.0);
    let m_eff = magnitude.min(slack / 3.0) * 0.999;
    if m_eff <= 0.0 {
        return Ok(ps.clone());
    }
    let n = ps.n;
    for attempt in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9e3779b97f4a7c15)));
        let mut moved = Vec::with_capacity(ps.points.len());
        for p in &ps.points {
            let r = m_eff * rng.random::<f64>().powf(1.0 / n as f64);
            let dir = sample_direction(&mut rng, n + 1);
            // Project the ambient direction to the tangent space at p.
            let mut t: Vec<f64> = dir.clone();
            let s = mdot(&t, p.coords());
            for (i, c) in p.coords().iter().enumerate() {
                t[i] += s * c;
            }
            let tn = mdot(&t, &t);
            if tn <= 1e-20 {
                moved.push(p.clone());
                continue;
            }
            let tn = tn.sqrt();
            let mut q = Vec::with_capacity(n + 1);
            for i in 0..=n {
                q.push(r.cosh() * p.coords()[i] + r.sinh() * t[i] / tn);
            }
            moved.push(HPoint::new(q).expect("jittered point is on the hyperboloid"));
        }
        let out = PointSet {
            n,
            epsilon: ps.epsilon,
            seed: ps.seed,
            points: moved,
        };
        if verify_separation(&out) {
            return Ok(out);
        }
    }
    Err(GeomError::SeparationViolated { attempts: 100 })
}
