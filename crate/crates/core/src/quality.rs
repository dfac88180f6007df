//! Simplex quality predicates: edge windows, altitudes, goodness and
//! bad-region membership.
//!
//! A k-simplex is (a,b,d)-good when every edge length lies in [a,b] and
//! every vertex altitude (distance to the hyperplane of the opposite face,
//! taken inside the simplex's own geodesic span) is at least d. Altitudes
//! shrink to zero exactly when the vertices approach a lower-dimensional
//! sphere, which is the sliver failure mode the perturber removes.

use std::collections::BTreeMap;

use crate::bounds::{h0_bound, solve_d_schedule};
use crate::error::{GeomError, Result};
use crate::kernel::{circumsphere, dist_to_hyperplane, hdist, hyperplane_span, HPoint};

/// The full parameter ledger for a run: separation epsilon, perturbation
/// budget delta, the edge window [a,b], the circumradius cap c, and the
/// per-dimension altitude floors d_k with their perturbation radii delta_k.
#[derive(Debug, Clone)]
pub struct QualityParams {
    pub n: usize,
    pub mu: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Altitude floor per dimension, d_2 >= d_3 >= ... > 0.
    pub d: BTreeMap<usize, f64>,
    /// Per-stage perturbation radius, delta_k = delta / (100 * 2^k).
    pub delta_k: BTreeMap<usize, f64>,
}

impl QualityParams {
    /// Derives the standard ledger from the thickness constant: epsilon =
    /// mu/100, delta = epsilon/10, a = epsilon - 2 delta, c = epsilon +
    /// delta. The edge window top is b = 2 epsilon + 2 delta so that it
    /// contains every Delaunay edge of a delta-perturbed maximal net. The
    /// base altitude floor d_2 comes from the triangle bound; higher
    /// dimensions carry the solved schedule.
    pub fn from_mu(n: usize, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(GeomError::InvalidArgument(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if n < 2 {
            return Err(GeomError::InvalidArgument(
                "dimension must be at least 2".into(),
            ));
        }
        let epsilon = mu / 100.0;
        let delta = epsilon / 10.0;
        let a = epsilon - 2.0 * delta;
        let b = 2.0 * epsilon + 2.0 * delta;
        let c = epsilon + delta;
        let d2 = h0_bound(a, b, c)?;
        let mut delta_k = BTreeMap::new();
        for k in 3..=n {
            delta_k.insert(k, delta / (100.0 * (1u64 << k) as f64));
        }
        let mut params = QualityParams {
            n,
            mu,
            epsilon,
            delta,
            a,
            b,
            c,
            d: BTreeMap::from([(2, d2)]),
            delta_k,
        };
        let schedule = solve_d_schedule(n, mu, &params)?;
        params.d = schedule;
        Ok(params)
    }

    /// Validates the ledger invariants.
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, ok: bool| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(GeomError::Validation {
                    invariant: name.to_string(),
                })
            }
        };
        check("epsilon = mu/100", (self.epsilon - self.mu / 100.0).abs() < 1e-15)?;
        check(
            "delta = epsilon/10",
            (self.delta - self.epsilon / 10.0).abs() < 1e-15,
        )?;
        check(
            "a = epsilon - 2 delta",
            (self.a - (self.epsilon - 2.0 * self.delta)).abs() < 1e-15,
        )?;
        check(
            "b = 2 epsilon + 2 delta",
            (self.b - (2.0 * self.epsilon + 2.0 * self.delta)).abs() < 1e-15,
        )?;
        check(
            "c = epsilon + delta",
            (self.c - (self.epsilon + self.delta)).abs() < 1e-15,
        )?;
        let mut prev = f64::INFINITY;
        for &dk in self.d.values() {
            check("d_k > 0", dk > 0.0)?;
            check("d schedule non-increasing", dk <= prev)?;
            prev = dk;
        }
        for (&k, &del) in &self.delta_k {
            let expect = self.delta / (100.0 * (1u64 << k) as f64);
            check("delta_k = delta/(100 2^k)", (del - expect).abs() < 1e-18)?;
        }
        Ok(())
    }
}

/// All pairwise edge lengths of a vertex set, sorted ascending.
pub fn edge_lengths(vertices: &[HPoint]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            out.push(hdist(&vertices[i], &vertices[j]));
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

/// Altitude of `vertex_index` in the simplex: the distance from that
/// vertex to the hyperplane spanned by the remaining vertices inside the
/// simplex's own geodesic span.
pub fn altitude(vertices: &[HPoint], vertex_index: usize) -> Result<f64> {
    if vertices.len() < 3 {
        return Err(GeomError::InvalidArgument(
            "altitude needs a simplex of dimension >= 2".into(),
        ));
    }
    if vertex_index >= vertices.len() {
        return Err(GeomError::InvalidArgument(format!(
            "vertex index {vertex_index} out of range"
        )));
    }
    let apex = &vertices[vertex_index];
    let facet: Vec<HPoint> = vertices
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != vertex_index)
        .map(|(_, p)| p.clone())
        .collect();
    let plane = hyperplane_span(&facet, Some(vertices))?;
    Ok(dist_to_hyperplane(apex, &plane))
}

/// Circumradius of a simplex, taken inside its geodesic span.
pub fn circumradius_k(vertices: &[HPoint]) -> Result<f64> {
    Ok(circumsphere(vertices)?.radius)
}

/// Goodness predicate: all edges within [a,b] and, for simplices of
/// dimension >= 2, every vertex altitude at least d. One-dimensional
/// simplices are judged on their edge alone.
pub fn is_good(vertices: &[HPoint], a: f64, b: f64, d: f64) -> bool {
    let edges = edge_lengths(vertices);
    if edges.is_empty() {
        return true;
    }
    if edges[0] < a || *edges.last().unwrap() > b {
        return false;
    }
    if vertices.len() <= 2 {
        return true;
    }
    for i in 0..vertices.len() {
        match altitude(vertices, i) {
            Ok(h) => {
                if h < d {
                    return false;
                }
            }
            Err(_) => return false,
        }
    }
    true
}

/// Membership in the (a,b,c,d)-bad region of a facet: the joined simplex
/// `[p, v_1..v_k]` must have every edge in [a,b], circumradius at most c,
/// and the distance from `p` to the facet's hyperplane below d. All three
/// clauses are required, matching the region the volume bound measures.
pub fn in_bad_region(p: &HPoint, facet: &[HPoint], a: f64, b: f64, c: f64, d: f64) -> bool {
    // Edge clauses first: they are cheap and reject almost everything.
    for v in facet {
        let e = hdist(p, v);
        if e < a || e > b {
            return false;
        }
    }
    for i in 0..facet.len() {
        for j in i + 1..facet.len() {
            let e = hdist(&facet[i], &facet[j]);
            if e < a || e > b {
                return false;
            }
        }
    }
    let mut joined = Vec::with_capacity(facet.len() + 1);
    joined.push(p.clone());
    joined.extend_from_slice(facet);
    match circumradius_k(&joined) {
        Ok(r) => {
            if r > c {
                return false;
            }
        }
        // No bounded circumsphere: the radius clause fails.
        Err(_) => return false,
    }
    if facet.len() == 1 {
        // Opposite face is a single vertex; its "hyperplane" inside the
        // edge's span is that vertex, so the altitude is the edge length,
        // already known to be >= a.
        return hdist(p, &facet[0]) < d;
    }
    match altitude(&joined, 0) {
        Ok(h) => h < d,
        // Exactly degenerate joined span (p inside the facet's own span):
        // the hyperplane of the facet is the facet's span itself, so use
        // the projection distance, which is 0 there.
        Err(_) => match crate::kernel::foot_in_span(facet, p) {
            Ok((_, dist)) => dist < d,
            Err(_) => false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{foot_in_span, from_poincare, geodesic_point, project_to_hyperplane};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> HPoint {
        loop {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.9..0.9)).collect();
            if x.iter().map(|v| v * v).sum::<f64>() >= 1.0 {
                continue;
            }
            let p = from_poincare(&x).unwrap();
            if hdist(&HPoint::origin(n), &p) <= r {
                return p;
            }
        }
    }

    /// Equilateral triangle with side `s` around the origin of H^2.
    fn equilateral(s: f64) -> Vec<HPoint> {
        // circumradius from sinh(s/2) = sinh(r) sin(pi/3)
        let r = ((s / 2.0).sinh() / (std::f64::consts::PI / 3.0).sin()).asinh();
        (0..3)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
                HPoint::new(vec![r.cosh(), r.sinh() * th.cos(), r.sinh() * th.sin()]).unwrap()
            })
            .collect()
    }

    #[test]
    fn edge_lengths_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_point(&mut rng, 2, 1.0);
        let b = random_point(&mut rng, 2, 1.0);
        assert_eq!(edge_lengths(&[a.clone(), b.clone()]), vec![hdist(&a, &b)]);
        let tri = equilateral(0.3);
        let e = edge_lengths(&tri);
        assert_eq!(e.len(), 3);
        for x in &e {
            assert!((x - 0.3).abs() < 1e-10, "side {x}");
        }
        let pts: Vec<HPoint> = (0..4).map(|_| random_point(&mut rng, 3, 1.0)).collect();
        let e = edge_lengths(&pts);
        assert_eq!(e.len(), 6);
        let mut direct = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                direct.push(hdist(&pts[i], &pts[j]));
            }
        }
        direct.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in e.iter().zip(&direct) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn altitude_equilateral_closed_form() {
        let s = 0.1_f64;
        let tri = equilateral(s);
        // hyperbolic Pythagoras through the midpoint of the opposite side
        let expect = (s.cosh() / (s / 2.0).cosh()).acosh();
        for i in 0..3 {
            let h = altitude(&tri, i).unwrap();
            assert!((h - expect).abs() < 1e-10, "altitude {h} vs {expect}");
        }
    }

    #[test]
    fn altitude_matches_projection_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let pts: Vec<HPoint> = (0..4).map(|_| random_point(&mut rng, 3, 0.8)).collect();
            let h = match altitude(&pts, 0) {
                Ok(h) => h,
                Err(_) => continue,
            };
            // independent oracle: distance via the orthogonal projection
            // onto the facet's Minkowski span
            let facet = &pts[1..];
            let (foot, d_span) = foot_in_span(facet, &pts[0]).unwrap();
            assert!((h - d_span).abs() < 1e-9, "{h} vs span distance {d_span}");
            assert!((h - hdist(&pts[0], &foot)).abs() < 1e-9);
        }
    }

    #[test]
    fn altitude_vertex_on_facet_plane() {
        // A collinear triangle is degenerate and must error.
        let base1 = HPoint::origin(2);
        let base2 = HPoint::new(vec![0.3f64.cosh(), 0.3f64.sinh(), 0.0]).unwrap();
        let apex_on = geodesic_point(&base1, &base2, 0.5);
        let tri = vec![apex_on, base1, base2];
        match altitude(&tri, 0) {
            Err(_) => {}
            Ok(h) => assert!(h < 1e-9),
        }
        // In H^3: apex exactly on the facet plane gives altitude ~ 0.
        fn p3(x: f64, y: f64, z: f64) -> HPoint {
            from_poincare(&[x, y, z]).unwrap()
        }
        let pts = vec![p3(0.2, 0.0, 0.0), p3(0.0, 0.2, 0.0), p3(-0.2, -0.1, 0.0), p3(0.05, 0.03, 0.0)];
        let h = altitude(&pts, 3);
        match h {
            Ok(h) => assert!(h < 1e-10, "in-plane vertex altitude {h}"),
            Err(_) => {} // flat tetrahedron may be flagged degenerate
        }
        let pts_off = vec![
            p3(0.2, 0.0, 0.0),
            p3(0.0, 0.2, 0.0),
            p3(-0.2, -0.1, 0.0),
            p3(0.05, 0.03, 0.3),
        ];
        assert!(altitude(&pts_off, 3).unwrap() > 0.2);
    }

    #[test]
    fn circumradius_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_point(&mut rng, 2, 1.0);
        let b = random_point(&mut rng, 2, 1.0);
        let r = circumradius_k(&[a.clone(), b.clone()]).unwrap();
        assert!((r - hdist(&a, &b) / 2.0).abs() < 1e-12);
        // equilateral: radius matches the inscribed-angle construction
        let s = 0.25;
        let tri = equilateral(s);
        let r = circumradius_k(&tri).unwrap();
        let expect = (((s / 2.0) as f64).sinh() / (std::f64::consts::PI / 3.0).sin()).asinh();
        assert!((r - expect).abs() < 1e-10);
        // diameter bound on random simplices
        for _ in 0..50 {
            let pts: Vec<HPoint> = (0..4).map(|_| random_point(&mut rng, 3, 0.8)).collect();
            if let Ok(r) = circumradius_k(&pts) {
                let longest = *edge_lengths(&pts).last().unwrap();
                assert!(r >= longest / 2.0 - 1e-10);
            }
        }
    }

    #[test]
    fn is_good_examples() {
        let (a, b) = (0.04, 0.11);
        let s = (a + b) / 2.0;
        let tri = equilateral(s);
        let h = altitude(&tri, 0).unwrap();
        assert!(is_good(&tri, a, b, h * 0.9));
        assert!(!is_good(&tri, a, b, h * 1.1));
        // an edge below a fails regardless of altitude
        assert!(!is_good(&tri, s * 1.01, b, 0.0));
        // 1-simplex: edges only
        let seg = vec![tri[0].clone(), tri[1].clone()];
        assert!(is_good(&seg, a, b, 999.0));
    }

    #[test]
    fn is_good_monotone_in_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let pts: Vec<HPoint> = (0..3).map(|_| random_point(&mut rng, 2, 0.4)).collect();
            let edges = edge_lengths(&pts);
            let (a, b) = (edges[0] * 0.9, edges.last().unwrap() * 1.1);
            let d = rng.random_range(0.0..0.5);
            if is_good(&pts, a, b, d) {
                assert!(is_good(&pts, a, b, d * 0.5));
                assert!(is_good(&pts, a, b, 0.0));
            }
        }
    }

    #[test]
    fn near_flat_tetrahedron_is_bad() {
        // Four nearly-coplanar points with edges in window: a sliver.
        let s = 0.07;
        let lift = 1e-6;
        let ring: Vec<HPoint> = (0..4)
            .map(|i| {
                let th = std::f64::consts::PI / 4.0 + std::f64::consts::PI / 2.0 * i as f64;
                let z = if i % 2 == 0 { lift } else { -lift };
                from_poincare(&[s * th.cos(), s * th.sin(), z]).unwrap()
            })
            .collect();
        let edges = edge_lengths(&ring);
        let (a, b) = (edges[0] * 0.99, edges.last().unwrap() * 1.01);
        let min_alt = (0..4)
            .map(|i| altitude(&ring, i).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min_alt < 1e-4, "planted sliver should be flat: {min_alt}");
        assert!(!is_good(&ring, a, b, 1e-3));
    }

    #[test]
    fn bad_region_membership_examples() {
        let params = QualityParams::from_mu(3, 5.0).unwrap();
        let (a, b, c) = (params.a, params.b, params.c);
        // facet: a triangle on a hyperbolic circle of radius rho in the
        // z = 0 plane of H^3
        let rho = 0.045_f64;
        let on_circle = |deg: f64| {
            let th = deg.to_radians();
            HPoint::new(vec![
                rho.cosh(),
                rho.sinh() * th.cos(),
                rho.sinh() * th.sin(),
                0.0,
            ])
            .unwrap()
        };
        let facet = vec![on_circle(90.0), on_circle(210.0), on_circle(330.0)];
        // p on the facet's own circumcircle and hyperplane: zero altitude,
        // edges in range, circumradius rho <= c -- in the region for any d
        let p_on = on_circle(150.0);
        let e = edge_lengths(&[p_on.clone(), facet[0].clone(), facet[1].clone(), facet[2].clone()]);
        assert!(e[0] >= a && *e.last().unwrap() <= b, "edges {e:?}");
        assert!(in_bad_region(&p_on, &facet, a, b, c, 1e-9));
        // p far away: edge clause fails
        let p_far = from_poincare(&[0.4, 0.0, 0.0]).unwrap();
        assert!(!in_bad_region(&p_far, &facet, a, b, c, 1.0));
        // p well off the plane with a healthy altitude: not in region for small d
        let p_off = {
            let q = on_circle(150.0);
            let x = crate::kernel::to_poincare(&q);
            from_poincare(&[x[0], x[1], 0.03]).unwrap()
        };
        assert!(!in_bad_region(&p_off, &facet, a, b, c, 1e-3));
    }

    #[test]
    fn projection_cross_check_against_hyperplane_route() {
        // altitude via hyperplane span equals distance to projected foot
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let pts: Vec<HPoint> = (0..3).map(|_| random_point(&mut rng, 2, 0.8)).collect();
            let h = match altitude(&pts, 0) {
                Ok(h) => h,
                Err(_) => continue,
            };
            let plane = hyperplane_span(&pts[1..], Some(&pts)).unwrap();
            let foot = project_to_hyperplane(&pts[0], &plane);
            assert!((hdist(&pts[0], &foot) - h).abs() < 1e-10);
        }
    }
}
