//! The explicit constants behind the perturbation argument.
//!
//! Everything here is a closed-form or numerically solved bound: how far a
//! vertex of a bad simplex with good faces can sit from the opposite
//! hyperplane (`d_bound`) and from the opposite face's circumsphere
//! (`r_bound`, via the chord-tangent angle `alpha0`), the volume of the
//! region where a new vertex would form a bad simplex (`vk_bound`), the
//! packing counts limiting how many simplices a vertex can ever join
//! (`m_count`, `n_count`), the unconditional triangle altitude floor
//! (`h0_bound` / `h1_bound`), and the per-dimension altitude schedule that
//! makes the bad regions too small to cover a perturbation ball
//! (`solve_d_schedule`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::quality::QualityParams;
use crate::volume::{ball_volume, shell_volume};

/// Altitude transfer bound: if a simplex with edges at most `b` and faces
/// of altitude at least `d0` has one vertex within `d` of its opposite
/// hyperplane, every vertex is within `asinh(sinh(d) sinh(b) / sinh(d0))`
/// of its own opposite hyperplane. Vanishes with `d`.
pub fn d_bound(b: f64, d0: f64, d: f64) -> f64 {
    ((d.sinh() / d0.sinh()) * b.sinh()).asinh()
}

/// Inverse of `d_bound` in its last argument: the altitude floor every
/// vertex is guaranteed once one vertex clears `big_d`.
pub fn d_bound_inverse(b: f64, d0: f64, big_d: f64) -> f64 {
    ((big_d.sinh() / b.sinh()) * d0.sinh()).asinh()
}

/// Chord-tangent angle for a circle of radius `rho` cut by a geodesic at
/// distance `t` from its center.
fn chord_angle(rho: f64, t: f64) -> f64 {
    (t.sinh() / rho.sinh()).clamp(0.0, 1.0).acos()
}

/// Center distance at which the cut circle's own radius drops to `a/2`.
fn t_max(rho: f64, half_a: f64) -> f64 {
    (rho.cosh() / half_a.cosh()).max(1.0).acosh()
}

/// Minimal angle between a geodesic and the tangent of a hyperbolic circle
/// at their crossing, over circle radii in `[a/2, c]` and cuts whose
/// intersection sphere keeps radius at least `a/2`.
///
/// Found by a grid scan with golden-section refinement; the brute-force
/// grid oracle in the tests keeps the minimizer honest.
pub fn alpha0(a: f64, c: f64) -> Result<f64> {
    if !(a > 0.0 && c > 0.0 && a / 2.0 <= c) {
        return Err(GeomError::InvalidArgument(format!(
            "alpha0 needs 0 < a/2 <= c, got a={a} c={c}"
        )));
    }
    let half_a = a / 2.0;
    if (c - half_a).abs() < 1e-15 {
        // Only diametral chords are allowed: they meet the circle at right
        // angles.
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    let f = |rho: f64, u: f64| chord_angle(rho, u * t_max(rho, half_a));
    let grid = 192;
    let mut best = (f64::INFINITY, half_a, 1.0);
    for i in 0..=grid {
        let rho = half_a + (c - half_a) * i as f64 / grid as f64;
        for j in 0..=grid {
            let u = j as f64 / grid as f64;
            let v = f(rho, u);
            if v < best.0 {
                best = (v, rho, u);
            }
        }
    }
    // Coordinate-wise golden-section refinement around the best grid cell.
    let golden = |lo: f64, hi: f64, eval: &dyn Fn(f64) -> f64| -> (f64, f64) {
        let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (lo, hi);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let (mut f1, mut f2) = (eval(x1), eval(x2));
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = eval(x2);
            }
        }
        let x = 0.5 * (lo + hi);
        (x, eval(x))
    };
    let step_rho = (c - half_a) / grid as f64;
    let step_u = 1.0 / grid as f64;
    let (mut rho, mut u, mut val) = (best.1, best.2, best.0);
    for _ in 0..4 {
        let (r2, _) = golden(
            (rho - step_rho).max(half_a),
            (rho + step_rho).min(c),
            &|x| f(x, u),
        );
        rho = r2;
        let (u2, v2) = golden((u - step_u).max(0.0), (u + step_u).min(1.0), &|x| f(rho, x));
        u = u2;
        val = v2;
    }
    Ok(val.min(best.0))
}

/// Circumsphere proximity bound: a vertex of a bad simplex with good
/// proper faces, edges in [a,b] and circumradius at most c lies within
/// `D + asinh(sinh D / sin alpha0)` of the opposite face's circumsphere.
pub fn r_bound(a: f64, b: f64, c: f64, d0: f64, d: f64) -> Result<f64> {
    let big_d = d_bound(b, d0, d);
    let alpha = alpha0(a, c)?;
    Ok(big_d + (big_d.sinh() / alpha.sin()).asinh())
}

/// Volume bound for the bad region of a facet with `k` vertices...: the
/// region lies in the `R`-neighborhood of the facet's circumsphere, which
/// is contained in the shell of radii `[c - R, c + R]` about its center.
///
/// `k` only labels the facet dimension in the ledger; the shell bound is
/// identical for all facet dimensions. Tends to 0 as `d` does.
pub fn vk_bound(n: usize, k: usize, a: f64, b: f64, c: f64, d0: f64, d: f64) -> Result<f64> {
    if k < 1 || k > n {
        return Err(GeomError::InvalidArgument(format!(
            "facet vertex count k={k} outside 1..=n"
        )));
    }
    if d <= 0.0 {
        return Ok(0.0);
    }
    let r = r_bound(a, b, c, d0, d)?;
    Ok(shell_volume(n, c, r))
}

/// Largest number of mutually disjoint `(eps/2 - delta)`-balls that fit in
/// a `(2 eps + 2 delta)`-ball: the integer part of the volume quotient.
pub fn m_count(n: usize, mu: f64) -> Result<u64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(GeomError::InvalidArgument(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let eps = mu / 100.0;
    let delta = eps / 10.0;
    let big = ball_volume(n, 2.0 * eps + 2.0 * delta);
    let small = ball_volume(n, eps / 2.0 - delta);
    Ok((big / small).floor() as u64)
}

/// Number of `k`-tuples of net points that can ever share a simplex with a
/// fixed vertex across good perturbations: `C(m_count, k)`, 0 when k > m.
pub fn n_count(n: usize, k: usize, mu: f64) -> Result<u128> {
    if k == 0 {
        return Err(GeomError::InvalidArgument("tuple size k must be >= 1".into()));
    }
    let m = m_count(n, mu)? as u128;
    if (k as u128) > m {
        return Ok(0);
    }
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc
            .checked_mul(m - i)
            .ok_or_else(|| GeomError::Infeasible("binomial overflow".into()))?;
        acc /= i + 1;
    }
    Ok(acc)
}

fn check_domain(expr: &'static str, value: f64, ok: bool) -> Result<f64> {
    if ok {
        Ok(value)
    } else {
        Err(GeomError::OutOfDomain { expr, value })
    }
}

/// Altitude floor for the apex of an isosceles contact triangle with legs
/// `a` on a circle of radius `r0`; decreasing in `r0`.
pub fn h1_bound(a: f64, r0: f64) -> Result<f64> {
    if !(a > 0.0 && r0 > 0.0) {
        return Err(GeomError::InvalidArgument(format!(
            "h1_bound needs a, r0 > 0, got a={a} r0={r0}"
        )));
    }
    if r0 < a / 2.0 {
        return Err(GeomError::OutOfDomain {
            expr: "r0 >= a/2 (chord must fit the circle)",
            value: r0,
        });
    }
    let cos_alpha = (a.cosh() * r0.cosh() - r0.cosh()) / (a.sinh() * r0.sinh());
    let cos_alpha = check_domain("cos_alpha", cos_alpha, (-1.0..=1.0).contains(&cos_alpha))?;
    let alpha = cos_alpha.acos();
    let sinh_qx = a.sinh() * alpha.sin();
    let qx = sinh_qx.asinh();
    let cosh_h1 = a.cosh() * qx.cosh() - a.sinh() * qx.sinh();
    let cosh_h1 = check_domain("cosh_h1", cosh_h1, cosh_h1 >= 1.0 - 1e-12)?;
    Ok(cosh_h1.max(1.0).acosh())
}

/// Unconditional altitude floor for triangles with edges in [a,b] and
/// circumradius at most `R`: `asinh(sinh(a)/sinh(b) * sinh(h1(a, R)))`.
pub fn h0_bound(a: f64, b: f64, big_r: f64) -> Result<f64> {
    if !(0.0 < a && a <= b) {
        return Err(GeomError::InvalidArgument(format!(
            "h0_bound needs 0 < a <= b, got a={a} b={b}"
        )));
    }
    let h1 = h1_bound(a, big_r)?;
    Ok(((a.sinh() / b.sinh()) * h1.sinh()).asinh())
}

/// The left-hand side of the schedule inequality at altitude floor `d`:
/// total bad-region volume over every tuple size that can touch a vertex.
fn schedule_lhs(n: usize, k_next: usize, mu: f64, p: &QualityParams, d2: f64, d: f64) -> Result<f64> {
    let mut sum = 0.0;
    for l in 1..=k_next {
        let v = vk_bound(n, l.min(n), p.a, p.b, p.c, d2, d)?;
        let count = n_count(n, l, mu)? as f64;
        sum += v * count;
    }
    Ok(sum)
}

/// Solves the altitude schedule: for each stage `k = 2..n-1`, the largest
/// `d_{k+1} <= d_k` for which the total bad-region volume stays below the
/// volume of the stage's perturbation ball, found by log-space bisection
/// to relative tolerance 1e-6 with floor 1e-300.
pub fn solve_d_schedule(n: usize, mu: f64, params: &QualityParams) -> Result<BTreeMap<usize, f64>> {
    let d2 = *params
        .d
        .get(&2)
        .ok_or_else(|| GeomError::InvalidArgument("params must carry d_2".into()))?;
    let mut out = BTreeMap::from([(2usize, d2)]);
    let mut d_prev = d2;
    for k in 2..n {
        let delta_next = params.delta / (100.0 * (1u64 << (k + 1)) as f64);
        let rhs = ball_volume(n, delta_next);
        let lhs_at = |d: f64| schedule_lhs(n, k + 1, mu, params, d2, d);
        let d_next = if lhs_at(d_prev)? <= rhs {
            d_prev
        } else {
            let floor = 1e-300;
            if lhs_at(floor)? > rhs {
                return Err(GeomError::Infeasible(format!(
                    "no altitude floor above 1e-300 satisfies the stage {k} volume budget"
                )));
            }
            let (mut lo, mut hi) = (floor, d_prev);
            while hi / lo > 1.0 + 1e-6 {
                let mid = (lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp();
                if lhs_at(mid)? <= rhs {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        out.insert(k + 1, d_next);
        d_prev = d_next;
    }
    Ok(out)
}

/// One stage row of the ledger: the constants evaluated at that stage's
/// altitude floor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageBound {
    pub k_next: usize,
    pub delta_k: f64,
    pub d_k: f64,
    pub big_d: f64,
    pub big_r: f64,
    pub v_shell: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Every named constant for a given `(n, mu)`, as emitted by the
/// `constants` CLI subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundLedger {
    pub n: usize,
    pub mu: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha0: f64,
    pub h1: f64,
    pub d2: f64,
    pub m: u64,
    /// `n_count` per tuple size 1..=n (saturated to u64 for serialization).
    pub n_counts: Vec<u64>,
    /// delta_k per stage dimension 3..=n.
    pub delta_schedule: BTreeMap<usize, f64>,
    /// Altitude floor per dimension 2..=n.
    pub d_schedule: BTreeMap<usize, f64>,
    pub stages: Vec<StageBound>,
}

/// Evaluates the full ledger.
pub fn build_ledger(n: usize, mu: f64) -> Result<BoundLedger> {
    let params = QualityParams::from_mu(n, mu)?;
    let alpha = alpha0(params.a, params.c)?;
    let h1 = h1_bound(params.a, params.c)?;
    let d2 = params.d[&2];
    let m = m_count(n, mu)?;
    let mut n_counts = Vec::new();
    for l in 1..=n {
        n_counts.push(n_count(n, l, mu)?.min(u64::MAX as u128) as u64);
    }
    let mut stages = Vec::new();
    for k in 2..n {
        let d_next = params.d[&(k + 1)];
        let delta_next = params.delta_k[&(k + 1)];
        let big_d = d_bound(params.b, d2, d_next);
        let big_r = r_bound(params.a, params.b, params.c, d2, d_next)?;
        let v = vk_bound(n, (k + 1).min(n), params.a, params.b, params.c, d2, d_next)?;
        stages.push(StageBound {
            k_next: k + 1,
            delta_k: delta_next,
            d_k: d_next,
            big_d,
            big_r,
            v_shell: v,
            lhs: schedule_lhs(n, k + 1, mu, &params, d2, d_next)?,
            rhs: ball_volume(n, delta_next),
        });
    }
    Ok(BoundLedger {
        n,
        mu,
        epsilon: params.epsilon,
        delta: params.delta,
        a: params.a,
        b: params.b,
        c: params.c,
        alpha0: alpha,
        h1,
        d2,
        m,
        n_counts,
        delta_schedule: params.delta_k.clone(),
        d_schedule: params.d.clone(),
        stages,
    })
}
