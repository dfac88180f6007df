//! Hyperbolic ball and shell volumes.
//!
//! `Vol(B^n(r)) = Vol(S^{n-1}) * integral_0^r sinh^{n-1}(t) dt`, with closed
//! forms for n = 2, 3 and adaptive quadrature otherwise. Small radii use
//! series so the pipeline can evaluate volumes of balls down to the
//! perturbation scale without cancellation.

use std::f64::consts::PI;

/// Surface measure of the unit Euclidean sphere `S^{n-1}`, `2 pi^{n/2} / Gamma(n/2)`.
pub fn sphere_surface(n: usize) -> f64 {
    assert!(n >= 1);
    // Gamma(n/2) by the half-integer recurrence.
    let mut g = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 - 0.25 {
        g *= x;
        x += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / g
}

/// `sinh(x) - x` without cancellation for small `x`.
fn sinh_minus_x(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // x^3/6 (1 + x^2/20 + x^4/840 + x^6/60480)
        let x2 = x * x;
        x * x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0)))
    } else {
        x.sinh() - x
    }
}

/// Adaptive Simpson quadrature of `sinh^{p}` on `[lo, hi]`.
fn sinh_pow_integral(p: usize, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    fn f(p: usize, t: f64) -> f64 {
        t.sinh().powi(p as i32)
    }
    fn simpson(p: usize, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(p, m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    fn recurse(
        p: usize,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(p, a, fa, m, fm);
        let (right, frm) = simpson(p, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(p, a, fa, m, fm, left, flm, tol / 2.0, depth - 1)
                + recurse(p, m, fm, b, fb, right, frm, tol / 2.0, depth - 1)
        }
    }
    let fa = f(p, lo);
    let fb = f(p, hi);
    let (whole, fm) = simpson(p, lo, fa, hi, fb);
    // Relative tolerance anchored to a crude positive lower estimate.
    let scale = whole.abs().max((hi - lo) * f(p, 0.5 * (lo + hi)).abs());
    recurse(p, lo, fa, hi, fb, whole, fm, 1e-13 * scale.max(1e-300), 48)
}

/// Volume of the hyperbolic ball of radius `r` in `H^n`. Zero for `r <= 0`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    assert!(n >= 2, "ball_volume needs n >= 2");
    if r <= 0.0 {
        return 0.0;
    }
    match n {
        2 => {
            // 2 pi (cosh r - 1) = 4 pi sinh^2(r/2)
            let s = (r / 2.0).sinh();
            4.0 * PI * s * s
        }
        3 => PI * sinh_minus_x(2.0 * r),
        _ => sphere_surface(n) * sinh_pow_integral(n - 1, 0.0, r),
    }
}

/// Volume of the shell `{ t : max(c-R, 0) <= d(x, center) <= c+R }` in `H^n`,
/// the region that contains the `R`-neighborhood of any sphere of radius
/// at most `c`. Computed as a single quadrature over the shell interval so
/// thin shells do not cancel. Zero when `R <= 0`.
pub fn shell_volume(n: usize, c: f64, r_thick: f64) -> f64 {
    assert!(n >= 2);
    if r_thick <= 0.0 {
        return 0.0;
    }
    // Below the representation granularity of the endpoints c +/- R the
    // quadrature width collapses; the midpoint-derivative form is exact to
    // well past double precision there.
    if c > r_thick && r_thick <= 1e-10 * (c + 1.0) {
        return sphere_surface(n) * c.sinh().powi(n as i32 - 1) * 2.0 * r_thick;
    }
    let lo = (c - r_thick).max(0.0);
    let hi = c + r_thick;
    sphere_surface(n) * sinh_pow_integral(n - 1, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_surface_known_values() {
        assert!((sphere_surface(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_surface(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_surface(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn ball_volume_examples() {
        assert_eq!(ball_volume(2, 0.0), 0.0);
        assert_eq!(ball_volume(3, 0.0), 0.0);
        // 2 pi (cosh 1 - 1)
        assert!((ball_volume(2, 1.0) - 3.4122762652849023).abs() < 1e-12);
        // pi (sinh 2 - 2)
        assert!((ball_volume(3, 1.0) - 5.110932705708289).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for i in 1..=20 {
            let r = 0.1 * i as f64;
            let q2 = sphere_surface(2) * sinh_pow_integral(1, 0.0, r);
            let q3 = sphere_surface(3) * sinh_pow_integral(2, 0.0, r);
            assert!((ball_volume(2, r) - q2).abs() <= 1e-9 * q2.max(1.0));
            assert!((ball_volume(3, r) - q3).abs() <= 1e-9 * q3.max(1.0));
        }
    }

    #[test]
    fn quadrature_matches_closed_form_n4() {
        // integral sinh^3 = (cosh^3)/3 - cosh, giving a closed form in H^4.
        let r: f64 = 0.8;
        let exact = sphere_surface(4) * ((r.cosh().powi(3) - 1.0) / 3.0 - (r.cosh() - 1.0));
        assert!((ball_volume(4, r) - exact).abs() < 1e-11 * exact);
        assert!((ball_volume(4, r) - 2.5003534890716070).abs() < 1e-10);
    }

    #[test]
    fn strictly_increasing_in_radius() {
        for n in 2..=4 {
            let mut prev = 0.0;
            for i in 1..=60 {
                let r = 0.05 * i as f64;
                let v = ball_volume(n, r);
                assert!(v > prev, "n={n} r={r}");
                prev = v;
            }
        }
    }

    #[test]
    fn tiny_radius_no_cancellation() {
        // Leading order Vol(B^n(r)) ~ Vol(S^{n-1}) r^n / n.
        for n in 2..=4 {
            let r = 1e-7_f64;
            let lead = sphere_surface(n) * r.powi(n as i32) / n as f64;
            let v = ball_volume(n, r);
            assert!(
                (v - lead).abs() < 1e-10 * lead,
                "n={n}: {v} vs leading {lead}"
            );
        }
    }

    #[test]
    fn shell_volume_basics() {
        assert_eq!(shell_volume(3, 0.5, 0.0), 0.0);
        // Thick shell agrees with the ball-volume difference.
        let direct = ball_volume(3, 0.7) - ball_volume(3, 0.3);
        assert!((shell_volume(3, 0.5, 0.2) - direct).abs() < 1e-10);
        // Thin shell agrees with surface * width to leading order; at
        // 1e-9 the quadrature branch still resolves the width.
        let c = 0.055_f64;
        let rr = 1e-9;
        let approx = sphere_surface(3) * c.sinh().powi(2) * 2.0 * rr;
        let v = shell_volume(3, c, rr);
        assert!((v - approx).abs() < 1e-6 * approx, "{v} vs {approx}");
        // The derivative branch continues the quadrature smoothly.
        let v_fine = shell_volume(3, c, 1e-12);
        assert!((v_fine - approx * 1e-3).abs() < 1e-6 * v_fine);
    }
}
