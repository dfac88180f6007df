//! Hyperbolic geometry primitives in the hyperboloid model.
//!
//! Points of `H^n` are unit timelike vectors in Minkowski space `R^{n,1}`
//! with the time coordinate first: `<x,x> = -1`, `x[0] > 0`. Totally
//! geodesic hyperplanes are encoded by spacelike unit normals. Distances,
//! projections and circumcenters all reduce to small linear solves against
//! the Minkowski form, which is why the hyperboloid model is the internal
//! representation; the Poincaré and Klein balls are conversion targets.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

/// Tolerance for representation invariants (unit timelike / spacelike).
pub const REP_TOL: f64 = 1e-12;
/// Tolerance for derived geometric residuals (projections, circumcenters).
pub const GEOM_TOL: f64 = 1e-9;

/// Minkowski inner product `-x0*y0 + x1*y1 + ... + xn*yn`.
pub fn minkowski_dot(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(GeomError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(GeomError::InvalidArgument(
            "minkowski_dot needs vectors of length >= 2".into(),
        ));
    }
    Ok(mdot(x, y))
}

/// Unchecked Minkowski inner product for internal use.
#[inline]
pub(crate) fn mdot(x: &[f64], y: &[f64]) -> f64 {
    let mut s = -x[0] * y[0];
    for i in 1..x.len() {
        s += x[i] * y[i];
    }
    s
}

/// A point of `H^n` in hyperboloid-model coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint {
    v: DVector<f64>,
}

impl HPoint {
    /// Builds a point from raw coordinates, rescaling onto the hyperboloid.
    ///
    /// The input must be timelike with positive first coordinate.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(GeomError::InvalidArgument(
                "an H^n point needs n+1 >= 3 coordinates".into(),
            ));
        }
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(GeomError::InvalidArgument("non-finite coordinate".into()));
        }
        let q = mdot(&coords, &coords);
        if q >= 0.0 {
            return Err(GeomError::Degenerate(format!(
                "vector is not timelike (<x,x> = {q})"
            )));
        }
        if coords[0] <= 0.0 {
            return Err(GeomError::InvalidArgument(
                "point is not on the upper sheet (x0 <= 0)".into(),
            ));
        }
        let scale = 1.0 / (-q).sqrt();
        let v = DVector::from_iterator(coords.len(), coords.iter().map(|c| c * scale));
        Ok(HPoint { v })
    }

    /// The basepoint `(1, 0, ..., 0)` of `H^n`.
    pub fn origin(n: usize) -> Self {
        let mut v = DVector::zeros(n + 1);
        v[0] = 1.0;
        HPoint { v }
    }

    /// Dimension `n` of the ambient hyperbolic space.
    pub fn dim(&self) -> usize {
        self.v.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        self.v.as_slice()
    }

    /// Residual of the hyperboloid constraint, `|<x,x> + 1|`.
    pub fn constraint_residual(&self) -> f64 {
        (mdot(self.coords(), self.coords()) + 1.0).abs()
    }

    pub(crate) fn from_raw(v: DVector<f64>) -> Result<Self> {
        Self::new(v.as_slice().to_vec())
    }
}

/// A totally geodesic hyperplane `{ x : <x, normal> = 0 }` with a
/// spacelike unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: DVector<f64>,
}

impl Hyperplane {
    /// Builds a hyperplane from a spacelike normal, rescaling to unit norm.
    pub fn new(normal: Vec<f64>) -> Result<Self> {
        let q = mdot(&normal, &normal);
        if q <= 0.0 {
            return Err(GeomError::Degenerate(format!(
                "hyperplane normal is not spacelike (<u,u> = {q})"
            )));
        }
        let scale = 1.0 / q.sqrt();
        let normal = DVector::from_iterator(normal.len(), normal.iter().map(|c| c * scale));
        Ok(Hyperplane { normal })
    }

    pub fn normal(&self) -> &[f64] {
        self.normal.as_slice()
    }
}

/// A hyperbolic sphere given by center and (hyperbolic) radius.
#[derive(Debug, Clone)]
pub struct Sphere {
    pub center: HPoint,
    pub radius: f64,
}

/// Hyperbolic distance `arccosh(-<x,y>)`.
///
/// Rounding can push the arccosh argument slightly below 1 for nearly
/// coincident points; it is clamped so the distance is 0, never an error.
pub fn hdist(x: &HPoint, y: &HPoint) -> f64 {
    let c = -mdot(x.coords(), y.coords());
    if c <= 1.0 {
        0.0
    } else {
        c.acosh()
    }
}

/// Point at parameter `t` in `[0,1]` along the geodesic from `x` to `y`.
///
/// Returns `x` when the endpoints coincide.
pub fn geodesic_point(x: &HPoint, y: &HPoint, t: f64) -> HPoint {
    let d = hdist(x, y);
    if d == 0.0 {
        return x.clone();
    }
    // y = cosh(d) x + sinh(d) u with u the unit tangent at x toward y.
    let cd = d.cosh();
    let sd = d.sinh();
    let n = x.coords().len();
    let mut u = DVector::zeros(n);
    for i in 0..n {
        u[i] = (y.coords()[i] - cd * x.coords()[i]) / sd;
    }
    let td = t * d;
    let mut p = DVector::zeros(n);
    for i in 0..n {
        p[i] = td.cosh() * x.coords()[i] + td.sinh() * u[i];
    }
    HPoint::from_raw(p).expect("geodesic point stays timelike")
}

/// Unit tangent vector at `x` pointing toward `y` (Minkowski-orthogonal
/// to `x`, unit spacelike). Errors when `x == y`.
pub fn tangent_toward(x: &HPoint, y: &HPoint) -> Result<DVector<f64>> {
    let d = hdist(x, y);
    if d == 0.0 {
        return Err(GeomError::Degenerate("coincident points".into()));
    }
    let cd = d.cosh();
    let sd = d.sinh();
    let n = x.coords().len();
    let mut u = DVector::zeros(n);
    for i in 0..n {
        u[i] = (y.coords()[i] - cd * x.coords()[i]) / sd;
    }
    Ok(u)
}

/// The hyperplane through `points`, optionally restricted to the geodesic
/// subspace spanned by `ambient`.
///
/// With `ambient = None` the points must number `n` (a hyperplane of the
/// full space). With `ambient = Some(basis)` of `m` vectors, the points
/// must number `m - 1` and the normal is found inside the span of the
/// basis, which is how altitudes of lower-dimensional simplices are taken
/// inside their own geodesic span.
pub fn hyperplane_span(points: &[HPoint], ambient: Option<&[HPoint]>) -> Result<Hyperplane> {
    if points.is_empty() {
        return Err(GeomError::InvalidArgument("no points given".into()));
    }
    let dim = points[0].coords().len();
    for p in points {
        if p.coords().len() != dim {
            return Err(GeomError::DimensionMismatch {
                expected: dim,
                got: p.coords().len(),
            });
        }
    }
    let k = points.len();
    // Columns of `basis` span the subspace the normal must live in.
    let basis: Vec<DVector<f64>> = match ambient {
        Some(b) => {
            if b.len() != k + 1 {
                return Err(GeomError::InvalidArgument(format!(
                    "ambient basis must have {} vectors for {} points",
                    k + 1,
                    k
                )));
            }
            b.iter()
                .map(|p| DVector::from_column_slice(p.coords()))
                .collect()
        }
        None => {
            if k + 1 != dim {
                return Err(GeomError::InvalidArgument(format!(
                    "need n = {} points to span a hyperplane of H^{}",
                    dim - 1,
                    dim - 1
                )));
            }
            (0..dim)
                .map(|i| {
                    let mut e = DVector::zeros(dim);
                    e[i] = 1.0;
                    e
                })
                .collect()
        }
    };
    let m = basis.len();
    // Solve <sum_j g_j b_j, p_i> = 0: a k x m system with 1-dim null space.
    // Padded square so the SVD carries the full right singular basis.
    let mut mat = DMatrix::zeros(m, m);
    for (i, p) in points.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            mat[(i, j)] = mdot(p.coords(), b.as_slice());
        }
    }
    let svd = mat.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| {
        svd.singular_values[x]
            .partial_cmp(&svd.singular_values[y])
            .unwrap()
    });
    let smax = svd.singular_values[*order.last().unwrap()];
    // One singular value vanishes for the padding row; the next-smallest
    // must be a real gap or the span is not unique.
    let second = svd.singular_values[order[1]];
    if !(second > 1e-10 * smax.max(1.0)) {
        return Err(GeomError::Degenerate(
            "dependent points: hyperplane span is not unique".into(),
        ));
    }
    let gamma = vt.row(order[0]);
    let mut u = DVector::zeros(dim);
    for (j, b) in basis.iter().enumerate() {
        u += b * gamma[j];
    }
    // A vanishing combination means the null direction was the kernel of a
    // rank-deficient ambient basis, not a geometric normal.
    if u.norm() < 1e-12 {
        return Err(GeomError::Degenerate(
            "ambient span is degenerate: no normal inside it".into(),
        ));
    }
    let q = mdot(u.as_slice(), u.as_slice());
    if q <= 0.0 {
        return Err(GeomError::Degenerate(
            "span normal is not spacelike".into(),
        ));
    }
    let mut u = u / q.sqrt();
    // Deterministic orientation: first coordinate of largest magnitude positive.
    let lead = u
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if u[lead] < 0.0 {
        u = -u;
    }
    Ok(Hyperplane { normal: u })
}

/// Distance from a point to a hyperplane, `arcsinh(|<p, normal>|)`.
pub fn dist_to_hyperplane(p: &HPoint, h: &Hyperplane) -> f64 {
    mdot(p.coords(), h.normal()).abs().asinh()
}

/// Foot of the hyperbolic perpendicular from `p` onto `h`.
pub fn project_to_hyperplane(p: &HPoint, h: &Hyperplane) -> HPoint {
    let s = mdot(p.coords(), h.normal());
    let dim = p.coords().len();
    let mut w = DVector::zeros(dim);
    for i in 0..dim {
        w[i] = p.coords()[i] - s * h.normal()[i];
    }
    HPoint::from_raw(w).expect("hyperplane projection of a point is timelike")
}

/// Minkowski-orthogonal projection of `p` onto the span of `span_points`,
/// renormalized onto the hyperboloid. Returns the foot together with the
/// distance from `p` to the geodesic subspace.
pub fn foot_in_span(span_points: &[HPoint], p: &HPoint) -> Result<(HPoint, f64)> {
    let m = span_points.len();
    if m == 0 {
        return Err(GeomError::InvalidArgument("empty span".into()));
    }
    let mut gram = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = mdot(span_points[i].coords(), span_points[j].coords());
        }
    }
    let rhs = DVector::from_iterator(
        m,
        span_points.iter().map(|b| mdot(p.coords(), b.coords())),
    );
    let lu = gram.lu();
    let beta = lu
        .solve(&rhs)
        .ok_or_else(|| GeomError::Degenerate("span Gram matrix is singular".into()))?;
    let dim = p.coords().len();
    let mut w = DVector::zeros(dim);
    for (j, b) in span_points.iter().enumerate() {
        for i in 0..dim {
            w[i] += beta[j] * b.coords()[i];
        }
    }
    let q = mdot(w.as_slice(), w.as_slice());
    if q >= 0.0 {
        return Err(GeomError::Degenerate(
            "projection onto span is not timelike".into(),
        ));
    }
    // cosh(dist) = sqrt(-<w,w>) for the unnormalized orthogonal projection.
    let coshd = (-q).sqrt();
    let d = if coshd <= 1.0 { 0.0 } else { coshd.acosh() };
    Ok((HPoint::from_raw(w)?, d))
}

/// Circumsphere of a vertex set, solved inside the geodesic subspace the
/// vertices span: the center satisfies `<c, v_i>` all equal with `c` in
/// the Minkowski span of the vertices.
pub fn circumsphere(vertices: &[HPoint]) -> Result<Sphere> {
    let m = vertices.len();
    if m < 2 {
        return Err(GeomError::InvalidArgument(
            "circumsphere needs at least 2 vertices".into(),
        ));
    }
    let mut gram = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = mdot(vertices[i].coords(), vertices[j].coords());
        }
    }
    let rhs = DVector::from_element(m, -1.0);
    let resid_of = |a: &DVector<f64>| (&gram * a - &rhs).amax() / (1.0 + a.amax());
    let lu_alpha = gram.clone().lu().solve(&rhs).filter(|a| resid_of(a) <= 1e-9);
    let alpha = match lu_alpha {
        Some(a) => a,
        // Rank-deficient vertex span (e.g. concyclic points inside a lower
        // flat): the least-squares center in the span, when the system is
        // consistent at all.
        None => {
            let svd = gram.clone().svd(true, true);
            let smax = svd.singular_values.amax();
            let a = svd
                .solve(&rhs, 1e-12 * smax.max(1e-300))
                .map_err(|e| GeomError::Degenerate(e.to_string()))?;
            if resid_of(&a) > 1e-9 {
                return Err(GeomError::Degenerate(
                    "no equidistant center exists in the vertex span".into(),
                ));
            }
            a
        }
    };
    let dim = vertices[0].coords().len();
    let mut c = DVector::zeros(dim);
    for (j, v) in vertices.iter().enumerate() {
        for i in 0..dim {
            c[i] += alpha[j] * v.coords()[i];
        }
    }
    let q = mdot(c.as_slice(), c.as_slice());
    if q >= -1e-300 {
        return Err(GeomError::UnboundedCircumsphere);
    }
    let center = HPoint::from_raw(c).map_err(|_| GeomError::UnboundedCircumsphere)?;
    // All vertex distances agree by construction; average for symmetry.
    let radius = vertices
        .iter()
        .map(|v| hdist(&center, v))
        .sum::<f64>()
        / m as f64;
    Ok(Sphere { center, radius })
}

/// Hyperboloid -> Poincaré ball coordinates (stereographic from `(-1,0,..)`).
pub fn to_poincare(p: &HPoint) -> Vec<f64> {
    let c = p.coords();
    let denom = 1.0 + c[0];
    c[1..].iter().map(|x| x / denom).collect()
}

/// Poincaré ball -> hyperboloid coordinates. Requires `|x| < 1`.
pub fn from_poincare(x: &[f64]) -> Result<HPoint> {
    let s: f64 = x.iter().map(|v| v * v).sum();
    if s >= 1.0 {
        return Err(GeomError::InvalidArgument(format!(
            "Poincaré coordinates must satisfy |x| < 1, got |x|^2 = {s}"
        )));
    }
    let denom = 1.0 - s;
    let mut v = Vec::with_capacity(x.len() + 1);
    v.push((1.0 + s) / denom);
    v.extend(x.iter().map(|c| 2.0 * c / denom));
    HPoint::new(v)
}

/// Hyperboloid -> Klein ball coordinates (geodesics become chords).
pub fn to_klein(p: &HPoint) -> Vec<f64> {
    let c = p.coords();
    c[1..].iter().map(|x| x / c[0]).collect()
}

/// Klein ball -> hyperboloid coordinates. Requires `|x| < 1`.
pub fn from_klein(x: &[f64]) -> Result<HPoint> {
    let s: f64 = x.iter().map(|v| v * v).sum();
    if s >= 1.0 {
        return Err(GeomError::InvalidArgument(format!(
            "Klein coordinates must satisfy |x| < 1, got |x|^2 = {s}"
        )));
    }
    let f = 1.0 / (1.0 - s).sqrt();
    let mut v = Vec::with_capacity(x.len() + 1);
    v.push(f);
    v.extend(x.iter().map(|c| f * c));
    HPoint::new(v)
}

/// Interior angle at `a` between the geodesics `[a,b]` and `[a,c]`.
pub fn angle_at_vertex(a: &HPoint, b: &HPoint, c: &HPoint) -> Result<f64> {
    let tb = tangent_toward(a, b)?;
    let tc = tangent_toward(a, c)?;
    // The Minkowski form is positive definite on the tangent space at `a`.
    let dot = mdot(tb.as_slice(), tc.as_slice());
    Ok(dot.clamp(-1.0, 1.0).acos())
}

/// Point reflection of `x` through `p` (an isometry of `H^n`).
fn point_reflect(p: &HPoint, x: &DVector<f64>) -> DVector<f64> {
    let s = mdot(x.as_slice(), p.coords());
    let dim = x.len();
    let mut out = DVector::zeros(dim);
    for i in 0..dim {
        out[i] = -x[i] - 2.0 * s * p.coords()[i];
    }
    out
}

/// The hyperbolic translation taking `from` to `to` (composition of point
/// reflections through `from` and the midpoint), applied to `x`.
pub fn translate_along(from: &HPoint, to: &HPoint, x: &HPoint) -> HPoint {
    if hdist(from, to) == 0.0 {
        return x.clone();
    }
    let mid = geodesic_point(from, to, 0.5);
    let y = point_reflect(from, &DVector::from_column_slice(x.coords()));
    let z = point_reflect(&mid, &y);
    HPoint::from_raw(z).expect("isometry image of a point is a point")
}
