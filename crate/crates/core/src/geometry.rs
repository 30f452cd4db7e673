//! Sampled closed planar curves and multi-particle configurations.
//!
//! Every curve is sampled at `N` equispaced parameter values in `[0, 2pi)`
//! and carries analytic first and second derivatives, so the periodic
//! trapezoidal rule built on top of it converges spectrally.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

pub type Vec2 = [f64; 2];

pub const MIN_NODES: usize = 8;

/// A closed C² curve sampled for Nystrom quadrature.
///
/// Parametrisations are counter-clockwise, normals point outward and the
/// curvature of the unit circle is `+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub params: Vec<f64>,
    pub points: Vec<Vec2>,
    pub tangents: Vec<Vec2>,
    pub speeds: Vec<f64>,
    pub normals: Vec<Vec2>,
    pub curvatures: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BoundaryCurve {
    /// Builds the sampled curve from a parametrisation returning
    /// `(x, x', x'')` at parameter `t`.
    fn from_parametrization(n_nodes: usize, f: impl Fn(f64) -> (Vec2, Vec2, Vec2)) -> Self {
        let h = 2.0 * PI / n_nodes as f64;
        let mut curve = BoundaryCurve {
            params: Vec::with_capacity(n_nodes),
            points: Vec::with_capacity(n_nodes),
            tangents: Vec::with_capacity(n_nodes),
            speeds: Vec::with_capacity(n_nodes),
            normals: Vec::with_capacity(n_nodes),
            curvatures: Vec::with_capacity(n_nodes),
            weights: Vec::with_capacity(n_nodes),
        };
        for i in 0..n_nodes {
            let t = h * i as f64;
            let (x, d1, d2) = f(t);
            let speed = d1[0].hypot(d1[1]);
            let normal = [d1[1] / speed, -d1[0] / speed];
            let kappa = (d1[0] * d2[1] - d1[1] * d2[0]) / (speed * speed * speed);
            curve.params.push(t);
            curve.points.push(x);
            curve.tangents.push(d1);
            curve.speeds.push(speed);
            curve.normals.push(normal);
            curve.curvatures.push(kappa);
            curve.weights.push(speed * h);
        }
        curve
    }

    pub fn n_nodes(&self) -> usize {
        self.points.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Enclosed area from the divergence theorem, `1/2 sum (x . nu) w`.
    pub fn area(&self) -> f64 {
        0.5 * self
            .points
            .iter()
            .zip(&self.normals)
            .zip(&self.weights)
            .map(|((x, n), w)| (x[0] * n[0] + x[1] * n[1]) * w)
            .sum::<f64>()
    }

    /// Discrete `int nu dsigma`; zero for a closed curve.
    pub fn normal_moment(&self) -> Vec2 {
        let mut acc = [0.0; 2];
        for (n, w) in self.normals.iter().zip(&self.weights) {
            acc[0] += n[0] * w;
            acc[1] += n[1] * w;
        }
        acc
    }

    /// Even-odd point-in-polygon test against the node polygon.
    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.points.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.points[i], self.points[j]);
            if (a[1] > p[1]) != (b[1] > p[1])
                && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0]
            {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Axis-aligned extent of the nodes as `(min, max)`.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

fn check_nodes(n_nodes: usize) -> Result<()> {
    if n_nodes < MIN_NODES || n_nodes % 2 != 0 {
        return Err(invalid(
            "n_nodes",
            format!("must be even and at least {MIN_NODES}, got {n_nodes}"),
        ));
    }
    Ok(())
}

fn rotate(v: Vec2, cos: f64, sin: f64) -> Vec2 {
    [cos * v[0] - sin * v[1], sin * v[0] + cos * v[1]]
}

pub fn make_circle(radius: f64, center: Vec2, n_nodes: usize) -> Result<BoundaryCurve> {
    if !(radius > 0.0) {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    check_nodes(n_nodes)?;
    Ok(BoundaryCurve::from_parametrization(n_nodes, |t| {
        let (s, c) = t.sin_cos();
        (
            [center[0] + radius * c, center[1] + radius * s],
            [-radius * s, radius * c],
            [-radius * c, -radius * s],
        )
    }))
}

/// Ellipse with semi-axis `a` along the (rotated) first axis; `a >= b > 0`.
pub fn make_ellipse(
    a: f64,
    b: f64,
    center: Vec2,
    rotation: f64,
    n_nodes: usize,
) -> Result<BoundaryCurve> {
    if !(b > 0.0) {
        return Err(invalid("b", format!("must be positive, got {b}")));
    }
    if !(a >= b) {
        return Err(invalid(
            "a",
            format!("semi-axes must satisfy a >= b, got a = {a}, b = {b}"),
        ));
    }
    check_nodes(n_nodes)?;
    let (sr, cr) = rotation.sin_cos();
    Ok(BoundaryCurve::from_parametrization(n_nodes, |t| {
        let (s, c) = t.sin_cos();
        let x = rotate([a * c, b * s], cr, sr);
        (
            [center[0] + x[0], center[1] + x[1]],
            rotate([-a * s, b * c], cr, sr),
            rotate([-a * c, -b * s], cr, sr),
        )
    }))
}

/// Star-shaped curve `r(theta) = r0 (1 + amplitude cos(petals theta))`.
pub fn make_star(
    r0: f64,
    amplitude: f64,
    n_petals: u32,
    center: Vec2,
    rotation: f64,
    n_nodes: usize,
) -> Result<BoundaryCurve> {
    if !(r0 > 0.0) {
        return Err(invalid("r0", format!("must be positive, got {r0}")));
    }
    if !(0.0..1.0).contains(&amplitude) {
        return Err(invalid(
            "amplitude",
            format!("must lie in [0, 1), got {amplitude}"),
        ));
    }
    check_nodes(n_nodes)?;
    let k = n_petals as f64;
    let (sr, cr) = rotation.sin_cos();
    Ok(BoundaryCurve::from_parametrization(n_nodes, |t| {
        let (s, c) = t.sin_cos();
        let (sk, ck) = (k * t).sin_cos();
        let r = r0 * (1.0 + amplitude * ck);
        let r1 = -r0 * amplitude * k * sk;
        let r2 = -r0 * amplitude * k * k * ck;
        let x = rotate([r * c, r * s], cr, sr);
        let d1 = [r1 * c - r * s, r1 * s + r * c];
        let d2 = [
            r2 * c - 2.0 * r1 * s - r * c,
            r2 * s + 2.0 * r1 * c - r * s,
        ];
        (
            [center[0] + x[0], center[1] + x[1]],
            rotate(d1, cr, sr),
            rotate(d2, cr, sr),
        )
    }))
}

/// `x -> scale * R(rotation) x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub rotation: f64,
    pub translation: Vec2,
    pub scale: f64,
}

impl Default for Similarity {
    fn default() -> Self {
        Similarity {
            rotation: 0.0,
            translation: [0.0, 0.0],
            scale: 1.0,
        }
    }
}

impl Similarity {
    pub fn rotation(angle: f64) -> Self {
        Similarity {
            rotation: angle,
            ..Default::default()
        }
    }

    pub fn translation(offset: Vec2) -> Self {
        Similarity {
            translation: offset,
            ..Default::default()
        }
    }

    pub fn scaling(scale: f64) -> Self {
        Similarity {
            scale,
            ..Default::default()
        }
    }
}

pub fn transform(curve: &BoundaryCurve, motion: &Similarity) -> Result<BoundaryCurve> {
    let s = motion.scale;
    if !(s > 0.0) {
        return Err(invalid("scale", format!("must be positive, got {s}")));
    }
    let mut out = curve.clone();
    // Each component is only touched when it is not the identity, so the
    // identity motion reproduces the input bit for bit.
    if motion.rotation != 0.0 {
        let (sin, cos) = motion.rotation.sin_cos();
        for v in out
            .points
            .iter_mut()
            .chain(out.tangents.iter_mut())
            .chain(out.normals.iter_mut())
        {
            *v = rotate(*v, cos, sin);
        }
    }
    if s != 1.0 {
        for v in out.points.iter_mut().chain(out.tangents.iter_mut()) {
            v[0] *= s;
            v[1] *= s;
        }
        out.speeds.iter_mut().for_each(|v| *v *= s);
        out.weights.iter_mut().for_each(|v| *v *= s);
        out.curvatures.iter_mut().for_each(|v| *v /= s);
    }
    if motion.translation != [0.0, 0.0] {
        for p in out.points.iter_mut() {
            p[0] += motion.translation[0];
            p[1] += motion.translation[1];
        }
    }
    Ok(out)
}

pub const DEFAULT_MIN_DISTANCE: f64 = 1e-6;

/// An ordered set of disjoint particles.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    curves: Vec<BoundaryCurve>,
    labels: Vec<String>,
}

impl ParticleSystem {
    pub fn single(curve: BoundaryCurve) -> Self {
        ParticleSystem {
            curves: vec![curve],
            labels: vec!["D1".to_owned()],
        }
    }

    /// Builds a system, labelling particles `D1, D2, ...`.
    pub fn new(curves: Vec<BoundaryCurve>, min_distance: f64) -> Result<Self> {
        let labels = (1..=curves.len()).map(|i| format!("D{i}")).collect();
        Self::with_labels(curves, labels, min_distance)
    }

    pub fn with_labels(
        curves: Vec<BoundaryCurve>,
        labels: Vec<String>,
        min_distance: f64,
    ) -> Result<Self> {
        if curves.is_empty() {
            return Err(invalid("curves", "a particle system needs at least one curve"));
        }
        if labels.len() != curves.len() {
            return Err(Error::Dimension {
                expected: curves.len(),
                got: labels.len(),
            });
        }
        for i in 0..curves.len() {
            for j in i + 1..curves.len() {
                let nested = curves[i].points.iter().any(|p| curves[j].contains(*p))
                    || curves[j].points.iter().any(|p| curves[i].contains(*p));
                let distance = if nested { 0.0 } else { node_distance(&curves[i], &curves[j]) };
                if !(distance > min_distance) {
                    return Err(Error::Overlap {
                        first: i,
                        second: j,
                        distance,
                        threshold: min_distance,
                    });
                }
            }
        }
        Ok(ParticleSystem { curves, labels })
    }

    pub fn curves(&self) -> &[BoundaryCurve] {
        &self.curves
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn total_nodes(&self) -> usize {
        self.curves.iter().map(BoundaryCurve::n_nodes).sum()
    }
}

/// Minimum node-to-node distance between two sampled curves.
pub fn node_distance(a: &BoundaryCurve, b: &BoundaryCurve) -> f64 {
    let mut best = f64::INFINITY;
    for p in &a.points {
        for q in &b.points {
            best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    best
}

/// Places two curves along the x-axis, symmetric about the origin, with a
/// horizontal gap `distance` between the node extents.
pub fn place_pair(
    left: &BoundaryCurve,
    right: &BoundaryCurve,
    distance: f64,
) -> Result<(BoundaryCurve, BoundaryCurve)> {
    if !(distance > 0.0) {
        return Err(invalid(
            "distance",
            format!("must be positive, got {distance}"),
        ));
    }
    let (l_lo, l_hi) = left.bounding_box();
    let (r_lo, r_hi) = right.bounding_box();
    let l_cy = 0.5 * (l_lo[1] + l_hi[1]);
    let r_cy = 0.5 * (r_lo[1] + r_hi[1]);
    let l = transform(
        left,
        &Similarity::translation([-0.5 * distance - l_hi[0], -l_cy]),
    )?;
    let r = transform(
        right,
        &Similarity::translation([0.5 * distance - r_lo[0], -r_cy]),
    )?;
    Ok((l, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(v: Vec2) -> f64 {
        v[0].hypot(v[1])
    }

    #[test]
    fn unit_circle_identities() {
        let c = make_circle(1.0, [0.0, 0.0], 64).unwrap();
        assert!((c.perimeter() - 2.0 * PI).abs() < 1e-12);
        for i in 0..64 {
            assert!((c.curvatures[i] - 1.0).abs() < 1e-14);
            assert!((c.normals[i][0] - c.points[i][0]).abs() < 1e-15);
            assert!((c.normals[i][1] - c.points[i][1]).abs() < 1e-15);
        }
    }

    #[test]
    fn shifted_circle_scales() {
        let c = make_circle(2.0, [3.0, 0.0], 128).unwrap();
        assert!((c.perimeter() - 4.0 * PI).abs() < 1e-12);
        assert!(c.curvatures.iter().all(|k| (k - 0.5).abs() < 1e-14));
    }

    #[test]
    fn rejects_bad_node_counts_and_radii() {
        assert!(make_circle(1.0, [0.0, 0.0], 7).is_err());
        assert!(make_circle(1.0, [0.0, 0.0], 6).is_err());
        assert!(make_circle(0.0, [0.0, 0.0], 64).is_err());
        assert!(make_circle(-1.0, [0.0, 0.0], 64).is_err());
    }

    #[test]
    fn degenerate_ellipse_is_a_circle() {
        let e = make_ellipse(1.0, 1.0, [0.0, 0.0], 0.0, 64).unwrap();
        let c = make_circle(1.0, [0.0, 0.0], 64).unwrap();
        for i in 0..64 {
            for k in 0..2 {
                assert!((e.points[i][k] - c.points[i][k]).abs() < 1e-14);
                assert!((e.normals[i][k] - c.normals[i][k]).abs() < 1e-14);
            }
            assert!((e.curvatures[i] - c.curvatures[i]).abs() < 1e-14);
            assert!((e.weights[i] - c.weights[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn ellipse_area_and_axis_order() {
        let e = make_ellipse(1.0, 0.5, [0.0, 0.0], 0.0, 256).unwrap();
        assert!((e.area() - PI / 2.0).abs() < 1e-10);
        assert!(make_ellipse(0.5, 1.0, [0.0, 0.0], 0.0, 64).is_err());
    }

    #[test]
    fn star_limits() {
        let s = make_star(1.0, 0.0, 5, [0.0, 0.0], 0.0, 128).unwrap();
        let c = make_circle(1.0, [0.0, 0.0], 128).unwrap();
        for i in 0..128 {
            assert!((s.points[i][0] - c.points[i][0]).abs() < 1e-15);
            assert!((s.curvatures[i] - 1.0).abs() < 1e-13);
        }
        let s = make_star(1.0, 0.3, 5, [0.0, 0.0], 0.0, 256).unwrap();
        assert!(norm(s.normal_moment()) < 1e-9);
        assert!(make_star(1.0, 1.2, 5, [0.0, 0.0], 0.0, 128).is_err());
        assert!(make_star(1.0, 1.0, 5, [0.0, 0.0], 0.0, 128).is_err());
    }

    #[test]
    fn star_area_matches_polar_formula() {
        // area = pi r0^2 (1 + A^2 / 2) for r = r0 (1 + A cos k theta)
        let s = make_star(1.0, 0.3, 5, [0.0, 0.0], 0.0, 256).unwrap();
        assert!((s.area() - PI * (1.0 + 0.045)).abs() < 1e-10);
    }

    #[test]
    fn generator_invariants() {
        for n in [64, 128, 256] {
            let curves = [
                make_circle(1.3, [0.2, -0.1], n).unwrap(),
                make_ellipse(1.0, 0.5, [0.0, 0.0], 0.3, n).unwrap(),
                make_star(1.0, 0.2, 3, [0.0, 0.0], 0.1, n).unwrap(),
            ];
            for c in &curves {
                assert!(norm(c.normal_moment()) <= 1e-9 * c.perimeter());
                for i in 0..n {
                    assert!((norm(c.normals[i]) - 1.0).abs() < 1e-12);
                    let dot = c.normals[i][0] * c.tangents[i][0]
                        + c.normals[i][1] * c.tangents[i][1];
                    assert!(dot.abs() < 1e-12 * c.speeds[i]);
                }
            }
        }
    }

    #[test]
    fn identity_transform_is_bitwise() {
        let e = make_ellipse(1.0, 0.5, [0.1, -0.2], 0.7, 64).unwrap();
        assert_eq!(transform(&e, &Similarity::default()).unwrap(), e);
    }

    #[test]
    fn scaling_circle() {
        let c = make_circle(1.0, [0.0, 0.0], 64).unwrap();
        let s = transform(&c, &Similarity::scaling(2.0)).unwrap();
        assert!(s.curvatures.iter().all(|k| (k - 0.5).abs() < 1e-14));
        assert!((s.perimeter() - 4.0 * PI).abs() < 1e-12);
        assert!(transform(&c, &Similarity::scaling(0.0)).is_err());
        assert!(transform(&c, &Similarity::scaling(-1.0)).is_err());
    }

    #[test]
    fn overlapping_particles_rejected() {
        let a = make_circle(1.0, [0.0, 0.0], 64).unwrap();
        let b = make_circle(1.0, [1.0, 0.0], 64).unwrap();
        let err = ParticleSystem::new(vec![a.clone(), b], DEFAULT_MIN_DISTANCE).unwrap_err();
        assert!(matches!(err, Error::Overlap { .. }));
        let c = make_circle(1.0, [3.0, 0.0], 64).unwrap();
        assert!(ParticleSystem::new(vec![a, c], DEFAULT_MIN_DISTANCE).is_ok());
        assert!(ParticleSystem::new(vec![], DEFAULT_MIN_DISTANCE).is_err());
    }

    #[test]
    fn pair_placement_gap() {
        let c = make_circle(1.0, [0.0, 0.0], 64).unwrap();
        let (l, r) = place_pair(&c, &c, 0.02).unwrap();
        let (_, l_hi) = l.bounding_box();
        let (r_lo, _) = r.bounding_box();
        assert!((l_hi[0] + 0.01).abs() < 1e-15);
        assert!((r_lo[0] - 0.01).abs() < 1e-15);
        assert!((node_distance(&l, &r) - 0.02).abs() < 1e-14);
        assert!(place_pair(&c, &c, -1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rigid_motion_preserves_intrinsic_data(
                angle in -PI..PI,
                tx in -5.0..5.0f64,
                ty in -5.0..5.0f64,
            ) {
                let e = make_star(1.0, 0.25, 4, [0.0, 0.0], 0.0, 64).unwrap();
                let m = Similarity { rotation: angle, translation: [tx, ty], scale: 1.0 };
                let t = transform(&e, &m).unwrap();
                for i in 0..64 {
                    prop_assert!((t.speeds[i] - e.speeds[i]).abs() < 1e-13);
                    prop_assert!((t.curvatures[i] - e.curvatures[i]).abs() < 1e-13);
                    prop_assert!((t.weights[i] - e.weights[i]).abs() < 1e-13);
                }
                prop_assert!((t.area() - e.area()).abs() < 1e-10);
            }
        }
    }
}
