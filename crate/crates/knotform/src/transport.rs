//! Conformal transportation of tangent vectors and the 1-form it induces.
//!
//! A vector v at y determines, at every x ≠ y, the tangent direction at x
//! of the circle through x tangent to v at y. Reflecting v in the line
//! through x − y gives the unit transport v̂(x); dividing by |x − y|² gives
//! the conformally natural field ṽ(x). The 1-form ω̃(u) = u · ṽ(x) is
//! exact (potential ψ) and Möbius invariant, and its knot average
//! ω̃_K vanishes identically — all of which the test suites check against
//! inversion-based expressions from [`crate::moebius`].

use crate::curves::ParametricKnot;
use crate::error::Error;
use crate::quadrature;
use crate::{Result, Vec3};

/// Distance below which two points count as coincident.
pub const COINCIDENT_EPS: f64 = 1e-12;

/// Minimum distance from the knot required by [`omega_tilde_k`].
pub const KNOT_CLEARANCE: f64 = 1e-6;

fn separation(y: Vec3, x: Vec3) -> Result<(Vec3, f64)> {
    let w = x - y;
    let d = w.norm();
    if d < COINCIDENT_EPS {
        return Err(Error::CoincidentPoints { distance: d });
    }
    Ok((w, d))
}

/// Unit conformal transportation v̂(x) = 2(v·ŵ)ŵ − v with ŵ = (x−y)/|x−y|:
/// the reflection of v in the line through x − y. Preserves |v|.
pub fn unit_transport(y: Vec3, v: Vec3, x: Vec3) -> Result<Vec3> {
    let (w, d) = separation(y, x)?;
    let wh = w / d;
    Ok(2.0 * v.dot(&wh) * wh - v)
}

/// Conformal transportation ṽ(x) = v̂(x)/|x−y|².
pub fn transport(y: Vec3, v: Vec3, x: Vec3) -> Result<Vec3> {
    let (w, d) = separation(y, x)?;
    let wh = w / d;
    Ok((2.0 * v.dot(&wh) * wh - v) / (d * d))
}

/// The 1-form ω̃(y; v) evaluated on u ∈ T_xℝ³: u · ṽ(x).
pub fn omega_tilde(y: Vec3, v: Vec3, x: Vec3, u: Vec3) -> Result<f64> {
    Ok(u.dot(&transport(y, v, x)?))
}

/// Potential of ω̃(y; v): ψ(x) = −I_y(x) · v with I_y the unit-radius
/// inversion centered at y, so that ∇ψ = ṽ.
pub fn psi(y: Vec3, v: Vec3, x: Vec3) -> Result<f64> {
    let (w, d) = separation(y, x)?;
    Ok(-(y + w / (d * d)).dot(&v))
}

/// The vector field dual to the knot-averaged 1-form ω̃_K at x:
/// ∫₀¹ ṽ(x; γ(s), γ′(s)) ds by adaptive periodic quadrature.
///
/// Vanishes identically for closed curves (the integrand is the exact
/// s-derivative of −I_x ∘ γ); the returned vector is the quadrature's
/// residual around zero.
pub fn omega_tilde_k(knot: &ParametricKnot, x: Vec3, tol: f64) -> Result<Vec3> {
    let (dist, _) = knot.distance_to_point(&x);
    if dist < KNOT_CLEARANCE {
        return Err(Error::PointOnKnot { distance: dist });
    }
    let r = quadrature::periodic_trapezoid_vec3(
        |s| {
            let (p, v) = knot.point_and_velocity(s);
            transport(p, v, x).expect("clearance checked above")
        },
        tol,
        quadrature::MAX_NODES,
    );
    Ok(r.value)
}

/// Conformal angle θ_K(x, y) ∈ [0, π] between the knot tangent at
/// x = γ(s) and the circle through x tangent to the knot at y = γ(t).
///
/// The circle's tangent direction at x equals the unit transport of the
/// tangent at y, so no circle fitting is involved; atan2 of cross and dot
/// keeps small angles fully accurate.
pub fn conformal_angle(knot: &ParametricKnot, s: f64, t: f64) -> Result<f64> {
    let (x, vx) = knot.point_and_velocity(s);
    let (y, vy) = knot.point_and_velocity(t);
    let vhat = unit_transport(y, vy, x)?;
    let cross = vhat.cross(&vx).norm();
    let dot = vhat.dot(&vx);
    Ok(cross.atan2(dot).clamp(0.0, std::f64::consts::PI))
}

/// Near-diagonal coefficient of the conformal angle at γ(s), predicted to
/// be √(κ′² + κ²τ²)/6 from the Frenet data.
pub fn predicted_angle_coefficient(knot: &ParametricKnot, s: f64) -> Result<f64> {
    let f = knot.frenet(s)?;
    Ok((f.curvature_deriv.powi(2) + (f.curvature * f.torsion).powi(2)).sqrt() / 6.0)
}

/// Least-squares fit of θ ≈ c·|x−y|² over chord lengths in
/// [`ANGLE_FIT_WINDOW`], sampling both sides of the base point.
///
/// Below the window, floating-point cancellation in the angle dominates;
/// above it, the cubic remainder does.
pub fn fitted_angle_coefficient(knot: &ParametricKnot, s: f64) -> Result<f64> {
    let (dlo, dhi) = ANGLE_FIT_WINDOW;
    let speed = knot.frenet(s)?.speed;
    let mut num = 0.0;
    let mut den = 0.0;
    let n = 40;
    for side in [-1.0, 1.0] {
        for j in 0..n {
            let frac = (j as f64 + 0.5) / n as f64;
            let target = dlo * (dhi / dlo).powf(frac);
            let dt = side * target / speed;
            let x = knot.point(s);
            let y = knot.point(s + dt);
            let d = (x - y).norm();
            if d < dlo || d > dhi {
                continue;
            }
            let theta = conformal_angle(knot, s, s + dt)?;
            num += theta * d * d;
            den += d.powi(4);
        }
    }
    if den == 0.0 {
        return Err(Error::Validation("no fit samples landed in the window".into()));
    }
    Ok(num / den)
}

/// Chord-length window for the conformal-angle slope fit.
pub const ANGLE_FIT_WINDOW: (f64, f64) = (1e-3, 1e-2);
