//! Gauss-linking machinery: the 2-form kernel, the vector field X_G, the
//! 1-forms λ_G and λ_K, and linking numbers by two independent routes.
//!
//! The linking number of disjoint closed curves comes out of either the
//! double Gauss integral or the line integral of the knot-averaged field
//! λ_K; the two are the same integral with reordered summation, and the
//! acceptance suite pins their agreement at matched quadrature order.

use crate::curves::ParametricKnot;
use crate::error::Error;
use crate::integrals::{Estimate, QuadratureSpec};
use crate::quadrature;
use crate::{Result, Vec3};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Curve-pair separation below which linking integrals refuse to run.
pub const MIN_CURVE_SEPARATION: f64 = 1e-6;

fn det3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    a.cross(&b).dot(&c)
}

/// The Gauss 2-form density: det(vx, vy, x − y) / (4π |x − y|³).
///
/// Antisymmetric under swapping the two (point, tangent) pairs.
pub fn gauss_kernel(x: Vec3, vx: Vec3, y: Vec3, vy: Vec3) -> Result<f64> {
    let w = x - y;
    let d = w.norm();
    if d < crate::transport::COINCIDENT_EPS {
        return Err(Error::CoincidentPoints { distance: d });
    }
    Ok(det3(vx, vy, w) / (FOUR_PI * d.powi(3)))
}

/// The Gauss vector field of a tangent vector:
/// X_G(y; v)(x) = (1/4π) (x − y)/|x − y|³ × v.
pub fn x_g(y: Vec3, v: Vec3, x: Vec3) -> Result<Vec3> {
    let w = x - y;
    let d = w.norm();
    if d < crate::transport::COINCIDENT_EPS {
        return Err(Error::CoincidentPoints { distance: d });
    }
    Ok(w.cross(&v) / (FOUR_PI * d.powi(3)))
}

/// The Gauss 1-form λ_G(y; v)(u) = u · X_G(y; v)(x)
/// = det(x − y, v, u) / (4π |x − y|³).
pub fn lambda_g(y: Vec3, v: Vec3, x: Vec3, u: Vec3) -> Result<f64> {
    Ok(u.dot(&x_g(y, v, x)?))
}

/// The vector field dual to λ_K at x: A(x) = ∫_K X_G(y; v_y)(x) dy,
/// evaluated as ∫₀¹ (x − γ(s))/|x − γ(s)|³ × γ′(s) ds / 4π.
///
/// λ_K is closed (its curl vanishes); λ_G alone is not.
pub fn lambda_k_field(knot: &ParametricKnot, x: Vec3, tol: f64) -> Result<Vec3> {
    let (dist, _) = knot.distance_to_point(&x);
    if dist < MIN_CURVE_SEPARATION {
        return Err(Error::PointOnKnot { distance: dist });
    }
    let r = quadrature::periodic_trapezoid_vec3(
        |s| {
            let (p, v) = knot.point_and_velocity(s);
            let w = x - p;
            w.cross(&v) / (FOUR_PI * w.norm().powi(3))
        },
        tol,
        quadrature::MAX_NODES,
    );
    Ok(r.value)
}

/// A closed curve given by (point, velocity) at a parameter in [0, 1);
/// lets linking integrals run on Möbius images of knots, whose Fourier
/// form is not available.
pub trait ParamCurve {
    fn eval(&self, s: f64) -> (Vec3, Vec3);
}

impl ParamCurve for ParametricKnot {
    fn eval(&self, s: f64) -> (Vec3, Vec3) {
        self.point_and_velocity(s)
    }
}

impl<F: Fn(f64) -> (Vec3, Vec3)> ParamCurve for F {
    fn eval(&self, s: f64) -> (Vec3, Vec3) {
        self(s)
    }
}

/// Gauss linking integral of two disjoint closed curves by product
/// trapezoidal quadrature with node doubling on both axes.
pub fn linking_number_parametric<C1: ParamCurve, C2: ParamCurve>(
    c1: &C1,
    c2: &C2,
    tol: f64,
    max_nodes_per_axis: u32,
) -> Estimate {
    let cap = max_nodes_per_axis.clamp(64, quadrature::MAX_NODES);
    let mut n: u32 = 64;
    let mut value = f64::NAN;
    let mut gap = f64::INFINITY;
    let mut evals: u64 = 0;
    loop {
        let a: Vec<(Vec3, Vec3)> = (0..n).map(|j| c1.eval(j as f64 / n as f64)).collect();
        let b: Vec<(Vec3, Vec3)> = (0..n).map(|j| c2.eval(j as f64 / n as f64)).collect();
        let mut sum = 0.0;
        for (p1, v1) in &a {
            for (p2, v2) in &b {
                let w = p1 - p2;
                sum += det3(*v1, *v2, w) / w.norm().powi(3);
            }
        }
        evals += (n as u64) * (n as u64);
        let next = sum / (FOUR_PI * n as f64 * n as f64);
        gap = (next - value).abs();
        value = next;
        if gap <= tol * value.abs().max(1.0) || n >= cap {
            break;
        }
        n *= 2;
    }
    Estimate { value, standard_error: gap, samples: evals, accepted_fraction: 1.0 }
}

fn check_disjoint(k1: &ParametricKnot, k2: &ParametricKnot) -> Result<()> {
    let d = ParametricKnot::min_distance_between(k1, k2);
    if d <= MIN_CURVE_SEPARATION {
        return Err(Error::CurvesIntersect { distance: d });
    }
    Ok(())
}

fn axis_cap(quad: &QuadratureSpec) -> u32 {
    let mut n: u64 = 64;
    while n * 2 * n * 2 <= quad.sample_budget && n * 2 <= quadrature::MAX_NODES as u64 {
        n *= 2;
    }
    n as u32
}

/// Linking number of two disjoint knots via the double Gauss integral;
/// near-integer for closed curves, with quadrature gap as the error field.
pub fn linking_number(
    k1: &ParametricKnot,
    k2: &ParametricKnot,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    check_disjoint(k1, k2)?;
    Ok(linking_number_parametric(k1, k2, quadrature::DEFAULT_TOL, axis_cap(quad)))
}

/// Linking number as the line integral of the λ_K field of `knot` along
/// `other`, negated.
///
/// The sign: the Gauss integral integrand is det(v_y, v_x, y − x) while
/// u · X_G pairs to det(x − y, v_y, v_x) = −det(v_y, v_x, y − x), so the
/// raw line integral of λ_K carries the opposite sign of the linking
/// number as normalized by [`linking_number`]. This routine compensates,
/// making the two routes agree estimate-for-estimate.
pub fn linking_via_lambda_k(
    knot: &ParametricKnot,
    other: &ParametricKnot,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    check_disjoint(knot, other)?;
    let cap = axis_cap(quad);
    let inner_tol = quadrature::DEFAULT_TOL;
    let r = quadrature::periodic_trapezoid(
        |t| {
            let (x, u) = other.point_and_velocity(t);
            let field = quadrature::periodic_trapezoid_vec3(
                |s| {
                    let (p, v) = knot.point_and_velocity(s);
                    let w = x - p;
                    w.cross(&v) / (FOUR_PI * w.norm().powi(3))
                },
                inner_tol,
                cap,
            );
            field.value.dot(&u)
        },
        quadrature::DEFAULT_TOL,
        cap,
    );
    Ok(Estimate {
        value: -r.value,
        standard_error: r.error,
        samples: r.evals,
        accepted_fraction: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::{random_moebius, MoebiusMap};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gauss_kernel_examples() {
        let k = gauss_kernel(Vec3::zeros(), Vec3::x(), Vec3::new(0.0, 0.0, -1.0), Vec3::x());
        assert!(k.unwrap().abs() < 1e-15, "parallel tangents give zero");
        let k = gauss_kernel(Vec3::new(0.0, 0.0, 1.0), Vec3::x(), Vec3::zeros(), Vec3::y())
            .unwrap();
        assert_relative_eq!(k, 1.0 / FOUR_PI, epsilon = 1e-15);
    }

    #[test]
    fn gauss_kernel_swap_antisymmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut rv = |s: f64| {
            Vec3::new(
                s * (rng.gen::<f64>() - 0.5),
                s * (rng.gen::<f64>() - 0.5),
                s * (rng.gen::<f64>() - 0.5),
            )
        };
        for _ in 0..50 {
            let (x, vx, y, vy) = (rv(2.0), rv(1.0), rv(2.0), rv(1.0));
            if (x - y).norm() < 1e-3 {
                continue;
            }
            let a = gauss_kernel(x, vx, y, vy).unwrap();
            let b = gauss_kernel(y, vy, x, vx).unwrap();
            assert!((a + b).abs() <= 1e-12 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn x_g_examples() {
        let v = x_g(Vec3::zeros(), Vec3::z(), Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!(v.norm() > 0.0);
        // v parallel to x − y kills the cross product.
        let v = x_g(Vec3::zeros(), Vec3::x(), Vec3::new(3.0, 0.0, 0.0)).unwrap();
        assert!(v.norm() < 1e-15);
        let v = x_g(Vec3::zeros(), Vec3::z(), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((v - Vec3::new(0.0, -1.0, 0.0) / FOUR_PI).norm() < 1e-15);
    }

    #[test]
    fn lambda_g_is_x_g_paired() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rv = |s: f64| {
            Vec3::new(
                s * (rng.gen::<f64>() - 0.5),
                s * (rng.gen::<f64>() - 0.5),
                s * (rng.gen::<f64>() - 0.5),
            )
        };
        for _ in 0..30 {
            let (y, v, x, u) = (rv(2.0), rv(1.0), rv(2.0), rv(1.0));
            if (x - y).norm() < 1e-3 {
                continue;
            }
            let a = lambda_g(y, v, x, u).unwrap();
            let b = u.dot(&x_g(y, v, x).unwrap());
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
        // Repeated columns vanish.
        let y = Vec3::zeros();
        let v = Vec3::new(0.3, 0.4, 0.1);
        let x = Vec3::new(1.0, 2.0, 0.0);
        assert!(lambda_g(y, v, x, v).unwrap().abs() < 1e-16);
        assert!(lambda_g(y, v, x, x - y).unwrap().abs() < 1e-16);
        // Hand-evaluated determinant.
        let l = lambda_g(Vec3::zeros(), Vec3::z(), Vec3::new(1.0, 0.0, 0.0), -Vec3::y()).unwrap();
        assert_relative_eq!(l, 1.0 / FOUR_PI, epsilon = 1e-15);
    }

    #[test]
    fn hopf_pair_links_once() {
        let e = linking_number(
            &ParametricKnot::circle(),
            &ParametricKnot::hopf_partner(),
            &quad(),
        )
        .unwrap();
        assert!((e.value - 1.0).abs() < 1e-6, "Lk = {}", e.value);
    }

    #[test]
    fn unlinked_pairs_give_zero() {
        // Parallel-plane circles at distance 10, laterally offset so the
        // integrand has no symmetry to hide behind.
        let far = crate::curves::load_knot(
            r#"{"fourier": {"x": {"cos": [3.0, 1.0]}, "y": {"cos": [2.0], "sin": [0.0, 1.0]},
                 "z": {"cos": [10.0]}}}"#,
        )
        .unwrap();
        let e = linking_number(&ParametricKnot::circle(), &far, &quad()).unwrap();
        assert!(e.value.abs() < 1e-4);
        // Same circle translated far away decays below 1e-6.
        let shifted = crate::curves::load_knot(
            r#"{"fourier": {"x": {"cos": [100.0, 1.0]}, "y": {"sin": [0.0, 1.0]},
                 "z": {"cos": [20.0]}}}"#,
        )
        .unwrap();
        let e = linking_number(&ParametricKnot::circle(), &shifted, &quad()).unwrap();
        assert!(e.value.abs() < 1e-6);
    }

    #[test]
    fn intersecting_curves_are_rejected() {
        let k = ParametricKnot::circle();
        match linking_number(&k, &k.phase_shifted(0.25), &quad()) {
            Err(Error::CurvesIntersect { .. }) => {}
            other => panic!("expected CurvesIntersect, got {other:?}"),
        }
    }

    #[test]
    fn lambda_route_matches_gauss_route() {
        let k1 = ParametricKnot::circle();
        let k2 = ParametricKnot::hopf_partner();
        let a = linking_number(&k1, &k2, &quad()).unwrap();
        let b = linking_via_lambda_k(&k1, &k2, &quad()).unwrap();
        assert!((a.value - b.value).abs() < 1e-6, "{} vs {}", a.value, b.value);
        assert!((b.value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn lambda_k_field_on_circle_axis_is_axial() {
        let k = ParametricKnot::circle();
        let f = lambda_k_field(&k, Vec3::new(0.0, 0.0, 0.7), 1e-12).unwrap();
        assert!(f.x.abs() < 1e-12 && f.y.abs() < 1e-12);
        assert!(f.z.abs() > 1e-3);
    }

    #[test]
    fn lambda_k_field_far_decay_is_cubic() {
        // The closed-curve average cancels the 1/r² kernel term; what
        // survives decays like a dipole, 1/r³, giving ratio 8 per octave.
        let k = ParametricKnot::circle();
        let dir = Vec3::new(0.3, 0.2, 1.0).normalize();
        let a = lambda_k_field(&k, 50.0 * dir, 1e-13).unwrap().norm();
        let b = lambda_k_field(&k, 100.0 * dir, 1e-13).unwrap().norm();
        assert_relative_eq!(a / b, 8.0, max_relative = 0.05);
    }

    fn fd_curl(mut f: impl FnMut(Vec3) -> Vec3, x: Vec3, h: f64) -> Vec3 {
        let mut curl = Vec3::zeros();
        let mut partial = [Vec3::zeros(); 3];
        for c in 0..3 {
            let mut dx = Vec3::zeros();
            dx[c] = h;
            partial[c] = (f(x + dx) - f(x - dx)) / (2.0 * h);
        }
        curl.x = partial[1].z - partial[2].y;
        curl.y = partial[2].x - partial[0].z;
        curl.z = partial[0].y - partial[1].x;
        curl
    }

    #[test]
    fn lambda_k_is_closed() {
        let k = ParametricKnot::trefoil();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut checked = 0;
        while checked < 20 {
            let x = Vec3::new(
                8.0 * (rng.gen::<f64>() - 0.5),
                8.0 * (rng.gen::<f64>() - 0.5),
                8.0 * (rng.gen::<f64>() - 0.5),
            );
            if k.distance_to_point(&x).0 < 0.3 {
                continue;
            }
            let curl = fd_curl(|p| lambda_k_field(&k, p, 1e-12).unwrap(), x, 1e-4);
            assert!(curl.norm() < 1e-5, "curl at {x:?} = {}", curl.norm());
            checked += 1;
        }
    }

    #[test]
    fn lambda_g_is_not_closed() {
        // A single-tangent Gauss field has curl (v·∇)(x−y)/|x−y|³ ≠ 0.
        let y = Vec3::zeros();
        let v = Vec3::z();
        let x = Vec3::new(1.0, 0.0, 0.0);
        let curl = fd_curl(|p| x_g(y, v, p).unwrap(), x, 1e-4);
        assert!(curl.norm() > 0.01, "curl = {}", curl.norm());
    }

    #[test]
    fn closedness_proof_identity() {
        // ∇ × (F(x − f(s)) × f′(s)) = −d/ds F(x − f(s)) pointwise, where
        // F(w) = w/|w|³; both sides by central differences.
        let k = ParametricKnot::trefoil();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut checked = 0;
        while checked < 50 {
            let s: f64 = rng.gen();
            let x = Vec3::new(
                8.0 * (rng.gen::<f64>() - 0.5),
                8.0 * (rng.gen::<f64>() - 0.5),
                8.0 * (rng.gen::<f64>() - 0.5),
            );
            if (x - k.point(s)).norm() < 0.5 {
                continue;
            }
            let bigf = |p: Vec3, t: f64| {
                let w = p - k.point(t);
                w / w.norm().powi(3)
            };
            let lhs = fd_curl(|p| bigf(p, s).cross(&k.derivative(s, 1)), x, 1e-4);
            let hs = 1e-6;
            let rhs = -(bigf(x, s + hs) - bigf(x, s - hs)) / (2.0 * hs);
            assert!(
                (lhs - rhs).norm() <= 1e-5 * rhs.norm().max(1.0),
                "s={s} x={x:?}: {lhs:?} vs {rhs:?}"
            );
            checked += 1;
        }
    }

    #[test]
    fn linking_is_moebius_invariant() {
        let k1 = ParametricKnot::circle();
        let k2 = ParametricKnot::hopf_partner();
        let base = linking_number(&k1, &k2, &quad()).unwrap().value;
        let mut probes: Vec<Vec3> = Vec::new();
        for j in 0..64 {
            let s = j as f64 / 64.0;
            probes.push(k1.point(s));
            probes.push(k2.point(s));
        }
        for seed in [3, 8, 21] {
            let t = random_moebius(seed, 2.0, &probes);
            let image = |k: &ParametricKnot| {
                let k = k.clone();
                let t = t.clone();
                move |s: f64| {
                    let (p, v) = k.point_and_velocity(s);
                    let j = t.jacobian(p).expect("probes keep poles clear");
                    (t.apply(p).unwrap(), j * v)
                }
            };
            let mapped =
                linking_number_parametric(&image(&k1), &image(&k2), 1e-10, 2048).value;
            assert!(
                (mapped - base).abs() < 2e-3,
                "seed {seed}: {mapped} vs {base}"
            );
        }
    }

    #[test]
    fn linking_estimates_are_near_integers() {
        let pairs = [
            (ParametricKnot::circle(), ParametricKnot::hopf_partner()),
        ];
        for (a, b) in &pairs {
            let e = linking_number(a, b, &quad()).unwrap();
            assert!((e.value - e.value.round()).abs() < 1e-3);
        }
    }

    #[test]
    fn lambda_k_rejects_on_curve_points() {
        let k = ParametricKnot::circle();
        match lambda_k_field(&k, Vec3::new(1.0, 0.0, 0.0), 1e-10) {
            Err(Error::PointOnKnot { .. }) => {}
            other => panic!("expected PointOnKnot, got {other:?}"),
        }
    }

    #[test]
    fn pole_clearance_of_inversion_on_curve() {
        let k = ParametricKnot::circle();
        let probes: Vec<Vec3> = (0..128).map(|j| k.point(j as f64 / 128.0)).collect();
        let bad = MoebiusMap::inversion(Vec3::new(1.0, 0.0, 0.0), 1.0);
        assert!(bad.pole_clearance(&probes) < 0.05);
    }
}
