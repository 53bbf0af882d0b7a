//! Möbius transformations of ℝ³ ∪ {∞} as chains of primitives.
//!
//! A map is stored as an ordered composition of translations, scalings,
//! orthogonal maps, and sphere inversions, applied left to right. Every
//! quantity this crate needs — the conformal factor |T′|, the Jacobian,
//! the orientation sign — has an exact per-primitive formula, so no
//! matrix-representation conversion is ever involved.
//!
//! Poles are surfaced as errors rather than mapped to ∞: nothing here
//! ever needs the image of an inversion center.

use crate::error::Error;
use crate::{Mat3, Result, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// Distance at which a point counts as sitting on an inversion center.
pub const POLE_EPS: f64 = 1e-12;

/// One conformal building block.
#[derive(Debug, Clone)]
pub enum Primitive {
    /// x ↦ x + b.
    Translation(Vec3),
    /// x ↦ λx with λ > 0.
    Scaling(f64),
    /// x ↦ Qx with Q ∈ O(3).
    Orthogonal(Mat3),
    /// x ↦ c + r²(x − c)/|x − c|².
    Inversion { center: Vec3, radius: f64 },
}

/// A (base point, vector) pair; the argument and result type of
/// pushforwards and conformal transport.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: Vec3,
    pub vec: Vec3,
}

impl TangentVector {
    pub fn new(base: Vec3, vec: Vec3) -> Self {
        TangentVector { base, vec }
    }
}

/// Inversion in the sphere of the given center and radius; an involution
/// fixing the sphere pointwise.
pub fn invert(center: Vec3, radius: f64, x: Vec3) -> Result<Vec3> {
    let w = x - center;
    let n2 = w.norm_squared();
    if n2 < POLE_EPS * POLE_EPS {
        return Err(Error::Pole { distance: n2.sqrt() });
    }
    Ok(center + (radius * radius / n2) * w)
}

impl Primitive {
    fn apply(&self, x: Vec3) -> Result<Vec3> {
        match self {
            Primitive::Translation(b) => Ok(x + b),
            Primitive::Scaling(l) => Ok(*l * x),
            Primitive::Orthogonal(q) => Ok(q * x),
            Primitive::Inversion { center, radius } => invert(*center, *radius, x),
        }
    }

    /// |det dT|^{1/6} at x. Translations and orthogonal maps contribute 1,
    /// a scaling by λ contributes √λ (|det λI|^{1/6} = λ^{1/2}), and an
    /// inversion contributes r/|x − c|.
    fn factor(&self, x: Vec3) -> Result<f64> {
        match self {
            Primitive::Translation(_) | Primitive::Orthogonal(_) => Ok(1.0),
            Primitive::Scaling(l) => Ok(l.sqrt()),
            Primitive::Inversion { center, radius } => {
                let d = (x - center).norm();
                if d < POLE_EPS {
                    return Err(Error::Pole { distance: d });
                }
                Ok(radius / d)
            }
        }
    }

    fn jacobian(&self, x: Vec3) -> Result<Mat3> {
        match self {
            Primitive::Translation(_) => Ok(Mat3::identity()),
            Primitive::Scaling(l) => Ok(Mat3::identity() * *l),
            Primitive::Orthogonal(q) => Ok(*q),
            Primitive::Inversion { center, radius } => {
                let w = x - center;
                let n2 = w.norm_squared();
                if n2 < POLE_EPS * POLE_EPS {
                    return Err(Error::Pole { distance: n2.sqrt() });
                }
                let wh = w / n2.sqrt();
                let refl = Mat3::identity() - 2.0 * wh * wh.transpose();
                Ok((radius * radius / n2) * refl)
            }
        }
    }

    fn det_sign(&self) -> f64 {
        match self {
            Primitive::Translation(_) | Primitive::Scaling(_) => 1.0,
            Primitive::Orthogonal(q) => q.determinant().signum(),
            Primitive::Inversion { .. } => -1.0,
        }
    }
}

/// A Möbius transformation as a left-to-right composition chain.
#[derive(Debug, Clone, Default)]
pub struct MoebiusMap {
    chain: Vec<Primitive>,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        MoebiusMap { chain: Vec::new() }
    }

    pub fn new(chain: Vec<Primitive>) -> Self {
        MoebiusMap { chain }
    }

    /// Single-inversion map I_p with the given radius.
    pub fn inversion(center: Vec3, radius: f64) -> Self {
        MoebiusMap { chain: vec![Primitive::Inversion { center, radius }] }
    }

    pub fn chain(&self) -> &[Primitive] {
        &self.chain
    }

    pub fn push(&mut self, p: Primitive) {
        self.chain.push(p);
    }

    /// T(x); errors if any prefix maps x onto a subsequent inversion center.
    pub fn apply(&self, x: Vec3) -> Result<Vec3> {
        let mut y = x;
        for p in &self.chain {
            y = p.apply(y)?;
        }
        Ok(y)
    }

    /// |T′(p)| = |det dT(p)|^{1/6}: the product of per-primitive factors
    /// along the running point.
    pub fn conformal_factor(&self, p: Vec3) -> Result<f64> {
        let mut y = p;
        let mut f = 1.0;
        for prim in &self.chain {
            f *= prim.factor(y)?;
            y = prim.apply(y)?;
        }
        Ok(f)
    }

    /// Analytic Jacobian dT(p), the product of per-primitive Jacobians.
    pub fn jacobian(&self, p: Vec3) -> Result<Mat3> {
        let mut y = p;
        let mut j = Mat3::identity();
        for prim in &self.chain {
            j = prim.jacobian(y)? * j;
            y = prim.apply(y)?;
        }
        Ok(j)
    }

    /// Sign of det dT: −1 per inversion times det of each orthogonal factor.
    pub fn orientation_sign(&self) -> f64 {
        self.chain.iter().map(Primitive::det_sign).product()
    }

    /// T₊: base point through T, vector through the analytic Jacobian.
    pub fn pushforward(&self, tv: TangentVector) -> Result<TangentVector> {
        Ok(TangentVector {
            base: self.apply(tv.base)?,
            vec: self.jacobian(tv.base)? * tv.vec,
        })
    }

    /// Smallest distance from any running point of the chain to a
    /// subsequent inversion center, over the given probe set. Used to
    /// decide whether a map is admissible for a curve.
    pub fn pole_clearance(&self, probes: &[Vec3]) -> f64 {
        let mut clearance = f64::INFINITY;
        let mut pts = probes.to_vec();
        for prim in &self.chain {
            if let Primitive::Inversion { center, .. } = prim {
                for p in &pts {
                    clearance = clearance.min((p - center).norm());
                }
            }
            for p in &mut pts {
                match prim.apply(*p) {
                    Ok(y) => *p = y,
                    Err(_) => return 0.0,
                }
            }
        }
        clearance
    }
}

/// Deterministic random Möbius map for test harnesses.
///
/// Builds a chain of at most 4 primitives. Translation vectors and
/// inversion centers stay within `bound`; inversion centers additionally
/// keep distance ≥ 0.1 from the running images of `avoid`, so applying the
/// map to those points can never hit a pole.
pub fn random_moebius(seed: u64, bound: f64, avoid: &[Vec3]) -> MoebiusMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = bound.max(0.5);
    let len = rng.gen_range(1..=4usize);
    let mut chain = Vec::with_capacity(len);
    let mut running: Vec<Vec3> = avoid.to_vec();
    for _ in 0..len {
        let prim = match rng.gen_range(0..4u8) {
            0 => Primitive::Translation(ball(&mut rng, bound)),
            1 => {
                let lo = (1.0 / bound).min(0.5);
                let hi = bound.min(2.0);
                Primitive::Scaling((rng.gen::<f64>() * (hi.ln() - lo.ln()) + lo.ln()).exp())
            }
            2 => {
                let mut q = random_rotation(&mut rng);
                if rng.gen::<bool>() {
                    // Flip to the reflection component of O(3).
                    q.column_mut(2).neg_mut();
                }
                Primitive::Orthogonal(q)
            }
            _ => {
                let radius = (0.5 + 1.5 * rng.gen::<f64>()).min(bound);
                let mut center = None;
                for _ in 0..100 {
                    let c = ball(&mut rng, bound);
                    if running.iter().all(|p| (p - c).norm() >= 0.1) {
                        center = Some(c);
                        break;
                    }
                }
                match center {
                    Some(center) => Primitive::Inversion { center, radius },
                    None => Primitive::Translation(ball(&mut rng, bound)),
                }
            }
        };
        for p in &mut running {
            *p = prim.apply(*p).expect("avoidance construction precludes poles");
        }
        chain.push(prim);
    }
    MoebiusMap { chain }
}

fn ball(rng: &mut ChaCha8Rng, radius: f64) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        );
        if v.norm_squared() <= 1.0 {
            return radius * v;
        }
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    // Uniform rotation from a normalized quaternion with Gaussian-ish
    // components (sum of uniforms is plenty for test data).
    let mut q = [0.0f64; 4];
    for c in &mut q {
        *c = rng.gen::<f64>() + rng.gen::<f64>() - 1.0;
    }
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    if n < 1e-9 {
        return Mat3::identity();
    }
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum PrimitiveDoc {
    Inversion { center: [f64; 3], radius: f64 },
    Translate { b: [f64; 3] },
    Scale { l: f64 },
    Orthogonal { matrix: [[f64; 3]; 3] },
}

/// Parse a Möbius document: an ordered JSON list of primitives, e.g.
/// `[{"type":"inversion","center":[0,0,0],"radius":1},
///   {"type":"translate","b":[1,0,0]}]`.
pub fn load_moebius(text: &str) -> Result<MoebiusMap> {
    let docs: Vec<PrimitiveDoc> = serde_json::from_str(text)?;
    let mut chain = Vec::with_capacity(docs.len());
    for d in docs {
        chain.push(match d {
            PrimitiveDoc::Inversion { center, radius } => {
                if radius <= 0.0 {
                    return Err(Error::Validation("inversion radius must be positive".into()));
                }
                Primitive::Inversion { center: Vec3::from(center), radius }
            }
            PrimitiveDoc::Translate { b } => Primitive::Translation(Vec3::from(b)),
            PrimitiveDoc::Scale { l } => {
                if l <= 0.0 {
                    return Err(Error::Validation("scaling factor must be positive".into()));
                }
                Primitive::Scaling(l)
            }
            PrimitiveDoc::Orthogonal { matrix } => {
                let q = Mat3::from_fn(|i, j| matrix[i][j]);
                let dev = (q.transpose() * q - Mat3::identity()).norm();
                if dev > 1e-9 {
                    return Err(Error::Validation(format!(
                        "matrix is not orthogonal (‖QᵀQ − I‖ = {dev:.3e})"
                    )));
                }
                Primitive::Orthogonal(q)
            }
        });
    }
    Ok(MoebiusMap::new(chain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn invert_examples() {
        let y = invert(Vec3::zeros(), 1.0, Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((y - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-15);
        // Points of the sphere are fixed.
        let x = Vec3::new(0.6, 0.8, 0.0);
        assert!((invert(Vec3::zeros(), 1.0, x).unwrap() - x).norm() < 1e-15);
        let x = Vec3::new(3.0, 0.0, 0.0);
        assert!((invert(Vec3::new(1.0, 0.0, 0.0), 2.0, x).unwrap() - x).norm() < 1e-15);
        assert!(invert(Vec3::zeros(), 1.0, Vec3::zeros()).is_err());
    }

    #[test]
    fn apply_composes_left_to_right() {
        let t = MoebiusMap::new(vec![
            Primitive::Scaling(2.0),
            Primitive::Translation(Vec3::new(1.0, 0.0, 0.0)),
        ]);
        let y = t.apply(Vec3::new(1.0, 1.0, 1.0)).unwrap();
        assert!((y - Vec3::new(3.0, 2.0, 2.0)).norm() < 1e-15);
        assert!((MoebiusMap::identity().apply(y).unwrap() - y).norm() == 0.0);
    }

    #[test]
    fn double_inversion_is_identity() {
        let t = MoebiusMap::new(vec![
            Primitive::Inversion { center: Vec3::zeros(), radius: 1.0 },
            Primitive::Inversion { center: Vec3::zeros(), radius: 1.0 },
        ]);
        let x = Vec3::new(0.3, 0.4, 0.0);
        assert!((t.apply(x).unwrap() - x).norm() < 1e-14);
    }

    #[test]
    fn conformal_factor_examples() {
        let inv = MoebiusMap::inversion(Vec3::zeros(), 1.0);
        assert_relative_eq!(
            inv.conformal_factor(Vec3::new(2.0, 0.0, 0.0)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            MoebiusMap::identity().conformal_factor(Vec3::new(5.0, 1.0, 2.0)).unwrap(),
            1.0
        );
        // |det d(λx)|^{1/6} = λ^{1/2}; the two-point identity below forces
        // the square root.
        let s = MoebiusMap::new(vec![Primitive::Scaling(3.0)]);
        assert_relative_eq!(
            s.conformal_factor(Vec3::new(1.0, 1.0, 1.0)).unwrap(),
            3.0f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn pushforward_under_unit_inversion() {
        let inv = MoebiusMap::inversion(Vec3::zeros(), 1.0);
        let tv = TangentVector::new(Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
        let out = inv.pushforward(tv).unwrap();
        // Analytic Jacobian of x ↦ x/|x|² is (I − 2x̂x̂ᵀ)/|x|².
        assert!((out.vec - Vec3::new(0.0, 0.25, 0.0)).norm() < 1e-15);
        assert!((out.base - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-15);
        // |T₊v| = |T′|²|v| with |T′| = 1/2.
        let f = inv.conformal_factor(tv.base).unwrap();
        assert_relative_eq!(out.vec.norm(), f * f * tv.vec.norm(), epsilon = 1e-14);
    }

    #[test]
    fn two_point_identity_random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..200 {
            let p = ball(&mut rng, 2.0);
            let q = ball(&mut rng, 2.0);
            if (p - q).norm() < 1e-3 {
                continue;
            }
            let t = random_moebius(1000 + i, 3.0, &[p, q]);
            let lhs = (t.apply(p).unwrap() - t.apply(q).unwrap()).norm();
            let rhs = t.conformal_factor(p).unwrap()
                * t.conformal_factor(q).unwrap()
                * (p - q).norm();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
        }
    }

    #[test]
    fn pushforward_norm_identity_random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for i in 0..200 {
            let p = ball(&mut rng, 2.0);
            let v = ball(&mut rng, 1.0);
            let t = random_moebius(5000 + i, 3.0, &[p]);
            let out = t.pushforward(TangentVector::new(p, v)).unwrap();
            let f = t.conformal_factor(p).unwrap();
            assert_relative_eq!(out.vec.norm(), f * f * v.norm(), max_relative = 1e-9);
        }
    }

    #[test]
    fn conformal_factor_matches_fd_jacobian() {
        for i in 0..40 {
            let p = Vec3::new(0.3 + 0.01 * i as f64, -0.2, 0.5);
            let t = random_moebius(77 + i, 2.5, &[p]);
            let h = 1e-5;
            let mut j = Mat3::zeros();
            for c in 0..3 {
                let mut dp = Vec3::zeros();
                dp[c] = h;
                let col = (t.apply(p + dp).unwrap() - t.apply(p - dp).unwrap()) / (2.0 * h);
                j.set_column(c, &col);
            }
            let fd = j.determinant().abs().powf(1.0 / 6.0);
            assert_relative_eq!(t.conformal_factor(p).unwrap(), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn analytic_jacobian_matches_fd() {
        let p = Vec3::new(0.4, 0.1, -0.3);
        let t = random_moebius(123, 2.0, &[p]);
        let j = t.jacobian(p).unwrap();
        let h = 1e-6;
        for c in 0..3 {
            let mut dp = Vec3::zeros();
            dp[c] = h;
            let col = (t.apply(p + dp).unwrap() - t.apply(p - dp).unwrap()) / (2.0 * h);
            assert!((j.column(c) - col).norm() < 1e-5 * (1.0 + col.norm()));
        }
        // Orientation sign agrees with the Jacobian determinant.
        assert_eq!(t.orientation_sign(), j.determinant().signum());
    }

    #[test]
    fn random_moebius_is_deterministic_and_bounded() {
        let a = random_moebius(1, 5.0, &[]);
        let b = random_moebius(1, 5.0, &[]);
        assert_eq!(a.chain().len(), b.chain().len());
        for (x, y) in a.chain().iter().zip(b.chain()) {
            match (x, y) {
                (Primitive::Translation(u), Primitive::Translation(v)) => {
                    assert_eq!(u, v);
                    assert!(u.norm() <= 5.0);
                }
                (Primitive::Scaling(u), Primitive::Scaling(v)) => {
                    assert_eq!(u, v);
                    assert!(*u <= 5.0 && *u >= 0.2);
                }
                (Primitive::Orthogonal(u), Primitive::Orthogonal(v)) => assert_eq!(u, v),
                (
                    Primitive::Inversion { center: c1, radius: r1 },
                    Primitive::Inversion { center: c2, radius: r2 },
                ) => {
                    assert_eq!(c1, c2);
                    assert_eq!(r1, r2);
                    assert!(c1.norm() <= 5.0 && *r1 <= 5.0);
                }
                _ => panic!("chains differ"),
            }
        }
    }

    #[test]
    fn avoidance_set_keeps_poles_clear() {
        let avoid: Vec<Vec3> = (0..32)
            .map(|j| {
                let a = std::f64::consts::TAU * j as f64 / 32.0;
                Vec3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        for seed in 0..100 {
            let t = random_moebius(seed, 3.0, &avoid);
            for p in &avoid {
                t.apply(*p).expect("avoided point must not hit a pole");
            }
            assert!(t.pole_clearance(&avoid) >= 0.1 - 1e-12);
        }
    }

    #[test]
    fn load_moebius_documents() {
        let t = load_moebius(
            r#"[{"type":"inversion","center":[0,0,0],"radius":1},
                {"type":"translate","b":[1,0,0]},
                {"type":"scale","l":2.0}]"#,
        )
        .unwrap();
        assert_eq!(t.chain().len(), 3);
        let y = t.apply(Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((y - Vec3::new(3.0, 0.0, 0.0)).norm() < 1e-14);
        assert!(load_moebius(r#"[{"type":"scale","l":-1}]"#).is_err());
        assert!(load_moebius(
            r#"[{"type":"orthogonal","matrix":[[1,0,0],[0,1,0],[0,1,1]]}]"#
        )
        .is_err());
    }
}
