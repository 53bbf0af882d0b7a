//! Closed parametric curves as finite Fourier series.
//!
//! Storing a knot as a trigonometric polynomial per coordinate makes every
//! derivative exact, so curvature, torsion, and dκ/ds carry no
//! finite-difference noise. Polygonal representations are deliberately not
//! supported: the conformal-angle asymptotics and the transport kernels
//! need C² data.
//!
//! The parameter lives on [0, 1); evaluation accepts any real s and is
//! exactly 1-periodic. Orientation −1 traverses the same point set with
//! s ↦ −s.

use crate::error::Error;
use crate::quadrature;
use crate::{Result, Vec3};
use serde::Deserialize;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Regularity floor: |γ′(s)| below this is an error.
pub const MIN_SPEED: f64 = 1e-12;

/// A closed curve γ: S¹ → ℝ³ given by finite Fourier series per coordinate,
/// with an orientation sign.
///
/// Immutable after construction; evaluation is pure, so a knot can be
/// shared freely across worker threads.
#[derive(Debug, Clone)]
pub struct ParametricKnot {
    /// cos_amps[k] multiplies cos(2πks); index 0 is the constant term.
    cos_amps: Vec<Vec3>,
    /// sin_amps[k] multiplies sin(2πks); index 0 must vanish.
    sin_amps: Vec<Vec3>,
    orientation: f64,
    reference_v2: Option<f64>,
    name: Option<&'static str>,
}

/// Frenet data of a curve point: exact-derivative kinematics plus the
/// arc-length derivative of curvature.
#[derive(Debug, Clone, Copy)]
pub struct FrenetData {
    pub point: Vec3,
    /// γ′/|γ′|.
    pub unit_tangent: Vec3,
    /// |γ′(s)| with respect to the [0,1) parameter.
    pub speed: f64,
    /// κ ≥ 0.
    pub curvature: f64,
    /// τ; zero where the curve is locally planar or straight.
    pub torsion: f64,
    /// dκ/ds with s arc-length, computed analytically through the speed.
    pub curvature_deriv: f64,
}

impl ParametricKnot {
    /// Build and validate a knot from raw Fourier amplitudes.
    ///
    /// Validation checks regularity, seam closure of derivatives up to
    /// order 3, and embeddedness over a dense grid.
    pub fn from_series(
        cos_amps: Vec<Vec3>,
        sin_amps: Vec<Vec3>,
        orientation: i8,
    ) -> Result<Self> {
        let knot = Self::new_unchecked(cos_amps, sin_amps, orientation);
        knot.validate()?;
        Ok(knot)
    }

    /// Build without the embeddedness/regularity validation.
    ///
    /// Needed for deliberately immersed test curves (e.g. a planar
    /// lemniscate); everything that requires an embedded curve documents it.
    pub fn new_unchecked(mut cos_amps: Vec<Vec3>, mut sin_amps: Vec<Vec3>, orientation: i8) -> Self {
        let len = cos_amps.len().max(sin_amps.len()).max(1);
        cos_amps.resize(len, Vec3::zeros());
        sin_amps.resize(len, Vec3::zeros());
        sin_amps[0] = Vec3::zeros();
        ParametricKnot {
            cos_amps,
            sin_amps,
            orientation: if orientation < 0 { -1.0 } else { 1.0 },
            reference_v2: None,
            name: None,
        }
    }

    fn preset(
        name: &'static str,
        cos_amps: Vec<Vec3>,
        sin_amps: Vec<Vec3>,
        v2: Option<f64>,
    ) -> Self {
        let mut k = Self::new_unchecked(cos_amps, sin_amps, 1);
        k.reference_v2 = v2;
        k.name = Some(name);
        debug_assert!(k.validate().is_ok());
        k
    }

    /// Unit circle in the xy-plane.
    pub fn circle() -> Self {
        Self::preset(
            "circle",
            vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)],
            vec![Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0)],
            Some(0.0),
        )
    }

    /// Planar ellipse with semi-axes 2 and 1.
    pub fn ellipse() -> Self {
        Self::preset(
            "ellipse",
            vec![Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0)],
            vec![Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0)],
            Some(0.0),
        )
    }

    /// Trefoil as the (2,3) torus knot on the torus with radii 2 and 1:
    /// ((2 + cos 3u) cos 2u, (2 + cos 3u) sin 2u, sin 3u), u = 2πs,
    /// expanded into harmonics 1, 2, 3, 5.
    pub fn trefoil() -> Self {
        let z = Vec3::zeros();
        Self::preset(
            "trefoil",
            vec![
                z,
                Vec3::new(0.5, 0.0, 0.0),
                Vec3::new(2.0, 0.0, 0.0),
                z,
                z,
                Vec3::new(0.5, 0.0, 0.0),
            ],
            vec![
                z,
                Vec3::new(0.0, -0.5, 0.0),
                Vec3::new(0.0, 2.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
                z,
                Vec3::new(0.0, 0.5, 0.0),
            ],
            Some(1.0),
        )
    }

    /// Figure-eight knot via its standard trigonometric parametrization
    /// ((2 + cos 2u) cos 3u, (2 + cos 2u) sin 3u, sin 4u), u = 2πs.
    pub fn figure_eight() -> Self {
        let z = Vec3::zeros();
        Self::preset(
            "figure-eight",
            vec![
                z,
                Vec3::new(0.5, 0.0, 0.0),
                z,
                Vec3::new(2.0, 0.0, 0.0),
                z,
                Vec3::new(0.5, 0.0, 0.0),
            ],
            vec![
                z,
                Vec3::new(0.0, 0.5, 0.0),
                z,
                Vec3::new(0.0, 2.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
                z,
            ],
            Some(-1.0),
        )
    }

    /// Unknotted circle with a 5-fold helical perturbation; nonzero κ′ and
    /// τ, useful wherever the conformal-angle coefficient must not vanish.
    pub fn perturbed_circle() -> Self {
        let z = Vec3::zeros();
        Self::preset(
            "perturbed-circle",
            vec![
                z,
                Vec3::new(1.0, 0.0, 0.0),
                z,
                z,
                Vec3::new(0.125, 0.0, 0.0),
                z,
                Vec3::new(0.125, 0.0, 0.0),
            ],
            vec![
                z,
                Vec3::new(0.0, 1.0, 0.0),
                z,
                z,
                Vec3::new(0.0, -0.125, 0.0),
                Vec3::new(0.0, 0.0, 0.25),
                Vec3::new(0.0, 0.125, 0.0),
            ],
            Some(0.0),
        )
    }

    /// Unit circle in the xz-plane centered at (1,0,0); forms a Hopf link
    /// with [`ParametricKnot::circle`] with linking number +1.
    pub fn hopf_partner() -> Self {
        Self::preset(
            "hopf",
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)],
            vec![Vec3::zeros(), Vec3::new(0.0, 0.0, -1.0)],
            Some(0.0),
        )
    }

    /// Planar Gerono lemniscate (cos u, ½ sin 2u, 0): an immersed,
    /// self-intersecting test curve. Not a valid knot; built unchecked.
    pub fn lemniscate() -> Self {
        let z = Vec3::zeros();
        Self::new_unchecked(
            vec![z, Vec3::new(1.0, 0.0, 0.0)],
            vec![z, z, Vec3::new(0.0, 0.5, 0.0)],
            1,
        )
    }

    /// Preset lookup by document name.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "circle" => Some(Self::circle()),
            "ellipse" => Some(Self::ellipse()),
            "trefoil" => Some(Self::trefoil()),
            "figure-eight" | "fig8" => Some(Self::figure_eight()),
            "perturbed-circle" => Some(Self::perturbed_circle()),
            "hopf" => Some(Self::hopf_partner()),
            _ => None,
        }
    }

    /// Preset name, if this knot came from one.
    pub fn name(&self) -> Option<&'static str> {
        self.name
    }

    /// Reference value of the second Conway coefficient v₂ for the knot
    /// type, where configured.
    ///
    /// These are external constants from standard knot tables (v₂ is the
    /// Casson knot invariant: 0 for the unknot, 1 for the trefoil, −1 for
    /// the figure-eight); this crate does not compute Conway polynomials.
    pub fn reference_v2(&self) -> Option<f64> {
        self.reference_v2
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Highest harmonic index present.
    pub fn max_harmonic(&self) -> usize {
        self.cos_amps.len() - 1
    }

    /// Same point set, opposite traversal direction.
    pub fn reversed(&self) -> Self {
        let mut k = self.clone();
        k.orientation = -k.orientation;
        k
    }

    /// The reparametrized curve s ↦ γ(s + c).
    pub fn phase_shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for k in 1..self.cos_amps.len() {
            let (sn, cs) = (TWO_PI * k as f64 * c).sin_cos();
            out.cos_amps[k] = cs * self.cos_amps[k] + sn * self.sin_amps[k];
            out.sin_amps[k] = -sn * self.cos_amps[k] + cs * self.sin_amps[k];
        }
        out
    }

    /// γ(s).
    pub fn point(&self, s: f64) -> Vec3 {
        self.derivative(s, 0)
    }

    /// d^m γ / ds^m, exact for any order (m ≤ 4 used in practice).
    pub fn derivative(&self, s: f64, order: u32) -> Vec3 {
        let angle = TWO_PI * self.orientation * s;
        let (s1, c1) = angle.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0); // cos/sin of k*angle, k = 0
        let mut acc = if order == 0 { self.cos_amps[0] } else { Vec3::zeros() };
        for k in 1..self.cos_amps.len() {
            let (cn, sn) = (ck * c1 - sk * s1, sk * c1 + ck * s1);
            ck = cn;
            sk = sn;
            let w = TWO_PI * k as f64;
            // d^m cos(ws) = w^m cos(ws + mπ/2), same phase shift for sin.
            let (bc, bs) = match order % 4 {
                0 => (ck, sk),
                1 => (-sk, ck),
                2 => (-ck, -sk),
                _ => (sk, -ck),
            };
            let wm = w.powi(order as i32);
            acc += (wm * bc) * self.cos_amps[k] + (wm * bs) * self.sin_amps[k];
        }
        // Chain rule through s ↦ orientation·s.
        if order % 2 == 1 {
            acc *= self.orientation;
        }
        acc
    }

    /// (γ(s), γ′(s)) in one pass; the Monte-Carlo hot path.
    #[inline]
    pub fn point_and_velocity(&self, s: f64) -> (Vec3, Vec3) {
        let angle = TWO_PI * self.orientation * s;
        let (s1, c1) = angle.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0);
        let mut p = self.cos_amps[0];
        let mut v = Vec3::zeros();
        for k in 1..self.cos_amps.len() {
            let (cn, sn) = (ck * c1 - sk * s1, sk * c1 + ck * s1);
            ck = cn;
            sk = sn;
            let w = TWO_PI * k as f64;
            let ca = self.cos_amps[k];
            let sa = self.sin_amps[k];
            p += ck * ca + sk * sa;
            v += (w * -sk) * ca + (w * ck) * sa;
        }
        (p, v * self.orientation)
    }

    /// Frenet data at s.
    ///
    /// κ = |γ′ × γ″| / |γ′|³, τ = det(γ′, γ″, γ‴) / |γ′ × γ″|², and dκ/ds
    /// (arc-length) comes from differentiating κ analytically through the
    /// speed rather than differencing κ values.
    pub fn frenet(&self, s: f64) -> Result<FrenetData> {
        let point = self.point(s);
        let d1 = self.derivative(s, 1);
        let d2 = self.derivative(s, 2);
        let d3 = self.derivative(s, 3);
        let speed = d1.norm();
        if speed < MIN_SPEED {
            return Err(Error::DegenerateCurve { speed, s });
        }
        let c = d1.cross(&d2);
        let cn = c.norm();
        let curvature = cn / speed.powi(3);
        let (torsion, curvature_deriv) = if cn <= 1e-12 * speed * speed {
            // Locally straight: torsion and dκ/ds degenerate with κ = 0.
            (0.0, 0.0)
        } else {
            let torsion = c.dot(&d3) / (cn * cn);
            // dκ/dt with c′ = γ′ × γ‴ and v′ = (γ′·γ″)/v, then dκ/ds = (dκ/dt)/v.
            let cp = d1.cross(&d3);
            let vprime = d1.dot(&d2) / speed;
            let dkdt = c.dot(&cp) / (cn * speed.powi(3)) - 3.0 * cn * vprime / speed.powi(4);
            (torsion, dkdt / speed)
        };
        Ok(FrenetData {
            point,
            unit_tangent: d1 / speed,
            speed,
            curvature,
            torsion,
            curvature_deriv,
        })
    }

    /// Total arc length by adaptive quadrature of |γ′|.
    pub fn arc_length(&self) -> f64 {
        quadrature::periodic_trapezoid(|s| self.derivative(s, 1).norm(), 1e-13, 1 << 14).value
    }

    /// Distance from x to the curve and the parameter attaining it.
    ///
    /// Coarse grid scan refined by Newton on |γ(s) − x|²; accurate to
    /// machine precision for smooth curves, which the 1e-6 exclusion
    /// thresholds rely on.
    pub fn distance_to_point(&self, x: &Vec3) -> (f64, f64) {
        let n = 512;
        let mut best = (f64::INFINITY, 0.0);
        for j in 0..n {
            let s = j as f64 / n as f64;
            let d2 = (self.point(s) - x).norm_squared();
            if d2 < best.0 {
                best = (d2, s);
            }
        }
        let mut s = best.1;
        for _ in 0..8 {
            let p = self.point(s);
            let d1 = self.derivative(s, 1);
            let d2 = self.derivative(s, 2);
            let g = 2.0 * (p - x).dot(&d1);
            let h = 2.0 * (d1.dot(&d1) + (p - x).dot(&d2));
            if h.abs() < 1e-300 {
                break;
            }
            let step = (g / h).clamp(-0.5 / n as f64, 0.5 / n as f64);
            s -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let d = (self.point(s) - x).norm();
        // Newton may leave the basin on nasty geometry; never report worse
        // than the grid answer.
        if d * d <= best.0 {
            (d, s.rem_euclid(1.0))
        } else {
            (best.0.sqrt(), best.1)
        }
    }

    /// Minimum distance between two closed curves (grid + local descent).
    pub fn min_distance_between(a: &ParametricKnot, b: &ParametricKnot) -> f64 {
        let n = 256;
        let pa: Vec<Vec3> = (0..n).map(|j| a.point(j as f64 / n as f64)).collect();
        let mut best = f64::INFINITY;
        let mut best_t = 0.0;
        for j in 0..n {
            let t = j as f64 / n as f64;
            let q = b.point(t);
            for p in &pa {
                let d2 = (p - q).norm_squared();
                if d2 < best {
                    best = d2;
                    best_t = t;
                }
            }
        }
        // Refine: distance from the best b-point to curve a, then back.
        let (mut d, mut sa) = a.distance_to_point(&b.point(best_t));
        let mut t = best_t;
        for _ in 0..6 {
            let (dn, tn) = b.distance_to_point(&a.point(sa));
            let (da, sn) = a.distance_to_point(&b.point(tn));
            d = dn.min(da).min(d);
            sa = sn;
            t = tn;
        }
        let _ = t;
        d
    }

    /// Worst seam mismatch of derivative orders 0..=3, evaluating across
    /// the parameter seam without range reduction.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for order in 0..=3 {
            let a = self.derivative(1.0, order);
            let b = self.derivative(0.0, order);
            worst = worst.max((a - b).norm());
            let c = self.derivative(1.25, order);
            let d = self.derivative(0.25, order);
            worst = worst.max((c - d).norm());
        }
        worst
    }

    /// Regularity, closure, and embeddedness checks.
    pub fn validate(&self) -> Result<()> {
        if self.cos_amps.len() < 2
            || (1..self.cos_amps.len())
                .all(|k| self.cos_amps[k].norm() == 0.0 && self.sin_amps[k].norm() == 0.0)
        {
            return Err(Error::Validation("curve has no nonconstant harmonics".into()));
        }
        let n = 1024;
        let mut min_speed = f64::INFINITY;
        let mut min_speed_s = 0.0;
        for j in 0..n {
            let s = j as f64 / n as f64;
            let v = self.derivative(s, 1).norm();
            if v < min_speed {
                min_speed = v;
                min_speed_s = s;
            }
        }
        if min_speed < MIN_SPEED {
            return Err(Error::DegenerateCurve { speed: min_speed, s: min_speed_s });
        }
        if self.closure_residual() > 1e-9 {
            return Err(Error::Validation("curve is not closed across the seam".into()));
        }
        // Embeddedness: chord length over circular parameter distance must
        // stay bounded below; self-intersections drive this ratio to 0.
        let m = 512;
        let pts: Vec<Vec3> = (0..m).map(|j| self.point(j as f64 / m as f64)).collect();
        let mut min_ratio = f64::INFINITY;
        for i in 0..m {
            for j in (i + 1)..m {
                let dp = (i as f64 - j as f64).abs() / m as f64;
                let dp = dp.min(1.0 - dp);
                let ratio = (pts[i] - pts[j]).norm() / dp;
                min_ratio = min_ratio.min(ratio);
            }
        }
        if min_ratio < 0.01 * min_speed {
            return Err(Error::Validation(format!(
                "curve self-intersects or nearly does (chord/parameter ratio {min_ratio:.3e})"
            )));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesDoc {
    #[serde(default)]
    cos: Vec<f64>,
    #[serde(default)]
    sin: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FourierDoc {
    x: SeriesDoc,
    y: SeriesDoc,
    z: SeriesDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KnotDoc {
    preset: Option<String>,
    fourier: Option<FourierDoc>,
    orientation: Option<i8>,
}

/// Parse and validate a knot document.
///
/// Accepted forms: `{"preset": "<name>"}` or
/// `{"fourier": {"x": {"cos": [...], "sin": [...]}, "y": ..., "z": ...},
///   "orientation": 1}`.
/// Coefficient index k multiplies cos/sin(2πks); index 0 of `cos` is the
/// constant offset, index 0 of `sin` must be absent or zero.
pub fn load_knot(text: &str) -> Result<ParametricKnot> {
    let doc: KnotDoc = serde_json::from_str(text)?;
    let orientation = doc.orientation.unwrap_or(1);
    if !(orientation == 1 || orientation == -1) {
        return Err(Error::Validation("orientation must be 1 or -1".into()));
    }
    match (doc.preset, doc.fourier) {
        (Some(name), None) => {
            let k = ParametricKnot::by_name(&name)
                .ok_or_else(|| Error::Validation(format!("unknown preset '{name}'")))?;
            Ok(if orientation < 0 { k.reversed() } else { k })
        }
        (None, Some(f)) => {
            for (axis, series) in [("x", &f.x), ("y", &f.y), ("z", &f.z)] {
                if series.sin.first().map_or(false, |v| *v != 0.0) {
                    return Err(Error::Validation(format!(
                        "{axis}: sin[0] multiplies sin(0) and must be 0"
                    )));
                }
            }
            let len = [&f.x, &f.y, &f.z]
                .iter()
                .map(|s| s.cos.len().max(s.sin.len()))
                .max()
                .unwrap_or(0)
                .max(1);
            let fetch = |v: &Vec<f64>, k: usize| v.get(k).copied().unwrap_or(0.0);
            let cos_amps = (0..len)
                .map(|k| Vec3::new(fetch(&f.x.cos, k), fetch(&f.y.cos, k), fetch(&f.z.cos, k)))
                .collect();
            let sin_amps = (0..len)
                .map(|k| Vec3::new(fetch(&f.x.sin, k), fetch(&f.y.sin, k), fetch(&f.z.sin, k)))
                .collect();
            ParametricKnot::from_series(cos_amps, sin_amps, orientation)
        }
        (Some(_), Some(_)) => Err(Error::Validation(
            "document must give either a preset or fourier coefficients, not both".into(),
        )),
        (None, None) => Err(Error::Validation(
            "document must give a preset or fourier coefficients".into(),
        )),
    }
}
