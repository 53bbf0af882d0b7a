//! Periodic trapezoidal quadrature with node doubling.
//!
//! All S¹ integrals in this crate are integrals of smooth 1-periodic
//! functions, for which the equal-weight trapezoidal rule converges
//! spectrally. Node counts are doubled (reusing previous evaluations)
//! until two successive estimates agree to the requested tolerance,
//! capped at [`MAX_NODES`].

/// Hard cap on nodes per S¹ axis.
pub const MAX_NODES: u32 = 1 << 14;

/// Default convergence tolerance for the deterministic quadratures.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Result of an adaptive periodic quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    /// Converged estimate.
    pub value: T,
    /// Gap between the last two doublings; a conservative error proxy.
    pub error: f64,
    /// Function evaluations used.
    pub evals: u64,
}

/// ∫₀¹ f(s) ds for smooth 1-periodic scalar f.
pub fn periodic_trapezoid<F: FnMut(f64) -> f64>(
    mut f: F,
    tol: f64,
    max_nodes: u32,
) -> QuadResult<f64> {
    let max_nodes = max_nodes.clamp(16, MAX_NODES);
    let mut n: u32 = 16;
    let mut sum = 0.0;
    for j in 0..n {
        sum += f(j as f64 / n as f64);
    }
    let mut evals = n as u64;
    let mut value = sum / n as f64;
    let mut gap = f64::INFINITY;
    while n < max_nodes {
        // New nodes are the midpoints of the current grid.
        let mut odd = 0.0;
        for j in 0..n {
            odd += f((2 * j + 1) as f64 / (2 * n) as f64);
        }
        evals += n as u64;
        n *= 2;
        let next = 0.5 * value + odd / n as f64;
        gap = (next - value).abs();
        value = next;
        if gap <= tol * value.abs().max(1.0) {
            break;
        }
    }
    QuadResult { value, error: gap, evals }
}

/// Vector-valued variant of [`periodic_trapezoid`].
pub fn periodic_trapezoid_vec3<F: FnMut(f64) -> crate::Vec3>(
    mut f: F,
    tol: f64,
    max_nodes: u32,
) -> QuadResult<crate::Vec3> {
    let max_nodes = max_nodes.clamp(16, MAX_NODES);
    let mut n: u32 = 16;
    let mut sum = crate::Vec3::zeros();
    for j in 0..n {
        sum += f(j as f64 / n as f64);
    }
    let mut evals = n as u64;
    let mut value = sum / n as f64;
    let mut gap = f64::INFINITY;
    while n < max_nodes {
        let mut odd = crate::Vec3::zeros();
        for j in 0..n {
            odd += f((2 * j + 1) as f64 / (2 * n) as f64);
        }
        evals += n as u64;
        n *= 2;
        let next = 0.5 * value + odd / n as f64;
        gap = (next - value).norm();
        value = next;
        if gap <= tol * value.norm().max(1.0) {
            break;
        }
    }
    QuadResult { value, error: gap, evals }
}

/// ∫₀¹∫₀¹ f(s, t) ds dt for f smooth and 1-periodic in both arguments.
///
/// Both axes are doubled together; the full grid is re-evaluated per level,
/// which keeps the code simple and is dominated by the final level anyway.
pub fn periodic_trapezoid_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    tol: f64,
    max_nodes_per_axis: u32,
) -> QuadResult<f64> {
    let cap = max_nodes_per_axis.clamp(16, MAX_NODES);
    let mut n: u32 = 16;
    let mut value = f64::NAN;
    let mut gap = f64::INFINITY;
    let mut evals = 0u64;
    loop {
        let mut sum = 0.0;
        for i in 0..n {
            let s = i as f64 / n as f64;
            for j in 0..n {
                sum += f(s, j as f64 / n as f64);
            }
        }
        evals += (n as u64) * (n as u64);
        let next = sum / (n as f64 * n as f64);
        gap = (next - value).abs();
        value = next;
        if gap <= tol * value.abs().max(1.0) || n >= cap {
            break;
        }
        n *= 2;
    }
    QuadResult { value, error: gap, evals }
}
