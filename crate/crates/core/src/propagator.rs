//! Exact propagation `exp(-i G dt)` of the homogeneous three-state dynamics.
//!
//! This is the reference against which the fixed-step integrator is checked.
//! The generator is diagonalised directly; when its eigenvectors are badly
//! conditioned the exponential falls back to scaling and squaring of a
//! Taylor series.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::dynamics::CavityState;
use crate::error::{Error, Result};

/// Eigenvector condition number above which the decomposition is not trusted.
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMethod {
    Eigendecomposition,
    /// The generator was (numerically) defective or had a degenerate
    /// spectrum; the series fallback was used.
    SeriesFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagated {
    pub state: CavityState,
    pub method: PropagationMethod,
}

/// Eigenvalues of a 3x3 matrix as the roots of its characteristic
/// polynomial, found by simultaneous (Aberth) iteration and polished with
/// Newton steps.
pub fn eigenvalues3(m: &Matrix3<Complex64>) -> Vector3<Complex64> {
    // λ³ + c2 λ² + c1 λ + c0
    let tr = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    let (c2, c1, c0) = (-tr, minors, -m.determinant());
    let poly = |z: Complex64| ((z + c2) * z + c1) * z + c0;
    let dpoly = |z: Complex64| (Complex64::new(3.0, 0.0) * z + c2 * 2.0) * z + c1;

    let scale = 1.0 + c2.norm().max(c1.norm().sqrt()).max(c0.norm().cbrt());
    let mut z: [Complex64; 3] = std::array::from_fn(|k| {
        Complex64::from_polar(scale, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / 3.0)
    });
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..3 {
            let p = poly(z[k]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dpoly(z[k]);
            let repulsion: Complex64 = (0..3)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm());
            }
        }
        if moved <= 1e-16 * scale {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..2 {
            let d = dpoly(*zk);
            if d.norm() > 0.0 {
                let step = poly(*zk) / d;
                if step.is_finite() {
                    *zk -= step;
                }
            }
        }
    }
    Vector3::new(z[0], z[1], z[2])
}

fn null_vector(m: &Matrix3<Complex64>) -> Vector3<Complex64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("three singular values");
    v_t.row(idx).transpose().map(|z| z.conj())
}

fn spectral_norm(m: &Matrix3<Complex64>) -> f64 {
    m.singular_values().max()
}

/// `exp(-i G dt)` by eigendecomposition, or `None` when the eigenbasis is
/// ill-conditioned.
fn propagator_eigen(g: &Matrix3<Complex64>, dt: f64) -> Option<Matrix3<Complex64>> {
    let eigenvalues = eigenvalues3(g);
    let mut v = Matrix3::<Complex64>::zeros();
    for (k, lambda) in eigenvalues.iter().enumerate() {
        let shifted = g - Matrix3::from_diagonal_element(*lambda);
        let col = null_vector(&shifted);
        v.set_column(k, &col);
    }
    let v_inv = v.try_inverse()?;
    let cond = spectral_norm(&v) * spectral_norm(&v_inv);
    if !cond.is_finite() || cond > MAX_EIGENVECTOR_CONDITION {
        return None;
    }
    let minus_i_dt = Complex64::new(0.0, -dt);
    let phases = Matrix3::from_diagonal(&eigenvalues.map(|l| (minus_i_dt * l).exp()));
    Some(v * phases * v_inv)
}

/// `exp(A)` by scaling and squaring of a truncated Taylor series.
pub fn expm_series(a: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    let norm = a
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / Complex64::new(2f64.powi(squarings), 0.0);
    let mut result = Matrix3::<Complex64>::identity();
    let mut term = Matrix3::<Complex64>::identity();
    for k in 1..=24 {
        term = term * scaled / Complex64::new(k as f64, 0.0);
        result += term;
        if term.iter().all(|z| z.norm() < 1e-18) {
            break;
        }
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// Propagator matrix `exp(-i G dt)` and the method used to build it.
pub fn propagator(g: &Matrix3<Complex64>, dt: f64) -> (Matrix3<Complex64>, PropagationMethod) {
    match propagator_eigen(g, dt) {
        Some(u) => (u, PropagationMethod::Eigendecomposition),
        None => (
            expm_series(&(g * Complex64::new(0.0, -dt))),
            PropagationMethod::SeriesFallback,
        ),
    }
}

/// Applies `exp(-i G dt)` to `state`.
pub fn propagate_exact(g: &Matrix3<Complex64>, state: CavityState, dt: f64) -> Result<Propagated> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let (u, method) = propagator(g, dt);
    Ok(Propagated {
        state: CavityState::from(u * Vector3::from(state)),
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::generator_matrix;
    use crate::params::CavityParams;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_generator_is_identity() {
        let s = CavityState::new(c(0.3, 0.1), c(-0.2, 0.0), c(0.0, 0.7));
        let out = propagate_exact(&Matrix3::zeros(), s, 2.5).unwrap();
        assert_eq!(out.method, PropagationMethod::SeriesFallback);
        assert!((Vector3::from(out.state) - Vector3::from(s)).norm() < 1e-15);
    }

    #[test]
    fn scalar_decay() {
        let mut g = Matrix3::zeros();
        g[(0, 0)] = c(0.0, -1.0);
        let out = propagate_exact(
            &g,
            CavityState::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
            1.0,
        )
        .unwrap();
        assert!((out.state.psi_s - c((-1f64).exp(), 0.0)).norm() < 1e-14);
        assert!(out.state.psi_e.norm() < 1e-15 && out.state.psi_f.norm() < 1e-15);
    }

    #[test]
    fn eigen_route_matches_series() {
        let p = CavityParams {
            g_es: 1.0,
            g_ef: 0.8,
            kappa_es: 0.6,
            kappa_ef: 1.7,
            gamma_es: 0.1,
            gamma_ef: 0.05,
            gamma_eo: 0.02,
        };
        let g = generator_matrix(&p);
        let (u, method) = propagator(&g, 0.37);
        assert_eq!(method, PropagationMethod::Eigendecomposition);
        let series = expm_series(&(g * c(0.0, -0.37)));
        assert!((u - series).norm() < 1e-13);
    }

    #[test]
    fn eigenvalues_are_characteristic_roots() {
        let m = Matrix3::new(
            c(0.3, -1.0),
            c(2.0, 0.5),
            c(0.0, 0.1),
            c(-0.7, 0.0),
            c(1.1, 0.2),
            c(0.4, -0.4),
            c(0.25, 0.3),
            c(0.0, -2.0),
            c(-0.9, 0.6),
        );
        let eig = eigenvalues3(&m);
        for l in eig.iter() {
            let det = (m - Matrix3::from_diagonal_element(*l)).determinant();
            assert!(det.norm() < 1e-12, "det = {det}");
        }
        assert!((eig.sum() - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_dt() {
        let s = CavityState::default();
        assert!(propagate_exact(&Matrix3::zeros(), s, 0.0).is_err());
        assert!(propagate_exact(&Matrix3::zeros(), s, -1.0).is_err());
    }
}
