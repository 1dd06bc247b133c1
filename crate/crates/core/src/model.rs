//! The steady equations in normalized form (`T = J = 1`):
//!
//! ```text
//! (1 - 1/n^2) n_x = n E - alpha,     E_x = n - b,     n(0) = n(1) = 1
//! ```
//!
//! together with the `j`-regularized flux
//! `A(z, p) = (1/z - j^2/z^3) p + alpha j / z`, whose `j = 1` member is the
//! flux of the weak formulation, and the field reconstruction
//! `E(x) = alpha + int_0^x (n - b)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{centered_derivative, cumulative_trapezoid};
use crate::profiles::DopingProfile;

/// Coefficient `1/z - j^2/z^3` multiplying `p` in the regularized flux.
pub fn flux_coefficient(z: f64, j: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("flux coefficient needs z > 0, got {z}")));
    }
    Ok(coefficient(z, j))
}

#[inline]
fn coefficient(z: f64, j: f64) -> f64 {
    let z2 = z * z;
    (z2 - j * j) / (z2 * z)
}

/// Regularized flux `A(z, p)`.
pub fn regularized_flux(z: f64, p: f64, j: f64, alpha: f64) -> Result<f64> {
    Ok(flux_coefficient(z, j)? * p + alpha * j / z)
}

/// `(A, dA/dz, dA/dp)` with the density given through its deviation
/// `dev = z - 1` from the sonic value, which keeps the coefficient accurate
/// when `z` is close to `j`.
#[inline]
pub(crate) fn flux_with_partials_dev(dev: f64, p: f64, j: f64, alpha: f64) -> (f64, f64, f64) {
    let z = 1.0 + dev;
    let z2 = z * z;
    let z3 = z2 * z;
    let c = ((1.0 - j * j) + dev * (2.0 + dev)) / z3;
    let dc_dz = (3.0 * j * j - z2) / (z2 * z2);
    (c * p + alpha * j / z, dc_dz * p - alpha * j / z2, c)
}

/// Density, field and regularization level on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelState {
    pub n: Vec<f64>,
    #[serde(rename = "E")]
    pub e: Vec<f64>,
    pub j: f64,
}

impl ModelState {
    pub fn new(n: Vec<f64>, e: Vec<f64>, j: f64) -> Result<Self> {
        if n.len() != e.len() || n.len() < 3 {
            return Err(Error::Domain("n and E must share a grid with at least 3 nodes".into()));
        }
        if !(j > 0.0 && j <= 1.0) {
            return Err(Error::Domain(format!("j must lie in (0, 1], got {j}")));
        }
        Ok(Self { n, e, j })
    }

    /// Checks the sonic pinning `n = 1` at both ends and `n > j` inside.
    pub fn check_admissible(&self) -> Result<()> {
        let last = self.n.len() - 1;
        if self.n[0] != 1.0 || self.n[last] != 1.0 {
            return Err(Error::Domain("boundary densities must equal 1".into()));
        }
        match self.n[1..last].iter().position(|&v| !(v > self.j)) {
            Some(i) => Err(Error::FluxDegeneracy {
                node: i + 1,
                value: self.n[i + 1],
                j: self.j,
            }),
            None => Ok(()),
        }
    }
}

/// Residuals of the strong form at interior node `k`:
/// `r1 = (1 - 1/n^2) n_x - (n E - alpha)`, `r2 = E_x - (n - b)`.
pub fn strong_residual(
    x: &[f64],
    state: &ModelState,
    k: usize,
    b_val: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    if k == 0 || k + 1 >= x.len() {
        return Err(Error::Domain(format!("node {k} is not interior")));
    }
    let n = state.n[k];
    let e = state.e[k];
    let nx = centered_derivative(x, &state.n, k);
    let ex = centered_derivative(x, &state.e, k);
    let r1 = (1.0 - 1.0 / (n * n)) * nx - (n * e - alpha);
    let r2 = ex - (n - b_val);
    Ok((r1, r2))
}

/// `E(x) = alpha + int_0^x (n - b)` by cumulative trapezoid on the grid.
pub fn reconstruct_e(x: &[f64], n: &[f64], b: &DopingProfile, alpha: f64) -> Vec<f64> {
    reconstruct_e_from_values(x, n, &b.sample(x), alpha)
}

pub fn reconstruct_e_from_values(x: &[f64], n: &[f64], b: &[f64], alpha: f64) -> Vec<f64> {
    let integrand: Vec<f64> = n.iter().zip(b).map(|(n, b)| n - b).collect();
    cumulative_trapezoid(x, &integrand)
        .into_iter()
        .map(|v| alpha + v)
        .collect()
}

/// Upper end of the window on which `rho0` is reported.
pub const RHO0_WINDOW_END: f64 = 0.25;
/// Lower end of the window on which `rho1` is reported.
pub const RHO1_WINDOW_START: f64 = 0.75;

/// `(x, value)` samples of the two boundary ratio fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RatioFields {
    /// `(E - alpha/n) / (n - 1)` on `(0, 0.25]`.
    pub rho0: Vec<(f64, f64)>,
    /// `(n - 1) / (1 - x)^(1/2)` on `[0.75, 1)`.
    pub rho1: Vec<(f64, f64)>,
}

pub fn weighted_ratio_fields(x: &[f64], state: &ModelState, alpha: f64) -> Result<RatioFields> {
    let last = x.len() - 1;
    let mut out = RatioFields::default();
    for k in 1..last {
        let n = state.n[k];
        if n == 1.0 {
            return Err(Error::DegenerateState { node: k, value: n });
        }
        if x[k] <= RHO0_WINDOW_END {
            out.rho0.push((x[k], (state.e[k] - alpha / n) / (n - 1.0)));
        }
        if x[k] >= RHO1_WINDOW_START {
            out.rho1.push((x[k], (n - 1.0) / (1.0 - x[k]).sqrt()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coefficient_examples() {
        assert_eq!(flux_coefficient(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(flux_coefficient(2.0, 1.0).unwrap(), 0.375);
        for j in [0.1, 0.5, 0.999, 1.0] {
            assert!(flux_coefficient(j, j).unwrap().abs() < 1e-15);
            assert!(flux_coefficient(j * 1.01, j).unwrap() > 0.0);
            assert!(flux_coefficient(j * 0.99, j).unwrap() < 0.0);
        }
        assert!(matches!(flux_coefficient(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(flux_coefficient(-1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn flux_examples() {
        assert_eq!(regularized_flux(1.0, 0.0, 1.0, 5.0).unwrap(), 5.0);
        assert_eq!(regularized_flux(2.0, 8.0, 1.0, 0.0).unwrap(), 3.0);
        // (1 - 0.25) * 4 + 2 * 0.5
        assert_eq!(regularized_flux(1.0, 4.0, 0.5, 2.0).unwrap(), 4.0);
        assert!(regularized_flux(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn partials_match_finite_differences() {
        let (z, p, j, a) = (1.3, -0.7, 0.9, 4.0);
        let (f, fz, fp) = flux_with_partials_dev(z - 1.0, p, j, a);
        assert!((f - regularized_flux(z, p, j, a).unwrap()).abs() < 1e-14);
        let h = 1e-6;
        let fz_fd = (regularized_flux(z + h, p, j, a).unwrap() - regularized_flux(z - h, p, j, a).unwrap()) / (2.0 * h);
        let fp_fd = (regularized_flux(z, p + h, j, a).unwrap() - regularized_flux(z, p - h, j, a).unwrap()) / (2.0 * h);
        assert!((fz - fz_fd).abs() < 1e-8);
        assert!((fp - fp_fd).abs() < 1e-8);
    }

    fn uniform(n: usize) -> Vec<f64> {
        (0..=n).map(|k| k as f64 / n as f64).collect()
    }

    #[test]
    fn constant_states_solve_the_strong_form() {
        let x = uniform(10);
        let alpha = 5.0;
        let sonic = ModelState::new(vec![1.0; 11], vec![alpha; 11], 1.0).unwrap();
        let (r1, r2) = strong_residual(&x, &sonic, 4, 1.0, alpha).unwrap();
        assert!(r1.abs() < 1e-14 && r2.abs() < 1e-12);
        let dense = ModelState::new(vec![2.0; 11], vec![alpha / 2.0; 11], 1.0).unwrap();
        let (r1, r2) = strong_residual(&x, &dense, 7, 2.0, alpha).unwrap();
        assert!(r1.abs() < 1e-14 && r2.abs() < 1e-14);
        assert!(strong_residual(&x, &dense, 0, 2.0, alpha).is_err());
        assert!(strong_residual(&x, &dense, 10, 2.0, alpha).is_err());
    }

    #[test]
    fn reconstruction_examples() {
        let x = uniform(20);
        let two = DopingProfile::constant(2.0).unwrap();
        let e = reconstruct_e(&x, &[2.0; 21], &two, 1.5);
        assert!(e.iter().all(|&v| v == 1.5));
        let e = reconstruct_e(&x, &[1.0; 21], &two, 3.0);
        assert_eq!(e[0], 3.0);
        for (xi, ei) in x.iter().zip(&e) {
            assert!((ei - (3.0 - xi)).abs() < 1e-14);
        }
    }

    #[test]
    fn admissibility() {
        let ok = ModelState::new(vec![1.0, 1.5, 1.0], vec![0.0; 3], 1.0).unwrap();
        assert!(ok.check_admissible().is_ok());
        let bad = ModelState::new(vec![1.0, 0.9, 1.0], vec![0.0; 3], 0.95).unwrap();
        assert!(matches!(bad.check_admissible(), Err(Error::FluxDegeneracy { node: 1, .. })));
        assert!(ModelState::new(vec![1.0; 3], vec![0.0; 3], 0.0).is_err());
        assert!(ModelState::new(vec![1.0; 3], vec![0.0; 3], 1.1).is_err());
    }

    #[test]
    fn ratio_fields_on_synthetic_constant_state() {
        let x = uniform(8);
        let alpha = 3.0;
        let e: Vec<f64> = x.iter().map(|&t| 1.0 + t).collect();
        let state = ModelState::new(vec![2.0; 9], e.clone(), 1.0).unwrap();
        let f = weighted_ratio_fields(&x, &state, alpha).unwrap();
        assert_eq!(f.rho0.len(), 2);
        for &(xk, v) in &f.rho0 {
            assert!(xk > 0.0 && xk <= 0.25);
            assert!((v - (1.0 + xk - 1.5)).abs() < 1e-15);
        }
        assert_eq!(f.rho1.len(), 2);
        for &(xk, v) in &f.rho1 {
            assert!((v - 1.0 / (1.0 - xk).sqrt()).abs() < 1e-15);
        }
        let mut flat = state.clone();
        flat.n[3] = 1.0;
        assert!(matches!(weighted_ratio_fields(&x, &flat, alpha), Err(Error::DegenerateState { node: 3, .. })));
    }

    proptest! {
        #[test]
        fn flux_is_affine_in_p(z in 0.05f64..5.0, p in -50.0f64..50.0, j in 0.01f64..=1.0, a in 0.0f64..20.0) {
            let lhs = regularized_flux(z, p, j, a).unwrap() - regularized_flux(z, 0.0, j, a).unwrap();
            let rhs = flux_coefficient(z, j).unwrap() * p;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn reconstruction_is_linear_in_the_integrand(
            u in proptest::collection::vec(-2.0f64..2.0, 12),
            v in proptest::collection::vec(-2.0f64..2.0, 12),
            alpha in 0.0f64..10.0,
        ) {
            let x: Vec<f64> = (0..12).map(|k| (k as f64 / 11.0).powf(1.3)).collect();
            let zero = vec![0.0; 12];
            let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            let eu = reconstruct_e_from_values(&x, &u, &zero, alpha);
            let ev = reconstruct_e_from_values(&x, &v, &zero, alpha);
            let es = reconstruct_e_from_values(&x, &sum, &zero, alpha);
            for k in 0..12 {
                prop_assert!(((es[k] - alpha) - (eu[k] - alpha) - (ev[k] - alpha)).abs() < 1e-12);
            }
            prop_assert_eq!(es[0], alpha);
        }
    }
}
