//! O(delta) and O(delta^2) profile correctors of the selected wave and the
//! kernel functions of the linearized KdV operator at Bloch parameter zero.
//!
//! Everything lives in the physical variable x on [0, X). The profile
//! operator
//!
//!   L0 w = w''' + ((U0 - c0) w)'
//!
//! is discretized as a Fourier-Galerkin matrix on the trigonometric basis
//! {1, cos(2 pi m x/X), sin(2 pi m x/X) : m = 1..n/2-1} (the Nyquist mode is
//! excluded, which leaves the discrete operator with exactly the
//! two-dimensional kernel of the continuum operator: v1 = U0' and the even
//! function v2). All linear solves are min-norm least squares through a
//! Jacobi SVD, so solutions carry no kernel component and inherit the
//! correct parity automatically: U1 is odd, U2 is even.
//!
//! The corrector equations, obtained by expanding the travelling-wave
//! equation (U-c)U' + U''' + delta (U'' + U'''') = 0 in delta with
//! c = c0 + delta^2 c2:
//!
//!   L0 U1 = -(U0'' + U0'''')            (solvable iff the wave is selected)
//!   L0 U2 = -((U1^2/2)' + U1'' + U1'''') + c2 U0'
//!
//! c2 is fixed by the solvability of the O(delta^3) equation against U0;
//! the corresponding conditions on the U2 equation itself are satisfied
//! identically by parity and cannot determine c2.

use crate::cnoidal::{profile, ProfileGrids, WaveParams};
use crate::elliptic::{complete_elliptic, EllipticModulus};
use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, spectral_derivative_complex, PeriodicGrid};
use crate::linalg::{svd_jacobi, RealMatrix, Svd};
use crate::selection::selection_kappa;
use num_complex::Complex64;

/// Relative singular-value cutoff separating the kernel of L0.
const KERNEL_TOL: f64 = 1e-8;

/// Which variables are frozen in the parameter derivative that builds the
/// kernel function v2 = 1 - dU0/dk / dc0/dk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum V2Convention {
    /// d/dk at fixed period X and offset u0 (kappa = 2K(k)/X varies with k).
    /// The derivative stays X-periodic; this is the convention that passes
    /// the kernel-residual test.
    FixedPeriod,
    /// d/dk at fixed kappa and u0. The differentiated family changes its
    /// period, so the fixed-argument derivative picks up a secular part and
    /// fails the kernel test; kept selectable as the documented alternative.
    FixedKappa,
}

/// Fourier-Galerkin representation of L0 on the Nyquist-free trig basis.
pub struct Collocation {
    pub n: usize,
    svd: Svd,
    sigma_max: f64,
}

fn grid_to_coeffs(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut hat: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut hat);
    let mut c = Vec::with_capacity(n - 1);
    c.push(hat[0].re / n as f64);
    for m in 1..n / 2 {
        c.push(2.0 * hat[m].re / n as f64);
        c.push(-2.0 * hat[m].im / n as f64);
    }
    c
}

fn coeffs_to_grid(coeffs: &[f64], n: usize) -> Vec<f64> {
    let mut hat = vec![Complex64::new(0.0, 0.0); n];
    hat[0] = Complex64::new(coeffs[0] * n as f64, 0.0);
    for m in 1..n / 2 {
        let a = coeffs[2 * m - 1];
        let b = coeffs[2 * m];
        let z = Complex64::new(0.5 * a * n as f64, -0.5 * b * n as f64);
        hat[m] = z;
        hat[n - m] = z.conj();
    }
    fft_inverse(&mut hat);
    hat.into_iter().map(|z| z.re).collect()
}

/// Apply L0 w = w''' + ((U0-c0) w)' on grid values by FFT.
fn apply_l0(w: &[f64], u0_minus_c0: &[f64], period: f64) -> Vec<f64> {
    let n = w.len();
    let wc: Vec<Complex64> = w.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let d3 = spectral_derivative_complex(&wc, period, 3);
    let prod: Vec<Complex64> = w
        .iter()
        .zip(u0_minus_c0)
        .map(|(&a, &b)| Complex64::new(a * b, 0.0))
        .collect();
    let d1 = spectral_derivative_complex(&prod, period, 1);
    (0..n).map(|j| d3[j].re + d1[j].re).collect()
}

impl Collocation {
    pub fn build(grids: &ProfileGrids, c0: f64) -> Self {
        let n = grids.u0.len();
        let period = grids.u0.period();
        let f: Vec<f64> = grids.u0.values().iter().map(|&u| u - c0).collect();
        let dim = n - 1;
        let mut a = RealMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut e = vec![0.0; dim];
            e[col] = 1.0;
            let g = coeffs_to_grid(&e, n);
            let lg = apply_l0(&g, &f, period);
            let cc = grid_to_coeffs(&lg);
            a.column_mut(col).copy_from_slice(&cc);
        }
        let svd = svd_jacobi(&a);
        let sigma_max = svd.sigma[0];
        Collocation { n, svd, sigma_max }
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.svd.sigma
    }

    /// Number of singular values below KERNEL_TOL * sigma_max.
    pub fn kernel_dimension(&self) -> usize {
        self.svd
            .sigma
            .iter()
            .filter(|&&s| s <= KERNEL_TOL * self.sigma_max)
            .count()
    }

    /// Min-norm solve of L0 u = b (grid values in, grid values out).
    pub fn solve_min_norm(&self, b: &[f64]) -> Vec<f64> {
        let bc = grid_to_coeffs(b);
        let xc = self.svd.solve_min_norm(&bc, KERNEL_TOL);
        coeffs_to_grid(&xc, self.n)
    }

    /// Project grid values onto the kernel of L0.
    pub fn project_onto_kernel(&self, v: &[f64]) -> Vec<f64> {
        let vc = grid_to_coeffs(v);
        let basis = self.svd.null_space(KERNEL_TOL);
        let mut out = vec![0.0; vc.len()];
        for nb in &basis {
            // trig-coefficient inner product with the parseval weights
            let dot = weighted_dot(&vc, nb);
            let nn = weighted_dot(nb, nb);
            for (o, &b) in out.iter_mut().zip(nb) {
                *o += dot / nn * b;
            }
        }
        coeffs_to_grid(&out, self.n)
    }
}

/// L2(0,X) inner product expressed through trig coefficients:
/// <f, g> = X (c0 d0 + 1/2 sum (a_m b_m + ...)); the constant factor is
/// irrelevant for projections so the plain weighted sum is used.
fn weighted_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = a[0] * b[0];
    for j in 1..a.len() {
        s += 0.5 * a[j] * b[j];
    }
    s
}

/// Profile correctors and kernel functions for the selected wave at
/// modulus k (in the u0 = 0 Galilean gauge).
pub struct Correctors {
    pub params: WaveParams,
    pub grids: ProfileGrids,
    pub u1: PeriodicGrid,
    pub u2: PeriodicGrid,
    pub c2: f64,
    /// v1 = U0', the translation kernel direction.
    pub v1: PeriodicGrid,
    /// Even kernel function, normalized to match 1 - dU0/dk / dc0/dk.
    pub v2: PeriodicGrid,
    /// Relative residual of L0 U1 = -(U0''+U0'''').
    pub u1_residual: f64,
    /// Relative solvability defect of the forcing against {1, U0}.
    pub solvability_defect: f64,
    /// ||L0 v2|| / ||v2||.
    pub v2_residual: f64,
    /// Distance of v2 from the finite-difference parameter derivative.
    pub v2_fd_distance: f64,
    pub kernel_dimension: usize,
}

/// Build the correctors at collocation size n (power of two, >= 64).
pub fn correctors(modulus: EllipticModulus, n: usize) -> Result<Correctors> {
    correctors_with(modulus, n, V2Convention::FixedPeriod)
}

pub fn correctors_with(
    modulus: EllipticModulus,
    n: usize,
    convention: V2Convention,
) -> Result<Correctors> {
    let kappa = selection_kappa(modulus)?;
    let params = WaveParams::new(modulus, kappa, 0.0)?;
    let grids = profile(&params, n)?;
    let c0 = params.speed();
    let coll = Collocation::build(&grids, c0);
    let period = grids.u0.period();

    let kernel_dimension = coll.kernel_dimension();
    if kernel_dimension != 2 {
        return Err(Error::numerical(
            "correctors",
            format!("kernel dimension {kernel_dimension}, expected 2 (increase n?)"),
        ));
    }

    // v2: parameter-derivative candidate projected onto the exact kernel.
    let v2_fd = v2_candidate(&params, n, convention)?;
    let v2_vals = coll.project_onto_kernel(&v2_fd);
    let v2_dist = norm(&sub(&v2_vals, &v2_fd)) / norm(&v2_fd);
    let f: Vec<f64> = grids.u0.values().iter().map(|&u| u - c0).collect();
    let v2_res = norm(&apply_l0(&v2_vals, &f, period)) / norm(&v2_vals);

    // U1
    let b1: Vec<f64> = grids
        .d2
        .values()
        .iter()
        .zip(grids.d4.values())
        .map(|(&a, &b)| -(a + b))
        .collect();
    // solvability: b1 orthogonal to {1, U0}
    let mean_b = b1.iter().sum::<f64>() / n as f64;
    let dot_u0 = b1
        .iter()
        .zip(grids.u0.values())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / n as f64;
    let scale_b = norm(&b1) * grids.u0.norm_l2() / period;
    let solvability_defect = (mean_b.abs() + dot_u0.abs()) / scale_b.max(1e-300);
    if solvability_defect > 1e-8 {
        return Err(Error::numerical(
            "correctors",
            format!("selection not satisfied: solvability defect {solvability_defect:.3e}"),
        ));
    }
    let u1_vals = coll.solve_min_norm(&b1);
    let u1_res = norm(&sub(&apply_l0(&u1_vals, &f, period), &b1)) / norm(&b1);

    // U2 = U2_0 + c2 W, c2 from the O(delta^3) compatibility against U0.
    let u1g = PeriodicGrid::from_values(period, u1_vals.clone())?;
    let u1d2 = u1g.derivative(2);
    let u1d4 = u1g.derivative(4);
    let half_sq = u1g.mul(&u1g).map(|v| 0.5 * v);
    let half_sq_d1 = half_sq.derivative(1);
    let b20: Vec<f64> = (0..n)
        .map(|j| -(half_sq_d1.values()[j] + u1d2.values()[j] + u1d4.values()[j]))
        .collect();
    let u20 = coll.solve_min_norm(&b20);
    let w = coll.solve_min_norm(grids.d1.values());

    let mean = |a: &[f64], b: &[f64], c: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(c)
            .map(|((x, y), z)| x * y * z)
            .sum::<f64>()
            / n as f64
    };
    let mean2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n as f64
    };
    let forcing: Vec<f64> = grids
        .d2
        .values()
        .iter()
        .zip(grids.d4.values())
        .map(|(&a, &b)| a + b)
        .collect();
    let i_u1_u0p = mean2(&u1_vals, grids.d1.values());
    let t1 = mean(&u1_vals, &u20, grids.d1.values()) - mean2(&u20, &forcing);
    let t2 = mean(&u1_vals, &w, grids.d1.values()) - mean2(&w, &forcing);
    let denom = i_u1_u0p - t2;
    if denom.abs() < 1e-12 * (i_u1_u0p.abs() + t2.abs()).max(1e-12) {
        return Err(Error::numerical("correctors", "c2 compatibility degenerate"));
    }
    let c2 = t1 / denom;
    let u2_vals: Vec<f64> = u20.iter().zip(&w).map(|(a, b)| a + c2 * b).collect();

    Ok(Correctors {
        params,
        v1: grids.d1.clone(),
        grids,
        u1: PeriodicGrid::from_values(period, u1_vals)?,
        u2: PeriodicGrid::from_values(period, u2_vals)?,
        c2,
        v2: PeriodicGrid::from_values(period, v2_vals)?,
        u1_residual: u1_res,
        solvability_defect,
        v2_residual: v2_res,
        v2_fd_distance: v2_dist,
        kernel_dimension,
    })
}

/// Finite-difference candidate for v2 = 1 - (d_k U0)/(d_k c0).
fn v2_candidate(params: &WaveParams, n: usize, convention: V2Convention) -> Result<Vec<f64>> {
    let k = params.modulus.k();
    let x = params.period();
    let h = (1e-5f64).min(0.25 * (EllipticModulus::ADMISSIBLE.1 - k)).max(1e-9);
    let family = |kk: f64| -> Result<(Vec<f64>, f64)> {
        let m = EllipticModulus::new(kk)?;
        let kap = match convention {
            V2Convention::FixedPeriod => 2.0 * complete_elliptic(m).big_k / x,
            V2Convention::FixedKappa => params.kappa,
        };
        let w = WaveParams::new(m, kap, params.u0)?;
        let vals: Vec<f64> = (0..n).map(|j| w.eval(j as f64 * x / n as f64)).collect();
        Ok((vals, w.speed()))
    };
    let (up, cp) = family(k + h)?;
    let (um, cm) = family(k - h)?;
    let dc = cp - cm;
    if dc.abs() < 1e-300 {
        return Err(Error::numerical("v2_candidate", "dc0/dk vanished"));
    }
    Ok(up
        .iter()
        .zip(&um)
        .map(|(a, b)| 1.0 - (a - b) / dc)
        .collect())
}

/// The linearized KdV evolution operator at Bloch parameter zero,
/// L0_ev w = -(w''' + ((U0-c0) w)'), applied on grid values.
pub fn l0_evolution(correctors: &Correctors, w: &[f64]) -> Vec<f64> {
    let c0 = correctors.params.speed();
    let f: Vec<f64> = correctors
        .grids
        .u0
        .values()
        .iter()
        .map(|&u| u - c0)
        .collect();
    apply_l0(w, &f, correctors.grids.u0.period())
        .into_iter()
        .map(|v| -v)
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(k: f64, n: usize) -> Correctors {
        correctors(EllipticModulus::new(k).unwrap(), n).unwrap()
    }

    #[test]
    fn u1_residual_and_normalization() {
        let c = build(0.8, 512);
        assert!(c.u1_residual <= 1e-8, "U1 residual {}", c.u1_residual);
        assert!(c.solvability_defect <= 1e-8);
        // imposed normalization: U1 orthogonal to 1 and U0
        assert!(c.u1.mean().abs() <= 1e-9 * c.u1.norm_l2());
        // odd parity
        let (even, _) = c.u1.parity_parts();
        assert!(
            even.norm_l2() <= 1e-8 * c.u1.norm_l2(),
            "even fraction {}",
            even.norm_l2() / c.u1.norm_l2()
        );
    }

    #[test]
    fn kernel_structure() {
        let c = build(0.8, 256);
        assert_eq!(c.kernel_dimension, 2);
        assert!(c.v2_residual <= 1e-8, "v2 residual {}", c.v2_residual);
        assert!(c.v2_fd_distance <= 1e-4, "v2 fd distance {}", c.v2_fd_distance);
        // L0_ev(1) = -v1
        let ones = vec![1.0; 256];
        let l1 = l0_evolution(&c, &ones);
        let defect: f64 = l1
            .iter()
            .zip(c.v1.values())
            .map(|(a, b)| (a + b) * (a + b))
            .sum::<f64>()
            .sqrt();
        assert!(defect <= 1e-9 * c.v1.norm_l2().max(1.0), "L0(1)+v1 = {defect}");
        // v1 in the kernel
        let lv1 = l0_evolution(&c, c.v1.values());
        assert!(norm(&lv1) <= 1e-7 * norm(c.v1.values()));
    }

    #[test]
    fn fixed_kappa_convention_fails_kernel_test() {
        // The alternative parameter-freezing convention produces a secular
        // (non-periodic) derivative; its kernel projection loses most of the
        // candidate, which is how the implementation rejects it.
        let m = EllipticModulus::new(0.8).unwrap();
        let good = correctors_with(m, 256, V2Convention::FixedPeriod).unwrap();
        let bad = correctors_with(m, 256, V2Convention::FixedKappa).unwrap();
        assert!(good.v2_fd_distance < 1e-4);
        assert!(bad.v2_fd_distance > 1e-2);
    }

    #[test]
    fn u2_parity_and_scaling() {
        let c = build(0.8, 512);
        let (_, odd) = c.u2.parity_parts();
        assert!(odd.norm_l2() <= 1e-8 * c.u2.norm_l2());
        assert!(c.c2.is_finite());
    }

    #[test]
    fn composite_profile_residual_scales() {
        // residual(delta)/delta^2 bounded with U1 only; /delta^3 with U1+U2.
        let c = build(0.85, 512);
        let x = c.grids.u0.period();
        let n = c.grids.u0.len();
        let resid = |delta: f64, with_u2: bool| -> f64 {
            let mut u: Vec<f64> = (0..n)
                .map(|j| {
                    c.grids.u0.values()[j]
                        + delta * c.u1.values()[j]
                        + if with_u2 { delta * delta * c.u2.values()[j] } else { 0.0 }
                })
                .collect();
            let cc = c.params.speed() + if with_u2 { delta * delta * c.c2 } else { 0.0 };
            let ug = PeriodicGrid::from_values(x, u.clone()).unwrap();
            let d1 = ug.derivative(1);
            let d2 = ug.derivative(2);
            let d3 = ug.derivative(3);
            let d4 = ug.derivative(4);
            for j in 0..n {
                u[j] = (u[j] - cc) * d1.values()[j]
                    + d3.values()[j]
                    + delta * (d2.values()[j] + d4.values()[j]);
            }
            norm(&u) / (n as f64).sqrt()
        };
        let r1: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&d| resid(d, false) / (d * d)).collect();
        let r2: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&d| resid(d, true) / (d * d * d))
            .collect();
        for w in [&r1, &r2] {
            let max = w.iter().cloned().fold(f64::MIN, f64::max);
            let min = w.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max / min - 1.0 <= 0.2, "ratio drift {:?}", w);
        }
    }

    #[test]
    fn refinement_changes_u1_little() {
        let c256 = build(0.8, 256);
        let c512 = build(0.8, 512);
        let fine = c512.u1.values();
        let coarse = c256.u1.resample(512).unwrap();
        let diff: f64 = fine
            .iter()
            .zip(coarse.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-9 * norm(fine).max(1.0), "U1 refinement drift {diff}");
    }
}
