//! Independent spectral oracles.
//!
//! At delta = 0 the periodic Evans function E(lambda, xi) =
//! det(R(X, lambda) - e^{i xi X} I) is evaluated through the monodromy R of
//! the 3x3 linearized-KdV first-order system, integrated with classical RK4
//! under step-halving Richardson control. Its zeros in lambda are the Bloch
//! eigenvalues, which makes it the arbiter for the band parameterization.
//!
//! At delta > 0 the fourth-order operator has a fast mode with multiplier
//! ~ e^{X/delta}, which overflows naive monodromy determinants, so the
//! delta > 0 oracle is Hill's method instead: the Fourier-Galerkin
//! truncation of the Bloch operator
//!
//!   L_xi w = -delta((D+i xi)^4 + (D+i xi)^2) w - (D+i xi)^3 w
//!            - (D+i xi)((Ubar - cbar) w),
//!
//! whose dense complex eigenproblem is solved by the Hessenberg + shifted-QR
//! kernel in `linalg`.

use crate::cnoidal::WaveParams;
use crate::elliptic::{jacobi_sn_cn_dn, EllipticModulus};
use crate::error::{Error, Result};
use crate::grid::fft_forward;
use crate::linalg::{complex_eigenvalues, ComplexMatrix};
use crate::perturbed::Correctors;
use crate::selection::selection_kappa;
use num_complex::Complex64;

type Mat3 = [[Complex64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (l, row) in b.iter().enumerate() {
                c[i][j] += a[i][l] * row[j];
            }
        }
    }
    c
}

fn det3(m: &Mat3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Monodromy of the linearized KdV system Y' = A0(lambda; x) Y over one
/// period from identity data.
///
/// The fundamental solution is integrated on segments chosen so each
/// segment matrix stays moderate in norm; the full-period matrix is their
/// product. The dichotomy of the system (trough modes grow like
/// e^{2 kappa X}) makes the composed matrix ill-conditioned for determinant
/// work at larger periods, so `det` is computed as the product of the
/// segment determinants (each one well-conditioned) and the Evans function
/// goes through the lifted block-cyclic form (see `evans_from_monodromy`)
/// rather than through the composed matrix.
#[derive(Clone, Debug)]
pub struct MonodromyResult {
    pub lambda: Complex64,
    /// Segment matrices: R = segments[S-1] * ... * segments[0].
    pub segments: Vec<Mat3>,
    /// Composed full-period matrix (diagnostic; accurate only when moderate).
    pub matrix: Mat3,
    /// det R as the product of segment determinants (Liouville: = 1).
    pub det: Complex64,
    /// Steps used by the final pass (all segments together).
    pub steps: usize,
    /// Richardson error estimate (max-entry norm, relative).
    pub error_estimate: f64,
}

/// Coefficient matrix of the first-order form of
/// u''' + ((U0 - c0) u)' + lambda u = 0.
fn a0(params: &WaveParams, lambda: Complex64, x: f64) -> Mat3 {
    let (s, c, d) = jacobi_sn_cn_dn(params.kappa * x, params.modulus);
    let amp = params.amplitude();
    let u0 = params.u0 + amp * c * c;
    let u0x = -2.0 * amp * params.kappa * s * c * d;
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    [
        [z, one, z],
        [z, z, one],
        [
            -(Complex64::new(u0x, 0.0) + lambda),
            Complex64::new(-(u0 - params.speed()), 0.0),
            z,
        ],
    ]
}

fn rk4_segment(
    params: &WaveParams,
    lambda: Complex64,
    x0: f64,
    x1: f64,
    steps: usize,
) -> Mat3 {
    let h = (x1 - x0) / steps as f64;
    let mut y: Mat3 = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in y.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    for step in 0..steps {
        let x = x0 + step as f64 * h;
        let k1 = mat_mul(&a0(params, lambda, x), &y);
        let y2 = add_scaled(&y, &k1, 0.5 * h);
        let k2 = mat_mul(&a0(params, lambda, x + 0.5 * h), &y2);
        let y3 = add_scaled(&y, &k2, 0.5 * h);
        let k3 = mat_mul(&a0(params, lambda, x + 0.5 * h), &y3);
        let y4 = add_scaled(&y, &k3, h);
        let k4 = mat_mul(&a0(params, lambda, x + h), &y4);
        for i in 0..3 {
            for j in 0..3 {
                y[i][j] += h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
    }
    y
}

fn rk4_segments(params: &WaveParams, lambda: Complex64, n_seg: usize, steps: usize) -> Vec<Mat3> {
    let x_per = params.period();
    let per_seg = (steps / n_seg).max(8);
    (0..n_seg)
        .map(|s| {
            let x0 = x_per * s as f64 / n_seg as f64;
            let x1 = x_per * (s + 1) as f64 / n_seg as f64;
            rk4_segment(params, lambda, x0, x1, per_seg)
        })
        .collect()
}

fn add_scaled(y: &Mat3, k: &Mat3, s: f64) -> Mat3 {
    let mut out = *y;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += s * k[i][j];
        }
    }
    out
}

fn max_entry(m: &Mat3) -> f64 {
    m.iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Segment count keeping each segment's norm at most ~ e^3.
fn segment_count(params: &WaveParams, lambda: Complex64) -> usize {
    let x_per = params.period();
    // trough growth rate ~ 2 kappa, oscillatory-mode rate ~ |lambda|^{1/3}
    let rate = (2.0 * params.kappa).max(lambda.norm().powf(1.0 / 3.0));
    ((rate * x_per / 2.5).ceil() as usize).clamp(4, 64)
}

/// Monodromy with step-halving Richardson control to local tolerance 1e-11,
/// starting from `n_steps` total (scaled up automatically for large |lambda|).
pub fn monodromy_kdv(
    params: &WaveParams,
    lambda: Complex64,
    n_steps: usize,
) -> Result<MonodromyResult> {
    let n_seg = segment_count(params, lambda);
    // resolve the oscillation scale |lambda|^{1/3} X
    let osc = lambda.norm().powf(1.0 / 3.0) * params.period();
    let mut n = n_steps
        .max(16 * n_seg)
        .max((8.0 * osc) as usize)
        .next_power_of_two();
    let mut coarse = rk4_segments(params, lambda, n_seg, n);
    for _ in 0..14 {
        let fine = rk4_segments(params, lambda, n_seg, 2 * n);
        let mut rel = 0.0f64;
        for s in 0..n_seg {
            let mut err = 0.0f64;
            for i in 0..3 {
                for j in 0..3 {
                    err = err.max((fine[s][i][j] - coarse[s][i][j]).norm());
                }
            }
            rel = rel.max(err / max_entry(&fine[s]).max(1.0));
        }
        if rel <= 1e-11 {
            // Richardson extrapolation of the 4th-order pairs, per segment
            let mut segments = fine.clone();
            for s in 0..n_seg {
                for i in 0..3 {
                    for j in 0..3 {
                        segments[s][i][j] = (16.0 * fine[s][i][j] - coarse[s][i][j]) / 15.0;
                    }
                }
            }
            let mut matrix: Mat3 = segments[0];
            let mut det = det3(&segments[0]);
            for s in segments.iter().skip(1) {
                matrix = mat_mul(s, &matrix);
                det *= det3(s);
            }
            return Ok(MonodromyResult {
                lambda,
                segments,
                matrix,
                det,
                steps: 2 * n,
                error_estimate: rel,
            });
        }
        coarse = fine;
        n *= 2;
        if n > 1 << 22 {
            break;
        }
    }
    Err(Error::numerical(
        "monodromy_kdv",
        format!("step control failed at lambda = {lambda}"),
    ))
}

/// The periodic Evans function at delta = 0:
/// E(lambda, xi) = det(R(X, lambda) - e^{i xi X} I).
#[derive(Clone, Copy, Debug)]
pub struct EvansValue {
    pub raw: Complex64,
    /// |E(lambda, xi)| normalized by the largest |E(lambda, xi')| over a few
    /// reference Bloch phases: measures how sharply E dips at the claimed
    /// zero, independent of the overall (dichotomy-dominated) scale.
    pub relative: f64,
}

pub fn evans_eval(params: &WaveParams, lambda: Complex64, xi: f64) -> Result<EvansValue> {
    let mono = monodromy_kdv(params, lambda, 256)?;
    Ok(evans_from_monodromy(&mono, xi, params.period()))
}

/// Evaluate det(prod R_s - e^{i xi X} I) through the lifted block-cyclic
/// matrix: det(B - w I) with w^S = e^{i xi X} and B the cyclic block-shift
/// built from the segment matrices. The lifted form has moderate entries,
/// so pivoted LU evaluates the determinant stably where the composed
/// product would lose everything to the exponential dichotomy.
pub fn evans_from_monodromy(mono: &MonodromyResult, xi: f64, x_period: f64) -> EvansValue {
    let raw = lifted_det(&mono.segments, xi * x_period);
    let mut reference = raw.norm();
    for frac in [0.21, 0.5, 0.79] {
        let shifted = xi * x_period + 2.0 * std::f64::consts::PI * frac;
        reference = reference.max(lifted_det(&mono.segments, shifted).norm());
    }
    EvansValue {
        raw,
        relative: raw.norm() / reference.max(1e-300),
    }
}

/// det(B - w I) with B the block-cyclic lift of the segment product and
/// w = e^{i theta / S}.
fn lifted_det(segments: &[Mat3], theta: f64) -> Complex64 {
    let s_count = segments.len();
    let dim = 3 * s_count;
    let w = Complex64::new(0.0, theta / s_count as f64).exp();
    let mut m = ComplexMatrix::zeros(dim);
    for (s, seg) in segments.iter().enumerate() {
        let row0 = 3 * s;
        // block row s: -w I at block (s, s), R_s at block (s, s-1 mod S)
        let col0 = 3 * ((s + s_count - 1) % s_count);
        for i in 0..3 {
            *m.at_mut(row0 + i, row0 + i) -= w;
            for j in 0..3 {
                *m.at_mut(row0 + i, col0 + j) += seg[i][j];
            }
        }
    }
    // det(B - wI) = +- det(prod R - w^S I); only |.| and zeros are used.
    complex_det(&mut m)
}

/// Determinant by Gaussian elimination with partial pivoting (in place).
fn complex_det(m: &mut ComplexMatrix) -> Complex64 {
    let n = m.n;
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut piv = col;
        let mut best = m.at(col, col).norm();
        for r in (col + 1)..n {
            let v = m.at(r, col).norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for c in 0..n {
                let a = m.at(col, c);
                let b = m.at(piv, c);
                *m.at_mut(col, c) = b;
                *m.at_mut(piv, c) = a;
            }
            det = -det;
        }
        let d = m.at(col, col);
        det *= d;
        for r in (col + 1)..n {
            let f = m.at(r, col) / d;
            if f.norm() == 0.0 {
                continue;
            }
            for c in col..n {
                let v = m.at(r, c) - f * m.at(col, c);
                *m.at_mut(r, c) = v;
            }
        }
    }
    det
}

/// A selected wave's parameters for the oracles (u0 = 0 gauge).
pub fn selected_params(modulus: EllipticModulus) -> Result<WaveParams> {
    WaveParams::new(modulus, selection_kappa(modulus)?, 0.0)
}

// ---------------------------------------------------------------------------
// Hill's method for the full operator at delta > 0
// ---------------------------------------------------------------------------

/// Bloch spectrum of the truncated fourth-order operator.
#[derive(Clone, Debug)]
pub struct HillSpectrum {
    pub delta: f64,
    pub xi: f64,
    pub truncation: usize,
    /// Eigenvalues sorted by descending real part.
    pub eigenvalues: Vec<Complex64>,
    /// Largest |c_j| of the profile's trailing Fourier coefficients relative
    /// to the leading one; > 1e-12 indicates under-resolution.
    pub profile_tail: f64,
}

/// Options for the delta > 0 profile.
#[derive(Clone, Copy, Debug)]
pub struct HillOptions {
    /// Include the O(delta^2) corrector U2 and speed correction c2.
    pub include_u2: bool,
}

impl Default for HillOptions {
    fn default() -> Self {
        HillOptions { include_u2: true }
    }
}

/// Assemble and solve the (2N+1)-mode Fourier-Galerkin truncation of the
/// Bloch operator about Ubar = U0 + delta U1 (+ delta^2 U2), at speed
/// cbar = c0 (+ delta^2 c2).
pub fn hill_spectrum(
    corr: &Correctors,
    delta: f64,
    xi: f64,
    n_modes: usize,
    options: HillOptions,
) -> Result<HillSpectrum> {
    if !(delta > 0.0 && delta <= 0.2) {
        return Err(Error::domain("delta", delta, "(0, 0.2]"));
    }
    let x_per = corr.grids.u0.period();
    let n_grid = corr.grids.u0.len();
    if 4 * n_modes + 2 > n_grid {
        return Err(Error::domain(
            "n_modes",
            n_modes as f64,
            "4N + 2 <= collocation grid size (raise the corrector resolution)",
        ));
    }
    let cbar = corr.params.speed() + if options.include_u2 { delta * delta * corr.c2 } else { 0.0 };
    let mut f: Vec<Complex64> = (0..n_grid)
        .map(|j| {
            let mut v = corr.grids.u0.values()[j] + delta * corr.u1.values()[j];
            if options.include_u2 {
                v += delta * delta * corr.u2.values()[j];
            }
            Complex64::new(v - cbar, 0.0)
        })
        .collect();
    fft_forward(&mut f);
    for c in f.iter_mut() {
        *c /= n_grid as f64;
    }
    let lead = f[0].norm().max(1e-300);
    let profile_tail = (f[2 * n_modes].norm().max(f[n_grid - 2 * n_modes].norm())) / lead;

    let dim = 2 * n_modes + 1;
    let mut a = ComplexMatrix::zeros(dim);
    let base = 2.0 * std::f64::consts::PI / x_per;
    for row in 0..dim {
        let jr = row as isize - n_modes as isize;
        let theta = base * jr as f64 + xi;
        let th2 = theta * theta;
        *a.at_mut(row, row) += Complex64::new(-delta * (th2 * th2 - th2), theta * th2);
        for col in 0..dim {
            let jc = col as isize - n_modes as isize;
            let idx = (jr - jc).rem_euclid(n_grid as isize) as usize;
            *a.at_mut(row, col) += Complex64::new(0.0, -theta) * f[idx];
        }
    }
    let mut eigenvalues = complex_eigenvalues(&a)?;
    eigenvalues.sort_by(|x, y| y.re.partial_cmp(&x.re).unwrap());
    Ok(HillSpectrum {
        delta,
        xi,
        truncation: n_modes,
        eigenvalues,
        profile_tail,
    })
}

/// Hill solve with the truncation doubled (from N = 64) until the
/// eigenvalue nearest `target` moves by no more than 1e-8.
pub fn hill_spectrum_converged(
    corr: &Correctors,
    delta: f64,
    xi: f64,
    target: Complex64,
    options: HillOptions,
) -> Result<(HillSpectrum, Complex64)> {
    let mut n_modes = 64;
    let mut spec = hill_spectrum(corr, delta, xi, n_modes, options)?;
    let (mut near, _) = nearest_eigenvalue(&spec, target);
    loop {
        n_modes *= 2;
        if 4 * n_modes + 2 > corr.grids.u0.len() {
            return Ok((spec, near));
        }
        let finer = hill_spectrum(corr, delta, xi, n_modes, options)?;
        let (near2, _) = nearest_eigenvalue(&finer, target);
        let moved = (near2 - near).norm();
        spec = finer;
        near = near2;
        if moved <= 1e-8 {
            return Ok((spec, near));
        }
    }
}

/// Nearest eigenvalue to a target, with the distance.
pub fn nearest_eigenvalue(spectrum: &HillSpectrum, target: Complex64) -> (Complex64, f64) {
    let mut best = (Complex64::new(f64::NAN, f64::NAN), f64::INFINITY);
    for &e in &spectrum.eigenvalues {
        let d = (e - target).norm();
        if d < best.1 {
            best = (e, d);
        }
    }
    best
}

/// Injectively match each target to a distinct eigenvalue (greedy by
/// distance); errors if two targets claim the same eigenvalue closer than
/// the alternative.
pub fn match_eigenvalues(
    spectrum: &HillSpectrum,
    targets: &[Complex64],
) -> Result<Vec<(Complex64, f64)>> {
    let mut used: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, &e) in spectrum.eigenvalues.iter().enumerate() {
            if used.contains(&i) {
                continue;
            }
            let d = (e - t).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        if best.0 == usize::MAX {
            return Err(Error::numerical("match_eigenvalues", "ran out of eigenvalues"));
        }
        used.push(best.0);
        out.push((spectrum.eigenvalues[best.0], best.1));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbed::correctors;
    use std::f64::consts::PI;
    use crate::selection::modulus_from_period;
    use crate::spectral::{band_edges, band_sample, Branch, WaveContext};

    fn params_for(x: f64) -> WaveParams {
        let k = modulus_from_period(x).unwrap();
        selected_params(EllipticModulus::new(k).unwrap()).unwrap()
    }

    #[test]
    fn liouville_determinant_is_one() {
        let p = params_for(13.0);
        let mono = monodromy_kdv(&p, Complex64::new(0.0, 0.12), 256).unwrap();
        assert!(
            (mono.det - Complex64::new(1.0, 0.0)).norm() <= 1e-8,
            "det R = {}",
            mono.det
        );
    }

    #[test]
    fn monodromy_converges_at_fourth_order() {
        let p = params_for(11.0);
        let lam = Complex64::new(0.0, 0.3);
        let seg = |steps: usize| rk4_segment(&p, lam, 0.0, 0.25 * p.period(), steps);
        let r1 = seg(64);
        let r2 = seg(128);
        let r4 = seg(256);
        let e1: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (r1[i][j] - r4[i][j]).norm()))
            .fold(0.0, f64::max);
        let e2: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (r2[i][j] - r4[i][j]).norm()))
            .fold(0.0, f64::max);
        let slope = (e1 / e2).log2();
        assert!(slope >= 3.7, "measured RK4 order {slope}");
    }

    #[test]
    fn evans_vanishes_at_origin_with_multiplicity() {
        let p = params_for(13.0);
        let mono = monodromy_kdv(&p, Complex64::new(0.0, 0.0), 256).unwrap();
        // det(R - I) = 0: translation mode is periodic
        let e = evans_from_monodromy(&mono, 0.0, p.period());
        assert!(e.relative <= 1e-7, "E(0,0) = {}", e.relative);
    }

    #[test]
    fn evans_is_periodic_in_bloch_parameter() {
        let p = params_for(11.0);
        let mono = monodromy_kdv(&p, Complex64::new(0.0, 0.4), 256).unwrap();
        let x_per = p.period();
        for &xi in &[0.05, -0.11] {
            let a = evans_from_monodromy(&mono, xi, x_per);
            let b = evans_from_monodromy(&mono, xi + 2.0 * PI / x_per, x_per);
            assert!(
                (a.raw.norm() - b.raw.norm()).abs() <= 1e-9 * a.raw.norm(),
                "|E| not 2pi/X-periodic in xi"
            );
        }
    }

    #[test]
    fn evans_nonzero_off_spectrum() {
        let p = params_for(13.0);
        let e = evans_eval(&p, Complex64::new(0.5, 0.0), 0.1).unwrap();
        assert!(e.relative > 1e-4, "E(0.5, .) = {} should be far from 0", e.relative);
    }

    #[test]
    fn evans_vanishes_on_band_samples() {
        let k = modulus_from_period(13.0).unwrap();
        let m = EllipticModulus::new(k).unwrap();
        let ctx = WaveContext::new(m).unwrap();
        let p = selected_params(m).unwrap();
        let (e1, e2, e3) = band_edges(m);
        for eta in [e2 + 0.3 * (e3 - e2), e2 + 0.7 * (e3 - e2), e1 - 0.04, e1 - 0.9] {
            let b = band_sample(&ctx, eta, Branch::Plus).unwrap();
            let mono = monodromy_kdv(&p, b.lambda0, 256).unwrap();
            let e = evans_from_monodromy(&mono, b.xi, p.period());
            assert!(
                e.relative <= 1e-6,
                "Evans oracle fails at eta={eta}: |E| = {:.3e}",
                e.relative
            );
        }
    }

    #[test]
    fn dn_first_power_integrand_fails_evans() {
        use crate::spectral::{band_sample_with, XiIntegrand};
        let k = modulus_from_period(13.0).unwrap();
        let m = EllipticModulus::new(k).unwrap();
        let ctx = WaveContext::new(m).unwrap();
        let p = selected_params(m).unwrap();
        let (_, e2, e3) = band_edges(m);
        let eta = e2 + 0.4 * (e3 - e2);
        let bad = band_sample_with(&ctx, eta, Branch::Plus, XiIntegrand::DnFirstPower).unwrap();
        let mono = monodromy_kdv(&p, bad.lambda0, 256).unwrap();
        let e = evans_from_monodromy(&mono, bad.xi, p.period());
        assert!(e.relative > 1e-6, "dn integrand unexpectedly passes: {}", e.relative);
    }

    #[test]
    fn hill_translation_mode_at_xi_zero() {
        let k = modulus_from_period(13.0).unwrap();
        let corr = correctors(EllipticModulus::new(k).unwrap(), 256).unwrap();
        let spec = hill_spectrum(&corr, 0.05, 0.0, 48, HillOptions::default()).unwrap();
        let (_, dist) = nearest_eigenvalue(&spec, Complex64::new(0.0, 0.0));
        assert!(dist <= 1e-6, "no eigenvalue near 0 at xi=0: {dist}");
    }

    #[test]
    fn hill_spectrum_conjugate_at_minus_xi() {
        let k = modulus_from_period(13.0).unwrap();
        let corr = correctors(EllipticModulus::new(k).unwrap(), 256).unwrap();
        let xi = 0.07;
        let plus = hill_spectrum(&corr, 0.05, xi, 32, HillOptions::default()).unwrap();
        let minus = hill_spectrum(&corr, 0.05, -xi, 32, HillOptions::default()).unwrap();
        for e in plus.eigenvalues.iter().take(12) {
            let conj = e.conj();
            let d = minus
                .eigenvalues
                .iter()
                .map(|m| (m - conj).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 1e-8 * e.norm().max(1.0), "conjugate pairing defect {d}");
        }
    }

    #[test]
    fn hill_tracks_kdv_spectrum_as_delta_vanishes() {
        // delta -> 0 continuity toward a chosen band point, O(delta) rate.
        let k = modulus_from_period(13.0).unwrap();
        let m = EllipticModulus::new(k).unwrap();
        let ctx = WaveContext::new(m).unwrap();
        let corr = correctors(m, 256).unwrap();
        let (e1, _, _) = band_edges(m);
        let b = band_sample(&ctx, e1 - 0.35, Branch::Plus).unwrap();
        let mut dists = Vec::new();
        for &delta in &[0.1, 0.05, 0.025] {
            let spec = hill_spectrum(&corr, delta, b.xi, 48, HillOptions::default()).unwrap();
            let (_, d) = nearest_eigenvalue(&spec, b.lambda0);
            dists.push(d);
        }
        for w in dists.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                (1.7..=2.3).contains(&ratio),
                "delta-halving ratio {ratio} out of O(delta) range: {dists:?}"
            );
        }
    }
}
