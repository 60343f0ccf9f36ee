//! Characteristic velocities of the KdV Whitham modulation system, the
//! eigenvalues of the relaxed (delta -> 0) modulation system along the
//! selected wave family, the homogeneous relaxation rate, and the
//! subcharacteristic verdicts (S1)-(S3).
//!
//! Conventions. All velocities are physical (lab-frame) characteristic
//! speeds. The KdV Whitham system in Riemann invariants w1 < w2 < w3 has
//! velocities V_i = c + (2 Delta/3) b_i(k) with Delta = w3 - w1 and
//!
//!   b1 = k^2 K/(E - K),  b2 = k^2(1-k^2)K/((1-k^2)K - E),  b3 = (1-k^2)K/E.
//!
//! For the selected family Delta = w3 - w1 = 6 kappa_sel^2(k). The relaxed
//! system is the pair of conservation laws for the physical wavenumber
//! G(k) = 2 pi / X(k) and the mean M, with fluxes (G c0, <U^2/2>),
//! restricted to selected waves; its characteristic speeds beta_1, beta_2
//! are roots of the quadratic assembled from analytic k-derivatives of the
//! elliptic quantities. A finite-difference Jacobian of the same fluxes is
//! kept as an independent oracle.
//!
//! The homogeneous relaxation rate lambda_* is the nontrivial root of the
//! dispersion relation of the spatially homogeneous modulation system,
//! linearized about the selected steady state; (S3) is lambda_* < 0.

use crate::cnoidal::{averages, WaveParams};
use crate::elliptic::{
    complete_elliptic, elliptic_derivatives, k_minus_e, kc2_k_minus_e, EllipticModulus,
};
use crate::error::{Error, Result};
use crate::selection::{selection_kappa_sq, selection_kappa_sq_deriv};
use std::f64::consts::PI;

/// The b_i(k) coefficients of the KdV Whitham characteristic velocities.
///
/// b2's denominator (1-k^2)K - E vanishes only in the limit k -> 0 (it is
/// strictly negative on (0,1)); both cancelling combinations are evaluated
/// through their exact small-k series, so the limits b1, b2 -> -2 and
/// b3 -> 1 come out to full precision.
pub fn whitham_b_coefficients(modulus: EllipticModulus) -> Result<[f64; 3]> {
    let k = modulus.k();
    if k <= 0.0 {
        return Err(Error::domain("k", k, "(0, 1)"));
    }
    let p = complete_elliptic(modulus);
    let k2 = k * k;
    let kme = k_minus_e(modulus); // K - E > 0
    let kc2ke = kc2_k_minus_e(modulus); // (1-k^2)K - E < 0
    let b1 = -k2 * p.big_k / kme;
    let b2 = k2 * (1.0 - k2) * p.big_k / kc2ke;
    let b3 = (1.0 - k2) * p.big_k / p.big_e;
    Ok([b1, b2, b3])
}

/// KdV Whitham characteristic velocities V_i = c + (2 Delta/3) b_i(k),
/// sorted ascending. `delta_ri` is the Riemann-invariant spread w3 - w1.
pub fn kdv_char_velocities(
    modulus: EllipticModulus,
    delta_ri: f64,
    c: f64,
) -> Result<[f64; 3]> {
    if !(delta_ri > 0.0) {
        return Err(Error::domain("delta_ri", delta_ri, "(0, inf)"));
    }
    let b = whitham_b_coefficients(modulus)?;
    let mut v = [
        c + 2.0 * delta_ri / 3.0 * b[0],
        c + 2.0 * delta_ri / 3.0 * b[1],
        c + 2.0 * delta_ri / 3.0 * b[2],
    ];
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v)
}

/// Analytic ingredients of the selected family at modulus k, all with their
/// k-derivatives (chain rule through the elliptic derivative identities).
struct FamilyPack {
    f2: f64,
    /// physical wavenumber G = 2 pi / X = pi sqrt(f2) / K
    g: f64,
    gp: f64,
    mp: f64,
    /// gauge offset u0 = -m so that <U0> = 0
    u0: f64,
    /// speed at the gauge
    c0: f64,
    /// d c0/dk at fixed u0
    c0k: f64,
    /// d a/dk at fixed u0 (a the profile-ODE constant)
    ak: f64,
}

fn family_pack(modulus: EllipticModulus) -> Result<FamilyPack> {
    let k = modulus.k();
    let p = complete_elliptic(modulus);
    let (dk, de) = elliptic_derivatives(modulus)?;
    let f2 = selection_kappa_sq(modulus)?;
    let f2p = selection_kappa_sq_deriv(modulus)?;
    let f = f2.sqrt();
    let fp = f2p / (2.0 * f);
    let g = PI * f / p.big_k;
    let gp = PI * (fp * p.big_k - f * dk) / (p.big_k * p.big_k);
    let w = -kc2_k_minus_e(modulus) / p.big_k; // (E - (1-k^2)K)/K
    let wp = (de + 2.0 * k * p.big_k - (1.0 - k * k) * dk) / p.big_k - w * dk / p.big_k;
    let m = 12.0 * f2 * w;
    let mp = 12.0 * (f2p * w + f2 * wp);
    let u0 = -m;
    let k2 = k * k;
    let c0 = u0 + (8.0 * k2 - 4.0) * f2;
    let c0k = 16.0 * k * f2 + (8.0 * k2 - 4.0) * f2p;
    let s1 = 12.0 * (k2 - 1.0) * f2;
    let s3 = 12.0 * k2 * f2;
    let s1p = 12.0 * (2.0 * k * f2 + (k2 - 1.0) * f2p);
    let s3p = 12.0 * (2.0 * k * f2 + k2 * f2p);
    let ak = -(2.0 * (s1p + s3p) * u0 + s1p * s3 + s1 * s3p) / 6.0;
    let _ = m;
    Ok(FamilyPack {
        f2,
        g,
        gp,
        mp,
        u0,
        c0,
        c0k,
        ak,
    })
}

/// Galilean gauge offset: u0 such that the selected wave at modulus k has
/// zero mean.
pub fn gauge_offset(modulus: EllipticModulus) -> Result<f64> {
    Ok(family_pack(modulus)?.u0)
}

/// Relaxed-system characteristic speeds.
#[derive(Clone, Copy, Debug)]
pub enum BetaPair {
    /// Real and sorted: strict hyperbolicity (S1) holds when distinct.
    Real([f64; 2]),
    /// Complex conjugate pair re +- i im (S1 fails).
    ComplexPair { re: f64, im: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct RelaxedEigenvalues {
    pub betas: BetaPair,
    /// Discriminant of the quadratic (sign reported, never divided by).
    pub discriminant: f64,
    /// Leading coefficient A(k) = G'(k).
    pub leading: f64,
}

/// Characteristic speeds of the relaxed modulation system at the zero-mean
/// gauge, as roots of A beta^2 - B beta + C = 0 with analytic coefficients.
pub fn relaxed_char_velocities(modulus: EllipticModulus) -> Result<RelaxedEigenvalues> {
    let fp = family_pack(modulus)?;
    // Quasilinear form in the state (k, u0): densities (G(k), M), fluxes
    // (G c0, <U^2/2>). Using <U^2/2> = c0 M + a and d<U^2/2>/du0 = M, the
    // characteristic polynomial at the gauge M = 0 reduces to
    //   G' beta^2 - (G' c0 + G c0_k - G m') beta + (-G)(c0 m' + a_k) = 0.
    let a_q = fp.gp;
    let b_q = fp.gp * fp.c0 + fp.g * fp.c0k - fp.g * fp.mp;
    let c_q = -fp.g * (fp.c0 * fp.mp + fp.ak);
    if a_q.abs() < 1e-14 * (b_q.abs() + c_q.abs()).max(1e-300) {
        return Err(Error::numerical(
            "relaxed_char_velocities",
            "leading coefficient G'(k) within tolerance of zero",
        ));
    }
    let disc = b_q * b_q - 4.0 * a_q * c_q;
    let betas = if disc >= 0.0 {
        let r = disc.sqrt();
        let mut pair = [(b_q - r) / (2.0 * a_q), (b_q + r) / (2.0 * a_q)];
        pair.sort_by(|a, b| a.partial_cmp(b).unwrap());
        BetaPair::Real(pair)
    } else {
        BetaPair::ComplexPair {
            re: b_q / (2.0 * a_q),
            im: (-disc).sqrt() / (2.0 * a_q.abs()),
        }
    };
    Ok(RelaxedEigenvalues {
        betas,
        discriminant: disc,
        leading: a_q,
    })
}

/// Independent oracle: eigenvalues of the 2x2 Jacobian of the relaxed
/// system's fluxes with respect to its densities, by Richardson-extrapolated
/// central differences of quadrature averages in the state (k, u0).
pub fn relaxed_betas_fd(modulus: EllipticModulus, n_quad: usize) -> Result<BetaPair> {
    let k = modulus.k();
    let gm = |kk: f64, u0: f64| -> Result<[f64; 4]> {
        let m = EllipticModulus::new(kk)?;
        let kappa = crate::selection::selection_kappa(m)?;
        let w = WaveParams::new(m, kappa, u0)?;
        let avg = averages(&w, n_quad)?;
        let g = w.wavenumber_2pi();
        Ok([g, avg.mean, g * w.speed(), avg.half_square])
    };
    let u0 = gauge_offset(modulus)?;
    let base_h = (1e-6f64).min(0.1 * (EllipticModulus::ADMISSIBLE.1 - k));
    // columns: d/dk and d/du0 of (G, M, G c0, <U^2/2>)
    let col_k = |h: f64| -> Result<[f64; 4]> {
        let p = gm(k + h, u0)?;
        let m = gm(k - h, u0)?;
        Ok([
            (p[0] - m[0]) / (2.0 * h),
            (p[1] - m[1]) / (2.0 * h),
            (p[2] - m[2]) / (2.0 * h),
            (p[3] - m[3]) / (2.0 * h),
        ])
    };
    let d_h = col_k(base_h)?;
    let d_h2 = col_k(0.5 * base_h)?;
    let dk_col: Vec<f64> = (0..4).map(|i| (4.0 * d_h2[i] - d_h[i]) / 3.0).collect();
    // u0-derivative is exact: dG/du0 = 0, dM/du0 = 1, d(Gc0)/du0 = G,
    // d<U^2/2>/du0 = M (Galilean structure); use FD anyway for independence.
    let hu = 1e-6;
    let pu = gm(k, u0 + hu)?;
    let mu = gm(k, u0 - hu)?;
    let du_col: Vec<f64> = (0..4).map(|i| (pu[i] - mu[i]) / (2.0 * hu)).collect();
    // solve dG * [[x]] = dH: dG = [[dk_col0, du0], [dk_col1, du1]]
    let dg = [[dk_col[0], du_col[0]], [dk_col[1], du_col[1]]];
    let dh = [[dk_col[2], du_col[2]], [dk_col[3], du_col[3]]];
    let det = dg[0][0] * dg[1][1] - dg[0][1] * dg[1][0];
    if det.abs() < 1e-300 {
        return Err(Error::numerical("relaxed_betas_fd", "singular density Jacobian"));
    }
    let inv = [
        [dg[1][1] / det, -dg[0][1] / det],
        [-dg[1][0] / det, dg[0][0] / det],
    ];
    // J = inv(dG) * dH
    let mut j = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            j[r][c] = inv[r][0] * dh[0][c] + inv[r][1] * dh[1][c];
        }
    }
    let tr = j[0][0] + j[1][1];
    let det_j = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det_j;
    Ok(if disc >= 0.0 {
        let r = disc.sqrt();
        let mut pair = [0.5 * (tr - r), 0.5 * (tr + r)];
        pair.sort_by(|a, b| a.partial_cmp(b).unwrap());
        BetaPair::Real(pair)
    } else {
        BetaPair::ComplexPair {
            re: 0.5 * tr,
            im: 0.5 * (-disc).sqrt(),
        }
    })
}

/// Which reading of K' enters the homogeneous relaxation rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KPrimeReading {
    /// K'(k) = dK/dk. This is the reading produced by differentiating the
    /// wavenumber constraint, and the one that passes the sign oracles.
    DerivativeInK,
    /// K'(k) = K(sqrt(1-k^2)), the complementary integral.
    ComplementaryIntegral,
}

/// Homogeneous relaxation rate lambda_* (the sign of which is (S3)).
///
/// Derivation: the spatially homogeneous modulation system holds kappa and
/// M fixed and relaxes <U^2/2> = M^2/2 - (Delta^2/6) Pt(k) with
/// Pt = (1-k^2) - 2(2-k^2)E/K + 3(E/K)^2 toward the selected steady state
/// Delta = 12 kappa_sel^2(k) (Delta = u3 - u1). Linearizing with the
/// wavenumber constraint d(Delta)/dk = 2 Delta K'/K gives
///
///   lambda_* = (2 Delta K'/K - Delta')
///            / (Delta^2 (2 Pt K'/(3K) + Pt'/6)).
pub fn homogeneous_relaxation_rate(
    modulus: EllipticModulus,
    reading: KPrimeReading,
) -> Result<f64> {
    let k = modulus.k();
    let p = complete_elliptic(modulus);
    let (dk, de) = elliptic_derivatives(modulus)?;
    let kprime = match reading {
        KPrimeReading::DerivativeInK => dk,
        KPrimeReading::ComplementaryIntegral => {
            complete_elliptic(EllipticModulus::new(modulus.kc())?).big_k
        }
    };
    let f2 = selection_kappa_sq(modulus)?;
    let delta = 12.0 * f2;
    let delta_p = 12.0 * selection_kappa_sq_deriv(modulus)?;
    // Pt cancels to O(k^4); below the series switch it must be assembled
    // from the exact numerator series.
    let (pt, ptp) = if k < crate::series::SMALL_K {
        crate::series::SmallKSeries::shared().pt_and_deriv(k)
    } else {
        let r = p.big_e / p.big_k;
        let rp = (de * p.big_k - p.big_e * dk) / (p.big_k * p.big_k);
        let k2 = k * k;
        (
            (1.0 - k2) - 2.0 * (2.0 - k2) * r + 3.0 * r * r,
            -2.0 * k + 4.0 * k * r - 2.0 * (2.0 - k2) * rp + 6.0 * r * rp,
        )
    };
    let num = 2.0 * delta * kprime / p.big_k - delta_p;
    let den = delta * delta * (2.0 * pt * kprime / (3.0 * p.big_k) + ptp / 6.0);
    if den.abs() < 1e-14 * num.abs().max(1e-300) {
        return Err(Error::numerical(
            "homogeneous_relaxation_rate",
            "dispersion coefficient within tolerance of zero",
        ));
    }
    Ok(num / den)
}

/// Signed margins backing the (S1)-(S3) flags.
#[derive(Clone, Copy, Debug)]
pub struct Margins {
    /// Gap beta_2 - beta_1 when real, else -|Im beta|.
    pub s1: f64,
    /// Min pairwise gap of the interlacing alpha1<b1<alpha2<b2<alpha3,
    /// negative when violated or when the betas are complex.
    pub s2: f64,
    /// -lambda_*.
    pub s3: f64,
}

/// Full subcharacteristic report at period X (zero-mean gauge).
#[derive(Clone, Copy, Debug)]
pub struct SubcharReport {
    pub x: f64,
    pub k: f64,
    pub alphas: [f64; 3],
    pub betas: BetaPair,
    pub lambda_star: f64,
    pub s1: bool,
    pub s2: bool,
    pub s3: bool,
    pub margins: Margins,
}

/// Evaluate (S1)-(S3) for the selected wave of period X.
pub fn subchar_report(x: f64) -> Result<SubcharReport> {
    let k = crate::selection::modulus_from_period(x)?;
    subchar_report_at_modulus(k, x)
}

pub fn subchar_report_at_modulus(k: f64, x: f64) -> Result<SubcharReport> {
    let modulus = EllipticModulus::new_admissible(k)?;
    let fp = family_pack(modulus)?;
    let delta_ri = 6.0 * fp.f2; // w3 - w1 of the selected wave
    let alphas = kdv_char_velocities(modulus, delta_ri, fp.c0)?;
    let relaxed = relaxed_char_velocities(modulus)?;
    let lambda_star = homogeneous_relaxation_rate(modulus, KPrimeReading::DerivativeInK)?;
    let (s1_margin, s2_margin) = match relaxed.betas {
        BetaPair::Real(b) => {
            let gaps = [
                b[0] - alphas[0],
                alphas[1] - b[0],
                b[1] - alphas[1],
                alphas[2] - b[1],
            ];
            (
                b[1] - b[0],
                gaps.iter().cloned().fold(f64::INFINITY, f64::min),
            )
        }
        BetaPair::ComplexPair { im, .. } => (-im.abs(), -im.abs()),
    };
    let s1 = matches!(relaxed.betas, BetaPair::Real(b) if b[1] > b[0]);
    let s2 = s2_margin > 0.0;
    let s3 = lambda_star < 0.0;
    Ok(SubcharReport {
        x,
        k,
        alphas,
        betas: relaxed.betas,
        lambda_star,
        s1,
        s2,
        s3,
        margins: Margins {
            s1: s1_margin,
            s2: s2_margin,
            s3: -lambda_star,
        },
    })
}

/// Lemma coefficients A_j: the delta-slopes of the three spectral branches
/// emanating from the origin, in terms of the subcharacteristic data and
/// the origin rate gamma (= -lambda_1 at the origin):
///   A_j = -gamma (alpha_j - beta_1)(alpha_j - beta_2) / prod_{l != j}(alpha_j - alpha_l).
pub fn branch_slopes(report: &SubcharReport, gamma: f64) -> [f64; 3] {
    let a = report.alphas;
    let (b1, b2) = match report.betas {
        BetaPair::Real(b) => (
            num_complex::Complex64::new(b[0], 0.0),
            num_complex::Complex64::new(b[1], 0.0),
        ),
        BetaPair::ComplexPair { re, im } => (
            num_complex::Complex64::new(re, im),
            num_complex::Complex64::new(re, -im),
        ),
    };
    let mut out = [0.0; 3];
    for j in 0..3 {
        let aj = num_complex::Complex64::new(a[j], 0.0);
        let num = (aj - b1) * (aj - b2);
        let mut den = 1.0;
        for l in 0..3 {
            if l != j {
                den *= a[j] - a[l];
            }
        }
        out[j] = -gamma * (num / den).re;
    }
    out
}

/// Critical period X_c: the sign change of the (S2) interlacing margin,
/// located by bisection on [2 pi + 0.01, 10].
pub fn critical_period() -> Result<f64> {
    let margin = |x: f64| -> Result<f64> { Ok(subchar_report(x)?.margins.s2) };
    let (mut lo, mut hi) = (2.0 * PI + 0.01, 10.0);
    let (mlo, mhi) = (margin(lo)?, margin(hi)?);
    if !(mlo < 0.0 && mhi > 0.0) {
        return Err(Error::numerical(
            "critical_period",
            format!("no sign change: margin({lo:.3}) = {mlo:.3e}, margin({hi:.3}) = {mhi:.3e}"),
        ));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if margin(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::modulus_from_period;

    fn modulus(k: f64) -> EllipticModulus {
        EllipticModulus::new(k).unwrap()
    }

    #[test]
    fn b_coefficient_limits() {
        // b3 -> 1 and b1, b2 -> -2 as k -> 0 (series-verified limits).
        let b = whitham_b_coefficients(modulus(1e-7)).unwrap();
        assert!((b[0] + 2.0).abs() < 1e-9, "b1 limit: {}", b[0]);
        assert!((b[1] + 2.0).abs() < 1e-9, "b2 limit: {}", b[1]);
        assert!((b[2] - 1.0).abs() < 1e-9, "b3 limit: {}", b[2]);
    }

    #[test]
    fn velocities_are_strictly_ordered() {
        let m = modulus(0.5);
        let v = kdv_char_velocities(m, 1.0, 0.0).unwrap();
        assert!(v[0] < v[1] && v[1] < v[2]);
    }

    #[test]
    fn galilean_shift_moves_all_velocities_equally() {
        let k = modulus_from_period(13.0).unwrap();
        let m = modulus(k);
        let rep = subchar_report_at_modulus(k, 13.0).unwrap();
        let s = 0.7;
        let shifted = kdv_char_velocities(m, 6.0 * selection_kappa_sq(m).unwrap(), rep.alphas[0] * 0.0 + s).unwrap();
        let base = kdv_char_velocities(m, 6.0 * selection_kappa_sq(m).unwrap(), 0.0).unwrap();
        for j in 0..3 {
            assert!((shifted[j] - base[j] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_betas_match_fd_jacobian() {
        for &x in &[8.6, 10.0, 13.0, 17.0] {
            let k = modulus_from_period(x).unwrap();
            let m = modulus(k);
            let analytic = relaxed_char_velocities(m).unwrap();
            let fd = relaxed_betas_fd(m, 2048).unwrap();
            match (analytic.betas, fd) {
                (BetaPair::Real(a), BetaPair::Real(b)) => {
                    assert!((a[0] - b[0]).abs() <= 1e-6, "beta1 at X={x}: {} vs {}", a[0], b[0]);
                    assert!((a[1] - b[1]).abs() <= 1e-6, "beta2 at X={x}: {} vs {}", a[1], b[1]);
                }
                _ => panic!("reality mismatch at X={x}"),
            }
        }
    }

    #[test]
    fn discriminant_positive_on_stable_band() {
        for &x in &[8.6, 13.0, 20.0, 28.0] {
            let k = modulus_from_period(x).unwrap();
            let r = relaxed_char_velocities(modulus(k)).unwrap();
            assert!(r.discriminant > 0.0, "complex betas at X={x}");
        }
    }

    #[test]
    fn interlacing_at_x13() {
        let rep = subchar_report(13.0).unwrap();
        assert!(rep.s1 && rep.s2 && rep.s3, "subchar at X=13: {rep:?}");
        if let BetaPair::Real(b) = rep.betas {
            assert!(rep.alphas[0] < b[0]);
            assert!(b[0] < rep.alphas[1]);
            assert!(rep.alphas[1] < b[1]);
            assert!(b[1] < rep.alphas[2]);
        }
    }

    #[test]
    fn s2_fails_below_critical_period() {
        let rep = subchar_report(7.0).unwrap();
        assert!(!rep.s2, "S2 should fail at X=7");
        let rep9 = subchar_report(9.0).unwrap();
        assert!(rep9.s2, "S2 should hold at X=9");
    }

    #[test]
    fn conditions_hold_at_x30() {
        let rep = subchar_report(30.0).unwrap();
        assert!(rep.s1 && rep.s2 && rep.s3, "{rep:?}");
    }

    #[test]
    fn critical_period_matches_sideband_threshold() {
        let xc = critical_period().unwrap();
        assert!((7.5..=8.5).contains(&xc), "X_c = {xc}");
        assert!(subchar_report(xc + 0.5).unwrap().margins.s2 > 0.0);
        assert!(subchar_report(xc - 0.5).unwrap().margins.s2 < 0.0);
    }

    #[test]
    fn lambda_star_negative_across_band() {
        for i in 0..40 {
            let x = 2.0 * PI + (30.0 - 2.0 * PI) * i as f64 / 39.0;
            let k = modulus_from_period(x).unwrap();
            let ls =
                homogeneous_relaxation_rate(modulus(k), KPrimeReading::DerivativeInK).unwrap();
            assert!(ls < 0.0, "lambda_* = {ls} at X = {x}");
        }
    }

    #[test]
    fn margins_continuous_in_x() {
        let n = 120;
        let mut prev: Option<f64> = None;
        let mut max_jump = 0.0f64;
        for i in 0..=n {
            let x = 8.6 + (30.0 - 8.6) * i as f64 / n as f64;
            let m = subchar_report(x).unwrap().margins.s2;
            if let Some(p) = prev {
                max_jump = max_jump.max((m - p).abs());
            }
            prev = Some(m);
        }
        assert!(max_jump < 0.15, "margin jump {max_jump}");
    }
}
