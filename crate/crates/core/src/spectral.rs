//! The linearized-KdV Bloch spectrum of the selected cnoidal waves, the
//! O(delta) eigenvalue corrector lambda_1 across the spectrum, the stability
//! index Ind(X), and the stability boundaries in the period X.
//!
//! The spectrum of the linearized KdV operator about a cnoidal wave is the
//! imaginary axis, parameterized over the two bands
//! eta in (-inf, eta1] U [eta2, eta3], eta1 = k^2-1, eta2 = 2k^2-1,
//! eta3 = k^2, by
//!
//!   lambda0(eta) = +- 8 i kappa^3 sqrt(|eta-eta1||eta-eta2||eta-eta3|),
//!   xi(eta)      = -+ (2 kappa/K) sqrt(...) * int_0^K dy/(eta - k^2 + dn^2(y,k))
//!                  (mod 2 pi / X),
//!
//! in physical units for the wave U0 = 12 k^2 kappa^2 cn^2(kappa x). The
//! associated Bloch eigenfunction is
//!
//!   u(x) = (1 - U0'/(3 lambda0)) exp(-int_0^x lambda0 ds / (U0/3 - c0 + 4 kappa^2 eta)),
//!
//! whose exponent splits into i xi x plus a periodic part; the adjoint
//! pairing function is v(x) = int_x^{x+X} u(s) ds. Both are represented as
//! e^{m x} p(x) with p periodic and handled spectrally. The corrector is
//! computed by two routes that must agree: the pairing-ratio form on v alone
//! and the primal solvability ratio on (u, v, U1).
//!
//! `dn^2` in the xi-integrand and the branch pairing between lambda0 and xi
//! are pinned by the Evans-function oracle (see `evans`); the alternative
//! `dn` integrand remains selectable for the record.

use crate::cnoidal::WaveParams;
use crate::elliptic::{complete_elliptic, jacobi_sn_cn_dn, EllipticModulus};
use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, wavenumbers};
use crate::perturbed::{correctors, Correctors};
use crate::quad::adaptive_quad;
use crate::selection::{modulus_from_period, selection_kappa};
use crate::whitham::{branch_slopes, subchar_report_at_modulus, SubcharReport};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Mutex;

/// Sign of the imaginary part of lambda0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Which integrand the Bloch-parameter integral uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XiIntegrand {
    /// 1/(eta - k^2 + dn^2): consistent with the dn^2 form of the wave and
    /// validated by the Evans oracle. Default.
    DnSquared,
    /// 1/(eta - k^2 + dn): the verbatim alternative; fails the Evans oracle.
    DnFirstPower,
}

/// A point on the KdV spectral bands.
#[derive(Clone, Copy, Debug)]
pub struct BandPoint {
    pub eta: f64,
    pub branch: Branch,
    /// Physical eigenvalue (purely imaginary).
    pub lambda0: Complex64,
    /// |Im lambda0| in normalized units: 8 sqrt(|eta-eta1||eta-eta2||eta-eta3|).
    pub lambda0_normalized: f64,
    /// Physical Bloch parameter reduced to [-pi/X, pi/X).
    pub xi: f64,
    /// Unreduced Bloch parameter from the integral.
    pub xi_raw: f64,
    /// Number of Brillouin cells removed in the reduction.
    pub cell_index: i32,
}

/// Band edges (eta1, eta2, eta3) = (k^2-1, 2k^2-1, k^2).
pub fn band_edges(modulus: EllipticModulus) -> (f64, f64, f64) {
    let k2 = modulus.m();
    (k2 - 1.0, 2.0 * k2 - 1.0, k2)
}

/// Shared per-wave data for spectral sampling, with a grid cache keyed by
/// resolution. All fields refer to the selected wave in the u0 = 0 gauge.
pub struct WaveContext {
    pub params: WaveParams,
    pub x_period: f64,
    pub big_k: f64,
    grids: Mutex<HashMap<usize, std::sync::Arc<CtxGrids>>>,
    u1_cache: Mutex<HashMap<usize, std::sync::Arc<Vec<f64>>>>,
}

struct CtxGrids {
    u0: Vec<f64>,
    u0x: Vec<f64>,
    dn2: Vec<f64>,
    ks: Vec<f64>,
}

impl WaveContext {
    pub fn new(modulus: EllipticModulus) -> Result<Self> {
        let kappa = selection_kappa(modulus)?;
        let params = WaveParams::new(modulus, kappa, 0.0)?;
        Ok(WaveContext {
            x_period: params.period(),
            big_k: complete_elliptic(modulus).big_k,
            params,
            grids: Mutex::new(HashMap::new()),
            u1_cache: Mutex::new(HashMap::new()),
        })
    }

    fn grids(&self, n: usize) -> std::sync::Arc<CtxGrids> {
        if let Some(g) = self.grids.lock().unwrap().get(&n) {
            return g.clone();
        }
        let k2 = self.params.modulus.m();
        let amp = self.params.amplitude();
        let kap = self.params.kappa;
        let mut u0 = Vec::with_capacity(n);
        let mut u0x = Vec::with_capacity(n);
        let mut dn2 = Vec::with_capacity(n);
        for j in 0..n {
            let x = j as f64 * self.x_period / n as f64;
            let (s, c, d) = jacobi_sn_cn_dn(kap * x, self.params.modulus);
            u0.push(amp * c * c);
            u0x.push(-2.0 * amp * kap * s * c * d);
            dn2.push(1.0 - k2 + k2 * c * c);
        }
        let g = std::sync::Arc::new(CtxGrids {
            u0,
            u0x,
            dn2,
            ks: wavenumbers(n, self.x_period),
        });
        self.grids.lock().unwrap().insert(n, g.clone());
        g
    }

    fn u1_at(&self, corr: &Correctors, n: usize) -> std::sync::Arc<Vec<f64>> {
        if let Some(u) = self.u1_cache.lock().unwrap().get(&n) {
            return u.clone();
        }
        let res = corr
            .u1
            .resample(n)
            .expect("resample to larger power of two")
            .values()
            .to_vec();
        let arc = std::sync::Arc::new(res);
        self.u1_cache.lock().unwrap().insert(n, arc.clone());
        arc
    }
}

/// Evaluate a band point: lambda0 and xi by the closed parameterization,
/// with the xi-integral done by adaptive quadrature.
pub fn band_sample(ctx: &WaveContext, eta: f64, branch: Branch) -> Result<BandPoint> {
    band_sample_with(ctx, eta, branch, XiIntegrand::DnSquared)
}

pub fn band_sample_with(
    ctx: &WaveContext,
    eta: f64,
    branch: Branch,
    integrand: XiIntegrand,
) -> Result<BandPoint> {
    let (e1, e2, e3) = band_edges(ctx.params.modulus);
    let in_band = eta < e1 || (eta > e2 && eta < e3);
    if !in_band {
        return Err(Error::domain(
            "eta",
            eta,
            "(-inf, eta1) U (eta2, eta3), away from edges",
        ));
    }
    let p = (eta - e1).abs() * (eta - e2).abs() * (eta - e3).abs();
    if p <= 0.0 {
        return Err(Error::domain("eta", eta, "interior of the band set"));
    }
    let sq = p.sqrt();
    let kap = ctx.params.kappa;
    let modulus = ctx.params.modulus;
    let k2 = modulus.m();
    let big_k = ctx.big_k;
    // I = int_0^K dy / (eta - k^2 + dn^(1 or 2))
    let f = move |y: f64| {
        let (_, _, d) = jacobi_sn_cn_dn(y, modulus);
        let dd = match integrand {
            XiIntegrand::DnSquared => d * d,
            XiIntegrand::DnFirstPower => d,
        };
        1.0 / (eta - k2 + dd)
    };
    let rough = adaptive_quad(&f, 0.0, big_k, 1e-7);
    let integral = adaptive_quad(&f, 0.0, big_k, 1e-12 * rough.abs().max(1.0));
    let sign = match branch {
        Branch::Plus => 1.0,
        Branch::Minus => -1.0,
    };
    let lambda0 = Complex64::new(0.0, sign * 8.0 * kap * kap * kap * sq);
    let xi_raw = -sign * 2.0 * kap * sq * integral / big_k;
    let cell = 2.0 * std::f64::consts::PI / ctx.x_period;
    let mut cells = (xi_raw / cell).round();
    let mut xi = xi_raw - cells * cell;
    if xi >= 0.5 * cell {
        xi -= cell;
        cells += 1.0;
    } else if xi < -0.5 * cell {
        xi += cell;
        cells -= 1.0;
    }
    Ok(BandPoint {
        eta,
        branch,
        lambda0,
        lambda0_normalized: 8.0 * sq,
        xi,
        xi_raw,
        cell_index: cells as i32,
    })
}

// ---------------------------------------------------------------------------
// Bloch functions e^{m x} p(x)
// ---------------------------------------------------------------------------

/// A Bloch function f(x) = e^{m x} p(x) with p periodic on [0, X), sampled
/// on n points. m is purely imaginary up to rounding, so products
/// f conj(g) of two Bloch functions with the same m are periodic.
#[derive(Clone)]
pub struct BlochFn {
    pub period: f64,
    pub m: Complex64,
    pub p: Vec<Complex64>,
}

impl BlochFn {
    pub fn n(&self) -> usize {
        self.p.len()
    }

    /// Bloch derivative of given order: e^{m x}(d/dx + m)^order p.
    pub fn derivative(&self, order: u32, ks: &[f64]) -> BlochFn {
        let mut hat = self.p.clone();
        fft_forward(&mut hat);
        for (j, h) in hat.iter_mut().enumerate() {
            *h *= (Complex64::new(0.0, ks[j]) + self.m).powu(order);
        }
        fft_inverse(&mut hat);
        BlochFn {
            period: self.period,
            m: self.m,
            p: hat,
        }
    }

    /// L2 pairing int f conj(g) over the period (requires equal m).
    pub fn inner(&self, other: &BlochFn) -> Complex64 {
        debug_assert!((self.m - other.m).norm() < 1e-9);
        let n = self.n();
        let sum: Complex64 = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| a * b.conj())
            .sum();
        sum / n as f64 * self.period
    }

    pub fn norm_l2(&self) -> f64 {
        (self
            .p
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            / self.n() as f64
            * self.period)
            .sqrt()
    }
}

/// The eigenfunction pair (u, v) at a band point, with diagnostics.
pub struct EigenPair {
    pub u_hat: BlochFn,
    pub v_hat: BlochFn,
    /// Relative residual of u in the linearized KdV ODE.
    pub residual: f64,
    /// Roundoff floor of that residual: the spectral third derivative
    /// amplifies rounding by (pi n/X)^3, so the achievable residual is
    /// bounded below by eps (pi n/X)^3 ||p|| / scale.
    pub residual_floor: f64,
    /// |grid mean of the exponent - i xi_raw| (consistency of the two xi routes).
    pub xi_consistency: f64,
}

/// Build the eigenfunction pair on an n-point grid.
pub fn eigenfunction_pair(ctx: &WaveContext, band: &BandPoint, n: usize) -> Result<EigenPair> {
    let g = ctx.grids(n);
    let lam = band.lambda0;
    if lam.norm() == 0.0 {
        return Err(Error::domain("lambda0", 0.0, "nonzero (band interior)"));
    }
    let kap2 = ctx.params.kappa * ctx.params.kappa;
    let (e1, _, _) = band_edges(ctx.params.modulus);
    let _ = e1;
    let k2 = ctx.params.modulus.m();
    // denominator U0/3 - c0 + 4 kappa^2 eta = 4 kappa^2 (dn^2 - k^2 + eta)
    let mut gx: Vec<Complex64> = Vec::with_capacity(n);
    for j in 0..n {
        let den = 4.0 * kap2 * (g.dn2[j] - k2 + band.eta);
        if den.abs() < 1e-13 {
            return Err(Error::numerical(
                "eigenfunction_pair",
                "exponent denominator vanished on the grid",
            ));
        }
        gx.push(-lam / den);
    }
    let mg: Complex64 = gx.iter().sum::<Complex64>() / n as f64;
    let xi_consistency = (mg - Complex64::new(0.0, band.xi_raw)).norm();
    // periodic antiderivative of g - mg
    let mut hat: Vec<Complex64> = gx.iter().map(|&z| z - mg).collect();
    fft_forward(&mut hat);
    hat[0] = Complex64::new(0.0, 0.0);
    for j in 1..n {
        hat[j] /= Complex64::new(0.0, g.ks[j]);
    }
    fft_inverse(&mut hat);
    let h0 = hat[0];
    let p: Vec<Complex64> = (0..n)
        .map(|j| (Complex64::new(1.0, 0.0) - g.u0x[j] / (3.0 * lam)) * (hat[j] - h0).exp())
        .collect();
    let u_hat = BlochFn {
        period: ctx.x_period,
        m: mg,
        p,
    };
    // ODE residual: u''' + ((U0-c0) u)' + lambda u = 0
    let c0 = ctx.params.speed();
    let d3 = u_hat.derivative(3, &g.ks);
    let prod = BlochFn {
        period: ctx.x_period,
        m: mg,
        p: (0..n).map(|j| (g.u0[j] - c0) * u_hat.p[j]).collect(),
    };
    let d1 = prod.derivative(1, &g.ks);
    let mut res_norm = 0.0;
    let mut scale = 0.0f64;
    let mut p_norm = 0.0f64;
    for j in 0..n {
        let r = d3.p[j] + d1.p[j] + lam * u_hat.p[j];
        res_norm += r.norm_sqr();
        scale += (lam * u_hat.p[j]).norm_sqr().max(d3.p[j].norm_sqr());
        p_norm += u_hat.p[j].norm_sqr();
    }
    let residual = (res_norm / scale.max(1e-300)).sqrt();
    let k_max = std::f64::consts::PI * n as f64 / ctx.x_period;
    let residual_floor =
        f64::EPSILON * k_max.powi(3) * (p_norm / scale.max(1e-300)).sqrt();
    // v(x) = int_x^{x+X} u: the Bloch solution of v' = (e^{i xi X} - 1) u
    let theta = mg.im * ctx.x_period;
    let mu = Complex64::new(0.0, 2.0 * (0.5 * theta).sin()) * Complex64::new(0.0, 0.5 * theta).exp();
    let mut qhat = u_hat.p.clone();
    fft_forward(&mut qhat);
    for j in 0..n {
        let den = Complex64::new(0.0, g.ks[j]) + mg;
        if den.norm() < 1e-9 * (2.0 * std::f64::consts::PI / ctx.x_period) {
            return Err(Error::numerical(
                "eigenfunction_pair",
                "Bloch parameter resonant with the lattice (xi ~ 0 mod 2 pi/X)",
            ));
        }
        qhat[j] *= mu / den;
    }
    fft_inverse(&mut qhat);
    let v_hat = BlochFn {
        period: ctx.x_period,
        m: mg,
        p: qhat,
    };
    Ok(EigenPair {
        u_hat,
        v_hat,
        residual,
        residual_floor,
        xi_consistency,
    })
}

/// The O(delta) corrector at a band point, by both routes.
#[derive(Clone, Copy, Debug)]
pub struct Lambda1Sample {
    pub band: BandPoint,
    /// Re lambda_1 from the pairing-ratio route on v alone.
    pub re_pairing: f64,
    /// Im lambda_1 from the U1 integral (vanishes by parity).
    pub im_pairing: f64,
    /// The primal solvability ratio (complex), using u, v and U1.
    pub primal: Complex64,
    /// Relative size of Im<v', v> (validity indicator).
    pub denominator_rel: f64,
    /// Residual of the eigenfunction ODE at the resolution used.
    pub residual: f64,
    /// Roundoff floor of the residual at that resolution.
    pub residual_floor: f64,
    pub grid_size: usize,
}

/// Compute lambda_1 at fixed resolution. `u1` must be sampled on the same
/// grid when provided; without it the primal route and Im lambda_1 are
/// reported as zero.
pub fn lambda1_at(
    ctx: &WaveContext,
    band: &BandPoint,
    n: usize,
    u1: Option<&[f64]>,
) -> Result<Lambda1Sample> {
    let g = ctx.grids(n);
    let pair = eigenfunction_pair(ctx, band, n)?;
    let v = &pair.v_hat;
    let v1 = v.derivative(1, &g.ks);
    let v2 = v.derivative(2, &g.ks);
    let v3 = v.derivative(3, &g.ks);
    let denom = v1.inner(v);
    let denom_rel = denom.im.abs() / (v1.norm_l2() * v.norm_l2()).max(1e-300);
    if denom_rel < 1e-9 {
        return Err(Error::numerical(
            "lambda1",
            format!("pairing denominator too small ({denom_rel:.2e})"),
        ));
    }
    let re = (v2.inner(&v1) - v3.inner(&v2)).im / denom.im;
    let (im, primal) = if let Some(u1v) = u1 {
        let n_f = n as f64;
        let u1_v1_sq: f64 = (0..n)
            .map(|j| u1v[j] * v1.p[j].norm_sqr())
            .sum::<f64>()
            / n_f
            * ctx.x_period;
        let im = -u1_v1_sq / denom.im;
        // primal: lambda1 = -<(U1 u)' + u'' + u''''; v> / <u; v>
        let u = &pair.u_hat;
        let u2 = u.derivative(2, &g.ks);
        let u4 = u.derivative(4, &g.ks);
        let u1u = BlochFn {
            period: ctx.x_period,
            m: u.m,
            p: (0..n).map(|j| u1v[j] * u.p[j]).collect(),
        };
        let u1u_d = u1u.derivative(1, &g.ks);
        let forcing = BlochFn {
            period: ctx.x_period,
            m: u.m,
            p: (0..n)
                .map(|j| u1u_d.p[j] + u2.p[j] + u4.p[j])
                .collect(),
        };
        let primal = -forcing.inner(v) / u.inner(v);
        (im, primal)
    } else {
        (0.0, Complex64::new(re, 0.0))
    };
    Ok(Lambda1Sample {
        band: *band,
        re_pairing: re,
        im_pairing: im,
        primal,
        denominator_rel: denom_rel,
        residual: pair.residual,
        residual_floor: pair.residual_floor,
        grid_size: n,
    })
}

/// Adaptive evaluation: double the grid until Re lambda_1 stabilizes and the
/// eigenfunction residual is resolved.
/// Grid-doubling control. A sample is accepted once Re lambda_1 has
/// stabilized between consecutive grids and the better of the two residuals
/// clears the structural ceiling: a wrong branch pairing or integrand
/// variant gives residuals of order one, whereas a resolved sample bottoms
/// out at the roundoff floor of the spectral derivatives (which grows like
/// (pi n/X)^3 eps, so past the floor the residual rises again with n; the
/// smaller-residual grid is the one reported).
pub fn lambda1_adaptive(
    ctx: &WaveContext,
    corr: &Correctors,
    eta: f64,
    branch: Branch,
    tol: f64,
    n_max: usize,
) -> Result<Lambda1Sample> {
    const STRUCTURAL_CEILING: f64 = 1e-3;
    let band = band_sample(ctx, eta, branch)?;
    let mut n = 256;
    let mut prev: Option<Lambda1Sample> = None;
    let mut last_residual = f64::INFINITY;
    while n <= n_max {
        let sample = lambda1_at(ctx, &band, n, None)?;
        last_residual = sample.residual;
        if let Some(p) = &prev {
            let stabilized =
                (sample.re_pairing - p.re_pairing).abs() <= tol * sample.re_pairing.abs().max(1.0);
            if stabilized && sample.residual.min(p.residual) < STRUCTURAL_CEILING {
                let use_n = if sample.residual <= p.residual { n } else { n / 2 };
                let u1 = ctx.u1_at(corr, use_n);
                return lambda1_at(ctx, &band, use_n, Some(&u1));
            }
        }
        prev = Some(sample);
        n *= 2;
    }
    Err(Error::numerical(
        "lambda1_adaptive",
        format!("unresolved at n = {n_max} (residual {last_residual:.2e}) for eta = {eta}"),
    ))
}

/// The surviving O(delta) eigenvalue slope at the origin (the third root of
/// the dispersion relation at xi = 0), gauge-invariant form:
///
///   lambda_1 = -<(U1 v2)' + v2'' + v2''''; U0>
///            / (<v2, U0> - <1, U0> <v2, 1>/X).
///
/// The denominator reduces to <v2, U0> in the zero-mean gauge; written this
/// way the value is independent of the Galilean offset.
pub fn lambda1_origin(corr: &Correctors) -> Result<f64> {
    let v2 = &corr.v2;
    let u0 = &corr.grids.u0;
    let x = u0.period();
    let u1v2 = corr.u1.mul(v2);
    let numerator = u1v2
        .derivative(1)
        .inner(u0)
        + v2.derivative(2).inner(u0)
        + v2.derivative(4).inner(u0);
    let denominator = v2.inner(u0) - u0.mean() * v2.mean() * x;
    if denominator.abs() < 1e-12 * v2.norm_l2() * u0.norm_l2() {
        return Err(Error::numerical("lambda1_origin", "<v2, U0> within tolerance of 0"));
    }
    Ok(-numerator / denominator)
}

// ---------------------------------------------------------------------------
// The stability index and the stability band
// ---------------------------------------------------------------------------

/// Sweep resolution controls.
#[derive(Clone, Copy, Debug)]
pub struct IndexResolution {
    /// Points on the bounded band [eta2, eta3].
    pub n_mid: usize,
    /// Points on the unbounded band below eta1.
    pub n_low: usize,
    /// Extra points on the far tail via the tangent map.
    pub n_tail: usize,
    /// Depth of the unbounded sweep before the tail map takes over.
    pub tail_start: f64,
    /// Relative band-edge exclusion radius (times eta3 - eta2).
    pub edge_exclusion: f64,
    /// Stop refining when the max moves less than this.
    pub target: f64,
    /// Per-sample adaptive tolerance on Re lambda_1.
    pub sample_tol: f64,
    /// Per-sample grid cap.
    pub n_max: usize,
}

impl Default for IndexResolution {
    fn default() -> Self {
        IndexResolution {
            n_mid: 400,
            n_low: 400,
            n_tail: 40,
            tail_start: 50.0,
            edge_exclusion: 1e-4,
            target: 1e-4,
            sample_tol: 1e-7,
            n_max: 8192,
        }
    }
}

/// The stability index at period X.
#[derive(Clone, Debug)]
pub struct StabilityIndex {
    pub x: f64,
    pub k: f64,
    /// max over band samples, the origin slope and the edge slopes.
    pub ind: f64,
    /// eta attaining the band maximum.
    pub argmax_eta: f64,
    /// Re lambda_1 maximum over band samples alone.
    pub band_max: f64,
    /// The origin eigenvalue slope.
    pub origin_lambda1: f64,
    /// Edge limits of the band curves (the Lemma branch slopes), from the
    /// modulation data with gamma = -origin_lambda1.
    pub edge_slopes: [f64; 3],
    pub subchar: SubcharReport,
    /// Largest |re_pairing - Re primal| over valid samples.
    pub max_route_disagreement: f64,
    /// Largest |Im lambda_1| over valid samples.
    pub max_im_lambda1: f64,
    pub samples: usize,
    pub invalid_fraction: f64,
}

/// Geometric grid of fractions in [lo, hi] (log-spaced).
fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1).max(1) as f64))
        .collect()
}

/// Compute the stability index by sweeping both bands, with local
/// refinement around the maximizer until it stabilizes.
pub fn stability_index(x: f64, res: &IndexResolution) -> Result<StabilityIndex> {
    let k = modulus_from_period(x)?;
    let modulus = EllipticModulus::new_admissible(k)?;
    let corr = correctors(modulus, 256)?;
    let origin = lambda1_origin(&corr)?;
    let subchar = subchar_report_at_modulus(k, x)?;
    let edge_slopes = branch_slopes(&subchar, -origin);
    let ctx = WaveContext::new(modulus)?;
    let (e1, e2, e3) = band_edges(modulus);
    let width = e3 - e2;
    let k = modulus.k();
    let kc = modulus.kc();
    let big_k = ctx.big_k;

    // Resolvability radii per edge: the xi-integrand develops a near-pole of
    // width sqrt(distance)/(k [kc]) in y; the grid cap res.n_max bounds how
    // close to an edge the eigenfunctions can be resolved. Inside these
    // radii the lambda0 -> 0 regime is represented by the origin slope and
    // the edge-slope coefficients instead of by samples.
    let margin = 20.0;
    let resolve_left_band = (margin * 2.0 * big_k * k / res.n_max as f64).powi(2);
    let resolve_mid_left =
        (margin * 2.0 * big_k * k * kc / res.n_max as f64).powi(2) / width;
    let t_lo = (res.edge_exclusion * width).max(resolve_left_band);
    let f2_lo = res.edge_exclusion.max(resolve_mid_left);
    let f3_lo = res.edge_exclusion;

    let mut etas: Vec<f64> = Vec::new();
    // Bounded band, log-graded toward both edges. For large periods the
    // band collapses (width = 1 - k^2 -> 0) and every eigenvalue on it sits
    // in the near-origin regime already covered by the edge slopes, so it
    // is only swept while it is wide enough to resolve.
    if width > 1e-3 {
        let half = res.n_mid / 2;
        if f2_lo < 0.5 {
            for f in log_grid(f2_lo, 0.5, half) {
                etas.push(e2 + f * width);
            }
        }
        for f in log_grid(f3_lo, 0.5, half) {
            etas.push(e3 - f * width);
        }
    }
    // unbounded band: log-graded away from eta1, then the tangent tail
    for t in log_grid(t_lo, res.tail_start, res.n_low) {
        etas.push(e1 - t);
    }
    let theta0 = res.tail_start.atan();
    for i in 1..=res.n_tail {
        let theta = theta0
            + (std::f64::consts::FRAC_PI_2 - 1e-3 - theta0) * i as f64 / res.n_tail as f64;
        etas.push(e1 - theta.tan());
    }

    let eval = |eta: f64| -> Option<Lambda1Sample> {
        lambda1_adaptive(&ctx, &corr, eta, Branch::Plus, res.sample_tol, res.n_max).ok()
    };
    let results: Vec<(f64, Option<Lambda1Sample>)> =
        etas.par_iter().map(|&eta| (eta, eval(eta))).collect();

    // A failed sample near the resolvability radius of an edge reflects the
    // deliberately unresolved lambda0 -> 0 regime; it is excluded by design,
    // not invalid.
    let edge_zone = |eta: f64| {
        (eta - e2).abs() < 6.0 * f2_lo * width
            || (e3 - eta).abs() < 6.0 * f3_lo * width
            || (e1 - eta).abs() < 6.0 * t_lo
    };
    let mut total = 0usize;
    let mut failures = 0usize;
    let mut valid: Vec<(f64, Lambda1Sample)> = Vec::new();
    for (eta, s) in results {
        match s {
            Some(s) => {
                total += 1;
                valid.push((eta, s));
            }
            None if edge_zone(eta) => {}
            None => {
                total += 1;
                failures += 1;
            }
        }
    }
    let invalid_fraction = failures as f64 / total.max(1) as f64;
    if invalid_fraction > 0.05 {
        return Err(Error::numerical(
            "stability_index",
            format!("{:.1}% of band samples invalid", 100.0 * invalid_fraction),
        ));
    }
    valid.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut best = valid
        .iter()
        .map(|(_, s)| (s.re_pairing, s.band.eta))
        .fold((f64::MIN, 0.0), |acc, v| if v.0 > acc.0 { v } else { acc });

    // local refinement around the maximizer between its sweep neighbours
    let mut sampled = valid.clone();
    for _round in 0..8 {
        let idx = sampled
            .iter()
            .position(|(_, s)| s.band.eta == best.1)
            .unwrap_or(0);
        let span = 1e-3 * width;
        let lo = if idx > 0 { sampled[idx - 1].0 } else { best.1 - span };
        let hi = if idx + 1 < sampled.len() {
            sampled[idx + 1].0
        } else {
            best.1 + span
        };
        let locals: Vec<f64> = (1..=10)
            .map(|i| lo + (hi - lo) * i as f64 / 11.0)
            .filter(|e| sampled.iter().all(|(x, _)| (x - e).abs() > 1e-14))
            .collect();
        let refined: Vec<(f64, Option<Lambda1Sample>)> =
            locals.par_iter().map(|&eta| (eta, eval(eta))).collect();
        let mut improved = best;
        for (eta, s) in refined.into_iter() {
            if let Some(s) = s {
                if s.re_pairing > improved.0 {
                    improved = (s.re_pairing, eta);
                }
                sampled.push((eta, s));
            }
        }
        sampled.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if improved.0 - best.0 <= res.target {
            best = improved;
            break;
        }
        best = improved;
    }

    // conjugation symmetry: the minus branch must reproduce Re lambda_1
    // (checked on a handful of spread-out samples per period)
    let stride = (sampled.len() / 5).max(1);
    for (eta, plus) in sampled.iter().step_by(stride).take(5) {
        if let Ok(minus) =
            lambda1_adaptive(&ctx, &corr, *eta, Branch::Minus, res.sample_tol, res.n_max)
        {
            if (minus.re_pairing - plus.re_pairing).abs()
                > 1e-6 * plus.re_pairing.abs().max(1.0)
            {
                return Err(Error::numerical(
                    "stability_index",
                    format!(
                        "conjugation symmetry violated at eta = {eta}: {} vs {}",
                        plus.re_pairing, minus.re_pairing
                    ),
                ));
            }
        }
    }

    let max_route_disagreement = sampled
        .iter()
        .map(|(_, s)| (s.re_pairing - s.primal.re).abs())
        .fold(0.0, f64::max);
    let max_im_lambda1 = sampled
        .iter()
        .map(|(_, s)| s.im_pairing.abs().max(s.primal.im.abs()))
        .fold(0.0, f64::max);

    let band_max = best.0;
    let ind = band_max
        .max(origin)
        .max(edge_slopes[0])
        .max(edge_slopes[1])
        .max(edge_slopes[2]);
    Ok(StabilityIndex {
        x,
        k,
        ind,
        argmax_eta: best.1,
        band_max,
        origin_lambda1: origin,
        edge_slopes,
        subchar,
        max_route_disagreement,
        max_im_lambda1,
        samples: sampled.len(),
        invalid_fraction,
    })
}

/// Locate the zeros of Ind on the two bracketing intervals
/// [2 pi + 0.1, 12] (lower boundary) and [20, 30] (upper boundary),
/// each by bisection to |dX| <= 1e-3.
pub fn find_boundaries(res: &IndexResolution) -> Result<(f64, f64)> {
    let lower = bisect_index_zero(2.0 * std::f64::consts::PI + 0.1, 12.0, res)?;
    let upper = bisect_index_zero(20.0, 30.0, res)?;
    Ok((lower, upper))
}

fn bisect_index_zero(mut lo: f64, mut hi: f64, res: &IndexResolution) -> Result<f64> {
    let f_lo = stability_index(lo, res)?.ind;
    let f_hi = stability_index(hi, res)?.ind;
    if !(f_lo > 0.0 && f_hi < 0.0 || f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::numerical(
            "find_boundaries",
            format!("no sign change: Ind({lo:.2}) = {f_lo:.3e}, Ind({hi:.2}) = {f_hi:.3e}"),
        ));
    }
    let lo_positive = f_lo > 0.0;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        let v = stability_index(mid, res)?.ind;
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Find a band point on the unbounded band whose reduced Bloch parameter
/// equals `xi_target`, preferring the crossing with |lambda0| inside the
/// given window. Used by the Hill consistency check.
pub fn band_point_at_xi(
    ctx: &WaveContext,
    xi_target: f64,
    lambda_window: (f64, f64),
) -> Result<BandPoint> {
    let (e1, _, _) = band_edges(ctx.params.modulus);
    let mut prev: Option<(f64, f64)> = None;
    let ts = log_grid(1e-4, 400.0, 4000);
    for &t in &ts {
        let b = band_sample(ctx, e1 - t, Branch::Plus)?;
        let g = b.xi - xi_target;
        if let Some((tp, gp)) = prev {
            if gp.signum() != g.signum() && (b.xi_raw - xi_target).abs() < 2.0 {
                // refine by bisection on t (xi_raw is continuous in t)
                let (mut a, mut bb) = (tp, t);
                for _ in 0..80 {
                    let mid = 0.5 * (a + bb);
                    let s = band_sample(ctx, e1 - mid, Branch::Plus)?;
                    if (s.xi - xi_target).signum() == gp.signum() {
                        a = mid;
                    } else {
                        bb = mid;
                    }
                }
                let found = band_sample(ctx, e1 - 0.5 * (a + bb), Branch::Plus)?;
                let mag = found.lambda0.norm();
                if mag >= lambda_window.0 && mag <= lambda_window.1 {
                    return Ok(found);
                }
            }
        }
        prev = Some((t, g));
    }
    Err(Error::numerical(
        "band_point_at_xi",
        format!("no band point with xi = {xi_target} in the lambda window"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::whitham::KPrimeReading;

    fn ctx_for_period(x: f64) -> (WaveContext, Correctors) {
        let k = modulus_from_period(x).unwrap();
        let m = EllipticModulus::new(k).unwrap();
        (
            WaveContext::new(m).unwrap(),
            correctors(m, 256).unwrap(),
        )
    }

    #[test]
    fn band_edges_give_zero_lambda() {
        let (ctx, _) = ctx_for_period(13.0);
        let (e1, e2, e3) = band_edges(ctx.params.modulus);
        // exactly at edges the sample is rejected
        assert!(band_sample(&ctx, e1, Branch::Plus).is_err());
        assert!(band_sample(&ctx, e2, Branch::Plus).is_err());
        assert!(band_sample(&ctx, e3, Branch::Plus).is_err());
        // approaching an edge, lambda0 -> 0
        let b = band_sample(&ctx, e3 - 1e-10 * (e3 - e2), Branch::Plus).unwrap();
        assert!(b.lambda0.norm() < 1e-4);
    }

    #[test]
    fn eigenfunction_satisfies_ode_and_bloch_identity() {
        let (ctx, _) = ctx_for_period(13.0);
        let (_, e2, e3) = band_edges(ctx.params.modulus);
        let band = band_sample(&ctx, e2 + 0.4 * (e3 - e2), Branch::Plus).unwrap();
        let pair = eigenfunction_pair(&ctx, &band, 512).unwrap();
        assert!(pair.residual <= 1e-7, "ODE residual {}", pair.residual);
        assert!(pair.xi_consistency < 1e-8, "xi consistency {}", pair.xi_consistency);
        // v' = (e^{i xi X} - 1) u on the grid
        let g = ctx.grids(512);
        let v1 = pair.v_hat.derivative(1, &g.ks);
        let theta = pair.u_hat.m.im * ctx.x_period;
        let mu = Complex64::new(0.0, 2.0 * (0.5 * theta).sin())
            * Complex64::new(0.0, 0.5 * theta).exp();
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..512 {
            err += (v1.p[j] - mu * pair.u_hat.p[j]).norm_sqr();
            scale += (mu * pair.u_hat.p[j]).norm_sqr();
        }
        assert!((err / scale).sqrt() <= 1e-8);
        // |u| is X-periodic by construction: p periodic and |e^{m x}| = 1
        assert!(pair.u_hat.m.re.abs() < 1e-12);
    }

    #[test]
    fn lambda1_routes_agree_and_im_vanishes() {
        let (ctx, corr) = ctx_for_period(13.0);
        let (e1, e2, e3) = band_edges(ctx.params.modulus);
        for eta in [e2 + 0.3 * (e3 - e2), e1 - 0.05, e1 - 1.7] {
            let s = lambda1_adaptive(&ctx, &corr, eta, Branch::Plus, 1e-8, 8192).unwrap();
            assert!(
                (s.re_pairing - s.primal.re).abs() <= 1e-8 * s.re_pairing.abs().max(1.0),
                "route disagreement {} at eta={eta}",
                (s.re_pairing - s.primal.re).abs()
            );
            assert!(s.im_pairing.abs() <= 1e-6, "Im lambda1 = {}", s.im_pairing);
            assert!(s.re_pairing < 0.0, "Re lambda1 = {} at eta={eta} (X=13)", s.re_pairing);
        }
    }

    #[test]
    fn minus_branch_is_conjugate() {
        let (ctx, corr) = ctx_for_period(13.0);
        let (_, e2, e3) = band_edges(ctx.params.modulus);
        let eta = e2 + 0.35 * (e3 - e2);
        let plus = lambda1_adaptive(&ctx, &corr, eta, Branch::Plus, 1e-8, 4096).unwrap();
        let minus = lambda1_adaptive(&ctx, &corr, eta, Branch::Minus, 1e-8, 4096).unwrap();
        // lambda(-xi) = conj(lambda(xi))
        assert!((plus.band.lambda0.conj() - minus.band.lambda0).norm() < 1e-12);
        assert!((plus.band.xi + minus.band.xi).abs() < 1e-10);
        assert!((plus.re_pairing - minus.re_pairing).abs() < 1e-8);
    }

    #[test]
    fn origin_slope_sign_agrees_with_relaxation_rate() {
        for &x in &[7.0, 9.0, 13.0, 21.0, 28.0] {
            let k = modulus_from_period(x).unwrap();
            let m = EllipticModulus::new(k).unwrap();
            let corr = correctors(m, 256).unwrap();
            let l1 = lambda1_origin(&corr).unwrap();
            let ls =
                crate::whitham::homogeneous_relaxation_rate(m, KPrimeReading::DerivativeInK)
                    .unwrap();
            assert!(
                l1.signum() == ls.signum(),
                "sign mismatch at X={x}: lambda1_origin={l1}, lambda_*={ls}"
            );
        }
    }

    #[test]
    fn origin_slope_is_gauge_invariant() {
        // the formula is u0-independent by construction; check the pieces
        // by recomputing with a shifted profile mean via the raw ratio
        let k = modulus_from_period(11.0).unwrap();
        let m = EllipticModulus::new(k).unwrap();
        let corr = correctors(m, 256).unwrap();
        let l1 = lambda1_origin(&corr).unwrap();
        // shifted-gauge evaluation: N/(P - Q mbar) with U0 -> U0 + s
        let s = 0.83;
        let u0s = corr.grids.u0.map(|v| v + s);
        let num = corr.u1.mul(&corr.v2).derivative(1).inner(&u0s)
            + corr.v2.derivative(2).inner(&u0s)
            + corr.v2.derivative(4).inner(&u0s);
        let den = corr.v2.inner(&u0s) - u0s.mean() * corr.v2.mean() * u0s.period();
        let l1_shifted = -num / den;
        assert!((l1 - l1_shifted).abs() < 1e-9 * l1.abs());
    }

    #[test]
    fn index_is_negative_inside_band_positive_outside() {
        let res = IndexResolution {
            n_mid: 120,
            n_low: 120,
            n_tail: 10,
            ..IndexResolution::default()
        };
        let stable = stability_index(13.0, &res).unwrap();
        assert!(stable.ind < 0.0, "Ind(13) = {} >= 0", stable.ind);
        let unstable = stability_index(7.0, &res).unwrap();
        assert!(unstable.ind > 0.0, "Ind(7) = {} <= 0", unstable.ind);
        let upper = stability_index(28.0, &res).unwrap();
        assert!(upper.ind > 0.0, "Ind(28) = {} <= 0", upper.ind);
    }
}
