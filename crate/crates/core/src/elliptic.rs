//! Complete elliptic integrals, Jacobi elliptic functions, Jacobi theta
//! functions and Weierstrass functions.
//!
//! K and E are computed by arithmetic-geometric-mean iteration (quadratic
//! convergence, uniform accuracy in the modulus); the defining integrals are
//! kept only as a quadrature oracle in the tests. Near k -> 1 the standard
//! logarithmic asymptotics in the complementary modulus take over, and near
//! k -> 0 the cancellation-prone combinations K - E and (1-k^2)K - E switch
//! to exact rational series (see `series`).

use crate::error::{Error, Result};
use crate::series::{SmallKSeries, SMALL_K};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Elliptic modulus k in [0, 1) together with its complementary modulus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticModulus {
    k: f64,
    kc: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::domain("k", k, "[0, 1)"));
        }
        // kc = sqrt(1-k^2) via the stable product form
        let kc = ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(EllipticModulus { k, kc })
    }

    /// Admissible modulus range for the wave-train analysis.
    pub const ADMISSIBLE: (f64, f64) = (1e-8, 1.0 - 1e-7);

    pub fn new_admissible(k: f64) -> Result<Self> {
        if !(Self::ADMISSIBLE.0..=Self::ADMISSIBLE.1).contains(&k) {
            return Err(Error::domain("k", k, "[1e-8, 1 - 1e-7]"));
        }
        Self::new(k)
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    #[inline]
    pub fn kc(&self) -> f64 {
        self.kc
    }

    #[inline]
    pub fn m(&self) -> f64 {
        self.k * self.k
    }
}

/// The pair (K(k), E(k)) of complete elliptic integrals.
#[derive(Clone, Copy, Debug)]
pub struct EllipticPair {
    pub big_k: f64,
    pub big_e: f64,
}

/// Complementary-modulus threshold below which the log asymptotics are used.
const KC_ASYMPTOTIC: f64 = 1e-7;

/// Complete elliptic integrals of the first and second kind.
pub fn complete_elliptic(modulus: EllipticModulus) -> EllipticPair {
    let k = modulus.k;
    let kc = modulus.kc;
    if kc < KC_ASYMPTOTIC {
        // K = ln(4/kc) + (kc^2/4)(ln(4/kc) - 1) + O(kc^4 ln),
        // E = 1 + (kc^2/2)(ln(4/kc) - 1/2) + O(kc^4 ln).
        let l = (4.0 / kc).ln();
        return EllipticPair {
            big_k: l + 0.25 * kc * kc * (l - 1.0),
            big_e: 1.0 + 0.5 * kc * kc * (l - 0.5),
        };
    }
    // AGM with c_n bookkeeping for E.
    let mut a = 1.0_f64;
    let mut b = kc;
    let mut c = k;
    let mut sum = 0.5 * c * c;
    let mut pow2 = 1.0;
    for _ in 0..40 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow2 *= 2.0;
        sum += 0.5 * pow2 * c * c;
        if c.abs() < 1e-17 * a {
            break;
        }
    }
    let big_k = 0.5 * PI / a;
    EllipticPair {
        big_k,
        big_e: big_k * (1.0 - sum),
    }
}

/// K(k) - E(k), evaluated without cancellation for small k.
pub fn k_minus_e(modulus: EllipticModulus) -> f64 {
    if modulus.k < SMALL_K {
        SmallKSeries::shared().k_minus_e(modulus.k)
    } else {
        let p = complete_elliptic(modulus);
        p.big_k - p.big_e
    }
}

/// (1-k^2) K(k) - E(k), evaluated without cancellation for small k.
///
/// This combination is strictly negative on (0, 1); it appears as the
/// denominator of the second Whitham characteristic coefficient.
pub fn kc2_k_minus_e(modulus: EllipticModulus) -> f64 {
    if modulus.k < SMALL_K {
        SmallKSeries::shared().kc2_k_minus_e(modulus.k)
    } else {
        let p = complete_elliptic(modulus);
        (1.0 - modulus.m()) * p.big_k - p.big_e
    }
}

/// Analytic derivatives (dK/dk, dE/dk).
///
/// dK/dk = (E - (1-k^2)K)/(k(1-k^2)), dE/dk = (E - K)/k. Both are routed
/// through the cancellation-free combinations so they stay accurate as k -> 0.
pub fn elliptic_derivatives(modulus: EllipticModulus) -> Result<(f64, f64)> {
    let k = modulus.k;
    if k == 0.0 {
        return Err(Error::domain("k", k, "(0, 1) for derivative identities"));
    }
    let kc2 = modulus.kc * modulus.kc;
    let dk = -kc2_k_minus_e(modulus) / (k * kc2);
    let de = -k_minus_e(modulus) / k;
    Ok((dk, de))
}

/// Jacobi elliptic functions sn(u,k), cn(u,k), dn(u,k) for real argument.
///
/// Descending Landen transformation (AGM ladder); accuracy ~1e-15 over the
/// admissible modulus range.
pub fn jacobi_sn_cn_dn(u: f64, modulus: EllipticModulus) -> (f64, f64, f64) {
    let m = modulus.m();
    if m < 1e-14 {
        // Degenerate modulus: circular functions plus the first Landen
        // correction, which keeps the identity tests honest at tiny k.
        let (s, c) = u.sin_cos();
        let sn = s - 0.25 * m * (u - s * c) * c;
        let cn = c + 0.25 * m * (u - s * c) * s;
        let dn = 1.0 - 0.5 * m * s * s;
        return (sn, cn, dn);
    }
    let mut emc = 1.0 - m;
    let mut a = 1.0_f64;
    let mut dn;
    let mut em = [0.0_f64; 16];
    let mut en = [0.0_f64; 16];
    let mut c = 0.0;
    let mut l = 0;
    for i in 0..16 {
        l = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= 1e-8 * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let u_scaled = c * u;
    let (mut sn, mut cn) = u_scaled.sin_cos();
    dn = 1.0;
    if sn != 0.0 {
        a = cn / sn;
        c *= a;
        for i in (0..=l).rev() {
            let b = em[i];
            a *= c;
            c *= dn;
            dn = (en[i] + a) / (b + a);
            a = c / b;
        }
        a = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { a } else { -a };
        cn = c * sn;
    }
    (sn, cn, dn)
}

/// Jacobi functions for complex argument via the addition formulas
/// sn(x+iy, k) expressed through sn(x,k) and sn(y,k').
pub fn jacobi_complex(z: Complex64, modulus: EllipticModulus) -> (Complex64, Complex64, Complex64) {
    let comp = EllipticModulus::new(modulus.kc).expect("kc in [0,1)");
    let (s, c, d) = jacobi_sn_cn_dn(z.re, modulus);
    let (s1, c1, d1) = jacobi_sn_cn_dn(z.im, comp);
    let m = modulus.m();
    let den = c1 * c1 + m * s * s * s1 * s1;
    let i = Complex64::new(0.0, 1.0);
    let sn = (Complex64::new(s * d1, 0.0) + i * (c * d * s1 * c1)) / den;
    let cn = (Complex64::new(c * c1, 0.0) - i * (s * d * s1 * d1)) / den;
    let dn = (Complex64::new(d * c1 * d1, 0.0) - i * (m * s * c * s1)) / den;
    (sn, cn, dn)
}

// ---------------------------------------------------------------------------
// Theta functions
// ---------------------------------------------------------------------------

/// theta_1(v, q) = 2 sum_{j>=0} (-1)^j q^{(j+1/2)^2} sin((2j+1)v), complex v.
pub fn theta1(v: Complex64, q: f64, n_terms: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n_terms {
        let e = (j as f64 + 0.5) * (j as f64 + 0.5);
        let w = q.powf(e) * if j % 2 == 0 { 2.0 } else { -2.0 };
        acc += w * ((2 * j + 1) as f64 * v).sin();
    }
    acc
}

/// theta_2(v, q) = 2 sum_{j>=0} q^{(j+1/2)^2} cos((2j+1)v), complex v.
pub fn theta2(v: Complex64, q: f64, n_terms: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n_terms {
        let e = (j as f64 + 0.5) * (j as f64 + 0.5);
        acc += 2.0 * q.powf(e) * ((2 * j + 1) as f64 * v).cos();
    }
    acc
}

/// d/dv theta_1(v, q).
pub fn theta1_prime(v: Complex64, q: f64, n_terms: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n_terms {
        let n = (2 * j + 1) as f64;
        let e = (j as f64 + 0.5) * (j as f64 + 0.5);
        let w = q.powf(e) * if j % 2 == 0 { 2.0 } else { -2.0 };
        acc += w * n * (n * v).cos();
    }
    acc
}

fn theta1_prime0(q: f64, n_terms: usize) -> f64 {
    (0..n_terms)
        .map(|j| {
            let n = (2 * j + 1) as f64;
            let e = (j as f64 + 0.5) * (j as f64 + 0.5);
            q.powf(e) * n * if j % 2 == 0 { 2.0 } else { -2.0 }
        })
        .sum()
}

fn theta1_ppp0(q: f64, n_terms: usize) -> f64 {
    -(0..n_terms)
        .map(|j| {
            let n = (2 * j + 1) as f64;
            let e = (j as f64 + 0.5) * (j as f64 + 0.5);
            q.powf(e) * n * n * n * if j % 2 == 0 { 2.0 } else { -2.0 }
        })
        .sum::<f64>()
}

/// Number of theta-series terms needed for a tail below ~1e-16 at nome q.
pub fn theta_terms(q: f64) -> usize {
    let mut n = 3;
    while q.powf((n as f64 + 0.5) * (n as f64 + 0.5)) > 1e-18 && n < 64 {
        n += 1;
    }
    n + 1
}

/// The theta pair (Theta, Theta_1) on the 4K-periodic argument scale:
/// Theta(z) = theta_1(pi z / (2K), q0), Theta_1(z) = theta_2(pi z / (2K), q0),
/// with q0 = exp(-pi K(kc)/K(k)).
///
/// The exponent of the nome in the defining series is the standard
/// (2n-1)^2/4.
pub fn theta_functions(z: f64, modulus: EllipticModulus, n_terms: usize) -> Result<(f64, f64)> {
    let q0 = nome(modulus);
    if !(0.0..1.0).contains(&q0) {
        return Err(Error::domain("q0", q0, "[0, 1) for convergence"));
    }
    let big_k = complete_elliptic(modulus).big_k;
    let v = Complex64::new(0.5 * PI * z / big_k, 0.0);
    Ok((theta1(v, q0, n_terms).re, theta2(v, q0, n_terms).re))
}

/// Nome q0 = exp(-pi K(kc)/K(k)).
pub fn nome(modulus: EllipticModulus) -> f64 {
    let kk = complete_elliptic(modulus).big_k;
    let kkc = complete_elliptic(EllipticModulus::new(modulus.kc).expect("kc in [0,1)")).big_k;
    (-PI * kkc / kk).exp()
}

// ---------------------------------------------------------------------------
// Weierstrass functions on a rectangular lattice
// ---------------------------------------------------------------------------

/// Rectangular-lattice data for the Weierstrass functions with real
/// half-period `omega` and imaginary half-period `i omega_prime`, built from
/// a Jacobi modulus.
///
/// `lambda_w = wp(omega) - wp(i omega_prime) = e1 - e3 = (K/omega)^2` is the
/// scale factor appearing in the theta-quotient representations. (Taking the
/// second lattice value at `i omega_prime` rather than `omega + i omega_prime`
/// is what makes those representations periodic; see the module tests, which
/// check the quotients against an independent Jacobi-function route.)
#[derive(Clone, Copy, Debug)]
pub struct WeierstrassData {
    pub modulus: EllipticModulus,
    pub omega: f64,
    pub omega_prime: f64,
    pub q0: f64,
    pub e1: f64,
    pub lambda_w: f64,
}

impl WeierstrassData {
    pub fn new(modulus: EllipticModulus, omega: f64) -> Result<Self> {
        if omega <= 0.0 {
            return Err(Error::domain("omega", omega, "(0, inf)"));
        }
        let kk = complete_elliptic(modulus).big_k;
        let kkc = complete_elliptic(EllipticModulus::new(modulus.kc)?).big_k;
        let lambda_w = (kk / omega) * (kk / omega);
        Ok(WeierstrassData {
            modulus,
            omega,
            omega_prime: omega * kkc / kk,
            q0: (-PI * kkc / kk).exp(),
            e1: lambda_w * (2.0 - modulus.m()) / 3.0,
            lambda_w,
        })
    }

    /// eta1 = zeta(omega) from the standard theta identity.
    pub fn eta1(&self) -> f64 {
        let n = theta_terms(self.q0);
        -(PI * PI / (12.0 * self.omega)) * theta1_ppp0(self.q0, n) / theta1_prime0(self.q0, n)
    }

    fn reduce_to_cell(&self, z: Complex64) -> Complex64 {
        let x = z.re - (z.re / (2.0 * self.omega)).round() * 2.0 * self.omega;
        let y = z.im - (z.im / (2.0 * self.omega_prime)).round() * 2.0 * self.omega_prime;
        Complex64::new(x, y)
    }
}

/// Weierstrass (wp, zeta, sigma) at complex z via theta quotients.
///
/// wp and zeta have poles on the lattice; arguments within `pole_tol` of a
/// lattice point are rejected.
pub fn weierstrass(
    z: Complex64,
    data: &WeierstrassData,
    pole_tol: f64,
) -> Result<(Complex64, Complex64, Complex64)> {
    let zr = data.reduce_to_cell(z);
    if zr.norm() < pole_tol {
        return Err(Error::numerical(
            "weierstrass",
            format!("argument within {pole_tol:.1e} of a lattice point"),
        ));
    }
    let n = theta_terms(data.q0);
    let v = z * (0.5 * PI / data.omega);
    let t1 = theta1(v, data.q0, n);
    let t2 = theta2(v, data.q0, n);
    let t1p0 = theta1_prime0(data.q0, n);
    let t20 = theta2(Complex64::new(0.0, 0.0), data.q0, n);
    // wp - e1 = ((pi/(2 omega)) theta1'(0) theta2(v) / (theta2(0) theta1(v)))^2;
    // on the 4K-periodic argument scale the prefactor is absorbed into the
    // derivative of the rescaled theta, which is how lambda_w enters there.
    let scale = 0.5 * PI / data.omega;
    let quot = scale * t1p0 * t2 / (t20 * t1);
    let p = data.e1 + quot * quot;

    let eta1 = data.eta1();
    let zeta = z * (eta1 / data.omega) + (0.5 * PI / data.omega) * theta1_prime(v, data.q0, n) / t1;

    let sigma = (2.0 * data.omega / PI)
        * (z * z * (eta1 / (2.0 * data.omega))).exp()
        * t1
        / t1p0;
    Ok((p, zeta, sigma))
}

/// Independent route to wp via Jacobi functions:
/// wp(z) = e3 + (e1-e3)/sn^2(sqrt(e1-e3) z, k).
pub fn weierstrass_p_jacobi(z: Complex64, data: &WeierstrassData) -> Complex64 {
    let e3 = -(1.0 + data.modulus.m()) * data.lambda_w / 3.0;
    let u = z * data.lambda_w.sqrt();
    let (sn, _, _) = jacobi_complex(u, data.modulus);
    e3 + data.lambda_w / (sn * sn)
}

/// wp'(z) by the same Jacobi route.
pub fn weierstrass_p_prime_jacobi(z: Complex64, data: &WeierstrassData) -> Complex64 {
    let u = z * data.lambda_w.sqrt();
    let (sn, cn, dn) = jacobi_complex(u, data.modulus);
    -2.0 * data.lambda_w.powf(1.5) * cn * dn / (sn * sn * sn)
}

/// Lattice invariants (g2, g3) by Eisenstein q-series:
/// g2 = pi^4 E4 / (12 omega^4), g3 = pi^6 E6 / (216 omega^6).
pub fn lattice_invariants(data: &WeierstrassData) -> (f64, f64) {
    let q2 = data.q0 * data.q0;
    let mut e4 = 1.0;
    let mut e6 = 1.0;
    let mut qn = q2;
    for n in 1..200 {
        let nf = n as f64;
        let term = qn / (1.0 - qn);
        e4 += 240.0 * nf.powi(3) * term;
        e6 -= 504.0 * nf.powi(5) * term;
        qn *= q2;
        if qn < 1e-20 {
            break;
        }
    }
    let g2 = PI.powi(4) * e4 / (12.0 * data.omega.powi(4));
    let g3 = PI.powi(6) * e6 / (216.0 * data.omega.powi(6));
    (g2, g3)
}
