//! Cnoidal travelling waves of the KdV equation
//!   u_t + u u_x + u_xxx = 0:
//! profile evaluation, the root/Riemann-invariant parameterizations, and
//! period averages.
//!
//! Canonical parameterization: U0(x) = u0 + 12 k^2 kappa^2 cn^2(kappa x, k)
//! with wave speed c0 = u0 + (8 k^2 - 4) kappa^2 and period X = 2 K(k)/kappa.
//! The underlying nonlinear-oscillator roots u1 <= u2 <= u3 of the profile
//! ODE's cubic satisfy u2 = u0, u3 - u2 = 12 k^2 kappa^2 and
//! u3 - u1 = 12 kappa^2 (so kappa = sqrt((u3-u1)/12)). The physical
//! wavenumber is 2 pi / X; conversions between the two conventions are
//! explicit, never implicit.

use crate::elliptic::{complete_elliptic, jacobi_sn_cn_dn, kc2_k_minus_e, EllipticModulus};
use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;

/// Canonical cnoidal-wave parameters.
#[derive(Clone, Copy, Debug)]
pub struct WaveParams {
    pub modulus: EllipticModulus,
    /// Canonical wavenumber scale kappa (period X = 2K/kappa).
    pub kappa: f64,
    /// Galilean offset u0 (the profile minimum).
    pub u0: f64,
}

impl WaveParams {
    pub fn new(modulus: EllipticModulus, kappa: f64, u0: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::domain("kappa", kappa, "(0, inf)"));
        }
        Ok(WaveParams { modulus, kappa, u0 })
    }

    /// Period X = 2 K(k) / kappa.
    pub fn period(&self) -> f64 {
        2.0 * complete_elliptic(self.modulus).big_k / self.kappa
    }

    /// Wave speed c0 = u0 + (8 k^2 - 4) kappa^2.
    pub fn speed(&self) -> f64 {
        self.u0 + (8.0 * self.modulus.m() - 4.0) * self.kappa * self.kappa
    }

    /// Physical wavenumber 2 pi / X = pi kappa / K(k).
    pub fn wavenumber_2pi(&self) -> f64 {
        std::f64::consts::PI * self.kappa / complete_elliptic(self.modulus).big_k
    }

    /// Profile amplitude 12 k^2 kappa^2 = max U0 - min U0.
    pub fn amplitude(&self) -> f64 {
        12.0 * self.modulus.m() * self.kappa * self.kappa
    }

    /// Profile value at a point.
    pub fn eval(&self, x: f64) -> f64 {
        let (_, cn, _) = jacobi_sn_cn_dn(self.kappa * x, self.modulus);
        self.u0 + self.amplitude() * cn * cn
    }

    /// Galilean shift u0 -> u0 + s (speed and mean shift by s; k, kappa fixed).
    pub fn shifted(&self, s: f64) -> WaveParams {
        WaveParams {
            u0: self.u0 + s,
            ..*self
        }
    }

    /// Integration constant `a` of the once-integrated profile ODE
    /// U'' + U^2/2 - c U = a.
    pub fn ode_constant_a(&self) -> f64 {
        let r = self.roots();
        -(r.u1 * r.u2 + r.u1 * r.u3 + r.u2 * r.u3) / 6.0
    }

    /// Second integration constant `q` ((U')^2/2 = q - W(U)).
    pub fn ode_constant_q(&self) -> f64 {
        let r = self.roots();
        r.u1 * r.u2 * r.u3 / 6.0
    }

    pub fn roots(&self) -> RootTriple {
        let k2 = self.modulus.m();
        let kap2 = self.kappa * self.kappa;
        RootTriple {
            u1: self.u0 + 12.0 * (k2 - 1.0) * kap2,
            u2: self.u0,
            u3: self.u0 + 12.0 * k2 * kap2,
        }
    }

    pub fn riemann_invariants(&self) -> RiemannInvariants {
        self.roots().riemann_invariants()
    }
}

/// Roots u1 <= u2 <= u3 of the profile cubic q - W(u; a, c).
#[derive(Clone, Copy, Debug)]
pub struct RootTriple {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl RootTriple {
    pub fn new(u1: f64, u2: f64, u3: f64) -> Result<Self> {
        if !(u1 <= u2 && u2 <= u3) {
            return Err(Error::domain("roots", u1, "u1 <= u2 <= u3"));
        }
        Ok(RootTriple { u1, u2, u3 })
    }

    /// Wave speed c = (u1+u2+u3)/3.
    pub fn speed(&self) -> f64 {
        (self.u1 + self.u2 + self.u3) / 3.0
    }

    /// Convert to canonical parameters; rejects degenerate triples.
    pub fn wave_params(&self) -> Result<WaveParams> {
        let span = self.u3 - self.u1;
        let upper = self.u3 - self.u2;
        if span <= 0.0 || upper <= 0.0 && self.u2 - self.u1 <= 0.0 {
            return Err(Error::DegenerateWave("u1 = u2 = u3: constant state"));
        }
        let m = upper / span;
        if m >= 1.0 - 1e-14 {
            return Err(Error::DegenerateWave("u1 = u2: solitary-wave limit (k -> 1)"));
        }
        if m <= 1e-14 {
            return Err(Error::DegenerateWave("u2 = u3: constant limit (k -> 0)"));
        }
        let modulus = EllipticModulus::new(m.sqrt())?;
        WaveParams::new(modulus, (span / 12.0).sqrt(), self.u2)
    }

    pub fn riemann_invariants(&self) -> RiemannInvariants {
        RiemannInvariants {
            w1: 0.5 * (self.u1 + self.u2),
            w2: 0.5 * (self.u1 + self.u3),
            w3: 0.5 * (self.u2 + self.u3),
        }
    }

    /// The cubic's coefficients (a, q, c) with q - W(u) = (u-u1)(u-u2)(u3-u)/6.
    pub fn ode_constants(&self) -> (f64, f64, f64) {
        (
            -(self.u1 * self.u2 + self.u1 * self.u3 + self.u2 * self.u3) / 6.0,
            self.u1 * self.u2 * self.u3 / 6.0,
            self.speed(),
        )
    }
}

/// Riemann invariants w1 <= w2 <= w3 of the KdV Whitham system.
#[derive(Clone, Copy, Debug)]
pub struct RiemannInvariants {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl RiemannInvariants {
    pub fn roots(&self) -> RootTriple {
        RootTriple {
            u1: self.w1 + self.w2 - self.w3,
            u2: self.w1 - self.w2 + self.w3,
            u3: -self.w1 + self.w2 + self.w3,
        }
    }
}

/// Profile samples U0 and its first four derivatives on an n-point grid.
pub struct ProfileGrids {
    pub u0: PeriodicGrid,
    pub d1: PeriodicGrid,
    pub d2: PeriodicGrid,
    pub d3: PeriodicGrid,
    pub d4: PeriodicGrid,
}

/// Sample the profile and its first four derivatives, all by the exact
/// cn^2 chain-rule expressions (spectral differentiation of the sampled
/// profile agrees and is checked in the tests).
pub fn profile(params: &WaveParams, n: usize) -> Result<ProfileGrids> {
    let x_period = params.period();
    let k2 = params.modulus.m();
    let amp = params.amplitude();
    let kap = params.kappa;

    let mut v0 = Vec::with_capacity(n);
    let mut v1 = Vec::with_capacity(n);
    let mut v2 = Vec::with_capacity(n);
    let mut v3 = Vec::with_capacity(n);
    let mut v4 = Vec::with_capacity(n);
    for j in 0..n {
        let x = j as f64 * x_period / n as f64;
        let (s, c, d) = jacobi_sn_cn_dn(kap * x, params.modulus);
        let cc = c * c;
        // y-derivatives of C = cn^2(y):
        //   C'   = -2 s c d
        //   C''  = 2(1-k^2) - (4-8k^2) C - 6 k^2 C^2
        //   C''' = (-(4-8k^2) - 12 k^2 C) C'
        //   C'''' = -12 k^2 C'^2 + (-(4-8k^2) - 12 k^2 C) C''
        let c1 = -2.0 * s * c * d;
        let c2 = 2.0 * (1.0 - k2) - (4.0 - 8.0 * k2) * cc - 6.0 * k2 * cc * cc;
        let p1 = -(4.0 - 8.0 * k2) - 12.0 * k2 * cc;
        let c3 = p1 * c1;
        let c4 = -12.0 * k2 * c1 * c1 + p1 * c2;
        v0.push(params.u0 + amp * cc);
        v1.push(amp * kap * c1);
        v2.push(amp * kap * kap * c2);
        v3.push(amp * kap * kap * kap * c3);
        v4.push(amp * kap * kap * kap * kap * c4);
    }
    Ok(ProfileGrids {
        u0: PeriodicGrid::from_values(x_period, v0)?,
        d1: PeriodicGrid::from_values(x_period, v1)?,
        d2: PeriodicGrid::from_values(x_period, v2)?,
        d3: PeriodicGrid::from_values(x_period, v3)?,
        d4: PeriodicGrid::from_values(x_period, v4)?,
    })
}

/// Period averages of the wave.
#[derive(Clone, Copy, Debug)]
pub struct WaveAverages {
    /// <U> by quadrature.
    pub mean: f64,
    /// <U> by the closed form u1 + (u3-u1) E/K.
    pub mean_closed: f64,
    /// <U^2/2> by quadrature.
    pub half_square: f64,
    /// <U^2/2> by the closed form c <U> + a.
    pub half_square_closed: f64,
    /// <(U')^2> by quadrature.
    pub deriv_sq: f64,
    /// <(U'')^2> by quadrature.
    pub deriv2_sq: f64,
}

/// Closed form of the profile mean: <U> = u1 + (u3 - u1) E/K, with the
/// modulus-uniform combination (E - (1-k^2)K)/K used near k -> 0.
pub fn mean_closed_form(params: &WaveParams) -> f64 {
    let pair = complete_elliptic(params.modulus);
    // u0 + 12 kappa^2 (E - (1-k^2) K)/K
    params.u0 - 12.0 * params.kappa * params.kappa * kc2_k_minus_e(params.modulus) / pair.big_k
}

/// Period averages by spectrally accurate quadrature, with the closed forms
/// returned alongside for cross-checking.
pub fn averages(params: &WaveParams, n: usize) -> Result<WaveAverages> {
    let grids = profile(params, n)?;
    let mean = grids.u0.mean();
    let half_square = 0.5 * grids.u0.mul(&grids.u0).mean();
    let deriv_sq = grids.d1.mul(&grids.d1).mean();
    let deriv2_sq = grids.d2.mul(&grids.d2).mean();
    Ok(WaveAverages {
        mean,
        mean_closed: mean_closed_form(params),
        half_square,
        half_square_closed: params.speed() * mean_closed_form(params) + params.ode_constant_a(),
        deriv_sq,
        deriv2_sq,
    })
}
