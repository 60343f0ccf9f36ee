//! Python bindings: the main types and operations of the stability
//! analysis, exposed as plain functions and small classes.
//!
//! Build with `cargo build -p kdvks-py --release` and import the produced
//! `libkdvks_py.so` as `kdvks_py` (see python/smoke_test.py).

use kdvks_core::cnoidal::{averages, WaveParams};
use kdvks_core::elliptic::{complete_elliptic, jacobi_sn_cn_dn, EllipticModulus};
use kdvks_core::error::Error as CoreError;
use kdvks_core::evans::{
    evans_from_monodromy, hill_spectrum, monodromy_kdv, selected_params, HillOptions,
};
use kdvks_core::perturbed::correctors;
use kdvks_core::selection::{
    modulus_from_period, period_of_modulus, selection_kappa, selection_residual,
};
use kdvks_core::spectral::{
    band_edges, band_sample, lambda1_adaptive, lambda1_origin, stability_index, Branch,
    IndexResolution, WaveContext,
};
use kdvks_core::whitham::{
    critical_period, subchar_report, BetaPair, KPrimeReading,
};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: CoreError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn modulus(k: f64) -> PyResult<EllipticModulus> {
    EllipticModulus::new(k).map_err(err)
}

/// Complete elliptic integrals (K, E) at modulus k.
#[pyfunction]
fn elliptic_ke(k: f64) -> PyResult<(f64, f64)> {
    let p = complete_elliptic(modulus(k)?);
    Ok((p.big_k, p.big_e))
}

/// Jacobi elliptic (sn, cn, dn) at (u, k).
#[pyfunction]
fn jacobi(u: f64, k: f64) -> PyResult<(f64, f64, f64)> {
    Ok(jacobi_sn_cn_dn(u, modulus(k)?))
}

/// Selected canonical wavenumber kappa(k).
#[pyfunction]
fn selected_kappa(k: f64) -> PyResult<f64> {
    selection_kappa(modulus(k)?).map_err(err)
}

/// Quadrature defect of the selection criterion at (k, kappa).
#[pyfunction]
fn selection_defect(k: f64, kappa: f64) -> PyResult<f64> {
    selection_residual(modulus(k)?, kappa, 1024).map_err(err)
}

/// Period of the selected wave at modulus k.
#[pyfunction]
fn period_of(k: f64) -> PyResult<f64> {
    period_of_modulus(k).map_err(err)
}

/// Modulus of the selected wave of period x.
#[pyfunction]
fn modulus_of_period(x: f64) -> PyResult<f64> {
    modulus_from_period(x).map_err(err)
}

/// Sampled profile data of the selected wave at period x:
/// (x_nodes, U0, U1, U2, c2).
#[pyfunction]
#[pyo3(signature = (x, n = 256))]
fn wave_profile(x: f64, n: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    let k = modulus_from_period(x).map_err(err)?;
    let corr = correctors(modulus(k)?, n).map_err(err)?;
    Ok((
        corr.grids.u0.nodes().collect(),
        corr.grids.u0.values().to_vec(),
        corr.u1.values().to_vec(),
        corr.u2.values().to_vec(),
        corr.c2,
    ))
}

/// Period averages (<U>, <U^2/2>, <(U')^2>, <(U'')^2>) of the wave (k, kappa, u0).
#[pyfunction]
#[pyo3(signature = (k, kappa, u0 = 0.0, n = 1024))]
fn wave_averages(k: f64, kappa: f64, u0: f64, n: usize) -> PyResult<(f64, f64, f64, f64)> {
    let w = WaveParams::new(modulus(k)?, kappa, u0).map_err(err)?;
    let a = averages(&w, n).map_err(err)?;
    Ok((a.mean, a.half_square, a.deriv_sq, a.deriv2_sq))
}

/// Subcharacteristic report at period x, as a dict-like tuple:
/// (alphas, betas_or_none, lambda_star, s1, s2, s3, margins).
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Subchar {
    #[pyo3(get)]
    x: f64,
    #[pyo3(get)]
    k: f64,
    #[pyo3(get)]
    alphas: (f64, f64, f64),
    #[pyo3(get)]
    betas: Option<(f64, f64)>,
    #[pyo3(get)]
    beta_complex: Option<(f64, f64)>,
    #[pyo3(get)]
    lambda_star: f64,
    #[pyo3(get)]
    s1: bool,
    #[pyo3(get)]
    s2: bool,
    #[pyo3(get)]
    s3: bool,
    #[pyo3(get)]
    margins: (f64, f64, f64),
}

#[pyfunction]
fn subchar(x: f64) -> PyResult<Subchar> {
    let rep = subchar_report(x).map_err(err)?;
    let (betas, beta_complex) = match rep.betas {
        BetaPair::Real(b) => (Some((b[0], b[1])), None),
        BetaPair::ComplexPair { re, im } => (None, Some((re, im))),
    };
    Ok(Subchar {
        x: rep.x,
        k: rep.k,
        alphas: (rep.alphas[0], rep.alphas[1], rep.alphas[2]),
        betas,
        beta_complex,
        lambda_star: rep.lambda_star,
        s1: rep.s1,
        s2: rep.s2,
        s3: rep.s3,
        margins: (rep.margins.s1, rep.margins.s2, rep.margins.s3),
    })
}

/// Critical sideband period X_c.
#[pyfunction]
fn sideband_critical_period() -> PyResult<f64> {
    critical_period().map_err(err)
}

/// Homogeneous relaxation rate lambda_*(k).
#[pyfunction]
fn relaxation_rate(k: f64) -> PyResult<f64> {
    kdvks_core::whitham::homogeneous_relaxation_rate(modulus(k)?, KPrimeReading::DerivativeInK)
        .map_err(err)
}

/// A band sample: (Im lambda0, xi_reduced, Re lambda1, Im lambda1).
#[pyfunction]
fn band_corrector(x: f64, eta: f64) -> PyResult<(f64, f64, f64, f64)> {
    let k = modulus_from_period(x).map_err(err)?;
    let m = modulus(k)?;
    let ctx = WaveContext::new(m).map_err(err)?;
    let corr = correctors(m, 256).map_err(err)?;
    let s = lambda1_adaptive(&ctx, &corr, eta, Branch::Plus, 1e-7, 8192).map_err(err)?;
    Ok((s.band.lambda0.im, s.band.xi, s.re_pairing, s.im_pairing))
}

/// Band edges (eta1, eta2, eta3) at period x.
#[pyfunction]
fn spectral_band_edges(x: f64) -> PyResult<(f64, f64, f64)> {
    let k = modulus_from_period(x).map_err(err)?;
    Ok(band_edges(modulus(k)?))
}

/// Origin eigenvalue slope lambda_1(0) at period x.
#[pyfunction]
fn origin_slope(x: f64) -> PyResult<f64> {
    let k = modulus_from_period(x).map_err(err)?;
    let corr = correctors(modulus(k)?, 256).map_err(err)?;
    lambda1_origin(&corr).map_err(err)
}

/// Stability index Ind(x); `resolution` points per band.
#[pyfunction]
#[pyo3(signature = (x, resolution = 200))]
fn index(x: f64, resolution: usize) -> PyResult<(f64, f64, f64)> {
    let res = IndexResolution {
        n_mid: resolution,
        n_low: resolution,
        ..IndexResolution::default()
    };
    let idx = stability_index(x, &res).map_err(err)?;
    Ok((idx.ind, idx.band_max, idx.origin_lambda1))
}

/// |E(lambda0(eta), xi(eta))| relative Evans defect at a band sample.
#[pyfunction]
fn evans_defect(x: f64, eta: f64) -> PyResult<f64> {
    let k = modulus_from_period(x).map_err(err)?;
    let m = modulus(k)?;
    let ctx = WaveContext::new(m).map_err(err)?;
    let params = selected_params(m).map_err(err)?;
    let b = band_sample(&ctx, eta, Branch::Plus).map_err(err)?;
    let mono = monodromy_kdv(&params, b.lambda0, 256).map_err(err)?;
    Ok(evans_from_monodromy(&mono, b.xi, params.period()).relative)
}

/// Hill spectrum at (x, delta, xi): list of (re, im), sorted by re descending.
#[pyfunction]
#[pyo3(signature = (x, delta, xi, n_modes = 48))]
fn hill(x: f64, delta: f64, xi: f64, n_modes: usize) -> PyResult<Vec<(f64, f64)>> {
    let k = modulus_from_period(x).map_err(err)?;
    let grid_n = (4 * n_modes + 2).next_power_of_two().max(256);
    let corr = correctors(modulus(k)?, grid_n).map_err(err)?;
    let spec = hill_spectrum(&corr, delta, xi, n_modes, HillOptions::default()).map_err(err)?;
    Ok(spec.eigenvalues.iter().map(|z| (z.re, z.im)).collect())
}

/// Nearest Hill eigenvalue to a target (re, im), with its distance.
#[pyfunction]
#[pyo3(signature = (x, delta, xi, target_re, target_im, n_modes = 48))]
fn hill_nearest(
    x: f64,
    delta: f64,
    xi: f64,
    target_re: f64,
    target_im: f64,
    n_modes: usize,
) -> PyResult<((f64, f64), f64)> {
    let k = modulus_from_period(x).map_err(err)?;
    let grid_n = (4 * n_modes + 2).next_power_of_two().max(256);
    let corr = correctors(modulus(k)?, grid_n).map_err(err)?;
    let spec = hill_spectrum(&corr, delta, xi, n_modes, HillOptions::default()).map_err(err)?;
    let (e, d) =
        kdvks_core::evans::nearest_eigenvalue(&spec, Complex64::new(target_re, target_im));
    Ok(((e.re, e.im), d))
}

#[pymodule]
fn kdvks_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(elliptic_ke, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(selected_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(selection_defect, m)?)?;
    m.add_function(wrap_pyfunction!(period_of, m)?)?;
    m.add_function(wrap_pyfunction!(modulus_of_period, m)?)?;
    m.add_function(wrap_pyfunction!(wave_profile, m)?)?;
    m.add_function(wrap_pyfunction!(wave_averages, m)?)?;
    m.add_function(wrap_pyfunction!(subchar, m)?)?;
    m.add_function(wrap_pyfunction!(sideband_critical_period, m)?)?;
    m.add_function(wrap_pyfunction!(relaxation_rate, m)?)?;
    m.add_function(wrap_pyfunction!(band_corrector, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_band_edges, m)?)?;
    m.add_function(wrap_pyfunction!(origin_slope, m)?)?;
    m.add_function(wrap_pyfunction!(index, m)?)?;
    m.add_function(wrap_pyfunction!(evans_defect, m)?)?;
    m.add_function(wrap_pyfunction!(hill, m)?)?;
    m.add_function(wrap_pyfunction!(hill_nearest, m)?)?;
    m.add_class::<Subchar>()?;
    Ok(())
}
