//! MIMO channel coefficients, long-term beamformed components and received
//! power spectral density.
//!
//! Channel amplitudes are normalized by the transmit power, so `|H|^2` is a
//! dimensionless power gain and `S_rx = S_tx * |sum_m L_m ...|^2` keeps the
//! units of `S_tx`. The delay term uses `exp(-j 2 pi tau f)`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::antenna::AntennaArray;
use crate::error::{Error, Result};
use crate::small_scale::{ChannelRealization, Direction, Subpath};

/// Per-subpath coefficient blocks of size `rx elements x tx elements`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub coefficients: Vec<DMatrix<Complex64>>,
    pub delays_ns: Vec<f64>,
    pub doppler_hz: Vec<f64>,
    pub wavelength_m: f64,
}

impl ChannelMatrix {
    pub fn rx_elements(&self) -> usize {
        self.coefficients.first().map_or(0, |h| h.nrows())
    }

    pub fn tx_elements(&self) -> usize {
        self.coefficients.first().map_or(0, |h| h.ncols())
    }

    pub fn num_subpaths(&self) -> usize {
        self.coefficients.len()
    }

    /// Sum over subpaths of the mean element-pair power gain.
    pub fn mean_element_gain(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|h| h.iter().map(|c| c.norm_sqr()).sum::<f64>() / h.len() as f64)
            .sum()
    }
}

/// Coupling of the Rx and Tx element fields through the polarization matrix
/// of one subpath, scaled by its amplitude.
fn polarization_coupling(sp: &Subpath, amplitude: f64, rx: (f64, f64), tx: (f64, f64)) -> Complex64 {
    let [k_tp, k_pt, k_pp] = sp.xpd_linear();
    let [p_tt, p_tp, p_pt, p_pp] = sp.phases;
    let m_tt = Complex64::from_polar(1.0, p_tt);
    let m_tp = Complex64::from_polar((1.0 / k_tp).sqrt(), p_tp);
    let m_pt = Complex64::from_polar((1.0 / k_pt).sqrt(), p_pt);
    let m_pp = Complex64::from_polar((1.0 / k_pp).sqrt(), p_pp);
    let theta = m_tt * tx.0 + m_tp * tx.1;
    let phi = m_pt * tx.0 + m_pp * tx.1;
    amplitude * (rx.0 * theta + rx.1 * phi)
}

/// Builds the coefficient block of every resolvable subpath.
pub fn build_channel_matrix(realization: &ChannelRealization, tx: &AntennaArray, rx: &AntennaArray) -> Result<ChannelMatrix> {
    let wavelength = realization.carrier.wavelength_m();
    for (side, array) in [("Tx", tx), ("Rx", rx)] {
        if (array.wavelength_m() - wavelength).abs() > 1e-12 * wavelength {
            return Err(Error::DimensionMismatch(format!(
                "{side} array built for wavelength {} m, carrier has {wavelength} m",
                array.wavelength_m()
            )));
        }
    }
    let tx_power_mw = 10f64.powf(realization.tx_power_dbm / 10.0);
    let coefficients = realization
        .subpaths
        .iter()
        .map(|sp| {
            let amplitude = (sp.power_mw / tx_power_mw).sqrt();
            let c = polarization_coupling(sp, amplitude, rx.field(sp.arrival), tx.field(sp.departure));
            let a_rx = rx.steering_vector(sp.arrival);
            let a_tx = tx.steering_vector(sp.departure);
            (a_rx * a_tx.transpose()) * c
        })
        .collect();
    Ok(ChannelMatrix {
        coefficients,
        delays_ns: realization.subpaths.iter().map(|sp| sp.delay_ns).collect(),
        doppler_hz: realization.subpaths.iter().map(|sp| sp.doppler_hz).collect(),
        wavelength_m: wavelength,
    })
}

fn check_weights(w: &DVector<Complex64>, expected: usize, side: &str) -> Result<()> {
    if w.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{side} weight vector has {} entries, array has {expected}",
            w.len()
        )));
    }
    if (w.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("{side} weight vector must have unit norm, got {}", w.norm())));
    }
    Ok(())
}

/// `L_m = w_rx^T H_m w_tx` for every subpath.
pub fn long_term(matrix: &ChannelMatrix, w_tx: &DVector<Complex64>, w_rx: &DVector<Complex64>) -> Result<Vec<Complex64>> {
    if matrix.num_subpaths() == 0 {
        return Ok(Vec::new());
    }
    check_weights(w_tx, matrix.tx_elements(), "Tx")?;
    check_weights(w_rx, matrix.rx_elements(), "Rx")?;
    Ok(matrix
        .coefficients
        .iter()
        .map(|h| (w_rx.transpose() * (h * w_tx))[(0, 0)])
        .collect())
}

/// PSD sampled at subband centres, as offsets from the carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub offsets_hz: Vec<f64>,
    /// W/Hz per subband.
    pub values: Vec<f64>,
}

impl SpectralDensity {
    /// Subband centre offsets of a uniform grid over `bandwidth_hz`.
    pub fn grid(bandwidth_hz: f64, subbands: usize) -> Result<Vec<f64>> {
        if subbands == 0 || !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
            return Err(Error::invalid("PSD grid needs a positive bandwidth and at least one subband"));
        }
        let width = bandwidth_hz / subbands as f64;
        Ok((0..subbands)
            .map(|i| -bandwidth_hz / 2.0 + (i as f64 + 0.5) * width)
            .collect())
    }

    /// Flat PSD carrying `total_power_w` over `bandwidth_hz`.
    pub fn flat(total_power_w: f64, bandwidth_hz: f64, subbands: usize) -> Result<Self> {
        let offsets_hz = Self::grid(bandwidth_hz, subbands)?;
        Ok(Self {
            values: vec![total_power_w / bandwidth_hz; subbands],
            offsets_hz,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Received PSD from the long-term components at time `t_s`.
pub fn rx_psd_from_long_term(
    tx_psd: &SpectralDensity,
    long_term: &[Complex64],
    matrix: &ChannelMatrix,
    t_s: f64,
) -> Result<SpectralDensity> {
    if tx_psd.offsets_hz.len() != tx_psd.values.len() {
        return Err(Error::DimensionMismatch("PSD offsets and values differ in length".into()));
    }
    if long_term.len() != matrix.num_subpaths() {
        return Err(Error::DimensionMismatch(format!(
            "{} long-term components for {} subpaths",
            long_term.len(),
            matrix.num_subpaths()
        )));
    }
    let rotated: Vec<Complex64> = long_term
        .iter()
        .zip(&matrix.doppler_hz)
        .map(|(l, nu)| l * Complex64::from_polar(1.0, TAU * nu * t_s))
        .collect();
    let values = tx_psd
        .offsets_hz
        .iter()
        .zip(&tx_psd.values)
        .map(|(f, s_tx)| {
            let response: Complex64 = rotated
                .iter()
                .zip(&matrix.delays_ns)
                .map(|(l, tau)| l * Complex64::from_polar(1.0, -TAU * tau * 1e-9 * f))
                .sum();
            s_tx * response.norm_sqr()
        })
        .collect();
    Ok(SpectralDensity {
        offsets_hz: tx_psd.offsets_hz.clone(),
        values,
    })
}

/// `S_rx(f) = S_tx(f) |sum_m L_m exp(j 2 pi nu_m t) exp(-j 2 pi tau_m f)|^2`.
pub fn rx_psd(
    tx_psd: &SpectralDensity,
    matrix: &ChannelMatrix,
    w_tx: &DVector<Complex64>,
    w_rx: &DVector<Complex64>,
    t_s: f64,
) -> Result<SpectralDensity> {
    let l = long_term(matrix, w_tx, w_rx)?;
    rx_psd_from_long_term(tx_psd, &l, matrix, t_s)
}

/// Beamformed power gain (dB) with matched weights towards the given
/// directions, relative to the mean single element-pair channel. Returns
/// the gain and the received PSD.
pub fn beamforming_gain(
    matrix: &ChannelMatrix,
    tx: &AntennaArray,
    rx: &AntennaArray,
    tx_direction: Direction,
    rx_direction: Direction,
    tx_psd: &SpectralDensity,
    t_s: f64,
) -> Result<(f64, SpectralDensity)> {
    let w_tx = tx.matched_weights(tx_direction);
    let w_rx = rx.matched_weights(rx_direction);
    let psd = rx_psd(tx_psd, matrix, &w_tx, &w_rx, t_s)?;
    let baseline = tx_psd.sum() * matrix.mean_element_gain();
    Ok((10.0 * (psd.sum() / baseline).log10(), psd))
}
