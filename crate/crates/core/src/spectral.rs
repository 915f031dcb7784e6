//! Periodograms of observable time series and their alignment with
//! eigenvalue gaps.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shortest series accepted.
pub const MIN_SERIES_LEN: usize = 16;
/// Local maxima below this fraction of the largest power are ignored.
pub const PEAK_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub label: String,
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        if values.len() < MIN_SERIES_LEN {
            return Err(Error::InvalidParameter(format!(
                "time series needs at least {MIN_SERIES_LEN} samples, got {}",
                values.len()
            )));
        }
        Ok(Self {
            label: label.into(),
            t0,
            dt,
            values,
        })
    }

    /// Builds a series from sample times, checking that they are uniform.
    pub fn from_samples(label: impl Into<String>, times: &[f64], values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Shape {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.len() < 2 {
            return Self::new(label, 0.0, 1.0, values);
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        for (k, &t) in times.iter().enumerate() {
            let expect = times[0] + k as f64 * dt;
            if (t - expect).abs() > 1e-6 * dt.abs().max(1e-12) + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "non-uniform time grid at sample {k}: {t} vs {expect}"
                )));
            }
        }
        Self::new(label, times[0], dt, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / self.len() as f64
    }
}

/// One-sided periodogram on angular frequencies `k * d_omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    pub d_omega: f64,
    pub omega: Vec<f64>,
    pub power: Vec<f64>,
}

impl PowerSpectrum {
    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Bin whose centre is closest to `omega`.
    pub fn bin_of(&self, omega: f64) -> usize {
        ((omega / self.d_omega).round().max(0.0) as usize).min(self.power.len() - 1)
    }

    /// Strict local maxima (excluding the zero bin) above
    /// [`PEAK_THRESHOLD`] times the largest power, in bin order.
    pub fn peaks(&self) -> Vec<usize> {
        let max = self.power.iter().skip(1).cloned().fold(0.0, f64::max);
        if max <= 0.0 {
            return Vec::new();
        }
        let p = &self.power;
        let last = p.len() - 1;
        (1..p.len())
            .filter(|&k| {
                p[k] > PEAK_THRESHOLD * max
                    && p[k] > p[k - 1]
                    && (k == last || p[k] > p[k + 1])
            })
            .collect()
    }

    /// Peak with the largest power at nonzero frequency.
    pub fn dominant_peak(&self) -> Option<usize> {
        self.peaks()
            .into_iter()
            .max_by(|&a, &b| self.power[a].total_cmp(&self.power[b]))
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "power"])?;
        for (o, p) in self.omega.iter().zip(&self.power) {
            w.write_record([format!("{o}"), format!("{p}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean-subtracted periodogram with a rectangular window.
///
/// With `L` samples, `P_0 = |X_0|^2 / L`, `P_k = 2 |X_k|^2 / L` for
/// `0 < k < L/2` and `P_{L/2} = |X_{L/2}|^2 / L` for even `L`, so that
/// `sum_k P_k = L * variance`. The resolution is `2 pi / (L dt)`.
pub fn power_spectrum(series: &TimeSeries) -> PowerSpectrum {
    let len = series.len();
    let mean = series.mean();
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> = series
        .values
        .iter()
        .map(|&x| rustfft::num_complex::Complex::new(x - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let half = len / 2;
    let d_omega = 2.0 * PI / (len as f64 * series.dt);
    let power: Vec<f64> = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() / len as f64;
            if k == 0 || (len % 2 == 0 && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let omega = (0..=half).map(|k| k as f64 * d_omega).collect();
    PowerSpectrum {
        d_omega,
        omega,
        power,
    }
}

/// Nearest spectral peak to one gap frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakMatch {
    pub gap: f64,
    /// `None` when the spectrum has no peaks.
    pub peak_omega: Option<f64>,
    pub peak_power: Option<f64>,
    /// `|peak bin - bin of the gap|`
    pub bin_distance: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub d_omega: f64,
    pub dominant_omega: Option<f64>,
    pub matches: Vec<PeakMatch>,
    pub no_peaks: bool,
}

impl PeakReport {
    /// Largest bin distance over all gaps, `None` if any gap has no peak.
    pub fn worst_distance(&self) -> Option<usize> {
        self.matches
            .iter()
            .map(|m| m.bin_distance)
            .collect::<Option<Vec<_>>>()
            .and_then(|d| d.into_iter().max())
    }
}

/// Matches each gap to its nearest local maximum.
pub fn peak_match(spectrum: &PowerSpectrum, gaps: &[f64]) -> PeakReport {
    let peaks = spectrum.peaks();
    let matches = gaps
        .iter()
        .map(|&gap| {
            let target = spectrum.bin_of(gap);
            match peaks.iter().min_by_key(|&&p| p.abs_diff(target)) {
                Some(&p) => PeakMatch {
                    gap,
                    peak_omega: Some(spectrum.omega[p]),
                    peak_power: Some(spectrum.power[p]),
                    bin_distance: Some(p.abs_diff(target)),
                },
                None => PeakMatch {
                    gap,
                    peak_omega: None,
                    peak_power: None,
                    bin_distance: None,
                },
            }
        })
        .collect();
    PeakReport {
        d_omega: spectrum.d_omega,
        dominant_omega: spectrum.dominant_peak().map(|k| spectrum.omega[k]),
        matches,
        no_peaks: peaks.is_empty(),
    }
}
