//! Seasonal-plus-trend synthetic series for desk-scale experiments.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{StepLength, TimeSeries};
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    /// Period in steps.
    pub period: f64,
}

/// One generated channel:
///
/// `offset + trend·t + Σ amplitude·sin(2πt/period + phase) + a(t)`
///
/// where the anomaly `a(t) = persistence·a(t−1) + noise_std·ε(t)` with
/// standard normal `ε`. Persistence 0 gives independent Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSynth {
    pub name: String,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub trend: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub harmonics: Vec<Harmonic>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub persistence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub length: usize,
    #[serde(default)]
    pub start: i64,
    #[serde(default)]
    pub step: StepLength,
    pub channels: Vec<ChannelSynth>,
}

impl Default for SynthConfig {
    /// 40 cycles of 52 weekly steps at four warming locations, from weak to
    /// strong seasonality.
    fn default() -> Self {
        let channel = |name: &str, offset, trend, phase, amplitude, noise_std, persistence| {
            ChannelSynth {
                name: name.into(),
                offset,
                trend,
                phase,
                harmonics: vec![Harmonic {
                    amplitude,
                    period: 52.0,
                }],
                noise_std,
                persistence,
            }
        };
        Self {
            length: 40 * 52,
            start: 0,
            step: StepLength {
                unit: "week".into(),
                count: 1,
            },
            channels: vec![
                channel("equatorial", 27.0, 0.0064, 0.3, 1.0, 0.35, 0.9),
                channel("tropical", 24.0, 0.0072, 0.9, 2.0, 0.45, 0.9),
                channel("mid_lat", 15.0, 0.008, -0.5, 5.0, 0.6, 0.9),
                channel("high_lat", 10.0, 0.008, -1.2, 8.0, 0.8, 0.9),
            ],
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::InvalidConfig("synthetic length must be positive".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::InvalidConfig("synthetic config has no channels".into()));
        }
        for ch in &self.channels {
            let bad = |what: &str| {
                Err(Error::InvalidConfig(format!("channel `{}`: {what}", ch.name)))
            };
            if !(ch.noise_std >= 0.0) || !ch.noise_std.is_finite() {
                return bad("noise_std must be a finite value ≥ 0");
            }
            if !(ch.persistence > -1.0 && ch.persistence < 1.0) {
                return bad("persistence must lie in (-1, 1)");
            }
            if ![ch.offset, ch.trend, ch.phase].iter().all(|v| v.is_finite()) {
                return bad("offset, trend and phase must be finite");
            }
            if ch
                .harmonics
                .iter()
                .any(|h| !h.amplitude.is_finite() || !(h.period > 0.0) || !h.period.is_finite())
            {
                return bad("harmonics need finite amplitudes and positive periods");
            }
        }
        Ok(())
    }
}

/// Generates a series; identical `(cfg, seed)` give identical output.
pub fn synth_generate(cfg: &SynthConfig, seed: u64) -> Result<TimeSeries> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = cfg.channels.len();

    // anomalies start from their stationary distribution
    let mut anomaly: Vec<f64> = cfg
        .channels
        .iter()
        .map(|ch| {
            let z: f64 = rng.sample(StandardNormal);
            z * ch.noise_std / (1.0 - ch.persistence * ch.persistence).sqrt()
        })
        .collect();

    let mut values = Vec::with_capacity(cfg.length * k);
    for i in 0..cfg.length {
        let t = (cfg.start + i as i64) as f64;
        for (c, ch) in cfg.channels.iter().enumerate() {
            if i > 0 {
                let z: f64 = rng.sample(StandardNormal);
                anomaly[c] = ch.persistence * anomaly[c] + ch.noise_std * z;
            }
            let seasonal: f64 = ch
                .harmonics
                .iter()
                .map(|h| h.amplitude * (2.0 * PI * t / h.period + ch.phase).sin())
                .sum();
            values.push(ch.offset + ch.trend * t + seasonal + anomaly[c]);
        }
    }
    TimeSeries::new(
        cfg.step.clone(),
        cfg.start,
        cfg.channels.iter().map(|c| c.name.clone()).collect(),
        DenseMatrix::new(cfg.length, k, values)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pure(trend: f64, noise: f64) -> SynthConfig {
        SynthConfig {
            length: 200,
            start: 0,
            step: StepLength::default(),
            channels: vec![ChannelSynth {
                name: "x".into(),
                offset: 5.0,
                trend,
                phase: 0.4,
                harmonics: vec![Harmonic {
                    amplitude: 3.0,
                    period: 20.0,
                }],
                noise_std: noise,
                persistence: 0.0,
            }],
        }
    }

    #[test]
    fn noiseless_sinusoid_is_periodic() {
        let s = synth_generate(&pure(0.0, 0.0), 1).unwrap();
        for t in 20..200 {
            let d = s.value(t, 0).unwrap() - s.value(t - 20, 0).unwrap();
            assert!(d.abs() < 1e-9, "t={t} d={d}");
        }
    }

    #[test]
    fn same_seed_same_series() {
        let cfg = SynthConfig::default();
        let a = synth_generate(&cfg, 42).unwrap();
        let b = synth_generate(&cfg, 42).unwrap();
        assert_eq!(a, b);
        let c = synth_generate(&cfg, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn trend_difference_over_one_period() {
        let slope = 0.037;
        let s = synth_generate(&pure(slope, 0.0), 9).unwrap();
        for t in 20..200 {
            let d = s.value(t, 0).unwrap() - s.value(t - 20, 0).unwrap();
            assert!((d - slope * 20.0).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = pure(0.0, 0.0);
        cfg.length = 0;
        assert!(matches!(synth_generate(&cfg, 0), Err(Error::InvalidConfig(_))));
        let mut cfg = pure(0.0, -1.0);
        assert!(matches!(synth_generate(&cfg, 0), Err(Error::InvalidConfig(_))));
        cfg.channels[0].noise_std = 1.0;
        cfg.channels[0].persistence = 1.0;
        assert!(matches!(synth_generate(&cfg, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn default_config_shape() {
        let s = synth_generate(&SynthConfig::default(), 0).unwrap();
        assert_eq!(s.len(), 2080);
        assert_eq!(s.channels(), &["equatorial", "tropical", "mid_lat", "high_lat"]);
        assert!(s.values().entries().iter().all(|v| v.is_finite()));
    }
}
