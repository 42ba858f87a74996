//! Synthetic occupancy-like data for offline runs.
//!
//! Occupancy follows a seeded Markov chain on `{0..3}` (sticky, reflecting
//! at the bounds). Light responds to occupancy instantaneously, CO2 through
//! a leaky integrator, temperature weakly; sound and PIR are mostly noise.
//! Each channel adds AR(1)-smoothed noise so the series reproduce the
//! high lag-1 autocorrelation structure of real sensor traces (CO2 above
//! 0.95 by a wide margin) while staying learnable from the light channels.

use rand::Rng;

use super::{DataError, Dataset, SensorRecord, FEATURE_NAMES};
use crate::rng::{standard_normal, stream_rng};

const TEMP_BASE: [f64; 4] = [25.1, 25.3, 24.9, 25.5];
const TEMP_GAIN: f64 = 0.35;
const LIGHT_GAIN: [f64; 4] = [45.0, 38.0, 50.0, 25.0];
const LIGHT_BASE: [f64; 4] = [2.0, 3.0, 8.0, 1.0];
const SOUND_BASE: [f64; 4] = [0.06, 0.05, 0.05, 0.07];

/// Generates `n_rows` synthetic records, deterministically per `seed`.
pub fn generate_synthetic(n_rows: usize, seed: u64) -> Result<Dataset, DataError> {
    if n_rows < 100 {
        return Err(DataError::TooFewSyntheticRows(n_rows));
    }

    let mut occ_rng = stream_rng(seed, 0);
    let mut occupancy = Vec::with_capacity(n_rows);
    let mut state: usize = 0;
    for _ in 0..n_rows {
        occupancy.push(state);
        let u: f64 = occ_rng.gen();
        if u < 0.03 && state > 0 {
            state -= 1;
        } else if u >= 0.97 && state < 3 {
            state += 1;
        }
    }

    // AR(1) noise track per channel, phi fixed per channel family.
    let ar1 = |stream: u64, phi: f64, sigma: f64| -> Vec<f64> {
        let mut rng = stream_rng(seed, stream);
        let mut x = 0.0;
        (0..n_rows)
            .map(|_| {
                x = phi * x + sigma * standard_normal(&mut rng);
                x
            })
            .collect()
    };

    let temp_noise: Vec<Vec<f64>> = (0..4).map(|k| ar1(1 + k, 0.97, 0.06)).collect();
    let light_noise: Vec<Vec<f64>> = (0..4).map(|k| ar1(5 + k, 0.90, 8.0)).collect();

    let mut sound_rng = stream_rng(seed, 9);
    let mut co2_rng = stream_rng(seed, 13);
    let mut pir_rng = stream_rng(seed, 14);

    let mut records = Vec::with_capacity(n_rows);
    let mut co2 = 345.0_f64;
    let mut co2_prev_rounded = co2.round();
    let mut slope = 0.0_f64;

    for (t, &occ) in occupancy.iter().enumerate() {
        let mut features = [0.0f64; 16];

        for k in 0..4 {
            let v = TEMP_BASE[k] + TEMP_GAIN * occ as f64 + temp_noise[k][t];
            features[k] = (v * 100.0).round() / 100.0;
        }
        for k in 0..4 {
            let v = LIGHT_BASE[k] + LIGHT_GAIN[k] * occ as f64 + light_noise[k][t];
            features[4 + k] = v.max(0.0).round();
        }
        for k in 0..4 {
            let v = SOUND_BASE[k]
                + 0.04 * occ as f64
                + 0.05 * standard_normal(&mut sound_rng).abs();
            features[8 + k] = (v * 100.0).round() / 100.0;
        }

        // leaky integrator toward a 345 PPM baseline
        co2 += 3.0 * occ as f64 - 0.02 * (co2 - 345.0) + 1.5 * standard_normal(&mut co2_rng);
        co2 = co2.max(340.0);
        let co2_rounded = co2.round();
        slope = 0.8 * slope + 0.2 * (co2_rounded - co2_prev_rounded);
        co2_prev_rounded = co2_rounded;
        features[12] = co2_rounded;
        features[13] = (slope * 10000.0).round() / 10000.0;

        for k in 0..2 {
            let p = if occ > 0 { 0.18 + 0.08 * occ as f64 } else { 0.01 };
            features[14 + k] = if pir_rng.gen::<f64>() < p { 1.0 } else { 0.0 };
        }

        // 30-second cadence starting 2018/01/10 09:00:00
        let step = 9 * 3600 + 30 * t;
        let day = 10 + step / 86_400;
        let secs = step % 86_400;
        records.push(SensorRecord {
            date: format!("2018/01/{day:02}"),
            time: format!("{:02}:{:02}:{:02}", secs / 3600, (secs % 3600) / 60, secs % 60),
            features,
            label: occ,
        });
    }

    Ok(Dataset {
        records,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
    })
}
