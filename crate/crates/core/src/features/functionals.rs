//! Statistical functionals mapping an LLD contour to fixed summary values.
//!
//! The 21-functional set applies to primary contours and their deltas; the
//! voicing contours use the first 19 (the two up-level times are dropped).
//! Conventions pinned for reproducibility:
//!
//! - positions (maxPos/minPos) are the first-occurrence frame index divided
//!   by (n - 1), i.e. normalized contour time in [0, 1]; 0 for n = 1
//! - linear regression is fitted over normalized time [0, 1]; errA is the
//!   mean absolute residual, errQ the mean squared residual
//! - stddev/skewness/kurtosis use population moments; skewness and kurtosis
//!   of a zero-variance contour are 0 by convention
//! - quantiles interpolate linearly between order statistics at q*(n-1)
//! - up-level time X is the fraction of frames at or above
//!   min + X*(max - min); 1.0 for a zero-range contour

use super::{Is10Vector, LldMatrix, IS10_DIM};

pub const PRIMARY_FUNCTIONAL_COUNT: usize = 21;
pub const VOICING_FUNCTIONAL_COUNT: usize = 19;

const NAMES: [&str; PRIMARY_FUNCTIONAL_COUNT] = [
    "maxPos",
    "minPos",
    "amean",
    "linregc1",
    "linregc2",
    "linregerrA",
    "linregerrQ",
    "stddev",
    "skewness",
    "kurtosis",
    "quartile1",
    "quartile2",
    "quartile3",
    "iqr1-2",
    "iqr2-3",
    "iqr1-3",
    "percentile1",
    "percentile99",
    "pctlrange0-1",
    "upleveltime75",
    "upleveltime90",
];

pub fn functional_names() -> &'static [&'static str; PRIMARY_FUNCTIONAL_COUNT] {
    &NAMES
}

/// Linear-interpolation quantile on a pre-sorted slice (position q*(n-1)).
pub fn linear_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    }
}

/// All 21 functionals of one contour, in the pinned order. Empty contours
/// produce all zeros so the vector dimension stays fixed.
pub fn contour_functionals(contour: &[f64]) -> [f64; PRIMARY_FUNCTIONAL_COUNT] {
    let mut out = [0.0f64; PRIMARY_FUNCTIONAL_COUNT];
    let n = contour.len();
    if n == 0 {
        return out;
    }
    let nf = n as f64;

    let mut max_i = 0usize;
    let mut min_i = 0usize;
    let mut sum = 0.0;
    for (i, &v) in contour.iter().enumerate() {
        if v > contour[max_i] {
            max_i = i;
        }
        if v < contour[min_i] {
            min_i = i;
        }
        sum += v;
    }
    let mean = sum / nf;
    let denom_pos = if n > 1 { (n - 1) as f64 } else { 1.0 };
    out[0] = max_i as f64 / denom_pos;
    out[1] = min_i as f64 / denom_pos;
    out[2] = mean;

    // Least-squares line over t in [0, 1].
    let (slope, intercept) = if n > 1 {
        let mut st = 0.0;
        let mut stt = 0.0;
        let mut sty = 0.0;
        for (i, &v) in contour.iter().enumerate() {
            let t = i as f64 / (n - 1) as f64;
            st += t;
            stt += t * t;
            sty += t * v;
        }
        let denom = nf * stt - st * st;
        if denom.abs() > 1e-300 {
            let m = (nf * sty - st * sum) / denom;
            (m, (sum - m * st) / nf)
        } else {
            (0.0, mean)
        }
    } else {
        (0.0, contour[0])
    };
    out[3] = slope;
    out[4] = intercept;
    let (mut err_a, mut err_q) = (0.0, 0.0);
    for (i, &v) in contour.iter().enumerate() {
        let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
        let r = v - (slope * t + intercept);
        err_a += r.abs();
        err_q += r * r;
    }
    out[5] = err_a / nf;
    out[6] = err_q / nf;

    let m2 = contour.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let sd = m2.sqrt();
    out[7] = sd;
    if sd > 0.0 {
        let m3 = contour.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / nf;
        let m4 = contour.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
        out[8] = m3 / (sd * sd * sd);
        out[9] = m4 / (m2 * m2);
    }

    let mut sorted = contour.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q1 = linear_quantile(&sorted, 0.25);
    let q2 = linear_quantile(&sorted, 0.50);
    let q3 = linear_quantile(&sorted, 0.75);
    let p1 = linear_quantile(&sorted, 0.01);
    let p99 = linear_quantile(&sorted, 0.99);
    out[10] = q1;
    out[11] = q2;
    out[12] = q3;
    out[13] = q2 - q1;
    out[14] = q3 - q2;
    out[15] = q3 - q1;
    out[16] = p1;
    out[17] = p99;
    out[18] = p99 - p1;

    let (min, max) = (sorted[0], sorted[n - 1]);
    let range = max - min;
    for (slot, frac) in [(19usize, 0.75f64), (20, 0.90)] {
        out[slot] = if range <= 0.0 {
            1.0
        } else {
            let gate = min + frac * range;
            contour.iter().filter(|&&v| v >= gate).count() as f64 / nf
        };
    }
    out
}

/// Flatten an LLD matrix into the 1582-entry vector. Emission order matches
/// [`super::index_map`].
pub fn apply_functionals(llds: &LldMatrix) -> Is10Vector {
    let mut values = Vec::with_capacity(IS10_DIM);
    for set in [&llds.primary, &llds.primary_delta] {
        for contour in set.iter() {
            values.extend_from_slice(&contour_functionals(contour)[..PRIMARY_FUNCTIONAL_COUNT]);
        }
    }
    for set in [&llds.voicing, &llds.voicing_delta] {
        for contour in set.iter() {
            values.extend_from_slice(&contour_functionals(contour)[..VOICING_FUNCTIONAL_COUNT]);
        }
    }
    values.push(llds.pitch_onset_count as f64);
    values.push(llds.duration_s);
    debug_assert_eq!(values.len(), IS10_DIM);
    Is10Vector { values }
}
