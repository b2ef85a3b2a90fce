use serde::{Deserialize, Serialize};

use super::MetricsError;

pub const TLX_ITEMS: [&str; 6] = ["mental", "physical", "temporal", "performance", "effort", "frustration"];
pub const TLX_MIN: f64 = 1.0;
pub const TLX_MAX: f64 = 10.0;
pub const USABILITY_ITEMS: usize = 9;
pub const USABILITY_MIN: f64 = 1.0;
pub const USABILITY_MAX: f64 = 5.0;
/// Zero-based indices of the reverse-coded usability items (Q2, Q4).
pub const REVERSE_CODED: [usize; 2] = [1, 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlxResponse {
    pub items: [f64; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UsabilityResponse {
    pub items: [f64; USABILITY_ITEMS],
}

fn check(items: &[f64], lo: f64, hi: f64) -> Result<(), MetricsError> {
    for (k, &x) in items.iter().enumerate() {
        if !(lo..=hi).contains(&x) {
            return Err(MetricsError::OutOfRange { item: k + 1, value: x, lo, hi });
        }
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Maps a raw TLX item mean on 1..10 to 0..100.
pub fn tlx_scale(raw_mean: f64) -> f64 {
    (raw_mean - TLX_MIN) / (TLX_MAX - TLX_MIN) * 100.0
}

/// Maps a usability item mean on 1..5 to 0..100.
pub fn usability_scale(raw_mean: f64) -> f64 {
    (raw_mean - USABILITY_MIN) / (USABILITY_MAX - USABILITY_MIN) * 100.0
}

/// Unweighted mean of the six items, mapped to 0..100.
pub fn raw_tlx(r: &TlxResponse) -> Result<f64, MetricsError> {
    check(&r.items, TLX_MIN, TLX_MAX)?;
    Ok(tlx_scale(mean(&r.items)))
}

/// `x ↦ 6 − x` on the 1..5 scale.
pub fn reverse_code(x: f64) -> f64 {
    USABILITY_MIN + USABILITY_MAX - x
}

/// Items with Q2 and Q4 reversed.
pub fn reverse_coded(r: &UsabilityResponse) -> [f64; USABILITY_ITEMS] {
    let mut items = r.items;
    for k in REVERSE_CODED {
        items[k] = reverse_code(items[k]);
    }
    items
}

/// Mean of the nine items after reverse coding, mapped to 0..100.
pub fn usability_composite(r: &UsabilityResponse) -> Result<f64, MetricsError> {
    check(&r.items, USABILITY_MIN, USABILITY_MAX)?;
    Ok(usability_scale(mean(&reverse_coded(r))))
}

fn pop_var(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    let m = xs.clone().sum::<f64>() / n;
    xs.map(|x| (x - m) * (x - m)).sum::<f64>() / n
}

/// Cronbach's alpha over a participants × items matrix, population variances.
pub fn cronbach_alpha(matrix: &[Vec<f64>]) -> Result<f64, MetricsError> {
    let n = matrix.len();
    let k = matrix.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(MetricsError::DegenerateData(format!("need at least 2 participants and 2 items, got {n}x{k}")));
    }
    if let Some(row) = matrix.iter().position(|r| r.len() != k) {
        return Err(MetricsError::DegenerateData(format!("row {row} has {} items, expected {k}", matrix[row].len())));
    }
    let item_var: f64 = (0..k).map(|j| pop_var(matrix.iter().map(move |r| r[j]))).sum();
    let total_var = pop_var(matrix.iter().map(|r| r.iter().sum::<f64>()));
    if total_var <= 1e-12 {
        return Err(MetricsError::DegenerateData("total score variance is zero".into()));
    }
    let kf = k as f64;
    Ok(kf / (kf - 1.0) * (1.0 - item_var / total_var))
}

/// Alpha over usability responses, reverse coding applied first.
pub fn usability_alpha(responses: &[UsabilityResponse]) -> Result<f64, MetricsError> {
    let m: Vec<Vec<f64>> = responses.iter().map(|r| reverse_coded(r).to_vec()).collect();
    cronbach_alpha(&m)
}
