/// Smallest log weight used in place of `ln 0` inside assignment costs.
pub(crate) const LN_FLOOR: f64 = -708.0;

pub(crate) fn ln_or_floor(x: f64) -> f64 {
    if x > 0.0 {
        x.ln().max(LN_FLOOR)
    } else {
        LN_FLOOR
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Converts log weights into normalised weights.
pub(crate) fn normalise_log_weights(values: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(values);
    values.iter().map(|v| (v - lse).exp()).collect()
}
