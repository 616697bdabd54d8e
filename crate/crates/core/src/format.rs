//! Fixed numeric text format shared by every CSV and JSON writer:
//! lower-case scientific notation with twelve digits after the point.

/// Formats `x` as `d.dddddddddddde±x`, e.g. `1.000000000000e0`.
pub fn sci(x: f64) -> String {
    // -0.0 would otherwise print with a sign that depends on evaluation order
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.12e}")
}

/// Evenly spaced grid from `lo` to `hi` inclusive. Each point is computed
/// directly from its index so endpoints and symmetric midpoints are exact.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * (i as f64) / last
                    }
                })
                .collect()
        }
    }
}
