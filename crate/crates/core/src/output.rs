//! Shared helpers for CSV output.

/// Formats a real with 17 significant digits so doubles round-trip exactly.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_real;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, 0.989_897_959_077_414_2, -1e-300, 0.0, 1e17] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
