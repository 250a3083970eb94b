//! Integer production rules shared by encoder and decoder.

/// Round half away from zero. `f64::round` already has these semantics; the
/// wrapper pins the rule in one place.
#[inline]
pub fn round_half_away(x: f64) -> f64 {
    x.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halves_move_away_from_zero() {
        assert_eq!(round_half_away(127.5), 128.0);
        assert_eq!(round_half_away(-127.5), -128.0);
        assert_eq!(round_half_away(0.49999999999999994), 0.0);
        assert_eq!(round_half_away(2.5), 3.0);
    }
}
