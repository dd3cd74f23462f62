//! Physical constants and the handful of unit conversions used at the edges.

/// Speed of light used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

/// Linear power ratio from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

pub fn wavenumber(carrier_hz: f64) -> f64 {
    2.0 * std::f64::consts::PI / wavelength(carrier_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_ghz_wavelength_is_not_rounded() {
        let l = wavelength(2e9);
        assert!((l - 0.1499).abs() < 1e-12);
        assert!((wavenumber(2e9) * l - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn db_round_trip() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(3.0) - 1.9952623149688795).abs() < 1e-15);
        assert!((linear_to_db(db_to_linear(-6.0)) + 6.0).abs() < 1e-12);
    }
}
