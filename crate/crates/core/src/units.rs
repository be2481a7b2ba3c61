//! Unit conversions used at the I/O boundary.

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Power floor applied when converting zero power to dBm.
pub const DBM_FLOOR: f64 = -200.0;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    if mw > 0.0 {
        (10.0 * mw.log10()).max(DBM_FLOOR)
    } else {
        DBM_FLOOR
    }
}

pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn wavelength_from_frequency(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}
