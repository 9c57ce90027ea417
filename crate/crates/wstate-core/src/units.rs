//! Unit conversions between configuration conventions and the internal unit
//! system.
//!
//! Internally every coupling, detuning, drive amplitude, and rate is an
//! ordinary frequency in 1/ns (equivalently GHz) and every time is in ns.
//! Parameter tables and configuration files quote values in MHz, either as
//! `f/2π` numbers or in the doubled-coupling style `2g/2π` common for
//! qutrit–resonator couplings; the loaders convert at the boundary so the
//! rest of the code never touches a unit again.

/// Convert a quoted `f/2π` value in MHz to the internal rate in 1/ns.
pub fn mhz_to_per_ns(f_mhz: f64) -> f64 {
    f_mhz * 1e-3
}

/// Inverse of [`mhz_to_per_ns`].
pub fn per_ns_to_mhz(rate: f64) -> f64 {
    rate * 1e3
}

/// Convert a doubled-coupling value `2g/2π` in MHz to the coupling `g` in
/// 1/ns.
pub fn two_g_mhz_to_per_ns(two_g_mhz: f64) -> f64 {
    mhz_to_per_ns(two_g_mhz) / 2.0
}

/// Inverse of [`two_g_mhz_to_per_ns`].
pub fn per_ns_to_two_g_mhz(g: f64) -> f64 {
    per_ns_to_mhz(g) * 2.0
}
