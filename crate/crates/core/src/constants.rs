//! Physical constants in the unit systems used by the crate.

/// Speed of light in vacuum, m/s.
pub const C_SI: f64 = 299_792_458.0;

/// Speed of light in nm/fs.
pub const C_NM_PER_FS: f64 = 299.792_458;

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// Angular frequency in rad/fs of light with vacuum wavelength `lambda_nm`.
pub fn omega_rad_per_fs(lambda_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_NM_PER_FS / lambda_nm
}

/// Vacuum wavelength in nm for an angular frequency in rad/fs.
pub fn lambda_nm(omega_rad_per_fs: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_NM_PER_FS / omega_rad_per_fs
}
