//! Physical constants (CODATA 2018) and the unit conversions built on them.

/// Hartree energy in joule.
pub const HARTREE_J: f64 = 4.359_744_722_207_1e-18;
/// Unified atomic mass unit in kilogram.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;
/// Angstrom in metre.
pub const ANGSTROM_M: f64 = 1e-10;
/// Speed of light in cm/s.
pub const SPEED_OF_LIGHT_CM_S: f64 = 2.997_924_58e10;

/// Force constant conversion, Ha/Angstrom^2 to J/m^2.
pub const HARTREE_PER_ANGSTROM2_TO_SI: f64 = HARTREE_J / (ANGSTROM_M * ANGSTROM_M);
