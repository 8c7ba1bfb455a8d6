//! Quantities derived from the probability landscape: curve profiles and
//! their plateau widths, ridge extraction with the `alpha` fit, and the
//! robustness fields over the `(phi, alpha)` plane.

pub mod profile;
pub mod ridge;
pub mod robustness;

pub use profile::{curve_profile, curve_profile_with, width, CurveProfile, WidthMode, WidthResult};
pub use ridge::{extract_ridge, extract_ridge_field, fit_alpha, RidgePoint, DEFAULT_COLUMN_FLOOR};
pub use robustness::{
    fraction_below, p_of_phi_alpha, p_of_phi_alpha_with, probability_grid, ratio_map,
    region_around, sigma_p_from_probability, sigma_p_grid, sigma_p_prime,
    sigma_p_prime_from_profile, sigma_p_prime_with, snap_to_grid, FieldKind, PlaneGrid, Region,
    RobustnessGrid, SigmaPrime, P_FLOOR,
};
