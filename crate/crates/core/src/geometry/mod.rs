//! Geometric probes of a bond configuration: first-passage distances on
//! the planar dual, renormalised good-site fields and coarse-graining.

mod fpp;
mod renorm;

pub use fpp::{dual_fpp_distance, fpp_regression, DualFppField, FppOptions, FppPair, FppProbe};
pub use renorm::{
    classify_good_vertices, coarse_grain, coupling_check, diameter_threshold, good_density_curve, renormalized_sites,
    window_radius, write_density_csv, CouplingReport, DensityRow, GoodSiteField, SiteRecord, SiteStatus, MIN_BLOCK,
};
