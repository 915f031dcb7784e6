//! Entanglement spectra, Wick violation and interaction distance.

mod entanglement;
mod free;
mod wick;

pub use entanglement::{
    entropy, reduced_density_matrix, schmidt_matrix, EntanglementData, SPECTRUM_CUTOFF,
};
pub use free::{
    conjectured_max, default_modes, free_many_body_spectrum, interaction_distance, DistanceOptions,
    FreeFit, InteractionDistance, BOUND_SLACK, DEFAULT_MODE_CAP, MAX_MODES,
};
pub use wick::{pure_three_site, wick_terms, wick_violation, ThreeSiteRdm, WickTerms, WickTriple};
