//! Observables computed from an event log or a graph: global time series,
//! power spectra, degree statistics, assortativity and circumplex maps.

pub mod assortativity;
pub mod circumplex;
pub mod degrees;
pub mod series;
pub mod spectrum;

pub use assortativity::{assortativity, knn_curve, knn_slope, KnnPoint};
pub use circumplex::{circumplex_map, circumplex_point, CircumplexGrid};
pub use degrees::{degree_distributions, DegreeFits, DegreeHistogram, PartitionDegrees};
pub use series::{build_series, SeriesBundle, SERIES_NAMES};
pub use spectrum::{power_spectrum, power_spectrum_segmented, SlopeFit, Spectrum};
