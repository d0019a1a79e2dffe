//! Conformal prediction sets for metric-space-valued responses.
//!
//! Responses live in a metric space (scalars, vectors, the unit sphere,
//! one-dimensional distributions, networks, the 3-spider tree space) and are
//! paired with Euclidean predictors. Conformity is measured by conditional
//! profile scores: the conditional CDF of profile average transport costs,
//! estimated by local linear smoothing of distance-profile indicators. The
//! split conformal algorithm turns these scores into prediction sets with
//! asymptotic conditional validity.
//!
//! The crate is organized along the pipeline:
//! - [`spaces`]: object spaces, distances, Fréchet means, candidate grids;
//! - [`transport`]: the transport-map algebra used by distributional data;
//! - [`kernel`] and [`smooth`]: local linear machinery;
//! - [`profiles`]: distance profiles, transport costs, profile scores;
//! - [`conformal`]: split calibration, prediction sets, coverage reports;
//! - [`single_index`]: single-index Fréchet regression for multivariate
//!   predictors;
//! - [`simulate`]: seeded data generators and the Monte Carlo harness;
//! - [`dataset`]: the on-disk dataset format.
//!
//! ```
//! use conformal_objects::conformal::{predict_set, split_fit, FitConfig};
//! use conformal_objects::simulate::{generate, GeneratorSpec, SettingId};
//! use conformal_objects::spaces::{candidate_grid, GridBounds, MetricSpaceDescriptor};
//!
//! let data = generate(&GeneratorSpec {
//!     setting: SettingId::ScalarHomoscedastic,
//!     n: 400,
//!     seed: 7,
//! })?;
//! let model = split_fit(&data, &FitConfig::default(), 0.1, 42)?;
//! let grid = candidate_grid(
//!     &MetricSpaceDescriptor::euclidean(1),
//!     200,
//!     &GridBounds::Interval(-1.5, 3.5),
//! )?;
//! let set = predict_set(&model, 0.0, &grid)?;
//! assert!(set.member_count() > 0);
//! # Ok::<(), conformal_objects::Error>(())
//! ```

pub mod conformal;
pub mod dataset;
pub mod error;
pub mod kernel;
pub mod profiles;
pub mod simulate;
pub mod single_index;
pub mod smooth;
pub mod spaces;
pub mod transport;

pub use error::{Error, Result};
