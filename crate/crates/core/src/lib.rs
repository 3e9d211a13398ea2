//! Direction-of-arrival estimation for sparse linear arrays.
//!
//! The pipeline lifts the observed samples of a non-uniform array into a
//! Hankel-type matrix, designs diagonal weights that minimize the leverage of
//! the missing positions, completes the full uniform array with a weighted
//! nuclear-norm ADMM, and finally extracts angles and amplitudes with a
//! matrix-pencil estimator.
//!
//! ```
//! use num_complex::Complex64;
//! use wlidoa::array_model::{synthesize, ArrayScene, NoiseLevel, Omega, SourceSet};
//! use wlidoa::doa::matrix_pencil;
//!
//! let sources = SourceSet::from_taus(&[(0.1, Complex64::new(1.0, 0.0))], 0.5).unwrap();
//! let scene = ArrayScene::new(15, Omega::full(15), NoiseLevel::NONE, 0).unwrap();
//! let y = synthesize(&sources, &scene).unwrap().y_full.unwrap();
//! let est = matrix_pencil(&y, 1, None, 1e-8).unwrap();
//! assert!((est.taus[0] - 0.1).abs() < 1e-8);
//! ```

pub mod array_model;
pub mod completion;
pub mod doa;
pub mod error;
pub mod harness;
pub mod io;
pub mod lifting;
mod linalg;
pub mod seed;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
