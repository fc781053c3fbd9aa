//! Genus estimation for closed surfaces sampled as point clouds.
//!
//! The height distribution of the sample gives the area function
//! S(h) = area{z <= h} / total area. Its derivative has a jump at every
//! local minimum or maximum of the height and a logarithmic cusp at every
//! saddle, so counting those features yields the Morse numbers, and the Morse
//! relations turn them into b1 and the genus.

pub mod areafn;
pub mod critdetect;
pub mod error;
pub mod io;
pub mod morse;
pub mod resample;
pub mod surfaces;
pub mod vroracle;

pub use error::{Error, Result};
