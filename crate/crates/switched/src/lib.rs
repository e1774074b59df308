pub mod certify;
pub mod design;
pub mod error;
pub mod linalg;
pub mod model;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
