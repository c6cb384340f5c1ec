pub mod error;
pub mod extension;
pub mod families;
pub mod kelvin;
pub mod oracle;
pub mod padic;
pub mod report;
pub mod residue;
pub mod sample;
pub mod schwartz;
pub mod shells;
pub mod spectral;
pub mod suites;
pub mod symbolic;
pub mod vt;

pub use error::{Error, Result};
pub use padic::PAdic;
