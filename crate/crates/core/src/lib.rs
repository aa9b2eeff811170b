pub mod analyzer;
pub mod attacks;
pub mod devices;
pub mod photonic;
pub mod protocol;
pub mod reports;
