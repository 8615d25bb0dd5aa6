pub mod build;
pub mod features;
pub mod guidance;
pub mod model;
