pub mod analytic;
pub mod gaussian;
pub mod model;
pub mod montecarlo;
pub mod sweeps;
pub mod verify;
