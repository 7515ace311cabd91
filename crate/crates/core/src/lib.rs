//! Construction and exact verification of real pairs (α₁, α₂) whose
//! positive-quadrant linear form ‖m₁α₁ + m₂α₂‖ stays above a power-law
//! floor, together with brute-force oracles and an empirical explorer for
//! the positive-approximation regime.

pub mod numerics;

pub mod constants;
pub mod lattice;

pub mod construction;
pub mod verify;

pub mod approx;

pub mod parallel;
