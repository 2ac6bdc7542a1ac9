pub mod error;
pub mod fock;
pub mod hamiltonians;
pub mod interferometer;
pub mod matrix;
pub mod model;
pub mod optimizers;
pub mod permanent;
pub mod rng;
pub mod runner;
pub mod tasks;
pub mod training;
