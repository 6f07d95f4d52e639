pub mod access;
pub mod certificate;
pub mod chainrec;
pub mod cli;
pub mod error;
pub mod fiber;
pub mod invariants;
pub mod system;
pub mod torus;
