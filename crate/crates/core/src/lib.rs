pub mod blass;
pub mod cgames;
pub mod logic;
pub mod process;
pub mod proofs;
