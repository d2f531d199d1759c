pub mod dense;
pub mod programs;
