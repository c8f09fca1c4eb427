pub mod counterexample;
pub mod hilbert;
pub mod instances;
pub mod norms;
pub mod report;
pub mod theorems;
