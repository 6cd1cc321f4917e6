pub mod analysis;
pub mod cli;
pub mod data;
pub mod interval;
pub mod oracle;
pub mod predicates;
pub mod seeding;
pub mod slicer;
