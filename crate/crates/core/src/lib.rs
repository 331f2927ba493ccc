pub mod economics;
pub mod field_io;
pub mod geometry;
pub mod planner;
pub mod report;
pub mod simulator;
pub mod switching;
