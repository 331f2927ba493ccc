//! Tables and coverage maps.

mod csv;
pub mod fig13;
pub mod manifest;
mod svg;

pub use csv::{
    economics_csv, pathlengths_csv, payback_csv, spraymap_csv, volumes_csv,
    FieldResult,
};
pub use svg::{gray_level, render_svg};
