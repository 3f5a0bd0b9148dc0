pub mod error;
pub mod field;
pub mod geom;
pub mod presets;
pub mod surface;
pub mod action;
pub mod tracer;
pub mod cylinder;
pub mod cover;
pub mod census;
pub mod io;
