//! Configuration input and CSV, JSON and plot-script output.

pub mod config;
pub mod json;
pub mod plot;
pub mod table;

pub use config::{parse_config, serialize_config, ConfigDocument, JobConfig};
pub use json::{berry_json, eigen_json, ep_json, power_json, result_set_json, spectral_json, stability_json, JsonDocument};
pub use plot::{emit_plot_script, PlotKind};
pub use table::{
    berry_table, eigen_table, ep_table, fmt_float, power_table, result_set_table, spectral_table, stability_table, write_csv,
    Table,
};
