//! Configuration, parameter sweeps and table output behind the `giantwg`
//! command.

pub mod config;
pub mod emit;
pub mod sweep;

pub use config::{parse_config, Axis, Config, ConfigError, Format, Param, PhiRule, Point, Scale, SweepSpec, Target, ThetaRule};
pub use emit::{emit, write_csv, write_json, EmitError};
pub use sweep::{frame_phase_points, run_sweep, Metadata, Record, SweepResult, VERSION};
