//! Streaming windowed GLR detectors, small-instance oracles and a
//! multivariate CUSUM baseline.

mod cusum;
mod fixed;
mod missing;
mod oracle;
mod run;
mod stream;

pub use cusum::CusumBaseline;
pub use fixed::{FixedSketchDetector, WindowedGlr, Whitener};
pub use missing::{MaskedSample, MissingDataDetector};
pub use oracle::{glr_direct, glr_direct_max, glr_timevarying_pinv};
pub use run::{run_to_alarm, Alarm, RunOutcome, SequentialDetector};
pub use stream::{parse_stream_row, ALARM_CSV_HEADER};
