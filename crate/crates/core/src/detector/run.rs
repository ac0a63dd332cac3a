use std::borrow::Borrow;
use std::fmt;

use crate::{Error, Result};

/// Outcome of one detector step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alarm {
    pub time: usize,
    pub statistic: f64,
    /// Arg-max change-point estimate: the data after `khat` look shifted.
    pub khat: usize,
    pub fired: bool,
}

impl fmt::Display for Alarm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.time, self.statistic, self.khat, u8::from(self.fired))
    }
}

pub trait SequentialDetector {
    type Obs: ?Sized;

    /// Consumes one observation and advances time by one.
    fn step(&mut self, obs: &Self::Obs) -> Result<Alarm>;

    fn threshold(&self) -> f64;

    /// Number of observations consumed so far.
    fn time(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunOutcome {
    Fired(Alarm),
    /// Reached `horizon_cap` without an alarm; carries the last step.
    Capped(Alarm),
    /// The source ended first after `steps` observations.
    Exhausted { steps: usize, last: Option<Alarm> },
}

impl RunOutcome {
    pub fn fired(&self) -> Option<Alarm> {
        match self {
            RunOutcome::Fired(a) => Some(*a),
            _ => None,
        }
    }
}

/// Feeds `source` to `det` until it fires, `horizon_cap` steps have been
/// taken, or the source runs dry.
pub fn run_to_alarm<D, I, B>(det: &mut D, source: I, horizon_cap: usize) -> Result<RunOutcome>
where
    D: SequentialDetector,
    I: IntoIterator<Item = B>,
    B: Borrow<D::Obs>,
{
    if horizon_cap == 0 {
        return Err(Error::domain("horizon cap must be at least 1"));
    }
    let mut last = None;
    let mut steps = 0;
    for obs in source {
        let a = det.step(obs.borrow())?;
        steps += 1;
        if a.fired {
            return Ok(RunOutcome::Fired(a));
        }
        if steps >= horizon_cap {
            return Ok(RunOutcome::Capped(a));
        }
        last = Some(a);
    }
    Ok(RunOutcome::Exhausted { steps, last })
}
