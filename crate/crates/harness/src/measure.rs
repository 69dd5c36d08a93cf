//! Peak memory and wall time of one inference pass.

use std::time::{Duration, Instant};

use skysweep_diffcore::{memory, Element, ParamStore};
use skysweep_planesweep::DepthPlan;
use skysweep_rednet::{forward_volume, ProbabilityVolume, RedNet, UnitInput};

use crate::error::Result;

pub struct Measurement<T> {
    /// High-water mark of tensor bytes allocated during the pass, above
    /// what was live when it started (parameters, inputs). The returned
    /// volume is not a tensor and is not counted.
    pub peak_bytes: usize,
    pub elapsed: Duration,
    pub volume: ProbabilityVolume<T>,
}

/// Runs the inference forward pass once on the calling thread.
pub fn measure_run<T: Element>(
    net: &RedNet,
    store: &ParamStore<T>,
    input: &UnitInput<T>,
    plan: &DepthPlan,
) -> Result<Measurement<T>> {
    memory::reset_peak();
    let baseline = memory::live_bytes();
    let start = Instant::now();
    let volume = forward_volume(net, store, input, plan)?;
    let elapsed = start.elapsed();
    let peak_bytes = memory::peak_bytes().saturating_sub(baseline);
    Ok(Measurement { peak_bytes, elapsed, volume })
}
