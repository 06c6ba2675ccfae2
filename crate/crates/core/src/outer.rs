//! The correction loop shared by all joint estimators: form the residual,
//! estimate the symbol errors, re-slice, until the decisions stop changing.

use crate::demodulator::{demodulate_initial, redemodulate, residual};
use crate::error::Result;
use crate::harness::metrics::ser;
use crate::linalg::C64;
use crate::receiver::Receiver;
use crate::signal_model::FreqObservation;

pub(crate) struct OuterOutcome<S> {
    pub symbols: Vec<C64>,
    pub correction: Vec<C64>,
    pub state: Option<S>,
    pub passes: usize,
    pub converged: bool,
    pub ser_trace: Option<Vec<f64>>,
    pub flagged: Vec<usize>,
}

/// `estimate(z, pass, previous_state)` returns the symbol-error estimate
/// and the solver state of that pass.
pub(crate) fn run_outer<S, F>(
    obs: &FreqObservation,
    rx: &Receiver,
    max_outer: usize,
    truth: Option<&[C64]>,
    mut estimate: F,
) -> Result<OuterOutcome<S>>
where
    F: FnMut(&[C64], usize, Option<&S>) -> Result<(Vec<C64>, S)>,
{
    let initial = demodulate_initial(obs, &rx.channel, &rx.constellation)?;
    let mut symbols = initial.symbols;
    let mut ser_trace = truth.map(|t| vec![ser(t, &symbols)]);
    let mut state: Option<S> = None;
    let mut correction = vec![C64::new(0.0, 0.0); symbols.len()];
    let mut passes = 0;
    let mut converged = false;
    while passes < max_outer {
        passes += 1;
        let z = residual(obs, &symbols, &rx.channel)?;
        let (v, s) = estimate(&z, passes, state.as_ref())?;
        let next = redemodulate(&symbols, &v, &rx.constellation);
        correction = v;
        state = Some(s);
        let fixed = next == symbols;
        symbols = next;
        if let (Some(trace), Some(t)) = (ser_trace.as_mut(), truth) {
            trace.push(ser(t, &symbols));
        }
        if fixed {
            converged = true;
            break;
        }
    }
    Ok(OuterOutcome {
        symbols,
        correction,
        state,
        passes,
        converged,
        ser_trace,
        flagged: initial.flagged,
    })
}
