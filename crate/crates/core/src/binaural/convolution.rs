use alloc::vec;
use alloc::vec::Vec;

/// Streaming direct-form FIR filter.
///
/// Every output sample is summed over the taps in the same order whatever the
/// block boundaries are, so splitting a signal into blocks gives bit-identical
/// results to processing it in one call.
#[derive(Debug, Clone, PartialEq)]
pub struct Convolver {
    ir: Vec<f64>,
    /// Last `taps - 1` inputs, oldest first.
    history: Vec<f64>,
    scratch: Vec<f64>,
}

impl Convolver {
    pub fn new(ir: Vec<f64>) -> Self {
        let ir = if ir.is_empty() { vec![0.0] } else { ir };
        let history = vec![0.0; ir.len() - 1];
        Self {
            ir,
            history,
            scratch: Vec::new(),
        }
    }

    pub fn taps(&self) -> usize {
        self.ir.len()
    }

    pub fn ir(&self) -> &[f64] {
        &self.ir
    }

    pub fn reset(&mut self) {
        self.history.iter_mut().for_each(|x| *x = 0.0);
    }

    /// Filters `input`, writing one output sample per input sample.
    pub fn process(&mut self, input: &[f64], output: &mut [f64]) {
        assert_eq!(input.len(), output.len(), "block length mismatch");
        let tail = self.history.len();
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.history);
        self.scratch.extend_from_slice(input);
        let ext = &self.scratch;
        let taps = self.ir.len();
        for (n, out) in output.iter_mut().enumerate() {
            // ext[tail + n - k] for k in 0..taps, walked backwards in memory
            let window = &ext[n..n + taps];
            let mut acc = 0.0;
            for (h, x) in self.ir.iter().zip(window.iter().rev()) {
                acc += h * x;
            }
            *out = acc;
        }
        let len = ext.len();
        self.history.copy_from_slice(&ext[len - tail..]);
    }

    /// Adds the filtered `input` into `output`.
    pub fn process_add(&mut self, input: &[f64], output: &mut [f64]) {
        let mut tmp = vec![0.0; input.len()];
        self.process(input, &mut tmp);
        for (o, t) in output.iter_mut().zip(tmp) {
            *o += t;
        }
    }

    pub fn process_vec(&mut self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; input.len()];
        self.process(input, &mut out);
        out
    }

    /// The remaining `taps - 1` samples of the response to everything fed
    /// so far; leaves the filter reset.
    pub fn flush(&mut self) -> Vec<f64> {
        let zeros = vec![0.0; self.history.len()];
        let out = self.process_vec(&zeros);
        self.reset();
        out
    }
}
