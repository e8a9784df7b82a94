//! [`FftBackend`] on top of `rustfft`.

use std::sync::{Arc, Mutex};

use ewi_core::fft::{Fft1d, FftBackend};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Plans transforms with `rustfft`. Each plan owns its scratch buffer, so
/// plans held by different trajectories never contend.
#[derive(Clone)]
pub struct RustFft {
    planner: Arc<Mutex<FftPlanner<f64>>>,
}

impl RustFft {
    pub fn new() -> Self {
        Self {
            planner: Arc::new(Mutex::new(FftPlanner::new())),
        }
    }
}

impl Default for RustFft {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for RustFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("RustFft")
    }
}

pub struct RustFftPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Mutex<Vec<Complex64>>,
}

impl FftBackend for RustFft {
    type Plan = RustFftPlan;

    fn plan(&self, n: usize) -> RustFftPlan {
        let mut planner = self.planner.lock().expect("fft planner poisoned");
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        RustFftPlan {
            n,
            forward,
            inverse,
            scratch: Mutex::new(vec![Complex64::new(0.0, 0.0); len]),
        }
    }
}

impl RustFftPlan {
    fn process(&self, fft: &dyn Fft<f64>, buf: &mut [Complex64]) {
        assert_eq!(
            buf.len() % self.n,
            0,
            "buffer length is not a multiple of the plan"
        );
        let mut scratch = self.scratch.lock().expect("fft scratch poisoned");
        fft.process_with_scratch(buf, &mut scratch);
    }
}

impl Fft1d for RustFftPlan {
    fn len(&self) -> usize {
        self.n
    }

    fn forward(&self, buf: &mut [Complex64]) {
        self.process(self.forward.as_ref(), buf);
    }

    fn backward(&self, buf: &mut [Complex64]) {
        self.process(self.inverse.as_ref(), buf);
    }
}
