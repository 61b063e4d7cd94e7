//! Three-dimensional complex FFT on an x-fastest cube, built from rustfft
//! line transforms. Transforms are unnormalised.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft(n, FftDirection::Forward),
            inverse: planner.plan_fft(n, FftDirection::Inverse),
        }
    }

    /// Shared plan for cubes of side `n`.
    pub fn get(n: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(n).or_insert_with(|| Arc::new(Fft3::new(n))).clone()
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn lines(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        // Chunks of whole planes keep scratch allocation per task small.
        data.par_chunks_mut(n * n).for_each(|plane| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(plane, &mut scratch);
        });
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let n2 = n * n;
        assert_eq!(data.len(), n2 * n, "buffer does not match the cube size");
        // x: contiguous lines.
        self.lines(data, plan);
        // y: transpose x↔y inside each z-plane.
        let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
        tmp.par_chunks_mut(n2).zip(data.par_chunks(n2)).for_each(|(t, d)| {
            for y in 0..n {
                for x in 0..n {
                    t[y + n * x] = d[x + n * y];
                }
            }
        });
        self.lines(&mut tmp, plan);
        data.par_chunks_mut(n2).zip(tmp.par_chunks(n2)).for_each(|(d, t)| {
            for x in 0..n {
                for y in 0..n {
                    d[x + n * y] = t[y + n * x];
                }
            }
        });
        // z: gather z-lines column by column.
        tmp.par_chunks_mut(n).enumerate().for_each(|(col, line)| {
            for (z, v) in line.iter_mut().enumerate() {
                *v = data[col + n2 * z];
            }
        });
        self.lines(&mut tmp, plan);
        data.par_chunks_mut(n2).enumerate().for_each(|(z, plane)| {
            for (col, v) in plane.iter_mut().enumerate() {
                *v = tmp[col * n + z];
            }
        });
    }
}
