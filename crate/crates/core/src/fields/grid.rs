use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic cube `[0, L)³` sampled on `n³` points, x-fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub n: usize,
    #[serde(rename = "box")]
    pub box_len: f64,
}

/// Lattice wavevector data handed to multipliers.
///
/// `k_odd` equals `k` with the Nyquist component zeroed; odd operators
/// (derivatives, the Hodge split) use it so that they map real fields to
/// real fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub k: [f64; 3],
    pub r: f64,
    pub k_odd: [f64; 3],
    pub r_odd: f64,
}

impl BoxGrid {
    pub fn new(n: usize, box_len: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!("grid size must be a power of two >= 8, got {n}")));
        }
        if !(box_len > 0.0) || !box_len.is_finite() {
            return Err(Error::InvalidInput(format!("box length must be positive and finite, got {box_len}")));
        }
        Ok(Self { n, box_len })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Lattice spacing in frequency, `Δ = 2π/L`.
    #[inline]
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_len
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.box_len / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(3)
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n * (iy + self.n * iz)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    /// Signed frequency index in `{−n/2, …, n/2−1}`.
    #[inline]
    pub fn freq(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Signed frequency indices of a flat index.
    #[inline]
    pub fn freqs(&self, idx: usize) -> [i64; 3] {
        let [x, y, z] = self.coords(idx);
        [self.freq(x), self.freq(y), self.freq(z)]
    }

    /// `|m|²` for the integer lattice vector of `idx`.
    #[inline]
    pub fn shell_index(&self, idx: usize) -> i64 {
        let m = self.freqs(idx);
        m[0] * m[0] + m[1] * m[1] + m[2] * m[2]
    }

    /// `|m_odd|²` with Nyquist components dropped.
    #[inline]
    pub fn shell_index_odd(&self, idx: usize) -> i64 {
        let nyq = -(self.n as i64 / 2);
        self.freqs(idx).iter().filter(|&&m| m != nyq).map(|m| m * m).sum()
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    pub fn wave(&self, idx: usize) -> Wave {
        let dk = self.dk();
        let [x, y, z] = self.coords(idx);
        let ids = [x, y, z];
        let k: [f64; 3] = std::array::from_fn(|a| self.freq(ids[a]) as f64 * dk);
        let k_odd: [f64; 3] = std::array::from_fn(|a| if self.is_nyquist(ids[a]) { 0.0 } else { k[a] });
        let r = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let r_odd = (k_odd[0] * k_odd[0] + k_odd[1] * k_odd[1] + k_odd[2] * k_odd[2]).sqrt();
        Wave { k, r, k_odd, r_odd }
    }

    /// Index of the mode `−m`.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.n;
        let [x, y, z] = self.coords(idx);
        self.index((n - x) % n, (n - y) % n, (n - z) % n)
    }

    /// Largest retained frequency index per axis under the 2/3 rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        self.n as i64 / 3
    }

    #[inline]
    pub fn is_retained(&self, idx: usize) -> bool {
        let c = self.dealias_cutoff();
        self.freqs(idx).iter().all(|m| m.abs() <= c)
    }

    /// Largest `|ξ|` among retained modes.
    pub fn max_retained_r(&self) -> f64 {
        3f64.sqrt() * self.dealias_cutoff() as f64 * self.dk()
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.dx();
        self.coords(idx).map(|i| i as f64 * h)
    }

    pub fn check_same(&self, other: &BoxGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "grid n={} L={} vs n={} L={}",
                self.n, self.box_len, other.n, other.box_len
            )))
        }
    }
}
