//! Deterministic Halton low-discrepancy points.

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton sequence in `[0,1)^dim`, starting after `skip` points.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, skip: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton dimension {dim} not supported");
        Halton { dim, index: skip + 1 }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        PRIMES[..self.dim].iter().map(|&p| radical_inverse(i, p)).collect()
    }
}
