use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Seeded random source with independent substreams.
///
/// Each (seed, stream_id) pair selects one ChaCha20 keystream; streams sharing a seed
/// never overlap, so replications can be assigned ids up front and run in any order.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and a different id.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    /// Uniform on the open interval (0,1).
    pub fn open01(&mut self) -> f64 {
        loop {
            // 53 random bits; reject the single zero value
            let x = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if x > 0.0 {
                return x;
            }
        }
    }

    /// Standard exponential.
    pub fn exp1(&mut self) -> f64 {
        -self.open01().ln()
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
