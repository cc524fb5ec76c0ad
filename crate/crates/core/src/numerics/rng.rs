use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Seeded, reproducible random stream.
///
/// Backed by ChaCha8 (a counter-based generator with identical output on
/// every platform). Gaussian draws use the ziggurat sampler from
/// `rand_distr`. Child streams are derived with [`RandomSource::split`]:
/// each child gets a key mixed from the parent seed and the stream id, plus
/// the id as its ChaCha stream number, so siblings never share output.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream. Does not advance `self`.
    pub fn split(&self, stream: u64) -> Self {
        let seed = splitmix64(self.seed ^ splitmix64(stream.wrapping_add(0x9e37_79b9)));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, rng }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `dim` i.i.d. samples from N(0, sigma²).
pub fn gaussian_vector(rng: &mut RandomSource, dim: usize, sigma: f64) -> Vec<f64> {
    (0..dim).map(|_| sigma * rng.standard_normal()).collect()
}
