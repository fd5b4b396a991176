//! Seeded randomness for the samplers.
//!
//! A [`RandomSource`] hands out one independent stream per candidate of a
//! batch. Candidate `i` of a batch only ever consumes draws from stream `i`,
//! so a batch can be generated in any order (or in parallel) and still be
//! reproduced exactly from the seed.

use rand::{Rng, RngExt, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::operators::{rotate_rows, BoundedDomain, RowSource};

/// The random coefficients one candidate needs.
pub trait Draws {
    /// Fills `out` with draws from the uniform distribution on `[-1, 1]`.
    fn fill_signed(&mut self, out: &mut [f64]);
    /// Uniform draw on `[0, 1]`.
    fn unit(&mut self) -> f64;
    fn standard_normal(&mut self) -> f64;
    /// Uniform index in `0..n`.
    fn axis(&mut self, n: usize) -> usize;

    /// Rotates `x` by a matrix whose rows are drawn in order with
    /// [`Draws::fill_signed`]. `row` is scratch space of length `x.len()`.
    fn rotate_into(&mut self, x: &[f64], alpha: f64, row: &mut [f64], out: &mut [f64])
    where
        Self: Sized,
    {
        rotate_rows(x, alpha, row, out, &mut DrawRows(self));
    }
}

struct DrawRows<'a, D>(&'a mut D);

impl<D: Draws> RowSource for DrawRows<'_, D> {
    fn next_row(&mut self, row: &mut [f64]) {
        self.0.fill_signed(row);
    }
}

/// Produces the per-candidate streams of successive batches.
pub trait DrawSource {
    type Stream: Draws;

    /// Opens a new batch of `len` candidate streams.
    fn batch(&mut self, len: usize) -> Vec<Self::Stream>;
}

const TWO_POW_MINUS_31: f64 = 1.0 / 2147483648.0;

const LANES: usize = 16;

/// Sixteen interleaved xoshiro128++ generators, laid out so that one step of
/// all lanes vectorizes. Lane `l` yields exactly the sequence of
/// `Xoshiro128PlusPlus` started from the same state.
#[derive(Debug, Clone)]
pub(crate) struct Lanes {
    s: [[u32; LANES]; 4],
}

impl Lanes {
    fn from_seeder(seeder: &mut Xoshiro256PlusPlus) -> Self {
        let mut s = [[0u32; LANES]; 4];
        for word in s.iter_mut() {
            for v in word.iter_mut() {
                *v = seeder.next_u32();
            }
        }
        Lanes { s }
    }

    #[inline(always)]
    fn step(&mut self) -> [u32; LANES] {
        let [s0, s1, s2, s3] = &mut self.s;
        let mut out = [0u32; LANES];
        for l in 0..LANES {
            out[l] = s0[l].wrapping_add(s3[l]).rotate_left(7).wrapping_add(s0[l]);
            let t = s1[l] << 9;
            s2[l] ^= s0[l];
            s3[l] ^= s1[l];
            s1[l] ^= s2[l];
            s0[l] ^= s3[l];
            s2[l] ^= t;
            s3[l] = s3[l].rotate_left(11);
        }
        out
    }

    /// One step per sixteen draws; a partial tail still consumes a full step.
    /// Each 32-bit output maps onto a grid of 2^32 points spanning [-1, 1).
    #[inline(always)]
    fn fill_signed(&mut self, out: &mut [f64]) {
        let mut chunks = out.chunks_exact_mut(LANES);
        for chunk in &mut chunks {
            let bits = self.step();
            for l in 0..LANES {
                chunk[l] = (bits[l] as i32) as f64 * TWO_POW_MINUS_31;
            }
        }
        let tail = chunks.into_remainder();
        if !tail.is_empty() {
            let bits = self.step();
            for (v, b) in tail.iter_mut().zip(bits) {
                *v = (b as i32) as f64 * TWO_POW_MINUS_31;
            }
        }
    }
}

impl RowSource for Lanes {
    #[inline(always)]
    fn next_row(&mut self, row: &mut [f64]) {
        self.fill_signed(row);
    }
}

/// Stream backing one candidate.
#[derive(Debug, Clone)]
pub struct CandidateStream {
    lanes: Lanes,
    scalar: Xoshiro256PlusPlus,
}

impl CandidateStream {
    fn from_seed(seed: u64) -> Self {
        let mut seeder = Xoshiro256PlusPlus::seed_from_u64(seed);
        CandidateStream {
            lanes: Lanes::from_seeder(&mut seeder),
            scalar: Xoshiro256PlusPlus::seed_from_u64(seeder.next_u64()),
        }
    }
}

impl Draws for CandidateStream {
    fn fill_signed(&mut self, out: &mut [f64]) {
        self.lanes.fill_signed(out);
    }

    fn unit(&mut self) -> f64 {
        self.scalar.random::<f64>()
    }

    fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.scalar)
    }

    fn axis(&mut self, n: usize) -> usize {
        self.scalar.random_range(0..n)
    }

    fn rotate_into(&mut self, x: &[f64], alpha: f64, row: &mut [f64], out: &mut [f64]) {
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx2") {
                // SAFETY: AVX2 support was just detected.
                unsafe { rotate_avx2(self, x, alpha, row, out) };
                return;
            }
        }
        rotate_stream(self, x, alpha, row, out);
    }
}

#[inline(always)]
fn rotate_stream(s: &mut CandidateStream, x: &[f64], alpha: f64, row: &mut [f64], out: &mut [f64]) {
    rotate_rows(x, alpha, row, out, &mut s.lanes);
}

// Same arithmetic as `rotate_stream`, compiled with wider vectors. No fused
// multiply-add is enabled, so results are bit-identical.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn rotate_avx2(s: &mut CandidateStream, x: &[f64], alpha: f64, row: &mut [f64], out: &mut [f64]) {
    rotate_stream(s, x, alpha, row, out);
}

/// Seeded source of all randomness in one optimization run.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    master: Xoshiro256PlusPlus,
    batches: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            master: Xoshiro256PlusPlus::seed_from_u64(seed),
            batches: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of batches opened so far.
    pub fn batches(&self) -> u64 {
        self.batches
    }

    /// Uniform point in the box.
    pub fn uniform_point(&mut self, dom: &BoundedDomain) -> Vec<f64> {
        dom.lower()
            .iter()
            .zip(dom.upper())
            .map(|(&l, &u)| l + (u - l) * self.master.random::<f64>())
            .collect()
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl DrawSource for RandomSource {
    type Stream = CandidateStream;

    fn batch(&mut self, len: usize) -> Vec<CandidateStream> {
        self.batches += 1;
        let key = self.master.next_u64();
        (0..len as u64)
            .map(|i| {
                let s = mix(key.wrapping_add(i.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
                CandidateStream::from_seed(s)
            })
            .collect()
    }
}
