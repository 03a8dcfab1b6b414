//! Counter-based random streams.
//!
//! Every task in a run draws from its own ChaCha8 keystream, addressed by the
//! pair `(seed, stream_id)`. ChaCha is a counter-mode generator, so two
//! streams with different ids never overlap and the numbers a task sees do
//! not depend on which worker executes it or in what order.

use rand::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::Result;
use rand_chacha::ChaCha8Rng;

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct StreamRng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl StreamRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            inner,
            seed,
            stream: stream_id,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Derives an independent child stream. Children of different parents
    /// with the same label are distinct because the parent id is mixed in.
    pub fn substream(&self, label: u64) -> Self {
        Self::new(self.seed, mix64(self.stream ^ mix64(label.wrapping_add(0x9E37_79B9_7F4A_7C15))))
    }
}

impl RngCore for StreamRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splits `total` items into consecutive tasks of at most `chunk` items.
/// Returns `(task_id, offset, len)` triples; task ids are stable for a
/// given `(total, chunk)` so results can be reassembled in order.
pub fn task_partition(total: usize, chunk: usize) -> Vec<(u64, usize, usize)> {
    let chunk = chunk.max(1);
    (0..total.div_ceil(chunk))
        .map(|t| {
            let offset = t * chunk;
            (t as u64, offset, chunk.min(total - offset))
        })
        .collect()
}

/// Runs `total` items split into tasks of `chunk` items on the rayon pool.
/// Task `t` draws from `StreamRng::new(seed, label).substream(t)`, and the
/// results are concatenated in task order, so the output does not depend
/// on the number of workers.
pub fn run_tasks<T, F>(seed: u64, label: u64, total: usize, chunk: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng, usize) -> Result<Vec<T>> + Sync,
{
    let root = StreamRng::new(seed, label);
    let parts: Vec<Result<Vec<T>>> = task_partition(total, chunk)
        .into_par_iter()
        .map(|(task, _, len)| {
            let mut rng = root.substream(task);
            f(&mut rng, len)
        })
        .collect();
    let mut out = Vec::with_capacity(total);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_address_same_numbers() {
        let mut a = StreamRng::new(7, 3);
        let mut b = StreamRng::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = StreamRng::new(7, 3);
        let mut b = StreamRng::new(7, 4);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
        let mut c = StreamRng::new(8, 3);
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_ne!(xs, zs);
    }

    #[test]
    fn substreams_are_deterministic() {
        let parent = StreamRng::new(11, 0);
        let mut a = parent.substream(5);
        let mut b = parent.substream(5);
        let mut c = parent.substream(6);
        let x: f64 = a.random();
        assert_eq!(x, b.random::<f64>());
        assert_ne!(x, c.random::<f64>());
    }

    #[test]
    fn tasks_are_independent_of_pool_size() {
        let f = |rng: &mut StreamRng, len: usize| Ok((0..len).map(|_| rng.next_u64()).collect::<Vec<_>>());
        let a = run_tasks(9, 1, 1000, 64, f).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_tasks(9, 1, 1000, 64, f).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
    }

    #[test]
    fn partition_covers_everything() {
        let parts = task_partition(10, 4);
        assert_eq!(parts, vec![(0, 0, 4), (1, 4, 4), (2, 8, 2)]);
        assert!(task_partition(0, 4).is_empty());
    }
}
