//! Execution helpers for embarrassingly parallel replicate work.
//!
//! Sweeps and Monte Carlo optimizers fan replicate jobs out with
//! [`map_jobs`], which runs on a rayon pool when the `parallel` feature is
//! enabled (the default) and degrades to a plain sequential loop otherwise.
//! Output order always matches input order, so results are deterministic
//! regardless of how the work is scheduled. [`map_jobs_seq`] is always
//! sequential and exists so the benchmark suite can compare both paths in
//! a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `jobs`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_jobs<I, O, F>(jobs: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    jobs.par_iter().map(f).collect()
}

/// Map `f` over `jobs`, in parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map_jobs<I, O, F>(jobs: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    jobs.iter().map(f).collect()
}

/// Sequential twin of [`map_jobs`].
pub fn map_jobs_seq<I, O, F>(jobs: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    jobs.iter().map(f).collect()
}

/// Mix a master seed with replicate coordinates into an independent
/// per-run seed.
///
/// The mix is a fixed splitmix64 chain over `(master, theta_idx,
/// replicate, stream)`. Paired comparisons (two strategies on the same
/// problem instance) pass the same `stream` so they see identical flip
/// sequences; unrelated experiments pick distinct streams.
pub fn mix_seed(master: u64, theta_idx: u64, replicate: u64, stream: u64) -> u64 {
    let mut state = master;
    for component in [theta_idx, replicate, stream] {
        state = splitmix64(state ^ splitmix64(component));
    }
    splitmix64(state)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_jobs_preserves_order() {
        let jobs: Vec<u64> = (0..1000).collect();
        let out = map_jobs(&jobs, |j| j * 2);
        let out_seq = map_jobs_seq(&jobs, |j| j * 2);
        assert_eq!(out, out_seq);
        assert_eq!(out[7], 14);
    }

    #[test]
    fn mix_seed_is_stable() {
        // Frozen values: the per-replicate seed derivation is part of the
        // reproducibility contract, so these must never change.
        assert_eq!(mix_seed(0, 0, 0, 0), 0x13f4_856a_498a_fda2);
        assert_eq!(mix_seed(42, 3, 7, 1), 0xd3ae_a04c_1a63_0cb5);
        assert_eq!(mix_seed(42, 3, 7, 2), 0xbc51_3da5_0450_fda7);
    }

    #[test]
    fn mix_seed_separates_components() {
        let base = mix_seed(1, 2, 3, 4);
        assert_ne!(base, mix_seed(2, 2, 3, 4));
        assert_ne!(base, mix_seed(1, 3, 3, 4));
        assert_ne!(base, mix_seed(1, 2, 4, 4));
        assert_ne!(base, mix_seed(1, 2, 3, 5));
    }
}
