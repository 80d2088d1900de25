//! Gravity-prior minimal solvers for rotation-only panoramic stitching.

pub mod cli;
pub mod constraints;
pub mod geom;
pub mod poly;
pub mod polymat;
pub mod refine;
pub mod robust;
pub mod solvers;
pub mod synth;

/// Mixes a master seed with a stream index into an independent stream seed
/// (splitmix64 finalizer). Used wherever per-trial or per-iteration RNGs
/// must be derivable out of order.
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
