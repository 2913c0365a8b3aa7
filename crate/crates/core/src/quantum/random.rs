//! Seeded random quantum objects.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::quantum::state::ProbeState;
use crate::scalar::{cabs, CMatrix, CVector, Real, C};

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finaliser: a bijection on `u64` with good avalanche.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent stream derived from `base`.
pub fn stream_seed(base: u64, index: u64) -> u64 {
    mix64(base ^ index)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(T::lit(re), T::lit(im))
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `diag(R)` folded back into `Q`.
pub fn haar_random_unitary<T: Real>(dim: usize, seed: u64) -> CMatrix<T> {
    let mut rng = rng_from_seed(seed);
    haar_random_unitary_with(dim, &mut rng)
}

pub fn haar_random_unitary_with<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T> {
    let z = CMatrix::<T>::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = cabs(d);
        let phase = if n > T::zero() {
            d / C::new(n, T::zero())
        } else {
            C::new(T::one(), T::zero())
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Normalised complex Gaussian vector.
pub fn random_pure_state<T: Real>(dim: usize, seed: u64) -> ProbeState<T> {
    let mut rng = rng_from_seed(seed);
    random_pure_state_with(dim, &mut rng)
}

pub fn random_pure_state_with<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ProbeState<T> {
    if dim == 1 {
        return ProbeState::Pure(CVector::from_element(1, C::new(T::one(), T::zero())));
    }
    loop {
        let v = CVector::<T>::from_fn(dim, |_, _| gaussian(rng));
        let n = v.norm();
        if n > T::zero() {
            return ProbeState::Pure(v / C::new(n, T::zero()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ops::unitarity_defect;
    use crate::quantum::state::fidelity;

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        for seed in 0..5 {
            let u = haar_random_unitary::<f64>(4, seed);
            assert!(unitarity_defect(&u) < 1e-10);
            assert_eq!(u, haar_random_unitary::<f64>(4, seed));
        }
    }

    /// Kolmogorov-Smirnov check that a single eigenphase of a Haar U(2)
    /// element is uniform on [-π, π). Eigenvalues come from the 2x2
    /// characteristic polynomial, independent of the sampler.
    #[test]
    fn haar_eigenphases_are_uniform() {
        let n = 10_000;
        let mut pick = rng_from_seed(0xfeed);
        let mut phases: Vec<f64> = (0..n)
            .map(|i| {
                let u = haar_random_unitary::<f64>(2, stream_seed(17, i as u64));
                let tr = u[(0, 0)] + u[(1, 1)];
                let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
                let disc = (tr * tr - det * 4.0).sqrt();
                let lam = if pick.gen::<bool>() { (tr + disc) / 2.0 } else { (tr - disc) / 2.0 };
                lam.arg()
            })
            .collect();
        phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pi = std::f64::consts::PI;
        let d = phases
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = (x + pi) / (2.0 * pi);
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (cdf - lo).abs().max((hi - cdf).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic
        let critical = 1.628 / (n as f64).sqrt();
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }

    #[test]
    fn random_states() {
        for seed in 0..10 {
            let s = random_pure_state::<f64>(16, seed);
            assert!((s.weight() - 1.0).abs() < 1e-12);
            let t = random_pure_state::<f64>(16, seed + 100);
            assert!(fidelity(&s, &t).unwrap() < 0.999);
        }
        let one = random_pure_state::<f64>(1, 3);
        assert_eq!(one, ProbeState::basis(1, 0).unwrap());
    }

    #[test]
    fn stream_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| stream_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
