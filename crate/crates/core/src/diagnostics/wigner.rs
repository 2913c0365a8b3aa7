//! Wigner quasi-probability of a truncated oscillator state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::ops::hermiticity_defect;
use crate::scalar::{CMatrix, Real};

/// Largest tolerated `|∫∫ W dq dp − 1|` on the evaluation grid.
pub const NORMALIZATION_TOL: f64 = 1e-3;
const TRACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid<T: Real> {
    pub q: Vec<T>,
    pub p: Vec<T>,
    /// `values[i][j] = W(q[i], p[j])`.
    pub values: Vec<Vec<T>>,
}

impl<T: Real> WignerGrid<T> {
    /// Trapezoidal `∫∫ W dq dp` over the grid.
    pub fn integral(&self) -> T {
        let row: Vec<T> = self.values.iter().map(|r| trapezoid(&self.p, r)).collect();
        trapezoid(&self.q, &row)
    }

    /// `∫ W(q, p) dp` for each `q`.
    pub fn position_marginal(&self) -> Vec<T> {
        self.values.iter().map(|r| trapezoid(&self.p, r)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .flatten()
            .fold(T::zero(), |m, &w| m.max(w.abs()))
    }
}

fn trapezoid<T: Real>(x: &[T], y: &[T]) -> T {
    let half = T::lit(0.5);
    x.windows(2)
        .zip(y.windows(2))
        .fold(T::zero(), |acc, (xs, ys)| acc + half * (xs[1] - xs[0]) * (ys[0] + ys[1]))
}

/// Half-width the grid must cover for a state with photon cutoff `n_max`.
pub fn required_extent(n_max: usize) -> f64 {
    (2.0 * n_max as f64).sqrt() + 3.0
}

fn check_axis<T: Real>(name: &'static str, axis: &[T], extent: f64) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::param(name, "needs at least two grid points"));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param(name, "grid must be strictly increasing"));
    }
    let lo = axis[0].to_f64_lossy();
    let hi = axis[axis.len() - 1].to_f64_lossy();
    let slack = 1e-9 * extent;
    if lo > -extent + slack || hi < extent - slack {
        return Err(Error::param(
            name,
            format!("grid [{lo}, {hi}] must cover ±{extent:.4} for this cutoff"),
        ));
    }
    Ok(())
}

/// Evaluates `W(q, p) = (1/π) Tr[ρ D(α) (−1)^N D(α)†]`, `α = (q + i p)/√2`,
/// from the generalised-Laguerre expansion of the displaced parity.
pub fn wigner<T: Real>(rho: &CMatrix<T>, q: &[T], p: &[T]) -> Result<WignerGrid<T>> {
    let dim = rho.nrows();
    if dim == 0 || rho.ncols() != dim {
        return Err(Error::Dimension(format!("density matrix is {}x{}", rho.nrows(), rho.ncols())));
    }
    let trace = rho.trace();
    if (trace.re - T::one()).abs() > T::lit(TRACE_TOL) || trace.im.abs() > T::lit(TRACE_TOL) {
        return Err(Error::param("rho", "must have unit trace"));
    }
    if hermiticity_defect(rho) > T::lit(TRACE_TOL) {
        return Err(Error::param("rho", "must be Hermitian"));
    }
    let extent = required_extent(dim - 1);
    check_axis("q", q, extent)?;
    check_axis("p", p, extent)?;

    let values: Vec<Vec<T>> = q
        .par_iter()
        .map(|&qi| p.iter().map(|&pj| wigner_point(rho, qi, pj)).collect())
        .collect();
    let grid = WignerGrid {
        q: q.to_vec(),
        p: p.to_vec(),
        values,
    };
    if grid.values.iter().flatten().any(|w| !w.is_finite()) {
        return Err(Error::Numerical("Wigner expansion overflowed; lower the photon cutoff".into()));
    }
    let norm = grid.integral();
    if (norm - T::one()).abs() > T::lit(NORMALIZATION_TOL) {
        return Err(Error::Numerical(format!(
            "Wigner function integrates to {} on this grid; refine the grid",
            norm.to_f64_lossy()
        )));
    }
    Ok(grid)
}

fn wigner_point<T: Real>(rho: &CMatrix<T>, q: T, p: T) -> T {
    let dim = rho.nrows();
    let two = T::lit(2.0);
    let inv_sqrt2 = T::one() / two.sqrt();
    let (ar, ai) = (q * inv_sqrt2, p * inv_sqrt2);
    let r2 = ar * ar + ai * ai;
    let x = T::lit(4.0) * r2;
    // 2α as (re, im); powers accumulated per off-diagonal order k.
    let (br, bi) = (two * ar, two * ai);
    let mut pow = (T::one(), T::zero());
    let mut total = T::zero();
    let mut lag = vec![T::zero(); dim];
    for k in 0..dim {
        laguerre_column(k, x, dim - k, &mut lag);
        // coef_n = √(n!/(n+k)!) running product over n.
        let mut coef = T::one();
        for j in 1..=k {
            coef /= T::from_usize(j).expect("fits").sqrt();
        }
        let mut sum = T::zero();
        for n in 0..dim - k {
            if n > 0 {
                coef *= (T::from_usize(n).expect("fits") / T::from_usize(n + k).expect("fits")).sqrt();
            }
            let sign = if n % 2 == 0 { T::one() } else { -T::one() };
            let z = rho[(n, n + k)];
            // Re(ρ_{n,n+k} (2α)^k)
            let re = z.re * pow.0 - z.im * pow.1;
            sum += sign * coef * lag[n] * re;
        }
        total += if k == 0 { sum } else { two * sum };
        pow = (pow.0 * br - pow.1 * bi, pow.0 * bi + pow.1 * br);
    }
    total * (-two * r2).exp() / T::pi()
}

/// `L_n^{(k)}(x)` for `n = 0..len` into `out[..len]`.
fn laguerre_column<T: Real>(k: usize, x: T, len: usize, out: &mut [T]) {
    if len == 0 {
        return;
    }
    let kf = T::from_usize(k).expect("fits");
    out[0] = T::one();
    if len > 1 {
        out[1] = T::one() + kf - x;
    }
    for n in 1..len.saturating_sub(1) {
        let nf = T::from_usize(n).expect("fits");
        out[n + 1] = ((T::lit(2.0) * nf + T::one() + kf - x) * out[n] - (nf + kf) * out[n - 1]) / (nf + T::one());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::jc::{coherent_state, fock_state};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn axis(extent: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| -extent + 2.0 * extent * i as f64 / (n - 1) as f64).collect()
    }

    fn pure(v: &crate::scalar::CVector<f64>) -> CMatrix<f64> {
        v * v.adjoint()
    }

    #[test]
    fn fock_parity_at_origin() {
        let n_max = 6;
        let ax = axis(required_extent(n_max), 61);
        for m in [0usize, 1, 4] {
            let rho = pure(&fock_state(m, n_max).unwrap());
            let w = wigner(&rho, &ax, &ax).unwrap();
            let origin = w.values[30][30];
            let expect = if m % 2 == 0 { 1.0 / PI } else { -1.0 / PI };
            assert!((origin - expect).abs() < 1e-12, "m = {m}: {origin}");
            assert!(w.max_abs() <= 1.0 / PI + 1e-12);
        }
    }

    #[test]
    fn coherent_state_is_displaced_gaussian() {
        let n_max = 30;
        let beta = Complex64::new(0.7, -1.3);
        let v = coherent_state::<f64>(0.0, n_max).unwrap();
        assert!((v[0].re - 1.0).abs() < 1e-12);
        // Build |β⟩ directly with a complex amplitude.
        let mut amp = crate::scalar::CVector::<f64>::zeros(n_max + 1);
        amp[0] = Complex64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
        for m in 1..=n_max {
            amp[m] = amp[m - 1] * beta / (m as f64).sqrt();
        }
        let rho = pure(&amp);
        let ax = axis(required_extent(n_max), 81);
        let w = wigner(&rho, &ax, &ax).unwrap();
        let (q0, p0) = (2f64.sqrt() * beta.re, 2f64.sqrt() * beta.im);
        for (i, &q) in ax.iter().enumerate().step_by(7) {
            for (j, &p) in ax.iter().enumerate().step_by(5) {
                let expect = (-(q - q0).powi(2) - (p - p0).powi(2)).exp() / PI;
                assert!((w.values[i][j] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn coarse_or_narrow_grids_rejected() {
        let rho = pure(&fock_state::<f64>(2, 4).unwrap());
        let narrow = axis(2.0, 41);
        assert!(wigner(&rho, &narrow, &narrow).is_err());
        let coarse = axis(required_extent(4), 4);
        assert!(wigner(&rho, &coarse, &coarse).is_err());
        let mut bad = rho.clone();
        bad *= Complex64::new(2.0, 0.0);
        let ax = axis(required_extent(4), 41);
        assert!(wigner(&bad, &ax, &ax).is_err());
    }
}
