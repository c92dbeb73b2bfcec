//! Seeded random problem instances for sweeps and self-tests.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::oracle;
use crate::problem::{Operation, ProtocolInput};
use crate::protocols::{ScalePolicy, DEFAULT_SIGMA};
use crate::scalar::Real;

/// Smallest `|det|` of the scaled matrix accepted for det/inv/solve instances.
pub const MIN_SCALED_DET: f64 = 1e-3;

const MAX_REDRAWS: usize = 10_000;

/// Deterministic generator of random complex inputs; real and imaginary
/// parts are uniform in `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct InstanceSampler {
    rng: ChaCha8Rng,
    policy: ScalePolicy,
    sigma: f64,
}

impl InstanceSampler {
    pub fn new(seed: u64) -> Self {
        InstanceSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            policy: ScalePolicy::auto(),
            sigma: DEFAULT_SIGMA,
        }
    }

    /// Policy and σ the conditioning guard assumes the instance will be run with.
    pub fn with_guard(mut self, policy: ScalePolicy, sigma: f64) -> Self {
        self.policy = policy;
        self.sigma = sigma;
        self
    }

    pub fn complex<T: Real>(&mut self) -> Complex<T> {
        let re: f64 = self.rng.random_range(-1.0..=1.0);
        let im: f64 = self.rng.random_range(-1.0..=1.0);
        Complex::new(T::lit(re), T::lit(im))
    }

    pub fn dim(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    pub fn matrix<T: Real>(&mut self, rows: usize, cols: usize) -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(rows, cols, |_, _| self.complex())
    }

    pub fn vector<T: Real>(&mut self, n: usize) -> Vec<Complex<T>> {
        (0..n).map(|_| self.complex()).collect()
    }

    pub fn unit_vector<T: Real>(&mut self, n: usize) -> Vec<Complex<T>> {
        loop {
            let v = self.vector::<T>(n);
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if norm > T::lit(1e-3) {
                return v.into_iter().map(|z| z / norm).collect();
            }
        }
    }

    /// Square matrix whose determinant after per-row scaling is at least
    /// [`MIN_SCALED_DET`]; `fixed` is the extra population each row sender carries.
    pub fn conditioned<T: Real>(&mut self, n: usize, fixed: f64) -> Result<ComplexMatrix<T>> {
        for _ in 0..MAX_REDRAWS {
            let e = self.matrix::<T>(n, n);
            let mut scaled = e.clone();
            for i in 0..n {
                let s = self.policy.factor(e.row_norm_sqr(i), T::lit(fixed))?;
                for j in 0..n {
                    scaled[(i, j)] *= s;
                }
            }
            if oracle::det_ref(&scaled)?.norm().as_f64() >= MIN_SCALED_DET {
                return Ok(e);
            }
        }
        Err(Error::Argument(format!(
            "no {n}×{n} matrix passed the conditioning guard"
        )))
    }

    /// Random input for `op` with every dimension drawn from `1..=max_dim`.
    pub fn instance<T: Real>(&mut self, op: Operation, max_dim: usize) -> Result<ProtocolInput<T>> {
        let mut d = || self.dim(1, max_dim.max(1));
        let dims = [d(), d(), d()];
        self.instance_with_dims(op, &dims)
    }

    /// Random input with explicit dimensions: `[m, k]` for matvec, `[m, k, n]`
    /// for matmul, `[m, n]` for sum and `[n]` for the square operations.
    pub fn instance_with_dims<T: Real>(
        &mut self,
        op: Operation,
        dims: &[usize],
    ) -> Result<ProtocolInput<T>> {
        let need = match op {
            Operation::MatVec | Operation::MatSum => 2,
            Operation::MatMul => 3,
            _ => 1,
        };
        if dims.len() < need || dims[..need].contains(&0) {
            return Err(Error::Argument(format!(
                "{op} needs {need} positive dimensions"
            )));
        }
        let sigma_sqr = self.sigma * self.sigma;
        Ok(match op {
            Operation::MatVec => ProtocolInput::MatVec {
                a: self.matrix(dims[0], dims[1]),
                v: self.vector(dims[1]),
            },
            Operation::MatMul => ProtocolInput::MatMul {
                a: self.matrix(dims[0], dims[1]),
                b: self.matrix(dims[1], dims[2]),
            },
            Operation::MatSum => ProtocolInput::MatSum {
                c: self.matrix(dims[0], dims[1]),
                d: self.matrix(dims[0], dims[1]),
            },
            Operation::Determinant => ProtocolInput::Determinant {
                e: self.conditioned(dims[0], 0.0)?,
            },
            Operation::Inverse => ProtocolInput::Inverse {
                e: self.conditioned(dims[0], sigma_sqr)?,
            },
            Operation::LinSolve => {
                let e = self.conditioned(dims[0], sigma_sqr)?;
                ProtocolInput::LinSolve {
                    e,
                    b: self.unit_vector(dims[0]),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_repeat() {
        let a: ComplexMatrix<f64> = InstanceSampler::new(7).matrix(3, 3);
        let b: ComplexMatrix<f64> = InstanceSampler::new(7).matrix(3, 3);
        let c: ComplexMatrix<f64> = InstanceSampler::new(8).matrix(3, 3);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a
            .data()
            .iter()
            .all(|z| z.re.abs() <= 1.0 && z.im.abs() <= 1.0));
    }

    #[test]
    fn guard_and_unit_vectors() {
        let mut s = InstanceSampler::new(1);
        for _ in 0..20 {
            let ProtocolInput::LinSolve { e, b } = s
                .instance_with_dims::<f64>(Operation::LinSolve, &[3])
                .unwrap()
            else {
                panic!()
            };
            assert!(oracle::det_ref(&e).unwrap().norm() >= MIN_SCALED_DET);
            let norm: f64 = b.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert!(s
            .instance_with_dims::<f64>(Operation::MatMul, &[2, 2])
            .is_err());
    }
}
