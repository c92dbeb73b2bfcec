//! Classical problem statements and results, shared by the protocol layer
//! and the oracle.

use std::fmt;

use num_complex::Complex;

use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::oracle;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operation {
    MatVec,
    MatMul,
    MatSum,
    Determinant,
    Inverse,
    LinSolve,
}

impl Operation {
    pub const ALL: [Operation; 6] = [
        Operation::MatVec,
        Operation::MatMul,
        Operation::MatSum,
        Operation::Determinant,
        Operation::Inverse,
        Operation::LinSolve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::MatVec => "matvec",
            Operation::MatMul => "matmul",
            Operation::MatSum => "sum",
            Operation::Determinant => "det",
            Operation::Inverse => "inv",
            Operation::LinSolve => "solve",
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Unscaled classical inputs of one protocol run.
#[derive(Clone, Debug, PartialEq)]
pub enum ProtocolInput<T: Real> {
    MatVec {
        a: ComplexMatrix<T>,
        v: Vec<Complex<T>>,
    },
    MatMul {
        a: ComplexMatrix<T>,
        b: ComplexMatrix<T>,
    },
    MatSum {
        c: ComplexMatrix<T>,
        d: ComplexMatrix<T>,
    },
    Determinant {
        e: ComplexMatrix<T>,
    },
    Inverse {
        e: ComplexMatrix<T>,
    },
    LinSolve {
        e: ComplexMatrix<T>,
        b: Vec<Complex<T>>,
    },
}

impl<T: Real> ProtocolInput<T> {
    pub fn operation(&self) -> Operation {
        match self {
            ProtocolInput::MatVec { .. } => Operation::MatVec,
            ProtocolInput::MatMul { .. } => Operation::MatMul,
            ProtocolInput::MatSum { .. } => Operation::MatSum,
            ProtocolInput::Determinant { .. } => Operation::Determinant,
            ProtocolInput::Inverse { .. } => Operation::Inverse,
            ProtocolInput::LinSolve { .. } => Operation::LinSolve,
        }
    }

    /// Classical answer computed by the oracle.
    pub fn reference(&self) -> Result<Decoded<T>> {
        Ok(match self {
            ProtocolInput::MatVec { a, v } => Decoded::Vector(oracle::matvec_ref(a, v)?),
            ProtocolInput::MatMul { a, b } => Decoded::Matrix(oracle::matmul_ref(a, b)?),
            ProtocolInput::MatSum { c, d } => Decoded::Matrix(oracle::sum_ref(c, d)?),
            ProtocolInput::Determinant { e } => Decoded::Scalar(oracle::det_ref(e)?),
            ProtocolInput::Inverse { e } => Decoded::Matrix(oracle::inv_ref(e)?),
            ProtocolInput::LinSolve { e, b } => Decoded::Vector(oracle::solve_ref(e, b)?),
        })
    }
}

/// A decoded classical result.
#[derive(Clone, Debug, PartialEq)]
pub enum Decoded<T: Real> {
    Scalar(Complex<T>),
    Vector(Vec<Complex<T>>),
    Matrix(ComplexMatrix<T>),
}

impl<T: Real> Decoded<T> {
    /// All entries, row-major.
    pub fn values(&self) -> Vec<Complex<T>> {
        match self {
            Decoded::Scalar(z) => vec![*z],
            Decoded::Vector(v) => v.clone(),
            Decoded::Matrix(m) => m.data().to_vec(),
        }
    }

    /// `max |a − b|`; `None` if the shapes differ.
    pub fn max_abs_diff(&self, other: &Decoded<T>) -> Option<T> {
        match (self, other) {
            (Decoded::Scalar(a), Decoded::Scalar(b)) => Some((a - b).norm()),
            (Decoded::Vector(a), Decoded::Vector(b)) if a.len() == b.len() => Some(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).norm())
                    .fold(T::zero(), T::max),
            ),
            (Decoded::Matrix(a), Decoded::Matrix(b)) => a.max_abs_diff(b),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<Complex<T>> {
        match self {
            Decoded::Scalar(z) => Some(*z),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[Complex<T>]> {
        match self {
            Decoded::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&ComplexMatrix<T>> {
        match self {
            Decoded::Matrix(m) => Some(m),
            _ => None,
        }
    }
}
