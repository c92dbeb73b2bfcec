//! Plans for the six sender-receiver protocols.
//!
//! A plan fixes everything a simulation needs: how each classical input is
//! written into single-excitation sender states, which rows of `W` (and of
//! the receiver unitary `V` for linear solves) are prescribed, which
//! receiver density elements `ρ^(R)_{N_R;0_R}` carry the answer, and the
//! constants that turn those elements back into numbers.
//!
//! Constant summary, with `k` the inner dimension and `n` the square size:
//!
//! | operation | row weight        | decode                          |
//! |-----------|-------------------|---------------------------------|
//! | `Av`      | `θ₁ = 1/√k`       | `α = θ₁ a₀₀* v₀*`               |
//! | `AB`      | `θ₁ = 1/√k`       | `β = θ₁ a₀₀* b₀₀*`              |
//! | `C + D`   | `θ₂ = 1/√2`       | `ωλ`, `ω = θ₂ c₀₀* d₀₀*`        |
//! | `det E`   | `θ₃ = 1/√n!`      | `γ = θ₃ Π e_{i0}*`              |
//! | `E⁻¹`     | `θ₄ = 1/√(n−1)!`  | `E⁻¹(j,i) = ρ_{ij} / (σ√n ρ_det)` |
//!
//! All indices in this module are 0-based.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::excitation_space::{MultiIndex, SenderState, SystemLayout};
use crate::matrix::ComplexMatrix;
use crate::problem::{Decoded, Operation, ProtocolInput};
use crate::scalar::{one, real, Real};
use crate::unitary_forge::PartialUnitarySpec;

/// Default λ of the sum protocol.
pub const DEFAULT_LAMBDA: f64 = 0.5;
/// Default σ of the inverse and solve protocols, `1/(2√2)`.
pub const DEFAULT_SIGMA: f64 = 0.353_553_390_593_273_8;

/// Which receiver element a value belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    /// `(Av)_i`
    Row(usize),
    /// `(AB)_{ij}` or `(C + D)_{ij}`
    Entry(usize, usize),
    /// `det E`, or the determinant element `N̂_R` of the inverse layout
    Determinant,
    /// Cofactor of `e_{ij}`, stored at `N̂_{R_ij}`
    Complement(usize, usize),
    /// `ξ_{L_{R_j}}` after the receiver unitary
    Solution(usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Row(i) => write!(f, "row({i})"),
            Label::Entry(i, j) => write!(f, "entry({i},{j})"),
            Label::Determinant => f.write_str("det"),
            Label::Complement(i, j) => write!(f, "complement({i},{j})"),
            Label::Solution(j) => write!(f, "solution({j})"),
        }
    }
}

/// Density matrix an element is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// `ρ^(R)` right after `W` and the partial trace
    Receiver,
    /// `ξ^(R) = V ρ^(R) V†`
    Transformed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionTarget {
    pub label: Label,
    /// Receiver multi-index `N_R`; the column index is always `0_R`.
    pub pattern: MultiIndex,
    pub stage: Stage,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScaleMode {
    Off,
    #[default]
    Auto,
}

/// How inputs are brought inside the unit ball before encoding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalePolicy {
    pub mode: ScaleMode,
    /// Minimum vacuum population `|a₀₀|²` kept by auto-scaling.
    pub target_vacuum_floor: f64,
}

impl Default for ScalePolicy {
    fn default() -> Self {
        ScalePolicy {
            mode: ScaleMode::Auto,
            target_vacuum_floor: 0.25,
        }
    }
}

impl ScalePolicy {
    pub fn off() -> Self {
        ScalePolicy {
            mode: ScaleMode::Off,
            ..Self::default()
        }
    }

    pub fn auto() -> Self {
        Self::default()
    }

    /// Scale `s ∈ (0, 1]` such that `s²·payload + fixed ≤ 1 − floor`
    /// (always 1 when scaling is off).
    pub fn factor<T: Real>(&self, payload: T, fixed: T) -> Result<T> {
        self.scale_for(payload, fixed, 0)
    }

    fn scale_for<T: Real>(&self, payload: T, fixed: T, sender: usize) -> Result<T> {
        match self.mode {
            ScaleMode::Off => Ok(T::one()),
            ScaleMode::Auto => {
                let limit = T::one() - T::lit(self.target_vacuum_floor);
                if !(self.target_vacuum_floor > 0.0 && self.target_vacuum_floor < 1.0) {
                    return Err(Error::Argument(format!(
                        "vacuum floor {} must lie in (0, 1)",
                        self.target_vacuum_floor
                    )));
                }
                if fixed >= limit {
                    return Err(Error::Normalization {
                        sender,
                        payload: fixed.as_f64(),
                        residual: (T::one() - fixed).as_f64(),
                    });
                }
                if payload + fixed <= limit + T::lit(1e-12) || payload == T::zero() {
                    Ok(T::one())
                } else {
                    Ok(((limit - fixed) / payload).sqrt())
                }
            }
        }
    }
}

/// What the linear-solve plan does with a right-hand side that is not a unit vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RhsPolicy {
    #[default]
    Reject,
    /// Solve for `b/‖b‖` and multiply the solution by `‖b‖`.
    Normalize,
}

/// Scale factors applied to the inputs before encoding.
#[derive(Clone, Debug, PartialEq)]
pub enum ScaleRecord<T: Real> {
    /// `(s_A, s_v)` or `(s_A, s_B)`; results are divided by the product.
    Pair(T, T),
    /// Shared factor of `C` and `D`.
    Common(T),
    /// One factor per row of `E`.
    Rows(Vec<T>),
    /// Per-row factors of `E` and the factor the decoded `x` is multiplied by.
    Solve { rows: Vec<T>, rhs_factor: T },
}

impl<T: Real> ScaleRecord<T> {
    pub fn factors(&self) -> Vec<T> {
        match self {
            ScaleRecord::Pair(a, b) => vec![*a, *b],
            ScaleRecord::Common(s) => vec![*s],
            ScaleRecord::Rows(r) => r.clone(),
            ScaleRecord::Solve { rows, rhs_factor } => {
                rows.iter().copied().chain([*rhs_factor]).collect()
            }
        }
    }
}

/// Turns receiver elements into classical numbers.
#[derive(Clone, Debug, PartialEq)]
pub enum Decoding<T: Real> {
    /// `result = element / constant` (α, β, ωλ or γ)
    Direct { constant: Complex<T> },
    /// `E⁻¹(j,i) = ρ_{N̂_{R_ij}} / (σ√n ρ_{N̂_R})`; μ and γ̂ are the complement
    /// and determinant scales, kept for reporting.
    Cofactor {
        sigma_sqrt_n: T,
        mu: Complex<T>,
        gamma_hat: Complex<T>,
    },
}

impl<T: Real> Decoding<T> {
    /// The scalar the element is divided by (α, β, ωλ, γ or μ).
    pub fn constant(&self) -> Complex<T> {
        match self {
            Decoding::Direct { constant } => *constant,
            Decoding::Cofactor { mu, .. } => *mu,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputShape {
    Scalar,
    Vector(usize),
    Matrix(usize, usize),
}

/// Everything needed to simulate and decode one protocol instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolPlan<T: Real> {
    pub operation: Operation,
    pub input: ProtocolInput<T>,
    pub layout: SystemLayout,
    pub senders: Vec<SenderState<T>>,
    pub w_spec: PartialUnitarySpec<T>,
    /// Receiver unitary of the linear solve.
    pub v_spec: Option<PartialUnitarySpec<T>>,
    pub extraction: Vec<ExtractionTarget>,
    pub decoding: Decoding<T>,
    pub scale: ScaleRecord<T>,
    pub output: OutputShape,
}

impl<T: Real> ProtocolPlan<T> {
    /// Number of senders, which is also the coherence order read out.
    pub fn order(&self) -> usize {
        self.layout.sender_count()
    }

    pub fn target(&self, label: Label) -> Option<&ExtractionTarget> {
        self.extraction.iter().find(|t| t.label == label)
    }

    /// Product of the sender vacuum amplitudes, `ψ(0…0)`.
    pub fn vacuum_product(&self) -> Complex<T> {
        self.senders
            .iter()
            .fold(one(), |acc, s| acc * s.vacuum_amplitude())
    }

    /// Classical results from extracted receiver elements.
    pub fn decode(&self, extracted: &BTreeMap<Label, Complex<T>>) -> Result<Decoded<T>> {
        decode(self, extracted)
    }
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_count(k))
}

/// `+1` / `−1` from the cycle structure of `p`.
fn permutation_sign(p: &[usize]) -> i32 {
    let mut seen = vec![false; p.len()];
    let mut cycles = 0;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = p[k];
        }
    }
    if (p.len() - cycles).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn signed<T: Real>(sign: i32, x: T) -> Complex<T> {
    real(if sign >= 0 { x } else { -x })
}

fn check_nonempty<T: Real>(m: &ComplexMatrix<T>, what: &str) -> Result<()> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::Shape(format!(
            "{what} must have at least one row and column"
        )));
    }
    Ok(())
}

fn check_positive<T: Real>(x: T, what: &str) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("{what} must be positive, got {x}")))
    }
}

fn tag_sender(e: Error, sender: usize) -> Error {
    match e {
        Error::Normalization {
            payload, residual, ..
        } => Error::Normalization {
            sender,
            payload,
            residual,
        },
        Error::DegenerateVacuum { residual, .. } => Error::DegenerateVacuum { sender, residual },
        other => other,
    }
}

fn receiver_pattern(len: usize, slots: impl IntoIterator<Item = usize>) -> MultiIndex {
    MultiIndex::from_positions(len, slots).expect("slot inside receiver")
}

fn global(len: usize, qubits: impl IntoIterator<Item = usize>) -> MultiIndex {
    MultiIndex::from_positions(len, qubits).expect("qubit inside system")
}

/// Geometry of the matrix-vector layout: `S₁` has `m` rows of `k` qubits,
/// `S₂` one row of `k`; the receiver is the last qubit of every row.
pub fn matvec_layout(m: usize, k: usize) -> Result<SystemLayout> {
    let receiver = (0..m)
        .map(|i| i * k + k - 1)
        .chain([m * k + k - 1])
        .collect();
    SystemLayout::new(vec![vec![k; m], vec![k]], receiver)
}

/// Geometry of the matrix-matrix layout: `S₁` has `m` rows of `k` qubits,
/// `S₂` has `n` rows of `k`; the receiver is the last qubit of every row.
pub fn matmul_layout(m: usize, k: usize, n: usize) -> Result<SystemLayout> {
    let receiver = (0..m)
        .map(|i| i * k + k - 1)
        .chain((0..n).map(|j| m * k + j * k + k - 1))
        .collect();
    SystemLayout::new(vec![vec![k; m], vec![k; n]], receiver)
}

/// Sum layout. Each sender has `m` rows, the first carrying one extra λ
/// qubit. `S₁` columns run left to right with λ leftmost; `S₂` columns run
/// right to left with λ rightmost. The receiver is the last column of `S₁`
/// followed by the last row of `S₂` in column-label order.
struct SumGeometry {
    m: usize,
    n: usize,
}

impl SumGeometry {
    fn sender_qubits(&self) -> usize {
        self.m * self.n + 1
    }

    fn row_start(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.n + 1 + (i - 1) * self.n
        }
    }

    /// Local position of entry `(i, j)` in `S₁`.
    fn first(&self, i: usize, j: usize) -> usize {
        self.row_start(i) + j + usize::from(i == 0)
    }

    /// Local position of entry `(i, j)` in `S₂`.
    fn second(&self, i: usize, j: usize) -> usize {
        self.row_start(i) + (self.n - 1 - j)
    }

    fn first_lambda(&self) -> usize {
        0
    }

    fn second_lambda(&self) -> usize {
        self.n
    }

    fn layout(&self) -> Result<SystemLayout> {
        let off = self.sender_qubits();
        let rows: Vec<usize> = (0..self.m)
            .map(|i| if i == 0 { self.n + 1 } else { self.n })
            .collect();
        let receiver = (0..self.m)
            .map(|i| self.first(i, self.n - 1))
            .chain((0..self.n).map(|j| off + self.second(self.m - 1, j)))
            .collect();
        SystemLayout::new(vec![rows.clone(), rows], receiver)
    }
}

pub fn matsum_layout(m: usize, n: usize) -> Result<SystemLayout> {
    SumGeometry { m, n }.layout()
}

/// Determinant layout: `n` senders of `n` qubits, receiver = last qubit of each.
pub fn determinant_layout(n: usize) -> Result<SystemLayout> {
    SystemLayout::new(vec![vec![n]; n], (0..n).map(|i| i * n + n - 1).collect())
}

/// Inverse layout: `n` senders of `n + 1` qubits (the last is the aux qubit);
/// the receiver is the last two qubits of each sender.
pub fn inverse_layout(n: usize) -> Result<SystemLayout> {
    let w = n + 1;
    let receiver = (0..n).flat_map(|i| [i * w + n - 1, i * w + n]).collect();
    SystemLayout::new(vec![vec![w]; n], receiver)
}

/// `N̂_{R_ij}`: data slots all 1 except sender `i`, aux slots all 0 except sender `j`.
pub fn complement_pattern(n: usize, i: usize, j: usize) -> MultiIndex {
    receiver_pattern(
        2 * n,
        (0..n).filter(|&t| t != i).map(|t| 2 * t).chain([2 * j + 1]),
    )
}

/// `N̂_R = 1010…10`.
pub fn inverse_determinant_pattern(n: usize) -> MultiIndex {
    receiver_pattern(2 * n, (0..n).map(|t| 2 * t))
}

/// Plan for `A v`.
pub fn plan_matvec<T: Real>(
    a: &ComplexMatrix<T>,
    v: &[Complex<T>],
    policy: ScalePolicy,
) -> Result<ProtocolPlan<T>> {
    check_nonempty(a, "A")?;
    let (m, k) = (a.rows(), a.cols());
    if v.len() != k {
        return Err(Error::Shape(format!(
            "{m}×{k} matrix times {}-vector",
            v.len()
        )));
    }
    let s_a = policy.scale_for(a.frobenius_sqr(), T::zero(), 0)?;
    let v_norm: T = v.iter().map(|z| z.norm_sqr()).sum();
    let s_v = policy.scale_for(v_norm, T::zero(), 1)?;

    let layout = matvec_layout(m, k)?;
    let n_total = layout.total_qubits();
    let s1 = SenderState::encode(&a.scaled(s_a).to_rows(), &[]).map_err(|e| tag_sender(e, 0))?;
    let s2 = SenderState::encode(&[v.iter().map(|z| z * s_v).collect()], &[])
        .map_err(|e| tag_sender(e, 1))?;

    let theta = T::one() / T::from_count(k).sqrt();
    let r = layout.receiver_len();
    let mut w = PartialUnitarySpec::new(n_total);
    let mut extraction = Vec::with_capacity(m);
    for i in 0..m {
        let pattern = receiver_pattern(r, [i, m]);
        let entries = (0..k).map(|l| (global(n_total, [i * k + l, m * k + l]), real(theta)));
        w.add_row_constraint(layout.embed_receiver(&pattern)?, entries)?;
        extraction.push(ExtractionTarget {
            label: Label::Row(i),
            pattern,
            stage: Stage::Receiver,
        });
    }
    let constant = real(theta) * s1.vacuum_amplitude().conj() * s2.vacuum_amplitude().conj();
    Ok(ProtocolPlan {
        operation: Operation::MatVec,
        input: ProtocolInput::MatVec {
            a: a.clone(),
            v: v.to_vec(),
        },
        layout,
        senders: vec![s1, s2],
        w_spec: w,
        v_spec: None,
        extraction,
        decoding: Decoding::Direct { constant },
        scale: ScaleRecord::Pair(s_a, s_v),
        output: OutputShape::Vector(m),
    })
}

/// Plan for `A B`; `S₂` holds `Bᵀ` so that row `j` of `S₂` is column `j` of `B`.
pub fn plan_matmul<T: Real>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
    policy: ScalePolicy,
) -> Result<ProtocolPlan<T>> {
    check_nonempty(a, "A")?;
    check_nonempty(b, "B")?;
    if a.cols() != b.rows() {
        return Err(Error::Shape(format!(
            "{}×{} times {}×{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let s_a = policy.scale_for(a.frobenius_sqr(), T::zero(), 0)?;
    let s_b = policy.scale_for(b.frobenius_sqr(), T::zero(), 1)?;

    let layout = matmul_layout(m, k, n)?;
    let n_total = layout.total_qubits();
    let s1 = SenderState::encode(&a.scaled(s_a).to_rows(), &[]).map_err(|e| tag_sender(e, 0))?;
    let s2 = SenderState::encode(&b.scaled(s_b).transpose().to_rows(), &[])
        .map_err(|e| tag_sender(e, 1))?;

    let theta = T::one() / T::from_count(k).sqrt();
    let r = layout.receiver_len();
    let mut w = PartialUnitarySpec::new(n_total);
    let mut extraction = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let pattern = receiver_pattern(r, [i, m + j]);
            let entries =
                (0..k).map(|l| (global(n_total, [i * k + l, m * k + j * k + l]), real(theta)));
            w.add_row_constraint(layout.embed_receiver(&pattern)?, entries)?;
            extraction.push(ExtractionTarget {
                label: Label::Entry(i, j),
                pattern,
                stage: Stage::Receiver,
            });
        }
    }
    let constant = real(theta) * s1.vacuum_amplitude().conj() * s2.vacuum_amplitude().conj();
    Ok(ProtocolPlan {
        operation: Operation::MatMul,
        input: ProtocolInput::MatMul {
            a: a.clone(),
            b: b.clone(),
        },
        layout,
        senders: vec![s1, s2],
        w_spec: w,
        v_spec: None,
        extraction,
        decoding: Decoding::Direct { constant },
        scale: ScaleRecord::Pair(s_a, s_b),
        output: OutputShape::Matrix(m, n),
    })
}

/// Plan for `C + D` with the shared extra amplitude `λ`.
pub fn plan_matsum<T: Real>(
    c: &ComplexMatrix<T>,
    d: &ComplexMatrix<T>,
    lambda: T,
    policy: ScalePolicy,
) -> Result<ProtocolPlan<T>> {
    check_nonempty(c, "C")?;
    if c.rows() != d.rows() || c.cols() != d.cols() {
        return Err(Error::Shape(format!(
            "{}×{} plus {}×{}",
            c.rows(),
            c.cols(),
            d.rows(),
            d.cols()
        )));
    }
    check_positive(lambda, "λ")?;
    let (m, n) = (c.rows(), c.cols());
    let lambda_sqr = lambda * lambda;
    // one factor for both, since the decode divides by a single ωλ
    let s = policy
        .scale_for(c.frobenius_sqr(), lambda_sqr, 0)?
        .min(policy.scale_for(d.frobenius_sqr(), lambda_sqr, 1)?);

    let geo = SumGeometry { m, n };
    let layout = geo.layout()?;
    let n_total = layout.total_qubits();
    let off = geo.sender_qubits();
    let cells = || (0..m).flat_map(|i| (0..n).map(move |j| (i, j)));
    let s1 = SenderState::from_placements(
        off,
        cells()
            .map(|(i, j)| (geo.first(i, j), c[(i, j)] * s))
            .chain([(geo.first_lambda(), real(lambda))]),
    )
    .map_err(|e| tag_sender(e, 0))?;
    let s2 = SenderState::from_placements(
        off,
        cells()
            .map(|(i, j)| (geo.second(i, j), d[(i, j)] * s))
            .chain([(geo.second_lambda(), real(lambda))]),
    )
    .map_err(|e| tag_sender(e, 1))?;

    let theta = T::one() / T::lit(2.0).sqrt();
    let r = layout.receiver_len();
    let mut w = PartialUnitarySpec::new(n_total);
    let mut extraction = Vec::with_capacity(m * n);
    for (i, j) in cells() {
        let pattern = receiver_pattern(r, [i, m + j]);
        let entries = [
            (
                global(n_total, [geo.first(i, j), off + geo.second_lambda()]),
                real(theta),
            ),
            (
                global(n_total, [geo.first_lambda(), off + geo.second(i, j)]),
                real(theta),
            ),
        ];
        w.add_row_constraint(layout.embed_receiver(&pattern)?, entries)?;
        extraction.push(ExtractionTarget {
            label: Label::Entry(i, j),
            pattern,
            stage: Stage::Receiver,
        });
    }
    let omega = real(theta) * s1.vacuum_amplitude().conj() * s2.vacuum_amplitude().conj();
    Ok(ProtocolPlan {
        operation: Operation::MatSum,
        input: ProtocolInput::MatSum {
            c: c.clone(),
            d: d.clone(),
        },
        layout,
        senders: vec![s1, s2],
        w_spec: w,
        v_spec: None,
        extraction,
        decoding: Decoding::Direct {
            constant: omega * lambda,
        },
        scale: ScaleRecord::Common(s),
        output: OutputShape::Matrix(m, n),
    })
}

fn row_scales<T: Real>(e: &ComplexMatrix<T>, fixed: T, policy: ScalePolicy) -> Result<Vec<T>> {
    (0..e.rows())
        .map(|i| policy.scale_for(e.row_norm_sqr(i), fixed, i))
        .collect()
}

/// `(column qubits, sign)` of every permutation term `Π_t |1⟩` at
/// `(sender t, data column π(t))`.
fn permutation_columns(
    senders: &[usize],
    columns: &[usize],
    qubit: impl Fn(usize, usize) -> usize,
) -> Vec<(Vec<usize>, i32)> {
    (0..columns.len())
        .permutations(columns.len())
        .map(|p| {
            let qubits = senders
                .iter()
                .zip(&p)
                .map(|(&t, &pi)| qubit(t, columns[pi]))
                .collect();
            (qubits, permutation_sign(&p))
        })
        .collect()
}

/// Plan for `det E`: one sender per row, a single row of `W` weighted by the
/// permutation symbol.
pub fn plan_determinant<T: Real>(
    e: &ComplexMatrix<T>,
    policy: ScalePolicy,
) -> Result<ProtocolPlan<T>> {
    check_nonempty(e, "E")?;
    if !e.is_square() {
        return Err(Error::Shape(format!(
            "{}×{} matrix is not square",
            e.rows(),
            e.cols()
        )));
    }
    let n = e.rows();
    let scales = row_scales(e, T::zero(), policy)?;
    let layout = determinant_layout(n)?;
    let n_total = layout.total_qubits();
    let senders = (0..n)
        .map(|i| {
            let row: Vec<Complex<T>> = e.row(i).iter().map(|z| z * scales[i]).collect();
            SenderState::encode(&[row], &[]).map_err(|err| tag_sender(err, i))
        })
        .collect::<Result<Vec<_>>>()?;

    let theta = T::one() / factorial::<T>(n).sqrt();
    let all: Vec<usize> = (0..n).collect();
    let pattern = receiver_pattern(n, 0..n);
    let entries = permutation_columns(&all, &all, |t, col| t * n + col)
        .into_iter()
        .map(|(qs, sign)| (global(n_total, qs), signed(sign, theta)));
    let w = PartialUnitarySpec::new(n_total).with_row(layout.embed_receiver(&pattern)?, entries)?;

    let gamma = senders
        .iter()
        .fold(real(theta), |acc, s| acc * s.vacuum_amplitude().conj());
    Ok(ProtocolPlan {
        operation: Operation::Determinant,
        input: ProtocolInput::Determinant { e: e.clone() },
        layout,
        senders,
        w_spec: w,
        v_spec: None,
        extraction: vec![ExtractionTarget {
            label: Label::Determinant,
            pattern,
            stage: Stage::Receiver,
        }],
        decoding: Decoding::Direct { constant: gamma },
        scale: ScaleRecord::Rows(scales),
        output: OutputShape::Scalar,
    })
}

struct InverseParts<T: Real> {
    layout: SystemLayout,
    senders: Vec<SenderState<T>>,
    w: PartialUnitarySpec<T>,
    decoding: Decoding<T>,
    scales: Vec<T>,
}

fn build_inverse<T: Real>(
    e: &ComplexMatrix<T>,
    sigma: T,
    policy: ScalePolicy,
) -> Result<InverseParts<T>> {
    check_nonempty(e, "E")?;
    if !e.is_square() {
        return Err(Error::Shape(format!(
            "{}×{} matrix is not square",
            e.rows(),
            e.cols()
        )));
    }
    check_positive(sigma, "σ")?;
    let n = e.rows();
    let scales = row_scales(e, sigma * sigma, policy)?;
    let layout = inverse_layout(n)?;
    let n_total = layout.total_qubits();
    let width = n + 1;
    let senders = (0..n)
        .map(|i| {
            let row: Vec<Complex<T>> = e.row(i).iter().map(|z| z * scales[i]).collect();
            SenderState::encode(&[row], &[(n, real(sigma))]).map_err(|err| tag_sender(err, i))
        })
        .collect::<Result<Vec<_>>>()?;
    let qubit = |t: usize, col: usize| t * width + col;

    let theta3 = T::one() / factorial::<T>(n).sqrt();
    let theta4 = T::one() / factorial::<T>(n - 1).sqrt();
    let mut w = PartialUnitarySpec::new(n_total);
    for i in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&t| t != i).collect();
        for j in 0..n {
            let others: Vec<usize> = (0..n).filter(|&l| l != j).collect();
            let row_sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            let entries =
                permutation_columns(&rest, &others, qubit)
                    .into_iter()
                    .map(|(mut qs, sign)| {
                        qs.push(qubit(i, n));
                        (global(n_total, qs), signed(row_sign * sign, theta4))
                    });
            w.add_row_constraint(
                layout.embed_receiver(&complement_pattern(n, i, j))?,
                entries,
            )?;
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let entries = permutation_columns(&all, &all, qubit)
        .into_iter()
        .map(|(qs, sign)| (global(n_total, qs), signed(sign, theta3)));
    w.add_row_constraint(
        layout.embed_receiver(&inverse_determinant_pattern(n))?,
        entries,
    )?;

    let vac = senders
        .iter()
        .fold(one::<T>(), |acc, s| acc * s.vacuum_amplitude().conj());
    let decoding = Decoding::Cofactor {
        sigma_sqrt_n: sigma * T::from_count(n).sqrt(),
        mu: vac * theta4 * sigma,
        gamma_hat: vac * theta3,
    };
    Ok(InverseParts {
        layout,
        senders,
        w,
        decoding,
        scales,
    })
}

/// Plan for `E⁻¹`: complements in `n²` receiver elements plus the determinant.
pub fn plan_inverse<T: Real>(
    e: &ComplexMatrix<T>,
    sigma: T,
    policy: ScalePolicy,
) -> Result<ProtocolPlan<T>> {
    let parts = build_inverse(e, sigma, policy)?;
    let n = e.rows();
    let mut extraction: Vec<ExtractionTarget> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| ExtractionTarget {
            label: Label::Complement(i, j),
            pattern: complement_pattern(n, i, j),
            stage: Stage::Receiver,
        })
        .collect();
    extraction.push(ExtractionTarget {
        label: Label::Determinant,
        pattern: inverse_determinant_pattern(n),
        stage: Stage::Receiver,
    });
    Ok(ProtocolPlan {
        operation: Operation::Inverse,
        input: ProtocolInput::Inverse { e: e.clone() },
        layout: parts.layout,
        senders: parts.senders,
        w_spec: parts.w,
        v_spec: None,
        extraction,
        decoding: parts.decoding,
        scale: ScaleRecord::Rows(parts.scales),
        output: OutputShape::Matrix(n, n),
    })
}

/// Plan for `E x = b`: the inverse plan followed by a receiver unitary `V`
/// whose row `L_{R_j} = N̂_{R_jj}` is `b` spread over `N̂_{R_ij}`.
pub fn plan_linsolve<T: Real>(
    e: &ComplexMatrix<T>,
    b: &[Complex<T>],
    sigma: T,
    policy: ScalePolicy,
    rhs: RhsPolicy,
) -> Result<ProtocolPlan<T>> {
    let n = e.rows();
    if b.len() != n {
        return Err(Error::Shape(format!(
            "{n}×{} system with {}-vector",
            e.cols(),
            b.len()
        )));
    }
    let b_norm = b.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let mut rhs_factor = T::one();
    let b_unit: Vec<Complex<T>> = if (b_norm - T::one()).abs() <= T::lit(T::VALIDATION_TOL) {
        b.to_vec()
    } else {
        match rhs {
            RhsPolicy::Reject => {
                return Err(Error::Argument(format!(
                    "b must be a unit vector, ‖b‖ = {b_norm}"
                )));
            }
            RhsPolicy::Normalize => {
                if b_norm == T::zero() {
                    return Err(Error::Argument("b is the zero vector".into()));
                }
                rhs_factor = b_norm;
                b.iter().map(|z| z / b_norm).collect()
            }
        }
    };

    let parts = build_inverse(e, sigma, policy)?;
    // Row scaling S turns E x = b into (SE) x = S b; V carries S b / ‖S b‖.
    let encoded_b: Vec<Complex<T>> = if parts.scales.iter().all(|s| *s == T::one()) {
        b_unit
    } else {
        let sb: Vec<Complex<T>> = b_unit
            .iter()
            .zip(&parts.scales)
            .map(|(z, s)| z * *s)
            .collect();
        let norm = sb.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        rhs_factor *= norm;
        sb.iter().map(|z| z / norm).collect()
    };

    let r = 2 * n;
    let mut v = PartialUnitarySpec::new(r);
    let mut extraction = Vec::with_capacity(n + 1);
    for j in 0..n {
        let row = complement_pattern(n, j, j);
        v.add_row_constraint(
            row,
            (0..n).map(|i| (complement_pattern(n, i, j), encoded_b[i])),
        )?;
        extraction.push(ExtractionTarget {
            label: Label::Solution(j),
            pattern: row,
            stage: Stage::Transformed,
        });
    }
    extraction.push(ExtractionTarget {
        label: Label::Determinant,
        pattern: inverse_determinant_pattern(n),
        stage: Stage::Receiver,
    });
    Ok(ProtocolPlan {
        operation: Operation::LinSolve,
        input: ProtocolInput::LinSolve {
            e: e.clone(),
            b: b.to_vec(),
        },
        layout: parts.layout,
        senders: parts.senders,
        w_spec: parts.w,
        v_spec: Some(v),
        extraction,
        decoding: parts.decoding,
        scale: ScaleRecord::Solve {
            rows: parts.scales,
            rhs_factor,
        },
        output: OutputShape::Vector(n),
    })
}

/// Options shared by [`plan_for`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanOptions {
    pub policy: ScalePolicy,
    pub lambda: f64,
    pub sigma: f64,
    pub rhs: RhsPolicy,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            policy: ScalePolicy::default(),
            lambda: DEFAULT_LAMBDA,
            sigma: DEFAULT_SIGMA,
            rhs: RhsPolicy::Reject,
        }
    }
}

/// Builds the plan matching `input`.
pub fn plan_for<T: Real>(
    input: &ProtocolInput<T>,
    options: &PlanOptions,
) -> Result<ProtocolPlan<T>> {
    let policy = options.policy;
    match input {
        ProtocolInput::MatVec { a, v } => plan_matvec(a, v, policy),
        ProtocolInput::MatMul { a, b } => plan_matmul(a, b, policy),
        ProtocolInput::MatSum { c, d } => plan_matsum(c, d, T::lit(options.lambda), policy),
        ProtocolInput::Determinant { e } => plan_determinant(e, policy),
        ProtocolInput::Inverse { e } => plan_inverse(e, T::lit(options.sigma), policy),
        ProtocolInput::LinSolve { e, b } => {
            plan_linsolve(e, b, T::lit(options.sigma), policy, options.rhs)
        }
    }
}

fn lookup<T: Real>(extracted: &BTreeMap<Label, Complex<T>>, label: Label) -> Result<Complex<T>> {
    extracted
        .get(&label)
        .copied()
        .ok_or_else(|| Error::MissingValue(label.to_string()))
}

/// Divides by the decode constant, arranges the values and undoes input scaling.
pub fn decode<T: Real>(
    plan: &ProtocolPlan<T>,
    extracted: &BTreeMap<Label, Complex<T>>,
) -> Result<Decoded<T>> {
    for t in &plan.extraction {
        lookup(extracted, t.label)?;
    }
    let tiny = T::lit(T::SINGULAR_TOL);
    match &plan.decoding {
        Decoding::Direct { constant } => {
            if constant.norm() < tiny {
                return Err(Error::DegenerateDecode(constant.norm().as_f64()));
            }
            let get = |label| lookup(extracted, label).map(|z| z / constant);
            match (&plan.scale, plan.output) {
                (ScaleRecord::Pair(s1, s2), OutputShape::Vector(m)) => {
                    let f = *s1 * *s2;
                    (0..m)
                        .map(|i| get(Label::Row(i)).map(|z| z / f))
                        .collect::<Result<_>>()
                        .map(Decoded::Vector)
                }
                (ScaleRecord::Pair(s1, s2), OutputShape::Matrix(m, n)) => {
                    let f = *s1 * *s2;
                    matrix_from(m, n, |i, j| get(Label::Entry(i, j)).map(|z| z / f))
                }
                (ScaleRecord::Common(s), OutputShape::Matrix(m, n)) => {
                    matrix_from(m, n, |i, j| get(Label::Entry(i, j)).map(|z| z / *s))
                }
                (ScaleRecord::Rows(scales), OutputShape::Scalar) => {
                    let f = scales.iter().fold(T::one(), |acc, s| acc * *s);
                    Ok(Decoded::Scalar(get(Label::Determinant)? / f))
                }
                _ => Err(Error::Unsupported(format!(
                    "decode layout of {}",
                    plan.operation
                ))),
            }
        }
        Decoding::Cofactor { sigma_sqrt_n, .. } => {
            let det_elem = lookup(extracted, Label::Determinant)?;
            let denom = det_elem * *sigma_sqrt_n;
            if det_elem.norm() < tiny || denom.norm() < tiny {
                return Err(Error::Singular(format!(
                    "determinant element |ρ_N̂R| = {:.3e}",
                    det_elem.norm().as_f64()
                )));
            }
            match (&plan.scale, plan.output) {
                (ScaleRecord::Rows(scales), OutputShape::Matrix(n, _)) => {
                    // E⁻¹(j,i) = s_i · ρ_{N̂_{R_ij}} / (σ√n ρ_det)
                    matrix_from(n, n, |j, i| {
                        lookup(extracted, Label::Complement(i, j)).map(|z| z / denom * scales[i])
                    })
                }
                (ScaleRecord::Solve { rhs_factor, .. }, OutputShape::Vector(n)) => (0..n)
                    .map(|j| lookup(extracted, Label::Solution(j)).map(|z| z / denom * *rhs_factor))
                    .collect::<Result<_>>()
                    .map(Decoded::Vector),
                _ => Err(Error::Unsupported(format!(
                    "decode layout of {}",
                    plan.operation
                ))),
            }
        }
    }
}

fn matrix_from<T: Real>(
    rows: usize,
    cols: usize,
    mut f: impl FnMut(usize, usize) -> Result<Complex<T>>,
) -> Result<Decoded<T>> {
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            data.push(f(i, j)?);
        }
    }
    Ok(Decoded::Matrix(ComplexMatrix::from_vec(rows, cols, data)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn worked_e() -> ComplexMatrix<f64> {
        ComplexMatrix::from_real(&[&[0.75, 0.25], &[0.25, 0.75]]).unwrap()
    }

    #[test]
    fn cycle_sign() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[1, 2, 0]), 1);
        assert_eq!(permutation_sign(&[]), 1);
    }

    #[test]
    fn layouts_match_figure() {
        let l = matvec_layout(2, 3).unwrap();
        assert_eq!(l.receiver_qubits(), &[2, 5, 8]);
        let l = matmul_layout(2, 2, 3).unwrap();
        assert_eq!(l.receiver_qubits(), &[1, 3, 5, 7, 9]);
        let l = determinant_layout(2).unwrap();
        assert_eq!(l.receiver_qubits(), &[1, 3]);
        let l = inverse_layout(2).unwrap();
        assert_eq!(l.receiver_qubits(), &[1, 2, 4, 5]);
        // S₁: [λ c00 c01 | c10 c11], S₂: [d01 d00 λ | d11 d10]
        let l = matsum_layout(2, 2).unwrap();
        assert_eq!(l.total_qubits(), 10);
        assert_eq!(l.receiver_qubits(), &[2, 4, 9, 8]);
    }

    #[test]
    fn inverse_patterns() {
        assert_eq!(inverse_determinant_pattern(2).to_string(), "1010");
        assert_eq!(complement_pattern(2, 0, 0).to_string(), "0110");
        assert_eq!(complement_pattern(2, 1, 1).to_string(), "1001");
        assert_eq!(complement_pattern(2, 0, 1).to_string(), "0011");
        assert_eq!(complement_pattern(3, 1, 2).to_string(), "100011");
    }

    #[test]
    fn determinant_constants_of_worked_example() {
        let plan = plan_determinant(&worked_e(), ScalePolicy::off()).unwrap();
        let gamma = plan.decoding.constant();
        assert!((gamma.re - 3.0 * 2f64.sqrt() / 16.0).abs() < 1e-15);
        assert_eq!(plan.scale, ScaleRecord::Rows(vec![1.0, 1.0]));
        let row = plan.w_spec.constraints()[0].clone();
        assert_eq!(row.row().to_string(), "0101");
        let h = 1.0 / 2f64.sqrt();
        assert_eq!(row.entries()[&"1001".parse().unwrap()], c(h));
        assert_eq!(row.entries()[&"0110".parse().unwrap()], c(-h));
        let mut vals = BTreeMap::new();
        vals.insert(Label::Determinant, c(3.0 * 2f64.sqrt() / 32.0));
        let det = plan.decode(&vals).unwrap().as_scalar().unwrap();
        assert!((det - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn inverse_constants_of_worked_example() {
        let sigma = 1.0 / (2.0 * 2f64.sqrt());
        let plan = plan_inverse(&worked_e(), sigma, ScalePolicy::auto()).unwrap();
        assert_eq!(plan.scale, ScaleRecord::Rows(vec![1.0, 1.0]));
        for s in &plan.senders {
            assert!((s.vacuum_amplitude().re - 0.5).abs() < 1e-15);
        }
        let Decoding::Cofactor {
            mu,
            gamma_hat,
            sigma_sqrt_n,
        } = plan.decoding
        else {
            panic!()
        };
        assert!((mu.re - 1.0 / (8.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((gamma_hat.re - 1.0 / (4.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((sigma_sqrt_n - 0.5).abs() < 1e-15);
        assert_eq!(plan.w_spec.constraints().len(), 5);
        assert!(plan.w_spec.validate().passed);
    }

    #[test]
    fn linsolve_v_rows() {
        let h = 1.0 / 2f64.sqrt();
        let plan = plan_linsolve(
            &worked_e(),
            &[c(h), c(h)],
            DEFAULT_SIGMA,
            ScalePolicy::auto(),
            RhsPolicy::Reject,
        )
        .unwrap();
        let v = plan.v_spec.as_ref().unwrap();
        assert!(v.validate().passed);
        let l1 = v.constraint(&"0110".parse().unwrap()).unwrap();
        let cols: Vec<String> = l1.entries().keys().map(|k| k.to_string()).collect();
        assert_eq!(cols, ["0110", "1100"]);
        let l2 = v.constraint(&"1001".parse().unwrap()).unwrap();
        let cols: Vec<String> = l2.entries().keys().map(|k| k.to_string()).collect();
        assert_eq!(cols, ["0011", "1001"]);
    }

    #[test]
    fn non_unit_rhs() {
        let b = [c(1.0), c(1.0)];
        assert!(matches!(
            plan_linsolve(
                &worked_e(),
                &b,
                DEFAULT_SIGMA,
                ScalePolicy::auto(),
                RhsPolicy::Reject
            ),
            Err(Error::Argument(_))
        ));
        let plan = plan_linsolve(
            &worked_e(),
            &b,
            DEFAULT_SIGMA,
            ScalePolicy::auto(),
            RhsPolicy::Normalize,
        )
        .unwrap();
        let ScaleRecord::Solve { rhs_factor, .. } = plan.scale else {
            panic!()
        };
        assert!((rhs_factor - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalization_without_auto_scale() {
        let big: ComplexMatrix<f64> =
            ComplexMatrix::from_real(&[&[0.9, 0.9], &[0.1, 0.1]]).unwrap();
        assert!(matches!(
            plan_determinant(&big, ScalePolicy::off()),
            Err(Error::Normalization { sender: 0, .. })
        ));
        let plan = plan_determinant(&big, ScalePolicy::auto()).unwrap();
        let ScaleRecord::Rows(s) = &plan.scale else {
            panic!()
        };
        assert!(s[0] < 1.0 && s[1] == 1.0);
        for st in &plan.senders {
            assert!(st.vacuum_amplitude().norm_sqr() >= 0.25 - 1e-12);
        }
    }

    #[test]
    fn lambda_too_large() {
        let z = ComplexMatrix::<f64>::zeros(2, 2);
        assert!(plan_matsum(&z, &z, 0.9, ScalePolicy::auto()).is_err());
        assert!(plan_matsum(&z, &z, 0.9, ScalePolicy::off()).is_ok());
        assert!(plan_matsum(&z, &z, 1.0, ScalePolicy::off()).is_err());
        assert!(plan_matsum(&z, &z, -0.1, ScalePolicy::off()).is_err());
    }

    #[test]
    fn shape_errors() {
        let a = ComplexMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            plan_matvec(&a, &[c(0.0); 2], ScalePolicy::auto()),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            plan_matmul(&a, &a, ScalePolicy::auto()),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            plan_determinant(&a, ScalePolicy::auto()),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            plan_matsum(&a, &a.transpose(), 0.5, ScalePolicy::auto()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn missing_value_and_degenerate_decode() {
        let plan = plan_determinant(&worked_e(), ScalePolicy::off()).unwrap();
        assert!(matches!(
            plan.decode(&BTreeMap::new()),
            Err(Error::MissingValue(_))
        ));
        let mut bad = plan.clone();
        bad.decoding = Decoding::Direct { constant: c(0.0) };
        let mut vals = BTreeMap::new();
        vals.insert(Label::Determinant, c(0.1));
        assert!(matches!(bad.decode(&vals), Err(Error::DegenerateDecode(_))));
    }

    #[test]
    fn zero_extraction_decodes_to_zero() {
        let a = ComplexMatrix::from_real(&[&[0.1, 0.2], &[0.3, 0.4]]).unwrap();
        let plan = plan_matmul(&a, &a, ScalePolicy::auto()).unwrap();
        let vals: BTreeMap<Label, Complex<f64>> =
            plan.extraction.iter().map(|t| (t.label, c(0.0))).collect();
        let out = plan.decode(&vals).unwrap();
        assert!(out.values().iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn every_plan_has_valid_constraints() {
        let e = ComplexMatrix::from_real(&[&[0.3, -0.2, 0.1], &[0.0, 0.4, 0.2], &[0.1, 0.1, 0.5]])
            .unwrap();
        let v = vec![c(0.1), c(0.2), c(0.3)];
        let h = 1.0 / 3f64.sqrt();
        let plans = [
            plan_matvec(&e, &v, ScalePolicy::auto()).unwrap(),
            plan_matmul(&e, &e, ScalePolicy::auto()).unwrap(),
            plan_matsum(&e, &e, 0.5, ScalePolicy::auto()).unwrap(),
            plan_determinant(&e, ScalePolicy::auto()).unwrap(),
            plan_inverse(&e, DEFAULT_SIGMA, ScalePolicy::auto()).unwrap(),
            plan_linsolve(
                &e,
                &[c(h), c(h), c(h)],
                DEFAULT_SIGMA,
                ScalePolicy::auto(),
                RhsPolicy::Reject,
            )
            .unwrap(),
        ];
        for p in &plans {
            let report = p.w_spec.validate();
            assert!(report.passed, "{}: {}", p.operation, report.summary());
            for t in &p.extraction {
                assert_eq!(
                    t.pattern.excitation_count(),
                    p.order(),
                    "{} {}",
                    p.operation,
                    t.label
                );
                assert_eq!(t.pattern.len(), p.layout.receiver_len());
            }
            assert!(p.decoding.constant().norm() > 0.0);
        }
        // 3! permutation terms in the determinant row, 2! in each complement row
        assert_eq!(plans[3].w_spec.constraints()[0].entries().len(), 6);
        assert!(plans[4].w_spec.constraints()[..9]
            .iter()
            .all(|r| r.entries().len() == 2));
    }
}
