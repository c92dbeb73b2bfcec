//! Running a plan: `W` on the joint state, partial trace onto the receiver,
//! and extraction of the `−n` order coherence elements `ρ^(R)_{N_R;0_R}`.
//!
//! Two engines are provided. The dense engine materializes the full `2^N`
//! state vector and the receiver density matrix. The sector engine uses the
//! fact that the joint state carries at most `n` excitations, so only the
//! `x = 0` term survives the partial trace of a `−n` order element:
//!
//! ```text
//! ρ^(R)_{N_R;0_R} = (Wψ)(0…0, N_R) · conj(ψ(0…0))
//! ```
//!
//! and `(Wψ)` on a constrained row needs nothing but the prescribed entries.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::excitation_space::{tensor_product, MultiIndex, SystemLayout};
use crate::io::DenseComplexMatrix;
use crate::problem::Decoded;
use crate::protocols::{decode, Label, ProtocolPlan, Stage};
use crate::scalar::{to_c64, zero, Real};
use crate::unitary_forge::{BlockUnitary, CompletionOrder, PartialUnitarySpec};

/// Default qubit cap of the dense engine.
pub const DEFAULT_DENSE_CAP: usize = 20;

/// Reduced density matrix of the receiver, indexed by the binary value of
/// receiver multi-indices (slot 0 is the most significant bit).
#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverDensity<T: Real> {
    qubits: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ReceiverDensity<T> {
    pub fn from_data(qubits: usize, data: Vec<Complex<T>>) -> Result<Self> {
        let dim = 1usize << qubits;
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{} entries for a {dim}×{dim} density",
                data.len()
            )));
        }
        Ok(ReceiverDensity { qubits, data })
    }

    /// `|0_R⟩⟨0_R|`
    pub fn vacuum(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let mut data = vec![zero(); dim * dim];
        data[0] = Complex::new(T::one(), T::zero());
        ReceiverDensity { qubits, data }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim() + col]
    }

    /// `ρ_{row;col}` by receiver multi-index.
    pub fn element(&self, row: &MultiIndex, col: &MultiIndex) -> Result<Complex<T>> {
        for idx in [row, col] {
            if idx.len() != self.qubits {
                return Err(Error::Shape(format!(
                    "{}-slot pattern for {} receiver qubits",
                    idx.len(),
                    self.qubits
                )));
            }
        }
        Ok(self.get(row.value() as usize, col.value() as usize))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim())
            .map(|i| self.get(i, i))
            .fold(zero(), |a, b| a + b)
    }

    /// `max |ρ − ρ†|`
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm().as_f64());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part, computed in double precision.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| {
            let a = to_c64(self.get(i, j));
            let b = to_c64(self.get(j, i)).conj();
            (a + b) * 0.5
        });
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `V ρ V†` with `V` given as a block unitary over the receiver qubits.
    pub fn conjugate(&self, v: &BlockUnitary<T>) -> Result<Self> {
        if v.num_qubits() != self.qubits {
            return Err(Error::Shape(format!(
                "{}-qubit unitary on a {}-qubit receiver",
                v.num_qubits(),
                self.qubits
            )));
        }
        let d = self.dim();
        // V ρ column by column, then (V (Vρ)†)† = V ρ V†
        let mut tmp = vec![zero(); d * d];
        let mut col = vec![zero(); d];
        for j in 0..d {
            for (i, x) in col.iter_mut().enumerate() {
                *x = self.get(i, j);
            }
            v.apply_dense(&mut col)?;
            for (i, x) in col.iter().enumerate() {
                tmp[i * d + j] = *x;
            }
        }
        let mut out = vec![zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                col[j] = tmp[i * d + j].conj();
            }
            v.apply_dense(&mut col)?;
            for j in 0..d {
                out[i * d + j] = col[j].conj();
            }
        }
        Ok(ReceiverDensity {
            qubits: self.qubits,
            data: out,
        })
    }

    /// Serializable dump with the basis labels in index order.
    pub fn to_json(&self) -> DenseComplexMatrix {
        let d = self.dim();
        let rows: Vec<Vec<Complex<T>>> = (0..d)
            .map(|i| self.data[i * d..(i + 1) * d].to_vec())
            .collect();
        let basis = (0..d)
            .map(|i| {
                MultiIndex::from_value(i as u128, self.qubits)
                    .expect("index fits")
                    .to_string()
            })
            .collect();
        DenseComplexMatrix::from_rows(&rows)
            .with_basis(basis)
            .with_note(
                "receiver density matrix; row/column i is the receiver basis state basis[i], \
             receiver slot 0 is the most significant bit; data is row-major [re, im]",
            )
    }
}

/// One extracted element `ρ_{row;0_R}` (or `ξ_{row;0_R}` after `V`).
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceElement<T: Real> {
    pub label: Label,
    pub row: MultiIndex,
    pub stage: Stage,
    pub value: Complex<T>,
}

/// Label → value map consumed by [`crate::protocols::decode`].
pub fn value_map<T: Real>(elements: &[CoherenceElement<T>]) -> BTreeMap<Label, Complex<T>> {
    elements.iter().map(|e| (e.label, e.value)).collect()
}

fn receiver_bits(global: usize, total: usize, receiver: &[usize]) -> usize {
    receiver
        .iter()
        .fold(0, |acc, &q| (acc << 1) | ((global >> (total - 1 - q)) & 1))
}

/// Traces a pure state given as a dense `2^N` amplitude vector down to the receiver.
pub fn partial_trace<T: Real>(
    amplitudes: &[Complex<T>],
    layout: &SystemLayout,
) -> Result<ReceiverDensity<T>> {
    let n = layout.total_qubits();
    if amplitudes.len() != 1usize << n {
        return Err(Error::Shape(format!(
            "state of length {} for {n} qubits",
            amplitudes.len()
        )));
    }
    let receiver = layout.receiver_qubits();
    let r = receiver.len();
    let mask = receiver.iter().fold(0usize, |m, &q| m | (1 << (n - 1 - q)));
    // group amplitudes by the traced configuration x
    let mut groups: BTreeMap<usize, Vec<(usize, Complex<T>)>> = BTreeMap::new();
    for (g, a) in amplitudes.iter().enumerate() {
        if *a != zero() {
            groups
                .entry(g & !mask)
                .or_default()
                .push((receiver_bits(g, n, receiver), *a));
        }
    }
    let d = 1usize << r;
    let mut data = vec![zero(); d * d];
    for members in groups.values() {
        for (a, x) in members {
            for (b, y) in members {
                data[a * d + b] += *x * y.conj();
            }
        }
    }
    Ok(ReceiverDensity { qubits: r, data })
}

/// Traces a dense `2^N × 2^N` joint density matrix down to the receiver.
pub fn partial_trace_density<T: Real>(
    rho: &[Complex<T>],
    layout: &SystemLayout,
) -> Result<ReceiverDensity<T>> {
    let n = layout.total_qubits();
    let full = 1usize << n;
    if rho.len() != full * full {
        return Err(Error::Shape(format!(
            "{} entries for a {n}-qubit density",
            rho.len()
        )));
    }
    let receiver = layout.receiver_qubits();
    let mask = receiver.iter().fold(0usize, |m, &q| m | (1 << (n - 1 - q)));
    let d = 1usize << receiver.len();
    let mut data = vec![zero(); d * d];
    for g in 0..full {
        for h in 0..full {
            if g & !mask == h & !mask {
                data[receiver_bits(g, n, receiver) * d + receiver_bits(h, n, receiver)] +=
                    rho[g * full + h];
            }
        }
    }
    Ok(ReceiverDensity {
        qubits: receiver.len(),
        data,
    })
}

/// `ρ_{p;0_R}` for each pattern; every pattern must carry `order` excitations.
pub fn extract<T: Real>(
    receiver: &ReceiverDensity<T>,
    patterns: &[MultiIndex],
    order: usize,
) -> Result<Vec<Complex<T>>> {
    let vac = MultiIndex::zeros(receiver.qubits());
    patterns
        .iter()
        .map(|p| {
            if p.excitation_count() != order {
                return Err(Error::Argument(format!(
                    "pattern {p} has {} excitations, expected {order}",
                    p.excitation_count()
                )));
            }
            receiver.element(p, &vac)
        })
        .collect()
}

/// Completes `v_spec` over the receiver qubits and returns `V ρ V†`.
pub fn apply_receiver_unitary<T: Real>(
    receiver: &ReceiverDensity<T>,
    v_spec: &PartialUnitarySpec<T>,
) -> Result<ReceiverDensity<T>> {
    apply_receiver_unitary_with(receiver, v_spec, &CompletionOrder::Forward)
}

pub fn apply_receiver_unitary_with<T: Real>(
    receiver: &ReceiverDensity<T>,
    v_spec: &PartialUnitarySpec<T>,
    order: &CompletionOrder,
) -> Result<ReceiverDensity<T>> {
    if v_spec.total_qubits() != receiver.qubits() {
        return Err(Error::Shape(format!(
            "receiver unitary over {} qubits, receiver has {}",
            v_spec.total_qubits(),
            receiver.qubits()
        )));
    }
    receiver.conjugate(&BlockUnitary::complete(v_spec, order)?)
}

/// Knobs of the dense engine.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOptions<T: Real> {
    pub cap: usize,
    /// Candidate order for completing `W`.
    pub order: CompletionOrder,
    /// Candidate order for completing the receiver unitary `V`.
    pub receiver_order: CompletionOrder,
    /// Explicit `W` blocks `(sector, dense block)` used instead of the completion.
    pub overrides: Vec<(usize, Vec<Vec<Complex<T>>>)>,
}

impl<T: Real> Default for DenseOptions<T> {
    fn default() -> Self {
        DenseOptions {
            cap: DEFAULT_DENSE_CAP,
            order: CompletionOrder::Forward,
            receiver_order: CompletionOrder::Forward,
            overrides: Vec::new(),
        }
    }
}

impl<T: Real> DenseOptions<T> {
    pub fn with_cap(cap: usize) -> Self {
        DenseOptions {
            cap,
            ..Self::default()
        }
    }
}

/// Everything the dense engine computed.
#[derive(Clone, Debug)]
pub struct DenseRun<T: Real> {
    pub w: BlockUnitary<T>,
    pub v: Option<BlockUnitary<T>>,
    /// `ρ^(R)`
    pub receiver: ReceiverDensity<T>,
    /// `ξ^(R) = V ρ^(R) V†` when the plan has a receiver unitary.
    pub transformed: Option<ReceiverDensity<T>>,
    pub elements: Vec<CoherenceElement<T>>,
}

impl<T: Real> DenseRun<T> {
    pub fn values(&self) -> BTreeMap<Label, Complex<T>> {
        value_map(&self.elements)
    }
}

/// Runs `plan` on the full state space and returns every intermediate.
pub fn run_dense<T: Real>(
    plan: &ProtocolPlan<T>,
    options: &DenseOptions<T>,
) -> Result<DenseRun<T>> {
    let n = plan.layout.total_qubits();
    if n > options.cap {
        return Err(Error::DenseCap {
            qubits: n,
            cap: options.cap,
        });
    }
    let mut w = BlockUnitary::complete(&plan.w_spec, &options.order)?;
    for (sector, block) in &options.overrides {
        w = w.with_sector_block(&plan.w_spec, *sector, block)?;
    }
    let mut state = tensor_product(&plan.senders, &plan.layout)?.to_dense();
    w.apply_dense(&mut state)?;
    let receiver = partial_trace(&state, &plan.layout)?;

    let (v, transformed) = match &plan.v_spec {
        Some(spec) => {
            if spec.total_qubits() != receiver.qubits() {
                return Err(Error::Shape(
                    "receiver unitary does not match the receiver".into(),
                ));
            }
            let v = BlockUnitary::complete(spec, &options.receiver_order)?;
            let xi = receiver.conjugate(&v)?;
            (Some(v), Some(xi))
        }
        None => (None, None),
    };

    let order = plan.order();
    let mut elements = Vec::with_capacity(plan.extraction.len());
    for t in &plan.extraction {
        let source = match t.stage {
            Stage::Receiver => &receiver,
            Stage::Transformed => transformed.as_ref().ok_or_else(|| {
                Error::Unsupported(format!("{} needs a receiver unitary", t.label))
            })?,
        };
        let value = extract(source, std::slice::from_ref(&t.pattern), order)?[0];
        elements.push(CoherenceElement {
            label: t.label,
            row: t.pattern,
            stage: t.stage,
            value,
        });
    }
    Ok(DenseRun {
        w,
        v,
        receiver,
        transformed,
        elements,
    })
}

/// `ρ^(R)` from the dense engine with default options.
pub fn evolve_dense<T: Real>(plan: &ProtocolPlan<T>) -> Result<ReceiverDensity<T>> {
    run_dense(plan, &DenseOptions::default()).map(|r| r.receiver)
}

/// Extraction values without materializing the full space.
pub fn evolve_sector<T: Real>(plan: &ProtocolPlan<T>) -> Result<Vec<CoherenceElement<T>>> {
    let report = plan.w_spec.validate();
    if !report.passed {
        return Err(Error::Validation(report.summary()));
    }
    let joint = tensor_product(&plan.senders, &plan.layout)?;
    let vac_conj = joint.vacuum_amplitude().conj();
    let rows = plan.w_spec.apply_constrained_rows(&joint);
    let receiver_value = |pattern: &MultiIndex| -> Result<Complex<T>> {
        let row = plan.layout.embed_receiver(pattern)?;
        rows.get(&row).map(|w| *w * vac_conj).ok_or_else(|| {
            Error::Unsupported(format!(
                "receiver element {pattern} is not a constrained row of W"
            ))
        })
    };

    let v_rows = match &plan.v_spec {
        Some(spec) => {
            let report = spec.validate();
            if !report.passed {
                return Err(Error::Validation(report.summary()));
            }
            Some(spec)
        }
        None => None,
    };

    let order = plan.order();
    plan.extraction
        .iter()
        .map(|t| {
            if t.pattern.excitation_count() != order {
                return Err(Error::Argument(format!(
                    "pattern {} has the wrong excitation count",
                    t.pattern
                )));
            }
            let value = match t.stage {
                Stage::Receiver => receiver_value(&t.pattern)?,
                // ξ_{a;0} = Σ_c V_{a,c} ρ_{c;0} because V is the identity on sector 0
                Stage::Transformed => {
                    let spec = v_rows.ok_or_else(|| {
                        Error::Unsupported(format!("{} needs a receiver unitary", t.label))
                    })?;
                    let row = spec.constraint(&t.pattern).ok_or_else(|| {
                        Error::Unsupported(format!(
                            "receiver unitary row {} is not prescribed",
                            t.pattern
                        ))
                    })?;
                    row.entries()
                        .iter()
                        .map(|(col, v)| receiver_value(col).map(|rho| *v * rho))
                        .sum::<Result<Complex<T>>>()?
                }
            };
            Ok(CoherenceElement {
                label: t.label,
                row: t.pattern,
                stage: t.stage,
                value,
            })
        })
        .collect()
}

/// Which engine [`run`] uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    Dense,
    #[default]
    Sector,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Dense => "dense",
            Engine::Sector => "sector",
        }
    }
}

/// Extraction values from either engine.
pub fn run<T: Real>(plan: &ProtocolPlan<T>, engine: Engine) -> Result<Vec<CoherenceElement<T>>> {
    match engine {
        Engine::Dense => run_dense(plan, &DenseOptions::default()).map(|r| r.elements),
        Engine::Sector => evolve_sector(plan),
    }
}

/// Extraction plus decode.
#[derive(Clone, Debug)]
pub struct Execution<T: Real> {
    pub engine: Engine,
    pub elements: Vec<CoherenceElement<T>>,
    pub decoded: Decoded<T>,
    /// Full dense intermediates, present for the dense engine.
    pub dense: Option<DenseRun<T>>,
}

/// Runs `plan` on `engine` and decodes the extracted elements.
pub fn execute<T: Real>(
    plan: &ProtocolPlan<T>,
    engine: Engine,
    dense: &DenseOptions<T>,
) -> Result<Execution<T>> {
    let (elements, dense_run) = match engine {
        Engine::Dense => {
            let r = run_dense(plan, dense)?;
            (r.elements.clone(), Some(r))
        }
        Engine::Sector => (evolve_sector(plan)?, None),
    };
    let decoded = decode(plan, &value_map(&elements))?;
    Ok(Execution {
        engine,
        elements,
        decoded,
        dense: dense_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excitation_space::SenderState;
    use crate::matrix::ComplexMatrix;
    use crate::protocols::{
        plan_determinant, plan_linsolve, RhsPolicy, ScalePolicy, DEFAULT_SIGMA,
    };

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn worked_e() -> ComplexMatrix<f64> {
        ComplexMatrix::from_real(&[&[0.75, 0.25], &[0.25, 0.75]]).unwrap()
    }

    #[test]
    fn trace_over_nothing_is_outer_product() {
        let layout = SystemLayout::new(vec![vec![2]], vec![0, 1]).unwrap();
        let psi = vec![c(0.5), Complex::new(0.0, 0.5), c(-0.5), c(0.5)];
        let rho = partial_trace(&psi, &layout).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((rho.get(i, j) - psi[i] * psi[j].conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn product_marginal_is_pure() {
        let layout = SystemLayout::new(vec![vec![2], vec![2]], vec![2, 3]).unwrap();
        let a = SenderState::from_placements(2, [(0, c(0.6))]).unwrap();
        let b =
            SenderState::from_placements(2, [(1, c(0.3)), (0, Complex::new(0.0, 0.4))]).unwrap();
        let psi = tensor_product(&[a, b.clone()], &layout).unwrap().to_dense();
        let rho = partial_trace(&psi, &layout).unwrap();
        let pb: Vec<Complex<f64>> = (0..4)
            .map(|i| b.amplitude(&MultiIndex::from_value(i, 2).unwrap()))
            .collect();
        for i in 0..4 {
            for j in 0..4 {
                assert!((rho.get(i, j) - pb[i] * pb[j].conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn density_trace_matches_pure_trace() {
        let layout = SystemLayout::new(vec![vec![3]], vec![2, 0]).unwrap();
        let psi: Vec<Complex<f64>> = (0..8)
            .map(|i| Complex::new(i as f64, 1.0 - i as f64))
            .collect();
        let rho: Vec<Complex<f64>> = (0..64).map(|k| psi[k / 8] * psi[k % 8].conj()).collect();
        let a = partial_trace(&psi, &layout).unwrap();
        let b = partial_trace_density(&rho, &layout).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn engines_agree_on_determinant_example() {
        let plan = plan_determinant(&worked_e(), ScalePolicy::off()).unwrap();
        let dense = run_dense(&plan, &DenseOptions::default()).unwrap();
        let sector = evolve_sector(&plan).unwrap();
        let expected = 3.0 * 2f64.sqrt() / 32.0;
        assert!((dense.elements[0].value - c(expected)).norm() < 1e-15);
        assert!((sector[0].value - c(expected)).norm() < 1e-15);
        assert!((dense.receiver.trace() - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn wrong_excitation_rejected() {
        let rho = ReceiverDensity::<f64>::vacuum(2);
        assert!(matches!(
            extract(&rho, &["00".parse().unwrap()], 2),
            Err(Error::Argument(_))
        ));
        assert_eq!(
            extract(&rho, &["11".parse().unwrap()], 2).unwrap(),
            vec![c(0.0)]
        );
    }

    #[test]
    fn identity_on_vacuum() {
        let layout = SystemLayout::new(vec![vec![2], vec![2]], vec![1, 3]).unwrap();
        let s = SenderState::<f64>::from_placements(2, []).unwrap();
        let psi = tensor_product(&[s.clone(), s], &layout).unwrap().to_dense();
        assert_eq!(
            partial_trace(&psi, &layout).unwrap(),
            ReceiverDensity::vacuum(2)
        );
    }

    #[test]
    fn dense_cap() {
        let plan = plan_determinant(&worked_e(), ScalePolicy::off()).unwrap();
        assert!(matches!(
            run_dense(&plan, &DenseOptions::with_cap(3)),
            Err(Error::DenseCap { qubits: 4, cap: 3 })
        ));
    }

    #[test]
    fn solve_example_intermediate() {
        let h = 1.0 / 2f64.sqrt();
        let plan = plan_linsolve(
            &worked_e(),
            &[c(h), c(h)],
            DEFAULT_SIGMA,
            ScalePolicy::auto(),
            RhsPolicy::Reject,
        )
        .unwrap();
        let dense = run_dense(&plan, &DenseOptions::default()).unwrap();
        let sector = evolve_sector(&plan).unwrap();
        for (d, s) in dense.elements.iter().zip(&sector) {
            assert!((d.value - s.value).norm() < 1e-14);
        }
        for j in 0..2 {
            assert!((dense.values()[&Label::Solution(j)] - c(1.0 / 32.0)).norm() < 1e-15);
        }
        let xi = dense.transformed.unwrap();
        assert!((xi.trace() - c(1.0)).norm() < 1e-14);
        assert!(xi.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn identity_receiver_unitary() {
        let plan = plan_determinant(&worked_e(), ScalePolicy::off()).unwrap();
        let rho = evolve_dense(&plan).unwrap();
        let same = apply_receiver_unitary(&rho, &PartialUnitarySpec::new(2)).unwrap();
        assert_eq!(rho, same);
    }
}
