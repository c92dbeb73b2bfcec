//! Partially specified excitation-preserving unitaries and their completion.
//!
//! A protocol fixes a handful of rows of `W` (or `V`). Each fixed row is a
//! complete unit row: columns it does not list are exactly zero. Everything
//! else only has to make the operator unitary, so each excitation sector is
//! completed deterministically with modified Gram-Schmidt over the standard
//! basis of the sector.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::excitation_space::{enumerate_sector, sector_rank, JointState, MultiIndex};
use crate::io::DenseComplexMatrix;
use crate::scalar::{one, zero, Real};

/// One fully specified row of a sector-preserving unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct RowConstraint<T: Real> {
    row: MultiIndex,
    entries: BTreeMap<MultiIndex, Complex<T>>,
}

impl<T: Real> RowConstraint<T> {
    pub fn row(&self) -> MultiIndex {
        self.row
    }

    pub fn entries(&self) -> &BTreeMap<MultiIndex, Complex<T>> {
        &self.entries
    }

    pub fn sector(&self) -> usize {
        self.row.excitation_count()
    }

    pub fn norm_sqr(&self) -> T {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self, other⟩ = Σ_c self[c]·conj(other[c])`.
    pub fn inner(&self, other: &RowConstraint<T>) -> Complex<T> {
        self.entries
            .iter()
            .filter_map(|(c, a)| other.entries.get(c).map(|b| *a * b.conj()))
            .fold(zero(), |acc, x| acc + x)
    }
}

/// The constrained rows of `W` over a register of `total_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialUnitarySpec<T: Real> {
    total_qubits: usize,
    constraints: Vec<RowConstraint<T>>,
    zero_sector_fixed: bool,
    lookup: HashMap<MultiIndex, usize>,
}

impl<T: Real> PartialUnitarySpec<T> {
    /// Empty spec; the 0-excitation block is the scalar 1.
    pub fn new(total_qubits: usize) -> Self {
        PartialUnitarySpec {
            total_qubits,
            constraints: Vec::new(),
            zero_sector_fixed: true,
            lookup: HashMap::new(),
        }
    }

    pub fn total_qubits(&self) -> usize {
        self.total_qubits
    }

    pub fn zero_sector_fixed(&self) -> bool {
        self.zero_sector_fixed
    }

    pub fn constraints(&self) -> &[RowConstraint<T>] {
        &self.constraints
    }

    pub fn constraint(&self, row: &MultiIndex) -> Option<&RowConstraint<T>> {
        self.lookup.get(row).map(|&i| &self.constraints[i])
    }

    /// Sectors that carry at least one constraint, ascending.
    pub fn constrained_sectors(&self) -> Vec<usize> {
        self.constraints
            .iter()
            .map(RowConstraint::sector)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Fixes row `row` to `entries`. Checks are structural only; numeric
    /// validation happens in [`validate`](Self::validate).
    pub fn add_row_constraint(
        &mut self,
        row: MultiIndex,
        entries: impl IntoIterator<Item = (MultiIndex, Complex<T>)>,
    ) -> Result<()> {
        if row.len() != self.total_qubits {
            return Err(Error::Argument(format!(
                "row {row} has {} qubits, spec has {}",
                row.len(),
                self.total_qubits
            )));
        }
        if self.lookup.contains_key(&row) {
            return Err(Error::DuplicateRow(row.to_string()));
        }
        let sector = row.excitation_count();
        if sector == 0 && self.zero_sector_fixed {
            return Err(Error::Argument(
                "the 0-excitation block is fixed to 1".into(),
            ));
        }
        let mut map = BTreeMap::new();
        for (col, value) in entries {
            if col.len() != self.total_qubits {
                return Err(Error::Argument(format!("column {col} has the wrong width")));
            }
            if col.excitation_count() != sector {
                return Err(Error::Argument(format!(
                    "column {col} (excitation {}) mixed into sector-{sector} row {row}",
                    col.excitation_count()
                )));
            }
            if map.insert(col, value).is_some() {
                return Err(Error::Argument(format!(
                    "column {col} listed twice in row {row}"
                )));
            }
        }
        self.lookup.insert(row, self.constraints.len());
        self.constraints.push(RowConstraint { row, entries: map });
        Ok(())
    }

    /// Builder form of [`add_row_constraint`](Self::add_row_constraint).
    pub fn with_row(
        mut self,
        row: MultiIndex,
        entries: impl IntoIterator<Item = (MultiIndex, Complex<T>)>,
    ) -> Result<Self> {
        self.add_row_constraint(row, entries)?;
        Ok(self)
    }

    /// Per-sector row norms and pairwise overlaps.
    pub fn validate(&self) -> ValidationReport {
        let tolerance = T::VALIDATION_TOL;
        let mut by_sector: BTreeMap<usize, Vec<&RowConstraint<T>>> = BTreeMap::new();
        for c in &self.constraints {
            by_sector.entry(c.sector()).or_default().push(c);
        }
        let mut sectors = Vec::new();
        for (sector, rows) in by_sector {
            let mut max_norm_deviation = 0.0f64;
            let mut max_overlap = 0.0f64;
            for (i, a) in rows.iter().enumerate() {
                let dev = (a.norm_sqr().sqrt() - T::one()).abs().as_f64();
                max_norm_deviation = max_norm_deviation.max(dev);
                for b in &rows[i + 1..] {
                    max_overlap = max_overlap.max(a.inner(b).norm().as_f64());
                }
            }
            sectors.push(SectorValidation {
                sector,
                rows: rows.len(),
                max_norm_deviation,
                max_overlap,
            });
        }
        let passed = sectors
            .iter()
            .all(|s| s.max_norm_deviation <= tolerance && s.max_overlap <= tolerance);
        ValidationReport {
            sectors,
            tolerance,
            passed,
        }
    }

    /// Amplitudes of `W|ψ⟩` on the constrained rows, without completing `W`.
    pub fn apply_constrained_rows(
        &self,
        state: &JointState<T>,
    ) -> BTreeMap<MultiIndex, Complex<T>> {
        self.constraints
            .iter()
            .map(|c| {
                let v = c
                    .entries
                    .iter()
                    .fold(zero(), |acc, (col, w)| acc + *w * state.get(col));
                (c.row, v)
            })
            .collect()
    }

    /// Dense unitary for one sector; see [`CompletionOrder`] for the candidate order.
    pub fn complete_sector(
        &self,
        sector: usize,
        order: &CompletionOrder,
    ) -> Result<SectorUnitary<T>> {
        let report = self.validate();
        if !report.passed {
            return Err(Error::Validation(report.summary()));
        }
        complete_sector_unchecked(self, sector, order)
    }
}

/// Outcome of [`PartialUnitarySpec::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub sectors: Vec<SectorValidation>,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorValidation {
    pub sector: usize,
    pub rows: usize,
    /// max |‖row‖ − 1|
    pub max_norm_deviation: f64,
    /// max |⟨rᵢ, rⱼ⟩| over distinct rows
    pub max_overlap: f64,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        self.sectors
            .iter()
            .map(|s| {
                format!(
                    "sector {}: {} rows, norm deviation {:.2e}, overlap {:.2e}",
                    s.sector, s.rows, s.max_norm_deviation, s.max_overlap
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Order in which standard basis vectors are offered to Gram-Schmidt.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum CompletionOrder {
    /// Sector enumeration order.
    #[default]
    Forward,
    Reverse,
    /// Explicit permutation of the sector ranks.
    Permuted(Vec<usize>),
}

impl CompletionOrder {
    fn candidates(&self, dim: usize) -> Result<Vec<usize>> {
        match self {
            CompletionOrder::Forward => Ok((0..dim).collect()),
            CompletionOrder::Reverse => Ok((0..dim).rev().collect()),
            CompletionOrder::Permuted(p) => {
                let mut seen = vec![false; dim];
                if p.len() != dim
                    || p.iter()
                        .any(|&i| i >= dim || std::mem::replace(&mut seen[i], true))
                {
                    return Err(Error::Argument(format!(
                        "candidate order is not a permutation of 0..{dim}"
                    )));
                }
                Ok(p.clone())
            }
        }
    }
}

type SparseRow<T> = Vec<(usize, Complex<T>)>;

/// A unitary block over one excitation sector, rows and columns indexed by
/// sector rank.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorUnitary<T: Real> {
    num_qubits: usize,
    sector: usize,
    rows: Vec<SparseRow<T>>,
}

impl<T: Real> SectorUnitary<T> {
    pub fn identity(num_qubits: usize, sector: usize) -> Result<Self> {
        let dim = enumerate_sector(num_qubits, sector)?.len();
        Ok(SectorUnitary {
            num_qubits,
            sector,
            rows: (0..dim).map(|i| vec![(i, one())]).collect(),
        })
    }

    /// Wraps a dense block, dropping exact zeros.
    pub fn from_dense(num_qubits: usize, sector: usize, dense: &[Vec<Complex<T>>]) -> Result<Self> {
        let dim = enumerate_sector(num_qubits, sector)?.len();
        if dense.len() != dim || dense.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape(format!(
                "sector {sector} block must be {dim}×{dim}"
            )));
        }
        let rows = dense
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != zero())
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        Ok(SectorUnitary {
            num_qubits,
            sector,
            rows,
        })
    }

    pub fn sector(&self) -> usize {
        self.sector
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.rows[row]
            .iter()
            .find(|(j, _)| *j == col)
            .map_or(zero(), |(_, v)| *v)
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex<T>>> {
        let d = self.dim();
        self.rows
            .iter()
            .map(|r| {
                let mut out = vec![zero(); d];
                for &(j, v) in r {
                    out[j] = v;
                }
                out
            })
            .collect()
    }

    /// `y = W x` for a vector over the sector basis.
    pub fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(zero(), |acc, &(j, w)| acc + w * x[j]))
            .collect()
    }

    /// `max |(W†W − I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let dense = self.to_dense();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let mut acc: Complex<T> = zero();
                for row in &dense {
                    acc += row[i].conj() * row[j];
                }
                if i == j {
                    acc -= one();
                }
                worst = worst.max(acc.norm().as_f64());
            }
        }
        worst
    }

    /// JSON dump (row-major `[re, im]` pairs), basis labels included.
    pub fn to_json(&self) -> DenseComplexMatrix {
        let basis = enumerate_sector(self.num_qubits, self.sector).unwrap_or_default();
        DenseComplexMatrix::from_rows(&self.to_dense())
            .with_basis(basis.iter().map(ToString::to_string).collect())
            .with_note(format!(
                "excitation-{} block over {} qubits, basis ascending by binary value",
                self.sector, self.num_qubits
            ))
    }
}

fn complete_sector_unchecked<T: Real>(
    spec: &PartialUnitarySpec<T>,
    sector: usize,
    order: &CompletionOrder,
) -> Result<SectorUnitary<T>> {
    let n = spec.total_qubits;
    let dim = enumerate_sector(n, sector)?.len();
    let candidates = order.candidates(dim)?;

    let mut fixed: BTreeMap<usize, &RowConstraint<T>> = BTreeMap::new();
    for c in spec.constraints.iter().filter(|c| c.sector() == sector) {
        fixed.insert(sector_rank(&c.row), c);
    }
    if fixed.is_empty() {
        return SectorUnitary::identity(n, sector);
    }

    // Columns touched by any constraint; everything else is orthogonal to
    // the constrained rows already and goes through unchanged.
    let support: Vec<usize> = fixed
        .values()
        .flat_map(|c| c.entries.keys().map(sector_rank))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let local: HashMap<usize, usize> = support.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    let s = support.len();

    let mut ortho: Vec<Vec<Complex<T>>> = fixed
        .values()
        .map(|c| {
            let mut v = vec![zero(); s];
            for (col, w) in &c.entries {
                v[local[&sector_rank(col)]] = *w;
            }
            v
        })
        .collect();
    let needed_in_support = s.saturating_sub(fixed.len());
    let mut generated_in_support = 0usize;
    let skip = T::lit(T::COMPLETION_SKIP);

    let mut extra_rows: Vec<SparseRow<T>> = Vec::with_capacity(dim - fixed.len());
    for &cand in &candidates {
        let Some(&l) = local.get(&cand) else {
            extra_rows.push(vec![(cand, one())]);
            continue;
        };
        if generated_in_support == needed_in_support {
            continue;
        }
        let mut v = vec![zero(); s];
        v[l] = one();
        // two MGS passes keep the result orthogonal to machine precision
        for _ in 0..2 {
            for u in &ortho {
                let proj: Complex<T> = u
                    .iter()
                    .zip(&v)
                    .fold(zero(), |acc, (a, b)| acc + a.conj() * *b);
                for (x, a) in v.iter_mut().zip(u) {
                    *x -= proj * *a;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        if norm < skip {
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        let row: SparseRow<T> = v
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != zero())
            .map(|(i, x)| (support[i], *x))
            .collect();
        ortho.push(v);
        extra_rows.push(row);
        generated_in_support += 1;
    }

    if extra_rows.len() + fixed.len() != dim {
        return Err(Error::Validation(format!(
            "completion of sector {sector} produced {} rows, expected {}",
            extra_rows.len() + fixed.len(),
            dim
        )));
    }

    let mut extra = extra_rows.into_iter();
    let mut rows = Vec::with_capacity(dim);
    for r in 0..dim {
        if let Some(c) = fixed.get(&r) {
            rows.push(
                c.entries
                    .iter()
                    .map(|(col, w)| (sector_rank(col), *w))
                    .collect(),
            );
        } else {
            rows.push(extra.next().expect("row count checked above"));
        }
    }
    Ok(SectorUnitary {
        num_qubits: n,
        sector,
        rows,
    })
}

/// A block-diagonal unitary `diag(W₀, W₁, …, W_N)`; sectors without an
/// explicit block act as the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockUnitary<T: Real> {
    num_qubits: usize,
    blocks: BTreeMap<usize, SectorUnitary<T>>,
}

impl<T: Real> BlockUnitary<T> {
    /// Identity on every sector.
    pub fn identity(num_qubits: usize) -> Self {
        BlockUnitary {
            num_qubits,
            blocks: BTreeMap::new(),
        }
    }

    /// Completes every constrained sector of `spec`.
    pub fn complete(spec: &PartialUnitarySpec<T>, order: &CompletionOrder) -> Result<Self> {
        let report = spec.validate();
        if !report.passed {
            return Err(Error::Validation(report.summary()));
        }
        let mut blocks = BTreeMap::new();
        for sector in spec.constrained_sectors() {
            blocks.insert(sector, complete_sector_unchecked(spec, sector, order)?);
        }
        Ok(BlockUnitary {
            num_qubits: spec.total_qubits,
            blocks,
        })
    }

    /// Replaces the block of `sector` with an explicit unitary. The block
    /// must be unitary and must reproduce every constrained row of `spec`.
    pub fn with_sector_block(
        mut self,
        spec: &PartialUnitarySpec<T>,
        sector: usize,
        dense: &[Vec<Complex<T>>],
    ) -> Result<Self> {
        let block = SectorUnitary::from_dense(self.num_qubits, sector, dense)?;
        let defect = block.unitarity_defect();
        if defect > T::UNITARITY_TOL {
            return Err(Error::Validation(format!(
                "sector {sector} override is not unitary ({defect:.2e})"
            )));
        }
        let tol = T::lit(T::VALIDATION_TOL);
        for c in spec.constraints.iter().filter(|c| c.sector() == sector) {
            let r = sector_rank(&c.row);
            let mut expected = vec![zero(); block.dim()];
            for (col, w) in &c.entries {
                expected[sector_rank(col)] = *w;
            }
            for (j, e) in expected.iter().enumerate() {
                if (block.entry(r, j) - *e).norm() > tol {
                    return Err(Error::Validation(format!(
                        "sector {sector} override disagrees with constrained row {}",
                        c.row
                    )));
                }
            }
        }
        self.blocks.insert(sector, block);
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn block(&self, sector: usize) -> Option<&SectorUnitary<T>> {
        self.blocks.get(&sector)
    }

    pub fn blocks(&self) -> impl Iterator<Item = &SectorUnitary<T>> {
        self.blocks.values()
    }

    /// Worst `‖W_d†W_d − I‖_max` over the explicit blocks.
    pub fn unitarity_defect(&self) -> f64 {
        self.blocks
            .values()
            .map(SectorUnitary::unitarity_defect)
            .fold(0.0, f64::max)
    }

    /// Matrix element `⟨row|W|col⟩`; zero across sectors.
    pub fn element(&self, row: &MultiIndex, col: &MultiIndex) -> Complex<T> {
        let d = row.excitation_count();
        if d != col.excitation_count() {
            return zero();
        }
        match self.blocks.get(&d) {
            Some(b) => b.entry(sector_rank(row), sector_rank(col)),
            None if row == col => one(),
            None => zero(),
        }
    }

    /// Applies `W` in place to a dense amplitude vector of length `2^N`.
    pub fn apply_dense(&self, amplitudes: &mut [Complex<T>]) -> Result<()> {
        if amplitudes.len() != 1usize << self.num_qubits {
            return Err(Error::Shape(format!(
                "state of length {} for a {}-qubit operator",
                amplitudes.len(),
                self.num_qubits
            )));
        }
        for block in self.blocks.values() {
            let basis = enumerate_sector(self.num_qubits, block.sector())?;
            let x: Vec<Complex<T>> = basis
                .iter()
                .map(|b| amplitudes[b.value() as usize])
                .collect();
            if x.iter().all(|a| *a == zero()) {
                continue;
            }
            for (b, y) in basis.iter().zip(block.apply(&x)) {
                amplitudes[b.value() as usize] = y;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excitation_space::{tensor_product, SenderState, SystemLayout};

    fn bits(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn det2_spec() -> PartialUnitarySpec<f64> {
        let h = 1.0 / 2f64.sqrt();
        PartialUnitarySpec::new(4)
            .with_row(bits("0101"), [(bits("1001"), c(h)), (bits("0110"), c(-h))])
            .unwrap()
    }

    #[test]
    fn determinant_row_accepted() {
        let spec = det2_spec();
        let r = spec.validate();
        assert!(r.passed, "{}", r.summary());
        assert!((spec.constraints()[0].norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicate_and_mixed_rows_rejected() {
        let mut spec = det2_spec();
        assert!(matches!(
            spec.add_row_constraint(bits("0101"), [(bits("0101"), c(1.0))]),
            Err(Error::DuplicateRow(_))
        ));
        assert!(matches!(
            spec.add_row_constraint(bits("0011"), [(bits("0111"), c(1.0))]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn identical_rows_fail_validation() {
        let spec = PartialUnitarySpec::<f64>::new(3)
            .with_row(bits("100"), [(bits("010"), c(1.0))])
            .unwrap()
            .with_row(bits("001"), [(bits("010"), c(1.0))])
            .unwrap();
        let r = spec.validate();
        assert!(!r.passed);
        assert!((r.sectors[0].max_overlap - 1.0).abs() < 1e-15);
        assert!(spec.complete_sector(1, &CompletionOrder::Forward).is_err());
    }

    #[test]
    fn completion_keeps_constrained_rows_exactly() {
        let spec = det2_spec();
        let w = spec.complete_sector(2, &CompletionOrder::Forward).unwrap();
        assert_eq!(w.dim(), 6);
        assert!(w.unitarity_defect() < 1e-12);
        let r = sector_rank(&bits("0101"));
        let h = 1.0 / 2f64.sqrt();
        assert_eq!(w.entry(r, sector_rank(&bits("1001"))), c(h));
        assert_eq!(w.entry(r, sector_rank(&bits("0110"))), c(-h));
        let rev = spec.complete_sector(2, &CompletionOrder::Reverse).unwrap();
        assert!(rev.unitarity_defect() < 1e-12);
        assert_eq!(rev.entry(r, sector_rank(&bits("1001"))), c(h));
    }

    #[test]
    fn empty_spec_completes_to_identity() {
        let spec = PartialUnitarySpec::<f64>::new(4);
        let w = spec.complete_sector(2, &CompletionOrder::Forward).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(w.entry(i, j), if i == j { c(1.0) } else { c(0.0) });
            }
        }
    }

    #[test]
    fn bad_permutation_rejected() {
        let spec = det2_spec();
        assert!(spec
            .complete_sector(2, &CompletionOrder::Permuted(vec![0, 1, 2]))
            .is_err());
        assert!(spec
            .complete_sector(2, &CompletionOrder::Permuted(vec![0, 0, 1, 2, 3, 4]))
            .is_err());
        let w = spec
            .complete_sector(2, &CompletionOrder::Permuted(vec![3, 1, 4, 0, 5, 2]))
            .unwrap();
        assert!(w.unitarity_defect() < 1e-12);
    }

    #[test]
    fn constrained_rows_on_worked_state() {
        let layout = SystemLayout::new(vec![vec![2], vec![2]], vec![1, 3]).unwrap();
        let s1 = SenderState::encode(&[vec![c(0.75), c(0.25)]], &[]).unwrap();
        let s2 = SenderState::encode(&[vec![c(0.25), c(0.75)]], &[]).unwrap();
        let psi = tensor_product(&[s1, s2], &layout).unwrap();
        let vals = det2_spec().apply_constrained_rows(&psi);
        // (1/√2)(9/16 − 1/16)
        let expected = 2f64.sqrt() / 4.0;
        assert!((vals[&bits("0101")].re - expected).abs() < 1e-15);
    }

    #[test]
    fn constrained_rows_on_vacuum_are_zero() {
        let layout = SystemLayout::new(vec![vec![2], vec![2]], vec![1, 3]).unwrap();
        let s = SenderState::encode(&[vec![c(0.0), c(0.0)]], &[]).unwrap();
        let psi = tensor_product(&[s.clone(), s], &layout).unwrap();
        let vals = det2_spec().apply_constrained_rows(&psi);
        assert_eq!(vals[&bits("0101")], c(0.0));
    }

    #[test]
    fn block_override_must_match_constraints() {
        let spec = det2_spec();
        let ident: Vec<Vec<Complex<f64>>> = (0..6)
            .map(|i| {
                (0..6)
                    .map(|j| if i == j { c(1.0) } else { c(0.0) })
                    .collect()
            })
            .collect();
        assert!(BlockUnitary::identity(4)
            .with_sector_block(&spec, 2, &ident)
            .is_err());
        let completed = spec
            .complete_sector(2, &CompletionOrder::Reverse)
            .unwrap()
            .to_dense();
        let w = BlockUnitary::identity(4)
            .with_sector_block(&spec, 2, &completed)
            .unwrap();
        assert!(w.unitarity_defect() < 1e-12);
        assert_eq!(w.element(&bits("1000"), &bits("1000")), c(1.0));
        assert_eq!(w.element(&bits("1000"), &bits("1100")), c(0.0));
    }

    #[test]
    fn json_dump_shape() {
        let w = det2_spec()
            .complete_sector(2, &CompletionOrder::Forward)
            .unwrap();
        let j = w.to_json();
        assert_eq!((j.rows, j.cols, j.data.len()), (6, 6, 36));
        assert_eq!(j.basis.as_ref().unwrap()[0], "0011");
    }
}
