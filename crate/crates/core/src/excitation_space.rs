//! Qubit ordering, multi-indices, excitation sectors and single-excitation
//! sender states.
//!
//! Qubit 0 is the leftmost, most significant position of a [`MultiIndex`].
//! Sectors are listed in ascending binary value, so `enumerate_sector(4, 2)`
//! yields `0011, 0101, 0110, 1001, 1010, 1100`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{one, real, zero, Real};

/// Largest register a [`MultiIndex`] can address.
pub const MAX_QUBITS: usize = 128;

/// A classical bitstring labelling one computational basis state.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex {
    bits: u128,
    len: u8,
}

impl MultiIndex {
    /// The all-zero index over `len` qubits.
    pub fn zeros(len: usize) -> Self {
        assert!(
            len <= MAX_QUBITS,
            "register of {len} qubits exceeds {MAX_QUBITS}"
        );
        MultiIndex {
            bits: 0,
            len: len as u8,
        }
    }

    /// Builds an index from its binary value (qubit 0 is the most significant bit).
    pub fn from_value(value: u128, len: usize) -> Result<Self> {
        if len > MAX_QUBITS {
            return Err(Error::Argument(format!("{len} qubits exceed {MAX_QUBITS}")));
        }
        if len < 128 && value >> len != 0 {
            return Err(Error::Argument(format!(
                "value {value} does not fit in {len} qubits"
            )));
        }
        Ok(MultiIndex {
            bits: value,
            len: len as u8,
        })
    }

    /// Index with ones exactly at `positions`.
    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut idx = Self::zeros(len);
        for q in positions {
            if q >= len {
                return Err(Error::Argument(format!(
                    "qubit {q} out of range for {len} qubits"
                )));
            }
            idx = idx.with(q, true);
        }
        Ok(idx)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Binary value of the bitstring.
    #[inline]
    pub fn value(&self) -> u128 {
        self.bits
    }

    #[inline]
    fn mask(&self, q: usize) -> u128 {
        debug_assert!(q < self.len());
        1u128 << (self.len() - 1 - q)
    }

    #[inline]
    pub fn get(&self, q: usize) -> bool {
        self.bits & self.mask(q) != 0
    }

    #[inline]
    #[must_use]
    pub fn with(mut self, q: usize, on: bool) -> Self {
        let m = self.mask(q);
        if on {
            self.bits |= m;
        } else {
            self.bits &= !m;
        }
        self
    }

    /// Number of ones.
    #[inline]
    pub fn excitation_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Positions of the ones, left to right.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&q| self.get(q))
    }

    /// Appends `other` to the right of `self`.
    pub fn concat(&self, other: &MultiIndex) -> Result<MultiIndex> {
        let len = self.len() + other.len();
        if len > MAX_QUBITS {
            return Err(Error::Argument(format!("{len} qubits exceed {MAX_QUBITS}")));
        }
        let bits = if other.len() == 128 {
            other.bits
        } else {
            (self.bits << other.len()) | other.bits
        };
        Ok(MultiIndex {
            bits,
            len: len as u8,
        })
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len() {
            f.write_str(if self.get(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}⟩")
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > MAX_QUBITS {
            return Err(Error::Argument(format!(
                "{} qubits exceed {MAX_QUBITS}",
                s.len()
            )));
        }
        let mut idx = MultiIndex::zeros(s.len());
        for (q, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => idx = idx.with(q, true),
                _ => return Err(Error::Argument(format!("bad bit '{c}' in \"{s}\""))),
            }
        }
        Ok(idx)
    }
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All bitstrings of `num_qubits` bits with exactly `excitations` ones,
/// ascending by binary value.
pub fn enumerate_sector(num_qubits: usize, excitations: usize) -> Result<Vec<MultiIndex>> {
    if num_qubits > MAX_QUBITS {
        return Err(Error::Argument(format!(
            "{num_qubits} qubits exceed {MAX_QUBITS}"
        )));
    }
    if excitations > num_qubits {
        return Err(Error::Argument(format!(
            "excitation count {excitations} exceeds qubit count {num_qubits}"
        )));
    }
    let count = binomial(num_qubits, excitations);
    let count = usize::try_from(count).map_err(|_| {
        Error::Argument(format!("sector C({num_qubits},{excitations}) is too large"))
    })?;
    let mut out = Vec::with_capacity(count);
    if excitations == 0 {
        out.push(MultiIndex::zeros(num_qubits));
        return Ok(out);
    }
    // Gosper's hack walks same-popcount values in increasing order.
    let mut x: u128 = if excitations == 128 {
        u128::MAX
    } else {
        (1u128 << excitations) - 1
    };
    for i in 0..count {
        out.push(MultiIndex {
            bits: x,
            len: num_qubits as u8,
        });
        if i + 1 == count {
            break;
        }
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    Ok(out)
}

/// Position of `index` inside `enumerate_sector(len, excitation_count)`.
pub fn sector_rank(index: &MultiIndex) -> usize {
    let n = index.len();
    let mut remaining = index.excitation_count();
    let mut rank: u128 = 0;
    for q in 0..n {
        if remaining == 0 {
            break;
        }
        if index.get(q) {
            // every string with a 0 here and all remaining ones further right is smaller
            let below = n - 1 - q;
            rank += binomial(below, remaining);
            remaining -= 1;
        }
    }
    rank as usize
}

/// Inverse of [`sector_rank`].
pub fn sector_unrank(num_qubits: usize, excitations: usize, rank: usize) -> Result<MultiIndex> {
    let total = binomial(num_qubits, excitations);
    if excitations > num_qubits || rank as u128 >= total {
        return Err(Error::Argument(format!(
            "rank {rank} outside sector C({num_qubits},{excitations})"
        )));
    }
    let mut idx = MultiIndex::zeros(num_qubits);
    let mut remaining = excitations;
    let mut r = rank as u128;
    for q in 0..num_qubits {
        if remaining == 0 {
            break;
        }
        let below = num_qubits - 1 - q;
        let skip = binomial(below, remaining);
        if r >= skip {
            idx = idx.with(q, true);
            r -= skip;
            remaining -= 1;
        }
    }
    Ok(idx)
}

/// Qubit geometry of the whole system.
///
/// Senders occupy contiguous global ranges in sender order; inside a sender,
/// rows follow each other. The receiver is an ordered list of global qubits:
/// slot `t` of a receiver pattern refers to `receiver_qubits()[t]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemLayout {
    senders: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    receiver: Vec<usize>,
    total_qubits: usize,
}

impl SystemLayout {
    /// `senders[s]` lists the row lengths of sender `s`.
    pub fn new(senders: Vec<Vec<usize>>, receiver: Vec<usize>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(senders.len());
        let mut total = 0usize;
        for rows in &senders {
            offsets.push(total);
            total += rows.iter().sum::<usize>();
        }
        if total > MAX_QUBITS {
            return Err(Error::Argument(format!(
                "{total} qubits exceed {MAX_QUBITS}"
            )));
        }
        let mut seen = vec![false; total];
        for &q in &receiver {
            if q >= total {
                return Err(Error::Argument(format!(
                    "receiver qubit {q} outside {total}-qubit system"
                )));
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::Argument(format!("receiver qubit {q} listed twice")));
            }
        }
        Ok(SystemLayout {
            senders,
            offsets,
            receiver,
            total_qubits: total,
        })
    }

    pub fn total_qubits(&self) -> usize {
        self.total_qubits
    }

    pub fn sender_count(&self) -> usize {
        self.senders.len()
    }

    pub fn sender_rows(&self, sender: usize) -> &[usize] {
        &self.senders[sender]
    }

    pub fn sender_qubits(&self, sender: usize) -> usize {
        self.senders[sender].iter().sum()
    }

    pub fn sender_offset(&self, sender: usize) -> usize {
        self.offsets[sender]
    }

    /// Sender owning global qubit `q`.
    pub fn sender_of(&self, q: usize) -> usize {
        match self.offsets.binary_search(&q) {
            Ok(mut s) => {
                // skip zero-width senders sharing the offset
                while s + 1 < self.offsets.len() && self.offsets[s + 1] == q {
                    s += 1;
                }
                s
            }
            Err(s) => s - 1,
        }
    }

    pub fn receiver_qubits(&self) -> &[usize] {
        &self.receiver
    }

    pub fn receiver_len(&self) -> usize {
        self.receiver.len()
    }

    /// Global qubits that are not part of the receiver, ascending.
    pub fn traced_qubits(&self) -> Vec<usize> {
        let mut mark = vec![false; self.total_qubits];
        for &q in &self.receiver {
            mark[q] = true;
        }
        (0..self.total_qubits).filter(|&q| !mark[q]).collect()
    }

    /// Global index with the receiver set to `pattern` and every other qubit 0.
    pub fn embed_receiver(&self, pattern: &MultiIndex) -> Result<MultiIndex> {
        if pattern.len() != self.receiver.len() {
            return Err(Error::Shape(format!(
                "receiver pattern has {} bits, receiver has {}",
                pattern.len(),
                self.receiver.len()
            )));
        }
        let mut g = MultiIndex::zeros(self.total_qubits);
        for t in pattern.ones() {
            g = g.with(self.receiver[t], true);
        }
        Ok(g)
    }

    /// Receiver slice of a global index.
    pub fn receiver_pattern(&self, global: &MultiIndex) -> MultiIndex {
        let mut p = MultiIndex::zeros(self.receiver.len());
        for (t, &q) in self.receiver.iter().enumerate() {
            if global.get(q) {
                p = p.with(t, true);
            }
        }
        p
    }
}

/// Pure single-excitation state of one sender: `vacuum·|0…0⟩ + Σ a_q |1_q⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SenderState<T: Real> {
    num_qubits: usize,
    vacuum: Complex<T>,
    excitations: Vec<(usize, Complex<T>)>,
}

impl<T: Real> SenderState<T> {
    /// Places `amplitude` on qubit `q` for each `(q, amplitude)` and fills the
    /// vacuum with the real positive remainder.
    pub fn from_placements(
        num_qubits: usize,
        placements: impl IntoIterator<Item = (usize, Complex<T>)>,
    ) -> Result<Self> {
        let mut excitations: Vec<(usize, Complex<T>)> = placements.into_iter().collect();
        excitations.sort_by_key(|&(q, _)| q);
        for w in excitations.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Argument(format!("qubit {} encoded twice", w[0].0)));
            }
        }
        if let Some(&(q, _)) = excitations.iter().find(|&&(q, _)| q >= num_qubits) {
            return Err(Error::Argument(format!(
                "qubit {q} outside {num_qubits}-qubit sender"
            )));
        }
        let payload: T = excitations.iter().map(|(_, a)| a.norm_sqr()).sum();
        let residual = T::one() - payload;
        if residual <= T::zero() {
            return Err(Error::Normalization {
                sender: 0,
                payload: payload.as_f64(),
                residual: residual.as_f64(),
            });
        }
        if residual < T::lit(T::DEGENERATE_RESIDUAL) {
            return Err(Error::DegenerateVacuum {
                sender: 0,
                residual: residual.as_f64(),
            });
        }
        excitations.retain(|(_, a)| *a != zero());
        Ok(SenderState {
            num_qubits,
            vacuum: real(residual.sqrt()),
            excitations,
        })
    }

    /// Writes the row vectors onto consecutive qubits and `extras` onto their
    /// own positions. Extra positions index the final register; row entries
    /// take the remaining positions in ascending order.
    pub fn encode(rows: &[Vec<Complex<T>>], extras: &[(usize, Complex<T>)]) -> Result<Self> {
        let num_qubits = rows.iter().map(Vec::len).sum::<usize>() + extras.len();
        let reserved: Vec<usize> = extras.iter().map(|&(q, _)| q).collect();
        let free = (0..num_qubits).filter(|q| !reserved.contains(q));
        let placements = free
            .zip(rows.iter().flatten().copied())
            .chain(extras.iter().copied());
        Self::from_placements(num_qubits, placements)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Coefficient of `|0…0⟩` (real positive).
    pub fn vacuum_amplitude(&self) -> Complex<T> {
        self.vacuum
    }

    /// Non-vacuum terms as `(qubit, amplitude)`, ascending by qubit.
    pub fn excitations(&self) -> &[(usize, Complex<T>)] {
        &self.excitations
    }

    /// Non-vacuum terms keyed by their sender-local multi-index.
    pub fn amplitudes(&self) -> impl Iterator<Item = (MultiIndex, Complex<T>)> + '_ {
        let n = self.num_qubits;
        self.excitations
            .iter()
            .map(move |&(q, a)| (MultiIndex::zeros(n).with(q, true), a))
    }

    pub fn amplitude(&self, index: &MultiIndex) -> Complex<T> {
        match index.excitation_count() {
            0 => self.vacuum,
            1 => {
                let q = index.ones().next().unwrap_or(0);
                self.excitations
                    .iter()
                    .find(|&&(p, _)| p == q)
                    .map_or(zero(), |&(_, a)| a)
            }
            _ => zero(),
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.vacuum.norm_sqr() + self.payload_norm_sqr()
    }

    pub fn payload_norm_sqr(&self) -> T {
        self.excitations.iter().map(|(_, a)| a.norm_sqr()).sum()
    }
}

/// Free function form of [`SenderState::encode`].
pub fn encode_sender<T: Real>(
    rows: &[Vec<Complex<T>>],
    extras: &[(usize, Complex<T>)],
) -> Result<SenderState<T>> {
    SenderState::encode(rows, extras)
}

/// Sparse pure state of the whole system.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState<T: Real> {
    num_qubits: usize,
    amplitudes: BTreeMap<MultiIndex, Complex<T>>,
}

impl<T: Real> JointState<T> {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn get(&self, index: &MultiIndex) -> Complex<T> {
        self.amplitudes.get(index).copied().unwrap_or_else(zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex<T>)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn vacuum_amplitude(&self) -> Complex<T> {
        self.get(&MultiIndex::zeros(self.num_qubits))
    }

    pub fn max_excitation(&self) -> usize {
        self.amplitudes
            .keys()
            .map(MultiIndex::excitation_count)
            .max()
            .unwrap_or(0)
    }

    /// Dense amplitude vector of length `2^N`, indexed by binary value.
    pub fn to_dense(&self) -> Vec<Complex<T>> {
        let mut v = vec![zero(); 1usize << self.num_qubits];
        for (k, a) in &self.amplitudes {
            v[k.value() as usize] = *a;
        }
        v
    }
}

/// Product state `ψ₁ ⊗ ⋯ ⊗ ψₙ` with sender registers in layout order.
pub fn tensor_product<T: Real>(
    states: &[SenderState<T>],
    layout: &SystemLayout,
) -> Result<JointState<T>> {
    if states.len() != layout.sender_count() {
        return Err(Error::Shape(format!(
            "{} sender states for a {}-sender layout",
            states.len(),
            layout.sender_count()
        )));
    }
    let mut acc: BTreeMap<MultiIndex, Complex<T>> = BTreeMap::new();
    acc.insert(MultiIndex::zeros(0), one());
    for (s, state) in states.iter().enumerate() {
        if state.num_qubits() != layout.sender_qubits(s) {
            return Err(Error::Shape(format!(
                "sender {s} has {} qubits, layout expects {}",
                state.num_qubits(),
                layout.sender_qubits(s)
            )));
        }
        let local: Vec<(MultiIndex, Complex<T>)> = std::iter::once((
            MultiIndex::zeros(state.num_qubits()),
            state.vacuum_amplitude(),
        ))
        .chain(state.amplitudes())
        .collect();
        let mut next = BTreeMap::new();
        for (k, a) in &acc {
            for (l, b) in &local {
                next.insert(k.concat(l)?, *a * *b);
            }
        }
        acc = next;
    }
    Ok(JointState {
        num_qubits: layout.total_qubits(),
        amplitudes: acc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn bits(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    #[test]
    fn sector_4_2_matches_listed_basis() {
        let got: Vec<String> = enumerate_sector(4, 2)
            .unwrap()
            .iter()
            .map(|m| m.to_string())
            .collect();
        assert_eq!(got, ["0011", "0101", "0110", "1001", "1010", "1100"]);
    }

    #[test]
    fn zero_excitation_sector() {
        assert_eq!(enumerate_sector(3, 0).unwrap(), vec![bits("000")]);
    }

    #[test]
    fn sector_6_2_against_brute_force() {
        let brute: Vec<MultiIndex> = (0u128..64)
            .filter(|v| v.count_ones() == 2)
            .map(|v| MultiIndex::from_value(v, 6).unwrap())
            .collect();
        let got = enumerate_sector(6, 2).unwrap();
        assert_eq!(got.len(), 15);
        assert_eq!(got, brute);
        assert_eq!(got[0].to_string(), "000011");
        assert_eq!(got[14].to_string(), "110000");
    }

    #[test]
    fn out_of_range_excitations() {
        assert!(matches!(enumerate_sector(3, 4), Err(Error::Argument(_))));
    }

    #[test]
    fn ranks() {
        assert_eq!(sector_rank(&bits("0101")), 1);
        assert_eq!(sector_rank(&bits("1100")), 5);
        assert_eq!(sector_rank(&bits("000011")), 0);
        assert_eq!(sector_unrank(4, 2, 5).unwrap(), bits("1100"));
    }

    #[test]
    fn full_width_sector() {
        let s = enumerate_sector(128, 128).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].excitation_count(), 128);
        let s = enumerate_sector(128, 1).unwrap();
        assert_eq!(s.len(), 128);
        assert_eq!(sector_rank(&s[127]), 127);
    }

    #[test]
    fn encode_worked_row() {
        let s = SenderState::encode(&[vec![c(0.75), c(0.25)]], &[]).unwrap();
        assert!((s.vacuum_amplitude().re - 6f64.sqrt() / 4.0).abs() < 1e-15);
        assert_eq!(s.amplitude(&bits("10")), c(0.75));
        assert_eq!(s.amplitude(&bits("01")), c(0.25));
        assert_eq!(s.amplitude(&bits("11")), c(0.0));
    }

    #[test]
    fn encode_zero_row() {
        let s = SenderState::encode(&[vec![c(0.0), c(0.0)]], &[]).unwrap();
        assert_eq!(s.vacuum_amplitude(), c(1.0));
        assert!(s.excitations().is_empty());
    }

    #[test]
    fn encode_with_aux_extra() {
        let sigma = 1.0 / (2.0 * 2f64.sqrt());
        let s = SenderState::encode(&[vec![c(0.75), c(0.25)]], &[(2, c(sigma))]).unwrap();
        assert!((s.vacuum_amplitude().re - 0.5).abs() < 1e-15);
        assert_eq!(s.amplitude(&bits("001")), c(sigma));
        assert_eq!(s.amplitude(&bits("100")), c(0.75));
    }

    #[test]
    fn extra_at_front_shifts_rows() {
        let s = SenderState::encode(
            &[vec![c(0.1), c(0.2)], vec![c(0.3), c(0.4)]],
            &[(0, c(0.5))],
        )
        .unwrap();
        assert_eq!(s.num_qubits(), 5);
        assert_eq!(s.amplitude(&bits("10000")), c(0.5));
        assert_eq!(s.amplitude(&bits("01000")), c(0.1));
        assert_eq!(s.amplitude(&bits("00001")), c(0.4));
    }

    #[test]
    fn normalization_errors() {
        assert!(matches!(
            SenderState::encode(&[vec![c(0.8), c(0.6)]], &[]),
            Err(Error::Normalization { .. }) | Err(Error::DegenerateVacuum { .. })
        ));
        assert!(matches!(
            SenderState::encode(&[vec![c(1.0), c(0.6)]], &[]),
            Err(Error::Normalization { .. })
        ));
        let tiny = (1.0f64 - 1e-13).sqrt();
        assert!(matches!(
            SenderState::encode(&[vec![c(tiny)]], &[]),
            Err(Error::DegenerateVacuum { .. })
        ));
    }

    #[test]
    fn worked_joint_amplitudes() {
        let layout = SystemLayout::new(vec![vec![2], vec![2]], vec![1, 3]).unwrap();
        let s1 = SenderState::encode(&[vec![c(0.75), c(0.25)]], &[]).unwrap();
        let s2 = SenderState::encode(&[vec![c(0.25), c(0.75)]], &[]).unwrap();
        let j = tensor_product(&[s1, s2], &layout).unwrap();
        assert!((j.get(&bits("1001")).re - 9.0 / 16.0).abs() < 1e-15);
        assert!((j.get(&bits("0000")).re - 3.0 / 8.0).abs() < 1e-15);
        assert_eq!(j.len(), 9);
        assert_eq!(j.max_excitation(), 2);
        assert!((j.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_sender_product_is_identity() {
        let layout = SystemLayout::new(vec![vec![3]], vec![2]).unwrap();
        let s = SenderState::encode(&[vec![c(0.1), Complex::new(0.0, 0.2), c(0.3)]], &[]).unwrap();
        let j = tensor_product(std::slice::from_ref(&s), &layout).unwrap();
        assert_eq!(j.get(&bits("000")), s.vacuum_amplitude());
        for (k, a) in s.amplitudes() {
            assert_eq!(j.get(&k), a);
        }
        assert_eq!(j.len(), 4);
    }

    #[test]
    fn layout_mismatch() {
        let layout = SystemLayout::new(vec![vec![2], vec![2]], vec![1, 3]).unwrap();
        let s = SenderState::encode(&[vec![c(0.1)]], &[]).unwrap();
        assert!(tensor_product(&[s.clone(), s], &layout).is_err());
    }

    #[test]
    fn receiver_embedding() {
        let layout = SystemLayout::new(vec![vec![2], vec![2]], vec![1, 3]).unwrap();
        let g = layout.embed_receiver(&bits("11")).unwrap();
        assert_eq!(g, bits("0101"));
        assert_eq!(layout.receiver_pattern(&bits("1101")), bits("11"));
        assert_eq!(layout.traced_qubits(), vec![0, 2]);
        assert_eq!(layout.sender_of(2), 1);
        assert!(SystemLayout::new(vec![vec![2]], vec![1, 1]).is_err());
    }

    #[test]
    fn multiindex_parse_display() {
        let m = bits("0110");
        assert_eq!(m.to_string(), "0110");
        assert_eq!(m.value(), 6);
        assert_eq!(m.excitation_count(), 2);
        assert_eq!(m.ones().collect::<Vec<_>>(), vec![1, 2]);
        assert!("01x".parse::<MultiIndex>().is_err());
        assert_eq!(bits("01").concat(&bits("10")).unwrap(), bits("0110"));
    }
}
