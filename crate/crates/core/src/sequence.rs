//! q-ary sequences, their aperiodic autocorrelation and the exact
//! complementary-pair predicate.

use thiserror::Error;

use crate::cyclotomic::CycloElem;
use crate::par::{self, Parallelism};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
    #[error("sequence must be non-empty")]
    Empty,
    #[error("exponent {value} at index {index} is outside Z_{q}")]
    ExponentOutOfRange {
        index: usize,
        value: usize,
        q: usize,
    },
    #[error("pair members differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("pair members differ in alphabet: {0} vs {1}")]
    AlphabetMismatch(usize, usize),
    #[error("scale factor must be positive")]
    ZeroScale,
}

/// A sequence `(z^{e_0}, …, z^{e_{M-1}})` over a primitive q-th root `z`,
/// stored by its exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QarySeq {
    q: usize,
    exps: Vec<usize>,
}

impl QarySeq {
    pub fn new(q: usize, exps: Vec<usize>) -> Result<Self, SequenceError> {
        if q < 2 {
            return Err(SequenceError::AlphabetTooSmall(q));
        }
        if exps.is_empty() {
            return Err(SequenceError::Empty);
        }
        if let Some((index, &value)) = exps.iter().enumerate().find(|(_, &e)| e >= q) {
            return Err(SequenceError::ExponentOutOfRange { index, value, q });
        }
        Ok(Self { q, exps })
    }

    /// Builds from arbitrary integers, reducing each mod `q`.
    pub fn from_ints(q: usize, exps: &[i64]) -> Result<Self, SequenceError> {
        if q < 2 {
            return Err(SequenceError::AlphabetTooSmall(q));
        }
        Self::new(
            q,
            exps.iter()
                .map(|e| e.rem_euclid(q as i64) as usize)
                .collect(),
        )
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exps(&self) -> &[usize] {
        &self.exps
    }

    /// Aperiodic autocorrelation at shift `lam`; zero for `|lam| >= M`.
    pub fn aacf(&self, lam: i64) -> CycloElem {
        let mut acc = CycloElem::zero(self.q).expect("q >= 2");
        self.accumulate_aacf(lam, &mut acc);
        acc
    }

    fn accumulate_aacf(&self, lam: i64, acc: &mut CycloElem) {
        let m = self.exps.len();
        let shift = lam.unsigned_abs() as usize;
        if shift >= m {
            return;
        }
        for l in 0..m - shift {
            let (x, y) = (self.exps[l] as i64, self.exps[l + shift] as i64);
            let e = if lam >= 0 { x - y } else { y - x };
            acc.add_root_term(e, 1)
                .expect("term count far below i64 range");
        }
    }

    /// Exponent-wise `e -> k·e` into `Z_{kq}`; the complex values are unchanged.
    pub fn rescale_alphabet(&self, k: usize) -> Result<Self, SequenceError> {
        if k == 0 {
            return Err(SequenceError::ZeroScale);
        }
        Ok(Self {
            q: self.q * k,
            exps: self.exps.iter().map(|&e| e * k).collect(),
        })
    }

    pub fn reversed(&self) -> Self {
        Self {
            q: self.q,
            exps: self.exps.iter().rev().copied().collect(),
        }
    }

    /// Multiplies every entry by `z^c`.
    pub fn phase_shifted(&self, c: usize) -> Self {
        Self {
            q: self.q,
            exps: self.exps.iter().map(|&e| (e + c) % self.q).collect(),
        }
    }
}

/// Two candidate members of a complementary pair, equal in length and alphabet.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeqPair {
    a: QarySeq,
    b: QarySeq,
}

impl SeqPair {
    pub fn new(a: QarySeq, b: QarySeq) -> Result<Self, SequenceError> {
        if a.q != b.q {
            return Err(SequenceError::AlphabetMismatch(a.q, b.q));
        }
        if a.len() != b.len() {
            return Err(SequenceError::LengthMismatch(a.len(), b.len()));
        }
        Ok(Self { a, b })
    }

    pub fn from_exps(q: usize, a: Vec<usize>, b: Vec<usize>) -> Result<Self, SequenceError> {
        Self::new(QarySeq::new(q, a)?, QarySeq::new(q, b)?)
    }

    pub fn a(&self) -> &QarySeq {
        &self.a
    }

    pub fn b(&self) -> &QarySeq {
        &self.b
    }

    pub fn q(&self) -> usize {
        self.a.q
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_parts(self) -> (QarySeq, QarySeq) {
        (self.a, self.b)
    }

    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            a: self.a.reversed(),
            b: self.b.reversed(),
        }
    }

    pub fn rescale_alphabet(&self, k: usize) -> Result<Self, SequenceError> {
        Ok(Self {
            a: self.a.rescale_alphabet(k)?,
            b: self.b.rescale_alphabet(k)?,
        })
    }

    /// `C_a(lam) + C_b(lam)`.
    pub fn correlation_sum(&self, lam: i64) -> CycloElem {
        let mut acc = self.a.aacf(lam);
        self.b.accumulate_aacf(lam, &mut acc);
        acc
    }

    /// All shifts `1..M` cancel. Length-1 pairs hold vacuously.
    pub fn is_gcp(&self) -> bool {
        self.first_failing_shift().is_none()
    }

    pub fn first_failing_shift(&self) -> Option<usize> {
        (1..self.len()).find(|&lam| !self.correlation_sum(lam as i64).is_zero())
    }

    /// Checks every positive shift, possibly in parallel. The reported failure
    /// is always the smallest failing shift.
    pub fn verify(&self, par: Parallelism) -> GcpReport {
        let shifts = self.len().saturating_sub(1);
        let failure = if par.is_sequential() {
            self.first_failing_shift()
                .map(|lam| (lam, self.correlation_sum(lam as i64)))
        } else {
            par::map_range(shifts, par, |i| {
                let sum = self.correlation_sum(i as i64 + 1);
                (!sum.is_zero()).then_some((i + 1, sum))
            })
            .into_iter()
            .flatten()
            .next()
        };
        GcpReport {
            shifts_checked: shifts,
            failure,
        }
    }
}

/// Outcome of an exhaustive shift check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GcpReport {
    pub shifts_checked: usize,
    /// Smallest shift with a nonzero correlation sum, and that sum.
    pub failure: Option<(usize, CycloElem)>,
}

impl GcpReport {
    pub fn is_gcp(&self) -> bool {
        self.failure.is_none()
    }
}
