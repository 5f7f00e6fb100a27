//! Extended-Boolean-function expansion of a quaternary seed pair.
//!
//! A seed `(φ₁, φ₂)` of length `M` over `Z_4` and parameters
//! `(m, h, π, c, θ, θ')` define, for `x ∈ Z_2^m` and `y ∈ Z_M`,
//!
//! ```text
//! f(x, y) = 2h Σ_{k<m} x_{π(k)} x_{π(k+1)} + Σ_k c_k x_k + h·[x_{π(m)}(φ₂(y) − φ₁(y)) + φ₁(y)]
//! a(x, y) = f(x, y) + θ
//! b(x, y) = f(x, y) + 2h·x_{π(1)} + θ'
//! ```
//!
//! over `Z_{4h}`, read off at `I = I'·M + y` with `x_1` the most significant
//! bit of `I'`. The resulting `4h`-ary pair of length `M·2^m` is
//! complementary exactly when the seed is.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::cyclotomic::{CycloElem, CycloError};
use crate::par::{self, Parallelism};
use crate::sequence::{QarySeq, SeqPair, SequenceError};

/// Largest supported number of binary variables.
pub const MAX_VARS: usize = 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("seed must be quaternary, got q = {0}")]
    SeedNotQuaternary(usize),
    #[error("seed members differ in length: {0} vs {1}")]
    SeedLengthMismatch(usize, usize),
    #[error("number of binary variables must be in 1..={MAX_VARS}, got {0}")]
    BadVarCount(usize),
    #[error("alphabet scale h must be positive")]
    ZeroScale,
    #[error("{0:?} is not a permutation of 1..={1}")]
    BadPermutation(Vec<usize>, usize),
    #[error("expected {expected} linear coefficients, got {got}")]
    CoeffCount { expected: usize, got: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("expected {expected} bits, got {got}")]
    BitCount { expected: usize, got: usize },
    #[error("output length overflows")]
    TooLong,
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Cyclo(#[from] CycloError),
}

/// A quaternary seed pair `(φ₁, φ₂)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeedPair {
    phi1: QarySeq,
    phi2: QarySeq,
}

impl SeedPair {
    pub fn new(phi1: QarySeq, phi2: QarySeq) -> Result<Self, ConstructError> {
        for s in [&phi1, &phi2] {
            if s.q() != 4 {
                return Err(ConstructError::SeedNotQuaternary(s.q()));
            }
        }
        if phi1.len() != phi2.len() {
            return Err(ConstructError::SeedLengthMismatch(phi1.len(), phi2.len()));
        }
        Ok(Self { phi1, phi2 })
    }

    pub fn from_exps(phi1: Vec<usize>, phi2: Vec<usize>) -> Result<Self, ConstructError> {
        Self::new(QarySeq::new(4, phi1)?, QarySeq::new(4, phi2)?)
    }

    pub fn from_pair(pair: &SeqPair) -> Result<Self, ConstructError> {
        Self::new(pair.a().clone(), pair.b().clone())
    }

    pub fn phi1(&self) -> &QarySeq {
        &self.phi1
    }

    pub fn phi2(&self) -> &QarySeq {
        &self.phi2
    }

    pub fn len(&self) -> usize {
        self.phi1.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_pair(&self) -> SeqPair {
        SeqPair::new(self.phi1.clone(), self.phi2.clone()).expect("validated at construction")
    }

    pub fn is_gcp(&self) -> bool {
        self.to_pair().is_gcp()
    }
}

/// Parameters of the expansion. The permutation is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpansionParams {
    m: usize,
    h: usize,
    perm: Vec<usize>,
    coeffs: Vec<usize>,
    theta: usize,
    theta_prime: usize,
}

impl ExpansionParams {
    pub fn new(
        m: usize,
        h: usize,
        perm: Vec<usize>,
        coeffs: Vec<i64>,
        theta: i64,
        theta_prime: i64,
    ) -> Result<Self, ConstructError> {
        if m == 0 || m > MAX_VARS {
            return Err(ConstructError::BadVarCount(m));
        }
        if h == 0 {
            return Err(ConstructError::ZeroScale);
        }
        let mut seen = vec![false; m];
        for &p in &perm {
            if p == 0 || p > m || std::mem::replace(&mut seen[p - 1], true) {
                return Err(ConstructError::BadPermutation(perm, m));
            }
        }
        if perm.len() != m {
            return Err(ConstructError::BadPermutation(perm, m));
        }
        if coeffs.len() != m {
            return Err(ConstructError::CoeffCount {
                expected: m,
                got: coeffs.len(),
            });
        }
        let q = 4 * h as i64;
        let red = |v: i64| v.rem_euclid(q) as usize;
        Ok(Self {
            m,
            h,
            perm,
            coeffs: coeffs.into_iter().map(red).collect(),
            theta: red(theta),
            theta_prime: red(theta_prime),
        })
    }

    /// Identity permutation, all-ones coefficients; `θ = 1, θ' = 0` for
    /// `m = 1` and `θ = θ' = 1` otherwise.
    pub fn defaults(m: usize, h: usize) -> Result<Self, ConstructError> {
        let theta_prime = if m == 1 { 0 } else { 1 };
        Self::new(m, h, (1..=m).collect(), vec![1; m], 1, theta_prime)
    }

    /// Uniformly random `π`, `c`, `θ`, `θ'` for the given `m` and `h`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        m: usize,
        h: usize,
    ) -> Result<Self, ConstructError> {
        let q = 4 * h as i64;
        let mut perm: Vec<usize> = (1..=m).collect();
        perm.shuffle(rng);
        let coeffs = (0..m).map(|_| rng.random_range(0..q)).collect();
        Self::new(
            m,
            h,
            perm,
            coeffs,
            rng.random_range(0..q),
            rng.random_range(0..q),
        )
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// Output alphabet size `4h`.
    pub fn q(&self) -> usize {
        4 * self.h
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn coeffs(&self) -> &[usize] {
        &self.coeffs
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn theta_prime(&self) -> usize {
        self.theta_prime
    }

    /// `x_{π(k)}` for 1-based `k`.
    fn permuted_bit(&self, bits: &[u8], k: usize) -> usize {
        bits[self.perm[k - 1] - 1] as usize
    }
}

/// Splits `index = I'·M + y` and expands `I'` into `m` bits, most significant
/// first (`bits[0]` is `x_1`).
pub fn index_decompose(
    index: usize,
    m: usize,
    seed_len: usize,
) -> Result<(Vec<u8>, usize), ConstructError> {
    let len = output_len(seed_len, m)?;
    if index >= len {
        return Err(ConstructError::IndexOutOfRange { index, len });
    }
    let (hi, y) = (index / seed_len, index % seed_len);
    let bits = (1..=m).map(|k| ((hi >> (m - k)) & 1) as u8).collect();
    Ok((bits, y))
}

fn output_len(seed_len: usize, m: usize) -> Result<usize, ConstructError> {
    if m > MAX_VARS {
        return Err(ConstructError::BadVarCount(m));
    }
    seed_len
        .checked_mul(1usize << m)
        .ok_or(ConstructError::TooLong)
}

/// Evaluates `f(x, y)` in `Z_{4h}`.
///
/// The bracket `x_{π(m)}(φ₂(y) − φ₁(y)) + φ₁(y)` is computed in `Z_4` and then
/// scaled by `h`.
pub fn eval_f(
    params: &ExpansionParams,
    seed: &SeedPair,
    bits: &[u8],
    y: usize,
) -> Result<usize, ConstructError> {
    if bits.len() != params.m {
        return Err(ConstructError::BitCount {
            expected: params.m,
            got: bits.len(),
        });
    }
    if y >= seed.len() {
        return Err(ConstructError::IndexOutOfRange {
            index: y,
            len: seed.len(),
        });
    }
    Ok(eval_f_unchecked(params, seed, bits, y))
}

fn eval_f_unchecked(params: &ExpansionParams, seed: &SeedPair, bits: &[u8], y: usize) -> usize {
    let (m, h) = (params.m, params.h);
    let q = 4 * h;
    let quad: usize = (1..m)
        .map(|k| params.permuted_bit(bits, k) * params.permuted_bit(bits, k + 1))
        .sum();
    let lin: usize = params
        .coeffs
        .iter()
        .zip(bits)
        .map(|(&c, &x)| c * x as usize)
        .sum();
    let (p1, p2) = (seed.phi1.exps()[y], seed.phi2.exps()[y]);
    let diff = (p2 + 4 - p1) % 4;
    let bracket = (params.permuted_bit(bits, m) * diff + p1) % 4;
    (2 * h * quad + lin + h * bracket) % q
}

/// The `(a_I, b_I)` exponents at one index.
fn pair_entry(params: &ExpansionParams, seed: &SeedPair, index: usize) -> (usize, usize) {
    let (bits, y) = index_decompose(index, params.m, seed.len()).expect("index in range");
    let q = params.q();
    let f = eval_f_unchecked(params, seed, &bits, y);
    let a = (f + params.theta) % q;
    let b = (f + 2 * params.h * params.permuted_bit(&bits, 1) + params.theta_prime) % q;
    (a, b)
}

/// Builds the `4h`-ary pair of length `M·2^m`.
pub fn construct_pair(
    seed: &SeedPair,
    params: &ExpansionParams,
) -> Result<SeqPair, ConstructError> {
    construct_pair_with(seed, params, Parallelism::Sequential)
}

pub fn construct_pair_with(
    seed: &SeedPair,
    params: &ExpansionParams,
    par: Parallelism,
) -> Result<SeqPair, ConstructError> {
    let len = output_len(seed.len(), params.m)?;
    let entries = par::map_range(len, par, |i| pair_entry(params, seed, i));
    let (a, b): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
    Ok(SeqPair::from_exps(params.q(), a, b)?)
}

/// Both sides of the seed/expansion equivalence, checked independently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremReport {
    pub seed_is_gcp: bool,
    pub constructed_is_gcp: bool,
    pub equivalence_holds: bool,
    /// Smallest shift failing on either side.
    pub first_failing_shift: Option<usize>,
    pub seed_failure: Option<usize>,
    pub constructed_failure: Option<usize>,
}

pub fn verify_theorem(
    seed: &SeedPair,
    params: &ExpansionParams,
) -> Result<TheoremReport, ConstructError> {
    verify_theorem_with(seed, params, Parallelism::Sequential)
}

pub fn verify_theorem_with(
    seed: &SeedPair,
    params: &ExpansionParams,
    par: Parallelism,
) -> Result<TheoremReport, ConstructError> {
    let seed_failure = seed.to_pair().verify(par).failure.map(|f| f.0);
    let built = construct_pair_with(seed, params, par)?;
    let constructed_failure = built.verify(par).failure.map(|f| f.0);
    let first_failing_shift = match (seed_failure, constructed_failure) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    Ok(TheoremReport {
        seed_is_gcp: seed_failure.is_none(),
        constructed_is_gcp: constructed_failure.is_none(),
        equivalence_holds: seed_failure.is_none() == constructed_failure.is_none(),
        first_failing_shift,
        seed_failure,
        constructed_failure,
    })
}

/// Right-hand side of the expansion identity at shift `lam`:
/// `2^m·(C_{Φ₁}(lam) + C_{Φ₂}(lam))` carried into the order-`4h` ring.
///
/// Only same-block index pairs survive in `C_A + C_B`; each of the `2^m`
/// blocks is a scaled copy of one seed member, and `a` and `b` each pick up
/// `2^{m-1}` copies of both members, hence the factor `2^m` for the sum.
pub fn predicted_correlation(
    seed: &SeedPair,
    params: &ExpansionParams,
    lam: i64,
) -> Result<CycloElem, ConstructError> {
    let weight = 1i64 << params.m;
    Ok(seed
        .to_pair()
        .correlation_sum(lam)
        .scale_int(weight)?
        .promote(params.h)?)
}

/// Checks `C_A(λ) + C_B(λ) = 2^m(C_{Φ₁}(λ) + C_{Φ₂}(λ))` at every
/// positive shift of `pair`, which should be `construct_pair(seed, params)`.
/// Returns the smallest shift where the two sides differ.
pub fn expansion_identity_mismatch(
    seed: &SeedPair,
    params: &ExpansionParams,
    pair: &SeqPair,
    par: Parallelism,
) -> Result<Option<usize>, ConstructError> {
    let shifts = pair.len().saturating_sub(1);
    let checks = par::map_range(shifts, par, |i| -> Result<bool, ConstructError> {
        let lam = i as i64 + 1;
        let lhs = pair.correlation_sum(lam);
        let rhs = predicted_correlation(seed, params, lam)?;
        Ok(lhs.value_eq(&rhs)?)
    });
    for (i, ok) in checks.into_iter().enumerate() {
        if !ok? {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

/// One random `(seed, params)` instance for the property suites.
#[derive(Clone, Debug)]
pub struct RandomDraw {
    pub seed: SeedPair,
    pub params: ExpansionParams,
}

/// Draws a uniformly random quaternary seed with length in `lens`, and random
/// parameters with `m` in `ms` and `h` in `hs`.
pub fn random_draw<R: Rng + ?Sized>(
    rng: &mut R,
    lens: std::ops::RangeInclusive<usize>,
    ms: std::ops::RangeInclusive<usize>,
    hs: std::ops::RangeInclusive<usize>,
) -> Result<RandomDraw, ConstructError> {
    let len = rng.random_range(lens);
    let mut quat = || {
        (0..len)
            .map(|_| rng.random_range(0..4usize))
            .collect::<Vec<_>>()
    };
    let (p1, p2) = (quat(), quat());
    let seed = SeedPair::from_exps(p1, p2)?;
    let m = rng.random_range(ms);
    let h = rng.random_range(hs);
    let params = ExpansionParams::random(rng, m, h)?;
    Ok(RandomDraw { seed, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn len11() -> SeedPair {
        SeedPair::from_exps(
            vec![0, 1, 2, 0, 2, 1, 3, 2, 1, 1, 0],
            vec![0, 0, 3, 3, 3, 0, 0, 1, 2, 0, 2],
        )
        .unwrap()
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(index_decompose(0, 3, 5).unwrap(), (vec![0, 0, 0], 0));
        assert_eq!(index_decompose(35, 1, 18).unwrap(), (vec![1], 17));
        assert_eq!(index_decompose(43, 2, 11).unwrap(), (vec![1, 1], 10));
        assert_eq!(index_decompose(22, 2, 11).unwrap(), (vec![1, 0], 0));
        assert_eq!(
            index_decompose(44, 2, 11),
            Err(ConstructError::IndexOutOfRange { index: 44, len: 44 })
        );
    }

    #[test]
    fn decompose_recomposes() {
        for m in 1..=4 {
            for seed_len in 1..=6 {
                for i in 0..seed_len << m {
                    let (bits, y) = index_decompose(i, m, seed_len).unwrap();
                    let hi = bits.iter().fold(0, |acc, &b| acc * 2 + b as usize);
                    assert_eq!(hi * seed_len + y, i);
                }
            }
        }
    }

    #[test]
    fn eval_f_examples() {
        let seed = len11();
        for h in 1..=3 {
            let p = ExpansionParams::new(1, h, vec![1], vec![1], 1, 0).unwrap();
            for y in 0..11 {
                let phi1 = seed.phi1().exps()[y];
                let phi2 = seed.phi2().exps()[y];
                assert_eq!(eval_f(&p, &seed, &[0], y).unwrap(), h * phi1 % (4 * h));
                assert_eq!(
                    eval_f(&p, &seed, &[1], y).unwrap(),
                    (1 + h * phi2) % (4 * h)
                );
            }
        }
        let p = ExpansionParams::defaults(2, 1).unwrap();
        assert_eq!(eval_f(&p, &seed, &[1, 1], 0).unwrap(), 0);
        assert!(eval_f(&p, &seed, &[1, 1], 11).is_err());
        assert!(eval_f(&p, &seed, &[1], 0).is_err());
    }

    #[test]
    fn params_validation() {
        assert_eq!(
            ExpansionParams::new(0, 1, vec![], vec![], 0, 0),
            Err(ConstructError::BadVarCount(0))
        );
        assert_eq!(
            ExpansionParams::new(1, 0, vec![1], vec![0], 0, 0),
            Err(ConstructError::ZeroScale)
        );
        assert!(matches!(
            ExpansionParams::new(2, 1, vec![1, 1], vec![0, 0], 0, 0),
            Err(ConstructError::BadPermutation(..))
        ));
        assert!(matches!(
            ExpansionParams::new(2, 1, vec![0, 1], vec![0, 0], 0, 0),
            Err(ConstructError::BadPermutation(..))
        ));
        assert!(matches!(
            ExpansionParams::new(2, 1, vec![1], vec![0, 0], 0, 0),
            Err(ConstructError::BadPermutation(..))
        ));
        let p = ExpansionParams::new(2, 2, vec![2, 1], vec![-1, 9], -3, 8).unwrap();
        assert_eq!(p.coeffs(), &[7, 1]);
        assert_eq!((p.theta(), p.theta_prime()), (5, 0));
    }

    #[test]
    fn seed_validation() {
        let a = QarySeq::new(8, vec![0, 1]).unwrap();
        let b = QarySeq::new(4, vec![0, 1]).unwrap();
        assert_eq!(
            SeedPair::new(a, b.clone()),
            Err(ConstructError::SeedNotQuaternary(8))
        );
        let c = QarySeq::new(4, vec![0]).unwrap();
        assert_eq!(
            SeedPair::new(b, c),
            Err(ConstructError::SeedLengthMismatch(2, 1))
        );
    }

    #[test]
    fn length_one_seed_doubles_to_pair() {
        for v in 0..4 {
            let seed = SeedPair::from_exps(vec![v], vec![v]).unwrap();
            let p = ExpansionParams::new(1, 1, vec![1], vec![0], 0, 0).unwrap();
            let pair = construct_pair(&seed, &p).unwrap();
            assert_eq!(pair.a().exps(), &[v, v]);
            assert_eq!(pair.b().exps(), &[v, (v + 2) % 4]);
            assert!(pair.is_gcp());
        }
    }

    #[test]
    fn non_gcp_seed_report() {
        let seed = SeedPair::from_exps(vec![0, 0], vec![0, 0]).unwrap();
        for m in 1..=3 {
            let r = verify_theorem(&seed, &ExpansionParams::defaults(m, 2).unwrap()).unwrap();
            assert!(!r.seed_is_gcp && !r.constructed_is_gcp && r.equivalence_holds);
            assert_eq!(r.first_failing_shift, Some(1));
        }
    }

    #[test]
    fn difference_of_members() {
        let seed = len11();
        let p = ExpansionParams::new(3, 3, vec![3, 1, 2], vec![5, 0, 11], 7, 2).unwrap();
        let pair = construct_pair(&seed, &p).unwrap();
        assert_eq!(pair.len(), 88);
        assert_eq!(pair.q(), 12);
        for i in 0..pair.len() {
            let (bits, _) = index_decompose(i, 3, 11).unwrap();
            let expect = (2 * 3 * bits[2] as usize + 2 + 12 - 7) % 12;
            let got = (pair.b().exps()[i] + 12 - pair.a().exps()[i]) % 12;
            assert_eq!(got, expect, "index {i}");
        }
    }

    #[test]
    fn parallel_construction_matches() {
        let seed = len11();
        let p = ExpansionParams::new(4, 2, vec![2, 4, 1, 3], vec![1, 2, 3, 4], 3, 5).unwrap();
        let seq = construct_pair(&seed, &p).unwrap();
        let par = construct_pair_with(&seed, &p, Parallelism::Threads(4)).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn identity_detects_mutation() {
        let seed = len11();
        let p = ExpansionParams::defaults(2, 2).unwrap();
        let pair = construct_pair(&seed, &p).unwrap();
        assert_eq!(
            expansion_identity_mismatch(&seed, &p, &pair, Parallelism::Sequential).unwrap(),
            None
        );
        let (a, b) = pair.into_parts();
        let mut ea = a.exps().to_vec();
        ea[0] = (ea[0] + 1) % 8;
        let bad = SeqPair::from_exps(8, ea, b.exps().to_vec()).unwrap();
        assert!(
            expansion_identity_mismatch(&seed, &p, &bad, Parallelism::Sequential)
                .unwrap()
                .is_some()
        );
    }

    #[test]
    fn identity_holds_for_arbitrary_seeds() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut non_gcp = 0;
        for _ in 0..150 {
            let d = random_draw(&mut rng, 1..=7, 1..=4, 1..=3).unwrap();
            let pair = construct_pair(&d.seed, &d.params).unwrap();
            assert_eq!(
                expansion_identity_mismatch(&d.seed, &d.params, &pair, Parallelism::Sequential)
                    .unwrap(),
                None
            );
            non_gcp += usize::from(!d.seed.is_gcp());
        }
        assert!(non_gcp > 100);
    }

    #[test]
    fn identity_weight_against_a_direct_sum() {
        // Non-complementary seed, m = 1: C_A(1) + C_B(1) summed by hand in C.
        let seed = SeedPair::from_exps(vec![0, 1], vec![0, 0]).unwrap();
        let p = ExpansionParams::defaults(1, 1).unwrap();
        let pair = construct_pair(&seed, &p).unwrap();
        let direct = |e: &[usize]| -> num_complex::Complex64 {
            let z = |k: usize| {
                num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 4.0)
            };
            (0..e.len() - 1).map(|i| z(e[i]) * z(e[i + 1]).conj()).sum()
        };
        let lhs = direct(pair.a().exps()) + direct(pair.b().exps());
        let rhs = predicted_correlation(&seed, &p, 1).unwrap().to_complex();
        assert!((lhs - rhs).norm() < 1e-9, "{lhs} vs {rhs}");
        // Seed correlation at 1 is z^{-1} + 1, so the sum is 2(1 - i).
        assert!((rhs - num_complex::Complex64::new(2.0, -2.0)).norm() < 1e-9);
    }
}
