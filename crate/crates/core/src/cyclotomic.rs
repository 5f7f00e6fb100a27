//! Exact arithmetic in the group ring `Z[Z_n]`, read as integer combinations
//! of powers of a primitive n-th root of unity `z = e^{2πi/n}`.
//!
//! Elements are stored densely: `coeffs[j]` is the multiplicity of `z^j`.
//! The representation is not canonical, so value equality goes through
//! [`CycloElem::is_zero`], which reduces modulo the n-th cyclotomic
//! polynomial.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycloError {
    #[error("root order must be positive")]
    ZeroOrder,
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("coefficient overflow")]
    Overflow,
    #[error("coefficient vector has length {len}, expected order {order}")]
    BadLength { len: usize, order: usize },
}

/// Integer polynomial, ascending coefficients.
pub type IntPoly = Vec<BigInt>;

/// An element `Σ coeffs[j]·z^j` with `z` a primitive `order`-th root of unity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloElem {
    order: usize,
    coeffs: Vec<i64>,
}

impl CycloElem {
    pub fn zero(order: usize) -> Result<Self, CycloError> {
        if order == 0 {
            return Err(CycloError::ZeroOrder);
        }
        Ok(Self {
            order,
            coeffs: vec![0; order],
        })
    }

    /// `z^e` for any integer exponent; `e` is reduced mod `order`.
    pub fn root(order: usize, e: i64) -> Result<Self, CycloError> {
        let mut x = Self::zero(order)?;
        x.coeffs[reduce_exp(e, order)] = 1;
        Ok(x)
    }

    /// The integer `k` as an element of order `order`.
    pub fn from_int(order: usize, k: i64) -> Result<Self, CycloError> {
        let mut x = Self::zero(order)?;
        x.coeffs[0] = k;
        Ok(x)
    }

    pub fn from_coeffs(order: usize, coeffs: Vec<i64>) -> Result<Self, CycloError> {
        if order == 0 {
            return Err(CycloError::ZeroOrder);
        }
        if coeffs.len() != order {
            return Err(CycloError::BadLength {
                len: coeffs.len(),
                order,
            });
        }
        Ok(Self { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    fn check_order(&self, other: &Self) -> Result<(), CycloError> {
        if self.order != other.order {
            return Err(CycloError::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, CycloError> {
        self.zip_with(other, i64::checked_add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CycloError> {
        self.zip_with(other, i64::checked_sub)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: impl Fn(i64, i64) -> Option<i64>,
    ) -> Result<Self, CycloError> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| op(x, y).ok_or(CycloError::Overflow))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            order: self.order,
            coeffs,
        })
    }

    pub fn scale_int(&self, k: i64) -> Result<Self, CycloError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&x| x.checked_mul(k).ok_or(CycloError::Overflow))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            order: self.order,
            coeffs,
        })
    }

    /// Adds `k·z^e` in place.
    pub fn add_root_term(&mut self, e: i64, k: i64) -> Result<(), CycloError> {
        let j = reduce_exp(e, self.order);
        self.coeffs[j] = self.coeffs[j].checked_add(k).ok_or(CycloError::Overflow)?;
        Ok(())
    }

    /// Complex conjugation: `z^j -> z^{-j}`.
    pub fn conj(&self) -> Self {
        let n = self.order;
        let mut coeffs = vec![0; n];
        for (j, &c) in self.coeffs.iter().enumerate() {
            coeffs[(n - j) % n] = c;
        }
        Self { order: n, coeffs }
    }

    /// Re-expresses the element in the ring of order `k·n` via `z_n = z_{kn}^k`.
    pub fn promote(&self, k: usize) -> Result<Self, CycloError> {
        if k == 0 {
            return Err(CycloError::ZeroOrder);
        }
        let order = self.order * k;
        let mut coeffs = vec![0; order];
        for (j, &c) in self.coeffs.iter().enumerate() {
            coeffs[j * k] = c;
        }
        Ok(Self { order, coeffs })
    }

    /// Exact zero test for the complex value.
    pub fn is_zero(&self) -> bool {
        ZeroTester::for_order(self.order).is_zero(&self.coeffs)
    }

    /// Value equality across representations of the same order.
    pub fn value_eq(&self, other: &Self) -> Result<bool, CycloError> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Floating-point rendering, for reports only.
    pub fn to_complex(&self) -> Complex64 {
        let n = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| {
                Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / n) * c as f64
            })
            .sum()
    }
}

impl fmt::Debug for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloElem(n={}, {:?})", self.order, self.coeffs)
    }
}

/// Renders as a sum of root powers, e.g. `2 - z^3` (order 4), or `0`.
impl fmt::Display for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.unsigned_abs();
            match (j, mag) {
                (0, _) => write!(f, "{mag}")?,
                (_, 1) => write!(f, "z^{j}")?,
                _ => write!(f, "{mag}*z^{j}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn reduce_exp(e: i64, n: usize) -> usize {
    e.rem_euclid(n as i64) as usize
}

fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Exact division of `num` by a monic `den`. Returns `None` on a nonzero remainder.
fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Option<IntPoly> {
    let dd = den.len() - 1;
    debug_assert!(den[dd].is_one());
    if num.len() < den.len() {
        return num.iter().all(Zero::is_zero).then(Vec::new);
    }
    let mut rem = num.to_vec();
    let mut quot = vec![BigInt::zero(); num.len() - dd];
    for i in (dd..num.len()).rev() {
        let c = std::mem::take(&mut rem[i]);
        if c.is_zero() {
            continue;
        }
        for (k, dk) in den.iter().enumerate().take(dd) {
            rem[i - dd + k] -= &c * dk;
        }
        quot[i - dd] = c;
    }
    rem.iter().all(Zero::is_zero).then_some(quot)
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<usize, Arc<IntPoly>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<IntPoly>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The n-th cyclotomic polynomial, by dividing `x^n - 1` by `Φ_d` for every
/// proper divisor `d` of `n`. Memoized per order.
pub fn cyclotomic_poly(n: usize) -> Result<Arc<IntPoly>, CycloError> {
    if n == 0 {
        return Err(CycloError::ZeroOrder);
    }
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&n) {
        return Ok(Arc::clone(p));
    }
    let mut poly: IntPoly = vec![BigInt::zero(); n + 1];
    poly[0] = -BigInt::one();
    poly[n] = BigInt::one();
    for d in divisors(n).into_iter().filter(|&d| d < n) {
        let phi_d = cyclotomic_poly(d)?;
        poly = exact_div_monic(&poly, &phi_d).expect("cyclotomic factor divides x^n - 1");
    }
    let poly = Arc::new(poly);
    cyclotomic_cache()
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&poly));
    Ok(poly)
}

/// Reduces coefficient vectors of a fixed order modulo `Φ_n`.
///
/// Holds `Φ_n` as machine words when it fits; reduction runs in checked
/// `i128` and falls back to big integers on overflow.
#[derive(Clone, Debug)]
pub struct ZeroTester {
    order: usize,
    phi: Arc<IntPoly>,
    phi_small: Option<Vec<i128>>,
}

impl ZeroTester {
    pub fn new(order: usize) -> Result<Self, CycloError> {
        let phi = cyclotomic_poly(order)?;
        let phi_small = phi.iter().map(|c| c.to_i64().map(i128::from)).collect();
        Ok(Self {
            order,
            phi,
            phi_small,
        })
    }

    /// Shared tester for an order. Panics on `order == 0`; [`CycloElem`]
    /// never carries order zero.
    pub fn for_order(order: usize) -> Arc<ZeroTester> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ZeroTester>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap();
        Arc::clone(
            guard
                .entry(order)
                .or_insert_with(|| Arc::new(ZeroTester::new(order).expect("positive order"))),
        )
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// True iff `Σ coeffs[j]·x^j ≡ 0 (mod Φ_n)`.
    pub fn is_zero(&self, coeffs: &[i64]) -> bool {
        self.is_zero_in(coeffs, &mut Vec::new())
    }

    /// [`ZeroTester::is_zero`] with a caller-owned scratch buffer.
    pub fn is_zero_in(&self, coeffs: &[i64], scratch: &mut Vec<i128>) -> bool {
        if let Some(phi) = &self.phi_small {
            if let Some(z) = reduce_small(coeffs, phi, scratch) {
                return z;
            }
        }
        reduce_big(coeffs, &self.phi)
    }
}

fn reduce_small(coeffs: &[i64], phi: &[i128], rem: &mut Vec<i128>) -> Option<bool> {
    let deg = phi.len() - 1;
    rem.clear();
    rem.extend(coeffs.iter().map(|&c| i128::from(c)));
    for i in (deg..rem.len()).rev() {
        let c = std::mem::take(&mut rem[i]);
        if c == 0 {
            continue;
        }
        for (k, &pk) in phi.iter().enumerate().take(deg) {
            if pk != 0 {
                rem[i - deg + k] = rem[i - deg + k].checked_sub(c.checked_mul(pk)?)?;
            }
        }
    }
    Some(rem.iter().all(|&c| c == 0))
}

fn reduce_big(coeffs: &[i64], phi: &[BigInt]) -> bool {
    let deg = phi.len() - 1;
    let mut rem: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
    for i in (deg..rem.len()).rev() {
        let c = std::mem::take(&mut rem[i]);
        if c.is_zero() {
            continue;
        }
        for (k, pk) in phi.iter().enumerate().take(deg) {
            rem[i - deg + k] -= &c * pk;
        }
    }
    rem.iter().all(Zero::is_zero)
}

/// Euler's totient by trial division.
pub fn totient(mut n: usize) -> usize {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> IntPoly {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn root_examples() {
        assert_eq!(CycloElem::root(4, 0).unwrap().coeffs(), &[1, 0, 0, 0]);
        assert_eq!(CycloElem::root(4, 5).unwrap().coeffs(), &[0, 1, 0, 0]);
        let r = CycloElem::root(12, -1).unwrap();
        assert_eq!(r.coeffs()[11], 1);
        assert_eq!(r.coeffs().iter().sum::<i64>(), 1);
        assert_eq!(CycloElem::root(0, 1), Err(CycloError::ZeroOrder));
    }

    #[test]
    fn ring_ops() {
        let one = CycloElem::root(4, 0).unwrap();
        assert_eq!(one.add(&one).unwrap().coeffs(), &[2, 0, 0, 0]);
        let i = CycloElem::root(4, 1).unwrap();
        assert!(i.sub(&i).unwrap().coeffs().iter().all(|&c| c == 0));
        let w = CycloElem::root(3, 2).unwrap().scale_int(-2).unwrap();
        assert_eq!(w.coeffs(), &[0, 0, -2]);
        let err = one.add(&CycloElem::root(8, 0).unwrap()).unwrap_err();
        assert_eq!(err, CycloError::OrderMismatch { left: 4, right: 8 });
        let big = CycloElem::from_int(2, i64::MAX).unwrap();
        assert_eq!(big.add(&big), Err(CycloError::Overflow));
    }

    #[test]
    fn conj_examples() {
        let i = CycloElem::root(4, 1).unwrap();
        assert_eq!(i.conj(), CycloElem::root(4, 3).unwrap());
        let one = CycloElem::root(4, 0).unwrap();
        assert_eq!(one.conj(), one);
    }

    #[test]
    fn small_cyclotomic_polys() {
        assert_eq!(*cyclotomic_poly(1).unwrap(), ints(&[-1, 1]));
        assert_eq!(*cyclotomic_poly(2).unwrap(), ints(&[1, 1]));
        assert_eq!(*cyclotomic_poly(4).unwrap(), ints(&[1, 0, 1]));
        assert_eq!(*cyclotomic_poly(12).unwrap(), ints(&[1, 0, -1, 0, 1]));
        assert!(cyclotomic_poly(0).is_err());
    }

    #[test]
    fn first_large_coefficient_appears_at_105() {
        let phi = cyclotomic_poly(105).unwrap();
        assert_eq!(phi.len() - 1, 48);
        assert_eq!(phi[7], BigInt::from(-2));
    }

    /// Independent route: `Φ_n = Π_{d|n} (x^d - 1)^{μ(n/d)}`.
    fn mobius(mut n: usize) -> i32 {
        let mut k = 0;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                n /= p;
                if n.is_multiple_of(p) {
                    return 0;
                }
                k += 1;
            }
            p += 1;
        }
        if n > 1 {
            k += 1;
        }
        if k % 2 == 0 {
            1
        } else {
            -1
        }
    }

    fn mobius_route(n: usize) -> IntPoly {
        let mut numer = ints(&[1]);
        let mut denom = ints(&[1]);
        for d in divisors(n) {
            let mut f = vec![BigInt::zero(); d + 1];
            f[0] = BigInt::from(-1);
            f[d] = BigInt::one();
            let target = match mobius(n / d) {
                1 => &mut numer,
                -1 => &mut denom,
                _ => continue,
            };
            let mut prod = vec![BigInt::zero(); target.len() + d];
            for (i, a) in target.iter().enumerate() {
                for (j, b) in f.iter().enumerate() {
                    prod[i + j] += a * b;
                }
            }
            *target = prod;
        }
        // denom is ±monic; flip sign so the division is monic.
        let lead = denom.last().unwrap().clone();
        if lead.is_negative() {
            denom.iter_mut().for_each(|c| *c = -c.clone());
            numer.iter_mut().for_each(|c| *c = -c.clone());
        }
        exact_div_monic(&numer, &denom).unwrap()
    }

    #[test]
    fn matches_mobius_product() {
        for n in 1..=60 {
            assert_eq!(*cyclotomic_poly(n).unwrap(), mobius_route(n), "n = {n}");
        }
    }

    #[test]
    fn degree_is_totient() {
        for n in 1..=200 {
            assert_eq!(cyclotomic_poly(n).unwrap().len() - 1, totient(n), "n = {n}");
        }
    }

    #[test]
    fn zero_test_examples() {
        assert!(CycloElem::from_coeffs(4, vec![1, 0, 1, 0])
            .unwrap()
            .is_zero());
        assert!(CycloElem::from_coeffs(3, vec![1, 1, 1]).unwrap().is_zero());
        assert!(!CycloElem::from_coeffs(4, vec![1, 1, 0, 0])
            .unwrap()
            .is_zero());
        assert!(CycloElem::zero(1).unwrap().is_zero());
        assert!(!CycloElem::from_int(1, 3).unwrap().is_zero());
    }

    #[test]
    fn big_fallback_agrees() {
        let tester = ZeroTester::new(12).unwrap();
        let x = [i64::MAX, 0, 0, 0, 0, 0, i64::MAX, 0, 0, 0, 0, 0];
        assert!(tester.is_zero(&x));
        assert!(reduce_big(&x, &tester.phi));
        let y = [i64::MAX, 0, 0, 0, 0, 0, i64::MAX - 1, 0, 0, 0, 0, 0];
        assert!(!tester.is_zero(&y));
    }

    #[test]
    fn roots_reduce_exponents() {
        for n in 1..=64usize {
            for e in -130i64..130 {
                let x = CycloElem::root(n, e).unwrap();
                let y = CycloElem::root(n, e.rem_euclid(n as i64)).unwrap();
                assert!(x.value_eq(&y).unwrap());
            }
        }
    }

    #[test]
    fn promote_examples() {
        let x = CycloElem::root(4, 1).unwrap();
        assert_eq!(x.promote(3).unwrap(), CycloElem::root(12, 3).unwrap());
        assert_eq!(x.promote(1).unwrap(), x);
        assert!(x.promote(0).is_err());
    }

    #[test]
    fn display_renders_root_powers() {
        let x = CycloElem::from_coeffs(4, vec![2, 0, 0, -1]).unwrap();
        assert_eq!(x.to_string(), "2 - z^3");
        let y = CycloElem::from_coeffs(4, vec![0, -3, 1, 0]).unwrap();
        assert_eq!(y.to_string(), "-3*z^1 + z^2");
        assert_eq!(CycloElem::zero(4).unwrap().to_string(), "0");
    }

    fn elem(order: usize) -> impl Strategy<Value = CycloElem> {
        prop::collection::vec(-5i64..=5, order)
            .prop_map(move |c| CycloElem::from_coeffs(order, c).unwrap())
    }

    proptest! {
        #[test]
        fn conj_is_involution(x in (1usize..30).prop_flat_map(elem)) {
            prop_assert_eq!(x.conj().conj(), x);
        }

        #[test]
        fn addition_commutes_by_value(
            (x, y) in (1usize..30).prop_flat_map(|n| (elem(n), elem(n)))
        ) {
            let l = x.add(&y).unwrap();
            let r = y.add(&x).unwrap();
            prop_assert!(l.sub(&r).unwrap().is_zero());
        }

        #[test]
        fn promote_preserves_zero(x in (1usize..16).prop_flat_map(elem), k in 1usize..6) {
            prop_assert_eq!(x.is_zero(), x.promote(k).unwrap().is_zero());
        }

        #[test]
        fn promote_preserves_zero_of_true_zeros(n in 1usize..16, k in 1usize..6, e in 0i64..32) {
            // z^e·Φ_n(z) = 0
            let phi = cyclotomic_poly(n).unwrap();
            let mut x = CycloElem::zero(n).unwrap();
            for (j, c) in phi.iter().enumerate() {
                x.add_root_term(e + j as i64, c.to_i64().unwrap()).unwrap();
            }
            prop_assert!(x.is_zero());
            prop_assert!(x.promote(k).unwrap().is_zero());
        }
    }
}
