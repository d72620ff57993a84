//! Exact truncated power/Laurent series in `q`.
//!
//! Every expansion in this crate is a [`TruncatedSeries`]: a finite window of
//! exact coefficients together with the precision to which the series is
//! actually known. Precision is tracked pessimistically through every
//! operation, so a coefficient you can read out of a series is always a
//! coefficient that was justified by the inputs.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Coefficient ring for a series. Implementations carry whatever runtime
/// context they need (e.g. the modulus of a prime field).
pub trait Ring: Clone + PartialEq + fmt::Debug {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, when `a` is a unit.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn from_i64(&self, n: i64) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
}

/// The rational numbers.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Rationals;

impl Ring for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// The integers. Inversion is only defined for units.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Integers;

impl Ring for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        if a.is_one() || (-a).is_one() {
            Some(a.clone())
        } else {
            None
        }
    }
    fn from_i64(&self, n: i64) -> BigInt {
        BigInt::from(n)
    }
}

/// The prime field with `p` elements, `p < 2^62`. Elements are canonical
/// residues in `[0, p)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        assert!(p >= 2 && p < (1 << 62), "modulus out of range");
        PrimeField { p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn reduce_int(&self, a: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let r = ((a % &p) + &p) % &p;
        // fits by construction
        r.try_into().unwrap()
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }
}

impl Ring for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(*a, self.p - 2))
        }
    }
    fn from_i64(&self, n: i64) -> u64 {
        let p = self.p as i128;
        let r = ((n as i128 % p) + p) % p;
        r as u64
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("operands live in different coefficient rings")]
    RingMismatch,
    #[error("leading coefficient is not a unit")]
    NonUnitLeadingCoeff,
    #[error("inner series of a composition must have valuation >= 1 (got {0})")]
    InnerValuation(i64),
    #[error("operation requires valuation >= 1 (got {0})")]
    NonpositiveValuation(i64),
    #[error("denominator divisible by {0}: bad prime for this series")]
    BadPrime(u64),
}

/// Truncated Laurent series: exact coefficients for exponents
/// `valuation ..= precision`, known modulo `q^(precision+1)`.
///
/// The identically-zero-as-far-as-known series of precision `m` is stored
/// with an empty coefficient window and `valuation = m + 1`.
#[derive(Clone, PartialEq, Debug)]
pub struct TruncatedSeries<R: Ring> {
    ring: R,
    val: i64,
    prec: i64,
    coeffs: Vec<R::Elem>,
}

impl<R: Ring> TruncatedSeries<R> {
    /// Build a series from the coefficients of `q^val, q^(val+1), ...`.
    /// The precision is `val + coeffs.len() - 1`.
    pub fn new(ring: R, val: i64, coeffs: Vec<R::Elem>) -> Self {
        let prec = val + coeffs.len() as i64 - 1;
        let mut s = TruncatedSeries {
            ring,
            val,
            prec,
            coeffs,
        };
        s.normalize();
        s
    }

    /// The zero series of the given precision.
    pub fn zero(ring: R, prec: i64) -> Self {
        TruncatedSeries {
            ring,
            val: prec + 1,
            prec,
            coeffs: Vec::new(),
        }
    }

    /// The constant series `c` of the given precision.
    pub fn constant(ring: R, c: R::Elem, prec: i64) -> Self {
        assert!(prec >= 0);
        let mut coeffs = vec![ring.zero(); (prec + 1) as usize];
        coeffs[0] = c;
        TruncatedSeries::new(ring, 0, coeffs)
    }

    /// The monomial `c * q^exp` of the given precision.
    pub fn monomial(ring: R, c: R::Elem, exp: i64, prec: i64) -> Self {
        assert!(prec >= exp);
        let mut coeffs = vec![ring.zero(); (prec - exp + 1) as usize];
        coeffs[0] = c;
        TruncatedSeries::new(ring, exp, coeffs)
    }

    fn normalize(&mut self) {
        let mut drop = 0;
        while drop < self.coeffs.len() && self.ring.is_zero(&self.coeffs[drop]) {
            drop += 1;
        }
        if drop == self.coeffs.len() {
            self.coeffs.clear();
            self.val = self.prec + 1;
        } else if drop > 0 {
            self.coeffs.drain(..drop);
            self.val += drop as i64;
        }
        debug_assert_eq!(self.coeffs.len() as i64, self.prec - self.val + 1);
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    /// Lowest known exponent. For a zero series this is `precision + 1`.
    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `q^n`, or `None` for exponents above the precision.
    pub fn coeff(&self, n: i64) -> Option<R::Elem> {
        if n > self.prec {
            return None;
        }
        if n < self.val {
            return Some(self.ring.zero());
        }
        Some(self.coeffs[(n - self.val) as usize].clone())
    }

    /// Restrict to precision `prec` (never extends knowledge).
    pub fn truncate(&self, prec: i64) -> Self {
        assert!(prec <= self.prec, "cannot extend precision");
        let keep = (prec - self.val + 1).max(0) as usize;
        let mut s = TruncatedSeries {
            ring: self.ring.clone(),
            val: self.val.min(prec + 1),
            prec,
            coeffs: self.coeffs[..keep.min(self.coeffs.len())].to_vec(),
        };
        s.normalize();
        s
    }

    fn check_ring(&self, other: &Self) -> Result<(), SeriesError> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(SeriesError::RingMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_ring(other)?;
        let prec = self.prec.min(other.prec);
        let val = self.val.min(other.val).min(prec + 1);
        let mut coeffs = vec![self.ring.zero(); (prec - val + 1).max(0) as usize];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let n = val + i as i64;
            let a = self.coeff(n).unwrap_or_else(|| self.ring.zero());
            let b = other.coeff(n).unwrap_or_else(|| self.ring.zero());
            *c = self.ring.add(&a, &b);
        }
        let mut s = TruncatedSeries {
            ring: self.ring.clone(),
            val,
            prec,
            coeffs,
        };
        s.normalize();
        Ok(s)
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|c| self.ring.neg(c)).collect();
        TruncatedSeries {
            ring: self.ring.clone(),
            val: self.val,
            prec: self.prec,
            coeffs,
        }
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.try_add(&other.neg())
    }

    /// Product truncated at the justified precision
    /// `min(prec_a + val_b, prec_b + val_a)`.
    pub fn try_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_ring(other)?;
        let prec = (self.prec + other.val).min(other.prec + self.val);
        if self.is_zero() || other.is_zero() {
            return Ok(TruncatedSeries::zero(self.ring.clone(), prec));
        }
        let val = self.val + other.val;
        let n = (prec - val + 1).max(0) as usize;
        let mut coeffs = vec![self.ring.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if self.ring.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                let t = self.ring.mul(a, b);
                coeffs[i + j] = self.ring.add(&coeffs[i + j], &t);
            }
        }
        let mut s = TruncatedSeries {
            ring: self.ring.clone(),
            val,
            prec,
            coeffs,
        };
        s.normalize();
        Ok(s)
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let coeffs = self.coeffs.iter().map(|a| self.ring.mul(a, c)).collect();
        let mut s = TruncatedSeries {
            ring: self.ring.clone(),
            val: self.val,
            prec: self.prec,
            coeffs,
        };
        s.normalize();
        s
    }

    /// Multiplicative inverse. The leading coefficient must be a unit.
    /// The result has valuation `-val` and precision `prec - 2*val`.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::NonUnitLeadingCoeff);
        }
        let lead_inv = self
            .ring
            .inv(&self.coeffs[0])
            .ok_or(SeriesError::NonUnitLeadingCoeff)?;
        // u = self / (lead * q^val), a unit power series with u_0 = 1;
        // the relative window length carries over to the inverse.
        let u: Vec<R::Elem> = self
            .coeffs
            .iter()
            .map(|c| self.ring.mul(c, &lead_inv))
            .collect();
        let out_len = u.len();
        let mut v = vec![self.ring.zero(); out_len];
        v[0] = self.ring.one();
        for k in 1..out_len {
            // coefficient k of u*v must vanish: v_k = -sum_{j<k} u_{k-j} v_j
            let mut acc = self.ring.zero();
            for j in 0..k {
                let t = self.ring.mul(&u[k - j], &v[j]);
                acc = self.ring.add(&acc, &t);
            }
            v[k] = self.ring.neg(&acc);
        }
        let coeffs = v
            .into_iter()
            .map(|c| self.ring.mul(&c, &lead_inv))
            .collect();
        let mut s = TruncatedSeries {
            ring: self.ring.clone(),
            val: -self.val,
            prec: self.prec - 2 * self.val,
            coeffs,
        };
        s.normalize();
        Ok(s)
    }

    /// Integer power. Negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<Self, SeriesError> {
        if e < 0 {
            return self.invert()?.pow(-e);
        }
        // The justified precision of a product depends on the valuations, so
        // plain repeated multiplication tracks it correctly.
        let mut acc = TruncatedSeries::constant(self.ring.clone(), self.ring.one(), self.prec.max(0));
        // Keep constant precision generous; try_mul will clamp.
        let mut base = self.clone();
        let mut k = e;
        if k == 0 {
            return Ok(acc);
        }
        loop {
            if k & 1 == 1 {
                acc = acc.try_mul(&base)?;
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.try_mul(&base)?;
        }
        Ok(acc)
    }

    /// Substitute `inner` (valuation >= 1) into `self`.
    ///
    /// For a Laurent outer series the inner series is inverted, which
    /// requires its leading coefficient to be a unit.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        self.check_ring(inner)?;
        if inner.is_zero() || inner.val < 1 {
            return Err(SeriesError::InnerValuation(if inner.is_zero() {
                inner.prec + 1
            } else {
                inner.val
            }));
        }
        let vi = inner.val;
        let pi = inner.prec;
        let vo = if self.is_zero() { self.prec + 1 } else { self.val };
        let po = self.prec;
        // Outer truncation tail O(z^{po+1}) lands at q^{(po+1)*vi};
        // inner tail O(q^{pi+1}) enters through outer' with valuation vo-1.
        let mut prec = (po + 1) * vi - 1;
        if !self.is_zero() && vo != 0 {
            prec = prec.min((vo - 1) * vi + pi);
        } else if !self.is_zero() {
            // constant leading term does not feel the inner tail, the next
            // term (valuation >= 1) does
            prec = prec.min(pi);
        }
        if self.is_zero() {
            return Ok(TruncatedSeries::zero(self.ring.clone(), prec));
        }

        // Accumulate c_n * inner^n with a running power in each direction.
        // Every partial power keeps justified precision >= prec, so the sum
        // may be truncated freely.
        let clamp = |s: TruncatedSeries<R>| {
            let p = s.prec.min(prec);
            s.truncate(p)
        };
        let mut acc = TruncatedSeries::zero(self.ring.clone(), prec);
        let add_term = |acc: &TruncatedSeries<R>,
                        c: &R::Elem,
                        power: &TruncatedSeries<R>|
         -> Result<TruncatedSeries<R>, SeriesError> {
            acc.try_add(&power.scale(c))
        };

        if self.val <= 0 && self.prec >= 0 {
            let c0 = self.coeff(0).unwrap();
            acc = add_term(
                &acc,
                &c0,
                &TruncatedSeries::constant(self.ring.clone(), self.ring.one(), prec),
            )?;
        }
        if self.prec >= 1 {
            let mut power = clamp(inner.clone());
            for n in 1..=self.prec {
                if n > 1 {
                    power = clamp(power.try_mul(inner)?);
                }
                if n >= self.val {
                    let c = self.coeff(n).unwrap();
                    if !self.ring.is_zero(&c) {
                        acc = add_term(&acc, &c, &power)?;
                    }
                }
            }
        }
        if self.val < 0 {
            let w = inner.invert()?;
            let mut power = w.clone();
            for n in 1..=(-self.val) {
                if n > 1 {
                    power = power.try_mul(&w)?;
                }
                if -n <= self.prec {
                    let c = self.coeff(-n).unwrap();
                    if !self.ring.is_zero(&c) {
                        acc = add_term(&acc, &c, &clamp(power.clone()))?;
                    }
                }
            }
        }
        Ok(acc)
    }

    /// `q * d/dq`.
    pub fn derivative_qdq(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = self.val + i as i64;
                self.ring.mul(c, &self.ring.from_i64(n))
            })
            .collect();
        let mut s = TruncatedSeries {
            ring: self.ring.clone(),
            val: self.val,
            prec: self.prec,
            coeffs,
        };
        s.normalize();
        s
    }

    /// Termwise `a_n -> a_n / n`, defined for valuation >= 1.
    pub fn integrate_dlog(&self) -> Result<Self, SeriesError> {
        if !self.is_zero() && self.val < 1 {
            return Err(SeriesError::NonpositiveValuation(self.val));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = self.val + i as i64;
                let inv = self
                    .ring
                    .inv(&self.ring.from_i64(n))
                    .expect("n must be invertible in the coefficient ring");
                Ok(self.ring.mul(c, &inv))
            })
            .collect::<Result<Vec<_>, SeriesError>>()?;
        Ok(TruncatedSeries {
            ring: self.ring.clone(),
            val: self.val,
            prec: self.prec,
            coeffs,
        })
    }
}

impl TruncatedSeries<Rationals> {
    /// Coefficientwise reduction modulo the prime `ell`.
    pub fn reduce_mod(&self, ell: u64) -> Result<TruncatedSeries<PrimeField>, SeriesError> {
        let f = PrimeField::new(ell);
        let ell_big = BigInt::from(ell);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            if (c.denom() % &ell_big).is_zero() {
                return Err(SeriesError::BadPrime(ell));
            }
            let num = f.reduce_int(c.numer());
            let den = f.reduce_int(c.denom());
            let den_inv = f.inv(&den).expect("denominator unit mod ell");
            coeffs.push(f.mul(&num, &den_inv));
        }
        let mut s = TruncatedSeries {
            ring: f,
            val: self.val,
            prec: self.prec,
            coeffs,
        };
        s.normalize();
        Ok(s)
    }

    /// Exact integer series view, if every coefficient is integral.
    pub fn to_integer(&self) -> Option<TruncatedSeries<Integers>> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            if !c.denom().is_one() {
                return None;
            }
            coeffs.push(c.numer().clone());
        }
        Some(TruncatedSeries {
            ring: Integers,
            val: self.val,
            prec: self.prec,
            coeffs,
        })
    }
}

impl TruncatedSeries<Integers> {
    pub fn to_rational(&self) -> TruncatedSeries<Rationals> {
        TruncatedSeries {
            ring: Rationals,
            val: self.val,
            prec: self.prec,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        }
    }
}

impl<R: Ring> fmt::Display for TruncatedSeries<R>
where
    R::Elem: fmt::Display,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, c) in self.coeffs.iter().enumerate() {
            if self.ring.is_zero(c) {
                continue;
            }
            let n = self.val + i as i64;
            if wrote {
                write!(f, " + ")?;
            }
            match n {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*q")?,
                _ => write!(f, "({c})*q^{n}")?,
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.prec + 1)
    }
}

/// Convenience: series over the rationals from integer coefficient data.
pub fn rational_series(val: i64, coeffs: &[i64]) -> TruncatedSeries<Rationals> {
    TruncatedSeries::new(
        Rationals,
        val,
        coeffs
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_poly(coeffs: &[i64]) -> TruncatedSeries<Rationals> {
        rational_series(0, coeffs)
    }

    #[test]
    fn difference_of_squares() {
        // (1+q)(1-q) at precision 5 -> 1 - q^2, precision 5
        let a = q_poly(&[1, 1, 0, 0, 0, 0]);
        let b = q_poly(&[1, -1, 0, 0, 0, 0]);
        let p = a.try_mul(&b).unwrap();
        assert_eq!(p.precision(), 5);
        assert_eq!(p, q_poly(&[1, 0, -1, 0, 0, 0]));
    }

    #[test]
    fn monomial_product_valuations_add() {
        let q = rational_series(1, &[1, 0, 0, 0]);
        let q2 = q.try_mul(&q).unwrap();
        assert_eq!(q2.valuation(), 2);
        assert_eq!(q2.coeff(2).unwrap(), Rationals.one());
    }

    #[test]
    fn absorbing_zero() {
        let f = rational_series(1, &[3, -1, 4, 1]);
        let z = TruncatedSeries::zero(Rationals, 4);
        let p = f.try_mul(&z).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.precision(), 4 + 1); // prec_z + val_f
    }

    #[test]
    fn geometric_inverse() {
        let a = q_poly(&[1, 1, 0, 0, 0, 0]);
        let inv = a.invert().unwrap();
        assert_eq!(inv, q_poly(&[1, -1, 1, -1, 1, -1]));
        let prod = a.try_mul(&inv).unwrap();
        assert_eq!(prod.coeff(0).unwrap(), Rationals.one());
        assert!(prod
            .try_sub(&TruncatedSeries::constant(Rationals, Rationals.one(), prod.precision()))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn laurent_inverse_of_q() {
        let q = rational_series(1, &[1, 0, 0, 0, 0]);
        let inv = q.invert().unwrap();
        assert_eq!(inv.valuation(), -1);
        assert_eq!(inv.coeff(-1).unwrap(), Rationals.one());
        assert_eq!(inv.precision(), q.precision() - 2);
    }

    #[test]
    fn constant_inverse() {
        let two = TruncatedSeries::constant(Rationals, Rationals.from_i64(2), 3);
        let half = two.invert().unwrap();
        assert_eq!(
            half.coeff(0).unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
    }

    #[test]
    fn compose_square() {
        // outer = z^2, inner = q + q^2 -> q^2 + 2q^3 + q^4
        let outer = rational_series(2, &[1, 0, 0, 0, 0, 0, 0]);
        let inner = rational_series(1, &[1, 1, 0, 0, 0, 0, 0, 0]);
        let c = outer.compose(&inner).unwrap();
        assert_eq!(c.coeff(2).unwrap(), Rationals.from_i64(1));
        assert_eq!(c.coeff(3).unwrap(), Rationals.from_i64(2));
        assert_eq!(c.coeff(4).unwrap(), Rationals.from_i64(1));
    }

    #[test]
    fn compose_inverse_monomial() {
        // outer = z^-1, inner = q -> q^-1
        let outer = rational_series(-1, &[1, 0, 0, 0, 0]);
        let inner = rational_series(1, &[1, 0, 0, 0, 0, 0]);
        let c = outer.compose(&inner).unwrap();
        assert_eq!(c.valuation(), -1);
        assert_eq!(c.coeff(-1).unwrap(), Rationals.one());
    }

    #[test]
    fn compose_laurent_example() {
        // outer = z^-2 + z, inner = q + q^2
        // (q+q^2)^{-2} = q^{-2}(1+q)^{-2} = q^{-2} - 2q^{-1} + 3 - 4q + ...
        // plus (q + q^2); outer precision 1 caps the result at O(q^2).
        let mut outer = rational_series(-2, &[1, 0, 0, 1]);
        outer = outer.truncate(1);
        let inner = rational_series(1, &[1, 1, 0, 0, 0, 0, 0, 0, 0, 0]);
        let c = outer.compose(&inner).unwrap();
        assert_eq!(c.coeff(-2).unwrap(), Rationals.from_i64(1));
        assert_eq!(c.coeff(-1).unwrap(), Rationals.from_i64(-2));
        assert_eq!(c.coeff(0).unwrap(), Rationals.from_i64(3));
        assert_eq!(c.coeff(1).unwrap(), Rationals.from_i64(-4 + 1));
    }

    #[test]
    fn compose_identity_is_identity() {
        let outer = rational_series(1, &[2, -5, 7, 0, 3]);
        let id = rational_series(1, &[1, 0, 0, 0, 0, 0]);
        let c = outer.compose(&id).unwrap();
        assert_eq!(c.truncate(c.precision()), outer.truncate(c.precision()));
    }

    #[test]
    fn integrate_dlog_basics() {
        let q = rational_series(1, &[1, 0, 0]);
        assert_eq!(q.integrate_dlog().unwrap(), q);

        let f = rational_series(1, &[1, 1, 0]);
        let g = f.integrate_dlog().unwrap();
        assert_eq!(
            g.coeff(2).unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );

        // eigenform head a1=1, a2=0, a3=-2 -> q - (2/3) q^3
        let f = rational_series(1, &[1, 0, -2]);
        let g = f.integrate_dlog().unwrap();
        assert_eq!(
            g.coeff(3).unwrap(),
            BigRational::new(BigInt::from(-2), BigInt::from(3))
        );
        // round trip through q d/dq
        assert_eq!(g.derivative_qdq(), f);
    }

    #[test]
    fn integrate_dlog_rejects_nonpositive_valuation() {
        let f = q_poly(&[1, 1]);
        assert!(matches!(
            f.integrate_dlog(),
            Err(SeriesError::NonpositiveValuation(0))
        ));
    }

    #[test]
    fn reduce_mod_cases() {
        // 1 + 3q mod 3 -> 1
        let f = q_poly(&[1, 3]);
        let r = f.reduce_mod(3).unwrap();
        assert_eq!(r.coeff(0).unwrap(), 1);
        assert_eq!(r.coeff(1).unwrap(), 0);

        // (1/2) q mod 2 -> error
        let half_q = TruncatedSeries::new(
            Rationals,
            1,
            vec![BigRational::new(BigInt::from(1), BigInt::from(2))],
        );
        assert_eq!(half_q.reduce_mod(2), Err(SeriesError::BadPrime(2)));

        // (1/2) q mod 3 -> 2q
        let r = half_q.reduce_mod(3).unwrap();
        assert_eq!(r.coeff(1).unwrap(), 2);
    }

    #[test]
    fn mixed_modulus_is_an_error() {
        let f3 = PrimeField::new(3);
        let f5 = PrimeField::new(5);
        let a = TruncatedSeries::new(f3, 0, vec![1, 2]);
        let b = TruncatedSeries::new(f5, 0, vec![1, 2]);
        assert_eq!(a.try_add(&b), Err(SeriesError::RingMismatch));
        assert_eq!(a.try_mul(&b), Err(SeriesError::RingMismatch));
    }

    #[test]
    fn invert_requires_unit() {
        let z = TruncatedSeries::<Rationals>::zero(Rationals, 5);
        assert_eq!(z.invert(), Err(SeriesError::NonUnitLeadingCoeff));
    }
}
