//! Chip-count recurrences and closed forms for complete k-ary trees.
//!
//! On the complete binary tree with `n` levels, the root's terminal ends a
//! run with `a(n)` chips, where `a(n) = 4a(n-1) - 2a(n-2)`, `a(0) = 1`,
//! `a(1) = 2`; every terminal at depth `level` holds `a(n - level)` chips
//! and the total is `t(n) = sum of 2^j * a(n-j)`. The same argument on
//! k-ary trees gives `a(k,n) = (k+2)a(k,n-1) - k*a(k,n-2)` with the same
//! basis. Winning probabilities follow as `a(k, n-level) / t(k, n)`.
//!
//! The integer recursion is the canonical computation path. The binary
//! closed forms in powers of `2 - sqrt(2)` and `2 + sqrt(2)`, and the
//! limiting probabilities `sqrt(2) / (2 + sqrt(2))^(level+1)`, are
//! evaluated exactly in [`RootTwo`]; floats appear only as final
//! renderings.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormError {
    LevelOutOfRange { level: usize, max: usize },
}

impl fmt::Display for ClosedFormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedFormError::LevelOutOfRange { level, max } => {
                write!(f, "level {} out of range 0..={}", level, max)
            }
        }
    }
}

impl core::error::Error for ClosedFormError {}

/// An exact element of the field extending the rationals by `sqrt(2)`,
/// stored as `(a + b*sqrt(2)) / d` with `d > 0` and `gcd(a, b, d) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootTwo {
    a: BigInt,
    b: BigInt,
    d: BigInt,
}

impl RootTwo {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, d: impl Into<BigInt>) -> RootTwo {
        let mut r = RootTwo {
            a: a.into(),
            b: b.into(),
            d: d.into(),
        };
        assert!(!r.d.is_zero(), "zero denominator");
        r.normalize();
        r
    }

    pub fn from_int(n: impl Into<BigInt>) -> RootTwo {
        RootTwo::new(n, 0, 1)
    }

    pub fn sqrt2() -> RootTwo {
        RootTwo::new(0, 1, 1)
    }

    pub fn zero() -> RootTwo {
        RootTwo::from_int(0)
    }

    pub fn one() -> RootTwo {
        RootTwo::from_int(1)
    }

    fn normalize(&mut self) {
        if self.d.is_negative() {
            self.a = -core::mem::take(&mut self.a);
            self.b = -core::mem::take(&mut self.b);
            self.d = -core::mem::take(&mut self.d);
        }
        let g = self.a.gcd(&self.b).gcd(&self.d);
        if !g.is_one() && !g.is_zero() {
            self.a /= &g;
            self.b /= &g;
            self.d /= &g;
        }
    }

    /// Rational component numerator: the value is `(a + b*sqrt(2)) / d`.
    pub fn rational_part(&self) -> BigRational {
        BigRational::new(self.a.clone(), self.d.clone())
    }

    /// Coefficient of `sqrt(2)`.
    pub fn sqrt2_part(&self) -> BigRational {
        BigRational::new(self.b.clone(), self.d.clone())
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The exact rational value, if the `sqrt(2)` coefficient is zero.
    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.rational_part())
    }

    pub fn pow(&self, mut exp: u32) -> RootTwo {
        let mut base = self.clone();
        let mut acc = RootTwo::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            exp >>= 1;
        }
        acc
    }

    /// Exact sign: -1, 0, or +1.
    pub fn signum(&self) -> i8 {
        // Sign of a + b*sqrt(2), with d > 0.
        let (a_neg, a_zero) = (self.a.is_negative(), self.a.is_zero());
        let (b_neg, b_zero) = (self.b.is_negative(), self.b.is_zero());
        if a_zero && b_zero {
            return 0;
        }
        if b_zero {
            return if a_neg { -1 } else { 1 };
        }
        if a_zero {
            return if b_neg { -1 } else { 1 };
        }
        match (a_neg, b_neg) {
            (false, false) => 1,
            (true, true) => -1,
            // Mixed signs: the value has the sign of whichever of |a| and
            // sqrt(2)|b| is larger, i.e. compare a^2 with 2 b^2. Equality is
            // impossible for nonzero integers.
            (false, true) | (true, false) => {
                let a_side = &self.a * &self.a > BigInt::from(2) * &self.b * &self.b;
                if a_side == a_neg {
                    -1
                } else {
                    1
                }
            }
        }
    }

    /// Float rendering, correct to within a couple of ulps.
    ///
    /// The two components may be huge and nearly cancelling, so the value is
    /// evaluated against a dyadic approximation of `sqrt(2)` carrying 128
    /// bits beyond the component sizes; the cancellation then happens in
    /// exact integer arithmetic.
    pub fn to_f64(&self) -> f64 {
        let prec = (128 + self.a.bits().max(self.b.bits())) as usize;
        let sqrt2 = (BigInt::from(2) << (2 * prec)).sqrt(); // floor(2^prec * sqrt(2))
        let numer = (&self.a << prec) + &self.b * sqrt2;
        let denom = &self.d << prec;
        rational_to_f64(&BigRational::new(numer, denom))
    }
}

impl PartialOrd for RootTwo {
    fn partial_cmp(&self, other: &RootTwo) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RootTwo {
    fn cmp(&self, other: &RootTwo) -> Ordering {
        match (self.clone() - other.clone()).signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

impl Add for RootTwo {
    type Output = RootTwo;
    fn add(self, rhs: RootTwo) -> RootTwo {
        RootTwo::new(
            &self.a * &rhs.d + &rhs.a * &self.d,
            &self.b * &rhs.d + &rhs.b * &self.d,
            self.d * rhs.d,
        )
    }
}

impl Sub for RootTwo {
    type Output = RootTwo;
    fn sub(self, rhs: RootTwo) -> RootTwo {
        self + (-rhs)
    }
}

impl Neg for RootTwo {
    type Output = RootTwo;
    fn neg(self) -> RootTwo {
        RootTwo {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

impl Mul for RootTwo {
    type Output = RootTwo;
    fn mul(self, rhs: RootTwo) -> RootTwo {
        // (a1 + b1 s)(a2 + b2 s) = a1 a2 + 2 b1 b2 + (a1 b2 + a2 b1) s
        RootTwo::new(
            &self.a * &rhs.a + BigInt::from(2) * &self.b * &rhs.b,
            &self.a * &rhs.b + &rhs.a * &self.b,
            self.d * rhs.d,
        )
    }
}

impl Div for RootTwo {
    type Output = RootTwo;
    fn div(self, rhs: RootTwo) -> RootTwo {
        // Multiply by the conjugate: 1 / ((a + b s)/d) = d (a - b s) / (a^2 - 2 b^2).
        let norm = &rhs.a * &rhs.a - BigInt::from(2) * &rhs.b * &rhs.b;
        assert!(!norm.is_zero(), "division by zero");
        let inverse = RootTwo::new(&rhs.d * &rhs.a, -(&rhs.d * &rhs.b), norm);
        self * inverse
    }
}

impl fmt::Display for RootTwo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}*sqrt(2))/{}", self.a, self.b, self.d)
    }
}

/// Renders an exact rational as the nearest `f64`, within a couple of ulps,
/// without overflowing on large numerators or denominators.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.numer().is_zero() {
        return 0.0;
    }
    // Scale so the integer quotient keeps at least 64 significant bits.
    let num_bits = r.numer().bits() as i64;
    let den_bits = r.denom().bits() as i64;
    let shift = (64 + den_bits - num_bits).max(0) as usize;
    let q = (r.numer() << shift) / r.denom();
    let f = q.to_f64().unwrap_or(if r.numer().is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    });
    f * exp2i(-(shift as i32))
}

// 2^e as an f64, exact over the normal range, 0 below it.
fn exp2i(e: i32) -> f64 {
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        0.0
    }
}

/// The chip-count sequence `a(k, 0..=n_max)` for one branching factor,
/// filled once by the second-order recursion.
#[derive(Debug, Clone)]
pub struct ChipSequence {
    k: usize,
    values: Vec<BigUint>,
}

impl ChipSequence {
    /// Fills `a(k, n) = (k+2) a(k, n-1) - k a(k, n-2)` from the basis
    /// `a(k, 0) = 1`, `a(k, 1) = 2`.
    pub fn new(k: usize, n_max: usize) -> ChipSequence {
        assert!(k >= 2, "branching factor must be at least 2");
        let mut values = Vec::with_capacity(n_max + 1);
        values.push(BigUint::one());
        if n_max >= 1 {
            values.push(BigUint::from(2u32));
        }
        let kp2 = BigUint::from(k + 2);
        let kb = BigUint::from(k);
        for n in 2..=n_max {
            let next = &kp2 * &values[n - 1] - &kb * &values[n - 2];
            values.push(next);
        }
        ChipSequence { k, values }
    }

    pub fn branching(&self) -> usize {
        self.k
    }

    pub fn value(&self, n: usize) -> &BigUint {
        &self.values[n]
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// Total terminal chips on the level-`n` tree:
    /// `sum over j of k^j * a(k, n-j)`.
    pub fn total(&self, n: usize) -> BigUint {
        let mut sum = BigUint::zero();
        let mut weight = BigUint::one();
        let kb = BigUint::from(self.k);
        for j in 0..=n {
            sum += &weight * &self.values[n - j];
            weight *= &kb;
        }
        sum
    }
}

/// Chips in the root's terminal after a run on the level-`n` binary tree:
/// `a(n) = 4 a(n-1) - 2 a(n-2)`, `a(0) = 1`, `a(1) = 2`.
pub fn root_chips(n: usize) -> BigUint {
    let mut prev = BigUint::one();
    if n == 0 {
        return prev;
    }
    let mut cur = BigUint::from(2u32);
    for _ in 2..=n {
        let next = BigUint::from(4u32) * &cur - BigUint::from(2u32) * &prev;
        prev = core::mem::replace(&mut cur, next);
    }
    cur
}

/// Chips in the root's terminal on the level-`n` complete k-ary tree.
pub fn root_chips_kary(k: usize, n: usize) -> BigUint {
    ChipSequence::new(k, n).value(n).clone()
}

/// Total terminal chips on the level-`n` binary tree.
pub fn total_chips(n: usize) -> BigUint {
    ChipSequence::new(2, n).total(n)
}

/// Total terminal chips on the level-`n` complete k-ary tree.
pub fn total_chips_kary(k: usize, n: usize) -> BigUint {
    ChipSequence::new(k, n).total(n)
}

/// The binary root count by its closed form
/// `((2 - sqrt(2))^n + (2 + sqrt(2))^n) / 2`, evaluated exactly. The
/// `sqrt(2)` coefficient cancels to exactly zero.
pub fn root_chips_closed(n: usize) -> RootTwo {
    let plus = RootTwo::new(2, 1, 1).pow(n as u32);
    let minus = RootTwo::new(2, -1, 1).pow(n as u32);
    (plus + minus) / RootTwo::from_int(2)
}

/// The binary total by its closed form
/// `((2 + sqrt(2))^(n+1) - (2 - sqrt(2))^(n+1)) / (2 sqrt(2))`, exact.
pub fn total_chips_closed(n: usize) -> RootTwo {
    let plus = RootTwo::new(2, 1, 1).pow(n as u32 + 1);
    let minus = RootTwo::new(2, -1, 1).pow(n as u32 + 1);
    (plus - minus) / RootTwo::new(0, 2, 1)
}

/// Exact winning probability of one vertex at depth `level` in the level-`n`
/// binary tree game: `a(n - level) / t(n)`.
pub fn win_probability(n: usize, level: usize) -> Result<BigRational, ClosedFormError> {
    win_probability_kary(2, n, level)
}

/// Exact winning probability of one vertex at depth `level` in the level-`n`
/// complete k-ary tree game: `a(k, n - level) / t(k, n)`.
pub fn win_probability_kary(
    k: usize,
    n: usize,
    level: usize,
) -> Result<BigRational, ClosedFormError> {
    if level > n {
        return Err(ClosedFormError::LevelOutOfRange { level, max: n });
    }
    let seq = ChipSequence::new(k, n);
    Ok(BigRational::new(
        BigInt::from(seq.value(n - level).clone()),
        BigInt::from(seq.total(n)),
    ))
}

/// The limit, as the binary tree deepens, of the winning probability of a
/// vertex at fixed depth `level`: exactly `sqrt(2) / (2 + sqrt(2))^(level+1)`.
/// At `level = 0` this is `sqrt(2) - 1`.
pub fn limit_win_probability(level: usize) -> RootTwo {
    RootTwo::sqrt2() / RootTwo::new(2, 1, 1).pow(level as u32 + 1)
}

/// One row of a convergence table for fixed depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub probability: f64,
    pub error: f64,
}

/// Tabulates `win_probability(n, level)` against its limit for
/// `n = level ..= n_max`. Probabilities are computed exactly and rendered
/// to float at the very end.
pub fn convergence_report(
    n_max: usize,
    level: usize,
) -> Result<Vec<ConvergenceRow>, ClosedFormError> {
    if level > n_max {
        return Err(ClosedFormError::LevelOutOfRange { level, max: n_max });
    }
    let limit = limit_win_probability(level).to_f64();
    (level..=n_max)
        .map(|n| {
            let probability = rational_to_f64(&win_probability(n, level)?);
            Ok(ConvergenceRow {
                n,
                probability,
                error: (probability - limit).abs(),
            })
        })
        .collect()
}
