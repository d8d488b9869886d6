//! Residue arithmetic and the number-theoretic primitives used by the
//! platform groups: modular powers and inverses, multiplicative orders,
//! baby-step/giant-step discrete logarithms and primality testing.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(BigUint),
    #[error("residues have different moduli ({0} vs {1})")]
    ModulusMismatch(BigUint, BigUint),
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: BigUint, modulus: BigUint },
    #[error("no exponent s <= {0} satisfies t^s = 1")]
    BoundExceeded(BigUint),
    #[error("target is not in the subgroup generated by the base")]
    NoSolution,
    #[error("invalid natural number literal {0:?}")]
    Parse(String),
}

/// A non-negative integer of unbounded size.
///
/// The textual form is the minimal decimal string; parsing rejects leading
/// zeros, signs and whitespace so that text and value correspond one to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Natural(BigUint);

impl Natural {
    pub fn new(value: BigUint) -> Self {
        Natural(value)
    }

    pub fn zero() -> Self {
        Natural(BigUint::zero())
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn into_biguint(self) -> BigUint {
        self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl From<u64> for Natural {
    fn from(v: u64) -> Self {
        Natural(BigUint::from(v))
    }
}

impl From<BigUint> for Natural {
    fn from(v: BigUint) -> Self {
        Natural(v)
    }
}

impl From<Natural> for BigUint {
    fn from(v: Natural) -> Self {
        v.0
    }
}

impl fmt::Display for Natural {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Natural {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_decimal(s).map(Natural)
    }
}

/// Parses a minimal decimal string ("0", or digits without a leading zero).
pub fn parse_decimal(s: &str) -> Result<BigUint, ArithError> {
    let bytes = s.as_bytes();
    let ok = !bytes.is_empty()
        && bytes.iter().all(u8::is_ascii_digit)
        && (bytes.len() == 1 || bytes[0] != b'0');
    if !ok {
        return Err(ArithError::Parse(s.to_string()));
    }
    BigUint::parse_bytes(bytes, 10).ok_or_else(|| ArithError::Parse(s.to_string()))
}

/// An integer reduced modulo `modulus >= 2`. Reduction is eager.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    value: BigUint,
    modulus: BigUint,
}

impl Residue {
    pub fn new(value: impl Into<BigUint>, modulus: impl Into<BigUint>) -> Result<Self, ArithError> {
        let modulus = modulus.into();
        if modulus < BigUint::from(2u8) {
            return Err(ArithError::InvalidModulus(modulus));
        }
        let value = value.into() % &modulus;
        Ok(Residue { value, modulus })
    }

    pub fn one(modulus: &BigUint) -> Result<Self, ArithError> {
        Residue::new(BigUint::one(), modulus.clone())
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }

    fn check(&self, other: &Residue) -> Result<(), ArithError> {
        if self.modulus != other.modulus {
            return Err(ArithError::ModulusMismatch(
                self.modulus.clone(),
                other.modulus.clone(),
            ));
        }
        Ok(())
    }

    fn with_value(&self, value: BigUint) -> Residue {
        Residue {
            value,
            modulus: self.modulus.clone(),
        }
    }

    pub fn add(&self, other: &Residue) -> Result<Residue, ArithError> {
        self.check(other)?;
        Ok(self.with_value((&self.value + &other.value) % &self.modulus))
    }

    pub fn sub(&self, other: &Residue) -> Result<Residue, ArithError> {
        self.check(other)?;
        Ok(self.with_value(
            (&self.value + &self.modulus - &other.value) % &self.modulus,
        ))
    }

    pub fn mul(&self, other: &Residue) -> Result<Residue, ArithError> {
        self.check(other)?;
        Ok(self.with_value((&self.value * &other.value) % &self.modulus))
    }

    pub fn neg(&self) -> Residue {
        self.with_value((&self.modulus - &self.value) % &self.modulus)
    }

    pub fn pow(&self, exp: &BigUint) -> Residue {
        self.with_value(self.value.modpow(exp, &self.modulus))
    }

    pub fn inv(&self) -> Result<Residue, ArithError> {
        mod_inv(self)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// `base^exp` by square-and-multiply.
pub fn mod_pow(base: &Residue, exp: &Natural) -> Residue {
    base.pow(exp.as_biguint())
}

/// Inverse of `x` modulo its modulus via the extended Euclidean algorithm.
pub fn mod_inv(x: &Residue) -> Result<Residue, ArithError> {
    inv_biguint(&x.value, &x.modulus)
        .map(|v| x.with_value(v))
        .ok_or_else(|| ArithError::NotInvertible {
            value: x.value.clone(),
            modulus: x.modulus.clone(),
        })
}

/// Inverse of `value` modulo `modulus`, or `None` when they share a factor.
pub fn inv_biguint(value: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let m = BigInt::from(modulus.clone());
    let a = BigInt::from(value % modulus);
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    ext.x.mod_floor(&m).to_biguint()
}

/// Least `s >= 1` with `t^s = 1`.
///
/// When `t^bound = 1` the order is a divisor of `bound`, found by stripping
/// prime factors of `bound`; otherwise the powers are scanned up to `bound`.
pub fn mult_order(t: &Residue, order_bound: &Natural) -> Result<Natural, ArithError> {
    if !t.value.gcd(&t.modulus).is_one() {
        return Err(ArithError::NotInvertible {
            value: t.value.clone(),
            modulus: t.modulus.clone(),
        });
    }
    let bound = order_bound.as_biguint();
    if bound.is_zero() {
        return Err(ArithError::BoundExceeded(bound.clone()));
    }
    if t.pow(bound).is_one() {
        if let Some(primes) = prime_divisors(bound) {
            let mut order = bound.clone();
            for q in primes {
                while order.is_multiple_of(&q) {
                    let reduced = &order / &q;
                    if t.pow(&reduced).is_one() {
                        order = reduced;
                    } else {
                        break;
                    }
                }
            }
            return Ok(Natural(order));
        }
    }
    let mut acc = t.clone();
    let mut s = BigUint::one();
    while &s <= bound {
        if acc.is_one() {
            return Ok(Natural(s));
        }
        acc = acc.mul(t)?;
        s += 1u32;
    }
    Err(ArithError::BoundExceeded(bound.clone()))
}

const TRIAL_DIVISION_LIMIT: u64 = 10_000_000;

/// Distinct prime divisors of `n`, or `None` if trial division cannot finish
/// the factorisation (a composite cofactor without small factors remains).
pub fn prime_divisors(n: &BigUint) -> Option<Vec<BigUint>> {
    let mut rest = n.clone();
    let mut out = Vec::new();
    let mut d = 2u64;
    while d <= TRIAL_DIVISION_LIMIT {
        let dd = BigUint::from(d);
        if &dd * &dd > rest {
            break;
        }
        if rest.is_multiple_of(&dd) {
            out.push(dd.clone());
            while rest.is_multiple_of(&dd) {
                rest /= &dd;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > BigUint::one() {
        if !is_probable_prime(&rest) {
            return None;
        }
        out.push(rest);
    }
    Some(out)
}

/// Outcome of a discrete-log search, with the number of modular
/// multiplications spent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dlog {
    pub exponent: Natural,
    pub multiplications: u64,
}

/// Baby-step/giant-step: least `s >= 0` with `base^s = target`, where `base`
/// generates a cyclic group of the given order.
///
/// Uses at most `2 * ceil(sqrt(order))` multiplications.
pub fn bsgs_dlog(base: &Residue, target: &Residue, order: &Natural) -> Result<Dlog, ArithError> {
    base.check(target)?;
    let order = order.as_biguint();
    if order.is_zero() {
        return Err(ArithError::NoSolution);
    }
    let mut steps = order.sqrt();
    if &steps * &steps < *order {
        steps += 1u32;
    }
    let steps = steps
        .to_u64()
        .expect("baby-step table larger than addressable memory");
    let mut multiplications = 0u64;

    let mut table: HashMap<BigUint, u64> = HashMap::with_capacity(steps as usize);
    let mut acc = Residue::one(&base.modulus)?;
    for j in 0..steps {
        table.entry(acc.value.clone()).or_insert(j);
        acc = acc.mul(base)?;
        multiplications += 1;
    }
    // acc = base^steps now
    let giant = mod_inv(&acc).map_err(|_| ArithError::NoSolution)?;

    let mut gamma = target.clone();
    for q in 0..steps {
        if let Some(&j) = table.get(&gamma.value) {
            let s = BigUint::from(q) * steps + j;
            return Ok(Dlog {
                exponent: Natural(s),
                multiplications,
            });
        }
        if q + 1 < steps {
            gamma = gamma.mul(&giant)?;
            multiplications += 1;
        }
    }
    Err(ArithError::NoSolution)
}

const SMALL_PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const EXTRA_ROUNDS: usize = 32;

/// Miller-Rabin test. Exact below 3.3e24 (first twelve prime bases); above
/// that, 32 further pseudo-random bases bound the error by 4^-32 = 2^-64.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u8);
    if *n < two {
        return false;
    }
    for &sp in &SMALL_PRIMES {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if n.is_multiple_of(&sp) {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let r = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> r;

    let witness = |a: &BigUint| -> bool {
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            return false;
        }
        for _ in 1..r {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                return false;
            }
        }
        true
    };

    if SMALL_PRIMES.iter().any(|&a| witness(&BigUint::from(a))) {
        return false;
    }
    // 3317044064679887385961981 is the least strong pseudoprime to all twelve bases.
    let deterministic_limit = BigUint::parse_bytes(b"3317044064679887385961981", 10).unwrap();
    if *n < deterministic_limit {
        return true;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(0x6d69_6c6c_6572_7261);
    let span = n - 3u32;
    (0..EXTRA_ROUNDS).all(|_| {
        let a = random_below(&mut rng, &span) + 2u32;
        !witness(&a)
    })
}

/// Uniform integer in `[0, bound)` by rejection sampling on the bit length.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "empty range");
    let bits = bound.bits();
    let nbytes = bits.div_ceil(8) as usize;
    let excess = (nbytes as u64) * 8 - bits;
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xffu8 >> excess;
        let candidate = BigUint::from_bytes_be(&buf);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// `base^exp` for machine-sized operands.
pub fn pow_biguint(base: u64, exp: u32) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}
