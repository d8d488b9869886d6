//! The metacyclic Miller-Moreno group
//! `G = <a, b | a^(p^m) = b^(p^n) = e, b^-1 a b = a^t>` with twist
//! exponent `t = 1 + p^(m-1)`.
//!
//! Elements are kept in the normal form `a^i b^j`. Moving `a^i` to the left
//! of `b^j` uses `b^j a^i = a^(i t^-j) b^j`, which follows from the defining
//! relation.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{inv_biguint, is_probable_prime, parse_decimal, Natural};
use crate::error::{Error, Result};
use crate::group::{self, GroupLaw};

/// Enumeration limit for conjugacy classes of elements outside `<a>`.
pub const CLASS_ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetacyclicParams {
    p: BigUint,
    m: u32,
    n: u32,
    pm: BigUint,
    pn: BigUint,
    t: BigUint,
    t_inv: BigUint,
}

impl MetacyclicParams {
    pub fn new(p: impl Into<BigUint>, m: u32, n: u32) -> Result<Self> {
        let p = p.into();
        if p < BigUint::from(3u8) || !is_probable_prime(&p) {
            return Err(Error::InvalidParams(format!("p = {p} is not an odd prime")));
        }
        if m < 2 {
            return Err(Error::InvalidParams(format!("m = {m} must be at least 2")));
        }
        if n < 1 {
            return Err(Error::InvalidParams(format!("n = {n} must be at least 1")));
        }
        let pm = num_traits::pow(p.clone(), m as usize);
        let pn = num_traits::pow(p.clone(), n as usize);
        let t = num_traits::pow(p.clone(), (m - 1) as usize) + 1u32;
        let t_inv = inv_biguint(&t, &pm).expect("1 + p^(m-1) is a unit mod p^m");
        debug_assert!(t.modpow(&p, &pm).is_one() && !t.is_one());
        Ok(MetacyclicParams {
            p,
            m,
            n,
            pm,
            pn,
            t,
            t_inv,
        })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Order of `a`.
    pub fn pm(&self) -> &BigUint {
        &self.pm
    }

    /// Order of `b`.
    pub fn pn(&self) -> &BigUint {
        &self.pn
    }

    /// The twist exponent `1 + p^(m-1)`.
    pub fn twist(&self) -> &BigUint {
        &self.t
    }

    pub fn group_order(&self) -> BigUint {
        &self.pm * &self.pn
    }
}

/// `a^i b^j`.
#[derive(Clone)]
pub struct MetaElement {
    params: Arc<MetacyclicParams>,
    i: BigUint,
    j: BigUint,
}

impl MetaElement {
    pub fn i(&self) -> &BigUint {
        &self.i
    }

    pub fn j(&self) -> &BigUint {
        &self.j
    }

    pub fn params(&self) -> &MetacyclicParams {
        &self.params
    }

    pub fn is_identity(&self) -> bool {
        self.i.is_zero() && self.j.is_zero()
    }

    /// True for elements of the cyclic subgroup `<a>`.
    pub fn in_a(&self) -> bool {
        self.j.is_zero()
    }
}

impl PartialEq for MetaElement {
    fn eq(&self, other: &Self) -> bool {
        self.i == other.i
            && self.j == other.j
            && (Arc::ptr_eq(&self.params, &other.params) || self.params == other.params)
    }
}

impl Eq for MetaElement {}

impl Hash for MetaElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.i.hash(state);
        self.j.hash(state);
    }
}

impl fmt::Debug for MetaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a^{} b^{}", self.i, self.j)
    }
}

impl fmt::Display for MetaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        write!(
            f,
            "mc:p={};m={};n={};i={};j={}",
            p.p, p.m, p.n, self.i, self.j
        )
    }
}

impl FromStr for MetaElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix("mc:")
            .ok_or_else(|| Error::Parse(format!("{s:?} is not a metacyclic element")))?;
        let fields = parse_fields(body, &["p", "m", "n", "i", "j"])?;
        let m = small_exponent(&fields[1])?;
        let n = small_exponent(&fields[2])?;
        let group = Metacyclic::new(fields[0].clone(), m, n)?;
        if fields[3] >= group.params.pm || fields[4] >= group.params.pn {
            return Err(Error::Parse(format!("{s:?} is not in normal form")));
        }
        Ok(group.element(fields[3].clone(), fields[4].clone()))
    }
}

/// Splits `k1=v1;k2=v2;...` with exactly the given keys in order, each value
/// a minimal decimal.
pub(crate) fn parse_fields(body: &str, keys: &[&str]) -> Result<Vec<BigUint>> {
    let parts: Vec<&str> = body.split(';').collect();
    if parts.len() != keys.len() {
        return Err(Error::Parse(format!("expected {} fields in {body:?}", keys.len())));
    }
    parts
        .iter()
        .zip(keys)
        .map(|(part, key)| {
            let value = part
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| Error::Parse(format!("expected field {key:?} in {part:?}")))?;
            parse_decimal(value).map_err(|e| Error::Parse(e.to_string()))
        })
        .collect()
}

pub(crate) fn small_exponent(v: &BigUint) -> Result<u32> {
    v.to_u32()
        .filter(|&x| x <= 64)
        .ok_or_else(|| Error::InvalidParams(format!("exponent {v} out of range")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metacyclic {
    params: Arc<MetacyclicParams>,
}

impl Metacyclic {
    pub fn new(p: impl Into<BigUint>, m: u32, n: u32) -> Result<Self> {
        Ok(Metacyclic {
            params: Arc::new(MetacyclicParams::new(p, m, n)?),
        })
    }

    pub fn params(&self) -> &MetacyclicParams {
        &self.params
    }

    /// `a^i b^j` with exponents reduced into normal form.
    pub fn element(&self, i: impl Into<BigUint>, j: impl Into<BigUint>) -> MetaElement {
        MetaElement {
            params: Arc::clone(&self.params),
            i: i.into() % &self.params.pm,
            j: j.into() % &self.params.pn,
        }
    }

    pub fn a(&self) -> MetaElement {
        self.element(1u32, 0u32)
    }

    pub fn b(&self) -> MetaElement {
        self.element(0u32, 1u32)
    }

    fn check(&self, g: &MetaElement) -> Result<()> {
        if Arc::ptr_eq(&g.params, &self.params) || g.params == self.params {
            Ok(())
        } else {
            Err(Error::ParamMismatch)
        }
    }

    /// `t^e mod p^m` for a signed exponent given as (magnitude, negative).
    fn twist_pow(&self, e: &BigUint, negative: bool) -> BigUint {
        let base = if negative {
            &self.params.t_inv
        } else {
            &self.params.t
        };
        // t has order p, so only e mod p matters
        base.modpow(&(e % &self.params.p), &self.params.pm)
    }

    pub fn power(&self, g: &MetaElement, e: &Natural) -> Result<MetaElement> {
        self.check(g)?;
        let mut result = self.identity();
        let mut base = g.clone();
        let e = e.as_biguint();
        for bit in (0..e.bits()).map(|b| e.bit(b)) {
            if bit {
                result = self.multiply(&result, &base)?;
            }
            base = self.multiply(&base, &base)?;
        }
        Ok(result)
    }

    /// Closed form: central iff `p | i` and `p | j`.
    pub fn is_central(&self, g: &MetaElement) -> Result<bool> {
        self.check(g)?;
        Ok(g.i.is_multiple_of(&self.params.p) && g.j.is_multiple_of(&self.params.p))
    }

    /// `p^(m+n-2)`.
    pub fn center_order(&self) -> Natural {
        Natural::new(num_traits::pow(
            self.params.p.clone(),
            (self.params.m + self.params.n - 2) as usize,
        ))
    }

    /// Conjugacy class of `w`. Elements of `<a>` use the closed orbit
    /// `{a^(i t^v) : 0 <= v < p}`; other elements are enumerated when the
    /// group has at most [`CLASS_ENUMERATION_LIMIT`] elements.
    pub fn conjugacy_class(&self, w: &MetaElement, cap: u64) -> Result<Vec<MetaElement>> {
        self.check(w)?;
        if w.in_a() {
            let b = self.b();
            let mut class: Vec<MetaElement> = vec![w.clone()];
            let mut cur = w.clone();
            loop {
                cur = self.conjugate(&cur, &b)?;
                if cur == *w {
                    break;
                }
                if class.len() as u64 >= cap {
                    return Err(Error::CapExceeded(cap));
                }
                class.push(cur.clone());
            }
            return Ok(class);
        }
        if self.params.group_order() > BigUint::from(CLASS_ENUMERATION_LIMIT) {
            return Err(Error::TooLarge(self.params.group_order().to_string()));
        }
        group::conjugation_orbit(self, w, cap)
    }
}

impl GroupLaw for Metacyclic {
    type Elem = MetaElement;

    fn identity(&self) -> MetaElement {
        self.element(0u32, 0u32)
    }

    fn multiply(&self, g: &MetaElement, h: &MetaElement) -> Result<MetaElement> {
        self.check(g)?;
        self.check(h)?;
        let pm = &self.params.pm;
        let shifted = (&h.i * self.twist_pow(&g.j, true)) % pm;
        Ok(MetaElement {
            params: Arc::clone(&self.params),
            i: (&g.i + shifted) % pm,
            j: (&g.j + &h.j) % &self.params.pn,
        })
    }

    /// `(a^i b^j)^-1 = a^(-i t^j) b^-j`.
    fn inverse(&self, g: &MetaElement) -> Result<MetaElement> {
        self.check(g)?;
        let pm = &self.params.pm;
        let pn = &self.params.pn;
        let i = (&g.i * self.twist_pow(&g.j, false)) % pm;
        Ok(MetaElement {
            params: Arc::clone(&self.params),
            i: (pm - i) % pm,
            j: (pn - &g.j) % pn,
        })
    }

    /// For `w = a^i` and `x = a^u b^v` this is `a^(i t^v)`, a single modular
    /// power; other inputs go through `x^-1 w x`.
    fn conjugate(&self, w: &MetaElement, x: &MetaElement) -> Result<MetaElement> {
        self.check(w)?;
        self.check(x)?;
        if w.in_a() {
            let i = (&w.i * self.twist_pow(&x.j, false)) % &self.params.pm;
            return Ok(self.element(i, 0u32));
        }
        let xi = self.inverse(x)?;
        self.multiply(&self.multiply(&xi, w)?, x)
    }

    fn generators(&self) -> Vec<MetaElement> {
        vec![self.a(), self.b()]
    }

    fn order(&self) -> BigUint {
        self.params.group_order()
    }

    fn elements(&self, cap: u64) -> Result<Vec<MetaElement>> {
        let order = self.order();
        let size = order
            .to_u64()
            .filter(|&s| s <= cap)
            .ok_or_else(|| Error::TooLarge(order.to_string()))?;
        let pm = self.params.pm.to_u64().unwrap();
        let pn = self.params.pn.to_u64().unwrap();
        let mut out = Vec::with_capacity(size as usize);
        for i in 0..pm {
            for j in 0..pn {
                out.push(self.element(i, j));
            }
        }
        Ok(out)
    }
}
