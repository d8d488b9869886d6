//! The non-metacyclic Miller-Moreno group
//! `<a, b, c | a^(p^m) = b^(p^n) = c^p = e, b^-1 a b = a c, c central>`
//! of order `p^(m+n+1)`, in the normal form `a^i b^j c^k`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::is_probable_prime;
use crate::error::{Error, Result};
use crate::group::{self, GroupLaw};
use crate::metacyclic::{parse_fields, small_exponent};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MMParams {
    p: BigUint,
    m: u32,
    n: u32,
    pm: BigUint,
    pn: BigUint,
}

impl MMParams {
    pub fn new(p: impl Into<BigUint>, m: u32, n: u32) -> Result<Self> {
        let p = p.into();
        if p < BigUint::from(3u8) || !is_probable_prime(&p) {
            return Err(Error::InvalidParams(format!("p = {p} is not an odd prime")));
        }
        if m < 1 || n < 1 {
            return Err(Error::InvalidParams(format!(
                "m = {m}, n = {n}: both must be at least 1"
            )));
        }
        let pm = num_traits::pow(p.clone(), m as usize);
        let pn = num_traits::pow(p.clone(), n as usize);
        Ok(MMParams { p, m, n, pm, pn })
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

    pub fn pm(&self) -> &BigUint {
        &self.pm
    }

    pub fn pn(&self) -> &BigUint {
        &self.pn
    }

    pub fn group_order(&self) -> BigUint {
        &self.pm * &self.pn * &self.p
    }
}

/// `a^i b^j c^k`.
#[derive(Clone)]
pub struct MMElement {
    params: Arc<MMParams>,
    i: BigUint,
    j: BigUint,
    k: BigUint,
}

impl MMElement {
    pub fn i(&self) -> &BigUint {
        &self.i
    }

    pub fn j(&self) -> &BigUint {
        &self.j
    }

    pub fn k(&self) -> &BigUint {
        &self.k
    }

    pub fn params(&self) -> &MMParams {
        &self.params
    }

    pub fn is_identity(&self) -> bool {
        self.i.is_zero() && self.j.is_zero() && self.k.is_zero()
    }
}

impl PartialEq for MMElement {
    fn eq(&self, other: &Self) -> bool {
        self.i == other.i
            && self.j == other.j
            && self.k == other.k
            && (Arc::ptr_eq(&self.params, &other.params) || self.params == other.params)
    }
}

impl Eq for MMElement {}

impl Hash for MMElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.i.hash(state);
        self.j.hash(state);
        self.k.hash(state);
    }
}

impl fmt::Debug for MMElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a^{} b^{} c^{}", self.i, self.j, self.k)
    }
}

impl fmt::Display for MMElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        write!(
            f,
            "mm:p={};m={};n={};i={};j={};k={}",
            p.p, p.m, p.n, self.i, self.j, self.k
        )
    }
}

impl FromStr for MMElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix("mm:")
            .ok_or_else(|| Error::Parse(format!("{s:?} is not a Miller-Moreno element")))?;
        let f = parse_fields(body, &["p", "m", "n", "i", "j", "k"])?;
        let group = Heisenberg::new(f[0].clone(), small_exponent(&f[1])?, small_exponent(&f[2])?)?;
        let pr = &group.params;
        if f[3] >= pr.pm || f[4] >= pr.pn || f[5] >= pr.p {
            return Err(Error::Parse(format!("{s:?} is not in normal form")));
        }
        Ok(group.element(f[3].clone(), f[4].clone(), f[5].clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heisenberg {
    params: Arc<MMParams>,
}

impl Heisenberg {
    pub fn new(p: impl Into<BigUint>, m: u32, n: u32) -> Result<Self> {
        Ok(Heisenberg {
            params: Arc::new(MMParams::new(p, m, n)?),
        })
    }

    pub fn params(&self) -> &MMParams {
        &self.params
    }

    pub fn element(
        &self,
        i: impl Into<BigUint>,
        j: impl Into<BigUint>,
        k: impl Into<BigUint>,
    ) -> MMElement {
        MMElement {
            params: Arc::clone(&self.params),
            i: i.into() % &self.params.pm,
            j: j.into() % &self.params.pn,
            k: k.into() % &self.params.p,
        }
    }

    pub fn a(&self) -> MMElement {
        self.element(1u32, 0u32, 0u32)
    }

    pub fn b(&self) -> MMElement {
        self.element(0u32, 1u32, 0u32)
    }

    pub fn c(&self) -> MMElement {
        self.element(0u32, 0u32, 1u32)
    }

    fn check(&self, g: &MMElement) -> Result<()> {
        if Arc::ptr_eq(&g.params, &self.params) || g.params == self.params {
            Ok(())
        } else {
            Err(Error::ParamMismatch)
        }
    }

    /// `-x mod p`.
    fn neg_p(&self, x: BigUint) -> BigUint {
        let p = &self.params.p;
        (p - x % p) % p
    }

    /// Central iff `p | i` and `p | j`.
    pub fn is_central(&self, g: &MMElement) -> Result<bool> {
        self.check(g)?;
        let p = &self.params.p;
        Ok(g.i.is_multiple_of(p) && g.j.is_multiple_of(p))
    }

    /// The conjugacy class: `{a^i b^j c^(k+r)}` over the residues `r`
    /// reachable as `i v - j u (mod p)`. Enumerates conjugation by the
    /// generators when the group is at most `cap` elements, otherwise uses
    /// the closed form.
    pub fn conjugacy_class(&self, w: &MMElement, cap: u64) -> Result<Vec<MMElement>> {
        self.check(w)?;
        if self.order() <= BigUint::from(cap) {
            return group::conjugation_orbit(self, w, cap);
        }
        if self.is_central(w)? {
            return Ok(vec![w.clone()]);
        }
        let p = self
            .params
            .p
            .to_u64()
            .filter(|&p| p <= cap)
            .ok_or(Error::CapExceeded(cap))?;
        Ok((0..p)
            .map(|r| self.element(w.i.clone(), w.j.clone(), &w.k + r))
            .collect())
    }
}

impl GroupLaw for Heisenberg {
    type Elem = MMElement;

    fn identity(&self) -> MMElement {
        self.element(0u32, 0u32, 0u32)
    }

    /// `b^j a^i = a^i b^j c^(-ij)`, so the product picks up `c^(-j1 i2)`.
    fn multiply(&self, g: &MMElement, h: &MMElement) -> Result<MMElement> {
        self.check(g)?;
        self.check(h)?;
        let p = &self.params.p;
        let k = (&g.k + &h.k + self.neg_p(&g.j * &h.i)) % p;
        Ok(MMElement {
            params: Arc::clone(&self.params),
            i: (&g.i + &h.i) % &self.params.pm,
            j: (&g.j + &h.j) % &self.params.pn,
            k,
        })
    }

    /// `a^-i b^-j c^(-k-ij)`.
    fn inverse(&self, g: &MMElement) -> Result<MMElement> {
        self.check(g)?;
        let pm = &self.params.pm;
        let pn = &self.params.pn;
        let k = self.neg_p(&g.k + &g.i * &g.j);
        Ok(MMElement {
            params: Arc::clone(&self.params),
            i: (pm - &g.i) % pm,
            j: (pn - &g.j) % pn,
            k,
        })
    }

    /// `x^-1 (a^i b^j c^k) x = a^i b^j c^(k + i v - j u)` for `x = a^u b^v c^*`.
    fn conjugate(&self, w: &MMElement, x: &MMElement) -> Result<MMElement> {
        self.check(w)?;
        self.check(x)?;
        let p = &self.params.p;
        let shift = (&w.i * &x.j) % p + self.neg_p(&w.j * &x.i);
        Ok(MMElement {
            params: Arc::clone(&self.params),
            i: w.i.clone(),
            j: w.j.clone(),
            k: (&w.k + shift) % p,
        })
    }

    fn generators(&self) -> Vec<MMElement> {
        // c = [a, b] is redundant but keeps orbit searches one step shorter
        vec![self.a(), self.b(), self.c()]
    }

    fn order(&self) -> BigUint {
        self.params.group_order()
    }

    fn elements(&self, cap: u64) -> Result<Vec<MMElement>> {
        let order = self.order();
        let size = order
            .to_u64()
            .filter(|&s| s <= cap)
            .ok_or_else(|| Error::TooLarge(order.to_string()))?;
        let pm = self.params.pm.to_u64().unwrap();
        let pn = self.params.pn.to_u64().unwrap();
        let p = self.params.p.to_u64().unwrap();
        let mut out = Vec::with_capacity(size as usize);
        for i in 0..pm {
            for j in 0..pn {
                for k in 0..p {
                    out.push(self.element(i, j, k));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h311() -> Heisenberg {
        Heisenberg::new(3u32, 1, 1).unwrap()
    }

    /// Rewriting oracle for `a b -> b a c` with `c` central: values tracked
    /// as `b^J a^I c^K`, letters appended one at a time.
    fn oracle_reduce(params: &MMParams, word: &str) -> (u64, u64, u64) {
        let pm = params.pm().to_u64().unwrap();
        let pn = params.pn().to_u64().unwrap();
        let p = params.p().to_u64().unwrap();
        let (mut bj, mut ai, mut ck) = (0u64, 0u64, 0u64);
        for letter in word.chars() {
            match letter {
                'a' => ai = (ai + 1) % pm,
                'b' => {
                    // a^I b = b (a c)^I = b a^I c^I
                    for _ in 0..ai {
                        ck = (ck + 1) % p;
                    }
                    bj = (bj + 1) % pn;
                }
                'c' => ck = (ck + 1) % p,
                _ => unreachable!(),
            }
        }
        (bj, ai, ck)
    }

    fn word(g: &MMElement) -> String {
        let n = |x: &BigUint| x.to_u64().unwrap() as usize;
        "a".repeat(n(g.i())) + &"b".repeat(n(g.j())) + &"c".repeat(n(g.k()))
    }

    #[test]
    fn multiply_examples() {
        let g = h311();
        assert_eq!(g.multiply(&g.a(), &g.b()).unwrap(), g.element(1u32, 1u32, 0u32));
        assert_eq!(g.multiply(&g.b(), &g.a()).unwrap(), g.element(1u32, 1u32, 2u32));
        let x = g.element(2u32, 1u32, 1u32);
        assert_eq!(g.multiply(&x, &g.identity()).unwrap(), x);
    }

    #[test]
    fn inverse_examples() {
        let g = h311();
        assert_eq!(g.inverse(&g.identity()).unwrap(), g.identity());
        assert_eq!(
            g.inverse(&g.element(1u32, 1u32, 0u32)).unwrap(),
            g.element(2u32, 2u32, 2u32)
        );
        assert_eq!(g.inverse(&g.c()).unwrap(), g.element(0u32, 0u32, 2u32));
    }

    #[test]
    fn conjugate_examples() {
        let g = h311();
        assert_eq!(g.conjugate(&g.a(), &g.b()).unwrap(), g.element(1u32, 0u32, 1u32));
        assert_eq!(
            g.conjugate(&g.a(), &g.element(0u32, 2u32, 0u32)).unwrap(),
            g.element(1u32, 0u32, 2u32)
        );
        let w = g.element(2u32, 1u32, 1u32);
        assert_eq!(g.conjugate(&w, &g.element(0u32, 0u32, 2u32)).unwrap(), w);
    }

    #[test]
    fn class_examples() {
        let g = h311();
        let mut class = g.conjugacy_class(&g.a(), 1000).unwrap();
        class.sort_by_key(|e| e.k().clone());
        assert_eq!(
            class,
            vec![
                g.element(1u32, 0u32, 0u32),
                g.element(1u32, 0u32, 1u32),
                g.element(1u32, 0u32, 2u32)
            ]
        );
        assert_eq!(g.conjugacy_class(&g.c(), 1000).unwrap(), vec![g.c()]);
        assert_eq!(
            g.conjugacy_class(&g.element(1u32, 1u32, 0u32), 1000).unwrap().len(),
            3
        );
        // closed form for groups beyond the enumeration cap
        let big = Heisenberg::new(10_007u32, 3, 3).unwrap();
        assert_eq!(big.conjugacy_class(&big.a(), 20_000).unwrap().len(), 10_007);
    }

    #[test]
    fn central_examples() {
        let g = h311();
        assert!(g.is_central(&g.c()).unwrap());
        assert!(!g.is_central(&g.a()).unwrap());
        let g21 = Heisenberg::new(3u32, 2, 1).unwrap();
        assert!(g21.is_central(&g21.element(3u32, 0u32, 0u32)).unwrap());
    }

    #[test]
    fn exhaustive_checks_on_small_groups() {
        for (m, n) in [(1, 1), (2, 1), (1, 2)] {
            let g = Heisenberg::new(3u32, m, n).unwrap();
            let all = g.elements(100).unwrap();
            for x in &all {
                let brute_central = all.iter().all(|y| g.commutes(x, y).unwrap());
                assert_eq!(brute_central, g.is_central(x).unwrap());
                assert!(g.commutes(x, &g.c()).unwrap());
                let class = g.conjugacy_class(x, 100).unwrap();
                assert_eq!(class.len(), if brute_central { 1 } else { 3 });
                for y in &all {
                    let xy = g.multiply(x, y).unwrap();
                    let expected = oracle_reduce(g.params(), &(word(x) + &word(y)));
                    assert_eq!(oracle_reduce(g.params(), &word(&xy)), expected);
                    let conj = g.conjugate(x, y).unwrap();
                    let slow = g
                        .multiply(&g.multiply(&g.inverse(y).unwrap(), x).unwrap(), y)
                        .unwrap();
                    assert_eq!(conj, slow);
                    assert_eq!((conj.i(), conj.j()), (x.i(), x.j()));
                    for z in &all {
                        assert_eq!(
                            g.multiply(&xy, z).unwrap(),
                            g.multiply(x, &g.multiply(y, z).unwrap()).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_text() {
        let g = h311();
        let x = g.element(1u32, 0u32, 2u32);
        assert_eq!(x.to_string(), "mm:p=3;m=1;n=1;i=1;j=0;k=2");
        assert_eq!(x.to_string().parse::<MMElement>().unwrap(), x);
        assert!("mm:p=3;m=1;n=1;i=1;j=0;k=3".parse::<MMElement>().is_err());
        assert!("mm:p=3;m=0;n=1;i=0;j=0;k=0".parse::<MMElement>().is_err());
    }

    #[test]
    fn rejects_mismatch() {
        let g = h311();
        let h = Heisenberg::new(5u32, 1, 1).unwrap();
        assert_eq!(g.multiply(&g.a(), &h.a()), Err(Error::ParamMismatch));
        assert_eq!(g.conjugate(&g.a(), &h.b()), Err(Error::ParamMismatch));
    }
}
