//! Attacks on the key exchange: a linear scan over the private subgroup,
//! and on the metacyclic platform the reduction of conjugacy search to a
//! discrete logarithm in the order-`p` subgroup `<t>` of `Z_(p^m)^*`,
//! solved by baby-step/giant-step. Also the class-size statistics that
//! bound how many keys an exchange can reach.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{bsgs_dlog, inv_biguint, ArithError, Natural, Residue};
use crate::error::{Error, Result};
use crate::group::{self, GroupLaw};
use crate::kex::{GroupValue, Platform};
use crate::treegroup::level_subgroup_elements;

#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub recovered_key: String,
    pub exponent: Natural,
    /// Modular multiplications in the discrete-log search plus platform
    /// multiplications and inversions.
    pub group_ops: u64,
    pub wall_time: Duration,
}

#[derive(Serialize)]
struct AttackReportJson<'a> {
    recovered_key: &'a str,
    exponent: String,
    group_ops: u64,
    wall_ms: f64,
}

impl AttackReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&AttackReportJson {
            recovered_key: &self.recovered_key,
            exponent: self.exponent.to_string(),
            group_ops: self.group_ops,
            wall_ms: self.wall_time.as_secs_f64() * 1e3,
        })
        .expect("plain struct")
    }
}

/// Least `s` such that conjugating `w` by the `s`-th element of the private
/// subgroup gives `w_pub`. On the Miller-Moreno platforms the `s`-th element
/// is `b^s`; on the tree it is the `s`-th level-subgroup element in mask
/// order.
pub fn brute_conjugacy(
    platform: &Platform,
    w: &GroupValue,
    w_pub: &GroupValue,
    max_iter: u64,
) -> Result<Natural> {
    if !platform.owns(w) || !platform.owns(w_pub) {
        return Err(Error::PlatformMismatch);
    }
    match platform {
        Platform::Metacyclic(_) | Platform::Heisenberg(_) => {
            let b = match platform {
                Platform::Metacyclic(g) => GroupValue::Meta(g.b()),
                Platform::Heisenberg(g) => GroupValue::Mm(g.b()),
                Platform::Tree(_) => unreachable!(),
            };
            let mut cur = w.clone();
            for s in 0..max_iter {
                if cur == *w_pub {
                    return Ok(s.into());
                }
                cur = platform.conjugate(&cur, &b)?;
            }
            Err(Error::NotInOrbit(max_iter))
        }
        Platform::Tree(g) => {
            let level = platform.private_level().expect("tree platform");
            let candidates = level_subgroup_elements(level, g.params(), false)?;
            for (s, x) in candidates.into_iter().take(max_iter as usize).enumerate() {
                if platform.conjugate(w, &GroupValue::Tree(x))? == *w_pub {
                    return Ok((s as u64).into());
                }
            }
            Err(Error::NotInOrbit(max_iter))
        }
    }
}

/// Recovers the shared key from `w = a^i`, `w^x` and `w^y` alone.
///
/// With `x = b^v`, `w^x = a^(i t^v)`, so `t^v = i_x / i` in `Z_(p^m)^*`;
/// `t` has order `p`, and BSGS finds `s = v mod p`. The key is then
/// `(w^y)^(b^s)`.
pub fn bsgs_break(w: &GroupValue, w_x: &GroupValue, w_y: &GroupValue) -> Result<AttackReport> {
    let start = Instant::now();
    let (w, w_x, w_y) = match (w, w_x, w_y) {
        (GroupValue::Meta(w), GroupValue::Meta(wx), GroupValue::Meta(wy)) => (w, wx, wy),
        _ => {
            return Err(Error::Unsupported(
                "the discrete-log attack needs metacyclic values".into(),
            ))
        }
    };
    if w.params() != w_x.params() || w.params() != w_y.params() {
        return Err(Error::ParamMismatch);
    }
    let params = w.params();
    let group = crate::metacyclic::Metacyclic::new(params.p().clone(), params.m(), params.n())?;
    let pm = params.pm();
    if !w.j().is_zero() || !w_x.j().is_zero() {
        return Err(Error::Arith(ArithError::NoSolution));
    }
    let i_inv = inv_biguint(w.i(), pm).ok_or(Error::Arith(ArithError::NotInvertible {
        value: w.i().clone(),
        modulus: pm.clone(),
    }))?;
    let ratio = Residue::new(w_x.i() * i_inv, pm.clone())?;
    let mut group_ops = 1;
    let twist = Residue::new(params.twist().clone(), pm.clone())?;
    let dlog = bsgs_dlog(&twist, &ratio, &Natural::new(params.p().clone()))?;
    group_ops += dlog.multiplications;

    let conjugator = group.element(BigUint::zero(), dlog.exponent.as_biguint().clone());
    let key = group.conjugate(w_y, &conjugator)?;
    // x^-1, then two products
    group_ops += 3;
    Ok(AttackReport {
        recovered_key: key.to_string(),
        exponent: dlog.exponent,
        group_ops,
        wall_time: start.elapsed(),
    })
}

/// Class sizes of the whole group: size -> number of classes.
pub fn orbit_stats<G: GroupLaw>(group: &G, cap: u64) -> Result<BTreeMap<u64, u64>> {
    if group.order() > BigUint::from(cap) {
        return Err(Error::TooLarge(group.order().to_string()));
    }
    group::class_histogram(group, cap)
}

pub fn platform_orbit_stats(platform: &Platform, cap: u64) -> Result<BTreeMap<u64, u64>> {
    match platform {
        Platform::Metacyclic(g) => orbit_stats(g, cap),
        Platform::Heisenberg(g) => orbit_stats(g, cap),
        Platform::Tree(g) => orbit_stats(g, cap),
    }
}

/// `sum(size * count)`, which must equal the group order.
pub fn class_equation_total(hist: &BTreeMap<u64, u64>) -> BigUint {
    hist.iter()
        .map(|(size, count)| BigUint::from(*size) * *count)
        .fold(BigUint::zero(), |a, b| a + b)
}

/// True when every class size divides the group order.
pub fn sizes_divide_order(hist: &BTreeMap<u64, u64>, order: &BigUint) -> bool {
    hist.keys()
        .all(|&s| s > 0 && (order % BigUint::from(s)).is_zero())
}
