//! The group-law abstraction shared by the three platforms, plus the
//! enumeration helpers (subgroup closure, conjugation orbits, class
//! histograms) that operate on any of them.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigUint;

use crate::error::{Error, Result};

pub trait GroupLaw {
    type Elem: Clone + Eq + Hash + Debug;

    fn identity(&self) -> Self::Elem;

    fn multiply(&self, g: &Self::Elem, h: &Self::Elem) -> Result<Self::Elem>;

    fn inverse(&self, g: &Self::Elem) -> Result<Self::Elem>;

    /// `x^-1 w x`.
    fn conjugate(&self, w: &Self::Elem, x: &Self::Elem) -> Result<Self::Elem> {
        let xi = self.inverse(x)?;
        self.multiply(&self.multiply(&xi, w)?, x)
    }

    /// A generating set of the whole group.
    fn generators(&self) -> Vec<Self::Elem>;

    fn order(&self) -> BigUint;

    /// Every element, or `TooLarge` when the group has more than `cap`.
    fn elements(&self, cap: u64) -> Result<Vec<Self::Elem>>;

    fn commutes(&self, g: &Self::Elem, h: &Self::Elem) -> Result<bool> {
        Ok(self.multiply(g, h)? == self.multiply(h, g)?)
    }

    /// `g^-1 h^-1 g h`.
    fn commutator(&self, g: &Self::Elem, h: &Self::Elem) -> Result<Self::Elem> {
        let gi = self.inverse(g)?;
        let hi = self.inverse(h)?;
        let left = self.multiply(&gi, &hi)?;
        self.multiply(&self.multiply(&left, g)?, h)
    }
}

/// Subgroup generated by `gens`, by a worklist over right multiplication.
pub fn closure<G: GroupLaw>(group: &G, gens: &[G::Elem]) -> Result<HashSet<G::Elem>> {
    let id = group.identity();
    let mut seen = HashSet::new();
    seen.insert(id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in gens {
            let next = group.multiply(&g, s)?;
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(seen)
}

/// Smallest subgroup containing `seeds` that is closed under conjugation by
/// `ambient_gens`.
pub fn normal_closure<G: GroupLaw>(
    group: &G,
    seeds: &[G::Elem],
    ambient_gens: &[G::Elem],
) -> Result<HashSet<G::Elem>> {
    let mut gens: Vec<G::Elem> = Vec::new();
    let mut sub = closure(group, &gens)?;
    let mut pending: VecDeque<G::Elem> = seeds.iter().cloned().collect();
    while let Some(cand) = pending.pop_front() {
        if sub.contains(&cand) {
            continue;
        }
        gens.push(cand.clone());
        sub = closure(group, &gens)?;
        for x in ambient_gens {
            pending.push_back(group.conjugate(&cand, x)?);
        }
    }
    Ok(sub)
}

/// Conjugacy class of `w`: the orbit under conjugation by the generators.
pub fn conjugation_orbit<G: GroupLaw>(group: &G, w: &G::Elem, cap: u64) -> Result<Vec<G::Elem>> {
    let gens = group.generators();
    let mut seen = HashSet::new();
    seen.insert(w.clone());
    let mut order = vec![w.clone()];
    let mut queue = VecDeque::from([w.clone()]);
    while let Some(u) = queue.pop_front() {
        for x in &gens {
            let v = group.conjugate(&u, x)?;
            if seen.insert(v.clone()) {
                if seen.len() as u64 > cap {
                    return Err(Error::CapExceeded(cap));
                }
                order.push(v.clone());
                queue.push_back(v);
            }
        }
    }
    Ok(order)
}

/// Class equation of the group: class size -> number of classes.
pub fn class_histogram<G: GroupLaw>(group: &G, cap: u64) -> Result<BTreeMap<u64, u64>> {
    let all = group.elements(cap)?;
    let mut assigned: HashSet<G::Elem> = HashSet::with_capacity(all.len());
    let mut hist = BTreeMap::new();
    for g in &all {
        if assigned.contains(g) {
            continue;
        }
        let class = conjugation_orbit(group, g, cap)?;
        *hist.entry(class.len() as u64).or_insert(0) += 1;
        assigned.extend(class);
    }
    Ok(hist)
}

/// Elements commuting with every generator.
pub fn center<G: GroupLaw>(group: &G, cap: u64) -> Result<Vec<G::Elem>> {
    let gens = group.generators();
    let mut out = Vec::new();
    for g in group.elements(cap)? {
        let mut central = true;
        for x in &gens {
            if !group.commutes(&g, x)? {
                central = false;
                break;
            }
        }
        if central {
            out.push(g);
        }
    }
    Ok(out)
}
