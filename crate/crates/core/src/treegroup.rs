//! Sylow 2-subgroups of `S_(2^k)` and `A_(2^k)` as automorphisms of the
//! complete binary tree of depth `k`.
//!
//! An element is a portrait: one swap bit per internal vertex, stored in
//! level order (root first, left to right within a level). Leaves are the
//! integers `0..2^k` read as root-first bit strings, so the root bit is the
//! most significant one.
//!
//! Composition reads left to right: `compose(g, h)` acts on a leaf `x` as
//! `h(g(x))`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::arith::{parse_decimal, Natural};
use crate::error::{Error, Result};
use crate::group::{self, GroupLaw};

pub const MAX_DEPTH: u32 = 20;
/// Largest depth at which whole groups are enumerated.
pub const MAX_ENUM_DEPTH: u32 = 4;
/// Largest level at which a level subgroup is enumerated.
pub const MAX_ENUM_LEVEL: u32 = 4;
/// Largest group handed to the brute-force generating-set search.
pub const BRUTE_FORCE_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeParams {
    k: u32,
}

impl TreeParams {
    pub fn new(k: u32) -> Result<Self> {
        if !(1..=MAX_DEPTH).contains(&k) {
            return Err(Error::InvalidParams(format!(
                "tree depth {k} outside 1..={MAX_DEPTH}"
            )));
        }
        Ok(TreeParams { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn leaves(&self) -> usize {
        1 << self.k
    }

    pub fn vertex_count(&self) -> usize {
        (1 << self.k) - 1
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Portrait {
    k: u32,
    words: Vec<u64>,
}

fn vertex_index(level: u32, pos: usize) -> usize {
    (1usize << level) - 1 + pos
}

impl Portrait {
    pub fn identity(params: TreeParams) -> Self {
        let n = params.vertex_count();
        Portrait {
            k: params.k,
            words: vec![0; n.div_ceil(64)],
        }
    }

    /// Portrait whose active vertices are given as `(level, position)`.
    pub fn from_active(params: TreeParams, active: &[(u32, usize)]) -> Result<Self> {
        let mut g = Portrait::identity(params);
        for &(level, pos) in active {
            if level >= params.k || pos >= 1 << level {
                return Err(Error::LevelOutOfRange {
                    level,
                    k: params.k,
                });
            }
            g.toggle(vertex_index(level, pos));
        }
        Ok(g)
    }

    /// Portrait from level-order bits packed into an integer, root first.
    pub fn from_index(params: TreeParams, index: u64) -> Self {
        let n = params.vertex_count();
        let mut g = Portrait::identity(params);
        for v in 0..n.min(64) {
            if (index >> (n - 1 - v)) & 1 == 1 {
                g.toggle(v);
            }
        }
        g
    }

    pub fn depth(&self) -> u32 {
        self.k
    }

    pub fn params(&self) -> TreeParams {
        TreeParams { k: self.k }
    }

    fn bit(&self, v: usize) -> bool {
        (self.words[v / 64] >> (v % 64)) & 1 == 1
    }

    fn toggle(&mut self, v: usize) {
        self.words[v / 64] ^= 1 << (v % 64);
    }

    pub fn label(&self, level: u32, pos: usize) -> bool {
        self.bit(vertex_index(level, pos))
    }

    pub fn is_identity(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn active_count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn active_at_level(&self, level: u32) -> usize {
        (0..1usize << level).filter(|&q| self.label(level, q)).count()
    }

    /// Levels carrying at least one active vertex.
    pub fn active_levels(&self) -> Vec<u32> {
        (0..self.k).filter(|&l| self.active_at_level(l) > 0).collect()
    }

    /// Images of every vertex prefix at each level `0..=k` under this
    /// automorphism, computed top down.
    fn prefix_images(&self, mut visit: impl FnMut(u32, usize, usize, bool)) -> Vec<usize> {
        let mut img = vec![0usize];
        for level in 0..self.k {
            let mut next = Vec::with_capacity(img.len() * 2);
            for (q, &image) in img.iter().enumerate() {
                let swap = self.label(level, q);
                visit(level, q, image, swap);
                next.push(2 * image + swap as usize);
                next.push(2 * image + (!swap) as usize);
            }
            img = next;
        }
        img
    }

    /// The leaf permutation: `perm[x]` is the image of leaf `x`.
    pub fn to_permutation(&self) -> Vec<usize> {
        self.prefix_images(|_, _, _, _| {})
    }

    /// Parity of the leaf permutation. A swap at level `l` is a product of
    /// `2^(k-l-1)` transpositions, odd only at the bottom level.
    pub fn is_even(&self) -> bool {
        self.active_at_level(self.k - 1).is_multiple_of(2)
    }

    /// "g then h".
    pub fn compose(&self, h: &Portrait) -> Result<Portrait> {
        if self.k != h.k {
            return Err(Error::DepthMismatch(self.k, h.k));
        }
        let mut out = Portrait::identity(self.params());
        self.prefix_images(|level, q, image, swap| {
            if swap ^ h.label(level, image) {
                out.toggle(vertex_index(level, q));
            }
        });
        Ok(out)
    }

    pub fn inverse(&self) -> Portrait {
        let mut out = Portrait::identity(self.params());
        self.prefix_images(|level, _, image, swap| {
            if swap {
                out.toggle(vertex_index(level, image));
            }
        });
        out
    }

    fn to_biguint(&self) -> BigUint {
        let n = self.params().vertex_count();
        let mut value = BigUint::zero();
        for v in 0..n {
            if self.bit(v) {
                value.set_bit((n - 1 - v) as u64, true);
            }
        }
        value
    }
}

impl fmt::Debug for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Portrait(k={}, ", self.k)?;
        for level in 0..self.k {
            if level > 0 {
                f.write_str("|")?;
            }
            for q in 0..1usize << level {
                f.write_str(if self.label(level, q) { "1" } else { "0" })?;
            }
        }
        f.write_str(")")
    }
}

impl fmt::Display for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tg:k={};bits={}", self.k, self.to_biguint().to_str_radix(16))
    }
}

impl FromStr for Portrait {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("{s:?} is not a tree element"));
        let body = s.strip_prefix("tg:k=").ok_or_else(bad)?;
        let (k, hex) = body.split_once(";bits=").ok_or_else(bad)?;
        let k = parse_decimal(k).map_err(|e| Error::Parse(e.to_string()))?;
        let k = u32::try_from(k).map_err(|_| bad())?;
        let params = TreeParams::new(k)?;
        let minimal = !hex.is_empty()
            && hex.bytes().all(|c| c.is_ascii_digit() || (b'a'..=b'f').contains(&c))
            && (hex == "0" || !hex.starts_with('0'));
        if !minimal {
            return Err(bad());
        }
        let value = BigUint::parse_bytes(hex.as_bytes(), 16).ok_or_else(bad)?;
        let n = params.vertex_count();
        if value.bits() > n as u64 {
            return Err(Error::Parse(format!("{s:?} has more than {n} bits")));
        }
        let mut g = Portrait::identity(params);
        for v in 0..n {
            if value.bit((n - 1 - v) as u64) {
                g.toggle(v);
            }
        }
        Ok(g)
    }
}

/// Which Sylow 2-subgroup: of the symmetric or of the alternating group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Symmetric,
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SylowTree {
    params: TreeParams,
    variant: Variant,
}

impl SylowTree {
    pub fn new(params: TreeParams, variant: Variant) -> Self {
        SylowTree { params, variant }
    }

    pub fn symmetric(k: u32) -> Result<Self> {
        Ok(SylowTree::new(TreeParams::new(k)?, Variant::Symmetric))
    }

    pub fn alternating(k: u32) -> Result<Self> {
        Ok(SylowTree::new(TreeParams::new(k)?, Variant::Alternating))
    }

    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Leftmost vertex active at `level`.
    fn level_generator(&self, level: u32) -> Portrait {
        Portrait::from_active(self.params, &[(level, 0)]).expect("level in range")
    }

    pub fn contains(&self, g: &Portrait) -> bool {
        g.k == self.params.k && (self.variant == Variant::Symmetric || g.is_even())
    }

    pub fn is_central(&self, g: &Portrait) -> Result<bool> {
        for x in self.generators() {
            if !self.commutes(g, &x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl GroupLaw for SylowTree {
    type Elem = Portrait;

    fn identity(&self) -> Portrait {
        Portrait::identity(self.params)
    }

    fn multiply(&self, g: &Portrait, h: &Portrait) -> Result<Portrait> {
        if g.k != self.params.k {
            return Err(Error::DepthMismatch(self.params.k, g.k));
        }
        g.compose(h)
    }

    fn inverse(&self, g: &Portrait) -> Result<Portrait> {
        if g.k != self.params.k {
            return Err(Error::DepthMismatch(self.params.k, g.k));
        }
        Ok(g.inverse())
    }

    /// One leftmost-vertex generator per level for the symmetric variant.
    /// The even subgroup has index 2 and transversal `{e, s}` with `s` the
    /// bottom-level generator, giving the Schreier generators `e_l` and
    /// `s e_l s` for the upper levels.
    fn generators(&self) -> Vec<Portrait> {
        let k = self.params.k;
        match self.variant {
            Variant::Symmetric => (0..k).map(|l| self.level_generator(l)).collect(),
            Variant::Alternating => {
                let s = self.level_generator(k - 1);
                let mut gens = Vec::new();
                for l in 0..k - 1 {
                    let e = self.level_generator(l);
                    let twisted = s.compose(&e).and_then(|x| x.compose(&s)).unwrap();
                    gens.push(e);
                    if !gens.contains(&twisted) {
                        gens.push(twisted);
                    }
                }
                gens
            }
        }
    }

    fn order(&self) -> BigUint {
        group_order(self.variant, self.params).into_biguint()
    }

    fn elements(&self, cap: u64) -> Result<Vec<Portrait>> {
        let n = self.params.vertex_count();
        if self.params.k > MAX_ENUM_DEPTH || (1u64 << n) > cap.saturating_mul(2) {
            return Err(Error::TooLarge(self.order().to_string()));
        }
        let all = (0..1u64 << n).map(|idx| Portrait::from_index(self.params, idx));
        let out: Vec<Portrait> = match self.variant {
            Variant::Symmetric => all.collect(),
            Variant::Alternating => all.filter(Portrait::is_even).collect(),
        };
        if out.len() as u64 > cap {
            return Err(Error::TooLarge(self.order().to_string()));
        }
        Ok(out)
    }
}

/// `|Syl2(S_(2^k))| = 2^(2^k - 1)`, `|Syl2(A_(2^k))| = 2^(2^k - 2)`.
pub fn group_order(variant: Variant, params: TreeParams) -> Natural {
    let leaves = params.leaves() as u64;
    let exp = match variant {
        Variant::Symmetric => leaves - 1,
        Variant::Alternating => leaves - 2,
    };
    Natural::new(BigUint::one() << exp)
}

/// Every portrait with active vertices only at `level`, restricted to an
/// even number of them at the bottom level when `even_only` is set.
pub fn level_subgroup_elements(level: u32, params: TreeParams, even_only: bool) -> Result<Vec<Portrait>> {
    if level >= params.k {
        return Err(Error::LevelOutOfRange { level, k: params.k });
    }
    if level > MAX_ENUM_LEVEL {
        return Err(Error::TooLarge(format!("2^{}", 1u64 << level)));
    }
    let width = 1usize << level;
    let parity_matters = even_only && level == params.k - 1;
    let mut out = Vec::new();
    for mask in 0u64..1 << width {
        if parity_matters && mask.count_ones() % 2 == 1 {
            continue;
        }
        let active: Vec<(u32, usize)> = (0..width)
            .filter(|&q| (mask >> q) & 1 == 1)
            .map(|q| (level, q))
            .collect();
        out.push(Portrait::from_active(params, &active)?);
    }
    Ok(out)
}

/// Commutator subgroup of the group generated by `generators`: the normal
/// closure of the pairwise generator commutators.
pub fn derived_subgroup(generators: &[Portrait], params: TreeParams) -> Result<HashSet<Portrait>> {
    if params.k > MAX_ENUM_DEPTH {
        return Err(Error::DepthTooLarge(params.k));
    }
    let ambient = SylowTree::new(params, Variant::Symmetric);
    let mut seeds = Vec::new();
    for (idx, g) in generators.iter().enumerate() {
        for h in &generators[idx + 1..] {
            seeds.push(ambient.commutator(g, h)?);
        }
    }
    group::normal_closure(&ambient, &seeds, generators)
}

/// Generators picked greedily from `elements` (an element joins when it is
/// not yet in the span). Fails with `NotAGroup` if the span ever leaves the
/// set, which is exactly when the set is not closed.
fn greedy_generators(elements: &HashSet<Portrait>, params: TreeParams) -> Result<Vec<Portrait>> {
    let ambient = SylowTree::new(params, Variant::Symmetric);
    let mut ordered: Vec<&Portrait> = elements.iter().collect();
    ordered.sort_by_key(|g| g.to_biguint());
    let mut gens = Vec::new();
    let mut span = group::closure(&ambient, &gens)?;
    if !elements.contains(&ambient.identity()) {
        return Err(Error::NotAGroup);
    }
    for g in ordered {
        if span.contains(g) {
            continue;
        }
        gens.push(g.clone());
        span = group::closure(&ambient, &gens)?;
        if span.len() > elements.len() || span.iter().any(|x| !elements.contains(x)) {
            return Err(Error::NotAGroup);
        }
    }
    Ok(gens)
}

fn check_depth(elements: &HashSet<Portrait>, params: TreeParams) -> Result<()> {
    match elements.iter().find(|g| g.k != params.k) {
        Some(g) => Err(Error::DepthMismatch(params.k, g.k)),
        None => Ok(()),
    }
}

/// Minimal number of generators of a 2-group given by all of its elements,
/// as the rank of the Frattini quotient `G / G^2 [G, G]`.
pub fn minimal_generating_size(elements: &HashSet<Portrait>, params: TreeParams) -> Result<u32> {
    check_depth(elements, params)?;
    let gens = greedy_generators(elements, params)?;
    let ambient = SylowTree::new(params, Variant::Symmetric);
    let mut seeds: Vec<Portrait> = elements
        .iter()
        .map(|g| g.compose(g))
        .collect::<Result<_>>()?;
    for (idx, g) in gens.iter().enumerate() {
        for h in &gens[idx + 1..] {
            seeds.push(ambient.commutator(g, h)?);
        }
    }
    let frattini = group::normal_closure(&ambient, &seeds, &gens)?;
    let index = elements.len() / frattini.len();
    debug_assert!(index.is_power_of_two());
    Ok(index.trailing_zeros())
}

/// Smallest `r` such that some `r` elements generate the group, by search
/// over subsets in increasing size. Only for groups of at most
/// [`BRUTE_FORCE_LIMIT`] elements.
pub fn minimal_generating_size_brute(elements: &HashSet<Portrait>, params: TreeParams) -> Result<u32> {
    check_depth(elements, params)?;
    if elements.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(elements.len().to_string()));
    }
    greedy_generators(elements, params)?;
    let ambient = SylowTree::new(params, Variant::Symmetric);
    let mut pool: Vec<Portrait> = elements.iter().filter(|g| !g.is_identity()).cloned().collect();
    pool.sort_by_key(|g| g.to_biguint());
    for r in 0..=pool.len() {
        let mut found = false;
        for_each_subset(pool.len(), r, &mut |idx| {
            if found {
                return;
            }
            let gens: Vec<Portrait> = idx.iter().map(|&i| pool[i].clone()).collect();
            if group::closure(&ambient, &gens).map(|s| s.len()).unwrap_or(0) == elements.len() {
                found = true;
            }
        });
        if found {
            return Ok(r as u32);
        }
    }
    unreachable!("the whole group generates itself")
}

fn for_each_subset(n: usize, r: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == r {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, f);
            cur.pop();
        }
    }
    rec(0, n, r, &mut Vec::with_capacity(r), f);
}
