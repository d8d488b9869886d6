//! Ko-Lee style key agreement over any of the platforms.
//!
//! Both parties conjugate a public non-central base `w` by private elements
//! drawn from one commuting subgroup: `<b>` on the Miller-Moreno groups and
//! the level subgroup `G_k(k-2)` on the tree group. Alice publishes `w^x`,
//! Bob publishes `w^y`, and each conjugates the other's value by their own
//! private element to reach `w^(xy) = w^(yx)`. The shared secret is the
//! canonical text of that element.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{parse_decimal, random_below};
use crate::error::{Error, Result};
use crate::group::GroupLaw;
use crate::heisenberg::{Heisenberg, MMElement};
use crate::metacyclic::{MetaElement, Metacyclic};
use crate::treegroup::{Portrait, SylowTree, TreeParams, Variant};

/// Identifier of the seeded generator, recorded in every transcript.
pub const RNG_ID: &str = "chacha20";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlatformKind {
    Metacyclic,
    Heisenberg,
    Tree,
}

impl PlatformKind {
    pub fn name(self) -> &'static str {
        match self {
            PlatformKind::Metacyclic => "metacyclic",
            PlatformKind::Heisenberg => "heisenberg",
            PlatformKind::Tree => "tree",
        }
    }
}

impl std::str::FromStr for PlatformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metacyclic" => Ok(PlatformKind::Metacyclic),
            "heisenberg" => Ok(PlatformKind::Heisenberg),
            "tree" => Ok(PlatformKind::Tree),
            other => Err(Error::Parse(format!("unknown platform {other:?}"))),
        }
    }
}

/// A platform group together with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Platform {
    Metacyclic(Metacyclic),
    Heisenberg(Heisenberg),
    /// Always the Sylow 2-subgroup of the symmetric group.
    Tree(SylowTree),
}

impl Platform {
    pub fn metacyclic(p: impl Into<BigUint>, m: u32, n: u32) -> Result<Self> {
        Ok(Platform::Metacyclic(Metacyclic::new(p, m, n)?))
    }

    pub fn heisenberg(p: impl Into<BigUint>, m: u32, n: u32) -> Result<Self> {
        Ok(Platform::Heisenberg(Heisenberg::new(p, m, n)?))
    }

    /// The tree platform needs `k >= 2` so that the private level `k-2`
    /// exists and the group is non-abelian.
    pub fn tree(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParams(format!("tree depth {k} must be at least 2")));
        }
        Ok(Platform::Tree(SylowTree::new(TreeParams::new(k)?, Variant::Symmetric)))
    }

    pub fn kind(&self) -> PlatformKind {
        match self {
            Platform::Metacyclic(_) => PlatformKind::Metacyclic,
            Platform::Heisenberg(_) => PlatformKind::Heisenberg,
            Platform::Tree(_) => PlatformKind::Tree,
        }
    }

    /// `a` on the Miller-Moreno groups. On the tree, the binary odometer
    /// (rightmost vertex active on every level), which cycles the vertices
    /// of each level and so moves every private level-subgroup element.
    pub fn default_base(&self) -> GroupValue {
        match self {
            Platform::Metacyclic(g) => GroupValue::Meta(g.a()),
            Platform::Heisenberg(g) => GroupValue::Mm(g.a()),
            Platform::Tree(g) => {
                let path: Vec<(u32, usize)> =
                    (0..g.params().k()).map(|l| (l, (1usize << l) - 1)).collect();
                GroupValue::Tree(Portrait::from_active(g.params(), &path).expect("path exists"))
            }
        }
    }

    pub fn identity(&self) -> GroupValue {
        match self {
            Platform::Metacyclic(g) => GroupValue::Meta(g.identity()),
            Platform::Heisenberg(g) => GroupValue::Mm(g.identity()),
            Platform::Tree(g) => GroupValue::Tree(g.identity()),
        }
    }

    /// Private level used on the tree platform.
    pub fn private_level(&self) -> Option<u32> {
        match self {
            Platform::Tree(g) => Some(g.params().k() - 2),
            _ => None,
        }
    }

    /// Whether `v` is an element of this very group.
    pub fn owns(&self, v: &GroupValue) -> bool {
        match (self, v) {
            (Platform::Metacyclic(g), GroupValue::Meta(x)) => g.params() == x.params(),
            (Platform::Heisenberg(g), GroupValue::Mm(x)) => g.params() == x.params(),
            (Platform::Tree(g), GroupValue::Tree(x)) => g.params() == x.params(),
            _ => false,
        }
    }

    fn check(&self, v: &GroupValue) -> Result<()> {
        if self.owns(v) {
            Ok(())
        } else {
            Err(Error::PlatformMismatch)
        }
    }

    pub fn multiply(&self, g: &GroupValue, h: &GroupValue) -> Result<GroupValue> {
        self.check(g)?;
        self.check(h)?;
        Ok(match (self, g, h) {
            (Platform::Metacyclic(grp), GroupValue::Meta(x), GroupValue::Meta(y)) => {
                GroupValue::Meta(grp.multiply(x, y)?)
            }
            (Platform::Heisenberg(grp), GroupValue::Mm(x), GroupValue::Mm(y)) => {
                GroupValue::Mm(grp.multiply(x, y)?)
            }
            (Platform::Tree(grp), GroupValue::Tree(x), GroupValue::Tree(y)) => {
                GroupValue::Tree(grp.multiply(x, y)?)
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn inverse(&self, g: &GroupValue) -> Result<GroupValue> {
        self.check(g)?;
        Ok(match (self, g) {
            (Platform::Metacyclic(grp), GroupValue::Meta(x)) => GroupValue::Meta(grp.inverse(x)?),
            (Platform::Heisenberg(grp), GroupValue::Mm(x)) => GroupValue::Mm(grp.inverse(x)?),
            (Platform::Tree(grp), GroupValue::Tree(x)) => GroupValue::Tree(grp.inverse(x)?),
            _ => unreachable!("checked above"),
        })
    }

    /// `x^-1 w x`.
    pub fn conjugate(&self, w: &GroupValue, x: &GroupValue) -> Result<GroupValue> {
        self.check(w)?;
        self.check(x)?;
        Ok(match (self, w, x) {
            (Platform::Metacyclic(grp), GroupValue::Meta(w), GroupValue::Meta(x)) => {
                GroupValue::Meta(grp.conjugate(w, x)?)
            }
            (Platform::Heisenberg(grp), GroupValue::Mm(w), GroupValue::Mm(x)) => {
                GroupValue::Mm(grp.conjugate(w, x)?)
            }
            (Platform::Tree(grp), GroupValue::Tree(w), GroupValue::Tree(x)) => {
                GroupValue::Tree(grp.conjugate(w, x)?)
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn is_central(&self, g: &GroupValue) -> Result<bool> {
        self.check(g)?;
        match (self, g) {
            (Platform::Metacyclic(grp), GroupValue::Meta(x)) => grp.is_central(x),
            (Platform::Heisenberg(grp), GroupValue::Mm(x)) => grp.is_central(x),
            (Platform::Tree(grp), GroupValue::Tree(x)) => grp.is_central(x),
            _ => unreachable!("checked above"),
        }
    }

    /// Whether `x` lies in the commuting subgroup privates are drawn from.
    pub fn in_private_subgroup(&self, x: &GroupValue) -> bool {
        if !self.owns(x) {
            return false;
        }
        match x {
            GroupValue::Meta(e) => e.i().is_zero(),
            GroupValue::Mm(e) => e.i().is_zero() && e.k().is_zero(),
            GroupValue::Tree(e) => {
                let level = self.private_level().expect("tree platform");
                e.active_levels().iter().all(|&l| l == level)
            }
        }
    }

    /// A uniformly random element of the private subgroup: `b^v` with
    /// `1 <= v < p^n`, or a uniform portrait supported on level `k-2`.
    pub fn sample_private<R: RngCore>(&self, rng: &mut R) -> GroupValue {
        match self {
            Platform::Metacyclic(g) => {
                let v = random_below(rng, &(g.params().pn() - 1u32)) + 1u32;
                GroupValue::Meta(g.element(0u32, v))
            }
            Platform::Heisenberg(g) => {
                let v = random_below(rng, &(g.params().pn() - 1u32)) + 1u32;
                GroupValue::Mm(g.element(0u32, v, 0u32))
            }
            Platform::Tree(g) => {
                let level = g.params().k() - 2;
                let mut active = Vec::new();
                let width = 1usize << level;
                let mut word = 0u64;
                for q in 0..width {
                    if q % 64 == 0 {
                        word = rng.next_u64();
                    }
                    if (word >> (q % 64)) & 1 == 1 {
                        active.push((level, q));
                    }
                }
                GroupValue::Tree(Portrait::from_active(g.params(), &active).expect("level in range"))
            }
        }
    }

    /// Parses a canonical element string belonging to this platform.
    pub fn parse_value(&self, s: &str) -> Result<GroupValue> {
        let v: GroupValue = s.parse()?;
        self.check(&v)?;
        Ok(v)
    }

    /// The platform an element string was produced under.
    pub fn of_value(v: &GroupValue) -> Platform {
        match v {
            GroupValue::Meta(x) => {
                let p = x.params();
                Platform::metacyclic(p.p().clone(), p.m(), p.n()).expect("valid element")
            }
            GroupValue::Mm(x) => {
                let p = x.params();
                Platform::heisenberg(p.p().clone(), p.m(), p.n()).expect("valid element")
            }
            GroupValue::Tree(x) => {
                Platform::Tree(SylowTree::new(x.params(), Variant::Symmetric))
            }
        }
    }
}

/// An element of one of the platforms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupValue {
    Meta(MetaElement),
    Mm(MMElement),
    Tree(Portrait),
}

impl GroupValue {
    pub fn kind(&self) -> PlatformKind {
        match self {
            GroupValue::Meta(_) => PlatformKind::Metacyclic,
            GroupValue::Mm(_) => PlatformKind::Heisenberg,
            GroupValue::Tree(_) => PlatformKind::Tree,
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            GroupValue::Meta(x) => x.is_identity(),
            GroupValue::Mm(x) => x.is_identity(),
            GroupValue::Tree(x) => x.is_identity(),
        }
    }
}

impl fmt::Display for GroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupValue::Meta(x) => x.fmt(f),
            GroupValue::Mm(x) => x.fmt(f),
            GroupValue::Tree(x) => x.fmt(f),
        }
    }
}

impl std::str::FromStr for GroupValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':').map(|(tag, _)| tag) {
            Some("mc") => Ok(GroupValue::Meta(s.parse()?)),
            Some("mm") => Ok(GroupValue::Mm(s.parse()?)),
            Some("tg") => Ok(GroupValue::Tree(s.parse()?)),
            _ => Err(Error::Parse(format!("{s:?} has no platform tag"))),
        }
    }
}

/// Admissible protocol base: non-central, and under the strict profile on
/// the Miller-Moreno platforms a non-identity element of `<a>`.
pub fn validate_base(w: &GroupValue, strict: bool) -> bool {
    let platform = Platform::of_value(w);
    if platform.is_central(w).unwrap_or(true) {
        return false;
    }
    if !strict {
        return true;
    }
    match w {
        GroupValue::Meta(x) => x.j().is_zero() && !x.is_identity(),
        GroupValue::Mm(x) => x.j().is_zero() && x.k().is_zero() && !x.is_identity(),
        GroupValue::Tree(_) => true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
        }
    }
}

/// One party's state in a key exchange.
#[derive(Debug, Clone)]
pub struct Session {
    role: Role,
    platform: Platform,
    base: GroupValue,
    private_elt: Option<GroupValue>,
    peer_public: Option<GroupValue>,
    shared_key: Option<Vec<u8>>,
    rng_seed: u64,
    rng: ChaCha20Rng,
}

impl Session {
    /// Fails with `BaseNotSet` when `base` is not an admissible base on
    /// `platform`.
    pub fn new(role: Role, platform: Platform, base: GroupValue, rng_seed: u64) -> Result<Self> {
        if !platform.owns(&base) || !validate_base(&base, true) {
            return Err(Error::BaseNotSet);
        }
        Ok(Session {
            role,
            platform,
            base,
            private_elt: None,
            peer_public: None,
            shared_key: None,
            rng_seed,
            rng: ChaCha20Rng::seed_from_u64(rng_seed),
        })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn platform(&self) -> &Platform {
        &self.platform
    }

    pub fn base(&self) -> &GroupValue {
        &self.base
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn private_elt(&self) -> Option<&GroupValue> {
        self.private_elt.as_ref()
    }

    pub fn peer_public(&self) -> Option<&GroupValue> {
        self.peer_public.as_ref()
    }

    pub fn shared_key(&self) -> Option<&[u8]> {
        self.shared_key.as_deref()
    }

    /// Draws the private element from the session's seeded generator.
    pub fn gen_private(&mut self) -> GroupValue {
        let x = self.platform.sample_private(&mut self.rng);
        self.private_elt = Some(x.clone());
        x
    }

    /// Installs a chosen private element; it must lie in the commuting
    /// subgroup.
    pub fn set_private(&mut self, x: GroupValue) -> Result<()> {
        if !self.platform.in_private_subgroup(&x) {
            return Err(Error::InvalidParams(format!(
                "{x} is outside the private subgroup"
            )));
        }
        self.private_elt = Some(x);
        Ok(())
    }

    /// `w^x = x^-1 w x`.
    pub fn public(&self) -> Result<GroupValue> {
        let x = self.private_elt.as_ref().ok_or(Error::BaseNotSet)?;
        self.platform.conjugate(&self.base, x)
    }

    /// Conjugates the peer's public value by the private element and
    /// returns the canonical text of the result.
    pub fn derive(&mut self, peer_public: &GroupValue) -> Result<Vec<u8>> {
        let x = self.private_elt.as_ref().ok_or(Error::BaseNotSet)?;
        if !self.platform.owns(peer_public) {
            return Err(Error::PlatformMismatch);
        }
        let key = self.platform.conjugate(peer_public, x)?.to_string().into_bytes();
        self.peer_public = Some(peer_public.clone());
        self.shared_key = Some(key.clone());
        Ok(key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsMessage {
    #[serde(rename = "type")]
    kind: String,
    platform: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    p: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    m: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    n: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    k: Option<String>,
    w: String,
    rng: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PublicMessage {
    #[serde(rename = "type")]
    kind: String,
    from: String,
    value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DebugMessage {
    #[serde(rename = "type")]
    kind: String,
    key: String,
}

/// The public record of one exchange: parameters and base, then Alice's and
/// Bob's public values, optionally followed by the honest key for grading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub platform: Platform,
    pub base: GroupValue,
    pub alice_public: GroupValue,
    pub bob_public: GroupValue,
    pub debug_key: Option<String>,
}

impl Transcript {
    fn params_message(&self) -> ParamsMessage {
        let (p, m, n, k) = match &self.platform {
            Platform::Metacyclic(g) => {
                let pr = g.params();
                (Some(pr.p().to_string()), Some(pr.m().to_string()), Some(pr.n().to_string()), None)
            }
            Platform::Heisenberg(g) => {
                let pr = g.params();
                (Some(pr.p().to_string()), Some(pr.m().to_string()), Some(pr.n().to_string()), None)
            }
            Platform::Tree(g) => (None, None, None, Some(g.params().k().to_string())),
        };
        ParamsMessage {
            kind: "params".into(),
            platform: self.platform.kind().name().into(),
            p,
            m,
            n,
            k,
            w: self.base.to_string(),
            rng: RNG_ID.into(),
        }
    }

    /// Newline-delimited JSON, one compact object per line.
    pub fn to_ndjson(&self) -> String {
        let mut lines = vec![serde_json::to_string(&self.params_message()).unwrap()];
        for (from, value) in [(Role::Alice, &self.alice_public), (Role::Bob, &self.bob_public)] {
            let msg = PublicMessage {
                kind: "public".into(),
                from: from.name().into(),
                value: value.to_string(),
            };
            lines.push(serde_json::to_string(&msg).unwrap());
        }
        if let Some(key) = &self.debug_key {
            let msg = DebugMessage {
                kind: "debug".into(),
                key: key.clone(),
            };
            lines.push(serde_json::to_string(&msg).unwrap());
        }
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// Parses a transcript; every line must be byte-identical to the
    /// canonical encoding of what it decodes to.
    pub fn parse(text: &str) -> Result<Transcript> {
        let lines: Vec<&str> = text.lines().collect();
        if !(3..=4).contains(&lines.len()) {
            return Err(Error::Parse(format!(
                "transcript has {} lines, expected 3 or 4",
                lines.len()
            )));
        }
        let params: ParamsMessage = decode(lines[0])?;
        if params.kind != "params" || params.rng != RNG_ID {
            return Err(Error::Parse("first line is not a params message".into()));
        }
        let number = |field: &Option<String>, name: &str| -> Result<u32> {
            let text = field
                .as_deref()
                .ok_or_else(|| Error::Parse(format!("missing field {name:?}")))?;
            let v = parse_decimal(text)?;
            u32::try_from(v).map_err(|_| Error::Parse(format!("{name} out of range")))
        };
        let prime = |field: &Option<String>| -> Result<BigUint> {
            let text = field.as_deref().ok_or_else(|| Error::Parse("missing field \"p\"".into()))?;
            Ok(parse_decimal(text)?)
        };
        let platform = match params.platform.parse::<PlatformKind>()? {
            PlatformKind::Metacyclic => Platform::metacyclic(
                prime(&params.p)?,
                number(&params.m, "m")?,
                number(&params.n, "n")?,
            )?,
            PlatformKind::Heisenberg => Platform::heisenberg(
                prime(&params.p)?,
                number(&params.m, "m")?,
                number(&params.n, "n")?,
            )?,
            PlatformKind::Tree => Platform::tree(number(&params.k, "k")?)?,
        };
        let base = platform.parse_value(&params.w)?;
        let mut publics = Vec::new();
        for (line, from) in lines[1..3].iter().zip([Role::Alice, Role::Bob]) {
            let msg: PublicMessage = decode(line)?;
            if msg.kind != "public" || msg.from != from.name() {
                return Err(Error::Parse(format!("expected public value from {}", from.name())));
            }
            publics.push(platform.parse_value(&msg.value)?);
        }
        let debug_key = match lines.get(3) {
            Some(line) => {
                let msg: DebugMessage = decode(line)?;
                if msg.kind != "debug" {
                    return Err(Error::Parse("fourth line is not a debug message".into()));
                }
                Some(msg.key)
            }
            None => None,
        };
        let bob_public = publics.pop().unwrap();
        let alice_public = publics.pop().unwrap();
        let transcript = Transcript {
            platform,
            base,
            alice_public,
            bob_public,
            debug_key,
        };
        if transcript.to_ndjson() != text {
            return Err(Error::Parse("transcript is not in canonical form".into()));
        }
        Ok(transcript)
    }
}

fn decode<T: serde::de::DeserializeOwned>(line: &str) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub transcript: Transcript,
    pub alice_key: Vec<u8>,
    pub bob_key: Vec<u8>,
}

impl DemoOutcome {
    pub fn keys_match(&self) -> bool {
        self.alice_key == self.bob_key
    }
}

/// Runs a full exchange on the platform's default base.
pub fn run_demo(platform: &Platform, seed_a: u64, seed_b: u64) -> Result<DemoOutcome> {
    run_demo_with_base(platform, &platform.default_base(), seed_a, seed_b)
}

pub fn run_demo_with_base(
    platform: &Platform,
    base: &GroupValue,
    seed_a: u64,
    seed_b: u64,
) -> Result<DemoOutcome> {
    let mut alice = Session::new(Role::Alice, platform.clone(), base.clone(), seed_a)?;
    let mut bob = Session::new(Role::Bob, platform.clone(), base.clone(), seed_b)?;
    let x = alice.gen_private();
    let y = bob.gen_private();
    debug_assert_eq!(platform.multiply(&x, &y)?, platform.multiply(&y, &x)?);
    let alice_public = alice.public()?;
    let bob_public = bob.public()?;
    let alice_key = alice.derive(&bob_public)?;
    let bob_key = bob.derive(&alice_public)?;
    Ok(DemoOutcome {
        transcript: Transcript {
            platform: platform.clone(),
            base: base.clone(),
            alice_public,
            bob_public,
            debug_key: None,
        },
        alice_key,
        bob_key,
    })
}

/// Number of distinct keys the exchange can produce from `w`: the size of
/// its orbit under the private subgroup.
pub fn effective_key_count(platform: &Platform, w: &GroupValue) -> Result<BigUint> {
    match (platform, w) {
        (Platform::Metacyclic(g), GroupValue::Meta(x)) => Ok(BigUint::from(
            g.conjugacy_class(x, u64::MAX)?.len() as u64,
        )),
        (Platform::Heisenberg(g), GroupValue::Mm(_)) => {
            // conjugation by b^v shifts the c-exponent by i v
            if platform.is_central(w)? {
                Ok(BigUint::one())
            } else {
                Ok(g.params().p().clone())
            }
        }
        (Platform::Tree(_), GroupValue::Tree(_)) => {
            let level = platform.private_level().unwrap();
            let params = match platform {
                Platform::Tree(g) => g.params(),
                _ => unreachable!(),
            };
            let mut keys = std::collections::HashSet::new();
            for x in crate::treegroup::level_subgroup_elements(level, params, false)? {
                keys.insert(platform.conjugate(w, &GroupValue::Tree(x))?);
            }
            Ok(BigUint::from(keys.len() as u64))
        }
        _ => Err(Error::PlatformMismatch),
    }
}
