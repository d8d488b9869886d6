//! Runnable checks of the structural facts the key exchange relies on.
//! Each check enumerates the relevant groups and reports the measured value
//! beside the expected one.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::arith::{mult_order, Natural, Residue};
use crate::error::{Error, Result};
use crate::group::{self, GroupLaw};
use crate::heisenberg::Heisenberg;
use crate::metacyclic::Metacyclic;
use crate::treegroup::{
    derived_subgroup, group_order, level_subgroup_elements, minimal_generating_size,
    minimal_generating_size_brute, SylowTree, TreeParams, Variant, BRUTE_FORCE_LIMIT,
};

pub const DEFAULT_MAX_ORDER: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimResult {
    pub claim_id: String,
    pub paper_value: String,
    pub measured_value: String,
    pub pass: bool,
    pub params: String,
    pub elapsed: Duration,
}

#[derive(Serialize)]
struct ClaimJson<'a> {
    claim_id: &'a str,
    params: &'a str,
    paper_value: &'a str,
    measured_value: &'a str,
    pass: bool,
    elapsed_ms: f64,
}

impl ClaimResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ClaimJson {
            claim_id: &self.claim_id,
            params: &self.params,
            paper_value: &self.paper_value,
            measured_value: &self.measured_value,
            pass: self.pass,
            elapsed_ms: self.elapsed.as_secs_f64() * 1e3,
        })
        .expect("plain struct")
    }
}

/// Builds a result comparing expected and measured text for equality.
fn claim(
    id: &str,
    params: String,
    start: Instant,
    outcome: Result<(String, String)>,
) -> ClaimResult {
    let (paper_value, measured_value, pass) = match outcome {
        Ok((expected, measured)) => {
            let pass = expected == measured;
            (expected, measured, pass)
        }
        Err(e) => ("-".to_string(), format!("error: {e}"), false),
    };
    ClaimResult {
        claim_id: id.to_string(),
        paper_value,
        measured_value,
        pass,
        params,
        elapsed: start.elapsed(),
    }
}

fn set_text(values: impl IntoIterator<Item = u64>) -> String {
    let set: BTreeSet<u64> = values.into_iter().collect();
    let items: Vec<String> = set.iter().map(u64::to_string).collect();
    format!("{{{}}}", items.join(","))
}

/// `(p, m, n)` from `{3,5,7} x {2,3} x {1,2}` with `p^(m+n) <= max_order`.
pub fn metacyclic_grid(max_order: u64) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for p in [3u32, 5, 7] {
        for m in [2u32, 3] {
            for n in [1u32, 2] {
                if (p as u64).pow(m + n) <= max_order {
                    out.push((p, m, n));
                }
            }
        }
    }
    out
}

/// `(p, m, n)` from `{3,5,7} x {1,2} x {1,2}` with `p^(m+n+1) <= max_order`.
pub fn heisenberg_grid(max_order: u64) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for p in [3u32, 5, 7] {
        for m in [1u32, 2] {
            for n in [1u32, 2] {
                if (p as u64).pow(m + n + 1) <= max_order {
                    out.push((p, m, n));
                }
            }
        }
    }
    out
}

fn mc_label(p: u32, m: u32, n: u32) -> String {
    format!("p={p},m={m},n={n}")
}

/// Class sizes over the whole group: central elements have singleton
/// classes, every other class has exactly `p` elements.
pub fn vf_theorem1(grid: &[(u32, u32, u32)]) -> Vec<ClaimResult> {
    grid.iter()
        .map(|&(p, m, n)| {
            let start = Instant::now();
            let outcome = (|| {
                let g = Metacyclic::new(p, m, n)?;
                let order = g.order().try_into().unwrap_or(u64::MAX);
                let mut sizes = BTreeMap::<u64, u64>::new();
                let mut mismatched = 0u64;
                let mut assigned = HashSet::new();
                for w in g.elements(order)? {
                    if assigned.contains(&w) {
                        continue;
                    }
                    let class = group::conjugation_orbit(&g, &w, order)?;
                    let central = g.is_central(&w)?;
                    if central != (class.len() == 1) {
                        mismatched += 1;
                    }
                    *sizes.entry(class.len() as u64).or_default() += class.len() as u64;
                    assigned.extend(class);
                }
                let expected = format!("{}; central-singleton mismatches=0", set_text([1, p as u64]));
                let measured = format!(
                    "{}; central-singleton mismatches={mismatched}",
                    set_text(sizes.keys().copied())
                );
                Ok((expected, measured))
            })();
            claim("theorem1_class_size", mc_label(p, m, n), start, outcome)
        })
        .collect()
}

/// Multiplicative order of the twist `1 + p^(m-1)` modulo `p^m`.
pub fn vf_twist_order(grid: &[(u32, u32, u32)]) -> Vec<ClaimResult> {
    grid.iter()
        .map(|&(p, m, n)| {
            let start = Instant::now();
            let outcome = (|| {
                let g = Metacyclic::new(p, m, n)?;
                let t = Residue::new(g.params().twist().clone(), g.params().pm().clone())?;
                let order = mult_order(&t, &Natural::new(g.params().pm().clone()))?;
                Ok((p.to_string(), order.to_string()))
            })();
            claim("theorem1_twist_order", mc_label(p, m, n), start, outcome)
        })
        .collect()
}

/// Orbits of the non-central elements of `<a>` under conjugation.
pub fn vf_orbit_lower_bound(grid: &[(u32, u32, u32)]) -> Vec<ClaimResult> {
    grid.iter()
        .map(|&(p, m, n)| {
            let start = Instant::now();
            let outcome = (|| {
                let g = Metacyclic::new(p, m, n)?;
                let pm: u64 = g.params().pm().try_into().unwrap();
                let mut smallest = u64::MAX;
                for i in 1..pm {
                    let w = g.element(i, 0u32);
                    if g.is_central(&w)? {
                        continue;
                    }
                    smallest = smallest.min(g.conjugacy_class(&w, pm)?.len() as u64);
                }
                Ok((format!("min={p}"), format!("min={smallest}")))
            })();
            claim("orbit_lower_bound", mc_label(p, m, n), start, outcome)
        })
        .collect()
}

/// `|Z(G)| = p^(m+n-2)`, `|G : Z(G)| = p^2` and `Z(G) = <a^p, b^p>`.
pub fn vf_center(grid: &[(u32, u32, u32)]) -> Vec<ClaimResult> {
    let mut out = Vec::new();
    for &(p, m, n) in grid {
        let start = Instant::now();
        let measured = (|| {
            let g = Metacyclic::new(p, m, n)?;
            let order: u64 = g.order().try_into().unwrap();
            let center: HashSet<_> = group::center(&g, order)?.into_iter().collect();
            let span = group::closure(
                &g,
                &[g.element(p, 0u32), g.element(0u32, p)],
            )?;
            Ok((order, center, span))
        })();
        let label = mc_label(p, m, n);
        let expected_center = (p as u64).pow(m + n - 2);
        match measured {
            Ok((order, center, span)) => {
                out.push(claim(
                    "center_order",
                    label.clone(),
                    start,
                    Ok((expected_center.to_string(), center.len().to_string())),
                ));
                out.push(claim(
                    "center_index",
                    label.clone(),
                    start,
                    Ok((((p as u64).pow(2)).to_string(), (order / center.len() as u64).to_string())),
                ));
                let same = if span == center { "equal" } else { "different" };
                out.push(claim(
                    "center_generators",
                    label,
                    start,
                    Ok(("equal".to_string(), same.to_string())),
                ));
            }
            Err(e) => out.push(claim("center_order", label, start, Err(e))),
        }
    }
    out
}

/// Class sizes of the non-metacyclic group: 1 for central elements, `p`
/// otherwise.
pub fn vf_heisenberg_classes(grid: &[(u32, u32, u32)]) -> Vec<ClaimResult> {
    grid.iter()
        .map(|&(p, m, n)| {
            let start = Instant::now();
            let outcome = (|| {
                let g = Heisenberg::new(p, m, n)?;
                let order: u64 = g.order().try_into().unwrap();
                let hist = group::class_histogram(&g, order)?;
                let center = group::center(&g, order)?.len() as u64;
                let singles = hist.get(&1).copied().unwrap_or(0);
                Ok((
                    format!("{}; singletons={center}", set_text([1, p as u64])),
                    format!("{}; singletons={singles}", set_text(hist.keys().copied())),
                ))
            })();
            claim("heisenberg_class_size", mc_label(p, m, n), start, outcome)
        })
        .collect()
}

/// The class of `a` is `{a, ac, ..., ac^(p-1)}`.
pub fn vf_heisenberg_orbit(primes: &[u32]) -> Vec<ClaimResult> {
    primes
        .iter()
        .map(|&p| {
            let start = Instant::now();
            let outcome = (|| {
                let g = Heisenberg::new(p, 1, 1)?;
                let class: HashSet<_> = g.conjugacy_class(&g.a(), g.order().try_into().unwrap())?.into_iter().collect();
                let expected: HashSet<_> = (0..p).map(|r| g.element(1u32, 0u32, r)).collect();
                let verdict = if class == expected { "{a c^r : 0 <= r < p}" } else { "other" };
                Ok((
                    format!("size={p}; {{a c^r : 0 <= r < p}}"),
                    format!("size={}; {verdict}", class.len()),
                ))
            })();
            claim("heisenberg_orbit_a", mc_label(p, 1, 1), start, outcome)
        })
        .collect()
}

fn pow2_text(exp: u64) -> String {
    format!("2^{exp}")
}

fn log2_text(size: usize) -> String {
    if size.is_power_of_two() {
        pow2_text(size.trailing_zeros() as u64)
    } else {
        size.to_string()
    }
}

/// Orders of `Syl2(S_(2^k))`, `Syl2(A_(2^k))` and of the commutator
/// subgroup of the latter, plus the minimal generating size of that
/// commutator subgroup by two methods.
pub fn vf_sylow(ks: &[u32]) -> Vec<ClaimResult> {
    let mut out = Vec::new();
    for &k in ks {
        let label = format!("k={k}");
        let leaves = 1u64 << k;
        for (variant, id, exp) in [
            (Variant::Symmetric, "sylow_s_order", leaves - 1),
            (Variant::Alternating, "sylow_a_order", leaves - 2),
        ] {
            let start = Instant::now();
            let outcome = (|| {
                let params = TreeParams::new(k)?;
                let g = SylowTree::new(params, variant);
                let n = g.elements(1 << 20)?.len();
                debug_assert_eq!(Natural::from(n as u64), group_order(variant, params));
                Ok((pow2_text(exp), log2_text(n)))
            })();
            out.push(claim(id, label.clone(), start, outcome));
        }

        let start = Instant::now();
        let derived = (|| {
            let params = TreeParams::new(k)?;
            let g = SylowTree::new(params, Variant::Alternating);
            Ok::<_, Error>((params, derived_subgroup(&g.generators(), params)?))
        })();
        match derived {
            Ok((params, derived)) => {
                out.push(claim(
                    "derived_order",
                    label.clone(),
                    start,
                    Ok((pow2_text(leaves - k as u64 - 2), log2_text(derived.len()))),
                ));
                let start = Instant::now();
                let outcome = (|| {
                    let frattini = minimal_generating_size(&derived, params)?;
                    let brute = if derived.len() <= BRUTE_FORCE_LIMIT {
                        minimal_generating_size_brute(&derived, params)?.to_string()
                    } else {
                        frattini.to_string()
                    };
                    Ok((format!("d={brute}"), format!("d={frattini}")))
                })();
                out.push(claim("derived_min_generators", label.clone(), start, outcome));
            }
            Err(e) => out.push(claim("derived_order", label.clone(), start, Err(e))),
        }
    }
    out
}

/// Level subgroups `G_k(l)` have `2^(2^l)` elements and commute
/// elementwise.
pub fn vf_commuting_growth(k: u32) -> ClaimResult {
    let start = Instant::now();
    let outcome = (|| {
        let params = TreeParams::new(k)?;
        let ambient = SylowTree::new(params, Variant::Symmetric);
        let mut expected = Vec::new();
        let mut measured = Vec::new();
        for level in 0..k {
            let elems = level_subgroup_elements(level, params, false)?;
            let mut commuting = true;
            'pairs: for (idx, x) in elems.iter().enumerate() {
                for y in &elems[idx + 1..] {
                    if !ambient.commutes(x, y)? {
                        commuting = false;
                        break 'pairs;
                    }
                }
            }
            expected.push(format!("{}:commuting", 1u64 << (1u64 << level)));
            measured.push(format!(
                "{}:{}",
                elems.len(),
                if commuting { "commuting" } else { "non-commuting" }
            ));
        }
        Ok((expected.join(","), measured.join(",")))
    })();
    claim("level_subgroup_growth", format!("k={k}"), start, outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Theorems,
    Center,
    Heisenberg,
    Sylow,
    Growth,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorems" => Ok(Suite::Theorems),
            "center" => Ok(Suite::Center),
            "heisenberg" => Ok(Suite::Heisenberg),
            "sylow" => Ok(Suite::Sylow),
            "growth" => Ok(Suite::Growth),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub max_order: u64,
    /// Adds depth 4 to the tree checks.
    pub long: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_order: DEFAULT_MAX_ORDER,
            long: false,
        }
    }
}

/// Runs a suite; results are ordered by claim id, grid order within an id.
pub fn run_suite(suite: Suite, config: VerifyConfig) -> Vec<ClaimResult> {
    let mc = metacyclic_grid(config.max_order);
    let mm = heisenberg_grid(config.max_order);
    let ks: Vec<u32> = if config.long { vec![2, 3, 4] } else { vec![2, 3] };
    let mut out = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Theorems) {
        out.extend(vf_theorem1(&mc));
        out.extend(vf_twist_order(&mc));
        out.extend(vf_orbit_lower_bound(&mc));
    }
    if want(Suite::Center) || suite == Suite::Theorems {
        out.extend(vf_center(&mc));
    }
    if want(Suite::Heisenberg) || suite == Suite::Theorems {
        out.extend(vf_heisenberg_orbit(&[3, 5, 7]));
        out.extend(vf_heisenberg_classes(&mm));
    }
    if want(Suite::Sylow) {
        out.extend(vf_sylow(&ks));
    }
    if want(Suite::Growth) || suite == Suite::Sylow {
        for &k in &ks {
            out.push(vf_commuting_growth(k));
        }
    }
    out.sort_by(|a, b| a.claim_id.cmp(&b.claim_id));
    out
}

pub fn all_pass(results: &[ClaimResult]) -> bool {
    results.iter().all(|r| r.pass)
}

/// Fixed-width table for terminals.
pub fn summary_table(results: &[ClaimResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<26} {:<16} {:<6} {:<34} measured",
        "claim", "params", "result", "expected"
    );
    for r in results {
        let _ = writeln!(
            s,
            "{:<26} {:<16} {:<6} {:<34} {}",
            r.claim_id,
            r.params,
            if r.pass { "PASS" } else { "FAIL" },
            r.paper_value,
            r.measured_value
        );
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let _ = writeln!(s, "{passed}/{} claims passed", results.len());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_filtering() {
        assert_eq!(metacyclic_grid(DEFAULT_MAX_ORDER).len(), 12);
        assert_eq!(metacyclic_grid(100), vec![(3, 2, 1), (3, 2, 2), (3, 3, 1)]);
    }

    #[test]
    fn theorem1_examples() {
        for r in vf_theorem1(&[(3, 2, 1), (5, 2, 1), (3, 2, 2)]) {
            assert!(r.pass, "{r:?}");
        }
        let r = &vf_theorem1(&[(3, 2, 1)])[0];
        assert_eq!(r.measured_value, "{1,3}; central-singleton mismatches=0");
    }

    #[test]
    fn center_examples() {
        let results = vf_center(&[(3, 2, 1), (3, 2, 2), (7, 2, 1)]);
        assert!(all_pass(&results));
        let orders: Vec<_> = results
            .iter()
            .filter(|r| r.claim_id == "center_order")
            .map(|r| r.measured_value.clone())
            .collect();
        assert_eq!(orders, ["3", "9", "7"]);
    }

    #[test]
    fn sylow_examples() {
        let results = vf_sylow(&[2, 3]);
        assert!(all_pass(&results), "{}", summary_table(&results));
        let find = |id: &str, k: &str| {
            results
                .iter()
                .find(|r| r.claim_id == id && r.params == k)
                .unwrap()
                .measured_value
                .clone()
        };
        assert_eq!(find("derived_order", "k=2"), "2^0");
        assert_eq!(find("derived_order", "k=3"), "2^3");
        assert_eq!(find("sylow_a_order", "k=3"), "2^6");
    }

    #[test]
    fn growth_examples() {
        let r = vf_commuting_growth(4);
        assert!(r.pass);
        assert_eq!(
            r.measured_value,
            "2:commuting,4:commuting,16:commuting,256:commuting"
        );
    }

    #[test]
    fn suites_parse() {
        assert_eq!("theorems".parse::<Suite>().unwrap(), Suite::Theorems);
        assert!("nosuch".parse::<Suite>().is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = VerifyConfig {
            max_order: 300,
            long: false,
        };
        let strip = |rs: Vec<ClaimResult>| -> Vec<_> {
            rs.into_iter()
                .map(|r| (r.claim_id, r.params, r.paper_value, r.measured_value, r.pass))
                .collect()
        };
        assert_eq!(strip(run_suite(Suite::All, cfg)), strip(run_suite(Suite::All, cfg)));
        let ids: Vec<_> = run_suite(Suite::All, cfg).into_iter().map(|r| r.claim_id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }
}
