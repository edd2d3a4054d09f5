//! The involutions ξ, η of the kernel curve and the order of δ = η∘ξ.

use crate::error::{FqwError, Result};
use crate::par::{self, Exec};
use crate::poly::Poly;
use crate::stepset::{canonicalize, parse_stepset, ModelClass, WeightedStepSet};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BirationalPoint {
    pub x: BigRational,
    pub y: BigRational,
}

impl BirationalPoint {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        BirationalPoint { x, y }
    }
}

/// ā, c̄ (rows j = ±1 as polynomials in x) and their transposed
/// counterparts in y. Both ξ and η are independent of z.
#[derive(Clone, Debug)]
pub struct GroupMaps {
    a_bar: Poly,
    c_bar: Poly,
    a_tilde: Poly,
    c_tilde: Poly,
}

fn weighted_row(ws: &WeightedStepSet, fixed: i8, by_j: bool) -> Poly {
    let mut c = vec![BigRational::zero(); 3];
    for (&(i, j), w) in ws.iter() {
        let (free, sel) = if by_j { (i, j) } else { (j, i) };
        if sel == fixed {
            c[(free + 1) as usize] += w;
        }
    }
    Poly::new(c)
}

impl GroupMaps {
    pub fn new(ws: &WeightedStepSet) -> Self {
        GroupMaps {
            a_bar: weighted_row(ws, 1, true),
            c_bar: weighted_row(ws, -1, true),
            a_tilde: weighted_row(ws, 1, false),
            c_tilde: weighted_row(ws, -1, false),
        }
    }

    pub fn xi(&self, p: &BirationalPoint) -> Result<BirationalPoint> {
        let den = self.a_bar.eval(&p.x) * &p.y;
        if den.is_zero() {
            return Err(FqwError::Domain(format!("xi undefined at ({}, {})", p.x, p.y)));
        }
        Ok(BirationalPoint::new(p.x.clone(), self.c_bar.eval(&p.x) / den))
    }

    pub fn eta(&self, p: &BirationalPoint) -> Result<BirationalPoint> {
        let den = self.a_tilde.eval(&p.y) * &p.x;
        if den.is_zero() {
            return Err(FqwError::Domain(format!("eta undefined at ({}, {})", p.x, p.y)));
        }
        Ok(BirationalPoint::new(self.c_tilde.eval(&p.y) / den, p.y.clone()))
    }

    pub fn delta(&self, p: &BirationalPoint) -> Result<BirationalPoint> {
        self.eta(&self.xi(p)?)
    }
}

pub fn apply_xi(p: &BirationalPoint, ws: &WeightedStepSet) -> Result<BirationalPoint> {
    GroupMaps::new(ws).xi(p)
}

pub fn apply_eta(p: &BirationalPoint, ws: &WeightedStepSet) -> Result<BirationalPoint> {
    GroupMaps::new(ws).eta(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupOrder {
    /// Order 2n of the group, i.e. δⁿ = I.
    Finite(usize),
    UnboundedBeyond(usize),
}

impl GroupOrder {
    pub fn finite(self) -> Option<usize> {
        match self {
            GroupOrder::Finite(n) => Some(n),
            GroupOrder::UnboundedBeyond(_) => None,
        }
    }
}

impl fmt::Display for GroupOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupOrder::Finite(n) => write!(f, "{n}"),
            GroupOrder::UnboundedBeyond(_) => write!(f, "unbounded"),
        }
    }
}

impl Serialize for GroupOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GroupOrder::Finite(n) => s.serialize_u64(*n as u64),
            GroupOrder::UnboundedBeyond(_) => s.serialize_str("unbounded"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupOrderReport {
    pub order: GroupOrder,
    pub witness: Vec<BirationalPoint>,
    pub cap: usize,
}

fn small_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let n: i64 = rng.random_range(1..=40);
    let d: i64 = rng.random_range(1..=40);
    let s = if rng.random_bool(0.5) { -1 } else { 1 };
    BigRational::new(BigInt::from(s * n), BigInt::from(d))
}

enum Orbit {
    Period(usize),
    Escapes,
    Invalid,
}

fn orbit(maps: &GroupMaps, p0: &BirationalPoint, cap: usize) -> Orbit {
    let mut p = p0.clone();
    for n in 1..=cap {
        p = match maps.delta(&p) {
            Ok(q) if !q.x.is_zero() && !q.y.is_zero() => q,
            _ => return Orbit::Invalid,
        };
        if &p == p0 {
            return Orbit::Period(n);
        }
    }
    Orbit::Escapes
}

/// Order of the group generated by ξ and η, found by iterating δ exactly on
/// `trials` random rational points. Each point (x, y) lies on the kernel
/// curve for z = 1/S(x, y), so the points also sample distinct z values.
pub fn group_order(ws: &WeightedStepSet, cap: usize, trials: usize, seed: u64) -> Result<GroupOrderReport> {
    if cap == 0 || trials == 0 {
        return Err(FqwError::Domain("cap and trials must be positive".into()));
    }
    let maps = GroupMaps::new(ws);
    let mut witness = Vec::new();
    let mut n_all = 1usize;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64 + 1);
        let mut found = None;
        for _ in 0..200 {
            let p = BirationalPoint::new(small_rational(&mut rng), small_rational(&mut rng));
            match orbit(&maps, &p, cap) {
                Orbit::Period(n) => {
                    found = Some((p, Some(n)));
                    break;
                }
                Orbit::Escapes => {
                    found = Some((p, None));
                    break;
                }
                Orbit::Invalid => continue,
            }
        }
        let Some((p, period)) = found else {
            return Err(FqwError::Domain(format!("no valid sample point for {ws}")));
        };
        witness.push(p);
        match period {
            Some(n) => n_all = n_all.lcm(&n),
            None => {
                return Ok(GroupOrderReport {
                    order: GroupOrder::UnboundedBeyond(cap),
                    witness,
                    cap,
                })
            }
        }
    }
    let order = if n_all <= cap {
        GroupOrder::Finite(2 * n_all)
    } else {
        GroupOrder::UnboundedBeyond(cap)
    };
    Ok(GroupOrderReport { order, witness, cap })
}

pub const DEFAULT_CAP: usize = 30;
pub const DEFAULT_TRIALS: usize = 5;

/// Group order of every model.
pub fn census_group_orders(models: &[ModelClass], cap: usize, seed: u64, exec: Exec) -> Result<Vec<GroupOrder>> {
    par::map(exec, models, |m| {
        group_order(&m.representative, cap, DEFAULT_TRIALS, seed).map(|r| r.order)
    })
    .into_iter()
    .collect()
}

/// Histogram keyed by "4", "6", ... and "unbounded".
pub fn census_group_histogram(models: &[ModelClass], cap: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
    let mut h = BTreeMap::new();
    for o in census_group_orders(models, cap, seed, Exec::default())? {
        *h.entry(o.to_string()).or_insert(0) += 1;
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nature {
    HolonomicNonalgebraic,
    Algebraic,
    Unclassified,
}

#[derive(Deserialize)]
struct AlgebraicTable {
    models: Vec<AlgebraicEntry>,
}

#[derive(Deserialize)]
struct AlgebraicEntry {
    #[allow(dead_code)]
    name: String,
    steps: String,
}

const ALGEBRAIC_TABLE: &str = include_str!("../data/algebraic_models.json");

/// Canonical forms of the algebraic models listed in the shipped table.
pub fn algebraic_table() -> Vec<WeightedStepSet> {
    let t: AlgebraicTable = serde_json::from_str(ALGEBRAIC_TABLE).expect("shipped table parses");
    t.models
        .iter()
        .map(|e| canonicalize(&parse_stepset(&e.steps).expect("shipped table steps parse")))
        .collect()
}

pub fn nature_report(ws: &WeightedStepSet, report: &GroupOrderReport) -> Nature {
    match report.order {
        GroupOrder::UnboundedBeyond(_) => Nature::Unclassified,
        GroupOrder::Finite(4) => Nature::HolonomicNonalgebraic,
        GroupOrder::Finite(_) => {
            let c = canonicalize(ws);
            if algebraic_table().contains(&c) {
                Nature::Algebraic
            } else {
                Nature::HolonomicNonalgebraic
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use crate::stepset::{enumerate_models, ALL_STEPS};

    #[test]
    fn uniform_maps_invert_coordinates() {
        let ws = WeightedStepSet::counting(&ALL_STEPS).unwrap();
        let p = BirationalPoint::new(rat(2, 3), rat(-5, 7));
        assert_eq!(apply_xi(&p, &ws).unwrap(), BirationalPoint::new(rat(2, 3), rat(-7, 5)));
        assert_eq!(apply_eta(&p, &ws).unwrap(), BirationalPoint::new(rat(3, 2), rat(-5, 7)));
    }

    #[test]
    fn known_orders() {
        let cases = [("N,E,S,W", 4), ("E,W,NE,SW", 8), ("W,S,NE", 6), ("E,W,NW,SE", 8)];
        for (s, o) in cases {
            let ws = parse_stepset(s).unwrap();
            let r = group_order(&ws, 30, 5, 7).unwrap();
            assert_eq!(r.order, GroupOrder::Finite(o), "{s}");
        }
        let ws = WeightedStepSet::counting(&ALL_STEPS).unwrap();
        assert_eq!(group_order(&ws, 30, 5, 1).unwrap().order, GroupOrder::Finite(4));
    }

    #[test]
    fn algebraic_table_has_four_census_models() {
        let t = algebraic_table();
        assert_eq!(t.len(), 4);
        let census: Vec<_> = enumerate_models().into_iter().map(|m| m.representative).collect();
        assert!(t.iter().all(|w| census.contains(w)));
    }

    #[test]
    fn natures() {
        let g = parse_stepset("E,W,NE,SW").unwrap();
        let r = group_order(&g, 30, 3, 1).unwrap();
        assert_eq!(nature_report(&g, &r), Nature::Algebraic);
        let t = parse_stepset("E,NW,S").unwrap();
        let r = group_order(&t, 30, 3, 1).unwrap();
        assert_eq!(r.order, GroupOrder::Finite(6));
        assert_eq!(nature_report(&t, &r), Nature::HolonomicNonalgebraic);
        let s = parse_stepset("N,E,S,W").unwrap();
        let r = group_order(&s, 30, 3, 1).unwrap();
        assert_eq!(nature_report(&s, &r), Nature::HolonomicNonalgebraic);
        let inf = parse_stepset("N,W,SE,NE").unwrap();
        let r = group_order(&inf, 30, 3, 1).unwrap();
        assert_eq!(nature_report(&inf, &r), Nature::Unclassified);
    }
}
