//! Finite abelian group descriptors, element encoding, dense functions and
//! partial maps.
//!
//! Elements are encoded as indices `0..|G|`: little-endian base-`p` digits for
//! vector spaces, residues for cyclic groups, mixed radix (first factor least
//! significant) for products. The canonical element order is index order; all
//! tie-breaks elsewhere in the crate resolve to the smallest index.

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cap for dense enumeration and dense-function tables.
pub const DENSE_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GroupSpec {
    Vector {
        p: u64,
        n: u32,
    },
    Cyclic {
        #[serde(rename = "N")]
        modulus: u64,
    },
    Product {
        factors: Vec<GroupSpec>,
    },
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl GroupSpec {
    pub fn vector(p: u64, n: u32) -> Result<Self> {
        let g = GroupSpec::Vector { p, n };
        g.validate()?;
        Ok(g)
    }

    /// `F_2^n`, the most common case.
    pub fn f2(n: u32) -> Self {
        GroupSpec::Vector { p: 2, n }
    }

    pub fn cyclic(modulus: u64) -> Result<Self> {
        let g = GroupSpec::Cyclic { modulus };
        g.validate()?;
        Ok(g)
    }

    pub fn product(factors: Vec<GroupSpec>) -> Result<Self> {
        let g = GroupSpec::Product { factors };
        g.validate()?;
        Ok(g)
    }

    /// Validates primality, ranges and that the cardinality fits a `u64`.
    /// Deserialized specs must be validated before use.
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupSpec::Vector { p, n } => {
                if !is_prime(*p) {
                    return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
                }
                let mut card: u64 = 1;
                for _ in 0..*n {
                    card = card.checked_mul(*p).ok_or(Error::CardinalityOverflow)?;
                }
                Ok(())
            }
            GroupSpec::Cyclic { modulus } => {
                if *modulus == 0 {
                    return Err(Error::InvalidParameter("cyclic modulus must be >= 1".into()));
                }
                Ok(())
            }
            GroupSpec::Product { factors } => {
                let mut card: u64 = 1;
                for f in factors {
                    f.validate()?;
                    card = card
                        .checked_mul(f.cardinality())
                        .ok_or(Error::CardinalityOverflow)?;
                }
                Ok(())
            }
        }
    }

    pub fn cardinality(&self) -> u64 {
        match self {
            GroupSpec::Vector { p, n } => p.pow(*n),
            GroupSpec::Cyclic { modulus } => *modulus,
            GroupSpec::Product { factors } => factors.iter().map(|f| f.cardinality()).product(),
        }
    }

    /// Radix sizes, least significant first. A vector space contributes `n`
    /// axes of size `p`, a cyclic group one axis, a product the concatenation
    /// of its factors' axes.
    pub fn axes(&self) -> Vec<u64> {
        match self {
            GroupSpec::Vector { p, n } => vec![*p; *n as usize],
            GroupSpec::Cyclic { modulus } => vec![*modulus],
            GroupSpec::Product { factors } => factors.iter().flat_map(|f| f.axes()).collect(),
        }
    }

    /// `Some(n)` when the group is `F_2^n`, enabling XOR arithmetic.
    pub fn as_f2(&self) -> Option<u32> {
        match self {
            GroupSpec::Vector { p: 2, n } => Some(*n),
            _ => None,
        }
    }

    pub fn digits(&self, index: u64) -> Vec<u64> {
        let mut rest = index;
        self.axes()
            .iter()
            .map(|&a| {
                let d = rest % a;
                rest /= a;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u64]) -> u64 {
        let mut index = 0u64;
        let mut radix = 1u64;
        for (&d, &a) in digits.iter().zip(self.axes().iter()) {
            index += d * radix;
            radix *= a;
        }
        index
    }

    pub fn add_index(&self, i: u64, j: u64) -> u64 {
        match self {
            GroupSpec::Vector { p: 2, .. } => i ^ j,
            GroupSpec::Cyclic { modulus } => {
                let s = i + j;
                if s >= *modulus {
                    s - *modulus
                } else {
                    s
                }
            }
            _ => {
                let mut index = 0u64;
                let mut radix = 1u64;
                let (mut ri, mut rj) = (i, j);
                for a in self.axes() {
                    let s = (ri % a + rj % a) % a;
                    index += s * radix;
                    radix *= a;
                    ri /= a;
                    rj /= a;
                }
                index
            }
        }
    }

    pub fn neg_index(&self, i: u64) -> u64 {
        match self {
            GroupSpec::Vector { p: 2, .. } => i,
            GroupSpec::Cyclic { modulus } => {
                if i == 0 {
                    0
                } else {
                    *modulus - i
                }
            }
            _ => {
                let mut index = 0u64;
                let mut radix = 1u64;
                let mut ri = i;
                for a in self.axes() {
                    let d = ri % a;
                    let nd = if d == 0 { 0 } else { a - d };
                    index += nd * radix;
                    radix *= a;
                    ri /= a;
                }
                index
            }
        }
    }

    pub fn sub_index(&self, i: u64, j: u64) -> u64 {
        self.add_index(i, self.neg_index(j))
    }

    /// Integer scalar multiple `k * x`, per-axis modular arithmetic.
    pub fn scale_index(&self, i: u64, k: i64) -> u64 {
        let mut index = 0u64;
        let mut radix = 1u64;
        let mut ri = i;
        for a in self.axes() {
            let d = (ri % a) as i128;
            let s = (d * k as i128).rem_euclid(a as i128) as u64;
            index += s * radix;
            radix *= a;
            ri /= a;
        }
        index
    }

    pub fn check_index(&self, index: u64) -> Result<()> {
        let order = self.cardinality();
        if index >= order {
            return Err(Error::IndexOutOfRange { index, order });
        }
        Ok(())
    }

    pub fn check_dense_cap(&self) -> Result<()> {
        let cardinality = self.cardinality();
        if cardinality > DENSE_CAP {
            return Err(Error::CardinalityCap {
                cardinality,
                cap: DENSE_CAP,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> GroupElem {
        GroupElem {
            group: self.clone(),
            index: 0,
        }
    }

    pub fn elem(&self, index: u64) -> Result<GroupElem> {
        self.check_index(index)?;
        Ok(GroupElem {
            group: self.clone(),
            index,
        })
    }
}

impl std::fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupSpec::Vector { p, n } => write!(f, "F_{p}^{n}"),
            GroupSpec::Cyclic { modulus } => write!(f, "Z/{modulus}Z"),
            GroupSpec::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(|g| g.to_string()).collect();
                write!(f, "({})", parts.join(" x "))
            }
        }
    }
}

/// Enumerates the group in canonical index order.
pub fn enumerate(group: &GroupSpec) -> Result<Vec<GroupElem>> {
    group.check_dense_cap()?;
    Ok((0..group.cardinality())
        .map(|index| GroupElem {
            group: group.clone(),
            index,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElem {
    group: GroupSpec,
    index: u64,
}

impl GroupElem {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn digits(&self) -> Vec<u64> {
        self.group.digits(self.index)
    }

    pub fn add(&self, other: &GroupElem) -> Result<GroupElem> {
        if self.group != other.group {
            return Err(Error::GroupMismatch(
                self.group.to_string(),
                other.group.to_string(),
            ));
        }
        Ok(GroupElem {
            group: self.group.clone(),
            index: self.group.add_index(self.index, other.index),
        })
    }

    pub fn neg(&self) -> GroupElem {
        GroupElem {
            group: self.group.clone(),
            index: self.group.neg_index(self.index),
        }
    }

    pub fn sub(&self, other: &GroupElem) -> Result<GroupElem> {
        self.add(&other.neg())
    }
}

/// An explicit subset of a group, kept sorted by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSet {
    group: GroupSpec,
    indices: Vec<u64>,
}

impl GroupSet {
    pub fn new(group: GroupSpec, mut indices: Vec<u64>) -> Result<Self> {
        for &i in &indices {
            group.check_index(i)?;
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(GroupSet { group, indices })
    }

    pub fn empty(group: GroupSpec) -> Self {
        GroupSet {
            group,
            indices: Vec::new(),
        }
    }

    pub fn full(group: GroupSpec) -> Result<Self> {
        group.check_dense_cap()?;
        let indices = (0..group.cardinality()).collect();
        Ok(GroupSet { group, indices })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: u64) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn neg(&self) -> GroupSet {
        let indices = self.indices.iter().map(|&i| self.group.neg_index(i)).collect();
        GroupSet::new(self.group.clone(), indices).expect("negation stays in range")
    }

    pub fn translate(&self, shift: u64) -> GroupSet {
        let indices = self
            .indices
            .iter()
            .map(|&i| self.group.add_index(i, shift))
            .collect();
        GroupSet::new(self.group.clone(), indices).expect("translation stays in range")
    }

    pub fn density(&self) -> f64 {
        self.indices.len() as f64 / self.group.cardinality() as f64
    }
}

/// A complex-valued function on a finite abelian group, stored densely in
/// canonical index order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFn {
    group: GroupSpec,
    values: Vec<Complex64>,
}

impl DenseFn {
    pub fn new(group: GroupSpec, values: Vec<Complex64>) -> Result<Self> {
        group.check_dense_cap()?;
        if values.len() as u64 != group.cardinality() {
            return Err(Error::InvalidParameter(format!(
                "value table length {} does not match |G| = {}",
                values.len(),
                group.cardinality()
            )));
        }
        Ok(DenseFn { group, values })
    }

    pub fn constant(group: GroupSpec, value: Complex64) -> Result<Self> {
        group.check_dense_cap()?;
        let len = group.cardinality() as usize;
        Ok(DenseFn {
            group,
            values: vec![value; len],
        })
    }

    pub fn from_fn(group: GroupSpec, f: impl Fn(u64) -> Complex64) -> Result<Self> {
        group.check_dense_cap()?;
        let values = (0..group.cardinality()).map(f).collect();
        Ok(DenseFn { group, values })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, index: u64) -> Complex64 {
        self.values[index as usize]
    }

    pub fn mean(&self) -> Complex64 {
        let sum: Complex64 = self.values.iter().sum();
        sum / self.values.len() as f64
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_one_bounded(&self) -> bool {
        self.linf() <= 1.0 + 1e-12
    }

    /// `x -> f(x + a)`.
    pub fn translate(&self, shift: u64) -> DenseFn {
        let g = &self.group;
        let values = (0..g.cardinality())
            .map(|x| self.values[g.add_index(x, shift) as usize])
            .collect();
        DenseFn {
            group: g.clone(),
            values,
        }
    }

    pub fn pointwise_mul(&self, other: &DenseFn) -> Result<DenseFn> {
        if self.group != other.group {
            return Err(Error::GroupMismatch(
                self.group.to_string(),
                other.group.to_string(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .collect();
        Ok(DenseFn {
            group: self.group.clone(),
            values,
        })
    }
}

/// Indicator function of a set, 1 on the set and 0 elsewhere.
pub fn indicator(set: &GroupSet) -> Result<DenseFn> {
    let group = set.group().clone();
    group.check_dense_cap()?;
    let mut values = vec![Complex64::new(0.0, 0.0); group.cardinality() as usize];
    for &i in set.indices() {
        values[i as usize] = Complex64::new(1.0, 0.0);
    }
    DenseFn::new(group, values)
}

/// A map defined on a subset `S` of one group with values in another,
/// the carrier for Freiman homomorphisms.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialMap {
    domain: GroupSpec,
    codomain: GroupSpec,
    support: Vec<u64>,
    images: Vec<u64>,
}

impl PartialMap {
    pub fn new(domain: GroupSpec, codomain: GroupSpec, pairs: &[(u64, u64)]) -> Result<Self> {
        let mut sorted: Vec<(u64, u64)> = pairs.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter(format!(
                    "duplicate support element {}",
                    w[0].0
                )));
            }
        }
        let mut support = Vec::with_capacity(sorted.len());
        let mut images = Vec::with_capacity(sorted.len());
        for (s, v) in sorted {
            domain.check_index(s)?;
            codomain.check_index(v)?;
            support.push(s);
            images.push(v);
        }
        Ok(PartialMap {
            domain,
            codomain,
            support,
            images,
        })
    }

    pub fn domain(&self) -> &GroupSpec {
        &self.domain
    }

    pub fn codomain(&self) -> &GroupSpec {
        &self.codomain
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn images(&self) -> &[u64] {
        &self.images
    }

    pub fn support_set(&self) -> GroupSet {
        GroupSet {
            group: self.domain.clone(),
            indices: self.support.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Density sigma = |S| / |G| of the support in its domain.
    pub fn density(&self) -> f64 {
        self.support.len() as f64 / self.domain.cardinality() as f64
    }

    pub fn get(&self, x: u64) -> Option<u64> {
        self.support
            .binary_search(&x)
            .ok()
            .map(|pos| self.images[pos])
    }

    pub fn is_injective(&self) -> bool {
        let mut imgs = self.images.clone();
        imgs.sort_unstable();
        imgs.windows(2).all(|w| w[0] != w[1])
    }

    /// The inverse map; requires injectivity.
    pub fn inverse(&self) -> Result<PartialMap> {
        if !self.is_injective() {
            return Err(Error::InvalidParameter(
                "cannot invert a non-injective partial map".into(),
            ));
        }
        let pairs: Vec<(u64, u64)> = self
            .support
            .iter()
            .zip(self.images.iter())
            .map(|(&s, &v)| (v, s))
            .collect();
        PartialMap::new(self.codomain.clone(), self.domain.clone(), &pairs)
    }
}

/// Shared scalar knobs: roughness K, density sigma, tolerance epsilon,
/// correlation threshold tau, and the stand-in exponent for the paper's
/// unspecified constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub k: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub c_exponent: f64,
}

impl Params {
    pub fn new(k: f64, sigma: f64, epsilon: f64, tau: f64, c_exponent: f64) -> Result<Self> {
        let p = Params {
            k,
            sigma,
            epsilon,
            tau,
            c_exponent,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 1.0) {
            return Err(Error::InvalidParameter("K must be >= 1".into()));
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(Error::InvalidParameter("sigma must lie in (0, 1]".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidParameter("epsilon must lie in (0, 1/2)".into()));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidParameter("tau must lie in (0, 1]".into()));
        }
        if !(self.c_exponent > 0.0) {
            return Err(Error::InvalidParameter("C exponent must be positive".into()));
        }
        Ok(())
    }

    /// Default correlation threshold sigma^C used by the extraction pipeline.
    pub fn default_tau(sigma: f64, c_exponent: f64) -> f64 {
        sigma.powf(c_exponent)
    }
}

impl Default for Params {
    fn default() -> Self {
        Params {
            k: 2.0,
            sigma: 0.5,
            epsilon: 0.1,
            tau: 0.25,
            c_exponent: 3.0,
        }
    }
}
