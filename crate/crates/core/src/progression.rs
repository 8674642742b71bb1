//! Generalised arithmetic progressions, Bohr sets, the Bohr-set-to-progression
//! construction, and the sublevel-set progression pipeline.
//!
//! `bohr_to_gap` finds the progression guaranteed by the geometry of numbers:
//! the successive minima of the lattice `Z^d + Z (r_1/M, ..., r_d/M)` with
//! respect to the box norm `max_j |t_j| / eps_j` give generators x_1..x_d and
//! bounds L_j = floor(1 / (d lambda_j)); Minkowski's second theorem then
//! yields the stated cardinality `d^-d eps_1 ... eps_d M`. All postconditions
//! are re-verified by enumeration before returning.

use std::collections::BTreeMap;

use num::BigInt;
use serde::{Deserialize, Serialize};

use crate::group::{GroupSet, GroupSpec};
use crate::{Error, Result, TOL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapAmbient {
    Group(GroupSpec),
    Int { dim: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", untagged)]
pub enum GapPoint {
    Group(u64),
    Int(Vec<i64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapBound {
    /// Coefficient range |l| <= L.
    Symmetric(u64),
    /// Coefficient range l in [1, N].
    Box(u64),
}

impl GapBound {
    fn coefficients(&self) -> Vec<i64> {
        match self {
            GapBound::Symmetric(l) => (-(*l as i64)..=*l as i64).collect(),
            GapBound::Box(n) => (1..=*n as i64).collect(),
        }
    }

    pub fn count(&self) -> u64 {
        match self {
            GapBound::Symmetric(l) => 2 * l + 1,
            GapBound::Box(n) => *n,
        }
    }
}

/// A generalised arithmetic progression: the image of a coefficient box
/// under `l -> base + sum_j l_j generators[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub ambient: GapAmbient,
    pub base: GapPoint,
    pub generators: Vec<GapPoint>,
    pub bounds: Vec<GapBound>,
}

pub const GAP_VOLUME_CAP: u128 = 1_000_000;

impl Gap {
    pub fn dimension(&self) -> u32 {
        self.generators.len() as u32
    }

    pub fn volume(&self) -> u128 {
        self.bounds.iter().map(|b| b.count() as u128).product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.generators.len() != self.bounds.len() {
            return Err(Error::InvalidParameter(
                "generator and bound counts differ".into(),
            ));
        }
        match &self.ambient {
            GapAmbient::Group(g) => {
                g.validate()?;
                let ok = |p: &GapPoint| matches!(p, GapPoint::Group(i) if *i < g.cardinality());
                if !ok(&self.base) || !self.generators.iter().all(ok) {
                    return Err(Error::InvalidParameter(
                        "points do not live in the ambient group".into(),
                    ));
                }
            }
            GapAmbient::Int { dim } => {
                let ok = |p: &GapPoint| matches!(p, GapPoint::Int(v) if v.len() == *dim as usize);
                if !ok(&self.base) || !self.generators.iter().all(ok) {
                    return Err(Error::InvalidParameter(
                        "points do not have the ambient dimension".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn point_at(&self, coeffs: &[i64]) -> GapPoint {
        match &self.ambient {
            GapAmbient::Group(g) => {
                let mut acc = match self.base {
                    GapPoint::Group(i) => i,
                    _ => unreachable!(),
                };
                for (gen, &l) in self.generators.iter().zip(coeffs) {
                    let GapPoint::Group(gi) = gen else { unreachable!() };
                    acc = g.add_index(acc, g.scale_index(*gi, l));
                }
                GapPoint::Group(acc)
            }
            GapAmbient::Int { .. } => {
                let GapPoint::Int(base) = &self.base else { unreachable!() };
                let mut acc = base.clone();
                for (gen, &l) in self.generators.iter().zip(coeffs) {
                    let GapPoint::Int(gv) = gen else { unreachable!() };
                    for (a, b) in acc.iter_mut().zip(gv) {
                        *a += l * b;
                    }
                }
                GapPoint::Int(acc)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapEnumeration {
    /// Distinct elements in canonical order.
    pub elements: Vec<GapPoint>,
    pub volume: u128,
    pub proper: bool,
    pub max_multiplicity: u64,
}

/// Enumerates a progression's image; proper iff the coefficient map is
/// injective (image size equals coefficient volume).
pub fn gap_elements(gap: &Gap) -> Result<GapEnumeration> {
    gap.validate()?;
    let volume = gap.volume();
    if volume > GAP_VOLUME_CAP {
        return Err(Error::SizeGuard(format!(
            "coefficient volume {volume} exceeds cap {GAP_VOLUME_CAP}"
        )));
    }
    let ranges: Vec<Vec<i64>> = gap.bounds.iter().map(|b| b.coefficients()).collect();
    let mut counts: BTreeMap<GapPoint, u64> = BTreeMap::new();
    let mut coeffs: Vec<usize> = vec![0; ranges.len()];
    loop {
        let current: Vec<i64> = coeffs.iter().zip(&ranges).map(|(&i, r)| r[i]).collect();
        *counts.entry(gap.point_at(&current)).or_insert(0) += 1;
        // odometer
        let mut pos = 0;
        loop {
            if pos == ranges.len() {
                let max_multiplicity = counts.values().copied().max().unwrap_or(0);
                let elements: Vec<GapPoint> = counts.keys().cloned().collect();
                let proper = elements.len() as u128 == volume;
                return Ok(GapEnumeration {
                    elements,
                    volume,
                    proper,
                    max_multiplicity,
                });
            }
            coeffs[pos] += 1;
            if coeffs[pos] < ranges[pos].len() {
                break;
            }
            coeffs[pos] = 0;
            pos += 1;
        }
    }
}

/// A Bohr set `B(r_1..r_d; eps_1..eps_d)` in `Z/MZ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BohrSet {
    pub modulus: u64,
    pub frequencies: Vec<u64>,
    pub radii: Vec<f64>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl BohrSet {
    pub fn new(modulus: u64, frequencies: Vec<u64>, radii: Vec<f64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidParameter("modulus must be >= 1".into()));
        }
        if frequencies.is_empty() || frequencies.len() != radii.len() {
            return Err(Error::InvalidParameter(
                "need matching nonempty frequency and radius lists".into(),
            ));
        }
        if radii.iter().any(|&e| !(e > 0.0 && e < 0.5)) {
            return Err(Error::InvalidParameter("radii must lie in (0, 1/2)".into()));
        }
        let frequencies: Vec<u64> = frequencies.into_iter().map(|r| r % modulus).collect();
        let g = frequencies.iter().fold(modulus, |acc, &r| gcd(acc, r));
        if g != 1 {
            return Err(Error::InvalidParameter(format!(
                "hcf(r_1, ..., r_d, M) = {g} != 1"
            )));
        }
        Ok(BohrSet {
            modulus,
            frequencies,
            radii,
        })
    }

    pub fn dimension(&self) -> usize {
        self.frequencies.len()
    }

    pub fn contains(&self, x: u64) -> bool {
        let m = self.modulus;
        self.frequencies.iter().zip(&self.radii).all(|(&r, &eps)| {
            let res = (r as u128 * x as u128 % m as u128) as u64;
            let dist = res.min(m - res);
            dist as f64 <= eps * m as f64
        })
    }
}

/// Exact enumeration of a Bohr set, with the symmetry x in B => -x in B
/// asserted.
pub fn bohr_enumerate(b: &BohrSet) -> Result<GroupSet> {
    if b.modulus > 10_000_000 {
        return Err(Error::SizeGuard("Bohr enumeration capped at M <= 10^7".into()));
    }
    let g = GroupSpec::cyclic(b.modulus)?;
    let indices: Vec<u64> = (0..b.modulus).filter(|&x| b.contains(x)).collect();
    let set = GroupSet::new(g, indices)?;
    if set.neg() != set {
        return Err(Error::VerificationFailure("Bohr set is not symmetric".into()));
    }
    Ok(set)
}

/// Rank over the rationals of integer row vectors, exact.
fn bigint_rank(rows: &[Vec<BigInt>]) -> usize {
    let mut mat: Vec<Vec<BigInt>> = rows.to_vec();
    let ncols = mat.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..mat.len()).find(|&r| mat[r][col] != BigInt::from(0));
        let Some(pr) = pivot else { continue };
        mat.swap(rank, pr);
        let pivot_val = mat[rank][col].clone();
        for r in (rank + 1)..mat.len() {
            if mat[r][col] != BigInt::from(0) {
                let factor = mat[r][col].clone();
                for c in col..ncols {
                    let t = &mat[r][c] * &pivot_val - &mat[rank][c] * &factor;
                    mat[r][c] = t;
                }
            }
        }
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    rank
}

/// One candidate lattice vector: the class of `x` with its box norm and the
/// symmetric residue representative.
struct MinimaCandidate {
    knorm: f64,
    x: u128,
    srep: Vec<BigInt>,
}

/// Greedy successive minima among candidates already sorted by (norm, x),
/// keeping at most `count` linearly independent vectors.
fn successive_minima(cands: &[MinimaCandidate], count: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for (i, c) in cands.iter().enumerate() {
        if chosen.len() == count {
            break;
        }
        let mut trial = rows.clone();
        trial.push(c.srep.clone());
        if bigint_rank(&trial) == trial.len() {
            rows = trial;
            chosen.push(i);
        }
    }
    chosen
}

fn symmetric_residue(res: u128, m: u128) -> BigInt {
    if res * 2 <= m {
        BigInt::from(res)
    } else {
        BigInt::from(res) - BigInt::from(m)
    }
}

/// Builds the progression bounds floor(1/(d lambda_j)). The optimistic
/// rounding admits exact boundary hits; the pessimistic one backs off when
/// the exhaustive containment check rejects a boundary case.
fn minima_to_bounds(lambdas: &[f64], d_total: usize, pessimistic: bool) -> Vec<u64> {
    let fudge = if pessimistic { -1e-12 } else { 1e-9 };
    lambdas
        .iter()
        .map(|&l| {
            ((1.0 / (d_total as f64 * l)) * (1.0 + fudge))
                .floor()
                .max(0.0) as u64
        })
        .collect()
}

/// The Bohr-set-to-progression construction. Returns a proper progression
/// contained in B of cardinality at least `d^-d eps_1 ... eps_d M`, all three
/// properties verified by enumeration.
pub fn bohr_to_gap(b: &BohrSet) -> Result<Gap> {
    let d = b.dimension();
    if d > 3 {
        return Err(Error::SizeGuard("bohr_to_gap capped at d <= 3".into()));
    }
    if b.modulus > 100_000 {
        return Err(Error::SizeGuard("bohr_to_gap capped at M <= 10^5".into()));
    }
    let m = b.modulus;
    let mut cands: Vec<MinimaCandidate> = Vec::new();
    for x in 1..m {
        let mut knorm = 0.0f64;
        let mut srep = Vec::with_capacity(d);
        for (&r, &eps) in b.frequencies.iter().zip(&b.radii) {
            let res = (r as u128 * x as u128 % m as u128) as u64;
            let dist = res.min(m - res);
            knorm = knorm.max(dist as f64 / (eps * m as f64));
            srep.push(symmetric_residue(res as u128, m as u128));
        }
        if knorm <= 1.0 {
            cands.push(MinimaCandidate {
                knorm,
                x: x as u128,
                srep,
            });
        }
    }
    cands.sort_by(|a, b| a.knorm.partial_cmp(&b.knorm).unwrap().then(a.x.cmp(&b.x)));
    let chosen = successive_minima(&cands, d);
    let lambdas: Vec<f64> = chosen.iter().map(|&i| cands[i].knorm).collect();
    let wanted = (d as f64).powi(-(d as i32)) * b.radii.iter().product::<f64>() * m as f64;

    let mut last_err = None;
    for pessimistic in [false, true] {
        let bounds = minima_to_bounds(&lambdas, d, pessimistic);
        let mut generators = Vec::new();
        let mut gap_bounds = Vec::new();
        for (idx, &ci) in chosen.iter().enumerate() {
            if bounds[idx] >= 1 {
                generators.push(GapPoint::Group(cands[ci].x as u64));
                gap_bounds.push(GapBound::Symmetric(bounds[idx]));
            }
        }
        let gap = Gap {
            ambient: GapAmbient::Group(GroupSpec::cyclic(m)?),
            base: GapPoint::Group(0),
            generators,
            bounds: gap_bounds,
        };
        match verify_bohr_gap(b, &gap, wanted) {
            Ok(()) => return Ok(gap),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

fn verify_bohr_gap(b: &BohrSet, gap: &Gap, wanted: f64) -> Result<()> {
    let enumeration = gap_elements(gap)?;
    if !enumeration.proper {
        return Err(Error::SearchFailure(
            "minima construction produced an improper progression".into(),
        ));
    }
    for e in &enumeration.elements {
        let GapPoint::Group(x) = e else { unreachable!() };
        if !b.contains(*x) {
            return Err(Error::SearchFailure(format!(
                "element {x} of the progression escapes the Bohr set"
            )));
        }
    }
    if (enumeration.elements.len() as f64) < wanted * (1.0 - 1e-12) {
        return Err(Error::SearchFailure(format!(
            "progression size {} below the bound {wanted}",
            enumeration.elements.len()
        )));
    }
    Ok(())
}

/// An affine map to R/Z on integer boxes: `eta(x) = sum_j alpha_j x_j + beta`,
/// evaluated with fractional parts in (-1/2, 1/2].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineRZMap {
    pub alphas: Vec<f64>,
    pub beta: f64,
}

/// Fractional part in (-1/2, 1/2].
pub fn frac_rz(t: f64) -> f64 {
    t - (t - 0.5).ceil()
}

impl AffineRZMap {
    pub fn eval(&self, x: &[i64]) -> f64 {
        let mut acc = self.beta;
        for (&a, &xi) in self.alphas.iter().zip(x) {
            acc += a * xi as f64;
        }
        frac_rz(acc)
    }

    pub fn linear(&self, x: &[i64]) -> f64 {
        let mut acc = 0.0;
        for (&a, &xi) in self.alphas.iter().zip(x) {
            acc += a * xi as f64;
        }
        frac_rz(acc)
    }

    pub fn norm(&self, x: &[i64]) -> f64 {
        self.eval(x).abs()
    }
}

// ---- big-modulus machinery for the sublevel pipeline -----------------------

fn mulmod_u128(mut a: u128, mut b: u128, m: u128) -> u128 {
    a %= m;
    b %= m;
    let mut acc: u128 = 0;
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a + a) % m;
        b >>= 1;
    }
    acc
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = crate::fp::pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod_u128(x as u128, x as u128, n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn next_odd_prime_above(x: u64) -> Result<u64> {
    let mut c = x + 1 + (x % 2);
    if c <= 3 {
        c = 3;
    }
    loop {
        if is_prime_u64(c) {
            return Ok(c);
        }
        c = c.checked_add(2).ok_or(Error::CardinalityOverflow)?;
    }
}

struct BigBohr {
    m: u128,
    freqs: Vec<u128>,
    radii: Vec<f64>,
}

impl BigBohr {
    fn knorm(&self, x: u128) -> f64 {
        let mut knorm = 0.0f64;
        for (&r, &eps) in self.freqs.iter().zip(&self.radii) {
            let res = mulmod_u128(r, x, self.m);
            let dist = res.min(self.m - res);
            knorm = knorm.max(dist as f64 / (eps * self.m as f64));
        }
        knorm
    }

    fn sreps(&self, x: u128) -> Vec<BigInt> {
        self.freqs
            .iter()
            .map(|&r| symmetric_residue(mulmod_u128(r, x, self.m), self.m))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SublevelReport {
    /// The output progression, ambient `Z^d`, in the original box coordinates.
    pub gap: Gap,
    pub elements: Vec<Vec<i64>>,
    pub x_star_star: Vec<i64>,
    pub size: u64,
    pub dimension: u32,
    /// `|Q| * |P|^-1 * eps^-(d+1) * d^d`, the achieved-size ratio.
    pub achieved_ratio: f64,
    pub moduli: Vec<u64>,
}

/// Threshold constant in the precondition `N_j > C0 / eps`.
pub const SUBLEVEL_C0: f64 = 4.0;

/// The sublevel-set progression pipeline on a box `[N_1] x ... x [N_d]`:
/// recentre at a deep interior point x** where eta stays small, shrink to a
/// symmetric box, pick large odd coprime moduli, build the associated Bohr
/// set in `Z/(M_1...M_d)Z`, extract a progression through the digit
/// expansion, and map it back. Every output element is verified to lie in
/// the box with `||eta|| <= eps`; dimension is at most d + 1.
pub fn sublevel_progression(
    sides: &[u64],
    eta: &AffineRZMap,
    eps: f64,
    x_star: &[i64],
) -> Result<SublevelReport> {
    let d = sides.len();
    if d == 0 || d > 2 {
        return Err(Error::SizeGuard(
            "sublevel pipeline supports box dimension 1 or 2".into(),
        ));
    }
    if eta.alphas.len() != d || x_star.len() != d {
        return Err(Error::InvalidParameter("dimension mismatch".into()));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter("eps must lie in (0, 1/2)".into()));
    }
    for (&n, &x) in sides.iter().zip(x_star) {
        if (n as f64) <= SUBLEVEL_C0 / eps {
            return Err(Error::InvalidParameter(format!(
                "side {n} violates N > C0/eps = {}",
                SUBLEVEL_C0 / eps
            )));
        }
        if x < 1 || x > n as i64 {
            return Err(Error::InvalidParameter("x* outside the box".into()));
        }
    }
    if eta.norm(x_star) > TOL {
        return Err(Error::InvalidParameter(format!(
            "eta(x*) = {} does not vanish",
            eta.eval(x_star)
        )));
    }

    // reparametrise so x* lies in the same quadrant as the origin
    let flips: Vec<bool> = sides
        .iter()
        .zip(x_star)
        .map(|(&n, &x)| 2 * x > n as i64)
        .collect();
    let work_alphas: Vec<f64> = eta
        .alphas
        .iter()
        .zip(&flips)
        .map(|(&a, &f)| if f { -a } else { a })
        .collect();
    let mut work_beta = eta.beta;
    for ((&a, &f), &n) in eta.alphas.iter().zip(&flips).zip(sides) {
        if f {
            work_beta += a * (n as f64 + 1.0);
        }
    }
    let eta_w = AffineRZMap {
        alphas: work_alphas,
        beta: work_beta,
    };
    let x_star_w: Vec<i64> = x_star
        .iter()
        .zip(&flips)
        .zip(sides)
        .map(|((&x, &f), &n)| if f { n as i64 + 1 - x } else { x })
        .collect();
    let unflip = |v: &[i64]| -> Vec<i64> {
        v.iter()
            .zip(&flips)
            .zip(sides)
            .map(|((&x, &f), &n)| if f { n as i64 + 1 - x } else { x })
            .collect()
    };

    // recentering: m points spaced ~ i N_j / 3m, pigeonhole a close pair
    let m_points = (2.0 / eps).ceil() as i64 + 1;
    let grid: Vec<Vec<i64>> = (1..=m_points)
        .map(|i| {
            sides
                .iter()
                .map(|&n| {
                    let t = (i as f64 * n as f64 / (3.0 * m_points as f64)).round() as i64;
                    t.clamp(1, n as i64)
                })
                .collect()
        })
        .collect();
    let mut pair = None;
    'outer: for s in 0..grid.len() {
        for t in (s + 1)..grid.len() {
            let diff: Vec<i64> = grid[t].iter().zip(&grid[s]).map(|(a, b)| a - b).collect();
            if eta_w.linear(&diff).abs() <= eps / 2.0 + 1e-12 {
                pair = Some(diff);
                break 'outer;
            }
        }
    }
    let Some(diff) = pair else {
        return Err(Error::SearchFailure(
            "pigeonhole pair not found in the recentering grid".into(),
        ));
    };
    let x_ss: Vec<i64> = x_star_w.iter().zip(&diff).map(|(a, b)| a + b).collect();
    for (&x, &n) in x_ss.iter().zip(sides) {
        let lo = eps * n as f64 / 10.0;
        let hi = (1.0 - eps / 10.0) * n as f64;
        if (x as f64) < lo - TOL || (x as f64) > hi + TOL {
            return Err(Error::VerificationFailure(format!(
                "recentred point coordinate {x} escapes the window [{lo}, {hi}]"
            )));
        }
    }

    // shrink to the symmetric box P' with half-sides N'_j
    let half_sides: Vec<u64> = sides
        .iter()
        .map(|&n| (eps * n as f64 / 10.0).floor() as u64)
        .collect();

    let finish = |gap: Gap, elements: Vec<Vec<i64>>, moduli: Vec<u64>| -> Result<SublevelReport> {
        let size = elements.len() as u64;
        let volume: f64 = sides.iter().map(|&n| n as f64).product();
        let achieved_ratio = size as f64 / volume * eps.powi(-(d as i32) - 1)
            * (d as f64).powi(d as i32);
        Ok(SublevelReport {
            dimension: gap.dimension(),
            x_star_star: unflip(&x_ss),
            size,
            achieved_ratio,
            moduli,
            gap,
            elements,
        })
    };

    // degenerate shrink: the box collapses to the single recentred point
    if half_sides.iter().all(|&n| n == 0) {
        let base = unflip(&x_ss);
        if eta.norm(&base) > eps + TOL {
            return Err(Error::VerificationFailure(
                "recentred point escapes the sublevel set".into(),
            ));
        }
        let gap = Gap {
            ambient: GapAmbient::Int { dim: d as u32 },
            base: GapPoint::Int(base.clone()),
            generators: vec![],
            bounds: vec![],
        };
        return finish(gap, vec![base], vec![]);
    }

    // moduli: M_d < ... < M_1, each an odd prime dominating the next stage
    let maxnp = half_sides.iter().copied().max().unwrap().max(1);
    let t_factor = (1.0e4 * d as f64 / eps).ceil() as u64;
    let mut moduli = vec![0u64; d];
    let mut prev: u64 = 1;
    for j in (0..d).rev() {
        let threshold = t_factor
            .checked_mul(prev)
            .and_then(|v| v.checked_mul(maxnp))
            .ok_or(Error::CardinalityOverflow)?;
        let p = next_odd_prime_above(threshold)?;
        moduli[j] = p;
        prev = p;
    }
    let m_total: u128 = moduli.iter().map(|&m| m as u128).product();

    // frequencies r_j = M_(j+1) ... M_d, r_(d+1) = sum r_j s_j
    let mut freqs: Vec<u128> = Vec::with_capacity(d + 1);
    for j in 0..d {
        let r: u128 = moduli[(j + 1)..].iter().map(|&m| m as u128).product();
        freqs.push(r);
    }
    let mut r_last: u128 = 0;
    for j in 0..d {
        // nearest integer to alpha_j M_j, ties to the smaller value
        let t = eta_w.alphas[j].rem_euclid(1.0) * moduli[j] as f64;
        let s = (t - 0.5).ceil() as i64;
        let s = s.rem_euclid(moduli[j] as i64) as u128;
        r_last = (r_last + mulmod_u128(freqs[j], s, m_total)) % m_total;
    }
    freqs.push(r_last);
    let mut radii: Vec<f64> = half_sides
        .iter()
        .zip(&moduli)
        .map(|(&np, &mj)| (2 * np).max(1) as f64 / (4.0 * mj as f64))
        .collect();
    radii.push(eps / 4.0);
    let bohr = BigBohr {
        m: m_total,
        freqs,
        radii,
    };

    // digit weights W_j = M_1 ... M_(j-1)
    let mut weights: Vec<u128> = Vec::with_capacity(d);
    let mut w: u128 = 1;
    for &mj in &moduli {
        weights.push(w);
        w *= mj as u128;
    }
    let encode = |z: &[i64]| -> u128 {
        let mut acc: i128 = 0;
        for (j, &zj) in z.iter().enumerate() {
            acc += zj as i128 * weights[j] as i128;
        }
        acc.rem_euclid(m_total as i128) as u128
    };
    let decode = |x: u128| -> Result<Vec<i64>> {
        let mut rest = x as i128;
        let mut z = Vec::with_capacity(d);
        for &mj in &moduli {
            let mj = mj as i128;
            let mut r = rest.rem_euclid(mj);
            if 2 * r > mj {
                r -= mj;
            }
            z.push(r as i64);
            rest = (rest - r) / mj;
        }
        // symmetric digits represent (-M/2, M/2]; values above M/2 wrap once
        if rest != 0 && rest != 1 {
            return Err(Error::VerificationFailure("digit decode left a remainder".into()));
        }
        Ok(z)
    };

    // candidate digit tuples cover all of B' by the modulus margins
    let mut cands: Vec<MinimaCandidate> = Vec::new();
    let mut digit: Vec<i64> = half_sides.iter().map(|&n| -(n as i64)).collect();
    loop {
        if digit.iter().any(|&z| z != 0) {
            let x = encode(&digit);
            let knorm = bohr.knorm(x);
            if knorm <= 1.0 {
                cands.push(MinimaCandidate {
                    knorm,
                    x,
                    srep: bohr.sreps(x),
                });
            }
        }
        let mut pos = 0;
        loop {
            if pos == d {
                break;
            }
            digit[pos] += 1;
            if digit[pos] <= half_sides[pos] as i64 {
                break;
            }
            digit[pos] = -(half_sides[pos] as i64);
            pos += 1;
        }
        if pos == d {
            break;
        }
    }
    cands.sort_by(|a, b| a.knorm.partial_cmp(&b.knorm).unwrap().then(a.x.cmp(&b.x)));
    let chosen = successive_minima(&cands, d + 1);
    let lambdas: Vec<f64> = chosen.iter().map(|&i| cands[i].knorm).collect();

    let assemble = |pessimistic: bool| -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>, Vec<u64>)> {
        let limit_bounds = minima_to_bounds(&lambdas, d + 1, pessimistic);
        let mut generators: Vec<Vec<i64>> = Vec::new();
        let mut sym_bounds: Vec<u64> = Vec::new();
        for (idx, &ci) in chosen.iter().enumerate() {
            if limit_bounds[idx] >= 1 {
                let z = decode(cands[ci].x)?;
                for (j, &zj) in z.iter().enumerate() {
                    if zj.unsigned_abs() > half_sides[j] {
                        return Err(Error::VerificationFailure(
                            "generator digits escape the shrunken box".into(),
                        ));
                    }
                }
                generators.push(z);
                sym_bounds.push(limit_bounds[idx]);
            }
        }
        let volume: u128 = sym_bounds.iter().map(|&l| 2 * l as u128 + 1).product();
        if volume > GAP_VOLUME_CAP {
            return Err(Error::SizeGuard("output coefficient volume exceeds cap".into()));
        }
        let mut elements: Vec<Vec<i64>> = Vec::new();
        let mut coeffs: Vec<i64> = sym_bounds.iter().map(|&l| -(l as i64)).collect();
        loop {
            let mut point = x_ss.clone();
            for (gen, &l) in generators.iter().zip(&coeffs) {
                for (a, b) in point.iter_mut().zip(gen) {
                    *a += l * b;
                }
            }
            elements.push(point);
            let mut pos = 0;
            loop {
                if pos == generators.len() {
                    break;
                }
                coeffs[pos] += 1;
                if coeffs[pos] <= sym_bounds[pos] as i64 {
                    break;
                }
                coeffs[pos] = -(sym_bounds[pos] as i64);
                pos += 1;
            }
            if pos == generators.len() {
                break;
            }
        }
        let mut distinct = elements.clone();
        distinct.sort();
        distinct.dedup();
        if distinct.len() != elements.len() {
            return Err(Error::VerificationFailure("output progression is improper".into()));
        }
        let final_elements: Vec<Vec<i64>> = elements.iter().map(|e| unflip(e)).collect();
        for e in &final_elements {
            for (&x, &n) in e.iter().zip(sides) {
                if x < 1 || x > n as i64 {
                    return Err(Error::VerificationFailure(format!(
                        "output point {e:?} escapes the box"
                    )));
                }
            }
            if eta.norm(e) > eps + TOL {
                return Err(Error::VerificationFailure(format!(
                    "output point {e:?} escapes the sublevel set: ||eta|| = {}",
                    eta.norm(e)
                )));
            }
        }
        Ok((generators, final_elements, sym_bounds))
    };

    let (generators, final_elements, sym_bounds) = match assemble(false) {
        Ok(out) => out,
        Err(Error::VerificationFailure(_)) => assemble(true)?,
        Err(e) => return Err(e),
    };
    let final_generators: Vec<GapPoint> = generators
        .iter()
        .map(|z| {
            GapPoint::Int(
                z.iter()
                    .zip(&flips)
                    .map(|(&v, &f)| if f { -v } else { v })
                    .collect(),
            )
        })
        .collect();
    let gap = Gap {
        ambient: GapAmbient::Int { dim: d as u32 },
        base: GapPoint::Int(unflip(&x_ss)),
        generators: final_generators,
        bounds: sym_bounds.iter().map(|&l| GapBound::Symmetric(l)).collect(),
    };
    finish(gap, final_elements, moduli)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_one_dimensional() {
        let gap = Gap {
            ambient: GapAmbient::Group(GroupSpec::cyclic(100).unwrap()),
            base: GapPoint::Group(0),
            generators: vec![GapPoint::Group(2)],
            bounds: vec![GapBound::Symmetric(3)],
        };
        let e = gap_elements(&gap).unwrap();
        assert_eq!(e.elements.len(), 7);
        assert!(e.proper);
    }

    #[test]
    fn gap_improper_reports_multiplicity() {
        // x2 = 2 x1 with overlapping ranges
        let gap = Gap {
            ambient: GapAmbient::Group(GroupSpec::cyclic(1000).unwrap()),
            base: GapPoint::Group(0),
            generators: vec![GapPoint::Group(1), GapPoint::Group(2)],
            bounds: vec![GapBound::Symmetric(4), GapBound::Symmetric(4)],
        };
        let e = gap_elements(&gap).unwrap();
        assert!(!e.proper);
        assert!(e.max_multiplicity >= 2);
    }

    #[test]
    fn gap_box_bounds() {
        // coefficient range [1, N] instead of a symmetric window
        let gap = Gap {
            ambient: GapAmbient::Group(GroupSpec::cyclic(50).unwrap()),
            base: GapPoint::Group(3),
            generators: vec![GapPoint::Group(7)],
            bounds: vec![GapBound::Box(4)],
        };
        let e = gap_elements(&gap).unwrap();
        let got: Vec<u64> = e
            .elements
            .iter()
            .map(|p| match p {
                GapPoint::Group(x) => *x,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(got, vec![10, 17, 24, 31]);
        assert!(e.proper);
    }

    #[test]
    fn gap_zero_dimensional() {
        let gap = Gap {
            ambient: GapAmbient::Group(GroupSpec::cyclic(10).unwrap()),
            base: GapPoint::Group(7),
            generators: vec![],
            bounds: vec![],
        };
        let e = gap_elements(&gap).unwrap();
        assert_eq!(e.elements, vec![GapPoint::Group(7)]);
        assert!(e.proper);
    }

    #[test]
    fn bohr_small_example() {
        let b = BohrSet::new(8, vec![1], vec![0.25]).unwrap();
        let s = bohr_enumerate(&b).unwrap();
        assert_eq!(s.indices(), &[0, 1, 2, 6, 7]);
    }

    #[test]
    fn bohr_rejects_radius_half() {
        assert!(BohrSet::new(8, vec![1], vec![0.5]).is_err());
    }

    #[test]
    fn bohr_rejects_common_factor() {
        assert!(BohrSet::new(12, vec![4, 6], vec![0.1, 0.1]).is_err());
    }

    #[test]
    fn bohr_enumeration_matches_defining_scan() {
        let b = BohrSet::new(137, vec![25, 64], vec![0.2, 0.15]).unwrap();
        let s = bohr_enumerate(&b).unwrap();
        let oracle: Vec<u64> = (0..137)
            .filter(|&x| {
                [(25u64, 0.2f64), (64, 0.15)].iter().all(|&(r, e)| {
                    let res = r * x % 137;
                    let dist = res.min(137 - res) as f64;
                    dist <= e * 137.0
                })
            })
            .collect();
        assert_eq!(s.indices(), &oracle[..]);
    }

    #[test]
    fn bohr_to_gap_d1_meets_bound() {
        let b = BohrSet::new(101, vec![37], vec![0.2]).unwrap();
        let gap = bohr_to_gap(&b).unwrap();
        let e = gap_elements(&gap).unwrap();
        assert!(e.elements.len() as f64 >= 0.2 * 101.0);
    }

    #[test]
    fn bohr_to_gap_d2_meets_bound() {
        let b = BohrSet::new(997, vec![1, 313], vec![0.3, 0.3]).unwrap();
        let gap = bohr_to_gap(&b).unwrap();
        let e = gap_elements(&gap).unwrap();
        let bound = 0.25 * 0.3 * 0.3 * 997.0;
        assert!(e.elements.len() as f64 >= bound);
    }

    #[test]
    fn bohr_to_gap_prime_modulus_small_radii() {
        // bound d^-d eps^2 M = 997/400 at eps = 0.1
        let b = BohrSet::new(997, vec![1, 313], vec![0.1, 0.1]).unwrap();
        let gap = bohr_to_gap(&b).unwrap();
        let e = gap_elements(&gap).unwrap();
        assert!(e.proper);
        assert!(e.elements.len() as f64 >= 997.0 / 400.0);
    }

    #[test]
    fn bohr_to_gap_wide_radii() {
        let b = BohrSet::new(211, vec![3, 151], vec![0.45, 0.45]).unwrap();
        let gap = bohr_to_gap(&b).unwrap();
        let e = gap_elements(&gap).unwrap();
        assert!(e.elements.len() as f64 >= 0.25 * 0.45 * 0.45 * 211.0);
    }

    #[test]
    fn frac_convention() {
        assert_eq!(frac_rz(0.5), 0.5);
        assert_eq!(frac_rz(-0.5), 0.5);
        assert!((frac_rz(0.7) + 0.3).abs() < 1e-12);
        assert!((frac_rz(3.2) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn primes() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(1_000_003));
        assert!(!is_prime_u64(1_000_001)); // 101 * 9901
        assert_eq!(next_odd_prime_above(100).unwrap(), 101);
        assert_eq!(next_odd_prime_above(101).unwrap(), 103);
    }

    #[test]
    fn sublevel_trivial_eta() {
        // eta = 0: every point of the box is in the sublevel set
        let sides = vec![200u64];
        let eta = AffineRZMap {
            alphas: vec![0.0],
            beta: 0.0,
        };
        let rep = sublevel_progression(&sides, &eta, 0.2, &[50]).unwrap();
        assert!(rep.size >= 1);
        assert!(rep.dimension <= 2);
    }

    #[test]
    fn sublevel_d1_contained_in_oracle() {
        let alpha = 0.3737373737;
        let x_star = 47i64;
        let eta = AffineRZMap {
            alphas: vec![alpha],
            beta: -(alpha * x_star as f64),
        };
        let eps = 0.1;
        let rep = sublevel_progression(&[200], &eta, eps, &[x_star]).unwrap();
        // exhaustive sublevel enumeration as the oracle
        let oracle: Vec<i64> = (1..=200i64)
            .filter(|&x| eta.norm(&[x]) <= eps + TOL)
            .collect();
        assert!(!rep.elements.is_empty());
        for e in &rep.elements {
            assert!(oracle.contains(&e[0]), "{e:?} outside the sublevel set");
        }
        assert!(rep.dimension <= 2);
    }

    #[test]
    fn sublevel_d2_dimension_bound() {
        let alphas = vec![0.21321, 0.77777];
        let x_star = vec![20i64, 30];
        let beta = -(alphas[0] * x_star[0] as f64 + alphas[1] * x_star[1] as f64);
        let eta = AffineRZMap {
            alphas,
            beta,
        };
        let rep = sublevel_progression(&[60, 90], &eta, 0.1, &x_star).unwrap();
        assert!(rep.dimension <= 3);
        assert!(rep.size >= 1);
        for e in &rep.elements {
            assert!(eta.norm(e) <= 0.1 + TOL);
            assert!(e[0] >= 1 && e[0] <= 60 && e[1] >= 1 && e[1] <= 90);
        }
    }

    #[test]
    fn sublevel_rejects_small_sides() {
        let eta = AffineRZMap {
            alphas: vec![0.1],
            beta: -0.1 * 10.0,
        };
        assert!(sublevel_progression(&[30], &eta, 0.1, &[10]).is_err());
    }

    #[test]
    fn digit_roundtrip_inside_sublevel_moduli() {
        // exercised indirectly by the pipeline; spot-check the codec here
        let moduli = [101u64, 257];
        let m_total: i128 = moduli.iter().map(|&m| m as i128).product();
        let weights = [1i128, 101];
        let samples = (0..10_000u64)
            .map(|k| (k.wrapping_mul(0x9e3779b97f4a7c15) % (m_total as u64)) as i128);
        for x in samples.chain([0i128, 1, 100, 101, 513, 12_000, 25_956]) {
            let mut rest = x;
            let mut z = Vec::new();
            for &mj in &moduli {
                let mj = mj as i128;
                let mut r = rest.rem_euclid(mj);
                if 2 * r > mj {
                    r -= mj;
                }
                z.push(r);
                rest = (rest - r) / mj;
            }
            assert!(rest == 0 || rest == 1, "remainder {rest} at x = {x}");
            let val: i128 = z.iter().zip(&weights).map(|(&zj, &w)| zj * w).sum();
            assert_eq!(val.rem_euclid(m_total), x);
            // digits stay within the symmetric ranges
            for (&zj, &mj) in z.iter().zip(&moduli) {
                assert!(2 * zj.unsigned_abs() <= mj as u128 + 1);
            }
        }
    }
}
