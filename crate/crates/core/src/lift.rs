//! The two U^3 lifting constructions and the extraction pipeline recovering
//! an affine map from a quadratic correlate.
//!
//! Over `F_2`: `f(x, y) = 1_S(x) (-1)^(phi(x) . y)` on `F_2^(n+N)`, with the
//! x block in the low bits. Over the integers: `f(x + 4Ny) = 1_S(x) e_M(phi(x) y)`
//! on `Z/4NMZ`. For a Freiman homomorphism phi both lifts have the same U^3
//! norm as the indicator of their support, which is bounded below by sigma
//! (respectively sigma/4).

use num::complex::Complex64;

use crate::f2::{mask_lo, parity, BitMatrix};
use crate::fourier::transform;
use crate::freiman::is_freiman_hom;
use crate::gowers::gowers_norm_fast;
use crate::group::{DenseFn, GroupSpec, PartialMap};
use crate::quadratic::{best_quadratic_correlate, mixed_derivative_split, QuadPolyF2};
use crate::{Error, Result, TOL};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum LiftMeta {
    F2 { n: u32, big_n: u32 },
    Z { range_n: u64, modulus_m: u64 },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LiftVerification {
    pub u3: f64,
    pub u3_support_indicator: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedInstance {
    pub source: PartialMap,
    pub lifted: DenseFn,
    /// Density of S in its reference set: |S| / 2^n over F_2, |S| / N over Z.
    pub sigma: f64,
    pub meta: LiftMeta,
    pub verification: Option<LiftVerification>,
}

fn f2_dims(phi: &PartialMap) -> Result<(u32, u32)> {
    let n = match phi.domain() {
        GroupSpec::Vector { p: 2, n } => *n,
        other => {
            return Err(Error::InvalidParameter(format!(
                "lift_f2 needs domain F_2^n, got {other}"
            )))
        }
    };
    let big_n = match phi.codomain() {
        GroupSpec::Vector { p: 2, n } => *n,
        other => {
            return Err(Error::InvalidParameter(format!(
                "lift_f2 needs codomain F_2^N, got {other}"
            )))
        }
    };
    Ok((n, big_n))
}

/// The indicator of the lifted support, on the same big group as the lift.
fn support_indicator(lifted: &DenseFn) -> DenseFn {
    DenseFn::from_fn(lifted.group().clone(), |z| {
        if lifted.value(z).norm() > 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .expect("same group")
}

fn verify_lift(
    lifted: &DenseFn,
    phi: &PartialMap,
    sigma: f64,
    factor: f64,
) -> Result<LiftVerification> {
    let check = is_freiman_hom(phi)?;
    if !check.is_hom {
        return Err(Error::NotFreiman(check.witness.unwrap()));
    }
    let u3 = gowers_norm_fast(lifted, 3)?;
    let ind = support_indicator(lifted);
    let u3_ind = gowers_norm_fast(&ind, 3)?;
    if (u3 - u3_ind).abs() > TOL {
        return Err(Error::VerificationFailure(format!(
            "lift norm {u3} differs from support-indicator norm {u3_ind}"
        )));
    }
    let lower_bound = factor * sigma;
    if u3 < lower_bound - TOL {
        return Err(Error::VerificationFailure(format!(
            "U^3 = {u3} below the bound {lower_bound}"
        )));
    }
    Ok(LiftVerification {
        u3,
        u3_support_indicator: u3_ind,
        lower_bound,
    })
}

/// Lifts phi : S -> F_2^N (S inside F_2^n) to `f(x,y) = 1_S(x) (-1)^(phi(x).y)`
/// on `F_2^(n+N)`. With `verify` set, requires phi Freiman and asserts the
/// norm equality and the `U^3 >= sigma` bound.
pub fn lift_f2(phi: &PartialMap, verify: bool) -> Result<LiftedInstance> {
    let (n, big_n) = f2_dims(phi)?;
    if verify && n + big_n > 12 {
        return Err(Error::SizeGuard(
            "U^3 verification capped at n + N <= 12".into(),
        ));
    }
    let group = GroupSpec::f2(n + big_n);
    let xmask = mask_lo(n) as u64;
    let lifted = DenseFn::from_fn(group, |z| {
        let x = z & xmask;
        let y = (z >> n) as u32;
        match phi.get(x) {
            Some(v) => Complex64::new(if parity(v as u32 & y) == 1 { -1.0 } else { 1.0 }, 0.0),
            None => Complex64::new(0.0, 0.0),
        }
    })?;
    let sigma = phi.len() as f64 / (1u64 << n) as f64;
    let verification = if verify {
        Some(verify_lift(&lifted, phi, sigma, 1.0)?)
    } else {
        None
    };
    Ok(LiftedInstance {
        source: phi.clone(),
        lifted,
        sigma,
        meta: LiftMeta::F2 { n, big_n },
        verification,
    })
}

/// Lifts phi : S -> Z/MZ (S inside [N]) to `f(x + 4Ny) = 1_S(x) e_M(phi(x) y)`
/// on `Z/4NMZ`. Pairs are (x, phi(x)) with x in 1..=N. With `verify` set,
/// asserts the norm equality and `U^3 >= sigma / 4`.
pub fn lift_z(
    range_n: u64,
    modulus_m: u64,
    pairs: &[(u64, u64)],
    verify: bool,
) -> Result<LiftedInstance> {
    if range_n == 0 || modulus_m == 0 {
        return Err(Error::InvalidParameter("need N >= 1 and M >= 1".into()));
    }
    let big = 4 * range_n * modulus_m;
    if verify && big > 1 << 14 {
        return Err(Error::SizeGuard(
            "U^3 verification capped at 4NM <= 2^14".into(),
        ));
    }
    for &(x, v) in pairs {
        if x == 0 || x > range_n {
            return Err(Error::InvalidParameter(format!(
                "support element {x} outside [N] = [1, {range_n}]"
            )));
        }
        if v >= modulus_m {
            return Err(Error::InvalidParameter(format!("image {v} outside Z/{modulus_m}Z")));
        }
    }
    let domain = GroupSpec::cyclic(big)?;
    let codomain = GroupSpec::cyclic(modulus_m)?;
    let phi = PartialMap::new(domain.clone(), codomain, pairs)?;
    let lifted = DenseFn::from_fn(domain, |z| {
        let x = z % (4 * range_n);
        let y = z / (4 * range_n);
        match phi.get(x) {
            Some(v) => {
                let ang = 2.0 * std::f64::consts::PI * (v * y % modulus_m) as f64
                    / modulus_m as f64;
                Complex64::new(ang.cos(), ang.sin())
            }
            None => Complex64::new(0.0, 0.0),
        }
    })?;
    let sigma = pairs.len() as f64 / range_n as f64;
    let verification = if verify {
        Some(verify_lift(&lifted, &phi, sigma, 0.25)?)
    } else {
        None
    };
    Ok(LiftedInstance {
        source: phi,
        lifted,
        sigma,
        meta: LiftMeta::Z {
            range_n,
            modulus_m,
        },
        verification,
    })
}

/// The quadratic phase `Psi(x, y) = (Lx) . y + r0 . y` planted from an
/// affine map `x -> Lx + r0`; it correlates perfectly with the lift of that
/// map and every extraction inner sum has magnitude one at frequency r0.
pub fn planted_bilinear(l: &BitMatrix, r0: u32, n: u32, big_n: u32) -> Result<QuadPolyF2> {
    if l.cols != n || l.nrows() != big_n {
        return Err(Error::InvalidParameter("planted matrix must be N x n".into()));
    }
    let mut rows = vec![0u32; (n + big_n) as usize];
    for j in 0..big_n {
        for i in 0..n {
            if l.rows[j as usize] >> i & 1 == 1 {
                rows[i as usize] |= 1 << (n + j);
            }
        }
    }
    let b = (r0 & mask_lo(big_n)) << n;
    QuadPolyF2::from_matrix(n + big_n, &rows, b, false)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExtractionReport {
    /// The recovered affine map (L, r): x -> Lx + r, absent when no x
    /// survives the threshold.
    pub recovered: Option<(BitMatrix, u32)>,
    /// Elements of S where phi agrees with the recovered affine map.
    pub agreement: Vec<u64>,
    pub agreement_fraction: f64,
    /// Per-x inner sums of the extraction (eq-style values), recomputable
    /// from the inputs.
    pub inner_values: Vec<(u64, f64)>,
    /// x kept by the threshold.
    pub kept: Vec<u64>,
    /// Distinct frequencies phi(x) - psi(x) among kept x, with their
    /// spectrum values.
    pub large_values: Vec<(u32, f64)>,
    pub tau: f64,
}

/// The extraction pipeline: split Psi, transform `y -> (-1)^(Psi(0,y))`,
/// read each inner sum off the spectrum at frequency `phi(x) + psi(x)`,
/// keep x above tau, pigeonhole the most frequent value r, and report the
/// affine map `x -> psi(x) + r` with its exact agreement set.
pub fn extract_affine_f2(
    phi: &PartialMap,
    psi: &QuadPolyF2,
    tau: f64,
) -> Result<ExtractionReport> {
    let (n, big_n) = f2_dims(phi)?;
    if n + big_n > 12 {
        return Err(Error::SizeGuard("extraction capped at n + N <= 12".into()));
    }
    if psi.dimension() != n + big_n {
        return Err(Error::InvalidParameter(format!(
            "Psi lives on F_2^{}, expected {}",
            psi.dimension(),
            n + big_n
        )));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter("tau must lie in (0, 1]".into()));
    }
    let split = mixed_derivative_split(psi, n, big_n)?;
    let g_fn = split.restriction_y.phase_fn()?;
    let spectrum = transform(&g_fn)?;
    let c00 = psi.constant();

    let mut inner_values = Vec::with_capacity(phi.len());
    let mut kept = Vec::new();
    let mut kept_freqs: Vec<u32> = Vec::new();
    for (&x, &img) in phi.support().iter().zip(phi.images().iter()) {
        // sign (-1)^(Psi(x,0) - Psi(0,0))
        let sign = if split.restriction_x.eval(x as u32) ^ c00 {
            -1.0
        } else {
            1.0
        };
        let freq = img as u32 ^ split.cross.apply(x as u32);
        let coeff = spectrum.coefficient(freq as u64);
        if coeff.im.abs() > TOL {
            return Err(Error::VerificationFailure(
                "spectrum of a (-1)-valued phase must be real".into(),
            ));
        }
        let value = sign * coeff.re;
        inner_values.push((x, value));
        if value.abs() >= tau {
            kept.push(x);
            kept_freqs.push(freq);
        }
    }

    // distinct large frequencies and the Plancherel count bound
    let mut distinct = kept_freqs.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let bound = 1.0 / (tau * tau) + TOL;
    if distinct.len() as f64 > bound {
        return Err(Error::VerificationFailure(format!(
            "{} distinct large values exceed tau^-2 = {}",
            distinct.len(),
            1.0 / (tau * tau)
        )));
    }
    let large_values: Vec<(u32, f64)> = distinct
        .iter()
        .map(|&xi| (xi, spectrum.coefficient(xi as u64).re))
        .collect();

    if kept.is_empty() {
        return Ok(ExtractionReport {
            recovered: None,
            agreement: vec![],
            agreement_fraction: 0.0,
            inner_values,
            kept,
            large_values,
            tau,
        });
    }

    // pigeonhole: most frequent value of phi(x) + psi(x) among kept x,
    // ties to the smallest value
    let r = {
        let mut best: Option<(usize, u32)> = None;
        for &cand in &distinct {
            let count = kept_freqs.iter().filter(|&&f| f == cand).count();
            match best {
                Some((bc, bv)) if bc > count || (bc == count && bv <= cand) => {}
                _ => best = Some((count, cand)),
            }
        }
        best.unwrap().1
    };

    let agreement: Vec<u64> = phi
        .support()
        .iter()
        .zip(phi.images().iter())
        .filter(|(&x, &img)| img as u32 == split.cross.apply(x as u32) ^ r)
        .map(|(&x, _)| x)
        .collect();
    let agreement_fraction = agreement.len() as f64 / phi.len().max(1) as f64;
    Ok(ExtractionReport {
        recovered: Some((split.cross.clone(), r)),
        agreement,
        agreement_fraction,
        inner_values,
        kept,
        large_values,
        tau,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsiMode {
    Planted(QuadPolyF2),
    Search,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndToEndReport {
    pub correlation: f64,
    pub psi: QuadPolyF2,
    pub extraction: ExtractionReport,
    pub sigma: f64,
}

/// Full pipeline: lift, find (or accept) a quadratic correlate, extract.
/// Search mode requires n + N <= 4. The default threshold is sigma^C.
pub fn end_to_end_f2(
    phi: &PartialMap,
    mode: PsiMode,
    tau: Option<f64>,
    c_exponent: f64,
) -> Result<EndToEndReport> {
    let instance = lift_f2(phi, true)?;
    let sigma = instance.sigma;
    let (psi, correlation) = match mode {
        PsiMode::Planted(psi) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for z in 0..instance.lifted.group().cardinality() {
                acc += instance.lifted.value(z) * psi.phase(z as u32);
            }
            let corr = acc.norm() / instance.lifted.group().cardinality() as f64;
            (psi, corr)
        }
        PsiMode::Search => best_quadratic_correlate(&instance.lifted)?,
    };
    let tau = tau.unwrap_or_else(|| {
        if sigma > 0.0 {
            sigma.powf(c_exponent).min(1.0)
        } else {
            1.0
        }
    });
    let extraction = extract_affine_f2(phi, &psi, tau)?;
    Ok(EndToEndReport {
        correlation,
        psi,
        extraction,
        sigma,
    })
}
