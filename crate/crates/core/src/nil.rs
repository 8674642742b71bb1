//! Heisenberg group arithmetic in exact rationals, commutator identities,
//! fundamental-domain reduction, vertical characters, bracket phase
//! polynomials and correlation.
//!
//! An element is the upper-triangular matrix with first row (1, a, c) and
//! second row (0, 1, b); the product rule is
//! `(a, b, c) (a', b', c') = (a + a', b + b', c + c' + a b')`. The lattice
//! Gamma consists of the integer-coordinate elements, with fundamental domain
//! fixed to coordinates in (-1/2, 1/2].

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};

use crate::group::{DenseFn, GroupSpec};
use crate::{Error, Result};

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Fractional part of a rational in (-1/2, 1/2], exact: t - ceil(t - 1/2).
pub fn rat_frac(t: &Rat) -> Rat {
    let shifted = t - rat(1, 2);
    t - Rat::from_integer(shifted.ceil().to_integer())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeisenbergElem {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
}

impl HeisenbergElem {
    pub fn new(a: Rat, b: Rat, c: Rat) -> Self {
        HeisenbergElem { a, b, c }
    }

    pub fn identity() -> Self {
        HeisenbergElem {
            a: Rat::zero(),
            b: Rat::zero(),
            c: Rat::zero(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer() && self.c.is_integer()
    }

    /// Central elements (0, 0, c) make up [G, G].
    pub fn is_central(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn mul(&self, other: &HeisenbergElem) -> HeisenbergElem {
        HeisenbergElem {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            c: &self.c + &other.c + &self.a * &other.b,
        }
    }

    pub fn inv(&self) -> HeisenbergElem {
        HeisenbergElem {
            a: -&self.a,
            b: -&self.b,
            c: &self.a * &self.b - &self.c,
        }
    }

    pub fn pow(&self, n: i64) -> HeisenbergElem {
        let mut acc = HeisenbergElem::identity();
        let base = if n >= 0 { self.clone() } else { self.inv() };
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }
}

/// Commutator [g, h] = g h g^-1 h^-1; central in a 2-step group, with
/// c-coordinate a b' - a' b.
pub fn heis_comm(g: &HeisenbergElem, h: &HeisenbergElem) -> HeisenbergElem {
    g.mul(h).mul(&g.inv()).mul(&h.inv())
}

/// Conjugation w^x = x w x^-1.
pub fn heis_conj(w: &HeisenbergElem, x: &HeisenbergElem) -> HeisenbergElem {
    x.mul(w).mul(&x.inv())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutatorCheck {
    /// [g^n, h] = [g, h]^n
    pub power_identity: bool,
    /// [g h, z] = [h, z]^g [g, z]
    pub product_identity: bool,
    /// [[g, h], z] = id
    pub centrality: bool,
}

impl CommutatorCheck {
    pub fn pass(&self) -> bool {
        self.power_identity && self.product_identity && self.centrality
    }
}

/// Verifies both commutator identities and 2-step centrality exactly.
pub fn check_commutator_identities(
    g: &HeisenbergElem,
    h: &HeisenbergElem,
    z: &HeisenbergElem,
    n: i64,
) -> CommutatorCheck {
    let power_identity = heis_comm(&g.pow(n), h) == heis_comm(g, h).pow(n);
    let product_identity =
        heis_comm(&g.mul(h), z) == heis_conj(&heis_comm(h, z), g).mul(&heis_comm(g, z));
    let centrality = heis_comm(&heis_comm(g, h), z).is_identity();
    CommutatorCheck {
        power_identity,
        product_identity,
        centrality,
    }
}

/// Splits g = {g} * floor(g) with floor(g) integral and {g} in the
/// fundamental domain (-1/2, 1/2]^3; the decomposition is exact.
pub fn heis_reduce(g: &HeisenbergElem) -> (HeisenbergElem, HeisenbergElem) {
    let fa = rat_frac(&g.a);
    let ia = &g.a - &fa;
    let fb = rat_frac(&g.b);
    let ib = &g.b - &fb;
    // {g} * floor(g) has c-coordinate fc + ic + fa * ib
    let c_rest = &g.c - &fa * &ib;
    let fc = rat_frac(&c_rest);
    let ic = &c_rest - &fc;
    let frac = HeisenbergElem::new(fa, fb, fc);
    let int = HeisenbergElem::new(ia, ib, ic);
    debug_assert!(int.is_integral());
    debug_assert_eq!(frac.mul(&int), *g);
    (frac, int)
}

/// e(m c) on the centre; trivial on Gamma cap [G, G].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerticalCharacter {
    pub weight: i64,
}

impl VerticalCharacter {
    pub fn eval(&self, central: &HeisenbergElem) -> Result<Complex64> {
        if !central.is_central() {
            return Err(Error::InvalidParameter(
                "vertical characters act on the centre (0, 0, c)".into(),
            ));
        }
        let t = rat_frac(&(Rat::from_integer(BigInt::from(self.weight)) * &central.c));
        let ang = 2.0 * std::f64::consts::PI * t.to_f64().unwrap();
        Ok(Complex64::new(ang.cos(), ang.sin()))
    }
}

fn frac_rz(t: f64) -> f64 {
    t - (t - 0.5).ceil()
}

fn e(t: f64) -> Complex64 {
    let ang = 2.0 * std::f64::consts::PI * t;
    Complex64::new(ang.cos(), ang.sin())
}

/// The bracket phase polynomial
/// `n -> e( sum_j alpha_j {beta_j n} {gamma_j n} + sum_k delta_k {eta_k n} )`
/// with fractional parts in (-1/2, 1/2].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BracketPhase {
    /// (alpha_j, beta_j, gamma_j) triples for the bracket-quadratic terms.
    pub quad: Vec<(f64, f64, f64)>,
    /// (delta_k, eta_k) pairs for the linear terms.
    pub lin: Vec<(f64, f64)>,
}

impl BracketPhase {
    pub fn eval(&self, n: i64) -> Complex64 {
        let nf = n as f64;
        let mut phase = 0.0;
        for &(alpha, beta, gamma) in &self.quad {
            phase += alpha * frac_rz(beta * nf) * frac_rz(gamma * nf);
        }
        for &(delta, eta) in &self.lin {
            phase += delta * frac_rz(eta * nf);
        }
        e(phase)
    }
}

/// `psi(x) = sum_j beta_j { alpha_j x - gamma_j }`, as a real number whose
/// class mod 1 is the phase.
pub fn psi_phase(betas: &[f64], alphas: &[f64], gammas: &[f64], x: i64) -> Result<f64> {
    if betas.len() != alphas.len() || betas.len() != gammas.len() {
        return Err(Error::InvalidParameter("coefficient lists must have equal length".into()));
    }
    let xf = x as f64;
    Ok(betas
        .iter()
        .zip(alphas)
        .zip(gammas)
        .map(|((&b, &a), &g)| b * frac_rz(a * xf - g))
        .sum())
}

/// Correlation `<f, F> = E_n f(n) conj(F(n))` over Z/NZ, the sequence indexed
/// by the canonical representatives 0..N-1.
pub fn correlate(f: &DenseFn, sequence: &dyn Fn(u64) -> Complex64) -> Result<Complex64> {
    match f.group() {
        GroupSpec::Cyclic { .. } => {}
        other => {
            return Err(Error::InvalidParameter(format!(
                "correlate expects a cyclic group, got {other}"
            )))
        }
    }
    let n = f.group().cardinality();
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..n {
        acc += f.value(x) * sequence(x).conj();
    }
    Ok(acc / n as f64)
}

/// The phase parameters realizing `chi([g^(4N), {g^x}])` as a bracket sum
/// `sum_j beta_j { alpha_j x - gamma_j }` for the symmetric fundamental
/// domain (where every gamma_j vanishes): with g = (a, b, *) and weight m,
/// the commutator has central coordinate `4Na {bx} - {ax} 4Nb`.
pub fn bridge_phase(
    g: &HeisenbergElem,
    weight: i64,
    big_n: u64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let scale = 4.0 * big_n as f64 * weight as f64;
    let a = g.a.to_f64().unwrap();
    let b = g.b.to_f64().unwrap();
    let betas = vec![scale * a, -scale * b];
    let alphas = vec![b, a];
    let gammas = vec![0.0, 0.0];
    (betas, alphas, gammas)
}

/// Left side of the bridge identity, computed exactly on the group:
/// `chi([g^(4N), {g^x}])`.
pub fn bridge_character_value(
    g: &HeisenbergElem,
    weight: i64,
    big_n: u64,
    x: i64,
) -> Result<Complex64> {
    let (frac, _) = heis_reduce(&g.pow(x));
    let comm = heis_comm(&g.pow(4 * big_n as i64), &frac);
    VerticalCharacter { weight }.eval(&comm)
}
