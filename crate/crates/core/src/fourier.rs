//! Fourier analysis on the supported groups.
//!
//! The transform averages over the group, `f^(xi) = E_x f(x) conj(chi_xi(x))`,
//! and the inverse sums over the dual, `f(x) = sum_xi f^(xi) chi_xi(x)`. The
//! dual is identified with the group itself through the standard characters:
//! `(-1)^(xi.x)` on `F_2^n`, `e(xi x / N)` on `Z/NZ`, products factor-wise.
//!
//! Length-2 axes (the `F_2^n` case) run through an in-place butterfly; other
//! axis lengths go through rustfft.

use num::complex::Complex64;
use rustfft::FftPlanner;

use crate::group::{DenseFn, GroupSpec};
use crate::{Error, Result, TOL};

#[derive(Debug, Clone)]
pub struct Spectrum {
    group: GroupSpec,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    /// Wraps an explicit coefficient table (dual indexed by the group).
    pub fn from_coefficients(group: GroupSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() as u64 != group.cardinality() {
            return Err(Error::InvalidParameter(
                "coefficient table length must equal |G|".into(),
            ));
        }
        Ok(Spectrum {
            group,
            coefficients,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, xi: u64) -> Complex64 {
        self.coefficients[xi as usize]
    }
}

/// Applies the DFT along every axis of the group, in place, without
/// normalization. `inverse` flips the character sign.
fn axis_transforms(values: &mut [Complex64], axes: &[u64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = 1usize;
    for &axis in axes {
        let s = axis as usize;
        if s > 1 {
            let block = s * stride;
            if s == 2 {
                for base in (0..values.len()).step_by(block) {
                    for off in 0..stride {
                        let i = base + off;
                        let j = i + stride;
                        let (u, v) = (values[i], values[j]);
                        values[i] = u + v;
                        values[j] = u - v;
                    }
                }
            } else {
                let fft = if inverse {
                    planner.plan_fft_inverse(s)
                } else {
                    planner.plan_fft_forward(s)
                };
                let mut scratch = vec![Complex64::new(0.0, 0.0); s];
                for base in (0..values.len()).step_by(block) {
                    for off in 0..stride {
                        for t in 0..s {
                            scratch[t] = values[base + off + t * stride];
                        }
                        fft.process(&mut scratch);
                        for t in 0..s {
                            values[base + off + t * stride] = scratch[t];
                        }
                    }
                }
            }
        }
        stride *= s;
    }
}

/// Fourier transform with E_x averaging. Verifies Parseval before returning.
pub fn transform(f: &DenseFn) -> Result<Spectrum> {
    let group = f.group().clone();
    group.check_dense_cap()?;
    let order = group.cardinality() as f64;
    let mut values = f.values().to_vec();
    axis_transforms(&mut values, &group.axes(), false);
    for v in values.iter_mut() {
        *v /= order;
    }
    let spectrum = Spectrum {
        group,
        coefficients: values,
    };
    let lhs: f64 = spectrum.coefficients.iter().map(|z| z.norm_sqr()).sum();
    let rhs: f64 = f.values().iter().map(|z| z.norm_sqr()).sum::<f64>() / order;
    if (lhs - rhs).abs() > TOL * (1.0 + rhs) {
        return Err(Error::VerificationFailure(format!(
            "Parseval violated: sum |f^|^2 = {lhs}, E|f|^2 = {rhs}"
        )));
    }
    Ok(spectrum)
}

/// Inverse transform, summing over the dual.
pub fn inverse(s: &Spectrum) -> Result<DenseFn> {
    let mut values = s.coefficients.clone();
    axis_transforms(&mut values, &s.group.axes(), true);
    DenseFn::new(s.group.clone(), values)
}

/// All coefficients with `|f^(xi)| >= tau`, sorted by descending magnitude
/// then ascending index. The Plancherel count bound is asserted.
pub fn large_coeffs(f: &DenseFn, tau: f64) -> Result<Vec<(u64, Complex64)>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let spectrum = transform(f)?;
    let mut out: Vec<(u64, Complex64)> = spectrum
        .coefficients
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() >= tau)
        .map(|(i, &z)| (i as u64, z))
        .collect();
    out.sort_by(|a, b| {
        b.1.norm()
            .partial_cmp(&a.1.norm())
            .unwrap()
            .then(a.0.cmp(&b.0))
    });
    let energy: f64 = f.values().iter().map(|z| z.norm_sqr()).sum::<f64>()
        / f.group().cardinality() as f64;
    let bound = (energy + TOL) / (tau * tau);
    if (out.len() as f64) > bound {
        return Err(Error::VerificationFailure(format!(
            "large-coefficient count {} exceeds Plancherel bound {}",
            out.len(),
            bound
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SieveReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Large sieve check: with `theta_j` pairwise delta-separated on R/Z,
/// `sum_j |sum_{y in [M]} f(y) e(y theta_j)|^2 <= (M + 1/delta) sum_y |f(y)|^2`,
/// the displayed inequality with the implied constant set to one.
pub fn large_sieve_check(f: &[Complex64], thetas: &[f64], delta: f64) -> Result<SieveReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    for i in 0..thetas.len() {
        for j in (i + 1)..thetas.len() {
            let d = circle_dist(thetas[i], thetas[j]);
            if d < delta - 1e-12 {
                return Err(Error::SeparationViolated(format!(
                    "theta_{i} and theta_{j} are {d} apart, below delta = {delta}"
                )));
            }
        }
    }
    let m = f.len();
    let mut lhs = 0.0;
    for &theta in thetas {
        let mut s = Complex64::new(0.0, 0.0);
        for (y, &fy) in f.iter().enumerate() {
            // y ranges over [M] = {1, ..., M}
            let phase = 2.0 * std::f64::consts::PI * ((y + 1) as f64) * theta;
            s += fy * Complex64::new(phase.cos(), phase.sin());
        }
        lhs += s.norm_sqr();
    }
    let energy: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let rhs = (m as f64 + 1.0 / delta) * energy;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(SieveReport {
        lhs,
        rhs,
        ratio,
        pass: lhs <= rhs + TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{indicator, GroupSet};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// O(N^2) transform straight from the character definition; the
    /// independent oracle for the fast paths.
    fn naive_transform(f: &DenseFn) -> Vec<Complex64> {
        let g = f.group();
        let order = g.cardinality();
        let axes = g.axes();
        (0..order)
            .map(|xi| {
                let mut acc = c(0.0, 0.0);
                for x in 0..order {
                    let xd = g.digits(x);
                    let xid = g.digits(xi);
                    let mut phase = 0.0;
                    for ((&a, &b), &ax) in xd.iter().zip(xid.iter()).zip(axes.iter()) {
                        phase += (a * b % ax) as f64 / ax as f64;
                    }
                    let ang = -2.0 * std::f64::consts::PI * phase;
                    acc += f.value(x) * c(ang.cos(), ang.sin());
                }
                acc / order as f64
            })
            .collect()
    }

    #[test]
    fn constant_function_transforms_to_delta() {
        let g = GroupSpec::f2(3);
        let f = DenseFn::constant(g, c(1.0, 0.0)).unwrap();
        let s = transform(&f).unwrap();
        assert!((s.coefficient(0) - 1.0).norm() < TOL);
        for xi in 1..8 {
            assert!(s.coefficient(xi).norm() < TOL);
        }
    }

    #[test]
    fn character_transforms_to_its_frequency() {
        let g = GroupSpec::f2(4);
        let b = 0b1011u64;
        let f = DenseFn::from_fn(g, |x| {
            c(if (x & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
        .unwrap();
        let s = transform(&f).unwrap();
        assert!((s.coefficient(b) - 1.0).norm() < TOL);
        let total: f64 = s
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i as u64 != b)
            .map(|(_, z)| z.norm())
            .sum();
        assert!(total < TOL);
    }

    #[test]
    fn matches_naive_dft_on_z12() {
        let g = GroupSpec::cyclic(12).unwrap();
        let f = DenseFn::from_fn(g, |x| c((x as f64 * 0.7).sin(), (x as f64 * 1.3).cos())).unwrap();
        let s = transform(&f).unwrap();
        let naive = naive_transform(&f);
        for (a, b) in s.coefficients().iter().zip(naive.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn matches_naive_dft_on_products() {
        let g = GroupSpec::product(vec![
            GroupSpec::cyclic(3).unwrap(),
            GroupSpec::f2(2),
            GroupSpec::cyclic(5).unwrap(),
        ])
        .unwrap();
        let f =
            DenseFn::from_fn(g, |x| c((x as f64 * 0.31).cos(), (x as f64 * 0.17).sin())).unwrap();
        let s = transform(&f).unwrap();
        let naive = naive_transform(&f);
        for (a, b) in s.coefficients().iter().zip(naive.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn roundtrip_inverse() {
        let g = GroupSpec::product(vec![GroupSpec::cyclic(6).unwrap(), GroupSpec::f2(3)]).unwrap();
        let f = DenseFn::from_fn(g, |x| c((x as f64).sin(), (x as f64 * 0.5).cos())).unwrap();
        let back = inverse(&transform(&f).unwrap()).unwrap();
        for (a, b) in f.values().iter().zip(back.values().iter()) {
            assert!((a - b).norm() < TOL);
        }
    }

    #[test]
    fn large_coeffs_character() {
        let g = GroupSpec::f2(3);
        let b = 0b101u64;
        let f = DenseFn::from_fn(g, |x| {
            c(if (x & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
        .unwrap();
        let out = large_coeffs(&f, 0.9).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, b);
        assert!((out[0].1 - 1.0).norm() < TOL);
    }

    #[test]
    fn large_coeffs_bounded_count() {
        let g = GroupSpec::f2(4);
        let s = GroupSet::new(g, vec![0, 1, 2, 3, 7, 9]).unwrap();
        let f = indicator(&s).unwrap();
        assert!(f.is_one_bounded());
        let out = large_coeffs(&f, 0.5).unwrap();
        assert!(out.len() <= 4);
    }

    #[test]
    fn large_coeffs_against_naive_scan() {
        let g = GroupSpec::f2(8);
        let f = DenseFn::from_fn(g, |x| {
            // deterministic pseudo-random signs
            let h = x.wrapping_mul(0x9e3779b97f4a7c15).rotate_left(17);
            c(if h & 1 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
        .unwrap();
        let out = large_coeffs(&f, 0.05).unwrap();
        let naive = naive_transform(&f);
        let expected: Vec<u64> = naive
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() >= 0.05)
            .map(|(i, _)| i as u64)
            .collect();
        let mut got: Vec<u64> = out.iter().map(|(i, _)| *i).collect();
        got.sort_unstable();
        assert_eq!(got, expected);
    }

    #[test]
    fn sieve_single_theta_cauchy_schwarz() {
        let f: Vec<Complex64> = (0..16).map(|y| c((y as f64).cos(), 0.3 * y as f64)).collect();
        let rep = large_sieve_check(&f, &[0.37], 0.25).unwrap();
        assert!(rep.pass);
        let energy: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        assert!(rep.lhs <= 16.0 * energy + TOL);
    }

    #[test]
    fn sieve_constant_function_exact_values() {
        let f = vec![c(1.0, 0.0); 10];
        let rep = large_sieve_check(&f, &[0.0], 0.5).unwrap();
        assert!((rep.lhs - 100.0).abs() < 1e-9);
        assert!((rep.rhs - 120.0).abs() < 1e-9);
        assert!(rep.pass);
    }

    #[test]
    fn sieve_rejects_close_points() {
        let f = vec![c(1.0, 0.0); 4];
        assert!(matches!(
            large_sieve_check(&f, &[0.1, 0.11], 0.25),
            Err(Error::SeparationViolated(_))
        ));
    }
}
