//! Gowers uniformity norms U^k for k = 1..4.
//!
//! `gowers_norm_naive` evaluates the defining average over k-dimensional
//! combinatorial cubes verbatim and serves as the oracle. `gowers_norm_fast`
//! uses the recursion `||f||_{U^k}^{2^k} = E_h ||D_h f||_{U^(k-1)}^{2^(k-1)}`
//! with the U^2 base case evaluated spectrally, costing O(|G|^2 log |G|) for
//! U^3 instead of O(|G|^4).

use num::complex::Complex64;

use crate::fourier::transform;
use crate::group::{DenseFn, GroupElem, GroupSpec, DENSE_CAP};
use crate::{real_nonneg, Error, Result, TOL};

/// Multiplicative derivative `f_h(x) = f(x+h) conj(f(x))`.
pub fn mult_derivative(f: &DenseFn, h: &GroupElem) -> Result<DenseFn> {
    if f.group() != h.group() {
        return Err(Error::GroupMismatch(
            f.group().to_string(),
            h.group().to_string(),
        ));
    }
    Ok(derivative_by_index(f, h.index()))
}

fn derivative_by_index(f: &DenseFn, h: u64) -> DenseFn {
    let g = f.group();
    let values: Vec<Complex64> = (0..g.cardinality())
        .map(|x| f.value(g.add_index(x, h)) * f.value(x).conj())
        .collect();
    DenseFn::new(g.clone(), values).expect("same group, same length")
}

/// Addition dispatch for the hot cube loops.
enum Adder {
    Xor,
    Table(Vec<u32>, usize),
    Direct(GroupSpec),
}

impl Adder {
    fn build(g: &GroupSpec) -> Adder {
        if g.as_f2().is_some() {
            return Adder::Xor;
        }
        let order = g.cardinality();
        if order <= 1024 {
            let n = order as usize;
            let mut table = vec![0u32; n * n];
            for i in 0..order {
                for j in 0..order {
                    table[(i * order + j) as usize] = g.add_index(i, j) as u32;
                }
            }
            Adder::Table(table, n)
        } else {
            Adder::Direct(g.clone())
        }
    }

    #[inline]
    fn add(&self, i: u64, j: u64) -> u64 {
        match self {
            Adder::Xor => i ^ j,
            Adder::Table(t, n) => t[i as usize * n + j as usize] as u64,
            Adder::Direct(g) => g.add_index(i, j),
        }
    }
}

fn naive_guard(order: u64, k: u8) -> Result<()> {
    let cap = match k {
        1 => 1u64 << 16,
        2 => 1 << 12,
        3 => 1 << 10,
        4 => 1 << 8,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "U^{k} is not supported; k must be 1..4"
            )))
        }
    };
    if order > cap {
        return Err(Error::SizeGuard(format!(
            "naive U^{k} on |G| = {order} exceeds guard {cap}"
        )));
    }
    Ok(())
}

/// The U^k norm straight from the defining average.
pub fn gowers_norm_naive(f: &DenseFn, k: u8) -> Result<f64> {
    let g = f.group();
    let order = g.cardinality();
    naive_guard(order, k)?;
    let add = Adder::build(g);
    let v = f.values();
    let mut acc = Complex64::new(0.0, 0.0);
    match k {
        1 => {
            for h in 0..order {
                for x in 0..order {
                    acc += v[x as usize] * v[add.add(x, h) as usize].conj();
                }
            }
        }
        2 => {
            for h1 in 0..order {
                for h2 in 0..order {
                    let h12 = add.add(h1, h2);
                    for x in 0..order {
                        acc += v[x as usize]
                            * v[add.add(x, h1) as usize].conj()
                            * v[add.add(x, h2) as usize].conj()
                            * v[add.add(x, h12) as usize];
                    }
                }
            }
        }
        3 => {
            for h1 in 0..order {
                for h2 in 0..order {
                    let h12 = add.add(h1, h2);
                    for h3 in 0..order {
                        let h13 = add.add(h1, h3);
                        let h23 = add.add(h2, h3);
                        let h123 = add.add(h12, h3);
                        for x in 0..order {
                            let w = v[x as usize]
                                * v[add.add(x, h1) as usize].conj()
                                * v[add.add(x, h2) as usize].conj()
                                * v[add.add(x, h3) as usize].conj()
                                * v[add.add(x, h12) as usize]
                                * v[add.add(x, h13) as usize]
                                * v[add.add(x, h23) as usize]
                                * v[add.add(x, h123) as usize].conj();
                            acc += w;
                        }
                    }
                }
            }
        }
        4 => {
            // offsets indexed by the vertex mask of {0,1}^4
            let mut off = [0u64; 16];
            for h1 in 0..order {
                off[1] = h1;
                for h2 in 0..order {
                    off[2] = h2;
                    off[3] = add.add(h1, h2);
                    for h3 in 0..order {
                        off[4] = h3;
                        for m in 5..8 {
                            off[m] = add.add(off[m & 3], h3);
                        }
                        for h4 in 0..order {
                            off[8] = h4;
                            for m in 9..16 {
                                off[m] = add.add(off[m & 7], h4);
                            }
                            for x in 0..order {
                                let mut w = Complex64::new(1.0, 0.0);
                                for (m, &o) in off.iter().enumerate() {
                                    let z = v[add.add(x, o) as usize];
                                    w *= if (m as u32).count_ones() % 2 == 1 {
                                        z.conj()
                                    } else {
                                        z
                                    };
                                }
                                acc += w;
                            }
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    let total = (order as f64).powi(k as i32 + 1);
    let mean = acc / total;
    let mut val = real_nonneg(mean, "Gowers average")?;
    for _ in 0..k {
        val = val.sqrt();
    }
    Ok(val)
}

fn fast_guard(order: u64, k: u8) -> Result<()> {
    let cap = match k {
        1 | 2 => DENSE_CAP,
        3 => 1 << 14,
        4 => 1 << 10,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "U^{k} is not supported; k must be 1..4"
            )))
        }
    };
    if order > cap {
        return Err(Error::SizeGuard(format!(
            "fast U^{k} on |G| = {order} exceeds cap {cap}"
        )));
    }
    Ok(())
}

/// U^2 norm to the fourth power, via the spectral identity
/// `||f||_{U^2}^4 = sum_xi |f^(xi)|^4`.
fn u2_fourth(f: &DenseFn) -> Result<f64> {
    let s = transform(f)?;
    Ok(s.coefficients().iter().map(|z| z.norm_sqr().powi(2)).sum())
}

fn fast_power(f: &DenseFn, k: u8) -> Result<f64> {
    // returns ||f||_{U^k}^{2^k}
    match k {
        1 => Ok(f.mean().norm_sqr()),
        2 => u2_fourth(f),
        _ => {
            let g = f.group();
            let order = g.cardinality();
            let mut acc = 0.0;
            for h in 0..order {
                let fh = derivative_by_index(f, h);
                acc += fast_power(&fh, k - 1)?;
            }
            Ok(acc / order as f64)
        }
    }
}

/// Fast U^k via the derivative recursion; agrees with the naive evaluation
/// within 1e-9 wherever both run.
pub fn gowers_norm_fast(f: &DenseFn, k: u8) -> Result<f64> {
    fast_guard(f.group().cardinality(), k)?;
    let mut val = fast_power(f, k)?.max(0.0);
    for _ in 0..k {
        val = val.sqrt();
    }
    Ok(val)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MonotonicityReport {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub pass: bool,
}

/// Checks U^1 <= U^2 <= U^3 for a 1-bounded function.
pub fn monotonicity_check(f: &DenseFn) -> Result<MonotonicityReport> {
    if !f.is_one_bounded() {
        return Err(Error::InvalidParameter(
            "monotonicity check requires ||f||_inf <= 1".into(),
        ));
    }
    let u1 = gowers_norm_fast(f, 1)?;
    let u2 = gowers_norm_fast(f, 2)?;
    let u3 = gowers_norm_fast(f, 3)?;
    let pass = u1 <= u2 + TOL && u2 <= u3 + TOL;
    Ok(MonotonicityReport { u1, u2, u3, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{indicator, GroupSet};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pm1(expr: bool) -> Complex64 {
        c(if expr { -1.0 } else { 1.0 }, 0.0)
    }

    fn pseudo_random_fn(g: &GroupSpec, salt: u64) -> DenseFn {
        DenseFn::from_fn(g.clone(), |x| {
            let h = (x ^ salt).wrapping_mul(0x9e3779b97f4a7c15);
            let a = (h >> 11) as f64 / (1u64 << 53) as f64;
            let b = (h.wrapping_mul(0xd1342543de82ef95) >> 11) as f64 / (1u64 << 53) as f64;
            let r = a.sqrt();
            let th = 2.0 * std::f64::consts::PI * b;
            c(r * th.cos(), r * th.sin())
        })
        .unwrap()
    }

    #[test]
    fn derivative_at_zero_is_modulus_squared() {
        let g = GroupSpec::cyclic(9).unwrap();
        let f = pseudo_random_fn(&g, 1);
        let d = mult_derivative(&f, &g.zero()).unwrap();
        for (a, b) in d.values().iter().zip(f.values().iter()) {
            assert!((a - b.norm_sqr()).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_linear_phase_is_constant() {
        let g = GroupSpec::f2(4);
        let b = 0b0110u64;
        let f = DenseFn::from_fn(g.clone(), |x| pm1((x & b).count_ones() % 2 == 1)).unwrap();
        for h in 0..16u64 {
            let d = derivative_by_index(&f, h);
            let expected = pm1((h & b).count_ones() % 2 == 1);
            for v in d.values() {
                assert!((v - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_of_quadratic_phase_is_linear_phase_times_constant() {
        // psi(x) = x . Mx over F_2^3: Delta_h psi(x) = x.(M + M^t)h + h.Mh
        let g = GroupSpec::f2(3);
        let m_rows: [u64; 3] = [0b011, 0b100, 0b101];
        let quad = |x: u64| -> u64 {
            let mut s = 0;
            for (i, &row) in m_rows.iter().enumerate() {
                if (x >> i) & 1 == 1 {
                    s += (row & x).count_ones() as u64;
                }
            }
            s % 2
        };
        let f = DenseFn::from_fn(g.clone(), |x| pm1(quad(x) == 1)).unwrap();
        for h in 0..8u64 {
            let d = derivative_by_index(&f, h);
            for x in 0..8u64 {
                let expected = (quad(x ^ h) + quad(x)) % 2;
                assert!((d.value(x) - pm1(expected == 1)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_function_has_unit_norms() {
        let g = GroupSpec::cyclic(6).unwrap();
        let f = DenseFn::constant(g, c(1.0, 0.0)).unwrap();
        for k in 1..=4u8 {
            assert!((gowers_norm_naive(&f, k).unwrap() - 1.0).abs() < TOL);
            assert!((gowers_norm_fast(&f, k).unwrap() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn quadratic_phase_has_unit_u3() {
        let g = GroupSpec::f2(4);
        let quad = |x: u64| -> u64 {
            // x1 x2 + x3 x4 + x2
            let b = |i: u64| (x >> i) & 1;
            (b(0) * b(1) + b(2) * b(3) + b(1)) % 2
        };
        let f = DenseFn::from_fn(g, |x| pm1(quad(x) == 1)).unwrap();
        assert!((gowers_norm_naive(&f, 3).unwrap() - 1.0).abs() < TOL);
        assert!((gowers_norm_fast(&f, 3).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn fast_equals_naive_on_random_functions() {
        for (g, salt) in [
            (GroupSpec::f2(4), 7u64),
            (GroupSpec::f2(5), 8),
            (GroupSpec::cyclic(18).unwrap(), 9),
            (
                GroupSpec::product(vec![GroupSpec::cyclic(3).unwrap(), GroupSpec::f2(2)]).unwrap(),
                10,
            ),
            (GroupSpec::vector(5, 2).unwrap(), 11),
        ] {
            let f = pseudo_random_fn(&g, salt);
            for k in 1..=3u8 {
                let a = gowers_norm_naive(&f, k).unwrap();
                let b = gowers_norm_fast(&f, k).unwrap();
                assert!((a - b).abs() < TOL, "group {g}, k = {k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fast_equals_naive_u4_small() {
        let g = GroupSpec::f2(3);
        let f = pseudo_random_fn(&g, 21);
        let a = gowers_norm_naive(&f, 4).unwrap();
        let b = gowers_norm_fast(&f, 4).unwrap();
        assert!((a - b).abs() < TOL);
    }

    #[test]
    fn subgroup_indicator_norm_matches_naive() {
        let g = GroupSpec::f2(4);
        // H = span(e0, e1)
        let h: Vec<u64> = (0..16).filter(|x| x & 0b1100 == 0).collect();
        let f = indicator(&GroupSet::new(g, h).unwrap()).unwrap();
        for k in 1..=3u8 {
            let a = gowers_norm_naive(&f, k).unwrap();
            let b = gowers_norm_fast(&f, k).unwrap();
            assert!((a - b).abs() < TOL);
        }
    }

    #[test]
    fn monotonicity_trivial_and_indicator() {
        let g = GroupSpec::f2(4);
        let one = DenseFn::constant(g.clone(), c(1.0, 0.0)).unwrap();
        let rep = monotonicity_check(&one).unwrap();
        assert!(rep.pass);
        assert!((rep.u1 - 1.0).abs() < TOL && (rep.u3 - 1.0).abs() < TOL);

        let s = GroupSet::new(g, vec![1, 2, 4, 9, 11, 14]).unwrap();
        let f = indicator(&s).unwrap();
        let rep = monotonicity_check(&f).unwrap();
        assert!(rep.pass);
        // U^1 of an indicator is its mean
        assert!((rep.u1 - 6.0 / 16.0).abs() < TOL);
    }

    #[test]
    fn u1_equals_absolute_mean() {
        let g = GroupSpec::cyclic(12).unwrap();
        let f = pseudo_random_fn(&g, 3);
        let naive = gowers_norm_naive(&f, 1).unwrap();
        assert!((naive - f.mean().norm()).abs() < TOL);
    }

    #[test]
    fn size_guards_fire() {
        let g = GroupSpec::f2(11);
        let f = DenseFn::constant(g, c(1.0, 0.0)).unwrap();
        assert!(matches!(gowers_norm_naive(&f, 3), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn translation_invariance() {
        let g = GroupSpec::f2(4);
        let f = pseudo_random_fn(&g, 5);
        let shifted = f.translate(11);
        for k in 1..=3u8 {
            let a = gowers_norm_fast(&f, k).unwrap();
            let b = gowers_norm_fast(&shifted, k).unwrap();
            assert!((a - b).abs() < TOL);
        }
    }
}
