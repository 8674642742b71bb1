//! Quadratic polynomials over `F_2` and odd `F_p`: the mixed-derivative
//! decomposition, rank and `V_Q` extraction, Gauss-sum magnitudes, the
//! symmetric split `B = M + M^t`, brute-force quadratic-correlate search, and
//! the rank-recovery algorithm for linearly varying low-rank forms.

use num::complex::Complex64;

use crate::f2::{mask_lo, parity, BitMatrix};
use crate::fp::{in_span, intersection_dim, inv_mod, span_rank, FpMatrix};
use crate::group::{DenseFn, GroupSet, GroupSpec};
use crate::{Error, Result};

/// A quadratic polynomial `psi(x) = x . Mx + b . x + c` over `F_2`, stored in
/// the canonical unique form: `M` strictly upper triangular (the diagonal of
/// a general representation folds into `b`, since `x^2 = x`).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QuadPolyF2 {
    n: u32,
    upper: Vec<u32>,
    b: u32,
    c: bool,
}

impl QuadPolyF2 {
    pub fn new(n: u32, upper: Vec<u32>, b: u32, c: bool) -> Result<Self> {
        if n > 24 {
            return Err(Error::SizeGuard("quadratic polynomials capped at n <= 24".into()));
        }
        if upper.len() != n as usize {
            return Err(Error::InvalidParameter("row count must equal n".into()));
        }
        for (i, &row) in upper.iter().enumerate() {
            let strict = mask_lo(n) & !mask_lo(i as u32 + 1);
            if row & !strict != 0 {
                return Err(Error::InvalidParameter(format!(
                    "row {i} is not strictly upper triangular"
                )));
            }
        }
        if b & !mask_lo(n) != 0 {
            return Err(Error::InvalidParameter("linear part exceeds dimension".into()));
        }
        Ok(QuadPolyF2 { n, upper, b, c })
    }

    pub fn zero(n: u32) -> Self {
        QuadPolyF2 {
            n,
            upper: vec![0; n as usize],
            b: 0,
            c: false,
        }
    }

    /// Canonicalizes an arbitrary matrix representation: the off-diagonal
    /// part symmetrizes into the strict upper triangle, the diagonal joins
    /// the linear term.
    pub fn from_matrix(n: u32, rows: &[u32], b: u32, c: bool) -> Result<Self> {
        if rows.len() != n as usize {
            return Err(Error::InvalidParameter("row count must equal n".into()));
        }
        let mut upper = vec![0u32; n as usize];
        let mut lin = b & mask_lo(n);
        for i in 0..n as usize {
            for j in 0..n as usize {
                if rows[i] >> j & 1 == 1 {
                    match i.cmp(&j) {
                        std::cmp::Ordering::Less => upper[i] ^= 1 << j,
                        std::cmp::Ordering::Greater => upper[j] ^= 1 << i,
                        std::cmp::Ordering::Equal => lin ^= 1 << i,
                    }
                }
            }
        }
        QuadPolyF2::new(n, upper, lin, c)
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn upper_rows(&self) -> &[u32] {
        &self.upper
    }

    pub fn linear(&self) -> u32 {
        self.b
    }

    pub fn constant(&self) -> bool {
        self.c
    }

    pub fn eval(&self, x: u32) -> bool {
        let mut acc = parity(self.b & x) ^ self.c as u32;
        let mut rest = x;
        while rest != 0 {
            let i = rest.trailing_zeros();
            acc ^= parity(self.upper[i as usize] & x);
            rest &= rest - 1;
        }
        acc == 1
    }

    /// The phase value (-1)^psi(x).
    pub fn phase(&self, x: u32) -> f64 {
        if self.eval(x) {
            -1.0
        } else {
            1.0
        }
    }

    /// The phase as a dense function on F_2^n.
    pub fn phase_fn(&self) -> Result<DenseFn> {
        DenseFn::from_fn(GroupSpec::f2(self.n), |x| {
            Complex64::new(self.phase(x as u32), 0.0)
        })
    }

    pub fn add(&self, other: &QuadPolyF2) -> Result<QuadPolyF2> {
        if self.n != other.n {
            return Err(Error::InvalidParameter("dimension mismatch".into()));
        }
        let upper = self
            .upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| a ^ b)
            .collect();
        QuadPolyF2::new(self.n, upper, self.b ^ other.b, self.c ^ other.c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedSplit {
    /// The linear map psi with B(x, y) = psi(x) . y, an N x n bit matrix.
    pub cross: BitMatrix,
    /// Psi(0, y) as a quadratic on the y block.
    pub restriction_y: QuadPolyF2,
    /// Psi(x, 0) as a quadratic on the x block.
    pub restriction_x: QuadPolyF2,
}

/// Splits a quadratic on `F_2^(n+N)` (x block in the low n bits) into
/// `Psi(x,y) = Psi(0,y) + Psi(x,0) - Psi(0,0) + psi(x) . y`, verifying the
/// identity exhaustively when n + N <= 12.
pub fn mixed_derivative_split(psi: &QuadPolyF2, n: u32, big_n: u32) -> Result<MixedSplit> {
    if psi.n != n + big_n {
        return Err(Error::InvalidParameter(format!(
            "polynomial lives on F_2^{}, expected n + N = {}",
            psi.n,
            n + big_n
        )));
    }
    // cross matrix: row j (output coordinate y_j) collects coefficients of
    // x_i y_(n+j) from the strict upper triangle
    let rows = (0..big_n)
        .map(|j| {
            let mut row = 0u32;
            for i in 0..n {
                if psi.upper[i as usize] >> (n + j) & 1 == 1 {
                    row |= 1 << i;
                }
            }
            row
        })
        .collect();
    let cross = BitMatrix::new(rows, n)?;
    let restriction_y = {
        let upper = (0..big_n)
            .map(|j| (psi.upper[(n + j) as usize] >> n) & mask_lo(big_n))
            .collect();
        QuadPolyF2::new(big_n, upper, (psi.b >> n) & mask_lo(big_n), psi.c)?
    };
    let restriction_x = {
        let upper = (0..n).map(|i| psi.upper[i as usize] & mask_lo(n)).collect();
        QuadPolyF2::new(n, upper, psi.b & mask_lo(n), psi.c)?
    };
    if n + big_n <= 12 {
        for z in 0..(1u32 << (n + big_n)) {
            let x = z & mask_lo(n);
            let y = z >> n;
            let lhs = psi.eval(z);
            let rhs = restriction_y.eval(y)
                ^ restriction_x.eval(x)
                ^ psi.c
                ^ (parity(cross.apply(x) & y) == 1);
            if lhs != rhs {
                return Err(Error::VerificationFailure(format!(
                    "mixed-derivative identity fails at z = {z}"
                )));
            }
        }
    }
    Ok(MixedSplit {
        cross,
        restriction_y,
        restriction_x,
    })
}

/// Splits a symmetric zero-diagonal matrix as `B = M + M^t` with `M` the
/// strict upper triangle of `B`.
pub fn symmetric_split_f2(b: &[u32], n: u32) -> Result<Vec<u32>> {
    if b.len() != n as usize {
        return Err(Error::InvalidParameter("row count must equal n".into()));
    }
    for i in 0..n as usize {
        if b[i] >> i & 1 == 1 {
            return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
        }
        for j in 0..n as usize {
            if (b[i] >> j & 1) != (b[j] >> i & 1) {
                return Err(Error::InvalidParameter("matrix is not symmetric".into()));
            }
        }
    }
    let m: Vec<u32> = (0..n as usize)
        .map(|i| b[i] & !mask_lo(i as u32 + 1))
        .collect();
    // exact identity M + M^t = B
    for i in 0..n as usize {
        for j in 0..n as usize {
            let mij = (m[i] >> j & 1) ^ (m[j] >> i & 1);
            if mij != (b[i] >> j & 1) {
                return Err(Error::VerificationFailure("split identity failed".into()));
            }
        }
    }
    Ok(m)
}

/// A quadratic form over an odd prime field: `Q(y) = y . Ay + l . y + c`
/// with `A` symmetric.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QuadFormFp {
    pub p: u64,
    pub dim: u32,
    pub matrix: Vec<Vec<u64>>,
    pub linear: Vec<u64>,
    pub constant: u64,
}

impl QuadFormFp {
    pub fn new(
        p: u64,
        dim: u32,
        matrix: Vec<Vec<u64>>,
        linear: Vec<u64>,
        constant: u64,
    ) -> Result<Self> {
        if p < 3 || p % 2 == 0 {
            return Err(Error::InvalidParameter(
                "quadratic forms require an odd prime field".into(),
            ));
        }
        let m = FpMatrix::new(p, matrix)?;
        if m.nrows() != dim as usize || m.ncols() != dim as usize {
            return Err(Error::InvalidParameter("matrix must be dim x dim".into()));
        }
        if !m.is_symmetric() {
            return Err(Error::InvalidParameter("matrix must be symmetric".into()));
        }
        if linear.len() != dim as usize {
            return Err(Error::InvalidParameter("linear part must have length dim".into()));
        }
        Ok(QuadFormFp {
            p,
            dim,
            matrix: m.entries,
            linear: linear.into_iter().map(|x| x % p).collect(),
            constant: constant % p,
        })
    }

    pub fn zero(p: u64, dim: u32) -> Result<Self> {
        QuadFormFp::new(p, dim, vec![vec![0; dim as usize]; dim as usize], vec![0; dim as usize], 0)
    }

    /// Builds from coefficients q_ij (i <= j) of the monomials y_i y_j, using
    /// the symmetric representative A_ij = q_ij / 2 off the diagonal.
    pub fn from_upper_coeffs(
        p: u64,
        dim: u32,
        coeffs: &[(usize, usize, u64)],
        linear: Vec<u64>,
        constant: u64,
    ) -> Result<Self> {
        let inv2 = inv_mod(2, p);
        let mut matrix = vec![vec![0u64; dim as usize]; dim as usize];
        for &(i, j, q) in coeffs {
            if i > j || j >= dim as usize {
                return Err(Error::InvalidParameter("bad monomial index".into()));
            }
            if i == j {
                matrix[i][i] = (matrix[i][i] + q) % p;
            } else {
                let half = q % p * inv2 % p;
                matrix[i][j] = (matrix[i][j] + half) % p;
                matrix[j][i] = (matrix[j][i] + half) % p;
            }
        }
        QuadFormFp::new(p, dim, matrix, linear, constant)
    }

    pub fn fp_matrix(&self) -> FpMatrix {
        FpMatrix {
            p: self.p,
            entries: self.matrix.clone(),
        }
    }

    pub fn eval(&self, y: &[u64]) -> u64 {
        let p = self.p as u128;
        let mut acc: u128 = self.constant as u128;
        for i in 0..self.dim as usize {
            acc = (acc + self.linear[i] as u128 * y[i] as u128) % p;
            for j in 0..self.dim as usize {
                acc = (acc + self.matrix[i][j] as u128 * y[i] as u128 % p * y[j] as u128) % p;
            }
        }
        acc as u64
    }

    pub fn homogeneous_part(&self) -> QuadFormFp {
        QuadFormFp {
            p: self.p,
            dim: self.dim,
            matrix: self.matrix.clone(),
            linear: vec![0; self.dim as usize],
            constant: 0,
        }
    }

    pub fn add(&self, other: &QuadFormFp) -> Result<QuadFormFp> {
        if self.p != other.p || self.dim != other.dim {
            return Err(Error::InvalidParameter("form mismatch".into()));
        }
        let matrix = self.fp_matrix().add(&other.fp_matrix()).entries;
        let linear = self
            .linear
            .iter()
            .zip(&other.linear)
            .map(|(a, b)| (a + b) % self.p)
            .collect();
        QuadFormFp::new(self.p, self.dim, matrix, linear, (self.constant + other.constant) % self.p)
    }

    pub fn sub(&self, other: &QuadFormFp) -> Result<QuadFormFp> {
        self.add(&other.scale(self.p - 1))
    }

    pub fn scale(&self, k: u64) -> QuadFormFp {
        let k = k % self.p;
        QuadFormFp {
            p: self.p,
            dim: self.dim,
            matrix: self.fp_matrix().scale(k).entries,
            linear: self.linear.iter().map(|&x| x * k % self.p).collect(),
            constant: self.constant * k % self.p,
        }
    }

    pub fn is_zero_homogeneous(&self) -> bool {
        self.matrix.iter().all(|r| r.iter().all(|&x| x == 0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVq {
    pub rank: u32,
    /// Basis of V_Q, the column space of the symmetric matrix.
    pub basis: Vec<Vec<u64>>,
}

/// rank(Q) and V_Q for an odd-characteristic form; verifies that the
/// homogeneous part is invariant under translation by kernel vectors.
pub fn rank_and_vq(q: &QuadFormFp) -> Result<RankVq> {
    let m = q.fp_matrix();
    let rank = m.rank() as u32;
    let basis = m.column_space_basis();
    // w perpendicular to V_Q means Aw = 0; homogeneous parts then agree on
    // y and y + w. Spot-verify on the kernel basis.
    let hom = q.homogeneous_part();
    for w in m.kernel_basis() {
        for probe in 0..3u64 {
            let y: Vec<u64> = (0..q.dim as u64)
                .map(|i| (i * 7 + probe * 3 + 1) % q.p)
                .collect();
            let yw: Vec<u64> = y.iter().zip(&w).map(|(&a, &b)| (a + b) % q.p).collect();
            if hom.eval(&y) != hom.eval(&yw) {
                return Err(Error::VerificationFailure(
                    "homogeneous part varies along the radical".into(),
                ));
            }
        }
    }
    Ok(RankVq {
        rank,
        basis,
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GaussReport {
    pub magnitude: f64,
    pub rank: u32,
    /// p^(-rank/2), the nonzero branch of the dichotomy.
    pub expected: f64,
    /// Distance to the nearer branch (0 or p^(-rank/2)).
    pub delta: f64,
}

/// Magnitude of `E_y e_F(Q(y) + l . y)` for the difference form
/// `Q = Qx - Qx2`; the exact Gauss dichotomy puts it at 0 or p^(-rk(Q)/2).
pub fn gauss_inner(qx: &QuadFormFp, qx2: &QuadFormFp, shift: &[u64]) -> Result<GaussReport> {
    let diff = qx.sub(qx2)?;
    let p = diff.p;
    let dim = diff.dim;
    let total = (p as f64).powi(dim as i32) as u64;
    if total > 78_125 {
        return Err(Error::SizeGuard("Gauss sum capped at p^N <= 5^7".into()));
    }
    if shift.len() != dim as usize {
        return Err(Error::InvalidParameter("shift length mismatch".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut y = vec![0u64; dim as usize];
    for idx in 0..total {
        let mut rest = idx;
        for d in y.iter_mut() {
            *d = rest % p;
            rest /= p;
        }
        let mut val = diff.eval(&y);
        for (a, b) in shift.iter().zip(&y) {
            val = (val + a * b) % p;
        }
        let ang = 2.0 * std::f64::consts::PI * val as f64 / p as f64;
        acc += Complex64::new(ang.cos(), ang.sin());
    }
    let magnitude = acc.norm() / total as f64;
    let rank = rank_and_vq(&diff.homogeneous_part())?.rank;
    let expected = (p as f64).powf(-(rank as f64) / 2.0);
    let delta = magnitude.min((magnitude - expected).abs());
    Ok(GaussReport {
        magnitude,
        rank,
        expected,
        delta,
    })
}

/// Exhaustive search for the quadratic phase maximizing `|<f, (-1)^psi>|`
/// over F_2^n, n <= 4. The enumeration walks matrix coefficients (upper
/// triangle including the redundant diagonal), then the linear part, then the
/// constant, in lexicographic order; the first maximizer wins, and since the
/// constant only flips sign the winner always carries c = 0.
pub fn best_quadratic_correlate(f: &DenseFn) -> Result<(QuadPolyF2, f64)> {
    let n = match f.group() {
        GroupSpec::Vector { p: 2, n } => *n,
        other => {
            return Err(Error::InvalidParameter(format!(
                "correlate search needs F_2^n, got {other}"
            )))
        }
    };
    if n > 4 {
        return Err(Error::SizeGuard("correlate search capped at n <= 4".into()));
    }
    let order = 1u64 << n;
    let pairs: Vec<(usize, usize)> = (0..n as usize)
        .flat_map(|i| (i..n as usize).map(move |j| (i, j)))
        .collect();
    let mut best: Option<(QuadPolyF2, f64)> = None;
    for m_bits in 0u64..(1 << pairs.len()) {
        let mut rows = vec![0u32; n as usize];
        for (t, &(i, j)) in pairs.iter().enumerate() {
            if m_bits >> t & 1 == 1 {
                rows[i] |= 1 << j;
            }
        }
        for b in 0u32..(1 << n) {
            for c in [false, true] {
                let psi = QuadPolyF2::from_matrix(n, &rows, b, c)?;
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..order {
                    acc += f.value(x) * psi.phase(x as u32);
                }
                let corr = acc.norm() / order as f64;
                if best.as_ref().map_or(true, |(_, bc)| corr > *bc) {
                    best = Some((psi, corr));
                }
            }
        }
    }
    Ok(best.expect("nonempty search space"))
}

/// A linear map `x -> Q_x` from `F_p^n` to quadratic forms on `F_p^N`,
/// stored through its values on the standard basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFormFamily {
    pub p: u64,
    /// Dimension of the x-space.
    pub n: u32,
    /// Dimension of the y-space the forms act on.
    pub dim: u32,
    pub basis_forms: Vec<QuadFormFp>,
}

impl LinearFormFamily {
    pub fn new(p: u64, n: u32, dim: u32, basis_forms: Vec<QuadFormFp>) -> Result<Self> {
        if basis_forms.len() != n as usize {
            return Err(Error::InvalidParameter("need one form per basis vector".into()));
        }
        for f in &basis_forms {
            if f.p != p || f.dim != dim {
                return Err(Error::InvalidParameter("basis form mismatch".into()));
            }
        }
        Ok(LinearFormFamily {
            p,
            n,
            dim,
            basis_forms,
        })
    }

    pub fn x_group(&self) -> Result<GroupSpec> {
        GroupSpec::vector(self.p, self.n)
    }

    /// Q_x for the element with the given index in `F_p^n`.
    pub fn form_at(&self, x_index: u64) -> Result<QuadFormFp> {
        let mut acc = QuadFormFp::zero(self.p, self.dim)?;
        let mut rest = x_index;
        for form in &self.basis_forms {
            let digit = rest % self.p;
            rest /= self.p;
            if digit != 0 {
                acc = acc.add(&form.scale(digit))?;
            }
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RankLineReport {
    /// Basis of the recovered space V.
    pub v_basis: Vec<Vec<u64>>,
    /// The sub-collection A' with V_x inside V for every member.
    pub a_prime: Vec<u64>,
    pub fraction: f64,
    /// True when the projective enumeration was replaced by pair sampling.
    pub heuristic: bool,
    /// True when the kernel pre-pass already met the requested fraction.
    pub prepass: bool,
    /// True when no incidence-positive vector existed and the output fell
    /// back to V_x of the smallest-index element.
    pub fallback: bool,
}

const PROJECTIVE_ENUM_CAP: u64 = 15_625; // 5^6

fn projective_reps(p: u64, dim: u32) -> Vec<Vec<u64>> {
    let total = p.pow(dim);
    let mut reps = Vec::new();
    for idx in 1..total {
        let mut v = vec![0u64; dim as usize];
        let mut rest = idx;
        for d in v.iter_mut() {
            *d = rest % p;
            rest /= p;
        }
        // canonical representative: first nonzero coordinate equals 1
        let first = v.iter().find(|&&x| x != 0).copied().unwrap();
        if first == 1 {
            reps.push(v);
        }
    }
    reps
}

fn vector_in_column_space(p: u64, basis: &[Vec<u64>], v: &[u64]) -> bool {
    in_span(p, basis, v)
}

/// Recovers a subspace V of dimension at most r containing V_x for a
/// sub-collection of A, mirroring the incidence-counting recursion: while
/// dim V < r, adjoin the projective vector lying in the most spaces V_x,
/// then return {x : V_x inside V}.
pub fn rank_line_recover(
    family: &LinearFormFamily,
    a: &GroupSet,
    r: u32,
    min_fraction: Option<f64>,
) -> Result<RankLineReport> {
    if *a.group() != family.x_group()? {
        return Err(Error::GroupMismatch(
            a.group().to_string(),
            family.x_group()?.to_string(),
        ));
    }
    if a.is_empty() {
        return Err(Error::InvalidParameter("A must be nonempty".into()));
    }
    let p = family.p;
    // V_x bases, with the rank precondition verified
    let mut vx: Vec<(u64, Vec<Vec<u64>>)> = Vec::with_capacity(a.len());
    for &x in a.indices() {
        let form = family.form_at(x)?.homogeneous_part();
        let rv = rank_and_vq(&form)?;
        if rv.rank > r {
            return Err(Error::InvalidParameter(format!(
                "precondition violated: rk(Q_x) = {} > r = {r} at x = {x}",
                rv.rank
            )));
        }
        vx.push((x, rv.basis));
    }
    // Case-1 pre-pass: the kernel of x -> Q_x is a subspace; if A already
    // sits inside it at the requested fraction, V = {0} suffices.
    let zero_xs: Vec<u64> = vx
        .iter()
        .filter(|(_, b)| b.is_empty())
        .map(|(x, _)| *x)
        .collect();
    if let Some(fr) = min_fraction {
        if zero_xs.len() as f64 >= fr * a.len() as f64 {
            return Ok(RankLineReport {
                v_basis: vec![],
                fraction: zero_xs.len() as f64 / a.len() as f64,
                a_prime: zero_xs,
                heuristic: false,
                prepass: true,
                fallback: false,
            });
        }
    }
    if zero_xs.len() == a.len() {
        return Ok(RankLineReport {
            v_basis: vec![],
            fraction: 1.0,
            a_prime: zero_xs,
            heuristic: false,
            prepass: true,
            fallback: false,
        });
    }

    let total = p.pow(family.dim);
    let heuristic = total > PROJECTIVE_ENUM_CAP;
    let candidates: Vec<Vec<u64>> = if !heuristic {
        projective_reps(p, family.dim)
    } else {
        // deterministic pair sampling: intersect column spaces of leading
        // pairs and keep the intersection vectors as candidates
        let mut cands = Vec::new();
        'outer: for i in 0..vx.len() {
            for j in (i + 1)..vx.len() {
                let (u, w) = (&vx[i].1, &vx[j].1);
                if u.is_empty() || w.is_empty() {
                    continue;
                }
                // basis vectors of either space are candidates
                cands.extend(u.iter().cloned());
                cands.extend(w.iter().cloned());
                if cands.len() >= 256 {
                    break 'outer;
                }
            }
        }
        cands
    };

    let mut v_basis: Vec<Vec<u64>> = Vec::new();
    let mut fallback = false;
    while (v_basis.len() as u32) < r {
        let mut best: Option<(usize, &Vec<u64>)> = None;
        for v in &candidates {
            if in_span(p, &v_basis, v) {
                continue;
            }
            let count = vx
                .iter()
                .filter(|(_, basis)| vector_in_column_space(p, basis, v))
                .count();
            if count > 0 {
                match &best {
                    Some((bc, _)) if *bc >= count => {}
                    _ => best = Some((count, v)),
                }
            }
        }
        match best {
            Some((_, v)) => v_basis.push(v.clone()),
            None => break,
        }
    }
    let contained = |basis: &[Vec<u64>], v_basis: &[Vec<u64>]| {
        basis.iter().all(|b| in_span(p, v_basis, b))
    };
    let mut a_prime: Vec<u64> = vx
        .iter()
        .filter(|(_, basis)| contained(basis, &v_basis))
        .map(|(x, _)| *x)
        .collect();
    if a_prime.is_empty() {
        // incidence search produced nothing usable; fall back to the
        // smallest-index element's own space (rank <= r by precondition)
        fallback = true;
        v_basis = vx[0].1.clone();
        a_prime = vx
            .iter()
            .filter(|(_, basis)| contained(basis, &v_basis))
            .map(|(x, _)| *x)
            .collect();
    }
    // machine-verify the output contract
    if span_rank(p, &v_basis) as u32 > r {
        return Err(Error::VerificationFailure("dim V exceeds r".into()));
    }
    if a_prime.is_empty() {
        return Err(Error::SearchFailure(
            "no x with V_x inside V; rank precondition suspect".into(),
        ));
    }
    for &x in &a_prime {
        let basis = &vx.iter().find(|(y, _)| *y == x).unwrap().1;
        if !contained(basis, &v_basis) {
            return Err(Error::VerificationFailure("containment recheck failed".into()));
        }
    }
    let fraction = a_prime.len() as f64 / a.len() as f64;
    Ok(RankLineReport {
        v_basis,
        a_prime,
        fraction,
        heuristic,
        prepass: false,
        fallback,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct QuadrupleStats {
    pub total: u64,
    pub good: u64,
    pub bad: u64,
}

/// Exact additive-quadruple statistics over A: count of (x1, x2, x3, x4) in
/// A^4 with x1 + x2 = x3 + x4, split into good quadruples (all 24 ordered
/// distinct position triples have V_i meeting V_j + V_k trivially) and bad
/// ones. The Cauchy-Schwarz lower bound `count * p^n >= |A|^4` is asserted.
pub fn additive_quadruple_stats(
    a: &GroupSet,
    family: &LinearFormFamily,
) -> Result<QuadrupleStats> {
    if *a.group() != family.x_group()? {
        return Err(Error::GroupMismatch(
            a.group().to_string(),
            family.x_group()?.to_string(),
        ));
    }
    let p = family.p;
    let g = a.group();
    let m = a.len();
    let mut bases: Vec<Vec<Vec<u64>>> = Vec::with_capacity(m);
    for &x in a.indices() {
        let form = family.form_at(x)?.homogeneous_part();
        bases.push(form.fp_matrix().column_space_basis());
    }
    let pos_of = |idx: u64| a.indices().binary_search(&idx).ok();

    // memo over value triples (i, {j,k}): does V_i meet V_j + V_k trivially?
    let mut memo: Vec<u8> = vec![0; m * m * m];
    let mut trivial_meet = |i: usize, j: usize, k: usize,
                            bases: &Vec<Vec<Vec<u64>>>| -> bool {
        let (lo, hi) = if j <= k { (j, k) } else { (k, j) };
        let key = (i * m + lo) * m + hi;
        match memo[key] {
            1 => true,
            2 => false,
            _ => {
                let mut sum = bases[lo].clone();
                sum.extend(bases[hi].iter().cloned());
                let ans = intersection_dim(p, &bases[i], &sum) == 0;
                memo[key] = if ans { 1 } else { 2 };
                ans
            }
        }
    };

    let (mut total, mut good) = (0u64, 0u64);
    for i1 in 0..m {
        let x1 = a.indices()[i1];
        for i2 in 0..m {
            let x2 = a.indices()[i2];
            let s = g.add_index(x1, x2);
            for i3 in 0..m {
                let x3 = a.indices()[i3];
                let x4 = g.sub_index(s, x3);
                let Some(i4) = pos_of(x4) else { continue };
                total += 1;
                let quad = [i1, i2, i3, i4];
                let mut is_good = true;
                'check: for a_pos in 0..4 {
                    for b_pos in 0..4 {
                        if b_pos == a_pos {
                            continue;
                        }
                        for c_pos in (b_pos + 1)..4 {
                            if c_pos == a_pos {
                                continue;
                            }
                            if !trivial_meet(quad[a_pos], quad[b_pos], quad[c_pos], &bases) {
                                is_good = false;
                                break 'check;
                            }
                        }
                    }
                }
                if is_good {
                    good += 1;
                }
            }
        }
    }
    let bad = total - good;
    // count * p^n >= |A|^4, exactly
    let lhs = total as u128 * (g.cardinality() as u128);
    let rhs = (m as u128).pow(4);
    if lhs < rhs {
        return Err(Error::VerificationFailure(format!(
            "Cauchy-Schwarz bound violated: {total} quadruples, |A| = {m}"
        )));
    }
    Ok(QuadrupleStats { total, good, bad })
}
