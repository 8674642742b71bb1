//! JSON file formats for the CLI surface.
//!
//! Group specs serialize as `{"type":"vector","p":2,"n":3}`,
//! `{"type":"cyclic","N":20}` or `{"type":"product","factors":[...]}`.
//! Dense functions store `[re, im]` pairs in index order; sets store sorted
//! index lists; partial maps store `[support, image]` pairs.

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::group::{DenseFn, GroupSet, GroupSpec, PartialMap};
use crate::nil::BracketPhase;
use crate::quadratic::{LinearFormFamily, QuadFormFp, QuadPolyF2};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseFnFile {
    pub group: GroupSpec,
    pub values: Vec<[f64; 2]>,
}

impl DenseFnFile {
    pub fn from_fn(f: &DenseFn) -> Self {
        DenseFnFile {
            group: f.group().clone(),
            values: f.values().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn into_fn(self) -> Result<DenseFn> {
        self.group.validate()?;
        let values = self
            .values
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        DenseFn::new(self.group, values)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetFile {
    pub group: GroupSpec,
    pub indices: Vec<u64>,
}

impl SetFile {
    pub fn from_set(s: &GroupSet) -> Self {
        SetFile {
            group: s.group().clone(),
            indices: s.indices().to_vec(),
        }
    }

    pub fn into_set(self) -> Result<GroupSet> {
        self.group.validate()?;
        GroupSet::new(self.group, self.indices)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub domain: GroupSpec,
    pub codomain: GroupSpec,
    pub pairs: Vec<[u64; 2]>,
}

impl MapFile {
    pub fn from_map(m: &PartialMap) -> Self {
        MapFile {
            domain: m.domain().clone(),
            codomain: m.codomain().clone(),
            pairs: m
                .support()
                .iter()
                .zip(m.images())
                .map(|(&s, &v)| [s, v])
                .collect(),
        }
    }

    pub fn into_map(self) -> Result<PartialMap> {
        self.domain.validate()?;
        self.codomain.validate()?;
        let pairs: Vec<(u64, u64)> = self.pairs.iter().map(|[a, b]| (*a, *b)).collect();
        PartialMap::new(self.domain, self.codomain, &pairs)
    }
}

/// Map file for the integer-side lift: phi : S -> Z/MZ with S inside [N].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZMapFile {
    #[serde(rename = "N")]
    pub range_n: u64,
    #[serde(rename = "M")]
    pub modulus_m: u64,
    pub pairs: Vec<[u64; 2]>,
}

/// Quadratic polynomial over F_2 as explicit 0/1 rows (any matrix; it is
/// canonicalized on load).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadPolyFile {
    pub n: u32,
    pub matrix: Vec<Vec<u8>>,
    pub linear: Vec<u8>,
    pub constant: u8,
}

impl QuadPolyFile {
    pub fn from_poly(p: &QuadPolyF2) -> Self {
        let n = p.dimension();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| (p.upper_rows()[i as usize] >> j & 1) as u8).collect())
            .collect();
        let linear = (0..n).map(|i| (p.linear() >> i & 1) as u8).collect();
        QuadPolyFile {
            n,
            matrix,
            linear,
            constant: p.constant() as u8,
        }
    }

    pub fn into_poly(self) -> Result<QuadPolyF2> {
        if self.matrix.len() != self.n as usize || self.linear.len() != self.n as usize {
            return Err(Error::Io("matrix/linear size must equal n".into()));
        }
        let rows: Vec<u32> = self
            .matrix
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, &b)| ((b & 1) as u32) << j).sum())
            .collect();
        let b: u32 = self
            .linear
            .iter()
            .enumerate()
            .map(|(i, &v)| ((v & 1) as u32) << i)
            .sum();
        QuadPolyF2::from_matrix(self.n, &rows, b, self.constant & 1 == 1)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaFile {
    pub delta: f64,
    pub thetas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseFile {
    /// (alpha, beta, gamma) bracket-quadratic terms.
    #[serde(default)]
    pub quad: Vec<[f64; 3]>,
    /// (delta, eta) linear terms.
    #[serde(default)]
    pub lin: Vec<[f64; 2]>,
}

impl PhaseFile {
    pub fn into_phase(self) -> BracketPhase {
        BracketPhase {
            quad: self.quad.iter().map(|&[a, b, c]| (a, b, c)).collect(),
            lin: self.lin.iter().map(|&[d, e]| (d, e)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyFile {
    pub p: u64,
    pub n: u32,
    pub dim: u32,
    /// One form per basis vector of F_p^n.
    pub forms: Vec<QuadFormFp>,
}

impl FamilyFile {
    pub fn into_family(self) -> Result<LinearFormFamily> {
        LinearFormFamily::new(self.p, self.n, self.dim, self.forms)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
