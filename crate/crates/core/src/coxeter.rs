//! Reflection data for simply-laced finite Coxeter groups.
//!
//! Roots live in the usual ambient lattices: `A_{n-1}` uses `e_i - e_j` in
//! `Z^n`, `D_n` uses `e_i ± e_j`, and `E_6 ⊂ E_7 ⊂ E_8` use the even
//! coordinate system of `E_8` scaled by two so that every coordinate is an
//! integer. Reflections are indexed by their positive roots in ascending
//! lexicographic order.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    D,
    E,
    I2,
}

/// A Coxeter type: `A_n`, `D_n`, `E_6`, `E_7`, `E_8`, or the dihedral `I_2(k)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeSpec {
    family: Family,
    rank_or_order: usize,
}

impl TypeSpec {
    pub fn new(family: Family, rank_or_order: usize) -> Result<Self> {
        let ok = match family {
            Family::A => rank_or_order >= 1,
            Family::D => rank_or_order >= 4,
            Family::E => (6..=8).contains(&rank_or_order),
            Family::I2 => rank_or_order >= 2,
        };
        if !ok {
            return Err(Error::InvalidType(format!(
                "{}",
                DisplaySpec(family, rank_or_order)
            )));
        }
        Ok(Self {
            family,
            rank_or_order,
        })
    }

    pub fn a(rank: usize) -> Result<Self> {
        Self::new(Family::A, rank)
    }

    pub fn d(rank: usize) -> Result<Self> {
        Self::new(Family::D, rank)
    }

    pub fn e(rank: usize) -> Result<Self> {
        Self::new(Family::E, rank)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Rank for `A/D/E`, the dihedral order for `I_2`.
    pub fn rank_or_order(&self) -> usize {
        self.rank_or_order
    }

    pub fn is_ade(&self) -> bool {
        self.family != Family::I2
    }
}

struct DisplaySpec(Family, usize);

impl fmt::Display for DisplaySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Family::A => write!(f, "A{}", self.1),
            Family::D => write!(f, "D{}", self.1),
            Family::E => write!(f, "E{}", self.1),
            Family::I2 => write!(f, "I2({})", self.1),
        }
    }
}

impl fmt::Display for TypeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        DisplaySpec(self.family, self.rank_or_order).fmt(f)
    }
}

impl FromStr for TypeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::InvalidType(format!("cannot parse type string {s:?}"));
        let upper = t.to_ascii_uppercase();
        if let Some(rest) = upper.strip_prefix("I2(") {
            let inner = rest.strip_suffix(')').ok_or_else(bad)?;
            let k: usize = inner.trim().parse().map_err(|_| bad())?;
            return Self::new(Family::I2, k);
        }
        let (head, tail) = upper.split_at(1.min(upper.len()));
        let family = match head {
            "A" => Family::A,
            "D" => Family::D,
            "E" => Family::E,
            _ => return Err(bad()),
        };
        let n: usize = tail.parse().map_err(|_| bad())?;
        Self::new(family, n)
    }
}

impl Serialize for TypeSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TypeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reflection {
    pub index: usize,
    pub root: Vec<i64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DihedralType {
    /// Two commuting reflections.
    I2_2,
    /// Three pairwise non-commuting reflections.
    I2_3,
}

/// A codimension-2 flat, given by the reflections fixing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatDescriptor {
    pub reflection_indices: Vec<usize>,
    pub dihedral_type: DihedralType,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    /// Number of reflections.
    pub n: usize,
    /// Reflections other than `s` commuting with a fixed `s`.
    pub c: usize,
    /// Reflections not commuting with a fixed `s`.
    pub c_prime: usize,
}

#[derive(Clone, Debug)]
pub struct CoxeterSystem {
    spec: TypeSpec,
    reflections: Vec<Reflection>,
    simple_indices: Vec<usize>,
    /// Coefficients of each positive root in the simple roots.
    simple_coords: Vec<Vec<i64>>,
    /// Row-major `N x N`: entry `(s, u)` is the index of `s u s^{-1}`.
    conj: Vec<usize>,
    commute: Vec<bool>,
    by_root: HashMap<Vec<i64>, usize>,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(dim: usize, i: usize, scale: i64) -> Vec<i64> {
    let mut v = vec![0; dim];
    v[i] = scale;
    v
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Positive roots and simple roots for an ADE type, in ambient coordinates.
fn ade_roots(spec: TypeSpec) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let r = spec.rank_or_order;
    match spec.family {
        Family::A => {
            let n = r + 1;
            let mut pos = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    pos.push(sub(&unit(n, i, 1), &unit(n, j, 1)));
                }
            }
            let simple = (0..r)
                .map(|i| sub(&unit(n, i, 1), &unit(n, i + 1, 1)))
                .collect();
            (pos, simple)
        }
        Family::D => {
            let n = r;
            let mut pos = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    pos.push(sub(&unit(n, i, 1), &unit(n, j, 1)));
                    pos.push(add(&unit(n, i, 1), &unit(n, j, 1)));
                }
            }
            // Node 1 and 2 are the two ends of the fork, node 3 the branch
            // point, then a chain 3 - 4 - ... - n.
            let mut simple = vec![
                sub(&unit(n, n - 2, 1), &unit(n, n - 1, 1)),
                add(&unit(n, n - 2, 1), &unit(n, n - 1, 1)),
            ];
            for k in 3..=n {
                simple.push(sub(&unit(n, n - k, 1), &unit(n, n - k + 1, 1)));
            }
            (pos, simple)
        }
        Family::E => {
            let mut pos = Vec::new();
            for i in 0..8 {
                for j in i + 1..8 {
                    pos.push(add(&unit(8, j, 2), &unit(8, i, 2)));
                    pos.push(sub(&unit(8, j, 2), &unit(8, i, 2)));
                }
            }
            for mask in 0u32..128 {
                if mask.count_ones() % 2 == 0 {
                    let mut v: Vec<i64> = (0..7)
                        .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                        .collect();
                    v.push(1);
                    pos.push(v);
                }
            }
            let mut simple = vec![
                vec![1, -1, -1, -1, -1, -1, -1, 1],
                add(&unit(8, 0, 2), &unit(8, 1, 2)),
            ];
            simple.push(sub(&unit(8, 1, 2), &unit(8, 0, 2)));
            for i in 2..7 {
                simple.push(sub(&unit(8, i, 2), &unit(8, i - 1, 2)));
            }
            let mut constraints: Vec<Vec<i64>> = Vec::new();
            if r <= 7 {
                constraints.push(vec![0, 0, 0, 0, 0, 0, 1, 1]);
            }
            if r <= 6 {
                constraints.push(vec![0, 0, 0, 0, 0, 1, 0, 1]);
            }
            pos.retain(|v| constraints.iter().all(|c| dot(v, c) == 0));
            simple.truncate(r);
            (pos, simple)
        }
        Family::I2 => (Vec::new(), Vec::new()),
    }
}

/// Builds the reflection data of an ADE type; dihedral types carry only
/// their parameter.
pub fn build_system(spec: TypeSpec) -> Result<CoxeterSystem> {
    let (mut roots, simple_roots) = ade_roots(spec);
    roots.sort();
    let n = roots.len();
    let by_root: HashMap<Vec<i64>, usize> = roots
        .iter()
        .enumerate()
        .map(|(i, r)| (r.clone(), i))
        .collect();
    let reflections: Vec<Reflection> = roots
        .into_iter()
        .enumerate()
        .map(|(index, root)| Reflection { index, root })
        .collect();
    let simple_indices: Vec<usize> = simple_roots.iter().map(|r| by_root[r]).collect();

    let positive_index = |v: &[i64]| -> usize {
        if let Some(&i) = by_root.get(v) {
            return i;
        }
        let neg: Vec<i64> = v.iter().map(|x| -x).collect();
        *by_root
            .get(&neg)
            .expect("reflected root is a root up to sign")
    };

    let mut conj = vec![0; n * n];
    let mut commute = vec![false; n * n];
    for s in 0..n {
        let rs = &reflections[s].root;
        let norm = dot(rs, rs);
        for u in 0..n {
            let ru = &reflections[u].root;
            let d = dot(rs, ru);
            let k = 2 * d / norm;
            debug_assert_eq!(k * norm, 2 * d);
            let image: Vec<i64> = ru.iter().zip(rs).map(|(x, y)| x - k * y).collect();
            let t = positive_index(&image);
            conj[s * n + u] = t;
            commute[s * n + u] = t == u;
        }
    }

    let simple_coords = simple_coordinates(&reflections, &simple_roots, &by_root);

    Ok(CoxeterSystem {
        spec,
        reflections,
        simple_indices,
        simple_coords,
        conj,
        commute,
        by_root,
    })
}

/// Expresses each positive root in the basis of simple roots by repeatedly
/// subtracting a simple root with positive inner product.
fn simple_coordinates(
    reflections: &[Reflection],
    simple: &[Vec<i64>],
    by_root: &HashMap<Vec<i64>, usize>,
) -> Vec<Vec<i64>> {
    let mut coords: Vec<Option<Vec<i64>>> = vec![None; reflections.len()];
    fn solve(
        idx: usize,
        reflections: &[Reflection],
        simple: &[Vec<i64>],
        by_root: &HashMap<Vec<i64>, usize>,
        coords: &mut Vec<Option<Vec<i64>>>,
    ) -> Vec<i64> {
        if let Some(c) = &coords[idx] {
            return c.clone();
        }
        let root = &reflections[idx].root;
        let r = simple.len();
        let result = if let Some(k) = simple.iter().position(|a| a == root) {
            let mut c = vec![0; r];
            c[k] = 1;
            c
        } else {
            let (k, lower) = simple
                .iter()
                .enumerate()
                .filter(|(_, a)| dot(root, a) > 0)
                .find_map(|(k, a)| by_root.get(&sub(root, a)).map(|&l| (k, l)))
                .expect("non-simple positive root has a positive predecessor");
            let mut c = solve(lower, reflections, simple, by_root, coords);
            c[k] += 1;
            c
        };
        coords[idx] = Some(result.clone());
        result
    }
    for i in 0..reflections.len() {
        solve(i, reflections, simple, by_root, &mut coords);
    }
    coords.into_iter().map(Option::unwrap).collect()
}

impl CoxeterSystem {
    pub fn spec(&self) -> TypeSpec {
        self.spec
    }

    pub fn is_ade(&self) -> bool {
        self.spec.is_ade()
    }

    /// Number of reflections `N`.
    pub fn len(&self) -> usize {
        self.reflections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reflections.is_empty()
    }

    pub fn reflections(&self) -> &[Reflection] {
        &self.reflections
    }

    pub fn root(&self, s: usize) -> &[i64] {
        &self.reflections[s].root
    }

    /// Reflection indices of the simple roots, in diagram numbering.
    pub fn simple_indices(&self) -> &[usize] {
        &self.simple_indices
    }

    /// Reflection index of simple node `k` (1-based, as in the diagram).
    pub fn simple(&self, k: usize) -> usize {
        self.simple_indices[k - 1]
    }

    pub fn simple_coords(&self, s: usize) -> &[i64] {
        &self.simple_coords[s]
    }

    pub fn index_of_root(&self, root: &[i64]) -> Option<usize> {
        self.by_root.get(root).copied()
    }

    /// Index of `s u s^{-1}`.
    pub fn conjugate(&self, s: usize, u: usize) -> usize {
        self.conj[s * self.len() + u]
    }

    /// The permutation `u ↦ s u s^{-1}` of reflection indices.
    pub fn conjugation_permutation(&self, s: usize) -> &[usize] {
        let n = self.len();
        &self.conj[s * n..(s + 1) * n]
    }

    pub fn commute(&self, s: usize, u: usize) -> bool {
        self.commute[s * self.len() + u]
    }

    fn require_ade(&self) -> Result<()> {
        if self.is_ade() {
            Ok(())
        } else {
            Err(Error::WrongType {
                expected: "A, D or E".into(),
                got: self.spec.to_string(),
            })
        }
    }

    /// `(N, c, c')`, checked to be independent of the base reflection.
    pub fn counts(&self) -> Result<Counts> {
        self.require_ade()?;
        let n = self.len();
        let per = |s: usize| {
            let c = (0..n).filter(|&u| u != s && self.commute(s, u)).count();
            (c, n - 1 - c)
        };
        let (c, c_prime) = per(0);
        if let Some(s) = (1..n).find(|&s| per(s) != (c, c_prime)) {
            return Err(Error::InvalidType(format!(
                "{}: commutation counts differ at reflection {s}",
                self.spec
            )));
        }
        Ok(Counts { n, c, c_prime })
    }

    /// Partition of all unordered pairs of reflections into codimension-2
    /// flats.
    pub fn codim2_flats(&self) -> Result<Vec<FlatDescriptor>> {
        self.require_ade()?;
        let n = self.len();
        let mut covered = vec![false; n * n];
        let mut flats = Vec::new();
        for s in 0..n {
            for u in s + 1..n {
                if covered[s * n + u] {
                    continue;
                }
                let (mut members, kind) = if self.commute(s, u) {
                    (vec![s, u], DihedralType::I2_2)
                } else {
                    (vec![s, u, self.conjugate(s, u)], DihedralType::I2_3)
                };
                members.sort_unstable();
                for &a in &members {
                    for &b in &members {
                        covered[a * n + b] = true;
                    }
                }
                flats.push(FlatDescriptor {
                    reflection_indices: members,
                    dihedral_type: kind,
                });
            }
        }
        Ok(flats)
    }

    /// The involution of the 36 reflections of `E_6` induced by the diagram
    /// automorphism exchanging nodes 1↔6 and 3↔5.
    pub fn diagram_automorphism_e6(&self) -> Result<Vec<usize>> {
        if self.spec != TypeSpec::e(6)? {
            return Err(Error::WrongType {
                expected: "E6".into(),
                got: self.spec.to_string(),
            });
        }
        let node_perm = [5usize, 1, 4, 3, 2, 0];
        let by_coords: HashMap<&[i64], usize> = self
            .simple_coords
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_slice(), i))
            .collect();
        Ok((0..self.len())
            .map(|s| {
                let c = &self.simple_coords[s];
                let mut image = vec![0; 6];
                for (k, &x) in c.iter().enumerate() {
                    image[node_perm[k]] = x;
                }
                by_coords[image.as_slice()]
            })
            .collect())
    }

    /// Index of the type-A transposition `(i j)`, 1-based, `i != j`.
    pub fn transposition(&self, i: usize, j: usize) -> usize {
        let dim = self.reflections[0].root.len();
        let (a, b) = (i.min(j) - 1, i.max(j) - 1);
        self.index_of_root(&sub(&unit(dim, a, 1), &unit(dim, b, 1)))
            .expect("transposition in range")
    }

    /// Index of the type-D reflection `(i j)` (root `e_i - e_j`) or, when
    /// `primed`, `(i j)'` (root `e_i + e_j`).
    pub fn d_reflection(&self, i: usize, j: usize, primed: bool) -> usize {
        let dim = self.reflections[0].root.len();
        let (a, b) = (i.min(j) - 1, i.max(j) - 1);
        let root = if primed {
            add(&unit(dim, a, 1), &unit(dim, b, 1))
        } else {
            sub(&unit(dim, a, 1), &unit(dim, b, 1))
        };
        self.index_of_root(&root).expect("reflection in range")
    }
}

/// Non-simply-laced types that fold into ADE types.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FoldSource {
    F4,
    H3,
    H4,
}

impl FromStr for FoldSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F4" => Ok(Self::F4),
            "H3" => Ok(Self::H3),
            "H4" => Ok(Self::H4),
            _ => Err(Error::InvalidType(format!("unknown folding source {s:?}"))),
        }
    }
}

impl fmt::Display for FoldSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::F4 => "F4",
            Self::H3 => "H3",
            Self::H4 => "H4",
        };
        f.write_str(s)
    }
}

/// Images of the Artin generators of a folded type, as sets of commuting
/// simple nodes (1-based diagram labels) of the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldingMap {
    pub source: FoldSource,
    pub target: TypeSpec,
    pub generator_images: Vec<Vec<usize>>,
}

impl FoldingMap {
    /// Generator images as reflection indices of `sys`.
    pub fn image_reflections(&self, sys: &CoxeterSystem) -> Result<Vec<Vec<usize>>> {
        if sys.spec() != self.target {
            return Err(Error::WrongType {
                expected: self.target.to_string(),
                got: sys.spec().to_string(),
            });
        }
        Ok(self
            .generator_images
            .iter()
            .map(|img| img.iter().map(|&k| sys.simple(k)).collect())
            .collect())
    }
}

pub fn folding_table(source: FoldSource) -> FoldingMap {
    let (target, images): (TypeSpec, Vec<Vec<usize>>) = match source {
        FoldSource::F4 => (
            TypeSpec::e(6).unwrap(),
            vec![vec![2], vec![4], vec![3, 5], vec![1, 6]],
        ),
        FoldSource::H3 => (
            TypeSpec::d(6).unwrap(),
            vec![vec![4, 1], vec![5, 3], vec![6, 2]],
        ),
        FoldSource::H4 => (
            TypeSpec::e(8).unwrap(),
            vec![vec![2, 5], vec![4, 6], vec![3, 7], vec![1, 8]],
        ),
    };
    FoldingMap {
        source,
        target,
        generator_images: images,
    }
}
