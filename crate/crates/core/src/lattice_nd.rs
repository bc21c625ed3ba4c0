//! Orthant parts, monotone lattice paths and their endpoint bookkeeping.
//!
//! Axes are 0-based. Part p has digits p_1..p_d with p_1 the most
//! significant bit, and axis a moves in direction (-1)^{p_{a+1}}.

use crate::error::{Error, Result};
use std::collections::HashMap;

pub type Point = Vec<i64>;

pub fn l1_norm(p: &[i64]) -> usize {
    p.iter().map(|x| x.unsigned_abs() as usize).sum()
}

/// One of the 2^d closed orthants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartIndex {
    dim: usize,
    p: usize,
}

impl PartIndex {
    pub fn new(dim: usize, p: usize) -> Result<Self> {
        if dim == 0 || dim > 16 {
            return Err(Error::InvalidInput(format!("dimension {dim} out of range 1..=16")));
        }
        if p >= 1 << dim {
            return Err(Error::InvalidInput(format!("part {p} out of range for d = {dim}")));
        }
        Ok(Self { dim, p })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.p
    }

    /// Digit p_i for i = 1..=d.
    pub fn digit(&self, i: usize) -> usize {
        (self.p >> (self.dim - i)) & 1
    }

    /// Direction of a move along 0-based axis a.
    pub fn sign(&self, axis: usize) -> i64 {
        if self.digit(axis + 1) == 0 {
            1
        } else {
            -1
        }
    }

    /// The part with every digit flipped.
    pub fn complement(&self) -> Self {
        Self {
            dim: self.dim,
            p: !self.p & ((1 << self.dim) - 1),
        }
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        point.iter().enumerate().all(|(a, &x)| self.sign(a) * x >= 0)
    }

    pub fn all(dim: usize) -> Result<Vec<Self>> {
        (0..1usize << dim).map(|p| Self::new(dim, p)).collect()
    }
}

/// A path of N moves from the origin inside one part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePath {
    part: PartIndex,
    moves: Vec<usize>,
    points: Vec<Point>,
}

impl LatticePath {
    pub fn new(part: PartIndex, moves: Vec<usize>) -> Result<Self> {
        if let Some(&a) = moves.iter().find(|&&a| a >= part.dim()) {
            return Err(Error::InvalidInput(format!("axis {a} out of range for d = {}", part.dim())));
        }
        let mut cur = vec![0i64; part.dim()];
        let points = moves
            .iter()
            .map(|&a| {
                cur[a] += part.sign(a);
                cur.clone()
            })
            .collect();
        Ok(Self { part, moves, points })
    }

    pub fn part(&self) -> PartIndex {
        self.part
    }

    pub fn moves(&self) -> &[usize] {
        &self.moves
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// γ_k for k = 1..=N.
    pub fn point(&self, k: usize) -> &[i64] {
        &self.points[k - 1]
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.part.dim()
    }
}

/// All d^N paths of part `part`, ordered lexicographically by move sequence.
pub fn enumerate_paths(dim: usize, n: usize, part: PartIndex) -> Result<Vec<LatticePath>> {
    if part.dim() != dim {
        return Err(Error::Mismatch(format!("part has d = {}, expected {dim}", part.dim())));
    }
    let total = dim
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 20)
        .ok_or_else(|| Error::InvalidInput(format!("d^N too large for d = {dim}, N = {n}")))?;
    (0..total)
        .map(|mut code| {
            let mut moves = vec![0; n];
            for slot in moves.iter_mut().rev() {
                *slot = code % dim;
                code /= dim;
            }
            LatticePath::new(part, moves)
        })
        .collect()
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// Number of paths in part `part` passing through D:
/// ‖D‖! / Π|D_i|! · d^{N-‖D‖}.
pub fn count_paths_through(dim: usize, n: usize, part: PartIndex, d: &[i64]) -> Result<u128> {
    if d.len() != dim || part.dim() != dim {
        return Err(Error::Mismatch(format!("point or part does not have d = {dim}")));
    }
    if !part.contains(d) {
        return Err(Error::InvalidInput(format!("{d:?} is not in part {}", part.index())));
    }
    let norm = l1_norm(d);
    if norm == 0 || norm > n {
        return Err(Error::InvalidInput(format!("‖D‖ = {norm} outside 1..={n}")));
    }
    let multinomial = d
        .iter()
        .fold(factorial(norm), |acc, x| acc / factorial(x.unsigned_abs() as usize));
    Ok(multinomial * (dim as u128).pow((n - norm) as u32))
}

/// The path with every point negated; it lies in the complement part.
pub fn reflect(path: &LatticePath) -> LatticePath {
    LatticePath {
        part: path.part.complement(),
        moves: path.moves.clone(),
        points: path
            .points
            .iter()
            .map(|p| p.iter().map(|x| -x).collect())
            .collect(),
    }
}

/// Every (part, path) pair for given d and N, with an endpoint index.
///
/// Paths are stored part-major: index = p · d^N + (move-sequence rank), so
/// the reflection of path `i` in part p sits at the same rank in p'.
#[derive(Clone, Debug)]
pub struct PathFamily {
    dim: usize,
    n: usize,
    per_part: usize,
    paths: Vec<LatticePath>,
    endpoints: HashMap<Point, Vec<(usize, usize)>>,
}

impl PathFamily {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("N must be positive".into()));
        }
        let mut paths = Vec::new();
        for part in PartIndex::all(dim)? {
            paths.extend(enumerate_paths(dim, n, part)?);
        }
        let per_part = paths.len() >> dim;
        let mut endpoints: HashMap<Point, Vec<(usize, usize)>> = HashMap::new();
        for (idx, path) in paths.iter().enumerate() {
            for (k, pt) in path.points().iter().enumerate() {
                endpoints.entry(pt.clone()).or_default().push((idx, k + 1));
            }
        }
        Ok(Self {
            dim,
            n,
            per_part,
            paths,
            endpoints,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn paths(&self) -> &[LatticePath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths_per_part(&self) -> usize {
        self.per_part
    }

    /// (path index, k) for every path with γ_k = D.
    pub fn through(&self, d: &[i64]) -> &[(usize, usize)] {
        self.endpoints.get(d).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Index of the reflected path.
    pub fn partner(&self, idx: usize) -> usize {
        let part = self.paths[idx].part().complement().index();
        part * self.per_part + idx % self.per_part
    }

    /// Representatives of the {γ, -γ} pairs: the parts with p_1 = 0.
    pub fn canonical(&self) -> impl Iterator<Item = usize> + '_ {
        let half = self.paths.len() / 2;
        0..half
    }

    pub fn is_canonical(&self, idx: usize) -> bool {
        idx < self.paths.len() / 2
    }

    /// Index of the path with the given part and moves.
    pub fn find(&self, part: usize, moves: &[usize]) -> Option<usize> {
        if part >= 1 << self.dim || moves.len() != self.n || moves.iter().any(|&a| a >= self.dim) {
            return None;
        }
        let rank = moves.iter().fold(0, |acc, &a| acc * self.dim + a);
        Some(part * self.per_part + rank)
    }
}

/// Every lattice point with 0 ≤ ‖x‖₁ ≤ r, in lexicographic order.
pub fn ball(dim: usize, r: usize) -> Vec<Point> {
    let r = r as i64;
    let mut out = Vec::new();
    let mut cur = vec![-r; dim];
    loop {
        if l1_norm(&cur) as i64 <= r {
            out.push(cur.clone());
        }
        let mut a = dim;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            if cur[a] < r {
                cur[a] += 1;
                break;
            }
            cur[a] = -r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_paths() {
        let part = PartIndex::new(1, 0).unwrap();
        let paths = enumerate_paths(1, 3, part).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].points(), &[vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn path_counts_and_signs() {
        let part = PartIndex::new(2, 0).unwrap();
        assert_eq!(enumerate_paths(2, 2, part).unwrap().len(), 4);
        let part = PartIndex::new(3, 5).unwrap();
        assert_eq!((part.sign(0), part.sign(1), part.sign(2)), (-1, 1, -1));
        let paths = enumerate_paths(3, 2, part).unwrap();
        assert_eq!(paths.len(), 9);
        for path in &paths {
            for (k, pt) in path.points().iter().enumerate() {
                assert!(part.contains(pt));
                assert_eq!(l1_norm(pt), k + 1);
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let part = PartIndex::new(2, 0).unwrap();
        assert_eq!(count_paths_through(2, 3, part, &[1, 1]).unwrap(), 4);
        assert_eq!(count_paths_through(2, 3, part, &[2, 1]).unwrap(), 3);
        assert_eq!(count_paths_through(2, 3, part, &[0, 3]).unwrap(), 1);
        assert!(count_paths_through(2, 3, part, &[-1, 0]).is_err());
        assert!(count_paths_through(2, 3, part, &[2, 2]).is_err());
    }

    #[test]
    fn reflection() {
        let part = PartIndex::new(2, 0).unwrap();
        let g = LatticePath::new(part, vec![0, 1]).unwrap();
        let r = reflect(&g);
        assert_eq!(r.part().index(), 3);
        assert_eq!(r.points(), &[vec![-1, 0], vec![-1, -1]]);
        assert_eq!(reflect(&r), g);
        assert_eq!(r, LatticePath::new(part.complement(), vec![0, 1]).unwrap());
    }

    #[test]
    fn family_partner_and_find() {
        let fam = PathFamily::new(2, 3).unwrap();
        assert_eq!(fam.len(), 4 * 8);
        for idx in 0..fam.len() {
            let partner = fam.partner(idx);
            assert_eq!(fam.paths()[partner], reflect(&fam.paths()[idx]));
            assert_eq!(fam.partner(partner), idx);
            assert_ne!(fam.is_canonical(idx), fam.is_canonical(partner));
            let path = &fam.paths()[idx];
            assert_eq!(fam.find(path.part().index(), path.moves()), Some(idx));
        }
    }

    #[test]
    fn ball_size() {
        // |{x ∈ Z²: ‖x‖₁ ≤ r}| = 2r² + 2r + 1
        assert_eq!(ball(2, 3).len(), 25);
        assert_eq!(ball(1, 4).len(), 9);
        assert_eq!(ball(3, 1).len(), 7);
    }
}
