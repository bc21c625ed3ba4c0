use crate::error::{Error, Result};
use crate::lattice_nd::PathFamily;
use rand::Rng;
use std::collections::BTreeMap;

/// Vector controls M_γ(dd) ∈ R^d for every path γ and distance dd = 1..N.
///
/// Only canonical paths (parts with p_1 = 0) are stored. The reflected path
/// carries the negated vector, so M_γ + M_{-γ} = 0 holds by construction.
/// Distances dd ≤ N/2 are rejected on write.
#[derive(Clone, Debug)]
pub struct SimpleIndexControls {
    family: PathFamily,
    values: Vec<f64>,
}

impl SimpleIndexControls {
    pub fn zeros(dim: usize, n: usize) -> Result<Self> {
        let family = PathFamily::new(dim, n)?;
        let len = family.len() / 2 * n * dim;
        Ok(Self {
            family,
            values: vec![0.0; len],
        })
    }

    /// Uniform values in [-2, 2] on every free slot.
    pub fn random<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Result<Self> {
        let mut c = Self::zeros(dim, n)?;
        let canon: Vec<usize> = c.family.canonical().collect();
        for idx in canon {
            for dd in n / 2 + 1..=n {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..=2.0)).collect();
                c.set(idx, dd, &v)?;
            }
        }
        Ok(c)
    }

    pub fn family(&self) -> &PathFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn n(&self) -> usize {
        self.family.n()
    }

    fn offset(&self, canon: usize, dd: usize) -> usize {
        (canon * self.n() + dd - 1) * self.dim()
    }

    fn check_slot(&self, idx: usize, dd: usize) -> Result<()> {
        if idx >= self.family.len() {
            return Err(Error::InvalidControls(format!("path index {idx} out of range")));
        }
        if dd == 0 || dd > self.n() {
            return Err(Error::InvalidControls(format!("distance {dd} outside 1..={}", self.n())));
        }
        Ok(())
    }

    /// M_γ(dd) for any path index.
    pub fn get(&self, idx: usize, dd: usize) -> Result<Vec<f64>> {
        self.check_slot(idx, dd)?;
        let (canon, sign) = if self.family.is_canonical(idx) {
            (idx, 1.0)
        } else {
            (self.family.partner(idx), -1.0)
        };
        let o = self.offset(canon, dd);
        Ok(self.values[o..o + self.dim()].iter().map(|v| sign * v).collect())
    }

    /// Sets M_γ(dd); for a non-canonical γ the partner receives the negation.
    pub fn set(&mut self, idx: usize, dd: usize, value: &[f64]) -> Result<()> {
        self.check_slot(idx, dd)?;
        if value.len() != self.dim() {
            return Err(Error::InvalidControls(format!(
                "control vector has {} components, expected {}",
                value.len(),
                self.dim()
            )));
        }
        if let Some(v) = value.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidControls(format!("control value {v} is not finite")));
        }
        if 2 * dd <= self.n() && value.iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidControls(format!(
                "M_γ({dd}) must vanish for distances up to N/2 = {}",
                self.n() as f64 / 2.0
            )));
        }
        let (canon, sign) = if self.family.is_canonical(idx) {
            (idx, 1.0)
        } else {
            (self.family.partner(idx), -1.0)
        };
        let o = self.offset(canon, dd);
        for (slot, v) in self.values[o..o + value.len()].iter_mut().zip(value) {
            *slot = sign * v;
        }
        Ok(())
    }

    /// Independent vector slots: 2^{d-1} · d^N · (N - ⌊N/2⌋).
    pub fn free_slot_count(&self) -> usize {
        self.family.len() / 2 * (self.n() - self.n() / 2)
    }

    /// Values for every path, `[path][dd - 1][component]`, partners included.
    pub fn expanded(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.family.len())
            .map(|idx| {
                (1..=self.n())
                    .map(|dd| self.get(idx, dd).expect("slot in range"))
                    .collect()
            })
            .collect()
    }
}

/// Scalar controls of one ordered component pair: values on canonical paths
/// plus the sign s with M_{-γ} = s · M_γ.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPair {
    values: Vec<f64>,
    signs: Vec<f64>,
}

/// Dual-index controls M^{i,j}_γ(dd) for ordered pairs i ≠ j (0-based).
///
/// The reflection rule is structural (one stored sign per canonical path);
/// the quadratic constraint Σ_{d1<d2} M(d1) M(d2) = 0 is checked by
/// [`DualIndexControls::validate`].
#[derive(Clone, Debug)]
pub struct DualIndexControls {
    family: PathFamily,
    pairs: BTreeMap<(usize, usize), DualPair>,
}

impl DualIndexControls {
    pub fn zeros(dim: usize, n: usize) -> Result<Self> {
        Ok(Self {
            family: PathFamily::new(dim, n)?,
            pairs: BTreeMap::new(),
        })
    }

    /// Random controls on every ordered pair and canonical path, satisfying
    /// the quadratic constraint. The first N - 1 values are uniform in
    /// [-2, 2] and the last one solves the constraint; for N ≤ 2 this leaves
    /// a single nonzero entry.
    pub fn random<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Result<Self> {
        let mut c = Self::zeros(dim, n)?;
        let canon: Vec<usize> = c.family.canonical().collect();
        for i in 0..dim {
            for j in 0..dim {
                if i == j {
                    continue;
                }
                for &idx in &canon {
                    let v = loop {
                        let mut v: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-2.0..=2.0)).collect();
                        let s: f64 = v.iter().sum();
                        let q = pair_products(&v);
                        if n == 1 {
                            v.push(rng.random_range(-2.0..=2.0));
                            break v;
                        }
                        if s.abs() > 1e-3 {
                            v.push(-q / s);
                            // the constraint is homogeneous, so rescaling keeps it
                            let big = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                            if big > 2.0 {
                                v.iter_mut().for_each(|x| *x *= 2.0 / big);
                            }
                            break v;
                        }
                    };
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    c.set_path(i, j, idx, &v, sign)?;
                }
            }
        }
        Ok(c)
    }

    /// Controls with one nonzero entry M^{i,j}_γ(dd) = value on the path
    /// `idx` and its reflection (sign +1).
    pub fn single_entry(
        dim: usize,
        n: usize,
        (i, j): (usize, usize),
        idx: usize,
        dd: usize,
        value: f64,
    ) -> Result<Self> {
        let mut c = Self::zeros(dim, n)?;
        if dd == 0 || dd > n {
            return Err(Error::InvalidControls(format!("distance {dd} outside 1..={n}")));
        }
        let mut v = vec![0.0; n];
        v[dd - 1] = value;
        c.set_path(i, j, idx, &v, 1.0)?;
        Ok(c)
    }

    pub fn family(&self) -> &PathFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn n(&self) -> usize {
        self.family.n()
    }

    /// Ordered pairs that carry controls.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.keys().copied()
    }

    /// Sets M^{i,j}_γ(1..=N) on path `idx` and M^{i,j}_{-γ} = sign · M^{i,j}_γ.
    pub fn set_path(&mut self, i: usize, j: usize, idx: usize, values: &[f64], sign: f64) -> Result<()> {
        let dim = self.dim();
        if i >= dim || j >= dim || i == j {
            return Err(Error::InvalidControls(format!(
                "component pair ({i}, {j}) invalid for d = {dim}"
            )));
        }
        if idx >= self.family.len() {
            return Err(Error::InvalidControls(format!("path index {idx} out of range")));
        }
        if values.len() != self.n() {
            return Err(Error::InvalidControls(format!(
                "expected {} values per path, got {}",
                self.n(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidControls(format!("control value {v} is not finite")));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidControls(format!("reflection sign must be ±1, got {sign}")));
        }
        let n = self.n();
        let half = self.family.len() / 2;
        let (canon, scale) = if self.family.is_canonical(idx) {
            (idx, 1.0)
        } else {
            (self.family.partner(idx), sign)
        };
        let pair = self.pairs.entry((i, j)).or_insert_with(|| DualPair {
            values: vec![0.0; half * n],
            signs: vec![1.0; half],
        });
        for (slot, v) in pair.values[canon * n..(canon + 1) * n].iter_mut().zip(values) {
            *slot = scale * v;
        }
        pair.signs[canon] = sign;
        Ok(())
    }

    /// M^{i,j}_γ(1..=N) for any path index; zeros if the pair is unset.
    pub fn get(&self, i: usize, j: usize, idx: usize) -> Vec<f64> {
        let n = self.n();
        let Some(pair) = self.pairs.get(&(i, j)) else {
            return vec![0.0; n];
        };
        let (canon, scale) = if self.family.is_canonical(idx) {
            (idx, 1.0)
        } else {
            let c = self.family.partner(idx);
            (c, pair.signs[c])
        };
        pair.values[canon * n..(canon + 1) * n].iter().map(|v| scale * v).collect()
    }

    /// Checks Σ_{d1<d2} M(d1) M(d2) = 0 on every path, relative to Σ M².
    pub fn validate(&self) -> Result<()> {
        for (&(i, j), pair) in &self.pairs {
            for (canon, v) in pair.values.chunks(self.n()).enumerate() {
                let q = pair_products(v);
                let scale: f64 = v.iter().map(|x| x * x).sum();
                if q.abs() > 1e-10 * scale.max(1.0) {
                    let path = &self.family.paths()[canon];
                    return Err(Error::InvalidControls(format!(
                        "pair ({i}, {j}), part {} moves {:?}: Σ_{{d1<d2}} M(d1)M(d2) = {q:.3e} ≠ 0",
                        path.part().index(),
                        path.moves()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Σ_{d1<d2} v(d1) v(d2).
pub(crate) fn pair_products(v: &[f64]) -> f64 {
    let s: f64 = v.iter().sum();
    let sq: f64 = v.iter().map(|x| x * x).sum();
    0.5 * (s * s - sq)
}
