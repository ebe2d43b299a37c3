//! Permutations of `0..n` and their orbit structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection of `0..n`, stored as the image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Perm(Vec<usize>);

impl TryFrom<Vec<usize>> for Perm {
    type Error = Error;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Perm::new(images)
    }
}

impl From<Perm> for Vec<usize> {
    fn from(p: Perm) -> Self {
        p.0
    }
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for (i, &j) in images.iter().enumerate() {
            if j >= n {
                return Err(Error::InvalidSystem(format!("perm maps {i} to {j}, outside 0..{n}")));
            }
            if seen[j] {
                return Err(Error::InvalidSystem(format!("perm is not injective: {j} hit twice")));
            }
            seen[j] = true;
        }
        Ok(Perm(images))
    }

    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// The cycle `x -> x + shift (mod n)`.
    pub fn rotation(n: usize, shift: usize) -> Self {
        Perm((0..n).map(|x| (x + shift) % n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Perm(inv)
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.len(), other.len());
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn pow(&self, k: i64) -> Perm {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Perm::identity(self.len());
        for _ in 0..k.unsigned_abs() {
            out = base.compose(&out);
        }
        out
    }

    pub fn apply_n(&self, x: usize, n: usize) -> usize {
        (0..n).fold(x, |y, _| self.0[y])
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Cycles, each starting at its minimal element, ordered by that minimum.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.0[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable();
        t
    }

    pub fn is_single_cycle(&self) -> bool {
        self.cycles().len() == 1
    }
}

/// Orbits of the group generated by `gens` acting on `0..n`, each sorted,
/// ordered by minimal element.
pub fn orbits_of_generated(n: usize, gens: &[&Perm]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for g in gens {
        assert_eq!(g.len(), n);
        for x in 0..n {
            let a = find(&mut parent, x);
            let b = find(&mut parent, g.apply(x));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        let r = find(&mut parent, x);
        if label[r] == usize::MAX {
            label[r] = out.len();
            out.push(Vec::new());
        }
        out[label[r]].push(x);
    }
    out
}

/// Orbit label of every point, given an orbit list.
pub fn orbit_labels(n: usize, orbits: &[Vec<usize>]) -> Vec<usize> {
    let mut label = vec![0; n];
    for (k, o) in orbits.iter().enumerate() {
        for &x in o {
            label[x] = k;
        }
    }
    label
}
