//! Exact arithmetic for the finite factor groups, given by multiplication tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Element index inside a [`FiniteGroup`]. Identity is always index 0.
pub type Elem = u16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("table entry {entry} at ({row},{col}) is out of range 0..{order}")]
    NotClosed {
        row: usize,
        col: usize,
        entry: usize,
        order: usize,
    },
    #[error("table is not square: row {row} has length {len}, expected {order}")]
    NotSquare { row: usize, len: usize, order: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {elem} has no inverse")]
    NoInverse { elem: usize },
    #[error("associativity fails at ({a},{b},{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("invalid order {got}")]
    InvalidOrder { got: usize },
}

/// A finite group given by its full multiplication table.
///
/// Elements are dense indices `0..order`, with the identity relabeled to
/// index 0 on construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<Elem>>,
    inverses: Vec<Elem>,
}

impl FiniteGroup {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> Elem {
        0
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a as usize][b as usize]
    }

    pub fn inv(&self, a: Elem) -> Elem {
        self.inverses[a as usize]
    }

    pub fn table(&self) -> &[Vec<Elem>] {
        &self.table
    }

    /// All element indices except the identity.
    pub fn nontrivial(&self) -> impl Iterator<Item = Elem> + '_ {
        1..self.order() as Elem
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        0..self.order() as Elem
    }

    pub fn is_abelian(&self) -> bool {
        let m = self.order();
        (0..m).all(|a| (0..m).all(|b| self.table[a][b] == self.table[b][a]))
    }

    pub(crate) fn with_name(mut self, name: String) -> Self {
        self.name = name;
        self
    }
}

fn check_axioms(table: &[Vec<Elem>]) -> Result<(usize, Vec<Elem>), GroupError> {
    let m = table.len();
    if m == 0 {
        return Err(GroupError::InvalidOrder { got: 0 });
    }
    for (row, r) in table.iter().enumerate() {
        if r.len() != m {
            return Err(GroupError::NotSquare {
                row,
                len: r.len(),
                order: m,
            });
        }
        for (col, &entry) in r.iter().enumerate() {
            if entry as usize >= m {
                return Err(GroupError::NotClosed {
                    row,
                    col,
                    entry: entry as usize,
                    order: m,
                });
            }
        }
    }
    let identity = (0..m)
        .find(|&e| (0..m).all(|x| table[e][x] as usize == x && table[x][e] as usize == x))
        .ok_or(GroupError::NoIdentity)?;
    let mut inverses = vec![0 as Elem; m];
    for x in 0..m {
        let inv = (0..m)
            .find(|&y| table[x][y] as usize == identity && table[y][x] as usize == identity)
            .ok_or(GroupError::NoInverse { elem: x })?;
        inverses[x] = inv as Elem;
    }
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let ab_c = table[table[a][b] as usize][c];
                let a_bc = table[a][table[b][c] as usize];
                if ab_c != a_bc {
                    return Err(GroupError::NotAssociative { a, b, c });
                }
            }
        }
    }
    Ok((identity, inverses))
}

/// Validates a multiplication table and builds a group, relabeling so that
/// the identity sits at index 0.
pub fn build_group(table: Vec<Vec<Elem>>, name: &str) -> Result<FiniteGroup, GroupError> {
    let (identity, _) = check_axioms(&table)?;
    let m = table.len();
    // Relabel by the transposition (0 identity) so the identity is index 0.
    let perm: Vec<usize> = (0..m)
        .map(|x| {
            if x == identity {
                0
            } else if x == 0 {
                identity
            } else {
                x
            }
        })
        .collect();
    let mut relabeled = vec![vec![0 as Elem; m]; m];
    for a in 0..m {
        for b in 0..m {
            relabeled[perm[a]][perm[b]] = perm[table[a][b] as usize] as Elem;
        }
    }
    let (identity, inverses) = check_axioms(&relabeled)?;
    debug_assert_eq!(identity, 0);
    Ok(FiniteGroup {
        name: name.to_string(),
        table: relabeled,
        inverses,
    })
}

/// Cyclic group of order `k`, with `table[i][j] = (i+j) mod k`.
pub fn cyclic(k: usize) -> Result<FiniteGroup, GroupError> {
    if k == 0 {
        return Err(GroupError::InvalidOrder { got: 0 });
    }
    let table: Vec<Vec<Elem>> = (0..k)
        .map(|i| (0..k).map(|j| ((i + j) % k) as Elem).collect())
        .collect();
    build_group(table, &format!("C{k}"))
}

/// Symmetric group S_k for `2 <= k <= 4`, elements enumerated in
/// lexicographic one-line order; composition `(p*q)(x) = p(q(x))`.
pub fn symmetric(k: usize) -> Result<FiniteGroup, GroupError> {
    if !(2..=4).contains(&k) {
        return Err(GroupError::InvalidOrder { got: k });
    }
    let mut perms: Vec<Vec<usize>> = Vec::new();
    permutations(&mut (0..k).collect::<Vec<_>>(), 0, &mut perms);
    perms.sort();
    let index_of = |p: &[usize]| perms.iter().position(|q| q == p).unwrap();
    let m = perms.len();
    let mut table = vec![vec![0 as Elem; m]; m];
    for (i, p) in perms.iter().enumerate() {
        for (j, q) in perms.iter().enumerate() {
            let composed: Vec<usize> = (0..k).map(|x| p[q[x]]).collect();
            table[i][j] = index_of(&composed) as Elem;
        }
    }
    build_group(table, &format!("S{k}"))
}

fn permutations(v: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if start == v.len() {
        out.push(v.clone());
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permutations(v, start + 1, out);
        v.swap(start, i);
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("a factor system needs at least 2 factors, got {got}")]
    TooFewFactors { got: usize },
}

/// The ordered list of factor groups defining `G = A_1 * ... * A_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSystem {
    factors: Vec<FiniteGroup>,
}

impl FactorSystem {
    /// Builds a system from `n >= 2` factors. Duplicate display names are
    /// disambiguated by a positional suffix.
    pub fn new(factors: Vec<FiniteGroup>) -> Result<Self, SystemError> {
        if factors.len() < 2 {
            return Err(SystemError::TooFewFactors { got: factors.len() });
        }
        let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
        for f in &factors {
            *seen.entry(f.name().to_string()).or_insert(0) += 1;
        }
        let mut renamed = Vec::with_capacity(factors.len());
        for (pos, f) in factors.into_iter().enumerate() {
            if seen[f.name()] > 1 {
                let fresh = format!("{}#{}", f.name(), pos + 1);
                renamed.push(f.with_name(fresh));
            } else {
                renamed.push(f);
            }
        }
        Ok(FactorSystem { factors: renamed })
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    /// Factor by 0-based index.
    pub fn factor(&self, i: usize) -> &FiniteGroup {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[FiniteGroup] {
        &self.factors
    }
}
