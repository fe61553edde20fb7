//! Difference bound matrices over exact rational bounds.
//!
//! Variable 0 is the reference clock `x0 = 0`. Entry `(i, j)` bounds
//! `x_i − x_j`. A matrix is canonical when every entry equals the shortest
//! path between its endpoints.

use std::fmt;

use crate::time::Bound;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dbm {
    dim: usize,
    entries: Vec<Bound>,
}

impl Dbm {
    /// Matrix over `dim` variables (reference included) with zero diagonal
    /// and no other constraint.
    pub fn unconstrained(dim: usize) -> Self {
        let mut entries = vec![Bound::Infinite; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Bound::ZERO;
        }
        Dbm { dim, entries }
    }

    /// Builds a matrix from rows; panics if the rows are not square.
    pub fn from_rows(rows: Vec<Vec<Bound>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "DBM rows must be square");
        Dbm {
            dim,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.entries[i * self.dim + j] = b;
    }

    /// Intersects entry `(i, j)` with `b`.
    pub fn constrain(&mut self, i: usize, j: usize, b: Bound) {
        let slot = &mut self.entries[i * self.dim + j];
        if b < *slot {
            *slot = b;
        }
    }

    pub fn entries(&self) -> &[Bound] {
        &self.entries
    }

    fn has_negative_diagonal(&self) -> bool {
        (0..self.dim).any(|i| self.get(i, i).is_negative_cycle())
    }

    /// Shortest-path closure in place. Returns `false` when the system is
    /// infeasible, leaving the entries unspecified.
    pub fn close(&mut self) -> bool {
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.entries[i * n + k];
                if ik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let kj = self.entries[k * n + j];
                    if kj.is_infinite() {
                        continue;
                    }
                    let via = ik + kj;
                    if via < self.entries[i * n + j] {
                        self.entries[i * n + j] = via;
                    }
                }
            }
            if self.get(k, k).is_negative_cycle() {
                return false;
            }
        }
        !self.has_negative_diagonal()
    }

    /// Canonical form, or `None` when the constraints have no solution.
    pub fn canonicalize(&self) -> Option<Dbm> {
        let mut d = self.clone();
        d.close().then_some(d)
    }

    pub fn is_consistent(&self) -> bool {
        self.canonicalize().is_some()
    }

    /// Restores canonical form after row `t` of a canonical matrix was
    /// tightened. Runs in `O(dim²)`. Returns `false` on infeasibility.
    pub fn close_row(&mut self, t: usize) -> bool {
        let n = self.dim;
        let mut row = self.entries[t * n..(t + 1) * n].to_vec();
        for k in 0..n {
            let tk = self.entries[t * n + k];
            if tk.is_infinite() {
                continue;
            }
            for (j, slot) in row.iter_mut().enumerate() {
                let via = tk + self.entries[k * n + j];
                if via < *slot {
                    *slot = via;
                }
            }
        }
        if row[t].is_negative_cycle() {
            return false;
        }
        for i in 0..n {
            let it = if i == t { Bound::ZERO } else { self.entries[i * n + t] };
            if it.is_infinite() {
                continue;
            }
            for (slot, &tj) in self.entries[i * n..(i + 1) * n].iter_mut().zip(&row) {
                let via = it + tj;
                if via < *slot {
                    *slot = via;
                }
            }
        }
        !self.has_negative_diagonal()
    }

    /// Reorders variables: variable `i` of the result is variable `perm[i]`
    /// of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Dbm {
        assert_eq!(perm.len(), self.dim);
        let mut out = Dbm::unconstrained(self.dim);
        for (i, &pi) in perm.iter().enumerate() {
            for (j, &pj) in perm.iter().enumerate() {
                out.set(i, j, self.get(pi, pj));
            }
        }
        out
    }
}

impl fmt::Debug for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Dbm({})", self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
