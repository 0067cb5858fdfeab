//! Optimal and k-best 2-D assignment.
//!
//! Problems have `n` rows and `m + n` columns: columns `0..m` pair a row with a
//! partner, column `m + i` leaves row `i` unassigned. Costs are negative log
//! weights, `+inf` marks a forbidden pairing. Every row is always assigned to
//! some column, so the empty association (everything unassigned) keeps every
//! problem feasible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    cost: DMatrix<f64>,
    partners: usize,
}

/// A feasible assignment: `row_to_col[i]` is the column chosen for row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub row_to_col: Vec<usize>,
    pub total_cost: f64,
}

impl AssignmentProblem {
    /// Builds the problem from pairing costs (`n x m`) and per-row unassignment costs.
    pub fn new(pair_costs: DMatrix<f64>, unassigned_costs: &[f64]) -> Result<Self> {
        let n = pair_costs.nrows();
        let m = pair_costs.ncols();
        if unassigned_costs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: unassigned_costs.len() });
        }
        let mut cost = DMatrix::from_element(n, m + n, f64::INFINITY);
        cost.columns_mut(0, m).copy_from(&pair_costs);
        for (i, &c) in unassigned_costs.iter().enumerate() {
            cost[(i, m + i)] = c;
        }
        Self::from_matrix(cost)
    }

    /// Takes a full `n x (m + n)` matrix; each row's own unassignment entry must be finite
    /// and every other unassignment entry infinite.
    pub fn from_matrix(cost: DMatrix<f64>) -> Result<Self> {
        let n = cost.nrows();
        if cost.ncols() < n {
            return Err(Error::DimensionMismatch { expected: n, actual: cost.ncols() });
        }
        let m = cost.ncols() - n;
        for i in 0..n {
            if !cost[(i, m + i)].is_finite() {
                return Err(Error::InvalidParameter(format!("row {i} has no finite unassignment cost")));
            }
            for k in 0..n {
                if k != i && cost[(i, m + k)] != f64::INFINITY {
                    return Err(Error::InvalidParameter(format!(
                        "row {i} may not use the unassignment column of row {k}"
                    )));
                }
            }
        }
        if cost.iter().any(|c| c.is_nan() || *c == f64::NEG_INFINITY) {
            return Err(Error::InvalidParameter("costs must be finite or +inf".into()));
        }
        Ok(Self { cost, partners: m })
    }

    pub fn rows(&self) -> usize {
        self.cost.nrows()
    }

    pub fn partners(&self) -> usize {
        self.partners
    }

    pub fn cost(&self) -> &DMatrix<f64> {
        &self.cost
    }

    /// Partner index for column `col`, or `None` for an unassignment column.
    pub fn partner_of(&self, col: usize) -> Option<usize> {
        (col < self.partners).then_some(col)
    }
}

impl Assignment {
    /// `(row, partner)` pairs, skipping unassigned rows.
    pub fn pairs(&self, partners: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_to_col
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c < partners)
            .map(|(r, &c)| (r, c))
    }
}

/// Shortest augmenting path solver for rectangular problems (rows <= cols).
/// Returns `None` when no finite-cost assignment of every row exists.
fn solve_lsap(cost: &DMatrix<f64>) -> Option<(Vec<usize>, f64)> {
    let nr = cost.nrows();
    let nc = cost.ncols();
    if nr == 0 {
        return Some((Vec::new(), 0.0));
    }
    let mut u = vec![0.0; nr];
    let mut v = vec![0.0; nc];
    let mut col4row: Vec<Option<usize>> = vec![None; nr];
    let mut row4col: Vec<Option<usize>> = vec![None; nc];
    let mut spc = vec![0.0; nc];
    let mut path = vec![0usize; nc];
    let mut remaining: Vec<usize> = Vec::with_capacity(nc);
    let mut sr = vec![false; nr];
    let mut sc = vec![false; nc];

    for cur_row in 0..nr {
        spc.iter_mut().for_each(|s| *s = f64::INFINITY);
        sr.iter_mut().for_each(|s| *s = false);
        sc.iter_mut().for_each(|s| *s = false);
        remaining.clear();
        remaining.extend((0..nc).rev());

        let mut min_val = 0.0;
        let mut i = cur_row;
        let sink = loop {
            sr[i] = true;
            let mut lowest = f64::INFINITY;
            let mut index = None;
            for (it, &j) in remaining.iter().enumerate() {
                let r = min_val + cost[(i, j)] - u[i] - v[j];
                if r < spc[j] {
                    path[j] = i;
                    spc[j] = r;
                }
                if spc[j] < lowest || (spc[j] == lowest && row4col[j].is_none()) {
                    lowest = spc[j];
                    index = Some(it);
                }
            }
            min_val = lowest;
            let index = match index {
                Some(ix) if min_val.is_finite() => ix,
                _ => return None,
            };
            let j = remaining.swap_remove(index);
            sc[j] = true;
            match row4col[j] {
                None => break j,
                Some(r) => i = r,
            }
        };

        u[cur_row] += min_val;
        for r in 0..nr {
            if sr[r] && r != cur_row {
                if let Some(c) = col4row[r] {
                    u[r] += min_val - spc[c];
                }
            }
        }
        for c in 0..nc {
            if sc[c] {
                v[c] -= min_val - spc[c];
            }
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = Some(r);
            let prev = col4row[r].replace(j);
            if r == cur_row {
                break;
            }
            j = prev.expect("augmenting path passes through assigned rows");
        }
    }

    let cols: Vec<usize> = col4row.into_iter().map(|c| c.expect("all rows assigned")).collect();
    let total = cols.iter().enumerate().map(|(r, &c)| cost[(r, c)]).sum();
    Some((cols, total))
}

/// Minimum-cost feasible assignment.
pub fn best_assignment(p: &AssignmentProblem) -> Assignment {
    let (row_to_col, total_cost) =
        solve_lsap(&p.cost).expect("unassignment columns keep every problem feasible");
    Assignment { row_to_col, total_cost }
}

struct Node {
    forced: Vec<(usize, usize)>,
    forbidden: Vec<(usize, usize)>,
    solution: Assignment,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // reversed: BinaryHeap is a max-heap and we want the cheapest node first
    fn cmp(&self, other: &Self) -> Ordering {
        other.solution.total_cost.total_cmp(&self.solution.total_cost)
    }
}

fn solve_constrained(
    base: &DMatrix<f64>,
    forced: &[(usize, usize)],
    forbidden: &[(usize, usize)],
) -> Option<Assignment> {
    let mut cost = base.clone();
    for &(r, c) in forbidden {
        cost[(r, c)] = f64::INFINITY;
    }
    for &(r, c) in forced {
        let keep = base[(r, c)];
        cost.row_mut(r).fill(f64::INFINITY);
        cost.column_mut(c).fill(f64::INFINITY);
        cost[(r, c)] = keep;
    }
    let (row_to_col, _) = solve_lsap(&cost)?;
    let total_cost = row_to_col.iter().enumerate().map(|(r, &c)| base[(r, c)]).sum();
    Some(Assignment { row_to_col, total_cost })
}

/// Murty's algorithm: the `k` cheapest feasible assignments in nondecreasing cost.
///
/// Rows without any finite pairing cost are always unassigned and partners
/// no remaining row can take are never used, so both are removed before the
/// search; the returned assignments are in terms of the full problem.
pub fn murty_kbest(p: &AssignmentProblem, k: usize) -> Vec<Assignment> {
    let n = p.rows();
    let m = p.partners;
    let active_rows: Vec<usize> =
        (0..n).filter(|&i| (0..m).any(|j| p.cost[(i, j)].is_finite())).collect();
    let active_cols: Vec<usize> =
        (0..m).filter(|&j| active_rows.iter().any(|&i| p.cost[(i, j)].is_finite())).collect();
    if active_rows.len() == n && active_cols.len() == m {
        return murty_full(p, k);
    }

    let (na, ma) = (active_rows.len(), active_cols.len());
    let mut cost = DMatrix::from_element(na, ma + na, f64::INFINITY);
    for (ri, &i) in active_rows.iter().enumerate() {
        for (ci, &j) in active_cols.iter().enumerate() {
            cost[(ri, ci)] = p.cost[(i, j)];
        }
        cost[(ri, ma + ri)] = p.cost[(i, m + i)];
    }
    let sub = AssignmentProblem { cost, partners: ma };
    let mut fixed_cols: Vec<usize> = (0..n).map(|i| m + i).collect();
    let fixed_cost: f64 = (0..n)
        .filter(|i| active_rows.binary_search(i).is_err())
        .map(|i| p.cost[(i, m + i)])
        .sum();
    murty_full(&sub, k)
        .into_iter()
        .map(|a| {
            for (ri, &c) in a.row_to_col.iter().enumerate() {
                let i = active_rows[ri];
                fixed_cols[i] = if c < ma { active_cols[c] } else { m + i };
            }
            Assignment { row_to_col: fixed_cols.clone(), total_cost: a.total_cost + fixed_cost }
        })
        .collect()
}

fn murty_full(p: &AssignmentProblem, k: usize) -> Vec<Assignment> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let first = best_assignment(p);
    let mut heap = BinaryHeap::new();
    heap.push(Node { forced: Vec::new(), forbidden: Vec::new(), solution: first });

    while let Some(node) = heap.pop() {
        // partition the node's solution space around its best solution
        let free_rows: Vec<usize> = (0..p.rows())
            .filter(|r| !node.forced.iter().any(|(fr, _)| fr == r))
            .collect();
        let mut forced = node.forced.clone();
        for &row in &free_rows {
            let col = node.solution.row_to_col[row];
            let mut forbidden = node.forbidden.clone();
            forbidden.push((row, col));
            if let Some(solution) = solve_constrained(&p.cost, &forced, &forbidden) {
                heap.push(Node { forced: forced.clone(), forbidden, solution });
            }
            forced.push((row, col));
        }
        out.push(node.solution);
        if out.len() == k {
            break;
        }
    }
    out
}
