//! Dense two-phase simplex for the small linear programs used by the regret
//! oracle and the utility-polytope search.
//!
//! All variables are nonnegative. Problems here have at most a few dozen
//! variables and a few hundred rows, so a full tableau is fine.

use thiserror::Error;

/// Pivot and feasibility tolerance.
pub const EPS: f64 = 1e-9;

const MAX_ITERATIONS: usize = 50_000;
// Switch from Dantzig's rule to Bland's rule after this many degenerate pivots.
const DEGENERATE_LIMIT: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("constraint has {got} coefficients, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("simplex did not converge within {0} iterations")]
    IterationLimit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<Solution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

/// `maximize c·x  s.t.  rows, x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(
        &mut self,
        coeffs: Vec<f64>,
        relation: Relation,
        rhs: f64,
    ) -> Result<&mut Self, LpError> {
        if coeffs.len() != self.num_vars() {
            return Err(LpError::DimensionMismatch {
                expected: self.num_vars(),
                got: coeffs.len(),
            });
        }
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        Ok(self)
    }

    pub fn solve(&self) -> Result<LpOutcome, LpError> {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    n: usize,
    ncols: usize,
    width: usize,
    // first artificial column; columns >= this are artificial
    art_start: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let mut rows: Vec<Row> = lp.rows.clone();
        for r in &mut rows {
            // a homogeneous ≥ row becomes ≤ and starts with a slack basis
            if r.rhs < 0.0 || (r.rhs == 0.0 && r.relation == Relation::Ge) {
                r.rhs = -r.rhs;
                r.coeffs.iter_mut().for_each(|c| *c = -*c);
                r.relation = match r.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let n_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let ncols = n + n_slack + n_art;
        let width = ncols + 1;
        let art_start = n + n_slack;
        let mut data = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let (mut slack, mut art) = (n, art_start);
        for (i, r) in rows.iter().enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            row[..n].copy_from_slice(&r.coeffs);
            row[ncols] = r.rhs;
            match r.relation {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Tableau {
            n,
            ncols,
            width,
            art_start,
            data,
            basis,
        }
    }

    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.ncols]
    }

    fn pivot(&mut self, obj: &mut [f64], pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        self.data[pr * w + pc] = 1.0;
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
            }
        }
        let f = obj[pc];
        if f != 0.0 {
            for (v, p) in obj.iter_mut().zip(prow.iter()) {
                *v -= f * p;
            }
            obj[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Reduced-cost row for `cost` given the current basis. The last entry
    /// holds minus the objective value.
    fn objective_row(&self, cost: &[f64]) -> Vec<f64> {
        let mut obj = vec![0.0; self.width];
        obj[..self.ncols].copy_from_slice(cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                let row = &self.data[i * self.width..(i + 1) * self.width];
                for (o, r) in obj.iter_mut().zip(row) {
                    *o -= cb * r;
                }
            }
        }
        obj
    }

    /// Returns false when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool, LpError> {
        let mut obj = self.objective_row(cost);
        let mut degenerate = 0usize;
        for _ in 0..MAX_ITERATIONS {
            let bland = degenerate >= DEGENERATE_LIMIT;
            let entering = if bland {
                (0..allowed).find(|&j| obj[j] > EPS)
            } else {
                (0..allowed)
                    .filter(|&j| obj[j] > EPS)
                    .max_by(|&a, &b| obj[a].total_cmp(&obj[b]))
            };
            let Some(pc) = entering else {
                return Ok(true);
            };
            // ties go to the lowest basic index under Bland, otherwise to
            // the largest pivot
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows() {
                let a = self.at(i, pc);
                if a > EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = ratio <= br + 1e-12;
                            let wins_tie = if bland {
                                self.basis[i] < self.basis[bi]
                            } else {
                                a > self.at(bi, pc)
                            };
                            if ratio < br - 1e-12 || (tie && wins_tie) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((pr, ratio)) = best else {
                return Ok(false);
            };
            if ratio <= EPS {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(&mut obj, pr, pc);
        }
        Err(LpError::IterationLimit(MAX_ITERATIONS))
    }

    fn run(mut self, objective: &[f64]) -> Result<LpOutcome, LpError> {
        if self.art_start < self.ncols {
            let mut cost = vec![0.0; self.ncols];
            cost[self.art_start..].iter_mut().for_each(|c| *c = -1.0);
            self.optimize(&cost, self.ncols)?;
            let infeasibility: f64 = (0..self.rows())
                .filter(|&i| self.basis[i] >= self.art_start)
                .map(|i| self.rhs(i))
                .sum();
            if infeasibility > EPS {
                return Ok(LpOutcome::Infeasible);
            }
            self.drive_out_artificials();
        }
        let mut cost = vec![0.0; self.ncols];
        cost[..self.n].copy_from_slice(objective);
        if !self.optimize(&cost, self.art_start)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rhs(i).max(0.0);
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal(Solution { x, value }))
    }

    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows() {
            if self.basis[i] >= self.art_start {
                let col = (0..self.art_start)
                    .filter(|&j| self.at(i, j).abs() > EPS)
                    .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()));
                match col {
                    Some(j) => {
                        let mut dummy = vec![0.0; self.width];
                        self.pivot(&mut dummy, i, j);
                    }
                    None => {
                        // redundant row
                        self.data.drain(i * self.width..(i + 1) * self.width);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 4.0).unwrap();
        lp.constrain(vec![0.0, 2.0], Relation::Le, 12.0).unwrap();
        lp.constrain(vec![3.0, 2.0], Relation::Le, 18.0).unwrap();
        let s = lp.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(s.value, 36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x - y, x + y = 1, y ≥ 0.25
        let mut lp = LinearProgram::maximize(vec![1.0, -1.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0).unwrap();
        lp.constrain(vec![0.0, 1.0], Relation::Ge, 0.25).unwrap();
        let s = lp.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(s.value, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x ≤ -2  (x ≥ 2), max -x → -2
        let mut lp = LinearProgram::maximize(vec![-1.0]);
        lp.constrain(vec![-1.0], Relation::Le, -2.0).unwrap();
        let s = lp.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(s.value, -2.0, epsilon = 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0).unwrap();
        lp.constrain(vec![1.0], Relation::Ge, 2.0).unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.constrain(vec![0.0, 1.0], Relation::Le, 1.0).unwrap();
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::maximize(vec![1.0, 2.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0).unwrap();
        lp.constrain(vec![2.0, 2.0], Relation::Eq, 2.0).unwrap();
        let s = lp.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_wrong_width() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        assert_eq!(
            lp.constrain(vec![1.0], Relation::Le, 1.0).err(),
            Some(LpError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the plain largest-coefficient rule.
        let mut lp = LinearProgram::maximize(vec![0.75, -150.0, 0.02, -6.0]);
        lp.constrain(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .unwrap();
        lp.constrain(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .unwrap();
        lp.constrain(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0)
            .unwrap();
        let s = lp.solve().unwrap().optimal().unwrap();
        assert_abs_diff_eq!(s.value, 0.05, epsilon = 1e-9);
    }

    #[test]
    fn margin_problems_with_many_homogeneous_rows() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let k = rng.gen_range(2..=5);
            let mut star: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.01).collect();
            let total: f64 = star.iter().sum();
            star.iter_mut().for_each(|v| *v /= total);
            let rows: Vec<Vec<f64>> = (0..rng.gen_range(1..60))
                .map(|_| {
                    let mut h: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() - 0.5).collect();
                    if h.iter().zip(&star).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
                        h.iter_mut().for_each(|v| *v = -*v);
                    }
                    let n = h.iter().map(|v| v * v).sum::<f64>().sqrt();
                    h.iter().map(|v| v / n).collect()
                })
                .collect();
            // margin achieved by the planted point
            let planted = rows
                .iter()
                .map(|h| h.iter().zip(&star).map(|(a, b)| a * b).sum::<f64>())
                .chain(star.iter().copied())
                .fold(f64::INFINITY, f64::min);

            let mut obj = vec![0.0; k + 1];
            obj[k] = 1.0;
            let mut lp = LinearProgram::maximize(obj);
            let mut sum = vec![1.0; k + 1];
            sum[k] = 0.0;
            lp.constrain(sum, Relation::Eq, 1.0).unwrap();
            for h in &rows {
                let mut c = h.clone();
                c.push(-1.0);
                lp.constrain(c, Relation::Ge, 0.0).unwrap();
            }
            for i in 0..k {
                let mut c = vec![0.0; k + 1];
                c[i] = 1.0;
                c[k] = -1.0;
                lp.constrain(c, Relation::Ge, 0.0).unwrap();
            }
            let s = lp
                .solve()
                .unwrap()
                .optimal()
                .expect("planted point is feasible");
            assert!(s.value >= planted - 1e-9, "{} < {planted}", s.value);
            let u = &s.x[..k];
            assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for h in &rows {
                let m: f64 = h.iter().zip(u).map(|(a, b)| a * b).sum();
                assert!(m >= s.value - 1e-9);
            }
        }
    }
}
