//! Pairwise search on the key attributes.
//!
//! The set of utilities consistent with the user's answers is an open
//! polytope `{u ≥ 0, Σu = 1, u·h > 0}`. A tuple stays a candidate while some
//! utility in that polytope ranks it first; every answer adds a half-space and
//! re-prunes.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{skyline_indices, DataError, Dataset, DimensionSet};
use crate::exec::Exec;
use crate::lp::{LinearProgram, LpError, Relation, EPS};
use crate::preference::{dot, Answer};

/// Random vertex objectives averaged per interior sample.
pub const VERTEX_SAMPLES: usize = 50;

/// Interior samples tried before a pruning LP.
const WITNESS_SAMPLES: usize = 10;

/// Samples drawn looking for distinct winners to display.
const DISPLAY_SAMPLES: usize = 30;

/// Lowest index wins ties.
fn argmax(v: &[f64], pts: &[Vec<f64>]) -> usize {
    (0..pts.len())
        .max_by(|&a, &b| dot(v, &pts[a]).total_cmp(&dot(v, &pts[b])).then(b.cmp(&a)))
        .expect("nonempty")
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("answers are inconsistent: no utility satisfies every comparison")]
    EmptyPolytope,
    #[error("search needs at least two candidates to form a question")]
    Terminal,
    #[error("tuple {0} was not displayed")]
    NotDisplayed(usize),
    #[error("no key attributes")]
    NoKeys,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// One answered question as seen by constraint harvesting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoggedQuestion {
    pub shown_dims: DimensionSet,
    pub tuples: Vec<usize>,
    pub answer: Answer,
}

/// Turns earlier choices into comparison vectors in key space. Only
/// questions that displayed two or more keys carry information; keys that
/// were not displayed get a zero coefficient.
pub fn harvest_constraints(x: &Dataset, log: &[LoggedQuestion], keys: &[usize]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for q in log {
        let Answer::Choose(c) = q.answer else {
            continue;
        };
        let shown: Vec<bool> = keys.iter().map(|&k| q.shown_dims.contains(k)).collect();
        if shown.iter().filter(|&&s| s).count() < 2 || c >= q.tuples.len() {
            continue;
        }
        let p = x.row(q.tuples[c]);
        for (j, &other) in q.tuples.iter().enumerate() {
            if j == c {
                continue;
            }
            let o = x.row(other);
            let h: Vec<f64> = keys
                .iter()
                .zip(&shown)
                .map(|(&k, &s)| if s { p[k] - o[k] } else { 0.0 })
                .collect();
            if h.iter().any(|&v| v != 0.0) {
                out.push(h);
            }
        }
    }
    out
}

fn unit(h: &[f64]) -> Vec<f64> {
    let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    h.iter().map(|v| v / norm).collect()
}

/// `{u ≥ 0, Σu = 1, u·h > 0 for every stored h}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityPolytope {
    dim: usize,
    constraints: Vec<Vec<f64>>,
}

impl UtilityPolytope {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "polytope needs at least one dimension");
        UtilityPolytope {
            dim,
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Vec<f64>] {
        &self.constraints
    }

    /// Adds `u·h > 0`. Zero vectors carry no information and are skipped.
    pub fn add(&mut self, h: Vec<f64>) {
        assert_eq!(h.len(), self.dim);
        if h.iter().any(|&v| v != 0.0) {
            self.constraints.push(unit(&h));
        }
    }

    fn base_lp(&self, objective: Vec<f64>, margin: bool) -> Result<LinearProgram, LpError> {
        let k = self.dim;
        let width = k + usize::from(margin);
        let mut lp = LinearProgram::maximize(objective);
        let mut sum = vec![1.0; width];
        if margin {
            sum[k] = 0.0;
        }
        lp.constrain(sum, Relation::Eq, 1.0)?;
        for h in &self.constraints {
            let mut c = h.clone();
            if margin {
                c.push(-1.0);
            }
            lp.constrain(c, Relation::Ge, 0.0)?;
        }
        if margin {
            let mut c = vec![0.0; width];
            c[k] = 1.0;
            lp.constrain(c, Relation::Le, 1.0)?;
        }
        Ok(lp)
    }

    /// Point of the simplex interior maximizing the smallest slack over all
    /// constraints and coordinates, with that slack. `None` when the open
    /// polytope is empty.
    pub fn center(&self) -> Result<Option<(Vec<f64>, f64)>, LpError> {
        let k = self.dim;
        let mut obj = vec![0.0; k + 1];
        obj[k] = 1.0;
        let mut lp = self.base_lp(obj, true)?;
        for i in 0..k {
            let mut c = vec![0.0; k + 1];
            c[i] = 1.0;
            c[k] = -1.0;
            lp.constrain(c, Relation::Ge, 0.0)?;
        }
        Ok(lp.solve()?.optimal().and_then(|s| {
            let t = s.value;
            (t > EPS).then(|| (s.x[..k].to_vec(), t))
        }))
    }

    /// Closure vertex maximizing `objective`.
    fn vertex(&self, objective: &[f64]) -> Result<Option<Vec<f64>>, LpError> {
        let lp = self.base_lp(objective.to_vec(), false)?;
        Ok(lp.solve()?.optimal().map(|s| s.x))
    }

    /// Strictly interior utilities: each is the midpoint of the center and a
    /// vertex maximizing a random direction.
    pub fn interior_samples<R: Rng + ?Sized>(
        &self,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>, SearchError> {
        let (center, _) = self.center()?.ok_or(SearchError::EmptyPolytope)?;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let dir: Vec<f64> = (0..self.dim)
                .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
                .collect();
            let v = self.vertex(&dir)?.ok_or(SearchError::EmptyPolytope)?;
            out.push(center.iter().zip(&v).map(|(c, v)| 0.5 * (c + v)).collect());
        }
        Ok(out)
    }

    /// Average of [`VERTEX_SAMPLES`] interior samples.
    pub fn interior_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>, SearchError> {
        let samples = self.interior_samples(VERTEX_SAMPLES, rng)?;
        let mut v = vec![0.0; self.dim];
        for s in &samples {
            v.iter_mut().zip(s).for_each(|(a, b)| *a += b);
        }
        let n = samples.len() as f64;
        v.iter_mut().for_each(|a| *a /= n);
        Ok(v)
    }
}

/// True iff some utility in the open polytope ranks `p` at least as high as
/// every point of `others`.
pub fn is_candidate(p: &[f64], others: &[&[f64]], poly: &UtilityPolytope) -> Result<bool, LpError> {
    Ok(candidate_witness(p, others, poly)?.is_some())
}

/// A utility strictly inside the polytope under which `p` ranks first, if
/// one exists.
///
/// Solves `max t  s.t. u ∈ simplex, u·ĥ ≥ t, u·(p − q) ≥ 0` with lazily added
/// rows: comparisons enter only when the current optimum violates them.
pub fn candidate_witness(
    p: &[f64],
    others: &[&[f64]],
    poly: &UtilityPolytope,
) -> Result<Option<Vec<f64>>, LpError> {
    let k = poly.dim();
    let mut obj = vec![0.0; k + 1];
    obj[k] = 1.0;
    let mut active: Vec<usize> = Vec::new();
    loop {
        let mut lp = poly.base_lp(obj.clone(), true)?;
        for &qi in &active {
            let mut c: Vec<f64> = p.iter().zip(others[qi]).map(|(a, b)| a - b).collect();
            c.push(0.0);
            lp.constrain(c, Relation::Ge, 0.0)?;
        }
        let Some(sol) = lp.solve()?.optimal() else {
            return Ok(None);
        };
        if sol.value <= EPS {
            return Ok(None);
        }
        let u = &sol.x[..k];
        let pu = dot(u, p);
        let worst = (0..others.len())
            .filter(|i| !active.contains(i))
            .map(|i| (i, dot(u, others[i]) - pu))
            .filter(|&(_, gap)| gap > EPS)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            None => return Ok(Some(u.to_vec())),
            Some((i, _)) => active.push(i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchState {
    pub keys: Vec<usize>,
    pub polytope: UtilityPolytope,
    /// Row indices of the dataset that may still be the favorite.
    pub candidates: Vec<usize>,
    /// Per candidate, a utility inside the polytope that ranks it first.
    witnesses: Vec<Option<Vec<f64>>>,
    pub last_display: Vec<usize>,
    #[serde(skip)]
    exec: Exec,
}

impl SearchState {
    /// Starts from the deduplicated key-space skyline and the comparisons
    /// harvested from earlier phases.
    pub fn new<R: Rng + ?Sized>(
        x: &Dataset,
        keys: &[usize],
        harvested: Vec<Vec<f64>>,
        exec: Exec,
        rng: &mut R,
    ) -> Result<Self, SearchError> {
        if keys.is_empty() {
            return Err(SearchError::NoKeys);
        }
        let xk = x.project(&DimensionSet::new(keys.to_vec(), x.d())?)?;
        let mut candidates: Vec<usize> = Vec::new();
        for i in skyline_indices(&xk, exec) {
            if !candidates.iter().any(|&c| xk.row(c) == xk.row(i)) {
                candidates.push(i);
            }
        }
        let mut polytope = UtilityPolytope::new(keys.len());
        for h in harvested {
            polytope.add(h);
        }
        let mut st = SearchState {
            keys: keys.to_vec(),
            polytope,
            witnesses: vec![None; candidates.len()],
            candidates,
            last_display: Vec::new(),
            exec,
        };
        st.prune(x, rng)?;
        Ok(st)
    }

    pub fn is_terminal(&self) -> bool {
        self.candidates.len() <= 1
    }

    fn key_row(&self, x: &Dataset, row: usize) -> Vec<f64> {
        let r = x.row(row);
        self.keys.iter().map(|&k| r[k]).collect()
    }

    fn prune<R: Rng + ?Sized>(&mut self, x: &Dataset, rng: &mut R) -> Result<(), SearchError> {
        if self.candidates.len() <= 1 {
            if self.polytope.center()?.is_none() {
                return Err(SearchError::EmptyPolytope);
            }
            return Ok(());
        }
        // a witness survives a new constraint it satisfies strictly
        let poly = &self.polytope;
        for w in self.witnesses.iter_mut() {
            if let Some(u) = w {
                if poly.constraints().iter().any(|h| dot(u, h) <= EPS) {
                    *w = None;
                }
            }
        }
        let pts: Vec<Vec<f64>> = self
            .candidates
            .iter()
            .map(|&r| self.key_row(x, r))
            .collect();
        if self.witnesses.iter().any(Option::is_none) {
            for v in self.polytope.interior_samples(WITNESS_SAMPLES, rng)? {
                let best = argmax(&v, &pts);
                if self.witnesses[best].is_none() {
                    self.witnesses[best] = Some(v);
                }
            }
        }
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let idx: Vec<usize> = (0..pts.len()).collect();
        let checked = self.exec.map(&idx, |&i| {
            if let Some(w) = &self.witnesses[i] {
                return Ok(Some(w.clone()));
            }
            let others: Vec<&[f64]> = refs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, r)| *r)
                .collect();
            candidate_witness(refs[i], &others, &self.polytope)
        });
        let mut rows = Vec::with_capacity(self.candidates.len());
        let mut wits = Vec::with_capacity(self.candidates.len());
        for (&row, w) in self.candidates.iter().zip(checked) {
            if let Some(w) = w? {
                rows.push(row);
                wits.push(Some(w));
            }
        }
        self.candidates = rows;
        self.witnesses = wits;
        Ok(())
    }

    /// Up to `count` candidates, each ranked first by a different random
    /// interior utility, so every comparison cuts the polytope. Filled up by
    /// rank under the last sample when too few distinct winners show up.
    pub fn next_display<R: Rng + ?Sized>(
        &mut self,
        x: &Dataset,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>, SearchError> {
        if self.candidates.len() < 2 {
            return Err(SearchError::Terminal);
        }
        let count = count.max(2).min(self.candidates.len());
        let pts: Vec<Vec<f64>> = self
            .candidates
            .iter()
            .map(|&r| self.key_row(x, r))
            .collect();
        let mut shown: Vec<usize> = Vec::with_capacity(count);
        let mut last = Vec::new();
        for _ in 0..DISPLAY_SAMPLES {
            let v = self
                .polytope
                .interior_samples(1, rng)?
                .pop()
                .expect("one sample");
            let best = argmax(&v, &pts);
            if !shown.contains(&best) {
                shown.push(best);
            }
            last = v;
            if shown.len() == count {
                break;
            }
        }
        if shown.len() < count {
            let mut ranked: Vec<usize> = (0..pts.len()).collect();
            ranked.sort_by(|&a, &b| {
                dot(&last, &pts[b])
                    .total_cmp(&dot(&last, &pts[a]))
                    .then(a.cmp(&b))
            });
            for i in ranked {
                if shown.len() == count {
                    break;
                }
                if !shown.contains(&i) {
                    shown.push(i);
                }
            }
        }
        let shown: Vec<usize> = shown.into_iter().map(|i| self.candidates[i]).collect();
        self.last_display = shown.clone();
        Ok(shown)
    }

    pub fn next_pair<R: Rng + ?Sized>(
        &mut self,
        x: &Dataset,
        rng: &mut R,
    ) -> Result<(usize, usize), SearchError> {
        let shown = self.next_display(x, 2, rng)?;
        Ok((shown[0], shown[1]))
    }

    /// Records that `chosen` was preferred to every row in `others` and
    /// re-prunes. On an inconsistent answer the state is left unchanged.
    pub fn apply<R: Rng + ?Sized>(
        &mut self,
        x: &Dataset,
        chosen: usize,
        others: &[usize],
        rng: &mut R,
    ) -> Result<(), SearchError> {
        if let Some(&r) = std::iter::once(&chosen)
            .chain(others)
            .find(|r| !self.last_display.contains(r))
        {
            return Err(SearchError::NotDisplayed(r));
        }
        let p = self.key_row(x, chosen);
        let mut poly = self.polytope.clone();
        for &o in others {
            let q = self.key_row(x, o);
            poly.add(p.iter().zip(&q).map(|(a, b)| a - b).collect());
        }
        if poly.center()?.is_none() {
            return Err(SearchError::EmptyPolytope);
        }
        let before = std::mem::replace(&mut self.polytope, poly);
        if let Err(e) = self.prune(x, rng) {
            self.polytope = before;
            return Err(e);
        }
        self.last_display.clear();
        Ok(())
    }

    /// The single remaining candidate, or the best candidate under a random
    /// interior utility.
    pub fn result<R: Rng + ?Sized>(&self, x: &Dataset, rng: &mut R) -> Result<usize, SearchError> {
        if self.candidates.len() == 1 {
            return Ok(self.candidates[0]);
        }
        let v = self.polytope.interior_point(rng)?;
        Ok(self
            .candidates
            .iter()
            .map(|&r| (dot(&v, &self.key_row(x, r)), r))
            .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
            .map(|(_, r)| r)
            .expect("candidates nonempty"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preference::UtilityVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn houses_keys() -> (Dataset, Vec<usize>) {
        (Dataset::example_houses(), vec![0, 1, 2])
    }

    #[test]
    fn harvests_only_informative_choices() {
        let (x, keys) = houses_keys();
        let log = vec![
            LoggedQuestion {
                shown_dims: DimensionSet::new(vec![0, 1, 2], 5).unwrap(),
                tuples: vec![0, 2],
                answer: Answer::Choose(1),
            },
            LoggedQuestion {
                shown_dims: DimensionSet::new(vec![0, 3, 4], 5).unwrap(),
                tuples: vec![0, 2],
                answer: Answer::Choose(0),
            },
            LoggedQuestion {
                shown_dims: DimensionSet::new(vec![0, 1], 5).unwrap(),
                tuples: vec![0, 2],
                answer: Answer::OptOut,
            },
        ];
        let hs = harvest_constraints(&x, &log, &keys);
        assert_eq!(hs.len(), 1);
        let expect = [-0.15, 0.23, 0.07];
        for (a, b) in hs[0].iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let u = [0.40, 0.35, 0.25];
        assert!((dot(&u, &hs[0]) - 0.038).abs() < 1e-12);
    }

    #[test]
    fn partially_displayed_keys_zero_out() {
        let (x, keys) = houses_keys();
        let log = vec![LoggedQuestion {
            shown_dims: DimensionSet::new(vec![0, 1, 4], 5).unwrap(),
            tuples: vec![0, 2],
            answer: Answer::Choose(0),
        }];
        let hs = harvest_constraints(&x, &log, &keys);
        assert_eq!(hs[0][2], 0.0);
    }

    fn grid_candidates(pts: &[Vec<f64>], poly: &UtilityPolytope) -> Vec<usize> {
        // every argmax over a 0.01 grid of the 3-simplex interior
        let mut found = std::collections::BTreeSet::new();
        for a in 0..=100 {
            for b in 0..=(100 - a) {
                let u = [
                    a as f64 / 100.0,
                    b as f64 / 100.0,
                    (100 - a - b) as f64 / 100.0,
                ];
                if poly.constraints().iter().any(|h| dot(&u, h) <= 0.0) {
                    continue;
                }
                let best = pts
                    .iter()
                    .map(|p| dot(&u, p))
                    .fold(f64::NEG_INFINITY, f64::max);
                for (i, p) in pts.iter().enumerate() {
                    if dot(&u, p) >= best - 1e-12 {
                        found.insert(i);
                    }
                }
            }
        }
        found.into_iter().collect()
    }

    #[test]
    fn candidates_match_grid_oracle() {
        let (x, keys) = houses_keys();
        let pts: Vec<Vec<f64>> = x
            .rows()
            .map(|r| keys.iter().map(|&k| r[k]).collect())
            .collect();
        let poly = UtilityPolytope::new(3);
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let lp: Vec<usize> = (0..5)
            .filter(|&i| {
                let others: Vec<&[f64]> = (0..5).filter(|&j| j != i).map(|j| refs[j]).collect();
                is_candidate(refs[i], &others, &poly).unwrap()
            })
            .collect();
        assert_eq!(lp, grid_candidates(&pts, &poly));
        // p4 maximizes the first attribute
        assert!(lp.contains(&3));
    }

    #[test]
    fn dominated_point_is_never_candidate() {
        let poly = UtilityPolytope::new(2);
        let p = [0.5, 0.5];
        let q = [0.6, 0.7];
        assert!(!is_candidate(&p, &[&q], &poly).unwrap());
        let mut poly = UtilityPolytope::new(2);
        poly.add(vec![1.0, -1.0]);
        assert!(!is_candidate(&p, &[&q], &poly).unwrap());
    }

    #[test]
    fn contradiction_is_empty() {
        let mut poly = UtilityPolytope::new(2);
        poly.add(vec![1.0, -0.5]);
        assert!(poly.center().unwrap().is_some());
        poly.add(vec![-1.0, 0.5]);
        assert!(poly.center().unwrap().is_none());
    }

    #[test]
    fn interior_samples_are_strictly_inside() {
        let mut poly = UtilityPolytope::new(3);
        poly.add(vec![1.0, -1.0, 0.0]);
        poly.add(vec![0.0, 1.0, -0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for v in poly.interior_samples(30, &mut rng).unwrap() {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(v.iter().all(|&w| w > 0.0));
            assert!(poly.constraints().iter().all(|h| dot(&v, h) > 0.0));
        }
    }

    #[test]
    fn example_table_converges_to_best_house() {
        let (x, keys) = houses_keys();
        let truth = UtilityVector::normalized(vec![0.40, 0.35, 0.25]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut st = SearchState::new(&x, &keys, vec![], Exec::Sequential, &mut rng).unwrap();
        let mut steps = 0;
        while !st.is_terminal() {
            let before = st.candidates.len();
            let (a, b) = st.next_pair(&x, &mut rng).unwrap();
            assert_ne!(a, b);
            let ua = truth.utility(&st.key_row(&x, a)).unwrap();
            let ub = truth.utility(&st.key_row(&x, b)).unwrap();
            let (c, o) = if ua >= ub { (a, b) } else { (b, a) };
            st.apply(&x, c, &[o], &mut rng).unwrap();
            assert!(st.candidates.len() <= before);
            assert!(st.candidates.contains(&2));
            steps += 1;
            assert!(steps < 50);
        }
        assert_eq!(st.candidates, vec![2]);
        assert_eq!(st.result(&x, &mut rng).unwrap(), 2);
    }

    #[test]
    fn inconsistent_answer_is_rejected() {
        let (x, keys) = houses_keys();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = SearchState::new(&x, &keys, vec![], Exec::Sequential, &mut rng).unwrap();
        let (a, b) = st.next_pair(&x, &mut rng).unwrap();
        st.apply(&x, a, &[b], &mut rng).unwrap();
        let before = st.clone();
        st.last_display = vec![a, b];
        assert!(matches!(
            st.apply(&x, b, &[a], &mut rng),
            Err(SearchError::EmptyPolytope)
        ));
        assert_eq!(st.polytope, before.polytope);
        assert_eq!(st.candidates, before.candidates);
        let hidden = (0..5).find(|r| *r != a && *r != b).unwrap();
        assert!(matches!(
            st.apply(&x, hidden, &[a], &mut rng),
            Err(SearchError::NotDisplayed(r)) if r == hidden
        ));
    }

    #[test]
    fn forced_pair_and_early_result() {
        let x = Dataset::from_rows(
            vec![vec![1.0, 0.2], vec![0.2, 1.0], vec![0.1, 0.1]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut st = SearchState::new(&x, &[0, 1], vec![], Exec::Sequential, &mut rng).unwrap();
        assert_eq!(st.candidates, vec![0, 1]);
        let (a, b) = st.next_pair(&x, &mut rng).unwrap();
        let mut pair = [a, b];
        pair.sort_unstable();
        assert_eq!(pair, [0, 1]);
        let r = st.result(&x, &mut rng).unwrap();
        assert!(r == 0 || r == 1);
        st.apply(&x, 1, &[0], &mut rng).unwrap();
        assert!(st.is_terminal());
        assert!(matches!(
            st.next_pair(&x, &mut rng),
            Err(SearchError::Terminal)
        ));
        assert_eq!(st.result(&x, &mut rng).unwrap(), 1);
    }

    #[test]
    fn random_pairs_are_distinct_live_candidates() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = crate::harness::gen_uniform(50, 3, &mut rng).unwrap();
            let mut st =
                SearchState::new(&x, &[0, 1, 2], vec![], Exec::Sequential, &mut rng).unwrap();
            if st.is_terminal() {
                continue;
            }
            let (a, b) = st.next_pair(&x, &mut rng).unwrap();
            assert_ne!(a, b);
            assert!(st.candidates.contains(&a) && st.candidates.contains(&b));
        }
    }
}
