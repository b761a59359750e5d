//! Breadth-first tree search over an upper-triangular model `ỹ = R·x + w`.
//!
//! Layers are resolved from the last column of `R` to the first. Partial
//! candidates carry the accumulated squared Euclidean distance; a parent's
//! children are enumerated in Schnorr–Euchner order (ascending distance
//! increment, ties to the lower symbol index).

use std::cmp::Ordering;

use num_complex::Complex64;

use super::DetectError;
use crate::airlink::ConstellationSpec;
use crate::numkit::{ComplexMatrix, ComplexVector, Permutation};

/// A (partial or complete) symbol-index vector and its accumulated metric.
///
/// During the search only the entries for already-resolved layers are
/// meaningful; the rest are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub symbols: Vec<usize>,
    pub metric: f64,
}

/// Survivor list, best first once the search has completed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateList {
    pub entries: Vec<Candidate>,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.entries.first()
    }

    /// Maps every candidate from permuted layer order back to user order.
    pub fn unpermute(&self, perm: &Permutation) -> CandidateList {
        CandidateList {
            entries: self
                .entries
                .iter()
                .map(|c| Candidate {
                    symbols: perm.unpermute(&c.symbols),
                    metric: c.metric,
                })
                .collect(),
        }
    }

    /// Multiplies every metric by `scale`.
    pub fn rescale(&mut self, scale: f64) {
        for c in &mut self.entries {
            c.metric *= scale;
        }
    }
}

/// Total order used wherever candidates are ranked: metric, then
/// lexicographic symbol index.
pub(crate) fn rank_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.metric
        .total_cmp(&b.metric)
        .then_with(|| a.symbols.cmp(&b.symbols))
}

/// Per-layer context shared by all parents of one layer.
struct Layer<'a> {
    r: &'a ComplexMatrix,
    y: &'a ComplexVector,
    cons: &'a ConstellationSpec,
    idx: usize,
}

impl Layer<'_> {
    /// Up to `count` best children of `parent`, Schnorr–Euchner ordered.
    fn children(&self, parent: &Candidate, count: usize) -> Vec<Candidate> {
        if count == 0 {
            return Vec::new();
        }
        let m = self.r.cols();
        let l = self.idx;
        let mut b = self.y[l];
        for j in l + 1..m {
            b -= self.r[(l, j)] * self.cons.points[parent.symbols[j]];
        }
        let rll = self.r[(l, l)];
        let mut inc: Vec<(f64, usize)> = self
            .cons
            .points
            .iter()
            .enumerate()
            .map(|(s, &p)| ((b - rll * p).norm_sqr(), s))
            .collect();
        let count = count.min(inc.len());
        let by_inc = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if count < inc.len() {
            inc.select_nth_unstable_by(count - 1, by_inc);
            inc.truncate(count);
        }
        inc.sort_unstable_by(by_inc);
        inc.into_iter()
            .map(|(d, s)| {
                let mut symbols = parent.symbols.clone();
                symbols[l] = s;
                Candidate {
                    symbols,
                    metric: parent.metric + d,
                }
            })
            .collect()
    }
}

fn root(m: usize) -> Candidate {
    Candidate {
        symbols: vec![0; m],
        metric: 0.0,
    }
}

fn check_model(r: &ComplexMatrix, y: &ComplexVector) -> Result<(), DetectError> {
    if r.rows() != r.cols() || y.len() != r.rows() {
        return Err(DetectError::DimensionMismatch(format!(
            "R is {}x{}, ỹ has length {}",
            r.rows(),
            r.cols(),
            y.len()
        )));
    }
    Ok(())
}

/// K-best search: every survivor spawns its `expand` best children and the
/// `k` smallest accumulated distances survive each layer.
///
/// `k` and `expand` are clamped to at least 1 and `expand` to the
/// constellation size. The returned list is sorted ascending by metric.
pub fn kbest_detect(
    r: &ComplexMatrix,
    y_tilde: &ComplexVector,
    k: usize,
    cons: &ConstellationSpec,
    expand: usize,
) -> Result<CandidateList, DetectError> {
    check_model(r, y_tilde)?;
    let k = k.max(1);
    let expand = expand.clamp(1, cons.size());
    let m = r.cols();
    let mut survivors = vec![root(m)];
    for idx in (0..m).rev() {
        let layer = Layer {
            r,
            y: y_tilde,
            cons,
            idx,
        };
        let mut next: Vec<Candidate> = survivors.iter().flat_map(|p| layer.children(p, expand)).collect();
        if next.len() > k {
            next.select_nth_unstable_by(k - 1, rank_order);
            next.truncate(k);
        }
        survivors = next;
    }
    survivors.sort_by(rank_order);
    Ok(CandidateList { entries: survivors })
}

/// Per-parent child budget assumed by [`SrKBestParams::reference`].
pub const DEFAULT_EXPAND: usize = 4;

/// Candidate-selection schedule for sorting-reduced K-best.
///
/// For the parent at rank `i` of the current survivor list, its first
/// `p[i]` Schnorr–Euchner children go straight into the next list and its
/// next `v[i]` children join a sorting pool. The best `s` pool members take
/// the (1-based) list positions in `q`; the direct children fill the other
/// positions in parent order.
#[derive(Clone, Debug, PartialEq)]
pub struct SrKBestParams {
    pub k: usize,
    pub s: usize,
    pub p: Vec<usize>,
    pub v: Vec<usize>,
    /// 1-based positions of the sorted pool members.
    pub q: Vec<usize>,
    /// Per-parent child-expansion budget: `p[i] + v[i] ≤ expand`.
    pub expand: usize,
}

impl SrKBestParams {
    /// `(K, S) = (16, 4)` schedule tuned for 16×64 correlated channels.
    pub fn reference() -> Self {
        SrKBestParams {
            k: 16,
            s: 4,
            p: vec![2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0],
            v: vec![2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2],
            q: vec![2, 4, 6, 8],
            expand: DEFAULT_EXPAND,
        }
    }

    /// Schedule that enumerates every child of every parent with no pool:
    /// `p = [expand; k/expand]`, rest zero. Needs `expand` dividing `k`.
    pub fn exhaustive(k: usize, expand: usize) -> Self {
        let mut p = vec![0; k];
        for slot in p.iter_mut().take(k / expand) {
            *slot = expand;
        }
        SrKBestParams {
            k,
            s: 0,
            p,
            v: vec![0; k],
            q: Vec::new(),
            expand,
        }
    }

    pub fn validate(&self) -> Result<(), DetectError> {
        let bad = |msg: String| Err(DetectError::InvalidParams(msg));
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if self.s > self.k {
            return bad(format!("s = {} exceeds k = {}", self.s, self.k));
        }
        if self.p.len() != self.k || self.v.len() != self.k {
            return bad(format!(
                "p and v must have length k = {} (got {} and {})",
                self.k,
                self.p.len(),
                self.v.len()
            ));
        }
        if self.q.len() != self.s {
            return bad(format!(
                "q must have length s = {} (got {})",
                self.s,
                self.q.len()
            ));
        }
        let sum_p: usize = self.p.iter().sum();
        if sum_p != self.k - self.s {
            return bad(format!("sum(p) = {sum_p} but k - s = {}", self.k - self.s));
        }
        if self.q.iter().any(|&pos| pos == 0 || pos > self.k) {
            return bad(format!("q entries must lie in 1..={}", self.k));
        }
        if self.q.windows(2).any(|w| w[0] >= w[1]) {
            return bad("q must be strictly increasing".into());
        }
        if let Some(i) = (0..self.k).find(|&i| self.p[i] + self.v[i] > self.expand) {
            return bad(format!(
                "p[{i}] + v[{i}] = {} exceeds the expansion budget {}",
                self.p[i] + self.v[i],
                self.expand
            ));
        }
        if self.p[0] == 0 && (self.v[0] == 0 || self.s == 0) {
            return bad("the first parent must contribute at least one child".into());
        }
        Ok(())
    }
}

/// Sorting-reduced K-best search.
///
/// The composed survivor list of one layer is used, unsorted, as the parent
/// ranking of the next; only the pool is sorted. The final list is sorted
/// ascending by metric.
pub fn sr_kbest_detect(
    r: &ComplexMatrix,
    y_tilde: &ComplexVector,
    params: &SrKBestParams,
    cons: &ConstellationSpec,
) -> Result<CandidateList, DetectError> {
    params.validate()?;
    check_model(r, y_tilde)?;
    let m = r.cols();
    let mut in_q = vec![false; params.k];
    for &pos in &params.q {
        in_q[pos - 1] = true;
    }

    let mut survivors = vec![root(m)];
    for idx in (0..m).rev() {
        let layer = Layer {
            r,
            y: y_tilde,
            cons,
            idx,
        };
        let mut direct = Vec::with_capacity(params.k);
        let mut pool = Vec::new();
        for (i, parent) in survivors.iter().enumerate() {
            let (take, sort) = (params.p[i], params.v[i]);
            let mut kids = layer.children(parent, take + sort);
            let pooled = kids.split_off(take.min(kids.len()));
            direct.extend(kids);
            pool.extend(pooled);
        }
        pool.sort_by(rank_order);
        pool.truncate(params.s);

        let mut direct = direct.into_iter();
        let mut pool = pool.into_iter();
        let mut next = Vec::with_capacity(params.k);
        for &sorted_slot in &in_q {
            let pick = if sorted_slot { pool.next() } else { direct.next() };
            next.extend(pick);
        }
        survivors = next;
    }
    survivors.sort_by(rank_order);
    Ok(CandidateList { entries: survivors })
}

/// Nearest-point successive cancellation on `ỹ = R·x`: returns symbol
/// indices in the column order of `R`.
pub(crate) fn successive_slice(
    r: &ComplexMatrix,
    y_tilde: &ComplexVector,
    cons: &ConstellationSpec,
) -> (Vec<usize>, f64) {
    let m = r.cols();
    let mut sym = vec![0usize; m];
    let mut metric = 0.0;
    for l in (0..m).rev() {
        let mut b: Complex64 = y_tilde[l];
        for j in l + 1..m {
            b -= r[(l, j)] * cons.points[sym[j]];
        }
        let rll = r[(l, l)];
        sym[l] = cons.slice(b / rll);
        metric += (b - rll * cons.points[sym[l]]).norm_sqr();
    }
    (sym, metric)
}
