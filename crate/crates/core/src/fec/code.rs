use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gf2::{row_reduce, BitRow};
use super::FecError;

pub const CODE_N: usize = 288;
pub const CODE_K: usize = 144;
pub const COL_WEIGHT: usize = 3;
pub const ROW_WEIGHT: usize = 6;

const MAX_SEED_ATTEMPTS: u64 = 64;

/// Systematic LDPC code with a sparse parity-check matrix.
///
/// Codeword positions are ordered so that the first `k` bits are the
/// message; `column_order[i]` records which column of the originally
/// constructed graph ended up at position `i`.
#[derive(Clone, Debug)]
pub struct LdpcCode {
    pub n: usize,
    pub k: usize,
    /// Variable-node positions of each check, ascending.
    pub checks: Vec<Vec<usize>>,
    /// Checks touching each variable node.
    pub vars: Vec<Vec<usize>>,
    pub column_order: Vec<usize>,
    pub max_iters: usize,
    /// Check-update normalization; 1.0 gives plain min-sum.
    pub alpha: f64,
    /// Seed the construction finally succeeded with.
    pub seed: u64,
    /// `parity[r] = ⟨parity_map[r], message⟩` over GF(2).
    parity_map: Vec<BitRow>,
}

/// Builds the regular (3,6) LDPC(288,144) code for `seed`.
///
/// Edges are placed by progressive edge growth: each new edge of a variable
/// node goes to a check outside its current neighbourhood tree when one
/// exists (otherwise to one on the deepest level), preferring the lowest
/// check degree and breaking ties with a `seed`-driven generator. If the
/// resulting matrix is not full rank, or the degree constraints cannot be
/// met, the next seed is tried.
pub fn build_code(seed: u64) -> Result<LdpcCode, FecError> {
    for attempt in 0..MAX_SEED_ATTEMPTS {
        let s = seed.wrapping_add(attempt);
        if let Some(checks) = progressive_edge_growth(CODE_N, CODE_K, COL_WEIGHT, ROW_WEIGHT, s) {
            if let Some(code) = systematize(checks, s) {
                return Ok(code);
            }
        }
    }
    Err(FecError::ConstructionFailed {
        attempts: MAX_SEED_ATTEMPTS,
    })
}

fn progressive_edge_growth(n: usize, m: usize, dv: usize, dc: usize, seed: u64) -> Option<Vec<Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(dv); n];
    let mut chk_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(dc); m];

    for v in 0..n {
        for e in 0..dv {
            let open = |c: usize, chk_adj: &[Vec<usize>], var_adj: &[Vec<usize>]| {
                chk_adj[c].len() < dc && !var_adj[v].contains(&c)
            };
            let candidates: Vec<usize> = if e == 0 {
                (0..m).filter(|&c| open(c, &chk_adj, &var_adj)).collect()
            } else {
                let (reached, last_level) = neighbourhood(v, &var_adj, &chk_adj, m);
                let outside: Vec<usize> = (0..m)
                    .filter(|&c| !reached[c] && open(c, &chk_adj, &var_adj))
                    .collect();
                if !outside.is_empty() {
                    outside
                } else {
                    let deepest: Vec<usize> = last_level
                        .into_iter()
                        .filter(|&c| open(c, &chk_adj, &var_adj))
                        .collect();
                    if deepest.is_empty() {
                        (0..m).filter(|&c| open(c, &chk_adj, &var_adj)).collect()
                    } else {
                        deepest
                    }
                }
            };
            let min_deg = candidates.iter().map(|&c| chk_adj[c].len()).min()?;
            let lightest: Vec<usize> = candidates
                .into_iter()
                .filter(|&c| chk_adj[c].len() == min_deg)
                .collect();
            let c = lightest[rng.random_range(0..lightest.len())];
            var_adj[v].push(c);
            chk_adj[c].push(v);
        }
    }
    if chk_adj.iter().any(|c| c.len() != dc) {
        return None;
    }
    Some(chk_adj)
}

/// Breadth-first expansion of the Tanner graph from variable `v`. Returns
/// the checks reached and the checks first reached on the deepest level
/// before the reached set stopped growing.
fn neighbourhood(
    v: usize,
    var_adj: &[Vec<usize>],
    chk_adj: &[Vec<usize>],
    m: usize,
) -> (Vec<bool>, Vec<usize>) {
    let mut reached = vec![false; m];
    let mut seen_var = vec![false; var_adj.len()];
    seen_var[v] = true;
    let mut level: Vec<usize> = Vec::new();
    for &c in &var_adj[v] {
        if !reached[c] {
            reached[c] = true;
            level.push(c);
        }
    }
    let mut count = level.len();
    let mut last = level.clone();
    let mut frontier: VecDeque<usize> = level.into_iter().collect();
    loop {
        let mut next = Vec::new();
        while let Some(c) = frontier.pop_front() {
            for &u in &chk_adj[c] {
                if seen_var[u] {
                    continue;
                }
                seen_var[u] = true;
                for &c2 in &var_adj[u] {
                    if !reached[c2] {
                        reached[c2] = true;
                        next.push(c2);
                    }
                }
            }
        }
        if next.is_empty() || count + next.len() == m {
            if count + next.len() == m && !next.is_empty() {
                last = next;
            }
            return (reached, last);
        }
        count += next.len();
        last = next.clone();
        frontier = next.into_iter().collect();
    }
}

fn systematize(checks: Vec<Vec<usize>>, seed: u64) -> Option<LdpcCode> {
    let (n, m) = (CODE_N, checks.len());
    let mut rows: Vec<BitRow> = checks
        .iter()
        .map(|c| {
            let mut r = BitRow::zeros(n);
            for &v in c {
                r.set(v);
            }
            r
        })
        .collect();
    let pivots = row_reduce(&mut rows, n);
    if pivots.len() != m {
        return None;
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let info: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let column_order: Vec<usize> = info.iter().copied().chain(pivots.iter().copied()).collect();
    let mut position = vec![0; n];
    for (pos, &col) in column_order.iter().enumerate() {
        position[col] = pos;
    }
    let parity_map = rows
        .iter()
        .map(|row| {
            let mut b = BitRow::zeros(info.len());
            for (i, &c) in info.iter().enumerate() {
                if row.get(c) {
                    b.set(i);
                }
            }
            b
        })
        .collect();
    let checks: Vec<Vec<usize>> = checks
        .iter()
        .map(|c| {
            let mut p: Vec<usize> = c.iter().map(|&v| position[v]).collect();
            p.sort_unstable();
            p
        })
        .collect();
    let mut vars = vec![Vec::new(); n];
    for (ci, c) in checks.iter().enumerate() {
        for &v in c {
            vars[v].push(ci);
        }
    }
    Some(LdpcCode {
        n,
        k: info.len(),
        checks,
        vars,
        column_order,
        max_iters: 25,
        alpha: 0.75,
        seed,
        parity_map,
    })
}

impl LdpcCode {
    /// Systematic codeword `[message | parity]`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, FecError> {
        if message.len() != self.k {
            return Err(FecError::LengthMismatch {
                expected: self.k,
                found: message.len(),
            });
        }
        let m = BitRow::from_bits(message);
        let mut codeword: Vec<u8> = message.iter().map(|b| b & 1).collect();
        codeword.extend(self.parity_map.iter().map(|row| row.dot(&m)));
        Ok(codeword)
    }

    /// `true` when every parity check is satisfied.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n && self.syndrome_weight(bits) == 0
    }

    /// Number of unsatisfied checks.
    pub fn syndrome_weight(&self, bits: &[u8]) -> usize {
        self.checks
            .iter()
            .filter(|c| c.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 1)
            .count()
    }

    /// Row `i` of the systematic generator matrix `[I | Pᵀ]`.
    pub fn generator_row(&self, i: usize) -> Vec<u8> {
        let mut unit = vec![0u8; self.k];
        unit[i] = 1;
        self.encode(&unit).expect("unit message has length k")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code() -> LdpcCode {
        build_code(1).unwrap()
    }

    #[test]
    fn regular_degrees() {
        let c = code();
        assert_eq!((c.n, c.k), (CODE_N, CODE_K));
        assert!(c.checks.iter().all(|r| r.len() == ROW_WEIGHT));
        assert!(c.vars.iter().all(|v| v.len() == COL_WEIGHT));
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let c = code();
        let cw = c.encode(&[0; CODE_K]).unwrap();
        assert!(cw.iter().all(|&b| b == 0));
        assert!(c.is_codeword(&cw));
    }

    #[test]
    fn random_messages_satisfy_all_checks() {
        let c = code();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let msg: Vec<u8> = (0..CODE_K).map(|_| rng.random_range(0..2)).collect();
            let cw = c.encode(&msg).unwrap();
            assert_eq!(&cw[..CODE_K], &msg[..]);
            // recompute every check directly from the sparse rows
            for check in &c.checks {
                let parity = check.iter().map(|&v| cw[v] as u32).sum::<u32>() % 2;
                assert_eq!(parity, 0);
            }
        }
    }

    #[test]
    fn generator_rows_are_codewords() {
        let c = code();
        for i in [0, 17, 143] {
            let g = c.generator_row(i);
            assert!(c.is_codeword(&g));
            assert_eq!(g[i], 1);
        }
    }

    #[test]
    fn encoding_is_linear_and_injective() {
        let c = code();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a: Vec<u8> = (0..CODE_K).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<u8> = (0..CODE_K).map(|_| rng.random_range(0..2)).collect();
            let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let (ca, cb) = (c.encode(&a).unwrap(), c.encode(&b).unwrap());
            let want: Vec<u8> = ca.iter().zip(&cb).map(|(x, y)| x ^ y).collect();
            assert_eq!(c.encode(&sum).unwrap(), want);
            assert_eq!(a == b, ca == cb);
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let a = build_code(9).unwrap();
        let b = build_code(9).unwrap();
        assert_eq!(a.checks, b.checks);
        assert_eq!(a.column_order, b.column_order);
    }

    #[test]
    fn wrong_length_rejected() {
        assert_eq!(
            code().encode(&[0; 10]),
            Err(FecError::LengthMismatch {
                expected: CODE_K,
                found: 10
            })
        );
    }
}
