use super::code::LdpcCode;
use super::FecError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Systematic part of the final hard decision.
    pub bits: Vec<u8>,
    pub converged: bool,
    /// Message-passing iterations run; 0 when the channel decision already
    /// satisfied every check.
    pub iterations: usize,
}

impl LdpcCode {
    /// Flooding normalized min-sum decoding of channel LLRs (positive favours
    /// bit 0). Stops as soon as the hard decision satisfies every check.
    pub fn decode_min_sum(&self, llrs: &[f64]) -> Result<DecodeOutcome, FecError> {
        if llrs.len() != self.n {
            return Err(FecError::LengthMismatch {
                expected: self.n,
                found: llrs.len(),
            });
        }
        // Edges are numbered check by check; var_edges[v] lists the edges of v.
        let mut var_edges: Vec<Vec<usize>> = vec![Vec::with_capacity(3); self.n];
        let mut edge_var = Vec::new();
        let mut check_start = Vec::with_capacity(self.checks.len() + 1);
        for check in &self.checks {
            check_start.push(edge_var.len());
            for &v in check {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
        }
        check_start.push(edge_var.len());

        let mut c2v = vec![0.0; edge_var.len()];
        let mut v2c: Vec<f64> = edge_var.iter().map(|&v| llrs[v]).collect();
        let mut hard: Vec<u8> = llrs.iter().map(|&l| u8::from(l < 0.0)).collect();

        let mut iterations = 0;
        let mut converged = self.syndrome_weight(&hard) == 0;
        while !converged && iterations < self.max_iters {
            for c in 0..self.checks.len() {
                let edges = check_start[c]..check_start[c + 1];
                let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
                let mut negative = false;
                for e in edges.clone() {
                    let m = v2c[e];
                    negative ^= m < 0.0;
                    let a = m.abs();
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        arg = e;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for e in edges {
                    let mag = if e == arg { min2 } else { min1 };
                    let sign_neg = negative ^ (v2c[e] < 0.0);
                    c2v[e] = if sign_neg {
                        -self.alpha * mag
                    } else {
                        self.alpha * mag
                    };
                }
            }
            for v in 0..self.n {
                let total: f64 = llrs[v] + var_edges[v].iter().map(|&e| c2v[e]).sum::<f64>();
                hard[v] = u8::from(total < 0.0);
                for &e in &var_edges[v] {
                    v2c[e] = total - c2v[e];
                }
            }
            iterations += 1;
            converged = self.syndrome_weight(&hard) == 0;
        }
        hard.truncate(self.k);
        Ok(DecodeOutcome {
            bits: hard,
            converged,
            iterations,
        })
    }
}
