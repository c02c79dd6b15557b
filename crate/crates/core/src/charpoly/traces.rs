use super::{ArithmeticMode, TraceVector};
use crate::error::{Error, Result};
use crate::graph::{scc_decompose, Digraph};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

/// Upper bound on vertex-step updates in one trace computation.
pub const TRACE_WORK_LIMIT: f64 = 2e12;

/// tr(A^k) for k = 1..=K.
///
/// A closed walk never leaves the strongly connected component it starts
/// in, so the powers are accumulated per cyclic component, one source row of
/// the power matrix at a time.
pub fn traces(g: &Digraph, order: usize, mode: ArithmeticMode) -> Result<TraceVector> {
    Ok(match mode {
        ArithmeticMode::Exact => TraceVector::exact(traces_exact(g, order)?),
        ArithmeticMode::Float => TraceVector::float(traces_float(g, order)?),
    })
}

fn blocks(g: &Digraph, order: usize) -> Result<Vec<Digraph>> {
    if order == 0 {
        return Err(Error::Parameter("trace order must be at least 1".into()));
    }
    let scc = scc_decompose(g);
    let blocks: Vec<Digraph> = scc.nontrivial().map(|(c, _)| g.induced(c)).collect();
    let work: f64 = blocks
        .iter()
        .map(|b| b.n() as f64 * order as f64 * (b.n() + b.edge_count()) as f64)
        .sum();
    if work > TRACE_WORK_LIMIT {
        return Err(Error::Budget(format!(
            "trace computation needs about {work:.3e} updates (limit {TRACE_WORK_LIMIT:.1e})"
        )));
    }
    Ok(blocks)
}

pub fn traces_exact(g: &Digraph, order: usize) -> Result<Vec<BigInt>> {
    let mut totals = vec![BigUint::zero(); order];
    for block in blocks(g, order)? {
        let m = block.n();
        // Dense value arrays with lists of their nonzero positions, so one
        // source row costs the size of its walk frontier rather than m.
        let mut cur = vec![0u128; m];
        let mut next = vec![0u128; m];
        let mut cur_support: Vec<usize> = Vec::new();
        let mut next_support: Vec<usize> = Vec::new();
        for source in 0..m {
            for &v in &cur_support {
                cur[v] = 0;
            }
            cur_support.clear();
            cur[source] = 1;
            cur_support.push(source);
            let mut diag = Vec::with_capacity(order);
            let mut overflow = false;
            'steps: for _ in 0..order {
                for &v in &next_support {
                    next[v] = 0;
                }
                next_support.clear();
                for &v in &cur_support {
                    let x = cur[v];
                    for &w in block.successors(v) {
                        let w = w as usize;
                        if next[w] == 0 {
                            next_support.push(w);
                        }
                        match next[w].checked_add(x) {
                            Some(y) => next[w] = y,
                            None => {
                                overflow = true;
                                break 'steps;
                            }
                        }
                    }
                }
                diag.push(next[source]);
                std::mem::swap(&mut cur, &mut next);
                std::mem::swap(&mut cur_support, &mut next_support);
            }
            if overflow {
                for (t, x) in totals
                    .iter_mut()
                    .zip(row_diagonal_big(&block, source, order))
                {
                    *t += x;
                }
            } else {
                for (t, x) in totals.iter_mut().zip(diag) {
                    *t += x;
                }
            }
        }
    }
    Ok(totals.into_iter().map(BigInt::from).collect())
}

fn row_diagonal_big(block: &Digraph, source: usize, order: usize) -> Vec<BigUint> {
    let m = block.n();
    let mut cur = vec![BigUint::zero(); m];
    cur[source] = BigUint::from(1u8);
    let mut diag = Vec::with_capacity(order);
    for _ in 0..order {
        let mut next = vec![BigUint::zero(); m];
        for (v, x) in cur.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for &w in block.successors(v) {
                next[w as usize] += x;
            }
        }
        diag.push(next[source].clone());
        cur = next;
    }
    diag
}

/// Floating-point traces. Contributions of the source rows are added with
/// Neumaier compensation.
pub fn traces_float(g: &Digraph, order: usize) -> Result<Vec<f64>> {
    let mut sums = vec![0.0f64; order];
    let mut comps = vec![0.0f64; order];
    for block in blocks(g, order)? {
        let m = block.n();
        let mut cur = vec![0.0f64; m];
        let mut next = vec![0.0f64; m];
        for source in 0..m {
            cur.fill(0.0);
            cur[source] = 1.0;
            for k in 0..order {
                next.fill(0.0);
                for (v, &x) in cur.iter().enumerate() {
                    if x != 0.0 {
                        for &w in block.successors(v) {
                            next[w as usize] += x;
                        }
                    }
                }
                let term = next[source];
                let t = sums[k] + term;
                comps[k] += if sums[k].abs() >= term.abs() {
                    (sums[k] - t) + term
                } else {
                    (term - t) + sums[k]
                };
                sums[k] = t;
                std::mem::swap(&mut cur, &mut next);
            }
        }
    }
    Ok(sums.iter().zip(&comps).map(|(s, c)| s + c).collect())
}
