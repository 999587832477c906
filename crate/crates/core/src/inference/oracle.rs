use std::time::Instant;

use super::{InferenceError, EPS_ZERO};
use crate::model::{config_index, CredalNetwork, Interval, IntervalResult, Query};

pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;

/// Bounds by enumerating every joint vertex selection and evaluating the
/// resulting Bayesian network by full joint summation.
pub fn brute_force_oracle(net: &CredalNetwork, query: &Query, cap: u128) -> Result<IntervalResult, InferenceError> {
    query.check(net)?;
    let count = net.selection_count();
    if count > cap {
        return Err(InferenceError::CapExceeded { count, cap });
    }
    let start = Instant::now();
    let cards = net.cards();
    let n = net.len();

    // flat list of local sets: (var, parent config) -> slot
    let mut slot_base = vec![0usize; n];
    let mut radices = Vec::new();
    let mut slot_vertices: Vec<&[Vec<f64>]> = Vec::new();
    for (v, base) in slot_base.iter_mut().enumerate() {
        *base = radices.len();
        for s in &net.table(v).sets {
            radices.push(s.len());
            slot_vertices.push(s.vertices());
        }
    }

    // joint configurations consistent with the evidence, as (slot, state) per variable
    let joint: usize = cards.iter().product();
    let mut terms: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    let mut states = vec![0usize; n];
    for _ in 0..joint {
        if query.evidence.iter().all(|(&v, &s)| states[v] == s) {
            let factors = (0..n)
                .map(|v| {
                    let ps = net.parents(v);
                    let pst: Vec<usize> = ps.iter().map(|&p| states[p]).collect();
                    let pc: Vec<usize> = ps.iter().map(|&p| cards[p]).collect();
                    (slot_base[v] + config_index(&pst, &pc).unwrap(), states[v])
                })
                .collect();
            terms.push((states[query.target], factors));
        }
        for pos in (0..n).rev() {
            states[pos] += 1;
            if states[pos] < cards[pos] {
                break;
            }
            states[pos] = 0;
        }
    }

    let tc = cards[query.target];
    let mut lo = vec![f64::INFINITY; tc];
    let mut hi = vec![f64::NEG_INFINITY; tc];
    let mut dropped = 0usize;
    let mut choice = vec![0usize; radices.len()];
    let mut joint_q = vec![0.0; tc];
    for _ in 0..count {
        joint_q.iter_mut().for_each(|x| *x = 0.0);
        for (xq, factors) in &terms {
            let p: f64 = factors
                .iter()
                .map(|&(slot, s)| slot_vertices[slot][choice[slot]][s])
                .product();
            joint_q[*xq] += p;
        }
        let mass: f64 = joint_q.iter().sum();
        let denom = if query.is_marginal() {
            1.0
        } else if mass <= EPS_ZERO {
            dropped += 1;
            f64::NAN
        } else {
            mass
        };
        if !denom.is_nan() {
            for s in 0..tc {
                let r = joint_q[s] / denom;
                lo[s] = lo[s].min(r);
                hi[s] = hi[s].max(r);
            }
        }
        for pos in (0..choice.len()).rev() {
            choice[pos] += 1;
            if choice[pos] < radices[pos] {
                break;
            }
            choice[pos] = 0;
        }
    }
    if lo[0].is_infinite() {
        return Err(InferenceError::ZeroEvidence { dropped });
    }
    Ok(IntervalResult {
        bounds: lo.into_iter().zip(hi).map(|(l, h)| Interval::new(l, h)).collect(),
        method: "brute-force".into(),
        elapsed: start.elapsed(),
        dropped_tables: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConditionalCredalTable, CredalSet};

    fn set(vs: &[&[f64]]) -> CredalSet {
        CredalSet::new(vs[0].len(), vs.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    fn two_node() -> CredalNetwork {
        CredalNetwork::new(
            vec![2, 2],
            vec![
                ConditionalCredalTable::new(0, vec![], vec![set(&[&[0.4, 0.6], &[0.7, 0.3]])]),
                ConditionalCredalTable::new(
                    1,
                    vec![0],
                    vec![set(&[&[0.1, 0.9], &[0.2, 0.8]]), set(&[&[0.5, 0.5], &[0.6, 0.4]])],
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_node_marginal() {
        // P(b0) = P(a0) q0 + P(a1) q1 is monotone in each choice:
        // min 0.7*0.1 + 0.3*0.5 = 0.22, max 0.4*0.2 + 0.6*0.6 = 0.44
        let r = brute_force_oracle(&two_node(), &Query::marginal(1), DEFAULT_ORACLE_CAP).unwrap();
        assert!((r.lower(0) - 0.22).abs() < 1e-12);
        assert!((r.upper(0) - 0.44).abs() < 1e-12);
        assert!((r.lower(1) - 0.56).abs() < 1e-12);
        assert!((r.upper(1) - 0.78).abs() < 1e-12);
    }

    #[test]
    fn two_node_posterior() {
        // P(a0 | b0) = p q0 / (p q0 + (1-p) q1) over the corners
        let mut best = (f64::INFINITY, f64::NEG_INFINITY);
        for p in [0.4, 0.7] {
            for q0 in [0.1, 0.2] {
                for q1 in [0.5, 0.6] {
                    let r = p * q0 / (p * q0 + (1.0 - p) * q1);
                    best = (best.0.min(r), best.1.max(r));
                }
            }
        }
        let r = brute_force_oracle(&two_node(), &Query::conditional(0, [(1, 0)]), DEFAULT_ORACLE_CAP).unwrap();
        assert!((r.lower(0) - best.0).abs() < 1e-12);
        assert!((r.upper(0) - best.1).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            brute_force_oracle(&two_node(), &Query::marginal(1), 4),
            Err(InferenceError::CapExceeded { count: 8, cap: 4 })
        ));
    }

    #[test]
    fn impossible_evidence() {
        let net = CredalNetwork::new(
            vec![2, 2],
            vec![
                ConditionalCredalTable::new(0, vec![], vec![set(&[&[1.0, 0.0]])]),
                ConditionalCredalTable::new(1, vec![0], vec![set(&[&[1.0, 0.0]]), set(&[&[0.5, 0.5]])]),
            ],
        )
        .unwrap();
        let r = brute_force_oracle(&net, &Query::conditional(0, [(1, 1)]), DEFAULT_ORACLE_CAP);
        assert!(matches!(r, Err(InferenceError::ZeroEvidence { dropped: 1 })));
    }
}
