use std::time::Instant;

use super::factor::{combine_raw, factor_from_table, marginalize_out, reduce_factor, restrict_evidence, CredalFactor};
use super::{elimination_order, InferenceError, ReductionMode, ReductionPolicy, EPS_MARGINAL, EPS_ZERO};
use crate::model::{CredalNetwork, Interval, IntervalResult, Query};
use crate::preprocess::requisite_graph;

/// Table counts around one reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VeStep {
    /// Variable whose bucket was being processed; `None` for the initial
    /// factors and the final combination.
    pub eliminating: Option<usize>,
    /// Table counts of the two operands (`0` for the initial factors).
    pub inputs: (usize, usize),
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VeTrace {
    pub order: Vec<usize>,
    pub steps: Vec<VeStep>,
}

impl VeTrace {
    pub fn max_tables(&self) -> usize {
        self.steps.iter().map(|s| s.after).max().unwrap_or(0)
    }
}

/// Credal variable elimination on `net` as given.
pub fn credal_ve(net: &CredalNetwork, query: &Query, policy: &ReductionPolicy) -> Result<IntervalResult, InferenceError> {
    credal_ve_traced(net, query, policy).map(|(r, _)| r)
}

/// Prunes the network to the query's requisite part, then runs [`credal_ve`].
pub fn infer(net: &CredalNetwork, query: &Query, policy: &ReductionPolicy) -> Result<IntervalResult, InferenceError> {
    query.check(net)?;
    let start = Instant::now();
    let pre = requisite_graph(net, query)?;
    let mut r = credal_ve(&pre.reduced, &pre.query, policy)?;
    r.elapsed = start.elapsed();
    Ok(r)
}

pub fn credal_ve_traced(
    net: &CredalNetwork,
    query: &Query,
    policy: &ReductionPolicy,
) -> Result<(IntervalResult, VeTrace), InferenceError> {
    query.check(net)?;
    if policy.mode == ReductionMode::KReduce(0) {
        return Err(InferenceError::InvalidPolicy);
    }
    let start = Instant::now();
    let cards = net.cards();
    let mut trace = VeTrace::default();

    let mut factors: Vec<CredalFactor> = Vec::with_capacity(net.len());
    for t in net.tables() {
        let mut f = factor_from_table(t, &cards)?;
        let mut restricted = false;
        for (&v, &s) in &query.evidence {
            if f.contains(v) {
                f = restrict_evidence(&f, v, s)?;
                restricted = true;
            }
        }
        let reduce = match policy.mode {
            ReductionMode::ExactHull => restricted && f.len() > 1,
            ReductionMode::KReduce(k) => f.len() > k,
        };
        if reduce {
            let before = f.len();
            f = reduce_factor(f, policy)?;
            trace.steps.push(VeStep {
                eliminating: None,
                inputs: (0, 0),
                before,
                after: f.len(),
            });
        }
        factors.push(f);
    }

    let order = elimination_order(net, query);
    for &v in &order {
        if query.evidence.contains_key(&v) {
            continue;
        }
        let (bucket, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.contains(v));
        factors = rest;
        if bucket.is_empty() {
            continue;
        }
        let acc = fold(bucket, policy, Some(v), &mut trace)?;
        factors.push(marginalize_out(&acc, v)?);
    }
    trace.order = order;

    let last = fold(factors, policy, None, &mut trace)?;
    if last.scope() != [query.target] {
        return Err(InferenceError::Shape(format!(
            "final scope {:?} is not the target {}",
            last.scope(),
            query.target
        )));
    }
    let tc = last.cards()[0];
    let mut lo = vec![f64::INFINITY; tc];
    let mut hi = vec![f64::NEG_INFINITY; tc];
    let mut dropped = 0;
    for t in last.tables() {
        let mass: f64 = t.iter().sum();
        let denom = if query.is_marginal() {
            if (mass - 1.0).abs() > EPS_MARGINAL {
                return Err(InferenceError::Normalization { sum: mass });
            }
            1.0
        } else if mass <= EPS_ZERO {
            dropped += 1;
            continue;
        } else {
            mass
        };
        for s in 0..tc {
            let r = t[s] / denom;
            lo[s] = lo[s].min(r);
            hi[s] = hi[s].max(r);
        }
    }
    if lo[0].is_infinite() {
        return Err(InferenceError::ZeroEvidence { dropped });
    }
    let result = IntervalResult {
        bounds: lo.into_iter().zip(hi).map(|(l, h)| Interval::new(l, h)).collect(),
        method: policy.label(),
        elapsed: start.elapsed(),
        dropped_tables: dropped,
    };
    Ok((result, trace))
}

fn fold(
    factors: Vec<CredalFactor>,
    policy: &ReductionPolicy,
    var: Option<usize>,
    trace: &mut VeTrace,
) -> Result<CredalFactor, InferenceError> {
    let mut it = factors.into_iter();
    let mut acc = it.next().unwrap_or_else(CredalFactor::unit);
    for f in it {
        let inputs = (acc.len(), f.len());
        let raw = combine_raw(&acc, &f)?;
        let before = raw.len();
        acc = reduce_factor(raw, policy)?;
        trace.steps.push(VeStep {
            eliminating: var,
            inputs,
            before,
            after: acc.len(),
        });
    }
    Ok(acc)
}
