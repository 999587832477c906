//! Query-preserving pruning of a network down to its requisite part.

use std::collections::BTreeMap;

use crate::model::{config_states, ConditionalCredalTable, CredalNetwork, CredalSet, ModelError, Query, EPS_DUP};

#[derive(Debug, Clone, PartialEq)]
pub struct RequisiteResult {
    pub reduced: CredalNetwork,
    /// The query in the reduced network's ids.
    pub query: Query,
    /// Original id to reduced id, `None` for pruned variables.
    pub var_map: Vec<Option<usize>>,
}

impl RequisiteResult {
    /// Original id of every reduced variable.
    pub fn inverse_map(&self) -> Vec<usize> {
        let mut inv = vec![0; self.reduced.len()];
        for (orig, r) in self.var_map.iter().enumerate() {
            if let Some(r) = r {
                inv[*r] = orig;
            }
        }
        inv
    }
}

/// Removes barren nodes, cuts arcs leaving observed variables, binarizes
/// observed variables with three or more states and keeps the target's
/// connected component.
pub fn requisite_graph(net: &CredalNetwork, query: &Query) -> Result<RequisiteResult, ModelError> {
    query.check(net)?;
    let n = net.len();
    let mut cards = net.cards();
    let mut tables: Vec<ConditionalCredalTable> = net.tables().to_vec();
    let mut alive = vec![true; n];
    let mut evidence = query.evidence.clone();

    // barren nodes
    loop {
        let mut has_child = vec![false; n];
        for v in (0..n).filter(|&v| alive[v]) {
            for &p in &tables[v].parents {
                has_child[p] = true;
            }
        }
        let barren: Vec<usize> = (0..n)
            .filter(|&v| alive[v] && !has_child[v] && v != query.target && !evidence.contains_key(&v))
            .collect();
        if barren.is_empty() {
            break;
        }
        for v in barren {
            alive[v] = false;
        }
    }

    // arcs leaving observed variables
    for v in (0..n).filter(|&v| alive[v]) {
        if tables[v].parents.iter().any(|p| evidence.contains_key(p)) {
            tables[v] = cut_observed_parents(&tables[v], &cards, &evidence)?;
        }
    }

    // binarization
    for (&v, state) in evidence.iter_mut() {
        if alive[v] && cards[v] >= 3 {
            let t = &mut tables[v];
            t.sets = t.sets.iter().map(|s| merge_states(s, *state)).collect::<Result<_, _>>()?;
            cards[v] = 2;
            *state = 0;
        }
    }

    // connected component of the target
    let mut adj = vec![Vec::new(); n];
    for v in (0..n).filter(|&v| alive[v]) {
        for &p in &tables[v].parents {
            adj[v].push(p);
            adj[p].push(v);
        }
    }
    let mut keep = vec![false; n];
    let mut stack = vec![query.target];
    keep[query.target] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if alive[w] && !keep[w] {
                keep[w] = true;
                stack.push(w);
            }
        }
    }

    let mut var_map = vec![None; n];
    let mut next = 0;
    for v in 0..n {
        if keep[v] {
            var_map[v] = Some(next);
            next += 1;
        }
    }
    let new_cards: Vec<usize> = (0..n).filter(|&v| keep[v]).map(|v| cards[v]).collect();
    let new_tables: Vec<ConditionalCredalTable> = (0..n)
        .filter(|&v| keep[v])
        .map(|v| {
            let t = &tables[v];
            ConditionalCredalTable::new(
                var_map[v].unwrap(),
                t.parents.iter().map(|&p| var_map[p].unwrap()).collect(),
                t.sets.clone(),
            )
        })
        .collect();
    let reduced = CredalNetwork::new(new_cards, new_tables)?;
    let query = Query {
        target: var_map[query.target].unwrap(),
        evidence: evidence
            .into_iter()
            .filter_map(|(v, s)| var_map[v].map(|r| (r, s)))
            .collect(),
    };
    Ok(RequisiteResult {
        reduced,
        query,
        var_map,
    })
}

/// Keeps only the parent configurations that agree with the evidence and
/// drops the observed parents.
fn cut_observed_parents(
    t: &ConditionalCredalTable,
    cards: &[usize],
    evidence: &BTreeMap<usize, usize>,
) -> Result<ConditionalCredalTable, ModelError> {
    let pcards: Vec<usize> = t.parents.iter().map(|&p| cards[p]).collect();
    let mut sets = Vec::new();
    for (cfg, set) in t.sets.iter().enumerate() {
        let states = config_states(cfg, &pcards)?;
        let agrees = t
            .parents
            .iter()
            .zip(&states)
            .all(|(p, s)| evidence.get(p).is_none_or(|e| e == s));
        if agrees {
            sets.push(set.clone());
        }
    }
    let parents = t.parents.iter().copied().filter(|p| !evidence.contains_key(p)).collect();
    Ok(ConditionalCredalTable::new(t.child, parents, sets))
}

/// Collapses a credal set onto `{kept, not kept}`; the result holds the
/// extreme values of the kept state's probability.
pub fn merge_states(cs: &CredalSet, kept: usize) -> Result<CredalSet, ModelError> {
    if kept >= cs.dimension() {
        return Err(ModelError::StateOutOfRange {
            position: 0,
            state: kept,
            card: cs.dimension(),
        });
    }
    let values = cs.vertices().iter().map(|v| v[kept]);
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    let mut vertices = vec![vec![lo, 1.0 - lo]];
    if hi - lo > EPS_DUP {
        vertices.push(vec![hi, 1.0 - hi]);
    }
    Ok(CredalSet::new_unchecked(2, vertices))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(vs: &[&[f64]]) -> CredalSet {
        CredalSet::new(vs[0].len(), vs.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    /// A -> B -> C with ternary C.
    fn chain() -> CredalNetwork {
        CredalNetwork::new(
            vec![2, 2, 3],
            vec![
                ConditionalCredalTable::new(0, vec![], vec![set(&[&[0.4, 0.6], &[0.7, 0.3]])]),
                ConditionalCredalTable::new(
                    1,
                    vec![0],
                    vec![set(&[&[0.1, 0.9], &[0.2, 0.8]]), set(&[&[0.5, 0.5]])],
                ),
                ConditionalCredalTable::new(
                    2,
                    vec![1],
                    vec![
                        set(&[&[0.1, 0.6, 0.3], &[0.2, 0.5, 0.3]]),
                        set(&[&[0.3, 0.3, 0.4], &[0.6, 0.1, 0.3], &[0.5, 0.4, 0.1]]),
                    ],
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn marginal_on_root_keeps_only_the_root() {
        let r = requisite_graph(&chain(), &Query::marginal(0)).unwrap();
        assert_eq!(r.reduced.len(), 1);
        assert_eq!(r.var_map, vec![Some(0), None, None]);
        assert_eq!(r.reduced.table(0), chain().table(0));
    }

    #[test]
    fn leaf_evidence_keeps_the_chain_and_binarizes() {
        let r = requisite_graph(&chain(), &Query::conditional(0, [(2, 2)])).unwrap();
        assert_eq!(r.reduced.len(), 3);
        assert_eq!(r.reduced.cards(), vec![2, 2, 2]);
        assert_eq!(r.query, Query::conditional(0, [(2, 0)]));
        let s = &r.reduced.table(2).sets[1];
        assert_eq!(s.vertices(), &[vec![0.1, 0.9], vec![0.4, 0.6]]);
    }

    #[test]
    fn observed_root_is_cut_off() {
        let r = requisite_graph(&chain(), &Query::conditional(1, [(0, 1)])).unwrap();
        // A's only child loses its arc, so A falls outside B's component
        assert_eq!(r.reduced.len(), 1);
        assert_eq!(r.query, Query::marginal(0));
        assert_eq!(r.reduced.table(0).sets, vec![set(&[&[0.5, 0.5]])]);
    }

    #[test]
    fn merge_examples() {
        let s = merge_states(&set(&[&[0.1, 0.6, 0.3], &[0.2, 0.5, 0.3]]), 0).unwrap();
        assert_eq!(s.vertices(), &[vec![0.1, 0.9], vec![0.2, 0.8]]);
        let b = set(&[&[0.3, 0.7], &[0.6, 0.4]]);
        assert_eq!(merge_states(&b, 0).unwrap(), b);
        let four = set(&[&[0.1, 0.2, 0.7], &[0.5, 0.2, 0.3], &[0.3, 0.6, 0.1], &[0.2, 0.2, 0.6]]);
        let m = merge_states(&four, 1).unwrap();
        assert_eq!(m.vertices(), &[vec![0.2, 0.8], vec![0.6, 0.4]]);
        assert!(merge_states(&four, 3).is_err());
    }

    #[test]
    fn inverse_map_round_trips() {
        let r = requisite_graph(&chain(), &Query::conditional(0, [(1, 0)])).unwrap();
        let inv = r.inverse_map();
        for (red, &orig) in inv.iter().enumerate() {
            assert_eq!(r.var_map[orig], Some(red));
        }
    }
}
