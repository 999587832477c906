use std::collections::BTreeSet;

use crate::model::{CredalNetwork, Query};

/// Undirected graph linking each variable with its parents and co-parents.
pub fn moral_graph(net: &CredalNetwork) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); net.len()];
    for v in 0..net.len() {
        let family: Vec<usize> = net.parents(v).iter().copied().chain(std::iter::once(v)).collect();
        for (i, &a) in family.iter().enumerate() {
            for &b in &family[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    adj
}

/// Greedy min-fill order over every variable except the target. Ties go to
/// the smaller degree, then the smaller id.
pub fn elimination_order(net: &CredalNetwork, query: &Query) -> Vec<usize> {
    let mut adj = moral_graph(net);
    let mut remaining: BTreeSet<usize> = (0..net.len()).filter(|&v| v != query.target).collect();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let (_, _, v) = remaining
            .iter()
            .map(|&v| {
                let nb: Vec<usize> = adj[v].iter().copied().collect();
                let mut fill = 0usize;
                for (i, &a) in nb.iter().enumerate() {
                    fill += nb[i + 1..].iter().filter(|b| !adj[a].contains(b)).count();
                }
                (fill, nb.len(), v)
            })
            .min()
            .unwrap();
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        for &a in &nb {
            adj[a].remove(&v);
        }
        adj[v].clear();
        remaining.remove(&v);
        order.push(v);
    }
    order
}
