use std::fmt::Write as _;

use super::lexer::Lexer;
use super::{format_float, IoError};
use crate::geometry::{h_to_v, v_to_h, HPolytope, HRow, PointSet, EPS_FEAS};
use crate::model::{ConditionalCredalTable, Dag, CredalNetwork, CredalSet, EPS_NORM};

const MAX_VARIABLES: usize = 1 << 16;
const MAX_CARD: usize = 1 << 10;
const MAX_CONFIGS: usize = 1 << 22;
const MAX_ITEMS: usize = 1 << 20;

/// A network in constraint form: one polytope per parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct HCredalNetwork {
    pub cards: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
    pub polytopes: Vec<Vec<HPolytope>>,
}

impl HCredalNetwork {
    pub fn from_vnet(net: &CredalNetwork, tol: f64) -> Result<Self, IoError> {
        let mut polytopes = Vec::with_capacity(net.len());
        for t in net.tables() {
            let ps = t
                .sets
                .iter()
                .map(|s| Ok(v_to_h(&PointSet::new(s.dimension(), s.vertices().to_vec())?, tol)?))
                .collect::<Result<Vec<_>, IoError>>()?;
            polytopes.push(ps);
        }
        Ok(HCredalNetwork {
            cards: net.cards(),
            parents: (0..net.len()).map(|v| net.parents(v).to_vec()).collect(),
            polytopes,
        })
    }

    pub fn to_vnet(&self, tol: f64) -> Result<CredalNetwork, IoError> {
        let mut tables = Vec::with_capacity(self.cards.len());
        for (v, polys) in self.polytopes.iter().enumerate() {
            let sets = polys
                .iter()
                .map(|hp| {
                    let ps = h_to_v(hp, tol)?;
                    Ok(CredalSet::new(hp.dimension, ps.into_points())?)
                })
                .collect::<Result<Vec<_>, IoError>>()?;
            tables.push(ConditionalCredalTable::new(v, self.parents[v].clone(), sets));
        }
        Ok(CredalNetwork::new(self.cards.clone(), tables)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkFile {
    V(CredalNetwork),
    H(HCredalNetwork),
}

impl NetworkFile {
    /// The vertex form, converting constraint files on the way.
    pub fn into_vnet(self) -> Result<CredalNetwork, IoError> {
        match self {
            NetworkFile::V(n) => Ok(n),
            NetworkFile::H(h) => h.to_vnet(EPS_FEAS),
        }
    }
}

/// Either format, chosen by the header keyword.
pub fn parse_network(text: &str) -> Result<NetworkFile, IoError> {
    let lx = Lexer::new(text);
    match lx.peek() {
        Some("H-CREDAL") => Ok(NetworkFile::H(parse_hcredal(text)?)),
        Some("V-CREDAL") => Ok(NetworkFile::V(parse_vcredal(text)?)),
        _ => Err(lx.error("`V-CREDAL` or `H-CREDAL`")),
    }
}

pub fn parse_vcredal(text: &str) -> Result<CredalNetwork, IoError> {
    parse_vcredal_counted(text).map(|(n, _)| n)
}

/// Also returns how many duplicate vertices were dropped while loading.
pub fn parse_vcredal_counted(text: &str) -> Result<(CredalNetwork, usize), IoError> {
    let mut lx = Lexer::new(text);
    lx.keyword("V-CREDAL")?;
    let pre = preamble(&mut lx)?;
    let mut tables = Vec::with_capacity(pre.scopes.len());
    let mut duplicates = 0;
    for (parents, child) in &pre.scopes {
        let d = pre.cards[*child];
        let mut sets = Vec::with_capacity(pre.configs(parents));
        for _ in 0..pre.configs(parents) {
            let line = lx.line();
            let nv = lx.bounded("a vertex count", MAX_ITEMS)?;
            if nv == 0 {
                return Err(IoError::Shape {
                    line,
                    message: format!("empty credal set for variable {child}"),
                });
            }
            let mut vertices = Vec::with_capacity(nv);
            for _ in 0..nv {
                let line = lx.line();
                let v = (0..d)
                    .map(|_| lx.float("a probability"))
                    .collect::<Result<Vec<_>, _>>()?;
                let sum: f64 = v.iter().sum();
                if v.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > EPS_NORM {
                    return Err(IoError::Shape {
                        line,
                        message: format!("vertex for variable {child} is not a mass function (sum {sum})"),
                    });
                }
                vertices.push(v);
            }
            let (set, removed) = CredalSet::new_dedup(d, vertices)?;
            duplicates += removed;
            sets.push(set);
        }
        tables.push(ConditionalCredalTable::new(*child, parents.clone(), sets));
    }
    lx.finish()?;
    Ok((CredalNetwork::new(pre.cards, tables)?, duplicates))
}

pub fn parse_hcredal(text: &str) -> Result<HCredalNetwork, IoError> {
    let mut lx = Lexer::new(text);
    lx.keyword("H-CREDAL")?;
    let pre = preamble(&mut lx)?;
    let n = pre.cards.len();
    let mut parents = vec![Vec::new(); n];
    let mut polytopes = vec![Vec::new(); n];
    for (ps, child) in &pre.scopes {
        let d = pre.cards[*child];
        let mut polys = Vec::with_capacity(pre.configs(ps));
        for _ in 0..pre.configs(ps) {
            let nr = lx.bounded("a row count", MAX_ITEMS)?;
            let mut rows = Vec::with_capacity(nr);
            for _ in 0..nr {
                let coeffs = (0..d)
                    .map(|_| lx.float("a coefficient"))
                    .collect::<Result<Vec<_>, _>>()?;
                let bound = lx.float("a bound")?;
                rows.push(HRow::new(coeffs, bound));
            }
            polys.push(HPolytope::new(d, rows));
        }
        parents[*child] = ps.clone();
        polytopes[*child] = polys;
    }
    lx.finish()?;
    Ok(HCredalNetwork {
        cards: pre.cards,
        parents,
        polytopes,
    })
}

struct Preamble {
    cards: Vec<usize>,
    /// `(parents, child)` in file order.
    scopes: Vec<(Vec<usize>, usize)>,
}

impl Preamble {
    fn configs(&self, parents: &[usize]) -> usize {
        parents.iter().map(|&p| self.cards[p]).product()
    }
}

fn preamble(lx: &mut Lexer) -> Result<Preamble, IoError> {
    let n = lx.bounded("a variable count", MAX_VARIABLES)?;
    if n == 0 {
        return Err(IoError::Shape {
            line: lx.last_line(),
            message: "a network needs at least one variable".into(),
        });
    }
    let mut cards = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lx.line();
        let c = lx.bounded("a cardinality", MAX_CARD)?;
        if c < 2 {
            return Err(IoError::Shape {
                line,
                message: format!("cardinality {c} is below 2"),
            });
        }
        cards.push(c);
    }
    let line = lx.line();
    let t = lx.count("a table count")?;
    if t != n {
        return Err(IoError::Shape {
            line,
            message: format!("{t} tables declared for {n} variables"),
        });
    }
    let scope_line = lx.line();
    let mut seen = vec![false; n];
    let mut scopes = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lx.line();
        let m = lx.bounded("a scope size", n)?;
        if m == 0 {
            return Err(IoError::Shape {
                line,
                message: "empty scope".into(),
            });
        }
        let mut ids = (0..m)
            .map(|_| lx.bounded("a variable id", n - 1))
            .collect::<Result<Vec<_>, _>>()?;
        let child = ids.pop().unwrap();
        if let Some(bad) = ids.iter().enumerate().find_map(|(i, &p)| (p == child || ids[..i].contains(&p)).then_some(p)) {
            return Err(IoError::Shape {
                line,
                message: format!("variable {bad} repeated in the scope of {child}"),
            });
        }
        if std::mem::replace(&mut seen[child], true) {
            return Err(IoError::Shape {
                line,
                message: format!("second table for variable {child}"),
            });
        }
        let configs = ids
            .iter()
            .try_fold(1usize, |acc, &p| acc.checked_mul(cards[p]))
            .filter(|&c| c <= MAX_CONFIGS);
        if configs.is_none() {
            return Err(IoError::Shape {
                line,
                message: format!("too many parent configurations for variable {child}"),
            });
        }
        scopes.push((ids, child));
    }
    let mut parents = vec![Vec::new(); n];
    for (ps, child) in &scopes {
        parents[*child] = ps.clone();
    }
    if Dag::new(parents).topological_order().is_none() {
        return Err(IoError::Shape {
            line: scope_line,
            message: "the scopes form a directed cycle".into(),
        });
    }
    Ok(Preamble { cards, scopes })
}

fn write_preamble(out: &mut String, keyword: &str, cards: &[usize], parents: &[Vec<usize>]) {
    let join = |xs: &mut dyn Iterator<Item = usize>| xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(out, "{keyword}").unwrap();
    writeln!(out, "{}", cards.len()).unwrap();
    writeln!(out, "{}", join(&mut cards.iter().copied())).unwrap();
    writeln!(out, "{}", cards.len()).unwrap();
    for (v, ps) in parents.iter().enumerate() {
        let scope = join(&mut ps.iter().copied().chain(std::iter::once(v)));
        writeln!(out, "{} {scope}", ps.len() + 1).unwrap();
    }
}

fn write_row(out: &mut String, xs: impl Iterator<Item = f64>) {
    let row: Vec<String> = xs.map(format_float).collect();
    writeln!(out, "{}", row.join(" ")).unwrap();
}

pub fn serialize_vcredal(net: &CredalNetwork) -> String {
    let mut out = String::new();
    let parents: Vec<Vec<usize>> = (0..net.len()).map(|v| net.parents(v).to_vec()).collect();
    write_preamble(&mut out, "V-CREDAL", &net.cards(), &parents);
    for t in net.tables() {
        out.push('\n');
        for s in &t.sets {
            writeln!(out, "{}", s.len()).unwrap();
            for v in s.vertices() {
                write_row(&mut out, v.iter().copied());
            }
        }
    }
    out
}

pub fn serialize_hcredal(h: &HCredalNetwork) -> String {
    let mut out = String::new();
    write_preamble(&mut out, "H-CREDAL", &h.cards, &h.parents);
    for polys in &h.polytopes {
        out.push('\n');
        for p in polys {
            writeln!(out, "{}", p.rows.len()).unwrap();
            for r in &p.rows {
                write_row(&mut out, r.coeffs.iter().copied().chain(std::iter::once(r.bound)));
            }
        }
    }
    out
}
