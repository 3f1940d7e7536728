use std::collections::{BTreeSet, HashMap, VecDeque};

use log::debug;

use super::counts::{bic_family, count, estimate_cpt};
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::model::{variable_map, BayesianNetwork, VarId};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq)]
pub struct StructureSearchConfig {
    pub tabu_list_size: usize,
    pub max_iterations: usize,
    /// Equivalent sample size of the Laplace prior.
    pub ess: f64,
    pub forced_arcs: Vec<(VarId, VarId)>,
    pub forbidden_arcs: Vec<(VarId, VarId)>,
    pub max_parents: Option<usize>,
    pub execution: Execution,
}

impl Default for StructureSearchConfig {
    fn default() -> Self {
        StructureSearchConfig {
            tabu_list_size: 10,
            max_iterations: 100,
            ess: 1.0,
            forced_arcs: Vec::new(),
            forbidden_arcs: Vec::new(),
            max_parents: None,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    Add,
    Delete,
    Reverse,
}

/// Arc operation on `parent -> child`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pub parent: VarId,
    pub child: VarId,
    pub kind: MoveKind,
}

impl Move {
    fn inverse(self) -> Move {
        match self.kind {
            MoveKind::Add => Move {
                kind: MoveKind::Delete,
                ..self
            },
            MoveKind::Delete => Move {
                kind: MoveKind::Add,
                ..self
            },
            MoveKind::Reverse => Move {
                parent: self.child,
                child: self.parent,
                kind: MoveKind::Reverse,
            },
        }
    }
}

type Family = (VarId, Vec<VarId>);

struct Search<'a> {
    dataset: &'a Dataset,
    rows: &'a [usize],
    config: &'a StructureSearchConfig,
    parents: Vec<BTreeSet<VarId>>,
    cache: HashMap<Family, f64>,
}

impl Search<'_> {
    fn n(&self) -> usize {
        self.parents.len()
    }

    fn reaches(&self, from: VarId, to: VarId, skip: Option<(VarId, VarId)>) -> bool {
        // walk child links from `from`
        let mut stack = vec![from];
        let mut seen = vec![false; self.n()];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if std::mem::replace(&mut seen[v.index()], true) {
                continue;
            }
            for c in 0..self.n() {
                let c = VarId::from(c);
                if self.parents[c.index()].contains(&v) && skip != Some((v, c)) {
                    stack.push(c);
                }
            }
        }
        false
    }

    fn forced(&self, p: VarId, c: VarId) -> bool {
        self.config.forced_arcs.contains(&(p, c))
    }

    fn forbidden(&self, p: VarId, c: VarId) -> bool {
        self.config.forbidden_arcs.contains(&(p, c))
    }

    fn room_for_parent(&self, c: VarId) -> bool {
        self.config
            .max_parents
            .is_none_or(|m| self.parents[c.index()].len() < m)
    }

    /// Structurally admissible moves in `(parent, child, kind)` order.
    fn candidates(&self, tabu: &VecDeque<Move>) -> Vec<Move> {
        let mut out = Vec::new();
        for p in 0..self.n() {
            for c in 0..self.n() {
                if p == c {
                    continue;
                }
                let (p, c) = (VarId::from(p), VarId::from(c));
                let present = self.parents[c.index()].contains(&p);
                let mut push = |kind| {
                    let m = Move {
                        parent: p,
                        child: c,
                        kind,
                    };
                    if !tabu.contains(&m) {
                        out.push(m);
                    }
                };
                if present {
                    if !self.forced(p, c) {
                        push(MoveKind::Delete);
                        if !self.forbidden(c, p)
                            && self.room_for_parent(p)
                            && !self.reaches(p, c, Some((p, c)))
                        {
                            push(MoveKind::Reverse);
                        }
                    }
                } else if !self.parents[p.index()].contains(&c)
                    && !self.forbidden(p, c)
                    && self.room_for_parent(c)
                    && !self.reaches(c, p, None)
                {
                    push(MoveKind::Add);
                }
            }
        }
        out
    }

    /// Families whose parent sets change under `m`, with their new parents.
    fn changed_families(&self, m: Move) -> Vec<Family> {
        let with = |v: VarId, f: &dyn Fn(&mut BTreeSet<VarId>)| {
            let mut ps = self.parents[v.index()].clone();
            f(&mut ps);
            (v, ps.into_iter().collect::<Vec<_>>())
        };
        match m.kind {
            MoveKind::Add => vec![with(m.child, &|ps| {
                ps.insert(m.parent);
            })],
            MoveKind::Delete => vec![with(m.child, &|ps| {
                ps.remove(&m.parent);
            })],
            MoveKind::Reverse => vec![
                with(m.child, &|ps| {
                    ps.remove(&m.parent);
                }),
                with(m.parent, &|ps| {
                    ps.insert(m.child);
                }),
            ],
        }
    }

    fn current_family(&self, v: VarId) -> Family {
        (v, self.parents[v.index()].iter().copied().collect())
    }

    /// Scores every family in `families` not yet cached, in parallel.
    fn fill_cache(&mut self, families: Vec<Family>) -> Result<()> {
        let mut missing: Vec<Family> = families
            .into_iter()
            .filter(|f| !self.cache.contains_key(f))
            .collect();
        missing.sort();
        missing.dedup();
        let (dataset, rows) = (self.dataset, self.rows);
        let scores = par::try_map(self.config.execution, &missing, |(child, parents)| {
            Ok::<_, Error>(bic_family(
                &count(dataset, *child, parents, rows)?,
                rows.len(),
            ))
        })?;
        self.cache.extend(missing.into_iter().zip(scores));
        Ok(())
    }

    fn score(&self) -> f64 {
        (0..self.n())
            .map(|v| self.cache[&self.current_family(VarId::from(v))])
            .sum()
    }

    fn delta(&self, m: Move) -> f64 {
        self.changed_families(m)
            .into_iter()
            .map(|f| self.cache[&f] - self.cache[&self.current_family(f.0)])
            .sum()
    }

    fn apply(&mut self, m: Move) {
        match m.kind {
            MoveKind::Add => {
                self.parents[m.child.index()].insert(m.parent);
            }
            MoveKind::Delete => {
                self.parents[m.child.index()].remove(&m.parent);
            }
            MoveKind::Reverse => {
                self.parents[m.child.index()].remove(&m.parent);
                self.parents[m.parent.index()].insert(m.child);
            }
        }
    }
}

/// Minimum score gain for a move to count as an improvement.
const IMPROVEMENT: f64 = 1e-9;

fn check_arcs(dataset: &Dataset, config: &StructureSearchConfig) -> Result<()> {
    for &(p, c) in config.forced_arcs.iter().chain(&config.forbidden_arcs) {
        dataset.variable(p)?;
        dataset.variable(c)?;
        if p == c {
            return Err(Error::Config(format!("self loop on {p}")));
        }
    }
    if let Some(&(p, c)) = config
        .forced_arcs
        .iter()
        .find(|a| config.forbidden_arcs.contains(a))
    {
        return Err(Error::ConflictingArc(p, c));
    }
    if !(config.ess > 0.0) {
        return Err(Error::NonPositiveEss(config.ess));
    }
    Ok(())
}

/// Hill climbing over arc additions, deletions and reversals, scored by BIC
/// on `train_rows`, with a tabu list holding the inverses of the most recent
/// moves. Starts from the graph of forced arcs and stops after
/// `max_iterations` moves or when no admissible move improves the score.
/// CPTs are then estimated with Laplace smoothing.
pub fn learn_structure(
    dataset: &Dataset,
    config: &StructureSearchConfig,
    train_rows: &[usize],
) -> Result<BayesianNetwork> {
    check_arcs(dataset, config)?;
    let mut search = Search {
        dataset,
        rows: train_rows,
        config,
        parents: vec![BTreeSet::new(); dataset.n_vars()],
        cache: HashMap::new(),
    };
    for &(p, c) in &config.forced_arcs {
        search.parents[c.index()].insert(p);
    }
    for (c, ps) in search.parents.iter().enumerate() {
        if ps.iter().any(|&p| search.reaches(VarId::from(c), p, None)) {
            return Err(Error::CyclicForcedArcs);
        }
    }
    let all: Vec<Family> = (0..search.n())
        .map(|v| search.current_family(VarId::from(v)))
        .collect();
    search.fill_cache(all)?;

    let mut tabu: VecDeque<Move> = VecDeque::with_capacity(config.tabu_list_size + 1);
    for iteration in 0..config.max_iterations {
        let candidates = search.candidates(&tabu);
        let needed = candidates
            .iter()
            .flat_map(|&m| search.changed_families(m))
            .collect();
        search.fill_cache(needed)?;
        let mut best: Option<(Move, f64)> = None;
        for &m in &candidates {
            let d = search.delta(m);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((m, d));
            }
        }
        match best {
            Some((m, d)) if d > IMPROVEMENT => {
                debug!("iteration {iteration}: {m:?} gains {d:.4}");
                search.apply(m);
                if config.tabu_list_size > 0 {
                    tabu.push_back(m.inverse());
                    if tabu.len() > config.tabu_list_size {
                        tabu.pop_front();
                    }
                }
            }
            _ => break,
        }
    }
    debug!("final BIC {:.4}", search.score());

    let variables = variable_map(dataset.variables().iter().cloned())?;
    let mut cpts = Vec::with_capacity(search.n());
    for (v, parents) in search.parents.iter().enumerate() {
        let parents: Vec<VarId> = parents.iter().copied().collect();
        cpts.push(estimate_cpt(
            &count(dataset, VarId::from(v), &parents, train_rows)?,
            config.ess,
        )?);
    }
    BayesianNetwork::new(variables, cpts)
}

/// BIC of `bn`'s graph on `rows` of `dataset`.
pub fn bic_score(dataset: &Dataset, bn: &BayesianNetwork, rows: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for cpt in bn.cpts() {
        let mut parents = cpt.parents().to_vec();
        parents.sort();
        total += bic_family(&count(dataset, cpt.child(), &parents, rows)?, rows.len());
    }
    Ok(total)
}
