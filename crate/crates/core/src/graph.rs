//! The requires digraph: transitive closure, strongly connected components
//! and dependency-first staging.
//!
//! Works on any digraph over practice ids, including shapes a built
//! [`AgileMap`] can never hold (such as a two-node requires cycle, which the
//! merge rule rejects).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::map::AgileMap;
use crate::model::PracticeId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequiresGraph {
    nodes: Vec<PracticeId>,
    index: BTreeMap<PracticeId, usize>,
    successors: Vec<Vec<usize>>,
}

impl RequiresGraph {
    /// Builds a digraph; an edge `(u, v)` means `u` requires `v`. Edges with
    /// an endpoint outside `nodes` are dropped.
    pub fn new(
        nodes: impl IntoIterator<Item = PracticeId>,
        edges: impl IntoIterator<Item = (PracticeId, PracticeId)>,
    ) -> Self {
        let nodes: Vec<PracticeId> = nodes.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<PracticeId, usize> = nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut successors = vec![BTreeSet::new(); nodes.len()];
        for (from, to) in edges {
            if let (Some(&u), Some(&v)) = (index.get(&from), index.get(&to)) {
                successors[u].insert(v);
            }
        }
        let successors = successors.into_iter().map(|s| s.into_iter().collect()).collect();
        Self { nodes, index, successors }
    }

    /// The requires edges of the whole map.
    pub fn from_map(map: &AgileMap) -> Self {
        Self::induced(map, map.practice_ids())
    }

    /// The requires edges of `map` with both endpoints in `subset`.
    pub fn induced(map: &AgileMap, subset: impl IntoIterator<Item = PracticeId>) -> Self {
        let subset: BTreeSet<PracticeId> = subset.into_iter().filter(|id| map.contains(*id)).collect();
        let edges: Vec<(PracticeId, PracticeId)> = subset
            .iter()
            .flat_map(|&u| map.required_by(u).map(move |v| (u, v)))
            .collect();
        Self::new(subset, edges)
    }

    pub fn nodes(&self) -> &[PracticeId] {
        &self.nodes
    }

    pub fn contains(&self, id: PracticeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn edges(&self) -> impl Iterator<Item = (PracticeId, PracticeId)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(move |(u, succ)| succ.iter().map(move |&v| (self.nodes[u], self.nodes[v])))
    }

    /// Every node reachable from a seed over one or more edges. Seeds appear
    /// in the result only when some path leads back to them. Unknown seeds
    /// are returned as the error.
    pub fn closure(&self, seeds: &BTreeSet<PracticeId>) -> Result<BTreeSet<PracticeId>, Vec<PracticeId>> {
        let unknown: Vec<PracticeId> = seeds.iter().copied().filter(|s| !self.contains(*s)).collect();
        if !unknown.is_empty() {
            return Err(unknown);
        }
        let mut reached = vec![false; self.nodes.len()];
        let mut queue: VecDeque<usize> = seeds.iter().map(|s| self.index[s]).collect();
        while let Some(u) = queue.pop_front() {
            for &v in &self.successors[u] {
                if !reached[v] {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }
        Ok(reached
            .iter()
            .enumerate()
            .filter(|(_, r)| **r)
            .map(|(i, _)| self.nodes[i])
            .collect())
    }

    /// Strongly connected components, each sorted, listed by smallest member.
    pub fn components(&self) -> Vec<Vec<PracticeId>> {
        let mut components: Vec<Vec<PracticeId>> = self
            .tarjan()
            .into_iter()
            .map(|c| {
                let mut ids: Vec<PracticeId> = c.into_iter().map(|i| self.nodes[i]).collect();
                ids.sort();
                ids
            })
            .collect();
        components.sort();
        components
    }

    /// Groups nodes into stages so that every node comes no earlier than
    /// everything it requires. Members of one component share a stage; a
    /// component's stage is the length of the longest dependency chain below
    /// it in the condensation.
    pub fn stages(&self) -> Vec<Vec<PracticeId>> {
        let components = self.tarjan();
        let mut component_of = vec![0; self.nodes.len()];
        for (c, members) in components.iter().enumerate() {
            for &v in members {
                component_of[v] = c;
            }
        }
        // Tarjan emits a component only after every component reachable from
        // it, so dependencies already have their depth when we get here.
        let mut depth = vec![0usize; components.len()];
        for (c, members) in components.iter().enumerate() {
            depth[c] = members
                .iter()
                .flat_map(|&u| &self.successors[u])
                .map(|&v| component_of[v])
                .filter(|&d| d != c)
                .map(|d| depth[d] + 1)
                .max()
                .unwrap_or(0);
        }
        let mut stages: BTreeMap<usize, Vec<PracticeId>> = BTreeMap::new();
        for (c, members) in components.iter().enumerate() {
            stages.entry(depth[c]).or_default().extend(members.iter().map(|&v| self.nodes[v]));
        }
        stages
            .into_values()
            .map(|mut s| {
                s.sort();
                s
            })
            .collect()
    }

    fn tarjan(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut state = TarjanState {
            counter: 0,
            index: vec![None; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            components: Vec::new(),
        };
        for v in 0..n {
            if state.index[v].is_none() {
                self.strong_connect(v, &mut state);
            }
        }
        state.components
    }

    fn strong_connect(&self, v: usize, state: &mut TarjanState) {
        state.index[v] = Some(state.counter);
        state.low[v] = state.counter;
        state.counter += 1;
        state.stack.push(v);
        state.on_stack[v] = true;

        for &w in &self.successors[v] {
            match state.index[w] {
                None => {
                    self.strong_connect(w, state);
                    state.low[v] = state.low[v].min(state.low[w]);
                }
                Some(iw) if state.on_stack[w] => state.low[v] = state.low[v].min(iw),
                Some(_) => {}
            }
        }

        if Some(state.low[v]) == state.index[v] {
            let mut component = Vec::new();
            loop {
                let w = state.stack.pop().expect("tarjan stack underflow");
                state.on_stack[w] = false;
                component.push(w);
                if w == v {
                    break;
                }
            }
            state.components.push(component);
        }
    }
}

struct TarjanState {
    counter: usize,
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    components: Vec<Vec<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::pid;

    fn set(ids: &[&str]) -> BTreeSet<PracticeId> {
        ids.iter().map(|s| pid(s)).collect()
    }

    #[test]
    fn two_cycle_closure_includes_the_seed() {
        let (a, b) = (pid("AP01"), pid("AP02"));
        let g = RequiresGraph::new([a, b], [(a, b), (b, a)]);
        assert_eq!(g.closure(&set(&["AP01"])).unwrap(), set(&["AP01", "AP02"]));
    }

    #[test]
    fn unknown_seed() {
        let g = RequiresGraph::new([pid("AP01")], []);
        assert_eq!(g.closure(&set(&["AP02"])).unwrap_err(), vec![pid("AP02")]);
    }

    #[test]
    fn cycle_shares_a_stage() {
        let (a, b, c) = (pid("AP01"), pid("AP02"), pid("AP03"));
        let g = RequiresGraph::new([a, b, c], [(a, b), (b, a), (c, a)]);
        assert_eq!(g.stages(), vec![vec![a, b], vec![c]]);
        assert_eq!(g.components(), vec![vec![a, b], vec![c]]);
    }

    #[test]
    fn chain_stages_dependencies_first() {
        let (d, u, v) = (pid("AP28"), pid("AP32"), pid("AP31"));
        let g = RequiresGraph::new([d, u, v], [(d, u), (u, v)]);
        assert_eq!(g.stages(), vec![vec![v], vec![u], vec![d]]);
    }

    #[test]
    fn longest_chain_decides_depth() {
        // AP01 -> AP02 -> AP03 and AP01 -> AP03: AP01 sits above AP02.
        let (a, b, c, d) = (pid("AP01"), pid("AP02"), pid("AP03"), pid("AP04"));
        let g = RequiresGraph::new([a, b, c, d], [(a, b), (b, c), (a, c)]);
        assert_eq!(g.stages(), vec![vec![c, d], vec![b], vec![a]]);
    }

    #[test]
    fn empty_graph() {
        let g = RequiresGraph::new([], []);
        assert!(g.stages().is_empty());
        assert!(g.closure(&BTreeSet::new()).unwrap().is_empty());
    }
}
