//! Shared fixtures and independent oracles for the integration suites. The
//! oracles deliberately avoid the library's own query paths: reachability is
//! re-derived by matrix closure over a naively computed step relation, and
//! isomorphism by plain backtracking over color-preserving bijections.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use epiplex::{
    AgentId, ChromaticComplex, CommModel, EpistemicFrame, ModelKind, Value,
};

pub fn agents3() -> Vec<AgentId> {
    vec![AgentId::new("a"), AgentId::new("b"), AgentId::new("c")]
}

pub fn pairs_alpha() -> Vec<BTreeSet<AgentId>> {
    epiplex::all_pairs(&agents3()).into_iter().collect()
}

pub fn model(kind: ModelKind) -> CommModel {
    CommModel::make(kind, &agents3()).expect("built-in model")
}

/// Input bit per agent (in agent order) of an input-complex facet.
pub fn facet_bits(inputs: &ChromaticComplex, facet: usize) -> Vec<Value> {
    inputs.facets()[facet]
        .iter()
        .map(|&v| inputs.vertex(v).state.entry("input").expect("input vertex"))
        .collect()
}

/// Index of the input facet carrying exactly these bits.
pub fn input_facet_with_bits(inputs: &ChromaticComplex, bits: &[Value]) -> usize {
    (0..inputs.facet_count())
        .find(|&i| facet_bits(inputs, i) == bits)
        .expect("input facet exists")
}

/// Brute-force reachability closure: pairwise step matrix plus Warshall
/// closure, fully independent of the BFS implementation.
pub fn reachability_closure_oracle(
    c: &ChromaticComplex,
    start: usize,
    alpha: &[BTreeSet<AgentId>],
) -> Vec<usize> {
    let n = c.facet_count();
    let color_groups: Vec<Vec<usize>> = alpha
        .iter()
        .map(|group| {
            group
                .iter()
                .map(|a| c.agents().iter().position(|x| x == a).expect("agent"))
                .collect()
        })
        .collect();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = i == j
                || color_groups.iter().any(|group| {
                    group
                        .iter()
                        .all(|&k| c.facets()[i][k] == c.facets()[j][k])
                });
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n).filter(|&j| reach[start][j]).collect()
}

/// Color-preserving isomorphism of pure complexes: a bijection on vertices
/// fixing colors and mapping the facet set onto the facet set. Backtracking
/// with degree pruning; intended for the small bundled models.
pub fn complexes_isomorphic(c1: &ChromaticComplex, c2: &ChromaticComplex) -> bool {
    if c1.agents() != c2.agents()
        || c1.vertex_count() != c2.vertex_count()
        || c1.facet_count() != c2.facet_count()
    {
        return false;
    }
    let n = c1.vertex_count();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| {
                    c1.vertex(v).color == c2.vertex(u).color
                        && c1.facets_of_vertex(v).len() == c2.facets_of_vertex(u).len()
                })
                .collect()
        })
        .collect();
    let target_facets: HashSet<Vec<usize>> = c2.facets().iter().cloned().collect();

    fn assign(
        v: usize,
        c1: &ChromaticComplex,
        candidates: &[Vec<usize>],
        target_facets: &HashSet<Vec<usize>>,
        mapping: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let n = mapping.len();
        if v == n {
            return true;
        }
        'next: for &u in &candidates[v] {
            if used[u] {
                continue;
            }
            mapping[v] = u;
            used[u] = true;
            // Every facet of c1 all of whose vertices are now mapped must
            // land on a facet of c2.
            for &f in c1.facets_of_vertex(v) {
                let facet = &c1.facets()[f];
                if facet.iter().all(|&x| x <= v) {
                    let mut image: Vec<usize> = facet.iter().map(|&x| mapping[x]).collect();
                    image.sort_unstable();
                    if !target_facets.contains(&image) {
                        used[u] = false;
                        continue 'next;
                    }
                }
            }
            if assign(v + 1, c1, candidates, target_facets, mapping, used) {
                return true;
            }
            used[u] = false;
        }
        false
    }

    let mut mapping = vec![usize::MAX; n];
    let mut used = vec![false; n];
    assign(0, c1, &candidates, &target_facets, &mut mapping, &mut used)
}

/// Frame isomorphism over a shared agent set: a world bijection preserving
/// every relation. Brute-force permutations; bundled frames are tiny.
pub fn frames_isomorphic(f1: &EpistemicFrame, f2: &EpistemicFrame) -> bool {
    if f1.agents() != f2.agents() || f1.worlds().len() != f2.worlds().len() {
        return false;
    }
    let n = f1.worlds().len();
    let mut perm: Vec<usize> = (0..n).collect();
    fn try_perms(
        perm: &mut Vec<usize>,
        k: usize,
        f1: &EpistemicFrame,
        f2: &EpistemicFrame,
    ) -> bool {
        let n = perm.len();
        if k == n {
            return f1.agents().iter().all(|a| {
                (0..n).all(|x| {
                    (0..n).all(|y| {
                        f1.related(a, x, y).unwrap() == f2.related(a, perm[x], perm[y]).unwrap()
                    })
                })
            });
        }
        for i in k..n {
            perm.swap(k, i);
            // Prune: image must agree with every already-placed world.
            let consistent = f1.agents().iter().all(|a| {
                (0..k).all(|x| {
                    f1.related(a, x, k).unwrap() == f2.related(a, perm[x], perm[k]).unwrap()
                })
            });
            if consistent && try_perms(perm, k + 1, f1, f2) {
                return true;
            }
            perm.swap(k, i);
        }
        false
    }
    try_perms(&mut perm, 0, f1, f2)
}

/// The muddy-children situation as an epistemic frame: one world per
/// clean/muddy assignment, two worlds related for a child iff they agree on
/// every other child's forehead.
pub fn muddy_frame(children: usize) -> EpistemicFrame {
    let agents = epiplex::muddy::muddy_agents(children);
    let n = agents.len();
    let worlds: Vec<String> = (0..(1u32 << n))
        .map(|mask| {
            (0..n)
                .map(|k| ((mask >> k) & 1).to_string())
                .collect::<String>()
        })
        .collect();
    let mut relations: BTreeMap<AgentId, Vec<(String, String)>> = BTreeMap::new();
    for (k, agent) in agents.iter().enumerate() {
        let mut pairs = Vec::new();
        for mask in 0..(1u32 << n) {
            let flipped = mask ^ (1 << k);
            if flipped > mask {
                pairs.push((worlds[mask as usize].clone(), worlds[flipped as usize].clone()));
            }
        }
        relations.insert(agent.clone(), pairs);
    }
    EpistemicFrame::from_generators(agents, worlds, &relations).expect("muddy frame")
}

/// The three-world frame of the duality example: w1 ~a w2, w1 ~b w2,
/// w2 ~c w3.
pub fn example_frame() -> EpistemicFrame {
    let agents = agents3();
    let worlds: Vec<String> = ["w1", "w2", "w3"].iter().map(|&s| s.to_string()).collect();
    let mut relations: BTreeMap<AgentId, Vec<(String, String)>> = BTreeMap::new();
    relations.insert(AgentId::new("a"), vec![("w1".into(), "w2".into())]);
    relations.insert(AgentId::new("b"), vec![("w1".into(), "w2".into())]);
    relations.insert(AgentId::new("c"), vec![("w2".into(), "w3".into())]);
    EpistemicFrame::from_generators(agents, worlds, &relations).expect("example frame")
}
