//! Slow, obviously-correct reference computations for tests.
//!
//! Nothing here calls into the simulator. Graphs are plain `(n, edges)`
//! pairs treated as undirected.

#![allow(clippy::needless_range_loop)]

use rand::Rng;

pub type Edges = [(usize, usize)];

fn adjacency(n: usize, edges: &Edges) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    adj
}

/// All-pairs hop distances by Floyd–Warshall; `None` when unreachable.
pub fn floyd_warshall(n: usize, edges: &Edges) -> Vec<Vec<Option<usize>>> {
    let adj = adjacency(n, edges);
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].map_or(true, |cur| a + b < cur) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Every simple path from `s` to `t`, by exhaustive DFS.
fn all_simple_paths(adj: &[Vec<bool>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn dfs(
        adj: &[Vec<bool>],
        v: usize,
        t: usize,
        path: &mut Vec<usize>,
        seen: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == t {
            out.push(path.clone());
            return;
        }
        for w in 0..adj.len() {
            if adj[v][w] && !seen[w] {
                seen[w] = true;
                path.push(w);
                dfs(adj, w, t, path, seen, out);
                path.pop();
                seen[w] = false;
            }
        }
    }
    let mut seen = vec![false; adj.len()];
    seen[s] = true;
    let mut out = Vec::new();
    dfs(adj, s, t, &mut vec![s], &mut seen, &mut out);
    out
}

/// Sum over unordered pairs of `(paths through v) / (shortest paths)`,
/// from the full list of simple paths. Exponential; keep `n` small.
pub fn betweenness_by_path_enumeration(n: usize, edges: &Edges) -> Vec<f64> {
    let adj = adjacency(n, edges);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in (s + 1)..n {
            let paths = all_simple_paths(&adj, s, t);
            let Some(best) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let shortest: Vec<_> = paths.iter().filter(|p| p.len() == best).collect();
            let total = shortest.len() as f64;
            for path in &shortest {
                for &v in &path[1..path.len() - 1] {
                    bc[v] += 1.0 / total;
                }
            }
        }
    }
    bc
}

/// Enumerate shortest paths explicitly, walking only along edges that
/// keep Floyd–Warshall distances consistent. Usable up to a few dozen nodes
/// on sparse graphs.
pub fn betweenness_by_shortest_path_listing(n: usize, edges: &Edges) -> Vec<f64> {
    let adj = adjacency(n, edges);
    let dist = floyd_warshall(n, edges);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in (s + 1)..n {
            let Some(d) = dist[s][t] else { continue };
            let mut paths = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let v = *path.last().unwrap();
                if v == t {
                    paths.push(path);
                    continue;
                }
                let remaining = d - (path.len() - 1);
                for w in 0..n {
                    if adj[v][w] && dist[w][t] == Some(remaining - 1) {
                        let mut next = path.clone();
                        next.push(w);
                        stack.push(next);
                    }
                }
            }
            let total = paths.len() as f64;
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    bc[v] += 1.0 / total;
                }
            }
        }
    }
    bc
}

/// Average number of interior vertices on a shortest path, summed over all
/// connected unordered pairs.
pub fn total_intermediate_incidence(n: usize, edges: &Edges) -> f64 {
    let dist = floyd_warshall(n, edges);
    let mut total = 0.0;
    for s in 0..n {
        for t in (s + 1)..n {
            if let Some(d) = dist[s][t] {
                // every shortest path has exactly d - 1 interior vertices
                total += d.saturating_sub(1) as f64;
            }
        }
    }
    total
}

/// Closeness with component scaling, from the distance matrix.
pub fn closeness_by_distance_matrix(n: usize, edges: &Edges) -> Vec<f64> {
    let dist = floyd_warshall(n, edges);
    (0..n)
        .map(|v| {
            let reach: Vec<usize> = (0..n)
                .filter(|&u| u != v)
                .filter_map(|u| dist[v][u])
                .collect();
            let sum: usize = reach.iter().sum();
            if sum == 0 || n < 2 {
                return 0.0;
            }
            let r = reach.len() as f64;
            (r / sum as f64) * (r / (n - 1) as f64)
        })
        .collect()
}

/// Every labeled graph on `n` nodes whose undirected view is connected.
pub fn all_connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if is_connected(n, &edges) {
            out.push(edges);
        }
    }
    out
}

pub fn is_connected(n: usize, edges: &Edges) -> bool {
    if n == 0 {
        return true;
    }
    let dist = floyd_warshall(n, edges);
    dist[0].iter().all(Option::is_some)
}

/// Random connected graph: a random spanning tree plus extra edges with
/// probability `p_extra`.
pub fn random_connected_graph<R: Rng>(n: usize, p_extra: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if !edges.contains(&(a, b)) && rng.gen_bool(p_extra) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Monte Carlo estimate of the growth probability: `N` cells, each with
/// `k` pathways, each pathway mutated if any of `d` divisions mutates it.
/// A cell transforms when all `k` pathways are mutated. Returns the
/// estimate and its standard error.
pub fn monte_carlo_growth_probability<R: Rng>(
    u: f64,
    d: u64,
    k: u64,
    n_stem: u64,
    trials: u64,
    rng: &mut R,
) -> (f64, f64) {
    let mut hits = 0u64;
    for _ in 0..trials {
        let transformed = (0..n_stem).any(|_| (0..k).all(|_| (0..d).any(|_| rng.gen_bool(u))));
        if transformed {
            hits += 1;
        }
    }
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Hand transcription of the trial cascade: `(state, [(factor, target)])`
/// with states and factors named by string.
pub fn cascade_table(
    ap: f64,
    ag: f64,
    q: f64,
    f: f64,
) -> Vec<(&'static str, Vec<(f64, &'static str)>)> {
    vec![
        (
            "normal",
            vec![
                (q, "quiescent"),
                ((ag * (1.0 + f)).min(1.0), "proliferative"),
            ],
        ),
        ("proliferative", vec![(ag, "inflamed"), (ap, "normal")]),
        (
            "inflamed",
            vec![(q, "quiescent"), (ap, "dead"), (ag * f, "metastatic")],
        ),
        ("quiescent", vec![(ag * (1.0 - q), "normal")]),
        ("metastatic", vec![]),
        ("dead", vec![]),
    ]
}

/// Enumerate all `2^m` success/failure patterns of a cascade and return
/// the probability of each outcome (`None` = stay).
pub fn enumerate_cascade(trials: &[(f64, &'static str)]) -> Vec<(Option<&'static str>, f64)> {
    let m = trials.len();
    let mut outcomes: Vec<(Option<&'static str>, f64)> = Vec::new();
    for pattern in 0u32..(1 << m) {
        let mut prob = 1.0;
        for (i, &(p, _)) in trials.iter().enumerate() {
            prob *= if pattern >> i & 1 == 1 { p } else { 1.0 - p };
        }
        let fired = (0..m).find(|&i| pattern >> i & 1 == 1).map(|i| trials[i].1);
        match outcomes.iter_mut().find(|(o, _)| *o == fired) {
            Some(slot) => slot.1 += prob,
            None => outcomes.push((fired, prob)),
        }
    }
    outcomes
}
