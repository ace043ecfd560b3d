//! Graph algorithms on adjacency lists (`graph[u]` = successors of `u`).

use std::collections::VecDeque;

/// Reverses an adjacency list.
pub fn predecessors(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); graph.len()];
    for (u, succ) in graph.iter().enumerate() {
        for &v in succ {
            pred[v].push(u);
        }
    }
    pred
}

/// States that can reach some state in `targets`.
pub fn backward_reachable(graph: &[Vec<usize>], targets: &[bool]) -> Vec<bool> {
    let pred = predecessors(graph);
    let mut seen = targets.to_vec();
    let mut queue: VecDeque<usize> = (0..graph.len()).filter(|&s| targets[s]).collect();
    while let Some(v) = queue.pop_front() {
        for &u in &pred[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// States reachable from `start`.
pub fn forward_reachable(graph: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; graph.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &graph[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Backward breadth-first distance to `targets` (`None` if unreachable).
pub fn distance_to(graph: &[Vec<usize>], targets: &[bool]) -> Vec<Option<usize>> {
    let pred = predecessors(graph);
    let mut dist = vec![None; graph.len()];
    let mut queue = VecDeque::new();
    for s in 0..graph.len() {
        if targets[s] {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap_or(0);
        for &u in &pred[v] {
            if dist[u].is_none() {
                dist[u] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Strongly connected components (Tarjan, iterative), in reverse topological order.
pub fn strongly_connected_components(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = graph.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (node, next edge position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(frame) = call.last_mut() {
            let u = frame.0;
            if frame.1 < graph[u].len() {
                let v = graph[u][frame.1];
                frame.1 += 1;
                if index[v] == UNVISITED {
                    index[v] = next;
                    low[v] = next;
                    next += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    call.push((v, 0));
                } else if on_stack[v] {
                    low[u] = low[u].min(index[v]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[u]);
                }
                if low[u] == index[u] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == u {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    components
}

/// Bottom SCCs: components with no edge leaving them.
pub fn bottom_components(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let sccs = strongly_connected_components(graph);
    let mut comp_of = vec![0; graph.len()];
    for (i, c) in sccs.iter().enumerate() {
        for &s in c {
            comp_of[s] = i;
        }
    }
    let mut bottoms: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(i, c)| c.iter().all(|&s| graph[s].iter().all(|&t| comp_of[t] == *i)))
        .map(|(_, c)| c.clone())
        .collect();
    bottoms.sort_by_key(|c| c[0]);
    bottoms
}
