//! Iterative Tarjan SCC over compressed adjacency.

/// Compressed sparse rows: neighbors of `v` are `targets[offsets[v]..offsets[v + 1]]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Csr {
    pub offsets: Vec<usize>,
    pub targets: Vec<u32>,
}

impl Csr {
    /// Builds from per-node lists; each list is sorted and deduplicated.
    pub fn from_lists(lists: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            targets.extend_from_slice(&l);
            offsets.push(targets.len());
        }
        Csr { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    /// Whether every edge of `self` is also an edge of `other`.
    pub fn is_subgraph_of(&self, other: &Csr) -> bool {
        self.node_count() == other.node_count()
            && (0..self.node_count()).all(|v| {
                let theirs = other.neighbors(v);
                self.neighbors(v).iter().all(|w| theirs.binary_search(w).is_ok())
            })
    }
}

/// Strongly connected components.
///
/// Component ids follow Tarjan's emission order, which is a reverse
/// topological order of the condensation: component 0 is a sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccResult {
    pub component: Vec<u32>,
    pub count: usize,
    pub largest: usize,
}

impl SccResult {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.count];
        for &c in &self.component {
            s[c as usize] += 1;
        }
        s
    }
}

const UNVISITED: u32 = u32::MAX;

pub fn scc(graph: &Csr) -> SccResult {
    let n = graph.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut component = vec![UNVISITED; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut counter = 0u32;
    let mut count = 0usize;
    let mut largest = 0usize;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        call.push((root as u32, graph.offsets[root]));

        while let Some(frame) = call.last_mut() {
            let v = frame.0 as usize;
            if frame.1 < graph.offsets[v + 1] {
                let w = graph.targets[frame.1] as usize;
                frame.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, graph.offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                let u = u as usize;
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                let mut size = 0;
                loop {
                    let w = stack.pop().expect("tarjan stack underflow") as usize;
                    on_stack[w] = false;
                    component[w] = count as u32;
                    size += 1;
                    if w == v {
                        break;
                    }
                }
                largest = largest.max(size);
                count += 1;
            }
        }
    }
    SccResult {
        component,
        count,
        largest,
    }
}
