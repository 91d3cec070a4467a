//! Fill-reducing ordering by recursive level-set bisection (automatic nested dissection).

use std::collections::VecDeque;

/// Undirected graph in compressed adjacency form, no self loops.
#[derive(Debug, Clone)]
pub struct Graph {
    xadj: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    pub fn new(xadj: Vec<usize>, adj: Vec<usize>) -> Self {
        assert_eq!(*xadj.last().unwrap_or(&0), adj.len());
        Graph { xadj, adj }
    }

    pub fn len(&self) -> usize {
        self.xadj.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.xadj[v]..self.xadj[v + 1]]
    }
}

const LEAF_SIZE: usize = 48;
const UNSET: usize = usize::MAX;

struct Dissector<'g> {
    g: &'g Graph,
    /// Subset tag per vertex; only vertices tagged with the current tag are in play.
    tag: Vec<usize>,
    next_tag: usize,
    level: Vec<usize>,
}

enum Task {
    Split(Vec<usize>),
    Emit(Vec<usize>),
}

impl<'g> Dissector<'g> {
    fn mark(&mut self, set: &[usize]) -> usize {
        let t = self.next_tag;
        self.next_tag += 1;
        for &v in set {
            self.tag[v] = t;
        }
        t
    }

    /// BFS from `root` within tag `t`; returns vertices grouped by level.
    fn levels(&mut self, root: usize, t: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![vec![root]];
        self.level[root] = 0;
        let mut seen = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let lv = self.level[v];
            for &w in self.g.neighbors(v) {
                if self.tag[w] == t && self.level[w] == UNSET {
                    self.level[w] = lv + 1;
                    if out.len() <= lv + 1 {
                        out.push(Vec::new());
                    }
                    out[lv + 1].push(w);
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        for v in seen {
            self.level[v] = UNSET;
        }
        out
    }

    fn degree_in(&self, v: usize, t: usize) -> usize {
        self.g.neighbors(v).iter().filter(|&&w| self.tag[w] == t).count()
    }

    fn split(&mut self, set: Vec<usize>, tasks: &mut Vec<Task>) {
        if set.len() <= LEAF_SIZE {
            tasks.push(Task::Emit(set));
            return;
        }
        let t = self.mark(&set);
        let start = *set
            .iter()
            .min_by_key(|&&v| (self.degree_in(v, t), v))
            .expect("non-empty set");
        let mut lv = self.levels(start, t);
        let reached: usize = lv.iter().map(Vec::len).sum();
        if reached < set.len() {
            // disconnected: hand each component back separately
            let comp: Vec<usize> = lv.concat();
            let t_comp = self.mark(&comp);
            let rest: Vec<usize> = set.iter().copied().filter(|&v| self.tag[v] != t_comp).collect();
            tasks.push(Task::Split(rest));
            tasks.push(Task::Split(comp));
            return;
        }
        // pseudo-peripheral root
        for _ in 0..4 {
            let last = lv.last().unwrap();
            let cand = *last
                .iter()
                .min_by_key(|&&v| (self.degree_in(v, t), v))
                .unwrap();
            let lv2 = self.levels(cand, t);
            if lv2.len() > lv.len() {
                lv = lv2;
            } else {
                break;
            }
        }
        if lv.len() < 3 {
            tasks.push(Task::Emit(set));
            return;
        }
        let half = set.len() / 2;
        let mut acc = 0;
        let mut m = 1;
        for (i, l) in lv.iter().enumerate() {
            acc += l.len();
            if acc >= half {
                m = i;
                break;
            }
        }
        let m = m.clamp(1, lv.len() - 2);
        let mut a: Vec<usize> = lv[..m].concat();
        let b: Vec<usize> = lv[m + 1..].concat();
        let tb = self.mark(&b);
        let mut sep = Vec::new();
        for &v in &lv[m] {
            if self.g.neighbors(v).iter().any(|&w| self.tag[w] == tb) {
                sep.push(v);
            } else {
                a.push(v);
            }
        }
        tasks.push(Task::Emit(sep));
        tasks.push(Task::Split(b));
        tasks.push(Task::Split(a));
    }
}

/// Returns a permutation `perm[new] = old` that orders separators after the
/// parts they separate.
pub fn nested_dissection(g: &Graph) -> Vec<usize> {
    let n = g.len();
    let mut d = Dissector {
        g,
        tag: vec![UNSET; n],
        next_tag: 0,
        level: vec![UNSET; n],
    };
    let mut order = Vec::with_capacity(n);
    let mut tasks = vec![Task::Split((0..n).collect())];
    while let Some(task) = tasks.pop() {
        match task {
            Task::Emit(mut s) => {
                s.sort_unstable();
                order.extend(s);
            }
            Task::Split(s) => d.split(s, &mut tasks),
        }
    }
    debug_assert_eq!(order.len(), n);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Graph {
        let id = |i: usize, j: usize| j * n + i;
        let mut nb = vec![Vec::new(); n * n];
        for j in 0..n {
            for i in 0..n {
                if i + 1 < n {
                    nb[id(i, j)].push(id(i + 1, j));
                    nb[id(i + 1, j)].push(id(i, j));
                }
                if j + 1 < n {
                    nb[id(i, j)].push(id(i, j + 1));
                    nb[id(i, j + 1)].push(id(i, j));
                }
            }
        }
        let mut xadj = vec![0];
        let mut adj = Vec::new();
        for l in nb {
            adj.extend(l);
            xadj.push(adj.len());
        }
        Graph::new(xadj, adj)
    }

    #[test]
    fn ordering_is_a_permutation() {
        let g = grid(30);
        let mut p = nested_dissection(&g);
        assert_eq!(p.len(), 900);
        p.sort_unstable();
        assert!(p.iter().enumerate().all(|(i, &v)| i == v));
    }

    #[test]
    fn disconnected_graph() {
        // two disjoint paths of 60 vertices
        let mut xadj = vec![0];
        let mut adj = Vec::new();
        for v in 0..120usize {
            let base = if v < 60 { 0 } else { 60 };
            let k = v - base;
            if k > 0 {
                adj.push(v - 1);
            }
            if k + 1 < 60 {
                adj.push(v + 1);
            }
            xadj.push(adj.len());
        }
        let g = Graph::new(xadj, adj);
        let mut p = nested_dissection(&g);
        p.sort_unstable();
        assert_eq!(p, (0..120).collect::<Vec<_>>());
    }
}
