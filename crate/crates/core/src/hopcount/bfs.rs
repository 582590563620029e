//! Breadth-first search on a [`Digraph`].

use crate::error::{Error, Result};
use crate::graph::Digraph;

pub const UNREACHED: u32 = u32::MAX;

/// Reusable BFS buffers; resetting touches only the visited nodes.
#[derive(Clone, Debug)]
pub struct Bfs {
    dist: Vec<u32>,
    queue: Vec<u32>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Bfs {
            dist: vec![UNREACHED; n],
            queue: Vec::with_capacity(n),
        }
    }

    fn reset(&mut self) {
        for &v in &self.queue {
            self.dist[v as usize] = UNREACHED;
        }
        self.queue.clear();
    }

    /// Runs a full search from `source`.
    pub fn run(&mut self, g: &Digraph, source: usize) {
        self.run_until(g, source, |_| false);
    }

    /// Nodes reached by the last search in BFS order, so distances are
    /// nondecreasing along the slice. After an early stop this includes
    /// discovered but unsettled nodes.
    pub fn visited(&self) -> &[u32] {
        &self.queue
    }

    /// Distance from the last source (`UNREACHED` if not visited).
    pub fn dist(&self, v: usize) -> u32 {
        self.dist[v]
    }

    /// Searches from `source`, stopping as soon as `stop(v)` holds for a
    /// settled node, which is returned.
    pub fn run_until<F: FnMut(usize) -> bool>(&mut self, g: &Digraph, source: usize, mut stop: F) -> Option<usize> {
        self.reset();
        self.dist[source] = 0;
        self.queue.push(source as u32);
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head] as usize;
            head += 1;
            if stop(u) {
                return Some(u);
            }
            let du = self.dist[u] + 1;
            for &v in g.out_neighbors(u) {
                let slot = &mut self.dist[v as usize];
                if *slot == UNREACHED {
                    *slot = du;
                    self.queue.push(v);
                }
            }
        }
        None
    }
}

/// Length of a shortest directed path, `None` if `target` is unreachable.
pub fn bfs_distance(g: &Digraph, source: usize, target: usize) -> Result<Option<u32>> {
    for v in [source, target] {
        if v >= g.n() {
            return Err(Error::NodeOutOfRange { node: v, n: g.n() });
        }
    }
    let mut bfs = Bfs::new(g.n());
    Ok(bfs.run_until(g, source, |v| v == target).map(|v| bfs.dist(v)))
}
