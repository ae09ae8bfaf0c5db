use super::RelStructure;

/// Co-occurrence graph of a structure, loops dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaifmanGraph {
    n: usize,
    adj: Vec<u64>,
}

impl GaifmanGraph {
    pub fn of(s: &RelStructure) -> Self {
        let n = s.n();
        let mut adj = vec![0u64; n];
        for sym in 0..s.vocab().symbols().len() {
            for t in s.tuples(sym) {
                for (i, &a) in t.iter().enumerate() {
                    for &b in &t[i + 1..] {
                        if a != b {
                            adj[a - 1] |= 1 << (b - 1);
                            adj[b - 1] |= 1 << (a - 1);
                        }
                    }
                }
            }
        }
        Self { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbour bitmask of `a` (bit `b - 1` for neighbour `b`).
    pub fn neighbor_mask(&self, a: usize) -> u64 {
        self.adj[a - 1]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a - 1] >> (b - 1) & 1 == 1
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        (1..=self.n).filter(|&b| self.adjacent(a, b)).collect()
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a - 1].count_ones() as usize
    }

    pub fn degrees(&self) -> Vec<usize> {
        (1..=self.n).map(|a| self.degree(a)).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    /// Connected components as bitmasks, ordered by smallest element.
    pub fn components(&self) -> Vec<u64> {
        let mut seen = 0u64;
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen >> start & 1 == 1 {
                continue;
            }
            let mut comp = 1u64 << start;
            let mut frontier = comp;
            while frontier != 0 {
                let v = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let fresh = self.adj[v] & !comp;
                comp |= fresh;
                frontier |= fresh;
            }
            seen |= comp;
            out.push(comp);
        }
        out
    }

    /// The empty graph is not connected; a single vertex is.
    pub fn is_connected(&self) -> bool {
        self.n >= 1 && self.components().len() == 1
    }
}
