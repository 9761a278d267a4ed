//! Rotation systems (fat graphs) on an oriented surface.
//!
//! Darts are numbered `0..n`; every dart sits at a vertex, has a ccw
//! successor around that vertex, and a mate (the other end of its edge).
//! Faces are the orbits of `next_ccw ∘ mate`.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FatGraph {
    pub vertex: Vec<usize>,
    pub next_ccw: Vec<usize>,
    pub mate: Vec<usize>,
}

impl FatGraph {
    /// Build from per-vertex ccw dart lists and an edge list of dart pairs.
    pub fn from_rotations(rotations: &[Vec<usize>], edges: &[(usize, usize)]) -> FatGraph {
        let n = rotations.iter().map(Vec::len).sum();
        let mut vertex = vec![usize::MAX; n];
        let mut next_ccw = vec![usize::MAX; n];
        let mut mate = vec![usize::MAX; n];
        for (v, rot) in rotations.iter().enumerate() {
            for (i, &d) in rot.iter().enumerate() {
                vertex[d] = v;
                next_ccw[d] = rot[(i + 1) % rot.len()];
            }
        }
        for &(a, b) in edges {
            mate[a] = b;
            mate[b] = a;
        }
        FatGraph {
            vertex,
            next_ccw,
            mate,
        }
    }

    pub fn dart_count(&self) -> usize {
        self.vertex.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn edge_count(&self) -> usize {
        self.dart_count() / 2
    }

    /// Face boundary walks, each starting at its smallest dart.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let n = self.dart_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut walk = Vec::new();
            let mut d = start;
            while !seen[d] {
                seen[d] = true;
                walk.push(d);
                d = self.next_ccw[self.mate[d]];
            }
            out.push(walk);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.dart_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(d) = stack.pop() {
            for e in [self.next_ccw[d], self.mate[d]] {
                if !seen[e] {
                    seen[e] = true;
                    count += 1;
                    stack.push(e);
                }
            }
        }
        count == n
    }

    /// `V - E + F` of the cellular surface determined by the rotation system.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.faces().len() as i64
    }
}
