//! Finite balls of the Bass-Serre covering tree of a marking.
//!
//! Vertices of the covering tree are cosets `g S_v` of the vertex groups,
//! one family per quotient vertex; edges have trivial stabilizer, so a node
//! of stabilizer order `m` meets `m` edges per incident quotient edge. Nodes
//! are keyed by the shortlex-least word in the coset.

use super::{normalize_conjugator, GraphOfGroups, VertexLabel};
use crate::groups::FactorSystem;
use crate::words::{self, Word};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

pub type NodeId = u32;

const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Node cap for ball construction; `SPINELAB_NODE_CAP` overrides the default.
pub fn node_cap() -> usize {
    std::env::var("SPINELAB_NODE_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_NODE_CAP)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BallError {
    #[error("ball would exceed the node cap of {cap}")]
    RadiusTooLarge { cap: usize },
    #[error("ball too small: {what}")]
    BallTooSmall { what: String },
    #[error("required center vertices missing from the ball")]
    CentersMissing,
    #[error("element is elliptic (fixes a vertex)")]
    Elliptic,
    #[error("bad reference vertex: {what}")]
    BadReference { what: String },
}

#[derive(Debug, Clone)]
pub struct BallNode {
    /// Shortlex-least coset representative.
    pub rep: Word,
    /// Quotient vertex this node lies over.
    pub qv: usize,
    pub depth: u32,
    /// `(factor, conjugator)` when the stabilizer is `c A_k c^{-1}`.
    pub stab: Option<(usize, Word)>,
}

#[derive(Debug, Clone)]
pub struct BassSerreBall {
    pub nodes: Vec<BallNode>,
    pub adj: Vec<Vec<NodeId>>,
    pub radius: u32,
    pub center: NodeId,
    index: HashMap<(usize, Word), NodeId>,
    marking: GraphOfGroups,
}

fn coset_rep(sys: &FactorSystem, label: &VertexLabel, g: &Word) -> Word {
    match label {
        VertexLabel::Trivial => g.clone(),
        VertexLabel::Peripheral { factor, conj } => {
            let base = words::mul(sys, g, conj);
            let conj_inv = words::inv(sys, conj);
            sys.factor(*factor)
                .elements()
                .map(|a| {
                    let mut r = words::Reducer::new(sys);
                    r.push_word(&base);
                    r.push(*factor, a);
                    r.push_word(&conj_inv);
                    r.finish()
                })
                .min()
                .expect("nonempty group")
        }
    }
}

/// BFS ball of the covering tree around the trivial-coset lift of `center`.
pub fn bass_serre_ball(
    sys: &FactorSystem,
    x: &GraphOfGroups,
    center: usize,
    radius: u32,
    cap: usize,
) -> Result<BassSerreBall, BallError> {
    let mut ball = BassSerreBall {
        nodes: Vec::new(),
        adj: Vec::new(),
        radius,
        center: 0,
        index: HashMap::new(),
        marking: x.clone(),
    };
    let root_rep = coset_rep(sys, &x.labels[center], &Word::empty());
    ball.insert(sys, center, root_rep, 0);
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    queue.push_back(0);
    while let Some(id) = queue.pop_front() {
        let depth = ball.nodes[id as usize].depth;
        if depth == radius {
            continue;
        }
        let qv = ball.nodes[id as usize].qv;
        let rep = ball.nodes[id as usize].rep.clone();
        for e in x.incident_edges(qv) {
            let (a, b) = x.edges[e];
            let other = if a == qv { b } else { a };
            // Edges at this node are the elements of its stabilizer coset.
            let stab_elems: Vec<Word> = match &x.labels[qv] {
                VertexLabel::Trivial => vec![rep.clone()],
                VertexLabel::Peripheral { factor, conj } => {
                    let conj_inv = words::inv(sys, conj);
                    sys.factor(*factor)
                        .elements()
                        .map(|s| {
                            let mut r = words::Reducer::new(sys);
                            r.push_word(&rep);
                            r.push_word(conj);
                            r.push(*factor, s);
                            r.push_word(&conj_inv);
                            r.finish()
                        })
                        .collect()
                }
            };
            for h in stab_elems {
                let nrep = coset_rep(sys, &x.labels[other], &h);
                let nid = match ball.index.get(&(other, nrep.clone())) {
                    Some(&nid) => nid,
                    None => {
                        if ball.nodes.len() >= cap {
                            return Err(BallError::RadiusTooLarge { cap });
                        }
                        let nid = ball.insert(sys, other, nrep, depth + 1);
                        queue.push_back(nid);
                        nid
                    }
                };
                if !ball.adj[id as usize].contains(&nid) {
                    ball.adj[id as usize].push(nid);
                    ball.adj[nid as usize].push(id);
                }
            }
        }
    }
    for l in ball.adj.iter_mut() {
        l.sort();
        l.dedup();
    }
    Ok(ball)
}

impl BassSerreBall {
    fn insert(&mut self, sys: &FactorSystem, qv: usize, rep: Word, depth: u32) -> NodeId {
        let id = self.nodes.len() as NodeId;
        let stab = match &self.marking.labels[qv] {
            VertexLabel::Trivial => None,
            VertexLabel::Peripheral { factor, conj } => {
                let c = words::mul(sys, &rep, conj);
                Some((*factor, normalize_conjugator(sys, *factor, &c)))
            }
        };
        self.index.insert((qv, rep.clone()), id);
        self.nodes.push(BallNode {
            rep,
            qv,
            depth,
            stab,
        });
        self.adj.push(Vec::new());
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &BallNode {
        &self.nodes[id as usize]
    }

    pub fn marking(&self) -> &GraphOfGroups {
        &self.marking
    }

    pub fn find(&self, qv: usize, rep: &Word) -> Option<NodeId> {
        self.index.get(&(qv, rep.clone())).copied()
    }

    /// The unique node whose stabilizer is `conj A_factor conj^{-1}`.
    pub fn find_stabilized(&self, factor: usize, conj: &Word) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| {
                n.stab
                    .as_ref()
                    .map(|(f, c)| *f == factor && c == conj)
                    .unwrap_or(false)
            })
            .map(|i| i as NodeId)
    }

    /// Left action of a group element; `None` when the image leaves the ball.
    pub fn act(&self, sys: &FactorSystem, g: &Word, id: NodeId) -> Option<NodeId> {
        let n = &self.nodes[id as usize];
        let moved = words::mul(sys, g, &n.rep);
        let rep = coset_rep(sys, &self.marking.labels[n.qv], &moved);
        self.find(n.qv, &rep)
    }

    /// BFS distances from `a` inside the ball; `u32::MAX` marks unreachable.
    pub fn distances_from(&self, a: NodeId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.nodes.len()];
        dist[a as usize] = 0;
        let mut q = VecDeque::new();
        q.push_back(a);
        while let Some(v) = q.pop_front() {
            for &u in &self.adj[v as usize] {
                if dist[u as usize] == u32::MAX {
                    dist[u as usize] = dist[v as usize] + 1;
                    q.push_back(u);
                }
            }
        }
        dist
    }

    /// The unique path between two nodes of the ball (a tree).
    pub fn path(&self, a: NodeId, b: NodeId) -> Option<Vec<NodeId>> {
        let mut prev = vec![NodeId::MAX; self.nodes.len()];
        let mut q = VecDeque::new();
        prev[a as usize] = a;
        q.push_back(a);
        while let Some(v) = q.pop_front() {
            if v == b {
                break;
            }
            for &u in &self.adj[v as usize] {
                if prev[u as usize] == NodeId::MAX {
                    prev[u as usize] = v;
                    q.push_back(u);
                }
            }
        }
        if prev[b as usize] == NodeId::MAX {
            return None;
        }
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = prev[cur as usize];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// A node of the covering tree addressed by quotient vertex and canonical
/// coset representative; usable without materializing a ball.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeNode {
    pub qv: usize,
    pub rep: Word,
}

/// Lazy view of the covering tree of a marking: nodes are materialized on
/// demand, so long-range computations stay proportional to the region
/// actually visited instead of a full ball.
pub struct CoveringTree<'a> {
    sys: &'a FactorSystem,
    marking: &'a GraphOfGroups,
}

impl<'a> CoveringTree<'a> {
    pub fn new(sys: &'a FactorSystem, marking: &'a GraphOfGroups) -> Self {
        CoveringTree { sys, marking }
    }

    pub fn node(&self, qv: usize, g: &Word) -> TreeNode {
        TreeNode {
            qv,
            rep: coset_rep(self.sys, &self.marking.labels[qv], g),
        }
    }

    /// The unique node stabilized by `conj A_factor conj^{-1}`.
    pub fn stabilized_node(&self, factor: usize, conj: &Word) -> TreeNode {
        let qv = self.marking.factor_vertex(factor).expect("factor vertex");
        let w = self.marking.labels[qv].conj().cloned().unwrap_or_default();
        let g = words::mul(self.sys, conj, &words::inv(self.sys, &w));
        self.node(qv, &g)
    }

    pub fn stab(&self, n: &TreeNode) -> Option<(usize, Word)> {
        match &self.marking.labels[n.qv] {
            VertexLabel::Trivial => None,
            VertexLabel::Peripheral { factor, conj } => {
                let c = words::mul(self.sys, &n.rep, conj);
                Some((*factor, normalize_conjugator(self.sys, *factor, &c)))
            }
        }
    }

    pub fn act(&self, g: &Word, n: &TreeNode) -> TreeNode {
        let moved = words::mul(self.sys, g, &n.rep);
        self.node(n.qv, &moved)
    }

    pub fn neighbors(&self, n: &TreeNode) -> Vec<TreeNode> {
        let mut out = Vec::new();
        for e in self.marking.incident_edges(n.qv) {
            let (a, b) = self.marking.edges[e];
            let other = if a == n.qv { b } else { a };
            match &self.marking.labels[n.qv] {
                VertexLabel::Trivial => out.push(self.node(other, &n.rep)),
                VertexLabel::Peripheral { factor, conj } => {
                    let conj_inv = words::inv(self.sys, conj);
                    for s in self.sys.factor(*factor).elements() {
                        let mut r = words::Reducer::new(self.sys);
                        r.push_word(&n.rep);
                        r.push_word(conj);
                        r.push(*factor, s);
                        r.push_word(&conj_inv);
                        let h = r.finish();
                        out.push(self.node(other, &h));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Unique path between two nodes, by bidirectional BFS; `None` when the
    /// visited-node cap is exceeded.
    pub fn path(&self, a: &TreeNode, b: &TreeNode, cap: usize) -> Option<Vec<TreeNode>> {
        if a == b {
            return Some(vec![a.clone()]);
        }
        let mut pa: HashMap<TreeNode, TreeNode> = HashMap::new();
        let mut pb: HashMap<TreeNode, TreeNode> = HashMap::new();
        pa.insert(a.clone(), a.clone());
        pb.insert(b.clone(), b.clone());
        let mut fa = vec![a.clone()];
        let mut fb = vec![b.clone()];
        let mut meet: Option<TreeNode> = None;
        'outer: while meet.is_none() {
            if fa.is_empty() && fb.is_empty() {
                return None;
            }
            if pa.len() + pb.len() > cap {
                return None;
            }
            let expand_a = !fa.is_empty() && (fa.len() <= fb.len() || fb.is_empty());
            let (front, mine, other) = if expand_a {
                (&mut fa, &mut pa, &pb)
            } else {
                (&mut fb, &mut pb, &pa)
            };
            let mut next = Vec::new();
            for n in front.drain(..) {
                for u in self.neighbors(&n) {
                    if mine.contains_key(&u) {
                        continue;
                    }
                    mine.insert(u.clone(), n.clone());
                    if other.contains_key(&u) {
                        meet = Some(u);
                        break 'outer;
                    }
                    next.push(u);
                }
            }
            *if expand_a { &mut fa } else { &mut fb } = next;
        }
        let meet = meet.unwrap();
        let mut left = Vec::new();
        let mut cur = meet.clone();
        loop {
            left.push(cur.clone());
            let p = pa[&cur].clone();
            if p == cur {
                break;
            }
            cur = p;
        }
        left.reverse();
        let mut cur = meet;
        loop {
            let p = pb[&cur].clone();
            if p == cur {
                break;
            }
            left.push(p.clone());
            cur = p;
        }
        Some(left)
    }

    /// BFS from `start` until a member of `targets` is hit; returns the
    /// nearest target (the projection when `targets` spans a subtree).
    pub fn nearest_of(
        &self,
        start: &TreeNode,
        targets: &std::collections::HashSet<TreeNode>,
        cap: usize,
    ) -> Option<(TreeNode, u32)> {
        if targets.contains(start) {
            return Some((start.clone(), 0));
        }
        let mut seen: std::collections::HashSet<TreeNode> = std::collections::HashSet::new();
        seen.insert(start.clone());
        let mut frontier = vec![start.clone()];
        let mut d = 0;
        while !frontier.is_empty() && seen.len() <= cap {
            d += 1;
            let mut next = Vec::new();
            for n in &frontier {
                for u in self.neighbors(n) {
                    if targets.contains(&u) {
                        return Some((u, d));
                    }
                    if seen.insert(u.clone()) {
                        next.push(u);
                    }
                }
            }
            frontier = next;
        }
        None
    }
}

/// Independent equivalence oracle: compares the covering-tree balls of two
/// markings out to `radius` around the unique vertex stabilized by the
/// first factor group, with stabilizers matched exactly. Equality of the
/// rooted codes is exactly the existence of an anchored, stabilizer-exact
/// ball isomorphism.
pub fn equivariant_iso_oracle(
    sys: &FactorSystem,
    x1: &GraphOfGroups,
    x2: &GraphOfGroups,
    radius: u32,
) -> Result<bool, BallError> {
    let cap = node_cap();
    Ok(anchored_tree_code(sys, x1, radius, cap)? == anchored_tree_code(sys, x2, radius, cap)?)
}

/// Rooted AHU-style code of the lazily explored ball of the given radius
/// around the anchor, with exact stabilizer descriptors as labels.
fn anchored_tree_code(
    sys: &FactorSystem,
    x: &GraphOfGroups,
    radius: u32,
    cap: usize,
) -> Result<Vec<u8>, BallError> {
    let tree = CoveringTree::new(sys, x);
    let anchor = tree.stabilized_node(0, &Word::empty());
    let mut visited = 0usize;
    fn encode(
        tree: &CoveringTree,
        v: &TreeNode,
        parent: Option<&TreeNode>,
        depth_left: u32,
        visited: &mut usize,
        cap: usize,
    ) -> Result<Vec<u8>, BallError> {
        *visited += 1;
        if *visited > cap {
            return Err(BallError::RadiusTooLarge { cap });
        }
        let mut out = match tree.stab(v) {
            None => vec![0u8],
            Some((f, c)) => {
                let mut bytes = vec![1u8, (f + 1) as u8, c.len() as u8];
                for l in c.letters() {
                    bytes.push((l.factor + 1) as u8);
                    bytes.push(l.elem as u8);
                }
                bytes
            }
        };
        out.push(0x02);
        if depth_left > 0 {
            let mut children: Vec<Vec<u8>> = Vec::new();
            for u in tree.neighbors(v) {
                if Some(&u) == parent {
                    continue;
                }
                children.push(encode(tree, &u, Some(v), depth_left - 1, visited, cap)?);
            }
            children.sort();
            for c in children {
                out.extend_from_slice(&c);
            }
        }
        out.push(0x03);
        Ok(out)
    }
    encode(&tree, &anchor, None, radius, &mut visited, cap)
}

/// Default oracle radius: twice the maximal quotient diameter plus slack.
pub fn default_oracle_radius(sys: &FactorSystem) -> u32 {
    (2 * (2 * sys.n() - 3) + 2) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gog::{basepoint_star, equivalent};
    use crate::groups::{cyclic, FactorSystem};

    fn sys_n(n: usize) -> FactorSystem {
        FactorSystem::new((0..n).map(|_| cyclic(2).unwrap()).collect()).unwrap()
    }

    #[test]
    fn segment_ball_is_a_path() {
        let sys = sys_n(2);
        let x = basepoint_star(&sys);
        // Radius 2 around v(A_1): a line with 5 nodes over C2*C2.
        let ball = bass_serre_ball(&sys, &x, 0, 2, node_cap()).unwrap();
        assert_eq!(ball.len(), 5);
        let degrees: Vec<usize> = (0..ball.len()).map(|i| ball.adj[i].len()).collect();
        assert_eq!(degrees.iter().filter(|&&d| d == 2).count(), 3);
        assert_eq!(degrees.iter().filter(|&&d| d == 1).count(), 2);
    }

    #[test]
    fn star_ball_degrees() {
        let sys = sys_n(3);
        let x = basepoint_star(&sys);
        // Radius 1 around the hub: hub plus 3 peripheral cosets.
        let ball = bass_serre_ball(&sys, &x, 3, 1, node_cap()).unwrap();
        assert_eq!(ball.len(), 4);
        assert_eq!(ball.adj[0].len(), 3);
    }

    #[test]
    fn stabilized_node_sits_at_conjugator_rep() {
        let sys = sys_n(3);
        let mut x = basepoint_star(&sys);
        let w = Word::letter(1, 1);
        x.labels[2] = VertexLabel::peripheral(&sys, 2, &w);
        let ball = bass_serre_ball(&sys, &x, 3, 4, node_cap()).unwrap();
        // The vertex stabilized by w A_3 w^{-1} has representative reduce(w).
        let id = ball.find_stabilized(2, &w).unwrap();
        assert_eq!(ball.node(id).rep, Word::empty());
        // And the vertex stabilized by A_3 exactly sits at rep w^{-1}.
        let id = ball.find_stabilized(2, &Word::empty()).unwrap();
        assert_eq!(ball.node(id).rep, words::inv(&sys, &w));
    }

    #[test]
    fn ball_stability_under_radius_growth() {
        let sys = sys_n(3);
        let x = basepoint_star(&sys);
        let small = bass_serre_ball(&sys, &x, 3, 3, node_cap()).unwrap();
        let big = bass_serre_ball(&sys, &x, 3, 4, node_cap()).unwrap();
        for n in &small.nodes {
            let id = big.find(n.qv, &n.rep).unwrap();
            assert_eq!(big.node(id).depth, n.depth);
        }
        // Induced adjacency agrees on the smaller ball.
        for (i, n) in small.nodes.iter().enumerate() {
            let bi = big.find(n.qv, &n.rep).unwrap();
            let mut small_nbrs: Vec<(usize, Word)> = small.adj[i]
                .iter()
                .map(|&j| (small.node(j).qv, small.node(j).rep.clone()))
                .collect();
            small_nbrs.sort();
            let mut big_nbrs: Vec<(usize, Word)> = big.adj[bi as usize]
                .iter()
                .filter(|&&j| big.node(j).depth <= 3 && small.find(big.node(j).qv, &big.node(j).rep).is_some())
                .map(|&j| (big.node(j).qv, big.node(j).rep.clone()))
                .collect();
            big_nbrs.sort();
            if n.depth < 3 {
                assert_eq!(small_nbrs, big_nbrs);
            }
        }
    }

    #[test]
    fn oracle_agrees_on_simple_cases() {
        let sys = sys_n(3);
        let x = basepoint_star(&sys);
        assert!(equivariant_iso_oracle(&sys, &x, &x, 6).unwrap());

        // Conjugated n=2 segment vs plain segment.
        let sys2 = sys_n(2);
        let plain = basepoint_star(&sys2);
        let mut conj = plain.clone();
        conj.labels[1] = VertexLabel::peripheral(&sys2, 1, &Word::letter(0, 1));
        assert!(equivariant_iso_oracle(&sys2, &plain, &conj, 6).unwrap());
        assert!(equivalent(&sys2, &plain, &conj).unwrap());

        // False witness: one twisted leaf over C2*C2*C2.
        let mut twisted = x.clone();
        twisted.labels[2] = VertexLabel::peripheral(&sys, 2, &Word::letter(1, 1));
        assert!(!equivariant_iso_oracle(&sys, &x, &twisted, 6).unwrap());
        assert!(!equivalent(&sys, &x, &twisted).unwrap());
    }
}
