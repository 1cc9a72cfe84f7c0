//! Minimal subtrees, axes, the axis-vertex counting functions, the
//! retractions onto the pair and four-factor subcomplexes, and distortion
//! experiment reports.
//!
//! Ball-facing operations work on an explicit [`BassSerreBall`]. The
//! retraction and counting pipelines run on the lazy covering-tree view
//! instead, materializing only the region they touch: the relevant objects
//! (axis segments, minimal-subtree neighborhoods, projections) are all
//! within bounded distance of the factor vertices.

use crate::autos::{self, AutoGen, OuterAutoWord};
use crate::gog::{
    ball::{CoveringTree, TreeNode},
    BallError, BassSerreBall, GraphOfGroups, NodeId, VertexLabel,
};
use crate::groups::FactorSystem;
use crate::spine::{self, classify, Distance, Tag};
use crate::words::{self, Word};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

const SEARCH_CAP: usize = 2_000_000;

/// A named subgroup given by outer-automorphism generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub name: String,
    pub generators: Vec<OuterAutoWord>,
}

/// Nodes of an axis inside a ball, ordered along the line.
#[derive(Debug, Clone)]
pub struct AxisSegment {
    pub nodes: Vec<NodeId>,
    pub translation_length: u32,
}

/// The portion of the `A_i * A_j`-minimal subtree inside the ball: the orbit
/// of the geodesic joining the `A_i`- and `A_j`-stabilized vertices under
/// words over those two factors, grown by single letters.
pub fn minimal_subtree(
    sys: &FactorSystem,
    ball: &BassSerreBall,
    i: usize,
    j: usize,
) -> Result<BTreeSet<NodeId>, BallError> {
    let vi = ball
        .find_stabilized(i, &Word::empty())
        .ok_or(BallError::CentersMissing)?;
    let vj = ball
        .find_stabilized(j, &Word::empty())
        .ok_or(BallError::CentersMissing)?;
    let seg = ball.path(vi, vj).ok_or(BallError::CentersMissing)?;
    let mut set: BTreeSet<NodeId> = seg.into_iter().collect();
    let mut frontier: Vec<NodeId> = set.iter().copied().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &id in &frontier {
            for f in [i, j] {
                for e in sys.factor(f).nontrivial() {
                    if let Some(moved) = ball.act(sys, &Word::letter(f, e), id) {
                        if set.insert(moved) {
                            next.push(moved);
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(set)
}

/// Axis of a hyperbolic word inside the ball: the displacement minimizers,
/// trimmed to the certified core at depth `radius - length` where the
/// translates of every node stay inside the ball.
pub fn axis(sys: &FactorSystem, ball: &BassSerreBall, g: &Word) -> Result<AxisSegment, BallError> {
    let mut best: Option<u32> = None;
    let mut disp: Vec<Option<u32>> = vec![None; ball.len()];
    for id in 0..ball.len() as NodeId {
        if let Some(moved) = ball.act(sys, g, id) {
            let d = ball
                .path(id, moved)
                .map(|p| (p.len() - 1) as u32)
                .unwrap_or(u32::MAX);
            disp[id as usize] = Some(d);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    let ell = best.ok_or(BallError::BallTooSmall {
        what: "no node with certified displacement".into(),
    })?;
    if ell == 0 {
        return Err(BallError::Elliptic);
    }
    let members: BTreeSet<NodeId> = (0..ball.len() as NodeId)
        .filter(|&id| disp[id as usize] == Some(ell) && ball.node(id).depth + ell <= ball.radius)
        .collect();
    // Translation must stay inside the minimizer set for some core node;
    // otherwise the minimum was a boundary artifact.
    let translation_certified = members.iter().any(|&id| {
        ball.act(sys, g, id)
            .map(|m| disp[m as usize] == Some(ell))
            .unwrap_or(false)
    });
    if members.is_empty() || !translation_certified {
        return Err(BallError::BallTooSmall {
            what: "axis minimizers touch the ball boundary".into(),
        });
    }
    let degree = |v: NodeId| -> usize {
        ball.adj[v as usize]
            .iter()
            .filter(|u| members.contains(u))
            .count()
    };
    let mut start = *members.iter().next().unwrap();
    for &v in &members {
        if degree(v) <= 1 {
            start = v;
            break;
        }
    }
    let mut ordered = vec![start];
    let mut prev = None;
    loop {
        let cur = *ordered.last().unwrap();
        let next = ball.adj[cur as usize]
            .iter()
            .copied()
            .find(|u| members.contains(u) && Some(*u) != prev);
        match next {
            Some(u) => {
                prev = Some(cur);
                ordered.push(u);
            }
            None => break,
        }
    }
    Ok(AxisSegment {
        nodes: ordered,
        translation_length: ell,
    })
}

/// The ordered axis of `gamma = x_{i2} x_{i1}` through the factor vertices,
/// generated directly as the orbit of the segment `[v(A_{i1}), gamma v(A_{i1})]`:
/// the product of two elliptic letters translates along the geodesic joining
/// their fixed vertices. `span` counts translates on each side.
fn axis_nodes_direct(
    sys: &FactorSystem,
    tree: &CoveringTree,
    i1: usize,
    i2: usize,
    span: u32,
) -> Result<Vec<TreeNode>, BallError> {
    let v1 = tree.stabilized_node(i1, &Word::empty());
    let gamma = words::mul(sys, &Word::letter(i2, 1), &Word::letter(i1, 1));
    let gamma_inv = words::inv(sys, &gamma);
    let p0 = tree
        .path(&v1, &tree.act(&gamma, &v1), SEARCH_CAP)
        .ok_or(BallError::BallTooSmall {
            what: "axis base segment search exceeded cap".into(),
        })?;
    // Forward ray: v1 -> gamma v1 -> gamma^2 v1 ...
    let mut nodes: Vec<TreeNode> = p0.clone();
    let mut seg = p0.clone();
    for _ in 0..span {
        seg = seg.iter().map(|n| tree.act(&gamma, n)).collect();
        nodes.extend(seg.iter().skip(1).cloned());
    }
    // Backward ray.
    let mut back = Vec::new();
    let mut seg = p0;
    for _ in 0..span {
        seg = seg.iter().map(|n| tree.act(&gamma_inv, n)).collect();
        for n in seg.iter().rev().skip(1) {
            back.push(n.clone());
        }
    }
    back.reverse();
    back.extend(nodes);
    Ok(back)
}

fn max_conjugator_len(x: &GraphOfGroups) -> u32 {
    x.labels
        .iter()
        .filter_map(|l| l.conj().map(|w| w.len()))
        .max()
        .unwrap_or(0) as u32
}

/// The counting function: nontrivially stabilized vertices on the
/// `(i1,i2)`-axis strictly between the projection of the `A_k`-stabilized
/// vertex and the reference vertex stabilized by
/// `(x_{i2} x_{i1})^m A_{i2} (x_{i2} x_{i1})^{-m}`, with `x_i` the fixed
/// nontrivial element of index 1.
pub fn g_count(
    sys: &FactorSystem,
    x: &GraphOfGroups,
    k: usize,
    i1: usize,
    i2: usize,
    m: u32,
) -> Result<u32, BallError> {
    if k == i1 || k == i2 {
        return Err(BallError::BadReference {
            what: format!("k={k} must avoid the axis pair"),
        });
    }
    let tree = CoveringTree::new(sys, x);
    let span = m + 2 * max_conjugator_len(x) + 4;
    let axis = axis_nodes_direct(sys, &tree, i1, i2, span)?;
    let axis_set: HashSet<TreeNode> = axis.iter().cloned().collect();

    let gamma = words::mul(sys, &Word::letter(i2, 1), &Word::letter(i1, 1));
    let mut conj = Word::empty();
    for _ in 0..m {
        conj = words::mul(sys, &conj, &gamma);
    }
    let conj = crate::gog::normalize_conjugator(sys, i2, &conj);
    let reference = tree.stabilized_node(i2, &conj);
    let ref_idx = axis
        .iter()
        .position(|n| n == &reference)
        .ok_or(BallError::BadReference {
            what: "reference vertex not on the generated axis".into(),
        })?;

    let vk = tree.stabilized_node(k, &Word::empty());
    let (proj, _) = tree
        .nearest_of(&vk, &axis_set, SEARCH_CAP)
        .ok_or(BallError::BallTooSmall {
            what: "projection search exceeded cap".into(),
        })?;
    let proj_idx = axis.iter().position(|n| n == &proj).expect("on axis");

    let (lo, hi) = (proj_idx.min(ref_idx), proj_idx.max(ref_idx));
    if hi <= lo + 1 {
        return Ok(0);
    }
    let count = axis[lo + 1..hi]
        .iter()
        .filter(|n| {
            tree.stab(n)
                .map(|(f, c)| {
                    (f == i1 || f == i2)
                        && c.letters().iter().all(|l| l.factor == i1 || l.factor == i2)
                })
                .unwrap_or(false)
        })
        .count() as u32;
    Ok(count)
}

/// Grows the orbit region of the base segment of `A_i * A_j` inside the
/// covering tree: `rounds` closure rounds under single letters of the two
/// factors. The full minimal subtree is the union over all rounds.
fn grow_pair_region(
    sys: &FactorSystem,
    tree: &CoveringTree,
    i: usize,
    j: usize,
    rounds: u32,
) -> Result<(Vec<TreeNode>, HashSet<TreeNode>), BallError> {
    let vi = tree.stabilized_node(i, &Word::empty());
    let vj = tree.stabilized_node(j, &Word::empty());
    let seg = tree
        .path(&vi, &vj, SEARCH_CAP)
        .ok_or(BallError::BallTooSmall {
            what: "pair segment search exceeded cap".into(),
        })?;
    let mut set: HashSet<TreeNode> = seg.iter().cloned().collect();
    let mut frontier: Vec<TreeNode> = seg.clone();
    for _ in 0..rounds {
        let mut next = Vec::new();
        for n in &frontier {
            for f in [i, j] {
                for e in sys.factor(f).nontrivial() {
                    let moved = tree.act(&Word::letter(f, e), n);
                    if set.insert(moved.clone()) {
                        next.push(moved);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok((seg, set))
}

/// The fundamental-domain translate of `A_i * A_j` on its minimal subtree
/// containing `node`; ties resolved toward the base domain, then shortlex.
/// Returns `(domain conjugator, tie flag)`.
///
/// A node whose stabilizer meets `A_i * A_j` trivially (trivial or carried
/// by another factor) is interior to a unique translate, read off from the
/// flanking pair-stabilized vertices; an `A_i`- or `A_j`-conjugate vertex
/// lies in one translate per stabilizer element.
fn domain_of(
    sys: &FactorSystem,
    tree: &CoveringTree,
    region: &HashSet<TreeNode>,
    seg: &[TreeNode],
    i: usize,
    j: usize,
    node: &TreeNode,
) -> Result<(Word, bool), BallError> {
    // A domain corner is a translate of one of the two base vertices: an
    // i- or j-conjugate whose conjugator stays inside the acting pair. A
    // pair-factor vertex with letters from other factors in its conjugator
    // only passes through the subtree and is interior to a unique translate.
    let corner = |n: &TreeNode| -> Option<(usize, Word)> {
        tree.stab(n).filter(|(f, c)| {
            (*f == i || *f == j) && c.letters().iter().all(|l| l.factor == i || l.factor == j)
        })
    };
    let candidates: Vec<Word> = match corner(node) {
        Some((f, c)) => sys
            .factor(f)
            .elements()
            .map(|a| {
                let mut r = words::Reducer::new(sys);
                r.push_word(&c);
                r.push(f, a);
                r.finish()
            })
            .collect(),
        None => {
            // Interior node: walk inside the region to the flanking domain
            // corners on both sides.
            let mut flank: Vec<(usize, Word)> = Vec::new();
            for first in tree
                .neighbors(node)
                .into_iter()
                .filter(|u| region.contains(u))
            {
                let mut prev = node.clone();
                let mut cur = first;
                loop {
                    if let Some((f, c)) = corner(&cur) {
                        flank.push((f, c));
                        break;
                    }
                    let nxt = tree
                        .neighbors(&cur)
                        .into_iter()
                        .find(|u| *u != prev && region.contains(u));
                    match nxt {
                        Some(u) => {
                            prev = cur;
                            cur = u;
                        }
                        None => break,
                    }
                }
            }
            let ci = flank.iter().find(|(f, _)| *f == i).map(|(_, c)| c.clone());
            let cj = flank.iter().find(|(f, _)| *f == j).map(|(_, c)| c.clone());
            let (ci, cj) = match (ci, cj) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(BallError::BallTooSmall {
                        what: "pair-region flank truncated".into(),
                    })
                }
            };
            let mut found = Vec::new();
            for a in sys.factor(i).elements() {
                let h = {
                    let mut r = words::Reducer::new(sys);
                    r.push_word(&ci);
                    r.push(i, a);
                    r.finish()
                };
                for b in sys.factor(j).elements() {
                    let h2 = {
                        let mut r = words::Reducer::new(sys);
                        r.push_word(&cj);
                        r.push(j, b);
                        r.finish()
                    };
                    if h == h2 {
                        found.push(h.clone());
                        break;
                    }
                }
            }
            found
        }
    };
    if candidates.is_empty() {
        return Err(BallError::BadReference {
            what: "no fundamental domain contains the projection".into(),
        });
    }
    // Score candidates by distance from their domain to the base domain.
    let seg_set: HashSet<TreeNode> = seg.iter().cloned().collect();
    let score = |h: &Word| -> Option<u32> {
        let mut best: Option<u32> = None;
        for p in seg {
            let moved = tree.act(h, p);
            if let Some((_, d)) = tree.nearest_of(&moved, &seg_set, SEARCH_CAP) {
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    };
    let mut scored: Vec<(u32, Word)> = Vec::new();
    for h in candidates {
        if let Some(s) = score(&h) {
            scored.push((s, h));
        }
    }
    if scored.is_empty() {
        return Err(BallError::BallTooSmall {
            what: "candidate domain scoring failed".into(),
        });
    }
    scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let tie = scored.len() > 1 && scored[0].0 == scored[1].0;
    Ok((scored[0].1.clone(), tie))
}

/// Outcome of a retraction, with the tie-break flag from the domain choice.
#[derive(Debug, Clone)]
pub struct Retraction {
    pub result: GraphOfGroups,
    pub tie_broken: bool,
}

/// Retraction onto the subcomplex of markings whose conjugators live in
/// `A_i * A_j`: project every other factor vertex onto the pair-minimal
/// subtree, read off its fundamental domain `w_k`, and span the chosen
/// vertices `A_i, A_j, w_k^{-1} A_k w_k`.
pub fn retract_pair(
    sys: &FactorSystem,
    x: &GraphOfGroups,
    i: usize,
    j: usize,
) -> Result<Retraction, BallError> {
    let tree = CoveringTree::new(sys, x);
    let rounds = 4 * max_conjugator_len(x) + 2 * sys.n() as u32 + 8;
    let (seg, region) = grow_pair_region(sys, &tree, i, j, rounds)?;
    let mut tie_broken = false;

    let mut chosen: Vec<TreeNode> = Vec::with_capacity(sys.n());
    let mut new_labels: Vec<(usize, Word)> = Vec::with_capacity(sys.n());
    for k in 0..sys.n() {
        if k == i || k == j {
            chosen.push(tree.stabilized_node(k, &Word::empty()));
            new_labels.push((k, Word::empty()));
            continue;
        }
        let vk = tree.stabilized_node(k, &Word::empty());
        let (proj, _) =
            tree.nearest_of(&vk, &region, SEARCH_CAP)
                .ok_or(BallError::BallTooSmall {
                    what: "projection search exceeded cap".into(),
                })?;
        let (h, tie) = domain_of(sys, &tree, &region, &seg, i, j, &proj)?;
        tie_broken |= tie;
        let h_inv = words::inv(sys, &h);
        let conj = crate::gog::normalize_conjugator(sys, k, &h_inv);
        chosen.push(tree.stabilized_node(k, &conj));
        new_labels.push((k, conj));
    }

    let result = span_marking(sys, &tree, &chosen, &new_labels)?;
    Ok(Retraction { result, tie_broken })
}

/// Builds the marking whose underlying tree is the smallest subtree spanning
/// the chosen vertices, with degree-2 trivial vertices suppressed.
fn span_marking(
    sys: &FactorSystem,
    tree: &CoveringTree,
    chosen: &[TreeNode],
    labels: &[(usize, Word)],
) -> Result<GraphOfGroups, BallError> {
    let mut span: BTreeSet<TreeNode> = BTreeSet::new();
    for a in chosen {
        for b in chosen {
            if a < b {
                let p = tree.path(a, b, SEARCH_CAP).ok_or(BallError::BallTooSmall {
                    what: "span path search exceeded cap".into(),
                })?;
                span.extend(p);
            }
        }
    }
    let degree_in = |v: &TreeNode| -> usize {
        tree.neighbors(v)
            .iter()
            .filter(|u| span.contains(u))
            .count()
    };
    let keep: Vec<TreeNode> = span
        .iter()
        .filter(|v| chosen.contains(v) || degree_in(v) >= 3)
        .cloned()
        .collect();
    let id_of = |v: &TreeNode| keep.iter().position(|u| u == v).unwrap();
    let mut out_labels = vec![VertexLabel::Trivial; keep.len()];
    for (idx, (k, conj)) in labels.iter().enumerate() {
        out_labels[id_of(&chosen[idx])] = VertexLabel::peripheral(sys, *k, conj);
    }
    let mut edges = BTreeSet::new();
    for v in &keep {
        for first in tree.neighbors(v).into_iter().filter(|u| span.contains(u)) {
            let mut prev = v.clone();
            let mut cur = first;
            while !keep.contains(&cur) {
                let nxt = tree
                    .neighbors(&cur)
                    .into_iter()
                    .find(|u| *u != prev && span.contains(u));
                match nxt {
                    Some(u) => {
                        prev = cur;
                        cur = u;
                    }
                    None => break,
                }
            }
            if keep.contains(&cur) && &cur != v {
                let (a, b) = (id_of(v).min(id_of(&cur)), id_of(v).max(id_of(&cur)));
                edges.insert((a, b));
            }
        }
    }
    Ok(GraphOfGroups::new(out_labels, edges.into_iter().collect()))
}

/// Retraction onto the four-factor subcomplex: the bridge or overlap
/// midpoint of the two pair-minimal subtrees selects the `u` and `v`
/// domains; markings already inside are returned unchanged.
pub fn retract_m4(sys: &FactorSystem, x: &GraphOfGroups) -> Result<Retraction, BallError> {
    assert_eq!(sys.n(), 4, "the four-factor retraction needs n = 4");
    if classify(sys, x).contains(&Tag::M4) {
        return Ok(Retraction {
            result: x.clone(),
            tie_broken: false,
        });
    }
    let tree = CoveringTree::new(sys, x);
    let rounds = 4 * max_conjugator_len(x) + 16;
    let (seg12, t12) = grow_pair_region(sys, &tree, 0, 1, rounds)?;
    let (seg34, t34) = grow_pair_region(sys, &tree, 2, 3, rounds)?;
    let inter: Vec<TreeNode> = t12.intersection(&t34).cloned().collect();

    let (v12, v34) = if inter.is_empty() {
        // Bridge: BFS from one region to the other; the first hit is the
        // gate on the far side, its BFS root the gate on the near side.
        let mut parent: std::collections::HashMap<TreeNode, TreeNode> =
            t12.iter().map(|n| (n.clone(), n.clone())).collect();
        let mut frontier: Vec<TreeNode> = t12.iter().cloned().collect();
        let mut gate: Option<TreeNode> = None;
        'bfs: while !frontier.is_empty() {
            let mut next = Vec::new();
            for n in &frontier {
                for u in tree.neighbors(n) {
                    if parent.contains_key(&u) {
                        continue;
                    }
                    parent.insert(u.clone(), n.clone());
                    if t34.contains(&u) {
                        gate = Some(u);
                        break 'bfs;
                    }
                    next.push(u);
                }
            }
            frontier = next;
            if parent.len() > SEARCH_CAP {
                break;
            }
        }
        let far = gate.ok_or(BallError::BallTooSmall {
            what: "bridge between minimal subtrees not found".into(),
        })?;
        // Walk back to the t12 side.
        let mut near = far.clone();
        while !t12.contains(&near) {
            near = parent[&near].clone();
        }
        (near, far)
    } else {
        // The intersection is a segment; take its middle node (lower key of
        // the two middles when even).
        let inter_set: HashSet<TreeNode> = inter.iter().cloned().collect();
        let deg = |v: &TreeNode| {
            tree.neighbors(v)
                .iter()
                .filter(|u| inter_set.contains(u))
                .count()
        };
        let mut start = inter[0].clone();
        for v in &inter {
            if deg(v) <= 1 {
                start = v.clone();
                break;
            }
        }
        let mut ordered = vec![start];
        let mut prev: Option<TreeNode> = None;
        loop {
            let cur = ordered.last().unwrap().clone();
            match tree
                .neighbors(&cur)
                .into_iter()
                .find(|u| inter_set.contains(u) && Some(u) != prev.as_ref())
            {
                Some(u) => {
                    prev = Some(cur);
                    ordered.push(u);
                }
                None => break,
            }
        }
        let mid = if ordered.len() % 2 == 1 {
            ordered[ordered.len() / 2].clone()
        } else {
            let a = ordered[ordered.len() / 2 - 1].clone();
            let b = ordered[ordered.len() / 2].clone();
            if a <= b {
                a
            } else {
                b
            }
        };
        (mid.clone(), mid)
    };

    let (u, tie_u) = domain_of(sys, &tree, &t12, &seg12, 0, 1, &v12)?;
    let (v, tie_v) = domain_of(sys, &tree, &t34, &seg34, 2, 3, &v34)?;

    // Same underlying tree; the selected vertex groups replace the labels.
    let mut labels = x.labels.clone();
    for (idx, l) in x.labels.iter().enumerate() {
        if let VertexLabel::Peripheral { factor, .. } = l {
            let conj = if *factor < 2 { &u } else { &v };
            labels[idx] = VertexLabel::peripheral(sys, *factor, conj);
        }
    }
    Ok(Retraction {
        result: GraphOfGroups {
            labels,
            edges: x.edges.clone(),
        },
        tie_broken: tie_u || tie_v,
    })
}

/// One row of a distortion report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionRow {
    pub name: String,
    pub word: String,
    pub sub_length: usize,
    pub spine_distance: Option<u32>,
    pub g_lower_bound: Option<u32>,
    pub status: String,
}

/// The standard pair twist `f^{ij}`: the product over the other factors of
/// the two single-letter twists by element 1 of `A_i` and `A_j`.
pub fn pair_twist(sys: &FactorSystem, i: usize, j: usize) -> OuterAutoWord {
    let mut gens = Vec::new();
    for p in 0..sys.n() {
        if p == i || p == j {
            continue;
        }
        gens.push(AutoGen {
            factor: p,
            conj: Word::letter(i, 1),
            exponent: 1,
        });
        gens.push(AutoGen {
            factor: p,
            conj: Word::letter(j, 1),
            exponent: 1,
        });
    }
    OuterAutoWord { gens }
}

fn word_display(f: &OuterAutoWord) -> String {
    if f.gens.is_empty() {
        return "id".into();
    }
    f.gens
        .iter()
        .map(|g| {
            let w: Vec<String> = g
                .conj
                .letters()
                .iter()
                .map(|l| format!("a{}^{}", l.factor + 1, l.elem))
                .collect();
            let base = format!("f[A{}]^({})", g.factor + 1, w.join("."));
            if g.exponent < 0 {
                format!("{base}^-1")
            } else {
                base
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Distortion experiment: enumerate subgroup elements as products of at most
/// `max_len` generators, and report subgroup length against exact spine
/// distance, with the certified counting lower bound where applicable.
pub fn distortion_report(
    sys: &FactorSystem,
    sub: &SubgroupSpec,
    max_len: usize,
    cap: u32,
) -> Result<Vec<DistortionRow>, spine::SpineError> {
    let base = crate::gog::basepoint_star(sys);
    let mut reps: Vec<(OuterAutoWord, usize)> = vec![(OuterAutoWord::identity(), 0)];
    let mut frontier = vec![OuterAutoWord::identity()];
    for len in 1..=max_len {
        let mut next = Vec::new();
        for f in &frontier {
            for g in &sub.generators {
                for cand in [autos::compose(f, g), autos::compose(f, &autos::invert(g))] {
                    let mut known = false;
                    for (r, _) in &reps {
                        if autos::outer_equal(sys, &cand, r)? {
                            known = true;
                            break;
                        }
                    }
                    if !known {
                        reps.push((cand.clone(), len));
                        next.push(cand);
                    }
                }
            }
        }
        frontier = next;
    }

    let mut rows = Vec::new();
    for (f, len) in &reps {
        let image = autos::act_on_gog(sys, f, &base)?;
        let d = spine::spine_distance(sys, &base, &image, cap)?;
        let (dist, status) = match d {
            Distance::Exact(v) => (Some(v), "exact".to_string()),
            Distance::AboveCap => (None, "above-cap".to_string()),
        };
        let g_lb = pair_power_lower_bound(sys, f);
        rows.push(DistortionRow {
            name: sub.name.clone(),
            word: word_display(f),
            sub_length: *len,
            spine_distance: dist,
            g_lower_bound: g_lb,
            status,
        });
    }
    rows.sort_by(|a, b| a.sub_length.cmp(&b.sub_length).then(a.word.cmp(&b.word)));
    Ok(rows)
}

/// Certified lower bound `2 max(m,l)` when `f` is outer-equal to
/// `(f^{12})^m (f^{34})^l` for small exponents.
fn pair_power_lower_bound(sys: &FactorSystem, f: &OuterAutoWord) -> Option<u32> {
    if sys.n() < 4 {
        return None;
    }
    let f12 = pair_twist(sys, 0, 1);
    let f34 = pair_twist(sys, 2, 3);
    for m in 0..=3i32 {
        for l in 0..=3i32 {
            let cand = autos::compose(&autos::power(&f12, m), &autos::power(&f34, l));
            if autos::outer_equal(sys, f, &cand).ok()? {
                return Some(2 * (m.max(l)) as u32);
            }
        }
    }
    None
}
