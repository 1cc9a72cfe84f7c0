//! Canonical forms for markings.
//!
//! Two markings are equivalent iff their Bass-Serre trees are equivariantly
//! homeomorphic. After conjugating all labels so the factor-1 vertex carries
//! exactly `A_1` (that vertex is unique: `w A_1 w^{-1} = A_1` forces `w` into
//! `A_1` in a free product), the remaining freedom is the choice of
//! fundamental domain through the anchored vertex. Those choices are
//! enumerated as one twist element per branch at every peripheral vertex,
//! with conjugations accumulated along root-to-vertex paths. Each choice is
//! serialized as a rooted labeled tree; the lexicographic minimum is the
//! canonical form.

use super::{validate, GogError, GraphOfGroups, VertexLabel};
use crate::groups::{Elem, FactorSystem};
use crate::words::{self, Word};
use serde::{Deserialize, Serialize};

/// Canonical byte encoding of a marking's equivalence class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalKey(pub Vec<u8>);

impl CanonicalKey {
    /// Short hex digest for display purposes.
    pub fn digest(&self) -> String {
        // FNV-1a, enough for display keys in dumps.
        let mut h: u64 = 0xcbf29ce484222325;
        for &b in &self.0 {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

/// A canonical equivalence class of markings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpineVertex {
    pub key: CanonicalKey,
    pub rep: GraphOfGroups,
}

fn label_bytes(label: &VertexLabel) -> Vec<u8> {
    match label {
        VertexLabel::Trivial => vec![0u8],
        VertexLabel::Peripheral { factor, conj } => {
            let mut out = vec![1u8, (*factor + 1) as u8, conj.len() as u8];
            for l in conj.letters() {
                out.push((l.factor + 1) as u8);
                out.push(l.elem as u8);
            }
            out
        }
    }
}

struct Rooted {
    children: Vec<Vec<usize>>,
    order: Vec<usize>, // BFS order from the root
}

fn root_tree(x: &GraphOfGroups, root: usize) -> Rooted {
    let nv = x.n_vertices();
    let mut children = vec![Vec::new(); nv];
    let mut seen = vec![false; nv];
    let mut order = vec![root];
    seen[root] = true;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        let mut ns = x.neighbors(v);
        ns.sort();
        for u in ns {
            if !seen[u] {
                seen[u] = true;
                children[v].push(u);
                order.push(u);
            }
        }
    }
    Rooted { children, order }
}

/// All fundamental-domain presentations of `x` anchored at the factor
/// `anchor` vertex (whose label becomes exactly that factor group), as label
/// vectors in `x`'s vertex indexing.
pub(crate) fn anchored_presentations(
    sys: &FactorSystem,
    x: &GraphOfGroups,
    anchor: usize,
) -> Vec<Vec<VertexLabel>> {
    let root = x.factor_vertex(anchor).expect("anchor factor present");
    let w_anchor = x.labels[root].conj().cloned().unwrap_or_default();
    let w_inv = words::inv(sys, &w_anchor);
    // Step 1: global conjugation so the anchor label is exact.
    let base: Vec<VertexLabel> = x
        .labels
        .iter()
        .map(|l| match l {
            VertexLabel::Trivial => VertexLabel::Trivial,
            VertexLabel::Peripheral { factor, conj } => {
                VertexLabel::peripheral(sys, *factor, &words::mul(sys, &w_inv, conj))
            }
        })
        .collect();

    let rooted = root_tree(x, root);
    // Twist slots: one per (peripheral vertex, child branch).
    let mut slots: Vec<(usize, usize, usize)> = Vec::new(); // (vertex, child, group order)
    for &v in &rooted.order {
        if let Some(k) = base[v].factor() {
            for &c in &rooted.children[v] {
                slots.push((v, c, sys.factor(k).order()));
            }
        }
    }

    let mut out = Vec::new();
    let mut tuple = vec![0 as Elem; slots.len()];
    loop {
        // Accumulate conjugations from the root down.
        let mut acc: Vec<Word> = vec![Word::empty(); x.n_vertices()];
        let mut labels = base.clone();
        for &v in &rooted.order {
            if let VertexLabel::Peripheral { factor, conj } = &base[v] {
                let new_conj = words::mul(sys, &acc[v], conj);
                labels[v] = VertexLabel::peripheral(sys, *factor, &new_conj);
            }
            for &c in &rooted.children[v] {
                let twist = slots
                    .iter()
                    .position(|&(sv, sc, _)| sv == v && sc == c)
                    .map(|i| tuple[i])
                    .unwrap_or(0);
                acc[c] = if twist == 0 {
                    acc[v].clone()
                } else {
                    // tau = (acc_v-independent) conjugate of the twist by the
                    // original subgroup conjugator of v.
                    let k = base[v].factor().unwrap();
                    let w_v = base[v].conj().unwrap();
                    let mut r = words::Reducer::new(sys);
                    r.push_word(&acc[v]);
                    r.push_word(w_v);
                    r.push(k, twist);
                    r.push_inverse(w_v);
                    r.finish()
                };
            }
        }
        out.push(labels);

        let mut i = 0;
        loop {
            if i == tuple.len() {
                break;
            }
            tuple[i] += 1;
            if (tuple[i] as usize) < slots[i].2 {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
        if tuple.is_empty() || i == tuple.len() {
            break;
        }
    }
    out
}

fn encode_presentation(
    labels: &[VertexLabel],
    rooted: &Rooted,
    root: usize,
) -> (Vec<u8>, Vec<Vec<u8>>) {
    let nv = labels.len();
    let mut enc: Vec<Vec<u8>> = vec![Vec::new(); nv];
    // Children before parents in reverse BFS order.
    for &v in rooted.order.iter().rev() {
        let mut child_encs: Vec<&Vec<u8>> = rooted.children[v].iter().map(|&c| &enc[c]).collect();
        child_encs.sort();
        let mut bytes = label_bytes(&labels[v]);
        bytes.push(0x02);
        for ce in child_encs {
            bytes.extend_from_slice(ce);
        }
        bytes.push(0x03);
        enc[v] = bytes;
    }
    (enc[root].clone(), enc)
}

/// Canonical form of a marking. Keys are equal iff the markings are
/// equivalent points of the deformation space.
pub fn canonical_form(sys: &FactorSystem, x: &GraphOfGroups) -> Result<SpineVertex, GogError> {
    validate(sys, x).map_err(|mut v| v.remove(0))?;
    let root = x.factor_vertex(0).expect("validated marking has factor 1");
    let rooted = root_tree(x, root);
    type Best = (Vec<u8>, Vec<VertexLabel>, Vec<Vec<u8>>);
    let mut best: Option<Best> = None;
    for labels in anchored_presentations(sys, x, 0) {
        let (code, enc) = encode_presentation(&labels, &rooted, root);
        if best.as_ref().map(|(b, _, _)| code < *b).unwrap_or(true) {
            best = Some((code, labels, enc));
        }
    }
    let (code, labels, enc) = best.expect("at least one presentation");

    // Rebuild the representative with vertices renumbered in canonical
    // (preorder, children sorted by encoding) order.
    let mut new_labels = Vec::with_capacity(labels.len());
    let mut new_edges = Vec::new();
    let mut stack = vec![(root, usize::MAX)];
    while let Some((v, parent_new)) = stack.pop() {
        let id = new_labels.len();
        new_labels.push(labels[v].clone());
        if parent_new != usize::MAX {
            new_edges.push((parent_new, id));
        }
        let mut kids: Vec<usize> = rooted.children[v].clone();
        kids.sort_by(|&a, &b| enc[a].cmp(&enc[b]).then(a.cmp(&b)));
        // Reverse so the stack pops them in sorted order.
        for &c in kids.iter().rev() {
            stack.push((c, id));
        }
    }
    let rep = GraphOfGroups::new(new_labels, new_edges);
    debug_assert!(validate(sys, &rep).is_ok());

    let mut key = Vec::with_capacity(code.len() + sys.n() + 1);
    key.push(sys.n() as u8);
    for k in 0..sys.n() {
        key.push(sys.factor(k).order() as u8);
    }
    key.extend_from_slice(&code);
    Ok(SpineVertex {
        key: CanonicalKey(key),
        rep,
    })
}

/// Equivalence of markings over the same factor system.
pub fn equivalent(
    sys: &FactorSystem,
    x1: &GraphOfGroups,
    x2: &GraphOfGroups,
) -> Result<bool, GogError> {
    Ok(canonical_form(sys, x1)?.key == canonical_form(sys, x2)?.key)
}

/// Presentations of `x` anchored at `anchor`, exposed for subcomplex
/// classification.
pub fn presentations_anchored_at(
    sys: &FactorSystem,
    x: &GraphOfGroups,
    anchor: usize,
) -> Vec<Vec<VertexLabel>> {
    anchored_presentations(sys, x, anchor)
}

/// Re-presents a marking without changing its equivalence class: global
/// conjugation of every label by `g`.
pub fn conjugate_marking(sys: &FactorSystem, x: &GraphOfGroups, g: &Word) -> GraphOfGroups {
    let labels = x
        .labels
        .iter()
        .map(|l| match l {
            VertexLabel::Trivial => VertexLabel::Trivial,
            VertexLabel::Peripheral { factor, conj } => {
                VertexLabel::peripheral(sys, *factor, &words::mul(sys, g, conj))
            }
        })
        .collect();
    GraphOfGroups {
        labels,
        edges: x.edges.clone(),
    }
}

/// Re-presents a marking by one fundamental-domain twist: every label in the
/// branch behind `edge` (seen from `vertex`, which must be peripheral) is
/// conjugated by the image of `twist` under the vertex group.
pub fn twist_marking(
    sys: &FactorSystem,
    x: &GraphOfGroups,
    vertex: usize,
    edge: usize,
    twist: Elem,
) -> Option<GraphOfGroups> {
    let (factor, conj) = match &x.labels[vertex] {
        VertexLabel::Peripheral { factor, conj } => (*factor, conj.clone()),
        VertexLabel::Trivial => return None,
    };
    let (a, b) = *x.edges.get(edge)?;
    let other = if a == vertex {
        b
    } else if b == vertex {
        a
    } else {
        return None;
    };
    if twist as usize >= sys.factor(factor).order() {
        return None;
    }
    let mut labels = x.labels.clone();
    if twist != 0 {
        let mut r = words::Reducer::new(sys);
        r.push_word(&conj);
        r.push(factor, twist);
        r.push_inverse(&conj);
        let tau = r.finish();
        for u in x.branch_from(vertex, other) {
            if let VertexLabel::Peripheral { factor: fu, conj: cu } = &labels[u] {
                labels[u] = VertexLabel::peripheral(sys, *fu, &words::mul(sys, &tau, cu));
            }
        }
    }
    Some(GraphOfGroups {
        labels,
        edges: x.edges.clone(),
    })
}

/// Permutes vertex ids; a pure relabeling of the same marking.
pub fn relabel_marking(x: &GraphOfGroups, perm: &[usize]) -> GraphOfGroups {
    let mut labels = vec![VertexLabel::Trivial; x.n_vertices()];
    for (v, l) in x.labels.iter().enumerate() {
        labels[perm[v]] = l.clone();
    }
    let edges = x.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
    GraphOfGroups::new(labels, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gog::basepoint_star;
    use crate::groups::{cyclic, FactorSystem};

    fn sys_n(n: usize) -> FactorSystem {
        FactorSystem::new((0..n).map(|_| cyclic(2).unwrap()).collect()).unwrap()
    }

    fn star_with(sys: &FactorSystem, conjs: &[Word]) -> GraphOfGroups {
        let mut x = basepoint_star(sys);
        for (k, c) in conjs.iter().enumerate() {
            let v = x.factor_vertex(k).unwrap();
            x.labels[v] = VertexLabel::peripheral(sys, k, c);
        }
        x
    }

    #[test]
    fn n2_segment_is_a_point() {
        let sys = sys_n(2);
        let plain = basepoint_star(&sys);
        let conj = star_with(&sys, &[Word::empty(), Word::letter(0, 1)]);
        assert!(equivalent(&sys, &plain, &conj).unwrap());
    }

    #[test]
    fn anchor_twist_reaches_uniform_conjugates() {
        let sys = sys_n(3);
        let a1 = Word::letter(0, 1);
        let plain = basepoint_star(&sys);
        let twisted = star_with(&sys, &[Word::empty(), a1.clone(), a1.clone()]);
        assert!(equivalent(&sys, &plain, &twisted).unwrap());
        // But a single conjugated leaf is a different point.
        let single = star_with(&sys, &[Word::empty(), Word::empty(), Word::letter(1, 1)]);
        assert!(!equivalent(&sys, &plain, &single).unwrap());
    }

    #[test]
    fn invariant_under_relabeling_and_representation_changes() {
        let sys = sys_n(4);
        let x = star_with(
            &sys,
            &[
                Word::empty(),
                Word::letter(0, 1),
                crate::words::mul(&sys, &Word::letter(0, 1), &Word::letter(1, 1)),
                Word::empty(),
            ],
        );
        let key = canonical_form(&sys, &x).unwrap().key;

        let perm = vec![4usize, 2, 0, 3, 1];
        let relabeled = relabel_marking(&x, &perm);
        assert_eq!(canonical_form(&sys, &relabeled).unwrap().key, key);

        let conjugated = conjugate_marking(&sys, &x, &Word::letter(1, 1));
        assert_eq!(canonical_form(&sys, &conjugated).unwrap().key, key);

        let center = x.factor_vertex(1).unwrap();
        let e = x.incident_edges(center)[0];
        let twisted = twist_marking(&sys, &x, center, e, 1).unwrap();
        assert_eq!(canonical_form(&sys, &twisted).unwrap().key, key);
    }

    #[test]
    fn canonical_rep_is_idempotent() {
        let sys = sys_n(4);
        let x = star_with(
            &sys,
            &[
                Word::empty(),
                Word::empty(),
                Word::letter(0, 1),
                Word::letter(0, 1),
            ],
        );
        let sv = canonical_form(&sys, &x).unwrap();
        let again = canonical_form(&sys, &sv.rep).unwrap();
        assert_eq!(again.key, sv.key);
        assert_eq!(again.rep, sv.rep);
    }
}
