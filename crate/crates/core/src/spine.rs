//! Exploration of the spine as a graph: BFS balls, distances, subcomplex
//! classification, constructive paths and automorphism recovery.
//!
//! Spine vertices are canonical equivalence classes of markings; two classes
//! are adjacent when a representative of one is an admissible multi-edge
//! collapse of a representative of the other.

use crate::autos::{self, AutoGen, OuterAutoWord};
use crate::gog::{
    self, canonical::presentations_anchored_at, canonical_form, collapse, enumerate_collapses,
    enumerate_expansions, equivalent, CanonicalKey, GogError, GraphOfGroups, SpineVertex,
    VertexLabel,
};
use crate::groups::{Elem, FactorSystem};
use crate::words::{self, Word};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpineError {
    #[error("marking is not of type X")]
    NotTypeX,
    #[error("a witness automorphism is required")]
    WitnessRequired,
    #[error("basepoint must carry the plain factor labels")]
    BadBasepoint,
    #[error("no path found within the search bound")]
    PathNotFound,
    #[error(transparent)]
    Gog(#[from] GogError),
    #[error("automorphism error: {0}")]
    Auto(String),
}

impl From<autos::AutoError> for SpineError {
    fn from(e: autos::AutoError) -> Self {
        SpineError::Auto(e.to_string())
    }
}

/// How an edge of the spine is realized: the representative of `upper`
/// collapses by `edge_set` to a marking equivalent to the other endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeProvenance {
    pub upper: CanonicalKey,
    pub edge_set: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpineBall {
    pub base: CanonicalKey,
    pub radius: u32,
    pub vertices: BTreeMap<CanonicalKey, SpineVertex>,
    pub depth: BTreeMap<CanonicalKey, u32>,
    pub edges: BTreeMap<(CanonicalKey, CanonicalKey), EdgeProvenance>,
    pub truncated: bool,
}

impl SpineBall {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
}

/// All spine neighbors of (the class of) `rep`, with provenance, keyed by
/// canonical form.
pub fn neighbors(
    sys: &FactorSystem,
    rep: &GraphOfGroups,
) -> Result<BTreeMap<CanonicalKey, (SpineVertex, EdgeProvenance)>, GogError> {
    let me = canonical_form(sys, rep)?;
    let mut out: BTreeMap<CanonicalKey, (SpineVertex, EdgeProvenance)> = BTreeMap::new();

    // Downward: admissible collapses of this representative.
    for (edge_set, y) in enumerate_collapses(sys, rep) {
        let sv = canonical_form(sys, &y)?;
        if sv.key == me.key {
            continue;
        }
        out.entry(sv.key.clone()).or_insert((
            sv,
            EdgeProvenance {
                upper: me.key.clone(),
                edge_set,
            },
        ));
    }

    // Upward: iterate one-edge expansions, keeping markings that collapse
    // directly back to this class. Intermediates of any multi-edge expansion
    // are themselves neighbors, so this closure is complete.
    let mut seen: HashSet<CanonicalKey> = HashSet::new();
    seen.insert(me.key.clone());
    let mut level: Vec<GraphOfGroups> = vec![rep.clone()];
    while !level.is_empty() {
        let mut next = Vec::new();
        for z in &level {
            let exps = match enumerate_expansions(sys, z) {
                Ok(e) => e,
                Err(GogError::MaxEdgesReached) => continue,
                Err(e) => return Err(e),
            };
            for exp in exps {
                let sv = canonical_form(sys, &exp.result)?;
                if seen.contains(&sv.key) {
                    continue;
                }
                let back = enumerate_collapses(sys, &sv.rep)
                    .into_iter()
                    .find_map(|(es, c)| {
                        canonical_form(sys, &c)
                            .ok()
                            .filter(|csv| csv.key == me.key)
                            .map(|_| es)
                    });
                if let Some(edge_set) = back {
                    seen.insert(sv.key.clone());
                    next.push(sv.rep.clone());
                    out.entry(sv.key.clone()).or_insert((
                        sv.clone(),
                        EdgeProvenance {
                            upper: sv.key.clone(),
                            edge_set,
                        },
                    ));
                }
            }
        }
        level = next;
    }
    Ok(out)
}

/// True iff the two classes are one collapse move apart.
pub fn is_adjacent(
    sys: &FactorSystem,
    a: &GraphOfGroups,
    b: &GraphOfGroups,
) -> Result<bool, GogError> {
    let ka = canonical_form(sys, a)?.key;
    let kb = canonical_form(sys, b)?.key;
    if ka == kb {
        return Ok(false);
    }
    for (_, y) in enumerate_collapses(sys, a) {
        if canonical_form(sys, &y)?.key == kb {
            return Ok(true);
        }
    }
    for (_, y) in enumerate_collapses(sys, b) {
        if canonical_form(sys, &y)?.key == ka {
            return Ok(true);
        }
    }
    Ok(false)
}

/// BFS ball of the spine around `base`. If `max_vertices` is hit, the
/// partial ball is returned with the truncation flag set.
pub fn explore(
    sys: &FactorSystem,
    base: &GraphOfGroups,
    radius: u32,
    max_vertices: usize,
) -> Result<SpineBall, GogError> {
    let base_sv = canonical_form(sys, base)?;
    let mut ball = SpineBall {
        base: base_sv.key.clone(),
        radius,
        vertices: BTreeMap::new(),
        depth: BTreeMap::new(),
        edges: BTreeMap::new(),
        truncated: false,
    };
    ball.vertices.insert(base_sv.key.clone(), base_sv.clone());
    ball.depth.insert(base_sv.key.clone(), 0);
    let mut queue: VecDeque<CanonicalKey> = VecDeque::new();
    queue.push_back(base_sv.key.clone());
    while let Some(key) = queue.pop_front() {
        let d = ball.depth[&key];
        let rep = ball.vertices[&key].rep.clone();
        let nbrs = neighbors(sys, &rep)?;
        for (nkey, (nsv, prov)) in nbrs {
            if !ball.vertices.contains_key(&nkey) {
                if d < radius {
                    if ball.vertices.len() >= max_vertices {
                        ball.truncated = true;
                        continue;
                    }
                    ball.vertices.insert(nkey.clone(), nsv);
                    ball.depth.insert(nkey.clone(), d + 1);
                    queue.push_back(nkey.clone());
                } else {
                    continue;
                }
            }
            let pair = if key < nkey {
                (key.clone(), nkey.clone())
            } else {
                (nkey.clone(), key.clone())
            };
            ball.edges.entry(pair).or_insert(prov);
        }
    }
    Ok(ball)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distance {
    Exact(u32),
    AboveCap,
}

/// Exact spine distance via bidirectional BFS, or `AboveCap`.
pub fn spine_distance(
    sys: &FactorSystem,
    a: &GraphOfGroups,
    b: &GraphOfGroups,
    cap: u32,
) -> Result<Distance, GogError> {
    let sa = canonical_form(sys, a)?;
    let sb = canonical_form(sys, b)?;
    if sa.key == sb.key {
        return Ok(Distance::Exact(0));
    }
    let mut da: HashMap<CanonicalKey, u32> = HashMap::new();
    let mut db: HashMap<CanonicalKey, u32> = HashMap::new();
    let mut fa: Vec<SpineVertex> = vec![sa.clone()];
    let mut fb: Vec<SpineVertex> = vec![sb.clone()];
    da.insert(sa.key.clone(), 0);
    db.insert(sb.key.clone(), 0);
    let (mut ra, mut rb) = (0u32, 0u32);
    loop {
        if ra + rb >= cap || (fa.is_empty() && fb.is_empty()) {
            return Ok(Distance::AboveCap);
        }
        // Expand the smaller frontier.
        let expand_a = !fa.is_empty() && (fa.len() <= fb.len() || fb.is_empty());
        let (front, dist_mine, dist_other, r) = if expand_a {
            ra += 1;
            (&mut fa, &mut da, &db, ra)
        } else {
            rb += 1;
            (&mut fb, &mut db, &da, rb)
        };
        let mut next = Vec::new();
        let mut best: Option<u32> = None;
        for sv in front.drain(..) {
            for (nkey, (nsv, _)) in neighbors(sys, &sv.rep)? {
                if let Some(&od) = dist_other.get(&nkey) {
                    let total = r + od;
                    best = Some(best.map_or(total, |b: u32| b.min(total)));
                }
                if !dist_mine.contains_key(&nkey) {
                    dist_mine.insert(nkey.clone(), r);
                    next.push(nsv);
                }
            }
        }
        if let Some(t) = best {
            return Ok(if t <= cap {
                Distance::Exact(t)
            } else {
                Distance::AboveCap
            });
        }
        *front = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    TypeX,
    TypeY,
    /// 0-based factor pair, i < j.
    Kij(usize, usize),
    M4,
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tag::TypeX => write!(f, "X"),
            Tag::TypeY => write!(f, "Y"),
            Tag::Kij(i, j) => write!(f, "K{}{}", i + 1, j + 1),
            Tag::M4 => write!(f, "M4"),
        }
    }
}

fn is_type_x(sys: &FactorSystem, x: &GraphOfGroups) -> bool {
    let n = sys.n();
    if n == 2 {
        return x.n_vertices() == 2;
    }
    x.n_vertices() == n + 1
        && (0..x.n_vertices()).all(|v| match &x.labels[v] {
            VertexLabel::Trivial => x.degree(v) == n,
            VertexLabel::Peripheral { .. } => x.degree(v) == 1,
        })
}

fn is_type_y(sys: &FactorSystem, x: &GraphOfGroups) -> bool {
    let n = sys.n();
    if x.n_vertices() != n {
        return false;
    }
    let mut center = 0;
    for v in 0..n {
        if x.labels[v].is_trivial() {
            return false;
        }
        match x.degree(v) {
            1 => {}
            d if d == n - 1 => center += 1,
            _ => return false,
        }
    }
    // n = 2 degenerates: both vertices have degree 1 = n-1.
    center >= 1
}

fn word_over(w: &Word, allowed: &[usize]) -> bool {
    w.letters().iter().all(|l| allowed.contains(&l.factor))
}

fn is_kij(sys: &FactorSystem, x: &GraphOfGroups, i: usize, j: usize) -> bool {
    for labels in presentations_anchored_at(sys, x, i) {
        let mut ok = true;
        for l in &labels {
            match l {
                VertexLabel::Trivial => {}
                VertexLabel::Peripheral { factor, conj } => {
                    if *factor == i || *factor == j {
                        if !conj.is_empty() {
                            ok = false;
                            break;
                        }
                    } else if !word_over(conj, &[i, j]) {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok {
            return true;
        }
    }
    false
}

fn is_m4(sys: &FactorSystem, x: &GraphOfGroups) -> bool {
    // Looking for labels {uA1u^-1, uA2u^-1, vA3v^-1, vA4v^-1} with u over
    // factors {1,2} and v over {3,4}. Conjugating by u^-1 anchors factor 1
    // exactly and turns factor 2 exact as well, with a common conjugator
    // z = u^-1 v forming a {1,2}-prefix followed by a {3,4}-suffix.
    for labels in presentations_anchored_at(sys, x, 0) {
        let conj_of = |k: usize| -> Option<&Word> {
            labels.iter().find_map(|l| match l {
                VertexLabel::Peripheral { factor, conj } if *factor == k => Some(conj),
                _ => None,
            })
        };
        let (c1, c2, c3) = match (conj_of(1), conj_of(2), conj_of(3)) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => continue,
        };
        if !c1.is_empty() {
            continue;
        }
        // Common z: z normalizes to c2 for factor 2 and to c3 for factor 3.
        let mut candidates: Vec<Word> = vec![c2.clone()];
        for a in sys.factor(2).nontrivial() {
            candidates.push(words::mul(sys, c2, &Word::letter(2, a)));
        }
        for z in candidates {
            if &gog::normalize_conjugator(sys, 3, &z) != c3 {
                continue;
            }
            // Pattern: {0,1}-letters then {2,3}-letters.
            let letters = z.letters();
            let split = letters
                .iter()
                .position(|l| l.factor >= 2)
                .unwrap_or(letters.len());
            if letters[..split].iter().all(|l| l.factor < 2)
                && letters[split..].iter().all(|l| l.factor >= 2)
            {
                return true;
            }
        }
    }
    false
}

/// Subcomplex tags of a marking.
pub fn classify(sys: &FactorSystem, x: &GraphOfGroups) -> BTreeSet<Tag> {
    let mut tags = BTreeSet::new();
    if is_type_x(sys, x) {
        tags.insert(Tag::TypeX);
    }
    if is_type_y(sys, x) {
        tags.insert(Tag::TypeY);
    }
    let n = sys.n();
    for i in 0..n {
        for j in i + 1..n {
            if is_kij(sys, x, i, j) {
                tags.insert(Tag::Kij(i, j));
            }
        }
    }
    if n == 4 && is_m4(sys, x) {
        tags.insert(Tag::M4);
    }
    tags
}

/// Connects two type-X markings inside the X/Y subcomplex by bidirectional
/// BFS restricted to X- and Y-classified vertices. The witness automorphism
/// certifies the precondition that the endpoints lie in the same orbit.
pub fn xy_path(
    sys: &FactorSystem,
    s: &GraphOfGroups,
    s_prime: &GraphOfGroups,
    witness: Option<&OuterAutoWord>,
) -> Result<Vec<SpineVertex>, SpineError> {
    let w = witness.ok_or(SpineError::WitnessRequired)?;
    if !classify(sys, s).contains(&Tag::TypeX) || !classify(sys, s_prime).contains(&Tag::TypeX) {
        return Err(SpineError::NotTypeX);
    }
    let image = autos::act_on_gog(sys, w, s)?;
    if !equivalent(sys, &image, s_prime)? {
        return Err(SpineError::BadBasepoint);
    }
    let gen_len = autos::to_standard_generators(sys, w).len() as u32;
    let bound = 4 * gen_len + 8;
    restricted_path(sys, s, s_prime, bound)
}

fn xy_filter(sys: &FactorSystem, x: &GraphOfGroups) -> bool {
    is_type_x(sys, x) || is_type_y(sys, x)
}

fn restricted_path(
    sys: &FactorSystem,
    a: &GraphOfGroups,
    b: &GraphOfGroups,
    cap: u32,
) -> Result<Vec<SpineVertex>, SpineError> {
    let sa = canonical_form(sys, a)?;
    let sb = canonical_form(sys, b)?;
    if sa.key == sb.key {
        return Ok(vec![sa]);
    }
    // parent maps for both searches
    let mut pa: HashMap<CanonicalKey, Option<CanonicalKey>> = HashMap::new();
    let mut pb: HashMap<CanonicalKey, Option<CanonicalKey>> = HashMap::new();
    let mut reps: HashMap<CanonicalKey, SpineVertex> = HashMap::new();
    pa.insert(sa.key.clone(), None);
    pb.insert(sb.key.clone(), None);
    reps.insert(sa.key.clone(), sa.clone());
    reps.insert(sb.key.clone(), sb.clone());
    let mut fa = vec![sa.key.clone()];
    let mut fb = vec![sb.key.clone()];
    let mut steps = 0u32;
    let meet: CanonicalKey = 'search: loop {
        if steps >= cap || (fa.is_empty() && fb.is_empty()) {
            return Err(SpineError::PathNotFound);
        }
        steps += 1;
        let expand_a = !fa.is_empty() && (fa.len() <= fb.len() || fb.is_empty());
        let (front, mine, other) = if expand_a {
            (&mut fa, &mut pa, &pb)
        } else {
            (&mut fb, &mut pb, &pa)
        };
        let mut next = Vec::new();
        for key in front.drain(..) {
            let rep = reps[&key].rep.clone();
            for (nkey, (nsv, _)) in neighbors(sys, &rep)? {
                if !xy_filter(sys, &nsv.rep) {
                    continue;
                }
                if mine.contains_key(&nkey) {
                    continue;
                }
                mine.insert(nkey.clone(), Some(key.clone()));
                reps.insert(nkey.clone(), nsv);
                if other.contains_key(&nkey) {
                    break 'search nkey;
                }
                next.push(nkey);
            }
        }
        if expand_a {
            fa = next;
        } else {
            fb = next;
        }
    };
    // Stitch the two parent chains.
    let mut left = Vec::new();
    let mut cur = Some(meet.clone());
    while let Some(k) = cur {
        left.push(k.clone());
        cur = pa[&k].clone();
    }
    left.reverse();
    let mut cur = pb[&meet].clone();
    while let Some(k) = cur {
        left.push(k.clone());
        cur = pb[&k].clone();
    }
    Ok(left.into_iter().map(|k| reps[&k].clone()).collect())
}

/// Recovers the outer automorphism carrying the basepoint star to a type-X
/// marking at spine distance 2, by scanning the intermediate type-Y vertices.
pub fn recover_automorphism(
    sys: &FactorSystem,
    s: &GraphOfGroups,
    s_prime: &GraphOfGroups,
) -> Result<Option<OuterAutoWord>, SpineError> {
    if !is_type_x(sys, s) || !is_type_x(sys, s_prime) {
        return Err(SpineError::NotTypeX);
    }
    // The basepoint must carry the plain factor labels.
    for l in &s.labels {
        if let VertexLabel::Peripheral { conj, .. } = l {
            if !conj.is_empty() {
                return Err(SpineError::BadBasepoint);
            }
        }
    }
    if equivalent(sys, s, s_prime)? {
        return Ok(Some(OuterAutoWord::identity()));
    }
    for i in 0..sys.n() {
        let vi = s.factor_vertex(i).unwrap();
        let edges_at = s.incident_edges(vi);
        let y = match collapse(sys, s, &edges_at) {
            Ok(y) => y,
            Err(_) => continue,
        };
        let exps = match enumerate_expansions(sys, &y) {
            Ok(e) => e,
            Err(_) => continue,
        };
        for exp in exps {
            if !equivalent(sys, &exp.result, s_prime)? {
                continue;
            }
            // Read the twist per branch: the branch behind edge e leads to
            // the factor-k leaf of Y_i.
            let mut gens = Vec::new();
            let center = y.factor_vertex(i).unwrap();
            for (&e, &t) in &exp.spec.twists {
                if t == 0 {
                    continue;
                }
                let (a, b) = y.edges[e];
                let leaf = if a == center { b } else { a };
                let k = match y.labels[leaf].factor() {
                    Some(k) => k,
                    None => continue,
                };
                // act by gen(k, [t^{-1}]) puts conjugator t on factor k.
                let t_inv = sys.factor(i).inv(t);
                gens.push(AutoGen {
                    factor: k,
                    conj: Word::letter(i, t_inv),
                    exponent: 1,
                });
            }
            let phi = OuterAutoWord { gens };
            let image = autos::act_on_gog(sys, &phi, s)?;
            if equivalent(sys, &image, s_prime)? {
                return Ok(Some(phi));
            }
        }
    }
    Ok(None)
}

/// All products of at most `maxlen` generators (and inverses) fixing the
/// class of `rep`, deduplicated by outer equality.
pub fn stabilizer_sample(
    sys: &FactorSystem,
    rep: &GraphOfGroups,
    gens: &[OuterAutoWord],
    maxlen: usize,
) -> Result<Vec<OuterAutoWord>, SpineError> {
    let mut alphabet: Vec<OuterAutoWord> = Vec::new();
    for g in gens {
        alphabet.push(g.clone());
        alphabet.push(autos::invert(g));
    }
    let mut found: Vec<OuterAutoWord> = Vec::new();
    let mut frontier = vec![OuterAutoWord::identity()];
    for len in 0..=maxlen {
        for f in &frontier {
            let image = autos::act_on_gog(sys, f, rep)?;
            if equivalent(sys, &image, rep)? {
                let mut fresh = true;
                for known in &found {
                    if autos::outer_equal(sys, f, known)? {
                        fresh = false;
                        break;
                    }
                }
                if fresh {
                    found.push(f.clone());
                }
            }
        }
        if len == maxlen {
            break;
        }
        let mut next = Vec::new();
        for f in &frontier {
            for a in &alphabet {
                next.push(autos::compose(f, a));
            }
        }
        frontier = next;
    }
    Ok(found)
}

/// A uniformly random standard generator composition of the given length.
pub fn random_gamma_prime<R: Rng>(sys: &FactorSystem, len: usize, rng: &mut R) -> OuterAutoWord {
    let n = sys.n();
    let mut gens = Vec::with_capacity(len);
    for _ in 0..len {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let order = sys.factor(j).order();
        let e = rng.gen_range(1..order) as Elem;
        gens.push(AutoGen {
            factor: i,
            conj: Word::letter(j, e),
            exponent: 1,
        });
    }
    OuterAutoWord { gens }
}

/// Random walk in the spine: `steps` uniformly random neighbor hops.
pub fn random_walk<R: Rng>(
    sys: &FactorSystem,
    base: &GraphOfGroups,
    steps: usize,
    rng: &mut R,
) -> Result<GraphOfGroups, GogError> {
    let mut cur = canonical_form(sys, base)?;
    for _ in 0..steps {
        let nbrs = neighbors(sys, &cur.rep)?;
        if nbrs.is_empty() {
            break;
        }
        let pick = rng.gen_range(0..nbrs.len());
        cur = nbrs.into_iter().nth(pick).unwrap().1 .0;
    }
    Ok(cur.rep)
}

/// A different presentation of the same class: random global conjugation,
/// fundamental-domain twists and a vertex relabeling.
pub fn random_representation<R: Rng>(
    sys: &FactorSystem,
    x: &GraphOfGroups,
    rng: &mut R,
) -> GraphOfGroups {
    let mut cur = x.clone();
    // Global conjugation by a short random word.
    let len = rng.gen_range(0..3);
    let mut pairs = Vec::new();
    let mut last = usize::MAX;
    for _ in 0..len {
        let mut f = rng.gen_range(0..sys.n());
        if f == last {
            f = (f + 1) % sys.n();
        }
        last = f;
        let order = sys.factor(f).order();
        if order < 2 {
            continue;
        }
        pairs.push((f, rng.gen_range(1..order) as Elem));
    }
    if let Ok(g) = words::reduce(sys, &pairs) {
        cur = gog::canonical::conjugate_marking(sys, &cur, &g);
    }
    // A couple of random twists at peripheral vertices.
    for _ in 0..2 {
        let v = rng.gen_range(0..cur.n_vertices());
        if let VertexLabel::Peripheral { factor, .. } = cur.labels[v] {
            let incident = cur.incident_edges(v);
            if incident.is_empty() {
                continue;
            }
            let e = incident[rng.gen_range(0..incident.len())];
            let order = sys.factor(factor).order();
            let t = rng.gen_range(0..order) as Elem;
            if let Some(next) = gog::canonical::twist_marking(sys, &cur, v, e, t) {
                cur = next;
            }
        }
    }
    // Relabel vertices by a random permutation.
    let nv = cur.n_vertices();
    let mut perm: Vec<usize> = (0..nv).collect();
    for i in (1..nv).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    gog::canonical::relabel_marking(&cur, &perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autos::generator;
    use crate::gog::basepoint_star;
    use crate::groups::{cyclic, FactorSystem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sys_n(n: usize) -> FactorSystem {
        FactorSystem::new((0..n).map(|_| cyclic(2).unwrap()).collect()).unwrap()
    }

    #[test]
    fn n2_spine_is_a_point() {
        let sys = sys_n(2);
        let ball = explore(&sys, &basepoint_star(&sys), 5, 1000).unwrap();
        assert_eq!(ball.n_vertices(), 1);
        assert_eq!(ball.n_edges(), 0);
        assert!(!ball.truncated);
    }

    #[test]
    fn n3_ball_vertices_obey_count_bounds() {
        let sys = sys_n(3);
        let ball = explore(&sys, &basepoint_star(&sys), 3, 100_000).unwrap();
        assert!(ball.n_vertices() > 1);
        for sv in ball.vertices.values() {
            let nv = sv.rep.n_vertices();
            assert!((3..=4).contains(&nv));
        }
    }

    #[test]
    fn distance_examples() {
        let sys = sys_n(4);
        let x = basepoint_star(&sys);
        assert_eq!(
            spine_distance(&sys, &x, &x, 4).unwrap(),
            Distance::Exact(0)
        );
        let e = x.edges.iter().position(|&e| e == (0, 4)).unwrap();
        let y1 = collapse(&sys, &x, &[e]).unwrap();
        assert_eq!(
            spine_distance(&sys, &x, &y1, 4).unwrap(),
            Distance::Exact(1)
        );
    }

    #[test]
    fn classify_examples() {
        let sys = sys_n(4);
        let x = basepoint_star(&sys);
        let tags = classify(&sys, &x);
        assert!(tags.contains(&Tag::TypeX));
        assert!(tags.contains(&Tag::M4));
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(tags.contains(&Tag::Kij(i, j)), "missing K{i}{j}");
            }
        }
        let e = x.edges.iter().position(|&e| e == (0, 4)).unwrap();
        let y1 = collapse(&sys, &x, &[e]).unwrap();
        assert!(classify(&sys, &y1).contains(&Tag::TypeY));

        // Star with w A_3 w^{-1}, w over factors 1,2: TypeX and K12.
        let mut kx = x.clone();
        let w = words::mul(&sys, &Word::letter(0, 1), &Word::letter(1, 1));
        kx.labels[2] = VertexLabel::peripheral(&sys, 2, &w);
        let tags = classify(&sys, &kx);
        assert!(tags.contains(&Tag::TypeX));
        assert!(tags.contains(&Tag::Kij(0, 1)));
        assert!(!tags.contains(&Tag::Kij(2, 3)));
    }

    #[test]
    fn xy_path_single_generator() {
        let sys = sys_n(4);
        let x = basepoint_star(&sys);
        let f = generator(&sys, 2, &Word::letter(0, 1)).unwrap();
        let s_prime = autos::act_on_gog(&sys, &f, &x).unwrap();
        let path = xy_path(&sys, &x, &s_prime, Some(&f)).unwrap();
        assert_eq!(path.len(), 3);
        for sv in &path {
            let tags = classify(&sys, &sv.rep);
            assert!(tags.contains(&Tag::TypeX) || tags.contains(&Tag::TypeY));
        }
        for w in path.windows(2) {
            assert!(is_adjacent(&sys, &w[0].rep, &w[1].rep).unwrap());
        }
        // Trivial path.
        let p = xy_path(&sys, &x, &x, Some(&OuterAutoWord::identity())).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn xy_path_two_letter_conjugator() {
        let sys = sys_n(4);
        let x = basepoint_star(&sys);
        let w = words::mul(&sys, &Word::letter(0, 1), &Word::letter(1, 1));
        let f = generator(&sys, 2, &w).unwrap();
        let s_prime = autos::act_on_gog(&sys, &f, &x).unwrap();
        let path = xy_path(&sys, &x, &s_prime, Some(&f)).unwrap();
        // Frozen from the restricted search: two collapse-expand stages.
        assert_eq!(path.len(), 5);
        for win in path.windows(2) {
            assert!(is_adjacent(&sys, &win[0].rep, &win[1].rep).unwrap());
        }
    }

    #[test]
    fn recover_single_twist() {
        let sys = sys_n(4);
        let x = basepoint_star(&sys);
        let mut target = x.clone();
        target.labels[2] = VertexLabel::peripheral(&sys, 2, &Word::letter(0, 1));
        let phi = recover_automorphism(&sys, &x, &target).unwrap().unwrap();
        let image = autos::act_on_gog(&sys, &phi, &x).unwrap();
        assert!(equivalent(&sys, &image, &target).unwrap());
        assert_eq!(phi.gens.len(), 1);
        assert!(autos::is_standard_generator(&phi.gens[0]));

        // Identity case.
        let phi = recover_automorphism(&sys, &x, &x).unwrap().unwrap();
        assert!(phi.is_empty());

        // Distance-2 target through Y_2 with twists on factors 1 and 3.
        let mut target = x.clone();
        target.labels[0] = VertexLabel::peripheral(&sys, 0, &Word::letter(1, 1));
        target.labels[2] = VertexLabel::peripheral(&sys, 2, &Word::letter(1, 1));
        let phi = recover_automorphism(&sys, &x, &target).unwrap().unwrap();
        let image = autos::act_on_gog(&sys, &phi, &x).unwrap();
        assert!(equivalent(&sys, &image, &target).unwrap());
        assert_eq!(phi.gens.len(), 2);
    }

    #[test]
    fn stabilizer_sampling() {
        let sys = sys_n(4);
        let x = basepoint_star(&sys);
        let gens: Vec<OuterAutoWord> = (0..2)
            .map(|k| generator(&sys, k, &Word::letter(3, 1)).unwrap())
            .collect();
        let fixed = stabilizer_sample(&sys, &x, &gens, 1).unwrap();
        // Only the identity fixes the basepoint among short products here.
        assert_eq!(fixed.len(), 1);
        assert!(fixed[0].is_empty());

        let g = generator(&sys, 2, &Word::letter(0, 1)).unwrap();
        let moved = autos::act_on_gog(&sys, &g, &x).unwrap();
        assert!(!equivalent(&sys, &moved, &x).unwrap());
    }

    #[test]
    fn random_walk_markings_validate() {
        let sys = sys_n(4);
        let x = basepoint_star(&sys);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let m = random_walk(&sys, &x, 3, &mut rng).unwrap();
            gog::validate(&sys, &m).unwrap();
            let r = random_representation(&sys, &m, &mut rng);
            assert!(equivalent(&sys, &m, &r).unwrap());
        }
    }
}
