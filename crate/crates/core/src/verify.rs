//! The verification suite: machine checks of the constructive lemmas at
//! desk scale. Each check prints one pass/fail line and is also exercised by
//! the `acceptance` integration test target.

use crate::autos::{self, OuterAutoWord};
use crate::gog::{
    self, ball::default_oracle_radius, basepoint_star, collapse, enumerate_expansions,
    equivalent, equivariant_iso_oracle, GraphOfGroups,
};
use crate::groups::{cyclic, FactorSystem};
use crate::metrics::{self, pair_twist};
use crate::spine::{self, classify, explore, spine_distance, Distance, Tag};
use crate::words::{self, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} {:28} {} ({:.2}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.details
        )
    }
}

fn sys_c2(n: usize) -> FactorSystem {
    FactorSystem::new((0..n).map(|_| cyclic(2).unwrap()).collect()).unwrap()
}

fn sys_mixed4() -> FactorSystem {
    FactorSystem::new(vec![
        crate::groups::symmetric(3).unwrap(),
        cyclic(2).unwrap(),
        cyclic(2).unwrap(),
        cyclic(2).unwrap(),
    ])
    .unwrap()
}

fn finish(
    id: usize,
    name: &'static str,
    start: Instant,
    passed: bool,
    details: String,
    budget: Option<f64>,
) -> CriterionResult {
    let seconds = start.elapsed().as_secs_f64();
    let in_budget = budget.map(|b| seconds < b).unwrap_or(true);
    CriterionResult {
        id,
        name,
        passed: passed && in_budget,
        details: if in_budget {
            details
        } else {
            format!("{details}; exceeded {budget:?}s budget")
        },
        seconds,
    }
}

/// Criterion 1: the rank-2 spine is a single point.
pub fn c1_g2_point() -> CriterionResult {
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for factors in [
        vec![cyclic(2).unwrap(), cyclic(2).unwrap()],
        vec![cyclic(3).unwrap(), cyclic(2).unwrap()],
    ] {
        let label = factors.iter().map(|f| f.name().to_string()).collect::<Vec<_>>().join(",");
        let sys = FactorSystem::new(factors).unwrap();
        let ball = explore(&sys, &basepoint_star(&sys), 8, 10_000).unwrap();
        ok &= ball.n_vertices() == 1 && ball.n_edges() == 0 && !ball.truncated;
        details.push(format!(
            "{label}: |V|={} |E|={}",
            ball.n_vertices(),
            ball.n_edges()
        ));
    }
    finish(1, "g2-point", start, ok, details.join("; "), Some(1.0))
}

/// Criterion 2: the rank-3 radius-6 ball is connected and acyclic.
pub fn c2_g3_tree() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(3);
    let ball = explore(&sys, &basepoint_star(&sys), 6, 200_000).unwrap();
    let v = ball.n_vertices();
    let e = ball.n_edges();
    // explore is a BFS, so every vertex is reachable from the base; the ball
    // records all edges between discovered vertices, so acyclicity is
    // exactly |E| = |V| - 1.
    let ok = !ball.truncated && e + 1 == v;
    finish(
        2,
        "g3-tree",
        start,
        ok,
        format!("|V|={v} |E|={e}"),
        Some(30.0),
    )
}

/// Criterion 3: counting bounds on every representative in radius-3 balls.
pub fn c3_count_bounds() -> CriterionResult {
    let start = Instant::now();
    let mut ok = true;
    let mut checked = 0usize;
    for n in [3usize, 4] {
        let sys = sys_c2(n);
        let ball = explore(&sys, &basepoint_star(&sys), 3, 200_000).unwrap();
        for sv in ball.vertices.values() {
            let v = sv.rep.n_vertices();
            let e = sv.rep.n_edges();
            ok &= n <= v && v <= 2 * (n - 1) && n - 1 <= e && e <= 2 * n - 3;
            ok &= gog::validate(&sys, &sv.rep).is_ok();
            checked += 1;
        }
    }
    finish(
        3,
        "count-bounds",
        start,
        ok,
        format!("{checked} representatives checked"),
        Some(120.0),
    )
}

/// Criterion 4: the product of all single-twist generators by a fixed letter
/// is inner with that letter as conjugator; cross-factor twists are not.
pub fn c4_inner_identities() -> CriterionResult {
    let start = Instant::now();
    let mut ok = true;
    let mut cases = 0usize;
    for sys in [sys_c2(4), sys_mixed4()] {
        for j in 0..sys.n() {
            for a in sys.factor(j).nontrivial() {
                let letter = Word::letter(j, a);
                let mut f = OuterAutoWord::identity();
                for k in 0..sys.n() {
                    f = autos::compose(&f, &autos::generator(&sys, k, &letter).unwrap());
                }
                match autos::is_inner(&sys, &f).unwrap() {
                    Some(h) => ok &= h == letter,
                    None => ok = false,
                }
                cases += 1;
            }
        }
        // A single cross-factor twist is never inner.
        let g = autos::generator(&sys, 0, &Word::letter(1, 1)).unwrap();
        ok &= autos::is_inner(&sys, &g).unwrap().is_none();
    }
    finish(
        4,
        "inner-identities",
        start,
        ok,
        format!("{cases} inner products recovered"),
        None,
    )
}

fn reduced_words_over(sys: &FactorSystem, factors: &[usize], max_len: usize) -> Vec<Word> {
    let mut out: Vec<Word> = Vec::new();
    let mut frontier: Vec<Word> = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &f in factors {
                if w.last().map(|l| l.factor) == Some(f) {
                    continue;
                }
                for e in sys.factor(f).nontrivial() {
                    let nw = words::mul(sys, w, &Word::letter(f, e));
                    next.push(nw);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Criterion 5: free-product injectivity of the twist family on markings.
pub fn c5_injectivity() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let x = basepoint_star(&sys);
    let words = reduced_words_over(&sys, &[1, 2, 3], 3);
    let mut ok = true;
    for w in &words {
        let f = autos::generator(&sys, 0, w).unwrap();
        let image = autos::act_on_gog(&sys, &f, &x).unwrap();
        ok &= !equivalent(&sys, &image, &x).unwrap();
    }
    finish(
        5,
        "injectivity",
        start,
        ok,
        format!("{} nontrivial conjugators moved the basepoint", words.len()),
        Some(60.0),
    )
}

/// Criterion 6: single-letter twists at distinct factors commute when the
/// letters avoid both factors.
pub fn c6_commutation() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let mut ok = true;
    let mut cases = 0usize;
    for k in 0..4 {
        for m in 0..4 {
            if k == m {
                continue;
            }
            for fu in 0..4 {
                if fu == k || fu == m {
                    continue;
                }
                for fv in 0..4 {
                    if fv == k || fv == m {
                        continue;
                    }
                    for eu in sys.factor(fu).nontrivial() {
                        for ev in sys.factor(fv).nontrivial() {
                            let f = autos::generator(&sys, k, &Word::letter(fu, eu)).unwrap();
                            let g = autos::generator(&sys, m, &Word::letter(fv, ev)).unwrap();
                            let fg = autos::compose(&f, &g);
                            let gf = autos::compose(&g, &f);
                            for j in 0..4 {
                                for e in sys.factor(j).nontrivial() {
                                    let x = Word::letter(j, e);
                                    ok &= autos::apply(&sys, &fg, &x).unwrap()
                                        == autos::apply(&sys, &gf, &x).unwrap();
                                }
                            }
                            cases += 1;
                        }
                    }
                }
            }
        }
    }
    finish(
        6,
        "commutation",
        start,
        ok,
        format!("{cases} generator pairs compared on all letters"),
        None,
    )
}

/// Criterion 7: counting certificates and exact distances for pair-twist
/// powers.
pub fn c7_distance_lower_bounds() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let x = basepoint_star(&sys);
    let f12 = pair_twist(&sys, 0, 1);
    let mut ok = true;
    let mut details = Vec::new();
    for m in 1..=2u32 {
        let image = autos::act_on_gog(&sys, &autos::power(&f12, m as i32), &x).unwrap();
        let g_base = metrics::g_count(&sys, &x, 2, 0, 1, m).unwrap();
        let g_image = metrics::g_count(&sys, &image, 2, 0, 1, m).unwrap();
        ok &= g_base == 2 * m && g_image == 0;
        let d = spine_distance(&sys, &x, &image, 4 * m + 6).unwrap();
        match d {
            Distance::Exact(v) => {
                ok &= v >= 2 * m;
                details.push(format!("m={m}: g=({g_base},{g_image}) d={v}"));
            }
            Distance::AboveCap => {
                ok = false;
                details.push(format!("m={m}: distance above cap"));
            }
        }
    }
    finish(
        7,
        "distance-lower-bounds",
        start,
        ok,
        details.join("; "),
        Some(300.0),
    )
}

/// Criterion 8: the counting functions are 1-Lipschitz along spine edges and
/// the pair retraction is 2-coarse-Lipschitz, over the radius-4 ball.
pub fn c8_lipschitz() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let ball = explore(&sys, &basepoint_star(&sys), 4, 200_000).unwrap();
    let params: Vec<(usize, usize, usize, u32)> = [(2usize, 0usize, 1usize), (3, 0, 1), (0, 2, 3)]
        .iter()
        .flat_map(|&(k, i1, i2)| (0..=2u32).map(move |m| (k, i1, i2, m)))
        .collect();
    // Cache g and the retraction per vertex.
    let mut g_cache: std::collections::HashMap<&crate::gog::CanonicalKey, Vec<u32>> =
        std::collections::HashMap::new();
    let mut l_cache: std::collections::HashMap<&crate::gog::CanonicalKey, GraphOfGroups> =
        std::collections::HashMap::new();
    for (key, sv) in &ball.vertices {
        let gs = params
            .iter()
            .map(|&(k, i1, i2, m)| metrics::g_count(&sys, &sv.rep, k, i1, i2, m).unwrap())
            .collect();
        g_cache.insert(key, gs);
        l_cache.insert(
            key,
            metrics::retract_pair(&sys, &sv.rep, 0, 1).unwrap().result,
        );
    }
    let mut ok = true;
    let mut max_retract_dist = 0u32;
    for (a, b) in ball.edges.keys() {
        let ga = &g_cache[a];
        let gb = &g_cache[b];
        for i in 0..params.len() {
            let delta = ga[i].abs_diff(gb[i]);
            ok &= delta <= 1;
        }
        let d = spine_distance(&sys, &l_cache[a], &l_cache[b], 3).unwrap();
        match d {
            Distance::Exact(v) => {
                ok &= v <= 2;
                max_retract_dist = max_retract_dist.max(v);
            }
            Distance::AboveCap => ok = false,
        }
    }
    finish(
        8,
        "lipschitz",
        start,
        ok,
        format!(
            "{} edges x {} parameter sets; max retraction step {}",
            ball.n_edges(),
            params.len(),
            max_retract_dist
        ),
        None,
    )
}

fn sample_vertices(sys: &FactorSystem, count: usize, seed: u64) -> Vec<GraphOfGroups> {
    let base = basepoint_star(sys);
    let ball = explore(sys, &base, 3, count * 4).unwrap();
    let mut out: Vec<GraphOfGroups> = ball.vertices.values().map(|sv| sv.rep.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        out.push(spine::random_walk(sys, &base, 5, &mut rng).unwrap());
    }
    out.truncate(count);
    out
}

/// Criterion 9: retraction contract on sampled vertices.
pub fn c9_retraction_contract() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let samples = sample_vertices(&sys, 100, 9);
    let mut ok = true;
    for t in &samples {
        let r = metrics::retract_pair(&sys, t, 0, 1).unwrap().result;
        let tags = classify(&sys, &r);
        ok &= tags.contains(&Tag::Kij(0, 1));
        if classify(&sys, t).contains(&Tag::Kij(0, 1)) {
            ok &= equivalent(&sys, &r, t).unwrap();
        }
        let rr = metrics::retract_pair(&sys, &r, 0, 1).unwrap().result;
        ok &= equivalent(&sys, &rr, &r).unwrap();

        let m = metrics::retract_m4(&sys, t).unwrap().result;
        let mtags = classify(&sys, &m);
        ok &= mtags.contains(&Tag::M4);
        if classify(&sys, t).contains(&Tag::M4) {
            ok &= equivalent(&sys, &m, t).unwrap();
        }
        let mm = metrics::retract_m4(&sys, &m).unwrap().result;
        ok &= equivalent(&sys, &mm, &m).unwrap();
    }
    finish(
        9,
        "retraction-contract",
        start,
        ok,
        format!("{} samples through both retractions", samples.len()),
        None,
    )
}

/// Criterion 10: canonical-form equality agrees with the ball oracle.
pub fn c10_oracle_agreement() -> CriterionResult {
    let start = Instant::now();
    let mut ok = true;
    let mut pairs = 0usize;
    let mut equal_pairs = 0usize;
    for n in [3usize, 4] {
        let sys = sys_c2(n);
        let base = basepoint_star(&sys);
        let radius = default_oracle_radius(&sys);
        let mut rng = ChaCha8Rng::seed_from_u64(10 + n as u64);
        for _ in 0..100 {
            let a = spine::random_walk(&sys, &base, 4, &mut rng).unwrap();
            let b = spine::random_walk(&sys, &base, 4, &mut rng).unwrap();
            let canon = equivalent(&sys, &a, &b).unwrap();
            let oracle = equivariant_iso_oracle(&sys, &a, &b, radius).unwrap();
            ok &= canon == oracle;
            pairs += 1;
            if canon {
                equal_pairs += 1;
            }
        }
        // Deliberately equivalent pairs by re-presentation.
        for _ in 0..25 {
            let a = spine::random_walk(&sys, &base, 4, &mut rng).unwrap();
            let b = spine::random_representation(&sys, &a, &mut rng);
            let canon = equivalent(&sys, &a, &b).unwrap();
            let oracle = equivariant_iso_oracle(&sys, &a, &b, radius).unwrap();
            ok &= canon && oracle;
            pairs += 1;
            equal_pairs += 1;
        }
    }
    let enough = pairs >= 200 && equal_pairs >= 50;
    finish(
        10,
        "oracle-agreement",
        start,
        ok && enough,
        format!("{pairs} pairs, {equal_pairs} equivalent"),
        None,
    )
}

/// Criterion 11: every enumerated one-edge expansion collapses back to its
/// source, over the radius-2 ball.
pub fn c11_move_round_trip() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let ball = explore(&sys, &basepoint_star(&sys), 2, 200_000).unwrap();
    let mut ok = true;
    let mut moves = 0usize;
    for sv in ball.vertices.values() {
        let exps = match enumerate_expansions(&sys, &sv.rep) {
            Ok(e) => e,
            Err(gog::GogError::MaxEdgesReached) => continue,
            Err(_) => {
                ok = false;
                continue;
            }
        };
        for exp in exps {
            let back = collapse(&sys, &exp.result, &[exp.new_edge]).unwrap();
            ok &= equivalent(&sys, &back, &sv.rep).unwrap();
            moves += 1;
        }
    }
    finish(
        11,
        "move-round-trip",
        start,
        ok,
        format!(
            "{} expansions over {} vertices",
            moves,
            ball.n_vertices()
        ),
        None,
    )
}

/// Criterion 12: constructive connectivity inside the X/Y subcomplex.
pub fn c12_xy_connectivity() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let x = basepoint_star(&sys);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut ok = true;
    let mut total_len = 0usize;
    for _ in 0..50 {
        let len = 1 + (rand::Rng::gen_range(&mut rng, 0..3) as usize);
        let phi = spine::random_gamma_prime(&sys, len, &mut rng);
        let target = autos::act_on_gog(&sys, &phi, &x).unwrap();
        let path = match spine::xy_path(&sys, &x, &target, Some(&phi)) {
            Ok(p) => p,
            Err(e) => {
                ok = false;
                let _ = e;
                continue;
            }
        };
        ok &= equivalent(&sys, &path.first().unwrap().rep, &x).unwrap();
        ok &= equivalent(&sys, &path.last().unwrap().rep, &target).unwrap();
        for sv in &path {
            let tags = classify(&sys, &sv.rep);
            ok &= tags.contains(&Tag::TypeX) || tags.contains(&Tag::TypeY);
        }
        for w in path.windows(2) {
            ok &= spine::is_adjacent(&sys, &w[0].rep, &w[1].rep).unwrap();
        }
        total_len += path.len() - 1;
    }
    finish(
        12,
        "xy-connectivity",
        start,
        ok,
        format!("50 witnesses, total path length {total_len}"),
        None,
    )
}

/// Criterion 13: automorphism recovery for every type-X vertex at distance 2.
pub fn c13_recovery() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let x = basepoint_star(&sys);
    let ball = explore(&sys, &x, 2, 200_000).unwrap();
    let mut ok = true;
    let mut recovered = 0usize;
    for (key, sv) in &ball.vertices {
        if ball.depth[key] != 2 || !classify(&sys, &sv.rep).contains(&Tag::TypeX) {
            continue;
        }
        match spine::recover_automorphism(&sys, &x, &sv.rep).unwrap() {
            Some(phi) => {
                let image = autos::act_on_gog(&sys, &phi, &x).unwrap();
                ok &= equivalent(&sys, &image, &sv.rep).unwrap();
                ok &= phi.gens.iter().all(autos::is_standard_generator);
                recovered += 1;
            }
            None => ok = false,
        }
    }
    finish(
        13,
        "automorphism-recovery",
        start,
        ok && recovered > 0,
        format!("{recovered} type-X vertices at distance 2"),
        None,
    )
}

/// Criterion 14: the two pair twists generate a rank-2 free abelian image.
pub fn c14_zz_separation() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let f12 = pair_twist(&sys, 0, 1);
    let f34 = pair_twist(&sys, 2, 3);
    let mut ok = autos::outer_equal(
        &sys,
        &autos::compose(&f12, &f34),
        &autos::compose(&f34, &f12),
    )
    .unwrap();
    for m in 0..=2i32 {
        for l in 0..=2i32 {
            let eq = autos::outer_equal(&sys, &autos::power(&f12, m), &autos::power(&f34, l))
                .unwrap();
            ok &= eq == (m == 0 && l == 0);
        }
    }
    finish(
        14,
        "zz-separation",
        start,
        ok,
        "pair twists commute; powers separate".into(),
        None,
    )
}

/// Criterion 15: covering-tree distance between the first and third factor
/// vertices after pair-twist powers.
pub fn c15_bass_serre_geometry() -> CriterionResult {
    let start = Instant::now();
    let sys = sys_c2(4);
    let x = basepoint_star(&sys);
    let f12 = pair_twist(&sys, 0, 1);
    let mut ok = true;
    let mut details = Vec::new();
    for m in 1..=2u32 {
        let image = autos::act_on_gog(&sys, &autos::power(&f12, m as i32), &x).unwrap();
        let center = image.factor_vertex(0).unwrap();
        let ball = gog::bass_serre_ball(&sys, &image, center, 4 * m + 8, gog::ball::node_cap())
            .unwrap();
        let v1 = ball.find_stabilized(0, &Word::empty()).unwrap();
        let v3 = ball.find_stabilized(2, &Word::empty()).unwrap();
        let d = (ball.path(v1, v3).unwrap().len() - 1) as u32;
        ok &= d == 4 * m + 2;
        details.push(format!("m={m}: d={d}"));
    }
    finish(
        15,
        "bass-serre-geometry",
        start,
        ok,
        details.join("; "),
        None,
    )
}

/// Runs one named suite, or all of them.
pub fn run_suite(name: &str) -> Vec<CriterionResult> {
    type Check = fn() -> CriterionResult;
    let all: Vec<(&str, Check)> = vec![
        ("g2-point", c1_g2_point),
        ("g3-tree", c2_g3_tree),
        ("count-bounds", c3_count_bounds),
        ("inner", c4_inner_identities),
        ("injectivity", c5_injectivity),
        ("commutation", c6_commutation),
        ("distance-lower-bounds", c7_distance_lower_bounds),
        ("lipschitz", c8_lipschitz),
        ("retraction", c9_retraction_contract),
        ("oracle-agreement", c10_oracle_agreement),
        ("round-trip", c11_move_round_trip),
        ("xy-connectivity", c12_xy_connectivity),
        ("recovery", c13_recovery),
        ("zz-separation", c14_zz_separation),
        ("bass-serre-geometry", c15_bass_serre_geometry),
    ];
    all.into_iter()
        .filter(|(n, _)| name == "all" || *n == name)
        .map(|(_, f)| f())
        .collect()
}

pub fn suite_names() -> Vec<&'static str> {
    vec![
        "g2-point",
        "g3-tree",
        "count-bounds",
        "inner",
        "injectivity",
        "commutation",
        "distance-lower-bounds",
        "lipschitz",
        "retraction",
        "oracle-agreement",
        "round-trip",
        "xy-connectivity",
        "recovery",
        "zz-separation",
        "bass-serre-geometry",
    ]
}

/// Bounded move search from a marking to the basepoint class: a
/// semi-decision for marking validity of file input. Moves preserve
/// validity in both directions, so reaching the basepoint certifies the
/// input; `None` is inconclusive. Note that a marking whose labels fail to
/// generate the full free product can still pass `validate` (shape checks
/// only) but will never reach the basepoint.
pub fn verify_marking(
    sys: &FactorSystem,
    x: &GraphOfGroups,
    bound: u32,
) -> Result<Option<u32>, gog::GogError> {
    gog::validate(sys, x).map_err(|mut v| v.remove(0))?;
    let base = basepoint_star(sys);
    match spine_distance(sys, x, &base, bound)? {
        Distance::Exact(d) => Ok(Some(d)),
        Distance::AboveCap => Ok(None),
    }
}
