//! Cross-module invariants: provenance replay, generator action into the
//! spine, direct-sum separation, exploration determinism and the distortion
//! report shape.

use spinelab::autos::{self, OuterAutoWord};
use spinelab::gog::{basepoint_star, collapse, equivalent, validate};
use spinelab::groups::{cyclic, FactorSystem};
use spinelab::metrics::{self, SubgroupSpec};
use spinelab::spine::{self, classify, explore, Tag};
use spinelab::words::Word;

fn sys_n(n: usize) -> FactorSystem {
    FactorSystem::new((0..n).map(|_| cyclic(2).unwrap()).collect()).unwrap()
}

#[test]
fn spine_edge_provenance_replays() {
    let sys = sys_n(4);
    let ball = explore(&sys, &basepoint_star(&sys), 2, 100_000).unwrap();
    for ((a, b), prov) in &ball.edges {
        let upper = &ball.vertices[&prov.upper].rep;
        let other = if &prov.upper == a { b } else { a };
        let collapsed = collapse(&sys, upper, &prov.edge_set).unwrap();
        assert!(equivalent(&sys, &collapsed, &ball.vertices[other].rep).unwrap());
    }
    assert!(ball.n_edges() > 0);
}

#[test]
fn generator_action_stays_in_spine() {
    let sys = sys_n(3);
    let ball = explore(&sys, &basepoint_star(&sys), 3, 100_000).unwrap();
    let mut gens: Vec<OuterAutoWord> = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                gens.push(autos::generator(&sys, i, &Word::letter(j, 1)).unwrap());
            }
        }
    }
    for (key, sv) in &ball.vertices {
        if ball.depth[key] >= ball.radius {
            continue;
        }
        for g in &gens {
            let image = autos::act_on_gog(&sys, g, &sv.rep).unwrap();
            validate(&sys, &image).unwrap();
            // Canonicalizes to a valid spine vertex.
            let csv = spinelab::gog::canonical_form(&sys, &image).unwrap();
            validate(&sys, &csv.rep).unwrap();
        }
    }
}

/// Nontrivial short products from the two diagonal generator blocks never
/// coincide in the outer automorphism group.
#[test]
fn direct_sum_separation() {
    let sys = sys_n(4);
    let block = |pairs: &[(usize, usize)]| -> Vec<OuterAutoWord> {
        pairs
            .iter()
            .map(|&(i, j)| autos::generator(&sys, i, &Word::letter(j, 1)).unwrap())
            .collect()
    };
    // M^{12} and M^{34} generator blocks.
    let m12 = block(&[(0, 0), (1, 0), (0, 1), (1, 1)]);
    let m34 = block(&[(2, 2), (3, 2), (2, 3), (3, 3)]);
    let products = |gens: &[OuterAutoWord]| -> Vec<OuterAutoWord> {
        let mut out = Vec::new();
        for g in gens {
            out.push(g.clone());
            for h in gens {
                out.push(autos::compose(g, h));
            }
        }
        out
    };
    for f in products(&m12) {
        if autos::is_inner(&sys, &f).unwrap().is_some() {
            continue;
        }
        for g in products(&m34) {
            if autos::is_inner(&sys, &g).unwrap().is_some() {
                continue;
            }
            assert!(!autos::outer_equal(&sys, &f, &g).unwrap());
        }
    }
}

#[test]
fn explore_is_deterministic() {
    let sys = sys_n(3);
    let a = explore(&sys, &basepoint_star(&sys), 4, 100_000).unwrap();
    let b = explore(&sys, &basepoint_star(&sys), 4, 100_000).unwrap();
    let ja = serde_json::to_string(&spinelab::io::spine_ball_to_json(&sys, &a)).unwrap();
    let jb = serde_json::to_string(&spinelab::io::spine_ball_to_json(&sys, &b)).unwrap();
    assert_eq!(ja, jb);
}

#[test]
fn stabilizer_sample_contains_only_inner_fixers_at_basepoint() {
    let sys = sys_n(4);
    let x = basepoint_star(&sys);
    let mut gens = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                gens.push(autos::generator(&sys, i, &Word::letter(j, 1)).unwrap());
            }
        }
    }
    let fixed = spine::stabilizer_sample(&sys, &x, &gens[..4], 2).unwrap();
    assert!(!fixed.is_empty());
    for f in &fixed {
        assert!(autos::is_inner(&sys, f).unwrap().is_some());
    }
}

#[test]
fn distortion_report_rows() {
    let sys = sys_n(4);
    let spec = SubgroupSpec {
        name: "N12-N34".into(),
        generators: vec![metrics::pair_twist(&sys, 0, 1), metrics::pair_twist(&sys, 2, 3)],
    };
    let rows = metrics::distortion_report(&sys, &spec, 2, 10).unwrap();
    let by_word = |needle: &str| rows.iter().find(|r| r.word.contains(needle) || r.word == needle);
    let id_row = by_word("id").unwrap();
    assert_eq!(id_row.sub_length, 0);
    assert_eq!(id_row.spine_distance, Some(0));
    // Single pair twist: distance at least 2, with the counting certificate.
    let f12_rows: Vec<_> = rows
        .iter()
        .filter(|r| r.sub_length == 1 && r.g_lower_bound == Some(2))
        .collect();
    assert!(!f12_rows.is_empty());
    for r in f12_rows {
        assert!(r.spine_distance.unwrap() >= 2);
    }
    // Commuting product f12 f34 at subgroup length 2.
    let mixed: Vec<_> = rows
        .iter()
        .filter(|r| r.sub_length == 2 && r.g_lower_bound == Some(2))
        .collect();
    assert!(!mixed.is_empty());
    for r in mixed {
        assert!(r.spine_distance.unwrap() >= 2);
    }
    // Rows are deterministically sorted.
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.sub_length.cmp(&b.sub_length).then(a.word.cmp(&b.word)));
    for (x, y) in rows.iter().zip(sorted.iter()) {
        assert_eq!(x.word, y.word);
    }
    let csv = spinelab::io::distortion_csv(&rows);
    assert!(csv.starts_with("name,word,sub_length,spine_distance,g_lower_bound,status\n"));
}
