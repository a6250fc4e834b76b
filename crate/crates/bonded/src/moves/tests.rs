use super::*;
use crate::canon::canonical_code;
use crate::pd::parse_pd;
use crate::poly::LaurentPoly;
use crate::yamada::yamada_raw;
use std::collections::BTreeMap;

fn theta() -> Diagram {
    parse_pd("V[0,1,2],V[0,2,1]").unwrap()
}

fn handcuff() -> Diagram {
    parse_pd("V[0,0,1],V[1,2,2]").unwrap()
}

fn h21() -> Diagram {
    parse_pd("V[0,1,2],V[0,3,4],X[1,4,5,6],X[6,5,3,2]").unwrap()
}

fn b31() -> Diagram {
    parse_pd("V[0,1,2],V[0,3,4],X[1,5,6,7],X[7,8,3,2],X[8,6,5,4]").unwrap()
}

fn kinked_unknot() -> Diagram {
    parse_pd("X[0,1,1,0]").unwrap()
}

fn all_kinds() -> Vec<MoveKind> {
    vec![
        MoveKind::R1Down,
        MoveKind::R2Down,
        MoveKind::R3,
        MoveKind::R4Down,
        MoveKind::R5Down,
        MoveKind::R1Up,
        MoveKind::R2Up,
        MoveKind::R4Up,
        MoveKind::R5Up,
    ]
}

fn inverse_kind(kind: MoveKind) -> MoveKind {
    match kind {
        MoveKind::R1Down => MoveKind::R1Up,
        MoveKind::R1Up => MoveKind::R1Down,
        MoveKind::R2Down => MoveKind::R2Up,
        MoveKind::R2Up => MoveKind::R2Down,
        MoveKind::R3 => MoveKind::R3,
        MoveKind::R4Down => MoveKind::R4Up,
        MoveKind::R4Up => MoveKind::R4Down,
        MoveKind::R5Down => MoveKind::R5Up,
        MoveKind::R5Up => MoveKind::R5Down,
        MoveKind::Flype => MoveKind::Flype,
    }
}

#[test]
fn kinked_unknot_has_one_r1_site() {
    let d = kinked_unknot();
    let sites = find_moves(&d, &[MoveKind::R1Down]);
    assert_eq!(sites.len(), 1);
    let out = apply_move(&d, &sites[0]).unwrap();
    assert_eq!(out.nodes().len(), 0);
    assert_eq!(out.free_loops(), 1);
}

#[test]
fn theta_has_no_decreasing_sites_and_many_r1up() {
    let d = theta();
    assert!(find_moves(&d, MoveKind::decreasing()).is_empty());
    let r1up = find_moves(&d, &[MoveKind::R1Up]);
    assert!(r1up.len() >= 6, "3 arcs x 2 chiralities");
}

#[test]
fn b31_table_pd_is_locally_minimal() {
    let d = b31();
    assert!(find_moves(&d, &[MoveKind::R1Down, MoveKind::R2Down]).is_empty());
}

#[test]
fn r1up_kink_factors_are_a_plus_minus_2() {
    let d = theta();
    let base = yamada_raw(&d);
    let mut factors = Vec::new();
    for variant in 0..2u8 {
        let site = MoveSite {
            kind: MoveKind::R1Up,
            darts: vec![d.arc_ends(0)[0]],
            variant,
        };
        let out = apply_move(&d, &site).unwrap();
        let ratio = yamada_raw(&out).unit_ratio(&base).expect("unit ratio");
        factors.push(ratio);
    }
    factors.sort();
    assert_eq!(factors, vec![(1, -2), (1, 2)]);
}

#[test]
fn r2up_then_r2down_restores_code() {
    let d = h21();
    let code = canonical_code(&d);
    let faces = d.faces();
    let face = faces.iter().find(|f| f.len() >= 2).unwrap();
    for variant in 0..2u8 {
        let site = MoveSite {
            kind: MoveKind::R2Up,
            darts: vec![face[0], face[1]],
            variant,
        };
        let poked = apply_move(&d, &site).unwrap();
        assert_eq!(poked.crossing_count(), d.crossing_count() + 2);
        let undo = find_moves(&poked, &[MoveKind::R2Down])
            .into_iter()
            .find_map(|s| {
                let back = apply_move(&poked, &s).ok()?;
                (canonical_code(&back) == code).then_some(back)
            });
        assert!(undo.is_some(), "an inverse bigon must restore the diagram");
    }
}

#[test]
fn r5up_then_r5down_restores_theta() {
    let d = theta();
    let code = canonical_code(&d);
    for slot in 0..3u8 {
        for variant in 0..2u8 {
            let site = MoveSite {
                kind: MoveKind::R5Up,
                darts: vec![Dart::new(0, slot)],
                variant,
            };
            let twisted = apply_move(&d, &site).unwrap();
            assert_eq!(twisted.crossing_count(), 1);
            let undo = find_moves(&twisted, &[MoveKind::R5Down])
                .into_iter()
                .find_map(|s| {
                    let back = apply_move(&twisted, &s).ok()?;
                    (canonical_code(&back) == code).then_some(back)
                });
            assert!(undo.is_some(), "untwist must restore the theta");
        }
    }
}

#[test]
fn r4up_then_r4down_restores_h21() {
    let d = h21();
    let code = canonical_code(&d);
    let sites = find_moves(&d, &[MoveKind::R4Up]);
    assert!(!sites.is_empty());
    for site in &sites {
        let slid = apply_move(&d, site).unwrap();
        assert_eq!(slid.crossing_count(), d.crossing_count() + 1);
        let undo = find_moves(&slid, &[MoveKind::R4Down])
            .into_iter()
            .find_map(|s| {
                let back = apply_move(&slid, &s).ok()?;
                (canonical_code(&back) == code).then_some(back)
            });
        assert!(undo.is_some(), "vertex slide must reverse");
    }
}

/// Breadth-2 sweep over several seeds applying every detectable move,
/// checking soundness (normalized Yamada, component count, vertex count),
/// the raw-polynomial unit behavior per kind, and reversibility.
#[test]
fn move_sweep_soundness_and_reversibility() {
    let seeds = vec![theta(), handcuff(), h21(), b31()];
    let mut raw_cache: BTreeMap<CanonicalCode, LaurentPoly> = BTreeMap::new();
    let mut raw_of = |d: &Diagram| -> LaurentPoly {
        raw_cache
            .entry(canonical_code(d))
            .or_insert_with(|| yamada_raw(d))
            .clone()
    };
    let mut seen_kinds: BTreeMap<MoveKind, usize> = BTreeMap::new();
    for seed in &seeds {
        let mut layer = vec![seed.clone()];
        for _depth in 0..2 {
            let mut next_layer = Vec::new();
            for d in &layer {
                let base_raw = raw_of(d);
                let base_canon = base_raw.canonical_unit();
                let base_code = canonical_code(d);
                for site in find_moves(d, &all_kinds()) {
                    let out = match apply_move(d, &site) {
                        Ok(out) => out,
                        Err(MoveError::Stale) => panic!("fresh site reported stale"),
                    };
                    *seen_kinds.entry(site.kind).or_insert(0) += 1;
                    let out_raw = raw_of(&out);
                    // Unit-class invariance for every kind.
                    assert_eq!(
                        out_raw.canonical_unit(),
                        base_canon,
                        "kind {:?} changed the normalized Yamada value",
                        site.kind
                    );
                    // Exactness per kind (degenerate for vanishing values).
                    if base_raw.is_zero() {
                        assert!(out_raw.is_zero());
                    } else {
                        let ratio = out_raw.unit_ratio(&base_raw);
                        match site.kind {
                            MoveKind::R2Down | MoveKind::R2Up | MoveKind::R3
                            | MoveKind::R4Down | MoveKind::R4Up => {
                                assert_eq!(
                                    ratio,
                                    Some((1, 0)),
                                    "kind {:?} must be exact",
                                    site.kind
                                );
                            }
                            MoveKind::R1Down | MoveKind::R1Up => {
                                let (sign, n) = ratio.expect("R1 changes by a unit");
                                assert_eq!(sign, 1);
                                assert_eq!(n.abs(), 2, "R1 factor is A^±2");
                            }
                            MoveKind::R5Down | MoveKind::R5Up => {
                                assert!(ratio.is_some(), "R5 changes by a unit");
                            }
                            MoveKind::Flype => unreachable!(),
                        }
                    }
                    // Structure preservation.
                    assert_eq!(out.component_count(), d.component_count());
                    assert_eq!(out.vertex_count(), d.vertex_count());
                    assert_eq!(
                        out.crossing_count() as i32 - d.crossing_count() as i32,
                        site.kind.crossing_delta()
                    );
                    // Reversibility: some inverse site restores the code.
                    let inverse = inverse_kind(site.kind);
                    let restored = find_moves(&out, &[inverse]).into_iter().any(|s| {
                        apply_move(&out, &s)
                            .map(|back| canonical_code(&back) == base_code)
                            .unwrap_or(false)
                    });
                    assert!(
                        restored,
                        "kind {:?} must have an inverse site on the result",
                        site.kind
                    );
                    if out.crossing_count() <= d.crossing_count() + 1 {
                        next_layer.push(out);
                    }
                }
            }
            // Keep the sweep bounded.
            next_layer.truncate(12);
            layer = next_layer;
        }
    }
    for kind in all_kinds() {
        assert!(
            seen_kinds.get(&kind).copied().unwrap_or(0) > 0,
            "sweep never exercised {kind:?}: {seen_kinds:?}"
        );
    }
}

#[test]
fn simplify_double_kink() {
    // Two opposite kinks on an unknot.
    let d = kinked_unknot();
    let site = MoveSite {
        kind: MoveKind::R1Up,
        darts: vec![d.arc_ends(0)[0]],
        variant: 1,
    };
    let double = apply_move(&d, &site).unwrap();
    assert_eq!(double.crossing_count(), 2);
    let result = simplify(&double, &SearchBudget::depth(0));
    assert_eq!(result.diagram.nodes().len(), 0);
    assert_eq!(result.diagram.free_loops(), 1);
    assert!(!result.exhausted);
}

#[test]
fn simplify_inflated_theta_at_depth_zero() {
    let d = theta();
    let code = canonical_code(&d);
    let faces = d.faces();
    let face = faces.iter().find(|f| f.len() >= 2).unwrap();
    let site = MoveSite {
        kind: MoveKind::R2Up,
        darts: vec![face[0], face[1]],
        variant: 0,
    };
    let inflated = apply_move(&d, &site).unwrap();
    let result = simplify(&inflated, &SearchBudget::depth(0));
    assert_eq!(result.code, code);
}

#[test]
fn simplify_is_idempotent_on_table_pd() {
    let d = parse_pd(
        "V[0,1,2],X[0,3,4,5],X[1,6,7,8],X[9,10,3,2],X[10,11,12,4],V[5,12,6],X[11,9,8,7]",
    )
    .unwrap(); // B(5,1)_1
    let budget = SearchBudget::depth(0);
    let once = simplify(&d, &budget);
    assert_eq!(once.diagram.crossing_count(), 5, "table diagram is minimal");
    let twice = simplify(&once.diagram, &budget);
    assert_eq!(once.code, twice.code);
}

#[test]
fn reduce_equivalent_merges_inflated_copy() {
    let d = theta();
    let faces = d.faces();
    let face = faces.iter().find(|f| f.len() >= 2).unwrap();
    let site = MoveSite {
        kind: MoveKind::R2Up,
        darts: vec![face[0], face[1]],
        variant: 0,
    };
    let inflated = apply_move(&d, &site).unwrap();
    let part = reduce_equivalent(&[d, inflated], &SearchBudget::depth(0));
    assert_eq!(part.classes.len(), 1);
    assert_eq!(part.representatives[0].crossing_count(), 0);
}

#[test]
fn reduce_equivalent_keeps_chiral_pair_apart() {
    let d = b31();
    let m = d.mirror();
    let part = reduce_equivalent(&[d, m], &SearchBudget::depth(1));
    assert_eq!(part.classes.len(), 2, "B(3,1)_1 is chiral");
}

#[test]
fn stale_site_reported() {
    let d = kinked_unknot();
    let sites = find_moves(&d, &[MoveKind::R1Down]);
    let reduced = apply_move(&d, &sites[0]).unwrap();
    // The same site no longer applies to the reduced diagram.
    assert_eq!(apply_move(&reduced, &sites[0]), Err(MoveError::Stale));
}
