//! Ball enumeration and coset/orbit representatives in graph products.
//!
//! Balls are measured in syllable length and built breadth-first, one
//! syllable at a time, deduplicated by canonical form. A configurable cap
//! bounds memory; exceeding it is an explicit error, never a silent
//! truncation.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Neighborhood, VertexId};
use crate::word::{GraphProduct, GroupElement};

pub const DEFAULT_BALL_CAP: usize = 1_000_000;

/// Resource guard for enumerations.
#[derive(Debug, Clone, Copy)]
pub struct BallCap(pub usize);

impl Default for BallCap {
    fn default() -> Self {
        BallCap(DEFAULT_BALL_CAP)
    }
}

/// All elements of syllable length at most `r`, sorted in length-lex order.
pub fn ball(ctx: &GraphProduct, r: usize, cap: BallCap) -> Result<Vec<GroupElement>> {
    ball_in_subgraph(ctx, r, cap, None)
}

/// Ball of the standard subgroup supported on `vertices` (the whole group
/// when `vertices` is `None`). Standard subgroups embed with the same
/// syllable length, so this is plain breadth-first search over the allowed
/// letters.
pub fn ball_in_subgraph(
    ctx: &GraphProduct,
    r: usize,
    cap: BallCap,
    vertices: Option<&BTreeSet<VertexId>>,
) -> Result<Vec<GroupElement>> {
    let allowed: Vec<VertexId> = match vertices {
        Some(set) => set.iter().copied().collect(),
        None => (0..ctx.graph().vertex_count()).collect(),
    };
    let mut seen: BTreeSet<GroupElement> = BTreeSet::from([ctx.identity()]);
    let mut level: Vec<GroupElement> = vec![ctx.identity()];
    for k in 0..r {
        let mut next = BTreeSet::new();
        for g in &level {
            for &v in &allowed {
                for e in 1..ctx.group(v).order() {
                    let s = ctx.generator(v, e).expect("nonidentity letter");
                    let produced = ctx.multiply(g, &s);
                    if produced.len() == k + 1 && !seen.contains(&produced) {
                        next.insert(produced);
                    }
                }
            }
            if seen.len() + next.len() > cap.0 {
                return Err(Error::TruncationCap {
                    size: seen.len() + next.len(),
                    radius: k + 1,
                    cap: cap.0,
                });
            }
        }
        seen.extend(next.iter().cloned());
        level = next.into_iter().collect();
        if level.is_empty() {
            break;
        }
    }
    Ok(seen.into_iter().collect())
}

/// True when some shuffle of the canonical word ends with a syllable at `v`:
/// scanning from the right, a syllable at `v` is reachable before any
/// non-commuting blocker.
pub fn ends_with_vertex(ctx: &GraphProduct, g: &GroupElement, v: VertexId) -> bool {
    for s in g.syllables().iter().rev() {
        if s.vertex == v {
            return true;
        }
        if !ctx.graph().adjacent(s.vertex, v) {
            return false;
        }
    }
    false
}

/// Splits `g = w * gamma` where `gamma` is the (at most one) syllable at `v`
/// that can be shuffled to the last position, and `w` has no such syllable.
pub fn split_trailing_vertex(
    ctx: &GraphProduct,
    g: &GroupElement,
    v: VertexId,
) -> (GroupElement, usize) {
    let word = g.syllables();
    for i in (0..word.len()).rev() {
        if word[i].vertex == v {
            let mut rest = word.to_vec();
            let s = rest.remove(i);
            let w = ctx.reduce(&rest).expect("sub-word of a valid element");
            return (w, s.elem);
        }
        if !ctx.graph().adjacent(word[i].vertex, v) {
            break;
        }
    }
    (g.clone(), 0)
}

/// Minimal coset representatives within the ball: the identity together with
/// every element none of whose shuffles ends with a syllable at `v_gamma`.
pub fn coset_reps_w(
    ctx: &GraphProduct,
    v_gamma: VertexId,
    r: usize,
    cap: BallCap,
) -> Result<Vec<GroupElement>> {
    if v_gamma >= ctx.graph().vertex_count() {
        return Err(Error::UnknownVertex(format!("#{v_gamma}")));
    }
    Ok(ball(ctx, r, cap)?
        .into_iter()
        .filter(|g| !ends_with_vertex(ctx, g, v_gamma))
        .collect())
}

/// One representative per right-multiplication orbit of the standard link
/// subgroup of `v`, intersected with the given coset representatives.
/// Representatives are minimal in length-lex order; the identity's orbit is
/// always represented by the identity.
///
/// Membership in one orbit is the algebraic test `u^{-1} u'` supported on
/// the link, so truncation cannot split an orbit that has both endpoints in
/// the ball.
pub fn orbit_reps_wtilde(
    ctx: &GraphProduct,
    w_set: &[GroupElement],
    v: VertexId,
) -> Result<Vec<GroupElement>> {
    let link = ctx.graph().neighborhood(v, Neighborhood::Link)?;
    let mut sorted: Vec<&GroupElement> = w_set.iter().collect();
    sorted.sort();
    let mut assigned = vec![false; sorted.len()];
    let mut reps = Vec::new();
    for i in 0..sorted.len() {
        if assigned[i] {
            continue;
        }
        reps.push(sorted[i].clone());
        let inv = ctx.invert(sorted[i]);
        for j in i..sorted.len() {
            if assigned[j] {
                continue;
            }
            let diff = ctx.multiply(&inv, sorted[j]);
            if diff.support().iter().all(|u| link.contains(u)) {
                assigned[j] = true;
            }
        }
    }
    Ok(reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts;
    use crate::oracle;

    #[test]
    fn small_free_product_balls() {
        let z2z2 = contexts::free_product(&[2, 2]);
        let b0 = ball(&z2z2, 0, BallCap::default()).unwrap();
        assert_eq!(b0.len(), 1);
        let b1 = ball(&z2z2, 1, BallCap::default()).unwrap();
        assert_eq!(b1.len(), 3);

        // Z2 * Z4 at radius 2: e, four length-1 elements, six length-2 words
        let z2z4 = contexts::free_product(&[2, 4]);
        let b2 = ball(&z2z4, 2, BallCap::default()).unwrap();
        assert_eq!(b2.len(), 11);
        let brute = oracle::exhaustive_ball(&z2z4, 2);
        assert_eq!(b2.iter().cloned().collect::<BTreeSet<_>>(), brute);
    }

    #[test]
    fn balls_match_oracle_on_p4() {
        let ctx = contexts::p4_all_z2();
        for r in 0..=4 {
            let fast: BTreeSet<GroupElement> =
                ball(&ctx, r, BallCap::default()).unwrap().into_iter().collect();
            assert_eq!(fast, oracle::exhaustive_ball(&ctx, r), "radius {r}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let ctx = contexts::free_product(&[2, 2]);
        let err = ball(&ctx, 5, BallCap(4)).unwrap_err();
        assert!(matches!(err, Error::TruncationCap { .. }));
    }

    #[test]
    fn coset_reps_in_z2_z4() {
        let ctx = contexts::free_product(&[2, 4]);
        let gamma = 1; // the Z4 factor
        let display = |v: &Vec<GroupElement>| -> Vec<String> {
            v.iter().map(|g| ctx.display(g)).collect()
        };
        let w0 = coset_reps_w(&ctx, gamma, 0, BallCap::default()).unwrap();
        assert_eq!(display(&w0), vec!["e"]);
        let w1 = coset_reps_w(&ctx, gamma, 1, BallCap::default()).unwrap();
        assert_eq!(display(&w1), vec!["e", "t@w0"]);
        let w2 = coset_reps_w(&ctx, gamma, 2, BallCap::default()).unwrap();
        assert_eq!(w2.len(), 5);
        let brute = oracle::exhaustive_w(&ctx, gamma, 2);
        assert_eq!(w2.into_iter().collect::<BTreeSet<_>>(), brute);
    }

    #[test]
    fn every_ball_element_splits_uniquely_over_w() {
        // coset property: g = w * gamma with w in W, uniquely
        let ctx = contexts::free_product(&[2, 4]);
        let gamma_v = 1;
        let w_set: BTreeSet<GroupElement> =
            coset_reps_w(&ctx, gamma_v, 4, BallCap::default()).unwrap().into_iter().collect();
        for g in ball(&ctx, 3, BallCap::default()).unwrap() {
            let (w, elem) = split_trailing_vertex(&ctx, &g, gamma_v);
            assert!(w_set.contains(&w), "{} not in W", ctx.display(&w));
            let back = if elem == 0 {
                w.clone()
            } else {
                ctx.multiply(&w, &ctx.generator(gamma_v, elem).unwrap())
            };
            assert_eq!(back, g);
            // uniqueness: no other (w', k) with w' in the enumerated W works
            let mut count = 0;
            for w2 in &w_set {
                for k in 0..ctx.group(gamma_v).order() {
                    let cand = if k == 0 {
                        w2.clone()
                    } else {
                        ctx.multiply(w2, &ctx.generator(gamma_v, k).unwrap())
                    };
                    if cand == g {
                        count += 1;
                    }
                }
            }
            assert_eq!(count, 1, "element {}", ctx.display(&g));
        }
    }

    #[test]
    fn wtilde_on_p4() {
        let ctx = contexts::p4_all_z2();
        let w1 = coset_reps_w(&ctx, 0, 1, BallCap::default()).unwrap();
        let reps = orbit_reps_wtilde(&ctx, &w1, 0).unwrap();
        let shown: Vec<String> = reps.iter().map(|g| ctx.display(g)).collect();
        // b2 falls into the identity's orbit; b3 and b4 survive
        assert_eq!(shown, vec!["e", "t@v3", "t@v4"]);
    }

    #[test]
    fn wtilde_collapses_on_star_graphs() {
        // when the whole graph is the star of v, W equals the link subgroup
        let ctx = contexts::all_z2(
            &["c", "a", "b", "d"],
            &[("c", "a"), ("c", "b"), ("c", "d")],
        );
        for r in 0..=3 {
            let w = coset_reps_w(&ctx, 0, r, BallCap::default()).unwrap();
            let reps = orbit_reps_wtilde(&ctx, &w, 0).unwrap();
            assert_eq!(reps.len(), 1);
            assert!(reps[0].is_identity());
        }
    }

    #[test]
    fn wtilde_trivial_link_returns_w() {
        let ctx = contexts::free_product(&[2, 4]);
        let w = coset_reps_w(&ctx, 1, 2, BallCap::default()).unwrap();
        let reps = orbit_reps_wtilde(&ctx, &w, 1).unwrap();
        assert_eq!(reps, w);
    }

    #[test]
    fn w_membership_matches_shuffle_oracle() {
        let ctx = contexts::p4_all_z2();
        for g in ball(&ctx, 4, BallCap::default()).unwrap() {
            assert_eq!(
                ends_with_vertex(&ctx, &g, 0),
                oracle::ends_with_vertex_by_shuffles(&ctx, &g, 0),
                "element {}",
                ctx.display(&g)
            );
        }
    }
}
