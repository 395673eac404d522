//! Brute-force reference implementations backing the test suites.
//!
//! Everything here trades efficiency for being checkable by eye: sequences
//! are enumerated outright, the reducedness test follows the defining
//! condition with its explicit split index, and rewrite confluence is probed
//! by random walks over the raw move set. None of it shares code with the
//! engine paths it is used to check.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::fingroup::ElemId;
use crate::graph::VertexId;
use crate::word::{GraphProduct, GroupElement, Syllable};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Uniformly random raw sequence of up to `max_len` nonidentity syllables.
pub fn random_raw(ctx: &GraphProduct, max_len: usize, rng: &mut StdRng) -> Vec<Syllable> {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| {
            let v: VertexId = rng.gen_range(0..ctx.graph().vertex_count());
            let e: ElemId = rng.gen_range(1..ctx.group(v).order());
            ctx.syllable(v, e).expect("nonidentity element of a registered group")
        })
        .collect()
}

fn commute(ctx: &GraphProduct, a: VertexId, b: VertexId) -> bool {
    a != b && ctx.graph().adjacent(a, b)
}

/// Literal reducedness test: no two syllables of the same vertex group admit
/// a split index such that the left one commutes past everything up to the
/// split and the right one past everything after it.
pub fn def_reduced(ctx: &GraphProduct, seq: &[Syllable]) -> bool {
    if seq.iter().any(|s| s.elem == 0) {
        return false;
    }
    let n = seq.len();
    for i in 0..n {
        for j in i + 1..n {
            if seq[i].vertex != seq[j].vertex {
                continue;
            }
            for k in i..j {
                let left_ok = (i + 1..=k).all(|m| commute(ctx, seq[i].vertex, seq[m].vertex));
                let right_ok = (k + 1..j).all(|m| commute(ctx, seq[m].vertex, seq[j].vertex));
                if left_ok && right_ok {
                    return false;
                }
            }
        }
    }
    true
}

/// One random admissible rewrite move: an adjacent same-vertex merge or an
/// adjacent commuting swap (either direction). Returns false when no move
/// exists.
fn random_move(ctx: &GraphProduct, seq: &mut Vec<Syllable>, rng: &mut StdRng) -> bool {
    #[derive(Clone, Copy)]
    enum Move {
        Merge(usize),
        Swap(usize),
    }
    let mut moves = Vec::new();
    for i in 0..seq.len().saturating_sub(1) {
        if seq[i].vertex == seq[i + 1].vertex {
            moves.push(Move::Merge(i));
        } else if ctx.graph().adjacent(seq[i].vertex, seq[i + 1].vertex) {
            moves.push(Move::Swap(i));
        }
    }
    if moves.is_empty() {
        return false;
    }
    match moves[rng.gen_range(0..moves.len())] {
        Move::Merge(i) => {
            let v = seq[i].vertex;
            let prod = ctx.group(v).mul(seq[i].elem, seq[i + 1].elem);
            seq.remove(i + 1);
            if prod == 0 {
                seq.remove(i);
            } else {
                seq[i].elem = prod;
            }
        }
        Move::Swap(i) => seq.swap(i, i + 1),
    }
    true
}

/// Applies `steps` random rewrite moves to a copy of the sequence.
pub fn random_walk(
    ctx: &GraphProduct,
    seq: &[Syllable],
    steps: usize,
    rng: &mut StdRng,
) -> Vec<Syllable> {
    let mut out = seq.to_vec();
    for _ in 0..steps {
        if !random_move(ctx, &mut out, rng) {
            break;
        }
    }
    out
}

/// All sequences reachable from `seq` by adjacent commuting swaps alone.
pub fn shuffle_class(ctx: &GraphProduct, seq: &[Syllable]) -> BTreeSet<Vec<Syllable>> {
    let mut seen = BTreeSet::from([seq.to_vec()]);
    let mut frontier = vec![seq.to_vec()];
    while let Some(word) = frontier.pop() {
        for i in 0..word.len().saturating_sub(1) {
            if word[i].vertex != word[i + 1].vertex
                && ctx.graph().adjacent(word[i].vertex, word[i + 1].vertex)
            {
                let mut next = word.clone();
                next.swap(i, i + 1);
                if seen.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
    }
    seen
}

/// True when some shuffle of the element's word ends with a syllable at `v`.
pub fn ends_with_vertex_by_shuffles(ctx: &GraphProduct, g: &GroupElement, v: VertexId) -> bool {
    shuffle_class(ctx, g.syllables())
        .iter()
        .any(|word| word.last().is_some_and(|s| s.vertex == v))
}

/// Ball of radius `r` by exhausting every raw sequence of length at most `r`.
pub fn exhaustive_ball(ctx: &GraphProduct, r: usize) -> BTreeSet<GroupElement> {
    let mut letters = Vec::new();
    for v in 0..ctx.graph().vertex_count() {
        for e in 1..ctx.group(v).order() {
            letters.push(ctx.syllable(v, e).expect("valid letter"));
        }
    }
    let mut out = BTreeSet::from([ctx.identity()]);
    let mut level: Vec<Vec<Syllable>> = vec![vec![]];
    for _ in 0..r {
        let mut next = Vec::new();
        for seq in &level {
            for &s in &letters {
                let mut t = seq.clone();
                t.push(s);
                out.insert(ctx.reduce(&t).expect("valid sequence"));
                next.push(t);
            }
        }
        level = next;
    }
    out
}

/// Coset representatives by definition: elements of the ball none of whose
/// shuffles ends with a syllable at `v`.
pub fn exhaustive_w(ctx: &GraphProduct, v: VertexId, r: usize) -> BTreeSet<GroupElement> {
    exhaustive_ball(ctx, r)
        .into_iter()
        .filter(|g| !ends_with_vertex_by_shuffles(ctx, g, v))
        .collect()
}
