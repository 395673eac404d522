//! Normal forms and arithmetic in graph products of finite groups.
//!
//! Elements are sequences of syllables (vertex, nonidentity element). Two
//! rewrite moves generate equality: merging syllables of the same vertex once
//! they become adjacent, and swapping adjacent syllables whose vertices are
//! joined by an edge. A sequence is *reduced* when no amount of swapping can
//! bring two same-vertex syllables together; reduced representatives of an
//! element differ only by swaps.
//!
//! To get decidable equality we fix the canonical representative to be the
//! least word of the swap class, comparing syllables by (vertex, element)
//! with the graph's vertex order. Note that having no adjacent descending
//! commuting pair is necessary but not sufficient for minimality (on the path
//! v1-v2-v3 the words [v3][v1][v2] and [v2][v3][v1] are swap-equivalent and
//! both locally sorted), so canonicalization runs a greedy global selection
//! rather than a bubble-sort fixpoint.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fingroup::{ElemId, FiniteGroup};
use crate::graph::{Graph, Neighborhood, VertexId};

/// One maximal vertex-group letter of a word. The element is never the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Syllable {
    pub vertex: VertexId,
    pub elem: ElemId,
}

/// An element of a graph product, stored in canonical normal form.
///
/// Ordering is by syllable length first, then lexicographically on
/// (vertex, element) pairs; ball enumeration, coset representatives and
/// greedy constructions all use this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupElement {
    syllables: Vec<Syllable>,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement { syllables: Vec::new() }
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    /// Syllable length of the canonical form.
    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Set of vertices whose groups appear in the word.
    pub fn support(&self) -> BTreeSet<VertexId> {
        self.syllables.iter().map(|s| s.vertex).collect()
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.syllables
            .len()
            .cmp(&other.syllables.len())
            .then_with(|| self.syllables.cmp(&other.syllables))
    }
}

/// A graph product context: the graph plus one finite group per vertex.
///
/// All word operations are methods on this context; elements do not carry a
/// back-pointer and are only meaningful relative to the context that built
/// them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphProduct {
    graph: Graph,
    groups: Vec<FiniteGroup>,
}

impl GraphProduct {
    pub fn new(graph: Graph, groups: Vec<FiniteGroup>) -> Result<Self> {
        if groups.len() != graph.vertex_count() {
            return Err(Error::Config(format!(
                "graph has {} vertices but {} vertex groups were given",
                graph.vertex_count(),
                groups.len()
            )));
        }
        Ok(GraphProduct { graph, groups })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn group(&self, v: VertexId) -> &FiniteGroup {
        &self.groups[v]
    }

    pub fn groups(&self) -> &[FiniteGroup] {
        &self.groups
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity()
    }

    /// Builds a validated syllable; the identity element of a vertex group is
    /// rejected (identity syllables are never stored).
    pub fn syllable(&self, vertex: VertexId, elem: ElemId) -> Result<Syllable> {
        if vertex >= self.groups.len() {
            return Err(Error::UnknownVertex(format!("#{vertex}")));
        }
        self.groups[vertex].check_elem(elem)?;
        if elem == 0 {
            return Err(Error::IdentitySyllable(self.graph.vertex_name(vertex).to_string()));
        }
        Ok(Syllable { vertex, elem })
    }

    /// Single-syllable element.
    pub fn generator(&self, vertex: VertexId, elem: ElemId) -> Result<GroupElement> {
        let s = self.syllable(vertex, elem)?;
        Ok(GroupElement { syllables: vec![s] })
    }

    fn check_raw(&self, raw: &[Syllable]) -> Result<()> {
        for s in raw {
            if s.vertex >= self.groups.len() {
                return Err(Error::UnknownVertex(format!("#{}", s.vertex)));
            }
            self.groups[s.vertex].check_elem(s.elem)?;
        }
        Ok(())
    }

    /// Appends one syllable to a reduced word, merging it into the rightmost
    /// same-vertex syllable that is separated from the end only by commuting
    /// syllables. Identity syllables are dropped on arrival or after a merge.
    fn push_syllable(&self, word: &mut Vec<Syllable>, s: Syllable) {
        if s.elem == 0 {
            return;
        }
        for i in (0..word.len()).rev() {
            if word[i].vertex == s.vertex {
                let prod = self.groups[s.vertex].mul(word[i].elem, s.elem);
                if prod == 0 {
                    word.remove(i);
                } else {
                    word[i].elem = prod;
                }
                return;
            }
            if !self.graph.adjacent(word[i].vertex, s.vertex) {
                break;
            }
        }
        word.push(s);
    }

    /// Greedy selection of the least word in the swap class of a reduced word.
    ///
    /// A syllable is available when every unconsumed syllable to its left has
    /// a distinct, adjacent vertex; among the available ones the least
    /// (vertex, element) wins. Two same-vertex syllables are never available
    /// at once, so the choice is unambiguous.
    fn canonical_sort(&self, word: &[Syllable]) -> Vec<Syllable> {
        let n = word.len();
        let mut used = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut best: Option<usize> = None;
            'cand: for i in 0..n {
                if used[i] {
                    continue;
                }
                for j in 0..i {
                    if used[j] {
                        continue;
                    }
                    if word[j].vertex == word[i].vertex
                        || !self.graph.adjacent(word[j].vertex, word[i].vertex)
                    {
                        continue 'cand;
                    }
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        (word[i].vertex, word[i].elem) < (word[b].vertex, word[b].elem)
                    }
                };
                if better {
                    best = Some(i);
                }
            }
            let b = best.expect("nonempty suffix always has an available syllable");
            used[b] = true;
            out.push(word[b]);
        }
        out
    }

    /// Canonical normal form of an arbitrary syllable sequence.
    pub fn reduce(&self, raw: &[Syllable]) -> Result<GroupElement> {
        self.check_raw(raw)?;
        let mut word = Vec::with_capacity(raw.len());
        for &s in raw {
            self.push_syllable(&mut word, s);
        }
        Ok(GroupElement { syllables: self.canonical_sort(&word) })
    }

    /// True when the sequence is reduced: no swap sequence ever enables a
    /// merge. Equivalent to reduction preserving the length.
    pub fn is_reduced(&self, seq: &[Syllable]) -> Result<bool> {
        Ok(self.reduce(seq)?.len() == seq.len())
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut word = a.syllables.clone();
        for &s in &b.syllables {
            self.push_syllable(&mut word, s);
        }
        GroupElement { syllables: self.canonical_sort(&word) }
    }

    /// Product of several elements, left to right.
    pub fn product(&self, items: &[&GroupElement]) -> GroupElement {
        let mut acc = GroupElement::identity();
        for g in items {
            acc = self.multiply(&acc, g);
        }
        acc
    }

    pub fn invert(&self, a: &GroupElement) -> GroupElement {
        let word: Vec<Syllable> = a
            .syllables
            .iter()
            .rev()
            .map(|s| Syllable { vertex: s.vertex, elem: self.groups[s.vertex].inv(s.elem) })
            .collect();
        // the reversed-inverted word is already reduced; only re-sort
        GroupElement { syllables: self.canonical_sort(&word) }
    }

    pub fn syllable_length(&self, g: &GroupElement) -> usize {
        g.len()
    }

    /// Index of the unique syllable that can be swapped to the front, if any,
    /// among those whose vertex satisfies `pred`. A syllable is front-able
    /// when every earlier syllable has a distinct, adjacent vertex.
    fn frontable_index<F: Fn(VertexId) -> bool>(
        &self,
        word: &[Syllable],
        pred: F,
    ) -> Option<usize> {
        'cand: for i in 0..word.len() {
            if !pred(word[i].vertex) {
                continue;
            }
            for j in 0..i {
                if word[j].vertex == word[i].vertex
                    || !self.graph.adjacent(word[j].vertex, word[i].vertex)
                {
                    continue 'cand;
                }
            }
            return Some(i);
        }
        None
    }

    /// Splits `g = a * l * h` at a vertex `v`: `a` is the front-able syllable
    /// of the vertex group at `v` (or identity), `l` the maximal extractable
    /// word supported on the link of `v`, and `h` the rest, which is identity
    /// or starts outside the star of `v` in every representative.
    pub fn alh_decompose(
        &self,
        g: &GroupElement,
        v: VertexId,
    ) -> Result<(GroupElement, GroupElement, GroupElement)> {
        if v >= self.groups.len() {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        let link = self.graph.neighborhood(v, Neighborhood::Link)?;
        let mut rest: Vec<Syllable> = g.syllables.clone();
        let a = match self.frontable_index(&rest, |u| u == v) {
            Some(i) => {
                let s = rest.remove(i);
                GroupElement { syllables: vec![s] }
            }
            None => GroupElement::identity(),
        };
        let mut l_word = Vec::new();
        while let Some(i) = self.frontable_index(&rest, |u| link.contains(&u)) {
            l_word.push(rest.remove(i));
        }
        let l = GroupElement { syllables: self.canonical_sort(&l_word) };
        let h = GroupElement { syllables: self.canonical_sort(&rest) };
        Ok((a, l, h))
    }

    /// Deletes every syllable at a vertex outside `keep`, then reduces.
    /// This is the retraction homomorphism onto the standard subgroup on `keep`.
    pub fn retraction(&self, g: &GroupElement, keep: &BTreeSet<VertexId>) -> GroupElement {
        let filtered: Vec<Syllable> =
            g.syllables.iter().copied().filter(|s| keep.contains(&s.vertex)).collect();
        self.reduce(&filtered).expect("syllables of a valid element stay valid")
    }

    /// Human-readable rendering, `e` for the identity.
    pub fn display(&self, g: &GroupElement) -> String {
        if g.is_identity() {
            return "e".to_string();
        }
        let mut out = String::new();
        for (i, s) in g.syllables.iter().enumerate() {
            if i > 0 {
                out.push('*');
            }
            let _ = write!(
                out,
                "{}@{}",
                self.groups[s.vertex].elem_name(s.elem),
                self.graph.vertex_name(s.vertex)
            );
        }
        out
    }

    /// Parses the format produced by [`Self::display`].
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let text = text.trim();
        if text == "e" || text.is_empty() {
            return Ok(GroupElement::identity());
        }
        let mut raw = Vec::new();
        for part in text.split('*') {
            let (elem, vertex) = part
                .trim()
                .split_once('@')
                .ok_or_else(|| Error::Config(format!("bad syllable `{part}`")))?;
            let v = self.graph.vertex_index(vertex.trim())?;
            let e = self.groups[v].resolve(elem.trim())?;
            raw.push(self.syllable(v, e)?);
        }
        self.reduce(&raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts;
    use crate::oracle;

    fn p4_z2() -> GraphProduct {
        contexts::p4_all_z2()
    }

    fn syl(ctx: &GraphProduct, v: VertexId, e: ElemId) -> Syllable {
        ctx.syllable(v, e).unwrap()
    }

    #[test]
    fn involution_cancels() {
        let ctx = p4_z2();
        let b1 = syl(&ctx, 0, 1);
        assert!(ctx.reduce(&[b1, b1]).unwrap().is_identity());
    }

    #[test]
    fn commuting_pair_sorts_by_vertex_order() {
        let ctx = p4_z2();
        let (b1, b2) = (syl(&ctx, 0, 1), syl(&ctx, 1, 1));
        let g = ctx.reduce(&[b2, b1]).unwrap();
        assert_eq!(g.syllables(), &[b1, b2]);
    }

    #[test]
    fn shuffle_enables_cancellation() {
        let ctx = p4_z2();
        let (b1, b2) = (syl(&ctx, 0, 1), syl(&ctx, 1, 1));
        let g = ctx.reduce(&[b1, b2, b1]).unwrap();
        assert_eq!(g.syllables(), &[b2]);
        assert_eq!(ctx.syllable_length(&g), 1);
    }

    #[test]
    fn non_commuting_word_stays_put() {
        let ctx = p4_z2();
        let (b1, b3) = (syl(&ctx, 0, 1), syl(&ctx, 2, 1));
        let g = ctx.reduce(&[b1, b3, b1]).unwrap();
        assert_eq!(ctx.syllable_length(&g), 3);
    }

    #[test]
    fn is_reduced_examples() {
        let ctx = p4_z2();
        let (b1, b2, b3) = (syl(&ctx, 0, 1), syl(&ctx, 1, 1), syl(&ctx, 2, 1));
        assert!(ctx.is_reduced(&[b1, b3]).unwrap());
        assert!(!ctx.is_reduced(&[b1, b2, b1]).unwrap());
        assert!(ctx.is_reduced(&[]).unwrap());
    }

    #[test]
    fn locally_sorted_is_not_enough_but_canonical_is() {
        // On P3 the words [v3][v1][v2] and [v2][v3][v1] are swap-equivalent
        // and neither has an adjacent descending commuting pair; the greedy
        // canonicalizer must send both to the same word.
        let ctx = contexts::all_z2(&["v1", "v2", "v3"], &[("v1", "v2"), ("v2", "v3")]);
        let (b1, b2, b3) = (syl(&ctx, 0, 1), syl(&ctx, 1, 1), syl(&ctx, 2, 1));
        let g1 = ctx.reduce(&[b3, b1, b2]).unwrap();
        let g2 = ctx.reduce(&[b2, b3, b1]).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(g1.syllables(), &[b2, b3, b1]);
    }

    #[test]
    fn multiply_and_invert() {
        let free = contexts::free_product(&[2, 4]);
        let g = free.generator(0, 1).unwrap();
        let t = free.generator(1, 1).unwrap();
        assert!(free.multiply(&g, &g).is_identity());
        // right cancellation via reduce
        let b1b3 = {
            let ctx = p4_z2();
            let w = ctx
                .multiply(&ctx.generator(0, 1).unwrap(), &ctx.generator(2, 1).unwrap());
            let b3 = ctx.generator(2, 1).unwrap();
            ctx.multiply(&w, &b3)
        };
        assert_eq!(b1b3.len(), 1);
        // inverse in Z4: t^{-1} = t^3
        let tinv = free.invert(&t);
        assert_eq!(tinv.syllables()[0].elem, 3);
        assert!(free.multiply(&t, &tinv).is_identity());
        let gt = free.multiply(&g, &t);
        assert!(free.multiply(&gt, &free.invert(&gt)).is_identity());
    }

    #[test]
    fn syllable_length_of_inverse() {
        let ctx = p4_z2();
        let (b1, b2, b3) = (syl(&ctx, 0, 1), syl(&ctx, 1, 1), syl(&ctx, 2, 1));
        for raw in [vec![b1, b3, b1], vec![b1, b2, b1], vec![b2, b3], vec![]] {
            let g = ctx.reduce(&raw).unwrap();
            assert_eq!(g.len(), ctx.invert(&g).len());
        }
    }

    #[test]
    fn alh_decompose_examples() {
        let ctx = p4_z2();
        let e = ctx.identity();
        let (a, l, h) = ctx.alh_decompose(&e, 0).unwrap();
        assert!(a.is_identity() && l.is_identity() && h.is_identity());

        // b2*b3: b2 lies in lk(v1), b3 outside st(v1)
        let g = ctx.reduce(&[syl(&ctx, 1, 1), syl(&ctx, 2, 1)]).unwrap();
        let (a, l, h) = ctx.alh_decompose(&g, 0).unwrap();
        assert!(a.is_identity());
        assert_eq!(l.syllables(), &[syl(&ctx, 1, 1)]);
        assert_eq!(h.syllables(), &[syl(&ctx, 2, 1)]);

        // leading v1-syllable is extracted, remainder in lk(v1)
        let ctx2 = contexts::p4_with_group_at(0, FiniteGroup::cyclic(4).unwrap());
        let g = ctx2.reduce(&[syl(&ctx2, 0, 1), syl(&ctx2, 1, 1)]).unwrap();
        let (a, l, h) = ctx2.alh_decompose(&g, 0).unwrap();
        assert_eq!(a.syllables(), &[syl(&ctx2, 0, 1)]);
        assert_eq!(l.syllables(), &[syl(&ctx2, 1, 1)]);
        assert!(h.is_identity());
    }

    #[test]
    fn alh_recomposes_and_h_starts_outside_star() {
        let ctx = p4_z2();
        let mut rng = oracle::rng(7);
        for _ in 0..500 {
            let raw = oracle::random_raw(&ctx, 8, &mut rng);
            let g = ctx.reduce(&raw).unwrap();
            for v in 0..4 {
                let (a, l, h) = ctx.alh_decompose(&g, v).unwrap();
                let back = ctx.product(&[&a, &l, &h]);
                assert_eq!(back, g);
                assert!(a.is_identity() || a.syllables().iter().all(|s| s.vertex == v));
                let link = ctx.graph().neighborhood(v, Neighborhood::Link).unwrap();
                assert!(l.support().iter().all(|u| link.contains(u)));
                if !h.is_identity() {
                    let star = ctx.graph().neighborhood(v, Neighborhood::Star).unwrap();
                    assert!(!star.contains(&h.syllables()[0].vertex));
                }
            }
        }
    }

    #[test]
    fn retraction_examples() {
        // g*t*g over Z2*Z4 retracted onto the Z4 factor gives t
        let free = contexts::free_product(&[2, 4]);
        let g = free.generator(0, 1).unwrap();
        let t = free.generator(1, 1).unwrap();
        let w = free.product(&[&g, &t, &g]);
        let keep = BTreeSet::from([1]);
        assert_eq!(free.retraction(&w, &keep), t);
        assert!(free.retraction(&free.identity(), &keep).is_identity());

        let ctx = p4_z2();
        let b1b3 = ctx.reduce(&[syl(&ctx, 0, 1), syl(&ctx, 2, 1)]).unwrap();
        let r = ctx.retraction(&b1b3, &BTreeSet::from([0]));
        assert_eq!(r.syllables(), &[syl(&ctx, 0, 1)]);
    }

    #[test]
    fn reduce_is_idempotent_and_sound() {
        let ctx = p4_z2();
        let mut rng = oracle::rng(11);
        for _ in 0..300 {
            let raw = oracle::random_raw(&ctx, 12, &mut rng);
            let g = ctx.reduce(&raw).unwrap();
            assert!(ctx.is_reduced(g.syllables()).unwrap());
            assert_eq!(ctx.reduce(g.syllables()).unwrap(), g);
        }
    }

    #[test]
    fn reduced_agrees_with_definition_oracle_exhaustively() {
        // all sequences of length <= 4 over P4 with Z2 vertex groups
        let ctx = p4_z2();
        let mut seqs: Vec<Vec<Syllable>> = vec![vec![]];
        for _ in 0..4 {
            let mut next = Vec::new();
            for s in &seqs {
                if s.len() < 4 {
                    for v in 0..4 {
                        let mut t = s.clone();
                        t.push(syl(&ctx, v, 1));
                        next.push(t);
                    }
                }
            }
            seqs.extend(next.clone());
            seqs = seqs.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        }
        for seq in &seqs {
            assert_eq!(
                ctx.is_reduced(seq).unwrap(),
                oracle::def_reduced(&ctx, seq),
                "sequence {seq:?}"
            );
        }
    }

    #[test]
    fn parse_display_round_trip() {
        let ctx = contexts::free_product(&[2, 4]);
        let g = ctx.product(&[&ctx.generator(1, 3).unwrap(), &ctx.generator(0, 1).unwrap()]);
        let text = ctx.display(&g);
        assert_eq!(text, "t3@w1*t@w0");
        assert_eq!(ctx.parse_element(&text).unwrap(), g);
        assert_eq!(ctx.parse_element("e").unwrap(), ctx.identity());
    }
}
