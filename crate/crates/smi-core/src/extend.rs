//! Coupling extensions across free products and graph products.
//!
//! Starting from a strict system at one distinguished vertex `w`, the cocycle
//! extends to the whole graph product: vertex groups away from `w` act
//! trivially on `X` and map to their target-side copies, and everything else
//! follows from the cocycle identity. The extended coupling is realized on
//! `W x Gamma x X`, where `W` holds the minimal coset representatives of the
//! target modulo its `w`-factor, and the claimed fundamental domain is
//!
//! ```text
//! Ytilde = ({e} x X)  u  (Wtilde x (Y \ X))
//! ```
//!
//! with `Wtilde` one representative per link-subgroup orbit in `W` and `Y`
//! the base greedy domain. The verifiers here check, exhaustively on
//! truncated balls, that translates of `Ytilde` are disjoint, that it meets
//! every orbit, and how its partial measures grow.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use rayon::prelude::*;

use crate::coupling::{GrowthRecord, IndexClass};
use crate::enumerate::{ball, coset_reps_w, orbit_reps_wtilde, split_trailing_vertex, BallCap};
use crate::error::{Error, Result};
use crate::fingroup::{ElemId, FiniteGroup};
use crate::graph::{build_graph, Graph, Neighborhood, VertexId};
use crate::measure::SmiCocycleSystem;
use crate::oracle;
use crate::rat::rat_int;
use crate::word::{GraphProduct, GroupElement, Syllable};

/// A point of the extended coupling in target-group coordinates `(g, x)`.
pub type SigmaPoint = (GroupElement, usize);

/// A point of `Ytilde` in `W x Gamma x X` coordinates.
pub type YtPoint = (GroupElement, ElemId, usize);

/// An extension of a strict base system across a graph product.
#[derive(Debug, Clone)]
pub struct ExtendedSystem {
    h_ctx: GraphProduct,
    g_ctx: GraphProduct,
    w: VertexId,
    base: SmiCocycleSystem,
    base_y: BTreeSet<(ElemId, usize)>,
    reducible: bool,
    star_regime: bool,
    free_factor_trivial: bool,
    cap: BallCap,
}

/// Greedy source-action fundamental domain of the base coupling
/// `Gamma x X`, in enumeration order (identity slab first). Deliberately
/// does not require certification so that corrupted systems can be pushed
/// through the verifiers as negative controls.
fn greedy_base_domain(system: &SmiCocycleSystem) -> BTreeSet<(ElemId, usize)> {
    let gamma = system.target();
    let c = system.cocycle();
    let n = system.space().len();
    let mut domain = BTreeSet::new();
    let mut saturated = BTreeSet::new();
    for g in 0..gamma.order() {
        for x in 0..n {
            if saturated.contains(&(g, x)) {
                continue;
            }
            domain.insert((g, x));
            for l in 0..system.source().order() {
                saturated.insert((gamma.mul(g, gamma.inv(c.value(l, x))), c.action().apply(l, x)));
            }
        }
    }
    domain
}

/// Extends a strict system across a free product with a new factor.
pub fn extend_free(
    base: &SmiCocycleSystem,
    factor: &FiniteGroup,
    cap: BallCap,
) -> Result<ExtendedSystem> {
    base.require_certified()?;
    extend_free_impl(base, factor, cap)
}

/// Same construction without the strictness gate, for falsifiability
/// experiments: the verifiers are expected to fail on such systems.
pub fn extend_free_uncertified(
    base: &SmiCocycleSystem,
    factor: &FiniteGroup,
    cap: BallCap,
) -> Result<ExtendedSystem> {
    extend_free_impl(base, factor, cap)
}

fn extend_free_impl(
    base: &SmiCocycleSystem,
    factor: &FiniteGroup,
    cap: BallCap,
) -> Result<ExtendedSystem> {
    let graph = build_graph(&["g", "w"], &[])?;
    let h_ctx = GraphProduct::new(graph.clone(), vec![factor.clone(), base.source().clone()])?;
    let g_ctx = GraphProduct::new(graph, vec![factor.clone(), base.target().clone()])?;
    Ok(ExtendedSystem {
        h_ctx,
        g_ctx,
        w: 1,
        base: base.clone(),
        base_y: greedy_base_domain(base),
        reducible: false,
        star_regime: false,
        free_factor_trivial: factor.is_trivial(),
        cap,
    })
}

/// Extends a strict base system sitting at vertex `w` of a graph product.
/// Source and target vertex groups must agree away from `w`. Reducible
/// graphs are accepted and flagged; when the whole graph is the star of `w`
/// the orbit representatives collapse and the index stays finite.
pub fn extend_graph(
    theta: &Graph,
    h_groups: Vec<FiniteGroup>,
    g_groups: Vec<FiniteGroup>,
    w: VertexId,
    base: &SmiCocycleSystem,
    cap: BallCap,
) -> Result<ExtendedSystem> {
    base.require_certified()?;
    extend_graph_impl(theta, h_groups, g_groups, w, base, cap)
}

/// Negative-control variant of [`extend_graph`] without the strictness gate.
pub fn extend_graph_uncertified(
    theta: &Graph,
    h_groups: Vec<FiniteGroup>,
    g_groups: Vec<FiniteGroup>,
    w: VertexId,
    base: &SmiCocycleSystem,
    cap: BallCap,
) -> Result<ExtendedSystem> {
    extend_graph_impl(theta, h_groups, g_groups, w, base, cap)
}

fn extend_graph_impl(
    theta: &Graph,
    h_groups: Vec<FiniteGroup>,
    g_groups: Vec<FiniteGroup>,
    w: VertexId,
    base: &SmiCocycleSystem,
    cap: BallCap,
) -> Result<ExtendedSystem> {
    if w >= theta.vertex_count() {
        return Err(Error::UnknownVertex(format!("#{w}")));
    }
    for v in 0..theta.vertex_count() {
        if v != w && !h_groups[v].same_table(&g_groups[v]) {
            return Err(Error::VertexGroupMismatch { vertex: theta.vertex_name(v).to_string() });
        }
    }
    if !h_groups[w].same_table(base.source()) || !g_groups[w].same_table(base.target()) {
        return Err(Error::GroupMismatch(format!(
            "base system does not match the vertex groups at `{}`",
            theta.vertex_name(w)
        )));
    }
    let (irreducible, _) = theta.is_irreducible()?;
    let star = theta.neighborhood(w, Neighborhood::Star)?;
    let star_regime = star.len() == theta.vertex_count();
    let h_ctx = GraphProduct::new(theta.clone(), h_groups)?;
    let g_ctx = GraphProduct::new(theta.clone(), g_groups)?;
    Ok(ExtendedSystem {
        h_ctx,
        g_ctx,
        w,
        base: base.clone(),
        base_y: greedy_base_domain(base),
        reducible: !irreducible,
        star_regime,
        free_factor_trivial: false,
        cap,
    })
}

/// Which of the disjointness cases a word falls into, by the triviality
/// pattern of its `a * l * h` split at the distinguished vertex.
fn case_id(a: bool, l: bool, h: bool) -> u8 {
    match (a, l, h) {
        (true, true, true) => 1,
        (false, true, true) => 2,
        (true, false, true) => 3,
        (true, true, false) => 4,
        (false, false, true) => 5,
        (true, false, false) => 6,
        (false, true, false) => 7,
        (false, false, false) => 0,
    }
}

/// Report of an exhaustive disjointness sweep.
#[derive(Debug, Clone)]
pub struct DisjointnessReport {
    pub r_words: usize,
    pub r_view: usize,
    pub words_checked: usize,
    pub points_checked: usize,
    pub checks: u64,
    /// Checks per case. Free extensions tally the three patterns that can
    /// occur without a link; graph extensions tally all seven.
    pub case_tally: Vec<(String, u64)>,
    pub violations: Vec<DisjointnessWitness>,
}

impl DisjointnessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A concrete violation: a nontrivial word moving a point of `Ytilde` back
/// into `Ytilde`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DisjointnessWitness {
    pub word: String,
    pub from_point: String,
    pub to_point: String,
}

/// Report of an exhaustive coverage sweep over an interior ball.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub r_interior: usize,
    pub r_search: usize,
    pub total_points: usize,
    pub covered_points: usize,
    pub fraction: BigRational,
    pub missed: Vec<String>,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.fraction.is_one()
    }
}

impl ExtendedSystem {
    pub fn source_context(&self) -> &GraphProduct {
        &self.h_ctx
    }

    pub fn target_context(&self) -> &GraphProduct {
        &self.g_ctx
    }

    pub fn distinguished_vertex(&self) -> VertexId {
        self.w
    }

    pub fn base(&self) -> &SmiCocycleSystem {
        &self.base
    }

    pub fn reducible(&self) -> bool {
        self.reducible
    }

    pub fn star_regime(&self) -> bool {
        self.star_regime
    }

    pub fn free_factor_trivial(&self) -> bool {
        self.free_factor_trivial
    }

    pub fn cap(&self) -> BallCap {
        self.cap
    }

    /// True when the distinguished vertex has an empty link (free-product
    /// shape); the case tally then uses the three-case labels.
    pub fn free_mode(&self) -> bool {
        self.h_ctx
            .graph()
            .neighborhood(self.w, Neighborhood::Link)
            .map(|l| l.is_empty())
            .unwrap_or(false)
    }

    /// Base coupling index: the measure of the base greedy domain.
    pub fn base_index(&self) -> BigRational {
        self.base_y.iter().map(|&(_, x)| self.base.space().weight(x).clone()).sum()
    }

    /// The base domain minus its identity slab, as `(gamma, x)` pairs.
    pub fn y_minus_x(&self) -> BTreeSet<(ElemId, usize)> {
        self.base_y.iter().copied().filter(|&(g, _)| g != 0).collect()
    }

    /// Value of the extended cocycle on one syllable at a point.
    fn syllable_value(&self, s: Syllable, x: usize) -> GroupElement {
        if s.vertex == self.w {
            let v = self.base.cocycle().value(s.elem, x);
            if v == 0 {
                self.g_ctx.identity()
            } else {
                self.g_ctx.generator(self.w, v).expect("cocycle values live in the target group")
            }
        } else {
            self.g_ctx.generator(s.vertex, s.elem).expect("shared vertex groups")
        }
    }

    /// Evaluates the extended cocycle and the induced action on `X` along an
    /// arbitrary word, right to left through the cocycle identity. The value
    /// is independent of the representative; `well_definedness_sweep`
    /// spot-checks that.
    pub fn alpha_and_act_word(&self, seq: &[Syllable], x: usize) -> (GroupElement, usize) {
        let mut acc = self.g_ctx.identity();
        let mut cx = x;
        for &s in seq.iter().rev() {
            let value = self.syllable_value(s, cx);
            acc = self.g_ctx.multiply(&value, &acc);
            if s.vertex == self.w {
                cx = self.base.cocycle().action().apply(s.elem, cx);
            }
        }
        (acc, cx)
    }

    /// The extended cocycle on a source element.
    pub fn alpha_tilde(&self, h: &GroupElement, x: usize) -> GroupElement {
        self.alpha_and_act_word(h.syllables(), x).0
    }

    /// The induced action of the source group on `X` (only the `w`-factor
    /// acts).
    pub fn act_on_x(&self, h: &GroupElement, x: usize) -> usize {
        self.alpha_and_act_word(h.syllables(), x).1
    }

    /// The source action in target coordinates:
    /// `h . (g, x) = (g * alpha~(h, x)^{-1}, h.x)`.
    pub fn act_sigma(&self, h: &GroupElement, p: &SigmaPoint) -> SigmaPoint {
        let (value, newx) = self.alpha_and_act_word(h.syllables(), p.1);
        (self.g_ctx.multiply(&p.0, &self.g_ctx.invert(&value)), newx)
    }

    /// Splits a target element as `w_rep * gamma` along the trailing
    /// `w`-vertex syllable.
    pub fn decompose(&self, g: &GroupElement) -> (GroupElement, ElemId) {
        split_trailing_vertex(&self.g_ctx, g, self.w)
    }

    /// Target coordinates of a `W x Gamma x X` point.
    pub fn sigma_of(&self, p: &YtPoint) -> SigmaPoint {
        let g = if p.1 == 0 {
            p.0.clone()
        } else {
            self.g_ctx
                .multiply(&p.0, &self.g_ctx.generator(self.w, p.1).expect("gamma element"))
        };
        (g, p.2)
    }

    /// Coset representatives `W` inside the target ball.
    pub fn w_elements(&self, r: usize) -> Result<Vec<GroupElement>> {
        coset_reps_w(&self.g_ctx, self.w, r, self.cap)
    }

    /// Orbit representatives `Wtilde` inside the target ball. Orbits of the
    /// link subgroup are recognized by bucketing on the retraction away from
    /// the link (invariant under right link multiplication) and deciding
    /// membership by the support of `u^{-1} u'`.
    pub fn wtilde_elements(&self, r: usize) -> Result<Vec<GroupElement>> {
        let w_set = self.w_elements(r)?;
        let link = self.g_ctx.graph().neighborhood(self.w, Neighborhood::Link)?;
        if link.is_empty() {
            return Ok(w_set);
        }
        let outside: BTreeSet<VertexId> = (0..self.g_ctx.graph().vertex_count())
            .filter(|v| !link.contains(v))
            .collect();
        let mut buckets: std::collections::BTreeMap<GroupElement, Vec<GroupElement>> =
            Default::default();
        for u in w_set {
            let key = self.g_ctx.retraction(&u, &outside);
            buckets.entry(key).or_default().push(u);
        }
        let mut reps = Vec::new();
        for (_, bucket) in buckets {
            reps.extend(orbit_reps_wtilde(&self.g_ctx, &bucket, self.w)?);
        }
        reps.sort();
        Ok(reps)
    }

    /// The claimed fundamental domain truncated at radius `r`:
    /// `({e} x X) u (Wtilde_ball(r) x (Y \ X))`, with its exact measure
    /// `1 + |Wtilde_ball(r)| * (mu(Y) - 1)`.
    pub fn build_ytilde(&self, r: usize) -> Result<(Vec<YtPoint>, BigRational)> {
        let wtilde = self.wtilde_elements(r)?;
        let y_minus_x = self.y_minus_x();
        let mut points: Vec<YtPoint> = Vec::new();
        for x in 0..self.base.space().len() {
            points.push((self.g_ctx.identity(), 0, x));
        }
        let mut measure = rat_int(1);
        for wt in &wtilde {
            for &(g, x) in &y_minus_x {
                points.push((wt.clone(), g, x));
                measure += self.base.space().weight(x);
            }
        }
        Ok((points, measure))
    }

    fn point_name(&self, p: &YtPoint) -> String {
        format!(
            "({}, {}, {})",
            self.g_ctx.display(&p.0),
            self.base.target().elem_name(p.1),
            self.base.space().name(p.2)
        )
    }

    /// Membership oracle for the untruncated `Ytilde`, complete for target
    /// coordinates up to `radius`.
    fn ytilde_oracle(&self, radius: usize) -> Result<YtildeOracle> {
        Ok(YtildeOracle {
            wtilde: self.wtilde_elements(radius)?.into_iter().collect(),
            y_minus_x: self.y_minus_x(),
            radius,
        })
    }

    /// Exhaustive disjointness sweep: every nontrivial source word of
    /// syllable length at most `r_words` against every point of `Ytilde`
    /// whose target coordinate fits in `r_view - r_words` (so all translates
    /// stay where the membership oracle is complete). Any translate landing
    /// back in `Ytilde` is returned as a witness.
    pub fn verify_disjointness(&self, r_words: usize, r_view: usize) -> Result<DisjointnessReport> {
        if r_view < r_words + 1 {
            return Err(Error::ViewTooSmall { needed: r_words + 1, have: r_view });
        }
        let ytilde_radius = r_view - r_words;
        let oracle = self.ytilde_oracle(r_view)?;
        let words: Vec<GroupElement> = ball(&self.h_ctx, r_words, self.cap)?
            .into_iter()
            .filter(|h| !h.is_identity())
            .collect();
        let (ytilde, _) = self.build_ytilde(ytilde_radius.saturating_sub(1))?;
        let tested: Vec<YtPoint> = ytilde
            .into_iter()
            .filter(|p| self.sigma_of(p).0.len() <= ytilde_radius)
            .collect();
        let free = self.free_mode();
        let results: Vec<(u8, Vec<DisjointnessWitness>)> = words
            .par_iter()
            .map(|h| {
                let (a, l, hh) = self
                    .h_ctx
                    .alh_decompose(h, self.w)
                    .expect("valid vertex");
                let case = case_id(!a.is_identity(), !l.is_identity(), !hh.is_identity());
                let mut violations = Vec::new();
                for p in &tested {
                    let image = self.act_sigma(h, &self.sigma_of(p));
                    let (w_rep, gamma) = self.decompose(&image.0);
                    if oracle.contains(&w_rep, gamma, image.1) {
                        violations.push(DisjointnessWitness {
                            word: self.h_ctx.display(h),
                            from_point: self.point_name(p),
                            to_point: self.point_name(&(w_rep, gamma, image.1)),
                        });
                    }
                }
                (case, violations)
            })
            .collect();
        let mut tally: std::collections::BTreeMap<u8, u64> = Default::default();
        let mut violations = Vec::new();
        for (case, v) in results {
            *tally.entry(case).or_insert(0) += tested.len() as u64;
            violations.extend(v);
        }
        violations.sort();
        let case_tally = tally
            .into_iter()
            .map(|(c, n)| (case_label(c, free), n))
            .collect();
        Ok(DisjointnessReport {
            r_words,
            r_view,
            words_checked: words.len(),
            points_checked: tested.len(),
            checks: words.len() as u64 * tested.len() as u64,
            case_tally,
            violations,
        })
    }

    /// Exhaustive coverage sweep: every point with target coordinate inside
    /// the interior ball must be reachable from `Ytilde` by a source word of
    /// length at most `r_search`. Reverse breadth-first search from each
    /// point, probing the membership oracle at every state.
    pub fn verify_coverage(&self, r_interior: usize, r_search: usize) -> Result<CoverageReport> {
        self.coverage_impl(r_interior, r_search, &BTreeSet::new())
    }

    /// Coverage with points removed from `Ytilde`, the negative control for
    /// the coverage verifier.
    pub fn verify_coverage_excluding(
        &self,
        r_interior: usize,
        r_search: usize,
        excluded: &[YtPoint],
    ) -> Result<CoverageReport> {
        let excluded: BTreeSet<YtPoint> = excluded.iter().cloned().collect();
        self.coverage_impl(r_interior, r_search, &excluded)
    }

    fn coverage_impl(
        &self,
        r_interior: usize,
        r_search: usize,
        excluded: &BTreeSet<YtPoint>,
    ) -> Result<CoverageReport> {
        let max_cocycle_len = self.max_cocycle_syllables();
        let margin = (max_cocycle_len + 1) * r_interior;
        if r_search < r_interior + margin {
            return Err(Error::MarginViolation { needed: r_interior + margin, have: r_search });
        }
        let oracle_radius = r_interior + r_search;
        let oracle = self.ytilde_oracle(oracle_radius)?;
        let interior: Vec<SigmaPoint> = ball(&self.g_ctx, r_interior, self.cap)?
            .into_iter()
            .flat_map(|g| (0..self.base.space().len()).map(move |x| (g.clone(), x)))
            .collect();
        let letters: Vec<GroupElement> = {
            let mut out = Vec::new();
            for v in 0..self.h_ctx.graph().vertex_count() {
                for e in 1..self.h_ctx.group(v).order() {
                    out.push(self.h_ctx.generator(v, e).expect("letter"));
                }
            }
            out
        };
        let in_ytilde = |p: &SigmaPoint| -> bool {
            let (w_rep, gamma) = self.decompose(&p.0);
            oracle.contains(&w_rep, gamma, p.1)
                && !excluded.contains(&(w_rep, gamma, p.1))
        };
        let covered_flags: Vec<bool> = interior
            .par_iter()
            .map(|start| {
                if in_ytilde(start) {
                    return true;
                }
                let mut seen: BTreeSet<SigmaPoint> = BTreeSet::from([start.clone()]);
                let mut frontier = vec![start.clone()];
                for _ in 0..r_search {
                    let mut next = Vec::new();
                    for p in &frontier {
                        for letter in &letters {
                            let q = self.act_sigma(letter, p);
                            if q.0.len() > oracle_radius || !seen.insert(q.clone()) {
                                continue;
                            }
                            if in_ytilde(&q) {
                                return true;
                            }
                            next.push(q);
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    frontier = next;
                }
                false
            })
            .collect();
        let covered_points = covered_flags.iter().filter(|&&c| c).count();
        let missed: Vec<String> = interior
            .iter()
            .zip(&covered_flags)
            .filter(|(_, &c)| !c)
            .map(|(p, _)| format!("({}, {})", self.g_ctx.display(&p.0), self.base.space().name(p.1)))
            .collect();
        let fraction = BigRational::new((covered_points as i64).into(), (interior.len() as i64).into());
        Ok(CoverageReport {
            r_interior,
            r_search,
            total_points: interior.len(),
            covered_points,
            fraction,
            missed,
        })
    }

    /// Longest cocycle value produced by a single source syllable.
    fn max_cocycle_syllables(&self) -> usize {
        let mut max = 0;
        for v in 0..self.h_ctx.graph().vertex_count() {
            for e in 1..self.h_ctx.group(v).order() {
                for x in 0..self.base.space().len() {
                    let s = self.h_ctx.syllable(v, e).expect("letter");
                    max = max.max(self.syllable_value(s, x).len());
                }
            }
        }
        max
    }

    /// Partial measures of `Ytilde` per radius with the index dichotomy:
    /// constant 1 exactly when the base index is 1; in the star regime the
    /// orbit representatives collapse and the measure stays at the base
    /// index; otherwise the partial measures grow without bound.
    pub fn index_growth(&self, radii: &[usize]) -> Result<GrowthRecord> {
        let mut partials = Vec::with_capacity(radii.len());
        for &r in radii {
            let (_, measure) = self.build_ytilde(r)?;
            partials.push(measure);
        }
        let base_index = self.base_index();
        let class = if base_index.is_one() {
            IndexClass::ConstantOne
        } else if self.star_regime {
            IndexClass::Stable(base_index)
        } else {
            let max_r = radii.iter().copied().max().unwrap_or(0);
            if self.wtilde_elements(max_r)?.len() > 1 {
                IndexClass::Growing
            } else {
                IndexClass::Undetermined
            }
        };
        Ok(GrowthRecord { radii: radii.to_vec(), partials, class })
    }

    /// Strictness of the extended cocycle, checked exhaustively on a source
    /// ball: `alpha~(h, x) = e` for some `h != e` is returned as a witness.
    pub fn smi_ball_check(&self, r: usize) -> Result<Option<(GroupElement, usize)>> {
        for h in ball(&self.h_ctx, r, self.cap)? {
            if h.is_identity() {
                continue;
            }
            for x in 0..self.base.space().len() {
                if self.alpha_tilde(&h, x).is_identity() {
                    return Ok(Some((h, x)));
                }
            }
        }
        Ok(None)
    }

    /// Spot-check that the extended cocycle does not depend on the chosen
    /// word representative: random elements, random rewrites of their words,
    /// equal values at every point.
    pub fn well_definedness_sweep(&self, seed: u64, samples: usize, reps: usize) -> Result<()> {
        let mut rng = oracle::rng(seed);
        for _ in 0..samples {
            let raw = oracle::random_raw(&self.h_ctx, 8, &mut rng);
            let canonical = self.h_ctx.reduce(&raw)?;
            for _ in 0..reps {
                let mut padded = canonical.syllables().to_vec();
                for _ in 0..rng.gen_range(0..3usize) {
                    let pos = rng.gen_range(0..=padded.len());
                    let v = rng.gen_range(0..self.h_ctx.graph().vertex_count());
                    let e = rng.gen_range(1..self.h_ctx.group(v).order());
                    let s = self.h_ctx.syllable(v, e)?;
                    let s_inv = self.h_ctx.syllable(v, self.h_ctx.group(v).inv(e))?;
                    padded.insert(pos, s_inv);
                    padded.insert(pos, s);
                }
                let rewritten = oracle::random_walk(&self.h_ctx, &padded, 24, &mut rng);
                for x in 0..self.base.space().len() {
                    let got = self.alpha_and_act_word(&rewritten, x);
                    let want = self.alpha_and_act_word(canonical.syllables(), x);
                    if got != want {
                        return Err(Error::CocycleIdentityFails {
                            g: 0,
                            h: 0,
                            point: format!(
                                "representative {:?} of {} at {}",
                                rewritten,
                                self.h_ctx.display(&canonical),
                                self.base.space().name(x)
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn case_label(case: u8, free: bool) -> String {
    if free {
        // only the patterns without a link part occur; use the three-case names
        match case {
            3 => "case-1".into(),
            5 => "case-2".into(),
            6 => "case-3".into(),
            other => format!("case-{other}-unexpected"),
        }
    } else {
        format!("case-{case}")
    }
}

/// Membership test for the untruncated `Ytilde`, complete up to a radius.
struct YtildeOracle {
    wtilde: BTreeSet<GroupElement>,
    y_minus_x: BTreeSet<(ElemId, usize)>,
    radius: usize,
}

impl YtildeOracle {
    fn contains(&self, w_rep: &GroupElement, gamma: ElemId, x: usize) -> bool {
        debug_assert!(
            w_rep.len() <= self.radius,
            "oracle probed beyond its radius: {} > {}",
            w_rep.len(),
            self.radius
        );
        if w_rep.is_identity() && gamma == 0 {
            return true;
        }
        self.wtilde.contains(w_rep) && self.y_minus_x.contains(&(gamma, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{z2_into_z4, SmiCocycleSystem};
    use std::collections::BTreeMap;

    fn z(n: usize) -> FiniteGroup {
        FiniteGroup::cyclic(n).unwrap()
    }

    fn free_z2_over_z2z4() -> ExtendedSystem {
        extend_free(&z2_into_z4(), &z(2), BallCap::default()).unwrap()
    }

    /// Corrupted base: the cocycle table sends the involution to the
    /// identity, violating strictness.
    fn corrupted_base() -> SmiCocycleSystem {
        use crate::measure::{Cocycle, GroupAction, ProbSpace};
        let action = GroupAction::trivial(z(2), ProbSpace::point());
        let cocycle =
            Cocycle::from_generators(action, z(4), &BTreeMap::from([(1, vec![0])])).unwrap();
        SmiCocycleSystem::new(cocycle)
    }

    #[test]
    fn extend_free_validates_certification() {
        let err = extend_free(&corrupted_base(), &z(2), BallCap::default()).unwrap_err();
        assert!(matches!(err, Error::NotCertified(_)));
        assert!(extend_free_uncertified(&corrupted_base(), &z(2), BallCap::default()).is_ok());
    }

    #[test]
    fn trivial_free_factor_is_flagged() {
        let sys = extend_free(&z2_into_z4(), &FiniteGroup::trivial(), BallCap::default()).unwrap();
        assert!(sys.free_factor_trivial());
    }

    #[test]
    fn alpha_tilde_restriction_and_values() {
        let ext = free_z2_over_z2z4();
        // on the base factor it is the base cocycle
        let s = ext.source_context().generator(1, 1).unwrap();
        let val = ext.alpha_tilde(&s, 0);
        assert_eq!(ext.target_context().display(&val), "t2@w");
        // on the free factor it is the identity embedding
        let g = ext.source_context().generator(0, 1).unwrap();
        assert_eq!(ext.target_context().display(&ext.alpha_tilde(&g, 0)), "t@g");
        // alpha~(g * s, x) = g * t^2 via the cocycle identity
        let gs = ext.source_context().multiply(&g, &s);
        assert_eq!(ext.target_context().display(&ext.alpha_tilde(&gs, 0)), "t@g*t2@w");
    }

    #[test]
    fn equation_two_action_through_retraction() {
        // the induced action on X factors through the retraction to the
        // base vertex, exhaustively on a ball
        let ext = free_z2_over_z2z4();
        let keep = BTreeSet::from([1usize]);
        for h in ball(ext.source_context(), 4, BallCap::default()).unwrap() {
            let p = ext.source_context().retraction(&h, &keep);
            for x in 0..ext.base().space().len() {
                assert_eq!(ext.act_on_x(&h, x), ext.act_on_x(&p, x));
            }
        }
    }

    #[test]
    fn well_definedness_sweep_passes() {
        let ext = free_z2_over_z2z4();
        ext.well_definedness_sweep(17, 200, 3).unwrap();
        let graph_ext = p4_extension();
        graph_ext.well_definedness_sweep(23, 200, 3).unwrap();
    }

    #[test]
    fn smi_ball_check_finds_corruption() {
        let good = free_z2_over_z2z4();
        assert!(good.smi_ball_check(4).unwrap().is_none());
        let bad = extend_free_uncertified(&corrupted_base(), &z(2), BallCap::default()).unwrap();
        let witness = bad.smi_ball_check(2).unwrap();
        assert!(witness.is_some());
    }

    #[test]
    fn ytilde_measures_for_the_index_two_base() {
        let ext = free_z2_over_z2z4();
        assert_eq!(ext.base_index(), rat_int(2));
        // |W ball(1)| = 2 and |W ball(2)| = 5
        let (_, m1) = ext.build_ytilde(1).unwrap();
        assert_eq!(m1, rat_int(3));
        let (_, m2) = ext.build_ytilde(2).unwrap();
        assert_eq!(m2, rat_int(6));
    }

    #[test]
    fn identity_base_has_constant_partials() {
        let ext = extend_free(
            &SmiCocycleSystem::identity(&z(2)),
            &z(2),
            BallCap::default(),
        )
        .unwrap();
        let record = ext.index_growth(&[0, 2, 4, 6]).unwrap();
        assert!(record.partials.iter().all(|p| p.is_one()));
        assert_eq!(record.class, IndexClass::ConstantOne);
    }

    #[test]
    fn index_growth_matches_enumeration() {
        let ext = free_z2_over_z2z4();
        let record = ext.index_growth(&[0, 1, 2, 3]).unwrap();
        let expected: Vec<BigRational> =
            [2, 3, 6, 9].into_iter().map(rat_int).collect();
        assert_eq!(record.partials, expected);
        assert_eq!(record.class, IndexClass::Growing);
        // strictly increasing partials
        for pair in record.partials.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn free_disjointness_passes_and_tallies_three_cases() {
        let ext = free_z2_over_z2z4();
        let report = ext.verify_disjointness(4, 6).unwrap();
        assert!(report.passed());
        let labels: Vec<&str> = report.case_tally.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, vec!["case-1", "case-2", "case-3"]);
        assert!(report.case_tally.iter().all(|&(_, n)| n > 0));
    }

    #[test]
    fn disjointness_is_monotone_in_word_radius() {
        // same Ytilde truncation, growing word radius: the small sweep is a
        // subset of the large one, so a pass can never regress
        let ext = free_z2_over_z2z4();
        let small = ext.verify_disjointness(2, 4).unwrap();
        let large = ext.verify_disjointness(4, 6).unwrap();
        assert!(small.passed() && large.passed());
        assert_eq!(small.points_checked, large.points_checked);
        assert!(small.words_checked <= large.words_checked);
        assert!(small.checks <= large.checks);
    }

    #[test]
    fn corrupted_cocycle_fails_disjointness_with_witness() {
        let bad = extend_free_uncertified(&corrupted_base(), &z(2), BallCap::default()).unwrap();
        let report = bad.verify_disjointness(2, 5).unwrap();
        assert!(!report.passed());
        let w = &report.violations[0];
        assert!(!w.word.is_empty());
    }

    #[test]
    fn view_too_small_is_an_error() {
        let ext = free_z2_over_z2z4();
        assert!(matches!(
            ext.verify_disjointness(4, 4),
            Err(Error::ViewTooSmall { .. })
        ));
    }

    #[test]
    fn free_coverage_is_exactly_one() {
        let ext = free_z2_over_z2z4();
        let report = ext.verify_coverage(2, 6).unwrap();
        assert_eq!(report.fraction, BigRational::one());
        assert!(report.missed.is_empty());
    }

    #[test]
    fn identity_base_coverage() {
        let ext = extend_free(
            &SmiCocycleSystem::identity(&z(2)),
            &z(2),
            BallCap::default(),
        )
        .unwrap();
        let report = ext.verify_coverage(3, 9).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn coverage_margin_is_enforced() {
        let ext = free_z2_over_z2z4();
        assert!(matches!(
            ext.verify_coverage(2, 3),
            Err(Error::MarginViolation { .. })
        ));
    }

    #[test]
    fn dropping_a_point_breaks_coverage() {
        let ext = free_z2_over_z2z4();
        let dropped: YtPoint = (ext.target_context().identity(), 0, 0);
        let report = ext.verify_coverage_excluding(1, 3, &[dropped]).unwrap();
        assert!(report.fraction < BigRational::one());
        assert!(!report.missed.is_empty());
    }

    fn p4_extension() -> ExtendedSystem {
        let theta = crate::contexts::p4_all_z2().graph().clone();
        let h_groups = vec![z(2), z(2), z(2), z(2)];
        let g_groups = vec![z(4), z(2), z(2), z(2)];
        extend_graph(&theta, h_groups, g_groups, 0, &z2_into_z4(), BallCap::default()).unwrap()
    }

    #[test]
    fn graph_extension_validations() {
        let theta = crate::contexts::p4_all_z2().graph().clone();
        // mismatched vertex group away from the base vertex
        let err = extend_graph(
            &theta,
            vec![z(2), z(2), z(2), z(2)],
            vec![z(4), z(4), z(2), z(2)],
            0,
            &z2_into_z4(),
            BallCap::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::VertexGroupMismatch { .. }));
        // base groups must match the vertex groups at w
        let err = extend_graph(
            &theta,
            vec![z(4), z(2), z(2), z(2)],
            vec![z(4), z(2), z(2), z(2)],
            0,
            &z2_into_z4(),
            BallCap::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::GroupMismatch(_)));
    }

    #[test]
    fn reducible_graphs_are_flagged() {
        let p3 = crate::contexts::all_z2(&["v1", "v2", "v3"], &[("v1", "v2"), ("v2", "v3")]);
        let ext = extend_graph(
            p3.graph(),
            vec![z(2), z(2), z(2)],
            vec![z(2), z(2), z(2)],
            0,
            &SmiCocycleSystem::identity(&z(2)),
            BallCap::default(),
        )
        .unwrap();
        assert!(ext.reducible());
        assert!(!ext.star_regime());
    }

    #[test]
    fn star_regime_reports_the_stable_index()  {
        // whole graph equals the star of the center: Wtilde collapses
        let star = crate::contexts::all_z2(
            &["c", "a", "b", "d"],
            &[("c", "a"), ("c", "b"), ("c", "d")],
        );
        let groups_h: Vec<FiniteGroup> = vec![z(2), z(2), z(2), z(2)];
        let mut groups_g = groups_h.clone();
        groups_g[0] = z(4);
        let ext = extend_graph(star.graph(), groups_h, groups_g, 0, &z2_into_z4(), BallCap::default())
            .unwrap();
        assert!(ext.reducible());
        assert!(ext.star_regime());
        for r in 0..=3 {
            assert_eq!(ext.wtilde_elements(r).unwrap().len(), 1);
        }
        let record = ext.index_growth(&[0, 1, 2, 3]).unwrap();
        assert!(record.partials.iter().all(|p| *p == rat_int(2)));
        assert_eq!(record.class, IndexClass::Stable(rat_int(2)));
    }

    #[test]
    fn graph_disjointness_all_seven_cases() {
        let ext = p4_extension();
        let report = ext.verify_disjointness(3, 6).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);
        assert_eq!(report.case_tally.len(), 7);
        assert!(report.case_tally.iter().all(|&(_, n)| n > 0));
    }

    #[test]
    fn graph_coverage_is_exactly_one() {
        let ext = p4_extension();
        let report = ext.verify_coverage(2, 6).unwrap();
        assert!(report.passed(), "missed: {:?}", report.missed);
    }

    #[test]
    fn graph_index_growth() {
        let ext = p4_extension();
        let record = ext.index_growth(&[0, 1, 2, 3]).unwrap();
        assert_eq!(record.class, IndexClass::Growing);
        for pair in record.partials.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        // the partial measure formula: 1 + |Wtilde(r)| * (mu(Y) - 1)
        for (i, &r) in record.radii.iter().enumerate() {
            let wt = ext.wtilde_elements(r).unwrap().len() as i64;
            assert_eq!(record.partials[i], rat_int(1) + rat_int(wt) * (rat_int(2) - rat_int(1)));
        }
    }
}
