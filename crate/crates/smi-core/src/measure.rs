//! Finite measured data: probability spaces, measure-preserving actions and
//! group-valued cocycles, all with exact rational weights.
//!
//! A cocycle alpha : Lambda x X -> Gamma is *strict* when alpha(l, x) = e
//! forces l = e at every point; systems carrying that certificate are the
//! building blocks for every coupling construction in this crate.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fingroup::{ElemId, FiniteGroup};
use crate::rat::format_rat;

/// Finite probability space with named points and positive rational weights
/// summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbSpace {
    names: Vec<String>,
    weights: Vec<BigRational>,
}

/// Validates point weights: positive, summing to exactly 1.
pub fn make_space(names: Vec<String>, weights: Vec<BigRational>) -> Result<ProbSpace> {
    if names.is_empty() || names.len() != weights.len() {
        return Err(Error::EmptySpace);
    }
    let mut sum = BigRational::zero();
    for (name, w) in names.iter().zip(&weights) {
        if !w.is_positive() {
            return Err(Error::NonPositiveWeight { point: name.clone(), weight: format_rat(w) });
        }
        sum += w;
    }
    if !sum.is_one() {
        return Err(Error::WeightSum { got: format_rat(&sum) });
    }
    Ok(ProbSpace { names, weights })
}

impl ProbSpace {
    /// Uniform space on `n` points named `x0..`.
    pub fn uniform(n: usize) -> Result<ProbSpace> {
        let names = (0..n).map(|i| format!("x{i}")).collect();
        let w = BigRational::new(1.into(), (n as i64).into());
        make_space(names, vec![w; n])
    }

    pub fn point() -> ProbSpace {
        Self::uniform(1).expect("one point")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weight(&self, x: usize) -> &BigRational {
        &self.weights[x]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    /// Product space with multiplied weights, point `(a, b)` at `a * other.len() + b`.
    pub fn product(&self, other: &ProbSpace) -> ProbSpace {
        let mut names = Vec::with_capacity(self.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for a in 0..self.len() {
            for b in 0..other.len() {
                names.push(format!("{},{}", self.names[a], other.names[b]));
                weights.push(&self.weights[a] * &other.weights[b]);
            }
        }
        ProbSpace { names, weights }
    }
}

/// A measure-preserving action of a finite group on a [`ProbSpace`],
/// stored as one permutation per group element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    group: FiniteGroup,
    space: ProbSpace,
    perm: Vec<Vec<usize>>,
}

impl GroupAction {
    /// Builds from a full table `perm[g][x]`, validating permutations, weight
    /// preservation, the action law and triviality of the identity.
    pub fn from_table(group: FiniteGroup, space: ProbSpace, perm: Vec<Vec<usize>>) -> Result<Self> {
        if perm.len() != group.order() {
            return Err(Error::Config(format!(
                "action table has {} rows for group of order {}",
                perm.len(),
                group.order()
            )));
        }
        let n = space.len();
        for (g, row) in perm.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!("action row {g} has length {}", row.len())));
            }
            let mut hit = vec![usize::MAX; n];
            for (x, &y) in row.iter().enumerate() {
                if y >= n {
                    return Err(Error::UnknownPoint(format!("#{y}")));
                }
                if hit[y] != usize::MAX {
                    return Err(Error::NotAPermutation { elem: g, p: hit[y], q: x, image: y });
                }
                hit[y] = x;
                if space.weight(x) != space.weight(y) {
                    return Err(Error::NotWeightPreserving {
                        elem: g,
                        from: space.name(x).to_string(),
                        wfrom: format_rat(space.weight(x)),
                        to: space.name(y).to_string(),
                        wto: format_rat(space.weight(y)),
                    });
                }
            }
        }
        for x in 0..n {
            if perm[0][x] != x {
                return Err(Error::ActionLawFails { g: 0, h: 0, point: space.name(x).to_string() });
            }
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                for x in 0..n {
                    if perm[group.mul(g, h)][x] != perm[g][perm[h][x]] {
                        return Err(Error::ActionLawFails {
                            g,
                            h,
                            point: space.name(x).to_string(),
                        });
                    }
                }
            }
        }
        Ok(GroupAction { group, space, perm })
    }

    /// Builds from generator images, extending along the Cayley graph.
    /// Fails if the generators do not generate or the extension is
    /// inconsistent, then validates as in [`Self::from_table`].
    pub fn from_generators(
        group: FiniteGroup,
        space: ProbSpace,
        gens: &BTreeMap<ElemId, Vec<usize>>,
    ) -> Result<Self> {
        let order = group.order();
        let n = space.len();
        let mut perm: Vec<Option<Vec<usize>>> = vec![None; order];
        perm[0] = Some((0..n).collect());
        for (&g, images) in gens {
            group.check_elem(g)?;
            if images.len() != n {
                return Err(Error::Config(format!("generator {g} image has length {}", images.len())));
            }
            if g == 0 {
                continue;
            }
            perm[g] = Some(images.clone());
        }
        let mut frontier: Vec<ElemId> =
            perm.iter().enumerate().filter(|(_, p)| p.is_some()).map(|(g, _)| g).collect();
        while let Some(g) = frontier.pop() {
            for (&s, _) in gens {
                let gs = group.mul(g, s);
                let composed: Vec<usize> = {
                    let pg = perm[g].as_ref().expect("frontier rows are filled");
                    let ps = perm[s].as_ref().expect("generator rows are filled");
                    (0..n).map(|x| pg[ps[x]]).collect()
                };
                match &perm[gs] {
                    None => {
                        perm[gs] = Some(composed);
                        frontier.push(gs);
                    }
                    Some(existing) => {
                        if *existing != composed {
                            let x = (0..n).find(|&x| existing[x] != composed[x]).expect("differs");
                            return Err(Error::ActionLawFails {
                                g,
                                h: s,
                                point: space.name(x).to_string(),
                            });
                        }
                    }
                }
            }
        }
        if let Some(g) = perm.iter().position(|p| p.is_none()) {
            return Err(Error::NotGenerating(g));
        }
        Self::from_table(group, space, perm.into_iter().map(|p| p.expect("filled")).collect())
    }

    /// The trivial action of a group.
    pub fn trivial(group: FiniteGroup, space: ProbSpace) -> Self {
        let perm = vec![(0..space.len()).collect(); group.order()];
        GroupAction { group, space, perm }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn space(&self) -> &ProbSpace {
        &self.space
    }

    pub fn apply(&self, g: ElemId, x: usize) -> usize {
        self.perm[g][x]
    }
}

/// A cocycle into a finite target group: `table[lambda][x]` in Gamma with
/// `alpha(gh, x) = alpha(g, h.x) * alpha(h, x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle {
    action: GroupAction,
    target: FiniteGroup,
    table: Vec<Vec<ElemId>>,
}

impl Cocycle {
    /// Builds from generator rows, extending with the cocycle identity along
    /// the Cayley graph and rejecting any inconsistency (a violated group
    /// relation) with the element, generator and point that exposed it.
    pub fn from_generators(
        action: GroupAction,
        target: FiniteGroup,
        gens: &BTreeMap<ElemId, Vec<ElemId>>,
    ) -> Result<Self> {
        let order = action.group().order();
        let n = action.space().len();
        let mut table: Vec<Option<Vec<ElemId>>> = vec![None; order];
        table[0] = Some(vec![0; n]);
        for (&g, values) in gens {
            action.group().check_elem(g)?;
            if values.len() != n {
                return Err(Error::Config(format!(
                    "cocycle row for generator {g} has length {}",
                    values.len()
                )));
            }
            for &v in values {
                target.check_elem(v)?;
            }
            if g != 0 {
                table[g] = Some(values.clone());
            }
        }
        let mut frontier: Vec<ElemId> =
            table.iter().enumerate().filter(|(_, r)| r.is_some()).map(|(g, _)| g).collect();
        while let Some(g) = frontier.pop() {
            for (&s, _) in gens {
                let gs = action.group().mul(g, s);
                // alpha(g s, x) = alpha(g, s.x) * alpha(s, x)
                let composed: Vec<ElemId> = {
                    let rg = table[g].as_ref().expect("frontier rows are filled");
                    let rs = table[s].as_ref().expect("generator rows are filled");
                    (0..n).map(|x| target.mul(rg[action.apply(s, x)], rs[x])).collect()
                };
                match &table[gs] {
                    None => {
                        table[gs] = Some(composed);
                        frontier.push(gs);
                    }
                    Some(existing) => {
                        if let Some(x) = (0..n).find(|&x| existing[x] != composed[x]) {
                            return Err(Error::CocycleInconsistent {
                                elem: gs,
                                gen: s,
                                point: action.space().name(x).to_string(),
                                got: composed[x],
                                expected: existing[x],
                            });
                        }
                    }
                }
            }
        }
        if let Some(g) = table.iter().position(|r| r.is_none()) {
            return Err(Error::NotGenerating(g));
        }
        let table: Vec<Vec<ElemId>> = table.into_iter().map(|r| r.expect("filled")).collect();
        let cocycle = Cocycle { action, target, table };
        cocycle.validate_identity()?;
        Ok(cocycle)
    }

    /// Full table constructor, e.g. for composed systems.
    pub fn from_table(
        action: GroupAction,
        target: FiniteGroup,
        table: Vec<Vec<ElemId>>,
    ) -> Result<Self> {
        let cocycle = Cocycle { action, target, table };
        cocycle.validate_identity()?;
        Ok(cocycle)
    }

    /// Exhaustive check of the cocycle identity over all pairs and points.
    fn validate_identity(&self) -> Result<()> {
        let order = self.action.group().order();
        let n = self.action.space().len();
        for x in 0..n {
            if self.table[0][x] != 0 {
                return Err(Error::CocycleIdentityFails {
                    g: 0,
                    h: 0,
                    point: self.action.space().name(x).to_string(),
                });
            }
        }
        for g in 0..order {
            for h in 0..order {
                let gh = self.action.group().mul(g, h);
                for x in 0..n {
                    let lhs = self.table[gh][x];
                    let rhs = self.target.mul(self.table[g][self.action.apply(h, x)], self.table[h][x]);
                    if lhs != rhs {
                        return Err(Error::CocycleIdentityFails {
                            g,
                            h,
                            point: self.action.space().name(x).to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn source(&self) -> &FiniteGroup {
        self.action.group()
    }

    pub fn target(&self) -> &FiniteGroup {
        &self.target
    }

    pub fn value(&self, lambda: ElemId, x: usize) -> ElemId {
        self.table[lambda][x]
    }

    /// The identity cocycle of a group acting trivially on one point.
    pub fn identity(group: &FiniteGroup) -> Cocycle {
        let action = GroupAction::trivial(group.clone(), ProbSpace::point());
        let table = (0..group.order()).map(|g| vec![g]).collect();
        Cocycle { action, target: group.clone(), table }
    }
}

/// Outcome of the strictness check on a cocycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmiCheck {
    /// alpha(l, x) = e only for l = e.
    pub strict: bool,
    /// Counterexample (lambda, point) when not strict.
    pub counterexample: Option<(ElemId, usize)>,
    /// The equivalent formulation: l -> alpha(l, x) injective for each x.
    pub injective: bool,
    /// Counterexample (lambda, mu, point) when not injective.
    pub injectivity_counterexample: Option<(ElemId, ElemId, usize)>,
}

/// Checks strictness in both formulations; they agree for genuine cocycles.
pub fn is_smi_cocycle(c: &Cocycle) -> SmiCheck {
    let order = c.source().order();
    let n = c.action().space().len();
    let mut strict = true;
    let mut counterexample = None;
    'outer: for x in 0..n {
        for l in 1..order {
            if c.value(l, x) == 0 {
                strict = false;
                counterexample = Some((l, x));
                break 'outer;
            }
        }
    }
    let mut injective = true;
    let mut inj_cex = None;
    'outer2: for x in 0..n {
        for l in 0..order {
            for m in l + 1..order {
                if c.value(l, x) == c.value(m, x) {
                    injective = false;
                    inj_cex = Some((l, m, x));
                    break 'outer2;
                }
            }
        }
    }
    SmiCheck { strict, counterexample, injective, injectivity_counterexample: inj_cex }
}

/// A cocycle that has passed (or failed) the strictness certification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmiCocycleSystem {
    cocycle: Cocycle,
    certified: bool,
}

impl SmiCocycleSystem {
    /// Wraps a cocycle, recording whether it is strict.
    pub fn new(cocycle: Cocycle) -> Self {
        let certified = is_smi_cocycle(&cocycle).strict;
        SmiCocycleSystem { cocycle, certified }
    }

    /// Identity system Lambda -> Lambda over one point.
    pub fn identity(group: &FiniteGroup) -> Self {
        Self::new(Cocycle::identity(group))
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn require_certified(&self) -> Result<()> {
        if self.certified {
            Ok(())
        } else {
            let chk = is_smi_cocycle(&self.cocycle);
            let why = match chk.counterexample {
                Some((l, x)) => format!(
                    "alpha({}, {}) = e",
                    self.cocycle.source().elem_name(l),
                    self.cocycle.action().space().name(x)
                ),
                None => "not strict".to_string(),
            };
            Err(Error::NotCertified(why))
        }
    }

    pub fn source(&self) -> &FiniteGroup {
        self.cocycle.source()
    }

    pub fn target(&self) -> &FiniteGroup {
        self.cocycle.target()
    }

    pub fn space(&self) -> &ProbSpace {
        self.cocycle.action().space()
    }
}

/// Composition through a middle group: the composed system lives over the
/// product space, acts by `l.(x1, x2) = (l.x1, alpha1(l, x1).x2)` and has
/// cocycle `alpha(l, (x1, x2)) = alpha2(alpha1(l, x1), x2)`. Index
/// multiplies under this composition.
pub fn compose(sys1: &SmiCocycleSystem, sys2: &SmiCocycleSystem) -> Result<SmiCocycleSystem> {
    if sys1.target() != sys2.source() {
        return Err(Error::GroupMismatch(format!(
            "middle groups differ: target of the first has order {}, source of the second {}",
            sys1.target().order(),
            sys2.source().order()
        )));
    }
    let c1 = sys1.cocycle();
    let c2 = sys2.cocycle();
    let lambda = sys1.source().clone();
    let space = c1.action().space().product(c2.action().space());
    let n2 = c2.action().space().len();
    let enc = |x1: usize, x2: usize| x1 * n2 + x2;
    let mut perm = Vec::with_capacity(lambda.order());
    let mut table = Vec::with_capacity(lambda.order());
    for l in 0..lambda.order() {
        let mut row_perm = vec![0; space.len()];
        let mut row_coc = vec![0; space.len()];
        for x1 in 0..c1.action().space().len() {
            for x2 in 0..n2 {
                let mid = c1.value(l, x1);
                row_perm[enc(x1, x2)] = enc(c1.action().apply(l, x1), c2.action().apply(mid, x2));
                row_coc[enc(x1, x2)] = c2.value(mid, x2);
            }
        }
        perm.push(row_perm);
        table.push(row_coc);
    }
    let action = GroupAction::from_table(lambda, space, perm)?;
    let cocycle = Cocycle::from_table(action, sys2.target().clone(), table)?;
    Ok(SmiCocycleSystem::new(cocycle))
}

/// Componentwise product system into the direct product of the targets.
pub fn direct_product(sys_a: &SmiCocycleSystem, sys_b: &SmiCocycleSystem) -> Result<SmiCocycleSystem> {
    let ca = sys_a.cocycle();
    let cb = sys_b.cocycle();
    let lambda = sys_a.source().direct_product(sys_b.source());
    let gamma = sys_a.target().direct_product(sys_b.target());
    let space = ca.action().space().product(cb.action().space());
    let nb = cb.action().space().len();
    let ob = sys_b.source().order();
    let tb = sys_b.target().order();
    let enc_x = |x1: usize, x2: usize| x1 * nb + x2;
    let mut perm = Vec::with_capacity(lambda.order());
    let mut table = Vec::with_capacity(lambda.order());
    for l in 0..lambda.order() {
        let (la, lb) = (l / ob, l % ob);
        let mut row_perm = vec![0; space.len()];
        let mut row_coc = vec![0; space.len()];
        for x1 in 0..ca.action().space().len() {
            for x2 in 0..nb {
                row_perm[enc_x(x1, x2)] = enc_x(ca.action().apply(la, x1), cb.action().apply(lb, x2));
                row_coc[enc_x(x1, x2)] = ca.value(la, x1) * tb + cb.value(lb, x2);
            }
        }
        perm.push(row_perm);
        table.push(row_coc);
    }
    let action = GroupAction::from_table(lambda, space, perm)?;
    let cocycle = Cocycle::from_table(action, gamma, table)?;
    Ok(SmiCocycleSystem::new(cocycle))
}

/// The standard small example: Z2 -> Z4 over one point, sending the
/// involution to the square of the generator. Strict with index 2.
pub fn z2_into_z4() -> SmiCocycleSystem {
    let z2 = FiniteGroup::cyclic(2).expect("2 > 0");
    let z4 = FiniteGroup::cyclic(4).expect("4 > 0");
    let action = GroupAction::trivial(z2, ProbSpace::point());
    let gens = BTreeMap::from([(1, vec![2])]);
    let cocycle = Cocycle::from_generators(action, z4, &gens).expect("s^2 = e maps to t^4 = e");
    SmiCocycleSystem::new(cocycle)
}
