//! Identity-fixing map germs and invariant measures on them.
//!
//! The space of maps `f : Lambda -> Gamma` with `f(e) = e` carries the
//! source action `(l . f)(x) = f(x l) f(l)^{-1}`. A finitely supported
//! invariant probability measure on it is a randomorphism; supported on
//! injective germs it is a randembedding. Strict cocycle systems and
//! randembeddings translate into each other: point `x` becomes the germ
//! `l -> alpha(l, x)` with weight `mu(x)`, and back, a germ measure becomes
//! the system with `alpha(l, f) = f(l)` over the support.
//!
//! Germ domains are balls of the source group; for a finite source the full
//! group is the natural domain and every check below is exact. Acting by
//! `l` shrinks a partial domain to `{x : x l in dom}`, so invariance is
//! compared on common domains.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fingroup::{ElemId, FiniteGroup};
use crate::measure::{Cocycle, GroupAction, SmiCocycleSystem};
use crate::rat::{format_rat, total_variation};

/// A partial identity-fixing map from the source to the target group.
/// `values[x]` is `f(x)` for domain elements, `None` outside the domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MapGerm {
    values: Vec<Option<ElemId>>,
}

impl MapGerm {
    /// Total germ over the whole finite source group.
    pub fn full(source: &FiniteGroup, images: Vec<ElemId>) -> Result<Self> {
        if images.len() != source.order() {
            return Err(Error::Config(format!(
                "expected {} images, got {}",
                source.order(),
                images.len()
            )));
        }
        if images[0] != 0 {
            return Err(Error::Config("germ must fix the identity".into()));
        }
        Ok(MapGerm { values: images.into_iter().map(Some).collect() })
    }

    /// Partial germ; the identity must be in the domain and fixed.
    pub fn partial(source: &FiniteGroup, values: Vec<Option<ElemId>>) -> Result<Self> {
        if values.len() != source.order() {
            return Err(Error::Config("values must cover the group index range".into()));
        }
        if values[0] != Some(0) {
            return Err(Error::Config("germ must fix the identity".into()));
        }
        Ok(MapGerm { values })
    }

    pub fn value(&self, x: ElemId) -> Option<ElemId> {
        self.values.get(x).copied().flatten()
    }

    pub fn domain(&self) -> impl Iterator<Item = ElemId> + '_ {
        self.values.iter().enumerate().filter_map(|(x, v)| v.map(|_| x))
    }

    pub fn has_full_domain(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }

    /// Injectivity on the domain.
    pub fn injective(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.values.iter().flatten().all(|&v| seen.insert(v))
    }

    /// Restriction to a smaller domain.
    fn restrict(&self, keep: &[bool]) -> MapGerm {
        MapGerm {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(x, v)| if keep[x] { *v } else { None })
                .collect(),
        }
    }

    pub fn describe(&self, source: &FiniteGroup, target: &FiniteGroup) -> String {
        let parts: Vec<String> = self
            .values
            .iter()
            .enumerate()
            .map(|(x, v)| match v {
                Some(y) => format!("{}->{}", source.elem_name(x), target.elem_name(*y)),
                None => format!("{}->?", source.elem_name(x)),
            })
            .collect();
        parts.join(", ")
    }
}

/// The source action on germs: `(l . f)(x) = f(x l) f(l)^{-1}`, defined on
/// the shrunken domain `{x : x l in dom(f)}`. Needs `l` itself in the
/// domain.
pub fn germ_act(
    source: &FiniteGroup,
    target: &FiniteGroup,
    l: ElemId,
    f: &MapGerm,
) -> Result<MapGerm> {
    let fl = f
        .value(l)
        .ok_or_else(|| Error::GermDomain(source.elem_name(l).to_string()))?;
    let fl_inv = target.inv(fl);
    let values: Vec<Option<ElemId>> = (0..source.order())
        .map(|x| f.value(source.mul(x, l)).map(|y| target.mul(y, fl_inv)))
        .collect();
    MapGerm::partial(source, values)
}

/// A finitely supported probability measure on germs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GermMeasure {
    source: FiniteGroup,
    target: FiniteGroup,
    support: Vec<MapGerm>,
    weights: Vec<BigRational>,
}

impl GermMeasure {
    /// Builds a measure, merging equal germs and validating the weights.
    pub fn new(
        source: FiniteGroup,
        target: FiniteGroup,
        germs: Vec<(MapGerm, BigRational)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<MapGerm, BigRational> = BTreeMap::new();
        for (germ, weight) in germs {
            *merged.entry(germ).or_insert_with(BigRational::zero) += weight;
        }
        let mut support = Vec::new();
        let mut weights = Vec::new();
        let mut sum = BigRational::zero();
        for (germ, weight) in merged {
            if !weight.is_positive() {
                return Err(Error::NonPositiveWeight {
                    point: germ.describe(&source, &target),
                    weight: format_rat(&weight),
                });
            }
            sum += &weight;
            support.push(germ);
            weights.push(weight);
        }
        if !sum.is_one() {
            return Err(Error::WeightSum { got: format_rat(&sum) });
        }
        Ok(GermMeasure { source, target, support, weights })
    }

    pub fn point_mass(source: FiniteGroup, target: FiniteGroup, germ: MapGerm) -> Result<Self> {
        Self::new(source, target, vec![(germ, BigRational::one())])
    }

    pub fn support(&self) -> &[MapGerm] {
        &self.support
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn source(&self) -> &FiniteGroup {
        &self.source
    }

    pub fn target(&self) -> &FiniteGroup {
        &self.target
    }

    /// True when every support germ is injective on its domain.
    pub fn is_randembedding(&self) -> bool {
        self.support.iter().all(|f| f.injective())
    }
}

/// One violating group element, with the exact total-variation gap between
/// the measure and its pushforward.
#[derive(Debug, Clone)]
pub struct InvarianceViolation {
    pub lambda: String,
    pub tv_gap: BigRational,
}

/// Report of the exact invariance check.
#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub invariant: bool,
    pub violations: Vec<InvarianceViolation>,
}

/// Checks invariance of the measure under every requested element: the
/// pushforward under the germ action, compared after restricting to the
/// common shrunken domain, must equal the restricted measure exactly.
pub fn check_invariance(m: &GermMeasure, lambdas: &[ElemId]) -> Result<InvarianceReport> {
    let mut violations = Vec::new();
    for &l in lambdas {
        let mut pushed: Vec<(MapGerm, BigRational)> = Vec::new();
        for (germ, weight) in m.support.iter().zip(&m.weights) {
            pushed.push((germ_act(&m.source, &m.target, l, germ)?, weight.clone()));
        }
        // common domain after acting by l: {x : x l in full domain}; germs of
        // the original measure are restricted the same way before comparing
        let keep: Vec<bool> = (0..m.source.order())
            .map(|x| {
                m.support
                    .iter()
                    .all(|f| f.value(m.source.mul(x, l)).is_some() && f.value(x).is_some())
            })
            .collect();
        let mut lhs: BTreeMap<MapGerm, BigRational> = BTreeMap::new();
        for (germ, weight) in pushed {
            *lhs.entry(germ.restrict(&keep)).or_insert_with(BigRational::zero) += weight;
        }
        let mut rhs: BTreeMap<MapGerm, BigRational> = BTreeMap::new();
        for (germ, weight) in m.support.iter().zip(&m.weights) {
            *rhs.entry(germ.restrict(&keep)).or_insert_with(BigRational::zero) += weight.clone();
        }
        if lhs != rhs {
            let keys: std::collections::BTreeSet<&MapGerm> =
                lhs.keys().chain(rhs.keys()).collect();
            let a: Vec<BigRational> =
                keys.iter().map(|k| lhs.get(*k).cloned().unwrap_or_else(BigRational::zero)).collect();
            let b: Vec<BigRational> =
                keys.iter().map(|k| rhs.get(*k).cloned().unwrap_or_else(BigRational::zero)).collect();
            violations.push(InvarianceViolation {
                lambda: m.source.elem_name(l).to_string(),
                tv_gap: total_variation(&a, &b),
            });
        }
    }
    Ok(InvarianceReport { invariant: violations.is_empty(), violations })
}

/// Pushes a strict system forward to a germ measure: point `x` becomes the
/// germ `l -> alpha(l, x)` with weight `mu(x)`. The result is supported on
/// injective germs (re-verified) and invariant under the whole source group.
pub fn randembedding_from_cocycle(sys: &SmiCocycleSystem) -> Result<GermMeasure> {
    sys.require_certified()?;
    let c = sys.cocycle();
    let source = sys.source().clone();
    let target = sys.target().clone();
    let mut germs = Vec::new();
    for x in 0..sys.space().len() {
        let images: Vec<ElemId> = (0..source.order()).map(|l| c.value(l, x)).collect();
        germs.push((MapGerm::full(&source, images)?, sys.space().weight(x).clone()));
    }
    let measure = GermMeasure::new(source, target, germs)?;
    if let Some(bad) = measure.support.iter().position(|f| !f.injective()) {
        return Err(Error::GermNotInjective(bad));
    }
    Ok(measure)
}

/// Rebuilds a strict system from an invariant injective germ measure with
/// full domains: the space is the support, the action is the germ action
/// (which must permute the support), and the cocycle is evaluation,
/// `alpha(l, f) = f(l)`.
pub fn cocycle_from_randembedding(m: &GermMeasure) -> Result<SmiCocycleSystem> {
    for (i, germ) in m.support.iter().enumerate() {
        if !germ.has_full_domain() {
            return Err(Error::GermDomain(format!("germ {i} has a partial domain")));
        }
        if !germ.injective() {
            return Err(Error::GermNotInjective(i));
        }
    }
    let all: Vec<ElemId> = (0..m.source.order()).collect();
    let inv_report = check_invariance(m, &all)?;
    if !inv_report.invariant {
        return Err(Error::GermNotInvariant(inv_report.violations[0].lambda.clone()));
    }
    let names: Vec<String> = (0..m.support.len()).map(|i| format!("f{i}")).collect();
    let space = crate::measure::make_space(names, m.weights.clone())?;
    let mut perm = Vec::with_capacity(m.source.order());
    let mut table = Vec::with_capacity(m.source.order());
    for l in 0..m.source.order() {
        let mut row_perm = Vec::with_capacity(m.support.len());
        let mut row_coc = Vec::with_capacity(m.support.len());
        for f in &m.support {
            let acted = germ_act(&m.source, &m.target, l, f)?;
            let position = m.support.iter().position(|g| *g == acted).ok_or_else(|| {
                Error::GermActionNotClosed(format!(
                    "{} sends a support germ to {}",
                    m.source.elem_name(l),
                    acted.describe(&m.source, &m.target)
                ))
            })?;
            row_perm.push(position);
            row_coc.push(f.value(l).expect("full domain"));
        }
        perm.push(row_perm);
        table.push(row_coc);
    }
    let action = GroupAction::from_table(m.source.clone(), space, perm)?;
    let cocycle = Cocycle::from_table(action, m.target.clone(), table)?;
    let sys = SmiCocycleSystem::new(cocycle);
    sys.require_certified()?;
    Ok(sys)
}

/// Identity-fixing maps with a trivially small domain are handy in tests.
pub fn full_domain_point_mass(
    source: &FiniteGroup,
    target: &FiniteGroup,
    images: Vec<ElemId>,
) -> Result<GermMeasure> {
    GermMeasure::point_mass(source.clone(), target.clone(), MapGerm::full(source, images)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::z2_into_z4;
    use crate::rat::rat;

    fn z(n: usize) -> FiniteGroup {
        FiniteGroup::cyclic(n).unwrap()
    }

    #[test]
    fn germ_act_examples() {
        let z2 = z(2);
        let z4 = z(4);
        // f(s) = t: (s.f)(s) = f(e) f(s)^{-1} = t^3
        let f = MapGerm::full(&z2, vec![0, 1]).unwrap();
        let sf = germ_act(&z2, &z4, 1, &f).unwrap();
        assert_eq!(sf.value(1), Some(3));
        assert_ne!(sf, f);
        // f(s) = t^2 is a fixed point
        let f2 = MapGerm::full(&z2, vec![0, 2]).unwrap();
        assert_eq!(germ_act(&z2, &z4, 1, &f2).unwrap(), f2);
        // the identity acts trivially
        assert_eq!(germ_act(&z2, &z4, 0, &f).unwrap(), f);
    }

    #[test]
    fn germ_action_satisfies_the_action_law() {
        let z4 = z(4);
        let z8 = z(8);
        let f = MapGerm::full(&z4, vec![0, 2, 4, 6]).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let ab = z4.mul(a, b);
                let lhs = germ_act(&z4, &z8, ab, &f).unwrap();
                let rhs =
                    germ_act(&z4, &z8, a, &germ_act(&z4, &z8, b, &f).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn partial_domain_shrinks_and_errors() {
        let z4 = z(4);
        let z2 = z(2);
        // domain {e, t}: acting by t needs f(t); f(x t) undefined for x = t
        let f = MapGerm::partial(&z4, vec![Some(0), Some(1), None, None]).unwrap();
        let tf = germ_act(&z4, &z2, 1, &f).unwrap();
        assert_eq!(tf.value(0), Some(0));
        assert_eq!(tf.value(1), None);
        // acting by an element outside the domain is an error
        assert!(matches!(germ_act(&z4, &z2, 2, &f), Err(Error::GermDomain(_))));
    }

    #[test]
    fn fixed_point_mass_is_invariant() {
        let m = full_domain_point_mass(&z(2), &z(4), vec![0, 2]).unwrap();
        let report = check_invariance(&m, &[0, 1]).unwrap();
        assert!(report.invariant);
    }

    #[test]
    fn moving_point_mass_is_not_invariant() {
        let m = full_domain_point_mass(&z(2), &z(4), vec![0, 1]).unwrap();
        let report = check_invariance(&m, &[1]).unwrap();
        assert!(!report.invariant);
        assert_eq!(report.violations[0].lambda, "t");
        assert!(report.violations[0].tv_gap.is_positive());
    }

    #[test]
    fn cocycle_to_randembedding() {
        let sys = z2_into_z4();
        let m = randembedding_from_cocycle(&sys).unwrap();
        assert_eq!(m.support().len(), 1);
        assert!(m.is_randembedding());
        let report = check_invariance(&m, &[0, 1]).unwrap();
        assert!(report.invariant);
        // equivariance: acting on the germ of x equals the germ of l.x
        let f = &m.support()[0];
        let acted = germ_act(m.source(), m.target(), 1, f).unwrap();
        assert_eq!(acted, *f); // one-point space: l.x = x
    }

    #[test]
    fn two_point_space_gives_two_germs() {
        use crate::measure::{Cocycle, GroupAction, ProbSpace};
        use std::collections::BTreeMap;
        // swap action on two uniform points, cocycle distinguishing them
        let z2 = z(2);
        let z4 = z(4);
        let action = GroupAction::from_generators(
            z2.clone(),
            ProbSpace::uniform(2).unwrap(),
            &BTreeMap::from([(1, vec![1, 0])]),
        )
        .unwrap();
        let cocycle =
            Cocycle::from_generators(action, z4, &BTreeMap::from([(1, vec![1, 3])])).unwrap();
        let sys = SmiCocycleSystem::new(cocycle);
        assert!(sys.certified());
        let m = randembedding_from_cocycle(&sys).unwrap();
        assert_eq!(m.support().len(), 2);
        assert_eq!(m.weights(), &[rat(1, 2), rat(1, 2)]);
        let report = check_invariance(&m, &[0, 1]).unwrap();
        assert!(report.invariant);
        // equivariance across the swap
        let f0 = &m.support()[0];
        let acted = germ_act(m.source(), m.target(), 1, f0).unwrap();
        assert!(m.support().contains(&acted));
        assert_ne!(acted, *f0);
    }

    #[test]
    fn round_trip_is_the_identity() {
        let sys = z2_into_z4();
        let m = randembedding_from_cocycle(&sys).unwrap();
        let back = cocycle_from_randembedding(&m).unwrap();
        assert!(back.certified());
        assert_eq!(back.cocycle().value(1, 0), sys.cocycle().value(1, 0));
        let m2 = randembedding_from_cocycle(&back).unwrap();
        assert_eq!(m.support(), m2.support());
        assert_eq!(m.weights(), m2.weights());
    }

    #[test]
    fn non_injective_germ_is_rejected() {
        let m = full_domain_point_mass(&z(2), &z(4), vec![0, 0]).unwrap();
        assert!(!m.is_randembedding());
        let err = cocycle_from_randembedding(&m).unwrap_err();
        assert!(matches!(err, Error::GermNotInjective(_)));
    }

    #[test]
    fn non_invariant_measure_is_rejected() {
        let m = full_domain_point_mass(&z(2), &z(4), vec![0, 1]).unwrap();
        let err = cocycle_from_randembedding(&m).unwrap_err();
        assert!(matches!(err, Error::GermNotInvariant(_)));
    }

    #[test]
    fn strictness_matches_injective_support() {
        // strict system -> injective germs; corrupted system -> rejection
        use crate::measure::{Cocycle, GroupAction, ProbSpace};
        use std::collections::BTreeMap;
        let z2 = z(2);
        let action = GroupAction::trivial(z2.clone(), ProbSpace::point());
        let zero =
            Cocycle::from_generators(action, z(4), &BTreeMap::from([(1, vec![0])])).unwrap();
        let sys = SmiCocycleSystem::new(zero);
        assert!(randembedding_from_cocycle(&sys).is_err());
        assert!(randembedding_from_cocycle(&z2_into_z4()).unwrap().is_randembedding());
    }
}
