//! Couplings built from strict cocycles, and direct finite couplings.
//!
//! From a strict system over `(X, mu)` the space `Omega = Gamma x X` carries
//! two commuting free actions: the target acts by left multiplication on the
//! first coordinate, the source by `l . (g, x) = (g * alpha(l, x)^{-1}, l.x)`.
//! `{e} x X` is a fundamental domain for the target action; a greedy pass in
//! enumeration order produces one for the source action, and the ratio of
//! the two measures is the coupling index.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::fingroup::{ElemId, FiniteGroup};
use crate::measure::SmiCocycleSystem;
use crate::rat::{format_rat, rat_int};

/// A point of `Gamma x X`.
pub type OmegaPoint = (ElemId, usize);

/// Word-length-truncated view of the coupling `Gamma x X` for a finite
/// target. Radius 0 keeps only the identity slab; any positive radius covers
/// the whole group (every nonidentity element is a single syllable).
#[derive(Debug, Clone)]
pub struct CouplingView {
    system: SmiCocycleSystem,
    radius: usize,
    gammas: Vec<ElemId>,
}

/// Materializes the view and verifies that the two actions commute and are
/// free on the full finite space.
pub fn omega_coupling(system: &SmiCocycleSystem, radius: usize) -> Result<CouplingView> {
    system.require_certified()?;
    let gamma = system.target();
    let gammas: Vec<ElemId> =
        if radius == 0 { vec![0] } else { (0..gamma.order()).collect() };
    let view = CouplingView { system: system.clone(), radius, gammas };
    view.verify_actions()?;
    Ok(view)
}

impl CouplingView {
    pub fn system(&self) -> &SmiCocycleSystem {
        &self.system
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Slab elements in enumeration order (identity first).
    pub fn gammas(&self) -> &[ElemId] {
        &self.gammas
    }

    pub fn points(&self) -> impl Iterator<Item = OmegaPoint> + '_ {
        let n = self.system.space().len();
        self.gammas.iter().flat_map(move |&g| (0..n).map(move |x| (g, x)))
    }

    pub fn contains(&self, p: &OmegaPoint) -> bool {
        self.gammas.contains(&p.0) && p.1 < self.system.space().len()
    }

    /// Left multiplication by the target group.
    pub fn gamma_act(&self, g: ElemId, p: OmegaPoint) -> OmegaPoint {
        (self.system.target().mul(g, p.0), p.1)
    }

    /// The source action `l . (g, x) = (g * alpha(l, x)^{-1}, l.x)`.
    pub fn lambda_act(&self, l: ElemId, p: OmegaPoint) -> OmegaPoint {
        let c = self.system.cocycle();
        let gamma = self.system.target();
        (gamma.mul(p.0, gamma.inv(c.value(l, p.1))), c.action().apply(l, p.1))
    }

    fn verify_actions(&self) -> Result<()> {
        let lam = self.system.source();
        let gam = self.system.target();
        let n = self.system.space().len();
        for l in 0..lam.order() {
            for g in 0..gam.order() {
                for x in 0..n {
                    let p = (g, x);
                    for gg in 0..gam.order() {
                        if self.gamma_act(gg, self.lambda_act(l, p))
                            != self.lambda_act(l, self.gamma_act(gg, p))
                        {
                            return Err(Error::ActionsDoNotCommute {
                                point: self.point_name(&p),
                                lambda: l,
                                gamma: gg,
                            });
                        }
                    }
                    if l != 0 && self.lambda_act(l, p) == p {
                        return Err(Error::ActionNotFree {
                            group: "source".into(),
                            elem: l,
                            point: self.point_name(&p),
                        });
                    }
                    if g != 0 && self.gamma_act(g, (0, x)) == (0, x) {
                        return Err(Error::ActionNotFree {
                            group: "target".into(),
                            elem: g,
                            point: self.point_name(&(0, x)),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn point_name(&self, p: &OmegaPoint) -> String {
        format!(
            "({}, {})",
            self.system.target().elem_name(p.0),
            self.system.space().name(p.1)
        )
    }

    /// The target-action fundamental domain `{e} x X`.
    pub fn x_domain(&self) -> BTreeSet<OmegaPoint> {
        (0..self.system.space().len()).map(|x| (0, x)).collect()
    }

    /// Points of the view whose whole source-group orbit stays inside it.
    pub fn interior(&self) -> BTreeSet<OmegaPoint> {
        self.points()
            .filter(|&p| (0..self.system.source().order()).all(|l| self.contains(&self.lambda_act(l, p))))
            .collect()
    }

    /// Greedy source-action fundamental domain: walk the slabs in
    /// enumeration order and keep every point not yet saturated by the
    /// source orbits of earlier picks. Always contains `{e} x X`.
    pub fn greedy_fundamental_domain(&self) -> BTreeSet<OmegaPoint> {
        let lam_order = self.system.source().order();
        let mut domain = BTreeSet::new();
        let mut saturated: BTreeSet<OmegaPoint> = BTreeSet::new();
        for &g in &self.gammas {
            for x in 0..self.system.space().len() {
                let p = (g, x);
                if saturated.contains(&p) {
                    continue;
                }
                domain.insert(p);
                for l in 0..lam_order {
                    saturated.insert(self.lambda_act(l, p));
                }
            }
        }
        domain
    }

    /// Measure of a point set (weight of the space point, counting measure
    /// on the group coordinate).
    pub fn measure(&self, set: &BTreeSet<OmegaPoint>) -> BigRational {
        set.iter().map(|&(_, x)| self.system.space().weight(x).clone()).sum()
    }

    /// Reads the cocycle back off the source action on the slab `{e} x X`:
    /// `l . (e, x) = (alpha(l, x)^{-1}, l.x)`.
    pub fn read_back_cocycle(&self) -> Vec<Vec<ElemId>> {
        let lam = self.system.source();
        let gam = self.system.target();
        let n = self.system.space().len();
        (0..lam.order())
            .map(|l| (0..n).map(|x| gam.inv(self.lambda_act(l, (0, x)).0)).collect())
            .collect()
    }
}

/// How a sequence of partial index values behaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexClass {
    /// Exactly 1 at every tested radius.
    ConstantOne,
    /// Settles at a finite value.
    Stable(BigRational),
    /// Strictly increasing partial measures: divergence evidence.
    Growing,
    /// Not enough radius to distinguish; reported, never silently classified.
    Undetermined,
}

impl IndexClass {
    pub fn label(&self) -> String {
        match self {
            IndexClass::ConstantOne => "constant-1".into(),
            IndexClass::Stable(c) => format!("stable {}", format_rat(c)),
            IndexClass::Growing => "growing".into(),
            IndexClass::Undetermined => "undetermined".into(),
        }
    }
}

/// Partial coupling-index measures per radius, with a classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthRecord {
    pub radii: Vec<usize>,
    pub partials: Vec<BigRational>,
    pub class: IndexClass,
}

/// Index of a strict system as a growth record over radii. For a finite
/// target the record stabilizes once the radius covers the group, and the
/// stable value is the exact coupling index.
pub fn coupling_index(system: &SmiCocycleSystem, radii: &[usize]) -> Result<GrowthRecord> {
    let mut partials = Vec::with_capacity(radii.len());
    for &r in radii {
        let view = omega_coupling(system, r)?;
        let y = view.greedy_fundamental_domain();
        partials.push(view.measure(&y));
    }
    let class = if partials.iter().all(|p| p.is_one()) {
        IndexClass::ConstantOne
    } else if radii.iter().any(|&r| r >= 1) {
        // any positive radius already covers a finite target group
        let full = omega_coupling(system, 1)?;
        let y = full.greedy_fundamental_domain();
        IndexClass::Stable(full.measure(&y))
    } else {
        IndexClass::Undetermined
    };
    Ok(GrowthRecord { radii: radii.to_vec(), partials, class })
}

/// Exact index of a strict system: the greedy domain measure on the full
/// finite coupling (the target fundamental domain has measure 1).
pub fn exact_index(system: &SmiCocycleSystem) -> Result<BigRational> {
    let view = omega_coupling(system, 1)?;
    let y = view.greedy_fundamental_domain();
    Ok(view.measure(&y))
}

/// A finite coupling given directly: two commuting free weight-preserving
/// actions on a finite weighted set. Index below 1 is possible here; such
/// couplings need not come from any strict cocycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteCoupling {
    lambda: FiniteGroup,
    gamma: FiniteGroup,
    points: Vec<String>,
    weights: Vec<BigRational>,
    left: Vec<Vec<usize>>,
    right: Vec<Vec<usize>>,
}

impl FiniteCoupling {
    /// Validates permutations, weight preservation, action laws, commuting
    /// and freeness of both actions.
    pub fn new(
        lambda: FiniteGroup,
        gamma: FiniteGroup,
        points: Vec<String>,
        weights: Vec<BigRational>,
        left: Vec<Vec<usize>>,
        right: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = points.len();
        if n == 0 || weights.len() != n {
            return Err(Error::EmptySpace);
        }
        for (name, w) in points.iter().zip(&weights) {
            if !w.is_positive() {
                return Err(Error::NonPositiveWeight { point: name.clone(), weight: format_rat(w) });
            }
        }
        let fc = FiniteCoupling { lambda, gamma, points, weights, left, right };
        fc.check_action(&fc.lambda, &fc.left, "lambda")?;
        fc.check_action(&fc.gamma, &fc.right, "gamma")?;
        for l in 1..fc.lambda.order() {
            for p in 0..n {
                if fc.left[l][p] == p {
                    return Err(Error::ActionNotFree {
                        group: "lambda".into(),
                        elem: l,
                        point: fc.points[p].clone(),
                    });
                }
            }
        }
        for g in 1..fc.gamma.order() {
            for p in 0..n {
                if fc.right[g][p] == p {
                    return Err(Error::ActionNotFree {
                        group: "gamma".into(),
                        elem: g,
                        point: fc.points[p].clone(),
                    });
                }
            }
        }
        for l in 0..fc.lambda.order() {
            for g in 0..fc.gamma.order() {
                for p in 0..n {
                    if fc.left[l][fc.right[g][p]] != fc.right[g][fc.left[l][p]] {
                        return Err(Error::ActionsDoNotCommute {
                            point: fc.points[p].clone(),
                            lambda: l,
                            gamma: g,
                        });
                    }
                }
            }
        }
        Ok(fc)
    }

    fn check_action(&self, group: &FiniteGroup, table: &[Vec<usize>], _tag: &str) -> Result<()> {
        let n = self.points.len();
        if table.len() != group.order() {
            return Err(Error::Config(format!(
                "action table has {} rows for group of order {}",
                table.len(),
                group.order()
            )));
        }
        for (g, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!("action row {g} has length {}", row.len())));
            }
            let mut hit = vec![usize::MAX; n];
            for (p, &q) in row.iter().enumerate() {
                if q >= n {
                    return Err(Error::UnknownPoint(format!("#{q}")));
                }
                if hit[q] != usize::MAX {
                    return Err(Error::NotAPermutation { elem: g, p: hit[q], q: p, image: q });
                }
                hit[q] = p;
                if self.weights[p] != self.weights[q] {
                    return Err(Error::NotWeightPreserving {
                        elem: g,
                        from: self.points[p].clone(),
                        wfrom: format_rat(&self.weights[p]),
                        to: self.points[q].clone(),
                        wto: format_rat(&self.weights[q]),
                    });
                }
            }
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                for p in 0..n {
                    if table[group.mul(g, h)][p] != table[g][table[h][p]] {
                        return Err(Error::ActionLawFails { g, h, point: self.points[p].clone() });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn lambda(&self) -> &FiniteGroup {
        &self.lambda
    }

    pub fn gamma(&self) -> &FiniteGroup {
        &self.gamma
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn point_name(&self, p: usize) -> &str {
        &self.points[p]
    }

    fn orbits(&self, table: &[Vec<usize>], order: usize) -> Vec<BTreeSet<usize>> {
        let n = self.points.len();
        let mut seen = vec![false; n];
        let mut orbits = Vec::new();
        for p in 0..n {
            if seen[p] {
                continue;
            }
            let orbit: BTreeSet<usize> = (0..order).map(|g| table[g][p]).collect();
            for &q in &orbit {
                seen[q] = true;
            }
            orbits.push(orbit);
        }
        orbits
    }

    /// Greedy transversal in point order: one point per orbit.
    fn greedy_transversal(&self, table: &[Vec<usize>], order: usize) -> Vec<usize> {
        let n = self.points.len();
        let mut covered = vec![false; n];
        let mut out = Vec::new();
        for p in 0..n {
            if covered[p] {
                continue;
            }
            out.push(p);
            for g in 0..order {
                covered[table[g][p]] = true;
            }
        }
        out
    }

    /// Greedy fundamental domain for the target action.
    pub fn x_domain(&self) -> Vec<usize> {
        self.greedy_transversal(&self.right, self.gamma.order())
    }

    /// Greedy fundamental domain for the source action.
    pub fn y_domain(&self) -> Vec<usize> {
        self.greedy_transversal(&self.left, self.lambda.order())
    }

    pub fn measure_of(&self, set: &[usize]) -> BigRational {
        set.iter().map(|&p| self.weights[p].clone()).sum()
    }

    /// Exact coupling index `mu(Y) / mu(X)`.
    pub fn index(&self) -> BigRational {
        self.measure_of(&self.y_domain()) / self.measure_of(&self.x_domain())
    }

    /// Scales every weight by a positive rational.
    pub fn rescaled(&self, factor: &BigRational) -> Result<FiniteCoupling> {
        if !factor.is_positive() {
            return Err(Error::Config(format!("rescale factor {} must be positive", format_rat(factor))));
        }
        let mut out = self.clone();
        for w in &mut out.weights {
            *w *= factor;
        }
        Ok(out)
    }
}

/// The product-translation coupling: `Omega = Lambda x Gamma` with counting
/// measure, the source translating the first coordinate and the target the
/// second. Its index is `|Gamma| / |Lambda|`.
pub fn translation_coupling(lambda: &FiniteGroup, gamma: &FiniteGroup) -> FiniteCoupling {
    let n = lambda.order() * gamma.order();
    let enc = |a: usize, b: usize| a * gamma.order() + b;
    let mut points = Vec::with_capacity(n);
    for a in 0..lambda.order() {
        for b in 0..gamma.order() {
            points.push(format!("({},{})", lambda.elem_name(a), gamma.elem_name(b)));
        }
    }
    let left = (0..lambda.order())
        .map(|l| {
            (0..n)
                .map(|p| enc(lambda.mul(l, p / gamma.order()), p % gamma.order()))
                .collect()
        })
        .collect();
    let right = (0..gamma.order())
        .map(|g| {
            (0..n)
                .map(|p| enc(p / gamma.order(), gamma.mul(g, p % gamma.order())))
                .collect()
        })
        .collect();
    FiniteCoupling::new(
        lambda.clone(),
        gamma.clone(),
        points,
        vec![rat_int(1); n],
        left,
        right,
    )
    .expect("translations commute and are free")
}

/// Disjoint union of two couplings of the same pair, the first rescaled to
/// `mu(X1) = 1` and the second to `mu(X2) = a`. The union's index is exactly
/// `(a c2 + c1) / (a + 1)`.
pub fn disjoint_union(
    fc1: &FiniteCoupling,
    fc2: &FiniteCoupling,
    a: &BigRational,
) -> Result<FiniteCoupling> {
    if !fc1.lambda.same_table(&fc2.lambda) || !fc1.gamma.same_table(&fc2.gamma) {
        return Err(Error::GroupMismatch("disjoint union needs the same acting pair".into()));
    }
    if !a.is_positive() {
        return Err(Error::Config(format!("side ratio {} must be positive", format_rat(a))));
    }
    let mu_x1 = fc1.measure_of(&fc1.x_domain());
    let mu_x2 = fc2.measure_of(&fc2.x_domain());
    let fc1 = fc1.rescaled(&(BigRational::one() / mu_x1))?;
    let fc2 = fc2.rescaled(&(a / mu_x2))?;
    let n1 = fc1.points.len();
    let mut points: Vec<String> = fc1.points.iter().map(|p| format!("1:{p}")).collect();
    points.extend(fc2.points.iter().map(|p| format!("2:{p}")));
    let mut weights = fc1.weights.clone();
    weights.extend(fc2.weights.iter().cloned());
    let splice = |t1: &[Vec<usize>], t2: &[Vec<usize>]| -> Vec<Vec<usize>> {
        t1.iter()
            .zip(t2)
            .map(|(r1, r2)| {
                let mut row: Vec<usize> = r1.clone();
                row.extend(r2.iter().map(|&q| q + n1));
                row
            })
            .collect()
    };
    FiniteCoupling::new(
        fc1.lambda.clone(),
        fc1.gamma.clone(),
        points,
        weights,
        splice(&fc1.left, &fc2.left),
        splice(&fc1.right, &fc2.right),
    )
}

/// Result of searching for nested fundamental domains `X` inside `Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedSearch {
    /// `(x_domain, y_domain)` with the first contained in the second.
    pub found: Option<(Vec<usize>, Vec<usize>)>,
    pub gamma_orbit_count: usize,
    pub lambda_orbit_count: usize,
    /// Fewer source orbits than target orbits: no transversal of the source
    /// action can contain a transversal of the target action.
    pub cardinality_obstruction: bool,
    /// Number of source-action transversals examined.
    pub transversals_tried: u64,
}

/// Exhaustive search for a target fundamental domain nested inside a source
/// fundamental domain. Success needs a source transversal meeting every
/// target orbit; the search enumerates source transversals outright.
pub fn attempt_nested_domains(fc: &FiniteCoupling) -> NestedSearch {
    let gamma_orbits = fc.orbits(&fc.right, fc.gamma.order());
    let lambda_orbits = fc.orbits(&fc.left, fc.lambda.order());
    let mut result = NestedSearch {
        found: None,
        gamma_orbit_count: gamma_orbits.len(),
        lambda_orbit_count: lambda_orbits.len(),
        cardinality_obstruction: lambda_orbits.len() < gamma_orbits.len(),
        transversals_tried: 0,
    };
    if result.cardinality_obstruction {
        return result;
    }
    let orbit_of_point: Vec<usize> = {
        let mut map = vec![0; fc.points.len()];
        for (i, orbit) in gamma_orbits.iter().enumerate() {
            for &p in orbit {
                map[p] = i;
            }
        }
        map
    };
    let choices: Vec<Vec<usize>> = lambda_orbits.iter().map(|o| o.iter().copied().collect()).collect();
    let mut picked = vec![0usize; choices.len()];
    'outer: loop {
        result.transversals_tried += 1;
        let y: Vec<usize> = choices.iter().zip(&picked).map(|(c, &i)| c[i]).collect();
        let mut covered = vec![false; gamma_orbits.len()];
        for &p in &y {
            covered[orbit_of_point[p]] = true;
        }
        if covered.iter().all(|&c| c) {
            let mut x = Vec::new();
            let mut taken = vec![false; gamma_orbits.len()];
            for &p in &y {
                let o = orbit_of_point[p];
                if !taken[o] {
                    taken[o] = true;
                    x.push(p);
                }
            }
            x.sort_unstable();
            let mut y_sorted = y.clone();
            y_sorted.sort_unstable();
            result.found = Some((x, y_sorted));
            return result;
        }
        for i in 0..picked.len() {
            picked[i] += 1;
            if picked[i] < choices[i].len() {
                continue 'outer;
            }
            picked[i] = 0;
        }
        break;
    }
    result
}
