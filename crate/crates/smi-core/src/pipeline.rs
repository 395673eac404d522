//! Vertex-by-vertex extension pipeline.
//!
//! Given strict base systems at every vertex of a graph, replace one vertex
//! group per step and compose the intermediate couplings. The composed
//! cocycle threads each coordinate of the product space through one step:
//! the element entering step `k` is the cocycle value produced by step
//! `k - 1`. The final index is the product of the step indices, so it is 1
//! exactly when every base index is 1 and otherwise grows without bound on
//! an irreducible graph.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;

use crate::coupling::IndexClass;
use crate::enumerate::{ball, BallCap};
use crate::error::{Error, Result};
use crate::extend::{extend_graph, ExtendedSystem};
use crate::fingroup::FiniteGroup;
use crate::graph::{Graph, VertexId};
use crate::measure::SmiCocycleSystem;
use crate::rat::format_rat;
use crate::word::{GraphProduct, GroupElement};

/// One extension step: vertex replaced, its extended system, base index and
/// growth classification at the pipeline's radii.
#[derive(Debug, Clone)]
pub struct PipelineStep {
    pub vertex: VertexId,
    pub vertex_name: String,
    pub system: ExtendedSystem,
    pub base_index: BigRational,
    pub class: IndexClass,
}

/// The composed system after all steps.
#[derive(Debug, Clone)]
pub struct Pipeline {
    steps: Vec<PipelineStep>,
    compositions: Vec<String>,
    final_class: IndexClass,
}

/// Runs the full pipeline over `theta`: at each vertex, a strict system
/// `bases[v]` from the source vertex group to the target vertex group, the
/// identity system when the two sides already agree and no system is given.
pub fn theorem_b_pipeline(
    theta: &Graph,
    h_groups: &[FiniteGroup],
    g_groups: &[FiniteGroup],
    bases: &BTreeMap<VertexId, SmiCocycleSystem>,
    radii: &[usize],
    cap: BallCap,
) -> Result<Pipeline> {
    let n = theta.vertex_count();
    if h_groups.len() != n || g_groups.len() != n {
        return Err(Error::Config(format!("expected {n} vertex groups on each side")));
    }
    let mut steps: Vec<PipelineStep> = Vec::with_capacity(n);
    let mut compositions = Vec::new();
    for v in 0..n {
        let base = match bases.get(&v) {
            Some(sys) => sys.clone(),
            None => {
                if !h_groups[v].same_table(&g_groups[v]) {
                    return Err(Error::DanglingReference {
                        kind: "base system for vertex".into(),
                        name: theta.vertex_name(v).to_string(),
                    });
                }
                SmiCocycleSystem::identity(&h_groups[v])
            }
        };
        // intermediate graph products: vertices before v already replaced
        let mid_source: Vec<FiniteGroup> = (0..n)
            .map(|u| if u < v { g_groups[u].clone() } else { h_groups[u].clone() })
            .collect();
        let mut mid_target = mid_source.clone();
        mid_target[v] = g_groups[v].clone();
        let system = extend_graph(theta, mid_source, mid_target, v, &base, cap)?;
        let record = system.index_growth(radii)?;
        let base_index = system.base_index();
        if !steps.is_empty() {
            compositions.push(format!(
                "composed through the graph product with `{}` replaced",
                theta.vertex_name(v.saturating_sub(1))
            ));
        }
        steps.push(PipelineStep {
            vertex: v,
            vertex_name: theta.vertex_name(v).to_string(),
            system,
            base_index,
            class: record.class,
        });
    }
    let final_class = combine_classes(steps.iter().map(|s| &s.class));
    Ok(Pipeline { steps, compositions, final_class })
}

fn combine_classes<'a, I: Iterator<Item = &'a IndexClass>>(classes: I) -> IndexClass {
    let mut product = BigRational::one();
    let mut growing = false;
    let mut undetermined = false;
    for class in classes {
        match class {
            IndexClass::ConstantOne => {}
            IndexClass::Stable(c) => product *= c,
            IndexClass::Growing => growing = true,
            IndexClass::Undetermined => undetermined = true,
        }
    }
    if growing {
        IndexClass::Growing
    } else if undetermined {
        IndexClass::Undetermined
    } else if product.is_one() {
        IndexClass::ConstantOne
    } else {
        IndexClass::Stable(product)
    }
}

impl Pipeline {
    pub fn steps(&self) -> &[PipelineStep] {
        &self.steps
    }

    pub fn compositions(&self) -> &[String] {
        &self.compositions
    }

    pub fn final_class(&self) -> &IndexClass {
        &self.final_class
    }

    pub fn source_context(&self) -> &GraphProduct {
        self.steps.first().expect("at least one vertex").system.source_context()
    }

    pub fn target_context(&self) -> &GraphProduct {
        self.steps.last().expect("at least one vertex").system.target_context()
    }

    /// Sizes of the per-step base spaces; the composed system lives over
    /// their product.
    pub fn space_sizes(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.system.base().space().len()).collect()
    }

    /// Evaluates the composed cocycle and action: the element entering step
    /// `k` is the value produced by step `k - 1`, and coordinate `k` of the
    /// product space moves under that element.
    pub fn eval(&self, h: &GroupElement, xs: &[usize]) -> Result<(GroupElement, Vec<usize>)> {
        if xs.len() != self.steps.len() {
            return Err(Error::Config(format!(
                "expected {} point coordinates, got {}",
                self.steps.len(),
                xs.len()
            )));
        }
        let mut elem = h.clone();
        let mut moved = Vec::with_capacity(xs.len());
        for (step, &x) in self.steps.iter().zip(xs) {
            let (value, newx) = step.system.alpha_and_act_word(elem.syllables(), x);
            moved.push(newx);
            elem = value;
        }
        Ok((elem, moved))
    }

    /// Strictness of the composed cocycle on a source ball, exhaustive over
    /// the product space.
    pub fn smi_ball_check(&self, r: usize, cap: BallCap) -> Result<Option<(GroupElement, Vec<usize>)>> {
        let sizes = self.space_sizes();
        let mut points = vec![vec![]];
        for &size in &sizes {
            let mut next = Vec::new();
            for p in &points {
                for x in 0..size {
                    let mut q: Vec<usize> = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
            points = next;
        }
        for h in ball(self.source_context(), r, cap)? {
            if h.is_identity() {
                continue;
            }
            for xs in &points {
                let (value, _) = self.eval(&h, xs)?;
                if value.is_identity() {
                    return Ok(Some((h, xs.clone())));
                }
            }
        }
        Ok(None)
    }

    /// One line per extension and composition, for reports.
    pub fn describe(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, step) in self.steps.iter().enumerate() {
            out.push(format!(
                "extension {} at `{}`: base index {}, {}",
                i + 1,
                step.vertex_name,
                format_rat(&step.base_index),
                step.class.label()
            ));
            if i + 1 < self.steps.len() {
                out.push(format!("composition {}: previous coupling composed with the next extension", i + 1));
            }
        }
        out.push(format!("final classification: {}", self.final_class.label()));
        out
    }
}
