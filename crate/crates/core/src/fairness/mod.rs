//! Per-instance fairness robustness level (FRL): the largest change of the
//! target posterior reachable by re-assigning the private features while the
//! public ones stay fixed.
//!
//! The bounds come from two MPE queries on a field of likelihood ratios
//! between the two target classes; a brute-force path enumerating every
//! private configuration serves as an oracle.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::evaluation::brier;
use crate::inference::{mpe, posterior, MpeMode};
use crate::learning::{blanket_subnetwork, markov_blanket};
use crate::model::{
    joint_states, Assignment, BayesianNetwork, Factor, MarkovRandomField, Repr, Role, VarId,
};

/// Default bound on the number of private configurations the oracle visits.
pub const DEFAULT_BRUTE_FORCE_CAP: u64 = 1 << 20;

/// Classifier restricted to the Markov blanket of a binary target, with the
/// ratio field used for the FRL bounds.
#[derive(Debug, Clone)]
pub struct FairnessModel {
    blanket_bn: BayesianNetwork,
    y: VarId,
    private_in_blanket: BTreeSet<VarId>,
    public_in_blanket: BTreeSet<VarId>,
    private: BTreeSet<VarId>,
    ratio_mrf: MarkovRandomField,
    fair_by_design: bool,
}

impl FairnessModel {
    pub fn new(bn: &BayesianNetwork) -> Result<Self> {
        let y = bn.target().ok_or(Error::NoTarget)?;
        let card = bn.cardinality(y)?;
        if card != 2 {
            return Err(Error::NonBinaryTarget(card));
        }
        let blanket = markov_blanket(bn, y)?;
        let blanket_bn = blanket_subnetwork(bn, y)?;
        let private: BTreeSet<VarId> = bn.with_role(Role::Private).into_iter().collect();
        let private_in_blanket: BTreeSet<VarId> = blanket
            .iter()
            .copied()
            .filter(|v| private.contains(v))
            .collect();
        let public_in_blanket: BTreeSet<VarId> = blanket
            .iter()
            .copied()
            .filter(|&v| v != y && !private.contains(&v))
            .collect();
        let ratio_mrf = build_ratio_mrf(&blanket_bn, y)?;
        Ok(FairnessModel {
            fair_by_design: private_in_blanket.is_empty(),
            blanket_bn,
            y,
            private_in_blanket,
            public_in_blanket,
            private,
            ratio_mrf,
        })
    }

    pub fn blanket_bn(&self) -> &BayesianNetwork {
        &self.blanket_bn
    }

    pub fn target(&self) -> VarId {
        self.y
    }

    pub fn private_in_blanket(&self) -> &BTreeSet<VarId> {
        &self.private_in_blanket
    }

    pub fn public_in_blanket(&self) -> &BTreeSet<VarId> {
        &self.public_in_blanket
    }

    /// Every private feature of the full network.
    pub fn private(&self) -> &BTreeSet<VarId> {
        &self.private
    }

    pub fn ratio_mrf(&self) -> &MarkovRandomField {
        &self.ratio_mrf
    }

    pub fn fair_by_design(&self) -> bool {
        self.fair_by_design
    }

    /// Blanket features of `features`, checking each is bound.
    fn blanket_evidence(&self, features: &Assignment) -> Result<Assignment> {
        for &v in self
            .private_in_blanket
            .iter()
            .chain(&self.public_in_blanket)
        {
            if !features.contains(v) {
                return Err(Error::Unbound(v));
            }
        }
        Ok(features.filtered(|v| v != self.y && self.blanket_bn.variables().contains_key(&v)))
    }

    fn public_evidence(&self, features: &Assignment) -> Assignment {
        features.filtered(|v| self.public_in_blanket.contains(&v))
    }

    /// `P(y0 | private, public)` with both parts restricted to the blanket.
    fn posterior_y0(&self, private: &Assignment, public: &Assignment) -> Result<f64> {
        Ok(posterior(&self.blanket_bn, self.y, &private.merged(public))?[0])
    }

    /// Private part of `x_star`: blanket features from `chosen`, others copied
    /// from the instance.
    fn complete_private(&self, chosen: &Assignment, features: &Assignment) -> Assignment {
        let mut out = features.filtered(|v| self.private.contains(&v));
        for (v, s) in chosen.iter() {
            out.insert(v, s);
        }
        out
    }
}

/// Test instance: feature assignment plus the observed class.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: usize,
    pub features: Assignment,
    pub true_class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrlRecord {
    pub instance_id: usize,
    pub true_class: usize,
    pub predicted_class: usize,
    pub posterior_y0: f64,
    pub brier: f64,
    pub frl: f64,
    /// Private assignment reaching the largest deviation.
    pub x_star: Assignment,
    /// Private assignment maximising `P(y0 | ., public)`.
    pub x_max: Assignment,
    /// Private assignment minimising `P(y0 | ., public)`.
    pub x_min: Assignment,
    pub time_bn_ns: Option<u64>,
    pub time_mrf_ns: Option<u64>,
}

/// Extreme posteriors of `y0` over the private blanket features.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub x_max: Assignment,
    pub x_min: Assignment,
    pub p_max: f64,
    pub p_min: f64,
}

/// Target posterior with the second class taken as the complement of the
/// first, so that prediction and Brier score agree exactly.
fn binary_posterior(model: &FairnessModel, evidence: &Assignment) -> Result<Vec<f64>> {
    let p0 = posterior(&model.blanket_bn, model.y, evidence)?[0];
    Ok(vec![p0, 1.0 - p0])
}

/// Predicted class and posterior. Ties go to class 0.
pub fn classify(model: &FairnessModel, features: &Assignment) -> Result<(usize, Vec<f64>)> {
    let evidence = model.blanket_evidence(features)?;
    let post = binary_posterior(model, &evidence)?;
    Ok((if post[0] >= post[1] { 0 } else { 1 }, post))
}

/// Half the L1 distance between two distributions; for a binary variable
/// this is `|p(y0) - q(y0)|`.
pub fn manhattan(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0)
}

/// Log ratio `log f(y1, .) - log f(y0, .)` over the scope of `f` without `y`.
fn log_ratio(f: &Factor, y: VarId) -> Result<Factor> {
    let lin = f.to_linear();
    let num = lin.restrict(&Assignment::new().with(y, 1))?;
    let den = lin.restrict(&Assignment::new().with(y, 0))?;
    if den.values().contains(&0.0) {
        return Err(Error::ZeroDenominator(y));
    }
    let values = num
        .values()
        .iter()
        .zip(den.values())
        .map(|(n, d)| n.ln() - d.ln())
        .collect();
    Factor::new(&num.vars(), values, Repr::Log)
}

/// Field over the blanket features (target excluded) holding, in log space,
/// `P(y1 | parents) / P(y0 | parents)` and, for every child `c` of the
/// target, `P(c | other parents, y1) / P(c | other parents, y0)`.
pub fn build_ratio_mrf(blanket_bn: &BayesianNetwork, y: VarId) -> Result<MarkovRandomField> {
    let card = blanket_bn.cardinality(y)?;
    if card != 2 {
        return Err(Error::NonBinaryTarget(card));
    }
    let mut potentials = vec![log_ratio(blanket_bn.cpt(y)?.factor(), y)?];
    for c in blanket_bn.children(y)? {
        potentials.push(log_ratio(blanket_bn.cpt(c)?.factor(), y)?);
    }
    let variables = blanket_bn
        .variables()
        .iter()
        .filter(|(&v, _)| v != y)
        .map(|(&v, d)| (v, d.clone()))
        .collect();
    MarkovRandomField::new(variables, potentials)
}

/// Private blanket assignments maximising and minimising `P(y0 | ., public)`.
///
/// The max-mode MPE of the ratio field maximises the odds of `y1`, hence
/// minimises the posterior of `y0`; the min-mode MPE maximises it. Both
/// posteriors are recomputed exactly.
pub fn conservative_bounds(model: &FairnessModel, features: &Assignment) -> Result<Bounds> {
    let evidence = model.blanket_evidence(features)?;
    let public = model.public_evidence(&evidence);
    if model.fair_by_design {
        let p = model.posterior_y0(&Assignment::new(), &public)?;
        return Ok(Bounds {
            x_max: Assignment::new(),
            x_min: Assignment::new(),
            p_max: p,
            p_min: p,
        });
    }
    let x_min = mpe(
        &model.ratio_mrf,
        &model.private_in_blanket,
        &public,
        MpeMode::Max,
    )?
    .assignment;
    let x_max = mpe(
        &model.ratio_mrf,
        &model.private_in_blanket,
        &public,
        MpeMode::Min,
    )?
    .assignment;
    let p_max = model.posterior_y0(&x_max, &public)?;
    let p_min = model.posterior_y0(&x_min, &public)?;
    Ok(Bounds {
        x_max,
        x_min,
        p_max,
        p_min,
    })
}

fn record(
    model: &FairnessModel,
    instance: &Instance,
    post: &[f64],
    chosen: (&Assignment, &Assignment, &Assignment),
    frl: f64,
) -> FrlRecord {
    let (x_star, x_max, x_min) = chosen;
    FrlRecord {
        instance_id: instance.id,
        true_class: instance.true_class,
        predicted_class: if post[0] >= post[1] { 0 } else { 1 },
        posterior_y0: post[0],
        brier: brier(post, instance.true_class),
        frl,
        x_star: model.complete_private(x_star, &instance.features),
        x_max: model.complete_private(x_max, &instance.features),
        x_min: model.complete_private(x_min, &instance.features),
        time_bn_ns: None,
        time_mrf_ns: None,
    }
}

/// FRL through the ratio field.
///
/// With `p` the posterior of `y0` at the instance, the deviation is largest
/// at the maximiser when `p` lies below the midpoint of the two extremes and
/// at the minimiser otherwise.
pub fn frl(model: &FairnessModel, instance: &Instance) -> Result<FrlRecord> {
    let start = Instant::now();
    let evidence = model.blanket_evidence(&instance.features)?;
    let post = binary_posterior(model, &evidence)?;
    let p_hat = post[0];
    let mut rec = if model.fair_by_design {
        let own = evidence.filtered(|v| model.private_in_blanket.contains(&v));
        record(model, instance, &post, (&own, &own, &own), 0.0)
    } else {
        let b = conservative_bounds(model, &instance.features)?;
        let (x_star, p_star) = if p_hat < (b.p_max + b.p_min) / 2.0 {
            (&b.x_max, b.p_max)
        } else {
            (&b.x_min, b.p_min)
        };
        record(
            model,
            instance,
            &post,
            (x_star, &b.x_max, &b.x_min),
            (p_star - p_hat).abs(),
        )
    };
    rec.time_mrf_ns = Some(start.elapsed().as_nanos() as u64);
    Ok(rec)
}

/// Number of private blanket configurations, as the oracle would visit them.
pub fn private_configurations(model: &FairnessModel) -> u128 {
    model
        .private_in_blanket
        .iter()
        .map(|&v| model.blanket_bn.cardinality(v).expect("blanket variable") as u128)
        .product()
}

/// FRL by enumerating every private blanket configuration and updating the
/// network exactly at each. The first configuration in row-major order wins
/// ties.
pub fn frl_bruteforce(model: &FairnessModel, instance: &Instance, cap: u64) -> Result<FrlRecord> {
    let needed = private_configurations(model);
    if needed > cap as u128 {
        return Err(Error::CapExceeded { needed, cap });
    }
    let start = Instant::now();
    let evidence = model.blanket_evidence(&instance.features)?;
    let public = model.public_evidence(&evidence);
    let post = binary_posterior(model, &evidence)?;
    let p_hat = post[0];
    let vars: Vec<(VarId, usize)> = model
        .private_in_blanket
        .iter()
        .map(|&v| Ok((v, model.blanket_bn.cardinality(v)?)))
        .collect::<Result<_>>()?;
    let mut best: Option<(Assignment, f64)> = None;
    let mut hi: Option<(Assignment, f64)> = None;
    let mut lo: Option<(Assignment, f64)> = None;
    for x in joint_states(&vars) {
        let p = model.posterior_y0(&x, &public)?;
        let d = (p - p_hat).abs();
        if best.as_ref().is_none_or(|(_, bd)| d > *bd) {
            best = Some((x.clone(), d));
        }
        if hi.as_ref().is_none_or(|(_, h)| p > *h) {
            hi = Some((x.clone(), p));
        }
        if lo.as_ref().is_none_or(|(_, l)| p < *l) {
            lo = Some((x, p));
        }
    }
    let (x_star, rho) = best.expect("at least one configuration");
    let (x_max, x_min) = (hi.expect("non-empty").0, lo.expect("non-empty").0);
    let mut rec = record(model, instance, &post, (&x_star, &x_max, &x_min), rho);
    rec.time_bn_ns = Some(start.elapsed().as_nanos() as u64);
    Ok(rec)
}
