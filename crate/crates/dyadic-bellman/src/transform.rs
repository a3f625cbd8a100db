//! Martingale transforms T_ε, A₁ weights, weighted level sets, weak-type
//! ratios, and the explicit depth-2 extremal triple.
//!
//! A transform multiplies each Haar amplitude of φ by ε_J: in the PM class
//! every ε_J is ±1, in the SUB class |ε_J| ≤ 1 (ψ is then differentially
//! subordinate to φ). All quantities here are exact rationals.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{
    haar_reconstruct, parse_rational, rat, DyadicInterval, HaarExpansion, Rational, StepFunction,
};
use crate::error::{Error, Result};

/// Multiplier class of an assignment.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum EpsilonMode {
    /// Every ε_J = ±1; missing entries are forbidden on intervals carrying a
    /// nonzero coefficient.
    Pm,
    /// Every |ε_J| ≤ 1; missing entries default to 0.
    Sub,
}

/// A family {ε_J} of transform multipliers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EpsilonAssignment {
    entries: BTreeMap<DyadicInterval, Rational>,
    mode: EpsilonMode,
}

impl EpsilonAssignment {
    pub fn new(
        mode: EpsilonMode,
        entries: impl IntoIterator<Item = (DyadicInterval, Rational)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (interval, value) in entries {
            let ok = match mode {
                EpsilonMode::Pm => value == rat(1) || value == rat(-1),
                EpsilonMode::Sub => value.abs() <= rat(1),
            };
            if !ok {
                return Err(Error::EpsilonOutOfRange { interval, value: value.to_string() });
            }
            map.insert(interval, value);
        }
        Ok(Self { entries: map, mode })
    }

    /// ε_J ≡ +1 on every interval above `depth` (the identity transform).
    pub fn identity_pm(depth: u32) -> Self {
        let entries = DyadicInterval::all_above_depth(depth).map(|j| (j, rat(1))).collect();
        Self { entries, mode: EpsilonMode::Pm }
    }

    /// ε_J ≡ −1 on every interval above `depth`.
    pub fn negation_pm(depth: u32) -> Self {
        let entries = DyadicInterval::all_above_depth(depth).map(|j| (j, rat(-1))).collect();
        Self { entries, mode: EpsilonMode::Pm }
    }

    pub fn mode(&self) -> EpsilonMode {
        self.mode
    }

    pub fn entries(&self) -> impl Iterator<Item = (&DyadicInterval, &Rational)> {
        self.entries.iter()
    }

    /// ε_J for a transform of `phi`: PM requires a stored ±1 wherever the
    /// coefficient is nonzero; SUB defaults to 0.
    pub fn factor_for(&self, interval: DyadicInterval, phi_amp: &Rational) -> Result<Rational> {
        match self.entries.get(&interval) {
            Some(e) => Ok(e.clone()),
            None => match self.mode {
                EpsilonMode::Sub => Ok(Rational::zero()),
                EpsilonMode::Pm => {
                    if phi_amp.is_zero() {
                        Ok(Rational::zero())
                    } else {
                        Err(Error::MissingEpsilon(interval))
                    }
                }
            },
        }
    }
}

/// ψ = start + Σ ε_J b_J H_J at the depth of φ.
pub fn apply_transform(
    phi: &HaarExpansion,
    eps: &EpsilonAssignment,
    start: Rational,
) -> Result<StepFunction> {
    let mut transformed = Vec::new();
    for (interval, amp) in phi.coeffs() {
        let factor = eps.factor_for(*interval, amp)?;
        transformed.push((*interval, factor * amp));
    }
    let expansion = HaarExpansion::new(start, transformed, phi.depth())?;
    Ok(haar_reconstruct(&expansion))
}

/// Checks |ε_J b_J| ≤ |b_J| for every coefficient of φ (differential
/// subordination of the transformed martingale).
pub fn subordination_audit(phi: &HaarExpansion, eps: &EpsilonAssignment) -> Result<()> {
    for (interval, amp) in phi.coeffs() {
        let factor = eps.factor_for(*interval, amp)?;
        if (factor * amp).abs() > amp.abs() {
            return Err(Error::Constraint(format!(
                "transformed coefficient exceeds |b_J| at {interval}"
            )));
        }
    }
    Ok(())
}

/// A strictly positive step-function weight.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct A1Weight {
    w: StepFunction,
}

impl A1Weight {
    pub fn new(w: StepFunction) -> Result<Self> {
        if w.values().iter().any(|v| *v <= rat(0)) {
            return Err(Error::NonpositiveWeight);
        }
        Ok(Self { w })
    }

    pub fn constant_one() -> Self {
        Self { w: StepFunction::constant(rat(1)) }
    }

    pub fn as_step(&self) -> &StepFunction {
        &self.w
    }

    /// [w]_{A₁} = sup_J ⟨w⟩_J / inf_J w, exactly.
    ///
    /// For a depth-n step function the supremum over all of 𝒟 is attained at
    /// some level ≤ n (deeper intervals have ⟨w⟩_J = inf_J w).
    pub fn characteristic(&self) -> Rational {
        let mut best = Rational::one();
        for level in 0..=self.w.depth() {
            for pos in 0..(1u64 << level) {
                let j = DyadicInterval::new(level, pos).expect("valid by construction");
                let avg = self.w.average(j).expect("level <= depth");
                let min = self.w.min_over(j).expect("level <= depth");
                let ratio = avg / min;
                if ratio > best {
                    best = ratio;
                }
            }
        }
        best
    }

    /// Weighted measure of the cells where `pred` holds for ψ.
    fn measure_where(&self, psi: &StepFunction, pred: impl Fn(&Rational) -> bool) -> Result<Rational> {
        let (psi, w) = StepFunction::common_depth(psi, &self.w)?;
        let cell = Rational::new(num::BigInt::one(), num::BigInt::from(1u64) << psi.depth());
        let mut total = Rational::zero();
        for (p, wv) in psi.values().iter().zip(w.values()) {
            if pred(p) {
                total += wv;
            }
        }
        Ok(total * cell)
    }
}

/// w({t : ψ(t) ≥ λ}), exactly. The level set uses the closed inequality.
pub fn level_set_measure(psi: &StepFunction, lambda: &Rational, w: &A1Weight) -> Result<Rational> {
    w.measure_where(psi, |p| p >= lambda)
}

/// The five averages attached to a test configuration.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BellmanPoint5 {
    #[serde(with = "crate::dyadic::ser_rational")]
    pub x1: Rational,
    #[serde(with = "crate::dyadic::ser_rational")]
    pub x2: Rational,
    #[serde(with = "crate::dyadic::ser_rational")]
    pub x3: Rational,
    #[serde(with = "crate::dyadic::ser_rational")]
    pub x4: Rational,
    #[serde(with = "crate::dyadic::ser_rational")]
    pub x5: Rational,
}

impl BellmanPoint5 {
    /// Membership in the 5-variable domain: x₃ ≥ |x₁|·x₅, 0 < x₅ ≤ x₄ ≤ Q·x₅.
    pub fn in_domain(&self, q: &Rational) -> bool {
        self.x3 >= self.x1.abs() * &self.x5
            && self.x5 > rat(0)
            && self.x5 <= self.x4
            && self.x4 <= q * &self.x5
    }
}

/// (⟨φ⟩, ⟨ψ⟩, ⟨|φ|w⟩, ⟨w⟩, inf w), exactly.
pub fn bellman_point(phi: &StepFunction, psi: &StepFunction, w: &A1Weight) -> Result<BellmanPoint5> {
    let unit = DyadicInterval::unit();
    let x1 = phi.average(unit)?;
    let x2 = psi.average(unit)?;
    let x3 = phi.abs().mul(w.as_step())?.average(unit)?;
    let x4 = w.as_step().average(unit)?;
    let x5 = w.as_step().min_over(unit)?;
    Ok(BellmanPoint5 { x1, x2, x3, x4, x5 })
}

/// λ·w({T_εφ ≥ λ}) / ⟨|φ|w⟩ — the quantity whose supremum over admissible
/// configurations is the weak-type constant. The level set is computed on
/// ψ − start, i.e. on the pure transform.
pub fn weak_type_ratio(
    phi: &HaarExpansion,
    eps: &EpsilonAssignment,
    start: Rational,
    w: &A1Weight,
    lambda: &Rational,
) -> Result<Rational> {
    if *lambda <= rat(0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let phi_step = haar_reconstruct(phi);
    let denom = phi_step.abs().mul(w.as_step())?.average(DyadicInterval::unit())?;
    if denom.is_zero() {
        return Err(Error::ZeroDenominator("⟨|φ|w⟩ vanishes (φ ≡ 0)"));
    }
    let psi = apply_transform(phi, eps, start.clone())?;
    let shifted = psi.add_scalar(&-start);
    let measure = level_set_measure(&shifted, lambda, w)?;
    Ok(lambda * measure / denom)
}

/// The explicit depth-2 test triple: φ, ψ with ε = (+1, +1, −1) on
/// ([0,1), [0,½), [½,1)), and a weight bumped to 2x₄−1 on the middle half.
///
/// Its Bellman point is (x₁, −1, x₃, x₄, 1) and ψ equals 2x₃+x₁−1 on
/// [½,¾) where the weight is 2x₄−1, so the weighted level set of {ψ ≥ 0}
/// is (2x₄−1)/4 whenever 2x₃+x₁ ≥ 1: a lower bound linear in x₄.
#[derive(Clone, Debug)]
pub struct BumpTriple {
    pub phi: StepFunction,
    pub psi: StepFunction,
    pub weight: A1Weight,
}

impl BumpTriple {
    /// The ε assignment realizing ψ from φ.
    pub fn epsilon() -> EpsilonAssignment {
        EpsilonAssignment::new(
            EpsilonMode::Pm,
            [
                (DyadicInterval::unit(), rat(1)),
                (DyadicInterval::new(1, 0).unwrap(), rat(1)),
                (DyadicInterval::new(1, 1).unwrap(), rat(-1)),
            ],
        )
        .expect("±1 entries")
    }
}

/// Builds the triple at parameters (x₁, x₃, x₄); requires x₃ ≥ |x₁| (so the
/// Bellman point lies in the domain with x₅ = 1) and x₄ ≥ 1.
pub fn bump_triple(x1: &Rational, x3: &Rational, x4: &Rational) -> Result<BumpTriple> {
    if x3 < &x1.abs() {
        return Err(Error::Domain(format!("need x3 >= |x1|, got x1 = {x1}, x3 = {x3}")));
    }
    if x4 < &rat(1) {
        return Err(Error::Domain(format!("need x4 >= 1, got {x4}")));
    }
    let two = rat(2);
    // φ = x1 + x3·H_(0,1) + (x3−x1)·H_(0,½) + (x3+x1)·H_(½,1)
    let phi = StepFunction::new(
        2,
        vec![
            &two * (x1 - x3),
            Rational::zero(),
            Rational::zero(),
            &two * (x1 + x3),
        ],
    )?;
    // same amplitudes with ε = (+1, +1, −1), started at −1
    let psi = StepFunction::new(
        2,
        vec![
            -rat(1) + x1 - &two * x3,
            -rat(1) - x1,
            -rat(1) + &two * x3 + x1,
            -rat(1) - x1,
        ],
    )?;
    let bump = &two * x4 - rat(1);
    let weight = A1Weight::new(StepFunction::new(
        2,
        vec![rat(1), bump.clone(), bump, rat(1)],
    )?)?;
    Ok(BumpTriple { phi, psi, weight })
}

/// Witness file: a transform configuration whose claimed quantities can be
/// recomputed exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransformWitness {
    pub kind: String,
    pub phi_mean: String,
    /// [level, position, amplitude] rows for φ's nonzero coefficients.
    pub phi_coeffs: Vec<(u32, u64, String)>,
    pub phi_depth: u32,
    pub mode: EpsilonMode,
    pub eps: Vec<(u32, u64, String)>,
    pub start: String,
    pub weight: StepFunction,
    pub lambda: String,
}

pub const TRANSFORM_WITNESS_KIND: &str = "transform-witness";

impl TransformWitness {
    pub fn new(
        phi: &HaarExpansion,
        eps: &EpsilonAssignment,
        start: &Rational,
        weight: &A1Weight,
        lambda: &Rational,
    ) -> Self {
        Self {
            kind: TRANSFORM_WITNESS_KIND.to_string(),
            phi_mean: phi.mean().to_string(),
            phi_coeffs: phi
                .coeffs()
                .map(|(j, b)| (j.level(), j.position(), b.to_string()))
                .collect(),
            phi_depth: phi.depth(),
            mode: eps.mode(),
            eps: eps
                .entries()
                .map(|(j, e)| (j.level(), j.position(), e.to_string()))
                .collect(),
            start: start.to_string(),
            weight: weight.as_step().clone(),
            lambda: lambda.to_string(),
        }
    }

    pub fn phi(&self) -> Result<HaarExpansion> {
        let mean = parse_rational(&self.phi_mean)?;
        let coeffs = self
            .phi_coeffs
            .iter()
            .map(|(l, p, s)| Ok((DyadicInterval::new(*l, *p)?, parse_rational(s)?)))
            .collect::<Result<Vec<_>>>()?;
        HaarExpansion::new(mean, coeffs, self.phi_depth)
    }

    pub fn epsilon(&self) -> Result<EpsilonAssignment> {
        let entries = self
            .eps
            .iter()
            .map(|(l, p, s)| Ok((DyadicInterval::new(*l, *p)?, parse_rational(s)?)))
            .collect::<Result<Vec<_>>>()?;
        EpsilonAssignment::new(self.mode, entries)
    }
}

/// Exact replay of a transform witness.
#[derive(Clone, Debug, Serialize)]
pub struct TransformReport {
    pub point: BellmanPoint5,
    pub characteristic: String,
    pub level_set_measure: String,
    pub weak_type_ratio: String,
    pub subordination_ok: bool,
}

/// Recomputes every quantity of a transform witness in exact arithmetic.
pub fn replay_transform_witness(witness: &TransformWitness) -> Result<TransformReport> {
    let phi = witness.phi()?;
    let eps = witness.epsilon()?;
    let start = parse_rational(&witness.start)?;
    let lambda = parse_rational(&witness.lambda)?;
    let weight = A1Weight::new(witness.weight.clone())?;

    let phi_step = haar_reconstruct(&phi);
    let psi = apply_transform(&phi, &eps, start.clone())?;
    let point = bellman_point(&phi_step, &psi, &weight)?;
    let shifted = psi.add_scalar(&-start.clone());
    let measure = level_set_measure(&shifted, &lambda, &weight)?;
    let ratio = weak_type_ratio(&phi, &eps, start, &weight, &lambda)?;
    let subordination_ok = subordination_audit(&phi, &eps).is_ok();
    Ok(TransformReport {
        point,
        characteristic: weight.characteristic().to_string(),
        level_set_measure: measure.to_string(),
        weak_type_ratio: ratio.to_string(),
        subordination_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{haar_decompose, ratio};
    use proptest::prelude::*;

    fn right_half_indicator() -> StepFunction {
        StepFunction::indicator(DyadicInterval::new(1, 1).unwrap())
    }

    #[test]
    fn identity_transform_reconstructs_phi() {
        let phi = haar_decompose(&right_half_indicator());
        let psi = apply_transform(&phi, &EpsilonAssignment::identity_pm(1), phi.mean().clone()).unwrap();
        assert_eq!(psi, right_half_indicator());
    }

    #[test]
    fn negation_flips_the_halves() {
        let phi = haar_decompose(&right_half_indicator());
        let psi = apply_transform(&phi, &EpsilonAssignment::negation_pm(1), ratio(1, 2)).unwrap();
        assert_eq!(psi, StepFunction::indicator(DyadicInterval::new(1, 0).unwrap()));
    }

    #[test]
    fn bump_psi_values_at_half() {
        // x1 = 0, x3 = 1/2: ψ has depth-2 values (−2, −1, 0, −1); the value
        // on [½,¾) is 2x3 + x1 − 1 = 0.
        let t = bump_triple(&rat(0), &ratio(1, 2), &rat(2)).unwrap();
        let phi = haar_decompose(&t.phi);
        let psi = apply_transform(&phi, &BumpTriple::epsilon(), rat(-1)).unwrap();
        assert_eq!(psi.values(), &[rat(-2), rat(-1), rat(0), rat(-1)]);
        assert_eq!(psi, t.psi);
    }

    #[test]
    fn pm_mode_requires_epsilon_on_live_coefficients() {
        let phi = haar_decompose(&right_half_indicator());
        let empty = EpsilonAssignment::new(EpsilonMode::Pm, []).unwrap();
        assert!(matches!(
            apply_transform(&phi, &empty, rat(0)),
            Err(Error::MissingEpsilon(_))
        ));
        // SUB mode: missing entries freeze the coefficient to 0
        let sub = EpsilonAssignment::new(EpsilonMode::Sub, []).unwrap();
        let psi = apply_transform(&phi, &sub, rat(3)).unwrap();
        assert_eq!(psi, StepFunction::constant(rat(3)).refine_to(1).unwrap());
    }

    #[test]
    fn characteristic_of_constant_weight_is_one() {
        let w = A1Weight::new(StepFunction::constant(ratio(5, 3))).unwrap();
        assert_eq!(w.characteristic(), rat(1));
    }

    #[test]
    fn characteristic_of_bump_weight_is_x4() {
        let t = bump_triple(&rat(0), &ratio(1, 2), &rat(2)).unwrap();
        assert_eq!(t.weight.as_step().values(), &[rat(1), rat(3), rat(3), rat(1)]);
        assert_eq!(t.weight.characteristic(), rat(2));
        for x4 in [rat(1), rat(2), rat(4), rat(8), ratio(17, 3)] {
            let t = bump_triple(&rat(0), &ratio(1, 2), &x4).unwrap();
            assert_eq!(t.weight.characteristic(), x4);
        }
    }

    #[test]
    fn nonpositive_weight_is_rejected() {
        let w = StepFunction::new(1, vec![rat(1), rat(0)]).unwrap();
        assert!(matches!(A1Weight::new(w), Err(Error::NonpositiveWeight)));
    }

    #[test]
    fn level_set_of_zero_function_at_zero() {
        let m = level_set_measure(&StepFunction::zero(), &rat(0), &A1Weight::constant_one()).unwrap();
        assert_eq!(m, rat(1));
    }

    #[test]
    fn level_set_of_bump_triple() {
        let t = bump_triple(&rat(0), &ratio(1, 2), &rat(2)).unwrap();
        let m = level_set_measure(&t.psi, &rat(0), &t.weight).unwrap();
        assert_eq!(m, ratio(3, 4)); // (2x4 − 1)/4 at x4 = 2
        for x4 in [rat(2), rat(4), rat(8)] {
            let t = bump_triple(&rat(0), &ratio(1, 2), &x4).unwrap();
            let m = level_set_measure(&t.psi, &rat(0), &t.weight).unwrap();
            assert_eq!(m, (rat(2) * &x4 - rat(1)) / rat(4));
        }
    }

    #[test]
    fn level_set_above_range_is_empty() {
        let h = StepFunction::new(1, vec![rat(-1), rat(1)]).unwrap();
        let m = level_set_measure(&h, &rat(2), &A1Weight::constant_one()).unwrap();
        assert_eq!(m, rat(0));
    }

    #[test]
    fn level_set_monotone_in_lambda_and_additive_in_weight() {
        let t = bump_triple(&ratio(1, 4), &rat(1), &rat(3)).unwrap();
        let lambdas = [rat(-2), rat(-1), rat(0), ratio(1, 2), rat(1), rat(5)];
        let mut prev: Option<Rational> = None;
        for l in &lambdas {
            let m = level_set_measure(&t.psi, l, &t.weight).unwrap();
            if let Some(p) = prev {
                assert!(m <= p, "level-set measure must be nonincreasing in lambda");
            }
            prev = Some(m);
        }
        // additivity in w: w = w1 + w2 cellwise
        let w1 = A1Weight::new(StepFunction::new(1, vec![rat(1), rat(2)]).unwrap()).unwrap();
        let w2 = A1Weight::new(StepFunction::new(2, vec![rat(3), rat(1), rat(1), rat(5)]).unwrap()).unwrap();
        let wsum = A1Weight::new(w1.as_step().add(w2.as_step()).unwrap()).unwrap();
        let lam = rat(0);
        let m1 = level_set_measure(&t.psi, &lam, &w1).unwrap();
        let m2 = level_set_measure(&t.psi, &lam, &w2).unwrap();
        let ms = level_set_measure(&t.psi, &lam, &wsum).unwrap();
        assert_eq!(ms, m1 + m2);
    }

    #[test]
    fn bellman_point_of_bump_triple() {
        for (x1, x3, x4) in [
            (rat(0), ratio(1, 2), rat(2)),
            (ratio(1, 3), rat(1), rat(7)),
            (rat(-1), rat(2), ratio(3, 2)),
        ] {
            let t = bump_triple(&x1, &x3, &x4).unwrap();
            let p = bellman_point(&t.phi, &t.psi, &t.weight).unwrap();
            assert_eq!(p.x1, x1);
            assert_eq!(p.x2, rat(-1));
            assert_eq!(p.x3, x3);
            assert_eq!(p.x4, x4);
            assert_eq!(p.x5, rat(1));
        }
    }

    #[test]
    fn bellman_point_of_constants() {
        let c = ratio(-3, 4);
        let p = bellman_point(
            &StepFunction::constant(c.clone()),
            &StepFunction::constant(c.clone()),
            &A1Weight::constant_one(),
        )
        .unwrap();
        assert_eq!(p.x1, c);
        assert_eq!(p.x2, c);
        assert_eq!(p.x3, c.abs());
        assert_eq!(p.x4, rat(1));
        assert_eq!(p.x5, rat(1));
    }

    #[test]
    fn bellman_point_of_haar_pair() {
        let h = StepFunction::new(1, vec![rat(-1), rat(1)]).unwrap();
        let psi = h.add_scalar(&rat(-1));
        let p = bellman_point(&h, &psi, &A1Weight::constant_one()).unwrap();
        assert_eq!(p.x1, rat(0));
        assert_eq!(p.x2, rat(-1));
        assert_eq!(p.x3, rat(1));
    }

    #[test]
    fn weak_type_ratio_of_bump_triple() {
        let t = bump_triple(&rat(0), &ratio(1, 2), &rat(2)).unwrap();
        let phi = haar_decompose(&t.phi);
        let r = weak_type_ratio(&phi, &BumpTriple::epsilon(), rat(-1), &t.weight, &rat(1)).unwrap();
        assert_eq!(r, ratio(3, 2));
        // symbolically in x4: ratio = (2x4−1)/2
        for x4 in [rat(3), rat(10), ratio(9, 2)] {
            let t = bump_triple(&rat(0), &ratio(1, 2), &x4).unwrap();
            let phi = haar_decompose(&t.phi);
            let r = weak_type_ratio(&phi, &BumpTriple::epsilon(), rat(-1), &t.weight, &rat(1)).unwrap();
            assert_eq!(r, (rat(2) * &x4 - rat(1)) / rat(2));
        }
    }

    #[test]
    fn weak_type_ratio_of_haar() {
        let h = StepFunction::new(1, vec![rat(-1), rat(1)]).unwrap();
        let phi = haar_decompose(&h);
        let r = weak_type_ratio(
            &phi,
            &EpsilonAssignment::identity_pm(1),
            rat(0),
            &A1Weight::constant_one(),
            &rat(1),
        )
        .unwrap();
        assert_eq!(r, ratio(1, 2));
    }

    #[test]
    fn weak_type_ratio_rejects_zero_phi() {
        let phi = haar_decompose(&StepFunction::zero());
        let err = weak_type_ratio(
            &phi,
            &EpsilonAssignment::identity_pm(0),
            rat(0),
            &A1Weight::constant_one(),
            &rat(1),
        );
        assert!(matches!(err, Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn bump_triple_domain_checks() {
        assert!(bump_triple(&rat(2), &rat(1), &rat(2)).is_err());
        assert!(bump_triple(&rat(0), &rat(1), &ratio(1, 2)).is_err());
        // degenerate constant-weight case
        let t = bump_triple(&rat(1), &rat(1), &rat(1)).unwrap();
        assert_eq!(t.weight.characteristic(), rat(1));
        let p = bellman_point(&t.phi, &t.psi, &t.weight).unwrap();
        assert_eq!((p.x1, p.x2, p.x3, p.x4, p.x5), (rat(1), rat(-1), rat(1), rat(1), rat(1)));
    }

    #[test]
    fn transform_witness_replays_exactly() {
        let t = bump_triple(&rat(0), &ratio(1, 2), &rat(4)).unwrap();
        let phi = haar_decompose(&t.phi);
        let witness = TransformWitness::new(&phi, &BumpTriple::epsilon(), &rat(-1), &t.weight, &rat(1));
        let json = serde_json::to_string_pretty(&witness).unwrap();
        let back: TransformWitness = serde_json::from_str(&json).unwrap();
        let report = replay_transform_witness(&back).unwrap();
        assert_eq!(report.point.x4, rat(4));
        assert_eq!(report.characteristic, "4");
        assert_eq!(report.level_set_measure, "7/4");
        assert_eq!(report.weak_type_ratio, "7/2");
        assert!(report.subordination_ok);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Every SUB assignment built from in-range factors passes the audit
        /// and never grows a coefficient.
        #[test]
        fn sub_assignments_are_subordinate(
            coeffs in proptest::collection::vec((-6i64..=6, 1i64..=4), 7),
            factors in proptest::collection::vec(-4i64..=4, 7),
        ) {
            let intervals: Vec<_> = DyadicInterval::all_above_depth(3).collect();
            let phi = HaarExpansion::new(
                rat(0),
                intervals.iter().zip(&coeffs).map(|(j, (n, d))| (*j, ratio(*n, *d))),
                3,
            ).unwrap();
            let eps = EpsilonAssignment::new(
                EpsilonMode::Sub,
                intervals.iter().zip(&factors).map(|(j, k)| (*j, ratio(*k, 4))),
            ).unwrap();
            prop_assert!(subordination_audit(&phi, &eps).is_ok());
            let psi = apply_transform(&phi, &eps, rat(0)).unwrap();
            let psi_exp = haar_decompose(&psi);
            for (j, b) in phi.coeffs() {
                prop_assert!(psi_exp.amplitude(*j).abs() <= b.abs());
            }
        }
    }
}
