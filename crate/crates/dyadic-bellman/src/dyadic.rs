//! Exact dyadic step functions, averages, martingale differences and Haar
//! expansions on the unit interval [0,1).
//!
//! Everything in this module is exact rational arithmetic. A [`StepFunction`]
//! of depth n is constant on the 2^n dyadic cells [i/2^n, (i+1)/2^n); a
//! [`HaarExpansion`] is its martingale representation: the global mean plus
//! one coefficient per dyadic interval.
//!
//! Orientation convention: the Haar function of an interval J is **+1 on the
//! right half** of J and −1 on the left half (in the L^∞ normalization H_J;
//! the L²-normalized h_J is |J|^{−1/2}·H_J). Coefficients are stored as the
//! L^∞ amplitudes b_J = ½(⟨f⟩_{J⁺} − ⟨f⟩_{J⁻}); these are rational for
//! rational inputs, while the L² coefficients (f, h_J) = b_J·|J|^{1/2} pick
//! up a factor √2 at odd levels and therefore cannot be stored exactly.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact scalar used throughout the rational layer.
pub type Rational = BigRational;

/// Largest step-function depth the exact layer accepts (2^24 cells).
pub const MAX_DEPTH: u32 = 24;

/// Shorthand for a rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for the rational n/d.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "p/q", "p" or a finite decimal like "0.25" into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse rational from {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::ZeroDenominator("rational literal"));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.len() as u32;
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let denom = BigInt::from(10u32).pow(digits);
        let neg = s.starts_with('-');
        let num = &int_part * &denom + if neg { -frac_part } else { frac_part };
        return Ok(Rational::new(num, denom));
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// Serde helpers: rationals as strings ("p/q", integers without the /1).
pub mod ser_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// The dyadic interval [m/2^k, (m+1)/2^k), encoded as (level k, position m).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    level: u32,
    position: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, position: u64) -> Result<Self> {
        if level > MAX_DEPTH as u32 || (level < 64 && position >= (1u64 << level)) {
            return Err(Error::InvalidInterval { level, position });
        }
        Ok(Self { level, position })
    }

    /// The unit interval [0,1).
    pub fn unit() -> Self {
        Self { level: 0, position: 0 }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    /// |J| = 2^{-level}.
    pub fn measure(&self) -> Rational {
        Rational::new(BigInt::one(), BigInt::from(1u64) << self.level)
    }

    /// Left half (the child where H_J = −1).
    pub fn left_child(&self) -> Self {
        Self { level: self.level + 1, position: 2 * self.position }
    }

    /// Right half (the child where H_J = +1).
    pub fn right_child(&self) -> Self {
        Self { level: self.level + 1, position: 2 * self.position + 1 }
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self { level: self.level - 1, position: self.position / 2 })
    }

    /// Cell-index range covered by this interval at a finer depth.
    pub fn cell_range(&self, depth: u32) -> Result<std::ops::Range<usize>> {
        if self.level > depth {
            return Err(Error::LevelTooDeep { level: self.level, depth });
        }
        let shift = depth - self.level;
        let start = (self.position as usize) << shift;
        Ok(start..start + (1usize << shift))
    }

    /// All dyadic subintervals of [0,1) with level < depth, coarse to fine.
    pub fn all_above_depth(depth: u32) -> impl Iterator<Item = DyadicInterval> {
        (0..depth).flat_map(|k| (0..(1u64 << k)).map(move |m| DyadicInterval { level: k, position: m }))
    }
}

impl fmt::Debug for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}/{d}, {}/{d})", self.position, self.position + 1, d = 1u64 << self.level)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A function on [0,1) constant on dyadic cells of a fixed depth.
#[derive(Clone, PartialEq, Eq)]
pub struct StepFunction {
    depth: u32,
    values: Vec<Rational>,
}

impl StepFunction {
    pub fn new(depth: u32, values: Vec<Rational>) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::DepthTooLarge(depth, MAX_DEPTH));
        }
        let expected = 1usize << depth;
        if values.len() != expected {
            return Err(Error::ValueCountMismatch { depth, expected, got: values.len() });
        }
        Ok(Self { depth, values })
    }

    pub fn constant(c: Rational) -> Self {
        Self { depth: 0, values: vec![c] }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    /// Indicator of a dyadic interval, at the interval's own depth.
    pub fn indicator(interval: DyadicInterval) -> Self {
        let n = 1usize << interval.level();
        let mut values = vec![Rational::zero(); n];
        values[interval.position() as usize] = Rational::one();
        Self { depth: interval.level(), values }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational_to_f64).collect()
    }

    /// Refines to a deeper depth by duplicating cell values; all dyadic
    /// averages are unchanged.
    pub fn refine_to(&self, depth: u32) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::LevelTooDeep { level: depth, depth: self.depth });
        }
        if depth > MAX_DEPTH {
            return Err(Error::DepthTooLarge(depth, MAX_DEPTH));
        }
        let copies = 1usize << (depth - self.depth);
        let values = self
            .values
            .iter()
            .flat_map(|v| std::iter::repeat(v.clone()).take(copies))
            .collect();
        Ok(Self { depth, values })
    }

    /// Both functions refined to their common depth.
    pub fn common_depth(a: &Self, b: &Self) -> Result<(Self, Self)> {
        let d = a.depth.max(b.depth);
        Ok((a.refine_to(d)?, b.refine_to(d)?))
    }

    /// ⟨f⟩_J, the exact average over a dyadic interval.
    pub fn average(&self, interval: DyadicInterval) -> Result<Rational> {
        let range = interval.cell_range(self.depth)?;
        let count = range.len();
        let sum: Rational = self.values[range].iter().sum();
        Ok(sum / rat(count as i64))
    }

    pub fn mean(&self) -> Rational {
        self.average(DyadicInterval::unit()).expect("unit interval is never too deep")
    }

    /// ∫_0^1 f dt.
    pub fn integral(&self) -> Rational {
        self.mean()
    }

    /// min over a dyadic interval.
    pub fn min_over(&self, interval: DyadicInterval) -> Result<Rational> {
        let range = interval.cell_range(self.depth)?;
        Ok(self.values[range].iter().min().expect("nonempty range").clone())
    }

    pub fn abs(&self) -> Self {
        Self { depth: self.depth, values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { depth: self.depth, values: self.values.iter().map(|v| -v).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = Self::common_depth(self, other)?;
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect();
        Ok(Self { depth: a.depth, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = Self::common_depth(self, other)?;
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
        Ok(Self { depth: a.depth, values })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { depth: self.depth, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add_scalar(&self, c: &Rational) -> Self {
        Self { depth: self.depth, values: self.values.iter().map(|v| v + c).collect() }
    }
}

impl fmt::Debug for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StepFunction(depth {}, [", self.depth)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "])")
    }
}

impl Serialize for StepFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            depth: u32,
            values: Vec<String>,
        }
        Repr { depth: self.depth, values: self.values.iter().map(|v| v.to_string()).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            depth: u32,
            values: Vec<String>,
        }
        let r = Repr::deserialize(d)?;
        let values = r
            .values
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        StepFunction::new(r.depth, values).map_err(serde::de::Error::custom)
    }
}

/// Converts an exact rational to the nearest f64.
pub fn rational_to_f64(r: &Rational) -> f64 {
    num::ToPrimitive::to_f64(r).unwrap_or_else(|| {
        // Fall back for huge numerators/denominators.
        let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
        let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
        n / d
    })
}

/// Martingale representation of a step function: the mean plus one Haar
/// amplitude per dyadic interval.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HaarExpansion {
    mean: Rational,
    coeffs: BTreeMap<DyadicInterval, Rational>,
    depth: u32,
}

impl HaarExpansion {
    /// Builds an expansion from explicit amplitudes; zero entries are dropped.
    pub fn new(mean: Rational, coeffs: impl IntoIterator<Item = (DyadicInterval, Rational)>, depth: u32) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::DepthTooLarge(depth, MAX_DEPTH));
        }
        let mut map = BTreeMap::new();
        for (interval, value) in coeffs {
            if interval.level() + 1 > depth {
                return Err(Error::LevelTooDeep { level: interval.level() + 1, depth });
            }
            if !value.is_zero() {
                map.insert(interval, value);
            }
        }
        Ok(Self { mean, coeffs: map, depth })
    }

    pub fn mean(&self) -> &Rational {
        &self.mean
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Nonzero amplitudes, coarse to fine.
    pub fn coeffs(&self) -> impl Iterator<Item = (&DyadicInterval, &Rational)> {
        self.coeffs.iter()
    }

    /// The L^∞ amplitude b_J = ½(⟨f⟩_{J⁺} − ⟨f⟩_{J⁻}); zero if absent.
    pub fn amplitude(&self, interval: DyadicInterval) -> Rational {
        self.coeffs.get(&interval).cloned().unwrap_or_else(Rational::zero)
    }

    /// ∫ f², computed from the expansion: mean² + Σ b_J²·|J|.
    ///
    /// Equals Σ a_J² over L²-normalized coefficients, without ever forming
    /// the irrational a_J themselves.
    pub fn l2_norm_sq(&self) -> Rational {
        let mut total = &self.mean * &self.mean;
        for (interval, b) in &self.coeffs {
            total += b * b * interval.measure();
        }
        total
    }
}

/// Decomposes a step function into its mean and Haar amplitudes.
pub fn haar_decompose(f: &StepFunction) -> HaarExpansion {
    let mut coeffs = BTreeMap::new();
    for interval in DyadicInterval::all_above_depth(f.depth()) {
        let right = f.average(interval.right_child()).expect("level+1 <= depth");
        let left = f.average(interval.left_child()).expect("level+1 <= depth");
        let b = (right - left) / rat(2);
        if !b.is_zero() {
            coeffs.insert(interval, b);
        }
    }
    HaarExpansion { mean: f.mean(), coeffs, depth: f.depth() }
}

/// Rebuilds the step function f = mean + Σ b_J H_J; exact inverse of
/// [`haar_decompose`].
pub fn haar_reconstruct(expansion: &HaarExpansion) -> StepFunction {
    let depth = expansion.depth;
    let mut values = vec![expansion.mean.clone(); 1usize << depth];
    for (interval, b) in &expansion.coeffs {
        let left = interval.left_child().cell_range(depth).expect("checked at construction");
        let right = interval.right_child().cell_range(depth).expect("checked at construction");
        for i in left {
            values[i] -= b;
        }
        for i in right {
            values[i] += b;
        }
    }
    StepFunction { depth, values }
}

/// Δ_J f = ½(⟨f⟩_{J⁺} − ⟨f⟩_{J⁻})(χ_{J⁺} − χ_{J⁻}), as a step function at
/// the depth of f (zero outside J).
pub fn martingale_difference(f: &StepFunction, interval: DyadicInterval) -> Result<StepFunction> {
    if interval.level() + 1 > f.depth() {
        return Err(Error::LevelTooDeep { level: interval.level() + 1, depth: f.depth() });
    }
    let right = f.average(interval.right_child())?;
    let left = f.average(interval.left_child())?;
    let b = (right - left) / rat(2);
    let mut values = vec![Rational::zero(); 1usize << f.depth()];
    for i in interval.left_child().cell_range(f.depth())? {
        values[i] = -b.clone();
    }
    for i in interval.right_child().cell_range(f.depth())? {
        values[i] = b.clone();
    }
    Ok(StepFunction { depth: f.depth(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn right_half_indicator() -> StepFunction {
        StepFunction::indicator(DyadicInterval::new(1, 1).unwrap())
    }

    /// h_{[0,1)} in L^∞ normalization: −1 on the left half, +1 on the right.
    fn haar_unit() -> StepFunction {
        StepFunction::new(1, vec![rat(-1), rat(1)]).unwrap()
    }

    #[test]
    fn average_of_half_mass_indicator() {
        let f = right_half_indicator();
        assert_eq!(f.average(DyadicInterval::unit()).unwrap(), ratio(1, 2));
    }

    #[test]
    fn average_of_constant_is_constant() {
        let f = StepFunction::constant(ratio(7, 3)).refine_to(3).unwrap();
        for interval in DyadicInterval::all_above_depth(3) {
            assert_eq!(f.average(interval).unwrap(), ratio(7, 3));
        }
    }

    #[test]
    fn average_of_depth2_bump_phi_is_zero() {
        // values (2x1−2x3, 0, 0, 2x1+2x3) at x1 = 0, x3 = 1
        let f = StepFunction::new(2, vec![rat(-2), rat(0), rat(0), rat(2)]).unwrap();
        assert_eq!(f.average(DyadicInterval::unit()).unwrap(), rat(0));
    }

    #[test]
    fn average_rejects_too_deep_interval() {
        let f = right_half_indicator();
        let deep = DyadicInterval::new(4, 3).unwrap();
        assert!(matches!(f.average(deep), Err(Error::LevelTooDeep { .. })));
    }

    #[test]
    fn martingale_difference_of_indicator() {
        let f = right_half_indicator();
        let d = martingale_difference(&f, DyadicInterval::unit()).unwrap();
        assert_eq!(d.values(), &[ratio(-1, 2), ratio(1, 2)]);
    }

    #[test]
    fn martingale_difference_of_constant_is_zero() {
        let f = StepFunction::constant(rat(5)).refine_to(2).unwrap();
        let d = martingale_difference(&f, DyadicInterval::new(1, 0).unwrap()).unwrap();
        assert!(d.values().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn haar_function_is_its_own_difference() {
        let h = haar_unit();
        let d = martingale_difference(&h, DyadicInterval::unit()).unwrap();
        assert_eq!(d, h);
    }

    #[test]
    fn decompose_half_mass_indicator() {
        let e = haar_decompose(&right_half_indicator());
        assert_eq!(*e.mean(), ratio(1, 2));
        assert_eq!(e.amplitude(DyadicInterval::unit()), ratio(1, 2));
        assert_eq!(e.coeffs().count(), 1);
    }

    #[test]
    fn decompose_constant() {
        let e = haar_decompose(&StepFunction::constant(ratio(-3, 7)).refine_to(3).unwrap());
        assert_eq!(*e.mean(), ratio(-3, 7));
        assert_eq!(e.coeffs().count(), 0);
    }

    #[test]
    fn decompose_haar_unit() {
        let e = haar_decompose(&haar_unit());
        assert_eq!(*e.mean(), rat(0));
        assert_eq!(e.amplitude(DyadicInterval::unit()), rat(1));
        assert_eq!(e.coeffs().count(), 1);
    }

    #[test]
    fn reconstruct_examples() {
        let e = HaarExpansion::new(rat(0), [(DyadicInterval::unit(), rat(1))], 1).unwrap();
        assert_eq!(haar_reconstruct(&e), haar_unit());

        let e = HaarExpansion::new(ratio(1, 2), [(DyadicInterval::unit(), ratio(1, 2))], 1).unwrap();
        assert_eq!(haar_reconstruct(&e), right_half_indicator());

        let e = HaarExpansion::new(ratio(9, 4), [], 0).unwrap();
        assert_eq!(haar_reconstruct(&e), StepFunction::constant(ratio(9, 4)));
    }

    #[test]
    fn orientation_right_half_has_positive_coefficient() {
        for level in 0..4u32 {
            for pos in 0..(1u64 << level) {
                let j = DyadicInterval::new(level, pos).unwrap();
                let f = StepFunction::indicator(j.right_child());
                let e = haar_decompose(&f);
                assert!(e.amplitude(j) > rat(0), "coefficient at {j} should be positive");
            }
        }
    }

    #[test]
    fn refinement_preserves_averages() {
        let f = StepFunction::new(2, vec![rat(1), rat(-3), ratio(1, 2), rat(0)]).unwrap();
        let g = f.refine_to(5).unwrap();
        for interval in DyadicInterval::all_above_depth(2) {
            assert_eq!(f.average(interval).unwrap(), g.average(interval).unwrap());
        }
    }

    #[test]
    fn serde_round_trip() {
        let f = StepFunction::new(2, vec![ratio(1, 3), rat(-2), rat(0), ratio(7, 2)]).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"1/3\""));
        let back: StepFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn parse_rational_accepts_fractions_integers_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-5").unwrap(), rat(-5));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    fn arb_step_function(max_depth: u32) -> impl Strategy<Value = StepFunction> {
        (0..=max_depth).prop_flat_map(|depth| {
            proptest::collection::vec((-8i64..=8, 1i64..=6), 1usize << depth)
                .prop_map(move |pairs| {
                    let values = pairs.into_iter().map(|(n, d)| ratio(n, d)).collect();
                    StepFunction::new(depth, values).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn round_trip_decompose_reconstruct(f in arb_step_function(6)) {
            let e = haar_decompose(&f);
            prop_assert_eq!(haar_reconstruct(&e), f.clone());
            let e2 = haar_decompose(&haar_reconstruct(&e));
            prop_assert_eq!(e2, e);
        }

        #[test]
        fn parseval_is_exact(f in arb_step_function(6)) {
            let e = haar_decompose(&f);
            let direct = f.mul(&f).unwrap().integral();
            prop_assert_eq!(e.l2_norm_sq(), direct);
        }

        #[test]
        fn telescoping_sum_of_differences(f in arb_step_function(5)) {
            let mut acc = StepFunction::constant(f.mean()).refine_to(f.depth()).unwrap();
            for interval in DyadicInterval::all_above_depth(f.depth()) {
                acc = acc.add(&martingale_difference(&f, interval).unwrap()).unwrap();
            }
            prop_assert_eq!(acc, f);
        }
    }

    #[test]
    fn parseval_at_depth_8() {
        // one deterministic case at the full depth named by the contract
        let values: Vec<Rational> = (0..256).map(|i| ratio((i * 7 % 23) - 11, 1 + (i % 5))).collect();
        let f = StepFunction::new(8, values).unwrap();
        let e = haar_decompose(&f);
        assert_eq!(e.l2_norm_sq(), f.mul(&f).unwrap().integral());
    }
}
