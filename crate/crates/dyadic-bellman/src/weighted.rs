//! The weighted slice envelope on G = {|x₁| ≤ x₃, 1 ≤ x₄ ≤ Q}, the
//! weak-type statistic R(Q) = sup V/x₃, and its diagnostics.
//!
//! The five-variable Bellman function reduces to the slice
//! 𝓑(x₁,x₃,x₄) = B(x₁,−1,x₃,x₄,1) by two homogeneities: scaling the pair
//! (φ,ψ) normalizes x₂ to −1, scaling the weight normalizes x₅ to 1, with
//! B(c) = x₅·𝓑(−x₁/x₂, −x₃/(x₂x₅), x₄/x₅) for x₂ < 0 and B(c) = x₄ for
//! x₂ ≥ 0 (a constant ψ = x₂ is then admissible and captures all of w).
//!
//! The value iteration seeds the x₄ = 1 face with the solved constant-weight
//! function and improves interior points through admissible splits, whose
//! children renormalize back onto the slice. Every stored value is a lower
//! bound for 𝓑 up to interpolation: the slice function is concave, so the
//! sheared-grid multilinear interpolation under-estimates it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{b_full, Point3};
use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// A point of the slice domain G.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicePoint {
    pub x1: f64,
    pub x3: f64,
    pub x4: f64,
}

impl SlicePoint {
    pub fn new(x1: f64, x3: f64, x4: f64) -> Self {
        Self { x1, x3, x4 }
    }

    pub fn in_domain(&self, q: f64) -> bool {
        self.x1.abs() <= self.x3 && 1.0 <= self.x4 && self.x4 <= q
    }

    /// Membership in the subdomain used by the scaling-ray diagnostics:
    /// x₃ > 2|x₁| and 2 < x₄ < Q.
    pub fn in_inner_subdomain(&self, q: f64) -> bool {
        self.x3 > 2.0 * self.x1.abs() && 2.0 < self.x4 && self.x4 < q
    }
}

/// A five-variable point (x₁, x₂, x₃, x₄, x₅).
pub type Point5 = [f64; 5];

/// Membership in the five-variable domain for ambient characteristic `q`.
pub fn in_domain5(c: &Point5, q: f64) -> bool {
    c[2] >= c[0].abs() * c[4] && c[4] > 0.0 && c[4] <= c[3] && c[3] <= q * c[4]
}

/// Renormalizes a point with x₂ < 0 onto the slice:
/// ((−x₁/x₂, −x₃/(x₂x₅), x₄/x₅), scale = x₅).
pub fn normalize(c: &Point5, q: f64) -> Result<(SlicePoint, f64)> {
    if !in_domain5(c, q) {
        return Err(Error::Domain(format!("{c:?} outside the five-variable domain")));
    }
    if c[1] >= 0.0 {
        return Err(Error::Domain(
            "x2 >= 0 has the exact value x4; renormalization applies to x2 < 0 only".into(),
        ));
    }
    let s1 = -1.0 / c[1];
    Ok((SlicePoint::new(c[0] * s1, c[2] * s1 / c[4], c[3] / c[4]), c[4]))
}

/// One admissible split: children c± = (x₁±d₁, −1±d₂, x₃±d₃, x₄±d₄, s±)
/// with min(s⁺, s⁻) = 1 so the parent stays on the slice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSplit {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub s_plus: f64,
    pub s_minus: f64,
}

impl WeightedSplit {
    pub fn validate(&self) -> Result<()> {
        if self.d2.abs() > self.d1.abs() + 1e-12 {
            return Err(Error::Constraint(format!("|d2| <= |d1| required, got {self:?}")));
        }
        if self.s_plus.min(self.s_minus) != 1.0 {
            return Err(Error::Constraint(format!("min(s+, s-) must be 1, got {self:?}")));
        }
        Ok(())
    }
}

/// A split rule: fixed increments, or one of the point-parameterized moves
/// realizing the explicit depth-2 extremal triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MoveRule {
    Fixed(WeightedSplit),
    /// d = (x₃, x₃, x₁, 0), s = (1, 1): the top split of the triple.
    BumpTop,
    /// d = (x₃, −x₃, x₃, 1−x₄), s = (1, 2x₄−1): collapses the weight into a
    /// constant bump on one child, terminal value 2x₄−1 on the other.
    WeightCollapse,
}

impl MoveRule {
    pub fn expand(&self, x: &SlicePoint) -> WeightedSplit {
        match self {
            MoveRule::Fixed(s) => *s,
            MoveRule::BumpTop => WeightedSplit {
                d1: x.x3,
                d2: x.x3,
                d3: x.x1,
                d4: 0.0,
                s_plus: 1.0,
                s_minus: 1.0,
            },
            MoveRule::WeightCollapse => WeightedSplit {
                d1: x.x3,
                d2: -x.x3,
                d3: x.x3,
                d4: 1.0 - x.x4,
                s_plus: 1.0,
                s_minus: 2.0 * x.x4 - 1.0,
            },
        }
    }
}

/// The two point-parameterized moves realizing the depth-2 extremal triple.
pub fn seeded_moves() -> Vec<MoveRule> {
    vec![MoveRule::BumpTop, MoveRule::WeightCollapse]
}

/// The fixed quantized family: (d₁,d₂) as in the unweighted set, d₃ on the
/// ¼ lattice, and weight moves {keep, x₄-steps of ±h₄ and ±2h₄, x₅ jumps to
/// powers of two up to Q in either child}.
pub fn default_weighted_moves(q: f64, h4: f64) -> Vec<MoveRule> {
    let mut weight_moves: Vec<(f64, f64, f64)> = vec![(0.0, 1.0, 1.0)];
    for d4 in [h4, -h4, 2.0 * h4, -2.0 * h4] {
        weight_moves.push((d4, 1.0, 1.0));
    }
    let mut sigma = 2.0;
    while sigma <= q {
        weight_moves.push((0.0, 1.0, sigma));
        weight_moves.push((0.0, sigma, 1.0));
        sigma *= 2.0;
    }
    let mut moves = Vec::new();
    for d1 in [0.25, 0.5, 1.0, 2.0] {
        for d2 in [0.0, d1 / 2.0, -d1 / 2.0, d1, -d1] {
            for d3 in [0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0] {
                for &(d4, sp, sm) in &weight_moves {
                    moves.push(MoveRule::Fixed(WeightedSplit {
                        d1,
                        d2,
                        d3,
                        d4,
                        s_plus: sp,
                        s_minus: sm,
                    }));
                }
            }
        }
    }
    moves
}

/// Configuration of the weighted value iteration.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedDpConfig {
    pub q: f64,
    /// Nodes along x₁, gap = x₃ − x₁, and x₄.
    pub n1: usize,
    pub n_gap: usize,
    pub n4: usize,
    pub x3_max: f64,
    pub iters: usize,
    /// Include the point-parameterized moves of the extremal triple.
    pub seeded: bool,
    /// Override the move set entirely (seeded flag still applies).
    pub moves: Option<Vec<MoveRule>>,
    pub record_history: bool,
}

impl WeightedDpConfig {
    pub fn new(q: f64) -> Self {
        Self {
            q,
            n1: 65,
            n_gap: 65,
            n4: 33,
            x3_max: 2.0,
            iters: 4,
            seeded: true,
            moves: None,
            record_history: false,
        }
    }

    fn h4(&self) -> f64 {
        (self.q.max(1.0 + 1e-9) - 1.0) / (self.n4 - 1) as f64
    }
}

/// The computed envelope on the slice, with its iteration history of the
/// weak-type statistic.
#[derive(Clone, Debug)]
pub struct WeightedEnvelope {
    /// Axes: (x₁, gap = x₃ − x₁, x₄).
    pub grid: GridFunction,
    pub q: f64,
    pub iterations: usize,
    /// R after each iteration (R of V₀ first).
    pub r_history: Vec<f64>,
    pub history: Vec<Vec<f64>>,
    x1_max: f64,
    gap_max: f64,
}

impl WeightedEnvelope {
    /// Envelope value at a slice point; even in x₁, clamped in x₃ beyond the
    /// grid (the target is nondecreasing in x₃), zero beyond the x₁ range.
    pub fn value(&self, x1: f64, x3: f64, x4: f64) -> Result<f64> {
        let a = x1.abs();
        if x3 < a {
            return Err(Error::Domain(format!("need x3 >= |x1|, got ({x1}, {x3})")));
        }
        if !(1.0..=self.q).contains(&x4) {
            return Err(Error::Domain(format!("need 1 <= x4 <= {}, got {x4}", self.q)));
        }
        Ok(self.lookup(a, x3 - a, x4))
    }

    fn lookup(&self, x1_abs: f64, gap: f64, x4: f64) -> f64 {
        if x1_abs > self.x1_max + 1e-12 {
            return 0.0;
        }
        self.grid.interpolate_clamped(&[
            x1_abs,
            gap.clamp(0.0, self.gap_max),
            x4.clamp(1.0, self.q),
        ])
    }

    /// A total slice function for diagnostics (clamped lookup, even in x₁).
    pub fn slice_fn(&self) -> impl Fn(f64, f64, f64) -> f64 + '_ {
        move |x1, x3, x4| {
            let a = x1.abs();
            self.lookup(a, (x3 - a).max(0.0), x4)
        }
    }

    /// R = max over grid nodes with x₃ > 0 of V/x₃, with its argmax.
    pub fn r_statistic(&self) -> RStatistic {
        r_of_values(&self.grid, self.grid.values(), self.q)
    }

    /// Rows (x1, x3, x4, value, ratio) over all grid nodes.
    pub fn rows(&self) -> Vec<(f64, f64, f64, f64, f64)> {
        let ax = self.grid.axes();
        let mut out = Vec::with_capacity(self.grid.len());
        for i in 0..ax[0].len() {
            for j in 0..ax[1].len() {
                for k in 0..ax[2].len() {
                    let x1 = ax[0][i];
                    let x3 = x1 + ax[1][j];
                    let x4 = ax[2][k];
                    let v = self.grid.get(&[i, j, k]);
                    let ratio = if x3 > 0.0 { v / x3 } else { 0.0 };
                    out.push((x1, x3, x4, v, ratio));
                }
            }
        }
        out
    }
}

/// The statistic R with the node attaining it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RStatistic {
    pub r: f64,
    pub x1: f64,
    pub x3: f64,
    pub x4: f64,
}

fn r_of_values(grid: &GridFunction, values: &[f64], _q: f64) -> RStatistic {
    let ax = grid.axes();
    let mut best = RStatistic { r: 0.0, x1: 0.0, x3: 0.0, x4: 1.0 };
    for (flat, &v) in values.iter().enumerate() {
        let idx = grid.multi_index(flat);
        let x1 = ax[0][idx[0]];
        let x3 = x1 + ax[1][idx[1]];
        if x3 <= 0.0 {
            continue;
        }
        let r = v / x3;
        if r > best.r {
            best = RStatistic { r, x1, x3, x4: ax[2][idx[2]] };
        }
    }
    best
}

struct Sweep<'a> {
    grid: &'a GridFunction,
    q: f64,
    x1_max: f64,
    gap_max: f64,
}

impl Sweep<'_> {
    fn child_value(&self, c: &Point5) -> Option<f64> {
        if !in_domain5(c, self.q) {
            return None;
        }
        if c[1] >= 0.0 {
            return Some(c[3]); // constant ψ = x₂ captures all of w: exactly x₄
        }
        let s1 = -1.0 / c[1];
        let a1 = (c[0] * s1).abs();
        let a3 = c[2] * s1 / c[4];
        let a4 = c[3] / c[4];
        if a1 > self.x1_max + 1e-12 {
            return Some(0.0);
        }
        let gap = (a3 - a1).max(0.0);
        let v = self.grid.interpolate_clamped(&[
            a1,
            gap.min(self.gap_max),
            a4.clamp(1.0, self.q),
        ]);
        Some(c[4] * v)
    }

    fn node_update(&self, x: &SlicePoint, current: f64, moves: &[MoveRule]) -> f64 {
        let mut best = current;
        for rule in moves {
            let s = rule.expand(x);
            let cp = [x.x1 + s.d1, -1.0 + s.d2, x.x3 + s.d3, x.x4 + s.d4, s.s_plus];
            let cm = [x.x1 - s.d1, -1.0 - s.d2, x.x3 - s.d3, x.x4 - s.d4, s.s_minus];
            if let (Some(a), Some(b)) = (self.child_value(&cp), self.child_value(&cm)) {
                let v = 0.5 * (a + b);
                if v > best {
                    best = v;
                }
            }
        }
        best
    }
}

/// Weighted value iteration on G. V₀ carries the solved constant-weight
/// function on the x₄ = 1 face and 0 elsewhere.
pub fn dp_weighted(cfg: &WeightedDpConfig) -> Result<WeightedEnvelope> {
    if cfg.q < 1.0 {
        return Err(Error::Config(format!("Q must be >= 1, got {}", cfg.q)));
    }
    if cfg.n1 < 2 || cfg.n_gap < 2 || cfg.n4 < 2 {
        return Err(Error::Config("each axis needs at least two nodes".into()));
    }
    let mut moves = cfg.moves.clone().unwrap_or_else(|| default_weighted_moves(cfg.q, cfg.h4()));
    if cfg.seeded {
        moves.extend(seeded_moves());
    }
    for rule in &moves {
        if let MoveRule::Fixed(s) = rule {
            s.validate()?;
        }
    }

    let x1_max = cfg.x3_max;
    let gap_max = cfg.x3_max;
    // Q = 1 degenerates the x4 axis; keep a second plane that the domain
    // checks make unreachable so lookups always stay on the face.
    let x4_hi = if cfg.q > 1.0 { cfg.q } else { 2.0 };
    let axes = vec![
        GridFunction::uniform_axis(0.0, x1_max, cfg.n1),
        GridFunction::uniform_axis(0.0, gap_max, cfg.n_gap),
        GridFunction::uniform_axis(1.0, x4_hi, cfg.n4),
    ];
    let mut grid = GridFunction::new(axes, 0.0)?;
    grid.concave_minorant = true;
    for i in 0..cfg.n1 {
        for j in 0..cfg.n_gap {
            let x1 = grid.axes()[0][i];
            let x3 = x1 + grid.axes()[1][j];
            let v = b_full(&Point3::new(x1, -1.0, x3)).expect("grid nodes lie in the domain");
            grid.set(&[i, j, 0], v);
        }
    }

    let mut r_history = vec![r_of_values(&grid, grid.values(), cfg.q).r];
    let mut history = Vec::new();
    if cfg.record_history {
        history.push(grid.values().to_vec());
    }

    for iter in 0..cfg.iters {
        let sweep = Sweep { grid: &grid, q: cfg.q, x1_max, gap_max };
        let new_values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|flat| {
                let idx = sweep.grid.multi_index(flat);
                let x1 = sweep.grid.axes()[0][idx[0]];
                let x3 = x1 + sweep.grid.axes()[1][idx[1]];
                let x4 = sweep.grid.axes()[2][idx[2]];
                if x4 > sweep.q {
                    return sweep.grid.values()[flat]; // padding plane at Q = 1
                }
                sweep.node_update(&SlicePoint::new(x1, x3, x4), sweep.grid.values()[flat], &moves)
            })
            .collect();
        grid.values_mut().copy_from_slice(&new_values);
        if grid.has_non_finite() {
            return Err(Error::NonFinite(format!("weighted iteration {iter}")));
        }
        r_history.push(r_of_values(&grid, grid.values(), cfg.q).r);
        if cfg.record_history {
            history.push(grid.values().to_vec());
        }
    }

    Ok(WeightedEnvelope {
        grid,
        q: cfg.q,
        iterations: cfg.iters,
        r_history,
        history,
        x1_max,
        gap_max,
    })
}

// ---------------------------------------------------------------------------
// Diagnostics: β averaging, γ operator, the root a(x₄), scaling-ray bounds
// ---------------------------------------------------------------------------

/// β(x) = 2∫_{1/2}^1 f(x₁, t·x₃, t·x₄) dt by the trapezoid rule.
///
/// Requires x₄ ≥ 2 (so t·x₄ ≥ 1 on the whole range) and x₃ ≥ 2|x₁| (so the
/// scaled points stay in G).
pub fn beta(f: impl Fn(f64, f64, f64) -> f64, x: &SlicePoint, steps: usize) -> Result<f64> {
    if x.x4 < 2.0 {
        return Err(Error::Domain(format!("beta needs x4 >= 2 so t·x4 >= 1, got {}", x.x4)));
    }
    if x.x3 < 2.0 * x.x1.abs() {
        return Err(Error::Domain(format!(
            "beta needs x3 >= 2|x1| so the ray stays in G, got ({}, {})",
            x.x1, x.x3
        )));
    }
    if steps == 0 {
        return Err(Error::Config("beta needs at least one step".into()));
    }
    let h = 0.5 / steps as f64;
    let eval = |t: f64| f(x.x1, t * x.x3, t * x.x4);
    let mut sum = 0.5 * (eval(0.5) + eval(1.0));
    for i in 1..steps {
        sum += eval(0.5 + h * i as f64);
    }
    Ok(2.0 * sum * h)
}

/// γ_F(x) = x₃²F₃₃ + 2x₃x₄F₃₄ + x₄²F₄₄ by central differences of step h.
/// The stencil must stay inside G × [x4_lo, x4_hi].
pub fn gamma_op(
    f: impl Fn(f64, f64, f64) -> f64,
    x: &SlicePoint,
    h: f64,
    x4_range: (f64, f64),
) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::Domain("step must be positive".into()));
    }
    if x.x3 - h < x.x1.abs() {
        return Err(Error::Stencil(format!("x3 stencil leaves G at {x:?}")));
    }
    if x.x4 - h < x4_range.0 || x.x4 + h > x4_range.1 {
        return Err(Error::Stencil(format!("x4 stencil leaves [{}, {}] at {x:?}", x4_range.0, x4_range.1)));
    }
    let g = |d3: f64, d4: f64| f(x.x1, x.x3 + d3, x.x4 + d4);
    let base = g(0.0, 0.0);
    let f33 = (g(h, 0.0) - 2.0 * base + g(-h, 0.0)) / (h * h);
    let f44 = (g(0.0, h) - 2.0 * base + g(0.0, -h)) / (h * h);
    let f34 = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4.0 * h * h);
    Ok(x.x3 * x.x3 * f33 + 2.0 * x.x3 * x.x4 * f34 + x.x4 * x.x4 * f44)
}

/// Result of the root search for β(0, a, x₄) = x₄/8.
#[derive(Clone, Debug, Serialize)]
pub struct FindA {
    pub x4: f64,
    /// The root, when the crossing exists on (0, 1].
    pub root: Option<f64>,
    pub beta_at_one: f64,
    pub target: f64,
}

/// Bisection for the unique a ∈ (0, 1] with β(0, a, x₄) = x₄/8.
///
/// A missing crossing is a report (insufficient envelope depth), not an
/// error: for the true slice function the crossing always exists at x₄ ≥ 2.
pub fn find_a(
    f: impl Fn(f64, f64, f64) -> f64,
    x4: f64,
    steps: usize,
    tol: f64,
) -> Result<FindA> {
    if x4 < 2.0 {
        return Err(Error::Domain(format!("the root search needs x4 >= 2, got {x4}")));
    }
    let target = x4 / 8.0;
    let g = |a: f64| -> Result<f64> {
        Ok(beta(&f, &SlicePoint::new(0.0, a, x4), steps)? - target)
    };
    let beta_at_one = g(1.0)? + target;
    if beta_at_one < target {
        return Ok(FindA { x4, root: None, beta_at_one, target });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FindA { x4, root: Some(0.5 * (lo + hi)), beta_at_one, target })
}

/// The scaling-ray slope floor m(x₃, x₄) used by the derivative diagnostic.
pub fn hx3_rhs(x3: f64, x4: f64, r: f64, a: f64) -> f64 {
    if x3 <= (1.0 - 2.0 * a) * x4 / (16.0 * r) {
        (x4 - 16.0 * r * x3) / (16.0 * a)
    } else {
        x4 / 8.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Main1Sample {
    pub x1: f64,
    pub x3: f64,
    pub x4: f64,
    pub lhs_neg_gamma_beta: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

/// The pointwise bound −γ_β(x) ≤ 8R(|x₁| + x₃/x₄) on a deterministic
/// lattice in {|x₁| ≤ x₃/4, x₄ ≥ 4}. Failures flag envelope depth, never
/// errors: the bound is proven for the true slice function only.
#[derive(Clone, Debug, Serialize)]
pub struct Main1Report {
    pub r: f64,
    pub h: f64,
    pub beta_steps: usize,
    pub samples: Vec<Main1Sample>,
    pub pass_fraction: f64,
}

pub fn diagnostics_main1(
    f: impl Fn(f64, f64, f64) -> f64,
    q: f64,
    r: f64,
    beta_steps: usize,
    h: f64,
) -> Result<Main1Report> {
    if q < 4.0 + 2.0 * h {
        return Err(Error::Domain(format!("the diagnostic needs Q comfortably above 4, got {q}")));
    }
    let beta_fn = |x1: f64, x3: f64, x4: f64| {
        beta(&f, &SlicePoint::new(x1, x3, x4), beta_steps).unwrap_or(f64::NAN)
    };
    let mut samples = Vec::new();
    for x3 in [0.5, 1.0, 1.5] {
        for frac_x1 in [0.0, 0.125, 0.25] {
            let x1 = frac_x1 * x3;
            for t4 in [0.0, 0.5, 1.0] {
                let x4 = 4.0 + t4 * (q - 4.0 - 2.0 * h) + h;
                let x = SlicePoint::new(x1, x3, x4);
                // γ needs the β stencil valid: x3 ± h must keep x3 >= 2|x1|
                if x.x3 - h < 2.0 * x.x1.abs() + h {
                    continue;
                }
                let gamma = gamma_op(beta_fn, &x, h, (2.0, q))?;
                if !gamma.is_finite() {
                    return Err(Error::NonFinite("gamma of beta".into()));
                }
                let lhs = -gamma;
                let rhs = 8.0 * r * (x.x1.abs() + x.x3 / x.x4);
                samples.push(Main1Sample {
                    x1: x.x1,
                    x3: x.x3,
                    x4: x.x4,
                    lhs_neg_gamma_beta: lhs,
                    rhs,
                    margin: rhs - lhs,
                    pass: lhs <= rhs + 1e-9,
                });
            }
        }
    }
    let pass_fraction =
        samples.iter().filter(|s| s.pass).count() as f64 / samples.len().max(1) as f64;
    Ok(Main1Report { r, h, beta_steps, samples, pass_fraction })
}

#[derive(Clone, Debug, Serialize)]
pub struct Hx3Sample {
    pub x1: f64,
    pub x3: f64,
    pub x4: f64,
    pub beta_x3: f64,
    pub floor: f64,
    pub margin: f64,
}

/// ∂β/∂x₃ against the floor m(x₃,x₄) on the strip {4x₁ ≤ x₃ ≤ a(x₄)}.
#[derive(Clone, Debug, Serialize)]
pub struct Hx3Report {
    pub r: f64,
    pub h: f64,
    pub samples: Vec<Hx3Sample>,
}

pub fn diagnostics_hx3(
    f: impl Fn(f64, f64, f64) -> f64,
    roots: &[FindA],
    r: f64,
    beta_steps: usize,
    h: f64,
) -> Result<Hx3Report> {
    let mut samples = Vec::new();
    for fa in roots {
        let Some(a) = fa.root else { continue };
        for frac in [0.25, 0.5, 0.75, 1.0] {
            let x3 = a * frac;
            if x3 - h <= 0.0 {
                continue;
            }
            for x1 in [0.0, x3 / 8.0, x3 / 4.0] {
                let x = SlicePoint::new(x1, x3, fa.x4);
                if x.x3 - h < 2.0 * x.x1.abs() {
                    continue;
                }
                let bp = beta(&f, &SlicePoint::new(x1, x3 + h, fa.x4), beta_steps)?;
                let bm = beta(&f, &SlicePoint::new(x1, x3 - h, fa.x4), beta_steps)?;
                let beta_x3 = (bp - bm) / (2.0 * h);
                let floor = hx3_rhs(x3, fa.x4, r, a);
                samples.push(Hx3Sample { x1, x3, x4: fa.x4, beta_x3, floor, margin: beta_x3 - floor });
            }
        }
    }
    Ok(Hx3Report { r, h, samples })
}

/// f(t) = 16(1+t/4)·ln(1+t/4) − 4t − t·ln t, the elementary inequality
/// behind the logarithmic blow-up; nonnegative on [4, ∞) with convex f.
#[derive(Clone, Debug, Serialize)]
pub struct ElemIneqReport {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub min_f: f64,
    pub argmin_t: f64,
    pub f_at_4: f64,
    pub fpp_at_4: f64,
    pub violations: usize,
    pub fpp_violations: usize,
}

pub fn elementary_f(t: f64) -> f64 {
    16.0 * (1.0 + t / 4.0) * (1.0 + t / 4.0).ln() - 4.0 * t - t * t.ln()
}

pub fn elementary_fpp(t: f64) -> f64 {
    (3.0 * t - 4.0) / (t * (t + 4.0))
}

pub fn elementary_inequality_check(t_min: f64, t_max: f64, samples: usize) -> Result<ElemIneqReport> {
    if t_min < 4.0 {
        return Err(Error::Domain(format!("the inequality starts at t = 4, got t_min = {t_min}")));
    }
    if t_max <= t_min || samples < 2 {
        return Err(Error::Config("need t_max > t_min and at least two samples".into()));
    }
    let (mut min_f, mut argmin, mut violations, mut fpp_violations) = (f64::INFINITY, t_min, 0, 0);
    let log_lo = t_min.ln();
    let log_hi = t_max.ln();
    for i in 0..samples {
        let t = (log_lo + (log_hi - log_lo) * i as f64 / (samples - 1) as f64).exp();
        let v = elementary_f(t);
        if v < min_f {
            min_f = v;
            argmin = t;
        }
        if v < 0.0 {
            violations += 1;
        }
        if elementary_fpp(t) <= 0.0 {
            fpp_violations += 1;
        }
    }
    Ok(ElemIneqReport {
        t_min,
        t_max,
        samples,
        min_f,
        argmin_t: argmin,
        f_at_4: elementary_f(4.0),
        fpp_at_4: elementary_fpp(4.0),
        violations,
        fpp_violations,
    })
}

/// Midpoint-concavity audit of a computed envelope on random segments.
///
/// Finite-depth envelopes need not be concave; the tolerance is set from the
/// grid's own positive second differences (the interpolation error scale),
/// and residuals below −tol are reported as depth diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct ConcavityReport {
    pub segments: usize,
    pub tol: f64,
    pub worst_residual: f64,
    pub violations: usize,
}

pub fn concavity_spot_check(env: &WeightedEnvelope, segments: usize, seed: u64) -> ConcavityReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    // interpolation error scale: the largest convexity defect along grid lines
    let mut defect = 0.0f64;
    let ax = env.grid.axes();
    for dim in 0..3 {
        let n = ax[dim].len();
        for flat in 0..env.grid.len() {
            let idx = env.grid.multi_index(flat);
            if idx[dim] == 0 || idx[dim] + 1 >= n {
                continue;
            }
            let mut lo = idx.clone();
            let mut hi = idx.clone();
            lo[dim] -= 1;
            hi[dim] += 1;
            let sd = env.grid.get(&lo) - 2.0 * env.grid.get(&idx) + env.grid.get(&hi);
            defect = defect.max(sd);
        }
    }
    let tol = 2.0 * defect + 1e-9;

    let f = env.slice_fn();
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..segments {
        let x4a = rng.gen_range(1.0..env.q.max(1.0 + 1e-9));
        let x4b = rng.gen_range(1.0..env.q.max(1.0 + 1e-9));
        let x1a = rng.gen_range(0.0..env.x1_max);
        let x1b = rng.gen_range(0.0..env.x1_max);
        let x3a = x1a + rng.gen_range(0.0..env.gap_max);
        let x3b = x1b + rng.gen_range(0.0..env.gap_max);
        let mid = f(0.5 * (x1a + x1b), 0.5 * (x3a + x3b), 0.5 * (x4a + x4b));
        let residual = mid - 0.5 * (f(x1a, x3a, x4a) + f(x1b, x3b, x4b));
        worst = worst.min(residual);
        if residual < -tol {
            violations += 1;
        }
    }
    ConcavityReport { segments, tol, worst_residual: worst, violations }
}
