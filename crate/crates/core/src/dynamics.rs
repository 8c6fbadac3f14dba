//! Trajectories, attractor identification, and periodic-orbit refinement.
//!
//! Every variant is integrated in dimensional units. Prey and predator
//! extinction are threshold events at `extinction_rel * K` and
//! `extinction_rel * n K`. When prey crosses its threshold, variants whose
//! predator equation is singular on the predator axis stop there (both
//! populations collapse toward the origin); alternative-food variants pin the
//! prey to zero and follow the predator's logistic relaxation toward `c`.
//!
//! Cycles are detected on the Poincare section given by the predator
//! nullcline `P = nN + c`, which every interior equilibrium lies on.

use serde::{Deserialize, Serialize};

use crate::equilibria::equilibria_dimensional;
use crate::error::{Error, Result};
use crate::model::{dimensional_rhs, DimensionalParams, Frame, ModelVariant, State};
use crate::ode::{locate_crossing, DenseStep, Dopri5, IntegrationStats, Tolerances};
use crate::stability::NumericClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    PreyExtinctThreshold,
    PredatorExtinctThreshold,
    ConvergedToPoint,
    ConvergedToCycle,
    MaxTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub tolerances: Tolerances,
    /// Uniform output spacing; `None` records every accepted step.
    pub sample_dt: Option<f64>,
    /// Extinction thresholds as fractions of `K` (prey) and `nK` (predator).
    pub extinction_rel: f64,
    /// Frame of the recorded samples.
    pub frame: Frame,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            sample_dt: None,
            extinction_rel: 1e-8,
            frame: Frame::Dimensional,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, State)>,
    pub events: Vec<Event>,
    pub frame: Frame,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn last(&self) -> (f64, State) {
        *self
            .samples
            .last()
            .expect("a trajectory always holds its initial state")
    }
}

fn field(
    variant: ModelVariant,
    p: &DimensionalParams,
    sign: f64,
) -> impl FnMut(f64, &[f64; 2]) -> Result<[f64; 2]> + '_ {
    move |_, y| {
        let (dn, dp) = dimensional_rhs(variant, y[0], y[1], p)?;
        Ok([sign * dn, sign * dp])
    }
}

fn check_initial(variant: ModelVariant, ic: State, p: &DimensionalParams) -> Result<[f64; 2]> {
    let x = ic.to_frame(Frame::Dimensional, p);
    if !(x.prey.is_finite() && x.predator.is_finite()) || !x.in_first_quadrant() {
        return Err(Error::OutsideQuadrant {
            prey: x.prey,
            predator: x.predator,
        });
    }
    if x.prey == 0.0 && x.predator > 0.0 && variant.singular_at_zero_prey() {
        return Err(Error::Singular {
            variant,
            prey: x.prey,
            predator: x.predator,
        });
    }
    Ok([x.prey, x.predator])
}

struct Thresholds {
    prey: f64,
    predator: f64,
}

impl Thresholds {
    fn new(p: &DimensionalParams, rel: f64) -> Self {
        Self {
            prey: rel * p.k,
            predator: rel * p.n * p.k,
        }
    }
}

/// What happened at the end of one accepted step.
enum StepOutcome {
    Continue,
    PreyExtinct { t: f64, y: [f64; 2] },
    PredatorExtinct { t: f64, y: [f64; 2] },
}

fn threshold_crossing(step: &DenseStep<2>, th: &Thresholds) -> StepOutcome {
    let (y0, y1) = (step.y0(), step.y1());
    if y0[0] >= th.prey && y1[0] < th.prey {
        let (t, y) = locate_crossing(step, |y| y[0] - th.prey, 1e-10 * step.h.abs().max(1e-300));
        return StepOutcome::PreyExtinct { t, y };
    }
    if y0[1] >= th.predator && y1[1] < th.predator {
        let (t, y) = locate_crossing(
            step,
            |y| y[1] - th.predator,
            1e-10 * step.h.abs().max(1e-300),
        );
        return StepOutcome::PredatorExtinct { t, y };
    }
    StepOutcome::Continue
}

/// Integrates `variant` from `ic` over `[0, t_end]`.
pub fn integrate(
    variant: ModelVariant,
    p: &DimensionalParams,
    ic: State,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    p.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "must be positive and finite",
        });
    }
    if let Some(dt) = opts.sample_dt {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sample_dt",
                value: dt,
                reason: "must be positive",
            });
        }
    }
    let y0 = check_initial(variant, ic, p)?;
    let th = Thresholds::new(p, opts.extinction_rel);
    let to_out = |y: [f64; 2]| State::dimensional(y[0], y[1]).to_frame(opts.frame, p);

    let mut traj = Trajectory {
        samples: vec![(0.0, to_out(y0))],
        events: Vec::new(),
        frame: opts.frame,
        stats: IntegrationStats::default(),
    };
    let mut solver = Dopri5::new(field(variant, p, 1.0), 0.0, y0, opts.tolerances)?;
    let mut next_sample = opts.sample_dt.unwrap_or(f64::INFINITY);
    let mut pinned = [y0[0] < th.prey, y0[1] < th.predator];
    if pinned[0] {
        traj.events.push(Event {
            time: 0.0,
            kind: EventKind::PreyExtinctThreshold,
            state: to_out(y0),
        });
        if variant.singular_at_zero_prey() {
            return Ok(traj);
        }
        solver.reset_state([0.0, y0[1]])?;
    }
    if pinned[1] {
        traj.events.push(Event {
            time: 0.0,
            kind: EventKind::PredatorExtinctThreshold,
            state: to_out(y0),
        });
        let y = solver.y();
        solver.reset_state([y[0], 0.0])?;
    }

    while solver.t() < t_end {
        let step = solver.step(t_end)?;
        let outcome = threshold_crossing(&step, &th);
        let t_cut = match &outcome {
            StepOutcome::Continue => step.t1(),
            StepOutcome::PreyExtinct { t, .. } | StepOutcome::PredatorExtinct { t, .. } => *t,
        };
        if let Some(dt) = opts.sample_dt {
            while next_sample < t_cut {
                traj.samples
                    .push((next_sample, to_out(step.eval(next_sample))));
                next_sample += dt;
            }
        }
        match outcome {
            StepOutcome::Continue => {
                if opts.sample_dt.is_none() {
                    traj.samples.push((step.t1(), to_out(solver.y())));
                }
            }
            StepOutcome::PreyExtinct { t, y } if !pinned[0] => {
                pinned[0] = true;
                traj.samples.push((t, to_out(y)));
                traj.events.push(Event {
                    time: t,
                    kind: EventKind::PreyExtinctThreshold,
                    state: to_out(y),
                });
                if variant.singular_at_zero_prey() {
                    traj.stats = solver.stats();
                    return Ok(traj);
                }
                let cur = solver.y();
                solver.reset_state([0.0, cur[1]])?;
                if opts.sample_dt.is_none() {
                    traj.samples.push((step.t1(), to_out(solver.y())));
                }
            }
            StepOutcome::PredatorExtinct { t, y } if !pinned[1] => {
                pinned[1] = true;
                traj.samples.push((t, to_out(y)));
                traj.events.push(Event {
                    time: t,
                    kind: EventKind::PredatorExtinctThreshold,
                    state: to_out(y),
                });
                let cur = solver.y();
                solver.reset_state([cur[0], 0.0])?;
                if opts.sample_dt.is_none() {
                    traj.samples.push((step.t1(), to_out(solver.y())));
                }
            }
            _ => {
                if opts.sample_dt.is_none() {
                    traj.samples.push((step.t1(), to_out(solver.y())));
                }
            }
        }
    }
    let (t_last, _) = traj.last();
    if t_last < t_end {
        traj.samples.push((t_end, to_out(solver.y())));
    }
    traj.events.push(Event {
        time: t_end,
        kind: EventKind::MaxTime,
        state: to_out(solver.y()),
    });
    traj.stats = solver.stats();
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorKind {
    InteriorPoint,
    InteriorCycle,
    Origin,
    PreyExtinctPoint,
    Undetermined,
}

impl AttractorKind {
    pub fn name(self) -> &'static str {
        match self {
            AttractorKind::InteriorPoint => "interior_point",
            AttractorKind::InteriorCycle => "interior_cycle",
            AttractorKind::Origin => "origin",
            AttractorKind::PreyExtinctPoint => "prey_extinct_point",
            AttractorKind::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorLabel {
    pub kind: AttractorKind,
    /// Equilibrium for point attractors; a section crossing for cycles;
    /// the terminal state otherwise.
    pub anchor: State,
    pub period: Option<f64>,
    /// Time at which the label was decided.
    pub time: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectBudget {
    pub t_max: f64,
    pub tolerances: Tolerances,
    /// Relative distance to a stable equilibrium that counts as arrival.
    pub point_rtol: f64,
    /// Relative agreement of successive section returns that counts as a cycle.
    pub cycle_rtol: f64,
    pub extinction_rel: f64,
}

impl Default for DetectBudget {
    fn default() -> Self {
        Self {
            t_max: 1000.0,
            tolerances: Tolerances {
                max_steps: 2_000_000,
                ..Tolerances::default()
            },
            point_rtol: 1e-6,
            cycle_rtol: 1e-6,
            extinction_rel: 1e-8,
        }
    }
}

/// Equilibrium census reused across many initial conditions.
#[derive(Debug, Clone)]
pub struct AttractorContext {
    pub variant: ModelVariant,
    pub params: DimensionalParams,
    /// Interior equilibria that attract in the chosen time direction.
    pub targets: Vec<State>,
    /// All interior equilibria.
    pub interior: Vec<State>,
    sign: f64,
}

impl AttractorContext {
    pub fn new(variant: ModelVariant, p: &DimensionalParams) -> Result<Self> {
        Self::with_direction(variant, p, false)
    }

    /// Context for the time-reversed flow: forward repellers become targets.
    pub fn reversed(variant: ModelVariant, p: &DimensionalParams) -> Result<Self> {
        Self::with_direction(variant, p, true)
    }

    fn with_direction(variant: ModelVariant, p: &DimensionalParams, reverse: bool) -> Result<Self> {
        p.validate()?;
        let census = equilibria_dimensional(variant, p)?;
        let want = if reverse {
            NumericClass::Repeller
        } else {
            NumericClass::Attractor
        };
        let interior: Vec<_> = census
            .iter()
            .filter(|r| r.kind == crate::equilibria::EquilibriumKind::Interior)
            .collect();
        Ok(Self {
            variant,
            params: *p,
            targets: interior
                .iter()
                .filter(|r| r.numeric_class == want)
                .map(|r| r.location)
                .collect(),
            interior: interior.iter().map(|r| r.location).collect(),
            sign: if reverse { -1.0 } else { 1.0 },
        })
    }

    fn section(&self, y: &[f64; 2]) -> f64 {
        y[1] - (self.params.n * y[0] + self.params.effective_c(self.variant))
    }

    fn near_interior(&self, y: &[f64; 2], rel: f64) -> bool {
        self.interior.iter().any(|x| close(y, x, rel))
    }
}

fn close(y: &[f64; 2], x: &State, rel: f64) -> bool {
    (y[0] - x.prey).abs() <= rel * x.prey.abs()
        && (y[1] - x.predator).abs() <= rel * x.predator.abs()
}

/// Integrates from `ic` until an attractor is recognised or the budget runs out.
pub fn detect_attractor(
    variant: ModelVariant,
    p: &DimensionalParams,
    ic: State,
    budget: &DetectBudget,
) -> Result<AttractorLabel> {
    let ctx = AttractorContext::new(variant, p)?;
    detect_with(&ctx, ic, budget)
}

/// [`detect_attractor`] with a precomputed equilibrium census.
///
/// Budget exhaustion and integration failures yield `Undetermined`; only
/// invalid inputs produce an error.
pub fn detect_with(
    ctx: &AttractorContext,
    ic: State,
    budget: &DetectBudget,
) -> Result<AttractorLabel> {
    let p = &ctx.params;
    let variant = ctx.variant;
    let y0 = check_initial(variant, ic, p)?;
    let th = Thresholds::new(p, budget.extinction_rel);
    let label = |kind, y: [f64; 2], period, time, steps| AttractorLabel {
        kind,
        anchor: State::dimensional(y[0], y[1]),
        period,
        time,
        steps,
    };
    let c_eff = p.effective_c(variant);

    let mut solver = match Dopri5::new(field(variant, p, ctx.sign), 0.0, y0, budget.tolerances) {
        Ok(s) => s,
        Err(e) if e.is_numerical() => {
            return Ok(label(AttractorKind::Undetermined, y0, None, 0.0, 0))
        }
        Err(e) => return Err(e),
    };
    let mut prey_pinned = false;
    if y0[0] < th.prey {
        if variant.singular_at_zero_prey() {
            return Ok(label(AttractorKind::Origin, [0.0, 0.0], None, 0.0, 0));
        }
        prey_pinned = true;
        solver.reset_state([0.0, y0[1]])?;
    }

    let mut crossings: Vec<(f64, f64)> = Vec::new();
    let mut steps = 0usize;
    while solver.t() < budget.t_max {
        let step = match solver.step(budget.t_max) {
            Ok(s) => s,
            Err(e) if e.is_numerical() => break,
            Err(e) => return Err(e),
        };
        steps += 1;
        let t = solver.t();

        if !prey_pinned {
            if let StepOutcome::PreyExtinct { t: te, .. } = threshold_crossing(&step, &th) {
                if variant.singular_at_zero_prey() {
                    return Ok(label(AttractorKind::Origin, [0.0, 0.0], None, te, steps));
                }
                prey_pinned = true;
                let y = solver.y();
                solver.reset_state([0.0, y[1]])?;
                continue;
            }
        }
        let y = solver.y();
        if prey_pinned {
            if y[1] > 0.0 && (y[1] - c_eff).abs() <= budget.point_rtol * c_eff {
                return Ok(label(AttractorKind::PreyExtinctPoint, y, None, t, steps));
            }
            continue;
        }
        if let Some(x) = ctx.targets.iter().find(|x| close(&y, x, budget.point_rtol)) {
            return Ok(AttractorLabel {
                kind: AttractorKind::InteriorPoint,
                anchor: *x,
                period: None,
                time: t,
                steps,
            });
        }

        let (s0, s1) = (ctx.section(&step.y0()), ctx.section(&y));
        if s0 < 0.0 && s1 >= 0.0 {
            let (tc, yc) = locate_crossing(&step, |z| ctx.section(z), 1e-12 * t.max(1.0));
            crossings.push((tc, yc[0]));
            let n = crossings.len();
            if n >= 3 {
                let period = crossings[n - 1].0 - crossings[n - 2].0;
                let prev_period = crossings[n - 2].0 - crossings[n - 3].0;
                let transient = (0.5 * budget.t_max)
                    .max(10.0 * period)
                    .min(0.9 * budget.t_max);
                let (na, nb) = (crossings[n - 2].1, crossings[n - 1].1);
                let settled = (na - nb).abs() <= budget.cycle_rtol * nb
                    && (period - prev_period).abs() <= 1e-4 * period;
                let pc = [nb, p.n * nb + c_eff];
                if tc >= transient && settled && !ctx.near_interior(&pc, 1e-3) {
                    return Ok(label(
                        AttractorKind::InteriorCycle,
                        pc,
                        Some(period),
                        tc,
                        steps,
                    ));
                }
            }
        }
    }
    Ok(label(
        AttractorKind::Undetermined,
        solver.y(),
        None,
        solver.t(),
        steps,
    ))
}

/// A refined periodic orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    /// Point on the section `P = nN + c`.
    pub anchor: State,
    pub period: f64,
    /// Derivative of the return map at the anchor (the nontrivial multiplier).
    pub multiplier: f64,
    /// `|return(N) - N| / N` at the anchor.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl PeriodicOrbit {
    pub fn is_stable(&self) -> bool {
        self.multiplier.abs() < 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub tolerances: Tolerances,
    pub max_iterations: usize,
    pub residual_tol: f64,
    /// Upper bound on a single return time, in multiples of the seed period.
    pub period_cap: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::new(1e-12, 1e-15),
            max_iterations: 30,
            residual_tol: 1e-9,
            period_cap: 5.0,
        }
    }
}

/// First return to the section from `(n0, n n0 + c)`, crossing in the same
/// direction as at the start. Returns `(prey at return, return time)`.
pub fn return_map(
    variant: ModelVariant,
    p: &DimensionalParams,
    n0: f64,
    t_cap: f64,
    tol: Tolerances,
) -> Result<(f64, f64)> {
    let c_eff = p.effective_c(variant);
    let y0 = [n0, p.n * n0 + c_eff];
    let (dn, _) = dimensional_rhs(variant, y0[0], y0[1], p)?;
    if dn == 0.0 {
        return Err(Error::Degenerate {
            stage: "return_map",
            detail: format!("prey {n0} is an equilibrium on the section"),
        });
    }
    // On the section dP/dt = 0, so the section function moves like -n dN/dt.
    let upward = dn < 0.0;
    let section = |y: &[f64; 2]| {
        let v = y[1] - (p.n * y[0] + c_eff);
        if upward {
            v
        } else {
            -v
        }
    };
    let mut solver = Dopri5::new(field(variant, p, 1.0), 0.0, y0, tol)?;
    let mut left = false;
    while solver.t() < t_cap {
        let step = solver.step(t_cap)?;
        let (s0, s1) = (section(&step.y0()), section(&step.y1()));
        if s1 < 0.0 {
            left = true;
        }
        if left && s0 < 0.0 && s1 >= 0.0 {
            let (t, y) = locate_crossing(&step, section, 1e-14 * step.t1().max(1.0));
            return Ok((y[0], t));
        }
        if variant.singular_at_zero_prey() && step.y1()[0] < 1e-8 * p.k {
            break;
        }
    }
    Err(Error::NotConverged {
        stage: "return_map",
        iterations: solver.stats().accepted,
    })
}

/// Newton iteration on `return(N) - N` starting from a detected cycle.
pub fn refine_cycle(
    variant: ModelVariant,
    p: &DimensionalParams,
    seed: &AttractorLabel,
    opts: &RefineOptions,
) -> Result<PeriodicOrbit> {
    if seed.kind != AttractorKind::InteriorCycle {
        return Err(Error::Degenerate {
            stage: "refine_cycle",
            detail: format!("seed is a {} label, not a cycle", seed.kind.name()),
        });
    }
    let seed_period = seed.period.unwrap_or(1.0);
    let t_cap = opts.period_cap * seed_period;
    let c_eff = p.effective_c(variant);
    let anchor = seed.anchor.to_frame(Frame::Dimensional, p);
    let mut n = anchor.prey;
    let mut period = seed_period;
    let mut residual = f64::INFINITY;
    let mut slope = f64::NAN;
    let g = |x: f64| return_map(variant, p, x, t_cap, opts.tolerances).map(|(y, t)| (y - x, t));

    for it in 0..opts.max_iterations {
        let (gx, t) = match g(n) {
            Ok(v) => v,
            Err(e) if e.is_numerical() => break,
            Err(e) => return Err(e),
        };
        period = t;
        residual = gx.abs() / n;
        let d = 1e-6 * n;
        let (gp, gm) = match (g(n + d), g(n - d)) {
            (Ok(a), Ok(b)) => (a.0, b.0),
            _ => break,
        };
        slope = (gp - gm) / (2.0 * d);
        if residual < opts.residual_tol {
            return Ok(PeriodicOrbit {
                anchor: State::dimensional(n, p.n * n + c_eff),
                period,
                multiplier: 1.0 + slope,
                residual,
                converged: true,
                iterations: it,
            });
        }
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let mut next = n - gx / slope;
        // Keep the iterate inside the quadrant and within a factor of two.
        next = next.clamp(0.5 * n, 2.0 * n);
        n = next;
    }
    Ok(PeriodicOrbit {
        anchor: State::dimensional(anchor.prey, p.n * anchor.prey + c_eff),
        period: seed.period.unwrap_or(period),
        multiplier: 1.0 + slope,
        residual,
        converged: false,
        iterations: opts.max_iterations,
    })
}

/// Looks for an unstable cycle by integrating backwards in time, then refines it forwards.
pub fn find_unstable_cycle(
    variant: ModelVariant,
    p: &DimensionalParams,
    ic: State,
    budget: &DetectBudget,
    opts: &RefineOptions,
) -> Result<Option<PeriodicOrbit>> {
    let ctx = AttractorContext::reversed(variant, p)?;
    let label = detect_with(&ctx, ic, budget)?;
    if label.kind != AttractorKind::InteriorCycle {
        return Ok(None);
    }
    refine_cycle(variant, p, &label, opts).map(Some)
}
