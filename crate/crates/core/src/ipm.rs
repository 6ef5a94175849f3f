//! Predictor-corrector path following over the factor-width cone.
//!
//! One outer iteration rescales the data by the current iterate `X` (so the
//! identity becomes the iterate), evaluates the restricted Newton decrement
//! at the canonical interior point of block space, and then either
//!
//! * **predictor**: moves a fraction `sigma` of the distance to the cone
//!   boundary along the projected affine-scaling direction, strictly
//!   decreasing the objective, or
//! * **corrector**: performs one Newton line search of the block barrier on
//!   the objective-level slice, re-approaching the central path at constant
//!   objective,
//!
//! and pulls the block point back: `X <- R * embed(Y) * R`, `R = X^{1/2}`.
//! Termination is by a duality gap certified by a psd dual slack.
//!
//! The outer loop is sequential; all block-indexed work inside one iteration
//! runs in parallel with order-fixed reductions, so traces are byte-identical
//! for any thread count.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fwcone::{
    barrier_gradient, barrier_value, hess_inv_apply, local_inner, map_blocks, step_to_boundary,
    BlockCollection, SupportIndex,
};
use crate::problem::{SdpProblem, SolutionReport, SolveStatus};
use crate::scalar::{real, Scalar};
use crate::symmat::{
    cholesky, congruence, frob_inner, lambda_min_sym, mul_dense, psd_sqrt, spd_solve, SymMat,
};

/// Which subroutine an outer iteration executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Predictor,
    Corrector,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Predictor => "predictor",
            Phase::Corrector => "corrector",
        }
    }
}

/// Solver parameters. Defaults are calibrated for `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig<F> {
    /// Duality-gap target.
    pub epsilon: F,
    /// Predictor fraction of the boundary distance, in (0, 1).
    pub sigma: F,
    /// Block size.
    pub k: usize,
    /// Cap on outer iterations.
    pub max_outer: usize,
    /// Guard between predictor and corrector, default 1/14.
    pub decrement_threshold: F,
    /// Relative derivative tolerance of the corrector line search.
    pub linesearch_tol: F,
    /// Dual-slack psd tolerance for accepting a gap as valid.
    pub gap_check_tol: F,
    /// Worker threads for block-level parallelism; 0 uses the global pool.
    pub threads: usize,
    /// Retained knob: reductions are order-fixed regardless, so results do
    /// not depend on the thread count either way.
    pub deterministic: bool,
}

impl<F: Scalar> SolveConfig<F> {
    pub fn new(k: usize) -> Self {
        SolveConfig {
            epsilon: real(1e-6),
            sigma: real(0.5),
            k,
            max_outer: 10_000,
            decrement_threshold: F::one() / real(14.0),
            linesearch_tol: real(1e-10),
            gap_check_tol: real(1e-9),
            threads: 0,
            deterministic: true,
        }
    }

    /// Range-checks every field; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.epsilon > F::zero()) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if !(self.sigma > F::zero() && self.sigma < F::one()) {
            return Err(Error::Config("sigma must lie strictly in (0, 1)".into()));
        }
        if self.k < 2 {
            return Err(Error::Config("k must be at least 2".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::Config("max_outer must be positive".into()));
        }
        if !(self.decrement_threshold > F::zero()) {
            return Err(Error::Config("decrement_threshold must be positive".into()));
        }
        if !(self.linesearch_tol > F::zero()) {
            return Err(Error::Config("linesearch_tol must be positive".into()));
        }
        if self.gap_check_tol < F::zero() {
            return Err(Error::Config("gap_check_tol must be nonnegative".into()));
        }
        let mut warnings = Vec::new();
        if self.sigma < real(0.25) {
            warnings.push(
                "sigma below 1/4: the predictor progress guarantee does not apply".to_string(),
            );
        }
        Ok(warnings)
    }
}

/// Observable data of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<F> {
    pub iter: usize,
    pub phase: Phase,
    /// Objective after the step.
    pub objective: F,
    /// Restricted decrement at the canonical point, objective row included.
    pub decrement_fw: F,
    /// Duality gap estimate at iteration start, when a dual candidate exists.
    pub gap: Option<F>,
    /// True when the dual slack passed the psd check.
    pub gap_valid: bool,
    /// Boundary step (predictor only).
    pub s_star: Option<F>,
    /// Line-search step (corrector only).
    pub t_step: Option<F>,
    /// Barrier decrease achieved (corrector only).
    pub f_fw_decrease: Option<F>,
}

/// Mutable solver state: current iterate plus the rescaled data.
#[derive(Debug, Clone)]
pub struct SolverState<F: Scalar> {
    pub x: SymMat<F>,
    pub a0_resc: SymMat<F>,
    pub a_resc: Vec<SymMat<F>>,
    /// Current objective `<A0, X>` in original coordinates.
    pub objective: F,
    pub eta0: Option<F>,
    pub b: Vec<F>,
    pub index: Arc<SupportIndex>,
    pub records: Vec<IterationRecord<F>>,
}

impl<F: Scalar> SolverState<F> {
    /// Builds the state from a problem, choosing the starting point and
    /// performing the first rescale.
    pub fn initialize(problem: &SdpProblem<F>, k: usize) -> Result<Self> {
        let finite = |m: &SymMat<F>| m.packed().iter().all(|v| v.is_finite());
        if !finite(&problem.a0)
            || !problem.a.iter().all(finite)
            || !problem.b.iter().all(|v| v.is_finite())
        {
            return Err(Error::Precondition(
                "problem data contains non-finite values".into(),
            ));
        }
        let index = SupportIndex::enumerate(problem.n, k)?;
        let x = starting_point(problem)?;
        let mut state = SolverState {
            x,
            a0_resc: problem.a0.clone(),
            a_resc: problem.a.clone(),
            objective: F::zero(),
            eta0: problem.eta0,
            b: problem.b.clone(),
            index,
            records: Vec::new(),
        };
        state.rescale(problem)?;
        Ok(state)
    }

    /// Rescales all data by the current iterate; returns the square root used.
    pub fn rescale(&mut self, problem: &SdpProblem<F>) -> Result<SymMat<F>> {
        let r = psd_sqrt(&self.x)?;
        self.a0_resc = congruence(&r, &problem.a0);
        self.a_resc = problem.a.iter().map(|ai| congruence(&r, ai)).collect();
        self.objective = frob_inner(&problem.a0, &self.x);
        Ok(r)
    }
}

/// Iterate-feasibility tolerance: `1e-8` relative at `f64`, floored at
/// `100 eps` so lower-precision instantiations stay usable.
fn feasibility_tol<F: Scalar>() -> F {
    real::<F>(1e-8).max(F::epsilon() * real(100.0))
}

fn starting_point<F: Scalar>(problem: &SdpProblem<F>) -> Result<SymMat<F>> {
    let tol = feasibility_tol::<F>();
    let feasible = |x: &SymMat<F>| problem.feasibility_error(x) <= tol;
    if let Some(x0) = &problem.x0 {
        if lambda_min_sym(x0) > F::zero() && feasible(x0) {
            return Ok(x0.clone());
        }
    }
    let eye = SymMat::identity(problem.n);
    if feasible(&eye) {
        return Ok(eye);
    }
    Err(Error::NoStartingPoint)
}

/// Congruence-rescales a list of symmetric matrices by `X^{1/2}`.
pub fn rescale_data<F: Scalar>(a: &[SymMat<F>], x: &SymMat<F>) -> Result<Vec<SymMat<F>>> {
    let r = psd_sqrt(x)?;
    Ok(a.iter().map(|ai| congruence(&r, ai)).collect())
}

// ---------------------------------------------------------------------------
// Restricted Newton machinery
// ---------------------------------------------------------------------------

/// Result of one restricted Newton computation.
#[derive(Debug, Clone)]
pub struct NewtonStep<F> {
    /// Newton direction in block space; lies in the nullspace of the rows.
    pub step: BlockCollection<F>,
    /// Multipliers of the normal system, one per row.
    pub multipliers: Vec<F>,
    /// Restricted Newton decrement at the evaluation point.
    pub decrement: F,
}

/// Assembles the normal system of the restricted Newton step at `y`:
/// `M_ij = sum_J tr(B_iJ Y_J B_jJ Y_J)` and `r_i = sum_J tr(B_iJ Y_J g_J Y_J)`
/// where `B_i` are the row operators restricted to blocks and `g` is the
/// barrier gradient at `y`.
pub fn assemble_normal_system<F: Scalar>(
    abar: &[BlockCollection<F>],
    y: &BlockCollection<F>,
    g: &BlockCollection<F>,
) -> Result<(SymMat<F>, Vec<F>)> {
    let rows = abar.len();
    assert!(rows >= 1, "at least one row operator required");
    let count = y.index().count();
    let k = y.index().block_dim();
    for a in abar {
        assert_eq!(a.index().count(), count, "index mismatch");
    }
    let mlen = rows * (rows + 1) / 2;
    let parts = map_blocks(count, |t| -> Result<(Vec<F>, Vec<F>)> {
        let yb = y.block(t);
        cholesky(yb, interior_floor(yb)).map_err(|_| Error::NotInterior { block: t })?;
        let yd = yb.to_dense();
        let p: Vec<Vec<F>> = abar
            .iter()
            .map(|a| mul_dense(&a.block(t).to_dense(), &yd, k))
            .collect();
        let gy = mul_dense(&g.block(t).to_dense(), &yd, k);
        let mut m_local = vec![F::zero(); mlen];
        let mut r_local = vec![F::zero(); rows];
        let mut slot = 0;
        for i in 0..rows {
            for j in i..rows {
                let mut acc = F::zero();
                for a in 0..k {
                    for b in 0..k {
                        acc += p[i][a * k + b] * p[j][b * k + a];
                    }
                }
                m_local[slot] = acc;
                slot += 1;
            }
            let mut acc = F::zero();
            for a in 0..k {
                for b in 0..k {
                    acc += p[i][a * k + b] * gy[b * k + a];
                }
            }
            r_local[i] = acc;
        }
        Ok((m_local, r_local))
    });
    let mut m_packed = vec![F::zero(); mlen];
    let mut r = vec![F::zero(); rows];
    for part in parts {
        let (ml, rl) = part?;
        for (acc, v) in m_packed.iter_mut().zip(ml) {
            *acc += v;
        }
        for (acc, v) in r.iter_mut().zip(rl) {
            *acc += v;
        }
    }
    let mut m = SymMat::zeros(rows);
    let mut slot = 0;
    for i in 0..rows {
        for j in i..rows {
            m.set(i, j, m_packed[slot]);
            slot += 1;
        }
    }
    Ok((m, r))
}

fn interior_floor<F: Scalar>(b: &SymMat<F>) -> F {
    let mut maxdiag = F::zero();
    for i in 0..b.dim() {
        maxdiag = maxdiag.max(b.get(i, i));
    }
    real::<F>(1e-14) * maxdiag.max(F::zero())
}

/// Restricted Newton step of the block barrier at feasible interior `y` over
/// the affine set `{ sum_J <B_iJ, Y_J> = rhs_i }`.
pub fn restricted_newton<F: Scalar>(
    abar: &[BlockCollection<F>],
    rhs: &[F],
    y: &BlockCollection<F>,
) -> Result<NewtonStep<F>> {
    assert_eq!(abar.len(), rhs.len(), "row/rhs count mismatch");
    let tol = feasibility_tol::<F>();
    for (i, (a, &want)) in abar.iter().zip(rhs.iter()).enumerate() {
        let got = a.dot(y);
        if (got - want).abs() > tol * (F::one() + want.abs()) {
            return Err(Error::Precondition(format!(
                "evaluation point violates row {i}: value {got} vs rhs {want}"
            )));
        }
    }
    let g = barrier_gradient(y)?;
    let (m, r) = assemble_normal_system(abar, y, &g)?;
    let multipliers = spd_solve(&m, &r)?;
    let mut lifted = BlockCollection::zeros(Arc::clone(y.index()));
    for (&c, a) in multipliers.iter().zip(abar.iter()) {
        lifted.add_scaled(c, a);
    }
    let step = hess_inv_apply(y, &lifted.minus(&g))?;
    let decrement = local_inner(y, &step, &step)?.sqrt();
    Ok(NewtonStep {
        step,
        multipliers,
        decrement,
    })
}

/// Verifies the iterate invariant: the rescaled data reproduces `b` (and the
/// current objective) within `1e-8` relative.
fn check_state_consistency<F: Scalar>(
    state: &SolverState<F>,
    include_objective: bool,
) -> Result<()> {
    let tol = feasibility_tol::<F>();
    for (i, (ai, &bi)) in state.a_resc.iter().zip(state.b.iter()).enumerate() {
        let got = ai.trace();
        if (got - bi).abs() > tol * (F::one() + bi.abs()) {
            return Err(Error::Precondition(format!(
                "evaluation point violates row {i}: value {got} vs rhs {bi}"
            )));
        }
    }
    if include_objective {
        let got = state.a0_resc.trace();
        if (got - state.objective).abs() > tol * (F::one() + state.objective.abs()) {
            return Err(Error::Precondition(format!(
                "evaluation point violates the objective row: value {got} vs {}",
                state.objective
            )));
        }
    }
    Ok(())
}

/// Newton data at the canonical point with the objective row orthogonalized
/// against the constraint span.
///
/// `{A0, A1..Am}` and `{Q/||Q||, A1..Am}` with `Q = A0 - A* yhat` span the
/// same affine slice, but the second basis keeps the normal system well
/// conditioned near optimality (where `A0` drifts into the constraint span
/// and raw multipliers blow up to the path-parameter scale). Multipliers are
/// translated back to the `{A0, A1..Am}` basis before returning.
fn newton_at_center_with<F: Scalar>(
    state: &SolverState<F>,
    q: &SymMat<F>,
    yhat: &[F],
) -> Result<NewtonStep<F>> {
    check_state_consistency(state, true)?;
    let index = &state.index;
    let qn = q.frob_norm();
    let mut abar = Vec::with_capacity(state.a_resc.len() + 1);
    let mut rhs = Vec::with_capacity(state.b.len() + 1);
    abar.push(BlockCollection::restrict(&q.scaled(F::one() / qn), index)?);
    rhs.push(q.trace() / qn);
    for ai in &state.a_resc {
        abar.push(BlockCollection::restrict(ai, index)?);
    }
    rhs.extend_from_slice(&state.b);
    let y0 = BlockCollection::canonical_interior(Arc::clone(index));
    let mut nd = restricted_newton(&abar, &rhs, &y0)?;
    // back to {A0, A1..Am}: beta Q/||Q|| + sum gamma_i Ai
    //   = (beta/||Q||) A0 + sum (gamma_i - (beta/||Q||) yhat_i) Ai
    let y_obj = nd.multipliers[0] / qn;
    let mut translated = Vec::with_capacity(nd.multipliers.len());
    translated.push(y_obj);
    for (&g, &yh) in nd.multipliers[1..].iter().zip(yhat.iter()) {
        translated.push(g - y_obj * yh);
    }
    nd.multipliers = translated;
    Ok(nd)
}

/// Restricted Newton data at the canonical interior point of the rescaled
/// problem. With `include_objective` the row operators span
/// `{A0} ∪ {A1..Am}` (objective first) at the current objective level,
/// otherwise `{A1..Am}` alone.
///
/// An objective inside the constraint span adds no row: the objective-level
/// slice coincides with the constraint subspace, so the computation falls
/// back to the constraint rows with a zero objective multiplier.
pub fn newton_at_center<F: Scalar>(
    state: &SolverState<F>,
    include_objective: bool,
) -> Result<NewtonStep<F>> {
    if include_objective {
        let (q, yhat) = predictor_direction(state)?;
        if !degenerate_objective(state, &q) {
            return newton_at_center_with(state, &q, &yhat);
        }
        let mut nd = newton_at_center(state, false)?;
        nd.multipliers.insert(0, F::zero());
        return Ok(nd);
    }
    check_state_consistency(state, false)?;
    let index = &state.index;
    let abar = state
        .a_resc
        .iter()
        .map(|ai| BlockCollection::restrict(ai, index))
        .collect::<Result<Vec<_>>>()?;
    let y0 = BlockCollection::canonical_interior(Arc::clone(index));
    restricted_newton(&abar, &state.b, &y0)
}

// ---------------------------------------------------------------------------
// Predictor
// ---------------------------------------------------------------------------

/// Outcome of a predictor step.
#[derive(Debug, Clone)]
pub struct PredictorStep<F> {
    pub y_new: BlockCollection<F>,
    /// Distance to the cone boundary along the moved direction.
    pub s_star: F,
    /// Least-squares multipliers of the affine-scaling system.
    pub multipliers: Vec<F>,
}

/// Component of the rescaled objective orthogonal to the rescaled constraint
/// span, with its least-squares multipliers.
///
/// One re-orthogonalization pass keeps `<Ai, q>` small relative to `||q||`
/// rather than to `||A0||`; the predictor multiplies these residuals by the
/// boundary step, which grows like `1 / ||q||` near optimality.
fn predictor_direction<F: Scalar>(state: &SolverState<F>) -> Result<(SymMat<F>, Vec<F>)> {
    let m = state.a_resc.len();
    let mut gram = SymMat::zeros(m);
    let mut rhs = vec![F::zero(); m];
    for i in 0..m {
        for j in i..m {
            gram.set(i, j, frob_inner(&state.a_resc[i], &state.a_resc[j]));
        }
        rhs[i] = frob_inner(&state.a_resc[i], &state.a0_resc);
    }
    let mut multipliers = spd_solve(&gram, &rhs)?;
    let mut q = state.a0_resc.clone();
    for (&c, ai) in multipliers.iter().zip(state.a_resc.iter()) {
        q.add_scaled(-c, ai);
    }
    for _ in 0..2 {
        let resid: Vec<F> = state.a_resc.iter().map(|ai| frob_inner(ai, &q)).collect();
        let correction = spd_solve(&gram, &resid)?;
        for ((&c, ai), mi) in correction
            .iter()
            .zip(state.a_resc.iter())
            .zip(multipliers.iter_mut())
        {
            q.add_scaled(-c, ai);
            *mi += c;
        }
    }
    Ok((q, multipliers))
}

fn degenerate_objective<F: Scalar>(state: &SolverState<F>, q: &SymMat<F>) -> bool {
    q.frob_norm() <= real::<F>(1e-12) * (F::one() + state.a0_resc.frob_norm())
}

fn predictor_from<F: Scalar>(
    state: &SolverState<F>,
    config: &SolveConfig<F>,
    q: &SymMat<F>,
) -> Result<PredictorStep<F>> {
    let direction = BlockCollection::distribute(q, &state.index)?;
    let y0 = BlockCollection::canonical_interior(Arc::clone(&state.index));
    let s_star = step_to_boundary(&y0, &direction)?;
    if !s_star.is_finite() {
        return Err(Error::Unbounded);
    }
    let y_new = y0.plus_scaled(-config.sigma * s_star, &direction);
    Ok(PredictorStep {
        y_new,
        s_star,
        multipliers: Vec::new(),
    })
}

/// Affine-scaling predictor: moves `sigma * s_star` toward the boundary along
/// the block lift of the objective component orthogonal to the constraints,
/// strictly decreasing the objective while staying feasible and interior.
pub fn predictor<F: Scalar>(
    state: &SolverState<F>,
    config: &SolveConfig<F>,
) -> Result<PredictorStep<F>> {
    let (q, multipliers) = predictor_direction(state)?;
    if degenerate_objective(state, &q) {
        return Err(Error::DegenerateObjective);
    }
    let mut step = predictor_from(state, config, &q)?;
    step.multipliers = multipliers;
    Ok(step)
}

// ---------------------------------------------------------------------------
// Line search
// ---------------------------------------------------------------------------

/// Derivative of `t -> barrier(y + t d)`, or `None` outside the interior.
fn line_derivative<F: Scalar>(y: &BlockCollection<F>, d: &BlockCollection<F>, t: F) -> Option<F> {
    let yt = y.plus_scaled(t, d);
    let k = yt.index().block_dim();
    let parts = map_blocks(yt.index().count(), |b| -> Option<F> {
        let block = yt.block(b);
        let f = cholesky(block, interior_floor(block)).ok()?;
        let sol = f.solve_mat(d.block(b));
        let mut tr = F::zero();
        for i in 0..k {
            tr += sol[i * k + i];
        }
        Some(tr)
    });
    let mut acc = F::zero();
    for p in parts {
        acc += p?;
    }
    Some(-acc)
}

/// Exact line search of the block barrier along `d` from interior `y`.
///
/// Minimizes the strictly convex map `t -> barrier(y + t d)` by bisection on
/// its derivative until `|phi'(t)| <= tol * (1 + |phi'(0)|)`, capped at 200
/// bisection steps. Errors with `MonotoneAlongDirection` when the barrier
/// keeps descending along an unbounded feasible ray.
pub fn line_search<F: Scalar>(
    y: &BlockCollection<F>,
    d: &BlockCollection<F>,
    tol: F,
) -> Result<(F, BlockCollection<F>)> {
    if d.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let p0 = line_derivative(y, d, F::zero()).ok_or(Error::NotInterior { block: 0 })?;
    let threshold = tol * (F::one() + p0.abs());
    if p0 == F::zero() {
        return Ok((F::zero(), y.clone()));
    }
    // reduce to a descent direction so the minimizer lies at t > 0
    let (dir, flip) = if p0 < F::zero() {
        (d.clone(), F::one())
    } else {
        (d.scaled(-F::one()), -F::one())
    };
    let t_max = step_to_boundary(y, &dir.scaled(-F::one()))?;

    // bracket [lo, hi] with phi'(lo) < 0 and phi'(hi) > 0 (or hi at the
    // numerical boundary, where the derivative is effectively +inf)
    let mut lo = F::zero();
    let mut hi = None;
    let half = real::<F>(0.5);
    if t_max.is_finite() {
        let mut frac = half;
        for _ in 0..64 {
            let cand = t_max * (F::one() - frac);
            match line_derivative(y, &dir, cand) {
                Some(p) if p > F::zero() => {
                    hi = Some(cand);
                    break;
                }
                Some(_) => lo = cand,
                None => {
                    hi = Some(cand);
                    break;
                }
            }
            frac *= half;
        }
    } else {
        let mut cand = F::one();
        for _ in 0..64 {
            match line_derivative(y, &dir, cand) {
                Some(p) if p > F::zero() => {
                    hi = Some(cand);
                    break;
                }
                Some(_) => lo = cand,
                None => {
                    hi = Some(cand);
                    break;
                }
            }
            cand = cand + cand;
        }
    }
    let mut hi = hi.ok_or(Error::MonotoneAlongDirection)?;

    let mut t = (lo + hi) * half;
    for _ in 0..200 {
        t = (lo + hi) * half;
        match line_derivative(y, &dir, t) {
            None => hi = t,
            Some(p) => {
                if p.abs() <= threshold {
                    break;
                }
                if p < F::zero() {
                    lo = t;
                } else {
                    hi = t;
                }
            }
        }
    }
    let y_new = y.plus_scaled(t, &dir);
    Ok((flip * t, y_new))
}

// ---------------------------------------------------------------------------
// Corrector
// ---------------------------------------------------------------------------

/// Outcome of a corrector step.
#[derive(Debug, Clone)]
pub struct CorrectorStep<F> {
    pub y_new: BlockCollection<F>,
    pub t_step: F,
    /// Barrier decrease relative to the canonical point.
    pub barrier_decrease: F,
    pub decrement: F,
    pub multipliers: Vec<F>,
}

fn corrector_from<F: Scalar>(
    state: &SolverState<F>,
    config: &SolveConfig<F>,
    newton: NewtonStep<F>,
) -> Result<CorrectorStep<F>> {
    if newton.decrement <= config.decrement_threshold {
        return Err(Error::Precondition(format!(
            "corrector requires decrement above {}, got {}",
            config.decrement_threshold, newton.decrement
        )));
    }
    let y0 = BlockCollection::canonical_interior(Arc::clone(&state.index));
    let f0 = barrier_value(&y0)?;
    let (t_step, y_new) = line_search(&y0, &newton.step, config.linesearch_tol)?;
    let f1 = barrier_value(&y_new)?;
    Ok(CorrectorStep {
        y_new,
        t_step,
        barrier_decrease: f0 - f1,
        decrement: newton.decrement,
        multipliers: newton.multipliers,
    })
}

/// One Newton line search of the barrier on the objective-level slice,
/// starting from the canonical interior point. Preserves the objective and
/// decreases the barrier by a guaranteed constant when fired above the
/// decrement threshold.
pub fn corrector<F: Scalar>(
    state: &SolverState<F>,
    config: &SolveConfig<F>,
) -> Result<CorrectorStep<F>> {
    let newton = newton_at_center(state, true)?;
    corrector_from(state, config, newton)
}

// ---------------------------------------------------------------------------
// Duality gap
// ---------------------------------------------------------------------------

/// Duality gap `<A0, X> - b^T y` for dual multipliers `y`, together with the
/// validity flag from the psd test of the dual slack `A0 - sum y_i Ai` in
/// rescaled coordinates. Termination may only trigger on valid gaps.
pub fn duality_gap<F: Scalar>(
    state: &SolverState<F>,
    multipliers: &[F],
    gap_check_tol: F,
) -> (F, bool) {
    assert_eq!(
        multipliers.len(),
        state.b.len(),
        "multiplier count mismatch"
    );
    let ytb = multipliers
        .iter()
        .zip(state.b.iter())
        .fold(F::zero(), |acc, (&l, &bi)| acc + l * bi);
    let gap = state.objective - ytb;
    let mut slack = state.a0_resc.clone();
    for (&l, ai) in multipliers.iter().zip(state.a_resc.iter()) {
        slack.add_scaled(-l, ai);
    }
    let valid = lambda_min_sym(&slack) >= -gap_check_tol;
    (gap, valid)
}

/// Folds the objective-row multiplier into a dual candidate. On the central
/// path the objective multiplier is negative and `y_i / (-y_0)` are the dual
/// multipliers; a nonnegative objective multiplier yields no candidate.
fn fold_gap<F: Scalar>(
    state: &SolverState<F>,
    multipliers: &[F],
    gap_check_tol: F,
) -> (Option<F>, bool) {
    let y0 = multipliers[0];
    if y0 >= F::zero() {
        return (None, false);
    }
    let lam: Vec<F> = multipliers[1..].iter().map(|&v| v / -y0).collect();
    let (gap, valid) = duality_gap(state, &lam, gap_check_tol);
    (Some(gap), valid)
}

// ---------------------------------------------------------------------------
// Solve loop
// ---------------------------------------------------------------------------

/// Final iterate, report and per-iteration trace.
#[derive(Debug, Clone)]
pub struct SolveResult<F> {
    pub report: SolutionReport<F>,
    pub trace: Vec<IterationRecord<F>>,
}

/// Per-iteration view handed to a solve observer.
#[derive(Debug)]
pub struct IterationInfo<'a, F: Scalar> {
    pub record: &'a IterationRecord<F>,
    pub x_before: &'a SymMat<F>,
    pub x_after: &'a SymMat<F>,
    pub y_out: &'a BlockCollection<F>,
    /// Barrier value at the canonical interior point.
    pub barrier_center: F,
    /// Barrier value at the returned block point.
    pub barrier_out: F,
}

/// Runs the predictor-corrector loop to a valid duality gap below epsilon.
pub fn solve<F: Scalar>(
    problem: &SdpProblem<F>,
    config: &SolveConfig<F>,
) -> Result<SolveResult<F>> {
    solve_with_observer(problem, config, |_| {})
}

/// [`solve`] with a per-iteration observer, used by verification harnesses.
pub fn solve_with_observer<F: Scalar>(
    problem: &SdpProblem<F>,
    config: &SolveConfig<F>,
    mut observer: impl FnMut(&IterationInfo<'_, F>) + Send,
) -> Result<SolveResult<F>> {
    config.validate()?;
    if config.threads == 0 {
        return solve_inner(problem, config, &mut observer);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| solve_inner(problem, config, &mut observer))
}

fn solve_inner<F: Scalar>(
    problem: &SdpProblem<F>,
    config: &SolveConfig<F>,
    observer: &mut impl FnMut(&IterationInfo<'_, F>),
) -> Result<SolveResult<F>> {
    let mut state = SolverState::initialize(problem, config.k)?;
    let y0 = BlockCollection::canonical_interior(Arc::clone(&state.index));
    let barrier_center = barrier_value(&y0)?;

    let mut status = SolveStatus::MaxIterations;
    let mut last_gap: Option<F> = None;
    let mut last_gap_valid = false;
    let mut predictor_count = 0usize;
    let mut corrector_count = 0usize;

    for iter in 0..config.max_outer {
        let root = if iter == 0 {
            // initialize() already rescaled
            psd_sqrt(&state.x)?
        } else {
            state.rescale(problem)?
        };

        let (q, yhat) = predictor_direction(&state)?;
        if degenerate_objective(&state, &q) {
            status = SolveStatus::Degenerate;
            break;
        }

        let newton = newton_at_center_with(&state, &q, &yhat)?;
        let decrement = newton.decrement;
        let (gap, gap_valid) = fold_gap(&state, &newton.multipliers, config.gap_check_tol);
        last_gap = gap.or(last_gap);
        last_gap_valid = gap_valid;
        if gap_valid {
            if let Some(g) = gap {
                if g <= config.epsilon {
                    status = SolveStatus::Optimal;
                    break;
                }
            }
        }

        let phase;
        let y_out;
        let mut s_star = None;
        let mut t_step = None;
        let mut f_fw_decrease = None;
        if decrement <= config.decrement_threshold {
            phase = Phase::Predictor;
            match predictor_from(&state, config, &q) {
                Ok(step) => {
                    s_star = Some(step.s_star);
                    y_out = step.y_new;
                }
                Err(Error::Unbounded) => {
                    status = SolveStatus::Unbounded;
                    break;
                }
                Err(e) => return Err(e),
            }
        } else {
            phase = Phase::Corrector;
            let step = corrector_from(&state, config, newton)?;
            t_step = Some(step.t_step);
            f_fw_decrease = Some(step.barrier_decrease);
            y_out = step.y_new;
        }

        let x_next = congruence(&root, &y_out.embed_sum());
        let objective_next = frob_inner(&problem.a0, &x_next);
        let record = IterationRecord {
            iter,
            phase,
            objective: objective_next,
            decrement_fw: decrement,
            gap,
            gap_valid,
            s_star,
            t_step,
            f_fw_decrease,
        };
        let barrier_out = barrier_value(&y_out)?;
        observer(&IterationInfo {
            record: &record,
            x_before: &state.x,
            x_after: &x_next,
            y_out: &y_out,
            barrier_center,
            barrier_out,
        });
        state.records.push(record);
        match phase {
            Phase::Predictor => predictor_count += 1,
            Phase::Corrector => corrector_count += 1,
        }
        state.x = x_next;
        state.objective = objective_next;
    }

    let report = SolutionReport {
        x_final: state.x.clone(),
        objective: state.objective,
        gap: last_gap.unwrap_or_else(F::infinity),
        gap_valid: last_gap_valid,
        outer_iters: state.records.len(),
        predictor_count,
        corrector_count,
        status,
    };
    Ok(SolveResult {
        report,
        trace: state.records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    use crate::problem::generate_instance;
    use crate::rng::random_sym;

    fn state_for(problem: &SdpProblem<f64>, k: usize) -> SolverState<f64> {
        SolverState::initialize(problem, k).unwrap()
    }

    #[test]
    fn rescale_identity_is_noop() {
        let p: SdpProblem<f64> = generate_instance(4, 2, 1.0, 3);
        let out = rescale_data(&p.a, &SymMat::identity(4)).unwrap();
        for (o, a) in out.iter().zip(p.a.iter()) {
            assert!(o.minus(a).frob_norm() <= 1e-14);
        }
    }

    #[test]
    fn rescale_diagonal_scales_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_sym::<f64>(&mut rng, 3);
        let d = [0.5, 2.0, 9.0];
        let x = SymMat::from_fn(3, |i, j| if i == j { d[i] } else { 0.0 });
        let out = rescale_data(std::slice::from_ref(&a), &x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = (d[i] * d[j]).sqrt() * a.get(i, j);
                assert!((out[0].get(i, j) - want).abs() <= 1e-14 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn rescale_preserves_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for seed in 0..20u64 {
            let p: SdpProblem<f64> = generate_instance(5 + (seed as usize % 3), 3, 1.0, seed);
            // a random spd iterate
            let x = {
                let b = random_sym::<f64>(&mut rng, p.n);
                let mut m = crate::symmat::congruence(&b, &SymMat::identity(p.n));
                m.add_scaled(0.5, &SymMat::identity(p.n));
                m
            };
            let out = rescale_data(&p.a, &x).unwrap();
            for (o, a) in out.iter().zip(p.a.iter()) {
                let lhs = o.trace();
                let rhs = frob_inner(a, &x);
                assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn normal_system_identity_row_example() {
        // single row = restriction of I at the canonical point, n=4, k=2:
        // M11 = 6 * tr((1/9) I_2) = 4/3
        let idx = SupportIndex::enumerate(4, 2).unwrap();
        let y0 = BlockCollection::<f64>::canonical_interior(Arc::clone(&idx));
        let row = BlockCollection::restrict(&SymMat::identity(4), &idx).unwrap();
        let g = barrier_gradient(&y0).unwrap();
        let (m, r) = assemble_normal_system(std::slice::from_ref(&row), &y0, &g).unwrap();
        assert!((m.get(0, 0) - 4.0 / 3.0).abs() < 1e-12);
        // r1 = sum_J tr(I * Y0 * (-3 I) * Y0) = 6 * (-3) * (2/9) = -4
        assert!((r[0] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn normal_system_matches_double_loop_and_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let idx = SupportIndex::enumerate(4, 2).unwrap();
        let p: SdpProblem<f64> = generate_instance(4, 3, 1.0, 8);
        let st = state_for(&p, 2);
        let abar: Vec<_> = st
            .a_resc
            .iter()
            .map(|a| BlockCollection::restrict(a, &idx).unwrap())
            .collect();
        let y = {
            let blocks = (0..idx.count())
                .map(|_| crate::rng::random_interior_block(&mut rng, 2))
                .collect();
            BlockCollection::from_blocks(Arc::clone(&idx), blocks)
        };
        let g = barrier_gradient(&y).unwrap();
        let (m, _) = assemble_normal_system(&abar, &y, &g).unwrap();
        // direct double-loop evaluation of tr(Bi Y Bj Y) per ordered pair
        for i in 0..3 {
            for j in 0..3 {
                let mut want = 0.0;
                for t in 0..idx.count() {
                    let k = 2;
                    let yd = y.block(t).to_dense();
                    let bi = abar[i].block(t).to_dense();
                    let bj = abar[j].block(t).to_dense();
                    let x1 = mul_dense(&bi, &yd, k);
                    let x2 = mul_dense(&bj, &yd, k);
                    let prod = mul_dense(&x1, &x2, k);
                    for a in 0..k {
                        want += prod[a * k + a];
                    }
                }
                assert!((m.get(i, j) - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn duplicated_rows_are_singular() {
        let idx = SupportIndex::enumerate(4, 2).unwrap();
        let y0 = BlockCollection::<f64>::canonical_interior(Arc::clone(&idx));
        let row = BlockCollection::restrict(&SymMat::identity(4), &idx).unwrap();
        let rows = vec![row.clone(), row];
        let rhs = vec![4.0, 4.0];
        // tr(psi(Y0)) = 4 so both rows are feasible; the normal matrix is rank one
        assert!(matches!(
            restricted_newton(&rows, &rhs, &y0),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn newton_decrement_identity_holds() {
        // decrement^2 == <g, -step> for steps in the row nullspace
        let p: SdpProblem<f64> = generate_instance(4, 2, 1.0, 17);
        let mut st = state_for(&p, 2);
        // move off the central point so the decrement is nonzero: take one
        // predictor step and rescale
        let step = predictor(&st, &SolveConfig::new(2)).unwrap();
        st.x = congruence(&psd_sqrt(&st.x).unwrap(), &step.y_new.embed_sum());
        st.rescale(&p).unwrap();
        let nd = newton_at_center(&st, true).unwrap();
        let y0 = BlockCollection::canonical_interior(Arc::clone(&st.index));
        let g = barrier_gradient(&y0).unwrap();
        let lhs = nd.decrement * nd.decrement;
        let rhs = -g.dot(&nd.step);
        assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        // step lies in the nullspace of every row
        let rows: Vec<_> = std::iter::once(&st.a0_resc)
            .chain(st.a_resc.iter())
            .map(|a| BlockCollection::restrict(a, &st.index).unwrap())
            .collect();
        for row in rows {
            assert!(row.dot(&nd.step).abs() <= 1e-8);
        }
    }

    #[test]
    fn newton_at_minimizer_has_zero_decrement() {
        // rows = {restriction of I}: blocks c*I minimize the barrier on the
        // trace slice, so the decrement vanishes there
        let idx = SupportIndex::enumerate(4, 2).unwrap();
        let row = BlockCollection::<f64>::restrict(&SymMat::identity(4), &idx).unwrap();
        let y = BlockCollection::from_blocks(
            Arc::clone(&idx),
            vec![SymMat::identity(2).scaled(0.4); idx.count()],
        );
        let rhs = vec![row.dot(&y)];
        let nd = restricted_newton(std::slice::from_ref(&row), &rhs, &y).unwrap();
        assert!(nd.decrement <= 1e-8, "decrement {}", nd.decrement);
    }

    #[test]
    fn newton_rejects_infeasible_point() {
        let idx = SupportIndex::enumerate(4, 2).unwrap();
        let row = BlockCollection::<f64>::restrict(&SymMat::identity(4), &idx).unwrap();
        let y0 = BlockCollection::canonical_interior(Arc::clone(&idx));
        let rhs = vec![7.5]; // tr(psi(Y0)) = 4
        assert!(matches!(
            restricted_newton(std::slice::from_ref(&row), &rhs, &y0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn center_decrement_zero_on_generated_instance() {
        // generated instances put the identity exactly on the central path,
        // and the identity is in the span of the row operators
        let p: SdpProblem<f64> = generate_instance(6, 3, 1.0, 4);
        let st = state_for(&p, 2);
        let nd = newton_at_center(&st, true).unwrap();
        assert!(nd.decrement <= 1e-8, "decrement {}", nd.decrement);
    }

    #[test]
    fn center_decrement_zero_with_trace_constraint() {
        // only constraint tr(X) = n with the identity objective: the barrier
        // gradient at the canonical point lifts from a multiple of the
        // identity, so the restricted decrement vanishes
        let eye = SymMat::<f64>::identity(4);
        let p = SdpProblem::new(eye.clone(), vec![eye], vec![4.0]).unwrap();
        let st = state_for(&p, 2);
        let nd = newton_at_center(&st, true).unwrap();
        assert!(nd.decrement <= 1e-8, "decrement {}", nd.decrement);
        assert_eq!(nd.multipliers.len(), 2);
        assert_eq!(nd.multipliers[0], 0.0);
    }

    #[test]
    fn predictor_detects_degenerate_objective() {
        let p: SdpProblem<f64> = generate_instance(4, 2, 1.0, 5);
        let mut q = p.clone();
        q.a0 = q.a[0].clone();
        q.x0 = Some(SymMat::identity(4));
        q.eta0 = None;
        let st = state_for(&q, 2);
        assert!(matches!(
            predictor(&st, &SolveConfig::new(2)),
            Err(Error::DegenerateObjective)
        ));
    }

    #[test]
    fn predictor_decreases_objective_and_keeps_feasibility() {
        for seed in [1u64, 2, 9] {
            let p: SdpProblem<f64> = generate_instance(4, 2, 1.0, seed);
            let st = state_for(&p, 2);
            let config = SolveConfig::new(2);
            let step = predictor(&st, &config).unwrap();
            assert!(step.y_new.is_interior());
            let xnew = step.y_new.embed_sum();
            // feasibility in rescaled coordinates
            for (ai, bi) in st.a_resc.iter().zip(st.b.iter()) {
                assert!((frob_inner(ai, &xnew) - bi).abs() <= 1e-8 * (1.0 + bi.abs()));
            }
            // strict objective decrease, verified in original coordinates
            let x_orig = congruence(&psd_sqrt(&st.x).unwrap(), &xnew);
            let v_new = frob_inner(&p.a0, &x_orig);
            assert!(v_new < st.objective - 1e-12);
            // sigma ordering: larger fraction reaches lower objective
            let mut wide = SolveConfig::new(2);
            wide.sigma = 0.9;
            let step2 = predictor(&st, &wide).unwrap();
            let v2 = frob_inner(&st.a0_resc, &step2.y_new.embed_sum());
            let v1 = frob_inner(&st.a0_resc, &step.y_new.embed_sum());
            assert!(v2 < v1);
        }
    }

    #[test]
    fn line_search_symmetric_example() {
        // single block, Y = diag(2, 0.5), D = diag(1, -1): stationarity at
        // 2 + t = 0.5 - t, i.e. t = -0.75
        let idx = SupportIndex::enumerate(2, 2).unwrap();
        let y = BlockCollection::<f64>::from_blocks(
            Arc::clone(&idx),
            vec![SymMat::from_fn(
                2,
                |i, j| {
                    if i == j {
                        [2.0, 0.5][i]
                    } else {
                        0.0
                    }
                },
            )],
        );
        let d = BlockCollection::<f64>::from_blocks(
            Arc::clone(&idx),
            vec![SymMat::from_fn(2, |i, j| {
                if i == j {
                    [1.0, -1.0][i]
                } else {
                    0.0
                }
            })],
        );
        let (t, ynew) = line_search(&y, &d, 1e-10).unwrap();
        assert!((t + 0.75).abs() <= 1e-8, "t = {t}");
        assert!((ynew.block(0).get(0, 0) - 1.25).abs() <= 1e-8);
        assert!((ynew.block(0).get(1, 1) - 1.25).abs() <= 1e-8);
    }

    #[test]
    fn line_search_rejects_zero_direction() {
        let idx = SupportIndex::enumerate(2, 2).unwrap();
        let y = BlockCollection::<f64>::canonical_interior(Arc::clone(&idx));
        let d = BlockCollection::zeros(Arc::clone(&idx));
        assert!(matches!(
            line_search(&y, &d, 1e-10),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn line_search_matches_golden_section_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let idx = SupportIndex::enumerate(4, 2).unwrap();
        for _ in 0..10 {
            let y = {
                let blocks = (0..idx.count())
                    .map(|_| crate::rng::random_interior_block(&mut rng, 2))
                    .collect();
                BlockCollection::from_blocks(Arc::clone(&idx), blocks)
            };
            let d = {
                let blocks = (0..idx.count()).map(|_| random_sym(&mut rng, 2)).collect();
                let d = BlockCollection::from_blocks(Arc::clone(&idx), blocks);
                d.scaled(1.0 / d.norm())
            };
            let res = line_search(&y, &d, 1e-13);
            let (t, _) = match res {
                Ok(v) => v,
                Err(Error::MonotoneAlongDirection) => continue,
                Err(e) => panic!("{e}"),
            };
            // golden-section search over a bracket around t
            let phi = |s: f64| barrier_value(&y.plus_scaled(s, &d));
            let (mut a, mut b) = (t - 0.5, t + 0.5);
            while phi(a).is_err() {
                a = (a + t) / 2.0;
            }
            while phi(b).is_err() {
                b = (b + t) / 2.0;
            }
            let golden = 0.5 * (3.0 - 5f64.sqrt());
            for _ in 0..120 {
                let x1 = a + golden * (b - a);
                let x2 = b - golden * (b - a);
                if phi(x1).unwrap() < phi(x2).unwrap() {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            let oracle = 0.5 * (a + b);
            // a value-based oracle only localizes the minimizer to the
            // rounding floor sqrt(2 eps |phi| / phi''); allow for it
            let h = 1e-4;
            let curv = ((phi(t + h).unwrap() - 2.0 * phi(t).unwrap() + phi(t - h).unwrap())
                / (h * h))
                .max(1e-12);
            let floor = (2.0 * f64::EPSILON * (1.0 + phi(t).unwrap().abs()) / curv).sqrt();
            assert!(
                (t - oracle).abs() <= 1e-8 + 4.0 * floor,
                "t={t} oracle={oracle} floor={floor:e}"
            );
        }
    }

    fn advance_to_corrector_state(
        p: &SdpProblem<f64>,
        config: &SolveConfig<f64>,
    ) -> Option<SolverState<f64>> {
        let mut st = state_for(p, config.k);
        for _ in 0..50 {
            let nd = newton_at_center(&st, true).unwrap();
            if nd.decrement > config.decrement_threshold {
                return Some(st);
            }
            let step = predictor(&st, config).unwrap();
            let r = psd_sqrt(&st.x).unwrap();
            st.x = congruence(&r, &step.y_new.embed_sum());
            st.rescale(p).unwrap();
        }
        None
    }

    #[test]
    fn corrector_guarantees_constant_decrease_and_objective() {
        let config = SolveConfig::new(2);
        let mut exercised = 0;
        for seed in 1..20u64 {
            let p: SdpProblem<f64> = generate_instance(4, 2, 1.0, seed);
            let Some(st) = advance_to_corrector_state(&p, &config) else {
                continue;
            };
            exercised += 1;
            let step = corrector(&st, &config).unwrap();
            assert!(
                step.barrier_decrease >= 1.0 / 2688.0 - 1e-9,
                "seed {seed}: decrease {}",
                step.barrier_decrease
            );
            let v_new = frob_inner(&st.a0_resc, &step.y_new.embed_sum());
            assert!(
                (v_new - st.objective).abs() <= 1e-8 * (1.0 + st.objective.abs()),
                "seed {seed}: objective drift"
            );
        }
        assert!(exercised >= 5, "only {exercised} corrector states found");
    }

    #[test]
    fn corrector_rejects_small_decrement() {
        let p: SdpProblem<f64> = generate_instance(6, 3, 1.0, 4);
        let st = state_for(&p, 2);
        // the generated instance starts on the central path: decrement ~ 0
        assert!(matches!(
            corrector(&st, &SolveConfig::new(2)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn duality_gap_at_optimal_pair_is_tiny() {
        // a huge path parameter puts the generated identity start essentially
        // at the optimum; the folded dual candidate certifies gap = n / eta0
        let p: SdpProblem<f64> = generate_instance(4, 2, 1e9, 11);
        let st = state_for(&p, 2);
        let nd = newton_at_center(&st, true).unwrap();
        let y0 = nd.multipliers[0];
        assert!(y0 < 0.0);
        let lam: Vec<f64> = nd.multipliers[1..].iter().map(|v| v / -y0).collect();
        let (gap, valid) = duality_gap(&st, &lam, 1e-9);
        assert!(valid);
        assert!(gap.abs() <= 1e-8, "gap {gap:e}");
    }

    #[test]
    fn guard_transfer_to_sdp_decrement() {
        // whenever the block decrement passes the 1/14 guard, the SDP-side
        // restricted decrement at the identity passes it too
        use crate::oracle::sdp_decrement_at_identity;
        let p: SdpProblem<f64> = generate_instance(6, 3, 1.0, 2);
        let config = SolveConfig::new(3);
        let mut st = state_for(&p, 3);
        let mut guarded = 0;
        for _ in 0..15 {
            let nd = newton_at_center(&st, true).unwrap();
            if nd.decrement <= config.decrement_threshold {
                let mut rows = vec![st.a0_resc.clone()];
                rows.extend(st.a_resc.iter().cloned());
                let dec_sdp = sdp_decrement_at_identity(&rows).unwrap();
                assert!(
                    dec_sdp <= 1.0 / 14.0 + 1e-8,
                    "block decrement {} but SDP decrement {dec_sdp}",
                    nd.decrement
                );
                guarded += 1;
            }
            let y_out = if nd.decrement <= config.decrement_threshold {
                predictor(&st, &config).unwrap().y_new
            } else {
                corrector_from(&st, &config, nd).unwrap().y_new
            };
            let r = psd_sqrt(&st.x).unwrap();
            st.x = congruence(&r, &y_out.embed_sum());
            st.rescale(&p).unwrap();
        }
        assert!(guarded >= 5, "only {guarded} guarded iterations seen");
    }

    #[test]
    fn duality_gap_flags_indefinite_slack() {
        let p: SdpProblem<f64> = generate_instance(4, 2, 1.0, 6);
        let st = state_for(&p, 2);
        // absurd multipliers produce an indefinite slack
        let lam = vec![1e3, -1e3];
        let (_, valid) = duality_gap(&st, &lam, 1e-9);
        assert!(!valid);
    }

    #[test]
    fn solve_generated_instance_to_tolerance() {
        let p: SdpProblem<f64> = generate_instance(4, 3, 1.0, 42);
        let config = SolveConfig::new(2);
        let res = solve(&p, &config).unwrap();
        assert_eq!(res.report.status, SolveStatus::Optimal);
        assert!(res.report.gap_valid);
        assert!(res.report.gap <= 1e-6);
        assert!(p.feasibility_error(&res.report.x_final) <= 1e-8);
        // counts
        assert_eq!(
            res.report.predictor_count + res.report.corrector_count,
            res.report.outer_iters
        );
        assert_eq!(res.trace.len(), res.report.outer_iters);
    }

    #[test]
    fn valid_gaps_decrease_along_the_run() {
        // gap monotonicity up to 10% jitter, from logged-trace inspection
        for seed in [7u64, 42, 3] {
            let p: SdpProblem<f64> = generate_instance(4, 3, 1.0, seed);
            let res = solve(&p, &SolveConfig::new(2)).unwrap();
            let gaps: Vec<f64> = res
                .trace
                .iter()
                .filter(|r| r.gap_valid)
                .filter_map(|r| r.gap)
                .collect();
            assert!(gaps.len() > 10);
            for w in gaps.windows(2) {
                assert!(w[1] <= 1.1 * w[0], "seed {seed}: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn solve_degenerate_objective_immediately() {
        let mut p: SdpProblem<f64> = generate_instance(4, 2, 1.0, 5);
        p.a0 = p.a[0].clone();
        p.eta0 = None;
        let res = solve(&p, &SolveConfig::new(2)).unwrap();
        assert_eq!(res.report.status, SolveStatus::Degenerate);
        assert_eq!(res.report.outer_iters, 0);
        // objective equals b[0] on the whole feasible set
        assert!((res.report.objective - p.b[0]).abs() <= 1e-10 * (1.0 + p.b[0].abs()));
    }

    #[test]
    fn solve_full_cone_matches_small_k_ordering() {
        let p: SdpProblem<f64> = generate_instance(4, 3, 1.0, 7);
        let run_k2 = solve(&p, &SolveConfig::new(2)).unwrap();
        let run_k4 = solve(&p, &SolveConfig::new(4)).unwrap();
        assert_eq!(run_k4.report.status, SolveStatus::Optimal);
        // relaxed-cone runs stay above the full-cone optimum
        assert!(run_k2.report.objective >= run_k4.report.objective - 1e-5);
    }

    #[test]
    fn solve_requires_starting_point() {
        let mut p: SdpProblem<f64> = generate_instance(4, 2, 1.0, 5);
        p.b[0] += 10.0; // identity no longer feasible
        p.x0 = None;
        assert!(matches!(
            solve(&p, &SolveConfig::new(2)),
            Err(Error::NoStartingPoint)
        ));
    }
}
