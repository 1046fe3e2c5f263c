//! The bubble procedure: grow the D-norm of an iterate `z` in the affine hull
//! `{Ax = b}` by repeated projection onto a shrinking region, until `z` is
//! nonnegative, the region is empty, or `||z||_D^2 > 4n`.
//!
//! All quantities are kept in a scaled rational basis. For each variable `j`
//! the plane `{x : Ax = b, x_j = l_j}` is represented by a normal `p_j` in the
//! null space of `A` (the D-projection of `D^{-1} e_j`), its squared norm `n_j`
//! and an offset `beta_j` with `x_j >= l_j  <=>  <p_j, x>_D >= beta_j` on the
//! affine hull. The iterate is `z = r0 + sum_j rho_j p_j` with `rho >= 0`,
//! where `r0` is the minimum-norm point of the hull. Unit-normalised normals
//! and their multipliers involve square roots and are never formed; every
//! comparison between them is done on squares.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::config::{Config, Mode};
use crate::error::{Result, SolveError};
use crate::geometry::{self, AffineSystem, DContext, Projector};
use crate::problem::Problem;
use crate::scalar::{self, Scalar};

/// Hyperplane data for one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCache {
    /// Null-space normal; `D p = A^T c_hat + e_j`.
    pub p: Vec<Scalar>,
    /// `||p||_D^2`.
    pub norm_sq: Scalar,
    pub c_hat: Vec<Scalar>,
    /// `b^T c_hat + l_j`.
    pub beta_hat: Scalar,
}

impl PlaneCache {
    /// `x_j` is constant on the affine hull.
    pub fn is_constant(&self) -> bool {
        self.norm_sq.is_zero()
    }
}

/// Mutable part of a bubble run.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleState {
    pub z: Vec<Scalar>,
    pub rho: Vec<Scalar>,
    /// `||z - r0||_D^2`.
    pub gap_sq: Scalar,
    /// Pivots performed so far, the initial one included.
    pub iter: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BubbleOutcome {
    /// `Ax = b`, `x >= 0`.
    Feasible(Vec<Scalar>),
    /// `Dz = A^T v + w`, `||z||_D^2 = b^T v + l^T w > 4n`, `w >= 0`, `w != 0`.
    Separator { v: Vec<Scalar>, w: Vec<Scalar>, z: Vec<Scalar> },
    /// `A^T v + w = 0`, `w >= 0`, `b^T v + l^T w > 0`.
    FarkasEmptyK { v: Vec<Scalar>, w: Vec<Scalar> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Advance(BubbleState),
    Done(BubbleOutcome),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BubbleStats {
    pub advances: u64,
    /// Exact per-step progress checks performed (all passed).
    pub progress_checks: u64,
    /// Exact post-rounding net-gain checks performed (all passed).
    pub net_gain_checks: u64,
    pub rounding_applied: u64,
    pub rounding_fallbacks: u64,
    pub max_bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BubbleRun {
    pub outcome: BubbleOutcome,
    pub iterations: u64,
    pub n_active: usize,
    pub stats: BubbleStats,
}

/// Everything a bubble run needs that does not change between steps.
#[derive(Debug, Clone)]
pub struct Bubble {
    a: Vec<Vec<Scalar>>,
    b: Vec<Scalar>,
    ctx: DContext,
    ell: Vec<Scalar>,
    r0: Vec<Scalar>,
    r0_norm_sq: Scalar,
    v0: Vec<Scalar>,
    planes: Vec<PlaneCache>,
    /// `4n`: the iterate leaves the loop once `||z||_D^2` exceeds this.
    radius_sq: Scalar,
    /// `1/n^2`.
    min_gain: Scalar,
    /// `max beta_j^2` over planes with `beta_j > 0`.
    beta_max_sq: Scalar,
    cross_check: bool,
}

/// `ceil(8 n^3) + 1`.
pub fn iteration_cap(n_active: usize) -> u64 {
    8 * (n_active as u64).pow(3) + 1
}

/// Nearest multiple of `grid` to `x`, halves rounded up.
pub fn round_to_grid(x: &Scalar, grid: &Scalar) -> Scalar {
    let k = (x / grid + scalar::ratio(1, 2)).floor();
    k * grid
}

fn add_scaled(acc: &mut [Scalar], x: &[Scalar], f: &Scalar) {
    if f.is_zero() {
        return;
    }
    for (a, v) in acc.iter_mut().zip(x) {
        if !v.is_zero() {
            *a += v * f;
        }
    }
}

fn internal(msg: impl Into<String>) -> SolveError {
    SolveError::Internal(msg.into())
}

impl Bubble {
    /// Computes `r0`, `v0` and the plane cache. `problem` must have full row
    /// rank and `u > 0`.
    pub fn new(problem: &Problem, u: Vec<Scalar>, cross_check: bool) -> Result<Self> {
        let n = problem.cols();
        if u.len() != n {
            return Err(SolveError::Dimension(format!("u has length {}, expected {n}", u.len())));
        }
        if n == 0 {
            return Err(SolveError::Dimension("no active variables".into()));
        }
        let ctx = DContext::new(u)?;
        let a = problem.a_rational();
        let b = problem.b_rational();
        let m = a.len();
        let two_n = scalar::int(2 * n as i64);
        let ell: Vec<Scalar> = ctx.u().iter().map(|x| x / &two_n).collect();

        let projector = if m > 0 {
            Some(Projector::new(&a, &ctx).map_err(|e| match e {
                SolveError::Singular => SolveError::Rank,
                other => other,
            })?)
        } else {
            None
        };
        let zeros = vec![Scalar::zero(); n];
        let (r0, v0) = match &projector {
            Some(pr) => pr.project(&b, &zeros)?,
            None => (zeros.clone(), Vec::new()),
        };
        let zero_rhs = vec![Scalar::zero(); m];
        let mut planes = Vec::with_capacity(n);
        for j in 0..n {
            let mut xbar = zeros.clone();
            xbar[j] = ctx.d_inv()[j].clone();
            let (p, c_hat) = match &projector {
                Some(pr) => pr.project(&zero_rhs, &xbar)?,
                None => (xbar, Vec::new()),
            };
            let norm_sq = ctx.norm_sq(&p);
            if norm_sq != p[j] {
                return Err(internal(format!("plane {j}: ||p||_D^2 differs from p_j")));
            }
            let beta_hat = scalar::dot(&b, &c_hat) + &ell[j];
            planes.push(PlaneCache { p, norm_sq, c_hat, beta_hat });
        }
        let beta_max_sq = planes
            .iter()
            .filter(|pl| !pl.is_constant() && pl.beta_hat.is_positive())
            .map(|pl| &pl.beta_hat * &pl.beta_hat / &pl.norm_sq)
            .max()
            .unwrap_or_else(Scalar::zero);
        let r0_norm_sq = ctx.norm_sq(&r0);
        let bubble = Bubble {
            a,
            b,
            ell,
            r0_norm_sq,
            r0,
            v0,
            planes,
            radius_sq: scalar::int(4 * n as i64),
            min_gain: scalar::ratio(1, (n * n) as i64),
            beta_max_sq,
            cross_check,
            ctx,
        };
        if cross_check {
            bubble.check_setup()?;
        }
        Ok(bubble)
    }

    pub fn ctx(&self) -> &DContext {
        &self.ctx
    }

    pub fn ell(&self) -> &[Scalar] {
        &self.ell
    }

    pub fn r0(&self) -> &[Scalar] {
        &self.r0
    }

    pub fn v0(&self) -> &[Scalar] {
        &self.v0
    }

    pub fn planes(&self) -> &[PlaneCache] {
        &self.planes
    }

    pub fn n_active(&self) -> usize {
        self.ell.len()
    }

    pub fn norm_sq(&self, state: &BubbleState) -> Scalar {
        &self.r0_norm_sq + &state.gap_sq
    }

    fn a_times(&self, x: &[Scalar]) -> Vec<Scalar> {
        self.a.iter().map(|r| scalar::dot(r, x)).collect()
    }

    fn a_transpose_times(&self, y: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.n_active()];
        for (row, yi) in self.a.iter().zip(y) {
            add_scaled(&mut out, row, yi);
        }
        out
    }

    fn check_setup(&self) -> Result<()> {
        if self.a_times(&self.r0) != self.b {
            return Err(internal("A r0 != b"));
        }
        if self.ctx.scale(&self.r0) != self.a_transpose_times(&self.v0) {
            return Err(internal("D r0 != A^T v0"));
        }
        for (j, pl) in self.planes.iter().enumerate() {
            if self.a_times(&pl.p).iter().any(|x| !x.is_zero()) {
                return Err(internal(format!("A p_{j} != 0")));
            }
            let mut rhs = self.a_transpose_times(&pl.c_hat);
            rhs[j] += scalar::one();
            if self.ctx.scale(&pl.p) != rhs {
                return Err(internal(format!("D p_{j} != A^T c_{j} + e_{j}")));
            }
        }
        Ok(())
    }

    /// Initial point and first pivot. Returns `Done` when `r0` is already
    /// feasible or some coordinate is pinned below its lower bound.
    pub fn init(&self) -> Result<Step> {
        if scalar::is_nonneg(&self.r0) {
            return Ok(Step::Done(BubbleOutcome::Feasible(self.r0.clone())));
        }
        let n = self.n_active();
        for j in 0..n {
            if self.planes[j].is_constant() && self.r0[j] < self.ell[j] {
                let mut theta = vec![Scalar::zero(); n];
                theta[j] = scalar::one();
                return self.farkas_from(theta).map(Step::Done);
            }
        }
        // argmax beta_j; only positive offsets can win since r0 is infeasible.
        let mut best: Option<(usize, Scalar)> = None;
        for (j, pl) in self.planes.iter().enumerate() {
            if pl.is_constant() {
                continue;
            }
            let gap = geometry::signed_gap_to_hyperplane(
                &pl.p,
                &pl.norm_sq,
                &pl.beta_hat,
                &self.r0,
                &self.ctx,
            )?;
            if gap.side != std::cmp::Ordering::Greater {
                continue;
            }
            if best.as_ref().is_none_or(|(_, d)| gap.dist_sq > *d) {
                best = Some((j, gap.dist_sq));
            }
        }
        let (t, gap_sq) = best.ok_or_else(|| internal("r0 infeasible but no plane separates it"))?;
        let pl = &self.planes[t];
        let coef = &pl.beta_hat / &pl.norm_sq;
        let mut z = self.r0.clone();
        add_scaled(&mut z, &pl.p, &coef);
        let mut rho = vec![Scalar::zero(); n];
        rho[t] = coef;
        if gap_sq <= self.min_gain {
            return Err(internal("first pivot gained no more than 1/n^2"));
        }
        let state = BubbleState { z, rho, gap_sq, iter: 1 };
        if self.cross_check {
            let sys = self.pinned_system(t, None);
            let (y, _) = geometry::project_affine(&sys, &vec![Scalar::zero(); n], &self.ctx)?;
            if y != state.z {
                return Err(internal("first pivot differs from direct projection"));
            }
            self.check_state(&state)?;
        }
        Ok(Step::Advance(state))
    }

    /// `{Ax = b, x_i = l_i}` plus, optionally, `<g, x>_D = rhs`.
    fn pinned_system(&self, i: usize, level: Option<(&[Scalar], &Scalar)>) -> AffineSystem {
        let n = self.n_active();
        let mut c = self.a.clone();
        let mut d = self.b.clone();
        if let Some((g, rhs)) = level {
            c.push(self.ctx.scale(g));
            d.push(rhs.clone());
        }
        let mut e = vec![Scalar::zero(); n];
        e[i] = scalar::one();
        c.push(e);
        d.push(self.ell[i].clone());
        AffineSystem::new(c, d)
    }

    /// Index `i` with `z_i < 0` minimising `z_i / u_i`; smallest index on ties.
    pub fn choose_violated_index(&self, state: &BubbleState) -> Option<usize> {
        let mut best: Option<(usize, Scalar)> = None;
        for (i, (z, u)) in state.z.iter().zip(self.ctx.u()).enumerate() {
            if !z.is_negative() {
                continue;
            }
            let key = z / u;
            if best.as_ref().is_none_or(|(_, k)| key < *k) {
                best = Some((i, key));
            }
        }
        best.map(|(i, _)| i)
    }

    fn gap_vector(&self, state: &BubbleState) -> Vec<Scalar> {
        state.z.iter().zip(&self.r0).map(|(z, r)| z - r).collect()
    }

    /// Farkas pair from nonnegative plane multipliers `theta` with
    /// `sum theta_j p_j = 0`.
    fn farkas_from(&self, theta: Vec<Scalar>) -> Result<BubbleOutcome> {
        let m = self.b.len();
        let mut v = vec![Scalar::zero(); m];
        let mut value = Scalar::zero();
        for (t, pl) in theta.iter().zip(&self.planes) {
            if t.is_zero() {
                continue;
            }
            add_scaled(&mut v, &pl.c_hat, t);
            value += t * &pl.beta_hat;
        }
        let lhs = self.a_transpose_times(&v);
        if lhs.iter().zip(&theta).any(|(a, w)| !(a + w).is_zero()) {
            return Err(internal("Farkas pair: A^T v + w != 0"));
        }
        if !value.is_positive() || value != scalar::dot(&self.b, &v) + scalar::dot(&self.ell, &theta) {
            return Err(internal("Farkas pair: b^T v + l^T w is not positive"));
        }
        Ok(BubbleOutcome::FarkasEmptyK { v, w: theta })
    }

    /// One projection step on the violated index `i`.
    pub fn step(&self, state: &BubbleState, i: usize) -> Result<Step> {
        if !state.z[i].is_negative() {
            return Err(internal(format!("pivot index {i} is not violated")));
        }
        let n = self.n_active();
        let pl = &self.planes[i];
        if pl.is_constant() {
            let mut theta = vec![Scalar::zero(); n];
            theta[i] = scalar::one();
            return self.farkas_from(theta).map(Step::Done);
        }
        let g = self.gap_vector(state);
        let gap = &state.gap_sq;
        let s = self.ctx.inner(&pl.p, &g);
        let det = &pl.norm_sq * gap - &s * &s;
        if det.is_zero() {
            // p_i = (s / gap) g; the region is empty exactly when s < 0.
            if !s.is_negative() {
                return Err(internal(format!("plane {i} positively parallel to the iterate")));
            }
            let tau = -&s / gap;
            let mut theta: Vec<Scalar> = state.rho.iter().map(|r| r * &tau).collect();
            theta[i] += scalar::one();
            return self.farkas_from(theta).map(Step::Done);
        }
        let mu1 = gap * (&pl.beta_hat - &s) / &det;
        let mu2 = (&pl.norm_sq * gap - &s * &pl.beta_hat) / &det;
        if mu1.is_negative() || mu2.is_negative() {
            return Err(internal(format!("negative step multipliers at pivot {i}")));
        }
        let mut z = self.r0.clone();
        add_scaled(&mut z, &pl.p, &mu1);
        add_scaled(&mut z, &g, &mu2);
        let mut rho: Vec<Scalar> = state.rho.iter().map(|r| r * &mu2).collect();
        rho[i] += &mu1;
        let gap_new = &mu1 * &pl.beta_hat + &mu2 * gap;

        if gap_new <= gap + &self.min_gain {
            return Err(internal(format!(
                "step on {i} gained {} <= 1/n^2",
                scalar::to_f64(&(&gap_new - gap))
            )));
        }
        for (j, (r, p)) in rho.iter().zip(&self.planes).enumerate() {
            if r.is_positive() && &p.beta_hat * &p.beta_hat > &p.norm_sq * &gap_new {
                return Err(internal(format!("plane {j} offset exceeds iterate distance")));
            }
        }
        if &self.r0_norm_sq + &gap_new <= self.radius_sq {
            // rho'_j sqrt(n_j) <= 8n^3 (rho_j sqrt(n_j) + beta), squared and relaxed.
            let nn = scalar::int(n as i64);
            let bound = scalar::int(64) * nn.pow(6);
            let two = scalar::int(2);
            for (j, pl) in self.planes.iter().enumerate() {
                let lhs = &rho[j] * &rho[j] * &pl.norm_sq;
                let old = &state.rho[j];
                let rhs = &bound * (&two * old * old * &pl.norm_sq + &two * gap);
                if lhs > rhs {
                    return Err(internal(format!("coefficient growth bound violated at {j}")));
                }
            }
        }
        let next = BubbleState { z, rho, gap_sq: gap_new, iter: state.iter + 1 };
        if self.cross_check {
            let sys = self.pinned_system(i, Some((&g, gap)));
            let (y, _) = geometry::project_affine(&sys, &self.r0, &self.ctx)?;
            if y != next.z {
                return Err(internal(format!("step on {i} differs from direct projection")));
            }
            self.check_state(&next)?;
        }
        Ok(Step::Advance(next))
    }

    /// Re-checks the representation invariants of `state` from scratch.
    pub fn check_state(&self, state: &BubbleState) -> Result<()> {
        if self.a_times(&state.z) != self.b {
            return Err(internal("A z != b"));
        }
        let g = self.gap_vector(state);
        if !self.ctx.inner(&g, &self.r0).is_zero() {
            return Err(internal("z - r0 not D-orthogonal to r0"));
        }
        if self.ctx.norm_sq(&g) != state.gap_sq {
            return Err(internal("stored gap differs from ||z - r0||_D^2"));
        }
        if state.rho.iter().any(|r| r.is_negative()) {
            return Err(internal("negative plane multiplier"));
        }
        let mut comb = vec![Scalar::zero(); self.n_active()];
        let mut offset = Scalar::zero();
        for (r, pl) in state.rho.iter().zip(&self.planes) {
            add_scaled(&mut comb, &pl.p, r);
            offset += r * &pl.beta_hat;
        }
        if comb != g {
            return Err(internal("z - r0 != sum rho_j p_j"));
        }
        if offset != state.gap_sq {
            return Err(internal("sum rho_j beta_j != gap"));
        }
        Ok(())
    }

    /// Grid granularity `1 / (q n ceil(sqrt(n_j)))` with `q = 16 n^3`.
    pub fn grid(&self, j: usize) -> Scalar {
        let n = BigInt::from(self.n_active());
        let q = BigInt::from(16) * n.pow(3);
        let c = scalar::ceil_sqrt(&self.planes[j].norm_sq).max(BigInt::from(1));
        Scalar::new(BigInt::from(1), q * n * c)
    }

    /// Rounds the plane multipliers to the grid and moves `z` to the
    /// closest point of the rounded inequality. Keeps `state` unchanged when
    /// any of the rounding guarantees fails; the second component reports
    /// whether rounding was applied.
    pub fn round_coefficients(&self, state: &BubbleState) -> (BubbleState, bool) {
        let n = self.n_active();
        let rounded: Vec<Scalar> = state
            .rho
            .iter()
            .enumerate()
            .map(|(j, r)| if r.is_zero() { Scalar::zero() } else { round_to_grid(r, &self.grid(j)) })
            .collect();
        if rounded == state.rho {
            return (state.clone(), true);
        }
        let mut gamma = vec![Scalar::zero(); n];
        let mut delta = Scalar::zero();
        for (r, pl) in rounded.iter().zip(&self.planes) {
            add_scaled(&mut gamma, &pl.p, r);
            if !r.is_zero() {
                delta += r * &pl.beta_hat;
            }
        }
        let gamma_sq = self.ctx.norm_sq(&gamma);
        if !delta.is_positive() || gamma_sq.is_zero() {
            return (state.clone(), false);
        }
        let gap_new = &delta * &delta / &gamma_sq;
        let slack = scalar::ratio(1, 2 * (n * n) as i64);
        if &state.gap_sq - &gap_new > slack || gap_new < self.beta_max_sq {
            return (state.clone(), false);
        }
        if rounded.iter().zip(&self.planes).any(|(r, pl)| {
            r.is_positive() && &pl.beta_hat * &pl.beta_hat > &pl.norm_sq * &gap_new
        }) {
            return (state.clone(), false);
        }
        let f = &delta / &gamma_sq;
        let mut z = self.r0.clone();
        add_scaled(&mut z, &gamma, &f);
        let rho = rounded.into_iter().map(|r| r * &f).collect();
        (BubbleState { z, rho, gap_sq: gap_new, iter: state.iter }, true)
    }

    /// Separating pair for the current iterate.
    pub fn separator(&self, state: &BubbleState) -> Result<BubbleOutcome> {
        let mut v = self.v0.clone();
        for (r, pl) in state.rho.iter().zip(&self.planes) {
            add_scaled(&mut v, &pl.c_hat, r);
        }
        let w = state.rho.clone();
        let mut lhs = self.a_transpose_times(&v);
        lhs.iter_mut().zip(&w).for_each(|(a, x)| *a += x);
        if lhs != self.ctx.scale(&state.z) {
            return Err(internal("separator: Dz != A^T v + w"));
        }
        let norm = self.norm_sq(state);
        if norm != scalar::dot(&self.b, &v) + scalar::dot(&self.ell, &w) {
            return Err(internal("separator: ||z||^2 != b^T v + l^T w"));
        }
        Ok(BubbleOutcome::Separator { v, w, z: state.z.clone() })
    }

    fn state_bits(&self, state: &BubbleState) -> u64 {
        scalar::max_bit_size(state.z.iter().chain(&state.rho).chain(std::iter::once(&state.gap_sq)))
    }

    fn setup_bits(&self) -> u64 {
        let mut bits = scalar::max_bit_size(self.r0.iter().chain(&self.v0).chain(&self.ell));
        for pl in &self.planes {
            bits = bits.max(scalar::max_bit_size(
                pl.p.iter().chain(&pl.c_hat).chain([&pl.norm_sq, &pl.beta_hat]),
            ));
        }
        bits
    }
}

/// Runs the bubble procedure on a full-row-rank `problem` with bounds `u`.
pub fn run_bubble(problem: &Problem, u: Vec<Scalar>, config: &Config) -> Result<BubbleRun> {
    run_bubble_observed(problem, u, config, |_, _| {})
}

/// As [`run_bubble`], calling `observe` on every iterate (after rounding).
pub fn run_bubble_observed(
    problem: &Problem,
    u: Vec<Scalar>,
    config: &Config,
    mut observe: impl FnMut(&Bubble, &BubbleState),
) -> Result<BubbleRun> {
    let bubble = Bubble::new(problem, u, config.cross_check)?;
    let n = bubble.n_active();
    let cap = iteration_cap(n);
    let mut stats = BubbleStats { max_bits: bubble.setup_bits(), ..Default::default() };
    let bits_guard = |bits: u64| -> Result<()> {
        if bits >= config.max_bits {
            return Err(SolveError::BitSize { bits, cap: config.max_bits });
        }
        Ok(())
    };
    bits_guard(stats.max_bits)?;
    let finish = |outcome, iterations, stats| BubbleRun { outcome, iterations, n_active: n, stats };

    let mut state = match bubble.init()? {
        Step::Done(outcome) => {
            let iters = u64::from(!matches!(outcome, BubbleOutcome::Feasible(_)));
            return Ok(finish(outcome, iters, stats));
        }
        Step::Advance(s) => s,
    };
    let half_gain = scalar::ratio(1, 2 * (n * n) as i64);
    loop {
        stats.max_bits = stats.max_bits.max(bubble.state_bits(&state));
        bits_guard(stats.max_bits)?;
        observe(&bubble, &state);
        if config.mode == Mode::FloatShadow {
            log::debug!(
                "bubble iter {}: ||z||^2 ~ {:.6}, gap ~ {:.6}",
                state.iter,
                scalar::to_f64(&bubble.norm_sq(&state)),
                scalar::to_f64(&state.gap_sq)
            );
        }
        if bubble.norm_sq(&state) > bubble.radius_sq {
            let outcome = bubble.separator(&state)?;
            return Ok(finish(outcome, state.iter, stats));
        }
        let Some(i) = bubble.choose_violated_index(&state) else {
            return Ok(finish(BubbleOutcome::Feasible(state.z), state.iter, stats));
        };
        if state.iter >= cap {
            return Err(SolveError::IterationCap { what: "bubble", cap });
        }
        let next = match bubble.step(&state, i)? {
            Step::Done(outcome) => return Ok(finish(outcome, state.iter + 1, stats)),
            Step::Advance(next) => next,
        };
        stats.advances += 1;
        stats.progress_checks += 1;
        let next = if config.rounding {
            let (rounded, applied) = bubble.round_coefficients(&next);
            if applied {
                stats.rounding_applied += 1;
            } else {
                stats.rounding_fallbacks += 1;
            }
            rounded
        } else {
            next
        };
        if &next.gap_sq - &state.gap_sq < half_gain {
            return Err(internal("net gain after rounding below 1/(2n^2)"));
        }
        stats.net_gain_checks += 1;
        if config.cross_check {
            bubble.check_state(&next)?;
        }
        state = next;
    }
}
