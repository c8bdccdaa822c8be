//! Alternating-direction solver for
//!
//! ```text
//! min ||Z - XY - E||_F^2 + lambda ||E||
//! s.t. X^T X = I, Y = V, V >= 0, ||v_i||_0 <= d0
//! ```
//!
//! Each iteration minimizes the augmented Lagrangian
//! `||Z - XY - E||^2 + lambda ||E|| + <P, Y - V> + beta/2 ||Y - V||^2`
//! over `X`, `Y`, `E`, `V` in that order, then takes a multiplier step on `P`
//! and grows the step size `mu` geometrically up to `mu_max`.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Mfc0Error, Result};
use crate::linalg::{all_finite, l1_norm, l21_norm, max_abs, random_orthonormal};
use crate::operators::{procrustes, prox_l1, prox_l21, prox_nonneg_l0_columns};
use crate::problem::{ErrorNorm, FactorState, FitResult, Objective, Problem, SolverConfig, YUpdateRule};

/// Random orthonormal basis, zero `E`, `V`, `P`, and `Y = X^T Z` when warm
/// starting. The basis draw depends only on `seed`.
pub fn init_state(problem: &Problem, seed: u64) -> FactorState {
    let z = problem.z();
    let cfg = problem.config();
    let (m, n) = z.shape();
    let d = problem.spec().d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_orthonormal(m, d, &mut rng);
    let y = if cfg.warm_start { x.transpose() * z } else { DMatrix::zeros(d, n) };
    FactorState {
        x,
        y,
        v: DMatrix::zeros(d, n),
        e: DMatrix::zeros(m, n),
        p: DMatrix::zeros(d, n),
        mu: cfg.mu0,
        beta: cfg.beta_for(cfg.mu0),
    }
}

/// Basis step: orthogonal Procrustes on `(Z - E)` and `Y`. The flag reports
/// a non-unique minimizer.
pub fn update_x(state: &FactorState, z: &DMatrix<f64>) -> Result<(DMatrix<f64>, bool)> {
    let sol = procrustes(&(z - &state.e), &state.y)?;
    Ok((sol.d, sol.rank_deficient))
}

/// Representation step. Assumes `X^T X = I`.
pub fn update_y(state: &FactorState, z: &DMatrix<f64>, rule: YUpdateRule) -> DMatrix<f64> {
    let proj = state.x.transpose() * (z - &state.e);
    let beta = state.beta;
    let (data_weight, denom) = match rule {
        YUpdateRule::ExactStationarity => (2.0, 2.0 + beta),
        YUpdateRule::PaperLiteral => (1.0, 1.0 + beta),
    };
    let mut y = proj * data_weight;
    y += &state.v * beta;
    y -= &state.p;
    y / denom
}

/// Error step: proximal map of `lambda ||E||` at `G = Z - XY` with threshold `lambda / 2`.
pub fn update_e(state: &FactorState, z: &DMatrix<f64>, cfg: &SolverConfig) -> DMatrix<f64> {
    match cfg.error_norm {
        ErrorNorm::None => DMatrix::zeros(z.nrows(), z.ncols()),
        norm => {
            let g = z - &state.x * &state.y;
            let tau = cfg.lambda / 2.0;
            if norm == ErrorNorm::L1 {
                prox_l1(&g, tau)
            } else {
                prox_l21(&g, tau)
            }
        }
    }
}

/// Sparse nonnegative step: column-wise projection of `Y + P / beta`.
pub fn update_v(state: &FactorState, d0: usize) -> DMatrix<f64> {
    let u = &state.y + &state.p / state.beta;
    prox_nonneg_l0_columns(&u, d0)
}

/// Multiplier step `P += mu (Y - V)`, then `mu = min(rho mu, mu_max)`.
/// Returns the new `(P, mu, beta)`.
pub fn update_p(state: &FactorState, cfg: &SolverConfig) -> (DMatrix<f64>, f64, f64) {
    let p = &state.p + (&state.y - &state.v) * state.mu;
    let mu = (cfg.rho * state.mu).min(cfg.mu_max);
    let beta = cfg.beta_for(mu);
    (p, mu, beta)
}

/// `lambda ||E||` for the configured norm.
pub fn regularizer(e: &DMatrix<f64>, cfg: &SolverConfig) -> f64 {
    match cfg.error_norm {
        ErrorNorm::L1 => cfg.lambda * l1_norm(e),
        ErrorNorm::L21 => cfg.lambda * l21_norm(e),
        ErrorNorm::None => 0.0,
    }
}

/// Model objective at the current iterate.
pub fn objective(state: &FactorState, z: &DMatrix<f64>, cfg: &SolverConfig) -> Objective {
    let residual = z - &state.x * &state.y - &state.e;
    Objective::new(residual.norm_squared(), regularizer(&state.e, cfg))
}

/// Augmented Lagrangian value at the current iterate.
pub fn augmented_lagrangian(state: &FactorState, z: &DMatrix<f64>, cfg: &SolverConfig) -> f64 {
    let gap = &state.y - &state.v;
    objective(state, z, cfg).total + state.p.dot(&gap) + 0.5 * state.beta * gap.norm_squared()
}

/// Runs one full `X -> Y -> E -> V -> P` cycle in place. Returns whether the
/// basis step was rank deficient.
pub fn step(state: &mut FactorState, z: &DMatrix<f64>, cfg: &SolverConfig, d0: usize) -> Result<bool> {
    let (x, rank_deficient) = update_x(state, z)?;
    state.x = x;
    state.y = update_y(state, z, cfg.y_update_rule);
    state.e = update_e(state, z, cfg);
    state.v = update_v(state, d0);
    let (p, mu, beta) = update_p(state, cfg);
    state.p = p;
    state.mu = mu;
    state.beta = beta;
    Ok(rank_deficient)
}

fn first_non_finite(state: &FactorState) -> Option<&'static str> {
    [
        ("X", &state.x),
        ("Y", &state.y),
        ("E", &state.e),
        ("V", &state.v),
        ("P", &state.p),
    ]
    .into_iter()
    .find(|(_, m)| !all_finite(m))
    .map(|(name, _)| name)
}

/// Runs the solver from a fresh initialization until
/// `||Z - XY||_inf <= eps` or `||Y - V||_inf <= eps` (checked from the second
/// iteration on) or until `max_iters`.
pub fn fit(problem: &Problem) -> Result<FitResult> {
    let state = init_state(problem, problem.config().seed);
    fit_from(problem, state)
}

/// Same as [`fit`] from a caller-supplied starting state.
pub fn fit_from(problem: &Problem, mut state: FactorState) -> Result<FitResult> {
    let started = Instant::now();
    let z = problem.z();
    let cfg = problem.config();
    let d0 = problem.spec().d0;

    let mut trace = Vec::new();
    let mut converged = false;
    let mut rank_deficient_updates = 0;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        let rank_deficient = match step(&mut state, z, cfg, d0) {
            Ok(flag) => flag,
            Err(Mfc0Error::SvdFailed) => {
                return Err(Mfc0Error::NonFinite {
                    matrix: "(Z - E) Y^T",
                    iteration: iterations,
                    trace: trace.iter().map(|o: &Objective| o.total).collect(),
                })
            }
            Err(other) => return Err(other),
        };
        if rank_deficient {
            rank_deficient_updates += 1;
        }
        if let Some(matrix) = first_non_finite(&state) {
            return Err(Mfc0Error::NonFinite {
                matrix,
                iteration: iterations,
                trace: trace.iter().map(|o| o.total).collect(),
            });
        }

        let reconstruction = &state.x * &state.y;
        let fit_residual = z - &reconstruction;
        let fit_term = (&fit_residual - &state.e).norm_squared();
        trace.push(Objective::new(fit_term, regularizer(&state.e, cfg)));

        if iterations >= 2 {
            let data_gap = max_abs(&fit_residual);
            let split_gap = max_abs(&(&state.y - &state.v));
            if data_gap <= cfg.epsilon || split_gap <= cfg.epsilon {
                converged = true;
                break;
            }
        }
    }

    Ok(FitResult {
        x: state.x,
        y: state.y,
        v: state.v,
        e: state.e,
        objective_trace: trace,
        iterations,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        converged,
        rank_deficient_updates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_gram_deviation;
    use crate::problem::{validate_problem, BetaPolicy, SubspaceSpec};
    use rand_distr::{Distribution, StandardNormal, Uniform};

    fn uniform(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let u = Uniform::new(0.0, 1.0).unwrap();
        DMatrix::from_fn(rows, cols, |_, _| u.sample(rng))
    }

    fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    fn small_problem(cfg: SolverConfig) -> Problem {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        validate_problem(uniform(8, 12, &mut rng), SubspaceSpec { k: 2, d0: 2 }, cfg).unwrap()
    }

    /// Exact factorization with block-diagonal nonnegative codes on
    /// mutually orthogonal coordinate blocks.
    fn exact_block_data() -> (DMatrix<f64>, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (m, k, d0, per) = (12, 2, 2, 15);
        let mut x_true = DMatrix::zeros(m, k * d0);
        for j in 0..k * d0 {
            let rows = [3 * j, 3 * j + 1, 3 * j + 2];
            let w: Vec<f64> = rows.iter().map(|_| 0.2 + Uniform::new(0.0, 1.0).unwrap().sample(&mut rng)).collect();
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (r, wv) in rows.iter().zip(w) {
                x_true[(*r, j)] = wv / norm;
            }
        }
        let mut y_true = DMatrix::zeros(k * d0, k * per);
        for c in 0..k * per {
            let block = c / per;
            for r in 0..d0 {
                y_true[(block * d0 + r, c)] = 0.1 + Uniform::new(0.0, 1.0).unwrap().sample(&mut rng);
            }
        }
        (x_true, y_true)
    }

    #[test]
    fn initialization_is_seeded_and_orthonormal() {
        let p = small_problem(SolverConfig::default());
        let a = init_state(&p, 7);
        let b = init_state(&p, 7);
        assert_eq!(a.x, b.x);
        assert!(max_abs_gram_deviation(&a.x) <= 1e-10);
        assert_eq!(a.y, a.x.transpose() * p.z());
        assert_eq!(a.mu, 1e-3);
        assert_eq!(a.beta, 1e-3);
        assert!(a.v.iter().chain(a.e.iter()).chain(a.p.iter()).all(|&v| v == 0.0));
        let cold = small_problem(SolverConfig { warm_start: false, ..Default::default() });
        assert!(init_state(&cold, 7).y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn initial_basis_has_expected_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = validate_problem(uniform(100, 500, &mut rng), SubspaceSpec { k: 5, d0: 10 }, SolverConfig::default())
            .unwrap();
        assert_eq!(init_state(&p, 0).x.shape(), (100, 50));
    }

    #[test]
    fn basis_step_with_identity_codes_is_polar_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = uniform(4, 4, &mut rng);
        let p = validate_problem(z.clone(), SubspaceSpec { k: 4, d0: 1 }, SolverConfig::default()).unwrap();
        let mut state = init_state(&p, 0);
        state.y = DMatrix::identity(4, 4);
        let (x, _) = update_x(&state, &z).unwrap();
        // polar factor U V^T of Z from its own SVD
        let svd = z.clone().svd(true, true);
        let polar = svd.u.unwrap() * svd.v_t.unwrap();
        assert!((x - polar).amax() < 1e-10);
    }

    #[test]
    fn basis_step_recovers_column_space_of_exact_factorization() {
        let (x_true, y_true) = exact_block_data();
        let z = &x_true * &y_true;
        let p = validate_problem(z.clone(), SubspaceSpec { k: 2, d0: 2 }, SolverConfig::default()).unwrap();
        let mut state = init_state(&p, 3);
        state.y = y_true.clone();
        let (x, _) = update_x(&state, &z).unwrap();
        let proj_true = &x_true * x_true.transpose();
        let proj = &x * x.transpose();
        assert!((proj - proj_true).amax() <= 1e-8);
    }

    #[test]
    fn basis_step_never_increases_fit() {
        let p = small_problem(SolverConfig::default());
        let z = p.z();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut state = init_state(&p, 1);
        state.y = gaussian(4, 12, &mut rng);
        let before = (z - &state.x * &state.y).norm_squared();
        state.x = update_x(&state, z).unwrap().0;
        assert!((z - &state.x * &state.y).norm_squared() <= before + 1e-10);
    }

    #[test]
    fn large_penalty_pins_codes_to_split_variable() {
        let p = small_problem(SolverConfig::default());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut state = init_state(&p, 0);
        state.v = uniform(4, 12, &mut rng);
        state.p = gaussian(4, 12, &mut rng);
        state.beta = 1e9;
        let y = update_y(&state, p.z(), YUpdateRule::ExactStationarity);
        assert!((y - &state.v).amax() <= 1e-6);
    }

    #[test]
    fn exact_rule_zeroes_subproblem_gradient() {
        let p = small_problem(SolverConfig::default());
        let z = p.z();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut state = init_state(&p, 0);
        state.e = gaussian(8, 12, &mut rng) * 0.1;
        state.v = uniform(4, 12, &mut rng);
        state.p = gaussian(4, 12, &mut rng);
        state.beta = 0.37;
        let y = update_y(&state, z, YUpdateRule::ExactStationarity);
        // d/dY [ ||Z - XY - E||^2 + <P, Y - V> + beta/2 ||Y - V||^2 ]
        let grad = -2.0 * state.x.transpose() * (z - &state.x * &y - &state.e) + &state.p + (&y - &state.v) * state.beta;
        assert!(max_abs(&grad) <= 1e-8);
    }

    #[test]
    fn unconstrained_codes_are_projections() {
        let p = small_problem(SolverConfig::default());
        let mut state = init_state(&p, 0);
        state.beta = 0.0;
        let y = update_y(&state, p.z(), YUpdateRule::ExactStationarity);
        assert!((y - state.x.transpose() * p.z()).amax() < 1e-12);
        let y_paper = update_y(&state, p.z(), YUpdateRule::PaperLiteral);
        assert!((y_paper - state.x.transpose() * p.z()).amax() < 1e-12);
    }

    #[test]
    fn error_step_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let p = small_problem(SolverConfig::default());
        let z = p.z();
        let mut state = init_state(&p, 0);
        state.y = gaussian(4, 12, &mut rng);
        let g = z - &state.x * &state.y;
        let max_col = g.column_iter().map(|c| c.norm()).fold(0.0, f64::max);

        let cfg = SolverConfig { lambda: 2.0 * max_col, error_norm: ErrorNorm::L21, ..Default::default() };
        assert!(update_e(&state, z, &cfg).iter().all(|&v| v == 0.0));

        let cfg = SolverConfig { lambda: 1e-12, error_norm: ErrorNorm::L1, ..Default::default() };
        assert!((update_e(&state, z, &cfg) - &g).amax() <= 1e-12);

        let cfg = SolverConfig { lambda: 1.0, error_norm: ErrorNorm::L21, ..Default::default() };
        let e = update_e(&state, z, &cfg);
        for (ec, gc) in e.column_iter().zip(g.column_iter()) {
            let norm = gc.norm();
            let expected = if norm >= 0.5 { gc * (1.0 - 0.5 / norm) } else { gc * 0.0 };
            assert!((ec - expected).amax() < 1e-12);
        }

        let cfg = SolverConfig { error_norm: ErrorNorm::None, ..Default::default() };
        assert!(update_e(&state, z, &cfg).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn split_step_is_fixed_point_on_feasible_codes() {
        let p = small_problem(SolverConfig::default());
        let mut state = init_state(&p, 0);
        let mut y = DMatrix::zeros(4, 12);
        for c in 0..12 {
            y[(c % 4, c)] = 1.0 + c as f64;
            y[((c + 1) % 4, c)] = 0.5;
        }
        state.y = y.clone();
        state.p = DMatrix::zeros(4, 12);
        assert_eq!(update_v(&state, 2), y);
    }

    #[test]
    fn split_step_output_is_sparse_and_nonnegative() {
        let p = small_problem(SolverConfig::default());
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut state = init_state(&p, 0);
        state.y = gaussian(4, 12, &mut rng);
        state.p = gaussian(4, 12, &mut rng);
        state.beta = 0.3;
        let v = update_v(&state, 2);
        for col in v.column_iter() {
            assert!(col.iter().all(|&x| x >= 0.0));
            assert!(col.iter().filter(|&&x| x != 0.0).count() <= 2);
        }
    }

    #[test]
    fn multiplier_step_examples() {
        let cfg = SolverConfig::default();
        let p = small_problem(cfg.clone());
        let mut state = init_state(&p, 0);
        state.v = state.y.clone();
        state.p = DMatrix::from_element(4, 12, 0.25);
        let (pn, _, _) = update_p(&state, &cfg);
        assert_eq!(pn, state.p);

        state.mu = cfg.mu_max;
        assert_eq!(update_p(&state, &cfg).1, cfg.mu_max);

        state.mu = 1e-3;
        for _ in 0..3 {
            let (_, mu, beta) = update_p(&state, &cfg);
            state.mu = mu;
            assert_eq!(beta, mu);
        }
        assert!((state.mu - 1.728e-3).abs() < 1e-15);

        let fixed = SolverConfig { beta_policy: BetaPolicy::Fixed(2.0), ..Default::default() };
        assert_eq!(update_p(&state, &fixed).2, 2.0);
    }

    #[test]
    fn exact_data_converges_to_near_zero_fit() {
        let (x_true, y_true) = exact_block_data();
        let z = &x_true * &y_true;
        let cfg = SolverConfig { rho: 1.02, ..Default::default() };
        let p = validate_problem(z.clone(), SubspaceSpec { k: 2, d0: 2 }, cfg).unwrap();
        let result = fit(&p).unwrap();
        assert!(result.converged);
        let rel = (&z - &result.x * &result.y).norm() / z.norm();
        assert!(rel <= 1e-3, "relative fit error {rel}");
    }

    #[test]
    fn iteration_cap_is_respected() {
        let cfg = SolverConfig { max_iters: 1, ..Default::default() };
        let result = fit(&small_problem(cfg)).unwrap();
        assert_eq!(result.iterations, 1);
        assert_eq!(result.objective_trace.len(), 1);
        assert!(!result.converged);
    }

    #[test]
    fn invariants_hold_after_every_iteration() {
        let cfg = SolverConfig { error_norm: ErrorNorm::L1, lambda: 0.3, ..Default::default() };
        let p = small_problem(cfg.clone());
        let mut state = init_state(&p, 5);
        for _ in 0..30 {
            step(&mut state, p.z(), &cfg, 2).unwrap();
            assert!(max_abs_gram_deviation(&state.x) <= 1e-8);
            for col in state.v.column_iter() {
                assert!(col.iter().all(|&x| x >= 0.0));
                assert!(col.iter().filter(|&&x| x != 0.0).count() <= 2);
            }
        }
    }

    #[test]
    fn non_finite_state_aborts_with_trace() {
        let p = small_problem(SolverConfig::default());
        let mut state = init_state(&p, 0);
        state.p[(0, 0)] = f64::NAN;
        let err = fit_from(&p, state).unwrap_err();
        assert!(matches!(err, Mfc0Error::NonFinite { .. }), "{err:?}");
    }

    #[test]
    fn trace_length_matches_iterations() {
        let result = fit(&small_problem(SolverConfig::default())).unwrap();
        assert_eq!(result.objective_trace.len(), result.iterations);
        assert!(result.iterations <= 1000);
        for o in &result.objective_trace {
            assert!(o.fit_term >= 0.0 && o.reg_term >= 0.0);
            assert_eq!(o.total, o.fit_term + o.reg_term);
        }
    }
}
