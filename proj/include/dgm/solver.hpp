#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "dgm/prox.hpp"
#include "dgm/types.hpp"

namespace dgm {

/// Sign convention of the second dual update. `printed` accumulates
/// D - L - S + V; `constraint` flips V's sign to match the split
/// constraint D - L - S = V.
enum class VSign { printed, constraint };

/// Weight refresh rule for the nuclear-norm term: Gaussian-of-singular-value
/// weights, or all-ones (which turns the U-step into classical SVT).
enum class WeightMode { erf, ones };

template <class Scalar = double>
struct SolverConfig {
  Scalar lambda1 = 5.0;    // weighted nuclear norm
  Scalar lambda2 = 0.05;   // foreground l1
  Scalar gamma1 = 0.3;     // spatial graph quadratic
  Scalar gamma2 = 0.3;     // temporal graph quadratic
  Scalar rho1 = 1.0;       // penalty on U = L
  Scalar rho2 = 1.0;       // penalty on D - L - S = V
  Scalar dt = 0.3;         // gradient step for the L subproblem
  Scalar beta = 1.0;       // lambda2 decay factor, >= 1
  Scalar lambda2_floor = 1e-6;
  std::optional<Scalar> erf_sigma;  // weight scale; empty = mean singular value
  Scalar tol = 1e-4;
  int t_out = 100;
  int t_in = 20;
  int decay_period = 5;
  VSign v_sign = VSign::printed;
  WeightMode weight_mode = WeightMode::erf;
};

template <class Scalar>
void validate(const SolverConfig<Scalar>& config) {
  auto positive = [](Scalar v, const char* name) {
    if (!(v > Scalar(0))) {
      throw std::invalid_argument(std::string(name) + " must be positive");
    }
  };
  positive(config.lambda1, "lambda1");
  positive(config.lambda2, "lambda2");
  positive(config.rho1, "rho1");
  positive(config.rho2, "rho2");
  positive(config.dt, "dt");
  positive(config.lambda2_floor, "lambda2_floor");
  positive(config.tol, "tol");
  // gamma1/gamma2 = 0 is the plain RPCA configuration, so only signs are
  // checked for the graph terms.
  if (config.gamma1 < Scalar(0) || config.gamma2 < Scalar(0)) {
    throw std::invalid_argument("gamma1/gamma2 must be nonnegative");
  }
  if (!(config.beta >= Scalar(1))) {
    throw std::invalid_argument("beta must be >= 1");
  }
  if (config.erf_sigma && !(*config.erf_sigma > Scalar(0))) {
    throw std::invalid_argument("erf_sigma must be positive");
  }
  if (config.t_out < 1 || config.t_in < 1) {
    throw std::invalid_argument("t_out and t_in must be >= 1");
  }
  if (config.decay_period < 1) {
    throw std::invalid_argument("decay_period must be >= 1");
  }
}

template <class Scalar = double>
struct SolverState {
  MatrixX<Scalar> L, S, U, V;
  MatrixX<Scalar> U_dual, V_dual;  // multipliers for U = L and D - L - S = V
  VectorX<Scalar> weights;
  int outer_iterations = 0;
  std::vector<Scalar> rel_change_L, rel_change_S;
  std::vector<Scalar> residual_U;  // ||U - L||_F per outer iteration
  std::vector<Scalar> residual_V;  // ||D - L - S + V||_F per outer iteration
};

template <class Scalar = double>
struct SeparationResult {
  MatrixX<Scalar> background;  // L
  MatrixX<Scalar> foreground;  // S
  int iterations = 0;
  bool converged = false;
  Scalar final_rel_change_L = 0;
  Scalar final_rel_change_S = 0;
  Scalar wall_seconds = 0;
  SolverState<Scalar> state;  // full iterate set and histories
};

template <class Scalar>
SolverState<Scalar> make_initial_state(const MatrixX<Scalar>& data) {
  SolverState<Scalar> state;
  state.L = data;
  state.S = MatrixX<Scalar>::Zero(data.rows(), data.cols());
  state.U = state.L;
  state.V = MatrixX<Scalar>::Zero(data.rows(), data.cols());
  state.U_dual = MatrixX<Scalar>::Zero(data.rows(), data.cols());
  state.V_dual = MatrixX<Scalar>::Zero(data.rows(), data.cols());
  state.weights = VectorX<Scalar>::Ones(std::min(data.rows(), data.cols()));
  return state;
}

/// Full model value:
/// ||D-L-S||_1 + lambda1 ||L||_{W,*} + lambda2 ||S||_1
///   + gamma1/2 tr(L' Phi_s L) + gamma2/2 tr(L Phi_t L').
template <class Scalar>
Scalar objective(const MatrixX<Scalar>& data, const MatrixX<Scalar>& L,
                 const MatrixX<Scalar>& S, const VectorX<Scalar>& weights,
                 const SolverConfig<Scalar>& config,
                 const SparseMatrixX<Scalar>& phi_s,
                 const SparseMatrixX<Scalar>& phi_t) {
  if (L.rows() != data.rows() || L.cols() != data.cols() ||
      S.rows() != data.rows() || S.cols() != data.cols()) {
    throw std::invalid_argument("objective: shape mismatch");
  }
  const Scalar fidelity = (data - L - S).template lpNorm<1>();
  const Scalar nuclear = weighted_nuclear_norm(L, weights);
  const Scalar sparsity = S.template lpNorm<1>();
  const Scalar spatial = (L.transpose() * (phi_s * L)).trace();
  const Scalar temporal = (L * (phi_t * L.transpose())).trace();
  return fidelity + config.lambda1 * nuclear + config.lambda2 * sparsity +
         config.gamma1 / Scalar(2) * spatial + config.gamma2 / Scalar(2) * temporal;
}

/// Gradient of the smooth augmented-Lagrangian part in L:
/// gamma1 Phi_s L + gamma2 L Phi_t + rho1 (L - U - U~) + rho2 (L + S - D + V - V~).
template <class Scalar>
MatrixX<Scalar> gradient_L(const SolverState<Scalar>& state,
                           const MatrixX<Scalar>& data,
                           const SolverConfig<Scalar>& config,
                           const SparseMatrixX<Scalar>& phi_s,
                           const SparseMatrixX<Scalar>& phi_t) {
  if (phi_s.rows() != data.rows() || phi_t.rows() != data.cols()) {
    throw std::invalid_argument("gradient_L: Laplacian shape mismatch");
  }
  MatrixX<Scalar> grad = config.rho1 * (state.L - state.U - state.U_dual);
  grad.noalias() += config.rho2 * (state.L + state.S - data + state.V - state.V_dual);
  if (config.gamma1 != Scalar(0)) grad.noalias() += config.gamma1 * (phi_s * state.L);
  if (config.gamma2 != Scalar(0)) grad.noalias() += config.gamma2 * (state.L * phi_t);
  return grad;
}

/// t_in fixed-step gradient descent sweeps on the L subproblem.
template <class Scalar>
void step_L(SolverState<Scalar>& state, const MatrixX<Scalar>& data,
            const SolverConfig<Scalar>& config, const SparseMatrixX<Scalar>& phi_s,
            const SparseMatrixX<Scalar>& phi_t) {
  for (int j = 0; j < config.t_in; ++j) {
    state.L -= config.dt * gradient_L(state, data, config, phi_s, phi_t);
  }
  if (!state.L.allFinite()) {
    throw std::runtime_error(
        "step_L: L diverged to non-finite values; reduce the step size dt");
  }
}

/// Closed-form S update: shrink(D - L - V + V~, lambda2 / rho2).
template <class Scalar>
void step_S(SolverState<Scalar>& state, const MatrixX<Scalar>& data,
            const SolverConfig<Scalar>& config) {
  state.S = shrink(MatrixX<Scalar>(data - state.L - state.V + state.V_dual),
                   config.lambda2 / config.rho2);
}

/// Weighted SVT on L - U~ followed by the weight refresh from the same
/// singular values (one SVD serves both).
template <class Scalar>
void step_U(SolverState<Scalar>& state, const SolverConfig<Scalar>& config) {
  const MatrixX<Scalar> l_hat = state.L - state.U_dual;
  if (!l_hat.allFinite()) {
    throw std::runtime_error("step_U: non-finite iterate");
  }
  const SvdTriple<Scalar> svd = thin_svd(l_hat);
  const Scalar tau = config.lambda1 / config.rho1;
  const VectorX<Scalar> thresholded =
      (svd.values.array() - state.weights.array() * tau).cwiseMax(Scalar(0)).matrix();
  state.U = svd.left * thresholded.asDiagonal() * svd.right;

  if (config.weight_mode == WeightMode::ones) {
    state.weights.setOnes();
    return;
  }
  Scalar scale = config.erf_sigma ? *config.erf_sigma : svd.values.mean();
  if (scale > Scalar(0)) {
    state.weights = erf_weights(svd.values, scale);
  } else {
    state.weights.setOnes();  // all-zero spectrum; exp(-0) either way
  }
}

/// Closed-form V update: shrink(D - L - S + V~, 1 / rho2).
template <class Scalar>
void step_V(SolverState<Scalar>& state, const MatrixX<Scalar>& data,
            const SolverConfig<Scalar>& config) {
  state.V = shrink(MatrixX<Scalar>(data - state.L - state.S + state.V_dual),
                   Scalar(1) / config.rho2);
}

/// Dual ascent, sign conventions per `config.v_sign`.
template <class Scalar>
void step_duals(SolverState<Scalar>& state, const MatrixX<Scalar>& data,
                const SolverConfig<Scalar>& config) {
  state.U_dual += state.U - state.L;
  if (config.v_sign == VSign::printed) {
    state.V_dual += data - state.L - state.S + state.V;
  } else {
    state.V_dual += data - state.L - state.S - state.V;
  }
}

/// lambda2 after the decay schedule is applied at iteration `outer_iteration`:
/// divided by beta every decay_period iterations, never below the floor.
template <class Scalar>
Scalar decay_lambda2(const SolverConfig<Scalar>& config, Scalar current_lambda2,
                     int outer_iteration) {
  if (!(config.beta >= Scalar(1))) {
    throw std::invalid_argument("decay_lambda2: beta must be >= 1");
  }
  if (outer_iteration % config.decay_period != 0) return current_lambda2;
  return std::max(current_lambda2 / config.beta, config.lambda2_floor);
}

namespace detail {

template <class Scalar>
Scalar relative_change(const MatrixX<Scalar>& current, const MatrixX<Scalar>& previous) {
  const Scalar diff = (current - previous).norm();
  const Scalar base = previous.norm();
  return base == Scalar(0) ? diff : diff / base;  // absolute change at zero norm
}

}  // namespace detail

/// Run the full ADMM loop. Laplacians must match the data dimensions
/// (phi_s: pixels x pixels, phi_t: frames x frames). When `progress` is set,
/// one key=value line per outer iteration is written to it.
template <class Scalar>
SeparationResult<Scalar> solve(const MatrixX<Scalar>& data,
                               const SparseMatrixX<Scalar>& phi_s,
                               const SparseMatrixX<Scalar>& phi_t,
                               SolverConfig<Scalar> config,
                               std::ostream* progress = nullptr) {
  validate(config);
  if (phi_s.rows() != phi_s.cols() || phi_s.rows() != data.rows()) {
    throw std::invalid_argument("solve: spatial Laplacian does not match pixel count");
  }
  if (phi_t.rows() != phi_t.cols() || phi_t.rows() != data.cols()) {
    throw std::invalid_argument("solve: temporal Laplacian does not match frame count");
  }
  if (!data.allFinite()) {
    throw std::invalid_argument("solve: data has non-finite entries");
  }

  const auto start = std::chrono::steady_clock::now();
  SolverState<Scalar> state = make_initial_state(data);
  MatrixX<Scalar> previous_L = state.L;
  MatrixX<Scalar> previous_S = state.S;

  SeparationResult<Scalar> result;
  for (int iter = 1; iter <= config.t_out; ++iter) {
    step_L(state, data, config, phi_s, phi_t);
    step_S(state, data, config);
    step_U(state, config);
    step_V(state, data, config);
    step_duals(state, data, config);
    if (!state.S.allFinite() || !state.U.allFinite() || !state.V.allFinite()) {
      throw std::runtime_error("solve: non-finite iterates");
    }

    state.outer_iterations = iter;
    const Scalar rel_l = detail::relative_change(state.L, previous_L);
    const Scalar rel_s = detail::relative_change(state.S, previous_S);
    state.rel_change_L.push_back(rel_l);
    state.rel_change_S.push_back(rel_s);
    state.residual_U.push_back((state.U - state.L).norm());
    state.residual_V.push_back((data - state.L - state.S + state.V).norm());

    if (progress) {
      (*progress) << "iter=" << iter << " objective="
                  << objective(data, state.L, state.S, state.weights, config,
                               phi_s, phi_t)
                  << " rel_change_L=" << rel_l << " rel_change_S=" << rel_s
                  << " lambda2=" << config.lambda2 << '\n';
    }

    result.final_rel_change_L = rel_l;
    result.final_rel_change_S = rel_s;
    // Both criteria must hold; never stop on the very first iteration.
    if (iter >= 2 && rel_l < config.tol && rel_s < config.tol) {
      result.converged = true;
      break;
    }
    previous_L = state.L;
    previous_S = state.S;
    config.lambda2 = decay_lambda2(config, config.lambda2, iter);
  }

  result.iterations = state.outer_iterations;
  result.background = state.L;
  result.foreground = state.S;
  result.wall_seconds = std::chrono::duration<Scalar>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  result.state = std::move(state);
  return result;
}

}  // namespace dgm
