#pragma once

#include <optional>
#include <vector>

#include "lagdyn/autodiff.hpp"
#include "lagdyn/dynamics.hpp"
#include "lagdyn/mlp.hpp"
#include "lagdyn/rng.hpp"

namespace lagdyn::nets {

/// Learned Lagrangian: an inertia-factor network J (q -> m*m, reshaped
/// row-major) and a scalar potential network V (q -> 1). The inertia matrix
/// is J^T J + lambda I, which keeps it positive definite with smallest
/// eigenvalue at least lambda.
struct LagrangianModel {
    MlpParams inertia_net;
    MlpParams potential_net;
    double lambda = 1.0;
    int m = 1;

    /// Three-layer tanh networks; hidden defaults to the reference width.
    /// lambda is fixed to m, the dimension of the position vector.
    static LagrangianModel create(int m, Rng& rng, int hidden = 200);
};

dynamics::InertiaMatrix inertia_matrix(const LagrangianModel& model, const Tensor& q);
double potential_energy(const LagrangianModel& model, const Tensor& q);
/// Exact gradient of the potential network at q (analytic backward pass).
Tensor potential_force(const LagrangianModel& model, const Tensor& q);
/// Exact derivative tensor [i][j][k] = dD_ij/dq_k.
dynamics::InertiaJacobian inertia_jacobian(const LagrangianModel& model, const Tensor& q);

/// Assembles the full Euler-Lagrange update: (qdot, -D^{-1}(C + g - tau)).
dynamics::DynamicsUpdate model_dynamics(const LagrangianModel& model,
                                        const dynamics::PhaseState& z, const Tensor& tau);

/// Dynamics closure with tau = 0, for rollouts and evaluation.
dynamics::DynamicsFn make_dynamics(const LagrangianModel& model);

// ---- graph-side ----

struct LagrangianVars {
    MlpVars inertia_net;
    MlpVars potential_net;
};

LagrangianVars insert_params(ad::Graph& g, const LagrangianModel& model);

/// Inertia matrix on the tape; exposed separately for property tests.
ad::Var inertia_matrix_g(ad::Graph& g, const LagrangianVars& vars, ad::Var q, double lambda);

/// Full dynamical update (2m vector: qdot then qddot) on the tape.
/// tau, when absent, is zero.
ad::Var model_dynamics_g(ad::Graph& g, const LagrangianVars& vars, ad::Var q, ad::Var qdot,
                         double lambda, std::optional<ad::Var> tau = std::nullopt);

void collect_params(LagrangianModel& model, std::vector<ParamRef>& out);

/// Graph leaves of a model in collect_params order.
std::vector<ad::Var> param_vars(const LagrangianVars& vars);

/// Read gradients for named leaves after backward(); throws NumericalError
/// naming the first block with a non-finite entry.
std::vector<Tensor> extract_gradients(ad::Graph& g, const std::vector<ad::Var>& leaves,
                                      const std::vector<ParamRef>& refs);

} // namespace lagdyn::nets
