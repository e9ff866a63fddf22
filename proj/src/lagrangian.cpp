#include "lagdyn/lagrangian.hpp"

#include "lagdyn/errors.hpp"
#include "lagdyn/linalg.hpp"

namespace lagdyn::nets {

using dynamics::DynamicsUpdate;
using dynamics::PhaseState;

LagrangianModel LagrangianModel::create(int m, Rng& rng, int hidden) {
    if (m < 1) throw UsageError("LagrangianModel: m must be >= 1");
    LagrangianModel model;
    model.m = m;
    model.lambda = static_cast<double>(m);
    model.inertia_net = MlpParams::create({m, hidden, hidden, m * m}, rng);
    model.potential_net = MlpParams::create({m, hidden, hidden, 1}, rng);
    return model;
}

dynamics::InertiaMatrix inertia_matrix(const LagrangianModel& model, const Tensor& q) {
    const int m = model.m;
    Tensor j = mlp_forward(model.inertia_net, q).reshaped({m, m});
    Tensor d({m, m});
    // D = J^T J + lambda I
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) {
            double acc = 0.0;
            for (int p = 0; p < m; ++p) acc += j.at(p, i) * j.at(p, k);
            d.at(i, k) = acc + (i == k ? model.lambda : 0.0);
        }
    return d;
}

double potential_energy(const LagrangianModel& model, const Tensor& q) {
    return mlp_forward(model.potential_net, q)[0];
}

Tensor potential_force(const LagrangianModel& model, const Tensor& q) {
    MlpTrace trace = mlp_trace(model.potential_net, q);
    Tensor jac = mlp_input_jacobian(model.potential_net, trace); // (1, m)
    return jac.reshaped({model.m});
}

dynamics::InertiaJacobian inertia_jacobian(const LagrangianModel& model, const Tensor& q) {
    const int m = model.m;
    MlpTrace trace = mlp_trace(model.inertia_net, q);
    Tensor j = trace.out.reshaped({m, m});
    Tensor jac = mlp_input_jacobian(model.inertia_net, trace); // (m*m, m)
    Tensor ddq({m, m, m});
    for (int k = 0; k < m; ++k) {
        // G = dJ/dq_k, unpacked from column k of the network Jacobian
        for (int i = 0; i < m; ++i)
            for (int jcol = 0; jcol < m; ++jcol) {
                double acc = 0.0;
                for (int p = 0; p < m; ++p) {
                    const double gpi = jac.at(p * m + i, k);
                    const double gpj = jac.at(p * m + jcol, k);
                    acc += gpi * j.at(p, jcol) + j.at(p, i) * gpj;
                }
                ddq.at3(i, jcol, k) = acc;
            }
    }
    return ddq;
}

DynamicsUpdate model_dynamics(const LagrangianModel& model, const PhaseState& z,
                              const Tensor& tau) {
    if (z.dof() != model.m) throw UsageError("model_dynamics: state dimension mismatch");
    const Tensor d = inertia_matrix(model, z.q);
    const Tensor ddq = inertia_jacobian(model, z.q);
    const Tensor c = dynamics::coriolis_vector(ddq, z.qdot);
    const Tensor g = potential_force(model, z.q);
    DynamicsUpdate update;
    update.qdot = z.qdot;
    update.qddot = dynamics::forward_dynamics(d, c, g, tau);
    return update;
}

dynamics::DynamicsFn make_dynamics(const LagrangianModel& model) {
    Tensor tau({model.m});
    return [model, tau](const PhaseState& z) { return model_dynamics(model, z, tau); };
}

LagrangianVars insert_params(ad::Graph& g, const LagrangianModel& model) {
    LagrangianVars vars;
    vars.inertia_net = insert_params(g, model.inertia_net);
    vars.potential_net = insert_params(g, model.potential_net);
    return vars;
}

ad::Var inertia_matrix_g(ad::Graph& g, const LagrangianVars& vars, ad::Var q, double lambda) {
    const int m = g.value(q).dim(0);
    MlpEvalVars je = mlp_eval_g(vars.inertia_net, q);
    ad::Var j = ad::reshape(je.out, {m, m});
    return ad::add(ad::matmul(ad::transpose(j), j),
                   g.constant(Tensor::scaled_identity(m, lambda)));
}

ad::Var model_dynamics_g(ad::Graph& g, const LagrangianVars& vars, ad::Var q, ad::Var qdot,
                         double lambda, std::optional<ad::Var> tau) {
    const int m = g.value(q).dim(0);
    MlpEvalVars je = mlp_eval_g(vars.inertia_net, q);
    ad::Var j = ad::reshape(je.out, {m, m});
    ad::Var jt = ad::transpose(j);
    ad::Var d = ad::add(ad::matmul(jt, j), g.constant(Tensor::scaled_identity(m, lambda)));
    ad::Var jjac = mlp_input_jacobian_g(vars.inertia_net, je); // (m*m, m)
    std::vector<ad::Var> slabs;
    slabs.reserve(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) {
        ad::Var gk = ad::reshape(ad::column(jjac, k), {m, m});
        slabs.push_back(ad::add(ad::matmul(ad::transpose(gk), j), ad::matmul(jt, gk)));
    }
    ad::Var ddq = ad::stack_last(slabs);
    ad::Var c = ad::coriolis(ddq, qdot);
    MlpEvalVars ve = mlp_eval_g(vars.potential_net, q);
    ad::Var gvec = ad::reshape(mlp_input_jacobian_g(vars.potential_net, ve), {m});
    ad::Var rhs = tau ? ad::sub(*tau, ad::add(c, gvec)) : ad::neg(ad::add(c, gvec));
    ad::Var qddot = ad::cholesky_solve(d, rhs);
    return ad::concat(qdot, qddot);
}

void collect_params(LagrangianModel& model, std::vector<ParamRef>& out) {
    collect_params(model.inertia_net, "jnet", out);
    collect_params(model.potential_net, "vnet", out);
}

std::vector<ad::Var> param_vars(const LagrangianVars& vars) {
    std::vector<ad::Var> out;
    for (size_t l = 0; l < vars.inertia_net.weights.size(); ++l) {
        out.push_back(vars.inertia_net.weights[l]);
        out.push_back(vars.inertia_net.biases[l]);
    }
    for (size_t l = 0; l < vars.potential_net.weights.size(); ++l) {
        out.push_back(vars.potential_net.weights[l]);
        out.push_back(vars.potential_net.biases[l]);
    }
    return out;
}

std::vector<Tensor> extract_gradients(ad::Graph& g, const std::vector<ad::Var>& leaves,
                                      const std::vector<ParamRef>& refs) {
    if (!refs.empty() && refs.size() != leaves.size())
        throw UsageError("extract_gradients: leaves and refs differ in length");
    std::vector<Tensor> grads;
    grads.reserve(leaves.size());
    for (size_t i = 0; i < leaves.size(); ++i) {
        Tensor grad = g.gradient(leaves[i]);
        if (!grad.all_finite()) {
            const std::string name = refs.empty() ? "#" + std::to_string(i) : refs[i].name;
            throw NumericalError("non-finite gradient in parameter block '" + name + "'");
        }
        grads.push_back(std::move(grad));
    }
    return grads;
}

} // namespace lagdyn::nets
