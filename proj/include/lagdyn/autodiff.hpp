#pragma once

#include <functional>
#include <vector>

#include "lagdyn/tensor.hpp"

namespace lagdyn::ad {

class Graph;

/// Handle to a node in a Graph. Cheap to copy; valid while the graph lives.
struct Var {
    Graph* graph = nullptr;
    int id = -1;
};

/// Reverse-mode tape over Tensors.
///
/// The graph is built forward by the op functions below; node creation order
/// is a topological order, so backward() is a single reverse sweep. Gradients
/// are accumulated only into nodes reachable from the root, and constants
/// opt out entirely. All kernels have a fixed reduction order, which makes
/// repeated evaluations bit-identical.
class Graph {
public:
    struct Node {
        Tensor value;
        Tensor grad;
        bool touched = false;
        bool no_grad = false;
        std::function<void(Graph&)> backward;
    };

    /// Leaf with gradient tracking (parameters, rollout inputs).
    Var leaf(Tensor value);

    /// Leaf without gradient tracking (data, fixed matrices).
    Var constant(Tensor value);

    Var make_node(Tensor value, std::function<void(Graph&)> backward);

    const Tensor& value(Var v) const { return nodes_[static_cast<size_t>(v.id)].value; }
    /// Gradient of the last backward() root w.r.t. this node; zeros if untouched.
    Tensor gradient(Var v) const;

    /// Seed d(root)/d(root) = 1 and sweep. Root must be scalar (1 element).
    void backward(Var root);

    /// Grad buffer for accumulation, nullptr if the node does not track grads.
    Tensor* grad_for(int id);

    Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
    const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
    int size() const { return static_cast<int>(nodes_.size()); }

    void reserve(size_t n) { nodes_.reserve(n); }
    void clear() { nodes_.clear(); }

private:
    std::vector<Node> nodes_;
};

// ---- elementwise and arithmetic ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b); // hadamard
Var neg(Var a);
Var scale(Var a, double c);
/// alpha * a + beta, elementwise
Var affine(Var a, double alpha, double beta);
Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);

// ---- linear algebra ----
Var matmul(Var a, Var b);    // (r,k) x (k,c)
Var matvec(Var a, Var x);    // (r,k) x (k)
Var transpose(Var a);        // (r,k) -> (k,r)
Var row_scale(Var a, Var s); // out[i,:] = a[i,:] * s[i]
/// y[n,:] = x[n,:] * W^T + b, with x (n,k), W (o,k), b (o)
Var linear(Var x, Var w, Var b);
/// Solve A x = rhs for SPD A via Cholesky; grads flow into A and rhs.
Var cholesky_solve(Var a, Var rhs);

// ---- reductions ----
Var sum(Var a);     // scalar
Var sum_sq(Var a);  // scalar, sum of squares
Var sum_abs(Var a); // scalar, sum of absolute values
Var dot(Var a, Var b);

// ---- shape ----
Var reshape(Var a, std::vector<int> shape);
Var slice(Var a, int offset, int len);       // 1-D window on flattened data
Var concat(Var a, Var b);                    // 1-D
Var slice_rows(Var a, int row, int n);       // block on dim 0
Var stack_rows(const std::vector<Var>& xs);  // k vectors (n) -> (k, n)
Var column(Var a, int k);                    // (r,c) -> (r)
/// K matrices (m,m) -> (m,m,K); slabs[k] lands in [.,.,k]
Var stack_last(const std::vector<Var>& slabs);

// ---- dynamics-specific ----
/// C[k] = sum_ij (dD[k,j,i] - 0.5 dD[i,j,k]) qdot_i qdot_j
/// with dD the (m,m,m) tensor dD[i][j][k] = dD_ij/dq_k.
Var coriolis(Var ddq, Var qdot);

// ---- convolution (NCHW) ----
Var conv2d(Var x, Var w, Var b, int stride, int pad);           // w (O,C,kh,kw)
Var conv2d_transpose(Var x, Var w, Var b, int stride, int pad); // w (C,O,kh,kw)

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator-(Var a) { return neg(a); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

} // namespace lagdyn::ad
