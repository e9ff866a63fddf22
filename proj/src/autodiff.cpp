#include "lagdyn/autodiff.hpp"

#include <cmath>
#include <utility>

#include "lagdyn/conv.hpp"
#include "lagdyn/errors.hpp"
#include "lagdyn/linalg.hpp"

namespace lagdyn::ad {

namespace {

Graph* same_graph(Var a, Var b) {
    if (a.graph == nullptr || a.graph != b.graph)
        throw UsageError("autodiff op applied to vars from different graphs");
    return a.graph;
}

void require(bool ok, const char* msg) {
    if (!ok) throw UsageError(msg);
}

// out[r x k] += G[r x c] * B^T, B stored (k x c)
void matmul_nt_acc(const double* g, const double* b, double* out, int r, int c, int k) {
    for (int i = 0; i < r; ++i) {
        const double* gi = g + static_cast<size_t>(i) * c;
        double* oi = out + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double* bp = b + static_cast<size_t>(p) * c;
            double acc = 0.0;
            for (int j = 0; j < c; ++j) acc += gi[j] * bp[j];
            oi[p] += acc;
        }
    }
}

// out[k x c] += A^T * G, A stored (r x k), G (r x c)
void matmul_tn_acc(const double* a, const double* g, double* out, int r, int k, int c) {
    for (int i = 0; i < r; ++i) {
        const double* ai = a + static_cast<size_t>(i) * k;
        const double* gi = g + static_cast<size_t>(i) * c;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            double* op = out + static_cast<size_t>(p) * c;
            for (int j = 0; j < c; ++j) op[j] += aip * gi[j];
        }
    }
}

} // namespace

Var Graph::leaf(Tensor value) { return make_node(std::move(value), {}); }

Var Graph::constant(Tensor value) {
    Var v = make_node(std::move(value), {});
    nodes_[static_cast<size_t>(v.id)].no_grad = true;
    return v;
}

Var Graph::make_node(Tensor value, std::function<void(Graph&)> backward) {
    Node n;
    n.value = std::move(value);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor* Graph::grad_for(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.no_grad) return nullptr;
    if (n.grad.empty()) n.grad = Tensor(n.value.shape());
    n.touched = true;
    return &n.grad;
}

Tensor Graph::gradient(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v.id)];
    if (n.grad.empty()) return Tensor(n.value.shape());
    return n.grad;
}

void Graph::backward(Var root) {
    if (root.graph != this) throw UsageError("backward root from another graph");
    if (value(root).size() != 1) throw UsageError("backward root must be a scalar");
    Tensor* g = grad_for(root.id);
    if (!g) throw UsageError("backward root does not track gradients");
    (*g)[0] += 1.0;
    for (int i = root.id; i >= 0; --i) {
        Node& n = nodes_[static_cast<size_t>(i)];
        if (n.touched && n.backward) n.backward(*this);
    }
}

// ---- elementwise ----

Var add(Var a, Var b) {
    Graph* g = same_graph(a, b);
    const Tensor& va = g->value(a);
    const Tensor& vb = g->value(b);
    require(va.same_shape(vb), "add: shape mismatch");
    Tensor out = va;
    for (int64_t i = 0; i < out.size(); ++i) out[i] += vb[i];
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, ib = b.id](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i];
        if (Tensor* gb = gr.grad_for(ib))
            for (int64_t i = 0; i < go.size(); ++i) (*gb)[i] += go[i];
    };
    return o;
}

Var sub(Var a, Var b) {
    Graph* g = same_graph(a, b);
    const Tensor& va = g->value(a);
    const Tensor& vb = g->value(b);
    require(va.same_shape(vb), "sub: shape mismatch");
    Tensor out = va;
    for (int64_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, ib = b.id](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i];
        if (Tensor* gb = gr.grad_for(ib))
            for (int64_t i = 0; i < go.size(); ++i) (*gb)[i] -= go[i];
    };
    return o;
}

Var mul(Var a, Var b) {
    Graph* g = same_graph(a, b);
    const Tensor& va = g->value(a);
    const Tensor& vb = g->value(b);
    require(va.same_shape(vb), "mul: shape mismatch");
    Tensor out = va;
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, ib = b.id](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& va = gr.node(ia).value;
        const Tensor& vb = gr.node(ib).value;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * vb[i];
        if (Tensor* gb = gr.grad_for(ib))
            for (int64_t i = 0; i < go.size(); ++i) (*gb)[i] += go[i] * va[i];
    };
    return o;
}

Var neg(Var a) { return affine(a, -1.0, 0.0); }
Var scale(Var a, double c) { return affine(a, c, 0.0); }

Var affine(Var a, double alpha, double beta) {
    Graph* g = a.graph;
    Tensor out = g->value(a);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = alpha * out[i] + beta;
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, alpha](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < go.size(); ++i) (*ga)[i] += alpha * go[i];
    };
    return o;
}

Var tanh(Var a) {
    Graph* g = a.graph;
    Tensor out = g->value(a);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& y = gr.node(self).value;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * (1.0 - y[i] * y[i]);
    };
    return o;
}

Var sigmoid(Var a) {
    Graph* g = a.graph;
    Tensor out = g->value(a);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& y = gr.node(self).value;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * y[i] * (1.0 - y[i]);
    };
    return o;
}

Var relu(Var a) {
    Graph* g = a.graph;
    Tensor out = g->value(a);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& y = gr.node(self).value;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < go.size(); ++i)
                if (y[i] > 0.0) (*ga)[i] += go[i];
    };
    return o;
}

// ---- linear algebra ----

Var matmul(Var a, Var b) {
    Graph* g = same_graph(a, b);
    const Tensor& va = g->value(a);
    const Tensor& vb = g->value(b);
    require(va.ndim() == 2 && vb.ndim() == 2 && va.dim(1) == vb.dim(0),
            "matmul: incompatible shapes");
    const int r = va.dim(0), k = va.dim(1), c = vb.dim(1);
    Tensor out({r, c});
    linalg::matmul(va.data(), vb.data(), out.data(), r, k, c);
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, ib = b.id, r, k, c](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& va = gr.node(ia).value;
        const Tensor& vb = gr.node(ib).value;
        if (Tensor* ga = gr.grad_for(ia)) matmul_nt_acc(go.data(), vb.data(), ga->data(), r, c, k);
        if (Tensor* gb = gr.grad_for(ib)) matmul_tn_acc(va.data(), go.data(), gb->data(), r, k, c);
    };
    return o;
}

Var matvec(Var a, Var x) {
    Graph* g = same_graph(a, x);
    const Tensor& va = g->value(a);
    const Tensor& vx = g->value(x);
    require(va.ndim() == 2 && vx.ndim() == 1 && va.dim(1) == vx.dim(0),
            "matvec: incompatible shapes");
    const int r = va.dim(0), k = va.dim(1);
    Tensor out({r});
    linalg::matvec(va.data(), vx.data(), out.data(), r, k);
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, ix = x.id, r, k](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& va = gr.node(ia).value;
        const Tensor& vx = gr.node(ix).value;
        if (Tensor* ga = gr.grad_for(ia))
            for (int i = 0; i < r; ++i) {
                const double gi = go[i];
                double* row = ga->data() + static_cast<size_t>(i) * k;
                for (int p = 0; p < k; ++p) row[p] += gi * vx[p];
            }
        if (Tensor* gx = gr.grad_for(ix))
            linalg::matvec_t(va.data(), go.data(), gx->data(), r, k, true);
    };
    return o;
}

Var transpose(Var a) {
    Graph* g = a.graph;
    const Tensor& va = g->value(a);
    require(va.ndim() == 2, "transpose: expects a matrix");
    const int r = va.dim(0), c = va.dim(1);
    Tensor out({c, r});
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) out.at(j, i) = va.at(i, j);
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, r, c](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        if (Tensor* ga = gr.grad_for(ia))
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) ga->at(i, j) += go.at(j, i);
    };
    return o;
}

Var row_scale(Var a, Var s) {
    Graph* g = same_graph(a, s);
    const Tensor& va = g->value(a);
    const Tensor& vs = g->value(s);
    require(va.ndim() == 2 && vs.ndim() == 1 && vs.dim(0) == va.dim(0),
            "row_scale: incompatible shapes");
    const int r = va.dim(0), c = va.dim(1);
    Tensor out = va;
    for (int i = 0; i < r; ++i) {
        const double si = vs[i];
        double* row = out.data() + static_cast<size_t>(i) * c;
        for (int j = 0; j < c; ++j) row[j] *= si;
    }
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, is = s.id, r, c](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& va = gr.node(ia).value;
        const Tensor& vs = gr.node(is).value;
        if (Tensor* ga = gr.grad_for(ia))
            for (int i = 0; i < r; ++i) {
                const double si = vs[i];
                const double* gi = go.data() + static_cast<size_t>(i) * c;
                double* ai = ga->data() + static_cast<size_t>(i) * c;
                for (int j = 0; j < c; ++j) ai[j] += gi[j] * si;
            }
        if (Tensor* gs = gr.grad_for(is))
            for (int i = 0; i < r; ++i) {
                const double* gi = go.data() + static_cast<size_t>(i) * c;
                const double* ai = va.data() + static_cast<size_t>(i) * c;
                double acc = 0.0;
                for (int j = 0; j < c; ++j) acc += gi[j] * ai[j];
                (*gs)[i] += acc;
            }
    };
    return o;
}

Var linear(Var x, Var w, Var b) {
    Graph* g = same_graph(x, w);
    same_graph(w, b);
    const Tensor& vx = g->value(x);
    const Tensor& vw = g->value(w);
    const Tensor& vb = g->value(b);
    require(vx.ndim() == 2 && vw.ndim() == 2 && vb.ndim() == 1 && vx.dim(1) == vw.dim(1) &&
                vb.dim(0) == vw.dim(0),
            "linear: incompatible shapes");
    const int n = vx.dim(0), k = vx.dim(1), outd = vw.dim(0);
    Tensor out({n, outd});
    for (int i = 0; i < n; ++i) {
        const double* xi = vx.data() + static_cast<size_t>(i) * k;
        double* oi = out.data() + static_cast<size_t>(i) * outd;
        for (int o = 0; o < outd; ++o)
            oi[o] = vb[o] + linalg::dot(xi, vw.data() + static_cast<size_t>(o) * k, k);
    }
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ix = x.id, iw = w.id, ib = b.id, n, k,
                              outd](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& vx = gr.node(ix).value;
        const Tensor& vw = gr.node(iw).value;
        if (Tensor* gx = gr.grad_for(ix))
            linalg::matmul(go.data(), vw.data(), gx->data(), n, outd, k, true);
        if (Tensor* gw = gr.grad_for(iw)) matmul_tn_acc(go.data(), vx.data(), gw->data(), n, outd, k);
        if (Tensor* gb = gr.grad_for(ib))
            for (int i = 0; i < n; ++i) {
                const double* gi = go.data() + static_cast<size_t>(i) * outd;
                for (int o = 0; o < outd; ++o) (*gb)[o] += gi[o];
            }
    };
    return o;
}

Var cholesky_solve(Var a, Var rhs) {
    Graph* g = same_graph(a, rhs);
    const Tensor& va = g->value(a);
    const Tensor& vr = g->value(rhs);
    require(va.ndim() == 2 && va.dim(0) == va.dim(1) && vr.ndim() == 1 && vr.dim(0) == va.dim(0),
            "cholesky_solve: incompatible shapes");
    const int m = va.dim(0);
    Tensor l = va;
    linalg::cholesky_factor(l);
    Tensor x({m});
    linalg::cholesky_solve_factored(l, vr.data(), x.data());
    Var o = g->make_node(std::move(x), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, ir = rhs.id, m,
                              l = std::move(l)](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& xv = gr.node(self).value;
        Tensor s({m});
        linalg::cholesky_solve_factored(l, go.data(), s.data());
        if (Tensor* grhs = gr.grad_for(ir))
            for (int i = 0; i < m; ++i) (*grhs)[i] += s[i];
        if (Tensor* ga = gr.grad_for(ia))
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) ga->at(i, j) -= s[i] * xv[j];
    };
    return o;
}

// ---- reductions ----

Var sum(Var a) {
    Graph* g = a.graph;
    const Tensor& va = g->value(a);
    double acc = 0.0;
    for (int64_t i = 0; i < va.size(); ++i) acc += va[i];
    Var o = g->make_node(Tensor({1}, {acc}), {});
    g->node(o.id).backward = [self = o.id, ia = a.id](Graph& gr) {
        const double go = gr.node(self).grad[0];
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < ga->size(); ++i) (*ga)[i] += go;
    };
    return o;
}

Var sum_sq(Var a) {
    Graph* g = a.graph;
    const Tensor& va = g->value(a);
    double acc = 0.0;
    for (int64_t i = 0; i < va.size(); ++i) acc += va[i] * va[i];
    Var o = g->make_node(Tensor({1}, {acc}), {});
    g->node(o.id).backward = [self = o.id, ia = a.id](Graph& gr) {
        const double go = gr.node(self).grad[0];
        const Tensor& va = gr.node(ia).value;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < va.size(); ++i) (*ga)[i] += 2.0 * go * va[i];
    };
    return o;
}

Var sum_abs(Var a) {
    Graph* g = a.graph;
    const Tensor& va = g->value(a);
    double acc = 0.0;
    for (int64_t i = 0; i < va.size(); ++i) acc += std::abs(va[i]);
    Var o = g->make_node(Tensor({1}, {acc}), {});
    g->node(o.id).backward = [self = o.id, ia = a.id](Graph& gr) {
        const double go = gr.node(self).grad[0];
        const Tensor& va = gr.node(ia).value;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < va.size(); ++i) {
                const double s = va[i] > 0.0 ? 1.0 : (va[i] < 0.0 ? -1.0 : 0.0);
                (*ga)[i] += go * s;
            }
    };
    return o;
}

Var dot(Var a, Var b) {
    Graph* g = same_graph(a, b);
    const Tensor& va = g->value(a);
    const Tensor& vb = g->value(b);
    require(va.size() == vb.size(), "dot: size mismatch");
    const double acc = linalg::dot(va.data(), vb.data(), static_cast<int>(va.size()));
    Var o = g->make_node(Tensor({1}, {acc}), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, ib = b.id](Graph& gr) {
        const double go = gr.node(self).grad[0];
        const Tensor& va = gr.node(ia).value;
        const Tensor& vb = gr.node(ib).value;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < va.size(); ++i) (*ga)[i] += go * vb[i];
        if (Tensor* gb = gr.grad_for(ib))
            for (int64_t i = 0; i < vb.size(); ++i) (*gb)[i] += go * va[i];
    };
    return o;
}

// ---- shape ----

Var reshape(Var a, std::vector<int> shape) {
    Graph* g = a.graph;
    Tensor out = g->value(a).reshaped(std::move(shape));
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i];
    };
    return o;
}

Var slice(Var a, int offset, int len) {
    Graph* g = a.graph;
    const Tensor& va = g->value(a);
    require(offset >= 0 && len >= 1 && offset + len <= va.size(), "slice: window out of range");
    Tensor out({len});
    for (int i = 0; i < len; ++i) out[i] = va[offset + i];
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, offset, len](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        if (Tensor* ga = gr.grad_for(ia))
            for (int i = 0; i < len; ++i) (*ga)[offset + i] += go[i];
    };
    return o;
}

Var concat(Var a, Var b) {
    Graph* g = same_graph(a, b);
    const Tensor& va = g->value(a);
    const Tensor& vb = g->value(b);
    require(va.ndim() == 1 && vb.ndim() == 1, "concat: expects vectors");
    const int na = va.dim(0), nb = vb.dim(0);
    Tensor out({na + nb});
    for (int i = 0; i < na; ++i) out[i] = va[i];
    for (int i = 0; i < nb; ++i) out[na + i] = vb[i];
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, ib = b.id, na, nb](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        if (Tensor* ga = gr.grad_for(ia))
            for (int i = 0; i < na; ++i) (*ga)[i] += go[i];
        if (Tensor* gb = gr.grad_for(ib))
            for (int i = 0; i < nb; ++i) (*gb)[i] += go[na + i];
    };
    return o;
}

Var slice_rows(Var a, int row, int n) {
    Graph* g = a.graph;
    const Tensor& va = g->value(a);
    require(va.ndim() >= 1 && row >= 0 && n >= 1 && row + n <= va.dim(0),
            "slice_rows: rows out of range");
    const int64_t rowsz = va.size() / va.dim(0);
    std::vector<int> shape = va.shape();
    shape[0] = n;
    Tensor out(shape);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = va[row * rowsz + i];
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, row, rowsz](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        if (Tensor* ga = gr.grad_for(ia))
            for (int64_t i = 0; i < go.size(); ++i) (*ga)[row * rowsz + i] += go[i];
    };
    return o;
}

Var stack_rows(const std::vector<Var>& xs) {
    require(!xs.empty(), "stack_rows: empty list");
    Graph* g = xs[0].graph;
    const int n = g->value(xs[0]).dim(0);
    for (const Var& v : xs) {
        same_graph(xs[0], v);
        require(g->value(v).ndim() == 1 && g->value(v).dim(0) == n,
                "stack_rows: rows must be equal-length vectors");
    }
    const int k = static_cast<int>(xs.size());
    Tensor out({k, n});
    std::vector<int> ids(xs.size());
    for (int r = 0; r < k; ++r) {
        ids[static_cast<size_t>(r)] = xs[static_cast<size_t>(r)].id;
        const Tensor& row = g->value(xs[static_cast<size_t>(r)]);
        for (int i = 0; i < n; ++i) out.at(r, i) = row[i];
    }
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ids = std::move(ids), n](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        for (size_t r = 0; r < ids.size(); ++r)
            if (Tensor* grow = gr.grad_for(ids[r]))
                for (int i = 0; i < n; ++i) (*grow)[i] += go.at(static_cast<int>(r), i);
    };
    return o;
}

Var column(Var a, int k) {
    Graph* g = a.graph;
    const Tensor& va = g->value(a);
    require(va.ndim() == 2 && k >= 0 && k < va.dim(1), "column: index out of range");
    const int r = va.dim(0);
    Tensor out({r});
    for (int i = 0; i < r; ++i) out[i] = va.at(i, k);
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ia = a.id, k, r](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        if (Tensor* ga = gr.grad_for(ia))
            for (int i = 0; i < r; ++i) ga->at(i, k) += go[i];
    };
    return o;
}

Var stack_last(const std::vector<Var>& slabs) {
    require(!slabs.empty(), "stack_last: empty list");
    Graph* g = slabs[0].graph;
    const Tensor& first = g->value(slabs[0]);
    require(first.ndim() == 2, "stack_last: expects matrices");
    const int r = first.dim(0), c = first.dim(1);
    const int kdim = static_cast<int>(slabs.size());
    Tensor out({r, c, kdim});
    std::vector<int> ids(slabs.size());
    for (int k = 0; k < kdim; ++k) {
        same_graph(slabs[0], slabs[static_cast<size_t>(k)]);
        const Tensor& s = g->value(slabs[static_cast<size_t>(k)]);
        require(s.dim(0) == r && s.dim(1) == c, "stack_last: mismatched slabs");
        ids[static_cast<size_t>(k)] = slabs[static_cast<size_t>(k)].id;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) out.at3(i, j, k) = s.at(i, j);
    }
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ids = std::move(ids), r, c](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        for (size_t k = 0; k < ids.size(); ++k)
            if (Tensor* gs = gr.grad_for(ids[k]))
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < c; ++j)
                        gs->at(i, j) += go.at3(i, j, static_cast<int>(k));
    };
    return o;
}

// ---- dynamics-specific ----

Var coriolis(Var ddq, Var qdot) {
    Graph* g = same_graph(ddq, qdot);
    const Tensor& t = g->value(ddq);
    const Tensor& v = g->value(qdot);
    require(t.ndim() == 3 && v.ndim() == 1, "coriolis: expects (m,m,m) and (m)");
    const int m = v.dim(0);
    require(t.dim(0) == m && t.dim(1) == m && t.dim(2) == m, "coriolis: dimension mismatch");
    Tensor out({m});
    for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                acc += (t.at3(k, j, i) - 0.5 * t.at3(i, j, k)) * v[i] * v[j];
        out[k] = acc;
    }
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, it = ddq.id, iv = qdot.id, m](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& t = gr.node(it).value;
        const Tensor& v = gr.node(iv).value;
        if (Tensor* gt = gr.grad_for(it))
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    for (int c = 0; c < m; ++c)
                        gt->at3(a, b, c) += go[a] * v[b] * v[c] - 0.5 * go[c] * v[a] * v[b];
        if (Tensor* gv = gr.grad_for(iv))
            for (int p = 0; p < m; ++p) {
                double acc = 0.0;
                for (int k = 0; k < m; ++k) {
                    double byi = 0.0, byj = 0.0;
                    for (int j = 0; j < m; ++j)
                        byi += (t.at3(k, j, p) - 0.5 * t.at3(p, j, k)) * v[j];
                    for (int i = 0; i < m; ++i)
                        byj += (t.at3(k, p, i) - 0.5 * t.at3(i, p, k)) * v[i];
                    acc += go[k] * (byi + byj);
                }
                (*gv)[p] += acc;
            }
    };
    return o;
}

// ---- convolution ----

namespace {

conv::Conv2dDims conv_dims(const Tensor& x, const Tensor& w, bool transposed, int stride,
                           int pad) {
    require(x.ndim() == 4 && w.ndim() == 4, "conv: expects 4-d input and weights");
    conv::Conv2dDims d{};
    d.n = x.dim(0);
    d.cin = x.dim(1);
    d.h = x.dim(2);
    d.w = x.dim(3);
    d.kh = w.dim(2);
    d.kw = w.dim(3);
    d.stride = stride;
    d.pad = pad;
    if (!transposed) {
        require(w.dim(1) == d.cin, "conv2d: channel mismatch");
        d.cout = w.dim(0);
        d.ho = conv::conv_out_size(d.h, d.kh, stride, pad);
        d.wo = conv::conv_out_size(d.w, d.kw, stride, pad);
    } else {
        require(w.dim(0) == d.cin, "conv2d_transpose: channel mismatch");
        d.cout = w.dim(1);
        d.ho = conv::convt_out_size(d.h, d.kh, stride, pad);
        d.wo = conv::convt_out_size(d.w, d.kw, stride, pad);
    }
    require(d.ho >= 1 && d.wo >= 1, "conv: output would be empty");
    return d;
}

} // namespace

Var conv2d(Var x, Var w, Var b, int stride, int pad) {
    Graph* g = same_graph(x, w);
    same_graph(w, b);
    const Tensor& vx = g->value(x);
    const Tensor& vw = g->value(w);
    const Tensor& vb = g->value(b);
    conv::Conv2dDims d = conv_dims(vx, vw, false, stride, pad);
    require(vb.ndim() == 1 && vb.dim(0) == d.cout, "conv2d: bias size mismatch");
    Tensor out({d.n, d.cout, d.ho, d.wo});
    conv::conv2d_forward(vx.data(), vw.data(), vb.data(), out.data(), d);
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ix = x.id, iw = w.id, ib = b.id, d](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& vx = gr.node(ix).value;
        const Tensor& vw = gr.node(iw).value;
        Tensor* gx = gr.grad_for(ix);
        Tensor* gw = gr.grad_for(iw);
        Tensor* gb = gr.grad_for(ib);
        conv::conv2d_backward(vx.data(), vw.data(), go.data(), gx ? gx->data() : nullptr,
                              gw ? gw->data() : nullptr, gb ? gb->data() : nullptr, d);
    };
    return o;
}

Var conv2d_transpose(Var x, Var w, Var b, int stride, int pad) {
    Graph* g = same_graph(x, w);
    same_graph(w, b);
    const Tensor& vx = g->value(x);
    const Tensor& vw = g->value(w);
    const Tensor& vb = g->value(b);
    conv::Conv2dDims d = conv_dims(vx, vw, true, stride, pad);
    require(vb.ndim() == 1 && vb.dim(0) == d.cout, "conv2d_transpose: bias size mismatch");
    Tensor out({d.n, d.cout, d.ho, d.wo});
    conv::convt2d_forward(vx.data(), vw.data(), vb.data(), out.data(), d);
    Var o = g->make_node(std::move(out), {});
    g->node(o.id).backward = [self = o.id, ix = x.id, iw = w.id, ib = b.id, d](Graph& gr) {
        const Tensor& go = gr.node(self).grad;
        const Tensor& vx = gr.node(ix).value;
        const Tensor& vw = gr.node(iw).value;
        Tensor* gx = gr.grad_for(ix);
        Tensor* gw = gr.grad_for(iw);
        Tensor* gb = gr.grad_for(ib);
        conv::convt2d_backward(vx.data(), vw.data(), go.data(), gx ? gx->data() : nullptr,
                               gw ? gw->data() : nullptr, gb ? gb->data() : nullptr, d);
    };
    return o;
}

} // namespace lagdyn::ad
