#include "sorn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sorn::diff {

namespace {

[[noreturn]] void shape_error(const std::string& op, const Tensor& a) {
    throw std::invalid_argument("op " + op + ": bad shape " + a.shape_str());
}

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument("op " + op + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

void require_rank2(const std::string& op, const Tensor& t) {
    if (t.rank() != 2) shape_error(op, t);
}

bool is_vector(const Tensor& t) {
    return t.rank() == 1 || (t.rank() == 2 && (t.rows() == 1 || t.cols() == 1));
}

// Softmax with max-subtraction along contiguous strided slices.
void softmax_slice(const std::vector<double>& in, std::vector<double>& out, std::size_t start,
                   std::size_t count, std::size_t stride) {
    double mx = in[start];
    for (std::size_t k = 1; k < count; ++k) mx = std::max(mx, in[start + k * stride]);
    double z = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        double e = std::exp(in[start + k * stride] - mx);
        out[start + k * stride] = e;
        z += e;
    }
    for (std::size_t k = 0; k < count; ++k) out[start + k * stride] /= z;
}

}  // namespace

Val Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return Val{static_cast<int>(nodes_.size()) - 1};
}

const Graph::Node& Graph::node(Val v) const {
    if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size())
        throw std::invalid_argument("Graph: invalid value handle (no forward pass recorded)");
    return nodes_[static_cast<std::size_t>(v.id)];
}

Val Graph::constant(Tensor t) {
    Node n;
    n.op = Op::Constant;
    n.value = std::move(t);
    return push(std::move(n));
}

Val Graph::param(Parameter& p) {
    Node n;
    n.op = Op::Param;
    n.value = p.value;
    n.parameter = &p;
    return push(std::move(n));
}

Val Graph::matmul(Val a, Val b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    require_rank2("matmul", ta);
    require_rank2("matmul", tb);
    if (ta.cols() != tb.rows()) shape_error("matmul", ta, tb);
    const std::size_t m = ta.rows(), k = ta.cols(), n = tb.cols();
    Tensor out({m, n}, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ta.at(i, p);
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out.at(i, j) += av * tb.at(p, j);
        }
    Node nd;
    nd.op = Op::MatMul;
    nd.a = a.id;
    nd.b = b.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::transpose(Val a) {
    const Tensor& ta = node(a).value;
    require_rank2("transpose", ta);
    Tensor out({ta.cols(), ta.rows()}, 0.0);
    for (std::size_t i = 0; i < ta.rows(); ++i)
        for (std::size_t j = 0; j < ta.cols(); ++j) out.at(j, i) = ta.at(i, j);
    Node nd;
    nd.op = Op::Transpose;
    nd.a = a.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::mul(Val a, Val b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!ta.same_shape(tb)) shape_error("mul", ta, tb);
    Tensor out(ta.shape(), 0.0);
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] * tb[i];
    Node nd;
    nd.op = Op::Mul;
    nd.a = a.id;
    nd.b = b.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::add(Val a, Val b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!ta.same_shape(tb)) shape_error("add", ta, tb);
    Tensor out(ta.shape(), 0.0);
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] + tb[i];
    Node nd;
    nd.op = Op::Add;
    nd.a = a.id;
    nd.b = b.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::sub(Val a, Val b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!ta.same_shape(tb)) shape_error("sub", ta, tb);
    Tensor out(ta.shape(), 0.0);
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] - tb[i];
    Node nd;
    nd.op = Op::Sub;
    nd.a = a.id;
    nd.b = b.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::scale(Val a, double c) {
    const Tensor& ta = node(a).value;
    Tensor out(ta.shape(), 0.0);
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] * c;
    Node nd;
    nd.op = Op::Scale;
    nd.a = a.id;
    nd.c = c;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::row_softmax(Val a) {
    const Tensor& ta = node(a).value;
    require_rank2("row_softmax", ta);
    if (ta.cols() == 0) throw std::invalid_argument("op row_softmax: empty axis in " + ta.shape_str());
    Tensor out(ta.shape(), 0.0);
    for (std::size_t i = 0; i < ta.rows(); ++i)
        softmax_slice(ta.data(), out.data(), i * ta.cols(), ta.cols(), 1);
    Node nd;
    nd.op = Op::RowSoftmax;
    nd.a = a.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::col_softmax(Val a) {
    const Tensor& ta = node(a).value;
    require_rank2("col_softmax", ta);
    if (ta.rows() == 0) throw std::invalid_argument("op col_softmax: empty axis in " + ta.shape_str());
    Tensor out(ta.shape(), 0.0);
    for (std::size_t j = 0; j < ta.cols(); ++j)
        softmax_slice(ta.data(), out.data(), j, ta.rows(), ta.cols());
    Node nd;
    nd.op = Op::ColSoftmax;
    nd.a = a.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::exp(Val a) {
    const Tensor& ta = node(a).value;
    Tensor out(ta.shape(), 0.0);
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = std::exp(ta[i]);
    Node nd;
    nd.op = Op::Exp;
    nd.a = a.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::neg(Val a) {
    const Tensor& ta = node(a).value;
    Tensor out(ta.shape(), 0.0);
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = -ta[i];
    Node nd;
    nd.op = Op::Neg;
    nd.a = a.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::square(Val a) {
    const Tensor& ta = node(a).value;
    Tensor out(ta.shape(), 0.0);
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] * ta[i];
    Node nd;
    nd.op = Op::Square;
    nd.a = a.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::div_scalar(Val a, Val positive_scalar) {
    const Tensor& ta = node(a).value;
    const Tensor& ts = node(positive_scalar).value;
    if (ts.size() != 1) shape_error("div_scalar", ta, ts);
    const double s = ts[0];
    if (!(s > 0.0))
        throw std::invalid_argument("op div_scalar: divisor must be positive, got " + std::to_string(s));
    Tensor out(ta.shape(), 0.0);
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] / s;
    Node nd;
    nd.op = Op::DivScalar;
    nd.a = a.id;
    nd.b = positive_scalar.id;
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::l2norm(Val vec) {
    const Tensor& tv = node(vec).value;
    if (!is_vector(tv)) shape_error("l2norm", tv);
    double acc = 0.0;
    for (std::size_t i = 0; i < tv.size(); ++i) acc += tv[i] * tv[i];
    Node nd;
    nd.op = Op::L2Norm;
    nd.a = vec.id;
    nd.value = Tensor::scalar(std::sqrt(acc));
    return push(std::move(nd));
}

Val Graph::sum(Val a) {
    const Tensor& ta = node(a).value;
    double acc = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) acc += ta[i];
    Node nd;
    nd.op = Op::Sum;
    nd.a = a.id;
    nd.value = Tensor::scalar(acc);
    return push(std::move(nd));
}

Val Graph::broadcast_rows(Val vec, std::size_t nrows) {
    const Tensor& tv = node(vec).value;
    if (!is_vector(tv)) shape_error("broadcast_rows", tv);
    const std::size_t n = tv.size();
    Tensor out({nrows, n}, 0.0);
    for (std::size_t i = 0; i < nrows; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) = tv[j];
    Node nd;
    nd.op = Op::BroadcastRows;
    nd.a = vec.id;
    nd.c = static_cast<double>(nrows);
    nd.value = std::move(out);
    return push(std::move(nd));
}

Val Graph::broadcast_cols(Val vec, std::size_t ncols) {
    const Tensor& tv = node(vec).value;
    if (!is_vector(tv)) shape_error("broadcast_cols", tv);
    const std::size_t m = tv.size();
    Tensor out({m, ncols}, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < ncols; ++j) out.at(i, j) = tv[i];
    Node nd;
    nd.op = Op::BroadcastCols;
    nd.a = vec.id;
    nd.c = static_cast<double>(ncols);
    nd.value = std::move(out);
    return push(std::move(nd));
}

const Tensor& Graph::value(Val v) const { return node(v).value; }

double Graph::scalar_value(Val v) const {
    const Tensor& t = node(v).value;
    if (t.size() != 1)
        throw std::invalid_argument("Graph: scalar_value on tensor of shape " + t.shape_str());
    return t[0];
}

void Graph::backward(Val loss) {
    const Node& ln = node(loss);
    if (ln.value.size() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got shape " + ln.value.shape_str());

    std::vector<Tensor> adj(nodes_.size());
    std::vector<char> seen(nodes_.size(), 0);
    auto touch = [&](int id, const Tensor& like) {
        if (!seen[static_cast<std::size_t>(id)]) {
            adj[static_cast<std::size_t>(id)] = Tensor(like.shape(), 0.0);
            seen[static_cast<std::size_t>(id)] = 1;
        }
    };
    touch(loss.id, ln.value);
    adj[static_cast<std::size_t>(loss.id)][0] = 1.0;

    for (int i = loss.id; i >= 0; --i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        if (!seen[ui]) continue;
        const Node& n = nodes_[ui];
        const Tensor& g = adj[ui];
        switch (n.op) {
            case Op::Constant:
                break;
            case Op::Param:
                for (std::size_t k = 0; k < g.size(); ++k) n.parameter->grad[k] += g[k];
                break;
            case Op::MatMul: {
                const Tensor& ta = nodes_[static_cast<std::size_t>(n.a)].value;
                const Tensor& tb = nodes_[static_cast<std::size_t>(n.b)].value;
                touch(n.a, ta);
                touch(n.b, tb);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                Tensor& gb = adj[static_cast<std::size_t>(n.b)];
                const std::size_t m = ta.rows(), k = ta.cols(), nn = tb.cols();
                // ga += g * tb^T ; gb += ta^T * g
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t j = 0; j < nn; ++j) {
                        const double gv = g.at(r, j);
                        if (gv == 0.0) continue;
                        for (std::size_t p = 0; p < k; ++p) {
                            ga.at(r, p) += gv * tb.at(p, j);
                            gb.at(p, j) += ta.at(r, p) * gv;
                        }
                    }
                break;
            }
            case Op::Transpose: {
                const Tensor& ta = nodes_[static_cast<std::size_t>(n.a)].value;
                touch(n.a, ta);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                for (std::size_t r = 0; r < ta.rows(); ++r)
                    for (std::size_t c = 0; c < ta.cols(); ++c) ga.at(r, c) += g.at(c, r);
                break;
            }
            case Op::Mul: {
                const Tensor& ta = nodes_[static_cast<std::size_t>(n.a)].value;
                const Tensor& tb = nodes_[static_cast<std::size_t>(n.b)].value;
                touch(n.a, ta);
                touch(n.b, tb);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                Tensor& gb = adj[static_cast<std::size_t>(n.b)];
                for (std::size_t k = 0; k < g.size(); ++k) {
                    ga[k] += g[k] * tb[k];
                    gb[k] += g[k] * ta[k];
                }
                break;
            }
            case Op::Add: {
                touch(n.a, g);
                touch(n.b, g);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                Tensor& gb = adj[static_cast<std::size_t>(n.b)];
                for (std::size_t k = 0; k < g.size(); ++k) {
                    ga[k] += g[k];
                    gb[k] += g[k];
                }
                break;
            }
            case Op::Sub: {
                touch(n.a, g);
                touch(n.b, g);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                Tensor& gb = adj[static_cast<std::size_t>(n.b)];
                for (std::size_t k = 0; k < g.size(); ++k) {
                    ga[k] += g[k];
                    gb[k] -= g[k];
                }
                break;
            }
            case Op::Scale: {
                touch(n.a, g);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * n.c;
                break;
            }
            case Op::RowSoftmax: {
                touch(n.a, g);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                const Tensor& s = n.value;
                const std::size_t cols = s.cols();
                for (std::size_t r = 0; r < s.rows(); ++r) {
                    double dot = 0.0;
                    for (std::size_t c = 0; c < cols; ++c) dot += g.at(r, c) * s.at(r, c);
                    for (std::size_t c = 0; c < cols; ++c)
                        ga.at(r, c) += s.at(r, c) * (g.at(r, c) - dot);
                }
                break;
            }
            case Op::ColSoftmax: {
                touch(n.a, g);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                const Tensor& s = n.value;
                for (std::size_t c = 0; c < s.cols(); ++c) {
                    double dot = 0.0;
                    for (std::size_t r = 0; r < s.rows(); ++r) dot += g.at(r, c) * s.at(r, c);
                    for (std::size_t r = 0; r < s.rows(); ++r)
                        ga.at(r, c) += s.at(r, c) * (g.at(r, c) - dot);
                }
                break;
            }
            case Op::Exp: {
                touch(n.a, g);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * n.value[k];
                break;
            }
            case Op::Neg: {
                touch(n.a, g);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                for (std::size_t k = 0; k < g.size(); ++k) ga[k] -= g[k];
                break;
            }
            case Op::Square: {
                const Tensor& ta = nodes_[static_cast<std::size_t>(n.a)].value;
                touch(n.a, ta);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                for (std::size_t k = 0; k < g.size(); ++k) ga[k] += 2.0 * ta[k] * g[k];
                break;
            }
            case Op::DivScalar: {
                const Tensor& ta = nodes_[static_cast<std::size_t>(n.a)].value;
                const Tensor& ts = nodes_[static_cast<std::size_t>(n.b)].value;
                touch(n.a, ta);
                touch(n.b, ts);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                Tensor& gs = adj[static_cast<std::size_t>(n.b)];
                const double s = ts[0];
                double acc = 0.0;
                for (std::size_t k = 0; k < g.size(); ++k) {
                    ga[k] += g[k] / s;
                    acc += g[k] * ta[k];
                }
                gs[0] -= acc / (s * s);
                break;
            }
            case Op::L2Norm: {
                const Tensor& ta = nodes_[static_cast<std::size_t>(n.a)].value;
                touch(n.a, ta);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                const double norm = n.value[0];
                const double denom = std::max(norm, 1e-30);
                for (std::size_t k = 0; k < ta.size(); ++k) ga[k] += g[0] * ta[k] / denom;
                break;
            }
            case Op::Sum: {
                const Tensor& ta = nodes_[static_cast<std::size_t>(n.a)].value;
                touch(n.a, ta);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                for (std::size_t k = 0; k < ta.size(); ++k) ga[k] += g[0];
                break;
            }
            case Op::BroadcastRows: {
                const Tensor& ta = nodes_[static_cast<std::size_t>(n.a)].value;
                touch(n.a, ta);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < g.cols(); ++c) ga[c] += g.at(r, c);
                break;
            }
            case Op::BroadcastCols: {
                const Tensor& ta = nodes_[static_cast<std::size_t>(n.a)].value;
                touch(n.a, ta);
                Tensor& ga = adj[static_cast<std::size_t>(n.a)];
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < g.cols(); ++c) ga[r] += g.at(r, c);
                break;
            }
        }
    }
}

FdReport finite_difference_check(const std::function<Val(Graph&)>& build_loss,
                                 const std::vector<Parameter*>& params, double h) {
    auto eval = [&]() {
        Graph g;
        Val loss = build_loss(g);
        return g.scalar_value(loss);
    };

    const double base1 = eval();
    const double base2 = eval();
    if (base1 != base2)
        throw std::runtime_error("finite_difference_check: non-deterministic loss builder (" +
                                 std::to_string(base1) + " vs " + std::to_string(base2) + ")");

    // Analytic pass.
    for (Parameter* p : params) p->reset_grad();
    {
        Graph g;
        Val loss = build_loss(g);
        g.backward(loss);
    }

    FdReport report;
    for (Parameter* p : params) {
        FdEntry entry;
        entry.param_id = p->id;
        entry.rel_errors.resize(p->value.size(), 0.0);
        for (std::size_t k = 0; k < p->value.size(); ++k) {
            const double v0 = p->value[k];
            const double step = h * std::max(1.0, std::abs(v0));
            p->value[k] = v0 + step;
            const double up = eval();
            p->value[k] = v0 - step;
            const double dn = eval();
            p->value[k] = v0;
            const double numeric = (up - dn) / (2.0 * step);
            const double analytic = p->grad[k];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            entry.rel_errors[k] = std::abs(analytic - numeric) / denom;
            entry.max_rel_error = std::max(entry.max_rel_error, entry.rel_errors[k]);
        }
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace sorn::diff
