#include "sorn/neural_ot.hpp"

#include <stdexcept>

namespace sorn::model {

using diff::Graph;
using diff::Tensor;
using diff::Val;

Tensor cost_matrix(const data::IntervalScheme& scheme) { return cost_matrix(scheme.midpoints()); }

Tensor cost_matrix(const std::vector<double>& midpoints) {
    const std::size_t dims = midpoints.size();
    for (std::size_t i = 1; i < dims; ++i)
        if (!(midpoints[i] > midpoints[i - 1]))
            throw std::invalid_argument("cost_matrix: midpoints must be strictly increasing");
    Tensor c = Tensor::matrix(dims, dims, 0.0);
    for (std::size_t i = 0; i < dims; ++i)
        for (std::size_t j = 0; j < i; ++j) c.at(i, j) = midpoints[i] - midpoints[j];
    return c;
}

Tensor plan_matrix(const Tensor& logits) {
    Graph g;
    return g.value(build_plan(g, g.constant(logits)));
}

Tensor apply_transport(const Tensor& plan, const Tensor& row) {
    const std::size_t dims = plan.rows();
    if (plan.cols() != dims || row.size() != dims)
        throw std::invalid_argument("apply_transport: shape mismatch " + plan.shape_str() + " vs " +
                                    row.shape_str());
    Tensor out(row.shape(), 0.0);
    for (std::size_t i = 0; i < dims; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < dims; ++j) acc += plan.at(i, j) * row[j];
        out[i] = acc;
    }
    return out;
}

double transport_cost(const Tensor& plan, const Tensor& row, const Tensor& cost) {
    const std::size_t dims = plan.rows();
    if (row.size() != dims || cost.rows() != dims || cost.cols() != dims)
        throw std::invalid_argument("transport_cost: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < dims; ++i)
        for (std::size_t j = 0; j < dims; ++j) acc += plan.at(i, j) * row[j] * cost.at(i, j);
    return acc;
}

Val build_plan(Graph& g, Val logits) { return g.col_softmax(logits); }

Val build_transport(Graph& g, Val plan, Val recon) {
    // Per-slot x_dot[t] = plan * x~[t]  <=>  x_dot = x~ * plan^T.
    return g.matmul(recon, g.transpose(plan));
}

}  // namespace sorn::model
