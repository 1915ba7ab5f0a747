#pragma once

#include <vector>

#include "sorn/graph.hpp"
#include "sorn/interval_scheme.hpp"
#include "sorn/tensor.hpp"

namespace sorn::model {

/// Transport cost between bins: moving mass from a faster bin j to a slower
/// bin i costs the midpoint gap M[i] - M[j]; moving toward faster bins (and
/// staying put) is free, so only slow-down shifts are penalized.
diff::Tensor cost_matrix(const data::IntervalScheme& scheme);
diff::Tensor cost_matrix(const std::vector<double>& midpoints);

/// Column-stochastic plan from raw logits (softmax down each column).
diff::Tensor plan_matrix(const diff::Tensor& logits);

/// Applies the plan to one distribution row: out = plan * x. Mass conserving.
diff::Tensor apply_transport(const diff::Tensor& plan, const diff::Tensor& row);

/// Frobenius pairing <plan * diag-scaled source, cost>: the minutes of mass
/// moved toward slower bins, weighted by how far it moved.
double transport_cost(const diff::Tensor& plan, const diff::Tensor& row, const diff::Tensor& cost);

/// Graph nodes for the same quantities.
diff::Val build_plan(diff::Graph& g, diff::Val logits);
diff::Val build_transport(diff::Graph& g, diff::Val plan, diff::Val recon);  // recon is T x D

}  // namespace sorn::model
