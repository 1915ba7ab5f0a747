#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sorn/tensor.hpp"

namespace sorn::diff {

/// Named trainable tensor with an accumulated gradient of the same shape.
struct Parameter {
    std::string id;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string name, Tensor v) : id(std::move(name)), value(std::move(v)) {
        grad = Tensor(value.shape(), 0.0);
    }

    void reset_grad() { grad = Tensor(value.shape(), 0.0); }
};

/// Handle to a node on a Graph tape.
struct Val {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over rank-2 tensors. Ops evaluate eagerly; backward()
/// walks the record in reverse and accumulates into Parameter::grad.
///
/// Op set: matmul, transpose, element-wise mul/add/sub, scalar multiply,
/// row/column softmax, exp, neg, square, division by a positive scalar,
/// L2 norm of a vector, sum-reduction, row/column broadcast of a vector.
class Graph {
public:
    Val constant(Tensor t);
    Val param(Parameter& p);

    Val matmul(Val a, Val b);
    Val transpose(Val a);
    Val mul(Val a, Val b);
    Val add(Val a, Val b);
    Val sub(Val a, Val b);
    Val scale(Val a, double c);
    Val row_softmax(Val a);
    Val col_softmax(Val a);
    Val exp(Val a);
    Val neg(Val a);
    Val square(Val a);
    Val div_scalar(Val a, Val positive_scalar);
    Val l2norm(Val vec);
    Val sum(Val a);
    Val broadcast_rows(Val vec, std::size_t nrows);  // out[i,j] = vec[j]
    Val broadcast_cols(Val vec, std::size_t ncols);  // out[i,j] = vec[i]

    const Tensor& value(Val v) const;
    double scalar_value(Val v) const;

    /// Accumulates d(loss)/d(param) into every reachable Parameter's grad.
    void backward(Val loss);

    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op {
        Constant, Param, MatMul, Transpose, Mul, Add, Sub, Scale,
        RowSoftmax, ColSoftmax, Exp, Neg, Square, DivScalar,
        L2Norm, Sum, BroadcastRows, BroadcastCols,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        double c = 0.0;          // scale factor / broadcast size
        Tensor value;
        Parameter* parameter = nullptr;
    };

    Val push(Node n);
    const Node& node(Val v) const;

    std::vector<Node> nodes_;
};

/// Per-parameter report from the finite-difference checker.
struct FdEntry {
    std::string param_id;
    double max_rel_error = 0.0;
    std::vector<double> rel_errors;  // one per parameter entry
};

struct FdReport {
    std::vector<FdEntry> entries;
    double max_rel_error = 0.0;
};

/// Central finite differences against the tape gradients.
/// `build_loss` must construct the loss from current parameter values and be
/// deterministic; two base evaluations are compared bitwise to detect drift.
/// Step per entry: h * max(1, |value|). Relative error:
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
FdReport finite_difference_check(const std::function<Val(Graph&)>& build_loss,
                                 const std::vector<Parameter*>& params, double h = 1e-4);

}  // namespace sorn::diff
