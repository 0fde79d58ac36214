#pragma once

// Reverse-mode tape over dense matrices. Each primitive records its output
// (and whatever the backward rule needs); gradient() replays the records in
// exact reverse order and accumulates additively where a value fans out.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gad/matrix.hpp"
#include "gad/params.hpp"

namespace gad {

struct Var {
  std::size_t id = 0;
};

class Tape {
 public:
  enum class Op {
    Constant,
    Param,
    MatMul,
    MatMulBT,
    AddBias,
    Relu,
    SoftmaxRows,
    Scale,
    Subtract,
    ConcatCols,
    RowL2,
    RowCosine,
    MarginHinge,
    Mean,
  };

  Var constant(Matrix value) { return push(Op::Constant, {}, std::move(value)); }

  /// Leaf bound to a parameter block; its gradient lands in that block's slice.
  Var param(const ParamVector& params, std::string_view block) {
    const ParamBlock& b = params.block(block);
    Var v = push(Op::Param, {}, params.unpack(block));
    nodes_[v.id].param_offset = b.offset;
    return v;
  }

  Var matmul(Var a, Var b) { return push(Op::MatMul, {a.id, b.id}, gad::matmul(value(a), value(b))); }
  Var matmul_bt(Var a, Var b) { return push(Op::MatMulBT, {a.id, b.id}, gad::matmul_bt(value(a), value(b))); }
  Var add_bias(Var a, Var bias) { return push(Op::AddBias, {a.id, bias.id}, gad::add_bias(value(a), value(bias))); }
  Var relu(Var a) { return push(Op::Relu, {a.id}, gad::relu(value(a))); }
  Var softmax_rows(Var a) { return push(Op::SoftmaxRows, {a.id}, gad::softmax_rows(value(a))); }
  Var subtract(Var a, Var b) { return push(Op::Subtract, {a.id, b.id}, gad::subtract(value(a), value(b))); }

  Var scale(Var a, double s) {
    Var v = push(Op::Scale, {a.id}, gad::scale(value(a), s));
    nodes_[v.id].scalar = s;
    return v;
  }

  Var concat_cols(std::span<const Var> parts) {
    std::vector<std::size_t> ids;
    std::vector<const Matrix*> mats;
    for (Var p : parts) {
      ids.push_back(p.id);
      mats.push_back(&value(p));
    }
    return push(Op::ConcatCols, std::move(ids), gad::concat_cols(mats));
  }

  Var row_l2(Var a) { return push(Op::RowL2, {a.id}, gad::row_l2(value(a))); }

  /// Cosine similarity of matching rows (rows x 1). A zero-norm row raises
  /// DegenerateEmbedding rather than being smoothed.
  Var row_cosine(Var a, Var b) {
    const Matrix& x = value(a);
    const Matrix& y = value(b);
    require_same_shape(x, y, "row_cosine");
    Matrix out(x.rows(), 1);
    Matrix norms(x.rows(), 2);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double dot = 0.0, nx = 0.0, ny = 0.0;
      const auto xr = x.row(i);
      const auto yr = y.row(i);
      for (std::size_t k = 0; k < xr.size(); ++k) {
        dot += xr[k] * yr[k];
        nx += xr[k] * xr[k];
        ny += yr[k] * yr[k];
      }
      nx = std::sqrt(nx);
      ny = std::sqrt(ny);
      if (nx == 0.0 || ny == 0.0) {
        throw Error(ErrorCode::DegenerateEmbedding, "zero-norm row " + std::to_string(i) + " in cosine", i);
      }
      norms(i, 0) = nx;
      norms(i, 1) = ny;
      out(i, 0) = dot / (nx * ny);
    }
    Var v = push(Op::RowCosine, {a.id, b.id}, std::move(out));
    nodes_[v.id].saved = std::move(norms);
    return v;
  }

  /// Per-sample margin cosine loss: label 0 -> 1 - c, label 1 -> max(0, c - margin).
  Var margin_hinge(Var cosines, std::span<const std::uint8_t> labels, double margin) {
    const Matrix& c = value(cosines);
    if (c.cols() != 1 || c.rows() != labels.size()) throw Error(ErrorCode::DimensionMismatch, "margin_hinge");
    Matrix out(c.rows(), 1);
    for (std::size_t i = 0; i < c.rows(); ++i) {
      out(i, 0) = labels[i] == 0 ? 1.0 - c(i, 0) : std::max(0.0, c(i, 0) - margin);
    }
    Var v = push(Op::MarginHinge, {cosines.id}, std::move(out));
    nodes_[v.id].labels.assign(labels.begin(), labels.end());
    nodes_[v.id].scalar = margin;
    return v;
  }

  Var mean(Var a) {
    const Matrix& x = value(a);
    if (x.size() == 0) throw Error(ErrorCode::DimensionMismatch, "mean of empty matrix");
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    return push(Op::Mean, {a.id}, Matrix(1, 1, acc / static_cast<double>(x.size())));
  }

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  std::size_t size() const noexcept { return nodes_.size(); }
  Op op(Var v) const { return nodes_.at(v.id).op; }

  /// d loss / d params, laid out like `params`. `loss` must be 1 x 1.
  ParamVector gradient(Var loss, const ParamVector& params, double loss_grad = 1.0) const {
    const Matrix& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) throw Error(ErrorCode::Contract, "tape not terminated in a scalar");
    std::vector<Matrix> grads(loss.id + 1);
    grads[loss.id] = Matrix(1, 1, loss_grad);
    ParamVector out = params.zeros_like();

    for (std::size_t i = loss.id + 1; i-- > 0;) {
      if (grads[i].empty()) continue;
      const Node& node = nodes_[i];
      const Matrix& g = grads[i];
      switch (node.op) {
        case Op::Constant:
          break;
        case Op::Param: {
          auto dst = out.values().subspan(node.param_offset, g.size());
          for (std::size_t k = 0; k < g.size(); ++k) dst[k] += g.data()[k];
          break;
        }
        case Op::MatMul: {
          const Matrix& a = nodes_[node.inputs[0]].value;
          const Matrix& b = nodes_[node.inputs[1]].value;
          accumulate(grads, node.inputs[0], gad::matmul_bt(g, b));
          accumulate(grads, node.inputs[1], gad::matmul_at(a, g));
          break;
        }
        case Op::MatMulBT: {
          const Matrix& a = nodes_[node.inputs[0]].value;
          const Matrix& b = nodes_[node.inputs[1]].value;
          accumulate(grads, node.inputs[0], gad::matmul(g, b));
          accumulate(grads, node.inputs[1], gad::matmul_at(g, a));
          break;
        }
        case Op::AddBias: {
          accumulate(grads, node.inputs[0], g);
          Matrix db(1, g.cols());
          for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) db(0, c) += g(r, c);
          accumulate(grads, node.inputs[1], db);
          break;
        }
        case Op::Relu: {
          Matrix da = g;
          auto y = node.value.data();
          auto d = da.data();
          for (std::size_t k = 0; k < d.size(); ++k)
            if (!(y[k] > 0.0)) d[k] = 0.0;
          accumulate(grads, node.inputs[0], da);
          break;
        }
        case Op::SoftmaxRows: {
          const Matrix& y = node.value;
          Matrix da(y.rows(), y.cols());
          for (std::size_t r = 0; r < y.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
            for (std::size_t c = 0; c < y.cols(); ++c) da(r, c) = y(r, c) * (g(r, c) - dot);
          }
          accumulate(grads, node.inputs[0], da);
          break;
        }
        case Op::Scale:
          accumulate(grads, node.inputs[0], gad::scale(g, node.scalar));
          break;
        case Op::Subtract:
          accumulate(grads, node.inputs[0], g);
          accumulate(grads, node.inputs[1], gad::scale(g, -1.0));
          break;
        case Op::ConcatCols: {
          std::size_t offset = 0;
          for (std::size_t in : node.inputs) {
            const std::size_t width = nodes_[in].value.cols();
            Matrix part(g.rows(), width);
            for (std::size_t r = 0; r < g.rows(); ++r)
              for (std::size_t c = 0; c < width; ++c) part(r, c) = g(r, offset + c);
            accumulate(grads, in, part);
            offset += width;
          }
          break;
        }
        case Op::RowL2: {
          const Matrix& a = nodes_[node.inputs[0]].value;
          Matrix da(a.rows(), a.cols());
          for (std::size_t r = 0; r < a.rows(); ++r) {
            const double norm = node.value(r, 0);
            if (norm == 0.0) continue;
            for (std::size_t c = 0; c < a.cols(); ++c) da(r, c) = g(r, 0) * a(r, c) / norm;
          }
          accumulate(grads, node.inputs[0], da);
          break;
        }
        case Op::RowCosine: {
          const Matrix& a = nodes_[node.inputs[0]].value;
          const Matrix& b = nodes_[node.inputs[1]].value;
          Matrix da(a.rows(), a.cols());
          Matrix db(b.rows(), b.cols());
          for (std::size_t r = 0; r < a.rows(); ++r) {
            const double na = node.saved(r, 0);
            const double nb = node.saved(r, 1);
            const double cosine = node.value(r, 0);
            const double up = g(r, 0);
            for (std::size_t c = 0; c < a.cols(); ++c) {
              da(r, c) = up * (b(r, c) / (na * nb) - cosine * a(r, c) / (na * na));
              db(r, c) = up * (a(r, c) / (na * nb) - cosine * b(r, c) / (nb * nb));
            }
          }
          accumulate(grads, node.inputs[0], da);
          accumulate(grads, node.inputs[1], db);
          break;
        }
        case Op::MarginHinge: {
          const Matrix& c = nodes_[node.inputs[0]].value;
          Matrix dc(c.rows(), 1);
          for (std::size_t r = 0; r < c.rows(); ++r) {
            if (node.labels[r] == 0) {
              dc(r, 0) = -g(r, 0);
            } else {
              dc(r, 0) = c(r, 0) > node.scalar ? g(r, 0) : 0.0;
            }
          }
          accumulate(grads, node.inputs[0], dc);
          break;
        }
        case Op::Mean: {
          const Matrix& a = nodes_[node.inputs[0]].value;
          accumulate(grads, node.inputs[0], Matrix(a.rows(), a.cols(), g(0, 0) / static_cast<double>(a.size())));
          break;
        }
      }
    }
    return out;
  }

 private:
  struct Node {
    Op op = Op::Constant;
    std::vector<std::size_t> inputs;
    Matrix value;
    Matrix saved;
    std::vector<std::uint8_t> labels;
    double scalar = 0.0;
    std::size_t param_offset = 0;
  };

  Var push(Op op, std::vector<std::size_t> inputs, Matrix value) {
    if (op != Op::Constant && op != Op::Param) require_finite(value, "tape op");
    nodes_.push_back(Node{op, std::move(inputs), std::move(value), {}, {}, 0.0, 0});
    return Var{nodes_.size() - 1};
  }

  static void accumulate(std::vector<Matrix>& grads, std::size_t id, const Matrix& g) {
    Matrix& dst = grads[id];
    if (dst.empty()) {
      dst = g;
      return;
    }
    auto d = dst.data();
    auto s = g.data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
  }

  std::vector<Node> nodes_;
};

}  // namespace gad
