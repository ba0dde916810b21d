#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lada/error.hpp"

namespace lada {

using Shape = std::vector<int>;

std::int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

class Tape;

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until backward reaches this node
  bool requires_grad = false;
  bool leaf = false;
  std::int64_t id = -1;
  Tape* owner = nullptr;
  // Accumulates this node's grad into its parents. Parents are captured by
  // shared_ptr inside the closure, so are the forward intermediates a rule
  // needs.
  std::function<void(Node&)> backward;
};

}  // namespace detail

/// Handle to a node recorded on a Tape. Copying the handle shares the node.
/// Values are dense row-major 64-bit floats.
class Tensor {
 public:
  Tensor() = default;

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node().shape; }
  int rank() const { return static_cast<int>(node().shape.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(node().values.size()); }
  const std::vector<double>& values() const { return node().values; }
  bool requires_grad() const { return node().requires_grad; }

  /// Value of a rank-0/size-1 tensor.
  double scalar() const;

 private:
  friend class Tape;
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  detail::Node& node() const;
  std::shared_ptr<detail::Node> node_;
};

/// Reverse-mode gradient tape over dense double tensors.
///
/// Ops append nodes in creation order, which is already a topological order,
/// so backward() is a single reverse sweep. Leaves created with
/// grad_enabled=true receive a gradient buffer of matching shape after
/// backward(), even when unreached (all zeros then). A tape and its tensors
/// belong to one thread at a time; there is no internal locking.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf holding caller data. Rejects NaN/Inf values.
  Tensor leaf(Shape shape, std::vector<double> values, bool grad_enabled);

  /// Non-differentiable leaf. Values must still be finite; use e.g. -1e9
  /// rather than -inf for additive masks.
  Tensor constant(Shape shape, std::vector<double> values) {
    return leaf(std::move(shape), std::move(values), false);
  }
  Tensor scalar_constant(double v) { return constant({1}, {v}); }
  Tensor zeros(Shape shape, bool grad_enabled = false);

  // ---- elementwise ----
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double s);
  Tensor tanh(const Tensor& a);
  Tensor relu(const Tensor& a);
  Tensor exp(const Tensor& a);
  /// Natural log; every input entry must be > 0.
  Tensor log(const Tensor& a);
  /// Elementwise x^p. Requires x > 0 for non-integer p, x != 0 for p < 0.
  Tensor pow_elem(const Tensor& a, double p);

  /// Broadcast add: b's shape must equal a suffix of a's shape (bias rows).
  Tensor add_rows(const Tensor& a, const Tensor& b);

  // ---- matrix ----
  /// Rank-2 matmul, or batched matmul for equal-rank operands with identical
  /// leading dimensions: (..., M, K) x (..., K, N) -> (..., M, N).
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor transpose_last2(const Tensor& a);

  // ---- rows (last dimension) ----
  /// Softmax over the last dimension, computed with max subtraction.
  Tensor softmax_rows(const Tensor& a);
  /// x / sum(|x|) per row of the last dimension; rejects all-zero rows.
  Tensor l1_normalize_rows(const Tensor& a);
  /// Layer normalization over the last dimension with affine gamma/beta.
  Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                    double eps = 1e-5);

  /// Per-row KL(target || p) with the 0*log(0) = 0 convention. target is a
  /// constant with p's shape; output drops the last dimension (scalar {1}
  /// for rank-1 input).
  Tensor kl_div_rows(const std::vector<double>& target, const Tensor& p);

  // ---- reductions ----
  Tensor sum(const Tensor& a);
  Tensor mean(const Tensor& a);
  /// Scalar sum of squared differences: sum((a - b)^2).
  Tensor squared_l2_diff(const Tensor& a, const Tensor& b);

  // ---- structure ----
  /// Identity forward; contributes zero gradient to everything behind it.
  Tensor stop_gradient(const Tensor& a);
  Tensor concat(const std::vector<Tensor>& parts, int axis);
  /// Copying slice of `len` indices starting at `start` along `axis`.
  Tensor slice(const Tensor& a, int axis, int start, int len);
  /// Copying reshape; total element count must match.
  Tensor reshape(const Tensor& a, Shape shape);
  /// Row gather: table (V, d) and n indices -> (n, d). Backward scatter-adds.
  Tensor rows_lookup(const Tensor& table, const std::vector<int>& ids);

  /// Reverse accumulation from a scalar loss recorded on this tape.
  /// Errors: non-scalar loss, loss from another tape, repeated call.
  void backward(const Tensor& loss);
  bool backward_done() const { return backward_done_; }

  /// Gradient buffer of a node; valid after backward() for grad-enabled
  /// leaves and for any node the sweep reached.
  const std::vector<double>& grad(const Tensor& t) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  using NodePtr = std::shared_ptr<detail::Node>;
  Tensor record(Shape shape, std::vector<double> values,
                const std::vector<Tensor>& parents,
                std::function<void(detail::Node&)> backward_fn);
  detail::Node& checked(const Tensor& t, const char* op) const;

  std::vector<NodePtr> nodes_;
  bool backward_done_ = false;
};

/// Max over coordinates of |analytic - central difference| /
/// max(1, |analytic|, |numeric|) for a scalar-valued tensor function.
/// f is called with a fresh tape and a leaf built from x0.
double grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f,
                  const Shape& shape, const std::vector<double>& x0,
                  double epsilon);

namespace detail {
void accumulate(Node& parent, std::int64_t idx, double v);
void ensure_grad(Node& n);
}  // namespace detail

}  // namespace lada
