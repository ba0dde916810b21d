#include "lada/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lada {

std::int64_t shape_numel(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << ")";
  return os.str();
}

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shapes do not conform: " + shape_str(a) +
                   " vs " + shape_str(b));
}

void check_same_shape(const char* op, const Node& a, const Node& b) {
  if (a.shape != b.shape) shape_fail(op, a.shape, b.shape);
}

// Split a shape at `axis` into (outer, axis_len, inner) extents for
// row-major block arithmetic.
struct AxisSplit {
  std::int64_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, int axis) {
  AxisSplit r;
  for (int i = 0; i < axis; ++i) r.outer *= s[i];
  r.len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

std::int64_t last_dim(const Shape& s) { return s.empty() ? 1 : s.back(); }

}  // namespace

namespace detail {

void ensure_grad(Node& n) {
  if (n.grad.empty()) n.grad.assign(n.values.size(), 0.0);
}

void accumulate(Node& parent, std::int64_t idx, double v) {
  ensure_grad(parent);
  parent.grad[static_cast<std::size_t>(idx)] += v;
}

}  // namespace detail

double Tensor::scalar() const {
  const Node& n = node();
  if (n.values.size() != 1)
    throw ShapeError("Tensor::scalar: tensor has shape " + shape_str(n.shape));
  return n.values[0];
}

detail::Node& Tensor::node() const {
  if (!node_) throw DomainError("Tensor: use of an undefined tensor handle");
  return *node_;
}

detail::Node& Tape::checked(const Tensor& t, const char* op) const {
  Node& n = t.node();
  if (n.owner != this)
    throw DomainError(std::string(op) + ": tensor does not belong to this tape");
  return n;
}

Tensor Tape::record(Shape shape, std::vector<double> values,
                    const std::vector<Tensor>& parents,
                    std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->values = std::move(values);
  n->owner = this;
  n->id = static_cast<std::int64_t>(nodes_.size());
  bool req = false;
  for (const Tensor& p : parents) req = req || p.node().requires_grad;
  n->requires_grad = req;
  if (req) n->backward = std::move(backward_fn);
  nodes_.push_back(n);
  return Tensor(n);
}

Tensor Tape::leaf(Shape shape, std::vector<double> values, bool grad_enabled) {
  if (shape_numel(shape) != static_cast<std::int64_t>(values.size()))
    throw ShapeError("leaf: shape " + shape_str(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("leaf: non-finite value rejected");
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->values = std::move(values);
  n->owner = this;
  n->id = static_cast<std::int64_t>(nodes_.size());
  n->leaf = true;
  n->requires_grad = grad_enabled;
  nodes_.push_back(n);
  return Tensor(n);
}

Tensor Tape::zeros(Shape shape, bool grad_enabled) {
  std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)), 0.0);
  return leaf(std::move(shape), std::move(v), grad_enabled);
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  Node& na = checked(a, "add");
  Node& nb = checked(b, "add");
  check_same_shape("add", na, nb);
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.values[i] + nb.values[i];
  NodePtr pa = a.node_, pb = b.node_;
  return record(na.shape, std::move(out), {a, b}, [pa, pb](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa->requires_grad) detail::accumulate(*pa, i, self.grad[i]);
      if (pb->requires_grad) detail::accumulate(*pb, i, self.grad[i]);
    }
  });
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  Node& na = checked(a, "sub");
  Node& nb = checked(b, "sub");
  check_same_shape("sub", na, nb);
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.values[i] - nb.values[i];
  NodePtr pa = a.node_, pb = b.node_;
  return record(na.shape, std::move(out), {a, b}, [pa, pb](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa->requires_grad) detail::accumulate(*pa, i, self.grad[i]);
      if (pb->requires_grad) detail::accumulate(*pb, i, -self.grad[i]);
    }
  });
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  Node& na = checked(a, "mul");
  Node& nb = checked(b, "mul");
  check_same_shape("mul", na, nb);
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.values[i] * nb.values[i];
  NodePtr pa = a.node_, pb = b.node_;
  return record(na.shape, std::move(out), {a, b}, [pa, pb](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa->requires_grad) detail::accumulate(*pa, i, self.grad[i] * pb->values[i]);
      if (pb->requires_grad) detail::accumulate(*pb, i, self.grad[i] * pa->values[i]);
    }
  });
}

Tensor Tape::scale(const Tensor& a, double s) {
  Node& na = checked(a, "scale");
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.values[i] * s;
  NodePtr pa = a.node_;
  return record(na.shape, std::move(out), {a}, [pa, s](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      detail::accumulate(*pa, i, self.grad[i] * s);
  });
}

Tensor Tape::tanh(const Tensor& a) {
  Node& na = checked(a, "tanh");
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(na.values[i]);
  NodePtr pa = a.node_;
  return record(na.shape, std::move(out), {a}, [pa](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      detail::accumulate(*pa, i, self.grad[i] * (1.0 - self.values[i] * self.values[i]));
  });
}

Tensor Tape::relu(const Tensor& a) {
  Node& na = checked(a, "relu");
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.values[i] > 0.0 ? na.values[i] : 0.0;
  NodePtr pa = a.node_;
  return record(na.shape, std::move(out), {a}, [pa](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (pa->values[i] > 0.0) detail::accumulate(*pa, i, self.grad[i]);
  });
}

Tensor Tape::exp(const Tensor& a) {
  Node& na = checked(a, "exp");
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(na.values[i]);
  NodePtr pa = a.node_;
  return record(na.shape, std::move(out), {a}, [pa](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      detail::accumulate(*pa, i, self.grad[i] * self.values[i]);
  });
}

Tensor Tape::log(const Tensor& a) {
  Node& na = checked(a, "log");
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(na.values[i] > 0.0))
      throw DomainError("log: input must be strictly positive, got " +
                        std::to_string(na.values[i]));
    out[i] = std::log(na.values[i]);
  }
  NodePtr pa = a.node_;
  return record(na.shape, std::move(out), {a}, [pa](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      detail::accumulate(*pa, i, self.grad[i] / pa->values[i]);
  });
}

Tensor Tape::pow_elem(const Tensor& a, double p) {
  Node& na = checked(a, "pow_elem");
  const bool integral = p == std::floor(p);
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double x = na.values[i];
    if (x < 0.0 && !integral)
      throw DomainError("pow_elem: negative base with non-integer exponent");
    if (x == 0.0 && p < 0.0) throw DomainError("pow_elem: zero base with negative exponent");
    out[i] = std::pow(x, p);
  }
  NodePtr pa = a.node_;
  return record(na.shape, std::move(out), {a}, [pa, p](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      detail::accumulate(*pa, i, self.grad[i] * p * std::pow(pa->values[i], p - 1.0));
  });
}

Tensor Tape::add_rows(const Tensor& a, const Tensor& b) {
  Node& na = checked(a, "add_rows");
  Node& nb = checked(b, "add_rows");
  if (nb.shape.size() > na.shape.size() ||
      !std::equal(nb.shape.rbegin(), nb.shape.rend(), na.shape.rbegin()))
    shape_fail("add_rows", na.shape, nb.shape);
  const std::size_t bn = nb.values.size();
  std::vector<double> out(na.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na.values[i] + nb.values[i % bn];
  NodePtr pa = a.node_, pb = b.node_;
  return record(na.shape, std::move(out), {a, b}, [pa, pb, bn](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa->requires_grad) detail::accumulate(*pa, i, self.grad[i]);
      if (pb->requires_grad) detail::accumulate(*pb, i % bn, self.grad[i]);
    }
  });
}

// ---------------------------------------------------------------------------
// matrix
// ---------------------------------------------------------------------------

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  Node& na = checked(a, "matmul");
  Node& nb = checked(b, "matmul");
  const Shape& sa = na.shape;
  const Shape& sb = nb.shape;
  if (sa.size() < 2 || sa.size() != sb.size()) shape_fail("matmul", sa, sb);
  if (!std::equal(sa.begin(), sa.end() - 2, sb.begin())) shape_fail("matmul", sa, sb);
  const std::int64_t M = sa[sa.size() - 2], K = sa[sa.size() - 1];
  const std::int64_t K2 = sb[sb.size() - 2], N = sb[sb.size() - 1];
  if (K != K2) shape_fail("matmul", sa, sb);
  std::int64_t batch = 1;
  for (std::size_t i = 0; i + 2 < sa.size(); ++i) batch *= sa[i];

  Shape out_shape(sa.begin(), sa.end() - 2);
  out_shape.push_back(static_cast<int>(M));
  out_shape.push_back(static_cast<int>(N));
  std::vector<double> out(static_cast<std::size_t>(batch * M * N), 0.0);
  const double* A = na.values.data();
  const double* B = nb.values.data();
  for (std::int64_t g = 0; g < batch; ++g) {
    const double* Ab = A + g * M * K;
    const double* Bb = B + g * K * N;
    double* Cb = out.data() + g * M * N;
    for (std::int64_t i = 0; i < M; ++i)
      for (std::int64_t k = 0; k < K; ++k) {
        const double av = Ab[i * K + k];
        if (av == 0.0) continue;
        const double* brow = Bb + k * N;
        double* crow = Cb + i * N;
        for (std::int64_t j = 0; j < N; ++j) crow[j] += av * brow[j];
      }
  }
  NodePtr pa = a.node_, pb = b.node_;
  return record(std::move(out_shape), std::move(out), {a, b},
                [pa, pb, batch, M, K, N](Node& self) {
    const double* G = self.grad.data();
    if (pa->requires_grad) {
      detail::ensure_grad(*pa);
      // dA = dC * B^T : dA[i,k] = dot(dC[i,:], B[k,:])
      for (std::int64_t g = 0; g < batch; ++g) {
        const double* Gb = G + g * M * N;
        const double* Bb = pb->values.data() + g * K * N;
        double* dAb = pa->grad.data() + g * M * K;
        for (std::int64_t i = 0; i < M; ++i)
          for (std::int64_t k = 0; k < K; ++k) {
            const double* grow = Gb + i * N;
            const double* brow = Bb + k * N;
            double s = 0.0;
            for (std::int64_t j = 0; j < N; ++j) s += grow[j] * brow[j];
            dAb[i * K + k] += s;
          }
      }
    }
    if (pb->requires_grad) {
      detail::ensure_grad(*pb);
      // dB = A^T * dC : dB[k,j] += A[i,k] * dC[i,j]
      for (std::int64_t g = 0; g < batch; ++g) {
        const double* Gb = G + g * M * N;
        const double* Ab = pa->values.data() + g * M * K;
        double* dBb = pb->grad.data() + g * K * N;
        for (std::int64_t i = 0; i < M; ++i)
          for (std::int64_t k = 0; k < K; ++k) {
            const double av = Ab[i * K + k];
            if (av == 0.0) continue;
            const double* grow = Gb + i * N;
            double* drow = dBb + k * N;
            for (std::int64_t j = 0; j < N; ++j) drow[j] += av * grow[j];
          }
      }
    }
  });
}

Tensor Tape::transpose_last2(const Tensor& a) {
  Node& na = checked(a, "transpose_last2");
  const Shape& s = na.shape;
  if (s.size() < 2)
    throw ShapeError("transpose_last2: rank must be >= 2, got " + shape_str(s));
  const std::int64_t M = s[s.size() - 2], N = s[s.size() - 1];
  std::int64_t batch = 1;
  for (std::size_t i = 0; i + 2 < s.size(); ++i) batch *= s[i];
  Shape out_shape(s);
  std::swap(out_shape[out_shape.size() - 2], out_shape[out_shape.size() - 1]);
  std::vector<double> out(na.values.size());
  for (std::int64_t g = 0; g < batch; ++g)
    for (std::int64_t i = 0; i < M; ++i)
      for (std::int64_t j = 0; j < N; ++j)
        out[g * M * N + j * M + i] = na.values[g * M * N + i * N + j];
  NodePtr pa = a.node_;
  return record(std::move(out_shape), std::move(out), {a}, [pa, batch, M, N](Node& self) {
    for (std::int64_t g = 0; g < batch; ++g)
      for (std::int64_t i = 0; i < M; ++i)
        for (std::int64_t j = 0; j < N; ++j)
          detail::accumulate(*pa, g * M * N + i * N + j,
                             self.grad[g * M * N + j * M + i]);
  });
}

// ---------------------------------------------------------------------------
// row ops (last dimension)
// ---------------------------------------------------------------------------

Tensor Tape::softmax_rows(const Tensor& a) {
  Node& na = checked(a, "softmax_rows");
  const std::int64_t C = last_dim(na.shape);
  const std::int64_t rows = static_cast<std::int64_t>(na.values.size()) / C;
  std::vector<double> out(na.values.size());
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* x = na.values.data() + r * C;
    double* y = out.data() + r * C;
    double m = x[0];
    for (std::int64_t c = 1; c < C; ++c) m = std::max(m, x[c]);
    double z = 0.0;
    for (std::int64_t c = 0; c < C; ++c) {
      y[c] = std::exp(x[c] - m);
      z += y[c];
    }
    for (std::int64_t c = 0; c < C; ++c) y[c] /= z;
  }
  NodePtr pa = a.node_;
  return record(na.shape, std::move(out), {a}, [pa, rows, C](Node& self) {
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* p = self.values.data() + r * C;
      const double* g = self.grad.data() + r * C;
      double dot = 0.0;
      for (std::int64_t c = 0; c < C; ++c) dot += g[c] * p[c];
      for (std::int64_t c = 0; c < C; ++c)
        detail::accumulate(*pa, r * C + c, p[c] * (g[c] - dot));
    }
  });
}

Tensor Tape::l1_normalize_rows(const Tensor& a) {
  Node& na = checked(a, "l1_normalize_rows");
  const std::int64_t C = last_dim(na.shape);
  const std::int64_t rows = static_cast<std::int64_t>(na.values.size()) / C;
  std::vector<double> out(na.values.size());
  std::vector<double> denom(static_cast<std::size_t>(rows));
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* x = na.values.data() + r * C;
    double d = 0.0;
    for (std::int64_t c = 0; c < C; ++c) d += std::abs(x[c]);
    if (d == 0.0) throw DomainError("l1_normalize_rows: all-zero row " + std::to_string(r));
    denom[static_cast<std::size_t>(r)] = d;
    for (std::int64_t c = 0; c < C; ++c) out[r * C + c] = x[c] / d;
  }
  NodePtr pa = a.node_;
  auto dptr = std::make_shared<std::vector<double>>(std::move(denom));
  return record(na.shape, std::move(out), {a}, [pa, rows, C, dptr](Node& self) {
    for (std::int64_t r = 0; r < rows; ++r) {
      const double d = (*dptr)[static_cast<std::size_t>(r)];
      const double* g = self.grad.data() + r * C;
      const double* y = self.values.data() + r * C;
      double gy = 0.0;
      for (std::int64_t c = 0; c < C; ++c) gy += g[c] * y[c];
      for (std::int64_t c = 0; c < C; ++c) {
        const double x = pa->values[r * C + c];
        const double sgn = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        detail::accumulate(*pa, r * C + c, (g[c] - sgn * gy) / d);
      }
    }
  });
}

Tensor Tape::layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        double eps) {
  Node& nx = checked(x, "layer_norm");
  Node& ng = checked(gamma, "layer_norm");
  Node& nb = checked(beta, "layer_norm");
  const std::int64_t D = last_dim(nx.shape);
  if (ng.shape != Shape{static_cast<int>(D)} || nb.shape != Shape{static_cast<int>(D)})
    throw ShapeError("layer_norm: gamma/beta must have shape (" + std::to_string(D) +
                     "), got " + shape_str(ng.shape) + " and " + shape_str(nb.shape));
  const std::int64_t rows = static_cast<std::int64_t>(nx.values.size()) / D;
  std::vector<double> out(nx.values.size());
  auto xhat = std::make_shared<std::vector<double>>(nx.values.size());
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows));
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* xr = nx.values.data() + r * D;
    double mu = 0.0;
    for (std::int64_t c = 0; c < D; ++c) mu += xr[c];
    mu /= static_cast<double>(D);
    double var = 0.0;
    for (std::int64_t c = 0; c < D; ++c) {
      const double dv = xr[c] - mu;
      var += dv * dv;
    }
    var /= static_cast<double>(D);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[static_cast<std::size_t>(r)] = is;
    for (std::int64_t c = 0; c < D; ++c) {
      const double xh = (xr[c] - mu) * is;
      (*xhat)[static_cast<std::size_t>(r * D + c)] = xh;
      out[r * D + c] = ng.values[c] * xh + nb.values[c];
    }
  }
  NodePtr px = x.node_, pg = gamma.node_, pb = beta.node_;
  return record(nx.shape, std::move(out), {x, gamma, beta},
                [px, pg, pb, rows, D, xhat, inv_std](Node& self) {
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* g = self.grad.data() + r * D;
      const double* xh = xhat->data() + r * D;
      const double is = (*inv_std)[static_cast<std::size_t>(r)];
      double sum_dxh = 0.0, sum_dxh_xh = 0.0;
      for (std::int64_t c = 0; c < D; ++c) {
        const double dxh = g[c] * pg->values[c];
        sum_dxh += dxh;
        sum_dxh_xh += dxh * xh[c];
        if (pg->requires_grad) detail::accumulate(*pg, c, g[c] * xh[c]);
        if (pb->requires_grad) detail::accumulate(*pb, c, g[c]);
      }
      if (px->requires_grad) {
        const double inv_d = 1.0 / static_cast<double>(D);
        for (std::int64_t c = 0; c < D; ++c) {
          const double dxh = g[c] * pg->values[c];
          detail::accumulate(*px, r * D + c,
                             is * (dxh - inv_d * sum_dxh - inv_d * xh[c] * sum_dxh_xh));
        }
      }
    }
  });
}

Tensor Tape::kl_div_rows(const std::vector<double>& target, const Tensor& p) {
  Node& np = checked(p, "kl_div_rows");
  if (target.size() != np.values.size())
    throw ShapeError("kl_div_rows: target has " + std::to_string(target.size()) +
                     " entries, p has shape " + shape_str(np.shape));
  const std::int64_t C = last_dim(np.shape);
  const std::int64_t rows = static_cast<std::int64_t>(np.values.size()) / C;
  Shape out_shape(np.shape.begin(), np.shape.end() - (np.shape.empty() ? 0 : 1));
  if (out_shape.empty()) out_shape.push_back(1);
  std::vector<double> out(static_cast<std::size_t>(rows), 0.0);
  for (std::int64_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::int64_t c = 0; c < C; ++c) {
      const double t = target[static_cast<std::size_t>(r * C + c)];
      if (t > 0.0) s += t * (std::log(t) - std::log(np.values[r * C + c]));
    }
    out[static_cast<std::size_t>(r)] = s;
  }
  NodePtr pp = p.node_;
  auto tgt = std::make_shared<std::vector<double>>(target);
  return record(std::move(out_shape), std::move(out), {p}, [pp, tgt, rows, C](Node& self) {
    for (std::int64_t r = 0; r < rows; ++r) {
      const double g = self.grad[static_cast<std::size_t>(r)];
      if (g == 0.0) continue;
      for (std::int64_t c = 0; c < C; ++c) {
        const double t = (*tgt)[static_cast<std::size_t>(r * C + c)];
        if (t > 0.0) detail::accumulate(*pp, r * C + c, -g * t / pp->values[r * C + c]);
      }
    }
  });
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

Tensor Tape::sum(const Tensor& a) {
  Node& na = checked(a, "sum");
  double s = 0.0;
  for (double v : na.values) s += v;
  NodePtr pa = a.node_;
  return record({1}, {s}, {a}, [pa](Node& self) {
    const double g = self.grad[0];
    for (std::size_t i = 0; i < pa->values.size(); ++i) detail::accumulate(*pa, i, g);
  });
}

Tensor Tape::mean(const Tensor& a) {
  Node& na = checked(a, "mean");
  if (na.values.empty()) throw ShapeError("mean: empty tensor");
  double s = 0.0;
  for (double v : na.values) s += v;
  const double inv_n = 1.0 / static_cast<double>(na.values.size());
  NodePtr pa = a.node_;
  return record({1}, {s * inv_n}, {a}, [pa, inv_n](Node& self) {
    const double g = self.grad[0] * inv_n;
    for (std::size_t i = 0; i < pa->values.size(); ++i) detail::accumulate(*pa, i, g);
  });
}

Tensor Tape::squared_l2_diff(const Tensor& a, const Tensor& b) {
  Node& na = checked(a, "squared_l2_diff");
  Node& nb = checked(b, "squared_l2_diff");
  check_same_shape("squared_l2_diff", na, nb);
  double s = 0.0;
  for (std::size_t i = 0; i < na.values.size(); ++i) {
    const double d = na.values[i] - nb.values[i];
    s += d * d;
  }
  NodePtr pa = a.node_, pb = b.node_;
  return record({1}, {s}, {a, b}, [pa, pb](Node& self) {
    const double g = self.grad[0];
    for (std::size_t i = 0; i < pa->values.size(); ++i) {
      const double d = 2.0 * (pa->values[i] - pb->values[i]) * g;
      if (pa->requires_grad) detail::accumulate(*pa, i, d);
      if (pb->requires_grad) detail::accumulate(*pb, i, -d);
    }
  });
}

// ---------------------------------------------------------------------------
// structure
// ---------------------------------------------------------------------------

Tensor Tape::stop_gradient(const Tensor& a) {
  Node& na = checked(a, "stop_gradient");
  // Recorded with no parents: requires_grad is false and nothing flows back.
  return record(na.shape, na.values, {}, nullptr);
}

Tensor Tape::concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Node& first = checked(parts[0], "concat");
  const int rank = static_cast<int>(first.shape.size());
  if (axis < 0 || axis >= rank)
    throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for " +
                     shape_str(first.shape));
  Shape out_shape = first.shape;
  std::int64_t total_axis = 0;
  for (const Tensor& t : parts) {
    Node& n = checked(t, "concat");
    if (static_cast<int>(n.shape.size()) != rank) shape_fail("concat", first.shape, n.shape);
    for (int i = 0; i < rank; ++i)
      if (i != axis && n.shape[i] != first.shape[i]) shape_fail("concat", first.shape, n.shape);
    total_axis += n.shape[axis];
  }
  out_shape[axis] = static_cast<int>(total_axis);
  AxisSplit os = split_axis(out_shape, axis);
  std::vector<double> out(static_cast<std::size_t>(shape_numel(out_shape)));
  std::int64_t offset = 0;
  for (const Tensor& t : parts) {
    const Node& n = *t.node_;
    const std::int64_t len = n.shape[axis];
    for (std::int64_t o = 0; o < os.outer; ++o)
      std::copy_n(n.values.data() + o * len * os.inner, len * os.inner,
                  out.data() + (o * os.len + offset) * os.inner);
    offset += len;
  }
  std::vector<NodePtr> pn;
  pn.reserve(parts.size());
  for (const Tensor& t : parts) pn.push_back(t.node_);
  return record(std::move(out_shape), std::move(out), parts, [pn, os, axis](Node& self) {
    std::int64_t offset = 0;
    for (const NodePtr& p : pn) {
      const std::int64_t len = p->shape[static_cast<std::size_t>(axis)];
      if (p->requires_grad) {
        detail::ensure_grad(*p);
        for (std::int64_t o = 0; o < os.outer; ++o) {
          const double* src = self.grad.data() + (o * os.len + offset) * os.inner;
          double* dst = p->grad.data() + o * len * os.inner;
          for (std::int64_t i = 0; i < len * os.inner; ++i) dst[i] += src[i];
        }
      }
      offset += len;
    }
  });
}

Tensor Tape::slice(const Tensor& a, int axis, int start, int len) {
  Node& na = checked(a, "slice");
  const int rank = static_cast<int>(na.shape.size());
  if (axis < 0 || axis >= rank)
    throw ShapeError("slice: axis " + std::to_string(axis) + " out of range for " +
                     shape_str(na.shape));
  if (start < 0 || len <= 0 || start + len > na.shape[axis])
    throw ShapeError("slice: range [" + std::to_string(start) + "," +
                     std::to_string(start + len) + ") out of bounds for " +
                     shape_str(na.shape));
  AxisSplit as = split_axis(na.shape, axis);
  Shape out_shape = na.shape;
  out_shape[axis] = len;
  std::vector<double> out(static_cast<std::size_t>(shape_numel(out_shape)));
  for (std::int64_t o = 0; o < as.outer; ++o)
    std::copy_n(na.values.data() + (o * as.len + start) * as.inner, len * as.inner,
                out.data() + o * len * as.inner);
  NodePtr pa = a.node_;
  return record(std::move(out_shape), std::move(out), {a}, [pa, as, start, len](Node& self) {
    detail::ensure_grad(*pa);
    for (std::int64_t o = 0; o < as.outer; ++o) {
      const double* src = self.grad.data() + o * len * as.inner;
      double* dst = pa->grad.data() + (o * as.len + start) * as.inner;
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(len) * as.inner; ++i)
        dst[i] += src[i];
    }
  });
}

Tensor Tape::reshape(const Tensor& a, Shape shape) {
  Node& na = checked(a, "reshape");
  if (shape_numel(shape) != static_cast<std::int64_t>(na.values.size()))
    shape_fail("reshape", na.shape, shape);
  NodePtr pa = a.node_;
  return record(std::move(shape), na.values, {a}, [pa](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      detail::accumulate(*pa, i, self.grad[i]);
  });
}

Tensor Tape::rows_lookup(const Tensor& table, const std::vector<int>& ids) {
  Node& nt = checked(table, "rows_lookup");
  if (nt.shape.size() != 2)
    throw ShapeError("rows_lookup: table must be rank 2, got " + shape_str(nt.shape));
  const std::int64_t V = nt.shape[0], D = nt.shape[1];
  for (int id : ids)
    if (id < 0 || id >= V)
      throw ShapeError("rows_lookup: index " + std::to_string(id) +
                       " out of range for table " + shape_str(nt.shape));
  std::vector<double> out(ids.size() * static_cast<std::size_t>(D));
  for (std::size_t r = 0; r < ids.size(); ++r)
    std::copy_n(nt.values.data() + static_cast<std::int64_t>(ids[r]) * D, D,
                out.data() + r * static_cast<std::size_t>(D));
  NodePtr pt = table.node_;
  auto idv = std::make_shared<std::vector<int>>(ids);
  return record({static_cast<int>(ids.size()), static_cast<int>(D)}, std::move(out),
                {table}, [pt, idv, D](Node& self) {
    detail::ensure_grad(*pt);
    for (std::size_t r = 0; r < idv->size(); ++r) {
      const double* src = self.grad.data() + r * static_cast<std::size_t>(D);
      double* dst = pt->grad.data() + static_cast<std::int64_t>((*idv)[r]) * D;
      for (std::int64_t c = 0; c < D; ++c) dst[c] += src[c];
    }
  });
}

// ---------------------------------------------------------------------------
// backward
// ---------------------------------------------------------------------------

void Tape::backward(const Tensor& loss) {
  if (backward_done_) throw DomainError("backward: tape already swept; build a fresh tape");
  Node& ln = checked(loss, "backward");
  if (ln.values.size() != 1)
    throw ShapeError("backward: loss must be scalar, got " + shape_str(ln.shape));
  ln.grad.assign(1, 1.0);
  for (std::int64_t i = ln.id; i >= 0; --i) {
    Node& n = *nodes_[static_cast<std::size_t>(i)];
    if (n.grad.empty() || !n.requires_grad) continue;
    if (n.backward) n.backward(n);
  }
  for (const NodePtr& n : nodes_)
    if (n->leaf && n->requires_grad && n->grad.empty())
      n->grad.assign(n->values.size(), 0.0);
  backward_done_ = true;
}

const std::vector<double>& Tape::grad(const Tensor& t) const {
  const Node& n = checked(t, "grad");
  if (n.grad.empty())
    throw DomainError("grad: no gradient recorded for this node (did backward run?)");
  return n.grad;
}

// ---------------------------------------------------------------------------
// grad_check
// ---------------------------------------------------------------------------

double grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f,
                  const Shape& shape, const std::vector<double>& x0,
                  double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("grad_check: epsilon must be positive");
  std::vector<double> analytic;
  {
    Tape tape;
    Tensor x = tape.leaf(shape, x0, true);
    Tensor loss = f(tape, x);
    if (loss.size() != 1)
      throw DomainError("grad_check: f must be scalar-valued, got " +
                        shape_str(loss.shape()));
    tape.backward(loss);
    analytic = tape.grad(x);
  }
  auto eval = [&](const std::vector<double>& xv) {
    Tape tape;
    Tensor x = tape.leaf(shape, xv, false);
    return f(tape, x).scalar();
  };
  double worst = 0.0;
  std::vector<double> xv = x0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double keep = xv[i];
    xv[i] = keep + epsilon;
    const double up = eval(xv);
    xv[i] = keep - epsilon;
    const double dn = eval(xv);
    xv[i] = keep;
    const double numeric = (up - dn) / (2.0 * epsilon);
    const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace lada
