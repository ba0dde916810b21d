#include "lada/rng.hpp"

#include <cmath>
#include <numeric>

namespace lada {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Rng::normal() {
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("Rng::gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost: G(a) = G(a+1) * U^(1/a).
    double u = 1.0 - uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = 1.0 - uniform();  // (0, 1]
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("Rng::beta: parameters must be positive");
  double ga = gamma(a);
  double gb = gamma(b);
  double s = ga + gb;
  if (s <= 0.0) return 0.5;  // both underflowed; symmetric fallback
  return ga / s;
}

Rng Rng::fork(std::uint64_t stream) const {
  return Rng(mix64(seed_ ^ mix64(stream + 1)));
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  shuffle(p);
  return p;
}

}  // namespace lada
