#include <cmath>
#include <stdexcept>

#include "falcon/dataset.hpp"

namespace falcon {

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::L2:
      return "l2";
    case Metric::InnerProduct:
      return "ip";
    case Metric::Cosine:
      return "cosine";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "l2" || name == "L2") return Metric::L2;
  if (name == "ip" || name == "inner_product" || name == "InnerProduct") return Metric::InnerProduct;
  if (name == "cosine" || name == "Cosine") return Metric::Cosine;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

namespace {

float squared_l2(const float* a, const float* b, std::size_t dim) noexcept {
  float acc = 0.0f;
  for (std::size_t i = 0; i < dim; ++i) {
    const float d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

float dot(const float* a, const float* b, std::size_t dim) noexcept {
  float acc = 0.0f;
  for (std::size_t i = 0; i < dim; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

float distance_unchecked(Metric metric, const float* a, const float* b, std::size_t dim) noexcept {
  switch (metric) {
    case Metric::L2:
      return squared_l2(a, b, dim);
    case Metric::InnerProduct:
      return -dot(a, b, dim);
    case Metric::Cosine: {
      // sqrt(x * x) == x exactly, so identical inputs give exactly 0.
      double ab = 0.0, aa = 0.0, bb = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        ab += static_cast<double>(a[i]) * b[i];
        aa += static_cast<double>(a[i]) * a[i];
        bb += static_cast<double>(b[i]) * b[i];
      }
      if (aa == 0.0 || bb == 0.0) return 1.0f;
      return static_cast<float>(1.0 - ab / std::sqrt(aa * bb));
    }
  }
  return kInfinity;
}

float distance(Metric metric, std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("distance: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  if (metric == Metric::Cosine) {
    if (dot(a.data(), a.data(), a.size()) == 0.0f || dot(b.data(), b.data(), b.size()) == 0.0f) {
      throw std::invalid_argument("distance: zero vector under cosine metric");
    }
  }
  return distance_unchecked(metric, a.data(), b.data(), a.size());
}

}  // namespace falcon
