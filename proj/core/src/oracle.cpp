#include "hardlabel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hardlabel {

DomainBounds DomainBounds::box(std::size_t d, double lower, double upper) {
  return DomainBounds(std::vector<std::optional<double>>(d, lower),
                      std::vector<std::optional<double>>(d, upper));
}

DomainBounds::DomainBounds(std::vector<std::optional<double>> lower,
                           std::vector<std::optional<double>> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw InvalidInput("bounds: lower and upper have different lengths");
  }
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (lower_[i] && upper_[i] && *lower_[i] > *upper_[i]) {
      throw InvalidInput("bounds: lower > upper at coordinate " +
                         std::to_string(i));
    }
  }
}

bool DomainBounds::is_finite_box(std::size_t d) const {
  if (lower_.size() != d || d == 0) return false;
  for (std::size_t i = 0; i < d; ++i) {
    if (!lower_[i] || !upper_[i]) return false;
  }
  return true;
}

std::optional<double> DomainBounds::diameter(std::size_t d) const {
  if (!is_finite_box(d)) return std::nullopt;
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double w = *upper_[i] - *lower_[i];
    s += w * w;
  }
  return std::sqrt(s);
}

std::optional<double> DomainBounds::lower(std::size_t i) const {
  return i < lower_.size() ? lower_[i] : std::nullopt;
}

std::optional<double> DomainBounds::upper(std::size_t i) const {
  return i < upper_.size() ? upper_[i] : std::nullopt;
}

FeatureVector DomainBounds::clamp(std::span<const double> x) const {
  FeatureVector out(x.begin(), x.end());
  if (is_unbounded()) return out;
  if (lower_.size() != x.size()) {
    throw InvalidInput("clamp: bounds describe " +
                       std::to_string(lower_.size()) +
                       " coordinates, point has " + std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (lower_[i]) out[i] = std::max(out[i], *lower_[i]);
    if (upper_[i]) out[i] = std::min(out[i], *upper_[i]);
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(),
                     [](double v) { return std::isfinite(v); });
}

Oracle::Oracle(std::shared_ptr<const Model> model, DomainBounds bounds)
    : model_(std::move(model)), bounds_(std::move(bounds)) {
  if (!model_) throw InvalidInput("oracle: null model");
  std::size_t d = model_->dimension();
  if (d != 0 && !bounds_.is_unbounded() && bounds_.size() != d) {
    throw InvalidInput("oracle: bounds dimension " +
                       std::to_string(bounds_.size()) +
                       " does not match model dimension " + std::to_string(d));
  }
}

Oracle::Oracle(Oracle&& other) noexcept
    : model_(std::move(other.model_)),
      bounds_(std::move(other.bounds_)),
      queries_(other.queries_.load()),
      limit_(other.limit_),
      counted_(other.counted_) {}

Oracle& Oracle::operator=(Oracle&& other) noexcept {
  model_ = std::move(other.model_);
  bounds_ = std::move(other.bounds_);
  queries_.store(other.queries_.load());
  limit_ = other.limit_;
  counted_ = other.counted_;
  return *this;
}

Label Oracle::classify(std::span<const double> x) {
  std::size_t d = model_->dimension();
  if (x.empty() || (d != 0 && x.size() != d)) {
    throw InvalidInput("classify: expected dimension " + std::to_string(d) +
                       ", got " + std::to_string(x.size()));
  }
  if (!all_finite(x)) throw InvalidInput("classify: non-finite coordinate");
  if (counted_) {
    std::uint64_t prev = queries_.fetch_add(1, std::memory_order_relaxed);
    if (limit_ && prev >= *limit_) {
      queries_.fetch_sub(1, std::memory_order_relaxed);
      throw QueryBudgetExhausted();
    }
  }
  return model_->predict(x);
}

Oracle Oracle::fresh() const { return Oracle(model_, bounds_); }

Oracle Oracle::uncounted() const {
  Oracle o(model_, bounds_);
  o.counted_ = false;
  return o;
}

}  // namespace hardlabel
