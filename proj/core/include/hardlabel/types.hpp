#ifndef HARDLABEL_TYPES_HPP
#define HARDLABEL_TYPES_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hardlabel {

/// A point in the classifier's input space.
using FeatureVector = std::vector<double>;

/// Zero-based class index in {0, ..., K-1}.
struct Label {
  int value = 0;

  friend auto operator<=>(const Label&, const Label&) = default;
};

// Error hierarchy. Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Model or dataset parse failure. `where` names the offending location
/// (a JSON path or a file:line pair).
class LoadError : public Error {
 public:
  LoadError(const std::string& where, const std::string& what)
      : Error(where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Thrown by a budgeted oracle handle on the first query past its limit.
class QueryBudgetExhausted : public Error {
 public:
  QueryBudgetExhausted() : Error("query budget exhausted") {}
};

/// Per-coordinate box constraints. An empty optional means unbounded.
class DomainBounds {
 public:
  DomainBounds() = default;

  /// Same [lower, upper] interval on every one of `d` coordinates.
  static DomainBounds box(std::size_t d, double lower, double upper);
  static DomainBounds unbounded() { return {}; }

  DomainBounds(std::vector<std::optional<double>> lower,
               std::vector<std::optional<double>> upper);

  bool is_unbounded() const { return lower_.empty() && upper_.empty(); }
  /// True when every coordinate has both a lower and an upper bound.
  bool is_finite_box(std::size_t d) const;
  /// Euclidean diameter of a finite box; nullopt when any side is open.
  std::optional<double> diameter(std::size_t d) const;

  /// Number of coordinates described, 0 for fully unbounded.
  std::size_t size() const { return lower_.size(); }
  std::optional<double> lower(std::size_t i) const;
  std::optional<double> upper(std::size_t i) const;

  /// Projects x into the box. Idempotent; unbounded coordinates pass through.
  FeatureVector clamp(std::span<const double> x) const;

 private:
  std::vector<std::optional<double>> lower_;
  std::vector<std::optional<double>> upper_;
};

inline FeatureVector clamp_to_domain(std::span<const double> x,
                                     const DomainBounds& bounds) {
  return bounds.clamp(x);
}

// Small dense vector helpers.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double distance2(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

}  // namespace hardlabel

#endif  // HARDLABEL_TYPES_HPP
