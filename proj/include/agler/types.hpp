// Labelled point sets and functions on them. Point identity is the label;
// coordinates are only needed when an analytic kernel has to be evaluated.
#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "agler/errors.hpp"

namespace agler {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Largest absolute entry; zero for empty matrices.
inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

struct Point {
  std::string label;
  std::optional<Complex> coordinate;
};

// Ordered list of points with pairwise distinct labels. The order is fixed
// and determines the block layout of every Gram matrix built over the set.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::vector<Point> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }

  bool contains(const std::string& label) const;
  std::size_t index_of(const std::string& label) const;

  // Order-preserving containment: the labels of this set appear in `other`
  // with strictly increasing indices.
  bool is_sublist_of(const PointSet& other) const;

  PointSet sublist(const std::vector<std::string>& labels) const;
  PointSet with_appended(Point p) const;

 private:
  std::vector<Point> points_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Complex-valued function given by its values on a PointSet.
class ScalarFunction {
 public:
  ScalarFunction() = default;
  ScalarFunction(PointSet domain, std::vector<Complex> values);

  static ScalarFunction constant(const PointSet& domain, Complex c);
  static ScalarFunction from_map(const PointSet& domain,
                                 const std::map<std::string, Complex>& values);

  const PointSet& domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }
  Complex operator[](std::size_t i) const { return values_[i]; }
  const std::vector<Complex>& values() const { return values_; }

  Complex at(const std::string& label) const;
  bool defined_at(const std::string& label) const;

  ScalarFunction restricted_to(const PointSet& sub) const;
  ScalarFunction with_appended(Point p, Complex value) const;

 private:
  PointSet domain_;
  std::vector<Complex> values_;
};

}  // namespace agler
