#include "agler/types.hpp"

namespace agler {

PointSet::PointSet(std::vector<Point> points) : points_(std::move(points)) {
  index_.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    auto [it, inserted] = index_.emplace(points_[i].label, i);
    (void)it;
    if (!inserted) {
      throw Error(ErrorCode::invalid_input,
                  "duplicate point label '" + points_[i].label + "'");
    }
  }
}

bool PointSet::contains(const std::string& label) const {
  return index_.find(label) != index_.end();
}

std::size_t PointSet::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw Error(ErrorCode::invalid_input,
                "point '" + label + "' not in point set");
  }
  return it->second;
}

bool PointSet::is_sublist_of(const PointSet& other) const {
  std::size_t last = 0;
  bool first = true;
  for (const Point& p : points_) {
    if (!other.contains(p.label)) return false;
    const std::size_t idx = other.index_of(p.label);
    if (!first && idx <= last) return false;
    last = idx;
    first = false;
  }
  return true;
}

PointSet PointSet::sublist(const std::vector<std::string>& labels) const {
  std::vector<Point> selected;
  selected.reserve(labels.size());
  std::size_t last = 0;
  bool first = true;
  for (const std::string& label : labels) {
    const std::size_t idx = index_of(label);
    if (!first && idx <= last) {
      throw Error(ErrorCode::invalid_input,
                  "labels do not form an order-preserving sublist at '" +
                      label + "'");
    }
    selected.push_back(points_[idx]);
    last = idx;
    first = false;
  }
  return PointSet(std::move(selected));
}

PointSet PointSet::with_appended(Point p) const {
  std::vector<Point> pts = points_;
  pts.push_back(std::move(p));
  return PointSet(std::move(pts));
}

ScalarFunction::ScalarFunction(PointSet domain, std::vector<Complex> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (domain_.size() != values_.size()) {
    throw Error(ErrorCode::invalid_input,
                "function values do not match the declared point set");
  }
}

ScalarFunction ScalarFunction::constant(const PointSet& domain, Complex c) {
  return ScalarFunction(domain, std::vector<Complex>(domain.size(), c));
}

ScalarFunction ScalarFunction::from_map(
    const PointSet& domain, const std::map<std::string, Complex>& values) {
  std::vector<Complex> vals;
  vals.reserve(domain.size());
  for (const Point& p : domain.points()) {
    auto it = values.find(p.label);
    if (it == values.end()) {
      throw Error(ErrorCode::invalid_input,
                  "function missing a value at '" + p.label + "'");
    }
    vals.push_back(it->second);
  }
  return ScalarFunction(domain, std::move(vals));
}

Complex ScalarFunction::at(const std::string& label) const {
  return values_[domain_.index_of(label)];
}

bool ScalarFunction::defined_at(const std::string& label) const {
  return domain_.contains(label);
}

ScalarFunction ScalarFunction::restricted_to(const PointSet& sub) const {
  std::vector<Complex> vals;
  vals.reserve(sub.size());
  for (const Point& p : sub.points()) vals.push_back(at(p.label));
  return ScalarFunction(sub, std::move(vals));
}

ScalarFunction ScalarFunction::with_appended(Point p, Complex value) const {
  std::vector<Complex> vals = values_;
  vals.push_back(value);
  return ScalarFunction(domain_.with_appended(std::move(p)), std::move(vals));
}

}  // namespace agler
