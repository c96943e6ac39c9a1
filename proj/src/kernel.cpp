#include "agler/kernel.hpp"

#include <Eigen/Eigenvalues>

namespace agler {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input:
      return "invalid-input";
    case ErrorCode::invalid_kernel:
      return "invalid-kernel";
    case ErrorCode::precondition_violated:
      return "precondition-violated";
    case ErrorCode::degenerate_compression:
      return "degenerate-compression";
    case ErrorCode::unbounded_multiplier:
      return "unbounded-multiplier";
    case ErrorCode::numerical_failure:
      return "numerical-failure";
    case ErrorCode::extension_failure:
      return "extension-failure";
    case ErrorCode::degenerate_point:
      return "degenerate-point";
    case ErrorCode::fit_failure:
      return "fit-failure";
  }
  return "unknown";
}

ExplicitTable::ExplicitTable(PointSet domain, int block_dim)
    : domain_(std::move(domain)), n_(block_dim) {
  if (n_ < 1) {
    throw Error(ErrorCode::invalid_input, "kernel block dimension must be >= 1");
  }
}

void ExplicitTable::set(const std::string& x, const std::string& y,
                        Matrix value) {
  if (value.rows() != n_ || value.cols() != n_) {
    throw Error(ErrorCode::invalid_input, "table entry has wrong block size");
  }
  std::size_t i = domain_.index_of(x);
  std::size_t j = domain_.index_of(y);
  if (i > j) {
    std::swap(i, j);
    value = value.adjoint().eval();
  }
  entries_[{i, j}] = std::move(value);
}

bool ExplicitTable::has(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return entries_.find({i, j}) != entries_.end();
}

Matrix ExplicitTable::value(std::size_t i, std::size_t j) const {
  const bool flip = i > j;
  if (flip) std::swap(i, j);
  auto it = entries_.find({i, j});
  if (it == entries_.end()) {
    throw Error(ErrorCode::invalid_input,
                "missing kernel table entry (" + domain_[i].label + ", " +
                    domain_[j].label + ")");
  }
  return flip ? it->second.adjoint() : it->second;
}

Kernel::Kernel(int n, std::string id, Body body)
    : n_(n), id_(std::move(id)), body_(std::make_shared<const Body>(std::move(body))) {}

Kernel Kernel::from_table(ExplicitTable table, std::string id) {
  const int n = table.block_dim();
  return Kernel(n, std::move(id), Body(std::move(table)));
}

Kernel Kernel::analytic(AnalyticEvaluator evaluator) {
  if (evaluator.block_dim < 1) {
    throw Error(ErrorCode::invalid_input, "kernel block dimension must be >= 1");
  }
  const int n = evaluator.block_dim;
  std::string id = evaluator.id;
  return Kernel(n, std::move(id), Body(std::move(evaluator)));
}

bool Kernel::is_explicit() const {
  if (std::holds_alternative<ExplicitTable>(*body_)) return true;
  if (const auto* ds = std::get_if<DirectSum>(body_.get())) {
    return ds->left->is_explicit() && ds->right->is_explicit();
  }
  return false;
}

const PointSet* Kernel::explicit_domain() const {
  if (const auto* table = std::get_if<ExplicitTable>(body_.get())) {
    return &table->domain();
  }
  if (const auto* ds = std::get_if<DirectSum>(body_.get())) {
    return ds->left->explicit_domain();
  }
  return nullptr;
}

Matrix Kernel::eval(const Point& x, const Point& y) const {
  if (const auto* table = std::get_if<ExplicitTable>(body_.get())) {
    return table->value(table->domain().index_of(x.label),
                        table->domain().index_of(y.label));
  }
  if (const auto* ev = std::get_if<AnalyticEvaluator>(body_.get())) {
    if (!x.coordinate || !y.coordinate) {
      throw Error(ErrorCode::invalid_input,
                  "point '" + (x.coordinate ? y.label : x.label) +
                      "' has no coordinate for analytic evaluation");
    }
    if (!ev->in_domain(*x.coordinate) || !ev->in_domain(*y.coordinate)) {
      throw Error(ErrorCode::invalid_input,
                  "point outside the domain of kernel '" + id_ + "'");
    }
    return ev->eval(*x.coordinate, *y.coordinate);
  }
  const auto& ds = std::get<DirectSum>(*body_);
  const Matrix a = ds.left->eval(x, y);
  const Matrix b = ds.right->eval(x, y);
  Matrix out = Matrix::Zero(n_, n_);
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Matrix kernel_gram(const Kernel& k, const PointSet& F) {
  const int n = k.dim();
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * F.size();
  Matrix gram(dim, dim);
  for (std::size_t i = 0; i < F.size(); ++i) {
    for (std::size_t j = 0; j < F.size(); ++j) {
      gram.block(n * i, n * j, n, n) = k.eval(F[i], F[j]);
    }
  }
  if (dim > 0) {
    const double asym = max_abs(gram - gram.adjoint());
    if (asym > tol::herm_strict_rel * (1.0 + max_abs(gram))) {
      throw Error(ErrorCode::invalid_kernel,
                  "kernel '" + k.id() + "' is not Hermitian-symmetric");
    }
  }
  return gram;
}

PsdReport psd_check(const Matrix& m, double tol) {
  if (tol < 0.0) {
    throw Error(ErrorCode::invalid_input, "psd_check tolerance must be >= 0");
  }
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::invalid_input, "psd_check needs a square matrix");
  }
  if (m.size() == 0) return {true, 0.0, 0.0};
  const double asym = max_abs(m - m.adjoint());
  if (asym > tol::herm_rel * (1.0 + max_abs(m))) {
    throw Error(ErrorCode::invalid_input,
                "matrix is not Hermitian within tolerance");
  }
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(es.eigenvalues().size() - 1);
  return {lmin >= -tol * (1.0 + lmax), lmin, lmax};
}

Kernel direct_sum(const Kernel& k1, const Kernel& k2) {
  const bool e1 = k1.is_explicit();
  const bool e2 = k2.is_explicit();
  if (e1 != e2) {
    throw Error(ErrorCode::invalid_input,
                "direct sum of explicit and analytic kernels is not defined");
  }
  if (e1) {
    const PointSet* d1 = k1.explicit_domain();
    const PointSet* d2 = k2.explicit_domain();
    if (d1->size() != d2->size()) {
      throw Error(ErrorCode::invalid_input,
                  "direct sum needs kernels on the same point set");
    }
    for (std::size_t i = 0; i < d1->size(); ++i) {
      if ((*d1)[i].label != (*d2)[i].label) {
        throw Error(ErrorCode::invalid_input,
                    "direct sum needs kernels on the same point set");
      }
    }
  }
  Kernel::DirectSum ds{std::make_shared<const Kernel>(k1),
                       std::make_shared<const Kernel>(k2)};
  return Kernel(k1.dim() + k2.dim(), k1.id() + "+" + k2.id(),
                Kernel::Body(std::move(ds)));
}

Kernel restrict_kernel(const Kernel& k, const PointSet& Y) {
  if (const auto* table = std::get_if<ExplicitTable>(k.body_.get())) {
    if (!Y.is_sublist_of(table->domain())) {
      throw Error(ErrorCode::invalid_input,
                  "restriction target is not a sublist of the kernel domain");
    }
    ExplicitTable sub(Y, k.dim());
    for (std::size_t i = 0; i < Y.size(); ++i) {
      const std::size_t pi = table->domain().index_of(Y[i].label);
      for (std::size_t j = i; j < Y.size(); ++j) {
        const std::size_t pj = table->domain().index_of(Y[j].label);
        if (table->has(pi, pj)) {
          sub.set(Y[i].label, Y[j].label, table->value(pi, pj));
        }
      }
    }
    return Kernel::from_table(std::move(sub), k.id());
  }
  if (const auto* ev = std::get_if<AnalyticEvaluator>(k.body_.get())) {
    for (const Point& p : Y.points()) {
      if (!p.coordinate || !ev->in_domain(*p.coordinate)) {
        throw Error(ErrorCode::invalid_input,
                    "point '" + p.label + "' outside the kernel domain");
      }
    }
    return k;
  }
  const auto& ds = std::get<Kernel::DirectSum>(*k.body_);
  return direct_sum(restrict_kernel(*ds.left, Y), restrict_kernel(*ds.right, Y));
}

Kernel pick_kernel(const Kernel& k, const ScalarFunction& f, double rho) {
  if (rho < 0.0) {
    throw Error(ErrorCode::invalid_input, "pick_kernel needs rho >= 0");
  }
  const PointSet& F = f.domain();
  ExplicitTable table(F, k.dim());
  for (std::size_t i = 0; i < F.size(); ++i) {
    for (std::size_t j = i; j < F.size(); ++j) {
      const Complex factor = rho * rho - f[i] * std::conj(f[j]);
      table.set(F[i].label, F[j].label, factor * k.eval(F[i], F[j]));
    }
  }
  return Kernel::from_table(std::move(table), "pick(" + k.id() + ")");
}

Kernel scalarize(const Kernel& K, const PointSet& F,
                 const std::map<std::string, Vector>& G) {
  const int n = K.dim();
  std::vector<Vector> g;
  g.reserve(F.size());
  for (const Point& p : F.points()) {
    auto it = G.find(p.label);
    if (it == G.end()) {
      throw Error(ErrorCode::invalid_input,
                  "scalarize direction missing at '" + p.label + "'");
    }
    if (it->second.size() != n) {
      throw Error(ErrorCode::invalid_input,
                  "scalarize direction at '" + p.label +
                      "' has the wrong dimension");
    }
    g.push_back(it->second);
  }
  ExplicitTable table(F, 1);
  for (std::size_t i = 0; i < F.size(); ++i) {
    for (std::size_t j = i; j < F.size(); ++j) {
      Matrix entry(1, 1);
      entry(0, 0) = (g[i].adjoint() * K.eval(F[i], F[j]) * g[j])(0, 0);
      table.set(F[i].label, F[j].label, entry);
    }
  }
  return Kernel::from_table(std::move(table), "scalar(" + K.id() + ")");
}

Kernel szego_kernel(int block_dim) {
  if (block_dim < 1) {
    throw Error(ErrorCode::invalid_input, "szego_kernel needs block_dim >= 1");
  }
  AnalyticEvaluator ev;
  ev.id = block_dim == 1 ? std::string("szego")
                         : "szego_n" + std::to_string(block_dim);
  ev.block_dim = block_dim;
  ev.eval = [block_dim](Complex z, Complex w) -> Matrix {
    const Complex s = 1.0 / (1.0 - z * std::conj(w));
    return s * Matrix::Identity(block_dim, block_dim);
  };
  ev.in_domain = [](Complex z) { return std::abs(z) < 1.0; };
  return Kernel::analytic(std::move(ev));
}

}  // namespace agler
