#include "agler/hilbert.hpp"

#include <Eigen/Eigenvalues>

namespace agler {

HilbertModel::HilbertModel(Kernel k, PointSet points, double rank_tol)
    : kernel_(std::move(k)),
      points_(std::move(points)),
      n_(kernel_.dim()),
      rank_tol_(rank_tol) {
  if (rank_tol_ < 0.0) {
    throw Error(ErrorCode::invalid_input, "rank tolerance must be >= 0");
  }
  gram_ = kernel_gram(kernel_, points_);
  const PsdReport psd = psd_check(gram_);
  if (!psd.is_psd) {
    throw Error(ErrorCode::invalid_kernel,
                "kernel Gram is not positive semi-definite (min eigenvalue " +
                    std::to_string(psd.min_eigenvalue) + ")");
  }
  const Eigen::Index dim = gram_.rows();
  if (dim == 0) {
    factor_ = Matrix(0, 0);
    range_basis_ = Matrix(0, 0);
    null_basis_ = Matrix(0, 0);
    sqrt_eigs_ = Vector(0);
    return;
  }
  const Matrix h = 0.5 * (gram_ + gram_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& eigs = es.eigenvalues();
  const double lmax = eigs(dim - 1);
  const double threshold = rank_tol_ * std::max(lmax, 0.0);
  Eigen::Index first_kept = dim;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (eigs(i) > threshold) {
      first_kept = i;
      break;
    }
  }
  rank_ = static_cast<int>(dim - first_kept);
  range_basis_ = es.eigenvectors().rightCols(rank_);
  null_basis_ = es.eigenvectors().leftCols(first_kept);
  sqrt_eigs_ = Vector(rank_);
  for (Eigen::Index i = 0; i < rank_; ++i) {
    sqrt_eigs_(i) = std::sqrt(eigs(first_kept + i));
  }
  factor_ = range_basis_ * sqrt_eigs_.asDiagonal();
}

HilbertModel build_h2(const Kernel& k, const PointSet& F, double rank_tol) {
  return HilbertModel(k, F, rank_tol);
}

Eigen::Index HilbertModel::row_of(const std::string& label, int coord) const {
  if (coord < 0 || coord >= n_) {
    throw Error(ErrorCode::invalid_input, "coordinate index out of range");
  }
  return static_cast<Eigen::Index>(points_.index_of(label)) * n_ + coord;
}

Vector HilbertModel::to_range(const Vector& coeff) const {
  return factor_.adjoint() * coeff;
}

Vector HilbertModel::from_range(const Vector& range_coeff) const {
  Vector scaled(rank_);
  for (Eigen::Index i = 0; i < rank_; ++i) {
    scaled(i) = range_coeff(i) / sqrt_eigs_(i);
  }
  return range_basis_ * scaled;
}

Matrix qx_operator(const HilbertModel& model, const Point& x) {
  const std::size_t ix = model.points().index_of(x.label);
  const int n = model.block_dim();
  const Matrix& gram = model.gram();
  const Eigen::Index dim = gram.rows();
  const Eigen::Index row0 = static_cast<Eigen::Index>(ix) * n;

  // Well-definedness on the quotient: every Gram null vector v must have
  // k(.,x) v_x = 0, i.e. gram * (v restricted to the x block) = 0.
  const Matrix& nulls = model.null_basis();
  const double scale = tol::qx_welldef_rel * (1.0 + max_abs(gram));
  for (Eigen::Index c = 0; c < nulls.cols(); ++c) {
    Vector restricted = Vector::Zero(dim);
    restricted.segment(row0, n) = nulls.col(c).segment(row0, n);
    const double residual = (gram * restricted).cwiseAbs().maxCoeff();
    if (residual > scale) {
      throw Error(ErrorCode::precondition_violated,
                  "Q_x is not well defined at '" + x.label +
                      "': a Gram null vector has k(.,x)v_x != 0 (residual " +
                      std::to_string(residual) + ")");
    }
  }

  // In range coordinates: Q = L* E_x pinv(L)*, with E_x the block selector.
  const int r = model.rank();
  Matrix q(r, r);
  for (int c = 0; c < r; ++c) {
    Vector e = Vector::Zero(r);
    e(c) = 1.0;
    Vector rep = model.from_range(e);
    Vector selected = Vector::Zero(dim);
    selected.segment(row0, n) = rep.segment(row0, n);
    q.col(c) = model.to_range(selected);
  }
  return q;
}

CompressedKernel rank_one_compress(const Kernel& k, const PointSet& F,
                                   const Point& z, const Vector& gamma) {
  const int n = k.dim();
  if (gamma.size() != n) {
    throw Error(ErrorCode::invalid_input,
                "compression direction has the wrong dimension");
  }
  if (!F.contains(z.label)) {
    throw Error(ErrorCode::invalid_input,
                "compression point '" + z.label + "' must belong to the set");
  }
  const std::size_t iz = F.index_of(z.label);
  const Matrix kzz = k.eval(F[iz], F[iz]);
  const Complex denom_c = (gamma.adjoint() * kzz * gamma)(0, 0);
  const double denom = denom_c.real();
  const double gate =
      tol::compress_denom_rel * max_abs(kzz) * gamma.squaredNorm();
  if (std::abs(denom) <= gate || denom <= 0.0) {
    throw Error(ErrorCode::degenerate_compression,
                "gamma* k(z,z) gamma vanishes at '" + z.label + "'");
  }

  const std::size_t m = F.size();
  std::vector<Vector> kz(m);
  for (std::size_t i = 0; i < m; ++i) {
    kz[i] = k.eval(F[i], F[iz]) * gamma;
  }
  Matrix gram(n * m, n * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      gram.block(n * i, n * j, n, n) =
          k.eval(F[i], F[j]) - kz[i] * kz[j].adjoint() / denom;
    }
  }

  // Projector onto the complement of span{k(.,z) gamma}, Gram coordinates.
  const Eigen::Index dim = gram.rows();
  Vector w = Vector::Zero(dim);
  w.segment(static_cast<Eigen::Index>(iz) * n, n) = gamma;
  const Matrix base = kernel_gram(k, F);
  Matrix projector =
      Matrix::Identity(dim, dim) - (w * (w.adjoint() * base)) / denom;

  CompressedKernel out;
  out.gram = std::move(gram);
  out.projector = std::move(projector);

  double annihilation = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    annihilation = std::max(
        annihilation,
        (out.gram.block(n * i, n * iz, n, n) * gamma).cwiseAbs().maxCoeff());
  }
  const Matrix gp = base * out.projector;
  const double idem = max_abs(out.projector * out.projector - out.projector);
  const double selfadj = max_abs(gp - gp.adjoint());
  out.defect = std::max({annihilation, idem, selfadj});
  return out;
}

CompressedKernel compress_kernel(const HilbertModel& model,
                                 const CompressionSpec& spec) {
  const Matrix& K = model.gram();
  const Eigen::Index dim = K.rows();
  const int n = model.block_dim();

  Eigen::Index p = 0;
  for (const auto& gen : spec.generators) {
    p += static_cast<Eigen::Index>(gen.vectors.size());
  }
  if (p == 0) {
    return {K, Matrix::Identity(dim, dim), 0.0};
  }

  Matrix S = Matrix::Zero(dim, p);
  Eigen::Index col = 0;
  for (const auto& gen : spec.generators) {
    const Eigen::Index row0 =
        static_cast<Eigen::Index>(model.points().index_of(gen.z)) * n;
    for (const Vector& v : gen.vectors) {
      if (v.size() != n) {
        throw Error(ErrorCode::invalid_input,
                    "compression direction has the wrong dimension");
      }
      S.col(col).segment(row0, n) = v;
      ++col;
    }
  }

  const Matrix C = K * S;
  const Matrix N = S.adjoint() * C;

  // Pseudo-inverse of the generator Gram at the model's rank tolerance.
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (N + N.adjoint()));
  const double nmax = es.eigenvalues().size() > 0
                          ? es.eigenvalues()(es.eigenvalues().size() - 1)
                          : 0.0;
  const double threshold = model.rank_tol() * std::max(nmax, 0.0);
  Vector inv_eigs = Vector::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double ev = es.eigenvalues()(i);
    inv_eigs(i) = ev > threshold ? Complex(1.0 / ev, 0.0) : Complex(0.0, 0.0);
  }
  const Matrix pinv_n =
      es.eigenvectors() * inv_eigs.asDiagonal() * es.eigenvectors().adjoint();

  CompressedKernel out;
  Matrix gram = K - C * pinv_n * C.adjoint();
  out.gram = 0.5 * (gram + gram.adjoint());
  out.projector = Matrix::Identity(dim, dim) - S * pinv_n * (C.adjoint());

  const Matrix gp = K * out.projector;
  const double idem = max_abs(out.projector * out.projector - out.projector);
  const double selfadj = max_abs(gp - gp.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> gs(out.gram, Eigen::EigenvaluesOnly);
  const double neg =
      gs.eigenvalues().size() > 0 ? std::max(0.0, -gs.eigenvalues()(0)) : 0.0;
  out.defect = std::max({idem, selfadj, neg});
  return out;
}

double isometry_check(const CompressedKernel& kprime, const Kernel& kappa,
                      const std::function<Matrix(const Point&)>& G,
                      const PointSet& F) {
  const Eigen::Index dim = kprime.gram.rows();
  if (F.empty()) return 0.0;
  if (dim % static_cast<Eigen::Index>(F.size()) != 0) {
    throw Error(ErrorCode::invalid_input,
                "compressed Gram size does not match the point set");
  }
  const Eigen::Index n = dim / static_cast<Eigen::Index>(F.size());
  const Eigen::Index N = kappa.dim();

  std::vector<Matrix> g(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) {
    g[i] = G(F[i]);
    if (g[i].rows() != n || g[i].cols() != N) {
      throw Error(ErrorCode::invalid_input,
                  "factor G has the wrong shape at '" + F[i].label + "'");
    }
  }

  double residual = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    for (std::size_t j = 0; j < F.size(); ++j) {
      const Matrix target = g[i] * kappa.eval(F[i], F[j]) * g[j].adjoint();
      residual = std::max(
          residual,
          max_abs(kprime.gram.block(n * i, n * j, n, n) - target));
    }
  }
  return residual;
}

}  // namespace agler
