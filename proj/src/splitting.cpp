#include "pdpap/splitting.hpp"

#include "pdpap/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace pdpap {

namespace {

std::string_view tag_name(SplittingKind::Tag tag) {
  switch (tag) {
  case SplittingKind::Tag::Full:
    return "full";
  case SplittingKind::Tag::Jacobi:
    return "jacobi";
  case SplittingKind::Tag::GaussSeidel:
    return "gauss_seidel";
  case SplittingKind::Tag::Sor:
    return "sor";
  case SplittingKind::Tag::QuasiCg:
    return "quasi_cg";
  }
  return "unknown";
}

SplittingKind::Tag parse_tag(std::string_view text) {
  using Tag = SplittingKind::Tag;
  for (Tag tag : {Tag::Full, Tag::Jacobi, Tag::GaussSeidel, Tag::Sor, Tag::QuasiCg})
    if (text == tag_name(tag))
      return tag;
  if (text == "none")
    return Tag::Full;
  if (text == "gs" || text == "gauss-seidel")
    return Tag::GaussSeidel;
  if (text == "cg" || text == "quasi-cg")
    return Tag::QuasiCg;
  throw ConfigError("unknown splitting '" + std::string(text) + "'");
}

} // namespace

SplittingKind SplittingKind::sor(double r, Tag base) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw ConfigError("over-relaxation parameter r must be positive");
  if (base == Tag::Sor || base == Tag::QuasiCg)
    throw ConfigError("Sor must be based on full, jacobi or gauss_seidel");
  SplittingKind kind{Tag::Sor};
  kind.r = r;
  kind.base = base;
  return kind;
}

SplittingKind SplittingKind::parse(std::string_view text) {
  const auto colon = text.find(':');
  const Tag tag = parse_tag(text.substr(0, colon));
  if (tag != Tag::Sor) {
    if (colon != std::string_view::npos)
      throw ConfigError("only sor takes parameters: '" + std::string(text) + "'");
    return SplittingKind{tag};
  }
  if (colon == std::string_view::npos)
    throw ConfigError("sor needs a parameter, e.g. sor:1.0");
  std::string_view rest = text.substr(colon + 1);
  const auto colon2 = rest.find(':');
  const std::string_view r_text = rest.substr(0, colon2);
  double r = 0.0;
  const auto [ptr, ec] = std::from_chars(r_text.data(), r_text.data() + r_text.size(), r);
  if (ec != std::errc() || ptr != r_text.data() + r_text.size())
    throw ConfigError("bad sor parameter '" + std::string(r_text) + "'");
  const Tag base = colon2 == std::string_view::npos ? Tag::GaussSeidel
                                                    : parse_tag(rest.substr(colon2 + 1));
  return sor(r, base);
}

std::string SplittingKind::to_string() const {
  std::string s(tag_name(tag));
  if (tag == Tag::Sor) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, r);
    s += ':';
    s.append(buf, res.ptr);
    s += ':';
    s += tag_name(base);
  }
  return s;
}

SplitterState SplitterState::make(const SplittingKind& kind, Vector u0) {
  SplitterState state;
  state.u = std::move(u0);
  if (kind.tag == SplittingKind::Tag::QuasiCg)
    state.p = Vector::Zero(state.u.size());
  state.fresh = true;
  return state;
}

Splitter::Splitter(SplittingKind kind) : kind_(kind) {}

bool Splitter::same_pattern(const SparseMatrix& A) const {
  if (A.rows() != A_.rows() || A.cols() != A_.cols() || A.nonZeros() != A_.nonZeros() ||
      pattern_outer_.size() != static_cast<std::size_t>(A.outerSize() + 1))
    return false;
  return std::equal(pattern_outer_.begin(), pattern_outer_.end(), A.outerIndexPtr()) &&
         std::equal(pattern_inner_.begin(), pattern_inner_.end(), A.innerIndexPtr());
}

void Splitter::copy_row_major(const SparseMatrix& A) {
  const Eigen::Index nnz = A.nonZeros();
  // Tag every stored entry with its position, transpose the storage order once,
  // and keep the permutation for later matrices with the same pattern.
  SparseMatrix tagged = A;
  for (Eigen::Index k = 0; k < nnz; ++k)
    tagged.valuePtr()[k] = static_cast<double>(k);
  A_ = tagged;
  source_index_.resize(static_cast<std::size_t>(nnz));
  for (Eigen::Index k = 0; k < nnz; ++k) {
    source_index_[k] = static_cast<Eigen::Index>(A_.valuePtr()[k]);
    A_.valuePtr()[k] = A.valuePtr()[source_index_[k]];
  }
  pattern_outer_.assign(A.outerIndexPtr(), A.outerIndexPtr() + A.outerSize() + 1);
  pattern_inner_.assign(A.innerIndexPtr(), A.innerIndexPtr() + nnz);
}

void Splitter::prepare(const SparseMatrix& matrix) {
  if (matrix.rows() != matrix.cols())
    throw SizeMismatch("system matrix must be square");
  SparseMatrix compressed;
  const SparseMatrix* source = &matrix;
  if (!matrix.isCompressed()) {
    compressed = matrix;
    compressed.makeCompressed();
    source = &compressed;
  }
  const SparseMatrix& A = *source;
  const bool reuse = same_pattern(A);
  if (reuse) {
    for (std::size_t k = 0; k < source_index_.size(); ++k)
      A_.valuePtr()[k] = A.valuePtr()[source_index_[k]];
  } else {
    copy_row_major(A);
    pattern_analyzed_ = false;
  }
  diagonal_ = A_.diagonal();
  const auto base = kind_.effective_base();
  if (base == SplittingKind::Tag::Jacobi || base == SplittingKind::Tag::GaussSeidel) {
    if (!(diagonal_.array() > 0.0).all())
      throw SolverBreakdown("splitting needs a positive diagonal");
  }
  if (base == SplittingKind::Tag::Full) {
    if (!pattern_analyzed_) {
      ldlt_.analyzePattern(A);
      pattern_analyzed_ = true;
    }
    ldlt_.factorize(A);
    if (ldlt_.info() != Eigen::Success)
      throw SingularSystem("factorization of the system matrix failed");
  }
}

Vector Splitter::base_n_inverse(const Vector& v) const {
  switch (kind_.effective_base()) {
  case SplittingKind::Tag::Full:
    return ldlt_.solve(v);
  case SplittingKind::Tag::Jacobi:
    return v.cwiseQuotient(diagonal_);
  case SplittingKind::Tag::GaussSeidel:
    return A_.triangularView<Eigen::Lower>().solve(v);
  default:
    throw ConfigError("quasi-CG has no fixed splitting matrix");
  }
}

Vector Splitter::base_n_transpose_inverse(const Vector& v) const {
  switch (kind_.effective_base()) {
  case SplittingKind::Tag::Full:
    return ldlt_.solve(v);
  case SplittingKind::Tag::Jacobi:
    return v.cwiseQuotient(diagonal_);
  case SplittingKind::Tag::GaussSeidel:
    return A_.transpose().triangularView<Eigen::Upper>().solve(v);
  default:
    throw ConfigError("quasi-CG has no fixed splitting matrix");
  }
}

Vector Splitter::apply_n_inverse(const Vector& v) const {
  Vector out = base_n_inverse(v);
  if (kind_.tag == SplittingKind::Tag::Sor)
    out /= 1.0 + kind_.r;
  return out;
}

Vector Splitter::apply_n_transpose_inverse(const Vector& v) const {
  Vector out = base_n_transpose_inverse(v);
  if (kind_.tag == SplittingKind::Tag::Sor)
    out /= 1.0 + kind_.r;
  return out;
}

void Splitter::step(const Vector& rhs, SplitterState& state) const {
  const Eigen::Index n = A_.rows();
  if (rhs.size() != n || state.u.size() != n)
    throw SizeMismatch("splitter state does not match the system");
  Vector& u = state.u;
  switch (kind_.tag) {
  case SplittingKind::Tag::Full:
    u = ldlt_.solve(rhs);
    break;
  case SplittingKind::Tag::Jacobi: {
    Vector next(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = rhs[i];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A_, i); it; ++it)
        if (it.col() != i)
          s -= it.value() * u[it.col()];
      next[i] = s / diagonal_[i];
    }
    u = std::move(next);
    break;
  }
  case SplittingKind::Tag::GaussSeidel:
    // In place: columns below i already hold the new values.
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = rhs[i];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A_, i); it; ++it)
        if (it.col() != i)
          s -= it.value() * u[it.col()];
      u[i] = s / diagonal_[i];
    }
    break;
  case SplittingKind::Tag::Sor:
    // (1+r) N u+ = rhs - (M - r N) u  <=>  u+ = u + N^{-1}(rhs - A u) / (1+r)
    u += apply_n_inverse(rhs - A_ * u);
    break;
  case SplittingKind::Tag::QuasiCg:
    quasi_cg(rhs, state);
    return;
  }
  state.fresh = false;
}

void Splitter::quasi_cg(const Vector& rhs, SplitterState& state) const {
  if (!state.p || state.p->size() != state.u.size())
    state.p = Vector::Zero(state.u.size());
  const Vector r = rhs - A_ * state.u;
  const double rr = r.squaredNorm();
  if (rr == 0.0)
    return;
  const Vector Ar = A_ * r;

  Vector p_next = r;
  Vector Ap_next = Ar;
  if (!state.fresh) {
    const Vector& p = *state.p;
    const Vector Ap = A_ * p;
    const double pAp = p.dot(Ap);
    const double pAr = p.dot(Ar);
    if (pAp > quasi_cg_reset_eps * rr && std::isnormal(pAr)) {
      const double z = -pAr / pAp;
      p_next += z * p;
      Ap_next += z * Ap;
    }
  }
  const double curvature = p_next.dot(Ap_next);
  if (!(curvature > 0.0) || !std::isfinite(curvature))
    throw SolverBreakdown("quasi-CG direction has zero curvature with a nonzero residual");
  const double t = p_next.dot(r) / curvature;
  state.u += t * p_next;
  state.p = std::move(p_next);
  state.fresh = false;
}

SplitterState split_step(const SplittingKind& kind, const SparseMatrix& A, const Vector& rhs,
                         SplitterState state) {
  Splitter splitter(kind);
  splitter.prepare(A);
  splitter.step(rhs, state);
  return state;
}

SplitterState quasi_cg_step(const SparseMatrix& A, const Vector& rhs, SplitterState state) {
  return split_step(SplittingKind::quasi_cg(), A, rhs, std::move(state));
}

bool is_strictly_diagonally_dominant(const SparseMatrix& A) {
  const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = A;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double diag = 0.0;
    double off = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, i); it; ++it) {
      if (it.col() == i)
        diag = std::abs(it.value());
      else
        off += std::abs(it.value());
    }
    if (!(diag > off))
      return false;
  }
  return true;
}

bool is_symmetric_positive_definite(const SparseMatrix& A, double sym_tol) {
  if (A.rows() != A.cols())
    return false;
  const SparseMatrix At = A.transpose();
  const SparseMatrix diff = A - At;
  const double scale = A.nonZeros() > 0 ? std::max(1.0, A.coeffs().cwiseAbs().maxCoeff()) : 1.0;
  if (diff.nonZeros() > 0 && diff.coeffs().cwiseAbs().maxCoeff() > sym_tol * scale)
    return false;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    return false;
  return (ldlt.vectorD().array() > 0.0).all();
}

namespace {

Vector seeded_unit_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (auto& e : v)
    e = normal(rng);
  return v.normalized();
}

// Geometric-mean growth rate over the latter half of the iteration; an even
// window averages out the alternation of +-lambda dominant pairs.
std::pair<double, int> spectral_radius(const Splitter& splitter, const SparseMatrix& A,
                                       const DiagnoseOptions& opt) {
  Vector v = seeded_unit_vector(A.rows(), opt.seed);
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(opt.max_iterations));
  double previous = std::numeric_limits<double>::quiet_NaN();
  double estimate = 0.0;
  int it = 1;
  for (; it <= opt.max_iterations; ++it) {
    Vector bv = v - splitter.apply_n_inverse(A * v);
    const double s = bv.norm();
    if (s == 0.0 || !std::isfinite(s))
      return {s == 0.0 ? 0.0 : std::numeric_limits<double>::infinity(), it};
    logs.push_back(std::log(s));
    v = bv / s;
    if (it % 2 != 0)
      continue;
    const std::size_t window = static_cast<std::size_t>(it / 2 + (it / 2) % 2);
    double sum = 0.0;
    for (std::size_t k = logs.size() - window; k < logs.size(); ++k)
      sum += logs[k];
    estimate = std::exp(sum / static_cast<double>(window));
    if (it >= opt.min_iterations && std::abs(estimate - previous) <= opt.rel_tol * estimate)
      break;
    previous = estimate;
  }
  return {estimate, std::min(it, opt.max_iterations)};
}

double smallest_singular_value(const Splitter& splitter, Eigen::Index n,
                               const DiagnoseOptions& opt) {
  Vector v = seeded_unit_vector(n, opt.seed + 1);
  double previous = 0.0;
  double mu = 0.0;
  for (int it = 0; it < 1000; ++it) {
    const Vector x = splitter.apply_n_inverse(splitter.apply_n_transpose_inverse(v));
    mu = x.norm();
    if (mu == 0.0 || !std::isfinite(mu))
      return 0.0;
    v = x / mu;
    if (it > 2 && std::abs(mu - previous) <= 1e-12 * mu)
      break;
    previous = mu;
  }
  return 1.0 / std::sqrt(mu);
}

} // namespace

DiagnosticsReport diagnose(const SplittingKind& kind, const SparseMatrix& A,
                           const DiagnoseOptions& options) {
  DiagnosticsReport report;
  report.diag_dominant = is_strictly_diagonally_dominant(A);
  report.spd = is_symmetric_positive_definite(A);
  if (kind.tag == SplittingKind::Tag::QuasiCg) {
    report.stationary = false;
    report.gamma_N = std::numeric_limits<double>::quiet_NaN();
    report.alpha = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  Splitter splitter(kind);
  try {
    splitter.prepare(A);
  } catch (const Error&) {
    report.gamma_N = 0.0;
    report.alpha = std::numeric_limits<double>::infinity();
    return report;
  }
  report.gamma_N = smallest_singular_value(splitter, A.rows(), options);
  if (kind.tag == SplittingKind::Tag::Full) {
    report.alpha = 0.0;
  } else {
    const auto [alpha, iterations] = spectral_radius(splitter, A, options);
    report.alpha = alpha;
    report.alpha_iterations = iterations;
  }
  return report;
}

} // namespace pdpap
