#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pdpap {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// How one inner step of A u = rhs is taken: N u+ = rhs - M u with A = N + M.
struct SplittingKind {
  enum class Tag { Full, Jacobi, GaussSeidel, Sor, QuasiCg };

  Tag tag = Tag::Full;
  /// Over-relaxation r > 0 for Sor: N~ = (1 + r) N_base, M~ = M_base - r N_base.
  double r = 0.0;
  /// Base splitting for Sor (Full, Jacobi or GaussSeidel).
  Tag base = Tag::GaussSeidel;

  static SplittingKind full() { return {Tag::Full}; }
  static SplittingKind jacobi() { return {Tag::Jacobi}; }
  static SplittingKind gauss_seidel() { return {Tag::GaussSeidel}; }
  static SplittingKind quasi_cg() { return {Tag::QuasiCg}; }
  /// Throws ConfigError unless r > 0 and base is Full, Jacobi or GaussSeidel.
  static SplittingKind sor(double r, Tag base = Tag::GaussSeidel);

  /// Accepts full, jacobi, gauss_seidel, quasi_cg, sor:<r> and sor:<r>:<base>.
  static SplittingKind parse(std::string_view text);
  std::string to_string() const;

  /// The splitting whose N is scaled by Sor, or this kind itself.
  Tag effective_base() const noexcept { return tag == Tag::Sor ? base : tag; }

  bool operator==(const SplittingKind&) const = default;
};

/// Per-system iterate. `p` is present only for QuasiCg.
struct SplitterState {
  Vector u;
  std::optional<Vector> p;
  bool fresh = true;

  static SplitterState make(const SplittingKind& kind, Vector u0);
};

/// Relative threshold for the quasi-CG direction reset: |p|_A^2 <= eps |r|^2.
inline constexpr double quasi_cg_reset_eps = 1e-14;

/// Holds the prepared N for one matrix A and advances states by one step.
/// prepare() may be called repeatedly as A changes; the sparsity pattern
/// analysis of the Full factorization is reused while the pattern is unchanged.
class Splitter {
public:
  explicit Splitter(SplittingKind kind);

  const SplittingKind& kind() const noexcept { return kind_; }

  /// Throws SolverBreakdown for a nonpositive diagonal (Jacobi/GaussSeidel bases)
  /// and SingularSystem when the Full factorization fails.
  void prepare(const SparseMatrix& A);

  /// One update. QuasiCg throws SolverBreakdown when |p+|_A^2 = 0 with r != 0.
  void step(const Vector& rhs, SplitterState& state) const;

  /// Applications of N^{-1} and N^{-T} for the prepared matrix (Sor scaling included).
  /// Not defined for QuasiCg.
  Vector apply_n_inverse(const Vector& v) const;
  Vector apply_n_transpose_inverse(const Vector& v) const;

  const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const noexcept { return A_; }

private:
  bool same_pattern(const SparseMatrix& A) const;
  void copy_row_major(const SparseMatrix& A);
  Vector base_n_inverse(const Vector& v) const;
  Vector base_n_transpose_inverse(const Vector& v) const;
  void quasi_cg(const Vector& rhs, SplitterState& state) const;

  SplittingKind kind_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> A_;
  Vector diagonal_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  std::vector<Eigen::Index> source_index_;
  std::vector<int> pattern_outer_;
  std::vector<int> pattern_inner_;
  bool pattern_analyzed_ = false;
};

/// Convenience one-shot form: prepares a splitter for A and steps once.
SplitterState split_step(const SplittingKind& kind, const SparseMatrix& A, const Vector& rhs,
                         SplitterState state);

SplitterState quasi_cg_step(const SparseMatrix& A, const Vector& rhs, SplitterState state);

/// Spectral constants of a splitting A = N + M.
struct DiagnosticsReport {
  double gamma_N = 0.0;  ///< smallest singular value of N
  double alpha = 0.0;    ///< spectral radius of N^{-1} M
  bool diag_dominant = false;
  bool spd = false;
  /// False for QuasiCg, which has no fixed N; gamma_N and alpha are NaN then.
  bool stationary = true;
  int alpha_iterations = 0;
};

struct DiagnoseOptions {
  int min_iterations = 50;
  int max_iterations = 20000;
  double rel_tol = 1e-8;
  std::uint64_t seed = 20230101;
};

DiagnosticsReport diagnose(const SplittingKind& kind, const SparseMatrix& A,
                           const DiagnoseOptions& options = {});

bool is_strictly_diagonally_dominant(const SparseMatrix& A);
bool is_symmetric_positive_definite(const SparseMatrix& A, double sym_tol = 1e-12);

} // namespace pdpap
