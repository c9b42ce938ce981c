#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "l0peel/config.hpp"

namespace l0peel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

/// Data (y, A, lambda) of  min_x 1/2 |y - A x|^2 + lambda |x|_0.
///
/// Immutable once built. The constructor validates dimensions, finiteness and
/// lambda > 0, and caches the squared column norms used by coordinate descent.
class ProblemInstance {
 public:
  ProblemInstance(Vector y, Matrix A, double lambda);

  const Vector& y() const { return y_; }
  const Matrix& A() const { return A_; }
  double lambda() const { return lambda_; }
  Index m() const { return A_.rows(); }
  Index n() const { return A_.cols(); }

  const Vector& column_sq_norms() const { return col_sq_norms_; }
  double half_sq_norm_y() const { return half_sq_norm_y_; }

 private:
  Vector y_;
  Matrix A_;
  double lambda_;
  Vector col_sq_norms_;
  double half_sq_norm_y_;
};

/// Componentwise interval [lower, upper] with lower <= 0 <= upper.
struct BoxBounds {
  Vector lower;
  Vector upper;

  BoxBounds() = default;
  BoxBounds(Vector lower, Vector upper);

  /// The symmetric Big-M box [-M, M]^n.
  static BoxBounds big_m(Index n, double M);

  Index size() const { return lower.size(); }

  /// Throws std::invalid_argument unless l_i <= 0 <= u_i for every i.
  void validate() const;

  /// True when `inner` is a subset of this box.
  bool contains(const BoxBounds& inner) const;

  /// True when every x_i lies in [l_i, u_i].
  bool contains_point(const Vector& x) const;

  bool degenerate(Index i) const { return lower[i] == 0.0 && upper[i] == 0.0; }
};

/// Planted sparse signal of a synthetic instance.
struct GroundTruth {
  Vector x_dagger;
  std::vector<Index> support;
  double sigma = 0.0;
  double snr_db = 0.0;
};

/// Rows drawn i.i.d. from N(0, K) with K_ij = rho^|i-j|.
///
/// The draw is Z * L^T where L is the Cholesky factor of K and Z has i.i.d.
/// standard normal entries filled row by row. Throws for rho outside [0, 1).
Matrix generate_dictionary(Index m, Index n, double rho, Rng& rng);

/// k-sparse signal with support 0, s, 2s, ... (s = floor(n/k)) and entries
/// sign(r) + r, r ~ N(0, sigma^2), with sign(0) = +1.
GroundTruth generate_ground_truth(Index n, Index k, double sigma, Rng& rng);

/// y = A x + e where e is white Gaussian noise rescaled so that the realized
/// 10 log10(|Ax|^2 / |e|^2) equals snr_db. An infinite snr_db gives y = A x.
Vector generate_observation(const Matrix& A, const Vector& x, double snr_db, Rng& rng);

/// 1/2 |y - A x|^2 + lambda * #{i : x_i != 0}. The count uses exact zero tests.
double objective(const Vector& x, const ProblemInstance& inst);

/// Largest lambda at which some single column still beats x = 0:
/// max_i (a_i^T y)^2 / (2 |a_i|^2).
double lambda_max(const Vector& y, const Matrix& A);

/// `count` log-spaced values from lambda_max(y, A) down to ratio_min * lambda_max.
std::vector<double> lambda_grid(const Vector& y, const Matrix& A, std::size_t count,
                                double ratio_min = 1e-3);

/// Solves the ell0 problem inside a box and returns the minimizer.
using BoxedSolver = std::function<Vector(const ProblemInstance&, const BoxBounds&)>;

struct BigMCalibration {
  double M = 0.0;        // gamma * |x_star|_inf
  Vector x_star;
  double last_box = 0.0; // box half-width at which x_star was strictly interior
  int iterations = 0;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves the problem inside [-M, M]^n for M = M0, eta*M0, eta^2*M0, ... until
/// the solution is strictly interior, then returns M = gamma * |x*|_inf.
BigMCalibration calibrate_big_m(const ProblemInstance& inst, double gamma, double eta, double M0,
                                const BoxedSolver& solver, int max_iterations = 200);

// ---------------------------------------------------------------------------
// Text file format:
//
//   m n lambda
//   y_1            (m lines)
//   ...
//   a_11 ... a_1n  (m lines, n entries each)
//   ...
//   [truth k sigma snr_db
//    i_1 ... i_k   (0-based support)
//    x_1 ... x_k]  (optional trailer)
//
// Floats are written in shortest round-trip form.

class InstanceFormatError : public std::runtime_error {
 public:
  InstanceFormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LoadedInstance {
  ProblemInstance instance;
  std::optional<GroundTruth> truth;
};

void write_instance(std::ostream& out, const ProblemInstance& inst,
                    const GroundTruth* truth = nullptr);
LoadedInstance read_instance(std::istream& in);

void save_instance(const std::filesystem::path& path, const ProblemInstance& inst,
                   const GroundTruth* truth = nullptr);
LoadedInstance load_instance(const std::filesystem::path& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace l0peel
