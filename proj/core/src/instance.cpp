#include "l0peel/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string_view>

namespace l0peel {

ProblemInstance::ProblemInstance(Vector y, Matrix A, double lambda)
    : y_(std::move(y)), A_(std::move(A)), lambda_(lambda) {
  if (A_.rows() < 1 || A_.cols() < 1) {
    throw std::invalid_argument("ProblemInstance: A must have at least one row and one column");
  }
  if (y_.size() != A_.rows()) {
    throw std::invalid_argument("ProblemInstance: y has " + std::to_string(y_.size()) +
                                " entries but A has " + std::to_string(A_.rows()) + " rows");
  }
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
    throw std::invalid_argument("ProblemInstance: lambda must be finite and > 0");
  }
  if (!y_.allFinite() || !A_.allFinite()) {
    throw std::invalid_argument("ProblemInstance: y and A must be finite");
  }
  col_sq_norms_ = A_.colwise().squaredNorm().transpose();
  half_sq_norm_y_ = 0.5 * y_.squaredNorm();
}

BoxBounds::BoxBounds(Vector lo, Vector up) : lower(std::move(lo)), upper(std::move(up)) {
  validate();
}

BoxBounds BoxBounds::big_m(Index n, double M) {
  if (!(M >= 0.0)) throw std::invalid_argument("BoxBounds::big_m: M must be >= 0");
  return BoxBounds(Vector::Constant(n, -M), Vector::Constant(n, M));
}

void BoxBounds::validate() const {
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("BoxBounds: lower/upper size mismatch");
  }
  for (Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= 0.0) || !(upper[i] >= 0.0)) {
      throw std::invalid_argument("BoxBounds: need l_i <= 0 <= u_i at index " + std::to_string(i));
    }
  }
}

bool BoxBounds::contains(const BoxBounds& inner) const {
  if (inner.size() != size()) return false;
  return (inner.lower.array() >= lower.array()).all() &&
         (inner.upper.array() <= upper.array()).all();
}

bool BoxBounds::contains_point(const Vector& x) const {
  if (x.size() != size()) return false;
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Matrix generate_dictionary(Index m, Index n, double rho, Rng& rng) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("generate_dictionary: rho must lie in [0, 1)");
  }
  if (m < 1 || n < 1) throw std::invalid_argument("generate_dictionary: m, n must be >= 1");

  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Z(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) Z(i, j) = normal(rng);
  }
  if (rho == 0.0) return Z;

  Matrix K(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      K(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("generate_dictionary: covariance is not positive definite");
  }
  const Matrix L = llt.matrixL();
  return Z * L.transpose();
}

GroundTruth generate_ground_truth(Index n, Index k, double sigma, Rng& rng) {
  if (k < 1 || k > n) throw std::invalid_argument("generate_ground_truth: need 1 <= k <= n");
  if (!(sigma >= 0.0)) throw std::invalid_argument("generate_ground_truth: sigma must be >= 0");

  GroundTruth truth;
  truth.sigma = sigma;
  truth.x_dagger = Vector::Zero(n);
  const Index spacing = n / k;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index t = 0; t < k; ++t) {
    const Index j = t * spacing;
    const double r = sigma * normal(rng);
    const double sign = r >= 0.0 ? 1.0 : -1.0;
    truth.x_dagger[j] = sign + r;
    truth.support.push_back(j);
  }
  return truth;
}

Vector generate_observation(const Matrix& A, const Vector& x, double snr_db, Rng& rng) {
  if (A.cols() != x.size()) throw std::invalid_argument("generate_observation: dimension mismatch");
  Vector signal = A * x;
  if (std::isinf(snr_db) && snr_db > 0) return signal;

  const double signal_power = signal.squaredNorm();
  if (signal_power == 0.0) {
    throw std::invalid_argument("generate_observation: zero signal cannot reach a finite SNR");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector noise(signal.size());
  for (Index i = 0; i < noise.size(); ++i) noise[i] = normal(rng);
  const double noise_power = noise.squaredNorm();
  const double target = signal_power / std::pow(10.0, snr_db / 10.0);
  noise *= std::sqrt(target / noise_power);
  return signal + noise;
}

double objective(const Vector& x, const ProblemInstance& inst) {
  if (x.size() != inst.n()) throw std::invalid_argument("objective: x has wrong length");
  const double residual = 0.5 * (inst.y() - inst.A() * x).squaredNorm();
  const auto nnz = static_cast<double>((x.array() != 0.0).count());
  return residual + inst.lambda() * nnz;
}

double lambda_max(const Vector& y, const Matrix& A) {
  double best = 0.0;
  for (Index j = 0; j < A.cols(); ++j) {
    const double s = A.col(j).squaredNorm();
    if (s == 0.0) continue;
    const double c = A.col(j).dot(y);
    best = std::max(best, c * c / (2.0 * s));
  }
  return best;
}

std::vector<double> lambda_grid(const Vector& y, const Matrix& A, std::size_t count,
                                double ratio_min) {
  if (count == 0) return {};
  if (!(ratio_min > 0.0 && ratio_min < 1.0)) {
    throw std::invalid_argument("lambda_grid: ratio_min must lie in (0, 1)");
  }
  const double top = lambda_max(y, A);
  if (!(top > 0.0)) throw std::invalid_argument("lambda_grid: lambda_max is zero");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = top * std::pow(ratio_min, t);
  }
  return grid;
}

BigMCalibration calibrate_big_m(const ProblemInstance& inst, double gamma, double eta, double M0,
                                const BoxedSolver& solver, int max_iterations) {
  if (!(gamma >= 1.0)) throw std::invalid_argument("calibrate_big_m: gamma must be >= 1");
  if (!(eta > 1.0)) throw std::invalid_argument("calibrate_big_m: eta must be > 1");
  if (!(M0 > 0.0)) throw std::invalid_argument("calibrate_big_m: M0 must be > 0");

  double M = M0;
  double largest = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    Vector x = solver(inst, BoxBounds::big_m(inst.n(), M));
    largest = x.cwiseAbs().maxCoeff();
    if (largest < M) {
      BigMCalibration out;
      out.M = gamma * largest;
      out.x_star = std::move(x);
      out.last_box = M;
      out.iterations = it;
      return out;
    }
    M *= eta;
  }
  std::ostringstream msg;
  msg << "calibrate_big_m: no strictly interior solution after " << max_iterations
      << " iterations (last box " << M / eta << ", |x|_inf " << largest << ")";
  throw CalibrationError(msg.str());
}

// --- I/O --------------------------------------------------------------------

InstanceFormatError::InstanceFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

void write_row(std::ostream& out, const auto& values) {
  bool first = true;
  for (Index i = 0; i < static_cast<Index>(values.size()); ++i) {
    if (!first) out << ' ';
    out << format_double(static_cast<double>(values[i]));
    first = false;
  }
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Returns tokens of the next non-empty line, or throws naming `what`.
  std::vector<std::string> next(const std::string& what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return tokens;
    }
    throw InstanceFormatError(line_no_ + 1, "unexpected end of file while reading " + what);
  }

  bool at_end() {
    std::string line;
    while (in_.peek() != std::char_traits<char>::eof()) {
      const auto pos = in_.tellg();
      if (!std::getline(in_, line)) return true;
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        in_.seekg(pos);
        return false;
      }
      ++line_no_;
    }
    return true;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

double parse_double(const std::string& tok, std::size_t line, const std::string& what) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw InstanceFormatError(line, "cannot parse '" + tok + "' as a number in " + what);
  }
  return v;
}

long long parse_int(const std::string& tok, std::size_t line, const std::string& what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw InstanceFormatError(line, "cannot parse '" + tok + "' as an integer in " + what);
  }
  return v;
}

}  // namespace

void write_instance(std::ostream& out, const ProblemInstance& inst, const GroundTruth* truth) {
  out << inst.m() << ' ' << inst.n() << ' ' << format_double(inst.lambda()) << '\n';
  for (Index i = 0; i < inst.m(); ++i) out << format_double(inst.y()[i]) << '\n';
  for (Index i = 0; i < inst.m(); ++i) write_row(out, inst.A().row(i));
  if (truth != nullptr) {
    out << "truth " << truth->support.size() << ' ' << format_double(truth->sigma) << ' '
        << format_double(truth->snr_db) << '\n';
    for (std::size_t t = 0; t < truth->support.size(); ++t) {
      out << (t ? " " : "") << truth->support[t];
    }
    out << '\n';
    for (std::size_t t = 0; t < truth->support.size(); ++t) {
      out << (t ? " " : "") << format_double(truth->x_dagger[truth->support[t]]);
    }
    out << '\n';
  }
}

LoadedInstance read_instance(std::istream& in) {
  LineReader reader(in);
  auto header = reader.next("header");
  if (header.size() != 3) {
    throw InstanceFormatError(reader.line(), "header must be 'm n lambda'");
  }
  const long long m = parse_int(header[0], reader.line(), "header");
  const long long n = parse_int(header[1], reader.line(), "header");
  const double lambda = parse_double(header[2], reader.line(), "header");
  if (m < 1 || n < 1) throw InstanceFormatError(reader.line(), "m and n must be >= 1");
  if (!(lambda > 0.0)) throw InstanceFormatError(reader.line(), "lambda must be > 0");

  Vector y(m);
  for (long long i = 0; i < m; ++i) {
    const std::string what = "y row " + std::to_string(i + 1);
    auto tokens = reader.next(what);
    if (tokens.size() != 1) {
      throw InstanceFormatError(reader.line(), what + ": expected 1 value, got " +
                                                   std::to_string(tokens.size()));
    }
    y[i] = parse_double(tokens[0], reader.line(), what);
  }
  Matrix A(m, n);
  for (long long i = 0; i < m; ++i) {
    const std::string what = "A row " + std::to_string(i + 1);
    auto tokens = reader.next(what);
    if (static_cast<long long>(tokens.size()) != n) {
      throw InstanceFormatError(reader.line(), what + ": expected " + std::to_string(n) +
                                                   " values, got " + std::to_string(tokens.size()));
    }
    for (long long j = 0; j < n; ++j) A(i, j) = parse_double(tokens[j], reader.line(), what);
  }

  std::optional<GroundTruth> truth;
  if (!reader.at_end()) {
    auto head = reader.next("truth header");
    if (head.size() != 4 || head[0] != "truth") {
      throw InstanceFormatError(reader.line(), "expected 'truth k sigma snr_db' or end of file");
    }
    const long long k = parse_int(head[1], reader.line(), "truth header");
    GroundTruth t;
    t.sigma = parse_double(head[2], reader.line(), "truth header");
    t.snr_db = parse_double(head[3], reader.line(), "truth header");
    t.x_dagger = Vector::Zero(n);
    auto idx = reader.next("truth support");
    auto val = reader.next("truth values");
    if (static_cast<long long>(idx.size()) != k || static_cast<long long>(val.size()) != k) {
      throw InstanceFormatError(reader.line(), "truth block must list k indices and k values");
    }
    for (long long q = 0; q < k; ++q) {
      const long long j = parse_int(idx[q], reader.line() - 1, "truth support");
      if (j < 0 || j >= n) throw InstanceFormatError(reader.line() - 1, "support index out of range");
      t.support.push_back(static_cast<Index>(j));
      t.x_dagger[j] = parse_double(val[q], reader.line(), "truth values");
    }
    truth = std::move(t);
    if (!reader.at_end()) throw InstanceFormatError(reader.line() + 1, "trailing content");
  }

  try {
    return LoadedInstance{ProblemInstance(std::move(y), std::move(A), lambda), std::move(truth)};
  } catch (const std::invalid_argument& e) {
    throw InstanceFormatError(1, e.what());
  }
}

void save_instance(const std::filesystem::path& path, const ProblemInstance& inst,
                   const GroundTruth* truth) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_instance(out, inst, truth);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

LoadedInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_instance(in);
}

}  // namespace l0peel
