#include "spinsq/states.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace spinsq {

namespace {

constexpr double kNormTolerance = 1e-12;

std::vector<double> point_mass(int n, int up_count) {
  std::vector<double> d(static_cast<std::size_t>(n) + 1, 0.0);
  d[static_cast<std::size_t>(up_count)] = 1.0;
  return d;
}

/// Distribution of the number of up spins for N independent fair coins.
std::vector<double> binomial_half(int n) {
  std::vector<double> d(static_cast<std::size_t>(n) + 1);
  double c = std::ldexp(1.0, -n);
  for (int k = 0; k <= n; ++k) {
    d[static_cast<std::size_t>(k)] = c;
    c = c * (n - k) / (k + 1);
  }
  return d;
}

/// J_x outcome distribution of |j, m_z> with j = N/2 and m_z = N/2 - m.
/// Basis index u = number of up spins, m_z = u - j.
std::vector<double> rotated_dicke_distribution(int n, int m) {
  const int dim = n + 1;
  const double j = 0.5 * n;
  Eigen::MatrixXd jx = Eigen::MatrixXd::Zero(dim, dim);
  for (int u = 0; u + 1 < dim; ++u) {
    const double mz = u - j;
    const double elem = 0.5 * std::sqrt(j * (j + 1.0) - mz * (mz + 1.0));
    jx(u + 1, u) = elem;
    jx(u, u + 1) = elem;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jx);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("spin rotation eigensolver failed");
  }
  // Eigenvalues come back ascending: r - j for r = 0..N.
  const int source = n - m;
  std::vector<double> d(static_cast<std::size_t>(dim));
  for (int r = 0; r < dim; ++r) {
    const double amp = solver.eigenvectors()(source, r);
    d[static_cast<std::size_t>(r)] = amp * amp;
  }
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  for (double& v : d) v /= total;
  return d;
}

int sample_index(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                   static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

}  // namespace

// ---------------------------------------------------------------- StateModel

StateModel::StateModel(int num_qubits) : n_(num_qubits) {
  if (num_qubits < 1) {
    throw std::invalid_argument("number of qubits must be positive (got " +
                                std::to_string(num_qubits) + ")");
  }
}

void StateModel::install_distributions(std::array<std::vector<double>, 3> dists) {
  for (std::size_t a = 0; a < 3; ++a) {
    auto& d = dists[a];
    if (d.size() != static_cast<std::size_t>(n_) + 1) {
      throw std::logic_error("outcome distribution has the wrong length");
    }
    for (double& v : d) v = std::max(v, 0.0);
    std::vector<double> cdf(d.size());
    std::partial_sum(d.begin(), d.end(), cdf.begin());
    // Snap the tail to exactly 1 from the last outcome with positive weight so
    // that no zero-probability outcome is ever drawn.
    std::size_t last = d.size() - 1;
    while (last > 0 && d[last] == 0.0) --last;
    for (std::size_t k = last; k < cdf.size(); ++k) cdf[k] = 1.0;
    dist_[a] = std::move(d);
    cdf_[a] = std::move(cdf);
  }
}

void StateModel::check_qubit(int qubit) const {
  if (qubit < 0 || qubit >= n_) {
    throw std::out_of_range("qubit index " + std::to_string(qubit) + " out of range for N = " +
                            std::to_string(n_));
  }
}

double StateModel::moment(Direction d, int order) const {
  if (order < 1 || order > 4) {
    throw std::out_of_range("moment order " + std::to_string(order) +
                            " out of range (supported: 1..4)");
  }
  return moment_impl(d, order);
}

double StateModel::single_expectation(Direction d, int qubit) const {
  check_qubit(qubit);
  return single_impl(d, qubit);
}

double StateModel::pair_correlation(Direction d, int i, int j) const {
  check_qubit(i);
  check_qubit(j);
  if (i == j) throw std::invalid_argument("pair correlation needs two distinct qubits");
  return pair_impl(d, i, j);
}

PairProbabilities StateModel::pair_probabilities(Direction d, int i, int j) const {
  const double ei = single_expectation(d, i);
  const double ej = single_expectation(d, j);
  const double c = pair_correlation(d, i, j);
  PairProbabilities p{
      0.25 * (1.0 + ei + ej + c),
      0.25 * (1.0 + ei - ej - c),
      0.25 * (1.0 - ei + ej - c),
      0.25 * (1.0 - ei - ej + c),
  };
  for (double& v : p) v = std::max(v, 0.0);
  return p;
}

int StateModel::sample_total_spin(Direction d, Rng& rng) const {
  return 2 * sample_index(cdf_[index_of(d)], rng) - n_;
}

std::array<int, 2> StateModel::sample_pair(Direction d, int i, int j, Rng& rng) const {
  const PairProbabilities p = pair_probabilities(d, i, j);
  const double u = uniform01(rng) * (p[0] + p[1] + p[2] + p[3]);
  if (u < p[0]) return {1, 1};
  if (u < p[0] + p[1]) return {1, -1};
  if (u < p[0] + p[1] + p[2]) return {-1, 1};
  return {-1, -1};
}

int StateModel::sample_single(Direction d, int qubit, Rng& rng) const {
  const double e = single_expectation(d, qubit);
  return uniform01(rng) < 0.5 * (1.0 + e) ? 1 : -1;
}

// ---------------------------------------------------------------- DickeState

DickeState::DickeState(int num_qubits, int excitations) : StateModel(num_qubits), m_(excitations) {
  if (excitations < 0 || excitations > num_qubits) {
    throw std::invalid_argument("Dicke excitations must satisfy 0 <= m <= N (got m = " +
                                std::to_string(excitations) + ", N = " +
                                std::to_string(num_qubits) + ")");
  }
  auto transverse = rotated_dicke_distribution(num_qubits, excitations);
  install_distributions({transverse, transverse, point_mass(num_qubits, num_qubits - m_)});
}

std::string DickeState::describe() const {
  return "dicke:" + std::to_string(num_qubits()) + ":" + std::to_string(m_);
}

double DickeState::moment_impl(Direction d, int order) const {
  const double n = num_qubits();
  const double m = m_;
  if (d == Direction::Z) return std::pow(0.5 * n - m, order);
  switch (order) {
    case 2:
      return n / 4.0 + m * (n - m) / 2.0;
    case 4:
      return (n * (3.0 * n - 2.0) + 4.0 * (3.0 * n - 4.0) * m * (n - m) +
              6.0 * m * (m - 1.0) * (n - m - 1.0) * (n - m)) /
             16.0;
    default:
      return 0.0;
  }
}

double DickeState::single_impl(Direction d, int) const {
  if (d != Direction::Z) return 0.0;
  // Permutation symmetry: <sigma_z^(i)> = 2 <J_z> / N.
  return (num_qubits() - 2.0 * m_) / num_qubits();
}

double DickeState::pair_impl(Direction d, int, int) const {
  const double n = num_qubits();
  const double m = m_;
  if (d != Direction::Z) return 2.0 * m * (n - m) / (n * (n - 1.0));
  // From <J_z^2> = N/4 + (1/4) N (N-1) c with <J_z^2> = (N/2 - m)^2.
  return ((n - 2.0 * m) * (n - 2.0 * m) - n) / (n * (n - 1.0));
}

// ----------------------------------------------------------- ManyBodySinglet

ManyBodySinglet::ManyBodySinglet(int num_qubits) : StateModel(num_qubits) {
  if (num_qubits % 2 != 0) {
    throw std::invalid_argument("many-body singlet needs an even number of qubits (got " +
                                std::to_string(num_qubits) + ")");
  }
  const auto zero = point_mass(num_qubits, num_qubits / 2);
  install_distributions({zero, zero, zero});
}

std::string ManyBodySinglet::describe() const { return "singlet:" + std::to_string(num_qubits()); }

double ManyBodySinglet::moment_impl(Direction, int) const { return 0.0; }

double ManyBodySinglet::single_impl(Direction, int) const { return 0.0; }

double ManyBodySinglet::pair_impl(Direction, int i, int j) const {
  // sigma_a (x) sigma_a |psi-> = -|psi-> for every axis a.
  return partners(i, j) ? -1.0 : 0.0;
}

// -------------------------------------------------------- DepolarizedMixture

DepolarizedMixture::DepolarizedMixture(StatePtr base, double visibility)
    : StateModel(base ? base->num_qubits() : 0), base_(std::move(base)), p_(visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw std::invalid_argument("visibility p must lie in [0, 1]");
  }
  const int n = num_qubits();
  const auto noise = binomial_half(n);
  std::array<std::vector<double>, 3> dists;
  for (Direction d : kDirections) {
    const auto& b = base_->total_spin_distribution(d);
    auto& out = dists[index_of(d)];
    out.resize(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) out[k] = p_ * b[k] + (1.0 - p_) * noise[k];
  }
  install_distributions(std::move(dists));
}

std::string DepolarizedMixture::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << base_->describe() << ":" << p_;
  return os.str();
}

double DepolarizedMixture::maximally_mixed_moment(int num_qubits, int order) {
  const double n = num_qubits;
  switch (order) {
    case 2:
      return n / 4.0;
    case 4:
      return (3.0 * n * n - 2.0 * n) / 16.0;
    default:
      return 0.0;
  }
}

double DepolarizedMixture::moment_impl(Direction d, int order) const {
  return p_ * base_->moment(d, order) +
         (1.0 - p_) * maximally_mixed_moment(num_qubits(), order);
}

double DepolarizedMixture::single_impl(Direction d, int qubit) const {
  return p_ * base_->single_expectation(d, qubit);
}

double DepolarizedMixture::pair_impl(Direction d, int i, int j) const {
  return p_ * base_->pair_correlation(d, i, j);
}

// ---------------------------------------------------------------- DenseState

namespace {

/// Applies the basis change to the eigenbasis of sigma_d on every qubit, so
/// that |amplitude|^2 of basis index b is the probability of the outcome
/// pattern b (bit set = outcome -1).
std::vector<double> rotated_probabilities(const std::vector<std::complex<double>>& amps, int n,
                                          Direction d) {
  std::vector<std::complex<double>> psi = amps;
  if (d != Direction::Z) {
    const double h = 1.0 / std::sqrt(2.0);
    const std::complex<double> phase = d == Direction::X ? std::complex<double>(1.0, 0.0)
                                                         : std::complex<double>(0.0, -1.0);
    for (int q = 0; q < n; ++q) {
      const std::size_t bit = std::size_t{1} << q;
      for (std::size_t b = 0; b < psi.size(); ++b) {
        if (b & bit) continue;
        const auto a0 = psi[b];
        const auto a1 = psi[b | bit];
        // x: <+|, <-| = (<0| +- <1|)/sqrt2;  y: <+i|, <-i| = (<0| -+ i<1|)/sqrt2.
        psi[b] = h * (a0 + phase * a1);
        psi[b | bit] = h * (a0 - phase * a1);
      }
    }
  }
  std::vector<double> prob(psi.size());
  for (std::size_t b = 0; b < psi.size(); ++b) prob[b] = std::norm(psi[b]);
  return prob;
}

}  // namespace

DenseState::DenseState(int num_qubits, std::vector<std::complex<double>> amplitudes)
    : StateModel(num_qubits), amps_(std::move(amplitudes)) {
  if (num_qubits > kDenseMaxQubits) {
    throw std::invalid_argument("dense backend supports at most " +
                                std::to_string(kDenseMaxQubits) + " qubits (got " +
                                std::to_string(num_qubits) + ")");
  }
  const std::size_t dim = std::size_t{1} << num_qubits;
  if (amps_.size() != dim) {
    throw std::invalid_argument("dense state needs 2^N amplitudes");
  }
  double norm = 0.0;
  for (const auto& a : amps_) norm += std::norm(a);
  if (std::abs(std::sqrt(norm) - 1.0) > kNormTolerance) {
    throw std::invalid_argument("dense state is not normalized");
  }

  const int n = num_qubits;
  std::array<std::vector<double>, 3> dists;
  for (Direction d : kDirections) {
    const auto prob = rotated_probabilities(amps_, n, d);
    auto& dist = dists[index_of(d)];
    dist.assign(static_cast<std::size_t>(n) + 1, 0.0);
    auto& single = single_[index_of(d)];
    single.assign(static_cast<std::size_t>(n), 0.0);
    auto& pair = pair_[index_of(d)];
    pair.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t b = 0; b < dim; ++b) {
      const double w = prob[b];
      if (w == 0.0) continue;
      dist[static_cast<std::size_t>(n - std::popcount(b))] += w;
      for (int i = 0; i < n; ++i) {
        const double si = (b >> i) & 1U ? -1.0 : 1.0;
        single[static_cast<std::size_t>(i)] += w * si;
        for (int j = i + 1; j < n; ++j) {
          const double sj = (b >> j) & 1U ? -1.0 : 1.0;
          pair[static_cast<std::size_t>(i) * n + j] += w * si * sj;
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      pair[static_cast<std::size_t>(i) * n + i] = 1.0;
      for (int j = i + 1; j < n; ++j) {
        pair[static_cast<std::size_t>(j) * n + i] = pair[static_cast<std::size_t>(i) * n + j];
      }
    }
  }
  install_distributions(std::move(dists));
}

DenseState DenseState::dicke(int num_qubits, int excitations) {
  if (num_qubits < 1 || num_qubits > kDenseMaxQubits) {
    throw std::invalid_argument("dense backend supports 1.." + std::to_string(kDenseMaxQubits) +
                                " qubits");
  }
  if (excitations < 0 || excitations > num_qubits) {
    throw std::invalid_argument("Dicke excitations must satisfy 0 <= m <= N");
  }
  const std::size_t dim = std::size_t{1} << num_qubits;
  std::vector<std::complex<double>> amps(dim);
  std::size_t count = 0;
  for (std::size_t b = 0; b < dim; ++b) {
    if (std::popcount(b) == excitations) ++count;
  }
  const double a = 1.0 / std::sqrt(static_cast<double>(count));
  for (std::size_t b = 0; b < dim; ++b) {
    if (std::popcount(b) == excitations) amps[b] = a;
  }
  return DenseState(num_qubits, std::move(amps));
}

DenseState DenseState::singlet(int num_qubits) {
  if (num_qubits < 2 || num_qubits % 2 != 0 || num_qubits > kDenseMaxQubits) {
    throw std::invalid_argument("dense singlet needs an even N in 2.." +
                                std::to_string(kDenseMaxQubits));
  }
  const std::size_t dim = std::size_t{1} << num_qubits;
  const double mag = std::pow(2.0, -0.25 * num_qubits);
  std::vector<std::complex<double>> amps(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    double sign = 1.0;
    bool valid = true;
    for (int k = 0; k < num_qubits / 2 && valid; ++k) {
      const unsigned lo = (b >> (2 * k)) & 1U;
      const unsigned hi = (b >> (2 * k + 1)) & 1U;
      if (lo == hi) valid = false;
      if (lo == 1U) sign = -sign;  // (|01> - |10>)/sqrt2 with qubit 2k written first
    }
    if (valid) amps[b] = sign * mag;
  }
  return DenseState(num_qubits, std::move(amps));
}

std::string DenseState::describe() const { return "dense:" + std::to_string(num_qubits()); }

double DenseState::moment_impl(Direction d, int order) const {
  const auto& dist = total_spin_distribution(d);
  const int n = num_qubits();
  double acc = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const double m = 0.5 * (2.0 * static_cast<double>(k) - n);
    acc += dist[k] * std::pow(m, order);
  }
  return acc;
}

double DenseState::single_impl(Direction d, int qubit) const {
  return single_[index_of(d)][static_cast<std::size_t>(qubit)];
}

double DenseState::pair_impl(Direction d, int i, int j) const {
  return pair_[index_of(d)][static_cast<std::size_t>(i) * num_qubits() + j];
}

// ------------------------------------------------------------------- parsing

StatePtr parse_state(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) {
      throw std::invalid_argument("malformed integer '" + s + "' in state spec '" + spec + "'");
    }
    return v;
  };
  auto to_real = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) {
      throw std::invalid_argument("malformed visibility '" + s + "' in state spec '" + spec + "'");
    }
    return v;
  };
  if (parts.empty()) throw std::invalid_argument("empty state spec");
  StatePtr base;
  std::size_t next = 0;
  if (parts[0] == "dicke") {
    if (parts.size() < 3 || parts.size() > 4) {
      throw std::invalid_argument("expected dicke:N:m[:p], got '" + spec + "'");
    }
    base = std::make_shared<DickeState>(to_int(parts[1]), to_int(parts[2]));
    next = 3;
  } else if (parts[0] == "singlet") {
    if (parts.size() < 2 || parts.size() > 3) {
      throw std::invalid_argument("expected singlet:N[:p], got '" + spec + "'");
    }
    base = std::make_shared<ManyBodySinglet>(to_int(parts[1]));
    next = 2;
  } else {
    throw std::invalid_argument("unknown state family '" + parts[0] +
                                "' (expected dicke or singlet)");
  }
  if (next < parts.size()) {
    return std::make_shared<DepolarizedMixture>(base, to_real(parts[next]));
  }
  return base;
}

}  // namespace spinsq
