#include "codesign/cma_es.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "codesign/errors.hpp"

namespace codesign {

std::uint64_t GaussianRng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double GaussianRng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double GaussianRng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  constexpr double two_pi = 6.283185307179586476925286766559;
  cached_ = r * std::sin(two_pi * u2);
  has_cached_ = true;
  return r * std::cos(two_pi * u2);
}

int cma_default_lambda(int n) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n))));
}

namespace {

void refresh_eigen(CmaState& s) {
  Eigen::MatrixXd sym = 0.5 * (s.C + s.C.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd evals = es.eigenvalues();
  if (evals.minCoeff() <= 1e-14) {
    const double jitter = 1e-14 - evals.minCoeff() + 1e-14;
    s.C = sym + jitter * Eigen::MatrixXd::Identity(s.n, s.n);
    ++s.jitter_events;
    es.compute(s.C);
    evals = es.eigenvalues();
  } else {
    s.C = sym;
  }
  s.eigen_basis = es.eigenvectors();
  s.eigen_scale = evals.cwiseSqrt();
  s.inv_sqrt_C = s.eigen_basis * s.eigen_scale.cwiseInverse().asDiagonal() *
                 s.eigen_basis.transpose();
}

}  // namespace

CmaState cma_init(int n, const Eigen::VectorXd& mean0, double sigma0, int lambda,
                  std::uint64_t seed) {
  if (n < 1) throw InvalidSpecError("cma_init: n must be >= 1");
  if (!(sigma0 > 0.0)) throw InvalidSpecError("cma_init: sigma0 must be > 0");
  if (mean0.size() != n) throw InvalidSpecError("cma_init: mean0 size mismatch");

  CmaState s;
  s.n = n;
  s.lambda = lambda > 0 ? lambda : cma_default_lambda(n);
  s.mu = s.lambda / 2;
  s.mean = mean0;
  s.sigma = sigma0;
  s.C = Eigen::MatrixXd::Identity(n, n);
  s.p_sigma = Eigen::VectorXd::Zero(n);
  s.p_c = Eigen::VectorXd::Zero(n);
  s.rng = GaussianRng(seed);

  s.weights.resize(s.mu);
  for (int i = 0; i < s.mu; ++i)
    s.weights[i] = std::log(s.lambda / 2.0 + 0.5) - std::log(i + 1.0);
  s.weights /= s.weights.sum();
  s.mu_eff = 1.0 / s.weights.squaredNorm();

  const double nn = n;
  s.c_sigma = (s.mu_eff + 2.0) / (nn + s.mu_eff + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (nn + 1.0)) - 1.0) +
              s.c_sigma;
  s.c_c = (4.0 + s.mu_eff / nn) / (nn + 4.0 + 2.0 * s.mu_eff / nn);
  s.c1 = 2.0 / ((nn + 1.3) * (nn + 1.3) + s.mu_eff);
  s.c_mu = std::min(1.0 - s.c1, 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) /
                                    ((nn + 2.0) * (nn + 2.0) + s.mu_eff));
  s.chi_n = std::sqrt(nn) * (1.0 - 1.0 / (4.0 * nn) + 1.0 / (21.0 * nn * nn));

  refresh_eigen(s);
  return s;
}

std::vector<Eigen::VectorXd> cma_ask(CmaState& state) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<size_t>(state.lambda));
  Eigen::VectorXd z(state.n);
  for (int i = 0; i < state.lambda; ++i) {
    for (int k = 0; k < state.n; ++k) z[k] = state.rng.normal();
    out.push_back(state.mean +
                  state.sigma * (state.eigen_basis * state.eigen_scale.cwiseProduct(z)));
  }
  return out;
}

void cma_tell(CmaState& s, const std::vector<Eigen::VectorXd>& candidates,
              const std::vector<double>& values) {
  if (candidates.size() != static_cast<size_t>(s.lambda) || values.size() != candidates.size())
    throw InvalidSpecError("cma_tell: candidate/value count mismatch");

  std::vector<int> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&values](int a, int b) { return values[a] < values[b]; });

  if (!s.has_best || values[static_cast<size_t>(order[0])] < s.best_value) {
    s.best_value = values[static_cast<size_t>(order[0])];
    s.best_x = candidates[static_cast<size_t>(order[0])];
    s.has_best = true;
  }

  Eigen::VectorXd y_w = Eigen::VectorXd::Zero(s.n);
  for (int i = 0; i < s.mu; ++i)
    y_w += s.weights[i] * (candidates[static_cast<size_t>(order[i])] - s.mean) / s.sigma;

  s.mean += s.sigma * y_w;

  s.p_sigma = (1.0 - s.c_sigma) * s.p_sigma +
              std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) * (s.inv_sqrt_C * y_w);

  const double ps_norm = s.p_sigma.norm();
  const double gen1 = s.generation + 1.0;
  const bool h_sigma =
      ps_norm / std::sqrt(1.0 - std::pow(1.0 - s.c_sigma, 2.0 * gen1)) / s.chi_n <
      1.4 + 2.0 / (s.n + 1.0);

  s.p_c = (1.0 - s.c_c) * s.p_c;
  if (h_sigma) s.p_c += std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) * y_w;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(s.n, s.n);
  for (int i = 0; i < s.mu; ++i) {
    const Eigen::VectorXd y = (candidates[static_cast<size_t>(order[i])] - (s.mean - s.sigma * y_w)) / s.sigma;
    rank_mu += s.weights[i] * y * y.transpose();
  }
  const double delta_h = h_sigma ? 0.0 : s.c_c * (2.0 - s.c_c);
  s.C = (1.0 - s.c1 - s.c_mu) * s.C +
        s.c1 * (s.p_c * s.p_c.transpose() + delta_h * s.C) + s.c_mu * rank_mu;

  s.sigma *= std::exp((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0));
  ++s.generation;
  refresh_eigen(s);
}

OptimizationSchedule joint_schedule(int total_gens) {
  OptimizationSchedule sch;
  sch.mode = OptimizationSchedule::Mode::joint;
  sch.phase_gens = {total_gens};
  sch.unfrozen = {{}};
  return sch;
}

namespace {

void evaluate_all(const std::function<double(const Eigen::VectorXd&)>& objective,
                  const std::vector<Eigen::VectorXd>& xs, std::vector<double>& values,
                  int workers) {
  values.resize(xs.size());
  if (workers <= 1 || xs.size() <= 1) {
    for (size_t i = 0; i < xs.size(); ++i) values[i] = objective(xs[i]);
    return;
  }
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next.fetch_add(1); i < xs.size(); i = next.fetch_add(1))
      values[i] = objective(xs[i]);
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(workers, static_cast<int>(xs.size()));
  pool.reserve(static_cast<size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
}

}  // namespace

RunHistory run_schedule(const std::function<double(const Eigen::VectorXd&)>& objective,
                        int n, const OptimizationSchedule& schedule, int lambda,
                        double sigma0, std::uint64_t seed, const Eigen::VectorXd& base,
                        int workers) {
  if (base.size() != n) throw InvalidSpecError("run_schedule: base vector size mismatch");

  RunHistory hist;
  hist.best_vector = base;
  hist.best_value = std::numeric_limits<double>::infinity();

  int generation = 0;
  for (size_t phase = 0; phase < schedule.phase_gens.size(); ++phase) {
    std::vector<int> free_idx;
    const auto& mask = schedule.unfrozen[phase];
    for (int i = 0; i < n; ++i)
      if (mask.empty() || mask[static_cast<size_t>(i)]) free_idx.push_back(i);
    if (free_idx.empty()) throw InvalidSpecError("run_schedule: phase with no free coordinates");

    // frozen coordinates pin to the incumbent (base in phase 1)
    Eigen::VectorXd pinned = phase == 0 ? base : hist.best_vector;

    const int m = static_cast<int>(free_idx.size());
    Eigen::VectorXd mean0(m);
    for (int i = 0; i < m; ++i) mean0[i] = pinned[free_idx[static_cast<size_t>(i)]];

    CmaState state = cma_init(m, mean0, sigma0, lambda, seed + phase);

    auto embed = [&pinned, &free_idx](const Eigen::VectorXd& sub) {
      Eigen::VectorXd full = pinned;
      for (size_t i = 0; i < free_idx.size(); ++i) full[free_idx[i]] = sub[static_cast<long>(i)];
      return full;
    };

    for (int g = 0; g < schedule.phase_gens[phase]; ++g) {
      const std::vector<Eigen::VectorXd> subs = cma_ask(state);
      std::vector<Eigen::VectorXd> fulls;
      fulls.reserve(subs.size());
      for (const auto& sub : subs) fulls.push_back(embed(sub));

      std::vector<double> values;
      evaluate_all(objective, fulls, values, workers);
      hist.evaluations += static_cast<long long>(values.size());

      for (size_t i = 0; i < values.size(); ++i)
        if (values[i] < hist.best_value) {
          hist.best_value = values[i];
          hist.best_vector = fulls[i];
        }

      cma_tell(state, subs, values);

      GenerationRecord rec;
      rec.generation = generation++;
      rec.best_loss = hist.best_value;
      rec.mean_loss =
          std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
      rec.sigma = state.sigma;
      hist.rows.push_back(rec);
    }
  }
  return hist;
}

}  // namespace codesign
