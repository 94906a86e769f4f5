#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace codesign {

// Deterministic standard-normal generator (Box-Muller over mt19937_64), so
// runs are reproducible across standard library implementations.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : state_(seed) {}
  double normal();
  double uniform();  // in [0,1)

 private:
  std::uint64_t next();
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

struct CmaState {
  int n = 0;
  int lambda = 0;
  int mu = 0;
  Eigen::VectorXd mean;
  double sigma = 0.3;
  Eigen::MatrixXd C;
  Eigen::MatrixXd eigen_basis;     // B
  Eigen::VectorXd eigen_scale;     // D = sqrt(eigenvalues)
  Eigen::MatrixXd inv_sqrt_C;
  Eigen::VectorXd p_sigma, p_c;
  Eigen::VectorXd weights;
  double mu_eff = 0, c_sigma = 0, d_sigma = 0, c_c = 0, c1 = 0, c_mu = 0, chi_n = 0;
  int generation = 0;
  GaussianRng rng{0};
  double best_value = 0;
  Eigen::VectorXd best_x;
  bool has_best = false;
  int jitter_events = 0;
};

int cma_default_lambda(int n);

// lambda <= 0 selects the default 4 + floor(3 ln n).
CmaState cma_init(int n, const Eigen::VectorXd& mean0, double sigma0, int lambda,
                  std::uint64_t seed);

std::vector<Eigen::VectorXd> cma_ask(CmaState& state);

void cma_tell(CmaState& state, const std::vector<Eigen::VectorXd>& candidates,
              const std::vector<double>& values);

struct OptimizationSchedule {
  enum class Mode { joint, sequential };
  Mode mode = Mode::joint;
  std::vector<int> phase_gens;              // generations per phase
  std::vector<std::vector<bool>> unfrozen;  // per phase, per coordinate; empty = all
};

OptimizationSchedule joint_schedule(int total_gens);

struct GenerationRecord {
  int generation;
  double best_loss;  // best so far
  double mean_loss;  // mean of this generation
  double sigma;
};

struct RunHistory {
  std::vector<GenerationRecord> rows;
  Eigen::VectorXd best_vector;
  double best_value = 0;
  long long evaluations = 0;
};

// Runs CMA-ES over the (possibly phased) schedule. Frozen coordinates are
// pinned to `base` in phase 1 and to the running best thereafter. Candidates
// within a generation are evaluated concurrently when workers > 1; results
// are collected by candidate index, so worker count never changes output.
RunHistory run_schedule(const std::function<double(const Eigen::VectorXd&)>& objective,
                        int n, const OptimizationSchedule& schedule, int lambda,
                        double sigma0, std::uint64_t seed,
                        const Eigen::VectorXd& base, int workers = 1);

}  // namespace codesign
