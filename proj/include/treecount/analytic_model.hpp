#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace treecount::model {

/// Inputs of the steady-state model. `truncation`, `max_iter` and `fp_tol`
/// only steer the numerics.
struct ModelParams {
    double nodes = 1000;       // expected network size N
    double mean_degree = 4;    // a-priori joinee degree
    double ratio = 1;          // protocol cycles per node lifetime
    double truncation = 1e-9;  // drop levels whose a-priori mass falls below this
    std::size_t max_iter = 10000;
    double fp_tol = 1e-12;

    /// Throws std::invalid_argument when out of domain.
    void validate() const;
};

/// Hard cap on the number of levels a profile may carry.
inline constexpr std::size_t kMaxLevels = 1000;

/// Per-level model quantities, indexed by level x = 0..x_max.
///
/// pmin[x] is the probability that a joinee lands on level x (its best
/// neighbour sits at x-1); pmin[0] holds the root's own share 1/N. Under
/// the influx/outflux balance the level fractions nx equal pmin.
/// residual = 1 - sum(nx); it is the a-priori mass beyond x_max (never
/// attached, or at levels too sparse to keep) minus the root's extra 1/N, so
/// it can be slightly negative for well connected graphs.
struct LevelProfile {
    std::size_t x_max = 0;
    std::vector<double> pmin;
    std::vector<double> nx;
    std::vector<double> nxus;  // unstable fraction N_x^us / N_x
    double residual = 0;
};

struct ModelSolution {
    LevelProfile profile;
    std::vector<double> ax;  // A_x / N
    double a0 = 0;           // root's estimate of N, normalized by N
    std::size_t iterations = 0;
    bool converged = false;
    double last_delta = 0;
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Forward recursion for the a-priori level distribution:
/// pmin[x] = exp(-d*S[x-2]) - exp(-d*S[x-1]) with S the cumulative level mass
/// (the Poisson average of the k-link join probability in closed form).
/// Throws ModelError if truncation needs more than kMaxLevels levels.
LevelProfile pmin_profile(const ModelParams& p);

/// Fills `nxus` by the forward recursion over x >= 2 balancing the ways a
/// stable node turns unstable (lost single parent link, a joinee or a
/// neighbour offering a shorter route) against failure and update.
LevelProfile nxus_profile(LevelProfile prof, const ModelParams& p);

/// Self-consistent aggregate profile. `initial` seeds the iteration
/// (defaults to pmin). Non-convergence is reported through `converged`.
ModelSolution solve_ax(const LevelProfile& prof, const ModelParams& p,
                       std::optional<std::vector<double>> initial = std::nullopt);

/// pmin_profile -> nxus_profile -> solve_ax.
ModelSolution predict(const ModelParams& p);

}  // namespace treecount::model
