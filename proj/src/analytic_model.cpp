#include "treecount/analytic_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace treecount::model {

void ModelParams::validate() const {
    auto fail = [](const char* what) { throw std::invalid_argument(what); };
    if (!(nodes >= 2)) fail("nodes must be >= 2");
    if (!(mean_degree > 0)) fail("mean degree must be positive");
    if (!(ratio > 0)) fail("ratio must be positive");
    if (!(truncation > 0 && truncation < 1)) fail("truncation must lie in (0, 1)");
    if (max_iter == 0) fail("max_iter must be positive");
    if (!(fp_tol > 0)) fail("fp_tol must be positive");
}

namespace {

// Cumulative mass S[j] = sum_{i<=j} nx[i], with S[j] = 0 for j < 0.
double cumulative(const std::vector<double>& S, long j) { return j < 0 ? 0.0 : S[static_cast<std::size_t>(j)]; }

}  // namespace

LevelProfile pmin_profile(const ModelParams& p) {
    p.validate();
    const double d = p.mean_degree;
    LevelProfile prof;
    prof.nx.push_back(1.0 / p.nodes);
    std::vector<double> S{prof.nx[0]};

    for (long x = 1;; ++x) {
        const double mass = std::exp(-d * cumulative(S, x - 2)) - std::exp(-d * cumulative(S, x - 1));
        // Stop once the tail is both negligible and shrinking; early levels
        // of a huge sparse network can be tiny too.
        if (x >= 2 && mass < p.truncation && mass <= prof.nx.back()) break;
        if (static_cast<std::size_t>(x) >= kMaxLevels) {
            std::ostringstream msg;
            msg << "level truncation did not terminate within " << kMaxLevels << " levels";
            throw ModelError(msg.str());
        }
        prof.nx.push_back(mass);
        S.push_back(S.back() + mass);
    }

    prof.x_max = prof.nx.size() - 1;
    prof.pmin = prof.nx;
    prof.nxus.assign(prof.nx.size(), 0.0);
    prof.residual = 1.0 - S.back();
    return prof;
}

LevelProfile nxus_profile(LevelProfile prof, const ModelParams& p) {
    p.validate();
    const double d = p.mean_degree;
    const double r = p.ratio;
    const double n = p.nodes;
    const auto& nx = prof.nx;
    const std::size_t levels = nx.size();

    std::vector<double> S(levels);
    std::partial_sum(nx.begin(), nx.end(), S.begin());

    auto& us = prof.nxus;
    us.assign(levels, 0.0);
    for (std::size_t ux = 2; ux < levels; ++ux) {
        const long x = static_cast<long>(ux);
        const double above = std::exp(-d * cumulative(S, x - 1));

        // Share of level-x nodes hanging on a single link to level x-1.
        const double alpha = d * nx[ux - 1] / nx[ux] * above;
        const double lose_parent = alpha / (1 + r) * (1 + r * us[ux - 1]);

        // Joinees that attach below x-1 and hand a level-x node a shorter
        // route: through the root for x >= 3, through levels 1..x-3 for x >= 4.
        double joinee = 0;
        if (x >= 3) joinee += d * d / n * std::exp(-d / n);
        if (x >= 4) joinee += d * (std::exp(-d / n) - std::exp(-d * cumulative(S, x - 3)));
        joinee /= (1 + r);

        // Mean degree of a level-x node, not counting a sole parent link.
        const double below2 = cumulative(S, x - 2);
        const double below1 = cumulative(S, x - 1);
        const double degree_num = d * (1 - below2) * std::exp(-d * below2) -
                                  d * (1 - below1) * std::exp(-d * below1) - d * nx[ux - 1] * above;
        const double level_degree = degree_num / nx[ux];
        double unstable_below = 0;
        for (std::size_t i = 2; i + 2 <= ux; ++i) unstable_below += us[i] * nx[i];
        const double better_neighbour = r / (1 + r) * level_degree * unstable_below;

        const double frac = (lose_parent + joinee + better_neighbour) / (1 + lose_parent + joinee);
        us[ux] = std::clamp(frac, 0.0, 1.0);
    }
    return prof;
}

ModelSolution solve_ax(const LevelProfile& prof, const ModelParams& p, std::optional<std::vector<double>> initial) {
    p.validate();
    const std::size_t levels = prof.nx.size();
    const double f = p.ratio / (p.ratio + 1);

    std::vector<double> stable(levels + 1, 1.0);
    std::vector<double> unstable_mass(levels, 0.0);
    for (std::size_t x = 0; x < levels; ++x) {
        stable[x] = 1.0 - prof.nxus[x];
        unstable_mass[x] = prof.nxus[x] * prof.nx[x];
    }

    ModelSolution sol;
    sol.profile = prof;
    std::vector<double> a = initial ? std::move(*initial) : prof.pmin;
    if (a.size() != levels) throw std::invalid_argument("initial iterate has wrong length");

    std::vector<double> prev(levels);
    for (sol.iterations = 1; sol.iterations <= p.max_iter; ++sol.iterations) {
        prev = a;
        // Excess aggregate carried by unstable movers, from the previous iterate.
        double excess = 0;
        for (std::size_t x = 2; x < levels; ++x) excess += prev[x] - prof.pmin[x];

        for (std::size_t x = levels; x-- > 1;) {
            const double next = x + 1 < levels ? a[x + 1] : 0.0;
            const double own = x >= 2 ? prev[x] - prof.pmin[x] : 0.0;
            a[x] = prof.pmin[x] + f * (next * stable[x] * stable[x + 1] + unstable_mass[x] * (excess - own));
        }
        // The root never fails, so its register is simply 1 + what level 1
        // reports to it.
        a[0] = prof.nx[0] + (levels > 1 ? a[1] * stable[1] : 0.0);

        double delta = 0;
        for (std::size_t x = 0; x < levels; ++x) delta = std::max(delta, std::abs(a[x] - prev[x]));
        sol.last_delta = delta;
        if (delta <= p.fp_tol) {
            sol.converged = true;
            break;
        }
    }
    sol.iterations = std::min(sol.iterations, p.max_iter);
    sol.ax = std::move(a);
    sol.a0 = sol.ax[0];
    return sol;
}

ModelSolution predict(const ModelParams& p) { return solve_ax(nxus_profile(pmin_profile(p), p), p); }

}  // namespace treecount::model
