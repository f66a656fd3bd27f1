#include "treecount/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace treecount::stats {

Estimate batch_ratio(std::span<const double> num, std::span<const double> den, std::size_t batches) {
    if (num.size() != den.size()) throw std::invalid_argument("series length mismatch");
    const std::size_t n = num.size();
    if (n == 0) throw std::invalid_argument("empty series");

    const double total_num = std::accumulate(num.begin(), num.end(), 0.0);
    const double total_den = std::accumulate(den.begin(), den.end(), 0.0);
    Estimate out;
    if (total_den == 0) {
        out.mean = std::numeric_limits<double>::quiet_NaN();
        out.se = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.mean = total_num / total_den;

    batches = std::clamp<std::size_t>(batches, 1, n);
    std::vector<double> bnum(batches, 0.0), bden(batches, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t b = i * batches / n;
        bnum[b] += num[i];
        bden[b] += den[i];
    }
    std::vector<double> ratios;
    for (std::size_t b = 0; b < batches; ++b)
        if (bden[b] != 0) ratios.push_back(bnum[b] / bden[b]);
    if (ratios.size() < 2) return out;

    const double m = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
    double ss = 0;
    for (double r : ratios) ss += (r - m) * (r - m);
    const double var = ss / (ratios.size() - 1);
    out.se = std::sqrt(var / ratios.size());
    return out;
}

Estimate batch_means(std::span<const double> xs, std::size_t batches) {
    std::vector<double> ones(xs.size(), 1.0);
    return batch_ratio(xs, ones, batches);
}

double naive_standard_error(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0;
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / (n - 1) / n);
}

double lag1_autocorrelation(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 3) return 0;
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double c0 = 0, c1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        c0 += (xs[i] - m) * (xs[i] - m);
        if (i + 1 < n) c1 += (xs[i] - m) * (xs[i + 1] - m);
    }
    return c0 == 0 ? 0 : c1 / c0;
}

double poisson_pmf(std::uint64_t k, double mean) {
    const double kk = static_cast<double>(k);
    return std::exp(kk * std::log(mean) - mean - std::lgamma(kk + 1));
}

GoodnessOfFit poisson_chi_square(std::span<const std::uint64_t> counts, double mean, double min_expected) {
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (n == 0) throw std::invalid_argument("empty histogram");

    const std::size_t kmax = std::max<std::size_t>(
        counts.size(), static_cast<std::size_t>(mean + 10 * std::sqrt(mean) + 10));
    std::vector<double> obs(kmax + 1, 0.0), expct(kmax + 1, 0.0);
    double cdf = 0;
    for (std::size_t k = 0; k < kmax; ++k) {
        const double p = poisson_pmf(k, mean);
        expct[k] = n * p;
        cdf += p;
        if (k < counts.size()) obs[k] = static_cast<double>(counts[k]);
    }
    expct[kmax] = n * std::max(0.0, 1.0 - cdf);
    for (std::size_t k = kmax; k < counts.size(); ++k) obs[kmax] += static_cast<double>(counts[k]);

    std::vector<double> bo, be;
    double ao = 0, ae = 0;
    for (std::size_t k = 0; k <= kmax; ++k) {
        ao += obs[k];
        ae += expct[k];
        if (ae >= min_expected) {
            bo.push_back(ao);
            be.push_back(ae);
            ao = ae = 0;
        }
    }
    if (bo.empty()) throw std::invalid_argument("histogram too small for chi-square");
    bo.back() += ao;
    be.back() += ae;

    GoodnessOfFit out;
    for (std::size_t i = 0; i < bo.size(); ++i) out.statistic += (bo[i] - be[i]) * (bo[i] - be[i]) / be[i];
    out.dof = static_cast<int>(bo.size()) - 1;
    if (out.dof < 1) return out;
    boost::math::chi_squared dist(out.dof);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

}  // namespace treecount::stats
