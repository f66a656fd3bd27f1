#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace treecount::stats {

struct Estimate {
    double mean = 0;
    double se = 0;
};

/// Ratio estimator sum(num)/sum(den) with a batch-means standard error: the
/// series is cut into `batches` contiguous blocks, each block yields its own
/// ratio, and the spread of those block ratios gives the error. Blocks
/// whose denominator is zero are skipped. A zero overall denominator gives
/// a NaN mean.
Estimate batch_ratio(std::span<const double> num, std::span<const double> den,
                     std::size_t batches = 20);

/// batch_ratio with a unit denominator.
Estimate batch_means(std::span<const double> xs, std::size_t batches = 20);

/// sd / sqrt(n), i.e. the error that ignores autocorrelation.
double naive_standard_error(std::span<const double> xs);

double lag1_autocorrelation(std::span<const double> xs);

double poisson_pmf(std::uint64_t k, double mean);

struct GoodnessOfFit {
    double statistic = 0;
    int dof = 0;
    double p_value = 1;
};

/// Pearson chi-square of observed degree counts against Poisson(mean). Bins
/// are merged from the tails inward until every expected count reaches
/// `min_expected`; the last bin absorbs the upper tail.
GoodnessOfFit poisson_chi_square(std::span<const std::uint64_t> counts, double mean,
                                 double min_expected = 5.0);

}  // namespace treecount::stats
