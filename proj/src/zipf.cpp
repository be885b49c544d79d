#include "mcprioq/zipf.hpp"

#include <algorithm>
#include <cmath>

#include "mcprioq/errors.hpp"

namespace mcprioq {

ZipfDistribution::ZipfDistribution(std::uint64_t n, double s) : s_(s) {
  if (n == 0) throw InputError("zipf support must contain at least one rank");
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw InputError("zipf exponent must be a finite value >= 0");
  }
  cdf_.resize(n);
  double running = 0.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    running += std::pow(static_cast<double>(k), -s);
    cdf_[k - 1] = running;
  }
  normalization_ = running;
  for (double& c : cdf_) c /= running;
  cdf_.back() = 1.0;
}

std::uint64_t ZipfDistribution::rank_for(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto index = static_cast<std::uint64_t>(it - cdf_.begin());
  return std::min<std::uint64_t>(index, cdf_.size() - 1) + 1;
}

double ZipfDistribution::probability(std::uint64_t rank) const {
  if (rank == 0 || rank > cdf_.size()) return 0.0;
  return std::pow(static_cast<double>(rank), -s_) / normalization_;
}

std::uint64_t ZipfDistribution::quantile(double t) const {
  if (t <= 0.0) return 0;
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), t);
  const auto index = static_cast<std::uint64_t>(it - cdf_.begin());
  return std::min<std::uint64_t>(index, cdf_.size() - 1) + 1;
}

}  // namespace mcprioq
