#include "rshape/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "rshape/core.hpp"

namespace rshape::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (const double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double std_error(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw UsageError("anova_oneway: need at least two groups");
  std::size_t total = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw UsageError("anova_oneway: every group needs at least two values");
    total += g.size();
    grand += std::accumulate(g.begin(), g.end(), 0.0);
  }
  grand /= static_cast<double>(total);

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (const double x : g) ss_within += (x - m) * (x - m);
  }
  AnovaResult r;
  r.df_between = static_cast<double>(groups.size() - 1);
  r.df_within = static_cast<double>(total - groups.size());
  if (ss_within <= 0.0) {
    r.degenerate = true;
    r.f = ss_between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.p = ss_between > 0.0 ? 0.0 : 1.0;
    return r;
  }
  r.f = (ss_between / r.df_between) / (ss_within / r.df_within);
  boost::math::fisher_f dist(r.df_between, r.df_within);
  r.p = boost::math::cdf(boost::math::complement(dist, r.f));
  return r;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw UsageError("welch_t_test: each sample needs at least two values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = stddev(a) * stddev(a) / na;
  const double vb = stddev(b) * stddev(b) / nb;
  const double diff = mean(a) - mean(b);
  WelchResult r;
  if (va + vb <= 0.0) {
    r.degenerate = true;
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.p = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = diff / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

std::vector<double> holm_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const double candidate = std::min(1.0, static_cast<double>(m - rank) * p[order[rank]]);
    running = std::max(running, candidate);
    adjusted[order[rank]] = running;
  }
  return adjusted;
}

SignTestResult sign_test_less(std::span<const double> first, std::span<const double> second) {
  if (first.size() != second.size()) throw UsageError("sign_test_less: samples must be paired");
  SignTestResult r;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] < second[i]) ++r.wins;
    else if (first[i] > second[i]) ++r.losses;
    else ++r.ties;
  }
  const int n = r.wins + r.losses;
  if (n == 0) return r;
  // P(X >= wins) for X ~ Binomial(n, 1/2)
  boost::math::binomial dist(n, 0.5);
  r.p = r.wins == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, r.wins - 1));
  return r;
}

}  // namespace rshape::stats
