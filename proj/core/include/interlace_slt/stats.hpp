#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace risim {

// Streaming mean / variance with an associative-commutative merge, so chunked
// parallel aggregation gives the same result as a serial pass in chunk order.
struct RunningStat {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  void merge(const RunningStat& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double nd = static_cast<double>(n), od = static_cast<double>(o.n);
    const double delta = o.mean - mean;
    mean += delta * od / (nd + od);
    m2 += o.m2 + delta * delta * nd * od / (nd + od);
    n += o.n;
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stderr_mean() const;
};

// Bernoulli frequency with standard error.
struct Proportion {
  std::size_t hits = 0;
  std::size_t n = 0;
  void add(bool b) {
    ++n;
    if (b) ++hits;
  }
  void merge(const Proportion& o) {
    hits += o.hits;
    n += o.n;
  }
  double p() const { return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0; }
  double stderr_p() const;
};

// Regularized incomplete gamma functions P(a,x), Q(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution with k degrees of freedom.
double chi_square_sf(double stat, double dof);

double poisson_pmf(std::uint64_t k, double mean);
double poisson_cdf(std::uint64_t k, double mean);

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
double ks_statistic(std::span<const double> sorted_sample,
                    const std::function<double(double)>& cdf);
// Asymptotic p-value (Kolmogorov distribution with the Stephens correction).
double ks_pvalue(double dn, std::size_t n);

double exp1_cdf(double x);

double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);

// Total variation distance between two distributions over the same index set.
double total_variation(std::span<const double> p, std::span<const double> q);

// Chi-square goodness-of-fit p-value of observed counts vs expected counts
// (cells with expected < min_expected are pooled into the last kept cell).
double chi_square_gof_pvalue(std::span<const double> observed,
                             std::span<const double> expected,
                             double min_expected = 5.0);

}  // namespace risim
