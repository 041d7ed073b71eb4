#pragma once

#include <cstdint>
#include <vector>

namespace qwloc {

// Pairwise (cascade) summation: deterministic and accurate independent of
// how the values were produced.
double pairwise_sum(const double* data, std::size_t n);
double pairwise_sum(const std::vector<double>& v);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};

MeanSE mean_se(const std::vector<double>& v);

struct WilsonCI {
  double low = 0.0;
  double high = 1.0;
};

WilsonCI wilson_ci(int successes, int n, double z = 1.96);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

// Kolmogorov-Smirnov statistic against the uniform law on [0,1).
double ks_statistic_uniform(std::vector<double> samples);
// Asymptotic critical value at level alpha for n samples.
double ks_critical_value(double alpha, int n);

}  // namespace qwloc
