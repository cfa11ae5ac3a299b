#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spdegen/grid.hpp"

namespace spdegen {

/// ||pred - truth||_2 / ||truth||_2 over all points (plain root-sum-square).
/// Throws UndefinedMetricError when ||truth|| == 0 and InvalidArgument on a
/// size mismatch.
double relative_l2(std::span<const double> pred, std::span<const double> truth);
double relative_l2(const Field& pred, const Field& truth);

enum class L2Mode { AllSlices, FinalSlice };
double relative_l2(const Trajectory& pred, const Trajectory& truth,
                   L2Mode mode = L2Mode::AllSlices);

struct ErrorReport {
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;

  static ErrorReport from(std::vector<double> values);
};

/// Fraction of the non-mean spectral energy of a periodic 2D field carried
/// by wavenumbers with |k| > k_cut (|k| the Euclidean norm of the signed
/// integer wavenumber). A field with no non-mean energy gives 0.
double high_freq_energy_fraction(const Field& field, double k_cut);

struct TimingReport {
  std::vector<double> seconds;
  double mean = 0.0;
  double median = 0.0;
  std::optional<double> stddev;  // absent for a single repeat
};

/// Wall time of `work` over `repeats` calls after `warmup` discarded calls,
/// measured with a monotonic clock.
TimingReport time_solver(const std::function<void(std::size_t)>& work,
                         std::size_t repeats, std::size_t warmup = 1);

/// Sample mean and (n-1) standard error, one entry per column of a
/// samples-by-values layout.
struct MonteCarloStats {
  std::vector<double> mean;
  std::vector<double> variance;   // unbiased
  std::vector<double> std_error;  // of the mean
  std::size_t samples = 0;
};

class RunningStats {
 public:
  explicit RunningStats(std::size_t width) : mean_(width, 0.0), m2_(width, 0.0) {}
  void add(std::span<const double> row);
  MonteCarloStats finish() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace spdegen
