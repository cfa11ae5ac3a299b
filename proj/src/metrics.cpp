#include "spdegen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spdegen/error.hpp"
#include "spdegen/fft.hpp"

namespace spdegen {

double relative_l2(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size())
    throw InvalidArgument("relative_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (!(den > 0.0)) throw UndefinedMetricError("relative_l2: truth has zero norm");
  return std::sqrt(num / den);
}

double relative_l2(const Field& pred, const Field& truth) {
  return relative_l2(std::span<const double>(pred.values),
                     std::span<const double>(truth.values));
}

double relative_l2(const Trajectory& pred, const Trajectory& truth, L2Mode mode) {
  if (pred.n_slices() != truth.n_slices() || pred.grid.points() != truth.grid.points())
    throw InvalidArgument("relative_l2: trajectory shape mismatch");
  if (mode == L2Mode::FinalSlice) {
    const std::size_t last = truth.n_slices() - 1;
    return relative_l2(pred.slice(last), truth.slice(last));
  }
  return relative_l2(std::span<const double>(pred.values),
                     std::span<const double>(truth.values));
}

ErrorReport ErrorReport::from(std::vector<double> values) {
  ErrorReport r;
  r.count = values.size();
  if (r.count > 0) {
    r.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(r.count);
    if (r.count > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - r.mean) * (v - r.mean);
      r.stddev = std::sqrt(ss / static_cast<double>(r.count - 1));
    }
  }
  r.values = std::move(values);
  return r;
}

double high_freq_energy_fraction(const Field& field, double k_cut) {
  const Grid& g = field.grid;
  if (!g.two_d) throw InvalidArgument("high_freq_energy_fraction: needs a 2D field");
  Fft2D fft(g.nx, g.ny);
  std::vector<Complex> spec(g.points());
  fft.forward_real(field.values, spec);
  double total = 0.0, high = 0.0;
  for (std::size_t p = 0; p < g.nx; ++p)
    for (std::size_t q = 0; q < g.ny; ++q) {
      if (p == 0 && q == 0) continue;
      const double e = std::norm(spec[p * g.ny + q]);
      const double k1 = static_cast<double>(signed_wavenumber(p, g.nx));
      const double k2 = static_cast<double>(signed_wavenumber(q, g.ny));
      total += e;
      if (std::sqrt(k1 * k1 + k2 * k2) > k_cut) high += e;
    }
  // Round-off energy of a constant field is not meaningful.
  double scale = 0.0;
  for (double v : field.values) scale += v * v;
  if (total <= 1e-24 * std::max(1.0, scale * static_cast<double>(g.points())))
    return 0.0;
  return high / total;
}

TimingReport time_solver(const std::function<void(std::size_t)>& work,
                         std::size_t repeats, std::size_t warmup) {
  if (repeats == 0) throw InvalidArgument("time_solver: repeats must be >= 1");
  for (std::size_t i = 0; i < warmup; ++i) work(i);
  TimingReport r;
  for (std::size_t i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    work(warmup + i);
    const auto t1 = std::chrono::steady_clock::now();
    r.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  r.mean = std::accumulate(r.seconds.begin(), r.seconds.end(), 0.0) /
           static_cast<double>(repeats);
  std::vector<double> sorted = r.seconds;
  std::sort(sorted.begin(), sorted.end());
  r.median = (repeats % 2 == 1)
                 ? sorted[repeats / 2]
                 : 0.5 * (sorted[repeats / 2 - 1] + sorted[repeats / 2]);
  if (repeats > 1) {
    double ss = 0.0;
    for (double s : r.seconds) ss += (s - r.mean) * (s - r.mean);
    r.stddev = std::sqrt(ss / static_cast<double>(repeats - 1));
  }
  return r;
}

void RunningStats::add(std::span<const double> row) {
  if (row.size() != mean_.size()) throw InvalidArgument("RunningStats: width mismatch");
  ++n_;
  const double inv = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double delta = row[i] - mean_[i];
    mean_[i] += delta * inv;
    m2_[i] += delta * (row[i] - mean_[i]);
  }
}

MonteCarloStats RunningStats::finish() const {
  MonteCarloStats s;
  s.samples = n_;
  s.mean = mean_;
  s.variance.assign(mean_.size(), 0.0);
  s.std_error.assign(mean_.size(), 0.0);
  if (n_ > 1)
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      s.variance[i] = m2_[i] / static_cast<double>(n_ - 1);
      s.std_error[i] = std::sqrt(s.variance[i] / static_cast<double>(n_));
    }
  return s;
}

}  // namespace spdegen
