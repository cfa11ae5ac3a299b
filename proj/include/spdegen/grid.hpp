#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spdegen {

/// Uniform left-inclusive torus grid: x_m = m * lx / nx, m = 0..nx-1.
/// One-dimensional grids have ny == 1. Two-dimensional data is stored with
/// x outermost and y innermost (index = i * ny + j).
struct Grid {
  std::size_t nx = 0;
  std::size_t ny = 1;
  double lx = 1.0;
  double ly = 1.0;
  bool two_d = false;

  static Grid line(std::size_t n, double length = 1.0) {
    return Grid{n, 1, length, 1.0, false};
  }
  static Grid square(std::size_t n, double length = 1.0) {
    return Grid{n, n, length, length, true};
  }

  std::size_t points() const { return nx * ny; }
  double dx() const { return lx / static_cast<double>(nx); }
  double dy() const { return ly / static_cast<double>(ny); }
  double x(std::size_t i) const { return dx() * static_cast<double>(i); }
  double y(std::size_t j) const { return dy() * static_cast<double>(j); }

  bool operator==(const Grid&) const = default;
};

/// Spatial array at one time.
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0)
      : grid(g), values(g.points(), fill) {}

  double& operator()(std::size_t i, std::size_t j = 0) {
    return values[i * grid.ny + j];
  }
  double operator()(std::size_t i, std::size_t j = 0) const {
    return values[i * grid.ny + j];
  }
};

/// Time-indexed stack of fields for one sample, slice-major.
struct Trajectory {
  Grid grid;
  std::vector<double> times;
  std::vector<double> values;
  /// Seed of the noise path that drove the solve.
  std::uint64_t noise_seed = 0;

  Trajectory() = default;
  Trajectory(const Grid& g, std::size_t n_slices)
      : grid(g), times(n_slices, 0.0), values(n_slices * g.points(), 0.0) {}

  std::size_t n_slices() const { return times.size(); }

  std::span<double> slice(std::size_t n) {
    return {values.data() + n * grid.points(), grid.points()};
  }
  std::span<const double> slice(std::size_t n) const {
    return {values.data() + n * grid.points(), grid.points()};
  }
  Field field(std::size_t n) const {
    Field f(grid);
    auto s = slice(n);
    f.values.assign(s.begin(), s.end());
    return f;
  }
};

}  // namespace spdegen
