#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace dweuler {

/// Raised on API misuse: incompatible grids, bad indices, out-of-order calls.
class UsageError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Uniform periodic n_x by n_x mesh of the unit torus. n_x is a power of two.
class Grid {
public:
  explicit Grid(int n_x);

  int n_x() const { return n_x_; }
  double h() const { return h_; }
  std::size_t cells() const {
    return static_cast<std::size_t>(n_x_) * static_cast<std::size_t>(n_x_);
  }
  double center(int i) const { return (i + 0.5) * h_; }
  int wrap(int i) const { return ((i % n_x_) + n_x_) % n_x_; }

  /// True if this grid is obtained from `coarse` by dyadic refinement.
  bool refines(const Grid& coarse) const {
    return n_x_ >= coarse.n_x_ && n_x_ % coarse.n_x_ == 0;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  int n_x_;
  double h_;
};

/// Cell averages with `components` interleaved values per cell. Storage is
/// row-major over (j = x2 index, i = x1 index).
class Field {
public:
  Field(Grid grid, int components, double fill = 0.0);
  Field(Grid grid, int components, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t index(int i, int j) const {
    return (static_cast<std::size_t>(j) * grid_.n_x() + i) * components_;
  }

  double& operator()(int i, int j, int c) { return data_[index(i, j) + c]; }
  double operator()(int i, int j, int c) const { return data_[index(i, j) + c]; }
  /// Periodic access: indices are wrapped onto the torus.
  double periodic(int i, int j, int c) const {
    return data_[index(grid_.wrap(i), grid_.wrap(j)) + c];
  }

  std::span<double> cell(int i, int j) {
    return {data_.data() + index(i, j), static_cast<std::size_t>(components_)};
  }
  std::span<const double> cell(int i, int j) const {
    return {data_.data() + index(i, j), static_cast<std::size_t>(components_)};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  /// Single-component field holding component `c`.
  Field component(int c) const;

  bool all_finite() const;

  friend bool operator==(const Field&, const Field&) = default;

private:
  Grid grid_;
  int components_;
  std::vector<double> data_;
};

/// Average fine cells onto `coarse` by repeated 2x2 halving, so that
/// restricting in stages gives bitwise the same result as restricting at once.
Field restrict_to(const Field& field, const Grid& coarse);

/// h^2 times the sum over cells, per component.
std::vector<double> integrate(const Field& field);

/// L1 norm over the torus, summing absolute values of all components.
double l1_norm(const Field& field);

/// L1 distance after restricting both fields to the coarser grid.
double l1_distance(const Field& a, const Field& b);

/// Periodic shift by (di, dj) cells: result(i, j) = field(i - di, j - dj).
Field shift(const Field& field, int di, int dj);

// --- DWFLD1 binary format -------------------------------------------------
//
// Little-endian. Header: 6 bytes "DWFLD1", u32 n_x, u32 components,
// f64 time, f64 gamma. Payload: n_x * n_x * components f64 values in the
// Field storage order.

/// Thrown when a field file is missing, truncated, or carries a bad header.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct FieldFile {
  Field field;
  double time = 0.0;
  double gamma = 0.0;
};

void write_field(const std::filesystem::path& path, const Field& field,
                 double time, double gamma);
FieldFile read_field(const std::filesystem::path& path);

} // namespace dweuler
