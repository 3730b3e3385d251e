#include "dweuler/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace dweuler {

Grid::Grid(int n_x) : n_x_(n_x), h_(1.0 / n_x) {
  if (n_x < 2 || !std::has_single_bit(static_cast<unsigned>(n_x))) {
    throw UsageError("grid size must be a power of two >= 2, got " +
                     std::to_string(n_x));
  }
}

Field::Field(Grid grid, int components, double fill)
    : grid_(grid), components_(components) {
  if (components < 1) {
    throw UsageError("field needs at least one component");
  }
  data_.assign(grid_.cells() * components_, fill);
}

Field::Field(Grid grid, int components, std::vector<double> values)
    : grid_(grid), components_(components), data_(std::move(values)) {
  if (components < 1 || data_.size() != grid_.cells() * components_) {
    throw UsageError("field value count does not match grid and components");
  }
}

Field Field::component(int c) const {
  if (c < 0 || c >= components_) {
    throw UsageError("component index out of range");
  }
  Field out(grid_, 1);
  auto dst = out.values();
  for (std::size_t k = 0; k < grid_.cells(); ++k) {
    dst[k] = data_[k * components_ + c];
  }
  return out;
}

bool Field::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

namespace {

Field halve(const Field& fine) {
  const int n = fine.grid().n_x() / 2;
  const int k = fine.components();
  Field coarse(Grid(n), k);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        const double sum = (fine(2 * i, 2 * j, c) + fine(2 * i + 1, 2 * j, c)) +
                           (fine(2 * i, 2 * j + 1, c) + fine(2 * i + 1, 2 * j + 1, c));
        coarse(i, j, c) = 0.25 * sum;
      }
    }
  }
  return coarse;
}

} // namespace

Field restrict_to(const Field& field, const Grid& coarse) {
  if (!field.grid().refines(coarse)) {
    throw UsageError("cannot restrict a " + std::to_string(field.grid().n_x()) +
                     " grid onto " + std::to_string(coarse.n_x()));
  }
  Field out = field;
  while (out.grid().n_x() > coarse.n_x()) {
    out = halve(out);
  }
  return out;
}

std::vector<double> integrate(const Field& field) {
  const int n = field.grid().n_x();
  const int k = field.components();
  std::vector<double> total(k, 0.0);
  std::vector<double> row(k);
  for (int j = 0; j < n; ++j) {
    std::fill(row.begin(), row.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        row[c] += field(i, j, c);
      }
    }
    for (int c = 0; c < k; ++c) {
      total[c] += row[c];
    }
  }
  const double area = field.grid().h() * field.grid().h();
  for (auto& t : total) {
    t *= area;
  }
  return total;
}

double l1_norm(const Field& field) {
  const int n = field.grid().n_x();
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    double row = 0.0;
    for (int i = 0; i < n; ++i) {
      for (double v : field.cell(i, j)) {
        row += std::abs(v);
      }
    }
    total += row;
  }
  return total * field.grid().h() * field.grid().h();
}

double l1_distance(const Field& a, const Field& b) {
  if (a.components() != b.components()) {
    throw UsageError("l1_distance: component counts differ");
  }
  const Grid& coarse = a.grid().n_x() <= b.grid().n_x() ? a.grid() : b.grid();
  if (!a.grid().refines(coarse) || !b.grid().refines(coarse)) {
    throw UsageError("l1_distance: grids are not nested");
  }
  const Field ra = restrict_to(a, coarse);
  const Field rb = restrict_to(b, coarse);
  const int n = coarse.n_x();
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    double row = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < a.components(); ++c) {
        row += std::abs(ra(i, j, c) - rb(i, j, c));
      }
    }
    total += row;
  }
  return total * coarse.h() * coarse.h();
}

Field shift(const Field& field, int di, int dj) {
  const Grid& g = field.grid();
  Field out(g, field.components());
  for (int j = 0; j < g.n_x(); ++j) {
    for (int i = 0; i < g.n_x(); ++i) {
      for (int c = 0; c < field.components(); ++c) {
        out(i, j, c) = field.periodic(i - di, j - dj, c);
      }
    }
  }
  return out;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "DWFLD1 I/O assumes a little-endian host");

constexpr char kMagic[6] = {'D', 'W', 'F', 'L', 'D', '1'};
constexpr std::size_t kHeaderBytes = 6 + 4 + 4 + 8 + 8;

template <typename T> void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T> T get(const std::vector<char>& bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

} // namespace

void write_field(const std::filesystem::path& path, const Field& field,
                 double time, double gamma) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.grid().n_x()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field.components()));
  put<double>(out, time);
  put<double>(out, gamma);
  const auto values = field.values();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(path.string() + ": cannot open");
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderBytes) {
    throw FormatError(path.string() + ": truncated header (" +
                      std::to_string(bytes.size()) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path.string() + ": bad magic at byte offset 0");
  }
  const auto n_x = get<std::uint32_t>(bytes, 6);
  const auto components = get<std::uint32_t>(bytes, 10);
  const auto time = get<double>(bytes, 14);
  const auto gamma = get<double>(bytes, 22);
  if (n_x < 2 || !std::has_single_bit(n_x) || n_x > (1u << 15)) {
    throw FormatError(path.string() + ": invalid n_x " + std::to_string(n_x) +
                      " at byte offset 6");
  }
  if (components < 1 || components > 64) {
    throw FormatError(path.string() + ": invalid component count " +
                      std::to_string(components) + " at byte offset 10");
  }
  const std::size_t count = std::size_t{n_x} * n_x * components;
  if (bytes.size() != kHeaderBytes + count * sizeof(double)) {
    throw FormatError(path.string() + ": payload size " +
                      std::to_string(bytes.size() - kHeaderBytes) +
                      " bytes, expected " + std::to_string(count * sizeof(double)));
  }
  std::vector<double> values(count);
  std::memcpy(values.data(), bytes.data() + kHeaderBytes, count * sizeof(double));
  return {Field(Grid(static_cast<int>(n_x)), static_cast<int>(components),
                std::move(values)),
          time, gamma};
}

} // namespace dweuler
