#include "cell_index.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace rcg {

CellIndex::CellIndex(std::span<const double> lower, std::span<const double> upper,
                     double min_edge, std::span<const double> coords)
    : lower_(lower.begin(), lower.end()) {
  const int n = static_cast<int>(lower.size());
  require(n > 0 && upper.size() == lower.size(), "cell index: bad box");
  require(min_edge > 0.0, "cell index: edge must be positive");
  const std::size_t npts = coords.size() / n;

  cells_per_axis_.resize(n);
  for (int a = 0; a < n; ++a) {
    const double len = upper[a] - lower[a];
    // Small margin so rounding in the cell lookup never splits a pair at
    // distance <= min_edge across non-adjacent cells.
    const double k = std::floor(len / (min_edge * (1.0 + 1e-9)));
    cells_per_axis_[a] = k < 1.0 ? 1 : static_cast<std::size_t>(std::min(k, 1e6));
  }
  // Cap the table size; coarsening keeps every edge >= min_edge.
  const std::size_t cap = std::max<std::size_t>(64, 2 * npts);
  auto total = [&] {
    double t = 1.0;
    for (auto k : cells_per_axis_) t *= static_cast<double>(k);
    return t;
  };
  while (total() > static_cast<double>(cap)) {
    auto it = std::max_element(cells_per_axis_.begin(), cells_per_axis_.end());
    if (*it == 1) break;
    *it = (*it + 1) / 2;
  }
  edge_.resize(n);
  stride_.resize(n);
  std::size_t cells = 1;
  for (int a = 0; a < n; ++a) {
    edge_[a] = (upper[a] - lower[a]) / static_cast<double>(cells_per_axis_[a]);
    stride_[a] = cells;
    cells *= cells_per_axis_[a];
  }

  std::vector<std::size_t> cell_of_point(npts);
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < npts; ++i) {
    cell_of_point[i] = cell_of(coords.subspan(i * n, n));
    ++cell_start_[cell_of_point[i] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  sorted_.resize(npts);
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < npts; ++i) sorted_[fill[cell_of_point[i]]++] = i;

  std::vector<int> off(n, -1);
  while (true) {
    offsets_.push_back(off);
    int a = 0;
    while (a < n && off[a] == 1) off[a++] = -1;
    if (a == n) break;
    ++off[a];
  }
}

std::size_t CellIndex::axis_cell(int axis, double x) const {
  const double t = std::floor((x - lower_[axis]) / edge_[axis]);
  if (t <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(t);
  return std::min(k, cells_per_axis_[axis] - 1);
}

std::size_t CellIndex::cell_of(std::span<const double> point) const {
  std::size_t cell = 0;
  for (int a = 0; a < dim(); ++a) cell += axis_cell(a, point[a]) * stride_[a];
  return cell;
}

}  // namespace rcg
