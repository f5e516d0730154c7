#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rcg {

// Uniform bucket grid over a box with every cell edge >= `min_edge`, so all
// points within distance `min_edge` of a query lie in its 3^n neighbourhood.
class CellIndex {
 public:
  CellIndex(std::span<const double> lower, std::span<const double> upper,
            double min_edge, std::span<const double> coords);

  int dim() const { return static_cast<int>(cells_per_axis_.size()); }
  std::size_t cell_of(std::span<const double> point) const;

  // Calls fn(j) for every point j stored in the 3^n cells around `point`.
  template <class Fn>
  void for_each_near(std::span<const double> point, Fn&& fn) const;

  const std::vector<std::size_t>& cells_per_axis() const { return cells_per_axis_; }

 private:
  std::vector<double> lower_;
  std::vector<double> edge_;
  std::vector<std::size_t> cells_per_axis_;
  std::vector<std::size_t> stride_;
  std::vector<std::size_t> cell_start_;
  std::vector<std::size_t> sorted_;
  std::vector<std::vector<int>> offsets_;

  std::size_t axis_cell(int axis, double x) const;
};

template <class Fn>
void CellIndex::for_each_near(std::span<const double> point, Fn&& fn) const {
  const int n = dim();
  std::vector<std::size_t> base(n);
  for (int a = 0; a < n; ++a) base[a] = axis_cell(a, point[a]);
  for (const auto& off : offsets_) {
    std::size_t cell = 0;
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      const long long c = static_cast<long long>(base[a]) + off[a];
      if (c < 0 || c >= static_cast<long long>(cells_per_axis_[a])) {
        inside = false;
        break;
      }
      cell += static_cast<std::size_t>(c) * stride_[a];
    }
    if (!inside) continue;
    for (std::size_t k = cell_start_[cell]; k < cell_start_[cell + 1]; ++k) fn(sorted_[k]);
  }
}

}  // namespace rcg
