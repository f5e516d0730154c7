#pragma once

#include <iosfwd>
#include <vector>

#include "quench_experiments.hpp"

namespace rcg {

struct MarkedFile {
  int dimension = 0;
  int spin_dim = 0;
  double radius = 0.0;
  std::vector<MarkedRecord> records;
};

// Versioned text format, one row "x_1..x_n s_1..s_m" per point. Values are
// written with 17 significant digits (or hex floats) so loading is bit-exact.
void save_marked(std::ostream& out, const MarkedFile& file, bool hex = false);

// expected_dimension / expected_spin_dim < 0 skip the corresponding check.
MarkedFile load_marked(std::istream& in, int expected_dimension = -1, int expected_spin_dim = -1);

}  // namespace rcg
