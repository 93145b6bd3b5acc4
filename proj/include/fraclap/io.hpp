#ifndef FRACLAP_IO_HPP
#define FRACLAP_IO_HPP

#include <string>

#include "fraclap/haar.hpp"

namespace fraclap {

/// Serialized {model, J, cubes: [{address, level, measure, parent, children,
/// point}]}. Sierpinski cubes additionally carry measure_exact as a rational
/// string, since the ternary closed forms are rational.
std::string tree_to_json_string(const DyadicTree& t);

/// CSV columns cube_address, level, cube_measure, wavelet_index, coefficient;
/// the top scaling coefficient is the distinguished wavelet_index = -1 row.
std::string decomposition_to_csv(const HaarSystem& sys, const HaarDecomposition& d);

/// CSV columns leaf_address, value.
std::string solution_to_csv(const CellFunction& f);

/// CSV columns x, y, value at leaf representative points (y = 0 on the half line).
std::string plot_data_csv(const CellFunction& f);

/// Shortest representation that round-trips a double through text.
std::string format_double(double v);

/// Whole-file write; throws std::runtime_error when the path is unwritable.
void write_text_file(const std::string& path, const std::string& content);

/// CSV with one leaf_address,value row per line parsed against the tree's
/// model; every leaf must be covered exactly once.
CellFunction read_cell_function_csv(const DyadicTree& t, const std::string& path);

}  // namespace fraclap

#endif
