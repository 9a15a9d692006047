#pragma once

#include <filesystem>
#include <iosfwd>

#include "fwadapt/objectives.hpp"
#include "fwadapt/types.hpp"

namespace fwadapt {

// Plain-text matrices: a header line "rows cols", then one line per row of
// whitespace-separated entries printed with 17 significant digits.

void WriteMatrix(std::ostream& out, const Matrix& matrix);
/// Throws InputError on a malformed header, a short read or a non-finite entry.
Matrix ReadMatrix(std::istream& in);

/// D-optimal instance: the m x n matrix of design vectors.
void SaveInstance(const std::filesystem::path& path, const DOptimalDesign& problem);
/// Poisson instance: the m x n matrix A followed by y as an m x 1 matrix.
void SaveInstance(const std::filesystem::path& path, const PoissonInverse& problem);

DOptimalDesign LoadDOptimalDesign(const std::filesystem::path& path);
PoissonInverse LoadPoissonInverse(const std::filesystem::path& path);

}  // namespace fwadapt
