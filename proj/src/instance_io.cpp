#include "fwadapt/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "fwadapt/errors.hpp"

namespace fwadapt {
namespace {

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open instance file " + path.string());
  return in;
}

}  // namespace

void WriteMatrix(std::ostream& out, const Matrix& matrix) {
  out << matrix.rows() << ' ' << matrix.cols() << '\n';
  const auto old_precision = out.precision(17);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out << ' ';
      out << matrix(i, j);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

Matrix ReadMatrix(std::istream& in) {
  long long rows = -1;
  long long cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw InputError("matrix file: expected a header line 'rows cols'");
  }
  Matrix matrix(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    for (long long j = 0; j < cols; ++j) {
      std::string token;
      if (!(in >> token)) {
        std::ostringstream msg;
        msg << "matrix file: ran out of entries at (" << i << ", " << j << ")";
        throw InputError(msg.str());
      }
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(value)) {
        throw InputError("matrix file: bad entry '" + token + "'");
      }
      matrix(i, j) = value;
    }
  }
  return matrix;
}

void SaveInstance(const std::filesystem::path& path, const DOptimalDesign& problem) {
  auto out = OpenForWrite(path);
  WriteMatrix(out, problem.vectors());
}

void SaveInstance(const std::filesystem::path& path, const PoissonInverse& problem) {
  auto out = OpenForWrite(path);
  WriteMatrix(out, problem.measurement());
  WriteMatrix(out, problem.counts());
}

DOptimalDesign LoadDOptimalDesign(const std::filesystem::path& path) {
  auto in = OpenForRead(path);
  return DOptimalDesign(ReadMatrix(in));
}

PoissonInverse LoadPoissonInverse(const std::filesystem::path& path) {
  auto in = OpenForRead(path);
  Matrix a = ReadMatrix(in);
  Matrix y = ReadMatrix(in);
  if (y.cols() != 1) throw InputError("Poisson instance: y must be stored as an m x 1 matrix");
  return PoissonInverse(std::move(a), y.col(0));
}

}  // namespace fwadapt
