#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cobase {

// Error taxonomy mirrored by the CLI exit codes: ConfigError -> 2,
// DataError -> 3, InternalError -> 4.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public DataError {
public:
  using DataError::DataError;
};

class InternalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles. Small and value-semantic; all the
// multivariate data in this library (ensembles, samples, rank patterns)
// lives in these.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
  const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

  std::vector<double> row(std::size_t r) const {
    return std::vector<double>(row_ptr(r), row_ptr(r) + cols_);
  }
  std::vector<double> col(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Integer matrix for rank patterns.
class IntMatrix {
public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols, int fill = 0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  int& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  int operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  bool operator==(const IntMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<int> data_;
};

enum class Variable { T2m, DPT };

std::string variable_name(Variable v);
Variable parse_variable(const std::string& name);

// One univariate forecast dimension: a (station, variable) pair.
struct MarginId {
  std::string station;
  Variable variable = Variable::T2m;

  std::string label() const { return station + ":" + variable_name(variable); }
  bool operator==(const MarginId& o) const {
    return station == o.station && variable == o.variable;
  }
};

// --- Calendar -----------------------------------------------------------
//
// Dates are plain serial day numbers (days since 1970-01-01). The seasonal
// window logic works on a 365-day circle: in leap years, days after Feb 28
// keep their non-leap day-of-year and Feb 29 itself is assigned day 365.

int serial_from_civil(int year, int month, int day);
void civil_from_serial(int serial, int& year, int& month, int& day);
int parse_iso_date(const std::string& iso);  // "YYYY-MM-DD"
std::string iso_date(int serial);
int day_of_year_365(int serial);             // 1..365
int doy_circular_distance(int a, int b);     // distance on the 365-day circle

}  // namespace cobase
