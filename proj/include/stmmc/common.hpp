#ifndef STMMC_COMMON_HPP
#define STMMC_COMMON_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stmmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, matrices, labelings).
class DataError : public Error {
public:
    using Error::Error;
};

/// Mismatched matrix shapes passed to a model primitive.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

/// Invalid configuration value or unparseable config file.
class ConfigError : public Error {
public:
    using Error::Error;
};

std::string shape_string(Index rows, Index cols);

} // namespace stmmc

#endif
