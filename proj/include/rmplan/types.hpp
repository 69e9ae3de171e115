#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace rmplan {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

/// Random engine used everywhere; seeded explicitly so every run is reproducible.
using Rng = std::mt19937_64;

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kLog2e = std::numbers::log2e;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A slot counts as used when its total frequency fraction exceeds this.
inline constexpr double kActiveTol = 1e-9;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Demand exceeds what the instance can deliver.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double max_throughput = 0.0, Index receiver = -1)
        : std::runtime_error(what), max_throughput(max_throughput), receiver(receiver) {}
    double max_throughput;
    Index receiver;
};

/// An iterative method stopped before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double primal_residual = kInf,
                     double dual_residual = kInf)
        : std::runtime_error(what), primal_residual(primal_residual),
          dual_residual(dual_residual) {}
    double primal_residual;
    double dual_residual;
};

} // namespace rmplan
