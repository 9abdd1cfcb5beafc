#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace relrisk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A required column is missing or a term references an unknown column.
struct SchemaError : Error {
    using Error::Error;
};

/// A cell could not be parsed; the message carries the row index.
struct ParseError : Error {
    using Error::Error;
};

/// Input violates a documented precondition (bad outcome value, empty data, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// A root finder or linear solve failed.
struct SolverError : Error {
    using Error::Error;
};

/// An iterative estimator stopped without meeting its tolerance.
struct ConvergenceError : Error {
    using Error::Error;
};

/// The log-likelihood is unbounded along some direction (separation-like degeneracy).
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace relrisk
