#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hn {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using SparseCMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: parameters out of range, inconsistent dimensions, unknown options.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// det[H - E0] vanishes at some flux: E0 collides with an eigenvalue.
class SingularAtBaseEnergy : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Left/right eigenvectors cannot be paired (eigenvalues closer than the guard).
class BiorthogonalizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IllDefinedWinding : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hn
