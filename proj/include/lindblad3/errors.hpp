// errors.hpp: exception types shared by every lindblad3 module

#pragma once

#include <array>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lindblad3 {

// Input has the wrong number of vectors or components.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A domain type was built from values that break one of its invariants.
struct InvariantError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Eigen-solver failure, singular linear system, non-converging quadrature.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularSystem : NumericalError {
    using NumericalError::NumericalError;
};

struct NonConvergent : NumericalError {
    using NumericalError::NumericalError;
};

// The drift has an eigenvalue with Re(z) >= -stability_margin, so the
// stationary covariance does not exist.
class UnstableDrift : public std::runtime_error {
public:
    explicit UnstableDrift(const std::array<std::complex<double>, 6>& eigenvalues)
        : std::runtime_error(describe(eigenvalues)), eigenvalues_(eigenvalues) {}

    const std::array<std::complex<double>, 6>& eigenvalues() const noexcept { return eigenvalues_; }

private:
    static std::string describe(const std::array<std::complex<double>, 6>& z) {
        std::ostringstream os;
        os.precision(17);
        os << "drift matrix is not strictly stable; eigenvalues:";
        for (const auto& v : z) os << " (" << v.real() << (v.imag() < 0 ? "" : "+") << v.imag() << "i)";
        return os.str();
    }

    std::array<std::complex<double>, 6> eigenvalues_;
};

} // namespace lindblad3
