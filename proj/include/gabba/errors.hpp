#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gabba {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DegenerateChannel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a reduction stage loses its block-diagonal form.
struct StructuralFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class Real>
using Cplx = std::complex<Real>;
template <class Real>
using CMat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using CVec = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

inline bool is_pow2(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

inline int ilog2(std::size_t n) {
    int l = 0;
    while ((std::size_t{1} << l) < n) ++l;
    return l;
}

inline void require_pow2(std::size_t n, const char* what, std::size_t min = 1) {
    if (!is_pow2(n) || n < min)
        throw DimensionError(std::string(what) + ": " + std::to_string(n) + " is not a power of two >= " +
                             std::to_string(min));
}

}  // namespace gabba
