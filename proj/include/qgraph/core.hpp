#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qgraph {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex ci{0.0, 1.0};

/// Inclusive range of integer cell indices.
struct CellRange {
    int first = 0;
    int last = 0;

    int size() const { return last - first + 1; }
    bool contains(int i) const { return i >= first && i <= last; }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// Thrown when the loop elimination behind the transfer matrix is singular
/// (k * l_v hits a multiple of pi).
struct SingularElimination : std::domain_error {
    using std::domain_error::domain_error;
};

/// Thrown when a Bloch-seeded candidate is requested at a wavenumber where
/// the transfer matrix has no unit-modulus eigenvalue.
struct NotInBand : std::domain_error {
    using std::domain_error::domain_error;
};

/// Thrown when an eigenvalue sits too close to -1 to classify reliably.
struct IllConditionedGap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reduce an angle to [0, 2*pi).
inline double wrap_angle(double a) {
    double r = std::fmod(a, 2.0 * pi);
    if (r < 0.0) r += 2.0 * pi;
    return r;
}

/// Signed distance of an angle from 0 modulo 2*pi, in (-pi, pi].
inline double angle_distance(double a) {
    double r = std::fmod(a, 2.0 * pi);
    if (r > pi) r -= 2.0 * pi;
    if (r <= -pi) r += 2.0 * pi;
    return r;
}

inline Complex unit_phase(double a) { return std::exp(ci * a); }

/// Largest singular value.
inline double spectral_norm(const CMatrix& m) {
    return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
}

/// Distance of x to the nearest integer multiple of pi.
inline double distance_to_pi_multiple(double x) {
    double n = std::round(x / pi);
    return std::abs(x - n * pi);
}

}  // namespace qgraph
