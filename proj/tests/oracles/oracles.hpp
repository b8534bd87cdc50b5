#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// Fixed-step RK4 for y' = v(y), D' = v'(y) D along the straight path 0 -> t (d = 1).
// v' is a central difference of v; D(t) is the variational derivative d gamma / d k.
struct Variational {
    cplx gamma;
    cplx det;
};
Variational variational_rk4(const std::function<cplx(cplx)>& v, cplx k, cplx t, int steps = 4000);

// Real roots of a polynomial with coefficients c[0] + c[1] x + ... via the companion matrix.
std::vector<double> real_roots(const std::vector<double>& c, double imag_tol = 1e-9);

// Lowest eigenvalue of -a d^2/dx^2 + V(x) on [-L, L] (Dirichlet), second-order differences
// at spacing h and h/2 combined by Richardson extrapolation.
double lowest_eigenvalue_fd(double a, const std::function<double(double)>& V, double L, double h);

// min / max of g on the set {k : |w(k) - lambda| <= width} by dense sampling of [-K, K].
struct ShellExtrema {
    double min = 0.0, max = 0.0;
};
ShellExtrema shell_extrema(const std::function<double(double)>& g, const std::function<double(double)>& w,
                           double lambda, double width, double K, int samples);

// e^{i theta A} H e^{-i theta A} with the Pade matrix exponential.
Eigen::MatrixXcd pade_conjugation(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& A, cplx theta);

// Spectral projector of a simple eigenvalue from right/left eigenvectors: v w^H / (w^H v).
Eigen::MatrixXcd simple_projector(const Eigen::MatrixXcd& M, cplx lambda);

// (2 pi)^{-1/2} int f(x) e^{-i k x} dx by the trapezoid rule on [-L, L].
cplx trapezoid_transform(const std::function<double(double)>& f, cplx k, double L, int n);

}  // namespace oracle
