#ifndef LDGMIN_POLYNOMIALS_HPP
#define LDGMIN_POLYNOMIALS_HPP

#include <utility>
#include <vector>

namespace ldgmin::poly {

/// Values P_0..P_n of the Jacobi polynomials P_j^{(alpha,beta)} at x in [-1,1].
std::vector<double> jacobi(int n, double alpha, double beta, double x);

/// P_n^{(alpha,beta)}(x) and its derivative.
std::pair<double, double> jacobi_with_derivative(int n, double alpha, double beta, double x);

/// Legendre P_0..P_n at x in [-1,1] and their derivatives.
void legendre(int n, double x, std::vector<double>& values, std::vector<double>& derivatives);

}  // namespace ldgmin::poly

#endif  // LDGMIN_POLYNOMIALS_HPP
