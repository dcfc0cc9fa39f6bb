#pragma once

#include <cstddef>
#include <string_view>

// Dense inner-loop kernels used by the quadrature reductions and the
// quasi-Newton vector arithmetic. Scalar reference implementations are
// always available; an AVX2+FMA variant is selected at runtime when the
// CPU supports it. The environment variable SUPINF_KERNELS=scalar|avx2
// overrides the selection. Results of the two backends agree to ~1e-12
// relative (reduction order and pow evaluation differ).

namespace supinf::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b);  // throws std::runtime_error if unsupported
std::string_view backend_name();
bool avx2_available();

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);
// sum_i a[i]^2
double nrm2sq(const double* a, std::size_t n);
// sum_i a[i]
double sum(const double* a, std::size_t n);
// y[i] += alpha*x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);
// x[i] *= alpha
void scal(double alpha, double* x, std::size_t n);
// max_i a[i]; -inf for n == 0
double max_val(const double* a, std::size_t n);
// max_i |a[i]|
double max_abs(const double* a, std::size_t n);
// sum_i (a[i]*s)^p with a[i]*s >= 0
double powsum(const double* a, std::size_t n, double p, double s);
// out[i] = (a[i]*s)^p
void powstore(const double* a, double* out, std::size_t n, double p, double s);

}  // namespace supinf::kernels
