#include "supinf/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace supinf::kernels {

namespace scalar_impl {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double nrm2sq(const double* a, std::size_t n) { return dot(a, a, n); }

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double max_val(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

double max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(a[i]);
    m = v > m ? v : m;
  }
  return m;
}

double powsum(const double* a, std::size_t n, double p, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::pow(a[i] * s, p);
  return acc;
}

void powstore(const double* a, double* out, std::size_t n, double p, double s) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(a[i] * s, p);
}

}  // namespace scalar_impl

#if defined(SUPINF_BUILD_AVX2)
namespace avx2_impl {
double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* a, std::size_t n);
double sum(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
double max_val(const double* a, std::size_t n);
double max_abs(const double* a, std::size_t n);
double powsum(const double* a, std::size_t n, double p, double s);
void powstore(const double* a, double* out, std::size_t n, double p, double s);
}  // namespace avx2_impl
#endif

namespace {

struct Vtable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*nrm2sq)(const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  double (*max_val)(const double*, std::size_t);
  double (*max_abs)(const double*, std::size_t);
  double (*powsum)(const double*, std::size_t, double, double);
  void (*powstore)(const double*, double*, std::size_t, double, double);
};

constexpr Vtable kScalar{scalar_impl::dot,     scalar_impl::nrm2sq,  scalar_impl::sum,
                         scalar_impl::axpy,    scalar_impl::scal,    scalar_impl::max_val,
                         scalar_impl::max_abs, scalar_impl::powsum,  scalar_impl::powstore};

#if defined(SUPINF_BUILD_AVX2)
constexpr Vtable kAvx2{avx2_impl::dot,     avx2_impl::nrm2sq,  avx2_impl::sum,
                       avx2_impl::axpy,    avx2_impl::scal,    avx2_impl::max_val,
                       avx2_impl::max_abs, avx2_impl::powsum,  avx2_impl::powstore};
#endif

bool cpu_has_avx2() {
#if defined(SUPINF_BUILD_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Vtable* table_for(Backend b) {
#if defined(SUPINF_BUILD_AVX2)
  if (b == Backend::avx2) return &kAvx2;
#endif
  (void)b;
  return &kScalar;
}

struct Dispatch {
  Backend backend;
  const Vtable* vt;
  Dispatch() {
    backend = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
    if (const char* env = std::getenv("SUPINF_KERNELS")) {
      if (std::strcmp(env, "scalar") == 0) backend = Backend::scalar;
      if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) backend = Backend::avx2;
    }
    vt = table_for(backend);
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

bool avx2_available() { return cpu_has_avx2(); }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !cpu_has_avx2())
    throw std::runtime_error("kernels: avx2 backend not available on this CPU/build");
  dispatch().backend = b;
  dispatch().vt = table_for(b);
}

std::string_view backend_name() {
  return dispatch().backend == Backend::avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) { return dispatch().vt->dot(a, b, n); }
double nrm2sq(const double* a, std::size_t n) { return dispatch().vt->nrm2sq(a, n); }
double sum(const double* a, std::size_t n) { return dispatch().vt->sum(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { dispatch().vt->axpy(alpha, x, y, n); }
void scal(double alpha, double* x, std::size_t n) { dispatch().vt->scal(alpha, x, n); }
double max_val(const double* a, std::size_t n) { return dispatch().vt->max_val(a, n); }
double max_abs(const double* a, std::size_t n) { return dispatch().vt->max_abs(a, n); }
double powsum(const double* a, std::size_t n, double p, double s) {
  return dispatch().vt->powsum(a, n, p, s);
}
void powstore(const double* a, double* out, std::size_t n, double p, double s) {
  dispatch().vt->powstore(a, out, n, p, s);
}

}  // namespace supinf::kernels
