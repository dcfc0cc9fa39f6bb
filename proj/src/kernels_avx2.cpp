// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; only reached
// through the runtime dispatch in kernels.cpp.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <limits>

namespace supinf::kernels::avx2_impl {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(s, s);
  return _mm_cvtsd_f64(_mm_add_sd(s, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m = _mm_max_pd(lo, hi);
  __m128d mh = _mm_unpackhi_pd(m, m);
  return _mm_cvtsd_f64(_mm_max_sd(m, mh));
}

// x^k lane-wise by binary exponentiation; all lanes share the exponent.
inline __m256d pow_u64(__m256d x, unsigned long long k) {
  __m256d r = _mm256_set1_pd(1.0);
  __m256d b = x;
  while (k) {
    if (k & 1ULL) r = _mm256_mul_pd(r, b);
    b = _mm256_mul_pd(b, b);
    k >>= 1ULL;
  }
  return r;
}

inline bool integer_exponent(double p, unsigned long long& k) {
  if (p < 0.0 || p > 4096.0) return false;
  const double r = std::nearbyint(p);
  if (r != p) return false;
  k = static_cast<unsigned long long>(r);
  return true;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double nrm2sq(const double* a, std::size_t n) { return dot(a, a, n); }

double sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

double max_val(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(a);
    for (i = 4; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(a + i));
    m = hmax(vm);
  }
  for (; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

double max_abs(const double* a, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vm = _mm256_max_pd(vm, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
  double m = n >= 4 ? hmax(vm) : 0.0;
  for (; i < n; ++i) {
    const double v = std::fabs(a[i]);
    m = v > m ? v : m;
  }
  return m;
}

double powsum(const double* a, std::size_t n, double p, double s) {
  unsigned long long k;
  if (!integer_exponent(p, k)) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::pow(a[i] * s, p);
    return acc;
  }
  const __m256d vs = _mm256_set1_pd(s);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_mul_pd(_mm256_loadu_pd(a + i), vs);
    acc = _mm256_add_pd(acc, pow_u64(x, k));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += std::pow(a[i] * s, p);
  return total;
}

void powstore(const double* a, double* out, std::size_t n, double p, double s) {
  unsigned long long k;
  if (!integer_exponent(p, k)) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(a[i] * s, p);
    return;
  }
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_mul_pd(_mm256_loadu_pd(a + i), vs);
    _mm256_storeu_pd(out + i, pow_u64(x, k));
  }
  for (; i < n; ++i) out[i] = std::pow(a[i] * s, p);
}

}  // namespace supinf::kernels::avx2_impl
