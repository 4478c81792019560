#pragma once

// Thin overload set over CBLAS/LAPACKE for the two scalar types the
// library uses. Matrices are row-major at this level; the LAPACK calls
// that only exist column-major are handled by the callers.

#include <cblas.h>

#include <complex>
#include <cstddef>
#include <type_traits>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace shor_ttn::linalg {

using cplx = std::complex<double>;

template <class T>
inline constexpr bool is_complex_v = std::is_same_v<T, cplx>;

template <class T>
inline double abs2(T v) {
  if constexpr (is_complex_v<T>) return std::norm(v);
  else return v * v;
}

template <class T>
inline T conj(T v) {
  if constexpr (is_complex_v<T>) return std::conj(v);
  else return v;
}

// C = alpha op(A) op(B) + beta C, row-major.
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                 double alpha, const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double beta, double* c, std::size_t ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
              static_cast<int>(k), alpha, a, static_cast<int>(lda), b, static_cast<int>(ldb),
              beta, c, static_cast<int>(ldc));
}

// Complex transposes are conjugate transposes.
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                 cplx alpha, const cplx* a, std::size_t lda, const cplx* b, std::size_t ldb,
                 cplx beta, cplx* c, std::size_t ldc) {
  cblas_zgemm(CblasRowMajor, trans_a ? CblasConjTrans : CblasNoTrans,
              trans_b ? CblasConjTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), &alpha, a, static_cast<int>(lda), b,
              static_cast<int>(ldb), &beta, c, static_cast<int>(ldc));
}

// Upper triangle of A^H A (trans = true) or A A^H (trans = false), row-major.
inline void gram(bool trans, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                 double* c, std::size_t ldc) {
  cblas_dsyrk(CblasRowMajor, CblasUpper, trans ? CblasTrans : CblasNoTrans,
              static_cast<int>(n), static_cast<int>(k), 1.0, a, static_cast<int>(lda), 0.0, c,
              static_cast<int>(ldc));
}

inline void gram(bool trans, std::size_t n, std::size_t k, const cplx* a, std::size_t lda,
                 cplx* c, std::size_t ldc) {
  cblas_zherk(CblasRowMajor, CblasUpper, trans ? CblasConjTrans : CblasNoTrans,
              static_cast<int>(n), static_cast<int>(k), 1.0, a, static_cast<int>(lda), 0.0, c,
              static_cast<int>(ldc));
}

// Column-major LAPACK drivers. Return the LAPACK info code.

inline int gesdd(int m, int n, double* a, int lda, double* s, double* u, int ldu, double* vt,
                 int ldvt) {
  return LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, a, lda, s, u, ldu, vt, ldvt);
}

inline int gesdd(int m, int n, cplx* a, int lda, double* s, cplx* u, int ldu, cplx* vt,
                 int ldvt) {
  return LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, a, lda, s, u, ldu, vt, ldvt);
}

inline int gesvd(int m, int n, double* a, int lda, double* s, double* u, int ldu, double* vt,
                 int ldvt, double* superb) {
  return LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, a, lda, s, u, ldu, vt, ldvt, superb);
}

inline int gesvd(int m, int n, cplx* a, int lda, double* s, cplx* u, int ldu, cplx* vt,
                 int ldvt, double* superb) {
  return LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, a, lda, s, u, ldu, vt, ldvt, superb);
}

// Eigen-decomposition of a Hermitian matrix, lower triangle referenced,
// eigenvalues ascending, eigenvectors overwrite a (columns).
inline int heevd(int n, double* a, int lda, double* w) {
  return LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a, lda, w);
}

inline int heevd(int n, cplx* a, int lda, double* w) {
  return LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a, lda, w);
}

inline int gelqf(int m, int n, double* a, int lda, double* tau) {
  return LAPACKE_dgelqf(LAPACK_COL_MAJOR, m, n, a, lda, tau);
}

inline int gelqf(int m, int n, cplx* a, int lda, cplx* tau) {
  return LAPACKE_zgelqf(LAPACK_COL_MAJOR, m, n, a, lda, tau);
}

inline int unglq(int m, int n, int k, double* a, int lda, const double* tau) {
  return LAPACKE_dorglq(LAPACK_COL_MAJOR, m, n, k, a, lda, tau);
}

inline int unglq(int m, int n, int k, cplx* a, int lda, const cplx* tau) {
  return LAPACKE_zunglq(LAPACK_COL_MAJOR, m, n, k, a, lda, tau);
}

}  // namespace shor_ttn::linalg
