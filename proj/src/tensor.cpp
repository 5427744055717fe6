#include "ocda/tensor.hpp"

#include <cblas.h>

#include <vector>

namespace ocda {

namespace {

struct BlasInit {
  BlasInit() {
#ifdef OPENBLAS_VERSION
    openblas_set_num_threads(1);
#endif
  }
};
const BlasInit blas_init;

}  // namespace

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const double* a, const double* b, double beta, double* c) {
  const int lda = trans_a ? m : k;
  const int ldb = trans_b ? k : n;
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, n);
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const Dual* a, const Dual* b, double beta, Dual* c) {
  const std::size_t an = static_cast<std::size_t>(m) * k;
  const std::size_t bn = static_cast<std::size_t>(k) * n;
  const std::size_t cn = static_cast<std::size_t>(m) * n;
  std::vector<double> av(an), ad(an), bv(bn), bd(bn), cv(cn), cd(cn);
  for (std::size_t i = 0; i < an; ++i) {
    av[i] = a[i].v;
    ad[i] = a[i].d;
  }
  for (std::size_t i = 0; i < bn; ++i) {
    bv[i] = b[i].v;
    bd[i] = b[i].d;
  }
  if (beta != 0.0) {
    for (std::size_t i = 0; i < cn; ++i) {
      cv[i] = c[i].v;
      cd[i] = c[i].d;
    }
  }
  gemm(trans_a, trans_b, m, n, k, alpha, av.data(), bv.data(), beta, cv.data());
  gemm(trans_a, trans_b, m, n, k, alpha, av.data(), bd.data(), beta, cd.data());
  gemm(trans_a, trans_b, m, n, k, alpha, ad.data(), bv.data(), 1.0, cd.data());
  for (std::size_t i = 0; i < cn; ++i) c[i] = Dual{cv[i], cd[i]};
}

}  // namespace ocda
